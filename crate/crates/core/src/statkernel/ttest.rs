use serde::Serialize;

use super::special::t_sf_two_sided_real;
use super::StatError;
use crate::scalar::{mean, Real};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum TTestKind {
    /// Equal-variance Student t, dof = n₁ + n₂ − 2.
    #[default]
    Pooled,
    /// Welch–Satterthwaite, for unequal replicate counts or variances.
    Welch,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TTestResult<T> {
    pub t: T,
    /// Degrees of freedom. Integral for the pooled test.
    pub dof: T,
    /// Two-sided p-value.
    pub p: T,
    /// Both samples had zero spread, so no variance estimate exists.
    pub degenerate: bool,
}

pub fn pooled_t_test<T: Real>(xs: &[T], ys: &[T]) -> Result<TTestResult<T>, StatError> {
    two_sample_t_test(xs, ys, TTestKind::Pooled)
}

pub fn welch_t_test<T: Real>(xs: &[T], ys: &[T]) -> Result<TTestResult<T>, StatError> {
    two_sample_t_test(xs, ys, TTestKind::Welch)
}

/// Independent two-sample t-test of `mean(xs) − mean(ys)`.
///
/// When both samples are constant the result is flagged `degenerate`: t = 0 and
/// p = 1 for equal values, t = ±∞ and p = 0 otherwise.
pub fn two_sample_t_test<T: Real>(xs: &[T], ys: &[T], kind: TTestKind) -> Result<TTestResult<T>, StatError> {
    for s in [xs, ys] {
        if s.len() < 2 {
            return Err(StatError::InsufficientSample {
                needed: 2,
                got: s.len(),
            });
        }
        if s.iter().any(|v| !v.is_finite()) {
            return Err(StatError::invalid("samples must be finite"));
        }
    }
    let n1 = T::lit(xs.len() as f64);
    let n2 = T::lit(ys.len() as f64);
    let pooled_dof = n1 + n2 - T::lit(2.0);

    if is_constant(xs) && is_constant(ys) {
        let diff = xs[0] - ys[0];
        let (t, p) = if diff == T::zero() {
            (T::zero(), T::one())
        } else {
            (diff.signum() * T::infinity(), T::zero())
        };
        let dof = match kind {
            TTestKind::Pooled => pooled_dof,
            TTestKind::Welch => T::nan(),
        };
        return Ok(TTestResult {
            t,
            dof,
            p,
            degenerate: true,
        });
    }

    let m1 = mean(xs).expect("non-empty");
    let m2 = mean(ys).expect("non-empty");
    let ss1 = sum_sq_dev(xs, m1);
    let ss2 = sum_sq_dev(ys, m2);

    let (se, dof) = match kind {
        TTestKind::Pooled => {
            let var = (ss1 + ss2) / pooled_dof;
            ((var * (n1.recip() + n2.recip())).sqrt(), pooled_dof)
        }
        TTestKind::Welch => {
            let a = ss1 / (n1 - T::one()) / n1;
            let b = ss2 / (n2 - T::one()) / n2;
            let dof = (a + b) * (a + b) / (a * a / (n1 - T::one()) + b * b / (n2 - T::one()));
            ((a + b).sqrt(), dof)
        }
    };
    let t = (m1 - m2) / se;
    let p = t_sf_two_sided_real(t, dof)?;
    Ok(TTestResult {
        t,
        dof,
        p,
        degenerate: false,
    })
}

fn is_constant<T: Real>(s: &[T]) -> bool {
    s.iter().all(|v| *v == s[0])
}

pub(crate) fn sum_sq_dev<T: Real>(s: &[T], m: T) -> T {
    s.iter().fold(T::zero(), |acc, v| acc + (*v - m) * (*v - m))
}
