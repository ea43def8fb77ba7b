//! The saturated 2×2 factorial design.
//!
//! Each observation is regressed on the indicator row `(1, i_x, i_y, i_x·i_y)`:
//!
//! | i_x | i_y | cell            |
//! |-----|-----|-----------------|
//! | 0   | 0   | reference       |
//! | 1   | 0   | reference + X   |
//! | 0   | 1   | reference + Y   |
//! | 1   | 1   | reference + X + Y |
//!
//! so β₃ is the interaction coefficient. Significance of β₃ comes from the
//! two-way ANOVA with replicates (seeds) in each cell.

use std::fmt;

use serde::Serialize;

use super::special::{f_sf, t_sf_two_sided};
use super::ttest::{sum_sq_dev, TTestResult};
use super::StatError;
use crate::scalar::{mean, Real, Scalar};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Cell {
    Reference,
    X,
    Y,
    Both,
}

impl Cell {
    pub const ALL: [Cell; 4] = [Cell::Reference, Cell::X, Cell::Y, Cell::Both];

    /// Indicator values `(i_x, i_y)`.
    pub fn indicators(self) -> (u8, u8) {
        match self {
            Cell::Reference => (0, 0),
            Cell::X => (1, 0),
            Cell::Y => (0, 1),
            Cell::Both => (1, 1),
        }
    }

    fn design_row<T: Scalar>(self) -> [T; 4] {
        let (ix, iy) = self.indicators();
        let ix = T::from_u8(ix).expect("0/1");
        let iy = T::from_u8(iy).expect("0/1");
        [T::one(), ix.clone(), iy.clone(), ix * iy]
    }
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (ix, iy) = self.indicators();
        write!(f, "(i_x={ix}, i_y={iy})")
    }
}

/// Replicate observations for the four cells, in [`Cell::ALL`] order.
#[derive(Debug, Clone, PartialEq)]
pub struct CellSamples<T> {
    cells: [Vec<T>; 4],
}

impl<T: Scalar> CellSamples<T> {
    pub fn new(reference: Vec<T>, x: Vec<T>, y: Vec<T>, both: Vec<T>) -> Self {
        Self {
            cells: [reference, x, y, both],
        }
    }

    pub fn cell(&self, cell: Cell) -> &[T] {
        &self.cells[cell as usize]
    }

    pub fn sizes(&self) -> [usize; 4] {
        [0, 1, 2, 3].map(|i| self.cells[i].len())
    }

    /// Exchanges the roles of X and Y.
    pub fn swapped(&self) -> Self {
        Self::new(
            self.cells[0].clone(),
            self.cells[2].clone(),
            self.cells[1].clone(),
            self.cells[3].clone(),
        )
    }

    fn check_non_empty(&self) -> Result<(), StatError> {
        match Cell::ALL.iter().find(|c| self.cell(**c).is_empty()) {
            Some(c) => Err(StatError::EmptyCell(*c)),
            None => Ok(()),
        }
    }

    pub fn cell_means(&self) -> Result<[T; 4], StatError> {
        self.check_non_empty()?;
        Ok(Cell::ALL.map(|c| mean(self.cell(c)).expect("checked non-empty")))
    }

    /// ȳ₁₁ − ȳ₁₀ − ȳ₀₁ + ȳ₀₀.
    pub fn interaction_contrast(&self) -> Result<T, StatError> {
        let [m00, m10, m01, m11] = self.cell_means()?;
        Ok(m11 - m10 - m01 + m00)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegressionFit<T> {
    /// (β₀, β₁, β₂, β₃)
    pub beta: [T; 4],
    pub residual_ss: T,
    /// Fitted value per cell, in [`Cell::ALL`] order.
    pub fitted: [T; 4],
    pub n_observations: usize,
}

/// Ordinary least squares on the indicator design, via the 4×4 normal equations.
pub fn fit_2x2<T: Scalar>(samples: &CellSamples<T>) -> Result<RegressionFit<T>, StatError> {
    samples.check_non_empty()?;
    let (xtx, xty) = normal_equations(samples);
    let beta = solve4(xtx, xty)?;
    let fitted = Cell::ALL.map(|c| dot(&c.design_row(), &beta));
    let mut residual_ss = T::zero();
    for (c, fit) in Cell::ALL.iter().zip(fitted.iter()) {
        for y in samples.cell(*c) {
            let r = y.clone() - fit.clone();
            residual_ss = residual_ss + r.clone() * r;
        }
    }
    Ok(RegressionFit {
        beta,
        residual_ss,
        fitted,
        n_observations: samples.sizes().iter().sum(),
    })
}

fn normal_equations<T: Scalar>(samples: &CellSamples<T>) -> ([[T; 4]; 4], [T; 4]) {
    let zero_row = || [T::zero(), T::zero(), T::zero(), T::zero()];
    let mut xtx = [zero_row(), zero_row(), zero_row(), zero_row()];
    let mut xty = zero_row();
    for c in Cell::ALL {
        let row: [T; 4] = c.design_row();
        for y in samples.cell(c) {
            for i in 0..4 {
                for j in 0..4 {
                    xtx[i][j] = xtx[i][j].clone() + row[i].clone() * row[j].clone();
                }
                xty[i] = xty[i].clone() + row[i].clone() * y.clone();
            }
        }
    }
    (xtx, xty)
}

fn dot<T: Scalar>(a: &[T; 4], b: &[T; 4]) -> T {
    a.iter()
        .zip(b.iter())
        .fold(T::zero(), |acc, (x, y)| acc + x.clone() * y.clone())
}

fn abs<T: Scalar>(v: &T) -> T {
    if *v < T::zero() {
        -v.clone()
    } else {
        v.clone()
    }
}

/// Gaussian elimination with partial pivoting.
fn solve4<T: Scalar>(mut a: [[T; 4]; 4], mut b: [T; 4]) -> Result<[T; 4], StatError> {
    for col in 0..4 {
        let pivot = (col..4)
            .max_by(|&i, &j| abs(&a[i][col]).partial_cmp(&abs(&a[j][col])).expect("comparable"))
            .expect("non-empty range");
        if a[pivot][col] == T::zero() {
            return Err(StatError::Singular);
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in col + 1..4 {
            let factor = a[row][col].clone() / a[col][col].clone();
            let pivot_row = a[col].clone();
            for (v, p) in a[row].iter_mut().zip(&pivot_row).skip(col) {
                *v = v.clone() - factor.clone() * p.clone();
            }
            b[row] = b[row].clone() - factor * b[col].clone();
        }
    }
    let mut x = [T::zero(), T::zero(), T::zero(), T::zero()];
    for row in (0..4).rev() {
        let mut acc = b[row].clone();
        for k in row + 1..4 {
            acc = acc - a[row][k].clone() * x[k].clone();
        }
        x[row] = acc / a[row][row].clone();
    }
    Ok(x)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AnovaResult<T> {
    /// F statistic of the interaction term.
    pub f: T,
    pub df_num: u32,
    /// 4·(n − 1) for n replicates per cell.
    pub df_den: u32,
    pub p: T,
    pub beta3: T,
    pub ss_interaction: T,
    pub ss_error: T,
    /// Every cell was constant, so the error variance is zero.
    pub degenerate: bool,
}

/// Interaction F-test for a balanced 2×2 design with n ≥ 2 replicates per cell.
///
/// Sums of squares are obtained by decomposition: SS_AB = SS_cells − SS_A − SS_B,
/// SS_E = within-cell scatter.
pub fn anova_interaction<T: Real>(samples: &CellSamples<T>) -> Result<AnovaResult<T>, StatError> {
    samples.check_non_empty()?;
    let sizes = samples.sizes();
    if sizes.iter().any(|&s| s != sizes[0]) {
        return Err(StatError::Unbalanced(sizes));
    }
    let n = sizes[0];
    if n < 2 {
        return Err(StatError::InsufficientSample { needed: 2, got: n });
    }
    let [m00, m10, m01, m11] = samples.cell_means()?;
    let nn = T::lit(n as f64);
    let two = T::lit(2.0);
    let grand = (m00 + m10 + m01 + m11) / T::lit(4.0);
    let sq = |v: T| v * v;

    let ss_a = two * nn * (sq((m10 + m11) / two - grand) + sq((m00 + m01) / two - grand));
    let ss_b = two * nn * (sq((m01 + m11) / two - grand) + sq((m00 + m10) / two - grand));
    let ss_cells = nn * (sq(m00 - grand) + sq(m10 - grand) + sq(m01 - grand) + sq(m11 - grand));
    let ss_interaction = (ss_cells - ss_a - ss_b).max(T::zero());
    let means = [m00, m10, m01, m11];
    let ss_error = Cell::ALL
        .iter()
        .zip(means.iter())
        .fold(T::zero(), |acc, (c, m)| acc + sum_sq_dev(samples.cell(*c), *m));

    let beta3 = m11 - m10 - m01 + m00;
    let df_den = (4 * (n - 1)) as u32;

    if Cell::ALL.iter().all(|c| is_constant(samples.cell(*c))) {
        let scale = means.iter().fold(T::zero(), |acc, m| acc.max(m.abs()));
        let zero_contrast = beta3.abs() <= T::lit(16.0) * T::epsilon() * scale;
        let (f, p) = if zero_contrast {
            (T::zero(), T::one())
        } else {
            (T::infinity(), T::zero())
        };
        return Ok(AnovaResult {
            f,
            df_num: 1,
            df_den,
            p,
            beta3,
            ss_interaction,
            ss_error: T::zero(),
            degenerate: true,
        });
    }

    let ms_error = ss_error / T::lit(f64::from(df_den));
    let f = ss_interaction / ms_error;
    let p = f_sf(f, 1, df_den)?;
    Ok(AnovaResult {
        f,
        df_num: 1,
        df_den,
        p,
        beta3,
        ss_interaction,
        ss_error,
        degenerate: false,
    })
}

/// t-test of β₃ = 0 from the regression itself: t = β₃ / SE(β₃), where
/// SE² = MSE · [(XᵀX)⁻¹]₃₃ and dof = N − 4. Valid for unbalanced designs too.
pub fn interaction_t_test<T: Real>(samples: &CellSamples<T>) -> Result<TTestResult<T>, StatError> {
    let fit = fit_2x2(samples)?;
    let n_obs = fit.n_observations;
    if n_obs < 5 {
        return Err(StatError::InsufficientSample { needed: 5, got: n_obs });
    }
    let dof = T::lit((n_obs - 4) as f64);
    let (xtx, _) = normal_equations(samples);
    let e3 = [T::zero(), T::zero(), T::zero(), T::one()];
    let inv33 = solve4(xtx, e3)?[3];
    let beta3 = fit.beta[3];
    if fit.residual_ss == T::zero() || Cell::ALL.iter().all(|c| is_constant(samples.cell(*c))) {
        let (t, p) = if beta3 == T::zero() {
            (T::zero(), T::one())
        } else {
            (beta3.signum() * T::infinity(), T::zero())
        };
        return Ok(TTestResult {
            t,
            dof,
            p,
            degenerate: true,
        });
    }
    let se = (fit.residual_ss / dof * inv33).sqrt();
    let t = beta3 / se;
    let p = t_sf_two_sided(t, (n_obs - 4) as u32)?;
    Ok(TTestResult {
        t,
        dof,
        p,
        degenerate: false,
    })
}

fn is_constant<T: PartialEq>(s: &[T]) -> bool {
    s.iter().all(|v| *v == s[0])
}
