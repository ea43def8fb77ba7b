//! Significance tables, dataset effect cards and state-plane plots.
//!
//! All values are rendered in percentage points, rounded to two decimals half
//! away from zero, with `*`/`**`/`***` for p < 0.05/0.01/0.001. Rendering is
//! pure: the same input always produces the same bytes.

use std::collections::BTreeSet;
use std::fmt::{self, Write as _};
use std::str::FromStr;

use serde::Serialize;
use thiserror::Error;

use crate::effects::{
    individual_effect, interaction_effect, interaction_pairs, persistence_summary, reference_states, EffectError,
    EffectOptions, EffectResult, InteractionResult, PersistenceSummary, DEFAULT_ALPHA, DEFAULT_THRESHOLD,
};
use crate::records::{Condition, ProbeDimension, RecordStore};
use crate::statevector::StateVector;
use crate::statkernel::{star_suffix, stars};

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("table has no rows")]
    EmptyRows,
    #[error("rows disagree on the dimension list")]
    MixedDimensions,
    #[error("state {condition} has no dimension `{dimension}`")]
    MissingDimension { condition: String, dimension: String },
    #[error("nothing to plot")]
    EmptyStates,
    #[error("arrow endpoint refers to state {0}, which does not exist")]
    BadAnchor(usize),
    #[error("no analyzable reference state for {dataset} on {model}")]
    NoAnalyzableData { dataset: String, model: String },
    #[error("unknown table format `{0}` (expected md, csv, latex or json)")]
    UnknownFormat(String),
    #[error(transparent)]
    Effect(#[from] EffectError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TableFormat {
    #[default]
    Markdown,
    Csv,
    Latex,
    Json,
}

impl FromStr for TableFormat {
    type Err = ReportError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "md" | "markdown" => Ok(Self::Markdown),
            "csv" => Ok(Self::Csv),
            "latex" | "tex" => Ok(Self::Latex),
            "json" => Ok(Self::Json),
            _ => Err(ReportError::UnknownFormat(s.to_string())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TableKind {
    Individual,
    Interaction,
    Persistence,
}

#[derive(Debug, Clone, PartialEq)]
pub enum TableRows {
    Individual(Vec<EffectResult<f64>>),
    Interaction(Vec<InteractionResult<f64>>),
    Persistence(Vec<PersistenceSummary>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct TableSpec {
    pub rows: TableRows,
    pub format: TableFormat,
}

impl TableSpec {
    pub fn kind(&self) -> TableKind {
        match self.rows {
            TableRows::Individual(_) => TableKind::Individual,
            TableRows::Interaction(_) => TableKind::Interaction,
            TableRows::Persistence(_) => TableKind::Persistence,
        }
    }
}

/// Rounds to two decimals, half away from zero, and never prints `-0.00`.
///
/// Rounding operates on the shortest decimal representation of `v`, so 6.345
/// becomes 6.35 even though its binary value lies slightly below.
pub fn format_pp(v: f64) -> String {
    if !v.is_finite() {
        return v.to_string();
    }
    let text = v.abs().to_string();
    let (int, frac) = text.split_once('.').unwrap_or((&text, ""));
    let mut digits: Vec<u8> = int
        .bytes()
        .chain(frac.bytes().chain(std::iter::repeat(b'0')).take(2))
        .map(|b| b - b'0')
        .collect();
    if frac.as_bytes().get(2).is_some_and(|&d| d >= b'5') {
        let mut i = digits.len();
        loop {
            if i == 0 {
                digits.insert(0, 1);
                break;
            }
            i -= 1;
            if digits[i] == 9 {
                digits[i] = 0;
            } else {
                digits[i] += 1;
                break;
            }
        }
    }
    let zero = digits.iter().all(|&d| d == 0);
    let n = digits.len();
    let to_str = |ds: &[u8]| ds.iter().map(|d| char::from(b'0' + d)).collect::<String>();
    format!(
        "{}{}.{}",
        if v < 0.0 && !zero { "-" } else { "" },
        to_str(&digits[..n - 2]),
        to_str(&digits[n - 2..])
    )
}

/// `format_pp(value)` followed by the star suffix of `p`.
pub fn format_cell(value_pp: f64, p: Option<f64>) -> String {
    format!("{}{}", format_pp(value_pp), star_suffix(p.map(stars).unwrap_or(0)))
}

fn latex_cell(value_pp: f64, p: Option<f64>) -> String {
    let v = format_pp(value_pp);
    let s = star_suffix(p.map(stars).unwrap_or(0));
    if v.starts_with('-') {
        format!("${v}^{{{s}}}$")
    } else {
        format!("$\\hspace{{0.75em}}{v}^{{{s}}}$")
    }
}

#[derive(Serialize)]
struct JsonCell<'a> {
    dimension: &'a ProbeDimension,
    value_pp: f64,
    p: Option<f64>,
    stars: u8,
    text: String,
}

#[derive(Serialize)]
struct JsonRow<'a> {
    #[serde(flatten)]
    labels: serde_json::Map<String, serde_json::Value>,
    cells: Vec<JsonCell<'a>>,
}

/// Row labels plus one (value in pp, p) per dimension.
type GridRow = (Vec<String>, Vec<(f64, Option<f64>)>);

struct Grid {
    headers: Vec<String>,
    dims: Vec<ProbeDimension>,
    rows: Vec<GridRow>,
}

fn reference_label(c: &Condition, latex: bool) -> String {
    if c.is_initial() && latex {
        "$I$".to_string()
    } else {
        c.label()
    }
}

fn check_dims<'a>(
    mut lists: impl Iterator<Item = Vec<&'a ProbeDimension>>,
) -> Result<Vec<ProbeDimension>, ReportError> {
    let first = lists.next().ok_or(ReportError::EmptyRows)?;
    if lists.any(|l| l != first) {
        return Err(ReportError::MixedDimensions);
    }
    Ok(first.into_iter().cloned().collect())
}

fn individual_grid(rows: &[EffectResult<f64>], latex: bool) -> Result<Grid, ReportError> {
    let dims = check_dims(rows.iter().map(|r| r.dims.iter().map(|d| &d.dimension).collect()))?;
    let with_ref = rows.iter().any(|r| !r.reference.is_initial());
    let mut headers = vec!["Dataset".to_string()];
    if with_ref {
        headers.push("Reference".into());
    }
    headers.push("Model".into());
    let rows_out = rows
        .iter()
        .map(|r| {
            let mut labels = vec![r.dataset.clone()];
            if with_ref {
                labels.push(reference_label(&r.reference, latex));
            }
            labels.push(r.model.clone());
            (labels, r.dims.iter().map(|d| (d.delta_pp, d.p)).collect())
        })
        .collect();
    Ok(Grid {
        headers,
        dims,
        rows: rows_out,
    })
}

fn interaction_grid(rows: &[InteractionResult<f64>], latex: bool) -> Result<Grid, ReportError> {
    let dims = check_dims(rows.iter().map(|r| r.dims.iter().map(|d| &d.dimension).collect()))?;
    let with_ref = rows.iter().any(|r| !r.reference.is_initial());
    let mut headers = vec!["X".to_string(), "Y".to_string()];
    if with_ref {
        headers.push("Reference".into());
    }
    headers.push("Model".into());
    let rows_out = rows
        .iter()
        .map(|r| {
            let mut labels = vec![r.x.clone(), r.y.clone()];
            if with_ref {
                labels.push(reference_label(&r.reference, latex));
            }
            labels.push(r.model.clone());
            (labels, r.dims.iter().map(|d| (d.int_pp, d.p)).collect())
        })
        .collect();
    Ok(Grid {
        headers,
        dims,
        rows: rows_out,
    })
}

fn render_grid(grid: &Grid, format: TableFormat) -> String {
    let mut out = String::new();
    let dim_names = grid.dims.iter().map(|d| d.as_str().to_string());
    let header: Vec<String> = grid.headers.iter().cloned().chain(dim_names).collect();
    match format {
        TableFormat::Markdown => {
            let _ = writeln!(out, "| {} |", header.join(" | "));
            let seps: Vec<&str> = header
                .iter()
                .enumerate()
                .map(|(i, _)| if i < grid.headers.len() { "---" } else { "---:" })
                .collect();
            let _ = writeln!(out, "| {} |", seps.join(" | "));
            for (labels, cells) in &grid.rows {
                let texts: Vec<String> = labels
                    .iter()
                    .cloned()
                    .chain(cells.iter().map(|&(v, p)| format_cell(v, p)))
                    .collect();
                let _ = writeln!(out, "| {} |", texts.join(" | "));
            }
        }
        TableFormat::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(&header).expect("in-memory write");
            for (labels, cells) in &grid.rows {
                let texts: Vec<String> = labels
                    .iter()
                    .cloned()
                    .chain(cells.iter().map(|&(v, p)| format_cell(v, p)))
                    .collect();
                w.write_record(&texts).expect("in-memory write");
            }
            out = String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8");
        }
        TableFormat::Latex => {
            let _ = writeln!(out, "\\begin{{tabular}}{{{}}}", "l".repeat(header.len()));
            out.push_str("\\toprule\n");
            let _ = writeln!(out, "{} \\\\", header.join(" & "));
            out.push_str("\\midrule\n");
            for (labels, cells) in &grid.rows {
                let texts: Vec<String> = labels
                    .iter()
                    .cloned()
                    .chain(cells.iter().map(|&(v, p)| latex_cell(v, p)))
                    .collect();
                let _ = writeln!(out, "{} \\\\", texts.join(" & "));
            }
            out.push_str("\\bottomrule\n\\end{tabular}\n");
        }
        TableFormat::Json => {
            let rows: Vec<JsonRow<'_>> = grid
                .rows
                .iter()
                .map(|(labels, cells)| JsonRow {
                    labels: grid
                        .headers
                        .iter()
                        .zip(labels)
                        .map(|(h, l)| (h.to_lowercase(), serde_json::Value::String(l.clone())))
                        .collect(),
                    cells: grid
                        .dims
                        .iter()
                        .zip(cells)
                        .map(|(d, &(v, p))| JsonCell {
                            dimension: d,
                            value_pp: v,
                            p,
                            stars: p.map(stars).unwrap_or(0),
                            text: format_cell(v, p),
                        })
                        .collect(),
                })
                .collect();
            out = serde_json::to_string_pretty(&rows).expect("serializable");
            out.push('\n');
        }
    }
    out
}

fn render_persistence(rows: &[PersistenceSummary], format: TableFormat) -> Result<String, ReportError> {
    if rows.is_empty() {
        return Err(ReportError::EmptyRows);
    }
    check_dims(rows.iter().map(|r| r.dims.iter().map(|d| &d.dimension).collect()))?;
    if format == TableFormat::Json {
        let mut out = serde_json::to_string_pretty(rows).expect("serializable");
        out.push('\n');
        return Ok(out);
    }
    let header = ["Dataset", "Dimension", "Effect", "Model", "Significant"];
    let body: Vec<[String; 5]> = rows
        .iter()
        .flat_map(|r| {
            r.dims.iter().filter_map(move |d| {
                d.persistent_sign.map(|s| {
                    let n = match s {
                        crate::effects::Sign::Positive => d.n_significant_pos,
                        crate::effects::Sign::Negative => d.n_significant_neg,
                    };
                    [
                        r.dataset.clone(),
                        d.dimension.to_string(),
                        s.to_string(),
                        r.model.clone(),
                        format!("{n}/{}", d.n_references),
                    ]
                })
            })
        })
        .collect();
    let mut out = String::new();
    match format {
        TableFormat::Markdown => {
            let _ = writeln!(out, "| {} |", header.join(" | "));
            let _ = writeln!(out, "|{}", " --- |".repeat(header.len()));
            for row in &body {
                let _ = writeln!(out, "| {} |", row.join(" | "));
            }
        }
        TableFormat::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(header).expect("in-memory write");
            for row in &body {
                w.write_record(row).expect("in-memory write");
            }
            out = String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8");
        }
        TableFormat::Latex => {
            out.push_str("\\begin{tabular}{ccccc}\n\\toprule\n");
            let _ = writeln!(out, "{} \\\\ \\midrule", header.join(" & "));
            for row in &body {
                let _ = writeln!(out, "{} \\\\", row.join(" & "));
            }
            out.push_str("\\bottomrule\n\\end{tabular}\n");
        }
        TableFormat::Json => unreachable!(),
    }
    Ok(out)
}

/// One row per result, one column per dimension in catalog order.
pub fn render_table(spec: &TableSpec) -> Result<String, ReportError> {
    let latex = spec.format == TableFormat::Latex;
    let grid = match &spec.rows {
        TableRows::Individual(rows) => individual_grid(rows, latex)?,
        TableRows::Interaction(rows) => interaction_grid(rows, latex)?,
        TableRows::Persistence(rows) => return render_persistence(rows, spec.format),
    };
    Ok(render_grid(&grid, spec.format))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CardOptions {
    pub threshold: f64,
    pub alpha: f64,
    pub effect: EffectOptions,
}

impl Default for CardOptions {
    fn default() -> Self {
        Self {
            threshold: DEFAULT_THRESHOLD,
            alpha: DEFAULT_ALPHA,
            effect: EffectOptions::default(),
        }
    }
}

/// Markdown documentation card for `dataset` on `model`.
///
/// Lists the dimensions on which the dataset's individual effect is
/// persistent across the reference states in the store, and every
/// interaction of the dataset with p < alpha.
pub fn render_card(
    store: &RecordStore,
    dataset: &str,
    model: &str,
    options: &CardOptions,
) -> Result<String, ReportError> {
    let no_data = || ReportError::NoAnalyzableData {
        dataset: dataset.to_string(),
        model: model.to_string(),
    };
    let mut refs = Vec::new();
    let mut effects = Vec::new();
    let mut skipped = Vec::new();
    for r in reference_states(store, dataset, model) {
        match individual_effect::<f64>(store, dataset, &r, &options.effect) {
            Ok(e) => {
                refs.push(r);
                effects.push(e);
            }
            Err(err) if err.is_missing_data() => skipped.push(r),
            Err(err) => return Err(err.into()),
        }
    }
    if refs.is_empty() {
        return Err(no_data());
    }
    let summary = persistence_summary::<f64>(store, dataset, &refs, options.threshold, options.alpha, &options.effect)?;

    let mut interactions = Vec::new();
    for r in &refs {
        for (a, b) in interaction_pairs(store, r) {
            if a != dataset && b != dataset {
                continue;
            }
            let other = if a == dataset { b } else { a };
            match interaction_effect::<f64>(store, dataset, &other, r, &options.effect) {
                Ok(res) => interactions.push(res),
                Err(err) if err.is_missing_data() => {}
                Err(err) => return Err(err.into()),
            }
        }
    }

    let mut out = String::new();
    let _ = writeln!(out, "# Dataset effect card: {dataset} ({model})\n");
    out.push_str("## Persistent individual effects\n\n");
    let persistent: Vec<_> = summary.dims.iter().filter(|d| d.persistent_sign.is_some()).collect();
    if persistent.is_empty() {
        let _ = writeln!(out, "- no persistent effects at threshold {}", options.threshold);
    }
    for d in persistent {
        let sign = d.persistent_sign.expect("filtered");
        let k = effects[0]
            .dims
            .iter()
            .position(|e| e.dimension == d.dimension)
            .expect("aligned");
        let mean = effects.iter().map(|e| e.dims[k].delta_pp).sum::<f64>() / effects.len() as f64;
        let n = d.n_significant_pos.max(d.n_significant_neg);
        let _ = writeln!(
            out,
            "- {} `{}`: significant in {}/{} reference states, mean {} pp",
            d.dimension,
            sign,
            n,
            d.n_references,
            format_pp(mean)
        );
    }

    out.push_str("\n## Interactions observed\n\n");
    let mut any = false;
    for res in &interactions {
        for d in &res.dims {
            if d.p.is_some_and(|p| p < options.alpha) {
                any = true;
                let _ = writeln!(
                    out,
                    "- {} × {} (reference {}): {} {} pp (p = {:.2e})",
                    res.x,
                    res.y,
                    res.reference.label(),
                    d.dimension,
                    format_cell(d.int_pp, d.p),
                    d.p.unwrap_or(f64::NAN)
                );
            }
        }
    }
    if !any {
        let _ = writeln!(out, "- no interactions with p < {}", options.alpha);
    }

    out.push_str("\n## Caveats\n\n");
    out.push_str(
        "- Spill-over: effects on dimensions unrelated to the dataset's task can stem from confounders \
         (model choice, hyperparameters, interactions with other datasets) rather than from the dataset itself.\n",
    );
    let _ = writeln!(
        out,
        "- Persistence requires significance (p < {}) with one sign in at least {}% of reference states and never with the other sign.",
        options.alpha,
        format_pp(options.threshold * 100.0).trim_end_matches(".00")
    );
    if !skipped.is_empty() {
        let labels: Vec<String> = skipped.iter().map(Condition::label).collect();
        let _ = writeln!(out, "- Skipped for missing data: {}", labels.join(", "));
    }
    let degenerate = effects.iter().flat_map(|e| &e.dims).filter(|d| d.degenerate).count();
    if degenerate > 0 {
        let _ = writeln!(
            out,
            "- {degenerate} zero-variance comparisons were flagged as degenerate"
        );
    }

    out.push_str("\n## Provenance\n\n");
    let _ = writeln!(out, "- Store digest: {}", store.content_digest());
    let seeds: BTreeSet<i64> = refs.iter().flat_map(|r| store.seeds(r)).collect();
    let seeds: Vec<String> = seeds.iter().map(i64::to_string).collect();
    let _ = writeln!(out, "- Seeds: {}", seeds.join(", "));
    let labels: Vec<String> = refs.iter().map(Condition::label).collect();
    let _ = writeln!(out, "- Reference states ({}): {}", refs.len(), labels.join("; "));
    let _ = writeln!(out, "- Threshold: {}; alpha: {}", options.threshold, options.alpha);
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Anchor {
    /// Mean of the state at this index.
    State(usize),
    /// A point on the plane, in accuracy units.
    Point(f64, f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArrowStyle {
    Effect,
    Interaction,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Arrow {
    pub from: Anchor,
    pub to: Anchor,
    pub label: String,
    pub style: ArrowStyle,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlanePoint {
    pub label: String,
    pub x: f64,
    pub y: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlaneArrow {
    pub from: (f64, f64),
    pub to: (f64, f64),
    pub label: String,
    pub style: ArrowStyle,
}

/// Data-space geometry of a state-plane plot.
#[derive(Debug, Clone, PartialEq)]
pub struct PlaneLayout {
    pub dim_x: String,
    pub dim_y: String,
    pub points: Vec<PlanePoint>,
    pub arrows: Vec<PlaneArrow>,
    pub x_range: (f64, f64),
    pub y_range: (f64, f64),
}

fn coordinate(state: &StateVector<f64>, dim: &str) -> Result<f64, ReportError> {
    state
        .mean_of(&ProbeDimension::new(dim))
        .copied()
        .ok_or_else(|| ReportError::MissingDimension {
            condition: state.condition().to_string(),
            dimension: dim.to_string(),
        })
}

fn padded(lo: f64, hi: f64) -> (f64, f64) {
    let span = hi - lo;
    let pad = if span > 0.0 { span * 0.1 } else { 0.01 };
    (lo - pad, hi + pad)
}

/// Resolves anchors to coordinates and picks auto-ranged axes (raw accuracy
/// fractions, 10% padding).
pub fn state_plane_layout(
    states: &[StateVector<f64>],
    dim_x: &str,
    dim_y: &str,
    arrows: &[Arrow],
) -> Result<PlaneLayout, ReportError> {
    if states.is_empty() {
        return Err(ReportError::EmptyStates);
    }
    let points = states
        .iter()
        .map(|s| {
            Ok(PlanePoint {
                label: s.condition().label(),
                x: coordinate(s, dim_x)?,
                y: coordinate(s, dim_y)?,
            })
        })
        .collect::<Result<Vec<_>, ReportError>>()?;
    let resolve = |a: &Anchor| match *a {
        Anchor::State(i) => points.get(i).map(|p| (p.x, p.y)).ok_or(ReportError::BadAnchor(i)),
        Anchor::Point(x, y) => Ok((x, y)),
    };
    let arrows = arrows
        .iter()
        .map(|a| {
            Ok(PlaneArrow {
                from: resolve(&a.from)?,
                to: resolve(&a.to)?,
                label: a.label.clone(),
                style: a.style,
            })
        })
        .collect::<Result<Vec<_>, ReportError>>()?;
    let xs = points
        .iter()
        .map(|p| p.x)
        .chain(arrows.iter().flat_map(|a| [a.from.0, a.to.0]));
    let ys = points
        .iter()
        .map(|p| p.y)
        .chain(arrows.iter().flat_map(|a| [a.from.1, a.to.1]));
    let bounds = |it: &mut dyn Iterator<Item = f64>| {
        it.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)))
    };
    let (x0, x1) = bounds(&mut xs.into_iter());
    let (y0, y1) = bounds(&mut ys.into_iter());
    Ok(PlaneLayout {
        dim_x: dim_x.to_string(),
        dim_y: dim_y.to_string(),
        points,
        arrows,
        x_range: padded(x0, x1),
        y_range: padded(y0, y1),
    })
}

/// The three arrows of an interaction diagram for states at the given indices:
/// E(X) from S(I) to S(XI), E(Y) chained from S(XI), and Int from there to
/// S(XYI). Their sum on the plane is S(XYI) − S(I).
pub fn interaction_arrows(
    states: &[StateVector<f64>],
    [reference, x, y, both]: [usize; 4],
    dim_x: &str,
    dim_y: &str,
) -> Result<Vec<Arrow>, ReportError> {
    let at = |i: usize| -> Result<(f64, f64), ReportError> {
        let s = states.get(i).ok_or(ReportError::BadAnchor(i))?;
        Ok((coordinate(s, dim_x)?, coordinate(s, dim_y)?))
    };
    let (r, px, py) = (at(reference)?, at(x)?, at(y)?);
    at(both)?;
    let mid = (px.0 + (py.0 - r.0), px.1 + (py.1 - r.1));
    Ok(vec![
        Arrow {
            from: Anchor::State(reference),
            to: Anchor::State(x),
            label: "E(X)".into(),
            style: ArrowStyle::Effect,
        },
        Arrow {
            from: Anchor::State(x),
            to: Anchor::Point(mid.0, mid.1),
            label: "E(Y)".into(),
            style: ArrowStyle::Effect,
        },
        Arrow {
            from: Anchor::Point(mid.0, mid.1),
            to: Anchor::State(both),
            label: "Int(X,Y)".into(),
            style: ArrowStyle::Interaction,
        },
    ])
}

const WIDTH: f64 = 480.0;
const HEIGHT: f64 = 480.0;
const MARGIN: f64 = 64.0;
const EFFECT_COLOR: &str = "#444444";
const INTERACTION_COLOR: &str = "#7b2cbf";

struct Px(f64);

impl fmt::Display for Px {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:.2}", self.0)
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

/// Two-dimension scatter of state means with labeled arrows, as SVG.
pub fn plot_state_plane(
    states: &[StateVector<f64>],
    dim_x: &str,
    dim_y: &str,
    arrows: &[Arrow],
) -> Result<String, ReportError> {
    let layout = state_plane_layout(states, dim_x, dim_y, arrows)?;
    Ok(render_svg(&layout))
}

pub fn render_svg(layout: &PlaneLayout) -> String {
    let (x0, x1) = layout.x_range;
    let (y0, y1) = layout.y_range;
    let sx = |x: f64| Px(MARGIN + (x - x0) / (x1 - x0) * (WIDTH - 2.0 * MARGIN));
    let sy = |y: f64| Px(HEIGHT - MARGIN - (y - y0) / (y1 - y0) * (HEIGHT - 2.0 * MARGIN));
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}" font-family="sans-serif" font-size="11">"#,
        w = WIDTH,
        h = HEIGHT
    );
    out.push_str("<defs>\n");
    for (id, color) in [("effect", EFFECT_COLOR), ("interaction", INTERACTION_COLOR)] {
        let _ = writeln!(
            out,
            r#"<marker id="head-{id}" viewBox="0 0 10 10" refX="9" refY="5" markerWidth="7" markerHeight="7" orient="auto"><path d="M0,0 L10,5 L0,10 z" fill="{color}"/></marker>"#
        );
    }
    out.push_str("</defs>\n");
    let _ = writeln!(out, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);

    let (left, right, top, bottom) = (MARGIN, WIDTH - MARGIN, MARGIN, HEIGHT - MARGIN);
    let _ = writeln!(
        out,
        r#"<path d="M{l},{t} L{l},{b} L{r},{b}" fill="none" stroke="black"/>"#,
        l = Px(left),
        t = Px(top),
        b = Px(bottom),
        r = Px(right)
    );
    for i in 0..=4 {
        let f = i as f64 / 4.0;
        let xv = x0 + f * (x1 - x0);
        let yv = y0 + f * (y1 - y0);
        let (xp, yp) = (sx(xv), sy(yv));
        let _ = writeln!(
            out,
            r#"<line x1="{xp}" y1="{b}" x2="{xp}" y2="{b2}" stroke="black"/><text x="{xp}" y="{ty}" text-anchor="middle">{xv:.3}</text>"#,
            b = Px(bottom),
            b2 = Px(bottom + 4.0),
            ty = Px(bottom + 16.0)
        );
        let _ = writeln!(
            out,
            r#"<line x1="{l2}" y1="{yp}" x2="{l}" y2="{yp}" stroke="black"/><text x="{tx}" y="{yp}" text-anchor="end" dominant-baseline="middle">{yv:.3}</text>"#,
            l = Px(left),
            l2 = Px(left - 4.0),
            tx = Px(left - 6.0)
        );
    }
    let _ = writeln!(
        out,
        r#"<text x="{x}" y="{y}" text-anchor="middle" font-size="13">{label}</text>"#,
        x = Px(WIDTH / 2.0),
        y = Px(HEIGHT - 18.0),
        label = escape(&layout.dim_x)
    );
    let _ = writeln!(
        out,
        r#"<text x="18" y="{y}" text-anchor="middle" font-size="13" transform="rotate(-90 18 {y})">{label}</text>"#,
        y = Px(HEIGHT / 2.0),
        label = escape(&layout.dim_y)
    );

    for a in &layout.arrows {
        let (id, color) = match a.style {
            ArrowStyle::Effect => ("effect", EFFECT_COLOR),
            ArrowStyle::Interaction => ("interaction", INTERACTION_COLOR),
        };
        let _ = writeln!(
            out,
            r#"<line x1="{}" y1="{}" x2="{}" y2="{}" stroke="{color}" stroke-width="2" marker-end="url(#head-{id})"/>"#,
            sx(a.from.0),
            sy(a.from.1),
            sx(a.to.0),
            sy(a.to.1)
        );
        let _ = writeln!(
            out,
            r#"<text x="{}" y="{}" fill="{color}" text-anchor="middle">{}</text>"#,
            sx((a.from.0 + a.to.0) / 2.0),
            Px(sy((a.from.1 + a.to.1) / 2.0).0 - 6.0),
            escape(&a.label)
        );
    }
    for p in &layout.points {
        let _ = writeln!(
            out,
            r#"<circle cx="{}" cy="{}" r="4" fill="black"/><text x="{}" y="{}">{}</text>"#,
            sx(p.x),
            sy(p.y),
            Px(sx(p.x).0 + 7.0),
            Px(sy(p.y).0 - 7.0),
            escape(&p.label)
        );
    }
    out.push_str("</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rounding() {
        assert_eq!(format_pp(6.35), "6.35");
        assert_eq!(format_pp(6.345), "6.35");
        assert_eq!(format_pp(-6.345), "-6.35");
        assert_eq!(format_pp(-7.664), "-7.66");
        assert_eq!(format_pp(0.0), "0.00");
        assert_eq!(format_pp(-0.0), "0.00");
        assert_eq!(format_pp(-0.004), "0.00");
        assert_eq!(format_pp(-0.005), "-0.01");
        assert_eq!(format_pp(9.995), "10.00");
        assert_eq!(format_pp(99.999), "100.00");
        assert_eq!(format_pp(2.0), "2.00");
        assert_eq!(format_pp(1e-7), "0.00");
    }

    #[test]
    fn cells() {
        assert_eq!(format_cell(6.35, Some(1e-4)), "6.35***");
        assert_eq!(format_cell(-7.66, Some(0.0009)), "-7.66***");
        assert_eq!(format_cell(-3.0, Some(0.005)), "-3.00**");
        assert_eq!(format_cell(0.0, Some(1.0)), "0.00");
        assert_eq!(format_cell(1.0, None), "1.00");
        assert_eq!(latex_cell(6.35, Some(1e-4)), r"$\hspace{0.75em}6.35^{***}$");
        assert_eq!(latex_cell(-7.12, Some(1e-4)), r"$-7.12^{***}$");
        assert_eq!(latex_cell(0.06, Some(0.5)), r"$\hspace{0.75em}0.06^{}$");
    }

    #[test]
    fn formats_parse() {
        assert_eq!("md".parse::<TableFormat>().unwrap(), TableFormat::Markdown);
        assert_eq!("LaTeX".parse::<TableFormat>().unwrap(), TableFormat::Latex);
        assert!("html".parse::<TableFormat>().is_err());
    }
}
