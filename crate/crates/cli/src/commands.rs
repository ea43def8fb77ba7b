use std::fmt::Write as _;
use std::path::Path;

use dataset_effects::effects::{
    individual_effect, interaction_effect, interaction_pairs, mean_effect, persistence_summary, reference_states,
    EffectResult, InteractionResult, PersistenceSummary,
};
use dataset_effects::planner::{
    build_manifest, count_ordered_settings, count_unordered_settings, supported_analyses, ExperimentManifest, Marker,
    TaskCatalog,
};
use dataset_effects::records::{completeness_check, Condition, RecordStore};
use dataset_effects::report::{
    format_pp, interaction_arrows, plot_state_plane, render_card, render_table, Anchor, Arrow, ArrowStyle, CardOptions,
    TableFormat, TableRows, TableSpec,
};
use dataset_effects::simulator::{calibrate, generate, CalibrationFamily, CalibrationReport, SimConfig};
use dataset_effects::statevector::{estimate_state, StateVector};
use serde_json::json;

use crate::args::{Command, ReportKind};
use crate::error::CliError;
use crate::settings::{read, write, Settings};

pub fn run(settings: &Settings, command: Command) -> Result<(), CliError> {
    match command {
        Command::Plan {
            markers,
            models,
            seeds,
            out,
        } => plan(settings, &markers, &models, &seeds, out.as_deref()),
        Command::Ingest { files, manifest, out } => ingest(settings, &files, manifest.as_deref(), out.as_deref()),
        Command::State { model, datasets } => state(settings, &model, &datasets),
        Command::Effect {
            model,
            dataset,
            reference,
            all_references,
        } => effect(settings, &model, &dataset, &reference, all_references),
        Command::Interact { model, x, y, reference } => interact(settings, &model, x.zip(y), &reference),
        Command::Persist { model, dataset } => persist(settings, &model, &dataset),
        Command::Card { model, dataset, out } => card(settings, &model, &dataset, out.as_deref()),
        Command::Report { kind, model, reference } => report(settings, kind, model.as_deref(), &reference),
        Command::Simulate { config, manifest, out } => simulate(&config, &manifest, out.as_deref()),
        Command::Calibrate {
            config,
            x,
            y,
            reference,
            inject,
            trials,
            out,
        } => calibration(settings, &config, &x, &y, &reference, inject, trials, out.as_deref()),
        Command::Plot {
            model,
            dim_x,
            dim_y,
            states,
            interaction,
            reference,
            out,
        } => plot(
            settings,
            &model,
            &dim_x,
            &dim_y,
            states.as_deref(),
            interaction.as_deref(),
            &reference,
            out.as_deref(),
        ),
    }
}

fn split_list(s: &str) -> Vec<String> {
    s.split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(String::from)
        .collect()
}

/// Dataset list to condition; empty or `I` is the initial state.
fn condition(model: &str, datasets: &str) -> Result<Condition, CliError> {
    let names = split_list(datasets);
    if names.is_empty() || (names.len() == 1 && names[0] == "I") {
        return Ok(Condition::initial(model));
    }
    Ok(Condition::new(model, names)?)
}

fn emit(text: &str, out: Option<&Path>) -> Result<(), CliError> {
    match out {
        Some(p) => write(p, text),
        None => {
            print!("{text}");
            if !text.ends_with('\n') {
                println!();
            }
            Ok(())
        }
    }
}

fn json_text(value: &impl serde::Serialize) -> String {
    serde_json::to_string_pretty(value).expect("serializable output")
}

fn check_strict(settings: &Settings, degenerate: usize, what: &str) -> Result<(), CliError> {
    if settings.strict && degenerate > 0 {
        return Err(CliError::Degenerate(format!("{degenerate} zero-variance {what}")));
    }
    Ok(())
}

fn degenerate_effects(rows: &[EffectResult<f64>]) -> usize {
    rows.iter().flat_map(|r| &r.dims).filter(|d| d.degenerate).count()
}

fn degenerate_interactions(rows: &[InteractionResult<f64>]) -> usize {
    rows.iter().flat_map(|r| &r.dims).filter(|d| d.degenerate).count()
}

fn table(rows: TableRows, format: TableFormat) -> Result<String, CliError> {
    Ok(render_table(&TableSpec { rows, format })?)
}

fn plan(settings: &Settings, markers: &str, models: &str, seeds: &str, out: Option<&Path>) -> Result<(), CliError> {
    let catalog = match &settings.catalog {
        Some(p) => TaskCatalog::from_json(&read(p)?)?,
        None => TaskCatalog::default(),
    };
    let markers = Marker::parse_list(markers)?;
    let models = split_list(models);
    let seeds = split_list(seeds)
        .iter()
        .map(|s| {
            s.parse::<i64>()
                .map_err(|_| CliError::validation(format!("bad seed {s:?}")))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let manifest = build_manifest(&catalog, &markers, &models, &seeds)?;
    let n_tasks = catalog.tasks().len() as u32;
    let ordered = count_ordered_settings(n_tasks);
    let unordered = count_unordered_settings(n_tasks);

    if settings.format == TableFormat::Json {
        let counts: Vec<_> = manifest
            .counts
            .iter()
            .map(|(m, n)| json!({"marker": m, "states": n, "experiments": n * models.len() * seeds.len()}))
            .collect();
        let analyses = supported_analyses(&manifest);
        println!(
            "{}",
            json_text(&json!({
                "markers": counts,
                "total": manifest.total(),
                "ordered_settings": ordered.map(|v| v.to_string()),
                "unordered_settings": unordered.map(|v| v.to_string()),
                "supported": analyses,
            }))
        );
    } else {
        let per = models.len() * seeds.len();
        let mut s = String::new();
        let _ = writeln!(s, "| Marker | N. Groups | N. Tasks | N. Experiments |");
        let _ = writeln!(s, "|---|---|---|---|");
        for (m, n) in &manifest.counts {
            let (groups, per_group) = m.shape();
            let _ = writeln!(s, "| {m} | {groups} | {} | {} |", groups * per_group, n * per);
        }
        let _ = writeln!(s, "| Total | | | {} |", manifest.total());
        let _ = writeln!(s);
        let show = |v: Option<u128>| v.map_or_else(|| "overflow".to_string(), |v| v.to_string());
        let _ = writeln!(
            s,
            "{n_tasks} tasks: {} ordered settings, {} unordered settings",
            show(ordered),
            show(unordered)
        );
        let analyses = supported_analyses(&manifest);
        let _ = writeln!(
            s,
            "Supported: {} individual transitions, {} interactions",
            analyses.individual.len(),
            analyses.interactions.len()
        );
        for u in &analyses.unavailable {
            let _ = writeln!(s, "Unavailable: {u}");
        }
        print!("{s}");
    }
    if let Some(p) = out {
        write(p, &manifest.to_json())?;
    }
    Ok(())
}

fn ingest(
    settings: &Settings,
    files: &[std::path::PathBuf],
    manifest: Option<&Path>,
    out: Option<&Path>,
) -> Result<(), CliError> {
    if files.is_empty() {
        return Err(CliError::validation("no record files given"));
    }
    let mut store = RecordStore::default();
    for (i, f) in files.iter().enumerate() {
        let next = settings.load_file(f)?;
        store = if i == 0 { next } else { store.merge(next)? };
    }
    println!(
        "{} records, {} conditions, {} models, digest {}",
        store.len(),
        store.conditions().count(),
        store.models().len(),
        store.content_digest()
    );
    if let Some(p) = out {
        let mut text = String::new();
        for r in store.records() {
            text.push_str(&r.to_json_line());
            text.push('\n');
        }
        write(p, &text)?;
    }
    if let Some(m) = manifest {
        let manifest = ExperimentManifest::from_json(&read(m)?)?;
        let report = completeness_check(&store, &manifest.conditions(), &manifest.seeds);
        if report.complete {
            println!("complete against {} scheduled conditions", manifest.conditions().len());
        } else {
            for miss in report.missing.iter().take(20) {
                println!("missing: {} seed {} {}", miss.condition, miss.seed, miss.dimension);
            }
            if report.missing.len() > 20 {
                println!("... and {} more", report.missing.len() - 20);
            }
            return Err(CliError::MissingData(format!(
                "{} (condition, seed, dimension) triples absent",
                report.missing.len()
            )));
        }
    }
    Ok(())
}

fn state(settings: &Settings, model: &str, datasets: &str) -> Result<(), CliError> {
    let store = settings.load_store()?;
    let cond = condition(model, datasets)?;
    let s: StateVector<f64> = estimate_state(&store, &cond)?;
    if settings.format == TableFormat::Json {
        let dims: Vec<_> = s
            .dims()
            .iter()
            .enumerate()
            .map(|(i, d)| {
                json!({
                    "dimension": d,
                    "mean": s.mean()[i],
                    "samples": s.samples(i).iter().map(|(seed, v)| json!({"seed": seed, "accuracy": v})).collect::<Vec<_>>(),
                })
            })
            .collect();
        println!(
            "{}",
            json_text(&json!({"condition": cond, "n_seeds": s.n_seeds(), "dims": dims}))
        );
        return Ok(());
    }
    let mut out = format!("State {}\n\n| Dimension | Mean (%) | Seeds |\n|---|---|---|\n", cond);
    for (i, d) in s.dims().iter().enumerate() {
        let _ = writeln!(out, "| {d} | {:.2} | {} |", s.mean()[i] * 100.0, s.samples(i).len());
    }
    print!("{out}");
    Ok(())
}

fn effect(settings: &Settings, model: &str, dataset: &str, reference: &str, all: bool) -> Result<(), CliError> {
    let store = settings.load_store()?;
    let refs = if all {
        let refs = reference_states(&store, dataset, model);
        if refs.is_empty() {
            return Err(CliError::MissingData(format!(
                "no reference states for {dataset} on {model}"
            )));
        }
        refs
    } else {
        vec![condition(model, reference)?]
    };
    let rows = refs
        .iter()
        .map(|r| individual_effect::<f64>(&store, dataset, r, &settings.effect))
        .collect::<Result<Vec<_>, _>>()?;
    let degenerate = degenerate_effects(&rows);
    let mean = if all && settings.format != TableFormat::Json {
        mean_effect(&rows)?.map(|m| {
            let cells: Vec<String> = m
                .dims()
                .iter()
                .zip(m.values())
                .map(|(d, v)| format!("{d} {}", format_pp(v * 100.0)))
                .collect();
            format!(
                "Mean over {} reference states (pp, untested): {}\n",
                rows.len(),
                cells.join(", ")
            )
        })
    } else {
        None
    };
    print!("{}", table(TableRows::Individual(rows), settings.format)?);
    if let Some(line) = mean {
        print!("\n{line}");
    }
    check_strict(settings, degenerate, "effect test(s)")
}

fn interact(settings: &Settings, model: &str, pair: Option<(String, String)>, reference: &str) -> Result<(), CliError> {
    let store = settings.load_store()?;
    let r = condition(model, reference)?;
    let pairs = match pair {
        Some(p) => vec![p],
        None => interaction_pairs(&store, &r),
    };
    if pairs.is_empty() {
        return Err(CliError::MissingData(format!(
            "no complete interaction pairs for {model} relative to {r}"
        )));
    }
    let rows = pairs
        .iter()
        .map(|(x, y)| interaction_effect::<f64>(&store, x, y, &r, &settings.effect))
        .collect::<Result<Vec<_>, _>>()?;
    let degenerate = degenerate_interactions(&rows);
    print!("{}", table(TableRows::Interaction(rows), settings.format)?);
    check_strict(settings, degenerate, "interaction test(s)")
}

fn summary(
    settings: &Settings,
    store: &RecordStore,
    model: &str,
    dataset: &str,
) -> Result<PersistenceSummary, CliError> {
    let refs = reference_states(store, dataset, model);
    if refs.is_empty() {
        return Err(CliError::MissingData(format!(
            "no reference states for {dataset} on {model}"
        )));
    }
    Ok(persistence_summary::<f64>(
        store,
        dataset,
        &refs,
        settings.threshold,
        settings.alpha,
        &settings.effect,
    )?)
}

fn persist(settings: &Settings, model: &str, dataset: &str) -> Result<(), CliError> {
    let store = settings.load_store()?;
    let s = summary(settings, &store, model, dataset)?;
    print!("{}", table(TableRows::Persistence(vec![s]), settings.format)?);
    Ok(())
}

fn card(settings: &Settings, model: &str, dataset: &str, out: Option<&Path>) -> Result<(), CliError> {
    let store = settings.load_store()?;
    let opts = CardOptions {
        threshold: settings.threshold,
        alpha: settings.alpha,
        effect: settings.effect,
    };
    emit(&render_card(&store, dataset, model, &opts)?, out)
}

fn datasets_of(store: &RecordStore, model: &str) -> Vec<String> {
    let mut names: Vec<String> = store
        .conditions()
        .filter(|c| c.model() == model)
        .flat_map(|c| c.datasets().iter().cloned())
        .collect();
    names.sort();
    names.dedup();
    names
}

fn report(settings: &Settings, kind: ReportKind, model: Option<&str>, reference: &str) -> Result<(), CliError> {
    let store = settings.load_store()?;
    let models: Vec<String> = match model {
        Some(m) => vec![m.to_string()],
        None => store.models().into_iter().map(String::from).collect(),
    };
    let (rows, degenerate) = match kind {
        ReportKind::Individual => {
            let mut rows = Vec::new();
            for m in &models {
                let r = condition(m, reference)?;
                for d in datasets_of(&store, m) {
                    let with = match r.with(&[&d]) {
                        Ok(w) => w,
                        Err(_) => continue,
                    };
                    if store.contains_condition(&r) && store.contains_condition(&with) {
                        rows.push(individual_effect::<f64>(&store, &d, &r, &settings.effect)?);
                    }
                }
            }
            let n = degenerate_effects(&rows);
            (TableRows::Individual(rows), n)
        }
        ReportKind::Interaction => {
            let mut rows = Vec::new();
            for m in &models {
                let r = condition(m, reference)?;
                for (x, y) in interaction_pairs(&store, &r) {
                    rows.push(interaction_effect::<f64>(&store, &x, &y, &r, &settings.effect)?);
                }
            }
            let n = degenerate_interactions(&rows);
            (TableRows::Interaction(rows), n)
        }
        ReportKind::Persistence => {
            let mut rows = Vec::new();
            for m in &models {
                for d in datasets_of(&store, m) {
                    if !reference_states(&store, &d, m).is_empty() {
                        rows.push(summary(settings, &store, m, &d)?);
                    }
                }
            }
            (TableRows::Persistence(rows), 0)
        }
    };
    print!("{}", table(rows, settings.format)?);
    check_strict(settings, degenerate, "test(s)")
}

fn simulate(config: &Path, manifest: &Path, out: Option<&Path>) -> Result<(), CliError> {
    let config = SimConfig::from_toml(&read(config)?)?;
    let manifest = ExperimentManifest::from_json(&read(manifest)?)?;
    let records = generate(&config, &manifest)?;
    let mut text = String::with_capacity(records.len() * 96);
    for r in &records {
        text.push_str(&r.to_json_line());
        text.push('\n');
    }
    match out {
        Some(p) => {
            write(p, &text)?;
            eprintln!("wrote {} records to {}", records.len(), p.display());
            Ok(())
        }
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn rate(v: Option<f64>) -> String {
    v.map_or_else(|| "n/a".to_string(), |v| format!("{v:.4}"))
}

fn calibration_table(report: &CalibrationReport) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "| Dimension | FPR | Power | Injected (pp) | Mean estimate (pp) | SE (pp) |"
    );
    let _ = writeln!(s, "|---|---|---|---|---|---|");
    for d in &report.per_dimension {
        let _ = writeln!(
            s,
            "| {} | {} | {} | {:.2} | {:.3} | {:.3} |",
            d.dimension,
            rate(d.false_positive_rate),
            rate(d.power),
            d.injected * 100.0,
            d.mean_estimate * 100.0,
            d.estimate_se * 100.0
        );
    }
    let _ = writeln!(s);
    let _ = writeln!(
        s,
        "{} trials, alpha {}: false-positive rate {}, power {}{}",
        report.trials,
        report.alpha,
        rate(report.false_positive_rate),
        rate(report.power),
        if report.degenerate {
            " (noise-free configuration)"
        } else {
            ""
        }
    );
    s
}

#[allow(clippy::too_many_arguments)]
fn calibration(
    settings: &Settings,
    config: &Path,
    x: &str,
    y: &str,
    reference: &str,
    inject: f64,
    trials: usize,
    out: Option<&Path>,
) -> Result<(), CliError> {
    let config = SimConfig::from_toml(&read(config)?)?;
    let injected = vec![inject; config.dims.len()];
    let family = CalibrationFamily {
        config,
        x: x.to_string(),
        y: y.to_string(),
        reference: split_list(reference).into_iter().filter(|d| d != "I").collect(),
        injected,
    };
    let report = calibrate(&family, trials, settings.alpha)?;
    if settings.format == TableFormat::Json {
        println!("{}", json_text(&report));
    } else {
        print!("{}", calibration_table(&report));
    }
    if let Some(p) = out {
        write(p, &json_text(&report))?;
    }
    if settings.strict && report.degenerate {
        return Err(CliError::Degenerate(
            "noise-free configuration has no false-positive rate".into(),
        ));
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn plot(
    settings: &Settings,
    model: &str,
    dim_x: &str,
    dim_y: &str,
    states: Option<&str>,
    interaction: Option<&str>,
    reference: &str,
    out: Option<&Path>,
) -> Result<(), CliError> {
    let store = settings.load_store()?;
    let conds = match (states, interaction) {
        (_, Some(pair)) => {
            let names = split_list(pair);
            let [x, y] = names.as_slice() else {
                return Err(CliError::validation(format!(
                    "--interaction takes \"X,Y\", got {pair:?}"
                )));
            };
            let r = condition(model, reference)?;
            vec![r.clone(), r.with(&[x])?, r.with(&[y])?, r.with(&[x, y])?]
        }
        (Some(list), None) => list
            .split(';')
            .map(|set| condition(model, set))
            .collect::<Result<Vec<_>, _>>()?,
        (None, None) => return Err(CliError::validation("plot needs --states or --interaction")),
    };
    let vectors = conds
        .iter()
        .map(|c| estimate_state::<f64>(&store, c))
        .collect::<Result<Vec<_>, _>>()?;
    let arrows: Vec<Arrow> = if interaction.is_some() {
        interaction_arrows(&vectors, [0, 1, 2, 3], dim_x, dim_y)?
    } else {
        (1..vectors.len())
            .map(|i| Arrow {
                from: Anchor::State(0),
                to: Anchor::State(i),
                label: String::new(),
                style: ArrowStyle::Effect,
            })
            .collect()
    };
    let svg = plot_state_plane(&vectors, dim_x, dim_y, &arrows)?;
    emit(&svg, out)
}
