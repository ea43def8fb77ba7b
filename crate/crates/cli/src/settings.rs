use std::fs;
use std::path::{Path, PathBuf};

use dataset_effects::effects::{EffectOptions, DEFAULT_ALPHA, DEFAULT_THRESHOLD};
use dataset_effects::records::{ingest, ingest_csv, DimensionCatalog, RecordStore};
use dataset_effects::report::TableFormat;
use dataset_effects::statkernel::TTestKind;
use serde::Deserialize;

use crate::args::GlobalArgs;
use crate::error::CliError;

/// Keys accepted in the `--settings` TOML file; command-line flags win.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileSettings {
    store: Option<PathBuf>,
    catalog: Option<PathBuf>,
    unpinned: Option<bool>,
    format: Option<String>,
    alpha: Option<f64>,
    threshold: Option<f64>,
    strict: Option<bool>,
    welch: Option<bool>,
    point_estimate: Option<bool>,
}

#[derive(Debug)]
pub struct Settings {
    pub store: Option<PathBuf>,
    pub catalog: Option<PathBuf>,
    pub unpinned: bool,
    pub format: TableFormat,
    pub alpha: f64,
    pub threshold: f64,
    pub strict: bool,
    pub effect: EffectOptions,
}

pub fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::validation(format!("{}: {e}", path.display())))
}

pub fn write(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(|e| CliError::validation(format!("{}: {e}", path.display())))
}

impl Settings {
    pub fn resolve(args: &GlobalArgs) -> Result<Self, CliError> {
        let file: FileSettings = match &args.settings {
            Some(p) => toml::from_str(&read(p)?).map_err(|e| CliError::validation(format!("{}: {e}", p.display())))?,
            None => FileSettings::default(),
        };
        let format = match args.format.clone().or(file.format) {
            Some(f) => f
                .parse()
                .map_err(|e: dataset_effects::report::ReportError| CliError::validation(e.to_string()))?,
            None => TableFormat::Markdown,
        };
        let alpha = args.alpha.or(file.alpha).unwrap_or(DEFAULT_ALPHA);
        if !(alpha > 0.0 && alpha <= 1.0) {
            return Err(CliError::validation(format!("--alpha must lie in (0, 1], got {alpha}")));
        }
        let threshold = args.threshold.or(file.threshold).unwrap_or(DEFAULT_THRESHOLD);
        if !(threshold > 0.0 && threshold <= 1.0) {
            return Err(CliError::validation(format!(
                "--threshold must lie in (0, 1], got {threshold}"
            )));
        }
        let welch = args.welch || file.welch.unwrap_or(false);
        Ok(Self {
            store: args.store.clone().or(file.store),
            catalog: args.catalog.clone().or(file.catalog),
            unpinned: args.unpinned || file.unpinned.unwrap_or(false),
            format,
            alpha,
            threshold,
            strict: args.strict || file.strict.unwrap_or(false),
            effect: EffectOptions {
                test: if welch { TTestKind::Welch } else { TTestKind::Pooled },
                allow_point_estimate: args.point_estimate || file.point_estimate.unwrap_or(false),
            },
        })
    }

    /// The pinned dimension catalog: the file if given, the nine defaults otherwise,
    /// or none with `--unpinned`.
    pub fn dimension_catalog(&self) -> Result<Option<DimensionCatalog>, CliError> {
        match (&self.catalog, self.unpinned) {
            (Some(p), _) => Ok(Some(DimensionCatalog::from_json(&read(p)?)?)),
            (None, true) => Ok(None),
            (None, false) => Ok(Some(DimensionCatalog::default())),
        }
    }

    pub fn load_file(&self, path: &Path) -> Result<RecordStore, CliError> {
        let catalog = self.dimension_catalog()?;
        let text = read(path)?;
        let store = if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv")) {
            ingest_csv(text.as_bytes(), catalog.as_ref())
        } else {
            ingest(text.as_bytes(), catalog.as_ref())
        };
        store.map_err(|e| CliError::validation(format!("{}: {e}", path.display())))
    }

    pub fn load_store(&self) -> Result<RecordStore, CliError> {
        let path = self
            .store
            .as_ref()
            .ok_or_else(|| CliError::validation("--store is required"))?;
        self.load_file(path)
    }
}
