//! Full sweep orchestration: conditions × bands × methods × windows.
//!
//! Phases are computed once per (subject, condition, band). Per-pair block
//! sums over the greatest common block of the window grid then serve every
//! window and both methods; see [`BlockSums`].

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use log::{info, warn};
use rayon::prelude::*;
use thiserror::Error;

use crate::biometric::{self, build_score_sets, BiometricError, CellKey, ScoreSet};
use crate::connectivity::{common_block_len, BlockSums, ConnectivityError, Method};
use crate::dsp::{band_phase_with_order, Band, DspError};
use crate::edf::{
    catalog_dataset, parse_edf, Condition, DatasetCatalog, EdfError, Recording, DATASET_SAMPLE_RATE,
};

pub mod cache;
pub mod config;
pub mod results;

pub use cache::{content_hash, CacheKey, FeatureCache};
pub use config::{SweepConfig, CACHE_DIR_ENV};
pub use results::{format_sig, results_csv, write_results, ResultRow, RESULTS_HEADER};

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Edf(#[from] EdfError),
    #[error(transparent)]
    Dsp(#[from] DspError),
    #[error(transparent)]
    Connectivity(#[from] ConnectivityError),
    #[error(transparent)]
    Biometric(#[from] BiometricError),
    #[error("need at least 2 usable subjects, found {0}")]
    NotEnoughSubjects(usize),
    #[error("cell not in config: {0}")]
    CellNotInConfig(String),
    #[error("no result rows to write")]
    EmptyResults,
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl PipelineError {
    pub(crate) fn io(path: &Path, source: std::io::Error) -> Self {
        PipelineError::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    /// True for errors caused by the data rather than by the invocation.
    pub fn is_data_error(&self) -> bool {
        !matches!(
            self,
            PipelineError::Config(_) | PipelineError::CellNotInConfig(_)
        )
    }
}

/// Feature tables of one subject for one (condition, band).
enum SubjectFeatures {
    Computed(BlockSums),
    Cached(BTreeMap<(Method, u64), Vec<Vec<f64>>>),
}

impl SubjectFeatures {
    fn rows(&self, method: Method, window_s: f64) -> Result<Vec<Vec<f64>>, ConnectivityError> {
        match self {
            SubjectFeatures::Computed(sums) => sums.features(method, window_s),
            SubjectFeatures::Cached(map) => Ok(map
                .get(&(method, window_s.to_bits()))
                .cloned()
                .expect("cached table for every requested cell")),
        }
    }
}

struct Prepared {
    catalog: DatasetCatalog,
    subjects: Vec<String>,
    block_len: usize,
    cache: Option<FeatureCache>,
}

fn prepare(config: &SweepConfig) -> Result<Prepared, PipelineError> {
    let catalog = catalog_dataset(&config.dataset_root)?;
    for ex in &catalog.excluded {
        warn!("excluded {}: {}", ex.path.display(), ex.reason);
    }
    let mut subjects = catalog.subjects();
    if let Some(filter) = &config.subject_filter {
        subjects.retain(|s| filter.contains(s));
    }
    if subjects.len() < 2 {
        return Err(PipelineError::NotEnoughSubjects(subjects.len()));
    }
    let samples = config.window_grid.validate(DATASET_SAMPLE_RATE)?;
    Ok(Prepared {
        catalog,
        subjects,
        block_len: common_block_len(&samples),
        cache: config.cache_dir.as_ref().map(FeatureCache::new),
    })
}

/// Loads or computes the features of one recording for all requested cells.
fn subject_features(
    config: &SweepConfig,
    prep: &Prepared,
    subject: &str,
    condition: Condition,
    band: Band,
    methods: &[Method],
    windows: &[f64],
) -> Result<Option<SubjectFeatures>, PipelineError> {
    let Some(entry) = prep.catalog.entry(subject, condition) else {
        return Ok(None);
    };
    let bytes = std::fs::read(&entry.path).map_err(|e| PipelineError::io(&entry.path, e))?;

    let keyed: Vec<(CacheKey, [u8; 32])> = methods
        .iter()
        .flat_map(|&method| windows.iter().map(move |&window_s| (method, window_s)))
        .map(|(method, window_s)| {
            let key = CacheKey {
                subject_id: subject.to_string(),
                condition,
                band,
                method,
                window_s,
            };
            let hash = content_hash(&bytes, &key, config.filter_order, prep.block_len);
            (key, hash)
        })
        .collect();

    if let Some(cache) = &prep.cache {
        let hits: Option<BTreeMap<_, _>> = keyed
            .iter()
            .map(|(k, h)| {
                cache
                    .load(k, h)
                    .map(|rows| ((k.method, k.window_s.to_bits()), rows))
            })
            .collect();
        if let Some(map) = hits {
            return Ok(Some(SubjectFeatures::Cached(map)));
        }
    }

    let recording = Recording::from_edf(&parse_edf(&bytes)?, subject, condition)?;
    let phases = band_phase_with_order(&recording, &band.definition(), config.filter_order)?;
    let sums = BlockSums::new(&phases, prep.block_len)?;
    if let Some(cache) = &prep.cache {
        for (key, hash) in &keyed {
            let rows = sums.features(key.method, key.window_s)?;
            if let Err(e) = cache.store(key, hash, &rows) {
                warn!(
                    "cannot write cache entry {}: {e}",
                    cache.path(key).display()
                );
            }
        }
    }
    Ok(Some(SubjectFeatures::Computed(sums)))
}

fn collect_features(
    config: &SweepConfig,
    prep: &Prepared,
    condition: Condition,
    band: Band,
    methods: &[Method],
    windows: &[f64],
) -> Vec<(String, SubjectFeatures)> {
    prep.subjects
        .par_iter()
        .filter_map(|s| {
            match subject_features(config, prep, s, condition, band, methods, windows) {
                Ok(Some(f)) => Some((s.clone(), f)),
                Ok(None) => None,
                Err(e) => {
                    warn!("{s} {condition} {band}: excluded ({e})");
                    None
                }
            }
        })
        .collect()
}

fn cell_scores(
    config: &SweepConfig,
    features: &[(String, SubjectFeatures)],
    cell: CellKey,
) -> Result<(ScoreSet, (usize, usize), usize), PipelineError> {
    let tables: Vec<(String, Vec<Vec<f64>>)> = features
        .iter()
        .filter_map(|(s, f)| match f.rows(cell.method, cell.window_s) {
            Ok(rows) => Some((s.clone(), rows)),
            Err(e) => {
                warn!("{s} {cell}: excluded ({e})");
                None
            }
        })
        .collect();
    let epochs = tables.iter().map(|(_, r)| r.len());
    let range = (epochs.clone().min().unwrap_or(0), epochs.max().unwrap_or(0));
    let n_subjects = tables.len();
    if n_subjects < 2 {
        return Err(PipelineError::NotEnoughSubjects(n_subjects));
    }
    let mut scores = build_score_sets(&tables, config.sampling())?;
    scores.config_key = Some(cell);
    Ok((scores, range, n_subjects))
}

/// Runs every cell of the configuration; rows come back in canonical order
/// (condition, band, method, window ascending).
pub fn run_sweep(config: &SweepConfig) -> Result<Vec<ResultRow>, PipelineError> {
    let mut config = config.clone();
    config.normalize();
    let prep = prepare(&config)?;
    let windows = &config.window_grid.lengths_s;
    let mut rows = Vec::with_capacity(config.n_cells());
    for &condition in &config.conditions {
        for &band in &config.bands {
            info!(
                "{condition} {band}: preparing features for {} subjects",
                prep.subjects.len()
            );
            let features =
                collect_features(&config, &prep, condition, band, &config.methods, windows);
            for &method in &config.methods {
                for &window_s in windows {
                    let cell = CellKey {
                        condition,
                        band,
                        method,
                        window_s,
                    };
                    let (scores, epochs, n_subjects) = cell_scores(&config, &features, cell)?;
                    let perf = biometric::evaluate(&scores)?;
                    info!("{cell}: EER {:.4} AUC {:.4}", perf.eer, perf.auc);
                    rows.push(ResultRow {
                        cell,
                        eer: perf.eer,
                        auc: perf.auc,
                        one_minus_auc: 1.0 - perf.auc,
                        n_subjects,
                        n_epochs_per_subject: epochs,
                        n_genuine: perf.n_genuine,
                        n_impostor: perf.n_impostor,
                        impostor_sampling: scores.impostor_sampling,
                    });
                }
            }
        }
    }
    Ok(rows)
}

fn check_cell(config: &SweepConfig, cell: &CellKey) -> Result<(), PipelineError> {
    let inside = config.conditions.contains(&cell.condition)
        && config.bands.contains(&cell.band)
        && config.methods.contains(&cell.method)
        && config.window_grid.lengths_s.contains(&cell.window_s);
    if inside {
        Ok(())
    } else {
        Err(PipelineError::CellNotInConfig(cell.to_string()))
    }
}

/// Genuine and impostor scores of a single cell.
pub fn cell_score_set(config: &SweepConfig, cell: CellKey) -> Result<ScoreSet, PipelineError> {
    check_cell(config, &cell)?;
    let prep = prepare(config)?;
    let features = collect_features(
        config,
        &prep,
        cell.condition,
        cell.band,
        &[cell.method],
        &[cell.window_s],
    );
    Ok(cell_scores(config, &features, cell)?.0)
}

/// Writes the score dump of one cell to `path`.
pub fn report_distributions(
    config: &SweepConfig,
    cell: CellKey,
    path: &Path,
) -> Result<ScoreSet, PipelineError> {
    let scores = cell_score_set(config, cell)?;
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| PipelineError::io(dir, e))?;
    }
    let file = std::fs::File::create(path).map_err(|e| PipelineError::io(path, e))?;
    biometric::write_score_dump(&scores, std::io::BufWriter::new(file))?;
    Ok(scores)
}

/// Fills the feature cache for every subject and the configured cells.
/// Returns the number of (subject, condition, band) recordings served.
pub fn populate_cache(config: &SweepConfig) -> Result<usize, PipelineError> {
    if config.cache_dir.is_none() {
        return Err(PipelineError::Config(format!(
            "no cache directory (set cache_dir or {CACHE_DIR_ENV})"
        )));
    }
    let prep = prepare(config)?;
    let mut served = 0;
    for &condition in &config.conditions {
        for &band in &config.bands {
            served += collect_features(
                config,
                &prep,
                condition,
                band,
                &config.methods,
                &config.window_grid.lengths_s,
            )
            .len();
        }
    }
    Ok(served)
}
