//! Sweep configuration and its flat `key = value` file format.
//!
//! ```text
//! # every key is optional
//! dataset_root = /data/eegmmidb
//! conditions   = EO, EC
//! bands        = high_beta, gamma
//! methods      = PLI, PLV
//! windows      = 0.5:12:0.5        # or a list: 1, 2.5, 10.5
//! impostor_cap = 1000000           # or: exhaustive
//! subjects     = S001, S002        # default: all catalogued subjects
//! output_dir   = results
//! seed         = 1
//! filter_order = 4
//! cache_dir    = /tmp/eegprint-cache
//! ```

use std::path::{Path, PathBuf};

use crate::biometric::ImpostorSampling;
use crate::connectivity::{Method, WindowGrid};
use crate::dsp::{Band, DEFAULT_ORDER};
use crate::edf::Condition;

use super::PipelineError;

pub const DEFAULT_IMPOSTOR_CAP: usize = 1_000_000;
pub const DEFAULT_SEED: u64 = 1;
/// Overrides the feature cache directory when set.
pub const CACHE_DIR_ENV: &str = "EEGPRINT_CACHE_DIR";

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub dataset_root: PathBuf,
    pub conditions: Vec<Condition>,
    pub bands: Vec<Band>,
    pub methods: Vec<Method>,
    pub window_grid: WindowGrid,
    /// `None` scores every impostor pair.
    pub impostor_cap: Option<usize>,
    pub subject_filter: Option<Vec<String>>,
    pub output_dir: PathBuf,
    pub seed: u64,
    pub filter_order: usize,
    pub cache_dir: Option<PathBuf>,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            dataset_root: PathBuf::from("."),
            conditions: Condition::ALL.to_vec(),
            bands: Band::ALL.to_vec(),
            methods: Method::ALL.to_vec(),
            window_grid: WindowGrid::default(),
            impostor_cap: Some(DEFAULT_IMPOSTOR_CAP),
            subject_filter: None,
            output_dir: PathBuf::from("results"),
            seed: DEFAULT_SEED,
            filter_order: DEFAULT_ORDER,
            cache_dir: None,
        }
    }
}

impl SweepConfig {
    pub fn sampling(&self) -> ImpostorSampling {
        match self.impostor_cap {
            None => ImpostorSampling::Exhaustive,
            Some(cap) => ImpostorSampling::Subsampled {
                seed: self.seed,
                cap,
            },
        }
    }

    /// Number of result rows the configuration produces.
    pub fn n_cells(&self) -> usize {
        self.conditions.len()
            * self.bands.len()
            * self.methods.len()
            * self.window_grid.lengths_s.len()
    }

    /// Sorts and deduplicates the axes into canonical order.
    pub fn normalize(&mut self) {
        self.conditions.sort();
        self.conditions.dedup();
        self.bands.sort();
        self.bands.dedup();
        self.methods.sort();
        self.methods.dedup();
    }

    /// Applies the cache-directory environment override, if set.
    pub fn with_env_cache(mut self) -> Self {
        if let Some(dir) = std::env::var_os(CACHE_DIR_ENV) {
            if !dir.is_empty() {
                self.cache_dir = Some(PathBuf::from(dir));
            }
        }
        self
    }

    pub fn from_file(path: &Path) -> Result<Self, PipelineError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| PipelineError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, PipelineError> {
        let mut cfg = SweepConfig::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |msg: String| PipelineError::Config(format!("line {}: {msg}", lineno + 1));
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| err(format!("expected key = value, got {line:?}")))?;
            let key = key.trim();
            let value = value.trim();
            match key {
                "dataset_root" => cfg.dataset_root = PathBuf::from(value),
                "conditions" => cfg.conditions = parse_list(value).map_err(err)?,
                "bands" => cfg.bands = parse_list(value).map_err(err)?,
                "methods" => cfg.methods = parse_list(value).map_err(err)?,
                "windows" | "window_grid" => cfg.window_grid = parse_windows(value).map_err(err)?,
                "impostor_cap" => {
                    cfg.impostor_cap = if value.eq_ignore_ascii_case("exhaustive") {
                        None
                    } else {
                        let cap: usize = value
                            .parse()
                            .map_err(|_| err(format!("bad impostor_cap {value:?}")))?;
                        if cap == 0 {
                            return Err(err("impostor_cap must be positive".into()));
                        }
                        Some(cap)
                    }
                }
                "subjects" | "subject_filter" => {
                    let list: Vec<String> = value
                        .split(',')
                        .map(|s| s.trim().to_ascii_uppercase())
                        .filter(|s| !s.is_empty())
                        .collect();
                    cfg.subject_filter = (!list.is_empty()).then_some(list);
                }
                "output_dir" => cfg.output_dir = PathBuf::from(value),
                "seed" => {
                    cfg.seed = value
                        .parse()
                        .map_err(|_| err(format!("bad seed {value:?}")))?
                }
                "filter_order" => {
                    cfg.filter_order = value
                        .parse()
                        .ok()
                        .filter(|&o| o > 0)
                        .ok_or_else(|| err(format!("bad filter_order {value:?}")))?
                }
                "cache_dir" => {
                    cfg.cache_dir = (!value.is_empty()).then(|| PathBuf::from(value));
                }
                other => return Err(err(format!("unknown key {other:?}"))),
            }
        }
        if cfg.n_cells() == 0 {
            return Err(PipelineError::Config(
                "configuration selects no cells".into(),
            ));
        }
        cfg.normalize();
        Ok(cfg)
    }
}

fn parse_list<T: std::str::FromStr<Err = String>>(value: &str) -> Result<Vec<T>, String> {
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(str::parse)
        .collect()
}

/// `start:stop:step` (inclusive) or a comma-separated list of seconds.
pub fn parse_windows(value: &str) -> Result<WindowGrid, String> {
    let lengths = if value.contains(':') {
        let parts: Vec<f64> = value
            .split(':')
            .map(|p| {
                p.trim()
                    .parse::<f64>()
                    .map_err(|_| format!("bad window range {value:?}"))
            })
            .collect::<Result<_, _>>()?;
        let [start, stop, step] = parts[..] else {
            return Err(format!("window range {value:?} must be start:stop:step"));
        };
        if !(step > 0.0 && start > 0.0 && stop >= start) {
            return Err(format!("bad window range {value:?}"));
        }
        let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
        (0..count).map(|k| start + k as f64 * step).collect()
    } else {
        value
            .split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(|s| s.parse::<f64>().map_err(|_| format!("bad window {s:?}")))
            .collect::<Result<Vec<_>, _>>()?
    };
    WindowGrid::new(lengths).map_err(|e| e.to_string())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_cover_full_sweep() {
        let cfg = SweepConfig::parse("").unwrap();
        assert_eq!(cfg.n_cells(), 192);
        assert_eq!(cfg.impostor_cap, Some(1_000_000));
        assert_eq!(cfg.window_grid, WindowGrid::default());
    }

    #[test]
    fn parses_all_keys() {
        let cfg = SweepConfig::parse(
            "dataset_root = /d\nconditions = EC, EO\nbands = gamma\nmethods = plv\n\
             windows = 1:3:0.5 # comment\nimpostor_cap = exhaustive\nsubjects = s001,S002\n\
             output_dir = out\nseed = 9\nfilter_order = 3\ncache_dir = /c\n",
        )
        .unwrap();
        assert_eq!(cfg.dataset_root, PathBuf::from("/d"));
        assert_eq!(
            cfg.conditions,
            vec![Condition::EyesOpen, Condition::EyesClosed]
        );
        assert_eq!(cfg.bands, vec![Band::Gamma]);
        assert_eq!(cfg.methods, vec![Method::Plv]);
        assert_eq!(cfg.window_grid.lengths_s, vec![1.0, 1.5, 2.0, 2.5, 3.0]);
        assert_eq!(cfg.impostor_cap, None);
        assert_eq!(cfg.subject_filter, Some(vec!["S001".into(), "S002".into()]));
        assert_eq!(cfg.seed, 9);
        assert_eq!(cfg.filter_order, 3);
        assert_eq!(cfg.cache_dir, Some(PathBuf::from("/c")));
    }

    #[test]
    fn rejects_bad_input() {
        assert!(SweepConfig::parse("colour = red").is_err());
        assert!(SweepConfig::parse("methods =").is_err());
        assert!(SweepConfig::parse("windows = 2, 1").is_err());
        assert!(SweepConfig::parse("impostor_cap = 0").is_err());
        assert!(SweepConfig::parse("just text").is_err());
    }

    #[test]
    fn default_range_matches_grid() {
        assert_eq!(parse_windows("0.5:12:0.5").unwrap(), WindowGrid::default());
    }
}
