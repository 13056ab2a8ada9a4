//! Verification scoring: genuine/impostor similarity sets, ROC, EER and AUC.
//!
//! Scores are similarities `1 / (1 + d)` with `d` the Euclidean distance
//! between feature vectors; a comparison is accepted when its score is at
//! or above the threshold.

use std::fmt;
use std::io::{BufRead, Write};

use rayon::prelude::*;
use thiserror::Error;

use crate::connectivity::Method;
use crate::dsp::Band;
use crate::edf::Condition;
use crate::synth::SplitMix64;

#[derive(Debug, Error)]
pub enum BiometricError {
    #[error("feature vectors differ in length ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("need at least 2 subjects, got {0}")]
    TooFewSubjects(usize),
    #[error("no genuine pairs: every subject has fewer than 2 epochs")]
    NoGenuinePairs,
    #[error("empty {0} score list")]
    EmptyScores(&'static str),
    #[error("non-finite score {0}")]
    NonFinite(f64),
    #[error("score dump line {line}: {reason}")]
    Dump { line: usize, reason: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Identifies one evaluation cell of the sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellKey {
    pub condition: Condition,
    pub band: Band,
    pub method: Method,
    pub window_s: f64,
}

impl fmt::Display for CellKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}/{}/{}/{}",
            self.condition, self.band, self.method, self.window_s
        )
    }
}

impl std::str::FromStr for CellKey {
    type Err = String;

    /// `EO/gamma/PLV/0.5` (`,` and `:` also accepted as separators).
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<&str> = s.split(['/', ',', ':']).collect();
        if parts.len() != 4 {
            return Err(format!(
                "cell {s:?} must look like CONDITION/BAND/METHOD/WINDOW_S, e.g. EO/gamma/PLV/0.5"
            ));
        }
        Ok(CellKey {
            condition: parts[0].parse()?,
            band: parts[1].parse()?,
            method: parts[2].parse()?,
            window_s: parts[3]
                .trim()
                .parse()
                .map_err(|_| format!("bad window {:?}", parts[3]))?,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ImpostorSampling {
    Exhaustive,
    /// At most `cap` cross-subject pairs drawn uniformly with replacement.
    Subsampled {
        seed: u64,
        cap: usize,
    },
}

impl fmt::Display for ImpostorSampling {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ImpostorSampling::Exhaustive => f.write_str("exhaustive"),
            ImpostorSampling::Subsampled { seed, cap } => {
                write!(f, "subsampled:seed={seed}:cap={cap}")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScoreSet {
    pub genuine: Vec<f64>,
    pub impostor: Vec<f64>,
    pub config_key: Option<CellKey>,
    pub impostor_sampling: ImpostorSampling,
}

impl ScoreSet {
    pub fn new(genuine: Vec<f64>, impostor: Vec<f64>) -> Self {
        ScoreSet {
            genuine,
            impostor,
            config_key: None,
            impostor_sampling: ImpostorSampling::Exhaustive,
        }
    }

    fn check(&self) -> Result<(), BiometricError> {
        if self.genuine.is_empty() {
            return Err(BiometricError::EmptyScores("genuine"));
        }
        if self.impostor.is_empty() {
            return Err(BiometricError::EmptyScores("impostor"));
        }
        if let Some(&bad) = self
            .genuine
            .iter()
            .chain(&self.impostor)
            .find(|v| !v.is_finite())
        {
            return Err(BiometricError::NonFinite(bad));
        }
        Ok(())
    }
}

/// `1 / (1 + ‖a − b‖₂)`.
pub fn similarity(a: &[f64], b: &[f64]) -> Result<f64, BiometricError> {
    if a.len() != b.len() {
        return Err(BiometricError::LengthMismatch(a.len(), b.len()));
    }
    Ok(similarity_unchecked(a, b))
}

#[inline]
fn similarity_unchecked(a: &[f64], b: &[f64]) -> f64 {
    let d2: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
    1.0 / (1.0 + d2.sqrt())
}

/// Genuine scores over all within-subject epoch pairs; impostor scores over
/// cross-subject pairs, exhaustive or subsampled. Scores are ordered by pair
/// index (or by draw order when subsampled).
pub fn build_score_sets(
    features: &[(String, Vec<Vec<f64>>)],
    sampling: ImpostorSampling,
) -> Result<ScoreSet, BiometricError> {
    if features.len() < 2 {
        return Err(BiometricError::TooFewSubjects(features.len()));
    }
    let flat: Vec<(usize, &[f64])> = features
        .iter()
        .enumerate()
        .flat_map(|(s, (_, rows))| rows.iter().map(move |r| (s, r.as_slice())))
        .collect();
    let dim = flat.first().map_or(0, |(_, r)| r.len());
    if let Some((_, r)) = flat.iter().find(|(_, r)| r.len() != dim) {
        return Err(BiometricError::LengthMismatch(dim, r.len()));
    }

    let mut genuine_pairs = Vec::new();
    let mut start = 0;
    for (_, rows) in features {
        for a in 0..rows.len() {
            for b in a + 1..rows.len() {
                genuine_pairs.push((start + a, start + b));
            }
        }
        start += rows.len();
    }
    if genuine_pairs.is_empty() {
        return Err(BiometricError::NoGenuinePairs);
    }

    let n = flat.len() as u64;
    let same_subject_pairs: u64 = features
        .iter()
        .map(|(_, r)| (r.len() as u64) * (r.len() as u64).saturating_sub(1) / 2)
        .sum();
    let cross_pairs = n * n.saturating_sub(1) / 2 - same_subject_pairs;
    let (impostor_pairs, used) = match sampling {
        ImpostorSampling::Subsampled { seed, cap } if cross_pairs > cap as u64 => {
            let mut rng = SplitMix64::new(seed);
            let mut pairs = Vec::with_capacity(cap);
            while pairs.len() < cap {
                let x = rng.below(n) as usize;
                let y = rng.below(n) as usize;
                if flat[x].0 != flat[y].0 {
                    pairs.push((x.min(y), x.max(y)));
                }
            }
            (pairs, sampling)
        }
        _ => {
            let mut pairs = Vec::with_capacity(cross_pairs as usize);
            for x in 0..flat.len() {
                for y in x + 1..flat.len() {
                    if flat[x].0 != flat[y].0 {
                        pairs.push((x, y));
                    }
                }
            }
            (pairs, ImpostorSampling::Exhaustive)
        }
    };

    let score = |pairs: &[(usize, usize)]| -> Vec<f64> {
        pairs
            .par_iter()
            .map(|&(x, y)| similarity_unchecked(flat[x].1, flat[y].1))
            .collect()
    };
    Ok(ScoreSet {
        genuine: score(&genuine_pairs),
        impostor: score(&impostor_pairs),
        config_key: None,
        impostor_sampling: used,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RocPoint {
    pub threshold: f64,
    pub far: f64,
    pub frr: f64,
}

/// Operating points ordered by ascending threshold, bracketed by sentinels
/// at −∞ (accept all) and +∞ (reject all).
#[derive(Debug, Clone, PartialEq)]
pub struct RocCurve {
    pub points: Vec<RocPoint>,
}

fn sorted(v: &[f64]) -> Vec<f64> {
    let mut s = v.to_vec();
    s.sort_by(f64::total_cmp);
    s
}

pub fn roc(scores: &ScoreSet) -> Result<RocCurve, BiometricError> {
    scores.check()?;
    let gen = sorted(&scores.genuine);
    let imp = sorted(&scores.impostor);
    let (g, i) = (gen.len() as f64, imp.len() as f64);

    let mut thresholds: Vec<f64> = gen.iter().chain(&imp).copied().collect();
    thresholds.sort_by(f64::total_cmp);
    thresholds.dedup();

    let mut points = Vec::with_capacity(thresholds.len() + 2);
    points.push(RocPoint {
        threshold: f64::NEG_INFINITY,
        far: 1.0,
        frr: 0.0,
    });
    for t in thresholds {
        let imp_below = imp.partition_point(|&s| s < t);
        let gen_below = gen.partition_point(|&s| s < t);
        points.push(RocPoint {
            threshold: t,
            far: (imp.len() - imp_below) as f64 / i,
            frr: gen_below as f64 / g,
        });
    }
    points.push(RocPoint {
        threshold: f64::INFINITY,
        far: 0.0,
        frr: 1.0,
    });
    Ok(RocCurve { points })
}

/// Rate at which FAR and FRR cross, interpolating linearly between the two
/// operating points that bracket the sign change of FAR − FRR.
pub fn eer(curve: &RocCurve) -> f64 {
    let pts = &curve.points;
    let Some(k) = pts.iter().position(|p| p.far - p.frr <= 0.0) else {
        return pts.last().map_or(0.0, |p| p.far.max(p.frr)).clamp(0.0, 1.0);
    };
    let cur = pts[k];
    let d_cur = cur.far - cur.frr;
    if d_cur == 0.0 || k == 0 {
        return cur.far.clamp(0.0, 1.0);
    }
    let prev = pts[k - 1];
    let d_prev = prev.far - prev.frr;
    let t = d_prev / (d_prev - d_cur);
    (prev.far + t * (cur.far - prev.far)).clamp(0.0, 1.0)
}

/// Mann–Whitney estimate `P(genuine > impostor) + ½ P(genuine = impostor)`.
pub fn auc(scores: &ScoreSet) -> Result<f64, BiometricError> {
    scores.check()?;
    let imp = sorted(&scores.impostor);
    // twice the tie-weighted count keeps the sum integral
    let twice: u128 = scores
        .genuine
        .iter()
        .map(|&g| {
            let below = imp.partition_point(|&s| s < g);
            let not_above = imp.partition_point(|&s| s <= g);
            (2 * below + (not_above - below)) as u128
        })
        .sum();
    let denom = 2 * scores.genuine.len() as u128 * imp.len() as u128;
    Ok(twice as f64 / denom as f64)
}

/// Trapezoidal area under true-accept rate (1 − FRR) against FAR.
pub fn roc_area(curve: &RocCurve) -> f64 {
    curve
        .points
        .windows(2)
        .map(|w| (w[0].far - w[1].far) * ((1.0 - w[0].frr) + (1.0 - w[1].frr)) / 2.0)
        .sum()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PerformancePoint {
    pub eer: f64,
    pub auc: f64,
    pub n_genuine: usize,
    pub n_impostor: usize,
}

pub fn evaluate(scores: &ScoreSet) -> Result<PerformancePoint, BiometricError> {
    let curve = roc(scores)?;
    Ok(PerformancePoint {
        eer: eer(&curve),
        auc: auc(scores)?,
        n_genuine: scores.genuine.len(),
        n_impostor: scores.impostor.len(),
    })
}

/// Two-column `label,score` text, genuine rows first.
pub fn write_score_dump<W: Write>(scores: &ScoreSet, mut out: W) -> Result<(), BiometricError> {
    writeln!(out, "label,score")?;
    for s in &scores.genuine {
        writeln!(out, "genuine,{s}")?;
    }
    for s in &scores.impostor {
        writeln!(out, "impostor,{s}")?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_score_dump<R: BufRead>(input: R) -> Result<ScoreSet, BiometricError> {
    let mut set = ScoreSet::new(Vec::new(), Vec::new());
    for (n, line) in input.lines().enumerate() {
        let line = line?;
        if n == 0 && line.trim() == "label,score" {
            continue;
        }
        if line.trim().is_empty() {
            continue;
        }
        let bad = |reason: &str| BiometricError::Dump {
            line: n + 1,
            reason: reason.to_string(),
        };
        let (label, value) = line.split_once(',').ok_or_else(|| bad("missing comma"))?;
        let value: f64 = value.trim().parse().map_err(|_| bad("bad score"))?;
        match label.trim() {
            "genuine" => set.genuine.push(value),
            "impostor" => set.impostor.push(value),
            _ => return Err(bad("label must be genuine or impostor")),
        }
    }
    Ok(set)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(g: &[f64], i: &[f64]) -> ScoreSet {
        ScoreSet::new(g.to_vec(), i.to_vec())
    }

    #[test]
    fn similarity_values() {
        assert_eq!(similarity(&[0.3, 0.4], &[0.3, 0.4]).unwrap(), 1.0);
        assert_eq!(similarity(&[1.0], &[0.0]).unwrap(), 0.5);
        let s = similarity(&[1.0, 0.0], &[0.0, 1.0]).unwrap();
        assert!((s - 0.414_213_562_373_095).abs() < 1e-12);
        assert!(similarity(&[1.0], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn pair_counts() {
        let two = |s: &str, n: usize| (s.to_string(), vec![vec![0.5; 3]; n]);
        let s =
            build_score_sets(&[two("a", 2), two("b", 2)], ImpostorSampling::Exhaustive).unwrap();
        assert_eq!((s.genuine.len(), s.impostor.len()), (2, 4));
        let s = build_score_sets(
            &[two("a", 3), two("b", 3), two("c", 3)],
            ImpostorSampling::Exhaustive,
        )
        .unwrap();
        assert_eq!((s.genuine.len(), s.impostor.len()), (9, 27));
        assert!(matches!(
            build_score_sets(&[two("a", 1), two("b", 1)], ImpostorSampling::Exhaustive),
            Err(BiometricError::NoGenuinePairs)
        ));
        assert!(matches!(
            build_score_sets(&[two("a", 3)], ImpostorSampling::Exhaustive),
            Err(BiometricError::TooFewSubjects(1))
        ));
    }

    #[test]
    fn subsampling_caps_and_is_deterministic() {
        let subj = |k: usize| {
            (
                format!("s{k}"),
                (0..4)
                    .map(|e| vec![k as f64, e as f64 * 0.1])
                    .collect::<Vec<_>>(),
            )
        };
        let feats: Vec<_> = (0..5).map(subj).collect();
        let policy = ImpostorSampling::Subsampled { seed: 7, cap: 50 };
        let a = build_score_sets(&feats, policy).unwrap();
        let b = build_score_sets(&feats, policy).unwrap();
        assert_eq!(a.impostor.len(), 50);
        assert_eq!(a, b);
        assert_eq!(a.impostor_sampling, policy);
        // 160 cross pairs fit under a larger cap
        let c =
            build_score_sets(&feats, ImpostorSampling::Subsampled { seed: 7, cap: 1000 }).unwrap();
        assert_eq!(c.impostor.len(), 160);
        assert_eq!(c.impostor_sampling, ImpostorSampling::Exhaustive);
    }

    #[test]
    fn separated_sets() {
        let s = set(&[0.9, 0.8], &[0.2, 0.1]);
        let curve = roc(&s).unwrap();
        assert!(curve.points.iter().any(|p| p.far == 0.0 && p.frr == 0.0));
        assert_eq!(eer(&curve), 0.0);
        assert_eq!(auc(&s).unwrap(), 1.0);
    }

    #[test]
    fn indistinguishable_sets() {
        let s = set(&[0.5], &[0.5]);
        assert_eq!(eer(&roc(&s).unwrap()), 0.5);
        assert_eq!(auc(&s).unwrap(), 0.5);
        let s = set(&[0.1, 0.4, 0.4, 0.9], &[0.9, 0.4, 0.1, 0.4]);
        assert_eq!(auc(&s).unwrap(), 0.5);
    }

    #[test]
    fn auc_pair_count() {
        assert_eq!(auc(&set(&[0.8, 0.6], &[0.7, 0.5])).unwrap(), 0.75);
    }

    #[test]
    fn curve_endpoints_and_monotonicity() {
        let curve = roc(&set(&[0.8, 0.6, 0.4], &[0.7, 0.3, 0.2])).unwrap();
        let first = curve.points.first().unwrap();
        let last = curve.points.last().unwrap();
        assert_eq!((first.far, first.frr), (1.0, 0.0));
        assert_eq!((last.far, last.frr), (0.0, 1.0));
        for w in curve.points.windows(2) {
            assert!(w[1].far <= w[0].far && w[1].frr >= w[0].frr);
        }
    }

    #[test]
    fn empty_lists_rejected() {
        assert!(matches!(
            roc(&set(&[], &[0.1])),
            Err(BiometricError::EmptyScores("genuine"))
        ));
        assert!(matches!(
            auc(&set(&[0.1], &[])),
            Err(BiometricError::EmptyScores("impostor"))
        ));
    }

    #[test]
    fn cell_key_parsing() {
        let k: CellKey = "EO/gamma/PLV/0.5".parse().unwrap();
        assert_eq!(k.condition, Condition::EyesOpen);
        assert_eq!(k.method, Method::Plv);
        assert_eq!(k.to_string(), "EO/gamma/PLV/0.5");
        assert!("EO/gamma/PLV".parse::<CellKey>().is_err());
    }

    #[test]
    fn score_dump_roundtrip() {
        let s = set(&[0.25, 1.0 / 3.0], &[0.1]);
        let mut buf = Vec::new();
        write_score_dump(&s, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("label,score\ngenuine,0.25\n"));
        let back = read_score_dump(buf.as_slice()).unwrap();
        assert_eq!(back.genuine, s.genuine);
        assert_eq!(back.impostor, s.impostor);
    }
}
