use super::{sample_topology, DecisionSampler, ExperimentConfig, Result, TopologyMode};
use crate::channel::NetworkLayout;
use crate::detection::{
    calibrate_from_samples, CandidateTable, DetectionContext, ErrorRate, GridSpec, Scenario,
};
use crate::rng::{sub_seed, trial_rng};
use rayon::prelude::*;

const TOPOLOGY: u64 = 1;
const CALIBRATION: u64 = 2;
const NULL_EVAL: u64 = 3;
const SIGNAL_EVAL: u64 = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Detector {
    Gad,
    Glrt,
    Glod,
}

impl Detector {
    pub const ALL: [Detector; 3] = [Detector::Gad, Detector::Glrt, Detector::Glod];

    pub fn name(self) -> &'static str {
        match self {
            Detector::Gad => "GAD",
            Detector::Glrt => "G-LRT",
            Detector::Glod => "G-LOD",
        }
    }
}

/// One operating point of one detector.
#[derive(Debug, Clone, PartialEq)]
pub struct RocPoint {
    pub detector: Detector,
    pub k: usize,
    pub mu: f64,
    pub target_pfa: f64,
    pub tau3: f64,
    pub gamma: f64,
    /// Measured on trials independent of the calibration set.
    pub achieved_pfa: ErrorRate,
    pub pm: ErrorRate,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RocResult {
    pub points: Vec<RocPoint>,
    pub warnings: Vec<String>,
}

impl RocResult {
    pub fn point(&self, detector: Detector, k: usize, mu: f64, pfa: f64) -> Option<&RocPoint> {
        self.points
            .iter()
            .find(|p| p.detector == detector && p.k == k && p.mu == mu && p.target_pfa == pfa)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CalibrationRow {
    pub detector: Detector,
    pub k: usize,
    pub mu: f64,
    pub calibration: crate::detection::Calibration,
}

/// The three statistics for one layout and one candidate rate scale.
struct Evaluator {
    gad: CandidateTable,
    glrt: CandidateTable,
    glod: CandidateTable,
}

impl Evaluator {
    fn new(cfg: &ExperimentConfig, layout: &NetworkLayout, mu: f64) -> Result<Self> {
        let ctx = DetectionContext::new(
            layout,
            &cfg.thresholds(),
            &cfg.noise(layout.len()),
            &cfg.channels()?,
        )?;
        let positions = GridSpec::square_positions(cfg.network.edge, cfg.grid_side, 0.0);
        let grid = GridSpec::new(positions.clone(), GridSpec::mu_levels(mu, cfg.mu_levels))?;
        Ok(Evaluator {
            gad: ctx.gad_table(&cfg.target, mu)?,
            glrt: ctx.glrt_table(&grid)?,
            glod: ctx.glod_table(&positions)?,
        })
    }

    fn stats(&self, d: &[bool]) -> [f64; 3] {
        [self.gad.max(d), 2.0 * self.glrt.max(d), self.glod.max(d)]
    }
}

/// Detector statistics over `n` trials of one sample type.
fn sample_stats(
    cfg: &ExperimentConfig,
    tag: u64,
    n: u64,
    mu: f64,
    signal: bool,
    k: usize,
) -> Result<Vec<[f64; 3]>> {
    let seed = sub_seed(cfg.seed, tag);
    let scenario = Scenario::new(cfg.target, if signal { mu } else { 0.0 })?;
    let channels = cfg.channels()?;
    let sampler = |layout: &NetworkLayout| {
        DecisionSampler::new(
            &scenario,
            layout,
            &cfg.thresholds(),
            &cfg.noise(layout.len()),
            &channels,
            cfg.detection.model,
        )
    };
    match cfg.network.topology {
        TopologyMode::Fixed => {
            let full = sample_topology(cfg, &mut trial_rng(sub_seed(cfg.seed, TOPOLOGY), 0))?;
            let eval = Evaluator::new(cfg, &full.prefix(k), mu)?;
            let draw = sampler(&full)?;
            Ok((0..n)
                .into_par_iter()
                .map(|i| eval.stats(&draw.sample(&mut trial_rng(seed, i))[..k]))
                .collect())
        }
        TopologyMode::PerTrial => (0..n)
            .into_par_iter()
            .map(|i| {
                let mut rng = trial_rng(seed, i);
                let full = sample_topology(cfg, &mut rng)?;
                let d = sampler(&full)?.sample(&mut rng);
                Ok(Evaluator::new(cfg, &full.prefix(k), mu)?.stats(&d[..k]))
            })
            .collect(),
    }
}

fn column(stats: &[[f64; 3]], j: usize) -> Vec<f64> {
    stats.iter().map(|s| s[j]).collect()
}

fn operating_points(
    cfg: &ExperimentConfig,
    mus: &[f64],
    ks: &[usize],
    pfas: &[f64],
) -> Result<RocResult> {
    cfg.validate()?;
    let mut points = Vec::new();
    let mut warnings = Vec::new();
    for &mu in mus {
        for &k in ks {
            let cal = sample_stats(cfg, CALIBRATION, cfg.calibration_trials, mu, false, k)?;
            let null = sample_stats(cfg, NULL_EVAL, cfg.evaluation_trials, mu, false, k)?;
            let signal = sample_stats(cfg, SIGNAL_EVAL, cfg.evaluation_trials, mu, true, k)?;
            for &pfa in pfas {
                for (j, detector) in Detector::ALL.into_iter().enumerate() {
                    let c = calibrate_from_samples(column(&cal, j), pfa)?;
                    if let Some(w) = &c.warning {
                        warnings.push(format!(
                            "{} K={k} mu={mu:e} P_fa={pfa:e}: {w}",
                            detector.name()
                        ));
                    }
                    points.push(RocPoint {
                        detector,
                        k,
                        mu,
                        target_pfa: pfa,
                        tau3: c.tau3,
                        gamma: c.gamma,
                        achieved_pfa: c.rate(&column(&null, j)),
                        pm: c.rate(&column(&signal, j)).complement(),
                    });
                }
            }
        }
    }
    Ok(RocResult { points, warnings })
}

/// Missed detection versus false alarm for every configured rate.
pub fn run_roc(cfg: &ExperimentConfig) -> Result<RocResult> {
    operating_points(cfg, &cfg.roc_mu, &[cfg.network.k], &cfg.roc_pfa)
}

/// Missed detection at a fixed false alarm rate for nested sensor subsets.
pub fn sweep_k(cfg: &ExperimentConfig, k_values: &[usize]) -> Result<RocResult> {
    let mut cfg = cfg.clone();
    cfg.sweep_k = k_values.to_vec();
    cfg.validate()?;
    operating_points(&cfg, &[cfg.sweep_mu], k_values, &[cfg.sweep_pfa])
}

/// Thresholds only, from the H0 calibration trials.
pub fn calibrate(cfg: &ExperimentConfig) -> Result<Vec<CalibrationRow>> {
    cfg.validate()?;
    let k = cfg.network.k;
    let mut rows = Vec::new();
    for &mu in &cfg.roc_mu {
        let cal = sample_stats(cfg, CALIBRATION, cfg.calibration_trials, mu, false, k)?;
        for &pfa in &cfg.roc_pfa {
            for (j, detector) in Detector::ALL.into_iter().enumerate() {
                rows.push(CalibrationRow {
                    detector,
                    k,
                    mu,
                    calibration: calibrate_from_samples(column(&cal, j), pfa)?,
                });
            }
        }
    }
    Ok(rows)
}
