//! Monte Carlo experiments: simulator-versus-model checks and detector
//! error rates.

mod output;
mod roc;
mod validation;

pub use output::{write_calibration_csv, write_channel_csv, write_poisson_csv, write_roc_csv};
pub use roc::{calibrate, run_roc, sweep_k, CalibrationRow, Detector, RocPoint, RocResult};
pub use validation::{
    validate_channel, validate_poisson, ChannelValidationRow, PoissonValidationRow,
};

use crate::channel::{
    ChannelError, LayoutLimits, Link, NetworkLayout, ReactionChannelParams, Vec3,
};
use crate::detection::{
    Channels, DecisionVector, DetectionContext, DetectionError, NoiseModel, Scenario, Thresholds,
};
use crate::particlesim::SimError;
use crate::rng::TrialRng;
use rand::Rng;
use rand_distr::{Distribution, Poisson};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error(transparent)]
    Detection(#[from] DetectionError),
    #[error(transparent)]
    Channel(#[from] ChannelError),
    #[error(transparent)]
    Simulation(#[from] SimError),
    #[error("could not place sensor {sensor} after {tries} draws")]
    Placement { sensor: usize, tries: u32 },
    #[error("invalid experiment configuration: {}", .0.join("; "))]
    InvalidConfig(Vec<String>),
}

pub type Result<T> = std::result::Result<T, ExperimentError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TopologyMode {
    /// New sensor positions for every trial.
    PerTrial,
    /// One topology per seed, shared by all trials.
    Fixed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DecisionModel {
    /// Poisson counts at the sensors and at the FC.
    Cascade,
    /// Bernoulli draws with the end-to-end transition probabilities.
    Bernoulli,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NetworkSpec {
    pub k: usize,
    /// Edge of the square holding the sensors, um.
    pub edge: f64,
    pub fc: Vec3,
    pub min_spacing: f64,
    pub topology: TopologyMode,
    pub max_retries: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DetectionSpec {
    pub zeta0: f64,
    pub zeta_k: f64,
    pub tau1: u64,
    pub tau2: u64,
    /// `N`
    pub n_release: f64,
    /// Sensor decision time `T1`, s.
    pub t1: f64,
    /// FC observation time `T2`, s.
    pub t2: f64,
    pub model: DecisionModel,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChannelValidationSpec {
    pub mu: f64,
    pub times: Vec<f64>,
    pub trials: u64,
    pub kb_factors: Vec<f64>,
    pub dt: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PoissonValidationSpec {
    pub mu: f64,
    pub time: f64,
    /// Secretion starts `window` before `time`; earlier molecules are
    /// degraded by then.
    pub window: f64,
    pub trials: u64,
    pub kb_factors: Vec<f64>,
    pub dt: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub seed: u64,
    pub ns_link: ReactionChannelParams,
    pub fc_link: ReactionChannelParams,
    pub network: NetworkSpec,
    pub target: Vec3,
    pub detection: DetectionSpec,
    pub grid_side: usize,
    pub mu_levels: usize,
    pub calibration_trials: u64,
    pub evaluation_trials: u64,
    pub roc_mu: Vec<f64>,
    pub roc_pfa: Vec<f64>,
    pub sweep_mu: f64,
    pub sweep_k: Vec<usize>,
    pub sweep_pfa: f64,
    pub channel_validation: ChannelValidationSpec,
    pub poisson_validation: PoissonValidationSpec,
}

impl ExperimentConfig {
    pub fn table1() -> Self {
        let ns_link = ReactionChannelParams::table1_ns();
        ExperimentConfig {
            seed: 1,
            ns_link,
            fc_link: ReactionChannelParams::table1_fc(),
            network: NetworkSpec {
                k: 64,
                edge: 25.0,
                fc: [-30.0, -30.0, 0.0],
                min_spacing: 2.0 * ns_link.receiver_radius,
                topology: TopologyMode::PerTrial,
                max_retries: 1000,
            },
            target: [10.0, 10.0, 0.0],
            detection: DetectionSpec {
                zeta0: 10.0,
                zeta_k: 5.0,
                tau1: 16,
                tau2: 9,
                n_release: 1e7,
                t1: 0.010,
                t2: 0.015,
                model: DecisionModel::Cascade,
            },
            grid_side: 16,
            mu_levels: 100,
            calibration_trials: 100_000,
            evaluation_trials: 100_000,
            roc_mu: vec![6e8, 4e9],
            roc_pfa: vec![1e-3, 1e-2, 1e-1],
            sweep_mu: 2e9,
            sweep_k: vec![16, 32, 64],
            sweep_pfa: 1e-3,
            channel_validation: ChannelValidationSpec {
                mu: 3e7,
                times: vec![5e-5, 1e-4, 2.5e-4],
                trials: 2000,
                kb_factors: vec![1.0, 10.0],
                dt: 5e-8,
            },
            poisson_validation: PoissonValidationSpec {
                mu: 1e7,
                time: 0.015,
                window: 1e-3,
                trials: 2000,
                kb_factors: vec![1.0, 10.0],
                dt: 5e-8,
            },
        }
    }

    /// Every violated invariant.
    pub fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        for (name, p) in [("ns_link", &self.ns_link), ("fc_link", &self.fc_link)] {
            out.extend(p.violations().into_iter().map(|v| format!("{name}: {v}")));
        }
        let n = &self.network;
        if n.k == 0 {
            out.push("network.k must be at least 1".into());
        }
        if !(n.edge > 0.0 && n.edge.is_finite()) {
            out.push(format!("network.edge must be positive (got {})", n.edge));
        }
        if !(n.min_spacing >= 0.0) {
            out.push("network.min_spacing must be >= 0".into());
        }
        if n.max_retries == 0 {
            out.push("network.max_retries must be at least 1".into());
        }
        let d = &self.detection;
        if !(d.zeta0 >= 0.0 && d.zeta_k >= 0.0) {
            out.push("noise means must be >= 0".into());
        }
        if !(d.n_release >= 0.0 && d.n_release.is_finite()) {
            out.push("detection.n_release must be >= 0".into());
        }
        if !(d.t1 >= 0.0 && d.t2 > d.t1) {
            out.push(format!("need 0 <= t1 < t2 (got {} and {})", d.t1, d.t2));
        }
        if self.grid_side == 0 || self.mu_levels == 0 {
            out.push("grid.side and grid.mu_levels must be at least 1".into());
        }
        if self.calibration_trials == 0 || self.evaluation_trials == 0 {
            out.push("trial counts must be at least 1".into());
        }
        if self.roc_mu.is_empty() || self.roc_mu.iter().any(|m| !(*m > 0.0)) {
            out.push("roc.mu must list positive rates".into());
        }
        let bad_pfa = |p: &f64| !(*p > 0.0 && *p < 1.0);
        if self.roc_pfa.is_empty()
            || self.roc_pfa.iter().any(bad_pfa)
            || self.roc_pfa.windows(2).any(|w| w[1] <= w[0])
        {
            out.push("roc.pfa must be ascending values in (0, 1)".into());
        }
        if !(self.sweep_mu > 0.0) {
            out.push("sweep.mu must be positive".into());
        }
        if bad_pfa(&self.sweep_pfa) {
            out.push("sweep.pfa must lie in (0, 1)".into());
        }
        if self.sweep_k.is_empty() || self.sweep_k.iter().any(|&k| k == 0 || k > n.k) {
            out.push(format!("sweep.k must list values in 1..={}", n.k));
        }
        let c = &self.channel_validation;
        if c.trials < 2
            || c.times.is_empty()
            || c.kb_factors.iter().any(|f| !(*f > 0.0))
            || !(c.dt > 0.0)
        {
            out.push(
                "channel_validation needs >= 2 trials, sample times, positive k_b factors and dt"
                    .into(),
            );
        }
        let p = &self.poisson_validation;
        if p.trials < 100
            || !(p.time > 0.0)
            || !(p.window > 0.0)
            || p.kb_factors.iter().any(|f| !(*f > 0.0))
            || !(p.dt > 0.0)
        {
            out.push("poisson_validation needs >= 100 trials and positive time, window, k_b factors and dt".into());
        }
        out
    }

    pub fn validate(&self) -> Result<()> {
        let v = self.violations();
        if v.is_empty() {
            Ok(())
        } else {
            Err(ExperimentError::InvalidConfig(v))
        }
    }

    pub fn thresholds(&self) -> Thresholds {
        Thresholds {
            tau1: self.detection.tau1,
            tau2: self.detection.tau2,
            tau3: f64::NAN,
        }
    }

    pub fn noise(&self, k: usize) -> NoiseModel {
        NoiseModel::uniform(self.detection.zeta0, self.detection.zeta_k, k)
    }

    pub fn limits(&self) -> LayoutLimits {
        LayoutLimits {
            sensor_radius: self.ns_link.receiver_radius,
            fc_radius: self.fc_link.receiver_radius,
            min_spacing: self.network.min_spacing,
        }
    }

    pub fn channels(&self) -> Result<Channels> {
        Ok(Channels {
            ns: Link::new(self.ns_link)?,
            fc: Link::new(self.fc_link)?,
            n_release: self.detection.n_release,
            elapsed: self.detection.t2 - self.detection.t1,
        })
    }
}

/// `K` uniform sensor positions in the square at `z = 0`, redrawing any
/// position that overlaps the FC, another sensor or the target.
pub fn sample_topology(cfg: &ExperimentConfig, rng: &mut TrialRng) -> Result<NetworkLayout> {
    let n = &cfg.network;
    let limits = cfg.limits();
    let half = n.edge / 2.0;
    let mut sensors: Vec<Vec3> = Vec::with_capacity(n.k);
    for sensor in 0..n.k {
        let mut tries = 0;
        loop {
            if tries == n.max_retries {
                return Err(ExperimentError::Placement { sensor, tries });
            }
            tries += 1;
            let x = [
                rng.random_range(-half..=half),
                rng.random_range(-half..=half),
                0.0,
            ];
            let clear = limits.sensor_problems(&x, &sensors, &n.fc).is_empty()
                && crate::channel::distance(&x, &cfg.target) > limits.sensor_radius;
            if clear {
                sensors.push(x);
                break;
            }
        }
    }
    NetworkLayout::new(cfg.target, sensors, n.fc, limits)
        .map_err(|e| ExperimentError::InvalidConfig(e.0))
}

fn poisson(mean: f64) -> Option<Poisson<f64>> {
    (mean > 0.0).then(|| Poisson::new(mean).expect("finite positive mean"))
}

fn draw(dist: &Option<Poisson<f64>>, rng: &mut TrialRng) -> u64 {
    dist.as_ref().map_or(0, |p| p.sample(rng) as u64)
}

/// Draws decision vectors for one scenario and layout.
#[derive(Debug, Clone)]
pub enum DecisionSampler {
    Cascade {
        tau1: u64,
        tau2: u64,
        sensor: Vec<Option<Poisson<f64>>>,
        fc_idle: Vec<Option<Poisson<f64>>>,
        fc_active: Vec<Option<Poisson<f64>>>,
    },
    Bernoulli {
        p_one: Vec<f64>,
    },
}

impl DecisionSampler {
    pub fn new(
        scenario: &Scenario,
        layout: &NetworkLayout,
        thresholds: &Thresholds,
        noise: &NoiseModel,
        channels: &Channels,
        model: DecisionModel,
    ) -> Result<Self> {
        match model {
            DecisionModel::Cascade => {
                let mut sensor = Vec::with_capacity(layout.len());
                for &dist in &layout.target_distances(&scenario.x_t) {
                    let s = if scenario.mu > 0.0 {
                        scenario.mu * channels.ns.gain(dist)?
                    } else {
                        0.0
                    };
                    sensor.push(poisson(noise.zeta0 + s));
                }
                let mut fc_idle = Vec::with_capacity(layout.len());
                let mut fc_active = Vec::with_capacity(layout.len());
                for (&dist, &zeta) in layout.fc_dist.iter().zip(&noise.zeta_k) {
                    let p = if channels.n_release > 0.0 {
                        channels.fc.activation(channels.elapsed, dist)?
                    } else {
                        0.0
                    };
                    fc_idle.push(poisson(zeta));
                    fc_active.push(poisson(zeta + channels.n_release * p));
                }
                Ok(DecisionSampler::Cascade {
                    tau1: thresholds.tau1,
                    tau2: thresholds.tau2,
                    sensor,
                    fc_idle,
                    fc_active,
                })
            }
            DecisionModel::Bernoulli => {
                let ctx = DetectionContext::new(layout, thresholds, noise, channels)?;
                let tp = ctx.transition(&scenario.x_t, scenario.mu)?;
                let p_one = if scenario.mu > 0.0 { tp.rho1 } else { tp.rho0 };
                Ok(DecisionSampler::Bernoulli { p_one })
            }
        }
    }

    pub fn sample(&self, rng: &mut TrialRng) -> DecisionVector {
        match self {
            DecisionSampler::Cascade {
                tau1,
                tau2,
                sensor,
                fc_idle,
                fc_active,
            } => (0..sensor.len())
                .map(|k| {
                    let c = draw(&sensor[k], rng) > *tau1;
                    let z = draw(if c { &fc_active[k] } else { &fc_idle[k] }, rng);
                    z > *tau2
                })
                .collect::<Vec<_>>()
                .into(),
            DecisionSampler::Bernoulli { p_one } => p_one
                .iter()
                .map(|&p| rng.random_bool(p))
                .collect::<Vec<_>>()
                .into(),
        }
    }
}

/// One draw of the received decisions through the Poisson cascade.
pub fn simulate_decision_vector(
    scenario: &Scenario,
    layout: &NetworkLayout,
    thresholds: &Thresholds,
    noise: &NoiseModel,
    channels: &Channels,
    rng: &mut TrialRng,
) -> Result<DecisionVector> {
    Ok(DecisionSampler::new(
        scenario,
        layout,
        thresholds,
        noise,
        channels,
        DecisionModel::Cascade,
    )?
    .sample(rng))
}
