//! Particle-based Brownian simulation of one reactive receiver.
//!
//! Molecules diffuse freely, degrade at rate `k_d` while free, and bind to the
//! receiver surface on contact with probability `p_bind`, otherwise reflecting.
//! Bound molecules release at rate `k_b` and do not degrade. The receptors are
//! not placed individually: the sphere is uniformly reactive with capacity `M`
//! and the homogenized rate `k*_f`.
//!
//! Two engines share these rules:
//!
//! * [`Simulator::step`] advances a whole population by one step, literally.
//! * [`Simulator::run_trial`] follows each molecule on its own. Molecules only
//!   interact through the receptor capacity, so this is exact as long as the
//!   receptors never fill up; a trial where they would is reported as
//!   [`SimError::CapacityExceeded`]. Far from the receiver several steps are
//!   merged into one Gaussian jump when the surface is more than six standard
//!   deviations away.

mod output;

pub use output::{write_histogram_csv, write_means_csv, write_series_csv};

use crate::channel::{effective_forward_rate, ChannelError, ReactionChannelParams, Vec3};
use crate::rng::{trial_rng, TrialRng};
use rand::Rng;
use rand_distr::{Distribution, Geometric, Poisson, StandardNormal};
use rayon::prelude::*;
use std::f64::consts::PI;
use thiserror::Error;

/// Released molecules reappear at `a (1 + RELEASE_OFFSET)`.
pub const RELEASE_OFFSET: f64 = 1e-6;

/// Merge steps only when the surface is this many per-axis standard
/// deviations of the merged jump away.
const FAR_FIELD_SIGMAS: f64 = 6.0;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error("invalid simulation config: {}", .0.join("; "))]
    InvalidConfig(Vec<String>),
    #[error(transparent)]
    Channel(#[from] ChannelError),
    #[error("bound count would reach {peak}, receptor capacity is {capacity}")]
    CapacityExceeded { peak: u64, capacity: u32 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ReleaseMode {
    /// Poisson secretion at `rate` molecules per second.
    Continuous { rate: f64 },
    /// `count` molecules at `t = 0`.
    Impulsive { count: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Receiver {
    pub center: Vec3,
    pub params: ReactionChannelParams,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub dt: f64,
    pub horizon: f64,
    pub seed: u64,
    pub release: ReleaseMode,
    /// Continuous secretion starts here instead of at 0.
    pub release_start: f64,
    pub source: Vec3,
    pub receiver: Receiver,
    /// Ascending times at which the bound count is recorded.
    pub sample_times: Vec<f64>,
}

impl SimConfig {
    /// Single-sensor geometry: source at the origin, sensor at (1, 0, 0) um, 0.05 us steps.
    pub fn sensor_validation(
        params: ReactionChannelParams,
        rate: f64,
        sample_times: Vec<f64>,
    ) -> Self {
        let horizon = sample_times.iter().cloned().fold(0.0, f64::max);
        SimConfig {
            dt: 5e-8,
            horizon,
            seed: 1,
            release: ReleaseMode::Continuous { rate },
            release_start: 0.0,
            source: [0.0; 3],
            receiver: Receiver {
                center: [1.0, 0.0, 0.0],
                params,
            },
            sample_times,
        }
    }

    pub fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            out.push(format!("dt must be positive (got {})", self.dt));
        }
        if !(self.horizon >= self.dt && self.horizon.is_finite()) {
            out.push(format!("horizon {} must be at least dt", self.horizon));
        }
        match self.release {
            ReleaseMode::Continuous { rate } if !(rate >= 0.0 && rate.is_finite()) => {
                out.push(format!("secretion rate must be >= 0 (got {rate})"))
            }
            _ => {}
        }
        if !(self.release_start >= 0.0 && self.release_start < self.horizon) {
            out.push(format!(
                "release_start {} must lie in [0, horizon)",
                self.release_start
            ));
        }
        let a = self.receiver.params.receiver_radius;
        let d = crate::channel::distance(&self.source, &self.receiver.center);
        if !(d > a) {
            out.push(format!(
                "source is {d} um from the receiver center, inside radius {a}"
            ));
        }
        if self.sample_times.windows(2).any(|w| w[1] < w[0]) {
            out.push("sample_times must be ascending".into());
        }
        if self
            .sample_times
            .iter()
            .any(|&t| !(0.0..=self.horizon).contains(&t))
        {
            out.push("sample_times must lie in [0, horizon]".into());
        }
        out.extend(self.receiver.params.violations());
        out
    }
}

/// Per-contact binding probability that reproduces a partially absorbing
/// surface with rate `kf_star`: `kappa sqrt(pi dt / D)`, `kappa = kf_star / (4 pi a^2)`.
pub fn binding_probability(params: &ReactionChannelParams, kf_star: f64, dt: f64) -> f64 {
    let a = params.receiver_radius;
    let kappa = kf_star / (4.0 * PI * a * a);
    kappa * (PI * dt / params.diffusion).sqrt()
}

/// Free molecules (positions relative to the receiver center) and the surface
/// normals of the occupied receptors.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ParticlePopulation {
    pub free: Vec<Vec3>,
    pub bound_sites: Vec<Vec3>,
    /// Number of completed steps.
    pub steps: u64,
}

impl ParticlePopulation {
    pub fn bound_count(&self) -> usize {
        self.bound_sites.len()
    }
}

/// What happened to molecules during one step.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct StepCounts {
    pub degraded: usize,
    pub bound: usize,
    pub released: usize,
    pub injected: usize,
}

/// Bound counts at the configured sample times.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    pub times: Vec<f64>,
    pub counts: Vec<u32>,
}

/// A validated config with its per-step constants.
#[derive(Debug, Clone)]
pub struct Simulator {
    pub config: SimConfig,
    radius: f64,
    sigma: f64,
    p_bind: f64,
    p_degrade: f64,
    p_unbind: f64,
    capacity: u32,
    n_steps: u64,
    first_release_step: u64,
    sample_steps: Vec<u64>,
    source: Vec3,
    degrade_geo: Option<Geometric>,
    unbind_geo: Option<Geometric>,
}

fn steps_of(t: f64, dt: f64) -> u64 {
    (t / dt).round() as u64
}

fn gaussian3(rng: &mut TrialRng, scale: f64) -> Vec3 {
    [
        scale * rng.sample::<f64, _>(StandardNormal),
        scale * rng.sample::<f64, _>(StandardNormal),
        scale * rng.sample::<f64, _>(StandardNormal),
    ]
}

fn norm(x: &Vec3) -> f64 {
    (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt()
}

fn geometric(p: f64) -> Option<Geometric> {
    if p > 0.0 {
        Some(Geometric::new(p.min(1.0)).expect("valid probability"))
    } else {
        None
    }
}

fn draw(geo: &Option<Geometric>, rng: &mut TrialRng) -> u64 {
    match geo {
        Some(g) => g.sample(rng),
        None => u64::MAX,
    }
}

impl Simulator {
    pub fn new(config: SimConfig) -> Result<Self, SimError> {
        let problems = config.violations();
        if !problems.is_empty() {
            return Err(SimError::InvalidConfig(problems));
        }
        let p = config.receiver.params;
        let (_, _, kf_star) = effective_forward_rate(&p)?;
        let p_bind = binding_probability(&p, kf_star, config.dt);
        if p_bind > 1.0 {
            return Err(SimError::InvalidConfig(vec![format!(
                "dt {} too large: binding probability {p_bind} exceeds 1",
                config.dt
            )]));
        }
        let p_degrade = -(-p.k_d * config.dt).exp_m1();
        let p_unbind = -(-p.k_b * config.dt).exp_m1();
        let c0 = config.receiver.center;
        let source = [
            config.source[0] - c0[0],
            config.source[1] - c0[1],
            config.source[2] - c0[2],
        ];
        Ok(Simulator {
            radius: p.receiver_radius,
            sigma: (2.0 * p.diffusion * config.dt).sqrt(),
            p_bind,
            p_degrade,
            p_unbind,
            capacity: p.receptors,
            n_steps: steps_of(config.horizon, config.dt),
            first_release_step: steps_of(config.release_start, config.dt),
            sample_steps: config
                .sample_times
                .iter()
                .map(|&t| steps_of(t, config.dt))
                .collect(),
            source,
            degrade_geo: geometric(p_degrade),
            unbind_geo: geometric(p_unbind),
            config,
        })
    }

    pub fn binding_probability(&self) -> f64 {
        self.p_bind
    }

    pub fn initial_population(&self) -> ParticlePopulation {
        let mut pop = ParticlePopulation::default();
        if let ReleaseMode::Impulsive { count } = self.config.release {
            pop.free = vec![self.source; count as usize];
        }
        pop
    }

    /// Advances every molecule by one step: degradation, diffusion, binding
    /// or reflection, release of receptors bound before the step, secretion.
    pub fn step(&self, pop: &mut ParticlePopulation, rng: &mut TrialRng) -> StepCounts {
        let a = self.radius;
        let mut counts = StepCounts::default();
        let bound_before = pop.bound_sites.len();
        let mut i = 0;
        while i < pop.free.len() {
            if self.p_degrade > 0.0 && rng.random::<f64>() < self.p_degrade {
                pop.free.swap_remove(i);
                counts.degraded += 1;
                continue;
            }
            let dx = gaussian3(rng, self.sigma);
            let x = pop.free[i];
            let mut y = [x[0] + dx[0], x[1] + dx[1], x[2] + dx[2]];
            let r = norm(&y);
            if r < a {
                if pop.bound_sites.len() < self.capacity as usize
                    && rng.random::<f64>() < self.p_bind
                {
                    pop.bound_sites.push([y[0] / r, y[1] / r, y[2] / r]);
                    pop.free.swap_remove(i);
                    counts.bound += 1;
                    continue;
                }
                let s = (2.0 * a - r) / r;
                y = [y[0] * s, y[1] * s, y[2] * s];
            }
            pop.free[i] = y;
            i += 1;
        }
        for j in (0..bound_before).rev() {
            if rng.random::<f64>() < self.p_unbind {
                let n = pop.bound_sites.swap_remove(j);
                let r = a * (1.0 + RELEASE_OFFSET);
                pop.free.push([n[0] * r, n[1] * r, n[2] * r]);
                counts.released += 1;
            }
        }
        pop.steps += 1;
        if let ReleaseMode::Continuous { rate } = self.config.release {
            if pop.steps > self.first_release_step && rate > 0.0 {
                let k = Poisson::new(rate * self.config.dt)
                    .expect("positive mean")
                    .sample(rng) as usize;
                pop.free.extend(std::iter::repeat_n(self.source, k));
                counts.injected = k;
            }
        }
        counts
    }

    /// Runs trial `index` with the population engine, one step at a time.
    pub fn run_trial_reference(&self, index: u64) -> TimeSeries {
        let mut rng = trial_rng(self.config.seed, index);
        let mut pop = self.initial_population();
        let mut counts = Vec::with_capacity(self.sample_steps.len());
        let mut next = 0;
        loop {
            while next < self.sample_steps.len() && self.sample_steps[next] == pop.steps {
                counts.push(pop.bound_count() as u32);
                next += 1;
            }
            if pop.steps >= self.n_steps {
                break;
            }
            self.step(&mut pop, &mut rng);
        }
        TimeSeries {
            times: self.config.sample_times.clone(),
            counts,
        }
    }

    /// Runs trial `index` with the per-molecule engine.
    pub fn run_trial(&self, index: u64) -> Result<TimeSeries, SimError> {
        let mut rng = trial_rng(self.config.seed, index);
        let mut counts = vec![0u32; self.sample_steps.len()];
        let mut events: Vec<(u64, i32)> = Vec::new();
        match self.config.release {
            ReleaseMode::Impulsive { count } => {
                for _ in 0..count {
                    self.follow(0, &mut rng, &mut counts, &mut events);
                }
            }
            ReleaseMode::Continuous { rate } => {
                let span = self.n_steps.saturating_sub(self.first_release_step);
                let mean = rate * self.config.dt * span as f64;
                let total = if mean > 0.0 {
                    Poisson::new(mean).expect("positive mean").sample(&mut rng) as u64
                } else {
                    0
                };
                for _ in 0..total {
                    let step = self.first_release_step + 1 + rng.random_range(0..span);
                    self.follow(step, &mut rng, &mut counts, &mut events);
                }
            }
        }
        let peak = peak_occupancy(&mut events);
        if peak > self.capacity as u64 {
            return Err(SimError::CapacityExceeded {
                peak,
                capacity: self.capacity,
            });
        }
        Ok(TimeSeries {
            times: self.config.sample_times.clone(),
            counts,
        })
    }

    /// Tracks one molecule that appears at the source at the end of step `start`.
    fn follow(
        &self,
        start: u64,
        rng: &mut TrialRng,
        counts: &mut [u32],
        events: &mut Vec<(u64, i32)>,
    ) {
        let a = self.radius;
        let n_steps = self.n_steps;
        let mut t = start;
        let mut x = self.source;
        let mut free_left = draw(&self.degrade_geo, rng);
        loop {
            // free until bound at the end of step t, or gone
            let site = loop {
                if t >= n_steps || free_left == 0 {
                    return;
                }
                let r = norm(&x);
                let h = (r - a).max(0.0) / (FAR_FIELD_SIGMAS * self.sigma);
                let k = ((h * h) as u64).min(free_left).min(n_steps - t);
                if k >= 2 {
                    let dx = gaussian3(rng, self.sigma * (k as f64).sqrt());
                    x = [x[0] + dx[0], x[1] + dx[1], x[2] + dx[2]];
                    t += k;
                    free_left -= k;
                    continue;
                }
                free_left -= 1;
                t += 1;
                let dx = gaussian3(rng, self.sigma);
                let mut y = [x[0] + dx[0], x[1] + dx[1], x[2] + dx[2]];
                let r = norm(&y);
                if r < a {
                    if rng.random::<f64>() < self.p_bind {
                        break [y[0] / r, y[1] / r, y[2] / r];
                    }
                    let s = (2.0 * a - r) / r;
                    y = [y[0] * s, y[1] * s, y[2] * s];
                }
                x = y;
            };
            let held = draw(&self.unbind_geo, rng);
            let release = t.saturating_add(1).saturating_add(held);
            let lo = self.sample_steps.partition_point(|&s| s < t);
            let hi = self.sample_steps.partition_point(|&s| s < release);
            for c in &mut counts[lo..hi] {
                *c += 1;
            }
            events.push((t, 1));
            if release > n_steps {
                return;
            }
            events.push((release, -1));
            let r = a * (1.0 + RELEASE_OFFSET);
            x = [site[0] * r, site[1] * r, site[2] * r];
            t = release;
            free_left = draw(&self.degrade_geo, rng);
        }
    }

    /// Bound counts of `n_trials` trials at sample index `sample`, in trial order.
    pub fn ensemble_counts(&self, n_trials: u64, sample: usize) -> Result<Vec<u32>, SimError> {
        (0..n_trials)
            .into_par_iter()
            .map(|i| self.run_trial(i).map(|s| s.counts[sample]))
            .collect()
    }

    /// Mean and standard error of the bound count at every sample time.
    pub fn ensemble_means(&self, n_trials: u64) -> Result<Vec<(f64, f64)>, SimError> {
        let series: Vec<TimeSeries> = (0..n_trials)
            .into_par_iter()
            .map(|i| self.run_trial(i))
            .collect::<Result<_, _>>()?;
        let n = n_trials as f64;
        Ok((0..self.sample_steps.len())
            .map(|j| {
                let (mut s, mut s2) = (0u64, 0u64);
                for ts in &series {
                    let c = ts.counts[j] as u64;
                    s += c;
                    s2 += c * c;
                }
                let mean = s as f64 / n;
                let var = (s2 as f64 / n - mean * mean).max(0.0) * n / (n - 1.0).max(1.0);
                (mean, (var / n).sqrt())
            })
            .collect())
    }
}

/// Largest number of simultaneously bound molecules; `events` holds
/// `(step, +1)` on binding and `(step, -1)` on release.
fn peak_occupancy(events: &mut [(u64, i32)]) -> u64 {
    // within a step, binding happens before release
    events.sort_unstable_by_key(|&(s, d)| (s, -d));
    let mut level: i64 = 0;
    let mut peak: i64 = 0;
    for &(_, d) in events.iter() {
        level += d as i64;
        peak = peak.max(level);
    }
    peak as u64
}

/// Run one trial of `cfg` with its own seed.
pub fn run_trial(cfg: &SimConfig) -> Result<TimeSeries, SimError> {
    Simulator::new(cfg.clone())?.run_trial(0)
}

/// Empirical PMF of a count sample.
#[derive(Debug, Clone, PartialEq)]
pub struct Histogram {
    pub pmf: Vec<f64>,
    pub n_trials: u64,
}

impl Histogram {
    pub fn from_counts(counts: &[u32]) -> Self {
        let max = counts.iter().copied().max().unwrap_or(0) as usize;
        let mut tally = vec![0u64; max + 1];
        for &c in counts {
            tally[c as usize] += 1;
        }
        let n = counts.len() as f64;
        Histogram {
            pmf: tally.into_iter().map(|t| t as f64 / n).collect(),
            n_trials: counts.len() as u64,
        }
    }

    pub fn mean(&self) -> f64 {
        self.pmf.iter().enumerate().map(|(k, p)| k as f64 * p).sum()
    }

    /// Total variation distance to a PMF given on all of `0..`.
    pub fn tv_distance(&self, pmf: impl Fn(u64) -> f64) -> f64 {
        let mut l1 = 0.0;
        let mut covered = 0.0;
        for (k, &p) in self.pmf.iter().enumerate() {
            let q = pmf(k as u64);
            l1 += (p - q).abs();
            covered += q;
        }
        // mass of the model beyond the observed support
        0.5 * (l1 + (1.0 - covered).max(0.0))
    }
}

/// Histogram of the bound count at `sample_time` over `n_trials` trials.
pub fn ensemble_histogram(
    cfg: &SimConfig,
    n_trials: u64,
    sample_time: f64,
) -> Result<Histogram, SimError> {
    if n_trials < 100 {
        return Err(SimError::InvalidConfig(vec![format!(
            "ensemble needs at least 100 trials (got {n_trials})"
        )]));
    }
    let mut cfg = cfg.clone();
    cfg.sample_times = vec![sample_time];
    let sim = Simulator::new(cfg)?;
    Ok(Histogram::from_counts(&sim.ensemble_counts(n_trials, 0)?))
}

#[cfg(test)]
mod tests;
