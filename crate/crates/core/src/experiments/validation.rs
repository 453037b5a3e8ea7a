use super::{ExperimentConfig, Result};
use crate::channel::{Link, ReactionChannelParams};
use crate::numerics::poisson_pmf;
use crate::particlesim::{ensemble_histogram, SimConfig, Simulator};
use crate::rng::sub_seed;

const CHANNEL: u64 = 11;
const POISSON: u64 = 12;
/// Source-to-sensor-center distance of the validation geometry, um.
const DISTANCE: f64 = 1.0;

#[derive(Debug, Clone, PartialEq)]
pub struct ChannelValidationRow {
    pub k_b: f64,
    pub t: f64,
    pub analytic: f64,
    pub simulated: f64,
    pub stderr: f64,
    /// `(simulated - analytic) / analytic`
    pub gap: f64,
    pub asymptote: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PoissonValidationRow {
    pub k_b: f64,
    pub time: f64,
    pub mean_analytic: f64,
    pub mean_simulated: f64,
    pub tv: f64,
    pub trials: u64,
}

fn scaled(p: &ReactionChannelParams, factor: f64) -> ReactionChannelParams {
    ReactionChannelParams {
        k_b: p.k_b * factor,
        ..*p
    }
}

/// Mean bound count of the particle simulator against the analytical mean.
pub fn validate_channel(cfg: &ExperimentConfig) -> Result<Vec<ChannelValidationRow>> {
    let spec = &cfg.channel_validation;
    let mut rows = Vec::new();
    for (i, &factor) in spec.kb_factors.iter().enumerate() {
        let params = scaled(&cfg.ns_link, factor);
        let mut sim_cfg = SimConfig::sensor_validation(params, spec.mu, spec.times.clone());
        sim_cfg.dt = spec.dt;
        sim_cfg.seed = sub_seed(cfg.seed, CHANNEL + 100 * i as u64);
        let means = Simulator::new(sim_cfg)?.ensemble_means(spec.trials)?;
        let link = Link::new(params)?;
        let asymptote = spec.mu * link.gain(DISTANCE)?;
        for (&t, &(simulated, stderr)) in spec.times.iter().zip(&means) {
            let analytic = link.transient_mean(t, spec.mu, DISTANCE)?;
            rows.push(ChannelValidationRow {
                k_b: params.k_b,
                t,
                analytic,
                simulated,
                stderr,
                gap: (simulated - analytic) / analytic,
                asymptote,
            });
        }
    }
    Ok(rows)
}

/// Total variation distance between the simulated count histogram and the
/// Poisson law with the analytical mean. No environmental noise is added.
pub fn validate_poisson(cfg: &ExperimentConfig) -> Result<Vec<PoissonValidationRow>> {
    let spec = &cfg.poisson_validation;
    let mut rows = Vec::new();
    for (i, &factor) in spec.kb_factors.iter().enumerate() {
        let params = scaled(&cfg.ns_link, factor);
        let mut sim_cfg = SimConfig::sensor_validation(params, spec.mu, vec![spec.time]);
        sim_cfg.dt = spec.dt;
        sim_cfg.seed = sub_seed(cfg.seed, POISSON + 100 * i as u64);
        sim_cfg.release_start = (spec.time - spec.window).max(0.0);
        let hist = ensemble_histogram(&sim_cfg, spec.trials, spec.time)?;
        let mean = Link::new(params)?.transient_mean(spec.time, spec.mu, DISTANCE)?;
        rows.push(PoissonValidationRow {
            k_b: params.k_b,
            time: spec.time,
            mean_analytic: mean,
            mean_simulated: hist.mean(),
            tv: hist.tv_distance(|k| poisson_pmf(k, mean)),
            trials: spec.trials,
        });
    }
    Ok(rows)
}
