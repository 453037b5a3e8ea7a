//! Two-stage detection: each sensor thresholds its molecule count, relays
//! its bit over a second diffusive link, and the fusion center (FC) combines
//! the received bits.

mod calibrate;
mod grid;

pub use calibrate::{
    calibrate_from_samples, calibrate_threshold, exact_exceedance, wilson_interval, Calibration,
    ErrorRate,
};
pub use grid::{
    fisher_info, glod_stat, glrt_estimate, glrt_stat, rho1_derivative, score, CandidateTable,
    DetectionContext, GridSpec,
};

use crate::channel::NetworkLayout;
use crate::channel::{ChannelError, Link};
use crate::numerics::{poisson_cdf, poisson_tail, poisson_tail_increment};
use std::ops::Deref;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DetectionError {
    #[error(transparent)]
    Channel(#[from] ChannelError),
    #[error("zeta0 must be positive for the sensor log-likelihood ratio")]
    ZeroNoise,
    #[error("transition probability of sensor {k} is degenerate ({rho})")]
    DegenerateRho { k: usize, rho: f64 },
    #[error("no candidate position carries any signal")]
    NoSignalGeometry,
    #[error("expected {expected} entries, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("empty candidate grid")]
    EmptyGrid,
    #[error("{0}")]
    InvalidInput(String),
}

pub type Result<T> = std::result::Result<T, DetectionError>;

/// Mean environmental counts.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseModel {
    /// At each sensor.
    pub zeta0: f64,
    /// At the FC, one entry per sensor.
    pub zeta_k: Vec<f64>,
}

impl NoiseModel {
    pub fn uniform(zeta0: f64, zeta_fc: f64, k: usize) -> Self {
        NoiseModel {
            zeta0,
            zeta_k: vec![zeta_fc; k],
        }
    }

    pub fn prefix(&self, k: usize) -> Self {
        NoiseModel {
            zeta0: self.zeta0,
            zeta_k: self.zeta_k[..k].to_vec(),
        }
    }

    fn check(&self, k: usize) -> Result<()> {
        if self.zeta_k.len() != k {
            return Err(DetectionError::LengthMismatch {
                expected: k,
                got: self.zeta_k.len(),
            });
        }
        if !(self.zeta0 >= 0.0 && self.zeta0.is_finite())
            || self.zeta_k.iter().any(|z| !(*z >= 0.0 && z.is_finite()))
        {
            return Err(DetectionError::InvalidInput(
                "noise means must be finite and >= 0".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Thresholds {
    pub tau1: u64,
    pub tau2: u64,
    pub tau3: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Hypothesis {
    H0,
    H1,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scenario {
    pub x_t: [f64; 3],
    pub mu: f64,
}

impl Scenario {
    pub fn new(x_t: [f64; 3], mu: f64) -> Result<Self> {
        if !(mu >= 0.0 && mu.is_finite()) {
            return Err(DetectionError::InvalidInput(format!(
                "secretion rate {mu} must be finite and >= 0"
            )));
        }
        Ok(Scenario { x_t, mu })
    }

    pub fn hypothesis(&self) -> Hypothesis {
        if self.mu == 0.0 {
            Hypothesis::H0
        } else {
            Hypothesis::H1
        }
    }
}

/// One thresholded Poisson observation: false alarm and detection
/// probabilities with their complements kept separately, so that
/// `1 - p` stays accurate when `p` rounds to 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Stage {
    pub p_fa: f64,
    pub p_d: f64,
    pub q_fa: f64,
    pub q_d: f64,
    /// `p_d - p_fa`
    pub gain: f64,
}

impl Stage {
    /// Threshold `tau` on `Poisson(zeta)` versus `Poisson(zeta + signal)`.
    pub fn poisson(tau: u64, zeta: f64, signal: f64) -> Self {
        let p_fa = poisson_tail(tau, zeta);
        let gain = poisson_tail_increment(tau, zeta, signal);
        Stage {
            p_fa,
            p_d: (p_fa + gain).min(1.0),
            q_fa: poisson_cdf(tau, zeta),
            q_d: poisson_cdf(tau, zeta + signal),
            gain,
        }
    }

    pub fn from_probs(p_fa: f64, p_d: f64) -> Self {
        Stage {
            p_fa,
            p_d,
            q_fa: 1.0 - p_fa,
            q_d: 1.0 - p_d,
            gain: p_d - p_fa,
        }
    }
}

/// Per-sensor probabilities of both links.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkProbs {
    /// Target to sensor.
    pub ts: Vec<Stage>,
    /// Sensor to FC.
    pub sf: Vec<Stage>,
    /// Molecules released by a sensor that decides 1.
    pub n_release: f64,
}

impl LinkProbs {
    pub fn p_fa_ts(&self) -> f64 {
        self.ts.first().map_or(0.0, |s| s.p_fa)
    }

    pub fn p_d_ts(&self) -> Vec<f64> {
        self.ts.iter().map(|s| s.p_d).collect()
    }

    pub fn p_fa_sf(&self) -> Vec<f64> {
        self.sf.iter().map(|s| s.p_fa).collect()
    }

    pub fn p_d_sf(&self) -> Vec<f64> {
        self.sf.iter().map(|s| s.p_d).collect()
    }
}

/// The two diffusive links and the FC-link signalling constants.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Channels {
    pub ns: Link,
    pub fc: Link,
    /// `N`
    pub n_release: f64,
    /// Time between the sensor release and the FC observation, in s.
    pub elapsed: f64,
}

/// Sensor-to-FC stages for every sensor of `layout`.
pub fn fc_stages(
    layout: &NetworkLayout,
    tau2: u64,
    noise: &NoiseModel,
    channels: &Channels,
) -> Result<Vec<Stage>> {
    noise.check(layout.len())?;
    layout
        .fc_dist
        .iter()
        .zip(&noise.zeta_k)
        .map(|(&dist, &zeta)| {
            let p = if channels.n_release > 0.0 {
                channels.fc.activation(channels.elapsed, dist)?
            } else {
                0.0
            };
            Ok(Stage::poisson(tau2, zeta, channels.n_release * p))
        })
        .collect()
}

pub fn link_probs(
    scenario: &Scenario,
    layout: &NetworkLayout,
    thresholds: &Thresholds,
    noise: &NoiseModel,
    channels: &Channels,
) -> Result<LinkProbs> {
    let sf = fc_stages(layout, thresholds.tau2, noise, channels)?;
    let ts = layout
        .target_distances(&scenario.x_t)
        .into_iter()
        .map(|dist| {
            let signal = if scenario.mu > 0.0 {
                scenario.mu * channels.ns.gain(dist)?
            } else {
                0.0
            };
            Ok(Stage::poisson(thresholds.tau1, noise.zeta0, signal))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(LinkProbs {
        ts,
        sf,
        n_release: channels.n_release,
    })
}

/// Probabilities that the FC reads a 1 from each sensor.
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionProbs {
    pub rho0: Vec<f64>,
    pub rho1: Vec<f64>,
    /// `1 - rho0`
    pub comp0: Vec<f64>,
    /// `1 - rho1`
    pub comp1: Vec<f64>,
    /// `rho1 - rho0`
    pub gap: Vec<f64>,
}

/// Probability of a received 1 and of a received 0 through the cascade
/// `ts -> sf`, with the detection-side input.
pub(crate) fn cascade(ts: &Stage, sf: &Stage) -> (f64, f64) {
    let one = sf.p_fa + ts.p_d * sf.gain;
    let zero = ts.q_d * sf.q_fa + ts.p_d * sf.q_d;
    (one, zero)
}

impl TransitionProbs {
    pub fn from_rhos(rho0: Vec<f64>, rho1: Vec<f64>) -> Result<Self> {
        if rho0.len() != rho1.len() {
            return Err(DetectionError::LengthMismatch {
                expected: rho0.len(),
                got: rho1.len(),
            });
        }
        let tp = TransitionProbs {
            comp0: rho0.iter().map(|r| 1.0 - r).collect(),
            comp1: rho1.iter().map(|r| 1.0 - r).collect(),
            gap: rho0.iter().zip(&rho1).map(|(a, b)| b - a).collect(),
            rho0,
            rho1,
        };
        tp.check()?;
        Ok(tp)
    }

    pub fn len(&self) -> usize {
        self.rho0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rho0.is_empty()
    }

    /// Rejects any probability that is exactly 0 or 1.
    pub fn check(&self) -> Result<()> {
        for k in 0..self.len() {
            for (p, q) in [(self.rho0[k], self.comp0[k]), (self.rho1[k], self.comp1[k])] {
                if !(p > 0.0 && q > 0.0 && p <= 1.0 && q <= 1.0) {
                    return Err(DetectionError::DegenerateRho { k, rho: p });
                }
            }
        }
        Ok(())
    }

    /// `(log(rho1/rho0), log((1-rho1)/(1-rho0)))` for sensor `k`.
    pub fn log_ratios(&self, k: usize) -> (f64, f64) {
        log_ratios(self.rho0[k], self.comp0[k], self.comp1[k], self.gap[k])
    }
}

pub(crate) fn log_ratios(rho0: f64, comp0: f64, comp1: f64, gap: f64) -> (f64, f64) {
    let one = (gap / rho0).ln_1p();
    let r = gap / comp0;
    let zero = if r.abs() < 0.5 {
        (-r).ln_1p()
    } else {
        (comp1 / comp0).ln()
    };
    (one, zero)
}

/// Unchecked cascade; used where infinite log terms are handled by the caller.
pub(crate) fn transition_unchecked(lp: &LinkProbs) -> TransitionProbs {
    let k = lp.ts.len();
    let mut tp = TransitionProbs {
        rho0: Vec::with_capacity(k),
        rho1: Vec::with_capacity(k),
        comp0: Vec::with_capacity(k),
        comp1: Vec::with_capacity(k),
        gap: Vec::with_capacity(k),
    };
    for (ts, sf) in lp.ts.iter().zip(&lp.sf) {
        let null = Stage {
            p_d: ts.p_fa,
            q_d: ts.q_fa,
            ..*ts
        };
        let (r0, c0) = cascade(&null, sf);
        let (r1, c1) = cascade(ts, sf);
        tp.rho0.push(r0);
        tp.comp0.push(c0);
        tp.rho1.push(r1);
        tp.comp1.push(c1);
        tp.gap.push(ts.gain * sf.gain);
    }
    tp
}

pub fn transition_probs(lp: &LinkProbs) -> Result<TransitionProbs> {
    if lp.ts.len() != lp.sf.len() {
        return Err(DetectionError::LengthMismatch {
            expected: lp.ts.len(),
            got: lp.sf.len(),
        });
    }
    let tp = transition_unchecked(lp);
    tp.check()?;
    Ok(tp)
}

/// Decisions received at the FC.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct DecisionVector {
    pub d: Vec<bool>,
}

impl From<Vec<bool>> for DecisionVector {
    fn from(d: Vec<bool>) -> Self {
        DecisionVector { d }
    }
}

impl Deref for DecisionVector {
    type Target = [bool];
    fn deref(&self) -> &[bool] {
        &self.d
    }
}

impl DecisionVector {
    /// The `index`-th of the `2^k` vectors, bit `j` of `index` giving `d_j`.
    pub fn enumerate(k: usize, index: u64) -> Self {
        (0..k)
            .map(|j| index >> j & 1 == 1)
            .collect::<Vec<_>>()
            .into()
    }
}

/// Sensor log-likelihood ratio of `y` counts for a target of gain `gain`.
pub fn ns_llr(y: u64, mu: f64, gain: f64, zeta0: f64) -> Result<f64> {
    if zeta0 <= 0.0 {
        return Err(DetectionError::ZeroNoise);
    }
    if !(mu > 0.0) {
        return Err(DetectionError::InvalidInput(format!(
            "secretion rate {mu} must be positive"
        )));
    }
    let s = mu * gain;
    Ok((s / zeta0).ln_1p() * y as f64 - s)
}

pub fn ns_decide(y: u64, tau1: u64) -> bool {
    y > tau1
}

/// Smallest `tau` with `H(tau, zeta) <= omega`.
pub fn select_tau(omega: f64, zeta: f64) -> u64 {
    let mut tau = 0;
    while poisson_tail(tau, zeta) > omega {
        tau += 1;
    }
    tau
}

pub fn select_tau1(omega1: f64, zeta0: f64) -> u64 {
    select_tau(omega1, zeta0)
}

pub fn select_tau2(omega2: f64, zeta_k: f64) -> u64 {
    select_tau(omega2, zeta_k)
}

pub fn gad_llr(d: &[bool], tp: &TransitionProbs) -> Result<f64> {
    if d.len() != tp.len() {
        return Err(DetectionError::LengthMismatch {
            expected: tp.len(),
            got: d.len(),
        });
    }
    tp.check()?;
    Ok(d.iter()
        .enumerate()
        .map(|(k, &bit)| {
            let (one, zero) = tp.log_ratios(k);
            if bit {
                one
            } else {
                zero
            }
        })
        .sum())
}
