use super::{DetectionError, Result};
use rayon::prelude::*;
use statrs::distribution::{ContinuousCDF, Normal};

/// Randomized threshold chosen from an H0 sample.
///
/// Decide 1 when the statistic exceeds `tau3`, and with probability `gamma`
/// when it equals `tau3`.
#[derive(Debug, Clone, PartialEq)]
pub struct Calibration {
    pub omega: f64,
    pub tau3: f64,
    pub gamma: f64,
    pub n: usize,
    /// Samples strictly above `tau3`.
    pub exceed: usize,
    /// Samples equal to `tau3`.
    pub ties: usize,
    /// `exceed / n`
    pub achieved_pfa: f64,
    /// `(exceed + gamma ties) / n`
    pub randomized_pfa: f64,
    /// 95 % Wilson interval for the randomized false alarm rate.
    pub ci: (f64, f64),
    pub warning: Option<String>,
}

impl Calibration {
    /// Probability of deciding 1 given a statistic value.
    pub fn decide(&self, stat: f64) -> f64 {
        if stat > self.tau3 {
            1.0
        } else if stat == self.tau3 {
            self.gamma
        } else {
            0.0
        }
    }

    /// Detection rate over a sample, with ties resolved by `gamma`.
    pub fn rate(&self, sample: &[f64]) -> ErrorRate {
        let hits: f64 = sample.iter().map(|&s| self.decide(s)).sum();
        ErrorRate::new(hits, sample.len())
    }
}

/// A Monte Carlo proportion with its 95 % Wilson interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorRate {
    pub value: f64,
    pub n: usize,
    pub ci: (f64, f64),
}

impl ErrorRate {
    pub fn new(successes: f64, n: usize) -> Self {
        ErrorRate {
            value: successes / n as f64,
            n,
            ci: wilson_interval(successes, n, 0.95),
        }
    }

    /// The complementary proportion.
    pub fn complement(&self) -> Self {
        ErrorRate {
            value: 1.0 - self.value,
            n: self.n,
            ci: (1.0 - self.ci.1, 1.0 - self.ci.0),
        }
    }
}

/// Wilson score interval at confidence `level`.
pub fn wilson_interval(successes: f64, n: usize, level: f64) -> (f64, f64) {
    if n == 0 {
        return (0.0, 1.0);
    }
    let z = Normal::standard().inverse_cdf(0.5 + level / 2.0);
    let n = n as f64;
    let p = successes / n;
    let z2 = z * z;
    let centre = (p + z2 / (2.0 * n)) / (1.0 + z2 / n);
    let half = z / (1.0 + z2 / n) * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
    ((centre - half).max(0.0), (centre + half).min(1.0))
}

/// Smallest sample value `tau3` with at most `floor(n omega)` samples above
/// it, plus the tie probability that brings the false alarm rate to `omega`.
pub fn calibrate_from_samples(mut samples: Vec<f64>, omega: f64) -> Result<Calibration> {
    if !(omega > 0.0 && omega < 1.0) {
        return Err(DetectionError::InvalidInput(format!(
            "false alarm bound {omega} outside (0, 1)"
        )));
    }
    if samples.is_empty() || samples.iter().any(|s| s.is_nan()) {
        return Err(DetectionError::InvalidInput(
            "calibration needs a non-empty, NaN-free sample".into(),
        ));
    }
    samples.sort_by(f64::total_cmp);
    let n = samples.len();
    let target = n as f64 * omega;
    let allowed = (target.floor() as usize).min(n - 1);
    let tau3 = samples[n - 1 - allowed];
    let exceed = samples.iter().rev().take_while(|&&s| s > tau3).count();
    let ties = samples.iter().filter(|&&s| s == tau3).count();
    let gamma = ((target - exceed as f64) / ties as f64).clamp(0.0, 1.0);
    let randomized = exceed as f64 + gamma * ties as f64;
    let warning = (target < 20.0).then(|| {
        format!("only {target:.1} expected exceedances in {n} calibration trials; the threshold is poorly resolved")
    });
    Ok(Calibration {
        omega,
        tau3,
        gamma,
        n,
        exceed,
        ties,
        achieved_pfa: exceed as f64 / n as f64,
        randomized_pfa: randomized / n as f64,
        ci: wilson_interval(randomized, n, 0.95),
        warning,
    })
}

/// Calibrates on `n_cal` draws `sampler(0..n_cal)` evaluated in parallel.
pub fn calibrate_threshold<F>(sampler: F, omega: f64, n_cal: usize) -> Result<Calibration>
where
    F: Fn(u64) -> f64 + Sync,
{
    let samples: Vec<f64> = (0..n_cal as u64).into_par_iter().map(&sampler).collect();
    calibrate_from_samples(samples, omega)
}

/// Exact probability that `stat(d) > tau` (plus `gamma` times the
/// probability of equality) when `d_k ~ Bernoulli(p_one[k])`, by
/// enumeration of all `2^K` vectors. `p_zero[k]` is `1 - p_one[k]`.
pub fn exact_exceedance<F>(stat: F, p_one: &[f64], p_zero: &[f64], tau: f64, gamma: f64) -> f64
where
    F: Fn(&[bool]) -> f64,
{
    let k = p_one.len();
    assert!(k <= 20, "enumeration over 2^{k} vectors");
    let mut total = 0.0;
    for index in 0..1u64 << k {
        let d = super::DecisionVector::enumerate(k, index);
        let s = stat(&d);
        let w = if s > tau {
            1.0
        } else if s == tau {
            gamma
        } else {
            continue;
        };
        let p: f64 = d
            .iter()
            .enumerate()
            .map(|(j, &b)| if b { p_one[j] } else { p_zero[j] })
            .product();
        total += w * p;
    }
    total
}
