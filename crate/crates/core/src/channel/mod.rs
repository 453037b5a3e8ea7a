//! Reactive-receiver channel: probability that a molecule released at
//! distance `d` occupies a receptor at time `t`, the mean count under
//! constant secretion, and its steady-state limit.
//!
//! The same formulas serve the target-to-sensor link and the
//! sensor-to-fusion-center link; only the parameter record changes.

mod layout;

pub use layout::{distance, LayoutError, LayoutLimits, NetworkLayout, Vec3};

use crate::numerics::{
    integrate_adaptive, solve_cubic_from_symmetric, transient_breakpoints, w_stable_scaled,
    ComplexValue, CubicRoots, NumericsError, MAX_INTERVALS,
};
use std::cell::Cell;
use std::f64::consts::PI;
use thiserror::Error;

/// Largest imaginary part tolerated on a quantity that is real by construction.
pub const IMAGINARY_TOLERANCE: f64 = 1e-9;

/// Relative accuracy of [`transient_mean`].
pub const TRANSIENT_REL_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ChannelError {
    #[error("invalid channel parameters: {}", .0.join("; "))]
    InvalidParams(Vec<String>),
    #[error(transparent)]
    Numerics(#[from] NumericsError),
    #[error("time must be positive and finite, got {0}")]
    NonPositiveTime(f64),
    #[error("distance {dist} um is not outside the receiver (radius {radius} um)")]
    InsideReceiver { dist: f64, radius: f64 },
    #[error("steady state needs k_d > 0")]
    NoDegradation,
    #[error("imaginary residue {residue:.3e} on a real quantity (real part {value:.6e})")]
    ImaginaryResidue { value: f64, residue: f64 },
    #[error("{0} is not a probability")]
    NotAProbability(f64),
}

/// Diffusion, reaction and geometry constants of one link class.
///
/// Units: um, s, molecules. `k_f` is in um^3 s^-1 molecule^-1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReactionChannelParams {
    pub diffusion: f64,
    pub k_f: f64,
    pub k_b: f64,
    pub k_d: f64,
    pub receiver_radius: f64,
    pub receptors: u32,
    pub receptor_radius: f64,
}

impl ReactionChannelParams {
    /// Target-to-sensor link defaults.
    pub fn table1_ns() -> Self {
        ReactionChannelParams {
            diffusion: 5e3,
            k_f: 1.2e4,
            k_b: 1.5e4,
            k_d: 1e4,
            receiver_radius: 0.5,
            receptors: 5120,
            receptor_radius: 7e-3,
        }
    }

    /// Sensor-to-fusion-center link defaults.
    pub fn table1_fc() -> Self {
        ReactionChannelParams {
            diffusion: 5e3,
            k_f: 3.7e4,
            k_b: 5e-6,
            k_d: 5e-7,
            receiver_radius: 1.0,
            receptors: 5120,
            receptor_radius: 1.4e-2,
        }
    }

    /// Fraction of the receiver surface covered by receptor disks.
    pub fn coverage(&self) -> f64 {
        self.receptors as f64 * self.receptor_radius * self.receptor_radius
            / (4.0 * self.receiver_radius * self.receiver_radius)
    }

    /// Every violated invariant, not just the first.
    pub fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        let finite_nonneg = [
            ("k_f", self.k_f),
            ("k_b", self.k_b),
            ("k_d", self.k_d),
            ("receptor_radius", self.receptor_radius),
        ];
        for (name, v) in finite_nonneg {
            if !(v.is_finite() && v >= 0.0) {
                out.push(format!("{name} must be finite and >= 0 (got {v})"));
            }
        }
        if !(self.diffusion.is_finite() && self.diffusion > 0.0) {
            out.push(format!("D must be finite and > 0 (got {})", self.diffusion));
        }
        if !(self.receiver_radius.is_finite() && self.receiver_radius > 0.0) {
            out.push(format!(
                "receiver_radius must be finite and > 0 (got {})",
                self.receiver_radius
            ));
        }
        if out.is_empty() {
            let lambda = self.coverage();
            if !(lambda < 1.0) {
                out.push(format!(
                    "receptor coverage M r^2 / (4 a^2) = {lambda} must be below 1"
                ));
            }
        }
        out
    }

    pub fn validate(&self) -> Result<(), ChannelError> {
        let v = self.violations();
        if v.is_empty() {
            Ok(())
        } else {
            Err(ChannelError::InvalidParams(v))
        }
    }
}

/// Quantities that depend only on the parameter record.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivedChannelConstants {
    pub lambda_coverage: f64,
    pub phi: f64,
    pub kf_star: f64,
    pub roots: CubicRoots,
}

/// `(s1, s2, s3)` of the receiver cubic for an effective forward rate `kf_star`.
pub fn symmetric_functions(p: &ReactionChannelParams, kf_star: f64) -> (f64, f64, f64) {
    let (d, a) = (p.diffusion, p.receiver_radius);
    let s1 = (1.0 + kf_star / (4.0 * PI * a * d)) * d.sqrt() / a;
    let s2 = p.k_b - p.k_d;
    let s3 = p.k_b * d.sqrt() / a - p.k_d * s1;
    (s1, s2, s3)
}

/// `(lambda, phi, k*_f)`: coverage, fraction of the sphere's absorbing
/// power the receptors achieve, and the homogenized forward rate.
pub fn effective_forward_rate(p: &ReactionChannelParams) -> Result<(f64, f64, f64), ChannelError> {
    p.validate()?;
    let (d, a, kf) = (p.diffusion, p.receiver_radius, p.k_f);
    let m = p.receptors as f64;
    let r = p.receptor_radius;
    let lambda = p.coverage();
    let covered = m * r * r * (kf * a + 4.0 * PI * d);
    let phi = if covered == 0.0 {
        0.0
    } else {
        covered / (a * a * (1.0 - lambda) * (PI * r * kf + 16.0 * PI * d) + covered)
    };
    let kf_star = 4.0 * PI * d * kf * phi / (kf * a * (1.0 - phi) + 4.0 * PI * d);
    Ok((lambda, phi, kf_star))
}

pub fn derive_constants(
    p: &ReactionChannelParams,
) -> Result<DerivedChannelConstants, ChannelError> {
    let (lambda, phi, kf_star) = effective_forward_rate(p)?;
    let (s1, s2, s3) = symmetric_functions(p, kf_star);
    let roots = solve_cubic_from_symmetric(s1, s2, s3)?;
    Ok(DerivedChannelConstants {
        lambda_coverage: lambda,
        phi,
        kf_star,
        roots,
    })
}

/// Partial-fraction weights of the three root terms.
fn root_weights(r: &CubicRoots) -> [ComplexValue; 3] {
    let (al, be, ga) = (r.alpha, r.beta, r.gamma);
    [
        al / ((ga - al) * (al - be)),
        be / ((be - ga) * (al - be)),
        ga / ((be - ga) * (ga - al)),
    ]
}

fn check_distance(dist: f64, p: &ReactionChannelParams) -> Result<(), ChannelError> {
    if dist > p.receiver_radius && dist.is_finite() {
        Ok(())
    } else {
        Err(ChannelError::InsideReceiver {
            dist,
            radius: p.receiver_radius,
        })
    }
}

fn real_part(z: ComplexValue) -> Result<f64, ChannelError> {
    if z.im.abs() > IMAGINARY_TOLERANCE {
        return Err(ChannelError::ImaginaryResidue {
            value: z.re,
            residue: z.im,
        });
    }
    Ok(z.re)
}

fn probability(x: f64) -> Result<f64, ChannelError> {
    if (-IMAGINARY_TOLERANCE..=1.0 + IMAGINARY_TOLERANCE).contains(&x) {
        Ok(x.clamp(0.0, 1.0))
    } else {
        Err(ChannelError::NotAProbability(x))
    }
}

/// Probability that a molecule released at distance `dist` at time 0 is
/// bound to a receptor at time `t`.
pub fn activation_probability(
    t: f64,
    dist: f64,
    p: &ReactionChannelParams,
    c: &DerivedChannelConstants,
) -> Result<f64, ChannelError> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(ChannelError::NonPositiveTime(t));
    }
    check_distance(dist, p)?;
    if c.kf_star == 0.0 {
        return Ok(0.0);
    }
    let (d, a) = (p.diffusion, p.receiver_radius);
    let sqrt_t = t.sqrt();
    let n = (dist - a) / (4.0 * d * t).sqrt();
    let shift = p.k_d * t;
    let mut sum = ComplexValue::new(0.0, 0.0);
    for (w, root) in root_weights(&c.roots).into_iter().zip(c.roots.as_array()) {
        sum += w * w_stable_scaled(n, root * sqrt_t, shift)?;
    }
    let value = sum * (c.kf_star / (4.0 * PI * d.sqrt() * a * dist));
    probability(real_part(value)?)
}

/// Same as [`activation_probability`] with sensor-to-fusion-center parameters;
/// `elapsed` is the time between release and counting.
pub fn fc_activation_probability(
    elapsed: f64,
    dist: f64,
    fc_params: &ReactionChannelParams,
    fc_constants: &DerivedChannelConstants,
) -> Result<f64, ChannelError> {
    activation_probability(elapsed, dist, fc_params, fc_constants)
}

/// `int_0^t P(s) ds` with its error estimate.
pub fn activation_integral(
    t: f64,
    dist: f64,
    p: &ReactionChannelParams,
    c: &DerivedChannelConstants,
) -> Result<(f64, f64), ChannelError> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(ChannelError::NonPositiveTime(t));
    }
    check_distance(dist, p)?;
    let failure: Cell<Option<ChannelError>> = Cell::new(None);
    let f = |s: f64| {
        if s <= 0.0 {
            return 0.0;
        }
        match activation_probability(s, dist, p, c) {
            Ok(v) => v,
            Err(e) => {
                failure.set(Some(e));
                f64::NAN
            }
        }
    };
    let est = integrate_adaptive(
        f,
        &transient_breakpoints(t, 12),
        0.0,
        TRANSIENT_REL_TOL,
        MAX_INTERVALS,
    );
    if let Some(e) = failure.take() {
        return Err(e);
    }
    let est = est?;
    Ok((est.value, est.error))
}

/// Mean bound count at time `t` under constant secretion at rate `mu`
/// starting at time 0.
pub fn transient_mean(
    t: f64,
    mu: f64,
    dist: f64,
    p: &ReactionChannelParams,
    c: &DerivedChannelConstants,
) -> Result<f64, ChannelError> {
    if mu == 0.0 {
        return Ok(0.0);
    }
    Ok(mu * activation_integral(t, dist, p, c)?.0)
}

/// Distance-independent part of the steady-state gain:
/// `g(d) = gain_scale * exp(-(d - a) sqrt(k_d / D)) / d`.
pub fn gain_scale(
    p: &ReactionChannelParams,
    c: &DerivedChannelConstants,
) -> Result<f64, ChannelError> {
    if !(p.k_d > 0.0) {
        return Err(ChannelError::NoDegradation);
    }
    if c.kf_star == 0.0 {
        return Ok(0.0);
    }
    let sk = p.k_d.sqrt();
    let mut sum = ComplexValue::new(0.0, 0.0);
    for (w, root) in root_weights(&c.roots).into_iter().zip(c.roots.as_array()) {
        sum += w / (root * sk + p.k_d);
    }
    let value = sum * (c.kf_star / (4.0 * PI * p.diffusion.sqrt() * p.receiver_radius));
    real_part(value)
}

/// Steady-state mean bound count per unit secretion rate, in seconds.
pub fn steady_state_mean_g(
    dist: f64,
    p: &ReactionChannelParams,
    c: &DerivedChannelConstants,
) -> Result<f64, ChannelError> {
    check_distance(dist, p)?;
    let scale = gain_scale(p, c)?;
    Ok(scale * (-(dist - p.receiver_radius) * (p.k_d / p.diffusion).sqrt()).exp() / dist)
}

/// A parameter record with its derived constants and cached gain scale.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Link {
    pub params: ReactionChannelParams,
    pub constants: DerivedChannelConstants,
    gain_scale: Option<f64>,
}

impl Link {
    pub fn new(params: ReactionChannelParams) -> Result<Self, ChannelError> {
        let constants = derive_constants(&params)?;
        let gain_scale = if params.k_d > 0.0 {
            Some(gain_scale(&params, &constants)?)
        } else {
            None
        };
        Ok(Link {
            params,
            constants,
            gain_scale,
        })
    }

    pub fn activation(&self, t: f64, dist: f64) -> Result<f64, ChannelError> {
        activation_probability(t, dist, &self.params, &self.constants)
    }

    pub fn transient_mean(&self, t: f64, mu: f64, dist: f64) -> Result<f64, ChannelError> {
        transient_mean(t, mu, dist, &self.params, &self.constants)
    }

    pub fn gain(&self, dist: f64) -> Result<f64, ChannelError> {
        check_distance(dist, &self.params)?;
        let scale = self.gain_scale.ok_or(ChannelError::NoDegradation)?;
        let p = &self.params;
        Ok(scale * (-(dist - p.receiver_radius) * (p.k_d / p.diffusion).sqrt()).exp() / dist)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ns() -> (ReactionChannelParams, DerivedChannelConstants) {
        let p = ReactionChannelParams::table1_ns();
        (p, derive_constants(&p).unwrap())
    }

    #[test]
    fn no_receptors_means_no_signal() {
        let p = ReactionChannelParams {
            receptors: 0,
            ..ReactionChannelParams::table1_ns()
        };
        let c = derive_constants(&p).unwrap();
        assert_eq!((c.lambda_coverage, c.phi, c.kf_star), (0.0, 0.0, 0.0));
        assert_eq!(activation_probability(1e-4, 1.0, &p, &c).unwrap(), 0.0);
        assert_eq!(steady_state_mean_g(1.0, &p, &c).unwrap(), 0.0);
    }

    #[test]
    fn zero_forward_rate_means_no_signal() {
        let p = ReactionChannelParams {
            k_f: 0.0,
            ..ReactionChannelParams::table1_ns()
        };
        let c = derive_constants(&p).unwrap();
        for t in [1e-6, 1e-4, 1e-2] {
            assert_eq!(activation_probability(t, 1.0, &p, &c).unwrap(), 0.0);
        }
        assert_eq!(steady_state_mean_g(1.0, &p, &c).unwrap(), 0.0);
        let fc = ReactionChannelParams {
            k_f: 0.0,
            ..ReactionChannelParams::table1_fc()
        };
        let cf = derive_constants(&fc).unwrap();
        assert_eq!(
            fc_activation_probability(5e-3, 20.0, &fc, &cf).unwrap(),
            0.0
        );
    }

    #[test]
    fn full_coverage_is_rejected() {
        let p = ReactionChannelParams {
            receptor_radius: 0.5 * 2.0 / (5120f64).sqrt(),
            ..ReactionChannelParams::table1_ns()
        };
        match derive_constants(&p) {
            Err(ChannelError::InvalidParams(v)) => assert!(v[0].contains("coverage")),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn all_violations_are_listed() {
        let p = ReactionChannelParams {
            diffusion: 0.0,
            k_f: -1.0,
            receiver_radius: f64::NAN,
            ..ReactionChannelParams::table1_ns()
        };
        assert_eq!(p.violations().len(), 3);
    }

    #[test]
    fn early_time_is_zero() {
        let (p, c) = ns();
        assert_eq!(activation_probability(1e-12, 1.0, &p, &c).unwrap(), 0.0);
        let fc = ReactionChannelParams::table1_fc();
        let cf = derive_constants(&fc).unwrap();
        assert!(fc_activation_probability(1e-9, 20.0, &fc, &cf).unwrap() < 1e-300);
    }

    #[test]
    fn argument_checks() {
        let (p, c) = ns();
        assert!(matches!(
            activation_probability(0.0, 1.0, &p, &c),
            Err(ChannelError::NonPositiveTime(_))
        ));
        assert!(matches!(
            activation_probability(1e-4, 0.5, &p, &c),
            Err(ChannelError::InsideReceiver { .. })
        ));
        let q = ReactionChannelParams { k_d: 0.0, ..p };
        let cq = derive_constants(&q).unwrap();
        assert!(matches!(
            steady_state_mean_g(1.0, &q, &cq),
            Err(ChannelError::NoDegradation)
        ));
    }

    #[test]
    fn transient_mean_is_linear_and_vanishes_without_secretion() {
        let (p, c) = ns();
        assert_eq!(transient_mean(1e-4, 0.0, 1.0, &p, &c).unwrap(), 0.0);
        let one = transient_mean(1e-4, 1e3, 1.0, &p, &c).unwrap();
        let two = transient_mean(1e-4, 2e3, 1.0, &p, &c).unwrap();
        assert!((two / one - 2.0).abs() < 1e-12);
    }

    #[test]
    fn transient_mean_is_non_decreasing() {
        let (p, c) = ns();
        let mut last = 0.0;
        for t in [1e-6, 1e-5, 3e-5, 1e-4, 3e-4, 1e-3, 1e-2] {
            let m = transient_mean(t, 1.0, 1.0, &p, &c).unwrap();
            assert!(m >= last);
            last = m;
        }
    }

    #[test]
    fn gain_decreases_with_distance() {
        let (p, c) = ns();
        let mut last = f64::INFINITY;
        for i in 1..=500 {
            let d = 0.5 + 0.1 * i as f64;
            let g = steady_state_mean_g(d, &p, &c).unwrap();
            assert!(g < last || (g == 0.0 && last == 0.0), "d = {d}");
            last = g;
        }
        assert!(steady_state_mean_g(1e4, &p, &c).unwrap() == 0.0);
    }

    #[test]
    fn link_matches_free_functions() {
        let (p, c) = ns();
        let link = Link::new(p).unwrap();
        for d in [0.7, 1.0, 3.0, 12.0] {
            let a = link.gain(d).unwrap();
            let b = steady_state_mean_g(d, &p, &c).unwrap();
            assert!((a - b).abs() <= 1e-15 * b);
        }
    }

    #[test]
    fn root_order_does_not_matter() {
        let (p, c) = ns();
        let perms = [[0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
        let base_p = activation_probability(1e-4, 1.0, &p, &c).unwrap();
        let base_g = steady_state_mean_g(1.0, &p, &c).unwrap();
        for perm in perms {
            let q = DerivedChannelConstants {
                roots: c.roots.permuted(perm),
                ..c
            };
            let pp = activation_probability(1e-4, 1.0, &p, &q).unwrap();
            let gg = steady_state_mean_g(1.0, &p, &q).unwrap();
            assert!((pp / base_p - 1.0).abs() < 1e-10);
            assert!((gg / base_g - 1.0).abs() < 1e-10);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(200))]
        #[test]
        fn activation_is_a_probability(
            log_d in 2.0..4.0f64,
            log_kf in 2.0..6.0f64,
            log_kb in -6.0..6.0f64,
            log_kd in -7.0..5.0f64,
            a in 0.2..2.0f64,
            m in 100u32..8000,
            cover in 0.01..0.9f64,
            log_t in -7.0..0.0f64,
            gap in 0.01..20.0f64,
        ) {
            let p = ReactionChannelParams {
                diffusion: 10f64.powf(log_d),
                k_f: 10f64.powf(log_kf),
                k_b: 10f64.powf(log_kb),
                k_d: 10f64.powf(log_kd),
                receiver_radius: a,
                receptors: m,
                receptor_radius: (cover * 4.0 * a * a / m as f64).sqrt(),
            };
            let c = match derive_constants(&p) {
                Ok(c) => c,
                Err(ChannelError::Numerics(NumericsError::DegenerateRoots { .. })) => return Ok(()),
                Err(e) => panic!("{e}"),
            };
            let v = activation_probability(10f64.powf(log_t), a + gap, &p, &c).unwrap();
            prop_assert!((0.0..=1.0).contains(&v));
        }
    }
}
