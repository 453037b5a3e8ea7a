//! Scaled complementary error function `erfcx(z) = exp(z^2) erfc(z)` for
//! complex `z`, and the overflow-safe `W(n, m)` built on it.
//!
//! The right half-plane is split into three regions:
//!
//! * `|z| < 1`: Maclaurin series of `erf`, then `exp(z^2) (1 - erf z)`.
//! * `1 <= |z| <= 8`: Weideman's rational expansion of the Faddeeva function,
//!   `erfcx(z) = w(iz)`, with 40 terms.
//! * `|z| > 8`: Laplace continued fraction, 40 levels.
//!
//! The left half-plane uses `erfcx(z) = 2 exp(z^2) - erfcx(-z)`.

use super::{ComplexValue, NumericsError};
use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::sync::OnceLock;

const SERIES_RADIUS: f64 = 1.0;
const FRACTION_RADIUS: f64 = 8.0;
const FRACTION_DEPTH: usize = 40;
const WEIDEMAN_TERMS: usize = 40;
const MAX_ARGUMENT: f64 = 1e6;
const FRAC_2_SQRT_PI: f64 = std::f64::consts::FRAC_2_SQRT_PI;

struct Weideman {
    scale: f64,
    coeffs: Vec<f64>,
}

fn weideman() -> &'static Weideman {
    static TABLE: OnceLock<Weideman> = OnceLock::new();
    TABLE.get_or_init(|| {
        let n = WEIDEMAN_TERMS;
        let m = 2 * n;
        let scale = (n as f64 * FRAC_1_SQRT_2).sqrt();
        let samples: Vec<(f64, f64)> = (-(m as i64) + 1..m as i64)
            .map(|k| {
                let theta = k as f64 * PI / m as f64;
                let t = scale * (0.5 * theta).tan();
                (theta, (-t * t).exp() * (scale * scale + t * t))
            })
            .collect();
        let coeffs = (1..=n)
            .map(|j| {
                samples
                    .iter()
                    .map(|&(theta, f)| f * (j as f64 * theta).cos())
                    .sum::<f64>()
                    / (2 * m) as f64
            })
            .collect();
        Weideman { scale, coeffs }
    })
}

/// Faddeeva `w(u)` for `Im u >= 0`.
fn faddeeva_upper(u: ComplexValue) -> ComplexValue {
    let tab = weideman();
    let i = ComplexValue::i();
    let denom = tab.scale - i * u;
    let zz = (tab.scale + i * u) / denom;
    let poly = tab
        .coeffs
        .iter()
        .rev()
        .fold(ComplexValue::new(0.0, 0.0), |acc, &c| acc * zz + c);
    poly * 2.0 / (denom * denom) + (1.0 / PI.sqrt()) / denom
}

fn series(z: ComplexValue) -> ComplexValue {
    let z2 = z * z;
    let mut term = z;
    let mut sum = z;
    for n in 1..200 {
        term = -term * z2 / n as f64;
        let c = term / (2 * n + 1) as f64;
        sum += c;
        if c.norm() <= 1e-17 * sum.norm() {
            break;
        }
    }
    z2.exp() * (ComplexValue::new(1.0, 0.0) - sum * FRAC_2_SQRT_PI)
}

fn continued_fraction(z: ComplexValue) -> ComplexValue {
    let mut f = z;
    for k in (1..=FRACTION_DEPTH).rev() {
        f = z + (0.5 * k as f64) / f;
    }
    1.0 / (PI.sqrt() * f)
}

fn right_half_plane(z: ComplexValue) -> ComplexValue {
    let r = z.norm();
    if r < SERIES_RADIUS {
        series(z)
    } else if r > FRACTION_RADIUS {
        continued_fraction(z)
    } else {
        faddeeva_upper(ComplexValue::i() * z)
    }
}

/// `exp(z^2) erfc(z)`.
pub fn erfcx_complex(z: ComplexValue) -> Result<ComplexValue, NumericsError> {
    if !(z.re.is_finite() && z.im.is_finite()) || z.norm() > MAX_ARGUMENT {
        return Err(NumericsError::ArgumentOutOfRange(z));
    }
    let value = if z.re >= 0.0 {
        right_half_plane(z)
    } else {
        (z * z).exp() * 2.0 - right_half_plane(-z)
    };
    if value.re.is_finite() && value.im.is_finite() {
        Ok(value)
    } else {
        Err(NumericsError::Overflow(z))
    }
}

/// `W(n, m) = exp(2nm + m^2) erfc(n + m)`, evaluated as `exp(-n^2) erfcx(n + m)`
/// so that large `n` or `m` never overflow an intermediate.
pub fn w_stable(n: f64, m: ComplexValue) -> Result<ComplexValue, NumericsError> {
    w_stable_scaled(n, m, 0.0)
}

/// `exp(-shift) W(n, m)`. Folding a decaying factor into the exponent keeps
/// the product finite when `W` alone would overflow.
pub fn w_stable_scaled(n: f64, m: ComplexValue, shift: f64) -> Result<ComplexValue, NumericsError> {
    let s = ComplexValue::new(n, 0.0) + m;
    let damp = (-n * n - shift).exp();
    if s.re >= 0.0 {
        if damp == 0.0 {
            return Ok(ComplexValue::new(0.0, 0.0));
        }
        return Ok(erfcx_complex(s)? * damp);
    }
    // erfc(s) = 2 - erfc(-s)
    let lead = (m * (2.0 * n) + m * m - shift).exp() * 2.0;
    let rest = if damp == 0.0 {
        ComplexValue::new(0.0, 0.0)
    } else {
        erfcx_complex(-s)? * damp
    };
    let value = lead - rest;
    if value.re.is_finite() && value.im.is_finite() {
        Ok(value)
    } else {
        Err(NumericsError::Overflow(s))
    }
}
