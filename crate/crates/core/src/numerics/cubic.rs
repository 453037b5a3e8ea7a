use super::{ComplexValue, NumericsError};

/// Relative separation below which two roots are reported as coincident.
/// Callers divide by root differences, so near-coincident roots must be
/// surfaced instead of silently amplifying rounding error.
pub const DEGENERATE_SEPARATION: f64 = 1e-8;

/// The three roots `(alpha, beta, gamma)` of the monic cubic whose
/// elementary symmetric functions are `(s1, s2, s3)`.
///
/// Ordering: the real root that was found first is `alpha`; when the other
/// two form a conjugate pair, `beta` carries the non-negative imaginary part.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CubicRoots {
    pub alpha: ComplexValue,
    pub beta: ComplexValue,
    pub gamma: ComplexValue,
}

impl CubicRoots {
    pub fn as_array(&self) -> [ComplexValue; 3] {
        [self.alpha, self.beta, self.gamma]
    }

    /// `(alpha + beta + gamma, alpha beta + beta gamma + gamma alpha, alpha beta gamma)`.
    pub fn symmetric_functions(&self) -> (ComplexValue, ComplexValue, ComplexValue) {
        let (a, b, c) = (self.alpha, self.beta, self.gamma);
        (a + b + c, a * b + b * c + c * a, a * b * c)
    }

    pub fn min_separation(&self) -> f64 {
        let (a, b, c) = (self.alpha, self.beta, self.gamma);
        (a - b).norm().min((b - c).norm()).min((c - a).norm())
    }

    pub fn max_magnitude(&self) -> f64 {
        self.alpha
            .norm()
            .max(self.beta.norm())
            .max(self.gamma.norm())
    }

    pub fn is_degenerate(&self) -> bool {
        self.min_separation() < DEGENERATE_SEPARATION * self.max_magnitude()
            || self.max_magnitude() == 0.0
    }

    /// Same roots, relabelled by the permutation `perm` of `0..3`.
    pub fn permuted(&self, perm: [usize; 3]) -> CubicRoots {
        let r = self.as_array();
        CubicRoots {
            alpha: r[perm[0]],
            beta: r[perm[1]],
            gamma: r[perm[2]],
        }
    }
}

fn eval(s1: f64, s2: f64, s3: f64, t: ComplexValue) -> (ComplexValue, ComplexValue) {
    // p(t) = t^3 - s1 t^2 + s2 t - s3, p'(t) = 3t^2 - 2 s1 t + s2
    let p = ((t - s1) * t + s2) * t - s3;
    let dp = (t * 3.0 - 2.0 * s1) * t + s2;
    (p, dp)
}

fn polish(s1: f64, s2: f64, s3: f64, mut t: ComplexValue) -> ComplexValue {
    let (mut p, _) = eval(s1, s2, s3, t);
    for _ in 0..4 {
        let (_, dp) = eval(s1, s2, s3, t);
        if dp.norm() == 0.0 || p.norm() == 0.0 {
            break;
        }
        let next = t - p / dp;
        let (pn, _) = eval(s1, s2, s3, next);
        if pn.norm() < p.norm() {
            t = next;
            p = pn;
        } else {
            break;
        }
    }
    t
}

/// One real root of `x^3 + p x + q = 0` via Cardano (one real root) or the
/// trigonometric form (three real roots). Returns the root of largest magnitude.
fn depressed_real_root(p: f64, q: f64) -> f64 {
    let half_q = 0.5 * q;
    let third_p = p / 3.0;
    let disc = half_q * half_q + third_p * third_p * third_p;
    if disc > 0.0 {
        // A = -sign(q) cbrt(|q|/2 + sqrt(disc)), B = -p / (3A)
        let a = -half_q.signum() * (half_q.abs() + disc.sqrt()).cbrt();
        let a = if half_q == 0.0 { disc.sqrt().cbrt() } else { a };
        if a == 0.0 {
            0.0
        } else {
            a - third_p / a
        }
    } else if third_p == 0.0 {
        0.0
    } else {
        let r = (-third_p).sqrt();
        let cos_arg = (-half_q / (r * r * r)).clamp(-1.0, 1.0);
        let theta = cos_arg.acos() / 3.0;
        // k = 0 branch has the largest magnitude when q <= 0; pick explicitly.
        let candidates = [
            2.0 * r * theta.cos(),
            2.0 * r * (theta - 2.0 * std::f64::consts::FRAC_PI_3).cos(),
            2.0 * r * (theta + 2.0 * std::f64::consts::FRAC_PI_3).cos(),
        ];
        candidates.into_iter().fold(
            0.0,
            |best: f64, c| if c.abs() > best.abs() { c } else { best },
        )
    }
}

/// Roots of `t^3 - s1 t^2 + s2 t - s3 = 0`, i.e. the triple whose sum,
/// pairwise-product sum and product equal `s1`, `s2`, `s3`.
///
/// A real root is found in closed form and polished, the remaining quadratic
/// is solved by deflation, and every root receives Newton polishing in
/// complex arithmetic. Coincident roots are reported as
/// [`NumericsError::DegenerateRoots`].
pub fn solve_cubic_from_symmetric(s1: f64, s2: f64, s3: f64) -> Result<CubicRoots, NumericsError> {
    if !(s1.is_finite() && s2.is_finite() && s3.is_finite()) {
        return Err(NumericsError::NonFiniteInput(s1, s2, s3));
    }
    // t = x + s1/3 turns the cubic into x^3 + p x + q.
    let shift = s1 / 3.0;
    let p = s2 - s1 * s1 / 3.0;
    let q = -2.0 * s1 * s1 * s1 / 27.0 + s1 * s2 / 3.0 - s3;
    let x = depressed_real_root(p, q);
    let r = polish(s1, s2, s3, ComplexValue::new(x + shift, 0.0)).re;

    // (t - r)(t^2 + e t + f)
    let e = r - s1;
    let f = if r.abs() > 0.0 && (s3 / r).is_finite() && r.abs() >= 1e-3 * s1.abs() {
        s3 / r
    } else {
        s2 + e * r
    };
    let disc = e * e - 4.0 * f;
    let (u, v) = if disc >= 0.0 {
        let sq = disc.sqrt();
        let big = -0.5 * (e + e.signum() * sq);
        let big = if e == 0.0 { 0.5 * sq } else { big };
        let small = if big != 0.0 { f / big } else { -big };
        (ComplexValue::new(big, 0.0), ComplexValue::new(small, 0.0))
    } else {
        let re = -0.5 * e;
        let im = 0.5 * (-disc).sqrt();
        (ComplexValue::new(re, im), ComplexValue::new(re, -im))
    };

    let mut beta = polish(s1, s2, s3, u);
    let mut gamma = polish(s1, s2, s3, v);
    if disc < 0.0 {
        // keep the pair exactly conjugate
        let m = 0.5 * (beta + gamma.conj());
        beta = m;
        gamma = m.conj();
        if beta.im < 0.0 {
            std::mem::swap(&mut beta, &mut gamma);
        }
    }
    let roots = CubicRoots {
        alpha: ComplexValue::new(r, 0.0),
        beta,
        gamma,
    };
    if roots.is_degenerate() {
        return Err(NumericsError::DegenerateRoots {
            roots: roots.as_array(),
            min_separation: roots.min_separation(),
        });
    }
    Ok(roots)
}
