use statrs::function::factorial::ln_factorial;
use statrs::function::gamma::{gamma_lr, gamma_ur};

/// Above this mean the tail is taken from the regularized incomplete gamma
/// function instead of summing the pmf.
const SUMMATION_LIMIT: f64 = 500.0;

#[derive(Default)]
struct Kahan {
    sum: f64,
    c: f64,
}

impl Kahan {
    fn add(&mut self, x: f64) {
        let y = x - self.c;
        let t = self.sum + y;
        self.c = (t - self.sum) - y;
        self.sum = t;
    }
}

pub fn ln_poisson_pmf(k: u64, mean: f64) -> f64 {
    if mean == 0.0 {
        return if k == 0 { 0.0 } else { f64::NEG_INFINITY };
    }
    -mean + k as f64 * mean.ln() - ln_factorial(k)
}

/// `exp(-mean) mean^k / k!`
pub fn poisson_pmf(k: u64, mean: f64) -> f64 {
    ln_poisson_pmf(k, mean).exp()
}

/// `H(tau, zeta) = P[Y > tau]` for `Y ~ Poisson(zeta)`.
pub fn poisson_tail(tau: u64, zeta: f64) -> f64 {
    debug_assert!(zeta >= 0.0);
    if zeta == 0.0 {
        return 0.0;
    }
    if zeta > SUMMATION_LIMIT {
        // P[Y > tau] = P(tau + 1, zeta), the regularized lower incomplete gamma
        return gamma_lr(tau as f64 + 1.0, zeta);
    }
    if tau as f64 >= zeta {
        upper_sum(tau + 1, zeta)
    } else {
        let mut acc = Kahan::default();
        let mut term = (-zeta).exp();
        acc.add(term);
        for i in 1..=tau {
            term *= zeta / i as f64;
            acc.add(term);
        }
        (1.0 - acc.sum).max(0.0)
    }
}

/// `1 - H(tau, zeta) = P[Y <= tau]`, accurate when it is tiny.
pub fn poisson_cdf(tau: u64, zeta: f64) -> f64 {
    debug_assert!(zeta >= 0.0);
    if zeta == 0.0 {
        return 1.0;
    }
    if zeta > SUMMATION_LIMIT {
        return gamma_ur(tau as f64 + 1.0, zeta);
    }
    if tau as f64 >= zeta {
        (1.0 - upper_sum(tau + 1, zeta)).max(0.0)
    } else {
        // terms increase up to tau; sum from the top down
        let mut acc = Kahan::default();
        let mut term = poisson_pmf(tau, zeta);
        let mut i = tau;
        loop {
            acc.add(term);
            if i == 0 || term < 1e-18 * acc.sum {
                break;
            }
            term *= i as f64 / zeta;
            i -= 1;
        }
        acc.sum
    }
}

/// `sum_{i >= start} pmf(i; zeta)`, for `start >= zeta` where the terms decrease.
fn upper_sum(start: u64, zeta: f64) -> f64 {
    let mut term = poisson_pmf(start, zeta);
    let mut acc = Kahan::default();
    let mut i = start;
    while term > 0.0 {
        acc.add(term);
        if term < 1e-18 * acc.sum {
            break;
        }
        i += 1;
        term *= zeta / i as f64;
    }
    acc.sum
}

/// `H(tau, zeta + delta) - H(tau, zeta)` without the cancellation of the
/// direct difference when `delta` is small.
///
/// Each pmf difference is written as `pmf(i; zeta) * expm1(i ln1p(delta/zeta) - delta)`.
/// The sign of that factor flips once, at `i* = delta / ln1p(delta/zeta)`, so
/// summing the head `i <= tau` (when `tau < i*`) or the tail `i > tau`
/// (otherwise) only ever adds same-signed terms.
pub fn poisson_tail_increment(tau: u64, zeta: f64, delta: f64) -> f64 {
    debug_assert!(zeta >= 0.0 && delta >= 0.0);
    if delta == 0.0 {
        return 0.0;
    }
    if zeta == 0.0 {
        return poisson_tail(tau, delta);
    }
    if zeta + delta > SUMMATION_LIMIT {
        return (poisson_tail(tau, zeta + delta) - poisson_tail(tau, zeta)).max(0.0);
    }
    let log_ratio = (delta / zeta).ln_1p();
    let crossing = delta / log_ratio;
    let factor = |i: u64| (i as f64 * log_ratio - delta).exp_m1();
    let mut acc = Kahan::default();
    if (tau as f64) < crossing {
        let mut pmf = (-zeta).exp();
        for i in 0..=tau {
            if i > 0 {
                pmf *= zeta / i as f64;
            }
            acc.add(-pmf * factor(i));
        }
    } else {
        let mut i = tau + 1;
        let mut pmf = poisson_pmf(i, zeta);
        let mut pmf_shifted = poisson_pmf(i, zeta + delta);
        loop {
            acc.add(pmf * factor(i));
            if pmf_shifted == 0.0 || (pmf_shifted < 1e-18 * acc.sum && i as f64 > zeta + delta) {
                break;
            }
            i += 1;
            pmf *= zeta / i as f64;
            pmf_shifted *= (zeta + delta) / i as f64;
        }
    }
    acc.sum.max(0.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Independent oracle: plain left-to-right summation of the pmf in log space.
    fn tail_by_summation(tau: u64, zeta: f64) -> f64 {
        if zeta == 0.0 {
            return 0.0;
        }
        let cdf: f64 = (0..=tau)
            .map(|i| (-zeta + i as f64 * zeta.ln() - ln_factorial(i)).exp())
            .sum();
        1.0 - cdf
    }

    #[test]
    fn zero_mean_has_no_tail() {
        for tau in [0, 1, 16, 1000] {
            assert_eq!(poisson_tail(tau, 0.0), 0.0);
        }
    }

    #[test]
    fn zero_threshold_is_complement_of_zero_term() {
        for zeta in [1e-6f64, 0.3, 5.0, 42.0] {
            let want = -(-zeta).exp_m1();
            assert!((poisson_tail(0, zeta) - want).abs() < 1e-15);
        }
    }

    #[test]
    fn matches_direct_summation() {
        for zeta in [0.01, 0.5, 3.0, 10.0, 37.5, 120.0, 499.0] {
            for tau in [0u64, 1, 2, 5, 9, 16, 30, 80, 200, 600] {
                let got = poisson_tail(tau, zeta);
                let want = tail_by_summation(tau, zeta);
                assert!(
                    (got - want).abs() <= 1e-12,
                    "H({tau}, {zeta}) = {got} vs {want}"
                );
            }
        }
    }

    #[test]
    fn monotone_in_threshold_and_mean() {
        let zetas = [0.5, 2.0, 10.0, 50.0];
        for &z in &zetas {
            for tau in 0..60u64 {
                let a = poisson_tail(tau, z);
                let b = poisson_tail(tau + 1, z);
                assert!(b <= a, "tau {tau} zeta {z}");
                if a < 1.0 - 1e-12 && b > 1e-300 {
                    assert!(b < a, "tau {tau} zeta {z}");
                }
            }
        }
        for tau in [0u64, 5, 16] {
            for w in zetas.windows(2) {
                assert!(poisson_tail(tau, w[1]) > poisson_tail(tau, w[0]));
            }
        }
    }

    #[test]
    fn increment_agrees_with_difference_when_large() {
        for (tau, zeta, delta) in [
            (16, 10.0, 3.0),
            (9, 5.0, 20.0),
            (0, 1.0, 0.5),
            (40, 2.0, 60.0),
        ] {
            let direct = poisson_tail(tau, zeta + delta) - poisson_tail(tau, zeta);
            let got = poisson_tail_increment(tau, zeta, delta);
            assert!((got - direct).abs() < 1e-13, "{got} vs {direct}");
        }
    }

    #[test]
    fn increment_small_delta_is_pmf_times_delta() {
        // d/dzeta H(tau, zeta) = pmf(tau; zeta)
        for (tau, zeta) in [(16u64, 10.0), (9, 5.0), (0, 3.0), (3, 40.0)] {
            let delta = 1e-9;
            let got = poisson_tail_increment(tau, zeta, delta);
            let want = delta * poisson_pmf(tau, zeta + 0.5 * delta);
            assert!(
                (got / want - 1.0).abs() < 1e-7,
                "tau {tau}: {got} vs {want}"
            );
        }
    }

    #[test]
    fn cdf_complements_tail() {
        for zeta in [0.01, 0.5, 3.0, 10.0, 37.5, 120.0, 499.0, 800.0] {
            for tau in [0u64, 1, 2, 5, 9, 16, 30, 80, 200, 600, 1200] {
                let s = poisson_cdf(tau, zeta) + poisson_tail(tau, zeta);
                assert!((s - 1.0).abs() < 1e-12, "tau {tau} zeta {zeta}: {s}");
            }
        }
    }

    #[test]
    fn cdf_keeps_relative_accuracy_deep_in_the_tail() {
        // P[Y <= 9] for Y ~ Poisson(340): dominated by the i = 9 term
        let got = poisson_cdf(9, 340.0);
        let want: f64 = (0..=9u64).map(|i| ln_poisson_pmf(i, 340.0).exp()).sum();
        assert!(
            got > 0.0 && (got / want - 1.0).abs() < 1e-12,
            "{got} vs {want}"
        );
        assert!(poisson_cdf(16, 1e4) >= 0.0);
        assert_eq!(poisson_cdf(3, 0.0), 1.0);
    }

    #[test]
    fn increment_from_zero_mean() {
        assert!((poisson_tail_increment(0, 0.0, 2.0) - poisson_tail(0, 2.0)).abs() < 1e-16);
    }
}
