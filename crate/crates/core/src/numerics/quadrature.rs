use super::NumericsError;
use std::cmp::Ordering;
use std::collections::BinaryHeap;

// Gauss-Kronrod 7/15 nodes and weights on [-1, 1].
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

/// Default subdivision budget.
pub const MAX_INTERVALS: usize = 4000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureEstimate {
    pub value: f64,
    pub error: f64,
    pub intervals: usize,
}

#[derive(Debug, Clone, Copy)]
struct Segment {
    lo: f64,
    hi: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn gk15<F: Fn(f64) -> f64>(f: &F, lo: f64, hi: f64) -> Segment {
    let center = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo);
    let fc = f(center);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = half * XGK[j];
        let pair = f(center - dx) + f(center + dx);
        kronrod += WGK[j] * pair;
        if j % 2 == 1 {
            gauss += WG[j / 2] * pair;
        }
    }
    Segment {
        lo,
        hi,
        value: kronrod * half,
        error: ((kronrod - gauss) * half).abs(),
    }
}

/// Adaptive Gauss-Kronrod integration of `f` over `[lo, hi]` starting from the
/// given breakpoints; stops once the summed error estimate is within
/// `max(abs_tol, rel_tol * |value|)`.
pub fn integrate_adaptive<F: Fn(f64) -> f64>(
    f: F,
    breakpoints: &[f64],
    abs_tol: f64,
    rel_tol: f64,
    max_intervals: usize,
) -> Result<QuadratureEstimate, NumericsError> {
    let mut heap: BinaryHeap<Segment> = breakpoints
        .windows(2)
        .filter(|w| w[1] > w[0])
        .map(|w| gk15(&f, w[0], w[1]))
        .collect();
    loop {
        let value: f64 = heap.iter().map(|s| s.value).sum();
        let error: f64 = heap.iter().map(|s| s.error).sum();
        if !value.is_finite() || !error.is_finite() {
            return Err(NumericsError::QuadratureNonConvergence {
                estimate: value,
                error,
                intervals: heap.len(),
            });
        }
        if error <= abs_tol.max(rel_tol * value.abs()) {
            return Ok(QuadratureEstimate {
                value,
                error,
                intervals: heap.len(),
            });
        }
        if heap.len() >= max_intervals {
            return Err(NumericsError::QuadratureNonConvergence {
                estimate: value,
                error,
                intervals: heap.len(),
            });
        }
        let worst = heap.pop().expect("non-empty");
        let mid = 0.5 * (worst.lo + worst.hi);
        if mid <= worst.lo || mid >= worst.hi {
            // cannot split further; accept this segment as is
            heap.push(Segment {
                error: 0.0,
                ..worst
            });
            continue;
        }
        heap.push(gk15(&f, worst.lo, mid));
        heap.push(gk15(&f, mid, worst.hi));
    }
}

/// Geometric breakpoints `upper * 10^-k`, so features near `t = 0` are not
/// stepped over by the first Kronrod rule.
pub fn transient_breakpoints(upper: f64, decades: u32) -> Vec<f64> {
    let mut pts = vec![0.0];
    for k in (0..=decades).rev() {
        pts.push(upper * 10f64.powi(-(k as i32)));
    }
    pts
}

/// `int_0^upper f(t) dt` to within absolute error 1e-8 or relative error 1e-6,
/// whichever is looser. `f` may have an integrable endpoint at `t = 0`.
pub fn integrate_transient<F: Fn(f64) -> f64>(
    f: F,
    upper: f64,
) -> Result<QuadratureEstimate, NumericsError> {
    integrate_adaptive(
        f,
        &transient_breakpoints(upper, 12),
        1e-8,
        1e-6,
        MAX_INTERVALS,
    )
}
