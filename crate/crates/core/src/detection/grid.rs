use super::{
    cascade, fc_stages, log_ratios, transition_unchecked, Channels, DetectionError, LinkProbs,
    NoiseModel, Result, Stage, Thresholds, TransitionProbs,
};
use crate::channel::Link;
use crate::channel::{distance, NetworkLayout, Vec3};
use crate::numerics::{poisson_cdf, poisson_pmf, poisson_tail_increment};
use rayon::prelude::*;

/// Candidate target positions and secretion rates searched by the
/// generalized detectors. Candidate `i` is position `i / mus.len()` with
/// rate `i % mus.len()`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    pub positions: Vec<Vec3>,
    pub mus: Vec<f64>,
}

impl GridSpec {
    /// `n x n` cell centers of a square of side `side` centred on the origin
    /// in the plane `z`.
    pub fn square_positions(side: f64, n: usize, z: f64) -> Vec<Vec3> {
        let h = side / n as f64;
        let c = |i: usize| -side / 2.0 + (i as f64 + 0.5) * h;
        (0..n)
            .flat_map(|i| (0..n).map(move |j| [c(i), c(j), z]))
            .collect()
    }

    /// `2 l mu / levels` for `l = 1..=levels`.
    pub fn mu_levels(mu: f64, levels: usize) -> Vec<f64> {
        (1..=levels)
            .map(|l| 2.0 * l as f64 * mu / levels as f64)
            .collect()
    }

    pub fn new(positions: Vec<Vec3>, mus: Vec<f64>) -> Result<Self> {
        if positions.is_empty() || mus.is_empty() {
            return Err(DetectionError::EmptyGrid);
        }
        if mus.iter().any(|m| !(*m > 0.0 && m.is_finite())) {
            return Err(DetectionError::InvalidInput(
                "candidate rates must be positive".into(),
            ));
        }
        Ok(GridSpec { positions, mus })
    }

    pub fn len(&self) -> usize {
        self.positions.len() * self.mus.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn candidate(&self, i: usize) -> (Vec3, f64) {
        let m = self.mus.len();
        (self.positions[i / m], self.mus[i % m])
    }
}

/// Everything the FC knows: sensor positions, the target-to-sensor channel,
/// the sensor threshold and the fixed sensor-to-FC stages.
#[derive(Debug, Clone, PartialEq)]
pub struct DetectionContext {
    pub ns: Link,
    pub sensors: Vec<Vec3>,
    pub tau1: u64,
    pub zeta0: f64,
    pub sf: Vec<Stage>,
    null_ts: Stage,
}

impl DetectionContext {
    pub fn new(
        layout: &NetworkLayout,
        thresholds: &Thresholds,
        noise: &NoiseModel,
        channels: &Channels,
    ) -> Result<Self> {
        let sf = fc_stages(layout, thresholds.tau2, noise, channels)?;
        Self::from_parts(
            channels.ns,
            layout.sensors.clone(),
            thresholds.tau1,
            noise.zeta0,
            sf,
        )
    }

    pub fn from_parts(
        ns: Link,
        sensors: Vec<Vec3>,
        tau1: u64,
        zeta0: f64,
        sf: Vec<Stage>,
    ) -> Result<Self> {
        if sensors.len() != sf.len() {
            return Err(DetectionError::LengthMismatch {
                expected: sensors.len(),
                got: sf.len(),
            });
        }
        Ok(DetectionContext {
            ns,
            sensors,
            tau1,
            zeta0,
            sf,
            null_ts: Stage::poisson(tau1, zeta0, 0.0),
        })
    }

    pub fn len(&self) -> usize {
        self.sensors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sensors.is_empty()
    }

    /// The first `k` sensors.
    pub fn prefix(&self, k: usize) -> Self {
        DetectionContext {
            sensors: self.sensors[..k].to_vec(),
            sf: self.sf[..k].to_vec(),
            ..self.clone()
        }
    }

    /// Channel gains from `x` to every sensor; `None` if `x` lies inside one.
    pub fn gains(&self, x: &Vec3) -> Result<Option<Vec<f64>>> {
        let a = self.ns.params.receiver_radius;
        let mut out = Vec::with_capacity(self.len());
        for s in &self.sensors {
            let dist = distance(x, s);
            if dist <= a {
                return Ok(None);
            }
            out.push(self.ns.gain(dist)?);
        }
        Ok(Some(out))
    }

    fn gains_or_err(&self, x: &Vec3) -> Result<Vec<f64>> {
        self.gains(x)?.ok_or_else(|| {
            DetectionError::InvalidInput(format!("position {x:?} lies inside a sensor"))
        })
    }

    /// Sensor stage for a target signal of mean `signal`.
    fn ts_stage(&self, signal: f64) -> Stage {
        if signal == 0.0 {
            return self.null_ts;
        }
        let gain = poisson_tail_increment(self.tau1, self.zeta0, signal);
        Stage {
            p_d: (self.null_ts.p_fa + gain).min(1.0),
            q_d: poisson_cdf(self.tau1, self.zeta0 + signal),
            gain,
            ..self.null_ts
        }
    }

    pub fn link_probs(&self, x: &Vec3, mu: f64) -> Result<LinkProbs> {
        let ts = if mu > 0.0 {
            self.gains_or_err(x)?
                .iter()
                .map(|g| self.ts_stage(mu * g))
                .collect()
        } else {
            vec![self.null_ts; self.len()]
        };
        Ok(LinkProbs {
            ts,
            sf: self.sf.clone(),
            n_release: f64::NAN,
        })
    }

    /// Checked transition probabilities for a target `(x, mu)`.
    pub fn transition(&self, x: &Vec3, mu: f64) -> Result<TransitionProbs> {
        let tp = transition_unchecked(&self.link_probs(x, mu)?);
        tp.check()?;
        Ok(tp)
    }

    /// `(rho0, 1 - rho0)` per sensor, rejecting degenerate values.
    fn null_rhos(&self) -> Result<Vec<(f64, f64)>> {
        self.sf
            .iter()
            .enumerate()
            .map(|(k, sf)| {
                let (r, c) = cascade(&self.null_ts, sf);
                if r > 0.0 && c > 0.0 {
                    Ok((r, c))
                } else {
                    Err(DetectionError::DegenerateRho { k, rho: r })
                }
            })
            .collect()
    }

    fn likelihood_column(&self, null: &[(f64, f64)], gains: &[f64], mu: f64) -> Vec<(f64, f64)> {
        gains
            .iter()
            .zip(&self.sf)
            .zip(null)
            .map(|((g, sf), &(r0, c0))| {
                let ts = self.ts_stage(mu * g);
                let (_, c1) = cascade(&ts, sf);
                log_ratios(r0, c0, c1, ts.gain * sf.gain)
            })
            .collect()
    }

    /// Log-likelihood ratio table over every grid candidate.
    pub fn glrt_table(&self, grid: &GridSpec) -> Result<CandidateTable> {
        if grid.is_empty() {
            return Err(DetectionError::EmptyGrid);
        }
        let null = self.null_rhos()?;
        let per_pos = grid
            .positions
            .par_iter()
            .map(|x| {
                Ok(match self.gains(x)? {
                    Some(g) => grid
                        .mus
                        .iter()
                        .map(|&mu| Some(self.likelihood_column(&null, &g, mu)))
                        .collect(),
                    None => vec![None; grid.mus.len()],
                })
            })
            .collect::<Result<Vec<Vec<_>>>>()?;
        Ok(CandidateTable::from_columns(
            self.len(),
            per_pos.into_iter().flatten().collect(),
        ))
    }

    /// Single-candidate table holding the exact log-likelihood ratio.
    pub fn gad_table(&self, x: &Vec3, mu: f64) -> Result<CandidateTable> {
        let null = self.null_rhos()?;
        let g = self.gains_or_err(x)?;
        Ok(CandidateTable::from_columns(
            self.len(),
            vec![Some(self.likelihood_column(&null, &g, mu))],
        ))
    }

    /// Normalized locally optimal scores at every candidate position.
    pub fn glod_table(&self, positions: &[Vec3]) -> Result<CandidateTable> {
        if positions.is_empty() {
            return Err(DetectionError::EmptyGrid);
        }
        let null = self.null_rhos()?;
        let pmf = poisson_pmf(self.tau1, self.zeta0);
        let cols = positions
            .par_iter()
            .map(|x| {
                let Some(g) = self.gains(x)? else {
                    return Ok(None);
                };
                let theta: Vec<f64> = g
                    .iter()
                    .zip(&self.sf)
                    .map(|(g, sf)| g * pmf * sf.gain)
                    .collect();
                let norm = theta
                    .iter()
                    .zip(&null)
                    .map(|(t, (r, c))| t * t / (r * c))
                    .sum::<f64>()
                    .sqrt();
                if !(norm > 0.0 && norm.is_finite()) {
                    return Ok(None);
                }
                Ok(Some(
                    theta
                        .iter()
                        .zip(&null)
                        .map(|(t, (r, c))| (t / r / norm, -t / c / norm))
                        .collect(),
                ))
            })
            .collect::<Result<Vec<_>>>()?;
        if cols.iter().all(Option::is_none) {
            return Err(DetectionError::NoSignalGeometry);
        }
        Ok(CandidateTable::from_columns(self.len(), cols))
    }
}

/// Additive per-sensor scores for a list of candidates:
/// `score(c, d) = sum_k (d_k ? one[k][c] : zero[k][c])`.
/// Infinite negative entries are counted rather than summed, so a candidate
/// under which the observed vector is impossible is never selected.
#[derive(Debug, Clone, PartialEq)]
pub struct CandidateTable {
    k: usize,
    n: usize,
    base: Vec<f64>,
    rows: Vec<f64>,
    impossible: Vec<u32>,
    impossible_rows: Vec<Vec<(u32, i32)>>,
}

impl CandidateTable {
    /// `columns[c][k] = (one, zero)`; `None` marks an excluded candidate.
    pub fn from_columns(k: usize, columns: Vec<Option<Vec<(f64, f64)>>>) -> Self {
        let n = columns.len();
        let mut t = CandidateTable {
            k,
            n,
            base: vec![0.0; n],
            rows: vec![0.0; k * n],
            impossible: vec![0; n],
            impossible_rows: vec![Vec::new(); k],
        };
        for (c, col) in columns.into_iter().enumerate() {
            let Some(col) = col else {
                t.base[c] = f64::NEG_INFINITY;
                continue;
            };
            for (j, (one, zero)) in col.into_iter().enumerate() {
                let (one_bad, zero_bad) = (one == f64::NEG_INFINITY, zero == f64::NEG_INFINITY);
                let one = if one_bad { 0.0 } else { one };
                let zero = if zero_bad { 0.0 } else { zero };
                t.base[c] += zero;
                t.rows[j * n + c] = one - zero;
                if zero_bad {
                    t.impossible[c] += 1;
                }
                let delta = one_bad as i32 - zero_bad as i32;
                if delta != 0 {
                    t.impossible_rows[j].push((c as u32, delta));
                }
            }
        }
        t
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// Score of every candidate; impossible or excluded ones are `-inf`.
    pub fn scores(&self, d: &[bool]) -> Vec<f64> {
        assert_eq!(d.len(), self.k, "decision vector length");
        let mut s = self.base.clone();
        let mut imp = self.impossible.clone();
        for (j, _) in d.iter().enumerate().filter(|(_, &b)| b) {
            for (acc, w) in s.iter_mut().zip(&self.rows[j * self.n..(j + 1) * self.n]) {
                *acc += w;
            }
            for &(c, delta) in &self.impossible_rows[j] {
                imp[c as usize] = imp[c as usize].wrapping_add_signed(delta);
            }
        }
        for (v, i) in s.iter_mut().zip(&imp) {
            if *i != 0 {
                *v = f64::NEG_INFINITY;
            }
        }
        s
    }

    /// Highest-scoring candidate, lowest index on ties.
    pub fn best(&self, d: &[bool]) -> Option<(usize, f64)> {
        let mut best: Option<(usize, f64)> = None;
        for (c, v) in self.scores(d).into_iter().enumerate() {
            if v > f64::NEG_INFINITY && best.is_none_or(|(_, b)| v > b) {
                best = Some((c, v));
            }
        }
        best
    }

    /// Maximum score, `-inf` if no candidate is possible.
    pub fn max(&self, d: &[bool]) -> f64 {
        self.best(d).map_or(f64::NEG_INFINITY, |(_, v)| v)
    }
}

fn check_len(d: &[bool], ctx: &DetectionContext) -> Result<()> {
    if d.len() != ctx.len() {
        return Err(DetectionError::LengthMismatch {
            expected: ctx.len(),
            got: d.len(),
        });
    }
    Ok(())
}

/// Maximum-likelihood target position and rate over the grid.
pub fn glrt_estimate(d: &[bool], grid: &GridSpec, ctx: &DetectionContext) -> Result<(Vec3, f64)> {
    check_len(d, ctx)?;
    let table = ctx.glrt_table(grid)?;
    let (c, _) = table.best(d).ok_or_else(|| {
        DetectionError::InvalidInput("every candidate has zero likelihood".into())
    })?;
    Ok(grid.candidate(c))
}

pub fn glrt_stat(d: &[bool], grid: &GridSpec, ctx: &DetectionContext) -> Result<f64> {
    check_len(d, ctx)?;
    Ok(2.0 * ctx.glrt_table(grid)?.max(d))
}

pub fn glod_stat(d: &[bool], positions: &[Vec3], ctx: &DetectionContext) -> Result<f64> {
    check_len(d, ctx)?;
    Ok(ctx.glod_table(positions)?.max(d))
}

/// `d rho1_k / d mu` at `(x_t, mu)`.
pub fn rho1_derivative(k: usize, x_t: &Vec3, mu: f64, ctx: &DetectionContext) -> Result<f64> {
    let g = ctx.gains_or_err(x_t)?[k];
    Ok(derivative(g, mu, ctx.tau1, ctx.zeta0, &ctx.sf[k]))
}

fn derivative(g: f64, mu: f64, tau1: u64, zeta0: f64, sf: &Stage) -> f64 {
    if g == 0.0 || sf.gain == 0.0 {
        return 0.0;
    }
    poisson_pmf(tau1, mu * g + zeta0) * g * sf.gain
}

/// Fisher information about `mu` carried by the decision vector.
pub fn fisher_info(x_t: &Vec3, mu: f64, ctx: &DetectionContext) -> Result<f64> {
    let tp = ctx.transition(x_t, mu)?;
    let g = ctx.gains_or_err(x_t)?;
    Ok((0..ctx.len())
        .map(|k| {
            let dr = derivative(g[k], mu, ctx.tau1, ctx.zeta0, &ctx.sf[k]);
            dr * dr / (tp.rho1[k] * tp.comp1[k])
        })
        .sum())
}

/// `d/dmu log P(d; x_t, mu)`.
pub fn score(d: &[bool], x_t: &Vec3, mu: f64, ctx: &DetectionContext) -> Result<f64> {
    check_len(d, ctx)?;
    let tp = ctx.transition(x_t, mu)?;
    let g = ctx.gains_or_err(x_t)?;
    Ok(d.iter()
        .enumerate()
        .map(|(k, &bit)| {
            let dr = derivative(g[k], mu, ctx.tau1, ctx.zeta0, &ctx.sf[k]);
            if bit {
                dr / tp.rho1[k]
            } else {
                -dr / tp.comp1[k]
            }
        })
        .sum())
}
