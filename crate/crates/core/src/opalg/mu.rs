use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::norm::{power_norm, DEFAULT_TOL};
use super::{BandedOperator, ZERO};
use crate::error::{Error, Result};
use crate::fill::INEQUALITY_SLACK;
use crate::spaces::{PointId, Window};

/// Number of seeded random probe supports (half balls, half random subsets).
pub const RANDOM_PROBES: usize = 32;
const PROBE_SEED: u64 = 0x009b_0be5;
const PROBE_TOL: f64 = 1e-7;
const PROBE_ITERATIONS: usize = 5_000;

/// One radius of a [`MuProfile`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MuRow {
    pub radius: u32,
    /// Certified dominating value: never below the true `μ_A(R)`.
    pub upper: f64,
    /// Probe lower bound for the optimal `μ_A(R)`.
    pub lower: f64,
}

/// Upper and lower envelopes of the optimal dominating function.
#[derive(Debug, Clone)]
pub struct MuProfile {
    pub rows: Vec<MuRow>,
    /// Power-iteration estimate of `‖A‖_op` (a lower bound).
    pub op_norm: f64,
    /// `op_norm` inflated by the tolerance.
    pub op_norm_upper: f64,
    pub propagation: u32,
}

impl MuProfile {
    pub fn rmax(&self) -> u32 {
        self.rows.last().map_or(0, |r| r.radius)
    }

    /// Whether the table reaches the propagation, so that every radius is
    /// certified.
    pub fn complete(&self) -> bool {
        self.propagation <= self.rmax()
    }

    /// Certified `μ_A(R)`; beyond the table the last row still dominates.
    pub fn upper(&self, radius: u32) -> f64 {
        if radius >= self.propagation {
            return 0.0;
        }
        match self.rows.get(radius as usize) {
            Some(row) => row.upper,
            None => self.rows.last().map_or(self.op_norm_upper, |r| r.upper),
        }
    }

    /// Lower bound for the optimal `μ_A(R)`; zero beyond the table.
    pub fn lower(&self, radius: u32) -> f64 {
        self.rows.get(radius as usize).map_or(0.0, |r| r.lower)
    }

    /// `max(‖A‖, max_{1≤R≤rmax} μ_upper(R)·R^n)`.
    pub fn mu_norm(&self, n: u32) -> f64 {
        self.weighted(n, self.op_norm_upper, |r| r.upper, |k| k as f64)
    }

    /// Lower-bound counterpart of [`MuProfile::mu_norm`].
    pub fn mu_norm_lower(&self, n: u32) -> f64 {
        self.weighted(n, self.op_norm, |r| r.lower, |k| k as f64)
    }

    /// The norm over all real radii: on a lattice `μ(R) = μ(⌊R⌋)`, so the
    /// supremum on `[k, k+1)` is `μ(k)(k+1)^n`.
    pub fn mu_norm_sup(&self, n: u32) -> f64 {
        self.weighted(n, self.op_norm_upper, |r| r.upper, |k| (k + 1) as f64)
    }

    pub fn mu_norm_sup_lower(&self, n: u32) -> f64 {
        self.weighted(n, self.op_norm, |r| r.lower, |k| (k + 1) as f64)
    }

    fn weighted(&self, n: u32, base: f64, pick: impl Fn(&MuRow) -> f64, scale: impl Fn(u32) -> f64) -> f64 {
        self.rows
            .iter()
            .filter(|r| r.radius >= 1)
            .map(|r| pick(r) * scale(r.radius).powi(n as i32))
            .fold(base, f64::max)
    }
}

/// `‖A‖_{μ,n}` from a freshly computed profile up to the window margin.
pub fn mu_norm(a: &BandedOperator, n: u32) -> Result<f64> {
    Ok(profile_unchecked(a, a.window().margin())?.mu_norm(n))
}

/// Sandwich of the optimal dominating function of `A` on radii `0..=rmax`.
pub fn mu_profile(a: &BandedOperator, rmax: u32) -> Result<MuProfile> {
    let margin = a.window().margin();
    if rmax > margin {
        return Err(Error::margin("opalg", format!("rmax {rmax} exceeds the window margin {margin}")));
    }
    profile_unchecked(a, rmax)
}

pub(crate) fn profile_unchecked(a: &BandedOperator, rmax: u32) -> Result<MuProfile> {
    let op = power_norm(a, None, None, DEFAULT_TOL, true)?;
    let op_upper = op * (1.0 + DEFAULT_TOL);
    let propagation = a.propagation();
    let raw_upper: Vec<f64> = (0..=rmax)
        .into_par_iter()
        .map(|r| {
            if r >= propagation {
                Ok(0.0)
            } else {
                Ok(power_norm(&a.off_band(r), None, None, DEFAULT_TOL, true)? * (1.0 + DEFAULT_TOL))
            }
        })
        .collect::<Result<_>>()?;
    let raw_lower = probe_lower(a, rmax);
    let mut rows = Vec::with_capacity(raw_upper.len());
    let (mut up, mut lo) = (0.0f64, 0.0f64);
    for r in (0..=rmax).rev() {
        up = up.max(raw_upper[r as usize]);
        lo = lo.max(raw_lower[r as usize]);
        rows.push(MuRow { radius: r, upper: up.min(op_upper), lower: lo });
    }
    rows.reverse();
    Ok(MuProfile { rows, op_norm: op, op_norm_upper: op_upper, propagation })
}

fn distances_to(window: &Window, support: &[PointId]) -> Vec<u32> {
    window
        .points()
        .map(|p| support.iter().map(|&l| window.distance(p, l)).min().unwrap_or(u32::MAX))
        .collect()
}

/// Largest eigenvalue lower bound (Rayleigh quotient) of a small Hermitian
/// PSD matrix.
fn top_eigenvalue(g: &[Complex64], f: usize) -> f64 {
    if f == 1 {
        return g[0].re;
    }
    let j = (0..f).max_by(|&a, &b| g[a * f + a].re.total_cmp(&g[b * f + b].re)).unwrap();
    if g[j * f + j].re <= 0.0 {
        return 0.0;
    }
    let mut v: Vec<Complex64> = (0..f).map(|i| g[i * f + j]).collect();
    let mut best = 0.0f64;
    for _ in 0..200 {
        let w: Vec<Complex64> = (0..f).map(|i| (0..f).map(|k| g[i * f + k] * v[k]).sum()).collect();
        let vv: f64 = v.iter().map(|z| z.norm_sqr()).sum();
        let rq: f64 = v.iter().zip(&w).map(|(a, b)| (a.conj() * b).re).sum::<f64>() / vv;
        best = best.max(rq);
        let len = w.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if len == 0.0 {
            break;
        }
        v = w.into_iter().map(|z| z / len).collect();
    }
    best
}

/// Singleton probes, exactly: `‖P_{out B_R(x)} A P_x‖` is the norm of the
/// column block tail of `x`.
fn singleton_lower(a: &BandedOperator, rmax: u32) -> Vec<f64> {
    let window = a.window();
    let f = a.fiber();
    let adj = a.adjoint();
    window
        .points()
        .collect::<Vec<_>>()
        .par_iter()
        .map(|&x| {
            let mut col: Vec<(u32, &[Complex64])> = adj.row(x).map(|(y, c)| (window.distance(x, y), c)).collect();
            col.sort_by_key(|e| std::cmp::Reverse(e.0));
            let mut out = vec![0.0; rmax as usize + 1];
            let mut gram = vec![ZERO; f * f];
            let mut k = 0;
            for r in (0..=rmax).rev() {
                while k < col.len() && col[k].0 > r {
                    let c = col[k].1;
                    for i in 0..f {
                        for j in 0..f {
                            gram[i * f + j] += (0..f).map(|m| c[i * f + m] * c[j * f + m].conj()).sum::<Complex64>();
                        }
                    }
                    k += 1;
                }
                out[r as usize] = top_eigenvalue(&gram, f).max(0.0).sqrt();
            }
            out
        })
        .reduce(|| vec![0.0; rmax as usize + 1], |a, b| a.iter().zip(&b).map(|(x, y)| x.max(*y)).collect())
}

fn random_supports(window: &Window) -> Vec<Vec<PointId>> {
    let mut rng = ChaCha8Rng::seed_from_u64(PROBE_SEED);
    let points: Vec<PointId> = window.points().collect();
    let mut supports = Vec::with_capacity(RANDOM_PROBES);
    for i in 0..RANDOM_PROBES {
        let support: Vec<PointId> = if i % 2 == 0 {
            let center = points[rng.random_range(0..points.len())];
            let radius = rng.random_range(0..=window.radius().max(1) / 2);
            points.iter().copied().filter(|&p| window.distance(center, p) <= radius).collect()
        } else {
            points.iter().copied().filter(|_| rng.random_bool(0.5)).collect()
        };
        if !support.is_empty() {
            supports.push(support);
        }
    }
    supports
}

/// Suffix-free probe maxima of `‖P_{out B_R(L)} A P_L‖` for `R = 0..=rmax`.
fn probe_lower(a: &BandedOperator, rmax: u32) -> Vec<f64> {
    let window = a.window();
    let mut best = singleton_lower(a, rmax);
    if a.is_zero() {
        return best;
    }
    let supports = random_supports(window);
    let probes: Vec<Vec<f64>> = supports
        .par_iter()
        .map(|support| {
            let dist = distances_to(window, support);
            let input: Vec<bool> = dist.iter().map(|&d| d == 0).collect();
            (0..=rmax)
                .map(|r| {
                    let output: Vec<bool> = dist.iter().map(|&d| d > r).collect();
                    if !output.iter().any(|&o| o) {
                        return 0.0;
                    }
                    super::norm::power_norm_capped(a, Some(&input), Some(&output), PROBE_TOL, PROBE_ITERATIONS)
                })
                .collect()
        })
        .collect();
    for p in probes {
        for (b, v) in best.iter_mut().zip(p) {
            *b = b.max(v);
        }
    }
    best
}

fn leq(lhs: f64, rhs: f64) -> bool {
    lhs <= rhs * (1.0 + INEQUALITY_SLACK) + 1e-12
}

/// One radius of an estimate check.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EstimateRow {
    pub radius: u32,
    pub lhs: f64,
    pub rhs: f64,
    pub pass: bool,
}

#[derive(Debug, Clone)]
pub struct ProductReport {
    pub rows: Vec<EstimateRow>,
    pub pass: bool,
}

/// Checks `μ(AB)(R) ≤ ‖A‖·2μ_B(R/2) + μ_A(R/2)(‖B‖ + 2μ_B(R/2))` at even
/// radii, the left side from probes and the right from certified profiles.
pub fn check_product_estimate(a: &BandedOperator, b: &BandedOperator, rmax: u32) -> Result<ProductReport> {
    let ab = a.compose(b)?;
    let pa = mu_profile(a, rmax / 2)?;
    let pb = mu_profile(b, rmax / 2)?;
    let pab = mu_profile(&ab, rmax)?;
    let rows: Vec<EstimateRow> = (0..=rmax)
        .step_by(2)
        .map(|r| {
            let h = r / 2;
            let mb = pb.upper(h);
            let rhs = pa.op_norm_upper * 2.0 * mb + pa.upper(h) * (pb.op_norm_upper + 2.0 * mb);
            let lhs = pab.lower(r);
            EstimateRow { radius: r, lhs, rhs, pass: leq(lhs, rhs) }
        })
        .collect();
    let pass = rows.iter().all(|r| r.pass);
    Ok(ProductReport { rows, pass })
}

#[derive(Debug, Clone)]
pub struct PowerRow {
    pub n: u32,
    pub radius: u32,
    pub lhs: f64,
    pub rhs: f64,
    pub pass: bool,
}

#[derive(Debug, Clone)]
pub struct PowerReport {
    pub rows: Vec<PowerRow>,
    pub pass: bool,
}

/// Checks `μ(A^{n+1})(R) ≤ Σ_{k=1}^n 5^k ‖A‖^n μ_A(R/2^k)` for `1 ≤ n ≤ nmax`.
pub fn check_power_estimate(a: &BandedOperator, nmax: u32, rmax: u32) -> Result<PowerReport> {
    let pa = mu_profile(a, rmax)?;
    if pa.op_norm > 1.0 + DEFAULT_TOL {
        return Err(Error::precondition(
            "opalg",
            format!("power estimate expects ‖A‖ ≤ 1, got {}", pa.op_norm),
        ));
    }
    let mut rows = Vec::new();
    let mut power = a.compose(a)?;
    for n in 1..=nmax {
        let pp = mu_profile(&power, rmax)?;
        for r in 0..=rmax {
            let rhs: f64 = (1..=n)
                .map(|k| 5f64.powi(k as i32) * pa.op_norm_upper.powi(n as i32) * pa.upper(r >> k.min(31)))
                .sum();
            let lhs = pp.lower(r);
            rows.push(PowerRow { n, radius: r, lhs, rhs, pass: leq(lhs, rhs) });
        }
        if n < nmax {
            power = power.compose(a)?;
        }
    }
    let pass = rows.iter().all(|r| r.pass);
    Ok(PowerReport { rows, pass })
}

/// Row and column tail masses outside `B_R(x)`, maximised over `x`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayRow {
    pub radius: u32,
    pub row_tail: f64,
    pub column_tail: f64,
    /// `fiber · μ_upper(R)²`.
    pub bound: f64,
    pub pass: bool,
}

/// Squared ℓ² mass of kernel rows and columns beyond distance `R`, against
/// the dominating function.
pub fn entry_decay_bound(a: &BandedOperator, rmax: u32) -> Result<Vec<DecayRow>> {
    let profile = mu_profile(a, rmax)?;
    let window = a.window();
    let mut row_tail = vec![0.0f64; rmax as usize + 1];
    let mut col_tail = vec![0.0f64; rmax as usize + 1];
    let mut col_acc = vec![vec![0.0f64; rmax as usize + 1]; window.len()];
    for x in window.points() {
        let mut acc = vec![0.0f64; rmax as usize + 1];
        for (y, block) in a.row(x) {
            let d = window.distance(x, y);
            let mass: f64 = block.iter().map(|z| z.norm_sqr()).sum();
            for r in 0..d.min(rmax + 1) {
                acc[r as usize] += mass;
                col_acc[y.index()][r as usize] += mass;
            }
        }
        for (t, v) in row_tail.iter_mut().zip(acc) {
            *t = t.max(v);
        }
    }
    for col in col_acc {
        for (t, v) in col_tail.iter_mut().zip(col) {
            *t = t.max(v);
        }
    }
    Ok((0..=rmax)
        .map(|r| {
            let mu = profile.upper(r);
            let bound = a.fiber() as f64 * mu * mu;
            let (rt, ct) = (row_tail[r as usize], col_tail[r as usize]);
            DecayRow { radius: r, row_tail: rt, column_tail: ct, bound, pass: leq(rt.max(ct), bound) }
        })
        .collect())
}
