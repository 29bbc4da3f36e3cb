use num_complex::Complex64;

use super::mu::{profile_unchecked, MuProfile};
use super::norm::{op_norm_upper, DEFAULT_TOL};
use super::BandedOperator;
use crate::error::{Error, Result};
use crate::fill::INEQUALITY_SLACK;

const MAX_TERMS: usize = 10_000;

/// Bound report for a Neumann-series inverse of `id − B`.
#[derive(Debug, Clone)]
pub struct NeumannReport {
    pub n: u32,
    pub b_norm: f64,
    /// `1/(2^{n+1}·5)`.
    pub threshold: f64,
    pub terms: usize,
    pub tail_bound: f64,
    /// `‖(id−B)X − id‖` entrywise maximum.
    pub residual: f64,
    pub inverse_norm: f64,
    /// Probe-certified μ-norm of the computed inverse at integer radii.
    pub lhs: f64,
    /// `max{‖X‖, 1 + ‖B‖_{μ,n} + ‖B‖_{μ,n}/(1 − ‖B‖)}` at integer radii.
    pub rhs: f64,
    /// Same comparison with the norm taken over all real radii.
    pub lhs_sup: f64,
    pub rhs_sup: f64,
    pub pass: bool,
}

/// Sums `Σ_{k≤N} B^k` until `‖B‖^{N+1}/(1−‖B‖) < tol` and checks the
/// μ-norm bound for `(id − B)^{-1}`.
pub fn neumann_inverse(b: &BandedOperator, n: u32, tol: f64) -> Result<(BandedOperator, NeumannReport)> {
    if tol <= 0.0 {
        return Err(Error::precondition("opalg", "series tolerance must be positive"));
    }
    let threshold = 1.0 / (2f64.powi(n as i32 + 1) * 5.0);
    let b_norm = op_norm_upper(b, DEFAULT_TOL)?;
    if b_norm >= threshold {
        return Err(Error::precondition(
            "opalg",
            format!("‖B‖ = {b_norm} is not below 1/(2^{}·5) = {threshold}", n + 1),
        ));
    }
    let margin = b.window().margin();
    if b.propagation() > margin {
        return Err(Error::margin(
            "opalg",
            format!("propagation {} of B exceeds the margin {margin}", b.propagation()),
        ));
    }
    let identity = BandedOperator::identity(b.window().clone(), b.fiber());
    let mut sum = identity.clone();
    let mut term = identity.clone();
    let mut terms = 1;
    let mut tail = b_norm / (1.0 - b_norm);
    while tail >= tol && !b.is_zero() {
        if terms >= MAX_TERMS {
            return Err(Error::NonConvergence { iterations: terms });
        }
        term = term.compose(b)?;
        sum = sum.add(&term)?;
        terms += 1;
        tail *= b_norm;
    }
    let check = identity.sub(b)?.compose(&sum)?;
    let residual = check.max_abs_diff(&identity).unwrap_or(f64::INFINITY);

    let px = profile_unchecked(&sum, margin)?;
    let pb = profile_unchecked(b, margin)?;
    let bound = |bmu: f64| 1.0 + bmu + bmu / (1.0 - b_norm);
    let lhs = px.mu_norm_lower(n);
    let rhs = px.op_norm_upper.max(bound(pb.mu_norm(n)));
    let lhs_sup = px.mu_norm_sup_lower(n);
    let rhs_sup = px.op_norm_upper.max(bound(pb.mu_norm_sup(n)));
    let leq = |l: f64, r: f64| l <= r * (1.0 + INEQUALITY_SLACK) + 1e-12;
    let pass = leq(lhs, rhs) && leq(lhs_sup, rhs_sup);
    let report = NeumannReport {
        n,
        b_norm,
        threshold,
        terms,
        tail_bound: tail,
        residual,
        inverse_norm: px.op_norm,
        lhs,
        rhs,
        lhs_sup,
        rhs_sup,
        pass,
    };
    Ok((sum, report))
}

fn inverse_factorial(i: u32) -> f64 {
    (1..=i).fold(1.0, |acc, j| acc / j as f64)
}

/// A scalar power series `f(x) = Σ_{i≥1} a_i x^i` with a computable tail.
pub enum PowerSeries {
    /// Coefficients `a_1, a_2, …`; zero afterwards.
    Polynomial(Vec<Complex64>),
    /// `e^x − 1`.
    ExpMinusOne,
    /// Arbitrary coefficients with a Cauchy bound `|a_i| ≤ bound / radius^i`.
    Cauchy {
        coefficient: Box<dyn Fn(u32) -> Complex64 + Send + Sync>,
        radius: f64,
        bound: f64,
    },
}

impl PowerSeries {
    fn coefficient(&self, i: u32) -> Complex64 {
        match self {
            PowerSeries::Polynomial(c) => c.get(i as usize - 1).copied().unwrap_or_default(),
            PowerSeries::ExpMinusOne => Complex64::new(inverse_factorial(i), 0.0),
            PowerSeries::Cauchy { coefficient, .. } => coefficient(i),
        }
    }

    /// Bound on `Σ_{i>k} |a_i| a^i` given the last summed index `k`.
    fn tail(&self, k: u32, a: f64) -> f64 {
        match self {
            PowerSeries::Polynomial(c) => {
                c.iter().skip(k as usize).enumerate().map(|(j, z)| z.norm() * a.powi((k as usize + j + 1) as i32)).sum()
            }
            PowerSeries::ExpMinusOne => {
                a.powi(k as i32 + 1) * inverse_factorial(k + 1) * a.exp()
            }
            PowerSeries::Cauchy { radius, bound, .. } => {
                let q = a / radius;
                bound * q.powi(k as i32 + 1) / (1.0 - q)
            }
        }
    }

    fn certify(&self, a: f64) -> Result<()> {
        if let PowerSeries::Cauchy { radius, .. } = self {
            if *radius <= a {
                return Err(Error::precondition(
                    "opalg",
                    format!("radius of convergence {radius} is not above ‖A‖ = {a}"),
                ));
            }
        }
        Ok(())
    }
}

/// `f(A)` truncated once the operator-norm tail is below `tol`.
#[derive(Debug, Clone)]
pub struct SeriesApplication {
    pub operator: BandedOperator,
    pub terms: u32,
    pub tail_bound: f64,
    /// Dominating-function profile of the result up to the margin.
    pub profile: MuProfile,
}

pub fn power_series_apply(a: &BandedOperator, series: &PowerSeries, tol: f64) -> Result<SeriesApplication> {
    if tol <= 0.0 {
        return Err(Error::precondition("opalg", "series tolerance must be positive"));
    }
    let norm = op_norm_upper(a, DEFAULT_TOL)?;
    series.certify(norm)?;
    let mut sum = BandedOperator::zero(a.window().clone(), a.fiber());
    let mut power = a.clone();
    let mut k = 1;
    loop {
        let c = series.coefficient(k);
        if c != Complex64::default() {
            sum = sum.add(&power.scale(c))?;
        }
        let tail = series.tail(k, norm);
        if tail < tol || power.is_zero() {
            let profile = profile_unchecked(&sum, a.window().margin())?;
            return Ok(SeriesApplication { operator: sum, terms: k, tail_bound: tail, profile });
        }
        if k as usize >= MAX_TERMS {
            return Err(Error::NonConvergence { iterations: k as usize });
        }
        power = power.compose(a)?;
        k += 1;
    }
}
