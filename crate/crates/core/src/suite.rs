//! The acceptance suite: twelve seeded checks shared by the `acceptance`
//! test target and `coarselab suite run`.

use std::collections::BTreeSet;
use std::io::Write;
use std::sync::Arc;
use std::time::Instant;

use num_complex::Complex64;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::cochain::{continuity_sweep, pair, CoarseCochain, CoboundaryConvention, EdgeFieldSampler};
use crate::cyclic::{chain_map_check, chi, random_tensor};
use crate::demo::demo_winding;
use crate::error::{Error, Result};
use crate::fill::{
    contractibility_profile, fill_chain, fill_tuple, roundtrip_identity, sample_tuple, verify_crucial_estimate,
    SimplicialChain,
};
use crate::io::{cell, write_csv};
use crate::opalg::{check_power_estimate, check_product_estimate, neumann_inverse, op_norm, random_banded};
use crate::scalar::Rational;
use crate::spaces::{PointId, SpaceKind, Window, WindowSpec};
use crate::ufchain::UfChain;

pub const CRITERIA: u32 = 12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SuiteConfig {
    pub seed: u64,
    /// Replaces the margin of every window the suite builds.
    pub margin: Option<u32>,
    /// Criteria to run; empty runs all of them.
    pub only: Vec<u32>,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig { seed: 7, margin: None, only: Vec::new() }
    }
}

impl SuiteConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: SuiteConfig = serde_json::from_str(text)?;
        if let Some(bad) = cfg.only.iter().find(|&&id| id == 0 || id > CRITERIA) {
            return Err(Error::Format(format!("criterion {bad} does not exist (valid: 1..={CRITERIA})")));
        }
        Ok(cfg)
    }

    fn rng(&self, criterion: u32) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.seed.wrapping_mul(0x9e37_79b9_7f4a_7c15) ^ criterion as u64)
    }

    fn window(&self, spec: WindowSpec) -> Result<Arc<Window>> {
        let mut spec = spec;
        if let Some(m) = self.margin {
            spec.margin = m;
        }
        spec.build()
    }

    fn selected(&self, id: u32) -> bool {
        self.only.is_empty() || self.only.contains(&id)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Outcome {
    Pass,
    Fail,
    Error,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CheckResult {
    pub id: u32,
    pub name: String,
    pub outcome: Outcome,
    pub detail: String,
    pub metrics: Vec<(String, f64)>,
    pub seconds: f64,
    pub budget_seconds: f64,
}

impl CheckResult {
    pub fn passed(&self) -> bool {
        self.outcome == Outcome::Pass
    }

    pub fn within_budget(&self) -> bool {
        self.seconds <= self.budget_seconds
    }

    /// `criterion 3 chain-map-identity: PASS (…) [12.1 s of 60 s]`.
    pub fn line(&self) -> String {
        let verdict = match self.outcome {
            Outcome::Pass => "PASS",
            Outcome::Fail => "FAIL",
            Outcome::Error => "ERROR",
        };
        format!(
            "criterion {:>2} {}: {verdict} ({}) [{:.1} s of {} s]",
            self.id, self.name, self.detail, self.seconds, self.budget_seconds
        )
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RunReport {
    pub command: String,
    pub config: SuiteConfig,
    pub checks: Vec<CheckResult>,
    pub seconds: f64,
}

impl RunReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(CheckResult::passed)
    }

    pub fn check(&self, id: u32) -> Option<&CheckResult> {
        self.checks.iter().find(|c| c.id == id)
    }

    /// One row per measured quantity. Timings are left out so that a fixed
    /// seed reproduces the file byte for byte.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut rows = Vec::new();
        for c in &self.checks {
            let outcome = format!("{:?}", c.outcome).to_lowercase();
            if c.metrics.is_empty() {
                rows.push(vec![c.id.to_string(), c.name.clone(), outcome.clone(), String::new(), String::new(), c.detail.clone()]);
            }
            for (i, (metric, value)) in c.metrics.iter().enumerate() {
                let detail = if i == 0 { c.detail.clone() } else { String::new() };
                rows.push(vec![c.id.to_string(), c.name.clone(), outcome.clone(), metric.clone(), cell(*value), detail]);
            }
        }
        write_csv(out, &["criterion", "name", "outcome", "metric", "value", "detail"], &rows)
    }
}

struct Measured {
    pass: bool,
    detail: String,
    metrics: Vec<(String, f64)>,
}

impl Measured {
    fn new(pass: bool, detail: impl Into<String>) -> Self {
        Measured { pass, detail: detail.into(), metrics: Vec::new() }
    }

    fn metric(mut self, name: &str, value: f64) -> Self {
        self.metrics.push((name.to_string(), value));
        self
    }
}

type CheckFn = fn(&SuiteConfig, &mut Scratch) -> Result<Measured>;

/// Work shared between criteria: the tensors of the chain-map check are
/// reused for the cyclic-invariance check.
#[derive(Default)]
struct Scratch {
    tensors: Option<TensorSweep>,
}

struct TensorSweep {
    residual: f64,
    tuples: usize,
    lambda_mismatches: usize,
    count: usize,
}

const CHECKS: [(u32, &str, f64, CheckFn); 12] = [
    (1, "boundary-identities", 5.0, boundary_identities),
    (2, "pairing-adjointness", 5.0, pairing_adjointness),
    (3, "chain-map-identity", 60.0, chain_map_identity),
    (4, "cyclic-invariance", 60.0, cyclic_invariance),
    (5, "product-estimate", 60.0, product_estimate),
    (6, "power-estimate", 60.0, power_estimate),
    (7, "neumann-bound", 60.0, neumann_bound),
    (8, "filling-chain-map", 30.0, filling_chain_map),
    (9, "crucial-estimate", 60.0, crucial_estimate),
    (10, "winding-index", 10.0, winding_index),
    (11, "growth-fits", 30.0, growth_fits),
    (12, "continuity-sweep", 30.0, continuity),
];

/// Runs the selected criteria. Failures and errors of individual checks are
/// recorded in the report; only configuration problems are returned as
/// errors.
pub fn run_suite(config: &SuiteConfig) -> Result<RunReport> {
    if let Some(bad) = config.only.iter().find(|&&id| id == 0 || id > CRITERIA) {
        return Err(Error::Format(format!("criterion {bad} does not exist (valid: 1..={CRITERIA})")));
    }
    let start = Instant::now();
    let mut scratch = Scratch::default();
    let mut checks = Vec::new();
    for (id, name, budget, f) in CHECKS {
        if !config.selected(id) {
            continue;
        }
        let t0 = Instant::now();
        let (outcome, detail, metrics) = match f(config, &mut scratch) {
            Ok(m) => (if m.pass { Outcome::Pass } else { Outcome::Fail }, m.detail, m.metrics),
            Err(e) => (Outcome::Error, e.to_string(), Vec::new()),
        };
        checks.push(CheckResult {
            id,
            name: name.to_string(),
            outcome,
            detail,
            metrics,
            seconds: t0.elapsed().as_secs_f64(),
            budget_seconds: budget,
        });
    }
    Ok(RunReport { command: "suite run".into(), config: config.clone(), checks, seconds: start.elapsed().as_secs_f64() })
}

fn rational(rng: &mut impl Rng) -> Rational {
    Rational::new(rng.random_range(-9..=9), rng.random_range(1..=9))
}

fn pick<T: Copy>(items: &[T], rng: &mut impl Rng) -> T {
    items[rng.random_range(0..items.len())]
}

fn random_rational_chain(window: &Arc<Window>, points: &[PointId], degree: usize, rng: &mut impl Rng) -> Result<UfChain<Rational>> {
    let mut c = UfChain::zero(window.clone(), degree);
    for _ in 0..rng.random_range(1..=6) {
        let tuple = (0..=degree).map(|_| pick(points, rng)).collect();
        c.add_term(tuple, rational(rng))?;
    }
    Ok(c)
}

/// Every tuple over `points` gets a random rational value.
fn random_table(window: &Window, points: &[PointId], degree: usize, rng: &mut impl Rng) -> Result<CoarseCochain<Rational>> {
    let mut values = Vec::new();
    let mut tuple = vec![0usize; degree + 1];
    loop {
        let coords = tuple.iter().map(|&i| window.coords(points[i]).to_vec()).collect();
        values.push((coords, rational(rng)));
        let Some(slot) = tuple.iter().rposition(|&i| i + 1 < points.len()) else { break };
        tuple[slot] += 1;
        tuple[slot + 1..].fill(0);
    }
    CoarseCochain::table(degree, values)
}

fn near_points(window: &Window, radius: i64) -> Vec<PointId> {
    window.safe_points().into_iter().filter(|&p| window.coords(p).iter().all(|x| x.abs() <= radius)).collect()
}

fn boundary_identities(cfg: &SuiteConfig, _: &mut Scratch) -> Result<Measured> {
    let mut rng = cfg.rng(1);
    let window = cfg.window(WindowSpec::zd(2, 6, 2))?;
    let all: Vec<PointId> = window.points().collect();
    let cluster = near_points(&window, 1);
    let cluster = &cluster[..4.min(cluster.len())];
    let mut failures = 0;
    let mut instances = 0;
    for q in 0..=3usize {
        for _ in 0..500 {
            instances += 1;
            let chain = random_rational_chain(&window, &all, q + 2, &mut rng)?;
            if !chain.boundary()?.boundary()?.is_zero() {
                failures += 1;
            }
            let phi = random_table(&window, cluster, q, &mut rng)?;
            let tuple: Vec<PointId> = (0..q + 3).map(|_| pick(cluster, &mut rng)).collect();
            for convention in [CoboundaryConvention::Full, CoboundaryConvention::SkipFirst] {
                let dd = phi.clone().coboundary_with(convention).coboundary_with(convention);
                if dd.evaluate(&window, &tuple)? != Rational::from_integer(0) {
                    failures += 1;
                }
            }
        }
    }
    Ok(Measured::new(failures == 0, format!("{instances} instances over q = 0..=3, {failures} nonzero"))
        .metric("instances", instances as f64)
        .metric("failures", failures as f64))
}

fn pairing_adjointness(cfg: &SuiteConfig, _: &mut Scratch) -> Result<Measured> {
    let mut rng = cfg.rng(2);
    let window = cfg.window(WindowSpec::zd(2, 8, 3))?;
    let points = near_points(&window, 1);
    let points = &points[..5.min(points.len())];
    let mut failures = 0;
    for i in 0..200 {
        let q = i % 3;
        let phi = random_table(&window, points, q, &mut rng)?;
        let c = random_rational_chain(&window, points, q + 1, &mut rng)?;
        if pair(&phi.clone().coboundary(), &c)? != pair(&phi, &c.boundary()?)? {
            failures += 1;
        }
        // δψ is closed; in degree 1 add the jump cocycle as well.
        let mut closed = phi.coboundary();
        if q == 0 {
            closed = closed.sum(CoarseCochain::jump(0, 0))?;
        }
        let b = random_rational_chain(&window, points, q + 2, &mut rng)?;
        if pair(&closed, &c.add(&b.boundary()?)?)? != pair(&closed, &c)? {
            failures += 1;
        }
    }
    Ok(Measured::new(failures == 0, format!("200 instances, {failures} mismatches")).metric("failures", failures as f64))
}

fn tensor_sweep(cfg: &SuiteConfig) -> Result<TensorSweep> {
    let mut rng = cfg.rng(3);
    let mut sweep = TensorSweep { residual: 0.0, tuples: 0, lambda_mismatches: 0, count: 0 };
    for (dim, props) in [(1usize, &[1u32, 2, 3][..]), (2, &[1, 2][..])] {
        let window = cfg.window(WindowSpec::zd(dim, 32, 12))?;
        for degree in [1usize, 2] {
            for _ in 0..50 {
                let factor_props: Vec<u32> = (0..=degree).map(|_| pick(props, &mut rng)).collect();
                let t = random_tensor(&window, degree, 2, &factor_props, rng.random())?;
                let rep = chain_map_check(&t)?;
                sweep.residual = sweep.residual.max(rep.residual);
                sweep.tuples += rep.tuples;
                let (a, b) = (chi(&t)?, chi(&t.lambda())?);
                if a.len() != b.len() || a.terms().any(|(tuple, v)| b.coefficient(tuple) != *v) {
                    sweep.lambda_mismatches += 1;
                }
                sweep.count += 1;
            }
        }
    }
    Ok(sweep)
}

fn cached_sweep<'a>(cfg: &SuiteConfig, scratch: &'a mut Scratch) -> Result<&'a TensorSweep> {
    if scratch.tensors.is_none() {
        scratch.tensors = Some(tensor_sweep(cfg)?);
    }
    Ok(scratch.tensors.as_ref().unwrap())
}

fn chain_map_identity(cfg: &SuiteConfig, scratch: &mut Scratch) -> Result<Measured> {
    let s = cached_sweep(cfg, scratch)?;
    Ok(Measured::new(s.residual < 1e-9, format!("{} tensors, sup residual {:.3e} < 1e-9", s.count, s.residual))
        .metric("tensors", s.count as f64)
        .metric("residual", s.residual)
        .metric("tuples", s.tuples as f64))
}

fn cyclic_invariance(cfg: &SuiteConfig, scratch: &mut Scratch) -> Result<Measured> {
    let s = cached_sweep(cfg, scratch)?;
    Ok(Measured::new(
        s.lambda_mismatches == 0,
        format!("{} tensors, {} not bitwise invariant", s.count, s.lambda_mismatches),
    )
    .metric("tensors", s.count as f64)
    .metric("mismatches", s.lambda_mismatches as f64))
}

fn random_operator(window: &Arc<Window>, rng: &mut impl Rng) -> crate::opalg::BandedOperator {
    random_banded(window, rng.random(), rng.random_range(1..=3), rng.random_range(0.3..0.9), 1)
}

fn product_estimate(cfg: &SuiteConfig, _: &mut Scratch) -> Result<Measured> {
    let mut rng = cfg.rng(5);
    let window = cfg.window(WindowSpec::zd(1, 32, 16))?;
    let mut failures = 0;
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let a = random_operator(&window, &mut rng);
        let b = random_operator(&window, &mut rng);
        let rep = check_product_estimate(&a, &b, 16)?;
        failures += rep.rows.iter().filter(|r| !r.pass).count();
        worst = rep.rows.iter().filter(|r| r.rhs > 0.0).map(|r| r.lhs / r.rhs).fold(worst, f64::max);
    }
    Ok(Measured::new(failures == 0, format!("100 pairs, R = 0,2,…,16, {failures} violations, worst lhs/rhs {worst:.3}"))
        .metric("violations", failures as f64)
        .metric("worst_ratio", worst))
}

fn power_estimate(cfg: &SuiteConfig, _: &mut Scratch) -> Result<Measured> {
    let mut rng = cfg.rng(6);
    let window = cfg.window(WindowSpec::zd(1, 32, 16))?;
    let mut failures = 0;
    let mut worst: f64 = 0.0;
    for _ in 0..50 {
        let a = random_operator(&window, &mut rng);
        let norm = op_norm(&a, crate::opalg::DEFAULT_TOL)?;
        let a = a.scale(Complex64::new(1.0 / norm, 0.0));
        let rep = check_power_estimate(&a, 4, 16)?;
        failures += rep.rows.iter().filter(|r| !r.pass).count();
        worst = rep.rows.iter().filter(|r| r.rhs > 0.0).map(|r| r.lhs / r.rhs).fold(worst, f64::max);
    }
    Ok(Measured::new(failures == 0, format!("50 operators, n ≤ 4, R ≤ 16, {failures} violations, worst lhs/rhs {worst:.3}"))
        .metric("violations", failures as f64)
        .metric("worst_ratio", worst))
}

fn neumann_bound(cfg: &SuiteConfig, _: &mut Scratch) -> Result<Measured> {
    let mut rng = cfg.rng(7);
    let window = cfg.window(WindowSpec::zd(1, 32, 16))?;
    let mut failures = 0;
    let mut worst: f64 = 0.0;
    let mut residual: f64 = 0.0;
    for n in 1..=3u32 {
        let threshold = 1.0 / (2f64.powi(n as i32 + 1) * 5.0);
        for _ in 0..50 {
            let b = random_operator(&window, &mut rng);
            let norm = op_norm(&b, crate::opalg::DEFAULT_TOL)?;
            let target = threshold * rng.random_range(0.1..0.95);
            let b = b.scale(Complex64::new(target / norm, 0.0));
            let (_, rep) = neumann_inverse(&b, n, 1e-13)?;
            if !rep.pass {
                failures += 1;
            }
            worst = worst.max(rep.lhs / rep.rhs).max(rep.lhs_sup / rep.rhs_sup);
            residual = residual.max(rep.residual);
        }
    }
    Ok(Measured::new(failures == 0, format!("150 operators, {failures} violations, worst lhs/rhs {worst:.3}"))
        .metric("violations", failures as f64)
        .metric("worst_ratio", worst)
        .metric("inverse_residual", residual))
}

/// A random face of a Kuhn simplex: walk along a random permutation of the
/// axes from a random base vertex and keep `degree + 1` of the vertices.
fn random_kuhn_simplex(window: &Window, base: &[PointId], degree: usize, rng: &mut impl Rng) -> Option<Vec<PointId>> {
    let dim = window.coords(base[0]).len();
    let mut axes: Vec<usize> = (0..dim).collect();
    axes.shuffle(rng);
    let mut walk = vec![window.coords(pick(base, rng)).to_vec()];
    for &axis in &axes {
        let mut next = walk.last().unwrap().clone();
        next[axis] += 1;
        walk.push(next);
    }
    let mut keep: Vec<usize> = (0..walk.len()).collect();
    keep.shuffle(rng);
    keep.truncate(degree + 1);
    keep.iter().map(|&i| window.lookup(&walk[i])).collect()
}

fn fillable_tuple(window: &Arc<Window>, degree: usize, length: u32, rng: &mut impl Rng) -> Option<Vec<PointId>> {
    (0..50).find_map(|_| {
        let tuple = sample_tuple(window, degree, length, rng)?;
        fill_tuple(window, &tuple).is_ok().then_some(tuple)
    })
}

fn filling_chain_map(cfg: &SuiteConfig, _: &mut Scratch) -> Result<Measured> {
    let mut rng = cfg.rng(8);
    let windows = [cfg.window(WindowSpec::zd(1, 12, 4))?, cfg.window(WindowSpec::zd(2, 10, 4))?];
    let mut failures = 0;
    let mut skipped = 0;
    let mut terms = 0;
    for i in 0..200 {
        let window = &windows[i % 2];
        let dim = i % 2 + 1;
        let q = i / 2 % 2 + 1;
        let mut chain: UfChain<i64> = UfChain::zero(window.clone(), q);
        for _ in 0..rng.random_range(1..=4) {
            let length = rng.random_range(1..=4);
            match fillable_tuple(window, q, length, &mut rng) {
                Some(t) => chain.add_term(t, rng.random_range(-3..=3))?,
                None => skipped += 1,
            }
        }
        terms += chain.len();
        if fill_chain(&chain)?.boundary()? != fill_chain(&chain.boundary()?)? {
            failures += 1;
        }
        let degree = i / 2 % 3;
        if degree <= dim {
            let base = near_points(window, 3);
            let mut s = SimplicialChain::zero(window.clone(), degree);
            for _ in 0..rng.random_range(1..=5) {
                if let Some(simplex) = random_kuhn_simplex(window, &base, degree, &mut rng) {
                    s.add_simplex(&simplex, rng.random_range(-3..=3))?;
                }
            }
            terms += s.len();
            if !roundtrip_identity(&s)? {
                failures += 1;
            }
        }
    }
    Ok(Measured::new(failures == 0, format!("200 instances with {terms} terms, {failures} mismatches"))
        .metric("failures", failures as f64)
        .metric("terms", terms as f64)
        .metric("skipped_tuples", skipped as f64))
}

fn crucial_estimate(cfg: &SuiteConfig, _: &mut Scratch) -> Result<Measured> {
    let mut rng = cfg.rng(9);
    let window = cfg.window(WindowSpec::zd(2, 24, 4))?;
    let growth = window.fit_growth()?;
    let mut failures = 0;
    let mut worst: f64 = 0.0;
    let mut m = Measured::new(true, "").metric("D", growth.coefficient).metric("M", growth.exponent);
    for q in [1usize, 2] {
        let contraction = contractibility_profile(&window, q, 10, 200, rng.random())?.fit;
        m = m
            .metric(&format!("C_q{q}"), contraction.coefficient)
            .metric(&format!("N_q{q}"), contraction.exponent);
        for _ in 0..100 {
            let mut chain: UfChain<Complex64> = UfChain::zero(window.clone(), q);
            for _ in 0..rng.random_range(1..=12) {
                let length = rng.random_range(1..=8u32);
                let Some(tuple) = fillable_tuple(&window, q, length, &mut rng) else { continue };
                let decay = (length as f64).powi(rng.random_range(0..=2));
                chain.add_term(tuple, Complex64::new(rng.random_range(-1.0..1.0) / decay, 0.0))?;
            }
            let rep = verify_crucial_estimate(&chain, &growth, &contraction)?;
            if !rep.pass {
                failures += 1;
            }
            if rep.rhs > 0.0 {
                worst = worst.max(rep.lhs / rep.rhs);
            }
        }
    }
    m.pass = failures == 0;
    m.detail = format!("200 chains, q ∈ {{1,2}}, {failures} violations, worst lhs/rhs {worst:.3e}");
    Ok(m.metric("violations", failures as f64).metric("worst_ratio", worst))
}

fn winding_index(cfg: &SuiteConfig, _: &mut Scratch) -> Result<Measured> {
    let margin = cfg.margin.unwrap_or(20);
    let reports = (1..=4).map(|k| demo_winding(k, 32, margin)).collect::<Result<Vec<_>>>()?;
    let ratios: Vec<Complex64> = reports.iter().map(|r| r.ratio.unwrap_or_default()).collect();
    let spread = ratios.iter().map(|r| (r - ratios[0]).norm()).fold(0.0, f64::max);
    let raw_error = (reports[0].raw + 1.0).norm();
    let indices_ok = reports.iter().all(|r| r.oracle_index == -r.k);
    let mut m = Measured::new(
        spread <= 1e-9 && raw_error <= 1e-10 && indices_ok,
        format!("ratio spread {spread:.2e} ≤ 1e-9, |raw(k=1) + 1| = {raw_error:.2e} ≤ 1e-10"),
    )
    .metric("ratio_spread", spread)
    .metric("raw_k1_error", raw_error);
    for r in &reports {
        m = m.metric(&format!("index_k{}", r.k), r.oracle_index as f64).metric(&format!("raw_k{}", r.k), r.raw.re);
    }
    Ok(m)
}

/// Heisenberg window radius used for the growth fit; the ball has 141 225
/// elements, well inside the default point budget.
pub const HEISENBERG_GROWTH_RADIUS: u32 = 24;

fn growth_fits(cfg: &SuiteConfig, _: &mut Scratch) -> Result<Measured> {
    let line = cfg.window(WindowSpec::zd(1, 16, 0))?.fit_growth()?;
    let plane = cfg.window(WindowSpec::zd(2, 16, 0))?.fit_growth()?;
    let heisenberg = cfg.window(WindowSpec::new(SpaceKind::Heisenberg3, HEISENBERG_GROWTH_RADIUS, 0))?.fit_growth()?;
    let tree = cfg.window(WindowSpec::new(SpaceKind::Tree3, 10, 0))?.fit_growth()?;
    let pass = (line.exponent - 1.0).abs() <= 0.2
        && (plane.exponent - 2.0).abs() <= 0.2
        && (3.2..=4.8).contains(&heisenberg.exponent)
        && tree.exponential_flag
        && !line.exponential_flag
        && !plane.exponential_flag
        && !heisenberg.exponential_flag;
    Ok(Measured::new(
        pass,
        format!(
            "M(ℤ) = {:.3}, M(ℤ²) = {:.3}, M(H₃, W = {HEISENBERG_GROWTH_RADIUS}) = {:.3}, tree exponential = {}",
            line.exponent, plane.exponent, heisenberg.exponent, tree.exponential_flag
        ),
    )
    .metric("M_z1", line.exponent)
    .metric("M_z2", plane.exponent)
    .metric("M_heisenberg", heisenberg.exponent)
    .metric("tree_exponential", tree.exponential_flag as u8 as f64))
}

fn continuity(cfg: &SuiteConfig, _: &mut Scratch) -> Result<Measured> {
    let sampler = EdgeFieldSampler::new(cfg.seed, 3);
    let phi = CoarseCochain::jump(0, 0);
    let mut m = Measured::new(true, "");
    let mut maxima = Vec::new();
    for w in [16u32, 24, 32] {
        let window = cfg.window(WindowSpec::zd(1, w, 2))?;
        let rep = continuity_sweep(&phi, sampler.n, 60, &|t| Ok(sampler.sample(&window, t)))?;
        m = m.metric(&format!("max_ratio_W{w}"), rep.max_ratio);
        maxima.push(rep.max_ratio);
    }
    let distinct: BTreeSet<u64> = maxima.iter().map(|x| x.to_bits()).collect();
    m.pass = maxima[0] > 0.0 && maxima[2] <= 1.2 * maxima[0];
    m.detail = format!(
        "max ratio {:.4} / {:.4} / {:.4} at W = 16 / 24 / 32 ({} distinct)",
        maxima[0],
        maxima[1],
        maxima[2],
        distinct.len()
    );
    Ok(m)
}
