//! Cyclic tensors over the operator algebra, the Chern–Connes characters and
//! the rough character `χ` into uniformly finite chains.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::cochain::{pair, CoarseCochain};
use crate::error::{Error, Result};
use crate::opalg::{op_norm, random_banded, BandedOperator, DEFAULT_TOL};
use crate::scalar::{factorial, permutation_sign, permutations};
use crate::spaces::{PointId, Window};
use crate::ufchain::UfChain;

/// Antisymmetrisation is exact up to this degree (24 permutations).
pub const MAX_DEGREE: usize = 3;

/// One summand `weight · A₀ ⊗ … ⊗ A_n`.
#[derive(Debug, Clone)]
pub struct TensorTerm {
    pub weight: Complex64,
    pub ops: Vec<Arc<BandedOperator>>,
}

/// A formal sum of `(n+1)`-fold tensors of operators on one window.
///
/// Weights are numeric; a symbolic factor `(2πi)^p` is carried separately
/// so that pairings can be reported with and without it.
#[derive(Debug, Clone)]
pub struct CyclicTensor {
    window: Arc<Window>,
    fiber: usize,
    degree: usize,
    terms: Vec<TensorTerm>,
    two_pi_i_power: u32,
}

impl CyclicTensor {
    pub fn zero(window: Arc<Window>, fiber: usize, degree: usize) -> Self {
        CyclicTensor { window, fiber, degree, terms: Vec::new(), two_pi_i_power: 0 }
    }

    /// Tensor with a single term; the window and fiber are taken from the
    /// first operator.
    pub fn single(weight: Complex64, ops: Vec<Arc<BandedOperator>>) -> Result<Self> {
        let first = ops.first().ok_or_else(|| Error::Empty { module: "cyclic", detail: "tensor term without factors".into() })?;
        let mut t = Self::zero(first.window().clone(), first.fiber(), ops.len() - 1);
        t.push(weight, ops)?;
        Ok(t)
    }

    pub fn push(&mut self, weight: Complex64, ops: Vec<Arc<BandedOperator>>) -> Result<()> {
        if ops.len() != self.degree + 1 {
            return Err(Error::DegreeMismatch {
                module: "cyclic",
                expected: self.degree,
                got: ops.len().saturating_sub(1),
            });
        }
        for op in &ops {
            if **op.window() != *self.window {
                return Err(Error::OperatorMismatch("tensor factors live on different windows".into()));
            }
            if op.fiber() != self.fiber {
                return Err(Error::OperatorMismatch(format!(
                    "tensor factor has fiber {}, expected {}",
                    op.fiber(),
                    self.fiber
                )));
            }
        }
        self.terms.push(TensorTerm { weight, ops });
        Ok(())
    }

    pub fn with_two_pi_i_power(mut self, power: u32) -> Self {
        self.two_pi_i_power = power;
        self
    }

    pub fn window(&self) -> &Arc<Window> {
        &self.window
    }

    pub fn fiber(&self) -> usize {
        self.fiber
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn terms(&self) -> &[TensorTerm] {
        &self.terms
    }

    /// Exponent `p` of the symbolic factor `(2πi)^p`.
    pub fn two_pi_i_power(&self) -> u32 {
        self.two_pi_i_power
    }

    /// `(2πi)^p` as a number.
    pub fn symbolic_factor(&self) -> Complex64 {
        Complex64::new(0.0, 2.0 * PI).powu(self.two_pi_i_power)
    }

    /// Largest total propagation `Σ_i prop(A_i)` over terms.
    pub fn total_propagation(&self) -> u32 {
        self.terms.iter().map(|t| t.ops.iter().map(|a| a.propagation()).sum()).max().unwrap_or(0)
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.degree != other.degree {
            return Err(Error::DegreeMismatch { module: "cyclic", expected: self.degree, got: other.degree });
        }
        if self.two_pi_i_power != other.two_pi_i_power {
            return Err(Error::precondition("cyclic", "tensors carry different powers of 2πi"));
        }
        let mut out = self.clone();
        for t in &other.terms {
            out.push(t.weight, t.ops.clone())?;
        }
        Ok(out)
    }

    pub fn scale(&self, z: Complex64) -> Self {
        let mut out = self.clone();
        out.terms.iter_mut().for_each(|t| t.weight *= z);
        out
    }

    /// `λ(a₀⊗…⊗a_n) = (−1)^n a_n⊗a₀⊗…⊗a_{n−1}`.
    pub fn lambda(&self) -> Self {
        let sign = if self.degree.is_multiple_of(2) { 1.0 } else { -1.0 };
        let mut out = self.clone();
        for t in &mut out.terms {
            t.ops.rotate_right(1);
            t.weight *= sign;
        }
        out
    }

    /// Hochschild boundary `b`, of degree `n − 1`.
    pub fn hochschild_b(&self) -> Result<Self> {
        let n = self.degree;
        if n == 0 {
            return Err(Error::precondition("cyclic", "the Hochschild boundary needs degree ≥ 1"));
        }
        let mut out = Self::zero(self.window.clone(), self.fiber, n - 1).with_two_pi_i_power(self.two_pi_i_power);
        for t in &self.terms {
            for j in 0..n {
                let mut ops = Vec::with_capacity(n);
                ops.extend_from_slice(&t.ops[..j]);
                ops.push(Arc::new(t.ops[j].compose(&t.ops[j + 1])?));
                ops.extend_from_slice(&t.ops[j + 2..]);
                let w = if j % 2 == 0 { t.weight } else { -t.weight };
                out.push(w, ops)?;
            }
            let mut ops = Vec::with_capacity(n);
            ops.push(Arc::new(t.ops[n].compose(&t.ops[0])?));
            ops.extend_from_slice(&t.ops[1..n]);
            let w = if n.is_multiple_of(2) { t.weight } else { -t.weight };
            out.push(w, ops)?;
        }
        Ok(out)
    }
}

/// Even character `(2n)!/n! · (2πi)^n · e^{⊗(2n+1)}`.
pub fn chern0(e: &Arc<BandedOperator>, n: usize) -> Result<CyclicTensor> {
    let defect = op_norm(&e.compose(e)?.sub(e)?, DEFAULT_TOL)?;
    if defect >= 1e-8 {
        return Err(Error::precondition("cyclic", format!("not an idempotent: ‖e² − e‖ = {defect:e}")));
    }
    let weight = (factorial(2 * n as u64) / factorial(n as u64)) as f64;
    Ok(CyclicTensor::single(Complex64::new(weight, 0.0), vec![e.clone(); 2 * n + 1])?.with_two_pi_i_power(n as u32))
}

/// Odd character `(2n+1)!/(n+1)! · (2πi)^{n+1} · ((u⁻¹−1)⊗(u−1))^{⊗(n+1)}`.
pub fn chern1(u: &BandedOperator, u_inv: &BandedOperator, n: usize) -> Result<CyclicTensor> {
    let window = u.window().clone();
    let id = BandedOperator::identity(window, u.fiber());
    for product in [u.compose(u_inv)?, u_inv.compose(u)?] {
        let defect = op_norm(&product.sub(&id)?.safe_compression(), DEFAULT_TOL)?;
        if defect >= 1e-8 {
            return Err(Error::precondition(
                "cyclic",
                format!("inverse check failed on the margin-safe core: defect {defect:e}"),
            ));
        }
    }
    let a = Arc::new(u_inv.sub(&id)?);
    let b = Arc::new(u.sub(&id)?);
    let ops: Vec<_> = (0..n + 1).flat_map(|_| [a.clone(), b.clone()]).collect();
    let weight = (factorial(2 * n as u64 + 1) / factorial(n as u64 + 1)) as f64;
    Ok(CyclicTensor::single(Complex64::new(weight, 0.0), ops)?.with_two_pi_i_power(n as u32 + 1))
}

type TupleKey = [u32; MAX_DEGREE + 1];

/// `tr` of the cyclic block product, multiplied from the lexicographically
/// least rotation of the edge keys so that rotated paths give identical bits.
fn cyclic_trace(edges: &[(u64, u32, u32, &[Complex64])], f: usize) -> Complex64 {
    let k = edges.len();
    let key = |i: usize| (edges[i].0, edges[i].1, edges[i].2);
    let start = (0..k)
        .min_by(|&a, &b| (0..k).map(|i| key((a + i) % k)).cmp((0..k).map(|i| key((b + i) % k))))
        .unwrap();
    if f == 1 {
        let mut acc = edges[start].3[0];
        for i in 1..k {
            acc *= edges[(start + i) % k].3[0];
        }
        return acc;
    }
    let mut acc = edges[start].3.to_vec();
    let mut next = vec![Complex64::default(); f * f];
    for i in 1..k {
        let b = edges[(start + i) % k].3;
        for r in 0..f {
            for c in 0..f {
                next[r * f + c] = (0..f).map(|m| acc[r * f + m] * b[m * f + c]).sum();
            }
        }
        std::mem::swap(&mut acc, &mut next);
    }
    (0..f).map(|i| acc[i * f + i]).sum()
}

fn sort_tuple(tuple: &[PointId]) -> Option<(TupleKey, i64)> {
    let mut order: Vec<usize> = (0..tuple.len()).collect();
    order.sort_by_key(|&i| tuple[i]);
    if order.windows(2).any(|w| tuple[w[0]] == tuple[w[1]]) {
        return None;
    }
    let mut key = [u32::MAX; MAX_DEGREE + 1];
    for (slot, &i) in key.iter_mut().zip(&order) {
        *slot = tuple[i].0;
    }
    Some((key, permutation_sign(&order)))
}

/// Addends of all closed paths whose first point is `start`.
fn paths_from(
    term: &TensorTerm,
    start: PointId,
    keep: &(dyn Fn(PointId) -> bool + Sync),
    scale: f64,
    out: &mut Vec<(TupleKey, Complex64)>,
) {
    let n = term.ops.len() - 1;
    let f = term.ops[0].fiber();
    let mut points = vec![start; n + 1];
    let mut edges: Vec<(u64, u32, u32, &[Complex64])> = Vec::with_capacity(n + 1);
    fn walk<'a>(
        term: &'a TensorTerm,
        k: usize,
        from: PointId,
        start: PointId,
        points: &mut Vec<PointId>,
        edges: &mut Vec<(u64, u32, u32, &'a [Complex64])>,
        keep: &(dyn Fn(PointId) -> bool + Sync),
        f: usize,
        scale: f64,
        out: &mut Vec<(TupleKey, Complex64)>,
    ) {
        let n = term.ops.len() - 1;
        let op = &term.ops[k];
        if k == n {
            if let Some(block) = op.block(from, start) {
                edges.push((op.fingerprint(), from.0, start.0, block));
                points[n] = start;
                if let Some((key, sign)) = sort_tuple(points) {
                    let v = term.weight * cyclic_trace(edges, f);
                    out.push((key, v * (sign as f64 * scale)));
                }
                edges.pop();
            }
            return;
        }
        for (to, block) in op.row(from) {
            if !keep(to) {
                continue;
            }
            points[k] = to;
            edges.push((op.fingerprint(), from.0, to.0, block));
            walk(term, k + 1, to, start, points, edges, keep, f, scale, out);
            edges.pop();
        }
    }
    walk(term, 0, start, start, &mut points, &mut edges, keep, f, scale, out);
}

/// `χ(t)(ȳ) = 1/(n+1)! Σ_σ (−1)^σ tr(A₀ y_{σ(0)} ⋯ A_n y_{σ(n)})` on every
/// tuple of points accepted by `keep`.
fn chi_filtered(t: &CyclicTensor, keep: &(dyn Fn(PointId) -> bool + Sync)) -> Result<UfChain> {
    let n = t.degree;
    if n > MAX_DEGREE {
        return Err(Error::precondition("cyclic", format!("χ is implemented up to degree {MAX_DEGREE}")));
    }
    let scale = 1.0 / factorial(n as u64 + 1) as f64;
    let window = &t.window;
    let starts: Vec<PointId> = window.points().filter(|&p| keep(p)).collect();
    let mut addends: Vec<(TupleKey, Complex64)> = t
        .terms
        .par_iter()
        .flat_map_iter(|term| {
            starts.iter().flat_map(move |&s| {
                let mut out = Vec::new();
                paths_from(term, s, keep, scale, &mut out);
                out
            })
        })
        .collect();
    addends.par_sort_unstable_by(|a, b| {
        a.0.cmp(&b.0).then(a.1.re.total_cmp(&b.1.re)).then(a.1.im.total_cmp(&b.1.im))
    });
    let mut chain = UfChain::zero(window.clone(), n);
    let perms = permutations(n + 1);
    let mut i = 0;
    while i < addends.len() {
        let key = addends[i].0;
        let mut sum = Complex64::default();
        while i < addends.len() && addends[i].0 == key {
            sum += addends[i].1;
            i += 1;
        }
        if sum == Complex64::default() {
            continue;
        }
        for (perm, sign) in &perms {
            let tuple: Vec<PointId> = perm.iter().map(|&j| PointId(key[j])).collect();
            chain.add_unchecked(tuple, sum * *sign as f64);
        }
    }
    Ok(chain)
}

fn check_margin(t: &CyclicTensor) -> Result<()> {
    let total = t.total_propagation();
    let margin = t.window.margin();
    if total > margin {
        return Err(Error::margin(
            "cyclic",
            format!("total propagation {total} of the tensor exceeds the window margin {margin}"),
        ));
    }
    Ok(())
}

/// The rough character on margin-safe tuples. The symbolic `(2πi)^p` is not
/// applied.
pub fn chi(t: &CyclicTensor) -> Result<UfChain> {
    check_margin(t)?;
    let w = t.window.clone();
    chi_filtered(t, &move |p| w.is_safe(p))
}

/// `χ` on all tuples of the window, edge effects included.
pub fn chi_unrestricted(t: &CyclicTensor) -> Result<UfChain> {
    chi_filtered(t, &|_| true)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChainMapReport {
    /// `sup |∂χ(t) − χ(bt)|` over margin-safe tuples.
    pub residual: f64,
    pub tuples: usize,
}

/// Compares `∂χ(t)` with `χ(b t)` on margin-safe tuples.
pub fn chain_map_check(t: &CyclicTensor) -> Result<ChainMapReport> {
    check_margin(t)?;
    let lhs = chi_unrestricted(t)?.boundary()?;
    let rhs = chi(&t.hochschild_b()?)?;
    let window = t.window.clone();
    let mut residual = 0.0f64;
    let mut tuples = 0;
    let safe = |tuple: &Vec<PointId>| tuple.iter().all(|&p| window.is_safe(p));
    for (tuple, v) in lhs.terms().filter(|(tp, _)| safe(tp)) {
        residual = residual.max((v - rhs.coefficient(tuple)).norm());
        tuples += 1;
    }
    for (tuple, v) in rhs.terms() {
        if lhs.coefficient(tuple) == Complex64::default() {
            residual = residual.max(v.norm());
            tuples += 1;
        }
    }
    Ok(ChainMapReport { residual, tuples })
}

/// `⟨φ, χ(t)⟩` without and with the symbolic factor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CharacterPairing {
    pub raw: Complex64,
    pub two_pi_i_power: u32,
    /// `raw · (2πi)^p`.
    pub value: Complex64,
}

pub fn character_pairing(phi: &CoarseCochain, t: &CyclicTensor) -> Result<CharacterPairing> {
    let raw = pair(phi, &chi(t)?)?;
    Ok(CharacterPairing { raw, two_pi_i_power: t.two_pi_i_power, value: raw * t.symbolic_factor() })
}

/// Seeded tensor with `terms` summands whose factors are random banded
/// operators; factor `i` has propagation `propagations[i % len]`.
pub fn random_tensor(
    window: &Arc<Window>,
    degree: usize,
    terms: usize,
    propagations: &[u32],
    seed: u64,
) -> Result<CyclicTensor> {
    if propagations.is_empty() {
        return Err(Error::Empty { module: "cyclic", detail: "no propagations given".into() });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut t = CyclicTensor::zero(window.clone(), 1, degree);
    for _ in 0..terms {
        let ops = (0..=degree)
            .map(|i| {
                let prop = propagations[i % propagations.len()];
                Arc::new(random_banded(window, rng.random(), prop, 0.7, 1))
            })
            .collect();
        let weight = Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        t.push(weight, ops)?;
    }
    Ok(t)
}
