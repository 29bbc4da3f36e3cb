//! The filling map from uniformly finite chains to simplicial chains of the
//! Kuhn triangulation of ℤ^d, and the numerical check of the filling
//! estimate.
//!
//! A Kuhn simplex is a chain `v₀ < v₁ < … < v_k` of lattice points whose
//! top minus bottom is a 0/1 vector. Fillings:
//!
//! * degree 0: the point itself;
//! * degree 1: a Kuhn edge is its own filling; otherwise the axis-ordered
//!   staircase path (coordinate 0 first);
//! * degree 2: a Kuhn triangle is its own filling; otherwise the cone from
//!   `y₀` over the loop `P(y₁,y₂) − P(y₀,y₂) + P(y₀,y₁)`, assembled from
//!   ladders of unit squares between neighbouring staircases.
//!
//! Every filling lies in the bounding box of its tuple.

use std::collections::BTreeMap;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fit::PowerFit;
use crate::scalar::{permutation_sign, Coefficient};
use crate::spaces::{GrowthFit, Metric, PointId, SpaceKind, Window};
use crate::ufchain::UfChain;

type Coords = Vec<i64>;
type Accumulator = BTreeMap<Vec<Coords>, i64>;

/// An integer-coefficient chain of oriented Kuhn simplices. Keys are vertex
/// lists in increasing order.
#[derive(Clone, Debug, PartialEq)]
pub struct SimplicialChain<K: Coefficient = i64> {
    chain: UfChain<K>,
}

impl<K: Coefficient> SimplicialChain<K> {
    pub fn zero(window: Arc<Window>, degree: usize) -> Self {
        SimplicialChain { chain: UfChain::zero(window, degree) }
    }

    /// Add `coef · [v₀,…,v_q]` for a Kuhn simplex given in any vertex order.
    pub fn add_simplex(&mut self, vertices: &[PointId], coef: K) -> Result<()> {
        let window = self.chain.window().clone();
        let coords: Vec<Coords> = vertices.iter().map(|&p| window.coords(p).to_vec()).collect();
        if !is_kuhn_simplex(&coords) {
            return Err(Error::precondition("fill", format!("{coords:?} is not a Kuhn simplex")));
        }
        let (sorted, sign) = canonical(&coords);
        let key = sorted.iter().map(|c| window.lookup(c).unwrap()).collect();
        let coef = if sign > 0 { coef } else { -coef };
        self.chain.add_term(key, coef)
    }

    pub fn degree(&self) -> usize {
        self.chain.degree()
    }

    pub fn window(&self) -> &Arc<Window> {
        self.chain.window()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<PointId>, &K)> {
        self.chain.terms()
    }

    pub fn len(&self) -> usize {
        self.chain.len()
    }

    pub fn is_empty(&self) -> bool {
        self.chain.is_zero()
    }

    pub fn is_zero(&self) -> bool {
        self.chain.is_zero()
    }

    pub fn coefficient(&self, simplex: &[PointId]) -> K {
        self.chain.coefficient(simplex)
    }

    /// Faces of sorted simplices are sorted, so the chain boundary is again
    /// canonical.
    pub fn boundary(&self) -> Result<Self> {
        Ok(SimplicialChain { chain: self.chain.boundary()? })
    }

    /// `sup |coef|`: the L∞ chain norm.
    pub fn norm_inf(&self) -> f64 {
        self.chain.norm_inf_n(0)
    }

    /// Each simplex viewed as the tuple of its vertices.
    pub fn inclusion(&self) -> UfChain<K> {
        self.chain.clone()
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        Ok(SimplicialChain { chain: self.chain.add(&other.chain)? })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        Ok(SimplicialChain { chain: self.chain.sub(&other.chain)? })
    }

    pub fn vertices(&self) -> impl Iterator<Item = PointId> + '_ {
        self.chain.terms().flat_map(|(t, _)| t.iter().copied())
    }

    fn from_accumulator(window: &Arc<Window>, degree: usize, acc: Accumulator, scale: &K, tuple: &str) -> Result<Self> {
        let mut out = Self::zero(window.clone(), degree);
        for (simplex, coef) in acc {
            let mut key = Vec::with_capacity(simplex.len());
            for v in &simplex {
                key.push(window.lookup(v).ok_or_else(|| {
                    Error::margin(
                        "fill",
                        format!("filling of {tuple} needs vertex {v:?}, which is outside the window"),
                    )
                })?);
            }
            out.chain.add_unchecked(key, scale.clone() * K::from_i64(coef));
        }
        Ok(out)
    }
}

fn canonical(vertices: &[Coords]) -> (Vec<Coords>, i64) {
    let mut order: Vec<usize> = (0..vertices.len()).collect();
    order.sort_by(|&i, &j| vertices[i].cmp(&vertices[j]));
    let sign = permutation_sign(&order);
    (order.iter().map(|&i| vertices[i].clone()).collect(), sign)
}

fn is_kuhn_simplex(vertices: &[Coords]) -> bool {
    let (sorted, _) = canonical(vertices);
    for pair in sorted.windows(2) {
        if pair[0] == pair[1] || pair[0].iter().zip(&pair[1]).any(|(a, b)| b < a) {
            return false;
        }
    }
    let (first, last) = (&sorted[0], &sorted[sorted.len() - 1]);
    first.iter().zip(last).all(|(a, b)| b - a <= 1)
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
enum EdgeKind {
    Axis,
    Diagonal,
}

/// `Some(kind)` when `{x, y}` is an edge of the triangulation.
fn kuhn_edge(x: &[i64], y: &[i64]) -> Option<EdgeKind> {
    let diff: Vec<i64> = x.iter().zip(y).map(|(a, b)| b - a).collect();
    let up = diff.iter().all(|&d| d == 0 || d == 1);
    let down = diff.iter().all(|&d| d == 0 || d == -1);
    let moved = diff.iter().filter(|&&d| d != 0).count();
    match (up || down, moved) {
        (_, 0) | (false, _) => None,
        (true, 1) => Some(EdgeKind::Axis),
        (true, _) => Some(EdgeKind::Diagonal),
    }
}

/// Vertices of the staircase from `a` to `b`, moving coordinate 0 first.
fn staircase(a: &[i64], b: &[i64]) -> Vec<Coords> {
    let mut cur = a.to_vec();
    let mut out = vec![cur.clone()];
    for k in 0..a.len() {
        let step = (b[k] - cur[k]).signum();
        while cur[k] != b[k] {
            cur[k] += step;
            out.push(cur.clone());
        }
    }
    out
}

fn add_simplex(acc: &mut Accumulator, vertices: Vec<Coords>, coef: i64) {
    if coef == 0 {
        return;
    }
    let (sorted, sign) = canonical(&vertices);
    if sorted.windows(2).any(|p| p[0] == p[1]) {
        return;
    }
    let value = acc.get(&sorted).copied().unwrap_or(0) + sign * coef;
    if value == 0 {
        acc.remove(&sorted);
    } else {
        acc.insert(sorted, value);
    }
}

/// The degree-1 filling `P(a, b)`.
fn add_path(acc: &mut Accumulator, a: &[i64], b: &[i64], coef: i64) {
    if a == b {
        return;
    }
    if kuhn_edge(a, b).is_some() {
        add_simplex(acc, vec![a.to_vec(), b.to_vec()], coef);
        return;
    }
    for step in staircase(a, b).windows(2) {
        add_simplex(acc, step.to_vec(), coef);
    }
}

/// For a diagonal Kuhn edge `(x, y)`: triangles `(x, v_t, v_{t+1})` over the
/// staircase, with boundary `Stair(x,y) − (x,y)`. Zero otherwise.
fn add_fan(acc: &mut Accumulator, x: &[i64], y: &[i64], coef: i64) {
    if kuhn_edge(x, y) != Some(EdgeKind::Diagonal) {
        return;
    }
    let stair = staircase(x, y);
    for t in 1..stair.len() - 1 {
        add_simplex(acc, vec![x.to_vec(), stair[t].clone(), stair[t + 1].clone()], coef);
    }
}

/// Fill the unit square with boundary `(s0,s1)+(s1,s2)+(s2,s3)+(s3,s0)`,
/// cut along its min–max diagonal.
fn add_square(acc: &mut Accumulator, s: [&Coords; 4], coef: i64) {
    let min: Coords = (0..s[0].len()).map(|k| s.iter().map(|v| v[k]).min().unwrap()).collect();
    let (p0, p1, p2, p3) = if *s[0] == min || *s[2] == min { (0, 1, 2, 3) } else { (1, 2, 3, 0) };
    add_simplex(acc, vec![s[p0].clone(), s[p1].clone(), s[p2].clone()], coef);
    add_simplex(acc, vec![s[p0].clone(), s[p2].clone(), s[p3].clone()], coef);
}

/// A 2-chain with boundary `(u,w) + P(a,u) − P(a,w)` for a Kuhn edge `(u,w)`.
fn add_cone(acc: &mut Accumulator, a: &[i64], u: &[i64], w: &[i64], coef: i64) {
    match kuhn_edge(u, w) {
        Some(EdgeKind::Axis) => add_cone_axis(acc, a, u, w, coef),
        Some(EdgeKind::Diagonal) => {
            for step in staircase(u, w).windows(2) {
                add_cone_axis(acc, a, &step[0], &step[1], coef);
            }
            add_fan(acc, u, w, -coef);
        }
        None => unreachable!("cone over a non-edge"),
    }
}

fn add_cone_axis(acc: &mut Accumulator, a: &[i64], u: &[i64], w: &[i64], coef: i64) {
    let axis = (0..u.len()).find(|&k| u[k] != w[k]).unwrap();
    let step = w[axis] - u[axis];
    let mut q = u.to_vec();
    q[axis + 1..].copy_from_slice(&a[axis + 1..]);
    // Ladder between the staircase q → u and its translate q' → w.
    for rung in staircase(&q, u).windows(2) {
        let (s, t) = (&rung[0], &rung[1]);
        let mut s_up = s.clone();
        s_up[axis] += step;
        let mut t_up = t.clone();
        t_up[axis] += step;
        add_square(acc, [s, t, &t_up, &s_up], coef);
    }
    // Replace staircases by the actual degree-1 fillings at both ends.
    add_fan(acc, a, w, coef);
    add_fan(acc, a, u, -coef);
}

fn fill_coords(tuple: &[Coords], coef: i64, acc: &mut Accumulator) {
    match tuple.len() {
        1 => add_simplex(acc, vec![tuple[0].clone()], coef),
        2 => add_path(acc, &tuple[0], &tuple[1], coef),
        3 => {
            let (a, b, c) = (&tuple[0], &tuple[1], &tuple[2]);
            if a != b && b != c && a != c && is_kuhn_simplex(tuple) {
                add_simplex(acc, tuple.to_vec(), coef);
                return;
            }
            let mut boundary = Accumulator::new();
            add_path(&mut boundary, b, c, 1);
            add_path(&mut boundary, a, c, -1);
            add_path(&mut boundary, a, b, 1);
            for (edge, m) in boundary {
                add_cone(acc, a, &edge[0], &edge[1], coef * m);
            }
        }
        _ => unreachable!(),
    }
}

fn check_lattice(window: &Window) -> Result<()> {
    match window.kind() {
        SpaceKind::Zd { .. } => Ok(()),
        other => Err(Error::UnsupportedKind(format!("fill needs a ℤ^d window, got {other:?}"))),
    }
}

/// The filling `Δ_ȳ` of a tuple of at most three points.
pub fn fill_tuple(window: &Arc<Window>, tuple: &[PointId]) -> Result<SimplicialChain> {
    fill_tuple_scaled(window, tuple, &1i64)
}

fn fill_tuple_scaled<K: Coefficient>(window: &Arc<Window>, tuple: &[PointId], scale: &K) -> Result<SimplicialChain<K>> {
    check_lattice(window)?;
    if tuple.is_empty() || tuple.len() > 3 {
        return Err(Error::precondition(
            "fill",
            format!("fillings are implemented in degrees 0..=2, got degree {}", tuple.len() as i64 - 1),
        ));
    }
    let coords: Vec<Coords> = tuple.iter().map(|&p| window.coords(p).to_vec()).collect();
    let mut acc = Accumulator::new();
    fill_coords(&coords, 1, &mut acc);
    SimplicialChain::from_accumulator(window, tuple.len() - 1, acc, scale, &format!("{coords:?}"))
}

/// Linear extension of [`fill_tuple`].
pub fn fill_chain<K: Coefficient>(chain: &UfChain<K>) -> Result<SimplicialChain<K>> {
    let window = chain.window();
    let mut out = SimplicialChain::zero(window.clone(), chain.degree());
    for (tuple, coef) in chain.terms() {
        let piece = fill_tuple_scaled(window, tuple, coef)?;
        out = out.add(&piece)?;
    }
    Ok(out)
}

/// True iff filling the inclusion of `s` gives back `s`.
pub fn roundtrip_identity<K: Coefficient>(s: &SimplicialChain<K>) -> Result<bool> {
    Ok(fill_chain(&s.inclusion())? == *s)
}

/// Largest distance from the first point of the tuple to a vertex of its
/// filling.
pub fn filling_radius<K: Coefficient>(tuple: &[PointId], filling: &SimplicialChain<K>) -> u32 {
    let w = filling.window();
    filling.vertices().map(|v| w.distance(tuple[0], v)).max().unwrap_or(0)
}

/// A tuple of `degree + 1` margin-safe points with length exactly `length`,
/// drawn by rejection; `None` if none was found.
pub fn sample_tuple(window: &Window, degree: usize, length: u32, rng: &mut impl Rng) -> Option<Vec<PointId>> {
    let safe = window.safe_points();
    for _ in 0..200 {
        let first = safe[rng.random_range(0..safe.len())];
        let near: Vec<PointId> =
            window.neighbors_within(first, length).into_iter().filter(|&p| window.is_safe(p)).collect();
        let mut tuple = vec![first];
        for _ in 0..degree {
            tuple.push(near[rng.random_range(0..near.len())]);
        }
        // Put a point at exact distance `length` in a random slot.
        let far: Vec<PointId> = near.iter().copied().filter(|&p| window.distance(first, p) == length).collect();
        if far.is_empty() || degree == 0 {
            continue;
        }
        let slot = rng.random_range(1..=degree);
        tuple[slot] = far[rng.random_range(0..far.len())];
        if window.tuple_length(&tuple) == length {
            return Some(tuple);
        }
    }
    None
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ContractibilityReport {
    pub degree: usize,
    /// `S′(R)`: largest filling radius over sampled tuples of length ≤ R.
    pub profile: Vec<(u32, u32)>,
    pub fit: PowerFit,
}

/// Measure the filling radius `S′(R)` for `R = 1..=rmax` and fit
/// `S′(R) ≤ C R^N`.
pub fn contractibility_profile(
    window: &Arc<Window>,
    degree: usize,
    rmax: u32,
    samples: usize,
    seed: u64,
) -> Result<ContractibilityReport> {
    check_lattice(window)?;
    if degree == 0 || degree > 2 {
        return Err(Error::precondition("fill", "contractibility profile needs degree 1 or 2"));
    }
    if samples < 50 {
        return Err(Error::InsufficientSamples {
            module: "fill",
            detail: format!("{samples} tuples per length bucket requested, need at least 50"),
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut profile = Vec::new();
    let mut running = 0;
    for r in 1..=rmax {
        let mut got = 0;
        let mut attempts = 0;
        while got < samples {
            attempts += 1;
            if attempts > 50 * samples {
                return Err(Error::InsufficientSamples {
                    module: "fill",
                    detail: format!("only {got} fillable tuples of length {r} found"),
                });
            }
            let Some(tuple) = sample_tuple(window, degree, r, &mut rng) else { continue };
            match fill_tuple(window, &tuple) {
                Ok(f) => {
                    running = running.max(filling_radius(&tuple, &f));
                    got += 1;
                }
                Err(Error::MarginViolation { .. }) => continue,
                Err(e) => return Err(e),
            }
        }
        profile.push((r, running));
    }
    let data: Vec<(f64, f64)> = profile.iter().map(|&(r, s)| (r as f64, s as f64)).collect();
    Ok(ContractibilityReport { degree, profile, fit: PowerFit::fit(&data) })
}

/// Number of lattice points of ℤ^d within distance `r` of a point.
pub fn lattice_ball_volume(dim: usize, metric: Metric, r: u64) -> f64 {
    match metric {
        Metric::LInf => ((2 * r + 1) as f64).powi(dim as i32),
        _ => {
            // Σ_k 2^k C(d,k) C(r,k)
            let mut total = 0.0;
            let mut binom_d = 1.0;
            let mut binom_r = 1.0;
            for k in 0..=dim {
                if k > 0 {
                    binom_d *= (dim - k + 1) as f64 / k as f64;
                    binom_r *= (r as f64 - k as f64 + 1.0).max(0.0) / k as f64;
                }
                total += 2f64.powi(k as i32) * binom_d * binom_r;
            }
            total
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FillingReport {
    pub degree: usize,
    pub growth_coefficient: f64,
    pub growth_exponent: f64,
    pub contraction_coefficient: f64,
    pub contraction_exponent: f64,
    /// `n = ⌈M q (N+1) + 2⌉`.
    pub n: u32,
    /// `‖Δ_c‖_∞`.
    pub lhs: f64,
    /// `D^{q+1} C^M (2^n π²/6 + 1) ‖c‖_{∞,n}`.
    pub rhs: f64,
    pub chain_norm: f64,
    /// `Σ_R ‖c‖_{R−[1]} · vol B_{S′(R)} · vol(shell R) · (vol B_R)^{q−1}`.
    pub presummation_bound: f64,
    pub pass: bool,
}

/// Relative slack for comparing two computed sides of an inequality.
pub const INEQUALITY_SLACK: f64 = 1e-9;

pub fn exponent_for(growth_exponent: f64, degree: usize, contraction_exponent: f64) -> u32 {
    let raw = growth_exponent * degree as f64 * (contraction_exponent + 1.0) + 2.0;
    (raw - 1e-9).ceil().max(0.0) as u32
}

/// Evaluate both sides of the filling estimate for `chain` with measured
/// growth `(D, M)` and contraction `(C, N)` constants.
pub fn verify_crucial_estimate<K: Coefficient>(
    chain: &UfChain<K>,
    growth: &GrowthFit,
    contraction: &PowerFit,
) -> Result<FillingReport> {
    let window = chain.window();
    check_lattice(window)?;
    if !chain.is_margin_safe() {
        return Err(Error::margin("fill", "chain support leaves the margin-safe core"));
    }
    let q = chain.degree();
    let dim = match window.kind() {
        SpaceKind::Zd { dim } => dim,
        _ => unreachable!(),
    };
    let metric = window.spec().metric;
    let filled = fill_chain(chain)?;
    let lhs = filled.norm_inf();
    let n = exponent_for(growth.exponent, q, contraction.exponent);
    let chain_norm = chain.norm_inf_n(n);
    let d = growth.coefficient;
    let c = contraction.coefficient.max(1.0);
    let factor = 2f64.powi(n as i32) * std::f64::consts::PI.powi(2) / 6.0 + 1.0;
    let rhs = d.powi(q as i32 + 1) * c.powf(growth.exponent) * factor * chain_norm;

    let mut presummation_bound = 0.0;
    for r in 1..=chain.propagation() as u64 {
        let shell = chain.shell_norm(r as u32);
        if shell == 0.0 {
            continue;
        }
        let reach = contraction.eval(r as f64).max(0.0).floor() as u64;
        let annulus = lattice_ball_volume(dim, metric, r) - lattice_ball_volume(dim, metric, r - 1);
        presummation_bound += shell
            * lattice_ball_volume(dim, metric, reach)
            * annulus
            * lattice_ball_volume(dim, metric, r).powi(q as i32 - 1);
    }
    let pass = lhs <= rhs * (1.0 + INEQUALITY_SLACK) && lhs <= presummation_bound * (1.0 + INEQUALITY_SLACK);
    Ok(FillingReport {
        degree: q,
        growth_coefficient: d,
        growth_exponent: growth.exponent,
        contraction_coefficient: contraction.coefficient,
        contraction_exponent: contraction.exponent,
        n,
        lhs,
        rhs,
        chain_norm,
        presummation_bound,
        pass,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spaces::WindowSpec;
    use proptest::prelude::*;
    use rand::Rng;

    fn grid(dim: usize, w: u32) -> Arc<Window> {
        WindowSpec::zd(dim, w, 2).build().unwrap()
    }

    fn at(w: &Window, c: &[i64]) -> PointId {
        w.lookup(c).unwrap()
    }

    fn faces_filled(w: &Arc<Window>, tuple: &[PointId]) -> SimplicialChain {
        let mut acc = SimplicialChain::zero(w.clone(), tuple.len() - 2);
        for j in 0..tuple.len() {
            let mut face = tuple.to_vec();
            face.remove(j);
            let f = fill_tuple(w, &face).unwrap();
            acc = if j % 2 == 0 { acc.add(&f).unwrap() } else { acc.sub(&f).unwrap() };
        }
        acc
    }

    #[test]
    fn staircase_on_the_line() {
        let w = grid(1, 10);
        let f = fill_tuple(&w, &[at(&w, &[0]), at(&w, &[5])]).unwrap();
        assert_eq!(f.len(), 5);
        for x in 0..5 {
            assert_eq!(f.coefficient(&[at(&w, &[x]), at(&w, &[x + 1])]), 1);
        }
        let back = fill_tuple(&w, &[at(&w, &[5]), at(&w, &[0])]).unwrap();
        assert_eq!(back.add(&f).unwrap().len(), 0);
        assert_eq!(f.norm_inf(), 1.0);
    }

    #[test]
    fn vertex_fill() {
        let w = grid(2, 4);
        let p = at(&w, &[1, 1]);
        let f = fill_tuple(&w, &[p]).unwrap();
        assert_eq!(f.len(), 1);
        assert_eq!(f.coefficient(&[p]), 1);
    }

    #[test]
    fn triangle_in_the_plane() {
        let w = grid(2, 8);
        // The three staircases of this triangle cancel as chains, so the
        // filling is empty.
        let t = [at(&w, &[0, 0]), at(&w, &[3, 0]), at(&w, &[0, 3])];
        let f = fill_tuple(&w, &t).unwrap();
        assert_eq!(f.boundary().unwrap(), faces_filled(&w, &t));
        assert!(f.is_zero());

        // Here the loop encloses the region between two staircases.
        let t = [at(&w, &[0, 0]), at(&w, &[3, 1]), at(&w, &[1, 3])];
        let f = fill_tuple(&w, &t).unwrap();
        assert!(!f.is_zero());
        assert_eq!(f.boundary().unwrap(), faces_filled(&w, &t));
        assert!(f.terms().all(|(_, &c)| c.abs() == 1));
    }

    #[test]
    fn closed_degree_one_chain_fills_to_a_cycle() {
        let w = grid(2, 8);
        let (a, b, c) = (at(&w, &[0, 0]), at(&w, &[2, 3]), at(&w, &[-1, 2]));
        let chain = UfChain::<i64>::from_terms(w.clone(), 1, [(vec![a, b], 1), (vec![b, c], 1), (vec![a, c], -1)]).unwrap();
        let filled = fill_chain(&chain).unwrap();
        assert!(filled.boundary().unwrap().is_zero());
        assert!(fill_chain(&UfChain::<i64>::zero(w, 1)).unwrap().is_zero());
    }

    #[test]
    fn unit_simplices_are_fixed() {
        let w = grid(1, 6);
        let mut e = SimplicialChain::zero(w.clone(), 1);
        e.add_simplex(&[at(&w, &[0]), at(&w, &[1])], 1).unwrap();
        assert!(roundtrip_identity(&e).unwrap());

        let w2 = grid(2, 6);
        let mut t = SimplicialChain::zero(w2.clone(), 2);
        t.add_simplex(&[at(&w2, &[1, 1]), at(&w2, &[0, 0]), at(&w2, &[1, 0])], 1).unwrap();
        assert!(roundtrip_identity(&t).unwrap());
        assert!(t.add_simplex(&[at(&w2, &[0, 0]), at(&w2, &[1, 0]), at(&w2, &[0, 1])], 1).is_err());
    }

    #[test]
    fn sum_of_random_unit_simplices_roundtrips() {
        let w = grid(2, 8);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let mut s = SimplicialChain::zero(w.clone(), 2);
        for _ in 0..10 {
            let x = rng.random_range(-3..3);
            let y = rng.random_range(-3..3);
            let mid = if rng.random_bool(0.5) { [x + 1, y] } else { [x, y + 1] };
            s.add_simplex(&[at(&w, &[x, y]), at(&w, &mid), at(&w, &[x + 1, y + 1])], rng.random_range(-3..=3))
                .unwrap();
        }
        assert!(roundtrip_identity(&s).unwrap());
    }

    #[test]
    fn margin_violation_names_the_tuple() {
        let w = grid(2, 6);
        // The staircase turns at (4, 4), outside the ℓ¹ ball of radius 6.
        let t = [at(&w, &[-2, 4]), at(&w, &[4, -2])];
        let err = fill_tuple(&w, &t).unwrap_err();
        assert!(matches!(err, Error::MarginViolation { .. }));
        assert!(err.to_string().contains("[-2, 4]"));
    }

    #[test]
    fn higher_degrees_rejected() {
        let w = grid(2, 4);
        let p = w.base();
        assert!(fill_tuple(&w, &[p, p, p, p]).is_err());
        let h = WindowSpec::new(SpaceKind::Heisenberg3, 3, 1).build().unwrap();
        assert!(matches!(fill_tuple(&h, &[h.base()]), Err(Error::UnsupportedKind(_))));
    }

    #[test]
    fn line_profile_is_linear() {
        let w = grid(1, 40);
        let rep = contractibility_profile(&w, 1, 12, 50, 3).unwrap();
        assert!(rep.profile.iter().all(|&(r, s)| r == s));
        assert!((rep.fit.exponent - 1.0).abs() < 1e-9);
        assert!((rep.fit.coefficient - 1.0).abs() < 1e-9);
        assert!(contractibility_profile(&w, 1, 4, 10, 3).is_err());
    }

    #[test]
    fn plane_profile_is_near_linear() {
        let w = grid(2, 24);
        for degree in 1..=2 {
            let rep = contractibility_profile(&w, degree, 10, 200, 9).unwrap();
            assert!((0.9..=1.3).contains(&rep.fit.exponent), "degree {degree}: {:?} {:?}", rep.fit, rep.profile);
        }
    }

    #[test]
    fn ball_volume_formula() {
        for r in 0..6u64 {
            assert_eq!(lattice_ball_volume(1, Metric::L1, r), (2 * r + 1) as f64);
            assert_eq!(lattice_ball_volume(2, Metric::L1, r), (2 * r * r + 2 * r + 1) as f64);
        }
        let w = WindowSpec::zd(3, 5, 0).build().unwrap();
        assert_eq!(lattice_ball_volume(3, Metric::L1, 5), w.len() as f64);
    }

    #[test]
    fn estimate_on_a_single_edge() {
        let w = grid(1, 16);
        let growth = w.fit_growth().unwrap();
        let contraction = PowerFit { coefficient: 1.0, exponent: 1.0, residual: 0.0 };
        let c = UfChain::<i64>::from_terms(w.clone(), 1, [(vec![at(&w, &[0]), at(&w, &[5])], 1)]).unwrap();
        let rep = verify_crucial_estimate(&c, &growth, &contraction).unwrap();
        assert_eq!(rep.n, 4);
        assert_eq!(rep.lhs, 1.0);
        assert_eq!(rep.chain_norm, 625.0);
        assert!(rep.pass);

        let zero = verify_crucial_estimate(&UfChain::<i64>::zero(w.clone(), 1), &growth, &contraction).unwrap();
        assert_eq!((zero.lhs, zero.rhs), (0.0, 0.0));
        assert!(zero.pass);
    }

    fn random_tuple(w: &Window, degree: usize, seed: u64) -> Option<Vec<PointId>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let len = rng.random_range(1..=6);
        sample_tuple(w, degree, len, &mut rng)
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(96))]

        #[test]
        fn boundary_of_filling_is_filling_of_faces(seed in any::<u64>(), degree in 1usize..=2, dim in 1usize..=3) {
            let w = grid(dim, if dim == 3 { 8 } else { 12 });
            if let Some(t) = random_tuple(&w, degree, seed) {
                if let Ok(f) = fill_tuple(&w, &t) {
                    let expected = faces_filled(&w, &t);
                    prop_assert_eq!(f.boundary().unwrap(), expected);
                    // Fillings stay in the bounding box of the tuple.
                    for v in f.vertices() {
                        for k in 0..dim {
                            let lo = t.iter().map(|&p| w.coords(p)[k]).min().unwrap();
                            let hi = t.iter().map(|&p| w.coords(p)[k]).max().unwrap();
                            prop_assert!((lo..=hi).contains(&w.coords(v)[k]));
                        }
                    }
                }
            }
        }

        #[test]
        fn plane_fillings_have_unit_coefficients(seed in any::<u64>()) {
            let w = grid(2, 12);
            if let Some(t) = random_tuple(&w, 2, seed) {
                if let Ok(f) = fill_tuple(&w, &t) {
                    prop_assert!(f.norm_inf() <= 1.0);
                }
            }
        }
    }
}
