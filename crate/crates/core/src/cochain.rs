//! Coarse cochains, the Alexander–Spanier coboundary, rough maps and the
//! pairing with uniformly finite chains.
//!
//! Cochains are expression trees evaluated on demand, so their support
//! condition stays checkable on any window.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::hash::{DefaultHasher, Hash, Hasher};
use std::sync::Arc;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fit::PowerFit;
use crate::scalar::Coefficient;
use crate::spaces::{PointId, Window};
use crate::ufchain::UfChain;

/// Where the alternating sum of the coboundary starts.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CoboundaryConvention {
    /// `Σ_{i=0}^{q+1}`: adjoint to the chain boundary.
    #[default]
    Full,
    /// `Σ_{i=1}^{q+1}`: never deletes the first vertex. Squares to zero but
    /// is not adjoint to `∂`.
    SkipFirst,
}

/// A map between windows, tabulated on every source point. Points whose
/// image leaves the target window have no image.
pub struct RoughMap {
    name: String,
    source: Arc<Window>,
    target: Arc<Window>,
    image: Vec<Option<PointId>>,
}

impl fmt::Debug for RoughMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "RoughMap({})", self.name)
    }
}

impl RoughMap {
    pub fn from_fn(
        name: impl Into<String>,
        source: Arc<Window>,
        target: Arc<Window>,
        f: impl Fn(&[i64]) -> Vec<i64>,
    ) -> Self {
        let image = source.points().map(|p| target.lookup(&f(source.coords(p)))).collect();
        RoughMap { name: name.into(), source, target, image }
    }

    pub fn identity(window: Arc<Window>) -> Self {
        RoughMap::from_fn("identity", window.clone(), window, |x| x.to_vec())
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn source(&self) -> &Arc<Window> {
        &self.source
    }

    pub fn target(&self) -> &Arc<Window> {
        &self.target
    }

    pub fn apply(&self, p: PointId) -> Result<PointId> {
        self.image
            .get(p.index())
            .copied()
            .flatten()
            .ok_or_else(|| Error::ImageOutsideTarget { point: self.source.describe(p) })
    }

    /// `other ∘ self`.
    pub fn then(&self, other: &RoughMap) -> Result<RoughMap> {
        if *self.target != *other.source {
            return Err(Error::precondition("cochain", "composed maps do not share a window"));
        }
        let image = self.image.iter().map(|i| i.and_then(|q| other.image[q.index()])).collect();
        Ok(RoughMap {
            name: format!("{}∘{}", other.name, self.name),
            source: self.source.clone(),
            target: other.target.clone(),
            image,
        })
    }

    /// Fails with the first margin-safe source point that has no image.
    pub fn check_defined_on_safe_points(&self) -> Result<()> {
        for p in self.source.safe_points() {
            self.apply(p)?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub enum CoarseCochain<K: Coefficient = Complex64> {
    /// Degree 1 on ℤ^d: `φ(y₀,y₁) = h(y₁) − h(y₀)`, `h = [y[axis] ≥ threshold]`.
    Jump { axis: usize, threshold: i64 },
    /// Degree 0: the coordinate function `y ↦ y[axis]`. Not coarse; its
    /// coboundary is a closed but unbounded control cochain.
    Coordinate { axis: usize },
    /// Explicit finite table keyed by point coordinates; zero elsewhere.
    Table { degree: usize, values: BTreeMap<Vec<Vec<i64>>, K> },
    Constant { degree: usize, value: K },
    Pullback { map: Arc<RoughMap>, inner: Box<CoarseCochain<K>> },
    Coboundary { inner: Box<CoarseCochain<K>>, convention: CoboundaryConvention },
    Sum(Box<CoarseCochain<K>>, Box<CoarseCochain<K>>),
    Scale(K, Box<CoarseCochain<K>>),
}

impl<K: Coefficient> CoarseCochain<K> {
    pub fn jump(axis: usize, threshold: i64) -> Self {
        CoarseCochain::Jump { axis, threshold }
    }

    pub fn table(degree: usize, values: impl IntoIterator<Item = (Vec<Vec<i64>>, K)>) -> Result<Self> {
        let mut map = BTreeMap::new();
        for (tuple, v) in values {
            if tuple.len() != degree + 1 {
                return Err(Error::DegreeMismatch {
                    module: "cochain",
                    expected: degree,
                    got: tuple.len().saturating_sub(1),
                });
            }
            if !v.is_zero() {
                map.insert(tuple, v);
            }
        }
        Ok(CoarseCochain::Table { degree, values: map })
    }

    pub fn coboundary(self) -> Self {
        self.coboundary_with(CoboundaryConvention::Full)
    }

    pub fn coboundary_with(self, convention: CoboundaryConvention) -> Self {
        CoarseCochain::Coboundary { inner: Box::new(self), convention }
    }

    pub fn sum(self, other: Self) -> Result<Self> {
        if self.degree() != other.degree() {
            return Err(Error::DegreeMismatch {
                module: "cochain",
                expected: self.degree(),
                got: other.degree(),
            });
        }
        Ok(CoarseCochain::Sum(Box::new(self), Box::new(other)))
    }

    pub fn scale(self, factor: K) -> Self {
        CoarseCochain::Scale(factor, Box::new(self))
    }

    /// `f*φ`; the map must be defined on every margin-safe source point.
    pub fn pullback(map: Arc<RoughMap>, inner: Self) -> Result<Self> {
        map.check_defined_on_safe_points()?;
        Ok(CoarseCochain::Pullback { map, inner: Box::new(inner) })
    }

    pub fn degree(&self) -> usize {
        match self {
            CoarseCochain::Jump { .. } => 1,
            CoarseCochain::Coordinate { .. } => 0,
            CoarseCochain::Table { degree, .. } | CoarseCochain::Constant { degree, .. } => *degree,
            CoarseCochain::Pullback { inner, .. } | CoarseCochain::Scale(_, inner) => inner.degree(),
            CoarseCochain::Coboundary { inner, .. } => inner.degree() + 1,
            CoarseCochain::Sum(a, _) => a.degree(),
        }
    }

    /// Value on a `(q+1)`-tuple of points of `window`.
    pub fn evaluate(&self, window: &Window, tuple: &[PointId]) -> Result<K> {
        if tuple.len() != self.degree() + 1 {
            return Err(Error::DegreeMismatch {
                module: "cochain",
                expected: self.degree(),
                got: tuple.len().saturating_sub(1),
            });
        }
        self.eval_unchecked(window, tuple)
    }

    fn eval_unchecked(&self, window: &Window, tuple: &[PointId]) -> Result<K> {
        Ok(match self {
            CoarseCochain::Jump { axis, threshold } => {
                let h = |p: PointId| -> Result<i64> {
                    let c = window.coords(p);
                    c.get(*axis).map(|&x| (x >= *threshold) as i64).ok_or_else(|| {
                        Error::precondition("cochain", format!("axis {axis} out of range"))
                    })
                };
                K::from_i64(h(tuple[1])? - h(tuple[0])?)
            }
            CoarseCochain::Coordinate { axis } => {
                let c = window.coords(tuple[0]);
                K::from_i64(*c.get(*axis).ok_or_else(|| {
                    Error::precondition("cochain", format!("axis {axis} out of range"))
                })?)
            }
            CoarseCochain::Table { values, .. } => {
                let key: Vec<Vec<i64>> = tuple.iter().map(|&p| window.coords(p).to_vec()).collect();
                values.get(&key).cloned().unwrap_or_else(K::zero)
            }
            CoarseCochain::Constant { value, .. } => value.clone(),
            CoarseCochain::Pullback { map, inner } => {
                if **map.source() != *window {
                    return Err(Error::precondition(
                        "cochain",
                        "pullback evaluated on a window other than the map's source",
                    ));
                }
                let image: Vec<PointId> = tuple.iter().map(|&p| map.apply(p)).collect::<Result<_>>()?;
                inner.eval_unchecked(map.target(), &image)?
            }
            CoarseCochain::Coboundary { inner, convention } => {
                let start = match convention {
                    CoboundaryConvention::Full => 0,
                    CoboundaryConvention::SkipFirst => 1,
                };
                let mut acc = K::zero();
                let mut face = Vec::with_capacity(tuple.len() - 1);
                for i in start..tuple.len() {
                    face.clear();
                    face.extend(tuple.iter().enumerate().filter(|(j, _)| *j != i).map(|(_, p)| *p));
                    let v = inner.eval_unchecked(window, &face)?;
                    acc = if i % 2 == 0 { acc + v } else { acc - v };
                }
                acc
            }
            CoarseCochain::Sum(a, b) => a.eval_unchecked(window, tuple)? + b.eval_unchecked(window, tuple)?,
            CoarseCochain::Scale(k, a) => k.clone() * a.eval_unchecked(window, tuple)?,
        })
    }

    /// Convert coefficients of every embedded constant.
    pub fn map_coefficients<L: Coefficient>(&self, f: &impl Fn(&K) -> L) -> CoarseCochain<L> {
        match self {
            CoarseCochain::Jump { axis, threshold } => CoarseCochain::Jump { axis: *axis, threshold: *threshold },
            CoarseCochain::Coordinate { axis } => CoarseCochain::Coordinate { axis: *axis },
            CoarseCochain::Table { degree, values } => CoarseCochain::Table {
                degree: *degree,
                values: values.iter().map(|(t, v)| (t.clone(), f(v))).collect(),
            },
            CoarseCochain::Constant { degree, value } => {
                CoarseCochain::Constant { degree: *degree, value: f(value) }
            }
            CoarseCochain::Pullback { map, inner } => {
                CoarseCochain::Pullback { map: map.clone(), inner: Box::new(inner.map_coefficients(f)) }
            }
            CoarseCochain::Coboundary { inner, convention } => CoarseCochain::Coboundary {
                inner: Box::new(inner.map_coefficients(f)),
                convention: *convention,
            },
            CoarseCochain::Sum(a, b) => {
                CoarseCochain::Sum(Box::new(a.map_coefficients(f)), Box::new(b.map_coefficients(f)))
            }
            CoarseCochain::Scale(k, a) => CoarseCochain::Scale(f(k), Box::new(a.map_coefficients(f))),
        }
    }
}

/// `⟨φ, c⟩ = Σ φ(ȳ) c(ȳ)` over the chain's support.
pub fn pair<K: Coefficient>(cochain: &CoarseCochain<K>, chain: &UfChain<K>) -> Result<K> {
    if cochain.degree() != chain.degree() {
        return Err(Error::DegreeMismatch {
            module: "cochain",
            expected: cochain.degree(),
            got: chain.degree(),
        });
    }
    let window = chain.window();
    let mut acc = K::zero();
    for (tuple, coef) in chain.terms() {
        if let Some(p) = tuple.iter().find(|&&p| !window.is_safe(p)) {
            return Err(Error::margin(
                "cochain",
                format!("chain tuple point {} lies outside the margin-safe core", window.describe(*p)),
            ));
        }
        acc = acc + cochain.eval_unchecked(window, tuple)? * coef.clone();
    }
    Ok(acc)
}

/// Calls `visit` with every tuple of `degree+1` margin-safe points whose
/// length is at most `radius`.
pub fn for_each_safe_tuple(
    window: &Window,
    degree: usize,
    radius: u32,
    mut visit: impl FnMut(&[PointId], u32) -> Result<()>,
) -> Result<()> {
    let mut tuple = Vec::with_capacity(degree + 1);
    for first in window.safe_points() {
        let near: Vec<PointId> = window
            .neighbors_within(first, radius)
            .into_iter()
            .filter(|&p| window.is_safe(p))
            .collect();
        tuple.clear();
        tuple.push(first);
        extend_tuple(window, degree, radius, &near, &mut tuple, 0, &mut visit)?;
    }
    Ok(())
}

fn extend_tuple(
    window: &Window,
    degree: usize,
    radius: u32,
    near: &[PointId],
    tuple: &mut Vec<PointId>,
    length: u32,
    visit: &mut impl FnMut(&[PointId], u32) -> Result<()>,
) -> Result<()> {
    if tuple.len() == degree + 1 {
        return visit(tuple, length);
    }
    for &p in near {
        let mut len = length;
        let mut ok = true;
        for &q in tuple.iter() {
            let d = window.distance(p, q);
            if d > radius {
                ok = false;
                break;
            }
            len = len.max(d);
        }
        if ok {
            tuple.push(p);
            extend_tuple(window, degree, radius, near, tuple, len, visit)?;
            tuple.pop();
        }
    }
    Ok(())
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SupportRow {
    pub radius: u32,
    /// Number of margin-safe tuples of length ≤ R on which φ ≠ 0.
    pub tuples: usize,
    /// Diameter of the set of points occurring in those tuples.
    pub diameter: Option<u32>,
    /// The support touches the edge of the margin-safe core, so boundedness
    /// cannot be certified inside this window.
    pub unbounded: bool,
}

/// Diameter of `supp(φ) ∩ B_R(Δ)` for `R = 0..=rmax`.
pub fn support_check<K: Coefficient>(
    cochain: &CoarseCochain<K>,
    window: &Window,
    rmax: u32,
) -> Result<Vec<SupportRow>> {
    if window.margin() < rmax {
        return Err(Error::margin(
            "cochain",
            format!("support check up to R = {rmax} needs margin ≥ {rmax}, window has {}", window.margin()),
        ));
    }
    let mut by_length: Vec<(usize, BTreeSet<PointId>)> = vec![(0, BTreeSet::new()); rmax as usize + 1];
    for_each_safe_tuple(window, cochain.degree(), rmax, |tuple, len| {
        if !cochain.eval_unchecked(window, tuple)?.is_zero() {
            let slot = &mut by_length[len as usize];
            slot.0 += 1;
            slot.1.extend(tuple.iter().copied());
        }
        Ok(())
    })?;
    let mut rows = Vec::new();
    let mut count = 0;
    let mut points: BTreeSet<PointId> = BTreeSet::new();
    for (r, (c, pts)) in by_length.into_iter().enumerate() {
        count += c;
        points.extend(pts);
        let list: Vec<PointId> = points.iter().copied().collect();
        let diameter = (!list.is_empty()).then(|| window.tuple_length(&list));
        let unbounded = list.iter().any(|&p| window.depth(p) >= window.safe_radius());
        rows.push(SupportRow { radius: r as u32, tuples: count, diameter, unbounded });
    }
    Ok(rows)
}

#[derive(Clone, Debug)]
pub struct RoughCheckConfig {
    pub min_per_bucket: usize,
    /// Largest source distance examined; defaults to half the safe radius.
    pub max_radius: Option<u32>,
    /// Upper bound on the log-log residual of each control fit.
    pub residual_threshold: f64,
}

impl Default for RoughCheckConfig {
    fn default() -> Self {
        RoughCheckConfig { min_per_bucket: 100, max_radius: None, residual_threshold: 0.25 }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RoughReport {
    /// `S₊(R)`: largest image distance among pairs at distance ≤ R.
    pub forward: Vec<(u32, u32)>,
    /// `S₋(R)`: largest source distance among pairs whose images are ≤ R apart.
    pub backward: Vec<(u32, u32)>,
    pub forward_fit: PowerFit,
    pub backward_fit: PowerFit,
    pub pass: bool,
    pub warnings: Vec<String>,
}

/// Empirical forward and backward controls of a map on its margin-safe
/// source points, over all ordered pairs of distinct points.
pub fn rough_check(map: &RoughMap, cfg: &RoughCheckConfig) -> Result<RoughReport> {
    let source = map.source();
    let target = map.target();
    let safe = source.safe_points();
    let images: Vec<PointId> = safe.iter().map(|&p| map.apply(p)).collect::<Result<_>>()?;
    let rmax = cfg.max_radius.unwrap_or(source.safe_radius() / 2).max(1);
    let size = rmax as usize + 1;
    let mut bucket = vec![0usize; size];
    let mut fwd = vec![0u32; size];
    let mut bwd = vec![0u32; size];
    for i in 0..safe.len() {
        for j in 0..safe.len() {
            if i == j {
                continue;
            }
            let ds = source.distance(safe[i], safe[j]);
            let dt = target.distance(images[i], images[j]);
            if (ds as usize) < size {
                bucket[ds as usize] += 1;
                fwd[ds as usize] = fwd[ds as usize].max(dt);
            }
            if (dt as usize) < size {
                bwd[dt as usize] = bwd[dt as usize].max(ds);
            }
        }
    }
    if let Some(r) = (1..size).find(|&r| bucket[r] < cfg.min_per_bucket) {
        return Err(Error::InsufficientSamples {
            module: "cochain",
            detail: format!(
                "{} pairs at distance {r}, need at least {}",
                bucket[r], cfg.min_per_bucket
            ),
        });
    }
    for r in 1..size {
        fwd[r] = fwd[r].max(fwd[r - 1]);
        bwd[r] = bwd[r].max(bwd[r - 1]);
    }
    let forward: Vec<(u32, u32)> = (1..size).map(|r| (r as u32, fwd[r])).collect();
    let backward: Vec<(u32, u32)> = (1..size).map(|r| (r as u32, bwd[r])).collect();
    let as_f = |v: &[(u32, u32)]| -> Vec<(f64, f64)> { v.iter().map(|&(r, s)| (r as f64, s as f64)).collect() };
    let forward_fit = PowerFit::fit(&as_f(&forward));
    let backward_fit = PowerFit::fit(&as_f(&backward));

    let mut warnings = Vec::new();
    let scale = source.safe_radius();
    for (label, fit, first) in [("forward", &forward_fit, forward[0].1), ("backward", &backward_fit, backward[0].1)] {
        if fit.residual > cfg.residual_threshold {
            warnings.push(format!(
                "{label} control is not polynomial: log-log residual {:.3} exceeds {:.3}",
                fit.residual, cfg.residual_threshold
            ));
        }
        if first > scale {
            warnings.push(format!(
                "{label} control at R = 1 is {first}, more than half the safe diameter ({scale}); \
                 the control is set by the window size, not by the map"
            ));
        }
    }
    if forward_fit.exponent > 1.5 {
        warnings.push(format!("forward control grows with exponent {:.2}", forward_fit.exponent));
    }
    Ok(RoughReport { forward, backward, forward_fit, backward_fit, pass: warnings.is_empty(), warnings })
}

/// Random degree-1 chains made of axis edges `(x, x ± ℓ e_k)` with
/// coefficients `±u / ℓ^n`, `u ∈ [½, 1]`, so every term has
/// `|a| · length^n ≤ 1`.
///
/// Each candidate edge draws its own randomness from a hash of
/// `(seed, trial, coordinates, axis, ℓ)`, so a chain sampled on a larger
/// window extends the one sampled on a smaller window.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EdgeFieldSampler {
    pub seed: u64,
    pub n: u32,
    /// Longest edge; 0 means the safe radius of the window.
    pub max_length: u32,
    pub probability: f64,
}

impl EdgeFieldSampler {
    pub fn new(seed: u64, n: u32) -> Self {
        EdgeFieldSampler { seed, n, max_length: 0, probability: 0.5 }
    }

    pub fn sample(&self, window: &Arc<Window>, trial: usize) -> UfChain<Complex64> {
        let lmax = if self.max_length == 0 { window.safe_radius() } else { self.max_length };
        let mut chain = UfChain::zero(window.clone(), 1);
        let mut probe = Vec::new();
        for x in window.safe_points() {
            let coords = window.coords(x);
            for axis in 0..coords.len() {
                for len in 1..=lmax as i64 {
                    probe.clear();
                    probe.extend_from_slice(coords);
                    probe[axis] += len;
                    let Some(y) = window.lookup(&probe).filter(|&y| window.is_safe(y)) else {
                        break;
                    };
                    let mut h = DefaultHasher::new();
                    (self.seed, trial, coords, axis, len).hash(&mut h);
                    let mut rng = ChaCha8Rng::seed_from_u64(h.finish());
                    if !rng.random_bool(self.probability) {
                        continue;
                    }
                    let u: f64 = rng.random_range(0.5..=1.0);
                    let sign = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
                    let coef = Complex64::new(sign * u / (len as f64).powi(self.n as i32), 0.0);
                    let tuple = if rng.random_bool(0.5) { vec![x, y] } else { vec![y, x] };
                    chain.add_unchecked(tuple, coef);
                }
            }
        }
        chain
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SweepRow {
    pub trial: usize,
    pub pairing: f64,
    pub norm: f64,
    pub ratio: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SweepReport {
    pub rows: Vec<SweepRow>,
    /// Empirical continuity constant: the largest ratio observed.
    pub max_ratio: f64,
    /// Trials whose chain had zero norm and zero pairing.
    pub trivial: usize,
}

/// Checks that `φ` is closed on margin-safe triples of length ≤ `radius`.
pub fn check_closed(cochain: &CoarseCochain<Complex64>, window: &Window, radius: u32) -> Result<()> {
    let dphi = cochain.clone().coboundary();
    for_each_safe_tuple(window, cochain.degree() + 1, radius, |tuple, _| {
        if dphi.eval_unchecked(window, tuple)?.norm() > 1e-12 {
            return Err(Error::precondition(
                "cochain",
                format!("cochain is not closed: coboundary is nonzero at {tuple:?}"),
            ));
        }
        Ok(())
    })
}

/// Ratios `|⟨φ,σ⟩| / ‖σ‖_{∞,n}` over sampled chains.
pub fn continuity_sweep(
    cochain: &CoarseCochain<Complex64>,
    n: u32,
    trials: usize,
    sampler: &(dyn Fn(usize) -> Result<UfChain<Complex64>> + Sync),
) -> Result<SweepReport> {
    let results: Vec<Result<Option<SweepRow>>> = (0..trials)
        .into_par_iter()
        .map(|trial| {
            let chain = sampler(trial)?;
            let pairing = pair(cochain, &chain)?;
            let norm = chain.norm_inf_n(n);
            if norm == 0.0 {
                if pairing.norm() > 1e-12 {
                    return Err(Error::Degenerate {
                        module: "cochain",
                        detail: format!("trial {trial}: nonzero pairing with a zero-norm chain"),
                    });
                }
                return Ok(None);
            }
            Ok(Some(SweepRow { trial, pairing: pairing.re, norm, ratio: pairing.norm() / norm }))
        })
        .collect();
    let mut rows = Vec::new();
    let mut trivial = 0;
    for r in results {
        match r? {
            Some(row) => rows.push(row),
            None => trivial += 1,
        }
    }
    let max_ratio = rows.iter().map(|r| r.ratio).fold(0.0, f64::max);
    Ok(SweepReport { rows, max_ratio, trivial })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Rational;
    use crate::spaces::WindowSpec;
    use proptest::prelude::*;
    use rand::Rng;

    fn line(w: u32, m: u32) -> Arc<Window> {
        WindowSpec::zd(1, w, m).build().unwrap()
    }

    fn pt(w: &Window, x: i64) -> PointId {
        w.lookup(&[x]).unwrap()
    }

    #[test]
    fn jump_values() {
        let w = line(10, 2);
        let phi = CoarseCochain::<i64>::jump(0, 0);
        assert_eq!(phi.evaluate(&w, &[pt(&w, -2), pt(&w, 3)]).unwrap(), 1);
        assert_eq!(phi.evaluate(&w, &[pt(&w, 3), pt(&w, -2)]).unwrap(), -1);
        assert_eq!(phi.evaluate(&w, &[pt(&w, 4), pt(&w, 7)]).unwrap(), 0);
        assert!(phi.evaluate(&w, &[pt(&w, 4)]).is_err());
    }

    #[test]
    fn table_values() {
        let w = line(10, 2);
        let phi = CoarseCochain::<i64>::table(1, [(vec![vec![0], vec![1]], 5)]).unwrap();
        assert_eq!(phi.evaluate(&w, &[pt(&w, 0), pt(&w, 1)]).unwrap(), 5);
        assert_eq!(phi.evaluate(&w, &[pt(&w, 1), pt(&w, 0)]).unwrap(), 0);
    }

    #[test]
    fn jump_is_closed() {
        let w = line(20, 2);
        let d = CoarseCochain::<i64>::jump(0, 0).coboundary();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..200 {
            let t: Vec<PointId> = (0..3).map(|_| pt(&w, rng.random_range(-18..=18))).collect();
            assert_eq!(d.evaluate(&w, &t).unwrap(), 0);
        }
    }

    #[test]
    fn degree_zero_coboundary() {
        let w = line(10, 2);
        let phi = CoarseCochain::<i64>::table(0, [(vec![vec![4]], 1)]).unwrap().coboundary();
        assert_eq!(phi.evaluate(&w, &[pt(&w, 1), pt(&w, 4)]).unwrap(), 1);
        assert_eq!(phi.evaluate(&w, &[pt(&w, 4), pt(&w, 1)]).unwrap(), -1);
    }

    #[test]
    fn support_examples() {
        let w = line(20, 3);
        let rows = support_check(&CoarseCochain::<i64>::jump(0, 0), &w, 3).unwrap();
        let r3 = &rows[3];
        assert!(r3.diameter.unwrap() <= 6);
        assert!(!r3.unbounded);
        let one = CoarseCochain::<i64>::Constant { degree: 0, value: 1 };
        assert!(support_check(&one, &w, 3).unwrap().iter().all(|r| r.unbounded));
        let zero = CoarseCochain::<i64>::Constant { degree: 1, value: 0 };
        assert!(support_check(&zero, &w, 3).unwrap().iter().all(|r| r.tuples == 0 && r.diameter.is_none()));
        assert!(support_check(&one, &w, 4).is_err());
    }

    #[test]
    fn pairing_examples() {
        let w = line(10, 2);
        let phi = CoarseCochain::<i64>::jump(0, 0);
        let c = UfChain::from_terms(w.clone(), 1, [(vec![pt(&w, -5), pt(&w, 7)], 1)]).unwrap();
        assert_eq!(pair(&phi, &c).unwrap(), 1);
        assert_eq!(pair(&phi, &UfChain::zero(w.clone(), 1)).unwrap(), 0);
        let edge = UfChain::from_terms(w.clone(), 1, [(vec![pt(&w, 0), pt(&w, 9)], 1)]).unwrap();
        assert!(matches!(pair(&phi, &edge), Err(Error::MarginViolation { .. })));
        let vertex = UfChain::from_terms(w.clone(), 0, [(vec![pt(&w, 0)], 1)]).unwrap();
        assert!(matches!(pair(&phi, &vertex), Err(Error::DegreeMismatch { .. })));
    }

    #[test]
    fn pullbacks() {
        let w = line(12, 2);
        let big = line(40, 0);
        let jump = CoarseCochain::<i64>::jump(0, 0);
        let id = Arc::new(RoughMap::identity(w.clone()));
        let double = Arc::new(RoughMap::from_fn("2n", w.clone(), big.clone(), |x| vec![2 * x[0]]));
        let shift = Arc::new(RoughMap::from_fn("n+5", w.clone(), big.clone(), |x| vec![x[0] + 5]));
        let pid = CoarseCochain::pullback(id, jump.clone()).unwrap();
        let pdouble = CoarseCochain::pullback(double, jump.clone()).unwrap();
        let pshift = CoarseCochain::pullback(shift, jump.clone()).unwrap();
        assert_eq!(pdouble.evaluate(&w, &[pt(&w, -1), pt(&w, 1)]).unwrap(), 1);
        let moved = CoarseCochain::<i64>::jump(0, -5);
        for a in -10..=10 {
            for b in -10..=10 {
                let t = [pt(&w, a), pt(&w, b)];
                assert_eq!(pid.evaluate(&w, &t).unwrap(), jump.evaluate(&w, &t).unwrap());
                assert_eq!(pshift.evaluate(&w, &t).unwrap(), moved.evaluate(&w, &t).unwrap());
            }
        }
        let square = Arc::new(RoughMap::from_fn("n^2", w.clone(), w.clone(), |x| vec![x[0] * x[0]]));
        assert!(matches!(CoarseCochain::pullback(square, jump), Err(Error::ImageOutsideTarget { .. })));
    }

    #[test]
    fn pullback_composition() {
        let a = line(10, 2);
        let b = line(30, 0);
        let c = line(100, 0);
        let f = RoughMap::from_fn("3n", a.clone(), b.clone(), |x| vec![3 * x[0]]);
        let g = RoughMap::from_fn("n-4", b, c, |x| vec![x[0] - 4]);
        let gf = Arc::new(f.then(&g).unwrap());
        let f = Arc::new(f);
        let g = Arc::new(g);
        let phi = CoarseCochain::<i64>::jump(0, 1);
        let lhs = CoarseCochain::pullback(gf, phi.clone()).unwrap();
        let rhs = CoarseCochain::pullback(f, CoarseCochain::Pullback { map: g, inner: Box::new(phi) }).unwrap();
        for p in a.safe_points() {
            for q in a.safe_points() {
                assert_eq!(lhs.evaluate(&a, &[p, q]).unwrap(), rhs.evaluate(&a, &[p, q]).unwrap());
            }
        }
    }

    #[test]
    fn rough_examples() {
        let w = line(64, 4);
        let id = rough_check(&RoughMap::identity(w.clone()), &RoughCheckConfig::default()).unwrap();
        assert!(id.pass, "{:?}", id.warnings);
        assert!(id.forward.iter().all(|&(r, s)| r == s));
        assert!(id.backward.iter().all(|&(r, s)| r == s));
        assert!((id.forward_fit.exponent - 1.0).abs() < 1e-9);

        let big = line(130, 0);
        let double = RoughMap::from_fn("2n", w.clone(), big, |x| vec![2 * x[0]]);
        let rep = rough_check(&double, &RoughCheckConfig::default()).unwrap();
        assert!(rep.pass, "{:?}", rep.warnings);
        assert!(rep.forward.iter().all(|&(r, s)| s == 2 * r));
        assert!((rep.forward_fit.exponent - 1.0).abs() < 1e-9);

        let huge = line(3600, 0);
        let square = RoughMap::from_fn("n^2", w.clone(), huge, |x| vec![x[0] * x[0]]);
        let rep = rough_check(&square, &RoughCheckConfig::default()).unwrap();
        assert!(!rep.pass);
        assert!(!rep.warnings.is_empty());

        let small = line(20, 2);
        let err = rough_check(&RoughMap::identity(small), &RoughCheckConfig::default()).unwrap_err();
        assert!(matches!(err, Error::InsufficientSamples { .. }));
    }

    #[test]
    fn sweep_basics() {
        let w = line(16, 2);
        let phi = CoarseCochain::jump(0, 0);
        let sampler = EdgeFieldSampler::new(5, 3);
        let rep = continuity_sweep(&phi, 3, 50, &|t| Ok(sampler.sample(&w, t))).unwrap();
        assert!(rep.max_ratio.is_finite() && rep.max_ratio > 0.0);
        assert!(rep.max_ratio < std::f64::consts::PI.powi(2) / 6.0 * 2.0 + 1e-9);

        let scaled = continuity_sweep(&phi, 3, 50, &|t| Ok(sampler.sample(&w, t).scale(Complex64::new(10.0, 0.0))))
            .unwrap();
        for (a, b) in rep.rows.iter().zip(&scaled.rows) {
            assert!((a.ratio - b.ratio).abs() < 1e-12);
        }

        let p = pt(&w, 1);
        let diag = continuity_sweep(&phi, 3, 4, &|_| {
            UfChain::from_terms(w.clone(), 1, [(vec![p, p], Complex64::new(1.0, 0.0))])
        })
        .unwrap();
        assert_eq!(diag.trivial, 4);
        assert!(diag.rows.is_empty());
    }

    #[test]
    fn sweep_requires_closedness_checkable() {
        let w = line(10, 2);
        let closed = CoarseCochain::<Complex64>::Coordinate { axis: 0 }.coboundary();
        assert!(check_closed(&closed, &w, 3).is_ok());
        let open = CoarseCochain::Constant { degree: 1, value: Complex64::new(1.0, 0.0) };
        assert!(check_closed(&open, &w, 3).is_err());
    }

    #[test]
    fn unbounded_control_grows_with_window() {
        // The coboundary of the coordinate function is closed but not coarse:
        // its pairing ratio keeps growing with the window.
        let phi = CoarseCochain::<Complex64>::Coordinate { axis: 0 }.coboundary();
        let sampler = EdgeFieldSampler::new(11, 1);
        let max_at = |w: u32| {
            let win = line(w, 2);
            continuity_sweep(&phi, 1, 40, &|t| Ok(sampler.sample(&win, t))).unwrap().max_ratio
        };
        assert!(max_at(32) > 1.2 * max_at(16));
    }

    fn random_table(seed: u64, degree: usize, points: &[Vec<i64>]) -> CoarseCochain<Rational> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut entries = Vec::new();
        for _ in 0..30 {
            let t: Vec<Vec<i64>> = (0..=degree).map(|_| points[rng.random_range(0..points.len())].clone()).collect();
            entries.push((t, Rational::from_integer(rng.random_range(-3..=3))));
        }
        CoarseCochain::table(degree, entries).unwrap()
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn coboundary_squares_to_zero(seed in any::<u64>(), degree in 0usize..=2, skip in any::<bool>()) {
            let w = line(3, 0);
            let pts: Vec<Vec<i64>> = w.points().map(|p| w.coords(p).to_vec()).collect();
            let conv = if skip { CoboundaryConvention::SkipFirst } else { CoboundaryConvention::Full };
            let dd = random_table(seed, degree, &pts).coboundary_with(conv).coboundary_with(conv);
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 7);
            for _ in 0..50 {
                let t: Vec<PointId> = (0..degree + 3).map(|_| PointId(rng.random_range(0..w.len() as u32))).collect();
                prop_assert_eq!(dd.evaluate(&w, &t).unwrap(), Rational::from_integer(0));
            }
        }
    }
}
