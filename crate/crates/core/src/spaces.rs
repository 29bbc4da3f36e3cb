//! Finite windows of quasi-lattices.
//!
//! A [`Window`] is the ball of radius `W` around a base point in one of the
//! test spaces (ℤ^d, the discrete Heisenberg group, the 3-regular tree, the
//! half-line). Points whose distance to the base point is at most `W − margin`
//! are *margin-safe*: every identity that sums over a neighbourhood is only
//! evaluated there.

use std::collections::{HashMap, VecDeque};
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fit::linear_fit;

/// Default cap on the number of points (and Heisenberg word-length table
/// entries) a window may allocate.
pub const DEFAULT_POINT_BUDGET: usize = 4_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SpaceKind {
    /// ℤ^d with its standard generators.
    Zd { dim: usize },
    /// Integer Heisenberg group, generators x, y, normal form x^a y^b z^c.
    Heisenberg3,
    /// The 3-regular tree.
    Tree3,
    /// The half-line {0, 1, 2, …}; 0 is a genuine boundary point.
    IntervalZ,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Metric {
    L1,
    LInf,
    Word,
    Graph,
}

impl SpaceKind {
    pub fn default_metric(&self) -> Metric {
        match self {
            SpaceKind::Zd { .. } | SpaceKind::IntervalZ => Metric::L1,
            SpaceKind::Heisenberg3 => Metric::Word,
            SpaceKind::Tree3 => Metric::Graph,
        }
    }

    /// Parse a kind name as used on the command line and in JSON.
    pub fn parse(name: &str, dim: usize) -> Option<SpaceKind> {
        match name.to_ascii_lowercase().as_str() {
            "zd" | "z" => Some(SpaceKind::Zd { dim }),
            "heisenberg" | "heisenberg3" => Some(SpaceKind::Heisenberg3),
            "tree" | "tree3" => Some(SpaceKind::Tree3),
            "interval" | "intervalz" | "halfline" => Some(SpaceKind::IntervalZ),
            _ => None,
        }
    }

    fn coord_len(&self) -> usize {
        match self {
            SpaceKind::Zd { dim } => *dim,
            SpaceKind::Heisenberg3 => 3,
            SpaceKind::Tree3 => 2,
            SpaceKind::IntervalZ => 1,
        }
    }
}

/// Opaque handle of a point inside one window.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct PointId(pub u32);

impl PointId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// Serializable window descriptor:
/// `{"kind": "zd", "dim": 2, "W": 16, "margin": 4, "metric": "l1"}`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "WindowSpecRepr", into = "WindowSpecRepr")]
pub struct WindowSpec {
    pub kind: SpaceKind,
    #[serde(rename = "W")]
    pub radius: u32,
    pub margin: u32,
    pub metric: Metric,
}

#[derive(Serialize, Deserialize)]
struct WindowSpecRepr {
    kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    dim: Option<usize>,
    #[serde(rename = "W")]
    radius: u32,
    #[serde(default)]
    margin: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    metric: Option<Metric>,
}

impl TryFrom<WindowSpecRepr> for WindowSpec {
    type Error = String;

    fn try_from(r: WindowSpecRepr) -> std::result::Result<Self, String> {
        let kind = SpaceKind::parse(&r.kind, r.dim.unwrap_or(1))
            .ok_or_else(|| format!("unknown window kind {:?}", r.kind))?;
        Ok(WindowSpec {
            kind,
            radius: r.radius,
            margin: r.margin,
            metric: r.metric.unwrap_or(kind.default_metric()),
        })
    }
}

impl From<WindowSpec> for WindowSpecRepr {
    fn from(w: WindowSpec) -> Self {
        let (kind, dim) = match w.kind {
            SpaceKind::Zd { dim } => ("zd", Some(dim)),
            SpaceKind::Heisenberg3 => ("heisenberg3", None),
            SpaceKind::Tree3 => ("tree3", None),
            SpaceKind::IntervalZ => ("interval", None),
        };
        WindowSpecRepr {
            kind: kind.into(),
            dim,
            radius: w.radius,
            margin: w.margin,
            metric: Some(w.metric),
        }
    }
}

impl WindowSpec {
    pub fn new(kind: SpaceKind, radius: u32, margin: u32) -> Self {
        WindowSpec { kind, radius, margin, metric: kind.default_metric() }
    }

    pub fn zd(dim: usize, radius: u32, margin: u32) -> Self {
        Self::new(SpaceKind::Zd { dim }, radius, margin)
    }

    pub fn with_metric(mut self, metric: Metric) -> Self {
        self.metric = metric;
        self
    }

    pub fn build(&self) -> Result<Arc<Window>> {
        Window::new(self.clone())
    }
}

enum Lookup {
    /// Dense table over the box [-W, W]^d.
    Dense { offset: i64, side: usize, table: Vec<u32> },
    Hashed(HashMap<Vec<i64>, u32>),
}

/// A finite window of a quasi-lattice. Immutable after construction.
pub struct Window {
    spec: WindowSpec,
    stride: usize,
    coords: Vec<i64>,
    lookup: Lookup,
    depth: Vec<u32>,
    base: PointId,
    /// Word lengths of Heisenberg elements up to length 2W.
    word_length: Option<HashMap<[i64; 3], u32>>,
}

impl fmt::Debug for Window {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Window")
            .field("spec", &self.spec)
            .field("points", &self.len())
            .finish()
    }
}

impl PartialEq for Window {
    fn eq(&self, other: &Self) -> bool {
        self.spec == other.spec
    }
}

fn heisenberg_mul(g: [i64; 3], h: [i64; 3]) -> [i64; 3] {
    [g[0] + h[0], g[1] + h[1], g[2] + h[2] + g[0] * h[1]]
}

fn heisenberg_inv(g: [i64; 3]) -> [i64; 3] {
    [-g[0], -g[1], -g[2] + g[0] * g[1]]
}

const HEISENBERG_GENERATORS: [[i64; 3]; 4] = [[1, 0, 0], [-1, 0, 0], [0, 1, 0], [0, -1, 0]];

/// Breadth-first search over reduced words: every element of word length
/// at most `radius`, with its length.
fn heisenberg_ball(radius: u32, budget: usize) -> Result<HashMap<[i64; 3], u32>> {
    let mut seen = HashMap::new();
    seen.insert([0, 0, 0], 0u32);
    let mut queue = VecDeque::from([[0i64, 0, 0]]);
    while let Some(g) = queue.pop_front() {
        let d = seen[&g];
        if d == radius {
            continue;
        }
        for s in HEISENBERG_GENERATORS {
            let h = heisenberg_mul(g, s);
            if let std::collections::hash_map::Entry::Vacant(slot) = seen.entry(h) {
                slot.insert(d + 1);
                if seen.len() > budget {
                    return Err(Error::WindowTooLarge { requested: seen.len(), budget });
                }
                queue.push_back(h);
            }
        }
    }
    Ok(seen)
}

fn tree_parent(node: [i64; 2]) -> [i64; 2] {
    match node[0] {
        0 => node,
        1 => [0, 0],
        d => [d - 1, node[1] >> 1],
    }
}

fn tree_distance(a: [i64; 2], b: [i64; 2]) -> u32 {
    let (mut a, mut b) = (a, b);
    let mut dist = 0;
    while a[0] > b[0] {
        a = tree_parent(a);
        dist += 1;
    }
    while b[0] > a[0] {
        b = tree_parent(b);
        dist += 1;
    }
    while a != b {
        a = tree_parent(a);
        b = tree_parent(b);
        dist += 2;
    }
    dist
}

impl Window {
    pub fn new(spec: WindowSpec) -> Result<Arc<Window>> {
        Self::with_budget(spec, DEFAULT_POINT_BUDGET)
    }

    /// `make_window`: every point within distance `W` of the base point, in
    /// lexicographic coordinate order.
    pub fn with_budget(spec: WindowSpec, budget: usize) -> Result<Arc<Window>> {
        if spec.radius == 0 {
            return Err(Error::InvalidWindow("radius W must be at least 1".into()));
        }
        if spec.margin > spec.radius {
            return Err(Error::InvalidWindow(format!(
                "margin {} exceeds radius {}",
                spec.margin, spec.radius
            )));
        }
        let metric_ok = match (spec.kind, spec.metric) {
            (SpaceKind::Zd { dim }, Metric::L1 | Metric::LInf) => dim >= 1,
            (SpaceKind::IntervalZ, Metric::L1) => true,
            (SpaceKind::Heisenberg3, Metric::Word) => true,
            (SpaceKind::Tree3, Metric::Graph) => true,
            _ => false,
        };
        if !metric_ok {
            return Err(Error::UnsupportedKind(format!(
                "{:?} with metric {:?}",
                spec.kind, spec.metric
            )));
        }
        let w = spec.radius as i64;
        let mut word_length = None;
        let mut pts: Vec<Vec<i64>> = match spec.kind {
            SpaceKind::Zd { dim } => {
                let side = (2 * w + 1) as f64;
                let estimate = side.powi(dim as i32);
                if estimate > budget as f64 {
                    return Err(Error::WindowTooLarge { requested: estimate as usize, budget });
                }
                let mut out = Vec::new();
                let mut cur = vec![-w; dim];
                loop {
                    let keep = match spec.metric {
                        Metric::LInf => true,
                        _ => cur.iter().map(|c| c.abs()).sum::<i64>() <= w,
                    };
                    if keep {
                        out.push(cur.clone());
                    }
                    let mut i = dim;
                    loop {
                        if i == 0 {
                            break;
                        }
                        i -= 1;
                        if cur[i] < w {
                            cur[i] += 1;
                            break;
                        }
                        cur[i] = -w;
                        if i == 0 {
                            i = usize::MAX;
                            break;
                        }
                    }
                    if i == usize::MAX {
                        break;
                    }
                }
                out
            }
            SpaceKind::IntervalZ => (0..=w).map(|x| vec![x]).collect(),
            SpaceKind::Heisenberg3 => {
                let table = heisenberg_ball(2 * spec.radius, budget)?;
                let pts = table
                    .iter()
                    .filter(|(_, &d)| d <= spec.radius)
                    .map(|(g, _)| g.to_vec())
                    .collect();
                word_length = Some(table);
                pts
            }
            SpaceKind::Tree3 => {
                let count = 1.0 + 3.0 * (2f64.powi(spec.radius as i32) - 1.0);
                if count > budget as f64 {
                    return Err(Error::WindowTooLarge { requested: count as usize, budget });
                }
                let mut out = vec![vec![0, 0]];
                for depth in 1..=w {
                    let width = 3i64 << (depth - 1);
                    out.extend((0..width).map(|i| vec![depth, i]));
                }
                out
            }
        };
        pts.sort();
        let stride = spec.kind.coord_len();
        let coords: Vec<i64> = pts.iter().flatten().copied().collect();
        let lookup = match spec.kind {
            SpaceKind::Zd { .. } | SpaceKind::IntervalZ => {
                let side = (2 * w + 1) as usize;
                let mut table = vec![u32::MAX; side.pow(stride as u32)];
                for (i, p) in pts.iter().enumerate() {
                    let mut idx = 0usize;
                    for &c in p {
                        idx = idx * side + (c + w) as usize;
                    }
                    table[idx] = i as u32;
                }
                Lookup::Dense { offset: w, side, table }
            }
            _ => Lookup::Hashed(pts.iter().enumerate().map(|(i, p)| (p.clone(), i as u32)).collect()),
        };
        let mut win = Window {
            spec,
            stride,
            coords,
            lookup,
            depth: Vec::new(),
            base: PointId(0),
            word_length,
        };
        let origin = vec![0i64; stride];
        win.base = win.lookup(&origin).expect("base point is always in the window");
        win.depth = (0..win.len() as u32).map(|i| win.distance(win.base, PointId(i))).collect();
        Ok(Arc::new(win))
    }

    pub fn spec(&self) -> &WindowSpec {
        &self.spec
    }

    pub fn kind(&self) -> SpaceKind {
        self.spec.kind
    }

    pub fn radius(&self) -> u32 {
        self.spec.radius
    }

    pub fn margin(&self) -> u32 {
        self.spec.margin
    }

    /// Points at depth at most this value are margin-safe.
    pub fn safe_radius(&self) -> u32 {
        self.spec.radius - self.spec.margin
    }

    pub fn len(&self) -> usize {
        self.coords.len() / self.stride
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn base(&self) -> PointId {
        self.base
    }

    pub fn points(&self) -> impl Iterator<Item = PointId> + '_ {
        (0..self.len() as u32).map(PointId)
    }

    pub fn coords(&self, p: PointId) -> &[i64] {
        &self.coords[p.index() * self.stride..(p.index() + 1) * self.stride]
    }

    pub fn contains(&self, p: PointId) -> bool {
        p.index() < self.len()
    }

    pub fn lookup(&self, coords: &[i64]) -> Option<PointId> {
        if coords.len() != self.stride {
            return None;
        }
        match &self.lookup {
            Lookup::Dense { offset, side, table } => {
                let mut idx = 0usize;
                for &c in coords {
                    let shifted = c + offset;
                    if shifted < 0 || shifted as usize >= *side {
                        return None;
                    }
                    idx = idx * side + shifted as usize;
                }
                match table[idx] {
                    u32::MAX => None,
                    i => Some(PointId(i)),
                }
            }
            Lookup::Hashed(map) => map.get(coords).map(|&i| PointId(i)),
        }
    }

    /// Distance from the base point.
    #[inline]
    pub fn depth(&self, p: PointId) -> u32 {
        self.depth[p.index()]
    }

    #[inline]
    pub fn is_safe(&self, p: PointId) -> bool {
        self.depth(p) <= self.safe_radius()
    }

    pub fn safe_points(&self) -> Vec<PointId> {
        self.points().filter(|&p| self.is_safe(p)).collect()
    }

    /// The integer-valued metric. Both points must belong to this window.
    pub fn distance(&self, p: PointId, q: PointId) -> u32 {
        let a = self.coords(p);
        let b = self.coords(q);
        match (self.spec.kind, self.spec.metric) {
            (SpaceKind::Zd { .. } | SpaceKind::IntervalZ, Metric::LInf) => {
                a.iter().zip(b).map(|(x, y)| (x - y).unsigned_abs()).max().unwrap_or(0) as u32
            }
            (SpaceKind::Zd { .. } | SpaceKind::IntervalZ, _) => {
                a.iter().zip(b).map(|(x, y)| (x - y).unsigned_abs()).sum::<u64>() as u32
            }
            (SpaceKind::Heisenberg3, _) => {
                let g = [a[0], a[1], a[2]];
                let h = [b[0], b[1], b[2]];
                let rel = heisenberg_mul(heisenberg_inv(g), h);
                *self
                    .word_length
                    .as_ref()
                    .and_then(|t| t.get(&rel))
                    .expect("word-length table covers all pairs of the window")
            }
            (SpaceKind::Tree3, _) => tree_distance([a[0], a[1]], [b[0], b[1]]),
        }
    }

    /// `distance` with the membership check surfaced as an error.
    pub fn checked_distance(&self, p: PointId, q: PointId) -> Result<u32> {
        for x in [p, q] {
            if !self.contains(x) {
                return Err(Error::PointNotInWindow { module: "spaces", point: format!("{:?}", x) });
            }
        }
        Ok(self.distance(p, q))
    }

    /// Diameter of a tuple: the largest pairwise distance.
    pub fn tuple_length(&self, tuple: &[PointId]) -> u32 {
        let mut best = 0;
        for i in 0..tuple.len() {
            for j in i + 1..tuple.len() {
                best = best.max(self.distance(tuple[i], tuple[j]));
            }
        }
        best
    }

    /// All window points within distance `r` of `center`, ignoring margins.
    pub fn neighbors_within(&self, center: PointId, r: u32) -> Vec<PointId> {
        match self.spec.kind {
            SpaceKind::Zd { .. } | SpaceKind::IntervalZ => {
                let c = self.coords(center).to_vec();
                let r = r as i64;
                let dim = c.len();
                let mut out = Vec::new();
                let mut off = vec![-r; dim];
                let mut probe = c.clone();
                loop {
                    let ok = match self.spec.metric {
                        Metric::LInf => true,
                        _ => off.iter().map(|o| o.abs()).sum::<i64>() <= r,
                    };
                    if ok {
                        for k in 0..dim {
                            probe[k] = c[k] + off[k];
                        }
                        if let Some(p) = self.lookup(&probe) {
                            out.push(p);
                        }
                    }
                    let mut k = dim;
                    let mut done = true;
                    while k > 0 {
                        k -= 1;
                        if off[k] < r {
                            off[k] += 1;
                            done = false;
                            break;
                        }
                        off[k] = -r;
                    }
                    if done {
                        break;
                    }
                }
                out.sort();
                out
            }
            _ => self.points().filter(|&q| self.distance(center, q) <= r).collect(),
        }
    }

    /// The closed ball around `center`, which must lie entirely inside the
    /// window.
    pub fn ball(&self, center: PointId, r: u32) -> Result<Vec<PointId>> {
        if !self.contains(center) {
            return Err(Error::PointNotInWindow { module: "spaces", point: format!("{:?}", center) });
        }
        if self.depth(center) + r > self.radius() {
            return Err(Error::margin(
                "spaces",
                format!(
                    "ball of radius {r} around a point at depth {} exits the window of radius {} (needs depth + R ≤ W)",
                    self.depth(center),
                    self.radius()
                ),
            ));
        }
        Ok(self.neighbors_within(center, r))
    }

    pub fn ball_volume(&self, center: PointId, r: u32) -> Result<usize> {
        Ok(self.ball(center, r)?.len())
    }

    pub fn describe(&self, p: PointId) -> String {
        format!("{:?}", self.coords(p))
    }
}

/// Polynomial growth estimate `vol B_R ≤ D · R^M`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GrowthFit {
    #[serde(rename = "D")]
    pub coefficient: f64,
    #[serde(rename = "M")]
    pub exponent: f64,
    pub residual: f64,
    pub exponential_residual: f64,
    pub exponential_flag: bool,
    pub volumes: Vec<(u32, usize)>,
}

#[derive(Clone, Copy, Debug)]
pub struct GrowthFitConfig {
    /// Exponential growth is flagged when the exponential model's residual
    /// times this factor is below the polynomial model's residual.
    pub exponential_factor: f64,
}

impl Default for GrowthFitConfig {
    fn default() -> Self {
        GrowthFitConfig { exponential_factor: 2.0 }
    }
}

impl Window {
    pub fn fit_growth(&self) -> Result<GrowthFit> {
        self.fit_growth_with(GrowthFitConfig::default())
    }

    /// Least-squares fit of `log vol B_R` against `log(R + 1/2)` over
    /// `R = 1..W`. On an integer metric the ball of radius `R` is the ball of
    /// every real radius in `[R, R+1)`, so the midpoint is the regressor. `D`
    /// is then raised until `vol B_R ≤ D R^M` holds at every measured `R`.
    pub fn fit_growth_with(&self, cfg: GrowthFitConfig) -> Result<GrowthFit> {
        if self.len() <= 1 {
            return Err(Error::Degenerate { module: "spaces", detail: "single-point window".into() });
        }
        if self.radius() < 4 {
            return Err(Error::precondition("spaces", "fit_growth needs window radius ≥ 4"));
        }
        let mut counts = vec![0usize; self.radius() as usize + 1];
        for p in self.points() {
            counts[self.depth(p) as usize] += 1;
        }
        let mut volumes = Vec::new();
        let mut acc = 0;
        for (r, c) in counts.iter().enumerate() {
            acc += c;
            if r >= 1 {
                volumes.push((r as u32, acc));
            }
        }
        let xs: Vec<f64> = volumes.iter().map(|&(r, _)| (r as f64 + 0.5).ln()).collect();
        let rs: Vec<f64> = volumes.iter().map(|&(r, _)| r as f64).collect();
        let ys: Vec<f64> = volumes.iter().map(|&(_, v)| (v as f64).ln()).collect();
        let (exponent, _, residual) = linear_fit(&xs, &ys);
        let (_, _, exponential_residual) = linear_fit(&rs, &ys);
        let coefficient = volumes
            .iter()
            .map(|&(r, v)| v as f64 / (r as f64).powf(exponent))
            .fold(0.0, f64::max);
        Ok(GrowthFit {
            coefficient,
            exponent,
            residual,
            exponential_residual,
            exponential_flag: exponential_residual * cfg.exponential_factor < residual,
            volumes,
        })
    }
}

/// Result of checking the two quasi-lattice conditions on a subset.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct QuasiLatticeReport {
    /// Coarse density: max distance from a margin-safe point to the subset.
    pub density: u32,
    /// `K_r`: max number of subset points in an `r`-ball around a subset point.
    pub local_counts: Vec<(u32, usize)>,
}

impl QuasiLatticeReport {
    pub fn k(&self, r: u32) -> Option<usize> {
        self.local_counts.iter().find(|e| e.0 == r).map(|e| e.1)
    }
}

impl Window {
    pub fn quasi_lattice_check(&self, subset: &[PointId]) -> Result<QuasiLatticeReport> {
        if subset.is_empty() {
            return Err(Error::Empty { module: "spaces", detail: "quasi-lattice subset".into() });
        }
        let density = self
            .safe_points()
            .into_iter()
            .map(|p| subset.iter().map(|&y| self.distance(p, y)).min().unwrap())
            .max()
            .unwrap_or(0);
        let mut local_counts = Vec::new();
        for r in 1..=self.radius() {
            let k = subset
                .iter()
                .map(|&y| subset.iter().filter(|&&z| self.distance(y, z) <= r).count())
                .max()
                .unwrap();
            local_counts.push((r, k));
        }
        Ok(QuasiLatticeReport { density, local_counts })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn z(dim: usize, w: u32, m: u32) -> Arc<Window> {
        WindowSpec::zd(dim, w, m).build().unwrap()
    }

    #[test]
    fn interval_count() {
        let w = z(1, 10, 2);
        assert_eq!(w.len(), 21);
        assert_eq!(w.coords(PointId(0)), &[-10]);
        assert_eq!(w.safe_points().len(), 17);
    }

    #[test]
    fn l1_unit_ball_in_z2() {
        assert_eq!(z(2, 1, 0).len(), 5);
        let linf = WindowSpec::zd(2, 1, 0).with_metric(Metric::LInf).build().unwrap();
        assert_eq!(linf.len(), 9);
    }

    #[test]
    fn heisenberg_window_matches_bfs_oracle() {
        // Independent BFS over words in the 3x3 unipotent matrix model.
        fn mat_mul(a: [[i64; 3]; 3], b: [[i64; 3]; 3]) -> [[i64; 3]; 3] {
            let mut c = [[0; 3]; 3];
            for i in 0..3 {
                for j in 0..3 {
                    for k in 0..3 {
                        c[i][j] += a[i][k] * b[k][j];
                    }
                }
            }
            c
        }
        let id = [[1, 0, 0], [0, 1, 0], [0, 0, 1]];
        let gens = [
            [[1, 1, 0], [0, 1, 0], [0, 0, 1]],
            [[1, -1, 0], [0, 1, 0], [0, 0, 1]],
            [[1, 0, 0], [0, 1, 1], [0, 0, 1]],
            [[1, 0, 0], [0, 1, -1], [0, 0, 1]],
        ];
        let mut seen = std::collections::HashSet::from([id]);
        let mut frontier = vec![id];
        for _ in 0..4 {
            let mut next = Vec::new();
            for g in &frontier {
                for s in &gens {
                    let h = mat_mul(*g, *s);
                    if seen.insert(h) {
                        next.push(h);
                    }
                }
            }
            frontier = next;
        }
        let w = WindowSpec::new(SpaceKind::Heisenberg3, 4, 1).build().unwrap();
        assert_eq!(w.len(), seen.len());
        assert_eq!(w.len(), 135);
    }

    #[test]
    fn distances() {
        let w = z(2, 5, 0);
        let a = w.lookup(&[0, 0]).unwrap();
        let b = w.lookup(&[2, 3]).unwrap();
        assert_eq!(w.distance(a, b), 5);
        assert_eq!(w.distance(b, b), 0);

        let h = WindowSpec::new(SpaceKind::Heisenberg3, 4, 0).build().unwrap();
        let e = h.base();
        let z = h.lookup(&[0, 0, 1]).unwrap();
        assert_eq!(h.distance(e, z), 4);
        assert!(h.checked_distance(e, PointId(1_000_000)).is_err());
    }

    #[test]
    fn ball_volumes() {
        let w = z(1, 10, 2);
        assert_eq!(w.ball_volume(w.base(), 2).unwrap(), 5);
        let w2 = z(2, 4, 1);
        assert_eq!(w2.ball_volume(w2.base(), 1).unwrap(), 5);
        let t = WindowSpec::new(SpaceKind::Tree3, 5, 1).build().unwrap();
        assert_eq!(t.ball_volume(t.base(), 3).unwrap(), 22);
        let edge = w.lookup(&[9]).unwrap();
        let err = w.ball_volume(edge, 2).unwrap_err();
        assert!(err.to_string().contains("margin"));
    }

    #[test]
    fn z2_volumes_match_enumeration() {
        let w = z(2, 12, 0);
        for r in 0..=12u32 {
            let brute = (-(r as i64)..=r as i64)
                .flat_map(|x| (-(r as i64)..=r as i64).map(move |y| (x, y)))
                .filter(|(x, y)| x.abs() + y.abs() <= r as i64)
                .count();
            assert_eq!(w.ball_volume(w.base(), r).unwrap(), brute);
            assert_eq!(brute as u32, 2 * r * r + 2 * r + 1);
        }
    }

    #[test]
    fn triangle_inequality_all_kinds() {
        let windows = vec![
            z(1, 12, 0),
            z(2, 6, 0),
            WindowSpec::zd(3, 3, 0).with_metric(Metric::LInf).build().unwrap(),
            WindowSpec::new(SpaceKind::Heisenberg3, 4, 0).build().unwrap(),
            WindowSpec::new(SpaceKind::Tree3, 5, 0).build().unwrap(),
            WindowSpec::new(SpaceKind::IntervalZ, 10, 0).build().unwrap(),
        ];
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for w in windows {
            let n = w.len() as u32;
            for _ in 0..1000 {
                let [a, b, c] = [0; 3].map(|_| PointId(rng.random_range(0..n)));
                assert!(w.distance(a, c) <= w.distance(a, b) + w.distance(b, c));
                assert_eq!(w.distance(a, b), w.distance(b, a));
                assert_eq!(w.distance(a, b) == 0, a == b);
            }
        }
    }

    #[test]
    fn ball_volume_monotone() {
        let w = WindowSpec::new(SpaceKind::Heisenberg3, 5, 0).build().unwrap();
        let mut prev = 0;
        for r in 0..=5 {
            let v = w.ball_volume(w.base(), r).unwrap();
            assert!(v >= prev);
            prev = v;
        }
    }

    #[test]
    fn growth_fits() {
        let f1 = z(1, 16, 0).fit_growth().unwrap();
        assert!((0.9..=1.1).contains(&f1.exponent), "{}", f1.exponent);
        assert!(!f1.exponential_flag);
        let f2 = z(2, 16, 0).fit_growth().unwrap();
        assert!((1.8..=2.2).contains(&f2.exponent), "{}", f2.exponent);
        for &(r, v) in &f2.volumes {
            assert!(v as f64 <= f2.coefficient * (r as f64).powf(f2.exponent) * (1.0 + 1e-12));
        }
        let t = WindowSpec::new(SpaceKind::Tree3, 8, 0).build().unwrap().fit_growth().unwrap();
        assert!(t.exponential_flag);
        let h = WindowSpec::new(SpaceKind::Heisenberg3, 10, 0).build().unwrap().fit_growth().unwrap();
        assert!(!h.exponential_flag);
        assert!((3.2..=4.8).contains(&h.exponent), "{}", h.exponent);
    }

    #[test]
    fn growth_fit_rejects_small_windows() {
        assert!(z(1, 3, 0).fit_growth().is_err());
    }

    #[test]
    fn quasi_lattice() {
        let w = z(1, 10, 2);
        let all: Vec<PointId> = w.points().collect();
        let rep = w.quasi_lattice_check(&all).unwrap();
        assert_eq!(rep.density, 0);
        assert_eq!(rep.k(1), Some(3));
        let evens: Vec<PointId> = w.points().filter(|&p| w.coords(p)[0] % 2 == 0).collect();
        let rep = w.quasi_lattice_check(&evens).unwrap();
        assert_eq!(rep.density, 1);
        assert_eq!(rep.k(2), Some(3));
        assert!(w.quasi_lattice_check(&[]).is_err());
    }

    #[test]
    fn budget_enforced() {
        let err = Window::with_budget(WindowSpec::zd(3, 50, 0), 10_000).unwrap_err();
        assert!(matches!(err, Error::WindowTooLarge { .. }));
    }

    #[test]
    fn descriptor_json() {
        let spec = WindowSpec::zd(2, 16, 4);
        let json = serde_json::to_string(&spec).unwrap();
        assert_eq!(json, r#"{"kind":"zd","dim":2,"W":16,"margin":4,"metric":"l1"}"#);
        let back: WindowSpec = serde_json::from_str(r#"{"kind":"tree3","W":5,"margin":1}"#).unwrap();
        assert_eq!(back, WindowSpec::new(SpaceKind::Tree3, 5, 1));
        assert!(serde_json::from_str::<WindowSpec>(r#"{"kind":"torus","W":5}"#).is_err());
    }
}
