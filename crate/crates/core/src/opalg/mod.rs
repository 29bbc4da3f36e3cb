//! Block-banded operators on `ℓ²(window) ⊗ ℂ^f`, the dominating-function
//! calculus and the quantitative smooth-subalgebra estimates.

mod generators;
mod mu;
mod norm;
mod series;

pub use generators::*;
pub use mu::*;
pub use norm::*;
pub use series::*;

use std::collections::BTreeMap;
use std::hash::{DefaultHasher, Hash, Hasher};
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::spaces::{PointId, Window};

pub(crate) const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub(crate) const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// A sparse matrix of `f×f` blocks indexed by window points, stored in
/// compressed rows. Blocks are row-major; stored blocks are nonzero.
#[derive(Clone)]
pub struct BandedOperator {
    window: Arc<Window>,
    fiber: usize,
    row_ptr: Vec<usize>,
    cols: Vec<u32>,
    vals: Vec<Complex64>,
    fingerprint: u64,
}

impl std::fmt::Debug for BandedOperator {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("BandedOperator")
            .field("points", &self.window.len())
            .field("fiber", &self.fiber)
            .field("blocks", &self.cols.len())
            .field("propagation", &self.propagation())
            .finish()
    }
}

/// Accumulates blocks before freezing them into a [`BandedOperator`].
pub struct OperatorBuilder {
    window: Arc<Window>,
    fiber: usize,
    rows: Vec<BTreeMap<u32, Vec<Complex64>>>,
}

impl OperatorBuilder {
    pub fn new(window: Arc<Window>, fiber: usize) -> Self {
        let rows = vec![BTreeMap::new(); window.len()];
        OperatorBuilder { window, fiber: fiber.max(1), rows }
    }

    /// Adds `block` (row-major, `f×f`) to the entry at `(row, col)`.
    pub fn add_block(&mut self, row: PointId, col: PointId, block: &[Complex64]) -> Result<()> {
        let f2 = self.fiber * self.fiber;
        if block.len() != f2 {
            return Err(Error::OperatorMismatch(format!(
                "block has {} entries, fiber {} needs {f2}",
                block.len(),
                self.fiber
            )));
        }
        for p in [row, col] {
            if !self.window.contains(p) {
                return Err(Error::PointNotInWindow { module: "opalg", point: format!("{p:?}") });
            }
        }
        self.add_unchecked(row.0, col.0, block);
        Ok(())
    }

    pub fn add_scalar(&mut self, row: PointId, col: PointId, value: Complex64) -> Result<()> {
        let mut block = vec![ZERO; self.fiber * self.fiber];
        for i in 0..self.fiber {
            block[i * self.fiber + i] = value;
        }
        self.add_block(row, col, &block)
    }

    fn add_unchecked(&mut self, row: u32, col: u32, block: &[Complex64]) {
        let entry = self.rows[row as usize].entry(col).or_insert_with(|| vec![ZERO; block.len()]);
        for (e, b) in entry.iter_mut().zip(block) {
            *e += b;
        }
    }

    pub fn build(self) -> BandedOperator {
        let mut row_ptr = Vec::with_capacity(self.rows.len() + 1);
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        row_ptr.push(0);
        for row in self.rows {
            for (c, block) in row {
                if block.iter().any(|z| *z != ZERO) {
                    cols.push(c);
                    vals.extend(block);
                }
            }
            row_ptr.push(cols.len());
        }
        BandedOperator::from_parts(self.window, self.fiber, row_ptr, cols, vals)
    }
}

impl BandedOperator {
    fn from_parts(window: Arc<Window>, fiber: usize, row_ptr: Vec<usize>, cols: Vec<u32>, vals: Vec<Complex64>) -> Self {
        let mut h = DefaultHasher::new();
        window.spec().hash(&mut h);
        fiber.hash(&mut h);
        row_ptr.hash(&mut h);
        cols.hash(&mut h);
        for v in &vals {
            v.re.to_bits().hash(&mut h);
            v.im.to_bits().hash(&mut h);
        }
        BandedOperator { window, fiber, row_ptr, cols, vals, fingerprint: h.finish() }
    }

    pub fn zero(window: Arc<Window>, fiber: usize) -> Self {
        OperatorBuilder::new(window, fiber).build()
    }

    pub fn identity(window: Arc<Window>, fiber: usize) -> Self {
        let mut b = OperatorBuilder::new(window.clone(), fiber);
        for p in window.points() {
            b.add_scalar(p, p, ONE).unwrap();
        }
        b.build()
    }

    pub fn window(&self) -> &Arc<Window> {
        &self.window
    }

    pub fn fiber(&self) -> usize {
        self.fiber
    }

    /// Dimension of the underlying Hilbert space.
    pub fn dim(&self) -> usize {
        self.window.len() * self.fiber
    }

    /// Content hash; equal operators have equal fingerprints.
    pub fn fingerprint(&self) -> u64 {
        self.fingerprint
    }

    pub fn block_count(&self) -> usize {
        self.cols.len()
    }

    pub fn is_zero(&self) -> bool {
        self.cols.is_empty()
    }

    /// Nonzero blocks of one row as `(column, block)`.
    pub fn row(&self, row: PointId) -> impl Iterator<Item = (PointId, &[Complex64])> {
        let f2 = self.fiber * self.fiber;
        let (lo, hi) = (self.row_ptr[row.index()], self.row_ptr[row.index() + 1]);
        (lo..hi).map(move |k| (PointId(self.cols[k]), &self.vals[k * f2..(k + 1) * f2]))
    }

    /// All nonzero blocks as `(row, column, block)`.
    pub fn entries(&self) -> impl Iterator<Item = (PointId, PointId, &[Complex64])> {
        self.window.points().flat_map(move |r| self.row(r).map(move |(c, b)| (r, c, b)))
    }

    pub fn block(&self, row: PointId, col: PointId) -> Option<&[Complex64]> {
        let f2 = self.fiber * self.fiber;
        let (lo, hi) = (self.row_ptr[row.index()], self.row_ptr[row.index() + 1]);
        self.cols[lo..hi].binary_search(&col.0).ok().map(|k| &self.vals[(lo + k) * f2..(lo + k + 1) * f2])
    }

    /// The `(0, 0)` component of block `(row, col)`; the entry itself when
    /// the fiber is one-dimensional.
    pub fn entry(&self, row: PointId, col: PointId) -> Complex64 {
        self.block(row, col).map(|b| b[0]).unwrap_or(ZERO)
    }

    /// Max `d(x, y)` over stored blocks.
    pub fn propagation(&self) -> u32 {
        self.entries().map(|(r, c, _)| self.window.distance(r, c)).max().unwrap_or(0)
    }

    fn check_compatible(&self, other: &Self) -> Result<()> {
        if *self.window != *other.window {
            return Err(Error::OperatorMismatch("operators live on different windows".into()));
        }
        if self.fiber != other.fiber {
            return Err(Error::OperatorMismatch(format!(
                "fiber dimensions differ: {} vs {}",
                self.fiber, other.fiber
            )));
        }
        Ok(())
    }

    fn builder(&self) -> OperatorBuilder {
        OperatorBuilder::new(self.window.clone(), self.fiber)
    }

    fn map_blocks(&self, keep: impl Fn(PointId, PointId) -> bool, scale: Complex64) -> Self {
        let mut b = self.builder();
        for (r, c, block) in self.entries() {
            if keep(r, c) {
                let scaled: Vec<Complex64> = block.iter().map(|z| z * scale).collect();
                b.add_unchecked(r.0, c.0, &scaled);
            }
        }
        b.build()
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        let mut b = self.builder();
        for (r, c, block) in self.entries().chain(other.entries()) {
            b.add_unchecked(r.0, c.0, block);
        }
        Ok(b.build())
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.scale(-ONE))
    }

    pub fn scale(&self, z: Complex64) -> Self {
        if z == ZERO {
            return Self::zero(self.window.clone(), self.fiber);
        }
        self.map_blocks(|_, _| true, z)
    }

    /// `self + z · 1`.
    pub fn add_identity(&self, z: Complex64) -> Self {
        self.add(&Self::identity(self.window.clone(), self.fiber).scale(z)).unwrap()
    }

    /// `self · other`.
    pub fn compose(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        let f = self.fiber;
        let mut b = self.builder();
        let mut prod = vec![ZERO; f * f];
        for r in self.window.points() {
            for (mid, a) in self.row(r) {
                for (c, bb) in other.row(mid) {
                    prod.iter_mut().for_each(|z| *z = ZERO);
                    for i in 0..f {
                        for k in 0..f {
                            let aik = a[i * f + k];
                            if aik == ZERO {
                                continue;
                            }
                            for j in 0..f {
                                prod[i * f + j] += aik * bb[k * f + j];
                            }
                        }
                    }
                    b.add_unchecked(r.0, c.0, &prod);
                }
            }
        }
        Ok(b.build())
    }

    /// `self^k` for `k ≥ 0`.
    pub fn power(&self, k: u32) -> Self {
        let mut acc = Self::identity(self.window.clone(), self.fiber);
        for _ in 0..k {
            acc = acc.compose(self).unwrap();
        }
        acc
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        let f = self.fiber;
        let mut b = self.builder();
        let mut t = vec![ZERO; f * f];
        for (r, c, block) in self.entries() {
            for i in 0..f {
                for j in 0..f {
                    t[j * f + i] = block[i * f + j].conj();
                }
            }
            b.add_unchecked(c.0, r.0, &t);
        }
        b.build()
    }

    /// Keep only blocks with `d(x, y) > radius`.
    pub fn off_band(&self, radius: u32) -> Self {
        self.map_blocks(|r, c| self.window.distance(r, c) > radius, ONE)
    }

    /// `P A P` for the coordinate projection onto points satisfying `keep`.
    pub fn compress(&self, keep: impl Fn(PointId) -> bool) -> Self {
        self.map_blocks(|r, c| keep(r) && keep(c), ONE)
    }

    /// Compression to the margin-safe core.
    pub fn safe_compression(&self) -> Self {
        let w = self.window.clone();
        self.compress(|p| w.is_safe(p))
    }

    /// `y = A x` on vectors of length `dim()`, laid out point-major.
    pub fn apply(&self, x: &[Complex64], y: &mut [Complex64]) {
        let f = self.fiber;
        y.iter_mut().for_each(|z| *z = ZERO);
        for r in 0..self.window.len() {
            let out = &mut y[r * f..(r + 1) * f];
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                let c = self.cols[k] as usize;
                let block = &self.vals[k * f * f..(k + 1) * f * f];
                let inp = &x[c * f..(c + 1) * f];
                for i in 0..f {
                    let mut s = ZERO;
                    for j in 0..f {
                        s += block[i * f + j] * inp[j];
                    }
                    out[i] += s;
                }
            }
        }
    }

    /// `y = A* x`.
    pub fn apply_adjoint(&self, x: &[Complex64], y: &mut [Complex64]) {
        let f = self.fiber;
        y.iter_mut().for_each(|z| *z = ZERO);
        for r in 0..self.window.len() {
            let inp = &x[r * f..(r + 1) * f];
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                let c = self.cols[k] as usize;
                let block = &self.vals[k * f * f..(k + 1) * f * f];
                let out = &mut y[c * f..(c + 1) * f];
                for i in 0..f {
                    for j in 0..f {
                        out[j] += block[i * f + j].conj() * inp[i];
                    }
                }
            }
        }
    }

    /// Largest entrywise difference; `None` when shapes differ.
    pub fn max_abs_diff(&self, other: &Self) -> Option<f64> {
        self.check_compatible(other).ok()?;
        let diff = self.sub(other).ok()?;
        Some(diff.vals.iter().map(|z| z.norm()).fold(0.0, f64::max))
    }

    /// Sum of the diagonal block traces.
    pub fn trace(&self) -> Complex64 {
        let f = self.fiber;
        self.window
            .points()
            .filter_map(|p| self.block(p, p))
            .map(|b| (0..f).map(|i| b[i * f + i]).sum::<Complex64>())
            .sum()
    }

    /// Dense row-major matrix, for oracles on small windows.
    pub fn to_dense(&self) -> Vec<Complex64> {
        let n = self.dim();
        let f = self.fiber;
        let mut m = vec![ZERO; n * n];
        for (r, c, block) in self.entries() {
            for i in 0..f {
                for j in 0..f {
                    m[(r.index() * f + i) * n + c.index() * f + j] = block[i * f + j];
                }
            }
        }
        m
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spaces::WindowSpec;

    fn line(w: u32, m: u32) -> Arc<Window> {
        WindowSpec::zd(1, w, m).build().unwrap()
    }

    #[test]
    fn shift_isometry_on_safe_core() {
        let w = line(12, 2);
        let s = shift(&w, 0, 1).unwrap();
        let ss = s.adjoint().compose(&s).unwrap().safe_compression();
        let id = BandedOperator::identity(w.clone(), 1).safe_compression();
        assert_eq!(ss.max_abs_diff(&id), Some(0.0));
        assert_eq!(s.compose(&s).unwrap().propagation(), 2);
    }

    #[test]
    fn diagonal_products() {
        let w = line(6, 0);
        let p = diagonal(&w, |c| Complex64::new(c[0] as f64, 0.0));
        let q = diagonal(&w, |c| Complex64::new(1.0, c[0] as f64));
        let pq = diagonal(&w, |c| Complex64::new(c[0] as f64, 0.0) * Complex64::new(1.0, c[0] as f64));
        assert!(p.compose(&q).unwrap().max_abs_diff(&pq).unwrap() < 1e-15);
    }

    #[test]
    fn adjoint_reverses_products() {
        let w = WindowSpec::zd(2, 6, 2).build().unwrap();
        let a = random_banded(&w, 1, 2, 0.5, 2);
        let b = random_banded(&w, 2, 1, 0.7, 2);
        let lhs = a.compose(&b).unwrap().adjoint();
        let rhs = b.adjoint().compose(&a.adjoint()).unwrap();
        assert!(lhs.max_abs_diff(&rhs).unwrap() < 1e-12);
        assert_eq!(a.adjoint().adjoint().max_abs_diff(&a), Some(0.0));
        assert!(a.compose(&b).unwrap().propagation() <= a.propagation() + b.propagation());
    }

    #[test]
    fn mismatched_windows_rejected() {
        let a = BandedOperator::identity(line(6, 0), 1);
        let b = BandedOperator::identity(line(7, 0), 1);
        assert!(matches!(a.add(&b), Err(Error::OperatorMismatch(_))));
        let c = BandedOperator::identity(line(6, 0), 2);
        assert!(a.compose(&c).is_err());
    }

    #[test]
    fn apply_matches_dense() {
        let w = line(5, 0);
        let a = random_banded(&w, 9, 2, 0.5, 2);
        let dense = a.to_dense();
        let n = a.dim();
        let x: Vec<Complex64> = (0..n).map(|i| Complex64::new(i as f64, 1.0 - i as f64)).collect();
        let mut y = vec![ZERO; n];
        a.apply(&x, &mut y);
        let mut z = vec![ZERO; n];
        a.apply_adjoint(&x, &mut z);
        for i in 0..n {
            let yi: Complex64 = (0..n).map(|j| dense[i * n + j] * x[j]).sum();
            let zi: Complex64 = (0..n).map(|j| dense[j * n + i].conj() * x[j]).sum();
            assert!((yi - y[i]).norm() < 1e-12);
            assert!((zi - z[i]).norm() < 1e-12);
        }
    }

    #[test]
    fn fingerprints_track_content() {
        let w = line(6, 0);
        let a = shift(&w, 0, 1).unwrap();
        let b = shift(&w, 0, 1).unwrap();
        assert_eq!(a.fingerprint(), b.fingerprint());
        assert_ne!(a.fingerprint(), a.adjoint().fingerprint());
        assert!(a.sub(&b).unwrap().is_zero());
    }
}
