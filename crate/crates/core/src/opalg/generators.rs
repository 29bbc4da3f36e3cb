use std::sync::Arc;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{BandedOperator, OperatorBuilder, ONE};
use crate::error::{Error, Result};
use crate::spaces::{PointId, SpaceKind, Window};

fn lattice_dim(window: &Window) -> Result<usize> {
    match window.kind() {
        SpaceKind::Zd { dim } => Ok(dim),
        SpaceKind::IntervalZ => Ok(1),
        other => Err(Error::UnsupportedKind(format!("shifts need a lattice window, got {other:?}"))),
    }
}

/// `S^power` along `axis`: `(S e_x) = e_{x + e_axis}`, truncated to the
/// window. Negative powers shift backwards.
pub fn shift(window: &Arc<Window>, axis: usize, power: i64) -> Result<BandedOperator> {
    let dim = lattice_dim(window)?;
    if axis >= dim {
        return Err(Error::precondition("opalg", format!("unsupported axis {axis} for a {dim}-dimensional window")));
    }
    let mut b = OperatorBuilder::new(window.clone(), 1);
    let mut target = Vec::new();
    for p in window.points() {
        target.clear();
        target.extend_from_slice(window.coords(p));
        target[axis] += power;
        if let Some(q) = window.lookup(&target) {
            b.add_scalar(q, p, ONE)?;
        }
    }
    Ok(b.build())
}

/// The winding-`k` unitary `S^k` on a one-dimensional lattice window.
pub fn winding_unitary(window: &Arc<Window>, k: i64) -> Result<BandedOperator> {
    if lattice_dim(window)? != 1 {
        return Err(Error::UnsupportedKind("winding unitaries live on ℤ windows".into()));
    }
    shift(window, 0, k)
}

/// Rank-one projection onto the site `p` (times the identity on the fiber).
pub fn site_projection(window: &Arc<Window>, p: PointId, fiber: usize) -> Result<BandedOperator> {
    let mut b = OperatorBuilder::new(window.clone(), fiber);
    b.add_scalar(p, p, ONE)?;
    Ok(b.build())
}

/// Diagonal operator with entry `value(coords)` at each site.
pub fn diagonal(window: &Arc<Window>, value: impl Fn(&[i64]) -> Complex64) -> BandedOperator {
    let mut b = OperatorBuilder::new(window.clone(), 1);
    for p in window.points() {
        b.add_scalar(p, p, value(window.coords(p))).unwrap();
    }
    b.build()
}

/// Projection onto the sites whose coordinates satisfy `predicate`.
pub fn diag_indicator(window: &Arc<Window>, predicate: impl Fn(&[i64]) -> bool) -> BandedOperator {
    diagonal(window, |c| if predicate(c) { ONE } else { Complex64::new(0.0, 0.0) })
}

/// Random operator with propagation at most `propagation`: each block entry
/// is uniform in the unit square of ℂ times `decay^d(x,y)`.
pub fn random_banded(window: &Arc<Window>, seed: u64, propagation: u32, decay: f64, fiber: usize) -> BandedOperator {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut b = OperatorBuilder::new(window.clone(), fiber);
    let mut block = vec![Complex64::new(0.0, 0.0); fiber * fiber];
    for p in window.points() {
        for q in window.neighbors_within(p, propagation) {
            let scale = decay.powi(window.distance(p, q) as i32);
            for z in block.iter_mut() {
                *z = Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)) * scale;
            }
            b.add_block(p, q, &block).unwrap();
        }
    }
    b.build()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spaces::WindowSpec;

    #[test]
    fn shift_entries() {
        let w = WindowSpec::zd(1, 5, 1).build().unwrap();
        let s = shift(&w, 0, 1).unwrap();
        for m in w.points() {
            for n in w.points() {
                let expected = (w.coords(m)[0] == w.coords(n)[0] + 1) as i32 as f64;
                assert_eq!(s.entry(m, n).re, expected);
            }
        }
        assert!(shift(&w, 1, 1).is_err());
        let u2 = winding_unitary(&w, 2).unwrap();
        assert_eq!(u2.max_abs_diff(&s.compose(&s).unwrap()), Some(0.0));
        let h = WindowSpec::new(SpaceKind::Heisenberg3, 2, 0).build().unwrap();
        assert!(shift(&h, 0, 1).is_err());
    }

    #[test]
    fn projections() {
        let w = WindowSpec::zd(2, 4, 1).build().unwrap();
        let p = site_projection(&w, w.base(), 2).unwrap();
        assert_eq!(p.compose(&p).unwrap().max_abs_diff(&p), Some(0.0));
        assert_eq!(p.adjoint().max_abs_diff(&p), Some(0.0));
        let even = diag_indicator(&w, |c| c[0] % 2 == 0);
        assert_eq!(even.compose(&even).unwrap().max_abs_diff(&even), Some(0.0));
    }

    #[test]
    fn random_banded_is_seeded() {
        let w = WindowSpec::zd(1, 8, 1).build().unwrap();
        let a = random_banded(&w, 3, 2, 0.5, 1);
        assert_eq!(a.fingerprint(), random_banded(&w, 3, 2, 0.5, 1).fingerprint());
        assert_ne!(a.fingerprint(), random_banded(&w, 4, 2, 0.5, 1).fingerprint());
        assert_eq!(a.propagation(), 2);
    }
}
