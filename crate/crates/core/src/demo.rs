//! Index demos: the winding-number pairing against a Toeplitz rank oracle,
//! degree-zero pairings, and the fundamental class on the 3-regular tree.

use std::sync::Arc;

use num_complex::Complex64;
use num_rational::Ratio;
use num_traits::{Signed, Zero};

use crate::cochain::CoarseCochain;
use crate::cyclic::{character_pairing, chern0, chern1};
use crate::error::{Error, Result};
use crate::opalg::{shift, winding_unitary, BandedOperator};
use crate::scalar::Rational;
use crate::spaces::{PointId, SpaceKind, Window, WindowSpec};
use crate::ufchain::UfChain;

/// Rank of a dense matrix by exact fraction-valued Gaussian elimination.
pub fn exact_rank(mut rows: Vec<Vec<Ratio<i128>>>) -> usize {
    let ncols = rows.first().map_or(0, |r| r.len());
    let mut rank = 0;
    for col in 0..ncols {
        let Some(pivot) = (rank..rows.len()).find(|&r| !rows[r][col].is_zero()) else {
            continue;
        };
        rows.swap(rank, pivot);
        let head = rows[rank].clone();
        for r in rank + 1..rows.len() {
            if rows[r][col].is_zero() {
                continue;
            }
            let factor = rows[r][col] / head[col];
            for (x, h) in rows[r][col..].iter_mut().zip(&head[col..]) {
                *x -= factor * h;
            }
        }
        rank += 1;
    }
    rank
}

fn section(op: &BandedOperator, cols: usize, rows: usize) -> Result<Vec<Vec<Ratio<i128>>>> {
    let window = op.window();
    let mut m = vec![vec![Ratio::zero(); cols]; rows];
    for (r, c, block) in op.entries() {
        let (i, j) = (window.coords(r)[0] as usize, window.coords(c)[0] as usize);
        if i >= rows || j >= cols {
            continue;
        }
        let z = block[0];
        if z.im != 0.0 || z.re.fract() != 0.0 {
            return Err(Error::precondition("demo", "Toeplitz oracle needs integer matrix entries"));
        }
        m[i][j] = Ratio::from_integer(z.re as i128);
    }
    Ok(m)
}

/// Fredholm index of `P S^k P` on `ℓ²(ℕ)`, from kernel dimensions of finite
/// sections. Columns `0..=L` map into rows `0..=L+|k|` exactly, so the
/// section kernels are the kernels of `T` and `T*` on vectors supported in
/// `[0, L]`, which contain the full kernels once `L ≥ |k|`.
pub fn toeplitz_index(k: i64, length: u32) -> Result<i64> {
    let p = k.unsigned_abs() as u32;
    if length < p {
        return Err(Error::precondition("demo", format!("section length {length} is below |k| = {p}")));
    }
    let window = WindowSpec::new(SpaceKind::IntervalZ, length + p, 0).build()?;
    let t = shift(&window, 0, k)?;
    let cols = length as usize + 1;
    let rows = cols + p as usize;
    let kernel = |op: &BandedOperator| -> Result<i64> { Ok((cols - exact_rank(section(op, cols, rows)?)) as i64) };
    Ok(kernel(&t)? - kernel(&t.adjoint())?)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WindingReport {
    pub k: i64,
    /// Pairing with the character weight but without the `2πi` factor.
    pub raw: Complex64,
    /// `⟨Jump, χ(ch₁(S^k))⟩` including `2πi`.
    pub pairing: Complex64,
    pub oracle_index: i64,
    /// `pairing / index`; `None` when the index vanishes.
    pub ratio: Option<Complex64>,
    pub raw_ratio: Option<Complex64>,
}

/// `⟨Jump(0,0), χ(ch₁(S^k))⟩` on a ℤ window against the Toeplitz index.
pub fn demo_winding(k: i64, radius: u32, margin: u32) -> Result<WindingReport> {
    let need = 4 * k.unsigned_abs() + 4;
    if (margin as u64) < need {
        return Err(Error::margin("demo", format!("winding {k} needs margin ≥ {need}, got {margin}")));
    }
    let window = WindowSpec::zd(1, radius, margin).build()?;
    let u = winding_unitary(&window, k)?;
    let u_inv = winding_unitary(&window, -k)?;
    let tensor = chern1(&u, &u_inv, 0)?;
    let p = character_pairing(&CoarseCochain::jump(0, 0), &tensor)?;
    let oracle_index = toeplitz_index(k, radius)?;
    let ratio = (oracle_index != 0).then(|| p.value / oracle_index as f64);
    let raw_ratio = (oracle_index != 0).then(|| p.raw / oracle_index as f64);
    Ok(WindingReport { k, raw: p.raw, pairing: p.value, oracle_index, ratio, raw_ratio })
}

/// `⟨φ, χ(e)⟩ = Σ_y φ(y) e_{yy}` for a degree-0 cochain.
pub fn demo_degree0(e: &Arc<BandedOperator>, phi: &CoarseCochain) -> Result<Complex64> {
    Ok(character_pairing(phi, &chern0(e, 0)?)?.raw)
}

#[derive(Debug, Clone)]
pub struct TreeReport {
    pub radius: u32,
    pub safe_vertices: usize,
    /// The 1-chain of parent-to-child edges.
    pub chain: UfChain<Rational>,
    /// Largest `|(∂t)(y) − 1|` over margin-safe vertices; exact.
    pub residual: Rational,
    pub max_coefficient: Rational,
    pub pass: bool,
}

fn children(window: &Window, p: PointId) -> Vec<PointId> {
    let d = window.depth(p);
    window.neighbors_within(p, 1).into_iter().filter(|&q| window.depth(q) == d + 1).collect()
}

/// Flow to infinity on the 3-regular tree: every parent-to-child edge out
/// of depth `d` carries `c(d)`, with `c(0) = −1/3` and
/// `c(d) = (c(d−1) − 1)/2`, so that `∂t = Σ_y (y)` at every vertex whose
/// children lie in the window. Coefficients stay in `[−1, 0]`.
pub fn demo_tree_fundamental_class(radius: u32, margin: u32) -> Result<TreeReport> {
    if radius < 4 {
        return Err(Error::precondition("demo", format!("tree window radius must be ≥ 4, got {radius}")));
    }
    if margin == 0 {
        return Err(Error::margin("demo", "the tree flow needs margin ≥ 1 so safe vertices keep their children"));
    }
    let window = WindowSpec::new(SpaceKind::Tree3, radius, margin).build()?;
    let mut coef = vec![Rational::new(-1, 3)];
    for d in 1..radius as usize {
        coef.push((coef[d - 1] - 1) / 2);
    }
    let mut chain = UfChain::zero(window.clone(), 1);
    for p in window.points() {
        let d = window.depth(p) as usize;
        if d < radius as usize {
            for c in children(&window, p) {
                chain.add_term(vec![p, c], coef[d])?;
            }
        }
    }
    let boundary = chain.boundary()?;
    let safe = window.safe_points();
    let one = Rational::from_integer(1);
    let residual = safe
        .iter()
        .map(|&y| (boundary.coefficient(&[y]) - one).abs())
        .max()
        .unwrap_or_else(Rational::zero);
    let max_coefficient = chain.terms().map(|(_, c)| c.abs()).max().unwrap_or_else(Rational::zero);
    let pass = residual.is_zero() && max_coefficient <= one;
    Ok(TreeReport { radius, safe_vertices: safe.len(), chain, residual, max_coefficient, pass })
}

/// On ℤ every solution of `∂t = Σ_{|y|≤R} (y)` with edges `(x, x+1)` has
/// `a_y − a_{y−1} = −1`; the symmetric one is `a_y = −y − ½`. Returns
/// `(R, max |a|)` over the edges meeting `[−R, R]`: growth ~ R, so no
/// bounded filling exists (the expected failure on an amenable space).
pub fn integer_line_witness(radius: u32) -> Vec<(u32, Rational)> {
    (1..=radius)
        .map(|r| {
            let r = r as i64;
            let max = (-r - 1..=r).map(|y| (Rational::from_integer(-y) - Rational::new(1, 2)).abs()).max().unwrap();
            (r as u32, max)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::opalg::{diag_indicator, site_projection};

    #[test]
    fn rank_oracle() {
        let r = |v: Vec<Vec<i128>>| exact_rank(v.into_iter().map(|row| row.into_iter().map(Ratio::from_integer).collect()).collect());
        assert_eq!(r(vec![vec![1, 2], vec![2, 4]]), 1);
        assert_eq!(r(vec![vec![0, 1], vec![1, 0], vec![1, 1]]), 2);
        assert_eq!(r(vec![vec![0, 0]]), 0);
    }

    #[test]
    fn toeplitz_indices() {
        for k in -4..=4 {
            assert_eq!(toeplitz_index(k, 12).unwrap(), -k);
        }
        assert!(toeplitz_index(5, 3).is_err());
    }

    #[test]
    fn winding_demo() {
        let one = demo_winding(1, 24, 8).unwrap();
        assert_eq!(one.oracle_index, -1);
        assert!((one.raw + 1.0).norm() < 1e-10);
        assert!((one.pairing - Complex64::new(0.0, -2.0 * std::f64::consts::PI)).norm() < 1e-9);
        let zero = demo_winding(0, 24, 8).unwrap();
        assert_eq!((zero.raw, zero.oracle_index, zero.ratio), (Complex64::default(), 0, None));
        let ratios: Vec<Complex64> = (1..=4).map(|k| demo_winding(k, 32, 20).unwrap().ratio.unwrap()).collect();
        assert!(ratios.iter().all(|r| (r - ratios[0]).norm() < 1e-9));
        assert!(demo_winding(3, 32, 8).is_err());
    }

    #[test]
    fn degree0_demo() {
        let w = WindowSpec::zd(1, 16, 2).build().unwrap();
        let even = Arc::new(diag_indicator(&w, |c| c[0] % 2 == 0));
        let window_table = |pts: Vec<i64>| {
            CoarseCochain::table(0, pts.into_iter().map(|x| (vec![vec![x]], Complex64::new(1.0, 0.0)))).unwrap()
        };
        assert_eq!(demo_degree0(&even, &window_table((0..10).collect())).unwrap(), Complex64::new(5.0, 0.0));
        assert_eq!(demo_degree0(&even, &window_table(vec![])).unwrap(), Complex64::default());
        let p3 = Arc::new(site_projection(&w, w.lookup(&[3]).unwrap(), 1).unwrap());
        assert_eq!(demo_degree0(&p3, &window_table(vec![3])).unwrap(), Complex64::new(1.0, 0.0));
    }

    #[test]
    fn tree_class() {
        let rep = demo_tree_fundamental_class(6, 1).unwrap();
        assert!(rep.pass && rep.residual.is_zero() && rep.safe_vertices > 0);
        assert!(rep.max_coefficient < Rational::from_integer(1));
        assert!(demo_tree_fundamental_class(3, 0).is_err());
        let witness = integer_line_witness(10);
        assert_eq!(witness[9].1, Rational::new(21, 2));
        assert!(witness.windows(2).all(|w| w[1].1 > w[0].1));
    }
}
