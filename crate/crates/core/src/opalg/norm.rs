use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{BandedOperator, ZERO};
use crate::error::{Error, Result};

/// Default relative tolerance for operator norms.
pub const DEFAULT_TOL: f64 = 1e-10;
/// Cap on products with `A*A`.
pub const MAX_ITERATIONS: usize = 100_000;

const START_SEED: u64 = 0x0005_eed0_fa11;

fn norm2(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

fn apply_mask(v: &mut [Complex64], mask: Option<&[bool]>, fiber: usize) {
    if let Some(mask) = mask {
        for (p, keep) in mask.iter().enumerate() {
            if !keep {
                v[p * fiber..(p + 1) * fiber].iter_mut().for_each(|z| *z = ZERO);
            }
        }
    }
}

/// `‖P_out A P_in‖` from the top eigenvalue of `M*M`, `M = P_out A P_in`.
/// Masks are per point; `None` means the identity projection.
///
/// The iteration is a power method accelerated by restarted Lanczos: each
/// cycle builds a Krylov basis from the current vector and restarts from the
/// top Ritz vector. Ritz values never exceed the top eigenvalue, so the
/// result is a lower bound; iteration stops once the Ritz residual is below
/// a thousandth of `tol`.
pub fn masked_norm(
    a: &BandedOperator,
    input: Option<&[bool]>,
    output: Option<&[bool]>,
    tol: f64,
) -> Result<f64> {
    power_norm(a, input, output, tol, true)
}

/// Lower bound for `‖P_out A P_in‖` after at most `cap` products with `M*M`.
pub(crate) fn power_norm_capped(
    a: &BandedOperator,
    input: Option<&[bool]>,
    output: Option<&[bool]>,
    tol: f64,
    cap: usize,
) -> f64 {
    iterate(a, input, output, tol, cap).0
}

pub(crate) fn power_norm(
    a: &BandedOperator,
    input: Option<&[bool]>,
    output: Option<&[bool]>,
    tol: f64,
    strict: bool,
) -> Result<f64> {
    if tol <= 0.0 {
        return Err(Error::precondition("opalg", "operator norm tolerance must be positive"));
    }
    match iterate(a, input, output, tol, MAX_ITERATIONS) {
        (_, false) if strict => Err(Error::NonConvergence { iterations: MAX_ITERATIONS }),
        (est, _) => Ok(est),
    }
}

fn dot(u: &[Complex64], v: &[Complex64]) -> Complex64 {
    u.iter().zip(v).map(|(a, b)| a.conj() * b).sum()
}

struct Gram<'a> {
    a: &'a BandedOperator,
    input: Option<&'a [bool]>,
    output: Option<&'a [bool]>,
    scratch: Vec<Complex64>,
}

impl Gram<'_> {
    fn apply(&mut self, v: &[Complex64], out: &mut [Complex64]) {
        let f = self.a.fiber();
        self.a.apply(v, &mut self.scratch);
        apply_mask(&mut self.scratch, self.output, f);
        self.a.apply_adjoint(&self.scratch, out);
        apply_mask(out, self.input, f);
    }
}

const KRYLOV_DIM: usize = 48;

fn iterate(
    a: &BandedOperator,
    input: Option<&[bool]>,
    output: Option<&[bool]>,
    tol: f64,
    cap: usize,
) -> (f64, bool) {
    if a.is_zero() {
        return (0.0, true);
    }
    let n = a.dim();
    let f = a.fiber();
    let mut rng = ChaCha8Rng::seed_from_u64(START_SEED);
    let mut v: Vec<Complex64> =
        (0..n).map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect();
    apply_mask(&mut v, input, f);
    let len = norm2(&v);
    if len == 0.0 {
        return (0.0, true);
    }
    v.iter_mut().for_each(|z| *z /= len);
    let mut gram = Gram { a, input, output, scratch: vec![ZERO; n] };
    let threshold = tol * 1e-3;
    let mut best = 0.0f64;
    let mut products = 0;
    let mut basis: Vec<Vec<Complex64>> = Vec::with_capacity(KRYLOV_DIM);
    let mut w = vec![ZERO; n];
    while products < cap {
        basis.clear();
        basis.push(v.clone());
        let mut alpha = Vec::with_capacity(KRYLOV_DIM);
        let mut beta: Vec<f64> = Vec::with_capacity(KRYLOV_DIM);
        let mut exhausted = false;
        loop {
            let q = basis.last().unwrap();
            gram.apply(q, &mut w);
            products += 1;
            alpha.push(dot(q, &w).re);
            for _ in 0..2 {
                for b in &basis {
                    let c = dot(b, &w);
                    w.iter_mut().zip(b).for_each(|(x, y)| *x -= c * y);
                }
            }
            let norm = norm2(&w);
            beta.push(norm);
            let scale = alpha.iter().fold(0.0f64, |m, x| m.max(x.abs()));
            if norm <= 1e-14 * scale.max(f64::MIN_POSITIVE) {
                exhausted = true;
                break;
            }
            if basis.len() == KRYLOV_DIM.min(n) || products >= cap {
                break;
            }
            basis.push(w.iter().map(|z| z / norm).collect());
        }
        let k = alpha.len();
        let t = nalgebra::DMatrix::from_fn(k, k, |i, j| {
            if i == j {
                alpha[i]
            } else if i + 1 == j {
                beta[i]
            } else if j + 1 == i {
                beta[j]
            } else {
                0.0
            }
        });
        let eig = t.symmetric_eigen();
        let top = eig.eigenvalues.imax();
        let theta = eig.eigenvalues[top].max(0.0);
        let y = eig.eigenvectors.column(top);
        let residual = beta[k - 1] * y[k - 1].abs();
        best = best.max(theta.sqrt());
        if theta == 0.0 || exhausted || residual <= threshold * theta {
            return (best, true);
        }
        v.iter_mut().for_each(|z| *z = ZERO);
        for (b, c) in basis.iter().zip(y.iter()) {
            v.iter_mut().zip(b).for_each(|(x, q)| *x += q * *c);
        }
        let len = norm2(&v);
        v.iter_mut().for_each(|z| *z /= len);
    }
    (best, false)
}

/// Largest singular value of `A`, to relative accuracy `tol`.
pub fn op_norm(a: &BandedOperator, tol: f64) -> Result<f64> {
    power_norm(a, None, None, tol, true)
}

/// `op_norm` inflated by the tolerance: used wherever an upper bound is
/// needed.
pub fn op_norm_upper(a: &BandedOperator, tol: f64) -> Result<f64> {
    Ok(op_norm(a, tol)? * (1.0 + tol))
}
