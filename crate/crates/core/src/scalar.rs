//! Coefficient rings for chains and cochains.
//!
//! The analytic path uses `Complex64`; combinatorial identities (∂² = 0,
//! adjointness, the filler's chain-map property) are checked over exact
//! integers or rationals.

use std::fmt::Debug;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;
use num_rational::Ratio;
use num_traits::{One, Zero};

/// Exact rational coefficient.
pub type Rational = Ratio<i64>;

/// A commutative coefficient ring with an absolute value.
pub trait Coefficient:
    Clone
    + Debug
    + PartialEq
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Neg<Output = Self>
    + Mul<Output = Self>
    + Send
    + Sync
    + 'static
{
    fn from_i64(v: i64) -> Self;

    /// |a| as a double.
    fn modulus(&self) -> f64;
}

impl Coefficient for i64 {
    fn from_i64(v: i64) -> Self {
        v
    }

    fn modulus(&self) -> f64 {
        self.unsigned_abs() as f64
    }
}

impl Coefficient for Rational {
    fn from_i64(v: i64) -> Self {
        Ratio::from_integer(v)
    }

    fn modulus(&self) -> f64 {
        (*self.numer() as f64 / *self.denom() as f64).abs()
    }
}

impl Coefficient for Complex64 {
    fn from_i64(v: i64) -> Self {
        Complex64::new(v as f64, 0.0)
    }

    fn modulus(&self) -> f64 {
        self.norm()
    }
}

/// Sign of a permutation given as an image list.
pub fn permutation_sign(perm: &[usize]) -> i64 {
    let mut seen = vec![false; perm.len()];
    let mut sign = 1;
    for start in 0..perm.len() {
        if seen[start] {
            continue;
        }
        let mut len = 0;
        let mut i = start;
        while !seen[i] {
            seen[i] = true;
            i = perm[i];
            len += 1;
        }
        if len % 2 == 0 {
            sign = -sign;
        }
    }
    sign
}

/// All permutations of `0..n` in lexicographic order, paired with their sign.
pub fn permutations(n: usize) -> Vec<(Vec<usize>, i64)> {
    let mut out = Vec::new();
    let mut cur: Vec<usize> = (0..n).collect();
    loop {
        out.push((cur.clone(), permutation_sign(&cur)));
        // next lexicographic permutation
        let Some(i) = (1..n).rev().find(|&i| cur[i - 1] < cur[i]) else {
            break;
        };
        let j = (i..n).rev().find(|&j| cur[j] > cur[i - 1]).unwrap();
        cur.swap(i - 1, j);
        cur[i..].reverse();
    }
    out
}

pub fn factorial(n: u64) -> u64 {
    (1..=n).product()
}
