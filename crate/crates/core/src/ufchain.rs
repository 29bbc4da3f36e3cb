//! Uniformly finite chains on a window and their polynomial-decay norms.

use std::collections::BTreeMap;
use std::sync::Arc;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::fill::sample_tuple;
use crate::scalar::Coefficient;
use crate::spaces::{PointId, Window};

/// A finitely supported degree-`q` chain: `(q+1)`-tuples of points with
/// nonzero coefficients.
#[derive(Clone, Debug)]
pub struct UfChain<K: Coefficient = Complex64> {
    window: Arc<Window>,
    degree: usize,
    terms: BTreeMap<Vec<PointId>, K>,
}

impl<K: Coefficient> PartialEq for UfChain<K> {
    fn eq(&self, other: &Self) -> bool {
        self.degree == other.degree && self.terms == other.terms && *self.window == *other.window
    }
}

impl<K: Coefficient> UfChain<K> {
    pub fn zero(window: Arc<Window>, degree: usize) -> Self {
        UfChain { window, degree, terms: BTreeMap::new() }
    }

    pub fn from_terms(
        window: Arc<Window>,
        degree: usize,
        terms: impl IntoIterator<Item = (Vec<PointId>, K)>,
    ) -> Result<Self> {
        let mut c = Self::zero(window, degree);
        for (tuple, coef) in terms {
            c.add_term(tuple, coef)?;
        }
        Ok(c)
    }

    /// Add `coef · tuple`, cancelling to zero where coefficients combine.
    pub fn add_term(&mut self, tuple: Vec<PointId>, coef: K) -> Result<()> {
        if tuple.len() != self.degree + 1 {
            return Err(Error::DegreeMismatch {
                module: "ufchain",
                expected: self.degree,
                got: tuple.len().saturating_sub(1),
            });
        }
        if let Some(p) = tuple.iter().find(|p| !self.window.contains(**p)) {
            return Err(Error::PointNotInWindow { module: "ufchain", point: format!("{p:?}") });
        }
        self.add_unchecked(tuple, coef);
        Ok(())
    }

    pub(crate) fn add_unchecked(&mut self, tuple: Vec<PointId>, coef: K) {
        if coef.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(tuple) {
            Entry::Vacant(v) => {
                v.insert(coef);
            }
            Entry::Occupied(mut o) => {
                let sum = o.get().clone() + coef;
                if sum.is_zero() {
                    o.remove();
                } else {
                    *o.get_mut() = sum;
                }
            }
        }
    }

    pub fn window(&self) -> &Arc<Window> {
        &self.window
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<PointId>, &K)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, tuple: &[PointId]) -> K {
        self.terms.get(tuple).cloned().unwrap_or_else(K::zero)
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Max tuple length over the support.
    pub fn propagation(&self) -> u32 {
        self.terms.keys().map(|t| self.window.tuple_length(t)).max().unwrap_or(0)
    }

    /// True if every point of every supported tuple is margin-safe.
    pub fn is_margin_safe(&self) -> bool {
        self.terms.keys().flatten().all(|&p| self.window.is_safe(p))
    }

    fn check_compatible(&self, other: &Self) -> Result<()> {
        if self.degree != other.degree {
            return Err(Error::DegreeMismatch {
                module: "ufchain",
                expected: self.degree,
                got: other.degree,
            });
        }
        if *self.window != *other.window {
            return Err(Error::precondition("ufchain", "chains live on different windows"));
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        let mut out = self.clone();
        for (t, k) in &other.terms {
            out.add_unchecked(t.clone(), k.clone());
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.scale(-K::one()))
    }

    pub fn scale(&self, factor: K) -> Self {
        let mut out = Self::zero(self.window.clone(), self.degree);
        for (t, k) in &self.terms {
            out.add_unchecked(t.clone(), factor.clone() * k.clone());
        }
        out
    }

    pub fn map_coefficients<L: Coefficient>(&self, f: impl Fn(&K) -> L) -> UfChain<L> {
        let mut out = UfChain::zero(self.window.clone(), self.degree);
        for (t, k) in &self.terms {
            out.add_unchecked(t.clone(), f(k));
        }
        out
    }

    /// `∂(x₀,…,x_q) = Σ_j (−1)^j (x₀,…,x̂_j,…,x_q)`.
    pub fn boundary(&self) -> Result<Self> {
        if self.degree == 0 {
            return Err(Error::precondition("ufchain", "boundary of a degree-0 chain"));
        }
        let mut out = Self::zero(self.window.clone(), self.degree - 1);
        for (t, k) in &self.terms {
            for j in 0..t.len() {
                let mut face = t.clone();
                face.remove(j);
                let coef = if j % 2 == 0 { k.clone() } else { -k.clone() };
                out.add_unchecked(face, coef);
            }
        }
        Ok(out)
    }

    /// `‖c‖_{∞,n} = sup |a_ȳ| · length(ȳ)^n`, with `0^0 = 1`.
    pub fn norm_inf_n(&self, n: u32) -> f64 {
        self.terms
            .iter()
            .map(|(t, k)| k.modulus() * (self.window.tuple_length(t) as f64).powi(n as i32))
            .fold(0.0, f64::max)
    }

    /// `‖c‖_{∞,n} + ‖∂c‖_{∞,n}`; the boundary term is absent in degree 0.
    pub fn graded_norm(&self, n: u32) -> f64 {
        let bd = match self.boundary() {
            Ok(b) => b.norm_inf_n(n),
            Err(_) => 0.0,
        };
        self.norm_inf_n(n) + bd
    }

    /// Sup of `|a_ȳ|` over tuples in the shell `R−1 < length(ȳ) ≤ R`. The
    /// metric is integer valued, so the shell is `length(ȳ) = R`.
    pub fn shell_norm(&self, radius: u32) -> f64 {
        self.terms
            .iter()
            .filter(|(t, _)| self.window.tuple_length(t) == radius)
            .map(|(_, k)| k.modulus())
            .fold(0.0, f64::max)
    }
}

/// Seeded chain of `terms` margin-safe tuples with lengths in
/// `1..=max_length` and complex coefficients in the unit square, damped by
/// `length^-decay`.
pub fn random_chain(
    window: &Arc<Window>,
    degree: usize,
    terms: usize,
    max_length: u32,
    decay: u32,
    seed: u64,
) -> Result<UfChain> {
    let safe = window.safe_points();
    if safe.is_empty() {
        return Err(Error::margin("ufchain", "the window has no margin-safe points"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut chain = UfChain::zero(window.clone(), degree);
    for _ in 0..terms {
        let tuple = if degree == 0 {
            Some(vec![safe[rng.random_range(0..safe.len())]])
        } else {
            let length = rng.random_range(1..=max_length.max(1));
            sample_tuple(window, degree, length, &mut rng)
        };
        let Some(tuple) = tuple else { continue };
        let damp = (window.tuple_length(&tuple).max(1) as f64).powi(decay as i32);
        let coef = Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)) / damp;
        chain.add_term(tuple, coef)?;
    }
    Ok(chain)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Rational;
    use crate::spaces::WindowSpec;
    use proptest::prelude::*;

    fn line(w: u32) -> Arc<Window> {
        WindowSpec::zd(1, w, 2).build().unwrap()
    }

    fn pt(w: &Window, x: i64) -> PointId {
        w.lookup(&[x]).unwrap()
    }

    #[test]
    fn random_chains_are_seeded_and_safe() {
        let w = WindowSpec::zd(2, 10, 3).build().unwrap();
        let a = super::random_chain(&w, 2, 12, 4, 1, 9).unwrap();
        assert_eq!(a, super::random_chain(&w, 2, 12, 4, 1, 9).unwrap());
        assert!(!a.is_empty() && a.is_margin_safe() && a.propagation() <= 4);
    }

    #[test]
    fn boundary_examples() {
        let w = line(10);
        let (a, b, c) = (pt(&w, 0), pt(&w, 1), pt(&w, 2));
        let e = UfChain::<i64>::from_terms(w.clone(), 1, [(vec![a, b], 1)]).unwrap();
        let bd = e.boundary().unwrap();
        assert_eq!(bd.coefficient(&[b]), 1);
        assert_eq!(bd.coefficient(&[a]), -1);

        let tri = UfChain::<i64>::from_terms(w.clone(), 2, [(vec![a, b, c], 1)]).unwrap();
        let bd = tri.boundary().unwrap();
        assert_eq!(bd.len(), 3);
        assert_eq!(bd.coefficient(&[b, c]), 1);
        assert_eq!(bd.coefficient(&[a, c]), -1);
        assert_eq!(bd.coefficient(&[a, b]), 1);
        assert!(bd.boundary().unwrap().is_zero());
        assert!(UfChain::<i64>::zero(w, 0).boundary().is_err());
    }

    #[test]
    fn norm_examples() {
        let w = line(10);
        let c = UfChain::<i64>::from_terms(w.clone(), 1, [(vec![pt(&w, 0), pt(&w, 3)], 2)]).unwrap();
        assert_eq!(c.norm_inf_n(2), 18.0);
        let diag = UfChain::<i64>::from_terms(w.clone(), 1, [(vec![pt(&w, 5), pt(&w, 5)], 7)]).unwrap();
        assert_eq!(diag.norm_inf_n(1), 0.0);
        assert_eq!(diag.norm_inf_n(0), 7.0);
        let two = c.add(&UfChain::from_terms(w.clone(), 1, [(vec![pt(&w, 0), pt(&w, 1)], 5)]).unwrap()).unwrap();
        assert_eq!(two.norm_inf_n(0), 5.0);
    }

    #[test]
    fn graded_and_shell() {
        let w = line(10);
        let c = UfChain::<i64>::from_terms(w.clone(), 1, [(vec![pt(&w, 0), pt(&w, 3)], 1)]).unwrap();
        assert_eq!(c.graded_norm(1), 3.0);
        assert_eq!(c.graded_norm(0), 2.0);
        assert_eq!(UfChain::<i64>::zero(w.clone(), 1).graded_norm(3), 0.0);

        let c2 = c.scale(2);
        assert_eq!(c2.shell_norm(3), 2.0);
        assert_eq!(c2.shell_norm(2), 0.0);
        assert!(c2.shell_norm(3) <= 2.0 * c2.norm_inf_n(1) / 3.0);
        assert_eq!(UfChain::<i64>::zero(w, 1).shell_norm(4), 0.0);
    }

    #[test]
    fn rejects_bad_tuples() {
        let w = line(4);
        let mut c = UfChain::<i64>::zero(w.clone(), 1);
        assert!(c.add_term(vec![pt(&w, 0)], 1).is_err());
        assert!(c.add_term(vec![pt(&w, 0), PointId(99)], 1).is_err());
        c.add_term(vec![pt(&w, 0), pt(&w, 1)], 3).unwrap();
        c.add_term(vec![pt(&w, 0), pt(&w, 1)], -3).unwrap();
        assert!(c.is_zero());
    }

    fn chain_from_raw(w: &Arc<Window>, q: usize, raw: &[(Vec<u32>, i64)]) -> UfChain<Rational> {
        let n = w.len() as u32;
        let mut c = UfChain::zero(w.clone(), q);
        for (idx, coef) in raw {
            let tuple: Vec<PointId> = idx.iter().take(q + 1).map(|i| PointId(i % n)).collect();
            c.add_term(tuple, Rational::from_integer(*coef)).unwrap();
        }
        c
    }

    fn raw_terms() -> impl Strategy<Value = Vec<(Vec<u32>, i64)>> {
        prop::collection::vec((prop::collection::vec(0u32..1000, 4), -5i64..=5), 0..12)
    }

    proptest! {
        #[test]
        fn boundary_squares_to_zero(q in 2usize..=3, raw in raw_terms()) {
            let w = WindowSpec::zd(2, 4, 0).build().unwrap();
            let c = chain_from_raw(&w, q, &raw);
            prop_assert!(c.boundary().unwrap().boundary().unwrap().is_zero());
        }

        #[test]
        fn seminorm_axioms(raw1 in raw_terms(), raw2 in raw_terms(), n in 1u32..4, s in -4i64..=4) {
            let w = WindowSpec::zd(2, 4, 0).build().unwrap();
            let a = chain_from_raw(&w, 1, &raw1);
            let b = chain_from_raw(&w, 1, &raw2);
            let sum = a.add(&b).unwrap();
            prop_assert!(sum.norm_inf_n(n) <= a.norm_inf_n(n) + b.norm_inf_n(n) + 1e-9);
            let scaled = a.scale(Rational::from_integer(s));
            prop_assert!((scaled.norm_inf_n(n) - (s.abs() as f64) * a.norm_inf_n(n)).abs() < 1e-9);
        }

        #[test]
        fn shell_bridge(raw in raw_terms(), n in 0u32..4, r in 2u32..9) {
            let w = WindowSpec::zd(2, 4, 0).build().unwrap();
            let c = chain_from_raw(&w, 1, &raw);
            let bound = 2f64.powi(n as i32) * c.norm_inf_n(n) / (r as f64).powi(n as i32);
            prop_assert!(c.shell_norm(r) <= bound + 1e-12);
        }

        #[test]
        fn norm_monotone_in_n_without_short_tuples(raw in raw_terms(), n in 0u32..5) {
            let w = WindowSpec::zd(2, 4, 0).build().unwrap();
            let c = chain_from_raw(&w, 1, &raw);
            let long: Vec<_> = c
                .terms()
                .filter(|(t, _)| w.tuple_length(t) >= 1)
                .map(|(t, k)| (t.clone(), *k))
                .collect();
            let c = UfChain::from_terms(w.clone(), 1, long).unwrap();
            prop_assert!(c.norm_inf_n(n) <= c.norm_inf_n(n + 1));
        }
    }
}
