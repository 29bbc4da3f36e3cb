//! Cross-module properties of the rough character.

use std::collections::hash_map::DefaultHasher;
use std::hash::{Hash, Hasher};
use std::sync::Arc;

use coarselab::cochain::pair;
use coarselab::cyclic::{chi, character_pairing, chern1};
use coarselab::io::{chain_from_json, chain_to_json, tensor_from_json, tensor_to_json};
use coarselab::opalg::{mu_norm, op_norm, winding_unitary, OperatorBuilder};
use coarselab::{BandedOperator, CoarseCochain, CyclicTensor, Window, WindowSpec};
use num_complex::Complex64;

/// Entries depend only on the coordinates, so the operators on a larger
/// window extend those on a smaller one.
fn hashed_operator(window: &Arc<Window>, salt: u64, propagation: u32) -> BandedOperator {
    let mut b = OperatorBuilder::new(window.clone(), 1);
    for p in window.points() {
        for q in window.neighbors_within(p, propagation) {
            let mut h = DefaultHasher::new();
            (salt, window.coords(p), window.coords(q)).hash(&mut h);
            let bits = h.finish();
            let re = (bits & 0xffff) as f64 / 65535.0 - 0.5;
            let im = (bits >> 16 & 0xffff) as f64 / 65535.0 - 0.5;
            let decay = 0.5f64.powi(window.distance(p, q) as i32);
            b.add_scalar(p, q, Complex64::new(re, im) * decay).unwrap();
        }
    }
    b.build()
}

fn continuity_ratio(radius: u32, degree: usize) -> f64 {
    let window = WindowSpec::zd(1, radius, 8).build().unwrap();
    let ops: Vec<Arc<BandedOperator>> =
        (0..=degree).map(|i| Arc::new(hashed_operator(&window, 17 + i as u64, 2))).collect();
    let n = degree as u32;
    let denominator: f64 = ops
        .iter()
        .map(|a| op_norm(a, 1e-10).unwrap().max(mu_norm(a, n + 1).unwrap()))
        .product();
    let t = CyclicTensor::single(Complex64::new(1.0, 0.0), ops).unwrap();
    chi(&t).unwrap().norm_inf_n(n) / denominator
}

#[test]
fn character_norm_ratio_is_window_independent() {
    for degree in [1usize, 2] {
        let ratios: Vec<f64> = [16, 24, 32].iter().map(|&w| continuity_ratio(w, degree)).collect();
        assert!(ratios[0] > 0.0);
        // Larger windows take the sup over more hashed entries, so the ratio
        // may creep up before it saturates; a trend would blow through this.
        assert!(ratios.iter().all(|&r| r <= 1.5 * ratios[0]), "degree {degree}: {ratios:?}");
    }
}

#[test]
fn chains_and_tensors_survive_json() {
    let window = WindowSpec::zd(1, 16, 8).build().unwrap();
    let u = winding_unitary(&window, 1).unwrap();
    let u_inv = winding_unitary(&window, -1).unwrap();
    let t = chern1(&u, &u_inv, 0).unwrap();
    let back = tensor_from_json(&tensor_to_json(&t).unwrap()).unwrap();
    let phi = CoarseCochain::jump(0, 0);
    assert_eq!(character_pairing(&phi, &back).unwrap(), character_pairing(&phi, &t).unwrap());

    let c = chi(&t).unwrap();
    let c_back = chain_from_json(&chain_to_json(&c).unwrap(), None).unwrap();
    assert_eq!(c_back, c);
    assert_eq!(pair(&phi, &c_back).unwrap(), Complex64::new(-1.0, 0.0));
}
