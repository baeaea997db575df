#![allow(dead_code)]

use std::sync::Arc;

use plmi::matexpr::{rat, AffineSymMatrix, PlmiSpec, SymMatrix, VarRegistry};
use rand::Rng;

/// Random rational entries `n/d` with `|n| <= 9`, `1 <= d <= 4`.
pub fn random_matrix(dim: usize, rng: &mut impl Rng) -> SymMatrix<plmi::matexpr::Rational> {
    SymMatrix::from_fn(dim, |_, _| rat(rng.random_range(-9..=9), rng.random_range(1..=4)))
}

/// A spec whose vertices are independent random affine expressions in a
/// `dim × dim` symmetric variable `P` and one scalar `s`.
pub fn random_spec(q: usize, r: usize, dim: usize, rng: &mut impl Rng) -> PlmiSpec {
    let mut reg = VarRegistry::new();
    reg.add_symmetric("P", dim).unwrap();
    reg.add_scalar("s").unwrap();
    let n = reg.len();
    let id = reg.id();
    PlmiSpec::from_fn(q, r, dim, Arc::new(reg), |_| {
        let mut terms = Vec::new();
        for v in 0..n {
            if rng.random_bool(0.6) {
                terms.push((v, random_matrix(dim, rng)));
            }
        }
        AffineSymMatrix::new(id, random_matrix(dim, rng), terms).unwrap()
    })
    .unwrap()
}

/// A variable-free scalar spec, for the largest enumerations.
pub fn random_constant_spec(q: usize, r: usize, rng: &mut impl Rng) -> PlmiSpec {
    let reg = VarRegistry::new();
    let id = reg.id();
    PlmiSpec::from_fn(q, r, 1, Arc::new(reg), |_| {
        AffineSymMatrix::constant(id, random_matrix(1, rng))
    })
    .unwrap()
}
