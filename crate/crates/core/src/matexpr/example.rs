use std::sync::Arc;

use num_traits::{One, Zero};

use super::{parse_rational, rational_from_f64, AffineSymMatrix, PlmiSpec, Rational, SymMatrix, VarRegistry};
use crate::error::Result;

/// One local linear model `ẋ = A x + B u` of the three-rule example.
#[derive(Clone, Debug, PartialEq)]
pub struct ExampleSystem {
    /// Row-major 2×2.
    pub a: [Rational; 4],
    /// Column 2×1.
    pub b: [Rational; 2],
}

fn dec(s: &str) -> Rational {
    parse_rational(s).expect("literal")
}

/// The three subsystems parameterized by `(a, b)`.
pub fn example_systems(a: f64, b: f64) -> Result<Vec<ExampleSystem>> {
    let a = rational_from_f64(a)?;
    let b = rational_from_f64(b)?;
    let zero = Rational::zero();
    Ok(vec![
        ExampleSystem {
            a: [dec("1.59"), dec("-7.29"), dec("0.01"), zero.clone()],
            b: [dec("1"), zero.clone()],
        },
        ExampleSystem {
            a: [dec("0.02"), dec("-4.64"), dec("0.35"), dec("0.21")],
            b: [dec("8"), zero.clone()],
        },
        ExampleSystem {
            a: [-a, dec("-4.33"), zero.clone(), zero.clone()],
            b: [dec("6") - b, dec("-1")],
        },
    ])
}

/// `M + Mᵀ` for a row-major 2×2 `M`.
fn sym_part(m: &[Rational; 4]) -> SymMatrix<Rational> {
    SymMatrix::from_fn(2, |i, j| &m[i * 2 + j] + &m[j * 2 + i])
}

fn mat_mul(x: &[Rational; 4], y: &[Rational; 4]) -> [Rational; 4] {
    std::array::from_fn(|n| {
        let (i, j) = (n / 2, n % 2);
        &x[i * 2] * &y[j] + &x[i * 2 + 1] * &y[2 + j]
    })
}

/// The registry used by [`make_example_spec`]: `Q` (symmetric 2×2) then
/// `F1`, `F2`, `F3` (1×2 each).
pub fn example_registry() -> VarRegistry {
    let mut reg = VarRegistry::new();
    reg.add_symmetric("Q", 2).expect("fresh registry");
    for k in 1..=3 {
        reg.add_general(&format!("F{k}"), 1, 2).expect("fresh registry");
    }
    reg
}

/// The closed-loop stabilization PLMI of the three-rule example:
/// `Φ_{i₁i₂} = (A_{i₁}Q + B_{i₁}F_{i₂})ᵀ + A_{i₁}Q + B_{i₁}F_{i₂}`, viewed as a
/// `q`-fold summation whose trailing indices are ignored.
pub fn make_example_spec(a: f64, b: f64, q: usize) -> Result<PlmiSpec> {
    let systems = example_systems(a, b)?;
    let reg = Arc::new(example_registry());
    let id = reg.id();
    let q_basis = reg.symmetric_basis("Q")?;
    let zero = Rational::zero();
    let one = Rational::one();

    let mut entries = Vec::with_capacity(9);
    for sys in &systems {
        for i2 in 1..=3 {
            let mut terms = Vec::new();
            for (var, basis) in &q_basis {
                let e = basis.to_row_major();
                let e: [Rational; 4] = [e[0].clone(), e[1].clone(), e[2].clone(), e[3].clone()];
                terms.push((*var, sym_part(&mat_mul(&sys.a, &e))));
            }
            let f_ids = &reg.block(&format!("F{i2}")).expect("declared").ids;
            for (c, &var) in f_ids.iter().enumerate() {
                // B · e_cᵀ
                let unit: [Rational; 2] = if c == 0 {
                    [one.clone(), zero.clone()]
                } else {
                    [zero.clone(), one.clone()]
                };
                let m: [Rational; 4] = std::array::from_fn(|n| &sys.b[n / 2] * &unit[n % 2]);
                terms.push((var, sym_part(&m)));
            }
            entries.push(AffineSymMatrix::new(id, SymMatrix::zeros(2), terms)?);
        }
    }
    let spec = PlmiSpec::from_table(2, 3, 2, reg, 2, entries)?.with_lyapunov("Q")?;
    spec.with_fold(q)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::combinat::IndexTuple;
    use crate::matexpr::{eval_expr, rat, MembershipVector};
    use nalgebra::DMatrix;

    fn t(v: &[usize]) -> IndexTuple {
        IndexTuple::new(v.to_vec(), 3).unwrap()
    }

    #[test]
    fn phi33_q11_coefficient_is_minus_two_a() {
        let spec = make_example_spec(0.0, 0.0, 2).unwrap();
        let phi = spec.vertex(&t(&[3, 3]));
        assert!(phi.constant_part().is_zero());
        let q11 = spec.registry().id_of("Q[1,1]").unwrap();
        assert_eq!(phi.terms().get(&q11).map(|m| m.get(0, 0).clone()), None);
        let spec = make_example_spec(1.5, 0.0, 2).unwrap();
        let phi = spec.vertex(&t(&[3, 3]));
        assert_eq!(phi.terms()[&q11].get(0, 0), &rat(-3, 1));
    }

    #[test]
    fn homogeneous_in_the_variables() {
        let spec = make_example_spec(3.0, 7.0, 2).unwrap();
        let x = vec![0.0; spec.registry().len()];
        for i1 in 1..=3 {
            for i2 in 1..=3 {
                let v = eval_expr(spec.vertex(&t(&[i1, i2])), spec.registry(), &x).unwrap();
                assert_eq!(v, DMatrix::zeros(2, 2));
            }
        }
    }

    #[test]
    fn phi11_at_identity_q() {
        let spec = make_example_spec(0.0, 0.0, 2).unwrap();
        let reg = spec.registry();
        let mut x = vec![0.0; reg.len()];
        x[reg.id_of("Q[1,1]").unwrap()] = 1.0;
        x[reg.id_of("Q[2,2]").unwrap()] = 1.0;
        let v = eval_expr(spec.vertex(&t(&[1, 1])), reg, &x).unwrap();
        let expect = DMatrix::from_row_slice(2, 2, &[3.18, -7.28, -7.28, 0.0]);
        assert!((v - expect).amax() < 1e-12);
    }

    #[test]
    fn trailing_indices_are_ignored() {
        let spec = make_example_spec(1.0, 2.0, 3).unwrap();
        assert_eq!(spec.vertex(&t(&[2, 1, 3])), spec.vertex(&t(&[2, 1, 1])));
    }

    #[test]
    fn lifted_plmi_matches_two_fold() {
        let s2 = make_example_spec(2.0, 5.0, 2).unwrap();
        let s3 = make_example_spec(2.0, 5.0, 3).unwrap();
        let s4 = make_example_spec(2.0, 5.0, 4).unwrap();
        let x: Vec<f64> = (0..s2.registry().len()).map(|k| (k as f64 * 0.37).sin()).collect();
        let h = MembershipVector::new(vec![0.2, 0.5, 0.3]).unwrap();
        let base = s2.eval_plmi(&h, &x).unwrap();
        assert!((s3.eval_plmi(&h, &x).unwrap() - &base).amax() < 1e-12);
        assert!((s4.eval_plmi(&h, &x).unwrap() - &base).amax() < 1e-12);
    }

    #[test]
    fn closed_loop_matches_dense_product() {
        let (a, b) = (4.0, 3.0);
        let spec = make_example_spec(a, b, 2).unwrap();
        let reg = spec.registry();
        let x: Vec<f64> = (0..reg.len()).map(|k| 0.3 * k as f64 - 1.0).collect();
        let qm = DMatrix::from_row_slice(2, 2, &[x[0], x[1], x[1], x[2]]);
        let amats = [
            DMatrix::from_row_slice(2, 2, &[1.59, -7.29, 0.01, 0.0]),
            DMatrix::from_row_slice(2, 2, &[0.02, -4.64, 0.35, 0.21]),
            DMatrix::from_row_slice(2, 2, &[-a, -4.33, 0.0, 0.0]),
        ];
        let bmats = [
            DMatrix::from_row_slice(2, 1, &[1.0, 0.0]),
            DMatrix::from_row_slice(2, 1, &[8.0, 0.0]),
            DMatrix::from_row_slice(2, 1, &[6.0 - b, -1.0]),
        ];
        for i1 in 0..3 {
            for i2 in 0..3 {
                let f = DMatrix::from_row_slice(1, 2, &x[3 + 2 * i2..5 + 2 * i2]);
                let m = &amats[i1] * &qm + &bmats[i1] * f;
                let expect = &m + m.transpose();
                let got = eval_expr(spec.vertex(&t(&[i1 + 1, i2 + 1])), reg, &x).unwrap();
                assert!((got - expect).amax() < 1e-12);
            }
        }
    }
}
