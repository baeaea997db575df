//! Decision variables, affine symmetric-matrix expressions, and the
//! nested-summation data model.
//!
//! Everything on the generator side is exact: coefficients are
//! [`BigRational`]s and only [`AffineSymMatrix::eval`] and
//! [`AffineSymMatrix::to_numeric`] produce floating point.

mod example;
mod registry;
mod spec_file;
mod sym;

use std::collections::BTreeMap;
use std::sync::Arc;

use nalgebra::DMatrix;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::combinat::{all_tuples, distinct_permutations, IndexTuple, Partition};
use crate::error::{Error, Result};

pub use example::{example_systems, make_example_spec, ExampleSystem};
pub use registry::{RegistryId, ScalarVar, VarBlock, VarKind, VarRegistry};
pub use spec_file::{SpecFile, VariableDecl, VertexDecl};
pub use sym::SymMatrix;

pub type Rational = BigRational;

pub fn rat(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

pub fn rat_int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// Parses `p`, `p/q`, or a decimal literal such as `-7.29` or `1.5e-3`
/// into an exact rational.
pub fn parse_rational(text: &str) -> Result<Rational> {
    let s = text.trim();
    let bad = || Error::Parse(format!("`{text}` is not a rational number"));
    if let Some((p, q)) = s.split_once('/') {
        let p: BigInt = p.trim().parse().map_err(|_| bad())?;
        let q: BigInt = q.trim().parse().map_err(|_| bad())?;
        if q.is_zero() {
            return Err(Error::Parse(format!("`{text}` has a zero denominator")));
        }
        return Ok(Rational::new(p, q));
    }
    let (mantissa, exponent) = match s.find(['e', 'E']) {
        Some(pos) => (&s[..pos], s[pos + 1..].parse::<i32>().map_err(|_| bad())?),
        None => (s, 0),
    };
    let (negative, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = digits.split_once('.').unwrap_or((digits, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(bad());
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let all_digits = format!("{int_part}{frac_part}");
    let numer: BigInt = if all_digits.is_empty() {
        BigInt::zero()
    } else {
        all_digits.parse().map_err(|_| bad())?
    };
    let scale = exponent - frac_part.len() as i32;
    let ten = BigInt::from(10);
    let mut value = Rational::from_integer(numer);
    if scale >= 0 {
        value *= Rational::from_integer(num_traits::pow(ten, scale as usize));
    } else {
        value /= Rational::from_integer(num_traits::pow(ten, (-scale) as usize));
    }
    Ok(if negative { -value } else { value })
}

/// Renders a rational as `p` or `p/q`.
pub fn format_rational(r: &Rational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Exact conversion of a finite `f64` (every finite double is a dyadic rational).
pub fn rational_from_f64(x: f64) -> Result<Rational> {
    Rational::from_float(x).ok_or_else(|| Error::Invalid(format!("{x} is not finite")))
}

pub fn rational_to_f64(r: &Rational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// A symmetric-matrix-valued affine function of the scalar decision
/// variables: `constant + Σ_v x_v · terms[v]`.
///
/// Zero coefficient matrices are never stored and the term map is ordered by
/// variable id, so structural equality is mathematical equality.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct AffineSymMatrix {
    registry: RegistryId,
    dim: usize,
    constant: SymMatrix<Rational>,
    terms: BTreeMap<usize, SymMatrix<Rational>>,
}

impl AffineSymMatrix {
    pub fn zero(registry: RegistryId, dim: usize) -> Self {
        Self {
            registry,
            dim,
            constant: SymMatrix::zeros(dim),
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(registry: RegistryId, constant: SymMatrix<Rational>) -> Self {
        Self {
            registry,
            dim: constant.dim(),
            constant,
            terms: BTreeMap::new(),
        }
    }

    /// Builds an expression, dropping zero coefficient matrices.
    pub fn new(
        registry: RegistryId,
        constant: SymMatrix<Rational>,
        terms: impl IntoIterator<Item = (usize, SymMatrix<Rational>)>,
    ) -> Result<Self> {
        let mut e = Self::constant(registry, constant);
        for (var, coeff) in terms {
            if coeff.dim() != e.dim {
                return Err(Error::Dimension(format!(
                    "coefficient of variable {var} is {}x{}, expected {}x{}",
                    coeff.dim(),
                    coeff.dim(),
                    e.dim,
                    e.dim
                )));
            }
            e.add_term(var, &coeff);
        }
        Ok(e)
    }

    pub fn registry(&self) -> RegistryId {
        self.registry
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn constant_part(&self) -> &SymMatrix<Rational> {
        &self.constant
    }

    pub fn terms(&self) -> &BTreeMap<usize, SymMatrix<Rational>> {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty() && self.constant.is_zero()
    }

    fn add_term(&mut self, var: usize, coeff: &SymMatrix<Rational>) {
        use std::collections::btree_map::Entry;
        match self.terms.entry(var) {
            Entry::Vacant(slot) => {
                if !coeff.is_zero() {
                    slot.insert(coeff.clone());
                }
            }
            Entry::Occupied(mut slot) => {
                slot.get_mut().add_assign_ref(coeff);
                if slot.get().is_zero() {
                    slot.remove();
                }
            }
        }
    }

    fn check_compatible(&self, other: &Self) -> Result<()> {
        if self.registry != other.registry {
            return Err(Error::Registry);
        }
        if self.dim != other.dim {
            return Err(Error::Dimension(format!(
                "{}x{} vs {}x{}",
                self.dim, self.dim, other.dim, other.dim
            )));
        }
        Ok(())
    }

    /// `self += c · other`, exactly.
    pub fn add_scaled(&mut self, other: &Self, c: &Rational) -> Result<()> {
        self.check_compatible(other)?;
        if c.is_zero() {
            return Ok(());
        }
        if c.is_one() {
            self.constant.add_assign_ref(&other.constant);
            for (&var, coeff) in &other.terms {
                self.add_term(var, coeff);
            }
        } else {
            self.constant.add_assign_ref(&other.constant.scale(c));
            for (&var, coeff) in &other.terms {
                self.add_term(var, &coeff.scale(c));
            }
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        let mut out = self.clone();
        out.add_scaled(other, &Rational::one())?;
        Ok(out)
    }

    pub fn scale(&self, c: &Rational) -> Self {
        if c.is_zero() {
            return Self::zero(self.registry, self.dim);
        }
        Self {
            registry: self.registry,
            dim: self.dim,
            constant: self.constant.scale(c),
            terms: self.terms.iter().map(|(&v, m)| (v, m.scale(c))).collect(),
        }
    }

    /// `constant + Σ x_v·coeff_v` in floating point. The upper triangle is
    /// evaluated and mirrored, so the result is exactly symmetric.
    pub fn eval(&self, x: &[f64]) -> Result<DMatrix<f64>> {
        Ok(self.to_numeric().eval(x)?.to_dense())
    }

    pub fn to_numeric(&self) -> NumericAffine {
        NumericAffine {
            dim: self.dim,
            constant: self.constant.map(rational_to_f64),
            terms: self.terms.iter().map(|(&v, m)| (v, m.map(rational_to_f64))).collect(),
        }
    }

    /// Largest Frobenius norm over the constant and coefficient matrices.
    pub fn max_frobenius(&self) -> f64 {
        std::iter::once(&self.constant)
            .chain(self.terms.values())
            .map(|m| m.map(rational_to_f64).frobenius_norm())
            .fold(0.0, f64::max)
    }

    /// Largest variable id referenced plus one (zero when constant).
    pub fn var_extent(&self) -> usize {
        self.terms.keys().next_back().map_or(0, |&v| v + 1)
    }
}

pub fn expr_add(a: &AffineSymMatrix, b: &AffineSymMatrix) -> Result<AffineSymMatrix> {
    a.add(b)
}

pub fn expr_scale(e: &AffineSymMatrix, c: &Rational) -> AffineSymMatrix {
    e.scale(c)
}

/// Floating-point copy of an [`AffineSymMatrix`], used by the solver.
#[derive(Clone, Debug, PartialEq)]
pub struct NumericAffine {
    pub dim: usize,
    pub constant: SymMatrix<f64>,
    pub terms: Vec<(usize, SymMatrix<f64>)>,
}

impl NumericAffine {
    pub fn eval(&self, x: &[f64]) -> Result<SymMatrix<f64>> {
        if let Some(&(v, _)) = self.terms.last() {
            if v >= x.len() {
                return Err(Error::Dimension(format!(
                    "variable vector has length {} but the expression uses variable {v}",
                    x.len()
                )));
            }
        }
        let mut out = self.constant.clone();
        for (v, m) in &self.terms {
            let xv = x[*v];
            if xv != 0.0 {
                out.add_assign_ref(&m.scale(&xv));
            }
        }
        Ok(out)
    }

    /// Multiplies every coefficient, including the constant, by `c`.
    pub fn scaled(&self, c: f64) -> Self {
        Self {
            dim: self.dim,
            constant: self.constant.scale(&c),
            terms: self.terms.iter().map(|(v, m)| (*v, m.scale(&c))).collect(),
        }
    }
}

/// Checks `x` against a registry size and evaluates.
pub fn eval_expr(e: &AffineSymMatrix, registry: &VarRegistry, x: &[f64]) -> Result<DMatrix<f64>> {
    if x.len() != registry.len() {
        return Err(Error::Dimension(format!(
            "variable vector has length {}, registry has {} scalars",
            x.len(),
            registry.len()
        )));
    }
    e.eval(x)
}

/// A point on the probability simplex standing in for the membership values.
#[derive(Clone, Debug, PartialEq)]
pub struct MembershipVector {
    weights: Vec<f64>,
}

impl MembershipVector {
    pub const SUM_TOLERANCE: f64 = 1e-12;

    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::Invalid("membership vector is empty".into()));
        }
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::Invalid(format!(
                "membership weights must be nonnegative: {weights:?}"
            )));
        }
        let sum: f64 = weights.iter().sum();
        if (sum - 1.0).abs() > Self::SUM_TOLERANCE {
            return Err(Error::Invalid(format!("membership weights sum to {sum}, not 1")));
        }
        Ok(Self { weights })
    }

    /// The `k`-th vertex of the simplex (0-based `k`).
    pub fn unit(r: usize, k: usize) -> Self {
        let mut w = vec![0.0; r];
        w[k] = 1.0;
        Self { weights: w }
    }

    pub fn uniform(r: usize) -> Self {
        Self {
            weights: vec![1.0 / r as f64; r],
        }
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }
}

/// Vertex expressions indexed by the leading `significant` entries of a tuple.
///
/// A table with `significant < q` describes a summation whose vertex matrices
/// ignore the trailing indices; it is stored once, not per tuple.
#[derive(Clone, Debug)]
struct VertexTable {
    significant: usize,
    entries: Vec<AffineSymMatrix>,
}

/// A `q`-fold nested summation over `r` rules with `dim × dim` vertex
/// matrices affine in the registry's variables.
#[derive(Clone, Debug)]
pub struct PlmiSpec {
    q: usize,
    r: usize,
    dim: usize,
    registry: Arc<VarRegistry>,
    table: Arc<VertexTable>,
    lyapunov: Option<String>,
}

impl PlmiSpec {
    /// Builds a spec by evaluating `vertex` at every tuple of `ℕ_r^q`.
    pub fn from_fn(
        q: usize,
        r: usize,
        dim: usize,
        registry: Arc<VarRegistry>,
        mut vertex: impl FnMut(&IndexTuple) -> AffineSymMatrix,
    ) -> Result<Self> {
        let entries: Vec<_> = all_tuples(r, q).map(|t| vertex(&t)).collect();
        Self::from_table(q, r, dim, registry, q, entries)
    }

    /// `entries` lists the vertex expressions of `ℕ_r^significant` in
    /// lexicographic order; tuple entries past `significant` are ignored.
    pub fn from_table(
        q: usize,
        r: usize,
        dim: usize,
        registry: Arc<VarRegistry>,
        significant: usize,
        entries: Vec<AffineSymMatrix>,
    ) -> Result<Self> {
        if q == 0 || r == 0 {
            return Err(Error::Invalid("fold and rule counts must be positive".into()));
        }
        if significant == 0 || significant > q {
            return Err(Error::Invalid(format!(
                "significant prefix {significant} must lie in 1..={q}"
            )));
        }
        let expected = r.checked_pow(significant as u32).ok_or(Error::CapExceeded {
            what: "vertex table size",
            count: u128::MAX,
            cap: usize::MAX as u128,
        })?;
        if entries.len() != expected {
            return Err(Error::Dimension(format!(
                "expected {expected} vertex expressions, got {}",
                entries.len()
            )));
        }
        let id = registry.id();
        for (n, e) in entries.iter().enumerate() {
            if e.dim() != dim {
                return Err(Error::Dimension(format!(
                    "vertex #{n} is {0}x{0}, expected {dim}x{dim}",
                    e.dim()
                )));
            }
            if e.registry() != id {
                return Err(Error::Registry);
            }
            if e.var_extent() > registry.len() {
                return Err(Error::Dimension(format!("vertex #{n} references an unknown variable")));
            }
        }
        Ok(Self {
            q,
            r,
            dim,
            registry,
            table: Arc::new(VertexTable { significant, entries }),
            lyapunov: None,
        })
    }

    /// Designates a symmetric variable as the Lyapunov matrix for
    /// stabilization problems.
    pub fn with_lyapunov(mut self, name: &str) -> Result<Self> {
        match self.registry.block(name) {
            Some(VarBlock {
                kind: VarKind::Symmetric { n },
                ..
            }) if *n == self.dim => {
                self.lyapunov = Some(name.to_string());
                Ok(self)
            }
            Some(_) => Err(Error::Config(format!(
                "`{name}` must be a symmetric {0}x{0} variable",
                self.dim
            ))),
            None => Err(Error::Config(format!("no variable named `{name}`"))),
        }
    }

    /// The same vertex data viewed as a `q`-fold summation, `q` at least the
    /// number of significant indices.
    pub fn with_fold(&self, q: usize) -> Result<Self> {
        if q < self.table.significant {
            return Err(Error::Invalid(format!(
                "cannot view a spec with {} significant indices as {q}-fold",
                self.table.significant
            )));
        }
        Ok(Self { q, ..self.clone() })
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn r(&self) -> usize {
        self.r
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn registry(&self) -> &Arc<VarRegistry> {
        &self.registry
    }

    pub fn registry_id(&self) -> RegistryId {
        self.registry.id()
    }

    pub fn lyapunov(&self) -> Option<&str> {
        self.lyapunov.as_deref()
    }

    pub fn significant(&self) -> usize {
        self.table.significant
    }

    pub fn zero_expr(&self) -> AffineSymMatrix {
        AffineSymMatrix::zero(self.registry.id(), self.dim)
    }

    fn rank(&self, entries: &[usize]) -> usize {
        entries[..self.table.significant]
            .iter()
            .fold(0, |acc, &e| acc * self.r + (e - 1))
    }

    /// The stored table: tuples of `ℕ_r^significant` with their expressions.
    pub fn table_entries(&self) -> impl Iterator<Item = (IndexTuple, &AffineSymMatrix)> {
        all_tuples(self.r, self.table.significant).zip(self.table.entries.iter())
    }

    /// The vertex expression `Φ_i` for a 1-based tuple of length `q`.
    pub fn vertex(&self, i: &IndexTuple) -> &AffineSymMatrix {
        assert_eq!(i.len(), self.q, "tuple length must equal q");
        assert!(
            i.entries().iter().all(|&e| e >= 1 && e <= self.r),
            "tuple {i} outside 1..={}",
            self.r
        );
        &self.table.entries[self.rank(i.entries())]
    }

    /// `𝒫(Φ_i)`: the sum of `Φ` over the distinct reorderings of `i`.
    pub fn perm_sum(&self, i: &IndexTuple) -> AffineSymMatrix {
        let mut acc = self.zero_expr();
        for t in distinct_permutations(i).tuples {
            acc.add_scaled(self.vertex(&t), &Rational::one())
                .expect("vertex expressions share the spec registry");
        }
        acc
    }

    /// `Σ_{i∈ℕ_r^q} h_{i_1}⋯h_{i_q} Φ_i(x)`, skipping tuples with a zero weight.
    pub fn eval_plmi(&self, h: &MembershipVector, x: &[f64]) -> Result<DMatrix<f64>> {
        if h.len() != self.r {
            return Err(Error::Dimension(format!(
                "membership vector has length {}, expected {}",
                h.len(),
                self.r
            )));
        }
        if x.len() != self.registry.len() {
            return Err(Error::Dimension(format!(
                "variable vector has length {}, registry has {} scalars",
                x.len(),
                self.registry.len()
            )));
        }
        let values: Vec<SymMatrix<f64>> = self
            .table
            .entries
            .iter()
            .map(|e| e.to_numeric().eval(x))
            .collect::<Result<_>>()?;
        let w = h.weights();
        let mut acc = SymMatrix::<f64>::zeros(self.dim);
        for t in all_tuples(self.r, self.q) {
            let weight: f64 = t.entries().iter().map(|&e| w[e - 1]).product();
            if weight == 0.0 {
                continue;
            }
            acc.add_assign_ref(&values[self.rank(t.entries())].scale(&weight));
        }
        Ok(acc.to_dense())
    }

    /// Numeric vertex values at `x`, one per tuple of `ℕ_r^q`, lexicographic.
    pub fn numeric_vertices(&self, x: &[f64]) -> Result<Vec<SymMatrix<f64>>> {
        let cache: Vec<SymMatrix<f64>> = self
            .table
            .entries
            .iter()
            .map(|e| e.to_numeric().eval(x))
            .collect::<Result<_>>()?;
        Ok(all_tuples(self.r, self.q)
            .map(|t| cache[self.rank(t.entries())].clone())
            .collect())
    }

    /// A copy whose vertex table is relabeled: `Φ'_i = Φ_{π(i)}` where `π`
    /// permutes tuple positions. Materializes the full `r^q` table.
    pub fn permute_positions(&self, perm: &[usize]) -> Result<Self> {
        if perm.len() != self.q {
            return Err(Error::Invalid("position permutation has the wrong length".into()));
        }
        let mut sorted = perm.to_vec();
        sorted.sort_unstable();
        if sorted != (0..self.q).collect::<Vec<_>>() {
            return Err(Error::Invalid(format!("{perm:?} is not a permutation")));
        }
        let entries: Vec<_> = all_tuples(self.r, self.q)
            .map(|t| {
                let permuted: Vec<usize> = perm.iter().map(|&p| t.entries()[p]).collect();
                self.vertex(&IndexTuple::from_vec(permuted)).clone()
            })
            .collect();
        let mut out = Self::from_table(self.q, self.r, self.dim, self.registry.clone(), self.q, entries)?;
        out.lyapunov = self.lyapunov.clone();
        Ok(out)
    }
}

/// The vertex expression at `i^λ` after exchanging the roles of `i_1` and
/// `i_j` in the role tuple `roles = (i_1, ..., i_k)`.
pub fn subst_indices(spec: &PlmiSpec, roles: &IndexTuple, lambda: &Partition, j: usize) -> AffineSymMatrix {
    spec.vertex(&roles.swap_roles(j).expand(lambda)).clone()
}

/// Absolute-value helper for tests and reports.
pub fn rational_abs(r: &Rational) -> Rational {
    r.abs()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn reg2() -> Arc<VarRegistry> {
        let mut reg = VarRegistry::new();
        reg.add_symmetric("Q", 2).unwrap();
        reg.add_scalar("s").unwrap();
        Arc::new(reg)
    }

    fn sym(vals: [i64; 4]) -> SymMatrix<Rational> {
        SymMatrix::from_row_major(2, &vals.map(rat_int)).unwrap()
    }

    #[test]
    fn parse_rationals() {
        assert_eq!(parse_rational("3/6").unwrap(), rat(1, 2));
        assert_eq!(parse_rational("-7.29").unwrap(), rat(-729, 100));
        assert_eq!(parse_rational("1.5e-3").unwrap(), rat(3, 2000));
        assert_eq!(parse_rational("12").unwrap(), rat_int(12));
        assert_eq!(parse_rational(".5").unwrap(), rat(1, 2));
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("abc").is_err());
        assert!(parse_rational("").is_err());
        assert_eq!(format_rational(&rat(-3, 4)), "-3/4");
    }

    #[test]
    fn add_and_scale_are_exact_and_canonical() {
        let reg = reg2();
        let e = AffineSymMatrix::new(
            reg.id(),
            sym([1, 2, 2, 3]),
            [(0, sym([1, 0, 0, 0])), (3, sym([0, 1, 1, 0]))],
        )
        .unwrap();
        let neg = e.scale(&rat_int(-1));
        let z = e.add(&neg).unwrap();
        assert!(z.is_zero());
        assert!(z.terms().is_empty());
        assert_eq!(e.scale(&rat_int(1)), e);
        let six = e.scale(&rat_int(6));
        assert_eq!(six.scale(&rat(1, 6)), e);
    }

    #[test]
    fn zero_coefficients_are_not_stored() {
        let reg = reg2();
        let e = AffineSymMatrix::new(reg.id(), sym([0, 0, 0, 0]), [(1, sym([0, 0, 0, 0]))]).unwrap();
        assert!(e.terms().is_empty());
        let f = AffineSymMatrix::new(
            reg.id(),
            sym([0, 0, 0, 0]),
            [(1, sym([1, 0, 0, 0])), (1, sym([-1, 0, 0, 0]))],
        )
        .unwrap();
        assert!(f.terms().is_empty());
    }

    #[test]
    fn registry_mismatch_is_reported() {
        let a = AffineSymMatrix::zero(RegistryId(1), 2);
        let b = AffineSymMatrix::zero(RegistryId(2), 2);
        assert!(matches!(a.add(&b), Err(Error::Registry)));
    }

    #[test]
    fn eval_examples() {
        let reg = reg2();
        let e = AffineSymMatrix::new(reg.id(), sym([1, 2, 2, 3]), [(3, sym([0, 1, 1, 5]))]).unwrap();
        let at0 = eval_expr(&e, &reg, &[0.0; 4]).unwrap();
        assert_eq!(at0, DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 3.0]));
        let at2 = eval_expr(&e, &reg, &[0.0, 0.0, 0.0, 2.0]).unwrap();
        assert_eq!(at2, DMatrix::from_row_slice(2, 2, &[1.0, 4.0, 4.0, 13.0]));
        assert!(matches!(eval_expr(&e, &reg, &[0.0; 3]), Err(Error::Dimension(_))));
    }

    #[test]
    fn membership_validation() {
        assert!(MembershipVector::new(vec![0.5, 0.5]).is_ok());
        assert!(MembershipVector::new(vec![0.5, 0.6]).is_err());
        assert!(MembershipVector::new(vec![1.5, -0.5]).is_err());
        assert!(MembershipVector::new(vec![]).is_err());
    }

    fn small_spec() -> PlmiSpec {
        let reg = reg2();
        let id = reg.id();
        PlmiSpec::from_fn(2, 2, 2, reg, |t| {
            let a = t.entries()[0] as i64;
            let b = t.entries()[1] as i64;
            AffineSymMatrix::new(id, sym([a, b, b, a * b]), [(3, sym([b, 0, 0, a]))]).unwrap()
        })
        .unwrap()
    }

    #[test]
    fn plmi_unit_and_midpoint() {
        let spec = small_spec();
        let x = [0.3, -0.2, 0.1, 0.7];
        let v = spec.eval_plmi(&MembershipVector::unit(2, 1), &x).unwrap();
        let t22 = IndexTuple::new(vec![2, 2], 2).unwrap();
        assert_eq!(v, spec.vertex(&t22).eval(&x).unwrap());
        let mid = spec
            .eval_plmi(&MembershipVector::new(vec![0.5, 0.5]).unwrap(), &x)
            .unwrap();
        let mut expect = DMatrix::zeros(2, 2);
        for t in all_tuples(2, 2) {
            expect += spec.vertex(&t).eval(&x).unwrap() * 0.25;
        }
        assert!((mid - expect).amax() < 1e-15);
    }

    #[test]
    fn subst_identity_and_swaps() {
        let reg = reg2();
        let id = reg.id();
        let spec = PlmiSpec::from_fn(4, 3, 1, reg, |t| {
            let code = t.entries().iter().fold(0i64, |acc, &e| acc * 10 + e as i64);
            AffineSymMatrix::constant(id, SymMatrix::from_row_major(1, &[rat_int(code)]).unwrap())
        })
        .unwrap();
        let code = |e: &AffineSymMatrix| e.constant_part().get(0, 0).clone();
        let roles = IndexTuple::new(vec![1, 2], 3).unwrap();
        let l31 = Partition::new(vec![3, 1, 0, 0]).unwrap();
        assert_eq!(code(&subst_indices(&spec, &roles, &l31, 1)), rat_int(1112));
        assert_eq!(code(&subst_indices(&spec, &roles, &l31, 2)), rat_int(2221));
        let roles3 = IndexTuple::new(vec![1, 2, 3], 3).unwrap();
        let l211 = Partition::new(vec![2, 1, 1, 0]).unwrap();
        assert_eq!(code(&subst_indices(&spec, &roles3, &l211, 3)), rat_int(3321));
    }
}
