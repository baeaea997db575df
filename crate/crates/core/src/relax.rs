//! Finite LMI families that imply negativity of a nested fuzzy summation.
//!
//! Every generator emits the raw family (one constraint per enumerated
//! index/gate combination, so counts match the closed forms) with exact
//! rational coefficients. [`canonicalize`] merges duplicates and fixes a
//! content-based order so that families can be compared as sets.

use std::fmt;
use std::str::FromStr;

use num_traits::One;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::combinat::{
    all_tuples, binomial, distinct_tail_count, enumerate_distinct_tails, enumerate_partitions, multiplicity_factorial,
    multisets, IndexTuple, Partition,
};
use crate::error::{Error, Result};
use crate::matexpr::{rat, AffineSymMatrix, PlmiSpec, Rational, RegistryId};

/// Default ceiling on the number of constraints a generator may emit.
pub const DEFAULT_CAP: u128 = 1 << 20;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Vertex,
    Tuan,
    Kimlee2,
    Polya,
    Amgm,
    Amgm3,
    Amgm4,
}

impl Method {
    pub const ALL: [Method; 7] = [
        Method::Vertex,
        Method::Tuan,
        Method::Kimlee2,
        Method::Polya,
        Method::Amgm,
        Method::Amgm3,
        Method::Amgm4,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::Vertex => "vertex",
            Method::Tuan => "tuan",
            Method::Kimlee2 => "kimlee2",
            Method::Polya => "polya",
            Method::Amgm => "amgm",
            Method::Amgm3 => "amgm3",
            Method::Amgm4 => "amgm4",
        }
    }

    /// The fold count the method is restricted to, if any.
    pub fn required_fold(self) -> Option<usize> {
        match self {
            Method::Tuan | Method::Kimlee2 => Some(2),
            Method::Amgm3 => Some(3),
            Method::Amgm4 => Some(4),
            _ => None,
        }
    }

    fn check_fold(self, q: usize) -> Result<()> {
        match self.required_fold() {
            Some(expected) if expected != q => Err(Error::WrongFold {
                method: self.name(),
                expected,
                got: q,
            }),
            _ => Ok(()),
        }
    }

    pub fn generate(self, spec: &PlmiSpec, cap: u128) -> Result<LmiSet> {
        let count = count_constraints(self, spec.q(), spec.r())?;
        if count > cap {
            return Err(Error::CapExceeded {
                what: "constraint count",
                count,
                cap,
            });
        }
        match self {
            Method::Vertex => gen_vertex(spec),
            Method::Tuan => gen_tuan(spec),
            Method::Kimlee2 => gen_kimlee2(spec),
            Method::Polya => gen_polya(spec),
            Method::Amgm => gen_amgm_capped(spec, cap),
            Method::Amgm3 => gen_amgm3(spec),
            Method::Amgm4 => gen_amgm4(spec),
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Method::ALL.into_iter().find(|m| m.name() == s).ok_or_else(|| {
            Error::Config(format!(
                "unknown method `{s}` (vertex, tuan, kimlee2, polya, amgm, amgm3, amgm4)"
            ))
        })
    }
}

/// A 0/1 gate pattern, bit `s` gating slot `s` of the method's layout.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct DeltaBits {
    pub mask: u64,
    pub len: u32,
}

impl DeltaBits {
    pub fn bit(&self, slot: usize) -> bool {
        (self.mask >> slot) & 1 == 1
    }
}

impl fmt::Display for DeltaBits {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.len == 0 {
            return f.write_str("-");
        }
        for s in 0..self.len as usize {
            f.write_str(if self.bit(s) { "1" } else { "0" })?;
        }
        Ok(())
    }
}

/// Where a constraint came from.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Provenance {
    pub method: Method,
    pub head: Option<usize>,
    pub tuple: Option<IndexTuple>,
    pub delta: Option<DeltaBits>,
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.method)?;
        if let Some(h) = self.head {
            write!(f, " i1={h}")?;
        }
        if let Some(t) = &self.tuple {
            write!(f, " tuple={t}")?;
            if self.method == Method::Polya {
                // factor between the all-permutations sum and the distinct one
                let factor: u128 = t
                    .multiplicity_pattern()
                    .parts()
                    .iter()
                    .map(|&p| (1..=p as u128).product::<u128>())
                    .product();
                write!(f, " perm_factor={factor}")?;
            }
        }
        if let Some(d) = &self.delta {
            write!(f, " delta={d}")?;
        }
        Ok(())
    }
}

/// A finite family of constraints, each demanded `≺ 0`.
#[derive(Clone, Debug)]
pub struct LmiSet {
    registry: RegistryId,
    dim: usize,
    constraints: Vec<AffineSymMatrix>,
    provenance: Vec<Provenance>,
}

impl LmiSet {
    pub fn new(registry: RegistryId, dim: usize) -> Self {
        Self {
            registry,
            dim,
            constraints: Vec::new(),
            provenance: Vec::new(),
        }
    }

    pub fn push(&mut self, c: AffineSymMatrix, p: Provenance) -> Result<()> {
        if c.registry() != self.registry {
            return Err(Error::Registry);
        }
        if c.dim() != self.dim {
            return Err(Error::Dimension(format!(
                "constraint is {0}x{0}, set holds {1}x{1}",
                c.dim(),
                self.dim
            )));
        }
        self.constraints.push(c);
        self.provenance.push(p);
        Ok(())
    }

    pub fn registry(&self) -> RegistryId {
        self.registry
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.constraints.len()
    }

    pub fn is_empty(&self) -> bool {
        self.constraints.is_empty()
    }

    pub fn constraints(&self) -> &[AffineSymMatrix] {
        &self.constraints
    }

    pub fn provenance(&self) -> &[Provenance] {
        &self.provenance
    }

    pub fn iter(&self) -> impl Iterator<Item = (&AffineSymMatrix, &Provenance)> {
        self.constraints.iter().zip(&self.provenance)
    }

    fn from_parts(spec: &PlmiSpec, parts: Vec<(AffineSymMatrix, Provenance)>) -> Self {
        let (constraints, provenance) = parts.into_iter().unzip();
        Self {
            registry: spec.registry_id(),
            dim: spec.dim(),
            constraints,
            provenance,
        }
    }
}

/// Sorts constraints by their exact coefficients and drops duplicates,
/// keeping the first-emitted provenance of each.
///
/// Expressions are already stored canonically (like terms merged, zero
/// coefficients dropped, terms ordered by variable id), so two constraints
/// are the same inequality exactly when they compare equal.
pub fn canonicalize(set: &LmiSet) -> LmiSet {
    let mut order: Vec<usize> = (0..set.len()).collect();
    order.par_sort_by(|&a, &b| set.constraints[a].cmp(&set.constraints[b]).then(a.cmp(&b)));
    order.dedup_by(|b, a| set.constraints[*a] == set.constraints[*b]);
    LmiSet {
        registry: set.registry,
        dim: set.dim,
        constraints: order.iter().map(|&k| set.constraints[k].clone()).collect(),
        provenance: order.iter().map(|&k| set.provenance[k].clone()).collect(),
    }
}

/// Number of gate bits of the general AM-GM family:
/// `m(q,r) = Σ_{k=2..q} |Λ_k| · ∏_{j=1}^{k−1}(r−j)`.
pub fn amgm_bit_count(q: usize, r: usize) -> Result<u128> {
    let lambdas = enumerate_partitions(q)?;
    Ok(lambdas
        .iter()
        .filter(|(&k, _)| k >= 2)
        .map(|(&k, list)| list.len() as u128 * distinct_tail_count(r, k))
        .sum())
}

fn pow2(m: u128) -> u128 {
    if m >= 128 {
        u128::MAX
    } else {
        1u128 << m
    }
}

/// Pre-deduplication constraint count of `method` on a `q`-fold, `r`-rule
/// summation, from the closed forms.
pub fn count_constraints(method: Method, q: usize, r: usize) -> Result<u128> {
    method.check_fold(q)?;
    let (q128, r128) = (q as u128, r as u128);
    Ok(match method {
        Method::Vertex => r128.checked_pow(q as u32).unwrap_or(u128::MAX),
        Method::Polya => binomial(r128 + q128 - 1, q128),
        Method::Tuan => r128 * r128,
        Method::Kimlee2 | Method::Amgm | Method::Amgm3 | Method::Amgm4 => {
            r128.saturating_mul(pow2(amgm_bit_count(q, r)?))
        }
    })
}

/// Every vertex of the summation: `Φ_i ≺ 0` for all `i ∈ ℕ_r^q`.
pub fn gen_vertex(spec: &PlmiSpec) -> Result<LmiSet> {
    let parts = all_tuples(spec.r(), spec.q())
        .map(|t| {
            (
                spec.vertex(&t).clone(),
                Provenance {
                    method: Method::Vertex,
                    head: None,
                    tuple: Some(t),
                    delta: None,
                },
            )
        })
        .collect();
    Ok(LmiSet::from_parts(spec, parts))
}

fn add(acc: &mut AffineSymMatrix, e: &AffineSymMatrix, c: &Rational) {
    acc.add_scaled(e, c).expect("expressions share the spec registry");
}

fn tuple(v: &[usize]) -> IndexTuple {
    IndexTuple::new(v.to_vec(), usize::MAX).expect("nonempty 1-based tuple")
}

/// Diagonal `Φ_ii ≺ 0` and `2/(r−1)·Φ_ii + Φ_ij + Φ_ji ≺ 0` for `i ≠ j`.
pub fn gen_tuan(spec: &PlmiSpec) -> Result<LmiSet> {
    Method::Tuan.check_fold(spec.q())?;
    let r = spec.r();
    let one = Rational::one();
    let mut parts = Vec::with_capacity(r * r);
    for i in 1..=r {
        parts.push((
            spec.vertex(&tuple(&[i, i])).clone(),
            Provenance {
                method: Method::Tuan,
                head: Some(i),
                tuple: Some(tuple(&[i, i])),
                delta: None,
            },
        ));
    }
    if r >= 2 {
        let coeff = rat(2, r as i64 - 1);
        for i in 1..=r {
            for j in (1..=r).filter(|&j| j != i) {
                let mut c = spec.vertex(&tuple(&[i, i])).scale(&coeff);
                add(&mut c, spec.vertex(&tuple(&[i, j])), &one);
                add(&mut c, spec.vertex(&tuple(&[j, i])), &one);
                parts.push((
                    c,
                    Provenance {
                        method: Method::Tuan,
                        head: Some(i),
                        tuple: Some(tuple(&[i, j])),
                        delta: None,
                    },
                ));
            }
        }
    }
    Ok(LmiSet::from_parts(spec, parts))
}

/// Emits `base + Σ_{s: bit s set} terms[s]` for every mask over `terms`,
/// walking the masks in Gray-code order so each step adds or removes one
/// term.
fn emit_gated(base: &AffineSymMatrix, terms: &[AffineSymMatrix], mut emit: impl FnMut(&AffineSymMatrix, DeltaBits)) {
    let m = terms.len();
    assert!(m < 64, "gate count {m} exceeds the mask width");
    let one = Rational::one();
    let minus = -Rational::one();
    let mut acc = base.clone();
    let mut gray: u64 = 0;
    emit(&acc, DeltaBits { mask: 0, len: m as u32 });
    for step in 1u64..(1u64 << m) {
        let next = step ^ (step >> 1);
        let flipped = (gray ^ next).trailing_zeros() as usize;
        let sign = if next & (1 << flipped) != 0 { &one } else { &minus };
        add(&mut acc, &terms[flipped], sign);
        gray = next;
        emit(
            &acc,
            DeltaBits {
                mask: gray,
                len: m as u32,
            },
        );
    }
}

fn gated_family(
    spec: &PlmiSpec,
    method: Method,
    per_head: impl Fn(usize) -> (AffineSymMatrix, Vec<AffineSymMatrix>) + Sync,
) -> LmiSet {
    let blocks: Vec<Vec<(AffineSymMatrix, Provenance)>> = (1..=spec.r())
        .into_par_iter()
        .map(|head| {
            let (base, terms) = per_head(head);
            let mut out = Vec::with_capacity(1 << terms.len());
            emit_gated(&base, &terms, |c, delta| {
                out.push((
                    c.clone(),
                    Provenance {
                        method,
                        head: Some(head),
                        tuple: None,
                        delta: Some(delta),
                    },
                ))
            });
            out
        })
        .collect();
    LmiSet::from_parts(spec, blocks.into_iter().flatten().collect())
}

/// `Φ_{i₁i₁} + ½ Σ_{i₂≠i₁} δ_slot(i₂) (Φ_{i₁i₂} + Φ_{i₂i₁})` for every `i₁`
/// and `δ ∈ {0,1}^{r−1}`; slot order is ascending `i₂`.
pub fn gen_kimlee2(spec: &PlmiSpec) -> Result<LmiSet> {
    Method::Kimlee2.check_fold(spec.q())?;
    let r = spec.r();
    let half = rat(1, 2);
    Ok(gated_family(spec, Method::Kimlee2, |i1| {
        let base = spec.vertex(&tuple(&[i1, i1])).clone();
        let terms = (1..=r)
            .filter(|&i2| i2 != i1)
            .map(|i2| {
                let mut t = spec.zero_expr();
                add(&mut t, spec.vertex(&tuple(&[i1, i2])), &half);
                add(&mut t, spec.vertex(&tuple(&[i2, i1])), &half);
                t
            })
            .collect();
        (base, terms)
    }))
}

/// One constraint per multiset of `ℕ_r^q`: the sum of `Φ` over its distinct
/// reorderings.
pub fn gen_polya(spec: &PlmiSpec) -> Result<LmiSet> {
    let parts = multisets(spec.r(), spec.q())
        .into_iter()
        .map(|t| {
            (
                spec.perm_sum(&t),
                Provenance {
                    method: Method::Polya,
                    head: None,
                    tuple: Some(t),
                    delta: None,
                },
            )
        })
        .collect();
    Ok(LmiSet::from_parts(spec, parts))
}

/// One gate of the general AM-GM family.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DeltaSlot {
    /// Number of distinct indices.
    pub k: usize,
    /// 1-based position of `lambda` within `Λ_k`.
    pub lambda_label: usize,
    pub lambda: Partition,
    /// 1-based position of the tail among the distinct tails of the head.
    pub tail_label: usize,
}

/// Bit layout of the general AM-GM family: `k` ascending, then `λ` in
/// enumeration order, then tails lexicographically. Identical for every
/// head `i₁`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DeltaLayout {
    pub q: usize,
    pub r: usize,
    pub slots: Vec<DeltaSlot>,
}

impl DeltaLayout {
    pub fn new(q: usize, r: usize) -> Result<Self> {
        let lambdas = enumerate_partitions(q)?;
        let mut slots = Vec::new();
        for (&k, list) in lambdas.iter().filter(|(&k, _)| k >= 2) {
            let tails = distinct_tail_count(r, k) as usize;
            for (l, lambda) in list.iter().enumerate() {
                for t in 0..tails {
                    slots.push(DeltaSlot {
                        k,
                        lambda_label: l + 1,
                        lambda: lambda.clone(),
                        tail_label: t + 1,
                    });
                }
            }
        }
        Ok(Self { q, r, slots })
    }

    pub fn len(&self) -> usize {
        self.slots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.slots.is_empty()
    }

    /// Position of the gate `(k, σ₂, σ₃)`.
    pub fn position(&self, k: usize, lambda_label: usize, tail_label: usize) -> Option<usize> {
        self.slots
            .iter()
            .position(|s| s.k == k && s.lambda_label == lambda_label && s.tail_label == tail_label)
    }
}

/// A full gate pattern over a [`DeltaLayout`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DeltaAssignment<'a> {
    pub layout: &'a DeltaLayout,
    pub bits: DeltaBits,
}

impl DeltaAssignment<'_> {
    pub fn get(&self, k: usize, lambda_label: usize, tail_label: usize) -> Option<bool> {
        self.layout
            .position(k, lambda_label, tail_label)
            .map(|s| self.bits.bit(s))
    }
}

/// The gated term of slot `(λ, tail)`:
/// `(1/μ(λ)!) (1/q) Σ_j λ_j 𝒫(Φ_{i^λ})|_{i_j↔i₁}`.
fn amgm_term(spec: &PlmiSpec, lambda: &Partition, tail: &IndexTuple) -> AffineSymMatrix {
    let q = spec.q() as i64;
    let mu = multiplicity_factorial(lambda) as i64;
    let mut t = spec.zero_expr();
    for (j, &lj) in lambda.parts().iter().enumerate().take(lambda.k()) {
        let swapped = tail.swap_roles(j + 1).expand(lambda);
        add(&mut t, &spec.perm_sum(&swapped), &rat(lj as i64, mu * q));
    }
    t
}

pub fn gen_amgm(spec: &PlmiSpec) -> Result<LmiSet> {
    gen_amgm_capped(spec, DEFAULT_CAP)
}

/// The general AM-GM family: for every `i₁` and gate pattern over the
/// [`DeltaLayout`], `Φ_{i₁⋯i₁}` plus the gated terms.
pub fn gen_amgm_capped(spec: &PlmiSpec, cap: u128) -> Result<LmiSet> {
    let (q, r) = (spec.q(), spec.r());
    if q < 2 {
        return Err(Error::Invalid("the AM-GM family needs q >= 2".into()));
    }
    let count = count_constraints(Method::Amgm, q, r)?;
    if count > cap {
        return Err(Error::CapExceeded {
            what: "AM-GM constraint count",
            count,
            cap,
        });
    }
    let layout = DeltaLayout::new(q, r)?;
    if layout.len() >= 64 {
        return Err(Error::CapExceeded {
            what: "AM-GM gate bits",
            count: layout.len() as u128,
            cap: 63,
        });
    }
    Ok(gated_family(spec, Method::Amgm, |i1| {
        let base = spec
            .vertex(&IndexTuple::new(vec![i1; q], r).expect("head in range"))
            .clone();
        let mut tails_by_k = std::collections::BTreeMap::new();
        let terms = layout
            .slots
            .iter()
            .map(|slot| {
                let tails = tails_by_k
                    .entry(slot.k)
                    .or_insert_with(|| enumerate_distinct_tails(r, slot.k, i1));
                amgm_term(spec, &slot.lambda, &tails[slot.tail_label - 1])
            })
            .collect();
        (base, terms)
    }))
}

/// Tails `(i₂, …)` distinct from each other and from `i₁`, lexicographic.
fn tails_of(r: usize, i1: usize, len: usize) -> Vec<Vec<usize>> {
    let mut out = vec![vec![]];
    for _ in 0..len {
        out = out
            .into_iter()
            .flat_map(|prefix: Vec<usize>| {
                (1..=r)
                    .filter(|v| *v != i1 && !prefix.contains(v))
                    .map(|v| {
                        let mut p = prefix.clone();
                        p.push(v);
                        p
                    })
                    .collect::<Vec<_>>()
            })
            .collect();
    }
    out
}

/// The 3-fold conditions written out term by term:
/// `Φ_{i₁i₁i₁} + Σ δ (1/3)(2𝒫(Φ_{i₁i₁i₂}) + 𝒫(Φ_{i₂i₂i₁})) + ΣΣ δ (1/3!) 𝒫(Φ_{i₁i₂i₃})`.
pub fn gen_amgm3(spec: &PlmiSpec) -> Result<LmiSet> {
    Method::Amgm3.check_fold(spec.q())?;
    let r = spec.r();
    let p = |v: &[usize]| spec.perm_sum(&tuple(v));
    Ok(gated_family(spec, Method::Amgm3, |i1| {
        let base = spec.vertex(&tuple(&[i1, i1, i1])).clone();
        let mut terms = Vec::new();
        for t in tails_of(r, i1, 1) {
            let i2 = t[0];
            let mut e = p(&[i1, i1, i2]).scale(&rat(2, 3));
            add(&mut e, &p(&[i2, i2, i1]), &rat(1, 3));
            terms.push(e);
        }
        for t in tails_of(r, i1, 2) {
            terms.push(p(&[i1, t[0], t[1]]).scale(&rat(1, 6)));
        }
        (base, terms)
    }))
}

/// The 4-fold conditions written out term by term.
pub fn gen_amgm4(spec: &PlmiSpec) -> Result<LmiSet> {
    Method::Amgm4.check_fold(spec.q())?;
    let r = spec.r();
    let p = |v: &[usize]| spec.perm_sum(&tuple(v));
    Ok(gated_family(spec, Method::Amgm4, |i1| {
        let base = spec.vertex(&tuple(&[i1, i1, i1, i1])).clone();
        let mut terms = Vec::new();
        for t in tails_of(r, i1, 1) {
            let i2 = t[0];
            let mut e = p(&[i1, i1, i1, i2]).scale(&rat(3, 4));
            add(&mut e, &p(&[i2, i2, i2, i1]), &rat(1, 4));
            terms.push(e);
        }
        for t in tails_of(r, i1, 1) {
            let i2 = t[0];
            terms.push(p(&[i1, i1, i2, i2]).scale(&rat(1, 2)));
        }
        for t in tails_of(r, i1, 2) {
            let (i2, i3) = (t[0], t[1]);
            let mut e = p(&[i1, i1, i2, i3]).scale(&rat(2, 8));
            add(&mut e, &p(&[i2, i2, i1, i3]), &rat(1, 8));
            add(&mut e, &p(&[i3, i3, i2, i1]), &rat(1, 8));
            terms.push(e);
        }
        for t in tails_of(r, i1, 3) {
            terms.push(p(&[i1, t[0], t[1], t[2]]).scale(&rat(1, 24)));
        }
        (base, terms)
    }))
}

/// Exact set equality of two families after canonicalization.
pub fn same_constraints(a: &LmiSet, b: &LmiSet) -> bool {
    let (a, b) = (canonicalize(a), canonicalize(b));
    a.registry == b.registry && a.dim == b.dim && a.constraints == b.constraints
}
