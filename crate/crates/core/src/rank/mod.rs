//! Strength, relative and collective strength, Birch rank, partition rank
//! and geometric rank.
//!
//! Over `F_p` the searches are exhaustive, so a finished search is exact.
//! Over `Q` free entries only range over `{0, 1, -1}`: the search yields
//! certified upper bounds, and lower bounds come from reduction mod small
//! primes, from the Birch rank, or from the trivial bound.

pub mod partition;
pub(crate) mod search;
pub(crate) mod strength;

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::ser::SerializeStruct;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::field::{Field, Scalar};
use crate::geometry::{singular_locus_ideal, variety_dims};
use crate::ideal::{ideal_membership, piece_echelon, MonomialIndex};
use crate::linalg::{express, Arith};
use crate::poly::Form;
use crate::with_arith;

use strength::{solve_cofactors, Outcome, Problem, Witness};

pub use partition::{
    collective_partition_rank, geometric_rank, partition_rank, CollectivePartition, PartitionPiece, PartitionResult,
};

/// Default cap on membership tests for the exhaustive searches.
pub const DEFAULT_BUDGET: u64 = 2_000_000;

/// A rank value; linear forms have infinite strength.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Rank {
    Finite(u64),
    Infinite,
}

impl Rank {
    pub fn finite(self) -> Option<u64> {
        match self {
            Rank::Finite(v) => Some(v),
            Rank::Infinite => None,
        }
    }
}

impl fmt::Display for Rank {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Rank::Finite(v) => write!(f, "{v}"),
            Rank::Infinite => write!(f, "inf"),
        }
    }
}

impl Serialize for Rank {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Rank::Finite(v) => s.serialize_u64(*v),
            Rank::Infinite => s.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for Rank {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            N(u64),
            S(String),
        }
        match Raw::deserialize(d)? {
            Raw::N(v) => Ok(Rank::Finite(v)),
            Raw::S(s) if s == "inf" => Ok(Rank::Infinite),
            Raw::S(s) => Err(serde::de::Error::custom(format!("bad rank `{s}`"))),
        }
    }
}

/// A bracket `lower ≤ value ≤ upper` with a note for each side.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RankBound {
    pub lower: Rank,
    pub upper: Rank,
    pub exact: bool,
    pub trace: Vec<String>,
}

impl RankBound {
    pub fn exact(v: Rank, note: impl Into<String>) -> RankBound {
        RankBound {
            lower: v,
            upper: v,
            exact: true,
            trace: vec![note.into()],
        }
    }

    pub fn bracket(lower: Rank, upper: Rank, trace: Vec<String>) -> RankBound {
        assert!(lower <= upper, "empty bracket {lower}..{upper}");
        RankBound {
            lower,
            upper,
            exact: lower == upper,
            trace,
        }
    }

    pub fn value(&self) -> Option<Rank> {
        self.exact.then_some(self.lower)
    }
}

impl fmt::Display for RankBound {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.exact {
            write!(f, "{}", self.lower)
        } else {
            write!(f, "[{}, {}]", self.lower, self.upper)
        }
    }
}

/// `f = Σ g_i h_i + witness` with `witness` in the modulus ideal.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StrengthCertificate {
    pub pairs: Vec<(Form, Form)>,
    pub witness: Form,
}

impl StrengthCertificate {
    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// Re-checks the decomposition by exact arithmetic.
    pub fn verify(&self, f: &Form, modulus: &[Form]) -> Result<bool> {
        let mut acc = self.witness.poly().clone();
        for (g, h) in &self.pairs {
            if g.degree() == 0 || h.degree() == 0 || g.degree() + h.degree() != f.degree() {
                return Ok(false);
            }
            acc = acc.add(g.mul(h)?.poly())?;
        }
        Ok(&acc == f.poly() && ideal_membership(&self.witness, modulus)?)
    }
}

impl Serialize for StrengthCertificate {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let pairs: Vec<[String; 2]> = self.pairs.iter().map(|(g, h)| [g.to_string(), h.to_string()]).collect();
        let mut st = s.serialize_struct("StrengthCertificate", 2)?;
        st.serialize_field("pairs", &pairs)?;
        st.serialize_field("witness", &self.witness.to_string())?;
        st.end()
    }
}

#[derive(Clone, Debug)]
pub struct StrengthResult {
    pub bound: RankBound,
    pub certificate: Option<StrengthCertificate>,
}

/// Outcome of the question `str_I(f) ≤ cap`.
#[derive(Clone, Debug)]
pub enum CapOutcome {
    Within(StrengthCertificate),
    Exceeds,
    Unknown,
}

fn check_inputs(f: &Form, modulus: &[Form]) -> Result<()> {
    for g in modulus {
        if g.field() != f.field() {
            return Err(Error::FieldMismatch);
        }
        if g.nvars() != f.nvars() {
            return Err(Error::AmbientMismatch(f.nvars(), g.nvars()));
        }
    }
    if f.degree() == 0 {
        return Err(Error::invalid("strength is defined for forms of positive degree"));
    }
    Ok(())
}

fn certificate_from<A: Arith>(
    prob: &Problem<A>,
    w: &Witness<A::E>,
    f: &Form,
    modulus: &[Form],
) -> Result<StrengthCertificate> {
    let factors = prob.lift_factors(w, f.nvars());
    let (hs, witness) = solve_cofactors(&prob.a, f, &factors, modulus)
        .ok_or_else(|| Error::invalid("internal: witness subspace does not solve"))?;
    let cert = StrengthCertificate {
        pairs: factors.into_iter().zip(hs).collect(),
        witness,
    };
    if !cert.verify(f, modulus)? {
        return Err(Error::invalid("internal: certificate failed verification"));
    }
    Ok(cert)
}

fn trivial_witness<E: Clone>(k0: usize, zero: &E, one: &E) -> Witness<E> {
    let linear = (0..k0)
        .map(|i| {
            let mut row = vec![zero.clone(); k0];
            row[i] = one.clone();
            row
        })
        .collect();
    Witness {
        level: k0 as u64,
        linear,
        pivots: (0..k0).collect(),
        higher: Vec::new(),
    }
}

/// `f` scaled to a primitive integral form.
pub(crate) fn primitive_integral(f: &Form) -> Form {
    let mut den = BigInt::one();
    let mut num = BigInt::zero();
    for (_, c) in f.terms() {
        let q = c.as_rational().expect("rational form");
        den = den.lcm(q.denom());
    }
    for (_, c) in f.terms() {
        let q = c.as_rational().expect("rational form");
        num = num.gcd(&(q.numer() * (&den / q.denom())));
    }
    if num.is_zero() {
        return f.clone();
    }
    let scale = BigRational::new(den, num);
    f.scale(&Scalar::Rat(scale))
}

/// Lower bounds on `str_Q(f)`, with a note naming the obstruction used.
fn rational_lower(f: &Form, modulus: &[Form], budget: u64) -> Result<(u64, String)> {
    let mut best = (1u64, "lower: f is outside the modulus ideal".to_string());
    if !modulus.is_empty() {
        return Ok(best);
    }
    if f.degree() <= 3 {
        let g = primitive_integral(f);
        for p in [2u32, 3, 5] {
            let Ok(fp) = g.reduce_mod(p) else { continue };
            let prob = Problem::new(crate::linalg::ModP::new(p), &fp, &[], budget / 8);
            let mut prob = prob?;
            let lower = match prob.search(None) {
                Outcome::Found(w) => w.level,
                Outcome::Exhausted { refuted_below } => refuted_below,
                Outcome::Refuted { up_to } => up_to + 1,
            };
            if lower > best.0 {
                best = (lower, format!("lower: exact search over F_{p} after reduction"));
            }
        }
    }
    let brk = birch_rank(std::slice::from_ref(f), crate::geometry::DEFAULT_GROEBNER_BUDGET)?;
    if let Rank::Finite(b) = brk.lower {
        let klp = b.div_ceil(2);
        if klp > best.0 {
            best = (klp, "lower: ceil(Brk/2)".to_string());
        }
    }
    Ok(best)
}

/// `str_I(f)` for `I = (modulus)`, with a certificate for the upper bound.
pub fn strength(f: &Form, modulus: &[Form], budget: u64) -> Result<StrengthResult> {
    check_inputs(f, modulus)?;
    if ideal_membership(f, modulus)? {
        return Ok(StrengthResult {
            bound: RankBound::exact(Rank::Finite(0), "f lies in the modulus ideal"),
            certificate: Some(StrengthCertificate {
                pairs: Vec::new(),
                witness: f.clone(),
            }),
        });
    }
    if f.degree() == 1 {
        return Ok(StrengthResult {
            bound: RankBound::exact(Rank::Infinite, "linear forms have infinite strength"),
            certificate: None,
        });
    }
    let field = f.field();
    with_arith!(field, a => {
        let mut prob = Problem::new(a.clone(), f, modulus, budget)?;
        let outcome = prob.search(None);
        let (w, searched_lower, note) = match outcome {
            Outcome::Found(w) => {
                let lvl = w.level;
                (w, lvl, format!("upper: subspace search, first success at level {lvl}"))
            }
            Outcome::Exhausted { refuted_below } => (
                trivial_witness(prob.k0, &a.zero(), &a.one()),
                refuted_below,
                format!("upper: trivial bound; budget exhausted at level {refuted_below}"),
            ),
            Outcome::Refuted { .. } => unreachable!("the top level always succeeds"),
        };
        let cert = certificate_from(&prob, &w, f, modulus)?;
        let upper = cert.len() as u64;
        let mut trace = vec![note];
        let lower = if a.exhaustive() {
            trace.push(format!("lower: levels below {searched_lower} refuted exhaustively"));
            searched_lower.min(upper)
        } else {
            let (lo, why) = rational_lower(f, modulus, budget)?;
            let mut lo = lo;
            let mut why = why;
            if f.degree() == 2 && modulus.is_empty() {
                if let Ok(q) = quadratic_strength(f) {
                    if let Rank::Finite(v) = q.lower {
                        if v > lo {
                            lo = v;
                            why = "lower: quadratic form invariants".to_string();
                        }
                    }
                }
            }
            trace.push(why);
            lo.min(upper)
        };
        Ok(StrengthResult {
            bound: RankBound::bracket(Rank::Finite(lower), Rank::Finite(upper), trace),
            certificate: Some(cert),
        })
    })
}

/// Decides `str_I(f) ≤ cap` when the search allows it.
pub fn strength_at_most(f: &Form, modulus: &[Form], cap: u64, budget: u64) -> Result<CapOutcome> {
    check_inputs(f, modulus)?;
    if ideal_membership(f, modulus)? {
        return Ok(CapOutcome::Within(StrengthCertificate {
            pairs: Vec::new(),
            witness: f.clone(),
        }));
    }
    if f.degree() == 1 {
        return Ok(CapOutcome::Exceeds);
    }
    let field = f.field();
    with_arith!(field, a => {
        let mut prob = Problem::new(a.clone(), f, modulus, budget)?;
        match prob.search(Some(cap)) {
            Outcome::Found(w) => Ok(CapOutcome::Within(certificate_from(&prob, &w, f, modulus)?)),
            Outcome::Refuted { up_to } if a.exhaustive() && up_to >= cap => Ok(CapOutcome::Exceeds),
            Outcome::Refuted { .. } | Outcome::Exhausted { .. } => {
                if a.exhaustive() {
                    return Ok(CapOutcome::Unknown);
                }
                let (lo, _) = rational_lower(f, modulus, budget)?;
                Ok(if lo > cap { CapOutcome::Exceeds } else { CapOutcome::Unknown })
            }
        }
    })
}

/// Symmetric diagonalization of the quadratic form `q`: the diagonal
/// coefficients of an equivalent form `Σ c_i y_i^2`, zeros dropped.
fn diagonalize<A: Arith>(a: &A, q: &Form) -> Vec<A::E> {
    let n = q.nvars();
    let two = a.from_i64(2);
    let half = a.inv(&two);
    let mut b = vec![vec![a.zero(); n]; n];
    for (m, c) in q.terms() {
        let s = m.support();
        let c = a.from_scalar(c);
        if s.len() == 1 {
            b[s[0]][s[0]] = a.mul(&c, &two);
        } else {
            b[s[0]][s[1]] = c.clone();
            b[s[1]][s[0]] = c;
        }
    }
    let mut diag = Vec::new();
    let mut active: Vec<usize> = (0..n).collect();
    while !active.is_empty() {
        let pivot = active.iter().copied().find(|&i| !a.is_zero(&b[i][i]));
        let i = match pivot {
            Some(i) => i,
            None => {
                let pair = active
                    .iter()
                    .flat_map(|&i| active.iter().map(move |&j| (i, j)))
                    .find(|&(i, j)| i != j && !a.is_zero(&b[i][j]));
                let Some((i, j)) = pair else { break };
                // Replace e_i by e_i + e_j, which makes the diagonal entry 2 b_ij.
                for k in 0..n {
                    b[i][k] = a.add(&b[i][k], &b[j][k]);
                }
                for k in 0..n {
                    b[k][i] = a.add(&b[k][i], &b[k][j]);
                }
                i
            }
        };
        let piv = b[i][i].clone();
        let inv = a.inv(&piv);
        for &r in &active {
            if r == i || a.is_zero(&b[r][i]) {
                continue;
            }
            let f = a.mul(&b[r][i], &inv);
            for k in 0..n {
                let v = a.mul(&f, &b[i][k]);
                b[r][k] = a.sub(&b[r][k], &v);
            }
            for k in 0..n {
                let v = a.mul(&f, &b[k][i]);
                b[k][r] = a.sub(&b[k][r], &v);
            }
        }
        diag.push(a.mul(&piv, &half));
        active.retain(|&r| r != i);
    }
    diag
}

/// Exact strength of a quadratic form over `F_p`, `p` odd, as rank minus
/// Witt index. Over `Q` the result is a bracket unless the rank is at most 2.
pub fn quadratic_strength(q: &Form) -> Result<RankBound> {
    if q.degree() != 2 {
        return Err(Error::DegreeMismatch(2, q.degree()));
    }
    let field = q.field();
    if field.characteristic() == 2 {
        return Err(Error::Characteristic { p: 2, need: 3 });
    }
    let diag: Vec<Scalar> = with_arith!(field, a => {
        diagonalize(&a, q).iter().map(|e| a.to_scalar(e)).collect()
    });
    let rho = diag.len() as u64;
    let disc = diag.iter().fold(field.one(), |acc, c| &acc * c);
    let sign = if (rho / 2) % 2 == 1 {
        field.from_i64(-1)
    } else {
        field.one()
    };
    let note = format!("Gram rank {rho}");
    match field {
        Field::Prime(_) => {
            let witt = if rho % 2 == 1 {
                (rho - 1) / 2
            } else if (&sign * &disc).is_square() {
                rho / 2
            } else {
                rho / 2 - 1
            };
            Ok(RankBound::exact(
                Rank::Finite(rho - witt),
                format!("{note}, Witt index {witt}"),
            ))
        }
        Field::Rational => {
            if rho <= 1 {
                return Ok(RankBound::exact(Rank::Finite(rho), note));
            }
            if rho == 2 {
                let iso = (-disc).is_square();
                let v = if iso { 1 } else { 2 };
                return Ok(RankBound::exact(Rank::Finite(v), format!("{note}, isotropic: {iso}")));
            }
            let positive = diag
                .iter()
                .filter(|c| c.as_rational().is_some_and(|r| r.is_positive()))
                .count();
            let indefinite = positive > 0 && positive < diag.len();
            let upper = if rho >= 5 && indefinite { rho - 1 } else { rho };
            Ok(RankBound::bracket(
                Rank::Finite(rho.div_ceil(2)),
                Rank::Finite(upper),
                vec![
                    format!("lower: {note} over the algebraic closure"),
                    "upper: rank, less one for indefinite forms of rank at least 5".to_string(),
                ],
            ))
        }
    }
}

fn same_degree(forms: &[Form]) -> Result<u32> {
    let first = forms
        .first()
        .ok_or_else(|| Error::invalid("collective strength of an empty collection"))?;
    for f in forms {
        if f.degree() != first.degree() {
            return Err(Error::DegreeMismatch(first.degree(), f.degree()));
        }
        if f.nvars() != first.nvars() {
            return Err(Error::AmbientMismatch(first.nvars(), f.nvars()));
        }
        if f.field() != first.field() {
            return Err(Error::FieldMismatch);
        }
    }
    Ok(first.degree())
}

/// Nonzero coefficient tuples up to scaling: the first nonzero entry is 1,
/// tuples ordered by the position of that entry, then lexicographically.
/// Over `Q` the free entries range over `{0, 1, -1}`.
pub fn projective_tuples(field: Field, s: usize) -> Vec<Vec<Scalar>> {
    let values: Vec<Scalar> = match field {
        Field::Prime(_) => field.elements(),
        Field::Rational => vec![field.zero(), field.one(), field.from_i64(-1)],
    };
    let mut out = Vec::new();
    for lead in 0..s {
        let free = s - lead - 1;
        let mut digits = vec![0usize; free];
        loop {
            let mut t = vec![field.zero(); s];
            t[lead] = field.one();
            for (k, &d) in digits.iter().enumerate() {
                t[lead + 1 + k] = values[d].clone();
            }
            out.push(t);
            let mut k = free;
            let mut done = true;
            while k > 0 {
                k -= 1;
                digits[k] += 1;
                if digits[k] < values.len() {
                    done = false;
                    break;
                }
                digits[k] = 0;
            }
            if done {
                break;
            }
        }
    }
    out
}

pub fn combine(forms: &[Form], a: &[Scalar]) -> Result<Form> {
    let first = &forms[0];
    let mut acc = Form::zero(first.field(), first.nvars(), first.degree());
    for (f, c) in forms.iter().zip(a) {
        if !c.is_zero() {
            acc = acc.add(&f.scale(c))?;
        }
    }
    Ok(acc)
}

/// A nontrivial combination of `forms` lying in the modulus ideal, scaled so
/// that its first nonzero entry is 1.
pub fn dependency(forms: &[Form], modulus: &[Form]) -> Result<Option<Vec<Scalar>>> {
    let first = &forms[0];
    let idx = MonomialIndex::new(first.nvars(), first.degree());
    Ok(with_arith!(first.field(), a => {
        let base: Vec<Vec<_>> = piece_echelon(&a, &idx, modulus).basis().cloned().collect();
        let dense: Vec<Vec<_>> = forms.iter().map(|f| idx.to_dense(&a, f)).collect();
        let mut found = None;
        for j in 0..dense.len() {
            let mut vectors = base.clone();
            vectors.extend(dense[..j].iter().cloned());
            if let Some(sol) = express(&a, &vectors, &dense[j]) {
                let mut comb: Vec<_> = sol[base.len()..].iter().map(|c| a.neg(c)).collect();
                comb.push(a.one());
                comb.resize(forms.len(), a.zero());
                let lead = comb.iter().find(|c| !a.is_zero(c)).cloned().unwrap();
                let inv = a.inv(&lead);
                found = Some(comb.iter().map(|c| a.to_scalar(&a.mul(c, &inv))).collect());
                break;
            }
        }
        found
    }))
}

#[derive(Clone, Debug)]
pub struct CollectiveResult {
    pub bound: RankBound,
    pub combination: Option<Vec<Scalar>>,
    pub certificate: Option<StrengthCertificate>,
}

/// `min_{a ≠ 0} str_I(Σ a_j f_j)`.
pub fn collective_strength(forms: &[Form], modulus: &[Form], budget: u64) -> Result<CollectiveResult> {
    let d = same_degree(forms)?;
    for f in forms {
        check_inputs(f, modulus)?;
    }
    if let Some(dep) = dependency(forms, modulus)? {
        let field = forms[0].field();
        let mut combination = dep;
        if field.is_finite() {
            for t in projective_tuples(field, forms.len()) {
                if ideal_membership(&combine(forms, &t)?, modulus)? {
                    combination = t;
                    break;
                }
            }
        }
        let g = combine(forms, &combination)?;
        return Ok(CollectiveResult {
            bound: RankBound::exact(Rank::Finite(0), "a combination lies in the modulus ideal"),
            combination: Some(combination),
            certificate: Some(StrengthCertificate {
                pairs: Vec::new(),
                witness: g,
            }),
        });
    }
    if d == 1 {
        return Ok(CollectiveResult {
            bound: RankBound::exact(Rank::Infinite, "independent linear forms have infinite strength"),
            combination: None,
            certificate: None,
        });
    }
    let field = forms[0].field();
    let mut best: Option<(u64, Vec<Scalar>, StrengthCertificate)> = None;
    let mut lower_all: u64 = u64::MAX;
    let mut used = 0u64;
    let mut trace = Vec::new();
    let exhaustive = field.is_finite();
    for t in projective_tuples(field, forms.len()) {
        let g = combine(forms, &t)?;
        let cap = best.as_ref().map(|b| b.0.saturating_sub(1));
        if best.as_ref().is_some_and(|b| b.0 == 0) {
            break;
        }
        let remaining = budget.saturating_sub(used);
        let (found, lower_t, spent) = with_arith!(field, a => {
            let mut prob = Problem::new(a.clone(), &g, modulus, remaining)?;
            let out = prob.search(cap);
            let spent = prob.used;
            match out {
                Outcome::Found(w) => {
                    let lvl = w.level;
                    (Some(certificate_from(&prob, &w, &g, modulus)?), lvl, spent)
                }
                Outcome::Refuted { up_to } => (None, up_to + 1, spent),
                Outcome::Exhausted { refuted_below } => (None, refuted_below, spent),
            }
        });
        used += spent;
        lower_all = lower_all.min(lower_t);
        if let Some(cert) = found {
            best = Some((cert.len() as u64, t, cert));
        }
        if used >= budget {
            trace.push("budget exhausted during the tuple scan".to_string());
            break;
        }
    }
    let complete = used < budget;
    let (upper, combination, certificate) = match best {
        Some((v, t, c)) => (Rank::Finite(v), Some(t), Some(c)),
        None => (Rank::Infinite, None, None),
    };
    let lower = if exhaustive && complete {
        trace.push("lower: exhaustive over all projective tuples".to_string());
        Rank::Finite(lower_all.min(upper.finite().unwrap_or(u64::MAX)))
    } else if exhaustive {
        trace.push("lower: trivial".to_string());
        Rank::Finite(1)
    } else {
        let mut lo = 1u64;
        let mut why = "lower: no combination lies in the modulus ideal".to_string();
        if modulus.is_empty() {
            let brk = birch_rank(forms, crate::geometry::DEFAULT_GROEBNER_BUDGET)?;
            if let Rank::Finite(b) = brk.lower {
                if b.div_ceil(2) > lo {
                    lo = b.div_ceil(2);
                    why = "lower: ceil(Brk/2)".to_string();
                }
            }
        }
        trace.push(why);
        Rank::Finite(lo)
    };
    trace.insert(0, "upper: best certified combination".to_string());
    let lower = lower.min(upper);
    Ok(CollectiveResult {
        bound: RankBound::bracket(lower, upper, trace),
        combination,
        certificate,
    })
}

#[derive(Clone, Debug)]
pub enum CollectiveCap {
    Within {
        combination: Vec<Scalar>,
        certificate: StrengthCertificate,
    },
    Exceeds,
    Unknown,
}

/// The first tuple in canonical order whose combination has strength `≤ cap`.
pub fn collective_strength_at_most(forms: &[Form], modulus: &[Form], cap: u64, budget: u64) -> Result<CollectiveCap> {
    let d = same_degree(forms)?;
    let field = forms[0].field();
    if d == 1 || !field.is_finite() {
        if let Some(combination) = dependency(forms, modulus)? {
            let g = combine(forms, &combination)?;
            return Ok(CollectiveCap::Within {
                combination,
                certificate: StrengthCertificate {
                    pairs: Vec::new(),
                    witness: g,
                },
            });
        }
        if d == 1 {
            return Ok(CollectiveCap::Exceeds);
        }
    }
    let mut used = 0u64;
    let mut unknown = false;
    for t in projective_tuples(field, forms.len()) {
        let g = combine(forms, &t)?;
        check_inputs(&g, modulus)?;
        if ideal_membership(&g, modulus)? {
            return Ok(CollectiveCap::Within {
                combination: t,
                certificate: StrengthCertificate {
                    pairs: Vec::new(),
                    witness: g,
                },
            });
        }
        let remaining = budget.saturating_sub(used);
        let (found, settled, spent) = with_arith!(field, a => {
            let mut prob = Problem::new(a.clone(), &g, modulus, remaining)?;
            let out = prob.search(Some(cap));
            let spent = prob.used;
            match out {
                Outcome::Found(w) => (Some(certificate_from(&prob, &w, &g, modulus)?), true, spent),
                Outcome::Refuted { up_to } => (None, a.exhaustive() && up_to >= cap, spent),
                Outcome::Exhausted { .. } => (None, false, spent),
            }
        });
        used += spent;
        if let Some(c) = found {
            return Ok(CollectiveCap::Within {
                combination: t,
                certificate: c,
            });
        }
        if !settled {
            unknown = true;
        }
        if used >= budget {
            return Ok(CollectiveCap::Unknown);
        }
    }
    if field.is_finite() {
        return Ok(if unknown {
            CollectiveCap::Unknown
        } else {
            CollectiveCap::Exceeds
        });
    }
    // Over Q the scan only samples tuples; exceeding the cap needs a lower bound.
    if modulus.is_empty() {
        let brk = birch_rank(forms, crate::geometry::DEFAULT_GROEBNER_BUDGET)?;
        match brk.lower {
            Rank::Infinite => return Ok(CollectiveCap::Exceeds),
            Rank::Finite(b) if b.div_ceil(2) > cap => return Ok(CollectiveCap::Exceeds),
            _ => {}
        }
    }
    Ok(if cap == 0 {
        CollectiveCap::Exceeds
    } else {
        CollectiveCap::Unknown
    })
}

/// Codimension of the locus where the gradients of `forms` are linearly dependent.
pub fn birch_rank(forms: &[Form], budget: u64) -> Result<RankBound> {
    same_degree(forms)?;
    let n = forms[0].nvars();
    let minors = singular_locus_ideal(forms)?;
    match variety_dims(forms[0].field(), n, &minors, budget) {
        Ok(dims) if dims.is_empty() => Ok(RankBound::exact(Rank::Infinite, "gradients are independent everywhere")),
        Ok(dims) => Ok(RankBound::exact(
            Rank::Finite(dims.codim as u64),
            format!("codimension of the Jacobian minor locus over {}", dims.field),
        )),
        Err(Error::BudgetExhausted(b)) => Ok(RankBound::bracket(
            Rank::Finite(0),
            Rank::Finite(n as u64),
            vec![format!("Groebner budget {b} exhausted")],
        )),
        Err(e) => Err(e),
    }
}

/// The interval `[ceil(Brk/2), (d-1)(Brk+s-1)]` on absolute collective strength.
pub fn klp_interval(forms: &[Form], budget: u64) -> Result<RankBound> {
    let d = same_degree(forms)? as u64;
    let s = forms.len() as u64;
    let brk = birch_rank(forms, budget)?;
    let (lo, hi) = match (brk.lower, brk.upper) {
        (Rank::Infinite, _) => (Rank::Infinite, Rank::Infinite),
        (Rank::Finite(l), Rank::Finite(u)) => (
            Rank::Finite(l.div_ceil(2)),
            Rank::Finite(d.saturating_sub(1) * (u + s - 1)),
        ),
        (Rank::Finite(l), Rank::Infinite) => (Rank::Finite(l.div_ceil(2)), Rank::Infinite),
    };
    let mut trace = vec![format!("Brk = {brk}")];
    trace.extend(brk.trace);
    if lo > hi {
        return Ok(RankBound {
            lower: lo,
            upper: hi,
            exact: false,
            trace,
        });
    }
    Ok(RankBound::bracket(lo, hi, trace))
}

/// Strength of `f` over `F_p` obtained by reducing a rational form; used by tests.
pub fn reduce_form(f: &Form, p: u32) -> Result<Form> {
    primitive_integral(f).reduce_mod(p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::text::parse_form;

    fn form(s: &str, n: usize, field: Field) -> Form {
        parse_form(s, field, n).unwrap()
    }

    fn exact(f: &Form, m: &[Form]) -> Rank {
        let r = strength(f, m, DEFAULT_BUDGET).unwrap();
        if let Some(c) = &r.certificate {
            assert!(c.verify(f, m).unwrap());
        }
        assert!(r.bound.exact, "{}", r.bound);
        r.bound.lower
    }

    #[test]
    fn strength_examples() {
        let q = Field::Rational;
        let f3 = Field::Prime(3);
        let sq = form("x1^2", 1, q);
        let r = strength(&sq, &[], DEFAULT_BUDGET).unwrap();
        assert_eq!(r.bound.value(), Some(Rank::Finite(1)));
        let c = r.certificate.unwrap();
        assert_eq!(c.pairs[0].0.to_string(), "x1");
        assert_eq!(c.pairs[0].1.to_string(), "x1");
        assert_eq!(exact(&form("x1*x2 + x3*x4", 4, q), &[]), Rank::Finite(2));
        let f = form("x1*x2 + x3*x4", 4, f3);
        let m = [form("x1", 4, f3)];
        assert_eq!(exact(&f, &m), Rank::Finite(1));
        let r = strength(&f, &m, DEFAULT_BUDGET).unwrap();
        let c = r.certificate.unwrap();
        assert_eq!(c.pairs[0].0.to_string(), "x3");
        assert_eq!(c.pairs[0].1.to_string(), "x4");
        assert_eq!(exact(&form("x1", 2, q), &[]), Rank::Infinite);
        assert_eq!(exact(&form("x1*x2", 2, q), &[form("x1", 2, q)]), Rank::Finite(0));
    }

    #[test]
    fn quadratic_examples() {
        let q = Field::Rational;
        let v = |s: &str, n: usize, field: Field| quadratic_strength(&form(s, n, field)).unwrap();
        assert_eq!(v("x1^2", 1, q).value(), Some(Rank::Finite(1)));
        assert_eq!(v("x1*x2 + x3*x4", 4, q).lower, Rank::Finite(2));
        assert_eq!(
            v("x1^2 + x2^2 + x3^2 + x4^2 + x5^2", 5, Field::Prime(7)).value(),
            Some(Rank::Finite(3))
        );
        assert_eq!(v("x1^2 + x2^2", 2, Field::Prime(3)).value(), Some(Rank::Finite(2)));
        assert_eq!(v("x1^2 + x2^2", 2, Field::Prime(5)).value(), Some(Rank::Finite(1)));
        assert_eq!(v("x1^2 + x2^2", 2, q).value(), Some(Rank::Finite(2)));
        assert_eq!(v("x1^2 - x2^2", 2, q).value(), Some(Rank::Finite(1)));
        assert!(quadratic_strength(&form("x1*x2", 2, Field::Prime(2))).is_err());
    }

    #[test]
    fn collective_examples() {
        let f3 = Field::Prime(3);
        let fs = [form("x1^2", 2, f3), form("x2^2", 2, f3)];
        let r = collective_strength(&fs, &[], DEFAULT_BUDGET).unwrap();
        assert_eq!(r.bound.value(), Some(Rank::Finite(1)));
        let single = [form("x1*x2 + x3*x4", 4, f3)];
        let r = collective_strength(&single, &[], DEFAULT_BUDGET).unwrap();
        assert_eq!(r.bound.value(), Some(Rank::Finite(2)));
    }

    #[test]
    fn birch_and_klp() {
        let q = Field::Rational;
        let b = |s: &str, n: usize| birch_rank(&[form(s, n, q)], 1000).unwrap().value();
        assert_eq!(b("x1*x2", 2), Some(Rank::Finite(2)));
        assert_eq!(b("x1^2 + x2^2 + x3^2", 3), Some(Rank::Finite(3)));
        assert_eq!(b("x1*x2*x3", 3), Some(Rank::Finite(2)));
        let k = klp_interval(&[form("x1*x2 + x3*x4", 4, q)], 1000).unwrap();
        assert_eq!((k.lower, k.upper), (Rank::Finite(2), Rank::Finite(4)));
        let k = klp_interval(&[form("x1*x2*x3", 3, q)], 1000).unwrap();
        assert_eq!((k.lower, k.upper), (Rank::Finite(1), Rank::Finite(4)));
    }

    #[test]
    fn tuples_in_canonical_order() {
        let t = projective_tuples(Field::Prime(3), 2);
        let shown: Vec<String> = t
            .iter()
            .map(|v| v.iter().map(|s| s.to_string()).collect::<Vec<_>>().join(","))
            .collect();
        assert_eq!(shown, vec!["1,0", "1,1", "1,2", "0,1"]);
    }
}
