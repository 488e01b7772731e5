//! Partition rank relative to a collection of subsets and a multilinear
//! tower, and the geometric rank.

use std::ops::ControlFlow;

use itertools::Itertools;
use serde::Serialize;

use super::search::for_each_rref;
use super::{Rank, RankBound};
use crate::error::{Error, Result};
use crate::geometry::variety_dims;
use crate::linalg::{express, Arith, Echelon};
use crate::multilinear::{flat_index, unflat_index, BlockSpace, MultilinearForm, MultilinearTower, SubsetCollection};
use crate::poly::Poly;
use crate::with_arith;

/// One summand `G(x_I) H(x_{S \ I})`; `set` holds block labels.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PartitionPiece {
    pub set: Vec<usize>,
    pub g: MultilinearForm,
    pub h: MultilinearForm,
}

impl Serialize for PartitionPiece {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = s.serialize_struct("PartitionPiece", 3)?;
        st.serialize_field("set", &self.set.iter().map(|b| b + 1).collect::<Vec<_>>())?;
        st.serialize_field("g", &self.g.to_string())?;
        st.serialize_field("h", &self.h.to_string())?;
        st.end()
    }
}

#[derive(Clone, Debug)]
pub struct PartitionResult {
    pub bound: RankBound,
    pub pieces: Option<Vec<PartitionPiece>>,
    /// The part of `F` lying in the relative ideal.
    pub witness: Option<MultilinearForm>,
}

/// Outer product of forms with disjoint supports.
pub fn tensor_product(g: &MultilinearForm, h: &MultilinearForm) -> Result<MultilinearForm> {
    if g.space() != h.space() || g.field() != h.field() {
        return Err(Error::FieldMismatch);
    }
    if g.support().iter().any(|b| h.support().contains(b)) {
        return Err(Error::invalid("tensor product of forms with overlapping supports"));
    }
    let mut support: Vec<usize> = g.support().iter().chain(h.support()).copied().collect();
    support.sort_unstable();
    let mut out = MultilinearForm::zero(g.space().clone(), g.field(), support.clone())?;
    for (ig, cg) in g.entries() {
        for (ih, ch) in h.entries() {
            let idx: Vec<usize> = support
                .iter()
                .map(|b| match g.support().iter().position(|x| x == b) {
                    Some(k) => ig[k],
                    None => ih[h.support().iter().position(|x| x == b).unwrap()],
                })
                .collect();
            out.add_entry(idx, cg * ch)?;
        }
    }
    Ok(out)
}

/// The relative ideal in degree `S`: products of tower forms supported
/// inside `S` with multilinear monomials on the remaining blocks.
fn relative_ideal_vectors<A: Arith>(
    a: &A,
    shape: &[usize],
    support: &[usize],
    modulus: Option<&MultilinearTower>,
) -> Vec<Vec<A::E>> {
    let Some(t) = modulus else { return Vec::new() };
    let mut out = Vec::new();
    for g in t.forms() {
        let Some(pos) = g
            .support()
            .iter()
            .map(|b| support.iter().position(|x| x == b))
            .collect::<Option<Vec<usize>>>()
        else {
            continue;
        };
        let table = SplitTable::new(shape, &pos);
        let dense = g.to_dense(a);
        for kc in 0..table.other_dim {
            let mut v = vec![a.zero(); table.total];
            for (kb, c) in dense.iter().enumerate() {
                if !a.is_zero(c) {
                    v[table.comb[kb][kc]] = c.clone();
                }
            }
            out.push(v);
        }
    }
    out
}

/// Flat index bookkeeping for `⊗_S = ⊗_B ⊗ ⊗_{S \ B}`.
struct SplitTable {
    side: Vec<usize>,
    other: Vec<usize>,
    side_dim: usize,
    other_dim: usize,
    total: usize,
    comb: Vec<Vec<usize>>,
}

impl SplitTable {
    fn new(shape: &[usize], side: &[usize]) -> SplitTable {
        let other: Vec<usize> = (0..shape.len()).filter(|k| !side.contains(k)).collect();
        let side_shape: Vec<usize> = side.iter().map(|&k| shape[k]).collect();
        let other_shape: Vec<usize> = other.iter().map(|&k| shape[k]).collect();
        let side_dim: usize = side_shape.iter().product();
        let other_dim: usize = other_shape.iter().product();
        let total: usize = shape.iter().product();
        let mut comb = vec![vec![0; other_dim]; side_dim];
        for k in 0..total {
            let idx = unflat_index(shape, k);
            let ib: Vec<usize> = side.iter().map(|&j| idx[j]).collect();
            let ic: Vec<usize> = other.iter().map(|&j| idx[j]).collect();
            comb[flat_index(&side_shape, &ib)][flat_index(&other_shape, &ic)] = k;
        }
        SplitTable {
            side: side.to_vec(),
            other,
            side_dim,
            other_dim,
            total,
            comb,
        }
    }

    fn lift<A: Arith>(&self, a: &A, u: &[A::E]) -> Vec<Vec<A::E>> {
        (0..self.other_dim)
            .map(|kc| {
                let mut v = vec![a.zero(); self.total];
                for (kb, c) in u.iter().enumerate() {
                    if !a.is_zero(c) {
                        v[self.comb[kb][kc]] = c.clone();
                    }
                }
                v
            })
            .collect()
    }
}

/// A collection set with the side that gets enumerated.
struct Split {
    /// Positions within the support.
    set: Vec<usize>,
    table: SplitTable,
}

type Choice<E> = Vec<(usize, Vec<Vec<E>>)>;

enum Step<E> {
    Found(Choice<E>),
    Continue,
    Stop,
}

struct Search<'s, A: Arith> {
    a: &'s A,
    target: Vec<A::E>,
    splits: Vec<Split>,
    values: Vec<A::E>,
    budget: u64,
    used: u64,
}

impl<A: Arith> Search<'_, A> {
    fn rec(&mut self, gi: usize, remaining: usize, ech: &Echelon<A>, chosen: &mut Choice<A::E>) -> Step<A::E> {
        if gi == self.splits.len() {
            if remaining > 0 {
                return Step::Continue;
            }
            if self.used >= self.budget {
                return Step::Stop;
            }
            self.used += 1;
            return if ech.contains(&self.target) {
                Step::Found(chosen.clone())
            } else {
                Step::Continue
            };
        }
        let cap = remaining.min(self.splits[gi].table.side_dim);
        for rg in (0..=cap).rev() {
            if rg == 0 {
                match self.rec(gi + 1, remaining, ech, chosen) {
                    Step::Continue => continue,
                    other => return other,
                }
            }
            let dim = self.splits[gi].table.side_dim;
            let a = self.a.clone();
            let values = self.values.clone();
            let mut result = Step::Continue;
            let _ = for_each_rref(dim, rg, &a.zero(), &a.one(), &values, &mut |rows, _| {
                let mut e = ech.clone();
                for u in rows {
                    for v in self.splits[gi].table.lift(&a, u) {
                        e.insert(&v);
                    }
                }
                chosen.push((gi, rows.to_vec()));
                let step = self.rec(gi + 1, remaining - rg, &e, chosen);
                chosen.pop();
                match step {
                    Step::Continue => ControlFlow::Continue(()),
                    other => {
                        result = other;
                        ControlFlow::Break(())
                    }
                }
            });
            if !matches!(result, Step::Continue) {
                return result;
            }
        }
        Step::Continue
    }
}

fn build_certificate<A: Arith>(
    a: &A,
    f: &MultilinearForm,
    splits: &[Split],
    ideal: &[Vec<A::E>],
    choice: &Choice<A::E>,
) -> Result<(Vec<PartitionPiece>, MultilinearForm)> {
    let space = f.space();
    let support = f.support();
    let target = f.to_dense(a);
    let mut vectors: Vec<Vec<A::E>> = ideal.to_vec();
    let mut labels = Vec::new();
    for (gi, rows) in choice {
        for (ui, u) in rows.iter().enumerate() {
            for (kc, v) in splits[*gi].table.lift(a, u).into_iter().enumerate() {
                vectors.push(v);
                labels.push((*gi, ui, kc));
            }
        }
    }
    let coef = express(a, &vectors, &target)
        .ok_or_else(|| Error::invalid("internal: chosen subspaces do not span the target"))?;
    let mut witness = vec![a.zero(); target.len()];
    for (v, c) in ideal.iter().zip(&coef) {
        for (w, x) in witness.iter_mut().zip(v) {
            *w = a.add(w, &a.mul(c, x));
        }
    }
    let mut pieces = Vec::new();
    for (gi, rows) in choice {
        let table = &splits[*gi].table;
        let side_blocks: Vec<usize> = table.side.iter().map(|&k| support[k]).collect();
        let other_blocks: Vec<usize> = table.other.iter().map(|&k| support[k]).collect();
        for (ui, u) in rows.iter().enumerate() {
            let mut hv = vec![a.zero(); table.other_dim];
            for (k, &(g2, u2, kc)) in labels.iter().enumerate() {
                if g2 == *gi && u2 == ui {
                    hv[kc] = coef[ideal.len() + k].clone();
                }
            }
            let uf = MultilinearForm::from_dense(a, space, &side_blocks, u);
            let hf = MultilinearForm::from_dense(a, space, &other_blocks, &hv);
            let set_blocks: Vec<usize> = splits[*gi].set.iter().map(|&k| support[k]).collect();
            let (g, h) = if set_blocks == side_blocks { (uf, hf) } else { (hf, uf) };
            pieces.push(PartitionPiece { set: set_blocks, g, h });
        }
    }
    let witness = MultilinearForm::from_dense(a, space, support, &witness);
    Ok((pieces, witness))
}

/// Re-checks `F = Σ G_k H_k + witness` with the witness in the relative ideal.
pub fn verify_pieces(
    f: &MultilinearForm,
    pieces: &[PartitionPiece],
    witness: &MultilinearForm,
    modulus: Option<&MultilinearTower>,
) -> Result<bool> {
    let mut acc = witness.clone();
    for p in pieces {
        if p.g.support() != p.set.as_slice() || p.set.is_empty() || p.set.len() >= f.degree() {
            return Ok(false);
        }
        acc = acc.add(&tensor_product(&p.g, &p.h)?)?;
    }
    if acc != *f {
        return Ok(false);
    }
    if witness.is_zero() {
        return Ok(true);
    }
    Ok(with_arith!(f.field(), a => {
        let ideal = relative_ideal_vectors(&a, &f.shape(), f.support(), modulus);
        let mut e = Echelon::new(a.clone(), witness.to_dense(&a).len());
        for v in &ideal {
            e.insert(v);
        }
        e.contains(&witness.to_dense(&a))
    }))
}

/// `prk` of `F` relative to `collection` (positions within the support of
/// `F`, default: all proper subsets containing the first) and to the ideal of
/// `modulus`.
pub fn partition_rank(
    f: &MultilinearForm,
    collection: Option<&SubsetCollection>,
    modulus: Option<&MultilinearTower>,
    budget: u64,
) -> Result<PartitionResult> {
    let k = f.degree();
    let coll = match collection {
        Some(c) if c.d != k => {
            return Err(Error::invalid(format!(
                "collection over [{}] for a form of degree {k}",
                c.d
            )))
        }
        Some(c) => c.clone(),
        None => SubsetCollection::full(k),
    };
    if let Some(t) = modulus {
        if t.space != *f.space() {
            return Err(Error::invalid("modulus tower lives on a different block space"));
        }
        if t.field != f.field() {
            return Err(Error::FieldMismatch);
        }
    }
    let shape = f.shape();
    with_arith!(f.field(), a => {
        let ideal = relative_ideal_vectors(&a, &shape, f.support(), modulus);
        let total: usize = shape.iter().product();
        let mut base = Echelon::new(a.clone(), total);
        for v in &ideal {
            base.insert(v);
        }
        let target = f.to_dense(&a);
        if base.contains(&target) {
            let (_, witness) = build_certificate(&a, f, &[], &ideal, &Vec::new())?;
            return Ok(PartitionResult {
                bound: RankBound::exact(Rank::Finite(0), "F lies in the relative ideal"),
                pieces: Some(Vec::new()),
                witness: Some(witness),
            });
        }
        let splits: Vec<Split> = coll
            .sets
            .iter()
            .map(|set| {
                let comp: Vec<usize> = (0..k).filter(|j| !set.contains(j)).collect();
                let dim_set: usize = set.iter().map(|&j| shape[j]).product();
                let dim_comp: usize = comp.iter().map(|&j| shape[j]).product();
                let side = if dim_comp < dim_set { comp } else { set.clone() };
                Split { set: set.clone(), table: SplitTable::new(&shape, &side) }
            })
            .collect();
        if splits.is_empty() {
            return Ok(PartitionResult {
                bound: RankBound::exact(Rank::Infinite, "no admissible splits and F is outside the ideal"),
                pieces: None,
                witness: None,
            });
        }
        let (trivial_gi, trivial) = splits
            .iter()
            .enumerate()
            .min_by_key(|(_, s)| s.table.side_dim)
            .map(|(i, s)| (i, s.table.side_dim))
            .unwrap();
        let mut search = Search {
            a: &a,
            target: target.clone(),
            splits,
            values: a.search_values(),
            budget,
            used: 0,
        };
        let mut found = None;
        let mut refuted_below = 1usize;
        for r in 1..trivial {
            let mut chosen = Vec::new();
            match search.rec(0, r, &base, &mut chosen) {
                Step::Found(c) => {
                    found = Some(c);
                    break;
                }
                Step::Continue => refuted_below = r + 1,
                Step::Stop => break,
            }
        }
        let complete = found.is_some() || refuted_below == trivial;
        let mut trace = Vec::new();
        let choice = match found {
            Some(c) => {
                trace.push(format!("upper: subspace search, first success at {}", c.iter().map(|x| x.1.len()).sum::<usize>()));
                c
            }
            None => {
                let ident: Vec<Vec<_>> = (0..trivial)
                    .map(|i| {
                        let mut row = vec![a.zero(); trivial];
                        row[i] = a.one();
                        row
                    })
                    .collect();
                trace.push("upper: smallest side dimension".to_string());
                vec![(trivial_gi, ident)]
            }
        };
        let (pieces, witness) = build_certificate(&a, f, &search.splits, &ideal, &choice)?;
        if !verify_pieces(f, &pieces, &witness, modulus)? {
            return Err(Error::invalid("internal: partition certificate failed verification"));
        }
        let upper = pieces.len() as u64;
        let lower = if a.exhaustive() {
            if complete {
                trace.push(format!("lower: every level below {upper} refuted"));
                upper
            } else {
                trace.push(format!("lower: budget exhausted, levels below {refuted_below} refuted"));
                refuted_below as u64
            }
        } else if k == 2 && ideal.is_empty() {
            let rows: Vec<Vec<_>> = target.chunks(shape[1]).map(<[_]>::to_vec).collect();
            trace.push("lower: matrix rank".to_string());
            crate::linalg::rank(&a, &rows) as u64
        } else {
            trace.push("lower: F is outside the relative ideal".to_string());
            1
        };
        Ok(PartitionResult {
            bound: RankBound::bracket(Rank::Finite(lower.min(upper)), Rank::Finite(upper), trace),
            pieces: Some(pieces),
            witness: Some(witness),
        })
    })
}

/// Coefficients of `F(x, ·)` on block `i0`, as polynomials on the full block space.
fn slot_rows(f: &MultilinearForm, i0: usize) -> Vec<Poly> {
    let space = f.space();
    let poly = f.to_form();
    (0..space.dims[i0])
        .map(|j| poly.derivative(space.var(i0, j)).into_poly())
        .collect()
}

/// Maximal minors of a `rows × cols` polynomial matrix with `rows ≤ cols`.
fn maximal_minors(m: &[Vec<Poly>], field: crate::field::Field, nvars: usize) -> Result<Vec<Poly>> {
    let rows = m.len();
    let cols = m.first().map_or(0, |r| r.len());
    let mut out = Vec::new();
    for cs in (0..cols).combinations(rows) {
        out.push(det(m, &cs, field, nvars)?);
    }
    out.retain(|p| !p.is_zero());
    Ok(out)
}

fn det(m: &[Vec<Poly>], cols: &[usize], field: crate::field::Field, nvars: usize) -> Result<Poly> {
    if cols.is_empty() {
        return Ok(Poly::constant(field, nvars, field.one()));
    }
    let r = m.len() - cols.len();
    let mut acc = Poly::zero(field, nvars);
    for (k, &c) in cols.iter().enumerate() {
        if m[r][c].is_zero() {
            continue;
        }
        let rest: Vec<usize> = cols.iter().copied().filter(|&x| x != c).collect();
        let term = m[r][c].mul(&det(m, &rest, field, nvars)?)?;
        acc = if k % 2 == 0 { acc.add(&term)? } else { acc.sub(&term)? };
    }
    Ok(acc)
}

/// Geometric rank for one slot `i0`: the codimension, inside `Z(modulus)`,
/// of the points where `F(x, ·)` and the `G(x, ·)` with `i0` in the support
/// of `G` are linearly dependent.
fn geometric_rank_at(
    f: &MultilinearForm,
    modulus: Option<&MultilinearTower>,
    i0: usize,
    budget: u64,
) -> Result<(u64, String)> {
    let space: &BlockSpace = f.space();
    let n = space.total_vars();
    let field = f.field();
    let gens: Vec<Poly> = modulus
        .map(|t| {
            t.forms()
                .filter(|g| !g.is_zero())
                .map(|g| g.to_form().into_poly())
                .collect()
        })
        .unwrap_or_default();
    let mut rows = vec![slot_rows(f, i0)];
    if let Some(t) = modulus {
        for g in t.forms() {
            if g.support().contains(&i0) && !g.is_zero() {
                rows.push(slot_rows(g, i0));
            }
        }
    }
    let z = variety_dims(field, n, &gens, budget)?;
    if z.is_empty() {
        return Ok((0, "Z(modulus) is empty".to_string()));
    }
    if rows.len() > space.dims[i0] {
        return Ok((0, format!("more rows than dim V_{}", i0 + 1)));
    }
    let minors = maximal_minors(&rows, field, n)?;
    let mut all = gens.clone();
    all.extend(minors);
    let locus = variety_dims(field, n, &all, budget)?;
    let dim_locus = locus.dim.max(-1);
    let v = (z.dim - dim_locus).max(0) as u64;
    Ok((
        v,
        format!(
            "slot {}: dim Z = {}, dim locus = {} over {}",
            i0 + 1,
            z.dim,
            dim_locus,
            locus.field
        ),
    ))
}

/// `grk` of `F` relative to `modulus`, at slot `i0` or minimized over the support.
pub fn geometric_rank(
    f: &MultilinearForm,
    modulus: Option<&MultilinearTower>,
    i0: Option<usize>,
    budget: u64,
) -> Result<RankBound> {
    if let Some(t) = modulus {
        if t.space != *f.space() {
            return Err(Error::invalid("modulus tower lives on a different block space"));
        }
    }
    let slots: Vec<usize> = match i0 {
        Some(i) if !f.support().contains(&i) => {
            return Err(Error::invalid(format!("block {} is outside the support", i + 1)))
        }
        Some(i) => vec![i],
        None => f.support().to_vec(),
    };
    if slots.is_empty() {
        return Ok(RankBound::exact(Rank::Finite(0), "constant form"));
    }
    let mut best: Option<(u64, String)> = None;
    for i in slots {
        match geometric_rank_at(f, modulus, i, budget) {
            Ok(r) => {
                if best.as_ref().is_none_or(|b| r.0 < b.0) {
                    best = Some(r);
                }
            }
            Err(Error::BudgetExhausted(b)) => {
                return Ok(RankBound::bracket(
                    Rank::Finite(0),
                    Rank::Finite(f.space().total_vars() as u64),
                    vec![format!("Groebner budget {b} exhausted")],
                ))
            }
            Err(e) => return Err(e),
        }
    }
    let (v, note) = best.unwrap();
    Ok(RankBound::exact(Rank::Finite(v), note))
}

/// `min_{a ≠ 0} prk(Σ a_j F_j)` relative to `modulus`, all forms sharing
/// one support.
#[derive(Clone, Debug)]
pub struct CollectivePartition {
    pub bound: RankBound,
    pub combination: Option<Vec<crate::field::Scalar>>,
}

pub fn collective_partition_rank(
    forms: &[MultilinearForm],
    modulus: Option<&MultilinearTower>,
    budget: u64,
) -> Result<CollectivePartition> {
    let first = forms.first().ok_or_else(|| Error::invalid("no forms"))?;
    if forms
        .iter()
        .any(|f| f.support() != first.support() || f.space() != first.space())
    {
        return Err(Error::invalid("forms of a layer must share a support"));
    }
    let field = first.field();
    let mut lower = Rank::Infinite;
    let mut upper = Rank::Infinite;
    let mut best = None;
    let mut exact = field.is_finite();
    for a in super::projective_tuples(field, forms.len()) {
        let mut comb = MultilinearForm::zero(first.space().clone(), field, first.support().to_vec())?;
        for (f, c) in forms.iter().zip(&a) {
            if !c.is_zero() {
                comb = comb.add(&f.scale(c))?;
            }
        }
        let r = partition_rank(&comb, None, modulus, budget)?;
        if r.bound.lower < lower {
            lower = r.bound.lower;
        }
        if r.bound.upper < upper {
            upper = r.bound.upper;
            best = Some(a);
        }
        exact &= r.bound.exact;
        if upper == Rank::Finite(0) {
            break;
        }
    }
    let bound = if exact || lower == upper {
        RankBound::exact(upper, "minimum over all combinations")
    } else {
        RankBound::bracket(lower, upper, vec!["minimum of per-combination brackets".to_string()])
    };
    Ok(CollectivePartition {
        bound,
        combination: best,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::Field;
    use crate::multilinear::parse_multilinear;

    fn ml(src: &str, p: u32) -> MultilinearForm {
        parse_multilinear(src, Field::Prime(p)).unwrap()
    }

    #[test]
    fn partition_examples() {
        let f = ml("dims 2,2,2\nsupport {1,2,3}\n(1,1,1) = 1\n", 2);
        let r = partition_rank(&f, None, None, 100_000).unwrap();
        assert_eq!(r.bound.value(), Some(Rank::Finite(1)));
        let f = ml("dims 2,2,2\nsupport {1,2,3}\n(1,1,1) = 1\n(2,2,2) = 1\n", 2);
        let slice = SubsetCollection::slice(3);
        let r = partition_rank(&f, Some(&slice), None, 100_000).unwrap();
        assert_eq!(r.bound.value(), Some(Rank::Finite(2)));
        let z = ml("dims 2,2,2\nsupport {1,2,3}\n", 2);
        let r = partition_rank(&z, None, None, 100_000).unwrap();
        assert_eq!(r.bound.value(), Some(Rank::Finite(0)));
    }

    #[test]
    fn bilinear_rank_over_q() {
        let f = parse_multilinear(
            "dims 3,3\nsupport {1,2}\n(1,1) = 2\n(2,2) = 1/3\n(1,2) = 5\n",
            Field::Rational,
        )
        .unwrap();
        let r = partition_rank(&f, None, None, 100_000).unwrap();
        assert_eq!(r.bound.value(), Some(Rank::Finite(2)));
    }

    #[test]
    fn relative_partition_rank_drops() {
        let f = ml("dims 2,2,2\nsupport {1,2,3}\n(1,1,1) = 1\n(2,2,2) = 1\n", 2);
        let t = MultilinearTower::parse("dims 2,2,2\nlayer\nsupport {1}\n(1) = 1\n", Field::Prime(2)).unwrap();
        let r = partition_rank(&f, None, Some(&t), 100_000).unwrap();
        assert_eq!(r.bound.value(), Some(Rank::Finite(1)));
        let w = r.witness.unwrap();
        assert!(verify_pieces(&f, &r.pieces.unwrap(), &w, Some(&t)).unwrap());
        assert!(!w.is_zero());
    }

    #[test]
    fn geometric_examples() {
        let f = ml("dims 3,3\nsupport {1,2}\n(1,1) = 1\n(2,2) = 1\n", 3);
        assert_eq!(
            geometric_rank(&f, None, None, 10_000).unwrap().value(),
            Some(Rank::Finite(2))
        );
        let f = ml("dims 2,2,2\nsupport {1,2,3}\n(1,1,1) = 1\n", 2);
        assert_eq!(
            geometric_rank(&f, None, None, 10_000).unwrap().value(),
            Some(Rank::Finite(1))
        );
        let z = ml("dims 2,2,2\nsupport {1,2,3}\n", 2);
        assert_eq!(
            geometric_rank(&z, None, None, 10_000).unwrap().value(),
            Some(Rank::Finite(0))
        );
    }
}
