//! Buchberger's algorithm under grlex, dimensions of affine zero sets,
//! complete intersections and singular loci.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{Field, Scalar};
use crate::linalg::Arith;
use crate::monomial::Monomial;
use crate::poly::{Form, Poly};
use crate::with_arith;

/// Prime used when rational coefficients grow too large.
pub const FALLBACK_PRIME: u32 = 2_147_483_647;

/// Rational coefficients larger than this many bits abort the computation.
const SWELL_BITS: u64 = 512;

/// Default cap on the number of S-polynomial reductions.
pub const DEFAULT_GROEBNER_BUDGET: u64 = 20_000;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GroebnerBasis {
    pub field: Field,
    pub nvars: usize,
    /// Monic generators, sorted by increasing leading monomial.
    pub generators: Vec<Poly>,
    pub reduced: bool,
}

impl GroebnerBasis {
    pub fn is_unit(&self) -> bool {
        self.generators
            .iter()
            .any(|g| g.leading().is_some_and(|(m, _)| m.degree() == 0))
    }

    pub fn leading_monomials(&self) -> Vec<Monomial> {
        self.generators
            .iter()
            .filter_map(|g| g.leading().map(|t| t.0.clone()))
            .collect()
    }

    /// The remainder of `p` on division by the basis.
    pub fn normal_form(&self, p: &Poly) -> Result<Poly> {
        if p.field() != self.field {
            return Err(Error::FieldMismatch);
        }
        if p.nvars() != self.nvars {
            return Err(Error::AmbientMismatch(self.nvars, p.nvars()));
        }
        Ok(with_arith!(self.field, a => {
            let g: Vec<GPoly<_>> = self.generators.iter().map(|q| GPoly::from_poly(&a, q)).collect();
            let r = normal_form(&a, to_terms(&a, p), &g, None);
            from_terms(&a, self.nvars, &r)
        }))
    }

    pub fn contains(&self, p: &Poly) -> Result<bool> {
        Ok(self.normal_form(p)?.is_zero())
    }
}

type Terms<E> = Vec<(Monomial, E)>;

#[derive(Clone, Debug)]
struct GPoly<E> {
    terms: Terms<E>,
    sugar: u32,
}

impl<E: Clone> GPoly<E> {
    fn from_poly<A: Arith<E = E>>(a: &A, p: &Poly) -> Self {
        GPoly {
            terms: to_terms(a, p),
            sugar: p.total_degree().unwrap_or(0),
        }
    }

    fn lm(&self) -> &Monomial {
        &self.terms[0].0
    }
}

fn to_terms<A: Arith>(a: &A, p: &Poly) -> Terms<A::E> {
    p.terms().iter().map(|(m, c)| (m.clone(), a.from_scalar(c))).collect()
}

fn from_terms<A: Arith>(a: &A, n: usize, t: &Terms<A::E>) -> Poly {
    Poly::from_terms(a.field(), n, t.iter().map(|(m, c)| (m.clone(), a.to_scalar(c))))
}

/// `p - c * m * g`, both sorted decreasingly.
fn sub_mul<A: Arith>(a: &A, p: &[(Monomial, A::E)], c: &A::E, m: &Monomial, g: &[(Monomial, A::E)]) -> Terms<A::E> {
    let mut out = Vec::with_capacity(p.len() + g.len());
    let mut i = 0;
    let mut j = 0;
    let shifted = |k: usize| g[k].0.mul(m);
    let mut gj = if g.is_empty() { None } else { Some(shifted(0)) };
    while i < p.len() || gj.is_some() {
        match (p.get(i), &gj) {
            (Some((pm, pc)), Some(gm)) if pm == gm => {
                let v = a.sub(pc, &a.mul(c, &g[j].1));
                if !a.is_zero(&v) {
                    out.push((pm.clone(), v));
                }
                i += 1;
                j += 1;
                gj = (j < g.len()).then(|| shifted(j));
            }
            (Some((pm, pc)), Some(gm)) if pm > gm => {
                out.push((pm.clone(), pc.clone()));
                i += 1;
            }
            (_, Some(gm)) => {
                out.push((gm.clone(), a.neg(&a.mul(c, &g[j].1))));
                j += 1;
                gj = (j < g.len()).then(|| shifted(j));
            }
            (Some((pm, pc)), None) => {
                out.push((pm.clone(), pc.clone()));
                i += 1;
            }
            (None, None) => unreachable!(),
        }
    }
    out
}

fn make_monic<A: Arith>(a: &A, t: &mut Terms<A::E>) {
    if let Some((_, lc)) = t.first() {
        let inv = a.inv(lc);
        for (_, c) in t.iter_mut() {
            *c = a.mul(c, &inv);
        }
    }
}

/// Full reduction of `p` by monic `g`; `sugar` is updated when given.
fn normal_form<A: Arith>(a: &A, p: Terms<A::E>, g: &[GPoly<A::E>], sugar: Option<&mut u32>) -> Terms<A::E> {
    normal_form_capped(a, p, g, sugar, u64::MAX).expect("uncapped reduction")
}

/// Reduction that gives up once a coefficient exceeds `max_bits`.
fn normal_form_capped<A: Arith>(
    a: &A,
    mut p: Terms<A::E>,
    g: &[GPoly<A::E>],
    mut sugar: Option<&mut u32>,
    max_bits: u64,
) -> Option<Terms<A::E>> {
    let mut rem: Terms<A::E> = Vec::new();
    while !p.is_empty() {
        let (m, c) = p[0].clone();
        if a.bits(&c) > max_bits {
            return None;
        }
        match g.iter().find(|q| q.lm().divides(&m)) {
            Some(q) => {
                let shift = q.lm().quotient(&m);
                if let Some(s) = sugar.as_deref_mut() {
                    *s = (*s).max(q.sugar + shift.degree());
                }
                p = sub_mul(a, &p, &c, &shift, &q.terms);
            }
            None => {
                rem.push(p.remove(0));
            }
        }
    }
    Some(rem)
}

enum GbFailure {
    Budget(u64),
    Swell,
}

fn buchberger<A: Arith>(
    a: &A,
    input: Vec<Terms<A::E>>,
    budget: u64,
) -> std::result::Result<Vec<GPoly<A::E>>, GbFailure> {
    let mut g: Vec<GPoly<A::E>> = Vec::new();
    let mut pending: HashSet<(usize, usize)> = HashSet::new();
    let mut pairs: Vec<(u32, Monomial, usize, usize)> = Vec::new();
    let add = |g: &mut Vec<GPoly<A::E>>,
               pending: &mut HashSet<(usize, usize)>,
               pairs: &mut Vec<(u32, Monomial, usize, usize)>,
               mut t: Terms<A::E>,
               sugar: u32| {
        make_monic(a, &mut t);
        let k = g.len();
        g.push(GPoly { terms: t, sugar });
        for i in 0..k {
            let l = g[i].lm().lcm(g[k].lm());
            let s = (g[i].sugar + l.degree() - g[i].lm().degree()).max(g[k].sugar + l.degree() - g[k].lm().degree());
            pairs.push((s, l, i, k));
            pending.insert((i, k));
        }
    };
    for t in input {
        let mut sugar = t.first().map_or(0, |x| x.0.degree());
        let r = normal_form_capped(a, t, &g, Some(&mut sugar), SWELL_BITS).ok_or(GbFailure::Swell)?;
        if !r.is_empty() {
            add(&mut g, &mut pending, &mut pairs, r, sugar);
        }
    }
    let mut steps = 0u64;
    while !pairs.is_empty() {
        let best = (0..pairs.len())
            .min_by(|&x, &y| {
                (pairs[x].0, &pairs[x].1, pairs[x].2, pairs[x].3).cmp(&(
                    pairs[y].0,
                    &pairs[y].1,
                    pairs[y].2,
                    pairs[y].3,
                ))
            })
            .expect("nonempty");
        let (sugar, l, i, j) = pairs.swap_remove(best);
        pending.remove(&(i, j));
        if g[i].lm().is_coprime(g[j].lm()) {
            continue;
        }
        let chain = (0..g.len()).any(|k| {
            k != i
                && k != j
                && g[k].lm().divides(&l)
                && !pending.contains(&(i.min(k), i.max(k)))
                && !pending.contains(&(j.min(k), j.max(k)))
        });
        if chain {
            continue;
        }
        steps += 1;
        if steps > budget {
            return Err(GbFailure::Budget(budget));
        }
        let si = g[i].lm().quotient(&l);
        let sj = g[j].lm().quotient(&l);
        let one = a.one();
        let sp = sub_mul(
            a,
            &sub_mul(a, &[], &a.neg(&one), &si, &g[i].terms),
            &one,
            &sj,
            &g[j].terms,
        );
        let mut s = sugar;
        let r = normal_form_capped(a, sp, &g, Some(&mut s), SWELL_BITS).ok_or(GbFailure::Swell)?;
        if r.iter().any(|(_, c)| a.bits(c) > SWELL_BITS) {
            return Err(GbFailure::Swell);
        }
        if !r.is_empty() {
            add(&mut g, &mut pending, &mut pairs, r, s);
        }
    }
    Ok(g)
}

fn reduce_basis<A: Arith>(a: &A, g: Vec<GPoly<A::E>>) -> Vec<GPoly<A::E>> {
    let mut keep: Vec<GPoly<A::E>> = Vec::new();
    for (k, p) in g.iter().enumerate() {
        let redundant = g
            .iter()
            .enumerate()
            .any(|(j, q)| j != k && q.lm().divides(p.lm()) && (q.lm() != p.lm() || j < k));
        if !redundant {
            keep.push(p.clone());
        }
    }
    let mut out = Vec::new();
    for k in 0..keep.len() {
        let others: Vec<GPoly<A::E>> = keep
            .iter()
            .enumerate()
            .filter(|(j, _)| *j != k)
            .map(|(_, q)| q.clone())
            .collect();
        let head = keep[k].terms[0].clone();
        let tail = normal_form(a, keep[k].terms[1..].to_vec(), &others, None);
        let mut t = vec![head];
        t.extend(tail);
        make_monic(a, &mut t);
        out.push(GPoly {
            terms: t,
            sugar: keep[k].sugar,
        });
    }
    out.sort_by(|x, y| x.lm().cmp(y.lm()));
    out
}

fn check_polys(field: Field, nvars: usize, gens: &[Poly]) -> Result<()> {
    for g in gens {
        if g.field() != field {
            return Err(Error::FieldMismatch);
        }
        if g.nvars() != nvars {
            return Err(Error::AmbientMismatch(nvars, g.nvars()));
        }
    }
    Ok(())
}

/// The reduced Gröbner basis of `(gens)` under grlex. `budget` caps the
/// number of S-polynomial reductions.
pub fn groebner(field: Field, nvars: usize, gens: &[Poly], budget: u64) -> Result<GroebnerBasis> {
    check_polys(field, nvars, gens)?;
    let basis = with_arith!(field, a => {
        let input: Vec<_> = gens.iter().filter(|g| !g.is_zero()).map(|g| to_terms(&a, g)).collect();
        match buchberger(&a, input, budget) {
            Ok(g) => Ok(reduce_basis(&a, g).iter().map(|p| from_terms(&a, nvars, &p.terms)).collect::<Vec<_>>()),
            Err(GbFailure::Budget(b)) => Err(Error::BudgetExhausted(b)),
            Err(GbFailure::Swell) => Err(Error::invalid("rational coefficient growth exceeded the cap")),
        }
    })?;
    Ok(GroebnerBasis {
        field,
        nvars,
        generators: basis,
        reduced: true,
    })
}

/// Dimension data of an affine zero set over the algebraic closure.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VarietyDims {
    pub ambient: usize,
    /// `-1` for the empty set.
    pub dim: i64,
    pub codim: i64,
    /// The field the basis was computed over.
    pub field: Field,
}

impl VarietyDims {
    pub fn is_empty(&self) -> bool {
        self.dim < 0
    }
}

/// Largest set of variables containing the support of no leading monomial.
fn max_independent_set(n: usize, lms: &[Monomial]) -> usize {
    let masks: Vec<u64> = lms
        .iter()
        .map(|m| m.support().iter().fold(0u64, |acc, &v| acc | 1 << v))
        .collect();
    fn go(v: usize, n: usize, chosen: u64, size: usize, masks: &[u64], best: &mut usize) {
        if size + (n - v) <= *best {
            return;
        }
        if v == n {
            *best = size;
            return;
        }
        let with = chosen | 1 << v;
        if !masks.iter().any(|&m| m & with == m) {
            go(v + 1, n, with, size + 1, masks, best);
        }
        go(v + 1, n, chosen, size, masks, best);
    }
    let mut best = 0;
    go(0, n, 0, 0, &masks, &mut best);
    best
}

pub fn dimension(gb: &GroebnerBasis) -> VarietyDims {
    let n = gb.nvars;
    let dim = if gb.is_unit() {
        -1
    } else {
        max_independent_set(n, &gb.leading_monomials()) as i64
    };
    VarietyDims {
        ambient: n,
        dim,
        codim: n as i64 - dim,
        field: gb.field,
    }
}

/// Dimension of `Z(gens)`. Over `Q` the computation moves to
/// `F_{2^31-1}` when coefficients swell or the budget runs out; the
/// returned `field` records where it finished.
pub fn variety_dims(field: Field, nvars: usize, gens: &[Poly], budget: u64) -> Result<VarietyDims> {
    if nvars > 63 {
        return Err(Error::invalid("dimension computations support at most 63 variables"));
    }
    match groebner(field, nvars, gens, budget) {
        Ok(gb) => Ok(dimension(&gb)),
        Err(Error::FieldMismatch) => Err(Error::FieldMismatch),
        Err(e @ Error::AmbientMismatch(..)) => Err(e),
        Err(e) if field == Field::Rational => {
            let reduced: Result<Vec<Poly>> = gens.iter().map(|g| g.reduce_mod(FALLBACK_PRIME)).collect();
            let Ok(reduced) = reduced else { return Err(e) };
            let gb = groebner(Field::Prime(FALLBACK_PRIME), nvars, &reduced, budget)?;
            Ok(dimension(&gb))
        }
        Err(e) => Err(e),
    }
}

/// Whether `codim Z(forms) = #forms`.
pub fn complete_intersection_check(forms: &[Form], budget: u64) -> Result<bool> {
    let Some(first) = forms.first() else {
        return Ok(true);
    };
    let polys: Vec<Poly> = forms.iter().map(|f| f.poly().clone()).collect();
    let dims = variety_dims(first.field(), first.nvars(), &polys, budget)?;
    Ok(dims.codim == forms.len() as i64)
}

fn determinant(m: &[Vec<Poly>]) -> Poly {
    let k = m.len();
    let field = m[0][0].field();
    let n = m[0][0].nvars();
    if k == 1 {
        return m[0][0].clone();
    }
    let mut acc = Poly::zero(field, n);
    for c in 0..k {
        if m[0][c].is_zero() {
            continue;
        }
        let minor: Vec<Vec<Poly>> = m[1..]
            .iter()
            .map(|row| {
                row.iter()
                    .enumerate()
                    .filter(|(j, _)| *j != c)
                    .map(|(_, p)| p.clone())
                    .collect()
            })
            .collect();
        let term = m[0][c].mul(&determinant(&minor)).expect("same ring");
        acc = if c % 2 == 0 { acc.add(&term) } else { acc.sub(&term) }.expect("same ring");
    }
    acc
}

fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn go(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for v in start..n {
            cur.push(v);
            go(v + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(0, n, k, &mut Vec::new(), &mut out);
    out
}

/// The maximal minors of the Jacobian of `forms`, cutting out the locus
/// where their gradients are linearly dependent.
pub fn singular_locus_ideal(forms: &[Form]) -> Result<Vec<Poly>> {
    let Some(first) = forms.first() else {
        return Ok(Vec::new());
    };
    let n = first.nvars();
    for f in forms {
        if f.nvars() != n {
            return Err(Error::AmbientMismatch(n, f.nvars()));
        }
        if f.field() != first.field() {
            return Err(Error::FieldMismatch);
        }
    }
    let s = forms.len();
    if s > n {
        return Err(Error::invalid("more forms than variables"));
    }
    let jac: Vec<Vec<Poly>> = forms
        .iter()
        .map(|f| (0..n).map(|i| f.poly().derivative(i)).collect())
        .collect();
    let mut out: Vec<Poly> = Vec::new();
    for cols in combinations(n, s) {
        let sub: Vec<Vec<Poly>> = jac
            .iter()
            .map(|row| cols.iter().map(|&c| row[c].clone()).collect())
            .collect();
        let det = determinant(&sub);
        if !det.is_zero() && !out.contains(&det) {
            out.push(det);
        }
    }
    Ok(out)
}

/// Looks for `x ∈ F_p^n` with `f_i(x) = targets_i` by exhaustive search.
/// `Ok(None)` means no solution exists over the probe field; running out of
/// `budget` evaluations is an error.
pub fn surjectivity_probe(forms: &[Form], targets: &[Scalar], budget: u64) -> Result<Option<Vec<Scalar>>> {
    if forms.len() != targets.len() {
        return Err(Error::Dimension {
            expected: forms.len(),
            got: targets.len(),
        });
    }
    let Some(first) = forms.first() else {
        return Ok(Some(Vec::new()));
    };
    let field = first.field();
    let Field::Prime(p) = field else {
        return Err(Error::invalid("the surjectivity probe needs a finite field"));
    };
    let n = first.nvars();
    let total = (p as u128).checked_pow(n as u32).unwrap_or(u128::MAX);
    let mut digits = vec![0u32; n];
    for count in 0..total {
        if count as u64 >= budget {
            return Err(Error::BudgetExhausted(budget));
        }
        let x: Vec<Scalar> = digits.iter().map(|&v| field.from_u64(v as u64)).collect();
        let mut ok = true;
        for (f, t) in forms.iter().zip(targets) {
            if &f.eval(&x)? != t {
                ok = false;
                break;
            }
        }
        if ok {
            return Ok(Some(x));
        }
        for d in digits.iter_mut() {
            *d += 1;
            if *d < p {
                break;
            }
            *d = 0;
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::text::{parse_form, parse_poly};

    fn q() -> Field {
        Field::Rational
    }

    fn polys(src: &[&str], n: usize) -> Vec<Poly> {
        src.iter().map(|s| parse_poly(s, q(), n).unwrap()).collect()
    }

    fn forms(src: &[&str], n: usize, field: Field) -> Vec<Form> {
        src.iter().map(|s| parse_form(s, field, n).unwrap()).collect()
    }

    fn dims(src: &[&str], n: usize) -> i64 {
        variety_dims(q(), n, &polys(src, n), DEFAULT_GROEBNER_BUDGET)
            .unwrap()
            .dim
    }

    #[test]
    fn bases_of_small_ideals() {
        let gb = groebner(q(), 3, &polys(&["x1", "x2"], 3), 100).unwrap();
        let shown: Vec<String> = gb.generators.iter().map(|g| g.to_string()).collect();
        assert_eq!(shown, vec!["x2", "x1"]);
        assert!(groebner(q(), 3, &[], 100).unwrap().generators.is_empty());
        let gb = groebner(q(), 2, &polys(&["x1^2", "x1*x2 - x1"], 2), 100).unwrap();
        let shown: Vec<String> = gb.generators.iter().map(|g| g.to_string()).collect();
        assert_eq!(shown, vec!["x1*x2 - x1", "x1^2"]);
    }

    #[test]
    fn dimensions() {
        assert_eq!(dims(&["x1", "x2"], 3), 1);
        assert_eq!(dims(&["x1*x2"], 3), 2);
        assert_eq!(dims(&["x1*x2", "x3*x4"], 4), 2);
        assert_eq!(dims(&["x1 - 1", "x1"], 2), -1);
    }

    #[test]
    fn complete_intersections() {
        let b = DEFAULT_GROEBNER_BUDGET;
        assert!(complete_intersection_check(&forms(&["x1", "x2"], 3, q()), b).unwrap());
        assert!(!complete_intersection_check(&forms(&["x1", "x1^2"], 3, q()), b).unwrap());
        assert!(complete_intersection_check(&forms(&["x1*x2 + x3*x4", "x1*x3 - x2*x4"], 4, q()), b).unwrap());
    }

    #[test]
    fn singular_loci() {
        let s = singular_locus_ideal(&forms(&["x1*x2"], 2, q())).unwrap();
        let shown: Vec<String> = s.iter().map(|g| g.to_string()).collect();
        assert_eq!(shown, vec!["x2", "x1"]);
        let s = singular_locus_ideal(&forms(&["x1^2 + x2^2 + x3^2"], 3, q())).unwrap();
        assert_eq!(variety_dims(q(), 3, &s, 100).unwrap().codim, 3);
        let s = singular_locus_ideal(&forms(&["x1*x2*x3"], 3, q())).unwrap();
        assert_eq!(variety_dims(q(), 3, &s, 100).unwrap().codim, 2);
    }

    #[test]
    fn probes() {
        let f5 = Field::Prime(5);
        let fs = forms(&["x1*x2", "x3*x4"], 4, f5);
        let t = [f5.from_i64(1), f5.from_i64(2)];
        let x = surjectivity_probe(&fs, &t, 10_000).unwrap().unwrap();
        assert_eq!(fs[0].eval(&x).unwrap(), t[0]);
        assert_eq!(fs[1].eval(&x).unwrap(), t[1]);
        let none = surjectivity_probe(&forms(&["x1^2"], 1, f5), &[f5.from_i64(2)], 100).unwrap();
        assert!(none.is_none());
        assert!(matches!(surjectivity_probe(&fs, &t, 3), Err(Error::BudgetExhausted(3))));
    }

    #[test]
    fn budget_is_reported() {
        let p = polys(&["x1^3 - x2*x3^2", "x2^3 - x1*x3^2", "x3^3 - x1^2*x2"], 3);
        assert!(matches!(groebner(q(), 3, &p, 1), Err(Error::BudgetExhausted(1))));
    }
}
