//! Graded pieces `I_d` of homogeneous ideals and exact membership.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::field::Field;
use crate::linalg::{express, rref, Arith};
use crate::monomial::{monomials_of_degree, Monomial};
use crate::poly::{Form, Poly};
use crate::with_arith;

/// Dense coordinates on the degree-`d` forms in `n` variables, indexed in
/// decreasing grlex order.
#[derive(Clone, Debug)]
pub struct MonomialIndex {
    pub nvars: usize,
    pub degree: u32,
    monos: Vec<Monomial>,
    index: HashMap<Monomial, usize>,
}

impl MonomialIndex {
    pub fn new(nvars: usize, degree: u32) -> MonomialIndex {
        let monos = monomials_of_degree(nvars, degree);
        let index = monos.iter().cloned().enumerate().map(|(i, m)| (m, i)).collect();
        MonomialIndex {
            nvars,
            degree,
            monos,
            index,
        }
    }

    pub fn len(&self) -> usize {
        self.monos.len()
    }

    pub fn is_empty(&self) -> bool {
        self.monos.is_empty()
    }

    pub fn monomials(&self) -> &[Monomial] {
        &self.monos
    }

    pub fn position(&self, m: &Monomial) -> Option<usize> {
        self.index.get(m).copied()
    }

    pub fn to_dense<A: Arith>(&self, a: &A, p: &Poly) -> Vec<A::E> {
        let mut v = vec![a.zero(); self.len()];
        for (m, c) in p.terms() {
            v[self.index[m]] = a.from_scalar(c);
        }
        v
    }

    pub fn to_form<A: Arith>(&self, a: &A, v: &[A::E]) -> Form {
        let terms = self
            .monos
            .iter()
            .zip(v)
            .filter(|(_, c)| !a.is_zero(c))
            .map(|(m, c)| (m.clone(), a.to_scalar(c)));
        Form::new(Poly::from_terms(a.field(), self.nvars, terms), self.degree).expect("homogeneous by construction")
    }
}

/// A row-reduced basis of the degree-`d` piece of the ideal generated by `generators`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GradedPieceBasis {
    pub degree: u32,
    pub generators: Vec<Form>,
    pub basis: Vec<Form>,
}

impl GradedPieceBasis {
    pub fn dim(&self) -> usize {
        self.basis.len()
    }
}

fn check_ring(field: Field, nvars: usize, forms: &[Form]) -> Result<()> {
    for g in forms {
        if g.field() != field {
            return Err(Error::FieldMismatch);
        }
        if g.nvars() != nvars {
            return Err(Error::AmbientMismatch(nvars, g.nvars()));
        }
    }
    Ok(())
}

/// All products `m * g` with `m` a monomial and `deg(m g) = d`, as dense rows.
pub(crate) fn multiples<A: Arith>(
    a: &A,
    idx: &MonomialIndex,
    generators: &[Form],
) -> Vec<(usize, Monomial, Vec<A::E>)> {
    let mut out = Vec::new();
    for (k, g) in generators.iter().enumerate() {
        if g.degree() > idx.degree || g.is_zero() {
            continue;
        }
        for m in monomials_of_degree(idx.nvars, idx.degree - g.degree()) {
            let p = g.mul_term(&m, &a.field().one());
            out.push((k, m, idx.to_dense(a, &p)));
        }
    }
    out
}

pub fn graded_ideal_piece(field: Field, nvars: usize, generators: &[Form], d: u32) -> Result<GradedPieceBasis> {
    check_ring(field, nvars, generators)?;
    let idx = MonomialIndex::new(nvars, d);
    let basis = with_arith!(field, a => {
        let mut rows: Vec<_> = multiples(&a, &idx, generators).into_iter().map(|(_, _, v)| v).collect();
        let r = rref(&a, &mut rows).len();
        rows.truncate(r);
        rows.iter().map(|v| idx.to_form(&a, v)).collect()
    });
    Ok(GradedPieceBasis {
        degree: d,
        generators: generators.to_vec(),
        basis,
    })
}

/// Dense basis of `I_d` as an echelon structure, for repeated membership tests.
pub(crate) fn piece_echelon<A: Arith>(a: &A, idx: &MonomialIndex, generators: &[Form]) -> crate::linalg::Echelon<A> {
    let mut e = crate::linalg::Echelon::new(a.clone(), idx.len());
    for (_, _, v) in multiples(a, idx, generators) {
        e.insert(&v);
    }
    e
}

pub fn ideal_membership(f: &Form, generators: &[Form]) -> Result<bool> {
    check_ring(f.field(), f.nvars(), generators)?;
    if f.is_zero() {
        return Ok(true);
    }
    let idx = MonomialIndex::new(f.nvars(), f.degree());
    Ok(with_arith!(f.field(), a => {
        piece_echelon(&a, &idx, generators).contains(&idx.to_dense(&a, f))
    }))
}

/// Multipliers `h_k` with `f = Σ h_k g_k`, or `None` when `f ∉ (g)`.
pub fn ideal_cofactors(f: &Form, generators: &[Form]) -> Result<Option<Vec<Poly>>> {
    check_ring(f.field(), f.nvars(), generators)?;
    let idx = MonomialIndex::new(f.nvars(), f.degree());
    let field = f.field();
    Ok(with_arith!(field, a => {
        let mult = multiples(&a, &idx, generators);
        let vectors: Vec<_> = mult.iter().map(|(_, _, v)| v.clone()).collect();
        express(&a, &vectors, &idx.to_dense(&a, f)).map(|sol| {
            let mut h: Vec<Vec<(Monomial, crate::field::Scalar)>> = vec![Vec::new(); generators.len()];
            for ((k, m, _), c) in mult.iter().zip(&sol) {
                if !a.is_zero(c) {
                    h[*k].push((m.clone(), a.to_scalar(c)));
                }
            }
            h.into_iter()
                .map(|t| Poly::from_terms(field, f.nvars(), t))
                .collect()
        })
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::text::parse_form;

    fn forms(src: &[&str], n: usize) -> Vec<Form> {
        src.iter().map(|s| parse_form(s, Field::Rational, n).unwrap()).collect()
    }

    #[test]
    fn monomial_multiples_of_a_variable() {
        let b = graded_ideal_piece(Field::Rational, 2, &forms(&["x1"], 2), 2).unwrap();
        let shown: Vec<String> = b.basis.iter().map(|f| f.to_string()).collect();
        assert_eq!(shown, vec!["x1^2", "x1*x2"]);
    }

    #[test]
    fn zero_ideal_has_empty_piece() {
        let b = graded_ideal_piece(Field::Rational, 3, &[], 3).unwrap();
        assert_eq!(b.dim(), 0);
    }

    #[test]
    fn two_quadrics_span_two_dimensions() {
        let b = graded_ideal_piece(Field::Rational, 2, &forms(&["x1^2 + x2^2", "x1*x2"], 2), 2).unwrap();
        assert_eq!(b.dim(), 2);
    }

    #[test]
    fn membership_examples() {
        let f = forms(&["x1*x2", "x2^2", "x1*x2 + x3*x4"], 4);
        assert!(ideal_membership(&f[0], &forms(&["x1"], 4)).unwrap());
        assert!(!ideal_membership(&f[1], &forms(&["x1"], 4)).unwrap());
        assert!(ideal_membership(&f[2], &forms(&["x1", "x3"], 4)).unwrap());
    }

    #[test]
    fn cofactors_reconstruct() {
        let f = parse_form("x1*x2 + x3*x4", Field::Rational, 4).unwrap();
        let g = forms(&["x1", "x3"], 4);
        let h = ideal_cofactors(&f, &g).unwrap().unwrap();
        let mut acc = Poly::zero(Field::Rational, 4);
        for (hk, gk) in h.iter().zip(&g) {
            acc = acc.add(&hk.mul(gk.poly()).unwrap()).unwrap();
        }
        assert_eq!(&acc, f.poly());
    }
}
