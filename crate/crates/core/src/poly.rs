//! Sparse polynomials over a [`Field`] and the homogeneous [`Form`] wrapper.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::Deref;

use crate::error::{Error, Result};
use crate::field::{Field, Scalar};
use crate::monomial::Monomial;

/// A sparse polynomial with terms stored in strictly decreasing grlex order.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Poly {
    field: Field,
    nvars: usize,
    terms: Vec<(Monomial, Scalar)>,
}

impl Poly {
    pub fn zero(field: Field, nvars: usize) -> Poly {
        Poly {
            field,
            nvars,
            terms: Vec::new(),
        }
    }

    pub fn constant(field: Field, nvars: usize, c: Scalar) -> Poly {
        Poly::from_terms(field, nvars, [(Monomial::one(nvars), c)])
    }

    /// The variable `x_{i+1}`.
    pub fn var(field: Field, nvars: usize, i: usize) -> Poly {
        Poly {
            field,
            nvars,
            terms: vec![(Monomial::var(nvars, i), field.one())],
        }
    }

    pub fn monomial(field: Field, m: Monomial, c: Scalar) -> Poly {
        let nvars = m.nvars();
        Poly::from_terms(field, nvars, [(m, c)])
    }

    /// Collects like terms, drops zeros and sorts.
    pub fn from_terms(field: Field, nvars: usize, terms: impl IntoIterator<Item = (Monomial, Scalar)>) -> Poly {
        let mut acc: BTreeMap<Monomial, Scalar> = BTreeMap::new();
        for (m, c) in terms {
            debug_assert_eq!(m.nvars(), nvars);
            debug_assert_eq!(c.field(), field);
            match acc.get_mut(&m) {
                Some(v) => *v = &*v + &c,
                None => {
                    acc.insert(m, c);
                }
            }
        }
        let terms = acc.into_iter().rev().filter(|(_, c)| !c.is_zero()).collect();
        Poly { field, nvars, terms }
    }

    pub fn field(&self) -> Field {
        self.field
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn terms(&self) -> &[(Monomial, Scalar)] {
        &self.terms
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

    pub fn coeff(&self, m: &Monomial) -> Scalar {
        self.terms
            .binary_search_by(|(t, _)| m.cmp(t))
            .map(|i| self.terms[i].1.clone())
            .unwrap_or_else(|_| self.field.zero())
    }

    pub fn leading(&self) -> Option<&(Monomial, Scalar)> {
        self.terms.first()
    }

    /// Largest total degree, `None` for the zero polynomial.
    pub fn total_degree(&self) -> Option<u32> {
        self.terms.iter().map(|(m, _)| m.degree()).max()
    }

    /// The common degree of all terms, if homogeneous and nonzero.
    pub fn homogeneous_degree(&self) -> Option<u32> {
        let d = self.terms.first()?.0.degree();
        self.terms.iter().all(|(m, _)| m.degree() == d).then_some(d)
    }

    fn check(&self, other: &Poly) -> Result<()> {
        if self.field != other.field {
            return Err(Error::FieldMismatch);
        }
        if self.nvars != other.nvars {
            return Err(Error::AmbientMismatch(self.nvars, other.nvars));
        }
        Ok(())
    }

    pub fn add(&self, other: &Poly) -> Result<Poly> {
        self.check(other)?;
        Ok(self.merge(other, false))
    }

    pub fn sub(&self, other: &Poly) -> Result<Poly> {
        self.check(other)?;
        Ok(self.merge(other, true))
    }

    fn merge(&self, other: &Poly, negate: bool) -> Poly {
        let mut out = Vec::with_capacity(self.terms.len() + other.terms.len());
        let (mut i, mut j) = (0, 0);
        let sign = |c: &Scalar| if negate { -c } else { c.clone() };
        while i < self.terms.len() && j < other.terms.len() {
            let (ma, ca) = &self.terms[i];
            let (mb, cb) = &other.terms[j];
            match ma.cmp(mb) {
                std::cmp::Ordering::Greater => {
                    out.push((ma.clone(), ca.clone()));
                    i += 1;
                }
                std::cmp::Ordering::Less => {
                    out.push((mb.clone(), sign(cb)));
                    j += 1;
                }
                std::cmp::Ordering::Equal => {
                    let c = ca + &sign(cb);
                    if !c.is_zero() {
                        out.push((ma.clone(), c));
                    }
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend(self.terms[i..].iter().cloned());
        out.extend(other.terms[j..].iter().map(|(m, c)| (m.clone(), sign(c))));
        Poly {
            field: self.field,
            nvars: self.nvars,
            terms: out,
        }
    }

    pub fn neg(&self) -> Poly {
        Poly {
            field: self.field,
            nvars: self.nvars,
            terms: self.terms.iter().map(|(m, c)| (m.clone(), -c)).collect(),
        }
    }

    pub fn scale(&self, c: &Scalar) -> Poly {
        if c.is_zero() {
            return Poly::zero(self.field, self.nvars);
        }
        Poly {
            field: self.field,
            nvars: self.nvars,
            terms: self.terms.iter().map(|(m, a)| (m.clone(), a * c)).collect(),
        }
    }

    /// Multiplication by the term `c * m`; order is preserved since grlex is a monomial order.
    pub fn mul_term(&self, m: &Monomial, c: &Scalar) -> Poly {
        if c.is_zero() {
            return Poly::zero(self.field, self.nvars);
        }
        Poly {
            field: self.field,
            nvars: self.nvars,
            terms: self.terms.iter().map(|(t, a)| (t.mul(m), a * c)).collect(),
        }
    }

    pub fn mul(&self, other: &Poly) -> Result<Poly> {
        self.check(other)?;
        let mut acc: BTreeMap<Monomial, Scalar> = BTreeMap::new();
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                let m = ma.mul(mb);
                let c = ca * cb;
                match acc.get_mut(&m) {
                    Some(v) => *v = &*v + &c,
                    None => {
                        acc.insert(m, c);
                    }
                }
            }
        }
        Ok(Poly {
            field: self.field,
            nvars: self.nvars,
            terms: acc.into_iter().rev().filter(|(_, c)| !c.is_zero()).collect(),
        })
    }

    pub fn pow(&self, e: u32) -> Poly {
        let mut acc = Poly::constant(self.field, self.nvars, self.field.one());
        for _ in 0..e {
            acc = acc.mul(self).expect("same ring");
        }
        acc
    }

    /// Value at a point of `field^n`.
    pub fn eval(&self, point: &[Scalar]) -> Result<Scalar> {
        if point.len() != self.nvars {
            return Err(Error::Dimension {
                expected: self.nvars,
                got: point.len(),
            });
        }
        let mut acc = self.field.zero();
        for (m, c) in &self.terms {
            let mut t = c.clone();
            for (i, &e) in m.exps().iter().enumerate() {
                if e > 0 {
                    t = &t * &point[i].pow(e as u32);
                }
            }
            acc = &acc + &t;
        }
        Ok(acc)
    }

    /// Substitutes `x_i -> images[i]`; all images live in one common ring.
    pub fn substitute(&self, images: &[Poly]) -> Result<Poly> {
        if images.len() != self.nvars {
            return Err(Error::Dimension {
                expected: self.nvars,
                got: images.len(),
            });
        }
        let target = images.first().map(|p| p.nvars).unwrap_or(0);
        let mut out = Poly::zero(self.field, target);
        let mut powers: Vec<Vec<Poly>> = images
            .iter()
            .map(|p| vec![Poly::constant(self.field, target, self.field.one()), p.clone()])
            .collect();
        for (m, c) in &self.terms {
            let mut t = Poly::constant(self.field, target, c.clone());
            for (i, &e) in m.exps().iter().enumerate() {
                if e == 0 {
                    continue;
                }
                while powers[i].len() <= e as usize {
                    let next = powers[i].last().unwrap().mul(&images[i])?;
                    powers[i].push(next);
                }
                t = t.mul(&powers[i][e as usize])?;
            }
            out = out.add(&t)?;
        }
        Ok(out)
    }

    /// Partial derivative with respect to `x_{i+1}`.
    pub fn derivative(&self, i: usize) -> Poly {
        let terms = self.terms.iter().filter_map(|(m, c)| {
            let e = m.exp(i);
            if e == 0 {
                return None;
            }
            let mut exps = m.exps().to_vec();
            exps[i] -= 1;
            Some((Monomial::new(exps), c * &self.field.from_i64(e as i64)))
        });
        Poly::from_terms(self.field, self.nvars, terms)
    }

    /// Divides by the leading coefficient.
    pub fn monic(&self) -> Poly {
        match self.terms.first() {
            None => self.clone(),
            Some((_, c)) => self.scale(&c.inv().expect("nonzero leading coefficient")),
        }
    }

    /// Image in `F_p`; fails when `p` divides a denominator.
    pub fn reduce_mod(&self, p: u32) -> Result<Poly> {
        let field = Field::prime(p as u64)?;
        let mut terms = Vec::with_capacity(self.terms.len());
        for (m, c) in &self.terms {
            let r = c
                .reduce_mod(p)
                .ok_or_else(|| Error::invalid(format!("coefficient {c} is not {p}-integral")))?;
            terms.push((m.clone(), r));
        }
        Ok(Poly::from_terms(field, self.nvars, terms))
    }

    /// Reinterprets integer-valued coefficients in another field.
    pub fn to_field(&self, field: Field) -> Result<Poly> {
        if field == self.field {
            return Ok(self.clone());
        }
        match field {
            Field::Prime(p) => self.reduce_mod(p),
            Field::Rational => {
                let terms = self
                    .terms
                    .iter()
                    .map(|(m, c)| (m.clone(), Field::Rational.from_u64(c.residue().unwrap_or(0) as u64)));
                Ok(Poly::from_terms(field, self.nvars, terms))
            }
        }
    }

    /// Embeds into `nvars` variables, sending `x_i` to `x_{map[i]}`.
    pub fn relabel(&self, nvars: usize, map: &[usize]) -> Poly {
        let terms = self.terms.iter().map(|(m, c)| {
            let mut exps = vec![0u16; nvars];
            for (i, &e) in m.exps().iter().enumerate() {
                exps[map[i]] += e;
            }
            (Monomial::new(exps), c.clone())
        });
        Poly::from_terms(self.field, nvars, terms)
    }

    /// Indices of variables that actually occur.
    pub fn variables(&self) -> Vec<usize> {
        let mut used = vec![false; self.nvars];
        for (m, _) in &self.terms {
            for i in m.support() {
                used[i] = true;
            }
        }
        (0..self.nvars).filter(|&i| used[i]).collect()
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", crate::text::format_poly(self))
    }
}

/// A homogeneous polynomial of a fixed degree; the zero form keeps its degree.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Form {
    poly: Poly,
    degree: u32,
}

impl Form {
    pub fn new(poly: Poly, degree: u32) -> Result<Form> {
        if poly.terms.iter().any(|(m, _)| m.degree() != degree) {
            return Err(Error::Inhomogeneous);
        }
        Ok(Form { poly, degree })
    }

    /// Degree is read off the terms; the zero polynomial is rejected.
    pub fn from_poly(poly: Poly) -> Result<Form> {
        if poly.is_zero() {
            return Err(Error::invalid("the zero polynomial has no degree"));
        }
        let degree = poly.homogeneous_degree().ok_or(Error::Inhomogeneous)?;
        Ok(Form { poly, degree })
    }

    pub fn zero(field: Field, nvars: usize, degree: u32) -> Form {
        Form {
            poly: Poly::zero(field, nvars),
            degree,
        }
    }

    pub fn var(field: Field, nvars: usize, i: usize) -> Form {
        Form {
            poly: Poly::var(field, nvars, i),
            degree: 1,
        }
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn poly(&self) -> &Poly {
        &self.poly
    }

    pub fn into_poly(self) -> Poly {
        self.poly
    }

    pub fn add(&self, other: &Form) -> Result<Form> {
        self.same_degree(other)?;
        Ok(Form {
            poly: self.poly.add(&other.poly)?,
            degree: self.degree,
        })
    }

    pub fn sub(&self, other: &Form) -> Result<Form> {
        self.same_degree(other)?;
        Ok(Form {
            poly: self.poly.sub(&other.poly)?,
            degree: self.degree,
        })
    }

    pub fn mul(&self, other: &Form) -> Result<Form> {
        Ok(Form {
            poly: self.poly.mul(&other.poly)?,
            degree: self.degree + other.degree,
        })
    }

    pub fn scale(&self, c: &Scalar) -> Form {
        Form {
            poly: self.poly.scale(c),
            degree: self.degree,
        }
    }

    pub fn neg(&self) -> Form {
        Form {
            poly: self.poly.neg(),
            degree: self.degree,
        }
    }

    pub fn derivative(&self, i: usize) -> Form {
        Form {
            poly: self.poly.derivative(i),
            degree: self.degree.saturating_sub(1),
        }
    }

    pub fn reduce_mod(&self, p: u32) -> Result<Form> {
        Ok(Form {
            poly: self.poly.reduce_mod(p)?,
            degree: self.degree,
        })
    }

    pub fn to_field(&self, field: Field) -> Result<Form> {
        Ok(Form {
            poly: self.poly.to_field(field)?,
            degree: self.degree,
        })
    }

    pub fn relabel(&self, nvars: usize, map: &[usize]) -> Form {
        Form {
            poly: self.poly.relabel(nvars, map),
            degree: self.degree,
        }
    }

    /// Composition with a linear substitution; the images must be linear forms.
    pub fn substitute_linear(&self, images: &[Poly]) -> Result<Form> {
        if images.iter().any(|p| !p.is_zero() && p.homogeneous_degree() != Some(1)) {
            return Err(Error::invalid("substitution images must be linear forms"));
        }
        Ok(Form {
            poly: self.poly.substitute(images)?,
            degree: self.degree,
        })
    }

    fn same_degree(&self, other: &Form) -> Result<()> {
        if self.degree != other.degree {
            return Err(Error::DegreeMismatch(self.degree, other.degree));
        }
        Ok(())
    }
}

impl Deref for Form {
    type Target = Poly;

    fn deref(&self) -> &Poly {
        &self.poly
    }
}

impl fmt::Display for Form {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.poly)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum FormOp {
    Add,
    Mul,
    Scale(Scalar),
}

/// Add, multiply or scale forms; `Scale` ignores `b`.
pub fn form_arith(a: &Form, b: &Form, op: FormOp) -> Result<Form> {
    match op {
        FormOp::Add => a.add(b),
        FormOp::Mul => a.mul(b),
        FormOp::Scale(c) => Ok(a.scale(&c)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::text::parse_form;

    fn q(s: &str, n: usize) -> Form {
        parse_form(s, Field::Rational, n).unwrap()
    }

    #[test]
    fn monomial_product() {
        let p = form_arith(&q("x1", 2), &q("x2", 2), FormOp::Mul).unwrap();
        assert_eq!(p, q("x1*x2", 2));
        assert_eq!(p.degree(), 2);
    }

    #[test]
    fn additive_inverse_is_zero_form() {
        let f = q("x1^2 - 3*x1*x2", 2);
        let z = form_arith(&f, &f.neg(), FormOp::Add).unwrap();
        assert!(z.is_zero());
        assert_eq!(z.degree(), 2);
    }

    #[test]
    fn difference_of_squares() {
        let p = q("x1 + x2", 2).mul(&q("x1 - x2", 2)).unwrap();
        assert_eq!(p, q("x1^2 - x2^2", 2));
    }

    #[test]
    fn mismatches_are_errors() {
        assert_eq!(q("x1", 2).add(&q("x1^2", 2)), Err(Error::DegreeMismatch(1, 2)));
        assert_eq!(q("x1", 2).mul(&q("x1", 3)), Err(Error::AmbientMismatch(2, 3)));
        assert!(Form::from_poly(q("x1", 2).poly().add(q("x2^2", 2).poly()).unwrap()).is_err());
    }

    #[test]
    fn substitution_and_derivative() {
        let f = q("x1*x2", 2);
        let one = Poly::var(Field::Rational, 1, 0);
        let r = f.substitute_linear(&[one.clone(), one]).unwrap();
        assert_eq!(r.to_string(), "x1^2");
        assert_eq!(q("x1^3*x2", 2).derivative(0), q("3*x1^2*x2", 2));
    }

    #[test]
    fn evaluation() {
        let f = q("x1^2 + 1/2*x2^2", 2);
        let qf = Field::Rational;
        assert_eq!(f.eval(&[qf.from_i64(2), qf.from_i64(2)]).unwrap(), qf.from_i64(6));
    }
}
