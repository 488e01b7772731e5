//! Exact linear algebra, generic over a small [`Arith`] trait so that the
//! hot loops over `F_p` work on plain `u32` residues.

use std::fmt::Debug;
use std::hash::Hash;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::field::{inv_mod, Field, Scalar};

pub trait Arith: Clone + Send + Sync {
    type E: Clone + PartialEq + Eq + Hash + Debug + Send + Sync;

    fn field(&self) -> Field;
    fn zero(&self) -> Self::E;
    fn one(&self) -> Self::E;
    fn add(&self, a: &Self::E, b: &Self::E) -> Self::E;
    fn sub(&self, a: &Self::E, b: &Self::E) -> Self::E;
    fn mul(&self, a: &Self::E, b: &Self::E) -> Self::E;
    fn neg(&self, a: &Self::E) -> Self::E;
    /// Panics on zero.
    fn inv(&self, a: &Self::E) -> Self::E;
    fn is_zero(&self, a: &Self::E) -> bool;
    fn from_i64(&self, v: i64) -> Self::E;
    fn from_scalar(&self, s: &Scalar) -> Self::E;
    fn to_scalar(&self, e: &Self::E) -> Scalar;
    /// Values tried for free entries by the subspace searches.
    fn search_values(&self) -> Vec<Self::E>;
    /// Whether [`Arith::search_values`] is the whole field.
    fn exhaustive(&self) -> bool;
    /// Storage size of a coefficient in bits, used to detect coefficient swell.
    fn bits(&self, _e: &Self::E) -> u64 {
        0
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ModP {
    pub p: u32,
}

impl ModP {
    pub fn new(p: u32) -> ModP {
        ModP { p }
    }
}

impl Arith for ModP {
    type E = u32;

    fn field(&self) -> Field {
        Field::Prime(self.p)
    }
    #[inline]
    fn zero(&self) -> u32 {
        0
    }
    #[inline]
    fn one(&self) -> u32 {
        1
    }
    #[inline]
    fn add(&self, a: &u32, b: &u32) -> u32 {
        ((*a as u64 + *b as u64) % self.p as u64) as u32
    }
    #[inline]
    fn sub(&self, a: &u32, b: &u32) -> u32 {
        ((*a as u64 + self.p as u64 - *b as u64) % self.p as u64) as u32
    }
    #[inline]
    fn mul(&self, a: &u32, b: &u32) -> u32 {
        ((*a as u64 * *b as u64) % self.p as u64) as u32
    }
    #[inline]
    fn neg(&self, a: &u32) -> u32 {
        if *a == 0 {
            0
        } else {
            self.p - a
        }
    }
    fn inv(&self, a: &u32) -> u32 {
        assert!(*a != 0, "inverse of zero");
        inv_mod(*a as u64, self.p as u64) as u32
    }
    #[inline]
    fn is_zero(&self, a: &u32) -> bool {
        *a == 0
    }
    fn from_i64(&self, v: i64) -> u32 {
        v.rem_euclid(self.p as i64) as u32
    }
    fn from_scalar(&self, s: &Scalar) -> u32 {
        s.reduce_mod(self.p)
            .and_then(|r| r.residue())
            .expect("scalar not representable mod p")
    }
    fn to_scalar(&self, e: &u32) -> Scalar {
        Scalar::Mod {
            value: *e,
            modulus: self.p,
        }
    }
    fn search_values(&self) -> Vec<u32> {
        (0..self.p).collect()
    }
    fn exhaustive(&self) -> bool {
        true
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Rationals;

impl Arith for Rationals {
    type E = BigRational;

    fn field(&self) -> Field {
        Field::Rational
    }
    fn zero(&self) -> BigRational {
        BigRational::zero()
    }
    fn one(&self) -> BigRational {
        BigRational::one()
    }
    fn add(&self, a: &BigRational, b: &BigRational) -> BigRational {
        a + b
    }
    fn sub(&self, a: &BigRational, b: &BigRational) -> BigRational {
        a - b
    }
    fn mul(&self, a: &BigRational, b: &BigRational) -> BigRational {
        a * b
    }
    fn neg(&self, a: &BigRational) -> BigRational {
        -a
    }
    fn inv(&self, a: &BigRational) -> BigRational {
        assert!(!a.is_zero(), "inverse of zero");
        a.recip()
    }
    fn is_zero(&self, a: &BigRational) -> bool {
        a.is_zero()
    }
    fn from_i64(&self, v: i64) -> BigRational {
        BigRational::from_integer(BigInt::from(v))
    }
    fn from_scalar(&self, s: &Scalar) -> BigRational {
        s.as_rational().expect("rational scalar").clone()
    }
    fn to_scalar(&self, e: &BigRational) -> Scalar {
        Scalar::Rat(e.clone())
    }
    fn search_values(&self) -> Vec<BigRational> {
        vec![self.from_i64(0), self.from_i64(1), self.from_i64(-1)]
    }
    fn exhaustive(&self) -> bool {
        false
    }
    fn bits(&self, e: &BigRational) -> u64 {
        e.numer().bits() + e.denom().bits()
    }
}

/// Runs `$body` with `$a` bound to the [`Arith`] for `$field`.
#[macro_export]
macro_rules! with_arith {
    ($field:expr, $a:ident => $body:expr) => {
        match $field {
            $crate::field::Field::Prime(p) => {
                let $a = $crate::linalg::ModP::new(p);
                $body
            }
            $crate::field::Field::Rational => {
                let $a = $crate::linalg::Rationals;
                $body
            }
        }
    };
}

/// In-place reduced row echelon form; returns the pivot columns.
pub fn rref<A: Arith>(a: &A, m: &mut [Vec<A::E>]) -> Vec<usize> {
    let rows = m.len();
    let cols = m.first().map_or(0, |r| r.len());
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(k) = (r..rows).find(|&k| !a.is_zero(&m[k][c])) else {
            continue;
        };
        m.swap(r, k);
        let inv = a.inv(&m[r][c]);
        for x in m[r].iter_mut() {
            *x = a.mul(x, &inv);
        }
        for k in 0..rows {
            if k == r || a.is_zero(&m[k][c]) {
                continue;
            }
            let factor = m[k][c].clone();
            let (pivot_row, other) = if k < r {
                let (lo, hi) = m.split_at_mut(r);
                (&hi[0], &mut lo[k])
            } else {
                let (lo, hi) = m.split_at_mut(k);
                (&lo[r], &mut hi[0])
            };
            for j in c..cols {
                if !a.is_zero(&pivot_row[j]) {
                    other[j] = a.sub(&other[j], &a.mul(&factor, &pivot_row[j]));
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    pivots
}

pub fn rank<A: Arith>(a: &A, m: &[Vec<A::E>]) -> usize {
    let mut m = m.to_vec();
    rref(a, &mut m).len()
}

/// Coefficients `c` with `Σ c_k vectors[k] = target`, if any (free unknowns set to zero).
pub fn express<A: Arith>(a: &A, vectors: &[Vec<A::E>], target: &[A::E]) -> Option<Vec<A::E>> {
    let k = vectors.len();
    let dim = target.len();
    let mut m: Vec<Vec<A::E>> = (0..dim)
        .map(|i| {
            let mut row: Vec<A::E> = vectors.iter().map(|v| v[i].clone()).collect();
            row.push(target[i].clone());
            row
        })
        .collect();
    let pivots = rref(a, &mut m);
    if pivots.last() == Some(&k) {
        return None;
    }
    let mut sol = vec![a.zero(); k];
    for (r, &c) in pivots.iter().enumerate() {
        sol[c] = m[r][k].clone();
    }
    Some(sol)
}

/// An incrementally built echelon basis supporting fast span membership.
#[derive(Clone, Debug)]
pub struct Echelon<A: Arith> {
    arith: A,
    dim: usize,
    rows: Vec<(usize, Vec<A::E>)>,
}

impl<A: Arith> Echelon<A> {
    pub fn new(arith: A, dim: usize) -> Self {
        Echelon {
            arith,
            dim,
            rows: Vec::new(),
        }
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Reduces `v` against the basis, leaving a vector with zeros in every pivot column.
    pub fn reduce(&self, v: &mut [A::E]) {
        let a = &self.arith;
        for (p, row) in &self.rows {
            if a.is_zero(&v[*p]) {
                continue;
            }
            let f = v[*p].clone();
            for j in *p..self.dim {
                if !a.is_zero(&row[j]) {
                    v[j] = a.sub(&v[j], &a.mul(&f, &row[j]));
                }
            }
        }
    }

    pub fn contains(&self, v: &[A::E]) -> bool {
        let mut w = v.to_vec();
        self.reduce(&mut w);
        w.iter().all(|x| self.arith.is_zero(x))
    }

    /// Adds `v`; returns false when it was already in the span.
    pub fn insert(&mut self, v: &[A::E]) -> bool {
        let a = self.arith.clone();
        let mut w = v.to_vec();
        self.reduce(&mut w);
        let Some(p) = w.iter().position(|x| !a.is_zero(x)) else {
            return false;
        };
        let inv = a.inv(&w[p]);
        for x in w.iter_mut() {
            *x = a.mul(x, &inv);
        }
        let pos = self.rows.partition_point(|(q, _)| *q < p);
        self.rows.insert(pos, (p, w));
        true
    }

    pub fn basis(&self) -> impl Iterator<Item = &Vec<A::E>> {
        self.rows.iter().map(|(_, r)| r)
    }
}

fn to_arith<A: Arith>(a: &A, m: &[Vec<Scalar>]) -> Vec<Vec<A::E>> {
    m.iter().map(|r| r.iter().map(|s| a.from_scalar(s)).collect()).collect()
}

/// Rank of a matrix of scalars from one field.
pub fn exact_rank(m: &[Vec<Scalar>]) -> usize {
    let Some(field) = m.iter().flatten().next().map(|s| s.field()) else {
        return 0;
    };
    with_arith!(field, a => rank(&a, &to_arith(&a, m)))
}

/// Reduced row echelon form of a scalar matrix, zero rows dropped.
pub fn exact_rref(m: &[Vec<Scalar>]) -> Vec<Vec<Scalar>> {
    let Some(field) = m.iter().flatten().next().map(|s| s.field()) else {
        return Vec::new();
    };
    with_arith!(field, a => {
        let mut w = to_arith(&a, m);
        let r = rref(&a, &mut w).len();
        w.truncate(r);
        w.iter().map(|row| row.iter().map(|e| a.to_scalar(e)).collect()).collect()
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(rows: &[&[i64]]) -> Vec<Vec<Scalar>> {
        rows.iter()
            .map(|r| r.iter().map(|&v| Field::Rational.from_i64(v)).collect())
            .collect()
    }

    #[test]
    fn identity_zero_and_proportional() {
        assert_eq!(exact_rank(&q(&[&[1, 0, 0], &[0, 1, 0], &[0, 0, 1]])), 3);
        assert_eq!(exact_rank(&q(&[&[0, 0], &[0, 0]])), 0);
        assert_eq!(exact_rank(&q(&[&[1, 2], &[2, 4]])), 1);
    }

    #[test]
    fn rank_drops_mod_a_bad_prime() {
        let m = [vec![1, 2], vec![3, 1]];
        let a = ModP::new(5);
        let mp: Vec<Vec<u32>> = m.iter().map(|r| r.iter().map(|&v| a.from_i64(v)).collect()).collect();
        assert_eq!(rank(&a, &mp), 1);
        let b = ModP::new(7);
        let mp: Vec<Vec<u32>> = m.iter().map(|r| r.iter().map(|&v| b.from_i64(v)).collect()).collect();
        assert_eq!(rank(&b, &mp), 2);
    }

    #[test]
    fn express_solves_consistent_systems() {
        let a = ModP::new(7);
        let v = vec![vec![1, 0, 1], vec![0, 1, 1]];
        let sol = express(&a, &v, &[2, 3, 5]).unwrap();
        assert_eq!(sol, vec![2, 3]);
        assert!(express(&a, &v, &[1, 1, 0]).is_none());
    }

    #[test]
    fn echelon_membership() {
        let mut e = Echelon::new(Rationals, 3);
        let r = |v: &[i64]| v.iter().map(|&x| Rationals.from_i64(x)).collect::<Vec<_>>();
        assert!(e.insert(&r(&[1, 1, 0])));
        assert!(e.insert(&r(&[0, 1, 1])));
        assert!(!e.insert(&r(&[1, 2, 1])));
        assert!(e.contains(&r(&[1, 0, -1])));
        assert!(!e.contains(&r(&[0, 0, 1])));
        assert_eq!(e.rank(), 2);
    }
}
