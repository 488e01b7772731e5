//! Subspace enumeration and the exact membership tests behind the strength search.

use std::collections::HashMap;
use std::ops::ControlFlow;

use itertools::Itertools;

use crate::linalg::{Arith, Echelon};
use crate::monomial::{monomials_of_degree, Monomial};

pub(crate) type Terms<E> = Vec<(Vec<u16>, E)>;

/// Pivot sets of size `r` in `0..n`, in colex order.
pub(crate) fn colex_combinations(n: usize, r: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur: Vec<usize> = (0..r).collect();
    if r > n {
        return out;
    }
    loop {
        out.push(cur.clone());
        // Advance: find the first position that can move up without colliding.
        let mut i = 0;
        loop {
            if i == r {
                return out;
            }
            let limit = if i + 1 < r { cur[i + 1] } else { n };
            if cur[i] + 1 < limit {
                cur[i] += 1;
                for (j, c) in cur.iter_mut().enumerate().take(i) {
                    *c = j;
                }
                break;
            }
            i += 1;
        }
    }
}

/// Number of `r`-dimensional subspaces of `F_q^n`, saturating.
#[cfg(test)]
pub(crate) fn gaussian_binomial(n: usize, r: usize, q: u64) -> u128 {
    if r > n {
        return 0;
    }
    let mut num: u128 = 1;
    let mut den: u128 = 1;
    for i in 0..r {
        let a = (q as u128).saturating_pow((n - i) as u32).saturating_sub(1);
        let b = (q as u128).saturating_pow((i + 1) as u32).saturating_sub(1);
        num = num.saturating_mul(a);
        den = den.saturating_mul(b);
        let g = gcd(num, den);
        num /= g;
        den /= g;
    }
    num / den
}

#[cfg(test)]
fn gcd(mut a: u128, mut b: u128) -> u128 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a.max(1)
}

/// Calls `visit` on every `r × n` matrix in reduced row echelon form whose
/// free entries range over `values` (which must start with zero). Matrices
/// come sparsest first: by the number of nonzero free entries, then pivot
/// sets in colex order, then the support of the free entries in lex order,
/// then the nonzero values as an odometer with the last entry fastest.
pub(crate) fn for_each_rref<E: Clone>(
    n: usize,
    r: usize,
    zero: &E,
    one: &E,
    values: &[E],
    visit: &mut dyn FnMut(&[Vec<E>], &[usize]) -> ControlFlow<()>,
) -> ControlFlow<()> {
    if r == 0 {
        return visit(&[], &[]);
    }
    let pivot_sets = colex_combinations(n, r);
    let slot_lists: Vec<Vec<(usize, usize)>> = pivot_sets
        .iter()
        .map(|pivots| {
            let mut slots = Vec::new();
            for (i, &p) in pivots.iter().enumerate() {
                for j in p + 1..n {
                    if !pivots.contains(&j) {
                        slots.push((i, j));
                    }
                }
            }
            slots
        })
        .collect();
    let max_slots = slot_lists.iter().map(Vec::len).max().unwrap_or(0);
    let nonzero = &values[1..];
    for weight in 0..=max_slots {
        if weight > 0 && nonzero.is_empty() {
            break;
        }
        for (pivots, slots) in pivot_sets.iter().zip(&slot_lists) {
            if slots.len() < weight {
                continue;
            }
            let mut m = vec![vec![zero.clone(); n]; r];
            for (i, &p) in pivots.iter().enumerate() {
                m[i][p] = one.clone();
            }
            for support in (0..slots.len()).combinations(weight) {
                let mut digits = vec![0usize; weight];
                loop {
                    for (k, &s) in support.iter().enumerate() {
                        let (i, j) = slots[s];
                        m[i][j] = nonzero[digits[k]].clone();
                    }
                    visit(&m, pivots)?;
                    let mut done = true;
                    let mut k = weight;
                    while k > 0 {
                        k -= 1;
                        digits[k] += 1;
                        if digits[k] < nonzero.len() {
                            done = false;
                            break;
                        }
                        digits[k] = 0;
                    }
                    if done {
                        break;
                    }
                }
                for &s in &support {
                    let (i, j) = slots[s];
                    m[i][j] = zero.clone();
                }
            }
        }
    }
    ControlFlow::Continue(())
}

/// The kernel of an RREF matrix `L` on `K^k0`, parametrized by the non-pivot
/// coordinates. Pivot coordinate `p` maps to `-Σ L[p][j] y_j`.
pub(crate) struct Kernel<E> {
    pub k: usize,
    /// For each coordinate of `K^k0`: the image as a sparse linear form in the kernel coordinates.
    pub images: Vec<Vec<(usize, E)>>,
    /// Kernel coordinate `j` is the original coordinate `free[j]`.
    pub free: Vec<usize>,
}

impl<E: Clone> Kernel<E> {
    pub fn new<A: Arith<E = E>>(a: &A, k0: usize, rows: &[Vec<E>], pivots: &[usize]) -> Self {
        let free: Vec<usize> = (0..k0).filter(|j| !pivots.contains(j)).collect();
        let pos: HashMap<usize, usize> = free.iter().enumerate().map(|(i, &j)| (j, i)).collect();
        let mut images = vec![Vec::new(); k0];
        for (&j, &i) in &pos {
            images[j] = vec![(i, a.one())];
        }
        for (row, &p) in rows.iter().zip(pivots) {
            images[p] = free
                .iter()
                .filter(|&&j| !a.is_zero(&row[j]))
                .map(|&j| (pos[&j], a.neg(&row[j])))
                .collect();
        }
        Kernel {
            k: free.len(),
            images,
            free,
        }
    }
}

/// Restriction of sparse polynomials along a [`Kernel`], accumulated in a
/// scratch table keyed by mixed-radix exponent encodings.
pub(crate) struct Restrictor<E> {
    radix: u64,
    powers: Vec<u64>,
    dense: Option<Vec<E>>,
    touched: Vec<u64>,
    sparse: HashMap<u64, E>,
}

const DENSE_LIMIT: u64 = 1 << 20;

impl<E: Clone> Restrictor<E> {
    pub fn new(k: usize, d: u32, zero: E) -> Self {
        let radix = d as u64 + 1;
        let powers: Vec<u64> = (0..k).map(|i| radix.saturating_pow(i as u32)).collect();
        let size = radix.checked_pow(k as u32).unwrap_or(u64::MAX);
        Restrictor {
            radix,
            powers,
            dense: (size <= DENSE_LIMIT).then(|| vec![zero; size as usize]),
            touched: Vec::new(),
            sparse: HashMap::new(),
        }
    }

    pub fn decode(&self, mut key: u64) -> Vec<u16> {
        let mut e = vec![0u16; self.powers.len()];
        for x in e.iter_mut() {
            *x = (key % self.radix) as u16;
            key /= self.radix;
        }
        e
    }

    fn accumulate<A: Arith<E = E>>(&mut self, a: &A, key: u64, c: &E) {
        match &mut self.dense {
            Some(t) => {
                let slot = &mut t[key as usize];
                if a.is_zero(slot) {
                    self.touched.push(key);
                }
                *slot = a.add(slot, c);
            }
            None => {
                let e = self.sparse.entry(key).or_insert_with(|| a.zero());
                *e = a.add(e, c);
            }
        }
    }

    /// Restricts `terms` along `ker` and returns the nonzero terms (key, coefficient).
    pub fn restrict<A: Arith<E = E>>(&mut self, a: &A, terms: &[(Vec<u16>, E)], ker: &Kernel<E>) -> Vec<(u64, E)> {
        let mut partial: Vec<(u64, E)> = Vec::new();
        let mut next: Vec<(u64, E)> = Vec::new();
        for (exps, c) in terms {
            partial.clear();
            partial.push((0, c.clone()));
            for (v, &e) in exps.iter().enumerate() {
                for _ in 0..e {
                    next.clear();
                    for (key, pc) in &partial {
                        for (j, lc) in &ker.images[v] {
                            next.push((key + self.powers[*j], a.mul(pc, lc)));
                        }
                    }
                    std::mem::swap(&mut partial, &mut next);
                }
            }
            for (key, pc) in &partial {
                self.accumulate(a, *key, pc);
            }
        }
        self.drain(a)
    }

    fn drain<A: Arith<E = E>>(&mut self, a: &A) -> Vec<(u64, E)> {
        let mut out = Vec::new();
        match &mut self.dense {
            Some(t) => {
                for &key in &self.touched {
                    let slot = &mut t[key as usize];
                    if !a.is_zero(slot) {
                        out.push((key, slot.clone()));
                        *slot = a.zero();
                    }
                }
                self.touched.clear();
            }
            None => {
                for (key, c) in self.sparse.drain() {
                    if !a.is_zero(&c) {
                        out.push((key, c));
                    }
                }
            }
        }
        out.sort_by_key(|t| t.0);
        out
    }

    /// Whether the restriction of `terms` vanishes identically.
    pub fn vanishes<A: Arith<E = E>>(&mut self, a: &A, terms: &[(Vec<u16>, E)], ker: &Kernel<E>) -> bool {
        self.restrict(a, terms, ker).is_empty()
    }
}

/// Dense coordinates for degree-`d` forms in `k` variables plus products by monomials.
pub(crate) struct DenseSpace {
    pub k: usize,
    pub d: u32,
    index: HashMap<Vec<u16>, usize>,
    pub monos: Vec<Monomial>,
}

impl DenseSpace {
    pub fn new(k: usize, d: u32) -> Self {
        let monos = monomials_of_degree(k, d);
        let index = monos.iter().enumerate().map(|(i, m)| (m.exps().to_vec(), i)).collect();
        DenseSpace { k, d, index, monos }
    }

    pub fn len(&self) -> usize {
        self.monos.len()
    }

    pub fn position(&self, exps: &[u16]) -> usize {
        self.index[exps]
    }

    /// Dense vectors of `g * m` for all monomials `m` of the complementary degree.
    pub fn multiples<A: Arith>(&self, a: &A, g: &[(Vec<u16>, A::E)], deg_g: u32) -> Vec<Vec<A::E>> {
        if deg_g > self.d {
            return Vec::new();
        }
        monomials_of_degree(self.k, self.d - deg_g)
            .iter()
            .map(|m| {
                let mut v = vec![a.zero(); self.len()];
                for (e, c) in g {
                    let prod: Vec<u16> = e.iter().zip(m.exps()).map(|(x, y)| x + y).collect();
                    let p = self.position(&prod);
                    v[p] = a.add(&v[p], c);
                }
                v
            })
            .collect()
    }

    pub fn to_dense<A: Arith>(&self, a: &A, terms: &[(Vec<u16>, A::E)]) -> Vec<A::E> {
        let mut v = vec![a.zero(); self.len()];
        for (e, c) in terms {
            let p = self.position(e);
            v[p] = a.add(&v[p], c);
        }
        v
    }
}

/// Membership of `target` in the span of `vectors` together with an existing echelon basis.
pub(crate) fn in_span<A: Arith>(base: &Echelon<A>, vectors: &[Vec<A::E>], target: &[A::E]) -> bool {
    let mut e = base.clone();
    for v in vectors {
        e.insert(v);
    }
    e.contains(target)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::ModP;

    #[test]
    fn colex_order() {
        assert_eq!(
            colex_combinations(4, 2),
            vec![vec![0, 1], vec![0, 2], vec![1, 2], vec![0, 3], vec![1, 3], vec![2, 3]]
        );
        assert_eq!(colex_combinations(3, 0), vec![Vec::<usize>::new()]);
        assert!(colex_combinations(2, 3).is_empty());
    }

    #[test]
    fn rref_enumeration_counts_subspaces() {
        for (n, r, p) in [(4, 1, 3u32), (4, 2, 3), (3, 2, 5), (5, 2, 2), (3, 3, 2)] {
            let a = ModP::new(p);
            let mut count = 0u128;
            let _ = for_each_rref(n, r, &0, &1, &a.search_values(), &mut |_, _| {
                count += 1;
                ControlFlow::Continue(())
            });
            assert_eq!(count, gaussian_binomial(n, r, p as u64), "{n} {r} {p}");
        }
        assert_eq!(gaussian_binomial(4, 2, 3), 130);
    }

    #[test]
    fn restriction_to_a_hyperplane() {
        let a = ModP::new(3);
        // f = x1*x2 on the kernel of x1 + x2: x1 = -x2 gives -x2^2.
        let ker = Kernel::new(&a, 2, &[vec![1, 1]], &[0]);
        let mut r = Restrictor::new(ker.k, 2, 0u32);
        let f: Terms<u32> = vec![(vec![1, 1], 1)];
        let out = r.restrict(&a, &f, &ker);
        assert_eq!(out, vec![(2, 2)]);
        let ker = Kernel::new(&a, 2, &[vec![1, 0]], &[0]);
        assert!(r.vanishes(&a, &f, &ker));
    }
}
