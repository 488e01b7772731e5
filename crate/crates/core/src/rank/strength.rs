//! The exact level-by-level strength search.
//!
//! `str_I(f) ≤ r` iff there are a subspace `L` of linear forms and spaces of
//! higher-degree forms `G_e ⊆ S_e(ker L)`, `e ≤ d/2`, with total dimension
//! `r` and `f|_{ker L} ∈ Σ G_e · S_{d-e} + I|_{ker L}`. Linear generators of
//! `I` are removed first by restricting to their common kernel.

use std::collections::HashMap;
use std::ops::ControlFlow;

use crate::error::{Error, Result};
use crate::ideal::{multiples, MonomialIndex};
use crate::linalg::{express, rref, Arith, Echelon};
use crate::monomial::{count_monomials, monomials_of_degree, Monomial};
use crate::poly::{Form, Poly};
use crate::rank::search::{for_each_rref, in_span, DenseSpace, Kernel, Restrictor, Terms};

pub(crate) fn form_terms<A: Arith>(a: &A, f: &Poly) -> Terms<A::E> {
    f.terms()
        .iter()
        .map(|(m, c)| (m.exps().to_vec(), a.from_scalar(c)))
        .collect()
}

/// A successful subspace choice, in the coordinates of the pre-restricted space.
#[derive(Clone, Debug)]
pub(crate) struct Witness<E> {
    pub level: u64,
    pub linear: Vec<Vec<E>>,
    pub pivots: Vec<usize>,
    /// Higher-degree factors `(degree, terms)` in the kernel coordinates of `linear`.
    pub higher: Vec<(u32, Terms<E>)>,
}

#[derive(Clone, Debug)]
pub(crate) enum Outcome<E> {
    Found(Witness<E>),
    /// Every level `≤ up_to` was searched without success.
    Refuted {
        up_to: u64,
    },
    /// The budget ran out while searching level `refuted_below`.
    Exhausted {
        refuted_below: u64,
    },
}

pub(crate) struct Problem<A: Arith> {
    pub a: A,
    pub d: u32,
    pub k0: usize,
    /// Original variable of each pre-restricted coordinate.
    pub free0: Vec<usize>,
    pub f0: Terms<A::E>,
    pub gens0: Vec<(u32, Terms<A::E>)>,
    pub unit: bool,
    pub used: u64,
    pub budget: u64,
    spaces: HashMap<usize, DenseSpace>,
}

impl<A: Arith> Problem<A> {
    pub fn new(a: A, f: &Form, modulus: &[Form], budget: u64) -> Result<Self> {
        let n = f.nvars();
        let d = f.degree();
        for g in modulus {
            if g.nvars() != n {
                return Err(Error::AmbientMismatch(n, g.nvars()));
            }
            if g.field() != f.field() {
                return Err(Error::FieldMismatch);
            }
        }
        let unit = modulus.iter().any(|g| g.degree() == 0 && !g.is_zero());
        let mut rows: Vec<Vec<A::E>> = modulus
            .iter()
            .filter(|g| g.degree() == 1 && !g.is_zero())
            .map(|g| {
                let mut v = vec![a.zero(); n];
                for (m, c) in g.terms() {
                    v[m.support()[0]] = a.from_scalar(c);
                }
                v
            })
            .collect();
        let pivots = rref(&a, &mut rows);
        rows.truncate(pivots.len());
        let ker = Kernel::new(&a, n, &rows, &pivots);
        let mut rest = Restrictor::new(ker.k, d.max(1), a.zero());
        let decode = |rest: &Restrictor<A::E>, t: Vec<(u64, A::E)>| -> Terms<A::E> {
            t.into_iter().map(|(k, c)| (rest.decode(k), c)).collect()
        };
        let f0 = rest.restrict(&a, &form_terms(&a, f), &ker);
        let f0 = decode(&rest, f0);
        let mut gens0 = Vec::new();
        for g in modulus {
            if g.degree() >= 2 && g.degree() <= d && !g.is_zero() {
                let r = rest.restrict(&a, &form_terms(&a, g), &ker);
                if !r.is_empty() {
                    gens0.push((g.degree(), decode(&rest, r)));
                }
            }
        }
        Ok(Problem {
            a,
            d,
            k0: ker.k,
            free0: ker.free,
            f0,
            gens0,
            unit,
            used: 0,
            budget,
            spaces: HashMap::new(),
        })
    }

    fn space(&mut self, k: usize) -> &DenseSpace {
        let d = self.d;
        self.spaces.entry(k).or_insert_with(|| DenseSpace::new(k, d))
    }

    fn tick(&mut self) -> bool {
        self.used += 1;
        self.used <= self.budget
    }

    /// Degree-`d` piece of `I|_W` as an echelon basis, with `f|_W` densified.
    fn restricted_piece(&mut self, ker: &Kernel<A::E>, rest: &mut Restrictor<A::E>) -> (Echelon<A>, Vec<A::E>) {
        let a = self.a.clone();
        let fr: Terms<A::E> = rest
            .restrict(&a, &self.f0, ker)
            .into_iter()
            .map(|(k, c)| (rest.decode(k), c))
            .collect();
        let gens: Vec<(u32, Terms<A::E>)> = self
            .gens0
            .iter()
            .map(|(e, g)| {
                let t = rest
                    .restrict(&a, g, ker)
                    .into_iter()
                    .map(|(k, c)| (rest.decode(k), c))
                    .collect();
                (*e, t)
            })
            .collect();
        let space = self.space(ker.k);
        let mut ech = Echelon::new(a.clone(), space.len());
        for (e, g) in &gens {
            for v in space.multiples(&a, g, *e) {
                ech.insert(&v);
            }
        }
        let target = space.to_dense(&a, &fr);
        (ech, target)
    }

    /// Whether `f|_W ∈ I|_W` for the kernel `W` of the given linear forms.
    fn linear_test(&mut self, ker: &Kernel<A::E>, rest: &mut Restrictor<A::E>) -> bool {
        let a = self.a.clone();
        if self.gens0.is_empty() {
            return rest.vanishes(&a, &self.f0, ker);
        }
        let (ech, target) = self.restricted_piece(ker, rest);
        ech.contains(&target)
    }

    /// Searches levels `0..=cap`; the first success is minimal.
    pub fn search(&mut self, cap: Option<u64>) -> Outcome<A::E> {
        if self.unit {
            return Outcome::Found(Witness {
                level: 0,
                linear: Vec::new(),
                pivots: Vec::new(),
                higher: Vec::new(),
            });
        }
        let top = cap.unwrap_or(self.k0 as u64).min(self.k0 as u64);
        for r in 0..=top {
            match self.search_level(r) {
                Ok(Some(w)) => return Outcome::Found(w),
                Ok(None) => {}
                Err(()) => return Outcome::Exhausted { refuted_below: r },
            }
        }
        Outcome::Refuted { up_to: top }
    }

    fn search_level(&mut self, r: u64) -> std::result::Result<Option<Witness<A::E>>, ()> {
        let half = self.d / 2;
        let a = self.a.clone();
        let values = a.search_values();
        let max_linear = (r as usize).min(self.k0);
        // Number of linear pieces from `r` down; higher-degree pieces fill the rest.
        for a1 in (0..=max_linear).rev() {
            let rest_count = r as usize - a1;
            if rest_count > 0 && half < 2 {
                continue;
            }
            let k = self.k0 - a1;
            let mut rest = Restrictor::new(k, self.d.max(1), a.zero());
            let mut found: Option<Witness<A::E>> = None;
            let mut exhausted = false;
            let k0 = self.k0;
            let flow = for_each_rref(k0, a1, &a.zero(), &a.one(), &values, &mut |rows, pivots| {
                let ker = Kernel::new(&a, k0, rows, pivots);
                if rest_count == 0 {
                    if !self.tick() {
                        exhausted = true;
                        return ControlFlow::Break(());
                    }
                    if self.linear_test(&ker, &mut rest) {
                        found = Some(Witness {
                            level: r,
                            linear: rows.to_vec(),
                            pivots: pivots.to_vec(),
                            higher: Vec::new(),
                        });
                        return ControlFlow::Break(());
                    }
                    return ControlFlow::Continue(());
                }
                match self.higher_search(&ker, &mut rest, rest_count) {
                    Ok(Some(higher)) => {
                        found = Some(Witness {
                            level: r,
                            linear: rows.to_vec(),
                            pivots: pivots.to_vec(),
                            higher,
                        });
                        ControlFlow::Break(())
                    }
                    Ok(None) => ControlFlow::Continue(()),
                    Err(()) => {
                        exhausted = true;
                        ControlFlow::Break(())
                    }
                }
            });
            let _ = flow;
            if exhausted {
                return Err(());
            }
            if found.is_some() {
                return Ok(found);
            }
        }
        Ok(None)
    }

    /// Tries every split of `count` higher-degree factors over degrees `2..=d/2`.
    fn higher_search(
        &mut self,
        ker: &Kernel<A::E>,
        rest: &mut Restrictor<A::E>,
        count: usize,
    ) -> std::result::Result<Option<Vec<(u32, Terms<A::E>)>>, ()> {
        let a = self.a.clone();
        let (base, target) = self.restricted_piece(ker, rest);
        let k = ker.k;
        let degrees: Vec<u32> = (2..=self.d / 2).collect();
        for split in compositions(count, degrees.len()) {
            if split.iter().zip(&degrees).any(|(&c, &e)| c > count_monomials(k, e)) {
                continue;
            }
            let mut chosen: Vec<(u32, Terms<A::E>)> = Vec::new();
            match self.nested(&a, k, &degrees, &split, 0, &mut chosen, &base, &target) {
                ControlFlow::Break(true) => return Ok(Some(chosen)),
                ControlFlow::Break(false) => return Err(()),
                ControlFlow::Continue(()) => {}
            }
        }
        Ok(None)
    }

    #[allow(clippy::too_many_arguments)]
    fn nested(
        &mut self,
        a: &A,
        k: usize,
        degrees: &[u32],
        split: &[usize],
        pos: usize,
        chosen: &mut Vec<(u32, Terms<A::E>)>,
        base: &Echelon<A>,
        target: &[A::E],
    ) -> ControlFlow<bool> {
        if pos == degrees.len() {
            if !self.tick() {
                return ControlFlow::Break(false);
            }
            let space = self.space(k);
            let vectors: Vec<Vec<A::E>> = chosen.iter().flat_map(|(e, g)| space.multiples(a, g, *e)).collect();
            return if in_span(base, &vectors, target) {
                ControlFlow::Break(true)
            } else {
                ControlFlow::Continue(())
            };
        }
        let e = degrees[pos];
        let monos = monomials_of_degree(k, e);
        let values = a.search_values();
        let mut result = ControlFlow::Continue(());
        let _ = for_each_rref(monos.len(), split[pos], &a.zero(), &a.one(), &values, &mut |rows, _| {
            let before = chosen.len();
            for row in rows {
                let terms: Terms<A::E> = monos
                    .iter()
                    .zip(row)
                    .filter(|(_, c)| !a.is_zero(c))
                    .map(|(m, c)| (m.exps().to_vec(), c.clone()))
                    .collect();
                chosen.push((e, terms));
            }
            let r = self.nested(a, k, degrees, split, pos + 1, chosen, base, target);
            if let ControlFlow::Break(b) = r {
                result = ControlFlow::Break(b);
                return ControlFlow::Break(());
            }
            chosen.truncate(before);
            ControlFlow::Continue(())
        });
        result
    }

    /// The factors `g_i` of a witness as forms on the original space.
    pub fn lift_factors(&self, w: &Witness<A::E>, n: usize) -> Vec<Form> {
        let a = &self.a;
        let field = a.field();
        let mut out = Vec::new();
        for row in &w.linear {
            let terms = row
                .iter()
                .enumerate()
                .filter(|(_, c)| !a.is_zero(c))
                .map(|(j, c)| (Monomial::var(n, self.free0[j]), a.to_scalar(c)));
            out.push(Form::new(Poly::from_terms(field, n, terms), 1).expect("linear"));
        }
        let wfree: Vec<usize> = (0..self.k0).filter(|j| !w.pivots.contains(j)).collect();
        for (e, g) in &w.higher {
            let terms = g.iter().map(|(exps, c)| {
                let mut full = vec![0u16; n];
                for (j, &x) in exps.iter().enumerate() {
                    full[self.free0[wfree[j]]] += x;
                }
                (Monomial::new(full), a.to_scalar(c))
            });
            out.push(Form::new(Poly::from_terms(field, n, terms), *e).expect("homogeneous"));
        }
        out
    }
}

/// Compositions of `total` into `parts` non-negative parts, lexicographically decreasing.
fn compositions(total: usize, parts: usize) -> Vec<Vec<usize>> {
    if parts == 0 {
        return if total == 0 { vec![Vec::new()] } else { Vec::new() };
    }
    let mut out = Vec::new();
    for first in (0..=total).rev() {
        for mut rest in compositions(total - first, parts - 1) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

/// Solves `f = Σ g_i h_i + w`, `w ∈ I_d`, for given factors `g_i`.
pub(crate) fn solve_cofactors<A: Arith>(
    a: &A,
    f: &Form,
    factors: &[Form],
    modulus: &[Form],
) -> Option<(Vec<Form>, Form)> {
    let n = f.nvars();
    let d = f.degree();
    let field = f.field();
    let idx = MonomialIndex::new(n, d);
    let mut vectors: Vec<Vec<A::E>> = Vec::new();
    let mut tags: Vec<(usize, Monomial)> = Vec::new();
    for (i, g) in factors.iter().enumerate() {
        for m in monomials_of_degree(n, d - g.degree()) {
            vectors.push(idx.to_dense(a, &g.mul_term(&m, &field.one())));
            tags.push((i, m));
        }
    }
    let ideal = multiples(a, &idx, modulus);
    let split = vectors.len();
    vectors.extend(ideal.iter().map(|(_, _, v)| v.clone()));
    let sol = express(a, &vectors, &idx.to_dense(a, f))?;
    let mut h_terms: Vec<Vec<(Monomial, crate::field::Scalar)>> = vec![Vec::new(); factors.len()];
    for (k, (i, m)) in tags.iter().enumerate() {
        if !a.is_zero(&sol[k]) {
            h_terms[*i].push((m.clone(), a.to_scalar(&sol[k])));
        }
    }
    let hs = h_terms
        .into_iter()
        .zip(factors)
        .map(|(t, g)| Form::new(Poly::from_terms(field, n, t), d - g.degree()).expect("homogeneous"))
        .collect();
    let mut wv = vec![a.zero(); idx.len()];
    for (k, v) in vectors[split..].iter().enumerate() {
        let c = &sol[split + k];
        if a.is_zero(c) {
            continue;
        }
        for (x, y) in wv.iter_mut().zip(v) {
            *x = a.add(x, &a.mul(c, y));
        }
    }
    Some((hs, idx.to_form(a, &wv)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn composition_order() {
        assert_eq!(compositions(2, 2), vec![vec![2, 0], vec![1, 1], vec![0, 2]]);
        assert_eq!(compositions(0, 1), vec![vec![0]]);
        assert!(compositions(1, 0).is_empty());
    }
}
