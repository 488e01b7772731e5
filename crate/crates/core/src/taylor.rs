//! Taylor components `f^e` of `f(x_1 + ... + x_m)`, polarization, the tower
//! operator `T_m`, and restriction to the span of given points.
//!
//! Block `j` (1-based) of `V^m` uses the variables `x_{(j-1)n+1} .. x_{jn}`.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use crate::error::{Error, Result};
use crate::field::{Field, Scalar};
use crate::monomial::Monomial;
use crate::multilinear::{BlockSpace, MultilinearForm};
use crate::poly::{Form, Poly};
use crate::text::content_lines;
use crate::tower::Tower;

/// A multidegree `e = (e_1, ..., e_m)`. Sorted in decreasing lexicographic
/// order, so `(2,0) < (1,1) < (0,2)` as map keys.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct MultiDegree(pub Vec<u32>);

impl MultiDegree {
    pub fn total(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// The multinomial coefficient `C(|e|; e_1, ..., e_m)`.
    pub fn multinomial(&self) -> u128 {
        let mut acc: u128 = 1;
        let mut n: u128 = 0;
        for &e in &self.0 {
            for k in 1..=e as u128 {
                n += 1;
                acc = acc * n / k;
            }
        }
        acc
    }
}

impl Ord for MultiDegree {
    fn cmp(&self, other: &Self) -> Ordering {
        other.0.cmp(&self.0)
    }
}

impl PartialOrd for MultiDegree {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for MultiDegree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|e| e.to_string()).collect();
        write!(f, "({})", parts.join(","))
    }
}

/// A form on `V^m`, `V = K^n`, multi-homogeneous of a fixed multidegree.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BlockedForm {
    pub blocks: usize,
    pub n: usize,
    pub multidegree: MultiDegree,
    pub form: Form,
}

fn block_degrees(m: &Monomial, blocks: usize, n: usize) -> Vec<u32> {
    (0..blocks)
        .map(|j| (0..n).map(|k| m.exp(j * n + k) as u32).sum())
        .collect()
}

impl BlockedForm {
    pub fn new(form: Form, blocks: usize, n: usize) -> Result<BlockedForm> {
        if form.nvars() != blocks * n {
            return Err(Error::AmbientMismatch(blocks * n, form.nvars()));
        }
        let mut e: Option<Vec<u32>> = None;
        for (m, _) in form.terms() {
            let here = block_degrees(m, blocks, n);
            match &e {
                Some(prev) if *prev != here => return Err(Error::invalid("form is not multi-homogeneous")),
                _ => e = Some(here),
            }
        }
        let e = e.ok_or_else(|| Error::invalid("zero blocked form has no multidegree"))?;
        Ok(BlockedForm {
            blocks,
            n,
            multidegree: MultiDegree(e),
            form,
        })
    }

    /// `f^e(x, ..., x)`: every block set to the same point.
    pub fn diagonal(&self) -> Form {
        let map: Vec<usize> = (0..self.blocks * self.n).map(|v| v % self.n).collect();
        self.form.relabel(self.n, &map)
    }

    /// Reads `blocks m n` followed by one polynomial.
    pub fn parse(src: &str, field: Field) -> Result<BlockedForm> {
        let mut lines = content_lines(src);
        let (l0, header) = lines
            .next()
            .ok_or_else(|| Error::parse(1, 1, "expected `blocks m n`"))?;
        let nums: Vec<usize> = header
            .strip_prefix("blocks")
            .ok_or_else(|| Error::parse(l0, 1, "expected `blocks m n`"))?
            .split_whitespace()
            .map(|t| t.parse::<usize>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| Error::parse(l0, 8, "bad block counts"))?;
        let [m, n] = nums[..] else {
            return Err(Error::parse(l0, 8, "expected two counts"));
        };
        let (l1, body) = lines
            .next()
            .ok_or_else(|| Error::parse(l0 + 1, 1, "missing polynomial"))?;
        let p = crate::text::parse_poly_at(body, field, m * n, l1)?;
        let form = Form::from_poly(p).map_err(|e| Error::parse(l1, 1, e.to_string()))?;
        BlockedForm::new(form, m, n).map_err(|e| Error::parse(l1, 1, e.to_string()))
    }
}

impl fmt::Display for BlockedForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "blocks {} {}", self.blocks, self.n)?;
        writeln!(f, "{}", self.form)
    }
}

/// `f(x_1 + ... + x_m)` as a polynomial on `V^m`.
pub fn block_sum(f: &Form, m: usize) -> Result<Form> {
    let n = f.nvars();
    let images: Vec<Poly> = (0..n)
        .map(|k| {
            (0..m).fold(Poly::zero(f.field(), n * m), |acc, j| {
                acc.add(&Poly::var(f.field(), n * m, j * n + k)).expect("same ring")
            })
        })
        .collect();
    f.substitute_linear(&images)
}

/// The nonzero Taylor components of `f`, keyed by multidegree.
pub fn taylor_expand(f: &Form, m: usize) -> Result<BTreeMap<MultiDegree, BlockedForm>> {
    if m == 0 {
        return Err(Error::invalid("number of blocks must be positive"));
    }
    let n = f.nvars();
    let sum = block_sum(f, m)?;
    let mut groups: BTreeMap<MultiDegree, Vec<(Monomial, Scalar)>> = BTreeMap::new();
    for (mono, c) in sum.terms() {
        groups
            .entry(MultiDegree(block_degrees(mono, m, n)))
            .or_default()
            .push((mono.clone(), c.clone()));
    }
    Ok(groups
        .into_iter()
        .map(|(e, terms)| {
            let form = Form::new(Poly::from_terms(f.field(), n * m, terms), f.degree())
                .expect("components of a form are homogeneous");
            (
                e.clone(),
                BlockedForm {
                    blocks: m,
                    n,
                    multidegree: e,
                    form,
                },
            )
        })
        .collect())
}

/// Distinct orderings of a multiset given as a sorted list.
fn distinct_permutations(items: &[usize]) -> Vec<Vec<usize>> {
    fn go(counts: &mut Vec<(usize, u16)>, cur: &mut Vec<usize>, len: usize, out: &mut Vec<Vec<usize>>) {
        if cur.len() == len {
            out.push(cur.clone());
            return;
        }
        for k in 0..counts.len() {
            if counts[k].1 == 0 {
                continue;
            }
            counts[k].1 -= 1;
            cur.push(counts[k].0);
            go(counts, cur, len, out);
            cur.pop();
            counts[k].1 += 1;
        }
    }
    let mut counts: Vec<(usize, u16)> = Vec::new();
    for &x in items {
        match counts.last_mut() {
            Some((y, c)) if *y == x => *c += 1,
            _ => counts.push((x, 1)),
        }
    }
    let mut out = Vec::new();
    go(&mut counts, &mut Vec::new(), items.len(), &mut out);
    out
}

/// The polarization `f̃ = f^{(1,...,1)}` on `V^d`.
pub fn polarize(f: &Form) -> Result<MultilinearForm> {
    let d = f.degree();
    if d == 0 {
        return Err(Error::invalid("polarization needs positive degree"));
    }
    let p = f.field().characteristic();
    if p != 0 && p <= d {
        return Err(Error::Characteristic { p, need: d + 1 });
    }
    let n = f.nvars();
    let field = f.field();
    let space = BlockSpace::uniform(d as usize, n);
    let mut out = MultilinearForm::zero(space, field, (0..d as usize).collect())?;
    for (mono, c) in f.terms() {
        let mut items = Vec::new();
        let mut weight = field.one();
        for k in 0..n {
            let a = mono.exp(k);
            for t in 1..=a {
                weight = &weight * &field.from_i64(t as i64);
                items.push(k);
            }
        }
        let coeff = c * &weight;
        for idx in distinct_permutations(&items) {
            out.add_entry(idx, coeff.clone())?;
        }
    }
    Ok(out)
}

/// `T_m`: layer `i` consists of the nonzero components `f^e` of the forms of
/// layer `i`, form by form, multidegrees in key order.
pub fn taylor_tower(t: &Tower, m: usize) -> Result<Tower> {
    if m == 0 {
        return Err(Error::invalid("number of blocks must be positive"));
    }
    let mut out = Tower::new(t.field(), t.nvars() * m);
    for layer in t.layers() {
        let mut forms = Vec::new();
        for f in &layer.forms {
            forms.extend(taylor_expand(f, m)?.into_values().map(|b| b.form));
        }
        out.push_layer(layer.degree, forms)?;
    }
    Ok(out)
}

/// `a ↦ f(a_1 v_1 + ... + a_m v_m)` as a form in `m` variables.
pub fn subspace_restrict(f: &Form, v: &[Vec<Scalar>]) -> Result<Form> {
    let n = f.nvars();
    let m = v.len();
    for p in v {
        if p.len() != n {
            return Err(Error::Dimension {
                expected: n,
                got: p.len(),
            });
        }
        if p.iter().any(|s| s.field() != f.field()) {
            return Err(Error::FieldMismatch);
        }
    }
    let images: Vec<Poly> = (0..n)
        .map(|k| Poly::from_terms(f.field(), m, (0..m).map(|j| (Monomial::var(m, j), v[j][k].clone()))))
        .collect();
    f.substitute_linear(&images)
}
