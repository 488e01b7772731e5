//! Block spaces `V^{[d]}`, multilinear forms and towers, coordinate fixing,
//! cloning, and the partial order on subset collections.
//!
//! Blocks are 0-based internally and 1-based in text. Block `b` of a
//! [`BlockSpace`] owns the variables `offset(b) .. offset(b) + dims[b]` when a
//! multilinear form is viewed as an ordinary [`Form`].

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{Field, Scalar};
use crate::linalg::Arith;
use crate::monomial::Monomial;
use crate::poly::{Form, Poly};
use crate::text::content_lines;

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BlockSpace {
    pub dims: Vec<usize>,
}

impl BlockSpace {
    pub fn new(dims: Vec<usize>) -> Result<BlockSpace> {
        if dims.iter().any(|&n| n == 0) {
            return Err(Error::invalid("block dimensions must be positive"));
        }
        Ok(BlockSpace { dims })
    }

    /// `d` copies of a space of dimension `n`.
    pub fn uniform(d: usize, n: usize) -> BlockSpace {
        BlockSpace { dims: vec![n; d] }
    }

    pub fn d(&self) -> usize {
        self.dims.len()
    }

    pub fn offset(&self, block: usize) -> usize {
        self.dims[..block].iter().sum()
    }

    pub fn total_vars(&self) -> usize {
        self.dims.iter().sum()
    }

    /// Variable index of coordinate `i` in block `b`.
    pub fn var(&self, block: usize, i: usize) -> usize {
        self.offset(block) + i
    }

    /// The block owning variable `v`, with the coordinate inside it.
    pub fn locate(&self, v: usize) -> (usize, usize) {
        let mut rest = v;
        for (b, &n) in self.dims.iter().enumerate() {
            if rest < n {
                return (b, rest);
            }
            rest -= n;
        }
        panic!("variable {v} outside the block space");
    }
}

/// A multilinear form on `V^I` for a support `I ⊆ [d]`, stored as a sparse tensor.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct MultilinearForm {
    space: BlockSpace,
    field: Field,
    support: Vec<usize>,
    entries: BTreeMap<Vec<usize>, Scalar>,
}

impl MultilinearForm {
    pub fn zero(space: BlockSpace, field: Field, mut support: Vec<usize>) -> Result<Self> {
        support.sort_unstable();
        support.dedup();
        if support.iter().any(|&b| b >= space.d()) {
            return Err(Error::invalid("support block outside the block space"));
        }
        Ok(MultilinearForm {
            space,
            field,
            support,
            entries: BTreeMap::new(),
        })
    }

    pub fn from_entries(
        space: BlockSpace,
        field: Field,
        support: Vec<usize>,
        entries: impl IntoIterator<Item = (Vec<usize>, Scalar)>,
    ) -> Result<Self> {
        let mut f = MultilinearForm::zero(space, field, support)?;
        for (idx, c) in entries {
            f.add_entry(idx, c)?;
        }
        Ok(f)
    }

    pub fn add_entry(&mut self, idx: Vec<usize>, c: Scalar) -> Result<()> {
        if idx.len() != self.support.len() {
            return Err(Error::Dimension {
                expected: self.support.len(),
                got: idx.len(),
            });
        }
        for (k, &b) in self.support.iter().enumerate() {
            if idx[k] >= self.space.dims[b] {
                return Err(Error::invalid(format!(
                    "index {} exceeds dimension {} of block {}",
                    idx[k] + 1,
                    self.space.dims[b],
                    b + 1
                )));
            }
        }
        if c.field() != self.field {
            return Err(Error::FieldMismatch);
        }
        let v = match self.entries.remove(&idx) {
            Some(old) => &old + &c,
            None => c,
        };
        if !v.is_zero() {
            self.entries.insert(idx, v);
        }
        Ok(())
    }

    pub fn space(&self) -> &BlockSpace {
        &self.space
    }

    pub fn field(&self) -> Field {
        self.field
    }

    pub fn support(&self) -> &[usize] {
        &self.support
    }

    pub fn degree(&self) -> usize {
        self.support.len()
    }

    pub fn entries(&self) -> &BTreeMap<Vec<usize>, Scalar> {
        &self.entries
    }

    pub fn get(&self, idx: &[usize]) -> Scalar {
        self.entries.get(idx).cloned().unwrap_or_else(|| self.field.zero())
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    /// Dimensions of the support blocks, in support order.
    pub fn shape(&self) -> Vec<usize> {
        self.support.iter().map(|&b| self.space.dims[b]).collect()
    }

    pub fn add(&self, other: &MultilinearForm) -> Result<MultilinearForm> {
        if self.support != other.support || self.space != other.space {
            return Err(Error::invalid("multilinear forms on different supports"));
        }
        let mut out = self.clone();
        for (k, v) in &other.entries {
            out.add_entry(k.clone(), v.clone())?;
        }
        Ok(out)
    }

    pub fn scale(&self, c: &Scalar) -> MultilinearForm {
        let mut out = self.clone();
        out.entries = self
            .entries
            .iter()
            .map(|(k, v)| (k.clone(), v * c))
            .filter(|(_, v)| !v.is_zero())
            .collect();
        out
    }

    /// The form as a polynomial in all `Σ dims` variables.
    pub fn to_form(&self) -> Form {
        let n = self.space.total_vars();
        let terms = self.entries.iter().map(|(idx, c)| {
            let mut exps = vec![0u16; n];
            for (k, &b) in self.support.iter().enumerate() {
                exps[self.space.var(b, idx[k])] += 1;
            }
            (Monomial::new(exps), c.clone())
        });
        Form::new(Poly::from_terms(self.field, n, terms), self.support.len() as u32)
            .expect("multilinear tensors are homogeneous")
    }

    /// Reads a polynomial in the block variables back as a tensor.
    /// `support` is needed only for the zero polynomial.
    pub fn from_form(space: &BlockSpace, f: &Poly, support: Option<Vec<usize>>) -> Result<Self> {
        if f.nvars() != space.total_vars() {
            return Err(Error::AmbientMismatch(space.total_vars(), f.nvars()));
        }
        let mut sup: Option<Vec<usize>> = support;
        let mut entries = Vec::new();
        for (m, c) in f.terms() {
            let mut blocks = Vec::new();
            let mut idx = Vec::new();
            for v in m.support() {
                if m.exp(v) != 1 {
                    return Err(Error::invalid("polynomial is not multilinear"));
                }
                let (b, i) = space.locate(v);
                if blocks.last() == Some(&b) {
                    return Err(Error::invalid("two variables from the same block"));
                }
                blocks.push(b);
                idx.push(i);
            }
            match &sup {
                Some(s) if *s != blocks => return Err(Error::invalid("terms with different block supports")),
                Some(_) => {}
                None => sup = Some(blocks),
            }
            entries.push((idx, c.clone()));
        }
        let sup = sup.ok_or_else(|| Error::invalid("support of a zero form must be given"))?;
        MultilinearForm::from_entries(space.clone(), f.field(), sup, entries)
    }

    /// Value at one vector per support block.
    pub fn eval(&self, point: &[Vec<Scalar>]) -> Result<Scalar> {
        if point.len() != self.support.len() {
            return Err(Error::Dimension {
                expected: self.support.len(),
                got: point.len(),
            });
        }
        let mut acc = self.field.zero();
        for (idx, c) in &self.entries {
            let mut t = c.clone();
            for (k, &i) in idx.iter().enumerate() {
                t = &t * &point[k][i];
            }
            acc = &acc + &t;
        }
        Ok(acc)
    }

    /// Moves the form to other blocks: support block `support[k]` goes to `targets[k]`.
    pub fn move_blocks(&self, space: &BlockSpace, targets: &[usize]) -> Result<MultilinearForm> {
        let mut order: Vec<usize> = (0..targets.len()).collect();
        order.sort_by_key(|&k| targets[k]);
        let support: Vec<usize> = order.iter().map(|&k| targets[k]).collect();
        for (k, &b) in targets.iter().enumerate() {
            if space.dims[b] != self.space.dims[self.support[k]] {
                return Err(Error::invalid("block dimensions differ"));
            }
        }
        let entries = self
            .entries
            .iter()
            .map(|(idx, c)| (order.iter().map(|&k| idx[k]).collect(), c.clone()));
        MultilinearForm::from_entries(space.clone(), self.field, support, entries)
    }

    /// Row-major dense tensor over the support blocks.
    pub fn to_dense<A: Arith>(&self, a: &A) -> Vec<A::E> {
        let shape = self.shape();
        let mut v = vec![a.zero(); shape.iter().product()];
        for (idx, c) in &self.entries {
            v[flat_index(&shape, idx)] = a.from_scalar(c);
        }
        v
    }

    pub fn from_dense<A: Arith>(a: &A, space: &BlockSpace, support: &[usize], v: &[A::E]) -> MultilinearForm {
        let shape: Vec<usize> = support.iter().map(|&b| space.dims[b]).collect();
        let entries = v
            .iter()
            .enumerate()
            .filter(|(_, c)| !a.is_zero(c))
            .map(|(k, c)| (unflat_index(&shape, k), a.to_scalar(c)));
        MultilinearForm::from_entries(space.clone(), a.field(), support.to_vec(), entries)
            .expect("dense tensor matches its shape")
    }
}

pub(crate) fn flat_index(shape: &[usize], idx: &[usize]) -> usize {
    idx.iter().zip(shape).fold(0, |acc, (&i, &n)| acc * n + i)
}

pub(crate) fn unflat_index(shape: &[usize], mut k: usize) -> Vec<usize> {
    let mut idx = vec![0; shape.len()];
    for j in (0..shape.len()).rev() {
        idx[j] = k % shape[j];
        k /= shape[j];
    }
    idx
}

fn fmt_set(s: &[usize]) -> String {
    let inner: Vec<String> = s.iter().map(|b| (b + 1).to_string()).collect();
    format!("{{{}}}", inner.join(","))
}

impl fmt::Display for MultilinearForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "support {}", fmt_set(&self.support))?;
        for (idx, c) in &self.entries {
            let i: Vec<String> = idx.iter().map(|x| (x + 1).to_string()).collect();
            writeln!(f, "({}) = {}", i.join(","), c)?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MlLayer {
    pub support: Vec<usize>,
    pub forms: Vec<MultilinearForm>,
    /// Where the layer came from, e.g. `i=2 I={1,3}` for polarized towers.
    pub tag: String,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MultilinearTower {
    pub space: BlockSpace,
    pub field: Field,
    pub layers: Vec<MlLayer>,
}

impl MultilinearTower {
    pub fn new(space: BlockSpace, field: Field) -> Self {
        MultilinearTower {
            space,
            field,
            layers: Vec::new(),
        }
    }

    pub fn push_layer(
        &mut self,
        support: Vec<usize>,
        forms: Vec<MultilinearForm>,
        tag: impl Into<String>,
    ) -> Result<()> {
        for f in &forms {
            if f.support() != support.as_slice() || f.space() != &self.space {
                return Err(Error::invalid("form does not live on the layer support"));
            }
            if f.field() != self.field {
                return Err(Error::FieldMismatch);
            }
        }
        self.layers.push(MlLayer {
            support,
            forms,
            tag: tag.into(),
        });
        Ok(())
    }

    pub fn height(&self) -> usize {
        self.layers.len()
    }

    pub fn size(&self) -> usize {
        self.layers.iter().map(|l| l.forms.len()).sum()
    }

    /// All forms of the layers before `i`.
    pub fn below(&self, i: usize) -> Vec<MultilinearForm> {
        self.layers[..i].iter().flat_map(|l| l.forms.iter().cloned()).collect()
    }

    pub fn forms(&self) -> impl Iterator<Item = &MultilinearForm> {
        self.layers.iter().flat_map(|l| l.forms.iter())
    }

    /// `s_i + ... + s_h`.
    pub fn size_from(&self, i: usize) -> usize {
        self.layers[i..].iter().map(|l| l.forms.len()).sum()
    }

    pub fn parse(src: &str, field: Field) -> Result<MultilinearTower> {
        let parsed = parse_blocks(src, field)?;
        let mut t = MultilinearTower::new(parsed.space.clone(), field);
        let groups = if parsed.layers.is_empty() && !parsed.loose.is_empty() {
            vec![parsed.loose]
        } else {
            parsed.layers
        };
        for (k, forms) in groups.into_iter().enumerate() {
            let Some(first) = forms.first() else { continue };
            let support = first.support().to_vec();
            t.push_layer(support, forms, format!("layer {}", k + 1))?;
        }
        Ok(t)
    }
}

impl fmt::Display for MultilinearTower {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let dims: Vec<String> = self.space.dims.iter().map(|n| n.to_string()).collect();
        writeln!(f, "dims {}", dims.join(","))?;
        for l in &self.layers {
            writeln!(f, "layer")?;
            for form in &l.forms {
                write!(f, "{form}")?;
            }
        }
        Ok(())
    }
}

struct ParsedBlocks {
    space: BlockSpace,
    loose: Vec<MultilinearForm>,
    layers: Vec<Vec<MultilinearForm>>,
}

type RawForm = (usize, Vec<usize>, Vec<(usize, Vec<usize>, Scalar)>);

fn parse_set(s: &str, line: usize) -> Result<Vec<usize>> {
    let inner = s
        .trim()
        .strip_prefix('{')
        .and_then(|r| r.strip_suffix('}'))
        .ok_or_else(|| Error::parse(line, 1, "expected a set like {1,2}"))?;
    let mut out = Vec::new();
    for part in inner.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let b: usize = part
            .parse()
            .map_err(|_| Error::parse(line, 1, format!("bad block `{part}`")))?;
        if b == 0 {
            return Err(Error::parse(line, 1, "blocks are numbered from 1"));
        }
        out.push(b - 1);
    }
    Ok(out)
}

fn parse_blocks(src: &str, field: Field) -> Result<ParsedBlocks> {
    let mut dims: Option<Vec<usize>> = None;
    let mut raw_layers: Vec<Vec<RawForm>> = Vec::new();
    let mut loose: Vec<RawForm> = Vec::new();
    let mut in_layers = false;
    for (line, text) in content_lines(src) {
        if let Some(rest) = text.strip_prefix("dims") {
            let d: Result<Vec<usize>> = rest
                .split(',')
                .map(|x| {
                    x.trim()
                        .parse::<usize>()
                        .map_err(|_| Error::parse(line, 1, "bad dims line"))
                })
                .collect();
            dims = Some(d?);
        } else if text == "layer" {
            in_layers = true;
            raw_layers.push(Vec::new());
        } else if let Some(rest) = text.strip_prefix("support") {
            let sup = parse_set(rest, line)?;
            let target = if in_layers {
                raw_layers.last_mut().expect("layer opened")
            } else {
                &mut loose
            };
            target.push((line, sup, Vec::new()));
        } else if text.starts_with('(') {
            let close = text.find(')').ok_or_else(|| Error::parse(line, 1, "missing `)`"))?;
            let idx: Result<Vec<usize>> = text[1..close]
                .split(',')
                .map(|x| {
                    x.trim()
                        .parse::<usize>()
                        .ok()
                        .filter(|&v| v > 0)
                        .map(|v| v - 1)
                        .ok_or_else(|| Error::parse(line, 2, format!("bad index `{}`", x.trim())))
                })
                .collect();
            let rest = text[close + 1..].trim();
            let value = rest
                .strip_prefix('=')
                .ok_or_else(|| Error::parse(line, close + 2, "expected `=`"))?;
            let c = crate::text::parse_poly_at(value, field, 0, line)?;
            let scalar = c.leading().map(|t| t.1.clone()).unwrap_or_else(|| field.zero());
            let target = if in_layers {
                raw_layers.last_mut().expect("layer opened")
            } else {
                &mut loose
            };
            let form = target
                .last_mut()
                .ok_or_else(|| Error::parse(line, 1, "entry before any `support` header"))?;
            form.2.push((line, idx?, scalar));
        } else {
            return Err(Error::parse(line, 1, format!("unexpected line `{text}`")));
        }
    }
    let all = raw_layers.iter().flatten().chain(loose.iter());
    let dims = match dims {
        Some(d) => d,
        None => {
            let d = all
                .clone()
                .flat_map(|(_, s, _)| s.iter().map(|b| b + 1))
                .max()
                .unwrap_or(0);
            let mut dims = vec![1usize; d];
            for (_, s, es) in all {
                for (_, idx, _) in es {
                    for (k, &b) in s.iter().enumerate() {
                        if let Some(&i) = idx.get(k) {
                            dims[b] = dims[b].max(i + 1);
                        }
                    }
                }
            }
            dims
        }
    };
    let space = BlockSpace::new(dims)?;
    let build = |raw: Vec<RawForm>| -> Result<Vec<MultilinearForm>> {
        raw.into_iter()
            .map(|(line, sup, es)| {
                let mut f = MultilinearForm::zero(space.clone(), field, sup)
                    .map_err(|e| Error::parse(line, 1, e.to_string()))?;
                for (l, idx, c) in es {
                    f.add_entry(idx, c).map_err(|e| Error::parse(l, 1, e.to_string()))?;
                }
                Ok(f)
            })
            .collect()
    };
    let layers = raw_layers.into_iter().map(build).collect::<Result<Vec<_>>>()?;
    let loose = build(loose)?;
    Ok(ParsedBlocks { space, loose, layers })
}

/// Parses a single multilinear form (an optional `dims` line and one `support` block).
pub fn parse_multilinear(src: &str, field: Field) -> Result<MultilinearForm> {
    let mut p = parse_blocks(src, field)?;
    if !p.layers.is_empty() || p.loose.len() != 1 {
        return Err(Error::parse(1, 1, "expected exactly one multilinear form"));
    }
    Ok(p.loose.pop().expect("one form"))
}

/// Result of [`fix_coordinates`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FixedTower {
    pub tower: MultilinearTower,
    /// `(layer, form)` positions of forms that became zero.
    pub zero_forms: Vec<(usize, usize)>,
    /// Whether the point lies on `Z(F^I)`.
    pub on_fiber: bool,
}

/// Substitutes `x` for the blocks in `fixed` (sorted, one vector per block).
/// Block labels are kept; layers inside `fixed` are dropped.
pub fn fix_coordinates(t: &MultilinearTower, fixed: &[usize], x: &[Vec<Scalar>]) -> Result<FixedTower> {
    let mut fixed_sorted = fixed.to_vec();
    fixed_sorted.sort_unstable();
    if fixed_sorted != fixed {
        return Err(Error::invalid("fixed blocks must be listed in increasing order"));
    }
    if x.len() != fixed.len() {
        return Err(Error::Dimension {
            expected: fixed.len(),
            got: x.len(),
        });
    }
    for (k, &b) in fixed.iter().enumerate() {
        if b >= t.space.d() {
            return Err(Error::invalid("fixed block outside the block space"));
        }
        if x[k].len() != t.space.dims[b] {
            return Err(Error::Dimension {
                expected: t.space.dims[b],
                got: x[k].len(),
            });
        }
        if x[k].iter().any(|s| s.field() != t.field) {
            return Err(Error::FieldMismatch);
        }
    }
    let point_of = |b: usize| fixed.iter().position(|&c| c == b).map(|k| &x[k]);
    let mut out = MultilinearTower::new(t.space.clone(), t.field);
    let mut zero_forms = Vec::new();
    let mut on_fiber = true;
    for layer in &t.layers {
        let inside = layer.support.iter().all(|&b| point_of(b).is_some());
        if inside {
            for f in &layer.forms {
                let pt: Vec<Vec<Scalar>> = layer
                    .support
                    .iter()
                    .map(|&b| point_of(b).expect("inside").clone())
                    .collect();
                if !f.eval(&pt)?.is_zero() {
                    on_fiber = false;
                }
            }
            continue;
        }
        let rest: Vec<usize> = layer
            .support
            .iter()
            .copied()
            .filter(|&b| point_of(b).is_none())
            .collect();
        let mut forms = Vec::new();
        for f in &layer.forms {
            let mut g = MultilinearForm::zero(t.space.clone(), t.field, rest.clone())?;
            for (idx, c) in f.entries() {
                let mut coeff = c.clone();
                let mut kept = Vec::new();
                for (k, &b) in layer.support.iter().enumerate() {
                    match point_of(b) {
                        Some(v) => coeff = &coeff * &v[idx[k]],
                        None => kept.push(idx[k]),
                    }
                }
                if !coeff.is_zero() {
                    g.add_entry(kept, coeff)?;
                }
            }
            if g.is_zero() {
                zero_forms.push((out.layers.len(), forms.len()));
            }
            forms.push(g);
        }
        out.push_layer(rest, forms, layer.tag.clone())?;
    }
    Ok(FixedTower {
        tower: out,
        zero_forms,
        on_fiber,
    })
}

/// One row of the block relabeling emitted by [`clone_external`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Relabel {
    pub copy: usize,
    pub original: usize,
    pub block: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExternalClone {
    pub tower: MultilinearTower,
    pub relabel: Vec<Relabel>,
}

/// External cloning of degree `m` over `blocks`: copy 1 keeps the original
/// blocks and copy `j ≥ 2` of the `k`-th block of `blocks` becomes block
/// `d + (j-2)|I| + k`. Layers meeting `blocks` are replaced by `m` layers in
/// lexicographic order `(i, j)`.
pub fn clone_external(t: &MultilinearTower, blocks: &[usize], m: usize) -> Result<ExternalClone> {
    let blocks = normalize_blocks(t, blocks, m)?;
    let d = t.space.d();
    let meets = |s: &[usize]| s.iter().any(|b| blocks.contains(b));
    if !t.layers.iter().any(|l| meets(&l.support)) {
        return Ok(ExternalClone {
            tower: t.clone(),
            relabel: Vec::new(),
        });
    }
    let mut dims = t.space.dims.clone();
    let mut relabel = Vec::new();
    for j in 1..=m {
        for (k, &b) in blocks.iter().enumerate() {
            let target = if j == 1 { b } else { d + (j - 2) * blocks.len() + k };
            if j > 1 {
                dims.push(t.space.dims[b]);
            }
            relabel.push(Relabel {
                copy: j,
                original: b,
                block: target,
            });
        }
    }
    let space = BlockSpace::new(dims)?;
    let target_of = |j: usize, b: usize| -> usize {
        match blocks.iter().position(|&c| c == b) {
            Some(k) if j > 1 => d + (j - 2) * blocks.len() + k,
            _ => b,
        }
    };
    let mut out = MultilinearTower::new(space.clone(), t.field);
    for (i, layer) in t.layers.iter().enumerate() {
        let copies = if meets(&layer.support) { m } else { 1 };
        for j in 1..=copies {
            let targets: Vec<usize> = layer.support.iter().map(|&b| target_of(j, b)).collect();
            let forms = layer
                .forms
                .iter()
                .map(|f| f.move_blocks(&space, &targets))
                .collect::<Result<Vec<_>>>()?;
            let mut support = targets.clone();
            support.sort_unstable();
            let tag = if copies > 1 {
                format!("({},{})", i + 1, j)
            } else {
                format!("({})", i + 1)
            };
            out.push_layer(support, forms, tag)?;
        }
    }
    Ok(ExternalClone { tower: out, relabel })
}

/// Internal cloning of degree `m` over `blocks`: each block in `blocks` is
/// replaced by `m` copies of itself inside one block, copy `j` (0-based)
/// occupying coordinates `j*dim .. (j+1)*dim`.
pub fn clone_internal(t: &MultilinearTower, blocks: &[usize], m: usize) -> Result<MultilinearTower> {
    let blocks = normalize_blocks(t, blocks, m)?;
    let mut dims = t.space.dims.clone();
    for &b in &blocks {
        dims[b] *= m;
    }
    let space = BlockSpace::new(dims)?;
    let mut out = MultilinearTower::new(space.clone(), t.field);
    for layer in &t.layers {
        let meets = layer.support.iter().any(|b| blocks.contains(b));
        let mut forms = Vec::new();
        for f in &layer.forms {
            for j in 0..if meets { m } else { 1 } {
                let entries = f.entries().iter().map(|(idx, c)| {
                    let shifted = idx
                        .iter()
                        .zip(&layer.support)
                        .map(|(&i, &b)| {
                            if blocks.contains(&b) {
                                i + j * t.space.dims[b]
                            } else {
                                i
                            }
                        })
                        .collect();
                    (shifted, c.clone())
                });
                forms.push(MultilinearForm::from_entries(
                    space.clone(),
                    t.field,
                    layer.support.clone(),
                    entries,
                )?);
            }
        }
        out.push_layer(layer.support.clone(), forms, layer.tag.clone())?;
    }
    Ok(out)
}

fn normalize_blocks(t: &MultilinearTower, blocks: &[usize], m: usize) -> Result<Vec<usize>> {
    if m == 0 {
        return Err(Error::invalid("cloning degree must be positive"));
    }
    let mut b = blocks.to_vec();
    b.sort_unstable();
    b.dedup();
    if b.is_empty() || b.iter().any(|&x| x >= t.space.d()) {
        return Err(Error::invalid("cloned blocks must be a nonempty subset of [d]"));
    }
    Ok(b)
}

/// A family of proper subsets of `[d]`, each containing the first block.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SubsetCollection {
    pub d: usize,
    pub sets: BTreeSet<Vec<usize>>,
}

impl SubsetCollection {
    pub fn new(d: usize, sets: impl IntoIterator<Item = Vec<usize>>) -> Result<Self> {
        let mut out = BTreeSet::new();
        for mut s in sets {
            s.sort_unstable();
            s.dedup();
            if s.first() != Some(&0) {
                return Err(Error::invalid(format!("{} does not contain 1", fmt_set(&s))));
            }
            if s.len() >= d || s.iter().any(|&b| b >= d) {
                return Err(Error::invalid(format!(
                    "{} is not a proper subset of [{d}]",
                    fmt_set(&s)
                )));
            }
            out.insert(s);
        }
        Ok(SubsetCollection { d, sets: out })
    }

    /// All proper subsets of `[d]` containing 1.
    pub fn full(d: usize) -> SubsetCollection {
        let mut sets = BTreeSet::new();
        for mask in 0..(1u32 << d.saturating_sub(1)) {
            let s: Vec<usize> = std::iter::once(0)
                .chain((1..d).filter(|&b| mask & (1 << (b - 1)) != 0))
                .collect();
            if s.len() < d {
                sets.insert(s);
            }
        }
        SubsetCollection { d, sets }
    }

    /// `{{1}} ∪ {[d] \ {j}}_{j ≠ 1}`, which yields slice rank.
    pub fn slice(d: usize) -> SubsetCollection {
        let mut sets = BTreeSet::new();
        sets.insert(vec![0]);
        for j in 1..d {
            sets.insert((0..d).filter(|&b| b != j).collect());
        }
        SubsetCollection { d, sets }
    }

    /// Parses `{{1},{1,2}}`.
    pub fn parse(s: &str, d: usize) -> Result<SubsetCollection> {
        let t = s.trim();
        let inner = t
            .strip_prefix('{')
            .and_then(|r| r.strip_suffix('}'))
            .ok_or_else(|| Error::parse(1, 1, "expected {{...},...}"))?;
        let mut sets = Vec::new();
        let mut rest = inner.trim();
        while !rest.is_empty() {
            let close = rest.find('}').ok_or_else(|| Error::parse(1, 1, "unbalanced braces"))?;
            sets.push(parse_set(&rest[..=close], 1)?);
            rest = rest[close + 1..].trim_start().trim_start_matches(',').trim_start();
        }
        SubsetCollection::new(d, sets)
    }

    /// Every nonempty collection over `[d]`.
    pub fn all_nonempty(d: usize) -> Vec<SubsetCollection> {
        let members: Vec<Vec<usize>> = SubsetCollection::full(d).sets.into_iter().collect();
        (1u64..(1 << members.len()))
            .map(|mask| SubsetCollection {
                d,
                sets: members
                    .iter()
                    .enumerate()
                    .filter(|(k, _)| mask & (1 << k) != 0)
                    .map(|(_, s)| s.clone())
                    .collect(),
            })
            .collect()
    }
}

impl fmt::Display for SubsetCollection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.sets.iter().map(|s| fmt_set(s)).collect();
        write!(f, "{{{}}}", parts.join(","))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Comparison {
    Less,
    Equal,
    Greater,
    Incomparable,
}

fn proper_subset(a: &[usize], b: &[usize]) -> bool {
    a.len() < b.len() && a.iter().all(|x| b.contains(x))
}

/// `a ≤ b` iff `a` arises from `b` by replacing some sets with any number of
/// their proper subsets containing 1: every set of `a` missing from `b` must
/// sit strictly inside a set of `b` missing from `a`.
pub fn collection_leq(a: &SubsetCollection, b: &SubsetCollection) -> bool {
    let removed: Vec<&Vec<usize>> = b.sets.difference(&a.sets).collect();
    a.sets
        .difference(&b.sets)
        .all(|s| removed.iter().any(|r| proper_subset(s, r)))
}

pub fn collection_compare(a: &SubsetCollection, b: &SubsetCollection) -> Result<Comparison> {
    if a.d != b.d {
        return Err(Error::invalid("collections over different [d]"));
    }
    Ok(match (collection_leq(a, b), collection_leq(b, a)) {
        (true, true) => Comparison::Equal,
        (true, false) => Comparison::Less,
        (false, true) => Comparison::Greater,
        (false, false) => Comparison::Incomparable,
    })
}

/// Cover relations `(lower, upper)` of the order on all nonempty collections over `[d]`.
pub fn hasse_covers(d: usize) -> Vec<(SubsetCollection, SubsetCollection)> {
    let all = SubsetCollection::all_nonempty(d);
    let lt = |x: &SubsetCollection, y: &SubsetCollection| x != y && collection_leq(x, y);
    let mut out = Vec::new();
    for x in &all {
        for y in &all {
            if lt(x, y) && !all.iter().any(|z| lt(x, z) && lt(z, y)) {
                out.push((x.clone(), y.clone()));
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f2() -> Field {
        Field::Prime(2)
    }

    fn coll(s: &str, d: usize) -> SubsetCollection {
        SubsetCollection::parse(s, d).unwrap()
    }

    #[test]
    fn order_examples() {
        let cmp = |a: &str, b: &str| collection_compare(&coll(a, 3), &coll(b, 3)).unwrap();
        assert_eq!(cmp("{{1}}", "{{1,2}}"), Comparison::Less);
        assert_eq!(cmp("{{1,2},{1,3}}", "{{1},{1,2},{1,3}}"), Comparison::Less);
        assert_eq!(cmp("{{1,2}}", "{{1,3}}"), Comparison::Incomparable);
        assert_eq!(cmp("{{1},{1,2}}", "{{1},{1,2}}"), Comparison::Equal);
    }

    #[test]
    fn hasse_diagram_for_three_blocks() {
        let mut got: Vec<(String, String)> = hasse_covers(3)
            .into_iter()
            .map(|(a, b)| (a.to_string(), b.to_string()))
            .collect();
        got.sort();
        let mut want: Vec<(String, String)> = [
            ("{{1,2},{1,3}}", "{{1},{1,2},{1,3}}"),
            ("{{1},{1,2}}", "{{1,2},{1,3}}"),
            ("{{1},{1,3}}", "{{1,2},{1,3}}"),
            ("{{1,2}}", "{{1},{1,2}}"),
            ("{{1,3}}", "{{1},{1,3}}"),
            ("{{1}}", "{{1,2}}"),
            ("{{1}}", "{{1,3}}"),
        ]
        .iter()
        .map(|(a, b)| (a.to_string(), b.to_string()))
        .collect();
        want.sort();
        assert_eq!(got, want);
    }

    #[test]
    fn collections_validate_members() {
        assert!(SubsetCollection::parse("{{2}}", 3).is_err());
        assert!(SubsetCollection::parse("{{1,2,3}}", 3).is_err());
        assert_eq!(SubsetCollection::full(3).sets.len(), 3);
        assert_eq!(SubsetCollection::slice(3).to_string(), "{{1},{1,2},{1,3}}");
    }

    #[test]
    fn form_round_trips_through_polynomials() {
        let space = BlockSpace::new(vec![2, 2]).unwrap();
        let q = Field::Rational;
        let f = MultilinearForm::from_entries(
            space.clone(),
            q,
            vec![0, 1],
            [(vec![0, 1], q.from_i64(1)), (vec![1, 0], q.from_i64(1))],
        )
        .unwrap();
        let p = f.to_form();
        assert_eq!(p.to_string(), "x1*x4 + x2*x3");
        assert_eq!(MultilinearForm::from_form(&space, p.poly(), None).unwrap(), f);
    }

    fn bilinear_tower() -> MultilinearTower {
        let src = "dims 2,2\nlayer\nsupport {1,2}\n(1,2) = 1\n(2,1) = 1\n";
        MultilinearTower::parse(src, Field::Rational).unwrap()
    }

    #[test]
    fn fixing_a_block() {
        let t = bilinear_tower();
        let q = Field::Rational;
        let fixed = fix_coordinates(&t, &[1], &[vec![q.from_i64(1), q.from_i64(1)]]).unwrap();
        let g = &fixed.tower.layers[0].forms[0];
        assert_eq!(g.support(), &[0]);
        assert_eq!(g.to_form().to_string(), "x1 + x2");
        let zero = fix_coordinates(&t, &[1], &[vec![q.from_i64(0), q.from_i64(0)]]).unwrap();
        assert_eq!(zero.zero_forms, vec![(0, 0)]);
        assert_eq!(zero.tower.layers[0].support, vec![0]);
    }

    #[test]
    fn external_clone_of_a_product() {
        let src = "dims 1,1\nlayer\nsupport {1,2}\n(1,1) = 1\n";
        let t = MultilinearTower::parse(src, f2()).unwrap();
        let c = clone_external(&t, &[1], 2).unwrap();
        assert_eq!(c.tower.space.d(), 3);
        assert_eq!(c.tower.height(), 2);
        assert_eq!(c.tower.layers[0].support, vec![0, 1]);
        assert_eq!(c.tower.layers[1].support, vec![0, 2]);
        assert_eq!(c.relabel.len(), 2);
        let same = clone_external(&t, &[1], 1).unwrap();
        assert_eq!(same.tower.layers[0].forms, t.layers[0].forms);
    }

    #[test]
    fn internal_clone_doubles_the_block() {
        let src = "dims 1,1\nlayer\nsupport {1,2}\n(1,1) = 1\n";
        let t = MultilinearTower::parse(src, f2()).unwrap();
        let c = clone_internal(&t, &[1], 2).unwrap();
        assert_eq!(c.space.dims, vec![1, 2]);
        assert_eq!(c.layers[0].forms.len(), 2);
        assert_eq!(c.layers[0].forms[1].to_form().to_string(), "x1*x3");
        assert_eq!(clone_internal(&t, &[1], 1).unwrap(), t);
    }

    #[test]
    fn text_round_trip() {
        let t = bilinear_tower();
        let again = MultilinearTower::parse(&t.to_string(), Field::Rational).unwrap();
        assert_eq!(again.layers[0].forms, t.layers[0].forms);
    }
}
