//! Random small instances. Every draw goes through a `ChaCha8Rng` keyed by
//! the profile seed and a per-instance stream.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use regtower::monomial::monomials_of_degree;
use regtower::multilinear::{BlockSpace, MultilinearForm, MultilinearTower};
use regtower::{Field, Form, Poly, Scalar};

/// The generator for instance `index` of suite number `suite`.
pub fn instance_rng(seed: u64, suite: u32, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((suite as u64) << 32) | index);
    rng
}

pub fn scalar(rng: &mut ChaCha8Rng, field: Field) -> Scalar {
    match field {
        Field::Rational => field.from_i64(rng.gen_range(-3..=3)),
        Field::Prime(p) => field.from_u64(rng.gen_range(0..p as u64)),
    }
}

fn nonzero_scalar(rng: &mut ChaCha8Rng, field: Field) -> Scalar {
    loop {
        let c = scalar(rng, field);
        if !c.is_zero() {
            return c;
        }
    }
}

/// A nonzero form of degree `d` in `n` variables; each monomial appears with
/// probability 3/5.
pub fn form(rng: &mut ChaCha8Rng, field: Field, n: usize, d: u32) -> Form {
    let monos = monomials_of_degree(n, d);
    loop {
        let mut terms = Vec::new();
        for m in &monos {
            if rng.gen_bool(0.6) {
                terms.push((m.clone(), nonzero_scalar(rng, field)));
            }
        }
        let f = Form::new(Poly::from_terms(field, n, terms), d).expect("homogeneous by construction");
        if !f.is_zero() {
            return f;
        }
    }
}

/// A multilinear form on `support` with uniformly random entries.
pub fn multilinear(rng: &mut ChaCha8Rng, field: Field, space: &BlockSpace, support: Vec<usize>) -> MultilinearForm {
    let shape: Vec<usize> = support.iter().map(|&b| space.dims[b]).collect();
    let total: usize = shape.iter().product();
    let entries: Vec<(Vec<usize>, Scalar)> = (0..total)
        .map(|mut k| {
            let mut idx = vec![0; shape.len()];
            for j in (0..shape.len()).rev() {
                idx[j] = k % shape[j];
                k /= shape[j];
            }
            (idx, scalar(rng, field))
        })
        .collect();
    MultilinearForm::from_entries(space.clone(), field, support, entries).expect("indices within the shape")
}

/// A nonempty subset of `0..d`, sorted.
pub fn subset(rng: &mut ChaCha8Rng, d: usize, proper: bool) -> Vec<usize> {
    loop {
        let s: Vec<usize> = (0..d).filter(|_| rng.gen_bool(0.5)).collect();
        if !s.is_empty() && (!proper || s.len() < d) {
            return s;
        }
    }
}

/// Block dimensions in `1..=max_dim`.
pub fn dims(rng: &mut ChaCha8Rng, d: usize, max_dim: usize) -> Vec<usize> {
    (0..d).map(|_| rng.gen_range(1..=max_dim)).collect()
}

/// A tower of one or two layers: an optional lower layer on a proper subset
/// of the blocks and a top layer on all of them.
pub fn ml_tower(rng: &mut ChaCha8Rng, field: Field, space: &BlockSpace) -> MultilinearTower {
    let d = space.d();
    let mut t = MultilinearTower::new(space.clone(), field);
    if rng.gen_bool(0.5) {
        let support = subset(rng, d, true);
        let count = rng.gen_range(1..=2);
        let forms = (0..count)
            .map(|_| multilinear(rng, field, space, support.clone()))
            .collect();
        t.push_layer(support, forms, "lower")
            .expect("forms live on the support");
    }
    let all: Vec<usize> = (0..d).collect();
    let count = rng.gen_range(1..=2);
    let forms = (0..count)
        .map(|_| multilinear(rng, field, space, all.clone()))
        .collect();
    t.push_layer(all, forms, "top").expect("forms live on the support");
    t
}

pub fn pick<T: Clone>(rng: &mut ChaCha8Rng, items: &[T]) -> T {
    items.choose(rng).expect("nonempty choice").clone()
}
