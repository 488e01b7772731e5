//! Exhaustive strength and partition rank against the brute-force sumset oracle.

use std::collections::BTreeMap;

use rayon::prelude::*;
use regtower::monomial::monomials_of_degree;
use regtower::multilinear::{BlockSpace, MultilinearForm, SubsetCollection};
use regtower::rank::{collective_strength, partition_rank, quadratic_strength, strength, Rank, DEFAULT_BUDGET};
use regtower::text::parse_form;
use regtower::{Field, Form, Poly};
use serde_json::Value;

fn oracle() -> Value {
    serde_json::from_str(include_str!("data/rank_oracle.json")).unwrap()
}

fn histogram_of(v: &Value) -> BTreeMap<u64, u64> {
    v.as_object()
        .unwrap()
        .iter()
        .map(|(k, c)| (k.parse().unwrap(), c.as_u64().unwrap()))
        .collect()
}

fn all_forms(n: usize, d: u32, p: u32) -> Vec<Form> {
    let field = Field::Prime(p);
    let mons = monomials_of_degree(n, d);
    let total = (p as u64).pow(mons.len() as u32);
    (0..total)
        .map(|mut code| {
            let terms = mons.iter().map(|m| {
                let c = field.from_u64(code % p as u64);
                code /= p as u64;
                (m.clone(), c)
            });
            Form::new(Poly::from_terms(field, n, terms.collect::<Vec<_>>()), d).unwrap()
        })
        .collect()
}

fn exact_strength(f: &Form) -> u64 {
    let r = strength(f, &[], DEFAULT_BUDGET).unwrap();
    assert!(r.bound.exact, "{f}: {}", r.bound);
    let c = r.certificate.unwrap();
    assert!(c.verify(f, &[]).unwrap(), "{f}");
    r.bound.lower.finite().unwrap()
}

fn strength_histogram(n: usize, d: u32, p: u32) -> BTreeMap<u64, u64> {
    let values: Vec<u64> = all_forms(n, d, p).par_iter().map(exact_strength).collect();
    let mut h = BTreeMap::new();
    for v in values {
        *h.entry(v).or_insert(0) += 1;
    }
    h
}

#[test]
fn quadratics_over_f3_in_four_variables() {
    let o = oracle();
    assert_eq!(
        strength_histogram(4, 2, 3),
        histogram_of(&o["quadratic_f3_n4_histogram"])
    );
}

#[test]
fn quadratics_over_f5_in_three_variables() {
    let o = oracle();
    assert_eq!(
        strength_histogram(3, 2, 5),
        histogram_of(&o["quadratic_f5_n3_histogram"])
    );
}

#[test]
fn cubics_over_f2_in_three_variables() {
    let o = oracle();
    assert_eq!(strength_histogram(3, 3, 2), histogram_of(&o["cubic_f2_n3_histogram"]));
}

#[test]
fn binary_quartics_over_f3() {
    let o = oracle();
    assert_eq!(strength_histogram(2, 4, 3), histogram_of(&o["quartic_f3_n2_histogram"]));
}

#[test]
fn quadratic_formula_matches_exhaustive_search() {
    for p in [3u32, 5] {
        let n = if p == 3 { 4 } else { 3 };
        let mismatches: Vec<String> = all_forms(n, 2, p)
            .par_iter()
            .filter_map(|f| {
                let q = quadratic_strength(f).unwrap().value().unwrap();
                let e = exact_strength(f);
                (q != Rank::Finite(e)).then(|| format!("{f}: {q} vs {e}"))
            })
            .collect();
        assert!(mismatches.is_empty(), "{mismatches:?}");
    }
}

#[test]
fn named_strength_values() {
    let o = oracle();
    let f3 = Field::Prime(3);
    let f = parse_form("x1*x2 + x3*x4", f3, 4).unwrap();
    assert_eq!(exact_strength(&f), o["str_f3_x1x2_plus_x3x4"].as_u64().unwrap());
    let m = [parse_form("x1", f3, 4).unwrap()];
    let r = strength(&f, &m, DEFAULT_BUDGET).unwrap();
    assert_eq!(
        r.bound.value(),
        Some(Rank::Finite(o["str_f3_x1x2_plus_x3x4_mod_x1"].as_u64().unwrap()))
    );
}

#[test]
fn collective_pair_over_f3() {
    let o = oracle();
    let f3 = Field::Prime(3);
    let fs = [
        parse_form("x1*x2 + x3*x4", f3, 4).unwrap(),
        parse_form("x1*x3 + x2*x4", f3, 4).unwrap(),
    ];
    let per: Vec<u64> = o["collective_f3_pair_per_tuple"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_u64().unwrap())
        .collect();
    for ((a, b), want) in [(0i64, 1i64), (1, 0), (1, 1), (1, 2)].into_iter().zip(per) {
        let g = fs[0].scale(&f3.from_i64(a)).add(&fs[1].scale(&f3.from_i64(b))).unwrap();
        assert_eq!(exact_strength(&g), want, "({a},{b})");
    }
    let r = collective_strength(&fs, &[], DEFAULT_BUDGET).unwrap();
    assert_eq!(
        r.bound.value(),
        Some(Rank::Finite(o["collective_f3_pair"].as_u64().unwrap()))
    );
}

fn all_tensors(dims: &[usize], p: u32) -> Vec<MultilinearForm> {
    let space = BlockSpace::new(dims.to_vec()).unwrap();
    let support: Vec<usize> = (0..dims.len()).collect();
    let len: usize = dims.iter().product();
    let total = (p as u64).pow(len as u32);
    (0..total)
        .map(|code| {
            let dense: Vec<u32> = (0..len)
                .map(|k| ((code / (p as u64).pow(k as u32)) % p as u64) as u32)
                .collect();
            MultilinearForm::from_dense(&regtower::linalg::ModP::new(p), &space, &support, &dense)
        })
        .collect()
}

fn prk_histogram(dims: &[usize], coll: Option<&SubsetCollection>) -> BTreeMap<u64, u64> {
    let values: Vec<u64> = all_tensors(dims, 2)
        .par_iter()
        .map(|t| {
            let r = partition_rank(t, coll, None, DEFAULT_BUDGET).unwrap();
            assert!(r.bound.exact);
            r.bound.lower.finite().unwrap()
        })
        .collect();
    let mut h = BTreeMap::new();
    for v in values {
        *h.entry(v).or_insert(0) += 1;
    }
    h
}

#[test]
fn partition_rank_of_2x2x2_tensors() {
    let o = oracle();
    assert_eq!(
        prk_histogram(&[2, 2, 2], None),
        histogram_of(&o["prk_f2_222_histogram"])
    );
}

#[test]
fn slice_and_partition_rank_of_2x2x2x2_tensors() {
    let o = oracle();
    let slice = SubsetCollection::slice(4);
    assert_eq!(
        prk_histogram(&[2, 2, 2, 2], Some(&slice)),
        histogram_of(&o["slice_rank_f2_2222_histogram"])
    );
    assert_eq!(
        prk_histogram(&[2, 2, 2, 2], None),
        histogram_of(&o["prk_f2_2222_histogram"])
    );
}
