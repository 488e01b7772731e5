use regtower::geometry::{groebner, variety_dims, DEFAULT_GROEBNER_BUDGET};
use regtower::text::parse_poly;
use regtower::{Field, Poly};
use serde::Deserialize;

#[derive(Deserialize)]
struct Case {
    name: String,
    nvars: usize,
    generators: Vec<String>,
    dim: i64,
    basis: Vec<String>,
}

fn corpus() -> Vec<Case> {
    serde_json::from_str(include_str!("data/geometry_golden.json")).unwrap()
}

fn parse_all(src: &[String], n: usize) -> Vec<Poly> {
    src.iter().map(|s| parse_poly(s, Field::Rational, n).unwrap()).collect()
}

#[test]
fn dimensions_match_the_oracle() {
    for case in corpus() {
        let gens = parse_all(&case.generators, case.nvars);
        let d = variety_dims(Field::Rational, case.nvars, &gens, DEFAULT_GROEBNER_BUDGET).unwrap();
        assert_eq!(d.dim, case.dim, "{}", case.name);
        assert_eq!(d.codim, case.nvars as i64 - case.dim, "{}", case.name);
    }
}

#[test]
fn reduced_bases_match_the_oracle() {
    for case in corpus() {
        let gens = parse_all(&case.generators, case.nvars);
        let gb = groebner(Field::Rational, case.nvars, &gens, DEFAULT_GROEBNER_BUDGET).unwrap();
        let mut got: Vec<Poly> = gb.generators.clone();
        let mut want: Vec<Poly> = parse_all(&case.basis, case.nvars).iter().map(|p| p.monic()).collect();
        got.sort_by(|a, b| a.leading().unwrap().0.cmp(&b.leading().unwrap().0));
        want.sort_by(|a, b| a.leading().unwrap().0.cmp(&b.leading().unwrap().0));
        assert_eq!(got, want, "{}", case.name);
    }
}

#[test]
fn reduced_bases_are_idempotent() {
    for case in corpus() {
        let gens = parse_all(&case.generators, case.nvars);
        let gb = groebner(Field::Rational, case.nvars, &gens, DEFAULT_GROEBNER_BUDGET).unwrap();
        let again = groebner(Field::Rational, case.nvars, &gb.generators, DEFAULT_GROEBNER_BUDGET).unwrap();
        assert_eq!(gb, again, "{}", case.name);
        for g in &gens {
            assert!(gb.contains(g).unwrap(), "{}", case.name);
        }
    }
}
