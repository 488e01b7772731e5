use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use proptest::prelude::*;
use regtower::bounds::{genstr_threshold, shuffle_chain_holds, skinner_threshold, taylor_strong_scaling};
use regtower::ideal::ideal_membership;
use regtower::linalg::exact_rank;
use regtower::monomial::monomials_of_degree;
use regtower::regularize::{check_step, regularize, replay, RegularizeOptions, Verdict};
use regtower::taylor::{polarize, taylor_expand, MultiDegree};
use regtower::text::parse_form;
use regtower::tower::Tower;
use regtower::{Field, Form, Poly, Scalar};

fn form_from(field: Field, n: usize, d: u32, coeffs: &[i64]) -> Form {
    let terms: Vec<_> = monomials_of_degree(n, d)
        .into_iter()
        .zip(coeffs)
        .map(|(m, &c)| (m, field.from_i64(c)))
        .collect();
    Form::new(Poly::from_terms(field, n, terms), d).unwrap()
}

fn arb_form(field: Field, n: usize, d: u32) -> impl Strategy<Value = Form> {
    let len = monomials_of_degree(n, d).len();
    prop::collection::vec(-3i64..=3, len).prop_map(move |c| form_from(field, n, d, &c))
}

fn arb_shape() -> impl Strategy<Value = (usize, u32)> {
    (1usize..=3, 1u32..=3)
}

fn point(field: &Field, v: &[i64]) -> Vec<Scalar> {
    v.iter().map(|&x| field.from_i64(x)).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn multiplication_distributes(
        (n, d) in arb_shape(),
        seed in prop::collection::vec(-3i64..=3, 60),
    ) {
        let q = Field::Rational;
        let len = monomials_of_degree(n, d).len();
        let f = form_from(q, n, d, &seed[..len]);
        let g = form_from(q, n, d, &seed[len..2 * len]);
        let h = form_from(q, n, 1, &seed[2 * len..2 * len + n]);
        let lhs = f.add(&g).unwrap().mul(&h).unwrap();
        let rhs = f.mul(&h).unwrap().add(&g.mul(&h).unwrap()).unwrap();
        prop_assert_eq!(&lhs, &rhs);
        prop_assert_eq!(f.mul(&h).unwrap(), h.mul(&f).unwrap());
        let a = f.mul(&g).unwrap().mul(&h).unwrap();
        let b = f.mul(&g.mul(&h).unwrap()).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn text_round_trip(f in (1usize..=4, 1u32..=3).prop_flat_map(|(n, d)| arb_form(Field::Rational, n, d))) {
        prop_assume!(!f.is_zero());
        let back = parse_form(&f.to_string(), Field::Rational, f.nvars()).unwrap();
        prop_assert_eq!(back, f);
    }

    #[test]
    fn taylor_reconstruction_and_multinomials(
        f in (1usize..=3, 1u32..=4).prop_flat_map(|(n, d)| arb_form(Field::Rational, n, d)),
        m in 1usize..=3,
    ) {
        let comps = taylor_expand(&f, m).unwrap();
        let n = f.nvars();
        let mut sum = Form::zero(Field::Rational, n * m, f.degree());
        for (e, b) in &comps {
            prop_assert_eq!(e.total(), f.degree());
            sum = sum.add(&b.form).unwrap();
            let scale = Field::Rational.from_u64(e.multinomial() as u64);
            prop_assert_eq!(b.diagonal(), f.scale(&scale));
        }
        prop_assert_eq!(sum, regtower::taylor::block_sum(&f, m).unwrap());
    }

    #[test]
    fn polarization_is_symmetric_with_diagonal_dfact(
        f in (1usize..=3, 1u32..=3).prop_flat_map(|(n, d)| arb_form(Field::Rational, n, d)),
        x in prop::collection::vec(-4i64..=4, 3),
    ) {
        let q = Field::Rational;
        let d = f.degree() as usize;
        let pol = polarize(&f).unwrap();
        for (idx, c) in pol.entries() {
            let mut sorted = idx.clone();
            sorted.sort_unstable();
            prop_assert_eq!(&pol.get(&sorted), c);
        }
        let pt = point(&q, &x[..f.nvars()]);
        let lhs = pol.eval(&vec![pt.clone(); d]).unwrap();
        let fact: u64 = (1..=d as u64).product();
        prop_assert_eq!(lhs, &q.from_u64(fact) * &f.eval(&pt).unwrap());
    }

    #[test]
    fn exact_rank_matches_reduction_mod_p(rows in prop::collection::vec(prop::collection::vec(-5i64..=5, 4), 1..5)) {
        let q = Field::Rational;
        let p = Field::Prime(1_000_003);
        let mq: Vec<Vec<Scalar>> = rows.iter().map(|r| point(&q, r)).collect();
        let mp: Vec<Vec<Scalar>> = rows.iter().map(|r| point(&p, r)).collect();
        prop_assert_eq!(exact_rank(&mq), exact_rank(&mp));
    }

    #[test]
    fn generators_lie_in_their_ideal(
        gens in prop::collection::vec((1usize..=1).prop_flat_map(|_| arb_form(Field::Prime(5), 3, 2)), 1..3),
    ) {
        let gens: Vec<Form> = gens.into_iter().filter(|g| !g.is_zero()).collect();
        for g in &gens {
            prop_assert!(ideal_membership(g, &gens).unwrap());
        }
    }

    #[test]
    fn thresholds_are_monotone(m in 1u64..60, s in 1u64..6, d in 2u32..5) {
        prop_assume!(m > d as u64);
        prop_assert!(genstr_threshold(m + 1, s, d).unwrap() >= genstr_threshold(m, s, d).unwrap());
        prop_assert!(skinner_threshold(s + 1, d).unwrap() >= skinner_threshold(s, d).unwrap());
        prop_assert!(skinner_threshold(s, d + 1).unwrap() >= skinner_threshold(s, d).unwrap());
        let a = BigRational::from_integer(BigInt::from(2));
        prop_assert!(taylor_strong_scaling(&a, 1, m + 1, d).unwrap() >= taylor_strong_scaling(&a, 1, m, d).unwrap());
        prop_assert!(taylor_strong_scaling(&a, 1, m, d + 1).unwrap() >= taylor_strong_scaling(&a, 1, m, d).unwrap());
    }

    #[test]
    fn shuffle_chain(a in 1u64..5, b in 1u32..4, s_h in 1u64..6, extra in 0u64..6, r in 0u64..6) {
        prop_assert!(shuffle_chain_holds(a, b, s_h + extra, s_h, r));
    }
}

fn arb_system() -> impl Strategy<Value = Vec<Form>> {
    let f3 = Field::Prime(3);
    let one = (1u32..=3).prop_flat_map(move |d| arb_form(f3, 4, d));
    prop::collection::vec(one, 1..=2).prop_map(|v| v.into_iter().filter(|f| !f.is_zero()).collect())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn regularization_invariants(forms in arb_system(), odd in any::<bool>()) {
        prop_assume!(!forms.is_empty());
        let odd = odd && forms.iter().all(|f| f.degree() % 2 == 1);
        let mut opts = RegularizeOptions::new(1, 1, 1);
        opts.odd_only = odd;
        let (tower, trace) = regularize(&forms, &opts).unwrap();
        prop_assert!(trace.containment);
        prop_assert!(trace.audit.verdict != Verdict::Fail || trace.partial);
        prop_assert!(BigInt::from(tower.size() as u64) <= trace.size_bound[0]);
        prop_assert_eq!(&replay(&forms, &trace.steps).unwrap(), &tower);
        let mut before = Tower::from_forms(forms[0].field(), 4, &forms).unwrap();
        for s in &trace.steps {
            prop_assert!(check_step(&before, s).unwrap());
            prop_assert!(s.added.iter().all(|g| g.degree() < s.degree));
            before.remove(s.layer, s.eliminated);
            for g in &s.added {
                before.insert(g.clone()).unwrap();
            }
        }
        if odd {
            prop_assert!(tower.layers().iter().all(|l| l.degree % 2 == 1));
        }
    }
}

#[test]
fn multidegree_multinomials() {
    let mut seen = BTreeMap::new();
    seen.insert(MultiDegree(vec![2, 1]), 3u128);
    seen.insert(MultiDegree(vec![1, 1, 1]), 6);
    seen.insert(MultiDegree(vec![4]), 1);
    for (e, c) in seen {
        assert_eq!(e.multinomial(), c);
    }
}
