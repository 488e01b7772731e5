//! `(A,B,r)`-strength audits and the regularization of systems of forms.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::field::Scalar;
use crate::ideal::ideal_membership;
use crate::multilinear::MultilinearTower;
use crate::poly::Form;
use crate::rank::{collective_partition_rank, collective_strength_at_most, CollectiveCap, Rank, RankBound};
use crate::tower::Tower;

fn ser_rational<S: Serializer>(q: &BigRational, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&q.to_string())
}

fn ser_big<S: Serializer>(v: &[BigInt], s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_seq(v.iter().map(|x| x.to_string()))
}

/// Parameters of `(A,B,r)`-strength.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct StrongnessParams {
    #[serde(serialize_with = "ser_rational")]
    pub a: BigRational,
    pub b: u32,
    pub r: u64,
}

impl StrongnessParams {
    pub fn new(a: BigRational, b: u32, r: u64) -> Result<Self> {
        if !a.is_positive() {
            return Err(Error::invalid("A must be positive"));
        }
        if b == 0 {
            return Err(Error::invalid("B must be at least 1"));
        }
        Ok(StrongnessParams { a, b, r })
    }

    pub fn integral(a: i64, b: u32, r: u64) -> Result<Self> {
        StrongnessParams::new(BigRational::from_integer(a.into()), b, r)
    }
}

/// Where the per-layer thresholds come from.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "style", rename_all = "lowercase")]
pub enum Thresholds {
    /// `A (s_i + ... + s_h + r)^B` on the current tower.
    Definitional(StrongnessParams),
    /// `C n_e^D` with `n` indexed by degree, fixed in advance.
    Recursion {
        #[serde(serialize_with = "ser_rational")]
        c: BigRational,
        d: u32,
        #[serde(serialize_with = "ser_big")]
        n: Vec<BigInt>,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ThresholdStyle {
    Definitional,
    Recursion,
}

impl Thresholds {
    pub fn style(&self) -> ThresholdStyle {
        match self {
            Thresholds::Definitional(_) => ThresholdStyle::Definitional,
            Thresholds::Recursion { .. } => ThresholdStyle::Recursion,
        }
    }

    /// The threshold for layer `i` of `t`.
    pub fn at(&self, t: &Tower, i: usize) -> BigRational {
        match self {
            Thresholds::Definitional(p) => {
                let base = BigInt::from(t.size_from(i) as u64 + p.r);
                &p.a * BigRational::from_integer(num_traits::pow(base, p.b as usize))
            }
            Thresholds::Recursion { c, d, n } => {
                let e = t.layers()[i].degree as usize;
                let ne = n.get(e - 1).cloned().unwrap_or_else(BigInt::zero);
                c * BigRational::from_integer(num_traits::pow(ne, *d as usize))
            }
        }
    }
}

fn floor_u64(q: &BigRational) -> u64 {
    q.floor().to_integer().to_u64().unwrap_or(u64::MAX)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Inconclusive,
    Fail,
}

#[derive(Clone, Debug, Serialize)]
pub struct LayerAudit {
    pub layer: usize,
    pub degree: u32,
    pub forms: usize,
    #[serde(serialize_with = "ser_rational")]
    pub threshold: BigRational,
    pub strength: RankBound,
    pub verdict: Verdict,
    /// A combination of strength at most the threshold, when one was found.
    pub combination: Option<Vec<String>>,
}

#[derive(Clone, Debug, Serialize)]
pub struct AuditReport {
    pub thresholds: Thresholds,
    pub layers: Vec<LayerAudit>,
    pub verdict: Verdict,
}

/// Compares the collective strength of each layer modulo the layers below
/// against its threshold.
pub fn audit_strength(t: &Tower, thresholds: &Thresholds, budget: u64) -> Result<AuditReport> {
    let mut layers = Vec::new();
    for i in 0..t.height() {
        let layer = &t.layers()[i];
        let thr = thresholds.at(t, i);
        let cap = floor_u64(&thr);
        let below = t.below(i);
        let out = if thr.is_negative() {
            CollectiveCap::Exceeds
        } else {
            collective_strength_at_most(&layer.forms, &below, cap, budget)?
        };
        let (strength, verdict, combination) = match out {
            CollectiveCap::Within {
                combination,
                certificate,
            } => (
                RankBound::bracket(
                    Rank::Finite(0),
                    Rank::Finite(certificate.len() as u64),
                    vec![format!("upper: certificate for a combination, at most {cap}")],
                ),
                Verdict::Fail,
                Some(combination.iter().map(Scalar::to_string).collect()),
            ),
            CollectiveCap::Exceeds => (
                RankBound::bracket(
                    Rank::Finite(cap.saturating_add(1)),
                    Rank::Infinite,
                    vec![format!("lower: every combination exceeds {cap}")],
                ),
                Verdict::Pass,
                None,
            ),
            CollectiveCap::Unknown => (
                RankBound::bracket(
                    Rank::Finite(1),
                    Rank::Infinite,
                    vec![format!("undecided against {cap} within the budget")],
                ),
                Verdict::Inconclusive,
                None,
            ),
        };
        layers.push(LayerAudit {
            layer: i + 1,
            degree: layer.degree,
            forms: layer.forms.len(),
            threshold: thr,
            strength,
            verdict,
            combination,
        });
    }
    let verdict = layers.iter().map(|l| l.verdict).max().unwrap_or(Verdict::Pass);
    Ok(AuditReport {
        thresholds: thresholds.clone(),
        layers,
        verdict,
    })
}

/// The audit for multilinear towers, with partition rank modulo the layers
/// below in place of strength. Thresholds are `A (s_i + ... + s_h + r)^B`.
pub fn audit_partition(t: &MultilinearTower, params: &StrongnessParams, budget: u64) -> Result<AuditReport> {
    let mut layers = Vec::new();
    for i in 0..t.height() {
        let layer = &t.layers[i];
        let base = BigInt::from(t.size_from(i) as u64 + params.r);
        let thr = &params.a * BigRational::from_integer(num_traits::pow(base, params.b as usize));
        let cap = Rank::Finite(floor_u64(&thr));
        let mut below = MultilinearTower::new(t.space.clone(), t.field);
        below.layers = t.layers[..i].to_vec();
        let out = collective_partition_rank(&layer.forms, Some(&below), budget)?;
        let verdict = if out.bound.lower > cap {
            Verdict::Pass
        } else if out.bound.upper <= cap {
            Verdict::Fail
        } else {
            Verdict::Inconclusive
        };
        let combination = match verdict {
            Verdict::Fail => out.combination.map(|c| c.iter().map(Scalar::to_string).collect()),
            _ => None,
        };
        layers.push(LayerAudit {
            layer: i + 1,
            degree: layer.support.len() as u32,
            forms: layer.forms.len(),
            threshold: thr,
            strength: out.bound,
            verdict,
            combination,
        });
    }
    let verdict = layers.iter().map(|l| l.verdict).max().unwrap_or(Verdict::Pass);
    Ok(AuditReport {
        thresholds: Thresholds::Definitional(params.clone()),
        layers,
        verdict,
    })
}

/// `n_d = m_d`, `n_i = m_i + C n_{i+1}^{D+1}`, indexed by degree `1..=d`.
/// A non-integral product is rounded up.
pub fn predicted_size(m: &[u64], c: &BigRational, d: u32) -> Vec<BigInt> {
    let mut n = vec![BigInt::zero(); m.len()];
    for i in (0..m.len()).rev() {
        let above = if i + 1 < m.len() {
            let p = c * BigRational::from_integer(num_traits::pow(n[i + 1].clone(), d as usize + 1));
            p.ceil().to_integer()
        } else {
            BigInt::zero()
        };
        n[i] = BigInt::from(m[i]) + above;
    }
    n
}

/// A bound `U_e` on the number of forms that ever occupy layers of degree
/// `≥ e` during [`regularize`], indexed by degree:
/// `U_i = m_i + U_{i+1} (1 + t_{>i})` where `t_{>i}` bounds the threshold of
/// any layer above `i`.
pub fn size_bound(m: &[u64], thresholds: &Thresholds) -> Vec<BigInt> {
    let mut u = vec![BigInt::zero(); m.len()];
    for i in (0..m.len()).rev() {
        if i + 1 == m.len() {
            u[i] = BigInt::from(m[i]);
            continue;
        }
        let above = &u[i + 1];
        let t = match thresholds {
            Thresholds::Definitional(p) => {
                let base = above + BigInt::from(p.r);
                (&p.a * BigRational::from_integer(num_traits::pow(base, p.b as usize)))
                    .floor()
                    .to_integer()
            }
            Thresholds::Recursion { c, d, n } => n[i + 1..]
                .iter()
                .map(|ne| {
                    (c * BigRational::from_integer(num_traits::pow(ne.clone(), *d as usize)))
                        .floor()
                        .to_integer()
                })
                .max()
                .unwrap_or_else(BigInt::zero),
        };
        u[i] = BigInt::from(m[i]) + above * (BigInt::one() + t);
    }
    u
}

/// `(C, D) = (2^B A^{B+1}, B^2 + B)`.
pub fn shuffle_params(a: &BigRational, b: u32) -> (BigRational, u32) {
    let two = BigRational::from_integer(BigInt::from(2));
    let c = num_traits::pow(two, b as usize) * num_traits::pow(a.clone(), b as usize + 1);
    (c, b * b + b)
}

/// Number of forms per degree `1..=d`.
pub fn degree_profile(forms: &[Form]) -> Vec<u64> {
    let d = forms.iter().map(Form::degree).max().unwrap_or(0) as usize;
    let mut m = vec![0u64; d];
    for f in forms {
        m[f.degree() as usize - 1] += 1;
    }
    m
}

#[derive(Clone, Debug, Serialize)]
pub struct RegStep {
    /// Zero-based position of the layer in the tower before the step.
    pub layer: usize,
    pub degree: u32,
    pub eliminated: usize,
    #[serde(serialize_with = "ser_form")]
    pub eliminated_form: Form,
    #[serde(serialize_with = "ser_scalars")]
    pub combination: Vec<Scalar>,
    #[serde(serialize_with = "ser_pairs")]
    pub pairs: Vec<(Form, Form)>,
    #[serde(serialize_with = "ser_form")]
    pub witness: Form,
    #[serde(serialize_with = "ser_forms")]
    pub added: Vec<Form>,
    #[serde(serialize_with = "ser_rational")]
    pub threshold: BigRational,
}

fn ser_form<S: Serializer>(f: &Form, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&f.to_string())
}

fn ser_forms<S: Serializer>(f: &[Form], s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_seq(f.iter().map(|x| x.to_string()))
}

fn ser_scalars<S: Serializer>(v: &[Scalar], s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_seq(v.iter().map(|x| x.to_string()))
}

fn ser_pairs<S: Serializer>(v: &[(Form, Form)], s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_seq(v.iter().map(|(g, h)| [g.to_string(), h.to_string()]))
}

#[derive(Clone, Debug, Serialize)]
pub struct RegularizationTrace {
    pub steps: Vec<RegStep>,
    #[serde(serialize_with = "ser_tower")]
    pub tower: Tower,
    /// Every input form lies in the ideal of the output tower.
    pub containment: bool,
    /// The budget ran out before every layer was decided.
    pub partial: bool,
    pub audit: AuditReport,
    #[serde(serialize_with = "ser_big")]
    pub predicted_size: Vec<BigInt>,
    #[serde(serialize_with = "ser_big")]
    pub size_bound: Vec<BigInt>,
}

fn ser_tower<S: Serializer>(t: &Tower, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&t.to_string())
}

#[derive(Clone, Debug)]
pub struct RegularizeOptions {
    pub c: BigRational,
    pub d: u32,
    pub r: u64,
    pub odd_only: bool,
    pub style: ThresholdStyle,
    pub budget: u64,
}

impl RegularizeOptions {
    pub fn new(c: i64, d: u32, r: u64) -> Self {
        RegularizeOptions {
            c: BigRational::from_integer(c.into()),
            d,
            r,
            odd_only: false,
            style: ThresholdStyle::Definitional,
            budget: crate::rank::DEFAULT_BUDGET,
        }
    }

    pub fn thresholds(&self, input: &[Form]) -> Result<Thresholds> {
        Ok(match self.style {
            ThresholdStyle::Definitional => {
                Thresholds::Definitional(StrongnessParams::new(self.c.clone(), self.d, self.r)?)
            }
            ThresholdStyle::Recursion => Thresholds::Recursion {
                c: self.c.clone(),
                d: self.d,
                n: predicted_size(&degree_profile(input), &self.c, self.d),
            },
        })
    }
}

/// Builds a tower from `forms` and eliminates forms from the lowest layer
/// whose collective strength modulo the layers below is at most its
/// threshold, adding one factor of each piece of the decomposition.
pub fn regularize(forms: &[Form], opts: &RegularizeOptions) -> Result<(Tower, RegularizationTrace)> {
    let first = forms.first().ok_or_else(|| Error::invalid("nothing to regularize"))?;
    let (field, n) = (first.field(), first.nvars());
    for f in forms {
        if f.is_zero() {
            return Err(Error::invalid("zero forms cannot be regularized"));
        }
        if opts.odd_only && f.degree() % 2 == 0 {
            return Err(Error::invalid(format!(
                "odd mode needs odd degrees, got {}",
                f.degree()
            )));
        }
    }
    if opts.c.is_negative() {
        return Err(Error::invalid("C must be non-negative"));
    }
    let thresholds = opts.thresholds(forms)?;
    let mut t = Tower::from_forms(field, n, forms)?;
    let mut steps = Vec::new();
    let mut used_budget = 0u64;
    let mut partial = false;
    'outer: loop {
        for i in 0..t.height() {
            let thr = thresholds.at(&t, i);
            let cap = floor_u64(&thr);
            let layer = t.layers()[i].clone();
            let below = t.below(i);
            let remaining = opts.budget.saturating_sub(used_budget);
            if remaining == 0 {
                partial = true;
                break 'outer;
            }
            match collective_strength_at_most(&layer.forms, &below, cap, remaining)? {
                CollectiveCap::Within {
                    combination,
                    certificate,
                } => {
                    used_budget += 1;
                    let j = combination
                        .iter()
                        .position(|c| !c.is_zero())
                        .expect("nonzero combination");
                    let mut added = Vec::new();
                    let removed = t.remove(i, j);
                    for (g, h) in &certificate.pairs {
                        let p = if opts.odd_only && g.degree() % 2 == 0 { h } else { g };
                        if !ideal_membership(p, &t.forms())? {
                            t.insert(p.clone())?;
                            added.push(p.clone());
                        }
                    }
                    steps.push(RegStep {
                        layer: i,
                        degree: layer.degree,
                        eliminated: j,
                        eliminated_form: removed,
                        combination,
                        pairs: certificate.pairs,
                        witness: certificate.witness,
                        added,
                        threshold: thr,
                    });
                    continue 'outer;
                }
                CollectiveCap::Exceeds => {}
                CollectiveCap::Unknown => partial = true,
            }
        }
        break;
    }
    let tower_forms = t.forms();
    let mut containment = true;
    for f in forms {
        if !ideal_membership(f, &tower_forms)? {
            containment = false;
        }
    }
    let audit = audit_strength(&t, &thresholds, opts.budget)?;
    let profile = degree_profile(forms);
    let trace = RegularizationTrace {
        steps,
        tower: t.clone(),
        containment,
        partial,
        audit,
        predicted_size: predicted_size(&profile, &opts.c, opts.d),
        size_bound: size_bound(&profile, &thresholds),
    };
    Ok((t, trace))
}

/// Re-runs the recorded steps on the input.
pub fn replay(forms: &[Form], steps: &[RegStep]) -> Result<Tower> {
    let first = forms.first().ok_or_else(|| Error::invalid("nothing to replay"))?;
    let mut t = Tower::from_forms(first.field(), first.nvars(), forms)?;
    for s in steps {
        if t.layers().get(s.layer).map(|l| l.degree) != Some(s.degree) {
            return Err(Error::invalid("trace does not match the tower"));
        }
        let removed = t.remove(s.layer, s.eliminated);
        if removed != s.eliminated_form {
            return Err(Error::invalid("trace eliminates a different form"));
        }
        for p in &s.added {
            t.insert(p.clone())?;
        }
    }
    Ok(t)
}

/// Checks that a step's decomposition equals its combination modulo the
/// layers below, using the tower before the step.
pub fn check_step(before: &Tower, s: &RegStep) -> Result<bool> {
    let layer = &before.layers()[s.layer];
    let mut comb = Form::zero(before.field(), before.nvars(), layer.degree);
    for (f, c) in layer.forms.iter().zip(&s.combination) {
        comb = comb.add(&f.scale(c))?;
    }
    let cert = crate::rank::StrengthCertificate {
        pairs: s.pairs.clone(),
        witness: s.witness.clone(),
    };
    Ok(cert.verify(&comb, &before.below(s.layer))? && cert.len() as u64 <= floor_u64(&s.threshold))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::Field;
    use crate::text::parse_form;

    fn q(s: &str, n: usize) -> Form {
        parse_form(s, Field::Rational, n).unwrap()
    }

    fn ints(v: &[BigInt]) -> Vec<i64> {
        v.iter().map(|x| x.to_i64().unwrap()).collect()
    }

    #[test]
    fn predicted_size_examples() {
        let one = BigRational::one();
        let two = BigRational::from_integer(2.into());
        assert_eq!(ints(&predicted_size(&[0, 1], &one, 1)), vec![1, 1]);
        assert_eq!(ints(&predicted_size(&[0, 0, 1], &two, 1)), vec![8, 2, 1]);
        assert_eq!(ints(&predicted_size(&[0, 0, 1], &one, 1)), vec![1, 1, 1]);
        assert_eq!(
            ints(&predicted_size(&[3, 2, 1], &BigRational::zero(), 4)),
            vec![3, 2, 1]
        );
    }

    #[test]
    fn shuffle_examples() {
        let r = |a: i64| BigRational::from_integer(a.into());
        assert_eq!(shuffle_params(&r(1), 1), (r(2), 2));
        assert_eq!(shuffle_params(&r(2), 1), (r(8), 2));
        assert_eq!(shuffle_params(&r(1), 2), (r(4), 6));
    }

    #[test]
    fn audit_examples() {
        let t = Tower::from_forms(Field::Rational, 1, &[q("x1", 1)]).unwrap();
        let p = Thresholds::Definitional(StrongnessParams::integral(5, 3, 7).unwrap());
        assert_eq!(audit_strength(&t, &p, 1000).unwrap().verdict, Verdict::Pass);
        let t = Tower::from_forms(Field::Rational, 2, &[q("x1*x2", 2)]).unwrap();
        let p = Thresholds::Definitional(StrongnessParams::integral(1, 1, 2).unwrap());
        let a = audit_strength(&t, &p, 1000).unwrap();
        assert_eq!(a.verdict, Verdict::Fail);
        assert_eq!(a.layers[0].threshold, BigRational::from_integer(3.into()));
        let e = Tower::new(Field::Rational, 2);
        assert_eq!(audit_strength(&e, &p, 1000).unwrap().verdict, Verdict::Pass);
    }

    #[test]
    fn regularize_examples() {
        let opts = RegularizeOptions::new(1, 1, 2);
        let input = [q("x1*x2", 2)];
        let (t, tr) = regularize(&input, &opts).unwrap();
        assert_eq!(t.to_string().trim(), "vars 2\nlayer 1\nx1");
        assert!(tr.containment);
        let input = [q("x1*x2 + x3*x4", 4)];
        let (t, tr) = regularize(&input, &opts).unwrap();
        assert_eq!(
            t.forms().iter().map(|f| f.to_string()).collect::<Vec<_>>(),
            vec!["x1", "x3"]
        );
        assert!(tr.containment);
        assert_eq!(replay(&input, &tr.steps).unwrap(), t);
        assert!(BigInt::from(t.size()) <= tr.size_bound[0]);
        let strong = [q("x1*x2 + x3*x4", 4)];
        let opts = RegularizeOptions::new(1, 1, 0);
        let (t, tr) = regularize(&strong, &opts).unwrap();
        assert!(tr.steps.is_empty());
        assert_eq!(t.forms(), strong.to_vec());
    }

    #[test]
    fn odd_mode_keeps_odd_factors() {
        let f = parse_form("x1^2*x2 + x3*x4*x5", Field::Prime(3), 5).unwrap();
        let mut opts = RegularizeOptions::new(1, 1, 2);
        opts.odd_only = true;
        let (t, tr) = regularize(&[f], &opts).unwrap();
        assert!(t.forms().iter().all(|g| g.degree() % 2 == 1));
        assert!(tr.containment);
    }

    #[test]
    fn partition_audit_examples() {
        let f2 = Field::Prime(2);
        let diag = "dims 2,2\nlayer\nsupport {1,2}\n(1,1) = 1\n(2,2) = 1\n";
        let t = MultilinearTower::parse(diag, f2).unwrap();
        let params = StrongnessParams::integral(1, 1, 0).unwrap();
        let report = audit_partition(&t, &params, 10_000).unwrap();
        assert_eq!(report.verdict, Verdict::Pass);
        assert_eq!(report.layers[0].strength.value(), Some(Rank::Finite(2)));
        let params = StrongnessParams::integral(1, 1, 1).unwrap();
        assert_eq!(audit_partition(&t, &params, 10_000).unwrap().verdict, Verdict::Fail);
        let two = "dims 2,2\nlayer\nsupport {1,2}\n(1,1) = 1\n(2,2) = 1\nsupport {1,2}\n(1,1) = 1\n";
        let t = MultilinearTower::parse(two, f2).unwrap();
        let report = audit_partition(&t, &StrongnessParams::integral(1, 1, 0).unwrap(), 10_000).unwrap();
        assert_eq!(report.layers[0].strength.value(), Some(Rank::Finite(1)));
    }
}
