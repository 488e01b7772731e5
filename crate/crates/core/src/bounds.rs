//! Closed-form thresholds and a symbolic trace of how the regularization,
//! transfer and density constants compose into a codimension bound.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::regularize::{predicted_size, shuffle_params};

fn rat(v: i64) -> BigRational {
    BigRational::from_integer(v.into())
}

/// `(m - s) / (d 2^d)`: generic tuples of `s` forms of degree `d` in `m`
/// variables have absolute strength above this.
pub fn genstr_threshold(m: u64, s: u64, d: u32) -> Result<BigRational> {
    if d == 0 || m < d as u64 || s == 0 {
        return Err(Error::invalid("need m >= d >= 1 and s >= 1"));
    }
    let den = BigInt::from(d) * num_traits::pow(BigInt::from(2), d as usize);
    Ok(BigRational::new(BigInt::from(m) - BigInt::from(s), den))
}

/// `s (s+1) (d-1) 2^(d-1)`.
pub fn skinner_threshold(s: u64, d: u32) -> Result<BigInt> {
    if s == 0 || d < 2 {
        return Err(Error::invalid("need s >= 1 and d >= 2"));
    }
    Ok(BigInt::from(s) * BigInt::from(s + 1) * BigInt::from(d - 1) * num_traits::pow(BigInt::from(2), d as usize - 1))
}

/// `A m^(dB)`.
pub fn taylor_strong_scaling(a: &BigRational, b: u32, m: u64, d: u32) -> Result<BigRational> {
    if !a.is_positive() || b == 0 || m == 0 || d == 0 {
        return Err(Error::invalid("inputs must be positive"));
    }
    Ok(a * BigRational::from_integer(num_traits::pow(BigInt::from(m), (d * b) as usize)))
}

/// Exact symbolic expressions: rationals, named constants and `e`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Expr {
    Num(BigRational),
    Sym(String),
    E,
    Add(Vec<Expr>),
    Mul(Vec<Expr>),
    Pow(Box<Expr>, Box<Expr>),
}

impl Expr {
    pub fn num(v: i64) -> Expr {
        Expr::Num(rat(v))
    }

    pub fn sym(name: &str) -> Expr {
        Expr::Sym(name.to_string())
    }

    pub fn add(terms: Vec<Expr>) -> Expr {
        Expr::Add(terms).simplify()
    }

    pub fn mul(terms: Vec<Expr>) -> Expr {
        Expr::Mul(terms).simplify()
    }

    pub fn pow(base: Expr, exp: Expr) -> Expr {
        Expr::Pow(Box::new(base), Box::new(exp)).simplify()
    }

    pub fn as_num(&self) -> Option<&BigRational> {
        match self {
            Expr::Num(q) => Some(q),
            _ => None,
        }
    }

    pub fn symbols(&self) -> Vec<String> {
        let mut out = Vec::new();
        self.collect_symbols(&mut out);
        out.sort();
        out.dedup();
        out
    }

    fn collect_symbols(&self, out: &mut Vec<String>) {
        match self {
            Expr::Sym(s) => out.push(s.clone()),
            Expr::Add(v) | Expr::Mul(v) => v.iter().for_each(|e| e.collect_symbols(out)),
            Expr::Pow(b, e) => {
                b.collect_symbols(out);
                e.collect_symbols(out);
            }
            Expr::Num(_) | Expr::E => {}
        }
    }

    /// Folds numeric subterms; a power is evaluated only for a non-negative
    /// integer exponent.
    pub fn simplify(self) -> Expr {
        match self {
            Expr::Add(v) => {
                let mut acc = BigRational::zero();
                let mut rest = Vec::new();
                for t in v.into_iter().map(Expr::simplify) {
                    match t {
                        Expr::Num(q) => acc += q,
                        Expr::Add(inner) => {
                            for u in inner {
                                match u {
                                    Expr::Num(q) => acc += q,
                                    other => rest.push(other),
                                }
                            }
                        }
                        other => rest.push(other),
                    }
                }
                if !acc.is_zero() || rest.is_empty() {
                    rest.push(Expr::Num(acc));
                }
                if rest.len() == 1 {
                    rest.pop().unwrap()
                } else {
                    Expr::Add(rest)
                }
            }
            Expr::Mul(v) => {
                let mut acc = BigRational::one();
                let mut rest = Vec::new();
                for t in v.into_iter().map(Expr::simplify) {
                    match t {
                        Expr::Num(q) => acc *= q,
                        Expr::Mul(inner) => {
                            for u in inner {
                                match u {
                                    Expr::Num(q) => acc *= q,
                                    other => rest.push(other),
                                }
                            }
                        }
                        other => rest.push(other),
                    }
                }
                if acc.is_zero() {
                    return Expr::Num(acc);
                }
                if !acc.is_one() || rest.is_empty() {
                    rest.insert(0, Expr::Num(acc));
                }
                if rest.len() == 1 {
                    rest.pop().unwrap()
                } else {
                    Expr::Mul(rest)
                }
            }
            Expr::Pow(b, e) => {
                let b = b.simplify();
                let e = e.simplify();
                match (&b, &e) {
                    (_, Expr::Num(q)) if q.is_zero() => Expr::num(1),
                    (_, Expr::Num(q)) if q.is_one() => b,
                    (Expr::Num(x), Expr::Num(q)) if q.is_integer() && !q.is_negative() => {
                        match q.to_integer().to_usize() {
                            Some(k) if k <= 4096 => Expr::Num(num_traits::pow(x.clone(), k)),
                            _ => Expr::Pow(Box::new(b), Box::new(e)),
                        }
                    }
                    _ => Expr::Pow(Box::new(b), Box::new(e)),
                }
            }
            other => other,
        }
    }

    pub fn substitute(&self, env: &BTreeMap<String, Expr>) -> Expr {
        match self {
            Expr::Sym(s) => env.get(s).cloned().unwrap_or_else(|| self.clone()),
            Expr::Add(v) => Expr::Add(v.iter().map(|e| e.substitute(env)).collect()),
            Expr::Mul(v) => Expr::Mul(v.iter().map(|e| e.substitute(env)).collect()),
            Expr::Pow(b, e) => Expr::Pow(Box::new(b.substitute(env)), Box::new(e.substitute(env))),
            other => other.clone(),
        }
        .simplify()
    }

    /// Floating point rendering when no named constants remain.
    pub fn decimal(&self) -> Option<f64> {
        match self {
            Expr::Num(q) => q.to_f64(),
            Expr::E => Some(std::f64::consts::E),
            Expr::Sym(_) => None,
            Expr::Add(v) => v.iter().map(Expr::decimal).sum(),
            Expr::Mul(v) => v.iter().map(Expr::decimal).product(),
            Expr::Pow(b, e) => Some(b.decimal()?.powf(e.decimal()?)),
        }
    }

    fn precedence(&self) -> u8 {
        match self {
            Expr::Add(_) => 1,
            Expr::Mul(_) => 2,
            Expr::Pow(..) => 3,
            Expr::Num(q) if !q.is_integer() || q.is_negative() => 2,
            _ => 4,
        }
    }

    fn fmt_child(&self, f: &mut fmt::Formatter<'_>, min: u8) -> fmt::Result {
        if self.precedence() < min {
            write!(f, "({self})")
        } else {
            write!(f, "{self}")
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Num(q) => write!(f, "{q}"),
            Expr::Sym(s) => write!(f, "{s}"),
            Expr::E => write!(f, "e"),
            Expr::Add(v) => {
                for (i, t) in v.iter().enumerate() {
                    if i > 0 {
                        write!(f, " + ")?;
                    }
                    t.fmt_child(f, 1)?;
                }
                Ok(())
            }
            Expr::Mul(v) => {
                for (i, t) in v.iter().enumerate() {
                    if i > 0 {
                        write!(f, "*")?;
                    }
                    t.fmt_child(f, 3)?;
                }
                Ok(())
            }
            Expr::Pow(b, e) => {
                b.fmt_child(f, 4)?;
                write!(f, "^")?;
                e.fmt_child(f, 4)
            }
        }
    }
}

impl Serialize for Expr {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct PipelineStep {
    pub step: String,
    pub formula: String,
    /// The formula as an expression in the named inputs.
    #[serde(skip)]
    pub expr: Expr,
    pub inputs: BTreeMap<String, Expr>,
    pub output: Expr,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub decimal: Option<String>,
    pub anchor: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct PipelineReport {
    pub d: u32,
    pub s: u64,
    pub odd_number_field: bool,
    pub steps: Vec<PipelineStep>,
    pub conclusion: Expr,
}

impl PipelineReport {
    /// Recomputes every step from its recorded inputs.
    pub fn replay_check(&self) -> bool {
        self.steps.iter().all(|s| s.expr.substitute(&s.inputs) == s.output)
    }

    pub fn step(&self, name: &str) -> Option<&PipelineStep> {
        self.steps.iter().find(|s| s.step == name)
    }
}

/// Input to [`pipeline_bound`]. `phi[k]` is the Brauer constant for degree
/// `k + 2`; missing entries and unassigned constants stay symbolic.
#[derive(Clone, Debug, Default)]
pub struct PipelineInput {
    pub d: u32,
    pub s: u64,
    pub phi: Vec<Option<BigRational>>,
    pub assignments: BTreeMap<String, BigRational>,
    /// Odd degrees over a number field: the error parameter is 1 instead of
    /// the Brauer sum.
    pub odd_number_field: bool,
}

struct Builder {
    env: BTreeMap<String, Expr>,
    steps: Vec<PipelineStep>,
}

impl Builder {
    fn constant(&mut self, name: &str, assigned: &BTreeMap<String, BigRational>) {
        let v = assigned
            .get(name)
            .map(|q| Expr::Num(q.clone()))
            .unwrap_or_else(|| Expr::sym(name));
        self.env.insert(name.to_string(), v);
    }

    fn push(&mut self, step: &str, formula: &str, expr: Expr, anchor: &str) -> Expr {
        let inputs: BTreeMap<String, Expr> = expr
            .symbols()
            .into_iter()
            .filter_map(|k| self.env.get(&k).map(|v| (k, v.clone())))
            .collect();
        let output = expr.substitute(&inputs);
        let decimal = match &output {
            Expr::Num(_) => None,
            o => o.decimal().map(|x| format!("{x:.2}")),
        };
        self.env.insert(step.to_string(), output.clone());
        self.steps.push(PipelineStep {
            step: step.to_string(),
            formula: formula.to_string(),
            expr,
            inputs,
            output: output.clone(),
            decimal,
            anchor: anchor.to_string(),
        });
        output
    }
}

/// Traces the codimension bound for the rational points of `s` forms of
/// degree at most `d`.
pub fn pipeline_bound(input: &PipelineInput) -> Result<PipelineReport> {
    let d = input.d;
    let s = input.s;
    if d < 2 || s == 0 {
        return Err(Error::invalid("need d >= 2 and s >= 1"));
    }
    let mut b = Builder {
        env: BTreeMap::new(),
        steps: Vec::new(),
    };
    b.env.insert("s".into(), Expr::Num(rat(s as i64)));
    b.env.insert("d".into(), Expr::Num(rat(d as i64)));
    for name in ["C_dense", "D_dense", "C_reg", "D_reg", "A_dense", "B_dense"] {
        b.constant(name, &input.assignments);
    }
    let mut phi_terms = Vec::new();
    for k in 2..=d {
        let name = format!("phi_{k}");
        let v = match input.phi.get(k as usize - 2) {
            Some(Some(q)) => Expr::Num(q.clone()),
            _ => input
                .assignments
                .get(&name)
                .map(|q| Expr::Num(q.clone()))
                .unwrap_or_else(|| Expr::sym(&name)),
        };
        b.env.insert(name.clone(), v);
        phi_terms.push(Expr::sym(&name));
    }
    if input.odd_number_field {
        b.push(
            "error_parameter",
            "r = 1",
            Expr::num(1),
            "odd degrees over a number field",
        );
    } else {
        b.push(
            "error_parameter",
            "r = phi_2 + ... + phi_d",
            Expr::add(phi_terms),
            "Brauer constants of the field",
        );
    }
    b.push(
        "shuffle_C",
        "2^B A^(B+1) with (A, B) = (C_reg, D_reg)",
        Expr::mul(vec![
            Expr::pow(Expr::num(2), Expr::sym("D_reg")),
            Expr::pow(Expr::sym("C_reg"), Expr::add(vec![Expr::sym("D_reg"), Expr::num(1)])),
        ]),
        "threshold shuffle",
    );
    b.push(
        "shuffle_D",
        "B^2 + B with B = D_reg",
        Expr::add(vec![Expr::pow(Expr::sym("D_reg"), Expr::num(2)), Expr::sym("D_reg")]),
        "threshold shuffle",
    );
    // Size recursion for the worst profile: s + r forms in the top degree.
    b.push(
        &format!("n_{d}"),
        "n_d = m_d = s + r",
        Expr::add(vec![Expr::sym("s"), Expr::sym("error_parameter")]),
        "regularization size recursion",
    );
    for i in (1..d).rev() {
        let prev = format!("n_{}", i + 1);
        b.push(
            &format!("n_{i}"),
            &format!(
                "n_{i} = m_{i} + C n_{}^(D+1), m_{i} = 0, (C, D) = (C_reg, D_reg)",
                i + 1
            ),
            Expr::mul(vec![
                Expr::sym("C_reg"),
                Expr::pow(Expr::sym(&prev), Expr::add(vec![Expr::sym("D_reg"), Expr::num(1)])),
            ]),
            "regularization size recursion",
        );
    }
    b.push(
        "tower_size",
        "s_1 + ... + s_h <= n_1 = E (s + r)^F",
        Expr::sym("n_1"),
        "regularization size bound",
    );
    b.push(
        "skinner",
        "s(s+1)(d-1)2^(d-1)",
        Expr::Num(BigRational::from_integer(skinner_threshold(s, d)?)),
        "Birch rank needed for weak approximation",
    );
    b.push(
        "inductive_m",
        "m = d 2^d (A (s + r)^B + s)",
        Expr::mul(vec![
            Expr::sym("d"),
            Expr::pow(Expr::num(2), Expr::sym("d")),
            Expr::add(vec![
                Expr::mul(vec![
                    Expr::sym("A_dense"),
                    Expr::pow(
                        Expr::add(vec![Expr::sym("s"), Expr::sym("error_parameter")]),
                        Expr::sym("B_dense"),
                    ),
                ]),
                Expr::sym("s"),
            ]),
        ]),
        "dimension of the restriction subspace",
    );
    b.push(
        "genstr",
        "(m - s) / (d 2^d)",
        Expr::mul(vec![
            Expr::add(vec![
                Expr::sym("inductive_m"),
                Expr::mul(vec![Expr::num(-1), Expr::sym("s")]),
            ]),
            Expr::pow(
                Expr::mul(vec![Expr::sym("d"), Expr::pow(Expr::num(2), Expr::sym("d"))]),
                Expr::num(-1),
            ),
        ]),
        "generic strength on the subspace",
    );
    b.push(
        "taylor_scaling",
        "A m^(dB)",
        Expr::mul(vec![
            Expr::sym("A_dense"),
            Expr::pow(
                Expr::sym("inductive_m"),
                Expr::mul(vec![Expr::sym("d"), Expr::sym("B_dense")]),
            ),
        ]),
        "strength required before Taylor expansion",
    );
    let conclusion = b.push(
        "codim_bound",
        "codim closure(Z(K)) <= codim Z(F) <= E (s + r)^F",
        Expr::sym("tower_size"),
        "density of points on strong towers",
    );
    if !input.odd_number_field {
        b.push(
            "totally_imaginary",
            "s + e^(2d+1) replaces s + phi_2 + ... + phi_d",
            Expr::add(vec![
                Expr::sym("s"),
                Expr::Pow(
                    Box::new(Expr::E),
                    Box::new(Expr::add(vec![
                        Expr::mul(vec![Expr::num(2), Expr::sym("d")]),
                        Expr::num(1),
                    ])),
                ),
            ]),
            "Brauer constants of totally imaginary fields",
        );
    }
    Ok(PipelineReport {
        d,
        s,
        odd_number_field: input.odd_number_field,
        steps: b.steps,
        conclusion,
    })
}

/// The size recursion as exact integers; a thin wrapper used by the report.
pub fn size_vector(m: &[u64], c: i64, d: u32) -> Vec<BigInt> {
    predicted_size(m, &rat(c), d)
}

/// The shuffle chain `A (r + s_h)^B (S + A (r + s_h)^B)^B <= C (S + r)^D`
/// for `(C, D) = shuffle_params(A, B)` and `S >= s_h`.
pub fn shuffle_chain_holds(a: u64, b: u32, s_total: u64, s_h: u64, r: u64) -> bool {
    let (c, dd) = shuffle_params(&rat(a as i64), b);
    let level = BigInt::from(a) * num_traits::pow(BigInt::from(r + s_h), b as usize);
    let lhs = &level * num_traits::pow(BigInt::from(s_total) + &level, b as usize);
    let rhs = c * BigRational::from_integer(num_traits::pow(BigInt::from(s_total + r), dd as usize));
    BigRational::from_integer(lhs) <= rhs
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_forms() {
        assert_eq!(genstr_threshold(25, 1, 3).unwrap(), rat(1));
        assert_eq!(genstr_threshold(3, 3, 3).unwrap(), rat(0));
        assert_eq!(genstr_threshold(20, 4, 2).unwrap(), rat(2));
        assert_eq!(skinner_threshold(1, 3).unwrap(), BigInt::from(16));
        assert_eq!(skinner_threshold(1, 2).unwrap(), BigInt::from(4));
        assert_eq!(skinner_threshold(2, 3).unwrap(), BigInt::from(48));
        assert_eq!(taylor_strong_scaling(&rat(1), 1, 2, 2).unwrap(), rat(4));
        assert_eq!(taylor_strong_scaling(&rat(7), 3, 1, 4).unwrap(), rat(7));
        assert_eq!(taylor_strong_scaling(&rat(2), 1, 3, 2).unwrap(), rat(18));
    }

    #[test]
    fn expressions_fold_and_render() {
        let e = Expr::add(vec![Expr::num(2), Expr::sym("x"), Expr::num(3)]);
        assert_eq!(e.to_string(), "x + 5");
        let p = Expr::pow(Expr::add(vec![Expr::sym("s"), Expr::num(1)]), Expr::num(2));
        assert_eq!(p.to_string(), "(s + 1)^2");
        let mut env = BTreeMap::new();
        env.insert("s".to_string(), Expr::num(2));
        assert_eq!(p.substitute(&env), Expr::num(9));
        let seven = Expr::Pow(Box::new(Expr::E), Box::new(Expr::num(7)));
        assert_eq!(format!("{:.2}", seven.decimal().unwrap()), "1096.63");
    }

    #[test]
    fn symbolic_pipeline() {
        let r = pipeline_bound(&PipelineInput {
            d: 3,
            s: 1,
            ..Default::default()
        })
        .unwrap();
        assert!(r.replay_check());
        assert!(!r.conclusion.symbols().is_empty());
        assert_eq!(r.step("skinner").unwrap().output, Expr::num(16));
        let ti = r.step("totally_imaginary").unwrap();
        assert_eq!(ti.decimal.as_deref(), Some("1097.63"));
    }

    #[test]
    fn assigned_pipeline_is_numeric() {
        let mut assignments = BTreeMap::new();
        for k in ["C_reg", "D_reg", "A_dense", "B_dense", "C_dense", "D_dense"] {
            assignments.insert(k.to_string(), rat(1));
        }
        let r = pipeline_bound(&PipelineInput {
            d: 3,
            s: 1,
            phi: vec![Some(rat(0)), Some(rat(0))],
            assignments,
            odd_number_field: false,
        })
        .unwrap();
        assert!(r.replay_check());
        // n_3 = 1, n_2 = 1 * 1^2, n_1 = 1 * 1^2.
        assert_eq!(r.conclusion, Expr::num(1));
        assert_eq!(
            size_vector(&[0, 0, 1], 1, 1),
            vec![BigInt::from(1), BigInt::from(1), BigInt::from(1)]
        );
    }

    #[test]
    fn shuffle_chain_on_a_grid() {
        for a in 1..4 {
            for b in 1..3 {
                for s_h in 1..4 {
                    for extra in 0..3 {
                        for r in 0..3 {
                            assert!(shuffle_chain_holds(a, b, s_h + extra, s_h, r));
                        }
                    }
                }
            }
        }
    }
}
