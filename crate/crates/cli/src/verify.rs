//! The `verify` runner: invariant suites over seeded random and golden
//! instances.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use num_bigint::BigInt;
use num_rational::BigRational;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use regtower::bounds::{genstr_threshold, shuffle_chain_holds, skinner_threshold, taylor_strong_scaling};
use regtower::geometry::{variety_dims, DEFAULT_GROEBNER_BUDGET};
use regtower::monomial::monomials_of_degree;
use regtower::multilinear::{clone_external, clone_internal, BlockSpace, MultilinearTower};
use regtower::rank::{
    collective_strength, geometric_rank, klp_interval, partition_rank, quadratic_strength, strength, strength_at_most,
    CapOutcome, Rank,
};
use regtower::regularize::{
    audit_partition, check_step, predicted_size, regularize, replay, shuffle_params, size_bound, RegularizeOptions,
    StrongnessParams, ThresholdStyle, Verdict,
};
use regtower::taylor::{block_sum, polarize, taylor_expand};
use regtower::text::parse_poly;
use regtower::tower::Tower;
use regtower::{Field, Form, Poly};

use crate::sample;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    Taylor,
    Polarization,
    Quadratic,
    Klp,
    RkSing,
    Regularize,
    Constants,
    Clone,
    Geometry,
}

impl Suite {
    pub const ALL: [Suite; 9] = [
        Suite::Taylor,
        Suite::Polarization,
        Suite::Quadratic,
        Suite::Klp,
        Suite::RkSing,
        Suite::Regularize,
        Suite::Constants,
        Suite::Clone,
        Suite::Geometry,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Taylor => "taylor",
            Suite::Polarization => "polarization",
            Suite::Quadratic => "quadratic",
            Suite::Klp => "klp",
            Suite::RkSing => "rk-sing",
            Suite::Regularize => "regularize",
            Suite::Constants => "constants",
            Suite::Clone => "clone",
            Suite::Geometry => "geometry",
        }
    }

    pub fn anchor(self) -> &'static str {
        match self {
            Suite::Taylor => "Taylor expansion identities",
            Suite::Polarization => "polarization preserves strength",
            Suite::Quadratic => "strength of quadratic forms",
            Suite::Klp => "strength against Birch rank",
            Suite::RkSing => "low partition rank gives low geometric rank",
            Suite::Regularize => "regularization into a strong tower",
            Suite::Constants => "closed-form thresholds",
            Suite::Clone => "cloning preserves strength",
            Suite::Geometry => "dimension of golden ideals",
        }
    }

    pub fn default_count(self) -> usize {
        match self {
            Suite::Taylor | Suite::Polarization => 200,
            Suite::Klp | Suite::RkSing => 100,
            Suite::Regularize => 50,
            Suite::Clone => 30,
            Suite::Quadratic => 4,
            Suite::Constants | Suite::Geometry => 1,
        }
    }

    fn stream(self) -> u32 {
        self as u32 + 1
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Profile {
    pub seed: u64,
    pub suites: Vec<Suite>,
    /// Instances per randomized suite; `None` uses each suite's default.
    pub count: Option<usize>,
    pub budget: u64,
}

impl Default for Profile {
    fn default() -> Self {
        Profile {
            seed: 0,
            suites: Suite::ALL.to_vec(),
            count: None,
            budget: regtower::rank::DEFAULT_BUDGET,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Outcome {
    Pass,
    Fail,
    Quarantined,
    Inconclusive,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Record {
    pub suite: Suite,
    pub instance: usize,
    pub invariant: String,
    pub outcome: Outcome,
    pub detail: String,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize, PartialEq, Eq)]
pub struct Tally {
    pub pass: usize,
    pub fail: usize,
    pub quarantined: usize,
    pub inconclusive: usize,
}

impl Tally {
    fn add(&mut self, o: Outcome) {
        match o {
            Outcome::Pass => self.pass += 1,
            Outcome::Fail => self.fail += 1,
            Outcome::Quarantined => self.quarantined += 1,
            Outcome::Inconclusive => self.inconclusive += 1,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SummaryRow {
    pub suite: Suite,
    pub anchor: String,
    pub invariant: String,
    #[serde(flatten)]
    pub tally: Tally,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Report {
    pub profile: Profile,
    pub summary: Vec<SummaryRow>,
    pub records: Vec<Record>,
}

impl Report {
    pub fn tally(&self, suite: Suite, invariant_prefix: &str) -> Tally {
        let mut t = Tally::default();
        for r in &self.records {
            if r.suite == suite && r.invariant.starts_with(invariant_prefix) {
                t.add(r.outcome);
            }
        }
        t
    }

    pub fn failures(&self) -> impl Iterator<Item = &Record> {
        self.records.iter().filter(|r| r.outcome == Outcome::Fail)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "seed {}", self.profile.seed);
        let w = self.summary.iter().map(|r| r.invariant.len()).max().unwrap_or(0).max(9);
        let _ = writeln!(
            out,
            "{:<13} {:<w$} {:>5} {:>5} {:>5} {:>5}  anchor",
            "suite", "invariant", "pass", "fail", "quar", "inc"
        );
        for row in &self.summary {
            let _ = writeln!(
                out,
                "{:<13} {:<w$} {:>5} {:>5} {:>5} {:>5}  {}",
                row.suite.name(),
                row.invariant,
                row.tally.pass,
                row.tally.fail,
                row.tally.quarantined,
                row.tally.inconclusive,
                row.anchor
            );
        }
        for r in self.failures() {
            let _ = writeln!(
                out,
                "FAIL {} #{} {}: {}",
                r.suite.name(),
                r.instance,
                r.invariant,
                r.detail
            );
        }
        out
    }
}

struct Ctx {
    seed: u64,
    budget: u64,
}

type Row = (String, Outcome, String);

fn row(invariant: impl Into<String>, outcome: Outcome, detail: impl Into<String>) -> Row {
    (invariant.into(), outcome, detail.into())
}

fn check(invariant: impl Into<String>, ok: bool, detail: impl Into<String>) -> Row {
    row(invariant, if ok { Outcome::Pass } else { Outcome::Fail }, detail)
}

fn errored(invariant: &str, e: regtower::Error) -> Row {
    match e {
        regtower::Error::BudgetExhausted(_) => row(invariant, Outcome::Inconclusive, e.to_string()),
        _ => row(invariant, Outcome::Fail, format!("error: {e}")),
    }
}

pub fn run(profile: &Profile) -> Report {
    let ctx = Ctx {
        seed: profile.seed,
        budget: profile.budget,
    };
    let mut suites = profile.suites.clone();
    suites.sort();
    suites.dedup();
    let mut records = Vec::new();
    for suite in suites {
        let count = match suite {
            Suite::Quadratic | Suite::Constants | Suite::Geometry => suite.default_count(),
            _ => profile.count.unwrap_or_else(|| suite.default_count()),
        };
        let rows: Vec<Vec<Row>> = (0..count).into_par_iter().map(|i| instance(&ctx, suite, i)).collect();
        for (i, rs) in rows.into_iter().enumerate() {
            for (invariant, outcome, detail) in rs {
                records.push(Record {
                    suite,
                    instance: i,
                    invariant,
                    outcome,
                    detail,
                });
            }
        }
    }
    let mut table: BTreeMap<(Suite, String), Tally> = BTreeMap::new();
    for r in &records {
        table.entry((r.suite, r.invariant.clone())).or_default().add(r.outcome);
    }
    let summary = table
        .into_iter()
        .map(|((suite, invariant), tally)| SummaryRow {
            suite,
            anchor: suite.anchor().to_string(),
            invariant,
            tally,
        })
        .collect();
    Report {
        profile: profile.clone(),
        summary,
        records,
    }
}

fn instance(ctx: &Ctx, suite: Suite, i: usize) -> Vec<Row> {
    match suite {
        Suite::Taylor => taylor_instance(ctx, i),
        Suite::Polarization => polarization_instance(ctx, i),
        Suite::Quadratic => quadratic_instance(ctx, i),
        Suite::Klp => klp_instance(ctx, i),
        Suite::RkSing => rk_sing_instance(ctx, i),
        Suite::Regularize => regularize_instance(ctx, i),
        Suite::Constants => constants_instance(i),
        Suite::Clone => clone_instance(ctx, i),
        Suite::Geometry => geometry_instance(ctx, i),
    }
}

/// The shared rational corpus: `n ≤ 3`, `d ≤ 4`, `m ≤ 3`.
fn taylor_corpus(seed: u64, i: usize) -> (Form, usize) {
    let mut rng = sample::instance_rng(seed, Suite::Taylor.stream(), i as u64);
    let n = rng.gen_range(1..=3);
    let d = rng.gen_range(1..=4);
    let m = rng.gen_range(1..=3);
    (sample::form(&mut rng, Field::Rational, n, d), m)
}

fn taylor_instance(ctx: &Ctx, i: usize) -> Vec<Row> {
    let (f, m) = taylor_corpus(ctx.seed, i);
    let comps = match taylor_expand(&f, m) {
        Ok(c) => c,
        Err(e) => return vec![errored("reconstruction", e)],
    };
    let n = f.nvars();
    let mut sum = Form::zero(Field::Rational, n * m, f.degree());
    let mut multinomial_ok = true;
    for (e, b) in &comps {
        sum = sum.add(&b.form).expect("same ring");
        let c = Field::Rational.from_u64(e.multinomial() as u64);
        multinomial_ok &= b.diagonal() == f.scale(&c);
    }
    let lifted = block_sum(&f, m).expect("block sum of a form");
    let detail = format!("f = {f}, m = {m}, {} components", comps.len());
    vec![
        check("reconstruction", sum == lifted, detail.clone()),
        check("multinomial identity", multinomial_ok, detail),
    ]
}

fn polarization_instance(ctx: &Ctx, i: usize) -> Vec<Row> {
    let mut rows = Vec::new();
    let (f, _) = taylor_corpus(ctx.seed, i);
    let q = Field::Rational;
    let diag = polarize(&f).map(|pol| {
        let d = f.degree() as usize;
        let map: Vec<usize> = (0..d * f.nvars()).map(|v| v % f.nvars()).collect();
        let back = pol.to_form().relabel(f.nvars(), &map);
        let fact: u64 = (1..=d as u64).product();
        back == f.scale(&q.from_u64(fact))
    });
    rows.push(match diag {
        Ok(ok) => check("diagonal equals d! f", ok, format!("f = {f}")),
        Err(e) => errored("diagonal equals d! f", e),
    });

    let mut rng = sample::instance_rng(ctx.seed, Suite::Polarization.stream(), i as u64);
    let field = if i.is_multiple_of(2) { Field::Prime(3) } else { Field::Prime(5) };
    let n = rng.gen_range(1..=3);
    let d = rng.gen_range(2..=3);
    let g = sample::form(&mut rng, field, n, d);
    rows.push(sandwich(&g, ctx.budget));
    rows
}

fn sandwich(f: &Form, budget: u64) -> Row {
    const NAME: &str = "strength sandwich";
    let d = f.degree();
    let p = f.field().characteristic();
    let head = format!("f = {f} over {}", f.field());
    if p != 0 && p <= d {
        return row(
            NAME,
            Outcome::Quarantined,
            format!("{head}: characteristic {p} does not exceed d = {d}"),
        );
    }
    let s = match strength(f, &[], budget) {
        Ok(r) if r.bound.exact => r.bound.upper,
        Ok(r) => return row(NAME, Outcome::Inconclusive, format!("{head}: str(f) in {}", r.bound)),
        Err(e) => return errored(NAME, e),
    };
    let Rank::Finite(s) = s else {
        return row(NAME, Outcome::Pass, format!("{head}: linear, both infinite"));
    };
    let pol = match polarize(f) {
        Ok(p) => p.to_form(),
        Err(e) => return errored(NAME, e),
    };
    match strength_at_most(&pol, &[], s - 1, budget) {
        Ok(CapOutcome::Within(cert)) => {
            return row(
                NAME,
                Outcome::Fail,
                format!("{head}: str(f) = {s} but str(pol f) <= {}", cert.len()),
            )
        }
        Ok(CapOutcome::Exceeds) => {}
        Ok(CapOutcome::Unknown) => {
            return row(
                NAME,
                Outcome::Inconclusive,
                format!("{head}: str(pol f) >= {s} undecided"),
            )
        }
        Err(e) => return errored(NAME, e),
    }
    let cap = (1u64 << d) * s;
    if f.nvars() as u64 <= cap {
        return row(
            NAME,
            Outcome::Pass,
            format!("{head}: str(f) = {s}, {s} <= str(pol f) <= n = {} <= {cap}", f.nvars()),
        );
    }
    match strength_at_most(&pol, &[], cap, budget) {
        Ok(CapOutcome::Within(_)) => row(
            NAME,
            Outcome::Pass,
            format!("{head}: str(f) = {s}, str(pol f) <= {cap}"),
        ),
        Ok(CapOutcome::Exceeds) => row(NAME, Outcome::Fail, format!("{head}: str(pol f) > 2^d str(f) = {cap}")),
        Ok(CapOutcome::Unknown) => row(NAME, Outcome::Inconclusive, format!("{head}: upper side undecided")),
        Err(e) => errored(NAME, e),
    }
}

/// Every quadratic form over `F_3` in `i + 1` variables.
fn quadratic_instance(ctx: &Ctx, i: usize) -> Vec<Row> {
    let n = i + 1;
    let f3 = Field::Prime(3);
    let monos = monomials_of_degree(n, 2);
    let total = 3u64.pow(monos.len() as u32);
    let mismatches: Vec<String> = (0..total)
        .into_par_iter()
        .filter_map(|mut code| {
            let terms: Vec<_> = monos
                .iter()
                .map(|m| {
                    let c = f3.from_u64(code % 3);
                    code /= 3;
                    (m.clone(), c)
                })
                .collect();
            let f = Form::new(Poly::from_terms(f3, n, terms), 2).expect("quadratic");
            let exhaustive = strength(&f, &[], ctx.budget).map(|r| r.bound);
            let formula = quadratic_strength(&f);
            match (exhaustive, formula) {
                (Ok(a), Ok(b)) if a.exact && b.exact && a.upper == b.upper => None,
                (a, b) => Some(format!("{f}: search {a:?}, formula {b:?}")),
            }
        })
        .collect();
    vec![check(
        format!("formula equals search, n = {n}"),
        mismatches.is_empty(),
        format!(
            "{total} forms, {} mismatches{}",
            mismatches.len(),
            mismatches.first().map(|m| format!(", e.g. {m}")).unwrap_or_default()
        ),
    )]
}

fn klp_instance(ctx: &Ctx, i: usize) -> Vec<Row> {
    const NAME: &str = "KLP bracket meets strength bracket";
    let mut rng = sample::instance_rng(ctx.seed, Suite::Klp.stream(), i as u64);
    let n = rng.gen_range(1..=5);
    let d = rng.gen_range(1..=3);
    let s = rng.gen_range(1..=2usize.min(n));
    let forms: Vec<Form> = (0..s).map(|_| sample::form(&mut rng, Field::Rational, n, d)).collect();
    let head = forms.iter().map(|f| f.to_string()).collect::<Vec<_>>().join(", ");
    let klp = match klp_interval(&forms, DEFAULT_GROEBNER_BUDGET) {
        Ok(k) => k,
        Err(e) => return vec![errored(NAME, e)],
    };
    let str_q = match collective_strength(&forms, &[], ctx.budget) {
        Ok(c) => c.bound,
        Err(e) => return vec![errored(NAME, e)],
    };
    let lo = klp.lower;
    let hi = klp.upper.min(str_q.upper);
    vec![check(
        NAME,
        lo <= hi,
        format!(
            "[{head}]: KLP [{}, {}], str over Q in {}, absolute bracket [{lo}, {hi}]",
            klp.lower, klp.upper, str_q
        ),
    )]
}

fn rk_sing_instance(ctx: &Ctx, i: usize) -> Vec<Row> {
    const NAME: &str = "grk <= prk";
    let mut rng = sample::instance_rng(ctx.seed, Suite::RkSing.stream(), i as u64);
    let f2 = Field::Prime(2);
    let space = BlockSpace::new(sample::dims(&mut rng, 3, 2)).expect("positive dims");
    let f = sample::multilinear(&mut rng, f2, &space, vec![0, 1, 2]);
    let modulus = rng.gen_bool(0.5).then(|| {
        let support = sample::subset(&mut rng, 3, true);
        let g = sample::multilinear(&mut rng, f2, &space, support.clone());
        let mut t = MultilinearTower::new(space.clone(), f2);
        t.push_layer(support, vec![g], "modulus").expect("support matches");
        t
    });
    let grk = match geometric_rank(&f, modulus.as_ref(), None, DEFAULT_GROEBNER_BUDGET) {
        Ok(g) => g,
        Err(e) => return vec![errored(NAME, e)],
    };
    let prk = match partition_rank(&f, None, modulus.as_ref(), ctx.budget) {
        Ok(p) => p.bound,
        Err(e) => return vec![errored(NAME, e)],
    };
    let detail = format!(
        "dims {:?}, {} modulus forms: grk {grk}, prk {prk}",
        space.dims,
        modulus.as_ref().map_or(0, |t| t.size())
    );
    let outcome = if grk.lower > prk.upper {
        Outcome::Fail
    } else if grk.upper <= prk.upper {
        Outcome::Pass
    } else {
        Outcome::Inconclusive
    };
    vec![row(NAME, outcome, detail)]
}

pub const REGULARIZE_PARAMS: [(i64, u32, u64); 3] = [(1, 1, 1), (1, 1, 2), (2, 1, 1)];

fn regularize_instance(ctx: &Ctx, i: usize) -> Vec<Row> {
    let mut rng = sample::instance_rng(ctx.seed, Suite::Regularize.stream(), i as u64);
    let f3 = Field::Prime(3);
    let n = rng.gen_range(1..=5);
    let s = rng.gen_range(1..=3);
    let forms: Vec<Form> = (0..s)
        .map(|_| {
            let d = rng.gen_range(1..=3);
            sample::form(&mut rng, f3, n, d)
        })
        .collect();
    let odd: Vec<Form> = forms.iter().filter(|f| f.degree() % 2 == 1).cloned().collect();
    let mut rows = Vec::new();
    for &(c, d, r) in &REGULARIZE_PARAMS {
        for style in [ThresholdStyle::Definitional, ThresholdStyle::Recursion] {
            let mut opts = RegularizeOptions::new(c, d, r);
            opts.style = style;
            opts.budget = ctx.budget;
            rows.extend(regularize_rows(&forms, &opts));
        }
        if !odd.is_empty() {
            let mut opts = RegularizeOptions::new(c, d, r);
            opts.odd_only = true;
            opts.budget = ctx.budget;
            rows.extend(regularize_rows(&odd, &opts));
        }
    }
    rows
}

fn style_name(s: ThresholdStyle) -> &'static str {
    match s {
        ThresholdStyle::Definitional => "definitional",
        ThresholdStyle::Recursion => "recursion",
    }
}

fn regularize_rows(forms: &[Form], opts: &RegularizeOptions) -> Vec<Row> {
    let tag = format!(
        "[{}{}]",
        style_name(opts.style),
        if opts.odd_only { ", odd" } else { "" }
    );
    let head = format!(
        "C={} D={} r={} on {}",
        opts.c,
        opts.d,
        opts.r,
        forms.iter().map(|f| f.to_string()).collect::<Vec<_>>().join(", ")
    );
    let (tower, trace) = match regularize(forms, opts) {
        Ok(x) => x,
        Err(e) => return vec![errored(&format!("regularize {tag}"), e)],
    };
    let size = BigInt::from(tower.size() as u64);
    let mut rows = vec![
        row(
            format!("audit pass or inconclusive {tag}"),
            match trace.audit.verdict {
                Verdict::Fail => Outcome::Fail,
                _ => Outcome::Pass,
            },
            format!("{head}: audit {:?}", trace.audit.verdict),
        ),
        check(format!("ideal containment {tag}"), trace.containment, head.clone()),
        check(
            format!("size within predicted n_1 {tag}"),
            size <= trace.predicted_size[0],
            format!(
                "{head}: size {size}, n = {:?}",
                trace.predicted_size.iter().map(|x| x.to_string()).collect::<Vec<_>>()
            ),
        ),
        check(
            format!("size within U_1 {tag}"),
            size <= trace.size_bound[0],
            format!("{head}: size {size}, U_1 = {}", trace.size_bound[0]),
        ),
    ];
    let mut before = Tower::from_forms(forms[0].field(), forms[0].nvars(), forms).expect("valid input");
    let mut steps_ok = true;
    for st in &trace.steps {
        steps_ok &= check_step(&before, st).unwrap_or(false) && st.added.iter().all(|g| g.degree() < st.degree);
        before.remove(st.layer, st.eliminated);
        for g in &st.added {
            let _ = before.insert(g.clone());
        }
    }
    steps_ok &= replay(forms, &trace.steps).map(|t| t == tower).unwrap_or(false);
    rows.push(check(
        format!("steps verify and progress {tag}"),
        steps_ok,
        format!("{head}: {} steps", trace.steps.len()),
    ));
    if opts.odd_only {
        rows.push(check(
            "odd mode emits odd degrees".to_string(),
            tower.layers().iter().all(|l| l.degree % 2 == 1),
            format!(
                "{head}: degrees {:?}",
                tower.layers().iter().map(|l| l.degree).collect::<Vec<_>>()
            ),
        ));
    }
    rows
}

fn constants_instance(_i: usize) -> Vec<Row> {
    let rat = |v: i64| BigRational::from_integer(v.into());
    let mut rows = Vec::new();
    let sk = skinner_threshold(1, 3).map(|v| v.to_string());
    rows.push(check(
        "skinner_threshold(1,3) = 16",
        sk.as_deref() == Ok("16"),
        format!("{sk:?}"),
    ));
    let gs = genstr_threshold(25, 1, 3).map(|v| v.to_string());
    rows.push(check(
        "genstr_threshold(25,1,3) = 1",
        gs.as_deref() == Ok("1"),
        format!("{gs:?}"),
    ));
    let (c, d) = shuffle_params(&rat(1), 1);
    rows.push(check(
        "shuffle_params(1,1) = (2,2)",
        c == rat(2) && d == 2,
        format!("({c}, {d})"),
    ));
    let ts = taylor_strong_scaling(&rat(2), 1, 3, 2).map(|v| v.to_string());
    rows.push(check(
        "taylor_strong_scaling(2,1,3,2) = 18",
        ts.as_deref() == Ok("18"),
        format!("{ts:?}"),
    ));
    let ps = predicted_size(&[0, 0, 1], &rat(1), 1);
    rows.push(check(
        "predicted_size((0,0,1),1,1) = (1,1,1)",
        ps == vec![BigInt::from(1); 3],
        format!("{ps:?}"),
    ));
    let chain =
        (1..4).all(|a| (1..3).all(|b| (1..4).all(|sh| (0..3).all(|r| shuffle_chain_holds(a, b, sh + 1, sh, r)))));
    rows.push(check("shuffle chain inequality", chain, "A < 4, B < 3, s_h < 4, r < 3"));
    let t = regtower::regularize::Thresholds::Definitional(StrongnessParams::integral(1, 1, 1).expect("valid"));
    let u = size_bound(&[0, 1], &t);
    rows.push(check(
        "corrected size bound U((0,1); 1,1,1) = 3",
        u[0] == BigInt::from(3),
        format!("{u:?}"),
    ));
    rows
}

/// Attempts per instance when drawing a tower that satisfies the premise.
const CLONE_DRAWS: usize = 256;

fn clone_instance(ctx: &Ctx, i: usize) -> Vec<Row> {
    let m = 2usize;
    let r = 0u64;
    let half = BigRational::new(BigInt::from(1), BigInt::from(2));
    let ext = StrongnessParams::integral(1, 1, r).expect("valid");
    let int_conclusion = StrongnessParams::new(half, 1, r).expect("valid");
    let int_premise = StrongnessParams::integral(1, 1, r).expect("valid");
    vec![
        clone_case(ctx, i, 0, "external cloning keeps (A,B,r)", &ext, &ext, |t, blocks| {
            clone_external(t, blocks, m).map(|c| c.tower)
        }),
        clone_case(
            ctx,
            i,
            1,
            "internal cloning keeps (A,B,r) from (A m^B,B,r)",
            &int_premise,
            &int_conclusion,
            |t, blocks| clone_internal(t, blocks, m),
        ),
    ]
}

/// Draws towers until one satisfies `premise`, then audits its clone.
fn clone_case(
    ctx: &Ctx,
    i: usize,
    mode: u64,
    name: &str,
    premise: &StrongnessParams,
    conclusion: &StrongnessParams,
    clone: impl Fn(&MultilinearTower, &[usize]) -> regtower::Result<MultilinearTower>,
) -> Row {
    let f2 = Field::Prime(2);
    let mut rng = sample::instance_rng(ctx.seed, Suite::Clone.stream(), ((i as u64) << 1) | mode);
    for draw in 0..CLONE_DRAWS {
        let space = BlockSpace::new(sample::dims(&mut rng, 3, 2)).expect("positive dims");
        let t = sample::ml_tower(&mut rng, f2, &space);
        let blocks = sample::subset(&mut rng, 3, false);
        match audit_partition(&t, premise, ctx.budget) {
            Ok(a) if a.verdict == Verdict::Pass => {}
            Ok(_) => continue,
            Err(e) => return errored(name, e),
        }
        let head = format!(
            "dims {:?}, I = {:?}, {} layers, draw {draw}",
            space.dims,
            blocks.iter().map(|b| b + 1).collect::<Vec<_>>(),
            t.height()
        );
        return implication(name, &t, premise, clone(&t, &blocks), conclusion, ctx.budget, &head);
    }
    row(
        name,
        Outcome::Inconclusive,
        format!("no tower satisfying the premise in {CLONE_DRAWS} draws"),
    )
}

fn implication(
    name: &str,
    t: &MultilinearTower,
    premise: &StrongnessParams,
    cloned: regtower::Result<MultilinearTower>,
    conclusion: &StrongnessParams,
    budget: u64,
    head: &str,
) -> Row {
    let before = match audit_partition(t, premise, budget) {
        Ok(a) => a.verdict,
        Err(e) => return errored(name, e),
    };
    match before {
        Verdict::Fail => return row(name, Outcome::Pass, format!("{head}: premise fails, vacuous")),
        Verdict::Inconclusive => return row(name, Outcome::Inconclusive, format!("{head}: premise undecided")),
        Verdict::Pass => {}
    }
    let cloned = match cloned {
        Ok(c) => c,
        Err(e) => return errored(name, e),
    };
    match audit_partition(&cloned, conclusion, budget) {
        Ok(a) => {
            let layers: Vec<String> = a
                .layers
                .iter()
                .map(|l| format!("{}:{}>{}?{:?}", l.layer, l.strength, l.threshold, l.verdict))
                .collect();
            let detail = format!("{head}: clone audit {}", layers.join(" "));
            match a.verdict {
                Verdict::Pass => row(name, Outcome::Pass, detail),
                Verdict::Fail => row(name, Outcome::Fail, detail),
                Verdict::Inconclusive => row(name, Outcome::Inconclusive, detail),
            }
        }
        Err(e) => errored(name, e),
    }
}

#[derive(Deserialize)]
struct GoldenCase {
    name: String,
    nvars: usize,
    generators: Vec<String>,
    dim: i64,
}

const GOLDEN: &str = include_str!("../../core/tests/data/geometry_golden.json");

fn geometry_instance(_ctx: &Ctx, _i: usize) -> Vec<Row> {
    let cases: Vec<GoldenCase> = serde_json::from_str(GOLDEN).expect("golden corpus parses");
    cases
        .par_iter()
        .map(|case| {
            let gens: regtower::Result<Vec<Poly>> = case
                .generators
                .iter()
                .map(|s| parse_poly(s, Field::Rational, case.nvars))
                .collect();
            let got = gens.and_then(|g| variety_dims(Field::Rational, case.nvars, &g, DEFAULT_GROEBNER_BUDGET));
            let name = format!("dimension: {}", case.name);
            match got {
                Ok(d) => check(
                    name,
                    d.dim == case.dim,
                    format!("computed {}, oracle {}", d.dim, case.dim),
                ),
                Err(e) => errored(&name, e),
            }
        })
        .collect()
}
