//! Dispatch of CLI verbs to library operations.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use num_rational::BigRational;
use serde_json::{json, Value};

use regtower::bounds::{pipeline_bound, PipelineInput};
use regtower::multilinear::{
    clone_external, clone_internal, collection_compare, fix_coordinates, hasse_covers, parse_multilinear,
    MultilinearTower, SubsetCollection,
};
use regtower::rank::{
    birch_rank, collective_strength, geometric_rank, klp_interval, partition_rank, strength, RankBound,
};
use regtower::regularize::{
    audit_partition, audit_strength, predicted_size, regularize, AuditReport, RegularizeOptions, StrongnessParams,
    ThresholdStyle, Thresholds, Verdict,
};
use regtower::taylor::{polarize, taylor_expand};
use regtower::text::{content_lines, max_variable, parse_form_at};
use regtower::tower::Tower;
use regtower::{Error, Field, Form, Scalar};

use crate::verify::{self, Profile, Suite};
use crate::{Cli, CloneMode, Command, Format, Style};

pub const OK: u8 = 0;
pub const MATH_FAILURE: u8 = 1;
pub const INCONCLUSIVE: u8 = 2;
pub const INPUT_ERROR: u8 = 3;

#[derive(Debug)]
pub struct Output {
    pub status: u8,
    pub text: String,
    pub json: Value,
}

#[derive(Debug)]
pub struct CliError {
    pub status: u8,
    pub message: String,
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let status = match e {
            Error::BudgetExhausted(_) => INCONCLUSIVE,
            _ => INPUT_ERROR,
        };
        CliError {
            status,
            message: e.to_string(),
        }
    }
}

fn input_error(message: impl Into<String>) -> CliError {
    CliError {
        status: INPUT_ERROR,
        message: message.into(),
    }
}

type Res<T> = std::result::Result<T, CliError>;

impl Output {
    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Text => self.text.clone(),
            Format::Json => {
                let mut s = serde_json::to_string_pretty(&self.json).expect("json values serialize");
                s.push('\n');
                s
            }
        }
    }
}

fn read(path: &Path) -> Res<String> {
    std::fs::read_to_string(path).map_err(|e| input_error(format!("{}: {e}", path.display())))
}

/// A list of forms, one per line, or a tower file (its forms are used).
pub fn read_forms(src: &str, field: Field) -> Res<Vec<Form>> {
    read_forms_in(src, field, 0)
}

/// Variables declared by `vars n`, or the largest index mentioned.
fn ambient(src: &str) -> usize {
    content_lines(src)
        .map(|(_, t)| match t.strip_prefix("vars ") {
            Some(rest) => rest.trim().parse().unwrap_or(0),
            None => max_variable(t),
        })
        .max()
        .unwrap_or(0)
}

fn read_forms_in(src: &str, field: Field, min_vars: usize) -> Res<Vec<Form>> {
    if content_lines(src).any(|(_, l)| l.starts_with("layer")) {
        return Ok(Tower::parse(src, field)?.forms());
    }
    let mut nvars = None;
    let mut rows = Vec::new();
    for (line, text) in content_lines(src) {
        if let Some(rest) = text.strip_prefix("vars ") {
            nvars = Some(rest.trim().parse::<usize>().map_err(|_| {
                CliError::from(Error::Parse {
                    line,
                    column: 6,
                    message: "bad variable count".into(),
                })
            })?);
        } else {
            rows.push((line, text));
        }
    }
    let n = nvars
        .unwrap_or_else(|| rows.iter().map(|(_, t)| max_variable(t)).max().unwrap_or(0))
        .max(min_vars);
    let forms = rows
        .into_iter()
        .map(|(line, text)| parse_form_at(text, field, n, line))
        .collect::<regtower::Result<Vec<Form>>>()?;
    if forms.is_empty() {
        return Err(input_error("no forms in input"));
    }
    Ok(forms)
}

fn rational(s: &str, what: &str) -> Res<BigRational> {
    BigRational::from_str(s.trim()).map_err(|_| input_error(format!("{what}: `{s}` is not a rational number")))
}

fn bound_line(b: &RankBound) -> String {
    match b.value() {
        Some(v) => format!("exact {v}"),
        None => format!("bracket [{}, {}]", b.lower, b.upper),
    }
}

fn trace_lines(out: &mut String, b: &RankBound) {
    for t in &b.trace {
        let _ = writeln!(out, "# {t}");
    }
}

/// Exact values exit 0; over finite fields a bracket means the budget ran out.
fn bound_status(b: &RankBound, field: Field) -> u8 {
    if b.exact || !field.is_finite() {
        OK
    } else {
        INCONCLUSIVE
    }
}

fn verdict_status(v: Verdict) -> u8 {
    match v {
        Verdict::Pass => OK,
        Verdict::Fail => MATH_FAILURE,
        Verdict::Inconclusive => INCONCLUSIVE,
    }
}

fn scalars(v: &[Scalar]) -> String {
    v.iter().map(Scalar::to_string).collect::<Vec<_>>().join(", ")
}

fn parse_blocks(s: &str) -> Res<Vec<usize>> {
    let inner = s.trim().trim_start_matches('{').trim_end_matches('}');
    inner
        .split(',')
        .map(str::trim)
        .filter(|p| !p.is_empty())
        .map(|p| match p.parse::<usize>() {
            Ok(b) if b >= 1 => Ok(b - 1),
            _ => Err(input_error(format!("bad block label `{p}`"))),
        })
        .collect()
}

pub fn run(cli: &Cli) -> Res<Output> {
    let field: Field = cli.field.parse()?;
    let budget = cli.budget;
    match &cli.command {
        Command::Taylor { file, m } => {
            let forms = read_forms(&read(file)?, field)?;
            let mut text = String::new();
            let mut all = Vec::new();
            for f in &forms {
                let comps = taylor_expand(f, *m)?;
                let mut items = Vec::new();
                for (e, b) in &comps {
                    let _ = writeln!(text, "{e}: {}", b.form);
                    items.push(json!({ "multidegree": e.0, "form": b.form.to_string() }));
                }
                all.push(json!({ "form": f.to_string(), "blocks": m, "n": f.nvars(), "components": items }));
            }
            Ok(Output {
                status: OK,
                text,
                json: Value::Array(all),
            })
        }
        Command::Polarize { file } => {
            let forms = read_forms(&read(file)?, field)?;
            let mut text = String::new();
            let mut all = Vec::new();
            for (k, f) in forms.iter().enumerate() {
                let p = polarize(f)?;
                let dims: Vec<String> = p.space().dims.iter().map(usize::to_string).collect();
                let body = format!("dims {}\n{p}", dims.join(","));
                if k > 0 {
                    text.push('\n');
                }
                text.push_str(&body);
                all.push(Value::String(body));
            }
            Ok(Output {
                status: OK,
                text,
                json: Value::Array(all),
            })
        }
        Command::Strength { file, modulus } => {
            let src = read(file)?;
            let msrc = modulus.as_ref().map(|p| read(p)).transpose()?;
            let n = ambient(&src).max(msrc.as_deref().map_or(0, ambient));
            let forms = read_forms_in(&src, field, n)?;
            let modulus = match &msrc {
                Some(m) => read_forms_in(m, field, n)?,
                None => Vec::new(),
            };
            let mut text = String::new();
            if forms.len() == 1 {
                let r = strength(&forms[0], &modulus, budget)?;
                let _ = writeln!(text, "{}", bound_line(&r.bound));
                if let Some(c) = &r.certificate {
                    for (g, h) in &c.pairs {
                        let _ = writeln!(text, "({g}) * ({h})");
                    }
                    if !c.witness.is_zero() {
                        let _ = writeln!(text, "+ ideal part {}", c.witness);
                    }
                }
                trace_lines(&mut text, &r.bound);
                Ok(Output {
                    status: bound_status(&r.bound, field),
                    text,
                    json: json!({ "strength": r.bound, "certificate": r.certificate }),
                })
            } else {
                let r = collective_strength(&forms, &modulus, budget)?;
                let _ = writeln!(text, "{}", bound_line(&r.bound));
                if let Some(a) = &r.combination {
                    let _ = writeln!(text, "combination {}", scalars(a));
                }
                if let Some(c) = &r.certificate {
                    for (g, h) in &c.pairs {
                        let _ = writeln!(text, "({g}) * ({h})");
                    }
                }
                trace_lines(&mut text, &r.bound);
                Ok(Output {
                    status: bound_status(&r.bound, field),
                    text,
                    json: json!({
                        "collective_strength": r.bound,
                        "combination": r.combination.as_ref().map(|a| a.iter().map(Scalar::to_string).collect::<Vec<_>>()),
                        "certificate": r.certificate,
                    }),
                })
            }
        }
        Command::Prank {
            file,
            collection,
            modulus,
        } => {
            let f = parse_multilinear(&read(file)?, field)?;
            let coll = collection
                .as_deref()
                .map(|s| SubsetCollection::parse(s, f.degree()))
                .transpose()?;
            let tower = modulus
                .as_ref()
                .map(|p| read(p).and_then(|s| MultilinearTower::parse(&s, field).map_err(CliError::from)))
                .transpose()?;
            let r = partition_rank(&f, coll.as_ref(), tower.as_ref(), budget)?;
            let mut text = format!("{}\n", bound_line(&r.bound));
            for p in r.pieces.iter().flatten() {
                let set: Vec<String> = p.set.iter().map(|b| (b + 1).to_string()).collect();
                let _ = writeln!(text, "piece on {{{}}}", set.join(","));
                let _ = write!(text, "{}{}", p.g, p.h);
            }
            trace_lines(&mut text, &r.bound);
            Ok(Output {
                status: bound_status(&r.bound, field),
                text,
                json: json!({ "partition_rank": r.bound, "pieces": r.pieces, "witness": r.witness.map(|w| w.to_string()) }),
            })
        }
        Command::Brank { file } => {
            let forms = read_forms(&read(file)?, field)?;
            let brk = birch_rank(&forms, budget)?;
            let klp = klp_interval(&forms, budget)?;
            let text = format!(
                "birch rank {}\nstrength interval [{}, {}]\n",
                bound_line(&brk),
                klp.lower,
                klp.upper
            );
            Ok(Output {
                status: if brk.exact { OK } else { INCONCLUSIVE },
                text,
                json: json!({ "birch_rank": brk, "klp": klp }),
            })
        }
        Command::Grank { file, modulus, slot } => {
            let f = parse_multilinear(&read(file)?, field)?;
            let tower = modulus
                .as_ref()
                .map(|p| read(p).and_then(|s| MultilinearTower::parse(&s, field).map_err(CliError::from)))
                .transpose()?;
            let slot = match slot {
                Some(0) => return Err(input_error("slots are numbered from 1")),
                Some(s) => Some(s - 1),
                None => None,
            };
            let r = geometric_rank(&f, tower.as_ref(), slot, budget)?;
            let mut text = format!("{}\n", bound_line(&r));
            trace_lines(&mut text, &r);
            Ok(Output {
                status: if r.exact { OK } else { INCONCLUSIVE },
                text,
                json: json!({ "geometric_rank": r }),
            })
        }
        Command::Regularize {
            file,
            c,
            d,
            r,
            odd,
            style,
            out,
        } => {
            let forms = read_forms(&read(file)?, field)?;
            let mut opts = RegularizeOptions::new(0, *d, *r);
            opts.c = rational(c, "--C")?;
            opts.odd_only = *odd;
            opts.style = threshold_style(*style);
            opts.budget = budget;
            let (tower, trace) = regularize(&forms, &opts)?;
            if let Some(path) = out {
                std::fs::write(path, tower.to_string()).map_err(|e| input_error(format!("{}: {e}", path.display())))?;
            }
            let mut text = tower.to_string();
            for (k, s) in trace.steps.iter().enumerate() {
                let added: Vec<String> = s.added.iter().map(Form::to_string).collect();
                let _ = writeln!(
                    text,
                    "# step {}: layer {} (degree {}), combination ({}), eliminated {}, {} pieces, added [{}]",
                    k + 1,
                    s.layer + 1,
                    s.degree,
                    scalars(&s.combination),
                    s.eliminated_form,
                    s.pairs.len(),
                    added.join(", ")
                );
            }
            let _ = writeln!(
                text,
                "# audit {:?}, containment {}, size {}, predicted n_1 {}, bound U_1 {}",
                trace.audit.verdict,
                trace.containment,
                tower.size(),
                trace.predicted_size.first().map(|x| x.to_string()).unwrap_or_default(),
                trace.size_bound.first().map(|x| x.to_string()).unwrap_or_default()
            );
            let status = if trace.audit.verdict == Verdict::Fail || !trace.containment {
                MATH_FAILURE
            } else if trace.partial {
                INCONCLUSIVE
            } else {
                OK
            };
            Ok(Output {
                status,
                text,
                json: serde_json::to_value(&trace).expect("trace serializes"),
            })
        }
        Command::Audit {
            file,
            c,
            d,
            r,
            style,
            multilinear,
        } => {
            let src = read(file)?;
            let a = rational(c, "--C")?;
            let report = if *multilinear {
                let t = MultilinearTower::parse(&src, field)?;
                audit_partition(&t, &StrongnessParams::new(a, *d, *r)?, budget)?
            } else {
                let t = Tower::parse(&src, field)?;
                let thresholds = match style {
                    Style::Definitional => Thresholds::Definitional(StrongnessParams::new(a, *d, *r)?),
                    Style::Recursion => Thresholds::Recursion {
                        n: predicted_size(
                            &t.layers().iter().fold(vec![0; t.max_degree() as usize], |mut m, l| {
                                m[l.degree as usize - 1] += l.forms.len() as u64;
                                m
                            }),
                            &a,
                            *d,
                        ),
                        c: a,
                        d: *d,
                    },
                };
                audit_strength(&t, &thresholds, budget)?
            };
            Ok(Output {
                status: verdict_status(report.verdict),
                text: audit_text(&report),
                json: serde_json::to_value(&report).expect("audit serializes"),
            })
        }
        Command::Clone { file, mode, blocks, m } => {
            let t = MultilinearTower::parse(&read(file)?, field)?;
            let blocks = parse_blocks(blocks)?;
            let (tower, relabel) = match mode {
                CloneMode::External => {
                    let c = clone_external(&t, &blocks, *m)?;
                    (c.tower, c.relabel)
                }
                CloneMode::Internal => (clone_internal(&t, &blocks, *m)?, Vec::new()),
            };
            let mut text = tower.to_string();
            for r in &relabel {
                let _ = writeln!(
                    text,
                    "# copy {} of block {} is block {}",
                    r.copy,
                    r.original + 1,
                    r.block + 1
                );
            }
            Ok(Output {
                status: OK,
                text,
                json: json!({ "tower": tower.to_string(), "relabel": relabel }),
            })
        }
        Command::Fix { file, blocks, point } => {
            let t = MultilinearTower::parse(&read(file)?, field)?;
            let blocks = parse_blocks(blocks)?;
            let x: Vec<Vec<Scalar>> = point
                .split(';')
                .map(|v| {
                    v.split(',')
                        .map(|c| rational(c, "--point").and_then(|q| field.from_rational(&q).map_err(CliError::from)))
                        .collect::<Res<Vec<Scalar>>>()
                })
                .collect::<Res<_>>()?;
            let fixed = fix_coordinates(&t, &blocks, &x)?;
            let mut text = fixed.tower.to_string();
            let _ = writeln!(text, "# on fiber {}", fixed.on_fiber);
            for (l, k) in &fixed.zero_forms {
                let _ = writeln!(text, "# form {} of layer {} vanishes", k + 1, l + 1);
            }
            Ok(Output {
                status: OK,
                text,
                json: json!({
                    "tower": fixed.tower.to_string(),
                    "on_fiber": fixed.on_fiber,
                    "zero_forms": fixed.zero_forms.iter().map(|(l, k)| [l + 1, k + 1]).collect::<Vec<_>>(),
                }),
            })
        }
        Command::CompareCollections { a, b, d, hasse } => {
            if *hasse {
                let covers = hasse_covers(*d);
                let mut text = String::new();
                let mut edges = Vec::new();
                for (lo, hi) in &covers {
                    let _ = writeln!(text, "{lo} < {hi}");
                    edges.push(json!([lo.to_string(), hi.to_string()]));
                }
                return Ok(Output {
                    status: OK,
                    text,
                    json: Value::Array(edges),
                });
            }
            let (Some(a), Some(b)) = (a, b) else {
                return Err(input_error("two collections are needed unless --hasse is given"));
            };
            let ca = SubsetCollection::parse(a, *d)?;
            let cb = SubsetCollection::parse(b, *d)?;
            let cmp = collection_compare(&ca, &cb)?;
            let word = serde_json::to_value(cmp).expect("comparison serializes");
            Ok(Output {
                status: OK,
                text: format!("{}\n", word.as_str().unwrap_or_default()),
                json: json!({ "a": ca.to_string(), "b": cb.to_string(), "comparison": word }),
            })
        }
        Command::Bounds { d, s, phi, assign, odd } => {
            let mut assignments = BTreeMap::new();
            for a in assign {
                let (name, value) = a
                    .split_once('=')
                    .ok_or_else(|| input_error(format!("--assign expects NAME=VALUE, got `{a}`")))?;
                assignments.insert(name.trim().to_string(), rational(value, "--assign")?);
            }
            let phi = match phi {
                Some(list) => list
                    .split(',')
                    .map(|p| match p.trim() {
                        "?" | "" => Ok(None),
                        v => rational(v, "--phi").map(Some),
                    })
                    .collect::<Res<Vec<_>>>()?,
                None => Vec::new(),
            };
            let report = pipeline_bound(&PipelineInput {
                d: *d,
                s: *s,
                phi,
                assignments,
                odd_number_field: *odd,
            })?;
            let mut text = String::new();
            for st in &report.steps {
                let _ = writeln!(
                    text,
                    "{:<18} {}{}    [{}; {}]",
                    st.step,
                    st.output,
                    st.decimal.as_ref().map(|x| format!(" ~ {x}")).unwrap_or_default(),
                    st.formula,
                    st.anchor
                );
            }
            let _ = writeln!(text, "codim bound {}", report.conclusion);
            let _ = writeln!(text, "replay {}", if report.replay_check() { "ok" } else { "MISMATCH" });
            Ok(Output {
                status: if report.replay_check() { OK } else { MATH_FAILURE },
                text,
                json: serde_json::to_value(&report).expect("report serializes"),
            })
        }
        Command::Verify { suites, count, profile } => {
            let profile = match profile {
                Some(p) => serde_json::from_str::<Profile>(&read(p)?)
                    .map_err(|e| input_error(format!("{}: {e}", p.display())))?,
                None => Profile {
                    seed: cli.seed,
                    suites: if suites.is_empty() {
                        Suite::ALL.to_vec()
                    } else {
                        suites.clone()
                    },
                    count: *count,
                    budget,
                },
            };
            let report = verify::run(&profile);
            let status = if report.failures().next().is_some() {
                MATH_FAILURE
            } else {
                OK
            };
            Ok(Output {
                status,
                text: report.to_text(),
                json: serde_json::to_value(&report).expect("report serializes"),
            })
        }
    }
}

fn threshold_style(s: Style) -> ThresholdStyle {
    match s {
        Style::Definitional => ThresholdStyle::Definitional,
        Style::Recursion => ThresholdStyle::Recursion,
    }
}

fn audit_text(r: &AuditReport) -> String {
    let mut text = String::new();
    for l in &r.layers {
        let _ = writeln!(
            text,
            "layer {} (degree {}, {} forms): {} vs threshold {} -> {:?}",
            l.layer,
            l.degree,
            l.forms,
            match l.strength.value() {
                Some(v) => v.to_string(),
                None => format!("[{}, {}]", l.strength.lower, l.strength.upper),
            },
            l.threshold,
            l.verdict
        );
        if let Some(c) = &l.combination {
            let _ = writeln!(text, "# weak combination ({})", c.join(", "));
        }
    }
    let _ = writeln!(text, "verdict {:?}", r.verdict);
    text
}
