//! Acceptance run: one PASS/FAIL line per criterion.
//!
//! Criteria 6 and 8 are expected to fail; the reasons are printed with them.
//! Any other failure makes the target exit nonzero.

use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use regtower_cli::verify::{self, Outcome, Profile, Report, Suite, Tally};

/// Criteria whose statement does not hold as written.
const KNOWN_RED: &[(u32, &str)] = &[
    (
        6,
        "literal n_1 bound: under (A,B,r) thresholds {x1x2+x3x4} with (1,1,1) already needs 2 forms \
         while n_1 = 1; the recursion-style rows and the U_1 rows are the ones that hold",
    ),
    (
        8,
        "external cloning adds layers, which raises the threshold of every layer below them; \
         a 2x2x2 tower of partition rank 2 is (1,1,0)-strong but its clone is not",
    ),
];

struct Verdict {
    id: u32,
    pass: bool,
    detail: String,
}

fn suite(s: Suite) -> (Report, Duration) {
    let profile = Profile {
        suites: vec![s],
        ..Profile::default()
    };
    let start = Instant::now();
    let report = verify::run(&profile);
    (report, start.elapsed())
}

fn total(r: &Report, s: Suite) -> Tally {
    r.tally(s, "")
}

fn first_failure(r: &Report) -> String {
    r.failures()
        .next()
        .map(|f| format!("; first failure #{} {}: {}", f.instance, f.invariant, f.detail))
        .unwrap_or_default()
}

fn tally_text(t: &Tally) -> String {
    format!(
        "{} pass, {} fail, {} quarantined, {} inconclusive",
        t.pass, t.fail, t.quarantined, t.inconclusive
    )
}

fn timed_suite(id: u32, s: Suite, limit: Duration, allow_open: bool) -> Verdict {
    let (r, took) = suite(s);
    let t = total(&r, s);
    let open = t.quarantined + t.inconclusive;
    let pass = t.fail == 0 && t.pass > 0 && (allow_open || open == 0) && took < limit;
    Verdict {
        id,
        pass,
        detail: format!(
            "{} in {:.1}s (limit {}s){}",
            tally_text(&t),
            took.as_secs_f64(),
            limit.as_secs(),
            first_failure(&r)
        ),
    }
}

fn regularization() -> Verdict {
    let (r, took) = suite(Suite::Regularize);
    let t = total(&r, Suite::Regularize);
    let failing: Vec<String> = r
        .summary
        .iter()
        .filter(|row| row.tally.fail > 0)
        .map(|row| format!("`{}` {}", row.invariant, row.tally.fail))
        .collect();
    Verdict {
        id: 6,
        pass: t.fail == 0 && took < Duration::from_secs(600),
        detail: format!(
            "{} in {:.1}s; failing rows: [{}]",
            tally_text(&t),
            took.as_secs_f64(),
            failing.join(", ")
        ),
    }
}

fn constants() -> Verdict {
    let (r, _) = suite(Suite::Constants);
    let t = total(&r, Suite::Constants);
    let names: Vec<&str> = r.records.iter().map(|x| x.invariant.as_str()).collect();
    let required = [
        "skinner_threshold(1,3) = 16",
        "genstr_threshold(25,1,3) = 1",
        "shuffle_params(1,1) = (2,2)",
    ];
    let all_there = required.iter().all(|q| names.contains(q));
    Verdict {
        id: 7,
        pass: t.fail == 0 && t.pass == r.records.len() && all_there,
        detail: format!("{}{}", tally_text(&t), first_failure(&r)),
    }
}

fn cloning() -> Verdict {
    let (r, _) = suite(Suite::Clone);
    let ext = r.tally(Suite::Clone, "external");
    let int = r.tally(Suite::Clone, "internal");
    let vacuous = r
        .records
        .iter()
        .filter(|x| x.outcome == Outcome::Pass && x.detail.contains("vacuous"))
        .count();
    Verdict {
        id: 8,
        pass: ext.fail + int.fail == 0 && ext.pass + int.pass > vacuous,
        detail: format!(
            "external: {}; internal: {}; {vacuous} vacuous{}",
            tally_text(&ext),
            tally_text(&int),
            first_failure(&r)
        ),
    }
}

fn geometry() -> Verdict {
    let (r, _) = suite(Suite::Geometry);
    let t = total(&r, Suite::Geometry);
    Verdict {
        id: 9,
        pass: t.fail == 0 && t.pass == r.records.len() && t.pass >= 20,
        detail: format!(
            "{} golden ideals, {}{}",
            r.records.len(),
            tally_text(&t),
            first_failure(&r)
        ),
    }
}

fn determinism() -> Verdict {
    let dir = tempfile::tempdir().expect("temp dir");
    let profile = dir.path().join("profile.json");
    std::fs::write(
        &profile,
        r#"{"seed": 11, "suites": ["taylor", "polarization", "klp", "rk-sing", "regularize", "clone"], "count": 6, "budget": 200000}"#,
    )
    .expect("write profile");
    let runs: Vec<(Vec<u8>, Vec<u8>)> = (0..2)
        .map(|_| {
            let text = Command::new(env!("CARGO_BIN_EXE_regtower"))
                .args(["verify", "--profile"])
                .arg(&profile)
                .output()
                .expect("binary runs");
            let json = Command::new(env!("CARGO_BIN_EXE_regtower"))
                .args(["--format", "json", "verify", "--profile"])
                .arg(&profile)
                .output()
                .expect("binary runs");
            (text.stdout, json.stdout)
        })
        .collect();
    let same = runs[0] == runs[1] && !runs[0].0.is_empty() && !runs[0].1.is_empty();
    Verdict {
        id: 10,
        pass: same,
        detail: format!(
            "text report {} bytes, json report {} bytes",
            runs[0].0.len(),
            runs[0].1.len()
        ),
    }
}

fn main() -> ExitCode {
    let verdicts = vec![
        timed_suite(1, Suite::Taylor, Duration::from_secs(10), false),
        timed_suite(2, Suite::Polarization, Duration::from_secs(300), true),
        timed_suite(3, Suite::Quadratic, Duration::from_secs(600), false),
        timed_suite(4, Suite::Klp, Duration::from_secs(600), false),
        timed_suite(5, Suite::RkSing, Duration::from_secs(600), false),
        regularization(),
        constants(),
        cloning(),
        geometry(),
        determinism(),
    ];
    let mut unexpected = Vec::new();
    for v in &verdicts {
        println!(
            "criterion {}: {} {}",
            v.id,
            if v.pass { "PASS" } else { "FAIL" },
            v.detail
        );
        match KNOWN_RED.iter().find(|(id, _)| *id == v.id) {
            Some((_, why)) if !v.pass => println!("    expected: {why}"),
            _ if !v.pass => unexpected.push(v.id),
            _ => {}
        }
    }
    if unexpected.is_empty() {
        ExitCode::SUCCESS
    } else {
        println!("unexpected failures: {unexpected:?}");
        ExitCode::FAILURE
    }
}
