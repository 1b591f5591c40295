use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use nxlab_core::harness::{run_typical, run_verify, CaseRecord, ExperimentConfig, Report};

struct Outcome {
    ok: bool,
    detail: String,
}

fn outcome(ok: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        ok,
        detail: detail.into(),
    }
}

fn verify(suite: &str, trials: Option<usize>, seed: u64) -> Report {
    let cfg = ExperimentConfig {
        suite: suite.into(),
        trials,
        seed,
        ..Default::default()
    };
    run_verify(&cfg).expect("suite runs")
}

fn check<'a>(c: &'a CaseRecord, name: &str) -> &'a nxlab_core::harness::Check {
    c.checks
        .iter()
        .find(|k| k.name == name)
        .unwrap_or_else(|| panic!("{} has no check {name}", c.id))
}

fn num(c: &CaseRecord, key: &str) -> f64 {
    c.params[key].as_f64().unwrap_or_else(|| panic!("{} lacks {key}", c.id))
}

fn flat_suite() -> Outcome {
    let r = verify("flat", Some(50), 7);
    let mut bad = Vec::new();
    for c in &r.cases {
        let (delta, radius) = (num(c, "delta"), num(c, "radius"));
        let q = check(c, "quotient").measured;
        let shift = check(c, "displacement").measured;
        let exact = check(c, "collapse_misses").measured + check(c, "identity_misses").measured;
        if !(q <= 1.0 + delta / (radius - delta) + 1e-9 && shift <= delta + 1e-12 && exact == 0.0) {
            bad.push(c.id.clone());
        }
    }
    outcome(
        r.total == 50 && r.pass == 50 && bad.is_empty(),
        format!("{}/{} configs, independent recheck failures {:?}", r.pass, r.total, bad),
    )
}

fn village_suite() -> Outcome {
    let r = verify("village", Some(20), 7);
    let mut bad = Vec::new();
    for c in &r.cases {
        let eps = num(c, "epsilon");
        let ok = check(c, "isometry_gap").measured <= 1e-9
            && check(c, "sampled_lipschitz").measured <= 1.0 + 1e-9
            && check(c, "sup_distance").measured <= eps;
        if !ok {
            bad.push(c.id.clone());
        }
    }
    outcome(
        r.total == 20 && r.passed && bad.is_empty(),
        format!("{}/{} configs, recheck failures {:?}", r.pass, r.total, bad),
    )
}

fn witness_suite() -> Outcome {
    let main = verify("witness", Some(10), 7);
    let two_point = verify("elementary", Some(20), 7);
    let mut maps = 0;
    let mut bad = Vec::new();
    for c in main.cases.iter().chain(&two_point.cases) {
        let (lambda, s, diam, eps) = (num(c, "lambda"), num(c, "s"), num(c, "diam"), num(c, "epsilon"));
        let beta = (1.0 - lambda) * s / (96.0 * (1.0 + diam));
        let bound = 1.0 - 48.0 * beta * (1.0 + diam) / s;
        let q = check(c, "min_quotient_over_lambda").measured;
        let dist = check(c, "map_distance").measured;
        maps += c.params["maps"].as_u64().unwrap_or(0);
        if !(q > lambda && q >= bound - 1e-9 && dist <= beta * eps * (1.0 + 1e-12)) {
            bad.push(c.id.clone());
        }
    }
    outcome(
        main.passed && two_point.passed && two_point.total == 20 && maps >= 100 && bad.is_empty(),
        format!(
            "{} maps over {} nets and {} two-point nets, recheck failures {:?}",
            maps, main.total, two_point.total, bad
        ),
    )
}

fn gauge_suite() -> Outcome {
    let g = verify("gauge", None, 7);
    let p = verify("phiinv", None, 7);
    let sqrt = g.cases.iter().find(|c| c.id == "gauge/sqrt").expect("sqrt case");
    let closed = check(sqrt, "ladder_closed_form").measured;
    let worst_trip = g
        .cases
        .iter()
        .map(|c| check(c, "round_trip").measured)
        .fold(0.0, f64::max);
    outcome(
        g.passed && p.passed && g.total == 4 && closed <= 1e-10 && worst_trip <= 1e-10,
        format!(
            "{} gauges, round trip {worst_trip:e}, sqrt ladder vs closed form {closed:e}",
            g.total
        ),
    )
}

fn porosity_suite() -> Outcome {
    let r = verify("porosity", None, 7);
    let case = |id: &str| {
        r.cases
            .iter()
            .find(|c| c.id == format!("porosity/{id}"))
            .unwrap_or_else(|| panic!("no case {id}"))
    };
    let ratio = check(case("reciprocals-gamma"), "gamma_over_r").measured;
    // widest gap of {1/n} inside [-r, r], halved: it sits between 1/101 and r = 1/100
    let r0 = 0.01;
    let analytic = (100..10_000)
        .map(|n| (1.0 / n as f64).min(r0) - 1.0 / (n + 1) as f64)
        .fold(0.0, f64::max)
        / 2.0
        / r0;
    let zero_hidden = check(case("reciprocals-upper-at-0"), "not_detected").measured == 1.0;
    let beta = check(case("reciprocals-lower-at-half"), "constant").measured;
    let origin_err = (0..4)
        .map(|i| check(case(&format!("origin-gamma-{i}")), "relative_error").measured)
        .fold(0.0, f64::max);
    outcome(
        r.passed
            && ratio <= 0.01
            && (ratio - analytic).abs() <= 0.1 * analytic
            && zero_hidden
            && beta >= 0.25
            && origin_err <= 0.05,
        format!(
            "{}/{} cases, gamma(0,0.01)/0.01 = {ratio:.6} (analytic {analytic:.6}), \
             upper at 0 not detected = {zero_hidden}, beta at 1/2 = {beta}, \
             {{0}} gamma/r error {origin_err:e}",
            r.pass, r.total
        ),
    )
}

fn closing_check() -> Outcome {
    let r = verify("closing", None, 7);
    let worst = r
        .cases
        .iter()
        .map(|c| {
            let lambda = num(c, "lambda");
            let k = num(c, "k");
            let diam = num(c, "diam");
            let beta = (1.0 - lambda).powi(2) * (1.0 + lambda) / (97.0 * (3.0 - lambda) * k * (1.0 + diam));
            let closing = ((1.0 + lambda).powi(2) - 96.0 * (3.0 - lambda) * beta * k * (1.0 + diam))
                / ((1.0 + lambda) * (3.0 - lambda));
            closing - lambda
        })
        .fold(f64::INFINITY, f64::min);
    outcome(
        r.passed && r.total == 27 && worst > 0.0,
        format!("{} combinations, smallest margin {worst:e}", r.total),
    )
}

fn typical_experiment() -> Outcome {
    let cfg = ExperimentConfig {
        trials: Some(10),
        seed: 7,
        ..Default::default()
    };
    let r = run_typical(&cfg).expect("typical runs");
    let maps: std::collections::BTreeSet<&str> =
        r.cases.iter().map(|c| c.id.split('/').nth(1).unwrap_or("")).collect();
    let densities_ok = r.cases.iter().all(|c| {
        check(c, "net_density").measured == 1.0 && check(c, "constant_density").measured == 0.0
    });
    outcome(
        r.passed && maps.len() == 10 && densities_ok,
        format!("{} maps, {}/{} (map, j, k) cases", maps.len(), r.pass, r.total),
    )
}

fn determinism() -> Outcome {
    let run = || {
        let out = Command::new(env!("CARGO_BIN_EXE_nxlab"))
            .args(["verify", "--suite", "all", "--seed", "11"])
            .output()
            .expect("binary runs");
        (out.status.code(), out.stdout)
    };
    let (code_a, a) = run();
    let (code_b, b) = run();
    outcome(
        !a.is_empty() && a == b && code_a == code_b,
        format!("{} bytes, identical = {}, exit codes {:?}/{:?}", a.len(), a == b, code_a, code_b),
    )
}

type Criterion = (&'static str, fn() -> Outcome, Duration);

fn main() -> ExitCode {
    let criteria: [Criterion; 8] = [
        ("1 flat collapse", flat_suite, Duration::from_secs(5)),
        ("2 village perturbation", village_suite, Duration::from_secs(10)),
        ("3 net witnesses", witness_suite, Duration::from_secs(10)),
        ("4 gauges", gauge_suite, Duration::from_secs(3)),
        ("5 porosity examples", porosity_suite, Duration::from_secs(5)),
        ("6 closing inequality", closing_check, Duration::from_secs(1)),
        ("7 typicality", typical_experiment, Duration::from_secs(10)),
        ("8 determinism", determinism, Duration::from_secs(60)),
    ];
    let mut failed = 0;
    for (name, run, limit) in criteria {
        let start = Instant::now();
        let o = run();
        let took = start.elapsed();
        let ok = o.ok && took <= limit;
        if !ok {
            failed += 1;
        }
        println!(
            "{} criterion {name}: {} [{:.3}s, limit {}s]",
            if ok { "PASS" } else { "FAIL" },
            o.detail,
            took.as_secs_f64(),
            limit.as_secs()
        );
    }
    println!("acceptance: {}/8 criteria passed", 8 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
