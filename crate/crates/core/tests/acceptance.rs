//! Acceptance criteria, one PASS/FAIL line each. Runs without the libtest
//! harness so the lines always show; exits nonzero if any criterion fails.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use flatc3::canonical::{self, NormalFormCase};
use flatc3::par::Execution;
use flatc3::suite::{run_suite, run_suite_with, Report, SuiteConfig, SuiteName};
use flatc3::{rng, Variant};

const VARIANTS: [Variant; 2] = [Variant::RH, Variant::CO];

struct Outcome {
    passed: bool,
    notes: Vec<String>,
}

impl Outcome {
    fn new() -> Self {
        Outcome {
            passed: true,
            notes: Vec::new(),
        }
    }

    fn fail(&mut self, note: String) {
        self.passed = false;
        self.notes.push(note);
    }

    fn note(&mut self, note: String) {
        self.notes.push(note);
    }

    fn report(&mut self, r: &Report) {
        let line = format!(
            "{} {}: max residual {:.2e}, {} of {} samples failed",
            r.suite.name(),
            r.variant.name(),
            r.max_residual,
            r.failures.len(),
            r.samples
        );
        if r.passed {
            self.note(line);
        } else {
            let first = &r.failures[0];
            self.fail(format!("{line}; first: sample {}: {}", first.sample_index, first.detail));
        }
    }
}

fn suite(out: &mut Outcome, name: SuiteName, samples: u64, seed: u64, tol: f64) {
    for v in VARIANTS {
        let report = run_suite(&SuiteConfig::new(name, v, samples, seed, tol)).expect("valid config");
        out.report(&report);
    }
}

fn criterion_1() -> Outcome {
    let mut out = Outcome::new();
    suite(&mut out, SuiteName::AlgebraIdentities, 10_000, 1, 1e-9);
    out
}

fn criterion_2() -> Outcome {
    let mut out = Outcome::new();
    suite(&mut out, SuiteName::MorphismSharpness, 1_000, 2, 1e-9);
    out
}

fn criterion_3() -> Outcome {
    let mut out = Outcome::new();
    suite(&mut out, SuiteName::GeometryAxioms, 10_000, 3, 1e-9);
    out
}

fn criterion_4() -> Outcome {
    let mut out = Outcome::new();
    suite(&mut out, SuiteName::ShiftLemma, 1_000, 4, 1e-9);
    out
}

/// Each subcase separately so the line names which one disagrees.
fn criterion_5() -> Outcome {
    let mut out = Outcome::new();
    let tol = 1e-8;
    for case in NormalFormCase::ALL {
        let mut worst = 0.0f64;
        let mut bad = 0;
        let mut bound_failures = 0;
        for n in 0..1_000 {
            let mut r = rng::keyed(5, case.name(), n);
            let p = canonical::sample_params(case, &mut r);
            let closed = canonical::closed_form_invariant(case, &p).expect("sampled parameters are valid");
            let numeric = canonical::numeric_invariant(case, &p).expect("pipeline runs");
            let d = (closed - numeric).norm();
            worst = worst.max(d);
            if d.is_nan() || d >= tol {
                bad += 1;
            }
            let bound_ok = match case {
                NormalFormCase::C1_1 => closed.re > -1.0 && closed.re < 1.0 && closed.im == 0.0,
                NormalFormCase::C2_2 => (closed + 1.0).norm() > 0.0,
                _ => true,
            };
            if !bound_ok {
                bound_failures += 1;
            }
        }
        let line = format!(
            "{}: max |numeric − closed| {:.2e}, {} of 1000 draws ≥ {:.0e}, {} bound violations",
            case.name(),
            worst,
            bad,
            tol,
            bound_failures
        );
        if bad == 0 && bound_failures == 0 {
            out.note(line);
        } else {
            out.fail(line);
        }
    }
    out
}

fn criterion_6() -> Outcome {
    let mut out = Outcome::new();
    suite(&mut out, SuiteName::ReducePrimitive, 100, 6, 1e-9);
    out
}

fn criterion_7() -> Outcome {
    let mut out = Outcome::new();
    suite(&mut out, SuiteName::ChainInvariant, 100, 7, 1e-9);
    out
}

fn criterion_8() -> Outcome {
    let mut out = Outcome::new();
    suite(&mut out, SuiteName::EscapeMinusOne, 100, 8, 1e-9);
    out
}

fn criterion_9() -> Outcome {
    let mut out = Outcome::new();
    let sizes = [
        (SuiteName::AlgebraIdentities, 2_000),
        (SuiteName::MorphismSharpness, 500),
        (SuiteName::GeometryAxioms, 1_000),
        (SuiteName::ShiftLemma, 200),
        (SuiteName::ReducePrimitive, 50),
        (SuiteName::InvariantFormulas, 500),
        (SuiteName::ChainInvariant, 50),
        (SuiteName::EscapeMinusOne, 50),
    ];
    for (name, samples) in sizes {
        for v in VARIANTS {
            let cfg = SuiteConfig::new(name, v, samples, 9, 1e-9);
            let first = run_suite(&cfg).expect("valid config").to_json_string();
            let again = run_suite(&cfg).expect("valid config").to_json_string();
            let seq = run_suite_with(&cfg, Execution::Sequential).expect("valid config").to_json_string();
            if first != again || first != seq {
                out.fail(format!("{} {}: reports differ between runs", name.name(), v.name()));
            }
        }
    }
    if out.passed {
        out.note("16 configurations byte-identical across reruns and execution modes".into());
    }
    out
}

type Criterion = (&'static str, fn() -> Outcome, Duration);

fn main() -> ExitCode {
    let criteria: [Criterion; 9] = [
        ("algebra identities", criterion_1, Duration::from_secs(10)),
        ("sharp morphism constructor", criterion_2, Duration::from_secs(30)),
        ("geometry axioms", criterion_3, Duration::from_secs(60)),
        ("shift lemma", criterion_4, Duration::from_secs(60)),
        ("invariant formulas", criterion_5, Duration::from_secs(120)),
        ("reduction to primitive paths", criterion_6, Duration::from_secs(60)),
        ("chains of lines", criterion_7, Duration::from_secs(60)),
        ("escape from ℓ = −1", criterion_8, Duration::from_secs(60)),
        ("determinism", criterion_9, Duration::from_secs(300)),
    ];
    let mut failed = 0;
    for (i, (title, run, budget)) in criteria.into_iter().enumerate() {
        let start = Instant::now();
        let mut out = run();
        let elapsed = start.elapsed();
        if elapsed > budget {
            out.fail(format!("runtime {elapsed:.2?} over budget {budget:?}"));
        }
        println!(
            "criterion {} {:<30} {} ({:.2?})",
            i + 1,
            title,
            if out.passed { "PASS" } else { "FAIL" },
            elapsed
        );
        for note in &out.notes {
            println!("    {note}");
        }
        if !out.passed {
            failed += 1;
        }
    }
    println!("{} of 9 criteria passed", 9 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
