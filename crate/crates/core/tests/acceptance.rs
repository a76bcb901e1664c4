//! One line per acceptance criterion; exits non-zero if any fails.
//!
//! Tolerances are written out here rather than taken from the library so a
//! change there cannot loosen them silently.

use std::process::Command;
use std::time::{Duration, Instant};

use qewp::cli::commands::{default_scenario, run_table1};
use qewp::cli::output::Cell;
use qewp::cli::verify::{self, CheckRecord, RATIO_SCAN};
use qewp::emission::{spontaneous, ClosedForm, PhotonFieldState};
use qewp::kinematics::{DimensionlessScenario, ModulationParams};
use qewp::oracle::QuadratureOptions;

const SEED: u64 = verify::DEFAULT_SEED;
const GRID: usize = 200;

struct Outcome {
    pass: bool,
    detail: String,
}

fn within(r: &CheckRecord, tolerance: f64) -> Outcome {
    Outcome {
        pass: r.max_rel_err <= tolerance,
        detail: format!("{} = {:.3e} <= {:.1e} over {} samples", r.name, r.max_rel_err, tolerance, r.samples),
    }
}

fn exact_zero(r: &CheckRecord) -> Outcome {
    Outcome {
        pass: r.max_rel_err == 0.0,
        detail: format!("{} worst = {:e} over {} samples", r.name, r.max_rel_err, r.samples),
    }
}

fn all(parts: Vec<Outcome>) -> Outcome {
    Outcome {
        pass: parts.iter().all(|p| p.pass),
        detail: parts.iter().map(|p| p.detail.as_str()).collect::<Vec<_>>().join("; "),
    }
}

fn timed(limit: Duration, f: impl FnOnce() -> Outcome) -> Outcome {
    let t = Instant::now();
    let mut out = f();
    let elapsed = t.elapsed();
    out.pass &= elapsed <= limit;
    out.detail.push_str(&format!("; {:.1} s (limit {} s)", elapsed.as_secs_f64(), limit.as_secs()));
    out
}

fn criterion_1(opts: &QuadratureOptions) -> Outcome {
    let closed = ClosedForm::default();
    timed(Duration::from_secs(60), || {
        let mut parts =
            vec![within(&verify::check_oracle_gaussian(&closed, GRID, SEED, 1e-8, 1e-6, opts).unwrap(), 1e-6)];
        for &ratio in &RATIO_SCAN {
            let r = verify::check_oracle_gaussian(&closed, GRID, SEED, ratio, 5.0 * ratio, opts).unwrap();
            parts.push(within(&r, 5.0 * ratio));
        }
        all(parts)
    })
}

fn criterion_2(opts: &QuadratureOptions) -> Outcome {
    let closed = ClosedForm::default();
    timed(Duration::from_secs(120), || within(&verify::check_oracle_modulated(&closed, SEED, opts).unwrap(), 1e-4))
}

fn criterion_3() -> Outcome {
    within(&verify::check_sum_rule().unwrap(), 1e-12)
}

fn criterion_4(opts: &QuadratureOptions) -> Outcome {
    let closed = ClosedForm::default();
    let record = verify::check_phaseless_nullity(&closed, SEED, opts).unwrap();
    let table = run_table1(None, opts).unwrap();
    let mut table_zero = true;
    for row in &table.rows {
        if let (Cell::Text(case), Cell::Num(d1), Cell::Num(o1)) = (&row[0], &row[2], &row[5]) {
            if case == "vacuum" || case == "fock" {
                table_zero &= d1.to_bits() == 0 && o1.to_bits() == 0;
            }
        }
    }
    all(vec![
        exact_zero(&record),
        Outcome { pass: table_zero, detail: format!("table1 phaseless rows zero: {table_zero}") },
    ])
}

fn criterion_5(opts: &QuadratureOptions) -> Outcome {
    // the closed form only sees (Υ, θ̄); any wavepacket yields the same bits
    let base = DimensionlessScenario { photon_state: PhotonFieldState::Vacuum, ..default_scenario() };
    let reference = spontaneous(base.ups, base.theta_e());
    let mut identical = true;
    for (gamma0, chirp, g) in [(0.0, 0.0, 0.0), (2.0, 1.0, 0.0), (0.6, 2.5, 1.5), (1.0, 5.0, 2.0)] {
        let modulation = (g > 0.0).then_some(ModulationParams { g_mag: g, r: 0.2, w: gamma0 / 0.2 });
        let s = DimensionlessScenario { extinction0: gamma0, chirp, modulation, ..base.clone() };
        let r = ClosedForm::default().emit(&s).unwrap();
        identical &= r.dnu2.to_bits() == reference.to_bits() && r.dnu1.to_bits() == 0;
    }
    let oracle = verify::check_vacuum_independence(opts).unwrap();
    let bound = 2.0 * 1e-4f64.powi(2) + 2.0 * 1e-8;
    all(vec![
        Outcome { pass: identical, detail: format!("closed-form vacuum independent of wavepacket: {identical}") },
        within(&oracle, bound),
    ])
}

fn criterion_6() -> Outcome {
    within(&verify::check_fig3().unwrap(), 1e-9)
}

fn criterion_7() -> Outcome {
    let (odd, maxima) = verify::check_fig4().unwrap();
    all(vec![exact_zero(&maxima), within(&odd, 1e-10), within(&verify::check_odd_harmonics().unwrap(), 1e-12)])
}

fn criterion_8() -> Outcome {
    within(&verify::check_einstein(&ClosedForm::default(), SEED).unwrap(), 1e-12)
}

fn criterion_9() -> Outcome {
    let r = verify::check_phase_average(&ClosedForm::default(), SEED).unwrap();
    let count = Outcome { pass: r.samples == 20, detail: format!("{} scenarios", r.samples) };
    all(vec![within(&r, 1e-12), count])
}

fn run_bin(args: &[&str]) -> Vec<u8> {
    let out = Command::new(env!("CARGO_BIN_EXE_qewp")).args(args).output().expect("binary runs");
    assert!(out.status.success(), "qewp {args:?} failed: {}", String::from_utf8_lossy(&out.stderr));
    out.stdout
}

fn criterion_10() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let sweep = dir.path().join("sweep.json");
    std::fs::write(
        &sweep,
        r#"{"dimensionless": {"ups": 0.05, "theta": 0.3, "eps": 0.01, "phi0": 0.2, "gamma0": 0.5, "chirp": 1.0,
            "photon_state": {"kind": "coherent", "nu0": 4.0},
            "modulation": {"g_mag": 1.0, "r": 0.25, "w": 2.0},
            "small_ratios": {"rec_over_p0": 1e-8, "qz_over_p0": 1e-8, "sig_over_p0": 1e-8, "delta": 0.0}},
           "sweep": {"axis": "w", "start": 0.0, "stop": 4.0, "steps": 41}}"#,
    )
    .unwrap();
    let sweep = sweep.to_str().unwrap();
    let runs: Vec<Vec<&str>> = vec![
        vec!["verify"],
        vec!["fig3"],
        vec!["fig4"],
        vec!["table1"],
        vec!["sweep", "--config", sweep],
        vec!["sweep", "--config", sweep, "--format", "json"],
    ];
    let mut differing = Vec::new();
    for args in &runs {
        if run_bin(args) != run_bin(args) {
            differing.push(args.join(" "));
        }
    }
    Outcome {
        pass: differing.is_empty(),
        detail: format!("{} outputs compared twice, differing: {:?}", runs.len(), differing),
    }
}

type Criterion = Box<dyn Fn() -> Outcome>;

fn main() {
    let opts = QuadratureOptions::default();
    let criteria: Vec<(&str, Criterion)> = vec![
        ("oracle equivalence, Gaussian", Box::new(move || criterion_1(&opts))),
        ("oracle equivalence, modulated", Box::new(move || criterion_2(&opts))),
        ("sum rule", Box::new(criterion_3)),
        ("Fock/vacuum first-order nullity", Box::new(move || criterion_4(&opts))),
        ("spontaneous wavepacket independence", Box::new(move || criterion_5(&opts))),
        ("fig3 cutoff", Box::new(criterion_6)),
        ("fig4 even spots only", Box::new(criterion_7)),
        ("Einstein relation", Box::new(criterion_8)),
        ("phase average", Box::new(criterion_9)),
        ("determinism", Box::new(criterion_10)),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let outcome = check();
        let verdict = if outcome.pass { "PASS" } else { "FAIL" };
        println!("{verdict} criterion {}: {name}: {}", i + 1, outcome.detail);
        if !outcome.pass {
            failed += 1;
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
