//! Acceptance run: one line per criterion, printed straight to stdout so it
//! shows up even when the harness captures test output.
//!
//! Takes about an hour on one core. `IPINN_ACCEPTANCE_STEPS=<n>` replaces every
//! training budget with `n` for a quick smoke run; the numbers are then
//! meaningless and the lines say so.

use std::io::Write;
use std::time::Instant;

use interface_pinn::checks::{derivative_suite, geometry_suite, manufactured_suite, SuiteReport};
use interface_pinn::cli::median;
use interface_pinn::network::ActivationMode;
use interface_pinn::problems::{find, Counts, ProblemSpec};
use interface_pinn::training::{train, TrainConfig, TrainRecord};

const TEST1_COUNTS: Counts = Counts { interior: 400, boundary: 80, interface: 50, initial: 0 };
const DESK_STEPS: usize = 20_000;
/// Density sweep budget: nine runs including three at the finest triple.
const SWEEP_STEPS: usize = 5_000;
const SEEDS: [u64; 3] = [0, 1, 2];
const SUITE_SEED: u64 = 7;

#[derive(Clone, Copy, PartialEq)]
enum Status {
    Pass,
    Warn,
    Fail,
}

struct Report {
    hard_failures: Vec<usize>,
    smoke: bool,
}

impl Report {
    fn line(&mut self, n: usize, status: Status, detail: String) {
        let word = match status {
            Status::Pass => "PASS",
            Status::Warn => "WARN",
            Status::Fail => {
                self.hard_failures.push(n);
                "FAIL"
            }
        };
        let smoke = if self.smoke { " [smoke budget]" } else { "" };
        let mut out = std::io::stdout().lock();
        let lead = if n == 1 { "\n" } else { "" };
        let _ = writeln!(out, "{lead}criterion {n}: {word} — {detail}{smoke}");
        let _ = out.flush();
    }
}

fn list(v: &[f64]) -> String {
    v.iter().map(|e| format!("{e:.3e}")).collect::<Vec<_>>().join(" ")
}

fn budget(default: usize) -> usize {
    std::env::var("IPINN_ACCEPTANCE_STEPS").ok().and_then(|s| s.parse().ok()).unwrap_or(default)
}

fn suite(report: &mut Report, n: usize, r: interface_pinn::Result<SuiteReport>) {
    match r {
        Ok(r) => {
            let ok = r.passed && r.elapsed_s < 60.0;
            let status = if ok { Status::Pass } else { Status::Fail };
            report.line(n, status, format!("{} ({:.1}s)", r.line(), r.elapsed_s));
        }
        Err(e) => report.line(n, Status::Fail, format!("suite error: {e}")),
    }
}

fn desk_config(problem: &ProblemSpec, counts: Counts, steps: usize, mode: ActivationMode, seed: u64) -> TrainConfig {
    let mut c = TrainConfig::for_problem(problem, counts, steps).with_seed(seed);
    c.mode = mode;
    c.log_every = 250;
    c
}

fn run(problem: &ProblemSpec, config: &TrainConfig) -> Option<TrainRecord> {
    match train(problem, config) {
        Ok(out) => Some(out.record),
        Err(e) => {
            let _ = writeln!(std::io::stdout().lock(), "  training error ({:?}, seed {}): {e}", config.mode, config.sample_seed);
            None
        }
    }
}

/// Loss ≥100× down, validation ≥10× down, and no final-quarter validation
/// value above twice the best seen so far.
fn co_decay(record: &TrainRecord) -> (bool, String) {
    let first = &record.rows[0];
    let last = record.final_row();
    let loss_drop = first.total / last.total;
    let val_drop = first.val_rel_l2 / last.val_rel_l2;
    let quarter = last.step - last.step / 4;
    let mut best = f64::INFINITY;
    let mut worst_ratio: f64 = 0.0;
    for row in &record.rows {
        best = best.min(row.val_rel_l2);
        if row.step >= quarter {
            worst_ratio = worst_ratio.max(row.val_rel_l2 / best);
        }
    }
    let ok = loss_drop >= 100.0 && val_drop >= 10.0 && worst_ratio <= 2.0;
    (
        ok,
        format!(
            "loss {:.3e} -> {:.3e} ({loss_drop:.1}x), val {:.3e} -> {:.3e} ({val_drop:.1}x), final-quarter max/min-so-far {worst_ratio:.2}",
            first.total, last.total, first.val_rel_l2, last.val_rel_l2
        ),
    )
}

#[test]
fn acceptance_criteria() {
    let smoke = std::env::var("IPINN_ACCEPTANCE_STEPS").is_ok();
    let mut report = Report { hard_failures: Vec::new(), smoke };
    let start = Instant::now();

    suite(&mut report, 1, derivative_suite(SUITE_SEED));
    suite(&mut report, 2, geometry_suite(SUITE_SEED));
    suite(&mut report, 3, manufactured_suite(SUITE_SEED));

    let test1 = find("line2d").unwrap();
    let steps = budget(DESK_STEPS);

    // 4: seed 0 is also the first MAF seed of 5 and the run examined by 8.
    let mut maf = Vec::new();
    let mut tanh = Vec::new();
    for &seed in &SEEDS {
        maf.push(run(&test1, &desk_config(&test1, TEST1_COUNTS, steps, ActivationMode::MultiActivation, seed)));
    }
    match &maf[0] {
        Some(r) => {
            let e = r.final_val_rel_l2();
            let status = if e <= 1e-2 { Status::Pass } else { Status::Fail };
            report.line(
                4,
                status,
                format!("line2d (400,80,50) MultiActivation, {steps} steps, seed 0: rel L2 {e:.3e} (target <= 1e-2, {:.0}s)", r.wall_clock_s),
            );
        }
        None => report.line(4, Status::Fail, "training failed".into()),
    }

    for &seed in &SEEDS {
        tanh.push(run(&test1, &desk_config(&test1, TEST1_COUNTS, steps, ActivationMode::TanhOnly, seed)));
    }
    {
        let errs = |v: &[Option<TrainRecord>]| -> Vec<f64> {
            v.iter().map(|r| r.as_ref().map_or(f64::NAN, |r| r.final_val_rel_l2())).collect()
        };
        let (m, t) = (errs(&maf), errs(&tanh));
        let violated = m.iter().zip(&t).filter(|(a, b)| !(a <= b)).count();
        let (mm, mt) = (median(&mut m.clone()), median(&mut t.clone()));
        let status = if mm <= mt {
            Status::Pass
        } else if violated < SEEDS.len() {
            Status::Warn
        } else {
            Status::Fail
        };
        report.line(
            5,
            status,
            format!(
                "median MAF {mm:.3e} vs TanhOnly {mt:.3e}, ratio {:.3}; MAF worse in {violated}/3 seed pairs (MAF {}, tanh {})",
                mm / mt,
                list(&m),
                list(&t)
            ),
        );
    }

    {
        let sweep_steps = budget(SWEEP_STEPS);
        let mut medians = Vec::new();
        for &counts in &test1.density_triples {
            let mut errs: Vec<f64> = SEEDS
                .iter()
                .map(|&s| {
                    run(&test1, &desk_config(&test1, counts, sweep_steps, ActivationMode::MultiActivation, s))
                        .map_or(f64::NAN, |r| r.final_val_rel_l2())
                })
                .collect();
            medians.push((counts, median(&mut errs)));
        }
        let monotone = medians.windows(2).all(|w| w[1].1 <= w[0].1);
        let table: Vec<String> = medians
            .iter()
            .map(|(c, e)| format!("({},{},{}) {e:.3e}", c.interior, c.boundary, c.interface))
            .collect();
        report.line(
            6,
            if monotone { Status::Pass } else { Status::Warn },
            format!("MAF medians over 3 seeds at {sweep_steps} steps: {} — {}", table.join(", "), if monotone { "monotone" } else { "not monotone" }),
        );
    }

    {
        let p = find("fixed_circle").unwrap();
        let counts = Counts::new(400, 40, 40, 100);
        match run(&p, &desk_config(&p, counts, steps, ActivationMode::MultiActivation, 0)) {
            Some(r) => {
                let e = r.final_val_rel_l2();
                let status = if e <= 5e-2 { Status::Pass } else { Status::Fail };
                report.line(
                    7,
                    status,
                    format!("fixed_circle (400,40,40,100), {steps} steps: space-time rel L2 {e:.3e} (target <= 5e-2, {:.0}s)", r.wall_clock_s),
                );
            }
            None => report.line(7, Status::Fail, "training failed".into()),
        }
    }

    match &maf[0] {
        Some(r) => {
            let (ok, detail) = co_decay(r);
            report.line(8, if ok { Status::Pass } else { Status::Fail }, detail);
        }
        None => report.line(8, Status::Fail, "no criterion-4 run".into()),
    }

    match (&maf[0], run(&test1, &desk_config(&test1, TEST1_COUNTS, steps, ActivationMode::MultiActivation, 0))) {
        (Some(a), Some(b)) => {
            let same = a.to_csv() == b.to_csv();
            report.line(
                9,
                if same { Status::Pass } else { Status::Fail },
                format!("two criterion-4 runs: metrics CSVs {} ({} rows)", if same { "identical" } else { "differ" }, a.rows.len()),
            );
        }
        _ => report.line(9, Status::Fail, "training failed".into()),
    }

    let _ = writeln!(std::io::stdout().lock(), "acceptance total {:.0}s", start.elapsed().as_secs_f64());
    assert!(report.hard_failures.is_empty(), "failed criteria: {:?}", report.hard_failures);
}
