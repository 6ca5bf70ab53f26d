//! Property and oracle suites: derivative engine, interface distances,
//! manufactured data. Shared by `ipinn check` and the acceptance tests.

use std::f64::consts::PI;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::autodiff::{check_gradient, eval_jet, CheckOptions};
use crate::error::Result;
use crate::geometry::{InterfaceShape, Motion, ShapeKind};
use crate::network::{initialize, ActivationMode, Arch, NetworkOptions, NetworkParams, OmegaMode};
use crate::problems::{catalog, find, Counts, ProblemSpec};
use crate::sampling::{sample_problem, validation_points, Strategy};
use crate::training::{LossData, LossWeights};

/// Result of one suite.
#[derive(Clone, Debug)]
pub struct SuiteReport {
    pub name: &'static str,
    pub passed: bool,
    /// Number of individual comparisons.
    pub checked: usize,
    /// Worst error in the suite's own metric.
    pub worst: f64,
    pub tolerance: f64,
    pub detail: String,
    pub elapsed_s: f64,
}

impl SuiteReport {
    pub fn line(&self) -> String {
        format!(
            "{} {}: {} checks, worst {:.3e} (tol {:.0e}), {:.1}s{}",
            if self.passed { "PASS" } else { "FAIL" },
            self.name,
            self.checked,
            self.worst,
            self.tolerance,
            self.elapsed_s,
            if self.detail.is_empty() { String::new() } else { format!(" — {}", self.detail) }
        )
    }
}

/// Tracks the worst error and the first failure.
struct Tally {
    checked: usize,
    worst: f64,
    first_failure: Option<String>,
}

impl Tally {
    fn new() -> Self {
        Self { checked: 0, worst: 0.0, first_failure: None }
    }

    fn record(&mut self, err: f64, tol: f64, what: impl FnOnce() -> String) {
        self.checked += 1;
        let err = if err.is_nan() { f64::INFINITY } else { err };
        self.worst = self.worst.max(err / tol);
        if err > tol && self.first_failure.is_none() {
            self.first_failure = Some(what());
        }
    }

    /// `worst` is reported relative to `tol`, scaled back.
    fn finish(self, name: &'static str, tol: f64, extra: String, start: Instant) -> SuiteReport {
        let detail = match self.first_failure {
            Some(f) if extra.is_empty() => f,
            Some(f) => format!("{f}; {extra}"),
            None => extra,
        };
        SuiteReport {
            name,
            passed: self.worst <= 1.0,
            checked: self.checked,
            worst: self.worst * tol,
            tolerance: tol,
            detail,
            elapsed_s: start.elapsed().as_secs_f64(),
        }
    }
}

fn rel_err(a: f64, b: f64, floor: f64) -> f64 {
    (a - b).abs() / b.abs().max(floor)
}

/// Richardson-extrapolated central differences of `f` along `e`: (first, second).
fn richardson(f: &mut dyn FnMut(f64) -> Result<f64>, h: f64) -> Result<(f64, f64)> {
    let f0 = f(0.0)?;
    let mut at = |h: f64| -> Result<(f64, f64)> {
        let (p, m) = (f(h)?, f(-h)?);
        Ok(((p - m) / (2.0 * h), (p - 2.0 * f0 + m) / (h * h)))
    };
    let (d1, s1) = at(h)?;
    let (d2, s2) = at(h / 2.0)?;
    Ok(((4.0 * d2 - d1) / 3.0, (4.0 * s2 - s1) / 3.0))
}

const DERIV_TOL: f64 = 1e-5;
const DERIV_FLOOR: f64 = 1e-3;
const FD_STEP: f64 = 2e-3;

fn random_network(rng: &mut ChaCha8Rng, dim: usize, time: bool, mode: ActivationMode) -> Result<NetworkParams> {
    let hidden = vec![rng.random_range(3..=8), rng.random_range(3..=8)];
    let options = NetworkOptions { gauss_gamma: rng.random_range(0.5..2.0), ..NetworkOptions::default() };
    let mut params = initialize(&Arch::new(dim, time, hidden)?, mode, options, rng.random())?;
    // Nonzero biases and less regular weights than the raw initializer.
    for v in params.theta.iter_mut() {
        *v += rng.random_range(-0.3..0.3);
    }
    Ok(params)
}

/// Input derivatives of `eval_jet` against Richardson central differences, on 50
/// random networks × 20 points; parameter gradients of the loss against FD.
pub fn derivative_suite(seed: u64) -> Result<SuiteReport> {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut tally = Tally::new();
    let dims = [1, 2, 3, 10];
    for k in 0..50 {
        let mode = if k % 2 == 0 { ActivationMode::MultiActivation } else { ActivationMode::TanhOnly };
        let dim = dims[(k / 2) % dims.len()];
        let time = k % 3 == 0;
        let params = random_network(&mut rng, dim, time, mode)?;
        let w2: f64 = if mode == ActivationMode::TanhOnly { 0.0 } else { rng.random() };
        let omega = (1.0 - w2, w2);
        for _ in 0..20 {
            let x: Vec<f64> = (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect();
            let t = time.then(|| rng.random_range(0.0..1.0));
            let jet = eval_jet(&params, &x, t, omega)?;
            let mut lap = 0.0;
            for i in 0..dim {
                let mut along = |s: f64| -> Result<f64> {
                    let mut y = x.clone();
                    y[i] += s;
                    Ok(eval_jet(&params, &y, t, omega)?.value)
                };
                let (d1, d2) = richardson(&mut along, FD_STEP)?;
                lap += d2;
                tally.record(rel_err(jet.grad[i], d1, DERIV_FLOOR), DERIV_TOL, || {
                    format!("net {k} d={dim}: ∂{i} {:.6e} vs FD {d1:.6e}", jet.grad[i])
                });
            }
            tally.record(rel_err(jet.lap, lap, DERIV_FLOOR), DERIV_TOL, || {
                format!("net {k} d={dim}: Δ {:.6e} vs FD {lap:.6e}", jet.lap)
            });
            if let Some(t0) = t {
                let mut along = |s: f64| -> Result<f64> { Ok(eval_jet(&params, &x, Some(t0 + s), omega)?.value) };
                let (d1, _) = richardson(&mut along, FD_STEP)?;
                let dt = jet.dt.unwrap_or(f64::NAN);
                tally.record(rel_err(dt, d1, DERIV_FLOOR), DERIV_TOL, || {
                    format!("net {k} d={dim}: ∂t {dt:.6e} vs FD {d1:.6e}")
                });
            }
        }
    }
    let input_worst = tally.worst * DERIV_TOL;

    // Parameter gradients: worst relative error rescaled onto the same 1e-5 budget.
    let opts = CheckOptions { max_entries: 120, ..CheckOptions::default() };
    let mut grad_worst: f64 = 0.0;
    let cases: [(&str, ActivationMode, OmegaMode); 6] = [
        ("line2d", ActivationMode::MultiActivation, OmegaMode::Frozen),
        ("line2d", ActivationMode::TanhOnly, OmegaMode::Frozen),
        ("ellipse2d", ActivationMode::MultiActivation, OmegaMode::Differentiated),
        ("ellipsoid3d", ActivationMode::MultiActivation, OmegaMode::Frozen),
        ("hypersphere10d", ActivationMode::TanhOnly, OmegaMode::Frozen),
        ("moving_circle", ActivationMode::MultiActivation, OmegaMode::Differentiated),
    ];
    for (i, (name, mode, omega_mode)) in cases.into_iter().enumerate() {
        let problem = find(name)?;
        let colloc = sample_problem(&problem, Counts::new(64, 8, 6, 6), Strategy::LatinHypercube, seed + i as u64)?;
        let arch = Arch::new(problem.dim, problem.parabolic, vec![6, 5])?;
        let p1 = initialize(&arch, mode, NetworkOptions::default(), seed ^ (2 * i as u64 + 11))?;
        let p2 = initialize(&arch, mode, NetworkOptions::default(), seed ^ (2 * i as u64 + 12))?;
        let data = LossData::new(&problem, &colloc, LossWeights::default(), &p1, omega_mode)?;
        let report = check_gradient(&data, &p1, &p2, opts)?;
        grad_worst = grad_worst.max(report.max_relative_error);
        tally.record(report.max_relative_error * DERIV_TOL / opts.tolerance, DERIV_TOL, || {
            format!("loss gradient on {name} ({}): {}", mode.name(), report.summary())
        });
    }
    Ok(tally.finish(
        "derivatives",
        DERIV_TOL,
        format!("input jets worst {input_worst:.2e}; loss gradient worst {grad_worst:.2e} (tol {:.0e})", opts.tolerance),
        start,
    ))
}

/// Point on a planar interface at parameter θ and time t, built straight from the
/// shape description (independent of the distance code).
fn curve_point(shape: &InterfaceShape, theta: f64, t: f64) -> Option<[f64; 2]> {
    let (s, c) = theta.sin_cos();
    match (&shape.kind, &shape.motion) {
        (ShapeKind::Ellipsoid { center, semi_axes }, motion) if center.len() == 2 => {
            let (mut a, mut b, mut cx, mut cy) = (semi_axes[0], semi_axes[1], center[0], center[1]);
            match motion {
                Motion::Translate { velocity } => {
                    cx += velocity[0] * t;
                    cy += velocity[1] * t;
                }
                Motion::TranslateAndDeform { velocity, axis_rates } => {
                    cx += velocity[0] * t;
                    cy += velocity[1] * t;
                    a = (a * a + axis_rates[0] * t).sqrt();
                    b = (b * b + axis_rates[1] * t).sqrt();
                }
                _ => {}
            }
            Some([cx + a * c, cy + b * s])
        }
        (ShapeKind::PolarCurve(curve), motion) => {
            let mut curve = curve.clone();
            let mut angle = 0.0;
            match motion {
                Motion::Translate { velocity } => {
                    curve.center = [curve.center[0] + velocity[0] * t, curve.center[1] + velocity[1] * t];
                }
                Motion::TranslateRotateDeform { velocity, angular_rate, amplitude_rate } => {
                    curve.center = [curve.center[0] + velocity[0] * t, curve.center[1] + velocity[1] * t];
                    curve.r1 += amplitude_rate * t;
                    angle = angular_rate * t;
                }
                _ => {}
            }
            let [lx, ly] = curve.local_point(theta);
            let (sa, ca) = f64::sin_cos(angle);
            Some([curve.center[0] + ca * lx - sa * ly, curve.center[1] + sa * lx + ca * ly])
        }
        _ => None,
    }
}

/// Distance by a dense parameter sweep refined with golden-section search.
pub fn sweep_distance(shape: &InterfaceShape, x: &[f64], t: f64) -> Option<f64> {
    const SWEEP: usize = 4096;
    let dist2 = |theta: f64| -> f64 {
        let p = curve_point(shape, theta, t).expect("planar shape");
        (p[0] - x[0]).powi(2) + (p[1] - x[1]).powi(2)
    };
    curve_point(shape, 0.0, t)?;
    let step = 2.0 * PI / SWEEP as f64;
    let values: Vec<f64> = (0..SWEEP).map(|k| dist2(k as f64 * step)).collect();
    // Refine every local minimum of the sweep.
    let mut best = f64::INFINITY;
    for k in 0..SWEEP {
        let prev = values[(k + SWEEP - 1) % SWEEP];
        let next = values[(k + 1) % SWEEP];
        if values[k] > prev || values[k] > next {
            continue;
        }
        let (mut a, mut b) = ((k as f64 - 1.0) * step, (k as f64 + 1.0) * step);
        let g = (5f64.sqrt() - 1.0) / 2.0;
        let (mut c, mut d) = (b - g * (b - a), a + g * (b - a));
        let (mut fc, mut fd) = (dist2(c), dist2(d));
        while b - a > 1e-13 {
            if fc < fd {
                b = d;
                d = c;
                fd = fc;
                c = b - g * (b - a);
                fc = dist2(c);
            } else {
                a = c;
                c = d;
                fc = fd;
                d = a + g * (b - a);
                fd = dist2(d);
            }
        }
        best = best.min(fc.min(fd)).min(values[k]);
    }
    Some(best.sqrt())
}

const GEOMETRY_TOL: f64 = 1e-6;

/// `distance()` against the sweep oracle for the ellipse, sunflower, flower and star
/// interfaces (moving ones at t = 0, 0.5, 1), 100 random points each.
pub fn geometry_suite(seed: u64) -> Result<SuiteReport> {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut tally = Tally::new();
    let cases = [
        ("ellipse2d", vec![0.0]),
        ("sunflower2d", vec![0.0]),
        ("flower2d", vec![0.0]),
        ("deforming_ellipse", vec![0.0, 0.5, 1.0]),
        ("deforming_star", vec![0.0, 0.5, 1.0]),
    ];
    for (name, times) in cases {
        let shape = find(name)?.interface;
        for t in times {
            let (lo, hi) = shape.bounding_box(t)?.expect("closed shape");
            for _ in 0..100 {
                let x: Vec<f64> = (0..2).map(|i| rng.random_range(lo[i] - 0.5..hi[i] + 0.5)).collect();
                let got = shape.distance(&x, t)?;
                let oracle = sweep_distance(&shape, &x, t).expect("planar shape");
                tally.record((got - oracle).abs(), GEOMETRY_TOL, || {
                    format!("{name} t={t} x={x:?}: {got:.12} vs oracle {oracle:.12}")
                });
            }
        }
    }
    Ok(tally.finish("distance oracles", GEOMETRY_TOL, String::new(), start))
}

const RESIDUAL_TOL: f64 = 1e-6;
const G1_TOL: f64 = 1e-10;
const G2_TOL: f64 = 1e-6;

/// PDE residual of each exact solution (finite-difference derivatives) and
/// jump identities, for every cataloged problem.
pub fn manufactured_suite(seed: u64) -> Result<SuiteReport> {
    let start = Instant::now();
    let mut tally = Tally::new();
    let mut worst = [0.0f64; 3];
    for (k, problem) in catalog().iter().enumerate() {
        let d = problem.dim;
        let points = validation_points(problem, 200, Strategy::LatinHypercube, seed + k as u64)?;
        for p in &points {
            let (x, t) = (&p.x[..d], if problem.parabolic { p.x[d] } else { 0.0 });
            let field = problem.field(p.region);
            let mut lap = 0.0;
            for i in 0..d {
                let mut along = |s: f64| -> Result<f64> {
                    let mut y = x.to_vec();
                    y[i] += s;
                    Ok(field.value(&y, t))
                };
                lap += richardson(&mut along, FD_STEP)?.1;
            }
            let dt = if problem.parabolic {
                let mut along = |s: f64| -> Result<f64> { Ok(field.value(x, t + s)) };
                richardson(&mut along, FD_STEP)?.0
            } else {
                0.0
            };
            let f = problem.source(p.region, x, t);
            let residual = (dt - problem.beta[p.region.index()] * lap - f).abs() / f.abs().max(1.0);
            worst[0] = worst[0].max(residual);
            tally.record(residual, RESIDUAL_TOL, || format!("{}: residual {residual:.3e} at {:?}", problem.name, p.x));
        }
        check_jumps(problem, seed + k as u64, &mut tally, &mut worst)?;
    }
    let extra = format!("residual {:.1e}, g1 {:.1e}, g2 {:.1e}", worst[0], worst[1], worst[2]);
    // Each identity has its own tolerance; the tally already normalizes.
    let mut report = tally.finish("manufactured data", RESIDUAL_TOL, extra, start);
    report.worst = worst[0];
    Ok(report)
}

fn check_jumps(problem: &ProblemSpec, seed: u64, tally: &mut Tally, worst: &mut [f64; 3]) -> Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    let d = problem.dim;
    let horizon = problem.horizon;
    for j in 0..20 {
        let t = if problem.parabolic { rng.random_range(0.0..=horizon) } else { 0.0 };
        let p = problem.interface.sample(1, t, Strategy::LatinHypercube, seed * 131 + j)?.remove(0);
        let (g1, g2) = problem.jump_data(&p, t)?;
        let [u1, u2] = [&problem.exact[0], &problem.exact[1]];
        let e1 = (u1.value(&p, t) - u2.value(&p, t) - g1).abs();
        worst[1] = worst[1].max(e1);
        tally.record(e1 * RESIDUAL_TOL / G1_TOL, RESIDUAL_TOL, || format!("{}: g1 off by {e1:.3e}", problem.name));
        let n = problem.interface.normal(&p, t, problem.omega1_side)?;
        let mut flux = 0.0;
        for (field, beta) in [(u1, problem.beta[0]), (u2, -problem.beta[1])] {
            for i in 0..d {
                let mut along = |s: f64| -> Result<f64> {
                    let mut y = p.clone();
                    y[i] += s;
                    Ok(field.value(&y, t))
                };
                flux += beta * n[i] * richardson(&mut along, FD_STEP)?.0;
            }
        }
        let e2 = rel_err(flux, g2, 1.0);
        worst[2] = worst[2].max(e2);
        tally.record(e2 * RESIDUAL_TOL / G2_TOL, RESIDUAL_TOL, || format!("{}: g2 {g2:.6e} vs FD {flux:.6e}", problem.name));
    }
    Ok(())
}

/// All three suites with one seed.
pub fn run_all(seed: u64) -> Result<Vec<SuiteReport>> {
    Ok(vec![derivative_suite(seed)?, geometry_suite(seed)?, manufactured_suite(seed)?])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sweep_oracle_on_circle_like_ellipse() {
        let shape = InterfaceShape::ellipsoid(vec![0.0, 0.0], vec![1.0, 1.0]).unwrap();
        let d = sweep_distance(&shape, &[2.0, 0.0], 0.0).unwrap();
        assert!((d - 1.0).abs() < 1e-12);
        let d = sweep_distance(&shape, &[0.3, 0.4], 0.0).unwrap();
        assert!((d - 0.5).abs() < 1e-12);
    }

    #[test]
    fn sweep_oracle_rejects_non_planar() {
        let shape = InterfaceShape::sphere(vec![0.0; 3], 1.0).unwrap();
        assert!(sweep_distance(&shape, &[2.0, 0.0, 0.0], 0.0).is_none());
    }

    #[test]
    fn richardson_is_fourth_order() {
        let mut f = |s: f64| -> Result<f64> { Ok((0.3 + s).sin()) };
        let (d1, d2) = richardson(&mut f, 1e-3).unwrap();
        assert!((d1 - 0.3f64.cos()).abs() < 1e-11);
        assert!((d2 + 0.3f64.sin()).abs() < 1e-7);
    }

    #[test]
    fn tally_flags_first_failure() {
        let mut t = Tally::new();
        t.record(0.5, 1.0, || "a".into());
        t.record(2.0, 1.0, || "b".into());
        t.record(3.0, 1.0, || "c".into());
        let r = t.finish("x", 1.0, String::new(), Instant::now());
        assert!(!r.passed);
        assert_eq!(r.detail, "b");
        assert_eq!(r.checked, 3);
    }
}
