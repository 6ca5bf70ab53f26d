//! Manufactured interface problems.
//!
//! Each problem declares one closed-form exact solution per subdomain. Sources,
//! jump data, boundary data and initial data are all derived from those fields,
//! so the data is consistent with the PDE by construction. Where the derived
//! source differs from the commonly quoted formula, `notes` records it.

use std::f64::consts::PI;
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::geometry::{Domain, InterfaceShape, Motion, PolarCurve, Region, RegionLabel, ShapeKind, Side, Wave};
use crate::sampling::Strategy;

/// A closed-form scalar field `u(x, t)` with its derivatives.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ExactField {
    /// `sign · sin(2π x₀) sin(2π x₁) + shift` (two-dimensional).
    ShiftedSine { sign: f64, shift: f64 },
    /// `scale · |x|²`
    RadialSquare { scale: f64 },
    /// `scale · (|x|⁴ − 0.1 ln(2|x|))`
    RadialQuarticLog { scale: f64 },
    /// `scale · e^{rate·t} · exp(Σ x_i)`
    ExpSum { scale: f64, time_rate: f64 },
    /// `scale · e^{rate·t} · Π sin(x_i)`
    SinProduct { scale: f64, time_rate: f64 },
}

impl ExactField {
    pub fn value(&self, x: &[f64], t: f64) -> f64 {
        match *self {
            ExactField::ShiftedSine { sign, shift } => sign * (2.0 * PI * x[0]).sin() * (2.0 * PI * x[1]).sin() + shift,
            ExactField::RadialSquare { scale } => scale * norm_sq(x),
            ExactField::RadialQuarticLog { scale } => {
                let r2 = norm_sq(x);
                scale * (r2 * r2 - 0.1 * (2.0 * r2.sqrt()).ln())
            }
            ExactField::ExpSum { scale, time_rate } => scale * (time_rate * t).exp() * x.iter().sum::<f64>().exp(),
            ExactField::SinProduct { scale, time_rate } => {
                scale * (time_rate * t).exp() * x.iter().map(|v| v.sin()).product::<f64>()
            }
        }
    }

    /// Spatial gradient.
    pub fn grad(&self, x: &[f64], t: f64) -> Vec<f64> {
        match *self {
            ExactField::ShiftedSine { sign, .. } => {
                let (sx, cx) = (2.0 * PI * x[0]).sin_cos();
                let (sy, cy) = (2.0 * PI * x[1]).sin_cos();
                vec![sign * 2.0 * PI * cx * sy, sign * 2.0 * PI * sx * cy]
            }
            ExactField::RadialSquare { scale } => x.iter().map(|v| 2.0 * scale * v).collect(),
            ExactField::RadialQuarticLog { scale } => {
                let r2 = norm_sq(x);
                x.iter().map(|v| scale * (4.0 * r2 * v - 0.1 * v / r2)).collect()
            }
            ExactField::ExpSum { .. } => vec![self.value(x, t); x.len()],
            ExactField::SinProduct { scale, time_rate } => {
                let amp = scale * (time_rate * t).exp();
                (0..x.len())
                    .map(|i| {
                        amp * x.iter()
                            .enumerate()
                            .map(|(j, v)| if i == j { v.cos() } else { v.sin() })
                            .product::<f64>()
                    })
                    .collect()
            }
        }
    }

    /// Spatial Laplacian.
    pub fn laplacian(&self, x: &[f64], t: f64) -> f64 {
        let d = x.len() as f64;
        match *self {
            ExactField::ShiftedSine { sign, .. } => {
                -8.0 * PI * PI * sign * (2.0 * PI * x[0]).sin() * (2.0 * PI * x[1]).sin()
            }
            ExactField::RadialSquare { scale } => 2.0 * d * scale,
            ExactField::RadialQuarticLog { scale } => {
                // Δ|x|⁴ = 4(d+2)|x|², Δ ln|x| = (d−2)/|x|²
                let r2 = norm_sq(x);
                scale * (4.0 * (d + 2.0) * r2 - 0.1 * (d - 2.0) / r2)
            }
            ExactField::ExpSum { .. } => d * self.value(x, t),
            ExactField::SinProduct { .. } => -d * self.value(x, t),
        }
    }

    pub fn time_derivative(&self, x: &[f64], t: f64) -> f64 {
        match *self {
            ExactField::ExpSum { time_rate, .. } | ExactField::SinProduct { time_rate, .. } => {
                time_rate * self.value(x, t)
            }
            _ => 0.0,
        }
    }

    pub fn formula(&self) -> String {
        match *self {
            ExactField::ShiftedSine { sign, shift } => format!("{sign}·sin(2πx)sin(2πy) + {shift}"),
            ExactField::RadialSquare { scale } => format!("{scale}·r²"),
            ExactField::RadialQuarticLog { scale } => format!("{scale}·(r⁴ − 0.1 ln(2r))"),
            ExactField::ExpSum { scale, time_rate } => format!("{scale}·e^({time_rate}t)·exp(Σx_i)"),
            ExactField::SinProduct { scale, time_rate } => format!("{scale}·e^({time_rate}t)·Π sin(x_i)"),
        }
    }
}

fn norm_sq(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum()
}

/// How the requested interior count is divided between the subdomains.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum InteriorSplit {
    /// One design over the domain, split by region membership.
    Geometric,
    /// Half the points inside the closed interface, half outside it.
    Balanced,
}

/// Collocation counts `(M_Ω, M_∂Ω, M_Γ, M₀)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Counts {
    pub interior: usize,
    pub boundary: usize,
    pub interface: usize,
    pub initial: usize,
}

impl Counts {
    pub const fn new(interior: usize, boundary: usize, interface: usize, initial: usize) -> Self {
        Self { interior, boundary, interface, initial }
    }
}

/// One manufactured interface problem.
#[derive(Clone, Debug)]
pub struct ProblemSpec {
    pub name: &'static str,
    pub title: &'static str,
    pub dim: usize,
    pub parabolic: bool,
    /// Final time; zero for elliptic problems.
    pub horizon: f64,
    pub domain: Domain,
    pub interface: InterfaceShape,
    pub omega1_side: Side,
    /// `[β₁, β₂]`
    pub beta: [f64; 2],
    /// `[u₁, u₂]`
    pub exact: [ExactField; 2],
    pub default_strategy: Strategy,
    pub interior_split: InteriorSplit,
    /// Sampling densities used in the published comparison, coarse to fine.
    pub density_triples: [Counts; 3],
    pub notes: &'static str,
}

impl ProblemSpec {
    /// Input dimension of the subdomain networks.
    pub fn input_dim(&self) -> usize {
        self.dim + usize::from(self.parabolic)
    }

    pub fn field(&self, region: Region) -> &ExactField {
        &self.exact[region.index()]
    }

    pub fn region_at(&self, x: &[f64], t: f64) -> Result<RegionLabel> {
        self.interface.classify(x, t, self.omega1_side)
    }

    /// Exact solution of `region`; rejects points that lie in the other subdomain.
    pub fn exact(&self, region: Region, x: &[f64], t: f64) -> Result<f64> {
        if let Some(actual) = self.region_at(x, t)?.region() {
            if actual != region {
                return Err(Error::RegionMismatch(format!(
                    "{} point {x:?} at t={t} lies in {}",
                    region.name(),
                    actual.name()
                )));
            }
        }
        Ok(self.field(region).value(x, t))
    }

    /// Source `f_i = ∂_t u_i − β_i Δu_i` (parabolic) or `−β_i Δu_i` (elliptic).
    pub fn source(&self, region: Region, x: &[f64], t: f64) -> f64 {
        let field = self.field(region);
        let beta = self.beta[region.index()];
        let diffusion = -beta * field.laplacian(x, t);
        if self.parabolic {
            field.time_derivative(x, t) + diffusion
        } else {
            diffusion
        }
    }

    /// `(g₁, g₂)` at an interface point with the problem's own orientation.
    pub fn jump_data(&self, p: &[f64], t: f64) -> Result<(f64, f64)> {
        self.jump_data_with_side(p, t, self.omega1_side)
    }

    /// Jump data with an explicit Ω₁ side for the normal; the fields stay fixed.
    pub fn jump_data_with_side(&self, p: &[f64], t: f64, side: Side) -> Result<(f64, f64)> {
        let n = self.interface.normal(p, t, side)?;
        Ok(self.jump_data_with_normal(p, t, &n))
    }

    pub fn jump_data_with_normal(&self, p: &[f64], t: f64, n: &[f64]) -> (f64, f64) {
        let [u1, u2] = &self.exact;
        let g1 = u1.value(p, t) - u2.value(p, t);
        let flux = |field: &ExactField, beta: f64| -> f64 {
            beta * field.grad(p, t).iter().zip(n).map(|(g, n)| g * n).sum::<f64>()
        };
        let g2 = flux(u1, self.beta[0]) - flux(u2, self.beta[1]);
        (g1, g2)
    }

    /// Dirichlet data: the exact solution of the subdomain owning the boundary point.
    pub fn boundary_value(&self, region: Region, x: &[f64], t: f64) -> f64 {
        self.field(region).value(x, t)
    }

    /// Initial data `g₀(x) = u(x, 0)`, region-routed.
    pub fn initial_value(&self, x: &[f64]) -> Result<f64> {
        let region = self
            .region_at(x, 0.0)?
            .region()
            .ok_or_else(|| Error::RegionMismatch("initial point lies on the interface".into()))?;
        Ok(self.field(region).value(x, 0.0))
    }

    /// Exact solution routed by region, for evaluation clouds.
    pub fn exact_routed(&self, x: &[f64], t: f64) -> Result<(Region, f64)> {
        let region = self
            .region_at(x, t)?
            .region()
            .ok_or_else(|| Error::RegionMismatch("point lies on the interface".into()))?;
        Ok((region, self.field(region).value(x, t)))
    }

    /// Human-readable metadata block.
    pub fn report(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "[{}]", self.name);
        let _ = writeln!(out, "title = {}", self.title);
        let _ = writeln!(out, "dim = {}", self.dim);
        let _ = writeln!(out, "parabolic = {}", self.parabolic);
        if self.parabolic {
            let _ = writeln!(out, "horizon = {}", self.horizon);
        }
        let _ = writeln!(out, "domain = {}", self.domain.describe());
        let _ = writeln!(out, "interface = {:?}", self.interface.kind);
        if !self.interface.is_static() {
            let _ = writeln!(out, "motion = {:?}", self.interface.motion);
        }
        let _ = writeln!(out, "omega1_side = {:?}", self.omega1_side);
        let _ = writeln!(out, "beta1 = {}", self.beta[0]);
        let _ = writeln!(out, "beta2 = {}", self.beta[1]);
        let _ = writeln!(out, "u1 = {}", self.exact[0].formula());
        let _ = writeln!(out, "u2 = {}", self.exact[1].formula());
        let _ = writeln!(out, "strategy = {}", self.default_strategy.name());
        let triples: Vec<String> = self
            .density_triples
            .iter()
            .map(|c| format!("({},{},{})", c.interior, c.boundary, c.interface))
            .collect();
        let _ = writeln!(out, "densities = {}", triples.join(" "));
        if !self.notes.is_empty() {
            let _ = writeln!(out, "notes = {}", self.notes);
        }
        out
    }
}

const ELLIPTIC_2D_TRIPLES: [Counts; 3] = [
    Counts::new(100, 40, 25, 0),
    Counts::new(400, 80, 50, 0),
    Counts::new(1600, 160, 100, 0),
];

const PARABOLIC_TRIPLES: [Counts; 3] = [
    Counts::new(200, 20, 20, 50),
    Counts::new(400, 40, 40, 100),
    Counts::new(1000, 100, 100, 250),
];

fn exp_sin_pair() -> [ExactField; 2] {
    [
        ExactField::ExpSum { scale: 1.0, time_rate: 0.0 },
        ExactField::SinProduct { scale: 1.0, time_rate: 0.0 },
    ]
}

fn parabolic_pair() -> [ExactField; 2] {
    [
        ExactField::ExpSum { scale: 0.01, time_rate: 1.0 },
        ExactField::SinProduct { scale: 1.0, time_rate: 1.0 },
    ]
}

fn parabolic(name: &'static str, title: &'static str, interface: InterfaceShape) -> ProblemSpec {
    ProblemSpec {
        name,
        title,
        dim: 2,
        parabolic: true,
        horizon: 1.0,
        domain: Domain::unit_box(2, 0.0, 3.5),
        interface,
        omega1_side: Side::Outside,
        beta: [1.0, 10.0],
        exact: parabolic_pair(),
        default_strategy: Strategy::LatinHypercube,
        interior_split: InteriorSplit::Geometric,
        density_triples: PARABOLIC_TRIPLES,
        notes: "",
    }
}

/// All ten manufactured problems.
pub fn catalog() -> Vec<ProblemSpec> {
    let square = Domain::unit_box(2, -1.0, 1.0);
    let sunflower_center = 0.02 * 5f64.sqrt();
    let built = || -> Result<Vec<ProblemSpec>> {
        Ok(vec![
            ProblemSpec {
                name: "line2d",
                title: "straight-line interface x = 0 with sign-changing coefficient",
                dim: 2,
                parabolic: false,
                horizon: 0.0,
                domain: square.clone(),
                interface: InterfaceShape::hyperplane(2, 0, 0.0, vec![-1.0, -1.0], vec![1.0, 1.0])?,
                omega1_side: Side::PositiveHalf,
                beta: [-1.0, 1.0],
                exact: [
                    ExactField::ShiftedSine { sign: -1.0, shift: -1.0 },
                    ExactField::ShiftedSine { sign: 1.0, shift: 1.0 },
                ],
                default_strategy: Strategy::Grid,
                interior_split: InteriorSplit::Geometric,
                density_triples: ELLIPTIC_2D_TRIPLES,
                notes: "beta1 = -1 is used as given (not elliptic in Omega1). Derived f2 = +8pi^2 sin(2pi x)sin(2pi y); \
                        the commonly quoted f2 carries the opposite sign and is inconsistent with u2.",
            },
            ProblemSpec {
                name: "sunflower2d",
                title: "20-petal sunflower interface",
                dim: 2,
                parabolic: false,
                horizon: 0.0,
                domain: square.clone(),
                interface: InterfaceShape::polar(PolarCurve::new(
                    [sunflower_center, sunflower_center],
                    0.4,
                    0.2,
                    20.0,
                    Wave::Sin,
                )?)?,
                omega1_side: Side::Inside,
                beta: [1.0, 10.0],
                exact: [
                    ExactField::RadialSquare { scale: 1.0 },
                    ExactField::RadialQuarticLog { scale: 0.1 },
                ],
                default_strategy: Strategy::LatinHypercube,
                interior_split: InteriorSplit::Geometric,
                density_triples: ELLIPTIC_2D_TRIPLES,
                notes: "Derived f2 = -16 r^2 (ln r is harmonic in 2D); the commonly quoted \
                        f2 = -(12 r^2 + 0.1/r^2)/beta2 does not match u2.",
            },
            ProblemSpec {
                name: "ellipse2d",
                title: "elliptic interface (x/0.2)^2 + (y/0.5)^2 = 1, high contrast",
                dim: 2,
                parabolic: false,
                horizon: 0.0,
                domain: square.clone(),
                interface: InterfaceShape::ellipsoid(vec![0.0, 0.0], vec![0.2, 0.5])?,
                omega1_side: Side::Inside,
                beta: [1e-3, 1.0],
                exact: exp_sin_pair(),
                default_strategy: Strategy::LatinHypercube,
                interior_split: InteriorSplit::Geometric,
                density_triples: ELLIPTIC_2D_TRIPLES,
                notes: "",
            },
            ProblemSpec {
                name: "flower2d",
                title: "5-petal flower interface inside a flower-shaped domain",
                dim: 2,
                parabolic: false,
                horizon: 0.0,
                domain: Domain::Polar(PolarCurve::new([0.0, 0.0], 1.0, 0.3, 5.0, Wave::NegCos)?),
                interface: InterfaceShape::polar(PolarCurve::new([0.0, 0.0], 0.4, 0.2, 5.0, Wave::NegCos)?)?,
                omega1_side: Side::Inside,
                beta: [1.0, 10.0],
                exact: exp_sin_pair(),
                default_strategy: Strategy::LatinHypercube,
                interior_split: InteriorSplit::Geometric,
                density_triples: ELLIPTIC_2D_TRIPLES,
                notes: "",
            },
            ProblemSpec {
                name: "ellipsoid3d",
                title: "3D ellipsoidal interface with semi-axes (0.7, 0.5, 0.3), high contrast",
                dim: 3,
                parabolic: false,
                horizon: 0.0,
                domain: Domain::unit_box(3, -1.0, 1.0),
                interface: InterfaceShape::ellipsoid(vec![0.0; 3], vec![0.7, 0.5, 0.3])?,
                omega1_side: Side::Inside,
                beta: [1e-3, 1.0],
                exact: exp_sin_pair(),
                default_strategy: Strategy::LatinHypercube,
                interior_split: InteriorSplit::Geometric,
                density_triples: [
                    Counts::new(125, 50, 30, 0),
                    Counts::new(1000, 100, 60, 0),
                    Counts::new(8000, 150, 120, 0),
                ],
                notes: "",
            },
            ProblemSpec {
                name: "hypersphere10d",
                title: "10D hyperspherical interface of radius 0.5, high contrast",
                dim: 10,
                parabolic: false,
                horizon: 0.0,
                domain: Domain::unit_box(10, -1.0, 1.0),
                interface: InterfaceShape::sphere(vec![0.0; 10], 0.5)?,
                omega1_side: Side::Inside,
                beta: [1e-3, 1.0],
                exact: exp_sin_pair(),
                default_strategy: Strategy::LatinHypercube,
                interior_split: InteriorSplit::Balanced,
                density_triples: [
                    Counts::new(2000, 100, 50, 0),
                    Counts::new(4000, 200, 100, 0),
                    Counts::new(8000, 400, 200, 0),
                ],
                notes: "The ball occupies ~2.5e-6 of the cube, so interior points are split evenly \
                        between the ball and its complement instead of by volume.",
            },
            parabolic(
                "fixed_circle",
                "static circular interface (x-1.5)^2 + (y-1.5)^2 = 1",
                InterfaceShape::sphere(vec![1.5, 1.5], 1.0)?,
            ),
            parabolic(
                "moving_circle",
                "unit circle translating with velocity (1, 1)",
                InterfaceShape::moving(
                    ShapeKind::Sphere { center: vec![1.2, 1.2], radius: 1.0 },
                    Motion::Translate { velocity: vec![1.0, 1.0] },
                    1.0,
                )?,
            ),
            parabolic(
                "deforming_ellipse",
                "translating ellipse with a(t)^2 = 1 + 0.1t, b(t)^2 = 1 - 0.1t",
                InterfaceShape::moving(
                    ShapeKind::Ellipsoid { center: vec![1.2, 1.2], semi_axes: vec![1.0, 1.0] },
                    Motion::TranslateAndDeform { velocity: vec![0.8, 0.8], axis_rates: vec![0.1, -0.1] },
                    1.0,
                )?,
            ),
            ProblemSpec {
                notes: "Dirichlet data is taken from the exterior solution u1, which owns the outer boundary.",
                ..parabolic(
                    "deforming_star",
                    "5-lobe star r = 1 - 0.3t cos(5θ), rotating by 2πt and translating",
                    InterfaceShape::deforming_star(
                        [1.2, 1.2],
                        1.0,
                        5.0,
                        Wave::NegCos,
                        0.3,
                        [0.8, 0.8],
                        2.0 * PI,
                        1.0,
                    )?,
                )
            },
        ])
    };
    built().expect("catalog shapes are valid")
}

/// Names of every cataloged problem.
pub fn names() -> Vec<&'static str> {
    catalog().iter().map(|p| p.name).collect()
}

/// Looks a problem up by name.
pub fn find(name: &str) -> Result<ProblemSpec> {
    catalog().into_iter().find(|p| p.name == name).ok_or_else(|| Error::UnknownProblem {
        name: name.to_string(),
        valid: names().join(", "),
    })
}

/// Structured text report of the whole catalog.
pub fn catalog_report() -> String {
    catalog().iter().map(ProblemSpec::report).collect::<Vec<_>>().join("\n")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn approx(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() <= tol, "{a} vs {b}");
    }

    #[test]
    fn catalog_has_ten_named_problems() {
        assert_eq!(
            names(),
            vec![
                "line2d",
                "sunflower2d",
                "ellipse2d",
                "flower2d",
                "ellipsoid3d",
                "hypersphere10d",
                "fixed_circle",
                "moving_circle",
                "deforming_ellipse",
                "deforming_star"
            ]
        );
    }

    #[test]
    fn coefficients_match_problem_statements() {
        assert_eq!(find("line2d").unwrap().beta, [-1.0, 1.0]);
        assert_eq!(find("ellipse2d").unwrap().beta, [1e-3, 1.0]);
        let fixed = find("fixed_circle").unwrap();
        assert_eq!(fixed.beta, [1.0, 10.0]);
        assert_eq!(fixed.interface.kind, ShapeKind::Sphere { center: vec![1.5, 1.5], radius: 1.0 });
    }

    #[test]
    fn line2d_values() {
        let p = find("line2d").unwrap();
        approx(p.exact(Region::Omega1, &[0.25, 0.25], 0.0).unwrap(), -2.0, 1e-15);
        approx(p.source(Region::Omega1, &[0.25, 0.25], 0.0), 8.0 * PI * PI, 1e-12);
        approx(8.0 * PI * PI, 78.95683521, 1e-8);
        for y in [-0.9, -0.3, 0.0, 0.55] {
            let (g1, g2) = p.jump_data(&[0.0, y], 0.0).unwrap();
            approx(g1, -2.0, 1e-15);
            approx(g2, 0.0, 1e-12);
        }
    }

    #[test]
    fn other_values() {
        let e = find("ellipse2d").unwrap();
        assert_eq!(e.exact(Region::Omega1, &[0.0, 0.0], 0.0).unwrap(), 1.0);
        approx(e.source(Region::Omega1, &[0.1, -0.05], 0.0), -2e-3 * (0.05f64).exp(), 1e-15);
        let s = find("sunflower2d").unwrap();
        approx(s.source(Region::Omega2, &[1.0, 0.0], 0.0), -16.0, 1e-12);
        let f = find("flower2d").unwrap();
        let (g1, _) = f.jump_data(&[0.2, 0.0], 0.0).unwrap();
        approx(g1, 0.2f64.exp(), 1e-14);
        let c = find("fixed_circle").unwrap();
        let h = std::f64::consts::FRAC_PI_2;
        approx(c.exact(Region::Omega2, &[h, h], 0.0).unwrap(), 1.0, 1e-15);
    }

    #[test]
    fn exact_rejects_wrong_region() {
        let p = find("line2d").unwrap();
        assert!(matches!(p.exact(Region::Omega2, &[0.5, 0.0], 0.0), Err(Error::RegionMismatch(_))));
    }

    #[test]
    fn jump_data_rejects_off_interface_points() {
        let p = find("ellipse2d").unwrap();
        assert!(matches!(p.jump_data(&[0.5, 0.5], 0.0), Err(Error::OffInterface { .. })));
    }

    #[test]
    fn unknown_problem_lists_valid_names() {
        let err = find("nope").unwrap_err().to_string();
        assert!(err.contains("line2d") && err.contains("deforming_star"));
    }

    #[test]
    fn report_mentions_every_problem() {
        let report = catalog_report();
        for name in names() {
            assert!(report.contains(&format!("[{name}]")));
        }
    }
}
