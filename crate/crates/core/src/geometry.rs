//! Interfaces, outer domains, and the point queries the solver needs from them.
//!
//! Every shape is an immutable value. A time-dependent shape is first frozen at
//! the query time, so every query reduces to the static case.

use std::f64::consts::PI;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::sampling::{design_points, Strategy};

/// Points closer than this to the interface are labelled [`RegionLabel::OnInterface`].
pub const CLASSIFY_TOL: f64 = 1e-10;
/// Maximum distance from the interface accepted by [`InterfaceShape::normal`].
pub const ON_INTERFACE_TOL: f64 = 1e-8;

const POLAR_SWEEP: usize = 2048;
const POLAR_REFINED_MINIMA: usize = 3;
const GOLDEN_TOL: f64 = 1e-10;
const NEWTON_MAX_ITERS: usize = 50;

/// Angular profile of a polar curve `r(θ) = r0 + r1 · wave(lobes · θ)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Wave {
    Sin,
    Cos,
    NegSin,
    NegCos,
}

impl Wave {
    fn eval(self, phase: f64) -> f64 {
        match self {
            Wave::Sin => phase.sin(),
            Wave::Cos => phase.cos(),
            Wave::NegSin => -phase.sin(),
            Wave::NegCos => -phase.cos(),
        }
    }

    fn deriv(self, phase: f64) -> f64 {
        match self {
            Wave::Sin => phase.cos(),
            Wave::Cos => -phase.sin(),
            Wave::NegSin => -phase.cos(),
            Wave::NegCos => phase.sin(),
        }
    }
}

/// Closed star-shaped curve `c + r(θ) (cos θ, sin θ)`.
#[derive(Clone, Debug, PartialEq)]
pub struct PolarCurve {
    pub center: [f64; 2],
    pub r0: f64,
    pub r1: f64,
    pub lobes: f64,
    pub wave: Wave,
}

impl PolarCurve {
    pub fn new(center: [f64; 2], r0: f64, r1: f64, lobes: f64, wave: Wave) -> Result<Self> {
        if !(r0 > r1 && r1 >= 0.0) {
            return Err(Error::InvalidShape(format!(
                "polar curve needs r0 > r1 >= 0, got r0={r0}, r1={r1}"
            )));
        }
        Ok(Self { center, r0, r1, lobes, wave })
    }

    pub fn radius(&self, theta: f64) -> f64 {
        self.r0 + self.r1 * self.wave.eval(self.lobes * theta)
    }

    pub fn radius_deriv(&self, theta: f64) -> f64 {
        self.r1 * self.lobes * self.wave.deriv(self.lobes * theta)
    }

    /// Point at angle `theta`, relative to the center.
    pub fn local_point(&self, theta: f64) -> [f64; 2] {
        let r = self.radius(theta);
        [r * theta.cos(), r * theta.sin()]
    }

    /// Outward unit normal at angle `theta` (tangent rotated clockwise).
    pub fn outward_normal(&self, theta: f64) -> [f64; 2] {
        let (s, c) = theta.sin_cos();
        let r = self.radius(theta);
        let dr = self.radius_deriv(theta);
        let tx = dr * c - r * s;
        let ty = dr * s + r * c;
        let norm = tx.hypot(ty);
        [ty / norm, -tx / norm]
    }

    /// Signed radial gap, negative inside. `y` is relative to the center.
    fn local_level(&self, y: [f64; 2]) -> f64 {
        let rho = y[0].hypot(y[1]);
        rho - self.radius(y[1].atan2(y[0]))
    }

    /// Distance from a center-relative point to the curve, with the foot angle.
    fn local_distance(&self, y: [f64; 2]) -> (f64, f64) {
        let sq = |theta: f64| {
            let p = self.local_point(theta);
            (y[0] - p[0]).powi(2) + (y[1] - p[1]).powi(2)
        };
        let step = 2.0 * PI / POLAR_SWEEP as f64;
        let values: Vec<f64> = (0..POLAR_SWEEP).map(|k| sq(k as f64 * step)).collect();
        let mut minima: Vec<usize> = (0..POLAR_SWEEP)
            .filter(|&k| {
                let prev = values[(k + POLAR_SWEEP - 1) % POLAR_SWEEP];
                let next = values[(k + 1) % POLAR_SWEEP];
                values[k] <= prev && values[k] <= next
            })
            .collect();
        minima.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
        let mut best = (f64::INFINITY, 0.0);
        for &k in minima.iter().take(POLAR_REFINED_MINIMA) {
            let centre = k as f64 * step;
            let (theta, value) = golden_section(&sq, centre - step, centre + step, GOLDEN_TOL);
            if value < best.0 {
                best = (value, theta);
            }
        }
        (best.0.sqrt(), best.1)
    }

    /// Area enclosed by the curve.
    pub fn area(&self) -> f64 {
        PI * (self.r0 * self.r0 + 0.5 * self.r1 * self.r1)
    }

    pub fn max_radius(&self) -> f64 {
        self.r0 + self.r1
    }
}

/// Minimizes a unimodal function on `[a, b]`; returns `(argmin, min)`.
pub fn golden_section(f: &impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> (f64, f64) {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while (b - a).abs() > tol {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    let x = 0.5 * (a + b);
    let fx = f(x);
    [(c, fc), (d, fd), (x, fx)]
        .into_iter()
        .min_by(|p, q| p.1.total_cmp(&q.1))
        .unwrap()
}

/// Geometric family of an interface.
#[derive(Clone, Debug, PartialEq)]
pub enum ShapeKind {
    /// `{x : x[axis] = offset}` restricted to the box `[lo, hi]` in the other coordinates.
    Hyperplane { axis: usize, offset: f64, lo: Vec<f64>, hi: Vec<f64> },
    Sphere { center: Vec<f64>, radius: f64 },
    Ellipsoid { center: Vec<f64>, semi_axes: Vec<f64> },
    /// Two-dimensional polar curve.
    PolarCurve(PolarCurve),
}

/// Kinematics of an interface over `[0, horizon]`.
#[derive(Clone, Debug, PartialEq)]
pub enum Motion {
    Static,
    Translate { velocity: Vec<f64> },
    /// Translation plus `semi_axis_i(t)^2 = semi_axis_i(0)^2 + axis_rates[i] * t`.
    TranslateAndDeform { velocity: Vec<f64>, axis_rates: Vec<f64> },
    /// Polar curves only: body-frame amplitude `r1 + amplitude_rate * t`, then a
    /// counter-clockwise rotation by `angular_rate * t`, then translation.
    TranslateRotateDeform { velocity: Vec<f64>, angular_rate: f64, amplitude_rate: f64 },
}

/// Which side of the interface is the subdomain Ω₁.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    Inside,
    Outside,
    /// `x[axis] > offset` for hyperplanes.
    PositiveHalf,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum RegionLabel {
    Omega1,
    Omega2,
    OnInterface,
}

impl RegionLabel {
    pub fn region(self) -> Option<Region> {
        match self {
            RegionLabel::Omega1 => Some(Region::Omega1),
            RegionLabel::Omega2 => Some(Region::Omega2),
            RegionLabel::OnInterface => None,
        }
    }
}

/// One of the two subdomains.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Region {
    Omega1,
    Omega2,
}

impl Region {
    pub fn index(self) -> usize {
        match self {
            Region::Omega1 => 0,
            Region::Omega2 => 1,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Region::Omega1 => "omega1",
            Region::Omega2 => "omega2",
        }
    }
}

/// An interface Γ(t) in `dim` spatial dimensions.
#[derive(Clone, Debug, PartialEq)]
pub struct InterfaceShape {
    pub kind: ShapeKind,
    pub motion: Motion,
    pub dim: usize,
    /// Final time for moving shapes; static shapes accept any time.
    pub horizon: Option<f64>,
}

/// An interface frozen at one instant.
#[derive(Clone, Debug)]
enum Snapshot {
    Hyperplane { axis: usize, offset: f64, lo: Vec<f64>, hi: Vec<f64> },
    Sphere { center: Vec<f64>, radius: f64 },
    Ellipsoid { center: Vec<f64>, semi_axes: Vec<f64> },
    Polar { curve: PolarCurve, angle: f64 },
}

impl InterfaceShape {
    pub fn fixed(kind: ShapeKind) -> Result<Self> {
        let dim = kind_dim(&kind);
        let shape = Self { kind, motion: Motion::Static, dim, horizon: None };
        shape.validate()?;
        Ok(shape)
    }

    pub fn moving(kind: ShapeKind, motion: Motion, horizon: f64) -> Result<Self> {
        let dim = kind_dim(&kind);
        let shape = Self { kind, motion, dim, horizon: Some(horizon) };
        shape.validate()?;
        Ok(shape)
    }

    pub fn hyperplane(dim: usize, axis: usize, offset: f64, lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        if lo.len() != dim || hi.len() != dim || axis >= dim {
            return Err(Error::InvalidShape("hyperplane bounds must match dim".into()));
        }
        Self::fixed(ShapeKind::Hyperplane { axis, offset, lo, hi })
    }

    pub fn sphere(center: Vec<f64>, radius: f64) -> Result<Self> {
        Self::fixed(ShapeKind::Sphere { center, radius })
    }

    pub fn ellipsoid(center: Vec<f64>, semi_axes: Vec<f64>) -> Result<Self> {
        Self::fixed(ShapeKind::Ellipsoid { center, semi_axes })
    }

    pub fn polar(curve: PolarCurve) -> Result<Self> {
        Self::fixed(ShapeKind::PolarCurve(curve))
    }

    /// Star-shaped curve whose lobe amplitude grows linearly while it rotates and translates.
    pub fn deforming_star(
        center: [f64; 2],
        r0: f64,
        lobes: f64,
        wave: Wave,
        amplitude_rate: f64,
        velocity: [f64; 2],
        angular_rate: f64,
        horizon: f64,
    ) -> Result<Self> {
        let curve = PolarCurve::new(center, r0, 0.0, lobes, wave)?;
        Self::moving(
            ShapeKind::PolarCurve(curve),
            Motion::TranslateRotateDeform {
                velocity: velocity.to_vec(),
                angular_rate,
                amplitude_rate,
            },
            horizon,
        )
    }

    fn validate(&self) -> Result<()> {
        match &self.kind {
            ShapeKind::Sphere { center, radius } => {
                if !(*radius > 0.0) || center.is_empty() {
                    return Err(Error::InvalidShape("sphere radius must be positive".into()));
                }
            }
            ShapeKind::Ellipsoid { center, semi_axes } => {
                if center.len() != semi_axes.len() || semi_axes.iter().any(|a| !(*a > 0.0)) {
                    return Err(Error::InvalidShape("semi-axes must be positive and match the center".into()));
                }
            }
            ShapeKind::PolarCurve(c) => {
                PolarCurve::new(c.center, c.r0, c.r1, c.lobes, c.wave)?;
            }
            ShapeKind::Hyperplane { .. } => {}
        }
        let vel_ok = |v: &Vec<f64>| v.len() == self.dim;
        match &self.motion {
            Motion::Static => {}
            Motion::Translate { velocity } => {
                if !vel_ok(velocity) {
                    return Err(Error::InvalidShape("velocity dimension".into()));
                }
            }
            Motion::TranslateAndDeform { velocity, axis_rates } => {
                if !vel_ok(velocity) || !matches!(self.kind, ShapeKind::Ellipsoid { .. }) || axis_rates.len() != self.dim {
                    return Err(Error::InvalidShape("axis deformation needs an ellipsoid".into()));
                }
            }
            Motion::TranslateRotateDeform { velocity, .. } => {
                if !vel_ok(velocity) || !matches!(self.kind, ShapeKind::PolarCurve(_)) {
                    return Err(Error::InvalidShape("rotation/deformation needs a polar curve".into()));
                }
            }
        }
        if let (Some(h), false) = (self.horizon, self.is_static()) {
            for t in [0.0, h] {
                self.snapshot(t)?;
            }
        }
        Ok(())
    }

    pub fn is_static(&self) -> bool {
        matches!(self.motion, Motion::Static)
    }

    /// Whether this is a parametric (numerically minimized) shape.
    pub fn is_parametric(&self) -> bool {
        matches!(self.kind, ShapeKind::PolarCurve(_))
    }

    fn check_time(&self, t: f64) -> Result<()> {
        if self.is_static() {
            return Ok(());
        }
        let horizon = self.horizon.unwrap_or(f64::INFINITY);
        if !(t >= -1e-12 && t <= horizon + 1e-12) {
            return Err(Error::TimeOutOfHorizon { t, horizon });
        }
        Ok(())
    }

    fn check_dim(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: x.len() });
        }
        Ok(())
    }

    fn snapshot(&self, t: f64) -> Result<Snapshot> {
        let shift = |c: &[f64], v: &[f64]| -> Vec<f64> { c.iter().zip(v).map(|(c, v)| c + v * t).collect() };
        let snap = match (&self.kind, &self.motion) {
            (ShapeKind::Hyperplane { axis, offset, lo, hi }, motion) => {
                let (offset, lo, hi) = match motion {
                    Motion::Translate { velocity } => (offset + velocity[*axis] * t, shift(lo, velocity), shift(hi, velocity)),
                    _ => (*offset, lo.clone(), hi.clone()),
                };
                Snapshot::Hyperplane { axis: *axis, offset, lo, hi }
            }
            (ShapeKind::Sphere { center, radius }, motion) => {
                let center = match motion {
                    Motion::Translate { velocity } => shift(center, velocity),
                    _ => center.clone(),
                };
                Snapshot::Sphere { center, radius: *radius }
            }
            (ShapeKind::Ellipsoid { center, semi_axes }, motion) => match motion {
                Motion::Translate { velocity } => Snapshot::Ellipsoid { center: shift(center, velocity), semi_axes: semi_axes.clone() },
                Motion::TranslateAndDeform { velocity, axis_rates } => {
                    let mut axes = Vec::with_capacity(semi_axes.len());
                    for (a, rate) in semi_axes.iter().zip(axis_rates) {
                        let sq = a * a + rate * t;
                        if !(sq > 0.0) {
                            return Err(Error::InvalidShape(format!("semi-axis collapses at t={t}")));
                        }
                        axes.push(sq.sqrt());
                    }
                    Snapshot::Ellipsoid { center: shift(center, velocity), semi_axes: axes }
                }
                _ => Snapshot::Ellipsoid { center: center.clone(), semi_axes: semi_axes.clone() },
            },
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
                        if !(curve.r0 > curve.r1 && curve.r1 >= 0.0) {
                            return Err(Error::InvalidShape(format!("polar curve degenerates at t={t}")));
                        }
                    }
                    _ => {}
                }
                Snapshot::Polar { curve, angle }
            }
        };
        Ok(snap)
    }

    /// Euclidean distance from `x` to Γ(t).
    pub fn distance(&self, x: &[f64], t: f64) -> Result<f64> {
        self.check_dim(x)?;
        self.check_time(t)?;
        Ok(self.snapshot(t)?.distance(x))
    }

    /// Closest point of Γ(t) to `x`.
    pub fn closest_point(&self, x: &[f64], t: f64) -> Result<Vec<f64>> {
        self.check_dim(x)?;
        self.check_time(t)?;
        Ok(self.snapshot(t)?.foot(x))
    }

    /// Unit normal at `p` ∈ Γ(t), pointing from Ω₁ into Ω₂.
    pub fn normal(&self, p: &[f64], t: f64, omega1: Side) -> Result<Vec<f64>> {
        self.check_dim(p)?;
        self.check_time(t)?;
        let snap = self.snapshot(t)?;
        let distance = snap.distance(p);
        if distance > ON_INTERFACE_TOL {
            return Err(Error::OffInterface { distance, tolerance: ON_INTERFACE_TOL });
        }
        // `positive` points outward for closed shapes and along +axis for hyperplanes.
        let positive = snap.positive_normal(p);
        let flip = match (omega1, &snap) {
            (Side::PositiveHalf, Snapshot::Hyperplane { .. }) => true,
            (Side::Inside, s) if !matches!(s, Snapshot::Hyperplane { .. }) => false,
            (Side::Outside, s) if !matches!(s, Snapshot::Hyperplane { .. }) => true,
            _ => {
                return Err(Error::InvalidShape(format!("side {omega1:?} does not apply to this shape")));
            }
        };
        Ok(if flip { positive.iter().map(|v| -v).collect() } else { positive })
    }

    /// Region of `x` at time `t` given which side is Ω₁.
    pub fn classify(&self, x: &[f64], t: f64, omega1: Side) -> Result<RegionLabel> {
        self.check_dim(x)?;
        self.check_time(t)?;
        let snap = self.snapshot(t)?;
        if snap.distance(x) <= CLASSIFY_TOL {
            return Ok(RegionLabel::OnInterface);
        }
        let positive = snap.level(x) > 0.0;
        let in_omega1 = match omega1 {
            Side::Inside => !positive,
            Side::Outside | Side::PositiveHalf => positive,
        };
        Ok(if in_omega1 { RegionLabel::Omega1 } else { RegionLabel::Omega2 })
    }

    /// Bounding box `(lo, hi)` of a closed interface at time `t`; `None` for hyperplanes.
    pub fn bounding_box(&self, t: f64) -> Result<Option<(Vec<f64>, Vec<f64>)>> {
        self.check_time(t)?;
        Ok(match self.snapshot(t)? {
            Snapshot::Hyperplane { .. } => None,
            Snapshot::Sphere { center, radius } => Some((
                center.iter().map(|c| c - radius).collect(),
                center.iter().map(|c| c + radius).collect(),
            )),
            Snapshot::Ellipsoid { center, semi_axes } => Some((
                center.iter().zip(&semi_axes).map(|(c, a)| c - a).collect(),
                center.iter().zip(&semi_axes).map(|(c, a)| c + a).collect(),
            )),
            Snapshot::Polar { curve, .. } => {
                let r = curve.max_radius();
                Some((
                    vec![curve.center[0] - r, curve.center[1] - r],
                    vec![curve.center[0] + r, curve.center[1] + r],
                ))
            }
        })
    }

    /// `n` points on Γ(t), deterministic given the seed.
    pub fn sample(&self, n: usize, t: f64, strategy: Strategy, seed: u64) -> Result<Vec<Vec<f64>>> {
        self.check_time(t)?;
        let snap = self.snapshot(t)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let angles = |rng: &mut ChaCha8Rng| -> Vec<f64> {
            design_points(n, 1, strategy, rng).into_iter().map(|u| 2.0 * PI * u[0]).collect()
        };
        let gaussian_directions = |rng: &mut ChaCha8Rng, dim: usize| -> Vec<Vec<f64>> {
            (0..n)
                .map(|_| loop {
                    let g: Vec<f64> = (0..dim).map(|_| StandardNormal.sample(rng)).collect();
                    let norm = g.iter().map(|v| v * v).sum::<f64>().sqrt();
                    if norm > 1e-12 {
                        break g.into_iter().map(|v| v / norm).collect();
                    }
                })
                .collect()
        };
        let points = match &snap {
            Snapshot::Hyperplane { axis, offset, lo, hi } => {
                let free: Vec<usize> = (0..self.dim).filter(|i| i != axis).collect();
                design_points(n, free.len(), strategy, &mut rng)
                    .into_iter()
                    .map(|u| {
                        let mut p = vec![0.0; self.dim];
                        p[*axis] = *offset;
                        for (j, &i) in free.iter().enumerate() {
                            p[i] = lo[i] + u[j] * (hi[i] - lo[i]);
                        }
                        p
                    })
                    .collect()
            }
            Snapshot::Sphere { center, radius } => {
                let dirs = if self.dim == 2 {
                    angles(&mut rng).into_iter().map(|a| vec![a.cos(), a.sin()]).collect()
                } else {
                    gaussian_directions(&mut rng, self.dim)
                };
                dirs.into_iter()
                    .map(|d| d.iter().zip(center).map(|(d, c)| c + radius * d).collect())
                    .collect()
            }
            Snapshot::Ellipsoid { center, semi_axes } => {
                let dirs = if self.dim == 2 {
                    angles(&mut rng).into_iter().map(|a| vec![a.cos(), a.sin()]).collect()
                } else {
                    gaussian_directions(&mut rng, self.dim)
                };
                dirs.into_iter()
                    .map(|d| d.iter().zip(center).zip(semi_axes).map(|((d, c), a)| c + a * d).collect())
                    .collect()
            }
            Snapshot::Polar { curve, angle } => angles(&mut rng)
                .into_iter()
                .map(|theta| {
                    let local = rotate(curve.local_point(theta), *angle);
                    vec![curve.center[0] + local[0], curve.center[1] + local[1]]
                })
                .collect(),
        };
        Ok(points)
    }
}

fn kind_dim(kind: &ShapeKind) -> usize {
    match kind {
        ShapeKind::Hyperplane { lo, .. } => lo.len(),
        ShapeKind::Sphere { center, .. } | ShapeKind::Ellipsoid { center, .. } => center.len(),
        ShapeKind::PolarCurve(_) => 2,
    }
}

fn rotate(v: [f64; 2], angle: f64) -> [f64; 2] {
    let (s, c) = angle.sin_cos();
    [c * v[0] - s * v[1], s * v[0] + c * v[1]]
}

impl Snapshot {
    fn distance(&self, x: &[f64]) -> f64 {
        match self {
            Snapshot::Hyperplane { axis, offset, .. } => (x[*axis] - offset).abs(),
            Snapshot::Sphere { center, radius } => (norm_diff(x, center) - radius).abs(),
            Snapshot::Ellipsoid { .. } => {
                let foot = self.foot(x);
                norm_diff(x, &foot)
            }
            Snapshot::Polar { curve, angle } => curve.local_distance(self.body(x, curve, *angle)).0,
        }
    }

    fn body(&self, x: &[f64], curve: &PolarCurve, angle: f64) -> [f64; 2] {
        rotate([x[0] - curve.center[0], x[1] - curve.center[1]], -angle)
    }

    fn foot(&self, x: &[f64]) -> Vec<f64> {
        match self {
            Snapshot::Hyperplane { axis, offset, .. } => {
                let mut p = x.to_vec();
                p[*axis] = *offset;
                p
            }
            Snapshot::Sphere { center, radius } => {
                let r = norm_diff(x, center);
                if r == 0.0 {
                    let mut p = center.clone();
                    p[0] += radius;
                    return p;
                }
                x.iter().zip(center).map(|(x, c)| c + (x - c) * radius / r).collect()
            }
            Snapshot::Ellipsoid { center, semi_axes } => {
                let y: Vec<f64> = x.iter().zip(center).map(|(x, c)| x - c).collect();
                let abs: Vec<f64> = y.iter().map(|v| v.abs()).collect();
                let foot = ellipsoid_foot_abs(semi_axes, &abs);
                foot.iter()
                    .zip(&y)
                    .zip(center)
                    .map(|((p, y), c)| c + if *y < 0.0 { -p } else { *p })
                    .collect()
            }
            Snapshot::Polar { curve, angle } => {
                let (_, theta) = curve.local_distance(self.body(x, curve, *angle));
                let local = rotate(curve.local_point(theta), *angle);
                vec![curve.center[0] + local[0], curve.center[1] + local[1]]
            }
        }
    }

    /// Positive outside the closed shape, or on the +axis side of a hyperplane.
    fn level(&self, x: &[f64]) -> f64 {
        match self {
            Snapshot::Hyperplane { axis, offset, .. } => x[*axis] - offset,
            Snapshot::Sphere { center, radius } => norm_diff(x, center) - radius,
            Snapshot::Ellipsoid { center, semi_axes } => {
                x.iter().zip(center).zip(semi_axes).map(|((x, c), a)| ((x - c) / a).powi(2)).sum::<f64>() - 1.0
            }
            Snapshot::Polar { curve, angle } => curve.local_level(self.body(x, curve, *angle)),
        }
    }

    fn positive_normal(&self, p: &[f64]) -> Vec<f64> {
        match self {
            Snapshot::Hyperplane { axis, .. } => {
                let mut n = vec![0.0; p.len()];
                n[*axis] = 1.0;
                n
            }
            Snapshot::Sphere { center, .. } => normalize(p.iter().zip(center).map(|(p, c)| p - c).collect()),
            Snapshot::Ellipsoid { center, semi_axes } => normalize(
                p.iter().zip(center).zip(semi_axes).map(|((p, c), a)| (p - c) / (a * a)).collect(),
            ),
            Snapshot::Polar { curve, angle } => {
                let y = self.body(p, curve, *angle);
                let theta = y[1].atan2(y[0]);
                rotate(curve.outward_normal(theta), *angle).to_vec()
            }
        }
    }
}

fn norm_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt()
}

fn normalize(v: Vec<f64>) -> Vec<f64> {
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.into_iter().map(|x| x / n).collect()
}

/// Closest point on the axis-aligned ellipsoid `Σ (p_i / a_i)^2 = 1` to a point `y`
/// with non-negative coordinates. The foot point is returned with non-negative
/// coordinates as well.
///
/// Stationary points satisfy `p_i = a_i^2 y_i / (a_i^2 + λ)`. With `k` the smallest
/// semi-axis, `y_k > 0` puts the global minimizer at the unique root of the
/// constraint for `λ > -a_k^2`; `y_k = 0` either pins `λ = -a_k^2` or drops axis `k`.
pub fn ellipsoid_foot_abs(axes: &[f64], y: &[f64]) -> Vec<f64> {
    let mut foot = vec![0.0; axes.len()];
    let mut active: Vec<usize> = (0..axes.len()).collect();
    loop {
        let k = *active
            .iter()
            .min_by(|&&i, &&j| axes[i].total_cmp(&axes[j]).then(y[j].total_cmp(&y[i])))
            .expect("non-empty active set");
        if y[k] > 0.0 {
            let shift = lagrange_root(axes, y, &active, k);
            for &i in &active {
                let gap = axes[i] * axes[i] - axes[k] * axes[k] + shift;
                foot[i] = axes[i] * axes[i] * y[i] / gap;
            }
            return foot;
        }
        if active.len() == 1 {
            foot[k] = axes[k];
            return foot;
        }
        let ak2 = axes[k] * axes[k];
        let mut sum = 0.0;
        let mut feasible = true;
        let mut trial = Vec::with_capacity(active.len());
        for &i in active.iter().filter(|&&i| i != k) {
            let gap = axes[i] * axes[i] - ak2;
            let q = if y[i] == 0.0 {
                0.0
            } else if gap > 0.0 {
                axes[i] * axes[i] * y[i] / gap
            } else {
                feasible = false;
                0.0
            };
            sum += (q / axes[i]).powi(2);
            trial.push((i, q));
        }
        if feasible && sum < 1.0 {
            for (i, q) in trial {
                foot[i] = q;
            }
            foot[k] = axes[k] * (1.0 - sum).sqrt();
            return foot;
        }
        foot[k] = 0.0;
        active.retain(|&i| i != k);
    }
}

/// Root `s = a_k^2 + λ > 0` of the foot-point constraint restricted to `active`.
fn lagrange_root(axes: &[f64], y: &[f64], active: &[usize], k: usize) -> f64 {
    let ak2 = axes[k] * axes[k];
    let gaps: Vec<(f64, f64)> = active
        .iter()
        .map(|&i| (axes[i] * axes[i] - ak2, axes[i] * y[i]))
        .collect();
    let constraint = |s: f64| -> (f64, f64) {
        let mut f = -1.0;
        let mut df = 0.0;
        for &(gap, ay) in &gaps {
            let r = ay / (gap + s);
            f += r * r;
            df -= 2.0 * r * r / (gap + s);
        }
        (f, df)
    };
    // Newton is monotone from the left of the root: the constraint is convex and
    // decreasing, and it is non-negative at `a_k y_k`.
    let mut s = axes[k] * y[k];
    for _ in 0..NEWTON_MAX_ITERS {
        let (f, df) = constraint(s);
        let step = -f / df;
        s += step;
        if step.abs() <= 1e-12 * s.max(1e-300) || f == 0.0 {
            return s;
        }
    }
    // Bisection fallback on the bracket [a_k y_k, a_k y_k + |a∘y|].
    let norm = gaps.iter().map(|(_, ay)| ay * ay).sum::<f64>().sqrt();
    let mut lo = axes[k] * y[k];
    let mut hi = lo + norm;
    for _ in 0..200 {
        let mid = if hi / lo > 4.0 { (lo * hi).sqrt() } else { 0.5 * (lo + hi) };
        if constraint(mid).0 > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-15 * hi {
            break;
        }
    }
    0.5 * (lo + hi)
}

/// Outer computational domain.
#[derive(Clone, Debug, PartialEq)]
pub enum Domain {
    Box { lo: Vec<f64>, hi: Vec<f64> },
    /// Region enclosed by a polar curve.
    Polar(PolarCurve),
}

impl Domain {
    pub fn unit_box(dim: usize, lo: f64, hi: f64) -> Self {
        Domain::Box { lo: vec![lo; dim], hi: vec![hi; dim] }
    }

    pub fn dim(&self) -> usize {
        match self {
            Domain::Box { lo, .. } => lo.len(),
            Domain::Polar(_) => 2,
        }
    }

    /// Axis-aligned bounding box `(lo, hi)`.
    pub fn bounding_box(&self) -> (Vec<f64>, Vec<f64>) {
        match self {
            Domain::Box { lo, hi } => (lo.clone(), hi.clone()),
            Domain::Polar(c) => {
                let r = c.max_radius();
                (vec![c.center[0] - r, c.center[1] - r], vec![c.center[0] + r, c.center[1] + r])
            }
        }
    }

    pub fn volume(&self) -> f64 {
        match self {
            Domain::Box { lo, hi } => lo.iter().zip(hi).map(|(l, h)| h - l).product(),
            Domain::Polar(c) => c.area(),
        }
    }

    /// Strictly inside the domain.
    pub fn contains(&self, x: &[f64]) -> bool {
        match self {
            Domain::Box { lo, hi } => x.iter().zip(lo.iter().zip(hi)).all(|(x, (l, h))| x > l && x < h),
            Domain::Polar(c) => c.local_level([x[0] - c.center[0], x[1] - c.center[1]]) < 0.0,
        }
    }

    /// Like [`contains`](Self::contains) but boundary points count.
    pub fn contains_closed(&self, x: &[f64]) -> bool {
        match self {
            Domain::Box { lo, hi } => x.iter().zip(lo.iter().zip(hi)).all(|(x, (l, h))| x >= l && x <= h),
            Domain::Polar(c) => c.local_level([x[0] - c.center[0], x[1] - c.center[1]]) <= 1e-12,
        }
    }

    /// Distance from an interior point to the outer boundary.
    pub fn boundary_distance(&self, x: &[f64]) -> f64 {
        match self {
            Domain::Box { lo, hi } => x
                .iter()
                .zip(lo.iter().zip(hi))
                .map(|(x, (l, h))| (x - l).abs().min((h - x).abs()))
                .fold(f64::INFINITY, f64::min),
            Domain::Polar(c) => c.local_distance([x[0] - c.center[0], x[1] - c.center[1]]).0,
        }
    }

    pub fn describe(&self) -> String {
        match self {
            Domain::Box { lo, hi } => format!("box lo={lo:?} hi={hi:?}"),
            Domain::Polar(c) => format!(
                "polar r(θ)={} + {}·{:?}({}θ) about {:?}",
                c.r0, c.r1, c.wave, c.lobes, c.center
            ),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn circle() -> InterfaceShape {
        InterfaceShape::sphere(vec![1.5, 1.5], 1.0).unwrap()
    }

    fn flower() -> InterfaceShape {
        InterfaceShape::polar(PolarCurve::new([0.0, 0.0], 0.4, 0.2, 5.0, Wave::NegCos).unwrap()).unwrap()
    }

    #[test]
    fn hyperplane_distance_is_abs_offset() {
        let line = InterfaceShape::hyperplane(2, 0, 0.0, vec![-1.0, -1.0], vec![1.0, 1.0]).unwrap();
        assert_eq!(line.distance(&[0.3, -0.5], 0.0).unwrap(), 0.3);
    }

    #[test]
    fn sphere_center_distance_is_radius() {
        assert_eq!(circle().distance(&[1.5, 1.5], 0.0).unwrap(), 1.0);
        let ball = InterfaceShape::sphere(vec![0.0; 10], 0.5).unwrap();
        assert_eq!(ball.distance(&[0.0; 10], 0.0).unwrap(), 0.5);
    }

    #[test]
    fn ellipse_distance_on_minor_axis() {
        let e = InterfaceShape::ellipsoid(vec![0.0, 0.0], vec![0.2, 0.5]).unwrap();
        assert!((e.distance(&[0.4, 0.0], 0.0).unwrap() - 0.2).abs() < 1e-14);
        // center: nearest point is the end of the minor axis
        assert!((e.distance(&[0.0, 0.0], 0.0).unwrap() - 0.2).abs() < 1e-14);
    }

    #[test]
    fn ellipse_interior_degenerate_branch() {
        let e = InterfaceShape::ellipsoid(vec![0.0, 0.0], vec![0.2, 0.5]).unwrap();
        let p = e.closest_point(&[0.0, 0.1], 0.0).unwrap();
        let residual = (p[0] / 0.2).powi(2) + (p[1] / 0.5).powi(2) - 1.0;
        assert!(residual.abs() < 1e-12);
        let d = e.distance(&[0.0, 0.1], 0.0).unwrap();
        assert!(d < 0.2 && d > 0.19, "{d}");
    }

    #[test]
    fn normals_follow_orientation() {
        let n = circle().normal(&[2.5, 1.5], 0.0, Side::Inside).unwrap();
        assert_eq!(n, vec![1.0, 0.0]);
        let n = circle().normal(&[2.5, 1.5], 0.0, Side::Outside).unwrap();
        assert_eq!(n, vec![-1.0, -0.0]);
        let line = InterfaceShape::hyperplane(2, 0, 0.0, vec![-1.0, -1.0], vec![1.0, 1.0]).unwrap();
        assert_eq!(line.normal(&[0.0, 0.7], 0.0, Side::PositiveHalf).unwrap(), vec![-1.0, -0.0]);
    }

    #[test]
    fn normal_rejects_off_interface_point() {
        let err = circle().normal(&[1.5, 1.5], 0.0, Side::Inside).unwrap_err();
        assert!(matches!(err, Error::OffInterface { .. }));
    }

    #[test]
    fn flower_normal_matches_level_gradient() {
        // implicit level g(x) = |x| - r(atan2(y, x)); its gradient is the outward normal
        let shape = flower();
        let curve = PolarCurve::new([0.0, 0.0], 0.4, 0.2, 5.0, Wave::NegCos).unwrap();
        let g = |x: f64, y: f64| x.hypot(y) - curve.radius(y.atan2(x));
        let h = 1e-6;
        let theta: f64 = 0.3;
        let p = curve.local_point(theta);
        let gx = (g(p[0] + h, p[1]) - g(p[0] - h, p[1])) / (2.0 * h);
        let gy = (g(p[0], p[1] + h) - g(p[0], p[1] - h)) / (2.0 * h);
        let norm = gx.hypot(gy);
        let n = shape.normal(&p, 0.0, Side::Inside).unwrap();
        assert!((n[0] - gx / norm).abs() < 1e-8 && (n[1] - gy / norm).abs() < 1e-8);
        let n0 = shape.normal(&[0.2, 0.0], 0.0, Side::Inside).unwrap();
        assert!((n0[0] - 1.0).abs() < 1e-12 && n0[1].abs() < 1e-12);
    }

    #[test]
    fn classify_examples() {
        assert_eq!(circle().classify(&[1.5, 1.5], 0.0, Side::Outside).unwrap(), RegionLabel::Omega2);
        let line = InterfaceShape::hyperplane(2, 0, 0.0, vec![-1.0, -1.0], vec![1.0, 1.0]).unwrap();
        assert_eq!(line.classify(&[0.5, 0.0], 0.0, Side::PositiveHalf).unwrap(), RegionLabel::Omega1);
        let e = InterfaceShape::ellipsoid(vec![0.0, 0.0], vec![0.2, 0.5]).unwrap();
        assert_eq!(e.classify(&[0.2, 0.0], 0.0, Side::Inside).unwrap(), RegionLabel::OnInterface);
    }

    #[test]
    fn dimension_mismatch_is_rejected() {
        assert!(matches!(
            circle().distance(&[0.0, 0.0, 0.0], 0.0),
            Err(Error::DimensionMismatch { expected: 2, got: 3 })
        ));
    }

    #[test]
    fn moving_shape_rejects_time_outside_horizon() {
        let moving = InterfaceShape::moving(
            ShapeKind::Sphere { center: vec![1.2, 1.2], radius: 1.0 },
            Motion::Translate { velocity: vec![1.0, 1.0] },
            1.0,
        )
        .unwrap();
        assert!(matches!(moving.distance(&[0.0, 0.0], 1.5), Err(Error::TimeOutOfHorizon { .. })));
        assert!(moving.distance(&[0.0, 0.0], 1.0).is_ok());
    }

    #[test]
    fn sphere_samples_lie_on_surface() {
        for p in circle().sample(100, 0.0, Strategy::Grid, 3).unwrap() {
            assert!(((p[0] - 1.5).powi(2) + (p[1] - 1.5).powi(2) - 1.0).abs() < 1e-12);
        }
        let ball = InterfaceShape::sphere(vec![0.0; 10], 0.5).unwrap();
        let pts = ball.sample(200, 0.0, Strategy::LatinHypercube, 1).unwrap();
        assert_eq!(pts.len(), 200);
        for p in pts {
            assert!((p.iter().map(|v| v * v).sum::<f64>().sqrt() - 0.5).abs() < 1e-12);
        }
    }

    #[test]
    fn star_samples_satisfy_body_frame_equation() {
        let star = InterfaceShape::deforming_star([1.2, 1.2], 1.0, 5.0, Wave::NegCos, 0.3, [0.8, 0.8], 2.0 * PI, 1.0).unwrap();
        let t = 0.5;
        for p in star.sample(64, t, Strategy::LatinHypercube, 9).unwrap() {
            let c = [1.2 + 0.8 * t, 1.2 + 0.8 * t];
            let body = rotate([p[0] - c[0], p[1] - c[1]], -2.0 * PI * t);
            let theta = body[1].atan2(body[0]);
            let r = 1.0 - 0.3 * t * (5.0 * theta).cos();
            assert!((body[0].hypot(body[1]) - r).abs() < 1e-8);
            assert!(star.distance(&p, t).unwrap() < 1e-8);
        }
    }
}
