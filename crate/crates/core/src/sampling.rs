//! Collocation point generation.
//!
//! All samplers are pure functions of `(problem, counts, strategy, seed)`; the
//! RNG lives inside each call.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::geometry::{Domain, Region, RegionLabel, CLASSIFY_TOL};
use crate::problems::{Counts, InteriorSplit, ProblemSpec};

/// Seed offset separating validation clouds from training sets.
pub const VALIDATION_SEED_OFFSET: u64 = 1_000_000;
/// Number of structured time slices for space-time interface and boundary sets.
pub const TIME_SLICES: usize = 10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Strategy {
    /// Cell-centered uniform grid.
    Grid,
    LatinHypercube,
}

impl Strategy {
    pub fn name(self) -> &'static str {
        match self {
            Strategy::Grid => "grid",
            Strategy::LatinHypercube => "lhs",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "grid" => Some(Strategy::Grid),
            "lhs" | "latin_hypercube" => Some(Strategy::LatinHypercube),
            _ => None,
        }
    }
}

/// `n` points in the unit cube `[0, 1)^dim`.
///
/// The grid design is cell-centered; when `n` is not a perfect power the finest
/// grid with at least `n` cells is thinned at evenly spaced indices. The Latin
/// hypercube places exactly one point per stratum `[k/n, (k+1)/n)` in every
/// coordinate.
pub fn design_points(n: usize, dim: usize, strategy: Strategy, rng: &mut impl Rng) -> Vec<Vec<f64>> {
    if n == 0 {
        return Vec::new();
    }
    if dim == 0 {
        return vec![Vec::new(); n];
    }
    match strategy {
        Strategy::Grid => {
            let side = integer_root_ceil(n, dim);
            let total = side.pow(dim as u32);
            (0..n)
                .map(|k| {
                    let mut index = if total == n { k } else { ((k as f64 + 0.5) * total as f64 / n as f64) as usize };
                    let mut p = vec![0.0; dim];
                    for coord in p.iter_mut() {
                        *coord = ((index % side) as f64 + 0.5) / side as f64;
                        index /= side;
                    }
                    p
                })
                .collect()
        }
        Strategy::LatinHypercube => {
            let mut columns = Vec::with_capacity(dim);
            for _ in 0..dim {
                let mut perm: Vec<usize> = (0..n).collect();
                perm.shuffle(rng);
                columns.push(perm);
            }
            (0..n)
                .map(|k| {
                    columns
                        .iter()
                        .map(|perm| (perm[k] as f64 + rng.random::<f64>()) / n as f64)
                        .collect()
                })
                .collect()
        }
    }
}

fn integer_root_ceil(n: usize, dim: usize) -> usize {
    let mut side = (n as f64).powf(1.0 / dim as f64).round().max(1.0) as usize;
    while side.checked_pow(dim as u32).is_some_and(|p| p < n) {
        side += 1;
    }
    while side > 1 && (side - 1).checked_pow(dim as u32).is_some_and(|p| p >= n) {
        side -= 1;
    }
    side
}

fn scale_to_box(u: &[f64], lo: &[f64], hi: &[f64]) -> Vec<f64> {
    u.iter().zip(lo.iter().zip(hi)).map(|(u, (l, h))| l + u * (h - l)).collect()
}

fn derived_seed(seed: u64, stream: u64) -> u64 {
    seed.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(stream.wrapping_mul(0xD1B5_4A32_D192_ED03)) ^ stream
}

/// A point tagged with the subdomain that owns it.
#[derive(Clone, Debug, PartialEq)]
pub struct TaggedPoint {
    /// Spatial coordinates, with time appended for space-time problems.
    pub x: Vec<f64>,
    pub region: Region,
}

/// Collocation sets for one problem. For space-time problems every point stores
/// its time as the last coordinate.
#[derive(Clone, Debug, PartialEq)]
pub struct CollocationSet {
    pub dim: usize,
    pub time_dependent: bool,
    pub interior1: Vec<Vec<f64>>,
    pub interior2: Vec<Vec<f64>>,
    pub boundary: Vec<TaggedPoint>,
    pub interface: Vec<Vec<f64>>,
    pub initial: Option<Vec<TaggedPoint>>,
    pub seed: u64,
    pub strategy: Strategy,
}

impl CollocationSet {
    /// Splits a stored point into spatial coordinates and time.
    pub fn split<'a>(&self, p: &'a [f64]) -> (&'a [f64], f64) {
        if self.time_dependent {
            (&p[..self.dim], p[self.dim])
        } else {
            (p, 0.0)
        }
    }

    pub fn interior(&self, region: Region) -> &[Vec<f64>] {
        match region {
            Region::Omega1 => &self.interior1,
            Region::Omega2 => &self.interior2,
        }
    }

    /// CSV with columns `x1..xd[,t],set_tag,region`.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        let mut header: Vec<String> = (1..=self.dim).map(|i| format!("x{i}")).collect();
        if self.time_dependent {
            header.push("t".into());
        }
        header.push("set_tag".into());
        header.push("region".into());
        let _ = writeln!(out, "{}", header.join(","));
        let mut row = |p: &[f64], tag: &str, region: &str| {
            let coords: Vec<String> = p.iter().map(|v| format!("{v:.16e}")).collect();
            let _ = writeln!(out, "{},{tag},{region}", coords.join(","));
        };
        for p in &self.interior1 {
            row(p, "interior", "omega1");
        }
        for p in &self.interior2 {
            row(p, "interior", "omega2");
        }
        for p in &self.boundary {
            row(&p.x, "boundary", p.region.name());
        }
        for p in &self.interface {
            row(p, "interface", "interface");
        }
        if let Some(initial) = &self.initial {
            for p in initial {
                row(&p.x, "initial", p.region.name());
            }
        }
        out
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut file = std::fs::File::create(path)?;
        file.write_all(self.to_csv().as_bytes())?;
        Ok(())
    }
}

/// Keeps points strictly inside the domain and away from Γ(t), tagged by region.
fn classify_interior(problem: &ProblemSpec, x: &[f64], t: f64) -> Result<Option<Region>> {
    if !problem.domain.contains(x) || problem.domain.boundary_distance(x) <= CLASSIFY_TOL {
        return Ok(None);
    }
    Ok(problem.region_at(x, t)?.region())
}

/// Candidate count needed so that roughly `m` design points land inside the domain.
fn oversampled(domain: &Domain, m: usize) -> usize {
    match domain {
        Domain::Box { .. } => m,
        Domain::Polar(_) => {
            let (lo, hi) = domain.bounding_box();
            let box_volume: f64 = lo.iter().zip(&hi).map(|(l, h)| h - l).product();
            (m as f64 * box_volume / domain.volume()).round() as usize
        }
    }
}

/// Interior points of an elliptic problem, split into `(Ω₁, Ω₂)`.
pub fn sample_interior(
    problem: &ProblemSpec,
    m_total: usize,
    strategy: Strategy,
    seed: u64,
) -> Result<(Vec<Vec<f64>>, Vec<Vec<f64>>)> {
    if m_total < 2 {
        return Err(Error::Sampling(format!("need at least 2 interior points, got {m_total}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (lo, hi) = problem.domain.bounding_box();
    let mut parts = (Vec::new(), Vec::new());
    match problem.interior_split {
        InteriorSplit::Geometric => {
            let candidates = oversampled(&problem.domain, m_total);
            for u in design_points(candidates, problem.dim, strategy, &mut rng) {
                let x = scale_to_box(&u, &lo, &hi);
                match classify_interior(problem, &x, 0.0)? {
                    Some(Region::Omega1) => parts.0.push(x),
                    Some(Region::Omega2) => parts.1.push(x),
                    None => {}
                }
            }
        }
        InteriorSplit::Balanced => {
            let (ilo, ihi) = problem
                .interface
                .bounding_box(0.0)?
                .ok_or_else(|| Error::Sampling("balanced split needs a closed interface".into()))?;
            let inside = m_total / 2;
            parts.0 = fill_region(problem, Region::Omega1, inside, &ilo, &ihi, strategy, &mut rng)?;
            parts.1 = fill_region(problem, Region::Omega2, m_total - inside, &lo, &hi, strategy, &mut rng)?;
        }
    }
    if parts.0.is_empty() || parts.1.is_empty() {
        return Err(Error::Sampling(format!(
            "region received no points ({} in Ω₁, {} in Ω₂)",
            parts.0.len(),
            parts.1.len()
        )));
    }
    Ok(parts)
}

/// Draws designs over `[lo, hi]` until `target` points of `region` are collected.
fn fill_region(
    problem: &ProblemSpec,
    region: Region,
    target: usize,
    lo: &[f64],
    hi: &[f64],
    strategy: Strategy,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<Vec<f64>>> {
    let mut out = Vec::with_capacity(target);
    let mut batch = target.max(16);
    for _ in 0..64 {
        for u in design_points(batch, problem.dim, strategy, rng) {
            let x = scale_to_box(&u, lo, hi);
            if classify_interior(problem, &x, 0.0)? == Some(region) {
                out.push(x);
                if out.len() == target {
                    return Ok(out);
                }
            }
        }
        batch *= 2;
    }
    Err(Error::Sampling(format!("could not fill {} with {target} points", region.name())))
}

/// Points on the outer boundary, tagged with the owning subdomain.
pub fn sample_boundary(problem: &ProblemSpec, m: usize, strategy: Strategy, seed: u64) -> Result<Vec<TaggedPoint>> {
    let points = boundary_points(&problem.domain, m, strategy, seed);
    let mut out = Vec::with_capacity(points.len());
    for x in points {
        if let Some(region) = problem.region_at(&x, 0.0)?.region() {
            out.push(TaggedPoint { x, region });
        }
    }
    Ok(out)
}

/// Untagged boundary points: area-weighted faces for boxes, angles for polar domains.
pub fn boundary_points(domain: &Domain, m: usize, strategy: Strategy, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    match domain {
        Domain::Polar(curve) => design_points(m, 1, strategy, &mut rng)
            .into_iter()
            .map(|u| {
                let theta = 2.0 * std::f64::consts::PI * u[0];
                let p = curve.local_point(theta);
                vec![curve.center[0] + p[0], curve.center[1] + p[1]]
            })
            .collect(),
        Domain::Box { lo, hi } => {
            let dim = lo.len();
            let areas: Vec<f64> = (0..dim)
                .map(|axis| (0..dim).filter(|&i| i != axis).map(|i| hi[i] - lo[i]).product())
                .collect();
            let faces: Vec<(usize, bool)> = (0..dim).flat_map(|a| [(a, false), (a, true)]).collect();
            let weights: Vec<f64> = faces.iter().map(|(a, _)| areas[*a]).collect();
            let counts = largest_remainder(m, &weights);
            let mut out = Vec::with_capacity(m);
            for (&(axis, upper), &count) in faces.iter().zip(&counts) {
                let free: Vec<usize> = (0..dim).filter(|&i| i != axis).collect();
                for u in design_points(count, free.len(), strategy, &mut rng) {
                    let mut p = vec![0.0; dim];
                    p[axis] = if upper { hi[axis] } else { lo[axis] };
                    for (j, &i) in free.iter().enumerate() {
                        p[i] = lo[i] + u[j] * (hi[i] - lo[i]);
                    }
                    out.push(p);
                }
            }
            out
        }
    }
}

/// Splits `m` proportionally to `weights`, handing leftovers to the largest remainders.
fn largest_remainder(m: usize, weights: &[f64]) -> Vec<usize> {
    let total: f64 = weights.iter().sum();
    let exact: Vec<f64> = weights.iter().map(|w| m as f64 * w / total).collect();
    let mut counts: Vec<usize> = exact.iter().map(|e| e.floor() as usize).collect();
    let mut order: Vec<usize> = (0..weights.len()).collect();
    order.sort_by(|&a, &b| (exact[b] - exact[b].floor()).total_cmp(&(exact[a] - exact[a].floor())).then(a.cmp(&b)));
    let assigned: usize = counts.iter().sum();
    for &i in order.iter().take(m - assigned) {
        counts[i] += 1;
    }
    counts
}

/// Full collocation set for an elliptic problem.
pub fn sample_elliptic(problem: &ProblemSpec, counts: Counts, strategy: Strategy, seed: u64) -> Result<CollocationSet> {
    let (interior1, interior2) = sample_interior(problem, counts.interior, strategy, derived_seed(seed, 1))?;
    let boundary = sample_boundary(problem, counts.boundary, strategy, derived_seed(seed, 2))?;
    let interface = problem.interface.sample(counts.interface, 0.0, strategy, derived_seed(seed, 3))?;
    Ok(CollocationSet {
        dim: problem.dim,
        time_dependent: false,
        interior1,
        interior2,
        boundary,
        interface,
        initial: None,
        seed,
        strategy,
    })
}

/// Structured slice times `k·T/10`, `k = 1..=10`.
pub fn slice_times(horizon: f64) -> Vec<f64> {
    (1..=TIME_SLICES).map(|k| k as f64 * horizon / TIME_SLICES as f64).collect()
}

/// Full space-time collocation set for a parabolic problem.
pub fn sample_spacetime(
    problem: &ProblemSpec,
    counts: Counts,
    strategy: Strategy,
    seed: u64,
) -> Result<CollocationSet> {
    if !problem.parabolic {
        return Err(Error::Sampling(format!("{} is not parabolic", problem.name)));
    }
    if counts.initial == 0 {
        return Err(Error::Sampling("parabolic problems need initial points".into()));
    }
    let horizon = problem.horizon;
    let d = problem.dim;
    let (lo, hi) = problem.domain.bounding_box();

    let mut interior1 = Vec::new();
    let mut interior2 = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(derived_seed(seed, 1));
    for u in design_points(oversampled(&problem.domain, counts.interior), d + 1, strategy, &mut rng) {
        let x = scale_to_box(&u[..d], &lo, &hi);
        let t = u[d] * horizon;
        if t <= 0.0 {
            continue;
        }
        let region = classify_interior(problem, &x, t)?;
        let mut p = x;
        p.push(t);
        match region {
            Some(Region::Omega1) => interior1.push(p),
            Some(Region::Omega2) => interior2.push(p),
            None => {}
        }
    }
    if interior1.is_empty() || interior2.is_empty() {
        return Err(Error::Sampling("space-time region received no points".into()));
    }

    // Half of the interface budget on the structured slices, the rest at random times.
    let per_slice = counts.interface / (2 * TIME_SLICES);
    let mut interface = Vec::with_capacity(counts.interface);
    for (k, t) in slice_times(horizon).into_iter().enumerate() {
        for mut p in problem.interface.sample(per_slice, t, strategy, derived_seed(seed, 100 + k as u64))? {
            p.push(t);
            interface.push(p);
        }
    }
    let remainder = counts.interface - per_slice * TIME_SLICES;
    let mut rng = ChaCha8Rng::seed_from_u64(derived_seed(seed, 3));
    let random_times: Vec<f64> = design_points(remainder, 1, strategy, &mut rng)
        .into_iter()
        .map(|u| (u[0] * horizon).max(f64::MIN_POSITIVE))
        .collect();
    for (k, t) in random_times.into_iter().enumerate() {
        let seed_k = derived_seed(seed, 10_000 + k as u64);
        for mut p in problem.interface.sample(1, t, Strategy::LatinHypercube, seed_k)? {
            p.push(t);
            interface.push(p);
        }
    }

    // Boundary: half the points on the slices (cycled), the rest at random times.
    let spatial = boundary_points(&problem.domain, counts.boundary, strategy, derived_seed(seed, 2));
    let slices = slice_times(horizon);
    let structured = counts.boundary / 2;
    let mut rng = ChaCha8Rng::seed_from_u64(derived_seed(seed, 4));
    let mut times: Vec<f64> = (0..structured).map(|k| slices[k % TIME_SLICES]).collect();
    times.extend(
        design_points(counts.boundary - structured, 1, strategy, &mut rng)
            .into_iter()
            .map(|u| (u[0] * horizon).max(f64::MIN_POSITIVE)),
    );
    let mut boundary = Vec::with_capacity(counts.boundary);
    for (x, t) in spatial.into_iter().zip(times) {
        if let Some(region) = problem.region_at(&x, t)?.region() {
            let mut p = x;
            p.push(t);
            boundary.push(TaggedPoint { x: p, region });
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(derived_seed(seed, 5));
    let mut initial = Vec::with_capacity(counts.initial);
    for u in design_points(oversampled(&problem.domain, counts.initial), d, strategy, &mut rng) {
        let x = scale_to_box(&u, &lo, &hi);
        if let Some(region) = classify_interior(problem, &x, 0.0)? {
            let mut p = x;
            p.push(0.0);
            initial.push(TaggedPoint { x: p, region });
        }
    }

    Ok(CollocationSet {
        dim: d,
        time_dependent: true,
        interior1,
        interior2,
        boundary,
        interface,
        initial: Some(initial),
        seed,
        strategy,
    })
}

/// Training set for any problem, dispatching on its type.
pub fn sample_problem(problem: &ProblemSpec, counts: Counts, strategy: Strategy, seed: u64) -> Result<CollocationSet> {
    if problem.parabolic {
        sample_spacetime(problem, counts, strategy, seed)
    } else {
        sample_elliptic(problem, counts, strategy, seed)
    }
}

/// Region-tagged evaluation cloud (space-time for parabolic problems).
pub fn validation_points(problem: &ProblemSpec, count: usize, strategy: Strategy, seed: u64) -> Result<Vec<TaggedPoint>> {
    let tag = |points: Vec<Vec<f64>>, region: Region| points.into_iter().map(move |x| TaggedPoint { x, region });
    if problem.parabolic {
        let set = sample_spacetime(problem, Counts::new(count, 1, 0, 1), strategy, seed)?;
        Ok(tag(set.interior1, Region::Omega1).chain(tag(set.interior2, Region::Omega2)).collect())
    } else {
        let (a, b) = sample_interior(problem, count, strategy, seed)?;
        Ok(tag(a, Region::Omega1).chain(tag(b, Region::Omega2)).collect())
    }
}

/// Whether a tagged label matches a region, for invariant checks.
pub fn label_matches(label: RegionLabel, region: Region) -> bool {
    label.region() == Some(region)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::find;

    #[test]
    fn one_dimensional_grid_is_cell_centered() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let pts = design_points(2, 1, Strategy::Grid, &mut rng);
        assert_eq!(pts, vec![vec![0.25], vec![0.75]]);
    }

    #[test]
    fn lhs_has_one_point_per_stratum() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let m = 2000;
        let pts = design_points(m, 10, Strategy::LatinHypercube, &mut rng);
        for coord in 0..10 {
            let mut col: Vec<f64> = pts.iter().map(|p| p[coord]).collect();
            col.sort_by(f64::total_cmp);
            for (k, v) in col.iter().enumerate() {
                assert!(*v >= k as f64 / m as f64 && *v < (k + 1) as f64 / m as f64);
            }
        }
    }

    #[test]
    fn line2d_grid_splits_evenly() {
        let p = find("line2d").unwrap();
        let (a, b) = sample_interior(&p, 1600, Strategy::Grid, 0).unwrap();
        assert_eq!((a.len(), b.len()), (800, 800));
    }

    #[test]
    fn square_boundary_grid_has_forty_per_edge() {
        let p = find("line2d").unwrap();
        let pts = sample_boundary(&p, 160, Strategy::Grid, 0).unwrap();
        assert_eq!(pts.len(), 160);
        let on = |f: &dyn Fn(&TaggedPoint) -> bool| pts.iter().filter(|p| f(p)).count();
        assert_eq!(on(&|p| p.x[0] == 1.0), 40);
        assert_eq!(on(&|p| p.x[0] == -1.0), 40);
        assert_eq!(on(&|p| p.x[1] == 1.0), 40);
        assert_eq!(on(&|p| p.x[1] == -1.0), 40);
        for p in &pts {
            let expected = if p.x[0] > 0.0 { Region::Omega1 } else { Region::Omega2 };
            assert_eq!(p.region, expected);
        }
    }

    #[test]
    fn largest_remainder_preserves_total() {
        assert_eq!(largest_remainder(10, &[1.0, 1.0, 1.0]), vec![4, 3, 3]);
        assert_eq!(largest_remainder(7, &[2.0, 1.0]).iter().sum::<usize>(), 7);
    }

    #[test]
    fn non_power_grid_counts_are_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let pts = design_points(50, 2, Strategy::Grid, &mut rng);
        assert_eq!(pts.len(), 50);
        let mut dedup = pts.clone();
        dedup.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
        dedup.dedup();
        assert_eq!(dedup.len(), 50);
    }

    #[test]
    fn spacetime_requires_initial_points() {
        let p = find("fixed_circle").unwrap();
        assert!(sample_spacetime(&p, Counts::new(100, 10, 10, 0), Strategy::LatinHypercube, 0).is_err());
        let e = find("line2d").unwrap();
        assert!(sample_spacetime(&e, Counts::new(100, 10, 10, 10), Strategy::LatinHypercube, 0).is_err());
    }

    #[test]
    fn hypersphere_balanced_split() {
        let p = find("hypersphere10d").unwrap();
        let (a, b) = sample_interior(&p, 200, Strategy::LatinHypercube, 0).unwrap();
        assert_eq!((a.len(), b.len()), (100, 100));
        assert!(a.iter().all(|x| x.iter().map(|v| v * v).sum::<f64>() < 0.25));
    }

    #[test]
    fn csv_header_and_rows() {
        let p = find("fixed_circle").unwrap();
        let set = sample_spacetime(&p, Counts::new(50, 10, 20, 5), Strategy::LatinHypercube, 1).unwrap();
        let csv = set.to_csv();
        let mut lines = csv.lines();
        assert_eq!(lines.next().unwrap(), "x1,x2,t,set_tag,region");
        let rows = lines.count();
        assert_eq!(
            rows,
            set.interior1.len() + set.interior2.len() + set.boundary.len() + set.interface.len() + set.initial.unwrap().len()
        );
    }
}
