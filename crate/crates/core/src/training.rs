//! Composite loss, Adam and the training loop.
//!
//! The loss is assembled from output jets of fixed batches (interior, boundary,
//! initial per region; one interface batch evaluated by both networks). The same
//! assembly runs on jets of the exact solution, which is how the zero-residual
//! property of the manufactured data is checked.

use std::fmt::Write as _;
use std::time::Instant;

use crate::autodiff::{backward_batch, forward_batch, BatchJets, CompositeLoss, JetShape, Order, Tape};
use crate::error::{Error, Result};
use crate::geometry::Region;
use crate::network::{initialize, omega_jet, ActivationMode, Arch, NetworkOptions, NetworkParams, OmegaJet, OmegaMode};
use crate::problems::{Counts, ProblemSpec};
use crate::sampling::{sample_problem, validation_points, CollocationSet, Strategy, TaggedPoint, VALIDATION_SEED_OFFSET};

pub const CSV_HEADER: &str = "step,total,pde1,pde2,bc,ifc_jump,ifc_flux,init,val_rel_l2";

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LossWeights {
    pub w_pde1: f64,
    pub w_pde2: f64,
    pub w_bc1: f64,
    pub w_bc2: f64,
    pub w_init: f64,
    /// Interface jump weight.
    pub gamma1: f64,
    /// Interface flux weight.
    pub gamma2: f64,
}

impl Default for LossWeights {
    fn default() -> Self {
        Self { w_pde1: 1.0, w_pde2: 1.0, w_bc1: 1.0, w_bc2: 1.0, w_init: 1.0, gamma1: 1.0, gamma2: 1.0 }
    }
}

impl LossWeights {
    pub fn validate(&self) -> Result<()> {
        let all = [self.w_pde1, self.w_pde2, self.w_bc1, self.w_bc2, self.w_init, self.gamma1, self.gamma2];
        if all.iter().all(|w| w.is_finite() && *w >= 0.0) {
            Ok(())
        } else {
            Err(Error::Config(format!("loss weights must be finite and nonnegative: {self:?}")))
        }
    }
}

/// Unweighted mean-squared loss terms.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct LossComponents {
    pub pde1: f64,
    pub pde2: f64,
    pub bc1: f64,
    pub bc2: f64,
    pub ifc_jump: f64,
    pub ifc_flux: f64,
    /// Present for parabolic problems.
    pub init: Option<f64>,
}

impl LossComponents {
    pub fn bc(&self) -> f64 {
        self.bc1 + self.bc2
    }

    pub fn total(&self, w: &LossWeights) -> f64 {
        w.w_pde1 * self.pde1
            + w.w_pde2 * self.pde2
            + w.w_bc1 * self.bc1
            + w.w_bc2 * self.bc2
            + w.gamma1 * self.ifc_jump
            + w.gamma2 * self.ifc_flux
            + w.w_init * self.init.unwrap_or(0.0)
    }

    pub fn check_finite(&self, step: usize) -> Result<()> {
        let terms = [
            ("pde1", self.pde1),
            ("pde2", self.pde2),
            ("bc1", self.bc1),
            ("bc2", self.bc2),
            ("ifc_jump", self.ifc_jump),
            ("ifc_flux", self.ifc_flux),
            ("init", self.init.unwrap_or(0.0)),
        ];
        match terms.iter().find(|(_, v)| !v.is_finite()) {
            Some((term, _)) => Err(Error::NonFiniteLoss { term, step }),
            None => Ok(()),
        }
    }
}

/// Inputs, ω jets and targets of one batch.
#[derive(Clone, Debug, Default)]
struct Batch {
    inputs: Vec<Vec<f64>>,
    omega: Vec<OmegaJet>,
    targets: Vec<f64>,
}

impl Batch {
    fn len(&self) -> usize {
        self.inputs.len()
    }
}

/// Jets of every batch for both networks: `[region][kind]`.
pub struct LossJets {
    interior: [BatchJets; 2],
    boundary: [BatchJets; 2],
    initial: [BatchJets; 2],
    interface: [BatchJets; 2],
}

/// Precomputed collocation data and loss weights for one problem.
pub struct LossData {
    parabolic: bool,
    beta: [f64; 2],
    spatial: usize,
    weights: LossWeights,
    interior: [Batch; 2],
    boundary: [Batch; 2],
    initial: [Batch; 2],
    initial_total: usize,
    /// Same points for both networks; ω jets differ by owner. Targets hold g₁; `jump_flux` holds g₂.
    interface: [Batch; 2],
    jump_flux: Vec<f64>,
    normals: Vec<Vec<f64>>,
}

impl LossData {
    /// `reference` supplies the activation mode and ω decay rate shared by both networks.
    pub fn new(
        problem: &ProblemSpec,
        colloc: &CollocationSet,
        weights: LossWeights,
        reference: &NetworkParams,
        omega_mode: OmegaMode,
    ) -> Result<Self> {
        weights.validate()?;
        if colloc.dim != problem.dim || colloc.time_dependent != problem.parabolic {
            return Err(Error::InvalidShape(format!("collocation set does not belong to {}", problem.name)));
        }
        if reference.arch.input_dim() != problem.input_dim() {
            return Err(Error::DimensionMismatch { expected: problem.input_dim(), got: reference.arch.input_dim() });
        }
        let side = problem.omega1_side;
        let omega = |z: &[f64], region: Region| -> Result<OmegaJet> {
            match reference.mode {
                ActivationMode::TanhOnly => Ok(OmegaJet::constant(0.0)),
                ActivationMode::MultiActivation => {
                    omega_jet(reference, &problem.interface, z, omega_mode, Some((region, side)))
                }
            }
        };

        let mut interior: [Batch; 2] = Default::default();
        for region in [Region::Omega1, Region::Omega2] {
            let b = &mut interior[region.index()];
            for z in colloc.interior(region) {
                let (x, t) = colloc.split(z);
                b.inputs.push(z.clone());
                b.omega.push(omega(z, region)?);
                b.targets.push(problem.source(region, x, t));
            }
        }
        let mut boundary: [Batch; 2] = Default::default();
        for p in &colloc.boundary {
            let (x, t) = colloc.split(&p.x);
            let b = &mut boundary[p.region.index()];
            b.inputs.push(p.x.clone());
            b.omega.push(omega(&p.x, p.region)?);
            b.targets.push(problem.boundary_value(p.region, x, t));
        }
        let mut initial: [Batch; 2] = Default::default();
        let mut initial_total = 0;
        if let Some(points) = &colloc.initial {
            for p in points {
                let (x, t) = colloc.split(&p.x);
                let b = &mut initial[p.region.index()];
                b.inputs.push(p.x.clone());
                b.omega.push(omega(&p.x, p.region)?);
                b.targets.push(problem.field(p.region).value(x, t));
                initial_total += 1;
            }
        }
        let mut interface: [Batch; 2] = Default::default();
        let mut jump_flux = Vec::with_capacity(colloc.interface.len());
        let mut normals = Vec::with_capacity(colloc.interface.len());
        for z in &colloc.interface {
            let (x, t) = colloc.split(z);
            let n = problem.interface.normal(x, t, problem.omega1_side)?;
            let (g1, g2) = problem.jump_data_with_normal(x, t, &n);
            for region in [Region::Omega1, Region::Omega2] {
                let b = &mut interface[region.index()];
                b.inputs.push(z.clone());
                b.omega.push(omega(z, region)?);
                b.targets.push(g1);
            }
            jump_flux.push(g2);
            normals.push(n);
        }
        Ok(Self {
            parabolic: problem.parabolic,
            beta: problem.beta,
            spatial: problem.dim,
            weights,
            interior,
            boundary,
            initial,
            initial_total,
            interface,
            jump_flux,
            normals,
        })
    }

    pub fn weights(&self) -> &LossWeights {
        &self.weights
    }

    pub fn set_weights(&mut self, weights: LossWeights) -> Result<()> {
        weights.validate()?;
        self.weights = weights;
        Ok(())
    }

    fn shape(&self, n: usize, order: Order) -> JetShape {
        JetShape { n, inputs: self.spatial + usize::from(self.parabolic), spatial: self.spatial, order }
    }

    /// Network jets for every batch, with tapes for the reverse pass.
    fn network_jets(&self, nets: [&NetworkParams; 2]) -> Result<(LossJets, Vec<Tape>)> {
        let mut tapes = Vec::with_capacity(8);
        let mut run = |net: &NetworkParams, batch: &Batch, order: Order| -> Result<BatchJets> {
            let (jets, tape) = forward_batch(net, &batch.inputs, Some(&batch.omega), order)?;
            tapes.push(tape);
            Ok(jets)
        };
        let mut interior = Vec::new();
        let mut boundary = Vec::new();
        let mut initial = Vec::new();
        let mut interface = Vec::new();
        for (i, net) in nets.iter().enumerate() {
            interior.push(run(net, &self.interior[i], Order::Full)?);
            boundary.push(run(net, &self.boundary[i], Order::Value)?);
            initial.push(run(net, &self.initial[i], Order::Value)?);
            interface.push(run(net, &self.interface[i], Order::Gradient)?);
        }
        let pair = |v: Vec<BatchJets>| -> [BatchJets; 2] { v.try_into().unwrap_or_else(|_| unreachable!()) };
        Ok((
            LossJets { interior: pair(interior), boundary: pair(boundary), initial: pair(initial), interface: pair(interface) },
            tapes,
        ))
    }

    /// Jets of the exact solution at every collocation point.
    ///
    /// The Laplacian is stored in the first second-derivative slot.
    pub fn exact_jets(&self, problem: &ProblemSpec) -> LossJets {
        let fill = |region: Region, batch: &Batch, order: Order| -> BatchJets {
            let mut jets = BatchJets::zeros(self.shape(batch.len(), order));
            let field = problem.field(region);
            let n = batch.len();
            let d = self.spatial;
            for (p, z) in batch.inputs.iter().enumerate() {
                let (x, t) = if self.parabolic { (&z[..d], z[d]) } else { (&z[..], 0.0) };
                jets.data[p] = field.value(x, t);
                if order >= Order::Gradient {
                    for (j, g) in field.grad(x, t).into_iter().enumerate() {
                        jets.data[(1 + j) * n + p] = g;
                    }
                    if self.parabolic {
                        jets.data[(1 + d) * n + p] = field.time_derivative(x, t);
                    }
                }
                if order == Order::Full {
                    let inputs = d + usize::from(self.parabolic);
                    jets.data[(1 + inputs) * n + p] = field.laplacian(x, t);
                }
            }
            jets
        };
        let each = |f: &dyn Fn(Region) -> BatchJets| [f(Region::Omega1), f(Region::Omega2)];
        LossJets {
            interior: each(&|r| fill(r, &self.interior[r.index()], Order::Full)),
            boundary: each(&|r| fill(r, &self.boundary[r.index()], Order::Value)),
            initial: each(&|r| fill(r, &self.initial[r.index()], Order::Value)),
            interface: each(&|r| fill(r, &self.interface[r.index()], Order::Gradient)),
        }
    }

    /// Loss components from jets; with `seeds`, also `∂L_total/∂jets`.
    pub fn assemble(&self, jets: &LossJets, mut seeds: Option<&mut LossJets>) -> LossComponents {
        let w = &self.weights;
        let mut c = LossComponents::default();
        let pde_w = [w.w_pde1, w.w_pde2];
        let bc_w = [w.w_bc1, w.w_bc2];
        for i in 0..2 {
            let batch = &self.interior[i];
            let m = batch.len();
            let jet = &jets.interior[i];
            let mut sum = 0.0;
            for p in 0..m {
                let mut r = -self.beta[i] * jet.lap(p) - batch.targets[p];
                if self.parabolic {
                    r += jet.first(self.spatial, p);
                }
                sum += r * r;
                if let Some(s) = seeds.as_deref_mut() {
                    let g = 2.0 * r * pde_w[i] / m as f64;
                    s.interior[i].seed_lap(p, -self.beta[i] * g);
                    if self.parabolic {
                        *s.interior[i].first_mut(self.spatial, p) += g;
                    }
                }
            }
            let pde = if m > 0 { sum / m as f64 } else { 0.0 };

            let batch = &self.boundary[i];
            let m = batch.len();
            let mut sum = 0.0;
            for p in 0..m {
                let r = jets.boundary[i].value(p) - batch.targets[p];
                sum += r * r;
                if let Some(s) = seeds.as_deref_mut() {
                    *s.boundary[i].value_mut(p) += 2.0 * r * bc_w[i] / m as f64;
                }
            }
            let bc = if m > 0 { sum / m as f64 } else { 0.0 };
            if i == 0 {
                (c.pde1, c.bc1) = (pde, bc);
            } else {
                (c.pde2, c.bc2) = (pde, bc);
            }
        }

        if self.parabolic {
            let m0 = self.initial_total as f64;
            let mut sum = 0.0;
            for i in 0..2 {
                let batch = &self.initial[i];
                for p in 0..batch.len() {
                    let r = jets.initial[i].value(p) - batch.targets[p];
                    sum += r * r;
                    if let Some(s) = seeds.as_deref_mut() {
                        *s.initial[i].value_mut(p) += 2.0 * r * w.w_init / m0;
                    }
                }
            }
            c.init = Some(if self.initial_total > 0 { sum / m0 } else { 0.0 });
        }

        let m = self.interface[0].len();
        let (mut jump, mut flux) = (0.0, 0.0);
        for p in 0..m {
            let [u1, u2] = &jets.interface;
            let rj = u1.value(p) - u2.value(p) - self.interface[0].targets[p];
            let n = &self.normals[p];
            let mut rf = -self.jump_flux[p];
            for (j, nj) in n.iter().enumerate() {
                rf += self.beta[0] * u1.first(j, p) * nj - self.beta[1] * u2.first(j, p) * nj;
            }
            jump += rj * rj;
            flux += rf * rf;
            if let Some(s) = seeds.as_deref_mut() {
                let gj = 2.0 * rj * w.gamma1 / m as f64;
                let gf = 2.0 * rf * w.gamma2 / m as f64;
                *s.interface[0].value_mut(p) += gj;
                *s.interface[1].value_mut(p) -= gj;
                for (j, nj) in n.iter().enumerate() {
                    *s.interface[0].first_mut(j, p) += gf * self.beta[0] * nj;
                    *s.interface[1].first_mut(j, p) -= gf * self.beta[1] * nj;
                }
            }
        }
        if m > 0 {
            c.ifc_jump = jump / m as f64;
            c.ifc_flux = flux / m as f64;
        }
        c
    }

    /// Components at the given networks, accumulating gradients when requested.
    pub fn components(
        &self,
        p1: &NetworkParams,
        p2: &NetworkParams,
        grads: Option<(&mut [f64], &mut [f64])>,
    ) -> Result<LossComponents> {
        let (jets, tapes) = self.network_jets([p1, p2])?;
        let Some((g1, g2)) = grads else {
            return Ok(self.assemble(&jets, None));
        };
        let zero = |j: &[BatchJets; 2]| [BatchJets::zeros(j[0].shape), BatchJets::zeros(j[1].shape)];
        let mut seeds = LossJets {
            interior: zero(&jets.interior),
            boundary: zero(&jets.boundary),
            initial: zero(&jets.initial),
            interface: zero(&jets.interface),
        };
        let components = self.assemble(&jets, Some(&mut seeds));
        // Tape order matches `network_jets`: per network interior, boundary, initial, interface.
        let mut tapes = tapes.iter();
        for (i, (net, grad)) in [(p1, g1), (p2, g2)].into_iter().enumerate() {
            for seed in [&seeds.interior[i], &seeds.boundary[i], &seeds.initial[i], &seeds.interface[i]] {
                backward_batch(net, tapes.next().expect("one tape per batch"), seed, grad)?;
            }
        }
        Ok(components)
    }
}

impl CompositeLoss for LossData {
    fn evaluate(&self, p1: &NetworkParams, p2: &NetworkParams, grads: Option<(&mut [f64], &mut [f64])>) -> Result<f64> {
        let c = self.components(p1, p2, grads)?;
        c.check_finite(0)?;
        Ok(c.total(&self.weights))
    }
}

/// `(total, components)` for one parameter pair.
pub fn compute_loss(
    p1: &NetworkParams,
    p2: &NetworkParams,
    colloc: &CollocationSet,
    problem: &ProblemSpec,
    weights: LossWeights,
) -> Result<(f64, LossComponents)> {
    let data = LossData::new(problem, colloc, weights, p1, OmegaMode::default())?;
    let c = data.components(p1, p2, None)?;
    c.check_finite(0)?;
    Ok((c.total(&weights), c))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AdamConfig {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        Self { lr: 1e-3, beta1: 0.9, beta2: 0.999, eps: 1e-8 }
    }
}

/// Moments of one parameter set.
#[derive(Clone, Debug, PartialEq)]
pub struct AdamState {
    pub m: Vec<f64>,
    pub v: Vec<f64>,
    pub t: u64,
}

impl AdamState {
    pub fn new(len: usize) -> Self {
        Self { m: vec![0.0; len], v: vec![0.0; len], t: 0 }
    }
}

/// One bias-corrected Adam update of `theta` in place.
pub fn adam_step(state: &mut AdamState, theta: &mut [f64], grad: &[f64], cfg: &AdamConfig) {
    assert_eq!(theta.len(), grad.len());
    assert_eq!(state.m.len(), grad.len());
    state.t += 1;
    let c1 = 1.0 - cfg.beta1.powi(state.t as i32);
    let c2 = 1.0 - cfg.beta2.powi(state.t as i32);
    for (((th, g), m), v) in theta.iter_mut().zip(grad).zip(&mut state.m).zip(&mut state.v) {
        *m = cfg.beta1 * *m + (1.0 - cfg.beta1) * g;
        *v = cfg.beta2 * *v + (1.0 - cfg.beta2) * g * g;
        let m_hat = *m / c1;
        let v_hat = *v / c2;
        *th -= cfg.lr * m_hat / (v_hat.sqrt() + cfg.eps);
    }
}

/// Region-routed evaluation cloud with exact values.
pub struct ValidationSet {
    inputs: [Vec<Vec<f64>>; 2],
    omega: [Vec<OmegaJet>; 2],
    exact: [Vec<f64>; 2],
}

impl ValidationSet {
    pub fn new(problem: &ProblemSpec, points: &[TaggedPoint], reference: &NetworkParams) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::Metric("empty evaluation set".into()));
        }
        let mut set = Self { inputs: Default::default(), omega: Default::default(), exact: Default::default() };
        let d = problem.dim;
        for p in points {
            if p.x.len() != problem.input_dim() {
                return Err(Error::DimensionMismatch { expected: problem.input_dim(), got: p.x.len() });
            }
            let t = if problem.parabolic { p.x[d] } else { 0.0 };
            let i = p.region.index();
            set.exact[i].push(problem.exact(p.region, &p.x[..d], t)?);
            set.omega[i].push(match reference.mode {
                ActivationMode::TanhOnly => OmegaJet::constant(0.0),
                ActivationMode::MultiActivation => omega_jet(reference, &problem.interface, &p.x, OmegaMode::Frozen, None)?,
            });
            set.inputs[i].push(p.x.clone());
        }
        Ok(set)
    }

    pub fn len(&self) -> usize {
        self.inputs[0].len() + self.inputs[1].len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn relative_l2(&self, p1: &NetworkParams, p2: &NetworkParams) -> Result<f64> {
        let mut pred = Vec::with_capacity(self.len());
        for (i, net) in [p1, p2].into_iter().enumerate() {
            let (jets, _) = forward_batch(net, &self.inputs[i], Some(&self.omega[i]), Order::Value)?;
            pred.extend_from_slice(&jets.data);
        }
        let exact: Vec<f64> = self.exact[0].iter().chain(&self.exact[1]).copied().collect();
        relative_l2_values(&pred, &exact)
    }
}

/// `‖pred − exact‖ / ‖exact‖`.
pub fn relative_l2_values(pred: &[f64], exact: &[f64]) -> Result<f64> {
    if pred.is_empty() || pred.len() != exact.len() {
        return Err(Error::Metric(format!("need matching non-empty samples ({} vs {})", pred.len(), exact.len())));
    }
    let num: f64 = pred.iter().zip(exact).map(|(a, b)| (a - b) * (a - b)).sum();
    let den: f64 = exact.iter().map(|b| b * b).sum();
    if den == 0.0 {
        return Err(Error::Metric("exact solution has zero norm on the evaluation set".into()));
    }
    Ok((num / den).sqrt())
}

/// Relative L² error of the two-network solution over tagged evaluation points.
pub fn relative_l2(p1: &NetworkParams, p2: &NetworkParams, problem: &ProblemSpec, points: &[TaggedPoint]) -> Result<f64> {
    ValidationSet::new(problem, points, p1)?.relative_l2(p1, p2)
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrainConfig {
    pub counts: Counts,
    pub strategy: Strategy,
    pub sample_seed: u64,
    pub init_seed: u64,
    pub validation_seed: u64,
    /// Validation cloud size as a multiple of the interior count.
    pub validation_factor: usize,
    pub hidden: Vec<usize>,
    pub mode: ActivationMode,
    pub network: NetworkOptions,
    pub omega_mode: OmegaMode,
    pub weights: LossWeights,
    pub adam: AdamConfig,
    pub steps: usize,
    pub log_every: usize,
}

impl TrainConfig {
    /// The problem's finest published density at a given budget, seed 0.
    pub fn for_problem(problem: &ProblemSpec, counts: Counts, steps: usize) -> Self {
        Self {
            counts,
            strategy: problem.default_strategy,
            sample_seed: 0,
            init_seed: 0,
            validation_seed: VALIDATION_SEED_OFFSET,
            validation_factor: 4,
            hidden: vec![50, 50, 50],
            mode: ActivationMode::MultiActivation,
            network: NetworkOptions::default(),
            omega_mode: OmegaMode::default(),
            weights: LossWeights::default(),
            adam: AdamConfig::default(),
            steps,
            log_every: 100,
        }
    }

    /// Sets sample and init seeds together and moves the validation seed with them.
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.sample_seed = seed;
        self.init_seed = seed;
        self.validation_seed = seed + VALIDATION_SEED_OFFSET;
        self
    }

    pub fn validate(&self, problem: &ProblemSpec) -> Result<()> {
        self.weights.validate()?;
        let c = self.counts;
        if c.interior < 2 || c.boundary == 0 || c.interface == 0 {
            return Err(Error::Config("interior ≥ 2, boundary ≥ 1 and interface ≥ 1 points are required".into()));
        }
        if problem.parabolic && c.initial == 0 {
            return Err(Error::Config(format!("{} needs initial points", problem.name)));
        }
        if self.log_every == 0 || self.validation_factor == 0 {
            return Err(Error::Config("log_every and validation_factor must be positive".into()));
        }
        if !(self.adam.lr > 0.0) {
            return Err(Error::Config("learning rate must be positive".into()));
        }
        Ok(())
    }
}

/// One logged step.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TrainRow {
    pub step: usize,
    pub total: f64,
    pub components: LossComponents,
    pub val_rel_l2: f64,
}

impl TrainRow {
    pub fn csv_line(&self) -> String {
        let c = &self.components;
        let init = c.init.map(|v| format!("{v:e}")).unwrap_or_default();
        format!(
            "{},{:e},{:e},{:e},{:e},{:e},{:e},{init},{:e}",
            self.step,
            self.total,
            c.pde1,
            c.pde2,
            c.bc(),
            c.ifc_jump,
            c.ifc_flux,
            self.val_rel_l2
        )
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrainRecord {
    pub problem: String,
    pub rows: Vec<TrainRow>,
    pub seed: u64,
    pub wall_clock_s: f64,
    /// Post-filter sizes `(Ω₁, Ω₂, ∂Ω, Γ, t=0)`.
    pub sizes: [usize; 5],
    pub parameter_counts: ParameterCounts,
    pub config: TrainConfig,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ParameterCounts {
    /// Tanh branches plus output layer, per network.
    pub tanh: usize,
    pub gauss: usize,
}

impl TrainRecord {
    pub fn final_row(&self) -> &TrainRow {
        self.rows.last().expect("train always logs the final step")
    }

    pub fn final_val_rel_l2(&self) -> f64 {
        self.final_row().val_rel_l2
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from(CSV_HEADER);
        out.push('\n');
        for row in &self.rows {
            out.push_str(&row.csv_line());
            out.push('\n');
        }
        out
    }

    pub fn summary(&self) -> String {
        let mut s = String::new();
        let first = &self.rows[0];
        let last = self.final_row();
        let _ = writeln!(s, "problem = {}", self.problem);
        let _ = writeln!(s, "seed = {}", self.seed);
        let _ = writeln!(s, "steps = {}", last.step);
        let _ = writeln!(s, "initial_total = {:e}", first.total);
        let _ = writeln!(s, "final_total = {:e}", last.total);
        let _ = writeln!(s, "initial_val_rel_l2 = {:e}", first.val_rel_l2);
        let _ = writeln!(s, "final_val_rel_l2 = {:e}", last.val_rel_l2);
        let _ = writeln!(s, "wall_clock_s = {:.3}", self.wall_clock_s);
        let [a, b, c, d, e] = self.sizes;
        let _ = writeln!(s, "points = omega1 {a}, omega2 {b}, boundary {c}, interface {d}, initial {e}");
        let p = self.parameter_counts;
        let _ = writeln!(
            s,
            "parameters_per_network = {} (tanh+output {}, gaussian {}); both networks {}",
            p.tanh + p.gauss,
            p.tanh,
            p.gauss,
            2 * (p.tanh + p.gauss)
        );
        s
    }
}

/// Trained parameters plus the record.
pub struct TrainOutcome {
    pub record: TrainRecord,
    pub params: [NetworkParams; 2],
}

fn network_seed(init_seed: u64, net: u64) -> u64 {
    init_seed.wrapping_mul(0x2545_F491_4F6C_DD1D).wrapping_add(net + 1)
}

/// Both networks initialized from the config seeds.
pub fn initial_params(problem: &ProblemSpec, config: &TrainConfig) -> Result<[NetworkParams; 2]> {
    let arch = Arch::new(problem.dim, problem.parabolic, config.hidden.clone())?;
    Ok([
        initialize(&arch, config.mode, config.network, network_seed(config.init_seed, 0))?,
        initialize(&arch, config.mode, config.network, network_seed(config.init_seed, 1))?,
    ])
}

pub fn train(problem: &ProblemSpec, config: &TrainConfig) -> Result<TrainOutcome> {
    train_with(problem, config, |_| {})
}

/// Full-batch Adam on a fixed collocation set; `observe` sees every logged row.
pub fn train_with(problem: &ProblemSpec, config: &TrainConfig, mut observe: impl FnMut(&TrainRow)) -> Result<TrainOutcome> {
    config.validate(problem)?;
    let start = Instant::now();
    let colloc = sample_problem(problem, config.counts, config.strategy, config.sample_seed)?;
    let mut params = initial_params(problem, config)?;
    let data = LossData::new(problem, &colloc, config.weights, &params[0], config.omega_mode)?;
    let val_points = validation_points(
        problem,
        config.validation_factor * config.counts.interior,
        config.strategy,
        config.validation_seed,
    )?;
    let validation = ValidationSet::new(problem, &val_points, &params[0])?;

    let mut states = [AdamState::new(params[0].len()), AdamState::new(params[1].len())];
    let mut grads = [vec![0.0; params[0].len()], vec![0.0; params[1].len()]];
    let mut rows = Vec::new();
    for step in 0..=config.steps {
        let update = step < config.steps;
        let components = if update {
            grads[0].fill(0.0);
            grads[1].fill(0.0);
            let [g1, g2] = &mut grads;
            data.components(&params[0], &params[1], Some((g1, g2)))?
        } else {
            data.components(&params[0], &params[1], None)?
        };
        components.check_finite(step)?;
        if step % config.log_every == 0 || step == config.steps {
            let row = TrainRow {
                step,
                total: components.total(&config.weights),
                components,
                val_rel_l2: validation.relative_l2(&params[0], &params[1])?,
            };
            observe(&row);
            rows.push(row);
        }
        if update {
            for i in 0..2 {
                adam_step(&mut states[i], &mut params[i].theta, &grads[i], &config.adam);
            }
        }
    }

    let record = TrainRecord {
        problem: problem.name.to_string(),
        rows,
        seed: config.sample_seed,
        wall_clock_s: start.elapsed().as_secs_f64(),
        sizes: [
            colloc.interior1.len(),
            colloc.interior2.len(),
            colloc.boundary.len(),
            colloc.interface.len(),
            colloc.initial.as_ref().map_or(0, |v| v.len()),
        ],
        parameter_counts: ParameterCounts { tanh: params[0].tanh_count(), gauss: params[0].gauss_count() },
        config: config.clone(),
    };
    Ok(TrainOutcome { record, params })
}
