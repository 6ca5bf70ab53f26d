//! Subdomain networks with the interface-aware multi-activation layer.
//!
//! Each hidden layer computes
//! `h = ω₁·tanh(W_T h_prev + b_T) + ω₂·exp(−(W_G h_prev)²/γ_g)`
//! where `ω₂ = exp(−rate·d(x, Γ))` is evaluated once per point from the spatial
//! coordinates and shared by all layers.
//!
//! Parameters live in one flat vector:
//! `[W_T¹, b_T¹, …, W_T^{L−1}, b_T^{L−1}, W_out, b_out, W_G¹, (b_G¹), …]`,
//! matrices row-major (`rows = fan_out`).

use std::io::{Read, Write};
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::geometry::{InterfaceShape, Region, RegionLabel, Side};

pub const DEFAULT_GAUSS_GAMMA: f64 = 1.0;
pub const DEFAULT_WEIGHT_DECAY_RATE: f64 = 10.0;
/// Finite-difference step used for ∇ω when ω is differentiated.
pub const OMEGA_FD_STEP: f64 = 1e-5;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ActivationMode {
    MultiActivation,
    TanhOnly,
}

impl ActivationMode {
    pub fn name(self) -> &'static str {
        match self {
            ActivationMode::MultiActivation => "MultiActivation",
            ActivationMode::TanhOnly => "TanhOnly",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s.to_ascii_lowercase().as_str() {
            "multiactivation" | "multi" | "maf" => Some(ActivationMode::MultiActivation),
            "tanhonly" | "tanh" => Some(ActivationMode::TanhOnly),
            _ => None,
        }
    }
}

/// Whether ∇ω and Δω enter the input derivatives.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum OmegaMode {
    /// ω is a per-point constant: the jets then belong to N(·; ω(x₀)), not to
    /// the evaluated function x ↦ N(x; ω(x)).
    Frozen,
    /// ω is differentiated by central differences of the distance function,
    /// one-sided toward the owning region on Γ (default).
    #[default]
    Differentiated,
}

impl OmegaMode {
    pub fn name(self) -> &'static str {
        match self {
            OmegaMode::Frozen => "frozen",
            OmegaMode::Differentiated => "differentiated",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "frozen" => Some(OmegaMode::Frozen),
            "differentiated" => Some(OmegaMode::Differentiated),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Arch {
    pub spatial_dim: usize,
    /// Time is appended as the last input.
    pub time_input: bool,
    pub hidden: Vec<usize>,
}

impl Arch {
    pub fn new(spatial_dim: usize, time_input: bool, hidden: Vec<usize>) -> Result<Self> {
        if spatial_dim == 0 || hidden.is_empty() || hidden.contains(&0) {
            return Err(Error::InvalidShape(format!(
                "architecture needs positive widths (dim {spatial_dim}, hidden {hidden:?})"
            )));
        }
        Ok(Self { spatial_dim, time_input, hidden })
    }

    pub fn input_dim(&self) -> usize {
        self.spatial_dim + usize::from(self.time_input)
    }

    /// `(fan_in, fan_out)` per hidden layer.
    pub fn hidden_shapes(&self) -> Vec<(usize, usize)> {
        let mut fan_in = self.input_dim();
        self.hidden
            .iter()
            .map(|&w| {
                let shape = (fan_in, w);
                fan_in = w;
                shape
            })
            .collect()
    }

    pub fn describe(&self) -> String {
        let widths: Vec<String> = std::iter::once(self.input_dim())
            .chain(self.hidden.iter().copied())
            .chain(std::iter::once(1))
            .map(|w| w.to_string())
            .collect();
        widths.join("-")
    }
}

/// Offsets of one hidden layer inside the flat vector.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct LayerOffsets {
    pub fan_in: usize,
    pub fan_out: usize,
    pub w_tanh: usize,
    pub b_tanh: usize,
    pub w_gauss: usize,
    pub b_gauss: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Layout {
    pub layers: Vec<LayerOffsets>,
    pub w_out: usize,
    pub b_out: usize,
    /// Parameters of the tanh branches plus output layer.
    pub tanh_count: usize,
    pub gauss_count: usize,
}

impl Layout {
    pub fn new(arch: &Arch, gauss_bias: bool) -> Self {
        let shapes = arch.hidden_shapes();
        let mut offset = 0;
        let mut layers: Vec<LayerOffsets> = Vec::with_capacity(shapes.len());
        for &(fan_in, fan_out) in &shapes {
            layers.push(LayerOffsets { fan_in, fan_out, w_tanh: offset, b_tanh: offset + fan_in * fan_out, w_gauss: 0, b_gauss: None });
            offset += (fan_in + 1) * fan_out;
        }
        let last = *arch.hidden.last().expect("validated non-empty");
        let w_out = offset;
        let b_out = offset + last;
        offset += last + 1;
        let tanh_count = offset;
        for layer in &mut layers {
            layer.w_gauss = offset;
            offset += layer.fan_in * layer.fan_out;
            if gauss_bias {
                layer.b_gauss = Some(offset);
                offset += layer.fan_out;
            }
        }
        Self { layers, w_out, b_out, tanh_count, gauss_count: offset - tanh_count }
    }

    pub fn len(&self) -> usize {
        self.tanh_count + self.gauss_count
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Options shared by both subdomain networks.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NetworkOptions {
    pub gauss_gamma: f64,
    pub weight_decay_rate: f64,
    pub gauss_bias: bool,
}

impl Default for NetworkOptions {
    fn default() -> Self {
        Self { gauss_gamma: DEFAULT_GAUSS_GAMMA, weight_decay_rate: DEFAULT_WEIGHT_DECAY_RATE, gauss_bias: false }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct NetworkParams {
    pub arch: Arch,
    pub mode: ActivationMode,
    pub gauss_gamma: f64,
    pub weight_decay_rate: f64,
    pub gauss_bias: bool,
    pub seed: u64,
    pub layout: Layout,
    pub theta: Vec<f64>,
}

impl NetworkParams {
    /// All parameters zero.
    pub fn zeros(arch: Arch, mode: ActivationMode, options: NetworkOptions) -> Result<Self> {
        if !(options.gauss_gamma > 0.0) || !(options.weight_decay_rate > 0.0) {
            return Err(Error::Config("gauss_gamma and weight_decay_rate must be positive".into()));
        }
        let layout = Layout::new(&arch, options.gauss_bias);
        let theta = vec![0.0; layout.len()];
        Ok(Self {
            arch,
            mode,
            gauss_gamma: options.gauss_gamma,
            weight_decay_rate: options.weight_decay_rate,
            gauss_bias: options.gauss_bias,
            seed: 0,
            layout,
            theta,
        })
    }

    pub fn len(&self) -> usize {
        self.theta.len()
    }

    pub fn is_empty(&self) -> bool {
        self.theta.is_empty()
    }

    pub fn tanh_count(&self) -> usize {
        self.layout.tanh_count
    }

    pub fn gauss_count(&self) -> usize {
        self.layout.gauss_count
    }

    pub fn w_tanh(&self, l: usize) -> &[f64] {
        let o = self.layout.layers[l];
        &self.theta[o.w_tanh..o.w_tanh + o.fan_in * o.fan_out]
    }

    pub fn b_tanh(&self, l: usize) -> &[f64] {
        let o = self.layout.layers[l];
        &self.theta[o.b_tanh..o.b_tanh + o.fan_out]
    }

    pub fn w_gauss(&self, l: usize) -> &[f64] {
        let o = self.layout.layers[l];
        &self.theta[o.w_gauss..o.w_gauss + o.fan_in * o.fan_out]
    }

    pub fn b_gauss(&self, l: usize) -> Option<&[f64]> {
        let o = self.layout.layers[l];
        o.b_gauss.map(|b| &self.theta[b..b + o.fan_out])
    }

    pub fn w_out(&self) -> &[f64] {
        &self.theta[self.layout.w_out..self.layout.b_out]
    }

    pub fn b_out(&self) -> f64 {
        self.theta[self.layout.b_out]
    }

    /// Output-layer slice (weights then bias), e.g. for scaling the network.
    pub fn output_mut(&mut self) -> &mut [f64] {
        let (a, b) = (self.layout.w_out, self.layout.b_out);
        &mut self.theta[a..=b]
    }
}

/// Glorot-uniform tanh branch and output layer, zero biases, Gaussian branch at half the Glorot bound.
pub fn initialize(arch: &Arch, mode: ActivationMode, options: NetworkOptions, seed: u64) -> Result<NetworkParams> {
    let mut params = NetworkParams::zeros(arch.clone(), mode, options)?;
    params.seed = seed;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let layout = params.layout.clone();
    let mut fill = |theta: &mut [f64], fan_in: usize, fan_out: usize, scale: f64| {
        let bound = glorot_bound(fan_in, fan_out);
        for v in theta.iter_mut() {
            *v = scale * rng.random_range(-bound..=bound);
        }
    };
    for o in &layout.layers {
        fill(&mut params.theta[o.w_tanh..o.w_tanh + o.fan_in * o.fan_out], o.fan_in, o.fan_out, 1.0);
    }
    let last = *arch.hidden.last().expect("validated non-empty");
    fill(&mut params.theta[layout.w_out..layout.b_out], last, 1, 1.0);
    for o in &layout.layers {
        fill(&mut params.theta[o.w_gauss..o.w_gauss + o.fan_in * o.fan_out], o.fan_in, o.fan_out, 0.5);
    }
    Ok(params)
}

pub fn glorot_bound(fan_in: usize, fan_out: usize) -> f64 {
    (6.0 / (fan_in + fan_out) as f64).sqrt()
}

/// `(ω₁, ω₂)` with `ω₂ = exp(−rate·d(x, Γ(t)))`.
pub fn weight_functions(x: &[f64], shape: &InterfaceShape, t: f64, rate: f64) -> Result<(f64, f64)> {
    if !(rate > 0.0) {
        return Err(Error::Config(format!("weight decay rate must be positive, got {rate}")));
    }
    let w2 = (-rate * shape.distance(x, t)?).exp();
    Ok((1.0 - w2, w2))
}

/// Component-wise `ω₁·tanh(z_T) + ω₂·exp(−z_G²/γ)`.
pub fn blended_activation(z_tanh: &[f64], z_gauss: &[f64], w1: f64, w2: f64, gauss_gamma: f64) -> Vec<f64> {
    assert_eq!(z_tanh.len(), z_gauss.len(), "branch widths differ");
    z_tanh
        .iter()
        .zip(z_gauss)
        .map(|(a, c)| w1 * a.tanh() + w2 * (-c * c / gauss_gamma).exp())
        .collect()
}

/// ω₂ and (optionally) its input derivatives at one point.
///
/// `first` covers all network inputs (time last), `second` the spatial diagonal.
#[derive(Clone, Debug, PartialEq)]
pub struct OmegaJet {
    pub w: f64,
    pub first: Vec<f64>,
    pub second: Vec<f64>,
}

impl OmegaJet {
    pub fn constant(w: f64) -> Self {
        Self { w, first: Vec::new(), second: Vec::new() }
    }
}

/// ω₂ at a network input `z = (x[, t])`.
pub fn omega_jet(
    params: &NetworkParams,
    shape: &InterfaceShape,
    z: &[f64],
    mode: OmegaMode,
    owner: Option<(Region, Side)>,
) -> Result<OmegaJet> {
    let d = params.arch.spatial_dim;
    let t = if params.arch.time_input { z[d] } else { 0.0 };
    let rate = params.weight_decay_rate;
    let w = (-rate * shape.distance(&z[..d], t)?).exp();
    if mode == OmegaMode::Frozen || params.mode == ActivationMode::TanhOnly {
        return Ok(OmegaJet::constant(w));
    }
    let h = OMEGA_FD_STEP;
    // Distance has a kink on Γ. Near it, difference the signed distance
    // (negative across Γ from the owner), i.e. the owner's one-sided limit.
    let near = shape.distance(&z[..d], t)? < 4.0 * h;
    let w_at = |x: &[f64], t: f64| -> Result<f64> {
        let dist = shape.distance(x, t)?;
        let sign = match owner {
            Some((region, side)) if near => match shape.classify(x, t, side)? {
                RegionLabel::OnInterface => 1.0,
                label if label.region() == Some(region) => 1.0,
                _ => -1.0,
            },
            _ => 1.0,
        };
        Ok((-rate * sign * dist).exp())
    };
    let mut first = Vec::with_capacity(params.arch.input_dim());
    let mut second = Vec::with_capacity(d);
    let mut x = z[..d].to_vec();
    for i in 0..d {
        let orig = x[i];
        x[i] = orig + h;
        let plus = w_at(&x, t)?;
        x[i] = orig - h;
        let minus = w_at(&x, t)?;
        x[i] = orig;
        first.push((plus - minus) / (2.0 * h));
        second.push((plus - 2.0 * w + minus) / (h * h));
    }
    if params.arch.time_input {
        // One-sided at the ends of the horizon.
        let horizon = shape.horizon.unwrap_or(f64::INFINITY);
        let (tp, tm) = ((t + h).min(horizon), (t - h).max(0.0));
        first.push((w_at(&x, tp)? - w_at(&x, tm)?) / (tp - tm));
    }
    Ok(OmegaJet { w, first, second })
}

/// Network output at one input, by direct layer composition.
///
/// `t` must be given exactly when the architecture has a time input.
pub fn forward(params: &NetworkParams, x: &[f64], t: Option<f64>, shape: Option<&InterfaceShape>) -> Result<f64> {
    let d = params.arch.spatial_dim;
    if x.len() != d {
        return Err(Error::DimensionMismatch { expected: d, got: x.len() });
    }
    let mut h: Vec<f64> = x.to_vec();
    match (params.arch.time_input, t) {
        (true, Some(t)) => h.push(t),
        (false, None) => {}
        (true, None) => return Err(Error::InvalidShape("time input expected".into())),
        (false, Some(_)) => return Err(Error::InvalidShape("network has no time input".into())),
    }
    let w2 = match params.mode {
        ActivationMode::TanhOnly => 0.0,
        ActivationMode::MultiActivation => {
            let shape = shape.ok_or_else(|| Error::InvalidShape("multi-activation needs the interface".into()))?;
            weight_functions(x, shape, t.unwrap_or(0.0), params.weight_decay_rate)?.1
        }
    };
    for (l, o) in params.layout.layers.iter().enumerate() {
        let affine = |w: &[f64], b: Option<&[f64]>| -> Vec<f64> {
            (0..o.fan_out)
                .map(|r| {
                    let row = &w[r * o.fan_in..(r + 1) * o.fan_in];
                    let s: f64 = row.iter().zip(&h).map(|(a, b)| a * b).sum();
                    s + b.map_or(0.0, |b| b[r])
                })
                .collect()
        };
        let z_t = affine(params.w_tanh(l), Some(params.b_tanh(l)));
        h = match params.mode {
            ActivationMode::TanhOnly => z_t.iter().map(|a| a.tanh()).collect(),
            ActivationMode::MultiActivation => {
                let z_g = affine(params.w_gauss(l), params.b_gauss(l));
                blended_activation(&z_t, &z_g, 1.0 - w2, w2, params.gauss_gamma)
            }
        };
        if h.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFiniteLayer { layer: l + 1 });
        }
    }
    let out = params.w_out().iter().zip(&h).map(|(a, b)| a * b).sum::<f64>() + params.b_out();
    if !out.is_finite() {
        return Err(Error::NonFiniteLayer { layer: params.layout.layers.len() + 1 });
    }
    Ok(out)
}

const CHECKPOINT_MAGIC: &[u8; 8] = b"IPNNCKPT";
const CHECKPOINT_VERSION: u32 = 1;

/// Both subdomain networks of one run, tagged with the problem name.
#[derive(Clone, Debug, PartialEq)]
pub struct Checkpoint {
    pub problem: String,
    pub networks: [NetworkParams; 2],
}

impl Checkpoint {
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        out.extend_from_slice(CHECKPOINT_MAGIC);
        out.extend_from_slice(&CHECKPOINT_VERSION.to_le_bytes());
        out.extend_from_slice(&(self.problem.len() as u32).to_le_bytes());
        out.extend_from_slice(self.problem.as_bytes());
        out.extend_from_slice(&2u32.to_le_bytes());
        for net in &self.networks {
            out.extend_from_slice(&(net.arch.spatial_dim as u32).to_le_bytes());
            out.push(u8::from(net.arch.time_input));
            out.extend_from_slice(&(net.arch.hidden.len() as u32).to_le_bytes());
            for &w in &net.arch.hidden {
                out.extend_from_slice(&(w as u32).to_le_bytes());
            }
            out.push(match net.mode {
                ActivationMode::MultiActivation => 0,
                ActivationMode::TanhOnly => 1,
            });
            out.push(u8::from(net.gauss_bias));
            out.extend_from_slice(&net.gauss_gamma.to_le_bytes());
            out.extend_from_slice(&net.weight_decay_rate.to_le_bytes());
            out.extend_from_slice(&net.seed.to_le_bytes());
            out.extend_from_slice(&(net.theta.len() as u64).to_le_bytes());
            for v in &net.theta {
                out.extend_from_slice(&v.to_le_bytes());
            }
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut r = ByteReader { bytes, pos: 0 };
        if r.take(8)? != CHECKPOINT_MAGIC {
            return Err(Error::Checkpoint("bad magic".into()));
        }
        let version = r.u32()?;
        if version != CHECKPOINT_VERSION {
            return Err(Error::Checkpoint(format!("unsupported version {version}")));
        }
        let name_len = r.u32()? as usize;
        let problem = String::from_utf8(r.take(name_len)?.to_vec())
            .map_err(|_| Error::Checkpoint("problem name is not utf-8".into()))?;
        if r.u32()? != 2 {
            return Err(Error::Checkpoint("expected two networks".into()));
        }
        let mut read_net = || -> Result<NetworkParams> {
            let spatial_dim = r.u32()? as usize;
            let time_input = r.u8()? != 0;
            let n_hidden = r.u32()? as usize;
            let hidden = (0..n_hidden).map(|_| r.u32().map(|w| w as usize)).collect::<Result<Vec<_>>>()?;
            let mode = match r.u8()? {
                0 => ActivationMode::MultiActivation,
                1 => ActivationMode::TanhOnly,
                m => return Err(Error::Checkpoint(format!("unknown activation mode {m}"))),
            };
            let gauss_bias = r.u8()? != 0;
            let gauss_gamma = r.f64()?;
            let weight_decay_rate = r.f64()?;
            let seed = r.u64()?;
            let count = r.u64()? as usize;
            let arch = Arch::new(spatial_dim, time_input, hidden)?;
            let mut net = NetworkParams::zeros(arch, mode, NetworkOptions { gauss_gamma, weight_decay_rate, gauss_bias })?;
            if net.theta.len() != count {
                return Err(Error::Checkpoint(format!("parameter count {count} does not match the architecture ({})", net.theta.len())));
            }
            net.seed = seed;
            for v in net.theta.iter_mut() {
                *v = r.f64()?;
            }
            Ok(net)
        };
        let first = read_net()?;
        let second = read_net()?;
        if r.pos != bytes.len() {
            return Err(Error::Checkpoint("trailing bytes".into()));
        }
        Ok(Self { problem, networks: [first, second] })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::File::create(path)?.write_all(&self.to_bytes())?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let mut bytes = Vec::new();
        std::fs::File::open(path)?.read_to_end(&mut bytes)?;
        Self::from_bytes(&bytes)
    }
}

struct ByteReader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> ByteReader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.bytes.len()).ok_or_else(|| Error::Checkpoint("truncated file".into()))?;
        let s = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(s)
    }
    fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }
    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().expect("4 bytes")))
    }
    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }
    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn default_arch() -> Arch {
        Arch::new(2, false, vec![50, 50, 50]).unwrap()
    }

    #[test]
    fn default_parameter_counts() {
        let p = initialize(&default_arch(), ActivationMode::MultiActivation, NetworkOptions::default(), 0).unwrap();
        // 150 + 2550 + 2550 + 51; the often-quoted 5401 per network does not add up.
        assert_eq!(p.tanh_count(), 5301);
        assert_eq!(p.gauss_count(), 5100);
        assert_eq!(p.len(), 10401);
    }

    #[test]
    fn initialization_is_deterministic_and_bounded() {
        let a = initialize(&default_arch(), ActivationMode::MultiActivation, NetworkOptions::default(), 7).unwrap();
        let b = initialize(&default_arch(), ActivationMode::MultiActivation, NetworkOptions::default(), 7).unwrap();
        assert_eq!(a.theta, b.theta);
        for (l, o) in a.layout.layers.iter().enumerate() {
            let bound = glorot_bound(o.fan_in, o.fan_out);
            assert!(a.w_tanh(l).iter().all(|w| w.abs() <= bound));
            assert!(a.w_gauss(l).iter().all(|w| w.abs() <= 0.5 * bound));
            assert!(a.b_tanh(l).iter().all(|b| *b == 0.0));
        }
        assert_eq!(a.b_out(), 0.0);
    }

    #[test]
    fn weight_function_examples() {
        let shape = InterfaceShape::hyperplane(2, 0, 0.0, vec![-1.0, -1.0], vec![1.0, 1.0]).unwrap();
        assert_eq!(weight_functions(&[0.0, 0.3], &shape, 0.0, 10.0).unwrap(), (0.0, 1.0));
        let (w1, w2) = weight_functions(&[0.1, 0.3], &shape, 0.0, 10.0).unwrap();
        assert!((w2 - 0.3678794412).abs() < 1e-10 && (w1 - 0.6321205588).abs() < 1e-10);
        assert_eq!(w1 + w2, 1.0);
        let (w1, w2) = weight_functions(&[3.0, 0.3], &shape, 0.0, 10.0).unwrap();
        assert!((w1 - 1.0).abs() < 1e-12 && w2 < 1e-12);
        assert!(weight_functions(&[0.1, 0.3], &shape, 0.0, 0.0).is_err());
    }

    #[test]
    fn blended_activation_examples() {
        assert_eq!(blended_activation(&[0.3], &[0.7], 1.0, 0.0, 1.0), vec![0.3f64.tanh()]);
        assert_eq!(blended_activation(&[0.3], &[0.0], 0.0, 1.0, 1.0), vec![1.0]);
        assert_eq!(blended_activation(&[0.0], &[0.0], 0.5, 0.5, 1.0), vec![0.5]);
    }

    #[test]
    fn forward_zero_and_tanh_examples() {
        let shape = InterfaceShape::sphere(vec![0.0, 0.0], 0.5).unwrap();
        let zero = NetworkParams::zeros(default_arch(), ActivationMode::MultiActivation, NetworkOptions::default()).unwrap();
        assert_eq!(forward(&zero, &[0.2, 0.1], None, Some(&shape)).unwrap(), 0.0);

        let mut p = NetworkParams::zeros(Arch::new(1, false, vec![1]).unwrap(), ActivationMode::TanhOnly, NetworkOptions::default()).unwrap();
        p.theta[p.layout.layers[0].w_tanh] = 1.0;
        p.theta[p.layout.w_out] = 1.0;
        p.theta[p.layout.b_out] = 0.25;
        assert_eq!(forward(&p, &[0.0], None, None).unwrap(), 0.25);
    }

    #[test]
    fn on_interface_layer_is_pure_gaussian() {
        let shape = InterfaceShape::hyperplane(1, 0, 0.0, vec![-1.0], vec![1.0]).unwrap();
        let mut p = NetworkParams::zeros(Arch::new(1, false, vec![1]).unwrap(), ActivationMode::MultiActivation, NetworkOptions::default()).unwrap();
        p.theta[p.layout.layers[0].w_tanh] = 3.0;
        p.theta[p.layout.layers[0].b_tanh] = 0.4;
        p.theta[p.layout.w_out] = 1.0;
        // Gaussian weights zero, so the hidden unit is exp(0) = 1 on Γ.
        assert_eq!(forward(&p, &[0.0], None, Some(&shape)).unwrap(), 1.0);
    }

    #[test]
    fn zero_omega_matches_tanh_only() {
        let far = InterfaceShape::sphere(vec![100.0, 100.0], 0.5).unwrap();
        let maf = initialize(&default_arch(), ActivationMode::MultiActivation, NetworkOptions::default(), 3).unwrap();
        let mut tanh = maf.clone();
        tanh.mode = ActivationMode::TanhOnly;
        let x = [0.3, -0.2];
        assert_eq!(forward(&maf, &x, None, Some(&far)).unwrap(), forward(&tanh, &x, None, None).unwrap());
    }

    #[test]
    fn checkpoint_round_trip() {
        let arch = Arch::new(2, true, vec![4, 3]).unwrap();
        let opts = NetworkOptions { gauss_gamma: 0.5, weight_decay_rate: 10.0, gauss_bias: true };
        let a = initialize(&arch, ActivationMode::MultiActivation, opts, 1).unwrap();
        let b = initialize(&arch, ActivationMode::TanhOnly, opts, 2).unwrap();
        let ck = Checkpoint { problem: "fixed_circle".into(), networks: [a, b] };
        let bytes = ck.to_bytes();
        assert_eq!(&bytes[..8], b"IPNNCKPT");
        assert_eq!(Checkpoint::from_bytes(&bytes).unwrap(), ck);
        assert!(Checkpoint::from_bytes(&bytes[..bytes.len() - 1]).is_err());
    }

    #[test]
    fn forward_rejects_wrong_time_usage() {
        let p = NetworkParams::zeros(Arch::new(2, true, vec![3]).unwrap(), ActivationMode::TanhOnly, NetworkOptions::default()).unwrap();
        assert!(forward(&p, &[0.0, 0.0], None, None).is_err());
        assert!(forward(&p, &[0.0], Some(0.0), None).is_err());
        assert!(forward(&p, &[0.0, 0.0], Some(0.0), None).is_ok());
    }
}
