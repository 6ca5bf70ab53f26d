//! Input jets and parameter gradients for the subdomain networks.
//!
//! A batch of `N` points is pushed through the network as second-order Taylor
//! jets: value, first derivatives in every input (time last), and diagonal
//! second derivatives in the spatial inputs. Jets are stored component-major,
//! column `k·N + p` holding component `k` of point `p`, so every linear layer
//! is a single GEMM over all components at once. The reverse pass replays the
//! jet recursion backwards from the recorded pre-activations.

use crate::error::{Error, Result};
use crate::network::{ActivationMode, NetworkParams, OmegaJet};

/// Which jet components a batch carries.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Order {
    Value,
    /// Value and first derivatives.
    Gradient,
    /// Value, first derivatives and the spatial second-derivative diagonal.
    Full,
}

/// Component counts of a batch.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct JetShape {
    pub n: usize,
    /// Number of network inputs (spatial dim, plus one with time).
    pub inputs: usize,
    pub spatial: usize,
    pub order: Order,
}

impl JetShape {
    pub fn components(&self) -> usize {
        match self.order {
            Order::Value => 1,
            Order::Gradient => 1 + self.inputs,
            Order::Full => 1 + self.inputs + self.spatial,
        }
    }

    fn n_first(&self) -> usize {
        if self.order >= Order::Gradient { self.inputs } else { 0 }
    }

    fn n_second(&self) -> usize {
        if self.order == Order::Full { self.spatial } else { 0 }
    }

    pub fn columns(&self) -> usize {
        self.components() * self.n
    }
}

/// Output jets of a batch (one row of `components × n` values).
#[derive(Clone, Debug, PartialEq)]
pub struct BatchJets {
    pub shape: JetShape,
    pub data: Vec<f64>,
}

impl BatchJets {
    pub fn zeros(shape: JetShape) -> Self {
        Self { shape, data: vec![0.0; shape.columns()] }
    }

    pub fn value(&self, p: usize) -> f64 {
        self.data[p]
    }

    /// ∂u/∂z_j for input `j` (time is the last input).
    pub fn first(&self, j: usize, p: usize) -> f64 {
        self.data[(1 + j) * self.shape.n + p]
    }

    pub fn second(&self, i: usize, p: usize) -> f64 {
        self.data[(1 + self.shape.inputs + i) * self.shape.n + p]
    }

    pub fn lap(&self, p: usize) -> f64 {
        (0..self.shape.spatial).map(|i| self.second(i, p)).sum()
    }

    pub fn value_mut(&mut self, p: usize) -> &mut f64 {
        &mut self.data[p]
    }

    pub fn first_mut(&mut self, j: usize, p: usize) -> &mut f64 {
        let n = self.shape.n;
        &mut self.data[(1 + j) * n + p]
    }

    /// Adds `s` to every second-derivative component, i.e. seeds ∂L/∂lap.
    pub fn seed_lap(&mut self, p: usize, s: f64) {
        let n = self.shape.n;
        let base = 1 + self.shape.inputs;
        for i in 0..self.shape.spatial {
            self.data[(base + i) * n + p] += s;
        }
    }

    pub fn jet(&self, p: usize) -> Jet {
        let d = self.shape.spatial;
        let has_first = self.shape.order >= Order::Gradient;
        Jet {
            value: self.value(p),
            grad: if has_first { (0..d).map(|i| self.first(i, p)).collect() } else { Vec::new() },
            lap: if self.shape.order == Order::Full { self.lap(p) } else { 0.0 },
            dt: (has_first && self.shape.inputs > d).then(|| self.first(d, p)),
        }
    }
}

/// Value, spatial gradient, Laplacian and (for space-time inputs) ∂u/∂t at one point.
#[derive(Clone, Debug, PartialEq)]
pub struct Jet {
    pub value: f64,
    pub grad: Vec<f64>,
    pub lap: f64,
    pub dt: Option<f64>,
}

impl Jet {
    /// Gradient over all inputs, time last.
    pub fn full_gradient(&self) -> Vec<f64> {
        let mut g = self.grad.clone();
        g.extend(self.dt);
        g
    }
}

/// Per-point ω₂ jets laid out like the network jets.
#[derive(Clone, Debug, Default)]
struct OmegaBatch {
    w: Vec<f64>,
    /// Empty when ω is frozen.
    first: Vec<f64>,
    second: Vec<f64>,
}

struct LayerRecord {
    h_in: Vec<f64>,
    a_tanh: Vec<f64>,
    a_gauss: Vec<f64>,
    /// `[σ, σ′, σ″, σ‴]` per unit, each over the batch.
    d_tanh: Vec<f64>,
    d_gauss: Vec<f64>,
}

/// Intermediate values recorded by [`forward_batch`] for the reverse pass.
pub struct Tape {
    shape: JetShape,
    layers: Vec<LayerRecord>,
    h_last: Vec<f64>,
    omega: OmegaBatch,
}

impl Tape {
    pub fn shape(&self) -> JetShape {
        self.shape
    }
}

#[allow(clippy::too_many_arguments)]
fn gemm(
    m: usize,
    k: usize,
    n: usize,
    a: &[f64],
    (rsa, csa): (usize, usize),
    b: &[f64],
    (rsb, csb): (usize, usize),
    beta: f64,
    c: &mut [f64],
    rsc: usize,
) {
    debug_assert!(a.len() >= m * k && b.len() >= k * n && c.len() >= m * n);
    // SAFETY: strides and extents were checked above against the slice lengths.
    unsafe {
        matrixmultiply::dgemm(
            m,
            k,
            n,
            1.0,
            a.as_ptr(),
            rsa as isize,
            csa as isize,
            b.as_ptr(),
            rsb as isize,
            csb as isize,
            beta,
            c.as_mut_ptr(),
            rsc as isize,
            1,
        );
    }
}

/// Fills `d = [σ, σ′, σ″, σ‴]` (each `n` long) for tanh at pre-activations `a`.
fn tanh_row(a: &[f64], d: &mut [f64]) {
    let n = a.len();
    let (s, rest) = d.split_at_mut(n);
    let (s1, rest) = rest.split_at_mut(n);
    let (s2, s3) = rest.split_at_mut(n);
    for p in 0..n {
        s[p] = a[p].tanh();
    }
    for p in 0..n {
        let t = s[p];
        let d1 = 1.0 - t * t;
        let d2 = -2.0 * t * d1;
        s1[p] = d1;
        s2[p] = d2;
        s3[p] = -2.0 * (d1 * d1 + t * d2);
    }
}

/// Same for the Gaussian `exp(−c²/γ)`.
fn gauss_row(c: &[f64], gamma: f64, d: &mut [f64]) {
    let n = c.len();
    let (g, rest) = d.split_at_mut(n);
    let (g1, rest) = rest.split_at_mut(n);
    let (g2, g3) = rest.split_at_mut(n);
    for p in 0..n {
        g[p] = (-c[p] * c[p] / gamma).exp();
    }
    let (ig, ig2) = (1.0 / gamma, 1.0 / (gamma * gamma));
    for p in 0..n {
        let (x, e) = (c[p], g[p]);
        g1[p] = -2.0 * x * ig * e;
        g2[p] = (4.0 * x * x * ig2 - 2.0 * ig) * e;
        g3[p] = e * (12.0 * x * ig2 - 8.0 * x * x * x * ig2 * ig);
    }
}

/// Pushes one unit's jets (`k` blocks of `n`) through an activation with derivatives `d`.
fn activate_row(d: &[f64], a: &[f64], out: &mut [f64], n: usize, nf: usize, ns: usize) {
    let (s, s1, s2) = (&d[..n], &d[n..2 * n], &d[2 * n..3 * n]);
    out[..n].copy_from_slice(s);
    for j in 0..nf {
        let (aj, oj) = (&a[(1 + j) * n..(2 + j) * n], &mut out[(1 + j) * n..(2 + j) * n]);
        for p in 0..n {
            oj[p] = s1[p] * aj[p];
        }
    }
    for i in 0..ns {
        let ai = &a[(1 + i) * n..(2 + i) * n];
        let a2 = &a[(1 + nf + i) * n..(2 + nf + i) * n];
        let o2 = &mut out[(1 + nf + i) * n..(2 + nf + i) * n];
        for p in 0..n {
            o2[p] = s1[p] * a2[p] + s2[p] * ai[p] * ai[p];
        }
    }
}

/// Reverse of [`activate_row`]: `bar` is ∂L/∂(activation jets), result in `abar`.
fn activate_back_row(d: &[f64], a: &[f64], bar: &[f64], abar: &mut [f64], n: usize, nf: usize, ns: usize) {
    let (s1, s2, s3) = (&d[n..2 * n], &d[2 * n..3 * n], &d[3 * n..4 * n]);
    let (head, tail) = abar.split_at_mut(n);
    for p in 0..n {
        head[p] = s1[p] * bar[p];
    }
    for j in 0..nf {
        let (aj, bj) = (&a[(1 + j) * n..(2 + j) * n], &bar[(1 + j) * n..(2 + j) * n]);
        let oj = &mut tail[j * n..(j + 1) * n];
        for p in 0..n {
            oj[p] = s1[p] * bj[p];
            head[p] += s2[p] * aj[p] * bj[p];
        }
    }
    for i in 0..ns {
        let ai = &a[(1 + i) * n..(2 + i) * n];
        let a2 = &a[(1 + nf + i) * n..(2 + nf + i) * n];
        let b2 = &bar[(1 + nf + i) * n..(2 + nf + i) * n];
        for p in 0..n {
            head[p] += (s3[p] * ai[p] * ai[p] + s2[p] * a2[p]) * b2[p];
            tail[i * n + p] += 2.0 * s2[p] * ai[p] * b2[p];
        }
        let o2 = &mut tail[(nf + i) * n..(nf + i + 1) * n];
        for p in 0..n {
            o2[p] = s1[p] * b2[p];
        }
    }
}

fn add_bias(a: &mut [f64], bias: &[f64], cols: usize, n: usize) {
    for (r, b) in bias.iter().enumerate() {
        for v in &mut a[r * cols..r * cols + n] {
            *v += b;
        }
    }
}

fn omega_batch(params: &NetworkParams, omega: Option<&[OmegaJet]>, shape: JetShape) -> Result<OmegaBatch> {
    if params.mode == ActivationMode::TanhOnly {
        return Ok(OmegaBatch::default());
    }
    let omega = omega.ok_or_else(|| Error::InvalidShape("multi-activation batch needs ω values".into()))?;
    if omega.len() != shape.n {
        return Err(Error::DimensionMismatch { expected: shape.n, got: omega.len() });
    }
    let n = shape.n;
    let mut batch = OmegaBatch { w: omega.iter().map(|o| o.w).collect(), ..Default::default() };
    let differentiated = omega.iter().any(|o| !o.first.is_empty());
    if differentiated {
        let (nf, ns) = (shape.n_first(), shape.n_second());
        batch.first = vec![0.0; nf * n];
        batch.second = vec![0.0; ns * n];
        for (p, o) in omega.iter().enumerate() {
            for j in 0..nf {
                batch.first[j * n + p] = o.first.get(j).copied().unwrap_or(0.0);
            }
            for i in 0..ns {
                batch.second[i * n + p] = o.second.get(i).copied().unwrap_or(0.0);
            }
        }
    }
    Ok(batch)
}

/// Evaluates the network jets on a batch of inputs `z = (x[, t])`.
///
/// `omega` holds ω₂ per point (ignored in tanh-only mode). Frozen jets carry
/// only the value; differentiated ones also feed ∇ω and the ω diagonal into
/// the input derivatives.
pub fn forward_batch(
    params: &NetworkParams,
    inputs: &[Vec<f64>],
    omega: Option<&[OmegaJet]>,
    order: Order,
) -> Result<(BatchJets, Tape)> {
    let d_in = params.arch.input_dim();
    let shape = JetShape { n: inputs.len(), inputs: d_in, spatial: params.arch.spatial_dim, order };
    if let Some(bad) = inputs.iter().find(|z| z.len() != d_in) {
        return Err(Error::DimensionMismatch { expected: d_in, got: bad.len() });
    }
    let omega = omega_batch(params, omega, shape)?;
    if shape.n == 0 {
        let tape = Tape { shape, layers: Vec::new(), h_last: Vec::new(), omega };
        return Ok((BatchJets::zeros(shape), tape));
    }
    let n = shape.n;
    let k = shape.components();
    let cols = k * n;
    let (nf, ns) = (shape.n_first(), shape.n_second());

    // Input jets: value = z, ∂z_j/∂z_j = 1, second derivatives zero.
    let mut h = vec![0.0; d_in * cols];
    for (p, z) in inputs.iter().enumerate() {
        for j in 0..d_in {
            h[j * cols + p] = z[j];
            if j < nf {
                h[j * cols + (1 + j) * n + p] = 1.0;
            }
        }
    }

    let multi = params.mode == ActivationMode::MultiActivation;
    let differentiated = !omega.first.is_empty();
    let mut layers = Vec::with_capacity(params.layout.layers.len());
    let mut g_row = vec![0.0; cols];
    let mut extra_row = if differentiated { vec![0.0; cols] } else { Vec::new() };
    for (l, o) in params.layout.layers.iter().enumerate() {
        let m = o.fan_out;
        let mut a_t = vec![0.0; m * cols];
        gemm(m, o.fan_in, cols, params.w_tanh(l), (o.fan_in, 1), &h, (cols, 1), 0.0, &mut a_t, cols);
        add_bias(&mut a_t, params.b_tanh(l), cols, n);
        let mut d_t = vec![0.0; m * 4 * n];
        let (mut a_g, mut d_g) = (Vec::new(), Vec::new());
        if multi {
            a_g = vec![0.0; m * cols];
            gemm(m, o.fan_in, cols, params.w_gauss(l), (o.fan_in, 1), &h, (cols, 1), 0.0, &mut a_g, cols);
            if let Some(bg) = params.b_gauss(l) {
                add_bias(&mut a_g, bg, cols, n);
            }
            d_g = vec![0.0; m * 4 * n];
        }

        let mut out = vec![0.0; m * cols];
        for r in 0..m {
            let row = r * cols..(r + 1) * cols;
            let drow = r * 4 * n..(r + 1) * 4 * n;
            tanh_row(&a_t[r * cols..r * cols + n], &mut d_t[drow.clone()]);
            activate_row(&d_t[drow.clone()], &a_t[row.clone()], &mut out[row.clone()], n, nf, ns);
            if multi {
                gauss_row(&a_g[r * cols..r * cols + n], params.gauss_gamma, &mut d_g[drow.clone()]);
                activate_row(&d_g[drow], &a_g[row.clone()], &mut g_row, n, nf, ns);
                let h_row = &mut out[row];
                if differentiated {
                    omega_extras(h_row, &g_row, &omega, &mut extra_row, n, nf, ns);
                }
                for c in 0..k {
                    let (hc, gc) = (&mut h_row[c * n..(c + 1) * n], &g_row[c * n..(c + 1) * n]);
                    for p in 0..n {
                        hc[p] += omega.w[p] * (gc[p] - hc[p]);
                    }
                }
                if differentiated {
                    for (hv, e) in h_row.iter_mut().zip(&extra_row) {
                        *hv += e;
                    }
                }
            }
        }
        if out.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFiniteLayer { layer: l + 1 });
        }
        layers.push(LayerRecord { h_in: std::mem::replace(&mut h, out), a_tanh: a_t, a_gauss: a_g, d_tanh: d_t, d_gauss: d_g });
    }

    let w_out = params.w_out();
    let mut data = vec![0.0; cols];
    gemm(1, w_out.len(), cols, w_out, (w_out.len(), 1), &h, (cols, 1), 0.0, &mut data, cols);
    for v in &mut data[..n] {
        *v += params.b_out();
    }
    if data.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFiniteLayer { layer: params.layout.layers.len() + 1 });
    }
    Ok((BatchJets { shape, data }, Tape { shape, layers, h_last: h, omega }))
}

/// ω product-rule terms of one unit, from unblended tanh jets `t` and Gaussian jets `g`:
/// `h′_j ⊃ w_j (G − T)`, `h″_i ⊃ 2 w_i (G′_i − T′_i) + w_ii (G − T)`.
fn omega_extras(t: &[f64], g: &[f64], omega: &OmegaBatch, extra: &mut [f64], n: usize, nf: usize, ns: usize) {
    extra[..n].fill(0.0);
    for j in 0..nf {
        for p in 0..n {
            extra[(1 + j) * n + p] = omega.first[j * n + p] * (g[p] - t[p]);
        }
    }
    for i in 0..ns {
        for p in 0..n {
            let dfirst = g[(1 + i) * n + p] - t[(1 + i) * n + p];
            extra[(1 + nf + i) * n + p] = 2.0 * omega.first[i * n + p] * dfirst + omega.second[i * n + p] * (g[p] - t[p]);
        }
    }
}

/// Accumulates `∂L/∂θ` into `grad` given `seed = ∂L/∂(output jets)`.
pub fn backward_batch(params: &NetworkParams, tape: &Tape, seed: &BatchJets, grad: &mut [f64]) -> Result<()> {
    let shape = tape.shape;
    if seed.shape != shape {
        return Err(Error::InvalidShape("seed layout does not match the tape".into()));
    }
    if grad.len() != params.len() {
        return Err(Error::DimensionMismatch { expected: params.len(), got: grad.len() });
    }
    if shape.n == 0 {
        return Ok(());
    }
    let n = shape.n;
    let k = shape.components();
    let cols = k * n;
    let (nf, ns) = (shape.n_first(), shape.n_second());
    let layout = &params.layout;

    // Output layer.
    let last = tape.h_last.len() / cols;
    gemm(1, cols, last, &seed.data, (cols, 1), &tape.h_last, (1, cols), 1.0, &mut grad[layout.w_out..layout.b_out], last);
    grad[layout.b_out] += seed.data[..n].iter().sum::<f64>();
    let mut h_bar = vec![0.0; last * cols];
    for (r, w) in params.w_out().iter().enumerate() {
        for (dst, s) in h_bar[r * cols..(r + 1) * cols].iter_mut().zip(&seed.data) {
            *dst = w * s;
        }
    }

    let multi = params.mode == ActivationMode::MultiActivation;
    let differentiated = !tape.omega.first.is_empty();
    let w = &tape.omega.w;
    let mut g_bar = vec![0.0; cols];
    let mut o_bar = if differentiated { vec![0.0; cols] } else { Vec::new() };
    for (l, o) in layout.layers.iter().enumerate().rev() {
        let rec = &tape.layers[l];
        let m = o.fan_out;
        let mut abar_t = vec![0.0; m * cols];
        let mut abar_g = if multi { vec![0.0; m * cols] } else { Vec::new() };
        for r in 0..m {
            let row = r * cols..(r + 1) * cols;
            let drow = r * 4 * n..(r + 1) * 4 * n;
            // h_bar's row becomes T̄ in place.
            let t_bar = &mut h_bar[row.clone()];
            if multi {
                if differentiated {
                    omega_back(t_bar, &mut o_bar, &tape.omega, n, nf, ns);
                }
                for c in 0..k {
                    let (tc, gc) = (&mut t_bar[c * n..(c + 1) * n], &mut g_bar[c * n..(c + 1) * n]);
                    for p in 0..n {
                        gc[p] = w[p] * tc[p];
                        tc[p] -= gc[p];
                    }
                }
                if differentiated {
                    for ((tv, gv), ov) in t_bar.iter_mut().zip(g_bar.iter_mut()).zip(&o_bar) {
                        *tv -= ov;
                        *gv += ov;
                    }
                }
                activate_back_row(&rec.d_gauss[drow.clone()], &rec.a_gauss[row.clone()], &g_bar, &mut abar_g[row.clone()], n, nf, ns);
            }
            activate_back_row(&rec.d_tanh[drow], &rec.a_tanh[row.clone()], &h_bar[row.clone()], &mut abar_t[row], n, nf, ns);
        }

        let fan_in = o.fan_in;
        gemm(m, cols, fan_in, &abar_t, (cols, 1), &rec.h_in, (1, cols), 1.0, &mut grad[o.w_tanh..o.w_tanh + m * fan_in], fan_in);
        for r in 0..m {
            grad[o.b_tanh + r] += abar_t[r * cols..r * cols + n].iter().sum::<f64>();
        }
        if multi {
            gemm(m, cols, fan_in, &abar_g, (cols, 1), &rec.h_in, (1, cols), 1.0, &mut grad[o.w_gauss..o.w_gauss + m * fan_in], fan_in);
            if let Some(bg) = o.b_gauss {
                for r in 0..m {
                    grad[bg + r] += abar_g[r * cols..r * cols + n].iter().sum::<f64>();
                }
            }
        }
        if l > 0 {
            let mut next = vec![0.0; fan_in * cols];
            gemm(fan_in, m, cols, params.w_tanh(l), (1, fan_in), &abar_t, (cols, 1), 0.0, &mut next, cols);
            if multi {
                gemm(fan_in, m, cols, params.w_gauss(l), (1, fan_in), &abar_g, (cols, 1), 1.0, &mut next, cols);
            }
            h_bar = next;
        }
    }
    Ok(())
}

/// Adjoint of the ω product-rule terms: the amount moved from T̄ to Ḡ.
fn omega_back(h_bar: &[f64], out: &mut [f64], omega: &OmegaBatch, n: usize, nf: usize, ns: usize) {
    out.fill(0.0);
    for p in 0..n {
        let mut mix = 0.0;
        for j in 0..nf {
            mix += omega.first[j * n + p] * h_bar[(1 + j) * n + p];
        }
        for i in 0..ns {
            let b2 = h_bar[(1 + nf + i) * n + p];
            mix += omega.second[i * n + p] * b2;
            out[(1 + i) * n + p] = 2.0 * omega.first[i * n + p] * b2;
        }
        out[p] = mix;
    }
}

/// Jet of one network at `(x[, t])` with ω₂ = `omega.1` held constant.
pub fn eval_jet(params: &NetworkParams, x: &[f64], t: Option<f64>, omega: (f64, f64)) -> Result<Jet> {
    let d = params.arch.spatial_dim;
    if x.len() != d {
        return Err(Error::DimensionMismatch { expected: d, got: x.len() });
    }
    let mut z = x.to_vec();
    match (params.arch.time_input, t) {
        (true, Some(t)) => z.push(t),
        (false, None) => {}
        _ => return Err(Error::InvalidShape("time argument does not match the architecture".into())),
    }
    let om = [OmegaJet::constant(omega.1)];
    let (jets, _) = forward_batch(params, &[z], Some(&om), Order::Full)?;
    Ok(jets.jet(0))
}

/// Flat parameter gradient aligned with [`NetworkParams::theta`].
#[derive(Clone, Debug, PartialEq)]
pub struct GradientVector(pub Vec<f64>);

impl GradientVector {
    pub fn zeros(len: usize) -> Self {
        Self(vec![0.0; len])
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|g| *g == 0.0)
    }
}

impl std::ops::Deref for GradientVector {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.0
    }
}

/// A scalar loss of both subdomain networks.
pub trait CompositeLoss {
    /// Loss value; when `grads` is given, `∂L/∂θ₁` and `∂L/∂θ₂` are accumulated into it.
    fn evaluate(&self, p1: &NetworkParams, p2: &NetworkParams, grads: Option<(&mut [f64], &mut [f64])>) -> Result<f64>;
}

/// `(L, ∂L/∂θ₁, ∂L/∂θ₂)`.
pub fn loss_gradient<L: CompositeLoss + ?Sized>(
    loss: &L,
    p1: &NetworkParams,
    p2: &NetworkParams,
) -> Result<(f64, GradientVector, GradientVector)> {
    let mut g1 = GradientVector::zeros(p1.len());
    let mut g2 = GradientVector::zeros(p2.len());
    let value = loss.evaluate(p1, p2, Some((&mut g1.0, &mut g2.0)))?;
    Ok((value, g1, g2))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CheckOptions {
    pub step: f64,
    pub tolerance: f64,
    /// Denominator floor for the relative error, times max(1, |loss|).
    pub floor: f64,
    /// At most this many evenly spaced entries per network (0 = all).
    pub max_entries: usize,
}

impl Default for CheckOptions {
    fn default() -> Self {
        Self { step: 1e-5, tolerance: 1e-4, floor: 1e-6, max_entries: 0 }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GradientMismatch {
    /// 0 for θ₁, 1 for θ₂.
    pub network: usize,
    pub index: usize,
    pub analytic: f64,
    pub numeric: f64,
    pub relative: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GradientReport {
    pub checked: usize,
    pub max_relative_error: f64,
    pub offending: Vec<GradientMismatch>,
    pub tolerance: f64,
}

impl GradientReport {
    pub fn passed(&self) -> bool {
        self.offending.is_empty()
    }

    pub fn summary(&self) -> String {
        let mut s = format!(
            "checked {} entries, max relative error {:.3e} (tolerance {:.1e})",
            self.checked, self.max_relative_error, self.tolerance
        );
        for m in self.offending.iter().take(10) {
            s.push_str(&format!(
                "\n  net {} index {}: analytic {:.6e} numeric {:.6e} rel {:.3e}",
                m.network + 1,
                m.index,
                m.analytic,
                m.numeric,
                m.relative
            ));
        }
        s
    }
}

pub fn relative_difference(a: f64, b: f64, floor: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(floor)
}

/// Entry-wise comparison of an analytic gradient against numeric values.
pub fn compare_gradients(entries: &[(usize, usize, f64, f64)], tolerance: f64, floor: f64) -> GradientReport {
    let mut report = GradientReport { checked: entries.len(), max_relative_error: 0.0, offending: Vec::new(), tolerance };
    for &(network, index, analytic, numeric) in entries {
        let relative = relative_difference(analytic, numeric, floor);
        report.max_relative_error = report.max_relative_error.max(relative);
        if !(relative <= tolerance) {
            report.offending.push(GradientMismatch { network, index, analytic, numeric, relative });
        }
    }
    report
}

/// Indices checked for a network of `len` parameters.
pub fn sampled_indices(len: usize, max_entries: usize) -> Vec<usize> {
    if max_entries == 0 || max_entries >= len {
        return (0..len).collect();
    }
    (0..max_entries).map(|k| k * len / max_entries).collect()
}

/// Central finite differences of the loss against [`loss_gradient`].
pub fn check_gradient<L: CompositeLoss + ?Sized>(
    loss: &L,
    p1: &NetworkParams,
    p2: &NetworkParams,
    options: CheckOptions,
) -> Result<GradientReport> {
    let (_, g1, g2) = loss_gradient(loss, p1, p2)?;
    check_gradient_against(loss, p1, p2, [&g1, &g2], options)
}

/// Like [`check_gradient`] but with a caller-supplied analytic gradient.
pub fn check_gradient_against<L: CompositeLoss + ?Sized>(
    loss: &L,
    p1: &NetworkParams,
    p2: &NetworkParams,
    analytic: [&[f64]; 2],
    options: CheckOptions,
) -> Result<GradientReport> {
    let h = options.step;
    // FD round-off grows with the loss value, so the floor does too.
    let scale = loss.evaluate(p1, p2, None)?.abs().max(1.0);
    let mut work = [p1.clone(), p2.clone()];
    let mut entries = Vec::new();
    for net in 0..2 {
        for idx in sampled_indices(work[net].len(), options.max_entries) {
            let orig = work[net].theta[idx];
            work[net].theta[idx] = orig + h;
            let plus = loss.evaluate(&work[0], &work[1], None)?;
            work[net].theta[idx] = orig - h;
            let minus = loss.evaluate(&work[0], &work[1], None)?;
            work[net].theta[idx] = orig;
            entries.push((net, idx, analytic[net][idx], (plus - minus) / (2.0 * h)));
        }
    }
    Ok(compare_gradients(&entries, options.tolerance, options.floor * scale))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::{initialize, Arch, NetworkOptions};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn tiny(mode: ActivationMode, hidden: Vec<usize>) -> NetworkParams {
        NetworkParams::zeros(Arch::new(1, false, hidden).unwrap(), mode, NetworkOptions::default()).unwrap()
    }

    #[test]
    fn single_tanh_neuron() {
        let mut p = tiny(ActivationMode::TanhOnly, vec![1]);
        p.theta[p.layout.layers[0].w_tanh] = 1.0;
        p.theta[p.layout.w_out] = 1.0;
        let jet = eval_jet(&p, &[0.0], None, (1.0, 0.0)).unwrap();
        assert_eq!(jet, Jet { value: 0.0, grad: vec![1.0], lap: 0.0, dt: None });
    }

    #[test]
    fn single_gaussian_neuron() {
        let mut p = tiny(ActivationMode::MultiActivation, vec![1]);
        p.theta[p.layout.layers[0].w_gauss] = 1.0;
        p.theta[p.layout.w_out] = 1.0;
        let jet = eval_jet(&p, &[0.0], None, (0.0, 1.0)).unwrap();
        assert_eq!(jet.value, 1.0);
        assert_eq!(jet.grad, vec![0.0]);
        assert!((jet.lap + 2.0).abs() < 1e-15);
    }

    #[test]
    fn zero_output_layer_gives_zero_jet() {
        let arch = Arch::new(2, true, vec![5, 4]).unwrap();
        let mut p = initialize(&arch, ActivationMode::MultiActivation, NetworkOptions::default(), 1).unwrap();
        p.output_mut().fill(0.0);
        let jet = eval_jet(&p, &[0.3, 0.1], Some(0.5), (0.4, 0.6)).unwrap();
        assert_eq!(jet, Jet { value: 0.0, grad: vec![0.0, 0.0], lap: 0.0, dt: Some(0.0) });
    }

    #[test]
    fn batch_value_matches_plain_forward() {
        let arch = Arch::new(2, false, vec![6, 5]).unwrap();
        let p = initialize(&arch, ActivationMode::TanhOnly, NetworkOptions::default(), 4).unwrap();
        let pts = vec![vec![0.1, 0.2], vec![-0.5, 0.7]];
        let (jets, _) = forward_batch(&p, &pts, None, Order::Value).unwrap();
        for (i, x) in pts.iter().enumerate() {
            let direct = crate::network::forward(&p, x, None, None).unwrap();
            assert!((jets.value(i) - direct).abs() < 1e-14);
        }
    }

    #[test]
    fn input_derivatives_match_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for mode in [ActivationMode::TanhOnly, ActivationMode::MultiActivation] {
            let arch = Arch::new(3, true, vec![7, 6]).unwrap();
            let p = initialize(&arch, mode, NetworkOptions::default(), 11).unwrap();
            let w2 = 0.35;
            let x: Vec<f64> = (0..3).map(|_| rng.random_range(-1.0..1.0)).collect();
            let t = 0.4;
            let jet = eval_jet(&p, &x, Some(t), (1.0 - w2, w2)).unwrap();
            let f = |x: &[f64], t: f64| eval_jet(&p, x, Some(t), (1.0 - w2, w2)).unwrap().value;
            let h = 1e-4;
            let mut lap = 0.0;
            for i in 0..3 {
                let mut xp = x.clone();
                xp[i] += h;
                let mut xm = x.clone();
                xm[i] -= h;
                let (fp, fm, f0) = (f(&xp, t), f(&xm, t), f(&x, t));
                assert!((jet.grad[i] - (fp - fm) / (2.0 * h)).abs() < 1e-7);
                lap += (fp - 2.0 * f0 + fm) / (h * h);
            }
            assert!((jet.lap - lap).abs() < 1e-5 * (1.0 + lap.abs()));
            let dt = (f(&x, t + h) - f(&x, t - h)) / (2.0 * h);
            assert!((jet.dt.unwrap() - dt).abs() < 1e-7);
            assert_eq!(jet.full_gradient().last().copied(), jet.dt);
        }
    }

    /// L = Σ_p (a·value + b·lap + c·∂₀u + e·dt)² over a few points.
    struct Probe {
        points: Vec<Vec<f64>>,
        omega: Vec<OmegaJet>,
        coeffs: [f64; 4],
        which: usize,
    }

    impl CompositeLoss for Probe {
        fn evaluate(&self, p1: &NetworkParams, p2: &NetworkParams, grads: Option<(&mut [f64], &mut [f64])>) -> Result<f64> {
            let p = if self.which == 0 { p1 } else { p2 };
            let (jets, tape) = forward_batch(p, &self.points, Some(&self.omega), Order::Full)?;
            let [a, b, c, e] = self.coeffs;
            let d = p.arch.spatial_dim;
            let mut seed = BatchJets::zeros(jets.shape);
            let mut loss = 0.0;
            for i in 0..self.points.len() {
                let r = a * jets.value(i) + b * jets.lap(i) + c * jets.first(0, i) + e * jets.first(d, i);
                loss += r * r;
                *seed.value_mut(i) += 2.0 * r * a;
                seed.seed_lap(i, 2.0 * r * b);
                *seed.first_mut(0, i) += 2.0 * r * c;
                *seed.first_mut(d, i) += 2.0 * r * e;
            }
            if let Some((g1, g2)) = grads {
                backward_batch(p, &tape, &seed, if self.which == 0 { g1 } else { g2 })?;
            }
            Ok(loss)
        }
    }

    #[test]
    fn parameter_gradient_matches_finite_differences() {
        let options = NetworkOptions { gauss_bias: true, ..NetworkOptions::default() };
        for (mode, differentiated) in [
            (ActivationMode::TanhOnly, false),
            (ActivationMode::MultiActivation, false),
            (ActivationMode::MultiActivation, true),
        ] {
            let arch = Arch::new(2, true, vec![4, 3]).unwrap();
            let p1 = initialize(&arch, mode, options, 21).unwrap();
            let p2 = initialize(&arch, mode, options, 22).unwrap();
            let omega = vec![
                if differentiated {
                    OmegaJet { w: 0.3, first: vec![0.2, -0.4, 0.1], second: vec![0.5, -0.3] }
                } else {
                    OmegaJet::constant(0.3)
                },
                OmegaJet { w: 0.8, first: if differentiated { vec![-0.1, 0.3, 0.2] } else { vec![] }, second: if differentiated { vec![0.2, 0.7] } else { vec![] } },
            ];
            let probe = Probe { points: vec![vec![0.2, -0.3, 0.5], vec![-0.6, 0.4, 0.1]], omega, coeffs: [1.0, 0.5, -0.7, 0.3], which: 0 };
            let report = check_gradient(&probe, &p1, &p2, CheckOptions::default()).unwrap();
            assert!(report.passed(), "{mode:?} {differentiated}: {}", report.summary());
            let (_, _, g2) = loss_gradient(&probe, &p1, &p2).unwrap();
            assert!(g2.is_zero());
        }
    }

    #[test]
    fn differentiated_omega_matches_product_rule() {
        // With ω₂ depending on x, the jet must match FD of the network evaluated with ω₂(x).
        let arch = Arch::new(1, false, vec![3]).unwrap();
        let p = initialize(&arch, ActivationMode::MultiActivation, NetworkOptions::default(), 5).unwrap();
        let w = |x: f64| 0.5 + 0.3 * x.sin();
        let u = |x: f64| eval_jet(&p, &[x], None, (1.0 - w(x), w(x))).unwrap().value;
        let x = 0.3;
        let om = [OmegaJet { w: w(x), first: vec![0.3 * x.cos()], second: vec![-0.3 * x.sin()] }];
        let (jets, _) = forward_batch(&p, &[vec![x]], Some(&om), Order::Full).unwrap();
        let h = 1e-4;
        assert!((jets.first(0, 0) - (u(x + h) - u(x - h)) / (2.0 * h)).abs() < 1e-7);
        assert!((jets.lap(0) - (u(x + h) - 2.0 * u(x) + u(x - h)) / (h * h)).abs() < 1e-5);
    }

    struct Linear(Vec<f64>);
    impl CompositeLoss for Linear {
        fn evaluate(&self, p1: &NetworkParams, _: &NetworkParams, grads: Option<(&mut [f64], &mut [f64])>) -> Result<f64> {
            if let Some((g1, _)) = grads {
                g1.copy_from_slice(&self.0);
            }
            Ok(self.0.iter().zip(&p1.theta).map(|(c, t)| c * t).sum())
        }
    }

    #[test]
    fn linear_loss_checks_exactly_and_corruption_is_flagged() {
        let p = tiny(ActivationMode::TanhOnly, vec![2]);
        let coeffs: Vec<f64> = (0..p.len()).map(|i| 0.5 + i as f64 * 0.25).collect();
        let loss = Linear(coeffs.clone());
        let opts = CheckOptions { tolerance: 1e-10, ..CheckOptions::default() };
        let report = check_gradient(&loss, &p, &p, opts).unwrap();
        assert!(report.max_relative_error <= 1e-10, "{}", report.summary());

        let mut corrupted = coeffs.clone();
        corrupted[3] *= 2.0;
        let zeros = vec![0.0; p.len()];
        let report = check_gradient_against(&loss, &p, &p, [&corrupted, &zeros], opts).unwrap();
        assert_eq!(report.offending.len(), 1);
        assert_eq!((report.offending[0].network, report.offending[0].index), (0, 3));
    }
}
