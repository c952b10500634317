//! Stacked bidirectional GRU with a per-timestep dense(tanh) + sigmoid head.
//!
//! All parameters live in one flat `f64` vector. Per layer and direction the
//! cell block is `W` (3H x in, gates z, r, h), `U` (3H x H), `b` (3H). The head
//! is `Wd` (D x 2H), `bd` (D), `wo` (D), `bo` (1).
//!
//! Recurrence per step:
//! `z = σ(Wz x + Uz h + bz)`, `r = σ(Wr x + Ur h + br)`,
//! `c = tanh(Wh x + Uh (r ⊙ h) + bh)`, `h' = (1 - z) ⊙ h + z ⊙ c`.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{Example, ModelError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Shape {
    pub input_dim: usize,
    pub hidden: usize,
    pub layers: usize,
    pub dense_dim: usize,
}

#[derive(Debug, Clone, Copy)]
struct Cell {
    w: usize,
    u: usize,
    b: usize,
    input: usize,
    hidden: usize,
}

impl Shape {
    fn layer_input(&self, layer: usize) -> usize {
        if layer == 0 {
            self.input_dim
        } else {
            2 * self.hidden
        }
    }

    fn cell_len(&self, layer: usize) -> usize {
        let h = self.hidden;
        3 * h * self.layer_input(layer) + 3 * h * h + 3 * h
    }

    fn cell(&self, layer: usize, dir: usize) -> Cell {
        let mut at = 0;
        for l in 0..layer {
            at += 2 * self.cell_len(l);
        }
        at += dir * self.cell_len(layer);
        let (h, input) = (self.hidden, self.layer_input(layer));
        Cell { w: at, u: at + 3 * h * input, b: at + 3 * h * input + 3 * h * h, input, hidden: h }
    }

    fn head(&self) -> usize {
        (0..self.layers).map(|l| 2 * self.cell_len(l)).sum()
    }

    pub fn param_count(&self) -> usize {
        self.head() + self.dense_dim * 2 * self.hidden + 2 * self.dense_dim + 1
    }
}

/// Per-timestep outputs of the activation layer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActivationTrace {
    pub outputs: Vec<f64>,
}

impl ActivationTrace {
    pub fn final_output(&self) -> f64 {
        *self.outputs.last().expect("trace is never empty")
    }
}

pub(crate) fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

struct Step {
    h_prev: Vec<f64>,
    z: Vec<f64>,
    r: Vec<f64>,
    c: Vec<f64>,
    h: Vec<f64>,
}

fn cell_forward(p: &[f64], cell: Cell, x: &[f64], h_prev: &[f64]) -> Step {
    let (h, n) = (cell.hidden, cell.input);
    let mut a = p[cell.b..cell.b + 3 * h].to_vec();
    for (row, a_row) in a.iter_mut().enumerate() {
        let w = &p[cell.w + row * n..cell.w + (row + 1) * n];
        *a_row += w.iter().zip(x).map(|(w, x)| w * x).sum::<f64>();
    }
    let u = |row: usize, v: &[f64]| -> f64 {
        p[cell.u + row * h..cell.u + (row + 1) * h].iter().zip(v).map(|(u, v)| u * v).sum()
    };
    let z: Vec<f64> = (0..h).map(|i| sigmoid(a[i] + u(i, h_prev))).collect();
    let r: Vec<f64> = (0..h).map(|i| sigmoid(a[h + i] + u(h + i, h_prev))).collect();
    let rh: Vec<f64> = r.iter().zip(h_prev).map(|(r, h)| r * h).collect();
    let c: Vec<f64> = (0..h).map(|i| (a[2 * h + i] + u(2 * h + i, &rh)).tanh()).collect();
    let hn = (0..h).map(|i| (1.0 - z[i]) * h_prev[i] + z[i] * c[i]).collect();
    Step { h_prev: h_prev.to_vec(), z, r, c, h: hn }
}

/// Accumulates parameter gradients into `g` and input gradients into `dx`;
/// returns the gradient with respect to the previous hidden state.
fn cell_backward(p: &[f64], g: &mut [f64], cell: Cell, x: &[f64], s: &Step, dh: &[f64], dx: &mut [f64]) -> Vec<f64> {
    let (h, n) = (cell.hidden, cell.input);
    let mut dh_prev: Vec<f64> = (0..h).map(|i| dh[i] * (1.0 - s.z[i])).collect();
    let mut da = vec![0.0; 3 * h];
    for i in 0..h {
        let dc = dh[i] * s.z[i];
        let dz = dh[i] * (s.c[i] - s.h_prev[i]);
        da[i] = dz * s.z[i] * (1.0 - s.z[i]);
        da[2 * h + i] = dc * (1.0 - s.c[i] * s.c[i]);
    }
    let rh: Vec<f64> = s.r.iter().zip(&s.h_prev).map(|(r, h)| r * h).collect();
    let mut drh = vec![0.0; h];
    for i in 0..h {
        let d = da[2 * h + i];
        if d == 0.0 {
            continue;
        }
        let row = cell.u + (2 * h + i) * h;
        for j in 0..h {
            drh[j] += p[row + j] * d;
            g[row + j] += d * rh[j];
        }
    }
    for j in 0..h {
        da[h + j] = drh[j] * s.h_prev[j] * s.r[j] * (1.0 - s.r[j]);
        dh_prev[j] += drh[j] * s.r[j];
    }
    for row in 0..3 * h {
        let d = da[row];
        if d == 0.0 {
            continue;
        }
        g[cell.b + row] += d;
        let w = cell.w + row * n;
        for k in 0..n {
            g[w + k] += d * x[k];
            dx[k] += p[w + k] * d;
        }
        if row < 2 * h {
            let u = cell.u + row * h;
            for j in 0..h {
                g[u + j] += d * s.h_prev[j];
                dh_prev[j] += p[u + j] * d;
            }
        }
    }
    dh_prev
}

struct Pass {
    /// Input sequence of each layer (after dropout for layers above the first).
    inputs: Vec<Vec<Vec<f64>>>,
    /// Dropout scale per layer above the first, same shape as its input.
    masks: Vec<Option<Vec<Vec<f64>>>>,
    steps: Vec<[Vec<Step>; 2]>,
    top: Vec<Vec<f64>>,
    dense: Vec<Vec<f64>>,
    outputs: Vec<f64>,
    logit: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bgru {
    pub shape: Shape,
    pub params: Vec<f64>,
}

impl Bgru {
    pub fn zeros(shape: Shape) -> Self {
        Self { shape, params: vec![0.0; shape.param_count()] }
    }

    /// Uniform `±1/sqrt(H)` for the cells, Glorot uniform for the head weights.
    pub fn init(shape: Shape, rng: &mut ChaCha8Rng) -> Self {
        let mut params = vec![0.0; shape.param_count()];
        let k = 1.0 / (shape.hidden as f64).sqrt();
        let head = shape.head();
        for p in &mut params[..head] {
            *p = rng.gen_range(-k..k);
        }
        let (d, two_h) = (shape.dense_dim, 2 * shape.hidden);
        let kd = (6.0 / (d + two_h) as f64).sqrt();
        for p in &mut params[head..head + d * two_h] {
            *p = rng.gen_range(-kd..kd);
        }
        let ko = (6.0 / (d + 1) as f64).sqrt();
        let wo = head + d * two_h + d;
        for p in &mut params[wo..wo + d] {
            *p = rng.gen_range(-ko..ko);
        }
        Self { shape, params }
    }

    fn check(&self, ex: &Example) -> Result<(), ModelError> {
        let d = self.shape.input_dim;
        if self.params.len() != self.shape.param_count() {
            return Err(ModelError::Shape(format!(
                "expected {} parameters, found {}",
                self.shape.param_count(),
                self.params.len()
            )));
        }
        if ex.steps == 0 || ex.inputs.len() != ex.steps * d {
            return Err(ModelError::Shape(format!(
                "sample has {} values for {} steps of width {d}",
                ex.inputs.len(),
                ex.steps
            )));
        }
        Ok(())
    }

    fn run(&self, ex: &Example, dropout: Option<(f64, &mut ChaCha8Rng)>) -> Pass {
        let sh = self.shape;
        let (hd, t_len) = (sh.hidden, ex.steps);
        let p = &self.params;
        let mut current: Vec<Vec<f64>> = ex.inputs.chunks(sh.input_dim).map(<[f64]>::to_vec).collect();
        let mut inputs = Vec::with_capacity(sh.layers);
        let mut masks = Vec::with_capacity(sh.layers);
        let mut steps = Vec::with_capacity(sh.layers);
        let mut dropout = dropout;
        for layer in 0..sh.layers {
            let mask = match (&mut dropout, layer) {
                (Some((rate, rng)), l) if l > 0 && *rate > 0.0 => {
                    let keep = 1.0 - *rate;
                    let m: Vec<Vec<f64>> = current
                        .iter()
                        .map(|v| v.iter().map(|_| if rng.gen::<f64>() < keep { 1.0 / keep } else { 0.0 }).collect())
                        .collect();
                    for (v, m) in current.iter_mut().zip(&m) {
                        v.iter_mut().zip(m).for_each(|(x, s)| *x *= s);
                    }
                    Some(m)
                }
                _ => None,
            };
            let fwd_cell = sh.cell(layer, 0);
            let bwd_cell = sh.cell(layer, 1);
            let mut fwd = Vec::with_capacity(t_len);
            let mut h = vec![0.0; hd];
            for x in &current {
                let s = cell_forward(p, fwd_cell, x, &h);
                h.clone_from(&s.h);
                fwd.push(s);
            }
            let mut bwd: Vec<Step> = Vec::with_capacity(t_len);
            let mut h = vec![0.0; hd];
            for x in current.iter().rev() {
                let s = cell_forward(p, bwd_cell, x, &h);
                h.clone_from(&s.h);
                bwd.push(s);
            }
            bwd.reverse();
            let out: Vec<Vec<f64>> =
                (0..t_len).map(|t| fwd[t].h.iter().chain(&bwd[t].h).copied().collect()).collect();
            inputs.push(std::mem::replace(&mut current, out));
            masks.push(mask);
            steps.push([fwd, bwd]);
        }
        let head = sh.head();
        let (dd, two_h) = (sh.dense_dim, 2 * hd);
        let bd = head + dd * two_h;
        let wo = bd + dd;
        let bo = wo + dd;
        let mut dense = Vec::with_capacity(t_len);
        let mut outputs = Vec::with_capacity(t_len);
        let mut logit = 0.0;
        for s in &current {
            let y: Vec<f64> = (0..dd)
                .map(|i| {
                    let w = &p[head + i * two_h..head + (i + 1) * two_h];
                    (p[bd + i] + w.iter().zip(s).map(|(w, s)| w * s).sum::<f64>()).tanh()
                })
                .collect();
            logit = p[bo] + y.iter().zip(&p[wo..wo + dd]).map(|(y, w)| y * w).sum::<f64>();
            outputs.push(sigmoid(logit));
            dense.push(y);
        }
        Pass { inputs, masks, steps, top: current, dense, outputs, logit }
    }

    /// Inference-mode forward pass over the packed sequence.
    pub fn forward(&self, ex: &Example) -> Result<ActivationTrace, ModelError> {
        self.check(ex)?;
        Ok(ActivationTrace { outputs: self.run(ex, None).outputs })
    }

    /// Probability `o_T` and the label `o_T >= threshold`.
    pub fn predict(&self, ex: &Example, threshold: f64) -> Result<(u8, f64), ModelError> {
        let p = self.forward(ex)?.final_output();
        Ok((u8::from(p >= threshold), p))
    }

    /// Binary cross-entropy on the final output and its gradient, optionally
    /// with dropout between stacked layers.
    pub(crate) fn sample_gradient(
        &self,
        ex: &Example,
        dropout: Option<(f64, &mut ChaCha8Rng)>,
    ) -> Result<(f64, Vec<f64>), ModelError> {
        self.check(ex)?;
        let pass = self.run(ex, dropout);
        let y = f64::from(ex.label);
        let a = pass.logit;
        // softplus(a) - y a, stable for large |a|
        let loss = a.max(0.0) + (-a.abs()).exp().ln_1p() - y * a;
        let mut g = vec![0.0; self.params.len()];
        self.backward(&pass, pass.outputs.last().copied().unwrap_or(0.5) - y, &mut g);
        Ok((loss, g))
    }

    fn backward(&self, pass: &Pass, dlogit: f64, g: &mut [f64]) {
        let sh = self.shape;
        let p = &self.params;
        let (hd, dd, two_h) = (sh.hidden, sh.dense_dim, 2 * sh.hidden);
        let t_len = pass.top.len();
        let last = t_len - 1;
        let head = sh.head();
        let bd = head + dd * two_h;
        let wo = bd + dd;
        let bo = wo + dd;
        g[bo] += dlogit;
        let y = &pass.dense[last];
        let s = &pass.top[last];
        let mut d_top = vec![0.0; two_h];
        for i in 0..dd {
            g[wo + i] += dlogit * y[i];
            let dpre = dlogit * p[wo + i] * (1.0 - y[i] * y[i]);
            g[bd + i] += dpre;
            let row = head + i * two_h;
            for k in 0..two_h {
                g[row + k] += dpre * s[k];
                d_top[k] += p[row + k] * dpre;
            }
        }
        let mut d_out = vec![vec![0.0; two_h]; t_len];
        d_out[last] = d_top;
        for layer in (0..sh.layers).rev() {
            let xs = &pass.inputs[layer];
            let [fwd, bwd] = &pass.steps[layer];
            let mut dx = vec![vec![0.0; sh.layer_input(layer)]; t_len];
            let cell = sh.cell(layer, 0);
            let mut carry = vec![0.0; hd];
            for t in (0..t_len).rev() {
                let dh: Vec<f64> = (0..hd).map(|i| d_out[t][i] + carry[i]).collect();
                carry = cell_backward(p, g, cell, &xs[t], &fwd[t], &dh, &mut dx[t]);
            }
            let cell = sh.cell(layer, 1);
            let mut carry = vec![0.0; hd];
            for t in 0..t_len {
                let dh: Vec<f64> = (0..hd).map(|i| d_out[t][hd + i] + carry[i]).collect();
                carry = cell_backward(p, g, cell, &xs[t], &bwd[t], &dh, &mut dx[t]);
            }
            if let Some(mask) = &pass.masks[layer] {
                for (d, m) in dx.iter_mut().zip(mask) {
                    d.iter_mut().zip(m).for_each(|(d, m)| *d *= m);
                }
            }
            d_out = dx;
        }
    }

    /// Mean loss and gradient over `batch`, inference mode.
    pub fn loss_and_gradients(&self, batch: &[&Example]) -> Result<(f64, Vec<f64>), ModelError> {
        if batch.is_empty() {
            return Err(ModelError::EmptyDataset);
        }
        let mut total = 0.0;
        let mut grad = vec![0.0; self.params.len()];
        for (i, ex) in batch.iter().enumerate() {
            let (loss, g) = self.sample_gradient(ex, None)?;
            if !loss.is_finite() {
                return Err(ModelError::NonFiniteLoss { index: i });
            }
            total += loss;
            grad.iter_mut().zip(g).for_each(|(a, b)| *a += b);
        }
        let n = batch.len() as f64;
        grad.iter_mut().for_each(|v| *v /= n);
        Ok((total / n, grad))
    }
}
