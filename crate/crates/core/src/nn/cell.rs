//! Recurrent cells with cached forward passes and hand-written BPTT.
//!
//! A cell's parameters live in one flat slice: the stacked gate matrix
//! `W` (`gates·m × (in + m)`, row-major) followed by the stacked bias `b`.
//! Gate order is `[f, i, c, o]` for LSTM and `[r, z, h]` for GRU.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CellKind {
    Rnn,
    Gru,
    Lstm,
}

impl CellKind {
    pub fn gates(self) -> usize {
        match self {
            CellKind::Rnn => 1,
            CellKind::Gru => 3,
            CellKind::Lstm => 4,
        }
    }
}

pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Cell {
    pub kind: CellKind,
    pub input: usize,
    pub hidden: usize,
}

/// Per-step activations kept for the backward pass, stored time-major.
#[derive(Debug, Clone, Default)]
pub struct CellTrace {
    /// `[x_t, h_{t−1}]` per processed step.
    xh: Vec<f64>,
    /// Post-activation gates.
    gates: Vec<f64>,
    /// LSTM cell state, or GRU `[x_t, r⊗h_{t−1}]`.
    aux: Vec<f64>,
}

impl Cell {
    pub fn new(kind: CellKind, input: usize, hidden: usize) -> Self {
        Self { kind, input, hidden }
    }

    fn cols(&self) -> usize {
        self.input + self.hidden
    }

    fn rows(&self) -> usize {
        self.kind.gates() * self.hidden
    }

    pub fn weight_len(&self) -> usize {
        self.rows() * self.cols()
    }

    pub fn param_len(&self) -> usize {
        self.weight_len() + self.rows()
    }

    /// Uniform `±1/√m` weights, zero biases, forget-gate bias 1.
    pub fn init(&self, params: &mut [f64], mut uniform: impl FnMut() -> f64) {
        let bound = 1.0 / (self.hidden as f64).sqrt();
        let (w, b) = params.split_at_mut(self.weight_len());
        for v in w {
            *v = bound * (2.0 * uniform() - 1.0);
        }
        b.fill(0.0);
        if self.kind == CellKind::Lstm {
            b[..self.hidden].fill(1.0);
        }
    }

    /// Affine map of rows `[r0, r0 + n)` of `W` applied to `v`.
    fn affine(&self, params: &[f64], r0: usize, n: usize, v: &[f64], out: &mut [f64]) {
        let cols = self.cols();
        let (w, b) = params.split_at(self.weight_len());
        for (r, o) in (r0..r0 + n).zip(out.iter_mut()) {
            let row = &w[r * cols..(r + 1) * cols];
            *o = b[r] + row.iter().zip(v).map(|(a, x)| a * x).sum::<f64>();
        }
    }

    /// One step; returns the new hidden state and, for LSTM, updates `c`.
    pub fn step(&self, params: &[f64], x: &[f64], h_prev: &[f64], c: &mut [f64]) -> Vec<f64> {
        let mut trace = CellTrace::default();
        let mut h = h_prev.to_vec();
        self.step_traced(params, x, &mut h, c, &mut trace);
        h
    }

    fn step_traced(&self, params: &[f64], x: &[f64], h: &mut [f64], c: &mut [f64], trace: &mut CellTrace) {
        let m = self.hidden;
        let xh: Vec<f64> = x.iter().chain(h.iter()).copied().collect();
        let mut z = vec![0.0; self.rows()];
        match self.kind {
            CellKind::Rnn => {
                self.affine(params, 0, m, &xh, &mut z);
                for (hi, zi) in h.iter_mut().zip(&mut z) {
                    *zi = sigmoid(*zi);
                    *hi = *zi;
                }
            }
            CellKind::Lstm => {
                self.affine(params, 0, 4 * m, &xh, &mut z);
                for j in 0..m {
                    let f = sigmoid(z[j]);
                    let i = sigmoid(z[m + j]);
                    let g = z[2 * m + j].tanh();
                    let o = sigmoid(z[3 * m + j]);
                    (z[j], z[m + j], z[2 * m + j], z[3 * m + j]) = (f, i, g, o);
                    c[j] = f * c[j] + i * g;
                    h[j] = o * c[j].tanh();
                }
                trace.aux.extend_from_slice(c);
            }
            CellKind::Gru => {
                self.affine(params, 0, 2 * m, &xh, &mut z[..2 * m]);
                for v in &mut z[..2 * m] {
                    *v = sigmoid(*v);
                }
                let mut xrh = xh.clone();
                for j in 0..m {
                    xrh[self.input + j] *= z[j];
                }
                let (_, cand) = z.split_at_mut(2 * m);
                self.affine(params, 2 * m, m, &xrh, cand);
                for j in 0..m {
                    let hc = z[2 * m + j].tanh();
                    z[2 * m + j] = hc;
                    let u = z[m + j];
                    h[j] = (1.0 - u) * h[j] + u * hc;
                }
                trace.aux.extend_from_slice(&xrh);
            }
        }
        trace.xh.extend_from_slice(&xh);
        trace.gates.extend_from_slice(&z);
    }

    /// Runs over `steps` inputs (`x` time-major, `steps × input`), optionally
    /// in reverse time. Outputs are stored at their original time index.
    pub fn run(&self, params: &[f64], x: &[f64], reverse: bool) -> (Vec<f64>, CellTrace) {
        let steps = x.len() / self.input;
        let m = self.hidden;
        let mut h = vec![0.0; m];
        let mut c = vec![0.0; m];
        let mut trace = CellTrace {
            xh: Vec::with_capacity(steps * self.cols()),
            gates: Vec::with_capacity(steps * self.rows()),
            aux: Vec::new(),
        };
        let mut out = vec![0.0; steps * m];
        for s in 0..steps {
            let t = if reverse { steps - 1 - s } else { s };
            self.step_traced(params, &x[t * self.input..(t + 1) * self.input], &mut h, &mut c, &mut trace);
            out[t * m..(t + 1) * m].copy_from_slice(&h);
        }
        (out, trace)
    }

    /// Accumulates parameter gradients into `grad` given `dh` (gradient of the
    /// loss w.r.t. each output, original time order); returns the input gradient.
    pub fn backward(&self, params: &[f64], trace: &CellTrace, dh_out: &[f64], reverse: bool, grad: &mut [f64]) -> Vec<f64> {
        let m = self.hidden;
        let n_in = self.input;
        let cols = self.cols();
        let rows = self.rows();
        let steps = dh_out.len() / m;
        let wl = self.weight_len();
        let w = &params[..wl];
        let mut dx = vec![0.0; steps * n_in];
        let mut dh_carry = vec![0.0; m];
        let mut dc_carry = vec![0.0; m];
        let mut dz = vec![0.0; rows];
        let mut dxh = vec![0.0; cols];

        for s in (0..steps).rev() {
            let t = if reverse { steps - 1 - s } else { s };
            let xh = &trace.xh[s * cols..(s + 1) * cols];
            let gates = &trace.gates[s * rows..(s + 1) * rows];
            let h_prev = &xh[n_in..];
            let dh: Vec<f64> = (0..m).map(|j| dh_carry[j] + dh_out[t * m + j]).collect();
            dxh.fill(0.0);
            match self.kind {
                CellKind::Rnn => {
                    for j in 0..m {
                        let a = gates[j];
                        dz[j] = dh[j] * a * (1.0 - a);
                    }
                    accumulate(w, grad, cols, 0, rows, &dz, xh, &mut dxh);
                    dh_carry.copy_from_slice(&dxh[n_in..]);
                }
                CellKind::Lstm => {
                    let c = &trace.aux[s * m..(s + 1) * m];
                    for j in 0..m {
                        let (f, i, g, o) = (gates[j], gates[m + j], gates[2 * m + j], gates[3 * m + j]);
                        let c_prev = if s == 0 { 0.0 } else { trace.aux[(s - 1) * m + j] };
                        let tc = c[j].tanh();
                        let dc = dc_carry[j] + dh[j] * o * (1.0 - tc * tc);
                        dz[j] = dc * c_prev * f * (1.0 - f);
                        dz[m + j] = dc * g * i * (1.0 - i);
                        dz[2 * m + j] = dc * i * (1.0 - g * g);
                        dz[3 * m + j] = dh[j] * tc * o * (1.0 - o);
                        dc_carry[j] = dc * f;
                    }
                    accumulate(w, grad, cols, 0, rows, &dz, xh, &mut dxh);
                    dh_carry.copy_from_slice(&dxh[n_in..]);
                }
                CellKind::Gru => {
                    let xrh = &trace.aux[s * cols..(s + 1) * cols];
                    let mut dh_prev = vec![0.0; m];
                    for j in 0..m {
                        let (u, hc) = (gates[m + j], gates[2 * m + j]);
                        dz[2 * m + j] = dh[j] * u * (1.0 - hc * hc);
                        dz[m + j] = dh[j] * (hc - h_prev[j]) * u * (1.0 - u);
                        dh_prev[j] = dh[j] * (1.0 - u);
                    }
                    let mut dxrh = vec![0.0; cols];
                    accumulate(w, grad, cols, 2 * m, m, &dz[2 * m..], xrh, &mut dxrh);
                    for j in 0..m {
                        let r = gates[j];
                        let drh = dxrh[n_in + j];
                        dz[j] = drh * h_prev[j] * r * (1.0 - r);
                        dh_prev[j] += drh * r;
                    }
                    accumulate(w, grad, cols, 0, 2 * m, &dz[..2 * m], xh, &mut dxh);
                    for k in 0..n_in {
                        dxh[k] += dxrh[k];
                    }
                    for j in 0..m {
                        dh_carry[j] = dh_prev[j] + dxh[n_in + j];
                    }
                }
            }
            for (g, d) in grad[wl..].iter_mut().zip(&dz) {
                *g += d;
            }
            dx[t * n_in..(t + 1) * n_in].copy_from_slice(&dxh[..n_in]);
        }
        dx
    }
}

/// `dW[rows] += dz ⊗ v` and `dv += W[rows]ᵀ dz` for rows `[r0, r0 + n)`.
#[allow(clippy::too_many_arguments)]
fn accumulate(w: &[f64], grad: &mut [f64], cols: usize, r0: usize, n: usize, dz: &[f64], v: &[f64], dv: &mut [f64]) {
    for (k, r) in (r0..r0 + n).enumerate() {
        let d = dz[k];
        if d == 0.0 {
            continue;
        }
        let row = &w[r * cols..(r + 1) * cols];
        let grow = &mut grad[r * cols..(r + 1) * cols];
        for c in 0..cols {
            grow[c] += d * v[c];
            dv[c] += row[c] * d;
        }
    }
}
