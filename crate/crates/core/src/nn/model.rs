//! Sequence-to-sequence recurrent models with a linear output head.

use serde::{Deserialize, Serialize};

use super::cell::{Cell, CellKind, CellTrace};
use crate::error::{Error, Result};
use crate::Triad;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    /// Two stacked forward LSTM layers; the second layer reads the first's `h`.
    Lstm2,
    /// One forward and one backward sigmoid RNN cell.
    BiRnn,
    /// One forward and one backward GRU cell.
    BiGru,
}

impl ModelKind {
    pub const ALL: [ModelKind; 3] = [ModelKind::Lstm2, ModelKind::BiRnn, ModelKind::BiGru];

    /// Report label.
    pub fn label(self) -> &'static str {
        match self {
            ModelKind::Lstm2 => "LSTM",
            ModelKind::BiRnn => "RNN",
            ModelKind::BiGru => "GRU",
        }
    }

    pub fn tag(self) -> u8 {
        match self {
            ModelKind::Lstm2 => 0,
            ModelKind::BiRnn => 1,
            ModelKind::BiGru => 2,
        }
    }

    pub fn from_tag(tag: u8) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.tag() == tag)
    }

    fn bidirectional(self) -> bool {
        !matches!(self, ModelKind::Lstm2)
    }
}

impl std::str::FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "lstm" | "lstm2" => Ok(ModelKind::Lstm2),
            "rnn" | "birnn" => Ok(ModelKind::BiRnn),
            "gru" | "bigru" => Ok(ModelKind::BiGru),
            other => Err(Error::Config(format!("unknown recurrent model {other:?}"))),
        }
    }
}

/// Recurrent model whose parameters are one flat vector:
/// first cell, second cell, head weights (`3 × head_input`), head bias.
#[derive(Debug, Clone, PartialEq)]
pub struct RecurrentModel {
    pub kind: ModelKind,
    pub hidden: usize,
    pub params: Vec<f64>,
}

/// Output of a cached forward pass.
pub struct ForwardTrace {
    hidden_a: Vec<f64>,
    hidden_b: Vec<f64>,
    trace_a: CellTrace,
    trace_b: CellTrace,
    pub output: Vec<f64>,
}

impl RecurrentModel {
    pub fn cells(kind: ModelKind, hidden: usize) -> [Cell; 2] {
        match kind {
            ModelKind::Lstm2 => [Cell::new(CellKind::Lstm, 3, hidden), Cell::new(CellKind::Lstm, hidden, hidden)],
            ModelKind::BiRnn => [Cell::new(CellKind::Rnn, 3, hidden); 2],
            ModelKind::BiGru => [Cell::new(CellKind::Gru, 3, hidden); 2],
        }
    }

    pub fn head_input(kind: ModelKind, hidden: usize) -> usize {
        if kind.bidirectional() {
            2 * hidden
        } else {
            hidden
        }
    }

    pub fn param_len(kind: ModelKind, hidden: usize) -> usize {
        let [a, b] = Self::cells(kind, hidden);
        a.param_len() + b.param_len() + 3 * Self::head_input(kind, hidden) + 3
    }

    pub fn zeros(kind: ModelKind, hidden: usize) -> Result<Self> {
        if hidden == 0 {
            return Err(Error::invalid("hidden size must be positive"));
        }
        Ok(Self {
            kind,
            hidden,
            params: vec![0.0; Self::param_len(kind, hidden)],
        })
    }

    /// Cells uniform in `±1/√m`, head uniform in `±1/√(head input)`, zero biases
    /// apart from the LSTM forget gates.
    pub fn init(kind: ModelKind, hidden: usize, mut uniform: impl FnMut() -> f64) -> Result<Self> {
        let mut model = Self::zeros(kind, hidden)?;
        let [a, b] = Self::cells(kind, hidden);
        let (pa, rest) = model.params.split_at_mut(a.param_len());
        let (pb, head) = rest.split_at_mut(b.param_len());
        a.init(pa, &mut uniform);
        b.init(pb, &mut uniform);
        let d = Self::head_input(kind, hidden);
        let bound = 1.0 / (d as f64).sqrt();
        for v in &mut head[..3 * d] {
            *v = bound * (2.0 * uniform() - 1.0);
        }
        Ok(model)
    }

    pub fn from_params(kind: ModelKind, hidden: usize, params: Vec<f64>) -> Result<Self> {
        let expected = Self::param_len(kind, hidden);
        if params.len() != expected {
            return Err(Error::InvalidData(format!(
                "{} parameters for a model expecting {expected}",
                params.len()
            )));
        }
        Ok(Self { kind, hidden, params })
    }

    fn split(&self) -> (&[f64], &[f64], &[f64], &[f64]) {
        let [a, b] = Self::cells(self.kind, self.hidden);
        let d = Self::head_input(self.kind, self.hidden);
        let (pa, rest) = self.params.split_at(a.param_len());
        let (pb, head) = rest.split_at(b.param_len());
        let (hw, hb) = head.split_at(3 * d);
        (pa, pb, hw, hb)
    }

    pub fn head_bias(&self) -> Triad {
        let (_, _, _, hb) = self.split();
        [hb[0], hb[1], hb[2]]
    }

    /// Same network with the forward and backward cells exchanged.
    pub fn swapped_directions(&self) -> Result<Self> {
        if !self.kind.bidirectional() {
            return Err(Error::invalid("only bidirectional models have two directions"));
        }
        let (pa, pb, hw, hb) = self.split();
        let (m, d) = (self.hidden, 2 * self.hidden);
        let mut params = Vec::with_capacity(self.params.len());
        params.extend_from_slice(pb);
        params.extend_from_slice(pa);
        for r in 0..3 {
            params.extend_from_slice(&hw[r * d + m..(r + 1) * d]);
            params.extend_from_slice(&hw[r * d..r * d + m]);
        }
        params.extend_from_slice(hb);
        Self::from_params(self.kind, self.hidden, params)
    }

    /// Flat time-major `steps × 3` input to flat output of the same shape.
    pub fn forward_flat(&self, x: &[f64]) -> ForwardTrace {
        let [ca, cb] = Self::cells(self.kind, self.hidden);
        let (pa, pb, hw, hb) = self.split();
        let steps = x.len() / 3;
        let m = self.hidden;
        let (hidden_a, trace_a) = ca.run(pa, x, false);
        let (hidden_b, trace_b) = if self.kind.bidirectional() {
            cb.run(pb, x, true)
        } else {
            cb.run(pb, &hidden_a, false)
        };
        let d = Self::head_input(self.kind, m);
        let mut output = vec![0.0; steps * 3];
        for t in 0..steps {
            let feats: Vec<f64> = if self.kind.bidirectional() {
                hidden_a[t * m..(t + 1) * m].iter().chain(&hidden_b[t * m..(t + 1) * m]).copied().collect()
            } else {
                hidden_b[t * m..(t + 1) * m].to_vec()
            };
            for r in 0..3 {
                output[t * 3 + r] = hb[r] + hw[r * d..(r + 1) * d].iter().zip(&feats).map(|(w, f)| w * f).sum::<f64>();
            }
        }
        ForwardTrace {
            hidden_a,
            hidden_b,
            trace_a,
            trace_b,
            output,
        }
    }

    pub fn forward(&self, window: &[Triad]) -> Vec<Triad> {
        let flat: Vec<f64> = window.iter().flatten().copied().collect();
        self.forward_flat(&flat)
            .output
            .chunks_exact(3)
            .map(|c| [c[0], c[1], c[2]])
            .collect()
    }

    /// Mean squared error of one window and its gradient with respect to
    /// every parameter.
    pub fn loss_and_grad(&self, x: &[f64], y: &[f64]) -> (f64, Vec<f64>) {
        let fwd = self.forward_flat(x);
        let mut grad = vec![0.0; self.params.len()];
        let loss = self.backward_into(&fwd, x, y, &mut grad);
        (loss, grad)
    }

    /// Adds the gradient of the window MSE to `grad`; returns the MSE.
    pub fn backward_into(&self, fwd: &ForwardTrace, x: &[f64], y: &[f64], grad: &mut [f64]) -> f64 {
        let [ca, cb] = Self::cells(self.kind, self.hidden);
        let (pa, pb, hw, _) = self.split();
        let m = self.hidden;
        let d = Self::head_input(self.kind, m);
        let steps = x.len() / 3;
        let n = (steps * 3) as f64;
        let bidir = self.kind.bidirectional();

        let (ga, rest) = grad.split_at_mut(ca.param_len());
        let (gb, ghead) = rest.split_at_mut(cb.param_len());
        let (ghw, ghb) = ghead.split_at_mut(3 * d);

        let mut loss = 0.0;
        let mut dfa = vec![0.0; steps * m];
        let mut dfb = vec![0.0; steps * m];
        for t in 0..steps {
            for r in 0..3 {
                let e = fwd.output[t * 3 + r] - y[t * 3 + r];
                loss += e * e;
                let de = 2.0 * e / n;
                ghb[r] += de;
                for j in 0..d {
                    let (feat, slot) = if bidir && j >= m {
                        (fwd.hidden_b[t * m + j - m], &mut dfb[t * m + j - m])
                    } else if bidir {
                        (fwd.hidden_a[t * m + j], &mut dfa[t * m + j])
                    } else {
                        (fwd.hidden_b[t * m + j], &mut dfb[t * m + j])
                    };
                    ghw[r * d + j] += de * feat;
                    *slot += de * hw[r * d + j];
                }
            }
        }
        if bidir {
            cb.backward(pb, &fwd.trace_b, &dfb, true, gb);
        } else {
            let d_hidden_a = cb.backward(pb, &fwd.trace_b, &dfb, false, gb);
            for (a, v) in dfa.iter_mut().zip(d_hidden_a) {
                *a += v;
            }
        }
        ca.backward(pa, &fwd.trace_a, &dfa, false, ga);
        loss / n
    }
}

/// Mean of squared residuals over all `H × 3` entries.
pub fn mse_loss(pred: &[Triad], gt: &[Triad]) -> Result<f64> {
    if pred.len() != gt.len() || pred.is_empty() {
        return Err(Error::invalid("prediction and reference must be non-empty and equally long"));
    }
    let sum: f64 = pred
        .iter()
        .zip(gt)
        .flat_map(|(p, g)| (0..3).map(move |a| (p[a] - g[a]).powi(2)))
        .sum();
    Ok(sum / (3 * pred.len()) as f64)
}
