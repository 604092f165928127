use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::encoder::SparseInput;

/// Fully connected layer, weights stored input-major (`w[i * out + o]`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct Dense {
    inputs: usize,
    outputs: usize,
    w: Vec<f32>,
    b: Vec<f32>,
}

impl Dense {
    fn new<R: Rng + ?Sized>(inputs: usize, outputs: usize, gain: f64, rng: &mut R) -> Self {
        let normal = Normal::new(0.0, (gain / inputs as f64).sqrt()).expect("positive std");
        let w = (0..inputs * outputs).map(|_| normal.sample(rng) as f32).collect();
        Self { inputs, outputs, w, b: vec![0.0; outputs] }
    }

    fn forward_dense(&self, x: &[f32], z: &mut [f32]) {
        z.copy_from_slice(&self.b);
        for (i, &xi) in x.iter().enumerate() {
            if xi != 0.0 {
                let row = &self.w[i * self.outputs..(i + 1) * self.outputs];
                for (zo, wo) in z.iter_mut().zip(row) {
                    *zo += xi * wo;
                }
            }
        }
    }

    fn forward_sparse(&self, x: &SparseInput, z: &mut [f32]) {
        z.copy_from_slice(&self.b);
        for (i, xi) in x.iter() {
            let row = &self.w[i * self.outputs..(i + 1) * self.outputs];
            for (zo, wo) in z.iter_mut().zip(row) {
                *zo += xi * wo;
            }
        }
    }
}

/// Multi-layer perceptron: ReLU hidden layers, softmax output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mlp {
    layers: Vec<Dense>,
}

/// Per-sample activations kept for backpropagation.
pub(crate) struct Workspace {
    acts: Vec<Vec<f32>>,
    deltas: Vec<Vec<f32>>,
}

/// Gradient accumulators with the same shape as the network.
pub(crate) struct Grads {
    w: Vec<Vec<f32>>,
    b: Vec<Vec<f32>>,
}

fn softmax_in_place(z: &mut [f32]) {
    let max = z.iter().copied().fold(f32::NEG_INFINITY, f32::max);
    let mut sum = 0.0;
    for v in z.iter_mut() {
        *v = (*v - max).exp();
        sum += *v;
    }
    for v in z.iter_mut() {
        *v /= sum;
    }
}

impl Mlp {
    /// He-initialized network with the given layer widths (input first, classes last).
    pub fn new<R: Rng + ?Sized>(widths: &[usize], rng: &mut R) -> Self {
        assert!(widths.len() >= 2, "need at least input and output widths");
        let last = widths.len() - 2;
        let layers = widths
            .windows(2)
            .enumerate()
            .map(|(l, w)| Dense::new(w[0], w[1], if l == last { 1.0 } else { 2.0 }, rng))
            .collect();
        Self { layers }
    }

    /// Network whose every weight and bias is zero (all classes tie).
    pub fn zeros(widths: &[usize]) -> Self {
        let layers = widths
            .windows(2)
            .map(|w| Dense { inputs: w[0], outputs: w[1], w: vec![0.0; w[0] * w[1]], b: vec![0.0; w[1]] })
            .collect();
        Self { layers }
    }

    pub fn widths(&self) -> Vec<usize> {
        let mut w = vec![self.layers[0].inputs];
        w.extend(self.layers.iter().map(|l| l.outputs));
        w
    }

    pub fn num_classes(&self) -> usize {
        self.layers.last().expect("non-empty").outputs
    }

    pub(crate) fn workspace(&self) -> Workspace {
        Workspace {
            acts: self.layers.iter().map(|l| vec![0.0; l.outputs]).collect(),
            deltas: self.layers.iter().map(|l| vec![0.0; l.outputs]).collect(),
        }
    }

    pub(crate) fn grads(&self) -> Grads {
        Grads {
            w: self.layers.iter().map(|l| vec![0.0; l.w.len()]).collect(),
            b: self.layers.iter().map(|l| vec![0.0; l.b.len()]).collect(),
        }
    }

    /// Class probabilities written into the workspace's last activation.
    pub(crate) fn forward(&self, x: &SparseInput, ws: &mut Workspace) {
        let n = self.layers.len();
        self.layers[0].forward_sparse(x, &mut ws.acts[0]);
        for l in 1..n {
            ws.acts[l - 1].iter_mut().for_each(|v| *v = v.max(0.0));
            let (prev, rest) = ws.acts.split_at_mut(l);
            self.layers[l].forward_dense(&prev[l - 1], &mut rest[0]);
        }
        softmax_in_place(&mut ws.acts[n - 1]);
    }

    /// Raw output scores before softmax.
    pub fn logits(&self, x: &SparseInput) -> Vec<f32> {
        let n = self.layers.len();
        let mut cur = vec![0.0; self.layers[0].outputs];
        self.layers[0].forward_sparse(x, &mut cur);
        for l in 1..n {
            cur.iter_mut().for_each(|v| *v = v.max(0.0));
            let mut next = vec![0.0; self.layers[l].outputs];
            self.layers[l].forward_dense(&cur, &mut next);
            cur = next;
        }
        cur
    }

    pub fn probabilities(&self, x: &SparseInput) -> Vec<f32> {
        let mut z = self.logits(x);
        softmax_in_place(&mut z);
        z
    }

    /// Forward + backward for one sample; adds its cross-entropy gradient to `g`.
    /// Returns the sample loss.
    pub(crate) fn accumulate(&self, x: &SparseInput, class: usize, ws: &mut Workspace, g: &mut Grads) -> f32 {
        self.forward(x, ws);
        let n = self.layers.len();
        let p = &ws.acts[n - 1];
        let loss = -(p[class].max(1e-12)).ln();
        ws.deltas[n - 1].copy_from_slice(p);
        ws.deltas[n - 1][class] -= 1.0;
        for l in (0..n).rev() {
            let layer = &self.layers[l];
            let (lower, upper) = ws.deltas.split_at_mut(l);
            let dz = &upper[0];
            for (gb, d) in g.b[l].iter_mut().zip(dz) {
                *gb += d;
            }
            if l == 0 {
                for (i, xi) in x.iter() {
                    let row = &mut g.w[0][i * layer.outputs..(i + 1) * layer.outputs];
                    for (gw, d) in row.iter_mut().zip(dz) {
                        *gw += xi * d;
                    }
                }
            } else {
                let input = &ws.acts[l - 1];
                let dx = &mut lower[l - 1];
                for (i, &xi) in input.iter().enumerate() {
                    let wrow = &layer.w[i * layer.outputs..(i + 1) * layer.outputs];
                    if xi > 0.0 {
                        let row = &mut g.w[l][i * layer.outputs..(i + 1) * layer.outputs];
                        for (gw, d) in row.iter_mut().zip(dz) {
                            *gw += xi * d;
                        }
                    }
                    // ReLU derivative: inactive units pass no gradient.
                    dx[i] = if xi > 0.0 { wrow.iter().zip(dz).map(|(w, d)| w * d).sum() } else { 0.0 };
                }
            }
        }
        loss
    }

    /// Momentum step: `v = μ v - lr g / batch; θ += v`, then clears `g`.
    pub(crate) fn step(&mut self, g: &mut Grads, vel: &mut Grads, lr: f32, momentum: f32, batch: usize) {
        let scale = lr / batch as f32;
        for (l, layer) in self.layers.iter_mut().enumerate() {
            for ((w, gw), v) in layer.w.iter_mut().zip(g.w[l].iter_mut()).zip(vel.w[l].iter_mut()) {
                *v = momentum * *v - scale * *gw;
                *w += *v;
                *gw = 0.0;
            }
            for ((b, gb), v) in layer.b.iter_mut().zip(g.b[l].iter_mut()).zip(vel.b[l].iter_mut()) {
                *v = momentum * *v - scale * *gb;
                *b += *v;
                *gb = 0.0;
            }
        }
    }

    /// Index of the highest score; ties resolve to the lowest index.
    pub fn argmax(scores: &[f32]) -> usize {
        let mut best = 0;
        for (i, s) in scores.iter().enumerate().skip(1) {
            if *s > scores[best] {
                best = i;
            }
        }
        best
    }

    pub fn parameter_count(&self) -> usize {
        self.layers.iter().map(|l| l.w.len() + l.b.len()).sum()
    }
}
