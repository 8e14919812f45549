use std::collections::BTreeMap;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::{Example, SparseVec};
use crate::error::{Error, Result};

/// Dense layer, `weights[r * cols + c]` maps input `r` to output `c`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Layer {
    pub rows: usize,
    pub cols: usize,
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
}

impl Layer {
    fn zeros(rows: usize, cols: usize) -> Self {
        Layer {
            rows,
            cols,
            weights: vec![0.0; rows * cols],
            bias: vec![0.0; cols],
        }
    }

    fn uniform(rows: usize, cols: usize, bound: f64, rng: &mut impl Rng) -> Self {
        let mut l = Layer::zeros(rows, cols);
        for w in &mut l.weights {
            *w = rng.random_range(-bound..bound);
        }
        l
    }

    fn row(&self, r: usize) -> &[f64] {
        &self.weights[r * self.cols..(r + 1) * self.cols]
    }

    fn num_params(&self) -> usize {
        self.weights.len() + self.bias.len()
    }
}

/// Softmax classifier, either linear (`input -> classes`) or with one tanh
/// hidden layer (`input -> hidden -> classes`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub layers: Vec<Layer>,
}

impl ModelParams {
    /// Linear models start at zero; hidden models get seeded uniform weights
    /// in the first layer (inputs are unit-norm, so pre-activations stay O(1))
    /// and Glorot-uniform weights in the output layer.
    pub fn init(input_dim: usize, hidden_size: usize, num_classes: usize, rng: &mut impl Rng) -> Self {
        let layers = if hidden_size == 0 {
            vec![Layer::zeros(input_dim, num_classes)]
        } else {
            let out_bound = (6.0 / (hidden_size + num_classes) as f64).sqrt();
            vec![
                Layer::uniform(input_dim, hidden_size, 1.0, rng),
                Layer::uniform(hidden_size, num_classes, out_bound, rng),
            ]
        };
        ModelParams { layers }
    }

    pub fn zeros(input_dim: usize, hidden_size: usize, num_classes: usize) -> Self {
        let layers = if hidden_size == 0 {
            vec![Layer::zeros(input_dim, num_classes)]
        } else {
            vec![
                Layer::zeros(input_dim, hidden_size),
                Layer::zeros(hidden_size, num_classes),
            ]
        };
        ModelParams { layers }
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].rows
    }

    pub fn num_classes(&self) -> usize {
        self.layers.last().expect("at least one layer").cols
    }

    pub fn hidden_size(&self) -> usize {
        if self.layers.len() == 2 {
            self.layers[0].cols
        } else {
            0
        }
    }

    pub fn num_params(&self) -> usize {
        self.layers.iter().map(Layer::num_params).sum()
    }

    /// All parameters in a fixed order: per layer, weights then biases.
    pub fn flat(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(self.num_params());
        for l in &self.layers {
            v.extend_from_slice(&l.weights);
            v.extend_from_slice(&l.bias);
        }
        v
    }

    pub fn set_flat(&mut self, values: &[f64]) {
        assert_eq!(values.len(), self.num_params());
        let mut off = 0;
        for l in &mut self.layers {
            let n = l.weights.len();
            l.weights.copy_from_slice(&values[off..off + n]);
            off += n;
            let n = l.bias.len();
            l.bias.copy_from_slice(&values[off..off + n]);
            off += n;
        }
    }

    pub fn is_finite(&self) -> bool {
        self.layers
            .iter()
            .all(|l| l.weights.iter().chain(&l.bias).all(|x| x.is_finite()))
    }

    fn check_input(&self, x: &SparseVec) -> Result<()> {
        match x.max_index() {
            Some(i) if i >= self.input_dim() => Err(Error::Shape(format!(
                "feature index {i} outside model input dimension {}",
                self.input_dim()
            ))),
            _ => Ok(()),
        }
    }

    /// Hidden activations (empty for linear models) and output logits.
    fn activations(&self, x: &SparseVec) -> (Vec<f64>, Vec<f64>) {
        let first = &self.layers[0];
        let mut pre = first.bias.clone();
        for (i, xi) in x.iter() {
            for (p, w) in pre.iter_mut().zip(first.row(i)) {
                *p += xi * w;
            }
        }
        match self.layers.get(1) {
            None => (Vec::new(), pre),
            Some(out) => {
                let hidden: Vec<f64> = pre.into_iter().map(f64::tanh).collect();
                let mut logits = out.bias.clone();
                for (h, &a) in hidden.iter().enumerate() {
                    for (z, w) in logits.iter_mut().zip(out.row(h)) {
                        *z += a * w;
                    }
                }
                (hidden, logits)
            }
        }
    }
}

pub fn softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|z| (z - max).exp()).collect();
    let sum: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / sum).collect()
}

/// Class probabilities for one input.
pub fn forward(params: &ModelParams, features: &SparseVec) -> Result<Vec<f64>> {
    params.check_input(features)?;
    Ok(softmax(&params.activations(features).1))
}

/// Index of the largest probability; ties go to the lowest index.
pub fn argmax(probs: &[f64]) -> usize {
    let mut best = 0;
    for (i, &p) in probs.iter().enumerate().skip(1) {
        if p > probs[best] {
            best = i;
        }
    }
    best
}

/// Gradient of the mean NLL. The first layer is stored sparsely (only rows
/// touched by the batch); an L2 coefficient adds `l2 * w` to every weight.
#[derive(Debug, Clone)]
pub struct Grads {
    pub first_rows: BTreeMap<usize, Vec<f64>>,
    pub first_bias: Vec<f64>,
    pub output: Option<Layer>,
    pub l2: f64,
}

impl Grads {
    /// Squared norm of the NLL part, ignoring the L2 term.
    fn data_norm_sq(&self) -> f64 {
        let rows: f64 = self.first_rows.values().flatten().map(|g| g * g).sum();
        let bias: f64 = self.first_bias.iter().map(|g| g * g).sum();
        let out: f64 = self
            .output
            .iter()
            .flat_map(|l| l.weights.iter().chain(&l.bias))
            .map(|g| g * g)
            .sum();
        rows + bias + out
    }

    /// Global L2 norm including the L2 term.
    pub fn norm(&self, params: &ModelParams) -> f64 {
        if self.l2 == 0.0 {
            return self.data_norm_sq().sqrt();
        }
        self.flat(params).iter().map(|g| g * g).sum::<f64>().sqrt()
    }

    pub fn scale(&mut self, s: f64) {
        self.first_rows.values_mut().flatten().for_each(|g| *g *= s);
        self.first_bias.iter_mut().for_each(|g| *g *= s);
        if let Some(l) = &mut self.output {
            l.weights.iter_mut().chain(&mut l.bias).for_each(|g| *g *= s);
        }
        self.l2 *= s;
    }

    /// Dense gradient in [`ModelParams::flat`] order.
    pub fn flat(&self, params: &ModelParams) -> Vec<f64> {
        let mut g = ModelParams::zeros(params.input_dim(), params.hidden_size(), params.num_classes());
        let first = &mut g.layers[0];
        for (&r, row) in &self.first_rows {
            first.weights[r * first.cols..(r + 1) * first.cols].copy_from_slice(row);
        }
        first.bias.copy_from_slice(&self.first_bias);
        if let Some(out) = &self.output {
            g.layers[1] = out.clone();
        }
        if self.l2 != 0.0 {
            for (gl, pl) in g.layers.iter_mut().zip(&params.layers) {
                for (gw, w) in gl.weights.iter_mut().zip(&pl.weights) {
                    *gw += self.l2 * w;
                }
            }
        }
        g.flat()
    }
}

/// Mean cross-entropy over `batch` plus `l2/2 * |W|^2` (weights only, not
/// biases), with its analytic gradient.
pub fn loss_and_grad(params: &ModelParams, batch: &[&Example], l2: f64) -> Result<(f64, Grads)> {
    if batch.is_empty() {
        return Err(Error::Empty("batch"));
    }
    let n = batch.len() as f64;
    let first = &params.layers[0];
    let mut grads = Grads {
        first_rows: BTreeMap::new(),
        first_bias: vec![0.0; first.cols],
        output: params.layers.get(1).map(|l| Layer::zeros(l.rows, l.cols)),
        l2,
    };
    let mut loss = 0.0;
    for ex in batch {
        params.check_input(&ex.features)?;
        if ex.label >= params.num_classes() {
            return Err(Error::Shape(format!("label {} out of range", ex.label)));
        }
        let (hidden, logits) = params.activations(&ex.features);
        let mut dz = softmax(&logits);
        loss -= dz[ex.label].max(f64::MIN_POSITIVE).ln();
        dz[ex.label] -= 1.0;
        dz.iter_mut().for_each(|d| *d /= n);

        // delta at the first layer's output
        let delta = match (&params.layers.get(1), &mut grads.output) {
            (Some(out), Some(gout)) => {
                for (h, &a) in hidden.iter().enumerate() {
                    let row = &mut gout.weights[h * gout.cols..(h + 1) * gout.cols];
                    for (g, d) in row.iter_mut().zip(&dz) {
                        *g += a * d;
                    }
                }
                for (g, d) in gout.bias.iter_mut().zip(&dz) {
                    *g += d;
                }
                hidden
                    .iter()
                    .enumerate()
                    .map(|(h, &a)| {
                        let back: f64 = out.row(h).iter().zip(&dz).map(|(w, d)| w * d).sum();
                        back * (1.0 - a * a)
                    })
                    .collect()
            }
            _ => dz,
        };
        for (i, xi) in ex.features.iter() {
            let row = grads
                .first_rows
                .entry(i)
                .or_insert_with(|| vec![0.0; first.cols]);
            for (g, d) in row.iter_mut().zip(&delta) {
                *g += xi * d;
            }
        }
        for (g, d) in grads.first_bias.iter_mut().zip(&delta) {
            *g += d;
        }
    }
    loss /= n;
    if l2 != 0.0 {
        let sq: f64 = params.layers.iter().flat_map(|l| &l.weights).map(|w| w * w).sum();
        loss += 0.5 * l2 * sq;
    }
    Ok((loss, grads))
}

/// SGD with heavy-ball momentum and decoupled weight decay:
/// `v = m v + g`, `w = w - lr v - lr wd w` (biases are not decayed).
#[derive(Debug, Clone)]
pub struct Sgd {
    pub learning_rate: f64,
    pub momentum: f64,
    pub weight_decay: f64,
    velocity: ModelParams,
}

impl Sgd {
    pub fn new(params: &ModelParams, learning_rate: f64, momentum: f64, weight_decay: f64) -> Self {
        Sgd {
            learning_rate,
            momentum,
            weight_decay,
            velocity: ModelParams::zeros(params.input_dim(), params.hidden_size(), params.num_classes()),
        }
    }

    /// Apply one update. The L2 term of `grads` is ignored; decay is decoupled.
    pub fn step(&mut self, params: &mut ModelParams, grads: &Grads) {
        let (lr, m, wd) = (self.learning_rate, self.momentum, self.weight_decay);
        let decay = 1.0 - lr * wd;
        for (li, (pl, vl)) in params.layers.iter_mut().zip(&mut self.velocity.layers).enumerate() {
            let cols = pl.cols;
            vl.weights.iter_mut().for_each(|v| *v *= m);
            vl.bias.iter_mut().for_each(|v| *v *= m);
            if li == 0 {
                for (&r, row) in &grads.first_rows {
                    for (v, g) in vl.weights[r * cols..(r + 1) * cols].iter_mut().zip(row) {
                        *v += g;
                    }
                }
                vl.bias.iter_mut().zip(&grads.first_bias).for_each(|(v, g)| *v += g);
            } else if let Some(out) = &grads.output {
                vl.weights.iter_mut().zip(&out.weights).for_each(|(v, g)| *v += g);
                vl.bias.iter_mut().zip(&out.bias).for_each(|(v, g)| *v += g);
            }
            for (w, v) in pl.weights.iter_mut().zip(&vl.weights) {
                *w = *w * decay - lr * v;
            }
            for (b, v) in pl.bias.iter_mut().zip(&vl.bias) {
                *b -= lr * v;
            }
        }
    }
}

/// Rescale `grads` so its global norm is at most `max_norm`. Returns the
/// norm before clipping.
pub fn clip_grad_norm(grads: &mut Grads, params: &ModelParams, max_norm: f64) -> f64 {
    let norm = grads.norm(params);
    if norm > max_norm {
        grads.scale(max_norm / norm);
    }
    norm
}
