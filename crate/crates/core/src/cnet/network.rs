use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::encode::{encode_input_with, HeightEncoding, InputVector, INPUT_DIM};
use super::ModelError;
use crate::corpus::TrainingSet;
use crate::level::{TileType, NUM_TILE_TYPES};
use crate::scalar::Scalar;

pub const HIDDEN1: usize = 100;
pub const HIDDEN2: usize = 50;
pub const OUTPUT_DIM: usize = NUM_TILE_TYPES;

/// Fully connected layer, weights stored row-major as `outputs × inputs`.
#[derive(Clone, Debug, PartialEq)]
pub struct Dense<T> {
    pub(crate) inputs: usize,
    pub(crate) outputs: usize,
    pub(crate) weights: Vec<T>,
    pub(crate) biases: Vec<T>,
}

impl<T: Scalar> Dense<T> {
    fn zeros(inputs: usize, outputs: usize) -> Self {
        Dense {
            inputs,
            outputs,
            weights: vec![T::zero(); inputs * outputs],
            biases: vec![T::zero(); outputs],
        }
    }

    /// Glorot-uniform weights, zero biases.
    fn random<R: Rng>(inputs: usize, outputs: usize, rng: &mut R) -> Self {
        let limit = (6.0 / (inputs + outputs) as f64).sqrt();
        let weights = (0..inputs * outputs)
            .map(|_| T::from_f64_lossy(rng.gen_range(-limit..limit)))
            .collect();
        Dense {
            inputs,
            outputs,
            weights,
            biases: vec![T::zero(); outputs],
        }
    }

    pub fn inputs(&self) -> usize {
        self.inputs
    }

    pub fn outputs(&self) -> usize {
        self.outputs
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    pub fn biases(&self) -> &[T] {
        &self.biases
    }

    fn param_count(&self) -> usize {
        self.weights.len() + self.biases.len()
    }

    fn param_mut(&mut self, i: usize) -> &mut T {
        if i < self.weights.len() {
            &mut self.weights[i]
        } else {
            &mut self.biases[i - self.weights.len()]
        }
    }

    fn forward_dense(&self, x: &[T], out: &mut [T]) {
        for (o, z) in out.iter_mut().enumerate() {
            let row = &self.weights[o * self.inputs..(o + 1) * self.inputs];
            *z = self.biases[o] + row.iter().zip(x).map(|(&w, &v)| w * v).sum::<T>();
        }
    }

    fn forward_sparse(&self, x: &[(usize, T)], out: &mut [T]) {
        for (o, z) in out.iter_mut().enumerate() {
            let base = o * self.inputs;
            let mut acc = self.biases[o];
            for &(j, v) in x {
                acc = acc + self.weights[base + j] * v;
            }
            *z = acc;
        }
    }
}

/// Shape and seeding of a fresh network.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CNetConfig {
    pub hidden: (usize, usize),
    pub height_encoding: HeightEncoding,
    pub seed: u64,
}

impl Default for CNetConfig {
    fn default() -> Self {
        CNetConfig {
            hidden: (HIDDEN1, HIDDEN2),
            height_encoding: HeightEncoding::Normalized,
            seed: 0,
        }
    }
}

/// Cached activations of one forward pass.
#[derive(Clone, Debug)]
pub(crate) struct Trace<T> {
    active: Vec<(usize, T)>,
    h1: Vec<T>,
    h2: Vec<T>,
    pub(crate) probs: Vec<T>,
    log_sum_exp: T,
    logits: Vec<T>,
}

/// Per-layer error signals (gradient w.r.t. pre-activations).
struct Deltas<T> {
    d1: Vec<T>,
    d2: Vec<T>,
    d3: Vec<T>,
}

/// Gradient of the cross-entropy loss, same layout as the network parameters.
#[derive(Clone, Debug, PartialEq)]
pub struct Gradients<T> {
    pub layers: [Dense<T>; 3],
}

impl<T: Scalar> Gradients<T> {
    pub fn param_count(&self) -> usize {
        self.layers.iter().map(Dense::param_count).sum()
    }

    /// Flattened parameter `i`, in the order used by [`CNet::param`].
    pub fn get(&self, i: usize) -> T {
        flat_get(&self.layers, i)
    }

    pub fn get_mut(&mut self, i: usize) -> &mut T {
        flat_get_mut(&mut self.layers, i)
    }
}

fn flat_locate<T: Scalar>(layers: &[Dense<T>; 3], mut i: usize) -> (usize, usize) {
    for (l, layer) in layers.iter().enumerate() {
        if i < layer.param_count() {
            return (l, i);
        }
        i -= layer.param_count();
    }
    panic!("parameter index out of range");
}

fn flat_get<T: Scalar>(layers: &[Dense<T>; 3], i: usize) -> T {
    let (l, k) = flat_locate(layers, i);
    let layer = &layers[l];
    if k < layer.weights.len() {
        layer.weights[k]
    } else {
        layer.biases[k - layer.weights.len()]
    }
}

fn flat_get_mut<T: Scalar>(layers: &mut [Dense<T>; 3], i: usize) -> &mut T {
    let (l, k) = flat_locate(layers, i);
    layers[l].param_mut(k)
}

/// Constraint network: 97 → 100 → 50 → 11 with tanh hidden units and a
/// softmax head, trained with cross-entropy.
#[derive(Clone, Debug, PartialEq)]
pub struct CNet<T> {
    pub(crate) layers: [Dense<T>; 3],
    pub(crate) height_encoding: HeightEncoding,
    pub(crate) seed: u64,
}

impl<T: Scalar> CNet<T> {
    pub fn new(config: CNetConfig) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let (a, b) = config.hidden;
        CNet {
            layers: [
                Dense::random(INPUT_DIM, a, &mut rng),
                Dense::random(a, b, &mut rng),
                Dense::random(b, OUTPUT_DIM, &mut rng),
            ],
            height_encoding: config.height_encoding,
            seed: config.seed,
        }
    }

    /// Network with every weight and bias set to zero.
    pub fn zeros(config: CNetConfig) -> Self {
        let (a, b) = config.hidden;
        CNet {
            layers: [
                Dense::zeros(INPUT_DIM, a),
                Dense::zeros(a, b),
                Dense::zeros(b, OUTPUT_DIM),
            ],
            height_encoding: config.height_encoding,
            seed: config.seed,
        }
    }

    pub(crate) fn from_layers(layers: [Dense<T>; 3], height_encoding: HeightEncoding, seed: u64) -> Self {
        CNet {
            layers,
            height_encoding,
            seed,
        }
    }

    pub fn layers(&self) -> &[Dense<T>; 3] {
        &self.layers
    }

    pub fn height_encoding(&self) -> HeightEncoding {
        self.height_encoding
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn param_count(&self) -> usize {
        self.layers.iter().map(Dense::param_count).sum()
    }

    /// Flattened parameter `i`: layer by layer, weights then biases.
    pub fn param(&self, i: usize) -> T {
        flat_get(&self.layers, i)
    }

    pub fn param_mut(&mut self, i: usize) -> &mut T {
        flat_get_mut(&mut self.layers, i)
    }

    /// Layer index and offset within the layer of flattened parameter `i`.
    pub fn locate_param(&self, i: usize) -> (usize, usize) {
        flat_locate(&self.layers, i)
    }

    pub(crate) fn trace(&self, x: &[T]) -> Trace<T> {
        let active: Vec<(usize, T)> = x
            .iter()
            .enumerate()
            .filter(|(_, v)| !v.is_zero())
            .map(|(j, &v)| (j, v))
            .collect();
        self.trace_sparse(active)
    }

    fn trace_sparse(&self, active: Vec<(usize, T)>) -> Trace<T> {
        let [l1, l2, l3] = &self.layers;
        let mut h1 = vec![T::zero(); l1.outputs];
        l1.forward_sparse(&active, &mut h1);
        h1.iter_mut().for_each(|v| *v = v.tanh());
        let mut h2 = vec![T::zero(); l2.outputs];
        l2.forward_dense(&h1, &mut h2);
        h2.iter_mut().for_each(|v| *v = v.tanh());
        let mut logits = vec![T::zero(); l3.outputs];
        l3.forward_dense(&h2, &mut logits);

        let max = logits.iter().copied().fold(T::neg_infinity(), T::max);
        let exps: Vec<T> = logits.iter().map(|&z| (z - max).exp()).collect();
        let sum: T = exps.iter().copied().sum();
        let probs = exps.iter().map(|&e| e / sum).collect();
        Trace {
            active,
            h1,
            h2,
            probs,
            log_sum_exp: max + sum.ln(),
            logits,
        }
    }

    /// Probability of each of the 11 tile types.
    pub fn forward(&self, x: &InputVector<T>) -> [T; OUTPUT_DIM] {
        let trace = self.trace(x.as_slice());
        let mut out = [T::zero(); OUTPUT_DIM];
        out.copy_from_slice(&trace.probs);
        out
    }

    /// Cross-entropy loss `-ln P(label)`.
    pub fn loss(&self, x: &InputVector<T>, label: TileType) -> T {
        let trace = self.trace(x.as_slice());
        trace.log_sum_exp - trace.logits[label.index()]
    }

    fn deltas(&self, trace: &Trace<T>, label: TileType) -> Deltas<T> {
        let [_, l2, l3] = &self.layers;
        let mut d3 = trace.probs.clone();
        d3[label.index()] = d3[label.index()] - T::one();

        let mut d2 = vec![T::zero(); l3.inputs];
        for (o, &d) in d3.iter().enumerate() {
            let row = &l3.weights[o * l3.inputs..(o + 1) * l3.inputs];
            for (acc, &w) in d2.iter_mut().zip(row) {
                *acc = *acc + w * d;
            }
        }
        for (acc, &h) in d2.iter_mut().zip(&trace.h2) {
            *acc = *acc * (T::one() - h * h);
        }

        let mut d1 = vec![T::zero(); l2.inputs];
        for (o, &d) in d2.iter().enumerate() {
            let row = &l2.weights[o * l2.inputs..(o + 1) * l2.inputs];
            for (acc, &w) in d1.iter_mut().zip(row) {
                *acc = *acc + w * d;
            }
        }
        for (acc, &h) in d1.iter_mut().zip(&trace.h1) {
            *acc = *acc * (T::one() - h * h);
        }
        Deltas { d1, d2, d3 }
    }

    /// Analytic gradient of the loss for one example.
    pub fn gradients(&self, x: &InputVector<T>, label: TileType) -> Gradients<T> {
        let trace = self.trace(x.as_slice());
        let deltas = self.deltas(&trace, label);
        let [l1, l2, l3] = &self.layers;
        let mut g = Gradients {
            layers: [
                Dense::zeros(l1.inputs, l1.outputs),
                Dense::zeros(l2.inputs, l2.outputs),
                Dense::zeros(l3.inputs, l3.outputs),
            ],
        };
        for (o, &d) in deltas.d1.iter().enumerate() {
            for &(j, v) in &trace.active {
                g.layers[0].weights[o * l1.inputs + j] = d * v;
            }
            g.layers[0].biases[o] = d;
        }
        outer_into(&deltas.d2, &trace.h1, &mut g.layers[1]);
        outer_into(&deltas.d3, &trace.h2, &mut g.layers[2]);
        g
    }

    /// One plain SGD step on a sparse input; returns the loss before the step
    /// and whether the argmax matched `label`.
    fn sgd_step(&mut self, active: &[(usize, T)], label: TileType, lr: T) -> (T, bool) {
        let trace = self.trace_sparse(active.to_vec());
        let loss = trace.log_sum_exp - trace.logits[label.index()];
        let hit = argmax(&trace.probs) == label.index();
        let deltas = self.deltas(&trace, label);

        let [l1, l2, l3] = &mut self.layers;
        apply_outer(l3, &deltas.d3, &trace.h2, lr);
        apply_outer(l2, &deltas.d2, &trace.h1, lr);
        for (o, &d) in deltas.d1.iter().enumerate() {
            let base = o * l1.inputs;
            for &(j, v) in &trace.active {
                l1.weights[base + j] = l1.weights[base + j] - lr * d * v;
            }
            l1.biases[o] = l1.biases[o] - lr * d;
        }
        (loss, hit)
    }

    /// Encoded input for a surrounding using this network's height encoding.
    pub fn encode(&self, s: &crate::level::SurroundingInfo, level_height: usize) -> InputVector<T> {
        encode_input_with(s, level_height, self.height_encoding)
    }

    /// Trains with batch size 1 and a constant learning rate; the sample
    /// order is reshuffled every epoch.
    pub fn train(&mut self, ts: &TrainingSet, options: &TrainOptions) -> Result<TrainingReport, ModelError> {
        if options.epochs == 0 {
            return Err(ModelError::InvalidEpochs);
        }
        if !(options.learning_rate.is_finite() && options.learning_rate > 0.0) {
            return Err(ModelError::InvalidLearningRate(options.learning_rate));
        }
        if ts.is_empty() {
            return Err(ModelError::EmptyTrainingSet);
        }
        let lr = T::from_f64_lossy(options.learning_rate);
        let level_height = ts.level_height();
        let samples: Vec<(Vec<(usize, T)>, TileType)> = ts
            .samples()
            .iter()
            .map(|c| {
                let x = self.encode(&c.surrounding(), level_height);
                let active = x
                    .as_slice()
                    .iter()
                    .enumerate()
                    .filter(|(_, v)| !v.is_zero())
                    .map(|(j, &v)| (j, v))
                    .collect();
                (active, c.center())
            })
            .collect();

        let mut rng = ChaCha8Rng::seed_from_u64(options.seed);
        let mut order: Vec<usize> = (0..samples.len()).collect();
        let mut epochs = Vec::with_capacity(options.epochs);
        for epoch in 1..=options.epochs {
            order.shuffle(&mut rng);
            let mut total = 0.0;
            let mut hits = 0usize;
            for &i in &order {
                let (active, label) = &samples[i];
                let (loss, hit) = self.sgd_step(active, *label, lr);
                let loss = loss.to_f64_lossy();
                if !loss.is_finite() {
                    return Err(ModelError::NonFiniteLoss { epoch });
                }
                total += loss;
                hits += hit as usize;
            }
            epochs.push(EpochStats {
                epoch,
                mean_loss: total / samples.len() as f64,
                train_accuracy: hits as f64 / samples.len() as f64,
            });
        }
        let final_accuracy = self.accuracy(ts);
        Ok(TrainingReport { epochs, final_accuracy })
    }

    /// Fraction of training samples whose argmax is the sample's center.
    pub fn accuracy(&self, ts: &TrainingSet) -> f64 {
        let hits = ts
            .samples()
            .iter()
            .filter(|c| {
                let p = self.forward(&self.encode(&c.surrounding(), ts.level_height()));
                argmax(&p) == c.center().index()
            })
            .count();
        hits as f64 / ts.len().max(1) as f64
    }
}

fn outer_into<T: Scalar>(delta: &[T], input: &[T], out: &mut Dense<T>) {
    for (o, &d) in delta.iter().enumerate() {
        let row = &mut out.weights[o * out.inputs..(o + 1) * out.inputs];
        for (g, &v) in row.iter_mut().zip(input) {
            *g = d * v;
        }
        out.biases[o] = d;
    }
}

fn apply_outer<T: Scalar>(layer: &mut Dense<T>, delta: &[T], input: &[T], lr: T) {
    for (o, &d) in delta.iter().enumerate() {
        let step = lr * d;
        let row = &mut layer.weights[o * layer.inputs..(o + 1) * layer.inputs];
        for (w, &v) in row.iter_mut().zip(input) {
            *w = *w - step * v;
        }
        layer.biases[o] = layer.biases[o] - step;
    }
}

pub(crate) fn argmax<T: Scalar>(p: &[T]) -> usize {
    let mut best = 0;
    for (i, &v) in p.iter().enumerate() {
        if v > p[best] {
            best = i;
        }
    }
    best
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TrainOptions {
    pub epochs: usize,
    pub learning_rate: f64,
    /// Seeds the per-epoch shuffle.
    pub seed: u64,
}

impl Default for TrainOptions {
    fn default() -> Self {
        TrainOptions {
            epochs: 4000,
            learning_rate: 0.01,
            seed: 0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpochStats {
    pub epoch: usize,
    pub mean_loss: f64,
    /// Online accuracy over the epoch, measured before each update.
    pub train_accuracy: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrainingReport {
    pub epochs: Vec<EpochStats>,
    /// Accuracy of the trained network over the whole training set.
    pub final_accuracy: f64,
}

impl TrainingReport {
    /// CSV with header `epoch,mean_loss,train_accuracy`.
    pub fn write_csv<W: std::io::Write>(&self, writer: W) -> Result<(), csv::Error> {
        let mut w = csv::Writer::from_writer(writer);
        for e in &self.epochs {
            w.serialize(e)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv<R: std::io::Read>(reader: R) -> Result<Vec<EpochStats>, csv::Error> {
        csv::Reader::from_reader(reader).deserialize().collect()
    }
}
