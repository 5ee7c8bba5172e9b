//! Multi-headed fully connected network with analytic backpropagation.
//!
//! A shared trunk feeds three heads: a policy head per player (normalized
//! exponential over that player's actions) and a distributional value head
//! over discrete value bins, read out as the expectation of the bin centers.
//! Value targets are Gaussian-smoothed histograms ([`hl_gauss_target`]), so
//! the value head trains with the same cross-entropy machinery as the policy
//! heads.
//!
//! Everything is plain dense math in either `f64` (default; makes the
//! finite-difference gradient checks meaningful) or `f32` via the [`Real`]
//! parameter. Checkpoints always store 64-bit floats.

mod checkpoint;
mod hl_gauss;
mod optimizer;

pub use crate::linalg::Real;
pub use checkpoint::CheckpointError;
pub use hl_gauss::hl_gauss_target;
pub use optimizer::{Optimizer, OptimizerKind};

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::game::Game;
use crate::linalg::Mat;
use crate::matgame::MixedStrategy;
use crate::mcts::{Oracle, OracleEval};

/// Cross-entropy log floor; saturated outputs cost a large, finite penalty.
pub const LOG_FLOOR: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum NetError {
    #[error("input length {got} does not match the network input width {expected}")]
    ShapeMismatch { expected: usize, got: usize },
    #[error("training batch is empty")]
    EmptyBatch,
    #[error("target length {got} does not match head width {expected}")]
    TargetMismatch { expected: usize, got: usize },
}

/// Discretization of the value range into bins with a Gaussian smoothing
/// width.
///
/// `[v_min, v_max]` is the range targets are clamped to; the bins themselves
/// span three smoothing widths beyond it on each side. Without that padding
/// the renormalized target near a range boundary loses its outer tail and its
/// expectation is biased inward by more than half a bin, which would break
/// the value readout exactly where episodes end decisively.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValueBinning {
    pub v_min: f64,
    pub v_max: f64,
    pub bins: usize,
    pub sigma: f64,
}

impl ValueBinning {
    /// Symmetric binning over `[-scale, scale]` with the conventional
    /// smoothing width of 0.75 bin widths (the bin width solves the padding
    /// relation `width · bins = 2·scale + 4.5·width`).
    pub fn symmetric(scale: f64, bins: usize) -> Self {
        assert!(bins >= 6, "symmetric binning needs at least 6 bins");
        let width = 2.0 * scale / (bins as f64 - 4.5);
        Self {
            v_min: -scale,
            v_max: scale,
            bins,
            sigma: 0.75 * width,
        }
    }

    pub fn validate(&self) -> Result<(), String> {
        if !(self.v_min < self.v_max) {
            return Err(format!(
                "value binning needs v_min < v_max, got [{}, {}]",
                self.v_min, self.v_max
            ));
        }
        if self.bins < 2 {
            return Err(format!("value binning needs at least 2 bins, got {}", self.bins));
        }
        if !(self.sigma > 0.0) {
            return Err(format!("value binning sigma must be positive, got {}", self.sigma));
        }
        Ok(())
    }

    /// The padded range the bins actually cover.
    pub fn support(&self) -> (f64, f64) {
        (self.v_min - 3.0 * self.sigma, self.v_max + 3.0 * self.sigma)
    }

    pub fn bin_width(&self) -> f64 {
        let (lo, hi) = self.support();
        (hi - lo) / self.bins as f64
    }

    pub fn center(&self, bin: usize) -> f64 {
        self.support().0 + (bin as f64 + 0.5) * self.bin_width()
    }

    /// Bin edges, `bins + 1` of them.
    pub fn edges(&self) -> Vec<f64> {
        let (lo, _) = self.support();
        (0..=self.bins)
            .map(|b| lo + b as f64 * self.bin_width())
            .collect()
    }

    pub fn expectation(&self, dist: &[f64]) -> f64 {
        dist.iter()
            .enumerate()
            .map(|(b, p)| p * self.center(b))
            .sum()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetConfig {
    pub input_dim: usize,
    pub trunk_widths: Vec<usize>,
    pub head_hidden: Vec<usize>,
    pub actions1: usize,
    pub actions2: usize,
    pub binning: ValueBinning,
}

impl NetConfig {
    pub fn new(input_dim: usize, actions1: usize, actions2: usize, binning: ValueBinning) -> Self {
        Self {
            input_dim,
            trunk_widths: vec![64, 64],
            head_hidden: vec![64],
            actions1,
            actions2,
            binning,
        }
    }

    pub fn validate(&self) -> Result<(), String> {
        if self.input_dim == 0 {
            return Err("net.input_dim must be positive".into());
        }
        if self.trunk_widths.is_empty() || self.trunk_widths.iter().any(|w| *w == 0) {
            return Err("net.trunk_widths must be nonempty positive widths".into());
        }
        if self.head_hidden.iter().any(|w| *w == 0) {
            return Err("net.head_hidden widths must be positive".into());
        }
        if self.actions1 == 0 || self.actions2 == 0 {
            return Err("net action head widths must be positive".into());
        }
        self.binning.validate()
    }

    fn trunk_out(&self) -> usize {
        *self.trunk_widths.last().expect("validated trunk")
    }

    /// Layer sizes of one head: hidden widths then the output width.
    fn head_sizes(&self, out: usize) -> Vec<(usize, usize)> {
        let mut sizes = Vec::new();
        let mut prev = self.trunk_out();
        for w in &self.head_hidden {
            sizes.push((prev, *w));
            prev = *w;
        }
        sizes.push((prev, out));
        sizes
    }

    fn trunk_sizes(&self) -> Vec<(usize, usize)> {
        let mut sizes = Vec::new();
        let mut prev = self.input_dim;
        for w in &self.trunk_widths {
            sizes.push((prev, *w));
            prev = *w;
        }
        sizes
    }
}

/// One fully connected layer.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseLayer<T> {
    pub w: Mat<T>,
    pub b: Vec<T>,
}

impl<T: Real> DenseLayer<T> {
    fn zeros(inputs: usize, outputs: usize) -> Self {
        Self {
            w: Mat::zeros(outputs, inputs),
            b: vec![T::zero(); outputs],
        }
    }
}

/// All parameter arrays of the network, grouped by role. Gradients reuse the
/// same structure.
#[derive(Debug, Clone, PartialEq)]
pub struct Params<T> {
    pub trunk: Vec<DenseLayer<T>>,
    pub policy1: Vec<DenseLayer<T>>,
    pub policy2: Vec<DenseLayer<T>>,
    pub value: Vec<DenseLayer<T>>,
}

/// Role/kind tag per parameter array in the checkpoint manifest.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ArraySpec {
    pub tag: u8,
    pub rows: u32,
    pub cols: u32,
}

const SEGMENT_TAGS: [u8; 4] = [0x10, 0x20, 0x30, 0x40];
const BIAS_BIT: u8 = 0x01;

impl<T: Real> Params<T> {
    fn zeros(cfg: &NetConfig) -> Self {
        let build = |sizes: Vec<(usize, usize)>| -> Vec<DenseLayer<T>> {
            sizes
                .into_iter()
                .map(|(i, o)| DenseLayer::zeros(i, o))
                .collect()
        };
        Self {
            trunk: build(cfg.trunk_sizes()),
            policy1: build(cfg.head_sizes(cfg.actions1)),
            policy2: build(cfg.head_sizes(cfg.actions2)),
            value: build(cfg.head_sizes(cfg.binning.bins)),
        }
    }

    pub fn zeros_like(&self) -> Self {
        let z = |layers: &Vec<DenseLayer<T>>| {
            layers
                .iter()
                .map(|l| DenseLayer::zeros(l.w.cols(), l.w.rows()))
                .collect()
        };
        Self {
            trunk: z(&self.trunk),
            policy1: z(&self.policy1),
            policy2: z(&self.policy2),
            value: z(&self.value),
        }
    }

    /// Parameter arrays in manifest order (per segment, weight then bias).
    pub fn arrays(&self) -> Vec<&[T]> {
        let mut out = Vec::new();
        for seg in [&self.trunk, &self.policy1, &self.policy2, &self.value] {
            for layer in seg {
                out.push(layer.w.data());
                out.push(layer.b.as_slice());
            }
        }
        out
    }

    pub fn arrays_mut(&mut self) -> Vec<&mut [T]> {
        let Params {
            trunk,
            policy1,
            policy2,
            value,
        } = self;
        let mut out: Vec<&mut [T]> = Vec::new();
        for seg in [trunk, policy1, policy2, value] {
            for layer in seg.iter_mut() {
                out.push(layer.w.data_mut());
                out.push(layer.b.as_mut_slice());
            }
        }
        out
    }

    /// Manifest describing every array (role tag and shape).
    pub fn specs(&self) -> Vec<ArraySpec> {
        let mut out = Vec::new();
        for (seg, tag) in [&self.trunk, &self.policy1, &self.policy2, &self.value]
            .iter()
            .zip(SEGMENT_TAGS)
        {
            for layer in seg.iter() {
                out.push(ArraySpec {
                    tag,
                    rows: layer.w.rows() as u32,
                    cols: layer.w.cols() as u32,
                });
                out.push(ArraySpec {
                    tag: tag | BIAS_BIT,
                    rows: layer.b.len() as u32,
                    cols: 1,
                });
            }
        }
        out
    }

    pub fn coord_count(&self) -> usize {
        self.arrays().iter().map(|a| a.len()).sum()
    }

    pub fn get_coord(&self, index: usize) -> f64 {
        let mut idx = index;
        for a in self.arrays() {
            if idx < a.len() {
                return a[idx].as_f64();
            }
            idx -= a.len();
        }
        panic!("coordinate {index} out of range");
    }

    pub fn set_coord(&mut self, index: usize, value: f64) {
        let mut idx = index;
        for a in self.arrays_mut() {
            if idx < a.len() {
                a[idx] = T::from_f64(value);
                return;
            }
            idx -= a.len();
        }
        panic!("coordinate {index} out of range");
    }

    /// Sum of squared parameters (the weight-decay term before scaling).
    pub fn squared_norm(&self) -> f64 {
        self.arrays()
            .iter()
            .flat_map(|a| a.iter())
            .map(|v| {
                let x = v.as_f64();
                x * x
            })
            .sum()
    }
}

/// One training example: encoded state, per-player policy targets, and the
/// discounted return for player 1.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainSample {
    pub input: Vec<f64>,
    pub policy1: Vec<f64>,
    pub policy2: Vec<f64>,
    pub value: f64,
}

/// Forward outputs at one state.
#[derive(Debug, Clone)]
pub struct ForwardOut {
    pub p1: MixedStrategy,
    pub p2: MixedStrategy,
    pub value_dist: Vec<f64>,
    /// Expectation of the value distribution over bin centers.
    pub value: f64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct LossBreakdown {
    pub total: f64,
    pub policy: f64,
    pub value: f64,
    pub reg: f64,
}

/// The network: configuration plus parameters.
#[derive(Debug, Clone)]
pub struct Network<T: Real> {
    cfg: NetConfig,
    pub params: Params<T>,
}

impl<T: Real> Network<T> {
    /// He-initialized trunk and hidden layers; the final layer of every head
    /// starts at zero so the initial policies are uniform and the initial
    /// value sits at the middle of the bin range.
    pub fn new(cfg: NetConfig, seed: u64) -> Self {
        let mut rng = crate::rng::substream(seed, "net-init");
        let mut params = Params::zeros(&cfg);
        let mut init_all = |layers: &mut Vec<DenseLayer<T>>, skip_last: bool| {
            let count = layers.len();
            for (i, layer) in layers.iter_mut().enumerate() {
                if skip_last && i + 1 == count {
                    continue;
                }
                let fan_in = layer.w.cols() as f64;
                let std = (2.0 / fan_in).sqrt();
                let normal = Normal::new(0.0, std).expect("positive std");
                for w in layer.w.data_mut() {
                    *w = T::from_f64(normal.sample(&mut rng));
                }
            }
        };
        init_all(&mut params.trunk, false);
        init_all(&mut params.policy1, true);
        init_all(&mut params.policy2, true);
        init_all(&mut params.value, true);
        Self { cfg, params }
    }

    pub fn config(&self) -> &NetConfig {
        &self.cfg
    }

    pub fn forward(&self, input: &[f64]) -> Result<ForwardOut, NetError> {
        if input.len() != self.cfg.input_dim {
            return Err(NetError::ShapeMismatch {
                expected: self.cfg.input_dim,
                got: input.len(),
            });
        }
        let x: Vec<T> = input.iter().map(|v| T::from_f64(*v)).collect();
        let cache = self.forward_cache(&x);
        // Renormalize in f64 so lower-precision rounding cannot leak
        // out-of-tolerance distributions.
        let to_dist = |v: &[T]| -> Vec<f64> {
            let raw: Vec<f64> = v.iter().map(|p| p.as_f64()).collect();
            let sum: f64 = raw.iter().sum();
            raw.into_iter().map(|p| p / sum).collect()
        };
        let value_dist = to_dist(&cache.value.probs);
        let value = self.cfg.binning.expectation(&value_dist);
        Ok(ForwardOut {
            p1: MixedStrategy::from_normalized(to_dist(&cache.policy1.probs)),
            p2: MixedStrategy::from_normalized(to_dist(&cache.policy2.probs)),
            value_dist,
            value,
        })
    }

    fn forward_cache(&self, x: &[T]) -> Cache<T> {
        let (trunk_inputs, trunk_zs, trunk_out) = run_relu_stack(&self.params.trunk, x);
        let policy1 = run_head(&self.params.policy1, &trunk_out);
        let policy2 = run_head(&self.params.policy2, &trunk_out);
        let value = run_head(&self.params.value, &trunk_out);
        Cache {
            trunk_inputs,
            trunk_zs,
            trunk_out,
            policy1,
            policy2,
            value,
        }
    }

    /// Loss of a batch: mean cross-entropy of the value head against the
    /// smoothed value targets, plus mean policy cross-entropies for both
    /// players, plus `λ‖θ‖²`.
    pub fn loss(&self, batch: &[TrainSample], weight_decay: f64) -> Result<LossBreakdown, NetError> {
        self.loss_impl(batch, weight_decay, None)
    }

    /// Loss and analytic gradients; the gradient set mirrors the parameter
    /// structure exactly.
    pub fn loss_grads(
        &self,
        batch: &[TrainSample],
        weight_decay: f64,
    ) -> Result<(LossBreakdown, Params<T>), NetError> {
        let mut grads = self.params.zeros_like();
        let breakdown = self.loss_impl(batch, weight_decay, Some(&mut grads))?;
        Ok((breakdown, grads))
    }

    fn loss_impl(
        &self,
        batch: &[TrainSample],
        weight_decay: f64,
        mut grads: Option<&mut Params<T>>,
    ) -> Result<LossBreakdown, NetError> {
        if batch.is_empty() {
            return Err(NetError::EmptyBatch);
        }
        for sample in batch {
            if sample.input.len() != self.cfg.input_dim {
                return Err(NetError::ShapeMismatch {
                    expected: self.cfg.input_dim,
                    got: sample.input.len(),
                });
            }
            if sample.policy1.len() != self.cfg.actions1 {
                return Err(NetError::TargetMismatch {
                    expected: self.cfg.actions1,
                    got: sample.policy1.len(),
                });
            }
            if sample.policy2.len() != self.cfg.actions2 {
                return Err(NetError::TargetMismatch {
                    expected: self.cfg.actions2,
                    got: sample.policy2.len(),
                });
            }
        }

        let inv_b = 1.0 / batch.len() as f64;
        let mut policy_loss = 0.0;
        let mut value_loss = 0.0;

        for sample in batch {
            let x: Vec<T> = sample.input.iter().map(|v| T::from_f64(*v)).collect();
            let cache = self.forward_cache(&x);
            let value_target = hl_gauss_target(sample.value, &self.cfg.binning);

            policy_loss += cross_entropy(&cache.policy1.probs, &sample.policy1)
                + cross_entropy(&cache.policy2.probs, &sample.policy2);
            value_loss += cross_entropy(&cache.value.probs, &value_target);

            if let Some(g) = grads.as_deref_mut() {
                self.backward(&cache, sample, &value_target, inv_b, g);
            }
        }

        policy_loss *= inv_b;
        value_loss *= inv_b;
        let reg = weight_decay * self.params.squared_norm();

        if let Some(g) = grads.as_deref_mut() {
            // d(λ‖θ‖²)/dθ = 2λθ.
            let two_lambda = T::from_f64(2.0 * weight_decay);
            for (garr, parr) in g.arrays_mut().into_iter().zip(self.params.arrays()) {
                for (gv, pv) in garr.iter_mut().zip(parr) {
                    *gv += two_lambda * *pv;
                }
            }
        }

        Ok(LossBreakdown {
            total: policy_loss + value_loss + reg,
            policy: policy_loss,
            value: value_loss,
            reg,
        })
    }

    fn backward(
        &self,
        cache: &Cache<T>,
        sample: &TrainSample,
        value_target: &[f64],
        scale: f64,
        grads: &mut Params<T>,
    ) {
        let mut trunk_grad = vec![T::zero(); cache.trunk_out.len()];
        for (head_params, head_cache, target, head_grads) in [
            (
                &self.params.policy1,
                &cache.policy1,
                sample.policy1.as_slice(),
                &mut grads.policy1,
            ),
            (
                &self.params.policy2,
                &cache.policy2,
                sample.policy2.as_slice(),
                &mut grads.policy2,
            ),
            (
                &self.params.value,
                &cache.value,
                value_target,
                &mut grads.value,
            ),
        ] {
            let dlogits = softmax_ce_dlogits(&head_cache.probs, target, scale);
            let din = backward_stack(
                head_params,
                &head_cache.inputs,
                &head_cache.zs,
                dlogits,
                true,
                head_grads,
            );
            for (t, d) in trunk_grad.iter_mut().zip(&din) {
                *t += *d;
            }
        }
        backward_stack(
            &self.params.trunk,
            &cache.trunk_inputs,
            &cache.trunk_zs,
            trunk_grad,
            false,
            &mut grads.trunk,
        );
    }
}

struct HeadCache<T> {
    inputs: Vec<Vec<T>>,
    zs: Vec<Vec<T>>,
    probs: Vec<T>,
}

struct Cache<T> {
    trunk_inputs: Vec<Vec<T>>,
    trunk_zs: Vec<Vec<T>>,
    trunk_out: Vec<T>,
    policy1: HeadCache<T>,
    policy2: HeadCache<T>,
    value: HeadCache<T>,
}

/// Applies a stack of layers with ReLU after each; returns per-layer inputs,
/// pre-activations, and the final output.
fn run_relu_stack<T: Real>(
    layers: &[DenseLayer<T>],
    input: &[T],
) -> (Vec<Vec<T>>, Vec<Vec<T>>, Vec<T>) {
    let mut inputs = Vec::with_capacity(layers.len());
    let mut zs = Vec::with_capacity(layers.len());
    let mut h = input.to_vec();
    for layer in layers {
        inputs.push(h.clone());
        let mut z = layer.b.clone();
        let mut tmp = vec![T::zero(); layer.w.rows()];
        layer.w.matvec(&h, &mut tmp);
        for (zi, ti) in z.iter_mut().zip(&tmp) {
            *zi += *ti;
        }
        zs.push(z.clone());
        h = z.into_iter().map(relu).collect();
    }
    (inputs, zs, h)
}

/// Hidden layers with ReLU, final layer linear, normalized exponential on
/// the logits.
fn run_head<T: Real>(layers: &[DenseLayer<T>], input: &[T]) -> HeadCache<T> {
    let (hidden, last) = layers.split_at(layers.len() - 1);
    let (mut inputs, mut zs, h) = run_relu_stack(hidden, input);
    let layer = &last[0];
    inputs.push(h.clone());
    let mut z = layer.b.clone();
    let mut tmp = vec![T::zero(); layer.w.rows()];
    layer.w.matvec(&h, &mut tmp);
    for (zi, ti) in z.iter_mut().zip(&tmp) {
        *zi += *ti;
    }
    zs.push(z.clone());
    let probs = softmax(&z);
    HeadCache { inputs, zs, probs }
}

fn relu<T: Real>(z: T) -> T {
    if z > T::zero() {
        z
    } else {
        T::zero()
    }
}

/// Max-subtracted normalized exponential; finite for any finite logits.
fn softmax<T: Real>(z: &[T]) -> Vec<T> {
    let max = z.iter().copied().fold(T::neg_infinity(), T::max);
    let exps: Vec<T> = z.iter().map(|v| (*v - max).exp()).collect();
    let sum = exps.iter().copied().fold(T::zero(), |a, b| a + b);
    exps.into_iter().map(|e| e / sum).collect()
}

fn cross_entropy<T: Real>(probs: &[T], target: &[f64]) -> f64 {
    probs
        .iter()
        .zip(target)
        .map(|(p, t)| -t * p.as_f64().max(LOG_FLOOR).ln())
        .sum()
}

/// Gradient of the floored cross-entropy with respect to the logits,
/// through the softmax Jacobian. Without flooring this reduces to
/// `scale · (p - target)`.
fn softmax_ce_dlogits<T: Real>(probs: &[T], target: &[f64], scale: f64) -> Vec<T> {
    let g: Vec<f64> = probs
        .iter()
        .zip(target)
        .map(|(p, t)| {
            let pf = p.as_f64();
            if pf > LOG_FLOOR {
                -t / pf
            } else {
                0.0
            }
        })
        .collect();
    let dot: f64 = g
        .iter()
        .zip(probs)
        .map(|(gi, p)| gi * p.as_f64())
        .sum();
    probs
        .iter()
        .zip(&g)
        .map(|(p, gi)| T::from_f64(scale * p.as_f64() * (gi - dot)))
        .collect()
}

/// Backpropagates a stack produced by [`run_relu_stack`]/[`run_head`].
/// `delta` is the gradient at the final layer's pre-activation. Returns the
/// gradient with respect to the stack input.
fn backward_stack<T: Real>(
    layers: &[DenseLayer<T>],
    inputs: &[Vec<T>],
    zs: &[Vec<T>],
    delta: Vec<T>,
    last_is_linear: bool,
    grads: &mut [DenseLayer<T>],
) -> Vec<T> {
    let mut delta = delta;
    for (idx, layer) in layers.iter().enumerate().rev() {
        let is_last = idx + 1 == layers.len();
        if !(is_last && last_is_linear) {
            // ReLU derivative; the subgradient at exactly zero is zero.
            for (d, z) in delta.iter_mut().zip(&zs[idx]) {
                if *z <= T::zero() {
                    *d = T::zero();
                }
            }
        }
        grads[idx].w.add_outer(&delta, &inputs[idx]);
        for (gb, d) in grads[idx].b.iter_mut().zip(&delta) {
            *gb += *d;
        }
        let mut din = vec![T::zero(); layer.w.cols()];
        layer.w.matvec_t(&delta, &mut din);
        delta = din;
    }
    delta
}

/// Adapter exposing a network as a search oracle for a particular game.
/// Head distributions are truncated and renormalized when a state offers
/// fewer actions than the head width.
pub struct NetOracle<'a, T: Real> {
    net: &'a Network<T>,
}

impl<'a, T: Real> NetOracle<'a, T> {
    pub fn new(net: &'a Network<T>) -> Self {
        Self { net }
    }
}

fn truncate_renorm(probs: &[f64], count: usize) -> MixedStrategy {
    if probs.len() == count {
        return MixedStrategy::from_normalized(probs.to_vec());
    }
    assert!(
        count < probs.len(),
        "state offers more actions than the network head"
    );
    let head: Vec<f64> = probs[..count].to_vec();
    let sum: f64 = head.iter().sum();
    if sum <= 0.0 {
        MixedStrategy::uniform(count)
    } else {
        MixedStrategy::from_normalized(head.into_iter().map(|p| p / sum).collect())
    }
}

impl<G: Game, T: Real> Oracle<G> for NetOracle<'_, T> {
    fn evaluate(&self, game: &G, state: &G::State) -> OracleEval {
        let encoded = game.encode_state(state);
        let out = self
            .net
            .forward(&encoded)
            .expect("game encoding matches the network input width");
        let (n, m) = game.action_counts(state);
        OracleEval {
            p1: truncate_renorm(out.p1.probs(), n),
            p2: truncate_renorm(out.p2.probs(), m),
            value: out.value,
        }
    }
}

/// Convenience for sampling reproducible synthetic batches in tests and
/// benchmarks.
pub fn random_batch<R: Rng>(cfg: &NetConfig, size: usize, rng: &mut R) -> Vec<TrainSample> {
    let dirichlet_ish = |k: usize, rng: &mut R| -> Vec<f64> {
        let raw: Vec<f64> = (0..k).map(|_| rng.gen::<f64>() + 1e-3).collect();
        let sum: f64 = raw.iter().sum();
        raw.into_iter().map(|v| v / sum).collect()
    };
    (0..size)
        .map(|_| TrainSample {
            input: (0..cfg.input_dim).map(|_| rng.gen_range(-1.0..1.0)).collect(),
            policy1: dirichlet_ish(cfg.actions1, rng),
            policy2: dirichlet_ish(cfg.actions2, rng),
            value: rng.gen_range(cfg.binning.v_min..cfg.binning.v_max),
        })
        .collect()
}
