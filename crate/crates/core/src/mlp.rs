//! The 784-H-1 perceptron: He initialization, forward pass, exact
//! backpropagation for sigmoid + binary cross-entropy, and a plain SGD
//! training loop.
//!
//! All math is `f64`. Given the same task, initial model, and config,
//! `train` reproduces the same parameters and epoch records bit for bit.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use rand::seq::SliceRandom;

use crate::data::{BinaryTask, INPUT_DIM};
use crate::mat::{axpy, dot, Mat};
use crate::metrics::{MetricsError, ScoredBatch};
use crate::rng::{seeded, NormalSampler};

/// Predictions are clamped into the open interval by this margin so the
/// sigmoid never saturates to an exact 0 or 1.
const P_MARGIN: f64 = 1e-15;

/// Probability clamp used inside the loss so `ln` stays finite.
pub const BCE_EPS: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub enum MlpError {
    /// Hidden size must be at least 1.
    BadHiddenSize,
    ShapeMismatch { expected: usize, got: usize },
    InvalidConfig(&'static str),
    /// A parameter became non-finite during training.
    Diverged { epoch: usize },
    Metrics(MetricsError),
}

impl fmt::Display for MlpError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MlpError::BadHiddenSize => f.write_str("hidden size must be >= 1"),
            MlpError::ShapeMismatch { expected, got } => {
                write!(f, "expected {expected} features, got {got}")
            }
            MlpError::InvalidConfig(msg) => write!(f, "invalid training config: {msg}"),
            MlpError::Diverged { epoch } => {
                write!(f, "training diverged at epoch {epoch}: non-finite parameter")
            }
            MlpError::Metrics(e) => write!(f, "evaluation failed: {e}"),
        }
    }
}

impl core::error::Error for MlpError {}

impl From<MetricsError> for MlpError {
    fn from(e: MetricsError) -> Self {
        MlpError::Metrics(e)
    }
}

/// Single-hidden-layer perceptron with ReLU hidden units and a sigmoid
/// output.
#[derive(Debug, Clone, PartialEq)]
pub struct Mlp {
    hidden: usize,
    /// `H x 784` first-layer weights.
    w1: Mat,
    b1: Vec<f64>,
    /// `1 x H` output weights, stored flat.
    w2: Vec<f64>,
    b2: f64,
}

/// Everything the forward pass computes for one input.
#[derive(Debug, Clone, PartialEq)]
pub struct ForwardTrace {
    pub z1: Vec<f64>,
    pub a1: Vec<f64>,
    pub z2: f64,
    pub p: f64,
}

/// Mean-over-batch gradients, mirroring [`Mlp`]'s parameter shapes.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub w1: Mat,
    pub b1: Vec<f64>,
    pub w2: Vec<f64>,
    pub b2: f64,
}

/// Hyperparameters for one training run.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub lr: f64,
    pub epochs: usize,
    pub batch_size: usize,
    /// Seeds the epoch shuffles.
    pub seed: u64,
}

pub const DEFAULT_EPOCHS: usize = 100;
pub const DEFAULT_BATCH_SIZE: usize = 64;

impl TrainConfig {
    pub fn new(lr: f64, seed: u64) -> Self {
        TrainConfig {
            lr,
            epochs: DEFAULT_EPOCHS,
            batch_size: DEFAULT_BATCH_SIZE,
            seed,
        }
    }

    fn validate(&self) -> Result<(), MlpError> {
        if !(self.lr.is_finite() && self.lr >= 0.0) {
            return Err(MlpError::InvalidConfig("learning rate must be finite and >= 0"));
        }
        if self.epochs == 0 {
            return Err(MlpError::InvalidConfig("epochs must be >= 1"));
        }
        if self.batch_size == 0 {
            return Err(MlpError::InvalidConfig("batch size must be >= 1"));
        }
        Ok(())
    }
}

/// Metrics for one epoch, evaluated on the validation split.
#[derive(Debug, Clone, PartialEq)]
pub struct EpochRecord {
    /// 1-based epoch index.
    pub epoch: usize,
    pub train_loss: f64,
    pub val_loss: f64,
    pub val_f1: f64,
    pub val_auc: f64,
}

/// Loss, F1, and AUC of a model on one labeled set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalScores {
    pub loss: f64,
    pub f1: f64,
    pub auc: f64,
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + libm::exp(-z))
    } else {
        let e = libm::exp(z);
        e / (1.0 + e)
    }
}

/// Binary cross-entropy of a predicted probability against a `{0, 1}`
/// label, with the probability clamped to `[BCE_EPS, 1 - BCE_EPS]`.
pub fn bce_loss(p: f64, y: u8) -> f64 {
    debug_assert!(y <= 1);
    let p = p.clamp(BCE_EPS, 1.0 - BCE_EPS);
    if y == 1 {
        -libm::log(p)
    } else {
        -libm::log(1.0 - p)
    }
}

/// He-normal initialization: `w1 ~ N(0, 2/784)`, `w2 ~ N(0, 2/H)`,
/// zero biases. Deterministic per seed.
pub fn init_mlp(hidden: usize, seed: u64) -> Result<Mlp, MlpError> {
    if hidden == 0 {
        return Err(MlpError::BadHiddenSize);
    }
    let mut sampler = NormalSampler::new(seed);
    let s1 = libm::sqrt(2.0 / INPUT_DIM as f64);
    let w1: Vec<f64> = (0..hidden * INPUT_DIM).map(|_| s1 * sampler.next()).collect();
    let s2 = libm::sqrt(2.0 / hidden as f64);
    let w2: Vec<f64> = (0..hidden).map(|_| s2 * sampler.next()).collect();
    Ok(Mlp {
        hidden,
        w1: Mat::from_vec(hidden, INPUT_DIM, w1),
        b1: vec![0.0; hidden],
        w2,
        b2: 0.0,
    })
}

impl Mlp {
    /// Builds a model from explicit parameters, checking shape
    /// consistency.
    pub fn from_parts(w1: Mat, b1: Vec<f64>, w2: Vec<f64>, b2: f64) -> Result<Self, MlpError> {
        let hidden = w1.rows();
        if hidden == 0 {
            return Err(MlpError::BadHiddenSize);
        }
        if w1.cols() != INPUT_DIM {
            return Err(MlpError::ShapeMismatch {
                expected: INPUT_DIM,
                got: w1.cols(),
            });
        }
        if b1.len() != hidden || w2.len() != hidden {
            return Err(MlpError::ShapeMismatch {
                expected: hidden,
                got: if b1.len() != hidden { b1.len() } else { w2.len() },
            });
        }
        Ok(Mlp {
            hidden,
            w1,
            b1,
            w2,
            b2,
        })
    }

    pub fn hidden_size(&self) -> usize {
        self.hidden
    }

    pub fn w1(&self) -> &Mat {
        &self.w1
    }

    pub fn b1(&self) -> &[f64] {
        &self.b1
    }

    pub fn w2(&self) -> &[f64] {
        &self.w2
    }

    pub fn b2(&self) -> f64 {
        self.b2
    }

    pub fn all_finite(&self) -> bool {
        self.w1.as_slice().iter().all(|v| v.is_finite())
            && self.b1.iter().all(|v| v.is_finite())
            && self.w2.iter().all(|v| v.is_finite())
            && self.b2.is_finite()
    }

    /// Hidden pre-activations and activations into caller scratch;
    /// returns `(z2, p)`.
    fn forward_into(&self, x: &[f64], z1: &mut [f64], a1: &mut [f64]) -> (f64, f64) {
        for ((z, row), b) in z1.iter_mut().zip(self.w1.iter_rows()).zip(&self.b1) {
            *z = dot(row, x) + b;
        }
        for (a, &z) in a1.iter_mut().zip(z1.iter()) {
            *a = if z > 0.0 { z } else { 0.0 };
        }
        let z2 = dot(&self.w2, a1) + self.b2;
        let p = sigmoid(z2).clamp(P_MARGIN, 1.0 - P_MARGIN);
        (z2, p)
    }

    /// Full forward pass for one 784-vector.
    pub fn forward(&self, x: &[f64]) -> Result<ForwardTrace, MlpError> {
        if x.len() != INPUT_DIM {
            return Err(MlpError::ShapeMismatch {
                expected: INPUT_DIM,
                got: x.len(),
            });
        }
        let mut z1 = vec![0.0; self.hidden];
        let mut a1 = vec![0.0; self.hidden];
        let (z2, p) = self.forward_into(x, &mut z1, &mut a1);
        Ok(ForwardTrace { z1, a1, z2, p })
    }

    /// Predicted probability for one input.
    pub fn predict(&self, x: &[f64]) -> Result<f64, MlpError> {
        Ok(self.forward(x)?.p)
    }

    /// Predicted probabilities for every row of `x`.
    pub fn predict_batch(&self, x: &Mat) -> Result<Vec<f64>, MlpError> {
        if x.cols() != INPUT_DIM {
            return Err(MlpError::ShapeMismatch {
                expected: INPUT_DIM,
                got: x.cols(),
            });
        }
        let mut z1 = vec![0.0; self.hidden];
        let mut a1 = vec![0.0; self.hidden];
        Ok(x.iter_rows()
            .map(|row| self.forward_into(row, &mut z1, &mut a1).1)
            .collect())
    }

    /// Mean gradients of the batch BCE loss.
    ///
    /// With the sigmoid + BCE composite the output residual is `p - y`;
    /// the ReLU subgradient at exactly zero is taken as zero.
    pub fn backward(&self, batch_x: &Mat, batch_y: &[u8]) -> Result<Gradients, MlpError> {
        if batch_x.rows() == 0 || batch_x.rows() != batch_y.len() {
            return Err(MlpError::ShapeMismatch {
                expected: batch_x.rows(),
                got: batch_y.len(),
            });
        }
        if batch_x.cols() != INPUT_DIM {
            return Err(MlpError::ShapeMismatch {
                expected: INPUT_DIM,
                got: batch_x.cols(),
            });
        }
        let mut grads = Gradients {
            w1: Mat::zeros(self.hidden, INPUT_DIM),
            b1: vec![0.0; self.hidden],
            w2: vec![0.0; self.hidden],
            b2: 0.0,
        };
        let mut scratch = TrainScratch::new(self.hidden);
        for (x, &y) in batch_x.iter_rows().zip(batch_y) {
            self.accumulate_sample(x, y, &mut grads, &mut scratch);
        }
        let scale = 1.0 / batch_x.rows() as f64;
        grads.scale(scale);
        Ok(grads)
    }

    /// Adds one sample's gradient contributions (unscaled) into `grads`.
    /// Returns the sample's BCE loss.
    fn accumulate_sample(
        &self,
        x: &[f64],
        y: u8,
        grads: &mut Gradients,
        scratch: &mut TrainScratch,
    ) -> f64 {
        let (_, p) = self.forward_into(x, &mut scratch.z1, &mut scratch.a1);
        let delta2 = p - y as f64;
        grads.b2 += delta2;
        axpy(&mut grads.w2, delta2, &scratch.a1);
        for h in 0..self.hidden {
            // ReLU gate: closed at exactly zero
            let d1 = if scratch.z1[h] > 0.0 {
                self.w2[h] * delta2
            } else {
                0.0
            };
            if d1 != 0.0 {
                grads.b1[h] += d1;
                axpy(grads.w1.row_mut(h), d1, x);
            }
        }
        bce_loss(p, y)
    }

    fn sgd_step(&mut self, grads: &Gradients, lr: f64) {
        axpy(self.w1.as_mut_slice(), -lr, grads.w1.as_slice());
        axpy(&mut self.b1, -lr, &grads.b1);
        axpy(&mut self.w2, -lr, &grads.w2);
        self.b2 -= lr * grads.b2;
    }
}

impl Gradients {
    fn scale(&mut self, s: f64) {
        for v in self.w1.as_mut_slice() {
            *v *= s;
        }
        for v in &mut self.b1 {
            *v *= s;
        }
        for v in &mut self.w2 {
            *v *= s;
        }
        self.b2 *= s;
    }
}

struct TrainScratch {
    z1: Vec<f64>,
    a1: Vec<f64>,
}

impl TrainScratch {
    fn new(hidden: usize) -> Self {
        TrainScratch {
            z1: vec![0.0; hidden],
            a1: vec![0.0; hidden],
        }
    }
}

/// Mean loss, F1, and AUC of `model` on `(x, y)`.
pub fn evaluate(model: &Mlp, x: &Mat, y: &[u8]) -> Result<EvalScores, MlpError> {
    let scores = model.predict_batch(x)?;
    let loss = scores
        .iter()
        .zip(y)
        .map(|(&p, &label)| bce_loss(p, label))
        .sum::<f64>()
        / scores.len().max(1) as f64;
    let batch = ScoredBatch::new(&scores, y)?;
    Ok(EvalScores {
        loss,
        f1: batch.f1(),
        auc: batch.auc()?,
    })
}

/// Trains `model` on the task with plain mini-batch SGD.
///
/// Each epoch shuffles the training rows with the config's PRNG stream,
/// walks mini-batches (the final short batch included), applies
/// `theta -= lr * grad`, and evaluates the validation split.
pub fn train(
    mut model: Mlp,
    task: &BinaryTask,
    cfg: &TrainConfig,
) -> Result<(Mlp, Vec<EpochRecord>), MlpError> {
    cfg.validate()?;
    let n = task.train_x().rows();
    let mut order: Vec<usize> = (0..n).collect();
    let mut shuffle_rng = seeded(cfg.seed);
    let mut grads = Gradients {
        w1: Mat::zeros(model.hidden, INPUT_DIM),
        b1: vec![0.0; model.hidden],
        w2: vec![0.0; model.hidden],
        b2: 0.0,
    };
    let mut scratch = TrainScratch::new(model.hidden);
    let mut records = Vec::with_capacity(cfg.epochs);

    for epoch in 1..=cfg.epochs {
        order.shuffle(&mut shuffle_rng);
        let mut loss_sum = 0.0;
        for batch in order.chunks(cfg.batch_size) {
            grads.w1.as_mut_slice().fill(0.0);
            grads.b1.fill(0.0);
            grads.w2.fill(0.0);
            grads.b2 = 0.0;
            for &i in batch {
                loss_sum +=
                    model.accumulate_sample(task.train_x().row(i), task.train_y()[i], &mut grads, &mut scratch);
            }
            grads.scale(1.0 / batch.len() as f64);
            model.sgd_step(&grads, cfg.lr);
        }
        if !model.all_finite() {
            return Err(MlpError::Diverged { epoch });
        }
        let val = evaluate(&model, task.val_x(), task.val_y())?;
        records.push(EpochRecord {
            epoch,
            train_loss: loss_sum / n as f64,
            val_loss: val.loss,
            val_f1: val.f1,
            val_auc: val.auc,
        });
    }
    Ok((model, records))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::DigitPair;

    pub(crate) fn hand_model() -> Mlp {
        // H = 1, first-layer row of ones, unit output weight
        Mlp::from_parts(
            Mat::from_vec(1, INPUT_DIM, vec![1.0; INPUT_DIM]),
            vec![0.0],
            vec![1.0],
            0.0,
        )
        .unwrap()
    }

    #[test]
    fn init_is_deterministic_and_checked() {
        let a = init_mlp(4, 1).unwrap();
        let b = init_mlp(4, 1).unwrap();
        assert_eq!(a, b);
        assert_eq!(init_mlp(0, 1), Err(MlpError::BadHiddenSize));
    }

    #[test]
    fn init_variance_near_he_target() {
        let m = init_mlp(64, 123).unwrap();
        let w = m.w1().as_slice();
        let mean = w.iter().sum::<f64>() / w.len() as f64;
        let var = w.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / w.len() as f64;
        let target = 2.0 / INPUT_DIM as f64;
        assert!(
            (var - target).abs() < 0.2 * target,
            "sample variance {var} vs target {target}"
        );
    }

    #[test]
    fn forward_zero_model_is_half() {
        let m = Mlp::from_parts(Mat::zeros(3, INPUT_DIM), vec![0.0; 3], vec![0.0; 3], 0.0).unwrap();
        let x = vec![0.7; INPUT_DIM];
        assert_eq!(m.forward(&x).unwrap().p, 0.5);
    }

    #[test]
    fn forward_hand_example() {
        let m = hand_model();
        let x = vec![1.0 / 784.0; INPUT_DIM];
        let t = m.forward(&x).unwrap();
        assert!((t.z1[0] - 1.0).abs() < 1e-12);
        assert!((t.p - 0.7310585786300049).abs() < 1e-12);
    }

    #[test]
    fn relu_clamps_negative_preactivations() {
        let m = Mlp::from_parts(
            Mat::from_vec(1, INPUT_DIM, vec![-1.0; INPUT_DIM]),
            vec![0.0],
            vec![1.0],
            0.0,
        )
        .unwrap();
        let x = vec![0.5; INPUT_DIM];
        let t = m.forward(&x).unwrap();
        assert!(t.z1[0] < 0.0);
        assert_eq!(t.a1[0], 0.0);
    }

    #[test]
    fn forward_rejects_bad_shape() {
        let m = hand_model();
        assert!(matches!(
            m.forward(&[0.0; 10]),
            Err(MlpError::ShapeMismatch { .. })
        ));
    }

    #[test]
    fn bce_values() {
        assert!((bce_loss(0.5, 1) - 0.6931471805599453).abs() < 1e-15);
        assert!(bce_loss(1.0 - 1e-15, 1) < 1e-12);
        assert!((bce_loss(0.7311, 0) - 1.3134157157073179).abs() < 1e-12);
    }

    #[test]
    fn balanced_batch_has_zero_gradient() {
        // zero model predicts 0.5 everywhere; one positive and one
        // negative with the same features cancel exactly
        let m = Mlp::from_parts(Mat::zeros(2, INPUT_DIM), vec![0.0; 2], vec![0.5; 2], 0.0).unwrap();
        let mut rows = vec![0.3; INPUT_DIM];
        rows.extend(vec![0.3; INPUT_DIM]);
        let x = Mat::from_vec(2, INPUT_DIM, rows);
        let g = m.backward(&x, &[1, 0]).unwrap();
        assert!(g.w1.as_slice().iter().all(|&v| v == 0.0));
        assert!(g.w2.iter().all(|&v| v == 0.0));
        assert_eq!(g.b2, 0.0);
    }

    #[test]
    fn hand_gradient_for_output_bias() {
        let m = hand_model();
        let x = Mat::from_vec(1, INPUT_DIM, vec![1.0 / 784.0; INPUT_DIM]);
        let g = m.backward(&x, &[1]).unwrap();
        assert!((g.b2 - (-0.2689414213699951)).abs() < 1e-12);
    }

    fn toy_task(n_train: usize) -> BinaryTask {
        // class 1 rows lean bright, class 0 rows lean dark
        let mut rows = Vec::new();
        let mut labels = Vec::new();
        for i in 0..n_train {
            let y = (i % 2) as u8;
            let base = if y == 1 { 0.8 } else { 0.2 };
            rows.extend((0..INPUT_DIM).map(|j| {
                (base + ((i * 31 + j * 17) % 13) as f64 / 100.0).clamp(0.0, 1.0)
            }));
            labels.push(y);
        }
        let x = Mat::from_vec(n_train, INPUT_DIM, rows);
        BinaryTask::from_parts(
            DigitPair::new(0, 1).unwrap(),
            x.clone(),
            labels.clone(),
            x,
            labels,
        )
        .unwrap()
    }

    #[test]
    fn zero_learning_rate_is_a_null_step() {
        let task = toy_task(20);
        let model = init_mlp(3, 7).unwrap();
        let cfg = TrainConfig {
            lr: 0.0,
            epochs: 100,
            batch_size: 8,
            seed: 1,
        };
        let (trained, records) = train(model.clone(), &task, &cfg).unwrap();
        assert_eq!(trained, model);
        assert_eq!(records.len(), 100);
        for r in &records[1..] {
            assert_eq!(r.train_loss, records[0].train_loss);
            assert_eq!(r.val_loss, records[0].val_loss);
            assert_eq!(r.val_f1, records[0].val_f1);
            assert_eq!(r.val_auc, records[0].val_auc);
        }
    }

    #[test]
    fn training_is_deterministic() {
        let task = toy_task(24);
        let cfg = TrainConfig {
            lr: 0.05,
            epochs: 5,
            batch_size: 4,
            seed: 3,
        };
        let (m1, r1) = train(init_mlp(4, 9).unwrap(), &task, &cfg).unwrap();
        let (m2, r2) = train(init_mlp(4, 9).unwrap(), &task, &cfg).unwrap();
        assert_eq!(m1, m2);
        assert_eq!(r1, r2);
    }

    #[test]
    fn training_learns_the_toy_task() {
        let task = toy_task(40);
        let cfg = TrainConfig {
            lr: 0.03,
            epochs: 30,
            batch_size: 8,
            seed: 0,
        };
        let (_, records) = train(init_mlp(4, 2).unwrap(), &task, &cfg).unwrap();
        assert!(records.last().unwrap().train_loss < records[0].train_loss);
        assert!(records.last().unwrap().val_f1 > 0.95);
    }

    #[test]
    fn absurd_learning_rate_reports_divergence() {
        let task = toy_task(16);
        let cfg = TrainConfig {
            lr: 1e12,
            epochs: 50,
            batch_size: 4,
            seed: 0,
        };
        match train(init_mlp(4, 5).unwrap(), &task, &cfg) {
            Err(MlpError::Diverged { epoch }) => assert!(epoch >= 1),
            other => panic!("expected divergence, got {other:?}"),
        }
    }

    #[test]
    fn invalid_configs_are_rejected() {
        let task = toy_task(8);
        let m = init_mlp(2, 0).unwrap();
        for cfg in [
            TrainConfig { lr: f64::NAN, epochs: 1, batch_size: 1, seed: 0 },
            TrainConfig { lr: 0.1, epochs: 0, batch_size: 1, seed: 0 },
            TrainConfig { lr: 0.1, epochs: 1, batch_size: 0, seed: 0 },
        ] {
            assert!(matches!(
                train(m.clone(), &task, &cfg),
                Err(MlpError::InvalidConfig(_))
            ));
        }
    }
}
