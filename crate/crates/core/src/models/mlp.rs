//! Feed-forward binary classifier: ReLU hidden layers, sigmoid output,
//! binary cross-entropy with L2 weight penalty, inverted dropout, and
//! adaptive-moment updates with bias correction.

use ndarray::{Array1, Array2, Axis};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};

use super::{classify, design_matrix, ModelMeta, ModelsError, Prediction, TrainedModel};
use crate::num::{sigmoid, ColumnStandardizer};
use crate::splits::LabeledDataset;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MlpParams {
    pub hidden_layers: Vec<usize>,
    pub epochs: usize,
    /// Penalty `l2 * sum(w^2)` over weight matrices (biases exempt).
    pub l2: f64,
    pub dropout: f64,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub seed: u64,
}

impl Default for MlpParams {
    fn default() -> Self {
        MlpParams {
            hidden_layers: vec![64, 64],
            epochs: 50,
            l2: 1e-4,
            dropout: 0.5,
            batch_size: 128,
            learning_rate: 1e-3,
            seed: 0,
        }
    }
}

/// Dense network parameters; `weights[l]` maps layer l's input to output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpNet {
    pub weights: Vec<Array2<f64>>,
    pub biases: Vec<Array1<f64>>,
}

/// One standard normal draw via Box-Muller.
pub(crate) fn normal(rng: &mut ChaCha12Rng) -> f64 {
    loop {
        let u1: f64 = rng.gen();
        if u1 > f64::MIN_POSITIVE {
            let u2: f64 = rng.gen();
            return (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos();
        }
    }
}

impl MlpNet {
    /// He-normal hidden layers, smaller-scale output layer, zero biases.
    pub fn init(input_dim: usize, hidden: &[usize], rng: &mut ChaCha12Rng) -> MlpNet {
        let mut sizes = vec![input_dim];
        sizes.extend_from_slice(hidden);
        sizes.push(1);
        let mut weights = Vec::new();
        let mut biases = Vec::new();
        for w in sizes.windows(2) {
            let (fan_in, fan_out) = (w[0], w[1]);
            let std = if fan_out == 1 {
                (1.0 / fan_in as f64).sqrt()
            } else {
                (2.0 / fan_in as f64).sqrt()
            };
            weights.push(Array2::from_shape_fn((fan_in, fan_out), |_| {
                normal(rng) * std
            }));
            biases.push(Array1::zeros(fan_out));
        }
        MlpNet { weights, biases }
    }

    fn hidden_count(&self) -> usize {
        self.weights.len() - 1
    }

    /// Forward pass retaining per-layer post-ReLU activations. Masks, when
    /// given, hold inverted-dropout factors (0 or 1/keep) per hidden unit.
    fn forward(
        &self,
        x: &Array2<f64>,
        masks: Option<&[Array2<f64>]>,
    ) -> (Vec<Array2<f64>>, Vec<Array2<f64>>, Array1<f64>) {
        let mut inputs = vec![x.clone()];
        let mut relus = Vec::new();
        let mut a = x.clone();
        for l in 0..self.hidden_count() {
            let z = a.dot(&self.weights[l]) + &self.biases[l];
            let h = z.mapv(|v| v.max(0.0));
            relus.push(h.clone());
            a = match masks {
                Some(m) => h * &m[l],
                None => h,
            };
            inputs.push(a.clone());
        }
        let logits = (a.dot(&self.weights[self.hidden_count()])
            + &self.biases[self.hidden_count()])
            .index_axis(Axis(1), 0)
            .to_owned();
        (inputs, relus, logits)
    }

    pub fn logits(&self, x: &Array2<f64>) -> Array1<f64> {
        self.forward(x, None).2
    }
}

fn bce(logit: f64, target: f64) -> f64 {
    logit.max(0.0) - logit * target + (1.0 + (-logit.abs()).exp()).ln()
}

/// Mean binary cross-entropy plus the L2 weight penalty; dropout off.
pub fn mlp_loss(net: &MlpNet, x: &Array2<f64>, y: &[f64], l2: f64) -> f64 {
    let logits = net.logits(x);
    let data: f64 = logits
        .iter()
        .zip(y)
        .map(|(&z, &t)| bce(z, t))
        .sum::<f64>()
        / y.len() as f64;
    let penalty: f64 = net.weights.iter().map(|w| w.iter().map(|v| v * v).sum::<f64>()).sum();
    data + l2 * penalty
}

pub struct MlpGrads {
    pub weights: Vec<Array2<f64>>,
    pub biases: Vec<Array1<f64>>,
}

fn backward(
    net: &MlpNet,
    x: &Array2<f64>,
    y: &[f64],
    l2: f64,
    masks: Option<&[Array2<f64>]>,
) -> (MlpGrads, f64) {
    let n = x.nrows() as f64;
    let (inputs, relus, logits) = net.forward(x, masks);
    let loss = logits.iter().zip(y).map(|(&z, &t)| bce(z, t)).sum::<f64>() / n
        + l2 * net
            .weights
            .iter()
            .map(|w| w.iter().map(|v| v * v).sum::<f64>())
            .sum::<f64>();

    let last = net.hidden_count();
    let mut w_grads = vec![Array2::zeros((0, 0)); net.weights.len()];
    let mut b_grads = vec![Array1::zeros(0); net.biases.len()];

    // d(mean BCE)/dz = (sigmoid(z) - y) / n
    let dz_out = Array2::from_shape_fn((x.nrows(), 1), |(i, _)| {
        (sigmoid(logits[i]) - y[i]) / n
    });
    w_grads[last] = inputs[last].t().dot(&dz_out) + &(2.0 * l2 * &net.weights[last]);
    b_grads[last] = dz_out.sum_axis(Axis(0));
    let mut da = dz_out.dot(&net.weights[last].t());

    for l in (0..last).rev() {
        let dh = match masks {
            Some(m) => &da * &m[l],
            None => da.clone(),
        };
        let dz = dh * relus[l].mapv(|h| if h > 0.0 { 1.0 } else { 0.0 });
        w_grads[l] = inputs[l].t().dot(&dz) + &(2.0 * l2 * &net.weights[l]);
        b_grads[l] = dz.sum_axis(Axis(0));
        da = dz.dot(&net.weights[l].t());
    }

    (
        MlpGrads {
            weights: w_grads,
            biases: b_grads,
        },
        loss,
    )
}

/// Analytic gradients with dropout off, for finite-difference verification.
pub fn mlp_gradients(net: &MlpNet, x: &Array2<f64>, y: &[f64], l2: f64) -> MlpGrads {
    backward(net, x, y, l2, None).0
}

/// Adaptive-moment state over a list of matrix and vector parameters.
/// beta1 = 0.9, beta2 = 0.999, eps = 1e-8, with bias correction.
pub(crate) struct AdamState {
    m_mats: Vec<Array2<f64>>,
    v_mats: Vec<Array2<f64>>,
    m_vecs: Vec<Array1<f64>>,
    v_vecs: Vec<Array1<f64>>,
    t: i32,
}

impl AdamState {
    pub(crate) fn new(mats: &[Array2<f64>], vecs: &[Array1<f64>]) -> AdamState {
        AdamState {
            m_mats: mats.iter().map(|w| Array2::zeros(w.dim())).collect(),
            v_mats: mats.iter().map(|w| Array2::zeros(w.dim())).collect(),
            m_vecs: vecs.iter().map(|b| Array1::zeros(b.len())).collect(),
            v_vecs: vecs.iter().map(|b| Array1::zeros(b.len())).collect(),
            t: 0,
        }
    }

    pub(crate) fn step(
        &mut self,
        mats: Vec<&mut Array2<f64>>,
        vecs: Vec<&mut Array1<f64>>,
        mat_grads: &[Array2<f64>],
        vec_grads: &[Array1<f64>],
        lr: f64,
    ) {
        const B1: f64 = 0.9;
        const B2: f64 = 0.999;
        const EPS: f64 = 1e-8;
        self.t += 1;
        let c1 = 1.0 - B1.powi(self.t);
        let c2 = 1.0 - B2.powi(self.t);
        for (i, param) in mats.into_iter().enumerate() {
            let g = &mat_grads[i];
            self.m_mats[i] = B1 * &self.m_mats[i] + (1.0 - B1) * g;
            self.v_mats[i] = B2 * &self.v_mats[i] + (1.0 - B2) * (g * g);
            let update = (&self.m_mats[i] / c1) / ((&self.v_mats[i] / c2).mapv(f64::sqrt) + EPS);
            *param -= &(lr * update);
        }
        for (i, param) in vecs.into_iter().enumerate() {
            let g = &vec_grads[i];
            self.m_vecs[i] = B1 * &self.m_vecs[i] + (1.0 - B1) * g;
            self.v_vecs[i] = B2 * &self.v_vecs[i] + (1.0 - B2) * (g * g);
            let update = (&self.m_vecs[i] / c1) / ((&self.v_vecs[i] / c2).mapv(f64::sqrt) + EPS);
            *param -= &(lr * update);
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpModel {
    pub net: MlpNet,
    pub norm: ColumnStandardizer,
    pub params: MlpParams,
    pub dim: usize,
    pub meta: ModelMeta,
}

impl MlpModel {
    pub fn predict(&self, rows: &[Vec<f64>]) -> Vec<Prediction> {
        if rows.is_empty() {
            return Vec::new();
        }
        let x = to_matrix(rows.iter().map(|r| self.norm.transform_row(r)));
        self.net
            .logits(&x)
            .iter()
            .map(|&z| classify(sigmoid(z)))
            .collect()
    }
}

fn to_matrix(rows: impl IntoIterator<Item = Vec<f64>>) -> Array2<f64> {
    let rows: Vec<Vec<f64>> = rows.into_iter().collect();
    let dim = rows[0].len();
    Array2::from_shape_fn((rows.len(), dim), |(i, j)| rows[i][j])
}

/// Train the network. Features are standardized with per-column train
/// statistics that the fitted model reapplies at prediction time.
pub fn fit_mlp(train: &LabeledDataset, params: &MlpParams) -> Result<TrainedModel, ModelsError> {
    let (x_raw, y_bool) = design_matrix(train)?;
    let dim = x_raw[0].len();
    let norm = ColumnStandardizer::fit(&x_raw);
    let x_std: Vec<Vec<f64>> = x_raw.iter().map(|r| norm.transform_row(r)).collect();
    let y: Vec<f64> = y_bool.iter().map(|&b| if b { 1.0 } else { 0.0 }).collect();

    let mut init_rng = ChaCha12Rng::seed_from_u64(crate::num::child_seed(params.seed, "mlp-init"));
    let mut net = MlpNet::init(dim, &params.hidden_layers, &mut init_rng);
    let mut adam = AdamState::new(&net.weights, &net.biases);
    let mut shuffle_rng =
        ChaCha12Rng::seed_from_u64(crate::num::child_seed(params.seed, "mlp-batches"));
    let keep = 1.0 - params.dropout;

    for epoch in 0..params.epochs {
        let mut order: Vec<usize> = (0..x_std.len()).collect();
        use rand::seq::SliceRandom;
        order.shuffle(&mut shuffle_rng);
        for (batch_no, chunk) in order.chunks(params.batch_size).enumerate() {
            let xb = to_matrix(chunk.iter().map(|&i| x_std[i].clone()));
            let yb: Vec<f64> = chunk.iter().map(|&i| y[i]).collect();
            let masks = if params.dropout > 0.0 {
                Some(
                    params
                        .hidden_layers
                        .iter()
                        .map(|&width| {
                            Array2::from_shape_fn((chunk.len(), width), |_| {
                                if shuffle_rng.gen::<f64>() < keep {
                                    1.0 / keep
                                } else {
                                    0.0
                                }
                            })
                        })
                        .collect::<Vec<_>>(),
                )
            } else {
                None
            };
            let (grads, loss) = backward(&net, &xb, &yb, params.l2, masks.as_deref());
            if !loss.is_finite() {
                return Err(ModelsError::Diverged {
                    epoch,
                    batch: batch_no,
                });
            }
            adam.step(
                net.weights.iter_mut().collect(),
                net.biases.iter_mut().collect(),
                &grads.weights,
                &grads.biases,
                params.learning_rate,
            );
        }
    }

    Ok(TrainedModel::Nn(MlpModel {
        net,
        norm,
        params: params.clone(),
        dim,
        meta: ModelMeta {
            seed: params.seed,
            train_size: x_std.len(),
        },
    }))
}
