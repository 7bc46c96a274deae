//! Tabular GAN internals: a batch-normalized ReLU generator against a
//! leaky-ReLU dropout discriminator, trained with alternating per-batch
//! adaptive-moment updates on binary cross-entropy.

use ndarray::{Array1, Array2, Axis};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};

use crate::models::mlp::{normal, AdamState};
use crate::num::{sigmoid, ColumnStandardizer};

use super::{AdvgenError, GanConfig};

const BN_EPS: f64 = 1e-5;
const BN_MOMENTUM: f64 = 0.9;

/// Generator hidden layer: linear (no bias), batch norm, ReLU.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct GenLayer {
    w: Array2<f64>,
    gamma: Array1<f64>,
    beta: Array1<f64>,
    running_mean: Array1<f64>,
    running_var: Array1<f64>,
}

/// Fitted tabular generator for one activity, including the column transform
/// of its training data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Generator {
    pub activity: String,
    pub noise_dim: usize,
    pub data_dim: usize,
    hidden: Vec<GenLayer>,
    out_w: Array2<f64>,
    out_b: Array1<f64>,
    pub norm: ColumnStandardizer,
    /// Seed the generator was trained under.
    pub fingerprint: u64,
}

const GENERATOR_FORMAT_VERSION: u32 = 1;

impl Generator {
    pub fn save_json<W: std::io::Write>(&self, out: W) -> Result<(), AdvgenError> {
        #[derive(Serialize)]
        struct File<'a> {
            format_version: u32,
            generator: &'a Generator,
        }
        serde_json::to_writer(
            out,
            &File {
                format_version: GENERATOR_FORMAT_VERSION,
                generator: self,
            },
        )
        .map_err(|e| AdvgenError::Io(std::io::Error::other(e)))
    }

    pub fn load_json<R: std::io::Read>(input: R) -> Result<Generator, AdvgenError> {
        #[derive(Deserialize)]
        struct File {
            format_version: u32,
            generator: Generator,
        }
        let file: File =
            serde_json::from_reader(input).map_err(|e| AdvgenError::Io(std::io::Error::other(e)))?;
        if file.format_version != GENERATOR_FORMAT_VERSION {
            return Err(AdvgenError::BadVersion(file.format_version));
        }
        Ok(file.generator)
    }

    fn init(
        activity: &str,
        noise_dim: usize,
        data_dim: usize,
        hidden: &[usize],
        seed: u64,
        rng: &mut ChaCha12Rng,
        norm: ColumnStandardizer,
    ) -> Generator {
        let mut sizes = vec![noise_dim];
        sizes.extend_from_slice(hidden);
        let hidden_layers = sizes
            .windows(2)
            .map(|w| {
                let std = (2.0 / w[0] as f64).sqrt();
                GenLayer {
                    w: Array2::from_shape_fn((w[0], w[1]), |_| normal(rng) * std),
                    gamma: Array1::ones(w[1]),
                    beta: Array1::zeros(w[1]),
                    running_mean: Array1::zeros(w[1]),
                    running_var: Array1::ones(w[1]),
                }
            })
            .collect();
        let last = *sizes.last().expect("at least the noise layer");
        let out_std = (1.0 / last as f64).sqrt();
        Generator {
            activity: activity.to_string(),
            noise_dim,
            data_dim,
            hidden: hidden_layers,
            out_w: Array2::from_shape_fn((last, data_dim), |_| normal(rng) * out_std),
            out_b: Array1::zeros(data_dim),
            norm,
            fingerprint: seed,
        }
    }

    /// Eval-mode forward through the stored running batch-norm statistics;
    /// output stays in z-score space.
    pub(super) fn forward_eval(&self, z: &Array2<f64>) -> Array2<f64> {
        let mut a = z.clone();
        for layer in &self.hidden {
            let lin = a.dot(&layer.w);
            let denom = layer.running_var.mapv(|v| (v + BN_EPS).sqrt());
            let xhat = (&lin - &layer.running_mean) / &denom;
            a = (&xhat * &layer.gamma + &layer.beta).mapv(|v| v.max(0.0));
        }
        a.dot(&self.out_w) + &self.out_b
    }

    /// Train-mode forward on batch statistics, updating running averages and
    /// caching intermediates for backprop.
    fn forward_train(&mut self, z: &Array2<f64>) -> (Array2<f64>, GenCache) {
        let n = z.nrows() as f64;
        let mut a = z.clone();
        let mut cache = GenCache::default();
        for layer in &mut self.hidden {
            cache.inputs.push(a.clone());
            let lin = a.dot(&layer.w);
            let mu = lin.mean_axis(Axis(0)).expect("non-empty batch");
            let var = lin
                .map_axis(Axis(0), |col| {
                    let m = col.sum() / n;
                    col.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / n
                });
            layer.running_mean = BN_MOMENTUM * &layer.running_mean + (1.0 - BN_MOMENTUM) * &mu;
            layer.running_var = BN_MOMENTUM * &layer.running_var + (1.0 - BN_MOMENTUM) * &var;
            let denom = var.mapv(|v| (v + BN_EPS).sqrt());
            let xhat = (&lin - &mu) / &denom;
            let bn = &xhat * &layer.gamma + &layer.beta;
            let h = bn.mapv(|v| v.max(0.0));
            cache.lin.push(lin);
            cache.mu.push(mu);
            cache.var.push(var);
            cache.xhat.push(xhat);
            cache.relu.push(h.clone());
            a = h;
        }
        cache.out_input = a.clone();
        (a.dot(&self.out_w) + &self.out_b, cache)
    }

    /// Backprop `d(loss)/d(fake)` through the generator; returns gradients in
    /// the Adam parameter order (matrices, then vectors).
    fn backward(&self, dfake: &Array2<f64>, cache: &GenCache) -> (Vec<Array2<f64>>, Vec<Array1<f64>>) {
        let n = dfake.nrows() as f64;
        let mut w_grads: Vec<Array2<f64>> = vec![Array2::zeros((0, 0)); self.hidden.len() + 1];
        let mut gamma_grads: Vec<Array1<f64>> = vec![Array1::zeros(0); self.hidden.len()];
        let mut beta_grads: Vec<Array1<f64>> = vec![Array1::zeros(0); self.hidden.len()];

        w_grads[self.hidden.len()] = cache.out_input.t().dot(dfake);
        let out_b_grad = dfake.sum_axis(Axis(0));
        let mut da = dfake.dot(&self.out_w.t());

        for l in (0..self.hidden.len()).rev() {
            let layer = &self.hidden[l];
            // relu
            let dbn = &da * &cache.relu[l].mapv(|h| if h > 0.0 { 1.0 } else { 0.0 });
            // batch norm (batch-statistics form)
            gamma_grads[l] = (&dbn * &cache.xhat[l]).sum_axis(Axis(0));
            beta_grads[l] = dbn.sum_axis(Axis(0));
            let dxhat = &dbn * &layer.gamma;
            let denom = cache.var[l].mapv(|v| (v + BN_EPS).sqrt());
            let centered = &cache.lin[l] - &cache.mu[l];
            let dvar = (&dxhat * &centered)
                .sum_axis(Axis(0))
                * cache.var[l].mapv(|v| -0.5 * (v + BN_EPS).powf(-1.5));
            let dmu = (&dxhat).sum_axis(Axis(0)) * denom.mapv(|d| -1.0 / d)
                + &dvar * centered.sum_axis(Axis(0)).mapv(|s| -2.0 * s / n);
            let dlin = &dxhat / &denom + &centered * &(2.0 / n * &dvar) + &(dmu / n);
            w_grads[l] = cache.inputs[l].t().dot(&dlin);
            da = dlin.dot(&layer.w.t());
        }

        let mut vec_grads = gamma_grads;
        vec_grads.extend(beta_grads);
        vec_grads.push(out_b_grad);
        (w_grads, vec_grads)
    }

    fn adam_params(&mut self) -> (Vec<&mut Array2<f64>>, Vec<&mut Array1<f64>>) {
        let mut mats: Vec<&mut Array2<f64>> = Vec::new();
        let mut gammas: Vec<&mut Array1<f64>> = Vec::new();
        let mut betas: Vec<&mut Array1<f64>> = Vec::new();
        for layer in &mut self.hidden {
            mats.push(&mut layer.w);
            gammas.push(&mut layer.gamma);
            betas.push(&mut layer.beta);
        }
        mats.push(&mut self.out_w);
        let mut vecs = gammas;
        vecs.extend(betas);
        vecs.push(&mut self.out_b);
        (mats, vecs)
    }
}

#[derive(Default)]
struct GenCache {
    inputs: Vec<Array2<f64>>,
    lin: Vec<Array2<f64>>,
    mu: Vec<Array1<f64>>,
    var: Vec<Array1<f64>>,
    xhat: Vec<Array2<f64>>,
    relu: Vec<Array2<f64>>,
    out_input: Array2<f64>,
}

#[derive(Debug, Clone)]
struct DiscLayer {
    w: Array2<f64>,
    b: Array1<f64>,
}

/// Leaky-ReLU + inverted-dropout discriminator with a single logit output.
#[derive(Debug, Clone)]
pub(super) struct Discriminator {
    layers: Vec<DiscLayer>,
    out_w: Array2<f64>,
    out_b: Array1<f64>,
    leaky: f64,
    dropout: f64,
}

struct DiscCache {
    inputs: Vec<Array2<f64>>,
    pre_act: Vec<Array2<f64>>,
    masks: Vec<Array2<f64>>,
    out_input: Array2<f64>,
}

impl Discriminator {
    fn init(data_dim: usize, hidden: &[usize], leaky: f64, dropout: f64, rng: &mut ChaCha12Rng) -> Self {
        let mut sizes = vec![data_dim];
        sizes.extend_from_slice(hidden);
        let layers = sizes
            .windows(2)
            .map(|w| {
                let std = (2.0 / w[0] as f64).sqrt();
                DiscLayer {
                    w: Array2::from_shape_fn((w[0], w[1]), |_| normal(rng) * std),
                    b: Array1::zeros(w[1]),
                }
            })
            .collect();
        let last = *sizes.last().expect("at least the input layer");
        Discriminator {
            layers,
            out_w: Array2::from_shape_fn((last, 1), |_| normal(rng) * (1.0 / last as f64).sqrt()),
            out_b: Array1::zeros(1),
            leaky,
            dropout,
        }
    }

    fn forward_train(&self, x: &Array2<f64>, rng: &mut ChaCha12Rng) -> (Array1<f64>, DiscCache) {
        let keep = 1.0 - self.dropout;
        let mut a = x.clone();
        let mut cache = DiscCache {
            inputs: Vec::new(),
            pre_act: Vec::new(),
            masks: Vec::new(),
            out_input: Array2::zeros((0, 0)),
        };
        for layer in &self.layers {
            cache.inputs.push(a.clone());
            let z = a.dot(&layer.w) + &layer.b;
            let h = z.mapv(|v| if v > 0.0 { v } else { self.leaky * v });
            let mask = Array2::from_shape_fn(h.dim(), |_| {
                if rng.gen::<f64>() < keep {
                    1.0 / keep
                } else {
                    0.0
                }
            });
            cache.pre_act.push(z);
            cache.masks.push(mask.clone());
            a = h * mask;
        }
        cache.out_input = a.clone();
        let logits = (a.dot(&self.out_w) + &self.out_b)
            .index_axis(Axis(1), 0)
            .to_owned();
        (logits, cache)
    }

    fn forward_eval(&self, x: &Array2<f64>) -> Array1<f64> {
        let mut a = x.clone();
        for layer in &self.layers {
            let z = a.dot(&layer.w) + &layer.b;
            a = z.mapv(|v| if v > 0.0 { v } else { self.leaky * v });
        }
        (a.dot(&self.out_w) + &self.out_b)
            .index_axis(Axis(1), 0)
            .to_owned()
    }

    /// Backprop per-logit gradients; returns (matrix grads, vector grads,
    /// gradient with respect to the input batch).
    fn backward(
        &self,
        dlogits: &Array1<f64>,
        cache: &DiscCache,
    ) -> (Vec<Array2<f64>>, Vec<Array1<f64>>, Array2<f64>) {
        let n = dlogits.len();
        let dz_out = Array2::from_shape_fn((n, 1), |(i, _)| dlogits[i]);
        let mut w_grads: Vec<Array2<f64>> = vec![Array2::zeros((0, 0)); self.layers.len() + 1];
        let mut b_grads: Vec<Array1<f64>> = vec![Array1::zeros(0); self.layers.len() + 1];
        w_grads[self.layers.len()] = cache.out_input.t().dot(&dz_out);
        b_grads[self.layers.len()] = dz_out.sum_axis(Axis(0));
        let mut da = dz_out.dot(&self.out_w.t());
        for l in (0..self.layers.len()).rev() {
            let dh = &da * &cache.masks[l];
            let dz = dh * cache.pre_act[l].mapv(|z| if z > 0.0 { 1.0 } else { self.leaky });
            w_grads[l] = cache.inputs[l].t().dot(&dz);
            b_grads[l] = dz.sum_axis(Axis(0));
            da = dz.dot(&self.layers[l].w.t());
        }
        (w_grads, b_grads, da)
    }

    fn adam_params(&mut self) -> (Vec<&mut Array2<f64>>, Vec<&mut Array1<f64>>) {
        let mut mats: Vec<&mut Array2<f64>> = Vec::new();
        let mut vecs: Vec<&mut Array1<f64>> = Vec::new();
        for layer in &mut self.layers {
            mats.push(&mut layer.w);
            vecs.push(&mut layer.b);
        }
        mats.push(&mut self.out_w);
        vecs.push(&mut self.out_b);
        (mats, vecs)
    }
}

fn bce_with_logits(logit: f64, target: f64) -> f64 {
    logit.max(0.0) - logit * target + (1.0 + (-logit.abs()).exp()).ln()
}

/// Fit output: the generator plus training diagnostics.
#[derive(Debug, Clone)]
pub struct GanFit {
    pub generator: Generator,
    /// Mean discriminator accuracy on (real, fake) batches per epoch.
    pub d_accuracy_per_epoch: Vec<f64>,
    pub final_d_loss: f64,
    pub final_g_loss: f64,
}

fn to_matrix(rows: &[Vec<f64>]) -> Array2<f64> {
    Array2::from_shape_fn((rows.len(), rows[0].len()), |(i, j)| rows[i][j])
}

fn noise(n: usize, dim: usize, rng: &mut ChaCha12Rng) -> Array2<f64> {
    Array2::from_shape_fn((n, dim), |_| normal(rng))
}

/// Train a generator on the feature rows of one activity.
///
/// Columns are z-scored before training; the stored transform is inverted at
/// sampling time. One discriminator step then one generator step per batch,
/// both minimizing binary cross-entropy (the generator through the
/// non-saturating form).
pub fn gan_fit(activity: &str, rows: &[Vec<f64>], cfg: &GanConfig) -> Result<GanFit, AdvgenError> {
    if rows.len() < 10 {
        return Err(AdvgenError::InsufficientRows(rows.len()));
    }
    let norm = ColumnStandardizer::fit(rows);
    let data: Vec<Vec<f64>> = rows.iter().map(|r| norm.transform_row(r)).collect();
    let data_dim = data[0].len();

    let mut init_rng = ChaCha12Rng::seed_from_u64(crate::num::child_seed(cfg.seed, "gan-init"));
    let mut generator = Generator::init(
        activity,
        cfg.noise_dim,
        data_dim,
        &cfg.hidden_widths,
        cfg.seed,
        &mut init_rng,
        norm,
    );
    let mut discriminator = Discriminator::init(
        data_dim,
        &cfg.hidden_widths,
        cfg.leaky_slope,
        cfg.dropout,
        &mut init_rng,
    );
    let mut g_adam = {
        let (mats, vecs) = generator.adam_params();
        AdamState::new(
            &mats.iter().map(|m| (*m).clone()).collect::<Vec<_>>(),
            &vecs.iter().map(|v| (*v).clone()).collect::<Vec<_>>(),
        )
    };
    let mut d_adam = {
        let (mats, vecs) = discriminator.adam_params();
        AdamState::new(
            &mats.iter().map(|m| (*m).clone()).collect::<Vec<_>>(),
            &vecs.iter().map(|v| (*v).clone()).collect::<Vec<_>>(),
        )
    };

    let mut rng = ChaCha12Rng::seed_from_u64(crate::num::child_seed(cfg.seed, "gan-train"));
    let mut d_accuracy_per_epoch = Vec::with_capacity(cfg.epochs);
    let mut final_d_loss = f64::NAN;
    let mut final_g_loss = f64::NAN;

    for epoch in 0..cfg.epochs {
        let mut order: Vec<usize> = (0..data.len()).collect();
        use rand::seq::SliceRandom;
        order.shuffle(&mut rng);
        let mut epoch_correct = 0.0;
        let mut epoch_total = 0.0;
        for chunk in order.chunks(cfg.batch_size) {
            if chunk.len() < 2 {
                continue; // batch statistics need at least two rows
            }
            let real_rows: Vec<Vec<f64>> = chunk.iter().map(|&i| data[i].clone()).collect();
            let real = to_matrix(&real_rows);
            let m = chunk.len();

            // discriminator step on real vs fake (generator held fixed)
            let z = noise(m, cfg.noise_dim, &mut rng);
            let (fake, _) = generator.forward_train(&z);
            let (real_logits, real_cache) = discriminator.forward_train(&real, &mut rng);
            let (fake_logits, fake_cache) = discriminator.forward_train(&fake, &mut rng);
            let d_loss = real_logits.iter().map(|&l| bce_with_logits(l, 1.0)).sum::<f64>()
                / m as f64
                + fake_logits.iter().map(|&l| bce_with_logits(l, 0.0)).sum::<f64>() / m as f64;
            if !d_loss.is_finite() {
                return Err(AdvgenError::Diverged { epoch });
            }
            epoch_correct += real_logits.iter().filter(|&&l| l > 0.0).count() as f64
                + fake_logits.iter().filter(|&&l| l <= 0.0).count() as f64;
            epoch_total += 2.0 * m as f64;

            let d_real: Array1<f64> = real_logits.mapv(|l| (sigmoid(l) - 1.0) / m as f64);
            let d_fake: Array1<f64> = fake_logits.mapv(|l| sigmoid(l) / m as f64);
            let (wg_r, bg_r, _) = discriminator.backward(&d_real, &real_cache);
            let (wg_f, bg_f, _) = discriminator.backward(&d_fake, &fake_cache);
            let w_grads: Vec<Array2<f64>> =
                wg_r.into_iter().zip(wg_f).map(|(a, b)| a + b).collect();
            let b_grads: Vec<Array1<f64>> =
                bg_r.into_iter().zip(bg_f).map(|(a, b)| a + b).collect();
            {
                let (mats, vecs) = discriminator.adam_params();
                d_adam.step(mats, vecs, &w_grads, &b_grads, cfg.lr_discriminator);
            }

            // generator step: push fresh fakes toward the real label
            let z = noise(m, cfg.noise_dim, &mut rng);
            let (fake, g_cache) = generator.forward_train(&z);
            let (logits, d_cache) = discriminator.forward_train(&fake, &mut rng);
            let g_loss =
                logits.iter().map(|&l| bce_with_logits(l, 1.0)).sum::<f64>() / m as f64;
            if !g_loss.is_finite() {
                return Err(AdvgenError::Diverged { epoch });
            }
            let dlogits: Array1<f64> = logits.mapv(|l| (sigmoid(l) - 1.0) / m as f64);
            let (_, _, dfake) = discriminator.backward(&dlogits, &d_cache);
            let (w_grads, v_grads) = generator.backward(&dfake, &g_cache);
            {
                let (mats, vecs) = generator.adam_params();
                g_adam.step(mats, vecs, &w_grads, &v_grads, cfg.lr_generator);
            }

            final_d_loss = d_loss;
            final_g_loss = g_loss;
        }
        d_accuracy_per_epoch.push(if epoch_total > 0.0 {
            epoch_correct / epoch_total
        } else {
            f64::NAN
        });
    }

    Ok(GanFit {
        generator,
        d_accuracy_per_epoch,
        final_d_loss,
        final_g_loss,
    })
}

/// Draw `n` rows from a fitted generator and map them back through the
/// inverse column transform.
pub fn gan_sample(
    generator: &Generator,
    n: usize,
    seed: u64,
) -> Result<super::AdversarialBatch, AdvgenError> {
    if n == 0 {
        return Err(AdvgenError::ZeroSamples);
    }
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let z = noise(n, generator.noise_dim, &mut rng);
    let out = generator.forward_eval(&z);
    let mut rows = Vec::with_capacity(n);
    for i in 0..n {
        let zrow: Vec<f64> = out.row(i).to_vec();
        let row = generator.norm.inverse_row(&zrow);
        if row.iter().any(|v| !v.is_finite()) {
            return Err(AdvgenError::NonFiniteSample);
        }
        rows.push(row);
    }
    Ok(super::AdversarialBatch {
        activity: generator.activity.clone(),
        rows,
        generator_fingerprint: generator.fingerprint,
        provenance: crate::txio::LabelSource::Dg,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy_cfg(seed: u64) -> GanConfig {
        GanConfig {
            noise_dim: 4,
            hidden_widths: vec![8, 8],
            epochs: 3,
            batch_size: 8,
            lr_generator: 2e-4,
            lr_discriminator: 2e-4,
            leaky_slope: 0.2,
            dropout: 0.5,
            seed,
        }
    }

    fn toy_rows(n: usize, seed: u64) -> Vec<Vec<f64>> {
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        (0..n)
            .map(|_| vec![3.0 + normal(&mut rng), -1.0 + 2.0 * normal(&mut rng)])
            .collect()
    }

    #[test]
    fn rejects_fewer_than_ten_rows() {
        let rows = toy_rows(9, 0);
        assert!(matches!(
            gan_fit("Phishing", &rows, &toy_cfg(1)),
            Err(AdvgenError::InsufficientRows(9))
        ));
    }

    #[test]
    fn same_seed_gives_byte_identical_generator() {
        let rows = toy_rows(32, 3);
        let a = gan_fit("Phishing", &rows, &toy_cfg(7)).unwrap();
        let b = gan_fit("Phishing", &rows, &toy_cfg(7)).unwrap();
        let mut buf_a = Vec::new();
        let mut buf_b = Vec::new();
        a.generator.save_json(&mut buf_a).unwrap();
        b.generator.save_json(&mut buf_b).unwrap();
        assert_eq!(buf_a, buf_b);

        let c = gan_fit("Phishing", &rows, &toy_cfg(8)).unwrap();
        let mut buf_c = Vec::new();
        c.generator.save_json(&mut buf_c).unwrap();
        assert_ne!(buf_a, buf_c);
    }

    #[test]
    fn checkpoint_roundtrip_preserves_samples() {
        let rows = toy_rows(20, 5);
        let fit = gan_fit("Phishing", &rows, &toy_cfg(2)).unwrap();
        let mut buf = Vec::new();
        fit.generator.save_json(&mut buf).unwrap();
        let back = Generator::load_json(buf.as_slice()).unwrap();
        let a = gan_sample(&fit.generator, 5, 99).unwrap();
        let b = gan_sample(&back, 5, 99).unwrap();
        assert_eq!(a.rows, b.rows);
    }

    #[test]
    fn sample_rejects_zero() {
        let rows = toy_rows(16, 1);
        let fit = gan_fit("Phishing", &rows, &toy_cfg(4)).unwrap();
        assert!(matches!(
            gan_sample(&fit.generator, 0, 1),
            Err(AdvgenError::ZeroSamples)
        ));
    }

    #[test]
    fn sampled_dimensionality_matches_training_data() {
        let rows = toy_rows(16, 2);
        let fit = gan_fit("Phishing", &rows, &toy_cfg(4)).unwrap();
        let batch = gan_sample(&fit.generator, 7, 3).unwrap();
        assert_eq!(batch.rows.len(), 7);
        assert!(batch.rows.iter().all(|r| r.len() == 2));
        assert!(batch.rows.iter().flatten().all(|v| v.is_finite()));
    }

    /// Finite-difference check of the generator backward pass (batch-norm
    /// included) under the surrogate loss sum(fake).
    #[test]
    fn generator_gradients_match_finite_differences() {
        let rows = toy_rows(16, 6);
        let cfg = toy_cfg(11);
        let fit = gan_fit("Phishing", &rows, &cfg).unwrap();
        let mut rng = ChaCha12Rng::seed_from_u64(42);
        let z = noise(6, cfg.noise_dim, &mut rng);

        let mut gen = fit.generator.clone();
        let frozen = gen.clone();
        let (fake, cache) = gen.forward_train(&z);
        let dfake = Array2::ones(fake.dim());
        let (w_grads, v_grads) = frozen.backward(&dfake, &cache);

        let loss_of = |g: &Generator| -> f64 {
            let mut g = g.clone();
            g.forward_train(&z).0.sum()
        };
        let h = 1e-6;
        // spot-check a few weight coordinates in the first hidden layer
        for &(i, j) in &[(0usize, 0usize), (1, 3), (2, 5)] {
            let mut plus = frozen.clone();
            plus.hidden[0].w[[i, j]] += h;
            let mut minus = frozen.clone();
            minus.hidden[0].w[[i, j]] -= h;
            let numeric = (loss_of(&plus) - loss_of(&minus)) / (2.0 * h);
            let analytic = w_grads[0][[i, j]];
            let denom = numeric.abs().max(analytic.abs()).max(1e-8);
            assert!(
                (numeric - analytic).abs() / denom < 1e-4,
                "w[{i},{j}]: numeric {numeric} vs analytic {analytic}"
            );
        }
        // and the batch-norm shift/scale of the second layer
        let n_hidden = frozen.hidden.len();
        for idx in [0usize, 3] {
            let mut plus = frozen.clone();
            plus.hidden[1].gamma[idx] += h;
            let mut minus = frozen.clone();
            minus.hidden[1].gamma[idx] -= h;
            let numeric = (loss_of(&plus) - loss_of(&minus)) / (2.0 * h);
            let analytic = v_grads[n_hidden + 1][idx];
            let denom = numeric.abs().max(analytic.abs()).max(1e-8);
            assert!(
                (numeric - analytic).abs() / denom < 1e-4,
                "gamma[{idx}]: numeric {numeric} vs analytic {analytic}"
            );
        }
    }
}
