//! A small dense variational autoencoder over observation frames.
//!
//! Encoder and decoder are two-layer perceptrons with ReLU hidden units and
//! diagonal-Gaussian heads: the encoder maps a frame to latent mean and
//! log-std, the decoder maps a latent sample back to a per-pixel mean and
//! log-std. The per-step loss is the negative ELBO for one sampled latent:
//! the closed-form KL between the encoder Gaussian and the standard normal
//! prior, plus the Gaussian negative log-likelihood of the frame under the
//! decoder. The decoder standard deviation is clamped from below at
//! [`SIGMA_FLOOR`] so the likelihood cannot collapse on exactly reproducible
//! pixels; the clamp is flat, so no gradient flows to the log-std head while
//! it is active.
//!
//! Gradients are written out by hand (this keeps the crate free of an
//! autograd dependency and makes the arithmetic auditable) and are checked
//! against central finite differences in the tests. Optimization is RMSProp.
//!
//! At full scale a convolutional encoder would be the natural choice (four
//! conv layers of {32, 32, 64, 64} kernels with sizes {4, 5, 5, 4} and
//! stride 2 feeding a 512-unit dense layer, mirrored transposed in the
//! decoder); these desk-sized experiments substitute dense layers throughout,
//! and the checkpoint format below is specific to the dense variant.

use crate::embeddings::ObservationFrame;
use crate::error::{EcError, Result};
use crate::memory::Embedding;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

/// Lower clamp for the decoder's output standard deviation.
pub const SIGMA_FLOOR: f64 = 0.05;

/// RMSProp decay for the squared-gradient average.
pub const RMSPROP_RHO: f64 = 0.9;

/// RMSProp denominator stabilizer.
pub const RMSPROP_EPSILON: f64 = 1e-8;

/// Dense VAE parameters. Weight matrices are row-major.
#[derive(Debug, Clone)]
pub struct VaeModel {
    data_dim: usize,   // D
    hidden_dim: usize, // H
    latent_dim: usize, // L
    enc_w1: Vec<f64>,  // H x D
    enc_b1: Vec<f64>,  // H
    enc_w2: Vec<f64>,  // 2L x H (first L rows: mean head, last L: log-std head)
    enc_b2: Vec<f64>,  // 2L
    dec_w1: Vec<f64>,  // H x L
    dec_b1: Vec<f64>,  // H
    dec_w2: Vec<f64>,  // 2D x H (first D rows: mean head, last D: log-std head)
    dec_b2: Vec<f64>,  // 2D
}

/// Per-parameter gradients, same shapes as [`VaeModel`].
#[derive(Debug, Clone)]
pub struct VaeGradients {
    enc_w1: Vec<f64>,
    enc_b1: Vec<f64>,
    enc_w2: Vec<f64>,
    enc_b2: Vec<f64>,
    dec_w1: Vec<f64>,
    dec_b1: Vec<f64>,
    dec_w2: Vec<f64>,
    dec_b2: Vec<f64>,
}

/// Names of the parameter tensors, in declaration (and checkpoint) order.
pub const PARAM_BLOCKS: [&str; 8] = [
    "enc_w1", "enc_b1", "enc_w2", "enc_b2", "dec_w1", "dec_b1", "dec_w2", "dec_b2",
];

impl VaeGradients {
    fn zeros(model: &VaeModel) -> Self {
        Self {
            enc_w1: vec![0.0; model.enc_w1.len()],
            enc_b1: vec![0.0; model.enc_b1.len()],
            enc_w2: vec![0.0; model.enc_w2.len()],
            enc_b2: vec![0.0; model.enc_b2.len()],
            dec_w1: vec![0.0; model.dec_w1.len()],
            dec_b1: vec![0.0; model.dec_b1.len()],
            dec_w2: vec![0.0; model.dec_w2.len()],
            dec_b2: vec![0.0; model.dec_b2.len()],
        }
    }

    /// Blocks in [`PARAM_BLOCKS`] order.
    pub fn blocks(&self) -> [(&'static str, &[f64]); 8] {
        [
            ("enc_w1", &self.enc_w1),
            ("enc_b1", &self.enc_b1),
            ("enc_w2", &self.enc_w2),
            ("enc_b2", &self.enc_b2),
            ("dec_w1", &self.dec_w1),
            ("dec_b1", &self.dec_b1),
            ("dec_w2", &self.dec_w2),
            ("dec_b2", &self.dec_b2),
        ]
    }

    fn blocks_mut(&mut self) -> [(&'static str, &mut Vec<f64>); 8] {
        [
            ("enc_w1", &mut self.enc_w1),
            ("enc_b1", &mut self.enc_b1),
            ("enc_w2", &mut self.enc_w2),
            ("enc_b2", &mut self.enc_b2),
            ("dec_w1", &mut self.dec_w1),
            ("dec_b1", &mut self.dec_b1),
            ("dec_w2", &mut self.dec_w2),
            ("dec_b2", &mut self.dec_b2),
        ]
    }

    fn add_scaled(&mut self, other: &VaeGradients, scale: f64) {
        for ((_, mine), (_, theirs)) in self.blocks_mut().into_iter().zip(other.blocks()) {
            for (m, t) in mine.iter_mut().zip(theirs) {
                *m += scale * t;
            }
        }
    }
}

struct Forward {
    a1: Vec<f64>,
    h1: Vec<f64>,
    mu: Vec<f64>,
    logstd: Vec<f64>,
    z: Vec<f64>,
    a2: Vec<f64>,
    h2: Vec<f64>,
    mean_x: Vec<f64>,
    logstd_x: Vec<f64>, // raw head output, before the floor
    std_x: Vec<f64>,    // after the floor
    loss: f64,
}

impl VaeModel {
    /// A model with small random weights (scaled by the inverse square root
    /// of each layer's fan-in) and zero biases, sampled from `seed`.
    pub fn new(data_dim: usize, hidden_dim: usize, latent_dim: usize, seed: u64) -> Result<Self> {
        if data_dim == 0 || hidden_dim == 0 || latent_dim == 0 {
            return Err(EcError::InvalidArgument("model dimensions must be positive".into()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut layer = |rows: usize, cols: usize| -> Vec<f64> {
            let scale = 1.0 / (cols as f64).sqrt();
            (0..rows * cols)
                .map(|_| {
                    let g: f64 = StandardNormal.sample(&mut rng);
                    g * scale
                })
                .collect()
        };
        Ok(Self {
            data_dim,
            hidden_dim,
            latent_dim,
            enc_w1: layer(hidden_dim, data_dim),
            enc_b1: vec![0.0; hidden_dim],
            enc_w2: layer(2 * latent_dim, hidden_dim),
            enc_b2: vec![0.0; 2 * latent_dim],
            dec_w1: layer(hidden_dim, latent_dim),
            dec_b1: vec![0.0; hidden_dim],
            dec_w2: layer(2 * data_dim, hidden_dim),
            dec_b2: vec![0.0; 2 * data_dim],
        })
    }

    pub fn data_dim(&self) -> usize {
        self.data_dim
    }

    pub fn hidden_dim(&self) -> usize {
        self.hidden_dim
    }

    pub fn latent_dim(&self) -> usize {
        self.latent_dim
    }

    /// Parameter blocks in [`PARAM_BLOCKS`] order, mutable (used by the
    /// optimizer, checkpoint loading and the finite-difference tests).
    pub fn param_blocks_mut(&mut self) -> [(&'static str, &mut Vec<f64>); 8] {
        [
            ("enc_w1", &mut self.enc_w1),
            ("enc_b1", &mut self.enc_b1),
            ("enc_w2", &mut self.enc_w2),
            ("enc_b2", &mut self.enc_b2),
            ("dec_w1", &mut self.dec_w1),
            ("dec_b1", &mut self.dec_b1),
            ("dec_w2", &mut self.dec_w2),
            ("dec_b2", &mut self.dec_b2),
        ]
    }

    /// Parameter blocks in [`PARAM_BLOCKS`] order.
    pub fn param_blocks(&self) -> [(&'static str, &[f64]); 8] {
        [
            ("enc_w1", &self.enc_w1),
            ("enc_b1", &self.enc_b1),
            ("enc_w2", &self.enc_w2),
            ("enc_b2", &self.enc_b2),
            ("dec_w1", &self.dec_w1),
            ("dec_b1", &self.dec_b1),
            ("dec_w2", &self.dec_w2),
            ("dec_b2", &self.dec_b2),
        ]
    }

    fn check_frame(&self, x: &ObservationFrame) -> Result<()> {
        if x.dim() != self.data_dim {
            return Err(EcError::DimensionMismatch { expected: self.data_dim, got: x.dim() });
        }
        Ok(())
    }

    fn check_latent(&self, z: &[f64], context: &'static str) -> Result<()> {
        if z.len() != self.latent_dim {
            return Err(EcError::DimensionMismatch { expected: self.latent_dim, got: z.len() });
        }
        if z.iter().any(|v| !v.is_finite()) {
            return Err(EcError::NonFinite { context });
        }
        Ok(())
    }

    /// Encoder statistics `(mean, log-std)` for a frame.
    pub fn encode(&self, x: &ObservationFrame) -> Result<(Vec<f64>, Vec<f64>)> {
        self.check_frame(x)?;
        let (mu, logstd, _, _) = self.encode_slice(x.pixels());
        Ok((mu, logstd))
    }

    fn encode_slice(&self, x: &[f64]) -> (Vec<f64>, Vec<f64>, Vec<f64>, Vec<f64>) {
        let h = self.hidden_dim;
        let l = self.latent_dim;
        let a1 = affine(&self.enc_w1, &self.enc_b1, x, h);
        let h1: Vec<f64> = a1.iter().map(|v| v.max(0.0)).collect();
        let out = affine(&self.enc_w2, &self.enc_b2, &h1, 2 * l);
        (out[..l].to_vec(), out[l..].to_vec(), a1, h1)
    }

    /// Decoder output `(mean, std)` for a latent point, std already floored.
    pub fn decode(&self, z: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
        self.check_latent(z, "latent input")?;
        let d = self.data_dim;
        let a2 = affine(&self.dec_w1, &self.dec_b1, z, self.hidden_dim);
        let h2: Vec<f64> = a2.iter().map(|v| v.max(0.0)).collect();
        let out = affine(&self.dec_w2, &self.dec_b2, &h2, 2 * d);
        let mean = out[..d].to_vec();
        let std = out[d..].iter().map(|ls| ls.exp().max(SIGMA_FLOOR)).collect();
        Ok((mean, std))
    }

    /// The embedding used by the agent: encoder mean concatenated with
    /// encoder log-std (dimension `2 * latent_dim`).
    pub fn features(&self, x: &ObservationFrame) -> Result<Embedding> {
        let (mut mu, logstd) = self.encode(x)?;
        mu.extend(logstd);
        Embedding::new(mu)
    }

    /// KL divergence from `N(mu, diag(exp(logstd)^2))` to the standard
    /// normal: `0.5 * sum(mu^2 + exp(2*logstd) - 1 - 2*logstd)`.
    pub fn kl_term(mu: &[f64], logstd: &[f64]) -> Result<f64> {
        if mu.len() != logstd.len() {
            return Err(EcError::DimensionMismatch { expected: mu.len(), got: logstd.len() });
        }
        if mu.iter().chain(logstd).any(|v| !v.is_finite()) {
            return Err(EcError::NonFinite { context: "kl inputs" });
        }
        Ok(mu
            .iter()
            .zip(logstd)
            .map(|(m, ls)| 0.5 * (m * m + (2.0 * ls).exp() - 1.0 - 2.0 * ls))
            .sum())
    }

    /// Reparameterized latent sample `mu + exp(logstd) * noise`.
    pub fn sample_latent(mu: &[f64], logstd: &[f64], noise: &[f64]) -> Result<Vec<f64>> {
        if mu.len() != logstd.len() || mu.len() != noise.len() {
            return Err(EcError::DimensionMismatch { expected: mu.len(), got: logstd.len().max(noise.len()) });
        }
        if mu.iter().chain(logstd).chain(noise).any(|v| !v.is_finite()) {
            return Err(EcError::NonFinite { context: "latent sample inputs" });
        }
        Ok(mu
            .iter()
            .zip(logstd)
            .zip(noise)
            .map(|((m, ls), n)| m + ls.exp() * n)
            .collect())
    }

    /// Gaussian negative log-likelihood of `x` under the decoder at `z`:
    /// `sum_d 0.5*ln(2*pi*std^2) + (x - mean)^2 / (2*std^2)`, with the
    /// floored std.
    pub fn recon_nll(&self, x: &ObservationFrame, z: &[f64]) -> Result<f64> {
        self.check_frame(x)?;
        let (mean, std) = self.decode(z)?;
        Ok(x.pixels()
            .iter()
            .zip(mean.iter().zip(&std))
            .map(|(x_i, (m, s))| {
                0.5 * (2.0 * std::f64::consts::PI * s * s).ln() + (x_i - m) * (x_i - m) / (2.0 * s * s)
            })
            .sum())
    }

    /// Single-sample loss (KL + reconstruction NLL) and its exact gradient
    /// with respect to every parameter, for the given noise vector.
    pub fn elbo_loss(&self, x: &ObservationFrame, noise: &[f64]) -> Result<(f64, VaeGradients)> {
        self.check_frame(x)?;
        self.check_latent(noise, "noise")?;
        let fwd = self.forward(x.pixels(), noise);
        let grads = self.backward(x.pixels(), noise, &fwd);
        Ok((fwd.loss, grads))
    }

    fn forward(&self, x: &[f64], noise: &[f64]) -> Forward {
        let d = self.data_dim;
        let (mu, logstd, a1, h1) = self.encode_slice(x);
        let z: Vec<f64> = mu
            .iter()
            .zip(&logstd)
            .zip(noise)
            .map(|((m, ls), n)| m + ls.exp() * n)
            .collect();
        let a2 = affine(&self.dec_w1, &self.dec_b1, &z, self.hidden_dim);
        let h2: Vec<f64> = a2.iter().map(|v| v.max(0.0)).collect();
        let out = affine(&self.dec_w2, &self.dec_b2, &h2, 2 * d);
        let mean_x = out[..d].to_vec();
        let logstd_x = out[d..].to_vec();
        let std_x: Vec<f64> = logstd_x.iter().map(|ls| ls.exp().max(SIGMA_FLOOR)).collect();
        let kl: f64 = mu
            .iter()
            .zip(&logstd)
            .map(|(m, ls)| 0.5 * (m * m + (2.0 * ls).exp() - 1.0 - 2.0 * ls))
            .sum();
        let nll: f64 = x
            .iter()
            .zip(mean_x.iter().zip(&std_x))
            .map(|(x_i, (m, s))| {
                0.5 * (2.0 * std::f64::consts::PI * s * s).ln() + (x_i - m) * (x_i - m) / (2.0 * s * s)
            })
            .sum();
        Forward { a1, h1, mu, logstd, z, a2, h2, mean_x, logstd_x, std_x, loss: kl + nll }
    }

    fn backward(&self, x: &[f64], noise: &[f64], fwd: &Forward) -> VaeGradients {
        let d = self.data_dim;
        let h = self.hidden_dim;
        let l = self.latent_dim;
        let mut g = VaeGradients::zeros(self);

        // Decoder Gaussian head. d_mean = (mean - x) / std^2; the log-std
        // head gets 1 - (x - mean)^2 / std^2 while the raw std is above the
        // floor and exactly zero when the clamp is active (flat region).
        let mut d_mean = vec![0.0; d];
        let mut d_logstd_x = vec![0.0; d];
        for i in 0..d {
            let s2 = fwd.std_x[i] * fwd.std_x[i];
            let err = x[i] - fwd.mean_x[i];
            d_mean[i] = -err / s2;
            d_logstd_x[i] = if fwd.logstd_x[i].exp() > SIGMA_FLOOR { 1.0 - err * err / s2 } else { 0.0 };
        }

        // dec_w2 / dec_b2 and the pull-back onto h2.
        let mut d_h2 = vec![0.0; h];
        for i in 0..d {
            for j in 0..h {
                g.dec_w2[i * h + j] = d_mean[i] * fwd.h2[j];
                g.dec_w2[(d + i) * h + j] = d_logstd_x[i] * fwd.h2[j];
                d_h2[j] += self.dec_w2[i * h + j] * d_mean[i]
                    + self.dec_w2[(d + i) * h + j] * d_logstd_x[i];
            }
            g.dec_b2[i] = d_mean[i];
            g.dec_b2[d + i] = d_logstd_x[i];
        }

        // Decoder hidden layer (ReLU subgradient 0 at the kink).
        let mut d_z = vec![0.0; l];
        for j in 0..h {
            let da2 = if fwd.a2[j] > 0.0 { d_h2[j] } else { 0.0 };
            for t in 0..l {
                g.dec_w1[j * l + t] = da2 * fwd.z[t];
                d_z[t] += self.dec_w1[j * l + t] * da2;
            }
            g.dec_b1[j] = da2;
        }

        // Reparameterization plus the KL term's own gradient.
        let mut d_mu = vec![0.0; l];
        let mut d_logstd = vec![0.0; l];
        for t in 0..l {
            d_mu[t] = d_z[t] + fwd.mu[t];
            d_logstd[t] = d_z[t] * noise[t] * fwd.logstd[t].exp() + ((2.0 * fwd.logstd[t]).exp() - 1.0);
        }

        // Encoder output layer and hidden layer.
        let mut d_h1 = vec![0.0; h];
        for t in 0..l {
            for j in 0..h {
                g.enc_w2[t * h + j] = d_mu[t] * fwd.h1[j];
                g.enc_w2[(l + t) * h + j] = d_logstd[t] * fwd.h1[j];
                d_h1[j] += self.enc_w2[t * h + j] * d_mu[t]
                    + self.enc_w2[(l + t) * h + j] * d_logstd[t];
            }
            g.enc_b2[t] = d_mu[t];
            g.enc_b2[l + t] = d_logstd[t];
        }
        for j in 0..h {
            let da1 = if fwd.a1[j] > 0.0 { d_h1[j] } else { 0.0 };
            for i in 0..d {
                g.enc_w1[j * d + i] = da1 * x[i];
            }
            g.enc_b1[j] = da1;
        }
        g
    }

    /// Serializes the model as line-oriented text: a header
    /// `EC-VAE v1 D=<d> H=<h> L=<l>`, then for each tensor in
    /// [`PARAM_BLOCKS`] order a `tensor <name> <len>` line followed by one
    /// line of space-separated shortest-round-trip decimals.
    pub fn checkpoint_text(&self) -> String {
        let mut out = format!(
            "EC-VAE v1 D={} H={} L={}\n",
            self.data_dim, self.hidden_dim, self.latent_dim
        );
        for (name, block) in self.param_blocks() {
            out.push_str(&format!("tensor {} {}\n", name, block.len()));
            let mut first = true;
            for v in block {
                if !first {
                    out.push(' ');
                }
                out.push_str(&format!("{}", v));
                first = false;
            }
            out.push('\n');
        }
        out
    }

    /// Rebuilds a model from [`checkpoint_text`](Self::checkpoint_text)
    /// output, bit-identically.
    pub fn from_checkpoint_text(text: &str) -> Result<Self> {
        let bad = |message: String| EcError::Format { kind: "vae checkpoint", message };
        let mut lines = text.lines();
        let header = lines.next().ok_or_else(|| bad("empty file".into()))?;
        let (d, h, l) = parse_vae_header(header)?;
        let mut model = Self::new(d, h, l, 0)?;
        for (name, block) in model.param_blocks_mut() {
            let tag = lines.next().ok_or_else(|| bad(format!("missing tensor {name}")))?;
            let expected_tag = format!("tensor {} {}", name, block.len());
            if tag != expected_tag {
                return Err(bad(format!("expected {expected_tag:?}, found {tag:?}")));
            }
            let values = lines.next().ok_or_else(|| bad(format!("missing values for {name}")))?;
            let parsed: Vec<f64> = values
                .split_whitespace()
                .map(|v| v.parse::<f64>().map_err(|e| bad(format!("{name}: bad value: {e}"))))
                .collect::<Result<_>>()?;
            if parsed.len() != block.len() {
                return Err(bad(format!(
                    "{name}: expected {} values, found {}",
                    block.len(),
                    parsed.len()
                )));
            }
            *block = parsed;
        }
        if lines.any(|line| !line.trim().is_empty()) {
            return Err(bad("trailing content after final tensor".into()));
        }
        Ok(model)
    }

    /// Writes [`checkpoint_text`](Self::checkpoint_text) to a file.
    pub fn write_checkpoint(&self, path: &std::path::Path) -> Result<()> {
        std::fs::write(path, self.checkpoint_text())?;
        Ok(())
    }

    /// Reads a model back from a checkpoint file.
    pub fn read_checkpoint(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_checkpoint_text(&text)
    }
}

fn affine(w: &[f64], b: &[f64], x: &[f64], rows: usize) -> Vec<f64> {
    let cols = x.len();
    let mut out = Vec::with_capacity(rows);
    for r in 0..rows {
        let row = &w[r * cols..(r + 1) * cols];
        let dot: f64 = row.iter().zip(x).map(|(a, v)| a * v).sum();
        out.push(dot + b[r]);
    }
    out
}

fn parse_vae_header(header: &str) -> Result<(usize, usize, usize)> {
    let bad = |message: String| EcError::Format { kind: "vae checkpoint", message };
    let mut parts = header.split_whitespace();
    if parts.next() != Some("EC-VAE") || parts.next() != Some("v1") {
        return Err(bad(format!("unrecognized header: {header:?}")));
    }
    let mut dims = [None; 3];
    for part in parts {
        for (i, prefix) in ["D=", "H=", "L="].iter().enumerate() {
            if let Some(v) = part.strip_prefix(prefix) {
                dims[i] = Some(v.parse::<usize>().map_err(|e| bad(format!("bad {prefix}: {e}")))?);
            }
        }
    }
    match dims {
        [Some(d), Some(h), Some(l)] => Ok((d, h, l)),
        _ => Err(bad("header must carry D=, H= and L=".into())),
    }
}

/// RMSProp optimizer state: one running squared-gradient average per
/// parameter, with fixed decay [`RMSPROP_RHO`] and stabilizer
/// [`RMSPROP_EPSILON`].
#[derive(Debug, Clone)]
pub struct RmsProp {
    learning_rate: f64,
    v: Vec<Vec<f64>>, // aligned with PARAM_BLOCKS
}

impl RmsProp {
    pub fn new(model: &VaeModel, learning_rate: f64) -> Result<Self> {
        if !(learning_rate.is_finite() && learning_rate > 0.0) {
            return Err(EcError::InvalidArgument("learning rate must be positive".into()));
        }
        Ok(Self {
            learning_rate,
            v: model.param_blocks().iter().map(|(_, b)| vec![0.0; b.len()]).collect(),
        })
    }

    /// One update: `v <- rho*v + (1-rho)*g^2`, then
    /// `theta <- theta - lr * g / sqrt(v + eps)`.
    pub fn step(&mut self, model: &mut VaeModel, grads: &VaeGradients) -> Result<()> {
        for (slot, ((_, params), (_, g))) in
            self.v.iter_mut().zip(model.param_blocks_mut().into_iter().zip(grads.blocks()))
        {
            if slot.len() != g.len() {
                return Err(EcError::DimensionMismatch { expected: slot.len(), got: g.len() });
            }
            for i in 0..slot.len() {
                if !g[i].is_finite() {
                    return Err(EcError::NonFinite { context: "gradient" });
                }
                slot[i] = RMSPROP_RHO * slot[i] + (1.0 - RMSPROP_RHO) * g[i] * g[i];
                params[i] -= self.learning_rate * g[i] / (slot[i] + RMSPROP_EPSILON).sqrt();
            }
        }
        Ok(())
    }
}

/// Minibatch training settings.
#[derive(Debug, Clone)]
pub struct TrainConfig {
    pub steps: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub seed: u64,
}

/// Per-step mean minibatch losses, in order.
#[derive(Debug, Clone)]
pub struct TrainingLog {
    pub losses: Vec<f64>,
}

impl TrainingLog {
    /// Mean of the first `window` losses.
    pub fn initial_mean(&self, window: usize) -> f64 {
        let w = window.min(self.losses.len()).max(1);
        self.losses[..w].iter().sum::<f64>() / w as f64
    }

    /// Mean of the last `window` losses.
    pub fn final_mean(&self, window: usize) -> f64 {
        let w = window.min(self.losses.len()).max(1);
        self.losses[self.losses.len() - w..].iter().sum::<f64>() / w as f64
    }
}

/// Trains the model in place with RMSProp on uniformly resampled minibatches.
///
/// Batch composition and reparameterization noise both come from a single
/// ChaCha8 stream seeded with `config.seed`, so a run is a pure function of
/// `(model, corpus, config)`.
pub fn train(model: &mut VaeModel, corpus: &[ObservationFrame], config: &TrainConfig) -> Result<TrainingLog> {
    if corpus.is_empty() {
        return Err(EcError::InvalidArgument("training corpus is empty".into()));
    }
    if config.batch_size == 0 {
        return Err(EcError::InvalidArgument("batch size must be at least 1".into()));
    }
    for frame in corpus {
        if frame.dim() != model.data_dim() {
            return Err(EcError::DimensionMismatch {
                expected: model.data_dim(),
                got: frame.dim(),
            });
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut optimizer = RmsProp::new(model, config.learning_rate)?;
    let mut losses = Vec::with_capacity(config.steps);
    let l = model.latent_dim();
    for _ in 0..config.steps {
        let mut batch_loss = 0.0;
        let mut batch_grads = VaeGradients::zeros(model);
        for _ in 0..config.batch_size {
            let idx = rng.random_range(0..corpus.len());
            let noise: Vec<f64> = (0..l).map(|_| StandardNormal.sample(&mut rng)).collect();
            let (loss, grads) = model.elbo_loss(&corpus[idx], &noise)?;
            batch_loss += loss;
            batch_grads.add_scaled(&grads, 1.0);
        }
        let scale = 1.0 / config.batch_size as f64;
        batch_loss *= scale;
        let mut mean_grads = VaeGradients::zeros(model);
        mean_grads.add_scaled(&batch_grads, scale);
        optimizer.step(model, &mean_grads)?;
        losses.push(batch_loss);
    }
    Ok(TrainingLog { losses })
}
