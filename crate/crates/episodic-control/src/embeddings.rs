//! Observation embeddings: turning rendered frames into buffer keys.
//!
//! Three key functions are available. The identity embedding flattens the
//! frame unchanged. The random projection multiplies the flattened frame by a
//! seeded Gaussian matrix with fewer rows than columns, trading exactness for
//! a compact key whose pairwise distances are approximately preserved (the
//! usual random-projection guarantee); [`jl_distortion`] measures how well
//! that holds on a concrete point set. The third option is a learned
//! [`VaeModel`](crate::vae::VaeModel) feature vector.
//!
//! Projection matrices are sampled from a ChaCha8 stream seeded with a caller
//! seed, with standard-normal variates produced by `rand_distr`'s ziggurat.
//! Both algorithms are platform-independent, so `(seed, F, D)` fully
//! determines the matrix and a config file is enough to reconstruct it.

use crate::error::{EcError, Result};
use crate::memory::Embedding;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

/// A rendered observation: `height * width * channels` values in `[0, 1]`,
/// stored plane-major (all of channel 0, then channel 1, ...).
#[derive(Debug, Clone, PartialEq)]
pub struct ObservationFrame {
    pixels: Vec<f64>,
    height: usize,
    width: usize,
    channels: usize,
}

impl ObservationFrame {
    /// Wraps raw pixels, checking the shape product and the `[0, 1]` range.
    pub fn new(pixels: Vec<f64>, height: usize, width: usize, channels: usize) -> Result<Self> {
        if pixels.len() != height * width * channels {
            return Err(EcError::DimensionMismatch {
                expected: height * width * channels,
                got: pixels.len(),
            });
        }
        if pixels.iter().any(|p| !(0.0..=1.0).contains(p)) {
            return Err(EcError::InvalidArgument(
                "frame components must lie in [0, 1]".into(),
            ));
        }
        Ok(Self { pixels, height, width, channels })
    }

    pub fn pixels(&self) -> &[f64] {
        &self.pixels
    }

    pub fn dim(&self) -> usize {
        self.pixels.len()
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    /// The pixels of one channel plane.
    pub fn plane(&self, channel: usize) -> Result<&[f64]> {
        if channel >= self.channels {
            return Err(EcError::InvalidArgument(format!(
                "channel {} out of range (frame has {})",
                channel, self.channels
            )));
        }
        let size = self.height * self.width;
        Ok(&self.pixels[channel * size..(channel + 1) * size])
    }
}

/// A dense `output_dim x input_dim` matrix applied to flattened frames.
#[derive(Debug, Clone)]
pub struct ProjectionMatrix {
    entries: Vec<f64>, // row-major
    output_dim: usize,
    input_dim: usize,
    seed: Option<u64>,
}

impl ProjectionMatrix {
    /// Samples a Gaussian random projection from `(seed, output_dim,
    /// input_dim)`. Entries are i.i.d. standard normal; no `1/sqrt(F)`
    /// scaling is applied here, so projected distances are larger than the
    /// originals by that factor on average (diagnostics rescale analytically,
    /// see [`jl_distortion`]). The projection must genuinely reduce
    /// dimension: `output_dim < input_dim`.
    pub fn gaussian(input_dim: usize, output_dim: usize, seed: u64) -> Result<Self> {
        if output_dim == 0 || input_dim == 0 {
            return Err(EcError::InvalidArgument("projection dims must be positive".into()));
        }
        if output_dim >= input_dim {
            return Err(EcError::NotAReduction { input: input_dim, output: output_dim });
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let entries = (0..output_dim * input_dim)
            .map(|_| StandardNormal.sample(&mut rng))
            .collect();
        Ok(Self { entries, output_dim, input_dim, seed: Some(seed) })
    }

    /// Builds a projection from explicit entries (row-major), e.g. an
    /// identity matrix for diagnostics. No reduction requirement here.
    pub fn from_entries(entries: Vec<f64>, output_dim: usize, input_dim: usize) -> Result<Self> {
        if entries.len() != output_dim * input_dim {
            return Err(EcError::DimensionMismatch {
                expected: output_dim * input_dim,
                got: entries.len(),
            });
        }
        if entries.iter().any(|e| !e.is_finite()) {
            return Err(EcError::NonFinite { context: "projection entry" });
        }
        Ok(Self { entries, output_dim, input_dim, seed: None })
    }

    pub fn output_dim(&self) -> usize {
        self.output_dim
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    /// The seed this matrix was sampled from, when it was sampled.
    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    /// Applies the matrix to a flattened frame.
    pub fn project(&self, frame: &ObservationFrame) -> Result<Embedding> {
        Embedding::new(self.project_slice(frame.pixels())?)
    }

    pub(crate) fn project_slice(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.input_dim {
            return Err(EcError::DimensionMismatch { expected: self.input_dim, got: x.len() });
        }
        let mut out = Vec::with_capacity(self.output_dim);
        for row in 0..self.output_dim {
            let row_entries = &self.entries[row * self.input_dim..(row + 1) * self.input_dim];
            out.push(row_entries.iter().zip(x).map(|(a, b)| a * b).sum());
        }
        Ok(out)
    }
}

/// Pairwise-distance distortion of a projection on a concrete point set.
#[derive(Debug, Clone, Copy)]
pub struct DistortionSummary {
    /// Median of |scaled projected distance - original| / original.
    pub median_relative_error: f64,
    /// Maximum of the same ratio.
    pub max_relative_error: f64,
    /// Number of point pairs with nonzero original distance.
    pub pairs: usize,
}

/// Measures how much `matrix` distorts the pairwise distances of `points`.
///
/// Projected distances are rescaled by `1/sqrt(output_dim)` before comparison
/// (the analytic expectation correction for an unscaled Gaussian matrix).
/// Pairs at original distance zero carry no information about distortion and
/// are skipped; if every pair is like that the statistic is undefined.
pub fn jl_distortion(matrix: &ProjectionMatrix, points: &[ObservationFrame]) -> Result<DistortionSummary> {
    if points.len() < 2 {
        return Err(EcError::InvalidArgument(
            "distortion needs at least two points".into(),
        ));
    }
    let projected: Vec<Vec<f64>> = points
        .iter()
        .map(|p| matrix.project_slice(p.pixels()))
        .collect::<Result<_>>()?;
    let scale = 1.0 / (matrix.output_dim() as f64).sqrt();
    let mut ratios = Vec::new();
    for i in 0..points.len() {
        for j in (i + 1)..points.len() {
            let original = euclidean(points[i].pixels(), points[j].pixels());
            if original == 0.0 {
                continue;
            }
            let mapped = euclidean(&projected[i], &projected[j]) * scale;
            ratios.push((mapped - original).abs() / original);
        }
    }
    if ratios.is_empty() {
        return Err(EcError::UndefinedStatistic {
            what: "projection distortion",
            why: "all point pairs coincide, so relative error has no denominator".into(),
        });
    }
    ratios.sort_by(|a, b| a.partial_cmp(b).unwrap());
    Ok(DistortionSummary {
        median_relative_error: median_of_sorted(&ratios),
        max_relative_error: *ratios.last().unwrap(),
        pairs: ratios.len(),
    })
}

fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

fn median_of_sorted(sorted: &[f64]) -> f64 {
    let n = sorted.len();
    if n % 2 == 1 {
        sorted[n / 2]
    } else {
        0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
    }
}

/// A key function from frames to embeddings.
#[derive(Debug, Clone)]
pub enum EmbeddingFunction {
    /// The flattened frame itself.
    Identity,
    /// Multiplication by a fixed random matrix.
    Projection(ProjectionMatrix),
    /// Encoder statistics (mean and log-std) of a trained VAE.
    VaeFeatures(crate::vae::VaeModel),
}

impl EmbeddingFunction {
    /// Embeds one frame. Deterministic: the same frame always produces the
    /// same bit pattern, which is what makes exact-match lookups meaningful.
    pub fn embed(&self, frame: &ObservationFrame) -> Result<Embedding> {
        match self {
            Self::Identity => Embedding::new(frame.pixels().to_vec()),
            Self::Projection(m) => m.project(frame),
            Self::VaeFeatures(model) => model.features(frame),
        }
    }

    /// Key dimension for frames of `input_dim` components.
    pub fn output_dim(&self, input_dim: usize) -> usize {
        match self {
            Self::Identity => input_dim,
            Self::Projection(m) => m.output_dim(),
            Self::VaeFeatures(model) => 2 * model.latent_dim(),
        }
    }
}
