use alloc::vec;
use alloc::vec::Vec;

use rand::distr::{Distribution, Uniform};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Layer widths: ROI feature size, hidden width, embedding size.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct HeadDims {
    pub input: usize,
    pub hidden: usize,
    pub embed: usize,
}

impl HeadDims {
    pub fn new(input: usize, hidden: usize, embed: usize) -> Self {
        Self { input, hidden, embed }
    }

    /// Total number of scalar parameters.
    pub fn param_count(&self) -> usize {
        self.hidden * self.input + self.hidden + self.embed * self.hidden + self.embed
    }
}

/// Weights of the embedding head, `embed = w2 · relu(w1 · x + b1) + b2`.
///
/// `w1` is `hidden × input` and `w2` is `embed × hidden`, both row-major.
/// The same shape doubles as the gradient container.
#[derive(Debug, Clone, PartialEq)]
pub struct TrackHeadParams {
    dims: HeadDims,
    pub(crate) w1: Vec<f64>,
    pub(crate) b1: Vec<f64>,
    pub(crate) w2: Vec<f64>,
    pub(crate) b2: Vec<f64>,
}

/// Intermediate values of one forward pass, kept for backpropagation.
pub(crate) struct ForwardTrace {
    pub pre: Vec<f64>,
    pub hidden: Vec<f64>,
    pub embed: Vec<f64>,
}

impl TrackHeadParams {
    pub fn zeros(dims: HeadDims) -> Self {
        Self {
            dims,
            w1: vec![0.0; dims.hidden * dims.input],
            b1: vec![0.0; dims.hidden],
            w2: vec![0.0; dims.embed * dims.hidden],
            b2: vec![0.0; dims.embed],
        }
    }

    /// Uniform initialization in `±1/sqrt(fan_in)` per layer.
    pub fn init(dims: HeadDims, seed: u64) -> Result<Self> {
        if dims.input == 0 || dims.hidden == 0 || dims.embed == 0 {
            return Err(Error::Config("layer widths must be positive".into()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut p = Self::zeros(dims);
        let mut fill = |xs: &mut [f64], fan_in: usize| {
            let bound = 1.0 / libm::sqrt(fan_in as f64);
            let dist = Uniform::new_inclusive(-bound, bound).expect("finite bound");
            for x in xs {
                *x = dist.sample(&mut rng);
            }
        };
        fill(&mut p.w1, dims.input);
        fill(&mut p.b1, dims.input);
        fill(&mut p.w2, dims.hidden);
        fill(&mut p.b2, dims.hidden);
        Ok(p)
    }

    /// Assembles parameters from row-major parts, checking every length.
    pub fn from_parts(dims: HeadDims, w1: Vec<f64>, b1: Vec<f64>, w2: Vec<f64>, b2: Vec<f64>) -> Result<Self> {
        let check = |context, expected: usize, actual: usize| {
            if expected == actual {
                Ok(())
            } else {
                Err(Error::DimensionMismatch {
                    context,
                    expected,
                    actual,
                })
            }
        };
        check("w1", dims.hidden * dims.input, w1.len())?;
        check("b1", dims.hidden, b1.len())?;
        check("w2", dims.embed * dims.hidden, w2.len())?;
        check("b2", dims.embed, b2.len())?;
        let p = Self { dims, w1, b1, w2, b2 };
        if p.values().any(|v| !v.is_finite()) {
            return Err(Error::Config("non-finite parameter".into()));
        }
        Ok(p)
    }

    pub fn dims(&self) -> HeadDims {
        self.dims
    }

    pub fn w1(&self) -> &[f64] {
        &self.w1
    }
    pub fn b1(&self) -> &[f64] {
        &self.b1
    }
    pub fn w2(&self) -> &[f64] {
        &self.w2
    }
    pub fn b2(&self) -> &[f64] {
        &self.b2
    }

    /// All parameters in the order w1, b1, w2, b2.
    pub fn values(&self) -> impl Iterator<Item = &f64> {
        self.w1.iter().chain(&self.b1).chain(&self.w2).chain(&self.b2)
    }

    pub fn values_mut(&mut self) -> impl Iterator<Item = &mut f64> {
        self.w1
            .iter_mut()
            .chain(&mut self.b1)
            .chain(&mut self.w2)
            .chain(&mut self.b2)
    }

    pub fn len(&self) -> usize {
        self.dims.param_count()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// `self += alpha * other`. Shapes must agree.
    pub fn add_scaled(&mut self, other: &TrackHeadParams, alpha: f64) {
        assert_eq!(self.dims, other.dims, "parameter shapes differ");
        for (x, g) in self.values_mut().zip(other.values()) {
            *x += alpha * g;
        }
    }

    pub fn scale_w2(&mut self, c: f64) {
        for w in &mut self.w2 {
            *w *= c;
        }
    }

    pub fn norm(&self) -> f64 {
        libm::sqrt(self.values().map(|v| v * v).sum())
    }

    /// Embeds one ROI feature vector.
    pub fn forward(&self, feature: &[f64]) -> Result<Vec<f64>> {
        self.forward_trace(feature).map(|t| t.embed)
    }

    /// Embeds every feature vector of a batch.
    pub fn forward_batch<F: AsRef<[f64]>>(&self, features: &[F]) -> Result<Vec<Vec<f64>>> {
        features.iter().map(|f| self.forward(f.as_ref())).collect()
    }

    pub(crate) fn forward_trace(&self, feature: &[f64]) -> Result<ForwardTrace> {
        let HeadDims { input, hidden, embed } = self.dims;
        if feature.len() != input {
            return Err(Error::DimensionMismatch {
                context: "track head input",
                expected: input,
                actual: feature.len(),
            });
        }
        let pre: Vec<f64> = (0..hidden)
            .map(|h| {
                let row = &self.w1[h * input..(h + 1) * input];
                row.iter().zip(feature).map(|(w, x)| w * x).sum::<f64>() + self.b1[h]
            })
            .collect();
        let act: Vec<f64> = pre.iter().map(|&z| if z > 0.0 { z } else { 0.0 }).collect();
        let out = (0..embed)
            .map(|e| {
                let row = &self.w2[e * hidden..(e + 1) * hidden];
                row.iter().zip(&act).map(|(w, r)| w * r).sum::<f64>() + self.b2[e]
            })
            .collect();
        Ok(ForwardTrace {
            pre,
            hidden: act,
            embed: out,
        })
    }
}
