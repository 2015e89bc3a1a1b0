//! Kernels and anomaly scores.
//!
//! All SIK/IK quantities are integer counts divided once by `t`, so scores
//! derived from the two feature maps agree exactly.

use crate::error::{Result, SikError};
use crate::features::{IkFeature, SikFeature};

/// Per-point anomaly scores; higher means more anomalous.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ScoreVector(pub Vec<f64>);

impl ScoreVector {
    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl From<Vec<f64>> for ScoreVector {
    fn from(v: Vec<f64>) -> Self {
        ScoreVector(v)
    }
}

/// Which norm of the dense IK map enters the IK anomaly score.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IkNorm {
    L0,
    L1,
}

/// `⟨φ(x), φ(y)⟩ / t`: fraction of partitionings where both points are outside all spheres.
pub fn sik_kernel(fx: &SikFeature, fy: &SikFeature) -> Result<f64> {
    Ok(fx.and_count(fy)? as f64 / fx.t() as f64)
}

/// `⟨Φ(x), Φ(y)⟩ / t`: fraction of partitionings where both points share a sphere.
pub fn ik_kernel(fx: &IkFeature, fy: &IkFeature) -> Result<f64> {
    fx.check_same_shape(fy)?;
    let shared = fx
        .assignments()
        .iter()
        .zip(fy.assignments())
        .filter(|(a, b)| a.is_some() && a == b)
        .count();
    Ok(shared as f64 / fx.t() as f64)
}

/// Similarity to the ideal anomaly whose feature is all ones: `popcount / t`.
pub fn sik_score(f: &SikFeature) -> f64 {
    f.count_ones() as f64 / f.t() as f64
}

/// `1 − ‖Φ(x)‖ / t`.
///
/// Each ψ-block of Φ holds at most a single one, so the L0 and L1 norms are
/// both the number of covered partitionings.
pub fn ik_score(f: &IkFeature, norm: IkNorm) -> f64 {
    let t = f.t();
    let norm_value = match norm {
        IkNorm::L0 => f.to_dense().iter().filter(|&&b| b != 0).count(),
        IkNorm::L1 => f.covered_count(),
    };
    (t - norm_value) as f64 / t as f64
}

pub fn sik_scores(features: &[SikFeature]) -> ScoreVector {
    features.iter().map(sik_score).collect::<Vec<_>>().into()
}

pub fn ik_scores(features: &[IkFeature], norm: IkNorm) -> ScoreVector {
    features.iter().map(|f| ik_score(f, norm)).collect::<Vec<_>>().into()
}

/// Average of the dense IK maps over a reference set.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelMean {
    t: usize,
    psi: usize,
    mean: Vec<f64>,
}

impl KernelMean {
    pub fn t(&self) -> usize {
        self.t
    }

    pub fn psi(&self) -> usize {
        self.psi
    }

    /// Dense `t × ψ` mean vector, block-major.
    pub fn as_slice(&self) -> &[f64] {
        &self.mean
    }

    pub fn get(&self, partitioning: usize, sphere: usize) -> f64 {
        self.mean[partitioning * self.psi + sphere]
    }

    /// Size of the dense mean vector in bytes.
    pub fn byte_len(&self) -> usize {
        self.mean.len() * std::mem::size_of::<f64>()
    }
}

pub fn idk_fit(train: &[IkFeature]) -> Result<KernelMean> {
    let first = train.first().ok_or(SikError::EmptyReference)?;
    let (t, psi) = (first.t(), first.psi());
    let mut counts = vec![0u64; t * psi];
    for f in train {
        first.check_same_shape(f)?;
        for (i, a) in f.assignments().iter().enumerate() {
            if let Some(j) = a {
                counts[i * psi + *j as usize] += 1;
            }
        }
    }
    let n = train.len() as f64;
    Ok(KernelMean {
        t,
        psi,
        mean: counts.into_iter().map(|c| c as f64 / n).collect(),
    })
}

/// `−⟨Φ(x), mean⟩ / t`, the negated distributional similarity.
pub fn idk_score(f: &IkFeature, mean: &KernelMean) -> Result<f64> {
    if f.t() != mean.t {
        return Err(SikError::shape("IK feature length vs kernel mean", mean.t, f.t()));
    }
    if f.psi() != mean.psi {
        return Err(SikError::shape("IK feature psi vs kernel mean", mean.psi, f.psi()));
    }
    let mut similarity = 0.0;
    for (i, a) in f.assignments().iter().enumerate() {
        if let Some(j) = a {
            similarity += mean.get(i, *j as usize);
        }
    }
    // `+ 0.0` turns -0.0 into 0.0.
    Ok(-(similarity / f.t() as f64) + 0.0)
}

pub fn idk_scores(features: &[IkFeature], mean: &KernelMean) -> Result<ScoreVector> {
    Ok(features
        .iter()
        .map(|f| idk_score(f, mean))
        .collect::<Result<Vec<_>>>()?
        .into())
}

/// Feature types with a point-pair kernel.
pub trait PairKernel {
    fn kernel(&self, other: &Self) -> Result<f64>;
}

impl PairKernel for SikFeature {
    fn kernel(&self, other: &Self) -> Result<f64> {
        sik_kernel(self, other)
    }
}

impl PairKernel for IkFeature {
    fn kernel(&self, other: &Self) -> Result<f64> {
        ik_kernel(self, other)
    }
}

/// Square row-major matrix of pairwise kernel values.
#[derive(Debug, Clone, PartialEq)]
pub struct GramMatrix {
    n: usize,
    values: Vec<f64>,
}

impl GramMatrix {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.n + j]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.values
    }
}

pub fn gram_matrix<F: PairKernel>(features: &[F]) -> Result<GramMatrix> {
    let n = features.len();
    let mut values = vec![0.0; n * n];
    for i in 0..n {
        for j in i..n {
            let k = features[i].kernel(&features[j])?;
            values[i * n + j] = k;
            values[j * n + i] = k;
        }
    }
    Ok(GramMatrix { n, values })
}
