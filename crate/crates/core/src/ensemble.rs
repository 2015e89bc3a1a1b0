use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Result, SikError};
use crate::matrix::EmbeddingMatrix;
use crate::partition::{build_partitioning, check_psi, sample_subset, Partitioning};

/// `t` independent hypersphere partitionings fitted on one dataset.
#[derive(Debug, Clone, PartialEq)]
pub struct SphereEnsemble {
    partitionings: Vec<Partitioning>,
    psi: usize,
    d: usize,
    seed: u64,
}

/// Seed for partitioning `index` of an ensemble fitted with `seed`.
///
/// SplitMix64 finalizer applied to `seed + (index + 1) * 0x9E3779B97F4A7C15`
/// (wrapping arithmetic). Each partitioning draws from its own ChaCha8 stream
/// seeded with this value.
pub fn partition_seed(seed: u64, index: usize) -> u64 {
    let mut z = seed.wrapping_add((index as u64).wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Fits `t` partitionings of ψ spheres each.
///
/// The result is a pure function of `(data, psi, t, seed)`, independent of how
/// many worker threads build the partitionings.
pub fn fit_ensemble(data: &EmbeddingMatrix, psi: usize, t: usize, seed: u64) -> Result<SphereEnsemble> {
    check_psi(psi, data.n())?;
    if t < 1 {
        return Err(SikError::InvalidHyperparameter(format!(
            "t = {t} is below the minimum of 1"
        )));
    }
    let partitionings = (0..t)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(partition_seed(seed, i));
            let indices = sample_subset(data, psi, &mut rng)?;
            build_partitioning(data, &indices)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SphereEnsemble {
        partitionings,
        psi,
        d: data.d(),
        seed,
    })
}

impl SphereEnsemble {
    /// Assembles an ensemble from already-built partitionings.
    pub fn from_partitionings(partitionings: Vec<Partitioning>, seed: u64) -> Result<Self> {
        let first = partitionings
            .first()
            .ok_or_else(|| SikError::InvalidHyperparameter("t = 0 is below the minimum of 1".into()))?;
        let (psi, d) = (first.psi(), first.d());
        for p in &partitionings {
            if p.d() != d {
                return Err(SikError::shape("partitioning dimension", d, p.d()));
            }
            if p.psi() != psi {
                return Err(SikError::shape("partitioning psi", psi, p.psi()));
            }
        }
        Ok(Self {
            partitionings,
            psi,
            d,
            seed,
        })
    }

    pub fn partitionings(&self) -> &[Partitioning] {
        &self.partitionings
    }

    pub fn psi(&self) -> usize {
        self.psi
    }

    pub fn t(&self) -> usize {
        self.partitionings.len()
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub(crate) fn check_point(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.d {
            return Err(SikError::shape("point dimension", self.d, x.len()));
        }
        Ok(())
    }

    pub(crate) fn check_matrix(&self, data: &EmbeddingMatrix) -> Result<()> {
        if data.d() != self.d {
            return Err(SikError::shape("matrix dimension", self.d, data.d()));
        }
        Ok(())
    }
}
