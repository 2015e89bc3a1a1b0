//! Detector strategies selectable by name.
//!
//! Every detector shares the hypersphere ensemble and differs in what it
//! computes from it. The built-in [`DetectorRegistry`] knows `sik`, `ik`
//! (alias `ik-l0`), `ik-l1` and `idk`.

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::ensemble::{fit_ensemble, SphereEnsemble};
use crate::error::{Result, SikError};
use crate::features::{ik_map_batch, sik_map_batch, IkFeature, SikFeature};
use crate::matrix::EmbeddingMatrix;
use crate::scoring::{idk_fit, idk_scores, ik_scores, sik_scores, IkNorm, KernelMean, ScoreVector};

/// A family member: turns an ensemble (plus optional reference data) into a scorer.
pub trait Detector: Send + Sync {
    fn name(&self) -> &str;

    /// Whether [`Detector::prepare`] needs the training matrix.
    fn requires_reference(&self) -> bool {
        false
    }

    fn prepare(
        &self,
        ensemble: SphereEnsemble,
        reference: Option<&EmbeddingMatrix>,
    ) -> Result<Box<dyn FittedDetector>>;

    fn fit(&self, train: &EmbeddingMatrix, psi: usize, t: usize, seed: u64) -> Result<Box<dyn FittedDetector>> {
        let ensemble = fit_ensemble(train, psi, t, seed)?;
        self.prepare(ensemble, Some(train))
    }
}

pub trait FittedDetector: Send + Sync {
    fn ensemble(&self) -> &SphereEnsemble;

    fn score(&self, data: &EmbeddingMatrix) -> Result<ScoreVector>;

    /// Bytes per scored point in the detector's feature store.
    fn feature_bytes_per_point(&self) -> usize;

    /// Bytes held in addition to the per-point store (the mapped reference set for IDK).
    fn reference_bytes(&self) -> usize {
        0
    }
}

pub struct SikDetector;

struct FittedSik {
    ensemble: SphereEnsemble,
}

impl Detector for SikDetector {
    fn name(&self) -> &str {
        "sik"
    }

    fn prepare(&self, ensemble: SphereEnsemble, _: Option<&EmbeddingMatrix>) -> Result<Box<dyn FittedDetector>> {
        Ok(Box::new(FittedSik { ensemble }))
    }
}

impl FittedDetector for FittedSik {
    fn ensemble(&self) -> &SphereEnsemble {
        &self.ensemble
    }

    fn score(&self, data: &EmbeddingMatrix) -> Result<ScoreVector> {
        Ok(sik_scores(&sik_map_batch(&self.ensemble, data)?))
    }

    fn feature_bytes_per_point(&self) -> usize {
        SikFeature::encoded_len(self.ensemble.t())
    }
}

pub struct IkDetector {
    pub norm: IkNorm,
}

struct FittedIk {
    ensemble: SphereEnsemble,
    norm: IkNorm,
}

impl Detector for IkDetector {
    fn name(&self) -> &str {
        match self.norm {
            IkNorm::L0 => "ik",
            IkNorm::L1 => "ik-l1",
        }
    }

    fn prepare(&self, ensemble: SphereEnsemble, _: Option<&EmbeddingMatrix>) -> Result<Box<dyn FittedDetector>> {
        Ok(Box::new(FittedIk {
            ensemble,
            norm: self.norm,
        }))
    }
}

impl FittedDetector for FittedIk {
    fn ensemble(&self) -> &SphereEnsemble {
        &self.ensemble
    }

    fn score(&self, data: &EmbeddingMatrix) -> Result<ScoreVector> {
        Ok(ik_scores(&ik_map_batch(&self.ensemble, data)?, self.norm))
    }

    fn feature_bytes_per_point(&self) -> usize {
        IkFeature::dense_len(self.ensemble.psi(), self.ensemble.t())
    }
}

/// Kernel-mean baseline: maps the whole reference set, scores by negated similarity to its mean.
pub struct IdkDetector;

struct FittedIdk {
    ensemble: SphereEnsemble,
    mean: KernelMean,
    reference_points: usize,
}

impl Detector for IdkDetector {
    fn name(&self) -> &str {
        "idk"
    }

    fn requires_reference(&self) -> bool {
        true
    }

    fn prepare(
        &self,
        ensemble: SphereEnsemble,
        reference: Option<&EmbeddingMatrix>,
    ) -> Result<Box<dyn FittedDetector>> {
        let reference = reference.ok_or(SikError::EmptyReference)?;
        let mapped = ik_map_batch(&ensemble, reference)?;
        let mean = idk_fit(&mapped)?;
        Ok(Box::new(FittedIdk {
            ensemble,
            mean,
            reference_points: reference.n(),
        }))
    }
}

impl FittedDetector for FittedIdk {
    fn ensemble(&self) -> &SphereEnsemble {
        &self.ensemble
    }

    fn score(&self, data: &EmbeddingMatrix) -> Result<ScoreVector> {
        idk_scores(&ik_map_batch(&self.ensemble, data)?, &self.mean)
    }

    fn feature_bytes_per_point(&self) -> usize {
        IkFeature::dense_len(self.ensemble.psi(), self.ensemble.t())
    }

    fn reference_bytes(&self) -> usize {
        self.reference_points * self.feature_bytes_per_point() + self.mean.byte_len()
    }
}

/// Name → detector lookup.
#[derive(Clone, Default)]
pub struct DetectorRegistry {
    detectors: BTreeMap<String, Arc<dyn Detector>>,
}

impl DetectorRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_builtin() -> Self {
        let mut registry = Self::new();
        registry.register(Arc::new(SikDetector));
        registry.register(Arc::new(IkDetector { norm: IkNorm::L0 }));
        registry.register_as("ik-l0", Arc::new(IkDetector { norm: IkNorm::L0 }));
        registry.register(Arc::new(IkDetector { norm: IkNorm::L1 }));
        registry.register(Arc::new(IdkDetector));
        registry
    }

    /// Registers under the detector's own name, replacing any previous entry.
    pub fn register(&mut self, detector: Arc<dyn Detector>) {
        let name = detector.name().to_string();
        self.detectors.insert(name, detector);
    }

    pub fn register_as(&mut self, name: &str, detector: Arc<dyn Detector>) {
        self.detectors.insert(name.to_string(), detector);
    }

    pub fn get(&self, name: &str) -> Result<Arc<dyn Detector>> {
        self.detectors
            .get(&name.to_ascii_lowercase())
            .cloned()
            .ok_or_else(|| SikError::UnknownMethod {
                name: name.to_string(),
                available: self.names().collect::<Vec<_>>().join(", "),
            })
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.detectors.keys().map(String::as_str)
    }
}
