//! Experiment runners: single evaluations, repeated seeds, contamination and
//! sensitivity sweeps, and the SIK-vs-IDK scaling benchmark.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::detector::{Detector, IdkDetector, SikDetector};
use crate::error::{Result, SikError};
use crate::eval::auroc::auroc;
use crate::eval::dataset::{LabeledDataset, Split};
use crate::eval::report::{mean_report, BenchRow, ExperimentReport};
use crate::matrix::EmbeddingMatrix;

/// Seeds used when a run does not name its own: five repetitions.
pub const DEFAULT_SEEDS: [u64; 5] = [0, 1, 2, 3, 4];

/// ψ grid of the default hyperparameter sweep.
pub const DEFAULT_PSI_GRID: [usize; 5] = [32, 64, 128, 256, 512];

pub const DEFAULT_T: usize = 200;

/// Fits on the train split, scores the test split.
pub fn run_detector(
    dataset: &LabeledDataset,
    detector: &dyn Detector,
    psi: usize,
    t: usize,
    seed: u64,
) -> Result<ExperimentReport> {
    run_on_split(dataset, &dataset.split(), detector, psi, t, seed)
}

fn run_on_split(
    dataset: &LabeledDataset,
    split: &Split,
    detector: &dyn Detector,
    psi: usize,
    t: usize,
    seed: u64,
) -> Result<ExperimentReport> {
    if split.train.is_empty() || split.test.is_empty() {
        return Err(SikError::InvalidParameter("train and test splits must be non-empty".into()));
    }
    let train = dataset.embeddings.select(&split.train)?;
    let test = dataset.embeddings.select(&split.test)?;
    let test_labels: Vec<bool> = split.test.iter().map(|&i| dataset.labels[i]).collect();

    let start = Instant::now();
    let fitted = detector.fit(&train, psi, t, seed)?;
    let fit_seconds = start.elapsed().as_secs_f64();

    let start = Instant::now();
    let scores = fitted.score(&test)?;
    let score_seconds = start.elapsed().as_secs_f64();

    Ok(ExperimentReport {
        method: detector.name().to_string(),
        psi,
        t,
        seed,
        auroc: auroc(scores.as_slice(), &test_labels)?,
        fit_seconds,
        score_seconds,
        feature_bytes: test.n() * fitted.feature_bytes_per_point() + fitted.reference_bytes(),
    })
}

/// One report per seed.
pub fn run_repeated(
    dataset: &LabeledDataset,
    detector: &dyn Detector,
    psi: usize,
    t: usize,
    seeds: &[u64],
) -> Result<Vec<ExperimentReport>> {
    seeds
        .iter()
        .map(|&seed| run_detector(dataset, detector, psi, t, seed))
        .collect()
}

fn averaged(
    dataset: &LabeledDataset,
    split: &Split,
    detector: &dyn Detector,
    psi: usize,
    t: usize,
    seeds: &[u64],
) -> Result<ExperimentReport> {
    if seeds.is_empty() {
        return Err(SikError::InvalidParameter("at least one seed is required".into()));
    }
    let runs = seeds
        .iter()
        .map(|&seed| run_on_split(dataset, split, detector, psi, t, seed))
        .collect::<Result<Vec<_>>>()?;
    Ok(mean_report(&runs).expect("seeds are non-empty"))
}

/// Moves `round(r · n_train / (1 − r))` test anomalies into the training split,
/// so anomalies make up a fraction `r` of the training data.
pub fn contaminate(dataset: &LabeledDataset, ratio: f64) -> Result<Split> {
    if !(0.0..0.5).contains(&ratio) {
        return Err(SikError::InvalidParameter(format!(
            "contamination ratio {ratio} must lie in [0, 0.5)"
        )));
    }
    let base = dataset.split();
    let inject = (ratio * base.train.len() as f64 / (1.0 - ratio)).round() as usize;
    let pool: Vec<usize> = base.test.iter().copied().filter(|&i| dataset.labels[i]).collect();
    if inject >= pool.len() && inject > 0 {
        return Err(SikError::InvalidParameter(format!(
            "contamination {ratio} needs {inject} anomalies but only {} are available \
             (at least one must remain for testing)",
            pool.len()
        )));
    }
    let moved = &pool[..inject];
    let mut train = base.train.clone();
    train.extend_from_slice(moved);
    let test = base.test.into_iter().filter(|i| !moved.contains(i)).collect();
    Ok(Split { train, test })
}

/// Mean report over `seeds` for each contamination ratio, in the order given.
pub fn contamination_sweep(
    dataset: &LabeledDataset,
    ratios: &[f64],
    detector: &dyn Detector,
    psi: usize,
    t: usize,
    seeds: &[u64],
) -> Result<Vec<ExperimentReport>> {
    ratios
        .iter()
        .map(|&ratio| {
            let split = contaminate(dataset, ratio)?;
            averaged(dataset, &split, detector, psi, t, seeds)
        })
        .collect()
}

/// Mean report over `seeds` for each `(psi, t)` pair, in the order given.
pub fn grid_sweep(
    dataset: &LabeledDataset,
    grid: &[(usize, usize)],
    detector: &dyn Detector,
    seeds: &[u64],
) -> Result<Vec<ExperimentReport>> {
    let split = dataset.split();
    grid.iter()
        .map(|&(psi, t)| averaged(dataset, &split, detector, psi, t, seeds))
        .collect()
}

/// ψ varies at `fixed_t`, then t varies at `fixed_psi`.
pub fn sensitivity_sweep(
    dataset: &LabeledDataset,
    psi_grid: &[usize],
    t_grid: &[usize],
    fixed_psi: usize,
    fixed_t: usize,
    detector: &dyn Detector,
    seeds: &[u64],
) -> Result<Vec<ExperimentReport>> {
    if psi_grid.is_empty() || t_grid.is_empty() {
        return Err(SikError::InvalidParameter("sensitivity grids must be non-empty".into()));
    }
    let grid: Vec<(usize, usize)> = psi_grid
        .iter()
        .map(|&psi| (psi, fixed_t))
        .chain(t_grid.iter().map(|&t| (fixed_psi, t)))
        .collect();
    grid_sweep(dataset, &grid, detector, seeds)
}

fn gaussian_matrix(n: usize, d: usize, seed: u64) -> Result<EmbeddingMatrix> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let values = (0..n * d).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
    EmbeddingMatrix::new(n, d, values)
}

/// Times SIK and IDK on standard-normal data of each size.
///
/// Each size gets its own train and test matrix of `n` rows. IDK fit time
/// includes mapping the full training set to build its kernel mean.
pub fn bench_scaling(d: usize, sizes: &[usize], psi: usize, t: usize, seed: u64) -> Result<Vec<BenchRow>> {
    if sizes.windows(2).any(|w| w[0] > w[1]) {
        return Err(SikError::InvalidParameter("benchmark sizes must be ascending".into()));
    }
    let mut rows = Vec::with_capacity(sizes.len());
    for (k, &n) in sizes.iter().enumerate() {
        let train = gaussian_matrix(n, d, seed.wrapping_add(2 * k as u64))?;
        let test = gaussian_matrix(n, d, seed.wrapping_add(2 * k as u64 + 1))?;

        let start = Instant::now();
        let sik = SikDetector.fit(&train, psi, t, seed)?;
        let sik_fit_seconds = start.elapsed().as_secs_f64();
        let start = Instant::now();
        sik.score(&test)?;
        let sik_score_seconds = start.elapsed().as_secs_f64();

        let start = Instant::now();
        let idk = IdkDetector.fit(&train, psi, t, seed)?;
        let idk_fit_seconds = start.elapsed().as_secs_f64();
        let start = Instant::now();
        idk.score(&test)?;
        let idk_score_seconds = start.elapsed().as_secs_f64();

        rows.push(BenchRow {
            n,
            sik_fit_seconds,
            sik_score_seconds,
            idk_fit_seconds,
            idk_score_seconds,
            sik_feature_bytes: n * sik.feature_bytes_per_point(),
            idk_feature_bytes: n * idk.feature_bytes_per_point(),
        });
    }
    Ok(rows)
}
