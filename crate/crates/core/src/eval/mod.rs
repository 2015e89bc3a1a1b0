//! Evaluation harness: AUROC, datasets, experiment runners and report output.

pub mod auroc;
pub mod dataset;
pub mod harness;
pub mod report;

pub use auroc::auroc;
pub use dataset::{default_split, gen_blobs_with_outliers, read_dataset, write_dataset, DatasetFile, LabeledDataset, Split};
pub use harness::{
    bench_scaling, contaminate, contamination_sweep, grid_sweep, run_detector, run_repeated, sensitivity_sweep,
    DEFAULT_PSI_GRID, DEFAULT_SEEDS, DEFAULT_T,
};
pub use report::{mean_report, BenchRow, ExperimentReport};
