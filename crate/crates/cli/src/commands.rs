use std::fmt;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde_json::json;

use sik_core::eval::report::{
    write_bench_csv, write_bench_jsonl, write_contamination_csv, write_contamination_jsonl, write_reports_csv,
    write_reports_jsonl, write_scores_csv, ContaminationRecord,
};
use sik_core::eval::{
    bench_scaling, contamination_sweep, gen_blobs_with_outliers, grid_sweep, read_dataset, run_repeated,
    write_dataset, DatasetFile, LabeledDataset, Split,
};
use sik_core::features::{write_ik_csv, write_sik_csv};
use sik_core::model_io::model_len;
use sik_core::{
    fit_ensemble, ik_map_batch, load_model, save_model, sik_map_batch, DetectorRegistry, EmbeddingMatrix, SikError,
};

use crate::{BenchArgs, DataArgs, EvalArgs, FeaturesArgs, FitArgs, GenArgs, ScoreArgs, SweepArgs};

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Core(SikError),
}

impl CliError {
    /// A closed downstream pipe (`sik ... | head`) is not a failure.
    pub fn is_broken_pipe(&self) -> bool {
        matches!(self, CliError::Core(SikError::Io(e)) if e.kind() == io::ErrorKind::BrokenPipe)
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Core(e) if e.is_io() => 3,
            CliError::Core(SikError::UnknownMethod { .. }) => 2,
            CliError::Core(_) => 4,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(msg) => f.write_str(msg),
            CliError::Core(e) => e.fmt(f),
        }
    }
}

impl From<SikError> for CliError {
    fn from(e: SikError) -> Self {
        CliError::Core(e)
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Core(SikError::Io(e))
    }
}

type CliResult = Result<(), CliError>;

fn read_input(path: &Path) -> Result<DatasetFile, CliError> {
    read_dataset(path).map_err(|e| match e {
        SikError::Io(io) => SikError::Io(io::Error::new(io.kind(), format!("{}: {io}", path.display()))).into(),
        other => other.into(),
    })
}

fn open_output(path: Option<&Path>) -> Result<Box<dyn Write>, CliError> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn is_jsonl(path: Option<&Path>) -> bool {
    path.is_none_or(|p| p.extension().is_some_and(|e| e == "jsonl" || e == "json"))
}

fn print_json(value: serde_json::Value) {
    println!("{value}");
}

pub fn fit(args: FitArgs) -> CliResult {
    let data = read_input(&args.input)?.matrix;
    let start = Instant::now();
    let ensemble = fit_ensemble(&data, args.psi, args.t, args.seed.seed)?;
    let fit_seconds = start.elapsed().as_secs_f64();
    save_model(&ensemble, &args.model)?;
    print_json(json!({
        "model": args.model.display().to_string(),
        "fit_seconds": fit_seconds,
        "model_bytes": model_len(&ensemble),
        "n": data.n(),
        "d": data.d(),
        "psi": args.psi,
        "t": args.t,
        "seed": args.seed.seed,
    }));
    Ok(())
}

pub fn score(args: ScoreArgs) -> CliResult {
    let registry = DetectorRegistry::with_builtin();
    let detector = registry.get(&args.method)?;
    if detector.requires_reference() && args.train.is_none() {
        return Err(CliError::Usage(format!("method `{}` requires --train", args.method)));
    }
    let ensemble = load_model(&args.model)?;
    let input = read_input(&args.input)?;
    let reference = args.train.as_deref().map(read_input).transpose()?.map(|f| f.matrix);
    let start = Instant::now();
    let fitted = detector.prepare(ensemble, reference.as_ref())?;
    let scores = fitted.score(&input.matrix)?;
    let score_seconds = start.elapsed().as_secs_f64();
    write_scores_csv(&scores, input.labels.as_deref(), open_output(args.output.as_deref())?)?;
    if let Some(path) = &args.output {
        print_json(json!({
            "output": path.display().to_string(),
            "method": args.method,
            "scored": scores.len(),
            "score_seconds": score_seconds,
        }));
    }
    Ok(())
}

/// Builds the evaluation dataset, with an explicit split when a test file is given.
fn load_labeled(data: &DataArgs) -> Result<LabeledDataset, CliError> {
    let input = read_input(&data.input)?;
    let Some(test_path) = &data.test else {
        return Ok(input.into_labeled()?);
    };
    let test = read_input(test_path)?;
    let test_labels = test
        .labels
        .ok_or_else(|| CliError::Core(SikError::InvalidParameter("test set has no label column".into())))?;
    if test.matrix.d() != input.matrix.d() {
        return Err(SikError::Shape {
            context: "test set dimension",
            expected: input.matrix.d(),
            found: test.matrix.d(),
        }
        .into());
    }
    let n_train = input.matrix.n();
    let n_test = test.matrix.n();
    let mut values = input.matrix.as_slice().to_vec();
    values.extend_from_slice(test.matrix.as_slice());
    let matrix = EmbeddingMatrix::new(n_train + n_test, input.matrix.d(), values)?;
    let mut labels = input.labels.unwrap_or_else(|| vec![false; n_train]);
    labels.extend(test_labels);
    let split = Split {
        train: (0..n_train).collect(),
        test: (n_train..n_train + n_test).collect(),
    };
    Ok(LabeledDataset::new(matrix, labels)?.with_split(split)?)
}

fn write_reports(path: Option<&PathBuf>, reports: &[sik_core::eval::ExperimentReport]) -> CliResult {
    let out = open_output(path.map(PathBuf::as_path))?;
    if is_jsonl(path.map(PathBuf::as_path)) {
        write_reports_jsonl(reports, out)?;
    } else {
        write_reports_csv(reports, out)?;
    }
    Ok(())
}

pub fn eval(args: EvalArgs) -> CliResult {
    let dataset = load_labeled(&args.data)?;
    let detector = DetectorRegistry::with_builtin().get(&args.data.method)?;
    if args.data.seeds.is_empty() {
        return Err(CliError::Usage("--seeds must not be empty".into()));
    }
    let reports = run_repeated(&dataset, detector.as_ref(), args.psi, args.t, &args.data.seeds)?;
    write_reports(args.data.output.as_ref(), &reports)?;
    let mean = reports.iter().map(|r| r.auroc).sum::<f64>() / reports.len() as f64;
    eprintln!("{} psi={} t={}: mean AUROC {mean:.4} over {} runs", detector.name(), args.psi, args.t, reports.len());
    if args.data.output.is_some() {
        print_json(json!({
            "method": detector.name(),
            "psi": args.psi,
            "t": args.t,
            "seeds": args.data.seeds,
            "mean_auroc": mean,
        }));
    }
    Ok(())
}

pub fn sweep(args: SweepArgs) -> CliResult {
    let dataset = load_labeled(&args.data)?;
    let detector = DetectorRegistry::with_builtin().get(&args.data.method)?;
    if args.data.seeds.is_empty() {
        return Err(CliError::Usage("--seeds must not be empty".into()));
    }
    let output = args.data.output.as_deref();
    if !args.ratios.is_empty() {
        let psi = args
            .psi
            .ok_or_else(|| CliError::Usage("--ratios requires --psi".into()))?;
        let reports = contamination_sweep(&dataset, &args.ratios, detector.as_ref(), psi, args.t, &args.data.seeds)?;
        let records: Vec<_> = args
            .ratios
            .iter()
            .zip(&reports)
            .map(|(&ratio, r)| ContaminationRecord::new(ratio, r))
            .collect();
        let out = open_output(output)?;
        if is_jsonl(output) {
            write_contamination_jsonl(&records, out)?;
        } else {
            write_contamination_csv(&records, out)?;
        }
        return Ok(());
    }
    if args.psi_grid.is_empty() {
        return Err(CliError::Usage("--psi-grid must not be empty".into()));
    }
    let grid: Vec<(usize, usize)> = args
        .psi_grid
        .iter()
        .map(|&psi| (psi, args.t))
        .chain(args.t_grid.iter().map(|&t| (args.fixed_psi, t)))
        .collect();
    let reports = grid_sweep(&dataset, &grid, detector.as_ref(), &args.data.seeds)?;
    write_reports(args.data.output.as_ref(), &reports)
}

pub fn bench(args: BenchArgs) -> CliResult {
    let rows = bench_scaling(args.dim, &args.sizes, args.psi, args.t, args.seed.seed)?;
    let output = args.output.as_deref();
    let out = open_output(output)?;
    if is_jsonl(output) {
        write_bench_jsonl(&rows, out)?;
    } else {
        write_bench_csv(&rows, out)?;
    }
    Ok(())
}

pub fn gen(args: GenArgs) -> CliResult {
    let ds = gen_blobs_with_outliers(args.normal, args.anomaly, args.dim, args.sep, args.seed.seed)?;
    write_dataset(&args.output, &ds.embeddings, Some(&ds.labels))?;
    print_json(json!({
        "output": args.output.display().to_string(),
        "n": ds.embeddings.n(),
        "d": ds.embeddings.d(),
        "anomalies": ds.anomaly_count(),
        "seed": args.seed.seed,
    }));
    Ok(())
}

pub fn features(args: FeaturesArgs) -> CliResult {
    let ensemble = load_model(&args.model)?;
    let input = read_input(&args.input)?;
    let out = open_output(args.output.as_deref())?;
    match args.kind.as_str() {
        "sik" => write_sik_csv(&sik_map_batch(&ensemble, &input.matrix)?, out)?,
        "ik" => write_ik_csv(&ik_map_batch(&ensemble, &input.matrix)?, out)?,
        other => return Err(CliError::Usage(format!("--kind must be `sik` or `ik`, got `{other}`"))),
    }
    Ok(())
}
