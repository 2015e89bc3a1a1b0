//! Labeled datasets: synthetic generation and the CSV / `SIKD` file formats.
//!
//! `SIKD` layout (little-endian): `b"SIKD"`, `n: u64`, `d: u64`, then `n × d`
//! f32 values row-major, then optionally `n` label bytes (0 = normal, 1 = anomaly).

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Result, SikError};
use crate::matrix::EmbeddingMatrix;

pub const DATASET_MAGIC: &[u8; 4] = b"SIKD";

/// Row indices used for fitting and for scoring.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Split {
    pub train: Vec<usize>,
    pub test: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LabeledDataset {
    pub embeddings: EmbeddingMatrix,
    /// `true` marks an anomaly.
    pub labels: Vec<bool>,
    pub split: Option<Split>,
}

impl LabeledDataset {
    pub fn new(embeddings: EmbeddingMatrix, labels: Vec<bool>) -> Result<Self> {
        if labels.len() != embeddings.n() {
            return Err(SikError::shape("label count", embeddings.n(), labels.len()));
        }
        Ok(Self {
            embeddings,
            labels,
            split: None,
        })
    }

    pub fn with_split(mut self, split: Split) -> Result<Self> {
        let n = self.embeddings.n();
        if let Some(&bad) = split.train.iter().chain(&split.test).find(|&&i| i >= n) {
            return Err(SikError::InvalidParameter(format!("split index {bad} out of range for {n} rows")));
        }
        self.split = Some(split);
        Ok(self)
    }

    /// The stored split, or [`default_split`] of the labels.
    pub fn split(&self) -> Split {
        self.split.clone().unwrap_or_else(|| default_split(&self.labels))
    }

    pub fn anomaly_count(&self) -> usize {
        self.labels.iter().filter(|&&l| l).count()
    }
}

/// Normal rows alternate between train (even position among normals) and test;
/// every anomaly goes to test.
pub fn default_split(labels: &[bool]) -> Split {
    let mut split = Split {
        train: Vec::new(),
        test: Vec::new(),
    };
    let mut normal_rank = 0;
    for (i, &anomaly) in labels.iter().enumerate() {
        if anomaly {
            split.test.push(i);
        } else {
            if normal_rank % 2 == 0 {
                split.train.push(i);
            } else {
                split.test.push(i);
            }
            normal_rank += 1;
        }
    }
    split
}

/// Gaussian normals around the origin plus anomalies in a far shell.
///
/// Normals are `N(0, I_d)`. Anomalies take a uniformly random direction and a
/// radius uniform in `[r, 1.5 r]` with `r = separation · √d`. Normals come first,
/// then anomalies.
pub fn gen_blobs_with_outliers(
    n_normal: usize,
    n_anomaly: usize,
    d: usize,
    separation: f64,
    seed: u64,
) -> Result<LabeledDataset> {
    if n_normal < 1 || n_anomaly < 1 {
        return Err(SikError::InvalidParameter(format!(
            "need at least one normal and one anomaly, got {n_normal} and {n_anomaly}"
        )));
    }
    if d < 1 {
        return Err(SikError::InvalidParameter("dimension must be at least 1".into()));
    }
    if !(separation > 0.0 && separation.is_finite()) {
        return Err(SikError::InvalidParameter(format!(
            "separation must be positive and finite, got {separation}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut values = Vec::with_capacity((n_normal + n_anomaly) * d);
    for _ in 0..n_normal * d {
        values.push(rng.sample::<f64, _>(StandardNormal));
    }
    let inner = separation * (d as f64).sqrt();
    for _ in 0..n_anomaly {
        let direction: Vec<f64> = loop {
            let v: Vec<f64> = (0..d).map(|_| rng.sample(StandardNormal)).collect();
            let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            if norm > 1e-12 {
                break v.into_iter().map(|x| x / norm).collect();
            }
        };
        let radius = inner * (1.0 + 0.5 * rng.random::<f64>());
        values.extend(direction.into_iter().map(|x| x * radius));
    }
    let labels = (0..n_normal + n_anomaly).map(|i| i >= n_normal).collect();
    LabeledDataset::new(EmbeddingMatrix::new(n_normal + n_anomaly, d, values)?, labels)
}

/// A matrix read from disk, with labels when the file carries them.
#[derive(Debug, Clone, PartialEq)]
pub struct DatasetFile {
    pub matrix: EmbeddingMatrix,
    pub labels: Option<Vec<bool>>,
}

impl DatasetFile {
    pub fn into_labeled(self) -> Result<LabeledDataset> {
        let labels = self
            .labels
            .ok_or_else(|| SikError::InvalidParameter("dataset has no label column".into()))?;
        LabeledDataset::new(self.matrix, labels)
    }
}

fn is_binary_path(path: &Path) -> bool {
    path.extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("sikd") || e.eq_ignore_ascii_case("bin"))
}

/// Reads `.sikd`/`.bin` as `SIKD`, anything else as CSV.
pub fn read_dataset(path: impl AsRef<Path>) -> Result<DatasetFile> {
    let path = path.as_ref();
    let file = BufReader::new(File::open(path)?);
    if is_binary_path(path) {
        read_sikd(file)
    } else {
        read_csv(file)
    }
}

pub fn write_dataset(path: impl AsRef<Path>, matrix: &EmbeddingMatrix, labels: Option<&[bool]>) -> Result<()> {
    let path = path.as_ref();
    let out = BufWriter::new(File::create(path)?);
    if is_binary_path(path) {
        write_sikd(out, matrix, labels)
    } else {
        write_csv(out, matrix, labels)
    }
}

fn parse_label(field: &str, row: usize) -> Result<bool> {
    match field.trim() {
        "0" | "0.0" | "false" => Ok(false),
        "1" | "1.0" | "true" => Ok(true),
        other => Err(SikError::format("csv", format!("row {row}: label `{other}` is not 0 or 1"))),
    }
}

/// CSV with an optional header row. The last column holds labels when the
/// header names it `label`.
pub fn read_csv<R: Read>(input: R) -> Result<DatasetFile> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_reader(input);
    let mut records = reader.records();
    let first = records
        .next()
        .ok_or_else(|| SikError::format("csv", "file is empty"))??;
    let is_header = first.iter().any(|f| f.parse::<f64>().is_err());
    let labeled = is_header && first.iter().next_back().is_some_and(|f| f.eq_ignore_ascii_case("label"));

    let mut values = Vec::new();
    let mut labels = Vec::new();
    let mut width = None;
    let pending = if is_header { None } else { Some(Ok(first)) };
    for (row, record) in pending.into_iter().chain(records).enumerate() {
        let record = record?;
        let fields: Vec<&str> = record.iter().collect();
        let feature_count = if labeled { fields.len().saturating_sub(1) } else { fields.len() };
        match width {
            None => width = Some(feature_count),
            Some(w) if w != feature_count => {
                return Err(SikError::format("csv", format!("row {row} has {feature_count} features, expected {w}")))
            }
            _ => {}
        }
        for f in &fields[..feature_count] {
            let v = f
                .parse::<f64>()
                .map_err(|_| SikError::format("csv", format!("row {row}: `{f}` is not a number")))?;
            values.push(v);
        }
        if labeled {
            labels.push(parse_label(fields[feature_count], row)?);
        }
    }
    let d = width.unwrap_or(0);
    if d == 0 || values.is_empty() {
        return Err(SikError::format("csv", "no data rows"));
    }
    let matrix = EmbeddingMatrix::new(values.len() / d, d, values)?;
    Ok(DatasetFile {
        matrix,
        labels: labeled.then_some(labels),
    })
}

/// Writes a header (`x0..x{d-1}[,label]`) and rows in shortest round-trip form.
pub fn write_csv<W: Write>(out: W, matrix: &EmbeddingMatrix, labels: Option<&[bool]>) -> Result<()> {
    if let Some(l) = labels {
        if l.len() != matrix.n() {
            return Err(SikError::shape("label count", matrix.n(), l.len()));
        }
    }
    let mut w = csv::Writer::from_writer(out);
    let mut header: Vec<String> = (0..matrix.d()).map(|j| format!("x{j}")).collect();
    if labels.is_some() {
        header.push("label".into());
    }
    w.write_record(&header)?;
    for (i, row) in matrix.rows().enumerate() {
        let mut record: Vec<String> = row.iter().map(|v| format!("{v:?}")).collect();
        if let Some(l) = labels {
            record.push(if l[i] { "1" } else { "0" }.into());
        }
        w.write_record(&record)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_sikd<R: Read>(mut input: R) -> Result<DatasetFile> {
    let mut bytes = Vec::new();
    input.read_to_end(&mut bytes)?;
    if bytes.len() < 20 || &bytes[..4] != DATASET_MAGIC {
        return Err(SikError::format("SIKD dataset", "missing SIKD magic or header"));
    }
    let n = u64::from_le_bytes(bytes[4..12].try_into().unwrap());
    let d = u64::from_le_bytes(bytes[12..20].try_into().unwrap());
    let cells = n
        .checked_mul(d)
        .and_then(|c| usize::try_from(c).ok())
        .ok_or_else(|| SikError::format("SIKD dataset", "header dimensions overflow"))?;
    let (n, d) = (n as usize, d as usize);
    let body = &bytes[20..];
    let value_bytes = cells
        .checked_mul(4)
        .ok_or_else(|| SikError::format("SIKD dataset", "header dimensions overflow"))?;
    let labels = if body.len() == value_bytes {
        None
    } else if body.len() == value_bytes + n {
        let block = &body[value_bytes..];
        if let Some(b) = block.iter().find(|&&b| b > 1) {
            return Err(SikError::format("SIKD dataset", format!("label byte {b} is not 0 or 1")));
        }
        Some(block.iter().map(|&b| b == 1).collect())
    } else {
        return Err(SikError::format(
            "SIKD dataset",
            format!("body has {} bytes, expected {value_bytes} or {}", body.len(), value_bytes + n),
        ));
    };
    let floats: Vec<f32> = body[..value_bytes]
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes(c.try_into().unwrap()))
        .collect();
    Ok(DatasetFile {
        matrix: EmbeddingMatrix::from_f32(n, d, &floats)?,
        labels,
    })
}

/// Values are narrowed to f32.
pub fn write_sikd<W: Write>(mut out: W, matrix: &EmbeddingMatrix, labels: Option<&[bool]>) -> Result<()> {
    out.write_all(DATASET_MAGIC)?;
    out.write_all(&(matrix.n() as u64).to_le_bytes())?;
    out.write_all(&(matrix.d() as u64).to_le_bytes())?;
    for &v in matrix.as_slice() {
        out.write_all(&(v as f32).to_le_bytes())?;
    }
    if let Some(l) = labels {
        if l.len() != matrix.n() {
            return Err(SikError::shape("label count", matrix.n(), l.len()));
        }
        let block: Vec<u8> = l.iter().map(|&b| u8::from(b)).collect();
        out.write_all(&block)?;
    }
    out.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distance::euclidean;

    #[test]
    fn blobs_guard_counts() {
        assert!(gen_blobs_with_outliers(10, 0, 2, 1.0, 0).is_err());
        assert!(gen_blobs_with_outliers(0, 3, 2, 1.0, 0).is_err());
        assert!(gen_blobs_with_outliers(10, 3, 0, 1.0, 0).is_err());
        assert!(gen_blobs_with_outliers(10, 3, 2, 0.0, 0).is_err());
    }

    #[test]
    fn blobs_are_separated() {
        let ds = gen_blobs_with_outliers(500, 25, 8, 10.0, 1).unwrap();
        let origin = [0.0; 8];
        let mut max_normal: f64 = 0.0;
        let mut min_anomaly = f64::INFINITY;
        for (row, &anomaly) in ds.embeddings.rows().zip(&ds.labels) {
            let r = euclidean(row, &origin);
            if anomaly {
                min_anomaly = min_anomaly.min(r);
            } else {
                max_normal = max_normal.max(r);
            }
        }
        assert!(min_anomaly >= 10.0 * 8f64.sqrt() - 1e-9);
        assert!(min_anomaly > max_normal);
        assert_eq!(ds.anomaly_count(), 25);
    }

    #[test]
    fn blobs_deterministic() {
        let a = gen_blobs_with_outliers(50, 5, 3, 4.0, 9).unwrap();
        let b = gen_blobs_with_outliers(50, 5, 3, 4.0, 9).unwrap();
        let bits = |d: &LabeledDataset| d.embeddings.as_slice().iter().map(|v| v.to_bits()).collect::<Vec<_>>();
        assert_eq!(bits(&a), bits(&b));
        assert_eq!(a.labels, b.labels);
    }

    #[test]
    fn default_split_alternates_normals() {
        let split = default_split(&[false, true, false, false, true, false, false]);
        assert_eq!(split.train, vec![0, 3, 6]);
        assert_eq!(split.test, vec![1, 2, 4, 5]);
    }

    #[test]
    fn csv_round_trip_and_header_detection() {
        let m = EmbeddingMatrix::from_rows(&[[0.1, -2.5], [1e-300, 3.0]]).unwrap();
        let labels = [false, true];
        let mut buf = Vec::new();
        write_csv(&mut buf, &m, Some(&labels)).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("x0,x1,label\n"));
        let back = read_csv(buf.as_slice()).unwrap();
        assert_eq!(back.matrix, m);
        assert_eq!(back.labels.as_deref(), Some(&labels[..]));

        let plain = read_csv("1,2\n3,4\n".as_bytes()).unwrap();
        assert_eq!(plain.matrix.n(), 2);
        assert!(plain.labels.is_none());
        let header_no_label = read_csv("a,b\n1,2\n".as_bytes()).unwrap();
        assert_eq!(header_no_label.matrix.n(), 1);
        assert!(header_no_label.labels.is_none());

        assert!(read_csv("x,label\n1,2\n".as_bytes()).is_err());
        assert!(read_csv("1,2\n3\n".as_bytes()).is_err());
        assert!(read_csv("".as_bytes()).is_err());
    }

    #[test]
    fn sikd_layout_and_labels() {
        let m = EmbeddingMatrix::from_rows(&[[0.5, 1.0, -2.0], [4.0, 0.25, 8.0]]).unwrap();
        let mut buf = Vec::new();
        write_sikd(&mut buf, &m, Some(&[true, false])).unwrap();
        assert_eq!(&buf[..4], b"SIKD");
        assert_eq!(u64::from_le_bytes(buf[4..12].try_into().unwrap()), 2);
        assert_eq!(u64::from_le_bytes(buf[12..20].try_into().unwrap()), 3);
        assert_eq!(buf.len(), 20 + 6 * 4 + 2);
        let back = read_sikd(buf.as_slice()).unwrap();
        assert_eq!(back.matrix, m);
        assert_eq!(back.labels, Some(vec![true, false]));

        let mut unlabeled = Vec::new();
        write_sikd(&mut unlabeled, &m, None).unwrap();
        assert_eq!(read_sikd(unlabeled.as_slice()).unwrap().labels, None);
        assert!(read_sikd(&unlabeled[..unlabeled.len() - 1]).is_err());
        let mut bad_label = buf.clone();
        *bad_label.last_mut().unwrap() = 7;
        assert!(read_sikd(bad_label.as_slice()).is_err());
    }
}
