//! Tabular data, quantile borders and quantization.
//!
//! Split predicates are always `value <= border`. A quantized value is the
//! number of borders strictly below it, so for border index `b` the predicate
//! holds exactly when `bin <= b`.

use std::io::Write;
use std::path::Path;

use rand::Rng as _;
use rand_distr::StandardNormal;

use crate::rng::{self, Stream};
use crate::{Error, Result};

/// Raw feature matrix (row-major) with one target per row.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    features: Vec<f64>,
    n_features: usize,
    targets: Vec<f64>,
    feature_names: Vec<String>,
}

impl Dataset {
    pub fn new(features: Vec<f64>, n_features: usize, targets: Vec<f64>) -> Result<Self> {
        let names = (1..=n_features).map(|j| format!("x{j}")).collect();
        Self::with_names(features, n_features, targets, names)
    }

    pub fn with_names(
        features: Vec<f64>,
        n_features: usize,
        targets: Vec<f64>,
        feature_names: Vec<String>,
    ) -> Result<Self> {
        if n_features == 0 {
            return Err(Error::InvalidData(
                "dataset needs at least one feature".into(),
            ));
        }
        if targets.is_empty() {
            return Err(Error::Empty("dataset has no rows".into()));
        }
        if features.len() != targets.len() * n_features {
            return Err(Error::DimensionMismatch {
                expected: targets.len() * n_features,
                found: features.len(),
            });
        }
        if feature_names.len() != n_features {
            return Err(Error::DimensionMismatch {
                expected: n_features,
                found: feature_names.len(),
            });
        }
        if let Some(pos) = features.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidData(format!(
                "non-finite feature value in row {}",
                pos / n_features + 1
            )));
        }
        if let Some(pos) = targets.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidData(format!(
                "non-finite target in row {}",
                pos + 1
            )));
        }
        Ok(Self {
            features,
            n_features,
            targets,
            feature_names,
        })
    }

    pub fn n_rows(&self) -> usize {
        self.targets.len()
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    pub fn targets(&self) -> &[f64] {
        &self.targets
    }

    pub fn features(&self) -> &[f64] {
        &self.features
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.features[i * self.n_features..(i + 1) * self.n_features]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.features.chunks_exact(self.n_features)
    }

    /// Values of feature `j` across all rows.
    pub fn column(&self, j: usize) -> impl Iterator<Item = f64> + '_ {
        self.rows().map(move |r| r[j])
    }

    /// Rows `range` as a new dataset.
    pub fn slice(&self, range: std::ops::Range<usize>) -> Result<Dataset> {
        let features =
            self.features[range.start * self.n_features..range.end * self.n_features].to_vec();
        Dataset::with_names(
            features,
            self.n_features,
            self.targets[range].to_vec(),
            self.feature_names.clone(),
        )
    }

    /// Writes the dataset as comma-separated text with a header row; the
    /// target goes last under the column name `target_name`.
    pub fn save_csv(&self, path: impl AsRef<Path>, target_name: &str) -> Result<()> {
        let path = path.as_ref();
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        let mut out = std::io::BufWriter::new(file);
        let write = |out: &mut std::io::BufWriter<std::fs::File>| -> std::io::Result<()> {
            writeln!(out, "{},{}", self.feature_names.join(","), target_name)?;
            for (row, y) in self.rows().zip(&self.targets) {
                for v in row {
                    write!(out, "{v},")?;
                }
                writeln!(out, "{y}")?;
            }
            out.flush()
        };
        write(&mut out).map_err(|e| Error::io(path, e))
    }
}

/// Which column of a CSV file holds the target.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TargetColumn {
    Name(String),
    Index(usize),
}

impl std::str::FromStr for TargetColumn {
    type Err = std::convert::Infallible;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        Ok(match s.parse::<usize>() {
            Ok(i) => TargetColumn::Index(i),
            Err(_) => TargetColumn::Name(s.to_string()),
        })
    }
}

impl std::fmt::Display for TargetColumn {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            TargetColumn::Name(n) => write!(f, "{n:?}"),
            TargetColumn::Index(i) => write!(f, "#{i}"),
        }
    }
}

/// Loads a comma-separated numeric file. All columns except the target become
/// features, in file order. Errors carry the 1-based file line.
pub fn load_csv(
    path: impl AsRef<Path>,
    target: &TargetColumn,
    has_header: bool,
) -> Result<Dataset> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_csv(file, target, has_header)
}

/// Like [`load_csv`] but reads features only (every column is a feature),
/// optionally dropping a target column if present.
pub fn load_features_csv(
    path: impl AsRef<Path>,
    drop: Option<&TargetColumn>,
    has_header: bool,
) -> Result<(Vec<f64>, usize)> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let table = read_table(file, has_header)?;
    let drop_idx = match drop {
        Some(t) => Some(resolve_target(&table.header, table.width, t)?),
        None => None,
    };
    let k = table.width - usize::from(drop_idx.is_some());
    let mut features = Vec::with_capacity(table.cells.len() / table.width.max(1) * k);
    for row in table.cells.chunks_exact(table.width) {
        for (j, v) in row.iter().enumerate() {
            if Some(j) != drop_idx {
                features.push(*v);
            }
        }
    }
    Ok((features, k))
}

struct Table {
    header: Option<Vec<String>>,
    width: usize,
    cells: Vec<f64>,
}

fn read_table<R: std::io::Read>(reader: R, has_header: bool) -> Result<Table> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(reader);
    let mut header = None;
    let mut width = None;
    let mut cells = Vec::new();
    let mut record = csv::StringRecord::new();
    loop {
        let more = rdr.read_record(&mut record).map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            Error::Parse {
                line,
                column: 0,
                message: e.to_string(),
            }
        })?;
        if !more {
            break;
        }
        let line = record.position().map_or(0, |p| p.line());
        if record.len() == 1 && record[0].is_empty() {
            continue;
        }
        if has_header && header.is_none() {
            width = Some(record.len());
            header = Some(record.iter().map(str::to_string).collect());
            continue;
        }
        let w = *width.get_or_insert(record.len());
        if record.len() != w {
            return Err(Error::Parse {
                line,
                column: record.len().min(w) + 1,
                message: format!("expected {w} fields, found {}", record.len()),
            });
        }
        for (j, cell) in record.iter().enumerate() {
            let v: f64 = cell.parse().map_err(|_| Error::Parse {
                line,
                column: j + 1,
                message: format!("non-numeric cell {cell:?}"),
            })?;
            cells.push(v);
        }
    }
    let width = width.unwrap_or(0);
    if cells.is_empty() {
        return Err(Error::Empty("no data rows".into()));
    }
    Ok(Table {
        header,
        width,
        cells,
    })
}

fn resolve_target(
    header: &Option<Vec<String>>,
    width: usize,
    target: &TargetColumn,
) -> Result<usize> {
    match target {
        TargetColumn::Index(i) if *i < width => Ok(*i),
        TargetColumn::Name(name) => header
            .as_ref()
            .and_then(|h| h.iter().position(|c| c == name))
            .ok_or_else(|| Error::MissingTarget(target.to_string())),
        _ => Err(Error::MissingTarget(target.to_string())),
    }
}

fn read_csv<R: std::io::Read>(
    reader: R,
    target: &TargetColumn,
    has_header: bool,
) -> Result<Dataset> {
    let table = read_table(reader, has_header)?;
    let t = resolve_target(&table.header, table.width, target)?;
    let k = table.width - 1;
    if k == 0 {
        return Err(Error::InvalidData(
            "no feature columns besides the target".into(),
        ));
    }
    let n = table.cells.len() / table.width;
    let mut features = Vec::with_capacity(n * k);
    let mut targets = Vec::with_capacity(n);
    for row in table.cells.chunks_exact(table.width) {
        for (j, v) in row.iter().enumerate() {
            if j == t {
                targets.push(*v);
            } else {
                features.push(*v);
            }
        }
    }
    let names = match &table.header {
        Some(h) => h
            .iter()
            .enumerate()
            .filter(|(j, _)| *j != t)
            .map(|(_, s)| s.clone())
            .collect(),
        None => (1..=k).map(|j| format!("x{j}")).collect(),
    };
    Dataset::with_names(features, k, targets, names)
}

/// Per-feature strictly increasing split thresholds.
#[derive(Debug, Clone, PartialEq)]
pub struct BorderSet {
    borders: Vec<Vec<f64>>,
}

impl BorderSet {
    pub fn new(borders: Vec<Vec<f64>>) -> Result<Self> {
        for (j, b) in borders.iter().enumerate() {
            if b.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidData(format!(
                    "non-finite border for feature {j}"
                )));
            }
            if b.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::InvalidData(format!(
                    "borders of feature {j} are not strictly increasing"
                )));
            }
            if b.len() > u16::MAX as usize {
                return Err(Error::InvalidData(format!(
                    "feature {j} has too many borders"
                )));
            }
        }
        Ok(Self { borders })
    }

    pub fn n_features(&self) -> usize {
        self.borders.len()
    }

    pub fn feature(&self, j: usize) -> &[f64] {
        &self.borders[j]
    }

    pub fn as_slices(&self) -> &[Vec<f64>] {
        &self.borders
    }

    /// Number of borders of feature `j` strictly below `value`.
    pub fn bin(&self, j: usize, value: f64) -> u16 {
        self.borders[j].partition_point(|&c| c < value) as u16
    }
}

/// Quantile borders: for `j = 1..=border_count` take sorted position
/// `floor(j * n / (border_count + 1))` and place a border midway between the
/// value just before that position and the next larger distinct value.
pub fn compute_borders(d: &Dataset, border_count: usize) -> Result<BorderSet> {
    if border_count == 0 {
        return Err(Error::InvalidConfig(
            "border_count must be at least 1".into(),
        ));
    }
    let n = d.n_rows();
    let borders = (0..d.n_features())
        .map(|j| {
            let mut values: Vec<f64> = d.column(j).collect();
            values.sort_by(f64::total_cmp);
            let mut out: Vec<f64> = Vec::with_capacity(border_count);
            for q in 1..=border_count {
                let pos = (q * n / (border_count + 1)).clamp(1, n);
                let lo = values[pos - 1];
                let next = values[pos..].iter().copied().find(|&v| v > lo);
                if let Some(hi) = next {
                    let mid = lo + (hi - lo) / 2.0;
                    if out.last().is_none_or(|&last| mid > last) {
                        out.push(mid);
                    }
                }
            }
            out
        })
        .collect();
    BorderSet::new(borders)
}

/// Binned view of a dataset under a fixed border set. Bins are stored
/// column-major.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantizedDataset {
    bins: Vec<u16>,
    n_rows: usize,
    borders: BorderSet,
    targets: Vec<f64>,
}

impl QuantizedDataset {
    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_features(&self) -> usize {
        self.borders.n_features()
    }

    pub fn borders(&self) -> &BorderSet {
        &self.borders
    }

    pub fn targets(&self) -> &[f64] {
        &self.targets
    }

    pub fn column(&self, j: usize) -> &[u16] {
        &self.bins[j * self.n_rows..(j + 1) * self.n_rows]
    }

    pub fn bin(&self, row: usize, j: usize) -> u16 {
        self.bins[j * self.n_rows + row]
    }
}

pub fn quantize(d: &Dataset, b: &BorderSet) -> Result<QuantizedDataset> {
    if b.n_features() != d.n_features() {
        return Err(Error::DimensionMismatch {
            expected: d.n_features(),
            found: b.n_features(),
        });
    }
    let n = d.n_rows();
    let mut bins = Vec::with_capacity(n * d.n_features());
    for j in 0..d.n_features() {
        bins.extend(d.column(j).map(|v| b.bin(j, v)));
    }
    Ok(QuantizedDataset {
        bins,
        n_rows: n,
        borders: b.clone(),
        targets: d.targets().to_vec(),
    })
}

/// Three standard-normal features; label `1{y' > 0}` with
/// `y' ~ N(sin(x1 x2 x3), 1)`. Pure function of `(n, seed)`.
pub fn generate_synthetic(n: usize, seed: u64) -> Result<Dataset> {
    if n == 0 {
        return Err(Error::Empty("synthetic dataset needs n >= 1".into()));
    }
    let mut rng = rng::stream(seed, Stream::Synthetic);
    let mut features = Vec::with_capacity(n * 3);
    let mut targets = Vec::with_capacity(n);
    for _ in 0..n {
        let x: [f64; 3] = std::array::from_fn(|_| rng.sample(StandardNormal));
        let noise: f64 = rng.sample(StandardNormal);
        let latent = (x[0] * x[1] * x[2]).sin() + noise;
        features.extend_from_slice(&x);
        targets.push(if latent > 0.0 { 1.0 } else { 0.0 });
    }
    Dataset::new(features, 3, targets)
}
