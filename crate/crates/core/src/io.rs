//! File formats: headerless CSV matrices, the text model container and
//! PGM rendering of grid-shaped dictionary elements.
//!
//! All writers go through a temporary file in the target directory followed
//! by a rename.

use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use log::warn;
use ndarray::{Array2, ArrayView1, ArrayView2};

use crate::error::{Error, Result};
use crate::groups::GridSpec;
use crate::pipeline::order_by_explained_variance;
use crate::regularizer::Partition;
use crate::solver::{CoeffNorm, FactorModel, SolverConfig};

const MODEL_MAGIC: &str = "# sspca-model v1";
const SIZE_WARNING: usize = 10_000_000;

/// Writes `contents` to `path` atomically.
pub fn write_atomic(path: impl AsRef<Path>, contents: &[u8]) -> Result<()> {
    let path = path.as_ref();
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d.to_path_buf(),
        _ => PathBuf::from("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(&dir).map_err(|e| Error::io(&dir, e))?;
    tmp.write_all(contents).map_err(|e| Error::io(path, e))?;
    tmp.persist(path).map_err(|e| Error::io(path, e.error))?;
    Ok(())
}

fn read_to_string(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

/// Parses headerless CSV (one observation per row). Blank lines are skipped.
pub fn parse_matrix(text: &str) -> Result<Array2<f64>> {
    parse_matrix_at(text, 0)
}

// `line_offset` shifts reported line numbers for blocks embedded in a file.
fn parse_matrix_at(text: &str, line_offset: usize) -> Result<Array2<f64>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut data = Vec::new();
    let mut ncols: Option<usize> = None;
    let mut nrows = 0;
    for record in reader.records() {
        let record = record.map_err(|e| Error::Parse {
            line: line_offset + e.position().map(|p| p.line() as usize).unwrap_or(0),
            column: 0,
            message: e.to_string(),
        })?;
        let line = line_offset + record.position().map(|p| p.line() as usize).unwrap_or(nrows + 1);
        if record.len() == 1 && record[0].is_empty() {
            continue;
        }
        match ncols {
            None => ncols = Some(record.len()),
            Some(c) if c != record.len() => {
                return Err(Error::Parse {
                    line,
                    column: record.len().min(c) + 1,
                    message: format!("ragged row: expected {c} fields, found {}", record.len()),
                })
            }
            _ => {}
        }
        for (j, field) in record.iter().enumerate() {
            let value: f64 = field.parse().map_err(|_| Error::Parse {
                line,
                column: j + 1,
                message: format!("`{field}` is not a number"),
            })?;
            if !value.is_finite() {
                return Err(Error::Parse {
                    line,
                    column: j + 1,
                    message: format!("non-finite value `{field}`"),
                });
            }
            data.push(value);
        }
        nrows += 1;
    }
    let ncols = ncols.unwrap_or(0);
    if nrows * ncols > SIZE_WARNING {
        warn!("matrix has {} entries; CSV is slow at this size", nrows * ncols);
    }
    Array2::from_shape_vec((nrows, ncols), data)
        .map_err(|e| Error::InvalidInput(format!("matrix shape: {e}")))
}

pub fn load_matrix(path: impl AsRef<Path>) -> Result<Array2<f64>> {
    let path = path.as_ref();
    parse_matrix(&read_to_string(path)?).map_err(|e| match e {
        Error::Parse { line, column, message } => Error::Parse {
            line,
            column,
            message: format!("{}: {message}", path.display()),
        },
        other => other,
    })
}

/// CSV text with shortest round-trip float formatting.
pub fn format_matrix(m: ArrayView2<f64>) -> String {
    let mut out = String::new();
    for row in m.rows() {
        for (j, v) in row.iter().enumerate() {
            if j > 0 {
                out.push(',');
            }
            write!(out, "{v}").unwrap();
        }
        out.push('\n');
    }
    out
}

pub fn save_matrix(m: ArrayView2<f64>, path: impl AsRef<Path>) -> Result<()> {
    if m.len() > SIZE_WARNING {
        warn!("writing {} entries as CSV", m.len());
    }
    write_atomic(path, format_matrix(m).as_bytes())
}

/// One integer label per line.
pub fn load_labels(path: impl AsRef<Path>) -> Result<Vec<usize>> {
    let path = path.as_ref();
    read_to_string(path)?
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            l.trim().parse().map_err(|_| Error::Parse {
                line: i + 1,
                column: 1,
                message: format!("{}: `{}` is not a label", path.display(), l.trim()),
            })
        })
        .collect()
}

/// Model file header fields.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelHeader {
    pub alpha: f64,
    pub lambda: f64,
    pub nonneg: bool,
    pub coeff_norm: CoeffNorm,
}

impl From<&SolverConfig> for ModelHeader {
    fn from(cfg: &SolverConfig) -> Self {
        ModelHeader {
            alpha: cfg.alpha,
            lambda: cfg.lambda,
            nonneg: cfg.nonneg,
            coeff_norm: cfg.coeff_norm,
        }
    }
}

/// Serializes a model:
///
/// ```text
/// # sspca-model v1
/// n=<n>
/// p=<p>
/// r=<r>
/// alpha=<α>
/// lambda=<λ>
/// nonneg=<bool>
/// coeff_norm=l2|l1
/// partition=1,2;3
/// [U]
/// <n CSV rows>
/// [V]
/// <p CSV rows>
/// ```
pub fn format_model(model: &FactorModel, header: &ModelHeader) -> String {
    let mut out = String::new();
    writeln!(out, "{MODEL_MAGIC}").unwrap();
    writeln!(out, "n={}", model.n()).unwrap();
    writeln!(out, "p={}", model.p()).unwrap();
    writeln!(out, "r={}", model.r()).unwrap();
    writeln!(out, "alpha={}", header.alpha).unwrap();
    writeln!(out, "lambda={}", header.lambda).unwrap();
    writeln!(out, "nonneg={}", header.nonneg).unwrap();
    writeln!(out, "coeff_norm={}", header.coeff_norm.as_str()).unwrap();
    writeln!(out, "partition={}", model.partition).unwrap();
    out.push_str("[U]\n");
    out.push_str(&format_matrix(model.u.view()));
    out.push_str("[V]\n");
    out.push_str(&format_matrix(model.v.view()));
    out
}

pub fn save_model(model: &FactorModel, header: &ModelHeader, path: impl AsRef<Path>) -> Result<()> {
    write_atomic(path, format_model(model, header).as_bytes())
}

pub fn parse_model(text: &str) -> Result<(FactorModel, ModelHeader)> {
    let mismatch = |msg: String| Error::DimensionMismatch(format!("model file: {msg}"));
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, first)) if first.trim() == MODEL_MAGIC => {}
        Some((_, first)) => {
            return Err(Error::InvalidInput(format!(
                "unsupported model version `{}` (expected `{MODEL_MAGIC}`)",
                first.trim()
            )))
        }
        None => return Err(mismatch("file is empty".into())),
    }
    let mut fields = std::collections::HashMap::new();
    let mut u_start = None;
    for (i, line) in lines.by_ref() {
        let line = line.trim();
        if line == "[U]" {
            u_start = Some(i + 1);
            break;
        }
        if let Some((k, v)) = line.split_once('=') {
            fields.insert(k.trim().to_string(), v.trim().to_string());
        }
    }
    let u_start = u_start.ok_or_else(|| mismatch("missing [U] block".into()))?;
    let get = |key: &str| -> Result<&String> {
        fields
            .get(key)
            .ok_or_else(|| mismatch(format!("missing header field `{key}`")))
    };
    let num = |key: &str| -> Result<usize> {
        get(key)?
            .parse()
            .map_err(|_| Error::InvalidInput(format!("model file: bad `{key}`")))
    };
    let real = |key: &str| -> Result<f64> {
        get(key)?
            .parse()
            .map_err(|_| Error::InvalidInput(format!("model file: bad `{key}`")))
    };
    let (n, p, r) = (num("n")?, num("p")?, num("r")?);
    let header = ModelHeader {
        alpha: real("alpha")?,
        lambda: real("lambda")?,
        nonneg: get("nonneg")?
            .parse()
            .map_err(|_| Error::InvalidInput("model file: bad `nonneg`".into()))?,
        coeff_norm: get("coeff_norm")?.parse()?,
    };
    let partition = Partition::from_text(get("partition")?, r)?;

    let body: Vec<&str> = text.lines().skip(u_start).collect();
    let v_marker = body
        .iter()
        .position(|l| l.trim() == "[V]")
        .ok_or_else(|| mismatch("missing [V] block".into()))?;
    let u = parse_matrix_at(&body[..v_marker].join("\n"), u_start)?;
    let v = parse_matrix_at(&body[v_marker + 1..].join("\n"), u_start + v_marker + 1)?;
    let shape_ok = |m: &Array2<f64>, rows: usize| m.nrows() == rows && (m.ncols() == r || rows == 0);
    if !shape_ok(&u, n) {
        return Err(mismatch(format!("header says U is {n}x{r}, block is {}x{}", u.nrows(), u.ncols())));
    }
    if !shape_ok(&v, p) {
        return Err(mismatch(format!("header says V is {p}x{r}, block is {}x{}", v.nrows(), v.ncols())));
    }
    let u = if n == 0 { Array2::zeros((0, r)) } else { u };
    Ok((FactorModel::new(u, v, partition)?, header))
}

pub fn load_model(path: impl AsRef<Path>) -> Result<(FactorModel, ModelHeader)> {
    parse_model(&read_to_string(path.as_ref())?)
}

/// P2 (ASCII) graymap of one element, min → 0 and max → 255; a constant
/// element renders as uniform 128.
pub fn format_pgm(values: ArrayView1<f64>, height: usize, width: usize) -> Result<String> {
    if values.len() != height * width {
        return Err(Error::DimensionMismatch(format!(
            "{} values for a {height}x{width} image",
            values.len()
        )));
    }
    let (lo, hi) = values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    let level = |v: f64| -> u8 {
        if hi > lo {
            ((v - lo) / (hi - lo) * 255.0).round() as u8
        } else {
            128
        }
    };
    let mut out = format!("P2\n{width} {height}\n255\n");
    for row in 0..height {
        let line: Vec<String> = (0..width)
            .map(|col| level(values[row * width + col]).to_string())
            .collect();
        out.push_str(&line.join(" "));
        out.push('\n');
    }
    Ok(out)
}

/// Writes one PGM per dictionary element, ordered by explained variance,
/// to `<prefix>NNN.pgm`. Returns the written paths.
pub fn render_dictionary(model: &FactorModel, grid: &GridSpec, prefix: impl AsRef<Path>) -> Result<Vec<PathBuf>> {
    let (h, w) = grid.as_2d().ok_or_else(|| {
        Error::UnsupportedGeometry(format!("rendering needs a 2D grid, got {:?}", grid.dims()))
    })?;
    if grid.p() != model.p() {
        return Err(Error::DimensionMismatch(format!(
            "grid has {} cells, dictionary has {} rows",
            grid.p(),
            model.p()
        )));
    }
    let (ordered, _) = order_by_explained_variance(model);
    let prefix = prefix.as_ref().to_string_lossy().into_owned();
    let mut paths = Vec::with_capacity(model.r());
    for (k, col) in ordered.v.columns().into_iter().enumerate() {
        let path = PathBuf::from(format!("{prefix}{:03}.pgm", k + 1));
        write_atomic(&path, format_pgm(col, h, w)?.as_bytes())?;
        paths.push(path);
    }
    Ok(paths)
}
