//! Reading and writing the UCR archive row format.
//!
//! Each record is one line: `label<delim>v1<delim>v2...`. Records may differ
//! in length. Values are written with 17 significant digits so a write/read
//! cycle reproduces them exactly.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::series::{Label, LabeledDataset, TimeSeries};

fn split_fields(line: &str, delimiter: char) -> Vec<&str> {
    if delimiter.is_whitespace() {
        line.split_whitespace().collect()
    } else {
        line.split(delimiter).map(str::trim).collect()
    }
}

fn parse_label(token: &str) -> Option<Label> {
    if let Ok(v) = token.parse::<Label>() {
        return Some(v);
    }
    // Older archive releases write labels as floats, e.g. "1.0000000e+00".
    let v: f64 = token.parse().ok()?;
    (v.is_finite() && v.fract() == 0.0 && v.abs() < 9.0e15).then_some(v as Label)
}

/// Parses UCR-format text into univariate series, in line order.
pub fn parse_ucr(text: &str, delimiter: char, name: &str) -> Result<LabeledDataset> {
    let mut series = Vec::new();
    let mut labels = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let lineno = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        let fields = split_fields(line, delimiter);
        let (label_tok, value_toks) = fields.split_first().expect("non-empty line");
        let label = parse_label(label_tok).ok_or_else(|| Error::Parse {
            line: lineno,
            message: format!("label {label_tok:?} is not an integer"),
        })?;
        if value_toks.is_empty() || value_toks.iter().all(|t| t.is_empty()) {
            return Err(Error::Parse {
                line: lineno,
                message: "record has no values".into(),
            });
        }
        let values = value_toks
            .iter()
            .map(|tok| match tok.parse::<f64>() {
                Ok(v) if v.is_finite() => Ok(v),
                _ => Err(Error::Parse {
                    line: lineno,
                    message: format!("cannot parse value {tok:?}"),
                }),
            })
            .collect::<Result<Vec<_>>>()?;
        series.push(TimeSeries::univariate(values)?);
        labels.push(label);
    }
    if series.is_empty() {
        return Err(Error::NoRecords);
    }
    LabeledDataset::new(name, series, labels)
}

/// Loads a UCR-format file. No normalization is applied.
pub fn load_ucr(path: impl AsRef<Path>, delimiter: char) -> Result<LabeledDataset> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    parse_ucr(&text, delimiter, &name)
}

/// Renders a univariate dataset in UCR format.
pub fn format_ucr(ds: &LabeledDataset, delimiter: char) -> Result<String> {
    let mut out = String::new();
    for (i, (s, label)) in ds.iter().enumerate() {
        if s.dims() != 1 {
            return Err(Error::invalid(format!(
                "series {i} has {} channels; the row format is univariate",
                s.dims()
            )));
        }
        write!(out, "{label}").unwrap();
        for v in s.as_slice() {
            write!(out, "{delimiter}{v:.16e}").unwrap();
        }
        out.push('\n');
    }
    Ok(out)
}

pub fn save_ucr(ds: &LabeledDataset, path: impl AsRef<Path>, delimiter: char) -> Result<()> {
    let path = path.as_ref();
    let text = format_ucr(ds, delimiter)?;
    fs::write(path, text).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// One train/test pair found in an archive directory.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UcrEntry {
    pub name: String,
    pub train: PathBuf,
    pub test: PathBuf,
}

/// Scans `root` for `<Name>/<Name>_TRAIN[.tsv|.txt]` and the matching
/// `_TEST` file, sorted by name.
pub fn scan_archive(root: impl AsRef<Path>) -> Result<Vec<UcrEntry>> {
    let root = root.as_ref();
    let io_err = |source| Error::Io {
        path: root.to_path_buf(),
        source,
    };
    let mut entries = Vec::new();
    for dir in fs::read_dir(root).map_err(io_err)? {
        let dir = dir.map_err(io_err)?.path();
        if !dir.is_dir() {
            continue;
        }
        let name = dir.file_name().unwrap().to_string_lossy().into_owned();
        let find = |suffix: &str| {
            ["", ".tsv", ".txt", ".csv"]
                .iter()
                .map(|ext| dir.join(format!("{name}_{suffix}{ext}")))
                .find(|p| p.is_file())
        };
        if let (Some(train), Some(test)) = (find("TRAIN"), find("TEST")) {
            entries.push(UcrEntry { name, train, test });
        }
    }
    entries.sort_by(|a, b| a.name.cmp(&b.name));
    Ok(entries)
}

/// Picks the delimiter from a file extension: tab for `.tsv`, comma otherwise.
pub fn infer_delimiter(path: &Path) -> char {
    match path.extension().and_then(|e| e.to_str()) {
        Some("tsv") => '\t',
        _ => ',',
    }
}
