//! Plain-text feature files.
//!
//! ```text
//! # d=3 n=2 labeled=1
//! 0 0.5 1.25 -3
//! 1 2 0 0.125
//! ```
//!
//! The header line gives the dimension, sample count and whether the first
//! column holds a class id (`-1` when `labeled=0`). Values are ASCII
//! decimals separated by whitespace. Lines starting with `#` after the
//! header are comments; blank lines are skipped.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use ndarray::Array2;

use crate::data::{DomainDataset, DomainTag};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Header {
    dim: usize,
    count: usize,
    labeled: bool,
}

pub fn load_features(path: impl AsRef<Path>, tag: DomainTag) -> Result<DomainDataset> {
    let file = File::open(path.as_ref())?;
    parse_features(BufReader::new(file), tag)
}

pub fn parse_features(reader: impl BufRead, tag: DomainTag) -> Result<DomainDataset> {
    let mut header: Option<Header> = None;
    let mut values: Vec<f64> = Vec::new();
    let mut labels: Vec<usize> = Vec::new();
    let mut rows = 0usize;

    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        if let Some(rest) = trimmed.strip_prefix('#') {
            let looks_like_header = rest.contains("d=");
            match (&header, looks_like_header) {
                (None, true) => header = Some(parse_header(rest, line_no)?),
                (None, false) => {
                    return Err(parse_error(
                        line_no,
                        "expected header '# d=<int> n=<int> labeled=<0|1>'",
                    ))
                }
                (Some(_), true) => return Err(parse_error(line_no, "duplicate header")),
                (Some(_), false) => {}
            }
            continue;
        }
        let h = header.ok_or_else(|| parse_error(line_no, "data row before header"))?;
        if rows == h.count {
            return Err(parse_error(
                line_no,
                &format!("more than the {} rows declared in the header", h.count),
            ));
        }

        let mut fields = trimmed.split_whitespace();
        let label_field = fields.next().expect("line is not blank");
        let label: i64 = label_field.parse().map_err(|_| {
            parse_error(line_no, &format!("label '{label_field}' is not an integer"))
        })?;
        if h.labeled {
            if label < 0 {
                return Err(parse_error(line_no, &format!("negative label {label}")));
            }
            labels.push(label as usize);
        } else if label != -1 {
            return Err(parse_error(line_no, "unlabeled file must use label -1"));
        }

        let before = values.len();
        for field in fields {
            let v: f64 = field
                .parse()
                .map_err(|_| parse_error(line_no, &format!("'{field}' is not a number")))?;
            if !v.is_finite() {
                return Err(parse_error(line_no, &format!("'{field}' is not finite")));
            }
            values.push(v);
        }
        let got = values.len() - before;
        if got != h.dim {
            return Err(parse_error(
                line_no,
                &format!("expected {} feature values, found {got}", h.dim),
            ));
        }
        rows += 1;
    }

    let h = header.ok_or_else(|| parse_error(1, "missing header"))?;
    if rows != h.count {
        return Err(Error::Parse {
            line: 0,
            message: format!("header declares {} rows, found {rows}", h.count),
        });
    }
    // Rows are samples on disk; columns are samples in memory.
    let features = Array2::from_shape_vec((h.count, h.dim), values)
        .expect("row lengths checked")
        .reversed_axes()
        .as_standard_layout()
        .into_owned();
    if h.labeled {
        DomainDataset::labeled(features, labels, tag)
    } else {
        DomainDataset::unlabeled(features, tag)
    }
}

fn parse_header(rest: &str, line: usize) -> Result<Header> {
    let mut dim = None;
    let mut count = None;
    let mut labeled = None;
    for token in rest.split_whitespace() {
        let (key, value) = token
            .split_once('=')
            .ok_or_else(|| parse_error(line, &format!("malformed header token '{token}'")))?;
        let number: usize = value
            .parse()
            .map_err(|_| parse_error(line, &format!("header value '{value}' is not an integer")))?;
        match key {
            "d" => dim = Some(number),
            "n" => count = Some(number),
            "labeled" if number <= 1 => labeled = Some(number == 1),
            _ => {
                return Err(parse_error(
                    line,
                    &format!("unexpected header token '{token}'"),
                ))
            }
        }
    }
    match (dim, count, labeled) {
        (Some(dim), Some(count), Some(labeled)) if dim > 0 => Ok(Header {
            dim,
            count,
            labeled,
        }),
        _ => Err(parse_error(line, "header needs d>0, n and labeled")),
    }
}

fn parse_error(line: usize, message: &str) -> Error {
    Error::Parse {
        line,
        message: message.to_string(),
    }
}

pub fn save_features(path: impl AsRef<Path>, dataset: &DomainDataset) -> Result<()> {
    let mut out = BufWriter::new(File::create(path.as_ref())?);
    write_features(&mut out, dataset)?;
    out.flush()?;
    Ok(())
}

/// Writes with shortest round-trip float formatting.
pub fn write_features(out: &mut impl Write, dataset: &DomainDataset) -> Result<()> {
    let labels = dataset.labels();
    writeln!(
        out,
        "# d={} n={} labeled={}",
        dataset.dim(),
        dataset.len(),
        u8::from(labels.is_some())
    )?;
    for (j, col) in dataset.features().columns().into_iter().enumerate() {
        match labels {
            Some(l) => write!(out, "{}", l[j])?,
            None => write!(out, "-1")?,
        }
        for v in col.iter() {
            write!(out, " {v}")?;
        }
        writeln!(out)?;
    }
    Ok(())
}

/// Maps the raw integer labels found in files onto dense class ids
/// `0..K`, in ascending order of the raw value.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelDictionary {
    raw: Vec<usize>,
}

impl LabelDictionary {
    pub fn from_labels(labels: &[usize]) -> Self {
        let mut raw = labels.to_vec();
        raw.sort_unstable();
        raw.dedup();
        LabelDictionary { raw }
    }

    pub fn len(&self) -> usize {
        self.raw.len()
    }

    pub fn is_empty(&self) -> bool {
        self.raw.is_empty()
    }

    pub fn encode(&self, raw: usize) -> Option<usize> {
        self.raw.binary_search(&raw).ok()
    }

    pub fn decode(&self, class: usize) -> Option<usize> {
        self.raw.get(class).copied()
    }

    /// Re-labels a dataset with dense ids. Labels unknown to the dictionary
    /// are an error.
    pub fn apply(&self, dataset: &DomainDataset) -> Result<DomainDataset> {
        let Some(labels) = dataset.labels() else {
            return Ok(dataset.clone());
        };
        let encoded = labels
            .iter()
            .map(|&l| {
                self.encode(l).ok_or_else(|| {
                    Error::InvalidInput(format!(
                        "{:?} label {l} does not occur in the source domain",
                        dataset.tag()
                    ))
                })
            })
            .collect::<Result<Vec<_>>>()?;
        DomainDataset::with_classes(
            dataset.features().clone(),
            encoded,
            self.len(),
            dataset.tag(),
        )
    }
}

/// Dictionary-encodes a source/target pair using the source label set.
pub fn encode_pair(
    source: &DomainDataset,
    target: &DomainDataset,
) -> Result<(DomainDataset, DomainDataset, LabelDictionary)> {
    let labels = source
        .labels()
        .ok_or_else(|| Error::InvalidInput("source domain must be labeled".into()))?;
    let dict = LabelDictionary::from_labels(labels);
    Ok((dict.apply(source)?, dict.apply(target)?, dict))
}
