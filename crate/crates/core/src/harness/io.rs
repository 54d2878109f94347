//! CSV datasets and prediction files.
//!
//! Documents: `doc_id,cluster_id,gold` with gold `pos|neg|neu` or empty.
//! Labels: `doc_id,tool_id,polarity`. Predictions: `doc_id,polarity`.

use std::fs::File;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use indexmap::IndexMap;
use thiserror::Error;

use crate::kb::{ClusterId, Dataset, Document, DocumentId, GoldAccess, KbError, Label, Polarity, ToolId};

#[derive(Debug, Error)]
pub enum IoError {
    #[error("cannot read {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error("cannot write {path}: {source}")]
    Write { path: PathBuf, source: std::io::Error },
    #[error("{reason} at {file} line {line}")]
    Row { file: &'static str, line: u64, reason: String },
    #[error("{file} header must be '{expected}'")]
    Header { file: &'static str, expected: &'static str },
    #[error(transparent)]
    Dataset(#[from] KbError),
    #[error("csv output failed: {0}")]
    Csv(String),
}

const DOCS_HEADER: &str = "doc_id,cluster_id,gold";
const LABELS_HEADER: &str = "doc_id,tool_id,polarity";
const PREDICTIONS_HEADER: &str = "doc_id,polarity";

fn read_rows(text: &str, file: &'static str, header: &'static str) -> Result<Vec<(u64, Vec<String>)>, IoError> {
    let columns: Vec<&str> = header.split(',').collect();
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_reader(text.as_bytes());
    let mut rows = Vec::new();
    let mut seen_header = false;
    for rec in rdr.records() {
        let rec = rec.map_err(|e| IoError::Row {
            file,
            line: e.position().map(|p| p.line()).unwrap_or(0),
            reason: e.to_string(),
        })?;
        let line = rec.position().map(|p| p.line()).unwrap_or(0);
        if !seen_header {
            let got: Vec<&str> = rec.iter().map(|f| f.trim_start_matches('\u{feff}')).collect();
            if got != columns {
                return Err(IoError::Header { file, expected: header });
            }
            seen_header = true;
            continue;
        }
        if rec.len() == 1 && rec[0].is_empty() {
            continue;
        }
        if rec.len() != columns.len() {
            return Err(IoError::Row {
                file,
                line,
                reason: format!("expected {} fields, found {}", columns.len(), rec.len()),
            });
        }
        rows.push((line, rec.iter().map(str::to_string).collect()));
    }
    Ok(rows)
}

fn polarity(raw: &str, file: &'static str, line: u64) -> Result<Polarity, IoError> {
    Polarity::from_code(raw).ok_or_else(|| IoError::Row {
        file,
        line,
        reason: format!("invalid polarity '{raw}'"),
    })
}

fn ident<T: TryFrom<String, Error = KbError>>(raw: &str, file: &'static str, line: u64) -> Result<T, IoError> {
    T::try_from(raw.to_string()).map_err(|e| IoError::Row {
        file,
        line,
        reason: e.to_string(),
    })
}

/// Parses both files from memory. Tools are inferred from the labels.
pub fn parse_dataset(docs: &str, labels: &str) -> Result<Dataset, IoError> {
    let mut documents = Vec::new();
    for (line, row) in read_rows(docs, "documents", DOCS_HEADER)? {
        let gold = match row[2].as_str() {
            "" => None,
            raw => Some(polarity(raw, "documents", line)?),
        };
        documents.push(Document::with_gold(
            ident::<DocumentId>(&row[0], "documents", line)?,
            ident::<ClusterId>(&row[1], "documents", line)?,
            gold,
        ));
    }
    let mut out = Vec::new();
    for (line, row) in read_rows(labels, "labels", LABELS_HEADER)? {
        out.push(Label::new(
            ident::<DocumentId>(&row[0], "labels", line)?,
            ident::<ToolId>(&row[1], "labels", line)?,
            polarity(&row[2], "labels", line)?,
        ));
    }
    Ok(Dataset::new(documents, out)?)
}

fn read_file(path: &Path) -> Result<String, IoError> {
    let mut s = String::new();
    File::open(path)
        .and_then(|mut f| f.read_to_string(&mut s))
        .map_err(|source| IoError::Read {
            path: path.to_path_buf(),
            source,
        })?;
    Ok(s)
}

pub fn load_dataset(docs_path: &Path, labels_path: &Path) -> Result<Dataset, IoError> {
    let docs = read_file(docs_path)?;
    let labels = read_file(labels_path)?;
    parse_dataset(&docs, &labels)
}

fn to_csv(header: &str, rows: impl Iterator<Item = Vec<String>>) -> Result<String, IoError> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    w.write_record(header.split(',')).map_err(|e| IoError::Csv(e.to_string()))?;
    for r in rows {
        w.write_record(&r).map_err(|e| IoError::Csv(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| IoError::Csv(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv of utf-8 fields"))
}

/// Renders the documents and labels files.
pub fn format_dataset(ds: &Dataset) -> Result<(String, String), IoError> {
    let access = GoldAccess::grant();
    let docs = to_csv(
        DOCS_HEADER,
        ds.documents().iter().map(|d| {
            vec![
                d.id.to_string(),
                d.cluster.to_string(),
                d.gold(&access).map(|p| p.code().to_string()).unwrap_or_default(),
            ]
        }),
    )?;
    let labels = to_csv(
        LABELS_HEADER,
        ds.labels()
            .iter()
            .map(|l| vec![l.doc.to_string(), l.tool.to_string(), l.polarity.code().to_string()]),
    )?;
    Ok((docs, labels))
}

pub fn write_file(path: &Path, contents: &str) -> Result<(), IoError> {
    File::create(path)
        .and_then(|mut f| f.write_all(contents.as_bytes()))
        .map_err(|source| IoError::Write {
            path: path.to_path_buf(),
            source,
        })
}

pub fn write_dataset(ds: &Dataset, docs_path: &Path, labels_path: &Path) -> Result<(), IoError> {
    let (docs, labels) = format_dataset(ds)?;
    write_file(docs_path, &docs)?;
    write_file(labels_path, &labels)
}

pub fn format_predictions(preds: &IndexMap<DocumentId, Polarity>) -> Result<String, IoError> {
    to_csv(
        PREDICTIONS_HEADER,
        preds.iter().map(|(d, p)| vec![d.to_string(), p.code().to_string()]),
    )
}

pub fn parse_predictions(text: &str) -> Result<IndexMap<DocumentId, Polarity>, IoError> {
    let mut out = IndexMap::new();
    for (line, row) in read_rows(text, "predictions", PREDICTIONS_HEADER)? {
        let doc: DocumentId = ident(&row[0], "predictions", line)?;
        let p = polarity(&row[1], "predictions", line)?;
        if out.insert(doc.clone(), p).is_some() {
            return Err(IoError::Row {
                file: "predictions",
                line,
                reason: format!("duplicate document '{doc}'"),
            });
        }
    }
    Ok(out)
}

pub fn load_predictions(path: &Path) -> Result<IndexMap<DocumentId, Polarity>, IoError> {
    parse_predictions(&read_file(path)?)
}
