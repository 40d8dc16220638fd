//! Feature CSV ingestion and export.
//!
//! Layout: header `actor_id,image_id,f_0,...,f_{H-1}`, one row per image.
//! Actor and image ids are opaque strings; actors get dense indices in order
//! of first appearance and keep their rows in file order.

use std::collections::{HashMap, HashSet};
use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use crate::corpus::{ActorId, Corpus};
use crate::error::{Error, FeatureFileError, Result};

/// A corpus together with the identifiers it was loaded with.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureTable {
    pub corpus: Corpus,
    pub actor_ids: Vec<String>,
    /// `image_ids[actor][row]`
    pub image_ids: Vec<Vec<String>>,
    pub columns: Vec<String>,
}

impl FeatureTable {
    /// Labels an unlabeled corpus with `actor_{i}`, `img_{j}` and `f_{h}`.
    pub fn from_corpus(corpus: Corpus) -> Self {
        let actor_ids = (0..corpus.n()).map(|a| format!("actor_{a}")).collect();
        let image_ids = (0..corpus.n())
            .map(|_| (0..corpus.m()).map(|r| format!("img_{r}")).collect())
            .collect();
        let columns = (0..corpus.dim()).map(|h| format!("f_{h}")).collect();
        FeatureTable {
            corpus,
            actor_ids,
            image_ids,
            columns,
        }
    }

    pub fn actor_name(&self, actor: ActorId) -> &str {
        &self.actor_ids[actor.0]
    }
}

fn csv_error(e: csv::Error) -> Error {
    if let csv::ErrorKind::UnequalLengths {
        pos,
        expected_len,
        len,
    } = e.kind()
    {
        return FeatureFileError::FieldCount {
            line: pos.as_ref().map_or(0, |p| p.line()),
            expected: *expected_len as usize,
            found: *len as usize,
        }
        .into();
    }
    if let csv::ErrorKind::Io(io) = e.kind() {
        return Error::Io(io.to_string());
    }
    FeatureFileError::Csv(e.to_string()).into()
}

pub fn read_features<R: Read>(reader: R) -> Result<FeatureTable> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(false)
        .from_reader(reader);
    let header = rdr.headers().map_err(csv_error)?.clone();
    if header.is_empty() || (header.len() == 1 && header[0].trim().is_empty()) {
        return Err(FeatureFileError::Empty.into());
    }
    if header.len() < 3 {
        return Err(FeatureFileError::BadHeader(format!(
            "need actor_id, image_id and at least one feature column, got {} columns",
            header.len()
        ))
        .into());
    }
    if header[0].trim() != "actor_id" || header[1].trim() != "image_id" {
        return Err(FeatureFileError::BadHeader(format!(
            "must start with actor_id,image_id, got {},{}",
            &header[0], &header[1]
        ))
        .into());
    }
    let columns: Vec<String> = header
        .iter()
        .skip(2)
        .map(|c| c.trim().to_string())
        .collect();
    let dim = columns.len();

    let mut actor_index: HashMap<String, usize> = HashMap::new();
    let mut actor_ids: Vec<String> = Vec::new();
    let mut image_ids: Vec<Vec<String>> = Vec::new();
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut seen: HashSet<(String, String)> = HashSet::new();

    for record in rdr.records() {
        let record = record.map_err(csv_error)?;
        let line = record.position().map_or(0, |p| p.line());
        let actor = record[0].to_string();
        let image = record[1].to_string();
        if !seen.insert((actor.clone(), image.clone())) {
            return Err(FeatureFileError::DuplicateImage { line, actor, image }.into());
        }
        let a = *actor_index.entry(actor.clone()).or_insert_with(|| {
            actor_ids.push(actor);
            image_ids.push(Vec::new());
            rows.push(Vec::new());
            actor_ids.len() - 1
        });
        for (h, cell) in record.iter().skip(2).enumerate() {
            let value: f64 = cell
                .trim()
                .parse()
                .map_err(|_| FeatureFileError::NonNumeric {
                    line,
                    column: columns[h].clone(),
                    value: cell.to_string(),
                })?;
            if !value.is_finite() {
                return Err(FeatureFileError::NonFinite {
                    line,
                    column: columns[h].clone(),
                    value: cell.to_string(),
                }
                .into());
            }
            rows[a].push(value);
        }
        image_ids[a].push(image);
    }

    if actor_ids.is_empty() {
        return Err(FeatureFileError::Empty.into());
    }
    let m = image_ids[0].len();
    if let Some(a) = (1..actor_ids.len()).find(|&a| image_ids[a].len() != m) {
        return Err(FeatureFileError::RaggedActor {
            actor: actor_ids[a].clone(),
            rows: image_ids[a].len(),
            expected: m,
        }
        .into());
    }
    let n = actor_ids.len();
    let corpus = Corpus::new(n, m, dim, rows.concat())?;
    Ok(FeatureTable {
        corpus,
        actor_ids,
        image_ids,
        columns,
    })
}

pub fn load_features(path: impl AsRef<Path>) -> Result<FeatureTable> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    read_features(file)
}

/// Writes values with Rust's shortest round-trip float formatting, so a
/// reload reproduces every value bit for bit.
pub fn write_features<W: Write>(table: &FeatureTable, writer: W) -> Result<()> {
    let corpus = &table.corpus;
    let mut wtr = csv::Writer::from_writer(writer);
    let mut header = vec!["actor_id".to_string(), "image_id".to_string()];
    header.extend(table.columns.iter().cloned());
    wtr.write_record(&header).map_err(csv_error)?;
    for a in 0..corpus.n() {
        for r in 0..corpus.m() {
            let mut record = vec![table.actor_ids[a].clone(), table.image_ids[a][r].clone()];
            record.extend(corpus.row(ActorId(a), r).iter().map(|v| v.to_string()));
            wtr.write_record(&record).map_err(csv_error)?;
        }
    }
    wtr.flush()?;
    Ok(())
}

pub fn save_features(table: &FeatureTable, path: impl AsRef<Path>) -> Result<()> {
    write_features(table, File::create(path)?)
}
