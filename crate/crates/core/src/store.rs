//! On-disk index directory.
//!
//! ```text
//! <dir>/meta.json       format tag, version and counts
//! <dir>/docs.jsonl      the catalog, in doc-corpus format
//! <dir>/examples.jsonl  {"id","title","source","source_url"} per example
//! ```
//!
//! Derived structures (call multisets, inverted indexes, rank order) are
//! rebuilt on load with the caller's ranking constants, so a loaded index
//! answers every query exactly as the saved one did.

use std::fs;
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::config::RankingConfig;
use crate::docs::{self, DocCatalog, DocIngestError};
use crate::examples::{ExampleIndex, ExampleIngestError, ExampleSource};

pub const FORMAT: &str = "apiglance-index";
pub const VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Meta {
    pub format: String,
    pub version: u32,
    pub apis: usize,
    pub examples: usize,
}

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("{path}: {message}")]
    Corrupt { path: PathBuf, message: String },
    #[error(transparent)]
    Docs(#[from] DocIngestError),
    #[error(transparent)]
    Examples(#[from] ExampleIngestError),
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> StoreError + '_ {
    move |source| StoreError::Io {
        path: path.to_owned(),
        source,
    }
}

pub fn save(dir: &Path, catalog: &DocCatalog, index: &ExampleIndex) -> Result<(), StoreError> {
    fs::create_dir_all(dir).map_err(io_err(dir))?;

    let docs_path = dir.join("docs.jsonl");
    let mut out = BufWriter::new(fs::File::create(&docs_path).map_err(io_err(&docs_path))?);
    catalog
        .write_jsonl(&mut out)
        .and_then(|_| out.flush())
        .map_err(io_err(&docs_path))?;

    let ex_path = dir.join("examples.jsonl");
    let mut out = BufWriter::new(fs::File::create(&ex_path).map_err(io_err(&ex_path))?);
    for ex in index.examples() {
        serde_json::to_writer(&mut out, &ex.to_source()).map_err(|e| io_err(&ex_path)(e.into()))?;
        out.write_all(b"\n").map_err(io_err(&ex_path))?;
    }
    out.flush().map_err(io_err(&ex_path))?;

    let meta = Meta {
        format: FORMAT.into(),
        version: VERSION,
        apis: catalog.len(),
        examples: index.len(),
    };
    let meta_path = dir.join("meta.json");
    let text = serde_json::to_string_pretty(&meta).expect("meta serializes");
    fs::write(&meta_path, text + "\n").map_err(io_err(&meta_path))?;
    Ok(())
}

pub fn load(dir: &Path, ranking: RankingConfig) -> Result<(DocCatalog, ExampleIndex), StoreError> {
    let meta_path = dir.join("meta.json");
    let text = fs::read_to_string(&meta_path).map_err(io_err(&meta_path))?;
    let corrupt = |path: &Path, message: String| StoreError::Corrupt {
        path: path.to_owned(),
        message,
    };
    let meta: Meta = serde_json::from_str(&text).map_err(|e| corrupt(&meta_path, e.to_string()))?;
    if meta.format != FORMAT || meta.version != VERSION {
        return Err(corrupt(
            &meta_path,
            format!("unsupported index format {} v{}", meta.format, meta.version),
        ));
    }

    let docs_path = dir.join("docs.jsonl");
    let file = fs::File::open(&docs_path).map_err(io_err(&docs_path))?;
    let (catalog, report) = docs::ingest_docs(BufReader::new(file))?;
    if let Some(skip) = report.skipped.first() {
        return Err(corrupt(&docs_path, format!("line {}: {}", skip.line, skip.reason)));
    }

    let ex_path = dir.join("examples.jsonl");
    let file = fs::File::open(&ex_path).map_err(io_err(&ex_path))?;
    let mut sources = Vec::with_capacity(meta.examples);
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(io_err(&ex_path))?;
        if line.trim().is_empty() {
            continue;
        }
        let src: ExampleSource = serde_json::from_str(&line)
            .map_err(|e| corrupt(&ex_path, format!("line {}: {e}", i + 1)))?;
        sources.push(src);
    }
    let index = ExampleIndex::build(sources, ranking)?;

    if catalog.len() != meta.apis || index.len() != meta.examples {
        return Err(corrupt(&meta_path, "counts do not match the stored data".into()));
    }
    Ok((catalog, index))
}
