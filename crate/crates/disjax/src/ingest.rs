//! Streaming N-Triples ingestion and the parse report.

use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use disjax_core::ntriples::{consumed_by_kind, parse_line, KbBuilder, ParseReport, VocabularyMap};
use disjax_core::KnowledgeBase;
use serde_json::{json, Value};

use crate::error::{Error, Result};

/// Reads statements line by line; `path` is only used in error messages.
pub fn read_ntriples<R: BufRead>(
    mut reader: R,
    vocab: VocabularyMap,
    path: &Path,
) -> Result<(KnowledgeBase, ParseReport)> {
    let mut builder = KbBuilder::new(vocab);
    let mut buf = Vec::new();
    let mut line_no = 0;
    loop {
        buf.clear();
        if reader.read_until(b'\n', &mut buf)? == 0 {
            break;
        }
        line_no += 1;
        let line = std::str::from_utf8(&buf).map_err(|e| Error::Syntax {
            path: path.to_path_buf(),
            line: line_no,
            column: e.valid_up_to() + 1,
            message: "invalid UTF-8".into(),
        })?;
        match parse_line(line) {
            Ok(Some(triple)) => builder.add(triple, line_no),
            Ok(None) => {}
            Err(e) => {
                return Err(Error::Syntax {
                    path: path.to_path_buf(),
                    line: line_no,
                    column: e.column,
                    message: e.message,
                })
            }
        }
    }
    Ok(builder.finish())
}

pub fn load_ontology(path: &Path) -> Result<(KnowledgeBase, ParseReport)> {
    let file = File::open(path).map_err(|e| Error::open(path, e))?;
    read_ntriples(BufReader::new(file), VocabularyMap::default(), path)
}

pub fn report_json(r: &ParseReport) -> Value {
    json!({
        "total_triples": r.total_triples,
        "consumed": consumed_by_kind(r),
        "consumed_total": r.consumed(),
        "ignored_triples": r.ignored_triples,
        "blank_node_statements": r.blank_node_statements,
        "errors": r.errors.iter().map(|e| json!({"line": e.line, "message": e.message})).collect::<Vec<_>>(),
    })
}
