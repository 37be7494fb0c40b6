//! Pair-matrix TSV, diagnostics JSON and axiom files.

use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use disjax_core::reasoner::Diagnostics;
use disjax_core::{Disjointness, GoldOracle, KnowledgeBase, PairLabel, PairMatrix, Provenance};
use serde_json::{json, Value};

use crate::error::{Error, Result};

pub const MATRIX_HEADER: &str = "class_a\tclass_b\tlabel\tprovenance";

/// Writes `contents` to a sibling temp file and renames it into place.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    let tmp = path.with_extension("tmp");
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(contents)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)?;
    Ok(())
}

pub fn matrix_tsv(m: &PairMatrix, kb: &KnowledgeBase) -> String {
    let mut out = String::with_capacity(64 * (m.len() + 1));
    out.push_str(MATRIX_HEADER);
    out.push('\n');
    for (a, b, label, prov) in m.iter() {
        out.push_str(kb.iri(a).as_str());
        out.push('\t');
        out.push_str(kb.iri(b).as_str());
        out.push('\t');
        out.push_str(label.as_str());
        out.push('\t');
        out.push_str(prov.as_str());
        out.push('\n');
    }
    out
}

/// One data row of a pair-matrix file.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PairRow {
    pub class_a: String,
    pub class_b: String,
    pub label: PairLabel,
    pub provenance: Provenance,
    pub line: usize,
}

pub fn read_pair_rows(path: &Path) -> Result<Vec<PairRow>> {
    let file = fs::File::open(path).map_err(|e| Error::open(path, e))?;
    let fmt_err = |line: usize, message: String| Error::Format { path: path.to_path_buf(), line, message };
    let mut rows = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line?;
        let line_no = i + 1;
        if line_no == 1 {
            if line.trim_end_matches('\r') != MATRIX_HEADER {
                return Err(fmt_err(1, format!("expected header {MATRIX_HEADER:?}")));
            }
            continue;
        }
        let line = line.trim_end_matches('\r');
        if line.is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split('\t').collect();
        if cols.len() != 4 {
            return Err(fmt_err(line_no, format!("expected 4 columns, found {}", cols.len())));
        }
        let label = cols[2].parse().map_err(|e| fmt_err(line_no, format!("label: {e}")))?;
        let provenance = cols[3].parse().map_err(|e| fmt_err(line_no, format!("provenance: {e}")))?;
        rows.push(PairRow {
            class_a: cols[0].to_string(),
            class_b: cols[1].to_string(),
            label,
            provenance,
            line: line_no,
        });
    }
    if rows.is_empty() && fs::metadata(path)?.len() == 0 {
        return Err(fmt_err(1, "empty file".into()));
    }
    Ok(rows)
}

/// Loads a pair-matrix file onto the classes of `kb`.
pub fn read_matrix(path: &Path, kb: &KnowledgeBase) -> Result<PairMatrix> {
    matrix_from_rows(&read_pair_rows(path)?, kb, path)
}

/// Places rows read from `path` onto the classes of `kb`. Pairs without a
/// row stay unknown.
pub fn matrix_from_rows(rows: &[PairRow], kb: &KnowledgeBase, path: &Path) -> Result<PairMatrix> {
    let mut m = PairMatrix::new(kb);
    for row in rows {
        let err = |message: String| Error::Format { path: path.to_path_buf(), line: row.line, message };
        let a = kb.lookup(&row.class_a).ok_or_else(|| err(format!("unknown class {}", row.class_a)))?;
        let b = kb.lookup(&row.class_b).ok_or_else(|| err(format!("unknown class {}", row.class_b)))?;
        let idx = m.index_of(a, b).ok_or_else(|| err("pair of identical classes".into()))?;
        m.set(idx, row.label, row.provenance);
    }
    Ok(m)
}

/// Oracle answering from a pair-matrix file. Rows labeled `unknown` or
/// `conflict` are treated as unlisted.
pub fn mock_from_gold(path: &Path, default: Option<Disjointness>) -> Result<GoldOracle> {
    let mut g = GoldOracle::new(default);
    for row in read_pair_rows(path)? {
        let v = match row.label {
            PairLabel::Disjoint => Disjointness::Disjoint,
            PairLabel::NotDisjoint => Disjointness::NotDisjoint,
            PairLabel::Unknown | PairLabel::Conflict => continue,
        };
        g.insert(&row.class_a, &row.class_b, v);
    }
    Ok(g)
}

pub fn diagnostics_json(d: &Diagnostics, kb: &KnowledgeBase) -> Value {
    let iri = |c| kb.iri(c).as_str();
    json!({
        "incoherent_classes": d.incoherent_classes.iter().map(|&c| iri(c)).collect::<Vec<_>>(),
        "unsat_witnesses": d.unsat_witnesses.iter().map(|w| json!({
            "individual": w.individual.as_str(),
            "class_a": iri(w.first),
            "class_b": iri(w.second),
        })).collect::<Vec<_>>(),
        "conflicts": d.conflicts.iter().map(|c| json!({
            "class_a": iri(c.first),
            "class_b": iri(c.second),
            "disjoint_by": c.disjoint_by.as_str(),
            "evidence": c.evidence.as_str(),
        })).collect::<Vec<_>>(),
    })
}

pub fn write_json(path: &Path, v: &Value) -> Result<()> {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    write_atomic(path, s.as_bytes())
}
