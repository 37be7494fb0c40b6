//! N-Triples statement grammar and the triple-to-knowledge-base mapping.
//!
//! The parser works one line at a time so the caller decides how bytes are
//! read. [`KbBuilder`] defers class membership decisions to [`finish`], which
//! makes the result independent of statement order.
//!
//! [`finish`]: KbBuilder::finish

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use crate::model::{Iri, KnowledgeBase, LabelCandidate, LabelSource};

pub const RDFS_SUBCLASS_OF: &str = "http://www.w3.org/2000/01/rdf-schema#subClassOf";
pub const RDFS_LABEL: &str = "http://www.w3.org/2000/01/rdf-schema#label";
pub const SKOS_PREF_LABEL: &str = "http://www.w3.org/2004/02/skos/core#prefLabel";
pub const RDF_TYPE: &str = "http://www.w3.org/1999/02/22-rdf-syntax-ns#type";
pub const OWL_DISJOINT_WITH: &str = "http://www.w3.org/2002/07/owl#disjointWith";
pub const OWL_CLASS: &str = "http://www.w3.org/2002/07/owl#Class";

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Term {
    Iri(Iri),
    Blank(String),
    Literal { lexical: String, lang: Option<String>, datatype: Option<Iri> },
}

impl Term {
    pub fn is_blank(&self) -> bool {
        matches!(self, Term::Blank(_))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Triple {
    pub subject: Term,
    pub predicate: Iri,
    pub object: Term,
}

/// Syntax error inside one line; `column` is 1-based, in characters.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SyntaxError {
    pub column: usize,
    pub message: String,
}

impl fmt::Display for SyntaxError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "column {}: {}", self.column, self.message)
    }
}

struct Cursor<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn peek(&self) -> Option<char> {
        self.src[self.pos..].chars().next()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos += c.len_utf8();
        Some(c)
    }

    fn column(&self) -> usize {
        self.src[..self.pos].chars().count() + 1
    }

    fn err<T>(&self, message: impl Into<String>) -> Result<T, SyntaxError> {
        Err(SyntaxError { column: self.column(), message: message.into() })
    }

    fn skip_ws(&mut self) {
        while matches!(self.peek(), Some(' ' | '\t')) {
            self.pos += 1;
        }
    }

    fn expect(&mut self, want: char) -> Result<(), SyntaxError> {
        match self.peek() {
            Some(c) if c == want => {
                self.pos += c.len_utf8();
                Ok(())
            }
            Some(c) => self.err(alloc::format!("expected {want:?}, found {c:?}")),
            None => self.err(alloc::format!("expected {want:?}, found end of line")),
        }
    }

    fn hex_escape(&mut self, digits: usize) -> Result<char, SyntaxError> {
        let start = self.pos;
        let mut v: u32 = 0;
        for _ in 0..digits {
            match self.bump().and_then(|c| c.to_digit(16)) {
                Some(d) => v = v * 16 + d,
                None => {
                    self.pos = start;
                    return self.err("malformed unicode escape");
                }
            }
        }
        match char::from_u32(v) {
            Some(c) => Ok(c),
            None => {
                self.pos = start;
                self.err("unicode escape is not a scalar value")
            }
        }
    }

    fn iri(&mut self) -> Result<Iri, SyntaxError> {
        let start_col = self.column();
        self.expect('<')?;
        let mut out = String::new();
        loop {
            match self.bump() {
                None => return self.err("unterminated IRI"),
                Some('>') => break,
                Some('\\') => match self.bump() {
                    Some('u') => out.push(self.hex_escape(4)?),
                    Some('U') => out.push(self.hex_escape(8)?),
                    _ => return self.err("invalid escape in IRI"),
                },
                Some(c) if matches!(c, '<' | '"' | '{' | '}' | '|' | '^' | '`') => {
                    return self.err(alloc::format!("character {c:?} not allowed in IRI"));
                }
                Some(c) => out.push(c),
            }
        }
        Iri::new(out).map_err(|e| SyntaxError { column: start_col, message: e.to_string() })
    }

    fn blank(&mut self) -> Result<String, SyntaxError> {
        self.expect('_')?;
        self.expect(':')?;
        let start = self.pos;
        while let Some(c) = self.peek() {
            if c.is_alphanumeric() || matches!(c, '_' | '-' | '.' | ':') {
                self.pos += c.len_utf8();
            } else {
                break;
            }
        }
        // a label may not end with '.'
        while self.pos > start && self.src[..self.pos].ends_with('.') {
            self.pos -= 1;
        }
        if self.pos == start {
            return self.err("empty blank node label");
        }
        Ok(self.src[start..self.pos].to_string())
    }

    fn literal(&mut self) -> Result<Term, SyntaxError> {
        let open = self.pos;
        self.expect('"')?;
        let mut lexical = String::new();
        loop {
            match self.bump() {
                None => {
                    self.pos = open;
                    return self.err("unterminated literal");
                }
                Some('"') => break,
                Some('\\') => {
                    let c = match self.bump() {
                        Some('t') => '\t',
                        Some('b') => '\u{8}',
                        Some('n') => '\n',
                        Some('r') => '\r',
                        Some('f') => '\u{c}',
                        Some('"') => '"',
                        Some('\'') => '\'',
                        Some('\\') => '\\',
                        Some('u') => self.hex_escape(4)?,
                        Some('U') => self.hex_escape(8)?,
                        _ => return self.err("invalid escape in literal"),
                    };
                    lexical.push(c);
                }
                Some(c) => lexical.push(c),
            }
        }
        let mut lang = None;
        let mut datatype = None;
        match self.peek() {
            Some('@') => {
                self.pos += 1;
                let start = self.pos;
                while matches!(self.peek(), Some(c) if c.is_ascii_alphanumeric() || c == '-') {
                    self.pos += 1;
                }
                if self.pos == start {
                    return self.err("empty language tag");
                }
                lang = Some(self.src[start..self.pos].to_string());
            }
            Some('^') => {
                self.pos += 1;
                self.expect('^')?;
                datatype = Some(self.iri()?);
            }
            _ => {}
        }
        Ok(Term::Literal { lexical, lang, datatype })
    }

    fn subject(&mut self) -> Result<Term, SyntaxError> {
        match self.peek() {
            Some('<') => Ok(Term::Iri(self.iri()?)),
            Some('_') => Ok(Term::Blank(self.blank()?)),
            Some(c) => self.err(alloc::format!("expected subject, found {c:?}")),
            None => self.err("expected subject, found end of line"),
        }
    }

    fn object(&mut self) -> Result<Term, SyntaxError> {
        match self.peek() {
            Some('<') => Ok(Term::Iri(self.iri()?)),
            Some('_') => Ok(Term::Blank(self.blank()?)),
            Some('"') => self.literal(),
            Some('.') | None => self.err("missing object"),
            Some(c) => self.err(alloc::format!("expected object, found {c:?}")),
        }
    }
}

/// Parses one line. Blank lines and comment lines yield `Ok(None)`.
pub fn parse_line(line: &str) -> Result<Option<Triple>, SyntaxError> {
    let line = line.strip_suffix('\n').unwrap_or(line);
    let line = line.strip_suffix('\r').unwrap_or(line);
    let mut cur = Cursor { src: line, pos: 0 };
    cur.skip_ws();
    match cur.peek() {
        None | Some('#') => return Ok(None),
        _ => {}
    }
    let subject = cur.subject()?;
    cur.skip_ws();
    if cur.peek() != Some('<') {
        return cur.err("expected predicate IRI");
    }
    let predicate = cur.iri()?;
    cur.skip_ws();
    let object = cur.object()?;
    cur.skip_ws();
    cur.expect('.')?;
    cur.skip_ws();
    match cur.peek() {
        None | Some('#') => Ok(Some(Triple { subject, predicate, object })),
        Some(c) => cur.err(alloc::format!("unexpected {c:?} after statement")),
    }
}

/// Which predicates and objects the ingester understands.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VocabularyMap {
    pub subclass_pred: Iri,
    pub disjoint_pred: Iri,
    pub type_pred: Iri,
    /// In preference order.
    pub label_preds: Vec<Iri>,
    pub class_marker: Iri,
}

impl Default for VocabularyMap {
    fn default() -> Self {
        let iri = |s: &str| Iri::new(s).expect("static IRI");
        VocabularyMap {
            subclass_pred: iri(RDFS_SUBCLASS_OF),
            disjoint_pred: iri(OWL_DISJOINT_WITH),
            type_pred: iri(RDF_TYPE),
            label_preds: alloc::vec![iri(RDFS_LABEL), iri(SKOS_PREF_LABEL)],
            class_marker: iri(OWL_CLASS),
        }
    }
}

/// A well-formed statement that could not be used.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SemanticError {
    pub line: usize,
    pub message: String,
}

/// Triple counts by what consumed them.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ParseReport {
    pub total_triples: usize,
    pub subclass: usize,
    pub disjoint: usize,
    pub class_marker: usize,
    pub instance_type: usize,
    pub label: usize,
    pub ignored_triples: usize,
    /// Included in `ignored_triples`.
    pub blank_node_statements: usize,
    /// Included in `ignored_triples`.
    pub errors: Vec<SemanticError>,
}

impl ParseReport {
    pub fn consumed(&self) -> usize {
        self.subclass + self.disjoint + self.class_marker + self.instance_type + self.label
    }
}

/// Accumulates triples and resolves them into a [`KnowledgeBase`].
#[derive(Clone, Debug, Default)]
pub struct KbBuilder {
    vocab: VocabularyMap,
    classes: BTreeSet<Iri>,
    subclass: BTreeSet<(Iri, Iri)>,
    disjoint: BTreeSet<(Iri, Iri)>,
    self_disjoint: BTreeSet<Iri>,
    /// individual -> (class, line) pending the full pass
    typings: Vec<(Iri, Iri)>,
    labels: Vec<(Iri, LabelCandidate)>,
    report: ParseReport,
}

impl KbBuilder {
    pub fn new(vocab: VocabularyMap) -> Self {
        KbBuilder { vocab, ..Default::default() }
    }

    /// Feeds one parsed triple found on `line` (1-based).
    pub fn add(&mut self, triple: Triple, line: usize) {
        self.report.total_triples += 1;
        let Triple { subject, predicate, object } = triple;
        if subject.is_blank() || object.is_blank() {
            self.report.blank_node_statements += 1;
            self.report.ignored_triples += 1;
            return;
        }
        let Term::Iri(subject) = subject else {
            unreachable!("subjects are IRIs or blank nodes")
        };
        let v = &self.vocab;
        if predicate == v.subclass_pred || predicate == v.disjoint_pred {
            let Term::Iri(object) = object else {
                self.semantic(line, "literal object for a class axiom");
                return;
            };
            self.classes.insert(subject.clone());
            self.classes.insert(object.clone());
            if predicate == self.vocab.subclass_pred {
                self.report.subclass += 1;
                self.subclass.insert((subject, object));
            } else {
                self.report.disjoint += 1;
                if subject == object {
                    self.self_disjoint.insert(subject);
                } else {
                    let pair =
                        if subject < object { (subject, object) } else { (object, subject) };
                    self.disjoint.insert(pair);
                }
            }
        } else if predicate == v.type_pred {
            match object {
                Term::Iri(o) if o == self.vocab.class_marker => {
                    self.report.class_marker += 1;
                    self.classes.insert(subject);
                }
                Term::Iri(o) => self.typings.push((subject, o)),
                _ => self.semantic(line, "literal object for a type assertion"),
            }
        } else if let Some(rank) = v.label_preds.iter().position(|p| *p == predicate) {
            let Term::Literal { lexical, lang, .. } = object else {
                self.semantic(line, "label object is not a literal");
                return;
            };
            let source = match rank {
                0 => LabelSource::RdfsLabel,
                1 => LabelSource::PrefLabel,
                _ => LabelSource::Other,
            };
            self.labels.push((subject, LabelCandidate { text: lexical, lang, source }));
        } else {
            self.report.ignored_triples += 1;
        }
    }

    fn semantic(&mut self, line: usize, message: &str) {
        self.report.ignored_triples += 1;
        self.report.errors.push(SemanticError { line, message: message.into() });
    }

    /// Classes are interned in IRI order, so the handles do not depend on the
    /// order statements arrived in.
    pub fn finish(mut self) -> (KnowledgeBase, ParseReport) {
        let mut kb = KnowledgeBase::new();
        for c in &self.classes {
            kb.intern(c.clone());
        }
        let id = |kb: &KnowledgeBase, i: &Iri| kb.get(i).expect("collected class");
        for (a, b) in &self.subclass {
            kb.add_subclass(id(&kb, a), id(&kb, b)).expect("interned");
        }
        for (a, b) in &self.disjoint {
            kb.add_disjoint(id(&kb, a), id(&kb, b)).expect("distinct interned");
        }
        for c in &self.self_disjoint {
            self.report.errors.push(SemanticError {
                line: 0,
                message: alloc::format!("class {c} declared disjoint with itself"),
            });
        }
        let mut seen_typings = BTreeSet::new();
        for (individual, class) in self.typings {
            match kb.get(&class) {
                Some(c) => {
                    self.report.instance_type += 1;
                    if seen_typings.insert((individual.clone(), c)) {
                        kb.add_instance(individual, c).expect("interned");
                    }
                }
                None => self.report.ignored_triples += 1,
            }
        }
        for (subject, label) in self.labels {
            match kb.get(&subject) {
                Some(c) => {
                    self.report.label += 1;
                    kb.add_label(c, label).expect("interned");
                }
                None => self.report.ignored_triples += 1,
            }
        }
        (kb, self.report)
    }
}

/// Number of triples of each kind in the report, keyed for serialization.
pub fn consumed_by_kind(r: &ParseReport) -> BTreeMap<&'static str, usize> {
    BTreeMap::from([
        ("subclass", r.subclass),
        ("disjoint", r.disjoint),
        ("class_marker", r.class_marker),
        ("instance_type", r.instance_type),
        ("label", r.label),
    ])
}
