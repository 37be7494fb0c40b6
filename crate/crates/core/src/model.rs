//! Class identifiers, labels and the in-memory knowledge base.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

/// An absolute IRI. Validated on construction.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Iri(String);

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum IriError {
    Empty,
    /// Whitespace or a control character at the given char offset.
    IllegalChar { ch: char, offset: usize },
    NoScheme,
}

impl fmt::Display for IriError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            IriError::Empty => f.write_str("empty IRI"),
            IriError::IllegalChar { ch, offset } => {
                write!(f, "illegal character {:?} at offset {} in IRI", ch, offset)
            }
            IriError::NoScheme => f.write_str("IRI has no ':' separator"),
        }
    }
}

impl Iri {
    pub fn new(value: impl Into<String>) -> Result<Self, IriError> {
        let value = value.into();
        if value.is_empty() {
            return Err(IriError::Empty);
        }
        if let Some((offset, ch)) = value
            .chars()
            .enumerate()
            .find(|(_, c)| c.is_whitespace() || c.is_control())
        {
            return Err(IriError::IllegalChar { ch, offset });
        }
        if !value.contains(':') {
            return Err(IriError::NoScheme);
        }
        Ok(Iri(value))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    /// Segment after the last `/` or `#`.
    pub fn local_name(&self) -> &str {
        let s = self.0.as_str();
        match s.rfind(['/', '#']) {
            Some(pos) if pos + 1 < s.len() => &s[pos + 1..],
            // trailing separator: fall back to the segment before it
            Some(pos) => {
                let head = &s[..pos];
                match head.rfind(['/', '#']) {
                    Some(p) => &head[p + 1..],
                    None => head,
                }
            }
            None => s.rsplit(':').next().unwrap_or(s),
        }
    }
}

impl fmt::Display for Iri {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl core::borrow::Borrow<str> for Iri {
    fn borrow(&self) -> &str {
        &self.0
    }
}

impl AsRef<str> for Iri {
    fn as_ref(&self) -> &str {
        &self.0
    }
}

/// Dense handle of an interned class within one [`KnowledgeBase`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ClassId(pub u32);

impl ClassId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// Property a label was read from. Earlier variants win.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum LabelSource {
    RdfsLabel,
    PrefLabel,
    Other,
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LabelCandidate {
    pub text: String,
    pub lang: Option<String>,
    pub source: LabelSource,
}

impl LabelCandidate {
    fn rank(&self) -> (u8, LabelSource, &str) {
        let lang_rank = match self.lang.as_deref() {
            Some(l) if is_english(l) => 0,
            None => 1,
            Some(_) => 2,
        };
        (lang_rank, self.source, self.text.as_str())
    }
}

fn is_english(tag: &str) -> bool {
    let primary = tag.split('-').next().unwrap_or("");
    primary.eq_ignore_ascii_case("en")
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum KbError {
    UnknownClass(ClassId),
    SelfDisjoint(ClassId),
}

impl fmt::Display for KbError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            KbError::UnknownClass(c) => write!(f, "class handle {} is not interned", c.0),
            KbError::SelfDisjoint(c) => {
                write!(f, "class handle {} cannot be disjoint with itself", c.0)
            }
        }
    }
}

/// Subclass edges, asserted disjointness, instance typings and labels.
///
/// Individuals are keyed by IRI and never share the class handle space.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct KnowledgeBase {
    iris: Vec<Iri>,
    index: BTreeMap<Iri, ClassId>,
    subclass_edges: BTreeSet<(ClassId, ClassId)>,
    asserted_disjoint: BTreeSet<(ClassId, ClassId)>,
    instance_types: BTreeMap<Iri, BTreeSet<ClassId>>,
    labels: BTreeMap<ClassId, Vec<LabelCandidate>>,
}

impl KnowledgeBase {
    pub fn new() -> Self {
        Self::default()
    }

    /// Returns the existing handle for `iri` or assigns the next dense one.
    pub fn intern(&mut self, iri: Iri) -> ClassId {
        if let Some(&id) = self.index.get(&iri) {
            return id;
        }
        let id = ClassId(self.iris.len() as u32);
        self.iris.push(iri.clone());
        self.index.insert(iri, id);
        id
    }

    /// Validating convenience wrapper around [`intern`](Self::intern).
    pub fn intern_str(&mut self, iri: &str) -> Result<ClassId, IriError> {
        Ok(self.intern(Iri::new(iri)?))
    }

    pub fn lookup(&self, iri: &str) -> Option<ClassId> {
        self.index.get(iri).copied()
    }

    pub fn get(&self, iri: &Iri) -> Option<ClassId> {
        self.index.get(iri).copied()
    }

    pub fn iri(&self, c: ClassId) -> &Iri {
        &self.iris[c.index()]
    }

    pub fn class_count(&self) -> usize {
        self.iris.len()
    }

    pub fn classes(&self) -> impl ExactSizeIterator<Item = ClassId> + '_ {
        (0..self.iris.len() as u32).map(ClassId)
    }

    pub fn contains(&self, c: ClassId) -> bool {
        c.index() < self.iris.len()
    }

    fn check(&self, c: ClassId) -> Result<(), KbError> {
        if self.contains(c) {
            Ok(())
        } else {
            Err(KbError::UnknownClass(c))
        }
    }

    pub fn add_subclass(&mut self, child: ClassId, parent: ClassId) -> Result<(), KbError> {
        self.check(child)?;
        self.check(parent)?;
        self.subclass_edges.insert((child, parent));
        Ok(())
    }

    /// Stores the unordered pair `{a, b}`.
    pub fn add_disjoint(&mut self, a: ClassId, b: ClassId) -> Result<(), KbError> {
        self.check(a)?;
        self.check(b)?;
        if a == b {
            return Err(KbError::SelfDisjoint(a));
        }
        self.asserted_disjoint.insert((a.min(b), a.max(b)));
        Ok(())
    }

    pub fn add_instance(&mut self, individual: Iri, class: ClassId) -> Result<(), KbError> {
        self.check(class)?;
        self.instance_types.entry(individual).or_default().insert(class);
        Ok(())
    }

    pub fn add_label(&mut self, class: ClassId, label: LabelCandidate) -> Result<(), KbError> {
        self.check(class)?;
        let list = self.labels.entry(class).or_default();
        if let Err(pos) = list.binary_search(&label) {
            list.insert(pos, label);
        }
        Ok(())
    }

    pub fn subclass_edges(&self) -> &BTreeSet<(ClassId, ClassId)> {
        &self.subclass_edges
    }

    /// Unordered pairs stored as `(min handle, max handle)`.
    pub fn asserted_disjoint(&self) -> &BTreeSet<(ClassId, ClassId)> {
        &self.asserted_disjoint
    }

    pub fn instance_types(&self) -> &BTreeMap<Iri, BTreeSet<ClassId>> {
        &self.instance_types
    }

    pub fn label_candidates(&self, c: ClassId) -> &[LabelCandidate] {
        self.labels.get(&c).map(Vec::as_slice).unwrap_or(&[])
    }

    /// Natural-language label used in prompts, always lowercase.
    ///
    /// A stored label wins (English first, then `rdfs:label` over
    /// `skos:prefLabel`, then lexicographic); otherwise the IRI local name is
    /// split on camel-case boundaries.
    pub fn label_of(&self, c: ClassId) -> String {
        let best = self
            .label_candidates(c)
            .iter()
            .filter(|l| !l.text.trim().is_empty())
            .min_by(|a, b| a.rank().cmp(&b.rank()));
        match best {
            Some(l) => l.text.trim().to_lowercase(),
            None => derive_label(self.iri(c).local_name()),
        }
    }
}

/// Splits a local name like `AcademicConference` into `academic conference`.
///
/// Digits stay attached to the word before them; `_` and `-` become spaces.
pub fn derive_label(local: &str) -> String {
    let chars: Vec<char> = local.chars().collect();
    let mut words: Vec<String> = Vec::new();
    let mut cur = String::new();
    for (i, &ch) in chars.iter().enumerate() {
        if ch == '_' || ch == '-' || ch.is_whitespace() {
            if !cur.is_empty() {
                words.push(core::mem::take(&mut cur));
            }
            continue;
        }
        if ch.is_uppercase() && !cur.is_empty() {
            let prev = chars[i - 1];
            let next_lower = chars.get(i + 1).is_some_and(|n| n.is_lowercase());
            let boundary = prev.is_lowercase()
                || prev.is_ascii_digit()
                || (prev.is_uppercase() && next_lower);
            if boundary {
                words.push(core::mem::take(&mut cur));
            }
        }
        cur.push(ch);
    }
    if !cur.is_empty() {
        words.push(cur);
    }
    if words.is_empty() {
        return local.to_lowercase();
    }
    words.join(" ").to_lowercase()
}

impl fmt::Display for ClassId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

impl From<Iri> for String {
    fn from(iri: Iri) -> String {
        iri.0
    }
}

impl TryFrom<&str> for Iri {
    type Error = IriError;
    fn try_from(s: &str) -> Result<Self, Self::Error> {
        Iri::new(s.to_string())
    }
}
