//! Prompt templates, verdict parsing and the oracle abstraction.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use core::fmt;
use core::str::FromStr;

/// How much of the task is described to the model.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Strategy {
    Naive,
    TaskDescription,
    FewShot,
}

/// Whether `yes` means disjoint (`Positive`) or overlapping (`Negative`).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum QaMode {
    Positive,
    Negative,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PromptSpec {
    pub strategy: Strategy,
    pub qa_mode: QaMode,
}

impl Strategy {
    pub const ALL: [Strategy; 3] = [Strategy::Naive, Strategy::TaskDescription, Strategy::FewShot];

    pub fn as_str(self) -> &'static str {
        match self {
            Strategy::Naive => "naive",
            Strategy::TaskDescription => "task",
            Strategy::FewShot => "fewshot",
        }
    }

    pub fn instruction(self) -> &'static str {
        match self {
            Strategy::Naive => NAIVE_INSTRUCTION,
            Strategy::TaskDescription => TASK_INSTRUCTION,
            Strategy::FewShot => FEW_SHOT_INSTRUCTION,
        }
    }
}

impl QaMode {
    pub const ALL: [QaMode; 2] = [QaMode::Positive, QaMode::Negative];

    pub fn as_str(self) -> &'static str {
        match self {
            QaMode::Positive => "positive",
            QaMode::Negative => "negative",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParseEnumError {
    pub what: &'static str,
    pub value: String,
}

impl fmt::Display for ParseEnumError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "invalid {} {:?}", self.what, self.value)
    }
}

impl FromStr for Strategy {
    type Err = ParseEnumError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "naive" => Ok(Strategy::Naive),
            "task" => Ok(Strategy::TaskDescription),
            "fewshot" => Ok(Strategy::FewShot),
            _ => Err(ParseEnumError { what: "strategy", value: s.into() }),
        }
    }
}

impl FromStr for QaMode {
    type Err = ParseEnumError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "positive" => Ok(QaMode::Positive),
            "negative" => Ok(QaMode::Negative),
            _ => Err(ParseEnumError { what: "qa mode", value: s.into() }),
        }
    }
}

pub const NAIVE_INSTRUCTION: &str = "Answer only \"yes\" or \"no\".";

pub const TASK_INSTRUCTION: &str =
    "This is a question about ontological disjointness, answer only with \"yes\" or \"no\"";

pub const FEW_SHOT_INSTRUCTION: &str = concat!(
    "This is a question about ontological disjointness, answer only with \"yes\" or \"no\".\n",
    "Examples of disjoint are: \"person\" and \"file system\", \"tower\" and \"person\", ",
    "\"place\" and \"agent\", \"continent\" and \"sea\", \"baseball league\" and ",
    "\"bowling league\", \"planet\" and \"star\".\n",
    "Examples of not disjoint are: \"basketball player\" and \"baseball player\", ",
    "\"means of transportation\" and \"reptile\", \"garden\" and \"historic place\", ",
    "\"president\" and \"beauty queen\", \"castle\" and \"prison\"."
);

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RenderedPrompt {
    pub instruction: String,
    pub question: String,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EmptyLabel;

impl fmt::Display for EmptyLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("class label must not be empty")
    }
}

pub fn render_prompt(spec: PromptSpec, a: &str, b: &str) -> Result<RenderedPrompt, EmptyLabel> {
    if a.trim().is_empty() || b.trim().is_empty() {
        return Err(EmptyLabel);
    }
    let question = match spec.qa_mode {
        QaMode::Positive => format!("Is the class {a} disjoint from {b}?"),
        QaMode::Negative => format!("Can a {a} be a {b}?"),
    };
    Ok(RenderedPrompt { instruction: spec.strategy.instruction().to_string(), question })
}

/// The two possible answers about a pair of classes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Disjointness {
    Disjoint,
    NotDisjoint,
}

impl Disjointness {
    pub fn as_str(self) -> &'static str {
        match self {
            Disjointness::Disjoint => "disjoint",
            Disjointness::NotDisjoint => "not_disjoint",
        }
    }

    pub fn flip(self) -> Self {
        match self {
            Disjointness::Disjoint => Disjointness::NotDisjoint,
            Disjointness::NotDisjoint => Disjointness::Disjoint,
        }
    }
}

impl FromStr for Disjointness {
    type Err = ParseEnumError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "disjoint" => Ok(Disjointness::Disjoint),
            "not_disjoint" => Ok(Disjointness::NotDisjoint),
            _ => Err(ParseEnumError { what: "verdict", value: s.into() }),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Parsed {
    Answer(Disjointness),
    Ambiguous,
}

/// Maps a raw model answer to a verdict, or `Ambiguous`.
pub fn parse_verdict(raw: &str, qa: QaMode) -> Parsed {
    const STRIP: &[char] = &['.', ',', '!', '?', ';', ':', '"', '\'', '`', '*', '(', ')', '[', ']'];
    let lowered = raw.trim().to_lowercase();
    let token = lowered
        .trim_matches(|c: char| STRIP.contains(&c) || c.is_whitespace())
        .split_whitespace()
        .next()
        .unwrap_or("")
        .trim_matches(STRIP);
    let yes = match token {
        "yes" => true,
        "no" => false,
        _ => return Parsed::Ambiguous,
    };
    let disjoint = match qa {
        QaMode::Positive => yes,
        QaMode::Negative => !yes,
    };
    Parsed::Answer(if disjoint { Disjointness::Disjoint } else { Disjointness::NotDisjoint })
}

/// What to do once every retry came back ambiguous.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum AmbiguityFallback {
    #[default]
    NotDisjoint,
    Error,
}

impl FromStr for AmbiguityFallback {
    type Err = ParseEnumError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "not_disjoint" => Ok(AmbiguityFallback::NotDisjoint),
            "error" => Ok(AmbiguityFallback::Error),
            _ => Err(ParseEnumError { what: "ambiguous fallback", value: s.into() }),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Verdict {
    pub value: Disjointness,
    pub raw_response: String,
    pub ambiguous_retries: u32,
    /// Set when `value` came from the ambiguity fallback rather than the model.
    pub fallback: bool,
}

impl Verdict {
    pub fn clean(value: Disjointness, raw: impl Into<String>) -> Self {
        Verdict { value, raw_response: raw.into(), ambiguous_retries: 0, fallback: false }
    }
}

#[derive(Debug, PartialEq, Eq)]
pub enum ResolveError<E> {
    Ask(E),
    /// Every attempt was ambiguous and the fallback policy is `Error`.
    Ambiguous { last_response: String, attempts: u32 },
}

impl<E: fmt::Display> fmt::Display for ResolveError<E> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ResolveError::Ask(e) => e.fmt(f),
            ResolveError::Ambiguous { last_response, attempts } => write!(
                f,
                "no yes/no answer after {attempts} attempts (last: {last_response:?})"
            ),
        }
    }
}

/// Calls `ask` until the answer parses, re-asking at most `max_retries` times.
pub fn resolve_with_retries<E>(
    qa: QaMode,
    max_retries: u32,
    fallback: AmbiguityFallback,
    mut ask: impl FnMut() -> Result<String, E>,
) -> Result<Verdict, ResolveError<E>> {
    let mut retries = 0;
    loop {
        let raw = ask().map_err(ResolveError::Ask)?;
        match parse_verdict(&raw, qa) {
            Parsed::Answer(value) => {
                return Ok(Verdict { value, raw_response: raw, ambiguous_retries: retries, fallback: false })
            }
            Parsed::Ambiguous if retries < max_retries => retries += 1,
            Parsed::Ambiguous => {
                return match fallback {
                    AmbiguityFallback::NotDisjoint => Ok(Verdict {
                        value: Disjointness::NotDisjoint,
                        raw_response: raw,
                        ambiguous_retries: retries,
                        fallback: true,
                    }),
                    AmbiguityFallback::Error => {
                        Err(ResolveError::Ambiguous { last_response: raw, attempts: retries + 1 })
                    }
                }
            }
        }
    }
}

/// One question about a pair, in the order it is put to the model.
#[derive(Clone, Copy, Debug)]
pub struct Question<'a> {
    pub first_iri: &'a str,
    pub second_iri: &'a str,
    pub first_label: &'a str,
    pub second_label: &'a str,
}

impl<'a> Question<'a> {
    pub fn swapped(&self) -> Question<'a> {
        Question {
            first_iri: self.second_iri,
            second_iri: self.first_iri,
            first_label: self.second_label,
            second_label: self.first_label,
        }
    }
}

/// Answers disjointness questions about two classes.
pub trait Oracle {
    type Error;

    fn ask(&mut self, q: &Question<'_>) -> Result<Verdict, Self::Error>;
}

impl<O: Oracle + ?Sized> Oracle for &mut O {
    type Error = O::Error;
    fn ask(&mut self, q: &Question<'_>) -> Result<Verdict, Self::Error> {
        (**self).ask(q)
    }
}

/// Oracle backed by a table of known answers keyed by IRI pair, in either order.
#[derive(Clone, Debug, Default)]
pub struct GoldOracle {
    answers: BTreeMap<(String, String), Disjointness>,
    default: Option<Disjointness>,
    calls: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UnlistedPair {
    pub first: String,
    pub second: String,
}

impl fmt::Display for UnlistedPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "no gold answer for ({}, {})", self.first, self.second)
    }
}

fn unordered(a: &str, b: &str) -> (String, String) {
    if a <= b {
        (a.to_string(), b.to_string())
    } else {
        (b.to_string(), a.to_string())
    }
}

impl GoldOracle {
    /// `default` answers pairs missing from the table; `None` makes them errors.
    pub fn new(default: Option<Disjointness>) -> Self {
        GoldOracle { answers: BTreeMap::new(), default, calls: 0 }
    }

    pub fn insert(&mut self, a: &str, b: &str, value: Disjointness) {
        self.answers.insert(unordered(a, b), value);
    }

    pub fn answer(&self, a: &str, b: &str) -> Option<Disjointness> {
        self.answers.get(&unordered(a, b)).copied().or(self.default)
    }

    pub fn len(&self) -> usize {
        self.answers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.answers.is_empty()
    }

    pub fn calls(&self) -> usize {
        self.calls
    }
}

impl Oracle for GoldOracle {
    type Error = UnlistedPair;

    fn ask(&mut self, q: &Question<'_>) -> Result<Verdict, UnlistedPair> {
        self.calls += 1;
        match self.answer(q.first_iri, q.second_iri) {
            Some(v) => Ok(Verdict::clean(v, v.as_str())),
            None => Err(UnlistedPair { first: q.first_iri.into(), second: q.second_iri.into() }),
        }
    }
}
