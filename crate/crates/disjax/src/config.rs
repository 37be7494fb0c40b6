//! Flat `key = value` run configuration.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Duration;

use disjax_core::{AmbiguityFallback, PromptSpec, QaMode, SelectionPolicy, Strategy};

use crate::client::{InstructionPlacement, OracleConfig, API_KEY_VAR};
use crate::error::{Error, Result};

pub const KEYS: &[&str] = &[
    "ontology",
    "endpoint_url",
    "model_name",
    "strategy",
    "qa_mode",
    "temperature",
    "seed",
    "selection",
    "cache_path",
    "assume_nonempty",
    "ambiguous_fallback",
    "max_retries",
    "timeout",
    "instruction_placement",
];

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Selection {
    #[default]
    Random,
    Lexicographic,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Config {
    pub ontology: Option<PathBuf>,
    pub endpoint_url: Option<String>,
    pub model_name: Option<String>,
    pub strategy: Strategy,
    pub qa_mode: QaMode,
    pub temperature: f64,
    pub seed: u64,
    pub selection: Selection,
    pub cache_path: Option<PathBuf>,
    pub assume_nonempty: bool,
    pub ambiguous_fallback: AmbiguityFallback,
    pub max_retries: u32,
    pub timeout: Duration,
    pub instruction_placement: InstructionPlacement,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            ontology: None,
            endpoint_url: None,
            model_name: None,
            strategy: Strategy::Naive,
            qa_mode: QaMode::Positive,
            temperature: 0.0,
            seed: 0,
            selection: Selection::Random,
            cache_path: None,
            assume_nonempty: true,
            ambiguous_fallback: AmbiguityFallback::NotDisjoint,
            max_retries: 2,
            timeout: Duration::from_secs(60),
            instruction_placement: InstructionPlacement::System,
        }
    }
}

fn parse_bool(v: &str) -> Option<bool> {
    match v {
        "true" => Some(true),
        "false" => Some(false),
        _ => None,
    }
}

impl Config {
    /// Reads a config file. Relative paths in it resolve against its directory.
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::open(path, e))?;
        let base = path.parent().unwrap_or(Path::new(""));
        let mut cfg = Config::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let err = |m: String| Error::Usage(format!("{}:{}: {m}", path.display(), i + 1));
            let (key, value) = line.split_once('=').ok_or_else(|| err("expected key = value".into()))?;
            let (key, value) = (key.trim(), value.trim());
            cfg.set(key, value).map_err(err)?;
            if matches!(key, "ontology" | "cache_path") {
                let p = base.join(value);
                match key {
                    "ontology" => cfg.ontology = Some(p),
                    _ => cfg.cache_path = Some(p),
                }
            }
        }
        Ok(cfg)
    }

    /// Sets one key; errors name the key and the rejected value.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), String> {
        let bad = |what: &str| format!("invalid {key} {value:?}: expected {what}");
        match key {
            "ontology" => self.ontology = Some(value.into()),
            "endpoint_url" => self.endpoint_url = Some(value.into()),
            "model_name" => self.model_name = Some(value.into()),
            "strategy" => self.strategy = value.parse().map_err(|_| bad("naive, task or fewshot"))?,
            "qa_mode" => self.qa_mode = value.parse().map_err(|_| bad("positive or negative"))?,
            "temperature" => {
                self.temperature = value
                    .parse()
                    .ok()
                    .filter(|t: &f64| t.is_finite() && *t >= 0.0)
                    .ok_or_else(|| bad("a non-negative number"))?
            }
            "seed" => self.seed = value.parse().map_err(|_| bad("an unsigned integer"))?,
            "selection" => {
                self.selection = match value {
                    "random" => Selection::Random,
                    "lex" => Selection::Lexicographic,
                    _ => return Err(bad("random or lex")),
                }
            }
            "cache_path" => self.cache_path = Some(value.into()),
            "assume_nonempty" => self.assume_nonempty = parse_bool(value).ok_or_else(|| bad("true or false"))?,
            "ambiguous_fallback" => {
                self.ambiguous_fallback = value.parse().map_err(|_| bad("not_disjoint or error"))?
            }
            "max_retries" => self.max_retries = value.parse().map_err(|_| bad("an unsigned integer"))?,
            "timeout" => {
                let secs: f64 = value.parse().map_err(|_| bad("seconds"))?;
                self.timeout = Duration::try_from_secs_f64(secs)
                    .ok()
                    .filter(|d| !d.is_zero())
                    .ok_or_else(|| bad("positive seconds"))?;
            }
            "instruction_placement" => {
                self.instruction_placement = match value {
                    "system" => InstructionPlacement::System,
                    "inline" => InstructionPlacement::Inline,
                    _ => return Err(bad("system or inline")),
                }
            }
            _ => return Err(format!("unknown key {key:?}")),
        }
        Ok(())
    }

    pub fn prompt_spec(&self) -> PromptSpec {
        PromptSpec { strategy: self.strategy, qa_mode: self.qa_mode }
    }

    pub fn policy(&self) -> SelectionPolicy {
        match self.selection {
            Selection::Random => SelectionPolicy::Random(self.seed),
            Selection::Lexicographic => SelectionPolicy::Lexicographic,
        }
    }

    pub fn require_ontology(&self) -> Result<&Path> {
        self.ontology
            .as_deref()
            .ok_or_else(|| Error::Usage("no ontology given (--ontology or config key)".into()))
    }

    /// Endpoint settings; the API key comes from the environment.
    pub fn oracle_config(&self) -> Result<OracleConfig> {
        let endpoint_url = self
            .endpoint_url
            .clone()
            .ok_or_else(|| Error::Usage("no endpoint_url configured".into()))?;
        let model_name = self
            .model_name
            .clone()
            .ok_or_else(|| Error::Usage("no model_name configured".into()))?;
        Ok(OracleConfig {
            endpoint_url,
            model_name,
            temperature: self.temperature,
            max_retries: self.max_retries,
            timeout: self.timeout,
            fallback: self.ambiguous_fallback,
            placement: self.instruction_placement,
            api_key: std::env::var(API_KEY_VAR).ok().filter(|k| !k.is_empty()),
        })
    }
}
