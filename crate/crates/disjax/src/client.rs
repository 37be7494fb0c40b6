//! Chat-completion client used as a disjointness oracle.

use std::time::Duration;

use disjax_core::oracle::{resolve_with_retries, ResolveError, UnlistedPair};
use disjax_core::{render_prompt, AmbiguityFallback, Oracle, PromptSpec, Question, Verdict};
use serde_json::{json, Value};

use crate::error::{Error, Result};

pub const API_KEY_VAR: &str = "DISJAX_API_KEY";

/// Where the strategy instruction goes in the request.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum InstructionPlacement {
    /// Separate system message before the question.
    #[default]
    System,
    /// Prepended to the question in a single user message.
    Inline,
}

#[derive(Clone, Debug)]
pub struct OracleConfig {
    pub endpoint_url: String,
    pub model_name: String,
    pub temperature: f64,
    pub max_retries: u32,
    pub timeout: Duration,
    pub fallback: AmbiguityFallback,
    pub placement: InstructionPlacement,
    pub api_key: Option<String>,
}

impl Default for OracleConfig {
    fn default() -> Self {
        OracleConfig {
            endpoint_url: String::new(),
            model_name: String::new(),
            temperature: 0.0,
            max_retries: 2,
            timeout: Duration::from_secs(60),
            fallback: AmbiguityFallback::NotDisjoint,
            placement: InstructionPlacement::System,
            api_key: None,
        }
    }
}

/// JSON body of one chat-completion request.
pub fn request_body(config: &OracleConfig, instruction: &str, question: &str) -> Value {
    let messages = match config.placement {
        InstructionPlacement::System => json!([
            {"role": "system", "content": instruction},
            {"role": "user", "content": question},
        ]),
        InstructionPlacement::Inline => json!([
            {"role": "user", "content": format!("{instruction}\n{question}")},
        ]),
    };
    json!({
        "model": config.model_name,
        "temperature": config.temperature,
        "messages": messages,
    })
}

/// Content of the first choice's message.
pub fn answer_text(response: &Value) -> Option<&str> {
    response.get("choices")?.get(0)?.get("message")?.get("content")?.as_str()
}

pub struct ChatOracle {
    config: OracleConfig,
    spec: PromptSpec,
    agent: ureq::Agent,
    url: String,
    requests: usize,
}

impl ChatOracle {
    pub fn new(config: OracleConfig, spec: PromptSpec) -> Self {
        let agent: ureq::Agent = ureq::Agent::config_builder()
            .timeout_global(Some(config.timeout))
            .http_status_as_error(false)
            .build()
            .into();
        let url = format!("{}/chat/completions", config.endpoint_url.trim_end_matches('/'));
        ChatOracle { config, spec, agent, url, requests: 0 }
    }

    /// HTTP round-trips made so far, including retries.
    pub fn requests(&self) -> usize {
        self.requests
    }

    fn post_once(&mut self, body: &Value) -> std::result::Result<String, PostError> {
        self.requests += 1;
        let mut req = self.agent.post(&self.url);
        if let Some(key) = &self.config.api_key {
            req = req.header("Authorization", &format!("Bearer {key}"));
        }
        let mut resp = req.send_json(body).map_err(|e| PostError::Transport(e.to_string()))?;
        let status = resp.status().as_u16();
        let text = resp
            .body_mut()
            .read_to_string()
            .map_err(|e| PostError::Transport(e.to_string()))?;
        if !(200..300).contains(&status) {
            let body: String = text.chars().take(200).collect();
            return Err(PostError::Protocol { status, body });
        }
        let v: Value = serde_json::from_str(&text)
            .map_err(|e| PostError::Protocol { status, body: format!("invalid JSON: {e}") })?;
        answer_text(&v).map(str::to_owned).ok_or(PostError::Protocol {
            status,
            body: "response has no choices[0].message.content".into(),
        })
    }
}

enum PostError {
    Transport(String),
    Protocol { status: u16, body: String },
}

impl Oracle for ChatOracle {
    type Error = Error;

    fn ask(&mut self, q: &Question<'_>) -> Result<Verdict> {
        let prompt = render_prompt(self.spec, q.first_label, q.second_label)
            .map_err(|e| Error::Oracle(e.to_string()))?;
        let body = request_body(&self.config, &prompt.instruction, &prompt.question);
        let max_retries = self.config.max_retries;
        let pair = || (q.first_iri.to_string(), q.second_iri.to_string());
        let outcome = resolve_with_retries(self.spec.qa_mode, max_retries, self.config.fallback, || {
            let mut attempt = 0;
            loop {
                match self.post_once(&body) {
                    Ok(text) => return Ok(text),
                    Err(PostError::Transport(message)) if attempt >= max_retries => {
                        let (first, second) = pair();
                        return Err(Error::Transport { first, second, message });
                    }
                    Err(PostError::Transport(message)) => {
                        log::warn!("transport error, retrying: {message}");
                        attempt += 1;
                    }
                    Err(PostError::Protocol { status, body }) => {
                        return Err(Error::Protocol { status, body })
                    }
                }
            }
        });
        outcome.map_err(|e| match e {
            ResolveError::Ask(e) => e,
            other @ ResolveError::Ambiguous { .. } => {
                let (first, second) = pair();
                Error::Oracle(format!("({first}, {second}): {other}"))
            }
        })
    }
}

impl From<UnlistedPair> for Error {
    fn from(e: UnlistedPair) -> Self {
        Error::Oracle(e.to_string())
    }
}
