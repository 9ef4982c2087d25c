//! Model gateway: request digests, backends, and transcript storage.
//!
//! A [`GenerationRequest`] carries the two prompts and the sampling
//! parameters. Its digest covers exactly those inputs, so a stored cell
//! can be checked against the request that would be issued today: same
//! digest, same prompts. Backends are blocking; the HTTP backend speaks
//! the OpenAI chat completions shape and reads its credentials only from
//! the `GSNFORGE_API_KEY` and `GSNFORGE_API_BASE` environment variables.

use std::collections::HashMap;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub const API_KEY_VAR: &str = "GSNFORGE_API_KEY";
pub const API_BASE_VAR: &str = "GSNFORGE_API_BASE";
const DEFAULT_API_BASE: &str = "https://api.openai.com/v1";

/// Model name plus the sampling parameters sent with every request.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub name: String,
    pub temperature: f64,
    pub max_tokens: u32,
}

impl ModelSpec {
    pub fn new(name: &str) -> ModelSpec {
        ModelSpec {
            name: name.to_string(),
            temperature: 1.0,
            max_tokens: 4096,
        }
    }
}

/// One sampling request. `system` names the target system for routing
/// and bookkeeping; it is not part of the digest because the prompts
/// already determine it.
#[derive(Debug, Clone, PartialEq)]
pub struct GenerationRequest {
    pub system: String,
    pub system_prompt: String,
    pub user_prompt: String,
    pub model: ModelSpec,
}

impl GenerationRequest {
    /// Hex SHA-256 over the prompts and sampling parameters,
    /// length-prefixed per field so concatenations cannot collide.
    pub fn digest(&self) -> String {
        let mut hasher = Sha256::new();
        let fields = [
            self.system_prompt.as_str(),
            self.user_prompt.as_str(),
            self.model.name.as_str(),
            &format!("{:?}", self.model.temperature),
            &self.model.max_tokens.to_string(),
        ];
        for field in fields {
            hasher.update((field.len() as u64).to_le_bytes());
            hasher.update(field.as_bytes());
        }
        let out = hasher.finalize();
        out.iter().map(|b| format!("{b:02x}")).collect()
    }
}

#[derive(Debug, Clone)]
pub struct GenerationResponse {
    pub text: String,
    /// Unix seconds; the echo backend pins this to 0 so replays are
    /// byte-identical.
    pub created_unix: u64,
    pub attempts: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum BackendError {
    #[error("no API key: set {API_KEY_VAR}")]
    AuthMissing,
    #[error("HTTP {status} after {attempts} attempt(s): {body_snippet}")]
    Http {
        status: u16,
        body_snippet: String,
        attempts: u32,
    },
    #[error("network failure after {attempts} attempt(s): {message}")]
    Network { message: String, attempts: u32 },
    #[error("malformed response: {message}")]
    MalformedResponse { message: String },
}

pub trait Backend: Send + Sync {
    fn generate(&self, request: &GenerationRequest) -> Result<GenerationResponse, BackendError>;
}

/// Deterministic offline backend: answers every request for a system
/// with a canned text. Used to exercise the full pipeline without a
/// network.
#[derive(Debug, Clone, Default)]
pub struct EchoBackend {
    responses: HashMap<String, String>,
}

impl EchoBackend {
    pub fn new(responses: HashMap<String, String>) -> EchoBackend {
        EchoBackend { responses }
    }

    pub fn insert(&mut self, system: &str, text: &str) {
        self.responses.insert(system.to_string(), text.to_string());
    }
}

impl Backend for EchoBackend {
    fn generate(&self, request: &GenerationRequest) -> Result<GenerationResponse, BackendError> {
        let text =
            self.responses
                .get(&request.system)
                .ok_or_else(|| BackendError::MalformedResponse {
                    message: format!("no canned response for system '{}'", request.system),
                })?;
        Ok(GenerationResponse {
            text: text.clone(),
            created_unix: 0,
            attempts: 1,
        })
    }
}

/// Blocking OpenAI-compatible chat completions client with bounded
/// retries and exponential backoff.
#[derive(Debug)]
pub struct HttpBackend {
    api_base: String,
    api_key: String,
    client: reqwest::blocking::Client,
    max_attempts: u32,
    backoff_base_ms: u64,
}

impl HttpBackend {
    /// Credentials come only from the environment.
    pub fn from_env() -> Result<HttpBackend, BackendError> {
        let key = std::env::var(API_KEY_VAR).map_err(|_| BackendError::AuthMissing)?;
        if key.trim().is_empty() {
            return Err(BackendError::AuthMissing);
        }
        let base = std::env::var(API_BASE_VAR).unwrap_or_else(|_| DEFAULT_API_BASE.to_string());
        Ok(HttpBackend::with_config(&base, &key, 3, 500))
    }

    pub fn with_config(
        api_base: &str,
        api_key: &str,
        max_attempts: u32,
        backoff_base_ms: u64,
    ) -> HttpBackend {
        HttpBackend {
            api_base: api_base.trim_end_matches('/').to_string(),
            api_key: api_key.to_string(),
            client: reqwest::blocking::Client::new(),
            max_attempts: max_attempts.max(1),
            backoff_base_ms,
        }
    }

    fn parse_completion(body: &str) -> Result<String, BackendError> {
        let value: serde_json::Value =
            serde_json::from_str(body).map_err(|e| BackendError::MalformedResponse {
                message: e.to_string(),
            })?;
        value["choices"][0]["message"]["content"]
            .as_str()
            .map(str::to_string)
            .ok_or_else(|| BackendError::MalformedResponse {
                message: "missing choices[0].message.content".to_string(),
            })
    }
}

impl Backend for HttpBackend {
    fn generate(&self, request: &GenerationRequest) -> Result<GenerationResponse, BackendError> {
        let url = format!("{}/chat/completions", self.api_base);
        let body = serde_json::json!({
            "model": request.model.name,
            "temperature": request.model.temperature,
            "max_tokens": request.model.max_tokens,
            "messages": [
                { "role": "system", "content": request.system_prompt },
                { "role": "user", "content": request.user_prompt },
            ],
        });

        let mut last_error = BackendError::Network {
            message: "no attempt made".to_string(),
            attempts: 0,
        };
        for attempt in 1..=self.max_attempts {
            let sent = self
                .client
                .post(&url)
                .bearer_auth(&self.api_key)
                .json(&body)
                .send();
            match sent {
                Ok(response) => {
                    let status = response.status();
                    let text = response.text().unwrap_or_default();
                    if status.is_success() {
                        let content = Self::parse_completion(&text)?;
                        let created_unix = std::time::SystemTime::now()
                            .duration_since(std::time::UNIX_EPOCH)
                            .map(|d| d.as_secs())
                            .unwrap_or(0);
                        return Ok(GenerationResponse {
                            text: content,
                            created_unix,
                            attempts: attempt,
                        });
                    }
                    let retryable = status.as_u16() == 429 || status.is_server_error();
                    last_error = BackendError::Http {
                        status: status.as_u16(),
                        body_snippet: text.chars().take(200).collect(),
                        attempts: attempt,
                    };
                    if !retryable {
                        return Err(last_error);
                    }
                }
                Err(e) => {
                    last_error = BackendError::Network {
                        message: e.to_string(),
                        attempts: attempt,
                    };
                }
            }
            if attempt < self.max_attempts {
                let delay = self.backoff_base_ms.saturating_mul(1u64 << (attempt - 1));
                std::thread::sleep(std::time::Duration::from_millis(delay));
            }
        }
        Err(last_error)
    }
}

/// One line of a cell's transcript file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TranscriptRecord {
    pub digest: String,
    pub experiment: String,
    pub system: String,
    pub model: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub example_system: Option<String>,
    /// 1-based sample index within the cell.
    pub sample: u32,
    pub system_prompt: String,
    pub user_prompt: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub response: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub attempts: u32,
    pub created_unix: u64,
}

/// Identifies one matrix cell on disk.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CellKey {
    pub experiment: String,
    pub system: String,
    pub model: String,
    /// Set only when the example axis varies between cells.
    pub example: Option<String>,
}

/// Append-only JSONL transcript storage laid out as
/// `runs/<experiment>/<system>/<model>[/ex-<example>]/transcripts.jsonl`.
#[derive(Debug, Clone)]
pub struct TranscriptStore {
    root: PathBuf,
}

fn path_component(raw: &str) -> String {
    raw.chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || matches!(c, '-' | '_' | '.') {
                c
            } else {
                '_'
            }
        })
        .collect()
}

impl TranscriptStore {
    pub fn new(root: &Path) -> TranscriptStore {
        TranscriptStore {
            root: root.to_path_buf(),
        }
    }

    pub fn cell_dir(&self, key: &CellKey) -> PathBuf {
        let mut dir = self
            .root
            .join("runs")
            .join(path_component(&key.experiment))
            .join(path_component(&key.system))
            .join(path_component(&key.model));
        if let Some(example) = &key.example {
            dir = dir.join(format!("ex-{}", path_component(example)));
        }
        dir
    }

    pub fn transcript_path(&self, key: &CellKey) -> PathBuf {
        self.cell_dir(key).join("transcripts.jsonl")
    }

    pub fn append(&self, key: &CellKey, record: &TranscriptRecord) -> std::io::Result<()> {
        let dir = self.cell_dir(key);
        std::fs::create_dir_all(&dir)?;
        let mut file = std::fs::OpenOptions::new()
            .create(true)
            .append(true)
            .open(dir.join("transcripts.jsonl"))?;
        let line = serde_json::to_string(record).expect("record serializes");
        writeln!(file, "{line}")
    }

    pub fn clear(&self, key: &CellKey) -> std::io::Result<()> {
        let path = self.transcript_path(key);
        if path.exists() {
            std::fs::remove_file(path)?;
        }
        Ok(())
    }

    pub fn read_all(&self, key: &CellKey) -> std::io::Result<Vec<TranscriptRecord>> {
        let path = self.transcript_path(key);
        if !path.exists() {
            return Ok(Vec::new());
        }
        let text = std::fs::read_to_string(path)?;
        let mut records = Vec::new();
        for line in text.lines().filter(|l| !l.trim().is_empty()) {
            let record = serde_json::from_str(line)
                .map_err(|e| std::io::Error::new(std::io::ErrorKind::InvalidData, e.to_string()))?;
            records.push(record);
        }
        Ok(records)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::{Read, Write};
    use std::net::TcpListener;
    use std::sync::atomic::{AtomicUsize, Ordering};
    use std::sync::Arc;

    fn request() -> GenerationRequest {
        GenerationRequest {
            system: "acas_xu".to_string(),
            system_prompt: "You are an assistant.".to_string(),
            user_prompt: "Create a case.".to_string(),
            model: ModelSpec::new("gpt-4"),
        }
    }

    #[test]
    fn digest_is_stable_and_input_sensitive() {
        let base = request();
        assert_eq!(base.digest(), request().digest());
        assert_eq!(base.digest().len(), 64);

        let mut other = request();
        other.user_prompt.push('!');
        assert_ne!(base.digest(), other.digest());

        let mut other = request();
        other.model.temperature = 0.5;
        assert_ne!(base.digest(), other.digest());

        let mut other = request();
        other.model.max_tokens = 1024;
        assert_ne!(base.digest(), other.digest());

        // Field boundaries matter: moving a character between prompts
        // must change the hash.
        let mut a = request();
        a.system_prompt = "ab".to_string();
        a.user_prompt = "c".to_string();
        let mut b = request();
        b.system_prompt = "a".to_string();
        b.user_prompt = "bc".to_string();
        assert_ne!(a.digest(), b.digest());

        // The routing name is bookkeeping, not request content.
        let mut renamed = request();
        renamed.system = "bluerov2".to_string();
        assert_eq!(base.digest(), renamed.digest());
    }

    #[test]
    fn echo_backend_is_fixed_and_keyed_by_system() {
        let mut echo = EchoBackend::default();
        echo.insert("acas_xu", "Goal G1: canned");
        let ok = echo.generate(&request()).unwrap();
        assert_eq!(ok.text, "Goal G1: canned");
        assert_eq!(ok.created_unix, 0);
        assert_eq!(ok.attempts, 1);

        let mut unknown = request();
        unknown.system = "missing".to_string();
        assert!(matches!(
            echo.generate(&unknown),
            Err(BackendError::MalformedResponse { .. })
        ));
    }

    #[test]
    fn http_backend_requires_credentials_from_the_environment() {
        std::env::remove_var(API_KEY_VAR);
        assert_eq!(
            HttpBackend::from_env().unwrap_err(),
            BackendError::AuthMissing
        );
    }

    /// Minimal HTTP/1.1 responder: reads one request, sends `response`,
    /// counts hits.
    fn spawn_stub(response: &'static str, hits: Arc<AtomicUsize>) -> String {
        let listener = TcpListener::bind("127.0.0.1:0").unwrap();
        let addr = listener.local_addr().unwrap();
        std::thread::spawn(move || {
            for stream in listener.incoming() {
                let Ok(mut stream) = stream else { break };
                hits.fetch_add(1, Ordering::SeqCst);
                let mut buf = [0u8; 65536];
                let mut seen = Vec::new();
                loop {
                    let n = stream.read(&mut buf).unwrap_or(0);
                    if n == 0 {
                        break;
                    }
                    seen.extend_from_slice(&buf[..n]);
                    if let Some(pos) = seen.windows(4).position(|w| w == b"\r\n\r\n") {
                        let headers = String::from_utf8_lossy(&seen[..pos]).to_string();
                        let body_len = headers
                            .lines()
                            .find_map(|l| {
                                l.to_ascii_lowercase()
                                    .strip_prefix("content-length:")
                                    .map(|v| v.trim().parse::<usize>().unwrap_or(0))
                            })
                            .unwrap_or(0);
                        while seen.len() < pos + 4 + body_len {
                            let n = stream.read(&mut buf).unwrap_or(0);
                            if n == 0 {
                                break;
                            }
                            seen.extend_from_slice(&buf[..n]);
                        }
                        break;
                    }
                }
                let _ = stream.write_all(response.as_bytes());
            }
        });
        format!("http://{addr}")
    }

    #[test]
    fn http_backend_parses_a_chat_completion() {
        let body = r#"{"choices":[{"message":{"role":"assistant","content":"Goal G1: ok"}}]}"#;
        let response = format!(
            "HTTP/1.1 200 OK\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{}",
            body.len(),
            body
        );
        let response: &'static str = Box::leak(response.into_boxed_str());
        let hits = Arc::new(AtomicUsize::new(0));
        let base = spawn_stub(response, hits.clone());

        let backend = HttpBackend::with_config(&base, "test-key", 3, 1);
        let ok = backend.generate(&request()).unwrap();
        assert_eq!(ok.text, "Goal G1: ok");
        assert_eq!(ok.attempts, 1);
        assert_eq!(hits.load(Ordering::SeqCst), 1);
    }

    #[test]
    fn http_backend_retries_server_errors_then_reports_them() {
        let response = "HTTP/1.1 500 Internal Server Error\r\nContent-Length: 5\r\nConnection: close\r\n\r\noops\n";
        let hits = Arc::new(AtomicUsize::new(0));
        let base = spawn_stub(response, hits.clone());

        let backend = HttpBackend::with_config(&base, "test-key", 3, 1);
        for _ in 0..5 {
            let err = backend.generate(&request()).unwrap_err();
            match err {
                BackendError::Http {
                    status, attempts, ..
                } => {
                    assert_eq!(status, 500);
                    assert_eq!(attempts, 3);
                }
                other => panic!("unexpected error: {other:?}"),
            }
        }
        assert_eq!(hits.load(Ordering::SeqCst), 15);
    }

    #[test]
    fn http_backend_does_not_retry_client_errors() {
        let response =
            "HTTP/1.1 400 Bad Request\r\nContent-Length: 3\r\nConnection: close\r\n\r\nno\n";
        let hits = Arc::new(AtomicUsize::new(0));
        let base = spawn_stub(response, hits.clone());

        let backend = HttpBackend::with_config(&base, "test-key", 3, 1);
        let err = backend.generate(&request()).unwrap_err();
        assert!(matches!(
            err,
            BackendError::Http {
                status: 400,
                attempts: 1,
                ..
            }
        ));
        assert_eq!(hits.load(Ordering::SeqCst), 1);
    }

    #[test]
    fn transcript_store_lays_out_cells_and_round_trips_records() {
        let dir = tempfile::tempdir().unwrap();
        let store = TranscriptStore::new(dir.path());
        let key = CellKey {
            experiment: "E2".to_string(),
            system: "acas_xu".to_string(),
            model: "gpt-4".to_string(),
            example: None,
        };
        assert!(store
            .transcript_path(&key)
            .ends_with("runs/E2/acas_xu/gpt-4/transcripts.jsonl"));

        let looped = CellKey {
            example: Some("bluerov2".to_string()),
            ..key.clone()
        };
        assert!(store
            .transcript_path(&looped)
            .ends_with("runs/E2/acas_xu/gpt-4/ex-bluerov2/transcripts.jsonl"));

        let record = TranscriptRecord {
            digest: "d".repeat(64),
            experiment: "E2".to_string(),
            system: "acas_xu".to_string(),
            model: "gpt-4".to_string(),
            example_system: None,
            sample: 1,
            system_prompt: "sys".to_string(),
            user_prompt: "user".to_string(),
            response: Some("Goal G1: text".to_string()),
            error: None,
            attempts: 1,
            created_unix: 0,
        };
        store.append(&key, &record).unwrap();
        let mut second = record.clone();
        second.sample = 2;
        second.response = None;
        second.error = Some("HTTP 500".to_string());
        store.append(&key, &second).unwrap();

        let back = store.read_all(&key).unwrap();
        assert_eq!(back, vec![record, second]);

        store.clear(&key).unwrap();
        assert!(store.read_all(&key).unwrap().is_empty());
    }
}
