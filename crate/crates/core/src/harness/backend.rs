//! Generation backends: a local command invoked per sample (input on stdin,
//! completion on stdout) or an HTTP endpoint speaking the JSON wire format
//! `{"input": ...}` -> `{"completion": ...}`.

use std::collections::BTreeMap;
use std::io::Read;
use std::path::Path;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::yaml::{parse_stream, NodeKind, YamlNode};

#[derive(Debug, Error)]
pub enum BackendError {
    #[error("backend unavailable: {0}")]
    Unavailable(String),
    #[error("timed out after {0:.1}s")]
    Timeout(f64),
    #[error("backend exited with status {0}")]
    NonZeroExit(i32),
    #[error("bad response: {0}")]
    BadResponse(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read backend config {0}: {1}")]
    Io(String, std::io::Error),
    #[error("backend config: {0}")]
    Parse(#[from] crate::yaml::ParseError),
    #[error("backend config {0}: {1}")]
    Invalid(String, String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BackendKind {
    Command,
    Http,
}

/// Configuration for one generation backend.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct BackendConfig {
    pub kind: BackendKind,
    /// Program plus arguments (command backends).
    pub command: Vec<String>,
    /// Endpoint URL (http backends).
    pub endpoint: String,
    /// Request headers (http backends).
    pub headers: BTreeMap<String, String>,
    /// Per-call timeout in seconds.
    pub timeout_secs: f64,
    /// Cap on completion bytes read from a command backend.
    pub max_output_bytes: usize,
    /// Model context window, approximated in whitespace-separated units.
    pub context_window: usize,
    /// Prepend `Ansible\n` to every model input.
    pub ansible_prefix: bool,
    /// Cap on completion lines.
    pub max_new_lines: usize,
}

impl BackendConfig {
    pub fn command(program_and_args: Vec<String>) -> Self {
        BackendConfig {
            kind: BackendKind::Command,
            command: program_and_args,
            endpoint: String::new(),
            headers: BTreeMap::new(),
            timeout_secs: 60.0,
            max_output_bytes: 1 << 20,
            context_window: 1024,
            ansible_prefix: false,
            max_new_lines: 200,
        }
    }

    pub fn http(endpoint: impl Into<String>) -> Self {
        BackendConfig {
            kind: BackendKind::Http,
            endpoint: endpoint.into(),
            ..BackendConfig::command(Vec::new())
        }
    }

    /// Load from a YAML mapping mirroring the struct fields.
    pub fn from_yaml_file(path: &Path) -> Result<Self, ConfigError> {
        let name = path.display().to_string();
        let text =
            std::fs::read_to_string(path).map_err(|e| ConfigError::Io(name.clone(), e))?;
        Self::from_yaml(&text, &name)
    }

    pub fn from_yaml(text: &str, source_name: &str) -> Result<Self, ConfigError> {
        let invalid = |m: String| ConfigError::Invalid(source_name.to_string(), m);
        let doc = parse_stream(text, source_name)?;
        let root = doc
            .sole_root()
            .ok_or_else(|| invalid("expected a single mapping document".into()))?;
        let pairs = root
            .as_mapping()
            .ok_or_else(|| invalid("expected a mapping at the root".into()))?;

        let mut kind = None;
        let mut config = BackendConfig::command(Vec::new());
        for (key, value) in pairs {
            let key_text = key.key_text().unwrap_or_default();
            match key_text.as_str() {
                "kind" => {
                    kind = Some(match value.key_text().as_deref() {
                        Some("command") => BackendKind::Command,
                        Some("http") => BackendKind::Http,
                        other => {
                            return Err(invalid(format!(
                                "kind must be `command` or `http`, got {other:?}"
                            )))
                        }
                    });
                }
                "command" => config.command = string_list(value).ok_or_else(|| {
                    invalid("`command` must be a list of strings".into())
                })?,
                "endpoint" => {
                    config.endpoint = value
                        .key_text()
                        .ok_or_else(|| invalid("`endpoint` must be a scalar".into()))?;
                }
                "headers" => {
                    let map = value
                        .as_mapping()
                        .ok_or_else(|| invalid("`headers` must be a mapping".into()))?;
                    for (hk, hv) in map {
                        config.headers.insert(
                            hk.key_text().unwrap_or_default(),
                            hv.key_text().unwrap_or_default(),
                        );
                    }
                }
                "timeout_secs" => {
                    config.timeout_secs = number(value)
                        .ok_or_else(|| invalid("`timeout_secs` must be a number".into()))?;
                }
                "max_output_bytes" => {
                    config.max_output_bytes = number(value)
                        .ok_or_else(|| invalid("`max_output_bytes` must be a number".into()))?
                        as usize;
                }
                "context_window" => {
                    config.context_window = number(value)
                        .ok_or_else(|| invalid("`context_window` must be a number".into()))?
                        as usize;
                }
                "ansible_prefix" => {
                    config.ansible_prefix = matches!(
                        value.resolved(),
                        Some(crate::yaml::ScalarValue::Bool(true))
                    );
                }
                "max_new_lines" => {
                    config.max_new_lines = number(value)
                        .ok_or_else(|| invalid("`max_new_lines` must be a number".into()))?
                        as usize;
                }
                other => return Err(invalid(format!("unknown field `{other}`"))),
            }
        }
        config.kind = kind.ok_or_else(|| invalid("missing `kind`".into()))?;
        if config.timeout_secs <= 0.0 {
            return Err(invalid("timeout_secs must be positive".into()));
        }
        if config.context_window == 0 {
            return Err(invalid("context_window must be positive".into()));
        }
        match config.kind {
            BackendKind::Command if config.command.is_empty() => {
                Err(invalid("command backends need a `command` list".into()))
            }
            BackendKind::Http if config.endpoint.is_empty() => {
                Err(invalid("http backends need an `endpoint`".into()))
            }
            _ => Ok(config),
        }
    }

    /// Short label for report metadata.
    pub fn label(&self) -> String {
        match self.kind {
            BackendKind::Command => format!("command:{}", self.command.join(" ")),
            BackendKind::Http => format!("http:{}", self.endpoint),
        }
    }
}

fn string_list(node: &YamlNode) -> Option<Vec<String>> {
    let items = node.as_sequence()?;
    items.iter().map(YamlNode::key_text).collect()
}

fn number(node: &YamlNode) -> Option<f64> {
    match node.resolved()? {
        crate::yaml::ScalarValue::Int(i) => Some(i as f64),
        crate::yaml::ScalarValue::Float(f) => Some(f),
        _ => None,
    }
}

/// Left-truncate `input` to roughly 90% of the context window, counting
/// whitespace-separated units. Whole lines are dropped from the front so
/// the surviving suffix keeps its YAML shape; the final line always
/// survives.
pub fn left_truncate(input: &str, context_window: usize) -> String {
    let budget = ((context_window as f64) * 0.9).floor().max(1.0) as usize;
    let total: usize = input.split_whitespace().count();
    if total <= budget {
        return input.to_string();
    }
    let lines: Vec<&str> = input.split_inclusive('\n').collect();
    let mut remaining = total;
    let mut start = 0;
    while start + 1 < lines.len() {
        let line_units = lines[start].split_whitespace().count();
        if remaining - line_units < 1 {
            break;
        }
        remaining -= line_units;
        start += 1;
        if remaining <= budget {
            break;
        }
    }
    lines[start..].concat()
}

/// A ready-to-call backend built from its config.
pub struct Backend {
    config: BackendConfig,
    client: Option<reqwest::blocking::Client>,
}

impl Backend {
    pub fn new(config: BackendConfig) -> Result<Self, BackendError> {
        let client = match config.kind {
            BackendKind::Http => {
                let client = reqwest::blocking::Client::builder()
                    .timeout(Duration::from_secs_f64(config.timeout_secs))
                    .build()
                    .map_err(|e| BackendError::Unavailable(e.to_string()))?;
                Some(client)
            }
            BackendKind::Command => None,
        };
        Ok(Backend { config, client })
    }

    pub fn config(&self) -> &BackendConfig {
        &self.config
    }

    /// Build the exact text sent to the model for a sample input.
    pub fn model_input(&self, input_text: &str) -> String {
        let truncated = left_truncate(input_text, self.config.context_window);
        if self.config.ansible_prefix {
            format!("Ansible\n{truncated}")
        } else {
            truncated
        }
    }

    /// Fail-fast availability check, run once before a generation loop.
    pub fn probe(&self) -> Result<(), BackendError> {
        match self.config.kind {
            BackendKind::Command => {
                let program = &self.config.command[0];
                if program_resolves(program) {
                    Ok(())
                } else {
                    Err(BackendError::Unavailable(format!("program `{program}` not found")))
                }
            }
            BackendKind::Http => {
                let (host, port) = host_port(&self.config.endpoint).ok_or_else(|| {
                    BackendError::Unavailable(format!(
                        "cannot parse endpoint `{}`",
                        self.config.endpoint
                    ))
                })?;
                let addr = format!("{host}:{port}");
                let mut addrs = std::net::ToSocketAddrs::to_socket_addrs(&addr)
                    .map_err(|e| BackendError::Unavailable(format!("{addr}: {e}")))?;
                let addr = addrs
                    .next()
                    .ok_or_else(|| BackendError::Unavailable(format!("{addr}: no address")))?;
                std::net::TcpStream::connect_timeout(&addr, Duration::from_secs(5))
                    .map_err(|e| BackendError::Unavailable(format!("{addr}: {e}")))?;
                Ok(())
            }
        }
    }

    /// One completion call. Per-sample failures are returned as errors and
    /// recorded by the caller; they never abort a run.
    pub fn complete(&self, model_input: &str) -> Result<String, BackendError> {
        match self.config.kind {
            BackendKind::Command => self.complete_command(model_input),
            BackendKind::Http => self.complete_http(model_input),
        }
    }

    fn complete_command(&self, input: &str) -> Result<String, BackendError> {
        use std::process::{Command, Stdio};
        let mut cmd = Command::new(&self.config.command[0]);
        cmd.args(&self.config.command[1..])
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::null());
        let mut child = cmd.spawn().map_err(|e| {
            BackendError::Unavailable(format!("{}: {e}", self.config.command[0]))
        })?;

        let mut stdin = child.stdin.take().expect("stdin piped");
        let input_owned = input.to_string();
        let writer = std::thread::spawn(move || {
            use std::io::Write;
            let _ = stdin.write_all(input_owned.as_bytes());
        });
        let mut stdout = child.stdout.take().expect("stdout piped");
        let max = self.config.max_output_bytes as u64;
        let reader = std::thread::spawn(move || {
            let mut buf = Vec::new();
            let _ = (&mut stdout).take(max).read_to_end(&mut buf);
            let _ = std::io::copy(&mut stdout, &mut std::io::sink());
            buf
        });

        let deadline = Instant::now() + Duration::from_secs_f64(self.config.timeout_secs);
        let status = loop {
            if let Some(status) = child.try_wait()? {
                break status;
            }
            if Instant::now() >= deadline {
                let _ = child.kill();
                let _ = child.wait();
                let _ = writer.join();
                let _ = reader.join();
                return Err(BackendError::Timeout(self.config.timeout_secs));
            }
            std::thread::sleep(Duration::from_millis(5));
        };
        let _ = writer.join();
        let bytes = reader.join().unwrap_or_default();
        if !status.success() {
            return Err(BackendError::NonZeroExit(status.code().unwrap_or(-1)));
        }
        let text = String::from_utf8_lossy(&bytes).into_owned();
        Ok(cap_lines(&text, self.config.max_new_lines))
    }

    fn complete_http(&self, input: &str) -> Result<String, BackendError> {
        #[derive(Serialize)]
        struct Request<'a> {
            input: &'a str,
        }
        #[derive(Deserialize)]
        struct Response {
            completion: String,
        }
        let client = self.client.as_ref().expect("http backend has a client");
        let mut request = client
            .post(&self.config.endpoint)
            .json(&Request { input });
        for (name, value) in &self.config.headers {
            request = request.header(name, value);
        }
        let response = request.send().map_err(|e| {
            if e.is_timeout() {
                BackendError::Timeout(self.config.timeout_secs)
            } else {
                BackendError::BadResponse(e.to_string())
            }
        })?;
        let status = response.status();
        if status != reqwest::StatusCode::OK {
            return Err(BackendError::BadResponse(format!("HTTP {status}")));
        }
        let body: Response = response
            .json()
            .map_err(|e| BackendError::BadResponse(format!("invalid body: {e}")))?;
        Ok(cap_lines(&body.completion, self.config.max_new_lines))
    }
}

fn cap_lines(text: &str, max_lines: usize) -> String {
    if max_lines == 0 || text.split_inclusive('\n').count() <= max_lines {
        return text.to_string();
    }
    text.split_inclusive('\n').take(max_lines).collect()
}

fn program_resolves(program: &str) -> bool {
    if program.contains('/') {
        return Path::new(program).is_file();
    }
    std::env::var_os("PATH")
        .map(|paths| {
            std::env::split_paths(&paths).any(|dir| dir.join(program).is_file())
        })
        .unwrap_or(false)
}

fn host_port(endpoint: &str) -> Option<(String, u16)> {
    let rest = endpoint
        .strip_prefix("http://")
        .or_else(|| endpoint.strip_prefix("https://"))?;
    let authority = rest.split(['/', '?']).next()?;
    match authority.rsplit_once(':') {
        Some((host, port)) => Some((host.to_string(), port.parse().ok()?)),
        None => {
            let port = if endpoint.starts_with("https") { 443 } else { 80 };
            Some((authority.to_string(), port))
        }
    }
}
