//! Minimal WebDriver endpoint that records raw request bytes.

use std::io::{BufRead, BufReader, Read, Write};
use std::net::{TcpListener, TcpStream};
use std::sync::{Arc, Mutex};
use std::thread;

use serde_json::{json, Value};

#[derive(Debug, Clone)]
pub struct StubConfig {
    /// Script source that returns the snapshot document.
    pub extractor: String,
    /// Returned for the extractor script.
    pub snapshot: Value,
    /// Base64 PNG; `None` makes the screenshot endpoint fail.
    pub screenshot: Option<String>,
    /// Omits `sessionId` from the new-session response.
    pub no_session_id: bool,
}

impl StubConfig {
    pub fn new(extractor: &str, snapshot: Value) -> Self {
        StubConfig {
            extractor: extractor.into(),
            snapshot,
            screenshot: None,
            no_session_id: false,
        }
    }
}

pub struct Stub {
    pub url: String,
    pub port: u16,
    requests: Arc<Mutex<Vec<Vec<u8>>>>,
}

impl Stub {
    pub fn start(config: StubConfig) -> Stub {
        let listener = TcpListener::bind("127.0.0.1:0").unwrap();
        let port = listener.local_addr().unwrap().port();
        let requests = Arc::new(Mutex::new(Vec::new()));
        let log = requests.clone();
        thread::spawn(move || {
            for stream in listener.incoming() {
                let Ok(stream) = stream else { break };
                let _ = serve(stream, &config, &log);
            }
        });
        Stub {
            url: format!("http://127.0.0.1:{port}"),
            port,
            requests,
        }
    }

    pub fn requests(&self) -> Vec<Vec<u8>> {
        self.requests.lock().unwrap().clone()
    }

    pub fn request_count(&self) -> usize {
        self.requests.lock().unwrap().len()
    }

    /// Request lines (`METHOD path`) received so far.
    pub fn request_lines(&self) -> Vec<String> {
        self.requests()
            .iter()
            .map(|r| {
                let text = String::from_utf8_lossy(r);
                let line = text.lines().next().unwrap_or_default();
                line.trim_end_matches(" HTTP/1.1").to_owned()
            })
            .collect()
    }
}

fn serve(stream: TcpStream, config: &StubConfig, log: &Mutex<Vec<Vec<u8>>>) -> std::io::Result<()> {
    let mut reader = BufReader::new(stream.try_clone()?);
    let mut raw = Vec::new();
    let mut length = 0usize;
    loop {
        let mut line = String::new();
        if reader.read_line(&mut line)? == 0 {
            return Ok(());
        }
        raw.extend_from_slice(line.as_bytes());
        if let Some((k, v)) = line.split_once(':') {
            if k.eq_ignore_ascii_case("content-length") {
                length = v.trim().parse().unwrap_or(0);
            }
        }
        if line == "\r\n" {
            break;
        }
    }
    let mut body = vec![0; length];
    reader.read_exact(&mut body)?;
    raw.extend_from_slice(&body);
    let head = String::from_utf8_lossy(&raw).into_owned();
    log.lock().unwrap().push(raw);
    let mut first = head.lines().next().unwrap_or_default().split(' ');
    let (method, path) = (
        first.next().unwrap_or_default(),
        first.next().unwrap_or_default(),
    );
    let body: Value = serde_json::from_slice(&body).unwrap_or(Value::Null);
    let (status, value) = respond(method, path, &body, config);
    let payload = serde_json::to_vec(&json!({ "value": value })).unwrap();
    let mut out = stream;
    write!(
        out,
        "HTTP/1.1 {status} X\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n",
        payload.len()
    )?;
    out.write_all(&payload)?;
    out.flush()
}

fn respond(method: &str, path: &str, body: &Value, config: &StubConfig) -> (u16, Value) {
    if method == "POST" && path == "/session" {
        return if config.no_session_id {
            (200, json!({ "capabilities": {} }))
        } else {
            (200, json!({ "sessionId": "s1", "capabilities": {} }))
        };
    }
    if path.ends_with("/execute/sync") {
        if body.get("script").and_then(Value::as_str) == Some(config.extractor.as_str()) {
            return (200, config.snapshot.clone());
        }
        return (200, json!(true));
    }
    if path.ends_with("/screenshot") {
        return match &config.screenshot {
            Some(png) => (200, json!(png)),
            None => (
                500,
                json!({ "error": "unable to capture screen", "message": "no display", "stacktrace": "" }),
            ),
        };
    }
    if method == "POST" && path.ends_with("/element") {
        let selector = body
            .get("value")
            .and_then(Value::as_str)
            .unwrap_or_default();
        let id = selector
            .split_once("=\"")
            .map(|(_, rest)| rest.trim_end_matches("\"]"))
            .unwrap_or(selector);
        return (
            200,
            json!({ "element-6066-11e4-a52e-4f735411628b": format!("wd-{id}") }),
        );
    }
    (200, Value::Null)
}
