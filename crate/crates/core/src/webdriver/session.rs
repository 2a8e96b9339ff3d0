use serde_json::{json, Value};

use super::http::HttpClient;
use super::WebDriverError;

/// JSON key identifying a web element reference.
pub const ELEMENT_KEY: &str = "element-6066-11e4-a52e-4f735411628b";

/// Wraps a WebDriver element id in its JSON reference form.
pub fn element_ref(id: &str) -> Value {
    json!({ ELEMENT_KEY: id })
}

/// One live WebDriver session. Dropping it deletes the session.
#[derive(Debug)]
pub struct Session {
    http: HttpClient,
    id: String,
    capabilities: Value,
    live: bool,
}

impl Session {
    /// Opens a session at `endpoint` with no capability constraints.
    pub fn connect(endpoint: &str) -> Result<Self, WebDriverError> {
        Session::start(HttpClient::new(endpoint)?, json!({}))
    }

    /// Opens a session requesting `capabilities` as `alwaysMatch`.
    pub fn start(http: HttpClient, capabilities: Value) -> Result<Self, WebDriverError> {
        let body = json!({ "capabilities": { "alwaysMatch": capabilities } });
        let value = send(&http, "POST", "/session", Some(&body))?;
        let id = value
            .get("sessionId")
            .and_then(Value::as_str)
            .filter(|s| !s.is_empty())
            .ok_or_else(|| WebDriverError::Protocol("new-session response lacks sessionId".into()))?
            .to_owned();
        let capabilities = value.get("capabilities").cloned().unwrap_or(Value::Null);
        Ok(Session {
            http,
            id,
            capabilities,
            live: true,
        })
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn capabilities(&self) -> &Value {
        &self.capabilities
    }

    pub fn http(&self) -> &HttpClient {
        &self.http
    }

    /// Sends a session-scoped command and returns its `value`.
    pub fn command(
        &self,
        method: &str,
        suffix: &str,
        body: Option<&Value>,
    ) -> Result<Value, WebDriverError> {
        if !self.live {
            return Err(WebDriverError::Closed);
        }
        send(
            &self.http,
            method,
            &format!("/session/{}{suffix}", self.id),
            body,
        )
    }

    pub fn navigate(&self, url: &str) -> Result<(), WebDriverError> {
        self.command("POST", "/url", Some(&json!({ "url": url })))
            .map(drop)
    }

    pub fn current_url(&self) -> Result<String, WebDriverError> {
        let v = self.command("GET", "/url", None)?;
        v.as_str()
            .map(str::to_owned)
            .ok_or_else(|| WebDriverError::Protocol("url is not a string".into()))
    }

    pub fn back(&self) -> Result<(), WebDriverError> {
        self.command("POST", "/back", Some(&json!({}))).map(drop)
    }

    pub fn forward(&self) -> Result<(), WebDriverError> {
        self.command("POST", "/forward", Some(&json!({}))).map(drop)
    }

    pub fn execute_sync(&self, script: &str, args: Vec<Value>) -> Result<Value, WebDriverError> {
        self.command(
            "POST",
            "/execute/sync",
            Some(&json!({ "script": script, "args": args })),
        )
    }

    /// Base64-encoded PNG of the viewport.
    pub fn screenshot(&self) -> Result<String, WebDriverError> {
        let v = self.command("GET", "/screenshot", None)?;
        v.as_str()
            .map(str::to_owned)
            .ok_or_else(|| WebDriverError::Protocol("screenshot is not a string".into()))
    }

    /// Finds one element by CSS selector and returns its WebDriver id.
    pub fn find_css(&self, selector: &str) -> Result<String, WebDriverError> {
        let body = json!({ "using": "css selector", "value": selector });
        let v = self.command("POST", "/element", Some(&body))?;
        v.get(ELEMENT_KEY)
            .and_then(Value::as_str)
            .map(str::to_owned)
            .ok_or_else(|| {
                WebDriverError::Protocol("find-element response lacks an element reference".into())
            })
    }

    pub fn click(&self, element: &str) -> Result<(), WebDriverError> {
        self.command(
            "POST",
            &format!("/element/{element}/click"),
            Some(&json!({})),
        )
        .map(drop)
    }

    pub fn clear(&self, element: &str) -> Result<(), WebDriverError> {
        self.command(
            "POST",
            &format!("/element/{element}/clear"),
            Some(&json!({})),
        )
        .map(drop)
    }

    pub fn send_keys(&self, element: &str, text: &str) -> Result<(), WebDriverError> {
        self.command(
            "POST",
            &format!("/element/{element}/value"),
            Some(&json!({ "text": text })),
        )
        .map(drop)
    }

    /// Performs input source action sequences.
    pub fn perform_actions(&self, actions: Value) -> Result<(), WebDriverError> {
        self.command("POST", "/actions", Some(&json!({ "actions": actions })))
            .map(drop)
    }

    pub fn release_actions(&self) -> Result<(), WebDriverError> {
        self.command("DELETE", "/actions", None).map(drop)
    }

    /// Deletes the session. Later commands fail with `Closed`.
    pub fn quit(&mut self) -> Result<(), WebDriverError> {
        if !self.live {
            return Ok(());
        }
        self.live = false;
        send(&self.http, "DELETE", &format!("/session/{}", self.id), None).map(drop)
    }
}

impl Drop for Session {
    fn drop(&mut self) {
        let _ = self.quit();
    }
}

/// Issues a request and unwraps the W3C `{"value": ...}` envelope, turning
/// error payloads into `Command` errors.
fn send(
    http: &HttpClient,
    method: &str,
    path: &str,
    body: Option<&Value>,
) -> Result<Value, WebDriverError> {
    let resp = http.request(method, path, body)?;
    let value = match resp.body {
        Value::Object(mut map) => map.remove("value").ok_or_else(|| {
            WebDriverError::Protocol(format!("response to {method} {path} lacks `value`"))
        })?,
        other => {
            return Err(WebDriverError::Protocol(format!(
                "response to {method} {path} is not an object: {other}"
            )))
        }
    };
    if resp.status >= 400 {
        let field = |k: &str| {
            value
                .get(k)
                .and_then(Value::as_str)
                .unwrap_or_default()
                .to_owned()
        };
        return Err(WebDriverError::Command {
            status: resp.status,
            error: field("error"),
            message: field("message"),
        });
    }
    Ok(value)
}
