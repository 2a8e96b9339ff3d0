//! Minimal blocking HTTP/1.1 client: one connection per request.

use std::io::{BufRead, BufReader, Write};
use std::net::{TcpStream, ToSocketAddrs};
use std::time::Duration;

use serde_json::Value;

use super::WebDriverError;

/// Default per-request timeout.
pub const DEFAULT_TIMEOUT: Duration = Duration::from_secs(30);

/// Parsed `http://host[:port][/base]` endpoint.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Endpoint {
    pub host: String,
    pub port: u16,
    pub base_path: String,
}

impl Endpoint {
    pub fn parse(url: &str) -> Result<Self, WebDriverError> {
        let bad = |why: &str| WebDriverError::Endpoint(format!("{url:?}: {why}"));
        let rest = url
            .strip_prefix("http://")
            .ok_or_else(|| bad("only http:// endpoints are supported"))?;
        let (authority, path) = match rest.find('/') {
            Some(i) => (&rest[..i], &rest[i..]),
            None => (rest, ""),
        };
        if authority.is_empty() {
            return Err(bad("missing host"));
        }
        let (host, port) = match authority.rsplit_once(':') {
            Some((h, p)) => (h.to_owned(), p.parse().map_err(|_| bad("invalid port"))?),
            None => (authority.to_owned(), 80),
        };
        Ok(Endpoint {
            host,
            port,
            base_path: path.trim_end_matches('/').to_owned(),
        })
    }

    /// Value of the `Host` header.
    pub fn authority(&self) -> String {
        format!("{}:{}", self.host, self.port)
    }
}

/// HTTP response with its body decoded as JSON.
#[derive(Debug, Clone, PartialEq)]
pub struct Response {
    pub status: u16,
    pub body: Value,
}

#[derive(Debug, Clone)]
pub struct HttpClient {
    endpoint: Endpoint,
    timeout: Duration,
}

impl HttpClient {
    pub fn new(url: &str) -> Result<Self, WebDriverError> {
        Ok(HttpClient {
            endpoint: Endpoint::parse(url)?,
            timeout: DEFAULT_TIMEOUT,
        })
    }

    pub fn with_timeout(mut self, timeout: Duration) -> Self {
        self.timeout = timeout;
        self
    }

    pub fn endpoint(&self) -> &Endpoint {
        &self.endpoint
    }

    /// Wire bytes for one request. Bodies are compact JSON.
    pub fn encode(&self, method: &str, path: &str, body: Option<&Value>) -> Vec<u8> {
        let mut head = format!(
            "{method} {}{path} HTTP/1.1\r\nHost: {}\r\nAccept: application/json\r\n",
            self.endpoint.base_path,
            self.endpoint.authority()
        );
        let body = body.map(|b| serde_json::to_vec(b).expect("json values serialize"));
        if let Some(b) = &body {
            head.push_str("Content-Type: application/json; charset=utf-8\r\n");
            head.push_str(&format!("Content-Length: {}\r\n", b.len()));
        }
        head.push_str("Connection: close\r\n\r\n");
        let mut out = head.into_bytes();
        out.extend(body.unwrap_or_default());
        out
    }

    pub fn request(
        &self,
        method: &str,
        path: &str,
        body: Option<&Value>,
    ) -> Result<Response, WebDriverError> {
        let connect_err = |source| WebDriverError::Connect {
            endpoint: self.endpoint.authority(),
            source,
        };
        let addrs = (self.endpoint.host.as_str(), self.endpoint.port)
            .to_socket_addrs()
            .map_err(connect_err)?;
        let mut last = None;
        let mut stream = None;
        for addr in addrs {
            match TcpStream::connect_timeout(&addr, self.timeout) {
                Ok(s) => {
                    stream = Some(s);
                    break;
                }
                Err(e) => last = Some(e),
            }
        }
        let mut stream =
            stream.ok_or_else(|| {
                connect_err(last.unwrap_or_else(|| {
                    std::io::Error::new(std::io::ErrorKind::NotFound, "no address")
                }))
            })?;
        stream.set_read_timeout(Some(self.timeout))?;
        stream.set_write_timeout(Some(self.timeout))?;
        stream.write_all(&self.encode(method, path, body))?;
        stream.flush()?;
        read_response(BufReader::new(stream))
    }
}

fn protocol(msg: impl Into<String>) -> WebDriverError {
    WebDriverError::Protocol(msg.into())
}

fn read_line<R: BufRead>(r: &mut R) -> Result<String, WebDriverError> {
    let mut line = String::new();
    r.read_line(&mut line)?;
    Ok(line.trim_end_matches(['\r', '\n']).to_owned())
}

/// Reads a status line, headers and a body framed by `Content-Length`,
/// chunked encoding, or connection close.
pub fn read_response<R: BufRead>(mut r: R) -> Result<Response, WebDriverError> {
    let status_line = read_line(&mut r)?;
    let mut parts = status_line.splitn(3, ' ');
    let version = parts.next().unwrap_or_default();
    if !version.starts_with("HTTP/1.") {
        return Err(protocol(format!("bad status line {status_line:?}")));
    }
    let status: u16 = parts
        .next()
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| protocol(format!("bad status line {status_line:?}")))?;
    let mut length = None;
    let mut chunked = false;
    loop {
        let line = read_line(&mut r)?;
        if line.is_empty() {
            break;
        }
        let (name, value) = line
            .split_once(':')
            .ok_or_else(|| protocol(format!("bad header {line:?}")))?;
        let value = value.trim();
        if name.eq_ignore_ascii_case("content-length") {
            length = Some(
                value
                    .parse::<usize>()
                    .map_err(|_| protocol("bad content-length"))?,
            );
        } else if name.eq_ignore_ascii_case("transfer-encoding") {
            chunked = value.to_ascii_lowercase().contains("chunked");
        }
    }
    let mut body = Vec::new();
    if chunked {
        loop {
            let size_line = read_line(&mut r)?;
            let size = usize::from_str_radix(size_line.split(';').next().unwrap_or("").trim(), 16)
                .map_err(|_| protocol(format!("bad chunk size {size_line:?}")))?;
            if size == 0 {
                while !read_line(&mut r)?.is_empty() {}
                break;
            }
            let start = body.len();
            body.resize(start + size, 0);
            r.read_exact(&mut body[start..])?;
            read_line(&mut r)?;
        }
    } else if let Some(n) = length {
        body.resize(n, 0);
        r.read_exact(&mut body)?;
    } else {
        r.read_to_end(&mut body)?;
    }
    let body = if body.is_empty() {
        Value::Null
    } else {
        serde_json::from_slice(&body)
            .map_err(|e| protocol(format!("response body is not JSON: {e}")))?
    };
    Ok(Response { status, body })
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn endpoint_parsing() {
        let e = Endpoint::parse("http://localhost:4444/wd/hub/").unwrap();
        assert_eq!(
            (e.host.as_str(), e.port, e.base_path.as_str()),
            ("localhost", 4444, "/wd/hub")
        );
        assert_eq!(Endpoint::parse("http://driver").unwrap().port, 80);
        assert!(Endpoint::parse("https://x").is_err());
        assert!(Endpoint::parse("http://x:notaport").is_err());
    }

    #[test]
    fn encoding() {
        let c = HttpClient::new("http://h:1").unwrap();
        let bytes = c.encode("POST", "/session", Some(&json!({"a": 1})));
        assert_eq!(
            String::from_utf8(bytes).unwrap(),
            "POST /session HTTP/1.1\r\nHost: h:1\r\nAccept: application/json\r\nContent-Type: application/json; charset=utf-8\r\nContent-Length: 7\r\nConnection: close\r\n\r\n{\"a\":1}"
        );
        let bytes = c.encode("DELETE", "/session/s", None);
        assert!(String::from_utf8(bytes)
            .unwrap()
            .ends_with("Connection: close\r\n\r\n"));
    }

    #[test]
    fn response_framings() {
        let plain = b"HTTP/1.1 200 OK\r\nContent-Length: 12\r\n\r\n{\"value\":1}\n";
        assert_eq!(read_response(&plain[..]).unwrap().body, json!({"value": 1}));
        let chunked = b"HTTP/1.1 404 Not Found\r\nTransfer-Encoding: chunked\r\n\r\n5\r\n{\"val\r\n6;x=y\r\nue\":2}\r\n0\r\n\r\n";
        let r = read_response(&chunked[..]).unwrap();
        assert_eq!((r.status, r.body), (404, json!({"value": 2})));
        let close = b"HTTP/1.0 200 OK\r\n\r\n[]";
        assert_eq!(read_response(&close[..]).unwrap().body, json!([]));
        assert!(matches!(
            read_response(&b"SMTP ready\r\n"[..]),
            Err(WebDriverError::Protocol(_))
        ));
        assert!(matches!(
            read_response(&b"HTTP/1.1 200 OK\r\n\r\n<html>"[..]),
            Err(WebDriverError::Protocol(_))
        ));
    }
}
