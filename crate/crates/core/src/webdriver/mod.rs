//! W3C WebDriver client and the interaction backend built on it.
//!
//! Snapshots come from an extractor script run through execute-sync. The
//! extractor stamps each DOM node with [`ELEMENT_ID_ATTR`] set to the node's
//! snapshot id; the backend resolves ids back to WebDriver element references
//! on demand, so it never holds references that can go stale.

mod backend;
pub mod http;
pub mod keys;
mod session;

pub use backend::{id_selector, WebDriverBackend};
pub use http::{Endpoint, HttpClient, DEFAULT_TIMEOUT};
pub use session::{element_ref, Session, ELEMENT_KEY};

use crate::snapshot::SnapshotError;

/// Attribute carrying each element's snapshot id in the live document.
pub const ELEMENT_ID_ATTR: &str = "data-vq-id";

/// Environment variable holding the default driver endpoint.
pub const ENDPOINT_ENV: &str = "VISQ_WEBDRIVER_URL";

#[derive(Debug, thiserror::Error)]
pub enum WebDriverError {
    #[error("invalid endpoint {0}")]
    Endpoint(String),
    #[error("cannot connect to {endpoint}: {source}")]
    Connect {
        endpoint: String,
        #[source]
        source: std::io::Error,
    },
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("protocol error: {0}")]
    Protocol(String),
    #[error("{error} (HTTP {status}): {message}")]
    Command {
        status: u16,
        error: String,
        message: String,
    },
    #[error("extractor failed: {0}")]
    Extractor(String),
    #[error(transparent)]
    Snapshot(#[from] SnapshotError),
    #[error("unknown key name {0:?}")]
    UnknownKey(String),
    #[error("{0}")]
    Interaction(String),
    #[error("session already closed")]
    Closed,
}
