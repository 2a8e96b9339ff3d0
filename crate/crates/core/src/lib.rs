//! Visual-semantics queries over rendered web-page snapshots.
//!
//! A [`PageSnapshot`](snapshot::PageSnapshot) records every rendered element
//! with its geometry, text, form state and an optional screenshot. Queries
//! describe elements the way a person sees them (a clickable headline below
//! the search field, a mostly blue image) and the [`engine`] returns the
//! matches ordered by how well they fit. The [`interact`] module replays
//! clicks and keystrokes against simulated fixture pages or, through
//! [`webdriver`], a live browser.

pub mod bench;
pub mod classify;
pub mod color;
pub mod datex;
pub mod engine;
pub mod geometry;
pub mod interact;
pub mod query;
pub mod script;
pub mod snapshot;
pub mod tables;
pub mod webdriver;

pub use engine::{evaluate, Engine, QueryEngine, ResultSet};
pub use query::{parse_query, Predicate};
pub use snapshot::{load_snapshot, load_snapshot_file, PageSnapshot};
