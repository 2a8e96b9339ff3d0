//! Human-like interaction commands addressed by queries, executed against a
//! pluggable backend.
//!
//! Every shortcut takes two steps: find the first element of the
//! verb-appropriate kind matching the target, then perform the command on it.
//!
//! ```
//! use visq_core::interact::{Browser, InteractError, Target};
//! # use visq_core::interact::{Backend, InteractionCommand, Outcome};
//! # use visq_core::snapshot::{Element, PageSnapshot, Rect, Viewport};
//! # use std::sync::Arc;
//! # struct Page(Arc<PageSnapshot>);
//! # impl Backend for Page {
//! #     fn current_snapshot(&mut self) -> Result<Arc<PageSnapshot>, InteractError> { Ok(self.0.clone()) }
//! #     fn perform(&mut self, _: Option<&str>, _: &InteractionCommand) -> Result<Outcome, InteractError> { Ok(Outcome::default()) }
//! #     fn open(&mut self, _: &str) -> Result<(), InteractError> { Ok(()) }
//! #     fn back(&mut self) -> Result<(), InteractError> { Ok(()) }
//! #     fn forward(&mut self) -> Result<(), InteractError> { Ok(()) }
//! # }
//! # let page = Page(Arc::new(PageSnapshot::new("about:x", Viewport { width: 10.0, height: 10.0 }, vec![], None).unwrap()));
//! let mut browser = Browser::new(page);
//! let err = browser.click("Publish").unwrap_err();
//! assert!(matches!(err, InteractError::ElementNotFound { .. }));
//! ```

pub mod clock;
pub mod fixture;
pub mod journal;

use std::fmt;
use std::sync::Arc;
use std::time::Duration;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::engine::{Engine, EvalError, QueryEngine, ResultSet};
use crate::query::{ElementKind, Predicate};
use crate::snapshot::{Element, PageSnapshot, SnapshotError};

pub use clock::{Clock, SystemClock, VirtualClock};
pub use fixture::{FixtureBackend, Manifest};
pub use journal::{Journal, JournalEntry};

/// Default interval between `wait_for` polls.
pub const POLL_INTERVAL: Duration = Duration::from_secs(1);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum Verb {
    Click,
    DoubleClick,
    RightClick,
    Hover,
    Drag,
    DragBy,
    Type,
    KeyPress,
    KeyHold,
    KeyRelease,
    Choose,
    Unchoose,
    CheckToggle,
    ChooseDate,
    Submit,
}

impl Verb {
    pub const ALL: [Verb; 15] = [
        Verb::Click,
        Verb::DoubleClick,
        Verb::RightClick,
        Verb::Hover,
        Verb::Drag,
        Verb::DragBy,
        Verb::Type,
        Verb::KeyPress,
        Verb::KeyHold,
        Verb::KeyRelease,
        Verb::Choose,
        Verb::Unchoose,
        Verb::CheckToggle,
        Verb::ChooseDate,
        Verb::Submit,
    ];

    pub fn keyword(self) -> &'static str {
        match self {
            Verb::Click => "click",
            Verb::DoubleClick => "doubleClick",
            Verb::RightClick => "rightClick",
            Verb::Hover => "hover",
            Verb::Drag => "drag",
            Verb::DragBy => "dragBy",
            Verb::Type => "type",
            Verb::KeyPress => "keyPress",
            Verb::KeyHold => "keyHold",
            Verb::KeyRelease => "keyRelease",
            Verb::Choose => "choose",
            Verb::Unchoose => "unchoose",
            Verb::CheckToggle => "checkToggle",
            Verb::ChooseDate => "chooseDate",
            Verb::Submit => "submit",
        }
    }

    pub fn from_keyword(s: &str) -> Option<Verb> {
        Verb::ALL
            .into_iter()
            .find(|v| v.keyword().eq_ignore_ascii_case(s))
    }

    /// Kind the shortcut form of this verb searches for; `None` for verbs
    /// that accept any element.
    pub fn shortcut_kind(self) -> Option<ElementKind> {
        match self {
            Verb::Click | Verb::DoubleClick | Verb::RightClick | Verb::Hover => {
                Some(ElementKind::Clickable)
            }
            Verb::Type | Verb::KeyPress => Some(ElementKind::Typable),
            Verb::Choose | Verb::Unchoose => Some(ElementKind::Choosable),
            Verb::CheckToggle => Some(ElementKind::Checkable),
            Verb::ChooseDate => Some(ElementKind::Datepicker),
            Verb::Submit => Some(ElementKind::Submittable),
            Verb::Drag | Verb::DragBy | Verb::KeyHold | Verb::KeyRelease => None,
        }
    }

    /// Verbs that act on the page rather than an element.
    pub fn is_page_level(self) -> bool {
        matches!(self, Verb::KeyHold | Verb::KeyRelease)
    }
}

impl fmt::Display for Verb {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.keyword())
    }
}

/// Command argument. Serialized untagged, so each shape is identified by
/// its field names.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Payload {
    Text {
        text: String,
        #[serde(default, skip_serializing_if = "std::ops::Not::not")]
        append: bool,
    },
    Key {
        key: String,
    },
    Option {
        option: String,
    },
    Date {
        date: NaiveDate,
    },
    Offset {
        dx: f64,
        dy: f64,
    },
    DropOn {
        target: String,
    },
    Location {
        location: String,
    },
}

impl Payload {
    pub fn text(text: impl Into<String>) -> Self {
        Payload::Text {
            text: text.into(),
            append: false,
        }
    }

    pub fn key(key: impl Into<String>) -> Self {
        Payload::Key { key: key.into() }
    }

    pub fn option(option: impl Into<String>) -> Self {
        Payload::Option {
            option: option.into(),
        }
    }
}

/// What a command is addressed to.
#[derive(Debug, Clone, PartialEq)]
pub enum Target {
    /// Shortcut text, combined with the verb's kind.
    Text(String),
    /// Query, narrowed by the verb's kind.
    Query(Predicate),
    /// A concrete element of the current snapshot.
    Element(String),
    /// No element: page-level key state.
    Page,
}

impl From<&str> for Target {
    fn from(s: &str) -> Self {
        Target::Text(s.to_owned())
    }
}

impl From<String> for Target {
    fn from(s: String) -> Self {
        Target::Text(s)
    }
}

impl From<Predicate> for Target {
    fn from(p: Predicate) -> Self {
        Target::Query(p)
    }
}

impl From<&Element> for Target {
    fn from(e: &Element) -> Self {
        Target::Element(e.id.clone())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct InteractionCommand {
    pub verb: Verb,
    pub target: Target,
    pub payload: Option<Payload>,
}

impl InteractionCommand {
    /// Builds a command, checking that the payload fits the verb.
    pub fn new(
        verb: Verb,
        target: Target,
        payload: Option<Payload>,
    ) -> Result<Self, InteractError> {
        let ok = matches!(
            (verb, &payload),
            (Verb::Type, Some(Payload::Text { .. }))
                | (
                    Verb::KeyPress | Verb::KeyHold | Verb::KeyRelease,
                    Some(Payload::Key { .. })
                )
                | (Verb::Choose | Verb::Unchoose, Some(Payload::Option { .. }))
                | (Verb::ChooseDate, Some(Payload::Date { .. }))
                | (
                    Verb::Drag,
                    Some(Payload::DropOn { .. } | Payload::Offset { .. })
                )
                | (Verb::DragBy, Some(Payload::Offset { .. }))
                | (
                    Verb::Click
                        | Verb::DoubleClick
                        | Verb::RightClick
                        | Verb::Hover
                        | Verb::CheckToggle
                        | Verb::Submit,
                    None,
                )
        );
        if !ok {
            return Err(InteractError::InvalidCommand {
                verb,
                reason: format!("payload {payload:?} does not fit"),
            });
        }
        let page_ok = verb.is_page_level() || verb == Verb::KeyPress;
        match (&target, page_ok) {
            (Target::Page, false) => Err(InteractError::InvalidCommand {
                verb,
                reason: "needs a target element".into(),
            }),
            (t, _) if verb.is_page_level() && *t != Target::Page => {
                Err(InteractError::InvalidCommand {
                    verb,
                    reason: "acts on the page, not an element".into(),
                })
            }
            _ => Ok(InteractionCommand {
                verb,
                target,
                payload,
            }),
        }
    }
}

/// Result of a backend action.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Outcome {
    /// Name or URL of the page navigated to, if any.
    pub navigated_to: Option<String>,
}

#[derive(Debug, thiserror::Error)]
pub enum InteractError {
    #[error("no element found for {query}")]
    ElementNotFound { query: String },
    #[error("element {0:?} is not on the current page")]
    UnknownElement(String),
    #[error("element {0:?} is stale: it does not belong to the latest snapshot")]
    StaleElement(String),
    #[error("cannot {verb} element {element:?}: {reason}")]
    Incompatible {
        verb: Verb,
        element: String,
        reason: String,
    },
    #[error("invalid {verb} command: {reason}")]
    InvalidCommand { verb: Verb, reason: String },
    #[error("wait timeout must be positive")]
    InvalidTimeout,
    #[error("timed out after {seconds}s and {polls} polls waiting for {query}")]
    Timeout {
        query: String,
        seconds: f64,
        polls: u32,
    },
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Snapshot(#[from] SnapshotError),
    #[error("fixture: {0}")]
    Fixture(String),
    #[error("unknown location {0:?}")]
    UnknownLocation(String),
    #[error("no page to go {0}")]
    NoHistory(&'static str),
    #[error(transparent)]
    WebDriver(#[from] crate::webdriver::WebDriverError),
}

/// An interaction target: a fixture, a live browser, or a test double.
/// The snapshot is stable between `perform` calls.
pub trait Backend {
    fn current_snapshot(&mut self) -> Result<Arc<PageSnapshot>, InteractError>;
    /// Performs `command` on `element`, which is `None` only for page-level
    /// verbs.
    fn perform(
        &mut self,
        element: Option<&str>,
        command: &InteractionCommand,
    ) -> Result<Outcome, InteractError>;
    fn open(&mut self, location: &str) -> Result<(), InteractError>;
    fn back(&mut self) -> Result<(), InteractError>;
    fn forward(&mut self) -> Result<(), InteractError>;
    /// Drains notices about degraded operation, such as a missing screenshot.
    fn take_warnings(&mut self) -> Vec<String> {
        Vec::new()
    }

    /// Actions recorded so far, oldest first.
    fn journal(&self) -> &[JournalEntry] {
        &[]
    }
}

/// Element found by `wait_for` and the number of sleeps it took.
#[derive(Debug, Clone, PartialEq)]
pub struct Waited {
    pub element: Element,
    pub polls: u32,
}

/// Query-driven front end over a backend.
pub struct Browser<B, E = Engine> {
    backend: B,
    engine: E,
    clock: Arc<dyn Clock>,
    poll_interval: Duration,
}

impl<B: Backend> Browser<B, Engine> {
    pub fn new(backend: B) -> Self {
        Browser::with_engine(backend, Engine::default())
    }
}

macro_rules! plain_verbs {
    ($($name:ident => $verb:ident),* $(,)?) => {
        $(
            pub fn $name(&mut self, target: impl Into<Target>) -> Result<Element, InteractError> {
                self.act(Verb::$verb, target.into(), None)
            }
        )*
    };
}

impl<B: Backend, E: QueryEngine> Browser<B, E> {
    pub fn with_engine(backend: B, engine: E) -> Self {
        Browser {
            backend,
            engine,
            clock: Arc::new(SystemClock::default()),
            poll_interval: POLL_INTERVAL,
        }
    }

    pub fn with_clock(mut self, clock: Arc<dyn Clock>) -> Self {
        self.clock = clock;
        self
    }

    pub fn with_poll_interval(mut self, interval: Duration) -> Self {
        self.poll_interval = interval;
        self
    }

    pub fn backend(&self) -> &B {
        &self.backend
    }

    pub fn backend_mut(&mut self) -> &mut B {
        &mut self.backend
    }

    pub fn engine(&self) -> &E {
        &self.engine
    }

    pub fn into_backend(self) -> B {
        self.backend
    }

    pub fn snapshot(&mut self) -> Result<Arc<PageSnapshot>, InteractError> {
        self.backend.current_snapshot()
    }

    pub fn query(&mut self, predicate: &Predicate) -> Result<ResultSet, InteractError> {
        let snap = self.backend.current_snapshot()?;
        Ok(self.engine.evaluate(&snap, predicate)?)
    }

    pub fn find_first(&mut self, predicate: &Predicate) -> Result<Option<Element>, InteractError> {
        let snap = self.backend.current_snapshot()?;
        Ok(self
            .engine
            .find_first(&snap, predicate)?
            .map(|s| s.element(&snap).clone()))
    }

    /// The predicate a shortcut evaluates for `target`.
    pub fn shortcut_predicate(verb: Verb, target: &Target) -> Option<Predicate> {
        let kind = verb.shortcut_kind();
        match target {
            Target::Text(q) => Some(match kind {
                Some(kind) => Predicate::Kind {
                    kind,
                    text: Some(q.clone()),
                },
                None => Predicate::Contains(q.clone()),
            }),
            Target::Query(p) => Some(match kind {
                Some(kind) => Predicate::Kind { kind, text: None }.and(p.clone()),
                None => p.clone(),
            }),
            Target::Element(_) | Target::Page => None,
        }
    }

    fn resolve(&mut self, verb: Verb, target: &Target) -> Result<Option<Element>, InteractError> {
        let snap = self.backend.current_snapshot()?;
        match target {
            Target::Page => Ok(None),
            Target::Element(id) => snap
                .get(id)
                .cloned()
                .map(Some)
                .ok_or_else(|| InteractError::UnknownElement(id.clone())),
            _ => {
                let pred = Self::shortcut_predicate(verb, target).expect("text or query target");
                match self.engine.find_first(&snap, &pred)? {
                    Some(hit) => Ok(Some(hit.element(&snap).clone())),
                    None => Err(InteractError::ElementNotFound {
                        query: pred.to_string(),
                    }),
                }
            }
        }
    }

    /// Runs a command: resolves its target to one element and performs it.
    /// Returns the element acted upon, `None` for page-level verbs.
    pub fn execute(
        &mut self,
        command: &InteractionCommand,
    ) -> Result<Option<Element>, InteractError> {
        let el = self.resolve(command.verb, &command.target)?;
        self.backend
            .perform(el.as_ref().map(|e| e.id.as_str()), command)?;
        Ok(el)
    }

    fn act(
        &mut self,
        verb: Verb,
        target: Target,
        payload: Option<Payload>,
    ) -> Result<Element, InteractError> {
        let cmd = InteractionCommand::new(verb, target, payload)?;
        Ok(self.execute(&cmd)?.expect("element-level verb"))
    }

    plain_verbs! {
        click => Click,
        double_click => DoubleClick,
        right_click => RightClick,
        hover => Hover,
        check_toggle => CheckToggle,
        submit => Submit,
    }

    /// Replaces the value of a typable field.
    pub fn type_text(
        &mut self,
        target: impl Into<Target>,
        text: &str,
    ) -> Result<Element, InteractError> {
        self.act(Verb::Type, target.into(), Some(Payload::text(text)))
    }

    /// Appends to the value of a typable field, as keystrokes would.
    pub fn append_text(
        &mut self,
        target: impl Into<Target>,
        text: &str,
    ) -> Result<Element, InteractError> {
        let payload = Payload::Text {
            text: text.into(),
            append: true,
        };
        self.act(Verb::Type, target.into(), Some(payload))
    }

    pub fn key_press(
        &mut self,
        target: impl Into<Target>,
        key: &str,
    ) -> Result<Element, InteractError> {
        self.act(Verb::KeyPress, target.into(), Some(Payload::key(key)))
    }

    pub fn key_hold(&mut self, key: &str) -> Result<(), InteractError> {
        let cmd = InteractionCommand::new(Verb::KeyHold, Target::Page, Some(Payload::key(key)))?;
        self.execute(&cmd).map(drop)
    }

    pub fn key_release(&mut self, key: &str) -> Result<(), InteractError> {
        let cmd = InteractionCommand::new(Verb::KeyRelease, Target::Page, Some(Payload::key(key)))?;
        self.execute(&cmd).map(drop)
    }

    pub fn choose(
        &mut self,
        target: impl Into<Target>,
        option: &str,
    ) -> Result<Element, InteractError> {
        self.act(Verb::Choose, target.into(), Some(Payload::option(option)))
    }

    pub fn unchoose(
        &mut self,
        target: impl Into<Target>,
        option: &str,
    ) -> Result<Element, InteractError> {
        self.act(Verb::Unchoose, target.into(), Some(Payload::option(option)))
    }

    pub fn choose_date(
        &mut self,
        target: impl Into<Target>,
        date: NaiveDate,
    ) -> Result<Element, InteractError> {
        self.act(
            Verb::ChooseDate,
            target.into(),
            Some(Payload::Date { date }),
        )
    }

    pub fn drag_to(
        &mut self,
        source: impl Into<Target>,
        drop_on: &Element,
    ) -> Result<Element, InteractError> {
        let payload = Payload::DropOn {
            target: drop_on.id.clone(),
        };
        self.act(Verb::Drag, source.into(), Some(payload))
    }

    pub fn drag_by(
        &mut self,
        source: impl Into<Target>,
        dx: f64,
        dy: f64,
    ) -> Result<Element, InteractError> {
        self.act(
            Verb::DragBy,
            source.into(),
            Some(Payload::Offset { dx, dy }),
        )
    }

    pub fn open(&mut self, location: &str) -> Result<(), InteractError> {
        self.backend.open(location)
    }

    pub fn back(&mut self) -> Result<(), InteractError> {
        self.backend.back()
    }

    pub fn forward(&mut self) -> Result<(), InteractError> {
        self.backend.forward()
    }

    /// Re-evaluates `predicate` once per poll interval until it matches or
    /// `timeout` elapses.
    pub fn wait_for(
        &mut self,
        predicate: &Predicate,
        timeout: Duration,
    ) -> Result<Waited, InteractError> {
        if timeout.is_zero() {
            return Err(InteractError::InvalidTimeout);
        }
        let start = self.clock.now();
        let mut polls = 0u32;
        loop {
            if let Some(el) = self.find_first(predicate)? {
                return Ok(Waited { element: el, polls });
            }
            let elapsed = self.clock.now().saturating_sub(start);
            if elapsed >= timeout {
                return Err(InteractError::Timeout {
                    query: predicate.to_string(),
                    seconds: timeout.as_secs_f64(),
                    polls,
                });
            }
            self.clock.sleep(self.poll_interval.min(timeout - elapsed));
            polls += 1;
        }
    }
}
