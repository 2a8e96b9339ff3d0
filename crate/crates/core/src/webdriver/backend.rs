use std::collections::BTreeSet;
use std::sync::Arc;

use base64::Engine as _;
use serde_json::{json, Value};

use super::keys::key_code;
use super::session::{element_ref, Session};
use super::{WebDriverError, ELEMENT_ID_ATTR};
use crate::interact::{
    Backend, InteractError, InteractionCommand, Journal, JournalEntry, Outcome, Payload, Verb,
};
use crate::snapshot::{load_snapshot_value, PageSnapshot, Raster};

const CHOOSE_SCRIPT: &str = "const [el, wanted, on] = arguments; \
const norm = s => s.replace(/\\s+/g, ' ').trim().toLowerCase(); \
for (const o of el.options || []) { \
if (norm(o.label) === norm(wanted) || norm(o.value) === norm(wanted)) { \
o.selected = on; \
el.dispatchEvent(new Event('input', {bubbles: true})); \
el.dispatchEvent(new Event('change', {bubbles: true})); \
return true; } } \
return false;";

const SUBMIT_SCRIPT: &str = "const el = arguments[0]; \
const form = el.tagName === 'FORM' ? el : (el.form || el.closest('form')); \
if (!form) { el.click(); return false; } \
if (form.requestSubmit) { form.requestSubmit(); } else { form.submit(); } \
return true;";

/// Live-browser backend. Every command invalidates the cached snapshot.
/// Journal entries name the page by the URL of the snapshot the command was
/// resolved against.
#[derive(Debug)]
pub struct WebDriverBackend {
    session: Session,
    extractor: String,
    current: Option<Arc<PageSnapshot>>,
    warnings: Vec<String>,
    modifiers: BTreeSet<String>,
    journal: Journal,
}

/// CSS selector addressing the element stamped with `id`.
pub fn id_selector(id: &str) -> String {
    let escaped = id.replace('\\', "\\\\").replace('"', "\\\"");
    format!("[{ELEMENT_ID_ATTR}=\"{escaped}\"]")
}

fn pointer(actions: Vec<Value>) -> Value {
    json!([{ "type": "pointer", "id": "mouse", "parameters": { "pointerType": "mouse" }, "actions": actions }])
}

fn keyboard(actions: Vec<Value>) -> Value {
    json!([{ "type": "key", "id": "keyboard", "actions": actions }])
}

fn move_to(element: &str) -> Value {
    json!({ "type": "pointerMove", "duration": 0, "origin": element_ref(element), "x": 0, "y": 0 })
}

fn button(kind: &str, button: u8) -> Value {
    json!({ "type": kind, "button": button })
}

impl WebDriverBackend {
    /// `extractor` is the page script whose result is a snapshot document,
    /// either as a JSON object or a JSON string.
    pub fn new(session: Session, extractor: impl Into<String>) -> Self {
        WebDriverBackend {
            session,
            extractor: extractor.into(),
            current: None,
            warnings: Vec::new(),
            modifiers: BTreeSet::new(),
            journal: Journal::new(),
        }
    }

    /// Streams journal entries to `sink` as they are recorded.
    pub fn with_journal_sink(mut self, sink: Box<dyn std::io::Write + Send>) -> Self {
        self.journal = Journal::with_sink(sink);
        self
    }

    fn record(
        &mut self,
        verb: &str,
        element: Option<&str>,
        payload: Option<Payload>,
    ) -> Result<(), InteractError> {
        let snapshot = self
            .current
            .as_ref()
            .map(|s| s.url().to_owned())
            .unwrap_or_default();
        let entry = JournalEntry {
            seq: self.journal.next_seq(),
            snapshot,
            verb: verb.to_owned(),
            element: element.map(str::to_owned),
            payload,
            modifiers: self.modifiers.clone(),
            submitted: None,
            navigated_to: None,
        };
        self.journal
            .append(entry)
            .map_err(|e| InteractError::WebDriver(WebDriverError::Io(e)))
    }

    pub fn session(&self) -> &Session {
        &self.session
    }

    pub fn into_session(self) -> Session {
        self.session
    }

    /// Runs the extractor and attaches a screenshot. A failing screenshot
    /// endpoint yields a snapshot without raster and a warning.
    pub fn snapshot(&mut self) -> Result<PageSnapshot, WebDriverError> {
        let mut doc = self.session.execute_sync(&self.extractor, Vec::new())?;
        if let Value::String(text) = &doc {
            doc = serde_json::from_str(text)
                .map_err(|e| WebDriverError::Extractor(format!("output is not JSON: {e}")))?;
        }
        if let Some(err) = doc.get("error").and_then(Value::as_str) {
            return Err(WebDriverError::Extractor(err.to_owned()));
        }
        let snap = load_snapshot_value(doc)?;
        if snap.screenshot().is_some() {
            return Ok(snap);
        }
        match self.raster(snap.viewport().width) {
            Ok(raster) => Ok(snap.with_screenshot(Some(raster))?),
            Err(e) => {
                self.warnings.push(format!(
                    "screenshot unavailable, color predicates disabled: {e}"
                ));
                Ok(snap)
            }
        }
    }

    fn raster(&self, viewport_width: f64) -> Result<Raster, WebDriverError> {
        let b64 = self.session.screenshot()?;
        let bytes = base64::engine::general_purpose::STANDARD
            .decode(b64.trim())
            .map_err(|e| WebDriverError::Protocol(format!("screenshot is not base64: {e}")))?;
        let raw = Raster::from_png(&bytes, 1.0).map_err(crate::snapshot::SnapshotError::from)?;
        let scale = if viewport_width > 0.0 {
            f64::from(raw.width()) / viewport_width
        } else {
            1.0
        };
        Ok(
            Raster::new(raw.width(), raw.height(), raw.pixels().to_vec(), scale)
                .map_err(crate::snapshot::SnapshotError::from)?,
        )
    }

    fn resolve(&self, id: &str) -> Result<String, WebDriverError> {
        self.session.find_css(&id_selector(id))
    }

    fn dispatch(
        &self,
        element: Option<&str>,
        command: &InteractionCommand,
    ) -> Result<(), WebDriverError> {
        let verb = command.verb;
        let Some(id) = element else {
            let Some(Payload::Key { key }) = &command.payload else {
                return Err(WebDriverError::Interaction(format!("{verb} needs a key")));
            };
            let k = key_code(key)?.to_string();
            let actions = match verb {
                Verb::KeyHold => vec![json!({ "type": "keyDown", "value": k })],
                Verb::KeyRelease => vec![json!({ "type": "keyUp", "value": k })],
                _ => vec![
                    json!({ "type": "keyDown", "value": k }),
                    json!({ "type": "keyUp", "value": k }),
                ],
            };
            return self.session.perform_actions(keyboard(actions));
        };
        let el = self.resolve(id)?;
        match (verb, &command.payload) {
            (Verb::Click | Verb::CheckToggle, _) => self.session.click(&el),
            (Verb::Type, Some(Payload::Text { text, append })) => {
                if !append {
                    self.session.clear(&el)?;
                }
                self.session.send_keys(&el, text)
            }
            (Verb::KeyPress, Some(Payload::Key { key })) => {
                self.session.send_keys(&el, &key_code(key)?.to_string())
            }
            (Verb::ChooseDate, Some(Payload::Date { date })) => {
                self.session.clear(&el)?;
                self.session
                    .send_keys(&el, &date.format("%Y-%m-%d").to_string())
            }
            (Verb::Choose | Verb::Unchoose, Some(Payload::Option { option })) => {
                let on = verb == Verb::Choose;
                let found = self.session.execute_sync(
                    CHOOSE_SCRIPT,
                    vec![element_ref(&el), json!(option), json!(on)],
                )?;
                if found == Value::Bool(true) {
                    Ok(())
                } else {
                    Err(WebDriverError::Interaction(format!(
                        "no option {option:?} in element {id:?}"
                    )))
                }
            }
            (Verb::Submit, _) => self
                .session
                .execute_sync(SUBMIT_SCRIPT, vec![element_ref(&el)])
                .map(drop),
            (Verb::Hover, _) => self.session.perform_actions(pointer(vec![move_to(&el)])),
            (Verb::DoubleClick, _) => self.session.perform_actions(pointer(vec![
                move_to(&el),
                button("pointerDown", 0),
                button("pointerUp", 0),
                button("pointerDown", 0),
                button("pointerUp", 0),
            ])),
            (Verb::RightClick, _) => self.session.perform_actions(pointer(vec![
                move_to(&el),
                button("pointerDown", 2),
                button("pointerUp", 2),
            ])),
            (Verb::Drag, Some(Payload::DropOn { target })) => {
                let to = self.resolve(target)?;
                self.session.perform_actions(pointer(vec![
                    move_to(&el),
                    button("pointerDown", 0),
                    move_to(&to),
                    button("pointerUp", 0),
                ]))
            }
            (Verb::Drag | Verb::DragBy, Some(Payload::Offset { dx, dy })) => {
                let by = json!({
                    "type": "pointerMove",
                    "duration": 0,
                    "origin": "pointer",
                    "x": dx.round() as i64,
                    "y": dy.round() as i64,
                });
                self.session.perform_actions(pointer(vec![
                    move_to(&el),
                    button("pointerDown", 0),
                    by,
                    button("pointerUp", 0),
                ]))
            }
            _ => Err(WebDriverError::Interaction(format!(
                "{verb} cannot take {:?}",
                command.payload
            ))),
        }
    }
}

impl Backend for WebDriverBackend {
    fn current_snapshot(&mut self) -> Result<Arc<PageSnapshot>, InteractError> {
        if let Some(s) = &self.current {
            return Ok(s.clone());
        }
        let snap = Arc::new(self.snapshot()?);
        self.current = Some(snap.clone());
        Ok(snap)
    }

    fn perform(
        &mut self,
        element: Option<&str>,
        command: &InteractionCommand,
    ) -> Result<Outcome, InteractError> {
        if let Some(id) = element {
            let known = self.current.as_ref().is_some_and(|s| s.get(id).is_some());
            if !known {
                return Err(InteractError::StaleElement(id.to_owned()));
            }
        }
        if let Some(Payload::DropOn { target }) = &command.payload {
            if !self
                .current
                .as_ref()
                .is_some_and(|s| s.get(target).is_some())
            {
                return Err(InteractError::StaleElement(target.clone()));
            }
        }
        self.dispatch(element, command)?;
        if let Some(Payload::Key { key }) = &command.payload {
            match command.verb {
                Verb::KeyHold => {
                    self.modifiers.insert(key.to_lowercase());
                }
                Verb::KeyRelease => {
                    self.modifiers.remove(&key.to_lowercase());
                }
                _ => {}
            }
        }
        self.record(command.verb.keyword(), element, command.payload.clone())?;
        self.current = None;
        Ok(Outcome::default())
    }

    fn open(&mut self, location: &str) -> Result<(), InteractError> {
        self.session.navigate(location)?;
        let payload = Payload::Location {
            location: location.to_owned(),
        };
        self.record("open", None, Some(payload))?;
        self.current = None;
        Ok(())
    }

    fn back(&mut self) -> Result<(), InteractError> {
        self.session.back()?;
        self.record("back", None, None)?;
        self.current = None;
        Ok(())
    }

    fn forward(&mut self) -> Result<(), InteractError> {
        self.session.forward()?;
        self.record("forward", None, None)?;
        self.current = None;
        Ok(())
    }

    fn journal(&self) -> &[JournalEntry] {
        self.journal.entries()
    }

    fn take_warnings(&mut self) -> Vec<String> {
        std::mem::take(&mut self.warnings)
    }
}
