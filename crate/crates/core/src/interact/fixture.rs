//! Simulated pages: a directory of snapshots plus a transition manifest.
//!
//! ```json
//! {
//!   "formatVersion": 1,
//!   "start": "login",
//!   "snapshots": { "login": "login.json", "home": "home.json" },
//!   "transitions": [
//!     { "fromSnapshot": "login", "trigger": { "elementId": "f", "verb": "submit" }, "toSnapshot": "home" }
//!   ],
//!   "timedTransitions": [
//!     { "fromSnapshot": "home", "afterSeconds": 3, "toSnapshot": "home-loaded" }
//!   ]
//! }
//! ```
//!
//! Form edits produce a modified copy of the current snapshot. Navigating
//! always lands on the pristine snapshot of the target page.

use std::collections::{BTreeMap, BTreeSet};
use std::io::Write;
use std::path::Path;
use std::sync::Arc;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use super::journal::{Journal, JournalEntry};
use super::{
    Backend, Clock, InteractError, InteractionCommand, Outcome, Payload, Target, Verb, VirtualClock,
};
use crate::classify::{classify, input_type};
use crate::engine::text::{tier_of, MatchTier};
use crate::query::ElementKind;
use crate::snapshot::{load_snapshot_file, Element, FormMeta, PageSnapshot};

pub const MANIFEST_FILE: &str = "manifest.json";
pub const MANIFEST_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct Manifest {
    pub format_version: u32,
    pub start: String,
    pub snapshots: BTreeMap<String, String>,
    #[serde(default)]
    pub transitions: Vec<Transition>,
    #[serde(default)]
    pub timed_transitions: Vec<TimedTransition>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct Transition {
    pub from_snapshot: String,
    pub trigger: Trigger,
    pub to_snapshot: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct Trigger {
    pub element_id: String,
    pub verb: Verb,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct TimedTransition {
    pub from_snapshot: String,
    pub after_seconds: f64,
    pub to_snapshot: String,
}

impl Manifest {
    pub fn from_json(text: &str) -> Result<Self, InteractError> {
        serde_json::from_str(text).map_err(|e| InteractError::Fixture(format!("manifest: {e}")))
    }

    fn check_names(&self) -> Result<(), InteractError> {
        if self.format_version != MANIFEST_VERSION {
            return Err(InteractError::Fixture(format!(
                "unsupported manifest formatVersion {}",
                self.format_version
            )));
        }
        let known = |name: &str, what: &str| {
            if self.snapshots.contains_key(name) {
                Ok(())
            } else {
                Err(InteractError::Fixture(format!(
                    "{what} names unknown snapshot {name:?}"
                )))
            }
        };
        known(&self.start, "start")?;
        for t in &self.transitions {
            known(&t.from_snapshot, "transition")?;
            known(&t.to_snapshot, "transition")?;
        }
        for t in &self.timed_transitions {
            known(&t.from_snapshot, "timed transition")?;
            known(&t.to_snapshot, "timed transition")?;
            if !(t.after_seconds.is_finite() && t.after_seconds > 0.0) {
                return Err(InteractError::Fixture(format!(
                    "timed transition from {:?} needs a positive afterSeconds",
                    t.from_snapshot
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
struct Page {
    name: String,
    snapshot: Arc<PageSnapshot>,
    entered: Duration,
}

/// Deterministic backend over a fixture manifest.
#[derive(Debug)]
pub struct FixtureBackend {
    manifest: Manifest,
    pages: BTreeMap<String, Arc<PageSnapshot>>,
    current: Page,
    back_stack: Vec<Page>,
    forward_stack: Vec<Page>,
    modifiers: BTreeSet<String>,
    journal: Journal,
    clock: Arc<dyn Clock>,
}

impl FixtureBackend {
    /// Loads `manifest.json` and every snapshot it names from `dir`.
    pub fn load(dir: impl AsRef<Path>) -> Result<Self, InteractError> {
        let dir = dir.as_ref();
        let path = dir.join(MANIFEST_FILE);
        let text = std::fs::read_to_string(&path)
            .map_err(|e| InteractError::Fixture(format!("{}: {e}", path.display())))?;
        let manifest = Manifest::from_json(&text)?;
        let mut pages = BTreeMap::new();
        for (name, file) in &manifest.snapshots {
            let snap = load_snapshot_file(dir.join(file))?;
            pages.insert(name.clone(), snap);
        }
        FixtureBackend::from_parts(manifest, pages)
    }

    /// Builds a backend from an in-memory manifest and its snapshots.
    pub fn from_parts(
        manifest: Manifest,
        pages: BTreeMap<String, PageSnapshot>,
    ) -> Result<Self, InteractError> {
        manifest.check_names()?;
        let pages: BTreeMap<_, _> = pages.into_iter().map(|(k, v)| (k, Arc::new(v))).collect();
        for name in manifest.snapshots.keys() {
            if !pages.contains_key(name) {
                return Err(InteractError::Fixture(format!(
                    "snapshot {name:?} was not supplied"
                )));
            }
        }
        for t in &manifest.transitions {
            if pages[&t.from_snapshot].get(&t.trigger.element_id).is_none() {
                return Err(InteractError::Fixture(format!(
                    "transition trigger {:?} is not an element of {:?}",
                    t.trigger.element_id, t.from_snapshot
                )));
            }
        }
        let clock: Arc<dyn Clock> = Arc::new(VirtualClock::new());
        let current = Page {
            name: manifest.start.clone(),
            snapshot: pages[&manifest.start].clone(),
            entered: clock.now(),
        };
        Ok(FixtureBackend {
            manifest,
            pages,
            current,
            back_stack: Vec::new(),
            forward_stack: Vec::new(),
            modifiers: BTreeSet::new(),
            journal: Journal::new(),
            clock,
        })
    }

    /// Uses `clock` for timed transitions. The default is a private virtual
    /// clock that only moves when advanced, so timed transitions need a
    /// shared clock to fire.
    pub fn with_clock(mut self, clock: Arc<dyn Clock>) -> Self {
        self.current.entered = clock.now();
        self.clock = clock;
        self
    }

    /// Streams journal entries to `sink` as they are recorded.
    pub fn with_journal_sink(mut self, sink: Box<dyn Write + Send>) -> Self {
        self.journal = Journal::with_sink(sink);
        self
    }

    pub fn manifest(&self) -> &Manifest {
        &self.manifest
    }

    pub fn current_name(&self) -> &str {
        &self.current.name
    }

    pub fn modifiers(&self) -> &BTreeSet<String> {
        &self.modifiers
    }

    pub fn journal(&self) -> &[JournalEntry] {
        self.journal.entries()
    }

    /// Pristine snapshot of a named page.
    pub fn page(&self, name: &str) -> Option<&Arc<PageSnapshot>> {
        self.pages.get(name)
    }

    /// Returns to the start page with no history, modifiers or journal.
    pub fn reset(&mut self) {
        self.current = self.enter(&self.manifest.start.clone(), self.clock.now());
        self.back_stack.clear();
        self.forward_stack.clear();
        self.modifiers.clear();
        self.journal.clear();
    }

    fn enter(&self, name: &str, at: Duration) -> Page {
        Page {
            name: name.to_owned(),
            snapshot: self.pages[name].clone(),
            entered: at,
        }
    }

    fn navigate(&mut self, name: &str, at: Duration) {
        let next = self.enter(name, at);
        let prev = std::mem::replace(&mut self.current, next);
        self.back_stack.push(prev);
        self.forward_stack.clear();
    }

    fn record(
        &mut self,
        verb: &str,
        element: Option<&str>,
        payload: Option<Payload>,
        submitted: Option<BTreeMap<String, String>>,
        navigated_to: Option<String>,
        snapshot: String,
    ) -> Result<(), InteractError> {
        let entry = JournalEntry {
            seq: self.journal.next_seq(),
            snapshot,
            verb: verb.to_owned(),
            element: element.map(str::to_owned),
            payload,
            modifiers: self.modifiers.clone(),
            submitted,
            navigated_to,
        };
        self.journal
            .append(entry)
            .map_err(|e| InteractError::Fixture(format!("journal: {e}")))
    }

    /// Fires every timed transition that is due.
    fn tick(&mut self) -> Result<(), InteractError> {
        let now = self.clock.now();
        loop {
            let elapsed = now.saturating_sub(self.current.entered);
            let due = self
                .manifest
                .timed_transitions
                .iter()
                .filter(|t| t.from_snapshot == self.current.name)
                .filter(|t| Duration::from_secs_f64(t.after_seconds) <= elapsed)
                .min_by(|a, b| a.after_seconds.total_cmp(&b.after_seconds))
                .cloned();
            let Some(t) = due else { return Ok(()) };
            let at = self.current.entered + Duration::from_secs_f64(t.after_seconds);
            let from = self.current.name.clone();
            self.navigate(&t.to_snapshot, at);
            self.record("timer", None, None, None, Some(t.to_snapshot.clone()), from)?;
        }
    }

    fn transition_for(&self, element: &str, verb: Verb) -> Option<String> {
        self.manifest
            .transitions
            .iter()
            .find(|t| {
                t.from_snapshot == self.current.name
                    && t.trigger.element_id == element
                    && t.trigger.verb == verb
            })
            .map(|t| t.to_snapshot.clone())
    }

    fn locate(&self, location: &str) -> Result<String, InteractError> {
        if self.pages.contains_key(location) {
            return Ok(location.to_owned());
        }
        self.pages
            .iter()
            .find(|(_, s)| s.url() == location)
            .map(|(name, _)| name.clone())
            .ok_or_else(|| InteractError::UnknownLocation(location.to_owned()))
    }

    /// Re-executes a recorded journal from the current state.
    pub fn replay(&mut self, entries: &[JournalEntry]) -> Result<(), InteractError> {
        for e in entries {
            match e.verb.as_str() {
                "open" => match &e.payload {
                    Some(Payload::Location { location }) => self.open(location)?,
                    _ => {
                        return Err(InteractError::Fixture(format!(
                            "journal entry {} lacks a location",
                            e.seq
                        )))
                    }
                },
                "back" => self.back()?,
                "forward" => self.forward()?,
                "timer" => {
                    let to = e.navigated_to.as_deref().ok_or_else(|| {
                        InteractError::Fixture(format!("journal entry {} lacks a target", e.seq))
                    })?;
                    let from = self.current.name.clone();
                    self.navigate(to, self.clock.now());
                    self.record("timer", None, None, None, Some(to.to_owned()), from)?;
                }
                verb => {
                    let verb = Verb::from_keyword(verb).ok_or_else(|| {
                        InteractError::Fixture(format!(
                            "journal entry {} has unknown verb {verb:?}",
                            e.seq
                        ))
                    })?;
                    let target = match &e.element {
                        Some(id) => Target::Element(id.clone()),
                        None => Target::Page,
                    };
                    let cmd = InteractionCommand::new(verb, target, e.payload.clone())?;
                    self.perform(e.element.as_deref(), &cmd)?;
                }
            }
        }
        Ok(())
    }

    fn edit(&mut self, idx: usize, f: impl FnOnce(&mut Element)) -> Result<(), InteractError> {
        let next = self.current.snapshot.with_element(idx, f)?;
        self.current.snapshot = Arc::new(next);
        Ok(())
    }

    fn nearest_form(&self, idx: usize) -> Option<usize> {
        let snap = &self.current.snapshot;
        std::iter::once(idx)
            .chain(snap.ancestors(idx))
            .find(|&i| snap.element(i).tag == "form")
    }

    fn submitted_fields(&self, form: usize) -> BTreeMap<String, String> {
        let snap = &self.current.snapshot;
        let mut out = BTreeMap::new();
        for i in snap.descendants(form) {
            let el = snap.element(i);
            let Some(meta) = &el.form else { continue };
            let ty = input_type(el).unwrap_or_else(|| meta.input_type.to_lowercase());
            if matches!(ty.as_str(), "submit" | "button" | "reset" | "image") {
                continue;
            }
            let name = el
                .attr("name")
                .or_else(|| el.attr("id"))
                .unwrap_or(&el.id)
                .to_owned();
            let value = if matches!(ty.as_str(), "checkbox" | "radio") {
                if !meta.checked {
                    continue;
                }
                if meta.value.is_empty() {
                    "on".to_owned()
                } else {
                    meta.value.clone()
                }
            } else if !meta.options.is_empty() {
                let picked: Vec<&str> = meta
                    .options
                    .iter()
                    .filter(|o| o.selected)
                    .map(|o| o.value.as_str())
                    .collect();
                picked.join(",")
            } else {
                meta.value.clone()
            };
            out.insert(name, value);
        }
        out
    }
}

fn incompatible(verb: Verb, el: &Element, reason: impl Into<String>) -> InteractError {
    InteractError::Incompatible {
        verb,
        element: el.id.clone(),
        reason: reason.into(),
    }
}

fn form_meta(el: &mut Element) -> &mut FormMeta {
    let ty = el.attr("type").unwrap_or(&el.tag).to_lowercase();
    el.form.get_or_insert_with(|| FormMeta {
        input_type: ty,
        value: String::new(),
        checked: false,
        options: Vec::new(),
        multiple: false,
    })
}

fn option_matches(label: &str, value: &str, wanted: &str) -> bool {
    tier_of(label, wanted) == MatchTier::Exact || tier_of(value, wanted) == MatchTier::Exact
}

impl Backend for FixtureBackend {
    fn current_snapshot(&mut self) -> Result<Arc<PageSnapshot>, InteractError> {
        self.tick()?;
        Ok(self.current.snapshot.clone())
    }

    fn perform(
        &mut self,
        element: Option<&str>,
        command: &InteractionCommand,
    ) -> Result<Outcome, InteractError> {
        self.tick()?;
        let verb = command.verb;
        let snapshot_name = self.current.name.clone();
        let Some(id) = element else {
            let key = match &command.payload {
                Some(Payload::Key { key }) => key.to_lowercase(),
                _ => String::new(),
            };
            match verb {
                Verb::KeyHold => {
                    self.modifiers.insert(key);
                }
                Verb::KeyRelease => {
                    self.modifiers.remove(&key);
                }
                Verb::KeyPress => {}
                _ => {
                    return Err(InteractError::InvalidCommand {
                        verb,
                        reason: "needs a target element".into(),
                    })
                }
            }
            self.record(
                verb.keyword(),
                None,
                command.payload.clone(),
                None,
                None,
                snapshot_name,
            )?;
            return Ok(Outcome::default());
        };
        let snap = self.current.snapshot.clone();
        let idx = snap
            .index_of(id)
            .ok_or_else(|| InteractError::UnknownElement(id.to_owned()))?;
        let el = snap.element(idx);
        let kinds = classify(el, &snap).expect("element belongs to snapshot");
        let requires = |kind: ElementKind| {
            if kinds.contains(kind) {
                Ok(())
            } else {
                Err(incompatible(
                    verb,
                    el,
                    format!("element is not {}", kind.keyword()),
                ))
            }
        };
        let mut submit_form = None;
        match (verb, &command.payload) {
            (Verb::Type, Some(Payload::Text { text, append })) => {
                if !(kinds.contains(ElementKind::Typable)
                    || kinds.contains(ElementKind::Datepicker))
                {
                    return Err(incompatible(verb, el, "element is not typable"));
                }
                let (text, append) = (text.clone(), *append);
                self.edit(idx, |e| {
                    let meta = form_meta(e);
                    if append {
                        meta.value.push_str(&text);
                    } else {
                        meta.value = text;
                    }
                })?;
            }
            (Verb::CheckToggle, None) => {
                requires(ElementKind::Checkable)?;
                self.edit(idx, |e| {
                    let meta = form_meta(e);
                    meta.checked = !meta.checked;
                })?;
            }
            (Verb::Choose | Verb::Unchoose, Some(Payload::Option { option })) => {
                requires(ElementKind::Choosable)?;
                let options = el
                    .form
                    .as_ref()
                    .map(|m| m.options.as_slice())
                    .unwrap_or_default();
                let pos = options
                    .iter()
                    .position(|o| option_matches(&o.label, &o.value, option))
                    .ok_or_else(|| incompatible(verb, el, format!("no option {option:?}")))?;
                let choose = verb == Verb::Choose;
                self.edit(idx, |e| {
                    let meta = form_meta(e);
                    if choose && !meta.multiple {
                        for o in &mut meta.options {
                            o.selected = false;
                        }
                    }
                    meta.options[pos].selected = choose;
                    meta.value = meta
                        .options
                        .iter()
                        .find(|o| o.selected)
                        .map(|o| o.value.clone())
                        .unwrap_or_default();
                })?;
            }
            (Verb::ChooseDate, Some(Payload::Date { date })) => {
                requires(ElementKind::Datepicker)?;
                let iso = date.format("%Y-%m-%d").to_string();
                self.edit(idx, |e| form_meta(e).value = iso)?;
            }
            (Verb::Submit, None) => {
                submit_form = self.nearest_form(idx);
                if submit_form.is_none() && !kinds.contains(ElementKind::Submittable) {
                    return Err(incompatible(
                        verb,
                        el,
                        "element is neither submittable nor inside a form",
                    ));
                }
            }
            (Verb::Click, None) if kinds.contains(ElementKind::Submittable) => {
                submit_form = self.nearest_form(idx);
            }
            (Verb::Drag, Some(Payload::DropOn { target })) => {
                if snap.get(target).is_none() {
                    return Err(InteractError::UnknownElement(target.clone()));
                }
            }
            (Verb::KeyHold | Verb::KeyRelease, _) => {
                return Err(InteractError::InvalidCommand {
                    verb,
                    reason: "acts on the page, not an element".into(),
                })
            }
            _ => {}
        }
        let mut destination = self.transition_for(id, verb);
        let mut submitted = None;
        if let Some(form) = submit_form {
            submitted = Some(self.submitted_fields(form));
            if destination.is_none() {
                let form_id = self.current.snapshot.element(form).id.clone();
                destination = self.transition_for(&form_id, Verb::Submit);
            }
        }
        self.record(
            verb.keyword(),
            Some(id),
            command.payload.clone(),
            submitted,
            destination.clone(),
            snapshot_name,
        )?;
        if let Some(to) = &destination {
            self.navigate(to, self.clock.now());
        }
        Ok(Outcome {
            navigated_to: destination,
        })
    }

    fn open(&mut self, location: &str) -> Result<(), InteractError> {
        let name = self.locate(location)?;
        let from = self.current.name.clone();
        self.navigate(&name, self.clock.now());
        let payload = Payload::Location {
            location: location.to_owned(),
        };
        self.record("open", None, Some(payload), None, Some(name), from)
    }

    fn back(&mut self) -> Result<(), InteractError> {
        let mut prev = self
            .back_stack
            .pop()
            .ok_or(InteractError::NoHistory("back"))?;
        prev.snapshot = self.pages[&prev.name].clone();
        prev.entered = self.clock.now();
        let from = self.current.name.clone();
        let to = prev.name.clone();
        let cur = std::mem::replace(&mut self.current, prev);
        self.forward_stack.push(cur);
        self.record("back", None, None, None, Some(to), from)
    }

    fn forward(&mut self) -> Result<(), InteractError> {
        let mut next = self
            .forward_stack
            .pop()
            .ok_or(InteractError::NoHistory("forward"))?;
        next.snapshot = self.pages[&next.name].clone();
        next.entered = self.clock.now();
        let from = self.current.name.clone();
        let to = next.name.clone();
        let cur = std::mem::replace(&mut self.current, next);
        self.back_stack.push(cur);
        self.record("forward", None, None, None, Some(to), from)
    }

    fn journal(&self) -> &[JournalEntry] {
        self.journal.entries()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::interact::Browser;
    use crate::snapshot::{Rect, SelectOption, Viewport};

    fn rect(x: f64, y: f64, w: f64, h: f64) -> Rect {
        Rect::new(x, y, w, h)
    }

    fn input(id: &str, parent: &str, ty: &str, name: &str, y: f64) -> Element {
        let mut e = Element::new(id, "input", rect(100.0, y, 200.0, 20.0));
        e.parent = Some(parent.into());
        e.attributes.insert("type".into(), ty.into());
        e.attributes.insert("name".into(), name.into());
        e.form = Some(FormMeta {
            input_type: ty.into(),
            value: String::new(),
            checked: false,
            options: Vec::new(),
            multiple: false,
        });
        e
    }

    fn text(id: &str, parent: &str, tag: &str, t: &str, r: Rect) -> Element {
        let mut e = Element::new(id, tag, r);
        e.parent = Some(parent.into());
        e.own_text = t.into();
        e.visible_text = t.into();
        e
    }

    fn login() -> PageSnapshot {
        let mut form = Element::new("form", "form", rect(0.0, 0.0, 400.0, 200.0));
        form.parent = Some("body".into());
        form.visible_text = "Username Remember me Log in".into();
        let mut body = Element::new("body", "body", rect(0.0, 0.0, 800.0, 600.0));
        body.visible_text = form.visible_text.clone();
        let mut remember = input("remember", "form", "checkbox", "remember", 50.0);
        remember.rect = rect(100.0, 50.0, 30.0, 30.0);
        let mut select = Element::new("lang", "select", rect(100.0, 90.0, 200.0, 20.0));
        select.parent = Some("form".into());
        select.attributes.insert("name".into(), "lang".into());
        select.form = Some(FormMeta {
            input_type: "select".into(),
            value: "en".into(),
            checked: false,
            options: vec![
                SelectOption {
                    value: "en".into(),
                    label: "English".into(),
                    selected: true,
                },
                SelectOption {
                    value: "de".into(),
                    label: "Deutsch".into(),
                    selected: false,
                },
            ],
            multiple: false,
        });
        let mut button = text(
            "go",
            "form",
            "button",
            "Log in",
            rect(100.0, 150.0, 80.0, 24.0),
        );
        button.attributes.insert("type".into(), "submit".into());
        PageSnapshot::new(
            "https://example.test/login",
            Viewport {
                width: 800.0,
                height: 600.0,
            },
            vec![
                body,
                form,
                text(
                    "lu",
                    "form",
                    "label",
                    "Username",
                    rect(10.0, 10.0, 80.0, 20.0),
                ),
                input("user", "form", "text", "user", 10.0),
                text(
                    "lr",
                    "form",
                    "label",
                    "Remember me",
                    rect(20.0, 50.0, 70.0, 20.0),
                ),
                remember,
                select,
                button,
            ],
            None,
        )
        .unwrap()
    }

    fn home(url: &str, msg: &str) -> PageSnapshot {
        let mut body = Element::new("body", "body", rect(0.0, 0.0, 800.0, 600.0));
        body.visible_text = msg.into();
        PageSnapshot::new(
            url,
            Viewport {
                width: 800.0,
                height: 600.0,
            },
            vec![
                body,
                text("h", "body", "h1", msg, rect(0.0, 0.0, 400.0, 40.0)),
            ],
            None,
        )
        .unwrap()
    }

    fn backend(timed: bool) -> FixtureBackend {
        let manifest = Manifest {
            format_version: 1,
            start: "login".into(),
            snapshots: [("login", "l.json"), ("home", "h.json"), ("later", "x.json")]
                .into_iter()
                .map(|(a, b)| (a.into(), b.into()))
                .collect(),
            transitions: vec![Transition {
                from_snapshot: "login".into(),
                trigger: Trigger {
                    element_id: "form".into(),
                    verb: Verb::Submit,
                },
                to_snapshot: "home".into(),
            }],
            timed_transitions: if timed {
                vec![TimedTransition {
                    from_snapshot: "home".into(),
                    after_seconds: 3.0,
                    to_snapshot: "later".into(),
                }]
            } else {
                vec![]
            },
        };
        let pages = [
            ("login".to_owned(), login()),
            ("home".to_owned(), home("https://example.test/", "Welcome")),
            (
                "later".to_owned(),
                home("https://example.test/later", "Loaded"),
            ),
        ]
        .into_iter()
        .collect();
        FixtureBackend::from_parts(manifest, pages).unwrap()
    }

    #[test]
    fn form_flow_records_submission() {
        let mut b = Browser::new(backend(false));
        b.type_text("Username", "ada").unwrap();
        b.append_text("Username", "!").unwrap();
        b.check_toggle("Remember me").unwrap();
        b.choose("lang", "Deutsch").unwrap();
        let clicked = b.click("Log in").unwrap();
        assert_eq!(clicked.id, "go");
        let fx = b.backend();
        assert_eq!(fx.current_name(), "home");
        let last = fx.journal().last().unwrap();
        assert_eq!(last.navigated_to.as_deref(), Some("home"));
        let submitted = last.submitted.as_ref().unwrap();
        assert_eq!(submitted["user"], "ada!");
        assert_eq!(submitted["remember"], "on");
        assert_eq!(submitted["lang"], "de");
        assert_eq!(fx.journal().len(), 5);
    }

    #[test]
    fn incompatible_verbs_are_rejected() {
        let mut fx = backend(false);
        let cmd = InteractionCommand::new(Verb::CheckToggle, Target::Element("user".into()), None)
            .unwrap();
        assert!(matches!(
            fx.perform(Some("user"), &cmd),
            Err(InteractError::Incompatible { .. })
        ));
        let cmd = InteractionCommand::new(
            Verb::Choose,
            Target::Element("lang".into()),
            Some(Payload::option("Klingon")),
        )
        .unwrap();
        assert!(matches!(
            fx.perform(Some("lang"), &cmd),
            Err(InteractError::Incompatible { .. })
        ));
        assert!(fx.journal().is_empty());
    }

    #[test]
    fn navigation_restores_pristine_pages() {
        let mut b = Browser::new(backend(false));
        b.type_text("Username", "ada").unwrap();
        b.submit("Log in").unwrap();
        b.back().unwrap();
        let snap = b.snapshot().unwrap();
        assert_eq!(snap.get("user").unwrap().form.as_ref().unwrap().value, "");
        b.forward().unwrap();
        assert_eq!(b.backend().current_name(), "home");
        assert!(matches!(
            b.forward(),
            Err(InteractError::NoHistory("forward"))
        ));
        b.open("https://example.test/login").unwrap();
        assert_eq!(b.backend().current_name(), "login");
        assert!(matches!(
            b.open("nowhere"),
            Err(InteractError::UnknownLocation(_))
        ));
    }

    #[test]
    fn modifiers_are_journaled() {
        let mut b = Browser::new(backend(false));
        b.key_hold("Shift").unwrap();
        b.click("Log in").unwrap();
        b.key_release("shift").unwrap();
        let j = b.backend().journal();
        assert!(j[1].modifiers.contains("shift"));
        assert!(j[2].modifiers.is_empty());
    }

    #[test]
    fn timed_transition_and_wait_for() {
        let clock = VirtualClock::new();
        let fx = backend(true).with_clock(Arc::new(clock.clone()));
        let mut b = Browser::new(fx).with_clock(Arc::new(clock.clone()));
        b.submit("Log in").unwrap();
        let loaded = crate::parse_query("headline(\"Loaded\")").unwrap();
        let w = b.wait_for(&loaded, Duration::from_secs(10)).unwrap();
        assert_eq!(w.polls, 3);
        assert_eq!(w.element.id, "h");
        let never = crate::parse_query("headline(\"Never\")").unwrap();
        match b.wait_for(&never, Duration::from_millis(2500)) {
            Err(InteractError::Timeout { polls, .. }) => assert_eq!(polls, 3),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn replay_reproduces_journal() {
        let mut b = Browser::new(backend(false));
        b.type_text("Username", "ada").unwrap();
        b.key_hold("control").unwrap();
        b.choose("lang", "de").unwrap();
        b.submit("Log in").unwrap();
        b.back().unwrap();
        let recorded = b.backend().journal().to_vec();
        let mut fresh = backend(false);
        fresh.replay(&recorded).unwrap();
        assert_eq!(fresh.journal(), recorded.as_slice());
    }

    #[test]
    fn manifest_errors() {
        let bad = r#"{"formatVersion":2,"start":"a","snapshots":{"a":"a.json"}}"#;
        let m = Manifest::from_json(bad).unwrap();
        assert!(FixtureBackend::from_parts(m, BTreeMap::new()).is_err());
        assert!(
            Manifest::from_json(r#"{"formatVersion":1,"start":"a","snapshots":{},"extra":1}"#)
                .is_err()
        );
    }
}
