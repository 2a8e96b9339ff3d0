//! Element-kind classification and label resolution for form fields.

use std::fmt;

use serde::{Serialize, Serializer};

use crate::geometry::{self, Direction};
use crate::query::ElementKind;
use crate::snapshot::{Element, PageSnapshot};

const CLICKABLE_INPUTS: &[&str] = &["button", "submit", "reset", "image", "checkbox", "radio"];
const TYPABLE_INPUTS: &[&str] = &[
    "text", "search", "email", "url", "tel", "password", "number",
];
const DATE_INPUTS: &[&str] = &["date", "datetime-local", "time", "month", "week"];

/// Multiplier on an input's box diagonal bounding the label search radius.
pub const LABEL_RADIUS_FACTOR: f64 = 1.5;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("element {0:?} is not part of the snapshot")]
pub struct NotInSnapshot(pub String);

/// Compact set of element kinds.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct KindSet(u16);

impl KindSet {
    pub const EMPTY: KindSet = KindSet(0);

    fn bit(kind: ElementKind) -> u16 {
        1 << kind as u16
    }

    pub fn contains(self, kind: ElementKind) -> bool {
        self.0 & Self::bit(kind) != 0
    }

    pub fn insert(&mut self, kind: ElementKind) {
        self.0 |= Self::bit(kind);
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn iter(self) -> impl Iterator<Item = ElementKind> {
        ElementKind::ALL
            .into_iter()
            .filter(move |k| self.contains(*k))
    }
}

impl FromIterator<ElementKind> for KindSet {
    fn from_iter<I: IntoIterator<Item = ElementKind>>(iter: I) -> Self {
        let mut set = KindSet::EMPTY;
        for k in iter {
            set.insert(k);
        }
        set
    }
}

impl fmt::Debug for KindSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

impl Serialize for KindSet {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(self.iter())
    }
}

/// Effective `type` of an `input` element, lowercased; `text` when absent.
/// `None` for other tags.
pub fn input_type(el: &Element) -> Option<String> {
    if el.tag != "input" {
        return None;
    }
    let t = el
        .form
        .as_ref()
        .map(|f| f.input_type.as_str())
        .filter(|t| !t.is_empty())
        .or_else(|| el.attr("type"))
        .unwrap_or("text");
    Some(t.to_ascii_lowercase())
}

fn is_heading_tag(tag: &str) -> bool {
    matches!(tag, "h1" | "h2" | "h3" | "h4" | "h5" | "h6")
}

/// Classifies one element given the page's default font size.
pub fn classify_with(el: &Element, default_font_size: f64) -> KindSet {
    let ty = input_type(el);
    let ty = ty.as_deref();
    let in_list = |list: &[&str]| ty.is_some_and(|t| list.contains(&t));
    let mut kinds = KindSet::EMPTY;

    let text = el.visible && !el.own_text.is_empty();
    if text {
        kinds.insert(ElementKind::Text);
    }
    if is_heading_tag(&el.tag) || (text && el.font_size > default_font_size) {
        kinds.insert(ElementKind::Headline);
    }
    let clickable = (el.tag == "a" && el.attr("href").is_some())
        || el.tag == "button"
        || in_list(CLICKABLE_INPUTS)
        || el.listeners.contains("click");
    if clickable {
        kinds.insert(ElementKind::Clickable);
    }
    let typable = in_list(TYPABLE_INPUTS)
        || el.tag == "textarea"
        || el
            .attr("contenteditable")
            .is_some_and(|v| v.eq_ignore_ascii_case("true"));
    if typable {
        kinds.insert(ElementKind::Typable);
    }
    if in_list(&["checkbox", "radio"]) {
        kinds.insert(ElementKind::Checkable);
    }
    if el.tag == "select" {
        kinds.insert(ElementKind::Choosable);
    }
    let date_hint = ["id", "class", "name"].iter().any(|a| {
        el.attr(a).is_some_and(|v| {
            let v = v.to_ascii_lowercase();
            v.contains("date") || v.contains("picker")
        })
    });
    if in_list(DATE_INPUTS) || (typable && date_hint) {
        kinds.insert(ElementKind::Datepicker);
    }
    let submittable = in_list(&["submit", "image"])
        || (el.tag == "button"
            && el
                .attr("type")
                .is_none_or(|t| t.eq_ignore_ascii_case("submit")));
    if submittable {
        kinds.insert(ElementKind::Submittable);
    }
    if el.tag == "img" || el.has_background_image {
        kinds.insert(ElementKind::Image);
    }
    if matches!(el.tag.as_str(), "ul" | "ol" | "dl") {
        kinds.insert(ElementKind::List);
    }
    if el.tag == "table" {
        kinds.insert(ElementKind::Table);
    }
    kinds
}

pub fn classify(el: &Element, snapshot: &PageSnapshot) -> Result<KindSet, NotInSnapshot> {
    if snapshot.get(&el.id).is_none() {
        return Err(NotInSnapshot(el.id.clone()));
    }
    Ok(classify_with(el, snapshot.default_font_size()))
}

/// Kinds of every element in document order.
pub fn classify_all(snapshot: &PageSnapshot) -> Vec<KindSet> {
    let d = snapshot.default_font_size();
    snapshot
        .elements()
        .iter()
        .map(|e| classify_with(e, d))
        .collect()
}

/// Finds the label of a form field: an explicit `label[for]` naming the
/// field's `id` attribute, else the nearest text element left of or above
/// the field within [`LABEL_RADIUS_FACTOR`] times its diagonal.
pub fn resolve_label_index(snapshot: &PageSnapshot, idx: usize) -> Option<usize> {
    let el = snapshot.element(idx);
    if let Some(html_id) = el.attr("id").filter(|v| !v.is_empty()) {
        let explicit = snapshot
            .elements()
            .iter()
            .position(|l| l.tag == "label" && l.attr("for") == Some(html_id));
        if explicit.is_some() {
            return explicit;
        }
    }
    let radius = LABEL_RADIUS_FACTOR * el.rect.w.hypot(el.rect.h);
    let mut best: Option<(f64, usize)> = None;
    for (i, cand) in snapshot.elements().iter().enumerate() {
        if i == idx || !cand.is_text_bearing() {
            continue;
        }
        let placed = geometry::in_direction(&cand.rect, &el.rect, Direction::LeftOf)
            || geometry::in_direction(&cand.rect, &el.rect, Direction::Above);
        if !placed {
            continue;
        }
        let d = geometry::distance(cand, el);
        if d <= radius && best.is_none_or(|(bd, _)| d < bd) {
            best = Some((d, i));
        }
    }
    best.map(|(_, i)| i)
}

/// Label of an input-kind element; `None` for other elements.
pub fn resolve_label<'a>(el: &Element, snapshot: &'a PageSnapshot) -> Option<&'a Element> {
    let idx = snapshot.index_of(&el.id)?;
    let kinds = classify_with(snapshot.element(idx), snapshot.default_font_size());
    if !kinds.iter().any(ElementKind::is_input) {
        return None;
    }
    resolve_label_index(snapshot, idx).map(|i| snapshot.element(i))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::snapshot::{FormMeta, Rect, Viewport};
    use ElementKind::*;

    fn el(id: &str, tag: &str) -> Element {
        Element::new(id, tag, Rect::new(0.0, 0.0, 10.0, 10.0))
    }

    fn texted(id: &str, tag: &str, text: &str, size: f64) -> Element {
        let mut e = el(id, tag);
        e.own_text = text.into();
        e.visible_text = text.into();
        e.font_size = size;
        e
    }

    fn with_attr(mut e: Element, k: &str, v: &str) -> Element {
        e.attributes.insert(k.into(), v.into());
        e
    }

    fn kinds(e: &Element) -> Vec<ElementKind> {
        classify_with(e, 13.0).iter().collect()
    }

    #[test]
    fn heading_with_text() {
        assert_eq!(
            kinds(&texted("h", "h3", "News", 13.0)),
            vec![Text, Headline]
        );
    }

    #[test]
    fn link_with_href() {
        let a = with_attr(el("a", "a"), "href", "/x");
        assert_eq!(kinds(&a), vec![Clickable]);
        assert_eq!(kinds(&el("a", "a")), Vec::<ElementKind>::new());
    }

    #[test]
    fn large_font_div_is_headline() {
        assert_eq!(
            kinds(&texted("d", "div", "Big", 20.0)),
            vec![Text, Headline]
        );
        assert_eq!(kinds(&texted("d", "div", "Small", 13.0)), vec![Text]);
    }

    #[test]
    fn inputs() {
        assert_eq!(kinds(&el("i", "input")), vec![Typable]);
        let cb = with_attr(el("c", "input"), "type", "checkbox");
        assert_eq!(kinds(&cb), vec![Clickable, Checkable]);
        let sub = with_attr(el("s", "input"), "type", "SUBMIT");
        assert_eq!(kinds(&sub), vec![Clickable, Submittable]);
        assert_eq!(kinds(&el("b", "button")), vec![Clickable, Submittable]);
        let reset = with_attr(el("b", "button"), "type", "reset");
        assert_eq!(kinds(&reset), vec![Clickable]);
        let date = with_attr(el("d", "input"), "type", "date");
        assert_eq!(kinds(&date), vec![Datepicker]);
        let picker = with_attr(el("d", "input"), "class", "ui-DatePicker");
        assert_eq!(kinds(&picker), vec![Typable, Datepicker]);
        assert_eq!(kinds(&el("s", "select")), vec![Choosable]);
        let ce = with_attr(el("c", "div"), "contenteditable", "true");
        assert_eq!(kinds(&ce), vec![Typable]);
    }

    #[test]
    fn form_type_wins_over_attribute() {
        let mut e = with_attr(el("i", "input"), "type", "text");
        e.form = Some(FormMeta {
            input_type: "radio".into(),
            value: String::new(),
            checked: false,
            options: vec![],
            multiple: false,
        });
        assert_eq!(kinds(&e), vec![Clickable, Checkable]);
    }

    #[test]
    fn images_lists_tables() {
        assert_eq!(kinds(&el("i", "img")), vec![Image]);
        let mut bg = el("b", "div");
        bg.has_background_image = true;
        assert_eq!(kinds(&bg), vec![Image]);
        assert_eq!(kinds(&el("l", "dl")), vec![List]);
        assert_eq!(kinds(&el("t", "table")), vec![Table]);
        let mut clicky = el("x", "span");
        clicky.listeners.insert("click".into());
        assert_eq!(kinds(&clicky), vec![Clickable]);
    }

    fn page(elements: Vec<Element>) -> PageSnapshot {
        PageSnapshot::new(
            "about:test",
            Viewport {
                width: 800.0,
                height: 600.0,
            },
            elements,
            None,
        )
        .unwrap()
    }

    #[test]
    fn label_by_proximity() {
        let mut input = el("in", "input");
        input.rect = Rect::new(100.0, 100.0, 80.0, 20.0);
        let mut label = texted("lab", "span", "Author", 13.0);
        label.rect = Rect::new(30.0, 100.0, 60.0, 20.0);
        let snap = page(vec![label, input]);
        let got = resolve_label(snap.element(1), &snap).unwrap();
        assert_eq!(got.id, "lab");
    }

    #[test]
    fn explicit_label_wins() {
        let mut input = with_attr(el("in", "input"), "id", "f1");
        input.rect = Rect::new(100.0, 100.0, 80.0, 20.0);
        let mut near = texted("near", "span", "Other", 13.0);
        near.rect = Rect::new(40.0, 100.0, 50.0, 20.0);
        let mut far = with_attr(texted("far", "label", "Title", 13.0), "for", "f1");
        far.rect = Rect::new(500.0, 500.0, 50.0, 20.0);
        let snap = page(vec![near, far, input]);
        assert_eq!(resolve_label(snap.element(2), &snap).unwrap().id, "far");
    }

    #[test]
    fn no_label_in_radius() {
        let mut input = el("in", "input");
        input.rect = Rect::new(400.0, 400.0, 80.0, 20.0);
        let mut label = texted("lab", "span", "Author", 13.0);
        label.rect = Rect::new(0.0, 0.0, 60.0, 20.0);
        let snap = page(vec![label, input]);
        assert!(resolve_label(snap.element(1), &snap).is_none());
    }

    #[test]
    fn lookup_error() {
        let snap = page(vec![el("a", "div")]);
        assert_eq!(
            classify(&el("zz", "div"), &snap),
            Err(NotInSnapshot("zz".into()))
        );
    }
}
