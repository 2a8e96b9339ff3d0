use std::collections::HashMap;
use std::fmt;

use super::{is_selection_type, Element, Raster, SnapshotError, Viewport};

/// Snapshot invariant that a document can violate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Rule {
    FormatVersion,
    Screenshot,
    Viewport,
    EmptyId,
    UniqueId,
    /// Parent must resolve to an element earlier in document order.
    ParentOrder,
    BoxGeometry,
    /// Visible elements have positive width and height.
    VisibleArea,
    /// Invisible elements carry no text.
    InvisibleText,
    OwnTextContained,
    ChildTextContained,
    FontSize,
    FormOptions,
    FormChecked,
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Rule::FormatVersion => "format-version",
            Rule::Screenshot => "screenshot",
            Rule::Viewport => "viewport",
            Rule::EmptyId => "empty-id",
            Rule::UniqueId => "unique-id",
            Rule::ParentOrder => "parent-order",
            Rule::BoxGeometry => "box-geometry",
            Rule::VisibleArea => "visible-area",
            Rule::InvisibleText => "invisible-text",
            Rule::OwnTextContained => "own-text-contained",
            Rule::ChildTextContained => "child-text-contained",
            Rule::FontSize => "font-size",
            Rule::FormOptions => "form-options",
            Rule::FormChecked => "form-checked",
        };
        f.write_str(s)
    }
}

/// Checks every snapshot invariant; returns the id index on success.
/// Expects text fields already normalized.
pub(super) fn validate(
    viewport: &Viewport,
    elements: &[Element],
    screenshot: Option<&Raster>,
) -> Result<HashMap<String, usize>, SnapshotError> {
    let ok_dim = |v: f64| v.is_finite() && v > 0.0;
    if !ok_dim(viewport.width) || !ok_dim(viewport.height) {
        return Err(SnapshotError::validation(
            None,
            Rule::Viewport,
            format!(
                "viewport must be positive, got {}x{}",
                viewport.width, viewport.height
            ),
        ));
    }
    if let Some(r) = screenshot {
        if !(r.scale().is_finite() && r.scale() > 0.0) {
            return Err(SnapshotError::validation(
                None,
                Rule::Screenshot,
                "scale must be > 0",
            ));
        }
    }

    let mut index = HashMap::with_capacity(elements.len());
    for (i, el) in elements.iter().enumerate() {
        let id = Some(el.id.as_str());
        if el.id.is_empty() {
            return Err(SnapshotError::validation(
                None,
                Rule::EmptyId,
                format!("element #{i} has an empty id"),
            ));
        }
        if index.insert(el.id.clone(), i).is_some() {
            return Err(SnapshotError::validation(
                id,
                Rule::UniqueId,
                "duplicate element id",
            ));
        }
        if let Some(p) = &el.parent {
            // parents are already indexed only if they came earlier
            if !index.contains_key(p) || p == &el.id {
                return Err(SnapshotError::validation(
                    id,
                    Rule::ParentOrder,
                    format!("parent {p:?} does not name an earlier element"),
                ));
            }
        }
        let r = &el.rect;
        if !(r.x.is_finite() && r.y.is_finite() && r.w.is_finite() && r.h.is_finite())
            || r.w < 0.0
            || r.h < 0.0
        {
            return Err(SnapshotError::validation(
                id,
                Rule::BoxGeometry,
                format!("invalid box {{x:{}, y:{}, w:{}, h:{}}}", r.x, r.y, r.w, r.h),
            ));
        }
        if el.visible && r.is_empty() {
            return Err(SnapshotError::validation(
                id,
                Rule::VisibleArea,
                "zero-area elements must be marked invisible",
            ));
        }
        if !el.visible && (!el.visible_text.is_empty() || !el.own_text.is_empty()) {
            return Err(SnapshotError::validation(
                id,
                Rule::InvisibleText,
                "invisible element has text",
            ));
        }
        if !el.visible_text.contains(el.own_text.as_str()) {
            return Err(SnapshotError::validation(
                id,
                Rule::OwnTextContained,
                "ownText is not part of visibleText",
            ));
        }
        if !el.font_size.is_finite()
            || el.font_size < 0.0
            || (!el.own_text.is_empty() && el.font_size <= 0.0)
        {
            return Err(SnapshotError::validation(
                id,
                Rule::FontSize,
                format!("fontSize {} not allowed here", el.font_size),
            ));
        }
        if let Some(form) = &el.form {
            if !form.options.is_empty() && !is_selection_type(&form.input_type) {
                return Err(SnapshotError::validation(
                    id,
                    Rule::FormOptions,
                    format!("options on non-selection input type {:?}", form.input_type),
                ));
            }
            if form.checked && !matches!(form.input_type.as_str(), "checkbox" | "radio") {
                return Err(SnapshotError::validation(
                    id,
                    Rule::FormChecked,
                    format!("checked on input type {:?}", form.input_type),
                ));
            }
        }
    }

    for el in elements {
        if !el.visible || el.visible_text.is_empty() {
            continue;
        }
        if let Some(p) = &el.parent {
            let parent = &elements[index[p]];
            if !parent.visible_text.contains(el.visible_text.as_str()) {
                return Err(SnapshotError::validation(
                    Some(&parent.id),
                    Rule::ChildTextContained,
                    format!("visibleText does not contain that of child {:?}", el.id),
                ));
            }
        }
    }
    Ok(index)
}
