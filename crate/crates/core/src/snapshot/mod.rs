//! Rendered-page data model.
//!
//! A [`PageSnapshot`] is an immutable, validated serialization of one rendered
//! page state: the element forest in document order, per-element geometry and
//! text, form state, and an optional screenshot raster. Snapshots are produced
//! outside this crate (fixtures, or the in-page extractor driven through
//! WebDriver) and loaded with [`load_snapshot`] or [`load_snapshot_file`].

mod raster;
mod validate;

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::io::Read;
use std::path::{Path, PathBuf};

use base64::Engine as _;
use serde::{Deserialize, Serialize};

pub use raster::{Raster, RasterError};
pub use validate::Rule;

/// Snapshot document version understood by this crate.
pub const FORMAT_VERSION: u32 = 1;

/// Fallback when a page has no text-bearing elements.
pub const FALLBACK_FONT_SIZE: f64 = 16.0;

#[derive(Debug, thiserror::Error)]
pub enum SnapshotError {
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("validation error{}: {rule}: {detail}", element.as_ref().map(|e| format!(" on element {e:?}")).unwrap_or_default())]
    Validation {
        element: Option<String>,
        rule: Rule,
        detail: String,
    },
    #[error("screenshot: {0}")]
    Raster(#[from] RasterError),
    #[error("i/o error reading {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl SnapshotError {
    pub(crate) fn validation(element: Option<&str>, rule: Rule, detail: impl Into<String>) -> Self {
        SnapshotError::Validation {
            element: element.map(str::to_owned),
            rule,
            detail: detail.into(),
        }
    }
}

/// Axis-aligned box in CSS pixels.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub x: f64,
    pub y: f64,
    pub w: f64,
    pub h: f64,
}

impl Rect {
    pub const fn new(x: f64, y: f64, w: f64, h: f64) -> Self {
        Rect { x, y, w, h }
    }

    pub fn right(&self) -> f64 {
        self.x + self.w
    }

    pub fn bottom(&self) -> f64 {
        self.y + self.h
    }

    pub fn area(&self) -> f64 {
        self.w * self.h
    }

    pub fn is_empty(&self) -> bool {
        self.w <= 0.0 || self.h <= 0.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Viewport {
    pub width: f64,
    pub height: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectOption {
    pub value: String,
    pub label: String,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub selected: bool,
}

/// Form-control state attached to inputs, selects and text areas.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct FormMeta {
    pub input_type: String,
    #[serde(default)]
    pub value: String,
    #[serde(default)]
    pub checked: bool,
    #[serde(default)]
    pub options: Vec<SelectOption>,
    #[serde(default)]
    pub multiple: bool,
}

impl FormMeta {
    pub fn is_selection(&self) -> bool {
        is_selection_type(&self.input_type)
    }
}

pub(crate) fn is_selection_type(input_type: &str) -> bool {
    matches!(
        input_type,
        "select" | "select-one" | "select-multiple" | "datalist"
    )
}

/// One rendered node.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Element {
    pub id: String,
    pub parent: Option<String>,
    pub tag: String,
    #[serde(rename = "attrs", default)]
    pub attributes: BTreeMap<String, String>,
    #[serde(default)]
    pub own_text: String,
    #[serde(default)]
    pub visible_text: String,
    #[serde(rename = "box")]
    pub rect: Rect,
    pub font_size: f64,
    pub visible: bool,
    #[serde(default)]
    pub listeners: BTreeSet<String>,
    #[serde(default)]
    pub has_background_image: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub form: Option<FormMeta>,
}

impl Element {
    /// Visible, textless element with default font size; a starting point for
    /// programmatic construction.
    pub fn new(id: impl Into<String>, tag: impl Into<String>, rect: Rect) -> Self {
        Element {
            id: id.into(),
            parent: None,
            tag: tag.into(),
            attributes: BTreeMap::new(),
            own_text: String::new(),
            visible_text: String::new(),
            rect,
            font_size: FALLBACK_FONT_SIZE,
            visible: true,
            listeners: BTreeSet::new(),
            has_background_image: false,
            form: None,
        }
    }

    pub fn attr(&self, name: &str) -> Option<&str> {
        self.attributes.get(name).map(String::as_str)
    }

    /// Text-bearing: visible with nonempty own text.
    pub fn is_text_bearing(&self) -> bool {
        self.visible && !self.own_text.is_empty()
    }
}

/// Immutable rendered page.
#[derive(Debug, Clone)]
pub struct PageSnapshot {
    url: String,
    viewport: Viewport,
    elements: Vec<Element>,
    screenshot: Option<Raster>,
    index: HashMap<String, usize>,
    parents: Vec<Option<usize>>,
    children: Vec<Vec<usize>>,
    depth: Vec<u32>,
    default_font_size: f64,
}

impl PartialEq for PageSnapshot {
    fn eq(&self, other: &Self) -> bool {
        self.url == other.url
            && self.viewport == other.viewport
            && self.elements == other.elements
            && self.screenshot == other.screenshot
    }
}

impl PageSnapshot {
    /// Builds and validates a snapshot from parts. Text fields are normalized
    /// and tags lowercased before validation.
    pub fn new(
        url: impl Into<String>,
        viewport: Viewport,
        mut elements: Vec<Element>,
        screenshot: Option<Raster>,
    ) -> Result<Self, SnapshotError> {
        for el in &mut elements {
            el.tag = el.tag.to_ascii_lowercase();
            el.own_text = normalize_text(&el.own_text);
            el.visible_text = normalize_text(&el.visible_text);
        }
        let index = validate::validate(&viewport, &elements, screenshot.as_ref())?;
        let parents: Vec<Option<usize>> = elements
            .iter()
            .map(|e| e.parent.as_ref().map(|p| index[p]))
            .collect();
        let mut children = vec![Vec::new(); elements.len()];
        let mut depth = vec![0u32; elements.len()];
        for (i, p) in parents.iter().enumerate() {
            if let Some(p) = *p {
                children[p].push(i);
                depth[i] = depth[p] + 1;
            }
        }
        let default_font_size = compute_default_font_size(&elements);
        Ok(PageSnapshot {
            url: url.into(),
            viewport,
            elements,
            screenshot,
            index,
            parents,
            children,
            depth,
            default_font_size,
        })
    }

    pub fn url(&self) -> &str {
        &self.url
    }

    pub fn viewport(&self) -> Viewport {
        self.viewport
    }

    pub fn elements(&self) -> &[Element] {
        &self.elements
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn element(&self, idx: usize) -> &Element {
        &self.elements[idx]
    }

    pub fn get(&self, id: &str) -> Option<&Element> {
        self.index.get(id).map(|&i| &self.elements[i])
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.index.get(id).copied()
    }

    pub fn screenshot(&self) -> Option<&Raster> {
        self.screenshot.as_ref()
    }

    pub fn parent_of(&self, idx: usize) -> Option<usize> {
        self.parents[idx]
    }

    pub fn children_of(&self, idx: usize) -> &[usize] {
        &self.children[idx]
    }

    pub fn depth_of(&self, idx: usize) -> u32 {
        self.depth[idx]
    }

    /// Strict ancestors of `idx`, nearest first.
    pub fn ancestors(&self, idx: usize) -> impl Iterator<Item = usize> + '_ {
        std::iter::successors(self.parents[idx], move |&p| self.parents[p])
    }

    pub fn is_ancestor(&self, ancestor: usize, idx: usize) -> bool {
        self.ancestors(idx).any(|a| a == ancestor)
    }

    /// Strict descendants of `idx` in document order.
    pub fn descendants(&self, idx: usize) -> Vec<usize> {
        let mut out = Vec::new();
        let mut stack: Vec<usize> = self.children[idx].iter().rev().copied().collect();
        while let Some(n) = stack.pop() {
            out.push(n);
            stack.extend(self.children[n].iter().rev().copied());
        }
        out
    }

    /// Mode of font sizes over text-bearing elements, cached at construction.
    pub fn default_font_size(&self) -> f64 {
        self.default_font_size
    }

    /// Returns a copy with the element at `idx` replaced by `f(element)`.
    /// Used by interaction backends to produce snapshot transitions.
    pub fn with_element<F>(&self, idx: usize, f: F) -> Result<PageSnapshot, SnapshotError>
    where
        F: FnOnce(&mut Element),
    {
        let mut elements = self.elements.clone();
        f(&mut elements[idx]);
        PageSnapshot::new(
            self.url.clone(),
            self.viewport,
            elements,
            self.screenshot.clone(),
        )
    }

    pub fn with_screenshot(
        self,
        screenshot: Option<Raster>,
    ) -> Result<PageSnapshot, SnapshotError> {
        PageSnapshot::new(self.url, self.viewport, self.elements, screenshot)
    }

    pub fn into_parts(self) -> (String, Viewport, Vec<Element>, Option<Raster>) {
        (self.url, self.viewport, self.elements, self.screenshot)
    }

    /// Serializes to the snapshot document format. The raster, when present,
    /// is embedded as a base64 PNG.
    pub fn to_document(&self) -> Result<serde_json::Value, SnapshotError> {
        let screenshot = match &self.screenshot {
            Some(r) => Some(ScreenshotDoc {
                path: None,
                png: Some(base64::engine::general_purpose::STANDARD.encode(r.to_png()?)),
                scale: r.scale(),
            }),
            None => None,
        };
        let doc = SnapshotDoc {
            format_version: Some(FORMAT_VERSION),
            url: self.url.clone(),
            viewport: self.viewport,
            screenshot,
            elements: self.elements.clone(),
        };
        Ok(serde_json::to_value(doc).expect("snapshot document is always serializable"))
    }

    pub fn to_json_string(&self) -> Result<String, SnapshotError> {
        Ok(serde_json::to_string_pretty(&self.to_document()?).expect("value serializes"))
    }
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
struct SnapshotDoc {
    #[serde(default)]
    format_version: Option<u32>,
    url: String,
    viewport: Viewport,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    screenshot: Option<ScreenshotDoc>,
    elements: Vec<Element>,
}

#[derive(Debug, Serialize, Deserialize)]
struct ScreenshotDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    path: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    png: Option<String>,
    #[serde(default = "default_scale")]
    scale: f64,
}

fn default_scale() -> f64 {
    1.0
}

/// Options controlling how external resources referenced by a snapshot
/// document are resolved.
#[derive(Debug, Clone, Default)]
pub struct LoadOptions {
    /// Directory that relative screenshot paths are resolved against.
    pub base_dir: Option<PathBuf>,
}

/// Loads a snapshot document from a byte stream. Relative screenshot paths are
/// resolved against the current directory.
pub fn load_snapshot<R: Read>(source: R) -> Result<PageSnapshot, SnapshotError> {
    load_snapshot_with(source, &LoadOptions::default())
}

pub fn load_snapshot_with<R: Read>(
    mut source: R,
    options: &LoadOptions,
) -> Result<PageSnapshot, SnapshotError> {
    let mut text = String::new();
    source
        .read_to_string(&mut text)
        .map_err(|e| SnapshotError::Parse {
            line: 0,
            column: 0,
            message: e.to_string(),
        })?;
    load_snapshot_str(&text, options)
}

pub fn load_snapshot_str(text: &str, options: &LoadOptions) -> Result<PageSnapshot, SnapshotError> {
    let doc: SnapshotDoc = serde_json::from_str(text).map_err(|e| SnapshotError::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    from_doc(doc, options)
}

/// Builds a snapshot from an already-parsed JSON value (e.g. the result of an
/// injected script).
pub fn load_snapshot_value(value: serde_json::Value) -> Result<PageSnapshot, SnapshotError> {
    let doc: SnapshotDoc = serde_json::from_value(value).map_err(|e| SnapshotError::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    from_doc(doc, &LoadOptions::default())
}

pub fn load_snapshot_file(path: impl AsRef<Path>) -> Result<PageSnapshot, SnapshotError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| SnapshotError::Io {
        path: path.to_owned(),
        source,
    })?;
    let options = LoadOptions {
        base_dir: path.parent().map(Path::to_owned),
    };
    load_snapshot_str(&text, &options)
}

fn from_doc(doc: SnapshotDoc, options: &LoadOptions) -> Result<PageSnapshot, SnapshotError> {
    match doc.format_version {
        Some(FORMAT_VERSION) => {}
        Some(v) => {
            return Err(SnapshotError::validation(
                None,
                Rule::FormatVersion,
                format!("unsupported formatVersion {v}"),
            ))
        }
        None => {
            return Err(SnapshotError::validation(
                None,
                Rule::FormatVersion,
                "missing formatVersion",
            ))
        }
    }
    let screenshot = match doc.screenshot {
        None => None,
        Some(s) => {
            let bytes = match (s.png, s.path) {
                (Some(b64), _) => base64::engine::general_purpose::STANDARD
                    .decode(b64.trim())
                    .map_err(|e| RasterError::Decode(format!("base64: {e}")))?,
                (None, Some(p)) => {
                    let p = PathBuf::from(p);
                    let full = match (&options.base_dir, p.is_relative()) {
                        (Some(dir), true) => dir.join(&p),
                        _ => p,
                    };
                    std::fs::read(&full)
                        .map_err(|source| SnapshotError::Io { path: full, source })?
                }
                (None, None) => {
                    return Err(SnapshotError::validation(
                        None,
                        Rule::Screenshot,
                        "screenshot needs either `png` or `path`",
                    ))
                }
            };
            Some(Raster::from_png(&bytes, s.scale)?)
        }
    };
    PageSnapshot::new(doc.url, doc.viewport, doc.elements, screenshot)
}

/// Collapses whitespace runs to single spaces and trims both ends. Case is
/// preserved.
pub fn normalize_text(raw: &str) -> String {
    let mut out = String::with_capacity(raw.len());
    for word in raw.split_whitespace() {
        if !out.is_empty() {
            out.push(' ');
        }
        out.push_str(word);
    }
    out
}

/// Mode of `fontSize` over visible elements with nonempty own text; ties go
/// to the smaller size; 16 when no such element exists.
pub fn default_font_size(snapshot: &PageSnapshot) -> f64 {
    snapshot.default_font_size
}

fn compute_default_font_size(elements: &[Element]) -> f64 {
    let mut sizes: Vec<f64> = elements
        .iter()
        .filter(|e| e.is_text_bearing())
        .map(|e| e.font_size)
        .collect();
    if sizes.is_empty() {
        return FALLBACK_FONT_SIZE;
    }
    sizes.sort_by(f64::total_cmp);
    let mut best = sizes[0];
    let mut best_count = 0usize;
    let mut i = 0;
    while i < sizes.len() {
        let mut j = i;
        while j < sizes.len() && sizes[j] == sizes[i] {
            j += 1;
        }
        // strictly greater keeps the smaller size on ties (ascending scan)
        if j - i > best_count {
            best_count = j - i;
            best = sizes[i];
        }
        i = j;
    }
    best
}
