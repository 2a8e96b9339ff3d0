//! Query-class timing over a page and vertically tiled copies of it.
//!
//! Tiling keeps the density of direction relations per page height, so the
//! cost growth of each class can be compared across sizes.

use std::time::{Duration, Instant};

use serde::Serialize;

use crate::engine::{EvalError, QueryEngine};
use crate::query::{ColorSpec, Direction, DirectionMode, ElementKind, Predicate};
use crate::snapshot::{PageSnapshot, SnapshotError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "camelCase")]
pub enum QueryClass {
    Kind,
    Contains,
    Color,
    Direction,
    Composite,
}

impl QueryClass {
    pub const ALL: [QueryClass; 5] = [
        QueryClass::Kind,
        QueryClass::Contains,
        QueryClass::Color,
        QueryClass::Direction,
        QueryClass::Composite,
    ];

    pub fn name(self) -> &'static str {
        match self {
            QueryClass::Kind => "kind",
            QueryClass::Contains => "contains",
            QueryClass::Color => "color",
            QueryClass::Direction => "direction",
            QueryClass::Composite => "composite",
        }
    }
}

/// Separator between an element id and its tile index in tiled copies.
pub const TILE_SEPARATOR: char = '~';

/// Height of one tile: the screenshot height in CSS pixels when present,
/// else the larger of the viewport height and the lowest element bottom.
pub fn page_height(snap: &PageSnapshot) -> f64 {
    if let Some(r) = snap.screenshot() {
        return f64::from(r.height()) / r.scale();
    }
    snap.elements()
        .iter()
        .map(|e| e.rect.bottom())
        .fold(snap.viewport().height, f64::max)
}

/// Stacks `copies` of the page vertically. Copy `k > 0` suffixes every id
/// with `~k` and shifts boxes down by `k` page heights; the raster is tiled
/// to match.
pub fn tile(snap: &PageSnapshot, copies: u32) -> Result<PageSnapshot, SnapshotError> {
    let copies = copies.max(1);
    let height = page_height(snap);
    let suffix = |id: &str, k: u32| {
        if k == 0 {
            id.to_owned()
        } else {
            format!("{id}{TILE_SEPARATOR}{k}")
        }
    };
    let mut elements = Vec::with_capacity(snap.len() * copies as usize);
    for k in 0..copies {
        for e in snap.elements() {
            let mut e = e.clone();
            e.id = suffix(&e.id, k);
            e.parent = e.parent.map(|p| suffix(&p, k));
            e.rect.y += f64::from(k) * height;
            elements.push(e);
        }
    }
    let raster = snap.screenshot().map(|r| r.tiled_vertically(copies));
    PageSnapshot::new(snap.url(), snap.viewport(), elements, raster)
}

/// Representative query of each class for `snap`. The color query uses the
/// raster's most frequent color and is absent without a raster.
pub fn class_queries(snap: &PageSnapshot) -> Vec<(QueryClass, Option<Predicate>)> {
    let word = snap
        .elements()
        .iter()
        .find_map(|e| e.own_text.split_whitespace().next())
        .unwrap_or("a")
        .to_lowercase();
    let text = || Predicate::Kind {
        kind: ElementKind::Text,
        text: None,
    };
    let below_text = Predicate::Direction {
        dir: Direction::Below,
        mode: DirectionMode::Single,
        inner: Box::new(text()),
        max_distance: None,
    };
    let color = snap.screenshot().map(|r| {
        let mut counts = std::collections::HashMap::new();
        for p in r.pixels() {
            *counts.entry(*p).or_insert(0usize) += 1;
        }
        let (rgb, _) = counts
            .into_iter()
            .max_by_key(|&(rgb, n)| (n, std::cmp::Reverse(rgb)))
            .expect("rasters are nonempty");
        Predicate::Color(ColorSpec::rgb(rgb))
    });
    let clickable = Predicate::Kind {
        kind: ElementKind::Clickable,
        text: None,
    };
    let composite = Predicate::And(vec![
        clickable.clone(),
        below_text.clone(),
        Predicate::Not(Box::new(Predicate::Kind {
            kind: ElementKind::Image,
            text: None,
        })),
    ]);
    vec![
        (QueryClass::Kind, Some(clickable)),
        (QueryClass::Contains, Some(Predicate::Contains(word))),
        (QueryClass::Color, color),
        (QueryClass::Direction, Some(below_text)),
        (QueryClass::Composite, Some(composite)),
    ]
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct BenchRow {
    pub class: QueryClass,
    pub copies: u32,
    pub elements: usize,
    pub query: Option<String>,
    /// Median wall time over the repetitions.
    pub millis: Option<f64>,
    pub results: Option<usize>,
    pub skipped: Option<String>,
}

#[derive(Debug, Clone)]
pub struct BenchOptions {
    pub copies: Vec<u32>,
    pub repetitions: u32,
}

impl Default for BenchOptions {
    fn default() -> Self {
        BenchOptions {
            copies: vec![1, 2, 4],
            repetitions: 5,
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum BenchError {
    #[error(transparent)]
    Snapshot(#[from] SnapshotError),
    #[error(transparent)]
    Eval(#[from] EvalError),
}

/// Median time of `reps` evaluations and the result count.
pub fn time_query<E: QueryEngine>(
    engine: &E,
    snap: &PageSnapshot,
    query: &Predicate,
    reps: u32,
) -> Result<(Duration, usize), EvalError> {
    let mut times = Vec::with_capacity(reps.max(1) as usize);
    let mut count = 0;
    for _ in 0..reps.max(1) {
        let start = Instant::now();
        let rs = engine.evaluate(snap, query)?;
        times.push(start.elapsed());
        count = rs.len();
    }
    times.sort();
    Ok((times[times.len() / 2], count))
}

/// Times every query class on each tiling of `snap`.
pub fn run_suite<E: QueryEngine>(
    engine: &E,
    snap: &PageSnapshot,
    options: &BenchOptions,
) -> Result<Vec<BenchRow>, BenchError> {
    let queries = class_queries(snap);
    let mut rows = Vec::new();
    for &k in &options.copies {
        let page = tile(snap, k)?;
        for (class, query) in &queries {
            let row = match query {
                None => BenchRow {
                    class: *class,
                    copies: k,
                    elements: page.len(),
                    query: None,
                    millis: None,
                    results: None,
                    skipped: Some("snapshot has no raster".into()),
                },
                Some(q) => {
                    let (t, n) = time_query(engine, &page, q, options.repetitions)?;
                    BenchRow {
                        class: *class,
                        copies: k,
                        elements: page.len(),
                        query: Some(q.to_string()),
                        millis: Some(t.as_secs_f64() * 1e3),
                        results: Some(n),
                        skipped: None,
                    }
                }
            };
            rows.push(row);
        }
    }
    Ok(rows)
}
