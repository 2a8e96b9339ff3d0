//! Predicate evaluation: membership, merging, distinct-descendant pruning,
//! weighting and ordering.
//!
//! ```
//! use visq_core::engine::Engine;
//! use visq_core::query::parse_query;
//! use visq_core::snapshot::{Element, PageSnapshot, Rect, Viewport};
//!
//! let mut link = Element::new("a1", "a", Rect::new(0.0, 0.0, 40.0, 10.0));
//! link.attributes.insert("href".into(), "/next".into());
//! link.own_text = "Next".into();
//! link.visible_text = "Next".into();
//! let page = PageSnapshot::new("about:x", Viewport { width: 100.0, height: 100.0 }, vec![link], None).unwrap();
//!
//! let hits = Engine::default().evaluate(&page, &parse_query(r#"clickable("next")"#).unwrap()).unwrap();
//! assert_eq!(hits.ids(), vec!["a1"]);
//! ```

mod eval;
pub mod prune;
pub mod text;
pub mod weights;

use serde::Serialize;

use crate::query::Predicate;
use crate::snapshot::{Element, PageSnapshot};

pub use prune::prune_descendants;
pub use text::{text_tier, MatchTier};
pub use weights::{WeightConfig, WeightConfigError};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum EvalError {
    #[error("color predicates need a screenshot raster")]
    RasterRequired,
}

/// Whether per-element work runs on the rayon pool.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Execution {
    Parallel,
    Sequential,
}

impl Default for Execution {
    fn default() -> Self {
        if cfg!(feature = "parallel") {
            Execution::Parallel
        } else {
            Execution::Sequential
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Contribution {
    /// Position of the scoring node: `$` is the root, `$[1]` its second
    /// child; `size` is the size prior.
    pub path: String,
    pub predicate: String,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScoredElement {
    pub id: String,
    #[serde(skip)]
    pub index: usize,
    pub weight: f64,
    pub contributions: Vec<Contribution>,
}

impl ScoredElement {
    pub fn element<'a>(&self, snapshot: &'a PageSnapshot) -> &'a Element {
        snapshot.element(self.index)
    }
}

/// Duplicate-free matches ordered by descending weight, ties in document
/// order. Serializes as an array of `{id, weight, contributions}`.
#[derive(Debug, Clone, PartialEq, Default, Serialize)]
#[serde(transparent)]
pub struct ResultSet {
    items: Vec<ScoredElement>,
}

impl ResultSet {
    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, ScoredElement> {
        self.items.iter()
    }

    pub fn first(&self) -> Option<&ScoredElement> {
        self.items.first()
    }

    pub fn ids(&self) -> Vec<&str> {
        self.items.iter().map(|s| s.id.as_str()).collect()
    }

    pub fn indices(&self) -> Vec<usize> {
        self.items.iter().map(|s| s.index).collect()
    }

    pub fn into_vec(self) -> Vec<ScoredElement> {
        self.items
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("result sets serialize")
    }
}

impl<'a> IntoIterator for &'a ResultSet {
    type Item = &'a ScoredElement;
    type IntoIter = std::slice::Iter<'a, ScoredElement>;

    fn into_iter(self) -> Self::IntoIter {
        self.items.iter()
    }
}

/// Head of an ordered result set.
pub fn find_first(results: &ResultSet) -> Option<&ScoredElement> {
    results.first()
}

/// Anything that can answer a query over a snapshot. Interaction code is
/// generic over this so tests can substitute instrumented engines.
pub trait QueryEngine {
    fn evaluate(
        &self,
        snapshot: &PageSnapshot,
        predicate: &Predicate,
    ) -> Result<ResultSet, EvalError>;

    fn find_first(
        &self,
        snapshot: &PageSnapshot,
        predicate: &Predicate,
    ) -> Result<Option<ScoredElement>, EvalError> {
        Ok(self
            .evaluate(snapshot, predicate)?
            .into_vec()
            .into_iter()
            .next())
    }
}

#[derive(Debug, Clone, Default)]
pub struct Engine {
    pub weights: WeightConfig,
    pub execution: Execution,
}

impl Engine {
    pub fn new(weights: WeightConfig, execution: Execution) -> Self {
        Engine { weights, execution }
    }

    pub fn sequential() -> Self {
        Engine::new(WeightConfig::default(), Execution::Sequential)
    }

    /// Membership before pruning and weighting, in document order.
    pub fn members(
        &self,
        snapshot: &PageSnapshot,
        predicate: &Predicate,
    ) -> Result<Vec<usize>, EvalError> {
        let ctx = eval::Ctx::new(snapshot, &self.weights, self.execution);
        let root = ctx.eval(predicate)?;
        Ok((0..snapshot.len()).filter(|&i| root.mask[i]).collect())
    }

    pub fn evaluate(
        &self,
        snapshot: &PageSnapshot,
        predicate: &Predicate,
    ) -> Result<ResultSet, EvalError> {
        let ctx = eval::Ctx::new(snapshot, &self.weights, self.execution);
        let root = ctx.eval(predicate)?;
        let survivors = prune::prune_mask(snapshot, &root.mask);
        let w = &self.weights;
        let vp = snapshot.viewport();
        let viewport_area = vp.width * vp.height;
        let mut items: Vec<ScoredElement> = (0..snapshot.len())
            .filter(|&i| survivors[i])
            .map(|i| {
                let mut raw = Vec::new();
                eval::contributions(&root, i, "$", &mut raw);
                let mut contributions: Vec<Contribution> = raw
                    .into_iter()
                    .map(|(path, predicate, score)| Contribution {
                        path,
                        predicate,
                        score: score * w.scale,
                    })
                    .collect();
                let penalty = w.size_penalty(snapshot.element(i).rect.area(), viewport_area);
                contributions.push(Contribution {
                    path: "size".into(),
                    predicate: "size".into(),
                    score: penalty * w.scale,
                });
                let total: f64 = contributions.iter().map(|c| c.score).sum();
                ScoredElement {
                    id: snapshot.element(i).id.clone(),
                    index: i,
                    weight: total.max(0.0),
                    contributions,
                }
            })
            .collect();
        items.sort_by(|a, b| b.weight.total_cmp(&a.weight).then(a.index.cmp(&b.index)));
        Ok(ResultSet { items })
    }
}

impl QueryEngine for Engine {
    fn evaluate(
        &self,
        snapshot: &PageSnapshot,
        predicate: &Predicate,
    ) -> Result<ResultSet, EvalError> {
        Engine::evaluate(self, snapshot, predicate)
    }
}

/// Evaluates with default weights and execution.
pub fn evaluate(snapshot: &PageSnapshot, predicate: &Predicate) -> Result<ResultSet, EvalError> {
    Engine::default().evaluate(snapshot, predicate)
}
