//! Per-node membership and score evaluation.

use std::sync::OnceLock;

use crate::classify::{classify_all, resolve_label_index, KindSet};
use crate::color::match_region;
use crate::geometry::{direction_match, distance};
use crate::query::{DirectionMode, ElementKind, Predicate};
use crate::snapshot::PageSnapshot;

use super::prune::prune_mask;
use super::text::{attribute_tier, tier_folded, MatchTier, Needle};
use super::{EvalError, Execution, WeightConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Shape {
    Leaf,
    And,
    Or,
    Not,
}

/// Evaluated predicate node: membership and leaf score per element.
#[derive(Debug)]
pub(crate) struct Node {
    pub shape: Shape,
    pub label: String,
    pub mask: Vec<bool>,
    pub score: Vec<f64>,
    pub children: Vec<Node>,
}

pub(crate) struct Ctx<'a> {
    pub snap: &'a PageSnapshot,
    pub weights: &'a WeightConfig,
    pub exec: Execution,
    kinds: OnceLock<Vec<KindSet>>,
    folded: OnceLock<Vec<String>>,
    labels: OnceLock<Vec<Option<usize>>>,
}

impl<'a> Ctx<'a> {
    pub fn new(snap: &'a PageSnapshot, weights: &'a WeightConfig, exec: Execution) -> Self {
        Ctx {
            snap,
            weights,
            exec,
            kinds: OnceLock::new(),
            folded: OnceLock::new(),
            labels: OnceLock::new(),
        }
    }

    fn kinds(&self) -> &[KindSet] {
        self.kinds.get_or_init(|| classify_all(self.snap))
    }

    fn folded(&self) -> &[String] {
        self.folded.get_or_init(|| {
            self.snap
                .elements()
                .iter()
                .map(|e| e.visible_text.to_lowercase())
                .collect()
        })
    }

    fn labels(&self) -> &[Option<usize>] {
        self.labels.get_or_init(|| {
            let kinds = self.kinds();
            map_elems(self.exec, self.snap.len(), |i| {
                if kinds[i].iter().any(ElementKind::is_input) {
                    resolve_label_index(self.snap, i)
                } else {
                    None
                }
            })
        })
    }

    pub fn eval(&self, p: &Predicate) -> Result<Node, EvalError> {
        let n = self.snap.len();
        let label = p.label();
        let w = self.weights;
        let leaf = |pairs: Vec<(bool, f64)>| {
            let (mask, score) = pairs.into_iter().unzip();
            Node {
                shape: Shape::Leaf,
                label: label.clone(),
                mask,
                score,
                children: Vec::new(),
            }
        };
        Ok(match p {
            Predicate::Kind { kind, text } => {
                let kinds = self.kinds();
                match text {
                    None => leaf(map_elems(self.exec, n, |i| {
                        let m = kinds[i].contains(*kind);
                        (m, if m { w.kind } else { 0.0 })
                    })),
                    Some(t) => {
                        let needle = Needle::new(t);
                        let folded = self.folded();
                        let labels = if kind.is_input() {
                            Some(self.labels())
                        } else {
                            None
                        };
                        leaf(map_elems(self.exec, n, |i| {
                            if !kinds[i].contains(*kind) {
                                return (false, 0.0);
                            }
                            let el = self.snap.element(i);
                            let mut own = tier_folded(&folded[i], needle.as_str());
                            if !own.is_match() {
                                own = attribute_tier(el, &needle).0;
                            }
                            let mut best = w.tier_score(own);
                            let mut matched = own.is_match();
                            if let Some(labels) = labels {
                                let ot = option_tier(el, &needle);
                                if ot.is_match() {
                                    matched = true;
                                    best = best.max(w.tier_score(ot));
                                }
                                if let Some(l) = labels[i] {
                                    let lt = tier_folded(&folded[l], needle.as_str());
                                    if lt.is_match() {
                                        matched = true;
                                        best = best.max(w.tier_score(lt)) + w.label_bonus;
                                    }
                                }
                            }
                            (matched, if matched { best } else { 0.0 })
                        }))
                    }
                }
            }
            Predicate::Contains(t) => {
                let needle = Needle::new(t);
                let folded = self.folded();
                let visible: Vec<MatchTier> =
                    map_elems(self.exec, n, |i| tier_folded(&folded[i], needle.as_str()));
                let any_visible = visible.iter().any(|t| t.is_match());
                leaf(map_elems(self.exec, n, |i| {
                    let tier = if any_visible {
                        visible[i]
                    } else {
                        attribute_tier(self.snap.element(i), &needle).0
                    };
                    (tier.is_match(), w.tier_score(tier))
                }))
            }
            Predicate::Direction {
                dir,
                mode,
                inner,
                max_distance,
            } => {
                let inner = self.eval(inner)?;
                let refs: Vec<usize> = prune_mask(self.snap, &inner.mask)
                    .iter()
                    .enumerate()
                    .filter_map(|(i, &m)| m.then_some(i))
                    .collect();
                let els = self.snap.elements();
                leaf(map_elems(self.exec, n, |i| {
                    if refs.is_empty() {
                        return (false, 0.0);
                    }
                    let cand = &els[i];
                    let mut nearest = f64::INFINITY;
                    let mut hits = 0usize;
                    for &r in &refs {
                        if direction_match(cand, &els[r], *dir, *max_distance) {
                            hits += 1;
                            nearest = nearest.min(distance(cand, &els[r]));
                        } else if *mode == DirectionMode::All {
                            return (false, 0.0);
                        }
                    }
                    if hits == 0 {
                        (false, 0.0)
                    } else {
                        (true, w.distance_score(nearest))
                    }
                }))
            }
            Predicate::Color(spec) => {
                let raster = self.snap.screenshot().ok_or(EvalError::RasterRequired)?;
                let els = self.snap.elements();
                leaf(map_elems(self.exec, n, |i| {
                    let m = match_region(&els[i].rect, raster, spec);
                    (m.matched, if m.matched { m.score() } else { 0.0 })
                }))
            }
            Predicate::Css(sel) => leaf(map_elems(self.exec, n, |i| {
                let m = sel.matches(self.snap, i);
                (m, if m { w.selector } else { 0.0 })
            })),
            Predicate::And(cs) | Predicate::Or(cs) => {
                let is_and = matches!(p, Predicate::And(_));
                let children = cs
                    .iter()
                    .map(|c| self.eval(c))
                    .collect::<Result<Vec<_>, _>>()?;
                let mask = (0..n)
                    .map(|i| {
                        if is_and {
                            children.iter().all(|c| c.mask[i])
                        } else {
                            children.iter().any(|c| c.mask[i])
                        }
                    })
                    .collect();
                Node {
                    shape: if is_and { Shape::And } else { Shape::Or },
                    label,
                    mask,
                    score: vec![0.0; n],
                    children,
                }
            }
            Predicate::Not(c) => {
                let child = self.eval(c)?;
                Node {
                    shape: Shape::Not,
                    label,
                    mask: child.mask.iter().map(|m| !m).collect(),
                    score: vec![0.0; n],
                    children: vec![child],
                }
            }
        })
    }
}

fn option_tier(el: &crate::snapshot::Element, needle: &Needle) -> MatchTier {
    el.form
        .iter()
        .flat_map(|f| &f.options)
        .map(|o| needle.tier(&o.label))
        .max()
        .unwrap_or(MatchTier::NoMatch)
}

/// Applies `f` to every element index, in parallel when requested and
/// compiled in.
pub(crate) fn map_elems<T, F>(exec: Execution, n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    match exec {
        #[cfg(feature = "parallel")]
        Execution::Parallel => {
            use rayon::prelude::*;
            (0..n).into_par_iter().map(f).collect()
        }
        _ => (0..n).map(f).collect(),
    }
}

/// Collects `(path, label, score)` for element `i` from every scored node
/// on a satisfied branch.
pub(crate) fn contributions(
    node: &Node,
    i: usize,
    path: &str,
    out: &mut Vec<(String, String, f64)>,
) {
    match node.shape {
        Shape::Leaf => {
            if node.mask[i] {
                out.push((path.to_owned(), node.label.clone(), node.score[i]));
            }
        }
        Shape::And | Shape::Or => {
            for (j, c) in node.children.iter().enumerate() {
                if c.mask[i] {
                    contributions(c, i, &format!("{path}[{j}]"), out);
                }
            }
        }
        Shape::Not => {}
    }
}
