//! Brute-force reference evaluator written directly from the predicate
//! rules, sharing no code with the engine beyond the data model and the
//! parsed selector tree.

use std::cell::RefCell;
use std::collections::HashMap;

use visq_core::query::css::{Combinator, Complex, Compound, CssSelector};
use visq_core::query::{ColorSpec, Direction, DirectionMode, ElementKind, Level, Predicate};
use visq_core::snapshot::{Element, PageSnapshot, Raster};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Tier {
    None,
    Contains,
    StartsEnds,
    Word,
    Exact,
}

impl Tier {
    pub fn score(self) -> f64 {
        match self {
            Tier::Exact => 1.0,
            Tier::Word => 0.8,
            Tier::StartsEnds => 0.6,
            Tier::Contains => 0.4,
            Tier::None => 0.0,
        }
    }
}

const KIND_SCORE: f64 = 0.5;
const CSS_SCORE: f64 = 0.5;
const LABEL_BONUS: f64 = 0.3;
const SIZE_PRIOR: f64 = 0.1;
const HALF_LIFE: f64 = 100.0;

pub fn fold(s: &str) -> String {
    s.split(char::is_whitespace)
        .filter(|w| !w.is_empty())
        .collect::<Vec<_>>()
        .join(" ")
        .to_lowercase()
}

/// Tier of `query` within `text`, both compared case-insensitively after
/// whitespace folding.
pub fn tier(text: &str, query: &str) -> Tier {
    let (h, q) = (fold(text), fold(query));
    if h == q {
        return Tier::Exact;
    }
    let words: Vec<&str> = h.split(' ').collect();
    let qn = q.split(' ').count();
    if !q.is_empty()
        && qn <= words.len()
        && (0..=words.len() - qn).any(|i| words[i..i + qn].join(" ") == q)
    {
        return Tier::Word;
    }
    if h.starts_with(&q) || h.ends_with(&q) {
        return Tier::StartsEnds;
    }
    if h.contains(&q) {
        return Tier::Contains;
    }
    Tier::None
}

fn center(e: &Element) -> (f64, f64) {
    (e.rect.x + e.rect.w / 2.0, e.rect.y + e.rect.h / 2.0)
}

fn dist(a: &Element, b: &Element) -> f64 {
    let ((ax, ay), (bx, by)) = (center(a), center(b));
    ((ax - bx).powi(2) + (ay - by).powi(2)).sqrt()
}

fn side(c: &Element, r: &Element, dir: Direction) -> bool {
    let ((cx, cy), (rx, ry)) = (center(c), center(r));
    match dir {
        Direction::Below => cy > ry,
        Direction::Above => cy < ry,
        Direction::RightOf => cx > rx,
        Direction::LeftOf => cx < rx,
    }
}

pub struct Oracle<'a> {
    snap: &'a PageSnapshot,
    els: &'a [Element],
    parent: Vec<Option<usize>>,
    default_font: f64,
    refs: RefCell<HashMap<usize, Vec<usize>>>,
    page_visible: RefCell<HashMap<String, bool>>,
    labels: RefCell<HashMap<usize, Option<usize>>>,
}

impl<'a> Oracle<'a> {
    pub fn new(snap: &'a PageSnapshot) -> Self {
        let els = snap.elements();
        let pos: HashMap<&str, usize> = els
            .iter()
            .enumerate()
            .map(|(i, e)| (e.id.as_str(), i))
            .collect();
        let parent = els
            .iter()
            .map(|e| e.parent.as_deref().map(|p| pos[p]))
            .collect();
        let mut sizes: Vec<(f64, usize)> = Vec::new();
        for e in els.iter().filter(|e| e.visible && !e.own_text.is_empty()) {
            match sizes.iter_mut().find(|(s, _)| *s == e.font_size) {
                Some((_, n)) => *n += 1,
                None => sizes.push((e.font_size, 1)),
            }
        }
        sizes.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.total_cmp(&b.0)));
        let default_font = sizes.first().map_or(16.0, |s| s.0);
        Oracle {
            snap,
            els,
            parent,
            default_font,
            refs: RefCell::default(),
            page_visible: RefCell::default(),
            labels: RefCell::default(),
        }
    }

    pub fn default_font(&self) -> f64 {
        self.default_font
    }

    fn input_type(&self, e: &Element) -> Option<String> {
        if e.tag != "input" {
            return None;
        }
        let t = e
            .form
            .as_ref()
            .map(|f| f.input_type.clone())
            .filter(|t| !t.is_empty())
            .or_else(|| e.attr("type").map(str::to_owned))
            .unwrap_or_else(|| "text".into());
        Some(t.to_lowercase())
    }

    pub fn has_kind(&self, e: &Element, kind: ElementKind) -> bool {
        let ty = self.input_type(e);
        let ty_in = |set: &[&str]| ty.as_deref().is_some_and(|t| set.contains(&t));
        let text = e.visible && !e.own_text.is_empty();
        let typable = ty_in(&[
            "text", "search", "email", "url", "tel", "password", "number",
        ]) || e.tag == "textarea"
            || e.attr("contenteditable")
                .is_some_and(|v| v.to_lowercase() == "true");
        match kind {
            ElementKind::Text => text,
            ElementKind::Headline => {
                ["h1", "h2", "h3", "h4", "h5", "h6"].contains(&e.tag.as_str())
                    || (text && e.font_size > self.default_font)
            }
            ElementKind::Clickable => {
                (e.tag == "a" && e.attributes.contains_key("href"))
                    || e.tag == "button"
                    || ty_in(&["button", "submit", "reset", "image", "checkbox", "radio"])
                    || e.listeners.iter().any(|l| l == "click")
            }
            ElementKind::Typable => typable,
            ElementKind::Checkable => ty_in(&["checkbox", "radio"]),
            ElementKind::Choosable => e.tag == "select",
            ElementKind::Datepicker => {
                let hint = ["id", "class", "name"].iter().any(|a| {
                    e.attr(a).is_some_and(|v| {
                        v.to_lowercase().contains("date") || v.to_lowercase().contains("picker")
                    })
                });
                ty_in(&["date", "datetime-local", "time", "month", "week"]) || (typable && hint)
            }
            ElementKind::Submittable => {
                ty_in(&["submit", "image"])
                    || (e.tag == "button"
                        && e.attr("type").is_none_or(|t| t.to_lowercase() == "submit"))
            }
            ElementKind::Image => e.tag == "img" || e.has_background_image,
            ElementKind::List => ["ul", "ol", "dl"].contains(&e.tag.as_str()),
            ElementKind::Table => e.tag == "table",
        }
    }

    /// Label of a form field: explicit `label[for]` first, else the nearest
    /// text element to the left or above within 1.5 diagonals.
    pub fn label(&self, i: usize) -> Option<usize> {
        let e = &self.els[i];
        if let Some(id) = e.attr("id").filter(|v| !v.is_empty()) {
            if let Some(l) = self
                .els
                .iter()
                .position(|l| l.tag == "label" && l.attr("for") == Some(id))
            {
                return Some(l);
            }
        }
        let radius = 1.5 * (e.rect.w * e.rect.w + e.rect.h * e.rect.h).sqrt();
        let mut best: Option<(f64, usize)> = None;
        for (j, c) in self.els.iter().enumerate() {
            if j == i || !c.visible || c.own_text.is_empty() {
                continue;
            }
            if !(side(c, e, Direction::LeftOf) || side(c, e, Direction::Above)) {
                continue;
            }
            let d = dist(c, e);
            if d <= radius && best.is_none_or(|(bd, _)| d < bd) {
                best = Some((d, j));
            }
        }
        best.map(|b| b.1)
    }

    fn attr_tier(e: &Element, q: &str) -> Tier {
        [
            "name",
            "id",
            "title",
            "class",
            "alt",
            "placeholder",
            "value",
        ]
        .iter()
        .filter_map(|a| e.attr(a))
        .map(|v| tier(v, q))
        .max()
        .unwrap_or(Tier::None)
    }

    /// Visible text first, the element's own attributes otherwise.
    pub fn text_tier(e: &Element, q: &str) -> Tier {
        match tier(&e.visible_text, q) {
            Tier::None => Self::attr_tier(e, q),
            t => t,
        }
    }

    fn kind_text(&self, i: usize, kind: ElementKind, q: &str) -> Option<f64> {
        let e = &self.els[i];
        let own = Self::text_tier(e, q);
        let mut score = own.score();
        let mut hit = own != Tier::None;
        let input_kind = matches!(
            kind,
            ElementKind::Typable
                | ElementKind::Checkable
                | ElementKind::Choosable
                | ElementKind::Datepicker
        );
        if input_kind {
            let opt = e
                .form
                .iter()
                .flat_map(|f| f.options.iter())
                .map(|o| tier(&o.label, q))
                .max()
                .unwrap_or(Tier::None);
            if opt != Tier::None {
                hit = true;
                score = score.max(opt.score());
            }
            let label = *self
                .labels
                .borrow_mut()
                .entry(i)
                .or_insert_with(|| self.label(i));
            if let Some(l) = label {
                let lt = tier(&self.els[l].visible_text, q);
                if lt != Tier::None {
                    hit = true;
                    score = score.max(lt.score()) + LABEL_BONUS;
                }
            }
        }
        hit.then_some(score)
    }

    fn is_ancestor(&self, a: usize, mut d: usize) -> bool {
        while let Some(p) = self.parent[d] {
            if p == a {
                return true;
            }
            d = p;
        }
        false
    }

    /// Drops members that have a member descendant with identical visible text.
    pub fn prune(&self, set: &[usize]) -> Vec<usize> {
        let mut out: Vec<usize> = set
            .iter()
            .copied()
            .filter(|&a| {
                !set.iter().any(|&d| {
                    d != a
                        && self.is_ancestor(a, d)
                        && self.els[d].visible_text == self.els[a].visible_text
                })
            })
            .collect();
        out.sort();
        out.dedup();
        out
    }

    fn compound(&self, c: &Compound, i: usize) -> bool {
        let e = &self.els[i];
        if c.tag
            .as_ref()
            .is_some_and(|t| !t.eq_ignore_ascii_case(&e.tag))
        {
            return false;
        }
        if c.ids.iter().any(|id| e.attr("id") != Some(id.as_str())) {
            return false;
        }
        let classes: Vec<&str> = e.attr("class").unwrap_or("").split_whitespace().collect();
        if c.classes.iter().any(|k| !classes.contains(&k.as_str())) {
            return false;
        }
        c.attrs.iter().all(|t| {
            let have = e
                .attr(&t.name)
                .or((t.name == "data-vq-id").then_some(e.id.as_str()));
            match (have, &t.value) {
                (None, _) => false,
                (Some(_), None) => true,
                (Some(h), Some(v)) => h == v,
            }
        })
    }

    fn complex(&self, cx: &Complex, k: usize, i: usize) -> bool {
        if !self.compound(&cx.compounds[k], i) {
            return false;
        }
        if k == 0 {
            return true;
        }
        match cx.combinators[k - 1] {
            Combinator::Child => self.parent[i].is_some_and(|p| self.complex(cx, k - 1, p)),
            Combinator::Descendant => {
                (0..self.els.len()).any(|a| self.is_ancestor(a, i) && self.complex(cx, k - 1, a))
            }
        }
    }

    fn css(&self, sel: &CssSelector, i: usize) -> bool {
        sel.groups
            .iter()
            .any(|g| self.complex(g, g.compounds.len() - 1, i))
    }

    /// Fraction of matching pixels over the whole region and the mean
    /// normalized distance of the matching ones.
    pub fn color(&self, e: &Element, raster: &Raster, spec: &ColorSpec) -> (bool, f64, f64) {
        color_region(e, raster, spec)
    }

    fn leaf(&self, p: &Predicate, i: usize) -> Option<f64> {
        let e = &self.els[i];
        match p {
            Predicate::Kind { kind, text } => {
                if !self.has_kind(e, *kind) {
                    return None;
                }
                match text {
                    None => Some(KIND_SCORE),
                    Some(q) => self.kind_text(i, *kind, q),
                }
            }
            Predicate::Contains(q) => {
                let page_visible = *self
                    .page_visible
                    .borrow_mut()
                    .entry(q.clone())
                    .or_insert_with(|| {
                        self.els
                            .iter()
                            .any(|x| tier(&x.visible_text, q) != Tier::None)
                    });
                let t = if page_visible {
                    tier(&e.visible_text, q)
                } else {
                    Self::attr_tier(e, q)
                };
                (t != Tier::None).then(|| t.score())
            }
            Predicate::Direction {
                dir,
                mode,
                inner,
                max_distance,
            } => {
                let key = inner.as_ref() as *const Predicate as usize;
                let cached = self.refs.borrow().get(&key).cloned();
                let refs = match cached {
                    Some(r) => r,
                    None => {
                        let r = self.prune(&self.members_inner(inner));
                        self.refs.borrow_mut().insert(key, r.clone());
                        r
                    }
                };
                let ok = |r: usize| {
                    r != i
                        && self.els[r].id != e.id
                        && side(e, &self.els[r], *dir)
                        && max_distance.is_none_or(|m| dist(e, &self.els[r]) <= m)
                };
                let hits: Vec<usize> = refs.iter().copied().filter(|&r| ok(r)).collect();
                let member = match mode {
                    DirectionMode::All => !refs.is_empty() && hits.len() == refs.len(),
                    _ => !hits.is_empty(),
                };
                member.then(|| {
                    let d = hits
                        .iter()
                        .map(|&r| dist(e, &self.els[r]))
                        .fold(f64::INFINITY, f64::min);
                    1.0 / (1.0 + d / HALF_LIFE)
                })
            }
            Predicate::Color(spec) => {
                let raster = self.snap.screenshot().expect("color oracle needs a raster");
                let (m, frac, mean) = self.color(e, raster, spec);
                m.then(|| frac.min(1.0) * (1.0 - mean))
            }
            Predicate::Css(sel) => self.css(sel, i).then_some(CSS_SCORE),
            _ => unreachable!("not a leaf"),
        }
    }

    /// Membership of element `i` and its summed score.
    fn eval_at(&self, p: &Predicate, i: usize) -> Option<f64> {
        match p {
            Predicate::And(cs) => {
                let mut total = 0.0;
                for c in cs {
                    total += self.eval_at(c, i)?;
                }
                Some(total)
            }
            Predicate::Or(cs) => {
                let scores: Vec<f64> = cs.iter().filter_map(|c| self.eval_at(c, i)).collect();
                (!scores.is_empty()).then(|| scores.iter().sum())
            }
            Predicate::Not(c) => match self.eval_at(c, i) {
                Some(_) => None,
                None => Some(0.0),
            },
            leaf => self.leaf(leaf, i),
        }
    }

    fn members_inner(&self, p: &Predicate) -> Vec<usize> {
        (0..self.els.len())
            .filter(|&i| self.eval_at(p, i).is_some())
            .collect()
    }

    /// Member indices before pruning, in document order.
    pub fn members(&self, p: &Predicate) -> Vec<usize> {
        self.refs.borrow_mut().clear();
        self.members_inner(p)
    }

    /// Pruned members with weights, best first, ties in document order.
    pub fn ranked(&self, p: &Predicate) -> Vec<(usize, f64)> {
        let vp = self.snap.viewport();
        let vp_area = vp.width * vp.height;
        let kept = self.prune(&self.members(p));
        let mut out: Vec<(usize, f64)> = kept
            .into_iter()
            .map(|i| {
                let e = &self.els[i];
                let penalty = SIZE_PRIOR * (e.rect.w * e.rect.h / vp_area).min(1.0);
                (i, (self.eval_at(p, i).unwrap() - penalty).max(0.0))
            })
            .collect();
        out.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
        out
    }

    pub fn first(&self, p: &Predicate) -> Option<&'a Element> {
        self.ranked(p).first().map(|&(i, _)| &self.els[i])
    }
}

fn tolerance(l: Level) -> f64 {
    match l {
        Level::Low => 0.08,
        Level::Default => 0.15,
        Level::High => 0.30,
    }
}

fn dominance(l: Level) -> f64 {
    match l {
        Level::Low => 0.25,
        Level::Default => 0.50,
        Level::High => 0.80,
    }
}

/// Counts every pixel under the element's box; valid as a reference for
/// regions no larger than the sampling cap.
pub fn color_region(e: &Element, raster: &Raster, spec: &ColorSpec) -> (bool, f64, f64) {
    let s = raster.scale();
    let px = |v: f64, max: u32| (v * s).round().clamp(0.0, f64::from(max)) as u32;
    let (x0, y0) = (px(e.rect.x, raster.width()), px(e.rect.y, raster.height()));
    let x1 = px(e.rect.x + e.rect.w, raster.width()).max(x0);
    let y1 = px(e.rect.y + e.rect.h, raster.height()).max(y0);
    let (mut hits, mut total, mut sum) = (0usize, 0usize, 0.0);
    for y in y0..y1 {
        for x in x0..x1 {
            total += 1;
            let p = raster.pixel(x, y);
            let d2: f64 = (0..3)
                .map(|k| (f64::from(p[k]) - f64::from(spec.rgb[k])).powi(2))
                .sum();
            let d = d2.sqrt() / (255.0 * 3f64.sqrt());
            if d <= tolerance(spec.tolerance) {
                hits += 1;
                sum += d;
            }
        }
    }
    if total == 0 {
        return (false, 0.0, 1.0);
    }
    let frac = hits as f64 / total as f64;
    let mean = if hits == 0 { 1.0 } else { sum / hits as f64 };
    (hits > 0 && frac >= dominance(spec.dominance), frac, mean)
}
