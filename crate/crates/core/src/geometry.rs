//! Center distance, direction membership and box overlap.

use serde::{Deserialize, Serialize};

use crate::snapshot::{Element, Rect};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Below,
    Above,
    LeftOf,
    RightOf,
}

impl Direction {
    pub const ALL: [Direction; 4] = [
        Direction::Below,
        Direction::Above,
        Direction::LeftOf,
        Direction::RightOf,
    ];

    pub fn keyword(self) -> &'static str {
        match self {
            Direction::Below => "below",
            Direction::Above => "above",
            Direction::LeftOf => "leftof",
            Direction::RightOf => "rightof",
        }
    }
}

/// Relation of box `a` to box `b`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Overlap {
    None,
    Partial,
    /// `a` contains `b`.
    Contains,
    /// `a` lies inside `b`.
    ContainedBy,
    /// Both boxes coincide.
    Identical,
}

pub fn center(rect: &Rect) -> Point {
    Point {
        x: rect.x + rect.w / 2.0,
        y: rect.y + rect.h / 2.0,
    }
}

pub fn point_distance(a: Point, b: Point) -> f64 {
    (a.x - b.x).hypot(a.y - b.y)
}

/// Euclidean distance between box centers.
pub fn rect_distance(a: &Rect, b: &Rect) -> f64 {
    point_distance(center(a), center(b))
}

pub fn distance(a: &Element, b: &Element) -> f64 {
    rect_distance(&a.rect, &b.rect)
}

/// Half-plane test on centers: is `candidate` in direction `dir` of `reference`?
pub fn in_direction(candidate: &Rect, reference: &Rect, dir: Direction) -> bool {
    let c = center(candidate);
    let r = center(reference);
    match dir {
        Direction::Below => c.y > r.y,
        Direction::Above => c.y < r.y,
        Direction::RightOf => c.x > r.x,
        Direction::LeftOf => c.x < r.x,
    }
}

/// Direction membership with optional distance cutoff. An element never
/// matches itself.
pub fn direction_match(
    candidate: &Element,
    reference: &Element,
    dir: Direction,
    max_distance: Option<f64>,
) -> bool {
    if candidate.id == reference.id {
        return false;
    }
    in_direction(&candidate.rect, &reference.rect, dir)
        && max_distance.is_none_or(|max| distance(candidate, reference) <= max)
}

pub fn rect_overlap(a: &Rect, b: &Rect) -> Overlap {
    let a_has_b = a.x <= b.x && a.y <= b.y && b.right() <= a.right() && b.bottom() <= a.bottom();
    let b_has_a = b.x <= a.x && b.y <= a.y && a.right() <= b.right() && a.bottom() <= b.bottom();
    match (a_has_b, b_has_a) {
        (true, true) => Overlap::Identical,
        (true, false) => Overlap::Contains,
        (false, true) => Overlap::ContainedBy,
        (false, false) => {
            let ix = a.right().min(b.right()) - a.x.max(b.x);
            let iy = a.bottom().min(b.bottom()) - a.y.max(b.y);
            if ix > 0.0 && iy > 0.0 {
                Overlap::Partial
            } else {
                Overlap::None
            }
        }
    }
}

pub fn overlap(a: &Element, b: &Element) -> Overlap {
    rect_overlap(&a.rect, &b.rect)
}
