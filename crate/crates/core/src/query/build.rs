//! Fluent constructors mirroring each AST node.
//!
//! ```
//! use visq_core::query::build::*;
//!
//! let q = headline().and(clickable()).and(below(typable().with_text("search")));
//! assert_eq!(q.to_string(), r#"headline() & clickable() & below(typable("search"))"#);
//! ```

use super::{ColorSpec, CssSelector, Direction, DirectionMode, ElementKind, Predicate, QueryError};

pub fn kind(kind: ElementKind) -> Predicate {
    Predicate::Kind { kind, text: None }
}

macro_rules! kind_ctors {
    ($($name:ident => $kind:ident),* $(,)?) => {
        $(
            pub fn $name() -> Predicate {
                kind(ElementKind::$kind)
            }
        )*
    };
}

kind_ctors! {
    text => Text,
    headline => Headline,
    clickable => Clickable,
    typable => Typable,
    checkable => Checkable,
    choosable => Choosable,
    datepicker => Datepicker,
    submittable => Submittable,
    image => Image,
    list => List,
    table => Table,
}

pub fn contains(text: impl Into<String>) -> Predicate {
    Predicate::Contains(text.into())
}

pub fn direction(dir: Direction, mode: DirectionMode, inner: Predicate) -> Predicate {
    Predicate::Direction {
        dir,
        mode,
        inner: Box::new(inner),
        max_distance: None,
    }
}

macro_rules! dir_ctors {
    ($($name:ident => $dir:ident, $mode:ident);* $(;)?) => {
        $(
            pub fn $name(reference: Predicate) -> Predicate {
                direction(Direction::$dir, DirectionMode::$mode, reference)
            }
        )*
    };
}

dir_ctors! {
    below => Below, Single;
    below_any => Below, Any;
    below_all => Below, All;
    above => Above, Single;
    above_any => Above, Any;
    above_all => Above, All;
    left_of => LeftOf, Single;
    left_of_any => LeftOf, Any;
    left_of_all => LeftOf, All;
    right_of => RightOf, Single;
    right_of_any => RightOf, Any;
    right_of_all => RightOf, All;
}

pub fn color(spec: ColorSpec) -> Predicate {
    Predicate::Color(spec)
}

pub fn and(children: impl IntoIterator<Item = Predicate>) -> Result<Predicate, QueryError> {
    let children: Vec<_> = children.into_iter().collect();
    if children.len() < 2 {
        return Err(QueryError::Arity {
            op: "and",
            got: children.len(),
        });
    }
    Ok(Predicate::And(children))
}

pub fn or(children: impl IntoIterator<Item = Predicate>) -> Result<Predicate, QueryError> {
    let children: Vec<_> = children.into_iter().collect();
    if children.len() < 2 {
        return Err(QueryError::Arity {
            op: "or",
            got: children.len(),
        });
    }
    Ok(Predicate::Or(children))
}

pub fn not(child: Predicate) -> Predicate {
    Predicate::Not(Box::new(child))
}

pub fn css(selector: &str) -> Result<Predicate, QueryError> {
    CssSelector::parse(selector)
        .map(Predicate::Css)
        .map_err(|source| QueryError::Css { offset: 0, source })
}

/// Combines a predicate list the way a query call does: one predicate stands
/// alone, several are intersected.
pub fn all_of(preds: impl IntoIterator<Item = Predicate>) -> Result<Predicate, QueryError> {
    let mut preds: Vec<_> = preds.into_iter().collect();
    match preds.len() {
        0 => Err(QueryError::Arity {
            op: "query",
            got: 0,
        }),
        1 => Ok(preds.pop().expect("one element")),
        _ => Ok(Predicate::And(preds)),
    }
}
