//! Predicate AST, fluent constructors, and the textual query language.
//!
//! Grammar (precedence `!` > `&`/`,` > `|`):
//!
//! ```text
//! query := or
//! or    := and ('|' and)*
//! and   := unary (('&' | ',') unary)*
//! unary := '!' unary | prim
//! prim  := KIND ['(' [STR] ')'] | 'contains' '(' STR ')'
//!        | DIR '(' query [',' NUMBER] ')'
//!        | 'color' '(' NAME [',' LEVEL [',' LEVEL]] ')'
//!        | 'css' '(' STR ')' | '(' query ')'
//! ```

pub mod build;
pub mod css;
mod parser;

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::color;
pub use crate::geometry::Direction;
pub use css::{CssError, CssSelector};
pub use parser::parse_query;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ElementKind {
    Text,
    Headline,
    Clickable,
    Typable,
    Checkable,
    Choosable,
    Datepicker,
    Submittable,
    Image,
    List,
    Table,
}

impl ElementKind {
    pub const ALL: [ElementKind; 11] = [
        ElementKind::Text,
        ElementKind::Headline,
        ElementKind::Clickable,
        ElementKind::Typable,
        ElementKind::Checkable,
        ElementKind::Choosable,
        ElementKind::Datepicker,
        ElementKind::Submittable,
        ElementKind::Image,
        ElementKind::List,
        ElementKind::Table,
    ];

    pub fn keyword(self) -> &'static str {
        match self {
            ElementKind::Text => "text",
            ElementKind::Headline => "headline",
            ElementKind::Clickable => "clickable",
            ElementKind::Typable => "typable",
            ElementKind::Checkable => "checkable",
            ElementKind::Choosable => "choosable",
            ElementKind::Datepicker => "datepicker",
            ElementKind::Submittable => "submittable",
            ElementKind::Image => "image",
            ElementKind::List => "list",
            ElementKind::Table => "table",
        }
    }

    pub fn from_keyword(s: &str) -> Option<Self> {
        ElementKind::ALL
            .into_iter()
            .find(|k| k.keyword().eq_ignore_ascii_case(s))
    }

    /// Form-field kinds whose text argument may also match a nearby label.
    pub fn is_input(self) -> bool {
        matches!(
            self,
            ElementKind::Typable
                | ElementKind::Checkable
                | ElementKind::Choosable
                | ElementKind::Datepicker
        )
    }
}

impl fmt::Display for ElementKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.keyword())
    }
}

/// How a direction predicate relates to its reference set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DirectionMode {
    Single,
    Any,
    All,
}

impl DirectionMode {
    fn suffix(self) -> &'static str {
        match self {
            DirectionMode::Single => "",
            DirectionMode::Any => "any",
            DirectionMode::All => "all",
        }
    }
}

/// Qualitative level for color tolerance and dominance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Level {
    Low,
    #[default]
    Default,
    High,
}

impl Level {
    pub fn keyword(self) -> &'static str {
        match self {
            Level::Low => "low",
            Level::Default => "default",
            Level::High => "high",
        }
    }

    pub fn from_keyword(s: &str) -> Option<Self> {
        [Level::Low, Level::Default, Level::High]
            .into_iter()
            .find(|l| l.keyword().eq_ignore_ascii_case(s))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ColorSpec {
    pub rgb: [u8; 3],
    pub tolerance: Level,
    pub dominance: Level,
}

impl ColorSpec {
    pub fn rgb(rgb: [u8; 3]) -> Self {
        ColorSpec {
            rgb,
            tolerance: Level::Default,
            dominance: Level::Default,
        }
    }

    /// Looks up a CSS color name or `#rrggbb` / `#rgb` literal.
    pub fn named(name: &str) -> Result<Self, color::UnknownColor> {
        color::parse_color(name).map(ColorSpec::rgb)
    }

    pub fn tolerance(mut self, level: Level) -> Self {
        self.tolerance = level;
        self
    }

    pub fn dominance(mut self, level: Level) -> Self {
        self.dominance = level;
        self
    }
}

/// One node of the query algebra.
#[derive(Debug, Clone, PartialEq)]
pub enum Predicate {
    Kind {
        kind: ElementKind,
        text: Option<String>,
    },
    Contains(String),
    Direction {
        dir: Direction,
        mode: DirectionMode,
        inner: Box<Predicate>,
        max_distance: Option<f64>,
    },
    Color(ColorSpec),
    And(Vec<Predicate>),
    Or(Vec<Predicate>),
    Not(Box<Predicate>),
    Css(CssSelector),
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum QueryError {
    #[error("syntax error at offset {offset}: expected {}, found {found}", expected.join(" or "))]
    Syntax {
        offset: usize,
        expected: Vec<String>,
        found: String,
    },
    #[error("unknown predicate {name:?} at offset {offset}")]
    UnknownPredicate { name: String, offset: usize },
    #[error("at offset {offset}: {source}")]
    Color {
        offset: usize,
        #[source]
        source: color::UnknownColor,
    },
    #[error("in css selector at offset {offset}: {source}")]
    Css {
        offset: usize,
        #[source]
        source: CssError,
    },
    #[error("{op} needs at least two operands, got {got}")]
    Arity { op: &'static str, got: usize },
}

impl QueryError {
    pub fn offset(&self) -> Option<usize> {
        match self {
            QueryError::Syntax { offset, .. }
            | QueryError::UnknownPredicate { offset, .. }
            | QueryError::Color { offset, .. }
            | QueryError::Css { offset, .. } => Some(*offset),
            QueryError::Arity { .. } => None,
        }
    }
}

impl Predicate {
    /// Short label used in score provenance.
    pub fn label(&self) -> String {
        match self {
            Predicate::Kind { kind, .. } => kind.keyword().to_owned(),
            Predicate::Contains(_) => "contains".into(),
            Predicate::Direction { dir, mode, .. } => format!("{}{}", dir.keyword(), mode.suffix()),
            Predicate::Color(_) => "color".into(),
            Predicate::And(_) => "and".into(),
            Predicate::Or(_) => "or".into(),
            Predicate::Not(_) => "not".into(),
            Predicate::Css(_) => "css".into(),
        }
    }

    /// Sets the text argument of a kind predicate; other nodes are returned
    /// unchanged.
    pub fn with_text(self, text: impl Into<String>) -> Self {
        match self {
            Predicate::Kind { kind, .. } => Predicate::Kind {
                kind,
                text: Some(text.into()),
            },
            other => other,
        }
    }

    /// Sets the distance cutoff of a direction predicate; other nodes are
    /// returned unchanged.
    pub fn within(self, px: f64) -> Self {
        match self {
            Predicate::Direction {
                dir, mode, inner, ..
            } => Predicate::Direction {
                dir,
                mode,
                inner,
                max_distance: Some(px),
            },
            other => other,
        }
    }

    /// Narrows with another predicate. Chaining extends an existing `And`.
    pub fn and(self, other: Predicate) -> Self {
        match self {
            Predicate::And(mut children) => {
                children.push(other);
                Predicate::And(children)
            }
            first => Predicate::And(vec![first, other]),
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            Predicate::Direction { inner, .. } | Predicate::Not(inner) => 1 + inner.depth(),
            Predicate::And(c) | Predicate::Or(c) => {
                1 + c.iter().map(Predicate::depth).max().unwrap_or(0)
            }
            _ => 1,
        }
    }
}

pub(crate) fn write_str_literal(f: &mut impl fmt::Write, s: &str) -> fmt::Result {
    f.write_char('"')?;
    for c in s.chars() {
        match c {
            '"' => f.write_str("\\\"")?,
            '\\' => f.write_str("\\\\")?,
            '\n' => f.write_str("\\n")?,
            '\t' => f.write_str("\\t")?,
            '\r' => f.write_str("\\r")?,
            c => f.write_char(c)?,
        }
    }
    f.write_char('"')
}

impl fmt::Display for Predicate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn grouped(f: &mut fmt::Formatter<'_>, p: &Predicate, paren: bool) -> fmt::Result {
            if paren {
                write!(f, "({p})")
            } else {
                write!(f, "{p}")
            }
        }
        match self {
            Predicate::Kind { kind, text } => {
                write!(f, "{}(", kind.keyword())?;
                if let Some(t) = text {
                    write_str_literal(f, t)?;
                }
                f.write_str(")")
            }
            Predicate::Contains(t) => {
                f.write_str("contains(")?;
                write_str_literal(f, t)?;
                f.write_str(")")
            }
            Predicate::Direction {
                dir,
                mode,
                inner,
                max_distance,
            } => {
                write!(f, "{}{}({inner}", dir.keyword(), mode.suffix())?;
                if let Some(d) = max_distance {
                    write!(f, ", {d}")?;
                }
                f.write_str(")")
            }
            Predicate::Color(spec) => {
                let [r, g, b] = spec.rgb;
                write!(f, "color(#{r:02x}{g:02x}{b:02x}")?;
                if spec.tolerance != Level::Default || spec.dominance != Level::Default {
                    write!(f, ", {}", spec.tolerance.keyword())?;
                }
                if spec.dominance != Level::Default {
                    write!(f, ", {}", spec.dominance.keyword())?;
                }
                f.write_str(")")
            }
            Predicate::And(children) => {
                for (i, c) in children.iter().enumerate() {
                    if i > 0 {
                        f.write_str(" & ")?;
                    }
                    grouped(f, c, matches!(c, Predicate::And(_) | Predicate::Or(_)))?;
                }
                Ok(())
            }
            Predicate::Or(children) => {
                for (i, c) in children.iter().enumerate() {
                    if i > 0 {
                        f.write_str(" | ")?;
                    }
                    grouped(f, c, matches!(c, Predicate::Or(_)))?;
                }
                Ok(())
            }
            Predicate::Not(child) => {
                f.write_str("!")?;
                grouped(
                    f,
                    child,
                    matches!(**child, Predicate::And(_) | Predicate::Or(_)),
                )
            }
            Predicate::Css(sel) => {
                f.write_str("css(")?;
                write_str_literal(f, &sel.to_string())?;
                f.write_str(")")
            }
        }
    }
}
