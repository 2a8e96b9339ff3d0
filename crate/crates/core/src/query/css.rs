//! CSS selector subset: type, `*`, `#id`, `.class`, `[attr]`, `[attr=val]`,
//! descendant and child combinators, comma groups. Pseudo-classes,
//! pseudo-elements, sibling combinators and attribute operators other than
//! `=` are rejected as unsupported.
//!
//! The element-id attribute stamped by the page extractor is always present:
//! `[data-vq-id="e3"]` selects the element whose snapshot id is `e3`.

use std::fmt;

use crate::snapshot::PageSnapshot;
use crate::webdriver::ELEMENT_ID_ATTR;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CssError {
    #[error("syntax error at offset {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error("unsupported selector feature {feature:?} at offset {offset}")]
    Unsupported { offset: usize, feature: String },
}

impl CssError {
    pub fn offset(&self) -> usize {
        match self {
            CssError::Syntax { offset, .. } | CssError::Unsupported { offset, .. } => *offset,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Combinator {
    Descendant,
    Child,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AttrTest {
    pub name: String,
    pub value: Option<String>,
}

/// Simple selectors applying to a single element. An empty compound is the
/// universal selector.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Compound {
    pub tag: Option<String>,
    pub ids: Vec<String>,
    pub classes: Vec<String>,
    pub attrs: Vec<AttrTest>,
}

/// Compounds joined left to right; `combinators[i]` sits between
/// `compounds[i]` and `compounds[i + 1]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Complex {
    pub compounds: Vec<Compound>,
    pub combinators: Vec<Combinator>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CssSelector {
    pub groups: Vec<Complex>,
}

pub fn parse_css(input: &str) -> Result<CssSelector, CssError> {
    CssSelector::parse(input)
}

impl CssSelector {
    pub fn parse(input: &str) -> Result<Self, CssError> {
        Parser { src: input, pos: 0 }.selector()
    }

    /// Does the element at `idx` match any group?
    pub fn matches(&self, snapshot: &PageSnapshot, idx: usize) -> bool {
        self.groups.iter().any(|g| g.matches(snapshot, idx))
    }
}

impl Complex {
    fn matches(&self, snapshot: &PageSnapshot, idx: usize) -> bool {
        self.match_at(snapshot, self.compounds.len() - 1, idx)
    }

    fn match_at(&self, snapshot: &PageSnapshot, k: usize, idx: usize) -> bool {
        if !self.compounds[k].matches(snapshot, idx) {
            return false;
        }
        if k == 0 {
            return true;
        }
        match self.combinators[k - 1] {
            Combinator::Child => snapshot
                .parent_of(idx)
                .is_some_and(|p| self.match_at(snapshot, k - 1, p)),
            Combinator::Descendant => snapshot
                .ancestors(idx)
                .any(|a| self.match_at(snapshot, k - 1, a)),
        }
    }
}

impl Compound {
    fn matches(&self, snapshot: &PageSnapshot, idx: usize) -> bool {
        let el = snapshot.element(idx);
        if let Some(tag) = &self.tag {
            if !el.tag.eq_ignore_ascii_case(tag) {
                return false;
            }
        }
        if !self.ids.iter().all(|id| el.attr("id") == Some(id.as_str())) {
            return false;
        }
        if !self.classes.is_empty() {
            let classes = el.attr("class").unwrap_or("");
            if !self
                .classes
                .iter()
                .all(|c| classes.split_whitespace().any(|have| have == c))
            {
                return false;
            }
        }
        let attr = |name: &str| {
            el.attr(name)
                .or_else(|| (name == ELEMENT_ID_ATTR).then_some(el.id.as_str()))
        };
        self.attrs.iter().all(|t| match (&t.value, attr(&t.name)) {
            (_, None) => false,
            (None, Some(_)) => true,
            (Some(want), Some(have)) => want == have,
        })
    }

    fn is_universal(&self) -> bool {
        self.tag.is_none()
            && self.ids.is_empty()
            && self.classes.is_empty()
            && self.attrs.is_empty()
    }
}

struct Parser<'a> {
    src: &'a str,
    pos: usize,
}

fn is_ident_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '-' || c == '_' || !c.is_ascii()
}

impl Parser<'_> {
    fn peek(&self) -> Option<char> {
        self.src[self.pos..].chars().next()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos += c.len_utf8();
        Some(c)
    }

    fn skip_ws(&mut self) -> bool {
        let start = self.pos;
        while self.peek().is_some_and(char::is_whitespace) {
            self.bump();
        }
        self.pos > start
    }

    fn syntax(&self, message: impl Into<String>) -> CssError {
        CssError::Syntax {
            offset: self.pos,
            message: message.into(),
        }
    }

    fn unsupported(&self, feature: impl Into<String>) -> CssError {
        CssError::Unsupported {
            offset: self.pos,
            feature: feature.into(),
        }
    }

    fn selector(mut self) -> Result<CssSelector, CssError> {
        let mut groups = vec![self.complex()?];
        while self.peek() == Some(',') {
            self.bump();
            groups.push(self.complex()?);
        }
        if let Some(c) = self.peek() {
            return Err(self.syntax(format!("unexpected {c:?}")));
        }
        Ok(CssSelector { groups })
    }

    fn complex(&mut self) -> Result<Complex, CssError> {
        self.skip_ws();
        let mut compounds = vec![self.compound()?];
        let mut combinators = Vec::new();
        loop {
            let had_ws = self.skip_ws();
            match self.peek() {
                None | Some(',') => break,
                Some('>') => {
                    self.bump();
                    self.skip_ws();
                    combinators.push(Combinator::Child);
                }
                Some(c @ ('+' | '~')) => return Err(self.unsupported(format!("{c} combinator"))),
                Some(_) if had_ws => combinators.push(Combinator::Descendant),
                Some(c) => return Err(self.syntax(format!("unexpected {c:?}"))),
            }
            compounds.push(self.compound()?);
        }
        Ok(Complex {
            compounds,
            combinators,
        })
    }

    fn ident(&mut self, what: &str) -> Result<String, CssError> {
        let start = self.pos;
        while self.peek().is_some_and(is_ident_char) {
            self.bump();
        }
        if self.pos == start {
            return Err(self.syntax(format!("expected {what}")));
        }
        Ok(self.src[start..self.pos].to_owned())
    }

    fn compound(&mut self) -> Result<Compound, CssError> {
        let mut out = Compound::default();
        let start = self.pos;
        match self.peek() {
            Some('*') => {
                self.bump();
            }
            Some(c) if is_ident_char(c) => {
                out.tag = Some(self.ident("tag name")?.to_ascii_lowercase())
            }
            _ => {}
        }
        loop {
            match self.peek() {
                Some('#') => {
                    self.bump();
                    out.ids.push(self.ident("id")?);
                }
                Some('.') => {
                    self.bump();
                    out.classes.push(self.ident("class name")?);
                }
                Some('[') => {
                    self.bump();
                    out.attrs.push(self.attr()?);
                }
                Some(':') => {
                    let rest = &self.src[self.pos..];
                    let name: String = rest
                        .chars()
                        .take_while(|&c| c == ':' || is_ident_char(c))
                        .collect();
                    return Err(self.unsupported(name));
                }
                _ => break,
            }
        }
        if self.pos == start {
            return Err(self.syntax("expected a selector"));
        }
        Ok(out)
    }

    fn attr(&mut self) -> Result<AttrTest, CssError> {
        self.skip_ws();
        let name = self.ident("attribute name")?.to_ascii_lowercase();
        self.skip_ws();
        let value = match self.peek() {
            Some(']') => None,
            Some('=') => {
                self.bump();
                self.skip_ws();
                let v = match self.peek() {
                    Some(q @ ('"' | '\'')) => self.quoted(q)?,
                    _ => self.ident("attribute value")?,
                };
                self.skip_ws();
                Some(v)
            }
            Some(c @ ('~' | '|' | '^' | '$' | '*')) => {
                return Err(self.unsupported(format!("{c}= attribute operator")))
            }
            _ => return Err(self.syntax("expected ']' or '='")),
        };
        if self.bump() != Some(']') {
            return Err(self.syntax("expected ']'"));
        }
        Ok(AttrTest { name, value })
    }

    fn quoted(&mut self, quote: char) -> Result<String, CssError> {
        self.bump();
        let mut out = String::new();
        loop {
            match self.bump() {
                None => return Err(self.syntax("unterminated string")),
                Some('\\') => match self.bump() {
                    Some(c) => out.push(c),
                    None => return Err(self.syntax("unterminated escape")),
                },
                Some(c) if c == quote => return Ok(out),
                Some(c) => out.push(c),
            }
        }
    }
}

impl fmt::Display for Compound {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_universal() {
            return f.write_str("*");
        }
        if let Some(t) = &self.tag {
            f.write_str(t)?;
        }
        for id in &self.ids {
            write!(f, "#{id}")?;
        }
        for c in &self.classes {
            write!(f, ".{c}")?;
        }
        for a in &self.attrs {
            match &a.value {
                None => write!(f, "[{}]", a.name)?,
                Some(v) => {
                    write!(f, "[{}=\"", a.name)?;
                    for c in v.chars() {
                        if c == '"' || c == '\\' {
                            f.write_str("\\")?;
                        }
                        write!(f, "{c}")?;
                    }
                    f.write_str("\"]")?;
                }
            }
        }
        Ok(())
    }
}

impl fmt::Display for Complex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, c) in self.compounds.iter().enumerate() {
            if i > 0 {
                match self.combinators[i - 1] {
                    Combinator::Descendant => f.write_str(" ")?,
                    Combinator::Child => f.write_str(" > ")?,
                }
            }
            write!(f, "{c}")?;
        }
        Ok(())
    }
}

impl fmt::Display for CssSelector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, g) in self.groups.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{g}")?;
        }
        Ok(())
    }
}
