//! Line-oriented interaction scripts.
//!
//! ```text
//! # comments start with a hash
//! open sitemap
//! foreach `clickable() & leftof(image())` as link
//!   click @link
//!   first `headline()` as title
//!   back
//! end
//! type "Title" "${title}"
//! waitfor `text("Saved")` 5
//! table "Ticket" cell 1 "Mail" as mail
//! assert equals "${mail}" "c@x"
//! ```
//!
//! Arguments are double-quoted strings, backtick strings, `@variables` or
//! bare words. As the target of an action a double-quoted string is shortcut
//! text and a backtick string is a query; where only a query makes sense both
//! are parsed as queries. `${var}`, `${var.text}`, `${var.own}` and
//! `${var.id}` interpolate bound values. Inside query text `@var` stands for
//! the bound element and interpolated values are escaped as string literals.
//!
//! Statements: `open`, `query`, `first`, `click`, `doubleclick`,
//! `rightclick`, `hover`, `checktoggle`, `submit`, `type`, `append`,
//! `choose`, `unchoose`, `choosedate`, `keypress`, `keyhold`, `keyrelease`,
//! `drag <t> to <t>`, `dragby <t> <dx> <dy>`, `waitfor <q> <seconds>`,
//! `table <kw> cell <row> <col|header>`, `extractdate <q|@var>`,
//! `assert found|notfound <q>`, `assert count <q> <op> <n>`,
//! `assert equals <a> <b>`, `back`, `forward` and `foreach <q> as <var>`
//! closed by `end`. Statements producing a value accept a trailing
//! `as <var>`.

use std::collections::HashMap;
use std::fmt;
use std::time::Duration;

use serde::Serialize;
use serde_json::{json, Value};

use crate::datex::{extract_date, extract_date_element, ExtractedDate};
use crate::engine::QueryEngine;
use crate::interact::{Backend, Browser, InteractError, InteractionCommand, Payload, Target, Verb};
use crate::query::{parse_query, write_str_literal, Predicate, QueryError};
use crate::snapshot::Element;
use crate::tables::{get_table, TableError};
use crate::webdriver::id_selector;

/// Process exit status for a successful run.
pub const EXIT_OK: i32 = 0;
/// Empty result, missing element, timeout or failed assertion.
pub const EXIT_FAILED: i32 = 1;
/// Usage, parse or validation error.
pub const EXIT_INVALID: i32 = 2;

#[derive(Debug, Clone, PartialEq)]
enum Arg {
    Str(String),
    Query(String),
    Var(String),
    Word(String),
}

impl Arg {
    fn describe(&self) -> &'static str {
        match self {
            Arg::Str(_) => "string",
            Arg::Query(_) => "query",
            Arg::Var(_) => "variable",
            Arg::Word(_) => "word",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CountOp {
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
}

impl CountOp {
    fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "==" => CountOp::Eq,
            "!=" => CountOp::Ne,
            "<" => CountOp::Lt,
            "<=" => CountOp::Le,
            ">" => CountOp::Gt,
            ">=" => CountOp::Ge,
            _ => return None,
        })
    }

    fn holds(self, a: usize, b: usize) -> bool {
        match self {
            CountOp::Eq => a == b,
            CountOp::Ne => a != b,
            CountOp::Lt => a < b,
            CountOp::Le => a <= b,
            CountOp::Gt => a > b,
            CountOp::Ge => a >= b,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Column {
    Index(usize),
    Header(Arg),
}

#[derive(Debug, Clone, PartialEq)]
enum Assertion {
    Found(Arg),
    NotFound(Arg),
    Count(Arg, CountOp, usize),
    Equals(Arg, Arg),
}

#[derive(Debug, Clone, PartialEq)]
enum Stmt {
    Open(Arg),
    Query {
        query: Arg,
        bind: Option<String>,
    },
    First {
        query: Arg,
        bind: Option<String>,
    },
    Act {
        verb: Verb,
        target: Option<Arg>,
        payload: Option<Arg>,
        append: bool,
    },
    Drag {
        source: Arg,
        to: Arg,
    },
    DragBy {
        source: Arg,
        dx: f64,
        dy: f64,
    },
    WaitFor {
        query: Arg,
        seconds: f64,
        bind: Option<String>,
    },
    Table {
        keyword: Arg,
        row: usize,
        col: Column,
        bind: Option<String>,
    },
    ExtractDate {
        source: Arg,
        bind: Option<String>,
    },
    Assert(Assertion),
    Back,
    Forward,
    Foreach {
        query: Arg,
        var: String,
        body: Vec<Line>,
    },
}

#[derive(Debug, Clone, PartialEq)]
struct Line {
    number: usize,
    stmt: Stmt,
}

/// A parsed script.
#[derive(Debug, Clone, PartialEq)]
pub struct Script {
    lines: Vec<Line>,
}

#[derive(Debug, thiserror::Error)]
pub enum ScriptErrorKind {
    #[error("{0}")]
    Syntax(String),
    #[error("invalid query: {0}")]
    Query(#[from] QueryError),
    #[error("unknown variable {0:?}")]
    UnknownVariable(String),
    #[error("variable {0:?} does not hold an element")]
    NotAnElement(String),
    #[error(transparent)]
    Interact(#[from] InteractError),
    #[error(transparent)]
    Table(#[from] TableError),
    #[error("no result for {0}")]
    Empty(String),
    #[error("no date in {0:?}")]
    NoDate(String),
    #[error("assertion failed: {0}")]
    Assertion(String),
}

#[derive(Debug, thiserror::Error)]
#[error("line {line}: {kind}")]
pub struct ScriptError {
    pub line: usize,
    pub kind: ScriptErrorKind,
}

impl ScriptError {
    fn at(line: usize, kind: impl Into<ScriptErrorKind>) -> Self {
        ScriptError {
            line,
            kind: kind.into(),
        }
    }

    fn syntax(line: usize, msg: impl Into<String>) -> Self {
        ScriptError::at(line, ScriptErrorKind::Syntax(msg.into()))
    }

    /// Exit status: 1 for empty results, timeouts and failed assertions, 2
    /// for everything else.
    pub fn exit_code(&self) -> i32 {
        match &self.kind {
            ScriptErrorKind::Empty(_)
            | ScriptErrorKind::NoDate(_)
            | ScriptErrorKind::Assertion(_)
            | ScriptErrorKind::Table(TableError::NotFound { .. })
            | ScriptErrorKind::Interact(
                InteractError::ElementNotFound { .. } | InteractError::Timeout { .. },
            ) => EXIT_FAILED,
            _ => EXIT_INVALID,
        }
    }
}

fn lex(line: &str, number: usize) -> Result<Vec<Arg>, ScriptError> {
    let mut out = Vec::new();
    let mut chars = line.char_indices().peekable();
    while let Some(&(_, c)) = chars.peek() {
        if c.is_whitespace() {
            chars.next();
            continue;
        }
        if c == '#' {
            break;
        }
        chars.next();
        match c {
            '"' => {
                let mut s = String::new();
                loop {
                    match chars.next() {
                        None => return Err(ScriptError::syntax(number, "unterminated string")),
                        Some((_, '"')) => break,
                        Some((_, '\\')) => match chars.next() {
                            Some((_, 'n')) => s.push('\n'),
                            Some((_, 't')) => s.push('\t'),
                            Some((_, e @ ('"' | '\\' | '$'))) => {
                                if e == '$' {
                                    s.push('\\');
                                }
                                s.push(e);
                            }
                            Some((_, e)) => {
                                return Err(ScriptError::syntax(
                                    number,
                                    format!("unknown escape \\{e}"),
                                ))
                            }
                            None => return Err(ScriptError::syntax(number, "unterminated string")),
                        },
                        Some((_, ch)) => s.push(ch),
                    }
                }
                out.push(Arg::Str(s));
            }
            '`' => {
                let mut s = String::new();
                loop {
                    match chars.next() {
                        None => {
                            return Err(ScriptError::syntax(number, "unterminated backtick query"))
                        }
                        Some((_, '`')) => break,
                        Some((_, ch)) => s.push(ch),
                    }
                }
                out.push(Arg::Query(s));
            }
            '@' => {
                let mut name = String::new();
                while let Some(&(_, ch)) = chars.peek() {
                    if ch.is_alphanumeric() || ch == '_' {
                        name.push(ch);
                        chars.next();
                    } else {
                        break;
                    }
                }
                if name.is_empty() {
                    return Err(ScriptError::syntax(
                        number,
                        "`@` must be followed by a variable name",
                    ));
                }
                out.push(Arg::Var(name));
            }
            _ => {
                let mut word = String::from(c);
                while let Some(&(_, ch)) = chars.peek() {
                    if ch.is_whitespace() {
                        break;
                    }
                    word.push(ch);
                    chars.next();
                }
                out.push(Arg::Word(word));
            }
        }
    }
    Ok(out)
}

struct Cursor {
    args: std::vec::IntoIter<Arg>,
    line: usize,
    keyword: String,
}

impl Cursor {
    fn next(&mut self, what: &str) -> Result<Arg, ScriptError> {
        self.args.next().ok_or_else(|| {
            ScriptError::syntax(self.line, format!("{} expects {what}", self.keyword))
        })
    }

    fn text(&mut self, what: &str) -> Result<Arg, ScriptError> {
        match self.next(what)? {
            a @ (Arg::Str(_) | Arg::Query(_)) => Ok(a),
            other => Err(ScriptError::syntax(
                self.line,
                format!(
                    "{} expects {what}, found a {}",
                    self.keyword,
                    other.describe()
                ),
            )),
        }
    }

    fn target(&mut self) -> Result<Arg, ScriptError> {
        match self.next("a target")? {
            Arg::Word(w) => Err(ScriptError::syntax(
                self.line,
                format!(
                    "{} expects a quoted target, @variable or `query`, found {w:?}",
                    self.keyword
                ),
            )),
            a => Ok(a),
        }
    }

    fn word(&mut self, what: &str) -> Result<String, ScriptError> {
        match self.next(what)? {
            Arg::Word(w) => Ok(w),
            other => Err(ScriptError::syntax(
                self.line,
                format!(
                    "{} expects {what}, found a {}",
                    self.keyword,
                    other.describe()
                ),
            )),
        }
    }

    fn number<T: std::str::FromStr>(&mut self, what: &str) -> Result<T, ScriptError> {
        let w = self.word(what)?;
        w.parse().map_err(|_| {
            ScriptError::syntax(
                self.line,
                format!("{} expects {what}, found {w:?}", self.keyword),
            )
        })
    }

    fn bind(&mut self) -> Result<Option<String>, ScriptError> {
        match self.args.next() {
            None => Ok(None),
            Some(Arg::Word(w)) if w == "as" => {
                let name = self.word("a variable name after `as`")?;
                if !name.chars().all(|c| c.is_alphanumeric() || c == '_') {
                    return Err(ScriptError::syntax(
                        self.line,
                        format!("invalid variable name {name:?}"),
                    ));
                }
                Ok(Some(name))
            }
            Some(other) => Err(ScriptError::syntax(
                self.line,
                format!("unexpected {} after {}", other.describe(), self.keyword),
            )),
        }
    }

    fn done(mut self) -> Result<(), ScriptError> {
        match self.args.next() {
            None => Ok(()),
            Some(a) => Err(ScriptError::syntax(
                self.line,
                format!("unexpected {} after {}", a.describe(), self.keyword),
            )),
        }
    }
}

fn parse_stmt(keyword: &str, mut c: Cursor) -> Result<Stmt, ScriptError> {
    let act = |verb, target, payload| Stmt::Act {
        verb,
        target,
        payload,
        append: false,
    };
    let stmt = match keyword {
        "open" => {
            let a = c.next("a page name or URL")?;
            c.done()?;
            return Ok(Stmt::Open(a));
        }
        "query" | "first" => {
            let query = c.text("a query")?;
            let bind = c.bind()?;
            return Ok(if keyword == "query" {
                Stmt::Query { query, bind }
            } else {
                Stmt::First { query, bind }
            });
        }
        "click" | "doubleclick" | "rightclick" | "hover" | "checktoggle" | "submit" => {
            let verb = match keyword {
                "click" => Verb::Click,
                "doubleclick" => Verb::DoubleClick,
                "rightclick" => Verb::RightClick,
                "hover" => Verb::Hover,
                "checktoggle" => Verb::CheckToggle,
                _ => Verb::Submit,
            };
            act(verb, Some(c.target()?), None)
        }
        "type" | "append" | "choose" | "unchoose" | "choosedate" => {
            let verb = match keyword {
                "type" | "append" => Verb::Type,
                "choose" => Verb::Choose,
                "unchoose" => Verb::Unchoose,
                _ => Verb::ChooseDate,
            };
            let target = c.target()?;
            let payload = c.text("a value")?;
            Stmt::Act {
                verb,
                target: Some(target),
                payload: Some(payload),
                append: keyword == "append",
            }
        }
        "keypress" => {
            let first = c.target()?;
            match c.args.next() {
                None => act(Verb::KeyPress, None, Some(first)),
                Some(key @ (Arg::Str(_) | Arg::Query(_))) => {
                    act(Verb::KeyPress, Some(first), Some(key))
                }
                Some(other) => {
                    return Err(ScriptError::syntax(
                        c.line,
                        format!("keypress expects a key, found a {}", other.describe()),
                    ))
                }
            }
        }
        "keyhold" | "keyrelease" => {
            let verb = if keyword == "keyhold" {
                Verb::KeyHold
            } else {
                Verb::KeyRelease
            };
            act(verb, None, Some(c.text("a key")?))
        }
        "drag" => {
            let source = c.target()?;
            if c.word("`to`")? != "to" {
                return Err(ScriptError::syntax(
                    c.line,
                    "drag expects `to` between source and target",
                ));
            }
            Stmt::Drag {
                source,
                to: c.target()?,
            }
        }
        "dragby" => Stmt::DragBy {
            source: c.target()?,
            dx: c.number("a horizontal offset")?,
            dy: c.number("a vertical offset")?,
        },
        "waitfor" => {
            let query = c.text("a query")?;
            let seconds: f64 = c.number("a timeout in seconds")?;
            if !(seconds.is_finite() && seconds > 0.0) {
                return Err(ScriptError::syntax(
                    c.line,
                    "waitfor timeout must be positive",
                ));
            }
            let bind = c.bind()?;
            return Ok(Stmt::WaitFor {
                query,
                seconds,
                bind,
            });
        }
        "table" => {
            let keyword = c.text("a table keyword")?;
            if c.word("`cell`")? != "cell" {
                return Err(ScriptError::syntax(
                    c.line,
                    "table expects `cell <row> <column>`",
                ));
            }
            let row = c.number("a row index")?;
            let col = match c.next("a column index or header")? {
                Arg::Word(w) => Column::Index(w.parse().map_err(|_| {
                    ScriptError::syntax(c.line, format!("invalid column index {w:?}"))
                })?),
                a @ (Arg::Str(_) | Arg::Query(_)) => Column::Header(a),
                Arg::Var(_) => {
                    return Err(ScriptError::syntax(
                        c.line,
                        "table column must be an index or header",
                    ))
                }
            };
            let bind = c.bind()?;
            return Ok(Stmt::Table {
                keyword,
                row,
                col,
                bind,
            });
        }
        "extractdate" => {
            let source = c.next("a query or @variable")?;
            if matches!(source, Arg::Word(_)) {
                return Err(ScriptError::syntax(
                    c.line,
                    "extractdate expects a query or @variable",
                ));
            }
            let bind = c.bind()?;
            return Ok(Stmt::ExtractDate { source, bind });
        }
        "assert" => {
            let kind = c.word("found, notfound, count or equals")?;
            let a = match kind.as_str() {
                "found" => Assertion::Found(c.text("a query")?),
                "notfound" => Assertion::NotFound(c.text("a query")?),
                "count" => {
                    let q = c.text("a query")?;
                    let op = c.word("a comparison")?;
                    let op = CountOp::parse(&op).ok_or_else(|| {
                        ScriptError::syntax(c.line, format!("unknown comparison {op:?}"))
                    })?;
                    Assertion::Count(q, op, c.number("a count")?)
                }
                "equals" => Assertion::Equals(c.text("a value")?, c.text("a value")?),
                other => {
                    return Err(ScriptError::syntax(
                        c.line,
                        format!("unknown assertion {other:?}"),
                    ))
                }
            };
            Stmt::Assert(a)
        }
        "back" => Stmt::Back,
        "forward" => Stmt::Forward,
        other => {
            return Err(ScriptError::syntax(
                c.line,
                format!("unknown statement {other:?}"),
            ))
        }
    };
    c.done()?;
    Ok(stmt)
}

/// Line, query and variable of an open `foreach` block.
type LoopHead = (usize, Arg, String);

impl Script {
    /// Parses a script. The first statement must be `open`.
    pub fn parse(text: &str) -> Result<Script, ScriptError> {
        let mut stack: Vec<(Vec<Line>, Option<LoopHead>)> = vec![(Vec::new(), None)];
        for (i, raw) in text.lines().enumerate() {
            let number = i + 1;
            let mut args = lex(raw, number)?.into_iter();
            let keyword = match args.next() {
                None => continue,
                Some(Arg::Word(w)) => w.to_ascii_lowercase(),
                Some(other) => {
                    return Err(ScriptError::syntax(
                        number,
                        format!("expected a statement, found a {}", other.describe()),
                    ))
                }
            };
            let mut c = Cursor {
                args,
                line: number,
                keyword: keyword.clone(),
            };
            match keyword.as_str() {
                "foreach" => {
                    let query = c.text("a query")?;
                    let var = match c.bind()? {
                        Some(v) => v,
                        None => {
                            return Err(ScriptError::syntax(number, "foreach expects `as <var>`"))
                        }
                    };
                    stack.push((Vec::new(), Some((number, query, var))));
                }
                "end" => {
                    c.done()?;
                    let (body, head) = stack.pop().expect("stack holds the top level");
                    let Some((start, query, var)) = head else {
                        return Err(ScriptError::syntax(number, "`end` without `foreach`"));
                    };
                    stack
                        .last_mut()
                        .expect("foreach is nested in a block")
                        .0
                        .push(Line {
                            number: start,
                            stmt: Stmt::Foreach { query, var, body },
                        });
                }
                _ => {
                    let stmt = parse_stmt(&keyword, c)?;
                    stack
                        .last_mut()
                        .expect("nonempty")
                        .0
                        .push(Line { number, stmt });
                }
            }
        }
        let (lines, head) = stack.pop().expect("nonempty");
        if let Some((start, ..)) = head {
            return Err(ScriptError::syntax(start, "foreach without `end`"));
        }
        if !stack.is_empty() {
            let (_, head) = stack.pop().expect("nonempty");
            let start = head.map_or(0, |h| h.0);
            return Err(ScriptError::syntax(start, "foreach without `end`"));
        }
        match lines.first() {
            Some(Line {
                stmt: Stmt::Open(_),
                ..
            }) => Ok(Script { lines }),
            Some(l) => Err(ScriptError::syntax(
                l.number,
                "a script must start with `open`",
            )),
            None => Err(ScriptError::syntax(0, "empty script")),
        }
    }

    /// Number of top-level statements.
    pub fn len(&self) -> usize {
        self.lines.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lines.is_empty()
    }
}

/// A bound script variable.
#[derive(Debug, Clone, PartialEq)]
pub enum Binding {
    Element(Box<Element>),
    Elements(Vec<Element>),
    Text(String),
    Date(ExtractedDate),
}

impl Binding {
    fn field(&self, field: Option<&str>) -> Option<String> {
        match (self, field) {
            (Binding::Element(e), None | Some("text")) => Some(e.visible_text.clone()),
            (Binding::Element(e), Some("own")) => Some(e.own_text.clone()),
            (Binding::Element(e), Some("id")) => Some(e.id.clone()),
            (Binding::Elements(v), None | Some("count")) => Some(v.len().to_string()),
            (Binding::Elements(v), Some("text")) => v.first().map(|e| e.visible_text.clone()),
            (Binding::Text(t), None | Some("text")) => Some(t.clone()),
            (Binding::Date(d), None | Some("text")) => Some(d.iso()),
            (Binding::Date(d), Some("date")) => Some(d.date.format("%Y-%m-%d").to_string()),
            _ => None,
        }
    }
}

/// One line of script output.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Output {
    pub line: usize,
    pub statement: &'static str,
    pub value: Value,
}

/// Executes scripts against a browser, collecting variables.
pub struct Runner<'a, B: Backend, E: QueryEngine> {
    browser: &'a mut Browser<B, E>,
    vars: HashMap<String, Binding>,
    sink: &'a mut dyn FnMut(Output),
}

impl<B: Backend, E: QueryEngine> fmt::Debug for Runner<'_, B, E> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Runner").field("vars", &self.vars).finish()
    }
}

/// Runs `script`, passing each produced value to `sink`. Stops at the first
/// failing statement.
pub fn run<B: Backend, E: QueryEngine>(
    browser: &mut Browser<B, E>,
    script: &Script,
    sink: &mut dyn FnMut(Output),
) -> Result<HashMap<String, Binding>, ScriptError> {
    let mut runner = Runner {
        browser,
        vars: HashMap::new(),
        sink,
    };
    runner.block(&script.lines)?;
    Ok(runner.vars)
}

fn element_json(e: &Element) -> Value {
    json!({ "id": e.id, "tag": e.tag, "text": e.visible_text })
}

impl<B: Backend, E: QueryEngine> Runner<'_, B, E> {
    fn block(&mut self, lines: &[Line]) -> Result<(), ScriptError> {
        for l in lines {
            self.stmt(l).map_err(|kind| match kind {
                Nested(e) => e,
                Here(kind) => ScriptError::at(l.number, kind),
            })?;
        }
        Ok(())
    }

    fn emit(&mut self, line: usize, statement: &'static str, value: Value) {
        (self.sink)(Output {
            line,
            statement,
            value,
        });
    }

    fn bind(&mut self, name: &Option<String>, value: Binding) {
        if let Some(n) = name {
            self.vars.insert(n.clone(), value);
        }
    }

    fn lookup(&self, name: &str) -> Result<&Binding, ScriptErrorKind> {
        self.vars
            .get(name)
            .ok_or_else(|| ScriptErrorKind::UnknownVariable(name.to_owned()))
    }

    fn element_var(&self, name: &str) -> Result<&Element, ScriptErrorKind> {
        match self.lookup(name)? {
            Binding::Element(e) => Ok(e),
            _ => Err(ScriptErrorKind::NotAnElement(name.to_owned())),
        }
    }

    /// Expands `${name[.field]}`; values are escaped as query string literal
    /// content when `quote` is set.
    fn interpolate(&self, s: &str, quote: bool) -> Result<String, ScriptErrorKind> {
        let mut out = String::with_capacity(s.len());
        let mut rest = s;
        while let Some(i) = rest.find("${") {
            if i > 0 && rest.as_bytes()[i - 1] == b'\\' {
                out.push_str(&rest[..i - 1]);
                out.push_str("${");
                rest = &rest[i + 2..];
                continue;
            }
            out.push_str(&rest[..i]);
            let end = rest[i..]
                .find('}')
                .ok_or_else(|| ScriptErrorKind::Syntax("unterminated ${".into()))?;
            let inner = &rest[i + 2..i + end];
            let (name, field) = match inner.split_once('.') {
                Some((n, f)) => (n, Some(f)),
                None => (inner, None),
            };
            let value = self.lookup(name)?.field(field).ok_or_else(|| {
                ScriptErrorKind::Syntax(format!("variable {name:?} has no field {field:?}"))
            })?;
            if quote {
                let mut lit = String::new();
                write_str_literal(&mut lit, &value).expect("writing to a string");
                out.push_str(&lit[1..lit.len() - 1]);
            } else {
                out.push_str(&value);
            }
            rest = &rest[i + end + 1..];
        }
        out.push_str(rest);
        Ok(out)
    }

    /// Replaces `@var` outside string literals with a selector for the bound
    /// element.
    fn expand_elements(&self, q: &str) -> Result<String, ScriptErrorKind> {
        let mut out = String::with_capacity(q.len());
        let mut chars = q.chars().peekable();
        let mut in_str = false;
        while let Some(c) = chars.next() {
            if in_str {
                out.push(c);
                if c == '\\' {
                    if let Some(n) = chars.next() {
                        out.push(n);
                    }
                } else if c == '"' {
                    in_str = false;
                }
                continue;
            }
            match c {
                '"' => {
                    in_str = true;
                    out.push(c);
                }
                '@' => {
                    let mut name = String::new();
                    while let Some(&n) = chars.peek() {
                        if n.is_alphanumeric() || n == '_' {
                            name.push(n);
                            chars.next();
                        } else {
                            break;
                        }
                    }
                    let el = self.element_var(&name)?;
                    out.push_str("css(");
                    write_str_literal(&mut out, &id_selector(&el.id)).expect("writing to a string");
                    out.push(')');
                }
                _ => out.push(c),
            }
        }
        Ok(out)
    }

    fn text(&self, a: &Arg) -> Result<String, ScriptErrorKind> {
        match a {
            Arg::Str(s) | Arg::Query(s) => self.interpolate(s, false),
            Arg::Word(w) => Ok(w.clone()),
            Arg::Var(v) => self
                .lookup(v)?
                .field(None)
                .ok_or_else(|| ScriptErrorKind::NotAnElement(v.clone())),
        }
    }

    fn query(&self, a: &Arg) -> Result<Predicate, ScriptErrorKind> {
        let raw = match a {
            Arg::Str(s) | Arg::Query(s) => self.interpolate(s, true)?,
            other => {
                return Err(ScriptErrorKind::Syntax(format!(
                    "expected a query, found a {}",
                    other.describe()
                )))
            }
        };
        Ok(parse_query(&self.expand_elements(&raw)?)?)
    }

    fn target(&self, a: &Arg) -> Result<Target, ScriptErrorKind> {
        Ok(match a {
            Arg::Str(_) | Arg::Word(_) => Target::Text(self.text(a)?),
            Arg::Query(_) => Target::Query(self.query(a)?),
            Arg::Var(v) => Target::Element(self.element_var(v)?.id.clone()),
        })
    }

    fn payload(&self, verb: Verb, a: &Arg, append: bool) -> Result<Payload, ScriptErrorKind> {
        let s = self.text(a)?;
        Ok(match verb {
            Verb::Type => Payload::Text { text: s, append },
            Verb::Choose | Verb::Unchoose => Payload::Option { option: s },
            Verb::ChooseDate => {
                let d = extract_date(&s).ok_or_else(|| ScriptErrorKind::NoDate(s.clone()))?;
                Payload::Date { date: d.date }
            }
            _ => Payload::Key { key: s },
        })
    }

    fn results(&mut self, q: &Predicate) -> Result<Vec<(Element, f64)>, ScriptErrorKind> {
        let snap = self.browser.snapshot()?;
        let rs = self.browser.query(q)?;
        Ok(rs
            .iter()
            .map(|s| (s.element(&snap).clone(), s.weight))
            .collect())
    }

    fn stmt(&mut self, l: &Line) -> Result<(), Failure> {
        let n = l.number;
        match &l.stmt {
            Stmt::Open(a) => {
                let loc = self.text(a)?;
                self.browser.open(&loc).map_err(ScriptErrorKind::from)?;
            }
            Stmt::Query { query, bind } => {
                let q = self.query(query)?;
                let hits = self.results(&q)?;
                let value = hits
                    .iter()
                    .map(|(e, w)| json!({ "id": e.id, "tag": e.tag, "text": e.visible_text, "weight": w }))
                    .collect();
                self.emit(n, "query", Value::Array(value));
                self.bind(
                    bind,
                    Binding::Elements(hits.into_iter().map(|(e, _)| e).collect()),
                );
            }
            Stmt::First { query, bind } => {
                let q = self.query(query)?;
                let el = self
                    .browser
                    .find_first(&q)
                    .map_err(ScriptErrorKind::from)?
                    .ok_or_else(|| ScriptErrorKind::Empty(q.to_string()))?;
                self.emit(n, "first", element_json(&el));
                self.bind(bind, Binding::Element(Box::new(el)));
            }
            Stmt::Act {
                verb,
                target,
                payload,
                append,
            } => {
                let target = match target {
                    Some(t) => self.target(t)?,
                    None => Target::Page,
                };
                let payload = match payload {
                    Some(p) => Some(self.payload(*verb, p, *append)?),
                    None => None,
                };
                let cmd = InteractionCommand::new(*verb, target, payload)
                    .map_err(ScriptErrorKind::from)?;
                self.browser.execute(&cmd).map_err(ScriptErrorKind::from)?;
            }
            Stmt::Drag { source, to } => {
                let source = self.target(source)?;
                let to = match self.target(to)? {
                    Target::Element(id) => id,
                    t => {
                        let pred = Browser::<B, E>::shortcut_predicate(Verb::Drag, &t)
                            .expect("text or query target");
                        let el = self
                            .browser
                            .find_first(&pred)
                            .map_err(ScriptErrorKind::from)?
                            .ok_or_else(|| ScriptErrorKind::Empty(pred.to_string()))?;
                        el.id
                    }
                };
                let cmd = InteractionCommand::new(
                    Verb::Drag,
                    source,
                    Some(Payload::DropOn { target: to }),
                )
                .map_err(ScriptErrorKind::from)?;
                self.browser.execute(&cmd).map_err(ScriptErrorKind::from)?;
            }
            Stmt::DragBy { source, dx, dy } => {
                let source = self.target(source)?;
                let cmd = InteractionCommand::new(
                    Verb::DragBy,
                    source,
                    Some(Payload::Offset { dx: *dx, dy: *dy }),
                )
                .map_err(ScriptErrorKind::from)?;
                self.browser.execute(&cmd).map_err(ScriptErrorKind::from)?;
            }
            Stmt::WaitFor {
                query,
                seconds,
                bind,
            } => {
                let q = self.query(query)?;
                let w = self
                    .browser
                    .wait_for(&q, Duration::from_secs_f64(*seconds))
                    .map_err(ScriptErrorKind::from)?;
                self.emit(
                    n,
                    "waitfor",
                    json!({ "element": element_json(&w.element), "polls": w.polls }),
                );
                self.bind(bind, Binding::Element(Box::new(w.element)));
            }
            Stmt::Table {
                keyword,
                row,
                col,
                bind,
            } => {
                let kw = self.text(keyword)?;
                let snap = self.browser.snapshot().map_err(ScriptErrorKind::from)?;
                let table = get_table(&snap, &kw).map_err(ScriptErrorKind::from)?;
                let cell = match col {
                    Column::Index(c) => table.cell(*row, *c),
                    Column::Header(h) => table.cell_by_header(*row, &self.text(h)?),
                }
                .map_err(ScriptErrorKind::from)?;
                self.emit(
                    n,
                    "table",
                    json!({ "row": cell.row, "col": cell.col, "id": cell.id(), "text": cell.text() }),
                );
                let value = match cell.element {
                    Some(e) => Binding::Element(Box::new(e.clone())),
                    None => Binding::Text(String::new()),
                };
                self.bind(bind, value);
            }
            Stmt::ExtractDate { source, bind } => {
                let (text, found) = match source {
                    Arg::Var(v) => match self.lookup(v).map_err(Failure::from)? {
                        Binding::Element(e) => (e.visible_text.clone(), extract_date_element(e)),
                        other => {
                            let t = other.field(None).unwrap_or_default();
                            let d = extract_date(&t);
                            (t, d)
                        }
                    },
                    q => {
                        let q = self.query(q)?;
                        let el = self
                            .browser
                            .find_first(&q)
                            .map_err(ScriptErrorKind::from)?
                            .ok_or_else(|| ScriptErrorKind::Empty(q.to_string()))?;
                        let d = extract_date_element(&el);
                        (el.visible_text, d)
                    }
                };
                let d = found.ok_or(ScriptErrorKind::NoDate(text))?;
                self.emit(
                    n,
                    "extractdate",
                    serde_json::to_value(&d).expect("dates serialize"),
                );
                self.bind(bind, Binding::Date(d));
            }
            Stmt::Assert(a) => {
                let ok = match a {
                    Assertion::Found(q) | Assertion::NotFound(q) => {
                        let pred = self.query(q)?;
                        let found = !self.results(&pred)?.is_empty();
                        if found == matches!(a, Assertion::Found(_)) {
                            Ok(())
                        } else {
                            Err(format!(
                                "{} {pred}",
                                if found { "found" } else { "did not find" }
                            ))
                        }
                    }
                    Assertion::Count(q, op, want) => {
                        let pred = self.query(q)?;
                        let got = self.results(&pred)?.len();
                        if op.holds(got, *want) {
                            Ok(())
                        } else {
                            Err(format!("{pred} has {got} results"))
                        }
                    }
                    Assertion::Equals(x, y) => {
                        let (x, y) = (self.text(x)?, self.text(y)?);
                        if x == y {
                            Ok(())
                        } else {
                            Err(format!("{x:?} != {y:?}"))
                        }
                    }
                };
                ok.map_err(ScriptErrorKind::Assertion)?;
            }
            Stmt::Back => self.browser.back().map_err(ScriptErrorKind::from)?,
            Stmt::Forward => self.browser.forward().map_err(ScriptErrorKind::from)?,
            Stmt::Foreach { query, var, body } => {
                let q = self.query(query)?;
                let items: Vec<Element> = self.results(&q)?.into_iter().map(|(e, _)| e).collect();
                let saved = self.vars.remove(var);
                for el in items {
                    self.vars
                        .insert(var.clone(), Binding::Element(Box::new(el)));
                    self.block(body).map_err(Nested)?;
                }
                self.vars.remove(var);
                if let Some(v) = saved {
                    self.vars.insert(var.clone(), v);
                }
            }
        }
        Ok(())
    }
}

/// Error from a statement: either raised by it, or by a statement nested in
/// its body, which already carries a line number.
enum Failure {
    Here(ScriptErrorKind),
    Nested(ScriptError),
}

use Failure::{Here, Nested};

impl<T: Into<ScriptErrorKind>> From<T> for Failure {
    fn from(e: T) -> Self {
        Here(e.into())
    }
}
