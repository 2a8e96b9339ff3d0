use super::{
    ColorSpec, CssSelector, Direction, DirectionMode, ElementKind, Level, Predicate, QueryError,
};
use crate::color;

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Str(String),
    Number(f64),
    Hex(String),
    LParen,
    RParen,
    Comma,
    Amp,
    Pipe,
    Bang,
    Eof,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("identifier {s:?}"),
            Tok::Str(_) => "string".into(),
            Tok::Number(n) => format!("number {n}"),
            Tok::Hex(h) => format!("color #{h}"),
            Tok::LParen => "'('".into(),
            Tok::RParen => "')'".into(),
            Tok::Comma => "','".into(),
            Tok::Amp => "'&'".into(),
            Tok::Pipe => "'|'".into(),
            Tok::Bang => "'!'".into(),
            Tok::Eof => "end of input".into(),
        }
    }
}

fn lex(src: &str) -> Result<Vec<(Tok, usize)>, QueryError> {
    let mut out = Vec::new();
    let mut chars = src.char_indices().peekable();
    while let Some(&(i, c)) = chars.peek() {
        match c {
            c if c.is_whitespace() => {
                chars.next();
            }
            '(' | ')' | ',' | '&' | '|' | '!' => {
                chars.next();
                let t = match c {
                    '(' => Tok::LParen,
                    ')' => Tok::RParen,
                    ',' => Tok::Comma,
                    '&' => Tok::Amp,
                    '|' => Tok::Pipe,
                    _ => Tok::Bang,
                };
                out.push((t, i));
            }
            '"' => {
                chars.next();
                let mut s = String::new();
                loop {
                    match chars.next() {
                        None => {
                            return Err(QueryError::Syntax {
                                offset: src.len(),
                                expected: vec!["'\"'".into()],
                                found: "end of input".into(),
                            })
                        }
                        Some((_, '"')) => break,
                        Some((j, '\\')) => {
                            let esc = match chars.next() {
                                Some((_, '"')) => '"',
                                Some((_, '\\')) => '\\',
                                Some((_, 'n')) => '\n',
                                Some((_, 't')) => '\t',
                                Some((_, 'r')) => '\r',
                                Some((_, other)) => {
                                    return Err(QueryError::Syntax {
                                        offset: j,
                                        expected: vec!["escape sequence".into()],
                                        found: format!("'\\{other}'"),
                                    })
                                }
                                None => {
                                    return Err(QueryError::Syntax {
                                        offset: src.len(),
                                        expected: vec!["escape sequence".into()],
                                        found: "end of input".into(),
                                    })
                                }
                            };
                            s.push(esc);
                        }
                        Some((_, c)) => s.push(c),
                    }
                }
                out.push((Tok::Str(s), i));
            }
            '#' => {
                chars.next();
                let mut h = String::new();
                while let Some(&(_, c)) = chars.peek() {
                    if c.is_ascii_hexdigit() {
                        h.push(c);
                        chars.next();
                    } else {
                        break;
                    }
                }
                out.push((Tok::Hex(h), i));
            }
            c if c.is_ascii_digit() => {
                let mut end = i;
                let mut seen_dot = false;
                while let Some(&(j, c)) = chars.peek() {
                    if c.is_ascii_digit() || (c == '.' && !seen_dot) {
                        seen_dot |= c == '.';
                        end = j + 1;
                        chars.next();
                    } else {
                        break;
                    }
                }
                let text = &src[i..end];
                let n: f64 = text.parse().map_err(|_| QueryError::Syntax {
                    offset: i,
                    expected: vec!["number".into()],
                    found: text.into(),
                })?;
                out.push((Tok::Number(n), i));
            }
            c if c.is_alphabetic() || c == '_' => {
                let mut end = i;
                while let Some(&(j, c)) = chars.peek() {
                    if c.is_alphanumeric() || c == '_' || c == '-' {
                        end = j + c.len_utf8();
                        chars.next();
                    } else {
                        break;
                    }
                }
                out.push((Tok::Ident(src[i..end].to_owned()), i));
            }
            other => {
                return Err(QueryError::Syntax {
                    offset: i,
                    expected: vec!["predicate".into(), "'!'".into(), "'('".into()],
                    found: format!("{other:?}"),
                })
            }
        }
    }
    out.push((Tok::Eof, src.len()));
    Ok(out)
}

/// Parses the textual query language into a predicate AST.
pub fn parse_query(input: &str) -> Result<Predicate, QueryError> {
    let toks = lex(input)?;
    let mut p = Parser { toks, pos: 0 };
    let q = p.or()?;
    p.expect_eof()?;
    Ok(q)
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    pos: usize,
}

const PRIMARY: &[&str] = &["predicate", "'!'", "'('"];

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn peek_at(&self, k: usize) -> &Tok {
        &self.toks[(self.pos + k).min(self.toks.len() - 1)].0
    }

    fn offset(&self) -> usize {
        self.toks[self.pos].1
    }

    fn next(&mut self) -> (Tok, usize) {
        let t = self.toks[self.pos].clone();
        if self.pos < self.toks.len() - 1 {
            self.pos += 1;
        }
        t
    }

    fn error(&self, expected: &[&str]) -> QueryError {
        QueryError::Syntax {
            offset: self.offset(),
            expected: expected.iter().map(|s| s.to_string()).collect(),
            found: self.peek().describe(),
        }
    }

    fn eat(&mut self, tok: &Tok, expected: &[&str]) -> Result<(), QueryError> {
        if self.peek() == tok {
            self.next();
            Ok(())
        } else {
            Err(self.error(expected))
        }
    }

    fn expect_eof(&self) -> Result<(), QueryError> {
        if *self.peek() == Tok::Eof {
            Ok(())
        } else {
            Err(self.error(&["'&'", "','", "'|'", "end of input"]))
        }
    }

    fn or(&mut self) -> Result<Predicate, QueryError> {
        let mut items = vec![self.and()?];
        while *self.peek() == Tok::Pipe {
            self.next();
            items.push(self.and()?);
        }
        Ok(if items.len() == 1 {
            items.pop().expect("one")
        } else {
            Predicate::Or(items)
        })
    }

    fn and(&mut self) -> Result<Predicate, QueryError> {
        let mut items = vec![self.unary()?];
        loop {
            match self.peek() {
                Tok::Amp => {}
                // `, NUMBER` closes a direction argument list
                Tok::Comma if !matches!(self.peek_at(1), Tok::Number(_)) => {}
                _ => break,
            }
            self.next();
            items.push(self.unary()?);
        }
        Ok(if items.len() == 1 {
            items.pop().expect("one")
        } else {
            Predicate::And(items)
        })
    }

    fn unary(&mut self) -> Result<Predicate, QueryError> {
        if *self.peek() == Tok::Bang {
            self.next();
            return Ok(Predicate::Not(Box::new(self.unary()?)));
        }
        self.prim()
    }

    fn string(&mut self) -> Result<String, QueryError> {
        match self.peek().clone() {
            Tok::Str(s) => {
                self.next();
                Ok(s)
            }
            _ => Err(self.error(&["string"])),
        }
    }

    fn prim(&mut self) -> Result<Predicate, QueryError> {
        let offset = self.offset();
        let name = match self.peek().clone() {
            Tok::LParen => {
                self.next();
                let q = self.or()?;
                self.eat(&Tok::RParen, &["')'"])?;
                return Ok(q);
            }
            Tok::Ident(name) => {
                self.next();
                name
            }
            _ => return Err(self.error(PRIMARY)),
        };
        let lower = name.to_ascii_lowercase();

        if let Some(kind) = ElementKind::from_keyword(&lower) {
            let mut text = None;
            if *self.peek() == Tok::LParen {
                self.next();
                if let Tok::Str(s) = self.peek().clone() {
                    self.next();
                    text = Some(s);
                }
                self.eat(&Tok::RParen, &["string", "')'"])?;
            }
            return Ok(Predicate::Kind { kind, text });
        }
        if let Some((dir, mode)) = direction_keyword(&lower) {
            self.eat(&Tok::LParen, &["'('"])?;
            let inner = self.or()?;
            let mut max_distance = None;
            if *self.peek() == Tok::Comma {
                self.next();
                match self.peek().clone() {
                    Tok::Number(n) => {
                        self.next();
                        max_distance = Some(n);
                    }
                    _ => return Err(self.error(&["number"])),
                }
            }
            self.eat(&Tok::RParen, &["','", "')'"])?;
            return Ok(Predicate::Direction {
                dir,
                mode,
                inner: Box::new(inner),
                max_distance,
            });
        }
        match lower.as_str() {
            "contains" => {
                self.eat(&Tok::LParen, &["'('"])?;
                let s = self.string()?;
                self.eat(&Tok::RParen, &["')'"])?;
                Ok(Predicate::Contains(s))
            }
            "css" | "selector" => {
                self.eat(&Tok::LParen, &["'('"])?;
                let at = self.offset();
                let s = self.string()?;
                self.eat(&Tok::RParen, &["')'"])?;
                // +1 skips the opening quote
                let sel = CssSelector::parse(&s).map_err(|source| QueryError::Css {
                    offset: at + 1 + source.offset(),
                    source,
                })?;
                Ok(Predicate::Css(sel))
            }
            "color" => {
                self.eat(&Tok::LParen, &["'('"])?;
                let at = self.offset();
                let rgb = match self.peek().clone() {
                    Tok::Ident(n) => color::parse_color(&n),
                    Tok::Hex(h) => color::parse_color(&format!("#{h}")),
                    Tok::Str(s) => color::parse_color(&s),
                    _ => return Err(self.error(&["color name"])),
                }
                .map_err(|source| QueryError::Color { offset: at, source })?;
                self.next();
                let mut spec = ColorSpec::rgb(rgb);
                if *self.peek() == Tok::Comma {
                    self.next();
                    spec.tolerance = self.level()?;
                    if *self.peek() == Tok::Comma {
                        self.next();
                        spec.dominance = self.level()?;
                    }
                }
                self.eat(&Tok::RParen, &["','", "')'"])?;
                Ok(Predicate::Color(spec))
            }
            _ => Err(QueryError::UnknownPredicate { name, offset }),
        }
    }

    fn level(&mut self) -> Result<Level, QueryError> {
        if let Tok::Ident(s) = self.peek() {
            if let Some(l) = Level::from_keyword(s) {
                self.next();
                return Ok(l);
            }
        }
        Err(self.error(&["low", "default", "high"]))
    }
}

fn direction_keyword(s: &str) -> Option<(Direction, DirectionMode)> {
    Direction::ALL.into_iter().find_map(|d| {
        let rest = s.strip_prefix(d.keyword())?;
        let mode = match rest {
            "" => DirectionMode::Single,
            "any" => DirectionMode::Any,
            "all" => DirectionMode::All,
            _ => return None,
        };
        Some((d, mode))
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::query::build::*;

    #[test]
    fn kind_with_text() {
        assert_eq!(
            parse_query(r#"clickable("price")"#).unwrap(),
            clickable().with_text("price")
        );
        assert_eq!(parse_query("headline()").unwrap(), headline());
        assert_eq!(parse_query("headline").unwrap(), headline());
    }

    #[test]
    fn below_and_not_color() {
        let p = parse_query(r#"below(headline("jquery")) & !color(white)"#).unwrap();
        assert_eq!(
            p,
            Predicate::And(vec![
                below(headline().with_text("jquery")),
                not(color(ColorSpec::rgb([255, 255, 255]))),
            ])
        );
    }

    #[test]
    fn unterminated_call_offset() {
        match parse_query("below(").unwrap_err() {
            QueryError::Syntax {
                offset, expected, ..
            } => {
                assert_eq!(offset, 6);
                assert!(expected.contains(&"predicate".to_string()));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn precedence() {
        let p = parse_query("text() & image() | list()").unwrap();
        assert_eq!(
            p,
            Predicate::Or(vec![Predicate::And(vec![text(), image()]), list()])
        );
        let p = parse_query("!text() & image()").unwrap();
        assert_eq!(p, Predicate::And(vec![not(text()), image()]));
        let p = parse_query("text(), image()").unwrap();
        assert_eq!(p, Predicate::And(vec![text(), image()]));
    }

    #[test]
    fn direction_modes_and_distance() {
        let p = parse_query(r#"belowAll(text(), image(), 50)"#).unwrap();
        assert_eq!(
            p,
            below_all(Predicate::And(vec![text(), image()])).within(50.0)
        );
        assert_eq!(
            parse_query("leftofany(image())").unwrap(),
            left_of_any(image())
        );
    }

    #[test]
    fn errors() {
        assert!(matches!(
            parse_query("text() image()").unwrap_err(),
            QueryError::Syntax { offset: 7, .. }
        ));
        assert!(matches!(
            parse_query("shiny()").unwrap_err(),
            QueryError::UnknownPredicate { offset: 0, .. }
        ));
        assert!(matches!(
            parse_query("color(blurple)").unwrap_err(),
            QueryError::Color { offset: 6, .. }
        ));
        assert!(matches!(
            parse_query(r#"css("li:first-child")"#).unwrap_err(),
            QueryError::Css {
                source: crate::query::CssError::Unsupported { .. },
                ..
            }
        ));
        assert!(parse_query("").is_err());
        assert!(parse_query(r#"contains("abc"#).is_err());
    }

    #[test]
    fn color_levels() {
        let p = parse_query("color(blue, high, low)").unwrap();
        assert_eq!(
            p,
            color(
                ColorSpec::rgb([0, 0, 255])
                    .tolerance(Level::High)
                    .dominance(Level::Low)
            )
        );
        assert_eq!(
            parse_query("color(#00f)").unwrap(),
            color(ColorSpec::rgb([0, 0, 255]))
        );
    }

    #[test]
    fn string_escapes() {
        assert_eq!(
            parse_query(r#"contains("say \"hi\"\\")"#).unwrap(),
            contains("say \"hi\"\\")
        );
    }
}
