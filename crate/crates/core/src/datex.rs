//! Date and time extraction from free text.
//!
//! | id               | shape                      | example                  |
//! |------------------|----------------------------|--------------------------|
//! | `iso8601`        | `yyyy-mm-dd`               | `2012-09-19`             |
//! | `dmy-dot`        | `d.m.y`                    | `25.09.2012`             |
//! | `dmy-dash`       | `d-m-y`                    | `25-09-2012`             |
//! | `mdy-slash`      | `m/d/y`                    | `09/25/2012`             |
//! | `dmy-slash`      | `d/m/y` when `m/d/y` fails | `25/09/2012`             |
//! | `month-name-dy`  | `Month d, y`               | `September 19, 2012`     |
//! | `d-month-name-y` | `d Month y`                | `19. September 2012`     |
//!
//! Month names are English or German, full or abbreviated. Two-digit years
//! pivot at 70. A time `hh:mm[:ss]` with optional am/pm attaches when it
//! directly follows the date.

use std::ops::Range;
use std::sync::LazyLock;

use chrono::{NaiveDate, NaiveTime};
use regex::Regex;
use serde::{Serialize, Serializer};

use crate::snapshot::Element;

/// Pattern identifiers in the order they are tried at each position.
pub const PATTERN_IDS: [&str; 7] = [
    "iso8601",
    "dmy-dot",
    "dmy-dash",
    "mdy-slash",
    "dmy-slash",
    "month-name-dy",
    "d-month-name-y",
];

const MONTHS: &[(&str, u32)] = &[
    ("january", 1),
    ("januar", 1),
    ("jan", 1),
    ("february", 2),
    ("februar", 2),
    ("feb", 2),
    ("march", 3),
    ("märz", 3),
    ("maerz", 3),
    ("mar", 3),
    ("mär", 3),
    ("april", 4),
    ("apr", 4),
    ("may", 5),
    ("mai", 5),
    ("june", 6),
    ("juni", 6),
    ("jun", 6),
    ("july", 7),
    ("juli", 7),
    ("jul", 7),
    ("august", 8),
    ("aug", 8),
    ("september", 9),
    ("sept", 9),
    ("sep", 9),
    ("october", 10),
    ("oktober", 10),
    ("oct", 10),
    ("okt", 10),
    ("november", 11),
    ("nov", 11),
    ("december", 12),
    ("dezember", 12),
    ("dec", 12),
    ("dez", 12),
];

fn month_alternation() -> String {
    let mut names: Vec<&str> = MONTHS.iter().map(|(n, _)| *n).collect();
    names.sort_by_key(|n| std::cmp::Reverse(n.chars().count()));
    names.join("|")
}

fn month_number(name: &str) -> Option<u32> {
    let lower = name.to_lowercase();
    MONTHS.iter().find(|(n, _)| *n == lower).map(|(_, m)| *m)
}

struct Patterns {
    iso: Regex,
    dot: Regex,
    dash: Regex,
    slash: Regex,
    month_first: Regex,
    day_first: Regex,
    time: Regex,
}

static PATTERNS: LazyLock<Patterns> = LazyLock::new(|| {
    let m = month_alternation();
    let re = |s: &str| Regex::new(s).expect("static pattern");
    Patterns {
        iso: re(r"^(\d{4})-(\d{2})-(\d{2})"),
        dot: re(r"^(\d{1,2})\.(\d{1,2})\.(\d{4}|\d{2})"),
        dash: re(r"^(\d{1,2})-(\d{1,2})-(\d{4}|\d{2})"),
        slash: re(r"^(\d{1,2})/(\d{1,2})/(\d{4}|\d{2})"),
        month_first: re(&format!(
            r"(?i)^({m})\.?\s+(\d{{1,2}})(?:st|nd|rd|th)?,?\s+(\d{{4}})"
        )),
        day_first: re(&format!(
            r"(?i)^(\d{{1,2}})(?:st|nd|rd|th)?\.?\s+({m})\.?,?\s+(\d{{4}})"
        )),
        time: re(
            r"(?i)^(?:T|,?\s+(?:at\s+|um\s+)?)(\d{1,2}):(\d{2})(?::(\d{2}))?(?:\s*([ap])\.?m\b\.?)?",
        ),
    }
});

/// A calendar-valid date found in text.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExtractedDate {
    pub date: NaiveDate,
    pub time: Option<NaiveTime>,
    /// Byte range of the match in the input, time included.
    pub span: Range<usize>,
    pub format: &'static str,
}

impl ExtractedDate {
    /// ISO 8601 rendering: `yyyy-mm-dd` or `yyyy-mm-ddThh:mm:ss`.
    pub fn iso(&self) -> String {
        match self.time {
            Some(t) => format!("{}T{}", self.date.format("%Y-%m-%d"), t.format("%H:%M:%S")),
            None => self.date.format("%Y-%m-%d").to_string(),
        }
    }
}

impl Serialize for ExtractedDate {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = s.serialize_struct("ExtractedDate", 3)?;
        st.serialize_field("timestamp", &self.iso())?;
        st.serialize_field("span", &[self.span.start, self.span.end])?;
        st.serialize_field("format", self.format)?;
        st.end()
    }
}

fn year(s: &str) -> i32 {
    let y: i32 = s.parse().expect("digits");
    if s.len() == 2 {
        if y >= 70 {
            1900 + y
        } else {
            2000 + y
        }
    } else {
        y
    }
}

fn num(s: &str) -> u32 {
    s.parse().expect("digits")
}

fn digit_at(text: &str, byte: usize) -> bool {
    text.as_bytes().get(byte).is_some_and(u8::is_ascii_digit)
}

fn prev_char(text: &str, start: usize) -> Option<char> {
    text[..start].chars().next_back()
}

/// Tries every pattern anchored at `start`, returning the date, its end and
/// the pattern id.
fn date_at(text: &str, start: usize) -> Option<(NaiveDate, usize, &'static str)> {
    let p = &*PATTERNS;
    let rest = &text[start..];
    let prev = prev_char(text, start);
    let ymd = |y: i32, m: u32, d: u32| NaiveDate::from_ymd_opt(y, m, d);
    let ends_clean = |len: usize| !digit_at(text, start + len);

    if prev.is_some_and(|c| c.is_ascii_digit()) {
        return None;
    }
    if let Some(c) = p.iso.captures(rest) {
        let len = c[0].len();
        if ends_clean(len) {
            if let Some(d) = ymd(year(&c[1]), num(&c[2]), num(&c[3])) {
                return Some((d, len, "iso8601"));
            }
        }
    }
    for (re, id) in [(&p.dot, "dmy-dot"), (&p.dash, "dmy-dash")] {
        if let Some(c) = re.captures(rest) {
            let len = c[0].len();
            if ends_clean(len) {
                if let Some(d) = ymd(year(&c[3]), num(&c[2]), num(&c[1])) {
                    return Some((d, len, id));
                }
            }
        }
    }
    if let Some(c) = p.slash.captures(rest) {
        let len = c[0].len();
        if ends_clean(len) {
            let (a, b, y) = (num(&c[1]), num(&c[2]), year(&c[3]));
            if let Some(d) = ymd(y, a, b) {
                return Some((d, len, "mdy-slash"));
            }
            if let Some(d) = ymd(y, b, a) {
                return Some((d, len, "dmy-slash"));
            }
        }
    }
    if !prev.is_some_and(char::is_alphabetic) {
        if let Some(c) = p.month_first.captures(rest) {
            let len = c[0].len();
            if ends_clean(len) {
                let m = month_number(&c[1]).expect("alternation lists months");
                if let Some(d) = ymd(year(&c[3]), m, num(&c[2])) {
                    return Some((d, len, "month-name-dy"));
                }
            }
        }
    }
    if let Some(c) = p.day_first.captures(rest) {
        let len = c[0].len();
        if ends_clean(len) {
            let m = month_number(&c[2]).expect("alternation lists months");
            if let Some(d) = ymd(year(&c[3]), m, num(&c[1])) {
                return Some((d, len, "d-month-name-y"));
            }
        }
    }
    None
}

fn time_at(text: &str, start: usize) -> Option<(NaiveTime, usize)> {
    let c = PATTERNS.time.captures(&text[start..])?;
    let len = c[0].len();
    if digit_at(text, start + len) {
        return None;
    }
    let mut h = num(&c[1]);
    let m = num(&c[2]);
    let s = c.get(3).map_or(0, |v| num(v.as_str()));
    if let Some(ap) = c.get(4) {
        if !(1..=12).contains(&h) {
            return None;
        }
        let pm = ap.as_str().eq_ignore_ascii_case("p");
        h = match (h, pm) {
            (12, false) => 0,
            (12, true) => 12,
            (h, true) => h + 12,
            (h, false) => h,
        };
    }
    NaiveTime::from_hms_opt(h, m, s).map(|t| (t, len))
}

/// First calendar-valid date in `text`, scanning left to right.
pub fn extract_date(text: &str) -> Option<ExtractedDate> {
    for (start, _) in text.char_indices() {
        if let Some((date, len, format)) = date_at(text, start) {
            let end = start + len;
            let (time, end) = match time_at(text, end) {
                Some((t, tlen)) => (Some(t), end + tlen),
                None => (None, end),
            };
            return Some(ExtractedDate {
                date,
                time,
                span: start..end,
                format,
            });
        }
    }
    None
}

pub fn extract_date_element(el: &Element) -> Option<ExtractedDate> {
    extract_date(&el.visible_text)
}
