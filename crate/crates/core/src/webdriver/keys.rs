//! Key names to WebDriver key code points.

use super::WebDriverError;

const NAMED: &[(&str, char)] = &[
    ("add", '\u{E025}'),
    ("alt", '\u{E00A}'),
    ("arrowdown", '\u{E015}'),
    ("arrowleft", '\u{E012}'),
    ("arrowright", '\u{E014}'),
    ("arrowup", '\u{E013}'),
    ("backspace", '\u{E003}'),
    ("cancel", '\u{E001}'),
    ("clear", '\u{E005}'),
    ("cmd", '\u{E03D}'),
    ("command", '\u{E03D}'),
    ("control", '\u{E009}'),
    ("ctrl", '\u{E009}'),
    ("del", '\u{E017}'),
    ("delete", '\u{E017}'),
    ("down", '\u{E015}'),
    ("end", '\u{E010}'),
    ("enter", '\u{E007}'),
    ("esc", '\u{E00C}'),
    ("escape", '\u{E00C}'),
    ("f1", '\u{E031}'),
    ("f10", '\u{E03A}'),
    ("f11", '\u{E03B}'),
    ("f12", '\u{E03C}'),
    ("f2", '\u{E032}'),
    ("f3", '\u{E033}'),
    ("f4", '\u{E034}'),
    ("f5", '\u{E035}'),
    ("f6", '\u{E036}'),
    ("f7", '\u{E037}'),
    ("f8", '\u{E038}'),
    ("f9", '\u{E039}'),
    ("help", '\u{E002}'),
    ("home", '\u{E011}'),
    ("insert", '\u{E016}'),
    ("left", '\u{E012}'),
    ("meta", '\u{E03D}'),
    ("pagedown", '\u{E00F}'),
    ("pageup", '\u{E00E}'),
    ("pause", '\u{E00B}'),
    ("return", '\u{E006}'),
    ("right", '\u{E014}'),
    ("shift", '\u{E008}'),
    ("space", '\u{E00D}'),
    ("tab", '\u{E004}'),
    ("up", '\u{E013}'),
];

/// Code point for a key name (case-insensitive) or a single character.
pub fn key_code(name: &str) -> Result<char, WebDriverError> {
    let mut chars = name.chars();
    if let (Some(c), None) = (chars.next(), chars.next()) {
        return Ok(c);
    }
    let lower = name.to_ascii_lowercase();
    NAMED
        .binary_search_by(|(k, _)| k.cmp(&lower.as_str()))
        .map(|i| NAMED[i].1)
        .map_err(|_| WebDriverError::UnknownKey(name.to_owned()))
}
