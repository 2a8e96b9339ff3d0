//! Text match tiers.

use serde::{Deserialize, Serialize};

use crate::snapshot::{normalize_text, Element};

/// Attribute consultation order when visible text does not match.
pub const ATTRIBUTE_PRIORITY: [&str; 7] = [
    "name",
    "id",
    "title",
    "class",
    "alt",
    "placeholder",
    "value",
];

/// Strength of a text match; the derived order puts `NoMatch` lowest.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum MatchTier {
    NoMatch,
    Contains,
    StartsEnds,
    Word,
    Exact,
}

impl MatchTier {
    pub fn is_match(self) -> bool {
        self != MatchTier::NoMatch
    }
}

/// Where a tier came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TierSource {
    VisibleText,
    Attribute(&'static str),
}

/// A query folded for comparison: whitespace-normalized and lowercased.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Needle(String);

impl Needle {
    pub fn new(query: &str) -> Self {
        Needle(normalize_text(query).to_lowercase())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    /// Tier of this needle against a haystack that is not yet folded.
    pub fn tier(&self, haystack: &str) -> MatchTier {
        tier_folded(&normalize_text(haystack).to_lowercase(), &self.0)
    }
}

pub(crate) fn tier_folded(hay: &str, q: &str) -> MatchTier {
    if hay == q {
        MatchTier::Exact
    } else if format!(" {hay} ").contains(&format!(" {q} ")) {
        MatchTier::Word
    } else if hay.starts_with(q) || hay.ends_with(q) {
        MatchTier::StartsEnds
    } else if hay.contains(q) {
        MatchTier::Contains
    } else {
        MatchTier::NoMatch
    }
}

/// Case-insensitive tier of `query` against a string.
pub fn tier_of(text: &str, query: &str) -> MatchTier {
    Needle::new(query).tier(text)
}

pub fn visible_tier(el: &Element, needle: &Needle) -> MatchTier {
    needle.tier(&el.visible_text)
}

/// Best attribute tier, ties going to the earlier attribute in
/// [`ATTRIBUTE_PRIORITY`].
pub fn attribute_tier(el: &Element, needle: &Needle) -> (MatchTier, Option<&'static str>) {
    let mut best = (MatchTier::NoMatch, None);
    for name in ATTRIBUTE_PRIORITY {
        if let Some(v) = el.attr(name) {
            let t = needle.tier(v);
            if t > best.0 {
                best = (t, Some(name));
            }
        }
    }
    best
}

/// Visible text first; attributes only when the visible text does not match.
pub fn text_tier_with_source(el: &Element, query: &str) -> (MatchTier, Option<TierSource>) {
    let needle = Needle::new(query);
    let v = visible_tier(el, &needle);
    if v.is_match() {
        return (v, Some(TierSource::VisibleText));
    }
    let (a, name) = attribute_tier(el, &needle);
    (a, name.map(TierSource::Attribute))
}

pub fn text_tier(el: &Element, query: &str) -> MatchTier {
    text_tier_with_source(el, query).0
}
