//! Named weighting constants.

use serde::{Deserialize, Serialize};

use super::text::MatchTier;

/// Scores used when ranking matches. Every value is configurable; `scale`
/// multiplies the final weight and exists to check that ranking is
/// invariant under positive scaling.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", default, deny_unknown_fields)]
pub struct WeightConfig {
    pub exact: f64,
    pub word: f64,
    pub starts_ends: f64,
    pub contains: f64,
    /// Kind match without a text argument.
    pub kind: f64,
    /// CSS selector match.
    pub selector: f64,
    pub label_bonus: f64,
    /// Maximum penalty for an element covering the whole viewport.
    pub size_prior: f64,
    /// Distance at which a direction score halves, in CSS px.
    pub distance_half_life: f64,
    pub scale: f64,
}

impl Default for WeightConfig {
    fn default() -> Self {
        WeightConfig {
            exact: 1.0,
            word: 0.8,
            starts_ends: 0.6,
            contains: 0.4,
            kind: 0.5,
            selector: 0.5,
            label_bonus: 0.3,
            size_prior: 0.1,
            distance_half_life: 100.0,
            scale: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("weight {field} must be {rule}, got {value}")]
pub struct WeightConfigError {
    pub field: &'static str,
    pub rule: &'static str,
    pub value: f64,
}

impl WeightConfig {
    pub fn tier_score(&self, tier: MatchTier) -> f64 {
        match tier {
            MatchTier::Exact => self.exact,
            MatchTier::Word => self.word,
            MatchTier::StartsEnds => self.starts_ends,
            MatchTier::Contains => self.contains,
            MatchTier::NoMatch => 0.0,
        }
    }

    pub fn distance_score(&self, d: f64) -> f64 {
        1.0 / (1.0 + d / self.distance_half_life)
    }

    /// Penalty for an element of `area` on a viewport of `viewport_area`.
    pub fn size_penalty(&self, area: f64, viewport_area: f64) -> f64 {
        -self.size_prior * (area / viewport_area).min(1.0)
    }

    pub fn validate(&self) -> Result<(), WeightConfigError> {
        let fields = [
            ("exact", self.exact),
            ("word", self.word),
            ("startsEnds", self.starts_ends),
            ("contains", self.contains),
            ("kind", self.kind),
            ("selector", self.selector),
            ("labelBonus", self.label_bonus),
            ("sizePrior", self.size_prior),
        ];
        for (field, value) in fields {
            if !value.is_finite() || value < 0.0 {
                return Err(WeightConfigError {
                    field,
                    rule: "finite and non-negative",
                    value,
                });
            }
        }
        for (field, value) in [
            ("distanceHalfLife", self.distance_half_life),
            ("scale", self.scale),
        ] {
            if !value.is_finite() || value <= 0.0 {
                return Err(WeightConfigError {
                    field,
                    rule: "finite and positive",
                    value,
                });
            }
        }
        Ok(())
    }
}
