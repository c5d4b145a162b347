use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Criterion {
    OrcidMatch,
    EmailMatch,
    NameDetailMatch,
    SharedAffiliation,
    SharedCoauthor,
    SharedGrant,
    SameJournal,
    SharedDiscipline,
    SelfCitation,
    BibliographicCoupling,
    CoCitation,
}

impl Criterion {
    pub const ALL: [Criterion; 11] = [
        Criterion::OrcidMatch,
        Criterion::EmailMatch,
        Criterion::NameDetailMatch,
        Criterion::SharedAffiliation,
        Criterion::SharedCoauthor,
        Criterion::SharedGrant,
        Criterion::SameJournal,
        Criterion::SharedDiscipline,
        Criterion::SelfCitation,
        Criterion::BibliographicCoupling,
        Criterion::CoCitation,
    ];
}

/// Weights per criterion plus the merge threshold.
///
/// A criterion missing from `weights` contributes nothing. The reference-based
/// criteria use `min_shared_references` and `min_co_citations` as their
/// match conditions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScoringRuleTable {
    pub threshold: f64,
    pub weights: BTreeMap<Criterion, f64>,
    #[serde(default = "default_min_shared")]
    pub min_shared_references: usize,
    #[serde(default = "default_min_shared")]
    pub min_co_citations: usize,
}

fn default_min_shared() -> usize {
    2
}

impl Default for ScoringRuleTable {
    /// ORCID alone is decisive, email is strong, affiliation/coauthor/grant
    /// are medium, journal and discipline are weak.
    fn default() -> Self {
        use Criterion::*;
        let weights = [
            (OrcidMatch, 20.0),
            (EmailMatch, 8.0),
            (NameDetailMatch, 3.0),
            (SharedAffiliation, 5.0),
            (SharedCoauthor, 4.0),
            (SharedGrant, 5.0),
            (SameJournal, 2.0),
            (SharedDiscipline, 1.0),
            (SelfCitation, 4.0),
            (BibliographicCoupling, 3.0),
            (CoCitation, 2.0),
        ]
        .into_iter()
        .collect();
        Self {
            threshold: 9.0,
            weights,
            min_shared_references: 2,
            min_co_citations: 2,
        }
    }
}

impl ScoringRuleTable {
    pub fn weight(&self, criterion: Criterion) -> f64 {
        self.weights.get(&criterion).copied().unwrap_or(0.0)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.threshold > 0.0) || !self.threshold.is_finite() {
            return Err(Error::Config(format!(
                "rule threshold must be positive, got {}",
                self.threshold
            )));
        }
        if let Some((c, w)) = self.weights.iter().find(|(_, w)| !(**w >= 0.0) || !w.is_finite()) {
            return Err(Error::Config(format!("weight for {c:?} must be non-negative, got {w}")));
        }
        if !self.weights.values().any(|&w| w > 0.0) {
            return Err(Error::Config("rule table enables no criterion".into()));
        }
        Ok(())
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let table: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        table.validate()?;
        Ok(table)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("rule table serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shipped_rule_file_matches_default() {
        let text = include_str!("../../../../config/default_rules.toml");
        assert_eq!(ScoringRuleTable::from_toml(text).unwrap(), ScoringRuleTable::default());
    }

    #[test]
    fn orcid_alone_reaches_threshold() {
        let t = ScoringRuleTable::default();
        assert!(t.weight(Criterion::OrcidMatch) >= t.threshold);
        for c in Criterion::ALL.into_iter().filter(|&c| c != Criterion::OrcidMatch) {
            assert!(t.weight(c) < t.threshold, "{c:?} alone should not merge");
        }
    }

    #[test]
    fn validation() {
        let t = ScoringRuleTable {
            threshold: 0.0,
            ..Default::default()
        };
        assert!(t.validate().is_err());
        let mut t = ScoringRuleTable::default();
        t.weights.insert(Criterion::SameJournal, -1.0);
        assert!(t.validate().is_err());
        let mut t = ScoringRuleTable::default();
        t.weights.values_mut().for_each(|w| *w = 0.0);
        assert!(t.validate().is_err());
        assert!(ScoringRuleTable::from_toml("threshold = 1.0\n[weights]\nbogus = 1.0\n").is_err());
    }
}
