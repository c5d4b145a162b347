//! Author profiles, same-start-year cohorts, and windowed impact.

use std::collections::{BTreeMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::corpus::{c5, Corpus, YearRange};
use crate::disambig::MentionCluster;
use crate::mobility::RankTable;
use crate::{Error, Result};

/// Length of each career window in years.
pub const WINDOW_YEARS: i32 = 5;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProfilePublication {
    pub pub_id: String,
    pub year: i32,
    pub disciplines: Vec<String>,
    pub c5: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AuthorProfile {
    pub author_id: String,
    /// Sorted by (year, pub_id); each publication appears once.
    pub publications: Vec<ProfilePublication>,
    /// Year of the first publication on record, any discipline.
    pub career_start: i32,
}

impl AuthorProfile {
    pub fn new(author_id: impl Into<String>, mut publications: Vec<ProfilePublication>) -> Result<Self> {
        let author_id = author_id.into();
        publications.sort_by(|a, b| (a.year, &a.pub_id).cmp(&(b.year, &b.pub_id)));
        publications.dedup_by(|a, b| a.pub_id == b.pub_id);
        let career_start = publications
            .first()
            .map(|p| p.year)
            .ok_or_else(|| Error::InvalidInput(format!("author {author_id} has no publications")))?;
        Ok(Self {
            author_id,
            publications,
            career_start,
        })
    }

    pub fn disciplines(&self) -> impl Iterator<Item = &str> {
        let mut seen = HashSet::new();
        self.publications
            .iter()
            .flat_map(|p| p.disciplines.iter().map(String::as_str))
            .filter(move |d| seen.insert(*d))
    }

    fn in_window<'a>(
        &'a self,
        window: YearRange,
        discipline: &'a str,
    ) -> impl Iterator<Item = &'a ProfilePublication> + 'a {
        self.publications
            .iter()
            .filter(move |p| window.contains(p.year) && p.disciplines.iter().any(|d| d == discipline))
    }

    pub fn count_in_window(&self, window: YearRange, discipline: &str) -> usize {
        self.in_window(window, discipline).count()
    }
}

/// One profile per cluster, with `c5` attached to every publication.
pub fn build_profiles(corpus: &Corpus, clusters: &[MentionCluster]) -> Result<Vec<AuthorProfile>> {
    clusters
        .iter()
        .map(|cluster| {
            let pubs = cluster
                .mention_ids
                .iter()
                .map(|m| {
                    let (record, _) = corpus.mention(m).ok_or_else(|| Error::MissingMention(m.clone()))?;
                    Ok(ProfilePublication {
                        pub_id: record.pub_id.clone(),
                        year: record.year,
                        disciplines: record.disciplines.clone(),
                        c5: c5(record),
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            AuthorProfile::new(cluster.author_id.clone(), pubs)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CohortSpec {
    pub discipline: String,
    pub start_year: i32,
}

impl CohortSpec {
    pub fn new(discipline: impl Into<String>, start_year: i32) -> Self {
        Self {
            discipline: discipline.into(),
            start_year,
        }
    }

    /// First five career years, `[y, y + 4]`.
    pub fn window1(&self) -> YearRange {
        YearRange {
            min: self.start_year,
            max: self.start_year + WINDOW_YEARS - 1,
        }
    }

    /// Second five career years, `[y + 5, y + 9]`.
    pub fn window2(&self) -> YearRange {
        YearRange {
            min: self.start_year + WINDOW_YEARS,
            max: self.start_year + 2 * WINDOW_YEARS - 1,
        }
    }

    pub fn window(&self, which: WindowSelector) -> YearRange {
        match which {
            WindowSelector::First => self.window1(),
            WindowSelector::Second => self.window2(),
        }
    }

    pub fn admits(&self, profile: &AuthorProfile) -> bool {
        profile.career_start == self.start_year
            && profile.count_in_window(self.window1(), &self.discipline) > 0
            && profile.count_in_window(self.window2(), &self.discipline) > 0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum WindowSelector {
    #[default]
    First,
    Second,
}

impl std::str::FromStr for WindowSelector {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "1" | "first" => Ok(Self::First),
            "2" | "second" => Ok(Self::Second),
            _ => Err(Error::Config(format!("window must be 1 or 2, got {s:?}"))),
        }
    }
}

/// Authors starting in `spec.start_year` with at least one publication in
/// `spec.discipline` in each career window. Returned in author-id order.
pub fn build_cohort(profiles: &[AuthorProfile], spec: &CohortSpec) -> Vec<String> {
    let mut members: Vec<String> = profiles
        .iter()
        .filter(|p| spec.admits(p))
        .map(|p| p.author_id.clone())
        .collect();
    members.sort_unstable();
    if members.is_empty() {
        log::warn!("empty cohort: {} {}", spec.discipline, spec.start_year);
    }
    members
}

/// Sum of `c5` over the author's publications in `window` tagged `discipline`.
pub fn aggregate_impact(profile: &AuthorProfile, window: YearRange, discipline: &str) -> u64 {
    profile.in_window(window, discipline).map(|p| u64::from(p.c5)).sum()
}

/// Cohort members with their two window impacts, ranked into `n_bins` groups.
pub fn cohort_rank_table(profiles: &[AuthorProfile], spec: &CohortSpec, n_bins: usize) -> Result<RankTable> {
    let rows = profiles
        .iter()
        .filter(|p| spec.admits(p))
        .map(|p| {
            (
                p.author_id.clone(),
                aggregate_impact(p, spec.window1(), &spec.discipline) as f64,
                aggregate_impact(p, spec.window2(), &spec.discipline) as f64,
            )
        })
        .collect();
    RankTable::from_impacts(rows, n_bins)
}

/// Profiles grouped by career start year, for repeated cohort builds.
pub fn by_start_year(profiles: &[AuthorProfile]) -> BTreeMap<i32, Vec<&AuthorProfile>> {
    let mut out: BTreeMap<i32, Vec<&AuthorProfile>> = BTreeMap::new();
    for p in profiles {
        out.entry(p.career_start).or_default().push(p);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{AuthorMention, PublicationRecord};
    use proptest::prelude::*;

    fn pp(id: &str, year: i32, disc: &[&str], c5: u32) -> ProfilePublication {
        ProfilePublication {
            pub_id: id.into(),
            year,
            disciplines: disc.iter().map(|s| s.to_string()).collect(),
            c5,
        }
    }

    #[test]
    fn career_start_is_earliest_publication() {
        let p = AuthorProfile::new("a", vec![pp("x", 2001, &["C"], 0), pp("y", 1998, &["C"], 0)]).unwrap();
        assert_eq!(p.career_start, 1998);
        assert!(AuthorProfile::new("b", vec![]).is_err());
    }

    #[test]
    fn profiles_from_clusters() {
        let rec = |id: &str, year, disc: &[&str], cites: Vec<i32>| PublicationRecord {
            pub_id: id.into(),
            year,
            disciplines: disc.iter().map(|s| s.to_string()).collect(),
            mentions: vec![AuthorMention::new(format!("{id}#0"), "J. Smith")],
            citing_years: cites,
        };
        let corpus = Corpus::from_records(vec![
            rec("p1", 1998, &["Chem"], vec![1998, 1999, 2010]),
            rec("p2", 2001, &["Chem", "Bio"], vec![]),
        ])
        .unwrap();
        let clusters = vec![
            MentionCluster {
                author_id: "A".into(),
                mention_ids: vec!["p1#0".into(), "p2#0".into()],
            },
            MentionCluster {
                author_id: "B".into(),
                mention_ids: vec!["p2#0".into()],
            },
        ];
        let profiles = build_profiles(&corpus, &clusters).unwrap();
        assert_eq!(profiles[0].career_start, 1998);
        assert_eq!(profiles[0].publications[0].c5, 2);
        assert_eq!(profiles[1].publications.len(), 1);
        let discs: Vec<_> = profiles[0].disciplines().collect();
        assert_eq!(discs, ["Chem", "Bio"]);

        let bad = vec![MentionCluster {
            author_id: "C".into(),
            mention_ids: vec!["nope".into()],
        }];
        assert!(matches!(build_profiles(&corpus, &bad), Err(Error::MissingMention(_))));
    }

    #[test]
    fn multi_discipline_author_enters_both_cohorts() {
        let p = AuthorProfile::new("a", vec![pp("x", 2000, &["C", "B"], 1), pp("y", 2006, &["C", "B"], 1)]).unwrap();
        let profiles = [p];
        assert_eq!(build_cohort(&profiles, &CohortSpec::new("C", 2000)), ["a"]);
        assert_eq!(build_cohort(&profiles, &CohortSpec::new("B", 2000)), ["a"]);
    }

    #[test]
    fn eligibility() {
        let both = AuthorProfile::new("both", vec![pp("1", 2000, &["C"], 0), pp("2", 2007, &["C"], 0)]).unwrap();
        let early = AuthorProfile::new("early", vec![pp("3", 2000, &["C"], 0), pp("4", 2004, &["C"], 0)]).unwrap();
        let late = AuthorProfile::new("late", vec![pp("5", 2001, &["C"], 0), pp("6", 2007, &["C"], 0)]).unwrap();
        let other_field_first = AuthorProfile::new(
            "ofs",
            vec![
                pp("7", 1999, &["B"], 0),
                pp("8", 2000, &["C"], 0),
                pp("9", 2006, &["C"], 0),
            ],
        )
        .unwrap();
        let spec = CohortSpec::new("C", 2000);
        assert_eq!(build_cohort(&[both, early, late, other_field_first], &spec), ["both"]);
        assert_eq!(spec.window1(), YearRange { min: 2000, max: 2004 });
        assert_eq!(spec.window2(), YearRange { min: 2005, max: 2009 });
    }

    #[test]
    fn impact_sums_only_window_and_discipline() {
        let p = AuthorProfile::new(
            "a",
            vec![
                pp("1", 2000, &["C"], 3),
                pp("2", 2002, &["C"], 4),
                pp("3", 2006, &["C"], 50),
                pp("4", 2001, &["B"], 9),
            ],
        )
        .unwrap();
        let spec = CohortSpec::new("C", 2000);
        assert_eq!(aggregate_impact(&p, spec.window1(), "C"), 7);
        assert_eq!(aggregate_impact(&p, spec.window2(), "C"), 50);
        assert_eq!(aggregate_impact(&p, YearRange { min: 2010, max: 2014 }, "C"), 0);
    }

    proptest! {
        #[test]
        fn impact_is_additive_over_disjoint_windows(
            pubs in proptest::collection::vec((1995i32..2015, 0u32..40, proptest::bool::ANY), 1..30),
            split in 1996i32..2014,
        ) {
            let list = pubs.iter().enumerate()
                .map(|(i, &(y, c, tagged))| pp(&i.to_string(), y, if tagged { &["C"] } else { &["B"] }, c))
                .collect();
            let p = AuthorProfile::new("a", list).unwrap();
            let all = YearRange { min: 1995, max: 2014 };
            let lo = YearRange { min: 1995, max: split - 1 };
            let hi = YearRange { min: split, max: 2014 };
            prop_assert_eq!(
                aggregate_impact(&p, all, "C"),
                aggregate_impact(&p, lo, "C") + aggregate_impact(&p, hi, "C")
            );
        }

        #[test]
        fn membership_invariant_under_relabeling(
            years in proptest::collection::vec(proptest::collection::vec(1998i32..2012, 1..6), 1..20),
        ) {
            let profiles: Vec<_> = years.iter().enumerate()
                .map(|(i, ys)| AuthorProfile::new(
                    format!("a{i}"),
                    ys.iter().enumerate().map(|(k, &y)| pp(&format!("{i}-{k}"), y, &["C"], 1)).collect(),
                ).unwrap())
                .collect();
            let relabeled: Vec<_> = profiles.iter().map(|p| {
                let mut q = p.clone();
                q.author_id = format!("z{}", p.author_id);
                q
            }).collect();
            let spec = CohortSpec::new("C", 2000);
            let a = build_cohort(&profiles, &spec);
            let b = build_cohort(&relabeled, &spec);
            let b_back: Vec<String> = b.iter().map(|s| s[1..].to_string()).collect();
            let mut a_sorted = a.clone();
            a_sorted.sort();
            let mut b_sorted = b_back;
            b_sorted.sort();
            prop_assert_eq!(a_sorted, b_sorted);
            for id in &a {
                let p = profiles.iter().find(|p| &p.author_id == id).unwrap();
                prop_assert!(p.count_in_window(spec.window1(), "C") > 0);
                prop_assert!(p.count_in_window(spec.window2(), "C") > 0);
            }
        }
    }
}
