//! Gini coefficients of impact distributions.
//!
//! `G = sum_i sum_j |x_i - x_j| / (2 n^2 mean)`, without small-sample
//! correction, computed from sorted values as
//! `G = 2 sum_k k x_(k) / (n sum x) - (n + 1) / n` with 1-based ranks.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::cohort::{aggregate_impact, AuthorProfile, CohortSpec, WindowSelector, WINDOW_YEARS};
use crate::corpus::YearRange;
use crate::{Error, Result};

/// Smallest cohort for which a series point is reported.
pub const DEFAULT_MIN_COHORT: usize = 100;

pub fn gini(values: &[f64]) -> Result<f64> {
    if values.len() < 2 {
        return Err(Error::UndefinedGini("need at least 2 values"));
    }
    if values.iter().any(|v| !(*v >= 0.0) || !v.is_finite()) {
        return Err(Error::InvalidInput("Gini needs finite non-negative values".into()));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let total: f64 = sorted.iter().sum();
    if total == 0.0 {
        return Err(Error::UndefinedGini("all values are zero"));
    }
    let n = sorted.len() as f64;
    let weighted: f64 = sorted.iter().enumerate().map(|(k, x)| (k + 1) as f64 * x).sum();
    let g = 2.0 * weighted / (n * total) - (n + 1.0) / n;
    Ok(g.max(0.0))
}

/// Cumulative population share against cumulative value share, starting at
/// `(0, 0)`.
pub fn lorenz_curve(values: &[f64]) -> Vec<(f64, f64)> {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let total: f64 = sorted.iter().sum();
    let n = sorted.len() as f64;
    let mut acc = 0.0;
    let mut out = Vec::with_capacity(sorted.len() + 1);
    out.push((0.0, 0.0));
    for (k, v) in sorted.iter().enumerate() {
        acc += v;
        out.push(((k + 1) as f64 / n, if total > 0.0 { acc / total } else { 0.0 }));
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GiniMode {
    Cohort,
    Population,
}

impl std::str::FromStr for GiniMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "cohort" => Ok(Self::Cohort),
            "population" => Ok(Self::Population),
            _ => Err(Error::Config(format!("mode must be cohort or population, got {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GiniPoint {
    /// Cohort start year, or window start year in population mode.
    pub year: i32,
    pub gini: f64,
    pub n_authors: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkippedPoint {
    pub year: i32,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GiniSeries {
    pub discipline: String,
    pub mode: GiniMode,
    pub window: WindowSelector,
    pub points: Vec<GiniPoint>,
    pub skipped: Vec<SkippedPoint>,
}

impl GiniSeries {
    pub fn mean_gini(&self) -> Option<f64> {
        (!self.points.is_empty()).then(|| self.points.iter().map(|p| p.gini).sum::<f64>() / self.points.len() as f64)
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["year", "gini", "n_authors"])?;
        for p in &self.points {
            w.write_record([p.year.to_string(), p.gini.to_string(), p.n_authors.to_string()])?;
        }
        w.flush().map_err(|e| Error::io("<gini series>", e))?;
        Ok(())
    }
}

fn series_point(year: i32, impacts: &[f64], min_size: usize) -> std::result::Result<GiniPoint, SkippedPoint> {
    let skip = |reason: String| {
        log::warn!("skipping Gini point {year}: {reason}");
        SkippedPoint { year, reason }
    };
    if impacts.len() < min_size.max(2) {
        return Err(skip(format!(
            "{} authors, minimum is {}",
            impacts.len(),
            min_size.max(2)
        )));
    }
    match gini(impacts) {
        Ok(g) => Ok(GiniPoint {
            year,
            gini: g,
            n_authors: impacts.len(),
        }),
        Err(e) => Err(skip(e.to_string())),
    }
}

/// Window impacts of one cohort's members.
pub fn cohort_impacts(profiles: &[AuthorProfile], spec: &CohortSpec, window: WindowSelector) -> Vec<f64> {
    profiles
        .iter()
        .filter(|p| spec.admits(p))
        .map(|p| aggregate_impact(p, spec.window(window), &spec.discipline) as f64)
        .collect()
}

/// One Gini per cohort start year over the chosen career window.
pub fn cohort_gini_series(
    profiles: &[AuthorProfile],
    discipline: &str,
    start_years: &[i32],
    window: WindowSelector,
    min_size: usize,
) -> GiniSeries {
    let mut series = GiniSeries {
        discipline: discipline.to_string(),
        mode: GiniMode::Cohort,
        window,
        points: Vec::new(),
        skipped: Vec::new(),
    };
    for &year in start_years {
        let impacts = cohort_impacts(profiles, &CohortSpec::new(discipline, year), window);
        match series_point(year, &impacts, min_size) {
            Ok(p) => series.points.push(p),
            Err(s) => series.skipped.push(s),
        }
    }
    series
}

/// Impacts in `[start, start + 4]` of every author with at least one
/// publication in that window, regardless of career start.
pub fn population_impacts(profiles: &[AuthorProfile], discipline: &str, start: i32) -> Vec<f64> {
    let window = YearRange {
        min: start,
        max: start + WINDOW_YEARS - 1,
    };
    profiles
        .iter()
        .filter(|p| p.count_in_window(window, discipline) > 0)
        .map(|p| aggregate_impact(p, window, discipline) as f64)
        .collect()
}

pub fn population_gini_series(
    profiles: &[AuthorProfile],
    discipline: &str,
    window_starts: &[i32],
    min_size: usize,
) -> GiniSeries {
    let mut series = GiniSeries {
        discipline: discipline.to_string(),
        mode: GiniMode::Population,
        window: WindowSelector::First,
        points: Vec::new(),
        skipped: Vec::new(),
    };
    for &year in window_starts {
        let impacts = population_impacts(profiles, discipline, year);
        match series_point(year, &impacts, min_size) {
            Ok(p) => series.points.push(p),
            Err(s) => series.skipped.push(s),
        }
    }
    series
}
