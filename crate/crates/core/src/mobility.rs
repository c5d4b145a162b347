//! Decile ranks, transition matrices, ΔQ profiles, the reshuffle null model,
//! and gaps between empirical and model matrices.
//!
//! Bins are numbered from 1 (bottom) to `n_bins` (top). Ties in impact are
//! broken by author id so every table ranks deterministically.

use std::io::{Read, Write};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::io::{read_square_csv, write_square_csv};
use crate::{Error, Exec, Result};

pub const DECILES: usize = 10;

/// Column sums of a stochastic matrix must be within this of 1.
pub const STOCHASTIC_TOL: f64 = 1e-12;

/// Bins for values already in tie-break order: index `k` of the stable
/// ascending sort goes to bin `floor(k * n_bins / n) + 1`.
fn assign_bins(values: &[f64], n_bins: usize) -> Vec<u8> {
    let n = values.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]).then(a.cmp(&b)));
    let mut bins = vec![0u8; n];
    for (k, &i) in order.iter().enumerate() {
        bins[i] = (k * n_bins / n) as u8 + 1;
    }
    bins
}

fn check_rankable(n: usize, n_bins: usize) -> Result<()> {
    if !(2..=u8::MAX as usize).contains(&n_bins) {
        return Err(Error::InvalidInput(format!(
            "bin count must be in 2..=255, got {n_bins}"
        )));
    }
    if n < n_bins {
        return Err(Error::CohortTooSmall { n, min: n_bins });
    }
    Ok(())
}

/// Decile of each `(author_id, impact)` pair, returned in input order.
pub fn decile_rank(impacts: &[(String, f64)]) -> Result<Vec<u8>> {
    bin_rank(impacts, DECILES)
}

pub fn bin_rank(impacts: &[(String, f64)], n_bins: usize) -> Result<Vec<u8>> {
    check_rankable(impacts.len(), n_bins)?;
    let mut by_id: Vec<usize> = (0..impacts.len()).collect();
    by_id.sort_by(|&a, &b| impacts[a].0.cmp(&impacts[b].0));
    let values: Vec<f64> = by_id.iter().map(|&i| impacts[i].1).collect();
    let bins = assign_bins(&values, n_bins);
    let mut out = vec![0u8; impacts.len()];
    for (pos, &i) in by_id.iter().enumerate() {
        out[i] = bins[pos];
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankRow {
    pub author_id: String,
    pub impact1: f64,
    pub impact2: f64,
    pub q1: u8,
    pub q2: u8,
}

/// Per-cohort ranking in both career windows. Rows are kept in author-id
/// order.
#[derive(Debug, Clone, PartialEq)]
pub struct RankTable {
    rows: Vec<RankRow>,
    n_bins: usize,
}

impl RankTable {
    /// Ranks `(author_id, impact1, impact2)` triples into `n_bins` groups per
    /// window.
    pub fn from_impacts(mut rows: Vec<(String, f64, f64)>, n_bins: usize) -> Result<Self> {
        check_rankable(rows.len(), n_bins)?;
        if let Some((id, _, _)) = rows.iter().find(|(_, a, b)| !a.is_finite() || !b.is_finite()) {
            return Err(Error::InvalidInput(format!("non-finite impact for author {id}")));
        }
        rows.sort_by(|a, b| a.0.cmp(&b.0));
        if let Some(w) = rows.windows(2).find(|w| w[0].0 == w[1].0) {
            return Err(Error::InvalidInput(format!("duplicate author {}", w[0].0)));
        }
        let v1: Vec<f64> = rows.iter().map(|r| r.1).collect();
        let v2: Vec<f64> = rows.iter().map(|r| r.2).collect();
        let q1 = assign_bins(&v1, n_bins);
        let q2 = assign_bins(&v2, n_bins);
        let rows = rows
            .into_iter()
            .enumerate()
            .map(|(i, (author_id, impact1, impact2))| RankRow {
                author_id,
                impact1,
                impact2,
                q1: q1[i],
                q2: q2[i],
            })
            .collect();
        Ok(Self { rows, n_bins })
    }

    /// Wraps rows whose bins were assigned elsewhere (e.g. sampled directly).
    pub fn from_rows(mut rows: Vec<RankRow>, n_bins: usize) -> Result<Self> {
        if !(2..=u8::MAX as usize).contains(&n_bins) {
            return Err(Error::InvalidInput(format!(
                "bin count must be in 2..=255, got {n_bins}"
            )));
        }
        if rows.is_empty() {
            return Err(Error::InvalidInput("rank table has no rows".into()));
        }
        let valid = |q: u8| q >= 1 && (q as usize) <= n_bins;
        if let Some(r) = rows.iter().find(|r| !valid(r.q1) || !valid(r.q2)) {
            return Err(Error::InvalidInput(format!(
                "author {} has a bin outside 1..={n_bins}",
                r.author_id
            )));
        }
        rows.sort_by(|a, b| a.author_id.cmp(&b.author_id));
        Ok(Self { rows, n_bins })
    }

    pub fn rows(&self) -> &[RankRow] {
        &self.rows
    }

    pub fn n_bins(&self) -> usize {
        self.n_bins
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Occupancy of each starting bin.
    pub fn occupancy(&self) -> Vec<usize> {
        let mut counts = vec![0; self.n_bins];
        for r in &self.rows {
            counts[r.q1 as usize - 1] += 1;
        }
        counts
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        for r in &self.rows {
            w.serialize(r)?;
        }
        w.flush().map_err(|e| Error::io("<rank table>", e))?;
        Ok(())
    }

    /// Reads a table written by [`RankTable::write_csv`]. Bins are taken as
    /// written.
    pub fn read_csv<R: Read>(input: R, n_bins: usize) -> Result<Self> {
        let mut r = csv::Reader::from_reader(input);
        let rows = r.deserialize().collect::<std::result::Result<Vec<RankRow>, _>>()?;
        Self::from_rows(rows, n_bins)
    }
}

/// Column-stochastic matrix, `get(i, j)` = P(second bin = i | first bin = j)
/// with 0-based indices.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TransitionMatrix {
    n: usize,
    data: Vec<f64>,
    /// Authors per starting bin; empty for model matrices.
    pub column_counts: Vec<u64>,
    /// Starting bins with no authors, filled with a uniform column.
    pub empty_columns: Vec<usize>,
}

impl TransitionMatrix {
    /// Row-major data.
    pub fn from_data(n: usize, data: Vec<f64>) -> Result<Self> {
        if n == 0 || data.len() != n * n {
            return Err(Error::ShapeMismatch(format!(
                "{} entries for a {n}x{n} matrix",
                data.len()
            )));
        }
        Ok(Self {
            n,
            data,
            column_counts: Vec::new(),
            empty_columns: Vec::new(),
        })
    }

    pub fn identity(n: usize) -> Self {
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            data[i * n + i] = 1.0;
        }
        Self::from_data(n, data).expect("square by construction")
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn column_sum(&self, j: usize) -> f64 {
        (0..self.n).map(|i| self.get(i, j)).sum()
    }

    /// Errors unless every entry is non-negative and every column sums to
    /// 1 within `tol`.
    pub fn check_stochastic(&self, tol: f64) -> Result<()> {
        for j in 0..self.n {
            let sum = self.column_sum(j);
            let negative = (0..self.n).any(|i| !(self.get(i, j) >= 0.0));
            if negative || !((sum - 1.0).abs() <= tol) {
                return Err(Error::NotStochastic { column: j + 1, sum });
            }
        }
        Ok(())
    }

    pub fn max_abs_diff(&self, other: &TransitionMatrix) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    /// Frobenius norm of `self - other`.
    pub fn frobenius_distance(&self, other: &TransitionMatrix) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        write_square_csv(self.n, &self.data, out)
    }

    pub fn read_csv<R: Read>(input: R) -> Result<Self> {
        let (n, data) = read_square_csv(input)?;
        Self::from_data(n, data)
    }
}

fn normalize_counts(n: usize, counts: &[u64]) -> TransitionMatrix {
    let mut data = vec![0.0; n * n];
    let mut column_counts = vec![0u64; n];
    let mut empty_columns = Vec::new();
    for j in 0..n {
        let total: u64 = (0..n).map(|i| counts[i * n + j]).sum();
        column_counts[j] = total;
        if total == 0 {
            empty_columns.push(j + 1);
            for i in 0..n {
                data[i * n + j] = 1.0 / n as f64;
            }
        } else {
            for i in 0..n {
                data[i * n + j] = counts[i * n + j] as f64 / total as f64;
            }
        }
    }
    TransitionMatrix {
        n,
        data,
        column_counts,
        empty_columns,
    }
}

fn count_transitions(n: usize, pairs: impl Iterator<Item = (u8, u8)>) -> Vec<u64> {
    let mut counts = vec![0u64; n * n];
    for (q1, q2) in pairs {
        counts[(q2 as usize - 1) * n + (q1 as usize - 1)] += 1;
    }
    counts
}

/// Column-normalized transition counts. A starting bin with no authors gets
/// a uniform column and is listed in `empty_columns`.
pub fn transition_matrix(table: &RankTable) -> TransitionMatrix {
    let n = table.n_bins;
    let m = normalize_counts(n, &count_transitions(n, table.rows.iter().map(|r| (r.q1, r.q2))));
    if !m.empty_columns.is_empty() {
        log::warn!("transition matrix has empty starting bins {:?}", m.empty_columns);
    }
    m
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeltaQEntry {
    pub q: u8,
    pub count: u64,
    /// Mean of `q2 - q1`; `None` when the bin is empty.
    pub mean: Option<f64>,
    /// Standard error of the mean; `None` below two authors.
    pub sem: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeltaQProfile {
    pub entries: Vec<DeltaQEntry>,
}

impl DeltaQProfile {
    /// `(q, mean)` for populated bins.
    pub fn points(&self) -> Vec<(f64, f64)> {
        self.entries
            .iter()
            .filter_map(|e| e.mean.map(|m| (e.q as f64, m)))
            .collect()
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["q", "count", "mean_delta_q", "sem"])?;
        for e in &self.entries {
            let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
            w.write_record([e.q.to_string(), e.count.to_string(), opt(e.mean), opt(e.sem)])?;
        }
        w.flush().map_err(|e| Error::io("<delta q>", e))?;
        Ok(())
    }
}

/// Running sums of ΔQ per starting bin.
#[derive(Debug, Clone)]
struct DeltaQSums {
    count: Vec<u64>,
    sum: Vec<f64>,
    sum_sq: Vec<f64>,
}

impl DeltaQSums {
    fn new(n: usize) -> Self {
        Self {
            count: vec![0; n],
            sum: vec![0.0; n],
            sum_sq: vec![0.0; n],
        }
    }

    fn add(&mut self, q1: u8, q2: u8) {
        let j = q1 as usize - 1;
        let d = q2 as f64 - q1 as f64;
        self.count[j] += 1;
        self.sum[j] += d;
        self.sum_sq[j] += d * d;
    }

    fn mean(&self, j: usize) -> Option<f64> {
        (self.count[j] > 0).then(|| self.sum[j] / self.count[j] as f64)
    }

    fn sem(&self, j: usize) -> Option<f64> {
        let n = self.count[j];
        if n < 2 {
            return None;
        }
        let nf = n as f64;
        let mean = self.sum[j] / nf;
        let var = ((self.sum_sq[j] - nf * mean * mean) / (nf - 1.0)).max(0.0);
        Some((var / nf).sqrt())
    }

    fn profile(&self) -> DeltaQProfile {
        DeltaQProfile {
            entries: (0..self.count.len())
                .map(|j| DeltaQEntry {
                    q: (j + 1) as u8,
                    count: self.count[j],
                    mean: self.mean(j),
                    sem: self.sem(j),
                })
                .collect(),
        }
    }
}

/// Mean and standard error of `q2 - q1` per starting bin.
pub fn delta_q_profile(table: &RankTable) -> DeltaQProfile {
    let mut sums = DeltaQSums::new(table.n_bins);
    for r in &table.rows {
        sums.add(r.q1, r.q2);
    }
    sums.profile()
}

/// Averages over reshuffle repetitions.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NullModel {
    pub reps: usize,
    pub seed: u64,
    /// Per-bin mean ΔQ pooled over repetitions; `sem` is the average
    /// single-repetition standard error.
    pub delta_q: DeltaQProfile,
    pub transition: TransitionMatrix,
}

/// Reshuffle null model: second-window impacts are permuted across authors
/// and re-ranked, `n_reps` times.
///
/// Repetition `r` draws from stream `r` of a ChaCha8 generator seeded with
/// `seed`, so output does not depend on `exec`.
pub fn reshuffle_null(table: &RankTable, n_reps: usize, seed: u64, exec: Exec) -> Result<NullModel> {
    if n_reps == 0 {
        return Err(Error::InvalidInput("null model needs at least one repetition".into()));
    }
    let n = table.n_bins;
    let impact2: Vec<f64> = table.rows.iter().map(|r| r.impact2).collect();
    let q1: Vec<u8> = table.rows.iter().map(|r| r.q1).collect();

    let reps = exec.map_range(n_reps, |rep| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(rep as u64);
        let mut shuffled = impact2.clone();
        shuffled.shuffle(&mut rng);
        let q2 = assign_bins(&shuffled, n);
        let mut sums = DeltaQSums::new(n);
        for (&a, &b) in q1.iter().zip(&q2) {
            sums.add(a, b);
        }
        let counts = count_transitions(n, q1.iter().copied().zip(q2.iter().copied()));
        (sums, counts)
    });

    let mut pooled = DeltaQSums::new(n);
    let mut sem_total = vec![0.0; n];
    let mut sem_reps = vec![0usize; n];
    let mut counts = vec![0u64; n * n];
    for (sums, c) in &reps {
        for j in 0..n {
            pooled.count[j] += sums.count[j];
            pooled.sum[j] += sums.sum[j];
            pooled.sum_sq[j] += sums.sum_sq[j];
            if let Some(s) = sums.sem(j) {
                sem_total[j] += s;
                sem_reps[j] += 1;
            }
        }
        for (acc, v) in counts.iter_mut().zip(c) {
            *acc += v;
        }
    }
    let mut delta_q = pooled.profile();
    for (j, e) in delta_q.entries.iter_mut().enumerate() {
        e.count /= n_reps as u64;
        e.sem = (sem_reps[j] > 0).then(|| sem_total[j] / sem_reps[j] as f64);
    }
    // Starting bins are fixed across repetitions, so pooled counts normalize
    // to the average of the per-repetition matrices.
    let mut transition = normalize_counts(n, &counts);
    for c in transition.column_counts.iter_mut() {
        *c /= n_reps as u64;
    }
    Ok(NullModel {
        reps: n_reps,
        seed,
        delta_q,
        transition,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DeltaPMatrix {
    n: usize,
    data: Vec<f64>,
    /// Gap at (top, top).
    pub top_corner: f64,
    /// Gap at (bottom, bottom).
    pub bottom_corner: f64,
}

impl DeltaPMatrix {
    pub fn size(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn column_sum(&self, j: usize) -> f64 {
        (0..self.n).map(|i| self.get(i, j)).sum()
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        write_square_csv(self.n, &self.data, out)
    }
}

/// `empirical - model`, element-wise.
pub fn delta_p(empirical: &TransitionMatrix, model: &TransitionMatrix) -> Result<DeltaPMatrix> {
    if empirical.n != model.n {
        return Err(Error::ShapeMismatch(format!(
            "empirical is {0}x{0}, model is {1}x{1}",
            empirical.n, model.n
        )));
    }
    let n = empirical.n;
    let data: Vec<f64> = empirical.data.iter().zip(&model.data).map(|(a, b)| a - b).collect();
    Ok(DeltaPMatrix {
        n,
        top_corner: data[n * n - 1],
        bottom_corner: data[0],
        data,
    })
}
