//! Pearson correlation, least squares with confidence bands, two-sample
//! t-tests, and standard errors.
//!
//! Student's t probabilities come from the regularized incomplete beta
//! function, `P(|T| > t) = I_{df/(df+t^2)}(df/2, 1/2)`, evaluated with the
//! Lentz continued fraction.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

/// `ln Γ(x)` for `x > 0` (Lanczos, g = 7).
pub fn ln_gamma(x: f64) -> f64 {
    if x < 0.5 {
        // Reflection.
        let pi = std::f64::consts::PI;
        return (pi / (pi * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let t = x + 7.5;
    let mut sum = LANCZOS[0];
    for (k, c) in LANCZOS.iter().enumerate().skip(1) {
        sum += c / (x + k as f64);
    }
    0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * t.ln() - t + sum.ln()
}

fn beta_continued_fraction(a: f64, b: f64, x: f64) -> f64 {
    const MAX_ITER: usize = 500;
    const EPS: f64 = 1e-16;
    const TINY: f64 = 1e-300;
    let qab = a + b;
    let qap = a + 1.0;
    let qam = a - 1.0;
    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if d.abs() < TINY {
        d = TINY;
    }
    d = 1.0 / d;
    let mut h = d;
    for m in 1..=MAX_ITER {
        let m = m as f64;
        let m2 = 2.0 * m;
        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        h *= d * c;
        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < EPS {
            break;
        }
    }
    h
}

/// Regularized incomplete beta `I_x(a, b)`.
pub fn incomplete_beta(a: f64, b: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x >= 1.0 {
        return 1.0;
    }
    let ln_front = ln_gamma(a + b) - ln_gamma(a) - ln_gamma(b) + a * x.ln() + b * (1.0 - x).ln();
    let front = ln_front.exp();
    if x < (a + 1.0) / (a + b + 2.0) {
        front * beta_continued_fraction(a, b, x) / a
    } else {
        1.0 - front * beta_continued_fraction(b, a, 1.0 - x) / b
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StudentT {
    pub df: f64,
}

impl StudentT {
    pub fn new(df: f64) -> Result<Self> {
        if !(df > 0.0) {
            return Err(Error::InvalidInput(format!(
                "degrees of freedom must be positive, got {df}"
            )));
        }
        Ok(Self { df })
    }

    /// `P(|T| >= |t|)`.
    pub fn two_tailed_p(&self, t: f64) -> f64 {
        if t.is_nan() {
            return f64::NAN;
        }
        if t.is_infinite() {
            return 0.0;
        }
        let x = self.df / (self.df + t * t);
        incomplete_beta(0.5 * self.df, 0.5, x).clamp(0.0, 1.0)
    }

    pub fn cdf(&self, t: f64) -> f64 {
        let tail = 0.5 * self.two_tailed_p(t);
        if t >= 0.0 {
            1.0 - tail
        } else {
            tail
        }
    }

    /// Inverse CDF for `p` in (0, 1), by bisection on the tail probability.
    pub fn quantile(&self, p: f64) -> f64 {
        assert!(p > 0.0 && p < 1.0, "quantile needs p in (0, 1), got {p}");
        if p == 0.5 {
            return 0.0;
        }
        let target = 2.0 * p.min(1.0 - p);
        let mut hi = 1.0;
        while self.two_tailed_p(hi) > target {
            hi *= 2.0;
        }
        let mut lo = 0.0;
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if self.two_tailed_p(mid) > target {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo <= 1e-14 * hi {
                break;
            }
        }
        let t = 0.5 * (lo + hi);
        if p > 0.5 {
            t
        } else {
            -t
        }
    }
}

pub fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

/// Sample variance, `n - 1` denominator.
pub fn variance(values: &[f64]) -> f64 {
    let m = mean(values);
    values.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (values.len() as f64 - 1.0)
}

/// Sample standard deviation over `sqrt(n)`.
pub fn sem(values: &[f64]) -> Result<f64> {
    if values.len() < 2 {
        return Err(Error::InvalidInput("standard error needs at least 2 values".into()));
    }
    Ok((variance(values) / values.len() as f64).sqrt())
}

struct Moments {
    n: usize,
    x_mean: f64,
    y_mean: f64,
    sxx: f64,
    syy: f64,
    sxy: f64,
}

fn moments(x: &[f64], y: &[f64]) -> Result<Moments> {
    if x.len() != y.len() {
        return Err(Error::ShapeMismatch(format!(
            "x has {} values, y has {}",
            x.len(),
            y.len()
        )));
    }
    if x.len() < 3 {
        return Err(Error::InvalidInput(format!("need at least 3 points, got {}", x.len())));
    }
    let (x_mean, y_mean) = (mean(x), mean(y));
    let (mut sxx, mut syy, mut sxy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - x_mean, b - y_mean);
        sxx += dx * dx;
        syy += dy * dy;
        sxy += dx * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::UndefinedCorrelation("zero variance"));
    }
    Ok(Moments {
        n: x.len(),
        x_mean,
        y_mean,
        sxx,
        syy,
        sxy,
    })
}

fn correlation_p(r: f64, n: usize) -> f64 {
    let df = (n - 2) as f64;
    if r.abs() >= 1.0 {
        return 0.0;
    }
    let t = r * (df / (1.0 - r * r)).sqrt();
    StudentT { df }.two_tailed_p(t)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Correlation {
    pub r: f64,
    pub p: f64,
    pub n: usize,
}

/// Sample Pearson `r` with a two-tailed p-value on `n - 2` degrees of freedom.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<Correlation> {
    let m = moments(x, y)?;
    let r = (m.sxy / (m.sxx * m.syy).sqrt()).clamp(-1.0, 1.0);
    Ok(Correlation {
        r,
        p: correlation_p(r, m.n),
        n: m.n,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressionResult {
    pub slope: f64,
    pub intercept: f64,
    pub pearson_r: f64,
    pub p_value: f64,
    pub n: usize,
    pub confidence: f64,
    pub x_mean: f64,
    pub sxx: f64,
    /// Residual standard error, `sqrt(SSE / (n - 2))`.
    pub residual_se: f64,
    /// Two-sided t quantile for `confidence` on `n - 2` df.
    pub t_critical: f64,
}

impl RegressionResult {
    pub fn predict(&self, x: f64) -> f64 {
        self.intercept + self.slope * x
    }

    /// Half-width of the mean-response confidence band at `x`.
    pub fn band_half_width(&self, x: f64) -> f64 {
        let dx = x - self.x_mean;
        self.t_critical * self.residual_se * (1.0 / self.n as f64 + dx * dx / self.sxx).sqrt()
    }

    pub fn band(&self, x: f64) -> (f64, f64) {
        let (y, h) = (self.predict(x), self.band_half_width(x));
        (y - h, y + h)
    }
}

/// Ordinary least squares with a pointwise confidence band for the mean
/// response.
pub fn ols_with_band(x: &[f64], y: &[f64], confidence: f64) -> Result<RegressionResult> {
    if !(confidence > 0.0 && confidence < 1.0) {
        return Err(Error::InvalidInput(format!(
            "confidence must be in (0, 1), got {confidence}"
        )));
    }
    let m = moments(x, y)?;
    let slope = m.sxy / m.sxx;
    let intercept = m.y_mean - slope * m.x_mean;
    let sse = x
        .iter()
        .zip(y)
        .map(|(a, b)| {
            let e = b - (intercept + slope * a);
            e * e
        })
        .sum::<f64>();
    let df = (m.n - 2) as f64;
    let r = (m.sxy / (m.sxx * m.syy).sqrt()).clamp(-1.0, 1.0);
    Ok(RegressionResult {
        slope,
        intercept,
        pearson_r: r,
        p_value: correlation_p(r, m.n),
        n: m.n,
        confidence,
        x_mean: m.x_mean,
        sxx: m.sxx,
        residual_se: (sse / df).sqrt(),
        t_critical: StudentT { df }.quantile(0.5 + 0.5 * confidence),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TTestKind {
    /// Unequal variances, Welch–Satterthwaite degrees of freedom.
    #[default]
    Welch,
    /// Pooled variance, `n_a + n_b - 2` degrees of freedom.
    Pooled,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TTest {
    pub t: f64,
    pub df: f64,
    pub p: f64,
    pub kind: TTestKind,
}

/// Two-sample, two-tailed t-test of equal means.
///
/// When both samples have zero variance the statistic is degenerate: equal
/// means give `t = 0, p = 1`, different means give `t = ±inf, p = 0`.
pub fn ttest_two_tailed(a: &[f64], b: &[f64], kind: TTestKind) -> Result<TTest> {
    if a.len() < 2 || b.len() < 2 {
        return Err(Error::InvalidInput("t-test needs at least 2 values per sample".into()));
    }
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (ma, mb) = (mean(a), mean(b));
    let (va, vb) = (variance(a), variance(b));
    let diff = ma - mb;
    let (se, df) = match kind {
        TTestKind::Welch => {
            let (ua, ub) = (va / na, vb / nb);
            let se2 = ua + ub;
            let df = if se2 > 0.0 {
                se2 * se2 / (ua * ua / (na - 1.0) + ub * ub / (nb - 1.0))
            } else {
                na + nb - 2.0
            };
            (se2.sqrt(), df)
        }
        TTestKind::Pooled => {
            let df = na + nb - 2.0;
            let sp2 = ((na - 1.0) * va + (nb - 1.0) * vb) / df;
            ((sp2 * (1.0 / na + 1.0 / nb)).sqrt(), df)
        }
    };
    if se == 0.0 {
        let (t, p) = if diff == 0.0 {
            (0.0, 1.0)
        } else {
            (f64::INFINITY.copysign(diff), 0.0)
        };
        return Ok(TTest { t, df, p, kind });
    }
    let t = diff / se;
    Ok(TTest {
        t,
        df,
        p: StudentT { df }.two_tailed_p(t),
        kind,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use statrs::distribution::{ContinuousCDF, StudentsT};

    fn oracle_two_tailed(t: f64, df: f64) -> f64 {
        2.0 * (1.0 - StudentsT::new(0.0, 1.0, df).unwrap().cdf(t.abs()))
    }

    #[test]
    fn ln_gamma_known_values() {
        assert!((ln_gamma(1.0)).abs() < 1e-14);
        assert!((ln_gamma(0.5) - std::f64::consts::PI.sqrt().ln()).abs() < 1e-14);
        assert!((ln_gamma(10.0) - 362_880f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn t_tail_matches_statrs() {
        for &df in &[1.0, 2.5, 5.0, 8.0, 30.0, 100.0] {
            for &t in &[0.0, 0.3, 1.0, 2.0, 3.5, 8.0] {
                let ours = StudentT { df }.two_tailed_p(t);
                assert!((ours - oracle_two_tailed(t, df)).abs() < 1e-10, "df={df} t={t}");
            }
        }
    }

    #[test]
    fn critical_values() {
        for &(df, crit) in &[
            (1.0, 12.7062),
            (5.0, 2.5706),
            (8.0, 2.3060),
            (30.0, 2.0423),
            (100.0, 1.9840),
        ] {
            let q = StudentT { df }.quantile(0.975);
            assert!((q - crit).abs() < 5e-5, "df={df}: {q}");
        }
    }

    #[test]
    fn pearson_cases() {
        let x = [1.0, 2.0, 3.0, 4.0, 5.0];
        let y: Vec<f64> = x.iter().map(|v| 2.0 * v + 1.0).collect();
        let c = pearson(&x, &y).unwrap();
        assert!((c.r - 1.0).abs() < 1e-15);
        assert!(c.p < 1e-12);

        let c = pearson(&[1.0, 2.0, 3.0], &[1.0, 3.0, 2.0]).unwrap();
        assert!((c.r - 0.5).abs() < 1e-15);

        assert!(matches!(
            pearson(&[1.0, 1.0, 1.0], &[1.0, 2.0, 3.0]),
            Err(Error::UndefinedCorrelation(_))
        ));
        assert!(pearson(&[1.0, 2.0], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn ols_hand_case() {
        let r = ols_with_band(&[0.0, 1.0, 2.0], &[0.0, 0.0, 3.0], 0.95).unwrap();
        assert!((r.slope - 1.5).abs() < 1e-15);
        assert!((r.intercept + 0.5).abs() < 1e-15);
    }

    #[test]
    fn exact_line_has_zero_band() {
        let x = [0.0, 1.0, 2.0, 3.0];
        let y = [1.0, 3.0, 5.0, 7.0];
        let r = ols_with_band(&x, &y, 0.95).unwrap();
        for xv in [-1.0, 0.5, 4.0] {
            assert!(r.band_half_width(xv) < 1e-12);
        }
    }

    #[test]
    fn band_is_narrowest_at_mean() {
        let x = [1.0, 2.0, 4.0, 7.0, 8.0];
        let y = [2.0, 2.5, 4.5, 6.0, 9.5];
        let r = ols_with_band(&x, &y, 0.95).unwrap();
        let at_mean = r.band_half_width(r.x_mean);
        for k in 1..20 {
            let dx = k as f64 * 0.37;
            assert!(r.band_half_width(r.x_mean + dx) > at_mean);
            assert!(r.band_half_width(r.x_mean - dx) > at_mean);
        }
    }

    #[test]
    fn welch_hand_case() {
        // Both variances 1, n = 3: se = sqrt(2/3), df = 4.
        let t = ttest_two_tailed(&[1.0, 2.0, 3.0], &[2.0, 3.0, 4.0], TTestKind::Welch).unwrap();
        assert!((t.t + 1.0 / (2.0f64 / 3.0).sqrt()).abs() < 1e-14);
        assert!((t.df - 4.0).abs() < 1e-12);
        assert!((t.p - oracle_two_tailed(t.t, 4.0)).abs() < 1e-10);
    }

    #[test]
    fn ttest_edge_cases() {
        let a = [1.0, 2.0, 3.0, 4.0];
        let t = ttest_two_tailed(&a, &a, TTestKind::Welch).unwrap();
        assert_eq!((t.t, t.p), (0.0, 1.0));
        let c = [5.0, 5.0];
        let t = ttest_two_tailed(&c, &c, TTestKind::Welch).unwrap();
        assert_eq!((t.t, t.p), (0.0, 1.0));
        let far: Vec<f64> = (0..30).map(|i| 100.0 + (i % 5) as f64).collect();
        let near: Vec<f64> = (0..30).map(|i| (i % 5) as f64).collect();
        assert!(ttest_two_tailed(&far, &near, TTestKind::Welch).unwrap().p < 0.001);
        assert!(ttest_two_tailed(&far, &near, TTestKind::Pooled).unwrap().p < 0.001);
        assert!(ttest_two_tailed(&[1.0], &near, TTestKind::Welch).is_err());
    }

    #[test]
    fn sem_cases() {
        assert_eq!(sem(&[3.0, 3.0, 3.0]).unwrap(), 0.0);
        assert!((sem(&[0.0, 2.0]).unwrap() - 1.0).abs() < 1e-15);
        assert!(sem(&[1.0]).is_err());
    }

    proptest! {
        #[test]
        fn pearson_affine_invariance(
            pts in proptest::collection::vec((-100.0f64..100.0, -100.0f64..100.0), 3..40),
            scale in 0.1f64..10.0,
            shift in -50.0f64..50.0,
        ) {
            let x: Vec<f64> = pts.iter().map(|p| p.0).collect();
            let y: Vec<f64> = pts.iter().map(|p| p.1).collect();
            if let Ok(base) = pearson(&x, &y) {
                let xs: Vec<f64> = x.iter().map(|v| scale * v + shift).collect();
                let neg: Vec<f64> = y.iter().map(|v| -scale * v).collect();
                prop_assert!((pearson(&xs, &y).unwrap().r - base.r).abs() < 1e-9);
                prop_assert!((pearson(&x, &neg).unwrap().r + base.r).abs() < 1e-9);
                prop_assert!(base.p > 0.0 || base.r.abs() > 1.0 - 1e-12);
                prop_assert!(base.p <= 1.0);
            }
        }

        #[test]
        fn slope_times_variance_is_covariance(
            pts in proptest::collection::vec((-10.0f64..10.0, -10.0f64..10.0), 3..40),
        ) {
            let x: Vec<f64> = pts.iter().map(|p| p.0).collect();
            let y: Vec<f64> = pts.iter().map(|p| p.1).collect();
            if let Ok(r) = ols_with_band(&x, &y, 0.95) {
                let (mx, my) = (mean(&x), mean(&y));
                let cov: f64 = x.iter().zip(&y).map(|(a, b)| (a - mx) * (b - my)).sum();
                prop_assert!((r.slope * r.sxx - cov).abs() < 1e-12 * (1.0 + cov.abs()));
            }
        }

        #[test]
        fn p_decreases_in_abs_t(df in 1.0f64..200.0, t in 0.0f64..20.0, dt in 1e-3f64..5.0) {
            let dist = StudentT { df };
            prop_assert!(dist.two_tailed_p(t + dt) <= dist.two_tailed_p(t));
        }

        #[test]
        fn sem_is_shift_invariant(xs in proptest::collection::vec(-1e3f64..1e3, 2..50), c in -1e3f64..1e3) {
            let shifted: Vec<f64> = xs.iter().map(|v| v + c).collect();
            prop_assert!((sem(&xs).unwrap() - sem(&shifted).unwrap()).abs() < 1e-9);
        }
    }
}
