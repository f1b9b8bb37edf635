//! Statistics used by the analysis pipeline: fitness-distance correlation,
//! least-squares trends, paired tests, kernel density estimates and
//! normal quantile tables.

use std::f64::consts::{PI, SQRT_2};
use std::fmt;

use crate::error::{Error, Result};

/// Largest effective sample size for which signed-rank p-values are enumerated exactly.
pub const SIGNED_RANK_EXACT_MAX: usize = 30;

/// Number of points on a KDE evaluation grid.
pub const KDE_GRID_POINTS: usize = 256;

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Fitness-distance correlation using population (1/n) moments.
pub fn fdc(utilities: &[f64], distances: &[f64]) -> Result<f64> {
    if utilities.len() != distances.len() {
        return Err(Error::DimensionMismatch {
            expected: utilities.len(),
            got: distances.len(),
        });
    }
    let n = utilities.len();
    if n < 2 {
        return Err(Error::Domain("fdc needs at least two points".into()));
    }
    let mu = mean(utilities);
    let md = mean(distances);
    let nf = n as f64;
    let mut cov = 0.0;
    let mut vu = 0.0;
    let mut vd = 0.0;
    for (u, d) in utilities.iter().zip(distances) {
        let (du, dd) = (u - mu, d - md);
        cov += du * dd;
        vu += du * du;
        vd += dd * dd;
    }
    let (su, sd) = ((vu / nf).sqrt(), (vd / nf).sqrt());
    if su == 0.0 {
        return Err(Error::Degenerate("utilities have zero spread (flat landscape)"));
    }
    if sd == 0.0 {
        return Err(Error::Degenerate("distances have zero spread"));
    }
    Ok((cov / nf / (su * sd)).clamp(-1.0, 1.0))
}

/// Ordinary least-squares line.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    /// Standard error of the slope; zero when the fit is exact or n = 2.
    pub slope_stderr: f64,
    pub n: usize,
}

impl LinearFit {
    /// Two-sided p-value for a zero slope (Student t, n - 2 degrees of freedom).
    /// `None` with fewer than three points.
    pub fn slope_p_value(&self) -> Option<f64> {
        if self.n < 3 {
            return None;
        }
        if self.slope_stderr == 0.0 {
            return Some(if self.slope == 0.0 { 1.0 } else { 0.0 });
        }
        let t = self.slope / self.slope_stderr;
        Some(student_t_two_sided(t, (self.n - 2) as f64))
    }
}

pub fn linreg(xs: &[f64], ys: &[f64]) -> Result<LinearFit> {
    if xs.len() != ys.len() {
        return Err(Error::DimensionMismatch {
            expected: xs.len(),
            got: ys.len(),
        });
    }
    let n = xs.len();
    if n < 2 {
        return Err(Error::Domain("regression needs at least two points".into()));
    }
    let mx = mean(xs);
    let my = mean(ys);
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    if sxx == 0.0 {
        return Err(Error::Degenerate("regressor values are all equal"));
    }
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let slope_stderr = if n > 2 {
        let sse: f64 = xs
            .iter()
            .zip(ys)
            .map(|(x, y)| (y - intercept - slope * x).powi(2))
            .sum();
        (sse / (n - 2) as f64 / sxx).sqrt()
    } else {
        0.0
    };
    Ok(LinearFit {
        slope,
        intercept,
        slope_stderr,
        n,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TestMethod {
    PairedT,
    SignedRankExact,
    SignedRankNormal,
}

impl fmt::Display for TestMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TestMethod::PairedT => "paired-t",
            TestMethod::SignedRankExact => "signed-rank-exact",
            TestMethod::SignedRankNormal => "signed-rank-normal",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TestReport {
    /// `None` when the statistic is undefined (all differences zero).
    pub statistic: Option<f64>,
    pub p_value: f64,
    pub n: usize,
    pub method: TestMethod,
}

fn paired_differences(xs: &[f64], ys: &[f64]) -> Result<Vec<f64>> {
    if xs.len() != ys.len() {
        return Err(Error::DimensionMismatch {
            expected: xs.len(),
            got: ys.len(),
        });
    }
    Ok(xs.iter().zip(ys).map(|(x, y)| x - y).collect())
}

/// Two-sided paired t-test of `xs - ys` against zero.
pub fn paired_t(xs: &[f64], ys: &[f64]) -> Result<TestReport> {
    let d = paired_differences(xs, ys)?;
    let n = d.len();
    if n < 2 {
        return Err(Error::Domain("paired t-test needs at least two pairs".into()));
    }
    let md = mean(&d);
    let var = d.iter().map(|x| (x - md).powi(2)).sum::<f64>() / (n - 1) as f64;
    let sd = var.sqrt();
    if sd == 0.0 {
        // constant differences: zero gives no evidence, any other constant is infinitely significant
        let (statistic, p_value) = if md == 0.0 {
            (None, 1.0)
        } else {
            (Some(md.signum() * f64::INFINITY), 0.0)
        };
        return Ok(TestReport {
            statistic,
            p_value,
            n,
            method: TestMethod::PairedT,
        });
    }
    let t = md / (sd / (n as f64).sqrt());
    Ok(TestReport {
        statistic: Some(t),
        p_value: student_t_two_sided(t, (n - 1) as f64),
        n,
        method: TestMethod::PairedT,
    })
}

/// Midranks of the absolute values, doubled so that tied ranks stay integral.
fn doubled_midranks(abs: &[f64]) -> Vec<u64> {
    let mut order: Vec<usize> = (0..abs.len()).collect();
    order.sort_by(|&a, &b| abs[a].total_cmp(&abs[b]));
    let mut ranks = vec![0u64; abs.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && abs[order[j + 1]] == abs[order[i]] {
            j += 1;
        }
        // ranks i+1..=j+1 share their mean; doubled: (i + 1) + (j + 1)
        let doubled = (i + j + 2) as u64;
        for &k in &order[i..=j] {
            ranks[k] = doubled;
        }
        i = j + 1;
    }
    ranks
}

/// Exact null distribution of the doubled positive-rank sum for the given
/// doubled ranks, as probabilities indexed by the doubled sum.
pub fn signed_rank_null_distribution(doubled_ranks: &[u64]) -> Vec<f64> {
    let total: u64 = doubled_ranks.iter().sum();
    let mut counts = vec![0.0f64; total as usize + 1];
    counts[0] = 1.0;
    let mut reach = 0usize;
    for &r in doubled_ranks {
        let r = r as usize;
        for s in (0..=reach).rev() {
            if counts[s] != 0.0 {
                counts[s + r] += counts[s];
            }
        }
        reach += r;
    }
    let scale = 0.5f64.powi(doubled_ranks.len() as i32);
    counts.iter().map(|c| c * scale).collect()
}

/// Exact distribution of W+ for `n` untied observations (ranks 1..=n).
pub fn signed_rank_exact_distribution(n: usize) -> Vec<f64> {
    let doubled: Vec<u64> = (1..=n as u64).map(|r| 2 * r).collect();
    signed_rank_null_distribution(&doubled)
        .into_iter()
        .step_by(2)
        .collect()
}

struct RankedDifferences {
    doubled_ranks: Vec<u64>,
    doubled_w_plus: u64,
    doubled_w_minus: u64,
}

fn rank_differences(xs: &[f64], ys: &[f64]) -> Result<Option<RankedDifferences>> {
    let d: Vec<f64> = paired_differences(xs, ys)?
        .into_iter()
        .filter(|x| *x != 0.0)
        .collect();
    if d.is_empty() {
        return Ok(None);
    }
    let abs: Vec<f64> = d.iter().map(|x| x.abs()).collect();
    let doubled_ranks = doubled_midranks(&abs);
    let mut plus = 0;
    let mut minus = 0;
    for (x, r) in d.iter().zip(&doubled_ranks) {
        if *x > 0.0 {
            plus += r;
        } else {
            minus += r;
        }
    }
    Ok(Some(RankedDifferences {
        doubled_ranks,
        doubled_w_plus: plus,
        doubled_w_minus: minus,
    }))
}

fn degenerate_signed_rank(n: usize) -> TestReport {
    TestReport {
        statistic: None,
        p_value: 1.0,
        n,
        method: TestMethod::SignedRankExact,
    }
}

/// Two-sided Wilcoxon signed-rank test on `xs - ys`; the statistic is
/// `min(W+, W-)`. Zero differences are dropped, ties receive midranks.
/// Exact for up to [`SIGNED_RANK_EXACT_MAX`] non-zero differences, normal
/// approximation with continuity correction beyond.
pub fn signed_rank(xs: &[f64], ys: &[f64]) -> Result<TestReport> {
    let Some(ranked) = rank_differences(xs, ys)? else {
        return Ok(degenerate_signed_rank(0));
    };
    if ranked.doubled_ranks.len() <= SIGNED_RANK_EXACT_MAX {
        Ok(exact_report(&ranked))
    } else {
        Ok(normal_report(&ranked))
    }
}

/// Signed-rank test forced onto the normal approximation.
pub fn signed_rank_normal(xs: &[f64], ys: &[f64]) -> Result<TestReport> {
    Ok(match rank_differences(xs, ys)? {
        Some(ranked) => normal_report(&ranked),
        None => degenerate_signed_rank(0),
    })
}

fn exact_report(ranked: &RankedDifferences) -> TestReport {
    let dist = signed_rank_null_distribution(&ranked.doubled_ranks);
    let w = ranked.doubled_w_plus.min(ranked.doubled_w_minus) as usize;
    let lower: f64 = dist[..=w].iter().sum();
    TestReport {
        statistic: Some(w as f64 / 2.0),
        p_value: (2.0 * lower).min(1.0),
        n: ranked.doubled_ranks.len(),
        method: TestMethod::SignedRankExact,
    }
}

fn normal_report(ranked: &RankedDifferences) -> TestReport {
    let n = ranked.doubled_ranks.len() as f64;
    let w = ranked.doubled_w_plus.min(ranked.doubled_w_minus) as f64 / 2.0;
    let mu = n * (n + 1.0) / 4.0;
    // tie correction: sum over tie groups of (t^3 - t) / 48
    let mut sorted = ranked.doubled_ranks.clone();
    sorted.sort_unstable();
    let mut tie_term = 0.0;
    for group in sorted.chunk_by(|a, b| a == b) {
        let t = group.len() as f64;
        tie_term += (t * t * t - t) / 48.0;
    }
    let sigma = (n * (n + 1.0) * (2.0 * n + 1.0) / 24.0 - tie_term).sqrt();
    let z = ((w - mu).abs() - 0.5).max(0.0) / sigma;
    TestReport {
        statistic: Some(w),
        p_value: (2.0 * normal_sf(z)).min(1.0),
        n: ranked.doubled_ranks.len(),
        method: TestMethod::SignedRankNormal,
    }
}

/// Sample standard deviation (n - 1); `None` below two samples.
pub fn sample_sd(xs: &[f64]) -> Option<f64> {
    if xs.len() < 2 {
        return None;
    }
    let m = mean(xs);
    Some((xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (xs.len() - 1) as f64).sqrt())
}

/// Rule-of-thumb bandwidth `1.06 sd n^(-1/5)`; `None` when the spread is zero.
pub fn silverman_bandwidth(samples: &[f64]) -> Option<f64> {
    let sd = sample_sd(samples)?;
    (sd > 0.0).then(|| 1.06 * sd * (samples.len() as f64).powf(-0.2))
}

/// Gaussian kernel density estimate.
#[derive(Debug, Clone, PartialEq)]
pub struct Kde {
    samples: Vec<f64>,
    bandwidth: f64,
}

impl Kde {
    pub fn new(samples: &[f64], bandwidth: f64) -> Result<Self> {
        if samples.is_empty() || !(bandwidth > 0.0) || samples.iter().any(|s| !s.is_finite()) {
            return Err(Error::Domain(
                "kde needs finite samples and a positive bandwidth".into(),
            ));
        }
        Ok(Kde {
            samples: samples.to_vec(),
            bandwidth,
        })
    }

    pub fn bandwidth(&self) -> f64 {
        self.bandwidth
    }

    pub fn density(&self, x: f64) -> f64 {
        let h = self.bandwidth;
        let norm = 1.0 / ((2.0 * PI).sqrt() * h * self.samples.len() as f64);
        self.samples
            .iter()
            .map(|s| (-0.5 * ((x - s) / h).powi(2)).exp())
            .sum::<f64>()
            * norm
    }

    /// Evaluates on evenly spaced points from `min - 3h` to `max + 3h`.
    pub fn grid(&self) -> Vec<(f64, f64)> {
        let lo = self.samples.iter().copied().fold(f64::INFINITY, f64::min) - 3.0 * self.bandwidth;
        let hi = self.samples.iter().copied().fold(f64::NEG_INFINITY, f64::max) + 3.0 * self.bandwidth;
        let step = (hi - lo) / (KDE_GRID_POINTS - 1) as f64;
        (0..KDE_GRID_POINTS)
            .map(|i| {
                let x = lo + step * i as f64;
                (x, self.density(x))
            })
            .collect()
    }
}

pub fn gaussian_kde(samples: &[f64], bandwidth: f64) -> Result<Vec<(f64, f64)>> {
    Ok(Kde::new(samples, bandwidth)?.grid())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuantileRow {
    pub position: f64,
    pub sample: f64,
    pub normal: f64,
}

/// Sorted samples against standard normal quantiles at `(i - 0.5) / n`.
pub fn quantile_table(samples: &[f64]) -> Result<Vec<QuantileRow>> {
    if samples.len() < 2 {
        return Err(Error::Domain("quantile table needs at least two samples".into()));
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    Ok(sorted
        .into_iter()
        .enumerate()
        .map(|(i, sample)| {
            let position = (i as f64 + 0.5) / n;
            QuantileRow {
                position,
                sample,
                normal: normal_quantile(position),
            }
        })
        .collect())
}

// ---------------------------------------------------------------------------
// Special functions

const EPS: f64 = 1e-16;
const FPMIN: f64 = 1e-300;
const MAX_ITER: usize = 1000;

/// Natural log of the gamma function (Lanczos, g = 7, n = 9), for x > 0.
pub fn ln_gamma(x: f64) -> f64 {
    const G: f64 = 7.0;
    const COEF: [f64; 9] = [
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
    if x < 0.5 {
        // reflection
        return (PI / (PI * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut a = COEF[0];
    let t = x + G + 0.5;
    for (i, c) in COEF.iter().enumerate().skip(1) {
        a += c / (x + i as f64);
    }
    0.5 * (2.0 * PI).ln() + (x + 0.5) * t.ln() - t + a.ln()
}

/// Continued fraction for the incomplete beta function (modified Lentz).
fn beta_continued_fraction(a: f64, b: f64, x: f64) -> f64 {
    let qab = a + b;
    let qap = a + 1.0;
    let qam = a - 1.0;
    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if d.abs() < FPMIN {
        d = FPMIN;
    }
    d = 1.0 / d;
    let mut h = d;
    for m in 1..=MAX_ITER {
        let m = m as f64;
        let m2 = 2.0 * m;
        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if d.abs() < FPMIN {
            d = FPMIN;
        }
        c = 1.0 + aa / c;
        if c.abs() < FPMIN {
            c = FPMIN;
        }
        d = 1.0 / d;
        h *= d * c;
        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if d.abs() < FPMIN {
            d = FPMIN;
        }
        c = 1.0 + aa / c;
        if c.abs() < FPMIN {
            c = FPMIN;
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

/// Regularized incomplete beta function I_x(a, b).
pub fn regularized_incomplete_beta(a: f64, b: f64, x: f64) -> f64 {
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

/// Student t cumulative distribution with `df` degrees of freedom.
pub fn student_t_cdf(t: f64, df: f64) -> f64 {
    if t.is_infinite() {
        return if t > 0.0 { 1.0 } else { 0.0 };
    }
    let tail = 0.5 * regularized_incomplete_beta(0.5 * df, 0.5, df / (df + t * t));
    if t > 0.0 {
        1.0 - tail
    } else {
        tail
    }
}

pub fn student_t_two_sided(t: f64, df: f64) -> f64 {
    if t.is_infinite() {
        return 0.0;
    }
    regularized_incomplete_beta(0.5 * df, 0.5, df / (df + t * t)).min(1.0)
}

/// Regularized lower incomplete gamma P(a, x) by series, valid for x < a + 1.
fn gamma_p_series(a: f64, x: f64) -> f64 {
    let mut sum = 1.0 / a;
    let mut del = sum;
    let mut ap = a;
    for _ in 0..MAX_ITER {
        ap += 1.0;
        del *= x / ap;
        sum += del;
        if del.abs() < sum.abs() * EPS {
            break;
        }
    }
    sum * (-x + a * x.ln() - ln_gamma(a)).exp()
}

/// Regularized upper incomplete gamma Q(a, x) by continued fraction, valid for x >= a + 1.
fn gamma_q_continued_fraction(a: f64, x: f64) -> f64 {
    let mut b = x + 1.0 - a;
    let mut c = 1.0 / FPMIN;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..=MAX_ITER {
        let an = -(i as f64) * (i as f64 - a);
        b += 2.0;
        d = an * d + b;
        if d.abs() < FPMIN {
            d = FPMIN;
        }
        c = b + an / c;
        if c.abs() < FPMIN {
            c = FPMIN;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < EPS {
            break;
        }
    }
    (-x + a * x.ln() - ln_gamma(a)).exp() * h
}

/// Complementary error function.
pub fn erfc(x: f64) -> f64 {
    if x < 0.0 {
        return 2.0 - erfc(-x);
    }
    let z = x * x;
    if z < 1.5 {
        1.0 - gamma_p_series(0.5, z)
    } else {
        gamma_q_continued_fraction(0.5, z)
    }
}

pub fn normal_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / SQRT_2)
}

/// Upper tail 1 - Phi(z), accurate far into the tail.
pub fn normal_sf(z: f64) -> f64 {
    0.5 * erfc(z / SQRT_2)
}

/// Inverse standard normal CDF: rational approximation refined by one Halley step.
pub fn normal_quantile(p: f64) -> f64 {
    if p <= 0.0 {
        return f64::NEG_INFINITY;
    }
    if p >= 1.0 {
        return f64::INFINITY;
    }
    const A: [f64; 6] = [
        -3.969_683_028_665_376e1,
        2.209_460_984_245_205e2,
        -2.759_285_104_469_687e2,
        1.383_577_518_672_69e2,
        -3.066_479_806_614_716e1,
        2.506_628_277_459_239,
    ];
    const B: [f64; 5] = [
        -5.447_609_879_822_406e1,
        1.615_858_368_580_409e2,
        -1.556_989_798_598_866e2,
        6.680_131_188_771_972e1,
        -1.328_068_155_288_572e1,
    ];
    const C: [f64; 6] = [
        -7.784_894_002_430_293e-3,
        -3.223_964_580_411_365e-1,
        -2.400_758_277_161_838,
        -2.549_732_539_343_734,
        4.374_664_141_464_968,
        2.938_163_982_698_783,
    ];
    const D: [f64; 4] = [
        7.784_695_709_041_462e-3,
        3.224_671_290_700_398e-1,
        2.445_134_137_142_996,
        3.754_408_661_907_416,
    ];
    const P_LOW: f64 = 0.024_25;
    let x = if p < P_LOW {
        let q = (-2.0 * p.ln()).sqrt();
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    } else if p <= 1.0 - P_LOW {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    } else {
        let q = (-2.0 * (1.0 - p).ln()).sqrt();
        -(((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    };
    let e = normal_cdf(x) - p;
    let u = e * (2.0 * PI).sqrt() * (0.5 * x * x).exp();
    x - u / (1.0 + 0.5 * x * u)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn fdc_extremes() {
        let d = [0.1, 0.4, 0.2, 0.9, 0.5];
        let neg: Vec<f64> = d.iter().map(|x| -x).collect();
        assert!((fdc(&neg, &d).unwrap() + 1.0).abs() < 1e-12);
        assert!((fdc(&d, &d).unwrap() - 1.0).abs() < 1e-12);
        assert!(matches!(fdc(&[1.0, 1.0], &[0.0, 2.0]), Err(Error::Degenerate(_))));
        assert!(matches!(fdc(&[1.0, 2.0], &[3.0, 3.0]), Err(Error::Degenerate(_))));
        assert!(fdc(&[1.0], &[1.0]).is_err());
        assert!(fdc(&[1.0, 2.0], &[1.0]).is_err());
    }

    #[test]
    fn linreg_exact_and_flat() {
        let xs: Vec<f64> = (0..10).map(f64::from).collect();
        let ys: Vec<f64> = xs.iter().map(|x| 2.0 * x + 3.0).collect();
        let fit = linreg(&xs, &ys).unwrap();
        assert!((fit.slope - 2.0).abs() < 1e-12);
        assert!((fit.intercept - 3.0).abs() < 1e-12);
        let flat = linreg(&xs, &[4.0; 10]).unwrap();
        assert_eq!(flat.slope, 0.0);
        assert_eq!(flat.slope_p_value(), Some(1.0));
        assert!(linreg(&[1.0, 1.0], &[0.0, 1.0]).is_err());
    }

    #[test]
    fn paired_t_cancelling_differences() {
        let ys = [0.0; 6];
        let xs = [1.0, -1.0, 1.0, -1.0, 1.0, -1.0];
        let r = paired_t(&xs, &ys).unwrap();
        assert_eq!(r.statistic, Some(0.0));
        assert!((r.p_value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn paired_t_constant_shift_edge() {
        let ys: Vec<f64> = (0..30).map(|i| (i as f64 * 0.37).sin()).collect();
        let xs: Vec<f64> = ys.iter().map(|y| y + 1.0).collect();
        let r = paired_t(&xs, &ys).unwrap();
        // differences equal 1 up to rounding; either the exact guard or an enormous t
        assert!(r.p_value < 1e-12, "{r:?}");
        let same = paired_t(&ys, &ys).unwrap();
        assert_eq!(same.statistic, None);
        assert_eq!(same.p_value, 1.0);
    }

    #[test]
    fn signed_rank_small_exact_cases() {
        let r = signed_rank(&[2.0], &[1.0]).unwrap();
        assert_eq!(r.p_value, 1.0);
        let r = signed_rank(&[1.0, 2.0, 3.0, 4.0, 5.0], &[0.0; 5]).unwrap();
        assert_eq!(r.statistic, Some(0.0));
        assert!((r.p_value - 2.0 / 32.0).abs() < 1e-15);
        let r = signed_rank(&[1.0, 2.0], &[1.0, 2.0]).unwrap();
        assert_eq!((r.statistic, r.p_value), (None, 1.0));
    }

    #[test]
    fn midranks_for_ties() {
        assert_eq!(doubled_midranks(&[1.0, 2.0, 2.0, 5.0]), vec![2, 5, 5, 8]);
    }

    #[test]
    fn exact_distribution_sums_to_one() {
        for n in 0..=12 {
            let total: f64 = signed_rank_exact_distribution(n).iter().sum();
            assert!((total - 1.0).abs() < 1e-14, "n={n}");
        }
    }

    #[test]
    fn special_function_spot_values() {
        assert!((ln_gamma(5.0) - 24f64.ln()).abs() < 1e-13);
        assert!((ln_gamma(0.5) - PI.sqrt().ln()).abs() < 1e-13);
        assert!((normal_cdf(0.0) - 0.5).abs() < 1e-16);
        assert!((normal_cdf(1.959_963_984_540_054) - 0.975).abs() < 1e-14);
        assert!((student_t_cdf(0.0, 7.0) - 0.5).abs() < 1e-15);
        // t with 1 df is Cauchy: F(1) = 3/4
        assert!((student_t_cdf(1.0, 1.0) - 0.75).abs() < 1e-13);
        assert!((normal_quantile(0.975) - 1.959_963_984_540_054).abs() < 1e-12);
    }

    #[test]
    fn kde_single_sample_peaks_at_sample() {
        let grid = gaussian_kde(&[2.5], 0.4).unwrap();
        assert_eq!(grid.len(), KDE_GRID_POINTS);
        let (x_peak, _) = grid
            .iter()
            .copied()
            .max_by(|a, b| a.1.total_cmp(&b.1))
            .unwrap();
        let step = grid[1].0 - grid[0].0;
        assert!((x_peak - 2.5).abs() <= step);
        assert!(gaussian_kde(&[], 1.0).is_err());
        assert!(gaussian_kde(&[1.0], 0.0).is_err());
    }

    #[test]
    fn quantile_table_positions() {
        let t = quantile_table(&[3.0, -1.0]).unwrap();
        assert_eq!(t.len(), 2);
        assert_eq!(t[0].position, 0.25);
        assert_eq!(t[1].position, 0.75);
        assert_eq!(t[0].sample, -1.0);
        assert!((t[0].normal + t[1].normal).abs() < 1e-15);
        assert!(quantile_table(&[1.0]).is_err());
    }

    proptest! {
        #[test]
        fn fdc_sign_antisymmetry(pts in prop::collection::vec((-1.0f64..1.0, 0.0f64..3.0), 3..20)) {
            let u: Vec<f64> = pts.iter().map(|p| p.0).collect();
            let d: Vec<f64> = pts.iter().map(|p| p.1).collect();
            let neg: Vec<f64> = u.iter().map(|x| -x).collect();
            if let (Ok(a), Ok(b)) = (fdc(&u, &d), fdc(&neg, &d)) {
                prop_assert_eq!(a, -b);
                prop_assert!((-1.0..=1.0).contains(&a));
            }
        }

        #[test]
        fn paired_tests_swap_invariance(pts in prop::collection::vec((0.0f64..10.0, 0.0f64..10.0), 2..25)) {
            let xs: Vec<f64> = pts.iter().map(|p| p.0).collect();
            let ys: Vec<f64> = pts.iter().map(|p| p.1).collect();
            let a = paired_t(&xs, &ys).unwrap();
            let b = paired_t(&ys, &xs).unwrap();
            prop_assert_eq!(a.statistic.map(|t| -t), b.statistic);
            prop_assert!((a.p_value - b.p_value).abs() < 1e-14);
            let a = signed_rank(&xs, &ys).unwrap();
            let b = signed_rank(&ys, &xs).unwrap();
            prop_assert_eq!(a.statistic, b.statistic);
            prop_assert_eq!(a.p_value, b.p_value);
            prop_assert!((0.0..=1.0).contains(&a.p_value));
        }

        #[test]
        fn normal_quantile_inverts_cdf(p in 1e-9f64..(1.0 - 1e-9)) {
            let x = normal_quantile(p);
            prop_assert!((normal_cdf(x) - p).abs() < 1e-12 * p.max(1e-3));
        }
    }
}
