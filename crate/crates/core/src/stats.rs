//! Histograms, Gaussian fits, divergences and power-law fits for variability
//! samples.

use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;

use crate::{Error, Result};

/// Default bin count for V_s densities; odd so that one bin is centred on 0.
pub const DEFAULT_BINS: usize = 101;

/// Floor applied to model bin masses in [`kl_to_gaussian`].
pub const KL_MASS_FLOOR: f64 = 1e-300;

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Histogram {
    pub bin_edges: Vec<f64>,
    pub counts: Vec<u64>,
    pub total: u64,
}

impl Histogram {
    pub fn bins(&self) -> usize {
        self.counts.len()
    }

    /// Counts normalised to probabilities.
    pub fn probabilities(&self) -> Vec<f64> {
        let total = self.total as f64;
        self.counts.iter().map(|&c| c as f64 / total).collect()
    }

    /// Density per unit of the sample axis, for plotting.
    pub fn densities(&self) -> Vec<f64> {
        let total = self.total as f64;
        self.counts
            .iter()
            .zip(self.bin_edges.windows(2))
            .map(|(&c, e)| c as f64 / (total * (e[1] - e[0])))
            .collect()
    }

    pub fn centers(&self) -> Vec<f64> {
        self.bin_edges.windows(2).map(|e| 0.5 * (e[0] + e[1])).collect()
    }

    fn from_edges(samples: &[f64], bin_edges: Vec<f64>) -> Self {
        let m = bin_edges.len() - 1;
        let lo = bin_edges[0];
        let hi = bin_edges[m];
        let mut counts = vec![0u64; m];
        for &s in samples {
            let mut i = (((s - lo) / (hi - lo)) * m as f64) as usize;
            i = i.min(m - 1);
            // Equal-width edges are rounded; settle boundary cases on the edges.
            while i > 0 && s < bin_edges[i] {
                i -= 1;
            }
            while i + 1 < m && s >= bin_edges[i + 1] {
                i += 1;
            }
            counts[i] += 1;
        }
        Histogram {
            bin_edges,
            counts,
            total: samples.len() as u64,
        }
    }
}

fn finite_range(samples: &[f64]) -> Result<(f64, f64)> {
    if samples.is_empty() {
        return Err(Error::EmptySamples);
    }
    if samples.iter().any(|s| !s.is_finite()) {
        return Err(Error::Degenerate("non-finite sample"));
    }
    let lo = samples.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = samples.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok((lo, hi))
}

/// Equal-width bins spanning `[min, max]`, the last bin closed on the right.
///
/// When all samples coincide the single value is centred in a bin of width
/// `max(1, |v|)`.
pub fn histogram(samples: &[f64], bins: usize) -> Result<Histogram> {
    if bins == 0 {
        return Err(Error::InvalidArgument("bins must be at least 1".into()));
    }
    let (mut lo, mut hi) = finite_range(samples)?;
    if lo == hi {
        let half = 0.5 * lo.abs().max(1.0);
        lo -= half;
        hi += half;
    }
    let width = (hi - lo) / bins as f64;
    let mut edges: Vec<f64> = (0..bins).map(|i| lo + width * i as f64).collect();
    edges.push(hi);
    Ok(Histogram::from_edges(samples, edges))
}

/// Histogram for samples that live on a lattice of spacing `quantum`.
///
/// Bin widths are whole multiples of `quantum` (at least one, and at least
/// `(max - min) / bins`), with edges offset by half a quantum so that every
/// lattice point sits strictly inside one bin. Floating-point sums of
/// similar magnitude are quantised like this; equal-width bins narrower than
/// the lattice would leave alternating empty bins.
pub fn histogram_lattice(samples: &[f64], bins: usize, quantum: f64) -> Result<Histogram> {
    if bins == 0 {
        return Err(Error::InvalidArgument("bins must be at least 1".into()));
    }
    if !(quantum > 0.0) || !quantum.is_finite() {
        return Err(Error::InvalidArgument("quantum must be positive".into()));
    }
    let (lo, hi) = finite_range(samples)?;
    let steps = libm::ceil((hi - lo) / bins as f64 / quantum).max(1.0);
    let width = steps * quantum;
    let m = (libm::floor((hi - lo) / width) as usize + 1).max(1);
    let start = lo - 0.5 * quantum;
    let edges: Vec<f64> = (0..=m).map(|i| start + width * i as f64).collect();
    Ok(Histogram::from_edges(samples, edges))
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct GaussianFit {
    pub mu: f64,
    pub sigma: f64,
}

impl GaussianFit {
    pub fn cdf(&self, x: f64) -> f64 {
        0.5 * libm::erfc(-(x - self.mu) / (self.sigma * core::f64::consts::SQRT_2))
    }
}

pub fn mean(samples: &[f64]) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::EmptySamples);
    }
    Ok(samples.iter().sum::<f64>() / samples.len() as f64)
}

/// Sample mean and unbiased standard deviation.
pub fn fit_gaussian(samples: &[f64]) -> Result<GaussianFit> {
    if samples.len() < 2 {
        return Err(Error::Degenerate("need at least two samples"));
    }
    let mu = mean(samples)?;
    let ss: f64 = samples.iter().map(|s| (s - mu) * (s - mu)).sum();
    let sigma = libm::sqrt(ss / (samples.len() - 1) as f64);
    if !(sigma > 0.0) || !sigma.is_finite() {
        return Err(Error::Degenerate("zero variance"));
    }
    Ok(GaussianFit { mu, sigma })
}

/// Gaussian probability mass in each bin of `edges`.
pub fn gaussian_bin_masses(edges: &[f64], g: &GaussianFit) -> Vec<f64> {
    edges.windows(2).map(|e| g.cdf(e[1]) - g.cdf(e[0])).collect()
}

/// `sum p_i ln(p_i / q_i)` skipping `p_i = 0`, with `q_i` floored at
/// [`KL_MASS_FLOOR`].
pub fn kl_divergence(p: &[f64], q: &[f64]) -> f64 {
    p.iter()
        .zip(q)
        .filter(|(&pi, _)| pi > 0.0)
        .map(|(&pi, &qi)| pi * libm::log(pi / qi.max(KL_MASS_FLOOR)))
        .sum()
}

/// Divergence of the empirical histogram from the Gaussian, `D(p || q)`.
pub fn kl_to_gaussian(h: &Histogram, g: &GaussianFit) -> f64 {
    kl_divergence(&h.probabilities(), &gaussian_bin_masses(&h.bin_edges, g))
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PowerLawFit {
    pub alpha: f64,
    pub beta: f64,
    pub r2: f64,
}

impl PowerLawFit {
    pub fn predict(&self, n: f64) -> f64 {
        self.beta * libm::pow(n, self.alpha)
    }
}

/// Least squares fit of `y = beta * n^alpha` on `(ln n, ln y)`.
///
/// `r2` is 1 when the residuals vanish, including for a constant series.
pub fn fit_power_law(points: &[(f64, f64)]) -> Result<PowerLawFit> {
    if points.len() < 2 {
        return Err(Error::Degenerate("need at least two points"));
    }
    if let Some(index) = points.iter().position(|&(n, y)| !(n > 0.0 && y > 0.0)) {
        return Err(Error::NonPositive { index });
    }
    let xs: Vec<f64> = points.iter().map(|p| libm::log(p.0)).collect();
    let ys: Vec<f64> = points.iter().map(|p| libm::log(p.1)).collect();
    let k = points.len() as f64;
    let mx = xs.iter().sum::<f64>() / k;
    let my = ys.iter().sum::<f64>() / k;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    if sxx == 0.0 {
        return Err(Error::Degenerate("all n values are equal"));
    }
    let alpha = sxy / sxx;
    let intercept = my - alpha * mx;
    let ss_tot: f64 = ys.iter().map(|y| (y - my) * (y - my)).sum();
    let ss_res: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| {
            let r = y - (intercept + alpha * x);
            r * r
        })
        .sum();
    let r2 = if ss_tot == 0.0 { 1.0 } else { 1.0 - ss_res / ss_tot };
    Ok(PowerLawFit {
        alpha,
        beta: libm::exp(intercept),
        r2,
    })
}

pub fn max_abs(samples: &[f64]) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::EmptySamples);
    }
    Ok(samples.iter().fold(0.0, |m: f64, s| m.max(s.abs())))
}

/// Median, averaging the two middle values for even lengths.
pub fn median(samples: &[f64]) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::EmptySamples);
    }
    let mut v = samples.to_vec();
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    Ok(if v.len() % 2 == 1 { v[m] } else { 0.5 * (v[m - 1] + v[m]) })
}

/// Two-sample Kolmogorov–Smirnov statistic `sup |F_a - F_b|`.
pub fn ks_statistic(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptySamples);
    }
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    while i < a.len() && j < b.len() {
        let x = if a[i].total_cmp(&b[j]) == Ordering::Greater { b[j] } else { a[i] };
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    Ok(d)
}

fn ranks(v: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..v.len()).collect();
    idx.sort_by(|&a, &b| v[a].total_cmp(&v[b]));
    let mut r = vec![0.0; v.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && v[idx[j + 1]] == v[idx[i]] {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for &k in &idx[i..=j] {
            r[k] = avg;
        }
        i = j + 1;
    }
    r
}

/// Spearman rank correlation with average ranks for ties.
pub fn spearman(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch { expected: x.len(), actual: y.len() });
    }
    if x.len() < 2 {
        return Err(Error::Degenerate("need at least two pairs"));
    }
    let rx = ranks(x);
    let ry = ranks(y);
    let k = x.len() as f64;
    let mx = rx.iter().sum::<f64>() / k;
    let my = ry.iter().sum::<f64>() / k;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for (a, b) in rx.iter().zip(&ry) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::Degenerate("constant ranks"));
    }
    Ok(sxy / libm::sqrt(sxx * syy))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn histogram_examples() {
        assert_eq!(histogram(&[0.0, 0.0, 0.0], 1).unwrap().counts, [3]);
        assert_eq!(histogram(&[0.0, 1.0, 2.0, 3.0], 2).unwrap().counts, [2, 2]);
        assert_eq!(histogram(&[], 3), Err(Error::EmptySamples));
        assert!(histogram(&[1.0], 0).is_err());
        let h = histogram(&[5.0, 5.0], 3).unwrap();
        assert!(h.bin_edges.windows(2).all(|e| e[0] < e[1]));
        assert_eq!(h.counts.iter().sum::<u64>(), 2);
    }

    #[test]
    fn lattice_histogram_puts_one_point_per_bin() {
        let q = 0.25;
        let samples: Vec<f64> = (0..9).map(|k| -1.0 + q * k as f64).collect();
        let h = histogram_lattice(&samples, 101, q).unwrap();
        assert_eq!(h.bins(), 9);
        assert!(h.counts.iter().all(|&c| c == 1));
        let coarse = histogram_lattice(&samples, 3, q).unwrap();
        assert_eq!(coarse.counts, [3, 3, 3]);
    }

    #[test]
    fn gaussian_fit_examples() {
        assert!(fit_gaussian(&[1.0, 1.0, 1.0, 1.0]).is_err());
        assert!(fit_gaussian(&[1.0]).is_err());
        let g = fit_gaussian(&[0.0, 2.0]).unwrap();
        assert_eq!(g.mu, 1.0);
        assert_eq!(g.sigma, core::f64::consts::SQRT_2);
    }

    #[test]
    fn self_divergence_vanishes() {
        let g = GaussianFit { mu: 0.3, sigma: 2.0 };
        let edges: Vec<f64> = (0..=101).map(|i| g.mu + g.sigma * (-10.0 + 20.0 * i as f64 / 101.0)).collect();
        let masses = gaussian_bin_masses(&edges, &g);
        assert!(kl_divergence(&masses, &masses).abs() < 1e-12);
    }

    #[test]
    fn kl_skips_empty_and_floors_model() {
        assert_eq!(kl_divergence(&[0.0, 1.0], &[0.5, 0.5]), libm::log(2.0));
        let big = kl_divergence(&[1.0], &[0.0]);
        assert!(big > 600.0 && big.is_finite());
    }

    #[test]
    fn power_law_examples() {
        let f = fit_power_law(&[(1.0, 2.0), (4.0, 4.0), (16.0, 8.0)]).unwrap();
        assert!((f.alpha - 0.5).abs() < 1e-15);
        assert!((f.beta - 2.0).abs() < 1e-14);
        assert!((f.r2 - 1.0).abs() < 1e-15);
        let c = fit_power_law(&[(10.0, 3.0), (100.0, 3.0)]).unwrap();
        assert_eq!(c.alpha, 0.0);
        assert_eq!(c.r2, 1.0);
        assert_eq!(fit_power_law(&[(1.0, 1.0), (2.0, 0.0)]), Err(Error::NonPositive { index: 1 }));
        assert!(fit_power_law(&[(1.0, 1.0)]).is_err());
    }

    #[test]
    fn max_abs_examples() {
        assert_eq!(max_abs(&[-3.0, 2.0]).unwrap(), 3.0);
        assert_eq!(max_abs(&[0.0]).unwrap(), 0.0);
        assert_eq!(max_abs(&[]), Err(Error::EmptySamples));
    }

    #[test]
    fn ks_examples() {
        assert_eq!(ks_statistic(&[1.0, 2.0, 3.0], &[1.0, 2.0, 3.0]).unwrap(), 0.0);
        assert_eq!(ks_statistic(&[1.0, 2.0], &[3.0, 4.0]).unwrap(), 1.0);
        assert_eq!(ks_statistic(&[1.0, 3.0], &[2.0, 4.0]).unwrap(), 0.5);
    }

    #[test]
    fn spearman_examples() {
        let x = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(spearman(&x, &[10.0, 20.0, 30.0, 40.0]).unwrap(), 1.0);
        assert_eq!(spearman(&x, &[4.0, 3.0, 2.0, 1.0]).unwrap(), -1.0);
        assert!(spearman(&x, &[1.0, 1.0, 1.0, 1.0]).is_err());
        assert_eq!(median(&[3.0, 1.0, 2.0]).unwrap(), 2.0);
        assert_eq!(median(&[4.0, 1.0, 2.0, 3.0]).unwrap(), 2.5);
    }
}
