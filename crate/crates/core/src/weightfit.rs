//! Scalarization weights inferred from expert ratings, and the scalarizers
//! used by the single-objective search.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evaluation::ObjectiveVector;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RatingScale {
    pub min: f64,
    pub max: f64,
}

impl Default for RatingScale {
    fn default() -> Self {
        Self { min: 1.0, max: 10.0 }
    }
}

impl RatingScale {
    pub fn contains(&self, rating: f64) -> bool {
        rating.is_finite() && rating >= self.min && rating <= self.max
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatingRecord {
    pub network_id: usize,
    pub rater_id: String,
    pub rating: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RatingSummary {
    pub network_id: usize,
    pub mean: f64,
    pub raters: usize,
}

/// Mean rating per network. A rater who rated the same network more than
/// once is counted with their latest record only.
pub fn aggregate_ratings(records: &[RatingRecord]) -> Vec<RatingSummary> {
    let mut latest: BTreeMap<(usize, &str), f64> = BTreeMap::new();
    for r in records {
        latest.insert((r.network_id, r.rater_id.as_str()), r.rating);
    }
    let mut sums: BTreeMap<usize, (f64, usize)> = BTreeMap::new();
    for ((network, _), rating) in latest {
        let e = sums.entry(network).or_default();
        e.0 += rating;
        e.1 += 1;
    }
    sums.into_iter()
        .map(|(network_id, (sum, n))| RatingSummary {
            network_id,
            mean: sum / n as f64,
            raters: n,
        })
        .collect()
}

/// Intercept plus one coefficient per objective, in (TL, UD, IVT, ANT) order.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct WeightVector {
    pub w0: f64,
    pub w1: f64,
    pub w2: f64,
    pub w3: f64,
    pub w4: f64,
}

impl WeightVector {
    pub fn from_array(a: [f64; 5]) -> Self {
        Self {
            w0: a[0],
            w1: a[1],
            w2: a[2],
            w3: a[3],
            w4: a[4],
        }
    }

    pub fn to_array(self) -> [f64; 5] {
        [self.w0, self.w1, self.w2, self.w3, self.w4]
    }

    pub fn scalarize(&self, v: &ObjectiveVector) -> f64 {
        self.w0 + self.w1 * v.tl + self.w2 * v.ud + self.w3 * v.ivt + self.w4 * v.ant
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightFit {
    pub weights: WeightVector,
    /// Target minus prediction for each sample, in input order.
    pub residuals: Vec<f64>,
    pub residual_norm: f64,
}

/// Least squares fit of `max_rating - rating` against `(1, TL, UD, IVT, ANT)`.
/// Lower predictions mean better-rated networks, so the result scalarizes
/// for minimization.
pub fn fit_weights(samples: &[(ObjectiveVector, f64)], max_rating: f64) -> Result<WeightFit> {
    const COLUMNS: usize = 5;
    if samples.len() < COLUMNS + 1 {
        return Err(Error::InvalidInput(format!(
            "{} rated networks are not enough to fit {COLUMNS} weights; need at least {}",
            samples.len(),
            COLUMNS + 1
        )));
    }
    if samples
        .iter()
        .any(|(v, r)| !r.is_finite() || v.to_array().iter().any(|x| !x.is_finite()))
    {
        return Err(Error::InvalidInput("ratings and objectives must be finite".into()));
    }
    let rows: Vec<Vec<f64>> = samples
        .iter()
        .map(|(v, _)| {
            let [a, b, c, d] = v.to_array();
            vec![1.0, a, b, c, d]
        })
        .collect();
    let target: Vec<f64> = samples.iter().map(|(_, r)| max_rating - r).collect();
    let w = least_squares(&rows, &target)?;
    let weights = WeightVector::from_array([w[0], w[1], w[2], w[3], w[4]]);
    let residuals: Vec<f64> = samples
        .iter()
        .zip(&target)
        .map(|((v, _), t)| t - weights.scalarize(v))
        .collect();
    let residual_norm = residuals.iter().map(|r| r * r).sum::<f64>().sqrt();
    Ok(WeightFit {
        weights,
        residuals,
        residual_norm,
    })
}

/// Solves `min ||X w - t||` by Householder QR. `rows` is X in row-major
/// order. Fails when X does not have full column rank.
pub fn least_squares(rows: &[Vec<f64>], target: &[f64]) -> Result<Vec<f64>> {
    let m = rows.len();
    let n = rows.first().map_or(0, Vec::len);
    if m != target.len() || rows.iter().any(|r| r.len() != n) {
        return Err(Error::InvalidInput("design matrix and target disagree in shape".into()));
    }
    if n == 0 || m < n {
        return Err(Error::RankDeficient { rank: m.min(n), columns: n });
    }
    // Column-major working copy.
    let mut a: Vec<Vec<f64>> = (0..n).map(|j| rows.iter().map(|r| r[j]).collect()).collect();
    let col_norms: Vec<f64> = a.iter().map(|c| norm(c)).collect();
    let mut b = target.to_vec();
    let mut rank = 0;
    let mut deficient = false;

    for k in 0..n {
        let alpha = norm(&a[k][k..]);
        if alpha <= 1e-10 * col_norms[k].max(f64::MIN_POSITIVE) {
            deficient = true;
            continue;
        }
        rank += 1;
        let alpha = if a[k][k] > 0.0 { -alpha } else { alpha };
        let mut v: Vec<f64> = a[k][k..].to_vec();
        v[0] -= alpha;
        let vnorm2: f64 = v.iter().map(|x| x * x).sum();
        if vnorm2 > 0.0 {
            for col in a.iter_mut().skip(k) {
                reflect(&v, vnorm2, &mut col[k..]);
            }
            reflect(&v, vnorm2, &mut b[k..]);
        }
    }
    if deficient {
        return Err(Error::RankDeficient { rank, columns: n });
    }

    let mut w = vec![0.0; n];
    for k in (0..n).rev() {
        let s: f64 = (k + 1..n).map(|j| a[j][k] * w[j]).sum();
        w[k] = (b[k] - s) / a[k][k];
    }
    Ok(w)
}

fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

fn reflect(v: &[f64], vnorm2: f64, x: &mut [f64]) {
    let d: f64 = v.iter().zip(x.iter()).map(|(a, b)| a * b).sum();
    let f = 2.0 * d / vnorm2;
    for (xi, vi) in x.iter_mut().zip(v) {
        *xi -= f * vi;
    }
}

/// A total function from objective vectors to a score; lower is better.
pub trait Scalarizer: Sync {
    fn score(&self, v: &ObjectiveVector) -> f64;
}

impl Scalarizer for WeightVector {
    fn score(&self, v: &ObjectiveVector) -> f64 {
        self.scalarize(v)
    }
}

impl<F> Scalarizer for F
where
    F: Fn(&ObjectiveVector) -> f64 + Sync,
{
    fn score(&self, v: &ObjectiveVector) -> f64 {
        self(v)
    }
}

/// Sum of min-max normalized objectives.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Uniform {
    pub min: ObjectiveVector,
    pub max: ObjectiveVector,
}

impl Uniform {
    pub fn new(min: ObjectiveVector, max: ObjectiveVector) -> Self {
        Self { min, max }
    }

    /// Bounds spanning the given vectors, e.g. the members of a Pareto archive.
    pub fn spanning<'a>(vectors: impl IntoIterator<Item = &'a ObjectiveVector>) -> Option<Self> {
        let mut it = vectors.into_iter();
        let first = it.next()?.to_array();
        let (mut lo, mut hi) = (first, first);
        for v in it {
            for (i, x) in v.to_array().into_iter().enumerate() {
                lo[i] = lo[i].min(x);
                hi[i] = hi[i].max(x);
            }
        }
        Some(Self::new(ObjectiveVector::from_array(lo), ObjectiveVector::from_array(hi)))
    }

    pub fn normalized(&self, v: &ObjectiveVector) -> [f64; 4] {
        let (lo, hi) = (self.min.to_array(), self.max.to_array());
        let mut out = [0.0; 4];
        for (i, x) in v.to_array().into_iter().enumerate() {
            let range = hi[i] - lo[i];
            out[i] = if range > 0.0 { (x - lo[i]) / range } else { 0.0 };
        }
        out
    }
}

impl Scalarizer for Uniform {
    fn score(&self, v: &ObjectiveVector) -> f64 {
        self.normalized(v).iter().sum()
    }
}

/// Stand-in for a human panel when the pipeline runs unattended. Each rater
/// scores networks from a hidden linear preference over normalized objectives
/// plus personal noise, rounded to whole points on the scale.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimulatedPanel {
    pub raters: usize,
    /// Penalty, in rating points, for going from the best to the worst value
    /// of each objective.
    pub preference: [f64; 4],
    pub noise: f64,
    pub seed: u64,
}

impl Default for SimulatedPanel {
    fn default() -> Self {
        Self {
            raters: 4,
            preference: [2.0, 4.0, 2.0, 1.0],
            noise: 0.5,
            seed: 0,
        }
    }
}

impl SimulatedPanel {
    /// Ratings for `networks` (id, objectives); normalization spans the
    /// networks themselves.
    pub fn rate(&self, networks: &[(usize, ObjectiveVector)], scale: RatingScale) -> Vec<RatingRecord> {
        let Some(bounds) = Uniform::spanning(networks.iter().map(|(_, v)| v)) else {
            return Vec::new();
        };
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let mut out = Vec::with_capacity(networks.len() * self.raters);
        for rater in 0..self.raters {
            for &(network_id, v) in networks {
                let penalty: f64 = bounds
                    .normalized(&v)
                    .iter()
                    .zip(self.preference)
                    .map(|(x, p)| x * p)
                    .sum();
                let noise = if self.noise > 0.0 {
                    rng.gen_range(-self.noise..=self.noise)
                } else {
                    0.0
                };
                let rating = (scale.max - penalty + noise).round().clamp(scale.min, scale.max);
                out.push(RatingRecord {
                    network_id,
                    rater_id: format!("sim-{rater}"),
                    rating,
                });
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ov(tl: f64, ud: f64, ivt: f64, ant: f64) -> ObjectiveVector {
        ObjectiveVector::new(tl, ud, ivt, ant)
    }

    fn rec(network_id: usize, rater: &str, rating: f64) -> RatingRecord {
        RatingRecord {
            network_id,
            rater_id: rater.into(),
            rating,
        }
    }

    #[test]
    fn two_raters_average() {
        let agg = aggregate_ratings(&[rec(3, "a", 7.0), rec(3, "b", 8.0)]);
        assert_eq!(agg.len(), 1);
        assert_eq!(agg[0].mean, 7.5);
        assert_eq!(agg[0].raters, 2);
    }

    #[test]
    fn repeated_rating_counts_once() {
        let agg = aggregate_ratings(&[rec(1, "a", 2.0), rec(1, "a", 6.0), rec(1, "b", 8.0)]);
        assert_eq!(agg[0].mean, 7.0);
    }

    #[test]
    fn weighted_scalarization() {
        let v = ov(12000.0, 0.1, 5.0, 0.3);
        assert_eq!(WeightVector::from_array([0.0, 1.0, 0.0, 0.0, 0.0]).score(&v), 12000.0);
        let w = WeightVector::from_array([-15.85, 0.0, 0.0, 0.0, 0.0]);
        assert_eq!(w.score(&ObjectiveVector::default()), -15.85);
        assert_eq!(WeightVector::default().score(&v), 0.0);
    }

    #[test]
    fn uniform_endpoints() {
        let u = Uniform::new(ov(0.0, 0.0, 10.0, 1.0), ov(10.0, 1.0, 20.0, 3.0));
        assert_eq!(u.score(&ov(0.0, 0.0, 10.0, 1.0)), 0.0);
        assert_eq!(u.score(&ov(10.0, 1.0, 20.0, 3.0)), 4.0);
        assert!((u.score(&ov(5.0, 0.5, 15.0, 2.0)) - 2.0).abs() < 1e-12);
        let flat = Uniform::new(ov(1.0, 1.0, 1.0, 1.0), ov(1.0, 1.0, 1.0, 1.0));
        assert_eq!(flat.score(&ov(1.0, 1.0, 1.0, 1.0)), 0.0);
    }

    #[test]
    fn target_is_max_minus_rating() {
        // With objectives that make X well conditioned, an exact intercept-only
        // model reproduces max - rating for every sample.
        let samples: Vec<(ObjectiveVector, f64)> = (0..8)
            .map(|i| {
                let x = i as f64;
                (ov(x, x * x, (x * 0.7).sin(), (x * 1.3).cos()), 7.5)
            })
            .collect();
        let fit = fit_weights(&samples, 10.0).unwrap();
        assert!((fit.weights.w0 - 2.5).abs() < 1e-9);
        assert!(fit.residual_norm < 1e-9);
    }

    #[test]
    fn recovers_planted_line() {
        let samples: Vec<(ObjectiveVector, f64)> = (0..10)
            .map(|i| {
                let x = i as f64;
                let v = ov(x, (x * 0.37).sin(), (x * 0.91).cos(), x.sqrt());
                (v, 10.0 - (2.0 + 0.5 * x))
            })
            .collect();
        let fit = fit_weights(&samples, 10.0).unwrap();
        let got = fit.weights.to_array();
        for (g, e) in got.iter().zip([2.0, 0.5, 0.0, 0.0, 0.0]) {
            assert!((g - e).abs() < 1e-9, "{got:?}");
        }
    }

    #[test]
    fn constant_column_is_rank_deficient() {
        let samples: Vec<(ObjectiveVector, f64)> =
            (0..8).map(|i| (ov(i as f64, 0.5, i as f64 * 2.0, 1.0), 5.0)).collect();
        assert!(matches!(
            fit_weights(&samples, 10.0),
            Err(Error::RankDeficient { columns: 5, .. })
        ));
    }

    #[test]
    fn too_few_samples() {
        let samples = vec![(ov(1.0, 0.0, 0.0, 0.0), 5.0); 3];
        assert!(matches!(fit_weights(&samples, 10.0), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn panel_prefers_better_networks() {
        let panel = SimulatedPanel {
            noise: 0.0,
            ..SimulatedPanel::default()
        };
        let nets = [(0, ov(0.0, 0.0, 0.0, 0.0)), (1, ov(1.0, 1.0, 1.0, 1.0))];
        let ratings = panel.rate(&nets, RatingScale::default());
        assert_eq!(ratings.len(), 8);
        let agg = aggregate_ratings(&ratings);
        assert_eq!(agg[0].mean, 10.0);
        assert_eq!(agg[1].mean, 1.0);
    }
}
