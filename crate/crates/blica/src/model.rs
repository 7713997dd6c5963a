//! The binary ICA generative model.
//!
//! Independent Gaussian sources `z` with segment-specific means and diagonal
//! variances are mixed by a stationary matrix `A` into `y = A z`, and each
//! coordinate is binarized with probability `P(x_i = 1) = Φ(√(π/8)·y_i)`.
//! Equivalently, `x` is the sign pattern of the latent Gaussian
//! `q = n − √(π/8)·y` with `n ~ N(0, I)`: `x_i = 1` exactly when `q_i < 0`.
//! That latent vector has closed-form parameters
//!
//! ```text
//! μ_q = −√(π/8)·A μ_z,      Σ_q = I + (π/8)·A Σ_z Aᵀ,
//! ```
//!
//! so every assignment probability is a multivariate normal rectangle
//! probability. This module implements the model container, random model
//! generation, sampling, exact joint/pairwise distributions, the
//! positive-diagonal-scaling and row-order equivalence constructions, and
//! the statistics-minus-unknowns identifiability count.

use crate::error::{Error, Result};
use crate::gauss::bvn::bvn_rectangle_prob;
use crate::gauss::normal::{quantile_core, std_normal_cdf};
use crate::gauss::{mvn_rectangle_prob, GaussianParams, Mat, QmcConfig, Rectangle};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};

/// `√(π/8)`, the link coefficient matching the probit to the logistic scale.
pub fn link_coef() -> f64 {
    std::f64::consts::FRAC_PI_8.sqrt()
}

const EXACT_JOINT_SEED: u64 = 0x4558_4143;

/// Model parameters: stationary mixing plus per-segment source means and
/// diagonal variances.
#[derive(Clone, Debug, PartialEq)]
pub struct BicaModel {
    mixing: Mat,
    segment_means: Vec<Vec<f64>>,
    segment_variances: Vec<Vec<f64>>,
}

impl BicaModel {
    pub fn new(
        mixing: Mat,
        segment_means: Vec<Vec<f64>>,
        segment_variances: Vec<Vec<f64>>,
    ) -> Result<Self> {
        let n_z = mixing.ncols();
        if mixing.nrows() == 0 || n_z == 0 {
            return Err(Error::InvalidParameter("mixing matrix is empty".into()));
        }
        if segment_means.is_empty() || segment_means.len() != segment_variances.len() {
            return Err(Error::ShapeMismatch(format!(
                "{} segment means vs {} segment variances",
                segment_means.len(),
                segment_variances.len()
            )));
        }
        for (u, (m, v)) in segment_means.iter().zip(&segment_variances).enumerate() {
            if m.len() != n_z || v.len() != n_z {
                return Err(Error::ShapeMismatch(format!(
                    "segment {u} parameters do not have length n_z = {n_z}"
                )));
            }
            if m.iter().any(|x| !x.is_finite()) {
                return Err(Error::InvalidParameter(format!(
                    "segment {u} means must be finite"
                )));
            }
            if v.iter().any(|x| !(x.is_finite() && *x > 0.0)) {
                return Err(Error::InvalidParameter(format!(
                    "segment {u} variances must be positive"
                )));
            }
        }
        if mixing.as_slice().iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidParameter("mixing must be finite".into()));
        }
        // Columns must be linearly independent.
        let gram = mixing.transpose().matmul(&mixing).symmetrized();
        let (eigs, _) = gram.sym_eigen()?;
        let max = eigs.first().copied().unwrap_or(0.0);
        let min = eigs.last().copied().unwrap_or(0.0);
        if !(min > 1e-12 * max.max(1.0)) {
            return Err(Error::Singular("mixing columns are rank deficient".into()));
        }
        Ok(Self {
            mixing,
            segment_means,
            segment_variances,
        })
    }

    pub fn n(&self) -> usize {
        self.mixing.nrows()
    }

    pub fn n_z(&self) -> usize {
        self.mixing.ncols()
    }

    pub fn n_u(&self) -> usize {
        self.segment_means.len()
    }

    pub fn mixing(&self) -> &Mat {
        &self.mixing
    }

    pub fn segment_means(&self) -> &[Vec<f64>] {
        &self.segment_means
    }

    pub fn segment_variances(&self) -> &[Vec<f64>] {
        &self.segment_variances
    }

    /// Replaces the means of one segment (used by the mean-adjustment
    /// equivalence construction).
    pub fn with_segment_means(&self, u: usize, means: Vec<f64>) -> Result<Self> {
        if u >= self.n_u() || means.len() != self.n_z() {
            return Err(Error::ShapeMismatch(format!(
                "segment {u} / mean length {}",
                means.len()
            )));
        }
        let mut m = self.clone();
        m.segment_means[u] = means;
        Ok(m)
    }

    /// Latent Gaussian parameters `(μ_q^u, Σ_q^u)` for every segment.
    pub fn q_params(&self) -> QParams {
        let c = link_coef();
        let c2 = c * c;
        let n = self.n();
        let segments = (0..self.n_u())
            .map(|u| {
                let a_mu = self.mixing.matvec(&self.segment_means[u]);
                let mean: Vec<f64> = a_mu.iter().map(|v| -c * v).collect();
                let mut cov = Mat::zeros(n, n);
                for i in 0..n {
                    for j in i..n {
                        let mut s = 0.0;
                        for (k, &var) in self.segment_variances[u].iter().enumerate() {
                            s += self.mixing[(i, k)] * self.mixing[(j, k)] * var;
                        }
                        let v = c2 * s + if i == j { 1.0 } else { 0.0 };
                        cov[(i, j)] = v;
                        cov[(j, i)] = v;
                    }
                }
                GaussianParams {
                    mean,
                    covariance: cov,
                }
            })
            .collect();
        QParams { segments }
    }

    /// Draws `samples_per_segment` binary observations in every segment.
    /// Deterministic for a fixed seed.
    pub fn sample(&self, samples_per_segment: usize, seed: u64) -> SegmentedBinaryDataset {
        let c = link_coef();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut segments = Vec::with_capacity(self.n_u());
        for u in 0..self.n_u() {
            let sds: Vec<f64> = self.segment_variances[u].iter().map(|v| v.sqrt()).collect();
            let mut rows = Vec::with_capacity(samples_per_segment);
            for _ in 0..samples_per_segment {
                let z: Vec<f64> = (0..self.n_z())
                    .map(|j| self.segment_means[u][j] + sds[j] * standard_normal(&mut rng))
                    .collect();
                let y = self.mixing.matvec(&z);
                let row: Vec<u8> = y
                    .iter()
                    .map(|&yi| u8::from(rng.random::<f64>() < std_normal_cdf(c * yi)))
                    .collect();
                rows.push(row);
            }
            segments.push(rows);
        }
        SegmentedBinaryDataset {
            n: self.n(),
            segments,
        }
    }

    /// Exact probability of every binary assignment in segment `u`, indexed
    /// by bitmask (bit `i` set means `x_i = 1`). Limited to `n ≤ 12`.
    pub fn exact_joint_probs(&self, u: usize) -> Result<JointDistribution> {
        const MAX_N: usize = 12;
        let n = self.n();
        if n > MAX_N {
            return Err(Error::DimensionTooLarge {
                what: "exact joint distribution",
                dim: n,
                max: MAX_N,
            });
        }
        if u >= self.n_u() {
            return Err(Error::InvalidParameter(format!("segment {u} out of range")));
        }
        let params = &self.q_params().segments[u];
        let count = 1usize << n;
        let mut probs = Vec::with_capacity(count);
        let mut errors = Vec::with_capacity(count);
        for idx in 0..count {
            let assignment = assignment_from_index(idx, n);
            let rect = Rectangle::from_binary_assignment(&assignment);
            let cfg = QmcConfig::new(crate::derive_seed(EXACT_JOINT_SEED, idx as u64));
            let (p, e) = mvn_rectangle_prob(&rect, params, &cfg)?;
            probs.push(p);
            errors.push(e);
        }
        Ok(JointDistribution { n, probs, errors })
    }

    /// Exact 2x2 cell probabilities for the pair `(i, j)` in segment `u`,
    /// from the bivariate marginal of the latent Gaussian.
    pub fn exact_pairwise_probs(&self, u: usize, i: usize, j: usize) -> Result<PairCells> {
        if i == j || i >= self.n() || j >= self.n() || u >= self.n_u() {
            return Err(Error::InvalidParameter(format!(
                "invalid pair ({i}, {j}) or segment {u}"
            )));
        }
        let qp = self.q_params();
        pair_cells_from_q(&qp.segments[u], i, j)
    }
}

/// Exact 2x2 cells for coordinates `(i, j)` of a latent Gaussian.
pub fn pair_cells_from_q(params: &GaussianParams, i: usize, j: usize) -> Result<PairCells> {
    let si = params.covariance[(i, i)].sqrt();
    let sj = params.covariance[(j, j)].sqrt();
    let a = -params.mean[i] / si;
    let b = -params.mean[j] / sj;
    let rho = params.covariance[(i, j)] / (si * sj);
    let inf = f64::INFINITY;
    let mut cells = [[0.0; 2]; 2];
    for xi in 0..2u8 {
        for xj in 0..2u8 {
            let rect = Rectangle {
                lower: vec![
                    if xi == 1 { -inf } else { a },
                    if xj == 1 { -inf } else { b },
                ],
                upper: vec![if xi == 1 { a } else { inf }, if xj == 1 { b } else { inf }],
            };
            cells[xi as usize][xj as usize] = bvn_rectangle_prob(&rect, &[0.0, 0.0], rho)?;
        }
    }
    Ok(PairCells { cells })
}

pub fn assignment_from_index(idx: usize, n: usize) -> Vec<u8> {
    (0..n).map(|i| ((idx >> i) & 1) as u8).collect()
}

pub fn index_from_assignment(assignment: &[u8]) -> usize {
    assignment
        .iter()
        .enumerate()
        .map(|(i, &x)| usize::from(x != 0) << i)
        .sum()
}

/// Exact joint distribution over all `2^n` assignments of one segment.
#[derive(Clone, Debug)]
pub struct JointDistribution {
    pub n: usize,
    /// Probability per assignment bitmask.
    pub probs: Vec<f64>,
    /// Per-assignment standard-error estimates from the integrator.
    pub errors: Vec<f64>,
}

impl JointDistribution {
    pub fn total(&self) -> f64 {
        self.probs.iter().sum()
    }

    pub fn total_error(&self) -> f64 {
        self.errors.iter().sum()
    }

    /// Marginalizes out one coordinate, producing the distribution over the
    /// remaining `n − 1` coordinates (original index order preserved).
    pub fn marginalize(&self, coord: usize) -> JointDistribution {
        assert!(coord < self.n);
        let m = self.n - 1;
        let mut probs = vec![0.0; 1 << m];
        let mut errors = vec![0.0; 1 << m];
        for idx in 0..self.probs.len() {
            let low = idx & ((1 << coord) - 1);
            let high = (idx >> (coord + 1)) << coord;
            let target = low | high;
            probs[target] += self.probs[idx];
            errors[target] += self.errors[idx];
        }
        JointDistribution {
            n: m,
            probs,
            errors,
        }
    }

    pub fn max_abs_diff(&self, other: &JointDistribution) -> f64 {
        assert_eq!(self.n, other.n);
        self.probs
            .iter()
            .zip(&other.probs)
            .fold(0.0, |acc, (a, b)| acc.max((a - b).abs()))
    }
}

/// Per-segment latent Gaussian parameters.
#[derive(Clone, Debug)]
pub struct QParams {
    pub segments: Vec<GaussianParams>,
}

impl QParams {
    pub fn n_u(&self) -> usize {
        self.segments.len()
    }

    pub fn dim(&self) -> usize {
        self.segments.first().map_or(0, |s| s.dim())
    }
}

/// Positive per-segment diagonal scaling factors.
#[derive(Clone, Debug)]
pub struct ScalingDiagonals {
    pub per_segment: Vec<Vec<f64>>,
}

impl ScalingDiagonals {
    pub fn new(per_segment: Vec<Vec<f64>>) -> Result<Self> {
        for (u, s) in per_segment.iter().enumerate() {
            if s.iter().any(|x| !(x.is_finite() && *x > 0.0)) {
                return Err(Error::InvalidParameter(format!(
                    "segment {u} scaling diagonal must be strictly positive"
                )));
            }
        }
        Ok(Self { per_segment })
    }
}

/// Applies the binarization indeterminacy: `μ̂ = Q μ`, `Σ̂ = Q Σ Q` per
/// segment. The implied binary distribution is unchanged.
pub fn apply_scaling(qp: &QParams, scales: &ScalingDiagonals) -> Result<QParams> {
    if scales.per_segment.len() != qp.n_u() {
        return Err(Error::ShapeMismatch(format!(
            "{} scaling segments vs {} model segments",
            scales.per_segment.len(),
            qp.n_u()
        )));
    }
    let segments = qp
        .segments
        .iter()
        .zip(&scales.per_segment)
        .map(|(seg, q)| {
            if q.len() != seg.dim() {
                return Err(Error::ShapeMismatch(
                    "scaling diagonal length mismatch".into(),
                ));
            }
            let mean: Vec<f64> = seg.mean.iter().zip(q).map(|(m, s)| m * s).collect();
            let d = seg.dim();
            let mut cov = Mat::zeros(d, d);
            for i in 0..d {
                for j in 0..d {
                    cov[(i, j)] = q[i] * q[j] * seg.covariance[(i, j)];
                }
            }
            Ok(GaussianParams {
                mean,
                covariance: cov,
            })
        })
        .collect::<Result<_>>()?;
    Ok(QParams { segments })
}

/// Row-order equivalence for 2x2 models: reverses the rows of the mixing
/// matrix, keeps the source variances, and solves the source means so the
/// implied binary distribution is unchanged in every segment.
pub fn row_swap_equivalent(model: &BicaModel) -> Result<BicaModel> {
    if model.n() != 2 || model.n_z() != 2 {
        return Err(Error::InvalidParameter(
            "row swap construction requires n = n_z = 2".into(),
        ));
    }
    let a = model.mixing();
    let det = a[(0, 0)] * a[(1, 1)] - a[(0, 1)] * a[(1, 0)];
    if det.abs() <= 1e-12 * a.max_abs().max(1.0) {
        return Err(Error::Singular("mixing matrix is not invertible".into()));
    }
    let swapped = Mat::from_rows(&[a.row(1).to_vec(), a.row(0).to_vec()]);
    let qp = model.q_params();
    let mut new_means = Vec::with_capacity(model.n_u());
    for u in 0..model.n_u() {
        let sq = &qp.segments[u].covariance;
        let q = [
            (sq[(1, 1)] / sq[(0, 0)]).sqrt(),
            (sq[(0, 0)] / sq[(1, 1)]).sqrt(),
        ];
        // Â μ̂_z = Q A μ_z, with the link coefficient cancelling.
        let target = model.mixing().matvec(&model.segment_means[u]);
        let rhs: Vec<f64> = target.iter().zip(&q).map(|(t, s)| t * s).collect();
        new_means.push(swapped.solve(&rhs)?);
    }
    BicaModel::new(swapped, new_means, model.segment_variances.clone())
}

/// Mean-adjustment equivalence: given two invertible `n = n_z` models that
/// imply the same q correlation matrix in segment `u` (checked within
/// `1e-8`), returns the source means that make `source` reproduce `target`'s
/// binary distribution in that segment.
pub fn adjust_means_equivalent(
    target: &BicaModel,
    source: &BicaModel,
    u: usize,
) -> Result<Vec<f64>> {
    if target.n() != target.n_z() || source.n() != source.n_z() || target.n() != source.n() {
        return Err(Error::InvalidParameter(
            "mean adjustment requires square mixing matrices of equal size".into(),
        ));
    }
    if u >= target.n_u() || u >= source.n_u() {
        return Err(Error::InvalidParameter(format!("segment {u} out of range")));
    }
    let n = target.n();
    let qt = &target.q_params().segments[u];
    let qs = &source.q_params().segments[u];

    let mut max_diff = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            let ct =
                qt.covariance[(i, j)] / (qt.covariance[(i, i)] * qt.covariance[(j, j)]).sqrt();
            let cs =
                qs.covariance[(i, j)] / (qs.covariance[(i, i)] * qs.covariance[(j, j)]).sqrt();
            max_diff = max_diff.max((ct - cs).abs());
        }
    }
    if max_diff > 1e-8 {
        return Err(Error::CorrelationMismatch {
            max_abs_diff: max_diff,
        });
    }

    let q: Vec<f64> = (0..n)
        .map(|i| (qs.covariance[(i, i)] / qt.covariance[(i, i)]).sqrt())
        .collect();
    let target_y = target.mixing().matvec(&target.segment_means[u]);
    let rhs: Vec<f64> = target_y.iter().zip(&q).map(|(t, s)| t * s).collect();
    source.mixing().solve(&rhs)
}

/// Statistics-minus-unknowns identifiability count for `n = n_z`:
/// `n_u(n²−n)/2 + 2·n_u·n − (n² + 3·n_u·n)`. Non-negative values suggest
/// identifiability.
pub fn heuristic_count(n: usize, n_u: usize) -> i64 {
    let n = n as i64;
    let nu = n_u as i64;
    nu * (n * n - n) / 2 + 2 * nu * n - (n * n + 3 * nu * n)
}

/// Data-generation protocol: means from unif(−0.5, 0.5), standard
/// deviations from unif(0.5, 3), mixing entries from unif(−3, 3) resampled
/// until the condition number is below 20 for `n < 20` and below the 75th
/// percentile of 1000 same-shape samples otherwise.
pub fn random_model(n: usize, n_z: usize, n_u: usize, seed: u64) -> Result<BicaModel> {
    if n_z > n || n_z == 0 || n_u == 0 {
        return Err(Error::InvalidParameter(format!(
            "need n >= n_z >= 1 and n_u >= 1, got n = {n}, n_z = {n_z}, n_u = {n_u}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let segment_means: Vec<Vec<f64>> = (0..n_u)
        .map(|_| (0..n_z).map(|_| rng.random_range(-0.5..0.5)).collect())
        .collect();
    let segment_variances: Vec<Vec<f64>> = (0..n_u)
        .map(|_| {
            (0..n_z)
                .map(|_| {
                    let sd: f64 = rng.random_range(0.5..3.0);
                    sd * sd
                })
                .collect()
        })
        .collect();

    let threshold = if n < 20 {
        20.0
    } else {
        condition_threshold(n, n_z)
    };
    const MAX_ATTEMPTS: usize = 10_000;
    for _ in 0..MAX_ATTEMPTS {
        let mixing = random_mixing(n, n_z, &mut rng);
        if mixing.condition_number() < threshold {
            return BicaModel::new(mixing, segment_means, segment_variances);
        }
    }
    Err(Error::ConvergenceFailure(format!(
        "no mixing matrix with condition number < {threshold} found in {MAX_ATTEMPTS} attempts"
    )))
}

fn random_mixing(n: usize, n_z: usize, rng: &mut ChaCha8Rng) -> Mat {
    let mut m = Mat::zeros(n, n_z);
    for i in 0..n {
        for j in 0..n_z {
            m[(i, j)] = rng.random_range(-3.0..3.0);
        }
    }
    m
}

/// 75th percentile (nearest rank) of the condition numbers of 1000 random
/// mixing matrices of the given shape. Cached per shape; the sampling seed
/// is fixed and independent of any model seed so thresholds are
/// reproducible.
fn condition_threshold(n: usize, n_z: usize) -> f64 {
    static CACHE: OnceLock<Mutex<HashMap<(usize, usize), f64>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(&v) = cache.lock().unwrap().get(&(n, n_z)) {
        return v;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(crate::derive_seed(
        0xC011_D170,
        (n as u64) << 32 | n_z as u64,
    ));
    let mut conds: Vec<f64> = (0..1000)
        .map(|_| random_mixing(n, n_z, &mut rng).condition_number())
        .collect();
    conds.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let v = conds[749];
    cache.lock().unwrap().insert((n, n_z), v);
    v
}

pub(crate) fn standard_normal<R: Rng>(rng: &mut R) -> f64 {
    quantile_core(rng.random::<f64>().max(f64::MIN_POSITIVE))
}

/// 2x2 contingency cells for one variable pair; `cells[x_i][x_j]` holds
/// counts or probabilities.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct PairCells {
    pub cells: [[f64; 2]; 2],
}

impl PairCells {
    pub fn get(&self, xi: u8, xj: u8) -> f64 {
        self.cells[usize::from(xi != 0)][usize::from(xj != 0)]
    }

    pub fn total(&self) -> f64 {
        self.cells.iter().flatten().sum()
    }

    /// Marginal weight of `x_i = 1`.
    pub fn marginal_i(&self) -> f64 {
        self.cells[1][0] + self.cells[1][1]
    }

    /// Marginal weight of `x_j = 1`.
    pub fn marginal_j(&self) -> f64 {
        self.cells[0][1] + self.cells[1][1]
    }
}

/// Binary observations tagged by segment.
#[derive(Clone, Debug, PartialEq)]
pub struct SegmentedBinaryDataset {
    n: usize,
    segments: Vec<Vec<Vec<u8>>>,
}

impl SegmentedBinaryDataset {
    pub fn new(n: usize, n_u: usize) -> Self {
        Self {
            n,
            segments: vec![Vec::new(); n_u],
        }
    }

    pub fn from_segments(n: usize, segments: Vec<Vec<Vec<u8>>>) -> Result<Self> {
        for (u, rows) in segments.iter().enumerate() {
            for row in rows {
                if row.len() != n {
                    return Err(Error::ShapeMismatch(format!(
                        "segment {u} holds a row of length {} (expected {n})",
                        row.len()
                    )));
                }
                if row.iter().any(|&x| x > 1) {
                    return Err(Error::InvalidParameter(format!(
                        "segment {u} holds a non-binary value"
                    )));
                }
            }
        }
        Ok(Self { n, segments })
    }

    pub fn push_row(&mut self, segment: usize, row: Vec<u8>) -> Result<()> {
        if segment >= self.segments.len() {
            return Err(Error::InvalidParameter(format!(
                "segment {segment} out of range"
            )));
        }
        if row.len() != self.n || row.iter().any(|&x| x > 1) {
            return Err(Error::InvalidParameter("bad binary row".into()));
        }
        self.segments[segment].push(row);
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn n_u(&self) -> usize {
        self.segments.len()
    }

    pub fn segment_rows(&self, u: usize) -> &[Vec<u8>] {
        &self.segments[u]
    }

    pub fn segment_count(&self, u: usize) -> usize {
        self.segments[u].len()
    }

    pub fn total_rows(&self) -> usize {
        self.segments.iter().map(Vec::len).sum()
    }

    /// Count of `x_i = 1` in segment `u`.
    pub fn marginal_ones(&self, u: usize, i: usize) -> u64 {
        self.segments[u]
            .iter()
            .map(|row| u64::from(row[i] != 0))
            .sum()
    }

    /// 2x2 cell counts for the pair `(i, j)` in segment `u`.
    pub fn pair_cells(&self, u: usize, i: usize, j: usize) -> PairCells {
        let mut cells = [[0.0; 2]; 2];
        for row in &self.segments[u] {
            cells[usize::from(row[i] != 0)][usize::from(row[j] != 0)] += 1.0;
        }
        PairCells { cells }
    }

    /// Assignment counts per segment (bitmask index). Limited to `n ≤ 24`.
    pub fn joint_counts(&self) -> Result<JointCounts> {
        const MAX_N: usize = 24;
        if self.n > MAX_N {
            return Err(Error::DimensionTooLarge {
                what: "assignment counting",
                dim: self.n,
                max: MAX_N,
            });
        }
        let per_segment = self
            .segments
            .iter()
            .map(|rows| {
                let mut counts = vec![0.0; 1 << self.n];
                for row in rows {
                    counts[index_from_assignment(row)] += 1.0;
                }
                counts
            })
            .collect();
        Ok(JointCounts {
            n: self.n,
            per_segment,
        })
    }
}

/// Per-segment assignment counts `c(x)`; fractional weights are allowed so
/// exact distributions can stand in for infinite data.
#[derive(Clone, Debug, PartialEq)]
pub struct JointCounts {
    pub n: usize,
    pub per_segment: Vec<Vec<f64>>,
}

impl JointCounts {
    pub fn new(n: usize, per_segment: Vec<Vec<f64>>) -> Result<Self> {
        for (u, counts) in per_segment.iter().enumerate() {
            if counts.len() != 1 << n {
                return Err(Error::ShapeMismatch(format!(
                    "segment {u} has {} counts, expected {}",
                    counts.len(),
                    1usize << n
                )));
            }
            if counts.iter().any(|&c| !(c >= 0.0) || !c.is_finite()) {
                return Err(Error::InvalidParameter(format!(
                    "segment {u} has negative or non-finite counts"
                )));
            }
        }
        Ok(Self { n, per_segment })
    }

    pub fn n_u(&self) -> usize {
        self.per_segment.len()
    }

    pub fn segment_total(&self, u: usize) -> f64 {
        self.per_segment[u].iter().sum()
    }
}
