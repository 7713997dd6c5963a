//! Multivariate normal rectangle probabilities.
//!
//! Dimensions 1 and 2 are evaluated in closed form (univariate CDF and the
//! bivariate kernel). Higher dimensions use Genz's method: standardize,
//! reorder variables greedily by smallest conditional probability while
//! building the Cholesky factor, then integrate the sequentially-conditioned
//! integrand over a randomized rank-1 lattice (generating vector √primes,
//! tent periodization, independent uniform shifts per randomization).

use super::bvn;
use super::normal::{quantile_core, std_normal_cdf, std_normal_pdf};
use super::GaussianParams;
use crate::error::{Error, Result};
use crate::gauss::linalg::Mat;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

/// Axis-aligned integration region with extended-real bounds.
#[derive(Clone, Debug)]
pub struct Rectangle {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl Rectangle {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        let r = Self { lower, upper };
        r.validate()?;
        Ok(r)
    }

    /// Orthant-style region for a binary assignment: coordinate `i` spans
    /// `(-∞, 0]` where `assignment[i] != 0` and `[0, ∞)` elsewhere.
    pub fn from_binary_assignment(assignment: &[u8]) -> Self {
        let lower = assignment
            .iter()
            .map(|&x| if x != 0 { f64::NEG_INFINITY } else { 0.0 })
            .collect();
        let upper = assignment
            .iter()
            .map(|&x| if x != 0 { 0.0 } else { f64::INFINITY })
            .collect();
        Self { lower, upper }
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn validate(&self) -> Result<()> {
        if self.lower.len() != self.upper.len() {
            return Err(Error::ShapeMismatch(format!(
                "rectangle bounds have lengths {} and {}",
                self.lower.len(),
                self.upper.len()
            )));
        }
        for (i, (l, u)) in self.lower.iter().zip(&self.upper).enumerate() {
            if l.is_nan() || u.is_nan() || l > u {
                return Err(Error::InvalidParameter(format!(
                    "rectangle bound {i} invalid: [{l}, {u}]"
                )));
            }
        }
        Ok(())
    }
}

/// Parameters of the randomized-lattice rule.
#[derive(Clone, Copy, Debug)]
pub struct QmcConfig {
    /// Number of independently shifted lattice replicates (error estimate
    /// comes from their spread).
    pub randomizations: usize,
    /// Lattice points per replicate.
    pub points: usize,
    pub seed: u64,
}

impl QmcConfig {
    pub fn new(seed: u64) -> Self {
        Self {
            randomizations: 8,
            points: 1023,
            seed,
        }
    }
}

impl Default for QmcConfig {
    fn default() -> Self {
        Self::new(0)
    }
}

const MAX_DIM: usize = 25;

const PRIMES: [f64; 24] = [
    2.0, 3.0, 5.0, 7.0, 11.0, 13.0, 17.0, 19.0, 23.0, 29.0, 31.0, 37.0, 41.0, 43.0, 47.0, 53.0,
    59.0, 61.0, 67.0, 71.0, 73.0, 79.0, 83.0, 89.0,
];

/// Probability of `rect` under `N(mean, covariance)` together with a
/// standard-error estimate.
///
/// Deterministic for a fixed `QmcConfig`. Dimensions ≤ 2 are evaluated in
/// closed form (the reported error is then just a rounding allowance). The
/// computation standardizes to correlation scale first, so it is invariant
/// under simultaneous positive diagonal scaling of bounds, mean, and
/// covariance.
pub fn mvn_rectangle_prob(
    rect: &Rectangle,
    params: &GaussianParams,
    config: &QmcConfig,
) -> Result<(f64, f64)> {
    rect.validate()?;
    let d = rect.dim();
    if d != params.dim() {
        return Err(Error::ShapeMismatch(format!(
            "rectangle dimension {d} does not match distribution dimension {}",
            params.dim()
        )));
    }
    if d == 0 {
        return Err(Error::InvalidParameter("empty rectangle".into()));
    }
    if d > MAX_DIM {
        return Err(Error::DimensionTooLarge {
            what: "mvn rectangle probability",
            dim: d,
            max: MAX_DIM,
        });
    }

    // Standardize to unit variances.
    let cov = &params.covariance;
    let mut sd = vec![0.0; d];
    for i in 0..d {
        let v = cov[(i, i)];
        if !(v > 0.0) {
            return Err(Error::NotPositiveDefinite);
        }
        sd[i] = v.sqrt();
    }
    let std_bound = |x: f64, i: usize| {
        if x.is_finite() {
            (x - params.mean[i]) / sd[i]
        } else {
            x
        }
    };
    let mut a: Vec<f64> = (0..d).map(|i| std_bound(rect.lower[i], i)).collect();
    let mut b: Vec<f64> = (0..d).map(|i| std_bound(rect.upper[i], i)).collect();

    if d == 1 {
        let p = (phi_ext(b[0]) - phi_ext(a[0])).clamp(0.0, 1.0);
        return Ok((p, 1e-15));
    }

    let mut corr = Mat::identity(d);
    for i in 0..d {
        for j in (i + 1)..d {
            let r = cov[(i, j)] / (sd[i] * sd[j]);
            corr[(i, j)] = r;
            corr[(j, i)] = r;
        }
    }

    if d == 2 {
        let rho = 0.5 * (corr[(0, 1)] + corr[(1, 0)]);
        if !(rho.abs() < 1.0) {
            return Err(Error::NotPositiveDefinite);
        }
        let std_rect = Rectangle {
            lower: a,
            upper: b,
        };
        let p = bvn::bvn_rectangle_prob(&std_rect, &[0.0, 0.0], rho)?;
        return Ok((p, 5e-15));
    }

    let chol = reorder_cholesky(&corr, &mut a, &mut b)?;

    let m = config.randomizations.max(2);
    let points = config.points.max(1);
    let gen: Vec<f64> = PRIMES[..d - 1].iter().map(|p| p.sqrt()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);

    let mut replicate_means = Vec::with_capacity(m);
    let mut w = vec![0.0; d - 1];
    for _ in 0..m {
        let shift: Vec<f64> = (0..d - 1).map(|_| rng.random::<f64>()).collect();
        let mut mean_est = 0.0;
        for j in 1..=points {
            for t in 0..d - 1 {
                let v = (j as f64) * gen[t] + shift[t];
                w[t] = (2.0 * v.fract() - 1.0).abs();
            }
            let f = conditioned_integrand(&chol, &a, &b, &w);
            mean_est += (f - mean_est) / j as f64;
        }
        replicate_means.push(mean_est);
    }

    let p: f64 = replicate_means.iter().sum::<f64>() / m as f64;
    let var: f64 = replicate_means
        .iter()
        .map(|x| (x - p) * (x - p))
        .sum::<f64>()
        / (m - 1) as f64;
    let se = (var / m as f64).sqrt();
    Ok((p.clamp(0.0, 1.0), se))
}

fn phi_ext(x: f64) -> f64 {
    std_normal_cdf(x)
}

/// Cholesky factorization of a correlation matrix with greedy variable
/// reordering: at each stage pick the remaining variable with the smallest
/// conditional interval probability, conditioning on the expected values of
/// the truncated variables chosen so far. Permutes `a` and `b` in place.
fn reorder_cholesky(corr: &Mat, a: &mut [f64], b: &mut [f64]) -> Result<Mat> {
    let d = corr.nrows();
    let mut c = corr.clone();
    let mut l = Mat::zeros(d, d);
    let mut y = vec![0.0; d];

    for i in 0..d {
        let mut best = i;
        let mut best_p = f64::INFINITY;
        for j in i..d {
            let mut s2 = c[(j, j)];
            for t in 0..i {
                s2 -= l[(j, t)] * l[(j, t)];
            }
            if s2 <= 1e-12 {
                continue;
            }
            let s = s2.sqrt();
            let mut mu = 0.0;
            for t in 0..i {
                mu += l[(j, t)] * y[t];
            }
            let aj = if a[j].is_finite() { (a[j] - mu) / s } else { a[j] };
            let bj = if b[j].is_finite() { (b[j] - mu) / s } else { b[j] };
            let p = phi_ext(bj) - phi_ext(aj);
            if p < best_p {
                best_p = p;
                best = j;
            }
        }
        if best_p == f64::INFINITY {
            return Err(Error::NotPositiveDefinite);
        }
        if best != i {
            swap_symmetric(&mut c, i, best);
            a.swap(i, best);
            b.swap(i, best);
            for t in 0..i {
                let tmp = l[(i, t)];
                l[(i, t)] = l[(best, t)];
                l[(best, t)] = tmp;
            }
        }

        let mut pivot = c[(i, i)];
        for t in 0..i {
            pivot -= l[(i, t)] * l[(i, t)];
        }
        if !(pivot > 0.0) {
            return Err(Error::NotPositiveDefinite);
        }
        let lii = pivot.sqrt();
        l[(i, i)] = lii;
        for j in (i + 1)..d {
            let mut s = c[(j, i)];
            for t in 0..i {
                s -= l[(i, t)] * l[(j, t)];
            }
            l[(j, i)] = s / lii;
        }

        // Expected value of the truncated standardized variable, used to
        // condition the reordering heuristic at later stages.
        let mut mu = 0.0;
        for t in 0..i {
            mu += l[(i, t)] * y[t];
        }
        let ai = if a[i].is_finite() { (a[i] - mu) / lii } else { a[i] };
        let bi = if b[i].is_finite() { (b[i] - mu) / lii } else { b[i] };
        let denom = phi_ext(bi) - phi_ext(ai);
        y[i] = if denom > 1e-12 {
            (std_normal_pdf(ai) - std_normal_pdf(bi)) / denom
        } else {
            0.5 * (ai.max(-9.0) + bi.min(9.0))
        };
    }
    Ok(l)
}

fn swap_symmetric(c: &mut Mat, i: usize, j: usize) {
    let d = c.nrows();
    for k in 0..d {
        let tmp = c[(i, k)];
        c[(i, k)] = c[(j, k)];
        c[(j, k)] = tmp;
    }
    for k in 0..d {
        let tmp = c[(k, i)];
        c[(k, i)] = c[(k, j)];
        c[(k, j)] = tmp;
    }
}

/// Genz's sequentially conditioned integrand over the unit cube.
fn conditioned_integrand(l: &Mat, a: &[f64], b: &[f64], w: &[f64]) -> f64 {
    let d = a.len();
    let mut y = vec![0.0; d - 1];
    let mut dlo = phi_bound(a[0] / l[(0, 0)], a[0]);
    let mut dhi = phi_bound(b[0] / l[(0, 0)], b[0]);
    let mut f = (dhi - dlo).max(0.0);
    for i in 1..d {
        if f <= 0.0 {
            return 0.0;
        }
        let t = (dlo + w[i - 1] * (dhi - dlo)).clamp(1e-100, 1.0 - 1e-16);
        y[i - 1] = quantile_core(t);
        let mut mu = 0.0;
        for t in 0..i {
            mu += l[(i, t)] * y[t];
        }
        let lii = l[(i, i)];
        dlo = phi_bound((a[i] - mu) / lii, a[i]);
        dhi = phi_bound((b[i] - mu) / lii, b[i]);
        f *= (dhi - dlo).max(0.0);
    }
    f
}

#[inline]
fn phi_bound(standardized: f64, raw: f64) -> f64 {
    if raw == f64::NEG_INFINITY {
        0.0
    } else if raw == f64::INFINITY {
        1.0
    } else {
        std_normal_cdf(standardized)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const INF: f64 = f64::INFINITY;

    fn spd_3x3() -> Mat {
        Mat::from_rows(&[
            vec![2.0, 0.6, -0.4],
            vec![0.6, 1.5, 0.3],
            vec![-0.4, 0.3, 1.2],
        ])
    }

    #[test]
    fn dim_one_reduces_to_phi() {
        let params = GaussianParams::new(vec![1.5], Mat::from_diag(&[4.0])).unwrap();
        let rect = Rectangle::new(vec![-1.0], vec![2.0]).unwrap();
        let (p, _) = mvn_rectangle_prob(&rect, &params, &QmcConfig::new(1)).unwrap();
        let want = std_normal_cdf((2.0 - 1.5) / 2.0) - std_normal_cdf((-1.0 - 1.5) / 2.0);
        assert!((p - want).abs() < 1e-14);
    }

    #[test]
    fn diagonal_covariance_factorizes() {
        let params = GaussianParams::new(
            vec![0.2, -0.5, 1.0, 0.0],
            Mat::from_diag(&[1.0, 4.0, 0.25, 2.0]),
        )
        .unwrap();
        let rect = Rectangle::new(vec![-1.0, -INF, 0.0, -2.0], vec![1.0, 1.0, INF, 0.5]).unwrap();
        let (p, e) = mvn_rectangle_prob(&rect, &params, &QmcConfig::new(3)).unwrap();
        let mut want = 1.0;
        for i in 0..4 {
            let sd = params.covariance[(i, i)].sqrt();
            let lo = (rect.lower[i] - params.mean[i]) / sd;
            let hi = (rect.upper[i] - params.mean[i]) / sd;
            let plo = if rect.lower[i].is_finite() {
                std_normal_cdf(lo)
            } else {
                0.0
            };
            let phi = if rect.upper[i].is_finite() {
                std_normal_cdf(hi)
            } else {
                1.0
            };
            want *= phi - plo;
        }
        assert!(
            (p - want).abs() <= 3.0 * e.max(1e-12),
            "p = {p}, want = {want}, err = {e}"
        );
    }

    #[test]
    fn deterministic_given_seed() {
        let params = GaussianParams::new(vec![0.0, 0.0, 0.0], spd_3x3()).unwrap();
        let rect = Rectangle::new(vec![-INF, -INF, -INF], vec![0.3, -0.1, 0.8]).unwrap();
        let cfg = QmcConfig::new(99);
        let (p1, e1) = mvn_rectangle_prob(&rect, &params, &cfg).unwrap();
        let (p2, e2) = mvn_rectangle_prob(&rect, &params, &cfg).unwrap();
        assert_eq!(p1, p2);
        assert_eq!(e1, e2);
    }

    #[test]
    fn orthant_matches_plain_monte_carlo() {
        let cov = spd_3x3();
        let mean = vec![0.3, -0.2, 0.1];
        let params = GaussianParams::new(mean.clone(), cov.clone()).unwrap();
        let rect = Rectangle::new(vec![0.0, 0.0, 0.0], vec![INF, INF, INF]).unwrap();
        let (p, e) = mvn_rectangle_prob(&rect, &params, &QmcConfig::new(5)).unwrap();

        let l = cov.cholesky().unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1234);
        let n = 10_000_000usize;
        let mut hits = 0u64;
        for _ in 0..n {
            let z: Vec<f64> = (0..3)
                .map(|_| quantile_core(rng.random::<f64>().max(1e-300)))
                .collect();
            let mut inside = true;
            for i in 0..3 {
                let mut x = mean[i];
                for j in 0..=i {
                    x += l[(i, j)] * z[j];
                }
                if x < 0.0 {
                    inside = false;
                    break;
                }
            }
            hits += u64::from(inside);
        }
        let mc = hits as f64 / n as f64;
        let mc_se = (mc * (1.0 - mc) / n as f64).sqrt();
        let tol = 3.0 * (e * e + mc_se * mc_se).sqrt();
        assert!(
            (p - mc).abs() <= tol,
            "qmc = {p} (se {e}), mc = {mc} (se {mc_se})"
        );
    }

    #[test]
    fn invariant_under_diagonal_scaling() {
        let cov = spd_3x3();
        let mean = vec![0.5, -0.4, 0.2];
        let params = GaussianParams::new(mean.clone(), cov.clone()).unwrap();
        let rect = Rectangle::new(vec![-1.0, -INF, 0.0], vec![1.0, 0.5, INF]).unwrap();
        let cfg = QmcConfig::new(7);
        let (p1, e1) = mvn_rectangle_prob(&rect, &params, &cfg).unwrap();

        let scales = [2.0, 0.3, 5.0];
        let mut cov2 = cov.clone();
        for i in 0..3 {
            for j in 0..3 {
                cov2[(i, j)] *= scales[i] * scales[j];
            }
        }
        let mean2: Vec<f64> = mean.iter().zip(&scales).map(|(m, s)| m * s).collect();
        let scale_bound = |x: f64, s: f64| if x.is_finite() { x * s } else { x };
        let rect2 = Rectangle::new(
            (0..3).map(|i| scale_bound(rect.lower[i], scales[i])).collect(),
            (0..3).map(|i| scale_bound(rect.upper[i], scales[i])).collect(),
        )
        .unwrap();
        let params2 = GaussianParams::new(mean2, cov2).unwrap();
        let (p2, e2) = mvn_rectangle_prob(&rect2, &params2, &cfg).unwrap();
        assert!(
            (p1 - p2).abs() <= 3.0 * (e1 + e2),
            "p1 = {p1}, p2 = {p2}"
        );
    }

    #[test]
    fn rejects_indefinite_covariance() {
        let cov = Mat::from_rows(&[
            vec![1.0, 0.99, -0.99],
            vec![0.99, 1.0, 0.99],
            vec![-0.99, 0.99, 1.0],
        ]);
        let params = GaussianParams {
            mean: vec![0.0; 3],
            covariance: cov,
        };
        let rect = Rectangle::new(vec![-INF; 3], vec![0.0; 3]).unwrap();
        assert!(mvn_rectangle_prob(&rect, &params, &QmcConfig::new(0)).is_err());
    }

    #[test]
    fn rejects_oversized_dimension() {
        let d = 26;
        let params = GaussianParams {
            mean: vec![0.0; d],
            covariance: Mat::identity(d),
        };
        let rect = Rectangle::new(vec![-INF; d], vec![0.0; d]).unwrap();
        assert!(matches!(
            mvn_rectangle_prob(&rect, &params, &QmcConfig::new(0)),
            Err(Error::DimensionTooLarge { .. })
        ));
    }
}
