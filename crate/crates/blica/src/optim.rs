//! Generic numerical optimization: limited-memory BFGS minimization with a
//! strong-Wolfe cubic-interpolation line search, bounded scalar minimization
//! (Brent), and a finite-difference gradient checker.

use serde::{Deserialize, Serialize};
use std::collections::VecDeque;
use std::time::{Duration, Instant};

/// Value and gradient of an objective at one point.
#[derive(Clone, Debug)]
pub struct ObjectiveEval {
    pub value: f64,
    pub gradient: Vec<f64>,
}

#[derive(Clone, Copy, Debug)]
pub struct OptimConfig {
    pub max_iterations: usize,
    /// Termination threshold on the Euclidean norm of the gradient.
    pub gradient_tolerance: f64,
    /// Quasi-Newton history length.
    pub memory_pairs: usize,
    pub wall_clock_budget: Option<Duration>,
}

impl Default for OptimConfig {
    fn default() -> Self {
        Self {
            max_iterations: 2000,
            gradient_tolerance: 1e-7,
            memory_pairs: 10,
            wall_clock_budget: None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TerminationStatus {
    GradientConverged,
    MaxIterations,
    BudgetExhausted,
    /// The line search could not make further progress; the best iterate so
    /// far is returned.
    LineSearchFailed,
    /// The objective was not finite at the starting point.
    StartNotFinite,
}

#[derive(Clone, Debug)]
pub struct MinimizeResult {
    pub x: Vec<f64>,
    pub value: f64,
    pub gradient_norm: f64,
    pub iterations: usize,
    pub evaluations: usize,
    pub status: TerminationStatus,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Minimizes `f` from `x0` by L-BFGS. Accepted iterates are monotone
/// nonincreasing in value (strong Wolfe conditions, c1 = 1e-4, c2 = 0.9);
/// the returned value is never above `f(x0)`.
pub fn minimize<F>(mut f: F, x0: &[f64], config: &OptimConfig) -> MinimizeResult
where
    F: FnMut(&[f64]) -> ObjectiveEval,
{
    let start = Instant::now();
    let mut evaluations = 0usize;
    let mut eval = |x: &[f64], count: &mut usize| {
        *count += 1;
        f(x)
    };

    let mut x = x0.to_vec();
    let mut cur = eval(&x, &mut evaluations);
    if !cur.value.is_finite() {
        return MinimizeResult {
            x,
            value: cur.value,
            gradient_norm: f64::NAN,
            iterations: 0,
            evaluations,
            status: TerminationStatus::StartNotFinite,
        };
    }

    let m = config.memory_pairs.max(1);
    let mut s_hist: VecDeque<Vec<f64>> = VecDeque::with_capacity(m);
    let mut y_hist: VecDeque<Vec<f64>> = VecDeque::with_capacity(m);
    let mut rho_hist: VecDeque<f64> = VecDeque::with_capacity(m);

    let mut status = TerminationStatus::MaxIterations;
    let mut iterations = 0usize;

    for it in 0..config.max_iterations {
        let gnorm = norm2(&cur.gradient);
        if gnorm <= config.gradient_tolerance {
            status = TerminationStatus::GradientConverged;
            break;
        }
        if let Some(budget) = config.wall_clock_budget {
            if start.elapsed() >= budget {
                status = TerminationStatus::BudgetExhausted;
                break;
            }
        }

        let mut dir = two_loop_direction(&cur.gradient, &s_hist, &y_hist, &rho_hist);
        let mut dg = dot(&dir, &cur.gradient);
        if !(dg < 0.0) {
            // Not a descent direction (stale curvature); restart from
            // steepest descent.
            s_hist.clear();
            y_hist.clear();
            rho_hist.clear();
            dir = cur.gradient.iter().map(|g| -g).collect();
            dg = -gnorm * gnorm;
            if !(dg < 0.0) {
                status = TerminationStatus::LineSearchFailed;
                break;
            }
        }

        let t0 = if s_hist.is_empty() && it == 0 {
            (1.0 / gnorm).min(1.0)
        } else {
            1.0
        };
        let ls = wolfe_line_search(
            |p: &[f64]| eval(p, &mut evaluations),
            &x,
            &cur,
            &dir,
            dg,
            t0,
        );
        iterations = it + 1;
        match ls {
            LineSearchOutcome::Step { t, eval: next } => {
                let step: Vec<f64> = dir.iter().map(|d| d * t).collect();
                let y: Vec<f64> = next
                    .gradient
                    .iter()
                    .zip(&cur.gradient)
                    .map(|(gn, go)| gn - go)
                    .collect();
                let sy = dot(&step, &y);
                if sy > 1e-10 * norm2(&step) * norm2(&y) {
                    if s_hist.len() == m {
                        s_hist.pop_front();
                        y_hist.pop_front();
                        rho_hist.pop_front();
                    }
                    rho_hist.push_back(1.0 / sy);
                    s_hist.push_back(step.clone());
                    y_hist.push_back(y);
                }
                for (xi, si) in x.iter_mut().zip(&step) {
                    *xi += si;
                }
                cur = next;
            }
            LineSearchOutcome::Failed => {
                status = TerminationStatus::LineSearchFailed;
                break;
            }
        }
    }

    let gradient_norm = norm2(&cur.gradient);
    if status == TerminationStatus::MaxIterations && gradient_norm <= config.gradient_tolerance {
        status = TerminationStatus::GradientConverged;
    }
    MinimizeResult {
        x,
        value: cur.value,
        gradient_norm,
        iterations,
        evaluations,
        status,
    }
}

fn two_loop_direction(
    g: &[f64],
    s_hist: &VecDeque<Vec<f64>>,
    y_hist: &VecDeque<Vec<f64>>,
    rho_hist: &VecDeque<f64>,
) -> Vec<f64> {
    let k = s_hist.len();
    let mut q = g.to_vec();
    let mut alpha = vec![0.0; k];
    for i in (0..k).rev() {
        alpha[i] = rho_hist[i] * dot(&s_hist[i], &q);
        for (qj, yj) in q.iter_mut().zip(&y_hist[i]) {
            *qj -= alpha[i] * yj;
        }
    }
    if k > 0 {
        let last = k - 1;
        let gamma = dot(&s_hist[last], &y_hist[last]) / dot(&y_hist[last], &y_hist[last]);
        if gamma.is_finite() && gamma > 0.0 {
            for qj in q.iter_mut() {
                *qj *= gamma;
            }
        }
    }
    for i in 0..k {
        let beta = rho_hist[i] * dot(&y_hist[i], &q);
        for (qj, sj) in q.iter_mut().zip(&s_hist[i]) {
            *qj += (alpha[i] - beta) * sj;
        }
    }
    q.iter_mut().for_each(|v| *v = -*v);
    q
}

enum LineSearchOutcome {
    Step { t: f64, eval: ObjectiveEval },
    Failed,
}

const C1: f64 = 1e-4;
const C2: f64 = 0.9;
const MAX_LS: usize = 25;
const MAX_ZOOM: usize = 30;

/// Strong-Wolfe line search: bracketing phase followed by zoom with cubic
/// interpolation. Non-finite trial values are treated as sufficient-decrease
/// violations, so the search backs off into the finite region.
fn wolfe_line_search<F>(
    mut eval: F,
    x: &[f64],
    at_zero: &ObjectiveEval,
    dir: &[f64],
    dg0: f64,
    t_init: f64,
) -> LineSearchOutcome
where
    F: FnMut(&[f64]) -> ObjectiveEval,
{
    let probe = |t: f64, eval: &mut F| -> (ObjectiveEval, f64) {
        let xt: Vec<f64> = x.iter().zip(dir).map(|(xi, di)| xi + t * di).collect();
        let e = eval(&xt);
        let dg = if e.value.is_finite() {
            dot(&e.gradient, dir)
        } else {
            f64::NAN
        };
        (e, dg)
    };

    let f0 = at_zero.value;
    let mut t_prev = 0.0;
    let mut f_prev = f0;
    let mut dg_prev = dg0;
    let mut t = t_init;

    let mut bracket: Option<(f64, f64, f64, f64, f64, f64)> = None; // (lo, flo, dglo, hi, fhi, dghi)
    let mut wolfe_hit: Option<(f64, ObjectiveEval)> = None;

    for iter in 0..MAX_LS {
        let (e, dg) = probe(t, &mut eval);
        if !e.value.is_finite() || e.value > f0 + C1 * t * dg0 || (iter > 0 && e.value >= f_prev) {
            bracket = Some((t_prev, f_prev, dg_prev, t, e.value, dg));
            break;
        }
        if dg.abs() <= -C2 * dg0 {
            wolfe_hit = Some((t, e));
            break;
        }
        if dg >= 0.0 {
            bracket = Some((t, e.value, dg, t_prev, f_prev, dg_prev));
            break;
        }
        t_prev = t;
        f_prev = e.value;
        dg_prev = dg;
        t = (2.0 * t).min(1e10);
    }

    if let Some((t, e)) = wolfe_hit {
        return LineSearchOutcome::Step { t, eval: e };
    }
    let Some((mut lo, mut flo, mut dglo, mut hi, mut fhi, mut dghi)) = bracket else {
        // Expansion exhausted without bracketing or satisfying Wolfe; the
        // last expansion point still made sufficient decrease.
        let (e, _) = probe(t_prev, &mut eval);
        return if t_prev > 0.0 && e.value < f0 {
            LineSearchOutcome::Step { t: t_prev, eval: e }
        } else {
            LineSearchOutcome::Failed
        };
    };

    let mut best: Option<(f64, ObjectiveEval)> = None;
    for _ in 0..MAX_ZOOM {
        if !(lo.is_finite() && hi.is_finite()) || (hi - lo).abs() < 1e-16 * lo.abs().max(1.0) {
            break;
        }
        let mut tj = cubic_interpolate(lo, flo, dglo, hi, fhi, dghi);
        let (a, b) = if lo < hi { (lo, hi) } else { (hi, lo) };
        let margin = 0.1 * (b - a);
        if !tj.is_finite() || tj <= a + margin.min(1e-12) || tj >= b - margin.min(1e-12) {
            tj = 0.5 * (a + b);
        }
        let (e, dg) = probe(tj, &mut eval);
        if !e.value.is_finite() || e.value > f0 + C1 * tj * dg0 || e.value >= flo {
            hi = tj;
            fhi = e.value;
            dghi = dg;
        } else {
            if dg.abs() <= -C2 * dg0 {
                return LineSearchOutcome::Step { t: tj, eval: e };
            }
            if dg * (hi - lo) >= 0.0 {
                hi = lo;
                fhi = flo;
                dghi = dglo;
            }
            lo = tj;
            flo = e.value;
            dglo = dg;
            best = Some((tj, e));
        }
    }

    // Strong Wolfe unattainable in the budget; fall back to the best
    // sufficient-decrease point so the outer loop can continue or stop
    // gracefully.
    if let Some((t, e)) = best {
        return LineSearchOutcome::Step { t, eval: e };
    }
    if lo > 0.0 && flo.is_finite() && flo < f0 {
        let (e, _) = probe(lo, &mut eval);
        if e.value.is_finite() && e.value < f0 {
            return LineSearchOutcome::Step { t: lo, eval: e };
        }
    }
    LineSearchOutcome::Failed
}

fn cubic_interpolate(x1: f64, f1: f64, g1: f64, x2: f64, f2: f64, g2: f64) -> f64 {
    if !(f1.is_finite() && f2.is_finite() && g1.is_finite() && g2.is_finite()) {
        return 0.5 * (x1 + x2);
    }
    let d1 = g1 + g2 - 3.0 * (f1 - f2) / (x1 - x2);
    let d2s = d1 * d1 - g1 * g2;
    if d2s >= 0.0 {
        let d2 = d2s.sqrt();
        if x1 <= x2 {
            x2 - (x2 - x1) * ((g2 + d2 - d1) / (g2 - g1 + 2.0 * d2))
        } else {
            x1 - (x1 - x2) * ((g1 + d2 - d1) / (g1 - g2 + 2.0 * d2))
        }
    } else {
        0.5 * (x1 + x2)
    }
}

/// Bounded scalar minimization by Brent's method (golden section with
/// parabolic interpolation). `tol` is an absolute tolerance on the minimizer
/// location; `f` is never evaluated outside `[lo, hi]`.
pub fn brent_minimize<F>(mut f: F, lo: f64, hi: f64, tol: f64) -> f64
where
    F: FnMut(f64) -> f64,
{
    assert!(lo < hi, "brent_minimize requires lo < hi");
    const GOLDEN: f64 = 0.381_966_011_250_105_2;
    const MAX_ITER: usize = 200;

    let mut a = lo;
    let mut b = hi;
    let tol = tol.abs().max(1e-15);
    let sqrt_eps = f64::EPSILON.sqrt();

    let mut x = a + GOLDEN * (b - a);
    let mut w = x;
    let mut v = x;
    let mut fx = f(x);
    let mut fw = fx;
    let mut fv = fx;
    let mut d = 0.0f64;
    let mut e = 0.0f64;

    for _ in 0..MAX_ITER {
        let m = 0.5 * (a + b);
        let tol1 = sqrt_eps * x.abs() + tol;
        let tol2 = 2.0 * tol1;
        if (x - m).abs() <= tol2 - 0.5 * (b - a) {
            break;
        }

        let mut take_golden = true;
        if e.abs() > tol1 {
            // Parabolic fit through (x, w, v).
            let r = (x - w) * (fx - fv);
            let q0 = (x - v) * (fx - fw);
            let mut p = (x - v) * q0 - (x - w) * r;
            let mut q = 2.0 * (q0 - r);
            if q > 0.0 {
                p = -p;
            } else {
                q = -q;
            }
            let e_prev = e;
            e = d;
            if p.abs() < (0.5 * q * e_prev).abs() && p > q * (a - x) && p < q * (b - x) {
                d = p / q;
                let u = x + d;
                if (u - a) < tol2 || (b - u) < tol2 {
                    d = if x < m { tol1 } else { -tol1 };
                }
                take_golden = false;
            }
        }
        if take_golden {
            e = if x < m { b - x } else { a - x };
            d = GOLDEN * e;
        }

        let u = if d.abs() >= tol1 {
            x + d
        } else if d >= 0.0 {
            x + tol1
        } else {
            x - tol1
        };
        let u = u.clamp(a, b);
        let fu = f(u);

        if fu <= fx {
            if u >= x {
                a = x;
            } else {
                b = x;
            }
            v = w;
            fv = fw;
            w = x;
            fw = fx;
            x = u;
            fx = fu;
        } else {
            if u >= x {
                b = u;
            } else {
                a = u;
            }
            if fu <= fw || w == x {
                v = w;
                fv = fw;
                w = u;
                fw = fu;
            } else if fu <= fv || v == x || v == w {
                v = u;
                fv = fu;
            }
        }
    }
    x
}

/// Compares the analytic gradient of `f` at `x` against central finite
/// differences, returning the worst per-coordinate relative error with the
/// denominator floored at one.
pub fn check_gradient<F>(mut f: F, x: &[f64], step: f64) -> f64
where
    F: FnMut(&[f64]) -> ObjectiveEval,
{
    let analytic = f(x).gradient;
    let mut worst = 0.0f64;
    let mut probe = x.to_vec();
    for i in 0..x.len() {
        probe[i] = x[i] + step;
        let fp = f(&probe).value;
        probe[i] = x[i] - step;
        let fm = f(&probe).value;
        probe[i] = x[i];
        let numeric = (fp - fm) / (2.0 * step);
        let rel = (numeric - analytic[i]).abs() / analytic[i].abs().max(1.0);
        worst = worst.max(rel);
    }
    worst
}
