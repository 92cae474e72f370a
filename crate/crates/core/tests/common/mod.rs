//! Independent oracles shared by the integration and acceptance tests. None of
//! these reuse the homotopy or the exact integration code they check.
#![allow(dead_code)]

use locopath::linalg::orthonormal_columns;
use locopath::{Dataset, SolutionPath};
use ndarray::{Array1, Array2};
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian_matrix(n: usize, p: usize, rng: &mut ChaCha8Rng) -> Array2<f64> {
    Array2::from_shape_fn((n, p), |_| StandardNormal.sample(rng))
}

pub fn gaussian_vector(n: usize, rng: &mut ChaCha8Rng) -> Array1<f64> {
    Array1::from_shape_fn(n, |_| StandardNormal.sample(rng))
}

/// Random sparse-signal instance `y = X beta + noise`.
pub fn random_instance(n: usize, p: usize, seed: u64) -> Dataset {
    let mut r = rng(seed);
    let x = gaussian_matrix(n, p, &mut r);
    let k = (p / 4).clamp(1, 5);
    let mut beta = Array1::zeros(p);
    for j in 0..k {
        beta[j] = r.random_range(0.5..2.0) * if r.random_bool(0.5) { 1.0 } else { -1.0 };
    }
    let y = x.dot(&beta) + gaussian_vector(n, &mut r);
    Dataset::with_default_names(x, y).unwrap()
}

/// Design with orthonormal columns (`X^T X = I`) and response `X beta + sigma z`.
pub fn orthonormal_instance(n: usize, p: usize, beta: &[f64], sigma: f64, seed: u64) -> Dataset {
    let mut r = rng(seed);
    let x = orthonormal_columns(&gaussian_matrix(n, p, &mut r)).unwrap();
    let y = x.dot(&Array1::from(beta.to_vec())) + gaussian_vector(n, &mut r) * sigma;
    Dataset::with_default_names(x, y).unwrap()
}

fn soft(x: f64, t: f64) -> f64 {
    if x > t {
        x - t
    } else if x < -t {
        x + t
    } else {
        0.0
    }
}

/// Cyclic coordinate descent for `0.5 ||y - X b||^2 + lambda ||b||_1` with the
/// coefficients in `excluded` fixed at zero.
pub fn coordinate_descent(x: &Array2<f64>, y: &Array1<f64>, lambda: f64, excluded: &[usize]) -> Array1<f64> {
    let (_, p) = x.dim();
    let norms: Vec<f64> = (0..p).map(|j| x.column(j).dot(&x.column(j))).collect();
    let mut b = Array1::<f64>::zeros(p);
    let mut r = y.clone();
    for sweep in 0..500_000 {
        let mut max_change = 0.0_f64;
        for j in 0..p {
            if excluded.contains(&j) || norms[j] == 0.0 {
                continue;
            }
            let xj = x.column(j);
            let rho = xj.dot(&r) + norms[j] * b[j];
            let new = soft(rho, lambda) / norms[j];
            let delta = new - b[j];
            if delta != 0.0 {
                r.scaled_add(-delta, &xj);
                b[j] = new;
                max_change = max_change.max(delta.abs() * norms[j].sqrt());
            }
        }
        if max_change < 1e-14 && sweep > 2 {
            // full KKT check on a freshly computed residual
            let res = y - &x.dot(&b);
            let c = x.t().dot(&res);
            let ok = (0..p).filter(|j| !excluded.contains(j)).all(|j| {
                if b[j] != 0.0 {
                    (c[j] - lambda * b[j].signum()).abs() <= 1e-10 * (1.0 + lambda)
                } else {
                    c[j].abs() <= lambda + 1e-10 * (1.0 + lambda)
                }
            });
            if ok {
                return b;
            }
            r = res;
        }
    }
    panic!("coordinate descent did not converge");
}

/// Largest violation of the lasso stationarity conditions at `lambda` for
/// coefficients `b`: inactive `|c_j| <= lambda`, active `c_j = lambda sign(b_j)`.
pub fn kkt_violation(data: &Dataset, offset: Option<&Array1<f64>>, b: &Array1<f64>, lambda: f64, excluded: &[usize]) -> f64 {
    let y = match offset {
        Some(o) => data.y() - o,
        None => data.y().clone(),
    };
    let c = data.x().t().dot(&(&y - &data.x().dot(b)));
    (0..data.p())
        .filter(|j| !excluded.contains(j))
        .map(|j| {
            if b[j] != 0.0 {
                (c[j] - lambda * b[j].signum()).abs()
            } else {
                (c[j].abs() - lambda).max(0.0)
            }
        })
        .fold(0.0, f64::max)
}

/// Composite Simpson rule with `intervals` (even) subintervals.
pub fn simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, intervals: usize) -> f64 {
    assert!(intervals.is_multiple_of(2));
    let h = (b - a) / intervals as f64;
    let mut s = f(a) + f(b);
    for i in 1..intervals {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        s += w * f(a + h * i as f64);
    }
    s * h / 3.0
}

/// Composite Simpson on a uniform base grid of `intervals` panels, each
/// refined by recursive bisection until the two-level estimates agree. The
/// refinement locates kinks of piecewise-smooth integrands without knowing
/// where they are.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, intervals: usize, floor: f64) -> f64 {
    fn rec<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            return left + right + delta / 15.0;
        }
        rec(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1) + rec(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
    }
    let h = (b - a) / intervals as f64;
    let scale = simpson(&f, a, b, intervals).abs().max(f64::MIN_POSITIVE);
    let tol = (1e-10 * scale).max(floor) / intervals as f64;
    (0..intervals)
        .map(|i| {
            let (lo, hi) = (a + h * i as f64, if i + 1 == intervals { b } else { a + h * (i + 1) as f64 });
            let (fa, fm, fb) = (f(lo), f(0.5 * (lo + hi)), f(hi));
            let whole = (hi - lo) / 6.0 * (fa + 4.0 * fm + fb);
            rec(&f, lo, hi, fa, fm, fb, whole, tol, 30)
        })
        .sum()
}

/// Supremum of `g` on `[a, b]`: dense sampling followed by golden-section
/// refinement around the best sample.
pub fn numeric_sup<F: Fn(f64) -> f64>(g: F, a: f64, b: f64, samples: usize) -> f64 {
    let h = (b - a) / samples as f64;
    let (mut best_i, mut best) = (0, g(a));
    for i in 1..=samples {
        let v = g(a + h * i as f64);
        if v > best {
            best = v;
            best_i = i;
        }
    }
    let (mut lo, mut hi) = ((a + h * (best_i as f64 - 1.0)).max(a), (a + h * (best_i as f64 + 1.0)).min(b));
    let phi = (5f64.sqrt() - 1.0) / 2.0;
    for _ in 0..200 {
        let m1 = hi - phi * (hi - lo);
        let m2 = lo + phi * (hi - lo);
        if g(m1) >= g(m2) {
            hi = m2;
        } else {
            lo = m1;
        }
    }
    best.max(g(0.5 * (lo + hi)))
}

/// `||p1 - p2||_{s,t}` by adaptive quadrature on a uniform base grid over
/// `[0, max lambda_max]`; `s`, `t` in {1, 2, inf} (inf encoded as 0).
pub fn quadrature_distance(p1: &SolutionPath, p2: &SolutionPath, s: u8, t: u8, intervals: usize) -> f64 {
    let top = p1.lambda_max().max(p2.lambda_max());
    // Differences at roundoff level must not drive the recursion to full depth.
    let size = (0..p1.p()).map(|k| p1.coef_at(k, 0.0).abs().max(p2.coef_at(k, 0.0).abs())).fold(0.0, f64::max);
    let inner: Vec<f64> = (0..p1.p())
        .map(|k| {
            let d = |l: f64| p1.coef_at(k, l) - p2.coef_at(k, l);
            match s {
                1 => adaptive_simpson(|l| d(l).abs(), 0.0, top, intervals, 1e-14 * size * top),
                2 => adaptive_simpson(|l| d(l) * d(l), 0.0, top, intervals, 1e-14 * size * size * top).sqrt(),
                _ => numeric_sup(|l| d(l).abs(), 0.0, top, intervals),
            }
        })
        .collect();
    match t {
        1 => inner.iter().sum(),
        2 => inner.iter().map(|v| v * v).sum::<f64>().sqrt(),
        _ => inner.iter().cloned().fold(0.0, f64::max),
    }
}

/// Least-squares coefficients `X^T y` for an orthonormal design.
pub fn ls_orthonormal(data: &Dataset) -> Array1<f64> {
    data.x().t().dot(data.y())
}

/// One-sample Kolmogorov-Smirnov statistic against `cdf`.
pub fn ks_statistic<F: Fn(f64) -> f64>(sample: &[f64], cdf: F) -> f64 {
    let mut s = sample.to_vec();
    s.sort_by(f64::total_cmp);
    let n = s.len() as f64;
    s.iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
        })
        .fold(0.0, f64::max)
}

/// Asymptotic Kolmogorov p-value `P(K > sqrt(n) D)` with the small-sample
/// correction of Stephens.
pub fn ks_pvalue(d: f64, n: usize) -> f64 {
    let sn = (n as f64).sqrt();
    let lambda = (sn + 0.12 + 0.11 / sn) * d;
    let mut sum = 0.0;
    for k in 1..=200 {
        let k = k as f64;
        let term = 2.0 * (-1f64).powf(k - 1.0) * (-2.0 * k * k * lambda * lambda).exp();
        sum += term;
        if term.abs() < 1e-16 {
            break;
        }
    }
    sum.clamp(0.0, 1.0)
}
