//! Brute-force reference implementations used by the integration tests.
//! None of them call into the library's solvers.

#![allow(dead_code)]

use rand::Rng;

/// Weighted mean of `v[s..=t]`; a single element is its own mean.
pub fn range_avg(v: &[f64], w: &[f64], s: usize, t: usize) -> f64 {
    if s == t {
        return v[s];
    }
    let mut num = 0.0;
    let mut den = 0.0;
    for i in s..=t {
        num += w[i] * v[i];
        den += w[i];
    }
    num / den
}

/// Isotonic regression through `f_i = max_{s ≤ i} min_{t ≥ i} Av(s, t)`.
pub fn min_max_isotonic(v: &[f64], w: &[f64]) -> Vec<f64> {
    let n = v.len();
    (0..n)
        .map(|i| {
            (0..=i)
                .map(|s| {
                    (i..n)
                        .map(|t| range_avg(v, w, s, t))
                        .fold(f64::INFINITY, f64::min)
                })
                .fold(f64::NEG_INFINITY, f64::max)
        })
        .collect()
}

/// Every split of `0..n` into contiguous runs, as lists of `(start, end)`.
pub fn contiguous_partitions(n: usize) -> Vec<Vec<(usize, usize)>> {
    let mut out = Vec::new();
    for mask in 0u32..(1u32 << (n - 1)) {
        let mut runs = Vec::new();
        let mut start = 0;
        for cut in 0..n - 1 {
            if mask & (1 << cut) != 0 {
                runs.push((start, cut));
                start = cut + 1;
            }
        }
        runs.push((start, n - 1));
        out.push(runs);
    }
    out
}

/// Least-squares monotone fit by enumerating all block partitions and keeping
/// the cheapest one whose block means are ordered. `increasing = false` gives
/// the nonincreasing fit.
pub fn exhaustive_monotone(v: &[f64], w: &[f64], increasing: bool) -> (Vec<f64>, f64) {
    let n = v.len();
    let mut best = (Vec::new(), f64::INFINITY);
    for runs in contiguous_partitions(n) {
        let means: Vec<f64> = runs
            .iter()
            .map(|&(s, t)| {
                let num: f64 = (s..=t).map(|i| w[i] * v[i]).sum();
                let den: f64 = (s..=t).map(|i| w[i]).sum();
                num / den
            })
            .collect();
        let ordered = means.windows(2).all(|p| {
            if increasing {
                p[0] <= p[1] + 1e-14
            } else {
                p[0] + 1e-14 >= p[1]
            }
        });
        if !ordered {
            continue;
        }
        let mut fit = vec![0.0; n];
        for (&(s, t), &m) in runs.iter().zip(&means) {
            fit[s..=t].fill(m);
        }
        let sse: f64 = (0..n).map(|i| w[i] * (v[i] - fit[i]).powi(2)).sum();
        if sse < best.1 {
            best = (fit, sse);
        }
    }
    best
}

/// Minimum in-sample mean CRPS over all conditional CDFs that are
/// stochastically nondecreasing in `x`.
///
/// The CRPS of every candidate splits into Brier terms on the intervals
/// between consecutive distinct outcomes; each is minimized separately by an
/// exhaustive nonincreasing least-squares fit of the indicator means over the
/// covariate groups.
pub fn exhaustive_idr_mean_crps(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len();
    let mut groups: Vec<f64> = x.to_vec();
    groups.sort_by(f64::total_cmp);
    groups.dedup();
    let mut z: Vec<f64> = y.to_vec();
    z.sort_by(f64::total_cmp);
    z.dedup();

    let sizes: Vec<f64> = groups
        .iter()
        .map(|g| x.iter().filter(|&&v| v == *g).count() as f64)
        .collect();
    let mut total = 0.0;
    for k in 0..z.len().saturating_sub(1) {
        let width = z[k + 1] - z[k];
        let rates: Vec<f64> = groups
            .iter()
            .zip(&sizes)
            .map(|(g, &size)| {
                let hits = (0..n).filter(|&i| x[i] == *g && y[i] <= z[k]).count();
                hits as f64 / size
            })
            .collect();
        let (fit, _) = exhaustive_monotone(&rates, &sizes, false);
        let mut sse = 0.0;
        for i in 0..n {
            let j = groups.iter().position(|g| *g == x[i]).unwrap();
            let ind = if y[i] <= z[k] { 1.0 } else { 0.0 };
            sse += (fit[j] - ind).powi(2);
        }
        total += width * sse;
    }
    total / n as f64
}

/// `(1 / 2n²) Σᵢ Σⱼ |yᵢ − yⱼ|`.
pub fn brute_pc0(y: &[f64]) -> f64 {
    let n = y.len() as f64;
    let mut s = 0.0;
    for a in y {
        for b in y {
            s += (a - b).abs();
        }
    }
    s / (2.0 * n * n)
}

/// Pairwise concordance with half credit for forecast ties, each outcome
/// pair weighted by the difference of the outcomes' midranks.
pub fn brute_cpa(x: &[f64], y: &[f64]) -> Option<f64> {
    let midrank = |v: &[f64], i: usize| {
        let below = v.iter().filter(|&&u| u < v[i]).count() as f64;
        let equal = v.iter().filter(|&&u| u == v[i]).count() as f64;
        below + (equal + 1.0) / 2.0
    };
    let (mut num, mut den) = (0.0, 0.0);
    for i in 0..x.len() {
        for j in 0..x.len() {
            if y[i] < y[j] {
                let weight = midrank(y, j) - midrank(y, i);
                den += weight;
                if x[i] < x[j] {
                    num += weight;
                } else if x[i] == x[j] {
                    num += 0.5 * weight;
                }
            }
        }
    }
    (den > 0.0).then(|| num / den)
}

fn simpson(a: f64, b: f64, fa: f64, fm: f64, fb: f64) -> f64 {
    (b - a) / 6.0 * (fa + 4.0 * fm + fb)
}

fn adaptive(
    f: &dyn Fn(f64) -> f64,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    eps: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
    let (flm, frm) = (f(lm), f(rm));
    let left = simpson(a, m, fa, flm, fm);
    let right = simpson(m, b, fm, frm, fb);
    if depth == 0 || (left + right - whole).abs() <= 15.0 * eps {
        return left + right + (left + right - whole) / 15.0;
    }
    adaptive(f, a, m, fa, flm, fm, left, eps, depth - 1)
        + adaptive(f, m, b, fm, frm, fb, right, eps, depth - 1)
}

/// Adaptive Simpson quadrature of `f` over `[a, b]`, starting from
/// `panels` equal panels so that features wider than a panel are resolved.
pub fn quadrature(f: &dyn Fn(f64) -> f64, a: f64, b: f64, panels: usize, eps: f64) -> f64 {
    let h = (b - a) / panels as f64;
    (0..panels)
        .map(|p| {
            let lo = a + p as f64 * h;
            let hi = if p + 1 == panels { b } else { lo + h };
            let (fa, fm, fb) = (f(lo), f(0.5 * (lo + hi)), f(hi));
            let whole = simpson(lo, hi, fa, fm, fb);
            adaptive(f, lo, hi, fa, fm, fb, whole, eps, 60)
        })
        .sum()
}

/// CRPS of the step CDF with jumps `points` / levels `cdf` at `y`, by
/// numeric integration of `(F(z) − 1{y ≤ z})²` over a range covering the
/// support and the outcome.
pub fn quadrature_crps(points: &[f64], cdf: &[f64], y: f64) -> f64 {
    let f = |z: f64| {
        let k = points.partition_point(|&p| p <= z);
        let fz = if k == 0 { 0.0 } else { cdf[k - 1] };
        let ind = if y <= z { 1.0 } else { 0.0 };
        (fz - ind).powi(2)
    };
    let lo = points[0].min(y) - 1.0;
    let hi = points[points.len() - 1].max(y) + 1.0;
    quadrature(&f, lo, hi, 4096, 1e-13)
}

/// Random step distribution with jump points at least `gap` apart.
pub fn random_step<R: Rng>(rng: &mut R, max_points: usize, gap: f64) -> (Vec<f64>, Vec<f64>) {
    let m = rng.gen_range(1..=max_points);
    let mut points: Vec<f64> = Vec::with_capacity(m);
    while points.len() < m {
        let p: f64 = rng.gen_range(-5.0..5.0);
        if points.iter().all(|q| (q - p).abs() >= gap) {
            points.push(p);
        }
    }
    points.sort_by(f64::total_cmp);
    let mut masses: Vec<f64> = (0..m).map(|_| rng.gen_range(0.05..1.0)).collect();
    let total: f64 = masses.iter().sum();
    masses.iter_mut().for_each(|p| *p /= total);
    let mut cdf = Vec::with_capacity(m);
    let mut acc = 0.0;
    for p in masses {
        acc += p;
        cdf.push(acc);
    }
    cdf[m - 1] = 1.0;
    (points, cdf)
}

/// Random sample of size `n` whose covariate takes values on a coarse grid,
/// so that ties in `x` are common.
pub fn random_sample<R: Rng>(rng: &mut R, n: usize) -> (Vec<f64>, Vec<f64>) {
    let levels = rng.gen_range(1..=n.max(1));
    let slope = rng.gen_range(-1.0..2.0);
    let x: Vec<f64> = (0..n)
        .map(|_| rng.gen_range(0..levels) as f64 / 4.0)
        .collect();
    let y: Vec<f64> = x
        .iter()
        .map(|&xi| {
            let noise: f64 = rng.gen_range(-1.0..1.0);
            let v = slope * xi + noise;
            if rng.gen_bool(0.2) {
                // occasional outcome ties
                (v * 2.0).round() / 2.0
            } else {
                v
            }
        })
        .collect();
    (x, y)
}
