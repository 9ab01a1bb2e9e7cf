//! Reference computations used as independent oracles by the test suites.
#![allow(dead_code)]

use quadrature::double_exponential;

/// `∫_a^∞ f(t) dt` by double-exponential quadrature after mapping
/// `t = a + s/(1 − s)` onto `s ∈ [0, 1)`.
pub fn integrate_to_inf<F: Fn(f64) -> f64>(f: F, a: f64) -> f64 {
    let g = |s: f64| {
        if s >= 1.0 {
            return 0.0;
        }
        let t = a + s / (1.0 - s);
        let v = f(t) / ((1.0 - s) * (1.0 - s));
        if v.is_finite() {
            v
        } else {
            0.0
        }
    };
    double_exponential::integrate(g, 0.0, 1.0, 1e-14).integral
}

/// E₁ by quadrature of its defining integral.
pub fn e1_quadrature(x: f64) -> f64 {
    integrate_to_inf(|t| (-t).exp() / t, x)
}

/// CDF at `x` of a noncentral chi-square with `2k` degrees of freedom and
/// noncentrality `lambda`, as a Poisson mixture of central chi-squares.
pub fn ncx2_cdf_even(x: f64, k: usize, lambda: f64) -> f64 {
    let half = lambda / 2.0;
    let mut total = 0.0;
    let mut poisson = (-half).exp();
    for j in 0..400 {
        if j > 0 {
            poisson *= half / j as f64;
        }
        total += poisson * chi2_cdf_even(x, k + j);
        if j as f64 > half && poisson < 1e-18 {
            break;
        }
    }
    total
}

/// Central chi-square CDF with `2k` degrees of freedom:
/// `1 − e^{−x/2} Σ_{i<k} (x/2)^i / i!`.
pub fn chi2_cdf_even(x: f64, k: usize) -> f64 {
    let h = x / 2.0;
    let mut term = 1.0;
    let mut sum = 0.0;
    for i in 0..k {
        if i > 0 {
            term *= h / i as f64;
        }
        sum += term;
    }
    1.0 - (-h).exp() * sum
}

/// Kolmogorov–Smirnov statistic of `samples` against the Exp(1) CDF.
pub fn ks_exp1(samples: &[f64]) -> f64 {
    let mut s = samples.to_vec();
    s.sort_by(f64::total_cmp);
    let n = s.len() as f64;
    s.iter()
        .enumerate()
        .map(|(i, &x)| {
            let cdf = 1.0 - (-x).exp();
            (cdf - i as f64 / n).abs().max(((i + 1) as f64 / n - cdf).abs())
        })
        .fold(0.0, f64::max)
}

/// Brute-force water-filling: bisection on the water level until the
/// mean power matches, independent of the sort-and-check algorithm.
pub fn waterfill_bisection(gains: &[f64], n0: f64, p_avg: f64) -> f64 {
    let mean_power = |w: f64| gains.iter().map(|&t| if t > 0.0 { (w - n0 / t).max(0.0) } else { 0.0 }).sum::<f64>() / gains.len() as f64;
    let mut lo = 0.0;
    let mut hi = p_avg * gains.len() as f64 + gains.iter().filter(|&&t| t > 0.0).map(|&t| n0 / t).fold(f64::INFINITY, f64::min);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mean_power(mid) < p_avg {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}
