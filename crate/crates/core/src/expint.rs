//! Exponential integral `E₁(x) = ∫ₓ^∞ e^{-t}/t dt` for real `x > 0`.

use crate::error::{Error, Result};

/// Euler–Mascheroni constant.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

const SERIES_CUTOFF: f64 = 1.0;
const EPS: f64 = 1e-16;
const MAX_ITER: usize = 500;

/// `E₁(x)` with relative error below 1e-12 over `(0, ∞)`.
///
/// Uses the convergent power series up to `x = 1` and a modified-Lentz
/// evaluation of the continued fraction beyond. Underflows to 0 for
/// `x` larger than about 740.
pub fn exp_integral_e1(x: f64) -> Result<f64> {
    if x.is_nan() || x <= 0.0 {
        return Err(Error::Domain(format!("E1 is defined for x > 0, got {x}")));
    }
    if x.is_infinite() {
        return Ok(0.0);
    }
    Ok(if x <= SERIES_CUTOFF { series(x) } else { continued_fraction(x) })
}

fn series(x: f64) -> f64 {
    // E1(x) = -γ - ln x - Σ_{k≥1} (-x)^k / (k·k!)
    let mut sum = 0.0;
    let mut fact_term = 1.0; // (-x)^k / k!
    for k in 1..MAX_ITER {
        fact_term *= -x / k as f64;
        let term = fact_term / k as f64;
        sum += term;
        if term.abs() < EPS * sum.abs().max(EPS) {
            break;
        }
    }
    -EULER_GAMMA - x.ln() - sum
}

fn continued_fraction(x: f64) -> f64 {
    const TINY: f64 = 1e-300;
    let mut b = x + 1.0;
    let mut c = 1.0 / TINY;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..MAX_ITER {
        let an = -((i * i) as f64);
        b += 2.0;
        d = 1.0 / (an * d + b);
        c = b + an / c;
        let del = c * d;
        h *= del;
        if (del - 1.0).abs() < EPS {
            break;
        }
    }
    h * (-x).exp()
}
