//! Parallel, order-preserving trial runner and summary statistics.

use rayon::prelude::*;

use crate::error::Result;

/// Runs `f(trial)` for `trial in 0..trials` on the rayon pool. Results come
/// back in trial order, so any reduction over them is independent of the
/// worker count.
pub fn run_indexed<T, F>(trials: usize, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(u64) -> Result<T> + Sync + Send,
{
    (0..trials as u64).into_par_iter().map(f).collect()
}

/// Sample mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeanSe {
    pub mean: f64,
    pub std_err: f64,
    pub count: usize,
}

impl MeanSe {
    pub fn from_slice(xs: &[f64]) -> Self {
        let count = xs.len();
        if count == 0 {
            return Self {
                mean: f64::NAN,
                std_err: f64::NAN,
                count,
            };
        }
        let mean = xs.iter().sum::<f64>() / count as f64;
        let std_err = if count > 1 {
            let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (count - 1) as f64;
            (var / count as f64).sqrt()
        } else {
            0.0
        };
        Self { mean, std_err, count }
    }
}

impl FromIterator<f64> for MeanSe {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let xs: Vec<f64> = iter.into_iter().collect();
        Self::from_slice(&xs)
    }
}
