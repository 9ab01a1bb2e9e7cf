//! Power detection of occupied sub-bands from M received samples.
//!
//! Within a coherence block the arriving user observes
//! `y(k) = √(|c|²·P)·s(k) + n(k)` on a band someone transmits on, and
//! `y(k) = n(k)` otherwise, with BPSK symbols `s(k) = ±1` and complex
//! noise `n(k) ~ CN(0, N₀)`. The band is declared occupied when the
//! sample mean of `|y(k)|²` exceeds the threshold.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::channel::{RngSpec, StreamPurpose};
use crate::error::{Error, Result};
use crate::montecarlo::run_indexed;
use crate::pooling::SensingHook;

/// Default decision level as a multiple of N₀.
pub const DEFAULT_THRESHOLD_FACTOR: f64 = 2.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SensingConfig {
    pub m_samples: usize,
    pub n0: f64,
    pub threshold: f64,
}

impl SensingConfig {
    /// Threshold defaults to `2·N₀`.
    pub fn new(m_samples: usize, n0: f64) -> Result<Self> {
        Self::with_threshold(m_samples, n0, DEFAULT_THRESHOLD_FACTOR * n0)
    }

    pub fn with_threshold(m_samples: usize, n0: f64, threshold: f64) -> Result<Self> {
        let cfg = Self {
            m_samples,
            n0,
            threshold,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.m_samples == 0 {
            return Err(Error::invalid("sensing needs at least one sample"));
        }
        if !(self.n0 > 0.0 && self.n0.is_finite()) {
            return Err(Error::invalid(format!("n0 must be positive, got {}", self.n0)));
        }
        if !(self.threshold > 0.0 && self.threshold.is_finite()) {
            return Err(Error::invalid(format!("threshold must be positive, got {}", self.threshold)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SensingOutcome {
    pub decided_occupied: bool,
    pub mean_power: f64,
    pub truth_occupied: bool,
}

/// `(1/M) Σ |y(k)|²` for one band. `signal_power` is `|c|²·P`, ignored
/// when the band is idle.
pub fn mean_received_power<R: Rng + ?Sized>(occupied: bool, signal_power: f64, m: usize, n0: f64, rng: &mut R) -> f64 {
    let amp = if occupied { signal_power.sqrt() } else { 0.0 };
    let sigma = (n0 / 2.0).sqrt();
    let mut acc = 0.0;
    for _ in 0..m {
        let s = if occupied && rng.gen::<bool>() { -amp } else { amp };
        let re = s + sigma * rng.sample::<f64, _>(StandardNormal);
        let im = sigma * rng.sample::<f64, _>(StandardNormal);
        acc += re * re + im * im;
    }
    acc / m as f64
}

pub fn sense_subband<R: Rng + ?Sized>(
    occupied: bool,
    tx_power: f64,
    cross_gain: f64,
    cfg: &SensingConfig,
    rng: &mut R,
) -> Result<SensingOutcome> {
    cfg.validate()?;
    if occupied && !(tx_power > 0.0) {
        return Err(Error::invalid("an occupied band needs positive transmit power"));
    }
    if !(cross_gain >= 0.0) {
        return Err(Error::invalid(format!("cross gain must be nonnegative, got {cross_gain}")));
    }
    let mean_power = mean_received_power(occupied, cross_gain * tx_power, cfg.m_samples, cfg.n0, rng);
    Ok(SensingOutcome {
        decided_occupied: mean_power > cfg.threshold,
        mean_power,
        truth_occupied: occupied,
    })
}

/// One cell of a detection-error sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorRateRow {
    pub snr_db: f64,
    pub m_samples: usize,
    /// P(decide idle | occupied).
    pub miss_rate: f64,
    /// P(decide occupied | idle).
    pub false_alarm_rate: f64,
}

impl ErrorRateRow {
    /// Error rate with equally likely occupied and idle bands.
    pub fn error_rate(&self) -> f64 {
        0.5 * (self.miss_rate + self.false_alarm_rate)
    }
}

/// Monte Carlo miss and false-alarm rates over an AWGN link (unit cross
/// gain) with signal power `SNR·N₀` and the given threshold factor.
pub fn error_rate_sweep(
    snr_db: &[f64],
    m_list: &[usize],
    trials: usize,
    n0: f64,
    threshold_factor: f64,
    seed: u64,
) -> Result<Vec<ErrorRateRow>> {
    if snr_db.is_empty() || m_list.is_empty() {
        return Err(Error::invalid("SNR and M lists must be nonempty"));
    }
    if trials == 0 {
        return Err(Error::invalid("trials must be at least 1"));
    }
    let cells: Vec<(f64, usize)> = snr_db.iter().flat_map(|&s| m_list.iter().map(move |&m| (s, m))).collect();
    for &(_, m) in &cells {
        SensingConfig::with_threshold(m, n0, threshold_factor * n0)?;
    }
    run_indexed(cells.len(), |cell| {
        let (snr, m) = cells[cell as usize];
        let cfg = SensingConfig::with_threshold(m, n0, threshold_factor * n0)?;
        let signal = 10f64.powf(snr / 10.0) * n0;
        let mut rng = RngSpec::derive(seed, StreamPurpose::SensingSweep, cell, 0).rng();
        let mut misses = 0usize;
        let mut alarms = 0usize;
        for _ in 0..trials {
            if !sense_subband(true, signal, 1.0, &cfg, &mut rng)?.decided_occupied {
                misses += 1;
            }
            if sense_subband(false, 0.0, 1.0, &cfg, &mut rng)?.decided_occupied {
                alarms += 1;
            }
        }
        Ok(ErrorRateRow {
            snr_db: snr,
            m_samples: m,
            miss_rate: misses as f64 / trials as f64,
            false_alarm_rate: alarms as f64 / trials as f64,
        })
    })
}

/// Plugs the power detector into the pooling protocol: each arriving user
/// measures every band, with a fresh Exp(1) cross gain per band towards
/// whoever occupies it.
#[derive(Debug, Clone)]
pub struct PowerDetector {
    cfg: SensingConfig,
    seed: u64,
    trial: u64,
    current: Option<(usize, ChaCha8Rng)>,
}

impl PowerDetector {
    pub fn new(cfg: SensingConfig, seed: u64, trial: u64) -> Self {
        Self {
            cfg,
            seed,
            trial,
            current: None,
        }
    }
}

impl SensingHook for PowerDetector {
    fn sensed_occupied(&mut self, user: usize, _band: usize, occupant_power: Option<f64>) -> bool {
        if self.current.as_ref().map(|c| c.0) != Some(user) {
            let rng = RngSpec::derive(self.seed, StreamPurpose::Sensing, self.trial, user).rng();
            self.current = Some((user, rng));
        }
        let rng = &mut self.current.as_mut().expect("stream initialised above").1;
        let (occupied, signal) = match occupant_power {
            Some(p) => {
                let cross: f64 = rng.sample(rand_distr::Exp1);
                (true, cross * p)
            }
            None => (false, 0.0),
        };
        mean_received_power(occupied, signal, self.cfg.m_samples, self.cfg.n0, rng) > self.cfg.threshold
    }
}
