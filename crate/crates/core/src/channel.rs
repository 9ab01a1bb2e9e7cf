//! Block-fading channel realizations.
//!
//! Every formula downstream consumes only power gains `|h|²`, so the
//! generator draws them directly from Exp(1), the power of a unit-variance
//! circularly-symmetric complex Gaussian amplitude. Each (seed, stream)
//! pair owns an independent ChaCha stream, so adding users or running
//! trials on other threads never perturbs an existing realization.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp1;

use crate::error::{Error, Result};

/// What a derived RNG stream is used for. Keeps channel, cross-link and
/// sensing draws of the same (trial, user) from overlapping.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[repr(u8)]
pub enum StreamPurpose {
    DirectLink = 0,
    CrossLink = 1,
    Sensing = 2,
    Ncr = 3,
    SensingSweep = 4,
}

/// Seed plus stream identifier for one independent random stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RngSpec {
    pub seed: u64,
    pub stream_id: u64,
}

impl RngSpec {
    pub const fn new(seed: u64, stream_id: u64) -> Self {
        Self { seed, stream_id }
    }

    /// Stream layout: 8 bits purpose, 16 bits user, 40 bits trial.
    pub fn derive(seed: u64, purpose: StreamPurpose, trial: u64, user: usize) -> Self {
        debug_assert!(trial < (1 << 40));
        debug_assert!(user < (1 << 16));
        let stream_id = ((purpose as u64) << 56) | ((user as u64 & 0xffff) << 40) | (trial & ((1 << 40) - 1));
        Self { seed, stream_id }
    }

    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream_id);
        rng
    }
}

/// Power gains `t_i = |h_l^i|²` of one user over all N sub-bands.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRealization {
    pub user_index: usize,
    pub gains: Vec<f64>,
}

impl ChannelRealization {
    pub fn new(user_index: usize, gains: Vec<f64>) -> Result<Self> {
        if user_index == 0 {
            return Err(Error::invalid("user_index is 1-based"));
        }
        if let Some(g) = gains.iter().find(|g| !(**g >= 0.0) || !g.is_finite()) {
            return Err(Error::invalid(format!("channel gain {g} is not a finite nonnegative value")));
        }
        Ok(Self { user_index, gains })
    }

    pub fn len(&self) -> usize {
        self.gains.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gains.is_empty()
    }
}

/// Draws `n` i.i.d. unit-mean exponential power gains.
pub fn draw_gains(n: usize, rng: RngSpec) -> Result<Vec<f64>> {
    if n == 0 {
        return Err(Error::invalid("number of sub-bands must be at least 1"));
    }
    let mut r = rng.rng();
    Ok((0..n).map(|_| r.sample::<f64, _>(Exp1)).collect())
}

/// Channel of `user` (1-based) in `trial`, drawn from its own direct-link stream.
pub fn draw_user_channel(seed: u64, trial: u64, user: usize, n: usize) -> Result<ChannelRealization> {
    let gains = draw_gains(n, RngSpec::derive(seed, StreamPurpose::DirectLink, trial, user))?;
    Ok(ChannelRealization { user_index: user, gains })
}

/// One inter-transmitter power gain `|c_{l-1,l}|²`, constant over a coherence block.
pub fn draw_cross_gain(rng: RngSpec) -> f64 {
    rng.rng().sample(Exp1)
}
