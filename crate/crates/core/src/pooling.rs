//! The spectrum-pooling protocol: users arrive one after another, each
//! water-fills the sub-bands it senses idle, and every band it puts power
//! on becomes unavailable to everyone after it.

use crate::channel::{draw_user_channel, ChannelRealization};
use crate::error::{Error, Result};
use crate::montecarlo::{run_indexed, MeanSe};
use crate::waterfill::{waterfill_finite, PowerAllocation};

/// How many users arrive in a trial.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UserLimit {
    /// Exactly this many arrivals; users finding no idle band report empty.
    Fixed(usize),
    /// Users keep arriving until no idle band is left.
    Auto,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PoolingParams {
    pub n_subbands: usize,
    pub users: UserLimit,
    /// Noise power N₀ per sub-band.
    pub n0: f64,
    /// Average power P̄ per idle sub-band, per user.
    pub p_avg: f64,
}

impl PoolingParams {
    pub fn new(n_subbands: usize, users: UserLimit, n0: f64) -> Self {
        Self {
            n_subbands,
            users,
            n0,
            p_avg: 1.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_subbands == 0 {
            return Err(Error::invalid("n_subbands must be at least 1"));
        }
        if self.n_subbands >= 1 << 16 && self.users == UserLimit::Auto {
            return Err(Error::invalid("n_subbands must be below 65536 with automatic user count"));
        }
        if let UserLimit::Fixed(0) = self.users {
            return Err(Error::invalid("user count must be at least 1"));
        }
        if !(self.n0 > 0.0 && self.n0.is_finite()) {
            return Err(Error::invalid(format!("n0 must be positive, got {}", self.n0)));
        }
        if !(self.p_avg > 0.0 && self.p_avg.is_finite()) {
            return Err(Error::invalid(format!("p_avg must be positive, got {}", self.p_avg)));
        }
        Ok(())
    }

    fn max_arrivals(&self) -> usize {
        match self.users {
            UserLimit::Fixed(l) => l,
            UserLimit::Auto => self.n_subbands,
        }
    }
}

/// Partition of the N sub-bands into per-user claimed sets Ψ and the idle set Ω.
#[derive(Debug, Clone, PartialEq)]
pub struct OccupancyState {
    n_subbands: usize,
    owner: Vec<Option<usize>>,
    owner_power: Vec<f64>,
    claimed: Vec<Vec<usize>>,
    idle: Vec<usize>,
}

impl OccupancyState {
    pub fn new(n_subbands: usize) -> Self {
        Self {
            n_subbands,
            owner: vec![None; n_subbands],
            owner_power: vec![0.0; n_subbands],
            claimed: Vec::new(),
            idle: (0..n_subbands).collect(),
        }
    }

    pub fn n_subbands(&self) -> usize {
        self.n_subbands
    }

    /// Bands nobody has claimed yet, ascending.
    pub fn idle(&self) -> &[usize] {
        &self.idle
    }

    /// `claimed()[k]` holds the bands user `k + 1` put power on (Ψ_{k+2}).
    pub fn claimed(&self) -> &[Vec<usize>] {
        &self.claimed
    }

    pub fn owner(&self, band: usize) -> Option<usize> {
        self.owner[band]
    }

    /// Transmit power of the user holding `band`, if any.
    pub fn occupant_power(&self, band: usize) -> Option<f64> {
        self.owner[band].map(|_| self.owner_power[band])
    }

    /// Records the bands (with their powers) user `user` takes. Bands
    /// already held by someone else are skipped and counted as collisions.
    fn claim(&mut self, user: usize, bands: impl IntoIterator<Item = (usize, f64)>) -> usize {
        debug_assert_eq!(self.claimed.len() + 1, user);
        let mut taken = Vec::new();
        let mut collisions = 0;
        for (band, power) in bands {
            if self.owner[band].is_some() {
                collisions += 1;
                continue;
            }
            self.owner[band] = Some(user);
            self.owner_power[band] = power;
            taken.push(band);
        }
        taken.sort_unstable();
        let owner = &self.owner;
        self.idle.retain(|&b| owner[b].is_none());
        self.claimed.push(taken);
        collisions
    }

    /// Checks disjointness of the Ψ sets, that they stay inside {0..N},
    /// and that Ω is exactly the complement of their union.
    pub fn check(&self) -> std::result::Result<(), String> {
        let mut seen = vec![false; self.n_subbands];
        for (k, set) in self.claimed.iter().enumerate() {
            for &b in set {
                if b >= self.n_subbands {
                    return Err(format!("band {b} out of range in claimed set of user {}", k + 1));
                }
                if seen[b] {
                    return Err(format!("band {b} claimed twice"));
                }
                seen[b] = true;
                if self.owner[b] != Some(k + 1) {
                    return Err(format!("band {b} owner mismatch"));
                }
            }
        }
        let expected_idle: Vec<usize> = (0..self.n_subbands).filter(|&b| !seen[b]).collect();
        if expected_idle != self.idle {
            return Err("idle set is not the complement of the claimed sets".into());
        }
        if self.owner.iter().enumerate().any(|(b, o)| o.is_some() != seen[b]) {
            return Err("owner table disagrees with claimed sets".into());
        }
        Ok(())
    }
}

/// Decides, for an arriving user, whether a band looks occupied.
pub trait SensingHook {
    fn sensed_occupied(&mut self, user: usize, band: usize, occupant_power: Option<f64>) -> bool;
}

/// Every user knows the true occupancy.
#[derive(Debug, Clone, Copy, Default)]
pub struct PerfectSensing;

impl SensingHook for PerfectSensing {
    fn sensed_occupied(&mut self, _user: usize, _band: usize, occupant_power: Option<f64>) -> bool {
        occupant_power.is_some()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct UserResult {
    pub user_index: usize,
    /// card(Ω_l): bands sensed idle on arrival.
    pub idle_count: usize,
    /// Δ_{l,N} = card(Ω_l)/N.
    pub band_factor_gain: f64,
    /// C_{l,N}; absent when Ω_l is empty.
    pub spectral_eff_per_subband: Option<f64>,
    /// Φ_{l,N} = Δ_{l,N}·C_{l,N}, zero when Ω_l is empty.
    pub spectral_eff_per_band: f64,
    pub claimed_count: Option<usize>,
    pub water_level: Option<f64>,
}

impl UserResult {
    fn empty(user_index: usize) -> Self {
        Self {
            user_index,
            idle_count: 0,
            band_factor_gain: 0.0,
            spectral_eff_per_subband: None,
            spectral_eff_per_band: 0.0,
            claimed_count: None,
            water_level: None,
        }
    }

    pub fn transmitted(&self) -> bool {
        self.idle_count > 0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialReport {
    pub users: Vec<UserResult>,
    /// Φ_sum,N.
    pub sum_spectral_eff: f64,
    /// Largest l with card(Ω_l) > 0.
    pub achieved_users: usize,
    /// Bands a user transmitted on while another user held them. Always
    /// zero under perfect sensing.
    pub collisions: usize,
}

/// What one user step produced.
#[derive(Debug, Clone)]
pub struct StepOutcome {
    pub result: UserResult,
    /// The bands the user water-filled over, ascending.
    pub omega: Vec<usize>,
    /// Indexed like `omega`.
    pub allocation: Option<PowerAllocation>,
}

/// Step-by-step protocol state for one trial.
#[derive(Debug, Clone)]
pub struct PoolingEngine {
    params: PoolingParams,
    state: OccupancyState,
    users: Vec<UserResult>,
    collisions: usize,
}

impl PoolingEngine {
    pub fn new(params: PoolingParams) -> Result<Self> {
        params.validate()?;
        Ok(Self {
            params,
            state: OccupancyState::new(params.n_subbands),
            users: Vec::new(),
            collisions: 0,
        })
    }

    pub fn state(&self) -> &OccupancyState {
        &self.state
    }

    pub fn arrivals(&self) -> usize {
        self.users.len()
    }

    /// True once no further user may arrive.
    pub fn finished(&self) -> bool {
        let n = self.users.len();
        match self.params.users {
            UserLimit::Fixed(l) => n >= l,
            UserLimit::Auto => self.state.idle.is_empty() || n >= self.params.max_arrivals(),
        }
    }

    /// Next user senses, water-fills its idle bands and claims the active ones.
    /// `channel` is consulted only if the user has at least one idle band.
    pub fn step<F>(&mut self, channel: F, hook: &mut dyn SensingHook) -> Result<StepOutcome>
    where
        F: FnOnce(usize) -> Result<ChannelRealization>,
    {
        let user = self.users.len() + 1;
        let n = self.params.n_subbands;
        let omega: Vec<usize> = (0..n)
            .filter(|&b| !hook.sensed_occupied(user, b, self.state.occupant_power(b)))
            .collect();

        if omega.is_empty() {
            self.state.claim(user, std::iter::empty());
            let result = UserResult::empty(user);
            self.users.push(result.clone());
            return Ok(StepOutcome {
                result,
                omega,
                allocation: None,
            });
        }

        let ch = channel(user)?;
        if ch.len() != n {
            return Err(Error::invalid(format!(
                "channel of user {user} has {} gains, expected {n}",
                ch.len()
            )));
        }
        let sub: Vec<f64> = omega.iter().map(|&b| ch.gains[b]).collect();
        let alloc = waterfill_finite(&sub, self.params.n0, self.params.p_avg)?;

        let card = omega.len();
        let c = alloc.rate_sum(&sub, self.params.n0) / card as f64;
        let delta = card as f64 / n as f64;
        let claims: Vec<(usize, f64)> = alloc.active_set.iter().map(|&k| (omega[k], alloc.powers[k])).collect();
        let collisions = self.state.claim(user, claims.iter().copied());
        self.collisions += collisions;
        debug_assert_eq!(self.state.check(), Ok(()));

        let result = UserResult {
            user_index: user,
            idle_count: card,
            band_factor_gain: delta,
            spectral_eff_per_subband: Some(c),
            spectral_eff_per_band: delta * c,
            claimed_count: Some(claims.len() - collisions),
            water_level: Some(alloc.water_level),
        };
        self.users.push(result.clone());
        Ok(StepOutcome {
            result,
            omega,
            allocation: Some(alloc),
        })
    }

    pub fn finish(self) -> TrialReport {
        let sum_spectral_eff = self.users.iter().map(|u| u.spectral_eff_per_band).sum();
        let achieved_users = self
            .users
            .iter()
            .rposition(UserResult::transmitted)
            .map_or(0, |i| i + 1);
        TrialReport {
            users: self.users,
            sum_spectral_eff,
            achieved_users,
            collisions: self.collisions,
        }
    }
}

/// Runs one trial, drawing each user's channel on demand.
pub fn run_trial_with<F>(params: &PoolingParams, mut channel: F, hook: &mut dyn SensingHook) -> Result<TrialReport>
where
    F: FnMut(usize) -> Result<ChannelRealization>,
{
    let mut engine = PoolingEngine::new(*params)?;
    while !engine.finished() {
        engine.step(&mut channel, hook)?;
    }
    Ok(engine.finish())
}

/// Runs one trial under perfect sensing with pre-drawn channels; user `l`
/// uses `channels[l - 1]`. With [`UserLimit::Auto`] arrivals also stop
/// when the channel list runs out.
pub fn run_trial(params: &PoolingParams, channels: &[ChannelRealization]) -> Result<TrialReport> {
    if channels.is_empty() {
        return Err(Error::invalid("at least one channel realization is required"));
    }
    if let Some(c) = channels.iter().find(|c| c.len() != params.n_subbands) {
        return Err(Error::invalid(format!(
            "channel of user {} has {} gains, expected {}",
            c.user_index,
            c.len(),
            params.n_subbands
        )));
    }
    let mut params = *params;
    match params.users {
        UserLimit::Fixed(l) if l > channels.len() => {
            return Err(Error::invalid(format!(
                "{l} users requested but only {} channel realizations given",
                channels.len()
            )))
        }
        UserLimit::Auto if channels.len() < params.n_subbands => {
            // arrivals are capped by the realizations at hand
            params.users = UserLimit::Fixed(channels.len());
            let report = run_trial_with(&params, |l| Ok(channels[l - 1].clone()), &mut PerfectSensing)?;
            return Ok(trim_trailing_empty(report));
        }
        _ => {}
    }
    run_trial_with(&params, |l| Ok(channels[l - 1].clone()), &mut PerfectSensing)
}

fn trim_trailing_empty(mut report: TrialReport) -> TrialReport {
    report.users.truncate(report.achieved_users);
    report
}

/// `trials` independent trials under perfect sensing; trial `t` uses the
/// direct-link streams `(seed, t, user)`.
pub fn simulate(params: &PoolingParams, trials: usize, seed: u64) -> Result<Vec<TrialReport>> {
    simulate_with(params, trials, seed, |_| PerfectSensing)
}

/// Like [`simulate`] with a per-trial sensing hook.
pub fn simulate_with<H, M>(params: &PoolingParams, trials: usize, seed: u64, make_hook: M) -> Result<Vec<TrialReport>>
where
    H: SensingHook,
    M: Fn(u64) -> H + Sync + Send,
{
    params.validate()?;
    if trials == 0 {
        return Err(Error::invalid("trials must be at least 1"));
    }
    let n = params.n_subbands;
    run_indexed(trials, |t| {
        let mut hook = make_hook(t);
        run_trial_with(params, |l| draw_user_channel(seed, t, l, n), &mut hook)
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MaxUsersSummary {
    pub mean: f64,
    pub std_err: f64,
    pub min: usize,
    pub max: usize,
}

impl MaxUsersSummary {
    /// Mean number of users besides the primary.
    pub fn mean_cognitive(&self) -> f64 {
        self.mean - 1.0
    }
}

/// Distribution of the achieved user count when users keep arriving until
/// the band is full.
pub fn max_users(params: &PoolingParams, trials: usize, seed: u64) -> Result<MaxUsersSummary> {
    let params = PoolingParams {
        users: UserLimit::Auto,
        ..*params
    };
    let reports = simulate(&params, trials, seed)?;
    let counts: Vec<usize> = reports.iter().map(|r| r.achieved_users).collect();
    let stats = MeanSe::from_slice(&counts.iter().map(|&c| c as f64).collect::<Vec<_>>());
    Ok(MaxUsersSummary {
        mean: stats.mean,
        std_err: stats.std_err,
        min: counts.iter().copied().min().unwrap_or(0),
        max: counts.iter().copied().max().unwrap_or(0),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NcrComparison {
    pub cognitive: MeanSe,
    pub ncr: MeanSe,
    /// Mean per-trial difference cognitive − NCR.
    pub gap: MeanSe,
    pub mean_users: f64,
}

/// Cognitive sum efficiency against the non-cognitive baseline, in which the
/// primary alone water-fills all N bands with average power L·P̄ (L being
/// the cognitive arm's achieved user count in the same trial). Both arms
/// see the same primary channel.
pub fn compare_ncr(params: &PoolingParams, trials: usize, seed: u64) -> Result<NcrComparison> {
    params.validate()?;
    if trials == 0 {
        return Err(Error::invalid("trials must be at least 1"));
    }
    let n = params.n_subbands;
    let pairs = run_indexed(trials, |t| {
        let report = run_trial_with(params, |l| draw_user_channel(seed, t, l, n), &mut PerfectSensing)?;
        let primary = draw_user_channel(seed, t, 1, n)?;
        let budget = report.achieved_users as f64 * params.p_avg;
        let alloc = waterfill_finite(&primary.gains, params.n0, budget)?;
        let ncr = alloc.rate_sum(&primary.gains, params.n0) / n as f64;
        Ok((report.sum_spectral_eff, ncr, report.achieved_users as f64))
    })?;
    let cr: Vec<f64> = pairs.iter().map(|p| p.0).collect();
    let ncr: Vec<f64> = pairs.iter().map(|p| p.1).collect();
    let gap: Vec<f64> = pairs.iter().map(|p| p.0 - p.1).collect();
    Ok(NcrComparison {
        cognitive: MeanSe::from_slice(&cr),
        ncr: MeanSe::from_slice(&ncr),
        gap: MeanSe::from_slice(&gap),
        mean_users: pairs.iter().map(|p| p.2).sum::<f64>() / trials as f64,
    })
}
