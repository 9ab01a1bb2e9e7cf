//! Experiment parameters and the flat `key = value` config format.
//!
//! ```text
//! # comments start with '#'
//! n_subbands = 512
//! users = auto
//! snr_db = 10
//! trials = 500
//! seed = 7
//! ```
//!
//! Exactly one of `n0`, `snr_db`, `ebn0_db` sets the noise level.

use std::fmt::Write as _;
use std::str::FromStr;

use crate::analytics::{db_to_linear, solve_ebn0};
use crate::error::{Error, Result};
use crate::pooling::{PoolingParams, UserLimit};
use crate::sensing::SensingConfig;

/// How the noise level is specified. SNR is `P̄/N₀`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NoiseSpec {
    N0(f64),
    SnrDb(f64),
    EbN0Db(f64),
}

impl NoiseSpec {
    /// N₀ for the given P̄. Eb/N₀ goes through the primary's implicit
    /// spectral-efficiency equation: `P̄/N₀ = Eb/N₀ · C₁`.
    pub fn resolve_n0(&self, p_avg: f64) -> Result<f64> {
        let n0 = match *self {
            NoiseSpec::N0(n0) => n0,
            NoiseSpec::SnrDb(db) => p_avg / db_to_linear(db),
            NoiseSpec::EbN0Db(db) => {
                let sol = solve_ebn0(db_to_linear(db))?;
                p_avg * sol.n0
            }
        };
        if !(n0 > 0.0 && n0.is_finite()) {
            return Err(Error::config(self.key(), format!("resolves to invalid noise power {n0}")));
        }
        Ok(n0)
    }

    pub fn key(&self) -> &'static str {
        match self {
            NoiseSpec::N0(_) => "n0",
            NoiseSpec::SnrDb(_) => "snr_db",
            NoiseSpec::EbN0Db(_) => "ebn0_db",
        }
    }

    pub fn value(&self) -> f64 {
        match *self {
            NoiseSpec::N0(v) | NoiseSpec::SnrDb(v) | NoiseSpec::EbN0Db(v) => v,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SensingParams {
    pub m_samples: usize,
    /// Decision threshold as a multiple of N₀.
    pub threshold_factor: f64,
}

impl SensingParams {
    pub fn config(&self, n0: f64) -> Result<SensingConfig> {
        SensingConfig::with_threshold(self.m_samples, n0, self.threshold_factor * n0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SystemParams {
    pub n_subbands: usize,
    pub users: UserLimit,
    pub noise: NoiseSpec,
    pub p_avg: f64,
    pub trials: usize,
    pub seed: u64,
    pub sensing: Option<SensingParams>,
}

impl Default for SystemParams {
    fn default() -> Self {
        Self {
            n_subbands: 16,
            users: UserLimit::Fixed(5),
            noise: NoiseSpec::N0(1.0),
            p_avg: 1.0,
            trials: 1000,
            seed: 1,
            sensing: None,
        }
    }
}

impl SystemParams {
    pub fn validate(&self) -> Result<()> {
        if self.n_subbands == 0 {
            return Err(Error::config("n_subbands", "must be at least 1"));
        }
        if self.users == UserLimit::Fixed(0) {
            return Err(Error::config("users", "must be at least 1 or `auto`"));
        }
        if self.trials == 0 {
            return Err(Error::config("trials", "must be at least 1"));
        }
        if !(self.p_avg > 0.0 && self.p_avg.is_finite()) {
            return Err(Error::config("p_avg", "must be a positive number"));
        }
        let v = self.noise.value();
        match self.noise {
            NoiseSpec::N0(_) if !(v > 0.0 && v.is_finite()) => {
                return Err(Error::config("n0", "must be a positive number"))
            }
            _ if !v.is_finite() => return Err(Error::config(self.noise.key(), "must be finite")),
            _ => {}
        }
        if let Some(s) = &self.sensing {
            if s.m_samples == 0 {
                return Err(Error::config("sensing_m", "must be at least 1"));
            }
            if !(s.threshold_factor > 0.0 && s.threshold_factor.is_finite()) {
                return Err(Error::config("sensing_threshold", "must be a positive number"));
            }
        }
        Ok(())
    }

    pub fn n0(&self) -> Result<f64> {
        self.noise.resolve_n0(self.p_avg)
    }

    pub fn pooling(&self) -> Result<PoolingParams> {
        Ok(PoolingParams {
            n_subbands: self.n_subbands,
            users: self.users,
            n0: self.n0()?,
            p_avg: self.p_avg,
        })
    }

    /// Serializes every field; [`SystemParams::from_config_str`] reads it back unchanged.
    pub fn to_config_string(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "n_subbands = {}", self.n_subbands);
        let _ = writeln!(s, "users = {}", format_users(self.users));
        let _ = writeln!(s, "{} = {}", self.noise.key(), self.noise.value());
        let _ = writeln!(s, "p_avg = {}", self.p_avg);
        let _ = writeln!(s, "trials = {}", self.trials);
        let _ = writeln!(s, "seed = {}", self.seed);
        if let Some(sens) = &self.sensing {
            let _ = writeln!(s, "sensing_m = {}", sens.m_samples);
            let _ = writeln!(s, "sensing_threshold = {}", sens.threshold_factor);
        }
        s
    }

    /// Parses a config on top of [`SystemParams::default`].
    pub fn from_config_str(text: &str) -> Result<Self> {
        ParamOverrides::parse_config(text)?.apply(&Self::default())
    }

    /// `(key, value)` pairs in config order, for CSV audit headers.
    pub fn audit_pairs(&self) -> Vec<(String, String)> {
        self.to_config_string()
            .lines()
            .filter_map(|l| l.split_once(" = "))
            .map(|(k, v)| (k.to_string(), v.to_string()))
            .collect()
    }
}

pub fn format_users(users: UserLimit) -> String {
    match users {
        UserLimit::Fixed(l) => l.to_string(),
        UserLimit::Auto => "auto".into(),
    }
}

pub fn parse_users(s: &str) -> Result<UserLimit> {
    let s = s.trim();
    if s.eq_ignore_ascii_case("auto") {
        return Ok(UserLimit::Auto);
    }
    match s.parse::<usize>() {
        Ok(0) => Err(Error::config("users", "must be at least 1 or `auto`")),
        Ok(l) => Ok(UserLimit::Fixed(l)),
        Err(_) => Err(Error::config("users", format!("expected an integer or `auto`, got `{s}`"))),
    }
}

/// Partially specified parameters, from a config file or command-line flags.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ParamOverrides {
    pub n_subbands: Option<usize>,
    pub users: Option<UserLimit>,
    pub noise: Option<NoiseSpec>,
    pub p_avg: Option<f64>,
    pub trials: Option<usize>,
    pub seed: Option<u64>,
    pub sensing_m: Option<usize>,
    pub sensing_threshold: Option<f64>,
}

fn parse_field<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .trim()
        .parse()
        .map_err(|_| Error::config(key, format!("cannot parse `{}`", value.trim())))
}

impl ParamOverrides {
    pub fn parse_config(text: &str) -> Result<Self> {
        let mut out = Self::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::config(format!("line {}", lineno + 1), "expected `key = value`"))?;
            let key = key.trim();
            match key {
                "n_subbands" => out.n_subbands = Some(parse_field(key, value)?),
                "users" => out.users = Some(parse_users(value)?),
                "n0" => out.set_noise(NoiseSpec::N0(parse_field(key, value)?))?,
                "snr_db" => out.set_noise(NoiseSpec::SnrDb(parse_field(key, value)?))?,
                "ebn0_db" => out.set_noise(NoiseSpec::EbN0Db(parse_field(key, value)?))?,
                "p_avg" => out.p_avg = Some(parse_field(key, value)?),
                "trials" => out.trials = Some(parse_field(key, value)?),
                "seed" => out.seed = Some(parse_field(key, value)?),
                "sensing_m" => out.sensing_m = Some(parse_field(key, value)?),
                "sensing_threshold" => out.sensing_threshold = Some(parse_field(key, value)?),
                other => return Err(Error::config(other, "unknown key")),
            }
        }
        Ok(out)
    }

    /// Sets the noise level, refusing a second, different noise key.
    pub fn set_noise(&mut self, noise: NoiseSpec) -> Result<()> {
        if let Some(prev) = self.noise {
            return Err(Error::config(
                noise.key(),
                format!("noise already set via `{}`; give exactly one of n0, snr_db, ebn0_db", prev.key()),
            ));
        }
        self.noise = Some(noise);
        Ok(())
    }

    /// Fields set in `other` win.
    pub fn merge(self, other: ParamOverrides) -> ParamOverrides {
        ParamOverrides {
            n_subbands: other.n_subbands.or(self.n_subbands),
            users: other.users.or(self.users),
            noise: other.noise.or(self.noise),
            p_avg: other.p_avg.or(self.p_avg),
            trials: other.trials.or(self.trials),
            seed: other.seed.or(self.seed),
            sensing_m: other.sensing_m.or(self.sensing_m),
            sensing_threshold: other.sensing_threshold.or(self.sensing_threshold),
        }
    }

    pub fn apply(&self, base: &SystemParams) -> Result<SystemParams> {
        let sensing = match (self.sensing_m, self.sensing_threshold, base.sensing) {
            (None, None, s) => s,
            (m, t, s) => {
                let m = m
                    .or(s.map(|s| s.m_samples))
                    .ok_or_else(|| Error::config("sensing_m", "required when sensing_threshold is set"))?;
                let threshold_factor = t
                    .or(s.map(|s| s.threshold_factor))
                    .unwrap_or(crate::sensing::DEFAULT_THRESHOLD_FACTOR);
                Some(SensingParams {
                    m_samples: m,
                    threshold_factor,
                })
            }
        };
        let params = SystemParams {
            n_subbands: self.n_subbands.unwrap_or(base.n_subbands),
            users: self.users.unwrap_or(base.users),
            noise: self.noise.unwrap_or(base.noise),
            p_avg: self.p_avg.unwrap_or(base.p_avg),
            trials: self.trials.unwrap_or(base.trials),
            seed: self.seed.unwrap_or(base.seed),
            sensing,
        };
        params.validate()?;
        Ok(params)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_flat_config() {
        let p = SystemParams::from_config_str(
            "# fig 7 setup\nn_subbands = 512\nusers = auto\nsnr_db = 10  # mid SNR\ntrials=500\nseed = 9\n",
        )
        .unwrap();
        assert_eq!(p.n_subbands, 512);
        assert_eq!(p.users, UserLimit::Auto);
        assert_eq!(p.noise, NoiseSpec::SnrDb(10.0));
        assert_eq!(p.trials, 500);
        assert_eq!(p.seed, 9);
        assert_eq!(p.p_avg, 1.0);
    }

    #[test]
    fn rejects_two_noise_keys() {
        let err = SystemParams::from_config_str("n0 = 1\nsnr_db = 3\n").unwrap_err();
        assert!(matches!(err, Error::Config { ref field, .. } if field == "snr_db"));
    }

    #[test]
    fn errors_name_the_field() {
        let cases = [
            ("trials = 0", "trials"),
            ("users = many", "users"),
            ("n_subbands = x", "n_subbands"),
            ("bogus = 1", "bogus"),
            ("n0 = -1", "n0"),
            ("sensing_threshold = 3", "sensing_m"),
        ];
        for (text, want) in cases {
            match SystemParams::from_config_str(text) {
                Err(Error::Config { field, .. }) => assert_eq!(field, want, "{text}"),
                other => panic!("{text}: {other:?}"),
            }
        }
    }

    #[test]
    fn snr_resolution() {
        let n0 = NoiseSpec::SnrDb(10.0).resolve_n0(1.0).unwrap();
        assert!((n0 - 0.1).abs() < 1e-15);
        let n0 = NoiseSpec::SnrDb(0.0).resolve_n0(2.0).unwrap();
        assert!((n0 - 2.0).abs() < 1e-15);
    }

    #[test]
    fn ebn0_resolution_is_consistent() {
        let p_avg = 1.0;
        let n0 = NoiseSpec::EbN0Db(8.0).resolve_n0(p_avg).unwrap();
        let sol = solve_ebn0(db_to_linear(8.0)).unwrap();
        assert!((p_avg / n0 - db_to_linear(8.0) * sol.c1_inf).abs() < 1e-9);
    }

    #[test]
    fn merge_prefers_later() {
        let file = ParamOverrides::parse_config("seed = 1\ntrials = 10").unwrap();
        let flags = ParamOverrides {
            seed: Some(2),
            ..Default::default()
        };
        let m = file.merge(flags);
        assert_eq!(m.seed, Some(2));
        assert_eq!(m.trials, Some(10));
    }
}
