//! Figure-reproduction experiments and their CSV tables.
//!
//! Every table starts with `#`-prefixed audit lines (schema version,
//! command, the fully resolved parameters and the sweep grids), followed
//! by one RFC-4180 header row and the data rows.

use std::io::{self, Write};

use crate::analytics::{
    asymptotic_report, band_gain_convergence, linear_to_db, sum_gain_at_ebn0, AsymptoticReport, ConvergenceRow,
    GainPoint,
};
use crate::error::{Error, Result};
use crate::montecarlo::MeanSe;
use crate::params::{NoiseSpec, SystemParams};
use crate::pooling::{compare_ncr, max_users, simulate, simulate_with, MaxUsersSummary, NcrComparison, UserLimit};
use crate::sensing::{error_rate_sweep, ErrorRateRow, PowerDetector};
use crate::waterfill::{solve_gamma0, Gamma0Solution};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub command: String,
    pub meta: Vec<(String, String)>,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    fn new(command: &str, params: Option<&SystemParams>, header: &[&str]) -> Self {
        let mut meta = vec![
            ("schema_version".to_string(), SCHEMA_VERSION.to_string()),
            ("command".to_string(), command.to_string()),
        ];
        if let Some(p) = params {
            meta.extend(p.audit_pairs());
        }
        Self {
            command: command.to_string(),
            meta,
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    fn meta(&mut self, key: &str, value: impl Into<String>) {
        self.meta.push((key.to_string(), value.into()));
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        for (k, v) in &self.meta {
            writeln!(out, "# {k}={v}")?;
        }
        let mut w = csv::Writer::from_writer(out);
        w.write_record(&self.header)?;
        for row in &self.rows {
            w.write_record(row)?;
        }
        w.flush()
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to a Vec cannot fail");
        String::from_utf8(buf).expect("csv output is UTF-8")
    }

    /// Column index by header name.
    pub fn column(&self, name: &str) -> Option<usize> {
        self.header.iter().position(|h| h == name)
    }
}

fn f(x: f64) -> String {
    format!("{x}")
}

fn join<T: ToString>(xs: &[T]) -> String {
    xs.iter().map(ToString::to_string).collect::<Vec<_>>().join(";")
}

fn snr_db_of(n0: f64, p_avg: f64) -> f64 {
    linear_to_db(p_avg / n0)
}

/// Default sweeps, one per command.
pub mod defaults {
    pub const GAMMA0_N0: [f64; 10] = [1e-6, 1e-5, 1e-4, 1e-3, 1e-2, 1e-1, 1.0, 10.0, 100.0, 1000.0];
    pub const SUMSE_SNR_DB: [f64; 7] = [-10.0, -5.0, 0.0, 5.0, 10.0, 15.0, 20.0];
    pub const MAXUSERS_N: [usize; 5] = [64, 256, 512, 1024, 2048];
    pub const MAXUSERS_EBN0_DB: [f64; 11] = [0.0, 2.0, 4.0, 6.0, 8.0, 10.0, 12.0, 14.0, 16.0, 18.0, 20.0];
    pub const NCR_SNR_DB: [f64; 9] = [-10.0, -5.0, 0.0, 5.0, 10.0, 15.0, 20.0, 25.0, 30.0];
    pub const CONVERGENCE_N: [usize; 7] = [16, 32, 64, 128, 256, 512, 1024];
    pub const SENSING_SNR_DB: [f64; 4] = [-5.0, 0.0, 5.0, 10.0];
    pub const SENSING_M: [usize; 7] = [1, 2, 5, 10, 20, 50, 100];

    pub fn gains_ebn0_db() -> Vec<f64> {
        (-2..=20).map(f64::from).collect()
    }
}

// ---------------------------------------------------------------- gamma0

pub fn gamma0_table(n0_grid: &[f64]) -> Result<Vec<(Gamma0Solution, AsymptoticReport)>> {
    n0_grid
        .iter()
        .map(|&n0| Ok((solve_gamma0(n0)?, asymptotic_report(n0, 1)?)))
        .collect()
}

pub fn cmd_gamma0(n0_grid: &[f64]) -> Result<Table> {
    let rows = gamma0_table(n0_grid)?;
    let mut t = Table::new("gamma0", None, &["n0", "snr_db", "gamma0", "residual", "delta_inf", "c1_inf"]);
    t.meta("n0_grid", join(n0_grid));
    for (s, r) in rows {
        t.rows.push(vec![
            f(s.n0),
            f(snr_db_of(s.n0, 1.0)),
            f(s.gamma0),
            f(s.residual),
            f(r.delta_inf),
            f(r.c1_inf),
        ]);
    }
    Ok(t)
}

// ---------------------------------------------------------------- fig-sumse

#[derive(Debug, Clone, PartialEq)]
pub struct SumsePoint {
    pub noise: NoiseSpec,
    pub n0: f64,
    pub simulated: MeanSe,
    pub closed_form: AsymptoticReport,
    pub per_user_simulated: Vec<f64>,
    pub mean_achieved: f64,
}

impl SumsePoint {
    pub fn rel_err(&self) -> f64 {
        (self.simulated.mean - self.closed_form.phi_sum_inf).abs() / self.closed_form.phi_sum_inf
    }
}

/// Simulated Φ_sum,N against Φ_sum,∞ at fixed L for each noise point.
pub fn fig_sumse(params: &SystemParams, points: &[NoiseSpec]) -> Result<Vec<SumsePoint>> {
    let users = match params.users {
        UserLimit::Fixed(l) => l,
        UserLimit::Auto => return Err(Error::config("users", "fig-sumse needs a fixed user count")),
    };
    points
        .iter()
        .map(|&noise| {
            let p = SystemParams { noise, ..params.clone() };
            let pool = p.pooling()?;
            let reports = match p.sensing {
                None => simulate(&pool, p.trials, p.seed)?,
                Some(s) => {
                    let cfg = s.config(pool.n0)?;
                    simulate_with(&pool, p.trials, p.seed, |t| PowerDetector::new(cfg, p.seed, t))?
                }
            };
            let simulated: MeanSe = reports.iter().map(|r| r.sum_spectral_eff).collect();
            let per_user_simulated = (0..users)
                .map(|l| reports.iter().map(|r| r.users[l].spectral_eff_per_band).sum::<f64>() / reports.len() as f64)
                .collect();
            let mean_achieved = reports.iter().map(|r| r.achieved_users as f64).sum::<f64>() / reports.len() as f64;
            Ok(SumsePoint {
                noise,
                n0: pool.n0,
                simulated,
                closed_form: asymptotic_report(pool.n0 / pool.p_avg, users)?,
                per_user_simulated,
                mean_achieved,
            })
        })
        .collect()
}

pub fn cmd_fig_sumse(params: &SystemParams, points: &[NoiseSpec]) -> Result<Table> {
    let rows = fig_sumse(params, points)?;
    let users = rows.first().map_or(0, |r| r.per_user_simulated.len());
    let mut header: Vec<String> = [
        "snr_db",
        "n0",
        "gamma0",
        "phi_sum_sim",
        "phi_sum_sim_se",
        "phi_sum_inf",
        "rel_err",
        "achieved_users_mean",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    header.extend((1..=users).map(|l| format!("phi_{l}_sim")));
    header.extend((1..=users).map(|l| format!("phi_{l}_inf")));
    let mut t = Table::new("fig-sumse", Some(params), &[]);
    t.header = header;
    t.meta("grid", join(&points.iter().map(|p| format!("{}:{}", p.key(), p.value())).collect::<Vec<_>>()));
    for r in rows {
        let mut row = vec![
            f(snr_db_of(r.n0, params.p_avg)),
            f(r.n0),
            f(r.closed_form.gamma0),
            f(r.simulated.mean),
            f(r.simulated.std_err),
            f(r.closed_form.phi_sum_inf),
            f(r.rel_err()),
            f(r.mean_achieved),
        ];
        row.extend(r.per_user_simulated.iter().map(|&x| f(x)));
        row.extend(r.closed_form.phi_per_user.iter().map(|&x| f(x)));
        t.rows.push(row);
    }
    Ok(t)
}

// ---------------------------------------------------------------- fig-maxusers

#[derive(Debug, Clone, PartialEq)]
pub struct MaxUsersPoint {
    pub noise: NoiseSpec,
    pub n0: f64,
    pub n_subbands: usize,
    pub summary: MaxUsersSummary,
}

pub fn fig_maxusers(params: &SystemParams, points: &[NoiseSpec], n_list: &[usize]) -> Result<Vec<MaxUsersPoint>> {
    if n_list.is_empty() {
        return Err(Error::config("n_list", "must be nonempty"));
    }
    let mut out = Vec::with_capacity(points.len() * n_list.len());
    for &noise in points {
        let n0 = noise.resolve_n0(params.p_avg)?;
        for &n in n_list {
            let p = SystemParams {
                noise: NoiseSpec::N0(n0),
                n_subbands: n,
                users: UserLimit::Auto,
                ..params.clone()
            };
            p.validate()?;
            let summary = max_users(&p.pooling()?, p.trials, p.seed)?;
            out.push(MaxUsersPoint {
                noise,
                n0,
                n_subbands: n,
                summary,
            });
        }
    }
    Ok(out)
}

pub fn cmd_fig_maxusers(params: &SystemParams, points: &[NoiseSpec], n_list: &[usize]) -> Result<Table> {
    let rows = fig_maxusers(params, points, n_list)?;
    let mut t = Table::new(
        "fig-maxusers",
        Some(params),
        &[
            "ebn0_db",
            "snr_db",
            "n0",
            "n_subbands",
            "users_mean",
            "users_se",
            "users_min",
            "users_max",
            "cognitive_users_mean",
        ],
    );
    t.meta("grid", join(&points.iter().map(|p| format!("{}:{}", p.key(), p.value())).collect::<Vec<_>>()));
    t.meta("n_list", join(n_list));
    for r in rows {
        let ebn0 = match r.noise {
            NoiseSpec::EbN0Db(db) => f(db),
            _ => String::new(),
        };
        t.rows.push(vec![
            ebn0,
            f(snr_db_of(r.n0, params.p_avg)),
            f(r.n0),
            r.n_subbands.to_string(),
            f(r.summary.mean),
            f(r.summary.std_err),
            r.summary.min.to_string(),
            r.summary.max.to_string(),
            f(r.summary.mean_cognitive()),
        ]);
    }
    Ok(t)
}

// ---------------------------------------------------------------- fig-gains

pub fn fig_gains(ebn0_db: &[f64], users: usize) -> Result<Vec<GainPoint>> {
    ebn0_db.iter().map(|&db| sum_gain_at_ebn0(db, users)).collect()
}

pub fn cmd_fig_gains(params: &SystemParams, ebn0_db: &[f64]) -> Result<Table> {
    let users = match params.users {
        UserLimit::Fixed(l) if l >= 2 => l,
        _ => return Err(Error::config("users", "fig-gains needs a fixed user count of at least 2")),
    };
    let rows = fig_gains(ebn0_db, users)?;
    let mut header: Vec<String> = ["ebn0_db", "c1_inf", "n0", "gamma0", "delta_inf"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    header.extend((1..users).map(|k| format!("gain_{k}cu")));
    let mut t = Table::new("fig-gains", Some(params), &[]);
    t.header = header;
    t.meta("ebn0_db_grid", join(ebn0_db));
    for r in rows {
        let mut row = vec![
            f(r.ebn0_db),
            f(r.solution.c1_inf),
            f(r.solution.n0),
            f(r.solution.gamma0),
            f(r.delta_inf),
        ];
        row.extend(r.gains.iter().map(|&g| f(g)));
        t.rows.push(row);
    }
    Ok(t)
}

// ---------------------------------------------------------------- fig-ncr

#[derive(Debug, Clone, PartialEq)]
pub struct NcrPoint {
    pub noise: NoiseSpec,
    pub n0: f64,
    pub comparison: NcrComparison,
}

pub fn fig_ncr(params: &SystemParams, points: &[NoiseSpec]) -> Result<Vec<NcrPoint>> {
    points
        .iter()
        .map(|&noise| {
            let p = SystemParams { noise, ..params.clone() };
            let pool = p.pooling()?;
            Ok(NcrPoint {
                noise,
                n0: pool.n0,
                comparison: compare_ncr(&pool, p.trials, p.seed)?,
            })
        })
        .collect()
}

pub fn cmd_fig_ncr(params: &SystemParams, points: &[NoiseSpec]) -> Result<Table> {
    let rows = fig_ncr(params, points)?;
    let mut t = Table::new(
        "fig-ncr",
        Some(params),
        &[
            "snr_db",
            "n0",
            "cr_mean",
            "cr_se",
            "ncr_mean",
            "ncr_se",
            "gap_mean",
            "gap_se",
            "users_mean",
        ],
    );
    t.meta("grid", join(&points.iter().map(|p| format!("{}:{}", p.key(), p.value())).collect::<Vec<_>>()));
    for r in rows {
        let c = &r.comparison;
        t.rows.push(vec![
            f(snr_db_of(r.n0, params.p_avg)),
            f(r.n0),
            f(c.cognitive.mean),
            f(c.cognitive.std_err),
            f(c.ncr.mean),
            f(c.ncr.std_err),
            f(c.gap.mean),
            f(c.gap.std_err),
            f(c.mean_users),
        ]);
    }
    Ok(t)
}

// ---------------------------------------------------------------- fig-convergence

pub fn fig_convergence(params: &SystemParams, n_list: &[usize]) -> Result<Vec<ConvergenceRow>> {
    let users = match params.users {
        UserLimit::Fixed(l) => l,
        UserLimit::Auto => return Err(Error::config("users", "fig-convergence needs a fixed user count")),
    };
    let n0 = params.n0()? / params.p_avg;
    band_gain_convergence(n0, users, n_list, params.trials, params.seed)
}

pub fn cmd_fig_convergence(params: &SystemParams, n_list: &[usize]) -> Result<Table> {
    let rows = fig_convergence(params, n_list)?;
    let mut t = Table::new(
        "fig-convergence",
        Some(params),
        &["user", "n_subbands", "alpha_mean", "alpha_se", "alpha_inf", "abs_error"],
    );
    t.meta("n_list", join(n_list));
    for r in rows {
        t.rows.push(vec![
            r.user.to_string(),
            r.n_subbands.to_string(),
            f(r.alpha.mean),
            f(r.alpha.std_err),
            f(r.alpha_inf),
            f(r.abs_error()),
        ]);
    }
    Ok(t)
}

// ---------------------------------------------------------------- fig-sensing

pub fn fig_sensing(params: &SystemParams, snr_db: &[f64], m_list: &[usize]) -> Result<Vec<ErrorRateRow>> {
    let factor = params
        .sensing
        .map_or(crate::sensing::DEFAULT_THRESHOLD_FACTOR, |s| s.threshold_factor);
    error_rate_sweep(snr_db, m_list, params.trials, 1.0, factor, params.seed)
}

pub fn cmd_fig_sensing(params: &SystemParams, snr_db: &[f64], m_list: &[usize]) -> Result<Table> {
    let rows = fig_sensing(params, snr_db, m_list)?;
    let mut t = Table::new(
        "fig-sensing",
        Some(params),
        &["snr_db", "m_samples", "miss_rate", "false_alarm_rate", "error_rate"],
    );
    t.meta("snr_db_grid", join(snr_db));
    t.meta("m_list", join(m_list));
    for r in rows {
        t.rows.push(vec![
            f(r.snr_db),
            r.m_samples.to_string(),
            f(r.miss_rate),
            f(r.false_alarm_rate),
            f(r.error_rate()),
        ]);
    }
    Ok(t)
}

// ---------------------------------------------------------------- report

/// Closed-form summary at one operating point plus a Monte Carlo check.
pub fn cmd_report(params: &SystemParams) -> Result<Table> {
    let pool = params.pooling()?;
    let users = match params.users {
        UserLimit::Fixed(l) => l,
        UserLimit::Auto => max_users(&pool, params.trials, params.seed)?.mean.round().max(1.0) as usize,
    };
    let report = asymptotic_report(pool.n0 / pool.p_avg, users)?;
    let sim = fig_sumse(
        &SystemParams {
            users: UserLimit::Fixed(users),
            ..params.clone()
        },
        &[params.noise],
    )?
    .remove(0);

    let mut t = Table::new("report", Some(params), &["quantity", "value"]);
    let mut kv = |k: &str, v: String| t.rows.push(vec![k.to_string(), v]);
    kv("n0", f(pool.n0));
    kv("snr_db", f(snr_db_of(pool.n0, pool.p_avg)));
    kv("users", users.to_string());
    kv("gamma0", f(report.gamma0));
    kv("water_level_inf", f(1.0 / report.gamma0));
    kv("delta_inf", f(report.delta_inf));
    kv("c1_inf", f(report.c1_inf));
    for (l, phi) in report.phi_per_user.iter().enumerate() {
        kv(&format!("phi_{}_inf", l + 1), f(*phi));
    }
    kv("phi_sum_inf", f(report.phi_sum_inf));
    kv("relative_gain_inf", f(report.relative_gain()));
    kv("phi_sum_sim", f(sim.simulated.mean));
    kv("phi_sum_sim_se", f(sim.simulated.std_err));
    kv("rel_err", f(sim.rel_err()));
    kv("achieved_users_mean", f(sim.mean_achieved));
    Ok(t)
}
