//! Subcommand bodies. Each returns the text to emit.

use crate::config::{format_counts, parse_counts, parse_list, ExperimentConfig};
use crate::error::{CliError, Result};
use adsv::analysis::{optimize_binary_split, uniform_priors};
use adsv::channel::{derive_channel_with_limit, ChannelParams};
use adsv::detection::ConditionalLaw;
use adsv::modulation::ModulationScheme;
use adsv::montecarlo::sweep;
use std::fmt::Write;

fn channel_label(preset: &Option<String>, p: &ChannelParams) -> String {
    match preset {
        Some(name) => format!("# channel={name}\n"),
        None => format!("# channel=custom\n# d={}\n# v={}\n# D={}\n", p.distance, p.drift, p.diffusion),
    }
}

pub fn derive(preset: &Option<String>, p: &ChannelParams, skew_limit: f64) -> String {
    let ch = derive_channel_with_limit(p, skew_limit);
    let mut out = channel_label(preset, p);
    let _ = writeln!(out, "mu={}", ch.mu);
    let _ = writeln!(out, "sigma2={}", ch.sigma2);
    let _ = writeln!(out, "skewness={}", ch.skewness);
    let _ = writeln!(out, "ig_shape={}", ch.ig_shape);
    let _ = writeln!(out, "normal_ok={}", ch.normal_ok);
    out
}

/// Grid from `start:stop:count` or a comma-separated list.
pub fn parse_grid(text: &str) -> Result<Vec<f64>> {
    let grid = if let [start, stop, count] = text.split(':').collect::<Vec<_>>()[..] {
        let bad = || CliError::Usage(format!("grid '{text}' must be start:stop:count"));
        let start: f64 = start.trim().parse().map_err(|_| bad())?;
        let stop: f64 = stop.trim().parse().map_err(|_| bad())?;
        let count: usize = count.trim().parse().map_err(|_| bad())?;
        match count {
            0 => Vec::new(),
            1 => vec![start],
            _ => (0..count).map(|i| start + (stop - start) * i as f64 / (count - 1) as f64).collect(),
        }
    } else {
        parse_list("grid", text)?
    };
    if grid.is_empty() {
        return Err(CliError::Usage("the z grid is empty".into()));
    }
    if let Some(z) = grid.iter().find(|z| !(z.is_finite() && **z >= 0.0)) {
        return Err(CliError::Usage(format!("grid point {z} is not a finite z >= 0")));
    }
    Ok(grid)
}

pub struct PdfRequest<'a> {
    pub rows: &'a str,
    pub t_e: f64,
    pub preset: Option<String>,
    pub channel: ChannelParams,
    pub m: Option<u32>,
    pub noisy: bool,
    pub grid: &'a str,
}

/// Per-symbol conditional densities of the statistic on a grid.
///
/// Rows that are time-reversals of each other are allowed (their columns
/// coincide); repeated rows are rejected.
pub fn pdf(req: &PdfRequest) -> Result<String> {
    let counts = parse_counts("rows", req.rows)?;
    let scheme = ModulationScheme::new_permissive(req.t_e, counts)?;
    let rows = scheme.counts();
    for a in 0..rows.len() {
        for b in a + 1..rows.len() {
            if rows[a] == rows[b] {
                return Err(adsv::Error::DegenerateScheme(format!("rows {a} and {b} are identical")).into());
            }
        }
    }
    let n = scheme.n();
    let m = match (req.noisy, req.m) {
        (false, None) => n,
        (false, Some(m)) if m == n => n,
        (false, Some(m)) => {
            return Err(adsv::Error::ModeMismatch { expected: n as usize, got: m as usize }.into());
        }
        (true, Some(m)) => m,
        (true, None) => return Err(CliError::Usage("--noisy needs --m".into())),
    };
    let grid = parse_grid(req.grid)?;
    let sigma2 = req.channel.derive().sigma2;
    let laws = rows
        .iter()
        .map(|row| ConditionalLaw::noisy(row, m, req.t_e, sigma2))
        .collect::<adsv::Result<Vec<_>>>()?;
    let mut out = channel_label(&req.preset, &req.channel);
    let _ = writeln!(out, "# rows={}", format_counts(rows));
    let _ = writeln!(out, "# Te={}", req.t_e);
    let _ = writeln!(out, "# M={m}");
    let _ = writeln!(out, "# noisy={}", req.noisy);
    let header: Vec<String> = (0..laws.len()).map(|b| format!("f{b}")).collect();
    let _ = writeln!(out, "z,{}", header.join(","));
    for z in grid {
        let vals: Vec<String> = laws.iter().map(|l| l.logpdf(z).exp().to_string()).collect();
        let _ = writeln!(out, "{z},{}", vals.join(","));
    }
    Ok(out)
}

pub fn ber(cfg: &ExperimentConfig) -> Result<String> {
    let rows = sweep(&cfg.trial, cfg.axis, &cfg.values, true)?;
    let mut out = cfg.echo();
    let _ = writeln!(out, "{},ber_mc,stderr,ber_theory,degenerate_fraction", cfg.axis);
    for r in rows {
        let e = r.estimate;
        let theory = r.theory.map_or_else(|| "nan".to_string(), |t| t.to_string());
        let degenerate = e.degenerate_trials as f64 / e.trials as f64;
        let _ = writeln!(out, "{},{},{},{theory},{degenerate}", r.value, e.rate, e.stderr);
    }
    Ok(out)
}

pub fn optimize(ns: &[u32], preset: &Option<String>, channel: &ChannelParams, t_e: f64, p_d: f64) -> Result<String> {
    if ns.is_empty() {
        return Err(CliError::Usage("no values of N given".into()));
    }
    let sigma2 = channel.derive().sigma2;
    let mut out = channel_label(preset, channel);
    let _ = writeln!(out, "# Te={t_e}");
    let _ = writeln!(out, "# pd={p_d}");
    out.push_str("N,N0,N1,P_e\n");
    for &n in ns {
        let c = optimize_binary_split(n, t_e, sigma2, p_d, &uniform_priors(2))?;
        let _ = writeln!(out, "{n},{},{},{}", c.n0, c.n1, c.p_error);
    }
    Ok(out)
}
