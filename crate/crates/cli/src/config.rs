//! Flat `key=value` experiment configuration for `adsv ber`.
//!
//! Blank lines are ignored. A line starting with `#` is read as a setting
//! when the rest of it is `key=value` with a known key and is otherwise a
//! comment, so the metadata header of a result file is itself a valid
//! configuration.

use crate::error::{config_err, Result};
use adsv::channel::{ChannelParams, PropagationModel};
use adsv::modulation::ModulationScheme;
use adsv::montecarlo::{DetectorKind, SweepAxis, TrialConfig};
use std::collections::BTreeMap;
use std::str::FromStr;

pub const KEYS: [&str; 19] = [
    "channel", "d", "v", "D", "model", "q", "N", "counts", "N0", "N1", "Te", "pd", "theta", "detector", "trials",
    "seed", "axis", "values", "out",
];

/// A fully resolved experiment.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    /// Preset name, or `None` for explicit `d`, `v`, `D`.
    pub preset: Option<String>,
    pub trial: TrialConfig,
    pub axis: SweepAxis,
    pub values: Vec<f64>,
    pub out: Option<String>,
}

fn parse_pairs(text: &str) -> Result<BTreeMap<String, String>> {
    let mut map = BTreeMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let mut line = raw.trim();
        if let Some(rest) = line.strip_prefix('#') {
            match rest.split_once('=') {
                Some((key, _)) if KEYS.contains(&key.trim()) => line = rest.trim(),
                _ => continue,
            }
        }
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return config_err(line, format!("line {} is not key=value", lineno + 1));
        };
        let (key, value) = (key.trim(), value.trim());
        if !KEYS.contains(&key) {
            return config_err(key, format!("unknown key (allowed: {})", KEYS.join(", ")));
        }
        if map.insert(key.to_string(), value.to_string()).is_some() {
            return config_err(key, "given more than once");
        }
    }
    Ok(map)
}

fn get<T: FromStr>(map: &BTreeMap<String, String>, key: &str) -> Result<Option<T>> {
    match map.get(key) {
        None => Ok(None),
        Some(v) => v.parse().map(Some).or_else(|_| config_err(key, format!("cannot parse '{v}'"))),
    }
}

fn core<T>(key: &str, r: adsv::Result<T>) -> Result<T> {
    r.or_else(|e| config_err(key, e.to_string()))
}

pub fn parse_counts(key: &str, text: &str) -> Result<Vec<Vec<u32>>> {
    text.split(';')
        .map(|row| {
            row.split(',')
                .map(|c| c.trim().parse::<u32>().or_else(|_| config_err(key, format!("bad count '{c}' in '{text}'"))))
                .collect()
        })
        .collect()
}

pub fn format_counts(counts: &[Vec<u32>]) -> String {
    counts
        .iter()
        .map(|r| r.iter().map(u32::to_string).collect::<Vec<_>>().join(","))
        .collect::<Vec<_>>()
        .join(";")
}

pub fn parse_list(key: &str, text: &str) -> Result<Vec<f64>> {
    if text.trim().is_empty() {
        return Ok(Vec::new());
    }
    text.split(',')
        .map(|v| v.trim().parse::<f64>().or_else(|_| config_err(key, format!("bad number '{v}'"))))
        .collect()
}

/// Channel from a preset name or explicit parameters.
pub fn resolve_channel(
    preset: Option<&str>,
    d: Option<f64>,
    v: Option<f64>,
    diffusion: Option<f64>,
) -> Result<(Option<String>, ChannelParams)> {
    match (d, v, diffusion) {
        (None, None, None) => {
            let name = preset.unwrap_or("capillary");
            Ok((Some(name.to_string()), core("channel", ChannelParams::preset(name))?))
        }
        (Some(d), Some(v), Some(diffusion)) => {
            if preset.is_some_and(|p| p != "custom") {
                return config_err("channel", "use channel=custom (or omit it) with explicit d, v, D");
            }
            Ok((None, core("D", ChannelParams::new(d, v, diffusion))?))
        }
        _ => config_err("d", "d, v and D must be given together"),
    }
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let map = parse_pairs(text)?;
        let (preset, channel) =
            resolve_channel(map.get("channel").map(String::as_str), get(&map, "d")?, get(&map, "v")?, get(&map, "D")?)?;
        let model = match map.get("model") {
            Some(m) => core("model", m.parse::<PropagationModel>())?,
            None => PropagationModel::NormalApprox,
        };
        let detector = match map.get("detector") {
            Some(d) => core("detector", d.parse::<DetectorKind>())?,
            None => DetectorKind::Adsv,
        };
        let t_e: f64 = get(&map, "Te")?.unwrap_or(0.1);
        let scheme = Self::scheme(&map, detector, t_e)?;
        if let Some(q) = get::<usize>(&map, "q")? {
            if q != scheme.q() {
                return config_err("q", format!("q={q} but the scheme has {} symbols", scheme.q()));
            }
        }
        if let Some(n) = get::<u32>(&map, "N")? {
            if n != scheme.n() {
                return config_err("N", format!("N={n} but the scheme releases {} molecules", scheme.n()));
            }
        }
        let mut trial = TrialConfig::new(scheme, channel, detector);
        trial.model = model;
        trial.p_d = get(&map, "pd")?.unwrap_or(0.0);
        trial.theta = get(&map, "theta")?.unwrap_or(0.0);
        trial.n_trials = get(&map, "trials")?.unwrap_or(100_000);
        trial.seed = get(&map, "seed")?.unwrap_or(1);
        core("detector", trial.validate())?;
        let axis = match map.get("axis") {
            Some(a) => core("axis", a.parse::<SweepAxis>())?,
            None => SweepAxis::Te,
        };
        let values = match map.get("values") {
            Some(v) => parse_list("values", v)?,
            None if map.contains_key("axis") => return config_err("values", "required when axis is given"),
            None => vec![t_e],
        };
        Ok(Self { preset, trial, axis, values, out: map.get("out").cloned() })
    }

    fn scheme(map: &BTreeMap<String, String>, detector: DetectorKind, t_e: f64) -> Result<ModulationScheme> {
        if let Some(text) = map.get("counts") {
            for key in ["N0", "N1"] {
                if map.contains_key(key) {
                    return config_err(key, "cannot be combined with counts");
                }
            }
            let counts = parse_counts("counts", text)?;
            return if detector == DetectorKind::SyncMl {
                core("counts", ModulationScheme::new_permissive(t_e, counts))
            } else {
                core("counts", ModulationScheme::new(t_e, counts))
            };
        }
        let q: usize = get(map, "q")?.unwrap_or(2);
        if q != 2 {
            return config_err("q", "q-ary schemes need an explicit counts matrix");
        }
        let default_n = match detector {
            DetectorKind::TiDistinguishable | DetectorKind::TiIndistinguishable => 2,
            _ => 4,
        };
        let n: u32 = get(map, "N")?.unwrap_or(default_n);
        if detector == DetectorKind::SyncMl {
            return core("N", ModulationScheme::conventional_ppm(n, t_e));
        }
        let n0 = get(map, "N0")?.unwrap_or(n);
        let n1 = get(map, "N1")?.unwrap_or(n / 2);
        core("N0", ModulationScheme::binary(n, n0, n1, t_e))
    }

    /// `# key=value` lines describing every resolved parameter except `out`.
    pub fn echo(&self) -> String {
        let t = &self.trial;
        let mut lines = Vec::new();
        match &self.preset {
            Some(p) => lines.push(format!("channel={p}")),
            None => {
                lines.push("channel=custom".to_string());
                lines.push(format!("d={}", t.channel.distance));
                lines.push(format!("v={}", t.channel.drift));
                lines.push(format!("D={}", t.channel.diffusion));
            }
        }
        lines.push(format!("model={}", t.model));
        lines.push(format!("q={}", t.scheme.q()));
        lines.push(format!("N={}", t.scheme.n()));
        lines.push(format!("counts={}", format_counts(t.scheme.counts())));
        lines.push(format!("Te={}", t.scheme.t_e()));
        lines.push(format!("pd={}", t.p_d));
        lines.push(format!("theta={}", t.theta));
        lines.push(format!("detector={}", t.detector));
        lines.push(format!("trials={}", t.n_trials));
        lines.push(format!("seed={}", t.seed));
        lines.push(format!("axis={}", self.axis));
        lines.push(format!("values={}", self.values.iter().map(f64::to_string).collect::<Vec<_>>().join(",")));
        lines.iter().map(|l| format!("# {l}\n")).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults() {
        let c = ExperimentConfig::parse("").unwrap();
        assert_eq!(c.trial.scheme.counts(), &[vec![4, 0], vec![2, 2]]);
        assert_eq!(c.preset.as_deref(), Some("capillary"));
        assert_eq!(c.values, vec![0.1]);
    }

    #[test]
    fn unknown_key_is_named() {
        let err = ExperimentConfig::parse("Te=0.1\nfoo=3\n").unwrap_err().to_string();
        assert!(err.contains("'foo'"), "{err}");
    }

    #[test]
    fn bad_value_is_named() {
        let err = ExperimentConfig::parse("pd=lots").unwrap_err().to_string();
        assert!(err.contains("'pd'"), "{err}");
        let err = ExperimentConfig::parse("N=4\nN0=2\nN1=2").unwrap_err().to_string();
        assert!(err.contains("'N0'"), "{err}");
    }

    #[test]
    fn echo_round_trips() {
        let text = "channel=custom\nd=500\nv=500\nD=100\nN=8\nTe=0.05\naxis=pd\nvalues=0,0.1\ntrials=1000\n";
        let a = ExperimentConfig::parse(text).unwrap();
        let b = ExperimentConfig::parse(&format!("# a comment\n{}", a.echo())).unwrap();
        assert_eq!(a.echo(), b.echo());
        assert_eq!(a.trial, b.trial);
    }

    #[test]
    fn sync_ml_uses_ppm() {
        let c = ExperimentConfig::parse("detector=sdml\nN=4").unwrap();
        assert_eq!(c.trial.scheme.counts(), &[vec![4, 0], vec![0, 4]]);
        let again = ExperimentConfig::parse(&c.echo()).unwrap();
        assert_eq!(again.trial, c.trial);
        assert!(ExperimentConfig::parse("detector=sdml\npd=0.1").is_err());
    }

    #[test]
    fn interval_detectors_default_to_two_molecules() {
        let c = ExperimentConfig::parse("detector=tiid").unwrap();
        assert_eq!(c.trial.scheme.counts(), &[vec![2, 0], vec![1, 1]]);
    }

    #[test]
    fn channel_conflicts() {
        assert!(ExperimentConfig::parse("channel=svc\nd=1\nv=1\nD=1").is_err());
        assert!(ExperimentConfig::parse("d=1\nv=1").is_err());
        assert!(ExperimentConfig::parse("channel=aorta").is_err());
    }
}
