use std::fmt;
use std::io::{BufRead, Write};
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{uniform_times, RocketError, ThrustProfile};
use crate::io::format_float;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TargetKind {
    /// Linear ramp up.
    ConstantAcceleration,
    /// Linear ramp down.
    ConstantDeceleration,
    /// Low plateau for the first half, high plateau for the second.
    TwoStep,
    /// High, low, high plateaus over equal thirds.
    Bucket,
}

impl FromStr for TargetKind {
    type Err = RocketError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().replace('_', "-").as_str() {
            "constant-acceleration" | "acceleration" => Ok(Self::ConstantAcceleration),
            "constant-deceleration" | "deceleration" => Ok(Self::ConstantDeceleration),
            "two-step" => Ok(Self::TwoStep),
            "bucket" => Ok(Self::Bucket),
            other => Err(RocketError::Profile(format!("unknown target kind '{other}'"))),
        }
    }
}

impl fmt::Display for TargetKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::ConstantAcceleration => "constant-acceleration",
            Self::ConstantDeceleration => "constant-deceleration",
            Self::TwoStep => "two-step",
            Self::Bucket => "bucket",
        })
    }
}

/// Target curve with mean thrust `scale`; `ratio` is high level over low
/// level (end over start for the ramps).
pub fn make_target_profile(
    kind: TargetKind,
    t_burn: f64,
    scale: f64,
    ratio: f64,
    n_samples: usize,
) -> Result<ThrustProfile, RocketError> {
    if !(t_burn > 0.0) || n_samples < 2 {
        return Err(RocketError::Profile("need t_burn > 0 and at least two samples".into()));
    }
    if !(scale > 0.0) || !(ratio >= 1.0) {
        return Err(RocketError::Profile("need scale > 0 and ratio >= 1".into()));
    }
    let times = uniform_times(t_burn, n_samples);
    let shape: Vec<f64> = times
        .iter()
        .map(|&t| {
            let s = t / t_burn;
            match kind {
                TargetKind::ConstantAcceleration => 1.0 + (ratio - 1.0) * s,
                TargetKind::ConstantDeceleration => ratio - (ratio - 1.0) * s,
                TargetKind::TwoStep => {
                    if s < 0.5 {
                        1.0
                    } else {
                        ratio
                    }
                }
                TargetKind::Bucket => {
                    if (1.0 / 3.0..2.0 / 3.0).contains(&s) {
                        1.0
                    } else {
                        ratio
                    }
                }
            }
        })
        .collect();
    let mean = shape.iter().sum::<f64>() / shape.len() as f64;
    ThrustProfile::new(times, shape.iter().map(|v| scale * v / mean).collect())
}

pub fn write_profile_csv<W: Write>(mut out: W, profiles: &[(&str, &ThrustProfile)]) -> std::io::Result<()> {
    let Some((_, first)) = profiles.first() else { return Ok(()) };
    write!(out, "time")?;
    for (name, _) in profiles {
        write!(out, ",{name}")?;
    }
    writeln!(out)?;
    for (k, t) in first.times.iter().enumerate() {
        write!(out, "{}", format_float(*t))?;
        for (_, p) in profiles {
            write!(out, ",{}", format_float(p.thrust[k]))?;
        }
        writeln!(out)?;
    }
    Ok(())
}

/// Reads `time,thrust` rows (a header line and `#` comments are skipped).
pub fn read_profile_csv(path: &Path) -> Result<ThrustProfile, RocketError> {
    let file = std::fs::File::open(path).map_err(|e| RocketError::Io(path.display().to_string(), e))?;
    let mut times = Vec::new();
    let mut thrust = Vec::new();
    for (n, line) in std::io::BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| RocketError::Io(path.display().to_string(), e))?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let cols: Vec<&str> = line.split(',').map(str::trim).collect();
        let parsed = (cols.first().map(|s| s.parse::<f64>()), cols.get(1).map(|s| s.parse::<f64>()));
        match parsed {
            (Some(Ok(t)), Some(Ok(v))) => {
                times.push(t);
                thrust.push(v);
            }
            _ if times.is_empty() && n == 0 => continue,
            _ => return Err(RocketError::Profile(format!("{}:{}: expected 'time,thrust'", path.display(), n + 1))),
        }
    }
    ThrustProfile::new(times, thrust)
}
