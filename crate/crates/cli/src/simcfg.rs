//! JSON run-config for the `simulate` subcommand.

use serde::{Deserialize, Serialize};

use kpp_front_core::simulate::{InitialBump, Scheme, Shift, SimConfig};
use kpp_front_core::EnvironmentProfile;

/// File form of a simulation: either a single `profile` + `c1`, or an
/// explicit `shifts` list. The domain may be omitted for single-shift
/// runs, in which case it is sized automatically from the speed bound
/// with the given margin.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SimFileConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub profile: Option<EnvironmentProfile>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c1: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shifts: Option<Vec<Shift>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x_min: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x_max: Option<f64>,
    pub dx: f64,
    pub dt: f64,
    pub t_end: f64,
    #[serde(default = "default_scheme")]
    pub scheme: Scheme,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub u0: Option<InitialBump>,
    #[serde(default)]
    pub front_levels: Vec<f64>,
    #[serde(default)]
    pub snapshot_times: Vec<f64>,
    #[serde(default)]
    pub sample_interval: f64,
    /// domain margin in speed units when the domain is auto-sized
    #[serde(default = "default_margin")]
    pub margin: f64,
}

fn default_scheme() -> Scheme {
    Scheme::ImexCrankNicolson
}

fn default_margin() -> f64 {
    4.0
}

impl SimFileConfig {
    pub fn into_sim_config(self) -> Result<SimConfig, String> {
        let shifts = match (self.shifts, self.profile, self.c1) {
            (Some(shifts), None, None) => shifts,
            (None, Some(profile), c1) => vec![Shift {
                c: c1.unwrap_or(0.0),
                profile,
            }],
            (Some(_), _, _) => {
                return Err("give either `shifts` or `profile`/`c1`, not both".into())
            }
            (None, None, _) => return Err("missing `shifts` or `profile`".into()),
        };
        let mut config = if shifts.len() == 1 && (self.x_min.is_none() || self.x_max.is_none()) {
            SimConfig::single(
                shifts[0].profile.clone(),
                shifts[0].c,
                self.dx,
                self.dt,
                self.t_end,
                self.margin,
            )
        } else {
            let (Some(x_min), Some(x_max)) = (self.x_min, self.x_max) else {
                return Err("multi-shift configs need explicit x_min and x_max".into());
            };
            SimConfig {
                shifts,
                x_min,
                x_max,
                dx: self.dx,
                dt: self.dt,
                t_end: self.t_end,
                scheme: self.scheme,
                u0: InitialBump::default(),
                front_levels: Vec::new(),
                snapshot_times: Vec::new(),
                sample_interval: 0.0,
            }
        };
        if let Some(x_min) = self.x_min {
            config.x_min = x_min;
        }
        if let Some(x_max) = self.x_max {
            config.x_max = x_max;
        }
        config.scheme = self.scheme;
        if let Some(u0) = self.u0 {
            config.u0 = u0;
        }
        config.front_levels = self.front_levels;
        config.snapshot_times = self.snapshot_times;
        config.sample_interval = self.sample_interval;
        Ok(config)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_shift_auto_domain() {
        let text = r#"{
            "profile": {"kind": "constant", "g0": 1.0},
            "c1": 0.0, "dx": 0.1, "dt": 0.1, "t_end": 40.0,
            "snapshot_times": [40.0]
        }"#;
        let file: SimFileConfig = serde_json::from_str(text).unwrap();
        let config = file.into_sim_config().unwrap();
        assert!(config.x_max >= 2.0 * 40.0);
        assert!(config.validate().is_ok());
    }

    #[test]
    fn multi_shift_requires_domain() {
        let text = r#"{
            "shifts": [
                {"c": 1.0, "profile": {"kind": "constant", "g0": 1.0}},
                {"c": 2.0, "profile": {"kind": "constant", "g0": 1.0}}
            ],
            "dx": 0.1, "dt": 0.1, "t_end": 10.0
        }"#;
        let file: SimFileConfig = serde_json::from_str(text).unwrap();
        assert!(file.into_sim_config().is_err());
    }
}
