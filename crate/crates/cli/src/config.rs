//! Strict JSON run configuration.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::Deserialize;
use vstop_core::{MuKind, ProfileSpec};

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub profile: ProfileSection,
    pub numerics: Numerics,
    pub io: Io,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum MuSection {
    TruncatedBump { radius: f64 },
    Gaussian { sigma: f64 },
    Empty,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PhiSection {
    pub width: f64,
    pub amplitude: f64,
}

impl Default for PhiSection {
    fn default() -> Self {
        PhiSection { width: 1.0, amplitude: 1.0 }
    }
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ProfileSection {
    pub mu: MuSection,
    pub e0: f64,
    pub alpha: f64,
    #[serde(rename = "Phi")]
    pub big_phi: PhiSection,
}

impl Default for ProfileSection {
    fn default() -> Self {
        ProfileSection { mu: MuSection::TruncatedBump { radius: 2.0 }, e0: 1.0, alpha: 1.0, big_phi: PhiSection::default() }
    }
}

impl ProfileSection {
    pub fn spec(&self) -> ProfileSpec {
        let mu = match self.mu {
            MuSection::TruncatedBump { radius } => MuKind::TruncatedBump { radius },
            MuSection::Gaussian { sigma } => MuKind::Gaussian { sigma },
            MuSection::Empty => MuKind::Empty,
        };
        ProfileSpec { mu, e0: self.e0, alpha: self.alpha, phi_width: self.big_phi.width, phi_amplitude: self.big_phi.amplitude }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum RouteChoice {
    Time,
    Steady,
    Both,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Numerics {
    pub kappa_min: f64,
    pub seed: u64,
    pub penrose: PenroseSection,
    pub greens: GreensSection,
    pub stopping: StoppingSection,
    pub decelerate: DecelSection,
    pub simulate: SimSection,
    pub geometry: GeometrySection,
}

impl Default for Numerics {
    fn default() -> Self {
        Numerics {
            kappa_min: 1e-3,
            seed: 7,
            penrose: PenroseSection::default(),
            greens: GreensSection::default(),
            stopping: StoppingSection::default(),
            decelerate: DecelSection::default(),
            simulate: SimSection::default(),
            geometry: GeometrySection::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PenroseSection {
    pub x_points: usize,
    pub xi_points: usize,
    pub interior_depths: usize,
}

impl Default for PenroseSection {
    fn default() -> Self {
        PenroseSection { x_points: 401, xi_points: 101, interior_depths: 16 }
    }
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GreensSection {
    pub t_max: f64,
    pub t_points: usize,
    pub k_min: f64,
    pub k_max: f64,
    pub k_points: usize,
    pub r_max: f64,
    pub r_points: usize,
    /// Scaled resolvent step in `t|ξ|`.
    pub dp: f64,
}

impl Default for GreensSection {
    fn default() -> Self {
        GreensSection { t_max: 50.0, t_points: 51, k_min: 0.1, k_max: 10.0, k_points: 64, r_max: 20.0, r_points: 41, dp: 0.02 }
    }
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct StoppingSection {
    pub vstar: [f64; 3],
    pub route: RouteChoice,
}

impl Default for StoppingSection {
    fn default() -> Self {
        StoppingSection { vstar: [12.0, 0.0, 0.0], route: RouteChoice::Steady }
    }
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DecelSection {
    pub v0: f64,
    pub t_end: f64,
    pub dt: f64,
    pub v_bar: f64,
    pub log_n: f64,
    pub theta: f64,
    pub sample_every: usize,
    /// Fixed `A`; the steady-state table is used when absent.
    pub a_constant: Option<f64>,
    pub table_nodes: usize,
}

impl Default for DecelSection {
    fn default() -> Self {
        DecelSection {
            v0: 20.0,
            t_end: 1e4,
            dt: 1.0,
            v_bar: 10.0,
            log_n: 1.0,
            theta: 0.2,
            sample_every: 1,
            a_constant: None,
            table_nodes: 16,
        }
    }
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimSection {
    pub v0: f64,
    pub t_end: f64,
    pub dt: f64,
    pub markers: usize,
    pub n_grid: usize,
    pub box_length: f64,
    pub charge_frac: f64,
    pub floor: f64,
    pub snapshot_every: Option<usize>,
    /// Start of the averaging window for the drag summary.
    pub t_from: f64,
}

impl Default for SimSection {
    fn default() -> Self {
        SimSection {
            v0: 12.0,
            t_end: 50.0,
            dt: 0.025,
            markers: 2_000_000,
            n_grid: 32,
            box_length: 16.0,
            charge_frac: 0.65,
            floor: 1e-3,
            snapshot_every: None,
            t_from: 2.0,
        }
    }
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GeometrySection {
    /// Speed of the straight reference path.
    pub v0: f64,
    pub s: f64,
    pub beta: f64,
    pub delta: f64,
}

impl Default for GeometrySection {
    fn default() -> Self {
        GeometrySection { v0: 12.0, s: 0.0, beta: 0.1, delta: 0.1 }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Io {
    pub out_dir: PathBuf,
    /// Significant digits of every float written.
    pub precision: usize,
}

impl Default for Io {
    fn default() -> Self {
        Io { out_dir: PathBuf::from("."), precision: 17 }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        let cfg: RunConfig = serde_json::from_str(&text).with_context(|| format!("parsing config {}", path.display()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let n = &self.numerics;
        let positive = [
            ("numerics.kappa_min", n.kappa_min),
            ("numerics.greens.t_max", n.greens.t_max),
            ("numerics.greens.k_min", n.greens.k_min),
            ("numerics.greens.r_max", n.greens.r_max),
            ("numerics.greens.dp", n.greens.dp),
            ("numerics.decelerate.v0", n.decelerate.v0),
            ("numerics.decelerate.dt", n.decelerate.dt),
            ("numerics.simulate.v0", n.simulate.v0),
            ("numerics.simulate.t_end", n.simulate.t_end),
            ("numerics.simulate.dt", n.simulate.dt),
            ("numerics.simulate.box_length", n.simulate.box_length),
            ("numerics.simulate.floor", n.simulate.floor),
            ("numerics.geometry.v0", n.geometry.v0),
            ("numerics.geometry.delta", n.geometry.delta),
        ];
        for (key, value) in positive {
            if !(value > 0.0 && value.is_finite()) {
                bail!("{key} must be positive and finite, got {value}");
            }
        }
        if n.greens.k_max <= n.greens.k_min {
            bail!("numerics.greens.k_max must exceed k_min");
        }
        if n.penrose.x_points < 3 || n.penrose.xi_points < 2 || n.greens.t_points < 2 || n.greens.k_points < 2 || n.greens.r_points < 2 {
            bail!("grids need at least two points (three for the Penrose contour)");
        }
        if n.decelerate.table_nodes < 2 {
            bail!("numerics.decelerate.table_nodes must be at least 2");
        }
        if !(1..=17).contains(&self.io.precision) {
            bail!("io.precision must lie in 1..=17, got {}", self.io.precision);
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_object_gives_defaults() {
        let cfg: RunConfig = serde_json::from_str("{}").unwrap();
        cfg.validate().unwrap();
        assert_eq!(cfg.profile.spec(), ProfileSpec::bump(2.0));
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(serde_json::from_str::<RunConfig>(r#"{"profile": {"colour": 1}}"#).is_err());
        assert!(serde_json::from_str::<RunConfig>(r#"{"profile": {"mu": {"kind": "lorentzian"}}}"#).is_err());
    }

    #[test]
    fn gaussian_section() {
        let cfg: RunConfig =
            serde_json::from_str(r#"{"profile": {"mu": {"kind": "gaussian", "sigma": 1.5}, "Phi": {"amplitude": 0.5}}}"#).unwrap();
        let s = cfg.profile.spec();
        assert_eq!(s.mu, MuKind::Gaussian { sigma: 1.5 });
        assert_eq!(s.phi_amplitude, 0.5);
        assert_eq!(s.phi_width, 1.0);
    }

    #[test]
    fn tolerances_must_be_positive() {
        let cfg: RunConfig = serde_json::from_str(r#"{"numerics": {"kappa_min": 0}}"#).unwrap();
        assert!(cfg.validate().is_err());
    }
}
