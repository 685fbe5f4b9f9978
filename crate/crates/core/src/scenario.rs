//! System configuration, deployment geometry and derived physical constants.

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::optimizer::PsoParams;

/// Element counts of a uniform rectangular array along x and y.
///
/// Serialized as a two-element array `[x, y]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(from = "[usize; 2]", into = "[usize; 2]")]
pub struct ArrayDims {
    pub x: usize,
    pub y: usize,
}

impl ArrayDims {
    pub const fn new(x: usize, y: usize) -> Self {
        Self { x, y }
    }

    /// Square array with `n` elements, if `n` is a perfect square.
    pub fn square(n: usize) -> Option<Self> {
        let side = (n as f64).sqrt().round() as usize;
        (side * side == n && side > 0).then_some(Self::new(side, side))
    }

    pub const fn count(&self) -> usize {
        self.x * self.y
    }
}

impl From<[usize; 2]> for ArrayDims {
    fn from([x, y]: [usize; 2]) -> Self {
        Self { x, y }
    }
}

impl From<ArrayDims> for [usize; 2] {
    fn from(d: ArrayDims) -> Self {
        [d.x, d.y]
    }
}

impl fmt::Display for ArrayDims {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}x{}", self.x, self.y)
    }
}

/// Link-level and algorithm parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SystemConfig {
    pub tx_antennas: ArrayDims,
    pub rx_antennas: ArrayDims,
    pub ris_elements: ArrayDims,
    pub carrier_frequency_ghz: f64,
    pub bandwidth_hz: f64,
    pub noise_psd_dbm_per_hz: f64,
    pub path_loss_exponent: f64,
    pub num_paths: usize,
    /// Elevation and azimuth spreads in degrees.
    pub angular_spread_deg: [f64; 2],
    pub element_spacing_wavelengths: f64,
    pub num_streams: usize,
    pub min_rf_chains: usize,
    pub max_rf_chains: usize,
    pub transmit_power_dbm: f64,
    #[serde(flatten)]
    pub pso: PsoParams,
    pub monte_carlo_trials: usize,
    pub rng_seed: u64,
}

impl Default for SystemConfig {
    fn default() -> Self {
        Self {
            tx_antennas: ArrayDims::new(8, 8),
            rx_antennas: ArrayDims::new(8, 8),
            ris_elements: ArrayDims::new(8, 8),
            carrier_frequency_ghz: 28.0,
            bandwidth_hz: 10e6,
            noise_psd_dbm_per_hz: -174.0,
            path_loss_exponent: 3.6,
            num_paths: 10,
            angular_spread_deg: [10.0, 10.0],
            element_spacing_wavelengths: 0.5,
            num_streams: 2,
            min_rf_chains: 2,
            max_rf_chains: 16,
            transmit_power_dbm: 30.0,
            pso: PsoParams::default(),
            monte_carlo_trials: 50,
            rng_seed: 1,
        }
    }
}

/// Node positions and the ceiling platform, all in meters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DeploymentGeometry {
    pub tx_position: [f64; 3],
    pub ue_position: [f64; 3],
    pub platform_x_range: [f64; 2],
    pub platform_y_range: [f64; 2],
    pub ris_height: f64,
}

impl Default for DeploymentGeometry {
    fn default() -> Self {
        Self {
            tx_position: [0.0, 0.0, 2.0],
            ue_position: [100.0, 100.0, 2.0],
            platform_x_range: [40.0, 70.0],
            platform_y_range: [40.0, 70.0],
            ris_height: 5.0,
        }
    }
}

impl DeploymentGeometry {
    pub fn platform_center(&self) -> [f64; 3] {
        let [x0, x1] = self.platform_x_range;
        let [y0, y1] = self.platform_y_range;
        [0.5 * (x0 + x1), 0.5 * (y0 + y1), self.ris_height]
    }

    /// Point on the platform at height `ris_height`.
    pub fn platform_point(&self, x: f64, y: f64) -> [f64; 3] {
        [x, y, self.ris_height]
    }

    /// True if `(x, y)` lies inside the closed platform rectangle.
    pub fn contains(&self, x: f64, y: f64) -> bool {
        let [x0, x1] = self.platform_x_range;
        let [y0, y1] = self.platform_y_range;
        (x0..=x1).contains(&x) && (y0..=y1).contains(&y)
    }
}

/// A complete, self-describing simulation setup.
///
/// The configuration file is this struct serialized as flat TOML key/value pairs.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Scenario {
    #[serde(flatten)]
    pub config: SystemConfig,
    #[serde(flatten)]
    pub geometry: DeploymentGeometry,
}

/// One violated configuration invariant.
#[derive(Debug, Clone, PartialEq)]
pub enum ConfigIssue {
    ZeroCount(&'static str),
    StreamsExceedRfChains { streams: usize, rf_chains: usize },
    RfChainOrder { min: usize, max: usize },
    RfChainsExceedAntennas { rf_chains: usize, antennas: usize },
    NonPositive(&'static str),
    SpreadOutOfRange { which: &'static str, degrees: f64 },
    EmptyRange { axis: &'static str, range: [f64; 2] },
    NonFinite(&'static str),
    Pso(String),
}

impl fmt::Display for ConfigIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::ZeroCount(field) => write!(f, "{field}: count must be at least 1"),
            Self::StreamsExceedRfChains { streams, rf_chains } => {
                write!(f, "streams exceed RF chains ({streams} > {rf_chains})")
            }
            Self::RfChainOrder { min, max } => {
                write!(f, "min_rf_chains {min} exceeds max_rf_chains {max}")
            }
            Self::RfChainsExceedAntennas { rf_chains, antennas } => {
                write!(f, "RF chains exceed antennas ({rf_chains} > {antennas})")
            }
            Self::NonPositive(field) => write!(f, "{field}: must be positive"),
            Self::SpreadOutOfRange { which, degrees } => {
                write!(f, "{which} spread {degrees} deg outside [0, 90)")
            }
            Self::EmptyRange { axis, range } => {
                write!(f, "empty range on platform {axis} axis: [{}, {}]", range[0], range[1])
            }
            Self::NonFinite(field) => write!(f, "{field}: not finite"),
            Self::Pso(msg) => write!(f, "pso: {msg}"),
        }
    }
}

/// Converts a noise PSD and bandwidth into noise power in watts.
pub fn noise_power(noise_psd_dbm_per_hz: f64, bandwidth_hz: f64) -> Result<f64> {
    if !(bandwidth_hz > 0.0) {
        return Err(Error::InvalidConfig(format!(
            "bandwidth must be positive, got {bandwidth_hz}"
        )));
    }
    let dbm = noise_psd_dbm_per_hz + 10.0 * bandwidth_hz.log10();
    Ok(dbm_to_watts(dbm))
}

pub fn dbm_to_watts(dbm: f64) -> f64 {
    10f64.powf((dbm - 30.0) / 10.0)
}

impl Scenario {
    pub fn noise_power(&self) -> Result<f64> {
        noise_power(self.config.noise_psd_dbm_per_hz, self.config.bandwidth_hz)
    }

    pub fn transmit_power_watts(&self) -> f64 {
        dbm_to_watts(self.config.transmit_power_dbm)
    }

    pub fn validate(&self) -> Vec<ConfigIssue> {
        let c = &self.config;
        let g = &self.geometry;
        let mut issues = Vec::new();

        for (name, dims) in [
            ("tx_antennas", c.tx_antennas),
            ("rx_antennas", c.rx_antennas),
            ("ris_elements", c.ris_elements),
        ] {
            if dims.x == 0 || dims.y == 0 {
                issues.push(ConfigIssue::ZeroCount(name));
            }
        }
        for (name, n) in [
            ("num_paths", c.num_paths),
            ("num_streams", c.num_streams),
            ("min_rf_chains", c.min_rf_chains),
            ("max_rf_chains", c.max_rf_chains),
            ("monte_carlo_trials", c.monte_carlo_trials),
        ] {
            if n == 0 {
                issues.push(ConfigIssue::ZeroCount(name));
            }
        }

        let rf_floor = c.min_rf_chains.min(c.max_rf_chains);
        if c.num_streams > rf_floor {
            issues.push(ConfigIssue::StreamsExceedRfChains {
                streams: c.num_streams,
                rf_chains: rf_floor,
            });
        }
        if c.min_rf_chains > c.max_rf_chains {
            issues.push(ConfigIssue::RfChainOrder {
                min: c.min_rf_chains,
                max: c.max_rf_chains,
            });
        }
        let antennas = c.tx_antennas.count().min(c.rx_antennas.count());
        if antennas > 0 && c.min_rf_chains > antennas {
            issues.push(ConfigIssue::RfChainsExceedAntennas {
                rf_chains: c.min_rf_chains,
                antennas,
            });
        }

        for (name, v) in [
            ("carrier_frequency_ghz", c.carrier_frequency_ghz),
            ("bandwidth_hz", c.bandwidth_hz),
            ("path_loss_exponent", c.path_loss_exponent),
            ("element_spacing_wavelengths", c.element_spacing_wavelengths),
            ("ris_height", g.ris_height),
        ] {
            if !v.is_finite() {
                issues.push(ConfigIssue::NonFinite(name));
            } else if v <= 0.0 {
                issues.push(ConfigIssue::NonPositive(name));
            }
        }
        if !c.noise_psd_dbm_per_hz.is_finite() {
            issues.push(ConfigIssue::NonFinite("noise_psd_dbm_per_hz"));
        }
        if !c.transmit_power_dbm.is_finite() {
            issues.push(ConfigIssue::NonFinite("transmit_power_dbm"));
        }

        for (which, deg) in [
            ("elevation", c.angular_spread_deg[0]),
            ("azimuth", c.angular_spread_deg[1]),
        ] {
            if !(0.0..90.0).contains(&deg) {
                issues.push(ConfigIssue::SpreadOutOfRange { which, degrees: deg });
            }
        }

        if let Err(msg) = c.pso.check() {
            issues.push(ConfigIssue::Pso(msg));
        }

        for (axis, range) in [("x", g.platform_x_range), ("y", g.platform_y_range)] {
            if !(range[0].is_finite() && range[1].is_finite()) {
                issues.push(ConfigIssue::NonFinite("platform range"));
            } else if range[0] >= range[1] {
                issues.push(ConfigIssue::EmptyRange { axis, range });
            }
        }
        for (name, p) in [("tx_position", g.tx_position), ("ue_position", g.ue_position)] {
            if p.iter().any(|v| !v.is_finite()) {
                issues.push(ConfigIssue::NonFinite(name));
            }
        }
        issues
    }

    /// Returns `self` if valid, otherwise every issue joined into one error.
    pub fn validated(self) -> Result<Self> {
        let issues = self.validate();
        if issues.is_empty() {
            Ok(self)
        } else {
            let joined: Vec<String> = issues.iter().map(ToString::to_string).collect();
            Err(Error::InvalidConfig(joined.join("; ")))
        }
    }

    pub fn to_toml(&self) -> Result<String> {
        Ok(toml::to_string(self)?)
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        Ok(toml::from_str(text)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml(&std::fs::read_to_string(path)?)
    }

    /// Short stable fingerprint of every configuration and geometry field.
    pub fn digest(&self) -> String {
        let canonical = serde_json::to_string(self).expect("scenario serializes to JSON");
        let hash = Sha256::digest(canonical.as_bytes());
        hex::encode(&hash[..8])
    }
}
