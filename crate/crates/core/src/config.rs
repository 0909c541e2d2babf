//! Scenario configuration: every tunable parameter of the model, grouped the
//! way the modules consume them, with validation that reports *all* violated
//! invariants at once.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::antenna::{AntennaParams, BeamPlanSpec};
use crate::geometry::SpatialParams;

/// Collected validation failures. Every violated invariant is listed.
#[derive(Debug, Error)]
#[error("invalid configuration:\n  - {}", .violations.join("\n  - "))]
pub struct InvalidConfig {
    pub violations: Vec<String>,
}

impl InvalidConfig {
    pub fn ok_or(violations: Vec<String>) -> Result<(), InvalidConfig> {
        if violations.is_empty() {
            Ok(())
        } else {
            Err(InvalidConfig { violations })
        }
    }
}

/// Transmit-side and propagation parameters.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ChannelParams {
    /// MBS transmit power in dBm.
    pub p_tx_dbm: f64,
    /// Path-loss exponent applied to the 3D distance.
    pub alpha: f64,
    /// Nakagami shape parameter (positive integer).
    pub m: u32,
    /// Noise power in dBm. Used by the simulator; the analytic expressions
    /// are interference-limited and drop it.
    pub noise_dbm: f64,
    /// Penetration-loss scale factor per blocking building, in [0, 1].
    /// 0 means buildings are impenetrable.
    pub gamma: f64,
}

impl Default for ChannelParams {
    fn default() -> Self {
        Self {
            p_tx_dbm: 46.0,
            alpha: 4.0,
            m: 1,
            noise_dbm: -96.0,
            gamma: 0.0,
        }
    }
}

impl ChannelParams {
    pub fn collect_violations(&self, out: &mut Vec<String>) {
        if !(self.alpha > 2.0) {
            out.push(format!(
                "channel.alpha must be > 2 for convergent interference integrals (got {})",
                self.alpha
            ));
        }
        if self.m < 1 {
            out.push("channel.m must be a positive integer".into());
        }
        if !(0.0..=1.0).contains(&self.gamma) {
            out.push(format!("channel.gamma must lie in [0, 1] (got {})", self.gamma));
        }
    }

    pub fn p_tx_mw(&self) -> f64 {
        dbm_to_mw(self.p_tx_dbm)
    }

    pub fn noise_mw(&self) -> f64 {
        dbm_to_mw(self.noise_dbm)
    }
}

/// Numerical-integration controls.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QuadratureSpec {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_subdivisions: u32,
    /// Truncation radius for semi-infinite interference integrals, in meters.
    /// 0 selects the default of 20x the mean nearest-MBS distance.
    pub tail_radius_m: f64,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            rel_tol: 1e-6,
            abs_tol: 1e-10,
            max_subdivisions: 200,
            tail_radius_m: 0.0,
        }
    }
}

impl QuadratureSpec {
    pub fn collect_violations(&self, out: &mut Vec<String>) {
        if !(self.rel_tol > 0.0) || !(self.abs_tol > 0.0) {
            out.push("quadrature tolerances must be positive".into());
        }
        if self.max_subdivisions == 0 {
            out.push("quadrature.max_subdivisions must be at least 1".into());
        }
        if self.tail_radius_m < 0.0 {
            out.push("quadrature.tail_radius_m must be non-negative".into());
        }
    }

    /// Effective truncation radius given the MBS density (per m^2).
    pub fn tail_radius(&self, lambda_m_per_m2: f64) -> f64 {
        if self.tail_radius_m > 0.0 {
            self.tail_radius_m
        } else {
            // 20x the mean nearest-neighbor distance of a PPP.
            20.0 * 0.5 / lambda_m_per_m2.sqrt()
        }
    }
}

/// Bandwidth, reuse, and C2 traffic parameters.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CapacityParams {
    /// System bandwidth in Hz.
    pub bandwidth_hz: f64,
    /// Frequency reuse factor (number of disjoint spectrum colors across sectors).
    pub delta: u32,
    /// Beams per sector.
    pub n_beam: u32,
    /// C2 message size in bits.
    pub tau_r_bits: f64,
    /// Latency budget in seconds.
    pub t_r_s: f64,
    /// UAMs sharing one sector (analytic rate prefactor).
    pub n_u_sector: f64,
}

impl Default for CapacityParams {
    fn default() -> Self {
        Self {
            bandwidth_hz: 20e6,
            delta: 3,
            n_beam: 3,
            tau_r_bits: 1000.0,
            t_r_s: 0.1,
            n_u_sector: 1.0,
        }
    }
}

impl CapacityParams {
    pub fn collect_violations(&self, out: &mut Vec<String>) {
        if self.delta < 1 {
            out.push("capacity.delta must be >= 1".into());
        }
        if self.n_beam < 1 {
            out.push("capacity.n_beam must be >= 1".into());
        }
        if !(self.bandwidth_hz > 0.0) {
            out.push("capacity.bandwidth_hz must be positive".into());
        }
        if !(self.tau_r_bits > 0.0) || !(self.t_r_s > 0.0) {
            out.push("capacity.tau_r_bits and capacity.t_r_s must be positive".into());
        }
        if !(self.n_u_sector >= 1.0) {
            out.push("capacity.n_u_sector must be >= 1".into());
        }
    }

    /// Target rate implied by the C2 message size and latency budget, in
    /// information units per second (natural-log spectral efficiency).
    pub fn target_rate(&self) -> f64 {
        self.tau_r_bits / self.t_r_s
    }
}

/// 3D mobility parameters for the time-stepped simulator.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MobilityParams {
    /// Vertical speed in km/h.
    pub v_vertical_kmh: f64,
    /// Horizontal cruise speed in km/h.
    pub v_horizontal_kmh: f64,
    /// Cruise-height bounds in meters (uniform draw per mission).
    pub cruise_height_min_m: f64,
    pub cruise_height_max_m: f64,
    /// Concurrency cap on simultaneously active vehicles.
    pub max_concurrent: usize,
    /// Simulation time step in seconds.
    pub dt_s: f64,
}

impl Default for MobilityParams {
    fn default() -> Self {
        Self {
            v_vertical_kmh: 50.0,
            v_horizontal_kmh: 160.0,
            cruise_height_min_m: 100.0,
            cruise_height_max_m: 300.0,
            max_concurrent: 50,
            dt_s: 0.1,
        }
    }
}

impl MobilityParams {
    pub fn collect_violations(&self, spatial: &SpatialParams, out: &mut Vec<String>) {
        if !(self.v_vertical_kmh > 0.0) || !(self.v_horizontal_kmh > 0.0) {
            out.push("mobility speeds must be positive".into());
        }
        if !(self.cruise_height_min_m <= self.cruise_height_max_m) {
            out.push("mobility cruise height bounds out of order".into());
        }
        if self.cruise_height_min_m < spatial.h_u_min_m
            || self.cruise_height_max_m > spatial.h_u_max_m
        {
            out.push(format!(
                "mobility cruise heights [{}, {}] must lie within UAM height bounds [{}, {}]",
                self.cruise_height_min_m,
                self.cruise_height_max_m,
                spatial.h_u_min_m,
                spatial.h_u_max_m
            ));
        }
        if self.max_concurrent == 0 {
            out.push("mobility.max_concurrent must be >= 1".into());
        }
        if !(self.dt_s > 0.0) {
            out.push("mobility.dt_s must be positive".into());
        }
    }

    pub fn v_vertical_ms(&self) -> f64 {
        self.v_vertical_kmh / 3.6
    }

    pub fn v_horizontal_ms(&self) -> f64 {
        self.v_horizontal_kmh / 3.6
    }
}

/// Master-UAM broadcast link parameters.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MasterLinkParams {
    /// Master transmit power in dBm.
    pub p_tx_dbm: f64,
    /// Dedicated broadcast bandwidth in Hz (disjoint from the MBS band).
    pub bandwidth_hz: f64,
}

impl Default for MasterLinkParams {
    fn default() -> Self {
        Self {
            p_tx_dbm: 23.0,
            bandwidth_hz: 5e6,
        }
    }
}

impl MasterLinkParams {
    pub fn collect_violations(&self, out: &mut Vec<String>) {
        if !(self.bandwidth_hz > 0.0) {
            out.push("master.bandwidth_hz must be positive".into());
        }
    }

    pub fn p_tx_mw(&self) -> f64 {
        dbm_to_mw(self.p_tx_dbm)
    }
}

/// How the simulator attaches a vehicle to a site.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum AssociationPolicy {
    /// Strongest mean received power (fading excluded), the system default.
    #[default]
    StrongestRsrp,
    /// Nearest site in 3D distance. Mirrors the assumption behind the
    /// analytic nearest-neighbor distance density; used for cross-validation.
    NearestSite,
}

/// Which of the three proposed operation methods are active.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FeatureToggles {
    /// Per-height optimal elevation tilt (off: conventional 12 deg downtilt).
    pub tilt_opt: bool,
    /// Frequency reuse with narrow multi-beam sectors.
    pub reuse_beams: bool,
    /// Two-layer vertical pattern: upward beam for cruise, downward for VTOL.
    pub multi_layer: bool,
    /// Master-UAM assistive transmission.
    pub master: bool,
    /// Replace the sector antennas with an omnidirectional pattern and full
    /// reuse; used for cross-validation against the analytic expressions.
    pub omni: bool,
}

impl Default for FeatureToggles {
    fn default() -> Self {
        Self {
            tilt_opt: true,
            reuse_beams: true,
            multi_layer: true,
            master: true,
            omni: false,
        }
    }
}

/// Complete scenario description consumed by the simulator and the CLI.
#[derive(Debug, Clone, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    pub spatial: SpatialParams,
    pub channel: ChannelParams,
    pub antenna: AntennaParams,
    pub beam_plan: BeamPlanSpec,
    pub capacity: CapacityParams,
    pub mobility: MobilityParams,
    pub master: MasterLinkParams,
    pub quadrature: QuadratureSpec,
    pub toggles: FeatureToggles,
    pub association: AssociationPolicy,
    /// Monte Carlo drop count for drop-based studies.
    pub drops: u64,
    /// Root seed for every stochastic component.
    pub seed: u64,
    /// Simulated duration for mobility runs, in seconds.
    pub sim_duration_s: f64,
}

impl ScenarioConfig {
    /// Desk-scale defaults: an IMD-750 m grid-like density, 25 m sites,
    /// vehicles between 1.5 and 300 m, and a reliability scenario sized so a
    /// sector carries a few vehicles at once (a 2 x 2 km arena with 60
    /// concurrent missions); moderate fading (m = 3), 3 dB per-blocker
    /// penetration loss, and a 0.9 Mb/s command-and-control rate target.
    pub fn desk_scale() -> Self {
        let mut cfg = Self {
            drops: 1000,
            seed: 1,
            sim_duration_s: 120.0,
            ..Default::default()
        };
        cfg.spatial.window_half_width_m = 1000.0;
        cfg.channel.gamma = 0.5;
        cfg.channel.m = 3;
        cfg.capacity.tau_r_bits = 9e4;
        cfg.mobility.max_concurrent = 60;
        cfg.mobility.dt_s = 0.5;
        cfg.master.p_tx_dbm = 33.0;
        cfg.master.bandwidth_hz = 10e6;
        cfg
    }

    pub fn validate(&self) -> Result<(), InvalidConfig> {
        let mut v = Vec::new();
        self.spatial.collect_violations(&mut v);
        self.channel.collect_violations(&mut v);
        self.antenna.collect_violations(&mut v);
        self.beam_plan.collect_violations(&mut v);
        self.capacity.collect_violations(&mut v);
        self.mobility.collect_violations(&self.spatial, &mut v);
        self.master.collect_violations(&mut v);
        self.quadrature.collect_violations(&mut v);
        if self.drops == 0 {
            v.push("drops must be >= 1".into());
        }
        if !(self.sim_duration_s > 0.0) {
            v.push("sim_duration_s must be positive".into());
        }
        InvalidConfig::ok_or(v)
    }

    pub fn from_toml_str(s: &str) -> Result<Self, anyhow::Error> {
        let cfg: ScenarioConfig = toml::from_str(s)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string_pretty(self).expect("scenario serializes")
    }

    /// Stable hash of the effective configuration, for run manifests.
    pub fn config_hash(&self) -> String {
        let mut h = Sha256::new();
        h.update(self.to_toml_string().as_bytes());
        let d = h.finalize();
        d.iter().map(|b| format!("{b:02x}")).collect()
    }
}

/// dBm to linear milliwatts.
pub fn dbm_to_mw(dbm: f64) -> f64 {
    10f64.powf(dbm / 10.0)
}

/// Linear milliwatts to dBm.
pub fn mw_to_dbm(mw: f64) -> f64 {
    10.0 * mw.log10()
}

/// dB to linear power ratio.
pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// Linear power ratio to dB.
pub fn linear_to_db(lin: f64) -> f64 {
    10.0 * lin.log10()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_config_is_valid() {
        ScenarioConfig::desk_scale().validate().unwrap();
    }

    #[test]
    fn validation_reports_every_violation() {
        let mut cfg = ScenarioConfig::desk_scale();
        cfg.channel.alpha = 1.5;
        cfg.channel.gamma = 2.0;
        cfg.capacity.delta = 0;
        cfg.drops = 0;
        let err = cfg.validate().unwrap_err();
        assert!(err.violations.len() >= 4, "got: {:?}", err.violations);
    }

    #[test]
    fn toml_round_trip() {
        let cfg = ScenarioConfig::desk_scale();
        let text = cfg.to_toml_string();
        let back = ScenarioConfig::from_toml_str(&text).unwrap();
        assert_eq!(cfg.config_hash(), back.config_hash());
    }

    #[test]
    fn unit_conversions() {
        assert!((dbm_to_mw(0.0) - 1.0).abs() < 1e-12);
        assert!((dbm_to_mw(30.0) - 1000.0).abs() < 1e-9);
        assert!((mw_to_dbm(dbm_to_mw(-17.3)) + 17.3).abs() < 1e-9);
        assert!((db_to_linear(3.0) - 1.9952623149688795).abs() < 1e-12);
    }
}
