//! Experiment configuration: physical constants, array and user geometry,
//! outage targets, the slot plan and the error model parameters.
//!
//! Config files are TOML. All quantities are SI except angles (degrees in
//! the file, radians internally) and noise powers (dBm in the file, watts
//! internally); the conversion happens once, at parse.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Speed of light in vacuum (m/s).
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("config parse error: {0}")]
    Parse(String),
    #[error("invalid scenario: {0}")]
    Invalid(String),
}

/// RF-chain constants shared by the whole scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RfConstants {
    /// Carrier frequency f (Hz).
    pub carrier_freq: f64,
    /// System bandwidth W (Hz).
    pub bandwidth: f64,
    /// Maximum power of one transmissive element P_t (W).
    pub per_element_power: f64,
    /// Noise power at each legitimate user (W).
    pub noise_power_lu: f64,
    /// Noise power at each illegal user (W).
    pub noise_power_iu: f64,
    /// Rician factor κ_v.
    pub rician_factor: f64,
    /// Center distance of adjacent elements d_f (m).
    pub element_spacing: f64,
    /// Radar cross section of a target (m²).
    pub rcs: f64,
    /// Radar processing noise power σ_r² (W).
    pub processing_noise: f64,
}

impl RfConstants {
    /// Carrier wavelength λ_c = c / f (m).
    pub fn wavelength(&self) -> f64 {
        SPEED_OF_LIGHT / self.carrier_freq
    }
}

/// Uniform planar array layout. Element n = N_c·n_r + n_c + 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ArrayGeometry {
    pub n_rows: usize,
    pub n_cols: usize,
}

impl ArrayGeometry {
    pub fn total(&self) -> usize {
        self.n_rows * self.n_cols
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum UserRole {
    Lu,
    Iu,
}

/// Polar position of one user relative to the array.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UserGeometry {
    /// Distance to the array (m).
    pub distance: f64,
    /// Pitch angle θ (rad, in [0, π/2]).
    pub pitch: f64,
    /// Azimuth angle φ (rad, in [0, 2π)).
    pub azimuth: f64,
    pub role: UserRole,
}

/// Outage / detection probability targets and rate thresholds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OutageTargets {
    /// LU rate threshold r_k^s (bps/Hz).
    pub lu_rate_threshold: f64,
    /// IU eavesdropping rate threshold r_m^e (bps/Hz).
    pub iu_rate_threshold: f64,
    /// LU outage probability budget P_out,1.
    pub lu_outage_prob: f64,
    /// IU exceedance probability budget P_out,2.
    pub iu_outage_prob: f64,
    /// Radar false alarm probability P_FA.
    pub false_alarm_prob: f64,
    /// Required detection probability P_D.
    pub detection_prob: f64,
}

/// One beam direction scanned during a slot.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanDirection {
    pub pitch: f64,
    pub azimuth: f64,
}

/// Scanning-period slot plan.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlotPlan {
    /// Number of slots L.
    pub count: usize,
    /// Scanning period T (s).
    pub period: f64,
    /// Minimum slot duration (s).
    pub t_min: f64,
    /// Maximum slot duration (s).
    pub t_max: f64,
    /// Per-slot scan directions; length must equal `count`.
    pub scan_directions: Vec<ScanDirection>,
}

/// Channel error model parameters.
///
/// LU and IU bounds are expressed on the path-loss-normalized channel
/// (the channel divided by its large-scale amplitude), matching the way
/// the error magnitudes are quoted relative to the unit-modulus steering
/// entries.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorConfig {
    /// LU worst-case error ball radius ε_k.
    pub lu_bound: f64,
    /// LU Gaussian error std σ_he (per complex component).
    pub lu_gaussian_std: f64,
    /// IU per-element small-scale bound ε_{m,n}.
    pub iu_element_bound: f64,
    /// IU pitch uncertainty Θ_m (rad).
    pub iu_pitch_bound: f64,
    /// IU azimuth uncertainty Φ_m (rad).
    pub iu_azimuth_bound: f64,
    /// IU distance uncertainty D_m (m).
    pub iu_distance_bound: f64,
    /// Optional per-slot beampattern tolerance δ_bp[l] (W²). When absent,
    /// defaults to 0.1·‖R[l]‖_F².
    pub beampattern_tolerance: Option<Vec<f64>>,
}

/// How the sensing gain threshold I_m is obtained.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum DetectionThresholdMode {
    /// I_m = ln(P_FA)/ln(P_D) − 1 from the outage targets.
    Derived,
    /// Explicit thresholds, one per IU.
    Explicit(Vec<f64>),
}

/// Static power draw used by the energy-efficiency denominators.
///
/// The transmissive-surface transceiver runs one RF chain feeding N
/// low-power elements; the traditional transceiver baseline runs one RF
/// chain per antenna. These constants only enter SEE/IEE reporting.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerModel {
    /// Power of one RF chain (W).
    pub rf_chain: f64,
    /// Power of one transmissive element (W).
    pub element: f64,
}

impl PowerModel {
    /// Static power of the transmissive-surface transceiver with n elements.
    pub fn static_tris(&self, n: usize) -> f64 {
        self.rf_chain + self.element * n as f64
    }
    /// Static power of the traditional transceiver with n antennas.
    pub fn static_trsma(&self, n: usize) -> f64 {
        self.rf_chain * n as f64
    }
}

/// BCD stopping parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolveOptions {
    /// Relative objective-change stopping threshold ε.
    pub epsilon: f64,
    /// Hard cap on outer iterations.
    pub max_iters: usize,
}

/// Full experiment description. Immutable after construction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub rf: RfConstants,
    pub array: ArrayGeometry,
    pub lus: Vec<UserGeometry>,
    pub ius: Vec<UserGeometry>,
    pub outage: OutageTargets,
    pub slots: SlotPlan,
    pub errors: ErrorConfig,
    pub detection_threshold_mode: DetectionThresholdMode,
    pub power_model: PowerModel,
    pub solve: SolveOptions,
}

impl Scenario {
    pub fn n_lus(&self) -> usize {
        self.lus.len()
    }
    pub fn n_ius(&self) -> usize {
        self.ius.len()
    }

    /// Sensing gain thresholds I_m, one per IU.
    pub fn gain_thresholds(&self) -> Vec<f64> {
        match &self.detection_threshold_mode {
            DetectionThresholdMode::Explicit(v) => v.clone(),
            DetectionThresholdMode::Derived => {
                let i_m = crate::metrics::required_gain_threshold(
                    self.outage.false_alarm_prob,
                    self.outage.detection_prob,
                );
                vec![i_m; self.n_ius()]
            }
        }
    }
}

fn dbm_to_watts(dbm: f64) -> f64 {
    1e-3 * 10f64.powf(dbm / 10.0)
}

const DEG: f64 = std::f64::consts::PI / 180.0;

/// The all-defaults scenario: Table-style constants, K = 3 LUs, M = 2 IUs,
/// a 4×4 array and a five-slot scan plan sweeping the user sector.
pub fn default_scenario() -> Scenario {
    let carrier_freq = 30e9;
    let rician_factor = 3.0;
    let wavelength = SPEED_OF_LIGHT / carrier_freq;
    let count = 5usize;
    // Pitch sweeps [10°, 80°]; azimuth tracks the LU azimuth sector [10°, 30°].
    let scan_directions = (0..count)
        .map(|l| ScanDirection {
            pitch: (10.0 + (l as f64 + 0.5) * 70.0 / count as f64) * DEG,
            azimuth: (10.0 + (l as f64 + 0.5) * 20.0 / count as f64) * DEG,
        })
        .collect();
    let lu_bound = 0.01f64.sqrt();
    Scenario {
        rf: RfConstants {
            carrier_freq,
            bandwidth: 20e6,
            per_element_power: 1e-3,
            noise_power_lu: dbm_to_watts(-90.0),
            noise_power_iu: dbm_to_watts(-90.0),
            rician_factor,
            element_spacing: wavelength / 2.0,
            rcs: 1.0,
            processing_noise: dbm_to_watts(-170.0),
        },
        array: ArrayGeometry { n_rows: 4, n_cols: 4 },
        lus: vec![
            lu(50.0, 22.5, 10.0),
            lu(70.0, 45.0, 20.0),
            lu(90.0, 67.5, 30.0),
        ],
        ius: vec![iu(65.0, 35.0, 25.0), iu(85.0, 55.0, 35.0)],
        outage: OutageTargets {
            lu_rate_threshold: 0.5,
            iu_rate_threshold: 0.25,
            lu_outage_prob: 0.02,
            iu_outage_prob: 0.01,
            false_alarm_prob: 1e-4,
            detection_prob: 0.9,
        },
        slots: SlotPlan {
            count,
            period: 10e-3,
            t_min: 0.5e-3,
            t_max: 3.5e-3,
            scan_directions,
        },
        errors: ErrorConfig {
            lu_bound,
            lu_gaussian_std: lu_bound / 3.0,
            iu_element_bound: 0.1 * rician_factor.sqrt(),
            iu_pitch_bound: 0.5 * DEG,
            iu_azimuth_bound: 0.5 * DEG,
            iu_distance_bound: 0.5,
            beampattern_tolerance: None,
        },
        detection_threshold_mode: DetectionThresholdMode::Derived,
        power_model: PowerModel { rf_chain: 10e-3, element: 0.1e-3 },
        solve: SolveOptions { epsilon: 1e-3, max_iters: 50 },
    }
}

fn lu(distance: f64, pitch_deg: f64, azimuth_deg: f64) -> UserGeometry {
    UserGeometry {
        distance,
        pitch: pitch_deg * DEG,
        azimuth: azimuth_deg * DEG,
        role: UserRole::Lu,
    }
}

fn iu(distance: f64, pitch_deg: f64, azimuth_deg: f64) -> UserGeometry {
    UserGeometry {
        distance,
        pitch: pitch_deg * DEG,
        azimuth: azimuth_deg * DEG,
        role: UserRole::Iu,
    }
}

/// Checks every scenario invariant. Returns the empty list when the
/// scenario is usable; violations are data, not errors.
pub fn validate_scenario(s: &Scenario) -> Vec<String> {
    let mut v = Vec::new();
    let rf = &s.rf;
    for (name, value) in [
        ("rf.carrier_freq", rf.carrier_freq),
        ("rf.bandwidth", rf.bandwidth),
        ("rf.per_element_power", rf.per_element_power),
        ("rf.noise_power_lu", rf.noise_power_lu),
        ("rf.noise_power_iu", rf.noise_power_iu),
        ("rf.element_spacing", rf.element_spacing),
        ("rf.rcs", rf.rcs),
        ("rf.processing_noise", rf.processing_noise),
    ] {
        if !(value > 0.0) {
            v.push(format!("{name} must be positive, got {value}"));
        }
    }
    if !(rf.rician_factor > 0.0) {
        v.push(format!(
            "rician_factor must be positive, got {}",
            rf.rician_factor
        ));
    }
    if rf.element_spacing > rf.wavelength() {
        v.push(format!(
            "element_spacing {} exceeds wavelength {}",
            rf.element_spacing,
            rf.wavelength()
        ));
    }
    if s.array.n_rows < 1 || s.array.n_cols < 1 {
        v.push("array must have at least one row and one column".into());
    }
    if s.lus.is_empty() {
        v.push("need at least one LU".into());
    }
    if s.ius.is_empty() {
        v.push("need at least one IU".into());
    }
    for (label, users) in [("lus", &s.lus), ("ius", &s.ius)] {
        for (i, u) in users.iter().enumerate() {
            if !(u.distance > 0.0) {
                v.push(format!("{label}[{i}].distance must be positive"));
            }
            if !(0.0..=std::f64::consts::FRAC_PI_2).contains(&u.pitch) {
                v.push(format!("{label}[{i}].pitch out of [0, 90°]"));
            }
            if !(0.0..std::f64::consts::TAU).contains(&u.azimuth) {
                v.push(format!("{label}[{i}].azimuth out of [0°, 360°)"));
            }
        }
    }
    let o = &s.outage;
    for (name, p) in [
        ("lu_outage_prob", o.lu_outage_prob),
        ("iu_outage_prob", o.iu_outage_prob),
        ("false_alarm_prob", o.false_alarm_prob),
        ("detection_prob", o.detection_prob),
    ] {
        if !(0.0 < p && p < 1.0) {
            v.push(format!("outage.{name} must lie in (0, 1), got {p}"));
        }
    }
    if !(o.lu_rate_threshold > o.iu_rate_threshold && o.iu_rate_threshold > 0.0) {
        v.push(format!(
            "rate thresholds must satisfy r_s > r_e > 0, got r_s = {}, r_e = {}",
            o.lu_rate_threshold, o.iu_rate_threshold
        ));
    }
    let sl = &s.slots;
    if sl.count < 1 {
        v.push("slots.count must be at least 1".into());
    }
    if !(sl.t_min > 0.0 && sl.t_min <= sl.t_max) {
        v.push(format!(
            "slot duration interval invalid: t_min = {}, t_max = {}",
            sl.t_min, sl.t_max
        ));
    }
    if sl.count as f64 * sl.t_min > sl.period {
        v.push(format!(
            "time budget infeasible: {} slots × t_min {} s exceeds period {} s",
            sl.count, sl.t_min, sl.period
        ));
    }
    if sl.period > sl.count as f64 * sl.t_max {
        v.push(format!(
            "period {} s cannot be filled by {} slots of at most {} s",
            sl.period, sl.count, sl.t_max
        ));
    }
    if sl.scan_directions.len() != sl.count {
        v.push(format!(
            "scan_directions has {} entries for {} slots",
            sl.scan_directions.len(),
            sl.count
        ));
    }
    let e = &s.errors;
    for (name, b) in [
        ("lu_bound", e.lu_bound),
        ("lu_gaussian_std", e.lu_gaussian_std),
        ("iu_element_bound", e.iu_element_bound),
        ("iu_pitch_bound", e.iu_pitch_bound),
        ("iu_azimuth_bound", e.iu_azimuth_bound),
        ("iu_distance_bound", e.iu_distance_bound),
    ] {
        if b < 0.0 {
            v.push(format!("errors.{name} must be nonnegative, got {b}"));
        }
    }
    if let Some(tol) = &e.beampattern_tolerance {
        if tol.len() != sl.count {
            v.push(format!(
                "beampattern_tolerance has {} entries for {} slots",
                tol.len(),
                sl.count
            ));
        }
        if tol.iter().any(|&d| !(d > 0.0)) {
            v.push("beampattern_tolerance entries must be positive".into());
        }
    }
    if let DetectionThresholdMode::Explicit(im) = &s.detection_threshold_mode {
        if im.len() != s.ius.len() {
            v.push(format!(
                "explicit detection thresholds: {} entries for {} IUs",
                im.len(),
                s.ius.len()
            ));
        }
        if im.iter().any(|&x| x < 0.0) {
            v.push("detection thresholds must be nonnegative".into());
        }
    }
    if !(s.solve.epsilon > 0.0) {
        v.push("solve.epsilon must be positive".into());
    }
    if s.solve.max_iters == 0 {
        v.push("solve.max_iters must be at least 1".into());
    }
    v
}

// ---------------------------------------------------------------------------
// Config file schema (everything optional; defaults fill the gaps).
// ---------------------------------------------------------------------------

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    rf: Option<RawRf>,
    array: Option<RawArray>,
    users: Option<RawUsers>,
    outage: Option<RawOutage>,
    slots: Option<RawSlots>,
    errors: Option<RawErrors>,
    power_model: Option<RawPower>,
    solve: Option<RawSolve>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRf {
    carrier_freq_hz: Option<f64>,
    bandwidth_hz: Option<f64>,
    per_element_power_w: Option<f64>,
    noise_power_lu_dbm: Option<f64>,
    noise_power_iu_dbm: Option<f64>,
    rician_factor: Option<f64>,
    element_spacing_m: Option<f64>,
    rcs_m2: Option<f64>,
    processing_noise_dbm: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawArray {
    n_rows: Option<usize>,
    n_cols: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawUsers {
    lus: Option<Vec<RawUser>>,
    ius: Option<Vec<RawUser>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawUser {
    distance_m: f64,
    pitch_deg: f64,
    azimuth_deg: f64,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawOutage {
    lu_rate_threshold: Option<f64>,
    iu_rate_threshold: Option<f64>,
    lu_outage_prob: Option<f64>,
    iu_outage_prob: Option<f64>,
    false_alarm_prob: Option<f64>,
    detection_prob: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSlots {
    count: Option<usize>,
    period_s: Option<f64>,
    t_min_s: Option<f64>,
    t_max_s: Option<f64>,
    scan: Option<Vec<RawScan>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScan {
    pitch_deg: f64,
    azimuth_deg: f64,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawErrors {
    lu_bound: Option<f64>,
    lu_gaussian_std: Option<f64>,
    iu_element_bound: Option<f64>,
    iu_pitch_bound_deg: Option<f64>,
    iu_azimuth_bound_deg: Option<f64>,
    iu_distance_bound_m: Option<f64>,
    beampattern_tolerance: Option<Vec<f64>>,
    detection_threshold: Option<Vec<f64>>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPower {
    rf_chain_w: Option<f64>,
    element_w: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSolve {
    epsilon: Option<f64>,
    max_iters: Option<usize>,
}

/// Parses a TOML document into a [`Scenario`], filling every omitted key
/// with its default and validating the result. Deterministic.
pub fn load_scenario(document: &str) -> Result<Scenario, ScenarioError> {
    let raw: RawConfig =
        toml::from_str(document).map_err(|e| ScenarioError::Parse(e.to_string()))?;
    let mut s = default_scenario();

    if let Some(rf) = raw.rf {
        if let Some(x) = rf.carrier_freq_hz {
            s.rf.carrier_freq = x;
            // keep the λ/2 default spacing consistent unless overridden below
            s.rf.element_spacing = SPEED_OF_LIGHT / x / 2.0;
        }
        if let Some(x) = rf.bandwidth_hz {
            s.rf.bandwidth = x;
        }
        if let Some(x) = rf.per_element_power_w {
            s.rf.per_element_power = x;
        }
        if let Some(x) = rf.noise_power_lu_dbm {
            s.rf.noise_power_lu = dbm_to_watts(x);
        }
        if let Some(x) = rf.noise_power_iu_dbm {
            s.rf.noise_power_iu = dbm_to_watts(x);
        }
        if let Some(x) = rf.rician_factor {
            s.rf.rician_factor = x;
            s.errors.iu_element_bound = 0.1 * x.max(0.0).sqrt();
        }
        if let Some(x) = rf.element_spacing_m {
            s.rf.element_spacing = x;
        }
        if let Some(x) = rf.rcs_m2 {
            s.rf.rcs = x;
        }
        if let Some(x) = rf.processing_noise_dbm {
            s.rf.processing_noise = dbm_to_watts(x);
        }
    }
    if let Some(a) = raw.array {
        if let Some(x) = a.n_rows {
            s.array.n_rows = x;
        }
        if let Some(x) = a.n_cols {
            s.array.n_cols = x;
        }
    }
    if let Some(u) = raw.users {
        if let Some(list) = u.lus {
            s.lus = list
                .iter()
                .map(|r| lu(r.distance_m, r.pitch_deg, r.azimuth_deg))
                .collect();
        }
        if let Some(list) = u.ius {
            s.ius = list
                .iter()
                .map(|r| iu(r.distance_m, r.pitch_deg, r.azimuth_deg))
                .collect();
        }
    }
    if let Some(o) = raw.outage {
        if let Some(x) = o.lu_rate_threshold {
            s.outage.lu_rate_threshold = x;
        }
        if let Some(x) = o.iu_rate_threshold {
            s.outage.iu_rate_threshold = x;
        }
        if let Some(x) = o.lu_outage_prob {
            s.outage.lu_outage_prob = x;
        }
        if let Some(x) = o.iu_outage_prob {
            s.outage.iu_outage_prob = x;
        }
        if let Some(x) = o.false_alarm_prob {
            s.outage.false_alarm_prob = x;
        }
        if let Some(x) = o.detection_prob {
            s.outage.detection_prob = x;
        }
    }
    if let Some(slots) = raw.slots {
        if let Some(x) = slots.count {
            s.slots.count = x;
            // re-spread the default scan plan over the new slot count
            s.slots.scan_directions = (0..x)
                .map(|l| ScanDirection {
                    pitch: (10.0 + (l as f64 + 0.5) * 70.0 / x as f64) * DEG,
                    azimuth: (10.0 + (l as f64 + 0.5) * 20.0 / x as f64) * DEG,
                })
                .collect();
        }
        if let Some(x) = slots.period_s {
            s.slots.period = x;
        }
        if let Some(x) = slots.t_min_s {
            s.slots.t_min = x;
        }
        if let Some(x) = slots.t_max_s {
            s.slots.t_max = x;
        }
        if let Some(scan) = slots.scan {
            s.slots.scan_directions = scan
                .iter()
                .map(|r| ScanDirection {
                    pitch: r.pitch_deg * DEG,
                    azimuth: r.azimuth_deg * DEG,
                })
                .collect();
            s.slots.count = s.slots.scan_directions.len();
        }
    }
    if let Some(e) = raw.errors {
        if let Some(x) = e.lu_bound {
            s.errors.lu_bound = x;
            s.errors.lu_gaussian_std = x / 3.0;
        }
        if let Some(x) = e.lu_gaussian_std {
            s.errors.lu_gaussian_std = x;
        }
        if let Some(x) = e.iu_element_bound {
            s.errors.iu_element_bound = x;
        }
        if let Some(x) = e.iu_pitch_bound_deg {
            s.errors.iu_pitch_bound = x * DEG;
        }
        if let Some(x) = e.iu_azimuth_bound_deg {
            s.errors.iu_azimuth_bound = x * DEG;
        }
        if let Some(x) = e.iu_distance_bound_m {
            s.errors.iu_distance_bound = x;
        }
        if let Some(x) = e.beampattern_tolerance {
            s.errors.beampattern_tolerance = Some(x);
        }
        if let Some(x) = e.detection_threshold {
            s.detection_threshold_mode = DetectionThresholdMode::Explicit(x);
        }
    }
    if let Some(p) = raw.power_model {
        if let Some(x) = p.rf_chain_w {
            s.power_model.rf_chain = x;
        }
        if let Some(x) = p.element_w {
            s.power_model.element = x;
        }
    }
    if let Some(so) = raw.solve {
        if let Some(x) = so.epsilon {
            s.solve.epsilon = x;
        }
        if let Some(x) = so.max_iters {
            s.solve.max_iters = x;
        }
    }

    let violations = validate_scenario(&s);
    if violations.is_empty() {
        Ok(s)
    } else {
        Err(ScenarioError::Invalid(violations.join("; ")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_document_is_the_default_scenario() {
        let s = load_scenario("").unwrap();
        assert_eq!(s, default_scenario());
    }

    #[test]
    fn defaults_match_the_published_constants() {
        let s = default_scenario();
        assert_eq!(s.rf.carrier_freq, 30e9);
        assert_eq!(s.rf.per_element_power, 1e-3);
        assert_eq!(s.rf.bandwidth, 20e6);
        assert_eq!(s.slots.t_min, 0.5e-3);
        assert_eq!(s.slots.t_max, 3.5e-3);
        assert_eq!(s.slots.period, 10e-3);
        assert!((s.rf.noise_power_lu - 1e-12).abs() < 1e-24);
        assert!((s.rf.noise_power_iu - 1e-12).abs() < 1e-24);
        assert_eq!(s.outage.lu_rate_threshold, 0.5);
        assert_eq!(s.outage.iu_rate_threshold, 0.25);
        assert_eq!(s.outage.lu_outage_prob, 0.02);
        assert_eq!(s.outage.iu_outage_prob, 0.01);
        assert_eq!(s.solve.epsilon, 1e-3);
        assert_eq!(s.n_lus(), 3);
        assert_eq!(s.n_ius(), 2);
        assert_eq!(s.array.total(), 16);
        assert_eq!(s.lus[0].distance, 50.0);
        assert!((s.lus[1].pitch - 45.0 * DEG).abs() < 1e-15);
        assert!((s.ius[1].azimuth - 35.0 * DEG).abs() < 1e-15);
        // derived constants
        assert!((s.rf.wavelength() - 0.00999308193).abs() < 1e-9);
        assert!((s.errors.lu_bound - 0.1).abs() < 1e-15);
    }

    #[test]
    fn defaults_validate_clean() {
        assert!(validate_scenario(&default_scenario()).is_empty());
    }

    #[test]
    fn power_override_parses_in_watts() {
        let s = load_scenario("[rf]\nper_element_power_w = 1e-3\n").unwrap();
        assert_eq!(s.rf.per_element_power, 1e-3);
        let s2 = load_scenario("[rf]\nper_element_power_w = 5e-4\n").unwrap();
        assert_eq!(s2.rf.per_element_power, 5e-4);
    }

    #[test]
    fn inverted_duration_interval_is_rejected() {
        let err = load_scenario("[slots]\nt_min_s = 4e-3\nt_max_s = 3.5e-3\n").unwrap_err();
        match err {
            ScenarioError::Invalid(msg) => assert!(msg.contains("t_min")),
            other => panic!("expected validation error, got {other}"),
        }
    }

    #[test]
    fn unknown_keys_name_the_offender() {
        let err = load_scenario("[rf]\nper_element_pwr = 1.0\n").unwrap_err();
        match err {
            ScenarioError::Parse(msg) => assert!(msg.contains("per_element_pwr")),
            other => panic!("expected parse error, got {other}"),
        }
    }

    #[test]
    fn time_budget_infeasibility_is_a_violation() {
        let mut s = default_scenario();
        s.slots.count = 21;
        s.slots.scan_directions = vec![s.slots.scan_directions[0]; 21];
        // 21 · 0.5 ms = 10.5 ms > 10 ms
        let v = validate_scenario(&s);
        assert!(v.iter().any(|m| m.contains("time budget infeasible")), "{v:?}");
    }

    #[test]
    fn negative_rician_factor_is_a_violation() {
        let mut s = default_scenario();
        s.rf.rician_factor = -1.0;
        let v = validate_scenario(&s);
        assert!(v.iter().any(|m| m.contains("rician_factor must be positive")));
    }

    #[test]
    fn scenario_serialization_round_trips() {
        let s = default_scenario();
        let json = serde_json::to_string(&s).unwrap();
        let back: Scenario = serde_json::from_str(&json).unwrap();
        assert_eq!(s, back);
    }

    #[test]
    fn load_is_deterministic() {
        let doc = "[array]\nn_rows = 3\nn_cols = 3\n[errors]\nlu_bound = 0.05\n";
        let a = load_scenario(doc).unwrap();
        let b = load_scenario(doc).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.errors.lu_gaussian_std, 0.05 / 3.0);
    }
}
