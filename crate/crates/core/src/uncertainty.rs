//! Geometric bounds on the wiretap-channel error: worst-case per-element
//! phase deviation over the angle uncertainty box, actual/safe region
//! areas, per-element magnitude bounds and their aggregate.

use serde::{Deserialize, Serialize};

use crate::scenario::{ArrayGeometry, RfConstants, UserGeometry};

/// The uncertainty set Ξ_m of one IU: per-element small-scale bounds,
/// distance bound and angle bounds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UncertaintySet {
    pub per_element_bounds: Vec<f64>,
    pub distance_bound: f64,
    pub pitch_bound: f64,
    pub azimuth_bound: f64,
}

impl UncertaintySet {
    pub fn from_scenario(s: &crate::scenario::Scenario) -> Self {
        UncertaintySet {
            per_element_bounds: vec![s.errors.iu_element_bound; s.array.total()],
            distance_bound: s.errors.iu_distance_bound,
            pitch_bound: s.errors.iu_pitch_bound,
            azimuth_bound: s.errors.iu_azimuth_bound,
        }
    }
}

/// Everything the bound construction produces, element by element.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ElementBoundReport {
    /// Worst-case phase deviation Δψ_{m,n} (rad).
    pub phase_deviations: Vec<f64>,
    /// Per-element error bounds ε_{m,n} + √(2κ)·√(1−cos Δψ).
    pub element_bounds: Vec<f64>,
    /// Actual uncertainty-region areas.
    pub actual_areas: Vec<f64>,
    /// Safe approximation-region areas (≥ actual when Δψ is small).
    pub safe_areas: Vec<f64>,
    /// Aggregate bound τ_m with τ² = Σ_n element_bound_n².
    pub aggregate: f64,
}

/// Range of sin over [lo, hi] (radians, any width).
fn sin_range(lo: f64, hi: f64) -> (f64, f64) {
    extremum_range(lo, hi, f64::sin, std::f64::consts::FRAC_PI_2, std::f64::consts::PI)
}

/// Range of cos over [lo, hi].
fn cos_range(lo: f64, hi: f64) -> (f64, f64) {
    extremum_range(lo, hi, f64::cos, 0.0, std::f64::consts::PI)
}

/// Exact range of a 2π-periodic wave with maxima at `peak + 2πk` and
/// minima at `peak + trough_offset + 2πk`.
fn extremum_range(lo: f64, hi: f64, f: fn(f64) -> f64, peak: f64, trough_offset: f64) -> (f64, f64) {
    let tau = std::f64::consts::TAU;
    let mut min = f(lo).min(f(hi));
    let mut max = f(lo).max(f(hi));
    if hi - lo >= tau {
        return (-1.0, 1.0);
    }
    // does a maximum point fall inside [lo, hi]?
    let k_max = ((lo - peak) / tau).ceil();
    if peak + k_max * tau <= hi {
        max = 1.0;
    }
    let trough = peak + trough_offset;
    let k_min = ((lo - trough) / tau).ceil();
    if trough + k_min * tau <= hi {
        min = -1.0;
    }
    (min, max)
}

fn interval_mul(a: (f64, f64), b: (f64, f64)) -> (f64, f64) {
    let products = [a.0 * b.0, a.0 * b.1, a.1 * b.0, a.1 * b.1];
    (
        products.iter().cloned().fold(f64::INFINITY, f64::min),
        products.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
    )
}

/// Worst-case phase deviation of element (n_r, n_c) over the angle box
/// (θ̂ ± Θ) × (φ̂ ± Φ).
///
/// The element phase is ψ = 2π(d_f/λ)·sinθ·(n_r·cosφ + n_c·sinφ)
/// = c_n·sinθ·cos(φ − φ_n) with c_n = 2π(d_f/λ)·√(n_r² + n_c²). Since θ
/// and φ vary independently, the exact range of ψ over the box is the
/// interval product of the sinθ and cos(φ − φ_n) ranges, which makes the
/// returned maximum of |ψ − ψ̂| tight rather than merely conservative.
pub fn phase_deviation(
    pitch_hat: f64,
    azimuth_hat: f64,
    pitch_bound: f64,
    azimuth_bound: f64,
    n_r: usize,
    n_c: usize,
    d_f: f64,
    wavelength: f64,
) -> f64 {
    if n_r == 0 && n_c == 0 {
        return 0.0;
    }
    let radial = ((n_r * n_r + n_c * n_c) as f64).sqrt();
    let c_n = std::f64::consts::TAU * d_f / wavelength * radial;
    let phi_n = (n_c as f64).atan2(n_r as f64);
    let psi_hat = c_n * pitch_hat.sin() * (azimuth_hat - phi_n).cos();
    let s_range = sin_range(pitch_hat - pitch_bound, pitch_hat + pitch_bound);
    let c_range = cos_range(
        azimuth_hat - phi_n - azimuth_bound,
        azimuth_hat - phi_n + azimuth_bound,
    );
    let (lo, hi) = interval_mul(s_range, c_range);
    ((c_n * hi - psi_hat).abs()).max((c_n * lo - psi_hat).abs())
}

/// Areas of the actual uncertainty region (two semicircles plus a ring
/// segment) and of its circumscribing safe region.
pub fn region_areas(element_bound: f64, kappa: f64, phase_dev: f64) -> (f64, f64) {
    let r = element_bound;
    let s_act = std::f64::consts::PI * r * r
        + 4.0 * kappa.sqrt() * r * phase_dev / std::f64::consts::PI;
    let reach = r + chord_length(kappa, phase_dev);
    let s_saf = std::f64::consts::PI * reach * reach;
    (s_act, s_saf)
}

/// Chord the LoS tip sweeps under a phase deviation: √(2κ)·√(1−cos Δψ),
/// clamped at the diameter for deviations beyond π.
fn chord_length(kappa: f64, phase_dev: f64) -> f64 {
    let clamped = phase_dev.min(std::f64::consts::PI);
    (2.0 * kappa).sqrt() * (1.0 - clamped.cos()).max(0.0).sqrt()
}

/// Per-element error bound ε_{m,n} + √(2κ_v)·√(1 − cos Δψ_{m,n}).
pub fn element_bound(small_scale_bound: f64, kappa: f64, phase_dev: f64) -> f64 {
    small_scale_bound + chord_length(kappa, phase_dev)
}

/// Aggregate bound τ_m over the whole array, with the per-element report.
pub fn aggregate_bound(
    set: &UncertaintySet,
    user: &UserGeometry,
    rf: &RfConstants,
    geom: &ArrayGeometry,
) -> (f64, ElementBoundReport) {
    let n = geom.total();
    assert_eq!(set.per_element_bounds.len(), n);
    let kappa = rf.rician_factor;
    let wavelength = rf.wavelength();
    let mut phase_deviations = Vec::with_capacity(n);
    let mut element_bounds = Vec::with_capacity(n);
    let mut actual_areas = Vec::with_capacity(n);
    let mut safe_areas = Vec::with_capacity(n);
    let mut sq_sum = 0.0;
    for nr in 0..geom.n_rows {
        for nc in 0..geom.n_cols {
            let idx = geom.n_cols * nr + nc;
            let dev = phase_deviation(
                user.pitch,
                user.azimuth,
                set.pitch_bound,
                set.azimuth_bound,
                nr,
                nc,
                rf.element_spacing,
                wavelength,
            );
            let eps = set.per_element_bounds[idx];
            let bound = element_bound(eps, kappa, dev);
            let (s_act, s_saf) = region_areas(eps, kappa, dev);
            phase_deviations.push(dev);
            element_bounds.push(bound);
            actual_areas.push(s_act);
            safe_areas.push(s_saf);
            sq_sum += bound * bound;
        }
    }
    let aggregate = sq_sum.sqrt();
    (
        aggregate,
        ElementBoundReport {
            phase_deviations,
            element_bounds,
            actual_areas,
            safe_areas,
            aggregate,
        },
    )
}
