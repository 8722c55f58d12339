//! Deterministic channel construction — UPA steering vectors, path loss,
//! nominal LU/IU channels, sensing channels, the TMA timing map — plus
//! seeded samplers for random channel realizations.
//!
//! Conventions fixed here and used everywhere downstream:
//!
//! - element ordering n = N_c·n_r + n_c (row-major over the planar array);
//! - LU nominal channels carry their path-loss amplitude ξ; error-model
//!   parameters (ball radius, Gaussian std) are expressed on the
//!   normalized channel `nominal / ξ`;
//! - IU nominal channels are stored normalized (entries of magnitude
//!   √κ_v) with the amplitude ξ_m/√(1+κ_v) kept separately.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::scenario::{ArrayGeometry, RfConstants, UserGeometry, UserRole};
use crate::uncertainty::UncertaintySet;

pub type CVec = DVector<Complex64>;
pub type CMat = DMatrix<Complex64>;

#[derive(Debug, Error)]
pub enum ChannelError {
    #[error("path loss needs a positive distance, got {0}")]
    NonPositiveDistance(f64),
    #[error("user role mismatch: expected {expected:?}")]
    RoleMismatch { expected: UserRole },
    #[error("amplitude {amplitude} exceeds the modulator maximum {max}")]
    InfeasibleAmplitude { amplitude: f64, max: f64 },
}

/// One draw from the circularly symmetric standard complex Gaussian.
pub fn crandn(rng: &mut impl Rng) -> Complex64 {
    // Box-Muller; total variance 1 (1/2 per real component).
    let u1: f64 = 1.0 - rng.gen::<f64>();
    let u2: f64 = rng.gen();
    let r = (-u1.ln()).sqrt();
    let phase = std::f64::consts::TAU * u2;
    Complex64::new(r * phase.cos(), r * phase.sin())
}

/// Transmit steering vector of the planar array, unit-modulus per entry.
#[derive(Debug, Clone, PartialEq)]
pub struct SteeringVector(pub CVec);

impl SteeringVector {
    pub fn as_vec(&self) -> &CVec {
        &self.0
    }
}

/// Per-element phase factors δ_r, δ_c of the array response at (θ, φ).
pub fn phase_factors(pitch: f64, azimuth: f64, d_f: f64, wavelength: f64) -> (f64, f64) {
    let dr = d_f * pitch.sin() * azimuth.cos() / wavelength;
    let dc = d_f * pitch.sin() * azimuth.sin() / wavelength;
    (dr, dc)
}

/// UPA steering vector: entry (n_r, n_c) = exp(−j2π(δ_r·n_r + δ_c·n_c)).
pub fn upa_steering(
    pitch: f64,
    azimuth: f64,
    geom: &ArrayGeometry,
    d_f: f64,
    wavelength: f64,
) -> SteeringVector {
    let (dr, dc) = phase_factors(pitch, azimuth, d_f, wavelength);
    let n = geom.total();
    let mut v = CVec::zeros(n);
    for nr in 0..geom.n_rows {
        for nc in 0..geom.n_cols {
            let phase = -std::f64::consts::TAU * (dr * nr as f64 + dc * nc as f64);
            v[geom.n_cols * nr + nc] = Complex64::from_polar(1.0, phase);
        }
    }
    SteeringVector(v)
}

/// Free-space amplitude path loss ξ = λ_c / (4π d).
pub fn path_loss(distance: f64, wavelength: f64) -> Result<f64, ChannelError> {
    if distance <= 0.0 {
        return Err(ChannelError::NonPositiveDistance(distance));
    }
    Ok(wavelength / (4.0 * std::f64::consts::PI * distance))
}

/// A nominal channel with its attached error model.
///
/// `ball_radius` and `gaussian_std` are magnitudes on the normalized
/// channel `nominal / path_loss`; `element_bounds` are per-element
/// magnitudes on the normalized channel.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelEstimate {
    pub nominal: CVec,
    pub path_loss: f64,
    pub ball_radius: Option<f64>,
    pub gaussian_std: Option<f64>,
    pub element_bounds: Option<Vec<f64>>,
}

impl ChannelEstimate {
    /// The channel with the large-scale amplitude divided out.
    pub fn normalized(&self) -> CVec {
        self.nominal.map(|z| z / self.path_loss)
    }

    /// Replaces the worst-case ball radius (used to install the aggregate
    /// IU bound produced by the uncertainty module).
    pub fn with_ball(mut self, radius: f64) -> Self {
        self.ball_radius = Some(radius);
        self
    }
}

/// Rician LU channel: ξ_k(√(κ/(κ+1))·LoS + √(1/(κ+1))·NLoS) with the NLoS
/// part drawn once from the seeded generator and then frozen.
pub fn lu_nominal_channel(
    user: &UserGeometry,
    rf: &RfConstants,
    geom: &ArrayGeometry,
    rng_seed: u64,
) -> Result<ChannelEstimate, ChannelError> {
    if user.role != UserRole::Lu {
        return Err(ChannelError::RoleMismatch { expected: UserRole::Lu });
    }
    let wavelength = rf.wavelength();
    let xi = path_loss(user.distance, wavelength)?;
    let kappa = rf.rician_factor;
    let los = upa_steering(user.pitch, user.azimuth, geom, rf.element_spacing, wavelength);
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let w_los = (kappa / (kappa + 1.0)).sqrt();
    let w_nlos = (1.0 / (kappa + 1.0)).sqrt();
    let nominal = CVec::from_iterator(
        geom.total(),
        los.0
            .iter()
            .map(|&a| xi * (w_los * a + w_nlos * crandn(&mut rng))),
    );
    Ok(ChannelEstimate {
        nominal,
        path_loss: xi,
        ball_radius: None,
        gaussian_std: None,
        element_bounds: None,
    })
}

/// Nominal wiretap channel ĝ_m: entries √κ_v·e^{−jψ̂_{m,n}} evaluated at
/// the estimated angles, with the amplitude ξ̂_m/√(1+κ_v) factored out.
pub fn iu_nominal_channel(
    user: &UserGeometry,
    rf: &RfConstants,
    geom: &ArrayGeometry,
) -> Result<ChannelEstimate, ChannelError> {
    if user.role != UserRole::Iu {
        return Err(ChannelError::RoleMismatch { expected: UserRole::Iu });
    }
    let wavelength = rf.wavelength();
    let kappa = rf.rician_factor;
    let steer = upa_steering(user.pitch, user.azimuth, geom, rf.element_spacing, wavelength);
    let nominal = steer.0.map(|a| kappa.sqrt() * a);
    let xi = path_loss(user.distance, wavelength)?;
    Ok(ChannelEstimate {
        nominal,
        path_loss: xi / (1.0 + kappa).sqrt(),
        ball_radius: None,
        gaussian_std: None,
        element_bounds: None,
    })
}

/// Round-trip radar channel of one IU.
#[derive(Debug, Clone, PartialEq)]
pub struct SensingChannel {
    /// c_m = b_m·a_mᴴ, stored entry-wise (all entries unit modulus).
    pub c: CVec,
    /// Receive phase b_m = e^{−j2π d_m/λ_c}.
    pub b: Complex64,
    /// Reflection-coefficient variance σ_αm² = S_RCS·λ²/((4π)³·d⁴).
    pub reflection_var: f64,
}

impl SensingChannel {
    /// |c_m · ĉ_mᴴ| against another sensing channel.
    pub fn gain_against(&self, other: &SensingChannel) -> f64 {
        self.c
            .iter()
            .zip(other.c.iter())
            .map(|(a, b)| a * b.conj())
            .sum::<Complex64>()
            .norm()
    }
}

pub fn sensing_channel(
    user: &UserGeometry,
    rf: &RfConstants,
    geom: &ArrayGeometry,
) -> Result<SensingChannel, ChannelError> {
    if user.role != UserRole::Iu {
        return Err(ChannelError::RoleMismatch { expected: UserRole::Iu });
    }
    if user.distance <= 0.0 {
        return Err(ChannelError::NonPositiveDistance(user.distance));
    }
    let wavelength = rf.wavelength();
    let steer = upa_steering(user.pitch, user.azimuth, geom, rf.element_spacing, wavelength);
    let b = Complex64::from_polar(
        1.0,
        -std::f64::consts::TAU * user.distance / wavelength,
    );
    let c = steer.0.map(|a| b * a.conj());
    let four_pi = 4.0 * std::f64::consts::PI;
    let reflection_var =
        rf.rcs * wavelength * wavelength / (four_pi.powi(3) * user.distance.powi(4));
    Ok(SensingChannel { c, b, reflection_var })
}

/// LU realization: nominal + CN(0, σ_he²·I). The caller chooses the σ_he
/// scale (normalized or absolute) to match the estimate convention.
pub fn sample_lu_realization(
    est: &ChannelEstimate,
    sigma_he: f64,
    rng: &mut impl Rng,
) -> CVec {
    est.nominal.map(|z| z + sigma_he * crandn(rng))
}

/// One wiretap-channel draw, split into its normalized vector and the
/// sampled large-scale amplitude.
#[derive(Debug, Clone)]
pub struct IuDraw {
    /// ĝ_m + Δg_m: perturbed LoS plus small-scale error, unscaled.
    pub normalized: CVec,
    /// ξ_m(d̂+Δd)/√(1+κ_v).
    pub scale: f64,
    pub pitch_delta: f64,
    pub azimuth_delta: f64,
    pub distance_delta: f64,
}

impl IuDraw {
    /// The absolute channel `scale · normalized`.
    pub fn absolute(&self) -> CVec {
        self.normalized.map(|z| self.scale * z)
    }
}

/// IU realization assembled from the physical error model: uniform angle
/// and distance perturbations plus truncated-Gaussian small-scale error,
/// scaled by ξ_m(d̂+Δd)/√(1+κ_v).
pub fn sample_iu_draw(
    est: &ChannelEstimate,
    user: &UserGeometry,
    rf: &RfConstants,
    geom: &ArrayGeometry,
    set: &UncertaintySet,
    rng: &mut impl Rng,
) -> IuDraw {
    let wavelength = rf.wavelength();
    let kappa = rf.rician_factor;
    let dtheta = sample_uniform(set.pitch_bound, rng);
    let dphi = sample_uniform(set.azimuth_bound, rng);
    let dd = sample_uniform(set.distance_bound, rng);
    let steer = upa_steering(
        user.pitch + dtheta,
        user.azimuth + dphi,
        geom,
        rf.element_spacing,
        wavelength,
    );
    let scale = path_loss(user.distance + dd, wavelength).expect("distance bound < distance")
        / (1.0 + kappa).sqrt();
    let n = geom.total();
    debug_assert_eq!(est.nominal.len(), n);
    let normalized = CVec::from_iterator(
        n,
        steer.0.iter().enumerate().map(|(i, &a)| {
            let small = truncated_crandn(set.per_element_bounds[i], rng);
            kappa.sqrt() * a + small
        }),
    );
    IuDraw {
        normalized,
        scale,
        pitch_delta: dtheta,
        azimuth_delta: dphi,
        distance_delta: dd,
    }
}

/// The absolute-channel view of [`sample_iu_draw`].
pub fn sample_iu_realization(
    est: &ChannelEstimate,
    user: &UserGeometry,
    rf: &RfConstants,
    geom: &ArrayGeometry,
    set: &UncertaintySet,
    rng: &mut impl Rng,
) -> CVec {
    sample_iu_draw(est, user, rf, geom, set, rng).absolute()
}

fn sample_uniform(bound: f64, rng: &mut impl Rng) -> f64 {
    if bound == 0.0 {
        0.0
    } else {
        rng.gen_range(-bound..=bound)
    }
}

/// CN(0, (bound/3)²) truncated to |z| ≤ bound (3-sigma rejection).
fn truncated_crandn(bound: f64, rng: &mut impl Rng) -> Complex64 {
    if bound == 0.0 {
        return Complex64::new(0.0, 0.0);
    }
    let sigma = bound / 3.0;
    loop {
        let z = sigma * crandn(rng);
        if z.norm() <= bound {
            return z;
        }
    }
}

/// Per-element on-time parameters of the time-modulated array.
#[derive(Debug, Clone, PartialEq)]
pub struct TmaTiming {
    /// Zero-state durations τ_n (s).
    pub tau: Vec<f64>,
    /// Zero-state onset times t_on,n ∈ [0, T_p) (s).
    pub t_on: Vec<f64>,
    /// Code element time T_p (s).
    pub period: f64,
}

/// Maps complex element amplitudes/phases to first-harmonic timing:
/// A_n/A_max = sin(π·τ_n/T_p) and −π(2·t_on,n + τ_n)/T_p = φ_0,n + 2kπ.
pub fn tma_timing(
    amplitudes: &[f64],
    phases: &[f64],
    a_max: f64,
    t_p: f64,
) -> Result<TmaTiming, ChannelError> {
    assert_eq!(amplitudes.len(), phases.len());
    let mut tau = Vec::with_capacity(amplitudes.len());
    let mut t_on = Vec::with_capacity(amplitudes.len());
    for (&a, &phi0) in amplitudes.iter().zip(phases) {
        if a > a_max || a < 0.0 {
            return Err(ChannelError::InfeasibleAmplitude { amplitude: a, max: a_max });
        }
        let tn = t_p / std::f64::consts::PI * (a / a_max).asin();
        let base = (-t_p * phi0 / std::f64::consts::PI - tn) / 2.0;
        tau.push(tn);
        t_on.push(base.rem_euclid(t_p));
    }
    Ok(TmaTiming { tau, t_on, period: t_p })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::default_scenario;
    use approx::assert_relative_eq;

    fn geom(r: usize, c: usize) -> ArrayGeometry {
        ArrayGeometry { n_rows: r, n_cols: c }
    }

    #[test]
    fn steering_at_zero_pitch_is_all_ones() {
        let v = upa_steering(0.0, 1.234, &geom(3, 4), 0.005, 0.01);
        for z in v.0.iter() {
            assert_relative_eq!(z.re, 1.0, epsilon = 1e-15);
            assert_relative_eq!(z.im, 0.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn steering_single_element_is_scalar_one() {
        let v = upa_steering(0.7, 0.3, &geom(1, 1), 0.005, 0.01);
        assert_eq!(v.0.len(), 1);
        assert_relative_eq!(v.0[0].re, 1.0, epsilon = 1e-15);
    }

    #[test]
    fn steering_broadside_two_by_two() {
        // θ = 90°, φ = 0, d_f/λ = 0.5: δ_r = 0.5, δ_c = 0 → [1, 1, −1, −1]
        let v = upa_steering(std::f64::consts::FRAC_PI_2, 0.0, &geom(2, 2), 0.005, 0.01);
        let expect = [1.0, 1.0, -1.0, -1.0];
        for (z, e) in v.0.iter().zip(expect) {
            assert_relative_eq!(z.re, e, epsilon = 1e-12);
            assert_relative_eq!(z.im, 0.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn steering_norm_squared_is_element_count() {
        let v = upa_steering(0.9, 2.1, &geom(4, 4), 0.005, 0.01);
        assert_relative_eq!(v.0.norm_squared(), 16.0, epsilon = 1e-12);
        for z in v.0.iter() {
            assert_relative_eq!(z.norm(), 1.0, epsilon = 1e-13);
        }
    }

    #[test]
    fn path_loss_normalization_point() {
        let lambda = 0.01;
        let d = lambda / (4.0 * std::f64::consts::PI);
        assert_relative_eq!(path_loss(d, lambda).unwrap(), 1.0, epsilon = 1e-14);
    }

    #[test]
    fn path_loss_reference_value_and_scaling() {
        let v = path_loss(50.0, 0.01).unwrap();
        assert_relative_eq!(v, 1.5915494309189535e-5, epsilon = 1e-18);
        assert_relative_eq!(path_loss(100.0, 0.01).unwrap(), v / 2.0, epsilon = 1e-20);
        assert!(path_loss(0.0, 0.01).is_err());
    }

    #[test]
    fn lu_channel_is_seed_deterministic() {
        let s = default_scenario();
        let a = lu_nominal_channel(&s.lus[0], &s.rf, &s.array, 7).unwrap();
        let b = lu_nominal_channel(&s.lus[0], &s.rf, &s.array, 7).unwrap();
        assert_eq!(a, b);
        let c = lu_nominal_channel(&s.lus[0], &s.rf, &s.array, 8).unwrap();
        assert_ne!(a.nominal, c.nominal);
    }

    #[test]
    fn lu_channel_los_limit() {
        let mut s = default_scenario();
        s.rf.rician_factor = 1e12;
        let est = lu_nominal_channel(&s.lus[0], &s.rf, &s.array, 3).unwrap();
        let steer = upa_steering(
            s.lus[0].pitch,
            s.lus[0].azimuth,
            &s.array,
            s.rf.element_spacing,
            s.rf.wavelength(),
        );
        for (z, a) in est.normalized().iter().zip(steer.0.iter()) {
            assert_relative_eq!((z - a).norm(), 0.0, epsilon = 1e-5);
        }
    }

    #[test]
    fn lu_channel_norm_concentrates_near_sqrt_n() {
        // E‖nominal/ξ‖² = N for the Rician mix; sample mean within 5 %.
        let mut s = default_scenario();
        s.array = geom(16, 16);
        let mut acc = 0.0;
        let trials = 200;
        for seed in 0..trials {
            let est = lu_nominal_channel(&s.lus[0], &s.rf, &s.array, seed).unwrap();
            acc += est.normalized().norm() / (s.array.total() as f64).sqrt();
        }
        let mean = acc / trials as f64;
        assert!((mean - 1.0).abs() < 0.05, "mean normalized norm {mean}");
    }

    #[test]
    fn iu_channel_entries_have_magnitude_sqrt_kappa() {
        let s = default_scenario();
        let est = iu_nominal_channel(&s.ius[0], &s.rf, &s.array).unwrap();
        let k = s.rf.rician_factor.sqrt();
        for z in est.nominal.iter() {
            assert_relative_eq!(z.norm(), k, epsilon = 1e-12);
        }
        // squared norm = N·κ_v
        assert_relative_eq!(
            est.nominal.norm_squared(),
            s.array.total() as f64 * s.rf.rician_factor,
            epsilon = 1e-9
        );
    }

    #[test]
    fn iu_channel_at_zero_pitch_is_constant() {
        let mut s = default_scenario();
        s.ius[0].pitch = 0.0;
        let est = iu_nominal_channel(&s.ius[0], &s.rf, &s.array).unwrap();
        let k = s.rf.rician_factor.sqrt();
        for z in est.nominal.iter() {
            assert_relative_eq!(z.re, k, epsilon = 1e-12);
            assert_relative_eq!(z.im, 0.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn sensing_channel_properties() {
        let s = default_scenario();
        let c = sensing_channel(&s.ius[0], &s.rf, &s.array).unwrap();
        for z in c.c.iter() {
            assert_relative_eq!(z.norm(), 1.0, epsilon = 1e-12);
        }
        // matched gain |c ĉᴴ| = N
        assert_relative_eq!(c.gain_against(&c), s.array.total() as f64, epsilon = 1e-9);
        // d⁴ law
        let mut far = s.ius[0];
        far.distance *= 2.0;
        let c2 = sensing_channel(&far, &s.rf, &s.array).unwrap();
        assert_relative_eq!(c2.reflection_var, c.reflection_var / 16.0, epsilon = 1e-25);
    }

    #[test]
    fn lu_sampler_zero_sigma_returns_nominal() {
        let s = default_scenario();
        let est = lu_nominal_channel(&s.lus[0], &s.rf, &s.array, 1).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let draw = sample_lu_realization(&est, 0.0, &mut rng);
        assert_eq!(draw, est.nominal);
    }

    #[test]
    fn lu_sampler_component_statistics() {
        // per-real-part variance σ²/2 within 3 %, mean → nominal
        let est = ChannelEstimate {
            nominal: CVec::from_element(1, Complex64::new(2.0, -1.0)),
            path_loss: 1.0,
            ball_radius: None,
            gaussian_std: Some(0.5),
            element_bounds: None,
        };
        let sigma = 0.5;
        let n = 100_000;
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let (mut sum, mut sumsq) = (Complex64::new(0.0, 0.0), 0.0);
        for _ in 0..n {
            let d = sample_lu_realization(&est, sigma, &mut rng)[0] - est.nominal[0];
            sum += d;
            sumsq += d.re * d.re;
        }
        let var_re = sumsq / n as f64;
        assert!(
            (var_re - sigma * sigma / 2.0).abs() < 0.03 * sigma * sigma / 2.0,
            "per-component variance {var_re}"
        );
        let mean = sum / n as f64;
        assert!(mean.norm() < 3.0 * sigma / (n as f64).sqrt() * 3.0);
    }

    #[test]
    fn iu_sampler_zero_bounds_returns_scaled_nominal() {
        let s = default_scenario();
        let est = iu_nominal_channel(&s.ius[0], &s.rf, &s.array).unwrap();
        let set = UncertaintySet {
            per_element_bounds: vec![0.0; s.array.total()],
            distance_bound: 0.0,
            pitch_bound: 0.0,
            azimuth_bound: 0.0,
        };
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let draw = sample_iu_realization(&est, &s.ius[0], &s.rf, &s.array, &set, &mut rng);
        for (d, g) in draw.iter().zip(est.nominal.iter()) {
            assert_relative_eq!((d - est.path_loss * g).norm(), 0.0, epsilon = 1e-18);
        }
    }

    #[test]
    fn iu_sampler_respects_distance_bound() {
        let s = default_scenario();
        let est = iu_nominal_channel(&s.ius[0], &s.rf, &s.array).unwrap();
        let set = UncertaintySet {
            per_element_bounds: vec![0.1; s.array.total()],
            distance_bound: 1.0,
            pitch_bound: 0.0,
            azimuth_bound: 0.0,
        };
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..2000 {
            let draw = sample_iu_draw(&est, &s.ius[0], &s.rf, &s.array, &set, &mut rng);
            assert!(draw.distance_delta.abs() <= 1.0);
            assert_eq!(draw.pitch_delta, 0.0);
            // per-element small-scale truncation holds
            for (d, g) in draw.normalized.iter().zip(est.nominal.iter()) {
                assert!((d - g).norm() <= 0.1 + 1e-12);
            }
        }
    }

    #[test]
    fn tma_timing_map() {
        let t = tma_timing(&[0.0, 1.0, 0.5], &[0.3, -1.2, 2.0], 1.0, 1e-6).unwrap();
        assert_relative_eq!(t.tau[0], 0.0, epsilon = 1e-20);
        // arcsin(1) = π/2 → τ = T_p/2
        assert_relative_eq!(t.tau[1], 0.5e-6, epsilon = 1e-15);
        for (i, (&a, &phi)) in [0.0, 1.0, 0.5].iter().zip(&[0.3, -1.2, 2.0]).enumerate() {
            // amplitude reconstructs through sin(πτ/T_p)
            let rec = (std::f64::consts::PI * t.tau[i] / t.period).sin();
            assert_relative_eq!(rec, a, epsilon = 1e-12);
            // phase equation −π(2 t_on + τ)/T_p ≡ φ (mod 2π)
            let lhs = -std::f64::consts::PI * (2.0 * t.t_on[i] + t.tau[i]) / t.period;
            let diff = (lhs - phi).rem_euclid(std::f64::consts::TAU);
            assert!(diff < 1e-9 || diff > std::f64::consts::TAU - 1e-9, "diff {diff}");
            assert!((0.0..t.period).contains(&t.t_on[i]));
        }
        assert!(tma_timing(&[1.1], &[0.0], 1.0, 1e-6).is_err());
    }
}
