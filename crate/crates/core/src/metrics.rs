//! Communication and sensing figures of merit for a concrete channel
//! realization and beam solution: SINRs, rates, secrecy sum-rate,
//! detection quantities, beampattern residual/gain and efficiency
//! measures. Also home of [`BeamSolution`], the design-output record.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::channel::{upa_steering, CMat, CVec, SensingChannel};
use crate::scenario::{ArrayGeometry, Scenario};

#[derive(Debug, Error)]
pub enum MetricsError {
    #[error("false alarm probability must lie in (0, 1), got {0}")]
    BadProbability(f64),
    #[error("total power is zero; efficiency undefined")]
    ZeroPower,
}

// ---------------------------------------------------------------------------
// Serializable complex containers
// ---------------------------------------------------------------------------

/// Column-major square complex matrix, JSON-friendly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CMatJson {
    pub n: usize,
    pub data: Vec<[f64; 2]>,
}

impl From<&CMat> for CMatJson {
    fn from(m: &CMat) -> Self {
        CMatJson {
            n: m.nrows(),
            data: m.iter().map(|z| [z.re, z.im]).collect(),
        }
    }
}

impl From<&CMatJson> for CMat {
    fn from(j: &CMatJson) -> Self {
        CMat::from_iterator(j.n, j.n, j.data.iter().map(|&[re, im]| Complex64::new(re, im)))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CVecJson(pub Vec<[f64; 2]>);

impl From<&CVec> for CVecJson {
    fn from(v: &CVec) -> Self {
        CVecJson(v.iter().map(|z| [z.re, z.im]).collect())
    }
}

impl From<&CVecJson> for CVec {
    fn from(j: &CVecJson) -> Self {
        CVec::from_iterator(j.0.len(), j.0.iter().map(|&[re, im]| Complex64::new(re, im)))
    }
}

// ---------------------------------------------------------------------------
// BeamSolution
// ---------------------------------------------------------------------------

/// Which power constraint shaped the design.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PowerScheme {
    /// Per-element rows Σ_i [W_i]_nn ≤ P_t.
    PerElement,
    /// Single trace row Σ_i tr(W_i) ≤ N·P_t (traditional transceiver).
    TotalTrace,
}

/// How a rank-one vector was pulled out of its covariance block.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtractionInfo {
    /// λ₂/λ₁ of the solved matrix (0 for exact rank one).
    pub residual: f64,
    /// "eigen" or "randomized".
    pub path: String,
}

/// Per-iteration slack values kept for re-verification and debugging.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SlotSlacks {
    pub z: Vec<f64>,
    pub nu: Vec<f64>,
    pub rho: Vec<Vec<f64>>,
    pub mu: Vec<Vec<f64>>,
    pub vartheta: Vec<f64>,
    pub zeta: Vec<Vec<f64>>,
    pub beta: Vec<Vec<f64>>,
    pub pi: Vec<Vec<f64>>,
    pub o: Vec<f64>,
    pub omega: Vec<f64>,
    pub chi: Vec<f64>,
    pub iota: Vec<f64>,
    pub a: Vec<f64>,
}

/// One slot of the converged design.
#[derive(Debug, Clone, PartialEq)]
pub struct SlotSolution {
    pub w_common: CMat,
    pub w_private: Vec<CMat>,
    pub v_common: CVec,
    pub v_private: Vec<CVec>,
    /// Slot duration (s).
    pub duration: f64,
    /// Common-rate split C_k (bps/Hz).
    pub common_split: Vec<f64>,
    pub extraction: Vec<ExtractionInfo>,
    pub slacks: SlotSlacks,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct SlotSolutionJson {
    w_common: CMatJson,
    w_private: Vec<CMatJson>,
    v_common: CVecJson,
    v_private: Vec<CVecJson>,
    duration: f64,
    common_split: Vec<f64>,
    extraction: Vec<ExtractionInfo>,
    slacks: SlotSlacks,
}

impl Serialize for SlotSolution {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        SlotSolutionJson {
            w_common: (&self.w_common).into(),
            w_private: self.w_private.iter().map(|m| m.into()).collect(),
            v_common: (&self.v_common).into(),
            v_private: self.v_private.iter().map(|v| v.into()).collect(),
            duration: self.duration,
            common_split: self.common_split.clone(),
            extraction: self.extraction.clone(),
            slacks: self.slacks.clone(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for SlotSolution {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let j = SlotSolutionJson::deserialize(d)?;
        Ok(SlotSolution {
            w_common: (&j.w_common).into(),
            w_private: j.w_private.iter().map(|m| m.into()).collect(),
            v_common: (&j.v_common).into(),
            v_private: j.v_private.iter().map(|v| v.into()).collect(),
            duration: j.duration,
            common_split: j.common_split,
            extraction: j.extraction,
            slacks: j.slacks,
        })
    }
}

/// The converged design: covariances, extracted beamformers, timeslot
/// durations, the common-rate split, and the optimization trace.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BeamSolution {
    pub scheme: PowerScheme,
    pub seed: u64,
    pub slots: Vec<SlotSolution>,
    /// Surrogate objective after each block solve, nondecreasing.
    pub objective_trace: Vec<f64>,
    /// Solver status after each block solve ("b1:optimal", ...).
    pub solve_statuses: Vec<String>,
    pub outer_iterations: usize,
    pub converged: bool,
}

impl BeamSolution {
    /// Final objective value (period-averaged secrecy surrogate, bps/Hz).
    pub fn objective(&self) -> f64 {
        *self.objective_trace.last().unwrap_or(&0.0)
    }

    /// Σ_i tr(W_i[l]) (W).
    pub fn slot_power(&self, l: usize) -> f64 {
        let s = &self.slots[l];
        let mut p = s.w_common.diagonal().iter().map(|z| z.re).sum::<f64>();
        for w in &s.w_private {
            p += w.diagonal().iter().map(|z| z.re).sum::<f64>();
        }
        p
    }

    /// Σ_i [W_i[l]]_nn (W).
    pub fn element_power(&self, l: usize, n: usize) -> f64 {
        let s = &self.slots[l];
        let mut p = s.w_common[(n, n)].re;
        for w in &s.w_private {
            p += w[(n, n)].re;
        }
        p
    }

    /// Time-averaged transmit power (1/T)·Σ_l t[l]·Σ_i tr(W_i[l]) (W).
    pub fn average_power(&self, period: f64) -> f64 {
        self.slots
            .iter()
            .enumerate()
            .map(|(l, s)| s.duration * self.slot_power(l))
            .sum::<f64>()
            / period
    }

    /// Structural-invariant violations (empty when clean).
    pub fn check_invariants(&self, scenario: &Scenario) -> Vec<String> {
        let mut v = Vec::new();
        let n = scenario.array.total();
        let pt = scenario.rf.per_element_power;
        let mut total_time = 0.0;
        for (l, s) in self.slots.iter().enumerate() {
            total_time += s.duration;
            if s.duration < scenario.slots.t_min - 1e-9 || s.duration > scenario.slots.t_max + 1e-9
            {
                v.push(format!("slot {l}: duration {} outside bounds", s.duration));
            }
            match self.scheme {
                PowerScheme::PerElement => {
                    for idx in 0..n {
                        let p = self.element_power(l, idx);
                        if p > pt + 1e-9 {
                            v.push(format!("slot {l}: element {idx} power {p} exceeds {pt}"));
                        }
                    }
                }
                PowerScheme::TotalTrace => {
                    let p = self.slot_power(l);
                    if p > n as f64 * pt + 1e-9 {
                        v.push(format!("slot {l}: total power {p} exceeds {}", n as f64 * pt));
                    }
                }
            }
            for (tag, w) in std::iter::once(("c".to_string(), &s.w_common))
                .chain(s.w_private.iter().enumerate().map(|(k, w)| (k.to_string(), w)))
            {
                if let Some(lam_min) = hermitian_eigen_min(w) {
                    let scale = w.diagonal().iter().map(|z| z.re.abs()).fold(1e-12, f64::max);
                    if lam_min < -1e-8 * scale.max(1.0) - 1e-12 {
                        v.push(format!("slot {l}: W_{tag} not PSD (λ_min = {lam_min:e})"));
                    }
                }
            }
            if s.common_split.iter().any(|&c| c < -1e-9) {
                v.push(format!("slot {l}: negative common split"));
            }
        }
        if total_time > scenario.slots.period + 1e-9 {
            v.push(format!(
                "total time {} exceeds period {}",
                total_time, scenario.slots.period
            ));
        }
        v
    }
}

fn hermitian_eigen_min(m: &CMat) -> Option<f64> {
    let eig = m.clone().symmetric_eigen();
    eig.eigenvalues.iter().cloned().reduce(f64::min)
}

// ---------------------------------------------------------------------------
// Link metrics
// ---------------------------------------------------------------------------

/// Common- and private-stream SINRs of user k against a channel h.
pub fn link_sinrs(
    h: &CVec,
    w_common: &CVec,
    w_private: &[CVec],
    k: usize,
    noise: f64,
) -> (f64, f64) {
    let sig_c = h.dotc(w_common).norm_sqr();
    let mut interference_all = 0.0;
    for w in w_private {
        interference_all += h.dotc(w).norm_sqr();
    }
    let sig_k = h.dotc(&w_private[k]).norm_sqr();
    let gamma_c = sig_c / (interference_all + noise);
    let gamma_p = sig_k / (interference_all - sig_k + noise);
    (gamma_c, gamma_p)
}

/// Matrix-form SINRs: quadratic forms against the covariances. Coincides
/// with [`link_sinrs`] when the covariances are exactly rank one.
pub fn link_sinrs_cov(
    h: &CVec,
    w_common: &CMat,
    w_private: &[CMat],
    k: usize,
    noise: f64,
) -> (f64, f64) {
    let qf = |w: &CMat| (h.adjoint() * w * h)[(0, 0)].re.max(0.0);
    let sig_c = qf(w_common);
    let mut interference_all = 0.0;
    for w in w_private {
        interference_all += qf(w);
    }
    let sig_k = qf(&w_private[k]);
    (
        sig_c / (interference_all + noise),
        sig_k / ((interference_all - sig_k).max(0.0) + noise),
    )
}

/// Shannon rate log₂(1 + γ).
pub fn achievable_rate(gamma: f64) -> f64 {
    (1.0 + gamma).log2()
}

/// Common rate supported by every user, and feasibility of a split.
pub fn common_rate(per_user_common_rates: &[f64]) -> f64 {
    per_user_common_rates.iter().cloned().fold(f64::INFINITY, f64::min)
}

pub fn split_feasible(split: &[f64], common: f64) -> bool {
    split.iter().sum::<f64>() <= common + 1e-12
}

/// Eavesdropping rate of IU with channel g on user k's private stream,
/// with the common stream acting as noise.
pub fn eavesdrop_rate(g: &CVec, w_common: &CVec, w_k: &CVec, noise: f64) -> f64 {
    let sig = g.dotc(w_k).norm_sqr();
    let jam = g.dotc(w_common).norm_sqr();
    achievable_rate(sig / (jam + noise))
}

/// Matrix-form eavesdropping SINR.
pub fn eavesdrop_sinr_cov(g: &CVec, w_common: &CMat, w_k: &CMat, noise: f64) -> f64 {
    let qf = |w: &CMat| (g.adjoint() * w * g)[(0, 0)].re.max(0.0);
    qf(w_k) / (qf(w_common) + noise)
}

/// Per-slot secrecy sum-rate Σ_k [R_k − max_m R_{k,m}]⁺.
pub fn slot_secrecy_rate(user_rates: &[f64], eavesdrop_rates: &[Vec<f64>]) -> f64 {
    user_rates
        .iter()
        .enumerate()
        .map(|(k, &r)| {
            let worst = eavesdrop_rates[k].iter().cloned().fold(0.0, f64::max);
            (r - worst).max(0.0)
        })
        .sum()
}

/// Period-averaged value (1/T)·Σ_l t[l]·v[l].
pub fn period_average(slot_values: &[f64], durations: &[f64], period: f64) -> f64 {
    slot_values
        .iter()
        .zip(durations)
        .map(|(v, t)| v * t)
        .sum::<f64>()
        / period
}

// ---------------------------------------------------------------------------
// Sensing metrics (chi-square with 2 degrees of freedom, closed forms)
// ---------------------------------------------------------------------------

/// Likelihood-ratio threshold δ_th = (σ_r²/2)·F⁻¹(1 − P_FA) = −σ_r²·ln P_FA.
pub fn detection_threshold(p_fa: f64, processing_noise: f64) -> Result<f64, MetricsError> {
    if !(0.0 < p_fa && p_fa < 1.0) {
        return Err(MetricsError::BadProbability(p_fa));
    }
    Ok(-processing_noise * p_fa.ln())
}

/// Detection probability exp(−(δ_th/σ_r²)/(1 + p·ς)).
pub fn detection_probability(power: f64, gain: f64, threshold: f64, processing_noise: f64) -> f64 {
    (-(threshold / processing_noise) / (1.0 + power * gain)).exp()
}

/// Normalized sensing channel gain ς_m = σ_α²·|c_m ĉ_mᴴ|²/(N²·σ_r²).
pub fn normalized_sensing_gain(
    actual: &SensingChannel,
    estimated: &SensingChannel,
    n_elements: usize,
    processing_noise: f64,
) -> f64 {
    let coherent = actual.gain_against(estimated);
    actual.reflection_var * coherent * coherent
        / ((n_elements * n_elements) as f64 * processing_noise)
}

/// Smallest p·ς meeting the detection target: I_m = ln P_FA / ln P_D − 1.
pub fn required_gain_threshold(p_fa: f64, p_d: f64) -> f64 {
    p_fa.ln() / p_d.ln() - 1.0
}

// ---------------------------------------------------------------------------
// Beampattern
// ---------------------------------------------------------------------------

/// ‖Σ_i W_i[l] − R‖_F².
pub fn beampattern_residual(sum_w: &CMat, desired: &CMat) -> f64 {
    (sum_w - desired).norm_squared()
}

/// Sum of all beam covariances in one slot.
pub fn slot_covariance_sum(slot: &SlotSolution) -> CMat {
    let mut sum = slot.w_common.clone();
    for w in &slot.w_private {
        sum += w;
    }
    sum
}

/// Transmit gain aᴴ(θ,φ)·X·a(θ,φ) over a grid; linear scale, real, ≥ 0
/// for PSD X.
pub fn beampattern_gain(
    x: &CMat,
    pitch_grid: &[f64],
    azimuth_grid: &[f64],
    geom: &ArrayGeometry,
    d_f: f64,
    wavelength: f64,
) -> Vec<Vec<f64>> {
    pitch_grid
        .iter()
        .map(|&th| {
            azimuth_grid
                .iter()
                .map(|&ph| {
                    let a = upa_steering(th, ph, geom, d_f, wavelength);
                    (a.0.adjoint() * x * &a.0)[(0, 0)].re
                })
                .collect()
        })
        .collect()
}

/// Desired rank-one scan covariance R[l] = P_t·a(θ_l, φ_l)·aᴴ(θ_l, φ_l);
/// its diagonal equals P_t exactly.
pub fn desired_covariance(
    pitch: f64,
    azimuth: f64,
    per_element_power: f64,
    geom: &ArrayGeometry,
    d_f: f64,
    wavelength: f64,
) -> CMat {
    let a = upa_steering(pitch, azimuth, geom, d_f, wavelength).0;
    let n = a.len();
    let mut r = CMat::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            r[(i, j)] = per_element_power * a[i] * a[j].conj();
        }
    }
    r
}

// ---------------------------------------------------------------------------
// Link report and efficiency
// ---------------------------------------------------------------------------

/// Nominal-channel link evaluation of one slot.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SlotLink {
    pub common_sinrs: Vec<f64>,
    pub private_sinrs: Vec<f64>,
    pub common_rates: Vec<f64>,
    pub private_rates: Vec<f64>,
    /// min_k of the common rates.
    pub common_rate: f64,
    pub common_split: Vec<f64>,
    /// R_k = C_k + R_{p,k}.
    pub user_rates: Vec<f64>,
    /// eavesdrop_rates[k][m].
    pub eavesdrop_rates: Vec<Vec<f64>>,
    pub slot_secrecy: f64,
}

/// Robust (certified) per-slot values carried out of the optimizer.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RobustSlotLink {
    /// Certified rate lower bound per user (o_k).
    pub rate_lower: Vec<f64>,
    /// Certified eavesdrop-rate upper bound per user (ω_k).
    pub eavesdrop_upper: Vec<f64>,
    pub slot_secrecy: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LinkReport {
    pub per_slot: Vec<SlotLink>,
    pub robust_per_slot: Vec<RobustSlotLink>,
    /// Period secrecy sum-rate from the certified values (bps/Hz).
    pub period_secrecy: f64,
    /// Period worst-case eavesdropped sum rate (bps/Hz).
    pub period_eavesdrop: f64,
    /// Period secrecy sum-rate at the nominal channels (bps/Hz).
    pub nominal_period_secrecy: f64,
}

/// Spectral/energy efficiency summary.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct Efficiency {
    /// Secrecy spectral efficiency: the period secrecy sum-rate (bps/Hz).
    pub sse: f64,
    /// Secrecy energy efficiency (bits/J).
    pub see: f64,
    /// Eavesdropped-rate energy efficiency (bits/J).
    pub iee: f64,
    /// Denominator power (W).
    pub total_power: f64,
}

/// SSE/SEE/IEE under the declared power model: transmit power averaged
/// over the period plus a static term.
pub fn efficiency_measures(
    link: &LinkReport,
    sol: &BeamSolution,
    period: f64,
    bandwidth: f64,
    static_power: f64,
) -> Result<Efficiency, MetricsError> {
    let total_power = sol.average_power(period) + static_power;
    if total_power <= 0.0 {
        return Err(MetricsError::ZeroPower);
    }
    let sse = link.period_secrecy;
    Ok(Efficiency {
        sse,
        see: sse * bandwidth / total_power,
        iee: link.period_eavesdrop * bandwidth / total_power,
        total_power,
    })
}

/// Builds the nominal + robust link report for a solved design.
pub fn link_report(
    sol: &BeamSolution,
    lu_channels: &[CVec],
    iu_channels: &[CVec],
    noise_lu: f64,
    noise_iu: f64,
    period: f64,
) -> LinkReport {
    let n_k = lu_channels.len();
    let mut per_slot = Vec::with_capacity(sol.slots.len());
    let mut robust_per_slot = Vec::with_capacity(sol.slots.len());
    for slot in &sol.slots {
        let mut common_sinrs = Vec::with_capacity(n_k);
        let mut private_sinrs = Vec::with_capacity(n_k);
        for (k, h) in lu_channels.iter().enumerate() {
            let (gc, gp) = link_sinrs(h, &slot.v_common, &slot.v_private, k, noise_lu);
            common_sinrs.push(gc);
            private_sinrs.push(gp);
        }
        let common_rates: Vec<f64> = common_sinrs.iter().map(|&g| achievable_rate(g)).collect();
        let private_rates: Vec<f64> = private_sinrs.iter().map(|&g| achievable_rate(g)).collect();
        let rc = common_rate(&common_rates);
        let user_rates: Vec<f64> = slot
            .common_split
            .iter()
            .zip(&private_rates)
            .map(|(c, rp)| c + rp)
            .collect();
        let eav: Vec<Vec<f64>> = (0..n_k)
            .map(|k| {
                iu_channels
                    .iter()
                    .map(|g| eavesdrop_rate(g, &slot.v_common, &slot.v_private[k], noise_iu))
                    .collect()
            })
            .collect();
        let slot_secrecy = slot_secrecy_rate(&user_rates, &eav);
        per_slot.push(SlotLink {
            common_sinrs,
            private_sinrs,
            common_rates,
            private_rates,
            common_rate: rc,
            common_split: slot.common_split.clone(),
            user_rates,
            eavesdrop_rates: eav,
            slot_secrecy,
        });
        let o = slot.slacks.o.clone();
        let om = slot.slacks.omega.clone();
        let robust_secrecy: f64 = o.iter().zip(&om).map(|(a, b)| (a - b).max(0.0)).sum();
        robust_per_slot.push(RobustSlotLink {
            rate_lower: o,
            eavesdrop_upper: om,
            slot_secrecy: robust_secrecy,
        });
    }
    let durations: Vec<f64> = sol.slots.iter().map(|s| s.duration).collect();
    let robust_vals: Vec<f64> = robust_per_slot.iter().map(|r| r.slot_secrecy).collect();
    let nominal_vals: Vec<f64> = per_slot.iter().map(|s| s.slot_secrecy).collect();
    let eavesdrop_vals: Vec<f64> = robust_per_slot
        .iter()
        .map(|r| r.eavesdrop_upper.iter().map(|w| w.max(0.0)).sum())
        .collect();
    LinkReport {
        period_secrecy: period_average(&robust_vals, &durations, period),
        period_eavesdrop: period_average(&eavesdrop_vals, &durations, period),
        nominal_period_secrecy: period_average(&nominal_vals, &durations, period),
        per_slot,
        robust_per_slot,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn e_k(n: usize, k: usize) -> CVec {
        let mut v = CVec::zeros(n);
        v[k] = Complex64::new(1.0, 0.0);
        v
    }

    #[test]
    fn sinr_zero_common_beam() {
        let h = e_k(2, 0);
        let wc = CVec::zeros(2);
        let wp = vec![e_k(2, 0)];
        let (gc, _) = link_sinrs(&h, &wc, &wp, 0, 1.0);
        assert_eq!(gc, 0.0);
    }

    #[test]
    fn sinr_single_user_closed_form() {
        // K = 1, h = e₁, w₁ = √p·e₁, w_c = 0 → γ_p = p/σ²
        let p = 2.5;
        let sigma2 = 0.3;
        let h = e_k(3, 0);
        let w1 = e_k(3, 0).map(|z| z * p.sqrt());
        let (_, gp) = link_sinrs(&h, &CVec::zeros(3), &[w1], 0, sigma2);
        assert_relative_eq!(gp, p / sigma2, epsilon = 1e-12);
    }

    #[test]
    fn sinr_scales_quadratically_without_interference() {
        let h = e_k(2, 0);
        let w1 = e_k(2, 0);
        let (_, g1) = link_sinrs(&h, &CVec::zeros(2), &[w1.clone()], 0, 1.0);
        let w2 = w1.map(|z| z * 3.0);
        let (_, g2) = link_sinrs(&h, &CVec::zeros(2), &[w2], 0, 1.0);
        assert_relative_eq!(g2, 9.0 * g1, epsilon = 1e-12);
    }

    #[test]
    fn rate_reference_points() {
        assert_eq!(achievable_rate(0.0), 0.0);
        assert_relative_eq!(achievable_rate(1.0), 1.0, epsilon = 1e-15);
        assert_relative_eq!(achievable_rate(3.0), 2.0, epsilon = 1e-15);
    }

    #[test]
    fn common_rate_and_split() {
        assert_relative_eq!(common_rate(&[2.0, 3.0, 1.5]), 1.5);
        assert!(split_feasible(&[0.5, 0.5, 0.4], 1.5));
        assert!(!split_feasible(&[1.0, 1.0, 0.0], 1.5));
    }

    #[test]
    fn eavesdrop_rate_cases() {
        let g = e_k(2, 0);
        // zero beam → 0
        assert_eq!(eavesdrop_rate(&g, &CVec::zeros(2), &CVec::zeros(2), 1.0), 0.0);
        // orthogonal beam → 0
        assert_eq!(eavesdrop_rate(&g, &CVec::zeros(2), &e_k(2, 1), 1.0), 0.0);
        // |gᴴw|² = σ_v², no jamming → 1 bps/Hz
        let w = e_k(2, 0).map(|z| z * 0.7);
        assert_relative_eq!(
            eavesdrop_rate(&g, &CVec::zeros(2), &w, 0.49),
            1.0,
            epsilon = 1e-12
        );
    }

    #[test]
    fn secrecy_clamps_at_zero() {
        let v = slot_secrecy_rate(&[2.0, 1.0], &[vec![0.5], vec![1.5]]);
        assert_relative_eq!(v, 1.5, epsilon = 1e-15);
        // no eavesdropping → plain sum
        let v2 = slot_secrecy_rate(&[2.0, 1.0], &[vec![0.0], vec![0.0]]);
        assert_relative_eq!(v2, 3.0, epsilon = 1e-15);
    }

    #[test]
    fn period_average_uniform_weights() {
        let v = period_average(&[1.5, 1.5, 1.5], &[2e-3, 2e-3, 2e-3], 6e-3);
        assert_relative_eq!(v, 1.5, epsilon = 1e-12);
    }

    #[test]
    fn detection_threshold_reference_values() {
        let d = detection_threshold((-1.0f64).exp(), 1.0).unwrap();
        assert_relative_eq!(d, 1.0, epsilon = 1e-12);
        let d2 = detection_threshold(0.01, 1.0).unwrap();
        assert_relative_eq!(d2, 100.0f64.ln(), epsilon = 1e-12);
        // linear in σ_r²
        let d3 = detection_threshold(0.01, 2.5).unwrap();
        assert_relative_eq!(d3, 2.5 * d2, epsilon = 1e-12);
        assert!(detection_threshold(0.0, 1.0).is_err());
        assert!(detection_threshold(1.0, 1.0).is_err());
    }

    #[test]
    fn detection_probability_identities() {
        let p_fa = 1e-4;
        let p_d = 0.9;
        let sigma_r2 = 3.0;
        let th = detection_threshold(p_fa, sigma_r2).unwrap();
        // null case → P_FA
        assert_relative_eq!(detection_probability(0.0, 5.0, th, sigma_r2), p_fa, epsilon = 1e-15);
        // at p·ς = I_m → P_D
        let i_m = required_gain_threshold(p_fa, p_d);
        assert_relative_eq!(
            detection_probability(i_m, 1.0, th, sigma_r2),
            p_d,
            epsilon = 1e-12
        );
        // monotone in power
        let a = detection_probability(1.0, 2.0, th, sigma_r2);
        let b = detection_probability(2.0, 2.0, th, sigma_r2);
        assert!(b > a);
    }

    #[test]
    fn required_gain_reference_values() {
        assert_relative_eq!(required_gain_threshold(0.5, 0.5), 0.0, epsilon = 1e-15);
        assert_relative_eq!(
            required_gain_threshold(1e-4, 0.9),
            1e-4f64.ln() / 0.9f64.ln() - 1.0,
            epsilon = 1e-12
        );
        assert!((required_gain_threshold(1e-4, 0.9) - 86.41766).abs() < 1e-3);
    }

    #[test]
    fn beampattern_residual_cases() {
        let geom = ArrayGeometry { n_rows: 2, n_cols: 2 };
        let r = desired_covariance(0.4, 0.2, 1e-3, &geom, 0.005, 0.01);
        assert_relative_eq!(beampattern_residual(&r, &r), 0.0, epsilon = 1e-20);
        let zero = CMat::zeros(4, 4);
        assert_relative_eq!(
            beampattern_residual(&zero, &r),
            r.norm_squared(),
            epsilon = 1e-15
        );
        // diagonal of R equals P_t
        for i in 0..4 {
            assert_relative_eq!(r[(i, i)].re, 1e-3, epsilon = 1e-18);
        }
    }

    #[test]
    fn beampattern_gain_peak_and_positivity() {
        let geom = ArrayGeometry { n_rows: 3, n_cols: 3 };
        let (th0, ph0) = (0.6, 0.4);
        let pt = 2e-3;
        let r = desired_covariance(th0, ph0, pt, &geom, 0.005, 0.01);
        let pitch: Vec<f64> = (0..30).map(|i| 0.1 + i as f64 * 0.03).collect();
        let azim: Vec<f64> = (0..30).map(|i| 0.1 + i as f64 * 0.03).collect();
        let g = beampattern_gain(&r, &pitch, &azim, &geom, 0.005, 0.01);
        let mut best = (0.0f64, 0usize, 0usize);
        for (i, row) in g.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                assert!(v >= -1e-15);
                if v > best.0 {
                    best = (v, i, j);
                }
            }
        }
        // peak near (θ₀, φ₀) with value P_t·N²
        assert!((pitch[best.1] - th0).abs() < 0.031);
        assert!((azim[best.2] - ph0).abs() < 0.031);
        let a0 = upa_steering(th0, ph0, &geom, 0.005, 0.01).0;
        let exact = (a0.adjoint() * &r * &a0)[(0, 0)].re;
        assert_relative_eq!(exact, pt * 81.0, epsilon = 1e-12);
    }

    #[test]
    fn gain_surface_matches_trace_identity() {
        // mean over a grid of aᴴXa equals tr(X·G) with G the grid Gram matrix
        let geom = ArrayGeometry { n_rows: 2, n_cols: 2 };
        let x = desired_covariance(0.5, 0.3, 1.0, &geom, 0.005, 0.01);
        let pitch: Vec<f64> = (0..7).map(|i| 0.1 + 0.2 * i as f64).collect();
        let azim: Vec<f64> = (0..7).map(|i| 0.05 + 0.25 * i as f64).collect();
        let g = beampattern_gain(&x, &pitch, &azim, &geom, 0.005, 0.01);
        let mean: f64 =
            g.iter().flatten().sum::<f64>() / (pitch.len() * azim.len()) as f64;
        let mut gram = CMat::zeros(4, 4);
        for &th in &pitch {
            for &ph in &azim {
                let a = upa_steering(th, ph, &geom, 0.005, 0.01).0;
                gram += &a * a.adjoint();
            }
        }
        gram /= Complex64::new((pitch.len() * azim.len()) as f64, 0.0);
        let tr = (&x * &gram).diagonal().iter().map(|z| z.re).sum::<f64>();
        assert_relative_eq!(mean, tr, epsilon = 1e-8);
    }
}
