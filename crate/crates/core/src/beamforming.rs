//! Beamformer construction and rate evaluation: constant-modulus analog
//! precoder, unit-modulus RIS phase vector, MMSE digital precoder with power
//! normalization, per-user SINR and sum-rate.
//!
//! The effective channel is H_eff = H_r^H * diag(phi) * H * F_RF (K x N_RF)
//! and the digital stage solves the regularized least-squares system
//! F_BB = (H_eff^H H_eff + (sigma^2/P) F_RF^H F_RF)^{-1} H_eff^H, then
//! rescales so ||F_RF F_BB||_F^2 = N_s.

use crate::channel::ChannelRealization;
use crate::numerics::{Complex, ComplexMatrix, LinAlgError};
use std::f64::consts::TAU;

/// The agent's action in physical units: analog precoder phases (N_t x N_RF,
/// row-major) and RIS element phases (length M), all in [0, 2pi).
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseAction {
    pub n_t: usize,
    pub n_rf: usize,
    /// Row-major N_t x N_RF phases.
    pub analog_phases: Vec<f64>,
    pub ris_phases: Vec<f64>,
}

impl PhaseAction {
    pub fn new(n_t: usize, n_rf: usize, analog_phases: Vec<f64>, ris_phases: Vec<f64>) -> Self {
        assert_eq!(analog_phases.len(), n_t * n_rf);
        let canon = |p: &f64| p.rem_euclid(TAU);
        Self {
            n_t,
            n_rf,
            analog_phases: analog_phases.iter().map(canon).collect(),
            ris_phases: ris_phases.iter().map(canon).collect(),
        }
    }
}

/// Fully built beamformer triple for one action.
#[derive(Debug, Clone)]
pub struct BeamformerSet {
    pub f_rf: ComplexMatrix,
    pub f_bb: ComplexMatrix,
    /// Diagonal of the RIS phase matrix, unit modulus.
    pub phi: Vec<Complex>,
}

/// F_RF(i,j) = (1/sqrt(N_t)) * exp(j*theta_ij).
pub fn analog_precoder(n_t: usize, n_rf: usize, phases: &[f64]) -> ComplexMatrix {
    assert_eq!(phases.len(), n_t * n_rf);
    let modulus = 1.0 / (n_t as f64).sqrt();
    let data = phases
        .iter()
        .map(|&theta| Complex::from_polar(modulus, theta))
        .collect();
    ComplexMatrix::from_data(n_t, n_rf, data)
}

/// Unit-modulus RIS reflection coefficients (the diagonal of Phi).
pub fn ris_matrix(ris_phases: &[f64]) -> Vec<Complex> {
    ris_phases
        .iter()
        .map(|&p| Complex::from_polar(1.0, p))
        .collect()
}

/// K x N_RF effective channel: row k = h_k^H * diag(phi) * H * F_RF.
pub fn effective_channel(
    chan: &ChannelRealization,
    phi: &[Complex],
    f_rf: &ComplexMatrix,
) -> Result<ComplexMatrix, LinAlgError> {
    let m = chan.h_bs_ris.rows();
    if phi.len() != m || f_rf.rows() != chan.h_bs_ris.cols() {
        return Err(LinAlgError::DimensionMismatch {
            lhs_rows: m,
            lhs_cols: phi.len(),
            rhs_rows: f_rf.rows(),
            rhs_cols: chan.h_bs_ris.cols(),
        });
    }
    let k = chan.h_ris_user.len();
    let n_rf = f_rf.cols();
    let h = &chan.h_bs_ris;
    let mut out = ComplexMatrix::zeros(k, n_rf);
    // w = diag(phi)^H h_k applied on the left: row = (h_k^H diag(phi) H) F_RF
    for (ki, hk) in chan.h_ris_user.iter().enumerate() {
        // g = h_k^H diag(phi) H, length N_t
        let mut g = vec![Complex::new(0.0, 0.0); h.cols()];
        for i in 0..m {
            let left = hk[i].conj() * phi[i];
            for (gj, &hij) in g.iter_mut().zip(h.row_slice(i)) {
                *gj += left * hij;
            }
        }
        for j in 0..n_rf {
            let mut s = Complex::new(0.0, 0.0);
            for (i, &gi) in g.iter().enumerate() {
                s += gi * f_rf[(i, j)];
            }
            out[(ki, j)] = s;
        }
    }
    Ok(out)
}

/// MMSE digital precoder with power normalization ||F_RF F_BB||_F^2 = N_s.
pub fn mmse_digital(
    h_eff: &ComplexMatrix,
    f_rf: &ComplexMatrix,
    power: f64,
    noise_var: f64,
) -> Result<ComplexMatrix, LinAlgError> {
    let n_s = h_eff.rows(); // K = N_s
    let heff_h = h_eff.hermitian();
    let gram = heff_h.mul(h_eff)?;
    let reg = f_rf.hermitian().mul(f_rf)?.scale(Complex::new(noise_var / power, 0.0));
    let f_bb = gram.add(&reg)?.inverse()?.mul(&heff_h)?;
    let scale = (n_s as f64).sqrt() / f_rf.mul(&f_bb)?.frobenius_norm();
    Ok(f_bb.scale(Complex::new(scale, 0.0)))
}

/// Per-user SINR of Eq-style MU-MISO reception: desired power over the sum
/// of per-interferer powers plus noise.
pub fn sinr(
    chan: &ChannelRealization,
    phi: &[Complex],
    f_rf: &ComplexMatrix,
    f_bb: &ComplexMatrix,
    power: f64,
    noise_var: f64,
    k: usize,
) -> f64 {
    let h_eff = effective_channel(chan, phi, f_rf).expect("shape mismatch in sinr");
    sinr_from_heff(&h_eff, f_bb, power, noise_var, k)
}

pub(crate) fn sinr_from_heff(
    h_eff: &ComplexMatrix,
    f_bb: &ComplexMatrix,
    power: f64,
    noise_var: f64,
    k: usize,
) -> f64 {
    let gains = h_eff.mul(f_bb).expect("shape mismatch in sinr");
    let signal = gains[(k, k)].norm_sqr();
    let interference: f64 = (0..f_bb.cols())
        .filter(|&i| i != k)
        .map(|i| gains[(k, i)].norm_sqr())
        .sum();
    power * signal / (power * interference + noise_var)
}

/// Sum-rate R = sum_k log2(1 + SINR_k).
pub fn sum_rate(
    chan: &ChannelRealization,
    set: &BeamformerSet,
    power: f64,
    noise_var: f64,
) -> f64 {
    let h_eff = effective_channel(chan, &set.phi, &set.f_rf).expect("shape mismatch in sum_rate");
    sum_rate_from_heff(&h_eff, &set.f_bb, power, noise_var)
}

pub(crate) fn sum_rate_from_heff(
    h_eff: &ComplexMatrix,
    f_bb: &ComplexMatrix,
    power: f64,
    noise_var: f64,
) -> f64 {
    (0..h_eff.rows())
        .map(|k| (1.0 + sinr_from_heff(h_eff, f_bb, power, noise_var, k)).log2())
        .sum()
}

/// Build the full beamformer set from an action, closing the digital stage
/// via MMSE.
pub fn build_beamformers(
    chan: &ChannelRealization,
    action: &PhaseAction,
    power: f64,
    noise_var: f64,
) -> Result<BeamformerSet, LinAlgError> {
    let f_rf = analog_precoder(action.n_t, action.n_rf, &action.analog_phases);
    let phi = ris_matrix(&action.ris_phases);
    let h_eff = effective_channel(chan, &phi, &f_rf)?;
    let f_bb = mmse_digital(&h_eff, &f_rf, power, noise_var)?;
    Ok(BeamformerSet { f_rf, f_bb, phi })
}
