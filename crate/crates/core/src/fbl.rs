//! Finite-blocklength link layer: the normal-approximation block error
//! rate for short packets and its piecewise-linear surrogate.
//!
//! A packet of `b` information bits in `l` channel uses has rate
//! R = b/l. At SNR γ the normal approximation gives
//! ε(γ) = Q((C(γ) - R) / sqrt(Z(γ)/l)) with capacity C = log2(1+γ) and
//! dispersion Z = (1 - (1+γ)^-2)·(log2 e)². Averaging that Q-form over
//! fading has no closed form, so the analysis replaces it with a piecewise
//! linear surrogate that is 1 below ρ_L, falls linearly with slope χ
//! through the decoding threshold τ = 2^R - 1, and is 0 above ρ_H. The
//! surrogate's defining constants live in [`FblParams`].

use crate::scalar::Real;
use crate::special::gaussian_q;
use crate::{Error, Result};

/// Code parameters and the derived surrogate constants for one
/// (payload, blocklength) pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FblParams<F> {
    /// Payload size in information bits.
    pub payload_bits: u32,
    /// Blocklength in channel uses.
    pub blocklength: u32,
    /// Code rate, bits per channel use.
    pub rate: F,
    /// Decoding SNR threshold 2^R - 1.
    pub tau: F,
    /// Surrogate slope 1 / sqrt(2π(2^R - 1)/L).
    pub chi: F,
    /// Lower edge of the linear window, max(τ - 1/(2χ), 0).
    pub rho_l: F,
    /// Upper edge of the linear window, τ + 1/(2χ).
    pub rho_h: F,
}

/// Derives the surrogate constants for a payload of `payload_bits` bits in
/// `blocklength` channel uses.
///
/// The normal approximation itself is only trustworthy from roughly 100
/// channel uses upward, so shorter blocklengths are accepted but logged as
/// a validity warning.
pub fn derive_fbl<F: Real>(payload_bits: u32, blocklength: u32) -> Result<FblParams<F>> {
    if payload_bits == 0 {
        return Err(Error::InvalidInput("payload_bits must be positive".into()));
    }
    if blocklength == 0 {
        return Err(Error::InvalidInput("blocklength must be positive".into()));
    }
    if blocklength < 100 {
        log::warn!(
            "blocklength {blocklength} is below 100 channel uses; \
             the normal approximation degrades at this scale"
        );
    }
    let l = F::of(f64::from(blocklength));
    let rate = F::of(f64::from(payload_bits)) / l;
    let tau = F::of(2.0).powf(rate) - F::one();
    let chi = F::one() / (F::of(2.0) * F::PI() * tau / l).sqrt();
    let half_width = F::one() / (F::of(2.0) * chi);
    let rho_l = (tau - half_width).max(F::zero());
    let rho_h = tau + half_width;
    Ok(FblParams { payload_bits, blocklength, rate, tau, chi, rho_l, rho_h })
}

/// Exact normal-approximation BLER at SNR `gamma`.
///
/// At γ = 0 the dispersion vanishes; the limit of the Q argument is -∞ for
/// any positive rate, so the error probability is 1 there and for any
/// non-positive γ.
pub fn instantaneous_bler<F: Real>(gamma: F, fbl: &FblParams<F>) -> F {
    if gamma <= F::zero() {
        return F::one();
    }
    let log2_e = F::LOG2_E();
    let capacity = (F::one() + gamma).log2();
    let one_plus = F::one() + gamma;
    let dispersion = (F::one() - F::one() / (one_plus * one_plus)) * log2_e * log2_e;
    if dispersion <= F::zero() {
        return F::one();
    }
    let l = F::of(f64::from(fbl.blocklength));
    let arg = (capacity - fbl.rate) / (dispersion / l).sqrt();
    gaussian_q(arg)
}

/// Piecewise-linear surrogate BLER at SNR `gamma`: 1 below the window,
/// 1/2 - χ(γ - τ) inside it, 0 above.
pub fn piecewise_bler<F: Real>(gamma: F, fbl: &FblParams<F>) -> F {
    if gamma <= fbl.rho_l {
        F::one()
    } else if gamma < fbl.rho_h {
        // Clamp because a clamped rho_l shifts the window off the linear
        // segment's natural [0, 1] range on its lower side.
        (F::of(0.5) - fbl.chi * (gamma - fbl.tau)).max(F::zero()).min(F::one())
    } else {
        F::zero()
    }
}
