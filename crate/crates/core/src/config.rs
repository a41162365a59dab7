//! System-level configuration: scenario, node placement, radio powers,
//! antenna geometry, code parameters, fading shapes, energy model, and the
//! numeric knobs (heading order, rank tolerance, Monte Carlo defaults).
//!
//! [`SystemConfig::validate`] enforces every documented precondition and
//! names the offending field with the same dotted key the on-disk config
//! format uses, so a file error and a programmatic error read the same.

use crate::correlation::FasGeometry;
use crate::ee::EeParams;
use crate::geometry::{Placement, RadioParams, UrbanExcess};
use crate::mc::{HeadingMode, McConfig, McMode};
use crate::scalar::Real;
use crate::{Error, Result};

/// Propagation scenario selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scenario {
    /// Line-of-sight free-space links on both hops.
    Rural,
    /// Probabilistic LoS/NLoS links with excess loss and per-type fading.
    Urban,
}

/// Everything needed to evaluate the relay link at one operating point.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemConfig<F> {
    /// Which propagation scenario applies.
    pub scenario: Scenario,
    /// Node positions and the UAV orbit.
    pub placement: Placement<F>,
    /// Carrier, noise floor, and transmit powers.
    pub radio: RadioParams<F>,
    /// Urban excess-loss parameters; required when `scenario` is urban.
    pub urban: Option<UrbanExcess<F>>,
    /// Fluid antenna port count and aperture.
    pub fas: FasGeometry<F>,
    /// Information payload per packet, bits.
    pub payload_bits: u32,
    /// Channel uses per packet (blocklength).
    pub blocklength: u32,
    /// Rural Nakagami shape on hop 1.
    pub m1: u32,
    /// Rural Nakagami shape on hop 2.
    pub m2: u32,
    /// Energy model for the efficiency metric.
    pub ee: EeParams<F>,
    /// Number of heading nodes for trajectory averaging.
    pub heading_order: usize,
    /// Monte Carlo defaults used when a caller does not override them.
    pub mc: McConfig<F>,
    /// Relative eigenvalue cutoff defining the effective branch count.
    pub rank_tol: F,
}

/// Converts a power from dBm to Watts.
pub fn dbm_to_watts<F: Real>(dbm: F) -> F {
    F::of(10.0).powf((dbm - F::of(30.0)) / F::of(10.0))
}

/// Converts a power from Watts to dBm.
pub fn watts_to_dbm<F: Real>(watts: F) -> F {
    debug_assert!(watts > F::zero());
    F::of(10.0) * watts.log10() + F::of(30.0)
}

impl<F: Real> SystemConfig<F> {
    /// Rural baseline: free-space links, shape m = 7 on both hops, a
    /// two-port half-wavelength antenna, 80 payload bits in 100 channel
    /// uses, and the 2.5 GHz / -100 dBm / 10 MHz radio with the UAV at
    /// 100 m altitude on a 50 m orbit.
    pub fn rural_preset() -> Self {
        SystemConfig {
            scenario: Scenario::Rural,
            placement: Placement {
                bs: [F::of(1000.0), F::zero(), F::of(40.0)],
                ue: [F::of(-1000.0), F::of(1000.0), F::zero()],
                uav_radius: F::of(50.0),
                uav_altitude: F::of(100.0),
            },
            radio: RadioParams {
                carrier_freq_hz: F::of(2.5e9),
                noise_power_w: dbm_to_watts(F::of(-100.0)),
                p1_w: dbm_to_watts(F::of(10.0)),
                p2_w: dbm_to_watts(F::of(10.0)),
            },
            urban: None,
            fas: FasGeometry { n_ports: 2, aperture: F::of(0.5) },
            payload_bits: 80,
            blocklength: 100,
            m1: 7,
            m2: 7,
            ee: EeParams {
                p_c_w: dbm_to_watts(F::of(5.0)),
                p_sw_w: dbm_to_watts(F::zero()),
                tau_p_s: F::of(2e-6),
                w_band_hz: F::of(1e7),
                payload_bits: 80,
            },
            heading_order: 64,
            mc: McConfig {
                trials: 1_000_000,
                seed: 1,
                mode: McMode::AnalyticalModel,
                headings: HeadingMode::UniformRandom,
            },
            rank_tol: F::of(1e-9),
        }
    }

    /// Urban baseline: the rural radio moved to the 100 m-scale city
    /// geometry, 40 dBm on hop 1, excess losses of 1.6 dB (LoS) and 23 dB
    /// (NLoS), LoS-probability constants a = 12.08 and b = 0.11 per
    /// degree, and shapes m = 5 (LoS) / m = 1 (NLoS) on both hops.
    pub fn urban_preset() -> Self {
        let mut cfg = Self::rural_preset();
        cfg.scenario = Scenario::Urban;
        cfg.placement.bs = [F::of(100.0), F::zero(), F::of(40.0)];
        cfg.placement.ue = [F::of(-100.0), F::of(100.0), F::zero()];
        cfg.radio.p1_w = dbm_to_watts(F::of(40.0));
        cfg.urban = Some(UrbanExcess {
            eta_los_db: F::of(1.6),
            eta_nlos_db: F::of(23.0),
            a: F::of(12.08),
            b: F::of(0.11),
            m_los: 5,
            m_nlos: 1,
        });
        cfg.m1 = 5;
        cfg.m2 = 5;
        cfg
    }

    /// Checks every precondition, reporting the first violation by its
    /// dotted config key.
    pub fn validate(&self) -> Result<()> {
        let fail = |key: &str, why: &str| -> Result<()> {
            Err(Error::InvalidConfig(format!("{key}: {why}")))
        };
        for (i, v) in self.placement.bs.iter().enumerate() {
            if !v.is_finite() {
                return fail(&format!("placement.bs_{}", ["x", "y", "z"][i]), "must be finite");
            }
        }
        for (i, v) in self.placement.ue.iter().enumerate() {
            if !v.is_finite() {
                return fail(&format!("placement.ue_{}", ["x", "y", "z"][i]), "must be finite");
            }
        }
        if !(self.placement.uav_radius >= F::zero()) || !self.placement.uav_radius.is_finite() {
            return fail("placement.uav_radius", "must be a finite non-negative length");
        }
        if !(self.placement.uav_altitude > F::zero()) {
            return fail("placement.uav_altitude", "must be a positive altitude");
        }
        for (key, node) in [("base station", self.placement.bs), ("user", self.placement.ue)] {
            let ground = (node[0] * node[0] + node[1] * node[1]).sqrt();
            if (node[2] - self.placement.uav_altitude).abs() < F::of(1e-9)
                && (ground - self.placement.uav_radius).abs() < F::of(1e-9)
            {
                return fail("placement", &format!("the UAV orbit passes through the {key}"));
            }
        }
        if !(self.radio.carrier_freq_hz > F::zero()) {
            return fail("radio.carrier_freq_hz", "must be a positive frequency");
        }
        if !(self.radio.noise_power_w > F::zero()) {
            return fail("radio.noise_power", "must be a positive power");
        }
        if !(self.radio.p1_w > F::zero()) {
            return fail("radio.p1", "must be a positive power");
        }
        if !(self.radio.p2_w > F::zero()) {
            return fail("radio.p2", "must be a positive power");
        }
        if self.fas.n_ports < 1 {
            return fail("fas.n_ports", "needs at least one port");
        }
        if self.fas.n_ports as usize > crate::correlation::MAX_PORTS {
            return fail("fas.n_ports", "exceeds the supported port count");
        }
        if !(self.fas.aperture > F::zero()) {
            return fail("fas.aperture", "must be a positive aperture");
        }
        if self.payload_bits == 0 {
            return fail("fbl.payload_bits", "must be at least one bit");
        }
        if self.blocklength == 0 {
            return fail("fbl.blocklength", "must be at least one channel use");
        }
        if self.m1 == 0 {
            return fail("nakagami.m1", "must be a positive integer shape");
        }
        if self.m2 == 0 {
            return fail("nakagami.m2", "must be a positive integer shape");
        }
        match (self.scenario, &self.urban) {
            (Scenario::Urban, None) => {
                return fail("urban", "the urban scenario requires the urban parameter block");
            }
            (_, Some(urban)) => {
                if !(urban.a > F::zero()) {
                    return fail("urban.a", "must be positive");
                }
                if !(urban.b > F::zero()) {
                    return fail("urban.b", "must be positive");
                }
                if !(urban.eta_los_db >= F::zero()) {
                    return fail("urban.eta_los_db", "must be a non-negative loss");
                }
                if !(urban.eta_nlos_db >= F::zero()) {
                    return fail("urban.eta_nlos_db", "must be a non-negative loss");
                }
                if urban.m_los == 0 {
                    return fail("urban.m_los", "must be a positive integer shape");
                }
                if urban.m_nlos == 0 {
                    return fail("urban.m_nlos", "must be a positive integer shape");
                }
            }
            (Scenario::Rural, None) => {}
        }
        if !(self.ee.p_c_w > F::zero()) {
            return fail("ee.p_c", "must be a positive power");
        }
        if !(self.ee.p_sw_w >= F::zero()) {
            return fail("ee.p_sw", "must be a non-negative power");
        }
        if !(self.ee.tau_p_s > F::zero()) {
            return fail("ee.tau_p", "must be a positive duration");
        }
        if !(self.ee.w_band_hz > F::zero()) {
            return fail("ee.w_band", "must be a positive bandwidth");
        }
        if self.ee.payload_bits != self.payload_bits {
            return fail("ee.payload_bits", "must match fbl.payload_bits");
        }
        if self.heading_order == 0 {
            return fail("quadrature.heading_order", "needs at least one heading node");
        }
        if self.mc.trials == 0 {
            return fail("mc.trials", "needs at least one trial");
        }
        if !(self.rank_tol > F::zero() && self.rank_tol < F::one()) {
            return fail("correlation.rank_tol", "must lie strictly between 0 and 1");
        }
        Ok(())
    }
}
