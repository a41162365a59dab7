//! Deployment geometry and radio link budgets: UAV/BS/UE positions, slant
//! ranges, free-space and urban-excess path loss, elevation angles, the
//! elevation-driven LoS probability, and per-hop average SNRs.
//!
//! The UAV circles the point above the user at radius r and altitude Z_U;
//! its position at heading theta is (r cos θ, r sin θ, Z_U). Hop 1 runs
//! from the base station to the UAV, hop 2 from the UAV down to the fluid
//! antenna user.

use crate::config::{Scenario, SystemConfig};
use crate::correlation::CorrelationModel;
use crate::scalar::Real;
use crate::{Error, Result};

/// Speed of light in vacuum, meters per second.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Positions of the fixed nodes and the UAV orbit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Placement<F> {
    /// Base station coordinates (x, y, z), meters.
    pub bs: [F; 3],
    /// User equipment coordinates (x, y, z), meters.
    pub ue: [F; 3],
    /// Orbit radius around the vertical axis through the origin, meters.
    pub uav_radius: F,
    /// Orbit altitude, meters.
    pub uav_altitude: F,
}

impl<F: Real> Placement<F> {
    /// UAV position at heading `theta` along the circular orbit.
    pub fn uav_position(&self, theta: F) -> [F; 3] {
        [
            self.uav_radius * theta.cos(),
            self.uav_radius * theta.sin(),
            self.uav_altitude,
        ]
    }
}

/// Transmit powers and noise floor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadioParams<F> {
    /// Carrier frequency, Hz.
    pub carrier_freq_hz: F,
    /// Noise power at the receivers, Watts.
    pub noise_power_w: F,
    /// Base station transmit power (hop 1), Watts.
    pub p1_w: F,
    /// UAV transmit power (hop 2), Watts.
    pub p2_w: F,
}

/// Urban-scenario excess loss and per-link-type fading shapes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UrbanExcess<F> {
    /// Excess path loss on LoS links, dB.
    pub eta_los_db: F,
    /// Excess path loss on NLoS links, dB.
    pub eta_nlos_db: F,
    /// Environment constant of the LoS-probability sigmoid.
    pub a: F,
    /// Environment slope of the LoS-probability sigmoid, per degree.
    pub b: F,
    /// Nakagami shape on LoS links (both hops).
    pub m_los: u32,
    /// Nakagami shape on NLoS links (both hops).
    pub m_nlos: u32,
}

/// Which hop of the relay path an operation refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Hop {
    /// Base station to UAV.
    First,
    /// UAV to user.
    Second,
}

/// Average SNRs of the two hops with the LoS probabilities they were
/// computed under. Rural budgets fix both probabilities to 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkBudget<F> {
    /// Hop-1 average SNR, unitless.
    pub gamma1_bar: F,
    /// Hop-2 average SNR, unitless (includes the eigenvalue mass Σλ).
    pub gamma2_bar: F,
    /// Probability that hop 1 is line-of-sight at this heading.
    pub p_los_1: F,
    /// Probability that hop 2 is line-of-sight at this heading.
    pub p_los_2: F,
}

/// Link budgets for one heading: one budget in the rural scenario, one per
/// link type in the urban scenario.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ScenarioBudget<F> {
    /// Single LoS budget.
    Rural(LinkBudget<F>),
    /// Budgets conditioned on the link type; both carry the same LoS
    /// probabilities.
    Urban {
        los: LinkBudget<F>,
        nlos: LinkBudget<F>,
    },
}

/// Euclidean distances from the UAV at heading `theta` to the base station
/// (hop 1) and the user (hop 2).
pub fn slant_ranges<F: Real>(placement: &Placement<F>, theta: F) -> Result<(F, F)> {
    let uav = placement.uav_position(theta);
    let d1 = distance(&uav, &placement.bs);
    if d1 <= F::zero() {
        return Err(Error::CoincidentNodes { hop: 1 });
    }
    let d2 = distance(&uav, &placement.ue);
    if d2 <= F::zero() {
        return Err(Error::CoincidentNodes { hop: 2 });
    }
    Ok((d1, d2))
}

fn distance<F: Real>(a: &[F; 3], b: &[F; 3]) -> F {
    let dx = a[0] - b[0];
    let dy = a[1] - b[1];
    let dz = a[2] - b[2];
    (dx * dx + dy * dy + dz * dz).sqrt()
}

/// Free-space channel power gain β = (c / 4π f_c d)². Path loss in dB is
/// -10 log10 β.
pub fn fspl_beta<F: Real>(carrier_freq_hz: F, d: F) -> F {
    debug_assert!(d > F::zero(), "path loss needs a positive distance");
    let wave = F::of(SPEED_OF_LIGHT) / (F::of(4.0) * F::PI() * carrier_freq_hz * d);
    wave * wave
}

/// Free-space gain reduced by an excess loss of `eta_db` decibels.
pub fn urban_beta<F: Real>(carrier_freq_hz: F, d: F, eta_db: F) -> F {
    fspl_beta(carrier_freq_hz, d) * F::of(10.0).powf(-eta_db / F::of(10.0))
}

/// Elevation angle of the UAV as seen from the given hop's ground node,
/// in degrees within [-90, 90].
pub fn elevation_deg<F: Real>(placement: &Placement<F>, theta: F, hop: Hop) -> Result<F> {
    let (d1, d2) = slant_ranges(placement, theta)?;
    let (node_z, d) = match hop {
        Hop::First => (placement.bs[2], d1),
        Hop::Second => (placement.ue[2], d2),
    };
    let ratio = ((placement.uav_altitude - node_z) / d).max(-F::one()).min(F::one());
    Ok(ratio.asin().to_degrees())
}

/// Probability of a line-of-sight link at elevation `phi_deg` degrees:
/// 1 / (1 + a·exp(-b(φ - a))).
pub fn los_probability<F: Real>(phi_deg: F, a: F, b: F) -> F {
    debug_assert!(a > F::zero() && b > F::zero());
    F::one() / (F::one() + a * (-b * (phi_deg - a)).exp())
}

/// Average-SNR budgets for both hops at heading `theta`.
///
/// Hop 1 sees a single antenna: γ̄₁ = P₁β₁/σ². Hop 2 aggregates the fluid
/// antenna's effective branches: γ̄₂ = P₂β₂Σλ/σ² with Σλ over the
/// effective eigenvalues. In the urban scenario each hop gets one budget
/// per link type (the excess loss differs), plus the elevation-dependent
/// LoS probabilities.
pub fn link_budget<F: Real>(
    config: &SystemConfig<F>,
    corr: &CorrelationModel<F>,
    theta: F,
) -> Result<ScenarioBudget<F>> {
    let (d1, d2) = slant_ranges(&config.placement, theta)?;
    let radio = &config.radio;
    let noise = radio.noise_power_w;
    let lambda_sum = corr.lambda_sum;
    match config.scenario {
        Scenario::Rural => {
            let beta1 = fspl_beta(radio.carrier_freq_hz, d1);
            let beta2 = fspl_beta(radio.carrier_freq_hz, d2);
            Ok(ScenarioBudget::Rural(LinkBudget {
                gamma1_bar: radio.p1_w * beta1 / noise,
                gamma2_bar: radio.p2_w * beta2 * lambda_sum / noise,
                p_los_1: F::one(),
                p_los_2: F::one(),
            }))
        }
        Scenario::Urban => {
            let urban = config
                .urban
                .as_ref()
                .ok_or_else(|| Error::InvalidConfig("urban scenario requires urban parameters".into()))?;
            let phi1 = elevation_deg(&config.placement, theta, Hop::First)?;
            let phi2 = elevation_deg(&config.placement, theta, Hop::Second)?;
            let p_los_1 = los_probability(phi1, urban.a, urban.b);
            let p_los_2 = los_probability(phi2, urban.a, urban.b);
            let budget_for = |eta_db: F| LinkBudget {
                gamma1_bar: radio.p1_w * urban_beta(radio.carrier_freq_hz, d1, eta_db) / noise,
                gamma2_bar: radio.p2_w * urban_beta(radio.carrier_freq_hz, d2, eta_db) * lambda_sum
                    / noise,
                p_los_1,
                p_los_2,
            };
            Ok(ScenarioBudget::Urban {
                los: budget_for(urban.eta_los_db),
                nlos: budget_for(urban.eta_nlos_db),
            })
        }
    }
}
