//! End-to-end evaluation pipeline: resolves link budgets per heading,
//! applies the per-hop closed forms (with the quadrature fallback past the
//! subset cap), mixes the urban link types, combines the hops, and
//! averages over the UAV trajectory.
//!
//! The grid evaluators at the bottom present the whole pipeline as a
//! single (blocklength, altitude, ports, power) → BLER function for the
//! energy-efficiency searches, with an optional memoization layer keyed at
//! 0.001 dB power resolution.

use std::collections::HashMap;
use std::sync::Mutex;

use crate::bler::{
    end_to_end_bler, hop1_bler, hop2_bler_asymptotic, hop2_bler_closed, hop2_bler_quadrature,
    subset_expansion, urban_hop_mixture, GammaHopModel, SUBSET_CAP,
};
use crate::config::{watts_to_dbm, SystemConfig};
use crate::correlation::CorrelationModel;
use crate::fbl::{derive_fbl, FblParams};
use crate::geometry::{link_budget, ScenarioBudget};
use crate::quadrature::TrajectoryRule;
use crate::scalar::Real;

/// Per-hop average BLERs at one heading (urban values are already mixed
/// over the link types).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HopBlers<F> {
    pub hop1: F,
    pub hop2: F,
}

fn hop1_eps<F: Real>(fbl: &FblParams<F>, m: u32, gamma1_bar: F) -> F {
    let vartheta = F::of_usize(m as usize) / gamma1_bar;
    hop1_bler(fbl, &GammaHopModel { m, vartheta })
}

/// Hop-2 average BLER for one link type: closed form within the subset
/// cap, direct quadrature beyond it.
fn hop2_eps<F: Real>(fbl: &FblParams<F>, m: u32, gamma2_bar: F, corr: &CorrelationModel<F>) -> F {
    let lambdas = &corr.eigenvalues[..corr.n_eff];
    let vartheta2 = F::of_usize(m as usize) * corr.lambda_sum / gamma2_bar;
    if corr.n_eff <= SUBSET_CAP {
        let expansion =
            subset_expansion(m, vartheta2, lambdas).expect("branch count is within the cap");
        hop2_bler_closed(fbl, &expansion)
    } else {
        hop2_bler_quadrature(fbl, m, vartheta2, lambdas)
    }
}

/// Average BLER of each hop at heading `theta`.
pub fn hop_blers_at<F: Real>(
    cfg: &SystemConfig<F>,
    corr: &CorrelationModel<F>,
    fbl: &FblParams<F>,
    theta: F,
) -> HopBlers<F> {
    let budget = link_budget(cfg, corr, theta)
        .expect("validated configuration keeps the UAV clear of both endpoints");
    match budget {
        ScenarioBudget::Rural(b) => HopBlers {
            hop1: hop1_eps(fbl, cfg.m1, b.gamma1_bar),
            hop2: hop2_eps(fbl, cfg.m2, b.gamma2_bar, corr),
        },
        ScenarioBudget::Urban { los, nlos } => {
            let urban = cfg.urban.as_ref().expect("urban scenario carries urban parameters");
            let hop1 = urban_hop_mixture(
                hop1_eps(fbl, urban.m_los, los.gamma1_bar),
                hop1_eps(fbl, urban.m_nlos, nlos.gamma1_bar),
                los.p_los_1,
            );
            let hop2 = urban_hop_mixture(
                hop2_eps(fbl, urban.m_los, los.gamma2_bar, corr),
                hop2_eps(fbl, urban.m_nlos, nlos.gamma2_bar, corr),
                los.p_los_2,
            );
            HopBlers { hop1, hop2 }
        }
    }
}

/// End-to-end average BLER at heading `theta`.
pub fn end_to_end_at<F: Real>(
    cfg: &SystemConfig<F>,
    corr: &CorrelationModel<F>,
    fbl: &FblParams<F>,
    theta: F,
) -> F {
    let hops = hop_blers_at(cfg, corr, fbl, theta);
    end_to_end_bler(hops.hop1, hops.hop2)
}

/// End-to-end average BLER like [`end_to_end_at`], but with the hop-2
/// closed form replaced by its high-SNR asymptote. Useful for sweeps that
/// visualize the diversity slope; hop 1 stays exact, so the curve floors
/// at the first hop's error rate.
pub fn end_to_end_asymptotic_at<F: Real>(
    cfg: &SystemConfig<F>,
    corr: &CorrelationModel<F>,
    fbl: &FblParams<F>,
    theta: F,
) -> F {
    let budget = link_budget(cfg, corr, theta)
        .expect("validated configuration keeps the UAV clear of both endpoints");
    let lambdas = &corr.eigenvalues[..corr.n_eff];
    let asym = |m: u32, gamma2_bar: F| {
        let vartheta2 = F::of_usize(m as usize) * corr.lambda_sum / gamma2_bar;
        hop2_bler_asymptotic(fbl, m, vartheta2, lambdas)
    };
    let (hop1, hop2) = match budget {
        ScenarioBudget::Rural(b) => {
            (hop1_eps(fbl, cfg.m1, b.gamma1_bar), asym(cfg.m2, b.gamma2_bar))
        }
        ScenarioBudget::Urban { los, nlos } => {
            let urban = cfg.urban.as_ref().expect("urban scenario carries urban parameters");
            (
                urban_hop_mixture(
                    hop1_eps(fbl, urban.m_los, los.gamma1_bar),
                    hop1_eps(fbl, urban.m_nlos, nlos.gamma1_bar),
                    los.p_los_1,
                ),
                urban_hop_mixture(
                    asym(urban.m_los, los.gamma2_bar),
                    asym(urban.m_nlos, nlos.gamma2_bar),
                    los.p_los_2,
                ),
            )
        }
    };
    end_to_end_bler(hop1, hop2)
}

/// Trajectory-averaged end-to-end BLER using the configured heading order.
pub fn averaged_end_to_end<F: Real>(
    cfg: &SystemConfig<F>,
    corr: &CorrelationModel<F>,
    fbl: &FblParams<F>,
) -> F {
    TrajectoryRule::new(cfg.heading_order).average(|theta| end_to_end_at(cfg, corr, fbl, theta))
}

/// Trajectory-averaged end-to-end BLER under the verbatim printed heading
/// rule; diagnostic only, not a consistent average.
pub fn averaged_end_to_end_literal<F: Real>(
    cfg: &SystemConfig<F>,
    corr: &CorrelationModel<F>,
    fbl: &FblParams<F>,
) -> F {
    TrajectoryRule::new(cfg.heading_order)
        .average_paper_literal(|theta| end_to_end_at(cfg, corr, fbl, theta))
}

/// Trajectory-averaged asymptotic end-to-end BLER.
pub fn averaged_asymptotic<F: Real>(
    cfg: &SystemConfig<F>,
    corr: &CorrelationModel<F>,
    fbl: &FblParams<F>,
) -> F {
    TrajectoryRule::new(cfg.heading_order)
        .average(|theta| end_to_end_asymptotic_at(cfg, corr, fbl, theta))
}

/// High-power limit of the end-to-end BLER: the trajectory average of the
/// first hop alone. No amount of UAV transmit power or antenna diversity
/// moves the link below this floor.
pub fn error_floor<F: Real>(cfg: &SystemConfig<F>, fbl: &FblParams<F>) -> F {
    // The hop-1 budget does not involve the antenna correlation, so a
    // single-port model resolves the budgets.
    let corr = CorrelationModel::from_geometry(
        &crate::correlation::FasGeometry { n_ports: 1, aperture: F::of(0.5) },
        cfg.rank_tol,
    )
    .expect("the single-port model always decomposes");
    TrajectoryRule::new(cfg.heading_order).average(|theta| {
        let budget = link_budget(cfg, &corr, theta)
            .expect("validated configuration keeps the UAV clear of both endpoints");
        match budget {
            ScenarioBudget::Rural(b) => hop1_eps(fbl, cfg.m1, b.gamma1_bar),
            ScenarioBudget::Urban { los, nlos } => {
                let urban = cfg.urban.as_ref().expect("urban scenario carries urban parameters");
                urban_hop_mixture(
                    hop1_eps(fbl, urban.m_los, los.gamma1_bar),
                    hop1_eps(fbl, urban.m_nlos, nlos.gamma1_bar),
                    los.p_los_1,
                )
            }
        }
    })
}

/// The pipeline as a function of hop-2 transmit power alone, for power
/// sweeps and bisection at fixed geometry.
pub fn power_evaluator<'a, F: Real>(
    cfg: &'a SystemConfig<F>,
    corr: &'a CorrelationModel<F>,
    fbl: &'a FblParams<F>,
) -> impl Fn(F) -> F + Sync + 'a {
    move |p2_w: F| {
        let mut local = cfg.clone();
        local.radio.p2_w = p2_w;
        averaged_end_to_end(&local, corr, fbl)
    }
}

/// The pipeline as a (blocklength, altitude, ports, power) → average BLER
/// function for the optimizer searches. Each call re-derives the code
/// parameters and the correlation model for the requested operating point.
pub fn grid_evaluator<F: Real>(
    cfg: &SystemConfig<F>,
) -> impl Fn(u32, F, u32, F) -> F + Sync + '_ {
    move |blocklength: u32, altitude: F, n_ports: u32, p2_w: F| {
        let mut local = cfg.clone();
        local.blocklength = blocklength;
        local.placement.uav_altitude = altitude;
        local.fas.n_ports = n_ports;
        local.radio.p2_w = p2_w;
        let corr = CorrelationModel::from_geometry(&local.fas, local.rank_tol)
            .expect("the Jakes model of a positive aperture decomposes");
        let fbl = derive_fbl(local.payload_bits, local.blocklength)
            .expect("grid blocklengths are positive");
        averaged_end_to_end(&local, &corr, &fbl)
    }
}

/// Memoizing wrapper around [`grid_evaluator`]. Keys quantize the power to
/// 0.001 dB, three orders finer than the bisection tolerance, so distinct
/// search probes never collide while repeated probes (across nested scans)
/// hit the cache.
pub fn cached_grid_evaluator<F: Real>(
    cfg: &SystemConfig<F>,
) -> impl Fn(u32, F, u32, F) -> F + Sync + '_ {
    let inner = grid_evaluator(cfg);
    let cache: Mutex<HashMap<(u32, u64, u32, i64), F>> = Mutex::new(HashMap::new());
    move |blocklength: u32, altitude: F, n_ports: u32, p2_w: F| {
        let milli_db = (watts_to_dbm(p2_w).as_f64() * 1000.0).round() as i64;
        let key = (blocklength, altitude.as_f64().to_bits(), n_ports, milli_db);
        if let Some(&hit) = cache.lock().expect("cache lock").get(&key) {
            return hit;
        }
        let value = inner(blocklength, altitude, n_ports, p2_w);
        cache.lock().expect("cache lock").insert(key, value);
        value
    }
}
