//! Energy efficiency of the relay link and its maximization over transmit
//! power, port count, UAV altitude, and blocklength.
//!
//! A packet of B payload bits occupies L/W_band seconds of airtime, of
//! which N·τ_p seconds go to port switching. The energy spent is the UAV's
//! transmit energy over the non-switching time plus static and switching
//! energy; efficiency is delivered bits per Joule. The reliability
//! constraint (average BLER at or below a threshold) is enforced through
//! the minimum transmit power found by bisection in the dB domain, and the
//! outer searches are exhaustive scans over their grids.
//!
//! The searches talk to the link model only through a `pipeline` closure
//! mapping (blocklength, altitude, ports, power) to average BLER, so they
//! are testable against synthetic links with known optima.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::config::{dbm_to_watts, watts_to_dbm};
use crate::scalar::Real;
use crate::{Error, Result};

/// Energy model of the UAV relay.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EeParams<F> {
    /// Static circuit power, Watts.
    pub p_c_w: F,
    /// Port switching power, Watts.
    pub p_sw_w: F,
    /// Per-port processing (switching) time, seconds.
    pub tau_p_s: F,
    /// Bandwidth, Hz; one channel use occupies 1/w_band seconds.
    pub w_band_hz: F,
    /// Information payload per packet, bits.
    pub payload_bits: u32,
}

/// Grids and tolerances for the optimization searches.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchSpace<F> {
    /// Smallest transmit power considered, Watts.
    pub p_min_w: F,
    /// Largest transmit power available, Watts.
    pub p_max_w: F,
    /// Altitude grid: z_min..=z_max in steps of z_step, meters.
    pub z_min: F,
    pub z_max: F,
    pub z_step: F,
    /// Blocklength grid: l_min..=l_max in steps of l_step, channel uses.
    pub l_min: u32,
    pub l_max: u32,
    pub l_step: u32,
    /// Port-count grid: n_min..=n_max.
    pub n_min: u32,
    pub n_max: u32,
    /// Reliability threshold on the average BLER.
    pub eps_th: F,
    /// Bisection termination width, dB.
    pub delta_db: F,
}

impl<F: Real> SearchSpace<F> {
    /// Default grids: -30..40 dBm power bracket, altitudes 100..800 m in
    /// 25 m steps, blocklengths 100..500 in steps of 50, 1..8 ports,
    /// BLER threshold 1e-3, and 0.01 dB bisection resolution.
    pub fn preset() -> Self {
        SearchSpace {
            p_min_w: dbm_to_watts(F::of(-30.0)),
            p_max_w: dbm_to_watts(F::of(40.0)),
            z_min: F::of(100.0),
            z_max: F::of(800.0),
            z_step: F::of(25.0),
            l_min: 100,
            l_max: 500,
            l_step: 50,
            n_min: 1,
            n_max: 8,
            eps_th: F::of(1e-3),
            delta_db: F::of(0.01),
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.p_min_w > F::zero() && self.p_max_w > self.p_min_w) {
            return Err(Error::InvalidInput("power bracket must satisfy 0 < p_min < p_max".into()));
        }
        if !(self.z_step > F::zero() && self.z_max >= self.z_min && self.z_min > F::zero()) {
            return Err(Error::InvalidInput("altitude grid is empty or inverted".into()));
        }
        if self.l_step == 0 || self.l_max < self.l_min || self.l_min == 0 {
            return Err(Error::InvalidInput("blocklength grid is empty or inverted".into()));
        }
        if self.n_min == 0 || self.n_max < self.n_min {
            return Err(Error::InvalidInput("port grid is empty or inverted".into()));
        }
        if !(self.eps_th > F::zero() && self.eps_th <= F::one()) {
            return Err(Error::InvalidInput("the BLER threshold must lie in (0, 1]".into()));
        }
        if !(self.delta_db > F::zero()) {
            return Err(Error::InvalidInput("the bisection tolerance must be positive".into()));
        }
        Ok(())
    }

    /// Altitude grid points, ascending.
    pub fn altitude_grid(&self) -> Vec<F> {
        let mut out = Vec::new();
        let mut z = self.z_min;
        // A half-step slack keeps the endpoint in despite roundoff.
        while z <= self.z_max + self.z_step * F::of(0.5) {
            out.push(z.min(self.z_max));
            z = z + self.z_step;
        }
        out
    }

    /// Blocklength grid points, ascending.
    pub fn blocklength_grid(&self) -> Vec<u32> {
        (self.l_min..=self.l_max).step_by(self.l_step as usize).collect()
    }
}

/// Whether N ports can be switched within the slot: N·τ_p < L/W_band,
/// with a relative guard of 1e-12 so an exact boundary (equality in real
/// arithmetic) is excluded regardless of rounding direction.
pub fn causality_ok<F: Real>(n_ports: u32, blocklength: u32, params: &EeParams<F>) -> bool {
    let switching = F::of_usize(n_ports as usize) * params.tau_p_s;
    let slot = F::of_usize(blocklength as usize) / params.w_band_hz;
    switching < slot * (F::one() - F::of(1e-12))
}

/// Delivered bits per Joule:
/// B(1-bler) / [p₂(L/W - Nτ_p) + p_c·L/W + p_sw·Nτ_p].
pub fn energy_efficiency<F: Real>(
    bler: F,
    p2_w: F,
    n_ports: u32,
    blocklength: u32,
    params: &EeParams<F>,
) -> Result<F> {
    if !causality_ok(n_ports, blocklength, params) {
        return Err(Error::CausalityViolated { n_ports, blocklength });
    }
    debug_assert!(bler >= F::zero() && bler <= F::one());
    debug_assert!(p2_w > F::zero());
    let slot = F::of_usize(blocklength as usize) / params.w_band_hz;
    let switching = F::of_usize(n_ports as usize) * params.tau_p_s;
    let energy =
        p2_w * (slot - switching) + params.p_c_w * slot + params.p_sw_w * switching;
    Ok(F::of_usize(params.payload_bits as usize) * (F::one() - bler) / energy)
}

/// Result of the minimum-power bisection.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerSearch<F> {
    /// Smallest power meeting the threshold, or `None` when even the
    /// maximum power misses it.
    pub p2_w: Option<F>,
    /// BLER the evaluator reported at `p2_w`.
    pub bler: Option<F>,
    /// Evaluator calls spent inside the bisection loop.
    pub loop_evaluations: u32,
    /// All evaluator calls, including the bracket checks.
    pub total_evaluations: u32,
}

/// Finds the smallest transmit power whose BLER is at or below
/// `space.eps_th`, bisecting in dB until the bracket is narrower than
/// `space.delta_db`.
///
/// The evaluator must be non-increasing in power; five random probe pairs
/// from the recorded trajectory are re-checked and a violation aborts with
/// [`Error::NonMonotoneEvaluator`]. Returns the feasible (upper) end of
/// the final bracket, so the reported power always satisfies the
/// threshold according to the evaluator.
pub fn min_power_bisection<F: Real>(
    space: &SearchSpace<F>,
    evaluator: impl Fn(F) -> F,
) -> Result<PowerSearch<F>> {
    space.validate()?;
    let mut probes: Vec<(F, F)> = Vec::new();
    let mut total = 0u32;
    let eval_db = |p_db: F, probes: &mut Vec<(F, F)>, total: &mut u32| -> F {
        let bler = evaluator(dbm_to_watts(p_db));
        probes.push((p_db, bler));
        *total += 1;
        bler
    };

    let lo_db = watts_to_dbm(space.p_min_w);
    let hi_db = watts_to_dbm(space.p_max_w);
    let bler_max = eval_db(hi_db, &mut probes, &mut total);
    if !(bler_max <= space.eps_th) {
        check_monotone(&probes)?;
        return Ok(PowerSearch { p2_w: None, bler: None, loop_evaluations: 0, total_evaluations: total });
    }
    let bler_min = eval_db(lo_db, &mut probes, &mut total);
    if bler_min <= space.eps_th {
        check_monotone(&probes)?;
        return Ok(PowerSearch {
            p2_w: Some(space.p_min_w),
            bler: Some(bler_min),
            loop_evaluations: 0,
            total_evaluations: total,
        });
    }

    // Invariant: lo infeasible, hi feasible.
    let mut lo = lo_db;
    let mut hi = hi_db;
    let mut bler_at_hi = bler_max;
    let mut loop_calls = 0u32;
    while hi - lo > space.delta_db {
        let mid = (lo + hi) * F::of(0.5);
        let bler = eval_db(mid, &mut probes, &mut total);
        loop_calls += 1;
        if bler <= space.eps_th {
            hi = mid;
            bler_at_hi = bler;
        } else {
            lo = mid;
        }
    }
    check_monotone(&probes)?;
    Ok(PowerSearch {
        p2_w: Some(dbm_to_watts(hi)),
        bler: Some(bler_at_hi),
        loop_evaluations: loop_calls,
        total_evaluations: total,
    })
}

/// Spot-checks monotonicity on five random probe pairs from the recorded
/// bisection trajectory. Deterministic: the pair choice is seeded by a
/// fixed constant, so a given evaluator either always passes or always
/// fails.
fn check_monotone<F: Real>(probes: &[(F, F)]) -> Result<()> {
    if probes.len() < 2 {
        return Ok(());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0001);
    for _ in 0..5 {
        let i = rng.gen_range(0..probes.len());
        let mut j = rng.gen_range(0..probes.len());
        if i == j {
            j = (j + 1) % probes.len();
        }
        let (lo, hi) = if probes[i].0 < probes[j].0 {
            (probes[i], probes[j])
        } else {
            (probes[j], probes[i])
        };
        if hi.1 > lo.1 + F::of(1e-12) {
            return Err(Error::NonMonotoneEvaluator {
                p_low_dbm: lo.0.as_f64(),
                p_high_dbm: hi.0.as_f64(),
            });
        }
    }
    Ok(())
}

/// One row of the port scan.
#[derive(Debug, Clone, PartialEq)]
pub struct PortProfileEntry<F> {
    pub n_ports: u32,
    /// Whether switching N ports leaves airtime for the payload.
    pub causality_ok: bool,
    /// Minimum feasible power, when one exists.
    pub p2_w: Option<F>,
    /// Energy efficiency at that power.
    pub ee: Option<F>,
}

/// Best port count with its operating point, plus the full scan profile.
#[derive(Debug, Clone, PartialEq)]
pub struct PortSearch<F> {
    /// (N*, P₂*, EE*) of the best feasible port count, or `None`.
    pub best: Option<(u32, F, F)>,
    pub profile: Vec<PortProfileEntry<F>>,
}

/// Exhaustive scan over the port grid at fixed blocklength and altitude:
/// each causality-respecting N gets a power bisection and an efficiency
/// evaluation; the argmax is returned with ties broken toward smaller N.
pub fn optimal_ports<F: Real>(
    blocklength: u32,
    altitude: F,
    space: &SearchSpace<F>,
    params: &EeParams<F>,
    pipeline: &(impl Fn(u32, F, u32, F) -> F + Sync),
) -> Result<PortSearch<F>> {
    space.validate()?;
    let mut profile = Vec::new();
    let mut best: Option<(u32, F, F)> = None;
    for n in space.n_min..=space.n_max {
        if !causality_ok(n, blocklength, params) {
            profile.push(PortProfileEntry { n_ports: n, causality_ok: false, p2_w: None, ee: None });
            continue;
        }
        let search = min_power_bisection(space, |p2| pipeline(blocklength, altitude, n, p2))?;
        match (search.p2_w, search.bler) {
            (Some(p2), Some(bler)) => {
                let ee = energy_efficiency(bler, p2, n, blocklength, params)
                    .expect("causality was checked before the power search");
                profile.push(PortProfileEntry {
                    n_ports: n,
                    causality_ok: true,
                    p2_w: Some(p2),
                    ee: Some(ee),
                });
                // Strict comparison keeps the smallest N on ties.
                if best.map_or(true, |(_, _, incumbent)| ee > incumbent) {
                    best = Some((n, p2, ee));
                }
            }
            _ => profile.push(PortProfileEntry {
                n_ports: n,
                causality_ok: true,
                p2_w: None,
                ee: None,
            }),
        }
    }
    Ok(PortSearch { best, profile })
}

/// One row of the altitude scan.
#[derive(Debug, Clone, PartialEq)]
pub struct AltitudeProfileEntry<F> {
    pub altitude: F,
    /// Best (N*, P₂*, EE*) at this altitude, when any N is feasible.
    pub best: Option<(u32, F, F)>,
}

/// Best altitude with its port/power operating point.
#[derive(Debug, Clone, PartialEq)]
pub struct AltitudeSearch<F> {
    /// (Z*, N*, P₂*, EE*) of the best feasible altitude, or `None`.
    pub best: Option<(F, u32, F, F)>,
    pub profile: Vec<AltitudeProfileEntry<F>>,
}

/// Scans the altitude grid, nesting the port scan at each altitude; ties
/// break toward lower altitude (and smaller N within one altitude).
pub fn optimal_altitude<F: Real>(
    blocklength: u32,
    space: &SearchSpace<F>,
    params: &EeParams<F>,
    pipeline: &(impl Fn(u32, F, u32, F) -> F + Sync),
) -> Result<AltitudeSearch<F>> {
    space.validate()?;
    let mut profile = Vec::new();
    let mut best: Option<(F, u32, F, F)> = None;
    for z in space.altitude_grid() {
        let ports = optimal_ports(blocklength, z, space, params, pipeline)?;
        profile.push(AltitudeProfileEntry { altitude: z, best: ports.best });
        if let Some((n, p2, ee)) = ports.best {
            if best.map_or(true, |(_, _, _, incumbent)| ee > incumbent) {
                best = Some((z, n, p2, ee));
            }
        }
    }
    Ok(AltitudeSearch { best, profile })
}

/// Joint optimum over blocklength, altitude, port count, and power.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EeOutcome<F> {
    /// Optimal blocklength, channel uses.
    pub l_star: u32,
    /// Optimal UAV altitude, meters.
    pub z_star: F,
    /// Optimal port count.
    pub n_star: u32,
    /// Optimal (minimum feasible) transmit power, Watts.
    pub p2_star_w: F,
    /// Energy efficiency at the optimum, bits per Joule.
    pub ee_max: F,
    /// False when no grid tuple meets the reliability threshold; the
    /// numeric fields are zero in that case.
    pub feasible: bool,
}

/// One (L, Z) cell of the optimization surface.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurfaceCell<F> {
    pub blocklength: u32,
    pub altitude: F,
    /// Cell optimum over ports and power, when feasible.
    pub n_ports: Option<u32>,
    pub p2_w: Option<F>,
    pub ee: Option<F>,
}

/// Exhaustive joint search: every (L, Z) cell is optimized over ports and
/// power (cells run in parallel; the reduction is by fixed grid order, so
/// results are deterministic), and the global argmax is re-checked against
/// the reliability threshold before being reported as feasible. Ties break
/// toward smaller L, then lower Z, then smaller N.
pub fn joint_optimize<F: Real>(
    space: &SearchSpace<F>,
    params: &EeParams<F>,
    pipeline: &(impl Fn(u32, F, u32, F) -> F + Sync),
) -> Result<(EeOutcome<F>, Vec<SurfaceCell<F>>)> {
    space.validate()?;
    let mut grid: Vec<(u32, F)> = Vec::new();
    for l in space.blocklength_grid() {
        for z in space.altitude_grid() {
            grid.push((l, z));
        }
    }
    let cells: Vec<Result<SurfaceCell<F>>> = grid
        .par_iter()
        .map(|&(l, z)| {
            let ports = optimal_ports(l, z, space, params, pipeline)?;
            Ok(match ports.best {
                Some((n, p2, ee)) => SurfaceCell {
                    blocklength: l,
                    altitude: z,
                    n_ports: Some(n),
                    p2_w: Some(p2),
                    ee: Some(ee),
                },
                None => SurfaceCell { blocklength: l, altitude: z, n_ports: None, p2_w: None, ee: None },
            })
        })
        .collect();
    let mut surface = Vec::with_capacity(cells.len());
    for cell in cells {
        surface.push(cell?);
    }

    let mut best: Option<&SurfaceCell<F>> = None;
    for cell in &surface {
        if let Some(ee) = cell.ee {
            if best.map_or(true, |b| ee > b.ee.unwrap()) {
                best = Some(cell);
            }
        }
    }
    let outcome = match best {
        Some(cell) => {
            let (n, p2, ee) = (cell.n_ports.unwrap(), cell.p2_w.unwrap(), cell.ee.unwrap());
            // The search's claim is not trusted: the constraint is
            // re-evaluated at the returned operating point.
            let recheck = pipeline(cell.blocklength, cell.altitude, n, p2);
            let feasible = recheck <= space.eps_th;
            debug_assert!(feasible, "optimizer returned an operating point violating the threshold");
            EeOutcome {
                l_star: cell.blocklength,
                z_star: cell.altitude,
                n_star: n,
                p2_star_w: p2,
                ee_max: ee,
                feasible,
            }
        }
        None => EeOutcome {
            l_star: 0,
            z_star: F::zero(),
            n_star: 0,
            p2_star_w: F::zero(),
            ee_max: F::zero(),
            feasible: false,
        },
    };
    Ok((outcome, surface))
}
