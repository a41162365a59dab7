//! The four subcommand drivers: sweep, validate, optimize, inspect.
//!
//! Each driver builds its outputs in memory (a CSV [`Table`] or a plain
//! report string) and leaves printing, file writing, and exit codes to
//! `main`. Keeping the drivers pure makes them unit-testable, including
//! the deliberate-fault path of `validate_points`.

use clap::ValueEnum;

use fasrelay_core::config::{dbm_to_watts, watts_to_dbm, Scenario, SystemConfig};
use fasrelay_core::correlation::CorrelationModel;
use fasrelay_core::ee::{self, EeOutcome, SearchSpace, SurfaceCell};
use fasrelay_core::fbl::{derive_fbl, FblParams};
use fasrelay_core::geometry::{link_budget, ScenarioBudget};
use fasrelay_core::mc::{mc_end_to_end, McConfig};
use fasrelay_core::pipeline;

use crate::cfgfile::{self, CfgError};
use crate::csvio::{cell, Table};

type CmdResult<T> = Result<T, CfgError>;

fn core_err(e: fasrelay_core::Error) -> CfgError {
    CfgError(e.to_string())
}

/// The quantity a sweep varies, one grid point per CSV row.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SweepVar {
    /// UAV transmit power, grid in dBm.
    P2,
    /// Antenna port count (integers).
    N,
    /// Antenna aperture, wavelengths.
    W,
    /// Blocklength, channel uses (integers).
    L,
    /// UAV altitude, meters.
    Zu,
    /// Fading shape (integers): both hops in rural configs, the
    /// line-of-sight shape in urban configs.
    M,
}

impl SweepVar {
    fn column(self) -> &'static str {
        match self {
            SweepVar::P2 => "p2_dbm",
            SweepVar::N => "n_ports",
            SweepVar::W => "aperture_wavelengths",
            SweepVar::L => "blocklength_cu",
            SweepVar::Zu => "altitude_m",
            SweepVar::M => "nakagami_m",
        }
    }

    fn takes_integers(self) -> bool {
        matches!(self, SweepVar::N | SweepVar::L | SweepVar::M)
    }
}

/// What to compute at each grid point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Estimator {
    /// Trajectory-averaged closed-form BLER.
    Closed,
    /// High-SNR asymptote of the hop-2 BLER inside the same average.
    Asymptotic,
    /// Monte Carlo BLER with its standard error.
    Mc,
    /// High-power BLER floor set by the first hop.
    Floor,
    /// Delivered bits per Joule at the configured power.
    Ee,
}

const ESTIMATOR_ORDER: [Estimator; 5] = [
    Estimator::Closed,
    Estimator::Asymptotic,
    Estimator::Mc,
    Estimator::Floor,
    Estimator::Ee,
];

/// Requested estimators in canonical column order, duplicates dropped, so
/// the CSV schema does not depend on the order flags were typed in.
fn canonical(estimators: &[Estimator]) -> Vec<Estimator> {
    ESTIMATOR_ORDER.iter().copied().filter(|e| estimators.contains(e)).collect()
}

fn as_count(var: SweepVar, v: f64) -> CmdResult<u32> {
    if v.fract() != 0.0 || !(1.0..=u32::MAX as f64).contains(&v) {
        return Err(CfgError(format!(
            "--grid: `{v}` is not a positive whole number, which --sweep-var {} requires",
            var.column(),
        )));
    }
    Ok(v as u32)
}

/// A copy of the config with one grid value applied, re-validated.
fn apply(cfg: &SystemConfig<f64>, var: SweepVar, v: f64) -> CmdResult<SystemConfig<f64>> {
    let mut out = cfg.clone();
    match var {
        SweepVar::P2 => out.radio.p2_w = dbm_to_watts(v),
        SweepVar::N => out.fas.n_ports = as_count(var, v)?,
        SweepVar::W => out.fas.aperture = v,
        SweepVar::L => out.blocklength = as_count(var, v)?,
        SweepVar::Zu => out.placement.uav_altitude = v,
        SweepVar::M => {
            let m = as_count(var, v)?;
            match out.scenario {
                Scenario::Rural => {
                    out.m1 = m;
                    out.m2 = m;
                }
                Scenario::Urban => {
                    out.urban.as_mut().expect("urban config carries urban parameters").m_los = m;
                }
            }
        }
    }
    out.validate().map_err(core_err)?;
    Ok(out)
}

fn var_cell(var: SweepVar, v: f64) -> String {
    if var.takes_integers() {
        (v as u32).to_string()
    } else {
        v.to_string()
    }
}

/// Runs one sweep and returns the CSV table: one row per grid value,
/// estimator columns in canonical order. Port-count sweeps that request
/// the EE estimator also get a `causality_ok` column, since that sweep
/// crosses the switching-time cliff.
pub fn run_sweep(
    cfg: &SystemConfig<f64>,
    literal_gcq: bool,
    var: SweepVar,
    grid: &[f64],
    estimators: &[Estimator],
    trials: Option<u64>,
    seed: Option<u64>,
) -> CmdResult<Table> {
    if grid.is_empty() {
        return Err(CfgError("--grid: at least one value is required".into()));
    }
    let estimators = canonical(estimators);
    if estimators.is_empty() {
        return Err(CfgError("--estimators: at least one estimator is required".into()));
    }
    let trials = trials.unwrap_or(cfg.mc.trials);
    let seed = seed.unwrap_or(cfg.mc.seed);
    let causality_column = var == SweepVar::N && estimators.contains(&Estimator::Ee);

    let mut columns: Vec<&str> = vec![var.column()];
    for e in &estimators {
        match e {
            Estimator::Closed => columns.push("closed_bler"),
            Estimator::Asymptotic => columns.push("asymptotic_bler"),
            Estimator::Mc => {
                columns.push("mc_bler");
                columns.push("mc_std_error");
            }
            Estimator::Floor => columns.push("floor_bler"),
            Estimator::Ee => {
                if causality_column {
                    columns.push("causality_ok");
                }
                columns.push("ee_bits_per_joule");
            }
        }
    }
    let mut table = Table::new(&columns);
    table.meta("version", env!("CARGO_PKG_VERSION"));
    table.meta("config_hash", format!("{:016x}", cfgfile::config_hash(cfg)));
    table.meta("seed", seed);

    for &v in grid {
        let local = apply(cfg, var, v)?;
        let corr = CorrelationModel::from_geometry(&local.fas, local.rank_tol).map_err(core_err)?;
        let fbl = derive_fbl(local.payload_bits, local.blocklength).map_err(core_err)?;
        let closed = |cfg: &SystemConfig<f64>| {
            if literal_gcq {
                pipeline::averaged_end_to_end_literal(cfg, &corr, &fbl)
            } else {
                pipeline::averaged_end_to_end(cfg, &corr, &fbl)
            }
        };

        let mut row = vec![var_cell(var, v)];
        for e in &estimators {
            match e {
                Estimator::Closed => row.push(cell(Some(closed(&local)))),
                Estimator::Asymptotic => {
                    row.push(cell(Some(pipeline::averaged_asymptotic(&local, &corr, &fbl))))
                }
                Estimator::Mc => {
                    let mcfg = McConfig { trials, seed, ..local.mc };
                    let est = mc_end_to_end(&local, &corr, &fbl, &mcfg).map_err(core_err)?;
                    row.push(cell(Some(est.mean)));
                    row.push(cell(Some(est.std_error)));
                }
                Estimator::Floor => row.push(cell(Some(pipeline::error_floor(&local, &fbl)))),
                Estimator::Ee => {
                    let ok = ee::causality_ok(local.fas.n_ports, local.blocklength, &local.ee);
                    if causality_column {
                        row.push(ok.to_string());
                    }
                    let value = if ok {
                        let bler = closed(&local);
                        Some(
                            ee::energy_efficiency(
                                bler,
                                local.radio.p2_w,
                                local.fas.n_ports,
                                local.blocklength,
                                &local.ee,
                            )
                            .map_err(core_err)?,
                        )
                    } else {
                        None
                    };
                    row.push(cell(value));
                }
            }
        }
        table.row(row);
    }
    Ok(table)
}

/// One grid point of the analytic-vs-Monte-Carlo comparison.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ValidatePoint {
    pub p2_dbm: f64,
    pub closed: f64,
    pub mc_mean: f64,
    pub mc_se: f64,
    /// |closed - mc| as a multiple of three standard errors; ≤ 1 passes.
    pub ratio: f64,
}

/// Compares the analytic average against Monte Carlo at each power.
///
/// The analytic side uses `analytic_corr` while the Monte Carlo side
/// always rebuilds its correlation model from the config, so a harness
/// can hand in a perturbed spectrum and watch the comparison fail.
pub fn validate_points(
    cfg: &SystemConfig<f64>,
    analytic_corr: &CorrelationModel<f64>,
    grid_dbm: &[f64],
    trials: u64,
    seed: u64,
    literal_gcq: bool,
) -> CmdResult<Vec<ValidatePoint>> {
    let fbl = derive_fbl(cfg.payload_bits, cfg.blocklength).map_err(core_err)?;
    let mc_corr = CorrelationModel::from_geometry(&cfg.fas, cfg.rank_tol).map_err(core_err)?;
    let mut points = Vec::with_capacity(grid_dbm.len());
    for &p_dbm in grid_dbm {
        let mut local = cfg.clone();
        local.radio.p2_w = dbm_to_watts(p_dbm);
        local.validate().map_err(core_err)?;
        let closed = if literal_gcq {
            pipeline::averaged_end_to_end_literal(&local, analytic_corr, &fbl)
        } else {
            pipeline::averaged_end_to_end(&local, analytic_corr, &fbl)
        };
        let mcfg = McConfig { trials, seed, ..local.mc };
        let est = mc_end_to_end(&local, &mc_corr, &fbl, &mcfg).map_err(core_err)?;
        // An all-identical sample reports zero variance, but its own
        // sampling error is still of order 1/trials; floor the band there
        // so the ratio stays finite.
        let se_eff = est.std_error.max(1.0 / trials as f64);
        let ratio = (closed - est.mean).abs() / (3.0 * se_eff);
        points.push(ValidatePoint { p2_dbm: p_dbm, closed, mc_mean: est.mean, mc_se: est.std_error, ratio });
    }
    Ok(points)
}

/// Default validation grid: nine powers across 30 dB.
pub fn default_validate_grid() -> Vec<f64> {
    (0..9).map(|i| -10.0 + 30.0 * i as f64 / 8.0).collect()
}

/// Formats the validation report; the flag says whether every point was
/// within three standard errors.
pub fn run_validate(
    cfg: &SystemConfig<f64>,
    literal_gcq: bool,
    grid_dbm: &[f64],
    trials: u64,
    seed: u64,
) -> CmdResult<(String, bool)> {
    let corr = CorrelationModel::from_geometry(&cfg.fas, cfg.rank_tol).map_err(core_err)?;
    let points = validate_points(cfg, &corr, grid_dbm, trials, seed, literal_gcq)?;
    let mut out = String::new();
    out.push_str(&format!(
        "analytic average vs Monte Carlo: {} points, {} trials, seed {}\n",
        points.len(),
        trials,
        seed
    ));
    out.push_str("  p2_dbm       closed_bler           mc_bler      mc_std_error  |diff|/3se\n");
    let mut failed = 0usize;
    for p in &points {
        if p.ratio > 1.0 {
            failed += 1;
        }
        out.push_str(&format!(
            "{:>8.2}  {:>16.6e}  {:>16.6e}  {:>16.6e}  {:>10.3}\n",
            p.p2_dbm, p.closed, p.mc_mean, p.mc_se, p.ratio
        ));
    }
    let pass = failed == 0;
    if pass {
        out.push_str(&format!(
            "verdict: PASS ({} of {} points within 3 standard errors)\n",
            points.len(),
            points.len()
        ));
    } else {
        out.push_str(&format!(
            "verdict: FAIL ({} of {} points outside 3 standard errors)\n",
            failed,
            points.len()
        ));
    }
    Ok((out, pass))
}

/// Runs the joint optimization and returns the report, the EE surface as
/// CSV, and whether any operating point was feasible.
pub fn run_optimize(
    cfg: &SystemConfig<f64>,
    space: &SearchSpace<f64>,
) -> CmdResult<(String, Table, bool)> {
    let evaluator = pipeline::cached_grid_evaluator(cfg);
    let (outcome, surface) = ee::joint_optimize(space, &cfg.ee, &evaluator).map_err(core_err)?;
    Ok((optimize_report(&outcome, space), surface_table(cfg, &surface), outcome.feasible))
}

fn optimize_report(outcome: &EeOutcome<f64>, space: &SearchSpace<f64>) -> String {
    if !outcome.feasible {
        return format!(
            "no feasible operating point\n\
             binding constraint: the average BLER stays above eps_th = {:e} even at \
             p_max = {:.2} dBm for every (blocklength, altitude, ports) tuple\n",
            space.eps_th,
            watts_to_dbm(space.p_max_w),
        );
    }
    format!(
        "joint optimum:\n\
         \x20 blocklength L*  = {} channel uses\n\
         \x20 altitude    Z*  = {} m\n\
         \x20 ports       N*  = {}\n\
         \x20 power       P2* = {:.4} dBm ({:.6e} W)\n\
         \x20 efficiency  EE* = {:.6e} bits per joule\n",
        outcome.l_star,
        outcome.z_star,
        outcome.n_star,
        watts_to_dbm(outcome.p2_star_w),
        outcome.p2_star_w,
        outcome.ee_max,
    )
}

fn surface_table(cfg: &SystemConfig<f64>, surface: &[SurfaceCell<f64>]) -> Table {
    let mut table =
        Table::new(&["blocklength_cu", "altitude_m", "n_ports", "p2_dbm", "ee_bits_per_joule"]);
    table.meta("version", env!("CARGO_PKG_VERSION"));
    table.meta("config_hash", format!("{:016x}", cfgfile::config_hash(cfg)));
    table.meta("seed", cfg.mc.seed);
    for c in surface {
        table.row(vec![
            c.blocklength.to_string(),
            c.altitude.to_string(),
            c.n_ports.map(|n| n.to_string()).unwrap_or_default(),
            cell(c.p2_w.map(watts_to_dbm)),
            cell(c.ee),
        ]);
    }
    table
}

fn db(x: f64) -> f64 {
    10.0 * x.log10()
}

/// Prints the derived quantities behind a config: code constants, the
/// correlation spectrum, and the link budgets at one heading.
pub fn run_inspect(cfg: &SystemConfig<f64>, theta: f64) -> CmdResult<String> {
    let corr = CorrelationModel::from_geometry(&cfg.fas, cfg.rank_tol).map_err(core_err)?;
    let fbl: FblParams<f64> = derive_fbl(cfg.payload_bits, cfg.blocklength).map_err(core_err)?;
    let mut out = String::new();
    out.push_str(&format!(
        "code: {} payload bits in {} channel uses, rate {} bits per channel use\n",
        fbl.payload_bits, fbl.blocklength, fbl.rate
    ));
    out.push_str(&format!(
        "  tau = {:e}, chi = {:e}, window = [{:e}, {:e}]\n",
        fbl.tau, fbl.chi, fbl.rho_l, fbl.rho_h
    ));
    out.push_str(&format!(
        "correlation: {} ports over {} wavelengths, n_eff = {}, lambda_sum = {:e}\n",
        corr.n_ports,
        cfg.fas.aperture,
        corr.n_eff,
        corr.lambda_sum
    ));
    out.push_str("  eigenvalues:");
    for lambda in &corr.eigenvalues {
        out.push_str(&format!(" {lambda:e}"));
    }
    out.push('\n');
    let budget = link_budget(cfg, &corr, theta).map_err(core_err)?;
    out.push_str(&format!("link budget at theta = {theta} rad:\n"));
    match budget {
        ScenarioBudget::Rural(b) => {
            out.push_str(&format!(
                "  hop 1: gamma1_bar = {:e} ({:.2} dB)\n  hop 2: gamma2_bar = {:e} ({:.2} dB)\n",
                b.gamma1_bar,
                db(b.gamma1_bar),
                b.gamma2_bar,
                db(b.gamma2_bar),
            ));
        }
        ScenarioBudget::Urban { los, nlos } => {
            out.push_str(&format!(
                "  hop 1: p_los = {:.6}, gamma1_bar = {:e} ({:.2} dB) LoS / {:e} ({:.2} dB) NLoS\n",
                los.p_los_1,
                los.gamma1_bar,
                db(los.gamma1_bar),
                nlos.gamma1_bar,
                db(nlos.gamma1_bar),
            ));
            out.push_str(&format!(
                "  hop 2: p_los = {:.6}, gamma2_bar = {:e} ({:.2} dB) LoS / {:e} ({:.2} dB) NLoS\n",
                los.p_los_2,
                los.gamma2_bar,
                db(los.gamma2_bar),
                nlos.gamma2_bar,
                db(nlos.gamma2_bar),
            ));
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn estimator_order_is_canonical_and_deduped() {
        let got = canonical(&[Estimator::Ee, Estimator::Closed, Estimator::Ee, Estimator::Mc]);
        assert_eq!(got, vec![Estimator::Closed, Estimator::Mc, Estimator::Ee]);
    }

    #[test]
    fn grid_values_for_count_variables_must_be_whole() {
        let cfg = SystemConfig::<f64>::rural_preset();
        let msg = apply(&cfg, SweepVar::N, 2.5).unwrap_err().to_string();
        assert!(msg.contains("--grid") && msg.contains("n_ports"), "{msg}");
        assert!(apply(&cfg, SweepVar::N, 4.0).is_ok());
    }

    #[test]
    fn shape_sweeps_set_both_hops_rural_and_los_urban() {
        let rural = apply(&SystemConfig::<f64>::rural_preset(), SweepVar::M, 3.0).unwrap();
        assert_eq!((rural.m1, rural.m2), (3, 3));
        let urban = apply(&SystemConfig::<f64>::urban_preset(), SweepVar::M, 3.0).unwrap();
        let excess = urban.urban.unwrap();
        assert_eq!((excess.m_los, excess.m_nlos), (3, 1));
    }

    #[test]
    fn applied_values_fail_core_validation_with_a_key() {
        let cfg = SystemConfig::<f64>::rural_preset();
        let msg = apply(&cfg, SweepVar::W, -0.5).unwrap_err().to_string();
        assert!(msg.contains("fas.aperture"), "{msg}");
    }

    #[test]
    fn sweep_rows_follow_the_grid_and_schema() {
        let cfg = SystemConfig::<f64>::rural_preset();
        let table = run_sweep(
            &cfg,
            false,
            SweepVar::P2,
            &[-10.0, 0.0],
            &[Estimator::Mc, Estimator::Closed],
            Some(2_000),
            Some(9),
        )
        .unwrap();
        let text = table.render();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("# fasrelay-csv v1"));
        assert!(lines.next().unwrap().starts_with("# version = "));
        assert!(lines.next().unwrap().starts_with("# config_hash = "));
        assert_eq!(lines.next(), Some("# seed = 9"));
        assert_eq!(lines.next(), Some("p2_dbm,closed_bler,mc_bler,mc_std_error"));
        let first = lines.next().unwrap();
        assert!(first.starts_with("-10,"), "{first}");
        assert_eq!(first.split(',').count(), 4);
    }

    #[test]
    fn port_sweeps_with_ee_cross_the_causality_cliff() {
        // 200 channel uses over 10 MHz give a 20 us slot; at 2 us per
        // switch, ten or more ports can no longer fit.
        let mut cfg = SystemConfig::<f64>::rural_preset();
        cfg.blocklength = 200;
        let table = run_sweep(
            &cfg,
            false,
            SweepVar::N,
            &[2.0, 9.0, 10.0],
            &[Estimator::Ee],
            None,
            None,
        )
        .unwrap();
        let text = table.render();
        let rows: Vec<&str> = text.lines().skip(4).collect();
        assert_eq!(rows[0], "n_ports,causality_ok,ee_bits_per_joule");
        assert!(rows[1].starts_with("2,true,") && !rows[1].ends_with(','));
        assert!(rows[2].starts_with("9,true,"));
        assert_eq!(rows[3], "10,false,");
    }

    #[test]
    fn validation_passes_vacuously_on_an_empty_grid() {
        let cfg = SystemConfig::<f64>::rural_preset();
        let (report, pass) = run_validate(&cfg, false, &[], 1_000, 1).unwrap();
        assert!(pass);
        assert!(report.contains("PASS (0 of 0"), "{report}");
    }

    #[test]
    fn corrupting_the_leading_eigenvalue_fails_validation() {
        // Grow the dominant eigenvalue by 10% on the analytic side only;
        // the Monte Carlo reference keeps the true spectrum, so the
        // comparison must flag the disagreement.
        let mut cfg = SystemConfig::<f64>::rural_preset();
        cfg.m1 = 5;
        cfg.m2 = 5;
        let mut corrupted =
            CorrelationModel::from_geometry(&cfg.fas, cfg.rank_tol).unwrap();
        corrupted.eigenvalues[0] *= 1.1;
        let points = validate_points(&cfg, &corrupted, &[0.0], 200_000, 1, false).unwrap();
        assert!(points[0].ratio > 1.0, "ratio {} should flag the fault", points[0].ratio);
    }

    #[test]
    fn degenerate_single_cell_optimization_reports_that_cell() {
        let cfg = SystemConfig::<f64>::rural_preset();
        let mut space = SearchSpace::<f64>::preset();
        space.l_min = 100;
        space.l_max = 100;
        space.z_max = space.z_min;
        space.n_min = 2;
        space.n_max = 2;
        let (report, table, feasible) = run_optimize(&cfg, &space).unwrap();
        assert!(feasible);
        assert!(report.contains("L*  = 100"), "{report}");
        assert!(report.contains("N*  = 2"), "{report}");
        let text = table.render();
        let rows: Vec<&str> = text.lines().skip(5).collect();
        assert_eq!(rows.len(), 1);
        assert!(rows[0].starts_with("100,100,2,"), "{}", rows[0]);
    }

    #[test]
    fn inspect_covers_code_spectrum_and_budget() {
        let out = run_inspect(&SystemConfig::<f64>::urban_preset(), 0.5).unwrap();
        assert!(out.contains("rate 0.8"), "{out}");
        assert!(out.contains("n_eff = 2"), "{out}");
        assert!(out.contains("theta = 0.5"), "{out}");
        assert!(out.contains("p_los"), "{out}");
    }
}
