//! Monte Carlo cross-checks of the analytical BLER expressions.
//!
//! Each trial synthesizes one fading realization per hop (with a random
//! heading and, in the urban scenario, a random link type per hop) and
//! scores the exact finite-blocklength error probability at the realized
//! SNR. Trials run in fixed-size chunks, one independent RNG stream per
//! chunk, and the chunk partials are reduced in grid order, so estimates
//! are bit-for-bit reproducible regardless of thread count.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::bler::end_to_end_bler;
use crate::config::SystemConfig;
use crate::correlation::CorrelationModel;
use crate::fbl::{instantaneous_bler, piecewise_bler, FblParams};
use crate::geometry::{link_budget, LinkBudget, ScenarioBudget};
use crate::scalar::Real;
use crate::Result;

/// Trials per RNG stream; the chunking unit of parallelism.
const CHUNK_TRIALS: u64 = 1 << 16;

/// How the fluid antenna's best branch is synthesized.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum McMode {
    /// Draw the effective branches directly: max over n of λ_n·g_n with
    /// g_n i.i.d. unit-mean Nakagami-m powers. This is the model the
    /// closed forms describe.
    AnalyticalModel,
    /// Synthesize correlated per-port amplitudes h = U√Λ·g from i.i.d.
    /// port innovations and select the strongest physical port. Reported
    /// for comparison against the analytical model, never asserted equal.
    PhysicalPorts,
}

/// Heading of the UAV during the simulation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum HeadingMode<F> {
    /// Every trial uses this heading.
    FixedTheta(F),
    /// Each trial draws a heading uniformly from [0, 2π).
    UniformRandom,
}

/// Monte Carlo run parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McConfig<F> {
    /// Number of trials.
    pub trials: u64,
    /// Base seed; combined with the per-chunk stream index.
    pub seed: u64,
    /// Branch synthesis mode.
    pub mode: McMode,
    /// Heading handling.
    pub headings: HeadingMode<F>,
}

/// Sample mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate<F> {
    /// Mean of the per-trial error probabilities.
    pub mean: F,
    /// Sample standard deviation divided by √trials.
    pub std_error: F,
    /// Trials actually accumulated.
    pub trials_used: u64,
}

/// Which per-trial error metric is scored. The public estimators always
/// score the exact finite-blocklength probability; the piecewise surrogate
/// is kept for tests, where it makes the comparison against the
/// closed-form averages statistically well-posed (they average the same
/// function).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(not(test), allow(dead_code))]
pub(crate) enum TrialMetric {
    ExactQ,
    Surrogate,
}

fn score<F: Real>(metric: TrialMetric, gamma: F, fbl: &FblParams<F>) -> F {
    match metric {
        TrialMetric::ExactQ => instantaneous_bler(gamma, fbl),
        TrialMetric::Surrogate => piecewise_bler(gamma, fbl),
    }
}

/// Unit-mean Nakagami-m channel power: the mean of m exponential draws,
/// each synthesized by inversion from one uniform variate.
pub fn draw_nakagami_power<F: Real, R: Rng>(m: u32, rng: &mut R) -> F {
    debug_assert!(m >= 1);
    let mut sum = 0.0f64;
    for _ in 0..m {
        let u: f64 = rng.gen();
        sum -= (1.0 - u).ln();
    }
    F::of(sum / m as f64)
}

/// Per-hop fading shapes resolved for one trial (they differ between link
/// types in the urban scenario).
struct TrialLink<F> {
    gamma1_bar: F,
    m1: u32,
    gamma2_bar: F,
    m2: u32,
}

/// Resolves heading, link types, and budgets for one trial. Draw order is
/// fixed: heading first, then the hop-1 link type, then the hop-2 link
/// type.
fn draw_trial_link<F: Real>(
    cfg: &SystemConfig<F>,
    corr: &CorrelationModel<F>,
    headings: HeadingMode<F>,
    fixed_budget: &Option<ScenarioBudget<F>>,
    rng: &mut ChaCha8Rng,
) -> TrialLink<F> {
    let budget = match fixed_budget {
        Some(b) => *b,
        None => {
            let theta = match headings {
                HeadingMode::FixedTheta(t) => t,
                HeadingMode::UniformRandom => F::of(rng.gen::<f64>()) * F::of(2.0) * F::PI(),
            };
            link_budget(cfg, corr, theta).expect("validated configuration has positive ranges")
        }
    };
    match budget {
        ScenarioBudget::Rural(b) => TrialLink {
            gamma1_bar: b.gamma1_bar,
            m1: cfg.m1,
            gamma2_bar: b.gamma2_bar,
            m2: cfg.m2,
        },
        ScenarioBudget::Urban { los, nlos } => {
            let urban = cfg.urban.as_ref().expect("urban scenario carries urban parameters");
            let pick = |is_los: bool, los_b: &LinkBudget<F>, nlos_b: &LinkBudget<F>| {
                if is_los {
                    (*los_b, urban.m_los)
                } else {
                    (*nlos_b, urban.m_nlos)
                }
            };
            let los1 = F::of(rng.gen::<f64>()) < los.p_los_1;
            let (b1, m1) = pick(los1, &los, &nlos);
            let los2 = F::of(rng.gen::<f64>()) < los.p_los_2;
            let (b2, m2) = pick(los2, &los, &nlos);
            TrialLink { gamma1_bar: b1.gamma1_bar, m1, gamma2_bar: b2.gamma2_bar, m2 }
        }
    }
}

/// Best-branch power gain, normalized so the instantaneous hop-2 SNR is
/// γ̄₂·maxbranch/Σλ.
fn draw_max_branch<F: Real>(
    corr: &CorrelationModel<F>,
    m2: u32,
    mode: McMode,
    rng: &mut ChaCha8Rng,
) -> F {
    match mode {
        McMode::AnalyticalModel => {
            let mut best = F::zero();
            for &lambda in &corr.eigenvalues[..corr.n_eff] {
                let branch = lambda * draw_nakagami_power(m2, rng);
                if branch > best {
                    best = branch;
                }
            }
            best
        }
        McMode::PhysicalPorts => {
            let n = corr.n_ports;
            // Innovations: amplitude from the Nakagami power, phase
            // uniform; weighted by √λ along each eigenvector column.
            let mut weighted: Vec<(F, F)> = Vec::with_capacity(n);
            for &lambda in corr.eigenvalues.iter() {
                let amp = (lambda * draw_nakagami_power(m2, rng)).sqrt();
                let phase = F::of(rng.gen::<f64>()) * F::of(2.0) * F::PI();
                weighted.push((amp * phase.cos(), amp * phase.sin()));
            }
            let mut best = F::zero();
            for row in 0..n {
                let mut re = F::zero();
                let mut im = F::zero();
                for (col, &(gre, gim)) in weighted.iter().enumerate() {
                    let u = corr.eigenvectors[row * n + col];
                    re = re + u * gre;
                    im = im + u * gim;
                }
                let power = re * re + im * im;
                if power > best {
                    best = power;
                }
            }
            best
        }
    }
}

/// Runs `trials` trials in seeded chunks and reduces the partial sums in
/// chunk order.
fn run_chunks<F: Real>(
    trials: u64,
    seed: u64,
    per_trial: impl Fn(&mut ChaCha8Rng) -> F + Sync,
) -> McEstimate<F> {
    assert!(trials >= 1, "at least one trial is required");
    let n_chunks = trials.div_ceil(CHUNK_TRIALS);
    let partials: Vec<(F, F, u64)> = (0..n_chunks)
        .into_par_iter()
        .map(|chunk| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(chunk + 1);
            let count = CHUNK_TRIALS.min(trials - chunk * CHUNK_TRIALS);
            let mut sum = F::zero();
            let mut sum_sq = F::zero();
            for _ in 0..count {
                let x = per_trial(&mut rng);
                sum = sum + x;
                sum_sq = sum_sq + x * x;
            }
            (sum, sum_sq, count)
        })
        .collect();

    let mut sum = F::zero();
    let mut sum_sq = F::zero();
    let mut used = 0u64;
    for (s, q, c) in partials {
        sum = sum + s;
        sum_sq = sum_sq + q;
        used += c;
    }
    let n = F::of(used as f64);
    let mean = sum / n;
    let variance = if used > 1 {
        ((sum_sq - sum * sum / n) / (n - F::one())).max(F::zero())
    } else {
        F::zero()
    };
    McEstimate { mean, std_error: (variance / n).sqrt(), trials_used: used }
}

fn fixed_budget<F: Real>(
    cfg: &SystemConfig<F>,
    corr: &CorrelationModel<F>,
    headings: HeadingMode<F>,
) -> Result<Option<ScenarioBudget<F>>> {
    match headings {
        HeadingMode::FixedTheta(theta) => Ok(Some(link_budget(cfg, corr, theta)?)),
        HeadingMode::UniformRandom => Ok(None),
    }
}

pub(crate) fn mc_hop2_bler_with_metric<F: Real>(
    cfg: &SystemConfig<F>,
    corr: &CorrelationModel<F>,
    fbl: &FblParams<F>,
    mc: &McConfig<F>,
    metric: TrialMetric,
) -> Result<McEstimate<F>> {
    cfg.validate()?;
    let fixed = fixed_budget(cfg, corr, mc.headings)?;
    Ok(run_chunks(mc.trials, mc.seed, |rng| {
        let link = draw_trial_link(cfg, corr, mc.headings, &fixed, rng);
        let branch = draw_max_branch(corr, link.m2, mc.mode, rng);
        score(metric, link.gamma2_bar * branch / corr.lambda_sum, fbl)
    }))
}

/// Monte Carlo estimate of the hop-2 BLER, scoring the exact
/// finite-blocklength error probability at each realized SNR.
pub fn mc_hop2_bler<F: Real>(
    cfg: &SystemConfig<F>,
    corr: &CorrelationModel<F>,
    fbl: &FblParams<F>,
    mc: &McConfig<F>,
) -> Result<McEstimate<F>> {
    mc_hop2_bler_with_metric(cfg, corr, fbl, mc, TrialMetric::ExactQ)
}

pub(crate) fn mc_end_to_end_with_metric<F: Real>(
    cfg: &SystemConfig<F>,
    corr: &CorrelationModel<F>,
    fbl: &FblParams<F>,
    mc: &McConfig<F>,
    metric: TrialMetric,
) -> Result<McEstimate<F>> {
    cfg.validate()?;
    let fixed = fixed_budget(cfg, corr, mc.headings)?;
    Ok(run_chunks(mc.trials, mc.seed, |rng| {
        let link = draw_trial_link(cfg, corr, mc.headings, &fixed, rng);
        let gamma1 = link.gamma1_bar * draw_nakagami_power(link.m1, rng);
        let eps1 = score(metric, gamma1, fbl);
        let branch = draw_max_branch(corr, link.m2, mc.mode, rng);
        let eps2 = score(metric, link.gamma2_bar * branch / corr.lambda_sum, fbl);
        end_to_end_bler(eps1, eps2)
    }))
}

/// Monte Carlo estimate of the end-to-end BLER over heading, link type,
/// and fading, scoring the exact finite-blocklength error probability.
pub fn mc_end_to_end<F: Real>(
    cfg: &SystemConfig<F>,
    corr: &CorrelationModel<F>,
    fbl: &FblParams<F>,
    mc: &McConfig<F>,
) -> Result<McEstimate<F>> {
    mc_end_to_end_with_metric(cfg, corr, fbl, mc, TrialMetric::ExactQ)
}
