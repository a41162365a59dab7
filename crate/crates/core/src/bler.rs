//! Per-hop and end-to-end block error rates under the piecewise-linear
//! surrogate for the finite-blocklength error probability.
//!
//! Averaging the surrogate over fading reduces every hop to the integral
//! χ∫F(x)dx over the linear window [ρ_L, ρ_H], where F is the CDF of the
//! post-selection SNR. Hop 1 (Nakagami-m) admits a finite sum of
//! regularized incomplete gamma terms. Hop 2 (best effective branch of the
//! fluid antenna) expands the product CDF by inclusion-exclusion over
//! branch subsets; each subset contributes polynomial-times-exponential
//! integrals that are evaluated in closed form. A direct quadrature of the
//! same window integral serves as the fallback when the subset enumeration
//! would be too large, and as an independent cross-check in tests.

use crate::fbl::FblParams;
use crate::quadrature::gauss_legendre_panels;
use crate::scalar::Real;
use crate::special::{gamma_p, ln_factorial};
use crate::{Error, Result};

/// Largest branch count the subset expansion will enumerate (2^cap - 1
/// subsets). Beyond this, use [`hop2_bler_quadrature`].
pub const SUBSET_CAP: usize = 20;

/// Number of 64-point panels used by the quadrature fallback.
const QUADRATURE_PANELS: usize = 4;

/// Log-space switch: subset integrals with polynomial degree at or above
/// this are evaluated through logarithms to dodge overflow.
const SERIES_MAGNITUDE_GUARD: f64 = 300.0;

/// Nakagami-m power fading with mean power fixed by the rate parameter:
/// the channel power X has CDF P(m, xϑ) (regularized lower incomplete
/// gamma), i.e. a Gamma(m, 1/ϑ) law. For hop 1, ϑ = m/γ̄₁.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GammaHopModel<F> {
    /// Nakagami shape, m ≥ 1 (integer).
    pub m: u32,
    /// Rate parameter ϑ > 0 of the gamma-distributed SNR.
    pub vartheta: F,
}

/// CDF of the gamma-distributed SNR at `x`: P(m, xϑ).
pub fn gamma_cdf<F: Real>(x: F, model: &GammaHopModel<F>) -> F {
    debug_assert!(model.m >= 1 && model.vartheta > F::zero());
    if x <= F::zero() {
        return F::zero();
    }
    gamma_p(F::of_usize(model.m as usize), x * model.vartheta)
}

/// CDF of the best effective branch of the fluid antenna at `x`:
/// the product over branches n of P(m, xϑ₂/λₙ).
pub fn fas_cdf<F: Real>(x: F, m: u32, vartheta2: F, lambdas: &[F]) -> F {
    debug_assert!(!lambdas.is_empty());
    if x <= F::zero() {
        return F::zero();
    }
    let mut product = F::one();
    for &lambda in lambdas {
        debug_assert!(lambda > F::zero());
        product = product * gamma_cdf(x, &GammaHopModel { m, vartheta: vartheta2 / lambda });
        if product == F::zero() {
            break;
        }
    }
    product
}

/// Average hop-1 BLER under the surrogate: χ∫ P(m, xϑ) dx over the linear
/// window, evaluated as a finite sum of upper incomplete gamma terms.
pub fn hop1_bler<F: Real>(fbl: &FblParams<F>, model: &GammaHopModel<F>) -> F {
    let (rho_l, rho_h, chi) = (fbl.rho_l, fbl.rho_h, fbl.chi);
    let z_l = rho_l * model.vartheta;
    let z_h = rho_h * model.vartheta;
    let mut tail_mass = F::zero();
    for k in 0..model.m {
        // Q(s, z_l) - Q(s, z_h) written as a difference of lower tails:
        // at high SNR both upper tails are within an ulp of one and their
        // difference would drown in rounding, while the lower tails stay
        // fully resolved.
        let s = F::of_usize(k as usize + 1);
        tail_mass = tail_mass + (gamma_p(s, z_h) - gamma_p(s, z_l));
    }
    let eps = chi * ((rho_h - rho_l) - tail_mass / model.vartheta);
    debug_assert!(eps > -F::of(1e-9) && eps < F::one() + F::of(1e-9), "hop-1 overshoot");
    eps.max(F::zero()).min(F::one())
}

/// One subset S of branches in the inclusion-exclusion expansion of the
/// product CDF: the factor exp(-b_S x) multiplied by the polynomial with
/// coefficients `coeffs` (degree |S|(m-1)).
#[derive(Debug, Clone, PartialEq)]
pub struct SubsetTerm<F> {
    /// Cardinality |S|, controls the (-1)^|S| sign.
    pub size: u32,
    /// Exponential rate b_S = Σ_{j∈S} ϑ₂/λ_j.
    pub b: F,
    /// Polynomial coefficients c_0..c_deg of Π_{j∈S} Σ_{k<m} (ϑ₂/λ_j)^k x^k/k!.
    pub coeffs: Vec<F>,
}

/// Inclusion-exclusion expansion of the best-branch CDF over every
/// non-empty subset of effective branches.
#[derive(Debug, Clone, PartialEq)]
pub struct SubsetExpansion<F> {
    /// Number of effective branches the expansion covers.
    pub n_eff: usize,
    /// Nakagami shape of the hop.
    pub m: u32,
    /// Rate parameter ϑ₂ shared by all branches.
    pub vartheta2: F,
    /// All 2^n_eff - 1 subset terms.
    pub terms: Vec<SubsetTerm<F>>,
}

/// Expands Π_n P(m, xϑ₂/λ_n) = Σ_S (-1)^|S| poly_S(x) exp(-b_S x) over the
/// non-empty subsets S (the empty subset contributes the constant 1).
///
/// Fails with [`Error::SubsetCapExceeded`] past [`SUBSET_CAP`] branches;
/// use the quadrature path there.
pub fn subset_expansion<F: Real>(
    m: u32,
    vartheta2: F,
    lambdas: &[F],
) -> Result<SubsetExpansion<F>> {
    if m == 0 {
        return Err(Error::InvalidInput("the Nakagami shape must be at least 1".into()));
    }
    if !(vartheta2 > F::zero()) {
        return Err(Error::InvalidInput("the rate parameter must be positive".into()));
    }
    if lambdas.is_empty() {
        return Err(Error::InvalidInput("at least one branch eigenvalue is required".into()));
    }
    if lambdas.iter().any(|l| !(*l > F::zero())) {
        return Err(Error::InvalidInput("branch eigenvalues must be positive".into()));
    }
    let n = lambdas.len();
    if n > SUBSET_CAP {
        return Err(Error::SubsetCapExceeded { n_eff: n, cap: SUBSET_CAP });
    }

    // Per-branch polynomial factor: Σ_{k<m} r^k x^k / k! with r = ϑ₂/λ_j.
    let factors: Vec<(F, Vec<F>)> = lambdas
        .iter()
        .map(|&lambda| {
            let r = vartheta2 / lambda;
            let mut coeffs = Vec::with_capacity(m as usize);
            let mut c = F::one();
            coeffs.push(c);
            for k in 1..m {
                c = c * r / F::of_usize(k as usize);
                coeffs.push(c);
            }
            (r, coeffs)
        })
        .collect();

    let mut terms = Vec::with_capacity((1usize << n) - 1);
    walk_subsets(&factors, 0, &[F::one()], F::zero(), 0, &mut terms);
    Ok(SubsetExpansion { n_eff: n, m, vartheta2, terms })
}

/// Depth-first enumeration: each branch is either skipped or folded into
/// the running polynomial product, so every convolution is shared across
/// the subtree below it.
fn walk_subsets<F: Real>(
    factors: &[(F, Vec<F>)],
    index: usize,
    poly: &[F],
    b: F,
    size: u32,
    out: &mut Vec<SubsetTerm<F>>,
) {
    if index == factors.len() {
        if size > 0 {
            out.push(SubsetTerm { size, b, coeffs: poly.to_vec() });
        }
        return;
    }
    walk_subsets(factors, index + 1, poly, b, size, out);
    let (rate, factor) = &factors[index];
    let product = convolve(poly, factor);
    walk_subsets(factors, index + 1, &product, b + *rate, size + 1, out);
}

fn convolve<F: Real>(a: &[F], b: &[F]) -> Vec<F> {
    let mut out = vec![F::zero(); a.len() + b.len() - 1];
    for (i, &ai) in a.iter().enumerate() {
        for (j, &bj) in b.iter().enumerate() {
            out[i + j] = out[i + j] + ai * bj;
        }
    }
    out
}

/// Average hop-2 BLER from the subset expansion:
/// χ(ρ_H - ρ_L) + χ Σ_S (-1)^|S| Σ_a c_a ∫ x^a e^{-b_S x} dx.
pub fn hop2_bler_closed<F: Real>(fbl: &FblParams<F>, expansion: &SubsetExpansion<F>) -> F {
    let (rho_l, rho_h, chi) = (fbl.rho_l, fbl.rho_h, fbl.chi);
    let mut window = rho_h - rho_l;
    for term in &expansion.terms {
        let integrals = power_exponential_integrals(
            term.coeffs.len() - 1,
            term.b,
            rho_l,
            rho_h,
        );
        let mut subset_integral = F::zero();
        for (c, delta) in term.coeffs.iter().zip(&integrals) {
            subset_integral = subset_integral + *c * *delta;
        }
        if term.size % 2 == 1 {
            window = window - subset_integral;
        } else {
            window = window + subset_integral;
        }
    }
    let eps = chi * window;
    debug_assert!(eps > -F::of(1e-9) && eps < F::one() + F::of(1e-9), "hop-2 overshoot");
    eps.max(F::zero()).min(F::one())
}

/// Δ_a = ∫_lo^hi x^a e^{-bx} dx for every a = 0..=deg.
///
/// Two regimes keep the evaluation stable. When b·hi is small the
/// exponential is expanded as an alternating series whose terms shrink
/// geometrically. Otherwise each integral is written through regularized
/// Poisson tails, Δ_a = a!/b^(a+1) · [P(a+1, b·hi) - P(a+1, b·lo)], with
/// the whole tail family filled by one downward recurrence per endpoint
/// and the final combination done in log space so large degrees cannot
/// overflow. Differences that round to zero or below clamp to zero, which
/// only ever discards mass already at roundoff level.
fn power_exponential_integrals<F: Real>(deg: usize, b: F, lo: F, hi: F) -> Vec<F> {
    debug_assert!(b > F::zero() && hi > lo && lo >= F::zero());
    let small_exponent = b * hi < F::of(0.5);
    let bounded_magnitude =
        F::of_usize(deg + 1) * hi.max(F::one()).ln() < F::of(SERIES_MAGNITUDE_GUARD);
    if small_exponent && bounded_magnitude {
        (0..=deg)
            .map(|a| truncated_series(a, b, hi) - truncated_series(a, b, lo))
            .collect()
    } else {
        let tails_hi = poisson_lower_tails(deg + 1, b * hi);
        let tails_lo = poisson_lower_tails(deg + 1, b * lo);
        let ln_b = b.ln();
        (0..=deg)
            .map(|a| {
                let gap = tails_hi[a + 1] - tails_lo[a + 1];
                if gap <= F::zero() {
                    return F::zero();
                }
                (ln_factorial::<F>(a) - F::of_usize(a + 1) * ln_b + gap.ln()).exp()
            })
            .collect()
    }
}

/// ∫_0^y x^a e^{-bx} dx = y^(a+1) Σ_t (-by)^t / (t! (a+1+t)), truncated
/// once the terms stop mattering; requires b·y < 1 for fast decay.
fn truncated_series<F: Real>(a: usize, b: F, y: F) -> F {
    if y <= F::zero() {
        return F::zero();
    }
    let mut acc = F::zero();
    let mut power = F::one();
    for t in 0..80 {
        let term = power / F::of_usize(a + 1 + t);
        acc = acc + term;
        power = power * (-b * y) / F::of_usize(t + 1);
        if term.abs() < acc.abs() * F::of(1e-18) {
            break;
        }
    }
    y.powi(a as i32 + 1) * acc
}

/// Regularized lower incomplete gamma P(s, z) for every integer order
/// s = 0..=s_max, i.e. the Poisson tail Pr[Pois(z) ≥ s], via one seed
/// evaluation and the downward recurrence P(s) = P(s+1) + pmf(s).
fn poisson_lower_tails<F: Real>(s_max: usize, z: F) -> Vec<F> {
    let mut tails = vec![F::zero(); s_max + 1];
    tails[0] = F::one();
    if z <= F::zero() {
        return tails;
    }
    let ln_z = z.ln();
    tails[s_max] = gamma_p(F::of_usize(s_max), z);
    for s in (1..s_max).rev() {
        let ln_pmf = F::of_usize(s) * ln_z - z - ln_factorial::<F>(s);
        tails[s] = tails[s + 1] + ln_pmf.exp();
    }
    tails
}

/// Average hop-2 BLER by direct panelled Gauss-Legendre quadrature of
/// χ∫ F(x) dx over the linear window. Exact-arithmetic twin of
/// [`hop2_bler_closed`]; the only path available past [`SUBSET_CAP`].
pub fn hop2_bler_quadrature<F: Real>(
    fbl: &FblParams<F>,
    m: u32,
    vartheta2: F,
    lambdas: &[F],
) -> F {
    let integral = gauss_legendre_panels(
        |x| fas_cdf(x, m, vartheta2, lambdas),
        fbl.rho_l,
        fbl.rho_h,
        QUADRATURE_PANELS,
    );
    (fbl.chi * integral).max(F::zero()).min(F::one())
}

/// High-SNR limit of the hop-2 BLER. With N effective branches of shape m
/// the best-branch CDF behaves like (ϑ₂^m/m!)^N Π λ_n^{-m} x^{mN} near the
/// origin, so the window integral gives a diversity slope of mN:
/// χ(ρ_H^(mN+1) - ρ_L^(mN+1))/(mN+1) times that constant.
pub fn hop2_bler_asymptotic<F: Real>(
    fbl: &FblParams<F>,
    m: u32,
    vartheta2: F,
    lambdas: &[F],
) -> F {
    debug_assert!(m >= 1 && !lambdas.is_empty());
    let n = lambdas.len();
    let order = (m as usize) * n;
    // (ϑ₂^m / m!)^N Π λ_n^{-m} in log space; the power ρ^(mN+1) stays in
    // linear space because the window edges are order-one numbers.
    let mut ln_const = F::of_usize(n)
        * (F::of_usize(m as usize) * vartheta2.ln() - ln_factorial::<F>(m as usize));
    for &lambda in lambdas {
        ln_const = ln_const - F::of_usize(m as usize) * lambda.ln();
    }
    let window = fbl.rho_h.powi(order as i32 + 1) - fbl.rho_l.powi(order as i32 + 1);
    let eps = fbl.chi * window / F::of_usize(order + 1) * ln_const.exp();
    eps.max(F::zero()).min(F::one())
}

/// Mixture of the per-type BLERs by the LoS probability:
/// p·ε_LoS + (1-p)·ε_NLoS.
pub fn urban_hop_mixture<F: Real>(eps_los: F, eps_nlos: F, p_los: F) -> F {
    debug_assert!(p_los >= F::zero() && p_los <= F::one());
    p_los * eps_los + (F::one() - p_los) * eps_nlos
}

/// Decode-and-forward end-to-end BLER: ε₁ + ε₂ - ε₁ε₂.
pub fn end_to_end_bler<F: Real>(eps1: F, eps2: F) -> F {
    eps1 + eps2 - eps1 * eps2
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fbl::derive_fbl;
    use proptest::prelude::*;

    fn fbl(bits: u32, len: u32) -> FblParams<f64> {
        derive_fbl(bits, len).unwrap()
    }

    /// Eigenvalues of the two-port half-wavelength Jakes matrix.
    const LAM2: [f64; 2] = [1.3042421776440938642, 0.6957578223559061358];
    /// Eigenvalues of the three-port half-wavelength Jakes matrix.
    const LAM3: [f64; 3] = [
        1.5325037142911535451,
        1.3042421776440938642,
        0.1632541080647525907,
    ];

    #[test]
    fn gamma_cdf_matches_the_closed_form_cases() {
        let exponential = GammaHopModel { m: 1, vartheta: 1.0 };
        assert!((gamma_cdf(1.0, &exponential) - (1.0 - (-1.0_f64).exp())).abs() < 1e-15);
        let two = GammaHopModel { m: 2, vartheta: 1.0_f64 };
        assert!((gamma_cdf(1.0, &two) - 0.26424111765711535681).abs() < 1e-14);
        assert_eq!(gamma_cdf(0.0, &two), 0.0);
        assert_eq!(gamma_cdf(-1.0, &two), 0.0);
        assert!(gamma_cdf(1e6, &two) > 1.0 - 1e-12);
    }

    #[test]
    fn fas_cdf_reference_value_and_reductions() {
        let got = fas_cdf(1.0, 1, 1.0, &[1.0_f64, 1.0]);
        assert!((got - 0.3995764008937280487).abs() < 1e-14, "got {got}");
        // One branch degenerates to the plain gamma CDF.
        let single = fas_cdf(0.7, 3, 2.0, &[1.3_f64]);
        let direct = gamma_cdf(0.7, &GammaHopModel { m: 3, vartheta: 2.0 / 1.3 });
        assert!((single - direct).abs() < 1e-16);
    }

    proptest! {
        #[test]
        fn fas_cdf_is_a_cdf_and_extra_branches_lower_it(
            x in 0.01_f64..20.0,
            step in 0.01_f64..5.0,
            m in 1_u32..6,
            vt in 0.05_f64..5.0,
            extra in 0.1_f64..3.0,
        ) {
            let lams = [1.3, 0.7];
            let at_x = fas_cdf(x, m, vt, &lams);
            let further = fas_cdf(x + step, m, vt, &lams);
            // Products of gamma CDFs round to exactly 1 deep in the upper
            // tail, so the bounds and orderings close up there.
            prop_assert!(at_x > 0.0 && at_x <= 1.0);
            prop_assert!(further >= at_x);
            // The extra factor can itself round to 1 (its branch gain is
            // free), so only the ordering in x gets a strictness claim.
            let wider = fas_cdf(x, m, vt, &[1.3, 0.7, extra]);
            prop_assert!(wider <= at_x);
            if at_x < 1.0 - 1e-9 {
                prop_assert!(further > at_x);
            }
        }
    }

    #[test]
    fn hop1_bler_frozen_values() {
        let cases: [(u32, u32, u32, f64, f64); 3] = [
            (80, 100, 5, 0.5, 0.000045396514107633409144),
            (80, 100, 1, 1.0, 0.52248594297444767834),
            (80, 200, 7, 3.0, 0.000072409828730887108242),
        ];
        for (bits, len, m, vt, want) in cases {
            let got = hop1_bler(&fbl(bits, len), &GammaHopModel { m, vartheta: vt });
            assert!(
                (got - want).abs() <= want * 1e-10,
                "hop1({bits},{len},{m},{vt}) = {got}, want {want}"
            );
        }
    }

    #[test]
    fn hop1_bler_agrees_with_direct_quadrature() {
        for (m, vt) in [(1_u32, 0.3_f64), (2, 1.0), (5, 0.04), (7, 2.5)] {
            for p in [fbl(80, 100), fbl(80, 500), fbl(1, 1000)] {
                let model = GammaHopModel { m, vartheta: vt };
                let direct = p.chi
                    * gauss_legendre_panels(|x| gamma_cdf(x, &model), p.rho_l, p.rho_h, 4);
                let closed = hop1_bler(&p, &model);
                assert!(
                    (closed - direct).abs() < 1e-10,
                    "m={m} vt={vt} L={}: closed {closed} vs quadrature {direct}",
                    p.blocklength
                );
            }
        }
    }

    #[test]
    fn hop1_bler_saturates_at_the_snr_extremes() {
        let p = fbl(80, 100);
        let starved = hop1_bler(&p, &GammaHopModel { m: 3, vartheta: 1e9 });
        assert!(starved > 1.0 - 1e-9);
        let flooded = hop1_bler(&p, &GammaHopModel { m: 3, vartheta: 1e-9 });
        assert!(flooded < 1e-9);
    }

    #[test]
    fn subset_polynomials_match_hand_expansions() {
        // Two identical unit branches, m = 2: the pair subset multiplies
        // (1 + x)(1 + x) = 1 + 2x + x².
        let exp = subset_expansion(2, 1.0, &[1.0_f64, 1.0]).unwrap();
        assert_eq!(exp.terms.len(), 3);
        let pair = exp.terms.iter().find(|t| t.size == 2).unwrap();
        assert_eq!(pair.coeffs, vec![1.0, 2.0, 1.0]);
        assert!((pair.b - 2.0).abs() < 1e-15);
        let singles: Vec<_> = exp.terms.iter().filter(|t| t.size == 1).collect();
        assert_eq!(singles.len(), 2);
        for s in singles {
            assert_eq!(s.coeffs, vec![1.0, 1.0]);
        }

        // Three branches, m = 3: the full subset has degree 3·(3-1) = 6.
        let exp = subset_expansion(3, 1.0, &[1.0_f64, 1.0, 1.0]).unwrap();
        assert_eq!(exp.terms.len(), 7);
        let full = exp.terms.iter().find(|t| t.size == 3).unwrap();
        assert_eq!(full.coeffs.len(), 7);
        // Leading coefficient is (1/2!)³ = 1/8.
        assert!((full.coeffs[6] - 0.125).abs() < 1e-15);
        assert!((full.coeffs[0] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn subset_expansion_rejects_bad_inputs_and_the_cap() {
        assert!(matches!(
            subset_expansion(0, 1.0, &[1.0_f64]).unwrap_err(),
            Error::InvalidInput(_)
        ));
        assert!(matches!(
            subset_expansion(2, 0.0, &[1.0_f64]).unwrap_err(),
            Error::InvalidInput(_)
        ));
        assert!(matches!(
            subset_expansion(2, 1.0, &[1.0_f64, -0.5]).unwrap_err(),
            Error::InvalidInput(_)
        ));
        let too_many = vec![1.0_f64; SUBSET_CAP + 1];
        assert_eq!(
            subset_expansion(2, 1.0, &too_many).unwrap_err(),
            Error::SubsetCapExceeded { n_eff: SUBSET_CAP + 1, cap: SUBSET_CAP }
        );
    }

    #[test]
    fn expansion_reproduces_the_product_cdf_pointwise() {
        let (m, vt) = (3_u32, 0.8_f64);
        let exp = subset_expansion(m, vt, &LAM3).unwrap();
        for x in [0.05_f64, 0.3, 0.9, 2.0] {
            let mut from_terms = 1.0;
            for term in &exp.terms {
                let mut poly = 0.0;
                for c in term.coeffs.iter().rev() {
                    poly = poly * x + c;
                }
                let signed = poly * (-term.b * x).exp();
                if term.size % 2 == 1 {
                    from_terms -= signed;
                } else {
                    from_terms += signed;
                }
            }
            let direct = fas_cdf(x, m, vt, &LAM3);
            assert!(
                (from_terms - direct).abs() < 1e-13,
                "x={x}: expansion {from_terms} vs product {direct}"
            );
        }
    }

    #[test]
    fn hop2_closed_frozen_values() {
        let p = fbl(80, 100);
        // Two effective branches from the half-wavelength pair at average
        // SNR 20 (ϑ₂ = m·Σλ/γ̄₂).
        // Tolerances carry an absolute floor: the closed form subtracts
        // unit-scale subset terms, so results far below one retain about
        // 1e-15 of absolute rounding regardless of their magnitude.
        let check = |got: f64, want: f64, label: &str| {
            assert!(
                (got - want).abs() < want * 1e-9 + 5e-14,
                "{label}: got {got}, want {want}"
            );
        };
        let exp = subset_expansion(1, 2.0 / 20.0, &LAM2).unwrap();
        check(hop2_bler_closed(&p, &exp), 0.0056145182053849073241, "m=1 pair");

        let exp = subset_expansion(2, 0.05, &[1.0, 1.0]).unwrap();
        check(hop2_bler_closed(&p, &exp), 4.6707916981096010068e-7, "m=2 unit pair");

        let exp = subset_expansion(2, 0.3, &LAM3).unwrap();
        check(hop2_bler_closed(&p, &exp), 0.000052309977526899409964, "m=2 triple");
    }

    #[test]
    fn hop2_closed_with_one_branch_reduces_to_hop1() {
        for (m, vt, lambda) in [(1_u32, 0.2_f64, 1.0_f64), (4, 1.3, 0.61), (7, 0.02, 2.2)] {
            let p = fbl(80, 200);
            let exp = subset_expansion(m, vt, &[lambda]).unwrap();
            let closed = hop2_bler_closed(&p, &exp);
            let hop1 = hop1_bler(&p, &GammaHopModel { m, vartheta: vt / lambda });
            assert!(
                (closed - hop1).abs() < 1e-12 + hop1 * 1e-10,
                "m={m}: {closed} vs {hop1}"
            );
        }
    }

    #[test]
    fn hop2_closed_and_quadrature_agree() {
        let grids: [(u32, f64, &[f64]); 5] = [
            (1, 0.1, &LAM2),
            (2, 0.05, &LAM2),
            (5, 0.4, &LAM2),
            (3, 0.9, &LAM3),
            (7, 0.01, &LAM3),
        ];
        for (m, vt, lams) in grids {
            for p in [fbl(80, 100), fbl(80, 500), fbl(1, 1000)] {
                let exp = subset_expansion(m, vt, lams).unwrap();
                let closed = hop2_bler_closed(&p, &exp);
                let quad = hop2_bler_quadrature(&p, m, vt, lams);
                assert!(
                    (closed - quad).abs() < 1e-9,
                    "m={m} vt={vt} L={}: closed {closed} vs quadrature {quad}",
                    p.blocklength
                );
            }
        }
    }

    #[test]
    fn hop2_bler_vanishes_and_saturates_with_the_rate_parameter() {
        let p = fbl(80, 100);
        let cold = subset_expansion(2, 1e-7, &LAM2).unwrap();
        assert!(hop2_bler_closed(&p, &cold) < 1e-9);
        let hot = subset_expansion(2, 1e5, &LAM2).unwrap();
        assert!(hop2_bler_closed(&p, &hot) > 1.0 - 1e-9);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]
        #[test]
        fn hop2_closed_is_monotone_in_snr_and_branch_count(
            m in 1_u32..5,
            vt in 0.01_f64..2.0,
            extra in 0.2_f64..2.0,
        ) {
            let p = fbl(80, 100);
            let base = hop2_bler_closed(&p, &subset_expansion(m, vt, &LAM2).unwrap());
            // More SNR (smaller ϑ₂) never hurts.
            let warmer = hop2_bler_closed(&p, &subset_expansion(m, vt * 0.5, &LAM2).unwrap());
            prop_assert!(warmer <= base + 1e-15);
            // An extra effective branch never hurts.
            let lams = [LAM2[0], LAM2[1], extra];
            let wider = hop2_bler_closed(&p, &subset_expansion(m, vt, &lams).unwrap());
            prop_assert!(wider <= base + 1e-15);
            prop_assert!((0.0..=1.0).contains(&base));
        }
    }

    #[test]
    fn asymptote_has_the_exact_single_branch_form() {
        // m = 1, one unit branch: χ ϑ (ρ_H² - ρ_L²)/2.
        let p = fbl(80, 100);
        let vt = 0.01;
        let want = p.chi * vt * (p.rho_h * p.rho_h - p.rho_l * p.rho_l) / 2.0;
        let got = hop2_bler_asymptotic(&p, 1, vt, &[1.0]);
        assert!((got - want).abs() < want * 1e-13);
    }

    #[test]
    fn asymptote_decays_with_the_full_diversity_order() {
        // A 10 dB SNR step scales the asymptote by exactly 10^(mN).
        let p = fbl(80, 100);
        for (m, lams) in [(1_u32, &LAM2[..]), (2, &LAM2[..]), (2, &LAM3[..])] {
            let vt = 0.02;
            let hi = hop2_bler_asymptotic(&p, m, vt, lams);
            let lo = hop2_bler_asymptotic(&p, m, vt / 10.0, lams);
            let order = 10.0_f64.powi((m as usize * lams.len()) as i32);
            assert!(
                (hi / lo - order).abs() < order * 1e-10,
                "m={m} N={}: ratio {}",
                lams.len(),
                hi / lo
            );
        }
    }

    #[test]
    fn asymptote_approaches_the_closed_form_at_high_snr() {
        // m = 2 over the half-wavelength pair: the relative gap shrinks
        // monotonically and falls under 5% once the BLER is deep enough.
        let p = fbl(80, 100);
        let mut last_gap = f64::INFINITY;
        for gbar_db in [16.0_f64, 18.0, 20.0, 22.0, 24.0] {
            let gbar = 10.0_f64.powf(gbar_db / 10.0);
            let vt = 2.0 * 2.0 / gbar;
            let closed = hop2_bler_closed(&p, &subset_expansion(2, vt, &LAM2).unwrap());
            let asym = hop2_bler_asymptotic(&p, 2, vt, &LAM2);
            let gap = (asym - closed).abs() / closed;
            assert!(gap < last_gap, "gap not shrinking at {gbar_db} dB");
            last_gap = gap;
        }
        assert!(last_gap < 0.02, "terminal gap {last_gap}");
    }

    #[test]
    fn mixture_and_combining_match_hand_arithmetic() {
        assert!((urban_hop_mixture(0.01_f64, 0.5, 0.9) - 0.059).abs() < 1e-15);
        assert_eq!(urban_hop_mixture(0.2, 0.7, 1.0), 0.2);
        assert_eq!(urban_hop_mixture(0.2, 0.7, 0.0), 0.7);
        assert!((end_to_end_bler(0.01_f64, 0.02) - 0.0298).abs() < 1e-15);
        assert_eq!(end_to_end_bler(1.0, 0.3), 1.0);
        assert_eq!(end_to_end_bler(0.0, 0.3), 0.3);
    }

    proptest! {
        #[test]
        fn combining_stays_probabilistic_and_dominates_each_hop(
            e1 in 0.0_f64..=1.0,
            e2 in 0.0_f64..=1.0,
            p in 0.0_f64..=1.0,
        ) {
            let mix = urban_hop_mixture(e1, e2, p);
            prop_assert!(mix >= e1.min(e2) - 1e-15 && mix <= e1.max(e2) + 1e-15);
            let total = end_to_end_bler(e1, e2);
            prop_assert!(total >= e1.max(e2) - 1e-15);
            prop_assert!(total <= 1.0 + 1e-15);
        }
    }
}
