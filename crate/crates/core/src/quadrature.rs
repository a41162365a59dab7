//! Numerical integration rules: fixed-order Gauss-Legendre panels for the
//! bounded SNR-window integrals, and the Chebyshev-node heading rule used
//! to average per-heading error rates over the UAV's circular orbit.

use crate::scalar::Real;

/// Order of the Gauss-Legendre rule used throughout the crate. Exact for
/// polynomials up to degree 127, which dwarfs anything the smooth CDF
/// integrands need once panelized.
pub const GL_ORDER: usize = 64;

/// Nodes and weights of the order-64 rule on [-1, 1], positive half only
/// (the rule is symmetric). Computed once by Newton iteration on the
/// Legendre polynomial.
fn gl64_half_nodes() -> &'static Vec<(f64, f64)> {
    use std::sync::OnceLock;
    static NODES: OnceLock<Vec<(f64, f64)>> = OnceLock::new();
    NODES.get_or_init(|| {
        let n = GL_ORDER;
        let mut out = Vec::with_capacity(n / 2);
        for i in 0..n / 2 {
            // Tricomi's initial guess, then Newton until machine precision.
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let step = p / d;
                x -= step;
                if step.abs() < 1e-16 {
                    break;
                }
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            out.push((x, w));
        }
        out
    })
}

/// Legendre polynomial P_n and its derivative at x, by the three-term
/// recurrence.
fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p_prev = 1.0;
    let mut p = x;
    for k in 1..n {
        let kf = k as f64;
        let next = ((2.0 * kf + 1.0) * x * p - kf * p_prev) / (kf + 1.0);
        p_prev = p;
        p = next;
    }
    let dp = (n as f64) * (x * p - p_prev) / (x * x - 1.0);
    (p, dp)
}

/// Integrates `f` over [a, b] with a single order-64 Gauss-Legendre panel.
pub fn gauss_legendre<F: Real>(f: impl Fn(F) -> F, a: F, b: F) -> F {
    let half = (b - a) * F::of(0.5);
    let mid = (a + b) * F::of(0.5);
    let mut sum = F::zero();
    for &(x, w) in gl64_half_nodes() {
        let (x, w) = (F::of(x), F::of(w));
        sum = sum + w * (f(mid + half * x) + f(mid - half * x));
    }
    sum * half
}

/// Integrates `f` over [a, b] split into `panels` equal Gauss-Legendre
/// panels. Panelizing guards against integrands whose scale varies across
/// the window; for the smooth CDFs here even one panel is ample.
pub fn gauss_legendre_panels<F: Real>(f: impl Fn(F) -> F, a: F, b: F, panels: usize) -> F {
    assert!(panels > 0, "at least one panel is required");
    let width = (b - a) / F::of_usize(panels);
    let mut total = F::zero();
    for i in 0..panels {
        let lo = a + width * F::of_usize(i);
        total = total + gauss_legendre(&f, lo, lo + width);
    }
    total
}

/// Sums a slice in a fixed pairwise order, independent of how the values
/// were produced. Keeps heading averages reproducible to the last bit.
pub fn pairwise_sum<F: Real>(values: &[F]) -> F {
    match values.len() {
        0 => F::zero(),
        1 => values[0],
        2 => values[0] + values[1],
        n => {
            let (lo, hi) = values.split_at(n / 2);
            pairwise_sum(lo) + pairwise_sum(hi)
        }
    }
}

/// Chebyshev-node rule for averaging a per-heading quantity over the
/// UAV's circular orbit, theta in [0, 2π).
///
/// Substituting theta = π cos(φ) + π turns the uniform average into
/// (1/2)∫_0^π f(theta(φ)) sin(φ) dφ, evaluated by the midpoint rule at
/// φ_m = (2m-1)π/(2M); the fields below expose every node so callers can
/// audit the rule.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryRule<F> {
    /// Number of heading nodes M.
    pub order: usize,
    /// Chebyshev roots x_m = cos((2m-1)π/(2M)) in (-1, 1).
    pub chebyshev_roots: Vec<F>,
    /// Heading nodes θ_m = π x_m + π in (0, 2π).
    pub nodes: Vec<F>,
    /// Node weights (π/2M)·sin(φ_m); they sum to 1 + closure_defect.
    pub weights: Vec<F>,
    /// δ_M = (π/2M)/sin(π/2M) - 1, the O(M^-2) defect of the plain
    /// weighted sum on a constant integrand.
    pub closure_defect: F,
}

impl<F: Real> TrajectoryRule<F> {
    /// Builds the rule with `order` heading nodes (at least one).
    pub fn new(order: usize) -> Self {
        assert!(order >= 1, "the heading rule needs at least one node");
        let half_step = F::FRAC_PI_2() / F::of_usize(order);
        let mut chebyshev_roots = Vec::with_capacity(order);
        let mut nodes = Vec::with_capacity(order);
        let mut weights = Vec::with_capacity(order);
        for i in 1..=order {
            let phi = F::of_usize(2 * i - 1) * half_step;
            let x = phi.cos();
            chebyshev_roots.push(x);
            nodes.push(F::PI() * x + F::PI());
            weights.push(half_step * phi.sin());
        }
        let closure_defect = half_step / half_step.sin() - F::one();
        TrajectoryRule { order, chebyshev_roots, nodes, weights, closure_defect }
    }

    /// Uniform average of the probability `f(theta)` over the circle.
    ///
    /// The plain weighted sum carries the closure defect δ_M·f(0) (its
    /// weights sum to 1 + δ_M, not 1), so for M >= 2 that defect is
    /// subtracted explicitly, which restores exact constant recovery and
    /// pushes the error for smooth periodic integrands to O(M^-4). M = 1
    /// keeps the documented single-node value (π/2)·f(π).
    ///
    /// The result is clamped to [0, 1]: `f` is a probability, and the
    /// closure subtraction could otherwise dip microscopically below zero
    /// for integrands that are zero at every node but not at theta = 0.
    pub fn average(&self, f: impl Fn(F) -> F) -> F {
        let weighted: Vec<F> = self
            .nodes
            .iter()
            .zip(&self.weights)
            .map(|(&theta, &w)| w * f(theta))
            .collect();
        let mut estimate = pairwise_sum(&weighted);
        if self.order >= 2 {
            estimate = estimate - self.closure_defect * f(F::zero());
        }
        estimate.max(F::zero()).min(F::one())
    }

    /// The heading average exactly as printed in the source derivation:
    /// (π/M) Σ w_m f(θ_m) with w_m = (π/M)/√(1-x_m²).
    ///
    /// This applies the quadrature constant twice and de-weights instead
    /// of weighting by √(1-x_m²), so it is *not* a consistent estimator of
    /// the uniform average; it is retained verbatim as a diagnostic so the
    /// discrepancy can be reproduced and audited. The result is not
    /// clamped.
    pub fn average_paper_literal(&self, f: impl Fn(F) -> F) -> F {
        let step = F::PI() / F::of_usize(self.order);
        let weighted: Vec<F> = self
            .chebyshev_roots
            .iter()
            .zip(&self.nodes)
            .map(|(&x, &theta)| step / (F::one() - x * x).sqrt() * f(theta))
            .collect();
        step * pairwise_sum(&weighted)
    }
}

/// Uniform average of `f(theta)` over the circle using `m` Chebyshev-node
/// headings; see [`TrajectoryRule::average`] for the rule's properties.
pub fn trajectory_average<F: Real>(f: impl Fn(F) -> F, m: usize) -> F {
    TrajectoryRule::new(m).average(f)
}

/// Verbatim-formula heading average kept as a diagnostic; see
/// [`TrajectoryRule::average_paper_literal`].
pub fn trajectory_average_paper_literal<F: Real>(f: impl Fn(F) -> F, m: usize) -> F {
    TrajectoryRule::new(m).average_paper_literal(f)
}
