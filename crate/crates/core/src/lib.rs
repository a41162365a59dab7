//! Analytical and simulation engine for a two-hop decode-and-forward UAV
//! relay that serves a ground user equipped with a fluid antenna system
//! (FAS) in the finite-blocklength regime.
//!
//! The crate models a base station that reaches a user through a rotary-wing
//! UAV circling above the user at a fixed radius. The first hop is a
//! Nakagami-m fading link to the UAV; the second hop ends at an N-port fluid
//! antenna whose best port is activated per packet. Spatial correlation
//! between ports follows Jakes' model, and an eigendecomposition turns the
//! correlated selection problem into independent branches.
//!
//! Two propagation scenarios are covered:
//!
//! * rural: every link is line-of-sight with free-space path loss;
//! * urban: each link is line-of-sight or non-line-of-sight at random, with
//!   an elevation-dependent LoS probability and per-type excess loss.
//!
//! On top of the per-heading block error rate the crate provides trajectory
//! averaging over the UAV's circular orbit, a Monte Carlo cross-check, and
//! an energy-efficiency optimizer over transmit power, port count,
//! blocklength, and UAV altitude.
//!
//! All numerics are generic over the scalar type through [`scalar::Real`];
//! the aliases below fix `f64` for callers that do not need the generics.

pub mod bler;
pub mod config;
pub mod correlation;
pub mod ee;
pub mod fbl;
pub mod geometry;
pub mod mc;
pub mod pipeline;
pub mod quadrature;
pub mod scalar;
pub mod special;

pub use scalar::Real;

/// Finite-blocklength code parameters over `f64`.
pub type FblParams64 = fbl::FblParams<f64>;
/// Node placement over `f64`.
pub type Placement64 = geometry::Placement<f64>;
/// Radio-level powers and noise over `f64`.
pub type RadioParams64 = geometry::RadioParams<f64>;
/// Urban excess-loss and fading parameters over `f64`.
pub type UrbanExcess64 = geometry::UrbanExcess<f64>;
/// Fluid antenna geometry over `f64`.
pub type FasGeometry64 = correlation::FasGeometry<f64>;
/// Port correlation model over `f64`.
pub type CorrelationModel64 = correlation::CorrelationModel<f64>;
/// Full system configuration over `f64`.
pub type SystemConfig64 = config::SystemConfig<f64>;
/// Energy model parameters over `f64`.
pub type EeParams64 = ee::EeParams<f64>;
/// Optimizer search space over `f64`.
pub type SearchSpace64 = ee::SearchSpace<f64>;
/// Monte Carlo estimate over `f64`.
pub type McEstimate64 = mc::McEstimate<f64>;

/// Errors reported by the numeric core.
///
/// Everything here is a caller-visible contract violation or a genuine
/// infeasibility; internal numerical helpers never fail silently.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// An input violated a documented precondition.
    InvalidInput(String),
    /// A configuration field failed validation; the string names the field.
    InvalidConfig(String),
    /// Transmitter and receiver of a hop share the same coordinates.
    CoincidentNodes { hop: u8 },
    /// The inclusion-exclusion expansion would enumerate 2^n_eff subsets
    /// past the supported cap.
    SubsetCapExceeded { n_eff: usize, cap: usize },
    /// The Jacobi eigensolver did not reach the off-diagonal tolerance.
    EigenNotConverged { sweeps: usize },
    /// Port switching leaves no airtime for the payload.
    CausalityViolated { n_ports: u32, blocklength: u32 },
    /// The BLER evaluator was observed increasing in transmit power, so a
    /// bisection root would be meaningless.
    NonMonotoneEvaluator { p_low_dbm: f64, p_high_dbm: f64 },
}

impl std::fmt::Display for Error {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Error::InvalidInput(msg) => write!(f, "invalid input: {msg}"),
            Error::InvalidConfig(msg) => write!(f, "invalid config: {msg}"),
            Error::CoincidentNodes { hop } => {
                write!(f, "hop {hop} endpoints are coincident; slant range is zero")
            }
            Error::SubsetCapExceeded { n_eff, cap } => write!(
                f,
                "subset expansion over {n_eff} branches exceeds the cap of {cap}"
            ),
            Error::EigenNotConverged { sweeps } => {
                write!(f, "eigendecomposition did not converge within {sweeps} sweeps")
            }
            Error::CausalityViolated { n_ports, blocklength } => write!(
                f,
                "switching {n_ports} ports consumes the whole {blocklength}-symbol slot"
            ),
            Error::NonMonotoneEvaluator { p_low_dbm, p_high_dbm } => write!(
                f,
                "BLER increased with power between {p_low_dbm:.2} and {p_high_dbm:.2} dBm; \
                 refusing to bisect a non-monotone evaluator"
            ),
        }
    }
}

impl std::error::Error for Error {}

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
