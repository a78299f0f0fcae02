//! Superoscillating sequences and supershifts in one and several variables.
//!
//! The crate builds the interpolation coefficients `Z_j(n, a)`, evaluates the
//! sequences `Σ_j Z_j Π_ℓ e^{i x_ℓ G_ℓ(h_j)}` and `Σ_j Z_j Π_ℓ G_ℓ(x_ℓ h_j)`
//! directly, and evaluates them a second time by applying infinite-order
//! differential operators to `Σ_j Z_j e^{iξh_j}` in the space of entire
//! functions of exponential type. All numerics run in exact rational
//! arithmetic where possible and in MPFR multiprecision otherwise, under an
//! explicit precision policy.
//!
//! ```
//! use rug::Rational;
//! use superosc::{solve_coefficients, verify_interpolation, NodeSet};
//!
//! let nodes = NodeSet::equispaced(2).unwrap();
//! let z = solve_coefficients(&nodes, &Rational::from(2));
//! assert_eq!(z.exact_values().unwrap(), &[3, -3, 1]);
//! assert!(verify_interpolation(&z, 2).all_zero());
//! ```

pub mod cli;
pub mod coefficients;
pub mod convergence;
pub mod error;
pub mod growth_space;
pub mod nodes;
pub mod operator_engine;
pub mod precision;
pub mod scalar;
pub mod series;
pub mod superosc;

pub use coefficients::{solve_at_node, solve_coefficients, verify_interpolation, CoefficientSet, Residuals};
pub use convergence::{dual_route_check, sweep, ConvergenceReport, DualRouteReport, GridSpec};
pub use error::{Error, Result};
pub use growth_space::{bnorm_estimate, certificate_fit, restrict_at_zero, Certificate, GrowthFunction, GrowthRate, SamplingGrid};
pub use nodes::{generate_nodes, NodeScheme, NodeSet};
pub use operator_engine::{apply_operator, build_u, build_v, build_y_series, continuity_probe, OperatorKind, OperatorSymbol};
pub use precision::{with_escalation, Escalated, PrecisionPolicy};
pub use scalar::QComplex;
pub use series::{cauchy_power, cauchy_product, radius_estimate, series_exp, truncated_eval, Builtin, PowerSeries, Radius};
pub use superosc::{admissible_halfwidth, eval_f1d, Mode, MultivarProblem, ProblemFamily};
