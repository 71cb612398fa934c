//! Income-distribution and growth-cycle analysis toolkit.
//!
//! The crate has three layers:
//!
//! - [`gpd`] implements the two-branch Gompertz-Pareto income distribution:
//!   distribution functions, moments, Lorenz curve, Gini coefficient, the
//!   labor/capital share split and inverse-transform sampling. [`fit`]
//!   estimates its parameters from income samples via linearized regressions
//!   with a threshold search.
//! - [`goodwin`] defines the Goodwin growth-cycle model (a Lotka-Volterra
//!   system in the labor share `u` and employment rate `v`) and its
//!   bounded-domain extension with a nonlinear Phillips term, together with
//!   a fixed-step RK4 integrator, orbit-period detection and the conserved
//!   first integral used as an accuracy oracle.
//! - [`estimation`] turns yearly `(u, v)` series into growth-rate
//!   observations via central differences and fits the model equations to
//!   them; [`data`] handles income CSVs, the bundled 1981-2009 yearly table
//!   and its interpolation.
//!
//! All shares and probabilities are on the 0-100 percent scale.

pub mod data;
pub mod estimation;
pub mod fit;
pub mod goodwin;
pub mod gpd;
pub mod quad;
pub mod stats;

pub use gpd::{GpdError, GpdParams, LorenzPoint, Percent};
