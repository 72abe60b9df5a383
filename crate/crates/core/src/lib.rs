//! Variable selection for wide regression data sets.
//!
//! A genetic algorithm searches for small variable subsets whose
//! single-response PLS regression models have high prediction power.
//! The fitness of a subset is the internally estimated prediction
//! performance obtained by resampling (repeated double cross-validation
//! or simple repeated cross-validation), with fit-based BIC criteria
//! available as cheap baselines.
//!
//! The crate is organised around a few building blocks:
//!
//! * [`dataset`] — immutable data container, CSV ingestion and all
//!   random partitioning (CV segments, calibration/test splits).
//! * [`pls`] — SIMPLS fits with coefficient paths, an OLS fitter and a
//!   slower NIPALS-style reference implementation used for cross-checks.
//! * [`model_selection`] — inner cross-validation, MSEP curves and the
//!   one-standard-error choice of the number of components.
//! * [`dtgeom`] — the double truncated geometric law governing how many
//!   genes mutate.
//! * [`fitness`] — the four validation criteria evaluated on a subset.
//! * [`ga`] — the genetic algorithm engine with deterministic,
//!   worker-count-invariant parallel offspring production.
//! * [`evaluation`] — post-search verification and external validation.

pub mod dataset;
pub mod dtgeom;
pub mod error;
pub mod evaluation;
pub mod fitness;
pub mod ga;
pub mod model_selection;
pub mod pls;
pub mod seeds;
pub mod synthetic;

pub use dataset::{make_segments, split_random, CvSegmentation, Dataset, Split};
pub use dtgeom::DtGeom;
pub use error::{Error, Result};
pub use fitness::{Criterion, FitnessConfig, FitnessValue};
pub use ga::{run_ga, GaConfig, GaResult, GenerationStats, VariableSubset};
pub use model_selection::{choose_components, cv_msep, se_of_msep, ComponentChoice, MsepCurve};
pub use pls::{fit_ols, fit_pls_oracle, fit_simpls, OlsModel, PlsFitter, PlsModel};
