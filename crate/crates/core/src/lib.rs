//! Accuracy parity gap estimation from incomplete data.
//!
//! Complete cases are reweighted by inverse propensity scores so that group
//! risks computed on them target the complete-data population. The crate
//! covers missingness injection, propensity models, Hájek weights, a linear
//! SVM and a random forest as prediction models, the weighted fairness
//! estimator with Monte Carlo ground truth, and finite-sample upper and
//! lower bounds on the estimation error. [`harness`] composes these into
//! seeded, reproducible experiments.
//!
//! ```
//! use fairmiss::bounds::{upper_bound, BoundInputs, ModelClass};
//!
//! let inputs = BoundInputs {
//!     n: [50_000, 50_000],
//!     second_moment: [1.0, 1.0],
//!     max_weight: 1.0,
//!     d: 11,
//!     delta: 0.05,
//!     task: ModelClass::Classification,
//!     range: (0.0, 1.0),
//!     tv: [Some(0.0), Some(0.0)],
//!     sigma2: [0.0, 0.0],
//! };
//! let u = upper_bound(&inputs).unwrap().value.unwrap();
//! assert!((u - 0.1425).abs() < 1e-3);
//! ```

pub mod bounds;
pub mod dataset;
pub mod error;
pub mod fairness;
pub mod forest;
pub mod harness;
pub mod math;
pub mod missingness;
pub mod predictors;
pub mod propensity;
pub mod rng;
pub mod stats;
pub mod weights;

pub use dataset::{Dataset, SyntheticSpec, Task};
pub use error::{Error, Result};
pub use missingness::{Mechanism, MissingnessSpec, PropensityOracle};
pub use rng::RngStream;
pub use weights::WeightVector;
