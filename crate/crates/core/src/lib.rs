//! Steganographer identification by feature bagging.
//!
//! Each actor holds `m` feature vectors. Actors' vectors are split into
//! disjoint points, pairwise point distances are measured with the unbiased
//! kernel MMD (or Euclidean distance for single-vector points), points are
//! scored with the Local Outlier Factor, and point ranks are folded back into
//! a per-actor suspicion ranking. The bagged detector repeats this on `T`
//! random feature subspaces and averages the resulting actor ranks.
//!
//! ```
//! use featbag::{corpus::{normalize, Corpus}, detector::detect_single};
//! use featbag::{distance::KernelChoice, lof::LofParams};
//!
//! let rows = |shift: f64| -> Vec<Vec<f64>> {
//!     (0..4).map(|r| vec![shift + r as f64 * 0.1, shift - r as f64 * 0.2]).collect()
//! };
//! let corpus = Corpus::from_actors(&[rows(0.0), rows(0.05), rows(9.0), rows(-0.05)]).unwrap();
//! let ranking = detect_single(&normalize(&corpus).unwrap(), 1, KernelChoice::Linear, LofParams { k: 2 }).unwrap();
//! assert_eq!(ranking.order()[0].0, 2);
//! ```

pub mod bagging;
pub mod corpus;
pub mod detector;
pub mod distance;
pub mod error;
pub mod harness;
pub mod io;
pub mod lof;
pub mod report;
pub mod rng;

pub use error::{Error, FeatureFileError, Result};
