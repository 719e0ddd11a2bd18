//! Full Bayesian Significance Test (FBST) for sharp point-null hypotheses.
//!
//! Given posterior draws for a scalar parameter, the crate estimates the
//! posterior density with a Gaussian kernel, forms the surprise function
//! against a reference function, and reports the e-value against the null,
//! its asymptotic p-value and the standardized e-value.
//!
//! ```
//! use fbst::{oracle::AnalyticPosterior, Dimensions, FbstOptions, PosteriorSample, ReferenceFunction};
//!
//! let post = AnalyticPosterior::normal(1.0, 1.0).unwrap();
//! let sample = PosteriorSample::new("theta", post.sample(20_000, 7)).unwrap();
//! let dims = Dimensions::new(3, 2).unwrap();
//! let res = fbst::fbst(&sample, 0.0, &ReferenceFunction::Flat, dims, &FbstOptions::default()).unwrap();
//! assert!((res.e_value_against - 0.6827).abs() < 0.02);
//! ```

#![allow(clippy::neg_cmp_op_on_partial_ord)] // `!(x > 0.0)` also rejects NaN

pub mod density;
mod error;
pub mod evidence;
pub mod io;
pub mod oracle;
pub mod plot;
pub mod special;

pub use density::{DensityEstimate, KdeOptions, PosteriorSample};
pub use error::{Error, Result};
pub use evidence::{
    fbst, Dimensions, Estimator, FbstAnalysis, FbstOptions, FbstResult, ReferenceFunction, SurpriseFunction,
    TangentialRegion,
};
pub use special::{ChiSquareDf, DensityFamily};
