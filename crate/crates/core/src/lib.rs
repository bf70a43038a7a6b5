//! Tail-category classification for overdispersed count data.
//!
//! A Poisson mixture's tail is driven by its mixing law on the intensity λ.
//! Mixtures fall into three categories:
//!
//! - **Fréchet**: heavy-tailed mixing laws (Fréchet, folded Cauchy,
//!   inverse gamma, beta prime) carry their domain of attraction over to
//!   the counts.
//! - **Gumbel**: lognormal and small-shape Weibull mixing laws give counts
//!   in the Gumbel domain.
//! - **Pseudo-Gumbel**: gamma-type mixing laws (`f(x) ~ C(x) x^α e^(-βx)`)
//!   give counts whose consecutive survival ratio tends to `(1+β)^-1 < 1`,
//!   so they are not long tailed and have no domain of attraction.
//!
//! [`classifier::classify`] decides among them from data by fitting a
//! generalized Pareto distribution to threshold excesses and testing it;
//! [`study`] reruns the procedure over simulated samples.

pub mod classifier;
pub mod distributions;
pub mod error;
pub mod gof;
pub mod gpd;
pub mod optim;
pub mod pot;
pub mod rng;
pub mod special;
pub mod study;

pub use classifier::{classify, Classification, ClassifierConfig, DecisionTrace};
pub use distributions::{Category, MixingLaw, UnclassifiedReason};
pub use error::{Error, Result};
pub use gpd::{GpdFit, GpdParams};
