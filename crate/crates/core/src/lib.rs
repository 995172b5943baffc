//! Search-based methods for multi-cloud configuration.
//!
//! The crate models the hierarchical provider/configuration domain
//! ([`space`]), replays offline measurement tables ([`dataset`]), provides
//! GP, random-forest and RBF surrogates ([`surrogate`]), black-box optimizers
//! over finite candidate sets ([`bbo`]), the multi-cloud meta-algorithms
//! including CloudBandit ([`multicloud`]), and a seeded experiment harness
//! with regret and savings reporting ([`experiment`]).

pub mod bbo;
pub mod dataset;
pub mod error;
pub mod experiment;
pub mod multicloud;
pub mod seed;
pub mod space;
pub mod surrogate;

pub use dataset::{ObjectiveTable, PriceList, Scenario, Target};
pub use error::{Error, Result};
pub use space::{ConfigPoint, EncodedPoint, Param, ProviderSpace, SearchSpace};
