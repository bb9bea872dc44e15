//! Exact decisions on entanglement transformations between pure bipartite
//! states, and small neural classifiers trained to imitate them.
//!
//! - [`majorization`]: the majorization preorder on Schmidt vectors, Kronecker
//!   products, catalyst tests and the minimal self-catalysis order.
//! - [`datagen`]: biased simplex sampling, oracle-labelled datasets, CSV
//!   persistence and entry histograms.
//! - [`mlp`]: a dense feed-forward binary classifier with backpropagation and
//!   five first-order optimizers.
//! - [`experiments`]: the majorization sweep, transfer to self-catalysis, hybrid
//!   higher-order pipelines and timing trends, with serializable reports.
//! - [`golden`]: pinned reference checks on known worked examples.

pub mod datagen;
pub mod error;
pub mod experiments;
pub mod golden;
pub mod majorization;
pub mod mlp;
pub mod seed;

pub use error::{Error, Result};
pub use majorization::{Comparability, ProbVector, Tolerance};
