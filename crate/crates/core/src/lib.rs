//! Strip-entropy approximation of Markov hom tree-shifts on Markov-Cayley trees.
//!
//! A Markov hom tree-shift labels every node of a Markov-Cayley tree with a
//! symbol from `{1..k}` so that each parent-child pair is allowed by a 0-1
//! matrix `A`. This crate counts such labelings on blocks and on strips along
//! eventually periodic rays, builds the per-step transfer matrices that
//! propagate strip counts, and computes strip entropies both in closed form
//! (Perron root of the period product) and by direct iteration. A brute-force
//! [`oracle`] provides independent ground truth.

pub mod counting;
pub mod entropy;
pub mod error;
pub mod logspace;
pub mod matrices;
pub mod oracle;
pub mod ray;
pub mod report;
pub mod transfer;
pub mod tree;
pub mod verify;

pub use error::{Error, Result};
pub use matrices::{BinaryMatrix, LogNonnegMatrix, PerronData};
pub use ray::{Ray, StripProfile};
pub use tree::MarkovTree;
