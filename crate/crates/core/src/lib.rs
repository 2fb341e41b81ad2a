//! Exact minimal log discrepancies of surface germs.
//!
//! The crate is organised bottom-up:
//!
//! - [`dual_graph`]: weighted dual graphs, intersection matrices, contraction.
//! - [`discrepancy`]: log discrepancies, pld, the strict coefficients and the
//!   weight inequalities on a resolution graph.
//! - [`smooth_germ`]: smooth germs with branch boundaries and blow-up towers.
//! - [`mld_engine`]: mld and witness search for smooth and singular germs.
//! - [`theorem_lab`]: seeded verification suites over germ families.
//! - [`germ_file`]: the JSON germ format shared by the CLI and tests.
//!
//! All arithmetic is exact ([`rational::Q`]).

pub mod discrepancy;
pub mod dual_graph;
pub mod fixtures;
pub mod germ_file;
pub mod linalg;
pub mod mld_engine;
pub mod par;
pub mod rational;
pub mod smooth_germ;
pub mod theorem_lab;

pub use rational::Q;
