//! Robust extensible bin packing under budgeted uncertainty.
//!
//! The robust problem is solved by row-and-column generation ([`rcg`]): a
//! master problem over a finite scenario pool ([`master`]) alternates with a
//! separation step ([`separation`]) that reduces to a two-piece convex
//! knapsack, solved exactly by dynamic programming or approximately by a
//! scaling scheme ([`knapsack`]).

pub mod error;
pub mod instances;
pub mod knapsack;
pub mod lpfile;
pub mod master;
pub mod model;
pub mod oracles;
pub mod rational;
pub mod rcg;
pub mod separation;

pub use error::{Error, ErrorCategory};
