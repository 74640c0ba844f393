//! Solvers, lower bounds and an exact oracle for min-sum packing of squares
//! into indexed unit bins.
//!
//! The cost of a packing is `sum over bins j of j * (items in bin j)`: early
//! bins are cheap, so good solutions front-load crowded bins. All geometry is
//! done in exact rational arithmetic; nothing in this crate touches floating
//! point.
//!
//! Quick tour:
//!
//! ```
//! use sqpack::model::{rat, Instance};
//! use sqpack::shelves::nfdh;
//!
//! let inst = Instance::new(vec![rat(1, 2), rat(1, 2), rat(1, 3)]).unwrap();
//! let packing = nfdh(inst.items());
//! assert!(packing.validate(&inst).is_empty());
//! assert_eq!(packing.cost(), 3); // everything fits in bin 1
//! ```

pub mod approx;
pub mod bounds;
pub mod cli;
pub mod exact;
pub mod ffds;
pub mod instance;
pub mod model;
pub mod ptas;
pub mod shelves;

pub use model::{Error, Rational};
