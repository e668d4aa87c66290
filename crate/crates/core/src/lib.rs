//! Primal-dual macro placement on a discretized placement area.
//!
//! The crate is organized bottom-up:
//!
//! * [`stepfield`] stores the dual cost function as a 2D step function with
//!   logarithmic rectangle sums and rectangle increments.
//! * [`netmodel`] holds netlists, placements, legality and the netlength models.
//! * [`placer`] runs the iterative global placer and a greedy legalizer.
//! * [`io`] covers instance/result files, instance generation, the independent
//!   checker and SVG rendering.

pub mod io;
pub mod netmodel;
pub mod placer;
pub mod stepfield;

pub use netmodel::{Macro, Net, NetModel, Netlist, Placement, PlacementArea, Point, Rect};
pub use placer::{naive_legalize, run_placer, PlacerConfig, RoundStats};
pub use stepfield::{BasisIndex, CostField, GridRect};
