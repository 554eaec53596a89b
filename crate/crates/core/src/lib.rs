//! Mutual information region of a finite joint distribution, the extended
//! Gray-Wyner rate regions built on it, and the information quantities that
//! appear as its extreme points.
//!
//! The central object is the set of triples
//! `(I(X;U), I(Y;U), I(X,Y;U))` over all channels `p(u|x,y)`. Most of the
//! crate is machinery to bound that set from inside (achieving channels) and
//! outside (support planes and valid inequalities).

pub mod channel;
pub mod error;
pub mod graph;
mod lp;
pub mod opt;
pub mod prob;
pub mod quantities;
pub mod region;

pub use channel::{Channel, TriplePmf};
pub use error::{Error, Result};
pub use prob::JointPmf;
pub use region::point::MiPoint;
