pub mod approx;
pub mod asymptotic;
pub mod checks;
pub mod frl;
pub mod hull;
pub mod point;
pub mod polytope;
pub mod rates;
