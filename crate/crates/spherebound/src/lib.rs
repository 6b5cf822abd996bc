//! Upper bounds for spherical codes `A(n, theta)` and kissing numbers.
//!
//! The pipeline: exact orthogonal-polynomial and zonal-matrix machinery
//! feeds a block SDP (the Delsarte LP bound or the three-point SDP bound),
//! an embedded interior-point solver produces a floating solution, and the
//! certification layer rounds it to rationals and re-verifies every
//! constraint in exact arithmetic.

pub mod certify;
pub mod cli;
pub mod codes;
pub mod exact;
pub mod orthopoly;
pub mod solver;
pub mod sosmodel;
pub mod tripoly;
pub mod zonal;
