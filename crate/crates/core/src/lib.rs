//! Piecewise-analytic distributions and the square-well problems built on
//! them: the infinite well with its wall delta terms, wave-packet momentum
//! dynamics, and the finite well in the deep limit.

pub mod distcalc;
pub mod ehrenfest;
pub mod finitewell;
pub mod isw;
