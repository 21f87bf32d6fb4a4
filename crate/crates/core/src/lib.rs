//! A solver for first-order formulas over decomposable theories: equality,
//! additive rationals and finite or infinite trees.

pub mod formula;
pub mod syntax;
pub mod theory;
pub mod eq;
pub mod ra;
pub mod trees;
pub mod normalize;
pub mod engine;
pub mod oracles;
pub mod games;
pub mod gen;
