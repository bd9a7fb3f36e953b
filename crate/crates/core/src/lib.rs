//! Exact finite-horizon toolkit for densities, bisection and independence
//! relations between sets of naturals, and a finite condition algebra for
//! growing independent families.

pub mod rational;
pub mod sets;
pub mod density;
pub mod relations;
pub mod constructions;
pub mod forcing;
pub mod montecarlo;
pub mod cli;
