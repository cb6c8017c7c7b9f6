//! Test-only companions to `relusat-core`: an independent feasibility
//! reference built on Fourier–Motzkin elimination, and seeded random
//! generators for networks, properties and raw linear programs.
//!
//! Nothing here is fast; everything here is simple enough to audit by eye,
//! so it can serve as ground truth when the engine is on trial.

pub mod fm;
pub mod gen;

pub use fm::{fm_feasible, lp_relaxation, Constraint, LinearSystem};
pub use gen::{random_instance, random_lp, random_property, rng};
