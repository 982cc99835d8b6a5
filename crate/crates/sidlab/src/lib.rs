//! sidlab: a numerical laboratory for self-induced decoherence and the
//! quantum-to-classical transition in phase space.
//!
//! The pipeline runs continuous-spectrum kernel models end to end:
//! spectral discretization, Liouvillian evolution of mean values, the
//! decohered diagonal state, the pointer-basis change, Wigner symbols
//! with star products, and the small-hbar classical distribution over
//! phase space, each stage instrumented with residual diagnostics.

pub mod algebra;
pub mod error;
pub mod diagonal;
pub mod evolution;
pub mod grid;
pub(crate) mod linalg;

pub use error::{Error, Result};
