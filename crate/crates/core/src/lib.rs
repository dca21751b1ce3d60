//! Two-qubit Raman-coupled quantum thermal machines.

pub mod classifier;
pub mod cycles;
pub mod error;
pub mod io;
pub mod spectrum;
pub mod strokes;
pub mod sweep;

pub use classifier::{classify, performance, KappaVariant, OperationalMode, Performance};
pub use cycles::{run_cycle, CycleKind, CyclePoint, CycleRecord};
pub use error::{Error, Result};
pub use spectrum::{build_spectrum, Equilibrium, LeftQubit, MachineParams, Spectrum};
