//! Reference protocols for the collision-detecting beeping models, with
//! brute-force output verifiers.

pub mod coloring;
pub mod leader;
pub mod mis;
pub mod run;
pub mod two_hop;
pub mod verify;

pub use coloring::ColoringProtocol;
pub use leader::{LeaderElection, LeaderOutput};
pub use mis::MisProtocol;
pub use run::{run_app, AppKind, AppOutputs, AppRun, AppRunError, Execution};
pub use two_hop::TwoHopColoring;
pub use verify::{verify_coloring, verify_leader, verify_mis};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AppError {
    #[error("palette of {palette} colors is too small for maximum degree {max_degree}")]
    PaletteTooSmall { palette: usize, max_degree: usize },
    #[error("bound must be at least 1")]
    ZeroBound,
}

/// `⌈log₂ n⌉`, at least 1.
pub fn log2_ceil(n: usize) -> usize {
    (usize::BITS - n.saturating_sub(1).leading_zeros()).max(1) as usize
}

#[cfg(test)]
mod tests {
    use super::log2_ceil;

    #[test]
    fn log2_ceil_values() {
        assert_eq!(log2_ceil(1), 1);
        assert_eq!(log2_ceil(2), 1);
        assert_eq!(log2_ceil(3), 2);
        assert_eq!(log2_ceil(16), 4);
        assert_eq!(log2_ceil(17), 5);
    }
}
