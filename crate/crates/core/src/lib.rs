//! Sojourn-time laws of drifted Brownian meanders, excursions, bridges and
//! free drifted Brownian motion, with two independent numerical checks.
//!
//! For `B^μ(r) = B(r) + μr` the occupation time of the window `[l, t]` is
//!
//! ```text
//! Γ^μ_{l,t} = ∫_l^t 1{B^μ(s) ≥ 0} ds.
//! ```
//!
//! * [`laws`] evaluates the distribution of `Γ` in closed form or by
//!   quadrature, returning a [`MixedSojournLaw`] (density plus atoms).
//! * [`sim`] simulates the conditioned paths and measures `Γ` directly.
//! * [`stats`] compares the two with Kolmogorov–Smirnov tests and
//!   Wilson intervals for the atom.
//! * [`fkpde`] solves the Feynman–Kac equation for `E[e^{−βΓ}]` and
//!   compares with the Laplace transform of the law.
//! * [`quad`] is the adaptive Gauss–Kronrod engine behind every integral.
//!
//! ```
//! use meander_sojourn::laws::meander_limit_law;
//!
//! let law = meander_limit_law(1.0, 4.0).unwrap();
//! assert_eq!(law.atom_mass(), 0.5);
//! let total = law.total_mass().unwrap();
//! assert!((total - 1.0).abs() < 1e-8);
//! ```

use thiserror::Error;

pub mod fkpde;
pub mod laws;
pub mod mixed;
pub mod quad;
pub mod sim;
pub mod special;
pub mod stats;

pub use laws::{LawError, LawKind, ProcessParams};
pub use mixed::{Atom, MixedSojournLaw};
pub use quad::{QuadError, QuadResult};
pub use sim::{CampaignLaw, SamplePath, SimConfig, SimError};
pub use stats::{EmpiricalLaw, GofReport, StatsError};

/// Version of this library.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Any error raised by this crate.
#[derive(Clone, Debug, Error, PartialEq)]
pub enum Error {
    #[error(transparent)]
    Law(#[from] LawError),
    #[error(transparent)]
    Quad(#[from] QuadError),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Stats(#[from] StatsError),
    #[error(transparent)]
    Fk(#[from] fkpde::FkError),
}

impl Error {
    /// Whether the error comes from bad input rather than a numerical failure.
    pub fn is_usage(&self) -> bool {
        matches!(
            self,
            Error::Law(LawError::Domain(_)) | Error::Sim(SimError::Config(_)) | Error::Sim(SimError::Law(LawError::Domain(_)))
        ) || matches!(self, Error::Fk(fkpde::FkError::InvalidGrid(_)))
    }
}
