//! Matched-pair (double cross sum) decomposition of Vlasov kinetic dynamics.
//!
//! The crate has two layers:
//!
//! * an exact symbolic layer ([`exactpoly`], [`schouten`], [`phasealg`]) with
//!   rational-coefficient polynomials, the symmetric Schouten concomitant, its
//!   `s ⋈ n` split, the canonical Poisson algebra of fiberwise polynomials and
//!   Hamiltonian vector fields;
//! * a 1D-1V numerical layer ([`gridcore`], [`momentdyn`], [`kinetic`],
//!   [`momvlasov`]) on a periodic spatial grid and a truncated momentum grid.
//!
//! Randomized corpora for the exact identity checks come from [`corpus`]; the
//! seeded verification suites run by the command line live in [`suites`].

pub mod corpus;
pub mod error;
pub mod exactpoly;
pub mod gridcore;
pub mod kinetic;
pub mod momentdyn;
pub mod momvlasov;
pub mod phasealg;
pub mod schouten;
pub mod suites;

pub use error::{Error, Result};
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
