//! Dipole-conserving spin-1 chains under random automaton circuits.
//!
//! States live on sites `1..=L` with charges in `{-1, 0, +1}`. Every gate
//! conserves the total charge `Q` and the dipole moment `P`, so an isolated
//! charge is immobile and spreads only by emitting dipoles.
//!
//! - [`chain`]: states, sector labels, height fields, charge profiles.
//! - [`gates`]: gate classes and random gate application.
//! - [`automaton`] and [`ensemble`]: reproducible Monte Carlo ensembles.
//! - [`sector`]: exact sector enumeration and Krylov components.
//! - [`maxent`]: maximum-entropy site distributions.
//! - [`blocks`]: the height-field block engine and two-tier piston.
//! - [`analytic`]: closed-form late-time profiles.
//! - [`harness`]: experiment specs, pipelines, sweeps and fits.
//!
//! ```
//! use fracton::automaton::{run_ensemble, EvolutionConfig};
//! use fracton::chain::SpinState;
//!
//! let start = SpinState::with_charges(15, &[8]).unwrap();
//! let result = run_ensemble(&EvolutionConfig::new(start, 3).steps(50).realizations(8)).unwrap();
//! assert!((result.final_profile().total_charge() - 1.0).abs() < 1e-12);
//! ```

pub mod analytic;
pub mod automaton;
pub mod blocks;
pub mod chain;
pub mod ensemble;
pub mod error;
pub mod gates;
pub mod harness;
pub mod maxent;
pub mod quad;
pub mod rng;
pub mod sector;

pub use error::{Error, Result};

// Guide chapters run as doctests so their snippets track the API.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/chain.md")]
    mod chain {}
    #[doc = include_str!("../../../book/src/gates.md")]
    mod gates {}
    #[doc = include_str!("../../../book/src/automaton.md")]
    mod automaton {}
    #[doc = include_str!("../../../book/src/sectors.md")]
    mod sectors {}
    #[doc = include_str!("../../../book/src/maxent.md")]
    mod maxent {}
    #[doc = include_str!("../../../book/src/blocks.md")]
    mod blocks {}
    #[doc = include_str!("../../../book/src/analytic.md")]
    mod analytic {}
    #[doc = include_str!("../../../book/src/experiments.md")]
    mod experiments {}
}
