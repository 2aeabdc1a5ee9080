//! Signal spectra of transmitter configurations under correlated log-normal
//! shadowing, their Poisson approximation bounds, and Monte Carlo diagnostics.

pub mod corrfuncs;
pub mod error;
pub mod point;
pub mod quad;
pub mod special;
pub mod placement;
pub mod gfield;
pub mod spectrum;
pub mod bounds;
pub mod metrics;
pub mod harness;

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../README.md")]
    mod readme {}
    #[doc = include_str!("../../../book/src/library.md")]
    mod library {}
    #[doc = include_str!("../../../book/src/bounds.md")]
    mod bounds {}
    #[doc = include_str!("../../../book/src/metrics.md")]
    mod metrics {}
    #[doc = include_str!("../../../book/src/configuration.md")]
    mod configuration {}
}
