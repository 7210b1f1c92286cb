//! Shared fixtures for the benchmarks.

use tracepow_core::scenarios::{gen_spectrum, DistributionKind, DistributionTag};
use tracepow_core::Spectrum;

/// The standard spectrum for `tag` at rank `r`, seed 0.
pub fn fixture(tag: DistributionTag, r: usize) -> Spectrum {
    gen_spectrum(&DistributionKind::standard(tag, r, 0)).expect("standard spectra are valid")
}
