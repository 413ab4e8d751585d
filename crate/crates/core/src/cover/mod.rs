//! Nets in the thick part, the nerve of the ball cover, generator
//! extraction and the rank-bound certificate.

mod cells;
mod lift;
mod nerve;
mod net;
mod probe;
mod svg;

pub use cells::{Cell, CellCover};
pub use lift::{Lift, LiftIndex};
pub use nerve::{
    build_nerve, build_nerve_with_threshold, distinct_generators, extract_generators,
    rank_bound_certificate, rank_bound_certificate_at, verify_generators, Edge, GeneratorCheck,
    NerveComplex, RankCertificate, PACKING_SLACK,
};
pub use net::{build_net, build_net_with, Net, NetOptions, NetStats};
pub use probe::{radical_inverse, ProbeSequence};
pub use svg::render_svg;

use thiserror::Error;

use crate::constants::ConstantsError;
use crate::lattice::LatticeError;
use crate::morse::MorseError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CoverError {
    #[error("flow failed for probe {probe}: {source}")]
    FlowFailure { probe: usize, source: MorseError },
    #[error(
        "coverage incomplete: {uncovered} verification probes uncovered (certificate {fraction})"
    )]
    CoverageIncomplete { fraction: f64, uncovered: usize },
    #[error("nerve has {0} components")]
    DisconnectedNerve(usize),
    #[error("{0}")]
    OutsideRegion(String),
    #[error("{0}")]
    InvalidArgument(String),
    #[error(transparent)]
    Lattice(#[from] LatticeError),
    #[error(transparent)]
    Morse(#[from] MorseError),
    #[error(transparent)]
    Constants(#[from] ConstantsError),
}
