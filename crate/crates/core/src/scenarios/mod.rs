//! The three example systems: static parameter estimation, polygon
//! rendezvous with per-step re-triangulation, and occupancy-grid map
//! consensus with frontier exploration.

pub mod config;
pub mod estimation;
pub mod mapping;
pub mod rendezvous;

use crate::consensus::ConsensusError;
use crate::geometry::GeometryError;
use crate::graph::GraphError;
use crate::study::StudyError;

#[derive(Debug, thiserror::Error)]
pub enum ScenarioError {
    #[error("formation degenerated at step {step}: {source}")]
    DegenerateFormation { step: usize, source: GeometryError },
    #[error("agent {0} starts on an occupied cell")]
    StartOnOccupiedCell(usize),
    #[error("bad scenario configuration: {0}")]
    Config(String),
    #[error("grid file, line {line}: {msg}")]
    GridParse { line: usize, msg: String },
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Consensus(#[from] ConsensusError),
    #[error(transparent)]
    Study(#[from] StudyError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
