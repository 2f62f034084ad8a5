//! Toolkit for resilient multi-robot consensus over Voronoi communication graphs.
//!
//! The pipeline: 2D agent positions are triangulated ([`geometry`]), the
//! triangulation edges become a communication graph that can be densified by
//! connecting k-hop neighbors ([`graph`]), the graph's (r,s)-robustness is
//! verified exactly by exhaustive subset enumeration ([`robustness`]), and
//! W-MSR consensus runs on top with configurable adversaries ([`consensus`]).
//! [`scenarios`] wires these into parameter-estimation, rendezvous, and
//! occupancy-map simulations; [`study`] runs batch robustness statistics over
//! generated formations.

pub mod consensus;
pub mod geometry;
pub mod graph;
pub mod robustness;
pub mod scenarios;
pub mod seeds;
pub mod study;
