//! Criticality metrics for recorded road traffic, consolidated into a
//! per-scene Kiviat fingerprint.
//!
//! Tracks are parsed from CSV ([`tracks_csv`]) into a [`scene::Scenario`].
//! Each scene is evaluated by a [`framework::Registry`] of metrics
//! ([`metrics::standard_registry`]) covering traffic quality, intersection
//! metrics, the safety potential and time to collision. The normalised
//! values form a [`fingerprint::Fingerprint`] whose area scores the scene.

pub mod cli;
pub mod config;
pub mod fingerprint;
pub mod framework;
pub mod geometry;
pub mod metrics;
pub mod pairwise;
pub mod report;
pub mod safety_potential;
pub mod scene;
pub mod svg;
pub mod synthetic;
pub mod tracks_csv;
pub mod traffic_quality;

pub use config::EvaluationConfig;
pub use fingerprint::{build_fingerprint, kiviat_area, AxisLayout, Fingerprint};
pub use framework::{Evaluator, Metric, Registry, SceneEvaluation};
pub use geometry::{Polygon, Vec2};
pub use metrics::standard_registry;
pub use scene::{AgentId, AgentState, Scenario, Scene, Track};
