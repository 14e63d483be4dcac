//! Time-budgeted trip planning over a POI network built from check-in logs
//! and vehicle GPS traces.
//!
//! The pipeline runs [`ingest`] (CSV in, [`PoiNetwork`] out), then [`search::plan`],
//! which maximizes the [`scoring`] route score subject to the [`schedule`]
//! feasibility rules. [`synth`] produces deterministic data with known ground truth.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod ingest;
pub mod model;
pub mod schedule;
pub mod scoring;
pub mod search;
pub mod synth;
pub mod time;

pub use error::{Error, Result};
pub use model::{
    Endpoint, GeoPoint, Itinerary, PoiNetwork, Provenance, Query, ScheduledVisit, TransitProfile, UserProfile, Venue,
    VenueId,
};
pub use schedule::{simulate, Infeasibility, ScheduleOutcome, ScheduleParams};
pub use scoring::{attractiveness, route_score, suitability, ScoreParams};
pub use search::{brute_force, plan, plan_with_candidates, PlanParams, PlanResult, SearchParams};
