//! Turns the two crowd sources into a [`PoiNetwork`]: check-ins give venue
//! popularity, visit-time histograms and user preferences; vehicle traces
//! give stay times and time-sliced transit durations.

mod csv_io;
mod profiles;
mod stay_points;
mod transit;

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

pub use csv_io::{
    parse_checkins, parse_traces, parse_venues, CheckinRecord, GpsPoint, Parsed, CHECKINS_HEADER, TRACES_HEADER,
    VENUES_HEADER,
};
pub use profiles::{build_user_profiles, build_venue_profiles, rank_top_k, smoothed_weights, VenueProfiles};
pub use stay_points::{detect_stay_points, StayPoint};
pub use transit::{build_transit_matrix, percentile, trim_samples, TransitMatrix, TransitParams};

use crate::error::{Error, Result};
use crate::model::{PoiNetwork, UserProfile, Venue, VenueId};
use crate::time::SLOTS;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BuildParams {
    pub observation_days: i64,
    pub top_k: usize,
    pub smoothing: f64,
    pub transit: TransitParams,
}

impl Default for BuildParams {
    fn default() -> Self {
        Self {
            observation_days: 30,
            top_k: 1000,
            smoothing: 1.0,
            transit: TransitParams::default(),
        }
    }
}

/// Counters reported after a build.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BuildSummary {
    pub venues_in: usize,
    pub venues_kept: usize,
    pub checkins: usize,
    pub unknown_checkins: usize,
    pub users: usize,
    pub stay_points: usize,
    pub matched_stay_points: usize,
    pub transit_samples: usize,
    pub profiles: usize,
    /// Observed (ordered pair, slot) cells among kept venues.
    pub observed_cells: usize,
    /// Share of (ordered pair, slot) cells answered by the distance fallback.
    pub fallback_fraction: f64,
}

#[derive(Debug, Clone)]
pub struct BuildOutput {
    pub network: PoiNetwork,
    pub users: Vec<UserProfile>,
    pub summary: BuildSummary,
}

/// Full ingestion pipeline over already-parsed inputs.
pub fn build_network(
    venues: Vec<Venue>,
    checkins: &[CheckinRecord],
    traces: &[GpsPoint],
    params: &BuildParams,
) -> Result<BuildOutput> {
    if params.top_k == 0 {
        return Err(Error::domain("top_k must be positive"));
    }
    let venues_in = venues.len();
    let users = build_user_profiles(checkins, &venues, params.smoothing)?;
    let matrix = build_transit_matrix(traces, &venues, &params.transit)?;
    let profiled = build_venue_profiles(checkins, venues, params.observation_days, params.transit.utc_offset_min)?;
    let mut kept = rank_top_k(profiled.venues, &profiled.checkin_counts, params.top_k);
    for v in &mut kept {
        if let Some(&stay) = matrix.stay_means.get(&v.id) {
            if stay > 0.0 {
                v.mean_stay = stay;
            }
        }
    }
    let kept_ids: HashSet<&VenueId> = kept.iter().map(|v| &v.id).collect();
    let profiles: Vec<_> = matrix
        .profiles
        .iter()
        .filter(|p| kept_ids.contains(&p.from_id) && kept_ids.contains(&p.to_id))
        .cloned()
        .collect();
    let observed_cells: usize = profiles.iter().map(|p| p.observed_slots()).sum();
    let n = kept.len();
    let all_cells = n.saturating_sub(1) * n * SLOTS;
    let fallback_fraction = if all_cells == 0 {
        1.0
    } else {
        1.0 - observed_cells as f64 / all_cells as f64
    };
    let summary = BuildSummary {
        venues_in,
        venues_kept: n,
        checkins: checkins.len(),
        unknown_checkins: profiled.unknown,
        users: users.len(),
        stay_points: matrix.stay_points,
        matched_stay_points: matrix.matched_stay_points,
        transit_samples: matrix.samples,
        profiles: profiles.len(),
        observed_cells,
        fallback_fraction,
    };
    let network = PoiNetwork::new(kept, profiles, matrix.fallback_speed)?;
    Ok(BuildOutput {
        network,
        users,
        summary,
    })
}
