use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::GpsPoint;
use crate::model::GeoPoint;

/// A dwell of one vehicle at one place.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StayPoint {
    pub vehicle_id: String,
    pub centroid: GeoPoint,
    /// Epoch seconds of the first and last fix of the dwell.
    pub arrive: i64,
    pub depart: i64,
}

impl StayPoint {
    pub fn duration_min(&self) -> f64 {
        (self.depart - self.arrive) as f64 / 60.0
    }
}

/// Extracts stay points from one vehicle's time-ordered trace.
///
/// A stay point is a maximal run of consecutive fixes that all lie within
/// `dist_threshold_m` of the run's first fix and span at least
/// `time_threshold_min`. When a run is too short the scan restarts from the
/// next fix.
pub fn detect_stay_points(trace: &[GpsPoint], dist_threshold_m: f64, time_threshold_min: f64) -> Result<Vec<StayPoint>> {
    if !(dist_threshold_m > 0.0) || !(time_threshold_min > 0.0) {
        return Err(Error::domain("stay-point thresholds must be positive"));
    }
    if let Some(w) = trace.windows(2).find(|w| w[1].timestamp < w[0].timestamp) {
        return Err(Error::domain(format!(
            "trace for {} is not sorted by timestamp ({} after {})",
            w[1].vehicle_id, w[1].timestamp, w[0].timestamp
        )));
    }
    let min_span = time_threshold_min * 60.0;
    let mut stays = Vec::new();
    let mut i = 0;
    while i < trace.len() {
        let anchor = &trace[i].location;
        let mut j = i + 1;
        while j < trace.len() && anchor.haversine_m(&trace[j].location) <= dist_threshold_m {
            j += 1;
        }
        let run = &trace[i..j];
        let span = (run[run.len() - 1].timestamp - run[0].timestamp) as f64;
        if span >= min_span {
            let n = run.len() as f64;
            let (lat, lon) = run
                .iter()
                .fold((0.0, 0.0), |(a, b), p| (a + p.location.lat, b + p.location.lon));
            stays.push(StayPoint {
                vehicle_id: run[0].vehicle_id.clone(),
                centroid: GeoPoint::new(lat / n, lon / n),
                arrive: run[0].timestamp,
                depart: run[run.len() - 1].timestamp,
            });
            i = j;
        } else {
            i += 1;
        }
    }
    Ok(stays)
}
