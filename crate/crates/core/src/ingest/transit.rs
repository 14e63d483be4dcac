//! Time-sliced transit matrix from vehicle traces.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::{detect_stay_points, GpsPoint, StayPoint};
use crate::model::{Provenance, TransitProfile, Venue, VenueId};
use crate::time::{local_hour, SLOTS};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransitParams {
    pub snap_radius_m: f64,
    /// Percentile band (low, high) kept per cell-slot.
    pub trim: (f64, f64),
    pub stay_dist_m: f64,
    pub stay_time_min: f64,
    pub utc_offset_min: i32,
    /// Speed charged in slots without enough trace evidence.
    pub default_speed_kmh: f64,
    /// Surviving samples a slot needs before its own speed estimate is used.
    pub min_speed_samples: usize,
}

impl Default for TransitParams {
    fn default() -> Self {
        Self {
            snap_radius_m: 100.0,
            trim: (5.0, 95.0),
            stay_dist_m: 200.0,
            stay_time_min: 20.0,
            utc_offset_min: 0,
            default_speed_kmh: 20.0,
            min_speed_samples: 10,
        }
    }
}

impl TransitParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.snap_radius_m > 0.0) {
            return Err(Error::domain(format!("snap radius {} must be positive", self.snap_radius_m)));
        }
        let (lo, hi) = self.trim;
        if !(0.0 <= lo && lo <= hi && hi <= 100.0) {
            return Err(Error::domain(format!("trim band ({lo}, {hi}) must satisfy 0 <= low <= high <= 100")));
        }
        if !(self.default_speed_kmh > 0.0) {
            return Err(Error::domain("default speed must be positive"));
        }
        if !(self.stay_dist_m > 0.0 && self.stay_time_min > 0.0) {
            return Err(Error::domain("stay-point thresholds must be positive"));
        }
        Ok(())
    }
}

/// Result of mining the traces.
#[derive(Debug, Clone, PartialEq)]
pub struct TransitMatrix {
    /// One profile per ordered venue pair with at least one observed slot, sorted by (from, to).
    pub profiles: Vec<TransitProfile>,
    /// Mean matched dwell duration in minutes per venue with evidence.
    pub stay_means: BTreeMap<VenueId, f64>,
    /// Per-slot speed in km/h: trace estimate where supported, default otherwise.
    pub fallback_speed: [f64; SLOTS],
    pub stay_points: usize,
    pub matched_stay_points: usize,
    /// Raw transit samples before trimming.
    pub samples: usize,
}

/// Linear-interpolation percentile of an ascending slice, `p` in [0, 100].
pub fn percentile(sorted: &[f64], p: f64) -> f64 {
    debug_assert!(!sorted.is_empty());
    let rank = p / 100.0 * (sorted.len() - 1) as f64;
    let lo = rank.floor() as usize;
    let hi = rank.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (rank - lo as f64)
}

/// Sorts `samples` and keeps those inside the `[low, high]` percentile band.
pub fn trim_samples(samples: &mut [f64], trim: (f64, f64)) -> &[f64] {
    samples.sort_by(f64::total_cmp);
    if samples.is_empty() {
        return samples;
    }
    let lo = percentile(samples, trim.0);
    let hi = percentile(samples, trim.1);
    let start = samples.partition_point(|x| *x < lo);
    let end = samples.partition_point(|x| *x <= hi);
    &samples[start..end.max(start)]
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Nearest venue within `radius_m`, ties to the smaller id. `venues` must be sorted by id.
fn snap(venues: &[Venue], stay: &StayPoint, radius_m: f64) -> Option<usize> {
    let mut best: Option<(f64, usize)> = None;
    for (i, v) in venues.iter().enumerate() {
        let d = v.location.haversine_m(&stay.centroid);
        if d <= radius_m && best.is_none_or(|(bd, _)| d < bd) {
            best = Some((d, i));
        }
    }
    best.map(|(_, i)| i)
}

#[derive(Default)]
struct VehicleSamples {
    stays: usize,
    matched: usize,
    /// (from, to, slot, minutes)
    legs: Vec<(usize, usize, usize, f64)>,
    /// (venue, minutes)
    dwells: Vec<(usize, f64)>,
}

/// Mines stay points per vehicle, snaps them to venues and aggregates
/// consecutive matched pairs into trimmed per-slot means.
///
/// A transit sample is produced only for stay points that are adjacent in a
/// vehicle's stay sequence and snap to two distinct venues. The result does
/// not depend on the order of `points`.
pub fn build_transit_matrix(points: &[GpsPoint], venues: &[Venue], params: &TransitParams) -> Result<TransitMatrix> {
    params.validate()?;
    let mut venues_sorted: Vec<&Venue> = venues.iter().collect();
    venues_sorted.sort_by(|a, b| a.id.cmp(&b.id));
    let venues_sorted: Vec<Venue> = venues_sorted.into_iter().cloned().collect();

    let mut by_vehicle: BTreeMap<&str, Vec<GpsPoint>> = BTreeMap::new();
    for p in points {
        by_vehicle.entry(p.vehicle_id.as_str()).or_default().push(p.clone());
    }
    let per_vehicle: Vec<VehicleSamples> = by_vehicle
        .into_par_iter()
        .map(|(_, mut trace)| {
            trace.sort_by(|a, b| {
                a.timestamp
                    .cmp(&b.timestamp)
                    .then(a.location.lat.total_cmp(&b.location.lat))
                    .then(a.location.lon.total_cmp(&b.location.lon))
            });
            vehicle_samples(&trace, &venues_sorted, params)
        })
        .collect::<Result<_>>()?;

    let mut cells: BTreeMap<(usize, usize), Vec<Vec<f64>>> = BTreeMap::new();
    let mut dwells: BTreeMap<usize, Vec<f64>> = BTreeMap::new();
    let (mut stay_points, mut matched, mut samples) = (0, 0, 0);
    for vs in per_vehicle {
        stay_points += vs.stays;
        matched += vs.matched;
        samples += vs.legs.len();
        for (a, b, slot, minutes) in vs.legs {
            cells.entry((a, b)).or_insert_with(|| vec![Vec::new(); SLOTS])[slot].push(minutes);
        }
        for (v, minutes) in vs.dwells {
            dwells.entry(v).or_default().push(minutes);
        }
    }

    // Trim every cell-slot, then estimate per-slot speeds from the survivors.
    let mut trimmed: BTreeMap<(usize, usize), Vec<Vec<f64>>> = BTreeMap::new();
    let mut slot_km = [0.0f64; SLOTS];
    let mut slot_minutes = [0.0f64; SLOTS];
    let mut slot_count = [0usize; SLOTS];
    for ((a, b), mut slots) in cells {
        let km = venues_sorted[a].location.haversine_km(&venues_sorted[b].location);
        let kept: Vec<Vec<f64>> = slots
            .iter_mut()
            .map(|s| trim_samples(s, params.trim).to_vec())
            .collect();
        for (slot, survivors) in kept.iter().enumerate() {
            slot_km[slot] += km * survivors.len() as f64;
            slot_minutes[slot] += survivors.iter().sum::<f64>();
            slot_count[slot] += survivors.len();
        }
        trimmed.insert((a, b), kept);
    }
    let mut fallback_speed = [params.default_speed_kmh; SLOTS];
    for s in 0..SLOTS {
        if slot_count[s] >= params.min_speed_samples.max(1) && slot_km[s] > 0.0 && slot_minutes[s] > 0.0 {
            fallback_speed[s] = slot_km[s] / (slot_minutes[s] / 60.0);
        }
    }

    let mut profiles = Vec::new();
    for ((a, b), slots) in trimmed {
        let km = venues_sorted[a].location.haversine_km(&venues_sorted[b].location);
        let mut profile = TransitProfile {
            from_id: venues_sorted[a].id.clone(),
            to_id: venues_sorted[b].id.clone(),
            slot_minutes: [0.0; SLOTS],
            slot_samples: [0; SLOTS],
            provenance: [Provenance::Fallback; SLOTS],
        };
        for (s, survivors) in slots.iter().enumerate() {
            if survivors.is_empty() {
                profile.slot_minutes[s] = (km / fallback_speed[s] * 60.0).max(1e-6);
            } else {
                profile.slot_minutes[s] = mean(survivors).max(1e-6);
                profile.slot_samples[s] = survivors.len() as u32;
                profile.provenance[s] = Provenance::Observed;
            }
        }
        if profile.observed_slots() > 0 {
            profiles.push(profile);
        }
    }

    let stay_means = dwells
        .into_iter()
        .map(|(v, mut xs)| {
            xs.sort_by(f64::total_cmp);
            (venues_sorted[v].id.clone(), mean(&xs))
        })
        .collect();

    Ok(TransitMatrix {
        profiles,
        stay_means,
        fallback_speed,
        stay_points,
        matched_stay_points: matched,
        samples,
    })
}

fn vehicle_samples(trace: &[GpsPoint], venues: &[Venue], params: &TransitParams) -> Result<VehicleSamples> {
    let stays = detect_stay_points(trace, params.stay_dist_m, params.stay_time_min)?;
    let snapped: Vec<Option<usize>> = stays.iter().map(|s| snap(venues, s, params.snap_radius_m)).collect();
    let mut out = VehicleSamples {
        stays: stays.len(),
        ..Default::default()
    };
    for (stay, venue) in stays.iter().zip(&snapped) {
        if let Some(v) = venue {
            out.matched += 1;
            out.dwells.push((*v, stay.duration_min()));
        }
    }
    for k in 1..stays.len() {
        let (Some(a), Some(b)) = (snapped[k - 1], snapped[k]) else {
            continue;
        };
        if a == b {
            continue;
        }
        let (prev, next) = (&stays[k - 1], &stays[k]);
        let minutes = (next.arrive - prev.depart) as f64 / 60.0;
        if minutes > 0.0 {
            out.legs.push((a, b, local_hour(prev.depart, params.utc_offset_min), minutes));
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::GeoPoint;

    #[test]
    fn percentile_trim_discards_outlier() {
        let mut xs = vec![10.0, 100.0, 10.0, 10.0, 10.0];
        let kept = trim_samples(&mut xs, (5.0, 95.0));
        assert_eq!(kept, &[10.0, 10.0, 10.0, 10.0]);
        assert_eq!(mean(kept), 10.0);
    }

    #[test]
    fn single_sample_survives() {
        let mut xs = vec![15.0];
        assert_eq!(trim_samples(&mut xs, (5.0, 95.0)), &[15.0]);
    }

    #[test]
    fn percentile_interpolates() {
        let xs = [10.0, 10.0, 10.0, 10.0, 100.0];
        assert!((percentile(&xs, 95.0) - 82.0).abs() < 1e-12);
        assert_eq!(percentile(&xs, 5.0), 10.0);
        assert_eq!(percentile(&[1.0, 2.0, 3.0], 50.0), 2.0);
    }

    #[test]
    fn rejects_bad_params() {
        let venues = vec![Venue::from_metadata("A", "A", GeoPoint::new(0.0, 0.0), "Park", 0, 1440, 30.0)];
        let p = TransitParams {
            snap_radius_m: 0.0,
            ..TransitParams::default()
        };
        assert!(matches!(build_transit_matrix(&[], &venues, &p), Err(Error::Domain(_))));
        let p = TransitParams {
            trim: (90.0, 10.0),
            ..TransitParams::default()
        };
        assert!(build_transit_matrix(&[], &venues, &p).is_err());
    }

    #[test]
    fn no_traces_means_no_profiles() {
        let venues = vec![Venue::from_metadata("A", "A", GeoPoint::new(0.0, 0.0), "Park", 0, 1440, 30.0)];
        let m = build_transit_matrix(&[], &venues, &TransitParams::default()).unwrap();
        assert!(m.profiles.is_empty());
        assert_eq!(m.fallback_speed, [20.0; SLOTS]);
    }
}
