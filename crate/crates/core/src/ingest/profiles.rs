//! Venue popularity and visit-time histograms, venue ranking, and per-user
//! category preferences, all derived from check-ins.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use crate::error::{Error, Result};
use crate::ingest::CheckinRecord;
use crate::model::{normalize, UserProfile, Venue, VenueId};
use crate::time::{local_hour, SLOTS};

/// Venues with their check-in derived fields filled in.
#[derive(Debug, Clone, PartialEq)]
pub struct VenueProfiles {
    pub venues: Vec<Venue>,
    /// Check-ins per venue id; venues without check-ins map to 0.
    pub checkin_counts: BTreeMap<VenueId, usize>,
    /// Check-ins referencing a venue missing from the metadata.
    pub unknown: usize,
}

pub fn build_venue_profiles(
    records: &[CheckinRecord],
    mut venues: Vec<Venue>,
    observation_days: i64,
    utc_offset_min: i32,
) -> Result<VenueProfiles> {
    if observation_days <= 0 {
        return Err(Error::domain(format!(
            "observation_days must be positive, got {observation_days}"
        )));
    }
    let index: HashMap<&VenueId, usize> = venues.iter().enumerate().map(|(i, v)| (&v.id, i)).collect();
    let mut counts = vec![0usize; venues.len()];
    let mut hours = vec![[0.0f64; SLOTS]; venues.len()];
    let mut unknown = 0;
    for rec in records {
        match index.get(&rec.venue_id) {
            Some(&i) => {
                counts[i] += 1;
                hours[i][local_hour(rec.timestamp, utc_offset_min)] += 1.0;
            }
            None => unknown += 1,
        }
    }
    let days = observation_days as f64;
    let mut checkin_counts = BTreeMap::new();
    for ((venue, count), mut hist) in venues.iter_mut().zip(counts).zip(hours) {
        normalize(&mut hist);
        venue.popularity = count as f64 / days;
        venue.visit_histogram = hist;
        checkin_counts.insert(venue.id.clone(), count);
    }
    Ok(VenueProfiles {
        venues,
        checkin_counts,
        unknown,
    })
}

/// Keeps the `top_k` venues with the most check-ins, ties broken by venue id.
/// The result is sorted by id.
pub fn rank_top_k(venues: Vec<Venue>, checkin_counts: &BTreeMap<VenueId, usize>, top_k: usize) -> Vec<Venue> {
    let count = |v: &Venue| checkin_counts.get(&v.id).copied().unwrap_or(0);
    let mut ranked = venues;
    ranked.sort_by(|a, b| count(b).cmp(&count(a)).then_with(|| a.id.cmp(&b.id)));
    ranked.truncate(top_k);
    ranked.sort_by(|a, b| a.id.cmp(&b.id));
    ranked
}

/// Laplace-smoothed category weights from per-category visit counts.
pub fn smoothed_weights(
    visits: &BTreeMap<&str, usize>,
    categories: &BTreeSet<&str>,
    smoothing: f64,
) -> BTreeMap<String, f64> {
    let total: usize = categories.iter().map(|c| visits.get(c).copied().unwrap_or(0)).sum();
    let denom = total as f64 + smoothing * categories.len() as f64;
    categories
        .iter()
        .map(|c| {
            let n = visits.get(c).copied().unwrap_or(0) as f64;
            (c.to_string(), (n + smoothing) / denom)
        })
        .collect()
}

/// One profile per user appearing in `records`, sorted by user id.
pub fn build_user_profiles(records: &[CheckinRecord], venues: &[Venue], smoothing: f64) -> Result<Vec<UserProfile>> {
    if !(smoothing > 0.0 && smoothing.is_finite()) {
        return Err(Error::domain(format!("smoothing must be positive, got {smoothing}")));
    }
    let by_id: HashMap<&VenueId, &Venue> = venues.iter().map(|v| (&v.id, v)).collect();
    let categories: BTreeSet<&str> = venues.iter().map(|v| v.category.as_str()).collect();
    let mut per_user: BTreeMap<&str, (BTreeMap<&str, usize>, BTreeSet<VenueId>)> = BTreeMap::new();
    for rec in records {
        let entry = per_user.entry(rec.user_id.as_str()).or_default();
        if let Some(v) = by_id.get(&rec.venue_id) {
            *entry.0.entry(v.category.as_str()).or_default() += 1;
            entry.1.insert(v.id.clone());
        }
    }
    Ok(per_user
        .into_iter()
        .map(|(user, (visits, visited))| UserProfile {
            user_id: user.to_owned(),
            category_weights: smoothed_weights(&visits, &categories, smoothing),
            visited,
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::GeoPoint;

    const MIDNIGHT: i64 = 1_299_974_400;

    fn venue(id: &str, category: &str) -> Venue {
        Venue::from_metadata(id, id, GeoPoint::new(0.0, 0.0), category, 0, 1440, 30.0)
    }

    fn checkin(user: &str, venue: &str, ts: i64) -> CheckinRecord {
        CheckinRecord {
            user_id: user.into(),
            venue_id: venue.into(),
            timestamp: ts,
        }
    }

    #[test]
    fn popularity_and_point_mass_histogram() {
        let records: Vec<_> = (0..10)
            .map(|i| checkin("u", "V1", MIDNIGHT + (i % 5) * 86_400 + 12 * 3600 + i * 60))
            .collect();
        let out = build_venue_profiles(&records, vec![venue("V1", "Park"), venue("V2", "Park")], 5, 0).unwrap();
        let v1 = &out.venues[0];
        assert_eq!(v1.popularity, 2.0);
        let mut expected = [0.0; SLOTS];
        expected[12] = 1.0;
        assert_eq!(v1.visit_histogram, expected);
        let v2 = &out.venues[1];
        assert_eq!(v2.popularity, 0.0);
        assert_eq!(v2.visit_histogram, [0.0; SLOTS]);
    }

    #[test]
    fn one_checkin_per_hour_is_uniform() {
        let records: Vec<_> = (0..24).map(|h| checkin("u", "V1", MIDNIGHT + h * 3600 + 120)).collect();
        let out = build_venue_profiles(&records, vec![venue("V1", "Park")], 1, 0).unwrap();
        assert_eq!(out.venues[0].popularity, 24.0);
        for h in out.venues[0].visit_histogram {
            assert!((h - 1.0 / 24.0).abs() < 1e-12);
        }
    }

    #[test]
    fn utc_offset_shifts_hours() {
        let records = [checkin("u", "V1", MIDNIGHT + 20 * 3600)];
        let out = build_venue_profiles(&records, vec![venue("V1", "Park")], 1, -480).unwrap();
        assert_eq!(out.venues[0].visit_histogram[12], 1.0);
    }

    #[test]
    fn unknown_venues_and_bad_days() {
        let records = [checkin("u", "V9", MIDNIGHT)];
        let out = build_venue_profiles(&records, vec![venue("V1", "Park")], 1, 0).unwrap();
        assert_eq!(out.unknown, 1);
        assert!(matches!(
            build_venue_profiles(&records, vec![], 0, 0),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn top_k_by_count_then_id() {
        let counts: BTreeMap<VenueId, usize> =
            [("A", 3), ("B", 5), ("C", 3), ("D", 0)].iter().map(|(k, v)| (VenueId::new(*k), *v)).collect();
        let venues = ["D", "C", "B", "A"].iter().map(|id| venue(id, "Park")).collect();
        let kept: Vec<_> = rank_top_k(venues, &counts, 2).into_iter().map(|v| v.id.0).collect();
        assert_eq!(kept, ["A", "B"]);
    }

    #[test]
    fn user_weights() {
        let venues = [venue("M", "Museum"), venue("P", "Park")];
        let records = [
            checkin("u1", "M", MIDNIGHT),
            checkin("u1", "M", MIDNIGHT + 1),
            checkin("u1", "M", MIDNIGHT + 2),
            checkin("u1", "P", MIDNIGHT + 3),
            checkin("u2", "ghost", MIDNIGHT),
        ];
        let users = build_user_profiles(&records, &venues, 1.0).unwrap();
        assert_eq!(users.len(), 2);
        let u1 = &users[0];
        assert!((u1.category_weights["Museum"] - 4.0 / 6.0).abs() < 1e-12);
        assert!((u1.category_weights["Park"] - 2.0 / 6.0).abs() < 1e-12);
        assert_eq!(u1.visited.len(), 2);
        u1.validate().unwrap();
        // No usable check-ins: uniform.
        assert!((users[1].category_weights["Museum"] - 0.5).abs() < 1e-12);
        assert!(build_user_profiles(&records, &venues, 0.0).is_err());
    }

    #[test]
    fn uniform_over_four_categories() {
        let cats: BTreeSet<&str> = ["a", "b", "c", "d"].into_iter().collect();
        let w = smoothed_weights(&BTreeMap::new(), &cats, 1.0);
        assert!(w.values().all(|x| (x - 0.25).abs() < 1e-12));
    }

    #[test]
    fn vanishing_smoothing_concentrates() {
        let cats: BTreeSet<&str> = ["a", "b"].into_iter().collect();
        let visits: BTreeMap<&str, usize> = [("a", 7)].into_iter().collect();
        let w = smoothed_weights(&visits, &cats, 1e-12);
        assert!((w["a"] - 1.0).abs() < 1e-9);
    }
}
