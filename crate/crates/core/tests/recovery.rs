use std::collections::BTreeMap;

use tripweaver_core::ingest::{self, BuildParams, TransitParams};
use tripweaver_core::synth::{self, CityGroundTruth, CityParams, EPOCH_BASE};
use tripweaver_core::time::local_hour;
use tripweaver_core::{Provenance, VenueId};

fn city(seed: u64, n: usize) -> CityGroundTruth {
    synth::generate_city(seed, n, &CityParams::default()).unwrap()
}

fn venues(city: &CityGroundTruth) -> Vec<tripweaver_core::Venue> {
    ingest::parse_venues(city.venues_csv().as_bytes()).unwrap().records
}

#[test]
fn noiseless_scripted_trip_recovers_true_transit() {
    let city = city(42, 30);
    let (a, b) = (VenueId::new("V0004"), VenueId::new("V0009"));
    // 07:10 local; the generator runs at UTC offset 0.
    let depart = EPOCH_BASE + (7 * 60 + 10) * 60;
    let csv = synth::scripted_trip(&city, &a, &b, depart, 0.0, 1).unwrap();
    let points = ingest::parse_traces(csv.as_bytes()).unwrap().records;
    let matrix = ingest::build_transit_matrix(&points, &venues(&city), &TransitParams::default()).unwrap();

    assert_eq!(matrix.profiles.len(), 1);
    let p = &matrix.profiles[0];
    assert_eq!((&p.from_id, &p.to_id), (&a, &b));
    assert_eq!(p.slot_samples[7], 1);
    assert_eq!(p.provenance[7], Provenance::Observed);
    assert_eq!(p.observed_slots(), 1);
    // Trace clocks tick in whole seconds.
    let truth = city.true_transit(&a, &b, 7).unwrap();
    let expected = (truth * 60.0).round() / 60.0;
    assert!((p.slot_minutes[7] - expected).abs() < 1e-9, "{} vs {expected}", p.slot_minutes[7]);
}

#[test]
fn no_traces_leaves_everything_to_the_fallback() {
    let city = city(3, 20);
    let out = ingest::build_network(venues(&city), &[], &[], &BuildParams::default()).unwrap();
    assert!(out.network.transit_profiles().is_empty());
    assert_eq!(out.summary.fallback_fraction, 1.0);
    let default = TransitParams::default().default_speed_kmh;
    assert!(out.network.fallback_speed().iter().all(|s| *s == default));
}

#[test]
fn trace_order_does_not_matter() {
    let city = city(5, 40);
    let csv = synth::generate_traces(&city, 8, 10, 10.0, 6).unwrap();
    let points = ingest::parse_traces(csv.as_bytes()).unwrap().records;
    let vs = venues(&city);
    let params = TransitParams::default();
    let forward = ingest::build_transit_matrix(&points, &vs, &params).unwrap();
    let mut shuffled = points.clone();
    shuffled.reverse();
    shuffled.rotate_left(points.len() / 3);
    let again = ingest::build_transit_matrix(&shuffled, &vs, &params).unwrap();
    assert!(forward.samples > 0);
    assert_eq!(forward.profiles, again.profiles);
    assert_eq!(forward.fallback_speed, again.fallback_speed);
    assert_eq!(forward.stay_means, again.stay_means);
}

#[test]
fn popularity_is_checkins_per_day() {
    let city = city(11, 40);
    let days = 12;
    let csv = synth::generate_checkins(&city, 60, 15, days as u32, 12).unwrap();
    let records = ingest::parse_checkins(csv.as_bytes()).unwrap().records;
    let mut counts: BTreeMap<&VenueId, usize> = BTreeMap::new();
    for r in &records {
        *counts.entry(&r.venue_id).or_default() += 1;
    }
    let params = BuildParams {
        observation_days: days,
        ..BuildParams::default()
    };
    let out = ingest::build_network(venues(&city), &records, &[], &params).unwrap();
    assert_eq!(out.network.len(), 40);
    for v in out.network.venues() {
        let n = counts.get(&v.id).copied().unwrap_or(0);
        assert_eq!(v.popularity, n as f64 / days as f64, "{}", v.id);
    }
}

#[test]
fn noon_peaked_venue_draws_lunch_checkins() {
    let city = city(42, 200);
    let csv = synth::generate_checkins(&city, 500, 20, 30, 44).unwrap();
    let records = ingest::parse_checkins(csv.as_bytes()).unwrap().records;
    let at_lunch_spot: Vec<_> = records.iter().filter(|r| r.venue_id == city.lunch_id).collect();
    let around_noon = at_lunch_spot
        .iter()
        .filter(|r| (11..=13).contains(&local_hour(r.timestamp, city.utc_offset_min)))
        .count();
    assert!(at_lunch_spot.len() >= 50, "only {} check-ins", at_lunch_spot.len());
    assert!(
        around_noon * 10 >= at_lunch_spot.len() * 6,
        "{around_noon} of {} in hours 11-13",
        at_lunch_spot.len()
    );
}

#[test]
fn recovered_cells_match_ground_truth() {
    let city = city(42, 200);
    let csv = synth::generate_traces(&city, 100, 60, 20.0, 43).unwrap();
    let points = ingest::parse_traces(csv.as_bytes()).unwrap().records;
    let matrix = ingest::build_transit_matrix(&points, &venues(&city), &TransitParams::default()).unwrap();
    let mut checked = 0;
    for p in &matrix.profiles {
        for slot in 0..24 {
            if p.slot_samples[slot] >= 20 {
                let truth = city.true_transit(&p.from_id, &p.to_id, slot).unwrap();
                let err = (p.slot_minutes[slot] - truth).abs() / truth;
                assert!(err <= 0.10, "{}->{} slot {slot}: {} vs {truth}", p.from_id, p.to_id, p.slot_minutes[slot]);
                checked += 1;
            }
        }
    }
    assert!(checked >= 20, "only {checked} cells had 20 samples");
}
