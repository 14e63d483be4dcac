//! Randomized invariant checks over small generated networks.
//!
//! Each check runs a deterministic proptest runner for the requested number
//! of cases and reports how many cases actually exercised the property (for
//! example, how many random orders were feasible), so callers can reject a
//! vacuous pass.

#![allow(dead_code)]

use std::collections::BTreeMap;
use std::sync::atomic::{AtomicUsize, Ordering};

use proptest::prelude::*;
use proptest::test_runner::{Config, RngAlgorithm, TestCaseError, TestRng, TestRunner};
use tripweaver_core::ingest::{build_venue_profiles, CheckinRecord};
use tripweaver_core::time::SLOTS;
use tripweaver_core::{
    attractiveness, brute_force, plan_with_candidates, route_score, simulate, GeoPoint, Itinerary, PlanParams,
    PoiNetwork, Provenance, Query, ScheduleParams, ScoreParams, TransitProfile, UserProfile, Venue, VenueId,
};

pub const CATEGORIES: [&str; 3] = ["Cafe", "Museum", "Park"];

/// Outcome of one property run.
#[derive(Debug, Clone, Copy)]
pub struct Coverage {
    pub cases: u32,
    /// Cases in which the property's conclusion was actually checked.
    pub exercised: usize,
}

pub type Check = fn(u32) -> Result<Coverage, String>;

/// Every property, by name.
pub const ALL: [(&str, Check); 11] = [
    ("schedule monotonicity", schedule_monotonicity),
    ("operating-hour compliance", operating_hours),
    ("budget compliance", budget_compliance),
    ("prefix stability", prefix_stability),
    ("suitability scale invariance", suitability_scale_invariance),
    ("attractiveness monotonicity", attractiveness_monotonicity),
    ("histogram normalization", histogram_normalization),
    ("transit slot constancy", transit_slot_constancy),
    ("route score additivity", route_score_additivity),
    ("plan feasibility", plan_feasibility),
    ("plan never beats exhaustive search", plan_within_oracle),
];

fn runner(cases: u32) -> TestRunner {
    let config = Config {
        cases,
        failure_persistence: None,
        ..Config::default()
    };
    TestRunner::new_with_rng(config, TestRng::deterministic_rng(RngAlgorithm::ChaCha))
}

fn run<S: Strategy>(
    cases: u32,
    strategy: S,
    test: impl Fn(S::Value) -> Result<bool, TestCaseError>,
) -> Result<Coverage, String>
where
    S::Value: std::fmt::Debug,
{
    let exercised = AtomicUsize::new(0);
    runner(cases)
        .run(&strategy, |value| {
            if test(value)? {
                exercised.fetch_add(1, Ordering::Relaxed);
            }
            Ok(())
        })
        .map_err(|e| e.to_string())?;
    Ok(Coverage {
        cases,
        exercised: exercised.into_inner(),
    })
}

#[derive(Debug, Clone)]
pub struct Scenario {
    pub network: PoiNetwork,
    pub query: Query,
    pub order: Vec<VenueId>,
    pub user: UserProfile,
    pub schedule: ScheduleParams,
}

fn point() -> impl Strategy<Value = GeoPoint> {
    (37.70..37.76f64, -122.46..-122.40f64).prop_map(|(lat, lon)| GeoPoint::new(lat, lon))
}

fn histogram() -> impl Strategy<Value = [f64; SLOTS]> {
    prop_oneof![
        1 => Just([0.0; SLOTS]),
        4 => prop::collection::vec(0.0..1.0f64, SLOTS).prop_map(|h| {
            let mut out = [0.0; SLOTS];
            out.copy_from_slice(&h);
            out
        }),
    ]
}

fn venue(i: usize) -> impl Strategy<Value = Venue> {
    (0u32..1380)
        .prop_flat_map(|open| (Just(open), open + 60..=1440))
        .prop_flat_map(move |(open, close)| {
            (
                point(),
                0..CATEGORIES.len(),
                0.0..50.0f64,
                5.0..90.0f64,
                histogram(),
                Just((open, close)),
            )
        })
        .prop_map(move |(location, cat, popularity, stay, hist, (open, close))| {
            let mut v = Venue::from_metadata(format!("V{i}"), format!("venue {i}"), location, CATEGORIES[cat], open, close, stay);
            v.popularity = popularity;
            v.visit_histogram = hist;
            v.normalize_histogram();
            v
        })
}

fn venues(max: usize) -> impl Strategy<Value = Vec<Venue>> {
    (1..=max).prop_flat_map(|n| (0..n).map(venue).collect::<Vec<_>>())
}

/// Observed profiles on a few random ordered pairs and slots.
fn profiles(n: usize) -> impl Strategy<Value = Vec<TransitProfile>> {
    prop::collection::vec((0..n, 0..n, any::<u32>(), 1.0..60.0f64, 0.5..2.0f64), 0..6).prop_map(|raw| {
        let mut by_pair = BTreeMap::new();
        for (a, b, mask, minutes, slope) in raw {
            if a == b {
                continue;
            }
            let mut provenance = [Provenance::Fallback; SLOTS];
            let mut samples = [0u32; SLOTS];
            let mut slot_minutes = [minutes; SLOTS];
            for s in 0..SLOTS {
                if mask & (1 << s) != 0 {
                    provenance[s] = Provenance::Observed;
                    samples[s] = 1 + (mask >> 24) % 7;
                    slot_minutes[s] = minutes * (1.0 + slope * (s % 3) as f64 / 3.0);
                }
            }
            by_pair.insert(
                (a, b),
                TransitProfile {
                    from_id: VenueId::new(format!("V{a}")),
                    to_id: VenueId::new(format!("V{b}")),
                    slot_minutes,
                    slot_samples: samples,
                    provenance,
                },
            );
        }
        by_pair.into_values().collect()
    })
}

fn speeds() -> impl Strategy<Value = [f64; SLOTS]> {
    prop::collection::vec(8.0..60.0f64, SLOTS).prop_map(|s| {
        let mut out = [0.0; SLOTS];
        out.copy_from_slice(&s);
        out
    })
}

pub fn network(max_venues: usize) -> impl Strategy<Value = PoiNetwork> {
    venues(max_venues).prop_flat_map(|vs| {
        let n = vs.len();
        (Just(vs), profiles(n), speeds())
            .prop_map(|(vs, ps, sp)| PoiNetwork::new(vs, ps, sp).expect("generated network is valid"))
    })
}

fn user() -> impl Strategy<Value = UserProfile> {
    prop::collection::vec(0.01..1.0f64, CATEGORIES.len()).prop_map(|raw| {
        let total: f64 = raw.iter().sum();
        UserProfile {
            user_id: "u".into(),
            category_weights: CATEGORIES.iter().zip(raw).map(|(c, w)| (c.to_string(), w / total)).collect(),
            visited: Default::default(),
        }
    })
}

fn query() -> impl Strategy<Value = Query> {
    (point(), point(), 0u32..1380)
        .prop_flat_map(|(a, b, start)| (Just(a), Just(b), Just(start), start + 1..=1440))
        .prop_map(|(a, b, start, end)| Query::new(a, b, start, end).expect("valid query"))
}

pub fn scenario(max_venues: usize) -> impl Strategy<Value = Scenario> {
    network(max_venues).prop_flat_map(|network| {
        let ids: Vec<VenueId> = network.venues().iter().map(|v| v.id.clone()).collect();
        let n = ids.len();
        (
            Just(network),
            query(),
            prop::sample::subsequence(ids, 0..=n).prop_shuffle(),
            user(),
            0.0..120.0f64,
        )
            .prop_map(|(network, query, order, user, max_wait)| Scenario {
                network,
                query,
                order,
                user,
                schedule: ScheduleParams { max_wait },
            })
    })
}

fn feasible(s: &Scenario, order: &[VenueId]) -> Result<Option<Itinerary>, TestCaseError> {
    let outcome = simulate(&s.network, &s.query, order, &s.schedule).map_err(|e| TestCaseError::fail(e.to_string()))?;
    Ok(outcome.feasible())
}

/// The random order thinned to a feasible one: each venue is kept when the
/// order stays feasible with it appended.
fn thinned(s: &Scenario) -> Result<Option<(Vec<VenueId>, Itinerary)>, TestCaseError> {
    let mut best = match feasible(s, &[])? {
        Some(it) => (Vec::new(), it),
        None => return Ok(None),
    };
    for id in &s.order {
        let mut next = best.0.clone();
        next.push(id.clone());
        if let Some(it) = feasible(s, &next)? {
            best = (next, it);
        }
    }
    Ok(Some(best))
}

const EPS: f64 = 1e-9;

pub fn schedule_monotonicity(cases: u32) -> Result<Coverage, String> {
    run(cases, scenario(6), |s| {
        let Some((_, it)) = thinned(&s)? else {
            return Ok(false);
        };
        let mut clock = f64::from(s.query.start_time);
        for v in &it.visits {
            let stay = s.network.venue(&v.venue_id).unwrap().mean_stay;
            prop_assert!(v.arrival >= clock - EPS, "arrival {} before {}", v.arrival, clock);
            prop_assert!(v.arrival <= v.visit_start);
            prop_assert!((v.visit_start - (v.arrival + v.wait)).abs() <= EPS);
            prop_assert!((v.depart - (v.visit_start + stay)).abs() <= EPS);
            prop_assert!(v.wait >= 0.0 && v.wait <= s.schedule.max_wait + EPS);
            clock = v.depart;
        }
        prop_assert!(it.final_arrival >= clock - EPS);
        Ok(!it.visits.is_empty())
    })
}

pub fn operating_hours(cases: u32) -> Result<Coverage, String> {
    run(cases, scenario(6), |s| {
        let Some((_, it)) = thinned(&s)? else {
            return Ok(false);
        };
        for v in &it.visits {
            let venue = s.network.venue(&v.venue_id).unwrap();
            prop_assert!(v.visit_start >= f64::from(venue.open_min) - EPS);
            prop_assert!(v.depart <= f64::from(venue.close_min) + EPS);
        }
        Ok(!it.visits.is_empty())
    })
}

pub fn budget_compliance(cases: u32) -> Result<Coverage, String> {
    run(cases, scenario(6), |s| {
        let Some((_, it)) = thinned(&s)? else {
            return Ok(false);
        };
        prop_assert!(it.final_arrival <= f64::from(s.query.end_time) + EPS);
        if let Some(first) = it.visits.first() {
            prop_assert!(first.arrival >= f64::from(s.query.start_time));
        }
        Ok(true)
    })
}

pub fn prefix_stability(cases: u32) -> Result<Coverage, String> {
    run(cases, (scenario(6), any::<prop::sample::Index>()), |(s, cut)| {
        let Some((order, full)) = thinned(&s)? else {
            return Ok(false);
        };
        let k = cut.index(order.len() + 1);
        // The prefix may still fail on its own return leg; its visits cannot differ.
        let Some(prefix) = feasible(&s, &order[..k])? else {
            return Ok(false);
        };
        prop_assert_eq!(&prefix.visits[..], &full.visits[..k]);
        Ok(k > 0)
    })
}

pub fn suitability_scale_invariance(cases: u32) -> Result<Coverage, String> {
    let strategy = (venue(0), 1e-3..1e3f64, 0.0..1.0f64, 1.0..600.0f64);
    run(cases, strategy, |(v, c, at, len)| {
        let open = f64::from(v.open_min);
        let close = f64::from(v.close_min);
        let start = open + at * (close - open - 1.0);
        let end = (start + len).min(close);
        let base = tripweaver_core::suitability(&v, start, end).map_err(|e| TestCaseError::fail(e.to_string()))?;
        let mut scaled = v.clone();
        scaled.visit_histogram.iter_mut().for_each(|h| *h *= c);
        let after = tripweaver_core::suitability(&scaled, start, end).map_err(|e| TestCaseError::fail(e.to_string()))?;
        prop_assert!((0.0..=1.0).contains(&base));
        prop_assert!((base - after).abs() <= 1e-12, "{base} vs {after} at scale {c}");
        Ok(v.visit_histogram.iter().any(|h| *h > 0.0))
    })
}

pub fn attractiveness_monotonicity(cases: u32) -> Result<Coverage, String> {
    let strategy = (network(6), user(), any::<prop::sample::Index>(), 0.0..100.0f64, 0.0..=1.0f64);
    run(cases, strategy, |(net, user, pick, extra, alpha)| {
        let params = ScoreParams { alpha };
        let i = pick.index(net.len());
        let before = attractiveness(&user, net.venue_at(i), &net, &params);
        let mut venues = net.venues().to_vec();
        venues[i].popularity += extra;
        let raised = PoiNetwork::new(venues, net.transit_profiles().to_vec(), *net.fallback_speed()).unwrap();
        let after = attractiveness(&user, raised.venue_at(i), &raised, &params);
        prop_assert!((0.0..=1.0).contains(&before) && (0.0..=1.0).contains(&after));
        prop_assert!(after >= before - 1e-12, "{before} -> {after}");
        Ok(extra > 0.0)
    })
}

pub fn histogram_normalization(cases: u32) -> Result<Coverage, String> {
    let checkins = prop::collection::vec((0usize..4, 0i64..86_400 * 3), 0..60);
    run(cases, (venues(4), checkins, -720i32..=720), |(vs, raw, offset)| {
        let n = vs.len();
        let records: Vec<CheckinRecord> = raw
            .into_iter()
            .map(|(v, t)| CheckinRecord {
                user_id: "u".into(),
                venue_id: VenueId::new(format!("V{}", v % n)),
                timestamp: 1_300_000_000 + t,
            })
            .collect();
        let profiled = build_venue_profiles(&records, vs, 3, offset).map_err(|e| TestCaseError::fail(e.to_string()))?;
        let mut checked = false;
        for v in &profiled.venues {
            let total: f64 = v.visit_histogram.iter().sum();
            prop_assert!(v.visit_histogram.iter().all(|h| *h >= 0.0));
            if profiled.checkin_counts[&v.id] > 0 {
                prop_assert!((total - 1.0).abs() <= 1e-9, "sum {total}");
                checked = true;
            } else {
                prop_assert_eq!(total, 0.0);
            }
        }
        Ok(checked)
    })
}

pub fn transit_slot_constancy(cases: u32) -> Result<Coverage, String> {
    use tripweaver_core::Endpoint;
    let strategy = (network(5), any::<prop::sample::Index>(), any::<prop::sample::Index>(), 0u32..24, 0.0..60.0f64, 0.0..60.0f64);
    run(cases, strategy, |(net, a, b, slot, x, y)| {
        let from = Endpoint::Venue(net.venue_at(a.index(net.len())).id.clone());
        let to = Endpoint::Venue(net.venue_at(b.index(net.len())).id.clone());
        let base = f64::from(slot * 60);
        let t1 = net.transit_duration(&from, &to, base + x).unwrap();
        let t2 = net.transit_duration(&from, &to, base + y).unwrap();
        prop_assert_eq!(t1.to_bits(), t2.to_bits());
        if from != to {
            prop_assert!(t1 > 0.0);
        }
        Ok(from != to)
    })
}

pub fn route_score_additivity(cases: u32) -> Result<Coverage, String> {
    run(cases, (scenario(6), 0.0..=1.0f64, any::<prop::sample::Index>()), |(s, alpha, drop)| {
        let Some((_, it)) = thinned(&s)? else {
            return Ok(false);
        };
        if it.visits.is_empty() {
            return Ok(false);
        }
        let params = ScoreParams { alpha };
        let total = route_score(&it, &s.user, &s.network, &params).unwrap();
        let k = drop.index(it.visits.len());
        let mut rest = it.clone();
        let removed = rest.visits.remove(k);
        let venue = s.network.venue(&removed.venue_id).unwrap();
        let term = attractiveness(&s.user, venue, &s.network, &params)
            * tripweaver_core::suitability(venue, removed.visit_start, removed.depart).unwrap();
        let without = route_score(&rest, &s.user, &s.network, &params).unwrap();
        prop_assert!((total - without - term).abs() <= 1e-9);
        prop_assert!(total <= it.visits.len() as f64 + 1e-9);
        Ok(true)
    })
}

fn plan_params(s: &Scenario) -> PlanParams {
    PlanParams {
        schedule: s.schedule,
        ..PlanParams::default()
    }
}

pub fn plan_feasibility(cases: u32) -> Result<Coverage, String> {
    run(cases, scenario(7), |s| {
        let params = plan_params(&s);
        let ids: Vec<VenueId> = s.network.venues().iter().map(|v| v.id.clone()).collect();
        let planned = plan_with_candidates(&s.network, &s.user, &s.query, &ids, &params)
            .map_err(|e| TestCaseError::fail(e.to_string()))?;
        let order = planned.itinerary.venue_ids();
        let mut unique = order.clone();
        unique.sort();
        unique.dedup();
        prop_assert_eq!(unique.len(), order.len(), "repeated venue");
        match feasible(&s, &order)? {
            Some(replayed) => {
                prop_assert!(planned.feasible);
                prop_assert_eq!(&replayed.visits, &planned.itinerary.visits);
                let score = route_score(&replayed, &s.user, &s.network, &params.score).unwrap();
                prop_assert!((score - planned.itinerary.score).abs() <= 1e-9);
            }
            None => {
                prop_assert!(!planned.feasible && order.is_empty(), "infeasible plan must be the empty route");
            }
        }
        Ok(planned.feasible && !order.is_empty())
    })
}

pub fn plan_within_oracle(cases: u32) -> Result<Coverage, String> {
    run(cases, scenario(6), |s| {
        let params = plan_params(&s);
        let ids: Vec<VenueId> = s.network.venues().iter().map(|v| v.id.clone()).collect();
        let planned = plan_with_candidates(&s.network, &s.user, &s.query, &ids, &params)
            .map_err(|e| TestCaseError::fail(e.to_string()))?;
        let oracle = brute_force(&s.network, &s.user, &s.query, &ids, &params).map_err(|e| TestCaseError::fail(e.to_string()))?;
        prop_assert!(planned.itinerary.score <= oracle.itinerary.score + 1e-9);
        prop_assert_eq!(planned.feasible, oracle.feasible);
        if ids.len() == 1 {
            prop_assert!((planned.itinerary.score - oracle.itinerary.score).abs() <= 1e-12);
        }
        Ok(oracle.itinerary.score > 0.0)
    })
}
