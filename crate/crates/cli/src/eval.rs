//! `eval`: the planner against exhaustive search on small seeded instances.

use std::collections::HashSet;
use std::time::Instant;

use anyhow::anyhow;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use tripweaver_core::search::MAX_BRUTE_FORCE_CANDIDATES;
use tripweaver_core::synth::{self, CityParams};
use tripweaver_core::{
    brute_force, plan_with_candidates, route_score, simulate, GeoPoint, PlanParams, PoiNetwork, Query, UserProfile,
    VenueId,
};

use crate::commands::{load_network, print_json, to_json, write_file};
use crate::{CliError, EvalArgs, PlannerConfig};

/// Scores at or below this count as zero when forming ratios.
const ZERO_SCORE: f64 = 1e-9;

/// Venues in the synthetic city used when no network is given.
pub const DEFAULT_EVAL_VENUES: usize = 200;

/// One generated instance.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    pub user: UserProfile,
    pub query: Query,
    pub candidates: Vec<VenueId>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceReport {
    pub instance: usize,
    pub candidates: usize,
    pub start_time: u32,
    pub end_time: u32,
    pub plan_score: f64,
    pub oracle_score: f64,
    /// plan / oracle; 1.0 when the oracle scores (numerically) zero.
    pub ratio: f64,
    pub plan_visits: Vec<VenueId>,
    pub oracle_visits: Vec<VenueId>,
    pub feasible: bool,
    pub violations: Vec<String>,
    pub plan_ms: f64,
    pub oracle_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub instances: usize,
    pub mean_ratio: f64,
    pub min_ratio: f64,
    pub optimal: usize,
    pub feasible: usize,
    pub violations: usize,
    pub plan_ms_total: f64,
    pub oracle_ms_total: f64,
    pub wall_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub seed: u64,
    pub min_candidates: usize,
    pub max_candidates: usize,
    pub entries: Vec<InstanceReport>,
    pub aggregate: Aggregate,
}

/// Draws instance `index` of the series for `seed`.
///
/// A random venue is the centre; its `k - 1` nearest neighbours complete the
/// candidate set. Category weights are random, the trip starts near the centre
/// between 07:00 and 12:00 and returns there after 3 to 7 hours.
pub fn instance(network: &PoiNetwork, seed: u64, index: usize, min_k: usize, max_k: usize) -> Result<Instance, CliError> {
    if network.len() < max_k {
        return Err(CliError::usage(anyhow!(
            "network has {} venues, instances need {max_k}",
            network.len()
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (index as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    let k = rng.random_range(min_k..=max_k);
    let centre = network.venue_at(rng.random_range(0..network.len()));
    let mut by_distance: Vec<(f64, &VenueId)> = network
        .venues()
        .iter()
        .map(|v| (centre.location.haversine_km(&v.location), &v.id))
        .collect();
    by_distance.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(b.1)));
    let candidates = by_distance.into_iter().take(k).map(|(_, id)| id.clone()).collect();

    let raw: Vec<(String, f64)> = network
        .categories()
        .into_iter()
        .map(|c| (c.to_owned(), rng.random_range(0.05..1.0)))
        .collect();
    let total: f64 = raw.iter().map(|(_, w)| w).sum();
    let user = UserProfile {
        user_id: format!("eval{index:04}"),
        category_weights: raw.into_iter().map(|(c, w)| (c, w / total)).collect(),
        visited: Default::default(),
    };

    let start_time = 420 + 15 * rng.random_range(0..=20u32);
    let budget = 180 + 15 * rng.random_range(0..=16u32);
    // Up to about 500 m from the centre venue.
    let start = GeoPoint::new(
        centre.location.lat + rng.random_range(-0.0045..0.0045),
        centre.location.lon + rng.random_range(-0.0045..0.0045),
    );
    let query = Query::new(start, start, start_time, start_time + budget)?;
    Ok(Instance {
        user,
        query,
        candidates,
    })
}

fn run_instance(network: &PoiNetwork, params: &PlanParams, index: usize, inst: &Instance) -> Result<InstanceReport, CliError> {
    let t0 = Instant::now();
    let planned = plan_with_candidates(network, &inst.user, &inst.query, &inst.candidates, params)?;
    let plan_ms = t0.elapsed().as_secs_f64() * 1e3;
    let t1 = Instant::now();
    let oracle = brute_force(network, &inst.user, &inst.query, &inst.candidates, params)?;
    let oracle_ms = t1.elapsed().as_secs_f64() * 1e3;

    let mut violations = Vec::new();
    let ids = planned.itinerary.venue_ids();
    let mut seen = HashSet::new();
    if !ids.iter().all(|id| seen.insert(id)) {
        violations.push("repeated venue".to_owned());
    }
    if !ids.iter().all(|id| inst.candidates.contains(id)) {
        violations.push("venue outside the candidate set".to_owned());
    }
    let outcome = simulate(network, &inst.query, &ids, &params.schedule)?;
    let feasible = planned.feasible && outcome.is_feasible();
    match outcome.feasible() {
        Some(replayed) => {
            if replayed.visits != planned.itinerary.visits {
                violations.push("schedule differs from replay".to_owned());
            }
            let rescored = route_score(&planned.itinerary, &inst.user, network, &params.score)?;
            if (rescored - planned.itinerary.score).abs() > 1e-9 {
                violations.push(format!("reported score {} but recomputed {rescored}", planned.itinerary.score));
            }
        }
        None => violations.push("itinerary is infeasible on replay".to_owned()),
    }
    let (plan_score, oracle_score) = (planned.itinerary.score, oracle.itinerary.score);
    if plan_score > oracle_score + 1e-9 {
        violations.push(format!("plan {plan_score} beats exhaustive optimum {oracle_score}"));
    }
    let ratio = if oracle_score > ZERO_SCORE { plan_score / oracle_score } else { 1.0 };
    Ok(InstanceReport {
        instance: index,
        candidates: inst.candidates.len(),
        start_time: inst.query.start_time,
        end_time: inst.query.end_time,
        plan_score,
        oracle_score,
        ratio,
        plan_visits: ids,
        oracle_visits: oracle.itinerary.venue_ids(),
        feasible,
        violations,
        plan_ms,
        oracle_ms,
    })
}

/// Runs `instances` instances with `min_k..=max_k` candidates each.
pub fn evaluate(
    network: &PoiNetwork,
    seed: u64,
    instances: usize,
    min_k: usize,
    max_k: usize,
    params: &PlanParams,
) -> Result<EvalReport, CliError> {
    if min_k == 0 || min_k > max_k || max_k > MAX_BRUTE_FORCE_CANDIDATES {
        return Err(CliError::usage(anyhow!(
            "candidate range {min_k}..={max_k} must lie within 1..={MAX_BRUTE_FORCE_CANDIDATES}"
        )));
    }
    let wall = Instant::now();
    let generated = (0..instances)
        .map(|i| instance(network, seed, i, min_k, max_k))
        .collect::<Result<Vec<_>, _>>()?;
    let entries = generated
        .par_iter()
        .enumerate()
        .map(|(i, inst)| run_instance(network, params, i, inst))
        .collect::<Result<Vec<_>, _>>()?;
    let n = entries.len();
    let aggregate = Aggregate {
        instances: n,
        mean_ratio: if n == 0 { 1.0 } else { entries.iter().map(|e| e.ratio).sum::<f64>() / n as f64 },
        min_ratio: entries.iter().map(|e| e.ratio).fold(1.0, f64::min),
        optimal: entries.iter().filter(|e| e.ratio >= 1.0 - 1e-9).count(),
        feasible: entries.iter().filter(|e| e.feasible).count(),
        violations: entries.iter().map(|e| e.violations.len()).sum(),
        plan_ms_total: entries.iter().map(|e| e.plan_ms).sum(),
        oracle_ms_total: entries.iter().map(|e| e.oracle_ms).sum(),
        wall_ms: wall.elapsed().as_secs_f64() * 1e3,
    };
    Ok(EvalReport {
        seed,
        min_candidates: min_k,
        max_candidates: max_k,
        entries,
        aggregate,
    })
}

/// The synthetic network `eval` uses by default.
pub fn default_network(seed: u64) -> Result<PoiNetwork, CliError> {
    let city = synth::generate_city(seed, DEFAULT_EVAL_VENUES, &CityParams::default())?;
    Ok(city.truth_network()?)
}

pub(crate) fn cmd_eval(args: &EvalArgs, config: &PlannerConfig) -> Result<(), CliError> {
    config.validate()?;
    let network = match &args.network {
        Some(path) => load_network(path)?,
        None => default_network(config.seed)?,
    };
    let max_k = args.max_candidates.unwrap_or(args.candidates);
    let report = evaluate(
        &network,
        config.seed,
        args.instances,
        args.candidates,
        max_k,
        &config.plan_params(),
    )?;
    match &args.out {
        Some(path) => {
            write_file(path, &to_json(&report)?)?;
            print_json(&report.aggregate)
        }
        None => print_json(&report),
    }
}
