//! `gen-data`, `build-network` and `plan`.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, Context};
use serde::{Deserialize, Serialize};
use tripweaver_core::ingest::{self, BuildOutput};
use tripweaver_core::synth::{self, CityParams};
use tripweaver_core::time::{format_hhmm, parse_hhmm};
use tripweaver_core::{attractiveness, suitability, GeoPoint, PoiNetwork, Query, UserProfile};

use crate::{geojson, BuildArgs, CliError, GenDataArgs, PlanArgs, PlannerConfig};

/// In-memory contents of the four files written by `gen-data`.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratedData {
    pub venues_csv: String,
    pub traces_csv: String,
    pub checkins_csv: String,
    pub ground_truth_json: String,
}

impl GeneratedData {
    pub const FILES: [&'static str; 4] = ["venues.csv", "traces.csv", "checkins.csv", "ground_truth.json"];

    fn contents(&self) -> [&str; 4] {
        [&self.venues_csv, &self.traces_csv, &self.checkins_csv, &self.ground_truth_json]
    }
}

/// Generates a synthetic city and its crowd data. The city uses `seed`,
/// traces `seed + 1` and check-ins `seed + 2`.
pub fn gen_data(args: &GenDataArgs, seed: u64) -> Result<GeneratedData, CliError> {
    let mut params = CityParams::default();
    if let Some(m) = args.rush_multiplier {
        params.rush_multiplier = m;
    }
    let city = synth::generate_city(seed, args.venues, &params)?;
    let traces_csv = synth::generate_traces(&city, args.vehicles, args.trips, args.noise_m, seed.wrapping_add(1))?;
    let checkins_csv = synth::generate_checkins(
        &city,
        args.users,
        args.checkins_per_user,
        args.days,
        seed.wrapping_add(2),
    )?;
    Ok(GeneratedData {
        venues_csv: city.venues_csv(),
        traces_csv,
        checkins_csv,
        ground_truth_json: city.to_json(),
    })
}

pub(crate) fn cmd_gen_data(args: &GenDataArgs, config: &PlannerConfig) -> Result<(), CliError> {
    let data = gen_data(args, config.seed)?;
    fs::create_dir_all(&args.out)
        .with_context(|| format!("creating {}", args.out.display()))
        .map_err(CliError::io)?;
    for (name, body) in GeneratedData::FILES.iter().zip(data.contents()) {
        write_file(&args.out.join(name), body)?;
    }
    Ok(())
}

/// Reads the three CSV inputs and runs the ingestion pipeline.
pub fn build_network(venues: &Path, checkins: &Path, traces: &Path, config: &PlannerConfig) -> Result<BuildOutput, CliError> {
    config.validate()?;
    let venues = ingest::parse_venues(open(venues)?)?;
    let checkins = ingest::parse_checkins(open(checkins)?)?;
    let traces = ingest::parse_traces(open(traces)?)?;
    Ok(ingest::build_network(
        venues.records,
        &checkins.records,
        &traces.records,
        &config.build_params(),
    )?)
}

fn input_path(explicit: &Option<PathBuf>, data: &Option<PathBuf>, name: &str) -> Result<PathBuf, CliError> {
    match (explicit, data) {
        (Some(p), _) => Ok(p.clone()),
        (None, Some(dir)) => Ok(dir.join(name)),
        (None, None) => Err(CliError::usage(anyhow!("pass --data DIR or --{}", name.replace('.', "-")))),
    }
}

pub(crate) fn cmd_build_network(args: &BuildArgs, mut config: PlannerConfig) -> Result<(), CliError> {
    if let Some(k) = args.top_k {
        config.top_k = k;
    }
    if let Some(d) = args.days {
        config.observation_days = d;
    }
    if let Some(o) = args.utc_offset_min {
        config.utc_offset_min = o;
    }
    if let Some(r) = args.snap_radius_m {
        config.snap_radius_m = r;
    }
    let venues = input_path(&args.venues_csv, &args.data, "venues.csv")?;
    let checkins = input_path(&args.checkins_csv, &args.data, "checkins.csv")?;
    let traces = input_path(&args.traces_csv, &args.data, "traces.csv")?;
    let out = build_network(&venues, &checkins, &traces, &config)?;

    write_file(&args.out, &to_json(&out.network)?)?;
    let users_out = args.users_out.clone().unwrap_or_else(|| sibling(&args.out, "users.json"));
    write_file(&users_out, &to_json(&out.users)?)?;
    print_json(&out.summary)?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QueryReport {
    pub start_time: String,
    pub end_time: String,
    pub start_location: GeoPoint,
    pub end_location: GeoPoint,
    pub budget_min: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VisitReport {
    pub venue_id: String,
    pub name: String,
    pub category: String,
    pub location: GeoPoint,
    pub arrival: f64,
    pub wait: f64,
    pub visit_start: f64,
    pub depart: f64,
    pub attractiveness: f64,
    pub suitability: f64,
}

/// The itinerary document written by `plan`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanReport {
    pub query: QueryReport,
    pub user_id: Option<String>,
    pub feasible: bool,
    pub visits: Vec<VisitReport>,
    /// Arrival at the end location; absent when nothing is feasible.
    pub final_arrival: Option<f64>,
    pub score: f64,
    pub venue_count: usize,
}

/// Plans one query and describes the result.
pub fn plan(network: &PoiNetwork, user: Option<&UserProfile>, query: &Query, config: &PlannerConfig) -> Result<PlanReport, CliError> {
    config.validate()?;
    let fallback;
    let profile = match user {
        Some(u) => u,
        None => {
            fallback = UserProfile::uniform("", network.categories());
            &fallback
        }
    };
    let params = config.plan_params();
    let result = tripweaver_core::plan(network, profile, query, &params)?;
    let visits = result
        .itinerary
        .visits
        .iter()
        .map(|v| {
            let venue = network
                .venue(&v.venue_id)
                .ok_or_else(|| CliError::usage(anyhow!("planner returned unknown venue {}", v.venue_id)))?;
            Ok(VisitReport {
                venue_id: v.venue_id.to_string(),
                name: venue.name.clone(),
                category: venue.category.clone(),
                location: venue.location,
                arrival: v.arrival,
                wait: v.wait,
                visit_start: v.visit_start,
                depart: v.depart,
                attractiveness: attractiveness(profile, venue, network, &params.score),
                suitability: suitability(venue, v.visit_start, v.depart)?,
            })
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    Ok(PlanReport {
        query: QueryReport {
            start_time: format_hhmm(f64::from(query.start_time)),
            end_time: format_hhmm(f64::from(query.end_time)),
            start_location: query.start_location,
            end_location: query.end_location,
            budget_min: query.budget(),
        },
        user_id: user.map(|u| u.user_id.clone()),
        feasible: result.feasible,
        venue_count: visits.len(),
        visits,
        final_arrival: result.feasible.then_some(result.itinerary.final_arrival),
        score: result.itinerary.score,
    })
}

/// Parses `LAT,LON`.
pub fn parse_location(text: &str) -> Result<GeoPoint, CliError> {
    let parts: Vec<&str> = text.split(',').map(str::trim).collect();
    let [lat, lon] = parts[..] else {
        return Err(CliError::usage(anyhow!("expected LAT,LON, got {text:?}")));
    };
    let num = |s: &str| {
        s.parse::<f64>()
            .map_err(|_| CliError::usage(anyhow!("expected LAT,LON, got {text:?}")))
    };
    let point = GeoPoint::new(num(lat)?, num(lon)?);
    point.validate()?;
    Ok(point)
}

pub fn load_network(path: &Path) -> Result<PoiNetwork, CliError> {
    let text = read_file(path)?;
    serde_json::from_str(&text)
        .with_context(|| format!("parsing network {}", path.display()))
        .map_err(CliError::usage)
}

pub fn load_users(path: &Path) -> Result<Vec<UserProfile>, CliError> {
    let text = read_file(path)?;
    serde_json::from_str(&text)
        .with_context(|| format!("parsing user profiles {}", path.display()))
        .map_err(CliError::usage)
}

pub(crate) fn cmd_plan(args: &PlanArgs, mut config: PlannerConfig) -> Result<(), CliError> {
    if let Some(a) = args.alpha {
        config.alpha = a;
    }
    if let Some(w) = args.max_wait {
        config.max_wait = w;
    }
    if let Some(c) = args.candidate_limit {
        config.candidate_limit = c;
    }
    if let Some(r) = args.local_search_rounds {
        config.local_search_rounds = r;
    }
    let start = parse_location(&args.start_loc)?;
    let end = match &args.end_loc {
        Some(text) => parse_location(text)?,
        None => start,
    };
    let query = Query::new(start, end, parse_hhmm(&args.start_time)?, parse_hhmm(&args.end_time)?)?;
    let network = load_network(&args.network)?;

    let user = match &args.user {
        None => None,
        Some(id) => {
            let path = args.users.clone().unwrap_or_else(|| sibling(&args.network, "users.json"));
            let users = load_users(&path)?;
            let found = users
                .into_iter()
                .find(|u| &u.user_id == id)
                .ok_or_else(|| CliError::usage(anyhow!("unknown user id {id}")))?;
            Some(found)
        }
    };
    let report = plan(&network, user.as_ref(), &query, &config)?;
    let text = to_json(&report)?;
    match &args.out {
        Some(path) => write_file(path, &text)?,
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .context("writing itinerary")
                .map_err(CliError::io)?;
        }
    }
    if let Some(path) = &args.geojson {
        write_file(path, &to_json(&geojson::feature_collection(&report))?)?;
    }
    Ok(())
}

fn sibling(path: &Path, name: &str) -> PathBuf {
    path.parent().map_or_else(|| PathBuf::from(name), |dir| dir.join(name))
}

fn open(path: &Path) -> Result<fs::File, CliError> {
    fs::File::open(path)
        .with_context(|| format!("opening {}", path.display()))
        .map_err(CliError::io)
}

fn read_file(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path)
        .with_context(|| format!("reading {}", path.display()))
        .map_err(CliError::io)
}

pub(crate) fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text)
        .with_context(|| format!("writing {}", path.display()))
        .map_err(CliError::io)
}

pub(crate) fn to_json<T: Serialize>(value: &T) -> Result<String, CliError> {
    let mut text = serde_json::to_string_pretty(value)
        .context("serializing output")
        .map_err(CliError::usage)?;
    text.push('\n');
    Ok(text)
}

pub(crate) fn print_json<T: Serialize>(value: &T) -> Result<(), CliError> {
    let text = to_json(value)?;
    std::io::stdout()
        .lock()
        .write_all(text.as_bytes())
        .context("writing to stdout")
        .map_err(CliError::io)
}
