//! Seeded synthetic city and crowd data with known ground truth.
//!
//! Every output is a pure function of the seed and the parameters. The city
//! always contains an airport-like venue (the default trip start) and a
//! noon-peaked restaurant used by the lunch scenario.

mod checkins;
mod traces;

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub use checkins::generate_checkins;
pub use traces::{generate_traces, generate_traces_with, scripted_trip, TraceParams};

use crate::error::{Error, Result};
use crate::ingest::VENUES_HEADER;
use crate::model::{normalize, GeoPoint, PoiNetwork, Venue, VenueId};
use crate::time::SLOTS;

/// Local midnight (UTC offset 0) of the first synthetic day: 2011-03-13.
pub const EPOCH_BASE: i64 = 1_299_974_400;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CityParams {
    pub min_lat: f64,
    pub min_lon: f64,
    pub max_lat: f64,
    pub max_lon: f64,
    /// Free-flow driving speed.
    pub base_speed_kmh: f64,
    pub rush_hours: BTreeSet<usize>,
    pub rush_multiplier: f64,
}

impl Default for CityParams {
    fn default() -> Self {
        // Roughly the extent of San Francisco.
        Self {
            min_lat: 37.70,
            min_lon: -122.51,
            max_lat: 37.81,
            max_lon: -122.38,
            base_speed_kmh: 20.0,
            rush_hours: [7, 8].into_iter().collect(),
            rush_multiplier: 2.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VenueRole {
    Regular,
    Airport,
    LunchSpot,
}

/// Generator-side truth about one venue.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VenueTruth {
    pub id: VenueId,
    pub name: String,
    pub location: GeoPoint,
    pub category: String,
    pub role: VenueRole,
    pub open_min: u32,
    pub close_min: u32,
    /// Stay listed in venues.csv.
    pub listed_stay: f64,
    pub true_stay: f64,
    pub peak_hour: usize,
    pub histogram: [f64; SLOTS],
    /// Relative popularity weight used when drawing check-ins.
    pub prior: f64,
}

/// Ground truth exported as `ground_truth.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CityGroundTruth {
    pub seed: u64,
    pub venues: Vec<VenueTruth>,
    pub base_speed_kmh: f64,
    pub rush_hours: BTreeSet<usize>,
    pub rush_multiplier: f64,
    pub epoch_base: i64,
    pub utc_offset_min: i32,
    pub airport_id: VenueId,
    pub lunch_id: VenueId,
    /// Venues that taxis shuttle between most of the time.
    pub hubs: Vec<VenueId>,
}

impl CityGroundTruth {
    pub fn venue(&self, id: &VenueId) -> Option<&VenueTruth> {
        self.venues.iter().find(|v| &v.id == id)
    }

    fn index_of(&self, id: &VenueId) -> Option<usize> {
        self.venues.iter().position(|v| &v.id == id)
    }

    /// Driving speed in km/h for a departure slot.
    pub fn speed_kmh(&self, slot: usize) -> f64 {
        if self.rush_hours.contains(&slot) {
            self.base_speed_kmh / self.rush_multiplier
        } else {
            self.base_speed_kmh
        }
    }

    /// True mean transit in minutes between two distinct venues departing in `slot`.
    pub fn true_transit(&self, from: &VenueId, to: &VenueId, slot: usize) -> Option<f64> {
        let a = self.venue(from)?;
        let b = self.venue(to)?;
        Some(self.transit_between(a, b, slot))
    }

    pub(crate) fn transit_between(&self, a: &VenueTruth, b: &VenueTruth, slot: usize) -> f64 {
        let base = a.location.haversine_km(&b.location) / self.base_speed_kmh * 60.0;
        if self.rush_hours.contains(&slot) {
            base * self.rush_multiplier
        } else {
            base
        }
    }

    pub fn venues_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(VENUES_HEADER).expect("in-memory write");
        for v in &self.venues {
            w.write_record([
                v.id.as_str(),
                &v.name,
                &format!("{:.6}", v.location.lat),
                &format!("{:.6}", v.location.lon),
                &v.category,
                &v.open_min.to_string(),
                &v.close_min.to_string(),
                &format!("{:.1}", v.listed_stay),
            ])
            .expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("csv output is utf-8")
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("ground truth serializes")
    }

    /// A network built directly from the truth: true histograms and stays,
    /// popularity proportional to the prior, slot speeds from the traffic model
    /// and no observed transit profiles.
    pub fn truth_network(&self) -> Result<PoiNetwork> {
        let venues = self
            .venues
            .iter()
            .map(|t| Venue {
                id: t.id.clone(),
                name: t.name.clone(),
                location: t.location,
                category: t.category.clone(),
                popularity: 10.0 * t.prior,
                open_min: t.open_min,
                close_min: t.close_min,
                visit_histogram: t.histogram,
                mean_stay: t.true_stay,
            })
            .collect();
        let speeds = std::array::from_fn(|s| self.speed_kmh(s));
        PoiNetwork::new(venues, vec![], speeds)
    }
}

/// Share of its peak hour that a regular venue sees in any open hour.
const BASE_TRAFFIC: f64 = 0.2;

struct CategorySpec {
    name: &'static str,
    peak: usize,
    open_h: u32,
    close_h: u32,
    stay: f64,
}

const CATEGORIES: [CategorySpec; 8] = [
    CategorySpec { name: "Museum", peak: 14, open_h: 10, close_h: 18, stay: 90.0 },
    CategorySpec { name: "Park", peak: 15, open_h: 6, close_h: 20, stay: 60.0 },
    CategorySpec { name: "Landmark", peak: 11, open_h: 7, close_h: 21, stay: 45.0 },
    CategorySpec { name: "Shopping", peak: 16, open_h: 10, close_h: 21, stay: 60.0 },
    CategorySpec { name: "Restaurant", peak: 12, open_h: 11, close_h: 22, stay: 60.0 },
    CategorySpec { name: "Cafe", peak: 9, open_h: 7, close_h: 18, stay: 30.0 },
    CategorySpec { name: "Gallery", peak: 14, open_h: 10, close_h: 18, stay: 60.0 },
    CategorySpec { name: "Viewpoint", peak: 17, open_h: 6, close_h: 22, stay: 30.0 },
];

/// Categories regular venues are drawn from.
pub fn regular_categories() -> impl Iterator<Item = &'static str> {
    CATEGORIES.iter().map(|c| c.name)
}

/// Gaussian bump around `peak` over the open hours, on top of a flat
/// `floor` (relative to the peak) for every open hour.
fn gaussian_histogram(peak: usize, sigma: f64, floor: f64, open_min: u32, close_min: u32) -> [f64; SLOTS] {
    let mut h = [0.0; SLOTS];
    for (hour, slot) in h.iter_mut().enumerate() {
        let start = hour as u32 * 60;
        if start >= open_min && start + 60 <= close_min {
            let d = hour as f64 - peak as f64;
            *slot = floor + (1.0 - floor) * (-d * d / (2.0 * sigma * sigma)).exp();
        }
    }
    normalize(&mut h);
    h
}

fn place(rng: &mut ChaCha8Rng, params: &CityParams, placed: &[GeoPoint], min_spacing_m: f64) -> GeoPoint {
    let mut candidate = GeoPoint::new(params.min_lat, params.min_lon);
    for _ in 0..200 {
        candidate = GeoPoint::new(
            rng.random_range(params.min_lat..params.max_lat),
            rng.random_range(params.min_lon..params.max_lon),
        );
        if placed.iter().all(|p| p.haversine_m(&candidate) >= min_spacing_m) {
            break;
        }
    }
    candidate
}

/// Generates a city of `n_venues` venues. `V0000` is the airport and `V0001`
/// the noon-peaked lunch restaurant.
pub fn generate_city(seed: u64, n_venues: usize, params: &CityParams) -> Result<CityGroundTruth> {
    if n_venues < 2 {
        return Err(Error::domain(format!("a city needs at least 2 venues, got {n_venues}")));
    }
    if !(params.min_lat < params.max_lat && params.min_lon < params.max_lon) {
        return Err(Error::domain("bounding box is empty"));
    }
    if !(params.rush_multiplier >= 1.0 && params.base_speed_kmh > 0.0) {
        return Err(Error::domain("rush multiplier must be >= 1 and base speed positive"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let width_km = GeoPoint::new(params.min_lat, params.min_lon)
        .haversine_km(&GeoPoint::new(params.min_lat, params.max_lon));
    let height_km = GeoPoint::new(params.min_lat, params.min_lon)
        .haversine_km(&GeoPoint::new(params.max_lat, params.min_lon));
    let spacing_m = (0.5 * (width_km * height_km / n_venues as f64).sqrt() * 1000.0).min(500.0);

    // Zipf-like popularity weights over a random rank permutation.
    let mut ranks: Vec<usize> = (0..n_venues).collect();
    ranks.shuffle(&mut rng);
    let zipf = |rank: usize| (1.0 / (rank as f64 + 1.0)).powf(0.7);

    let mut venues = Vec::with_capacity(n_venues);
    let mut placed = Vec::with_capacity(n_venues);
    let lat_span = params.max_lat - params.min_lat;
    let lon_span = params.max_lon - params.min_lon;

    // South of the box, about as far out as a real city airport.
    let airport_loc = GeoPoint::new(params.min_lat - 0.75 * lat_span, params.max_lon - 0.1 * lon_span);
    placed.push(airport_loc);
    venues.push(VenueTruth {
        id: VenueId::new("V0000"),
        name: "International Airport".into(),
        location: airport_loc,
        category: "Airport".into(),
        role: VenueRole::Airport,
        open_min: 0,
        close_min: 1440,
        listed_stay: 45.0,
        true_stay: 45.0,
        peak_hour: 8,
        histogram: gaussian_histogram(8, 3.0, 0.0, 0, 1440),
        prior: zipf(n_venues / 2),
    });

    let lunch_loc = GeoPoint::new(params.min_lat + 0.35 * lat_span, params.max_lon - 0.3 * lon_span);
    placed.push(lunch_loc);
    venues.push(VenueTruth {
        id: VenueId::new("V0001"),
        name: "Italian Restaurant".into(),
        location: lunch_loc,
        category: "Restaurant".into(),
        role: VenueRole::LunchSpot,
        open_min: 660,
        close_min: 1320,
        listed_stay: 60.0,
        true_stay: 60.0,
        peak_hour: 12,
        histogram: gaussian_histogram(12, 0.8, 0.0, 660, 1320),
        prior: 1.2,
    });

    for (i, &rank) in ranks.iter().enumerate().skip(2) {
        let spec = &CATEGORIES[rng.random_range(0..CATEGORIES.len())];
        let open_h = spec.open_h + rng.random_range(0..=1);
        let close_h = spec.close_h - rng.random_range(0..=1);
        let mut peak = spec.peak;
        if spec.name == "Restaurant" && rng.random_bool(0.5) {
            peak = 19;
        }
        let peak = (peak as i64 + rng.random_range(-1..=1)).clamp(open_h as i64, close_h as i64 - 1) as usize;
        let sigma = rng.random_range(1.0..2.0);
        let true_stay = (spec.stay * rng.random_range(0.8..1.2) * 10.0).round() / 10.0;
        let location = place(&mut rng, params, &placed, spacing_m);
        placed.push(location);
        venues.push(VenueTruth {
            id: VenueId::new(format!("V{i:04}")),
            name: format!("{} {i}", spec.name),
            location,
            category: spec.name.to_owned(),
            role: VenueRole::Regular,
            open_min: open_h * 60,
            close_min: close_h * 60,
            listed_stay: spec.stay,
            true_stay,
            peak_hour: peak,
            histogram: gaussian_histogram(peak, sigma, BASE_TRAFFIC, open_h * 60, close_h * 60),
            prior: zipf(rank),
        });
    }

    let top_regular = venues
        .iter()
        .filter(|v| v.role == VenueRole::Regular)
        .max_by(|a, b| a.prior.total_cmp(&b.prior).then_with(|| b.id.cmp(&a.id)))
        .map(|v| v.id.clone());
    let mut hubs = vec![venues[0].id.clone(), venues[1].id.clone()];
    hubs.extend(top_regular);

    Ok(CityGroundTruth {
        seed,
        airport_id: venues[0].id.clone(),
        lunch_id: venues[1].id.clone(),
        venues,
        base_speed_kmh: params.base_speed_kmh,
        rush_hours: params.rush_hours.clone(),
        rush_multiplier: params.rush_multiplier,
        epoch_base: EPOCH_BASE,
        utc_offset_min: 0,
        hubs,
    })
}
