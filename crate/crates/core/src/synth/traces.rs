use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Normal;
use serde::{Deserialize, Serialize};

use super::CityGroundTruth;
use crate::error::{Error, Result};
use crate::ingest::TRACES_HEADER;
use crate::model::{GeoPoint, VenueId, EARTH_RADIUS_KM};
use crate::time::local_hour;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceParams {
    /// Seconds between GPS fixes.
    pub cadence_s: i64,
    /// In-transit fixes closer than this to either trip end are not emitted,
    /// so that dwell boundaries are sharp.
    pub clearance_m: f64,
    /// Chance that the next destination is one of the city's hubs.
    pub hub_probability: f64,
    /// Relative half-width of the uniform noise on travel durations.
    pub travel_jitter: f64,
    /// Relative half-width of the uniform noise on dwell durations.
    pub dwell_jitter: f64,
}

impl Default for TraceParams {
    fn default() -> Self {
        Self {
            cadence_s: 120,
            clearance_m: 400.0,
            hub_probability: 0.8,
            travel_jitter: 0.1,
            dwell_jitter: 0.15,
        }
    }
}

struct TraceWriter<'a> {
    city: &'a CityGroundTruth,
    out: csv::Writer<Vec<u8>>,
    noise: Option<Normal<f64>>,
    cadence_s: i64,
    clearance_m: f64,
}

const M_PER_DEG: f64 = EARTH_RADIUS_KM * 1000.0 * std::f64::consts::PI / 180.0;

impl<'a> TraceWriter<'a> {
    fn new(city: &'a CityGroundTruth, noise_m: f64, params: &TraceParams) -> Result<Self> {
        if !(noise_m >= 0.0 && noise_m.is_finite()) {
            return Err(Error::domain(format!("noise_m {noise_m} must be >= 0")));
        }
        if params.cadence_s <= 0 {
            return Err(Error::domain("cadence must be positive"));
        }
        let mut out = csv::Writer::from_writer(Vec::new());
        out.write_record(TRACES_HEADER).expect("in-memory write");
        Ok(Self {
            city,
            out,
            noise: (noise_m > 0.0).then(|| Normal::new(0.0, noise_m).expect("positive scale")),
            cadence_s: params.cadence_s,
            clearance_m: params.clearance_m,
        })
    }

    fn emit(&mut self, rng: &mut ChaCha8Rng, vehicle: &str, t: i64, p: GeoPoint) {
        let (mut lat, mut lon) = (p.lat, p.lon);
        if let Some(n) = &self.noise {
            lat += n.sample(rng) / M_PER_DEG;
            lon += n.sample(rng) / (M_PER_DEG * p.lat.to_radians().cos());
        }
        self.out
            .write_record([vehicle, &t.to_string(), &format!("{lat:.6}"), &format!("{lon:.6}")])
            .expect("in-memory write");
    }

    /// Fixes from `arrive` to `depart` inclusive at the venue.
    fn dwell(&mut self, rng: &mut ChaCha8Rng, vehicle: &str, at: GeoPoint, arrive: i64, depart: i64) {
        let mut t = arrive;
        while t < depart {
            self.emit(rng, vehicle, t, at);
            t += self.cadence_s;
        }
        self.emit(rng, vehicle, depart, at);
    }

    /// In-transit fixes strictly between `depart` and `arrive`.
    fn travel(&mut self, rng: &mut ChaCha8Rng, vehicle: &str, from: GeoPoint, to: GeoPoint, depart: i64, arrive: i64) {
        let duration = (arrive - depart) as f64;
        let mut t = depart + self.cadence_s;
        while t < arrive {
            let f = (t - depart) as f64 / duration;
            let p = GeoPoint::new(from.lat + f * (to.lat - from.lat), from.lon + f * (to.lon - from.lon));
            if p.haversine_m(&from) > self.clearance_m && p.haversine_m(&to) > self.clearance_m {
                self.emit(rng, vehicle, t, p);
            }
            t += self.cadence_s;
        }
    }

    fn finish(self) -> String {
        String::from_utf8(self.out.into_inner().expect("in-memory flush")).expect("csv output is utf-8")
    }

    fn travel_seconds(&self, from: usize, to: usize, depart: i64, jitter: f64, rng: &mut ChaCha8Rng) -> i64 {
        let slot = local_hour(depart, self.city.utc_offset_min);
        let truth = self.city.transit_between(&self.city.venues[from], &self.city.venues[to], slot);
        let factor = if jitter > 0.0 { rng.random_range(1.0 - jitter..=1.0 + jitter) } else { 1.0 };
        ((truth * factor * 60.0).round() as i64).max(1)
    }
}

/// Vehicle traces with the default [`TraceParams`].
pub fn generate_traces(
    city: &CityGroundTruth,
    n_vehicles: usize,
    trips_per_vehicle: usize,
    noise_m: f64,
    seed: u64,
) -> Result<String> {
    generate_traces_with(city, n_vehicles, trips_per_vehicle, noise_m, seed, &TraceParams::default())
}

/// Each vehicle starts at a random venue at a random time of the first day,
/// dwells for about the venue's true stay, then drives to the next venue in
/// the true transit time of its departure slot (plus bounded noise).
pub fn generate_traces_with(
    city: &CityGroundTruth,
    n_vehicles: usize,
    trips_per_vehicle: usize,
    noise_m: f64,
    seed: u64,
    params: &TraceParams,
) -> Result<String> {
    let mut writer = TraceWriter::new(city, noise_m, params)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x7472_6163_6573);
    let n = city.venues.len();
    let hubs: Vec<usize> = city.hubs.iter().filter_map(|h| city.index_of(h)).collect();
    let priors: Vec<f64> = city.venues.iter().map(|v| v.prior).collect();
    let by_prior = WeightedIndex::new(&priors).map_err(|e| Error::domain(e.to_string()))?;

    for k in 0..n_vehicles {
        let vehicle = format!("cab{:03}", k + 1);
        let mut at = rng.random_range(0..n);
        let mut clock = city.epoch_base + rng.random_range(0..86_400);
        for trip in 0..=trips_per_vehicle {
            let stay = city.venues[at].true_stay;
            let jitter = params.dwell_jitter;
            let dwell_s = (stay * rng.random_range(1.0 - jitter..=1.0 + jitter) * 60.0).round() as i64;
            let depart = clock + dwell_s;
            writer.dwell(&mut rng, &vehicle, city.venues[at].location, clock, depart);
            if trip == trips_per_vehicle {
                break;
            }
            let next = loop {
                let candidate = if !hubs.is_empty() && rng.random_bool(params.hub_probability) {
                    hubs[rng.random_range(0..hubs.len())]
                } else {
                    by_prior.sample(&mut rng)
                };
                if candidate != at {
                    break candidate;
                }
            };
            let arrive = depart + writer.travel_seconds(at, next, depart, params.travel_jitter, &mut rng);
            writer.travel(&mut rng, &vehicle, city.venues[at].location, city.venues[next].location, depart, arrive);
            at = next;
            clock = arrive;
        }
    }
    Ok(writer.finish())
}

/// A single-vehicle trace: dwell at `from` for its true stay, leave at
/// `depart` (epoch seconds), drive for exactly the true transit, dwell at `to`.
pub fn scripted_trip(city: &CityGroundTruth, from: &VenueId, to: &VenueId, depart: i64, noise_m: f64, seed: u64) -> Result<String> {
    let lookup = |id: &VenueId| city.index_of(id).ok_or_else(|| Error::lookup(format!("unknown venue id {id}")));
    let (a, b) = (lookup(from)?, lookup(to)?);
    if a == b {
        return Err(Error::domain("a scripted trip needs two distinct venues"));
    }
    let params = TraceParams::default();
    let mut writer = TraceWriter::new(city, noise_m, &params)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let stay_s = |i: usize| (city.venues[i].true_stay * 60.0).round() as i64;
    let (va, vb) = (&city.venues[a], &city.venues[b]);
    writer.dwell(&mut rng, "cab001", va.location, depart - stay_s(a), depart);
    let arrive = depart + writer.travel_seconds(a, b, depart, 0.0, &mut rng);
    writer.travel(&mut rng, "cab001", va.location, vb.location, depart, arrive);
    writer.dwell(&mut rng, "cab001", vb.location, arrive, arrive + stay_s(b));
    Ok(writer.finish())
}
