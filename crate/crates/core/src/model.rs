//! Domain types shared by every stage of the pipeline and the time-sliced
//! transit lookup over a [`PoiNetwork`].

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::time::{slot_of, DAY_MINUTES, SLOTS};

/// Mean Earth radius used for great-circle distances.
pub const EARTH_RADIUS_KM: f64 = 6371.0;

/// A WGS84 coordinate in degrees.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeoPoint {
    pub lat: f64,
    pub lon: f64,
}

impl GeoPoint {
    pub const fn new(lat: f64, lon: f64) -> Self {
        Self { lat, lon }
    }

    pub fn is_valid(&self) -> bool {
        (-90.0..=90.0).contains(&self.lat) && (-180.0..=180.0).contains(&self.lon)
    }

    pub fn validate(&self) -> Result<()> {
        if self.is_valid() {
            Ok(())
        } else {
            Err(Error::domain(format!(
                "coordinate ({}, {}) out of range",
                self.lat, self.lon
            )))
        }
    }

    /// Great-circle distance in kilometres (haversine formula).
    pub fn haversine_km(&self, other: &GeoPoint) -> f64 {
        let (lat1, lat2) = (self.lat.to_radians(), other.lat.to_radians());
        let dlat = lat2 - lat1;
        let dlon = (other.lon - self.lon).to_radians();
        let a = (dlat / 2.0).sin().powi(2) + lat1.cos() * lat2.cos() * (dlon / 2.0).sin().powi(2);
        2.0 * EARTH_RADIUS_KM * a.sqrt().min(1.0).asin()
    }

    pub fn haversine_m(&self, other: &GeoPoint) -> f64 {
        self.haversine_km(other) * 1000.0
    }
}

/// Opaque venue identifier. Ordering is lexicographic and drives every
/// deterministic tie-break in the planner.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct VenueId(pub String);

impl VenueId {
    pub fn new(id: impl Into<String>) -> Self {
        Self(id.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for VenueId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for VenueId {
    fn from(s: &str) -> Self {
        Self(s.to_owned())
    }
}

/// A point of interest with its crowd-derived profile.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Venue {
    pub id: VenueId,
    pub name: String,
    pub location: GeoPoint,
    pub category: String,
    /// Mean check-ins per day.
    pub popularity: f64,
    pub open_min: u32,
    pub close_min: u32,
    /// Hourly check-in density, normalized to sum 1 unless all zero.
    pub visit_histogram: [f64; SLOTS],
    /// Mean stay in minutes.
    pub mean_stay: f64,
}

impl Venue {
    /// A venue with no crowd evidence yet: zero popularity and an all-zero histogram.
    pub fn from_metadata(
        id: impl Into<String>,
        name: impl Into<String>,
        location: GeoPoint,
        category: impl Into<String>,
        open_min: u32,
        close_min: u32,
        mean_stay: f64,
    ) -> Self {
        Self {
            id: VenueId::new(id),
            name: name.into(),
            location,
            category: category.into(),
            popularity: 0.0,
            open_min,
            close_min,
            visit_histogram: [0.0; SLOTS],
            mean_stay,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::domain(format!("venue {}: {what}", self.id)));
        self.location.validate()?;
        if self.open_min >= self.close_min || self.close_min > DAY_MINUTES {
            return bad("operating hours must satisfy open < close <= 1440");
        }
        if !(self.popularity >= 0.0 && self.popularity.is_finite()) {
            return bad("popularity must be finite and non-negative");
        }
        if !(self.mean_stay > 0.0 && self.mean_stay.is_finite()) {
            return bad("mean stay must be positive");
        }
        if self.visit_histogram.iter().any(|h| !(*h >= 0.0 && h.is_finite())) {
            return bad("histogram entries must be non-negative");
        }
        let total: f64 = self.visit_histogram.iter().sum();
        if total > 0.0 && (total - 1.0).abs() > 1e-9 {
            return bad("non-empty histogram must be normalized to sum 1");
        }
        Ok(())
    }

    /// Rescales the histogram in place to sum 1. All-zero histograms are left untouched.
    pub fn normalize_histogram(&mut self) {
        normalize(&mut self.visit_histogram);
    }
}

pub(crate) fn normalize(histogram: &mut [f64; SLOTS]) {
    let total: f64 = histogram.iter().sum();
    if total > 0.0 {
        histogram.iter_mut().for_each(|h| *h /= total);
    }
}

/// Whether a transit slot is backed by trace evidence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Provenance {
    Observed,
    Fallback,
}

/// Directional, hour-sliced transit durations between two venues.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransitProfile {
    pub from_id: VenueId,
    pub to_id: VenueId,
    pub slot_minutes: [f64; SLOTS],
    pub slot_samples: [u32; SLOTS],
    pub provenance: [Provenance; SLOTS],
}

impl TransitProfile {
    pub fn validate(&self) -> Result<()> {
        if self.from_id == self.to_id {
            return Err(Error::domain(format!(
                "self transit profile for {} is not allowed",
                self.from_id
            )));
        }
        for s in 0..SLOTS {
            if !(self.slot_minutes[s] > 0.0 && self.slot_minutes[s].is_finite()) {
                return Err(Error::domain(format!(
                    "transit {}->{} slot {s}: duration must be positive",
                    self.from_id, self.to_id
                )));
            }
            if self.slot_samples[s] == 0 && self.provenance[s] == Provenance::Observed {
                return Err(Error::domain(format!(
                    "transit {}->{} slot {s}: observed slot without samples",
                    self.from_id, self.to_id
                )));
            }
        }
        Ok(())
    }

    pub fn observed_slots(&self) -> usize {
        self.provenance
            .iter()
            .filter(|p| **p == Provenance::Observed)
            .count()
    }
}

/// One end of a transit leg: either a venue of the network or a raw coordinate.
#[derive(Debug, Clone, PartialEq)]
pub enum Endpoint {
    Venue(VenueId),
    Location(GeoPoint),
}

/// Index-resolved endpoint used on the planner's hot path.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum Stop {
    Venue(usize),
    At(GeoPoint),
}

/// On-disk shape of a network.
#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct NetworkDoc {
    venues: Vec<Venue>,
    transit: Vec<TransitProfile>,
    fallback_speed: Vec<f64>,
}

/// Immutable bundle of venues, observed transit profiles and per-slot
/// fallback speeds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "NetworkDoc", into = "NetworkDoc")]
pub struct PoiNetwork {
    venues: Vec<Venue>,
    index: HashMap<VenueId, usize>,
    transit: Vec<TransitProfile>,
    transit_index: HashMap<(u32, u32), usize>,
    fallback_speed: [f64; SLOTS],
    max_popularity: f64,
}

impl PoiNetwork {
    /// Validates and assembles a network. Venues are stored sorted by id.
    pub fn new(
        mut venues: Vec<Venue>,
        mut transit: Vec<TransitProfile>,
        fallback_speed: [f64; SLOTS],
    ) -> Result<Self> {
        if let Some(s) = fallback_speed.iter().find(|s| !(**s > 0.0 && s.is_finite())) {
            return Err(Error::domain(format!("fallback speed {s} must be positive")));
        }
        venues.sort_by(|a, b| a.id.cmp(&b.id));
        let mut index = HashMap::with_capacity(venues.len());
        for (i, v) in venues.iter().enumerate() {
            v.validate()?;
            if index.insert(v.id.clone(), i).is_some() {
                return Err(Error::domain(format!("duplicate venue id {}", v.id)));
            }
        }
        transit.sort_by(|a, b| (&a.from_id, &a.to_id).cmp(&(&b.from_id, &b.to_id)));
        let mut transit_index = HashMap::with_capacity(transit.len());
        for (i, t) in transit.iter().enumerate() {
            t.validate()?;
            let from = *index
                .get(&t.from_id)
                .ok_or_else(|| Error::lookup(format!("transit references unknown venue {}", t.from_id)))?;
            let to = *index
                .get(&t.to_id)
                .ok_or_else(|| Error::lookup(format!("transit references unknown venue {}", t.to_id)))?;
            if transit_index.insert((from as u32, to as u32), i).is_some() {
                return Err(Error::domain(format!(
                    "duplicate transit profile {}->{}",
                    t.from_id, t.to_id
                )));
            }
        }
        let max_popularity = venues.iter().map(|v| v.popularity).fold(0.0, f64::max);
        let max_popularity = if max_popularity > 0.0 { max_popularity } else { 1.0 };
        Ok(Self {
            venues,
            index,
            transit,
            transit_index,
            fallback_speed,
            max_popularity,
        })
    }

    pub fn venues(&self) -> &[Venue] {
        &self.venues
    }

    pub fn len(&self) -> usize {
        self.venues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.venues.is_empty()
    }

    pub fn venue(&self, id: &VenueId) -> Option<&Venue> {
        self.index.get(id).map(|&i| &self.venues[i])
    }

    pub fn index_of(&self, id: &VenueId) -> Option<usize> {
        self.index.get(id).copied()
    }

    pub(crate) fn require_index(&self, id: &VenueId) -> Result<usize> {
        self.index_of(id)
            .ok_or_else(|| Error::lookup(format!("unknown venue id {id}")))
    }

    pub fn venue_at(&self, index: usize) -> &Venue {
        &self.venues[index]
    }

    pub fn transit_profiles(&self) -> &[TransitProfile] {
        &self.transit
    }

    pub fn profile(&self, from: &VenueId, to: &VenueId) -> Option<&TransitProfile> {
        let key = (self.index_of(from)? as u32, self.index_of(to)? as u32);
        self.transit_index.get(&key).map(|&i| &self.transit[i])
    }

    pub fn fallback_speed(&self) -> &[f64; SLOTS] {
        &self.fallback_speed
    }

    pub fn max_popularity(&self) -> f64 {
        self.max_popularity
    }

    /// Sorted set of venue categories.
    pub fn categories(&self) -> BTreeSet<&str> {
        self.venues.iter().map(|v| v.category.as_str()).collect()
    }

    /// Transit duration in minutes for a departure at `depart` (minutes of day).
    ///
    /// Observed slots of a stored profile win; everything else is charged at the
    /// great-circle distance over the departure slot's fallback speed.
    pub fn transit_duration(&self, from: &Endpoint, to: &Endpoint, depart: f64) -> Result<f64> {
        if !(0.0..f64::from(DAY_MINUTES)).contains(&depart) {
            return Err(Error::domain(format!(
                "departure {depart} outside [0, 1440)"
            )));
        }
        let from = self.resolve(from)?;
        let to = self.resolve(to)?;
        Ok(self.transit_between(from, to, depart))
    }

    pub(crate) fn resolve(&self, endpoint: &Endpoint) -> Result<Stop> {
        match endpoint {
            Endpoint::Venue(id) => Ok(Stop::Venue(self.require_index(id)?)),
            Endpoint::Location(p) => {
                p.validate()?;
                Ok(Stop::At(*p))
            }
        }
    }

    pub(crate) fn position(&self, stop: Stop) -> GeoPoint {
        match stop {
            Stop::Venue(i) => self.venues[i].location,
            Stop::At(p) => p,
        }
    }

    pub(crate) fn transit_between(&self, from: Stop, to: Stop, depart: f64) -> f64 {
        let slot = slot_of(depart);
        if let (Stop::Venue(a), Stop::Venue(b)) = (from, to) {
            if a == b {
                return 0.0;
            }
            if let Some(&i) = self.transit_index.get(&(a as u32, b as u32)) {
                let profile = &self.transit[i];
                if profile.provenance[slot] == Provenance::Observed {
                    return profile.slot_minutes[slot];
                }
            }
        }
        let km = self.position(from).haversine_km(&self.position(to));
        km / self.fallback_speed[slot] * 60.0
    }
}

impl TryFrom<NetworkDoc> for PoiNetwork {
    type Error = Error;

    fn try_from(doc: NetworkDoc) -> Result<Self> {
        let speeds: [f64; SLOTS] = doc.fallback_speed.try_into().map_err(|v: Vec<f64>| {
            Error::Format(format!("fallback_speed needs {SLOTS} entries, got {}", v.len()))
        })?;
        PoiNetwork::new(doc.venues, doc.transit, speeds)
    }
}

impl From<PoiNetwork> for NetworkDoc {
    fn from(net: PoiNetwork) -> Self {
        NetworkDoc {
            venues: net.venues,
            transit: net.transit,
            fallback_speed: net.fallback_speed.to_vec(),
        }
    }
}

/// Category preferences of one user, derived from their check-in history.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UserProfile {
    pub user_id: String,
    pub category_weights: BTreeMap<String, f64>,
    pub visited: BTreeSet<VenueId>,
}

impl UserProfile {
    /// Equal weight on every category.
    pub fn uniform<'a>(user_id: impl Into<String>, categories: impl IntoIterator<Item = &'a str>) -> Self {
        let cats: BTreeSet<&str> = categories.into_iter().collect();
        let w = 1.0 / cats.len().max(1) as f64;
        Self {
            user_id: user_id.into(),
            category_weights: cats.into_iter().map(|c| (c.to_owned(), w)).collect(),
            visited: BTreeSet::new(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.category_weights.values().any(|w| !(0.0..=1.0).contains(w)) {
            return Err(Error::domain(format!(
                "user {}: category weights must lie in [0, 1]",
                self.user_id
            )));
        }
        let total: f64 = self.category_weights.values().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::domain(format!(
                "user {}: category weights sum to {total}, expected 1",
                self.user_id
            )));
        }
        Ok(())
    }

    pub fn weight(&self, category: &str) -> f64 {
        self.category_weights.get(category).copied().unwrap_or(0.0)
    }

    pub fn peak_weight(&self) -> f64 {
        self.category_weights.values().copied().fold(0.0, f64::max)
    }
}

/// A time-budgeted trip request.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Query {
    pub start_location: GeoPoint,
    pub end_location: GeoPoint,
    pub start_time: u32,
    pub end_time: u32,
}

impl Query {
    pub fn new(start_location: GeoPoint, end_location: GeoPoint, start_time: u32, end_time: u32) -> Result<Self> {
        let q = Self {
            start_location,
            end_location,
            start_time,
            end_time,
        };
        q.validate()?;
        Ok(q)
    }

    pub fn validate(&self) -> Result<()> {
        self.start_location.validate()?;
        self.end_location.validate()?;
        if self.start_time >= self.end_time || self.end_time > DAY_MINUTES {
            return Err(Error::domain(format!(
                "query window must satisfy 0 <= start < end <= 1440 (got {}..{})",
                self.start_time, self.end_time
            )));
        }
        Ok(())
    }

    pub fn budget(&self) -> u32 {
        self.end_time - self.start_time
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScheduledVisit {
    pub venue_id: VenueId,
    pub arrival: f64,
    pub wait: f64,
    pub visit_start: f64,
    pub depart: f64,
}

/// Ordered schedule of visits with its route score.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Itinerary {
    pub visits: Vec<ScheduledVisit>,
    pub final_arrival: f64,
    pub score: f64,
}

impl Itinerary {
    pub fn venue_ids(&self) -> Vec<VenueId> {
        self.visits.iter().map(|v| v.venue_id.clone()).collect()
    }

    pub fn len(&self) -> usize {
        self.visits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.visits.is_empty()
    }
}
