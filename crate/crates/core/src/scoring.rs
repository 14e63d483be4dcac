//! Route scoring: how attractive a venue is to a user, how well a visit
//! interval matches the venue's best visiting time, and the resulting route score.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Itinerary, PoiNetwork, UserProfile, Venue};
use crate::time::SLOTS;

/// Blend between category preference (`alpha`) and popularity (`1 - alpha`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScoreParams {
    pub alpha: f64,
}

impl Default for ScoreParams {
    fn default() -> Self {
        Self { alpha: 0.5 }
    }
}

impl ScoreParams {
    pub fn validate(&self) -> Result<()> {
        if (0.0..=1.0).contains(&self.alpha) {
            Ok(())
        } else {
            Err(Error::domain(format!("alpha {} outside [0, 1]", self.alpha)))
        }
    }
}

/// Attractiveness of `venue` to `user`, in [0, 1].
///
/// Preference is the venue category's weight relative to the user's strongest
/// category; popularity is log-damped against the network maximum.
pub fn attractiveness(user: &UserProfile, venue: &Venue, network: &PoiNetwork, params: &ScoreParams) -> f64 {
    let peak = user.peak_weight();
    let pref = if peak > 0.0 { user.weight(&venue.category) / peak } else { 0.0 };
    let pop_norm = popularity_norm(venue.popularity, network.max_popularity());
    (params.alpha * pref + (1.0 - params.alpha) * pop_norm).clamp(0.0, 1.0)
}

fn popularity_norm(popularity: f64, max_popularity: f64) -> f64 {
    ((1.0 + popularity).ln() / (1.0 + max_popularity).ln()).clamp(0.0, 1.0)
}

/// Suitability of visiting `venue` over `[visit_start, depart)`, in [0, 1].
pub fn suitability(venue: &Venue, visit_start: f64, depart: f64) -> Result<f64> {
    if !(visit_start < depart) {
        return Err(Error::domain(format!(
            "visit interval [{visit_start}, {depart}) is empty"
        )));
    }
    if visit_start < f64::from(venue.open_min) - 1e-9 || depart > f64::from(venue.close_min) + 1e-9 {
        return Err(Error::domain(format!(
            "visit [{visit_start}, {depart}) outside operating hours of {}",
            venue.id
        )));
    }
    Ok(interval_suitability(&venue.visit_histogram, histogram_peak(&venue.visit_histogram), visit_start, depart))
}

pub(crate) fn histogram_peak(histogram: &[f64; SLOTS]) -> f64 {
    histogram.iter().copied().fold(0.0, f64::max)
}

/// Mean peak-relative density over the hours touched by `[start, end)`.
pub(crate) fn interval_suitability(histogram: &[f64; SLOTS], peak: f64, start: f64, end: f64) -> f64 {
    if peak <= 0.0 {
        return 1.0;
    }
    let first = ((start / 60.0).floor().max(0.0) as usize).min(SLOTS - 1);
    // Half-open interval: an end exactly on the hour does not touch that hour.
    let last = (((end - 1e-9) / 60.0).floor().max(0.0) as usize).clamp(first, SLOTS - 1);
    let sum: f64 = histogram[first..=last].iter().sum();
    sum / (last - first + 1) as f64 / peak
}

/// Sum over visits of attractiveness times suitability.
pub fn route_score(itinerary: &Itinerary, user: &UserProfile, network: &PoiNetwork, params: &ScoreParams) -> Result<f64> {
    itinerary.visits.iter().try_fold(0.0, |acc, visit| {
        let venue = network
            .venue(&visit.venue_id)
            .ok_or_else(|| Error::lookup(format!("unknown venue id {}", visit.venue_id)))?;
        let term = attractiveness(user, venue, network, params) * suitability(venue, visit.visit_start, visit.depart)?;
        Ok(acc + term)
    })
}

/// Per-query scoring cache: attractiveness and histogram peaks indexed like
/// the network's venues.
#[derive(Debug, Clone)]
pub(crate) struct Scorer<'a> {
    network: &'a PoiNetwork,
    attractiveness: Vec<f64>,
    peaks: Vec<f64>,
}

impl<'a> Scorer<'a> {
    pub(crate) fn new(network: &'a PoiNetwork, user: &UserProfile, params: &ScoreParams) -> Self {
        let attractiveness = network
            .venues()
            .iter()
            .map(|v| attractiveness(user, v, network, params))
            .collect();
        let peaks = network
            .venues()
            .iter()
            .map(|v| histogram_peak(&v.visit_histogram))
            .collect();
        Self {
            network,
            attractiveness,
            peaks,
        }
    }

    pub(crate) fn attractiveness(&self, venue: usize) -> f64 {
        self.attractiveness[venue]
    }

    pub(crate) fn visit_term(&self, venue: usize, visit_start: f64, depart: f64) -> f64 {
        let hist = &self.network.venue_at(venue).visit_histogram;
        self.attractiveness[venue] * interval_suitability(hist, self.peaks[venue], visit_start, depart)
    }
}

#[cfg(test)]
mod tests {
    use std::collections::{BTreeMap, BTreeSet};

    use super::*;
    use crate::model::{GeoPoint, ScheduledVisit, VenueId};

    fn venue(id: &str, category: &str, popularity: f64) -> Venue {
        let mut v = Venue::from_metadata(id, id, GeoPoint::new(0.0, 0.0), category, 0, 1440, 60.0);
        v.popularity = popularity;
        v
    }

    fn user(weights: &[(&str, f64)]) -> UserProfile {
        UserProfile {
            user_id: "u".into(),
            category_weights: weights.iter().map(|(c, w)| (c.to_string(), *w)).collect::<BTreeMap<_, _>>(),
            visited: BTreeSet::new(),
        }
    }

    fn net(venues: Vec<Venue>) -> PoiNetwork {
        PoiNetwork::new(venues, vec![], [30.0; SLOTS]).unwrap()
    }

    #[test]
    fn attractiveness_extremes() {
        let n = net(vec![venue("A", "Museum", 12.0), venue("B", "Park", 0.0)]);
        let u = user(&[("Museum", 1.0)]);
        let p = ScoreParams::default();
        assert!((attractiveness(&u, n.venue(&"A".into()).unwrap(), &n, &p) - 1.0).abs() < 1e-12);
        assert_eq!(attractiveness(&u, n.venue(&"B".into()).unwrap(), &n, &p), 0.0);
    }

    #[test]
    fn attractiveness_blend() {
        // pref ratio 0.2 / 0.4 = 0.5; pop_norm ln(1+p)/ln(100) = 0.8.
        let p = 100f64.powf(0.8) - 1.0;
        let n = net(vec![venue("A", "Park", p), venue("M", "Museum", 99.0)]);
        let u = user(&[("Museum", 0.4), ("Park", 0.2), ("Cafe", 0.4)]);
        let a = attractiveness(&u, n.venue(&"A".into()).unwrap(), &n, &ScoreParams::default());
        assert!((a - 0.65).abs() < 1e-12, "{a}");
    }

    #[test]
    fn suitability_examples() {
        let mut v = venue("A", "Park", 1.0);
        v.visit_histogram = [1.0 / 24.0; SLOTS];
        assert!((suitability(&v, 100.0, 700.0).unwrap() - 1.0).abs() < 1e-12);

        v.visit_histogram = [0.0; SLOTS];
        v.visit_histogram[12] = 1.0;
        assert_eq!(suitability(&v, 720.0, 780.0).unwrap(), 1.0);
        assert_eq!(suitability(&v, 480.0, 540.0).unwrap(), 0.0);

        v.visit_histogram = [0.0; SLOTS];
        v.visit_histogram[12] = 0.6;
        v.visit_histogram[13] = 0.3;
        v.visit_histogram[0] = 0.1;
        assert!((suitability(&v, 750.0, 810.0).unwrap() - 0.75).abs() < 1e-12);
    }

    #[test]
    fn empty_histogram_is_neutral() {
        let v = venue("A", "Park", 1.0);
        assert_eq!(suitability(&v, 30.0, 90.0).unwrap(), 1.0);
    }

    #[test]
    fn suitability_rejects_closed_visits() {
        let mut v = venue("A", "Park", 1.0);
        v.open_min = 600;
        v.close_min = 900;
        assert!(suitability(&v, 540.0, 620.0).is_err());
        assert!(suitability(&v, 850.0, 910.0).is_err());
        assert!(suitability(&v, 700.0, 700.0).is_err());
        assert!(suitability(&v, 600.0, 900.0).is_ok());
    }

    #[test]
    fn route_score_sums_terms() {
        let n = net(vec![venue("A", "Park", 1.0)]);
        let u = user(&[("Park", 1.0)]);
        assert_eq!(route_score(&Itinerary::default(), &u, &n, &ScoreParams::default()).unwrap(), 0.0);
        let it = Itinerary {
            visits: vec![ScheduledVisit {
                venue_id: VenueId::new("A"),
                arrival: 600.0,
                wait: 0.0,
                visit_start: 600.0,
                depart: 660.0,
            }],
            final_arrival: 700.0,
            score: 0.0,
        };
        assert!((route_score(&it, &u, &n, &ScoreParams::default()).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn two_visit_route() {
        // A: attractiveness 0.65, visited 12:30-13:30 with suitability 0.75.
        // B: preference 0, pop_norm 0.8, empty histogram -> 0.40 * 1.0.
        let p = 100f64.powf(0.8) - 1.0;
        let mut a = venue("A", "Park", p);
        a.visit_histogram[12] = 0.6;
        a.visit_histogram[13] = 0.3;
        a.visit_histogram[0] = 0.1;
        let b = venue("B", "Zoo", p);
        let n = net(vec![a, b, venue("M", "Museum", 99.0)]);
        let u = user(&[("Museum", 0.4), ("Park", 0.2), ("Cafe", 0.4)]);
        let visit = |id: &str, start: f64, end: f64| ScheduledVisit {
            venue_id: VenueId::new(id),
            arrival: start,
            wait: 0.0,
            visit_start: start,
            depart: end,
        };
        let it = Itinerary {
            visits: vec![visit("A", 750.0, 810.0), visit("B", 840.0, 900.0)],
            final_arrival: 930.0,
            score: 0.0,
        };
        let score = route_score(&it, &u, &n, &ScoreParams::default()).unwrap();
        assert!((score - 0.8875).abs() < 1e-12, "{score}");
    }
}
