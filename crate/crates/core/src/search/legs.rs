use crate::model::{PoiNetwork, Provenance, Query, Stop};
use crate::schedule::Transit;
use crate::time::slot_of;

/// Candidate sets above this size use the network's own lookups instead of
/// a dense table.
const DENSE_LIMIT: usize = 2048;

const NONE: u32 = u32::MAX;

/// Transit lookups for one query over a fixed candidate set. Distances and
/// profile positions are resolved once, so a leg costs two array reads.
/// Results are bit-identical to [`PoiNetwork::transit_between`].
pub(crate) struct Legs<'a> {
    network: &'a PoiNetwork,
    query: &'a Query,
    /// Network index to table row, [`NONE`] for non-candidates.
    row: Vec<u32>,
    /// Table width: candidates plus the start and end locations.
    width: usize,
    km: Vec<f64>,
    profile: Vec<u32>,
}

impl<'a> Legs<'a> {
    pub(crate) fn new(network: &'a PoiNetwork, query: &'a Query, candidates: &[usize]) -> Self {
        let mut legs = Self {
            network,
            query,
            row: Vec::new(),
            width: 0,
            km: Vec::new(),
            profile: Vec::new(),
        };
        if candidates.len() > DENSE_LIMIT {
            return legs;
        }
        let n = candidates.len();
        let width = n + 2;
        legs.row = vec![NONE; network.len()];
        for (r, &v) in candidates.iter().enumerate() {
            legs.row[v] = r as u32;
        }
        let stops: Vec<Stop> = candidates
            .iter()
            .map(|&v| Stop::Venue(v))
            .chain([Stop::At(query.start_location), Stop::At(query.end_location)])
            .collect();
        let points: Vec<_> = stops.iter().map(|&s| network.position(s)).collect();
        legs.km = Vec::with_capacity(width * width);
        for a in &points {
            for b in &points {
                legs.km.push(a.haversine_km(b));
            }
        }
        legs.profile = vec![NONE; width * width];
        for (i, p) in network.transit_profiles().iter().enumerate() {
            let (Some(a), Some(b)) = (network.index_of(&p.from_id), network.index_of(&p.to_id)) else {
                continue;
            };
            let (ra, rb) = (legs.row[a], legs.row[b]);
            if ra != NONE && rb != NONE {
                legs.profile[ra as usize * width + rb as usize] = i as u32;
            }
        }
        legs.width = width;
        legs
    }

    #[inline]
    fn cell(&self, stop: Stop, is_origin: bool) -> Option<usize> {
        match stop {
            Stop::Venue(v) => match self.row.get(v) {
                Some(&r) if r != NONE => Some(r as usize),
                _ => None,
            },
            Stop::At(p) if is_origin && p == self.query.start_location => Some(self.width - 2),
            Stop::At(p) if !is_origin && p == self.query.end_location => Some(self.width - 1),
            Stop::At(_) => None,
        }
    }
}

impl Transit for Legs<'_> {
    #[inline]
    fn minutes(&self, from: Stop, to: Stop, depart: f64) -> f64 {
        if self.width == 0 {
            return self.network.transit_between(from, to, depart);
        }
        let (Some(a), Some(b)) = (self.cell(from, true), self.cell(to, false)) else {
            return self.network.transit_between(from, to, depart);
        };
        if let (Stop::Venue(x), Stop::Venue(y)) = (from, to) {
            if x == y {
                return 0.0;
            }
        }
        let slot = slot_of(depart);
        let k = a * self.width + b;
        let p = self.profile[k];
        if p != NONE {
            let profile = &self.network.transit_profiles()[p as usize];
            if profile.provenance[slot] == Provenance::Observed {
                return profile.slot_minutes[slot];
            }
        }
        self.km[k] / self.network.fallback_speed()[slot] * 60.0
    }
}
