//! Forward time simulation of an ordered venue sequence against a query.

use std::collections::HashSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Itinerary, PoiNetwork, Query, ScheduledVisit, Stop, VenueId};
use crate::scoring::Scorer;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScheduleParams {
    /// Longest wait, in minutes, tolerated at a venue that is not yet open.
    pub max_wait: f64,
}

impl Default for ScheduleParams {
    fn default() -> Self {
        Self { max_wait: 60.0 }
    }
}

impl ScheduleParams {
    pub fn validate(&self) -> Result<()> {
        if self.max_wait >= 0.0 && self.max_wait.is_finite() {
            Ok(())
        } else {
            Err(Error::domain(format!("max_wait {} must be >= 0", self.max_wait)))
        }
    }
}

/// Why an order cannot be scheduled.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "reason", rename_all = "snake_case")]
pub enum Infeasibility {
    /// The trip cannot end by the query's end time.
    Budget,
    /// Arrival precedes opening by more than `max_wait`.
    WaitTooLong { venue_id: VenueId },
    /// The stay would run past closing time.
    ClosesDuringVisit { venue_id: VenueId },
}

impl fmt::Display for Infeasibility {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Infeasibility::Budget => f.write_str("time budget exceeded"),
            Infeasibility::WaitTooLong { venue_id } => write!(f, "wait at {venue_id} exceeds max_wait"),
            Infeasibility::ClosesDuringVisit { venue_id } => write!(f, "{venue_id} closes before the visit ends"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ScheduleOutcome {
    Feasible(Itinerary),
    Infeasible(Infeasibility),
}

impl ScheduleOutcome {
    pub fn feasible(self) -> Option<Itinerary> {
        match self {
            ScheduleOutcome::Feasible(it) => Some(it),
            ScheduleOutcome::Infeasible(_) => None,
        }
    }

    pub fn is_feasible(&self) -> bool {
        matches!(self, ScheduleOutcome::Feasible(_))
    }
}

/// Simulates `order` from the query's start. The returned itinerary has a
/// zero score; callers fill it with [`crate::scoring::route_score`].
pub fn simulate(network: &PoiNetwork, query: &Query, order: &[VenueId], params: &ScheduleParams) -> Result<ScheduleOutcome> {
    query.validate()?;
    params.validate()?;
    let mut seen = HashSet::with_capacity(order.len());
    let mut indices = Vec::with_capacity(order.len());
    for id in order {
        if !seen.insert(id) {
            return Err(Error::domain(format!("venue {id} appears twice in the order")));
        }
        indices.push(network.require_index(id)?);
    }
    let mut visits = Vec::with_capacity(indices.len());
    let outcome = forward(network, network, query, indices.iter().copied(), params, |v, slot| {
        visits.push(slot.scheduled(network, v));
    });
    Ok(match outcome {
        Ok(final_arrival) => ScheduleOutcome::Feasible(Itinerary {
            visits,
            final_arrival,
            score: 0.0,
        }),
        Err(why) => ScheduleOutcome::Infeasible(why.describe(network)),
    })
}

/// Index-level counterpart of [`Infeasibility`] used on the search hot path.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Violation {
    Budget,
    Wait(usize),
    Closes(usize),
}

impl Violation {
    fn describe(self, network: &PoiNetwork) -> Infeasibility {
        match self {
            Violation::Budget => Infeasibility::Budget,
            Violation::Wait(v) => Infeasibility::WaitTooLong {
                venue_id: network.venue_at(v).id.clone(),
            },
            Violation::Closes(v) => Infeasibility::ClosesDuringVisit {
                venue_id: network.venue_at(v).id.clone(),
            },
        }
    }
}

/// Source of transit minutes between stops.
pub(crate) trait Transit {
    fn minutes(&self, from: Stop, to: Stop, depart: f64) -> f64;
}

impl Transit for PoiNetwork {
    #[inline]
    fn minutes(&self, from: Stop, to: Stop, depart: f64) -> f64 {
        self.transit_between(from, to, depart)
    }
}

/// Clock state after leaving a venue (or the start location).
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Cursor {
    pub(crate) at: Stop,
    pub(crate) clock: f64,
}

impl Cursor {
    pub(crate) fn start(query: &Query) -> Self {
        Self {
            at: Stop::At(query.start_location),
            clock: f64::from(query.start_time),
        }
    }
}

/// Timing of one visit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Slot {
    pub(crate) arrival: f64,
    pub(crate) visit_start: f64,
    pub(crate) depart: f64,
}

impl Slot {
    fn scheduled(&self, network: &PoiNetwork, venue: usize) -> ScheduledVisit {
        ScheduledVisit {
            venue_id: network.venue_at(venue).id.clone(),
            arrival: self.arrival,
            wait: self.visit_start - self.arrival,
            visit_start: self.visit_start,
            depart: self.depart,
        }
    }
}

/// Advances `cursor` through one visit.
#[inline]
pub(crate) fn step(
    network: &PoiNetwork,
    transit: &impl Transit,
    query: &Query,
    params: &ScheduleParams,
    cursor: &mut Cursor,
    venue: usize,
) -> Result<Slot, Violation> {
    let v = network.venue_at(venue);
    let arrival = cursor.clock + transit.minutes(cursor.at, Stop::Venue(venue), cursor.clock);
    let end = f64::from(query.end_time);
    if arrival > end {
        return Err(Violation::Budget);
    }
    // Waiting ends exactly at opening time.
    let visit_start = arrival.max(f64::from(v.open_min));
    if visit_start - arrival > params.max_wait {
        return Err(Violation::Wait(venue));
    }
    let depart = visit_start + v.mean_stay;
    if depart > f64::from(v.close_min) {
        return Err(Violation::Closes(venue));
    }
    if depart > end {
        return Err(Violation::Budget);
    }
    cursor.at = Stop::Venue(venue);
    cursor.clock = depart;
    Ok(Slot {
        arrival,
        visit_start,
        depart,
    })
}

/// Final leg back to the query's end location.
#[inline]
pub(crate) fn finish(transit: &impl Transit, query: &Query, cursor: &Cursor) -> Result<f64, Violation> {
    let arrival = cursor.clock + transit.minutes(cursor.at, Stop::At(query.end_location), cursor.clock);
    if arrival > f64::from(query.end_time) {
        Err(Violation::Budget)
    } else {
        Ok(arrival)
    }
}

fn forward(
    network: &PoiNetwork,
    transit: &impl Transit,
    query: &Query,
    order: impl IntoIterator<Item = usize>,
    params: &ScheduleParams,
    mut on_visit: impl FnMut(usize, Slot),
) -> Result<f64, Violation> {
    let mut cursor = Cursor::start(query);
    for v in order {
        let slot = step(network, transit, query, params, &mut cursor, v)?;
        on_visit(v, slot);
    }
    finish(transit, query, &cursor)
}

/// Builds a scored itinerary from an index order known to be feasible.
pub(crate) fn materialize(
    network: &PoiNetwork,
    query: &Query,
    params: &ScheduleParams,
    scorer: &Scorer<'_>,
    order: &[usize],
) -> Option<Itinerary> {
    let mut visits = Vec::with_capacity(order.len());
    let mut score = 0.0;
    let final_arrival = forward(network, network, query, order.iter().copied(), params, |v, slot| {
        score += scorer.visit_term(v, slot.visit_start, slot.depart);
        visits.push(slot.scheduled(network, v));
    })
    .ok()?;
    Some(Itinerary {
        visits,
        final_arrival,
        score,
    })
}
