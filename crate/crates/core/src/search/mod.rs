//! Trip search: ratio-greedy insertion followed by relocate/swap/replace local
//! search, plus an exhaustive oracle for small candidate sets.

mod brute_force;
mod legs;
mod local_search;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use brute_force::{brute_force, MAX_BRUTE_FORCE_CANDIDATES};

use crate::error::{Error, Result};
use crate::model::{Itinerary, PoiNetwork, Query, UserProfile, VenueId};
use crate::schedule::{self, Cursor, ScheduleParams};
use crate::scoring::{ScoreParams, Scorer};
use legs::Legs;

/// Score differences at or below this are treated as ties.
pub(crate) const SCORE_EPS: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchParams {
    /// Only the most attractive `candidate_limit` venues are considered.
    pub candidate_limit: usize,
    pub local_search_rounds: usize,
    /// Reserved for randomized restarts; the default search path is fully deterministic.
    pub rng_seed: u64,
}

impl Default for SearchParams {
    fn default() -> Self {
        Self {
            candidate_limit: 1000,
            local_search_rounds: 50,
            rng_seed: 0,
        }
    }
}

/// Everything the planner needs besides the network, user and query.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct PlanParams {
    pub score: ScoreParams,
    pub schedule: ScheduleParams,
    pub search: SearchParams,
}

impl PlanParams {
    pub fn validate(&self) -> Result<()> {
        self.score.validate()?;
        self.schedule.validate()?;
        if self.search.candidate_limit == 0 {
            return Err(Error::domain("candidate_limit must be positive"));
        }
        Ok(())
    }
}

/// Planner output. `feasible` is false only when even the empty trip cannot
/// return to the end location within the budget.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanResult {
    pub itinerary: Itinerary,
    pub feasible: bool,
}

impl PlanResult {
    fn infeasible_empty() -> Self {
        Self {
            itinerary: Itinerary::default(),
            feasible: false,
        }
    }
}

/// Plans a trip over the `candidate_limit` most attractive venues of the network.
pub fn plan(network: &PoiNetwork, user: &UserProfile, query: &Query, params: &PlanParams) -> Result<PlanResult> {
    params.validate()?;
    query.validate()?;
    let scorer = Scorer::new(network, user, &params.score);
    let mut ranked: Vec<usize> = (0..network.len()).collect();
    // Venues are stored sorted by id, so index order is id order.
    ranked.sort_by(|&a, &b| scorer.attractiveness(b).total_cmp(&scorer.attractiveness(a)).then(a.cmp(&b)));
    ranked.truncate(params.search.candidate_limit);
    ranked.sort_unstable();
    Ok(Search::new(network, query, params, &scorer, ranked).run())
}

/// Plans a trip restricted to `candidates`.
pub fn plan_with_candidates(
    network: &PoiNetwork,
    user: &UserProfile,
    query: &Query,
    candidates: &[VenueId],
    params: &PlanParams,
) -> Result<PlanResult> {
    params.validate()?;
    query.validate()?;
    let mut indices = candidates
        .iter()
        .map(|id| network.require_index(id))
        .collect::<Result<Vec<_>>>()?;
    indices.sort_unstable();
    indices.dedup();
    let scorer = Scorer::new(network, user, &params.score);
    Ok(Search::new(network, query, params, &scorer, indices).run())
}

/// An order with its cached schedule, so that moves can be evaluated from
/// the first position they change.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Route {
    pub(crate) order: Vec<usize>,
    pub(crate) score: f64,
    pub(crate) final_arrival: f64,
    /// `cursors[i]` is the state after the first `i` visits.
    cursors: Vec<Cursor>,
    /// `prefix[i]` is the score of the first `i` visits.
    prefix: Vec<f64>,
    starts: Vec<f64>,
}

/// A candidate order expressed against the current route:
/// `order[..head] ++ middle ++ order[tail..]`.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Splice<'m> {
    pub(crate) head: usize,
    pub(crate) middle: &'m [usize],
    pub(crate) tail: usize,
}

impl Splice<'_> {
    pub(crate) fn apply(&self, order: &[usize]) -> Vec<usize> {
        let mut next = Vec::with_capacity(self.head + self.middle.len() + order.len() - self.tail);
        next.extend_from_slice(&order[..self.head]);
        next.extend_from_slice(self.middle);
        next.extend_from_slice(&order[self.tail..]);
        next
    }
}

pub(crate) struct Search<'a> {
    network: &'a PoiNetwork,
    query: &'a Query,
    params: &'a PlanParams,
    scorer: &'a Scorer<'a>,
    legs: Legs<'a>,
    /// Candidate venue indices, ascending.
    candidates: Vec<usize>,
}

#[derive(Debug, Clone, Copy)]
struct Insertion {
    ratio: f64,
    venue: usize,
    position: usize,
}

impl Insertion {
    /// Higher ratio wins, then lower venue index, then earlier position.
    fn better_than(&self, other: &Insertion) -> bool {
        match self.ratio.total_cmp(&other.ratio) {
            std::cmp::Ordering::Greater => true,
            std::cmp::Ordering::Less => false,
            std::cmp::Ordering::Equal => (self.venue, self.position) < (other.venue, other.position),
        }
    }
}

impl<'a> Search<'a> {
    pub(crate) fn new(
        network: &'a PoiNetwork,
        query: &'a Query,
        params: &'a PlanParams,
        scorer: &'a Scorer<'a>,
        candidates: Vec<usize>,
    ) -> Self {
        Self {
            network,
            query,
            params,
            scorer,
            legs: Legs::new(network, query, &candidates),
            candidates,
        }
    }

    pub(crate) fn candidates(&self) -> &[usize] {
        &self.candidates
    }

    /// Simulates `order` from the start; `None` when infeasible.
    pub(crate) fn route(&self, order: Vec<usize>) -> Option<Route> {
        let mut cursor = Cursor::start(self.query);
        let mut cursors = Vec::with_capacity(order.len() + 1);
        let mut prefix = Vec::with_capacity(order.len() + 1);
        let mut starts = Vec::with_capacity(order.len());
        let mut score = 0.0;
        cursors.push(cursor);
        prefix.push(score);
        for &v in &order {
            let slot = schedule::step(self.network, &self.legs, self.query, &self.params.schedule, &mut cursor, v).ok()?;
            score += self.scorer.visit_term(v, slot.visit_start, slot.depart);
            cursors.push(cursor);
            prefix.push(score);
            starts.push(slot.visit_start);
        }
        let final_arrival = schedule::finish(&self.legs, self.query, &cursor).ok()?;
        Some(Route {
            order,
            score,
            final_arrival,
            cursors,
            prefix,
            starts,
        })
    }

    /// Score and final arrival of `splice` applied to `route`, or `None`
    /// when infeasible. Simulation resumes at the splice head and stops as
    /// soon as an unchanged tail visit starts exactly when it did before.
    pub(crate) fn evaluate(&self, route: &Route, splice: Splice<'_>) -> Option<(f64, f64)> {
        let mut cursor = route.cursors[splice.head];
        let mut score = route.prefix[splice.head];
        for &v in splice.middle {
            let slot = schedule::step(self.network, &self.legs, self.query, &self.params.schedule, &mut cursor, v).ok()?;
            score += self.scorer.visit_term(v, slot.visit_start, slot.depart);
        }
        let n = route.order.len();
        for k in splice.tail..n {
            let v = route.order[k];
            let slot = schedule::step(self.network, &self.legs, self.query, &self.params.schedule, &mut cursor, v).ok()?;
            if slot.visit_start == route.starts[k] {
                return Some((score + (route.prefix[n] - route.prefix[k]), route.final_arrival));
            }
            score += self.scorer.visit_term(v, slot.visit_start, slot.depart);
        }
        let final_arrival = schedule::finish(&self.legs, self.query, &cursor).ok()?;
        Some((score, final_arrival))
    }

    fn run(&self) -> PlanResult {
        let Some(mut route) = self.route(Vec::new()) else {
            return PlanResult::infeasible_empty();
        };
        self.greedy_fill(&mut route);
        let rounds = self.params.search.local_search_rounds;
        local_search::improve(self, &mut route, rounds);
        local_search::perturb(self, &mut route, rounds);
        let itinerary = schedule::materialize(
            self.network,
            self.query,
            &self.params.schedule,
            self.scorer,
            &route.order,
        )
        .expect("search only keeps feasible routes");
        PlanResult {
            itinerary,
            feasible: true,
        }
    }

    /// Repeatedly applies the best score-per-minute insertion until nothing
    /// more fits, then keeps the best route seen along the way. Insertions
    /// that gain nothing are still taken: a low-value stop can carry the clock
    /// to venues that were not yet open.
    pub(crate) fn greedy_fill(&self, route: &mut Route) {
        let mut used = vec![false; self.network.len()];
        for &v in &route.order {
            used[v] = true;
        }
        let mut best = route.clone();
        loop {
            let current = &*route;
            let pick = self
                .candidates
                .par_iter()
                .filter(|&&v| !used[v])
                .filter_map(|&v| self.best_insertion_of(current, v))
                .reduce_with(|a, b| if b.better_than(&a) { b } else { a });
            let Some(ins) = pick else { break };
            let mut order = route.order.clone();
            order.insert(ins.position, ins.venue);
            *route = self.route(order).expect("insertion was evaluated as feasible");
            used[ins.venue] = true;
            if route.score > best.score + SCORE_EPS {
                best = route.clone();
            }
        }
        *route = best;
    }

    fn best_insertion_of(&self, route: &Route, venue: usize) -> Option<Insertion> {
        let mut best: Option<Insertion> = None;
        let middle = [venue];
        for position in 0..=route.order.len() {
            let splice = Splice {
                head: position,
                middle: &middle,
                tail: position,
            };
            let Some((score, final_arrival)) = self.evaluate(route, splice) else {
                continue;
            };
            let elapsed = (final_arrival - route.final_arrival).max(1.0);
            let candidate = Insertion {
                ratio: (score - route.score) / elapsed,
                venue,
                position,
            };
            if best.is_none_or(|b| candidate.better_than(&b)) {
                best = Some(candidate);
            }
        }
        best
    }

    /// Shortest stay among candidates not on the route.
    pub(crate) fn shortest_unused_stay(&self, route: &Route) -> Option<f64> {
        self.candidates
            .iter()
            .filter(|v| !route.order.contains(v))
            .map(|&v| self.network.venue_at(v).mean_stay)
            .min_by(f64::total_cmp)
    }

    pub(crate) fn end_time(&self) -> f64 {
        f64::from(self.query.end_time)
    }
}
