use std::collections::HashSet;

use super::legs::Legs;
use super::{PlanParams, PlanResult};
use crate::error::{Error, Result};
use crate::model::{PoiNetwork, Query, UserProfile, VenueId};
use crate::schedule::{self, Cursor};
use crate::scoring::Scorer;

/// Largest candidate set [`brute_force`] accepts.
pub const MAX_BRUTE_FORCE_CANDIDATES: usize = 10;

/// Exhaustive optimum over every subset and ordering of `candidates`.
///
/// Ties go to the lexicographically smallest venue-id sequence. A branch is
/// cut only when its prefix is already infeasible, which no extension can
/// repair, so the enumeration stays exact.
pub fn brute_force(
    network: &PoiNetwork,
    user: &UserProfile,
    query: &Query,
    candidates: &[VenueId],
    params: &PlanParams,
) -> Result<PlanResult> {
    params.validate()?;
    query.validate()?;
    if candidates.len() > MAX_BRUTE_FORCE_CANDIDATES {
        return Err(Error::domain(format!(
            "brute force accepts at most {MAX_BRUTE_FORCE_CANDIDATES} candidates, got {}",
            candidates.len()
        )));
    }
    let mut seen = HashSet::new();
    let mut indices = Vec::with_capacity(candidates.len());
    for id in candidates {
        if !seen.insert(id) {
            return Err(Error::domain(format!("candidate {id} listed twice")));
        }
        indices.push(network.require_index(id)?);
    }
    // Index order is id order, so a sorted preorder walk visits sequences lexicographically.
    indices.sort_unstable();

    let scorer = Scorer::new(network, user, &params.score);
    let mut walk = Enumeration {
        network,
        query,
        params,
        scorer: &scorer,
        legs: Legs::new(network, query, &indices),
        candidates: &indices,
        used: vec![false; indices.len()],
        order: Vec::with_capacity(indices.len()),
        best: None,
    };
    walk.visit(Cursor::start(query), 0.0);
    let Some((_, order)) = walk.best else {
        return Ok(PlanResult::infeasible_empty());
    };
    let itinerary = schedule::materialize(network, query, &params.schedule, &scorer, &order)
        .expect("enumeration records only feasible orders");
    Ok(PlanResult {
        itinerary,
        feasible: true,
    })
}

struct Enumeration<'a> {
    network: &'a PoiNetwork,
    query: &'a Query,
    params: &'a PlanParams,
    scorer: &'a Scorer<'a>,
    legs: Legs<'a>,
    candidates: &'a [usize],
    used: Vec<bool>,
    order: Vec<usize>,
    best: Option<(f64, Vec<usize>)>,
}

impl Enumeration<'_> {
    fn visit(&mut self, cursor: Cursor, score: f64) {
        if schedule::finish(&self.legs, self.query, &cursor).is_ok()
            && self.best.as_ref().is_none_or(|(b, _)| score > *b)
        {
            self.best = Some((score, self.order.clone()));
        }
        for k in 0..self.candidates.len() {
            if self.used[k] {
                continue;
            }
            let venue = self.candidates[k];
            let mut next = cursor;
            let Ok(slot) = schedule::step(self.network, &self.legs, self.query, &self.params.schedule, &mut next, venue)
            else {
                continue;
            };
            let term = self.scorer.visit_term(venue, slot.visit_start, slot.depart);
            self.used[k] = true;
            self.order.push(venue);
            self.visit(next, score + term);
            self.order.pop();
            self.used[k] = false;
        }
    }
}
