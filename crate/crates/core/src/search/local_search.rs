use rayon::prelude::*;

use super::{Route, Search, Splice, SCORE_EPS};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Move {
    /// Remove the visit at `from` and reinsert it at `to` in the shortened order.
    Relocate { from: usize, to: usize },
    Swap { i: usize, j: usize },
    /// Put unused venue `venue` in place of the visit at `at`.
    Replace { at: usize, venue: usize },
    /// Drop the visit at `at`, letting later visits move to better hours.
    Remove { at: usize },
}

impl Move {
    /// Writes the changed stretch into `middle` and returns the splice.
    fn splice<'m>(self, order: &[usize], middle: &'m mut Vec<usize>) -> Splice<'m> {
        middle.clear();
        let (head, tail) = match self {
            Move::Relocate { from, to } if from < to => {
                middle.extend_from_slice(&order[from + 1..=to]);
                middle.push(order[from]);
                (from, to + 1)
            }
            Move::Relocate { from, to } => {
                middle.push(order[from]);
                middle.extend_from_slice(&order[to..from]);
                (to, from + 1)
            }
            Move::Swap { i, j } => {
                middle.push(order[j]);
                middle.extend_from_slice(&order[i + 1..j]);
                middle.push(order[i]);
                (i, j + 1)
            }
            Move::Replace { at, venue } => {
                middle.push(venue);
                (at, at + 1)
            }
            Move::Remove { at } => (at, at + 1),
        };
        Splice { head, middle, tail }
    }

    fn apply(self, order: &[usize]) -> Vec<usize> {
        let mut middle = Vec::new();
        self.splice(order, &mut middle).apply(order)
    }
}

fn relocations(route: &Route) -> Vec<Move> {
    let n = route.order.len();
    let mut moves = Vec::new();
    for from in 0..n {
        for to in 0..n {
            if to != from {
                moves.push(Move::Relocate { from, to });
            }
        }
    }
    moves
}

fn swaps(route: &Route) -> Vec<Move> {
    let n = route.order.len();
    let mut moves = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            moves.push(Move::Swap { i, j });
        }
    }
    moves
}

fn replacements(search: &Search<'_>, route: &Route) -> Vec<Move> {
    let mut moves = Vec::new();
    for at in 0..route.order.len() {
        for &venue in search.candidates() {
            if !route.order.contains(&venue) {
                moves.push(Move::Replace { at, venue });
            }
        }
    }
    moves
}

fn removals(route: &Route) -> Vec<Move> {
    (0..route.order.len()).map(|at| Move::Remove { at }).collect()
}

/// Higher score wins; equal scores go to the earlier move in scan order.
fn pick(a: (usize, f64), b: (usize, f64)) -> (usize, f64) {
    if b.1 > a.1 || (b.1 == a.1 && b.0 < a.0) {
        b
    } else {
        a
    }
}

/// The best strictly improving move, as the resulting route.
fn best_move(search: &Search<'_>, route: &Route, moves: &[Move]) -> Option<Route> {
    let (k, score) = moves
        .par_iter()
        .enumerate()
        .map_init(Vec::new, |middle, (k, m)| {
            search
                .evaluate(route, m.splice(&route.order, middle))
                .map(|(score, _)| (k, score))
        })
        .flatten()
        .reduce_with(pick)?;
    (score > route.score + SCORE_EPS).then(|| {
        search
            .route(moves[k].apply(&route.order))
            .expect("move was evaluated as feasible")
    })
}

/// Compound moves: a feasible relocate, swap or removal followed by a greedy
/// refill. Only tried when the route leaves room for another visit, since
/// that is when shifting the clock can open up insertions.
fn best_repair(search: &Search<'_>, route: &Route) -> Option<Route> {
    let slack = search.end_time() - route.final_arrival;
    if search.shortest_unused_stay(route).is_none_or(|stay| stay > slack) {
        return None;
    }
    let mut moves = relocations(route);
    moves.extend(swaps(route));
    moves.extend(removals(route));
    let (_, best) = moves
        .par_iter()
        .enumerate()
        .filter_map(|(k, m)| {
            let mut next = search.route(m.apply(&route.order))?;
            search.greedy_fill(&mut next);
            Some((k, next))
        })
        .reduce_with(|a, b| {
            if b.1.score > a.1.score || (b.1.score == a.1.score && b.0 < a.0) {
                b
            } else {
                a
            }
        })?;
    (best.score > route.score + SCORE_EPS).then_some(best)
}

/// Best-improvement descent over the relocate, swap, replace and remove
/// neighbourhoods. Each pass applies the best strictly improving move of each
/// neighbourhood in turn, then refills the route greedily with whatever the
/// moves made room for. At a local optimum, compound repair moves are tried
/// before giving up.
pub(super) fn improve(search: &Search<'_>, route: &mut Route, rounds: usize) {
    for _ in 0..rounds {
        let mut improved = false;
        for moves in [
            relocations(route),
            swaps(route),
            replacements(search, route),
            removals(route),
        ] {
            if let Some(next) = best_move(search, route, &moves) {
                *route = next;
                improved = true;
            }
        }
        let before = route.score;
        search.greedy_fill(route);
        improved |= route.score > before + SCORE_EPS;
        if !improved {
            if let Some(next) = best_repair(search, route) {
                *route = next;
                improved = true;
            }
        }
        if !improved {
            break;
        }
    }
}

/// Perturbation stops after this many rounds in a row without a new best.
const STALL_LIMIT: usize = 12;

/// Iterated local search: after the first descent, repeatedly remove a run
/// of consecutive visits, refill greedily and descend again, keeping the best
/// route found. Run start and length advance deterministically; the length
/// grows while rounds fail to improve and resets after a success.
pub(super) fn perturb(search: &Search<'_>, route: &mut Route, rounds: usize) {
    let mut best = route.clone();
    let mut current = route.clone();
    let (mut start, mut len, mut stalled) = (0usize, 1usize, 0usize);
    for _ in 0..rounds {
        if stalled >= STALL_LIMIT {
            break;
        }
        let n = current.order.len();
        if n == 0 {
            break;
        }
        if start >= n {
            start %= n;
        }
        if len > n.div_ceil(2) {
            len = 1;
        }
        let splice = Splice {
            head: start,
            middle: &[],
            tail: (start + len).min(n),
        };
        // Dropping visits only moves later arrivals earlier; that is
        // infeasible when it pushes a wait past the limit.
        if let Some(mut next) = search.route(splice.apply(&current.order)) {
            search.greedy_fill(&mut next);
            improve(search, &mut next, rounds);
            current = next;
            if current.score > best.score + SCORE_EPS {
                best = current.clone();
                (len, stalled) = (1, 0);
            } else {
                (len, stalled) = (len + 1, stalled + 1);
            }
        } else {
            (len, stalled) = (len + 1, stalled + 1);
        }
        start += len;
    }
    *route = best;
}
