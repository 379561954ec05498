//! Shortest open visiting paths: a fixed start, a set of stops, no return
//! leg. Exact solutions come from subset dynamic programming; larger stop
//! sets fall back to nearest-neighbor construction plus 2-opt.

use crate::model::{euclidean_distance, Position};
use serde::{Deserialize, Serialize};

/// Largest stop count handled by the exact subset DP.
pub const EXACT_STOP_LIMIT: usize = 15;

/// How the cost of visiting a stop set is measured.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum DistanceSemantics {
    /// Chained visiting path: start -> first stop -> ... -> last stop.
    #[default]
    Path,
    /// Independent out-legs: sum of start-to-stop distances.
    Star,
}

/// A visiting order over the input stops and its total length.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tour {
    /// Permutation of stop indices in visiting order.
    pub order: Vec<usize>,
    /// Total length: start to first stop plus consecutive legs.
    pub length: f64,
    /// False when the stop count exceeded the exact bound and the
    /// heuristic produced this tour instead.
    pub exact: bool,
}

impl Tour {
    fn empty() -> Self {
        Tour {
            order: Vec::new(),
            length: 0.0,
            exact: true,
        }
    }
}

/// Length of a given visiting order.
pub fn path_length(start: &Position, stops: &[Position], order: &[usize]) -> f64 {
    let mut total = 0.0;
    let mut prev = start;
    for &idx in order {
        total += euclidean_distance(prev, &stops[idx]);
        prev = &stops[idx];
    }
    total
}

/// Sum of independent start-to-stop legs (the star reading of set cost).
pub fn star_length(start: &Position, stops: &[Position]) -> f64 {
    stops.iter().map(|s| euclidean_distance(start, s)).sum()
}

/// Set cost under the configured semantics. `Path` runs the exact or
/// heuristic open-path solver; `Star` sums straight-line legs.
pub fn set_cost(start: &Position, stops: &[Position], semantics: DistanceSemantics) -> f64 {
    match semantics {
        DistanceSemantics::Path => shortest_open_path(start, stops).length,
        DistanceSemantics::Star => star_length(start, stops),
    }
}

/// Minimum-length open path from `start` through every stop.
///
/// Exact (Held-Karp over subsets) up to [`EXACT_STOP_LIMIT`] stops, with
/// ties broken toward the lexicographically smallest order. Larger inputs
/// are routed to [`heuristic_open_path`] and flagged `exact: false`.
pub fn shortest_open_path(start: &Position, stops: &[Position]) -> Tour {
    let n = stops.len();
    if n == 0 {
        return Tour::empty();
    }
    if n > EXACT_STOP_LIMIT {
        return heuristic_open_path(start, stops);
    }
    if n == 1 {
        return Tour {
            order: vec![0],
            length: euclidean_distance(start, &stops[0]),
            exact: true,
        };
    }

    let dist = pairwise(stops);
    let from_start: Vec<f64> = stops
        .iter()
        .map(|s| euclidean_distance(start, s))
        .collect();

    // suffix[j][mask] = cheapest way to visit exactly the stops in `mask`
    // starting from stop j (j not in mask).
    let full = 1usize << n;
    let mut suffix = vec![vec![0.0f64; full]; n];
    for mask in 1..full {
        for j in 0..n {
            if mask & (1 << j) != 0 {
                continue;
            }
            let mut best = f64::INFINITY;
            let mut rest = mask;
            while rest != 0 {
                let k = rest.trailing_zeros() as usize;
                rest &= rest - 1;
                let candidate = dist[j][k] + suffix[k][mask & !(1 << k)];
                if candidate < best {
                    best = candidate;
                }
            }
            suffix[j][mask] = best;
        }
    }

    // Greedy front reconstruction: at each step take the smallest stop index
    // that still completes an optimal path. Strict `<` keeps the first
    // (smallest) index on exact ties, so the order is lexicographically
    // minimal among optima.
    let mut order = Vec::with_capacity(n);
    let mut remaining = full - 1;
    let mut best_total = f64::INFINITY;
    let mut first = 0;
    for k in 0..n {
        let total = from_start[k] + suffix[k][remaining & !(1 << k)];
        if total < best_total {
            best_total = total;
            first = k;
        }
    }
    order.push(first);
    remaining &= !(1 << first);
    let mut current = first;
    while remaining != 0 {
        let mut best = f64::INFINITY;
        let mut next = 0;
        let mut rest = remaining;
        while rest != 0 {
            let k = rest.trailing_zeros() as usize;
            rest &= rest - 1;
            let candidate = dist[current][k] + suffix[k][remaining & !(1 << k)];
            if candidate < best {
                best = candidate;
                next = k;
            }
        }
        order.push(next);
        remaining &= !(1 << next);
        current = next;
    }

    let length = path_length(start, stops, &order);
    Tour {
        order,
        length,
        exact: true,
    }
}

/// Nearest-neighbor construction followed by 2-opt improvement.
///
/// Never shorter than the exact path; coincides with it for up to three
/// stops (tiny inputs use the exact solver directly).
pub fn heuristic_open_path(start: &Position, stops: &[Position]) -> Tour {
    let n = stops.len();
    if n == 0 {
        return Tour::empty();
    }
    if n <= 3 {
        // 2-opt cannot guarantee optimality below its own neighborhood size;
        // the subset DP is cheaper than the bookkeeping here.
        let mut tour = shortest_open_path(start, stops);
        tour.exact = false;
        return tour;
    }

    let dist = pairwise(stops);
    let from_start: Vec<f64> = stops
        .iter()
        .map(|s| euclidean_distance(start, s))
        .collect();

    // Nearest neighbor from the start.
    let mut order = Vec::with_capacity(n);
    let mut used = vec![false; n];
    let mut current: Option<usize> = None;
    for _ in 0..n {
        let mut best = f64::INFINITY;
        let mut pick = 0;
        for k in 0..n {
            if used[k] {
                continue;
            }
            let d = match current {
                None => from_start[k],
                Some(c) => dist[c][k],
            };
            if d < best {
                best = d;
                pick = k;
            }
        }
        used[pick] = true;
        order.push(pick);
        current = Some(pick);
    }

    // 2-opt: reverse order[i..=j] while it shortens the path.
    loop {
        let mut improved = false;
        for i in 0..n - 1 {
            for j in i + 1..n {
                let pred = if i == 0 {
                    from_start[order[j]] - from_start[order[i]]
                } else {
                    dist[order[i - 1]][order[j]] - dist[order[i - 1]][order[i]]
                };
                let succ = if j == n - 1 {
                    0.0
                } else {
                    dist[order[i]][order[j + 1]] - dist[order[j]][order[j + 1]]
                };
                if pred + succ < -1e-12 {
                    order[i..=j].reverse();
                    improved = true;
                }
            }
        }
        if !improved {
            break;
        }
    }

    let length = path_length(start, stops, &order);
    Tour {
        order,
        length,
        exact: false,
    }
}

fn pairwise(stops: &[Position]) -> Vec<Vec<f64>> {
    let n = stops.len();
    let mut dist = vec![vec![0.0f64; n]; n];
    for i in 0..n {
        for j in i + 1..n {
            let d = euclidean_distance(&stops[i], &stops[j]);
            dist[i][j] = d;
            dist[j][i] = d;
        }
    }
    dist
}
