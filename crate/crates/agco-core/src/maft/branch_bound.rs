//! Best-first branch-and-bound integer layer over the LP relaxation.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use super::simplex::{self, LinearProgram, LpOutcome, SimplexStall};

/// Tolerance for declaring an LP value integral.
pub const INT_TOL: f64 = 1e-6;
/// A node whose bound cannot beat the incumbent by more than this is cut.
pub const PRUNE_TOL: f64 = 1e-9;

#[derive(Debug, Clone)]
pub struct IlpSolution {
    /// Integral assignment (components rounded to the nearest integer).
    pub x: Vec<f64>,
    pub objective: f64,
    pub nodes_explored: u64,
    /// LP relaxation optimum at the root.
    pub root_bound: f64,
    /// `objective - root_bound`; zero when the relaxation was integral.
    pub gap: f64,
}

#[derive(Debug, thiserror::Error)]
pub enum IlpError {
    #[error("integer program is infeasible")]
    Infeasible,
    #[error("LP relaxation is unbounded")]
    Unbounded,
    #[error(
        "node budget of {budget} exhausted; best incumbent {incumbent:?}, best open bound {bound}"
    )]
    NodeBudget {
        budget: u64,
        incumbent: Option<f64>,
        bound: f64,
    },
    #[error(transparent)]
    Numerical(#[from] SimplexStall),
}

struct Node {
    bound: f64,
    id: u64,
    lower: Vec<f64>,
    upper: Vec<f64>,
    relaxation: Vec<f64>,
}

impl PartialEq for Node {
    fn eq(&self, other: &Self) -> bool {
        self.id == other.id
    }
}
impl Eq for Node {}
impl Ord for Node {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.bound
            .total_cmp(&other.bound)
            .then(self.id.cmp(&other.id))
    }
}
impl PartialOrd for Node {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

/// Minimize the LP's objective with every variable integral.
///
/// Best-first node order, branching on the most fractional variable.
pub fn solve_ilp(lp: &LinearProgram, node_budget: u64) -> Result<IlpSolution, IlpError> {
    let n = lp.objective.len();
    let mut heap: BinaryHeap<Reverse<Node>> = BinaryHeap::new();
    let mut next_id = 0u64;
    let mut nodes_explored = 0u64;
    let mut incumbent: Option<(Vec<f64>, f64)> = None;

    let root_lower: Vec<f64> = lp.bounds.iter().map(|b| b.0).collect();
    let root_upper: Vec<f64> = lp.bounds.iter().map(|b| b.1).collect();
    let root_bound = match evaluate(lp, &root_lower, &root_upper)? {
        Evaluated::Infeasible => return Err(IlpError::Infeasible),
        Evaluated::Unbounded => return Err(IlpError::Unbounded),
        Evaluated::Solved { x, objective } => {
            push_or_accept(
                Node {
                    bound: objective,
                    id: bump(&mut next_id),
                    lower: root_lower,
                    upper: root_upper,
                    relaxation: x,
                },
                &mut heap,
                &mut incumbent,
            );
            objective
        }
    };

    while let Some(Reverse(node)) = heap.pop() {
        if let Some((_, best)) = &incumbent {
            if node.bound >= best - PRUNE_TOL {
                continue;
            }
        }
        nodes_explored += 1;
        if nodes_explored > node_budget {
            return Err(IlpError::NodeBudget {
                budget: node_budget,
                incumbent: incumbent.map(|(_, obj)| obj),
                bound: node.bound,
            });
        }

        let branch_var = most_fractional(&node.relaxation, n)
            .expect("non-integral node must have a fractional variable");
        let value = node.relaxation[branch_var];

        for (lo_shift, hi_shift) in [(None, Some(value.floor())), (Some(value.ceil()), None)] {
            let mut lower = node.lower.clone();
            let mut upper = node.upper.clone();
            if let Some(lo) = lo_shift {
                lower[branch_var] = lower[branch_var].max(lo);
            }
            if let Some(hi) = hi_shift {
                upper[branch_var] = upper[branch_var].min(hi);
            }
            if lower[branch_var] > upper[branch_var] {
                continue;
            }
            match evaluate(lp, &lower, &upper)? {
                Evaluated::Infeasible => {}
                Evaluated::Unbounded => return Err(IlpError::Unbounded),
                Evaluated::Solved { x, objective } => {
                    // Bound sandwich: a child relaxation can never beat its
                    // parent's bound.
                    debug_assert!(objective >= node.bound - 1e-6);
                    if let Some((_, best)) = &incumbent {
                        if objective >= best - PRUNE_TOL {
                            continue;
                        }
                    }
                    push_or_accept(
                        Node {
                            bound: objective,
                            id: bump(&mut next_id),
                            lower,
                            upper,
                            relaxation: x,
                        },
                        &mut heap,
                        &mut incumbent,
                    );
                }
            }
        }
    }

    match incumbent {
        Some((x, objective)) => {
            assert!(
                root_bound <= objective + 1e-6,
                "LP bound {root_bound} exceeds integer optimum {objective}"
            );
            Ok(IlpSolution {
                x,
                objective,
                nodes_explored,
                root_bound,
                gap: objective - root_bound,
            })
        }
        None => Err(IlpError::Infeasible),
    }
}

fn bump(counter: &mut u64) -> u64 {
    let id = *counter;
    *counter += 1;
    id
}

enum Evaluated {
    Solved { x: Vec<f64>, objective: f64 },
    Infeasible,
    Unbounded,
}

fn evaluate(lp: &LinearProgram, lower: &[f64], upper: &[f64]) -> Result<Evaluated, SimplexStall> {
    let node_lp = LinearProgram {
        objective: lp.objective.clone(),
        constraints: lp.constraints.clone(),
        bounds: lower
            .iter()
            .zip(upper)
            .map(|(&lo, &hi)| (lo, hi))
            .collect(),
    };
    Ok(match simplex::solve(&node_lp)? {
        LpOutcome::Optimal { x, objective } => Evaluated::Solved { x, objective },
        LpOutcome::Infeasible => Evaluated::Infeasible,
        LpOutcome::Unbounded => Evaluated::Unbounded,
    })
}

/// Index whose fractional part is closest to one half; `None` when the
/// point is integral.
fn most_fractional(x: &[f64], n: usize) -> Option<usize> {
    let mut best: Option<(f64, usize)> = None;
    for (j, &v) in x.iter().enumerate().take(n) {
        let frac_dist = (v - v.round()).abs();
        if frac_dist <= INT_TOL {
            continue;
        }
        let score = (frac_dist - 0.5).abs();
        match best {
            Some((s, _)) if s <= score => {}
            _ => best = Some((score, j)),
        }
    }
    best.map(|(_, j)| j)
}

/// Integral relaxations become incumbents immediately; fractional ones go
/// on the heap.
fn push_or_accept(
    node: Node,
    heap: &mut BinaryHeap<Reverse<Node>>,
    incumbent: &mut Option<(Vec<f64>, f64)>,
) {
    if most_fractional(&node.relaxation, node.relaxation.len()).is_none() {
        let rounded: Vec<f64> = node.relaxation.iter().map(|v| v.round()).collect();
        let better = incumbent
            .as_ref()
            .map_or(true, |(_, best)| node.bound < *best);
        if better {
            *incumbent = Some((rounded, node.bound));
        }
    } else {
        heap.push(Reverse(node));
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::maft::simplex::{Constraint, Relation};

    fn con(coeffs: &[(usize, f64)], relation: Relation, rhs: f64) -> Constraint {
        Constraint {
            coeffs: coeffs.to_vec(),
            relation,
            rhs,
        }
    }

    #[test]
    fn knapsack_optimum() {
        // max 8a + 5b + 4c s.t. 6a + 4b + 3c <= 12, binary -> 13 at (1,1,0).
        let lp = LinearProgram {
            objective: vec![-8.0, -5.0, -4.0],
            constraints: vec![con(
                &[(0, 6.0), (1, 4.0), (2, 3.0)],
                Relation::Le,
                12.0,
            )],
            bounds: vec![(0.0, 1.0); 3],
        };
        let solution = solve_ilp(&lp, 10_000).unwrap();
        assert!((solution.objective + 13.0).abs() < 1e-7);
        assert_eq!(solution.x, vec![1.0, 1.0, 0.0]);
        assert!(solution.root_bound <= solution.objective + 1e-9);
    }

    #[test]
    fn set_cover_minimum() {
        // min 3a + 2b + 4c + 3d covering three elements.
        let lp = LinearProgram {
            objective: vec![3.0, 2.0, 4.0, 3.0],
            constraints: vec![
                con(&[(0, 1.0), (2, 1.0)], Relation::Ge, 1.0),
                con(&[(0, 1.0), (1, 1.0), (3, 1.0)], Relation::Ge, 1.0),
                con(&[(1, 1.0), (2, 1.0), (3, 1.0)], Relation::Ge, 1.0),
            ],
            bounds: vec![(0.0, 1.0); 4],
        };
        let solution = solve_ilp(&lp, 10_000).unwrap();
        assert!((solution.objective - 5.0).abs() < 1e-7);
    }

    #[test]
    fn infeasible_integer_program() {
        // 2x = 3 has no integral solution in [0, 5].
        let lp = LinearProgram {
            objective: vec![1.0],
            constraints: vec![con(&[(0, 2.0)], Relation::Eq, 3.0)],
            bounds: vec![(0.0, 5.0)],
        };
        assert!(matches!(
            solve_ilp(&lp, 10_000).unwrap_err(),
            IlpError::Infeasible
        ));
    }

    #[test]
    fn node_budget_error_carries_state() {
        // Fractional root (LP optimum (2.25, 3.75)) forces branching; a
        // budget of 1 node cannot finish.
        let lp = LinearProgram {
            objective: vec![-5.0, -8.0],
            constraints: vec![
                con(&[(0, 5.0), (1, 9.0)], Relation::Le, 45.0),
                con(&[(0, 1.0), (1, 1.0)], Relation::Le, 6.0),
            ],
            bounds: vec![(0.0, 6.0); 2],
        };
        match solve_ilp(&lp, 1) {
            Err(IlpError::NodeBudget {
                budget: 1,
                bound,
                ..
            }) => assert!(bound <= -40.0 + 1e-6),
            other => panic!("expected node budget error, got {other:?}"),
        }
        let full = solve_ilp(&lp, 10_000).unwrap();
        assert!((full.objective + 40.0).abs() < 1e-7);
    }

    #[test]
    fn random_ilps_match_enumeration() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(123);
        for _ in 0..60 {
            // min c.x s.t. a.x >= r with x in {0, 1, 2}^3.
            let c: Vec<f64> = (0..3).map(|_| rng.gen_range(1.0..9.0)).collect();
            let a: Vec<f64> = (0..3).map(|_| rng.gen_range(1.0..4.0)).collect();
            let r = rng.gen_range(2.0..8.0);
            let lp = LinearProgram {
                objective: c.clone(),
                constraints: vec![con(
                    &[(0, a[0]), (1, a[1]), (2, a[2])],
                    Relation::Ge,
                    r,
                )],
                bounds: vec![(0.0, 2.0); 3],
            };
            let mut best = f64::INFINITY;
            for x0 in 0..=2 {
                for x1 in 0..=2 {
                    for x2 in 0..=2 {
                        let xs = [x0 as f64, x1 as f64, x2 as f64];
                        if a.iter().zip(&xs).map(|(ai, xi)| ai * xi).sum::<f64>() >= r {
                            best =
                                best.min(c.iter().zip(&xs).map(|(ci, xi)| ci * xi).sum::<f64>());
                        }
                    }
                }
            }
            let solution = solve_ilp(&lp, 100_000).unwrap();
            assert!(
                (solution.objective - best).abs() < 1e-7,
                "bb {} vs enumeration {best}",
                solution.objective
            );
        }
    }
}
