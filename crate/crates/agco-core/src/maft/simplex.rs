//! Two-phase primal simplex with bounded variables, dense tableau form.
//!
//! Small and exact rather than fast: the assignment LPs this crate solves
//! have at most a few hundred columns. Bland's rule keeps the pivot
//! sequence finite and deterministic.

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Le,
    Eq,
    Ge,
}

#[derive(Debug, Clone)]
pub struct Constraint {
    /// Sparse row: (variable index, coefficient).
    pub coeffs: Vec<(usize, f64)>,
    pub relation: Relation,
    pub rhs: f64,
}

/// Minimize `objective . x` subject to the constraints and per-variable
/// bounds (upper bounds may be infinite).
#[derive(Debug, Clone)]
pub struct LinearProgram {
    pub objective: Vec<f64>,
    pub constraints: Vec<Constraint>,
    pub bounds: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum LpOutcome {
    Optimal { x: Vec<f64>, objective: f64 },
    Infeasible,
    Unbounded,
}

const EPS: f64 = 1e-9;
const PIVOT_EPS: f64 = 1e-11;
const MAX_ITERATIONS: usize = 200_000;

#[derive(Debug, thiserror::Error)]
#[error("simplex did not converge within {MAX_ITERATIONS} iterations")]
pub struct SimplexStall;

pub fn solve(lp: &LinearProgram) -> Result<LpOutcome, SimplexStall> {
    let n = lp.objective.len();
    debug_assert_eq!(lp.bounds.len(), n);
    for &(lo, hi) in &lp.bounds {
        if lo > hi + EPS {
            return Ok(LpOutcome::Infeasible);
        }
    }
    if lp.constraints.is_empty() {
        // Pure bound minimization.
        let mut x = vec![0.0; n];
        let mut objective = 0.0;
        for j in 0..n {
            let (lo, hi) = lp.bounds[j];
            let c = lp.objective[j];
            x[j] = if c >= 0.0 { lo } else { hi };
            if !x[j].is_finite() {
                return Ok(LpOutcome::Unbounded);
            }
            objective += c * x[j];
        }
        return Ok(LpOutcome::Optimal { x, objective });
    }

    let mut tab = Tableau::build(lp);
    match tab.run_phase(&tab.phase1_cost())? {
        PhaseEnd::Optimal => {}
        PhaseEnd::Unbounded => unreachable!("phase-1 objective is bounded below by zero"),
    }
    if tab.artificial_value() > 1e-7 {
        return Ok(LpOutcome::Infeasible);
    }
    tab.pin_artificials();

    let mut cost = vec![0.0; tab.cols];
    cost[..n].copy_from_slice(&lp.objective);
    match tab.run_phase(&cost)? {
        PhaseEnd::Optimal => {}
        PhaseEnd::Unbounded => return Ok(LpOutcome::Unbounded),
    }

    let values = tab.values();
    let x: Vec<f64> = values[..n].to_vec();
    let objective = lp.objective.iter().zip(&x).map(|(c, v)| c * v).sum();
    Ok(LpOutcome::Optimal { x, objective })
}

enum PhaseEnd {
    Optimal,
    Unbounded,
}

struct Tableau {
    rows: usize,
    cols: usize,
    a: Vec<Vec<f64>>,
    rhs: Vec<f64>,
    lo: Vec<f64>,
    hi: Vec<f64>,
    at_upper: Vec<bool>,
    basis: Vec<usize>,
    in_basis: Vec<bool>,
    artificial_start: usize,
}

impl Tableau {
    fn build(lp: &LinearProgram) -> Self {
        let n = lp.objective.len();
        let m = lp.constraints.len();
        let slack_count = lp
            .constraints
            .iter()
            .filter(|c| c.relation != Relation::Eq)
            .count();
        let cols = n + slack_count + m;
        let artificial_start = n + slack_count;

        let mut a = vec![vec![0.0; cols]; m];
        let mut rhs = vec![0.0; m];
        let mut lo = vec![0.0; cols];
        let mut hi = vec![f64::INFINITY; cols];
        for j in 0..n {
            lo[j] = lp.bounds[j].0;
            hi[j] = lp.bounds[j].1;
        }

        let mut slack = n;
        for (i, con) in lp.constraints.iter().enumerate() {
            for &(j, coef) in &con.coeffs {
                a[i][j] += coef;
            }
            rhs[i] = con.rhs;
            match con.relation {
                Relation::Le => {
                    a[i][slack] = 1.0;
                    slack += 1;
                }
                Relation::Ge => {
                    a[i][slack] = -1.0;
                    slack += 1;
                }
                Relation::Eq => {}
            }
        }

        // Nonbasic columns start at their lower bound; artificials absorb
        // each row's residual so the initial basis is the identity.
        let at_upper = vec![false; cols];
        let mut basis = Vec::with_capacity(m);
        let mut in_basis = vec![false; cols];
        for i in 0..m {
            let mut residual = rhs[i];
            for j in 0..artificial_start {
                if lo[j] != 0.0 {
                    residual -= a[i][j] * lo[j];
                }
            }
            let art = artificial_start + i;
            if residual < 0.0 {
                for value in a[i].iter_mut() {
                    *value = -*value;
                }
                rhs[i] = -rhs[i];
            }
            a[i][art] = 1.0;
            basis.push(art);
            in_basis[art] = true;
        }

        Tableau {
            rows: m,
            cols,
            a,
            rhs,
            lo,
            hi,
            at_upper,
            basis,
            in_basis,
            artificial_start,
        }
    }

    fn phase1_cost(&self) -> Vec<f64> {
        let mut cost = vec![0.0; self.cols];
        for j in self.artificial_start..self.cols {
            cost[j] = 1.0;
        }
        cost
    }

    fn artificial_value(&self) -> f64 {
        let values = self.values();
        values[self.artificial_start..].iter().sum()
    }

    fn pin_artificials(&mut self) {
        for j in self.artificial_start..self.cols {
            self.hi[j] = 0.0;
        }
    }

    /// Column values implied by the current basis and bound flags.
    fn values(&self) -> Vec<f64> {
        let mut values = vec![0.0; self.cols];
        for j in 0..self.cols {
            if !self.in_basis[j] {
                values[j] = if self.at_upper[j] { self.hi[j] } else { self.lo[j] };
            }
        }
        for i in 0..self.rows {
            let mut v = self.rhs[i];
            for j in 0..self.cols {
                if !self.in_basis[j] && values[j] != 0.0 {
                    v -= self.a[i][j] * values[j];
                }
            }
            values[self.basis[i]] = v;
        }
        values
    }

    fn run_phase(&mut self, cost: &[f64]) -> Result<PhaseEnd, SimplexStall> {
        for _ in 0..MAX_ITERATIONS {
            let values = self.values();

            // Reduced costs z_j = c_j - c_B . a[:, j].
            let mut basic_cost = vec![0.0; self.rows];
            for i in 0..self.rows {
                basic_cost[i] = cost[self.basis[i]];
            }
            let entering = (0..self.cols).find(|&j| {
                if self.in_basis[j] || self.lo[j] == self.hi[j] {
                    return false;
                }
                let mut z = cost[j];
                for i in 0..self.rows {
                    if basic_cost[i] != 0.0 {
                        z -= basic_cost[i] * self.a[i][j];
                    }
                }
                if self.at_upper[j] {
                    z > EPS
                } else {
                    z < -EPS
                }
            });
            let Some(e) = entering else {
                return Ok(PhaseEnd::Optimal);
            };

            // Direction: +1 when the entering variable rises off its lower
            // bound, -1 when it falls off its upper bound.
            let dir = if self.at_upper[e] { -1.0 } else { 1.0 };

            // Ratio test: the entering variable moves until it reaches its
            // opposite bound or some basic variable hits one of its own.
            let mut limit = self.hi[e] - self.lo[e];
            let mut leaving: Option<(usize, bool)> = None; // (row, hits_upper)
            for i in 0..self.rows {
                let delta = -dir * self.a[i][e];
                if delta.abs() < PIVOT_EPS {
                    continue;
                }
                let basic = self.basis[i];
                let value = values[basic];
                let allowance = if delta > 0.0 {
                    (self.hi[basic] - value) / delta
                } else {
                    (self.lo[basic] - value) / delta
                };
                let allowance = allowance.max(0.0);
                if allowance < limit - EPS
                    || (allowance < limit + EPS
                        && leaving.map_or(false, |(row, _)| self.basis[row] > basic))
                {
                    limit = allowance;
                    leaving = Some((i, delta > 0.0));
                }
            }

            if limit.is_infinite() {
                return Ok(PhaseEnd::Unbounded);
            }

            match leaving {
                None => {
                    // Bound flip: the entering variable crosses to its other
                    // bound without any basis change.
                    self.at_upper[e] = !self.at_upper[e];
                }
                Some((row, hits_upper)) => {
                    let out = self.basis[row];
                    self.pivot(row, e);
                    self.in_basis[out] = false;
                    self.in_basis[e] = true;
                    self.basis[row] = e;
                    self.at_upper[out] = hits_upper;
                    self.at_upper[e] = false;
                }
            }
        }
        Err(SimplexStall)
    }

    fn pivot(&mut self, row: usize, col: usize) {
        let pivot = self.a[row][col];
        debug_assert!(pivot.abs() > PIVOT_EPS, "degenerate pivot element");
        let inv = 1.0 / pivot;
        for j in 0..self.cols {
            self.a[row][j] *= inv;
        }
        self.rhs[row] *= inv;
        for i in 0..self.rows {
            if i == row {
                continue;
            }
            let factor = self.a[i][col];
            if factor == 0.0 {
                continue;
            }
            for j in 0..self.cols {
                self.a[i][j] -= factor * self.a[row][j];
            }
            self.rhs[i] -= factor * self.rhs[row];
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn con(coeffs: &[(usize, f64)], relation: Relation, rhs: f64) -> Constraint {
        Constraint {
            coeffs: coeffs.to_vec(),
            relation,
            rhs,
        }
    }

    fn optimal(outcome: LpOutcome) -> (Vec<f64>, f64) {
        match outcome {
            LpOutcome::Optimal { x, objective } => (x, objective),
            other => panic!("expected optimal, got {other:?}"),
        }
    }

    #[test]
    fn textbook_maximization() {
        // max 3x + 5y s.t. x <= 4, 2y <= 12, 3x + 2y <= 18  -> (2, 6), 36.
        let lp = LinearProgram {
            objective: vec![-3.0, -5.0],
            constraints: vec![
                con(&[(0, 1.0)], Relation::Le, 4.0),
                con(&[(1, 2.0)], Relation::Le, 12.0),
                con(&[(0, 3.0), (1, 2.0)], Relation::Le, 18.0),
            ],
            bounds: vec![(0.0, f64::INFINITY); 2],
        };
        let (x, obj) = optimal(solve(&lp).unwrap());
        assert!((obj + 36.0).abs() < 1e-7);
        assert!((x[0] - 2.0).abs() < 1e-7);
        assert!((x[1] - 6.0).abs() < 1e-7);
    }

    #[test]
    fn equality_and_ge_rows() {
        // min x + 2y s.t. x + y = 3, x >= 1 -> x=3, y=0? y >= 0, x <= inf.
        // x + y = 3, x >= 1: cheapest is x = 3, y = 0 with cost 3.
        let lp = LinearProgram {
            objective: vec![1.0, 2.0],
            constraints: vec![
                con(&[(0, 1.0), (1, 1.0)], Relation::Eq, 3.0),
                con(&[(0, 1.0)], Relation::Ge, 1.0),
            ],
            bounds: vec![(0.0, f64::INFINITY); 2],
        };
        let (x, obj) = optimal(solve(&lp).unwrap());
        assert!((obj - 3.0).abs() < 1e-7);
        assert!((x[0] - 3.0).abs() < 1e-7);
    }

    #[test]
    fn variable_upper_bounds_respected() {
        // min -x - y s.t. x + y <= 10, x in [0, 3], y in [0, 4].
        let lp = LinearProgram {
            objective: vec![-1.0, -1.0],
            constraints: vec![con(&[(0, 1.0), (1, 1.0)], Relation::Le, 10.0)],
            bounds: vec![(0.0, 3.0), (0.0, 4.0)],
        };
        let (x, obj) = optimal(solve(&lp).unwrap());
        assert!((obj + 7.0).abs() < 1e-7);
        assert!((x[0] - 3.0).abs() < 1e-7);
        assert!((x[1] - 4.0).abs() < 1e-7);
    }

    #[test]
    fn nonzero_lower_bounds() {
        // min x + y s.t. x + y >= 5, x >= 2, y >= 1.
        let lp = LinearProgram {
            objective: vec![1.0, 1.0],
            constraints: vec![con(&[(0, 1.0), (1, 1.0)], Relation::Ge, 5.0)],
            bounds: vec![(2.0, f64::INFINITY), (1.0, f64::INFINITY)],
        };
        let (_, obj) = optimal(solve(&lp).unwrap());
        assert!((obj - 5.0).abs() < 1e-7);
    }

    #[test]
    fn detects_infeasibility() {
        let lp = LinearProgram {
            objective: vec![1.0],
            constraints: vec![
                con(&[(0, 1.0)], Relation::Ge, 5.0),
                con(&[(0, 1.0)], Relation::Le, 2.0),
            ],
            bounds: vec![(0.0, f64::INFINITY)],
        };
        assert_eq!(solve(&lp).unwrap(), LpOutcome::Infeasible);
    }

    #[test]
    fn detects_crossed_bounds() {
        let lp = LinearProgram {
            objective: vec![1.0],
            constraints: vec![con(&[(0, 1.0)], Relation::Le, 10.0)],
            bounds: vec![(4.0, 2.0)],
        };
        assert_eq!(solve(&lp).unwrap(), LpOutcome::Infeasible);
    }

    #[test]
    fn detects_unboundedness() {
        let lp = LinearProgram {
            objective: vec![-1.0],
            constraints: vec![con(&[(0, 1.0)], Relation::Ge, 0.0)],
            bounds: vec![(0.0, f64::INFINITY)],
        };
        assert_eq!(solve(&lp).unwrap(), LpOutcome::Unbounded);
    }

    #[test]
    fn no_constraints_minimizes_at_bounds() {
        let lp = LinearProgram {
            objective: vec![2.0, -3.0],
            constraints: vec![],
            bounds: vec![(1.0, 5.0), (0.0, 4.0)],
        };
        let (x, obj) = optimal(solve(&lp).unwrap());
        assert_eq!(x, vec![1.0, 4.0]);
        assert!((obj - (2.0 - 12.0)).abs() < 1e-12);
    }

    #[test]
    fn random_lps_match_dense_enumeration() {
        // Transportation-like LPs with integral vertices: compare against
        // enumeration of integer points (optimum is integral for these).
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(99);
        for _ in 0..50 {
            // Two suppliers, two consumers.
            let supply = [rng.gen_range(1..=3), rng.gen_range(1..=3)];
            let demand_total = supply[0] + supply[1];
            let demand = [rng.gen_range(0..=demand_total), 0];
            let demand = [demand[0], demand_total - demand[0]];
            let cost: Vec<f64> = (0..4).map(|_| rng.gen_range(1.0..10.0)).collect();

            // Vars x_sc: s*2 + c.
            let lp = LinearProgram {
                objective: cost.clone(),
                constraints: vec![
                    con(&[(0, 1.0), (1, 1.0)], Relation::Le, supply[0] as f64),
                    con(&[(2, 1.0), (3, 1.0)], Relation::Le, supply[1] as f64),
                    con(&[(0, 1.0), (2, 1.0)], Relation::Eq, demand[0] as f64),
                    con(&[(1, 1.0), (3, 1.0)], Relation::Eq, demand[1] as f64),
                ],
                bounds: vec![(0.0, f64::INFINITY); 4],
            };
            let (_, obj) = optimal(solve(&lp).unwrap());

            let mut best = f64::INFINITY;
            for x0 in 0..=3i32 {
                for x1 in 0..=3i32 {
                    for x2 in 0..=3i32 {
                        for x3 in 0..=3i32 {
                            if x0 + x1 <= supply[0]
                                && x2 + x3 <= supply[1]
                                && x0 + x2 == demand[0]
                                && x1 + x3 == demand[1]
                            {
                                let value = cost[0] * x0 as f64
                                    + cost[1] * x1 as f64
                                    + cost[2] * x2 as f64
                                    + cost[3] * x3 as f64;
                                best = best.min(value);
                            }
                        }
                    }
                }
            }
            assert!(
                (obj - best).abs() < 1e-7,
                "simplex {obj} vs enumeration {best}"
            );
        }
    }
}
