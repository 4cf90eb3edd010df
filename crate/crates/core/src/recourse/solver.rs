use std::cmp::{Ordering, Reverse};
use std::collections::BinaryHeap;
use std::time::Instant;

use super::{ConstraintStatus, RecoursePlan, RecourseProblem, SolveOptions, SufficiencyConstraint};
use crate::error::{Error, Result};

pub const DEFAULT_NODE_LIMIT: usize = 10_000_000;
/// Largest joint action space [`brute_force`] enumerates.
pub const BRUTE_FORCE_LIMIT: usize = 10_000_000;

/// Lower bounds are shrunk by this relative margin so rounding never lets
/// them exceed the cost of a completion.
const BOUND_MARGIN: f64 = 1e-9;

/// Rounding slack for bounds over integral costs.
const INTEGRAL_SLACK: f64 = 1e-6;

#[derive(Debug, Clone, Copy)]
struct Move {
    /// Tie-break key: 0 keeps the current value, `1 + j` selects value `j`.
    key: u32,
    value: usize,
    cost: f64,
    gain: f64,
}

/// Allowed moves per attribute in key order; infinite-cost moves are dropped.
fn moves(problem: &RecourseProblem, c: &SufficiencyConstraint) -> Vec<Vec<Move>> {
    problem
        .actionable
        .iter()
        .zip(&c.gains)
        .map(|(a, g)| {
            let mut m = vec![Move {
                key: 0,
                value: a.current,
                cost: 0.0,
                gain: 0.0,
            }];
            for (j, (&cost, &gain)) in a.costs.iter().zip(g).enumerate() {
                if j != a.current && cost.is_finite() {
                    m.push(Move {
                        key: 1 + j as u32,
                        value: j,
                        cost,
                        gain,
                    });
                }
            }
            m
        })
        .collect()
}

/// Segments `(ratio, gain, cost)` of the lower convex hull of an
/// attribute's `(gain, cost)` points, starting at the origin.
fn hull(moves: &[Move]) -> Vec<(f64, f64, f64)> {
    let pts: Vec<(f64, f64)> = moves.iter().filter(|m| m.gain > 0.0).map(|m| (m.gain, m.cost)).collect();
    let mut out = Vec::new();
    let (mut g0, mut c0) = (0.0, 0.0);
    loop {
        let mut best: Option<(f64, f64, f64)> = None;
        for &(g, c) in &pts {
            if g <= g0 {
                continue;
            }
            let r = (c - c0).max(0.0) / (g - g0);
            let better = match best {
                None => true,
                Some((br, bg, _)) => r < br || (r == br && g > bg),
            };
            if better {
                best = Some((r, g, c));
            }
        }
        match best {
            None => break,
            Some((r, g, c)) => {
                out.push((r, g - g0, (c - c0).max(0.0)));
                g0 = g;
                c0 = c0.max(c);
            }
        }
    }
    out
}

/// Per-depth relaxations of the remaining attributes.
struct Relaxation {
    segments: Vec<Vec<(f64, f64, f64)>>,
    max_gain: Vec<f64>,
}

impl Relaxation {
    fn new(moves: &[Vec<Move>]) -> Self {
        let n = moves.len();
        let mut segments = vec![Vec::new(); n + 1];
        let mut max_gain = vec![0.0; n + 1];
        for i in (0..n).rev() {
            let mut s = segments[i + 1].clone();
            s.extend(hull(&moves[i]));
            s.sort_by(|a: &(f64, f64, f64), b| a.0.total_cmp(&b.0));
            max_gain[i] = s.iter().map(|x| x.1).sum();
            segments[i] = s;
        }
        Relaxation { segments, max_gain }
    }

    /// Minimum extra cost of the fractional relaxation to gain `deficit`
    /// from attributes `depth..`, or `None` if even the full gain falls
    /// short.
    fn bound(&self, depth: usize, deficit: f64, tol: f64) -> Option<f64> {
        if deficit <= 0.0 {
            return Some(0.0);
        }
        if deficit > self.max_gain[depth] + tol {
            return None;
        }
        let mut left = deficit;
        let mut cost = 0.0;
        for &(ratio, gain, c) in &self.segments[depth] {
            if left <= 0.0 {
                break;
            }
            if gain <= left {
                cost += c;
                left -= gain;
            } else {
                cost += ratio * left;
                left = 0.0;
            }
        }
        Some(cost * (1.0 - BOUND_MARGIN))
    }
}

struct Node {
    bound: f64,
    keys: Vec<u32>,
    choice: Vec<usize>,
    cost: f64,
    score: f64,
}

impl PartialEq for Node {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Node {}
impl PartialOrd for Node {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Node {
    fn cmp(&self, other: &Self) -> Ordering {
        self.bound
            .total_cmp(&other.bound)
            .then_with(|| self.keys.cmp(&other.keys))
    }
}

/// Best-first branch and bound over attributes in schema order. Returns a
/// minimum-cost feasible plan; among equal costs, the plan whose move keys
/// are lexicographically smallest.
pub fn solve(
    problem: &RecourseProblem,
    constraint: &SufficiencyConstraint,
    opts: &SolveOptions,
) -> Result<RecoursePlan> {
    if constraint.status == ConstraintStatus::Infeasible {
        return Ok(RecoursePlan::build(problem, constraint, None, 0));
    }
    let moves = moves(problem, constraint);
    let relax = Relaxation::new(&moves);
    let n = moves.len();
    let tol = 1e-9 * (1.0 + constraint.rhs.abs().min(1e12));
    let deficit = |score: f64| match constraint.status {
        ConstraintStatus::Active => constraint.rhs - score,
        _ => f64::NEG_INFINITY,
    };
    // With integral costs every completion costs an integer, so bounds
    // round up.
    let integral = moves.iter().flatten().all(|m| m.cost.fract() == 0.0 && m.cost < 1e15);
    let round = |b: f64| if integral { (b - INTEGRAL_SLACK).ceil() } else { b };
    let start = Instant::now();
    let mut heap = BinaryHeap::new();
    if let Some(b) = relax.bound(0, deficit(constraint.base), tol) {
        heap.push(Reverse(Node {
            bound: b,
            keys: Vec::new(),
            choice: Vec::new(),
            cost: 0.0,
            score: constraint.base,
        }));
    }
    let mut explored = 0usize;
    while let Some(Reverse(node)) = heap.pop() {
        explored += 1;
        if explored > opts.node_limit {
            return Err(Error::Limit(format!(
                "branch and bound explored more than {} nodes",
                opts.node_limit
            )));
        }
        if let Some(t) = opts.timeout {
            if explored.is_multiple_of(256) && start.elapsed() > t {
                return Err(Error::Limit(format!(
                    "branch and bound exceeded {} ms",
                    t.as_millis()
                )));
            }
        }
        let depth = node.choice.len();
        if depth == n {
            return Ok(RecoursePlan::build(problem, constraint, Some(&node.choice), explored));
        }
        if deficit(node.score) <= 0.0 {
            // Leaving the rest unchanged is the cheapest completion and the
            // smallest in key order.
            let mut choice = node.choice.clone();
            choice.extend(problem.actionable[depth..].iter().map(|a| a.current));
            if constraint.satisfied(&choice) {
                return Ok(RecoursePlan::build(problem, constraint, Some(&choice), explored));
            }
        }
        for m in &moves[depth] {
            let cost = node.cost + m.cost;
            let score = node.score + m.gain;
            let mut choice = node.choice.clone();
            choice.push(m.value);
            let bound = if depth + 1 == n {
                if !constraint.satisfied(&choice) {
                    continue;
                }
                cost
            } else {
                match relax.bound(depth + 1, deficit(score), tol) {
                    Some(b) => round(cost + b),
                    None => continue,
                }
            };
            let mut keys = node.keys.clone();
            keys.push(m.key);
            heap.push(Reverse(Node {
                bound,
                keys,
                choice,
                cost,
                score,
            }));
        }
    }
    Ok(RecoursePlan::build(problem, constraint, None, explored))
}

/// Exhaustive search in move-key order, keeping the first plan of strictly
/// lowest cost.
pub fn brute_force(problem: &RecourseProblem, constraint: &SufficiencyConstraint) -> Result<RecoursePlan> {
    let size = problem
        .actionable
        .iter()
        .try_fold(1usize, |acc, a| acc.checked_mul(a.domain.len()))
        .filter(|&s| s <= BRUTE_FORCE_LIMIT)
        .ok_or_else(|| {
            Error::Limit(format!("joint action space exceeds {BRUTE_FORCE_LIMIT} plans"))
        })?;
    let moves = moves(problem, constraint);
    let n = moves.len();
    let mut idx = vec![0usize; n];
    let mut best: Option<(f64, Vec<usize>)> = None;
    let mut explored = 0;
    loop {
        explored += 1;
        let choice: Vec<usize> = idx.iter().zip(&moves).map(|(&i, m)| m[i].value).collect();
        if constraint.satisfied(&choice) {
            let mut cost = 0.0;
            for (&i, m) in idx.iter().zip(&moves) {
                cost += m[i].cost;
            }
            if best.as_ref().is_none_or(|(b, _)| cost < *b) {
                best = Some((cost, choice));
            }
        }
        let mut k = n;
        loop {
            if k == 0 {
                debug_assert!(explored <= size);
                return Ok(RecoursePlan::build(
                    problem,
                    constraint,
                    best.as_ref().map(|(_, c)| c.as_slice()),
                    explored,
                ));
            }
            k -= 1;
            idx[k] += 1;
            if idx[k] < moves[k].len() {
                break;
            }
            idx[k] = 0;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::recourse::{Actionable, ThresholdSource};
    use crate::data::EventSpec;
    use std::collections::BTreeMap;

    fn problem(costs: Vec<Vec<f64>>) -> RecourseProblem {
        RecourseProblem {
            individual: BTreeMap::new(),
            actionable: costs
                .into_iter()
                .enumerate()
                .map(|(i, c)| Actionable {
                    name: format!("a{i}"),
                    domain: (0..c.len()).map(|j| j.to_string()).collect(),
                    current: 0,
                    costs: c,
                })
                .collect(),
            alpha: 0.9,
            context: EventSpec::new(),
        }
    }

    fn constraint(gains: Vec<Vec<f64>>, rhs: f64) -> SufficiencyConstraint {
        SufficiencyConstraint {
            current_probability: 0.1,
            threshold: 0.5,
            threshold_source: ThresholdSource::Empirical,
            status: ConstraintStatus::Active,
            rhs,
            base: 0.0,
            gains,
        }
    }

    #[test]
    fn picks_cheapest_combination() {
        let p = problem(vec![vec![0.0, 1.0, 2.0], vec![0.0, 1.5]]);
        let c = constraint(vec![vec![0.0, 1.0, 2.5], vec![0.0, 2.0]], 2.4);
        let plan = solve(&p, &c, &SolveOptions::default()).unwrap();
        assert_eq!(plan.cost, Some(2.0));
        assert_eq!(plan.changes.len(), 1);
        assert_eq!(plan.changes[0].to, "2");
        assert_eq!(plan.constraint_count, 3);
        assert_eq!(plan, RecoursePlan { nodes_explored: plan.nodes_explored, ..brute_force(&p, &c).unwrap() });
    }

    #[test]
    fn infinite_cost_moves_are_never_taken() {
        let p = problem(vec![vec![0.0, f64::INFINITY], vec![0.0, 5.0]]);
        let c = constraint(vec![vec![0.0, 10.0], vec![0.0, 1.0]], 1.0);
        let plan = solve(&p, &c, &SolveOptions::default()).unwrap();
        assert_eq!(plan.cost, Some(5.0));
        let c = constraint(vec![vec![0.0, 10.0], vec![0.0, 1.0]], 2.0);
        assert!(!solve(&p, &c, &SolveOptions::default()).unwrap().feasible);
        assert!(!brute_force(&p, &c).unwrap().feasible);
    }

    #[test]
    fn ties_prefer_earlier_keys() {
        let p = problem(vec![vec![0.0, 1.0], vec![0.0, 1.0]]);
        let c = constraint(vec![vec![0.0, 1.0], vec![0.0, 1.0]], 1.0);
        let plan = solve(&p, &c, &SolveOptions::default()).unwrap();
        // Keeping a0 (key 0) and changing a1 is lexicographically first.
        assert_eq!(plan.changes[0].attribute, "a1");
        assert_eq!(brute_force(&p, &c).unwrap().changes, plan.changes);
    }

    #[test]
    fn node_limit_is_enforced() {
        let p = problem(vec![vec![0.0, 1.0]; 12]);
        let c = constraint(vec![vec![0.0, 1.0]; 12], 12.0);
        let opts = SolveOptions {
            node_limit: 3,
            timeout: None,
        };
        assert!(matches!(solve(&p, &c, &opts), Err(Error::Limit(_))));
    }

    #[test]
    fn hull_is_convex() {
        let m = |key, gain, cost| Move {
            key,
            value: key as usize,
            cost,
            gain,
        };
        let h = hull(&[m(0, 0.0, 0.0), m(1, 1.0, 3.0), m(2, 2.0, 2.0), m(3, 4.0, 6.0)]);
        assert_eq!(h, vec![(1.0, 2.0, 2.0), (2.0, 2.0, 4.0)]);
    }
}
