//! Exact rational linear programming for Kantorovich distances.
//!
//! Two independent solvers: a transportation (min-cost flow) solver for the
//! primal coupling problem and a dense simplex for the dual over Lipschitz
//! potentials. Both work on [`Rat`] and return exact optima.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use num_traits::{Signed, Zero};

use crate::rational::{self, Rat};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum LpError {
    #[error("total masses differ: {0} vs {1}")]
    MassMismatch(String, String),
    #[error("negative mass or capacity")]
    Negative,
    #[error("dimension mismatch in LP input")]
    Dimension,
    #[error("linear program is unbounded")]
    Unbounded,
}

/// An optimal coupling.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Transport {
    pub cost: Rat,
    /// `(source index, target index, mass)` for every used cell.
    pub plan: Vec<(usize, usize, Rat)>,
}

struct Edge {
    to: usize,
    cap: Rat,
    cost: Rat,
    rev: usize,
}

struct Network {
    adj: Vec<Vec<Edge>>,
}

impl Network {
    fn new(n: usize) -> Self {
        Network { adj: (0..n).map(|_| Vec::new()).collect() }
    }

    fn add(&mut self, from: usize, to: usize, cap: Rat, cost: Rat) {
        let back = self.adj[to].len();
        let fwd = self.adj[from].len();
        self.adj[from].push(Edge { to, cap, cost: cost.clone(), rev: back });
        self.adj[to].push(Edge { to: from, cap: rational::zero(), cost: -cost, rev: fwd });
    }

    /// Bellman-Ford shortest path over residual edges. Returns, per node,
    /// the `(predecessor, edge index)` on a shortest path.
    fn shortest_path(&self, source: usize) -> Vec<Option<(usize, usize)>> {
        let n = self.adj.len();
        let mut dist: Vec<Option<Rat>> = vec![None; n];
        let mut pred = vec![None; n];
        dist[source] = Some(rational::zero());
        for _ in 0..n {
            let mut changed = false;
            for u in 0..n {
                let Some(du) = dist[u].clone() else { continue };
                for (ei, e) in self.adj[u].iter().enumerate() {
                    if !e.cap.is_positive() {
                        continue;
                    }
                    let candidate = &du + &e.cost;
                    if dist[e.to].as_ref().is_none_or(|dv| candidate < *dv) {
                        dist[e.to] = Some(candidate);
                        pred[e.to] = Some((u, ei));
                        changed = true;
                    }
                }
            }
            if !changed {
                break;
            }
        }
        pred
    }
}

/// Minimum-cost coupling of `supply` and `demand` under `cost[i][j]`, by
/// successive shortest augmenting paths.
pub fn transport(supply: &[Rat], demand: &[Rat], cost: &[Vec<Rat>]) -> Result<Transport, LpError> {
    let (p, q) = (supply.len(), demand.len());
    if cost.len() != p || cost.iter().any(|row| row.len() != q) {
        return Err(LpError::Dimension);
    }
    if supply.iter().chain(demand).any(Signed::is_negative) {
        return Err(LpError::Negative);
    }
    let total: Rat = supply.iter().sum();
    let total_demand: Rat = demand.iter().sum();
    if total != total_demand {
        return Err(LpError::MassMismatch(rational::format_rat(&total), rational::format_rat(&total_demand)));
    }
    let (s, t) = (0, p + q + 1);
    let mut net = Network::new(p + q + 2);
    for (i, m) in supply.iter().enumerate() {
        if m.is_positive() {
            net.add(s, 1 + i, m.clone(), rational::zero());
        }
    }
    for (j, m) in demand.iter().enumerate() {
        if m.is_positive() {
            net.add(1 + p + j, t, m.clone(), rational::zero());
        }
    }
    for i in (0..p).filter(|&i| supply[i].is_positive()) {
        for j in (0..q).filter(|&j| demand[j].is_positive()) {
            net.add(1 + i, 1 + p + j, total.clone(), cost[i][j].clone());
        }
    }
    let mut flow = rational::zero();
    while flow < total {
        let pred = net.shortest_path(s);
        let mut path = Vec::new();
        let mut v = t;
        while v != s {
            let (u, ei) = pred[v].expect("a feasible coupling always has an augmenting path");
            path.push((u, ei));
            v = u;
        }
        let bottleneck = path.iter().map(|&(u, ei)| net.adj[u][ei].cap.clone()).min().expect("nonempty path");
        for &(u, ei) in &path {
            net.adj[u][ei].cap -= &bottleneck;
            let (to, rev) = (net.adj[u][ei].to, net.adj[u][ei].rev);
            net.adj[to][rev].cap += &bottleneck;
        }
        flow += bottleneck;
    }
    let mut plan = Vec::new();
    let mut total_cost = rational::zero();
    for i in 0..p {
        for e in &net.adj[1 + i] {
            if e.to > p && e.to <= p + q {
                let used = &net.adj[e.to][e.rev].cap;
                if used.is_positive() {
                    total_cost += used * &e.cost;
                    plan.push((i, e.to - 1 - p, used.clone()));
                }
            }
        }
    }
    Ok(Transport { cost: total_cost, plan })
}

/// Maximizes `c·x` subject to `A x <= b`, `x >= 0`, with `b >= 0` so that
/// the slack basis is feasible. Bland's rule guarantees termination.
pub fn simplex_max(c: &[Rat], a: &[Vec<Rat>], b: &[Rat]) -> Result<(Rat, Vec<Rat>), LpError> {
    let (m, n) = (a.len(), c.len());
    if b.len() != m || a.iter().any(|row| row.len() != n) {
        return Err(LpError::Dimension);
    }
    if b.iter().any(Signed::is_negative) {
        return Err(LpError::Negative);
    }
    let width = n + m + 1;
    // Rows 0..m are constraints, row m is the objective (stored negated).
    let mut tab: Vec<Vec<Rat>> = Vec::with_capacity(m + 1);
    for (i, row) in a.iter().enumerate() {
        let mut r = vec![rational::zero(); width];
        r[..n].clone_from_slice(row);
        r[n + i] = rational::one();
        r[width - 1] = b[i].clone();
        tab.push(r);
    }
    let mut obj = vec![rational::zero(); width];
    for (j, cj) in c.iter().enumerate() {
        obj[j] = -cj;
    }
    tab.push(obj);
    let mut basis: Vec<usize> = (n..n + m).collect();
    loop {
        let Some(enter) = (0..n + m).find(|&j| tab[m][j].is_negative()) else { break };
        let mut leave: Option<(usize, Rat)> = None;
        for i in 0..m {
            if tab[i][enter].is_positive() {
                let ratio = &tab[i][width - 1] / &tab[i][enter];
                let better = match &leave {
                    None => true,
                    Some((l, best)) => ratio < *best || (ratio == *best && basis[i] < basis[*l]),
                };
                if better {
                    leave = Some((i, ratio));
                }
            }
        }
        let Some((row, _)) = leave else { return Err(LpError::Unbounded) };
        let pivot = tab[row][enter].clone();
        for v in tab[row].iter_mut() {
            *v /= &pivot;
        }
        let pivot_row = tab[row].clone();
        for (i, r) in tab.iter_mut().enumerate() {
            if i == row || r[enter].is_zero() {
                continue;
            }
            let factor = r[enter].clone();
            for (v, p) in r.iter_mut().zip(&pivot_row) {
                if !p.is_zero() {
                    *v -= &factor * p;
                }
            }
        }
        basis[row] = enter;
    }
    let mut x = vec![rational::zero(); n];
    for (i, &var) in basis.iter().enumerate() {
        if var < n {
            x[var] = tab[i][width - 1].clone();
        }
    }
    Ok((tab[m][width - 1].clone(), x))
}

/// Optimal Lipschitz potential.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Potential {
    pub value: Rat,
    pub g: Vec<Rat>,
}

/// Maximizes `Σ w_i g_i` over potentials `g` with `0 <= g <= 1` and
/// `g_i - g_j <= dist[i][j]`.
pub fn lipschitz_dual(weights: &[Rat], dist: &[Vec<Rat>]) -> Result<Potential, LpError> {
    let p = weights.len();
    if dist.len() != p || dist.iter().any(|row| row.len() != p) {
        return Err(LpError::Dimension);
    }
    let mut a = Vec::new();
    let mut b = Vec::new();
    for i in 0..p {
        let mut row = vec![rational::zero(); p];
        row[i] = rational::one();
        a.push(row);
        b.push(rational::one());
    }
    for i in 0..p {
        for j in 0..p {
            // constraints with d >= 1 are implied by the box
            if i != j && dist[i][j] < rational::one() {
                let mut row = vec![rational::zero(); p];
                row[i] = rational::one();
                row[j] = -rational::one();
                a.push(row);
                b.push(dist[i][j].clone());
            }
        }
    }
    let (value, g) = simplex_max(weights, &a, &b)?;
    Ok(Potential { value, g })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::rat;

    #[test]
    fn point_masses_cost_their_distance() {
        let cost = vec![vec![rat(0, 1), rat(2, 5)], vec![rat(2, 5), rat(0, 1)]];
        let t = transport(&[rat(1, 1), rat(0, 1)], &[rat(0, 1), rat(1, 1)], &cost).unwrap();
        assert_eq!(t.cost, rat(2, 5));
        let same = transport(&[rat(1, 2), rat(1, 2)], &[rat(1, 2), rat(1, 2)], &cost).unwrap();
        assert_eq!(same.cost, rat(0, 1));
    }

    #[test]
    fn mass_mismatch_is_rejected() {
        let cost = vec![vec![rat(0, 1)]];
        assert!(matches!(transport(&[rat(9, 10)], &[rat(1, 1)], &cost), Err(LpError::MassMismatch(_, _))));
    }

    #[test]
    fn primal_and_dual_agree() {
        // two points at distance 1, (1,0) vs (1/2,1/2)
        let d = vec![vec![rat(0, 1), rat(1, 1)], vec![rat(1, 1), rat(0, 1)]];
        let t = transport(&[rat(1, 1), rat(0, 1)], &[rat(1, 2), rat(1, 2)], &d).unwrap();
        assert_eq!(t.cost, rat(1, 2));
        let dual = lipschitz_dual(&[rat(1, 2), rat(-1, 2)], &d).unwrap();
        assert_eq!(dual.value, rat(1, 2));
    }

    #[test]
    fn simplex_small_problem() {
        // max 3x + 2y, x + y <= 4, x + 3y <= 6, x <= 3
        let (v, x) = simplex_max(
            &[rat(3, 1), rat(2, 1)],
            &[vec![rat(1, 1), rat(1, 1)], vec![rat(1, 1), rat(3, 1)], vec![rat(1, 1), rat(0, 1)]],
            &[rat(4, 1), rat(6, 1), rat(3, 1)],
        )
        .unwrap();
        assert_eq!(v, rat(11, 1));
        assert_eq!(x, vec![rat(3, 1), rat(1, 1)]);
    }

    #[test]
    fn unbounded_detected() {
        assert_eq!(simplex_max(&[rat(1, 1)], &[vec![rat(-1, 1)]], &[rat(1, 1)]), Err(LpError::Unbounded));
    }
}
