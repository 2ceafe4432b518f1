//! Network-simplex solver for the nodal dual-norm linear program.
//!
//! For a fixed split `t + s = 1` of the test-norm budget, the program
//!
//! ```text
//! maximize Σ_j g_j φ_j   s.t.  |φ_j| ≤ t,  φ_j - φ_k ≤ s (|j - k| / n)^α
//! ```
//!
//! is the dual of an uncapacitated min-cost flow on the `n + 1` grid nodes
//! plus a ground node `G` (with `φ_G = 0`): every ordered pair of grid nodes
//! is joined by an arc of cost `s (d / n)^α`, and every grid node is joined to
//! and from `G` by arcs of cost `t`. Node `j` supplies `g_j`; since
//! `Σ g_j = 0`, the ground node is balanced. Optimal potentials are optimal
//! test-function values.
//!
//! The outer problem over `t ∈ [0, 1]` is concave. Each inner solve yields a
//! primal flow, and a flow stays feasible for every `t`, so its cost
//! `t A + (1 - t) C` is a global upper bound line. Cutting-plane iteration on
//! those lines drives the upper and lower bounds together; the spanning tree
//! is reused between values of `t`.

use crate::error::{Error, Result};

const NONE: usize = usize::MAX;

/// Reduced-cost tolerance for pricing.
const PRICE_EPS: f64 = 1e-13;

pub(crate) struct FlowSolver {
    /// Grid node count `n + 1`; node index `nodes` is the ground node.
    nodes: usize,
    supply: Vec<f64>,
    /// `(d / n)^α` for `d = 0..nodes`.
    dist: Vec<f64>,
    /// `s * dist[d]` for the current split.
    scaled: Vec<f64>,
    t: f64,
    s: f64,
    parent: Vec<usize>,
    /// Tree arc at `v` points from `v` to its parent.
    up: Vec<bool>,
    flow: Vec<f64>,
    pi: Vec<f64>,
    depth: Vec<usize>,
    // Scratch for the tree recomputation.
    done: Vec<bool>,
    stack: Vec<usize>,
    cursor: usize,
    pub(crate) pivots: usize,
}

impl FlowSolver {
    /// `supply[j]` is the objective coefficient of `φ_j`; `cells` is `n`.
    pub(crate) fn new(supply: Vec<f64>, cells: usize, alpha: f64) -> Self {
        let nodes = supply.len();
        let total = nodes + 1;
        let dist = (0..nodes)
            .map(|d| (d as f64 / cells as f64).powf(alpha))
            .collect();
        let root = nodes;
        let mut parent = vec![root; total];
        parent[root] = NONE;
        let mut up = vec![false; total];
        let mut flow = vec![0.0; total];
        // Strongly feasible start: sources drain into the ground node,
        // sinks are fed from it.
        for j in 0..nodes {
            if supply[j] >= 0.0 {
                up[j] = true;
                flow[j] = supply[j];
            } else {
                up[j] = false;
                flow[j] = -supply[j];
            }
        }
        let mut depth = vec![1; total];
        depth[root] = 0;
        FlowSolver {
            nodes,
            supply,
            dist,
            scaled: vec![0.0; nodes],
            t: 0.0,
            s: 0.0,
            parent,
            up,
            flow,
            pi: vec![0.0; total],
            depth,
            done: vec![false; total],
            stack: Vec::with_capacity(total),
            cursor: 0,
            pivots: 0,
        }
    }

    fn root(&self) -> usize {
        self.nodes
    }

    fn cost(&self, u: usize, v: usize) -> f64 {
        if u == self.root() || v == self.root() {
            self.t
        } else {
            self.scaled[u.abs_diff(v)]
        }
    }

    fn set_split(&mut self, t: f64) {
        self.t = t;
        self.s = 1.0 - t;
        let s = self.s;
        for (sc, &d) in self.scaled.iter_mut().zip(&self.dist) {
            *sc = s * d;
        }
        self.recompute_tree();
    }

    /// Recomputes depth and potentials from the parent pointers in O(nodes).
    fn recompute_tree(&mut self) {
        let root = self.root();
        self.done.iter_mut().for_each(|d| *d = false);
        self.done[root] = true;
        self.pi[root] = 0.0;
        self.depth[root] = 0;
        for start in 0..self.nodes {
            let mut v = start;
            while !self.done[v] {
                self.stack.push(v);
                v = self.parent[v];
            }
            while let Some(w) = self.stack.pop() {
                let p = self.parent[w];
                let c = self.cost(w, p);
                // Tree arcs have zero reduced cost: c - π_src + π_tgt = 0.
                self.pi[w] = if self.up[w] {
                    self.pi[p] + c
                } else {
                    self.pi[p] - c
                };
                self.depth[w] = self.depth[p] + 1;
                self.done[w] = true;
            }
        }
    }

    /// Block pricing, one source node per block. Returns the entering arc.
    fn find_entering(&mut self) -> Option<(usize, usize)> {
        let total = self.nodes + 1;
        let root = self.root();
        for _ in 0..total {
            let u = self.cursor;
            self.cursor = (self.cursor + 1) % total;
            let mut best = -PRICE_EPS;
            let mut best_v = NONE;
            if u == root {
                for v in 0..self.nodes {
                    let rc = self.t + self.pi[v];
                    if rc < best {
                        best = rc;
                        best_v = v;
                    }
                }
            } else {
                let pu = self.pi[u];
                for v in 0..self.nodes {
                    let rc = self.scaled[u.abs_diff(v)] - pu + self.pi[v];
                    if rc < best {
                        best = rc;
                        best_v = v;
                    }
                }
                let rc = self.t - pu;
                if rc < best {
                    best_v = root;
                }
            }
            if best_v != NONE {
                return Some((u, best_v));
            }
        }
        None
    }

    fn pivot(&mut self, u_in: usize, v_in: usize) -> Result<()> {
        // Join of the cycle closed by the entering arc u_in -> v_in.
        let (mut a, mut b) = (u_in, v_in);
        while a != b {
            if self.depth[a] >= self.depth[b] {
                a = self.parent[a];
            } else {
                b = self.parent[b];
            }
        }
        let join = a;

        // Leaving arc, strongly feasible rule. Flow moves along
        // u_in -> v_in -> ... -> join -> ... -> u_in.
        let mut delta = f64::INFINITY;
        let mut out = NONE;
        let mut on_first = true;
        let mut w = u_in;
        while w != join {
            // Traversed parent -> w: an upward arc loses flow.
            if self.up[w] && self.flow[w] < delta {
                delta = self.flow[w];
                out = w;
            }
            w = self.parent[w];
        }
        let mut w = v_in;
        while w != join {
            // Traversed w -> parent: a downward arc loses flow.
            if !self.up[w] && self.flow[w] <= delta {
                delta = self.flow[w];
                out = w;
                on_first = false;
            }
            w = self.parent[w];
        }
        if out == NONE {
            return Err(Error::InvalidArgument(
                "unbounded flow cycle: costs must be nonnegative".into(),
            ));
        }

        if delta > 0.0 {
            let mut w = u_in;
            while w != join {
                if self.up[w] {
                    self.flow[w] -= delta;
                } else {
                    self.flow[w] += delta;
                }
                w = self.parent[w];
            }
            let mut w = v_in;
            while w != join {
                if self.up[w] {
                    self.flow[w] += delta;
                } else {
                    self.flow[w] -= delta;
                }
                w = self.parent[w];
            }
        }

        // Re-hang the path from the entering endpoint below `out` onto the
        // other endpoint, reversing tree arcs along the way.
        let (head, anchor, head_up) = if on_first {
            (u_in, v_in, true)
        } else {
            (v_in, u_in, false)
        };
        let mut prev_parent = anchor;
        let mut prev_up = head_up;
        let mut prev_flow = delta;
        let mut w = head;
        loop {
            let next = self.parent[w];
            let (old_up, old_flow) = (self.up[w], self.flow[w]);
            self.parent[w] = prev_parent;
            self.up[w] = prev_up;
            self.flow[w] = prev_flow;
            if w == out {
                break;
            }
            prev_parent = w;
            // The arc that hung `w` below `next` now hangs `next` below `w`.
            prev_up = !old_up;
            prev_flow = old_flow;
            w = next;
        }
        self.recompute_tree();
        self.pivots += 1;
        Ok(())
    }

    /// Solves the inner flow problem for split `t`, within `max_pivots`.
    fn solve_split(&mut self, t: f64, max_pivots: usize) -> Result<bool> {
        self.set_split(t);
        let stop = self.pivots + max_pivots;
        while let Some((u, v)) = self.find_entering() {
            if self.pivots >= stop {
                return Ok(false);
            }
            self.pivot(u, v)?;
        }
        Ok(true)
    }

    /// Objective `Σ g_j π_j` of the current potentials.
    fn dual_value(&self) -> f64 {
        self.supply.iter().zip(&self.pi).map(|(g, p)| g * p).sum()
    }

    /// Coefficients `(A, C)` of the upper-bound line `t A + (1 - t) C` of the
    /// current flow.
    fn flow_line(&self) -> (f64, f64) {
        let root = self.root();
        let (mut ground, mut pairs) = (0.0, 0.0);
        for v in 0..self.nodes {
            let p = self.parent[v];
            if p == root {
                ground += self.flow[v];
            } else {
                pairs += self.flow[v] * self.dist[v.abs_diff(p)];
            }
        }
        (ground, pairs)
    }

    fn potentials(&self) -> Vec<f64> {
        self.pi[..self.nodes].to_vec()
    }
}

/// Outcome of the cutting-plane iteration.
#[derive(Clone, Debug)]
pub(crate) struct FlowOutcome {
    pub lower: f64,
    pub upper: f64,
    pub t: f64,
    pub phi: Vec<f64>,
    pub outer_iterations: usize,
    pub pivots: usize,
}

/// Maximum of the lower envelope of lines `a t + b` over `[0, 1]`.
fn envelope_max(lines: &[(f64, f64)]) -> (f64, f64) {
    let eval = |t: f64| {
        lines
            .iter()
            .map(|&(a, b)| a * t + b)
            .fold(f64::INFINITY, f64::min)
    };
    let mut best = (0.0, eval(0.0));
    let mut consider = |t: f64| {
        let v = eval(t);
        if v > best.1 {
            best = (t, v);
        }
    };
    consider(1.0);
    for i in 0..lines.len() {
        for j in i + 1..lines.len() {
            let da = lines[i].0 - lines[j].0;
            if da.abs() > 1e-300 {
                let t = (lines[j].1 - lines[i].1) / da;
                if (0.0..=1.0).contains(&t) {
                    consider(t);
                }
            }
        }
    }
    best
}

/// Maximizes `Σ g_j φ_j` over nodal test functions with `|φ|_α ≤ 1`.
///
/// `g` has one entry per grid node (`cells + 1` entries) and must sum to
/// zero up to rounding. The returned lower bound is attained by the returned
/// `phi`; the upper bound is certified by a feasible flow.
pub(crate) fn maximize(
    g: &[f64],
    cells: usize,
    alpha: f64,
    tol: f64,
    max_outer: usize,
) -> Result<FlowOutcome> {
    let scale = g.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if scale == 0.0 {
        return Ok(FlowOutcome {
            lower: 0.0,
            upper: 0.0,
            t: 0.0,
            phi: vec![0.0; g.len()],
            outer_iterations: 0,
            pivots: 0,
        });
    }
    // Work with normalized supplies so tolerances are scale free.
    let mut supply: Vec<f64> = g.iter().map(|v| v / scale).collect();
    let drift: f64 = supply.iter().sum();
    // Push the rounding imbalance onto the last node so the ground node is
    // balanced.
    let last = supply.len() - 1;
    supply[last] -= drift;

    let nodes = supply.len();
    let max_pivots = 50 * nodes * nodes + 10_000;
    let mut solver = FlowSolver::new(supply, cells, alpha);
    let mut lines: Vec<(f64, f64)> = Vec::new();
    let mut visited: Vec<f64> = Vec::new();
    let mut lower = f64::NEG_INFINITY;
    let mut best_phi = vec![0.0; nodes];
    let mut best_t = 0.0;
    let mut upper = f64::INFINITY;
    let mut t = 1.0 / 3.0;
    for iter in 1..=max_outer {
        if !solver.solve_split(t, max_pivots)? {
            break;
        }
        let value = solver.dual_value();
        if value > lower {
            lower = value;
            best_phi = solver.potentials();
            best_t = t;
        }
        let (a, c) = solver.flow_line();
        lines.push((a - c, c));
        visited.push(t);
        let (t_next, u) = envelope_max(&lines);
        upper = u;
        if upper - lower <= tol / scale * upper.abs().max(1.0) {
            return Ok(FlowOutcome {
                lower: lower * scale,
                upper: upper * scale,
                t: best_t,
                phi: best_phi,
                outer_iterations: iter,
                pivots: solver.pivots,
            });
        }
        if visited.iter().any(|&v| (v - t_next).abs() <= 1e-15) {
            // The envelope peaks at a solved split: bounds cannot move further.
            break;
        }
        t = t_next;
    }
    Err(Error::LpNonConvergence {
        lower: lower.max(0.0) * scale,
        upper: upper * scale,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn supplies(h: &[f64]) -> Vec<f64> {
        let n = h.len();
        (0..=n)
            .map(|j| {
                let left = if j > 0 { h[j - 1] } else { 0.0 };
                let right = if j < n { h[j] } else { 0.0 };
                left - right
            })
            .collect()
    }

    #[test]
    fn constant_density_gives_two_thirds() {
        for &alpha in &[0.3, 0.5, 1.0] {
            let out = maximize(&supplies(&[1.0; 16]), 16, alpha, 1e-10, 100).unwrap();
            assert!((out.lower - 2.0 / 3.0).abs() < 1e-9, "{alpha}: {out:?}");
            assert!(out.upper >= out.lower - 1e-12);
        }
    }

    #[test]
    fn half_indicator() {
        let mut h = vec![0.0; 32];
        h[..16].iter_mut().for_each(|v| *v = 1.0);
        let out = maximize(&supplies(&h), 32, 0.5, 1e-10, 100).unwrap();
        let want = 2.0 / (1.0 + 2f64.powf(1.5));
        assert!((out.lower - want).abs() < 1e-9, "{}", out.lower);
    }

    #[test]
    fn potentials_are_feasible_and_attain_the_value() {
        let h = [0.3, -1.0, 0.7, 0.2, -0.4, 0.9, -0.8, 0.1];
        let g = supplies(&h);
        let alpha = 0.4;
        let out = maximize(&g, 8, alpha, 1e-10, 100).unwrap();
        let phi = &out.phi;
        let t = out.t;
        let s = 1.0 - t;
        for (j, &pj) in phi.iter().enumerate() {
            assert!(pj.abs() <= t + 1e-12);
            for (k, &pk) in phi.iter().enumerate() {
                let d = (j.abs_diff(k) as f64 / 8.0).powf(alpha);
                assert!(pj - pk <= s * d + 1e-12);
            }
        }
        let obj: f64 = g.iter().zip(phi).map(|(a, b)| a * b).sum();
        assert!((obj - out.lower).abs() < 1e-12);
    }

    #[test]
    fn envelope_of_tent_lines() {
        // min(2t, 1 - t) peaks at t = 1/3.
        let (t, v) = envelope_max(&[(2.0, 0.0), (-1.0, 1.0)]);
        assert!((t - 1.0 / 3.0).abs() < 1e-15);
        assert!((v - 2.0 / 3.0).abs() < 1e-15);
    }
}
