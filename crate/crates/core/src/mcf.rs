//! Uncapacitated minimum-cost flow by the primal network simplex method.
//!
//! Every arc has unbounded capacity and a nonnegative cost. The initial basis
//! is a star of artificial arcs around an extra root node; supply nodes reach
//! the root for free and the root reaches demand nodes at `artificial_cost`,
//! so the artificial arcs drain out as soon as real arcs are cheaper. Pricing
//! uses block search over the real arcs in a fixed cyclic order, and the
//! leaving arc is chosen with the strongly-feasible-tree rule, which keeps the
//! pivot sequence deterministic and free of cycling.

use crate::error::{Error, Result};

const UP: i8 = 1;
const DOWN: i8 = -1;
const NONE: usize = usize::MAX;

/// Builder for a transshipment network.
#[derive(Clone, Debug, Default)]
pub struct FlowNetwork {
    supply: Vec<f64>,
    src: Vec<usize>,
    dst: Vec<usize>,
    cost: Vec<f64>,
    artificial_cost: Option<f64>,
}

/// Optimal flow on every arc, in insertion order.
#[derive(Clone, Debug)]
pub struct FlowSolution {
    pub flow: Vec<f64>,
    pub cost: f64,
    pub pivots: usize,
}

impl FlowNetwork {
    pub fn new(nodes: usize) -> FlowNetwork {
        FlowNetwork { supply: vec![0.0; nodes], ..Default::default() }
    }

    pub fn with_capacity(nodes: usize, arcs: usize) -> FlowNetwork {
        FlowNetwork {
            supply: vec![0.0; nodes],
            src: Vec::with_capacity(arcs),
            dst: Vec::with_capacity(arcs),
            cost: Vec::with_capacity(arcs),
            artificial_cost: None,
        }
    }

    pub fn node_count(&self) -> usize {
        self.supply.len()
    }

    pub fn arc_count(&self) -> usize {
        self.src.len()
    }

    /// Positive values are supplies, negative values demands.
    pub fn set_supply(&mut self, node: usize, value: f64) {
        self.supply[node] = value;
    }

    pub fn add_arc(&mut self, from: usize, to: usize, cost: f64) -> usize {
        debug_assert!(cost >= 0.0 && cost.is_finite());
        self.src.push(from);
        self.dst.push(to);
        self.cost.push(cost);
        self.src.len() - 1
    }

    /// Overrides the artificial arc cost.
    ///
    /// Any value above the largest arc cost is exact when every supply node
    /// has a direct arc to every demand node. The default,
    /// `(max cost + 1) · nodes`, is exact for any network.
    pub fn set_artificial_cost(&mut self, cost: f64) {
        self.artificial_cost = Some(cost);
    }

    pub fn solve(&self) -> Result<FlowSolution> {
        Simplex::new(self).run()
    }
}

struct Simplex<'a> {
    net: &'a FlowNetwork,
    n: usize,
    m: usize,
    src: Vec<usize>,
    dst: Vec<usize>,
    cost: Vec<f64>,
    flow: Vec<f64>,
    in_tree: Vec<bool>,
    pot: Vec<f64>,
    parent: Vec<usize>,
    pred: Vec<usize>,
    pred_dir: Vec<i8>,
    depth: Vec<usize>,
    first_child: Vec<usize>,
    next_sib: Vec<usize>,
    prev_sib: Vec<usize>,
    next_arc: usize,
    block: usize,
    eps: f64,
    stack: Vec<usize>,
    path: Vec<usize>,
}

impl<'a> Simplex<'a> {
    fn new(net: &'a FlowNetwork) -> Simplex<'a> {
        let n = net.supply.len();
        let m = net.src.len();
        let root = n;
        let max_cost = net.cost.iter().copied().fold(0.0, f64::max);
        let art = net.artificial_cost.unwrap_or((max_cost + 1.0) * (n as f64 + 1.0));

        let total = m + n;
        let mut src = Vec::with_capacity(total);
        let mut dst = Vec::with_capacity(total);
        let mut cost = Vec::with_capacity(total);
        src.extend_from_slice(&net.src);
        dst.extend_from_slice(&net.dst);
        cost.extend_from_slice(&net.cost);
        let mut flow = vec![0.0; total];
        let mut in_tree = vec![false; total];

        let mut pot = vec![0.0; n + 1];
        let mut parent = vec![NONE; n + 1];
        let mut pred = vec![NONE; n + 1];
        let mut pred_dir = vec![0i8; n + 1];
        let mut depth = vec![0usize; n + 1];
        let mut first_child = vec![NONE; n + 1];
        let mut next_sib = vec![NONE; n + 1];
        let mut prev_sib = vec![NONE; n + 1];

        for u in 0..n {
            let e = m + u;
            let s = net.supply[u];
            if s >= 0.0 {
                src.push(u);
                dst.push(root);
                cost.push(0.0);
                flow[e] = s;
                pred_dir[u] = UP;
                pot[u] = 0.0;
            } else {
                src.push(root);
                dst.push(u);
                cost.push(art);
                flow[e] = -s;
                pred_dir[u] = DOWN;
                pot[u] = art;
            }
            in_tree[e] = true;
            parent[u] = root;
            pred[u] = e;
            depth[u] = 1;
            // children of the root as a doubly linked list
            next_sib[u] = if u + 1 < n { u + 1 } else { NONE };
            prev_sib[u] = if u > 0 { u - 1 } else { NONE };
        }
        if n > 0 {
            first_child[root] = 0;
        }

        let block = ((m as f64).sqrt() as usize).max(10).min(m.max(1));
        let eps = 1e-13 * art.max(1.0);
        Simplex {
            net,
            n,
            m,
            src,
            dst,
            cost,
            flow,
            in_tree,
            pot,
            parent,
            pred,
            pred_dir,
            depth,
            first_child,
            next_sib,
            prev_sib,
            next_arc: 0,
            block,
            eps,
            stack: Vec::new(),
            path: Vec::new(),
        }
    }

    fn run(mut self) -> Result<FlowSolution> {
        let imbalance: f64 = self.net.supply.iter().sum();
        let scale: f64 = self.net.supply.iter().map(|s| s.abs()).sum::<f64>().max(1.0);
        if imbalance.abs() > 1e-9 * scale {
            return Err(Error::Solver(format!("supplies do not balance (net {imbalance:e})")));
        }
        let limit = 50 * (self.m + self.n + 10) * (self.n + 10);
        let mut pivots = 0;
        while let Some(entering) = self.find_entering() {
            self.pivot(entering)?;
            pivots += 1;
            if pivots > limit {
                return Err(Error::Solver("pivot limit exceeded".into()));
            }
        }
        // demand still fed through the root means no real route exists
        let stranded: f64 = (0..self.n)
            .map(|u| self.m + u)
            .filter(|&e| self.cost[e] > 0.0)
            .map(|e| self.flow[e])
            .sum();
        if stranded > 1e-9 * scale {
            return Err(Error::Solver("network is infeasible".into()));
        }
        let flow: Vec<f64> = self.flow[..self.m].to_vec();
        let cost = flow.iter().zip(&self.net.cost).map(|(f, c)| f * c).sum();
        Ok(FlowSolution { flow, cost, pivots })
    }

    #[inline]
    fn reduced_cost(&self, e: usize) -> f64 {
        self.cost[e] + self.pot[self.src[e]] - self.pot[self.dst[e]]
    }

    fn find_entering(&mut self) -> Option<usize> {
        if self.m == 0 {
            return None;
        }
        let mut best = NONE;
        let mut min = -self.eps;
        let mut cnt = self.block;
        let mut e = self.next_arc;
        for _ in 0..self.m {
            if !self.in_tree[e] {
                let c = self.reduced_cost(e);
                if c < min {
                    min = c;
                    best = e;
                }
            }
            e += 1;
            if e == self.m {
                e = 0;
            }
            cnt -= 1;
            if cnt == 0 {
                if best != NONE {
                    self.next_arc = e;
                    return Some(best);
                }
                cnt = self.block;
            }
        }
        if best != NONE {
            self.next_arc = e;
            Some(best)
        } else {
            None
        }
    }

    fn find_join(&self, mut u: usize, mut v: usize) -> usize {
        while u != v {
            if self.depth[u] > self.depth[v] {
                u = self.parent[u];
            } else if self.depth[v] > self.depth[u] {
                v = self.parent[v];
            } else {
                u = self.parent[u];
                v = self.parent[v];
            }
        }
        u
    }

    fn pivot(&mut self, entering: usize) -> Result<()> {
        let first = self.src[entering];
        let second = self.dst[entering];
        let join = self.find_join(first, second);

        // Ratio test. Flow enters at `first`'s side of the cycle, travels
        // `first -> second` along the entering arc and returns through join.
        let mut delta = f64::INFINITY;
        let mut u_out = NONE;
        let mut side = 0;
        let mut u = first;
        while u != join {
            if self.pred_dir[u] == UP {
                let d = self.flow[self.pred[u]];
                if d < delta {
                    delta = d;
                    u_out = u;
                    side = 1;
                }
            }
            u = self.parent[u];
        }
        let mut u = second;
        while u != join {
            if self.pred_dir[u] == DOWN {
                let d = self.flow[self.pred[u]];
                if d <= delta {
                    delta = d;
                    u_out = u;
                    side = 2;
                }
            }
            u = self.parent[u];
        }
        if u_out == NONE {
            return Err(Error::Solver("unbounded cycle of negative cost".into()));
        }

        if delta > 0.0 {
            self.flow[entering] += delta;
            let mut u = first;
            while u != join {
                let e = self.pred[u];
                if self.pred_dir[u] == UP {
                    self.flow[e] -= delta;
                } else {
                    self.flow[e] += delta;
                }
                u = self.parent[u];
            }
            let mut u = second;
            while u != join {
                let e = self.pred[u];
                if self.pred_dir[u] == UP {
                    self.flow[e] += delta;
                } else {
                    self.flow[e] -= delta;
                }
                u = self.parent[u];
            }
        }

        let (u_in, v_in) = if side == 1 { (first, second) } else { (second, first) };
        let leaving = self.pred[u_out];
        self.flow[leaving] = 0.0;
        self.in_tree[leaving] = false;
        self.in_tree[entering] = true;
        self.reroot(u_in, v_in, u_out, entering);
        Ok(())
    }

    /// Hangs the subtree under `u_out` from `v_in` through the entering arc,
    /// reversing the tree path `u_in .. u_out`.
    fn reroot(&mut self, u_in: usize, v_in: usize, u_out: usize, entering: usize) {
        self.path.clear();
        let mut x = u_in;
        loop {
            self.path.push(x);
            if x == u_out {
                break;
            }
            x = self.parent[x];
        }
        let k = self.path.len();
        let old_pred: Vec<(usize, i8)> = self.path.iter().map(|&p| (self.pred[p], self.pred_dir[p])).collect();

        self.detach(u_out);
        for i in 0..k - 1 {
            self.detach(self.path[i]);
        }

        let p0 = self.path[0];
        self.parent[p0] = v_in;
        self.pred[p0] = entering;
        self.pred_dir[p0] = if self.src[entering] == p0 { UP } else { DOWN };
        self.attach(v_in, p0);
        for i in 0..k - 1 {
            let (child, par) = (self.path[i + 1], self.path[i]);
            self.parent[child] = par;
            self.pred[child] = old_pred[i].0;
            self.pred_dir[child] = -old_pred[i].1;
            self.attach(par, child);
        }

        let new_pot = if self.pred_dir[p0] == UP {
            self.pot[v_in] - self.cost[entering]
        } else {
            self.pot[v_in] + self.cost[entering]
        };
        let sigma = new_pot - self.pot[p0];
        self.stack.clear();
        self.stack.push(p0);
        while let Some(x) = self.stack.pop() {
            self.pot[x] += sigma;
            self.depth[x] = self.depth[self.parent[x]] + 1;
            let mut c = self.first_child[x];
            while c != NONE {
                self.stack.push(c);
                c = self.next_sib[c];
            }
        }
    }

    fn detach(&mut self, x: usize) {
        let p = self.parent[x];
        let (prev, next) = (self.prev_sib[x], self.next_sib[x]);
        if prev != NONE {
            self.next_sib[prev] = next;
        } else {
            self.first_child[p] = next;
        }
        if next != NONE {
            self.prev_sib[next] = prev;
        }
        self.prev_sib[x] = NONE;
        self.next_sib[x] = NONE;
    }

    fn attach(&mut self, p: usize, x: usize) {
        let head = self.first_child[p];
        self.next_sib[x] = head;
        self.prev_sib[x] = NONE;
        if head != NONE {
            self.prev_sib[head] = x;
        }
        self.first_child[p] = x;
    }
}
