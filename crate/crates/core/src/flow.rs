//! Integer max-flow (Dinic) and minimum flow with lower bounds.

use std::collections::VecDeque;
use std::fmt::Write as _;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FlowArc {
    pub from: usize,
    pub to: usize,
    /// `None` is unbounded.
    pub capacity: Option<u64>,
    pub demand: u64,
}

#[derive(Clone, Debug, Default)]
pub struct FlowNetwork {
    nodes: usize,
    arcs: Vec<FlowArc>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FlowResult {
    pub value: u64,
    /// Flow on each arc, indexed like [`FlowNetwork::arcs`].
    pub flows: Vec<u64>,
    pub feasible: bool,
}

impl FlowNetwork {
    pub fn new(nodes: usize) -> Self {
        FlowNetwork { nodes, arcs: Vec::new() }
    }

    pub fn nodes(&self) -> usize {
        self.nodes
    }

    pub fn arcs(&self) -> &[FlowArc] {
        &self.arcs
    }

    pub fn add_arc(&mut self, from: usize, to: usize, capacity: Option<u64>, demand: u64) -> usize {
        assert!(from < self.nodes && to < self.nodes, "arc endpoint out of range");
        self.arcs.push(FlowArc { from, to, capacity, demand });
        self.arcs.len() - 1
    }

    /// Stand-in for an unbounded capacity: larger than any flow the network
    /// can carry without an unbounded cycle.
    fn infinity(&self) -> i64 {
        let total: u64 = self
            .arcs
            .iter()
            .map(|a| a.demand.saturating_add(a.capacity.unwrap_or(0)))
            .fold(0u64, u64::saturating_add);
        i64::try_from(total.saturating_add(1)).unwrap_or(i64::MAX / 4).min(i64::MAX / 4)
    }

    fn check(&self, s: usize, t: usize) -> Result<()> {
        if s == t {
            return Err(Error::Contract("source and terminal coincide".into()));
        }
        if s >= self.nodes || t >= self.nodes {
            return Err(Error::Contract("source or terminal out of range".into()));
        }
        Ok(())
    }

    /// Maximum `s → t` flow, ignoring demands.
    pub fn max_flow(&self, s: usize, t: usize) -> Result<FlowResult> {
        self.check(s, t)?;
        let inf = self.infinity();
        let mut g = Residual::new(self.nodes);
        let ids: Vec<usize> = self
            .arcs
            .iter()
            .map(|a| g.add(a.from, a.to, a.capacity.map_or(inf, |c| c as i64)))
            .collect();
        let value = g.max_flow(s, t);
        Ok(FlowResult {
            value: value as u64,
            flows: ids.iter().map(|&e| g.cap[e ^ 1] as u64).collect(),
            feasible: true,
        })
    }

    /// Maximum flow together with the source side of a minimum cut.
    pub fn min_cut(&self, s: usize, t: usize) -> Result<(FlowResult, Vec<bool>)> {
        self.check(s, t)?;
        let inf = self.infinity();
        let mut g = Residual::new(self.nodes);
        let ids: Vec<usize> = self
            .arcs
            .iter()
            .map(|a| g.add(a.from, a.to, a.capacity.map_or(inf, |c| c as i64)))
            .collect();
        let value = g.max_flow(s, t);
        g.bfs(s, usize::MAX);
        let side = g.level.iter().map(|&l| l != usize::MAX).collect();
        Ok((
            FlowResult {
                value: value as u64,
                flows: ids.iter().map(|&e| g.cap[e ^ 1] as u64).collect(),
                feasible: true,
            },
            side,
        ))
    }

    /// Some `s → t` flow meeting every demand, via the circulation with an
    /// unbounded `t → s` arc.
    pub fn feasible_circulation(&self, s: usize, t: usize) -> Result<FlowResult> {
        self.check(s, t)?;
        Ok(self.lower_bounded(s, t)?.map(|(g, lb)| lb.result(&g)).unwrap_or_else(|| self.infeasible()))
    }

    /// Minimum `s → t` flow meeting every demand.
    pub fn min_flow_with_demands(&self, s: usize, t: usize) -> Result<FlowResult> {
        self.check(s, t)?;
        let Some((mut g, lb)) = self.lower_bounded(s, t)? else {
            return Ok(self.infeasible());
        };
        let forward = g.cap[lb.back ^ 1];
        for e in lb.aux.iter().copied().chain([lb.back]) {
            g.cap[e] = 0;
            g.cap[e ^ 1] = 0;
        }
        let cancelled = g.max_flow(t, s);
        if cancelled >= lb.inf {
            return Err(Error::Contract("minimum flow is unbounded: t reaches s".into()));
        }
        let mut res = lb.result(&g);
        res.value = (forward - cancelled) as u64;
        Ok(res)
    }

    fn infeasible(&self) -> FlowResult {
        FlowResult { value: 0, flows: vec![0; self.arcs.len()], feasible: false }
    }

    fn lower_bounded(&self, s: usize, t: usize) -> Result<Option<(Residual, LowerBound)>> {
        if self.arcs.iter().any(|a| a.capacity.is_some_and(|c| c < a.demand)) {
            return Ok(None);
        }
        let inf = self.infinity();
        let (sp, tp) = (self.nodes, self.nodes + 1);
        let mut g = Residual::new(self.nodes + 2);
        let mut excess = vec![0i64; self.nodes];
        let ids: Vec<usize> = self
            .arcs
            .iter()
            .map(|a| {
                excess[a.to] += a.demand as i64;
                excess[a.from] -= a.demand as i64;
                g.add(a.from, a.to, a.capacity.map_or(inf, |c| (c - a.demand) as i64))
            })
            .collect();
        let back = g.add(t, s, inf);
        let mut aux = Vec::new();
        let mut need = 0;
        for (v, &e) in excess.iter().enumerate() {
            if e > 0 {
                aux.push(g.add(sp, v, e));
                need += e;
            } else if e < 0 {
                aux.push(g.add(v, tp, -e));
            }
        }
        if g.max_flow(sp, tp) < need {
            return Ok(None);
        }
        let demands = self.arcs.iter().map(|a| a.demand).collect();
        Ok(Some((g, LowerBound { ids, demands, back, aux, inf })))
    }

    /// One `u v capacity demand flow` line per arc.
    pub fn dump(&self, flows: Option<&[u64]>) -> String {
        let mut out = String::new();
        for (i, a) in self.arcs.iter().enumerate() {
            let cap = a.capacity.map_or_else(|| "inf".to_string(), |c| c.to_string());
            let f = flows.map_or(0, |f| f[i]);
            let _ = writeln!(out, "{} {} {} {} {}", a.from, a.to, cap, a.demand, f);
        }
        out
    }
}

struct LowerBound {
    ids: Vec<usize>,
    demands: Vec<u64>,
    back: usize,
    aux: Vec<usize>,
    inf: i64,
}

impl LowerBound {
    fn result(&self, g: &Residual) -> FlowResult {
        FlowResult {
            value: g.cap[self.back ^ 1] as u64,
            flows: self
                .ids
                .iter()
                .zip(&self.demands)
                .map(|(&e, &d)| d + g.cap[e ^ 1] as u64)
                .collect(),
            feasible: true,
        }
    }
}

/// Residual graph with paired arcs: arc `e` and its reverse `e ^ 1`.
struct Residual {
    adj: Vec<Vec<usize>>,
    to: Vec<usize>,
    cap: Vec<i64>,
    level: Vec<usize>,
    iter: Vec<usize>,
}

impl Residual {
    fn new(n: usize) -> Self {
        Residual { adj: vec![Vec::new(); n], to: Vec::new(), cap: Vec::new(), level: vec![0; n], iter: vec![0; n] }
    }

    fn add(&mut self, u: usize, v: usize, cap: i64) -> usize {
        let e = self.to.len();
        self.to.extend([v, u]);
        self.cap.extend([cap, 0]);
        self.adj[u].push(e);
        self.adj[v].push(e + 1);
        e
    }

    /// BFS levels from `s`; unreachable nodes get `usize::MAX`. Stops early
    /// once `t` is labelled.
    fn bfs(&mut self, s: usize, t: usize) -> bool {
        self.level.fill(usize::MAX);
        self.level[s] = 0;
        let mut queue = VecDeque::from([s]);
        while let Some(u) = queue.pop_front() {
            for &e in &self.adj[u] {
                let v = self.to[e];
                if self.cap[e] > 0 && self.level[v] == usize::MAX {
                    self.level[v] = self.level[u] + 1;
                    if v == t {
                        return true;
                    }
                    queue.push_back(v);
                }
            }
        }
        false
    }

    fn max_flow(&mut self, s: usize, t: usize) -> i64 {
        let mut total = 0i64;
        while self.bfs(s, t) {
            self.iter.fill(0);
            total = total.saturating_add(self.blocking(s, t));
        }
        total
    }

    fn blocking(&mut self, s: usize, t: usize) -> i64 {
        let mut total = 0i64;
        let mut path: Vec<usize> = Vec::new();
        let mut u = s;
        loop {
            if u == t {
                let f = path.iter().map(|&e| self.cap[e]).min().unwrap_or(0);
                for &e in &path {
                    self.cap[e] -= f;
                    self.cap[e ^ 1] += f;
                }
                total = total.saturating_add(f);
                let k = path.iter().position(|&e| self.cap[e] == 0).unwrap_or(0);
                path.truncate(k);
                u = path.last().map_or(s, |&e| self.to[e]);
                continue;
            }
            let mut next = None;
            while self.iter[u] < self.adj[u].len() {
                let e = self.adj[u][self.iter[u]];
                let v = self.to[e];
                if self.cap[e] > 0 && self.level[v] != usize::MAX && self.level[v] == self.level[u] + 1 {
                    next = Some(e);
                    break;
                }
                self.iter[u] += 1;
            }
            match next {
                Some(e) => {
                    path.push(e);
                    u = self.to[e];
                }
                None => {
                    if u == s {
                        break;
                    }
                    self.level[u] = usize::MAX;
                    let e = path.pop().expect("non-source node is reached through an arc");
                    u = self.to[e ^ 1];
                    self.iter[u] += 1;
                }
            }
        }
        total
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_arc_and_disconnected() {
        let mut n = FlowNetwork::new(2);
        n.add_arc(0, 1, Some(5), 0);
        assert_eq!(n.max_flow(0, 1).unwrap().value, 5);
        let n = FlowNetwork::new(3);
        assert_eq!(n.max_flow(0, 2).unwrap().value, 0);
        assert!(matches!(n.max_flow(1, 1), Err(Error::Contract(_))));
    }

    #[test]
    fn diamond_max_flow() {
        // s=0, a=1, b=2, t=3
        let mut n = FlowNetwork::new(4);
        n.add_arc(0, 1, Some(3), 0);
        n.add_arc(0, 2, Some(2), 0);
        n.add_arc(1, 3, Some(2), 0);
        n.add_arc(2, 3, Some(3), 0);
        n.add_arc(1, 2, Some(1), 0);
        let r = n.max_flow(0, 3).unwrap();
        assert_eq!(r.value, 5);
        let (cut_res, side) = n.min_cut(0, 3).unwrap();
        let cut: u64 = n
            .arcs()
            .iter()
            .filter(|a| side[a.from] && !side[a.to])
            .map(|a| a.capacity.unwrap())
            .sum();
        assert_eq!(cut, cut_res.value);
    }

    #[test]
    fn circulation_examples() {
        let mut n = FlowNetwork::new(4);
        n.add_arc(0, 1, None, 0);
        n.add_arc(1, 2, None, 3);
        n.add_arc(2, 3, None, 0);
        let r = n.feasible_circulation(0, 3).unwrap();
        assert!(r.feasible);
        assert!(r.value >= 3);
        assert_eq!(n.min_flow_with_demands(0, 3).unwrap().value, 3);

        let mut bad = FlowNetwork::new(2);
        bad.add_arc(0, 1, Some(3), 5);
        assert!(!bad.feasible_circulation(0, 1).unwrap().feasible);
        assert!(!bad.min_flow_with_demands(0, 1).unwrap().feasible);
    }

    #[test]
    fn parallel_chains_add_up() {
        let mut n = FlowNetwork::new(6);
        n.add_arc(0, 1, None, 0);
        n.add_arc(1, 2, None, 2);
        n.add_arc(2, 5, None, 0);
        n.add_arc(0, 3, None, 0);
        n.add_arc(3, 4, None, 3);
        n.add_arc(4, 5, None, 0);
        let r = n.min_flow_with_demands(0, 5).unwrap();
        assert_eq!(r.value, 5);
        assert_eq!(r.flows, vec![2, 2, 2, 3, 3, 3]);
    }

    #[test]
    fn dump_format() {
        let mut n = FlowNetwork::new(2);
        n.add_arc(0, 1, None, 2);
        n.add_arc(1, 0, Some(4), 0);
        assert_eq!(n.dump(Some(&[2, 0])), "0 1 inf 2 2\n1 0 4 0 0\n");
    }
}
