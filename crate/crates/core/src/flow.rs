//! Exact s-t max-flow / min-cut on integer capacities.
//!
//! Arcs are either finite or "infinite". Infinite arcs are resolved at solve
//! time to one more than the sum of all finite capacities, so no finite cut
//! can sever them. The solver is Dinic's blocking-flow method.

use std::collections::VecDeque;
use std::fmt::Write as _;

use thiserror::Error;

pub type NodeId = usize;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FlowError {
    #[error("capacity sum overflows 64 bits")]
    Overflow,
    #[error("arc endpoint {0} is not a node of the network")]
    BadNode(NodeId),
    #[error("source and sink must differ")]
    SameTerminals,
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Capacity {
    Finite(u64),
    Infinite,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Arc {
    pub tail: NodeId,
    pub head: NodeId,
    pub cap: Capacity,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FlowNetwork {
    num_nodes: usize,
    source: NodeId,
    sink: NodeId,
    arcs: Vec<Arc>,
}

/// Min-cut value and, per node, whether it stays on the source side.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CutResult {
    pub value: u64,
    pub source_side: Vec<bool>,
}

impl CutResult {
    pub fn is_source_side(&self, node: NodeId) -> bool {
        self.source_side[node]
    }
}

impl FlowNetwork {
    pub fn new(num_nodes: usize, source: NodeId, sink: NodeId) -> Result<Self, FlowError> {
        if source == sink {
            return Err(FlowError::SameTerminals);
        }
        for node in [source, sink] {
            if node >= num_nodes {
                return Err(FlowError::BadNode(node));
            }
        }
        Ok(FlowNetwork {
            num_nodes,
            source,
            sink,
            arcs: Vec::new(),
        })
    }

    pub fn num_nodes(&self) -> usize {
        self.num_nodes
    }

    pub fn source(&self) -> NodeId {
        self.source
    }

    pub fn sink(&self) -> NodeId {
        self.sink
    }

    pub fn arcs(&self) -> &[Arc] {
        &self.arcs
    }

    /// Appends `count` fresh nodes and returns the first id.
    pub fn add_nodes(&mut self, count: usize) -> NodeId {
        let first = self.num_nodes;
        self.num_nodes += count;
        first
    }

    /// Zero-capacity arcs are dropped.
    pub fn add_arc(&mut self, tail: NodeId, head: NodeId, cap: u64) {
        debug_assert!(tail < self.num_nodes && head < self.num_nodes);
        if cap > 0 {
            self.arcs.push(Arc {
                tail,
                head,
                cap: Capacity::Finite(cap),
            });
        }
    }

    pub fn add_infinite_arc(&mut self, tail: NodeId, head: NodeId) {
        debug_assert!(tail < self.num_nodes && head < self.num_nodes);
        self.arcs.push(Arc {
            tail,
            head,
            cap: Capacity::Infinite,
        });
    }

    /// Sum of finite capacities plus one.
    pub fn infinity(&self) -> Result<u64, FlowError> {
        self.arcs
            .iter()
            .try_fold(1u64, |acc, arc| match arc.cap {
                Capacity::Finite(c) => acc.checked_add(c),
                Capacity::Infinite => Some(acc),
            })
            .ok_or(FlowError::Overflow)
    }

    fn resolved(&self, cap: Capacity, inf: u64) -> u64 {
        match cap {
            Capacity::Finite(c) => c,
            Capacity::Infinite => inf,
        }
    }

    /// Capacity of the cut induced by `source_side`, saturating on overflow.
    pub fn cut_capacity(&self, source_side: &[bool]) -> Result<u64, FlowError> {
        let inf = self.infinity()?;
        Ok(self
            .arcs
            .iter()
            .filter(|arc| source_side[arc.tail] && !source_side[arc.head])
            .fold(0u64, |acc, arc| {
                acc.saturating_add(self.resolved(arc.cap, inf))
            }))
    }

    /// Line-oriented dump: a `NET nodes source sink` header and one
    /// `ARC tail head cap` line per arc, infinite arcs at their resolved value.
    pub fn dump(&self) -> Result<String, FlowError> {
        let inf = self.infinity()?;
        let mut out = String::new();
        let _ = writeln!(out, "NET {} {} {}", self.num_nodes, self.source, self.sink);
        for arc in &self.arcs {
            let _ = writeln!(
                out,
                "ARC {} {} {}",
                arc.tail,
                arc.head,
                self.resolved(arc.cap, inf)
            );
        }
        Ok(out)
    }

    /// Parses [`FlowNetwork::dump`] output. Every arc comes back finite.
    pub fn parse_dump(text: &str) -> Result<Self, FlowError> {
        let mut net: Option<FlowNetwork> = None;
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let err = |message: &str| FlowError::Parse {
                line,
                message: message.to_string(),
            };
            let fields: Vec<&str> = raw.split_whitespace().collect();
            match fields.as_slice() {
                [] => continue,
                ["NET", n, s, t] => {
                    let parse = |v: &str| v.parse::<usize>().map_err(|_| err("bad integer"));
                    net = Some(FlowNetwork::new(parse(n)?, parse(s)?, parse(t)?)?);
                }
                ["ARC", tail, head, cap] => {
                    let net = net.as_mut().ok_or_else(|| err("ARC before NET"))?;
                    let tail: usize = tail.parse().map_err(|_| err("bad tail"))?;
                    let head: usize = head.parse().map_err(|_| err("bad head"))?;
                    let cap: u64 = cap.parse().map_err(|_| err("bad capacity"))?;
                    if tail >= net.num_nodes || head >= net.num_nodes {
                        return Err(err("arc endpoint out of range"));
                    }
                    net.add_arc(tail, head, cap);
                }
                _ => return Err(err("unrecognized line")),
            }
        }
        net.ok_or(FlowError::Parse {
            line: 0,
            message: "missing NET header".to_string(),
        })
    }

    /// Maximum flow value and the minimum cut given by residual
    /// reachability from the source.
    pub fn min_cut(&self) -> Result<CutResult, FlowError> {
        let inf = self.infinity()?;
        let mut residual = Residual::new(self.num_nodes);
        for arc in &self.arcs {
            if arc.tail == arc.head {
                continue;
            }
            residual.add(arc.tail, arc.head, self.resolved(arc.cap, inf));
        }
        let value = residual.max_flow(self.source, self.sink)?;
        let source_side = residual.reachable_from(self.source);
        Ok(CutResult { value, source_side })
    }
}

/// Residual graph in forward-star form; edge `e ^ 1` is the reverse of `e`.
struct Residual {
    head: Vec<NodeId>,
    cap: Vec<u64>,
    adj: Vec<Vec<usize>>,
    level: Vec<u32>,
    cursor: Vec<usize>,
}

impl Residual {
    fn new(num_nodes: usize) -> Self {
        Residual {
            head: Vec::new(),
            cap: Vec::new(),
            adj: vec![Vec::new(); num_nodes],
            level: vec![0; num_nodes],
            cursor: vec![0; num_nodes],
        }
    }

    fn add(&mut self, tail: NodeId, head: NodeId, cap: u64) {
        let e = self.head.len();
        self.head.push(head);
        self.cap.push(cap);
        self.adj[tail].push(e);
        self.head.push(tail);
        self.cap.push(0);
        self.adj[head].push(e + 1);
    }

    fn bfs(&mut self, source: NodeId, sink: NodeId) -> bool {
        const UNSEEN: u32 = u32::MAX;
        self.level.iter_mut().for_each(|l| *l = UNSEEN);
        self.level[source] = 0;
        let mut queue = VecDeque::from([source]);
        while let Some(v) = queue.pop_front() {
            for &e in &self.adj[v] {
                let w = self.head[e];
                if self.cap[e] > 0 && self.level[w] == UNSEEN {
                    self.level[w] = self.level[v] + 1;
                    queue.push_back(w);
                }
            }
        }
        self.level[sink] != UNSEEN
    }

    /// One augmenting path in the level graph, iterative to keep deep chains
    /// off the call stack.
    fn augment(&mut self, source: NodeId, sink: NodeId) -> u64 {
        let mut path: Vec<usize> = Vec::new();
        let mut v = source;
        loop {
            if v == sink {
                let pushed = path.iter().map(|&e| self.cap[e]).min().unwrap_or(0);
                for &e in &path {
                    self.cap[e] -= pushed;
                    self.cap[e ^ 1] += pushed;
                }
                return pushed;
            }
            let mut advanced = false;
            while self.cursor[v] < self.adj[v].len() {
                let e = self.adj[v][self.cursor[v]];
                let w = self.head[e];
                if self.cap[e] > 0 && self.level[w] == self.level[v] + 1 {
                    path.push(e);
                    v = w;
                    advanced = true;
                    break;
                }
                self.cursor[v] += 1;
            }
            if !advanced {
                // Dead end: prune it from the level graph and retreat.
                self.level[v] = u32::MAX;
                match path.pop() {
                    Some(e) => {
                        v = self.head[e ^ 1];
                        self.cursor[v] += 1;
                    }
                    None => return 0,
                }
            }
        }
    }

    fn max_flow(&mut self, source: NodeId, sink: NodeId) -> Result<u64, FlowError> {
        let mut total: u64 = 0;
        while self.bfs(source, sink) {
            self.cursor.iter_mut().for_each(|c| *c = 0);
            loop {
                let pushed = self.augment(source, sink);
                if pushed == 0 {
                    break;
                }
                total = total.checked_add(pushed).ok_or(FlowError::Overflow)?;
            }
        }
        Ok(total)
    }

    fn reachable_from(&self, source: NodeId) -> Vec<bool> {
        let mut seen = vec![false; self.adj.len()];
        seen[source] = true;
        let mut stack = vec![source];
        while let Some(v) = stack.pop() {
            for &e in &self.adj[v] {
                let w = self.head[e];
                if self.cap[e] > 0 && !seen[w] {
                    seen[w] = true;
                    stack.push(w);
                }
            }
        }
        seen
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_arc() {
        let mut net = FlowNetwork::new(2, 0, 1).unwrap();
        net.add_arc(0, 1, 5);
        let cut = net.min_cut().unwrap();
        assert_eq!(cut.value, 5);
        assert!(cut.is_source_side(0));
        assert!(!cut.is_source_side(1));
    }

    #[test]
    fn diamond() {
        let mut net = FlowNetwork::new(4, 0, 1).unwrap();
        let (a, b) = (2, 3);
        net.add_arc(0, a, 3);
        net.add_arc(0, b, 2);
        net.add_arc(a, 1, 2);
        net.add_arc(b, 1, 3);
        let cut = net.min_cut().unwrap();
        assert_eq!(cut.value, 4);
        assert_eq!(net.cut_capacity(&cut.source_side).unwrap(), 4);
    }

    #[test]
    fn infinite_arc_never_cut() {
        let mut net = FlowNetwork::new(3, 0, 1).unwrap();
        net.add_arc(0, 2, 10);
        net.add_infinite_arc(2, 1);
        net.add_arc(0, 1, 1);
        let cut = net.min_cut().unwrap();
        assert_eq!(cut.value, 11);
        assert_eq!(net.infinity().unwrap(), 12);
    }

    #[test]
    fn disconnected_sink() {
        let mut net = FlowNetwork::new(3, 0, 1).unwrap();
        net.add_arc(0, 2, 4);
        let cut = net.min_cut().unwrap();
        assert_eq!(cut.value, 0);
        assert_eq!(cut.source_side, vec![true, false, true]);
    }

    #[test]
    fn overflow_is_reported() {
        let mut net = FlowNetwork::new(2, 0, 1).unwrap();
        net.add_arc(0, 1, u64::MAX);
        net.add_arc(0, 1, 1);
        assert_eq!(net.min_cut(), Err(FlowError::Overflow));
    }

    #[test]
    fn dump_round_trip() {
        let mut net = FlowNetwork::new(4, 0, 1).unwrap();
        net.add_arc(0, 2, 3);
        net.add_arc(2, 3, 1);
        net.add_infinite_arc(3, 2);
        net.add_arc(3, 1, 7);
        let text = net.dump().unwrap();
        assert!(text.contains("ARC 3 2 12\n"));
        let parsed = FlowNetwork::parse_dump(&text).unwrap();
        assert_eq!(
            parsed.min_cut().unwrap().value,
            net.min_cut().unwrap().value
        );
        assert_eq!(parsed.dump().unwrap().lines().count(), text.lines().count());
    }

    #[test]
    fn rejects_bad_terminals() {
        assert_eq!(FlowNetwork::new(2, 1, 1), Err(FlowError::SameTerminals));
        assert_eq!(FlowNetwork::new(2, 0, 2), Err(FlowError::BadNode(2)));
    }
}
