//! Anyon worldlines as Z_d flows, and their decomposition into loops and
//! trees.
//!
//! A flow assigns to every qudit a weight in Z_d, read in the qudit's
//! canonical orientation (see [`EdgeEnds`]). Weight `k` on an edge means
//! charge `k` moved from tail to head; the same edge read backwards carries
//! `d - k`. The charge at a site is inflow minus outflow, which is exactly
//! the syndrome of the error the flow came from.

use std::collections::VecDeque;
use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::lattice::{EdgeEnds, Sector, TorusLattice};
use crate::multiset::{split_zero_sum, zero_sum_subset};
use crate::qudit::{add_mod, neg_mod, DitVector, PauliError};

/// The movement graph of one sector: sites, and for every qudit the pair of
/// sites it connects.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SectorGeometry {
    sector: Sector,
    d: u32,
    lx: usize,
    ly: usize,
    ends: Vec<EdgeEnds>,
    // site -> (qudit, neighbour, leaving along the canonical orientation)
    adjacency: Vec<Vec<(usize, usize, bool)>>,
}

impl SectorGeometry {
    pub fn new(lattice: &TorusLattice, sector: Sector, d: u32) -> Result<Arc<Self>> {
        if d < 2 {
            return Err(Error::Dimension(format!("modulus must be at least 2, got {d}")));
        }
        let ends: Vec<EdgeEnds> = (0..lattice.num_qudits())
            .map(|q| lattice.ends(sector, q))
            .collect();
        let mut adjacency = vec![Vec::new(); lattice.n()];
        for (q, e) in ends.iter().enumerate() {
            adjacency[e.tail].push((q, e.head, true));
            adjacency[e.head].push((q, e.tail, false));
        }
        for a in &mut adjacency {
            a.sort_unstable();
        }
        Ok(Arc::new(SectorGeometry {
            sector,
            d,
            lx: lattice.lx(),
            ly: lattice.ly(),
            ends,
            adjacency,
        }))
    }

    pub fn sector(&self) -> Sector {
        self.sector
    }

    pub fn modulus(&self) -> u32 {
        self.d
    }

    pub fn num_sites(&self) -> usize {
        self.adjacency.len()
    }

    pub fn num_qudits(&self) -> usize {
        self.ends.len()
    }

    pub fn ends(&self, q: usize) -> EdgeEnds {
        self.ends[q]
    }

    /// Crossing qudit `q` starting at site `from`.
    pub fn traverse(&self, q: usize, from: usize) -> Traversal {
        let e = self.ends[q];
        if from == e.tail {
            Traversal {
                qudit: q,
                from,
                to: e.head,
                forward: true,
            }
        } else {
            debug_assert_eq!(from, e.head);
            Traversal {
                qudit: q,
                from,
                to: e.tail,
                forward: false,
            }
        }
    }

    /// Canonical-orientation weight of moving charge `w` along `t`.
    pub fn contribution(&self, t: &Traversal, w: u32) -> u32 {
        if t.forward {
            w % self.d
        } else {
            neg_mod(w, self.d)
        }
    }

    /// Charge at every site produced by per-qudit weights.
    pub fn divergence(&self, weights: &[u32]) -> Vec<u32> {
        let mut div = vec![0u32; self.num_sites()];
        for (q, &w) in weights.iter().enumerate() {
            if w != 0 {
                let e = self.ends[q];
                div[e.head] = add_mod(div[e.head], w, self.d);
                div[e.tail] = add_mod(div[e.tail], neg_mod(w, self.d), self.d);
            }
        }
        div
    }

    fn winding(&self, steps: &[Traversal]) -> (i64, i64) {
        let (mut dx, mut dy) = (0i64, 0i64);
        for t in steps {
            let s = self.ends[t.qudit].shift;
            let sign = if t.forward { 1 } else { -1 };
            dx += sign * s.0 as i64;
            dy += sign * s.1 as i64;
        }
        (dx / self.lx as i64, dy / self.ly as i64)
    }

    // Shortest path from `from` to `to` over qudits accepted by `usable`,
    // never using `skip`. Neighbours are scanned in qudit order.
    pub(crate) fn bfs_path(
        &self,
        from: usize,
        to: usize,
        skip: usize,
        usable: impl Fn(usize, bool) -> bool,
    ) -> Option<Vec<Traversal>> {
        let n = self.num_sites();
        let mut prev: Vec<Option<(usize, usize, bool)>> = vec![None; n];
        let mut seen = vec![false; n];
        seen[from] = true;
        let mut queue = VecDeque::from([from]);
        while let Some(u) = queue.pop_front() {
            if u == to {
                break;
            }
            for &(q, v, fwd) in &self.adjacency[u] {
                if q == skip || seen[v] || !usable(q, fwd) {
                    continue;
                }
                seen[v] = true;
                prev[v] = Some((q, u, fwd));
                queue.push_back(v);
            }
        }
        if !seen[to] {
            return None;
        }
        let mut path = Vec::new();
        let mut cur = to;
        while cur != from {
            let (q, u, fwd) = prev[cur].expect("bfs predecessor");
            path.push(Traversal {
                qudit: q,
                from: u,
                to: cur,
                forward: fwd,
            });
            cur = u;
        }
        path.reverse();
        Some(path)
    }
}

/// One directed step of a walk: crossing `qudit` from site `from` to `to`.
/// `forward` tells whether this agrees with the qudit's canonical orientation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct Traversal {
    pub qudit: usize,
    pub from: usize,
    pub to: usize,
    pub forward: bool,
}

/// A directed edge with nonzero weight, in canonical orientation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct FlowEdge {
    pub qudit: usize,
    pub tail: usize,
    pub head: usize,
    pub weight: u32,
}

impl FlowEdge {
    /// The same edge read the other way round.
    pub fn reversed(&self, d: u32) -> FlowEdge {
        FlowEdge {
            qudit: self.qudit,
            tail: self.head,
            head: self.tail,
            weight: neg_mod(self.weight, d),
        }
    }
}

/// Per-qudit Z_d weights together with the charges they produce.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FlowGraph {
    geom: Arc<SectorGeometry>,
    weights: Vec<u32>,
    charges: Vec<u32>,
}

impl FlowGraph {
    /// Flow whose terminal charges are read off from the weights.
    pub fn from_weights(geom: Arc<SectorGeometry>, weights: Vec<u32>) -> Result<Self> {
        if weights.len() != geom.num_qudits() {
            return Err(Error::Dimension(format!(
                "{} weights for {} qudits",
                weights.len(),
                geom.num_qudits()
            )));
        }
        let d = geom.modulus();
        let weights: Vec<u32> = weights.into_iter().map(|w| w % d).collect();
        let charges = geom.divergence(&weights);
        Ok(FlowGraph {
            geom,
            weights,
            charges,
        })
    }

    /// Flow with explicitly stated terminal charges; not checked until
    /// [`FlowGraph::validate`] or [`FlowGraph::decompose`].
    pub fn with_charges(geom: Arc<SectorGeometry>, weights: Vec<u32>, charges: Vec<u32>) -> Result<Self> {
        if weights.len() != geom.num_qudits() || charges.len() != geom.num_sites() {
            return Err(Error::Dimension(format!(
                "{} weights and {} charges for {} qudits and {} sites",
                weights.len(),
                charges.len(),
                geom.num_qudits(),
                geom.num_sites()
            )));
        }
        let d = geom.modulus();
        Ok(FlowGraph {
            weights: weights.into_iter().map(|w| w % d).collect(),
            charges: charges.into_iter().map(|c| c % d).collect(),
            geom,
        })
    }

    pub fn geometry(&self) -> &Arc<SectorGeometry> {
        &self.geom
    }

    pub fn sector(&self) -> Sector {
        self.geom.sector()
    }

    pub fn weights(&self) -> &[u32] {
        &self.weights
    }

    pub fn charges(&self) -> &[u32] {
        &self.charges
    }

    pub fn is_empty(&self) -> bool {
        self.weights.iter().all(|&w| w == 0)
    }

    pub fn edges(&self) -> Vec<FlowEdge> {
        self.weights
            .iter()
            .enumerate()
            .filter(|(_, &w)| w != 0)
            .map(|(q, &w)| {
                let e = self.geom.ends(q);
                FlowEdge {
                    qudit: q,
                    tail: e.tail,
                    head: e.head,
                    weight: w,
                }
            })
            .collect()
    }

    /// Sites with nonzero charge, with their charge.
    pub fn terminals(&self) -> Vec<(usize, u32)> {
        self.charges
            .iter()
            .enumerate()
            .filter(|(_, &c)| c != 0)
            .map(|(s, &c)| (s, c))
            .collect()
    }

    pub fn validate(&self) -> Result<()> {
        let div = self.geom.divergence(&self.weights);
        for (s, (&have, &want)) in div.iter().zip(&self.charges).enumerate() {
            if have != want {
                return Err(Error::InvalidFlow(format!(
                    "site {s}: net inflow {have} but charge {want}"
                )));
            }
        }
        Ok(())
    }

    /// Split into flows with connected supports, ordered by their smallest site.
    pub fn connected_components(&self) -> Vec<FlowGraph> {
        let n = self.geom.num_sites();
        let mut comp = vec![usize::MAX; n];
        let mut out = Vec::new();
        for start in 0..n {
            if comp[start] != usize::MAX {
                continue;
            }
            let touched = self.geom.adjacency[start]
                .iter()
                .any(|&(q, _, _)| self.weights[q] != 0);
            if !touched && self.charges[start] == 0 {
                continue;
            }
            let id = out.len();
            let mut weights = vec![0; self.weights.len()];
            let mut charges = vec![0; n];
            comp[start] = id;
            let mut stack = vec![start];
            while let Some(u) = stack.pop() {
                charges[u] = self.charges[u];
                for &(q, v, _) in &self.geom.adjacency[u] {
                    if self.weights[q] == 0 {
                        continue;
                    }
                    weights[q] = self.weights[q];
                    if comp[v] == usize::MAX {
                        comp[v] = id;
                        stack.push(v);
                    }
                }
            }
            out.push(FlowGraph {
                geom: self.geom.clone(),
                weights,
                charges,
            });
        }
        out
    }

    /// Peel cycles off the flow until the remaining support is a forest.
    ///
    /// Edges are visited in qudit order; while an edge still carries weight
    /// and closes a cycle in the remaining support, the shortest such cycle
    /// is removed with the edge's full weight.
    pub fn decompose(&self) -> Result<Decomposition> {
        self.validate()?;
        let geom = &self.geom;
        let d = geom.modulus();
        let mut w = self.weights.clone();
        let mut cycles = Vec::new();
        let mut harmonic = Vec::new();
        for e in 0..w.len() {
            if w[e] == 0 {
                continue;
            }
            let ends = geom.ends(e);
            let Some(path) = geom.bfs_path(ends.head, ends.tail, e, |q, _| w[q] != 0) else {
                continue;
            };
            let c = w[e];
            let mut steps = Vec::with_capacity(path.len() + 1);
            steps.push(geom.traverse(e, ends.tail));
            steps.extend(path);
            for t in &steps {
                w[t.qudit] = add_mod(w[t.qudit], neg_mod(geom.contribution(t, c), d), d);
            }
            debug_assert_eq!(w[e], 0);
            let cycle = Cycle::new(geom, c, steps);
            if cycle.is_harmonic() {
                harmonic.push(cycle);
            } else {
                cycles.push(cycle);
            }
        }
        let trees = forest_components(geom, &w, &self.charges)?;
        Ok(Decomposition {
            geom: geom.clone(),
            cycles,
            harmonic,
            trees,
        })
    }
}

fn forest_components(geom: &Arc<SectorGeometry>, w: &[u32], charges: &[u32]) -> Result<Vec<Tree>> {
    let rest = FlowGraph {
        geom: geom.clone(),
        weights: w.to_vec(),
        charges: charges.to_vec(),
    };
    rest.connected_components()
        .into_iter()
        .map(|c| Tree::new(geom.clone(), c.edges(), c.terminals()))
        .collect()
}

/// Closed walk carrying weight `weight` along its steps.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Cycle {
    pub weight: u32,
    pub steps: Vec<Traversal>,
    /// Number of times the walk wraps the torus horizontally and vertically.
    pub winding: (i64, i64),
}

impl Cycle {
    fn new(geom: &SectorGeometry, weight: u32, steps: Vec<Traversal>) -> Self {
        let winding = geom.winding(&steps);
        Cycle {
            weight,
            steps,
            winding,
        }
    }

    pub fn is_harmonic(&self) -> bool {
        self.winding != (0, 0)
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }
}

/// Acyclic piece of a flow together with the charges on its sites.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Tree {
    #[serde(skip)]
    geom: Arc<SectorGeometry>,
    pub edges: Vec<FlowEdge>,
    /// Charged sites and their charges, ascending by site.
    pub charges: Vec<(usize, u32)>,
}

impl Tree {
    /// Checks connectivity, acyclicity and charge balance.
    pub fn new(geom: Arc<SectorGeometry>, edges: Vec<FlowEdge>, charges: Vec<(usize, u32)>) -> Result<Self> {
        let d = geom.modulus();
        let total = charges.iter().fold(0, |acc, &(_, c)| add_mod(acc, c, d));
        if total != 0 {
            return Err(Error::InvalidTree(format!("charges sum to {total}, not 0 mod {d}")));
        }
        let mut weights = vec![0u32; geom.num_qudits()];
        for e in &edges {
            weights[e.qudit] = e.weight % d;
        }
        let mut nodes: Vec<usize> = edges.iter().flat_map(|e| [e.tail, e.head]).collect();
        nodes.extend(charges.iter().map(|&(s, _)| s));
        nodes.sort_unstable();
        nodes.dedup();
        if !nodes.is_empty() && edges.len() + 1 != nodes.len() {
            return Err(Error::InvalidTree(format!(
                "{} edges on {} sites is not a tree",
                edges.len(),
                nodes.len()
            )));
        }
        let div = geom.divergence(&weights);
        let mut want = vec![0u32; geom.num_sites()];
        for &(s, c) in &charges {
            want[s] = c % d;
        }
        if div != want {
            return Err(Error::InvalidTree("charges do not match the edge weights".into()));
        }
        let tree = Tree {
            geom,
            edges,
            charges: charges.into_iter().filter(|&(_, c)| c % d != 0).collect(),
        };
        if !nodes.is_empty() && tree.reach(nodes[0]).len() != nodes.len() {
            return Err(Error::InvalidTree("edges are not connected".into()));
        }
        Ok(tree)
    }

    pub fn geometry(&self) -> &Arc<SectorGeometry> {
        &self.geom
    }

    fn neighbours(&self, u: usize) -> Vec<(usize, usize)> {
        let mut out: Vec<(usize, usize)> = self
            .edges
            .iter()
            .filter_map(|e| {
                if e.tail == u {
                    Some((e.qudit, e.head))
                } else if e.head == u {
                    Some((e.qudit, e.tail))
                } else {
                    None
                }
            })
            .collect();
        out.sort_unstable();
        out
    }

    fn reach(&self, start: usize) -> Vec<usize> {
        let mut seen = vec![start];
        let mut stack = vec![start];
        while let Some(u) = stack.pop() {
            for (_, v) in self.neighbours(u) {
                if !seen.contains(&v) {
                    seen.push(v);
                    stack.push(v);
                }
            }
        }
        seen
    }
}

/// Charge moved from `source` to the root of its simple tree: after the
/// string is built, `source` holds `charge` and the root has received
/// `-charge`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TreeString {
    pub source: usize,
    pub charge: u32,
    /// Weight carried towards the root, `d - charge`.
    pub weight: u32,
    pub steps: Vec<Traversal>,
}

/// Strings that all end at `root` and whose charges cancel, except for the
/// root's own charge.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SimpleTree {
    pub root: usize,
    pub root_charge: u32,
    pub strings: Vec<TreeString>,
}

impl SimpleTree {
    /// Number of charged sites, the root included when it is charged.
    pub fn leaf_count(&self) -> usize {
        self.strings.len() + usize::from(self.root_charge != 0)
    }
}

/// Fatten `tree` into one string per charged site and cut it into simple
/// trees at every vertex where a group of strings fuses to the vacuum.
///
/// The global root is the smallest charged site. Vertices are visited in
/// post-order (children by ascending site), and at each one the strings
/// passing through are split by repeated zero-sum extraction.
pub fn prune_tree(tree: &Tree) -> Result<Vec<SimpleTree>> {
    let geom = &tree.geom;
    let d = geom.modulus();
    let total = tree.charges.iter().fold(0, |acc, &(_, c)| add_mod(acc, c, d));
    if total != 0 {
        return Err(Error::InvalidTree(format!("charges sum to {total}, not 0 mod {d}")));
    }
    let Some(&(root, _)) = tree.charges.first() else {
        return Ok(Vec::new());
    };
    let charge_at = |s: usize| {
        tree.charges
            .iter()
            .find(|&&(t, _)| t == s)
            .map_or(0, |&(_, c)| c)
    };

    // rooted structure
    let mut parent: Vec<Option<(usize, usize)>> = vec![None; geom.num_sites()];
    let mut children: Vec<Vec<usize>> = vec![Vec::new(); geom.num_sites()];
    let mut order = vec![root];
    let mut visited = vec![false; geom.num_sites()];
    visited[root] = true;
    let mut i = 0;
    while i < order.len() {
        let u = order[i];
        i += 1;
        let mut kids: Vec<(usize, usize)> = tree
            .neighbours(u)
            .into_iter()
            .filter(|&(_, v)| !visited[v])
            .map(|(q, v)| (v, q))
            .collect();
        kids.sort_unstable();
        for (v, q) in kids {
            visited[v] = true;
            parent[v] = Some((q, u));
            children[u].push(v);
            order.push(v);
        }
    }

    struct Pending {
        source: usize,
        charge: u32,
        steps: Vec<Traversal>,
    }

    fn visit(
        u: usize,
        root: usize,
        d: u32,
        geom: &SectorGeometry,
        children: &[Vec<usize>],
        parent: &[Option<(usize, usize)>],
        charge_at: &dyn Fn(usize) -> u32,
        out: &mut Vec<SimpleTree>,
    ) -> Vec<Pending> {
        let mut pending = Vec::new();
        for &c in &children[u] {
            pending.extend(visit(c, root, d, geom, children, parent, charge_at, out));
        }
        let own = charge_at(u);
        if u != root && own != 0 {
            pending.push(Pending {
                source: u,
                charge: own,
                steps: Vec::new(),
            });
        }
        let items: Vec<u32> = pending.iter().map(|p| p.charge).collect();
        let (groups, rest) = if u == root {
            (Vec::new(), (0..pending.len()).collect())
        } else {
            split_zero_sum(d, &items)
        };
        let mut slots: Vec<Option<Pending>> = pending.into_iter().map(Some).collect();
        for g in groups {
            let mut strings = Vec::new();
            let mut root_charge = 0;
            for idx in g {
                let p = slots[idx].take().expect("each string extracted once");
                if p.source == u {
                    root_charge = p.charge;
                } else {
                    strings.push(TreeString {
                        source: p.source,
                        charge: p.charge,
                        weight: neg_mod(p.charge, d),
                        steps: p.steps,
                    });
                }
            }
            strings.sort_by_key(|s| s.source);
            out.push(SimpleTree {
                root: u,
                root_charge,
                strings,
            });
        }
        let mut rest: Vec<Pending> = rest.into_iter().map(|i| slots[i].take().expect("remainder")).collect();
        if u == root {
            let mut strings: Vec<TreeString> = rest
                .into_iter()
                .map(|p| TreeString {
                    source: p.source,
                    charge: p.charge,
                    weight: neg_mod(p.charge, d),
                    steps: p.steps,
                })
                .collect();
            strings.sort_by_key(|s| s.source);
            out.push(SimpleTree {
                root,
                root_charge: charge_at(root),
                strings,
            });
            return Vec::new();
        }
        let (q, up) = parent[u].expect("non-root vertex has a parent");
        let step = geom.traverse(q, u);
        debug_assert_eq!(step.to, up);
        for p in &mut rest {
            p.steps.push(step);
        }
        rest
    }

    let mut out = Vec::new();
    visit(root, root, d, geom, &children, &parent, &charge_at, &mut out);
    Ok(out)
}

/// Loops and trees making up a flow.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Decomposition {
    #[serde(skip)]
    geom: Arc<SectorGeometry>,
    /// Contractible loops.
    pub cycles: Vec<Cycle>,
    /// Loops winding around the torus.
    pub harmonic: Vec<Cycle>,
    pub trees: Vec<Tree>,
}

impl Decomposition {
    pub fn geometry(&self) -> &Arc<SectorGeometry> {
        &self.geom
    }

    /// Per-qudit weights of all parts added together.
    pub fn recompose(&self) -> Vec<u32> {
        let d = self.geom.modulus();
        let mut w = vec![0u32; self.geom.num_qudits()];
        for c in self.cycles.iter().chain(&self.harmonic) {
            for t in &c.steps {
                w[t.qudit] = add_mod(w[t.qudit], self.geom.contribution(t, c.weight), d);
            }
        }
        for t in &self.trees {
            for e in &t.edges {
                w[e.qudit] = add_mod(w[e.qudit], e.weight, d);
            }
        }
        w
    }

    /// How many loops (contractible or not) cross each qudit.
    pub fn loop_multiplicity(&self) -> Vec<usize> {
        let mut m = vec![0; self.geom.num_qudits()];
        for c in self.cycles.iter().chain(&self.harmonic) {
            for t in &c.steps {
                m[t.qudit] += 1;
            }
        }
        m
    }

    /// Fuse loops until no qudit is crossed by a zero-sum family of loops.
    ///
    /// Loops picked by a zero-sum witness are absorbed into one fused flow,
    /// which is lifted to an integer circulation with entries in
    /// `(-d, d)` and split into directed cycles. Directed cycles of such a
    /// circulation cross every qudit in the same direction with positive
    /// weights summing below `d`, so they never form a zero-sum family among
    /// themselves and every round absorbs at least one original loop.
    pub fn merge_loops(&self) -> Result<Decomposition> {
        let geom = &self.geom;
        let d = geom.modulus();
        let nq = geom.num_qudits();
        let mut originals: Vec<Cycle> = self.cycles.iter().chain(&self.harmonic).cloned().collect();
        let mut fused_flow = vec![0u32; nq];
        let mut fused: Vec<Cycle> = Vec::new();
        loop {
            let all: Vec<&Cycle> = fused.iter().chain(originals.iter()).collect();
            let mut crossing: Vec<Vec<(usize, u32)>> = vec![Vec::new(); nq];
            for (i, c) in all.iter().enumerate() {
                for t in &c.steps {
                    crossing[t.qudit].push((i, geom.contribution(t, c.weight)));
                }
            }
            let witness = crossing.iter().find_map(|list| {
                let vals: Vec<u32> = list.iter().map(|&(_, w)| w).collect();
                zero_sum_subset(d, &vals).map(|sub| sub.iter().map(|&k| list[k].0).collect::<Vec<_>>())
            });
            let Some(picked) = witness else {
                break;
            };
            let mut absorb: Vec<usize> = picked
                .into_iter()
                .filter(|&i| i >= fused.len())
                .map(|i| i - fused.len())
                .collect();
            if absorb.is_empty() {
                return Err(Error::InvalidFlow(
                    "fused cycles formed a zero-sum family among themselves".into(),
                ));
            }
            absorb.sort_unstable();
            absorb.dedup();
            for &i in absorb.iter().rev() {
                let c = originals.remove(i);
                for t in &c.steps {
                    fused_flow[t.qudit] = add_mod(fused_flow[t.qudit], geom.contribution(t, c.weight), d);
                }
            }
            fused = lift_to_cycles(geom, &fused_flow)?;
        }
        let mut cycles = Vec::new();
        let mut harmonic = Vec::new();
        for c in fused.into_iter().chain(originals) {
            if c.is_harmonic() {
                harmonic.push(c);
            } else {
                cycles.push(c);
            }
        }
        Ok(Decomposition {
            geom: geom.clone(),
            cycles,
            harmonic,
            trees: self.trees.clone(),
        })
    }
}

/// Write a Z_d circulation as a sum of directed cycles whose weights on any
/// qudit add up to less than `d`.
fn lift_to_cycles(geom: &SectorGeometry, flow: &[u32]) -> Result<Vec<Cycle>> {
    let d = geom.modulus() as i64;
    let n = geom.num_sites();
    // integer divergence of the representative in [0, d)
    let mut excess = vec![0i64; n];
    for (q, &w) in flow.iter().enumerate() {
        if w != 0 {
            let e = geom.ends(q);
            excess[e.head] += w as i64;
            excess[e.tail] -= w as i64;
        }
    }
    if excess.iter().any(|x| x % d != 0) {
        return Err(Error::InvalidFlow("fused flow is not a circulation".into()));
    }
    // Choose h in {0,1} on the support with net h-inflow excess/d at every
    // site; then flow - d*h is an integer circulation.
    let mut net = MaxFlow::new(n + 2);
    let (src, sink) = (n, n + 1);
    let mut arc_of = vec![usize::MAX; flow.len()];
    for (q, &w) in flow.iter().enumerate() {
        if w != 0 {
            let e = geom.ends(q);
            arc_of[q] = net.add_edge(e.tail, e.head, 1);
        }
    }
    let mut need = 0;
    for (v, &x) in excess.iter().enumerate() {
        let b = x / d;
        if b > 0 {
            net.add_edge(v, sink, b);
            need += b;
        } else if b < 0 {
            net.add_edge(src, v, -b);
        }
    }
    if net.run(src, sink) != need {
        return Err(Error::InvalidFlow("no integer lift of the fused flow".into()));
    }
    let mut amount = vec![0i64; flow.len()];
    for (q, &w) in flow.iter().enumerate() {
        if w != 0 {
            amount[q] = w as i64 - d * net.flow_on(arc_of[q]);
        }
    }

    let mut cycles = Vec::new();
    for e in 0..amount.len() {
        while amount[e] != 0 {
            let ends = geom.ends(e);
            let first = if amount[e] > 0 {
                geom.traverse(e, ends.tail)
            } else {
                geom.traverse(e, ends.head)
            };
            let path = geom
                .bfs_path(first.to, first.from, e, |q, fwd| {
                    if fwd {
                        amount[q] > 0
                    } else {
                        amount[q] < 0
                    }
                })
                .ok_or_else(|| Error::InvalidFlow("integer circulation has a dead end".into()))?;
            let mut steps = vec![first];
            steps.extend(path);
            let c = steps.iter().map(|t| amount[t.qudit].abs()).min().expect("nonempty");
            for t in &steps {
                amount[t.qudit] -= if t.forward { c } else { -c };
            }
            cycles.push(Cycle::new(geom, c as u32, steps));
        }
    }
    Ok(cycles)
}

/// Edmonds-Karp on a small graph.
struct MaxFlow {
    adj: Vec<Vec<usize>>,
    to: Vec<usize>,
    cap: Vec<i64>,
    orig: Vec<i64>,
}

impl MaxFlow {
    fn new(n: usize) -> Self {
        MaxFlow {
            adj: vec![Vec::new(); n],
            to: Vec::new(),
            cap: Vec::new(),
            orig: Vec::new(),
        }
    }

    fn add_edge(&mut self, u: usize, v: usize, c: i64) -> usize {
        let id = self.to.len();
        self.adj[u].push(id);
        self.to.push(v);
        self.cap.push(c);
        self.orig.push(c);
        self.adj[v].push(id + 1);
        self.to.push(u);
        self.cap.push(0);
        self.orig.push(0);
        id
    }

    fn flow_on(&self, id: usize) -> i64 {
        self.orig[id] - self.cap[id]
    }

    fn run(&mut self, s: usize, t: usize) -> i64 {
        let mut total = 0;
        loop {
            let mut prev = vec![usize::MAX; self.adj.len()];
            let mut queue = VecDeque::from([s]);
            let mut seen = vec![false; self.adj.len()];
            seen[s] = true;
            while let Some(u) = queue.pop_front() {
                for &id in &self.adj[u] {
                    let v = self.to[id];
                    if !seen[v] && self.cap[id] > 0 {
                        seen[v] = true;
                        prev[v] = id;
                        queue.push_back(v);
                    }
                }
            }
            if !seen[t] {
                return total;
            }
            let mut push = i64::MAX;
            let mut v = t;
            while v != s {
                let id = prev[v];
                push = push.min(self.cap[id]);
                v = self.to[id ^ 1];
            }
            let mut v = t;
            while v != s {
                let id = prev[v];
                self.cap[id] -= push;
                self.cap[id ^ 1] += push;
                v = self.to[id ^ 1];
            }
            total += push;
        }
    }
}

/// Chargeon flow from the Z-part and fluxon flow from the X-part.
pub fn error_to_flows(p: &PauliError, lattice: &TorusLattice) -> Result<(FlowGraph, FlowGraph)> {
    if p.num_qudits() != lattice.num_qudits() {
        return Err(Error::Dimension(format!(
            "error acts on {} qudits, lattice has {}",
            p.num_qudits(),
            lattice.num_qudits()
        )));
    }
    let d = p.modulus();
    let make = |sector: Sector| -> Result<FlowGraph> {
        let geom = SectorGeometry::new(lattice, sector, d)?;
        FlowGraph::from_weights(geom, sector.exponents(p).entries().to_vec())
    };
    Ok((make(Sector::Chargeon)?, make(Sector::Fluxon)?))
}

/// Merged loops and pruned trees of one connected component.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ComponentPlan {
    pub sites: Vec<usize>,
    pub cycles: Vec<Cycle>,
    pub harmonic: Vec<Cycle>,
    pub trees: Vec<SimpleTree>,
}

/// Everything needed to build one sector of an error piece by piece.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SectorPlan {
    pub sector: Sector,
    pub d: u32,
    #[serde(skip)]
    pub num_qudits: usize,
    pub components: Vec<ComponentPlan>,
}

impl SectorPlan {
    /// Components, then decomposition, merging and pruning of each.
    pub fn build(flow: &FlowGraph) -> Result<Self> {
        let geom = flow.geometry();
        let components = flow
            .connected_components()
            .par_iter()
            .map(|c| {
                let merged = c.decompose()?.merge_loops()?;
                let mut trees = Vec::new();
                for t in &merged.trees {
                    trees.extend(prune_tree(t)?);
                }
                let mut sites: Vec<usize> = c
                    .edges()
                    .iter()
                    .flat_map(|e| [e.tail, e.head])
                    .collect();
                sites.sort_unstable();
                sites.dedup();
                Ok(ComponentPlan {
                    sites,
                    cycles: merged.cycles,
                    harmonic: merged.harmonic,
                    trees,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(SectorPlan {
            sector: geom.sector(),
            d: geom.modulus(),
            num_qudits: geom.num_qudits(),
            components,
        })
    }

    fn traversal_weight(&self, t: &Traversal, w: u32) -> u32 {
        if t.forward {
            w % self.d
        } else {
            neg_mod(w, self.d)
        }
    }

    /// Per-qudit weights of all pieces added together.
    pub fn recompose(&self) -> Vec<u32> {
        let mut w = vec![0u32; self.num_qudits];
        let mut add = |t: &Traversal, k: u32| {
            w[t.qudit] = add_mod(w[t.qudit], self.traversal_weight(t, k), self.d);
        };
        for c in &self.components {
            for cy in c.cycles.iter().chain(&c.harmonic) {
                for t in &cy.steps {
                    add(t, cy.weight);
                }
            }
            for tr in &c.trees {
                for s in &tr.strings {
                    for t in &s.steps {
                        add(t, s.weight);
                    }
                }
            }
        }
        w
    }

    /// Loops crossing each qudit.
    pub fn loop_multiplicity(&self) -> Vec<usize> {
        let mut m = vec![0; self.num_qudits];
        for c in &self.components {
            for cy in c.cycles.iter().chain(&c.harmonic) {
                for t in &cy.steps {
                    m[t.qudit] += 1;
                }
            }
        }
        m
    }

    /// Strings crossing each qudit.
    pub fn string_multiplicity(&self) -> Vec<usize> {
        let mut m = vec![0; self.num_qudits];
        for c in &self.components {
            for tr in &c.trees {
                for s in &tr.strings {
                    for t in &s.steps {
                        m[t.qudit] += 1;
                    }
                }
            }
        }
        m
    }
}

/// Plans for the chargeon and fluxon sectors of `p`.
pub fn plan_error(p: &PauliError, lattice: &TorusLattice) -> Result<[SectorPlan; 2]> {
    let (z, x) = error_to_flows(p, lattice)?;
    Ok([SectorPlan::build(&z)?, SectorPlan::build(&x)?])
}

/// Per-qudit exponents as a [`DitVector`], for comparison with an error.
pub fn weights_to_dits(d: u32, weights: &[u32]) -> Result<DitVector> {
    DitVector::from_residues(d, weights.iter().copied())
}
