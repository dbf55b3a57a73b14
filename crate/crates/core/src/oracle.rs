//! Exhaustive minimax over local errors paths on a small window of qudits.
//!
//! States are all Pauli frames supported on the window; two frames are
//! adjacent when they differ on one qudit. A frame costs its additional
//! energy with respect to the target syndrome, and the barrier of a target
//! is the smallest possible maximum cost along a path from the identity.

use std::collections::VecDeque;

use crate::error::{Error, Result};
use crate::lattice::{Sector, Syndrome, TorusLattice};
use crate::masses::MassTable;
use crate::qudit::{neg_mod, PauliError};
use crate::scalar::Energy;

/// Largest number of frames the oracle will enumerate.
pub const MAX_STATES: usize = 10_000_000;

/// `support(p)` grown breadth-first through qudits sharing a star or a
/// plaquette until it holds `cap` qudits (or all of them). A support larger
/// than `cap` is returned as is.
pub fn barrier_window(p: &PauliError, lattice: &TorusLattice, cap: usize) -> Vec<usize> {
    let n = lattice.num_qudits();
    let mut inside = vec![false; n];
    let mut window = p.support();
    for &q in &window {
        inside[q] = true;
    }
    let mut queue: VecDeque<usize> = window.iter().copied().collect();
    while window.len() < cap.min(n) {
        let Some(q) = queue.pop_front() else {
            // empty support: seed from qudit 0
            if window.is_empty() {
                inside[0] = true;
                window.push(0);
                queue.push_back(0);
                continue;
            }
            break;
        };
        let mut nbrs = Vec::new();
        for sector in Sector::BOTH {
            let e = lattice.ends(sector, q);
            for s in [e.tail, e.head] {
                nbrs.extend(lattice.site_edges(sector, s).iter().map(|&(r, _)| r));
            }
        }
        nbrs.sort_unstable();
        nbrs.dedup();
        for r in nbrs {
            if window.len() >= cap.min(n) {
                break;
            }
            if !inside[r] {
                inside[r] = true;
                window.push(r);
                queue.push_back(r);
            }
        }
    }
    window.sort_unstable();
    window
}

/// Exhaustive search space over the frames supported on a fixed window.
pub struct BarrierOracle<'a, E> {
    lattice: &'a TorusLattice,
    masses: &'a MassTable<E>,
    d: usize,
    window: Vec<usize>,
    states: usize,
    // per window qudit and sector: (head, tail) as indices into `sites`
    ends: Vec<[(usize, usize); 2]>,
    // sites touched by the window, per sector
    sites: [Vec<usize>; 2],
}

impl<'a, E: Energy> BarrierOracle<'a, E> {
    pub fn new(lattice: &'a TorusLattice, masses: &'a MassTable<E>, window: Vec<usize>) -> Result<Self> {
        let d = masses.modulus() as usize;
        if masses.num_sites() != lattice.n() {
            return Err(Error::Dimension("mass table does not match the lattice".into()));
        }
        let mut states: usize = 1;
        for _ in 0..2 * window.len() {
            states = states.saturating_mul(d);
            if states > MAX_STATES {
                return Err(Error::Size(format!(
                    "{} qudits at d={d} give more than {MAX_STATES} frames",
                    window.len()
                )));
            }
        }
        let mut sites: [Vec<usize>; 2] = [Vec::new(), Vec::new()];
        for sector in Sector::BOTH {
            let list = &mut sites[sector.index()];
            for &q in &window {
                let e = lattice.ends(sector, q);
                list.extend([e.head, e.tail]);
            }
            list.sort_unstable();
            list.dedup();
        }
        let local = |sector: Sector, s: usize| sites[sector.index()].binary_search(&s).expect("window site");
        let ends = window
            .iter()
            .map(|&q| {
                let z = lattice.ends(Sector::Chargeon, q);
                let x = lattice.ends(Sector::Fluxon, q);
                [
                    (local(Sector::Chargeon, z.head), local(Sector::Chargeon, z.tail)),
                    (local(Sector::Fluxon, x.head), local(Sector::Fluxon, x.tail)),
                ]
            })
            .collect();
        Ok(BarrierOracle {
            lattice,
            masses,
            d,
            window,
            states,
            ends,
            sites,
        })
    }

    pub fn num_states(&self) -> usize {
        self.states
    }

    pub fn window(&self) -> &[usize] {
        &self.window
    }

    /// State index of `p`, or `None` if `p` acts outside the window.
    pub fn encode(&self, p: &PauliError) -> Option<usize> {
        if p.support().iter().any(|q| self.window.binary_search(q).is_err()) {
            return None;
        }
        let mut idx = 0;
        for &q in self.window.iter().rev() {
            idx = (idx * self.d + p.x().get(q) as usize) * self.d + p.z().get(q) as usize;
        }
        Some(idx)
    }

    pub fn decode(&self, mut idx: usize) -> PauliError {
        let mut p = PauliError::identity(self.d as u32, self.lattice.num_qudits()).expect("valid modulus");
        for &q in &self.window {
            p.z_mut().set(q, (idx % self.d) as u32);
            idx /= self.d;
            p.x_mut().set(q, (idx % self.d) as u32);
            idx /= self.d;
        }
        p
    }

    // charges of a state on the window sites, chargeon sites first
    fn local_charges(&self, mut idx: usize, buf: &mut [u32]) {
        buf.iter_mut().for_each(|c| *c = 0);
        let off = self.sites[0].len();
        let d = self.d as u32;
        for ends in &self.ends {
            let z = (idx % self.d) as u32;
            idx /= self.d;
            let x = (idx % self.d) as u32;
            idx /= self.d;
            for (k, (head, tail), base) in [(z, ends[0], 0), (x, ends[1], off)] {
                if k != 0 {
                    buf[base + head] = (buf[base + head] + k) % d;
                    buf[base + tail] = (buf[base + tail] + neg_mod(k, d)) % d;
                }
            }
        }
    }

    /// Additional energy of every state with respect to `target`.
    pub fn costs(&self, target: &Syndrome) -> Vec<E> {
        let off = self.sites[0].len();
        let mut fin = vec![0u32; off + self.sites[1].len()];
        for sector in Sector::BOTH {
            let base = if sector == Sector::Chargeon { 0 } else { off };
            for (i, &s) in self.sites[sector.index()].iter().enumerate() {
                fin[base + i] = target.sector(sector).get(s);
            }
        }
        let mut buf = vec![0u32; fin.len()];
        (0..self.states)
            .map(|idx| {
                self.local_charges(idx, &mut buf);
                let mut total = E::zero();
                for (i, (&c, &f)) in buf.iter().zip(&fin).enumerate() {
                    if c != 0 && c != f {
                        let (sector, site) = if i < off {
                            (Sector::Chargeon, self.sites[0][i])
                        } else {
                            (Sector::Fluxon, self.sites[1][i - off])
                        };
                        total = total + self.masses.mass(sector, site, c);
                    }
                }
                total
            })
            .collect()
    }

    fn for_each_neighbour(&self, u: usize, mut f: impl FnMut(usize)) {
        let d = self.d;
        let mut place = 1usize;
        let mut rest = u;
        for _ in 0..self.window.len() {
            let z = rest % d;
            let x = (rest / d) % d;
            rest /= d * d;
            let base = u - z * place - x * place * d;
            for a in 0..d {
                for b in 0..d {
                    if a != z || b != x {
                        f(base + a * place + b * place * d);
                    }
                }
            }
            place *= d * d;
        }
    }

    /// Minimax cost from the identity to `target_state`, by binary search
    /// over the distinct cost values with a reachability search per guess.
    pub fn barrier_to(&self, target_state: usize, costs: &[E]) -> E {
        let mut levels: Vec<E> = costs.to_vec();
        levels.sort_by(|a, b| a.partial_cmp(b).expect("costs are comparable"));
        levels.dedup();
        let floor = costs[0].max_of(costs[target_state]);
        let first = levels.partition_point(|v| *v < floor);
        let reachable = |limit: E| -> bool {
            let mut seen = vec![false; self.states];
            seen[0] = true;
            let mut queue = VecDeque::from([0usize]);
            while let Some(u) = queue.pop_front() {
                if u == target_state {
                    return true;
                }
                self.for_each_neighbour(u, |v| {
                    if !seen[v] && costs[v] <= limit {
                        seen[v] = true;
                        queue.push_back(v);
                    }
                });
            }
            false
        };
        let (mut lo, mut hi) = (first, levels.len() - 1);
        while lo < hi {
            let mid = (lo + hi) / 2;
            if reachable(levels[mid]) {
                hi = mid;
            } else {
                lo = mid + 1;
            }
        }
        levels[lo]
    }

    /// Minimax cost from the identity to every state at once, for a common
    /// target syndrome.
    pub fn all_barriers(&self, costs: &[E]) -> Vec<E> {
        let mut levels: Vec<E> = costs.to_vec();
        levels.sort_by(|a, b| a.partial_cmp(b).expect("costs are comparable"));
        levels.dedup();
        let rank: Vec<usize> = costs
            .iter()
            .map(|c| levels.partition_point(|v| v < c))
            .collect();
        let mut best = vec![usize::MAX; self.states];
        let mut buckets: Vec<Vec<usize>> = vec![Vec::new(); levels.len()];
        best[0] = rank[0];
        buckets[rank[0]].push(0);
        for level in 0..levels.len() {
            while let Some(u) = buckets[level].pop() {
                if best[u] != level {
                    continue;
                }
                self.for_each_neighbour(u, |v| {
                    let nb = level.max(rank[v]);
                    if nb < best[v] {
                        best[v] = nb;
                        buckets[nb].push(v);
                    }
                });
            }
        }
        best.into_iter().map(|r| levels[r]).collect()
    }
}

/// Exact generalized energy barrier of `p` with paths restricted to the
/// window of [`barrier_window`].
pub fn brute_force_barrier<E: Energy>(
    p: &PauliError,
    lattice: &TorusLattice,
    m: &MassTable<E>,
    support_cap: usize,
) -> Result<E> {
    if p.modulus() != m.modulus() {
        return Err(Error::Dimension("error and mass table have different moduli".into()));
    }
    if p.is_identity() {
        return Ok(E::zero());
    }
    let window = barrier_window(p, lattice, support_cap);
    let oracle = BarrierOracle::new(lattice, m, window)?;
    let target = oracle.encode(p).expect("window contains the support");
    let costs = oracle.costs(&lattice.syndrome(p)?);
    Ok(oracle.barrier_to(target, &costs))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn window_growth() {
        let l = TorusLattice::new(3, 3).unwrap();
        let mut p = PauliError::identity(2, 18).unwrap();
        p.z_mut().set(4, 1);
        let w = barrier_window(&p, &l, 4);
        assert_eq!(w.len(), 4);
        assert!(w.contains(&4));
        assert_eq!(barrier_window(&p, &l, 1), vec![4]);
        assert_eq!(barrier_window(&p, &l, 100).len(), 18);
    }

    #[test]
    fn encode_decode_roundtrip() {
        let l = TorusLattice::new(2, 2).unwrap();
        let m = MassTable::uniform(3, 4, &[0.0, 1.0, 1.0]).unwrap();
        let o = BarrierOracle::new(&l, &m, vec![1, 3, 6]).unwrap();
        assert_eq!(o.num_states(), 729);
        for idx in [0, 1, 17, 400, 728] {
            assert_eq!(o.encode(&o.decode(idx)), Some(idx));
        }
        let mut outside = PauliError::identity(3, 8).unwrap();
        outside.x_mut().set(0, 1);
        assert_eq!(o.encode(&outside), None);
    }

    #[test]
    fn guard() {
        let l = TorusLattice::new(3, 3).unwrap();
        let m = MassTable::uniform(3, 9, &[0.0, 1.0, 1.0]).unwrap();
        assert!(BarrierOracle::new(&l, &m, (0..8).collect()).err().unwrap().is_size());
    }

    #[test]
    fn identity_and_single_qudit() {
        let l = TorusLattice::new(2, 2).unwrap();
        let m = MassTable::uniform(2, 4, &[0.0, 1.0]).unwrap();
        let id = PauliError::identity(2, 8).unwrap();
        assert_eq!(brute_force_barrier(&id, &l, &m, 8).unwrap(), 0.0);
        let mut p = id.clone();
        p.z_mut().set(2, 1);
        assert_eq!(brute_force_barrier(&p, &l, &m, 8).unwrap(), 0.0);
    }

    #[test]
    fn logical_string_needs_two() {
        let l = TorusLattice::new(2, 2).unwrap();
        let m = MassTable::uniform(2, 4, &[0.0, 1.0]).unwrap();
        let mut p = PauliError::identity(2, 8).unwrap();
        p.z_mut().set(l.horizontal_edge(0, 0), 1);
        p.z_mut().set(l.horizontal_edge(1, 0), 1);
        assert_eq!(brute_force_barrier(&p, &l, &m, 8).unwrap(), 2.0);
    }

    #[test]
    fn table_agrees_with_binary_search() {
        let l = TorusLattice::new(2, 2).unwrap();
        let m = MassTable::uniform(3, 4, &[0.0, 1.0, 2.0]).unwrap();
        let o = BarrierOracle::new(&l, &m, vec![0, 2, 4, 5]).unwrap();
        let mut checked = 0;
        for idx in (0..o.num_states()).step_by(97) {
            let p = o.decode(idx);
            let costs = o.costs(&l.syndrome(&p).unwrap());
            let table = o.all_barriers(&costs);
            assert_eq!(table[idx], o.barrier_to(idx, &costs));
            checked += 1;
        }
        assert!(checked > 50);
    }
}
