//! Periodic square lattice carrying one qudit per edge.
//!
//! Indexing: vertex `(x, y)` has index `y*lx + x`, and `y` grows towards the
//! south. Plaquette `(x, y)` is the face whose north-west corner is vertex
//! `(x, y)` and has the same index. Horizontal edge `h(x, y)` joins `(x, y)`
//! to `(x+1, y)` and has index `y*lx + x`; vertical edge `v(x, y)` joins
//! `(x, y)` to `(x, y+1)` and has index `N + y*lx + x`.
//!
//! Star and plaquette operators follow
//! `A(v) = X_E X_S X†_W X†_N` and `B(p) = Z_E Z†_S Z†_W Z_N`, so a `Z^k` on
//! an edge adds `+k` to the charge of the vertex that sees it as E or S and
//! `-k` to the vertex that sees it as W or N; `X^k` acts on plaquettes the
//! same way with signs `+` on E, N and `-` on S, W.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qudit::{DitVector, PauliError};

/// Which kind of anyon a quantity refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sector {
    /// Charges on vertices, created by the Z-part of an error.
    Chargeon,
    /// Fluxes on plaquettes, created by the X-part of an error.
    Fluxon,
}

impl Sector {
    pub const BOTH: [Sector; 2] = [Sector::Chargeon, Sector::Fluxon];

    pub fn index(self) -> usize {
        match self {
            Sector::Chargeon => 0,
            Sector::Fluxon => 1,
        }
    }

    /// The exponent vector of `p` that feeds this sector.
    pub fn exponents(self, p: &PauliError) -> &DitVector {
        match self {
            Sector::Chargeon => p.z(),
            Sector::Fluxon => p.x(),
        }
    }

    pub fn exponents_mut(self, p: &mut PauliError) -> &mut DitVector {
        match self {
            Sector::Chargeon => p.z_mut(),
            Sector::Fluxon => p.x_mut(),
        }
    }

    /// Single-qudit factor with exponent `e` in this sector.
    pub fn step(self, qudit: usize, e: u32) -> crate::qudit::QuditStep {
        match self {
            Sector::Chargeon => crate::qudit::QuditStep { qudit, z: e, x: 0 },
            Sector::Fluxon => crate::qudit::QuditStep { qudit, z: 0, x: e },
        }
    }
}

/// Position of an edge around a star or plaquette.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Cardinal {
    E,
    S,
    W,
    N,
}

/// Endpoints of a qudit edge in one sector's movement graph. A positive
/// exponent moves charge from `tail` to `head`: it deposits `-k` at the tail
/// and `+k` at the head. `shift` is the lattice displacement tail → head.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EdgeEnds {
    pub tail: usize,
    pub head: usize,
    pub shift: (i32, i32),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TorusLattice {
    lx: usize,
    ly: usize,
    stars: Vec<[(usize, Cardinal); 4]>,
    plaquettes: Vec<[(usize, Cardinal); 4]>,
    ends: [Vec<EdgeEnds>; 2],
}

impl TorusLattice {
    pub fn new(lx: usize, ly: usize) -> Result<Self> {
        if lx < 2 || ly < 2 {
            return Err(Error::Size(format!(
                "torus needs at least 2x2 vertices, got {lx}x{ly}"
            )));
        }
        let n = lx * ly;
        let vid = |x: usize, y: usize| (y % ly) * lx + (x % lx);
        let h = |x: usize, y: usize| vid(x, y);
        let v = |x: usize, y: usize| n + vid(x, y);

        let mut stars = Vec::with_capacity(n);
        let mut plaquettes = Vec::with_capacity(n);
        let mut z_ends = vec![
            EdgeEnds {
                tail: 0,
                head: 0,
                shift: (0, 0)
            };
            2 * n
        ];
        let mut x_ends = z_ends.clone();
        for y in 0..ly {
            for x in 0..lx {
                let xm = (x + lx - 1) % lx;
                let ym = (y + ly - 1) % ly;
                stars.push([
                    (h(x, y), Cardinal::E),
                    (v(x, y), Cardinal::S),
                    (h(xm, y), Cardinal::W),
                    (v(x, ym), Cardinal::N),
                ]);
                plaquettes.push([
                    (v(x + 1, y), Cardinal::E),
                    (h(x, y + 1), Cardinal::S),
                    (v(x, y), Cardinal::W),
                    (h(x, y), Cardinal::N),
                ]);
                // chargeon movement along primal edges
                z_ends[h(x, y)] = EdgeEnds {
                    tail: vid(x + 1, y),
                    head: vid(x, y),
                    shift: (-1, 0),
                };
                z_ends[v(x, y)] = EdgeEnds {
                    tail: vid(x, y + 1),
                    head: vid(x, y),
                    shift: (0, -1),
                };
                // fluxon movement along dual edges
                x_ends[h(x, y)] = EdgeEnds {
                    tail: vid(x, ym),
                    head: vid(x, y),
                    shift: (0, 1),
                };
                x_ends[v(x, y)] = EdgeEnds {
                    tail: vid(x, y),
                    head: vid(xm, y),
                    shift: (-1, 0),
                };
            }
        }
        Ok(TorusLattice {
            lx,
            ly,
            stars,
            plaquettes,
            ends: [z_ends, x_ends],
        })
    }

    pub fn lx(&self) -> usize {
        self.lx
    }

    pub fn ly(&self) -> usize {
        self.ly
    }

    /// Number of vertices, which equals the number of plaquettes.
    pub fn n(&self) -> usize {
        self.lx * self.ly
    }

    pub fn num_qudits(&self) -> usize {
        2 * self.n()
    }

    pub fn site_index(&self, x: usize, y: usize) -> usize {
        (y % self.ly) * self.lx + (x % self.lx)
    }

    pub fn site_coords(&self, s: usize) -> (usize, usize) {
        (s % self.lx, s / self.lx)
    }

    pub fn horizontal_edge(&self, x: usize, y: usize) -> usize {
        self.site_index(x, y)
    }

    pub fn vertical_edge(&self, x: usize, y: usize) -> usize {
        self.n() + self.site_index(x, y)
    }

    pub fn is_horizontal(&self, q: usize) -> bool {
        q < self.n()
    }

    /// Edges of the star at vertex `v` in E, S, W, N order.
    pub fn star(&self, v: usize) -> &[(usize, Cardinal); 4] {
        &self.stars[v]
    }

    /// Edges of plaquette `p` in E, S, W, N order.
    pub fn plaquette(&self, p: usize) -> &[(usize, Cardinal); 4] {
        &self.plaquettes[p]
    }

    /// Edges around a site of the given sector.
    pub fn site_edges(&self, sector: Sector, s: usize) -> &[(usize, Cardinal); 4] {
        match sector {
            Sector::Chargeon => self.star(s),
            Sector::Fluxon => self.plaquette(s),
        }
    }

    pub fn ends(&self, sector: Sector, q: usize) -> EdgeEnds {
        self.ends[sector.index()][q]
    }

    /// Sign with which star `v` / plaquette `p` sees the edge at `card`.
    pub fn sign(sector: Sector, card: Cardinal) -> i32 {
        match (sector, card) {
            (Sector::Chargeon, Cardinal::E | Cardinal::S) => 1,
            (Sector::Chargeon, Cardinal::W | Cardinal::N) => -1,
            (Sector::Fluxon, Cardinal::E | Cardinal::N) => 1,
            (Sector::Fluxon, Cardinal::S | Cardinal::W) => -1,
        }
    }

    /// Pauli error that is the `k`-th power of the star operator at `v`.
    pub fn star_operator(&self, d: u32, v: usize, k: u32) -> Result<PauliError> {
        let mut p = PauliError::identity(d, self.num_qudits())?;
        for &(q, card) in self.star(v) {
            let e = if Self::sign(Sector::Chargeon, card) > 0 { k } else { d - k % d };
            p.x_mut().add_at(q, e);
        }
        Ok(p)
    }

    /// Pauli error that is the `k`-th power of the plaquette operator at `p`.
    pub fn plaquette_operator(&self, d: u32, p: usize, k: u32) -> Result<PauliError> {
        let mut op = PauliError::identity(d, self.num_qudits())?;
        for &(q, card) in self.plaquette(p) {
            let e = if Self::sign(Sector::Fluxon, card) > 0 { k } else { d - k % d };
            op.z_mut().add_at(q, e);
        }
        Ok(op)
    }

    fn check_error(&self, p: &PauliError) -> Result<()> {
        if p.num_qudits() != self.num_qudits() {
            return Err(Error::Dimension(format!(
                "error acts on {} qudits, lattice has {}",
                p.num_qudits(),
                self.num_qudits()
            )));
        }
        Ok(())
    }

    /// Syndrome of one sector only.
    pub fn sector_syndrome(&self, sector: Sector, p: &PauliError) -> Result<DitVector> {
        self.check_error(p)?;
        let d = p.modulus();
        let mut out = DitVector::zeros(d, self.n())?;
        let exps = sector.exponents(p);
        for (q, &k) in exps.entries().iter().enumerate() {
            if k != 0 {
                let e = self.ends(sector, q);
                out.add_at(e.head, k);
                out.add_at(e.tail, d - k);
            }
        }
        Ok(out)
    }

    pub fn syndrome(&self, p: &PauliError) -> Result<Syndrome> {
        Ok(Syndrome {
            a: self.sector_syndrome(Sector::Chargeon, p)?,
            b: self.sector_syndrome(Sector::Fluxon, p)?,
        })
    }

    /// Winding numbers of a syndrome-free error, or `None` if it has a
    /// non-trivial syndrome.
    pub fn logical_class(&self, p: &PauliError) -> Result<Option<LogicalClass>> {
        if !self.syndrome(p)?.is_zero() {
            return Ok(None);
        }
        let d = p.modulus();
        let sum = |v: &DitVector, qs: &mut dyn Iterator<Item = usize>| {
            qs.fold(0u32, |acc, q| crate::qudit::add_mod(acc, v.get(q), d))
        };
        Ok(Some(LogicalClass {
            z_horizontal: sum(p.z(), &mut (0..self.ly).map(|y| self.horizontal_edge(0, y))),
            z_vertical: sum(p.z(), &mut (0..self.lx).map(|x| self.vertical_edge(x, 0))),
            x_horizontal: sum(p.x(), &mut (0..self.ly).map(|y| self.vertical_edge(0, y))),
            x_vertical: sum(p.x(), &mut (0..self.lx).map(|x| self.horizontal_edge(x, 0))),
        }))
    }
}

/// Anyon charges on every vertex (`a`) and plaquette (`b`).
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Syndrome {
    pub a: DitVector,
    pub b: DitVector,
}

impl Syndrome {
    pub fn zero(d: u32, n: usize) -> Result<Self> {
        Ok(Syndrome {
            a: DitVector::zeros(d, n)?,
            b: DitVector::zeros(d, n)?,
        })
    }

    pub fn sector(&self, sector: Sector) -> &DitVector {
        match sector {
            Sector::Chargeon => &self.a,
            Sector::Fluxon => &self.b,
        }
    }

    pub fn sector_mut(&mut self, sector: Sector) -> &mut DitVector {
        match sector {
            Sector::Chargeon => &mut self.a,
            Sector::Fluxon => &mut self.b,
        }
    }

    pub fn modulus(&self) -> u32 {
        self.a.modulus()
    }

    pub fn is_zero(&self) -> bool {
        self.a.is_zero() && self.b.is_zero()
    }

    /// Both sectors carry total charge zero.
    pub fn is_neutral(&self) -> bool {
        self.a.total() == 0 && self.b.total() == 0
    }

    pub fn anyon_count(&self) -> usize {
        self.a.entries().iter().chain(self.b.entries()).filter(|&&c| c != 0).count()
    }

    pub fn combine(&self, other: &Self) -> Result<Self> {
        Ok(Syndrome {
            a: self.a.add(&other.a)?,
            b: self.b.add(&other.b)?,
        })
    }
}

/// Homology class of a syndrome-free error: winding of the Z-part and the
/// X-part around the horizontal and vertical cycles of the torus.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LogicalClass {
    pub z_horizontal: u32,
    pub z_vertical: u32,
    pub x_horizontal: u32,
    pub x_vertical: u32,
}

impl LogicalClass {
    pub fn is_trivial(&self) -> bool {
        self.z_horizontal == 0 && self.z_vertical == 0 && self.x_horizontal == 0 && self.x_vertical == 0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_error(rng: &mut ChaCha8Rng, d: u32, lat: &TorusLattice) -> PauliError {
        let n = lat.num_qudits();
        PauliError::from_exponents(
            d,
            (0..n).map(|_| rng.gen_range(0..d)).collect(),
            (0..n).map(|_| rng.gen_range(0..d)).collect(),
        )
        .unwrap()
    }

    #[test]
    fn counts() {
        let l = TorusLattice::new(2, 2).unwrap();
        assert_eq!((l.n(), l.num_qudits()), (4, 8));
        let l = TorusLattice::new(3, 4).unwrap();
        assert_eq!((l.n(), l.num_qudits()), (12, 24));
        assert!(matches!(TorusLattice::new(1, 4), Err(Error::Size(_))));
    }

    #[test]
    fn every_edge_in_two_stars_and_two_plaquettes_with_opposite_signs() {
        for lx in 2..=5 {
            for ly in 2..=5 {
                let l = TorusLattice::new(lx, ly).unwrap();
                for sector in Sector::BOTH {
                    let mut seen = vec![Vec::new(); l.num_qudits()];
                    for s in 0..l.n() {
                        for &(q, card) in l.site_edges(sector, s) {
                            seen[q].push((s, TorusLattice::sign(sector, card)));
                        }
                    }
                    for (q, hits) in seen.iter().enumerate() {
                        assert_eq!(hits.len(), 2, "{lx}x{ly} {sector:?} edge {q}");
                        let mut signs: Vec<i32> = hits.iter().map(|h| h.1).collect();
                        signs.sort();
                        assert_eq!(signs, vec![-1, 1]);
                        let e = l.ends(sector, q);
                        assert!(hits.contains(&(e.head, 1)) && hits.contains(&(e.tail, -1)));
                    }
                }
            }
        }
    }

    #[test]
    fn x_on_horizontal_edge_creates_flux_pair_south_north() {
        let l = TorusLattice::new(4, 4).unwrap();
        let d = 5;
        let q = l.horizontal_edge(1, 2);
        let mut p = PauliError::identity(d, l.num_qudits()).unwrap();
        p.x_mut().set(q, 2);
        let s = l.syndrome(&p).unwrap();
        assert!(s.a.is_zero());
        let south = l.site_index(1, 2);
        let north = l.site_index(1, 1);
        for site in 0..l.n() {
            let expect = if site == south {
                2
            } else if site == north {
                3
            } else {
                0
            };
            assert_eq!(s.b.get(site), expect);
        }
    }

    #[test]
    fn z_on_edge_creates_charge_pair() {
        let l = TorusLattice::new(3, 3).unwrap();
        let q = l.horizontal_edge(0, 0);
        let mut p = PauliError::identity(3, l.num_qudits()).unwrap();
        p.z_mut().set(q, 1);
        let s = l.syndrome(&p).unwrap();
        assert!(s.b.is_zero());
        assert_eq!(s.a.get(l.site_index(0, 0)), 1);
        assert_eq!(s.a.get(l.site_index(1, 0)), 2);
        assert_eq!(s.anyon_count(), 2);
    }

    #[test]
    fn stabilizers_are_syndrome_free_and_trivial() {
        let l = TorusLattice::new(3, 4).unwrap();
        for d in [2, 3, 5] {
            for s in 0..l.n() {
                for op in [
                    l.star_operator(d, s, 1).unwrap(),
                    l.plaquette_operator(d, s, 2 % d).unwrap(),
                ] {
                    assert!(l.syndrome(&op).unwrap().is_zero());
                    assert!(l.logical_class(&op).unwrap().unwrap().is_trivial());
                }
            }
        }
    }

    #[test]
    fn horizontal_z_loop_has_one_winding() {
        let l = TorusLattice::new(4, 3).unwrap();
        let mut p = PauliError::identity(3, l.num_qudits()).unwrap();
        for x in 0..4 {
            p.z_mut().set(l.horizontal_edge(x, 1), 1);
        }
        let c = l.logical_class(&p).unwrap().unwrap();
        assert_eq!(
            c,
            LogicalClass {
                z_horizontal: 1,
                z_vertical: 0,
                x_horizontal: 0,
                x_vertical: 0
            }
        );
        let id = PauliError::identity(3, l.num_qudits()).unwrap();
        assert!(l.logical_class(&id).unwrap().unwrap().is_trivial());
    }

    #[test]
    fn syndrome_additive_and_neutral() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for i in 0..500 {
            let d = [2, 3, 5, 7][i % 4];
            let l = TorusLattice::new(2 + i % 4, 2 + (i / 4) % 4).unwrap();
            let p = random_error(&mut rng, d, &l);
            let q = random_error(&mut rng, d, &l);
            let sp = l.syndrome(&p).unwrap();
            let sq = l.syndrome(&q).unwrap();
            let spq = l.syndrome(&p.compose(&q).unwrap()).unwrap();
            assert_eq!(spq, sp.combine(&sq).unwrap());
            assert!(sp.is_neutral());
        }
    }

    #[test]
    fn logical_class_is_homomorphism() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let l = TorusLattice::new(3, 3).unwrap();
        let d = 5;
        let logical = |rng: &mut ChaCha8Rng| {
            // random product of stabilizers and the four logical generators
            let mut p = PauliError::identity(d, l.num_qudits()).unwrap();
            for s in 0..l.n() {
                p = p.compose(&l.star_operator(d, s, rng.gen_range(0..d)).unwrap()).unwrap();
                p = p
                    .compose(&l.plaquette_operator(d, s, rng.gen_range(0..d)).unwrap())
                    .unwrap();
            }
            let (a, b, c, e) = (
                rng.gen_range(0..d),
                rng.gen_range(0..d),
                rng.gen_range(0..d),
                rng.gen_range(0..d),
            );
            for x in 0..3 {
                p.z_mut().add_at(l.horizontal_edge(x, 0), a);
                p.x_mut().add_at(l.vertical_edge(x, 2), c);
            }
            for y in 0..3 {
                p.z_mut().add_at(l.vertical_edge(1, y), b);
                p.x_mut().add_at(l.horizontal_edge(2, y), e);
            }
            p
        };
        for _ in 0..50 {
            let p = logical(&mut rng);
            let q = logical(&mut rng);
            let cp = l.logical_class(&p).unwrap().unwrap();
            let cq = l.logical_class(&q).unwrap().unwrap();
            let cpq = l.logical_class(&p.compose(&q).unwrap()).unwrap().unwrap();
            assert_eq!(cpq.z_horizontal, (cp.z_horizontal + cq.z_horizontal) % d);
            assert_eq!(cpq.z_vertical, (cp.z_vertical + cq.z_vertical) % d);
            assert_eq!(cpq.x_horizontal, (cp.x_horizontal + cq.x_horizontal) % d);
            assert_eq!(cpq.x_vertical, (cp.x_vertical + cq.x_vertical) % d);
        }
        let mut bad = PauliError::identity(d, l.num_qudits()).unwrap();
        bad.z_mut().set(0, 1);
        assert_eq!(l.logical_class(&bad).unwrap(), None);
    }
}
