//! Permuting defect lines.
//!
//! A line multiplies the charge of an anyon crossing it by an invertible
//! `M` (or `M^-1` when crossing the other way). Lines acting on chargeons
//! run through plaquette centres and cut the primal edges they cross; lines
//! acting on fluxons run through vertices. For a consistent configuration
//! every site gets a region label `L` (the product of multipliers picked up
//! on the way from the reference site 0), and:
//!
//! * the local syndrome is `L · e`, where `e` is the syndrome without lines,
//! * the global syndrome is `L^-1 · local = e`.
//!
//! An anyon of local type `k` at site `s` costs `J_s^k`, so the energy of
//! an error is that of its defect-free syndrome under the relabeled table
//! `J'_s^k = J_s^{L_s k}`.

use serde::{Deserialize, Serialize};

use crate::barrier::{schedule_path, LocalErrorsPath};
use crate::error::{Error, Result};
use crate::lattice::{Sector, Syndrome, TorusLattice};
use crate::masses::MassTable;
use crate::qudit::{inv_mod, mul_mod, DitVector, PauliError};
use crate::scalar::Energy;

/// Direction of a crossing relative to the line's orientation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Crossing {
    /// Into the marked side: multiply by `M`.
    Along,
    /// Out of the marked side: multiply by `M^-1`.
    Against,
}

/// Charge of a type-`k` anyon after crossing a line with multiplier `m`.
pub fn crossing_action(d: u32, k: u32, m: u32, dir: Crossing) -> Result<u32> {
    let inv = inv_mod(m % d, d).ok_or_else(|| Error::Config(format!("M={m} is not invertible mod {d}")))?;
    Ok(match dir {
        Crossing::Along => mul_mod(k % d, m % d, d),
        Crossing::Against => mul_mod(k % d, inv, d),
    })
}

/// Which side of the line, looking along its path with north up, is the
/// marked side. Crossing into the marked side multiplies by `M`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Orientation {
    Left,
    Right,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DefectLine {
    /// Anyons affected by the line.
    pub sector: Sector,
    /// Consecutive neighbouring points: plaquette coordinates for chargeon
    /// lines, vertex coordinates for fluxon lines. Repeat the first point
    /// at the end to close the line.
    pub path: Vec<[i64; 2]>,
    #[serde(rename = "M")]
    pub m: u32,
    pub orientation: Orientation,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DefectConfig {
    pub d: u32,
    #[serde(default)]
    pub lines: Vec<DefectLine>,
}

/// Loop along which the multipliers do not cancel.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LoopViolation {
    pub sector: Sector,
    /// `"face"` around a dual site, or `"horizontal"` / `"vertical"` for
    /// the two winding generators.
    pub kind: String,
    /// The dual site the face loop encloses (vertex for fluxon loops,
    /// plaquette for chargeon loops); unused for winding loops.
    pub around: Option<usize>,
    pub sites: Vec<usize>,
    pub product: u32,
}

/// Outcome of the consistency check.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ConsistencyReport {
    pub consistent: bool,
    pub violation: Option<LoopViolation>,
    /// Region labels per sector when consistent.
    pub chargeon_labels: Vec<u32>,
    pub fluxon_labels: Vec<u32>,
}

/// A validated configuration: per-qudit multipliers and region labels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Defects {
    d: u32,
    // multiplier picked up moving tail -> head, per sector and qudit
    mult: [Vec<u32>; 2],
    labels: [Vec<u32>; 2],
}

fn doubled_to_site(lattice: &TorusLattice, sector: Sector, p: (i64, i64)) -> usize {
    let (w, h) = (2 * lattice.lx() as i64, 2 * lattice.ly() as i64);
    let (x, y) = (p.0.rem_euclid(w), p.1.rem_euclid(h));
    match sector {
        Sector::Chargeon => lattice.site_index((x / 2) as usize, (y / 2) as usize),
        Sector::Fluxon => lattice.site_index(((x - 1) / 2) as usize, ((y - 1) / 2) as usize),
    }
}

fn step_dir(a: i64, b: i64, len: usize) -> Option<i64> {
    let len = len as i64;
    let diff = (b - a).rem_euclid(len);
    if diff == 1 {
        Some(1)
    } else if diff == len - 1 {
        Some(-1)
    } else if diff == 0 {
        Some(0)
    } else {
        None
    }
}

/// Qudits crossed by a line, each with the site on its marked side.
fn crossings(lattice: &TorusLattice, line: &DefectLine) -> Result<Vec<(usize, usize)>> {
    let bad = |msg: String| Error::Config(msg);
    let mut out = Vec::new();
    for w in line.path.windows(2) {
        let (a, b) = (w[0], w[1]);
        let dx = step_dir(a[0], b[0], lattice.lx());
        let dy = step_dir(a[1], b[1], lattice.ly());
        let (dx, dy) = match (dx, dy) {
            (Some(dx), Some(0)) if dx != 0 => (dx, 0),
            (Some(0), Some(dy)) if dy != 0 => (0, dy),
            _ => return Err(bad(format!("line points {a:?} and {b:?} are not neighbours"))),
        };
        let (x, y) = (
            a[0].rem_euclid(lattice.lx() as i64) as usize,
            a[1].rem_euclid(lattice.ly() as i64) as usize,
        );
        let (lx, ly) = (lattice.lx(), lattice.ly());
        let q = match (line.sector, dx, dy) {
            (Sector::Chargeon, 1, 0) => lattice.vertical_edge(x + 1, y),
            (Sector::Chargeon, -1, 0) => lattice.vertical_edge(x, y),
            (Sector::Chargeon, 0, 1) => lattice.horizontal_edge(x, y + 1),
            (Sector::Chargeon, _, _) => lattice.horizontal_edge(x, y),
            (Sector::Fluxon, 1, 0) => lattice.horizontal_edge(x, y),
            (Sector::Fluxon, -1, 0) => lattice.horizontal_edge(x + lx - 1, y),
            (Sector::Fluxon, 0, 1) => lattice.vertical_edge(x, y),
            (Sector::Fluxon, _, _) => lattice.vertical_edge(x, y + ly - 1),
        };
        let (qx, qy) = lattice.site_coords(q % lattice.n());
        let mid = if lattice.is_horizontal(q) {
            (2 * qx as i64 + 1, 2 * qy as i64)
        } else {
            (2 * qx as i64, 2 * qy as i64 + 1)
        };
        let (ox, oy) = match line.orientation {
            Orientation::Left => (dy, -dx),
            Orientation::Right => (-dy, dx),
        };
        let marked = doubled_to_site(lattice, line.sector, (mid.0 + ox, mid.1 + oy));
        out.push((q, marked));
    }
    Ok(out)
}

impl Defects {
    /// No lines at all.
    pub fn none(lattice: &TorusLattice, d: u32) -> Self {
        Defects {
            d,
            mult: [vec![1; lattice.num_qudits()], vec![1; lattice.num_qudits()]],
            labels: [vec![1; lattice.n()], vec![1; lattice.n()]],
        }
    }

    /// Check the configuration; on success return the labels.
    pub fn check(cfg: &DefectConfig, lattice: &TorusLattice) -> Result<(ConsistencyReport, Option<Defects>)> {
        let d = cfg.d;
        if d < 2 {
            return Err(Error::Dimension(format!("modulus must be at least 2, got {d}")));
        }
        let mut mult = [vec![1u32; lattice.num_qudits()], vec![1u32; lattice.num_qudits()]];
        for line in &cfg.lines {
            let m = line.m % d;
            let inv = inv_mod(m, d).ok_or_else(|| Error::Config(format!("M={} is not invertible mod {d}", line.m)))?;
            for (q, marked) in crossings(lattice, line)? {
                let e = lattice.ends(line.sector, q);
                let f = if e.head == marked { m } else { inv };
                let slot = &mut mult[line.sector.index()][q];
                *slot = mul_mod(*slot, f, d);
            }
        }
        let mut defects = Defects {
            d,
            mult,
            labels: [vec![1; lattice.n()], vec![1; lattice.n()]],
        };
        for sector in Sector::BOTH {
            for (kind, around, walk) in loops(lattice, sector) {
                let product = defects.walk_product(lattice, sector, &walk);
                if product != 1 {
                    let report = ConsistencyReport {
                        consistent: false,
                        violation: Some(LoopViolation {
                            sector,
                            kind: kind.to_string(),
                            around,
                            sites: walk.iter().map(|&(_, from)| from).collect(),
                            product,
                        }),
                        chargeon_labels: Vec::new(),
                        fluxon_labels: Vec::new(),
                    };
                    return Ok((report, None));
                }
            }
            defects.labels[sector.index()] = defects.propagate(lattice, sector);
        }
        let report = ConsistencyReport {
            consistent: true,
            violation: None,
            chargeon_labels: defects.labels[0].clone(),
            fluxon_labels: defects.labels[1].clone(),
        };
        Ok((report, Some(defects)))
    }

    /// Like [`Defects::check`], but an inconsistent loop is an error.
    pub fn validate(cfg: &DefectConfig, lattice: &TorusLattice) -> Result<Defects> {
        match Self::check(cfg, lattice)? {
            (_, Some(d)) => Ok(d),
            (report, None) => {
                let v = report.violation.expect("inconsistent report names a loop");
                Err(Error::Config(format!(
                    "{:?} {} loop through sites {:?} multiplies charges by {}",
                    v.sector, v.kind, v.sites, v.product
                )))
            }
        }
    }

    fn step_factor(&self, lattice: &TorusLattice, sector: Sector, q: usize, from: usize) -> u32 {
        let m = self.mult[sector.index()][q];
        if lattice.ends(sector, q).tail == from {
            m
        } else {
            inv_mod(m, self.d).expect("multipliers are invertible")
        }
    }

    fn walk_product(&self, lattice: &TorusLattice, sector: Sector, walk: &[(usize, usize)]) -> u32 {
        walk.iter()
            .fold(1, |acc, &(q, from)| mul_mod(acc, self.step_factor(lattice, sector, q, from), self.d))
    }

    fn propagate(&self, lattice: &TorusLattice, sector: Sector) -> Vec<u32> {
        let mut labels = vec![0u32; lattice.n()];
        labels[0] = 1;
        let mut stack = vec![0usize];
        while let Some(u) = stack.pop() {
            for &(q, _) in lattice.site_edges(sector, u) {
                let e = lattice.ends(sector, q);
                let v = if e.tail == u { e.head } else { e.tail };
                if labels[v] == 0 {
                    labels[v] = mul_mod(labels[u], self.step_factor(lattice, sector, q, u), self.d);
                    stack.push(v);
                }
            }
        }
        labels
    }

    pub fn modulus(&self) -> u32 {
        self.d
    }

    /// Region label of every site: the `T1` factor.
    pub fn labels(&self, sector: Sector) -> &[u32] {
        &self.labels[sector.index()]
    }

    /// Inverse region labels: the `T2` factor.
    pub fn inverse_labels(&self, sector: Sector) -> Vec<u32> {
        self.labels[sector.index()]
            .iter()
            .map(|&l| inv_mod(l, self.d).expect("labels are invertible"))
            .collect()
    }

    fn scale(&self, s: &Syndrome, factors: [&[u32]; 2]) -> Result<Syndrome> {
        let d = self.d;
        let f = |sector: Sector| -> Result<DitVector> {
            let v = s.sector(sector);
            DitVector::from_residues(
                d,
                v.entries()
                    .iter()
                    .zip(factors[sector.index()])
                    .map(|(&c, &l)| mul_mod(c, l, d)),
            )
        };
        Ok(Syndrome {
            a: f(Sector::Chargeon)?,
            b: f(Sector::Fluxon)?,
        })
    }

    /// `T1 · e`: the charges as seen locally.
    pub fn local_from_plain(&self, plain: &Syndrome) -> Result<Syndrome> {
        self.scale(plain, [&self.labels[0], &self.labels[1]])
    }

    /// `T2 · local`.
    pub fn global_from_local(&self, local: &Syndrome) -> Result<Syndrome> {
        let inv = [self.inverse_labels(Sector::Chargeon), self.inverse_labels(Sector::Fluxon)];
        self.scale(local, [&inv[0], &inv[1]])
    }

    /// `(local, global)` syndromes of `p`.
    pub fn syndrome_with_defects(&self, p: &PauliError, lattice: &TorusLattice) -> Result<(Syndrome, Syndrome)> {
        if p.modulus() != self.d {
            return Err(Error::Dimension("error and defect configuration have different moduli".into()));
        }
        let local = self.local_from_plain(&lattice.syndrome(p)?)?;
        let global = self.global_from_local(&local)?;
        Ok((local, global))
    }

    /// Mass table indexed by global charge: `J'_s^k = J_s^{L_s k}`.
    pub fn effective_masses<E: Energy>(&self, m: &MassTable<E>) -> MassTable<E> {
        m.relabeled(Sector::Chargeon, &self.labels[0])
            .relabeled(Sector::Fluxon, &self.labels[1])
    }
}

/// Face loops around every dual site, then the two winding loops, as
/// `(qudit, starting site)` walks.
fn loops(lattice: &TorusLattice, sector: Sector) -> Vec<(&'static str, Option<usize>, Vec<(usize, usize)>)> {
    let (lx, ly) = (lattice.lx(), lattice.ly());
    let mut out = Vec::new();
    for y in 0..ly {
        for x in 0..lx {
            let s = |x: usize, y: usize| lattice.site_index(x % lx, y % ly);
            let walk = match sector {
                // vertices around plaquette (x, y)
                Sector::Chargeon => vec![
                    (lattice.horizontal_edge(x, y), s(x, y)),
                    (lattice.vertical_edge(x + 1, y), s(x + 1, y)),
                    (lattice.horizontal_edge(x, y + 1), s(x + 1, y + 1)),
                    (lattice.vertical_edge(x, y), s(x, y + 1)),
                ],
                // plaquettes around vertex (x, y)
                Sector::Fluxon => {
                    let (xm, ym) = (x + lx - 1, y + ly - 1);
                    vec![
                        (lattice.vertical_edge(x, ym), s(xm, ym)),
                        (lattice.horizontal_edge(x, y), s(x, ym)),
                        (lattice.vertical_edge(x, y), s(x, y)),
                        (lattice.horizontal_edge(xm, y), s(xm, y)),
                    ]
                }
            };
            out.push(("face", Some(lattice.site_index(x, y)), walk));
        }
    }
    let (horizontal, vertical): (Vec<_>, Vec<_>) = match sector {
        Sector::Chargeon => (
            (0..lx).map(|x| (lattice.horizontal_edge(x, 0), lattice.site_index(x, 0))).collect(),
            (0..ly).map(|y| (lattice.vertical_edge(0, y), lattice.site_index(0, y))).collect(),
        ),
        Sector::Fluxon => (
            (0..lx).map(|x| (lattice.vertical_edge(x + 1, 0), lattice.site_index(x, 0))).collect(),
            (0..ly).map(|y| (lattice.horizontal_edge(0, y + 1), lattice.site_index(0, y))).collect(),
        ),
    };
    out.push(("horizontal", None, horizontal));
    out.push(("vertical", None, vertical));
    out
}

/// Constructive path for `p` priced with the local charges.
pub fn barrier_with_defects<E: Energy>(
    p: &PauliError,
    defects: &Defects,
    lattice: &TorusLattice,
    m: &MassTable<E>,
) -> Result<LocalErrorsPath<E>> {
    if defects.modulus() != m.modulus() {
        return Err(Error::Dimension("defects and masses have different moduli".into()));
    }
    schedule_path(p, lattice, &defects.effective_masses(m))
}

/// Four same-oriented `M = 2` lines per sector on a `Z_5` torus: chargeon
/// lines along every plaquette row, fluxon lines along every vertex column.
/// Meant for lattices with four rows and columns, where `2^4 = 1 mod 5`.
pub fn grid_config(lattice: &TorusLattice) -> DefectConfig {
    let mut lines = Vec::new();
    for y in 0..lattice.ly() as i64 {
        let path = (0..=lattice.lx() as i64).map(|x| [x % lattice.lx() as i64, y]).collect();
        lines.push(DefectLine {
            sector: Sector::Chargeon,
            path,
            m: 2,
            orientation: Orientation::Left,
        });
    }
    for x in 0..lattice.lx() as i64 {
        let path = (0..=lattice.ly() as i64).map(|y| [x, y % lattice.ly() as i64]).collect();
        lines.push(DefectLine {
            sector: Sector::Fluxon,
            path,
            m: 2,
            orientation: Orientation::Left,
        });
    }
    DefectConfig { d: 5, lines }
}
