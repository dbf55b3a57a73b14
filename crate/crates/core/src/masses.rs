//! Excitation energies and the Hamiltonian gap.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{Sector, Syndrome, TorusLattice};
use crate::scalar::Energy;

/// Per-site, per-charge excitation energies `J_s^k`, with `J_s^0 = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct MassTable<E> {
    d: u32,
    n: usize,
    // [sector][site * d + k]
    values: [Vec<E>; 2],
}

impl<E: Energy> MassTable<E> {
    /// Build from explicit per-site rows. Each row has `d` entries.
    pub fn new(d: u32, vertex: Vec<Vec<E>>, plaquette: Vec<Vec<E>>) -> Result<Self> {
        if d < 2 {
            return Err(Error::Dimension(format!("modulus must be at least 2, got {d}")));
        }
        if vertex.len() != plaquette.len() {
            return Err(Error::Dimension(format!(
                "{} vertex rows but {} plaquette rows",
                vertex.len(),
                plaquette.len()
            )));
        }
        let n = vertex.len();
        let flatten = |rows: Vec<Vec<E>>, what: &str| -> Result<Vec<E>> {
            let mut flat = Vec::with_capacity(n * d as usize);
            for (s, row) in rows.into_iter().enumerate() {
                check_row(d, &row, &format!("{what} {s}"))?;
                flat.extend(row);
            }
            Ok(flat)
        };
        Ok(MassTable {
            d,
            n,
            values: [flatten(vertex, "vertex")?, flatten(plaquette, "plaquette")?],
        })
    }

    /// Same row at every vertex and plaquette.
    pub fn uniform(d: u32, n: usize, row: &[E]) -> Result<Self> {
        Self::new(d, vec![row.to_vec(); n], vec![row.to_vec(); n])
    }

    pub fn modulus(&self) -> u32 {
        self.d
    }

    /// Number of sites per sector.
    pub fn num_sites(&self) -> usize {
        self.n
    }

    pub fn mass(&self, sector: Sector, site: usize, charge: u32) -> E {
        self.values[sector.index()][site * self.d as usize + charge as usize]
    }

    pub fn row(&self, sector: Sector, site: usize) -> &[E] {
        let d = self.d as usize;
        &self.values[sector.index()][site * d..(site + 1) * d]
    }

    pub fn j_max(&self) -> E {
        self.values
            .iter()
            .flatten()
            .fold(E::zero(), |acc, &v| acc.max_of(v))
    }

    pub fn is_all_zero(&self) -> bool {
        self.values.iter().flatten().all(|v| v.is_zero())
    }

    /// Apply `f` to every entry. `f(0)` must be `0`.
    pub fn map<F: Energy>(&self, f: impl Fn(E) -> F) -> MassTable<F> {
        MassTable {
            d: self.d,
            n: self.n,
            values: [
                self.values[0].iter().map(|&v| f(v)).collect(),
                self.values[1].iter().map(|&v| f(v)).collect(),
            ],
        }
    }

    pub fn scaled(&self, c: E) -> Self {
        self.map(|v| v * c)
    }

    /// Table whose entry at `(s, k)` is the original entry at `(s, label(s)·k)`.
    pub fn relabeled(&self, sector: Sector, labels: &[u32]) -> Self {
        let mut out = self.clone();
        let d = self.d as usize;
        for (s, &l) in labels.iter().enumerate() {
            for k in 0..d {
                let src = (l as usize * k) % d;
                out.values[sector.index()][s * d + k] = self.values[sector.index()][s * d + src];
            }
        }
        out
    }

    fn check_syndrome(&self, s: &Syndrome) -> Result<()> {
        if s.modulus() != self.d || s.a.len() != self.n || s.b.len() != self.n {
            return Err(Error::Dimension(format!(
                "syndrome (d={}, {} sites) does not match mass table (d={}, {} sites)",
                s.modulus(),
                s.a.len(),
                self.d,
                self.n
            )));
        }
        Ok(())
    }

    /// `Σ_v J_v^{a_v} + Σ_p J_p^{b_p}`.
    pub fn energy(&self, s: &Syndrome) -> Result<E> {
        self.check_syndrome(s)?;
        let mut total = E::zero();
        for sector in Sector::BOTH {
            for (site, &c) in s.sector(sector).entries().iter().enumerate() {
                total = total + self.mass(sector, site, c);
            }
        }
        Ok(total)
    }

    /// Energy of the syndrome restricted to a subset of sites of one sector.
    pub fn site_energy(&self, sector: Sector, site: usize, charge: u32) -> E {
        self.mass(sector, site, charge)
    }

    /// Lowest energy of a nonzero, charge-neutral syndrome.
    ///
    /// Each sector is handled by a dynamic program over sites tracking the
    /// running total charge, so excitations of three or more anyons are
    /// covered as well as pairs.
    pub fn hamiltonian_gap(&self, lattice: &TorusLattice) -> Result<E> {
        if self.is_all_zero() {
            return Err(Error::DegenerateHamiltonian);
        }
        if lattice.n() != self.n {
            return Err(Error::Dimension(format!(
                "lattice has {} sites, mass table {}",
                lattice.n(),
                self.n
            )));
        }
        let d = self.d as usize;
        let mut best: Option<E> = None;
        for sector in Sector::BOTH {
            // nz[t]: cheapest assignment so far with at least one nonzero
            // charge and total t
            let mut nz: Vec<Option<E>> = vec![None; d];
            for site in 0..self.n {
                let row = self.row(sector, site);
                let mut next = nz.clone();
                for (t, slot) in next.iter_mut().enumerate() {
                    let mut cand = *slot;
                    for (k, &jk) in row.iter().enumerate().skip(1) {
                        let from = (t + d - k) % d;
                        if let Some(prev) = nz[from] {
                            cand = min_opt(cand, prev + jk);
                        }
                    }
                    if t != 0 {
                        cand = min_opt(cand, row[t]);
                    }
                    *slot = cand;
                }
                nz = next;
            }
            if let Some(g) = nz[0] {
                best = min_opt(best, g);
            }
        }
        best.ok_or(Error::DegenerateHamiltonian)
    }
}

fn min_opt<E: Energy>(a: Option<E>, b: E) -> Option<E> {
    Some(match a {
        Some(a) => a.min_of(b),
        None => b,
    })
}

fn check_row<E: Energy>(d: u32, row: &[E], what: &str) -> Result<()> {
    if row.len() != d as usize {
        return Err(Error::Dimension(format!(
            "{what}: expected {d} masses, got {}",
            row.len()
        )));
    }
    if !row[0].is_zero() {
        return Err(Error::Parse(format!("{what}: J^0 must be 0, got {:?}", row[0])));
    }
    if let Some(bad) = row.iter().find(|&&v| v < E::zero() || v != v) {
        return Err(Error::Parse(format!("{what}: masses must be nonnegative, got {bad:?}")));
    }
    Ok(())
}

/// Masses for one sector in file form: a default row plus per-site overrides.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SiteMasses {
    pub default: Vec<f64>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub overrides: BTreeMap<String, Vec<f64>>,
}

/// JSON form of a mass table. Plaquette masses default to the vertex ones.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MassSpec {
    pub d: u32,
    pub vertex_masses: SiteMasses,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub plaquette_masses: Option<SiteMasses>,
}

impl MassSpec {
    pub fn uniform(d: u32, row: Vec<f64>) -> Self {
        MassSpec {
            d,
            vertex_masses: SiteMasses {
                default: row,
                overrides: BTreeMap::new(),
            },
            plaquette_masses: None,
        }
    }

    pub fn to_table(&self, n: usize) -> Result<MassTable<f64>> {
        let expand = |m: &SiteMasses, what: &str| -> Result<Vec<Vec<f64>>> {
            let mut rows = vec![m.default.clone(); n];
            for (key, row) in &m.overrides {
                let site: usize = key
                    .parse()
                    .map_err(|_| Error::Parse(format!("{what} override key {key:?} is not a site index")))?;
                if site >= n {
                    return Err(Error::Dimension(format!(
                        "{what} override for site {site}, lattice has {n} sites"
                    )));
                }
                rows[site] = row.clone();
            }
            Ok(rows)
        };
        let vertex = expand(&self.vertex_masses, "vertex")?;
        let plaquette = expand(
            self.plaquette_masses.as_ref().unwrap_or(&self.vertex_masses),
            "plaquette",
        )?;
        MassTable::new(self.d, vertex, plaquette)
    }
}
