//! Decoders used to turn a Pauli frame into a logical verdict.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fixtures::move_charge;
use crate::lattice::{LogicalClass, Sector, Syndrome, TorusLattice};
use crate::qudit::{neg_mod, DitVector, PauliError};

/// Coset budget of the exhaustive decoder, per sector.
pub const MAX_BRUTE_COSETS: u64 = 1_000_000;

/// Per-qudit error probability ratio used to weight frames in the
/// exhaustive decoder.
pub const BRUTE_LAMBDA: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DecoderKind {
    /// Repeatedly fuse the closest pair of anyons.
    Greedy,
    /// Most likely logical coset, summing `λ^weight` over every stabilizer.
    Brute,
}

#[derive(Debug, Clone)]
pub struct Decoder {
    lattice: TorusLattice,
    d: u32,
    kind: DecoderKind,
}

fn torus_distance(lattice: &TorusLattice, a: usize, b: usize) -> usize {
    let (ax, ay) = lattice.site_coords(a);
    let (bx, by) = lattice.site_coords(b);
    let dx = ax.abs_diff(bx);
    let dy = ay.abs_diff(by);
    dx.min(lattice.lx() - dx) + dy.min(lattice.ly() - dy)
}

impl Decoder {
    pub fn new(lattice: &TorusLattice, d: u32, kind: DecoderKind) -> Result<Self> {
        if kind == DecoderKind::Brute {
            let cosets = (d as u64)
                .checked_pow(lattice.n() as u32 + 1)
                .unwrap_or(u64::MAX);
            if cosets > MAX_BRUTE_COSETS {
                return Err(Error::Size(format!(
                    "exhaustive decoder would weigh {cosets} frames per sector (limit {MAX_BRUTE_COSETS})"
                )));
            }
        }
        Ok(Decoder {
            lattice: lattice.clone(),
            d,
            kind,
        })
    }

    pub fn kind(&self) -> DecoderKind {
        self.kind
    }

    /// An error whose syndrome cancels `syn`.
    pub fn correction(&self, syn: &Syndrome) -> Result<PauliError> {
        if syn.modulus() != self.d {
            return Err(Error::Dimension("syndrome modulus does not match decoder".into()));
        }
        let mut p = self.greedy(syn)?;
        if self.kind == DecoderKind::Brute {
            for sector in Sector::BOTH {
                self.most_likely_coset(&mut p, sector);
            }
        }
        Ok(p)
    }

    /// Logical class of `frame` followed by its correction.
    pub fn decoded_class(&self, frame: &PauliError, syn: &Syndrome) -> Result<LogicalClass> {
        let fixed = frame.compose(&self.correction(syn)?)?;
        Ok(self
            .lattice
            .logical_class(&fixed)?
            .expect("a correction cancels the syndrome"))
    }

    fn greedy(&self, syn: &Syndrome) -> Result<PauliError> {
        let d = self.d;
        let mut p = PauliError::identity(d, self.lattice.num_qudits())?;
        for sector in Sector::BOTH {
            let mut anyons: Vec<(usize, u32)> = syn
                .sector(sector)
                .entries()
                .iter()
                .enumerate()
                .filter(|&(_, &c)| c != 0)
                .map(|(s, &c)| (s, c))
                .collect();
            while anyons.len() > 1 {
                let mut best = (usize::MAX, 0, 0);
                for i in 0..anyons.len() {
                    for j in i + 1..anyons.len() {
                        let dist = torus_distance(&self.lattice, anyons[i].0, anyons[j].0);
                        if dist < best.0 {
                            best = (dist, i, j);
                        }
                    }
                }
                let (_, i, j) = best;
                let (si, ci) = anyons[i];
                // carry the charge of i onto j
                move_charge(&mut p, &self.lattice, sector, anyons[j].0, si, neg_mod(ci, d))?;
                anyons[j].1 = (anyons[j].1 + ci) % d;
                if anyons[j].1 == 0 {
                    anyons.remove(j);
                }
                anyons.remove(i);
            }
            if !anyons.is_empty() {
                return Err(Error::Config(format!("{sector:?} syndrome is not charge neutral")));
            }
        }
        Ok(p)
    }

    /// Replace the sector part of `p` by the representative of its most
    /// likely logical coset.
    fn most_likely_coset(&self, p: &mut PauliError, sector: Sector) {
        let l = &self.lattice;
        let d = self.d;
        let q = l.num_qudits();
        // stabilizers that leave this sector's syndrome untouched
        let generators: Vec<Vec<(usize, u32)>> = (0..l.n() - 1)
            .map(|s| {
                let op = match sector {
                    Sector::Chargeon => l.plaquette_operator(d, s, 1),
                    Sector::Fluxon => l.star_operator(d, s, 1),
                }
                .expect("valid operator");
                let v = sector.exponents(&op);
                (0..q).filter(|&i| v.get(i) != 0).map(|i| (i, v.get(i))).collect()
            })
            .collect();
        let (first, second): (Vec<usize>, Vec<usize>) = match sector {
            Sector::Chargeon => (
                (0..l.lx()).map(|x| l.horizontal_edge(x, 0)).collect(),
                (0..l.ly()).map(|y| l.vertical_edge(0, y)).collect(),
            ),
            Sector::Fluxon => (
                (0..l.lx()).map(|x| l.vertical_edge(x, 0)).collect(),
                (0..l.ly()).map(|y| l.horizontal_edge(0, y)).collect(),
            ),
        };
        let pow: Vec<f64> = (0..=q).map(|k| BRUTE_LAMBDA.powi(k as i32)).collect();
        let base = sector.exponents(p).clone();
        let mut best: Option<(f64, DitVector)> = None;
        for a in 0..d {
            for b in 0..d {
                let mut v = base.clone();
                for &e in &first {
                    v.add_at(e, a);
                }
                for &e in &second {
                    v.add_at(e, b);
                }
                let rep = v.clone();
                let mut weight = v.entries().iter().filter(|&&x| x != 0).count();
                let mut total = 0.0;
                let mut digits = vec![0u32; generators.len()];
                loop {
                    total += pow[weight];
                    // odometer: adding a generator d times is the identity,
                    // so every increment is a single multiplication
                    let mut i = 0;
                    while i < digits.len() {
                        for &(e, k) in &generators[i] {
                            let before = v.get(e) != 0;
                            v.add_at(e, k);
                            let after = v.get(e) != 0;
                            weight = weight + after as usize - before as usize;
                        }
                        digits[i] += 1;
                        if digits[i] < d {
                            break;
                        }
                        digits[i] = 0;
                        i += 1;
                    }
                    if i == digits.len() {
                        break;
                    }
                }
                if best.as_ref().map_or(true, |(w, _)| total > *w) {
                    best = Some((total, rep));
                }
            }
        }
        *sector.exponents_mut(p) = best.expect("at least one coset").1;
    }
}
