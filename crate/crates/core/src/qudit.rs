//! Generalized Pauli operators over Z_d, tracked by exponents only.
//!
//! A Pauli error on `n` qudits is `Z^{z_1} X^{x_1} ⊗ … ⊗ Z^{z_n} X^{x_n}`.
//! Global phases are dropped: composition adds exponents mod `d`, and the
//! only phase information kept is the commutation exponent `c` in
//! `PQ = ω^c QP`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Greatest common divisor.
pub fn gcd(mut a: u32, mut b: u32) -> u32 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

/// Multiplicative inverse of `a` modulo `d`, if it exists.
pub fn inv_mod(a: u32, d: u32) -> Option<u32> {
    let a = a % d;
    if gcd(a, d) != 1 {
        return None;
    }
    // extended Euclid on i64
    let (mut r0, mut r1) = (d as i64, a as i64);
    let (mut t0, mut t1) = (0i64, 1i64);
    while r1 != 0 {
        let q = r0 / r1;
        (r0, r1) = (r1, r0 - q * r1);
        (t0, t1) = (t1, t0 - q * t1);
    }
    Some(t0.rem_euclid(d as i64) as u32)
}

#[inline]
pub fn add_mod(a: u32, b: u32, d: u32) -> u32 {
    ((a as u64 + b as u64) % d as u64) as u32
}

#[inline]
pub fn neg_mod(a: u32, d: u32) -> u32 {
    (d - a % d) % d
}

#[inline]
pub fn mul_mod(a: u32, b: u32, d: u32) -> u32 {
    ((a as u64 * b as u64) % d as u64) as u32
}

fn check_modulus(d: u32) -> Result<()> {
    if d < 2 {
        return Err(Error::Size(format!("modulus must be at least 2, got {d}")));
    }
    Ok(())
}

/// Fixed-length vector of residues in Z_d.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DitVector {
    d: u32,
    entries: Vec<u32>,
}

impl DitVector {
    pub fn zeros(d: u32, len: usize) -> Result<Self> {
        check_modulus(d)?;
        Ok(DitVector {
            d,
            entries: vec![0; len],
        })
    }

    /// Builds a vector, reducing every entry mod `d`.
    pub fn from_residues(d: u32, entries: impl IntoIterator<Item = u32>) -> Result<Self> {
        check_modulus(d)?;
        Ok(DitVector {
            d,
            entries: entries.into_iter().map(|e| e % d).collect(),
        })
    }

    /// Builds a vector from signed integers, reducing each mod `d`.
    pub fn from_signed(d: u32, entries: impl IntoIterator<Item = i64>) -> Result<Self> {
        check_modulus(d)?;
        Ok(DitVector {
            d,
            entries: entries
                .into_iter()
                .map(|e| e.rem_euclid(d as i64) as u32)
                .collect(),
        })
    }

    pub fn modulus(&self) -> u32 {
        self.d
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[u32] {
        &self.entries
    }

    pub fn get(&self, i: usize) -> u32 {
        self.entries[i]
    }

    pub fn set(&mut self, i: usize, value: u32) {
        self.entries[i] = value % self.d;
    }

    /// Adds `value` (mod d) to entry `i`.
    pub fn add_at(&mut self, i: usize, value: u32) {
        self.entries[i] = add_mod(self.entries[i], value % self.d, self.d);
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(|&e| e == 0)
    }

    /// Sum of all entries mod d.
    pub fn total(&self) -> u32 {
        self.entries
            .iter()
            .fold(0, |acc, &e| add_mod(acc, e, self.d))
    }

    fn check_compatible(&self, other: &Self) -> Result<()> {
        if self.d != other.d {
            return Err(Error::Dimension(format!(
                "moduli differ: {} vs {}",
                self.d, other.d
            )));
        }
        if self.entries.len() != other.entries.len() {
            return Err(Error::Dimension(format!(
                "lengths differ: {} vs {}",
                self.entries.len(),
                other.entries.len()
            )));
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        let d = self.d;
        Ok(DitVector {
            d,
            entries: self
                .entries
                .iter()
                .zip(&other.entries)
                .map(|(&a, &b)| add_mod(a, b, d))
                .collect(),
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        let d = self.d;
        DitVector {
            d,
            entries: self.entries.iter().map(|&a| neg_mod(a, d)).collect(),
        }
    }

    /// Entrywise product with another vector of the same shape.
    pub fn hadamard(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        let d = self.d;
        Ok(DitVector {
            d,
            entries: self
                .entries
                .iter()
                .zip(&other.entries)
                .map(|(&a, &b)| mul_mod(a, b, d))
                .collect(),
        })
    }
}

/// One factor of a single-qudit factorization: `Z^z X^x` on `qudit`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct QuditStep {
    pub qudit: usize,
    pub z: u32,
    pub x: u32,
}

/// Phase-free generalized Pauli operator.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PauliError {
    z: DitVector,
    x: DitVector,
}

impl PauliError {
    pub fn identity(d: u32, num_qudits: usize) -> Result<Self> {
        Ok(PauliError {
            z: DitVector::zeros(d, num_qudits)?,
            x: DitVector::zeros(d, num_qudits)?,
        })
    }

    pub fn new(z: DitVector, x: DitVector) -> Result<Self> {
        z.check_compatible(&x)?;
        Ok(PauliError { z, x })
    }

    pub fn from_exponents(d: u32, z: Vec<u32>, x: Vec<u32>) -> Result<Self> {
        Self::new(DitVector::from_residues(d, z)?, DitVector::from_residues(d, x)?)
    }

    /// Single-qudit operator `Z^z X^x` on `qudit`, identity elsewhere.
    pub fn single(d: u32, num_qudits: usize, step: QuditStep) -> Result<Self> {
        if step.qudit >= num_qudits {
            return Err(Error::Dimension(format!(
                "qudit {} out of range for {num_qudits} qudits",
                step.qudit
            )));
        }
        let mut p = Self::identity(d, num_qudits)?;
        p.z.set(step.qudit, step.z);
        p.x.set(step.qudit, step.x);
        Ok(p)
    }

    pub fn modulus(&self) -> u32 {
        self.z.d
    }

    pub fn num_qudits(&self) -> usize {
        self.z.len()
    }

    pub fn z(&self) -> &DitVector {
        &self.z
    }

    pub fn x(&self) -> &DitVector {
        &self.x
    }

    pub fn z_mut(&mut self) -> &mut DitVector {
        &mut self.z
    }

    pub fn x_mut(&mut self) -> &mut DitVector {
        &mut self.x
    }

    pub fn is_identity(&self) -> bool {
        self.z.is_zero() && self.x.is_zero()
    }

    /// Qudits on which the operator acts non-trivially, ascending.
    pub fn support(&self) -> Vec<usize> {
        (0..self.num_qudits())
            .filter(|&q| self.z.get(q) != 0 || self.x.get(q) != 0)
            .collect()
    }

    pub fn weight(&self) -> usize {
        self.support().len()
    }

    pub fn compose(&self, other: &Self) -> Result<Self> {
        Ok(PauliError {
            z: self.z.add(&other.z)?,
            x: self.x.add(&other.x)?,
        })
    }

    /// In-place composition with a single-qudit factor.
    pub fn apply(&mut self, step: QuditStep) {
        self.z.add_at(step.qudit, step.z);
        self.x.add_at(step.qudit, step.x);
    }

    pub fn inverse(&self) -> Self {
        PauliError {
            z: self.z.neg(),
            x: self.x.neg(),
        }
    }

    /// `c` with `PQ = ω^c QP`.
    pub fn commutation_exponent(&self, other: &Self) -> Result<u32> {
        self.z.check_compatible(&other.z)?;
        let d = self.modulus() as u64;
        let mut acc: u64 = 0;
        for q in 0..self.num_qudits() {
            let pz = self.z.get(q) as u64;
            let px = self.x.get(q) as u64;
            let qz = other.z.get(q) as u64;
            let qx = other.x.get(q) as u64;
            acc = (acc + pz * qx % d + (d - px * qz % d)) % d;
        }
        Ok(acc as u32)
    }

    /// Ordered single-qudit factors whose product is `self`. Z and X parts of
    /// the same qudit are emitted as separate factors, Z first.
    pub fn single_qudit_factorization(&self) -> Vec<QuditStep> {
        let mut steps = Vec::new();
        for q in 0..self.num_qudits() {
            let z = self.z.get(q);
            let x = self.x.get(q);
            if z != 0 {
                steps.push(QuditStep { qudit: q, z, x: 0 });
            }
            if x != 0 {
                steps.push(QuditStep { qudit: q, z: 0, x });
            }
        }
        steps
    }
}

impl fmt::Display for PauliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let join = |v: &DitVector| {
            v.entries()
                .iter()
                .map(|e| e.to_string())
                .collect::<Vec<_>>()
                .join(",")
        };
        write!(f, "d={};Z={};X={}", self.modulus(), join(&self.z), join(&self.x))
    }
}

impl FromStr for PauliError {
    type Err = Error;

    /// Parses `d=<d>;Z=<e,e,…>;X=<e,e,…>`.
    fn from_str(s: &str) -> Result<Self> {
        let mut d = None;
        let mut z = None;
        let mut x = None;
        for part in s.trim().split(';') {
            let part = part.trim();
            if part.is_empty() {
                continue;
            }
            let (key, value) = part
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("expected key=value, got {part:?}")))?;
            let parse_list = |v: &str| -> Result<Vec<i64>> {
                if v.trim().is_empty() {
                    return Ok(Vec::new());
                }
                v.split(',')
                    .map(|t| {
                        t.trim()
                            .parse::<i64>()
                            .map_err(|e| Error::Parse(format!("bad exponent {t:?}: {e}")))
                    })
                    .collect()
            };
            match key.trim() {
                "d" => {
                    d = Some(value.trim().parse::<u32>().map_err(|e| {
                        Error::Parse(format!("bad modulus {value:?}: {e}"))
                    })?)
                }
                "Z" => z = Some(parse_list(value)?),
                "X" => x = Some(parse_list(value)?),
                other => return Err(Error::Parse(format!("unknown key {other:?}"))),
            }
        }
        let d = d.ok_or_else(|| Error::Parse("missing d=".into()))?;
        let z = z.ok_or_else(|| Error::Parse("missing Z=".into()))?;
        let x = x.ok_or_else(|| Error::Parse("missing X=".into()))?;
        PauliError::new(DitVector::from_signed(d, z)?, DitVector::from_signed(d, x)?)
    }
}
