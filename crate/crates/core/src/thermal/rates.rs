//! Single-qudit moves on a Pauli frame and their detailed-balance rates.

use serde::{Deserialize, Serialize};

use crate::defects::Defects;
use crate::error::{Error, Result};
use crate::lattice::{Sector, Syndrome, TorusLattice};
use crate::masses::MassTable;
use crate::qudit::{add_mod, PauliError, QuditStep};
use crate::scalar::ThermalScalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RateKind {
    Metropolis,
    Glauber,
}

/// Rate of a move as a function of its energy change `Δε = ε_after − ε_before`.
///
/// Both kinds satisfy `rate(Δε) / rate(−Δε) = exp(−β Δε)`, so the Gibbs
/// weights `exp(−β ε)` are stationary.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RateModel<F> {
    pub kind: RateKind,
    pub beta: F,
}

impl<F: ThermalScalar> RateModel<F> {
    pub fn new(kind: RateKind, beta: F) -> Result<Self> {
        if !(beta >= F::zero()) || !beta.is_finite() {
            return Err(Error::Config(format!("beta must be finite and non-negative, got {beta:?}")));
        }
        Ok(RateModel { kind, beta })
    }

    pub fn rate(&self, delta: F) -> F {
        let x = self.beta * delta;
        match self.kind {
            RateKind::Metropolis => {
                if x <= F::zero() {
                    F::one()
                } else {
                    (-x).exp()
                }
            }
            // written to avoid overflow for large |x|
            RateKind::Glauber => {
                if x >= F::zero() {
                    let e = (-x).exp();
                    e / (F::one() + e)
                } else {
                    F::one() / (F::one() + x.exp())
                }
            }
        }
    }

    /// Smallest rate over moves whose energy change is at most `delta_max`.
    pub fn gamma_star(&self, delta_max: F) -> F {
        self.rate(delta_max)
    }
}

/// Multiply the frame by `Z^power` (chargeon sector) or `X^power` (fluxon
/// sector) on one qudit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Move {
    pub sector: Sector,
    pub qudit: usize,
    pub power: u32,
}

impl Move {
    pub fn step(&self) -> QuditStep {
        self.sector.step(self.qudit, self.power)
    }
}

/// All `2 · Q · (d−1)` moves: chargeon sector first, then by qudit and power.
pub fn all_moves(lattice: &TorusLattice, d: u32) -> Vec<Move> {
    let mut out = Vec::with_capacity(2 * lattice.num_qudits() * (d as usize - 1));
    for sector in Sector::BOTH {
        for qudit in 0..lattice.num_qudits() {
            for power in 1..d {
                out.push(Move { sector, qudit, power });
            }
        }
    }
    out
}

/// Energy change of `mv` applied to a frame with syndrome `syn`.
pub fn move_delta<F: ThermalScalar>(syn: &Syndrome, mv: Move, lattice: &TorusLattice, m: &MassTable<F>) -> F {
    let d = syn.modulus();
    let e = lattice.ends(mv.sector, mv.qudit);
    let s = syn.sector(mv.sector);
    let (h, t) = (s.get(e.head), s.get(e.tail));
    let dh = m.mass(mv.sector, e.head, add_mod(h, mv.power, d)) - m.mass(mv.sector, e.head, h);
    let dt = m.mass(mv.sector, e.tail, add_mod(t, d - mv.power, d)) - m.mass(mv.sector, e.tail, t);
    dh + dt
}

/// Largest energy change of any single move, from any frame.
pub fn max_move_delta<F: ThermalScalar>(lattice: &TorusLattice, m: &MassTable<F>) -> F {
    let d = m.modulus();
    // the two ends of a move see independent charges, so the worst case
    // is the sum of the worst case at each end
    let rise = |sector: Sector, site: usize, power: u32| -> F {
        let mut best = F::neg_infinity();
        for a in 0..d {
            let v = m.mass(sector, site, add_mod(a, power, d)) - m.mass(sector, site, a);
            if v > best {
                best = v;
            }
        }
        best
    };
    let mut best = F::zero();
    for sector in Sector::BOTH {
        for q in 0..lattice.num_qudits() {
            let e = lattice.ends(sector, q);
            for power in 1..d {
                let v = rise(sector, e.head, power) + rise(sector, e.tail, d - power);
                if v > best {
                    best = v;
                }
            }
        }
    }
    best
}

/// Every single-qudit move out of `frame` with its rate. With defect lines
/// the energies are those of the local charges.
pub fn transition_rates<F: ThermalScalar>(
    frame: &PauliError,
    model: &RateModel<F>,
    m: &MassTable<F>,
    lattice: &TorusLattice,
    defects: Option<&Defects>,
) -> Result<Vec<(QuditStep, F)>> {
    if frame.modulus() != m.modulus() {
        return Err(Error::Dimension("frame and mass table have different moduli".into()));
    }
    let eff;
    let table = match defects {
        Some(df) => {
            eff = df.effective_masses(m);
            &eff
        }
        None => m,
    };
    let syn = lattice.syndrome(frame)?;
    Ok(all_moves(lattice, frame.modulus())
        .into_iter()
        .map(|mv| (mv.step(), model.rate(move_delta(&syn, mv, lattice, table))))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{random_error, stream_rng};

    fn lattice_and_masses() -> (TorusLattice, MassTable<f64>) {
        let l = TorusLattice::new(2, 2).unwrap();
        let m = MassTable::uniform(2, 4, &[0.0, 1.0]).unwrap();
        (l, m)
    }

    #[test]
    fn infinite_temperature_all_one() {
        let (l, m) = lattice_and_masses();
        let model = RateModel::new(RateKind::Metropolis, 0.0).unwrap();
        let p = PauliError::identity(2, 8).unwrap();
        let rates = transition_rates(&p, &model, &m, &l, None).unwrap();
        assert_eq!(rates.len(), 2 * 8);
        assert!(rates.iter().all(|&(_, r)| r == 1.0));
    }

    #[test]
    fn pair_creation_and_hop() {
        let (l, m) = lattice_and_masses();
        let model = RateModel::new(RateKind::Metropolis, 0.7).unwrap();
        let vacuum = PauliError::identity(2, 8).unwrap();
        for (_, r) in transition_rates(&vacuum, &model, &m, &l, None).unwrap() {
            assert!((r - (-1.4f64).exp()).abs() < 1e-15);
        }
        let l = TorusLattice::new(4, 4).unwrap();
        let m = MassTable::uniform(2, 16, &[0.0, 1.0]).unwrap();
        let mut p = PauliError::identity(2, 32).unwrap();
        p.z_mut().set(l.horizontal_edge(1, 1), 1);
        let syn = l.syndrome(&p).unwrap();
        // extend the string by one edge: one anyon hops
        let hop = Move { sector: Sector::Chargeon, qudit: l.horizontal_edge(2, 1), power: 1 };
        assert_eq!(move_delta(&syn, hop, &l, &m), 0.0);
        assert_eq!(model.rate(0.0), 1.0);
        let undo = Move { sector: Sector::Chargeon, qudit: l.horizontal_edge(1, 1), power: 1 };
        assert_eq!(move_delta(&syn, undo, &l, &m), -2.0);
    }

    #[test]
    fn detailed_balance_ratio() {
        for kind in [RateKind::Metropolis, RateKind::Glauber] {
            for beta in [0.0f64, 0.3, 1.0, 2.5] {
                let model = RateModel::new(kind, beta).unwrap();
                for delta in [-3.0f64, -1.0, 0.0, 0.5, 2.0, 7.0] {
                    let ratio = model.rate(delta) / model.rate(-delta);
                    assert!((ratio - (-beta * delta).exp()).abs() < 1e-12 * ratio.max(1.0));
                    assert!(model.rate(delta) > 0.0 && model.rate(delta) <= 1.0);
                }
            }
        }
        assert!(RateModel::new(RateKind::Glauber, -1.0).is_err());
    }

    #[test]
    fn deltas_match_energy_differences() {
        let l = TorusLattice::new(3, 3).unwrap();
        let m: MassTable<f64> = MassTable::uniform(3, 9, &[0.0, 1.0, 2.5]).unwrap();
        let mut rng = stream_rng(5, 0);
        for _ in 0..20 {
            let p = random_error(&mut rng, 3, &l).unwrap();
            let syn = l.syndrome(&p).unwrap();
            let e0 = m.energy(&syn).unwrap();
            for mv in all_moves(&l, 3) {
                let mut q = p.clone();
                q.apply(mv.step());
                let e1 = m.energy(&l.syndrome(&q).unwrap()).unwrap();
                assert!((move_delta(&syn, mv, &l, &m) - (e1 - e0)).abs() < 1e-12);
            }
        }
        // head 1 -> 2 and tail 0 -> 2
        assert_eq!(max_move_delta(&l, &m), 4.0);
    }
}
