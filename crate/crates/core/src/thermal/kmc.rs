//! Continuous-time Monte Carlo on Pauli frames (Gillespie algorithm).

use rand::distributions::Open01;
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::barrier::serialize_display;
use crate::config::SimConfig;
use crate::defects::Defects;
use crate::error::{Error, Result};
use crate::fixtures::stream_rng;
use crate::lattice::{LogicalClass, Sector, Syndrome, TorusLattice};
use crate::masses::MassTable;
use crate::qudit::PauliError;
use crate::scalar::ThermalScalar;

use super::decoder::Decoder;
use super::rates::{all_moves, max_move_delta, move_delta, Move, RateModel};

/// Observables are recorded at this many evenly spaced times.
pub const GRID_POINTS: usize = 200;

/// Moves, energies and rates of the frame dynamics.
#[derive(Debug, Clone)]
pub struct Dynamics<F> {
    lattice: TorusLattice,
    masses: MassTable<F>,
    model: RateModel<F>,
    moves: Vec<Move>,
}

impl<F: ThermalScalar> Dynamics<F> {
    /// With defect lines the mass table is relabeled so that plain
    /// syndromes are priced by their local charges.
    pub fn new(lattice: &TorusLattice, masses: &MassTable<F>, model: RateModel<F>, defects: Option<&Defects>) -> Result<Self> {
        if masses.num_sites() != lattice.n() {
            return Err(Error::Dimension(format!(
                "mass table has {} sites, lattice has {}",
                masses.num_sites(),
                lattice.n()
            )));
        }
        let masses = match defects {
            Some(df) if df.modulus() != masses.modulus() => {
                return Err(Error::Dimension("defects and masses have different moduli".into()))
            }
            Some(df) => df.effective_masses(masses),
            None => masses.clone(),
        };
        RateModel::new(model.kind, model.beta)?;
        Ok(Dynamics {
            lattice: lattice.clone(),
            moves: all_moves(lattice, masses.modulus()),
            masses,
            model,
        })
    }

    pub fn lattice(&self) -> &TorusLattice {
        &self.lattice
    }

    /// Masses indexed by plain (defect-free) charges.
    pub fn masses(&self) -> &MassTable<F> {
        &self.masses
    }

    pub fn model(&self) -> &RateModel<F> {
        &self.model
    }

    pub fn moves(&self) -> &[Move] {
        &self.moves
    }

    pub fn modulus(&self) -> u32 {
        self.masses.modulus()
    }

    /// Smallest rate of any move from any frame.
    pub fn gamma_star(&self) -> F {
        self.model.gamma_star(max_move_delta(&self.lattice, &self.masses))
    }

    fn move_index(&self, sector: Sector, qudit: usize, power: u32) -> usize {
        let per = self.modulus() as usize - 1;
        (sector.index() * self.lattice.num_qudits() + qudit) * per + power as usize - 1
    }

    pub fn rates(&self, syn: &Syndrome) -> Vec<F> {
        self.moves
            .iter()
            .map(|&mv| self.model.rate(move_delta(syn, mv, &self.lattice, &self.masses)))
            .collect()
    }

    /// Apply move `i` to the frame and syndrome and refresh the rates that
    /// changed.
    pub fn apply(&self, i: usize, frame: &mut PauliError, syn: &mut Syndrome, rates: &mut [F]) {
        let mv = self.moves[i];
        let d = self.modulus();
        frame.apply(mv.step());
        let e = self.lattice.ends(mv.sector, mv.qudit);
        let s = syn.sector_mut(mv.sector);
        s.add_at(e.head, mv.power);
        s.add_at(e.tail, d - mv.power);
        for site in [e.head, e.tail] {
            for &(q, _) in self.lattice.site_edges(mv.sector, site) {
                for power in 1..d {
                    let j = self.move_index(mv.sector, q, power);
                    rates[j] = self.model.rate(move_delta(syn, self.moves[j], &self.lattice, &self.masses));
                }
            }
        }
    }
}

/// One Gillespie draw: the chosen move and the waiting time, or `None`
/// when every rate vanishes.
pub fn next_event<R: Rng, F: ThermalScalar>(rng: &mut R, rates: &[F]) -> Option<(usize, f64)> {
    let total: f64 = rates.iter().map(|r| r.to_f64().unwrap_or(0.0)).sum();
    if !(total > 0.0) {
        return None;
    }
    let u: f64 = rng.sample(Open01);
    let wait = -u.ln() / total;
    let target = rng.gen::<f64>() * total;
    let mut acc = 0.0;
    let mut last = 0;
    for (i, r) in rates.iter().enumerate() {
        let r = r.to_f64().unwrap_or(0.0);
        if r > 0.0 {
            acc += r;
            last = i;
            if target < acc {
                return Some((i, wait));
            }
        }
    }
    Some((last, wait))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Event {
    pub time: f64,
    pub qudit: usize,
    pub z: u32,
    pub x: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridSample {
    pub time: f64,
    pub energy: f64,
    pub anyons: usize,
    /// Logical class after decoding.
    pub logical: LogicalClass,
    pub failed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Trajectory {
    pub index: u64,
    pub num_events: u64,
    /// Empty unless events were recorded.
    pub events: Vec<Event>,
    #[serde(serialize_with = "serialize_display")]
    pub final_frame: PauliError,
    pub samples: Vec<GridSample>,
    /// First grid time at which decoding fails.
    pub failure_time: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RunOptions {
    pub record_events: bool,
    /// End the run at the first failed grid sample.
    pub stop_at_failure: bool,
}

impl RunOptions {
    pub fn full() -> Self {
        RunOptions {
            record_events: true,
            stop_at_failure: false,
        }
    }

    pub fn failure_only() -> Self {
        RunOptions {
            record_events: false,
            stop_at_failure: true,
        }
    }
}

/// A configuration prepared for running trajectories.
#[derive(Debug, Clone)]
pub struct Simulation {
    config: SimConfig,
    dynamics: Dynamics<f64>,
    decoder: Decoder,
    grid: Vec<f64>,
}

impl Simulation {
    pub fn new(config: &SimConfig) -> Result<Self> {
        config.validate()?;
        let lattice = config.lattice()?;
        let masses = config.mass_table()?;
        let defects = config.defect_lines(&lattice)?;
        let dynamics = Dynamics::new(&lattice, &masses, config.rate, defects.as_ref())?;
        let decoder = Decoder::new(&lattice, config.d, config.decoder)?;
        let grid = if config.max_time == 0.0 {
            vec![0.0]
        } else {
            (0..GRID_POINTS)
                .map(|i| config.max_time * i as f64 / (GRID_POINTS - 1) as f64)
                .collect()
        };
        Ok(Simulation {
            config: config.clone(),
            dynamics,
            decoder,
            grid,
        })
    }

    pub fn config(&self) -> &SimConfig {
        &self.config
    }

    pub fn dynamics(&self) -> &Dynamics<f64> {
        &self.dynamics
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    /// Trajectory `index`, drawn from its own random stream.
    pub fn run(&self, index: u64, opts: RunOptions) -> Result<Trajectory> {
        let dynamics = &self.dynamics;
        let lattice = dynamics.lattice();
        let d = self.config.d;
        let mut rng = stream_rng(self.config.seed, index);
        let mut frame = PauliError::identity(d, lattice.num_qudits())?;
        let mut syn = Syndrome::zero(d, lattice.n())?;
        let mut rates = dynamics.rates(&syn);
        let mut out = Trajectory {
            index,
            num_events: 0,
            events: Vec::new(),
            final_frame: frame.clone(),
            samples: Vec::with_capacity(self.grid.len()),
            failure_time: None,
        };
        let mut t = 0.0;
        let mut next_grid = 0;
        loop {
            let event = next_event(&mut rng, &rates);
            let t_next = event.map_or(f64::INFINITY, |(_, wait)| t + wait);
            while next_grid < self.grid.len() && self.grid[next_grid] < t_next {
                let time = self.grid[next_grid];
                let logical = self.decoder.decoded_class(&frame, &syn)?;
                let failed = !logical.is_trivial();
                out.samples.push(GridSample {
                    time,
                    energy: dynamics.masses().energy(&syn)?,
                    anyons: syn.anyon_count(),
                    logical,
                    failed,
                });
                if failed && out.failure_time.is_none() {
                    out.failure_time = Some(time);
                    if opts.stop_at_failure {
                        out.final_frame = frame;
                        return Ok(out);
                    }
                }
                next_grid += 1;
            }
            let Some((i, _)) = event else { break };
            if next_grid == self.grid.len() {
                break;
            }
            t = t_next;
            dynamics.apply(i, &mut frame, &mut syn, &mut rates);
            out.num_events += 1;
            if opts.record_events {
                let step = dynamics.moves()[i].step();
                out.events.push(Event {
                    time: t,
                    qudit: step.qudit,
                    z: step.z,
                    x: step.x,
                });
            }
        }
        out.final_frame = frame;
        Ok(out)
    }

    /// All configured trajectories, in index order.
    pub fn run_all(&self, opts: RunOptions) -> Result<Vec<Trajectory>> {
        (0..self.config.trajectories as u64)
            .into_par_iter()
            .map(|i| self.run(i, opts))
            .collect()
    }
}

/// Trajectory 0 of `config`, with its full event log.
pub fn kmc_run(config: &SimConfig) -> Result<Trajectory> {
    Simulation::new(config)?.run(0, RunOptions::full())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::masses::MassSpec;
    use crate::thermal::{DecoderKind, RateKind};

    fn config(beta: f64, max_time: f64) -> SimConfig {
        SimConfig {
            lx: 3,
            ly: 3,
            d: 2,
            masses: MassSpec::uniform(2, vec![0.0, 1.0]),
            defects: None,
            rate: RateModel {
                kind: RateKind::Metropolis,
                beta,
            },
            max_time,
            trajectories: 4,
            seed: 3,
            decoder: DecoderKind::Greedy,
        }
    }

    #[test]
    fn zero_time_is_empty() {
        let t = kmc_run(&config(1.0, 0.0)).unwrap();
        assert!(t.events.is_empty());
        assert!(t.final_frame.is_identity());
        assert_eq!(t.samples.len(), 1);
    }

    #[test]
    fn log_reproduces_frame() {
        let t = kmc_run(&config(0.5, 5.0)).unwrap();
        assert!(!t.events.is_empty());
        assert_eq!(t.samples.len(), GRID_POINTS);
        let mut frame = PauliError::identity(2, 18).unwrap();
        let mut last = 0.0;
        for e in &t.events {
            assert!(e.time > last && e.time <= 5.0);
            last = e.time;
            frame.apply(crate::qudit::QuditStep {
                qudit: e.qudit,
                z: e.z,
                x: e.x,
            });
        }
        assert_eq!(frame, t.final_frame);
        assert_eq!(t.num_events as usize, t.events.len());
    }

    #[test]
    fn deterministic_given_seed() {
        let a = kmc_run(&config(0.5, 5.0)).unwrap();
        let b = kmc_run(&config(0.5, 5.0)).unwrap();
        assert_eq!(a, b);
        let mut other = config(0.5, 5.0);
        other.seed = 4;
        assert_ne!(kmc_run(&other).unwrap().events, a.events);
    }

    #[test]
    fn incremental_rates_stay_exact() {
        let l = TorusLattice::new(3, 4).unwrap();
        let m = MassTable::uniform(3, 12, &[0.0, 1.0, 2.0]).unwrap();
        let dynamics = Dynamics::new(&l, &m, RateModel::new(RateKind::Glauber, 0.8).unwrap(), None).unwrap();
        let mut frame = PauliError::identity(3, l.num_qudits()).unwrap();
        let mut syn = Syndrome::zero(3, l.n()).unwrap();
        let mut rates = dynamics.rates(&syn);
        let mut rng = stream_rng(1, 0);
        for _ in 0..300 {
            let (i, _) = next_event(&mut rng, &rates).unwrap();
            dynamics.apply(i, &mut frame, &mut syn, &mut rates);
            assert_eq!(syn, l.syndrome(&frame).unwrap());
            assert_eq!(rates, dynamics.rates(&syn));
        }
    }

    #[test]
    fn cold_lattice_stays_nearly_empty() {
        let sim = Simulation::new(&config(4.0, 20.0)).unwrap();
        let runs = sim.run_all(RunOptions::full()).unwrap();
        let total: usize = runs.iter().flat_map(|t| t.samples.iter()).map(|s| s.anyons).sum();
        let count: usize = runs.iter().map(|t| t.samples.len()).sum();
        // Gibbs weight of a pair is about 18 * e^-8 per sector
        assert!((total as f64 / count as f64) < 0.1);
    }

    #[test]
    fn frozen_dynamics_never_fails() {
        let mut cfg = config(1.0, 50.0);
        cfg.masses = MassSpec::uniform(2, vec![0.0, 1e6]);
        let t = kmc_run(&cfg).unwrap();
        assert_eq!(t.num_events, 0);
        assert_eq!(t.failure_time, None);
    }

    #[test]
    fn event_frequencies_follow_rates() {
        // three moves with rates 1 : 2 : 3
        let rates = [1.0f64, 2.0, 3.0];
        let mut counts = [0usize; 3];
        let mut rng = stream_rng(9, 0);
        let n = 60_000;
        let mut wait = 0.0;
        for _ in 0..n {
            let (i, w) = next_event(&mut rng, &rates).unwrap();
            counts[i] += 1;
            wait += w;
        }
        let chi2: f64 = counts
            .iter()
            .zip(&rates)
            .map(|(&c, &r)| {
                let e = n as f64 * r / 6.0;
                (c as f64 - e).powi(2) / e
            })
            .sum();
        // 2 degrees of freedom, p = 0.001
        assert!(chi2 < 13.82, "chi2 = {chi2}");
        assert!((wait / n as f64 - 1.0 / 6.0).abs() < 0.005);
        assert_eq!(next_event(&mut rng, &[0.0f64, 0.0]), None);
    }
}
