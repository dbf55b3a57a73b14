//! Explicit numbers for the relaxation-time and mixing-time bounds.

use serde::Serialize;

use crate::error::Result;
use crate::lattice::TorusLattice;
use crate::masses::MassTable;
use crate::scalar::ThermalScalar;

use super::kmc::Dynamics;

/// Every factor of the mixing-time bound, for one configuration.
///
/// * `relaxation_bound = 4 μ̂ / γ* · exp(2 β ε̂)` bounds the inverse gap,
///   with `μ̂ = 8 (d−1) N` the constructive path length and `ε̂ = 2 J_max`
///   the constructive barrier.
/// * `log_factor = β N c₀ + 2 N ln d + 1/2` with `c₀ = J_max` is half the
///   log of the inverse smallest Gibbs weight over `d^{4N}` frames, plus
///   the trace-distance target.
/// * `value = log_factor · relaxation_bound`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ArrheniusBound {
    pub beta: f64,
    pub sites: usize,
    pub mu_hat: f64,
    pub epsilon_hat: f64,
    pub gamma_star: f64,
    pub c0: f64,
    pub exp_factor: f64,
    pub relaxation_bound: f64,
    pub log_factor: f64,
    pub value: f64,
}

impl ArrheniusBound {
    /// Lower bound on the spectral gap: the inverse of `relaxation_bound`.
    pub fn gap_lower_bound(&self) -> f64 {
        1.0 / self.relaxation_bound
    }
}

/// Evaluate the bound for the dynamics `dynamics` (which already carries
/// any defect relabeling; it leaves `J_max` unchanged).
pub fn arrhenius_bound<F: ThermalScalar>(dynamics: &Dynamics<F>) -> Result<ArrheniusBound> {
    let lattice: &TorusLattice = dynamics.lattice();
    let m: &MassTable<F> = dynamics.masses();
    let d = m.modulus() as f64;
    let n = lattice.n() as f64;
    let beta = dynamics.model().beta.to_f64().unwrap_or(f64::NAN);
    let j_max = m.j_max().to_f64().unwrap_or(f64::NAN);
    let gamma_star = dynamics.gamma_star().to_f64().unwrap_or(f64::NAN);
    let mu_hat = 8.0 * (d - 1.0) * n;
    let epsilon_hat = 2.0 * j_max;
    let exp_factor = (2.0 * beta * epsilon_hat).exp();
    let relaxation_bound = 4.0 * mu_hat / gamma_star * exp_factor;
    let c0 = j_max;
    let log_factor = beta * n * c0 + 2.0 * n * d.ln() + 0.5;
    Ok(ArrheniusBound {
        beta,
        sites: lattice.n(),
        mu_hat,
        epsilon_hat,
        gamma_star,
        c0,
        exp_factor,
        relaxation_bound,
        log_factor,
        value: log_factor * relaxation_bound,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::thermal::{RateKind, RateModel};

    fn bound(beta: f64, j: f64) -> ArrheniusBound {
        let l = TorusLattice::new(4, 4).unwrap();
        let m = MassTable::uniform(2, 16, &[0.0, j]).unwrap();
        let dy = Dynamics::new(&l, &m, RateModel::new(RateKind::Metropolis, beta).unwrap(), None).unwrap();
        arrhenius_bound(&dy).unwrap()
    }

    #[test]
    fn infinite_temperature_is_polynomial() {
        let b = bound(0.0, 1.0);
        assert_eq!(b.exp_factor, 1.0);
        assert_eq!(b.gamma_star, 1.0);
        assert_eq!(b.mu_hat, 128.0);
        assert!((b.value - 4.0 * 128.0 * (32.0 * 2f64.ln() + 0.5)).abs() < 1e-9);
    }

    #[test]
    fn exp_factor_at_unit_beta() {
        let b = bound(1.0, 1.0);
        assert!((b.exp_factor - 4f64.exp()).abs() < 1e-12);
        assert!((b.gamma_star - (-2f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn doubling_the_mass() {
        let (a, b) = (bound(0.7, 1.0), bound(0.7, 2.0));
        assert!((b.exp_factor / a.exp_factor - (4.0 * 0.7f64).exp()).abs() < 1e-9);
        assert!(b.value > a.value);
    }
}
