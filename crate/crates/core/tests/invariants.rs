use num_complex::Complex64;
use proptest::prelude::*;

use qdouble::barrier::schedule_path;
use qdouble::defects::{grid_config, Defects};
use qdouble::flow::plan_error;
use qdouble::thermal::{RateKind, RateModel};
use qdouble::{MassTable, Multiset, PauliError, Sector, TorusLattice};

type Matrix = Vec<Vec<Complex64>>;

fn matmul(a: &Matrix, b: &Matrix) -> Matrix {
    let n = a.len();
    (0..n)
        .map(|i| (0..n).map(|j| (0..n).map(|k| a[i][k] * b[k][j]).sum()).collect())
        .collect()
}

fn kron(a: &Matrix, b: &Matrix) -> Matrix {
    let (n, m) = (a.len(), b.len());
    let mut out = vec![vec![Complex64::new(0.0, 0.0); n * m]; n * m];
    for i in 0..n {
        for j in 0..n {
            for k in 0..m {
                for l in 0..m {
                    out[i * m + k][j * m + l] = a[i][j] * b[k][l];
                }
            }
        }
    }
    out
}

/// Z^z X^x on one qudit, with Z|j> = w^j |j> and X|j> = |j+1>.
fn single(d: usize, z: u32, x: u32) -> Matrix {
    let w = Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI / d as f64);
    let mut m = vec![vec![Complex64::new(0.0, 0.0); d]; d];
    for j in 0..d {
        let target = (j + x as usize) % d;
        m[target][j] = w.powu((target * z as usize) as u32);
    }
    m
}

fn dense(p: &PauliError) -> Matrix {
    let d = p.modulus() as usize;
    (0..p.num_qudits())
        .map(|q| single(d, p.z().get(q), p.x().get(q)))
        .reduce(|a, b| kron(&a, &b))
        .unwrap()
}

fn close(a: &Matrix, b: &Matrix) -> bool {
    a.iter().flatten().zip(b.iter().flatten()).all(|(x, y)| (x - y).norm() < 1e-9)
}

fn error_strategy(d: u32, n: usize) -> impl Strategy<Value = PauliError> {
    (prop::collection::vec(0..d, n), prop::collection::vec(0..d, n))
        .prop_map(move |(z, x)| PauliError::from_exponents(d, z, x).unwrap())
}

#[test]
fn commutation_phase_matches_dense_matrices() {
    for d in [2u32, 3] {
        let w = Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI / d as f64);
        let all: Vec<PauliError> = (0..d.pow(4))
            .map(|i| {
                let e: Vec<u32> = (0..4).map(|k| i / d.pow(k) % d).collect();
                PauliError::from_exponents(d, vec![e[0], e[1]], vec![e[2], e[3]]).unwrap()
            })
            .collect();
        for p in &all {
            for q in &all {
                let c = p.commutation_exponent(q).unwrap();
                let (mp, mq) = (dense(p), dense(q));
                let rhs: Matrix = matmul(&mq, &mp)
                    .into_iter()
                    .map(|row| row.into_iter().map(|v| v * w.powu(c)).collect())
                    .collect();
                assert!(close(&matmul(&mp, &mq), &rhs), "{p} vs {q}");
            }
        }
    }
}

#[test]
fn stabilizers_are_syndrome_free_and_trivial() {
    let lat = TorusLattice::new(3, 2).unwrap();
    for d in [2u32, 5] {
        for s in 0..lat.n() {
            for op in [lat.star_operator(d, s, 1).unwrap(), lat.plaquette_operator(d, s, d - 1).unwrap()] {
                assert!(lat.syndrome(&op).unwrap().is_zero());
                assert!(lat.logical_class(&op).unwrap().unwrap().is_trivial());
            }
        }
    }
}

fn brute_zero_sum_free(d: u32, items: &[u32]) -> bool {
    (1u32..1 << items.len()).all(|mask| {
        let s: u32 = items.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, &v)| v).sum();
        s % d != 0
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn syndrome_is_additive(p in error_strategy(5, 18), q in error_strategy(5, 18)) {
        let lat = TorusLattice::new(3, 3).unwrap();
        let joint = lat.syndrome(&p.compose(&q).unwrap()).unwrap();
        let sum = lat.syndrome(&p).unwrap().combine(&lat.syndrome(&q).unwrap()).unwrap();
        prop_assert_eq!(joint, sum);
        prop_assert!(lat.syndrome(&p).unwrap().is_neutral());
    }

    #[test]
    fn zero_sum_search_agrees_with_enumeration(d in 2u32..8, items in prop::collection::vec(1u32..8, 0..9)) {
        let items: Vec<u32> = items.into_iter().map(|v| v % d).filter(|&v| v != 0).collect();
        let m = Multiset::from_items(d, items.iter().copied()).unwrap();
        prop_assert_eq!(m.is_zero_sum_free().unwrap(), brute_zero_sum_free(d, &items));
        if let Some(sub) = m.find_zero_sum_subset().unwrap() {
            prop_assert!(sub.cardinality() > 0);
            prop_assert_eq!(sub.sum(), 0);
        }
        if m.is_zero_sum_free().unwrap() {
            prop_assert!(m.cardinality() < d as usize);
            prop_assert!(!m.spectrum().unwrap().contains(&0));
        }
    }

    #[test]
    fn decomposition_recomposes(p in error_strategy(3, 32)) {
        let lat = TorusLattice::new(4, 4).unwrap();
        let plans = plan_error(&p, &lat).unwrap();
        for (plan, sector) in plans.iter().zip(Sector::BOTH) {
            prop_assert_eq!(plan.recompose(), sector.exponents(&p).entries());
        }
    }

    #[test]
    fn constructive_path_reaches_target(p in error_strategy(3, 18)) {
        let lat = TorusLattice::new(3, 3).unwrap();
        let m = MassTable::uniform(3, 9, &[0.0, 1.0, 2.5]).unwrap();
        let path = schedule_path(&p, &lat, &m).unwrap();
        prop_assert!(path.validate().is_ok());
        prop_assert!(path.barrier() <= 2.0 * m.j_max());
    }

    #[test]
    fn defect_relabeling_roundtrips(p in error_strategy(5, 32)) {
        let lat = TorusLattice::new(4, 4).unwrap();
        let defects = Defects::validate(&grid_config(&lat), &lat).unwrap();
        let plain = lat.syndrome(&p).unwrap();
        let local = defects.local_from_plain(&plain).unwrap();
        let (l2, global) = defects.syndrome_with_defects(&p, &lat).unwrap();
        prop_assert_eq!(&local, &l2);
        prop_assert_eq!(&global, &plain);
        prop_assert_eq!(defects.global_from_local(&local).unwrap(), plain);
    }

    #[test]
    fn rates_satisfy_detailed_balance(beta in 0.0f64..4.0, delta in -6.0f64..6.0) {
        for kind in [RateKind::Metropolis, RateKind::Glauber] {
            let r = RateModel::new(kind, beta).unwrap();
            let ratio = r.rate(delta) / r.rate(-delta);
            prop_assert!((ratio - (-beta * delta).exp()).abs() <= 1e-12 * ratio.max(1.0));
        }
    }
}
