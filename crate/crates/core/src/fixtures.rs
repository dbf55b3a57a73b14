//! Error generators: random errors and hand-built hard cases (logical
//! strings, dense loop soups, many-leaf trees).

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::flow::SectorGeometry;
use crate::lattice::{Sector, TorusLattice};
use crate::qudit::{neg_mod, PauliError};

/// Independent RNG stream `stream` of `seed`.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Random error: a density is drawn first, then every Z and X exponent is
/// nonzero with that probability.
pub fn random_error<R: Rng>(rng: &mut R, d: u32, lattice: &TorusLattice) -> Result<PauliError> {
    const DENSITIES: [f64; 5] = [0.05, 0.15, 0.3, 0.6, 1.0];
    let p = DENSITIES[rng.gen_range(0..DENSITIES.len())];
    let n = lattice.num_qudits();
    let draw = |rng: &mut R| -> Vec<u32> {
        (0..n)
            .map(|_| if rng.gen_bool(p) { rng.gen_range(1..d) } else { 0 })
            .collect()
    };
    let z = draw(rng);
    let x = draw(rng);
    PauliError::from_exponents(d, z, x)
}

/// Random error supported on at most `max_support` qudits.
pub fn random_sparse_error<R: Rng>(rng: &mut R, d: u32, lattice: &TorusLattice, max_support: usize) -> Result<PauliError> {
    let n = lattice.num_qudits();
    let mut p = PauliError::identity(d, n)?;
    let k = rng.gen_range(1..=max_support.min(n));
    let mut qudits: Vec<usize> = (0..n).collect();
    for i in 0..k {
        let j = rng.gen_range(i..n);
        qudits.swap(i, j);
    }
    for &q in &qudits[..k] {
        loop {
            let (z, x) = (rng.gen_range(0..d), rng.gen_range(0..d));
            if z != 0 || x != 0 {
                p.z_mut().set(q, z);
                p.x_mut().set(q, x);
                break;
            }
        }
    }
    Ok(p)
}

/// Add to `p` the exponents that move charge `k` from `from` to `to` along
/// a shortest path of the sector's movement graph.
pub fn move_charge(p: &mut PauliError, lattice: &TorusLattice, sector: Sector, from: usize, to: usize, k: u32) -> Result<()> {
    let d = p.modulus();
    let geom = SectorGeometry::new(lattice, sector, d)?;
    let path = geom
        .bfs_path(from, to, usize::MAX, |_, _| true)
        .expect("the torus is connected");
    for t in path {
        let e = if t.forward { k % d } else { neg_mod(k, d) };
        sector.exponents_mut(p).add_at(t.qudit, e);
    }
    Ok(())
}

/// Logical strings of every charge and both orientations in both sectors.
pub fn logical_errors(lattice: &TorusLattice, d: u32) -> Result<Vec<PauliError>> {
    let n = lattice.num_qudits();
    let mut out = Vec::new();
    for k in 1..d {
        let mut zh = PauliError::identity(d, n)?;
        let mut zv = zh.clone();
        let mut xh = zh.clone();
        let mut xv = zh.clone();
        for x in 0..lattice.lx() {
            zh.z_mut().set(lattice.horizontal_edge(x, 0), k);
            xh.x_mut().set(lattice.vertical_edge(x, lattice.ly() / 2), k);
        }
        for y in 0..lattice.ly() {
            zv.z_mut().set(lattice.vertical_edge(lattice.lx() / 2, y), k);
            xv.x_mut().set(lattice.horizontal_edge(0, y), k);
        }
        let all = zh.compose(&zv)?.compose(&xh)?.compose(&xv)?;
        out.extend([zh, zv, xh, xv, all]);
    }
    Ok(out)
}

/// Products of random powers of every star and plaquette operator, plus a
/// winding string on top of one of them.
pub fn dense_loop_errors(lattice: &TorusLattice, d: u32, seed: u64) -> Result<Vec<PauliError>> {
    let mut rng = stream_rng(seed, u64::MAX);
    let n = lattice.num_qudits();
    let mut out = Vec::new();
    for round in 0..4 {
        let mut p = PauliError::identity(d, n)?;
        for s in 0..lattice.n() {
            let a = if round == 0 { 1 + (s as u32 % (d - 1)) } else { rng.gen_range(0..d) };
            let b = rng.gen_range(0..d);
            p = p.compose(&lattice.star_operator(d, s, a)?)?;
            p = p.compose(&lattice.plaquette_operator(d, s, b)?)?;
        }
        out.push(p.clone());
        let logical = &logical_errors(lattice, d)?[4];
        out.push(p.compose(logical)?);
    }
    Ok(out)
}

/// Trees in each sector: `d-1` leaves hanging off one site, and a bushier
/// tree with a leaf on every site at distance two.
pub fn tree_errors(lattice: &TorusLattice, d: u32, seed: u64) -> Result<Vec<PauliError>> {
    let mut rng = stream_rng(seed, u64::MAX - 1);
    let n = lattice.num_qudits();
    let sites = lattice.n();
    let mut out = Vec::new();
    for sector in Sector::BOTH {
        for center in [0, sites / 2] {
            let (cx, cy) = lattice.site_coords(center);
            // d-1 leaves at increasing distance, all charge 1
            let mut p = PauliError::identity(d, n)?;
            for i in 0..(d as usize - 1) {
                let leaf = lattice.site_index(cx + 1 + i % lattice.lx(), cy + i / 2 + 1);
                if leaf != center {
                    move_charge(&mut p, lattice, sector, center, leaf, 1)?;
                }
            }
            out.push(p);
            // every site at distance two carries a random charge
            let mut p = PauliError::identity(d, n)?;
            let mut leaves: Vec<usize> = Vec::new();
            for (dx, dy) in [(2i64, 0i64), (-2, 0), (0, 2), (0, -2), (1, 1), (1, -1), (-1, 1), (-1, -1)] {
                let x = (cx as i64 + dx).rem_euclid(lattice.lx() as i64) as usize;
                let y = (cy as i64 + dy).rem_euclid(lattice.ly() as i64) as usize;
                let s = lattice.site_index(x, y);
                if s != center && !leaves.contains(&s) {
                    leaves.push(s);
                }
            }
            for leaf in leaves {
                move_charge(&mut p, lattice, sector, center, leaf, rng.gen_range(1..d))?;
            }
            out.push(p);
        }
    }
    Ok(out)
}

/// All hand-built fixtures for a lattice and modulus.
pub fn adversarial_errors(lattice: &TorusLattice, d: u32, seed: u64) -> Result<Vec<PauliError>> {
    let mut out = logical_errors(lattice, d)?;
    out.extend(dense_loop_errors(lattice, d, seed)?);
    out.extend(tree_errors(lattice, d, seed)?);
    // trees and loops at once
    let trees = tree_errors(lattice, d, seed ^ 1)?;
    let loops = dense_loop_errors(lattice, d, seed ^ 2)?;
    for (t, l) in trees.iter().zip(&loops) {
        out.push(t.compose(l)?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn logicals_are_syndrome_free() {
        let l = TorusLattice::new(4, 3).unwrap();
        for p in logical_errors(&l, 3).unwrap() {
            let c = l.logical_class(&p).unwrap().expect("logical");
            assert!(!c.is_trivial());
        }
        for p in dense_loop_errors(&l, 3, 0).unwrap() {
            assert!(l.syndrome(&p).unwrap().is_zero());
        }
    }

    #[test]
    fn move_charge_makes_a_pair() {
        let l = TorusLattice::new(5, 5).unwrap();
        for sector in Sector::BOTH {
            let mut p = PauliError::identity(5, l.num_qudits()).unwrap();
            move_charge(&mut p, &l, sector, 0, 12, 2).unwrap();
            let s = l.syndrome(&p).unwrap();
            let syn = s.sector(sector);
            assert_eq!((syn.get(0), syn.get(12)), (3, 2));
            assert_eq!(s.anyon_count(), 2);
        }
    }

    #[test]
    fn streams_differ() {
        let a: u64 = stream_rng(1, 0).gen();
        let b: u64 = stream_rng(1, 1).gen();
        let c: u64 = stream_rng(1, 0).gen();
        assert_ne!(a, b);
        assert_eq!(a, c);
    }
}
