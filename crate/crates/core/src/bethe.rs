//! Two-magnon Bethe states of the J2 = 0 chain.
//!
//! Roots (k1, k2) solve the coupled quantization conditions
//!
//!   k1 = (2π I1 - θ(k1, k2)) / N,   k2 = (2π I2 + θ(k1, k2)) / N,
//!
//! by damped fixed-point iteration on θ, so k1 + k2 = 2π (I1 + I2) / N holds
//! exactly at every step. Two scattering phases are provided:
//!
//! - [`solve_bethe_roots`] uses the XXZ-style phase
//!   θ = 2 arctan[Δ sin(δ/2) / (cos(K/2) - Δ cos(δ/2))] with a caller-supplied
//!   anisotropy Δ (δ = k1 - k2, K = k1 + k2);
//! - [`solve_bethe_roots_chiral`] uses the phase of the chiral chain itself,
//!   θ = wrap(2 atan2(J1 sin(δ/2), J1' cos(K/2 + ψ) - J1 cos(δ/2)) - π) with
//!   J1' = √(J1² + D̃²) and ψ = atan2(D̃, J1), derived from the two-flip
//!   contact condition. With this phase the amplitudes of [`bethe_state`] are
//!   exact eigenvectors of `build_sector_hamiltonian(J2 = 0)`, which the
//!   chain tests verify component by component.
//!
//! Bound (string) pairs have complex momenta and are outside the real-k
//! ansatz; the solver reports them as `NonConvergence`.

use crate::chain::pair_basis;
use crate::error::{Error, Result};
use crate::C64;
use std::f64::consts::PI;

const MAX_ITERS: usize = 10_000;
const DAMPING: f64 = 0.5;
const STEP_TOL: f64 = 1e-12;
const RESIDUAL_TOL: f64 = 1e-10;

/// A converged real-momentum root pair.
#[derive(Debug, Clone, Copy)]
pub struct BetheRoots {
    /// Chain length N.
    pub sites: usize,
    pub i1: i64,
    pub i2: i64,
    pub k1: f64,
    pub k2: f64,
    /// Two-body phase θ(k1, k2).
    pub theta: f64,
    /// Max absolute violation of the two quantization equations.
    pub residual: f64,
}

impl BetheRoots {
    pub fn total_momentum(&self) -> f64 {
        self.k1 + self.k2
    }
}

fn wrap_angle(x: f64) -> f64 {
    let mut y = (x + PI).rem_euclid(2.0 * PI) - PI;
    if y <= -PI {
        y += 2.0 * PI;
    }
    y
}

/// XXZ-style phase with explicit anisotropy.
pub fn xxz_phase(delta: f64, k1: f64, k2: f64) -> f64 {
    let half = (k1 - k2) / 2.0;
    2.0 * (delta * half.sin()).atan2(((k1 + k2) / 2.0).cos() - delta * half.cos())
}

/// Scattering phase of the chiral chain (J2 = 0) with signed DM constant.
pub fn chiral_phase(j1: f64, dm: f64, k1: f64, k2: f64) -> f64 {
    let j1p = j1.hypot(dm);
    let psi = dm.atan2(j1);
    let half = (k1 - k2) / 2.0;
    let raw = (j1 * half.sin()).atan2(j1p * ((k1 + k2) / 2.0 + psi).cos() - j1 * half.cos());
    wrap_angle(2.0 * raw - PI)
}

fn solve_fixed_point<F>(n: usize, i1: i64, i2: i64, phase: F) -> Result<BetheRoots>
where
    F: Fn(f64, f64) -> f64,
{
    let nf = n as f64;
    let momenta = |theta: f64| {
        (
            (2.0 * PI * i1 as f64 - theta) / nf,
            (2.0 * PI * i2 as f64 + theta) / nf,
        )
    };
    let mut theta = 0.0;
    for _ in 0..MAX_ITERS {
        let (k1, k2) = momenta(theta);
        let mut target = phase(k1, k2);
        // Track the branch closest to the current iterate.
        target += 2.0 * PI * ((theta - target) / (2.0 * PI)).round();
        let next = (1.0 - DAMPING) * theta + DAMPING * target;
        let step = (next - theta).abs();
        theta = next;
        if step < STEP_TOL {
            break;
        }
    }
    let (k1, k2) = momenta(theta);
    // Re-evaluate on the 2π branch the iterate settled on.
    let mut th = phase(k1, k2);
    th += 2.0 * PI * ((theta - th) / (2.0 * PI)).round();
    let r1 = (k1 - (2.0 * PI * i1 as f64 - th) / nf).abs();
    let r2 = (k2 - (2.0 * PI * i2 as f64 + th) / nf).abs();
    let residual = r1.max(r2);
    if residual > RESIDUAL_TOL {
        return Err(Error::NonConvergence { i1, i2, residual });
    }
    Ok(BetheRoots { sites: n, i1, i2, k1, k2, theta: th, residual })
}

/// Solves the quantization equations with the XXZ-style phase and the given
/// anisotropy. Quantum numbers must satisfy 1 ≤ I1, I2 ≤ N-1 and I1 ≠ I2.
pub fn solve_bethe_roots(n: usize, i1: i64, i2: i64, delta: f64) -> Result<BetheRoots> {
    if n < 4 {
        return Err(Error::InvalidParams(format!("need N ≥ 4, got {n}")));
    }
    let max = n as i64 - 1;
    if i1 < 1 || i1 > max || i2 < 1 || i2 > max {
        return Err(Error::InvalidParams(format!(
            "quantum numbers must lie in [1, {max}], got ({i1}, {i2})"
        )));
    }
    if i1 == i2 {
        return Err(Error::InvalidParams(format!(
            "coincident quantum numbers I1 = I2 = {i1} are rejected"
        )));
    }
    solve_fixed_point(n, i1, i2, |k1, k2| xxz_phase(delta, k1, k2))
}

/// Solves the quantization equations with the exact chiral phase. `dm` is the
/// branch-signed DM constant. Quantum numbers may include 0 here; the full
/// enumeration walks 0 ≤ I1 ≤ I2 ≤ N-1.
pub fn solve_bethe_roots_chiral(n: usize, i1: i64, i2: i64, j1: f64, dm: f64) -> Result<BetheRoots> {
    if n < 4 {
        return Err(Error::InvalidParams(format!("need N ≥ 4, got {n}")));
    }
    solve_fixed_point(n, i1, i2, |k1, k2| chiral_phase(j1, dm, k1, k2))
}

/// Normalized amplitudes f[j, j'] over the lexicographic pair basis:
/// f(j, j') = e^{i(k1 j + k2 j' - θ/2)} + e^{i(k2 j + k1 j' + θ/2)}, j < j'.
/// (Equivalent to the textbook form under the θ ↦ -θ relabeling of the two
/// momenta.) Returns an error if the amplitudes cancel identically.
pub fn bethe_state(roots: &BetheRoots) -> Result<Vec<C64>> {
    let n = roots.sites;
    let (k1, k2, th) = (roots.k1, roots.k2, roots.theta);
    let mut f: Vec<C64> = pair_basis(n)
        .into_iter()
        .map(|(a, b)| {
            let (j, jp) = (a as f64, b as f64);
            C64::new(0.0, k1 * j + k2 * jp - th / 2.0).exp()
                + C64::new(0.0, k2 * j + k1 * jp + th / 2.0).exp()
        })
        .collect();
    let norm: f64 = f.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    if norm < 1e-8 {
        return Err(Error::InvalidState(format!(
            "Bethe amplitudes vanish for (I1, I2) = ({}, {})",
            roots.i1, roots.i2
        )));
    }
    f.iter_mut().for_each(|c| *c /= norm);
    Ok(f)
}

/// Two-magnon energy of the chiral chain for a converged root pair:
/// ε(k1) + ε(k2) + J1 (N - 8)/4 with ε(k) = J1 cos k - D̃ sin k (the
/// dispersion of the e^{+ikj} plane waves used by the amplitudes).
pub fn two_magnon_energy(roots: &BetheRoots, j1: f64, dm: f64) -> f64 {
    let eps = |k: f64| j1 * k.cos() - dm * k.sin();
    eps(roots.k1) + eps(roots.k2) + j1 * (roots.sites as f64 - 8.0) / 4.0
}

/// All real-root sectors of the chiral chain, deduplicated by momentum pair.
pub fn all_real_sectors(n: usize, j1: f64, dm: f64) -> Vec<BetheRoots> {
    let mut out: Vec<BetheRoots> = Vec::new();
    let key = |k: f64| (wrap_angle(k) * 1e7).round() as i64;
    for i1 in 0..n as i64 {
        for i2 in i1..n as i64 {
            let Ok(roots) = solve_bethe_roots_chiral(n, i1, i2, j1, dm) else {
                continue;
            };
            if bethe_state(&roots).is_err() {
                continue;
            }
            let mut ks = [key(roots.k1), key(roots.k2)];
            ks.sort_unstable();
            let dup = out.iter().any(|r| {
                let mut other = [key(r.k1), key(r.k2)];
                other.sort_unstable();
                other == ks
            });
            if !dup {
                out.push(roots);
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain::{build_sector_hamiltonian, Branch, ChainParams};
    use nalgebra::DVector;

    #[test]
    fn free_limit_has_zero_phase() {
        let roots = solve_bethe_roots(10, 1, 2, 0.0).unwrap();
        assert!((roots.k1 - PI / 5.0).abs() < 1e-12);
        assert!((roots.k2 - 2.0 * PI / 5.0).abs() < 1e-12);
        assert!(roots.theta.abs() < 1e-12);
    }

    #[test]
    fn anisotropic_roots_conserve_total_momentum() {
        let roots = solve_bethe_roots(10, 1, 2, -1.118).unwrap();
        assert!(roots.residual < 1e-10);
        assert!((roots.total_momentum() - 3.0 * PI / 5.0).abs() < 1e-10);
    }

    #[test]
    fn coincident_quantum_numbers_are_rejected() {
        assert!(solve_bethe_roots(10, 3, 3, -0.5).is_err());
        assert!(solve_bethe_roots(10, 0, 2, -0.5).is_err());
        assert!(solve_bethe_roots(10, 1, 10, -0.5).is_err());
    }

    #[test]
    fn free_limit_state_is_symmetrized_plane_waves() {
        let roots = solve_bethe_roots(10, 1, 2, 0.0).unwrap();
        let f = bethe_state(&roots).unwrap();
        let raw: Vec<C64> = pair_basis(10)
            .into_iter()
            .map(|(a, b)| {
                C64::new(0.0, roots.k1 * a as f64 + roots.k2 * b as f64).exp()
                    + C64::new(0.0, roots.k2 * a as f64 + roots.k1 * b as f64).exp()
            })
            .collect();
        let norm: f64 = raw.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        for (x, y) in f.iter().zip(&raw) {
            assert!((x - y / norm).norm() < 1e-12);
        }
    }

    #[test]
    fn bethe_states_are_normalized() {
        for roots in all_real_sectors(10, -1.0, 0.5) {
            let f = bethe_state(&roots).unwrap();
            let n: f64 = f.iter().map(|c| c.norm_sqr()).sum();
            assert!((n - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn chiral_states_diagonalize_the_sector_hamiltonian() {
        let params = ChainParams::new(10, -1.0, 0.0, 0.5, Branch::Plus).unwrap();
        let h = build_sector_hamiltonian(&params, 2).unwrap();
        let dm = params.signed_dm();
        let sectors = all_real_sectors(10, params.j1, dm);
        assert!(sectors.len() >= 35, "found only {} real sectors", sectors.len());
        for roots in &sectors {
            assert!(roots.residual < 1e-10);
            let f = DVector::from_vec(bethe_state(roots).unwrap());
            let e = two_magnon_energy(roots, params.j1, dm);
            let resid = (&h.matrix * &f - &f * C64::new(e, 0.0)).norm();
            assert!(
                resid < 1e-8,
                "(I1, I2) = ({}, {}): eigen-residual {resid:.2e}",
                roots.i1,
                roots.i2
            );
        }
    }

    #[test]
    fn distinct_sectors_are_mutually_orthogonal() {
        let sectors = all_real_sectors(10, -1.0, 0.5);
        let states: Vec<Vec<C64>> =
            sectors.iter().map(|r| bethe_state(r).unwrap()).collect();
        for a in 0..states.len() {
            for b in (a + 1)..states.len() {
                let overlap: C64 = states[a]
                    .iter()
                    .zip(&states[b])
                    .map(|(x, y)| x.conj() * y)
                    .sum();
                assert!(
                    overlap.norm() < 1e-8,
                    "sectors {a} and {b} overlap by {:.2e}",
                    overlap.norm()
                );
            }
        }
    }
}
