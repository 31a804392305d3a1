//! Time-dependent quantum memory: entropic uncertainty relation (EUR) curves.
//!
//! Alice measures σ^z or σ^x on qubit A; Bob holds qubit B. The EUR reads
//!
//!   S(X|B) + S(Z|B) ≥ log₂(1/c) + S(A|B),   c = 1/2,
//!
//! all entropies in bits. For the single-excitation chain the two sides are
//! equal at every time (the inequality saturates identically); in the L = 4
//! two-excitation case a strictly positive gap opens and closes in time.
//!
//! Two-qubit density matrices here use the standard tensor order
//! |a b⟩ ↦ 2a + b (A slowest). The element names ρ11..ρ44, ρ23 follow the
//! basis sequence {|00⟩, |10⟩, |01⟩, |11⟩}, so ρ22 = ⟨10|ρ|10⟩ sits at
//! matrix position (2, 2) in tensor order.

use crate::chain::{build_sector_hamiltonian, ChainParams};
use crate::dynamics::{
    ed_evolve, entropy_bits, evolve_two_excitation_l4, partial_trace, single_excitation_state,
    two_excitation_l4_solution, von_neumann_entropy, DensityMatrix, Subsystem, TimeGrid,
    TwoExcitationL4Solution,
};
use crate::error::{Error, Result};
use crate::C64;
use nalgebra::DMatrix;

/// Alice's measurement: σ^z eigenbasis {|0⟩, |1⟩} or σ^x eigenbasis
/// {(|0⟩ ± |1⟩)/√2}.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MeasurementBasis {
    Z,
    X,
}

impl MeasurementBasis {
    /// The two orthonormal projector vectors.
    pub fn projectors(self) -> [[C64; 2]; 2] {
        let one = C64::new(1.0, 0.0);
        let zero = C64::new(0.0, 0.0);
        let s = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        match self {
            MeasurementBasis::Z => [[one, zero], [zero, one]],
            MeasurementBasis::X => [[s, s], [s, -s]],
        }
    }
}

fn expect_two_qubits(rho: &DensityMatrix) -> Result<()> {
    if rho.dim() != 4 || rho.subsystems().len() != 2 {
        return Err(Error::DimensionMismatch { expected: 4, got: rho.dim() });
    }
    Ok(())
}

/// Σ_n (P_n ⊗ I) ρ (P_n ⊗ I) for Alice's projectors P_n.
pub fn post_measurement_state(rho: &DensityMatrix, basis: MeasurementBasis) -> Result<DensityMatrix> {
    expect_two_qubits(rho)?;
    let mut out = DMatrix::<C64>::zeros(4, 4);
    for v in basis.projectors() {
        // P ⊗ I with P = |v⟩⟨v|.
        let mut p = DMatrix::<C64>::zeros(4, 4);
        for a in 0..2 {
            for b in 0..2 {
                let pav = v[a] * v[b].conj();
                p[(2 * a, 2 * b)] = pav;
                p[(2 * a + 1, 2 * b + 1)] = pav;
            }
        }
        out += &p * rho.entries() * &p;
    }
    DensityMatrix::from_matrix(out, rho.subsystems().to_vec())
}

/// S(A|B) = S(AB) - S(B) in bits; negative for entangled states.
pub fn conditional_entropy(rho: &DensityMatrix) -> Result<f64> {
    expect_two_qubits(rho)?;
    let labels = rho.labels();
    let b = partial_trace(rho, &[labels[1]])?;
    Ok(von_neumann_entropy(rho) - von_neumann_entropy(&b))
}

/// Left and right side of the EUR for the given two-qubit state:
/// (S(X|B) + S(Z|B), 1 + S(A|B)).
pub fn eur_sides(rho: &DensityMatrix) -> Result<(f64, f64)> {
    expect_two_qubits(rho)?;
    let sx = conditional_entropy(&post_measurement_state(rho, MeasurementBasis::X)?)?;
    let sz = conditional_entropy(&post_measurement_state(rho, MeasurementBasis::Z)?)?;
    let sab = conditional_entropy(rho)?;
    Ok((sx + sz, 1.0 + sab))
}

/// LHS/RHS series of the EUR on a time grid.
#[derive(Debug, Clone)]
pub struct EurCurve {
    pub grid: TimeGrid,
    pub lhs: Vec<f64>,
    pub rhs: Vec<f64>,
}

impl EurCurve {
    pub fn gaps(&self) -> Vec<f64> {
        self.lhs.iter().zip(&self.rhs).map(|(l, r)| l - r).collect()
    }

    pub fn min_gap(&self) -> f64 {
        self.gaps().into_iter().fold(f64::INFINITY, f64::min)
    }

    pub fn max_gap(&self) -> f64 {
        self.gaps().into_iter().fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Default placement of Bob's qubit for the single-excitation curve: the
/// mode-sum formulas put B on the last site of the ring.
pub fn default_b_site(l: usize) -> usize {
    l
}

/// Diametrically opposite placement, 1 + L/2, as in the ring-geometry setup.
pub fn diametral_b_site(l: usize) -> usize {
    1 + l / 2
}

/// Single-excitation EUR curve with the initial flip on site 1 (= A) and
/// Bob's qubit on `b_site`. The reduced ρ_AB keeps only the occupation
/// weights (site-1 weight, site-B weight, and the aggregated channel weight),
/// which makes the two EUR sides coincide identically.
pub fn memory_curve_single_excitation_at(
    params: &ChainParams,
    grid: &TimeGrid,
    b_site: usize,
) -> Result<EurCurve> {
    params.validate()?;
    let l = params.length;
    if l < 3 {
        return Err(Error::InvalidParams("need L ≥ 3 for a channel between A and B".into()));
    }
    if b_site < 2 || b_site > l {
        return Err(Error::SiteOutOfRange { site: b_site, length: l });
    }
    let mut init = vec![C64::new(0.0, 0.0); l];
    init[0] = C64::new(1.0, 0.0);
    let mut lhs = Vec::with_capacity(grid.count);
    let mut rhs = Vec::with_capacity(grid.count);
    for t in grid.times() {
        let psi = single_excitation_state(params, &init, t)?;
        let p_a = psi[0].norm_sqr();
        let p_b = psi[b_site - 1].norm_sqr();
        let p_mid = (1.0 - p_a - p_b).max(0.0);
        let rho = two_qubit_occupation_state(p_mid, p_b, p_a)?;
        let (l_val, r_val) = eur_sides(&rho)?;
        lhs.push(l_val);
        rhs.push(r_val);
    }
    Ok(EurCurve { grid: *grid, lhs, rhs })
}

/// Single-excitation EUR curve with B on the default (last) site.
pub fn memory_curve_single_excitation(params: &ChainParams, grid: &TimeGrid) -> Result<EurCurve> {
    memory_curve_single_excitation_at(params, grid, default_b_site(params.length))
}

/// ρ_AB = p00 |00⟩⟨00| + p01 |01⟩⟨01| + p10 |10⟩⟨10| (tensor order).
fn two_qubit_occupation_state(p00: f64, p01: f64, p10: f64) -> Result<DensityMatrix> {
    let mut m = DMatrix::<C64>::zeros(4, 4);
    m[(0, 0)] = C64::new(p00, 0.0);
    m[(1, 1)] = C64::new(p01, 0.0);
    m[(2, 2)] = C64::new(p10, 0.0);
    DensityMatrix::from_matrix(m, vec![Subsystem::qubit("A"), Subsystem::qubit("B")])
}

/// Reduced density-matrix elements of the L = 4 two-excitation state in the
/// basis sequence {|00⟩, |10⟩, |01⟩, |11⟩}.
#[derive(Debug, Clone, Copy)]
pub struct RhoAbElementsL4 {
    pub rho11: f64,
    pub rho22: f64,
    pub rho33: f64,
    pub rho44: f64,
    pub rho23: C64,
    pub rho32: C64,
}

impl RhoAbElementsL4 {
    /// Closed-form elements at time t.
    pub fn at(sol: &TwoExcitationL4Solution, t: f64) -> Self {
        let a2 = sol.alpha * sol.alpha;
        let g2 = sol.gamma * sol.gamma;
        let eta = sol.eta;
        let lam = sol.lambda;
        let om = &sol.omegas;
        let c = |i: usize, j: usize| ((om[i - 1] - om[j - 1]) * t).cos();
        let s = |i: usize, j: usize| ((om[i - 1] - om[j - 1]) * t).sin();

        let rho11 = a2 * a2 + g2 * g2 + 2.0 * a2 * g2 * c(1, 2)
            - a2 / 3.0 * c(1, 3)
            - a2 / 6.0 * c(1, 4)
            - g2 / 3.0 * c(2, 3)
            - g2 / 6.0 * c(2, 4)
            + c(3, 4) / 36.0
            + 5.0 / 144.0;
        let rho44 = rho11;

        let shared = a2 * a2 * eta * eta
            + a2 * a2
            + g2 * g2 * lam * lam
            + g2 * g2
            + 2.0 * a2 * g2 * (eta * lam + 1.0) * c(1, 2);
        let rho22 = shared
            + a2 / 3.0 * (c(1, 3) + eta * s(1, 3))
            + a2 / 6.0 * (c(1, 4) - 2.0 * eta * s(1, 4))
            + a2 * c(1, 5)
            + g2 / 3.0 * (c(2, 3) + lam * s(2, 3))
            + g2 / 6.0 * (c(2, 4) - 2.0 * lam * s(2, 4))
            + g2 * c(2, 5)
            - c(3, 4) / 36.0
            + c(3, 5) / 6.0
            + c(4, 5) / 12.0
            + 49.0 / 144.0;
        let rho33 = shared
            + a2 / 3.0 * (c(1, 3) - eta * s(1, 3))
            + a2 / 6.0 * (c(1, 4) + 2.0 * eta * s(1, 4))
            - a2 * c(1, 5)
            + g2 / 3.0 * (c(2, 3) - lam * s(2, 3))
            + g2 / 6.0 * (c(2, 4) + 2.0 * lam * s(2, 4))
            - g2 * c(2, 5)
            - c(3, 4) / 36.0
            - c(3, 5) / 6.0
            - c(4, 5) / 12.0
            + 49.0 / 144.0;

        let i = C64::new(0.0, 1.0);
        let re = |x: f64| C64::new(x, 0.0);
        let rho23 = -i / 36.0
            * (re(72.0 * a2 * a2 * eta)
                + re(72.0 * g2 * g2 * lam)
                + re(72.0 * a2 * g2 * (eta + lam) * c(1, 2))
                + re(12.0 * a2) * (re(eta) + i) * re(c(1, 3))
                + re(6.0 * a2) * (re(eta) - 2.0 * i) * re(c(1, 4))
                - 36.0 * i * re(a2 * eta * s(1, 5))
                + re(12.0 * g2) * (re(lam) + i) * re(c(2, 3))
                + re(6.0 * g2) * (re(lam) - 2.0 * i) * re(c(2, 4))
                - 36.0 * i * re(g2 * lam * s(2, 5))
                - i * re(c(3, 4))
                + re(6.0 * (s(3, 5) - s(4, 5)))
                + i);
        let rho32 = i / 36.0
            * (re(72.0 * a2 * a2 * eta)
                + re(72.0 * g2 * g2 * lam)
                + re(72.0 * a2 * g2 * (eta + lam) * c(1, 2))
                + re(12.0 * a2) * (re(eta) - i) * re(c(1, 3))
                + re(6.0 * a2) * (re(eta) + 2.0 * i) * re(c(1, 4))
                + 36.0 * i * re(a2 * eta * s(1, 5))
                + re(12.0 * g2) * (re(lam) - i) * re(c(2, 3))
                + re(6.0 * g2) * (re(lam) + 2.0 * i) * re(c(2, 4))
                + 36.0 * i * re(g2 * lam * s(2, 5))
                + i * re(c(3, 4))
                + re(6.0 * (s(3, 5) - s(4, 5)))
                - i);

        RhoAbElementsL4 { rho11, rho22, rho33, rho44, rho23, rho32 }
    }

    pub fn trace(&self) -> f64 {
        self.rho11 + self.rho22 + self.rho33 + self.rho44
    }

    /// Assembles the 4x4 density matrix in tensor order.
    pub fn to_density_matrix(&self) -> Result<DensityMatrix> {
        let mut m = DMatrix::<C64>::zeros(4, 4);
        m[(0, 0)] = C64::new(self.rho11, 0.0);
        m[(2, 2)] = C64::new(self.rho22, 0.0);
        m[(1, 1)] = C64::new(self.rho33, 0.0);
        m[(3, 3)] = C64::new(self.rho44, 0.0);
        m[(2, 1)] = self.rho23;
        m[(1, 2)] = self.rho32;
        DensityMatrix::from_matrix(m, vec![Subsystem::qubit("A"), Subsystem::qubit("B")])
    }

    /// EUR sides from the explicit eigenvalue sets: ρ_X,AB has the doubly
    /// degenerate pair (1 ± √d)/4, ρ_Z,AB is diagonal, ρ_AB has
    /// {ρ11, ρ44, ((ρ22+ρ33) ∓ √d)/2}, and ρ_B = diag(ρ11+ρ22, ρ33+ρ44),
    /// with d = (ρ22-ρ33)² + 4|ρ23|².
    pub fn eur_sides_closed_form(&self) -> (f64, f64) {
        let d = (self.rho22 - self.rho33).powi(2) + 4.0 * self.rho23.norm_sqr();
        let sd = d.sqrt();
        let wx = [0.25 * (1.0 - sd), 0.25 * (1.0 - sd), 0.25 * (1.0 + sd), 0.25 * (1.0 + sd)];
        let y = [self.rho11 + self.rho22, self.rho33 + self.rho44];
        let xz = [self.rho11, self.rho22, self.rho33, self.rho44];
        let x = [
            self.rho11,
            self.rho44,
            0.5 * ((self.rho22 + self.rho33) - sd),
            0.5 * ((self.rho22 + self.rho33) + sd),
        ];
        let sy = entropy_bits(&y);
        let lhs = (entropy_bits(&wx) - sy) + (entropy_bits(&xz) - sy);
        let rhs = 1.0 + (entropy_bits(&x) - sy);
        (lhs, rhs)
    }

    /// Eigenvalues of the X-measured state, (1 ± √d)/4 twice each.
    pub fn x_eigenvalues(&self) -> [f64; 4] {
        let d = (self.rho22 - self.rho33).powi(2) + 4.0 * self.rho23.norm_sqr();
        let sd = d.sqrt();
        [0.25 * (1.0 - sd), 0.25 * (1.0 - sd), 0.25 * (1.0 + sd), 0.25 * (1.0 + sd)]
    }
}

/// L = 4 two-excitation EUR curve from the closed forms. Falls back to the
/// dense pipeline when D = 0 (where η and λ are singular).
pub fn memory_curve_two_excitation_l4(params: &ChainParams, grid: &TimeGrid) -> Result<EurCurve> {
    match two_excitation_l4_solution(params) {
        Ok(sol) => {
            let mut lhs = Vec::with_capacity(grid.count);
            let mut rhs = Vec::with_capacity(grid.count);
            for t in grid.times() {
                let (l, r) = RhoAbElementsL4::at(&sol, t).eur_sides_closed_form();
                lhs.push(l);
                rhs.push(r);
            }
            Ok(EurCurve { grid: *grid, lhs, rhs })
        }
        Err(Error::DegenerateDm) => memory_curve_two_excitation_l4_dense(params, grid),
        Err(e) => Err(e),
    }
}

/// Generic pipeline on the closed-form state: evolve, embed into four qubits,
/// trace to {A, B}, measure.
pub fn memory_curve_two_excitation_l4_generic(
    params: &ChainParams,
    grid: &TimeGrid,
) -> Result<EurCurve> {
    let sol = two_excitation_l4_solution(params)?;
    let mut lhs = Vec::with_capacity(grid.count);
    let mut rhs = Vec::with_capacity(grid.count);
    for t in grid.times() {
        let phi = evolve_two_excitation_l4(&sol, t);
        let rho_ab = reduce_pair_state_to_ab(&phi)?;
        let (l, r) = eur_sides(&rho_ab)?;
        lhs.push(l);
        rhs.push(r);
    }
    Ok(EurCurve { grid: *grid, lhs, rhs })
}

/// Dense-oracle pipeline used for the DM-free case.
fn memory_curve_two_excitation_l4_dense(params: &ChainParams, grid: &TimeGrid) -> Result<EurCurve> {
    let h = build_sector_hamiltonian(params, 2)?;
    let mut init = vec![C64::new(0.0, 0.0); 6];
    init[0] = C64::new(1.0, 0.0);
    let mut lhs = Vec::with_capacity(grid.count);
    let mut rhs = Vec::with_capacity(grid.count);
    for t in grid.times() {
        let psi = ed_evolve(&h.matrix, &init, t)?;
        let mut arr = [C64::new(0.0, 0.0); 6];
        arr.copy_from_slice(&psi);
        let rho_ab = reduce_pair_state_to_ab(&arr)?;
        let (l, r) = eur_sides(&rho_ab)?;
        lhs.push(l);
        rhs.push(r);
    }
    Ok(EurCurve { grid: *grid, lhs, rhs })
}

/// Embeds a two-flip state over pairs {12, 13, 14, 23, 24, 34} of the
/// four-site ring (site order A, C, D, B) into the 16-dim qubit register and
/// traces out the channel sites C, D.
pub fn reduce_pair_state_to_ab(phi: &[C64; 6]) -> Result<DensityMatrix> {
    let pairs = [(1usize, 2usize), (1, 3), (1, 4), (2, 3), (2, 4), (3, 4)];
    let mut full = vec![C64::new(0.0, 0.0); 16];
    for (amp, (a, b)) in phi.iter().zip(pairs) {
        let idx = (1 << (4 - a)) | (1 << (4 - b));
        full[idx] = *amp;
    }
    let rho = DensityMatrix::qubits(&full, &["A", "C", "D", "B"])?;
    partial_trace(&rho, &["A", "B"])
}

/// R_{μν} = Tr[ρ (σ^μ ⊗ σ^ν)] with σ⁰ = I, σ¹ = σ^x, σ² = σ^y, σ³ = σ^z.
pub fn dirac_decomposition(rho: &DensityMatrix) -> Result<[[f64; 4]; 4]> {
    expect_two_qubits(rho)?;
    let paulis = pauli_matrices();
    let mut r = [[0.0; 4]; 4];
    for (mu, pa) in paulis.iter().enumerate() {
        for (nu, pb) in paulis.iter().enumerate() {
            let mut tr = C64::new(0.0, 0.0);
            for a in 0..2 {
                for b in 0..2 {
                    for ap in 0..2 {
                        for bp in 0..2 {
                            tr += rho.entries()[(2 * a + b, 2 * ap + bp)]
                                * pa[(ap, a)]
                                * pb[(bp, b)];
                        }
                    }
                }
            }
            r[mu][nu] = tr.re;
        }
    }
    Ok(r)
}

pub(crate) fn pauli_matrices() -> [DMatrix<C64>; 4] {
    let z = C64::new(0.0, 0.0);
    let o = C64::new(1.0, 0.0);
    let i = C64::new(0.0, 1.0);
    [
        DMatrix::from_row_slice(2, 2, &[o, z, z, o]),
        DMatrix::from_row_slice(2, 2, &[z, o, o, z]),
        DMatrix::from_row_slice(2, 2, &[z, -i, i, z]),
        DMatrix::from_row_slice(2, 2, &[o, z, z, -o]),
    ]
}

/// Binary entropy h(x) = -x log₂ x - (1-x) log₂(1-x). Defined alongside the
/// EUR notation but not used by any of the curve formulas.
pub fn binary_entropy(x: f64) -> f64 {
    entropy_bits(&[x, 1.0 - x])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain::Branch;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn bell() -> DensityMatrix {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let v = [C64::new(s, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0), C64::new(s, 0.0)];
        DensityMatrix::qubits(&v, &["A", "B"]).unwrap()
    }

    fn ket10() -> DensityMatrix {
        let v = [C64::new(0.0, 0.0), C64::new(0.0, 0.0), C64::new(1.0, 0.0), C64::new(0.0, 0.0)];
        DensityMatrix::qubits(&v, &["A", "B"]).unwrap()
    }

    fn maximally_mixed() -> DensityMatrix {
        let m = DMatrix::from_diagonal_element(4, 4, C64::new(0.25, 0.0));
        DensityMatrix::from_matrix(m, vec![Subsystem::qubit("A"), Subsystem::qubit("B")]).unwrap()
    }

    #[test]
    fn z_measurement_leaves_z_eigenstate_alone() {
        let rho = ket10();
        let out = post_measurement_state(&rho, MeasurementBasis::Z).unwrap();
        let dev = (out.entries() - rho.entries()).norm();
        assert!(dev < 1e-14);
    }

    #[test]
    fn x_measurement_of_z_eigenstate_mixes_alice() {
        let out = post_measurement_state(&ket10(), MeasurementBasis::X).unwrap();
        // ½(|00⟩⟨00| + |10⟩⟨10|) plus the ½(|00⟩⟨10| h.c.) coherences that
        // survive the |±⟩ projectors.
        assert!((out.entries()[(0, 0)].re - 0.5).abs() < 1e-12);
        assert!((out.entries()[(2, 2)].re - 0.5).abs() < 1e-12);
        let a = partial_trace(&out, &["A"]).unwrap();
        assert!((a.entries()[(0, 0)].re - 0.5).abs() < 1e-12);
        assert!((a.entries()[(1, 1)].re - 0.5).abs() < 1e-12);
    }

    #[test]
    fn post_measurement_is_idempotent() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..20 {
            let mut v: Vec<C64> = (0..4)
                .map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
                .collect();
            let n: f64 = v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
            v.iter_mut().for_each(|c| *c /= n);
            let rho = DensityMatrix::qubits(&v, &["A", "B"]).unwrap();
            for basis in [MeasurementBasis::Z, MeasurementBasis::X] {
                let once = post_measurement_state(&rho, basis).unwrap();
                let twice = post_measurement_state(&once, basis).unwrap();
                assert!((once.entries() - twice.entries()).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn conditional_entropy_reference_values() {
        assert!((conditional_entropy(&bell()).unwrap() + 1.0).abs() < 1e-10);
        assert!((conditional_entropy(&maximally_mixed()).unwrap() - 1.0).abs() < 1e-10);
        assert!(conditional_entropy(&ket10()).unwrap().abs() < 1e-10);
    }

    #[test]
    fn eur_sides_reference_values() {
        let (l, r) = eur_sides(&ket10()).unwrap();
        assert!((l - 1.0).abs() < 1e-10 && (r - 1.0).abs() < 1e-10);
        let (l, r) = eur_sides(&bell()).unwrap();
        assert!(l.abs() < 1e-10 && r.abs() < 1e-10);
        let (l, r) = eur_sides(&maximally_mixed()).unwrap();
        assert!((l - 2.0).abs() < 1e-10 && (r - 2.0).abs() < 1e-10);
    }

    #[test]
    fn single_excitation_sides_saturate_identically() {
        let grid = TimeGrid::span(10.0, 50).unwrap();
        for l in [4usize, 10] {
            for branch in [Branch::Plus, Branch::Minus] {
                let p = ChainParams::paper(l, branch);
                let curve = memory_curve_single_excitation(&p, &grid).unwrap();
                for (a, b) in curve.lhs.iter().zip(&curve.rhs) {
                    assert!((a - b).abs() < 1e-9, "L = {l} {branch:?}: {a} vs {b}");
                }
            }
        }
    }

    #[test]
    fn single_excitation_sides_start_at_one() {
        for l in [4usize, 10, 100] {
            let p = ChainParams::paper(l, Branch::Plus);
            let grid = TimeGrid::new(0.0, 1.0, 1).unwrap();
            let curve = memory_curve_single_excitation(&p, &grid).unwrap();
            assert!((curve.lhs[0] - 1.0).abs() < 1e-9);
            assert!((curve.rhs[0] - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn single_excitation_branches_agree_for_diametral_bob() {
        let grid = TimeGrid::span(10.0, 50).unwrap();
        let l = 10;
        let plus = memory_curve_single_excitation_at(
            &ChainParams::paper(l, Branch::Plus),
            &grid,
            diametral_b_site(l),
        )
        .unwrap();
        let minus = memory_curve_single_excitation_at(
            &ChainParams::paper(l, Branch::Minus),
            &grid,
            diametral_b_site(l),
        )
        .unwrap();
        for (a, b) in plus.lhs.iter().zip(&minus.lhs) {
            assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn l4_elements_start_at_pure_10() {
        let sol = two_excitation_l4_solution(&ChainParams::paper(4, Branch::Plus)).unwrap();
        let e = RhoAbElementsL4::at(&sol, 0.0);
        assert!(e.rho11.abs() < 1e-12);
        assert!((e.rho22 - 1.0).abs() < 1e-12);
        assert!(e.rho33.abs() < 1e-12);
        assert!(e.rho44.abs() < 1e-12);
        assert!(e.rho23.norm() < 1e-12);
    }

    #[test]
    fn l4_elements_internal_identities() {
        let sol = two_excitation_l4_solution(&ChainParams::paper(4, Branch::Plus)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..100 {
            let t: f64 = rng.gen_range(0.0..20.0);
            let e = RhoAbElementsL4::at(&sol, t);
            assert!((e.rho11 - e.rho44).abs() < 1e-10);
            assert!((e.trace() - 1.0).abs() < 1e-10, "t = {t}: trace {}", e.trace());
            assert!((e.rho32 - e.rho23.conj()).norm() < 1e-10);
        }
    }

    #[test]
    fn l4_elements_match_traced_closed_form_state() {
        for branch in [Branch::Plus, Branch::Minus] {
            let sol = two_excitation_l4_solution(&ChainParams::paper(4, branch)).unwrap();
            for t in [0.0, 0.7, 2.0, 6.3] {
                let phi = evolve_two_excitation_l4(&sol, t);
                let rho = reduce_pair_state_to_ab(&phi).unwrap();
                let e = RhoAbElementsL4::at(&sol, t);
                assert!((rho.entries()[(0, 0)].re - e.rho11).abs() < 1e-10);
                assert!((rho.entries()[(2, 2)].re - e.rho22).abs() < 1e-10);
                assert!((rho.entries()[(1, 1)].re - e.rho33).abs() < 1e-10);
                assert!((rho.entries()[(3, 3)].re - e.rho44).abs() < 1e-10);
                assert!((rho.entries()[(2, 1)] - e.rho23).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn l4_x_eigenvalues_normalized_and_nonnegative() {
        let sol = two_excitation_l4_solution(&ChainParams::paper(4, Branch::Plus)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..50 {
            let t: f64 = rng.gen_range(0.0..20.0);
            let w = RhoAbElementsL4::at(&sol, t).x_eigenvalues();
            assert!(w.iter().all(|&x| x > -1e-10));
            assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn l4_closed_form_curve_matches_generic_pipeline() {
        let grid = TimeGrid::span(10.0, 100).unwrap();
        for branch in [Branch::Plus, Branch::Minus] {
            let p = ChainParams::paper(4, branch);
            let closed = memory_curve_two_excitation_l4(&p, &grid).unwrap();
            let generic = memory_curve_two_excitation_l4_generic(&p, &grid).unwrap();
            for i in 0..grid.count {
                assert!((closed.lhs[i] - generic.lhs[i]).abs() < 1e-8);
                assert!((closed.rhs[i] - generic.rhs[i]).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn l4_curve_starts_at_one_and_respects_the_inequality() {
        let grid = TimeGrid::span(10.0, 101).unwrap();
        let curve =
            memory_curve_two_excitation_l4(&ChainParams::paper(4, Branch::Plus), &grid).unwrap();
        assert!((curve.lhs[0] - 1.0).abs() < 1e-10);
        assert!((curve.rhs[0] - 1.0).abs() < 1e-10);
        assert!(curve.min_gap() > -1e-9);
        assert!(curve.max_gap() > 0.05, "expected a visible memory gap");
    }

    #[test]
    fn l4_dm_free_fallback_runs_dense_pipeline() {
        let p = ChainParams::new(4, -1.0, 1.0, 0.0, Branch::Plus).unwrap();
        let grid = TimeGrid::span(5.0, 20).unwrap();
        let curve = memory_curve_two_excitation_l4(&p, &grid).unwrap();
        assert!(curve.min_gap() > -1e-9);
        assert!((curve.lhs[0] - 1.0).abs() < 1e-9);
    }

    #[test]
    fn dirac_decomposition_reference_patterns() {
        let r = dirac_decomposition(&maximally_mixed()).unwrap();
        for mu in 0..4 {
            for nu in 0..4 {
                let want = if mu == 0 && nu == 0 { 1.0 } else { 0.0 };
                assert!((r[mu][nu] - want).abs() < 1e-12);
            }
        }
        let r = dirac_decomposition(&ket10()).unwrap();
        assert!((r[0][0] - 1.0).abs() < 1e-12);
        assert!((r[3][0] + 1.0).abs() < 1e-12);
        assert!((r[0][3] - 1.0).abs() < 1e-12);
        assert!((r[3][3] + 1.0).abs() < 1e-12);
    }

    #[test]
    fn dirac_decomposition_of_l4_state_has_paper_structure() {
        let sol = two_excitation_l4_solution(&ChainParams::paper(4, Branch::Plus)).unwrap();
        let rho = RhoAbElementsL4::at(&sol, 1.0).to_density_matrix().unwrap();
        let r = dirac_decomposition(&rho).unwrap();
        let nonzero = [(0, 0), (0, 3), (3, 0), (3, 3), (1, 1), (1, 2), (2, 1), (2, 2)];
        for mu in 0..4 {
            for nu in 0..4 {
                if !nonzero.contains(&(mu, nu)) {
                    assert!(r[mu][nu].abs() < 1e-10, "R[{mu}][{nu}] = {}", r[mu][nu]);
                }
            }
        }
        assert!((r[0][0] - 1.0).abs() < 1e-10);
        assert!((r[1][1] - r[2][2]).abs() < 1e-10);
        assert!((r[1][2] + r[2][1]).abs() < 1e-10);
    }

    #[test]
    fn binary_entropy_utility() {
        assert!(binary_entropy(0.0).abs() < 1e-12);
        assert!((binary_entropy(0.5) - 1.0).abs() < 1e-12);
        assert!((binary_entropy(0.25) - binary_entropy(0.75)).abs() < 1e-12);
    }
}
