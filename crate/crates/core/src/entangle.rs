//! Four-qubit entanglement diagnostics: one-tangle, Wootters concurrence,
//! CKW monogamy, and vector chirality.
//!
//! Basis order: |b1 b2 b3 b4⟩ with site 1 the slowest bit. The chirality
//! operator per bond is κ^z_i = S^x_i S^y_{i+1} - S^y_i S^x_{i+1} with
//! S = σ/2 and periodic bonds; this sign convention gives ⟨φ|κ^z_i|φ⟩ = +1/4
//! for the reference single-magnon state |φ⟩.

use crate::chain::ChainParams;
use crate::dynamics::{eigh, partial_trace, two_excitation_l4_solution, DensityMatrix};
use crate::error::{Error, Result};
use crate::memory::pauli_matrices;
use crate::C64;
use nalgebra::DMatrix;

/// Normalized pure state of four qubits.
#[derive(Debug, Clone)]
pub struct FourQubitState {
    amps: [C64; 16],
}

impl FourQubitState {
    pub fn new(amps: [C64; 16]) -> Result<Self> {
        let norm: f64 = amps.iter().map(|c| c.norm_sqr()).sum();
        if (norm - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidState(format!("four-qubit norm² = {norm}")));
        }
        Ok(FourQubitState { amps })
    }

    pub fn from_slice(amps: &[C64]) -> Result<Self> {
        if amps.len() != 16 {
            return Err(Error::DimensionMismatch { expected: 16, got: amps.len() });
        }
        let mut a = [C64::new(0.0, 0.0); 16];
        a.copy_from_slice(amps);
        FourQubitState::new(a)
    }

    pub fn amplitudes(&self) -> &[C64; 16] {
        &self.amps
    }

    /// |φ⟩ = (i/2)|1000⟩ - (1/2)|0100⟩ - (i/2)|0010⟩ + (1/2)|0001⟩, the
    /// single-magnon state whose monogamy relation is an equality.
    pub fn phi_state() -> Self {
        let mut amps = [C64::new(0.0, 0.0); 16];
        amps[0b1000] = C64::new(0.0, 0.5);
        amps[0b0100] = C64::new(-0.5, 0.0);
        amps[0b0010] = C64::new(0.0, -0.5);
        amps[0b0001] = C64::new(0.5, 0.0);
        FourQubitState { amps }
    }

    /// |ψ₂⟩ = γ (|1100⟩ - iλ|1010⟩ - |1001⟩ - |0110⟩ + iλ|0101⟩ + |0011⟩),
    /// the second two-excitation eigenvector of the L = 4 closed form.
    pub fn psi2_state(params: &ChainParams) -> Result<Self> {
        let sol = two_excitation_l4_solution(params)?;
        let g = sol.gamma;
        let il = C64::new(0.0, sol.lambda);
        let mut amps = [C64::new(0.0, 0.0); 16];
        amps[0b1100] = C64::new(g, 0.0);
        amps[0b1010] = -il * g;
        amps[0b1001] = C64::new(-g, 0.0);
        amps[0b0110] = C64::new(-g, 0.0);
        amps[0b0101] = il * g;
        amps[0b0011] = C64::new(g, 0.0);
        FourQubitState::new(amps)
    }

    /// |GHZ⟩ = (|0000⟩ + |1111⟩)/√2.
    pub fn ghz() -> Self {
        let mut amps = [C64::new(0.0, 0.0); 16];
        let s = std::f64::consts::FRAC_1_SQRT_2;
        amps[0b0000] = C64::new(s, 0.0);
        amps[0b1111] = C64::new(s, 0.0);
        FourQubitState { amps }
    }

    /// |W⟩ = (|1000⟩ + |0100⟩ + |0010⟩ + |0001⟩)/2.
    pub fn w_state() -> Self {
        let mut amps = [C64::new(0.0, 0.0); 16];
        for site in 1..=4usize {
            amps[1 << (4 - site)] = C64::new(0.5, 0.0);
        }
        FourQubitState { amps }
    }

    fn density(&self) -> DensityMatrix {
        DensityMatrix::qubits(&self.amps, &["q1", "q2", "q3", "q4"]).expect("unit norm")
    }

    fn marginal(&self, sites: &[usize]) -> DensityMatrix {
        let labels: Vec<String> = sites.iter().map(|s| format!("q{s}")).collect();
        let refs: Vec<&str> = labels.iter().map(|s| s.as_str()).collect();
        partial_trace(&self.density(), &refs).expect("valid sites")
    }
}

/// One-tangle τ_{i|rest} = 4 det ρ_i of site i (1-based).
pub fn one_tangle(state: &FourQubitState, site: usize) -> f64 {
    assert!((1..=4).contains(&site), "site {site} out of range");
    let rho = state.marginal(&[site]);
    let m = rho.entries();
    let det = m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)];
    4.0 * det.re
}

/// Wootters concurrence of a two-qubit density matrix:
/// max(0, r1 - r2 - r3 - r4) with r_i the decreasing square roots of the
/// eigenvalues of ρ ρ̃, ρ̃ = (σ_y ⊗ σ_y) ρ* (σ_y ⊗ σ_y). The eigenvalues are
/// computed from the Hermitian product √ρ ρ̃ √ρ, and tiny negative values
/// (> -1e-10) are clipped before the square root.
pub fn concurrence(rho: &DensityMatrix) -> Result<f64> {
    if rho.dim() != 4 {
        return Err(Error::DimensionMismatch { expected: 4, got: rho.dim() });
    }
    let sy = &pauli_matrices()[2];
    let mut yy = DMatrix::<C64>::zeros(4, 4);
    for a in 0..2 {
        for b in 0..2 {
            for c in 0..2 {
                for d in 0..2 {
                    yy[(2 * a + b, 2 * c + d)] = sy[(a, c)] * sy[(b, d)];
                }
            }
        }
    }
    let conj = rho.entries().map(|z| z.conj());
    let rho_tilde = &yy * conj * &yy;

    // √ρ from the eigendecomposition.
    let (vals, vecs) = eigh(rho.entries());
    let mut sqrt_rho = DMatrix::<C64>::zeros(4, 4);
    for (i, &v) in vals.iter().enumerate() {
        let clipped = v.max(0.0).sqrt();
        let col = vecs.column(i);
        sqrt_rho += col * col.adjoint() * C64::new(clipped, 0.0);
    }
    let herm = &sqrt_rho * rho_tilde * &sqrt_rho;
    let (mut r, _) = eigh(&herm);
    for v in r.iter_mut() {
        debug_assert!(*v > -1e-10, "ρρ̃ eigenvalue {v}");
        // Eigenvalue noise at machine precision would blow up to ~1e-8 under
        // the square root; zero it below 1e-12 first.
        *v = if *v < 1e-12 { 0.0 } else { v.sqrt() };
    }
    r.sort_by(|a, b| b.partial_cmp(a).unwrap());
    Ok((r[0] - r[1] - r[2] - r[3]).max(0.0))
}

/// CKW monogamy data for one site.
#[derive(Debug, Clone)]
pub struct TangleReport {
    pub site: usize,
    pub one_tangle: f64,
    /// (partner site, τ_ij = C²) for the three partners.
    pub two_tangles: Vec<(usize, f64)>,
    /// τ_{i|rest} - Σ_j τ_ij; nonnegative up to numerical noise.
    pub slack: f64,
}

/// Assembles the one-tangle and all pairwise two-tangles of site i.
pub fn ckw_report(state: &FourQubitState, site: usize) -> Result<TangleReport> {
    assert!((1..=4).contains(&site), "site {site} out of range");
    let tau1 = one_tangle(state, site);
    let mut two_tangles = Vec::with_capacity(3);
    for partner in 1..=4usize {
        if partner == site {
            continue;
        }
        let mut pair = [site, partner];
        pair.sort_unstable();
        let rho = state.marginal(&pair);
        let c = concurrence(&rho)?;
        two_tangles.push((partner, c * c));
    }
    let sum: f64 = two_tangles.iter().map(|(_, t)| t).sum();
    Ok(TangleReport { site, one_tangle: tau1, two_tangles, slack: tau1 - sum })
}

/// ⟨κ^z_bond⟩ = ⟨S^x_i S^y_{i+1} - S^y_i S^x_{i+1}⟩ for the periodic bond
/// (i, i+1), S = σ/2, bond 1-based.
pub fn chirality_expectation(state: &FourQubitState, bond: usize) -> f64 {
    assert!((1..=4).contains(&bond), "bond {bond} out of range");
    let i = bond;
    let j = bond % 4 + 1;
    let paulis = pauli_matrices();
    let (sx, sy) = (&paulis[1], &paulis[2]);
    let mut total = C64::new(0.0, 0.0);
    // ⟨ψ| A_i B_j |ψ⟩ accumulated without building the 16x16 operator.
    let mut add = |a: &DMatrix<C64>, b: &DMatrix<C64>, sign: f64| {
        for (row, amp_out) in state.amps.iter().enumerate() {
            if amp_out.norm_sqr() == 0.0 {
                continue;
            }
            let bi = (row >> (4 - i)) & 1;
            let bj = (row >> (4 - j)) & 1;
            for ci in 0..2usize {
                for cj in 0..2usize {
                    let col = (row & !((1 << (4 - i)) | (1 << (4 - j))))
                        | (ci << (4 - i))
                        | (cj << (4 - j));
                    total += amp_out.conj()
                        * a[(bi, ci)]
                        * b[(bj, cj)]
                        * state.amps[col]
                        * C64::new(sign * 0.25, 0.0);
                }
            }
        }
    };
    add(sx, sy, 1.0);
    add(sy, sx, -1.0);
    total.re
}

/// Σ_i ⟨κ^z_i⟩ over all four periodic bonds.
pub fn total_chirality(state: &FourQubitState) -> f64 {
    (1..=4).map(|b| chirality_expectation(state, b)).sum()
}
