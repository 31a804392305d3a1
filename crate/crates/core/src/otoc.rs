//! Out-of-time-ordered correlators from the spectral four-point sum.
//!
//! With Ŵ = σ^z on site 1 and V̂ = σ^z on site L/2, the reported quantity is
//!
//!   C(t) = 1 - Re Σ_{n2,n3,n4} e^{it(E_{n1}-E_{n2}+E_{n3}-E_{n4})}
//!              V_{n1 n2} W_{n2 n3} V_{n3 n4} W_{n4 n1},
//!
//! i.e. the four-point function of V̂(t) against Ŵ from the eigenstate |n1⟩.
//! For unitary Hermitian perturbations this equals half of the commutator
//! norm ⟨[V̂(t), Ŵ]†[V̂(t), Ŵ]⟩; [`otoc_commutator_oracle`] applies that
//! factor so the two routes agree number for number.

use crate::bethe::{all_real_sectors, bethe_state, two_magnon_energy};
use crate::chain::{build_sector_hamiltonian, magnon_spectrum, Branch, ChainParams, SectorHamiltonian};
use crate::dynamics::{eigh, TimeGrid};
use crate::error::{Error, Result};
use crate::C64;
use nalgebra::{DMatrix, DVector};
use std::f64::consts::PI;

/// The two perturbation sites (1-based). `site_w` follows the Ŵ = σ^z_1,
/// `site_v` the V̂ = σ^z_{L/2} role of the standard setup.
#[derive(Debug, Clone, Copy)]
pub struct PerturbationPair {
    pub site_w: usize,
    pub site_v: usize,
}

impl PerturbationPair {
    pub fn new(site_w: usize, site_v: usize, length: usize) -> Result<Self> {
        for site in [site_w, site_v] {
            if site < 1 || site > length {
                return Err(Error::SiteOutOfRange { site, length });
            }
        }
        if site_w == site_v {
            return Err(Error::InvalidParams("perturbation sites must differ".into()));
        }
        Ok(PerturbationPair { site_w, site_v })
    }

    /// Ŵ on site 1, V̂ on site L/2.
    pub fn paper_default(length: usize) -> Result<Self> {
        PerturbationPair::new(1, length / 2, length)
    }
}

/// Eigenbasis data feeding the spectral sum: energies and both σ^z tables.
#[derive(Debug, Clone)]
pub struct SpectralData {
    pub energies: Vec<f64>,
    /// ⟨n|σ^z_{site_w}|m⟩.
    pub sigma_w: DMatrix<C64>,
    /// ⟨n|σ^z_{site_v}|m⟩.
    pub sigma_v: DMatrix<C64>,
}

impl SpectralData {
    pub fn dim(&self) -> usize {
        self.energies.len()
    }

    /// Single-magnon data for the given branch: closed-form matrix elements
    /// over the plane-wave modes.
    pub fn single_excitation(params: &ChainParams, pair: &PerturbationPair) -> Result<Self> {
        params.validate()?;
        let energies = magnon_spectrum(params).iter().map(|m| m.omega).collect();
        Ok(SpectralData {
            energies,
            sigma_w: magnon_sigma_z_elements(params.length, pair.site_w)?,
            sigma_v: magnon_sigma_z_elements(params.length, pair.site_v)?,
        })
    }

    /// Numeric data from an orthonormal eigenbasis over a flip-sector basis:
    /// columns of `eigvecs` are the eigenstates, `sector` supplies the σ^z
    /// diagonals.
    pub fn from_eigenbasis(
        energies: Vec<f64>,
        eigvecs: &DMatrix<C64>,
        sector: &SectorHamiltonian,
        pair: &PerturbationPair,
    ) -> Result<Self> {
        if energies.len() != eigvecs.ncols() || eigvecs.nrows() != sector.dim() {
            return Err(Error::DimensionMismatch {
                expected: sector.dim(),
                got: eigvecs.nrows(),
            });
        }
        let table = |site: usize| {
            let diag = sector.sigma_z_diagonal(site);
            sigma_z_matrix_elements(eigvecs, &diag)
        };
        Ok(SpectralData {
            energies,
            sigma_w: table(pair.site_w),
            sigma_v: table(pair.site_v),
        })
    }
}

/// ⟨n|σ^z_site|m⟩ for an arbitrary orthonormal basis given the operator
/// diagonal in the underlying flip basis: U† diag(σ) U.
pub fn sigma_z_matrix_elements(eigvecs: &DMatrix<C64>, sigma_diag: &[f64]) -> DMatrix<C64> {
    let mut scaled = eigvecs.clone();
    for (r, &s) in sigma_diag.iter().enumerate() {
        for c in 0..scaled.ncols() {
            scaled[(r, c)] *= s;
        }
    }
    eigvecs.adjoint() * scaled
}

/// Closed-form single-magnon table: ⟨n|σ^z_site|m⟩ = δ_{nm} - (2/L) e^{i 2π (n-m) site / L}.
pub fn magnon_sigma_z_elements(l: usize, site: usize) -> Result<DMatrix<C64>> {
    if site < 1 || site > l {
        return Err(Error::SiteOutOfRange { site, length: l });
    }
    let mut out = DMatrix::<C64>::zeros(l, l);
    for n in 0..l {
        for m in 0..l {
            let phase = 2.0 * PI * (n as f64 - m as f64) * site as f64 / l as f64;
            let mut v = -(2.0 / l as f64) * C64::new(0.0, phase).exp();
            if n == m {
                v += C64::new(1.0, 0.0);
            }
            out[(n, m)] = v;
        }
    }
    Ok(out)
}

/// OTOC series on a time grid.
#[derive(Debug, Clone)]
pub struct OtocCurve {
    pub grid: TimeGrid,
    pub values: Vec<f64>,
    pub branch: Branch,
    /// Index of the initial eigenstate.
    pub n1: usize,
}

impl OtocCurve {
    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }
}

/// C(t) at a single time; O(dim²) via phase-diagonal matrix-vector products.
pub fn otoc_value(data: &SpectralData, n1: usize, t: f64) -> f64 {
    let d = data.dim();
    let phase_minus: Vec<C64> =
        data.energies.iter().map(|&e| C64::new(0.0, -e * t).exp()).collect();
    // u_c = e^{-i E_c t} W_{c, n1}
    let mut u = DVector::from_iterator(d, (0..d).map(|c| phase_minus[c] * data.sigma_w[(c, n1)]));
    // v_b = Σ_c V_{b c} u_c, then multiply by e^{+i E_b t}
    let mut v = &data.sigma_v * &u;
    for b in 0..d {
        v[b] *= phase_minus[b].conj();
    }
    // w_a = Σ_b W_{a b} v_b, times e^{-i E_a t}
    u = &data.sigma_w * &v;
    for a in 0..d {
        u[a] *= phase_minus[a];
    }
    // F = e^{+i E_{n1} t} Σ_a V_{n1 a} u_a
    let mut f = C64::new(0.0, 0.0);
    for a in 0..d {
        f += data.sigma_v[(n1, a)] * u[a];
    }
    f *= phase_minus[n1].conj();
    1.0 - f.re
}

/// Spectral-sum OTOC from eigenstate `n1` on a time grid.
pub fn otoc_spectral(
    data: &SpectralData,
    n1: usize,
    grid: &TimeGrid,
    branch: Branch,
) -> Result<OtocCurve> {
    if n1 >= data.dim() {
        return Err(Error::DimensionMismatch { expected: data.dim(), got: n1 });
    }
    let values = grid.times().iter().map(|&t| otoc_value(data, n1, t)).collect();
    Ok(OtocCurve { grid: *grid, values, branch, n1 })
}

/// Single-excitation OTOC with the standard perturbations (Ŵ = σ^z_1,
/// V̂ = σ^z_{L/2}) from magnon mode `n1`.
pub fn otoc_single_excitation(
    params: &ChainParams,
    n1: usize,
    grid: &TimeGrid,
) -> Result<OtocCurve> {
    if n1 >= params.length {
        return Err(Error::DimensionMismatch { expected: params.length, got: n1 });
    }
    let pair = PerturbationPair::paper_default(params.length)?;
    let data = SpectralData::single_excitation(params, &pair)?;
    otoc_spectral(&data, n1, grid, params.branch)
}

/// How to build the two-excitation eigenbasis.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TwoExcitationMethod {
    /// Dense diagonalization of the sector Hamiltonian.
    Ed,
    /// Real-root Bethe states (J2 = 0 only), completed on the bound-state
    /// subspace by diagonalizing the Hamiltonian restricted to the orthogonal
    /// complement of the Bethe span.
    Bethe,
}

/// Two-excitation OTOC from the sector's lowest-energy eigenstate.
pub fn otoc_two_excitation(
    params: &ChainParams,
    grid: &TimeGrid,
    method: TwoExcitationMethod,
) -> Result<OtocCurve> {
    let sector = build_sector_hamiltonian(params, 2)?;
    let pair = PerturbationPair::paper_default(params.length)?;
    let (energies, vecs) = match method {
        TwoExcitationMethod::Ed => eigh(&sector.matrix),
        TwoExcitationMethod::Bethe => {
            if params.j2 != 0.0 {
                return Err(Error::BetheUnavailable(params.j2));
            }
            bethe_eigenbasis(params, &sector)?
        }
    };
    let n1 = energies
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.partial_cmp(b.1).unwrap())
        .map(|(i, _)| i)
        .unwrap();
    let data = SpectralData::from_eigenbasis(energies, &vecs, &sector, &pair)?;
    otoc_spectral(&data, n1, grid, params.branch)
}

/// Real-root Bethe states plus the diagonalized orthogonal complement
/// (the bound pairs, whose string roots are outside the real-k ansatz).
fn bethe_eigenbasis(
    params: &ChainParams,
    sector: &SectorHamiltonian,
) -> Result<(Vec<f64>, DMatrix<C64>)> {
    let n = params.length;
    let dm = params.signed_dm();
    let dim = sector.dim();
    let sectors = all_real_sectors(n, params.j1, dm);

    let mut energies: Vec<f64> = Vec::with_capacity(dim);
    let mut columns: Vec<DVector<C64>> = Vec::with_capacity(dim);
    for roots in &sectors {
        let f = DVector::from_vec(bethe_state(roots)?);
        let e = two_magnon_energy(roots, params.j1, dm);
        let resid = (&sector.matrix * &f - &f * C64::new(e, 0.0)).norm();
        if resid > 1e-8 {
            return Err(Error::NonConvergence { i1: roots.i1, i2: roots.i2, residual: resid });
        }
        energies.push(e);
        columns.push(f);
    }

    // Projector onto the orthogonal complement of the Bethe span.
    let mut proj = DMatrix::<C64>::identity(dim, dim);
    for f in &columns {
        proj -= f * f.adjoint();
    }
    let restricted = &proj * &sector.matrix * &proj;
    let (vals, vecs) = eigh(&restricted);
    // Complement eigenvectors have nonzero eigenvalue-norm inside proj; the
    // Bethe span shows up as (near) zero vectors of proj.
    for i in 0..dim {
        let v = vecs.column(i);
        let in_complement = (&proj * v).norm();
        if in_complement > 0.5 {
            if energies.len() == dim {
                break;
            }
            energies.push(vals[i]);
            columns.push(v.into_owned());
        }
    }
    if columns.len() != dim {
        return Err(Error::InvalidState(format!(
            "Bethe basis completion produced {} of {dim} states",
            columns.len()
        )));
    }
    let mut out = DMatrix::<C64>::zeros(dim, dim);
    for (i, c) in columns.iter().enumerate() {
        out.set_column(i, c);
    }
    Ok((energies, out))
}

/// Infinite-time value C(∞) = 1 - ℱ with ℱ the diagonal-ensemble sums for
/// the initial eigenstate `n1`:
/// ℱ = (V_{pp} W_{pp})² + Σ_{q≠p} [V_{pp} W_{pq} V_{qq} W_{qp}
///   + V_{pq} W_{qq} V_{qp} W_{pp}],  p = n1.
pub fn otoc_infinite_time(data: &SpectralData, n1: usize) -> f64 {
    let p = n1;
    let (v, w) = (&data.sigma_v, &data.sigma_w);
    let mut f = (v[(p, p)] * w[(p, p)]).powu(2);
    for q in 0..data.dim() {
        if q == p {
            continue;
        }
        f += v[(p, p)] * w[(p, q)] * v[(q, q)] * w[(q, p)];
        f += v[(p, q)] * w[(q, q)] * v[(q, p)] * w[(p, p)];
    }
    1.0 - f.re
}

/// Dense commutator-norm oracle: ½ ⟨ψ|[σ_w(t), σ_v]†[σ_w(t), σ_v]|ψ⟩ with
/// σ_w(t) = e^{iHt} σ_w e^{-iHt} on the sector Hamiltonian. The ½ matches
/// the spectral sum's 1 - Re F normalization.
pub fn otoc_commutator_oracle(
    sector: &SectorHamiltonian,
    pair: &PerturbationPair,
    grid: &TimeGrid,
    state: &[C64],
    branch: Branch,
) -> Result<OtocCurve> {
    let dim = sector.dim();
    if state.len() != dim {
        return Err(Error::DimensionMismatch { expected: dim, got: state.len() });
    }
    let norm: f64 = state.iter().map(|c| c.norm_sqr()).sum();
    if (norm - 1.0).abs() > 1e-10 {
        return Err(Error::InvalidState(format!("oracle state norm² = {norm}")));
    }
    let (vals, vecs) = eigh(&sector.matrix);
    let w_diag = sector.sigma_z_diagonal(pair.site_w);
    let v_diag = sector.sigma_z_diagonal(pair.site_v);
    let psi = DVector::from_column_slice(state);

    let mut values = Vec::with_capacity(grid.count);
    for t in grid.times() {
        // U = e^{-iHt} in the flip basis.
        let mut phased = vecs.clone();
        for (c, &e) in vals.iter().enumerate() {
            let ph = C64::new(0.0, -e * t).exp();
            for r in 0..dim {
                phased[(r, c)] *= ph;
            }
        }
        let u = &phased * vecs.adjoint();
        // W(t) = U† W U with W diagonal in this basis.
        let mut wu = u.clone();
        for (r, &s) in w_diag.iter().enumerate() {
            for c in 0..dim {
                wu[(r, c)] *= s;
            }
        }
        let wt = u.adjoint() * wu;
        // [W(t), V] with V diagonal.
        let mut comm = wt.clone();
        for r in 0..dim {
            for c in 0..dim {
                comm[(r, c)] = wt[(r, c)] * v_diag[c] - v_diag[r] * wt[(r, c)];
            }
        }
        let cv = &comm * &psi;
        values.push(0.5 * cv.norm_squared());
    }
    Ok(OtocCurve { grid: *grid, values, branch, n1: 0 })
}
