//! Chain configuration, single-magnon spectrum, and sector Hamiltonians.
//!
//! The Hamiltonian J1 Σ S_i·S_{i+1} + J2 Σ S_i·S_{i+2} + D Σ (S_i × S_{i+1})_z
//! conserves total S^z, so it block-diagonalizes over flipped-site sectors.
//! In the one-flip basis |j⟩ the exchange terms hop the flip with amplitude
//! J/2 and the DM term adds a directional phase: with the sign convention used
//! here, moving a flip from site s to s+1 carries J1/2 - i D̃/2 and the reverse
//! move the conjugate, where D̃ = +D for `Branch::Plus` and -D for
//! `Branch::Minus`. This makes the plane waves (1/√L) Σ_j e^{-i 2π n j/L} |j⟩
//! exact eigenvectors with energy ω_n = J1 cos k + J2 cos 2k + D̃ sin k,
//! k = 2π n / L, so the two branches are the left/right propagating (mirror
//! image) chains.

use crate::error::{Error, Result};
use crate::C64;
use nalgebra::DMatrix;
use std::f64::consts::PI;

/// Chirality branch: sign of the DM term in the dispersion, i.e. the
/// propagation handedness on the ring.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    Plus,
    Minus,
}

impl Branch {
    pub fn sign(self) -> f64 {
        match self {
            Branch::Plus => 1.0,
            Branch::Minus => -1.0,
        }
    }
}

impl std::fmt::Display for Branch {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Branch::Plus => write!(f, "plus"),
            Branch::Minus => write!(f, "minus"),
        }
    }
}

impl std::str::FromStr for Branch {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "plus" | "+" => Ok(Branch::Plus),
            "minus" | "-" => Ok(Branch::Minus),
            other => Err(Error::InvalidParams(format!("unknown branch `{other}`"))),
        }
    }
}

/// Physical configuration of the ring.
#[derive(Debug, Clone, Copy)]
pub struct ChainParams {
    /// Number of sites, L ≥ 2.
    pub length: usize,
    /// Nearest-neighbor exchange (ferromagnetic for J1 < 0).
    pub j1: f64,
    /// Next-nearest-neighbor exchange (frustrating for J2 > 0).
    pub j2: f64,
    /// Dzyaloshinskii-Moriya constant.
    pub dm: f64,
    /// Longitudinal field B^z (enters only as a uniform sector shift).
    pub field_z: f64,
    /// Chirality branch.
    pub branch: Branch,
}

impl ChainParams {
    pub fn new(length: usize, j1: f64, j2: f64, dm: f64, branch: Branch) -> Result<Self> {
        let p = ChainParams {
            length,
            j1,
            j2,
            dm,
            field_z: 0.0,
            branch,
        };
        p.validate()?;
        Ok(p)
    }

    /// The configuration used for every worked example: J1 = -1, J2 = 1,
    /// D = 1/2.
    pub fn paper(length: usize, branch: Branch) -> Self {
        ChainParams::new(length, -1.0, 1.0, 0.5, branch).expect("valid")
    }

    pub fn validate(&self) -> Result<()> {
        if self.length < 2 {
            return Err(Error::InvalidParams(format!(
                "chain length must be ≥ 2, got {}",
                self.length
            )));
        }
        for (name, v) in [
            ("J1", self.j1),
            ("J2", self.j2),
            ("D", self.dm),
            ("Bz", self.field_z),
        ] {
            if !v.is_finite() {
                return Err(Error::InvalidParams(format!("{name} is not finite: {v}")));
            }
        }
        Ok(())
    }

    pub fn with_branch(mut self, branch: Branch) -> Self {
        self.branch = branch;
        self
    }

    /// DM constant with the branch sign applied.
    pub fn signed_dm(&self) -> f64 {
        self.branch.sign() * self.dm
    }

    /// Parameters of the rotated (XXZ-like) frame.
    pub fn transformed(&self) -> TransformedParams {
        TransformedParams::from_chain(self)
    }
}

/// Couplings after the site-dependent rotation that removes the DM phase from
/// the nearest-neighbor bond.
#[derive(Debug, Clone, Copy)]
pub struct TransformedParams {
    /// J1' = sqrt(J1² + D²).
    pub j1p: f64,
    /// J2' = J2 (J1² - D²) / (J1² + D²).
    pub j2p: f64,
    /// D' = D J1 J2 / (J1² + D²).
    pub dmp: f64,
    /// Rotation angle Θ = -arctan(D / J1).
    pub theta: f64,
    /// Anisotropy sqrt(J1² + D²) / J1 quoted for the J2 = 0 reduction.
    pub delta: f64,
}

impl TransformedParams {
    pub fn from_chain(p: &ChainParams) -> Self {
        let q = p.j1 * p.j1 + p.dm * p.dm;
        TransformedParams {
            j1p: q.sqrt(),
            j2p: p.j2 * (p.j1 * p.j1 - p.dm * p.dm) / q,
            dmp: p.dm * p.j1 * p.j2 / q,
            theta: -(p.dm / p.j1).atan(),
            delta: q.sqrt() / p.j1,
        }
    }
}

/// One plane-wave magnon mode of the finite ring.
#[derive(Debug, Clone)]
pub struct MagnonMode {
    /// Mode index n ∈ {0, …, L-1}.
    pub index: usize,
    /// Momentum k = 2π n / L.
    pub momentum: f64,
    /// Energy ω_n for the configured branch (plus B^z).
    pub omega: f64,
    /// Site amplitudes e^{-i 2π n j / L} / √L, j = 1..L.
    pub amplitudes: Vec<C64>,
}

/// Branch-resolved dispersion ε(k) = J1 cos k + J2 cos 2k ± D sin k.
pub fn dispersion(params: &ChainParams, k: f64) -> f64 {
    params.j1 * k.cos() + params.j2 * (2.0 * k).cos() + params.signed_dm() * k.sin()
}

/// Group velocity dε/dk for the configured branch.
pub fn group_velocity(params: &ChainParams, k: f64) -> f64 {
    -params.j1 * k.sin() - 2.0 * params.j2 * (2.0 * k).sin() + params.signed_dm() * k.cos()
}

/// v_g⁺(k) - v_g⁻(k); equals 2 D cos k.
pub fn group_velocity_mismatch(params: &ChainParams, k: f64) -> f64 {
    let plus = params.with_branch(Branch::Plus);
    let minus = params.with_branch(Branch::Minus);
    group_velocity(&plus, k) - group_velocity(&minus, k)
}

/// All L magnon modes of the ring for the configured branch.
pub fn magnon_spectrum(params: &ChainParams) -> Vec<MagnonMode> {
    let l = params.length;
    let norm = 1.0 / (l as f64).sqrt();
    (0..l)
        .map(|n| {
            let k = 2.0 * PI * n as f64 / l as f64;
            let amplitudes = (1..=l)
                .map(|j| (C64::new(0.0, -k * j as f64)).exp() * norm)
                .collect();
            MagnonMode {
                index: n,
                momentum: k,
                omega: dispersion(params, k) + params.field_z,
                amplitudes,
            }
        })
        .collect()
}

/// A fixed-S^z block of the Hamiltonian over the flipped-site basis.
#[derive(Debug, Clone)]
pub struct SectorHamiltonian {
    /// Dense Hermitian matrix.
    pub matrix: DMatrix<C64>,
    /// Flipped sites (1-based) labelling each basis state, in index order.
    /// One excitation: `[j]` for j = 1..L. Two: `[a, b]` with a < b, ordered
    /// lexicographically.
    pub basis: Vec<Vec<usize>>,
}

impl SectorHamiltonian {
    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// Basis index of a flip configuration, if present.
    pub fn index_of(&self, flips: &[usize]) -> Option<usize> {
        let mut sorted = flips.to_vec();
        sorted.sort_unstable();
        self.basis.iter().position(|b| *b == sorted)
    }

    /// Diagonal of σ^z at `site` (1-based) in this basis: -1 on flipped
    /// sites, +1 elsewhere.
    pub fn sigma_z_diagonal(&self, site: usize) -> Vec<f64> {
        self.basis
            .iter()
            .map(|flips| if flips.contains(&site) { -1.0 } else { 1.0 })
            .collect()
    }
}

/// Lexicographically ordered two-flip basis (1-based site pairs).
pub fn pair_basis(l: usize) -> Vec<(usize, usize)> {
    let mut out = Vec::with_capacity(l * (l - 1) / 2);
    for a in 1..=l {
        for b in (a + 1)..=l {
            out.push((a, b));
        }
    }
    out
}

/// Builds the dense Hamiltonian restricted to the sector with the given
/// number of flipped spins (1 or 2), periodic boundaries, S = σ/2.
pub fn build_sector_hamiltonian(params: &ChainParams, excitations: usize) -> Result<SectorHamiltonian> {
    params.validate()?;
    if excitations != 1 && excitations != 2 {
        return Err(Error::UnsupportedSector(excitations));
    }
    if params.length < 2 * excitations {
        return Err(Error::InvalidParams(format!(
            "need L ≥ {} for {} excitations, got {}",
            2 * excitations,
            excitations,
            params.length
        )));
    }
    let l = params.length;
    let dm = params.signed_dm();
    let zeeman = -params.field_z * (l as f64 / 2.0 - excitations as f64);

    let basis: Vec<Vec<usize>> = match excitations {
        1 => (1..=l).map(|j| vec![j]).collect(),
        _ => pair_basis(l).into_iter().map(|(a, b)| vec![a, b]).collect(),
    };
    let index: std::collections::HashMap<Vec<usize>, usize> = basis
        .iter()
        .enumerate()
        .map(|(i, b)| (b.clone(), i))
        .collect();

    let dim = basis.len();
    let mut h = DMatrix::<C64>::zeros(dim, dim);

    for (col, flips) in basis.iter().enumerate() {
        let occupied: Vec<usize> = flips.clone();
        // Diagonal: S^z S^z over every bond plus the Zeeman shift.
        let mut diag = zeeman;
        for (range, jc) in [(1usize, params.j1), (2usize, params.j2)] {
            for s in 1..=l {
                let t = wrap(s + range, l);
                let same = occupied.contains(&s) == occupied.contains(&t);
                diag += jc * if same { 0.25 } else { -0.25 };
            }
        }
        h[(col, col)] += C64::new(diag, 0.0);

        // Hops: a flip at s moves to s ± range if the target is unoccupied.
        // Nearest-neighbor hops to the right carry J1/2 - i D̃/2.
        for (range, jc) in [(1usize, params.j1), (2usize, params.j2)] {
            for &s in &occupied {
                for dir in [1i64, -1i64] {
                    let t = wrap_i(s as i64 + dir * range as i64, l);
                    if occupied.contains(&t) {
                        continue;
                    }
                    let mut new: Vec<usize> =
                        occupied.iter().copied().filter(|&x| x != s).collect();
                    new.push(t);
                    new.sort_unstable();
                    let row = index[&new];
                    let mut amp = C64::new(jc / 2.0, 0.0);
                    if range == 1 {
                        amp += C64::new(0.0, if dir == 1 { -dm / 2.0 } else { dm / 2.0 });
                    }
                    h[(row, col)] += amp;
                }
            }
        }
    }

    Ok(SectorHamiltonian { matrix: h, basis })
}

fn wrap(site: usize, l: usize) -> usize {
    (site - 1) % l + 1
}

fn wrap_i(site: i64, l: usize) -> usize {
    (site - 1).rem_euclid(l as i64) as usize + 1
}
