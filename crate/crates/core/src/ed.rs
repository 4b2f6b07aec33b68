//! Exact diagonalization: Lanczos for the ground state of one sector and
//! dense diagonalization of every sector for small rings.

use std::sync::Arc;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::basis::{apply_hamiltonian_into, check_chain_length, dot, SectorBasis, SpinConfiguration, Wavefunction};
use crate::error::{Error, Result};
use crate::linalg::sym_eigen_ascending;

/// Largest ring for which [`full_spectrum`] is allowed.
pub const FULL_SPECTRUM_MAX_SITES: usize = 12;

/// Minimum separation of the two lowest Ritz values.
const GAP_GUARD: f64 = 1e-8;

#[derive(Clone, Debug)]
pub struct LanczosConfig {
    /// Convergence threshold on the change of the lowest Ritz value.
    pub energy_tol: f64,
    /// Largest residual `|H v - E v|` accepted for the returned pair.
    pub residual_tol: f64,
    /// Budget of Hamiltonian applications over all restarts.
    pub max_iter: usize,
    /// Krylov vectors kept before an explicit restart.
    pub krylov_dim: usize,
    /// Seed of the start vector.
    pub seed: u64,
}

impl Default for LanczosConfig {
    fn default() -> Self {
        Self {
            energy_tol: 1e-12,
            residual_tol: 1e-10,
            max_iter: 3000,
            krylov_dim: 120,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug)]
pub struct GroundSolution {
    pub energy: f64,
    pub wf: Wavefunction,
    pub residual_norm: f64,
    pub iterations: usize,
}

struct Cycle {
    ritz_vector: Vec<f64>,
    ritz_values: Vec<f64>,
}

/// Lowest eigenpair of the Hamiltonian restricted to `basis`.
///
/// Lanczos with full re-orthogonalization and explicit restarts from the
/// current Ritz vector. The returned vector is normalized and its sign is
/// fixed so that the smallest Néel configuration has positive amplitude.
pub fn lanczos_ground_state(basis: Arc<SectorBasis>, j: f64, cfg: &LanczosConfig) -> Result<GroundSolution> {
    let dim = basis.dim();
    if dim == 0 {
        return Err(Error::Domain("empty sector".into()));
    }
    // Iterate past the acceptance threshold: downstream checks on the
    // correlation matrix are two orders tighter than residual_tol.
    let inner_tol = (cfg.residual_tol * 1e-3).max(1e-15);

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut start: Vec<f64> = (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect();
    let mut matvecs = 0usize;
    let mut best: Option<(f64, Vec<f64>, f64)> = None;
    let mut gap: Option<f64> = None;
    let mut hx = vec![0.0; dim];

    while matvecs < cfg.max_iter {
        let budget = (cfg.max_iter - matvecs).min(cfg.krylov_dim).min(dim);
        let cycle = lanczos_cycle(&basis, j, &start, budget, cfg.energy_tol, inner_tol, &mut matvecs);
        if cycle.ritz_values.len() >= 2 {
            gap = Some(cycle.ritz_values[1] - cycle.ritz_values[0]);
        }
        let x = cycle.ritz_vector;
        apply_hamiltonian_into(&basis, j, &x, &mut hx);
        matvecs += 1;
        let energy = dot(&x, &hx);
        let residual = x
            .iter()
            .zip(&hx)
            .map(|(v, h)| (h - energy * v).powi(2))
            .sum::<f64>()
            .sqrt();
        log::debug!("lanczos restart: E = {energy:.15}, residual = {residual:e}, matvecs = {matvecs}");

        let improved = best.as_ref().is_none_or(|b| residual < 0.5 * b.2);
        let previous = best.as_ref().map(|b| b.2);
        if best.as_ref().is_none_or(|b| residual < b.2) {
            best = Some((energy, x.clone(), residual));
        }
        if residual <= inner_tol || (!improved && previous.is_some_and(|r| r <= cfg.residual_tol)) {
            break;
        }
        start = x;
    }

    let (energy, amps, residual) = best.expect("at least one Lanczos cycle runs");
    if residual > cfg.residual_tol {
        return Err(Error::NoConvergence {
            iterations: matvecs,
            residual,
        });
    }
    if let Some(g) = gap {
        if g <= GAP_GUARD {
            return Err(Error::DegenerateGround { gap: g });
        }
    }
    let amps = fix_sign(&basis, amps);
    let wf = Wavefunction::new(basis, amps)?;
    Ok(GroundSolution {
        energy,
        wf,
        residual_norm: residual,
        iterations: matvecs,
    })
}

fn lanczos_cycle(
    basis: &SectorBasis,
    j: f64,
    start: &[f64],
    max_dim: usize,
    energy_tol: f64,
    residual_tol: f64,
    matvecs: &mut usize,
) -> Cycle {
    let dim = basis.dim();
    let nrm = dot(start, start).sqrt();
    let mut krylov: Vec<Vec<f64>> = vec![start.iter().map(|x| x / nrm).collect()];
    let mut alpha: Vec<f64> = Vec::new();
    let mut beta: Vec<f64> = Vec::new();
    let mut w = vec![0.0; dim];
    let mut prev_theta = f64::INFINITY;
    let (mut ritz_values, mut coeffs);

    loop {
        let m = krylov.len() - 1;
        apply_hamiltonian_into(basis, j, &krylov[m], &mut w);
        *matvecs += 1;
        let a = dot(&krylov[m], &w);
        alpha.push(a);
        // two passes of classical Gram-Schmidt against the whole basis
        for _ in 0..2 {
            for v in &krylov {
                let p = dot(v, &w);
                w.iter_mut().zip(v).for_each(|(wi, vi)| *wi -= p * vi);
            }
        }
        let b = dot(&w, &w).sqrt();

        let k = alpha.len();
        let t = DMatrix::from_fn(k, k, |r, c| {
            if r == c {
                alpha[r]
            } else if r + 1 == c {
                beta[r]
            } else if c + 1 == r {
                beta[c]
            } else {
                0.0
            }
        });
        let (vals, vecs) = sym_eigen_ascending(t);
        let theta = vals[0];
        let est = b * vecs[(k - 1, 0)].abs();
        ritz_values = vals;
        coeffs = vecs.column(0).iter().copied().collect::<Vec<f64>>();

        let breakdown = b <= 1e-13 * a.abs().max(1.0);
        let converged = (prev_theta - theta).abs() < energy_tol && est <= residual_tol;
        if breakdown || converged || k >= max_dim {
            break;
        }
        prev_theta = theta;
        beta.push(b);
        krylov.push(w.iter().map(|x| x / b).collect());
    }

    let mut x = vec![0.0; dim];
    for (v, c) in krylov.iter().zip(&coeffs) {
        x.iter_mut().zip(v).for_each(|(xi, vi)| *xi += c * vi);
    }
    let n = dot(&x, &x).sqrt();
    x.iter_mut().for_each(|xi| *xi /= n);
    Cycle {
        ritz_vector: x,
        ritz_values,
    }
}

fn fix_sign(basis: &SectorBasis, mut amps: Vec<f64>) -> Vec<f64> {
    let anchor = basis
        .index_of(SpinConfiguration::neel(basis.n_sites()))
        .filter(|&k| amps[k].abs() > 1e-12)
        .or_else(|| amps.iter().position(|a| a.abs() > 1e-12));
    if let Some(k) = anchor {
        if amps[k] < 0.0 {
            amps.iter_mut().for_each(|a| *a = -*a);
        }
    }
    amps
}

/// Dense Hamiltonian of one sector.
pub fn sector_matrix(basis: &SectorBasis, j: f64) -> DMatrix<f64> {
    let dim = basis.dim();
    let mut m = DMatrix::zeros(dim, dim);
    let mut e = vec![0.0; dim];
    let mut col = vec![0.0; dim];
    for c in 0..dim {
        e[c] = 1.0;
        apply_hamiltonian_into(basis, j, &e, &mut col);
        m.set_column(c, &nalgebra::DVector::from_column_slice(&col));
        e[c] = 0.0;
    }
    m
}

#[derive(Clone, Debug)]
pub struct SectorSpectrum {
    pub basis: Arc<SectorBasis>,
    /// Ascending.
    pub energies: Vec<f64>,
    /// Eigenvectors as columns, matching `energies`.
    pub vectors: DMatrix<f64>,
}

impl SectorSpectrum {
    pub fn sz_total(&self) -> f64 {
        self.basis.sz_total().expect("sectors of a full spectrum are attainable")
    }

    pub fn state(&self, k: usize) -> Wavefunction {
        let amps = self.vectors.column(k).iter().copied().collect();
        Wavefunction::new(Arc::clone(&self.basis), amps).expect("column length equals basis dimension")
    }
}

/// Every eigenpair of a small ring, grouped by magnetization sector from
/// `S_z = -N/2` to `+N/2`.
#[derive(Clone, Debug)]
pub struct FullSpectrum {
    pub n_sites: usize,
    pub j: f64,
    pub sectors: Vec<SectorSpectrum>,
}

impl FullSpectrum {
    /// All energies, ascending.
    pub fn energies(&self) -> Vec<f64> {
        let mut all: Vec<f64> = self.sectors.iter().flat_map(|s| s.energies.iter().copied()).collect();
        all.sort_by(f64::total_cmp);
        all
    }

    pub fn n_states(&self) -> usize {
        self.sectors.iter().map(|s| s.energies.len()).sum()
    }

    pub fn ground_energy(&self) -> f64 {
        self.sectors
            .iter()
            .map(|s| s.energies[0])
            .fold(f64::INFINITY, f64::min)
    }

    pub fn sector(&self, sz_total: f64) -> Option<&SectorSpectrum> {
        self.sectors.iter().find(|s| s.sz_total() == sz_total)
    }

    /// `tr exp(-beta H)`.
    pub fn partition_function(&self, beta: f64) -> f64 {
        self.sectors
            .iter()
            .flat_map(|s| s.energies.iter())
            .map(|e| (-beta * e).exp())
            .sum()
    }
}

pub fn full_spectrum(n_sites: usize, j: f64) -> Result<FullSpectrum> {
    check_chain_length(n_sites)?;
    if n_sites > FULL_SPECTRUM_MAX_SITES {
        return Err(Error::SizeCap {
            n: n_sites,
            cap: FULL_SPECTRUM_MAX_SITES,
            what: "full-spectrum diagonalization",
        });
    }
    let sectors = (0..=n_sites)
        .into_par_iter()
        .map(|n_up| {
            let basis = Arc::new(SectorBasis::with_up_count(n_sites, n_up));
            let (energies, vectors) = sym_eigen_ascending(sector_matrix(&basis, j));
            SectorSpectrum {
                basis,
                energies,
                vectors,
            }
        })
        .collect();
    Ok(FullSpectrum { n_sites, j, sectors })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sector(n: usize) -> Arc<SectorBasis> {
        Arc::new(SectorBasis::enumerate(n, 0.0).unwrap())
    }

    #[test]
    fn four_site_ground_state() {
        let sol = lanczos_ground_state(sector(4), 1.0, &LanczosConfig::default()).unwrap();
        assert!((sol.energy + 2.0).abs() < 1e-10);
        assert!(sol.residual_norm <= 1e-10);
        let s = 12f64.sqrt();
        let expect = [-1.0 / s, 2.0 / s, -1.0 / s, -1.0 / s, 2.0 / s, -1.0 / s];
        for (a, e) in sol.wf.amps().iter().zip(expect) {
            assert!((a - e).abs() < 1e-10, "{a} vs {e}");
        }
    }

    #[test]
    fn deterministic_for_a_seed() {
        let a = lanczos_ground_state(sector(10), 1.0, &LanczosConfig::default()).unwrap();
        let b = lanczos_ground_state(sector(10), 1.0, &LanczosConfig::default()).unwrap();
        assert_eq!(a.energy.to_bits(), b.energy.to_bits());
        assert_eq!(a.wf.amps(), b.wf.amps());
    }

    #[test]
    fn coupling_scales_energy() {
        let one = lanczos_ground_state(sector(8), 1.0, &LanczosConfig::default()).unwrap();
        let two = lanczos_ground_state(sector(8), 2.0, &LanczosConfig::default()).unwrap();
        assert!((two.energy - 2.0 * one.energy).abs() < 1e-10);
    }

    #[test]
    fn iteration_budget_exhausted() {
        let cfg = LanczosConfig {
            max_iter: 3,
            krylov_dim: 3,
            ..LanczosConfig::default()
        };
        let err = lanczos_ground_state(sector(12), 1.0, &cfg).unwrap_err();
        assert!(matches!(err, Error::NoConvergence { .. }));
    }

    #[test]
    fn ferromagnetic_sector_is_trivial() {
        let b = Arc::new(SectorBasis::enumerate(6, 3.0).unwrap());
        let sol = lanczos_ground_state(b, 1.0, &LanczosConfig::default()).unwrap();
        assert!((sol.energy - 1.5).abs() < 1e-14);
        assert_eq!(sol.wf.amps(), &[1.0]);
    }

    #[test]
    fn full_spectrum_four_sites() {
        let fs = full_spectrum(4, 1.0).unwrap();
        assert_eq!(fs.n_states(), 16);
        let e = fs.energies();
        assert!((e[0] + 2.0).abs() < 1e-12);
        assert!((e[15] - 1.0).abs() < 1e-12);
        assert!((fs.partition_function(0.0) - 16.0).abs() < 1e-12);
        assert_eq!(fs.sectors.len(), 5);
    }

    #[test]
    fn full_spectrum_rejects_large_and_odd() {
        assert!(matches!(full_spectrum(14, 1.0), Err(Error::SizeCap { .. })));
        assert!(matches!(full_spectrum(7, 1.0), Err(Error::InvalidSize(7))));
    }

    #[test]
    fn spin_flip_symmetry() {
        let fs = full_spectrum(8, 1.0).unwrap();
        for s in &fs.sectors {
            let mirror = fs.sector(-s.sz_total()).unwrap();
            for (a, b) in s.energies.iter().zip(&mirror.energies) {
                assert!((a - b).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn sector_eigenvectors_orthonormal() {
        let fs = full_spectrum(8, 1.0).unwrap();
        for s in &fs.sectors {
            let g = s.vectors.transpose() * &s.vectors;
            let d = g - DMatrix::identity(s.energies.len(), s.energies.len());
            assert!(d.abs().max() < 1e-10);
        }
    }
}
