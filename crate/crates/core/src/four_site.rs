//! Closed-form results for the four-site ring, plus the small pipeline
//! helpers (reduced density matrices, entropies) that reproduce them.
//!
//! Two-site bases are ordered `↑↑, ↑↓, ↓↑, ↓↓` with the first listed site
//! as the leading spin.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::basis::Wavefunction;
use crate::linalg::sym_eigen_ascending;
use crate::svd::eigendecompose_matrix;
use crate::{Error, Result};

/// `S_z = 0` configurations of four sites as bit words (bit `i` up at site
/// `i`): `↑↑↓↓, ↑↓↑↓, ↑↓↓↑, ↓↑↑↓, ↓↑↓↑, ↓↓↑↑`.
pub const CONFIGS: [u64; 6] = [0b0011, 0b0101, 0b1001, 0b0110, 0b1010, 0b1100];

pub fn ground_state() -> [f64; 6] {
    let c = 1.0 / 12f64.sqrt();
    [-c, 2.0 * c, -c, -c, 2.0 * c, -c]
}

/// Reduced state of sites 0 and 1.
pub fn rho_ab() -> DMatrix<f64> {
    let (a, b, o) = (1.0 / 12.0, 5.0 / 12.0, -1.0 / 3.0);
    DMatrix::from_row_slice(4, 4, &[a, 0.0, 0.0, 0.0, 0.0, b, o, 0.0, 0.0, o, b, 0.0, 0.0, 0.0, 0.0, a])
}

pub fn rho_a() -> DMatrix<f64> {
    DMatrix::identity(2, 2) * 0.5
}

pub fn entropy_ab() -> f64 {
    2.0 * 2f64.ln() - 0.5 * 3f64.ln()
}

pub fn entropy_a() -> f64 {
    2f64.ln()
}

pub fn mutual_information() -> f64 {
    0.5 * 3f64.ln()
}

pub fn correlation_matrix() -> DMatrix<f64> {
    DMatrix::from_fn(4, 4, |i, j| match (j + 4 - i) % 4 {
        0 => 0.25,
        2 => 1.0 / 12.0,
        _ => -1.0 / 6.0,
    })
}

pub fn singular_values() -> [f64; 4] {
    [2.0 / 3.0, 1.0 / 6.0, 1.0 / 6.0, 0.0]
}

/// `S^(1)`: one sixth of the alternating-sign matrix.
pub fn neel_component() -> DMatrix<f64> {
    DMatrix::from_fn(4, 4, |i, j| if (i + j) % 2 == 0 { 1.0 / 6.0 } else { -1.0 / 6.0 })
}

/// `S^(2) + S^(3)`: the `k = pi/2` pair.
pub fn pair_component() -> DMatrix<f64> {
    DMatrix::from_fn(4, 4, |i, j| match (j + 4 - i) % 4 {
        0 => 1.0 / 12.0,
        2 => -1.0 / 12.0,
        _ => 0.0,
    })
}

/// Néel part and one-domain part of the ground state on `CONFIGS`.
pub fn psi_split() -> ([f64; 6], [f64; 6]) {
    let g = ground_state();
    let mut psi1 = [0.0; 6];
    let mut psi2 = [0.0; 6];
    for k in 0..6 {
        if CONFIGS[k] == 0b0101 || CONFIGS[k] == 0b1010 {
            psi1[k] = g[k];
        } else {
            psi2[k] = g[k];
        }
    }
    (psi1, psi2)
}

/// `<S^z_i S^z_j>` summed over a (not necessarily normalized) amplitude
/// vector on `CONFIGS`.
pub fn zz_matrix(amps: &[f64; 6]) -> DMatrix<f64> {
    DMatrix::from_fn(4, 4, |i, j| {
        CONFIGS
            .iter()
            .zip(amps)
            .map(|(c, a)| {
                let si = if (c >> i) & 1 == 1 { 0.5 } else { -0.5 };
                let sj = if (c >> j) & 1 == 1 { 0.5 } else { -0.5 };
                a * a * si * sj
            })
            .sum()
    })
}

/// Reduced density matrix of `wf` on `sites`, basis ordered with up before
/// down and the first listed site leading.
pub fn reduced_density_matrix(wf: &Wavefunction, sites: &[usize]) -> Result<DMatrix<f64>> {
    let n = wf.n_sites();
    for (k, &s) in sites.iter().enumerate() {
        if s >= n {
            return Err(Error::SiteIndex { site: s, n_sites: n });
        }
        if sites[..k].contains(&s) {
            return Err(Error::Domain(format!("site {s} listed twice")));
        }
    }
    let m = sites.len();
    let local = |c: u64| -> usize {
        sites
            .iter()
            .fold(0usize, |acc, &s| (acc << 1) | if (c >> s) & 1 == 1 { 0 } else { 1 })
    };
    let env_mask: u64 = !sites.iter().fold(0u64, |acc, &s| acc | (1 << s));
    let mut rho = DMatrix::zeros(1 << m, 1 << m);
    let configs = wf.basis().configs();
    let amps = wf.amps();
    let norm2 = wf.norm().powi(2);
    // group configurations by their environment bits
    let mut order: Vec<usize> = (0..configs.len()).collect();
    order.sort_by_key(|&k| (configs[k].0 & env_mask, configs[k].0));
    let mut start = 0;
    while start < order.len() {
        let env = configs[order[start]].0 & env_mask;
        let mut end = start;
        while end < order.len() && configs[order[end]].0 & env_mask == env {
            end += 1;
        }
        for &a in &order[start..end] {
            for &b in &order[start..end] {
                rho[(local(configs[a].0), local(configs[b].0))] += amps[a] * amps[b] / norm2;
            }
        }
        start = end;
    }
    Ok(rho)
}

/// `-tr(rho ln rho)`, natural log; eigenvalues below `1e-15` contribute 0.
pub fn von_neumann_entropy(rho: &DMatrix<f64>) -> f64 {
    let (vals, _) = sym_eigen_ascending(rho.clone());
    vals.iter().filter(|&&p| p > 1e-15).map(|p| -p * p.ln()).sum()
}

/// Comparison of the Néel / one-domain split against the rank-1
/// components of the correlation matrix.
#[derive(Clone, Debug, Serialize)]
pub struct DecompositionReport {
    pub overlap: f64,
    /// `max |S_1 - S^(1)|`.
    pub neel_error: f64,
    /// `max |S_2 - 4 (S^(2) + S^(3))|`.
    pub scaled_pair_error: f64,
    /// `max |S_2 - (S^(2) + S^(3))|`.
    pub pair_error: f64,
    /// Least-squares factor `c` in `S_2 ≈ c (S^(2) + S^(3))`.
    pub pair_factor: f64,
    pub s1: Vec<Vec<f64>>,
    pub s2: Vec<Vec<f64>>,
    pub pair_sum: Vec<Vec<f64>>,
}

pub fn decomposition_check() -> Result<DecompositionReport> {
    let (psi1, psi2) = psi_split();
    let s1 = zz_matrix(&psi1);
    let s2 = zz_matrix(&psi2);
    let spec = eigendecompose_matrix(&correlation_matrix())?;
    let c1 = spec.component(1)?.matrix;
    let pair = spec.component(2)?.matrix + spec.component(3)?.matrix;
    let max_diff = |a: &DMatrix<f64>, b: &DMatrix<f64>| (a - b).abs().max();
    Ok(DecompositionReport {
        overlap: psi1.iter().zip(&psi2).map(|(a, b)| a * b).sum(),
        neel_error: max_diff(&s1, &c1),
        scaled_pair_error: max_diff(&s2, &(&pair * 4.0)),
        pair_error: max_diff(&s2, &pair),
        pair_factor: s2.dot(&pair) / pair.dot(&pair),
        s1: rows(&s1),
        s2: rows(&s2),
        pair_sum: rows(&pair),
    })
}

pub fn rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct Entropies {
    pub s_ab: f64,
    pub s_a: f64,
    pub s_b: f64,
    pub mutual_information: f64,
}

/// Every reference value, in a form ready for JSON.
#[derive(Clone, Debug, Serialize)]
pub struct FourSiteReference {
    pub configs: Vec<String>,
    pub ground_state: Vec<f64>,
    pub energy: f64,
    pub rho_a: Vec<Vec<f64>>,
    pub rho_ab: Vec<Vec<f64>>,
    pub entropies: Entropies,
    pub corr: Vec<Vec<f64>>,
    pub singular_values: Vec<f64>,
    pub components: Vec<Vec<Vec<f64>>>,
    pub psi_split: [Vec<f64>; 2],
    pub decomposition: DecompositionReport,
}

pub fn reference() -> Result<FourSiteReference> {
    let (psi1, psi2) = psi_split();
    let spec = eigendecompose_matrix(&correlation_matrix())?;
    let components = (1..=3)
        .map(|n| spec.component(n).map(|c| rows(&c.matrix)))
        .collect::<Result<Vec<_>>>()?;
    Ok(FourSiteReference {
        configs: CONFIGS
            .iter()
            .map(|c| (0..4).map(|i| if (c >> i) & 1 == 1 { '↑' } else { '↓' }).collect())
            .collect(),
        ground_state: ground_state().to_vec(),
        energy: -2.0,
        rho_a: rows(&rho_a()),
        rho_ab: rows(&rho_ab()),
        entropies: Entropies {
            s_ab: entropy_ab(),
            s_a: entropy_a(),
            s_b: entropy_a(),
            mutual_information: mutual_information(),
        },
        corr: rows(&correlation_matrix()),
        singular_values: singular_values().to_vec(),
        components,
        psi_split: [psi1.to_vec(), psi2.to_vec()],
        decomposition: decomposition_check()?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::SectorBasis;
    use crate::ed::{lanczos_ground_state, LanczosConfig};
    use std::sync::Arc;

    fn oracle_wf() -> Wavefunction {
        let basis = Arc::new(SectorBasis::enumerate(4, 0.0).unwrap());
        let mut amps = vec![0.0; 6];
        for (c, a) in CONFIGS.iter().zip(ground_state()) {
            amps[basis.index_of(crate::basis::SpinConfiguration(*c)).unwrap()] = a;
        }
        Wavefunction::new(basis, amps).unwrap()
    }

    #[test]
    fn ground_state_is_normalized_eigenstate() {
        let wf = oracle_wf();
        assert!((wf.norm() - 1.0).abs() < 1e-15);
        assert!((wf.energy(1.0) + 2.0).abs() < 1e-14);
        let sol = lanczos_ground_state(Arc::clone(wf.basis()), 1.0, &LanczosConfig::default()).unwrap();
        let overlap = sol.wf.dot(&wf).abs();
        assert!((overlap - 1.0).abs() < 1e-10);
    }

    #[test]
    fn density_matrices_from_wavefunction() {
        let wf = oracle_wf();
        let rab = reduced_density_matrix(&wf, &[0, 1]).unwrap();
        assert!((&rab - rho_ab()).abs().max() < 1e-15);
        let ra = reduced_density_matrix(&wf, &[0]).unwrap();
        assert!((&ra - rho_a()).abs().max() < 1e-15);
        let trace_b = DMatrix::from_fn(2, 2, |r, c| rab[(2 * r, 2 * c)] + rab[(2 * r + 1, 2 * c + 1)]);
        assert!((trace_b - rho_a()).abs().max() < 1e-15);
        let (vals, _) = sym_eigen_ascending(rho_ab());
        for (v, want) in vals.iter().zip([1.0, 1.0, 1.0, 9.0]) {
            assert!((v - want / 12.0).abs() < 1e-15);
        }
    }

    #[test]
    fn entropies_match_closed_forms() {
        assert!((von_neumann_entropy(&rho_ab()) - entropy_ab()).abs() < 1e-12);
        assert!((von_neumann_entropy(&rho_a()) - entropy_a()).abs() < 1e-12);
        assert!((entropy_ab() - 0.8369882).abs() < 1e-7);
        assert!((mutual_information() - 0.5493061).abs() < 1e-7);
        assert!((2.0 * entropy_a() - entropy_ab() - mutual_information()).abs() < 1e-15);
    }

    #[test]
    fn components_match_closed_forms() {
        let spec = eigendecompose_matrix(&correlation_matrix()).unwrap();
        assert!((spec.component(1).unwrap().matrix - neel_component()).abs().max() < 1e-14);
        let pair = spec.component(2).unwrap().matrix + spec.component(3).unwrap().matrix;
        assert!((pair - pair_component()).abs().max() < 1e-14);
    }

    #[test]
    fn split_reproduces_components() {
        let r = decomposition_check().unwrap();
        assert_eq!(r.overlap, 0.0);
        assert!(r.neel_error < 1e-14);
        // the one-domain part equals the pair sum itself, not four times it
        assert!(r.pair_error < 1e-14);
        assert!((r.pair_factor - 1.0).abs() < 1e-14);
        assert!((r.scaled_pair_error - 0.25).abs() < 1e-14);
        let total = zz_matrix(&psi_split().0) + zz_matrix(&psi_split().1);
        assert!((total - correlation_matrix()).abs().max() < 1e-15);
    }

    #[test]
    fn reference_serializes() {
        let json = serde_json::to_value(reference().unwrap()).unwrap();
        assert_eq!(json["configs"][1], "↑↓↑↓");
        assert_eq!(json["singular_values"].as_array().unwrap().len(), 4);
    }
}
