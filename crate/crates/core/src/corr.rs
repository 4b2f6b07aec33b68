//! Two-point `S^z S^z` correlation matrices and their structural checks.

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::basis::Wavefunction;
use crate::ed::FullSpectrum;
use crate::linalg::{max_asymmetry, sym_eigen_ascending};
use crate::mps::MpsState;
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Provenance {
    EdGround,
    Mps,
    Thermal { beta: f64 },
    /// Read back from a file; origin unknown.
    External,
}

#[derive(Clone, Debug)]
pub struct CorrelationMatrix {
    pub n_sites: usize,
    pub entries: DMatrix<f64>,
    pub provenance: Provenance,
}

/// Measured deviations from the structural invariants. Small is good for
/// every field except `min_eigenvalue`, which should be `>= -tol`.
#[derive(Clone, Debug, Serialize)]
pub struct InvariantReport {
    pub asymmetry: f64,
    pub diagonal_deviation: f64,
    pub min_eigenvalue: f64,
    pub max_row_sum: f64,
    pub circulant_deviation: f64,
}

impl CorrelationMatrix {
    /// `S_ij = <psi| S^z_i S^z_j |psi> / <psi|psi>`.
    pub fn from_wavefunction(wf: &Wavefunction) -> Result<Self> {
        let n = wf.n_sites();
        let norm2 = wf.norm().powi(2);
        if !(norm2 > 0.0) {
            return Err(Error::ZeroNorm(norm2));
        }
        if wf.basis().sz_total() != Some(0.0) {
            log::warn!(
                "wavefunction is in sector S_z = {:?}; rows will not sum to zero",
                wf.basis().sz_total()
            );
        }
        let configs = wf.basis().configs();
        let weights: Vec<f64> = wf.amps().iter().map(|a| a * a / norm2).collect();
        let entries = weighted_config_matrix(n, configs.iter().map(|c| c.0), &weights);
        Ok(Self {
            n_sites: n,
            entries,
            provenance: Provenance::EdGround,
        })
    }

    pub fn from_mps(state: &MpsState) -> Result<Self> {
        Ok(Self {
            n_sites: state.n_sites(),
            entries: state.correlation_matrix()?,
            provenance: Provenance::Mps,
        })
    }

    /// Canonical-ensemble average over every eigenstate of `spectrum`.
    /// `beta = 0` is evaluated as the exact infinite-temperature trace.
    pub fn thermal(spectrum: &FullSpectrum, beta: f64) -> Result<Self> {
        if !(beta >= 0.0) || !beta.is_finite() {
            return Err(Error::Domain(format!("inverse temperature must be finite and >= 0, got {beta}")));
        }
        let n = spectrum.n_sites;
        let e0 = spectrum.ground_energy();
        let z: f64 = spectrum
            .sectors
            .iter()
            .flat_map(|s| s.energies.iter())
            .map(|e| (-beta * (e - e0)).exp())
            .sum();

        let mut configs = Vec::new();
        let mut weights = Vec::new();
        for sector in &spectrum.sectors {
            configs.extend(sector.basis.configs().iter().map(|c| c.0));
            if beta == 0.0 {
                weights.extend(std::iter::repeat_n(1.0 / 2f64.powi(n as i32), sector.basis.dim()));
                continue;
            }
            let boltz: Vec<f64> = sector.energies.iter().map(|e| (-beta * (e - e0)).exp() / z).collect();
            let v = &sector.vectors;
            for c in 0..v.nrows() {
                let mut p = 0.0;
                for (k, b) in boltz.iter().enumerate() {
                    p += b * v[(c, k)] * v[(c, k)];
                }
                weights.push(p);
            }
        }
        let entries = weighted_config_matrix(n, configs.into_iter(), &weights);
        Ok(Self {
            n_sites: n,
            entries,
            provenance: Provenance::Thermal { beta },
        })
    }

    /// Wraps an existing matrix, mirroring the upper triangle if the input
    /// is symmetric within `1e-12` relative.
    pub fn from_matrix(entries: DMatrix<f64>) -> Result<Self> {
        if entries.nrows() != entries.ncols() {
            return Err(Error::Format(format!(
                "correlation matrix must be square, got {}x{}",
                entries.nrows(),
                entries.ncols()
            )));
        }
        let asym = max_asymmetry(&entries);
        let scale = entries.iter().fold(0.0f64, |a, x| a.max(x.abs())).max(1.0);
        if asym > 1e-12 * scale {
            return Err(Error::NotSymmetric(asym));
        }
        let mut entries = entries;
        let n = entries.nrows();
        for r in 0..n {
            for c in (r + 1)..n {
                entries[(c, r)] = entries[(r, c)];
            }
        }
        Ok(Self {
            n_sites: n,
            entries,
            provenance: Provenance::External,
        })
    }

    pub fn trace(&self) -> f64 {
        self.entries.trace()
    }

    pub fn check_invariants(&self) -> InvariantReport {
        let n = self.n_sites;
        let s = &self.entries;
        let diagonal_deviation = (0..n).map(|i| (s[(i, i)] - 0.25).abs()).fold(0.0, f64::max);
        let max_row_sum = s.row_iter().map(|r| r.sum().abs()).fold(0.0, f64::max);
        let mut circulant_deviation = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                let d = (j + n - i) % n;
                circulant_deviation = circulant_deviation.max((s[(i, j)] - s[(0, d)]).abs());
            }
        }
        let (vals, _) = sym_eigen_ascending(s.clone());
        InvariantReport {
            asymmetry: max_asymmetry(s),
            diagonal_deviation,
            min_eigenvalue: vals[0],
            max_row_sum,
            circulant_deviation,
        }
    }
}

/// `sum_c w_c s_i(c) s_j(c) / 4` over configurations given as bit words.
fn weighted_config_matrix(n: usize, configs: impl Iterator<Item = u64>, weights: &[f64]) -> DMatrix<f64> {
    let configs: Vec<u64> = configs.collect();
    debug_assert_eq!(configs.len(), weights.len());
    let rows: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut row = vec![0.0; n];
            for (c, w) in configs.iter().zip(weights) {
                let si = if (c >> i) & 1 == 1 { 1.0 } else { -1.0 };
                for (jj, slot) in row.iter_mut().enumerate().skip(i + 1) {
                    let sj = if (c >> jj) & 1 == 1 { 1.0 } else { -1.0 };
                    *slot += w * si * sj;
                }
            }
            row
        })
        .collect();
    let mut out = DMatrix::zeros(n, n);
    for i in 0..n {
        out[(i, i)] = 0.25;
        for jj in (i + 1)..n {
            out[(i, jj)] = 0.25 * rows[i][jj];
            out[(jj, i)] = 0.25 * rows[i][jj];
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::SectorBasis;
    use crate::ed::{full_spectrum, lanczos_ground_state, LanczosConfig};
    use std::sync::Arc;

    fn ground(n: usize) -> Wavefunction {
        let basis = Arc::new(SectorBasis::enumerate(n, 0.0).unwrap());
        lanczos_ground_state(basis, 1.0, &LanczosConfig::default()).unwrap().wf
    }

    #[test]
    fn four_site_exact_entries() {
        let s = CorrelationMatrix::from_wavefunction(&ground(4)).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                let want = match (j + 4 - i) % 4 {
                    0 => 0.25,
                    2 => 1.0 / 12.0,
                    _ => -1.0 / 6.0,
                };
                assert!((s.entries[(i, j)] - want).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn entries_match_wavefunction_correlators() {
        let wf = ground(10);
        let s = CorrelationMatrix::from_wavefunction(&wf).unwrap();
        for i in 0..10 {
            for j in 0..10 {
                assert!((s.entries[(i, j)] - wf.correlator_zz(i, j).unwrap()).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn ground_state_invariants_n12() {
        let s = CorrelationMatrix::from_wavefunction(&ground(12)).unwrap();
        let r = s.check_invariants();
        assert_eq!(r.asymmetry, 0.0);
        assert!(r.diagonal_deviation < 1e-12);
        assert!(r.min_eigenvalue > -1e-10);
        assert!(r.max_row_sum < 1e-12);
        assert!(r.circulant_deviation < 1e-12);
    }

    #[test]
    fn infinite_temperature_is_diagonal() {
        let spec = full_spectrum(6, 1.0).unwrap();
        let s = CorrelationMatrix::thermal(&spec, 0.0).unwrap();
        assert_eq!(s.entries, DMatrix::identity(6, 6) * 0.25);
    }

    #[test]
    fn negative_beta_rejected() {
        let spec = full_spectrum(4, 1.0).unwrap();
        assert!(matches!(CorrelationMatrix::thermal(&spec, -1.0), Err(Error::Domain(_))));
    }

    #[test]
    fn low_temperature_approaches_ground_state() {
        let spec = full_spectrum(8, 1.0).unwrap();
        let hot = CorrelationMatrix::thermal(&spec, 100.0).unwrap();
        let cold = CorrelationMatrix::from_wavefunction(&ground(8)).unwrap();
        assert!((hot.entries - cold.entries).abs().max() < 1e-6);
    }

    #[test]
    fn from_matrix_rejects_bad_input() {
        assert!(CorrelationMatrix::from_matrix(DMatrix::zeros(2, 3)).is_err());
        let m = DMatrix::from_row_slice(2, 2, &[0.25, 0.1, 0.2, 0.25]);
        assert!(matches!(CorrelationMatrix::from_matrix(m), Err(Error::NotSymmetric(_))));
    }
}
