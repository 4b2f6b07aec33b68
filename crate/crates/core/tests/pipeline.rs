use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::Arc;

use heisvd::basis::SectorBasis;
use heisvd::corr::CorrelationMatrix;
use heisvd::ed::{full_spectrum, lanczos_ground_state, LanczosConfig};
use heisvd::mps::{MpsState, SweepConfig};
use heisvd::svd::{self, eigendecompose};
use nalgebra::{DMatrix, DVector, SymmetricEigen};

/// Heisenberg ring on the whole `2^N` space from Pauli Kronecker products.
fn kron_hamiltonian(n: usize) -> DMatrix<f64> {
    let id = DMatrix::<f64>::identity(2, 2);
    // basis |0> = up, |1> = down for this construction
    let sx = DMatrix::from_row_slice(2, 2, &[0.0, 0.5, 0.5, 0.0]);
    let sz = DMatrix::from_row_slice(2, 2, &[0.5, 0.0, 0.0, -0.5]);
    let isy_re = DMatrix::from_row_slice(2, 2, &[0.0, 0.5, -0.5, 0.0]);
    let site_op = |op: &DMatrix<f64>, site: usize| {
        let mut m = DMatrix::<f64>::identity(1, 1);
        for k in 0..n {
            m = m.kronecker(if k == site { op } else { &id });
        }
        m
    };
    let dim = 1 << n;
    let mut h = DMatrix::zeros(dim, dim);
    for i in 0..n {
        let k = (i + 1) % n;
        h += site_op(&sx, i) * site_op(&sx, k);
        h += site_op(&sz, i) * site_op(&sz, k);
        // S^y S^y = -(i S^y)(i S^y)
        h -= site_op(&isy_re, i) * site_op(&isy_re, k);
    }
    h
}

/// `S_z = 0` block assembled from bit flips with its own index map.
fn independent_sector_matrix(n: usize) -> (Vec<u32>, DMatrix<f64>) {
    let configs: Vec<u32> = (0u32..(1 << n)).filter(|c| c.count_ones() as usize == n / 2).collect();
    let index: HashMap<u32, usize> = configs.iter().enumerate().map(|(k, c)| (*c, k)).collect();
    let mut h = DMatrix::zeros(configs.len(), configs.len());
    for (col, &c) in configs.iter().enumerate() {
        for i in 0..n {
            let k = (i + 1) % n;
            let same = ((c >> i) & 1) == ((c >> k) & 1);
            h[(col, col)] += if same { 0.25 } else { -0.25 };
            if !same {
                let flipped = c ^ (1 << i) ^ (1 << k);
                h[(index[&flipped], col)] += 0.5;
            }
        }
    }
    (configs, h)
}

fn lowest(h: DMatrix<f64>) -> (f64, DVector<f64>) {
    let eig = SymmetricEigen::new(h);
    let k = eig.eigenvalues.imin();
    (eig.eigenvalues[k], eig.eigenvectors.column(k).into_owned())
}

fn ground(n: usize) -> heisvd::ed::GroundSolution {
    let basis = Arc::new(SectorBasis::enumerate(n, 0.0).unwrap());
    lanczos_ground_state(basis, 1.0, &LanczosConfig::default()).unwrap()
}

#[test]
fn kronecker_oracle_four_sites() {
    let h = kron_hamiltonian(4);
    let (e0, v) = lowest(h);
    assert!((e0 + 2.0).abs() < 1e-12);
    // site 0 is the most significant factor, up = bit value 0
    let corr = |i: usize, j: usize| -> f64 {
        (0..16)
            .map(|c: usize| {
                let si = if (c >> (3 - i)) & 1 == 0 { 0.5 } else { -0.5 };
                let sj = if (c >> (3 - j)) & 1 == 0 { 0.5 } else { -0.5 };
                v[c] * v[c] * si * sj
            })
            .sum()
    };
    let s = CorrelationMatrix::from_wavefunction(&ground(4).wf).unwrap();
    for i in 0..4 {
        for j in 0..4 {
            assert!((s.entries[(i, j)] - corr(i, j)).abs() < 1e-12);
        }
    }
}

#[test]
fn dense_oracle_twelve_sites() {
    let (configs, h) = independent_sector_matrix(12);
    let (e0, v) = lowest(h);
    let sol = ground(12);
    assert!((sol.energy - e0).abs() < 1e-10);
    let basis = sol.wf.basis();
    let overlap: f64 = configs
        .iter()
        .zip(v.iter())
        .map(|(c, a)| a * sol.wf.amps()[basis.index_of(heisvd::basis::SpinConfiguration(*c as u64)).unwrap()])
        .sum();
    assert!((overlap.abs() - 1.0).abs() < 1e-10);

    let s = CorrelationMatrix::from_wavefunction(&sol.wf).unwrap();
    for j in 0..12 {
        let want: f64 = configs
            .iter()
            .zip(v.iter())
            .map(|(c, a)| {
                let s0 = if c & 1 == 1 { 0.5 } else { -0.5 };
                let sj = if (c >> j) & 1 == 1 { 0.5 } else { -0.5 };
                a * a * s0 * sj
            })
            .sum();
        assert!((s.entries[(0, j)] - want).abs() < 1e-10);
    }
}

#[test]
fn full_spectrum_matches_kronecker_hamiltonian() {
    let spec = full_spectrum(8, 1.0).unwrap();
    let mut want: Vec<f64> = SymmetricEigen::new(kron_hamiltonian(8)).eigenvalues.iter().copied().collect();
    want.sort_by(f64::total_cmp);
    let got = spec.energies();
    assert_eq!(got.len(), 256);
    for (a, b) in got.iter().zip(&want) {
        assert!((a - b).abs() < 1e-10);
    }
}

#[test]
fn thermal_matches_density_matrix_oracle() {
    let n = 6;
    let beta = 0.7;
    let h = kron_hamiltonian(n);
    let eig = SymmetricEigen::new(h);
    let e0 = eig.eigenvalues.min();
    let w: Vec<f64> = eig.eigenvalues.iter().map(|e| (-beta * (e - e0)).exp()).collect();
    let z: f64 = w.iter().sum();
    let rho_diag: Vec<f64> = (0..1 << n)
        .map(|c| {
            (0..1 << n)
                .map(|k| w[k] * eig.eigenvectors[(c, k)].powi(2))
                .sum::<f64>()
                / z
        })
        .collect();
    let s = CorrelationMatrix::thermal(&full_spectrum(n, 1.0).unwrap(), beta).unwrap();
    for i in 0..n {
        for j in 0..n {
            let want: f64 = rho_diag
                .iter()
                .enumerate()
                .map(|(c, p)| {
                    let si = if (c >> (n - 1 - i)) & 1 == 0 { 0.5 } else { -0.5 };
                    let sj = if (c >> (n - 1 - j)) & 1 == 0 { 0.5 } else { -0.5 };
                    p * si * sj
                })
                .sum();
            assert!((s.entries[(i, j)] - want).abs() < 1e-12, "({i},{j})");
        }
    }
}

#[test]
fn thermal_is_continuous_and_psd() {
    let spec = full_spectrum(8, 1.0).unwrap();
    let emax = spec.energies().iter().fold(0.0f64, |a, e| a.max(e.abs()));
    let delta = 1e-4;
    for beta in [0.0, 0.5, 2.0, 10.0] {
        let a = CorrelationMatrix::thermal(&spec, beta).unwrap();
        let b = CorrelationMatrix::thermal(&spec, beta + delta).unwrap();
        let diff = (&a.entries - &b.entries).abs().max();
        assert!(diff <= 1e-2 * delta * 8.0 * emax, "beta {beta}: {diff}");
        assert!(a.check_invariants().min_eigenvalue > -1e-10);
    }
}

#[test]
fn circulant_fourier_oracle() {
    for n in [4usize, 8, 12] {
        let s = CorrelationMatrix::from_wavefunction(&ground(n).wf).unwrap();
        let spec = eigendecompose(&s).unwrap();
        let mut dft: Vec<f64> = (0..n)
            .map(|m| {
                (0..n)
                    .map(|d| s.entries[(0, d)] * (2.0 * PI * (m * d) as f64 / n as f64).cos())
                    .sum()
            })
            .collect();
        dft.sort_by(|a, b| b.total_cmp(a));
        for (a, b) in spec.values.iter().zip(&dft) {
            assert!((a - b).abs() < 1e-12);
        }
        let total: f64 = spec.values.iter().sum();
        assert!((total - n as f64 / 4.0).abs() < 1e-10);

        let zero = spec.vector(n).unwrap();
        assert!(spec.values[n - 1].abs() < 1e-10);
        for x in zero.iter() {
            assert!((x - 1.0 / (n as f64).sqrt()).abs() < 1e-8);
        }
        let k1 = svd::dominant_wavenumber(spec.vector(1).unwrap().as_slice()).unwrap();
        assert!((k1 - PI).abs() < 1e-12);

        let deg = spec.degeneracy_pairs(1e-10);
        assert_eq!(deg.singletons, vec![1, n]);
        assert_eq!(deg.pairs.len(), (n - 2) / 2);
    }
}

#[test]
fn quadrature_matches_gamma_function() {
    let g = statrs::function::gamma::gamma(0.5);
    assert!((svd::gamma_half() - g).abs() < 1e-10);
    let k = svd::kernel_reconstruct(256, &[32, 64, 128]).unwrap();
    for (r, got) in k.separations.iter().zip(&k.window_integrals) {
        let (a, b) = (*r as f64 / 512.0, *r as f64 / 2.0);
        let p = |x: f64| statrs::function::gamma::gamma_lr(0.5, x);
        let want = g * (p(b) - p(a));
        assert!((got - want).abs() < 1e-9, "r = {r}");
    }
}

#[test]
fn kernel_value_depends_on_separation_only() {
    let a = svd::kernel_reconstruct(128, &[16, 40, 64]).unwrap();
    let b = svd::kernel_reconstruct(128, &[64, 40, 16]).unwrap();
    assert_eq!(a.values[0], b.values[2]);
    assert_eq!(a.values[1], b.values[1]);
}

#[test]
fn mps_reaches_exact_energy_on_small_ring() {
    let exact = ground(8).energy;
    let mut s = MpsState::random(8, 8, 3).unwrap();
    s.sweep_optimize(
        1.0,
        &SweepConfig {
            n_sweeps: 15,
            track_spectrum: false,
        },
    )
    .unwrap();
    let e = s.energy(1.0).unwrap();
    assert!(e >= exact - 1e-10);
    assert!((e - exact).abs() < 1e-6 * exact.abs(), "{e} vs {exact}");
    let m = CorrelationMatrix::from_mps(&s).unwrap();
    let r = m.check_invariants();
    assert!(r.diagonal_deviation < 1e-12);
    assert!(r.max_row_sum < 1e-3);
}

#[test]
fn reduced_density_matrices_from_lanczos() {
    use heisvd::four_site;
    let wf = ground(4).wf;
    let rab = four_site::reduced_density_matrix(&wf, &[0, 1]).unwrap();
    assert!((&rab - four_site::rho_ab()).abs().max() < 1e-10);
    let s_ab = four_site::von_neumann_entropy(&rab);
    let s_a = four_site::von_neumann_entropy(&four_site::reduced_density_matrix(&wf, &[0]).unwrap());
    assert!((s_ab - four_site::entropy_ab()).abs() < 1e-10);
    assert!((2.0 * s_a - s_ab - four_site::mutual_information()).abs() < 1e-10);
}
