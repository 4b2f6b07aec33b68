//! Periodic matrix product states optimized one site at a time.
//!
//! The amplitude of a configuration is `tr(A_1^{s_1} ... A_N^{s_N})` with a
//! `chi x chi` real matrix per site and spin value. Physical index `0` is spin
//! down and `1` is spin up, matching the bit convention of
//! [`SpinConfiguration`](crate::basis::SpinConfiguration).
//!
//! Contractions go through transfer matrices of size `chi^2 x chi^2`,
//!
//! ```text
//! T^O[(a a'), (b b')] = sum_{p,q} <q|O|p> A^p[a, b] A^q[a', b']
//! ```
//!
//! where unprimed indices belong to the ket and primed ones to the bra.
//! A site update fixes every tensor but one, contracts the rest of the ring
//! into an environment and solves `H_eff x = E N_eff x` for the lowest `E`.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::basis::check_chain_length;
use crate::error::{Error, Result};
use crate::linalg::{max_abs, sym_eigen_ascending, symmetrize, trace_of_product};

pub const DEFAULT_CHI: usize = 10;
pub const DEFAULT_SWEEPS: usize = 40;

/// Relative shift added to `N_eff` before it is diagonalized.
pub const NORM_REGULARIZATION: f64 = 1e-10;
/// Eigen-directions of `N_eff` below this fraction of the largest are dropped.
pub const NORM_CUTOFF: f64 = 1e-8;

const MAX_INIT_RETRIES: u64 = 8;

/// `<q|O|p>` stored as `op[q][p]`.
type LocalOp = [[f64; 2]; 2];

const ID: LocalOp = [[1.0, 0.0], [0.0, 1.0]];
const SZ: LocalOp = [[-0.5, 0.0], [0.0, 0.5]];
const SP: LocalOp = [[0.0, 0.0], [1.0, 0.0]];
const SM: LocalOp = [[0.0, 1.0], [0.0, 0.0]];

/// `S_i . S_{i+1} = sum_a c_a L_a (x) R_a`.
const BOND_TERMS: [(LocalOp, LocalOp, f64); 3] = [(SZ, SZ, 1.0), (SP, SM, 0.5), (SM, SP, 0.5)];

#[derive(Clone, Debug, PartialEq)]
pub struct MpsState {
    n_sites: usize,
    chi: usize,
    seed: u64,
    sweeps_done: usize,
    tensors: Vec<[DMatrix<f64>; 2]>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepReport {
    pub sweep_index: usize,
    pub energy: f64,
    pub energy_change: f64,
    /// Largest relative change of a non-negligible squared singular value of
    /// the correlation matrix against the previous sweep.
    pub spectrum_change: Option<f64>,
}

#[derive(Clone, Debug)]
pub struct SweepConfig {
    pub n_sweeps: usize,
    pub track_spectrum: bool,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            n_sweeps: DEFAULT_SWEEPS,
            track_spectrum: false,
        }
    }
}

impl MpsState {
    /// Entries uniform in `[-1, 1)` from a ChaCha stream seeded with `seed`.
    pub fn random(n_sites: usize, chi: usize, seed: u64) -> Result<Self> {
        check_chain_length(n_sites)?;
        if chi == 0 {
            return Err(Error::Domain("bond dimension must be at least 1".into()));
        }
        for attempt in 0..MAX_INIT_RETRIES {
            let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(attempt));
            let tensors = (0..n_sites)
                .map(|_| {
                    let mut draw = || DMatrix::from_fn(chi, chi, |_, _| rng.random_range(-1.0..1.0));
                    let down = draw();
                    let up = draw();
                    [down, up]
                })
                .collect();
            let state = Self {
                n_sites,
                chi,
                seed,
                sweeps_done: 0,
                tensors,
            };
            if state.ring_trace(&[]).map(|t| t.value > 0.0).unwrap_or(false) {
                return Ok(state);
            }
            log::warn!("random mps draw with seed {} has zero norm, retrying", seed.wrapping_add(attempt));
        }
        Err(Error::ZeroNorm(0.0))
    }

    /// Builds a state from explicit tensors, `tensors[i] = [A_i^down, A_i^up]`.
    pub fn from_tensors(tensors: Vec<[DMatrix<f64>; 2]>, seed: u64, sweeps_done: usize) -> Result<Self> {
        let n_sites = tensors.len();
        check_chain_length(n_sites)?;
        let chi = tensors[0][0].nrows();
        if chi == 0 {
            return Err(Error::Domain("bond dimension must be at least 1".into()));
        }
        for t in &tensors {
            for m in t {
                if m.nrows() != chi || m.ncols() != chi {
                    return Err(Error::Format(format!(
                        "site tensor of shape {}x{} in a chi = {chi} state",
                        m.nrows(),
                        m.ncols()
                    )));
                }
                if m.iter().any(|x| !x.is_finite()) {
                    return Err(Error::Format("non-finite tensor entry".into()));
                }
            }
        }
        Ok(Self {
            n_sites,
            chi,
            seed,
            sweeps_done,
            tensors,
        })
    }

    /// A `chi = 1` product state with the given spin pattern.
    pub fn product(spins_up: &[bool]) -> Result<Self> {
        let tensors = spins_up
            .iter()
            .map(|&up| {
                let (d, u) = if up { (0.0, 1.0) } else { (1.0, 0.0) };
                [DMatrix::from_element(1, 1, d), DMatrix::from_element(1, 1, u)]
            })
            .collect();
        Self::from_tensors(tensors, 0, 0)
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn chi(&self) -> usize {
        self.chi
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn sweeps_done(&self) -> usize {
        self.sweeps_done
    }

    pub fn tensors(&self) -> &[[DMatrix<f64>; 2]] {
        &self.tensors
    }

    /// `A_i^s -> G A_i^s G^-1` on every site. Leaves the state unchanged.
    pub fn gauge_transform(&mut self, g: &DMatrix<f64>) -> Result<()> {
        let g_inv = g
            .clone()
            .try_inverse()
            .ok_or_else(|| Error::Domain("gauge matrix is singular".into()))?;
        for site in &mut self.tensors {
            for m in site.iter_mut() {
                *m = g * &*m * &g_inv;
            }
        }
        Ok(())
    }

    /// Amplitude `tr(A_1^{s_1} ... A_N^{s_N})` of a configuration word.
    pub fn amplitude(&self, config: u64) -> f64 {
        let mut prod = DMatrix::<f64>::identity(self.chi, self.chi);
        for (i, site) in self.tensors.iter().enumerate() {
            prod *= &site[((config >> i) & 1) as usize];
        }
        prod.trace()
    }

    /// The state as a dense vector over all `2^N` configurations; small rings
    /// only.
    pub fn to_full_vector(&self) -> Result<Vec<f64>> {
        if self.n_sites > crate::basis::ED_MAX_SITES {
            return Err(Error::SizeCap {
                n: self.n_sites,
                cap: crate::basis::ED_MAX_SITES,
                what: "dense expansion of an mps",
            });
        }
        Ok((0..1u64 << self.n_sites).map(|c| self.amplitude(c)).collect())
    }

    fn transfer(&self, site: usize, op: &LocalOp) -> DMatrix<f64> {
        transfer(&self.tensors[site], op)
    }

    fn single(&self, site: usize) -> Segment {
        Segment::single(&self.tensors[site])
    }

    /// Contracts the ring with local operators inserted at the given sites.
    fn ring_trace(&self, ops: &[(usize, LocalOp)]) -> Result<ScaledTrace> {
        let dim = self.chi * self.chi;
        let mut acc = DMatrix::<f64>::identity(dim, dim);
        let mut log_scale = 0.0;
        for site in 0..self.n_sites {
            let op = ops
                .iter()
                .filter(|(s, _)| *s == site)
                .fold(ID, |acc, (_, o)| op_product(&acc, o));
            acc *= self.transfer(site, &op);
            let m = max_abs(&acc);
            if m == 0.0 || !m.is_finite() {
                return Err(Error::ZeroNorm(m));
            }
            acc /= m;
            log_scale += m.ln();
        }
        Ok(ScaledTrace {
            value: acc.trace(),
            log_scale,
        })
    }

    /// Environment of `site`: every other site, in ring order starting right
    /// of `site`.
    fn environment(&self, site: usize) -> Segment {
        let n = self.n_sites;
        let mut env = self.single((site + 1) % n);
        for k in 2..n {
            env = env.concat(&self.single((site + k) % n));
        }
        env
    }

    fn site_vector(&self, site: usize) -> DVector<f64> {
        let chi = self.chi;
        let mut x = DVector::zeros(2 * chi * chi);
        for p in 0..2 {
            for a in 0..chi {
                for b in 0..chi {
                    x[p * chi * chi + a * chi + b] = self.tensors[site][p][(a, b)];
                }
            }
        }
        x
    }

    fn set_site_vector(&mut self, site: usize, x: &DVector<f64>) {
        let chi = self.chi;
        for p in 0..2 {
            for a in 0..chi {
                for b in 0..chi {
                    self.tensors[site][p][(a, b)] = x[p * chi * chi + a * chi + b];
                }
            }
        }
    }

    /// Variational energy `<psi|H|psi> / <psi|psi>` with coupling `j`.
    pub fn energy(&self, j: f64) -> Result<f64> {
        let env = self.environment(0);
        let (h, nrm) = local_matrices(&env, self.chi, j);
        let x = self.site_vector(0);
        let q = x.dot(&(&nrm * &x));
        let scale = x.norm_squared() * max_abs(&nrm);
        if !(q > 1e-300 * scale) {
            return Err(Error::ZeroNorm(q));
        }
        Ok(x.dot(&(&h * &x)) / q)
    }

    /// Replaces the tensor at `site` by the lowest generalized eigenvector of
    /// its effective problem; returns the new energy.
    pub fn optimize_site(&mut self, site: usize, j: f64) -> Result<f64> {
        if site >= self.n_sites {
            return Err(Error::SiteIndex {
                site,
                n_sites: self.n_sites,
            });
        }
        let env = self.environment(site);
        self.update_with_environment(site, &env, j)
    }

    fn update_with_environment(&mut self, site: usize, env: &Segment, j: f64) -> Result<f64> {
        let (h, nrm) = local_matrices(env, self.chi, j);
        let old = self.site_vector(site);
        let (x, energy) = solve_generalized(h, nrm, &old).map_err(|detail| Error::Conditioning { site, detail })?;
        self.set_site_vector(site, &x);
        Ok(energy)
    }

    /// One forward pass over sites `0..N`, reusing cached right blocks.
    fn sweep(&mut self, j: f64) -> Result<f64> {
        let n = self.n_sites;
        let mut right: Vec<Option<Segment>> = vec![None; n + 1];
        right[n - 1] = Some(self.single(n - 1));
        for k in (1..n - 1).rev() {
            let seg = self.single(k).concat(right[k + 1].as_ref().expect("filled right to left"));
            right[k] = Some(seg);
        }
        let mut left: Option<Segment> = None;
        let mut energy = f64::NAN;
        for k in 0..n {
            let env = match (right[k + 1].take(), left.as_ref()) {
                (Some(r), Some(l)) => r.concat(l),
                (Some(r), None) => r,
                (None, Some(l)) => l.clone(),
                (None, None) => unreachable!("rings have at least four sites"),
            };
            energy = self.update_with_environment(k, &env, j)?;
            if k + 1 < n {
                self.shift_gauge_right(k);
            }
            let grown = match left.take() {
                Some(l) => l.concat(&self.single(k)),
                None => self.single(k),
            };
            left = Some(grown);
        }
        self.sweeps_done += 1;
        Ok(energy)
    }

    /// Left-orthonormalizes the tensor at `site` by a QR factorization and
    /// absorbs the triangular factor into the next site. The state is
    /// unchanged.
    pub(crate) fn shift_gauge_right(&mut self, site: usize) {
        let chi = self.chi;
        let next = (site + 1) % self.n_sites;
        let stacked = DMatrix::from_fn(2 * chi, chi, |r, c| self.tensors[site][r / chi][(r % chi, c)]);
        let qr = stacked.qr();
        let q = qr.q();
        let r = qr.r();
        for p in 0..2 {
            self.tensors[site][p] = q.rows(p * chi, chi).into_owned();
            self.tensors[next][p] = &r * &self.tensors[next][p];
        }
    }

    /// Runs `cfg.n_sweeps` forward sweeps and reports energy (and optionally
    /// spectrum) convergence after each.
    pub fn sweep_optimize(&mut self, j: f64, cfg: &SweepConfig) -> Result<Vec<SweepReport>> {
        let mut previous = self.energy(j)?;
        let mut previous_spectrum = if cfg.track_spectrum {
            Some(squared_spectrum(&self.correlation_matrix()?))
        } else {
            None
        };
        let mut reports = Vec::with_capacity(cfg.n_sweeps);
        for _ in 0..cfg.n_sweeps {
            let energy = self.sweep(j)?;
            let spectrum_change = match previous_spectrum.as_ref() {
                Some(prev) => {
                    let now = squared_spectrum(&self.correlation_matrix()?);
                    let change = relative_spectrum_change(prev, &now);
                    previous_spectrum = Some(now);
                    Some(change)
                }
                None => None,
            };
            let report = SweepReport {
                sweep_index: self.sweeps_done,
                energy,
                energy_change: energy - previous,
                spectrum_change,
            };
            log::info!(
                "sweep {:3}: E = {:.12}  dE = {:+.3e}{}",
                report.sweep_index,
                report.energy,
                report.energy_change,
                report
                    .spectrum_change
                    .map(|c| format!("  dλ/λ = {c:.3e}"))
                    .unwrap_or_default()
            );
            previous = energy;
            reports.push(report);
        }
        Ok(reports)
    }

    /// `<S^z_i S^z_j>` by a direct contraction of the ring.
    pub fn correlator_zz(&self, i: usize, j: usize) -> Result<f64> {
        for site in [i, j] {
            if site >= self.n_sites {
                return Err(Error::SiteIndex {
                    site,
                    n_sites: self.n_sites,
                });
            }
        }
        let num = self.ring_trace(&[(i, SZ), (j, SZ)])?;
        let den = self.ring_trace(&[])?;
        if !(den.value > 0.0) {
            return Err(Error::ZeroNorm(den.value));
        }
        Ok(num.value / den.value * (num.log_scale - den.log_scale).exp())
    }

    /// Every `<S^z_i S^z_j>`, computed once per unordered pair and mirrored.
    pub fn correlation_matrix(&self) -> Result<DMatrix<f64>> {
        let n = self.n_sites;
        let dim = self.chi * self.chi;
        let plain: Vec<DMatrix<f64>> = (0..n).map(|k| self.transfer(k, &ID)).collect();
        let with_sz: Vec<DMatrix<f64>> = (0..n).map(|k| self.transfer(k, &SZ)).collect();

        // prefix[k] = T_0 ... T_{k-1}, suffix[k] = T_k ... T_{N-1}
        let mut prefix = Vec::with_capacity(n + 1);
        prefix.push(Scaled::identity(dim));
        for t in &plain {
            let next = prefix.last().expect("nonempty").times(t);
            prefix.push(next);
        }
        let mut suffix = vec![Scaled::identity(dim); n + 1];
        for k in (0..n).rev() {
            suffix[k] = Scaled::from_product(t_times(&plain[k], &suffix[k + 1]));
        }
        let total = &prefix[n];
        let z = total.matrix.trace();
        if !(z > 0.0) {
            return Err(Error::ZeroNorm(z));
        }

        let rows: Vec<Vec<f64>> = (0..n)
            .into_par_iter()
            .map(|i| {
                let mut row = vec![0.0; n];
                let mut w = prefix[i].times(&with_sz[i]);
                for jj in (i + 1)..n {
                    let m = &w.matrix * &with_sz[jj];
                    let tr = trace_of_product(&m, &suffix[jj + 1].matrix);
                    let log = w.log_scale + suffix[jj + 1].log_scale - total.log_scale;
                    row[jj] = tr / z * log.exp();
                    w = w.times(&plain[jj]);
                }
                row
            })
            .collect();

        let mut out = DMatrix::zeros(n, n);
        for i in 0..n {
            out[(i, i)] = 0.25;
            for jj in (i + 1)..n {
                out[(i, jj)] = rows[i][jj];
                out[(jj, i)] = rows[i][jj];
            }
        }
        Ok(out)
    }

    /// Effective matrices for `site` with the current tensors; used by tests
    /// that check the Gram structure of `N_eff`.
    pub fn effective_matrices(&self, site: usize, j: f64) -> (DMatrix<f64>, DMatrix<f64>) {
        local_matrices(&self.environment(site), self.chi, j)
    }
}

fn op_product(a: &LocalOp, b: &LocalOp) -> LocalOp {
    let mut out = [[0.0; 2]; 2];
    for q in 0..2 {
        for p in 0..2 {
            out[q][p] = (0..2).map(|r| a[q][r] * b[r][p]).sum();
        }
    }
    out
}

fn transfer(site: &[DMatrix<f64>; 2], op: &LocalOp) -> DMatrix<f64> {
    let chi = site[0].nrows();
    let mut t = DMatrix::zeros(chi * chi, chi * chi);
    for q in 0..2 {
        for p in 0..2 {
            let c = op[q][p];
            if c != 0.0 {
                t += site[p].kronecker(&site[q]) * c;
            }
        }
    }
    t
}

fn t_times(t: &DMatrix<f64>, s: &Scaled) -> Scaled {
    Scaled {
        matrix: t * &s.matrix,
        log_scale: s.log_scale,
    }
}

struct ScaledTrace {
    value: f64,
    log_scale: f64,
}

/// A matrix stored as `exp(log_scale) * matrix` with `max|matrix| = 1`.
#[derive(Clone, Debug)]
struct Scaled {
    matrix: DMatrix<f64>,
    log_scale: f64,
}

impl Scaled {
    fn identity(dim: usize) -> Self {
        Self {
            matrix: DMatrix::identity(dim, dim),
            log_scale: 0.0,
        }
    }

    fn from_product(mut s: Scaled) -> Self {
        let m = max_abs(&s.matrix);
        if m > 0.0 && m.is_finite() {
            s.matrix /= m;
            s.log_scale += m.ln();
        }
        s
    }

    fn times(&self, t: &DMatrix<f64>) -> Self {
        Self::from_product(Scaled {
            matrix: &self.matrix * t,
            log_scale: self.log_scale,
        })
    }
}

/// An open stretch of consecutive sites, contracted into transfer-space
/// matrices. `first[a]` carries the right operator of bond term `a` on the
/// first site, `last[a]` the left operator on the last site, and `h` sums all
/// bonds inside the stretch. All members share one overall scale.
#[derive(Clone, Debug)]
struct Segment {
    e: DMatrix<f64>,
    h: DMatrix<f64>,
    first: [DMatrix<f64>; 3],
    last: [DMatrix<f64>; 3],
}

impl Segment {
    fn single(site: &[DMatrix<f64>; 2]) -> Self {
        let e = transfer(site, &ID);
        let dim = e.nrows();
        let mut s = Self {
            h: DMatrix::zeros(dim, dim),
            first: BOND_TERMS.map(|(_, r, _)| transfer(site, &r)),
            last: BOND_TERMS.map(|(l, _, _)| transfer(site, &l)),
            e,
        };
        s.rescale();
        s
    }

    fn concat(&self, right: &Segment) -> Segment {
        let mut h = &self.h * &right.e + &self.e * &right.h;
        for (a, (_, _, c)) in BOND_TERMS.iter().enumerate() {
            h += (&self.last[a] * &right.first[a]) * *c;
        }
        let mut s = Segment {
            e: &self.e * &right.e,
            h,
            first: std::array::from_fn(|a| &self.first[a] * &right.e),
            last: std::array::from_fn(|a| &self.e * &right.last[a]),
        };
        s.rescale();
        s
    }

    fn rescale(&mut self) {
        let m = max_abs(&self.e);
        if m > 0.0 && m.is_finite() {
            let inv = 1.0 / m;
            self.e *= inv;
            self.h *= inv;
            self.first.iter_mut().for_each(|x| *x *= inv);
            self.last.iter_mut().for_each(|x| *x *= inv);
        }
    }
}

/// `(H_eff, N_eff)` for the site surrounded by `env`. Vectors are indexed
/// `p * chi^2 + a * chi + b` for `A^p[a, b]`.
fn local_matrices(env: &Segment, chi: usize, j: f64) -> (DMatrix<f64>, DMatrix<f64>) {
    let c2 = chi * chi;
    let dim = 2 * c2;
    let mut h = DMatrix::zeros(dim, dim);
    let mut n = DMatrix::zeros(dim, dim);
    for a in 0..chi {
        for b in 0..chi {
            for a2 in 0..chi {
                for b2 in 0..chi {
                    // environment rows run over (b b'), columns over (a a')
                    let er = b * chi + b2;
                    let ec = a * chi + a2;
                    let col = a * chi + b;
                    let row = a2 * chi + b2;
                    let e = env.e[(er, ec)];
                    let hh = env.h[(er, ec)];
                    for p in 0..2 {
                        n[(p * c2 + row, p * c2 + col)] = e;
                        for q in 0..2 {
                            let mut v = if p == q { hh } else { 0.0 };
                            for (t, (l, r, c)) in BOND_TERMS.iter().enumerate() {
                                v += c * (l[q][p] * env.first[t][(er, ec)] + r[q][p] * env.last[t][(er, ec)]);
                            }
                            h[(q * c2 + row, p * c2 + col)] = j * v;
                        }
                    }
                }
            }
        }
    }
    (h, n)
}

/// Lowest solution of `h x = E n x` on the well-conditioned part of `n`,
/// widened by the component of `current` that the cut removes so that the
/// current tensor stays representable.
fn solve_generalized(
    mut h: DMatrix<f64>,
    mut n: DMatrix<f64>,
    current: &DVector<f64>,
) -> std::result::Result<(DVector<f64>, f64), String> {
    symmetrize(&mut h);
    symmetrize(&mut n);
    let dim = n.nrows();
    let trace = n.trace();
    if !(trace > 0.0) || !trace.is_finite() {
        return Err(format!("N_eff has trace {trace:e}"));
    }
    let shift = NORM_REGULARIZATION * trace / dim as f64;
    let mut n_reg = n.clone();
    for k in 0..dim {
        n_reg[(k, k)] += shift;
    }
    let (vals, vecs) = sym_eigen_ascending(n_reg);
    let top = vals[dim - 1];
    let keep: Vec<usize> = (0..dim).filter(|&k| vals[k] > NORM_CUTOFF * top).collect();
    if keep.is_empty() {
        return Err(format!("no eigenvalue of N_eff above {NORM_CUTOFF:e} of the largest ({top:e})"));
    }

    let mut columns: Vec<DVector<f64>> = keep
        .iter()
        .map(|&k| vecs.column(k) / vals[k].sqrt())
        .collect();
    let mut dropped = current.clone();
    for &k in &keep {
        let c = vecs.column(k).dot(current);
        dropped.axpy(-c, &vecs.column(k), 1.0);
    }
    let dropped_norm = dropped.dot(&(&n * &dropped));
    if dropped_norm > 1e-14 * top * dropped.norm_squared() {
        columns.push(dropped / dropped_norm.sqrt());
    }
    let x = DMatrix::from_columns(&columns);

    let mut gram = x.transpose() * &n * &x;
    let mut reduced = x.transpose() * &h * &x;
    symmetrize(&mut gram);
    symmetrize(&mut reduced);
    let (gvals, gvecs) = sym_eigen_ascending(gram);
    let gtop = gvals[gvals.len() - 1];
    let gkeep: Vec<usize> = (0..gvals.len()).filter(|&k| gvals[k] > 1e-12 * gtop).collect();
    let w = DMatrix::from_fn(gvals.len(), gkeep.len(), |r, c| gvecs[(r, gkeep[c])] / gvals[gkeep[c]].sqrt());
    let mut standard = w.transpose() * reduced * &w;
    symmetrize(&mut standard);
    let (_, rvecs) = sym_eigen_ascending(standard);
    let y = &w * rvecs.column(0);
    let mut a: DVector<f64> = &x * y;
    a /= a.norm();
    let norm = a.dot(&(&n * &a));
    if !(norm > 0.0) {
        return Err(format!("update has non-positive norm {norm:e}"));
    }
    let energy = a.dot(&(&h * &a)) / norm;
    Ok((a, energy))
}

/// Squared eigenvalues of a correlation matrix, descending by eigenvalue.
fn squared_spectrum(s: &DMatrix<f64>) -> Vec<f64> {
    let (vals, _) = sym_eigen_ascending(s.clone());
    vals.iter().rev().map(|v| v * v).collect()
}

/// Largest `|l_n - l'_n| / l'_n` over modes with `l'_n > 1e-8 * l'_1`.
pub fn relative_spectrum_change(previous: &[f64], current: &[f64]) -> f64 {
    let top = previous.first().copied().unwrap_or(0.0);
    previous
        .iter()
        .zip(current)
        .filter(|(p, _)| **p > 1e-8 * top)
        .map(|(p, c)| (c - p).abs() / p)
        .fold(0.0, f64::max)
}
