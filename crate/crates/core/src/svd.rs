//! Spectral analysis of a correlation matrix: eigen/singular decomposition,
//! rank-1 components, domain structure, envelope fit, kernel check and the
//! Haar wavelet view.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::corr::CorrelationMatrix;
use crate::linalg::{max_asymmetry, sym_eigen_ascending};
use crate::{Error, Result};

/// Relative tolerance used when two magnitudes count as tied.
const TIE_TOL: f64 = 1e-9;

pub const DEFAULT_DOMAIN_THRESHOLD: f64 = 0.1;

/// Eigenpairs of a symmetric matrix, largest first. For a PSD matrix the
/// eigenvalues are its singular values `sqrt(lambda_n)`.
#[derive(Clone, Debug)]
pub struct SvdSpectrum {
    pub values: Vec<f64>,
    pub squared: Vec<f64>,
    /// Column `n - 1` belongs to rank `n`.
    pub vectors: DMatrix<f64>,
}

#[derive(Clone, Debug)]
pub struct SvdComponent {
    pub n: usize,
    pub matrix: DMatrix<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Degeneracy {
    pub pairs: Vec<(usize, usize)>,
    pub singletons: Vec<usize>,
}

#[derive(Clone, Debug, Serialize)]
pub struct DomainMeasurement {
    pub n: usize,
    pub wavenumber: f64,
    pub domain_size: f64,
    pub wall_count: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct ScalingFit {
    pub amplitude: f64,
    pub power: f64,
    pub uses_exp_cutoff: bool,
    pub r_squared: f64,
    pub fit_set: Vec<usize>,
}

#[derive(Clone, Debug, Serialize)]
pub struct KernelReconstruction {
    pub n_sites: usize,
    pub separations: Vec<usize>,
    pub values: Vec<f64>,
    pub slope: f64,
    pub r_squared: f64,
    /// `int_{r/2N}^{r/2} e^{-x} x^{-1/2} dx` for each separation.
    pub window_integrals: Vec<f64>,
    /// `int_0^inf e^{-x} x^{-1/2} dx` by quadrature.
    pub gamma_half: f64,
}

pub fn eigendecompose(s: &CorrelationMatrix) -> Result<SvdSpectrum> {
    eigendecompose_matrix(&s.entries)
}

pub fn eigendecompose_matrix(m: &DMatrix<f64>) -> Result<SvdSpectrum> {
    if m.nrows() != m.ncols() {
        return Err(Error::Format(format!("matrix is {}x{}, need square", m.nrows(), m.ncols())));
    }
    let scale = m.iter().fold(0.0f64, |a, x| a.max(x.abs())).max(1.0);
    let asym = max_asymmetry(m);
    if asym > 1e-12 * scale {
        return Err(Error::NotSymmetric(asym));
    }
    let n = m.nrows();
    let (vals, vecs) = sym_eigen_ascending(m.clone());
    let mut vectors = DMatrix::zeros(n, n);
    let mut values = Vec::with_capacity(n);
    for (out, k) in (0..n).rev().enumerate() {
        let mut col: DVector<f64> = vecs.column(k).into_owned();
        let top = col.iter().fold(0.0f64, |a, x| a.max(x.abs()));
        let lead = col
            .iter()
            .position(|x| x.abs() >= top * (1.0 - TIE_TOL))
            .expect("eigenvectors are nonzero");
        if col[lead] < 0.0 {
            col.neg_mut();
        }
        vectors.set_column(out, &col);
        values.push(vals[k]);
    }
    let squared = values.iter().map(|v| v * v).collect();
    Ok(SvdSpectrum {
        values,
        squared,
        vectors,
    })
}

impl SvdSpectrum {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Eigenvector of rank `n` (1-based).
    pub fn vector(&self, n: usize) -> Result<DVector<f64>> {
        self.check_rank(n)?;
        Ok(self.vectors.column(n - 1).into_owned())
    }

    /// `U_n sqrt(lambda_n) U_n^T` (1-based).
    pub fn component(&self, n: usize) -> Result<SvdComponent> {
        let u = self.vector(n)?;
        Ok(SvdComponent {
            n,
            matrix: &u * u.transpose() * self.values[n - 1],
        })
    }

    pub fn reconstruct(&self) -> DMatrix<f64> {
        let d = DMatrix::from_diagonal(&DVector::from_column_slice(&self.values));
        &self.vectors * d * self.vectors.transpose()
    }

    /// Greedy adjacent pairing on `lambda`: ranks `n, n+1` pair up when
    /// `|lambda_n - lambda_{n+1}| <= rel_tol * lambda_n`.
    pub fn degeneracy_pairs(&self, rel_tol: f64) -> Degeneracy {
        let lam = &self.squared;
        let mut pairs = Vec::new();
        let mut singletons = Vec::new();
        let mut k = 0;
        while k < lam.len() {
            if k + 1 < lam.len() && (lam[k] - lam[k + 1]).abs() <= rel_tol * lam[k] {
                pairs.push((k + 1, k + 2));
                k += 2;
            } else {
                singletons.push(k + 1);
                k += 1;
            }
        }
        Degeneracy { pairs, singletons }
    }

    pub fn measure_component(&self, n: usize, threshold: f64) -> Result<DomainMeasurement> {
        let u = self.vector(n)?;
        let (wall_count, domain_size) = measure_domain_size(u.as_slice(), threshold)?;
        Ok(DomainMeasurement {
            n,
            wavenumber: dominant_wavenumber(u.as_slice())?,
            domain_size,
            wall_count,
        })
    }

    fn check_rank(&self, n: usize) -> Result<()> {
        if n == 0 || n > self.len() {
            return Err(Error::Domain(format!("rank {n} outside 1..={}", self.len())));
        }
        Ok(())
    }
}

/// `2 pi m / N` for the `m` in `0..=N/2` with the largest DFT power; ties
/// go to the smallest `m`.
pub fn dominant_wavenumber(v: &[f64]) -> Result<f64> {
    let n = v.len();
    if n == 0 || v.iter().all(|x| *x == 0.0) {
        return Err(Error::Domain("wavenumber of a zero vector".into()));
    }
    let powers: Vec<f64> = (0..=n / 2)
        .map(|m| {
            let k = 2.0 * PI * m as f64 / n as f64;
            let (mut re, mut im) = (0.0, 0.0);
            for (i, x) in v.iter().enumerate() {
                let phase = k * i as f64;
                re += x * phase.cos();
                im -= x * phase.sin();
            }
            re * re + im * im
        })
        .collect();
    let top = powers.iter().cloned().fold(0.0, f64::max);
    let m = powers
        .iter()
        .position(|p| *p >= top * (1.0 - TIE_TOL))
        .expect("maximum is attained");
    Ok(2.0 * PI * m as f64 / n as f64)
}

/// Counts cyclic sign changes of the staggered sign pattern
/// `(-1)^i sign(v_i)`, ignoring entries below `threshold * max|v|`.
/// Returns `(wall_count, N / max(wall_count, 1))`.
pub fn measure_domain_size(v: &[f64], threshold: f64) -> Result<(usize, f64)> {
    let n = v.len();
    let top = v.iter().fold(0.0f64, |a, x| a.max(x.abs()));
    if !(top > 0.0) {
        return Err(Error::Domain("domain size of a zero vector".into()));
    }
    let staggered: Vec<i8> = v
        .iter()
        .enumerate()
        .filter(|(_, x)| x.abs() >= threshold * top)
        .map(|(i, x)| {
            let s = if *x > 0.0 { 1 } else { -1 };
            if i % 2 == 0 { s } else { -s }
        })
        .collect();
    if staggered.is_empty() {
        return Err(Error::Domain("every entry is below the domain threshold".into()));
    }
    let m = staggered.len();
    let walls = (0..m).filter(|&k| staggered[k] != staggered[(k + 1) % m]).count();
    Ok((walls, n as f64 / walls.max(1) as f64))
}

/// `{1} ∪ {even n < N/2}`.
pub fn default_fit_set(n_sites: usize) -> Vec<usize> {
    std::iter::once(1).chain((2..n_sites / 2).step_by(2)).collect()
}

/// Least squares of `ln lambda_n (+ n/N)` against `ln n` over `fit_set`.
pub fn fit_scaling(spec: &SvdSpectrum, fit_set: &[usize], uses_exp_cutoff: bool) -> Result<ScalingFit> {
    let n_sites = spec.len();
    let mut used = Vec::new();
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for &n in fit_set {
        spec.check_rank(n)?;
        let lam = spec.squared[n - 1];
        if !(lam > 0.0) {
            log::warn!("excluding rank {n} from the fit: lambda = {lam:e}");
            continue;
        }
        let cutoff = if uses_exp_cutoff { n as f64 / n_sites as f64 } else { 0.0 };
        used.push(n);
        xs.push((n as f64).ln());
        ys.push(lam.ln() + cutoff);
    }
    let line = least_squares(&xs, &ys)?;
    Ok(ScalingFit {
        amplitude: line.intercept.exp(),
        power: line.slope,
        uses_exp_cutoff,
        r_squared: line.r_squared,
        fit_set: used,
    })
}

struct Line {
    slope: f64,
    intercept: f64,
    r_squared: f64,
}

fn least_squares(xs: &[f64], ys: &[f64]) -> Result<Line> {
    let m = xs.len();
    if m < 3 {
        return Err(Error::TooFewPoints(m));
    }
    let mx = xs.iter().sum::<f64>() / m as f64;
    let my = ys.iter().sum::<f64>() / m as f64;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    if !(sxx > 0.0) {
        return Err(Error::Domain("fit abscissae are all equal".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = xs.iter().zip(ys).map(|(x, y)| (y - intercept - slope * x).powi(2)).sum();
    let r_squared = if syy > 0.0 { 1.0 - ss_res / syy } else { 1.0 };
    Ok(Line {
        slope,
        intercept,
        r_squared,
    })
}

/// Sums the asymptotic kernel `sqrt(e^{-n/N}/n) sqrt(e^{-r n/N}/r)` over
/// `n = 1..=N` at each separation and fits the log-log slope.
pub fn kernel_reconstruct(n_sites: usize, separations: &[usize]) -> Result<KernelReconstruction> {
    if n_sites < 64 {
        return Err(Error::Domain(format!("kernel check needs N >= 64, got {n_sites}")));
    }
    let big_n = n_sites as f64;
    let seps: Vec<usize> = separations.iter().copied().filter(|&r| r > 0).collect();
    if seps.len() < separations.len() {
        log::warn!("dropping r = 0 from the kernel separations");
    }
    if seps.iter().any(|&r| 8 * r < n_sites || 2 * r > n_sites) {
        log::warn!("some separations fall outside the window [N/8, N/2]");
    }
    let values: Vec<f64> = seps
        .iter()
        .map(|&r| {
            let r = r as f64;
            (1..=n_sites)
                .map(|n| {
                    let n = n as f64;
                    ((-n / big_n).exp() / n).sqrt() * ((-r * n / big_n).exp() / r).sqrt()
                })
                .sum()
        })
        .collect();
    let xs: Vec<f64> = seps.iter().map(|&r| (r as f64).ln()).collect();
    let ys: Vec<f64> = values.iter().map(|v| v.ln()).collect();
    let line = least_squares(&xs, &ys)?;
    let window_integrals = seps
        .iter()
        .map(|&r| incomplete_gamma_half(r as f64 / (2.0 * big_n), r as f64 / 2.0))
        .collect();
    Ok(KernelReconstruction {
        n_sites,
        separations: seps,
        values,
        slope: line.slope,
        r_squared: line.r_squared,
        window_integrals,
        gamma_half: gamma_half(),
    })
}

/// `int_0^inf e^{-x} x^{-1/2} dx`.
pub fn gamma_half() -> f64 {
    // e^{-u^2} is below 1e-43 past u = 10
    incomplete_gamma_half(0.0, 100.0)
}

/// `int_a^b e^{-x} x^{-1/2} dx`, via `x = u^2` to remove the endpoint
/// singularity.
pub fn incomplete_gamma_half(a: f64, b: f64) -> f64 {
    let f = |u: f64| 2.0 * (-u * u).exp();
    adaptive_simpson(&f, a.sqrt(), b.sqrt(), 1e-13, 50)
}

fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64, depth: u32) -> f64 {
    let (fa, fb) = (f(a), f(b));
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson_step(f, a, b, fa, fm, fb, whole, tol, depth)
}

#[allow(clippy::too_many_arguments)]
fn simpson_step(f: &dyn Fn(f64) -> f64, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
    let m = 0.5 * (a + b);
    let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
    let (flm, frm) = (f(lm), f(rm));
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let diff = left + right - whole;
    if depth == 0 || diff.abs() <= 15.0 * tol {
        return left + right + diff / 15.0;
    }
    simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
        + simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
}

/// Largest admissible number of Haar levels for size `n`.
pub fn max_haar_levels(n: usize) -> usize {
    if n < 2 { 0 } else { n.trailing_zeros() as usize }
}

/// Orthonormal 2D Haar transform `W S W^T` with `levels` levels.
pub fn haar_transform(s: &DMatrix<f64>, levels: usize) -> Result<DMatrix<f64>> {
    let w = haar_matrix(s.nrows(), levels)?;
    if s.ncols() != s.nrows() {
        return Err(Error::Format("Haar transform needs a square matrix".into()));
    }
    Ok(&w * s * w.transpose())
}

pub fn inverse_haar_transform(t: &DMatrix<f64>, levels: usize) -> Result<DMatrix<f64>> {
    let w = haar_matrix(t.nrows(), levels)?;
    if t.ncols() != t.nrows() {
        return Err(Error::Format("Haar transform needs a square matrix".into()));
    }
    Ok(w.transpose() * t * &w)
}

/// Rows are the analysis filters: after each level the first half holds
/// averages, the second half differences.
fn haar_matrix(n: usize, levels: usize) -> Result<DMatrix<f64>> {
    let max = max_haar_levels(n);
    if levels == 0 || levels > max {
        return Err(Error::Domain(format!("Haar levels must be in 1..={max} for size {n}, got {levels}")));
    }
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let mut w = DMatrix::<f64>::identity(n, n);
    let mut len = n;
    for _ in 0..levels {
        let mut step = DMatrix::<f64>::identity(n, n);
        for r in 0..len {
            for c in 0..len {
                step[(r, c)] = 0.0;
            }
        }
        for k in 0..len / 2 {
            step[(k, 2 * k)] = h;
            step[(k, 2 * k + 1)] = h;
            step[(len / 2 + k, 2 * k)] = h;
            step[(len / 2 + k, 2 * k + 1)] = -h;
        }
        w = step * w;
        len /= 2;
    }
    Ok(w)
}
