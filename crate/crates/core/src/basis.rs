//! Spin-1/2 configurations on a ring, fixed-magnetization sectors and the
//! Heisenberg Hamiltonian applied matrix-free.
//!
//! A configuration is an `N`-bit word where bit `i` set means spin up at site
//! `i`. Sectors hold their configurations in increasing integer order, so the
//! ordinal of a configuration is found by binary search.

use std::sync::Arc;

use rayon::prelude::*;

use crate::error::{Error, Result};

/// Largest chain handled by the configuration-basis code.
pub const ED_MAX_SITES: usize = 20;

/// Below this dimension the Hamiltonian is applied on one thread.
const PAR_THRESHOLD: usize = 8192;

#[derive(Copy, Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SpinConfiguration(pub u64);

impl SpinConfiguration {
    #[inline]
    pub fn is_up(self, site: usize) -> bool {
        (self.0 >> site) & 1 == 1
    }

    /// `+1` for up, `-1` for down.
    #[inline]
    pub fn sign(self, site: usize) -> f64 {
        if self.is_up(site) {
            1.0
        } else {
            -1.0
        }
    }

    #[inline]
    pub fn sz(self, site: usize) -> f64 {
        0.5 * self.sign(site)
    }

    pub fn n_up(self) -> u32 {
        self.0.count_ones()
    }

    /// Swap the spins on two sites.
    #[inline]
    pub fn flip_pair(self, a: usize, b: usize) -> Self {
        Self(self.0 ^ ((1 << a) | (1 << b)))
    }

    /// Cyclic shift by one site on a ring of `n_sites`: the spin at site `i`
    /// moves to site `i + 1 (mod N)`.
    pub fn translate(self, n_sites: usize) -> Self {
        let mask = low_mask(n_sites);
        let top = (self.0 >> (n_sites - 1)) & 1;
        Self(((self.0 << 1) & mask) | top)
    }

    /// Néel pattern with up spins on even sites.
    pub fn neel(n_sites: usize) -> Self {
        Self((0..n_sites).step_by(2).fold(0, |acc, i| acc | (1 << i)))
    }
}

#[inline]
fn low_mask(n_sites: usize) -> u64 {
    if n_sites >= 64 {
        u64::MAX
    } else {
        (1u64 << n_sites) - 1
    }
}

/// Validates a chain length for every solver in this crate.
pub fn check_chain_length(n_sites: usize) -> Result<()> {
    if n_sites < 4 || !n_sites.is_multiple_of(2) {
        return Err(Error::InvalidSize(n_sites));
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq)]
pub struct SectorBasis {
    n_sites: usize,
    n_up: Option<usize>,
    configs: Vec<SpinConfiguration>,
}

impl SectorBasis {
    /// All configurations of `n_sites` spins with total magnetization
    /// `sz_total`. A magnetization that cannot be reached gives an empty basis.
    pub fn enumerate(n_sites: usize, sz_total: f64) -> Result<Self> {
        check_chain_length(n_sites)?;
        if n_sites > ED_MAX_SITES {
            return Err(Error::SizeCap {
                n: n_sites,
                cap: ED_MAX_SITES,
                what: "configuration-basis enumeration",
            });
        }
        let twice = 2.0 * sz_total;
        if !twice.is_finite() || twice.fract() != 0.0 {
            return Err(Error::Domain(format!(
                "total S_z must be a half-integer, got {sz_total}"
            )));
        }
        let n_up2 = n_sites as i64 + twice as i64;
        if n_up2 < 0 || n_up2 % 2 != 0 || n_up2 / 2 > n_sites as i64 {
            return Ok(Self {
                n_sites,
                n_up: None,
                configs: Vec::new(),
            });
        }
        Ok(Self::with_up_count(n_sites, (n_up2 / 2) as usize))
    }

    /// Sector with exactly `n_up` up spins; `n_sites` is assumed valid.
    pub(crate) fn with_up_count(n_sites: usize, n_up: usize) -> Self {
        let mut configs = Vec::with_capacity(binomial(n_sites, n_up));
        if n_up == 0 {
            configs.push(SpinConfiguration(0));
        } else {
            // Gosper's hack: next larger word with the same popcount.
            let limit = 1u64 << n_sites;
            let mut v: u64 = (1u64 << n_up) - 1;
            while v < limit {
                configs.push(SpinConfiguration(v));
                let t = v | (v - 1);
                let tz = v.trailing_zeros();
                v = (t + 1) | (((!t & (!t).wrapping_neg()) - 1) >> (tz + 1));
            }
        }
        Self {
            n_sites,
            n_up: Some(n_up),
            configs,
        }
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn n_up(&self) -> Option<usize> {
        self.n_up
    }

    pub fn sz_total(&self) -> Option<f64> {
        self.n_up
            .map(|u| u as f64 - 0.5 * self.n_sites as f64)
    }

    pub fn dim(&self) -> usize {
        self.configs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.configs.is_empty()
    }

    pub fn configs(&self) -> &[SpinConfiguration] {
        &self.configs
    }

    pub fn config(&self, idx: usize) -> SpinConfiguration {
        self.configs[idx]
    }

    #[inline]
    pub fn index_of(&self, c: SpinConfiguration) -> Option<usize> {
        self.configs.binary_search(&c).ok()
    }
}

pub fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1usize, |acc, i| acc * (n - i) / (i + 1))
}

/// Real amplitudes over a sector basis.
#[derive(Clone, Debug)]
pub struct Wavefunction {
    basis: Arc<SectorBasis>,
    amps: Vec<f64>,
}

impl Wavefunction {
    pub fn new(basis: Arc<SectorBasis>, amps: Vec<f64>) -> Result<Self> {
        if amps.len() != basis.dim() {
            return Err(Error::DimensionMismatch {
                expected: basis.dim(),
                got: amps.len(),
            });
        }
        Ok(Self { basis, amps })
    }

    pub fn basis(&self) -> &Arc<SectorBasis> {
        &self.basis
    }

    pub fn amps(&self) -> &[f64] {
        &self.amps
    }

    pub fn into_amps(self) -> Vec<f64> {
        self.amps
    }

    pub fn n_sites(&self) -> usize {
        self.basis.n_sites()
    }

    pub fn norm(&self) -> f64 {
        dot(&self.amps, &self.amps).sqrt()
    }

    pub fn dot(&self, other: &Wavefunction) -> f64 {
        dot(&self.amps, &other.amps)
    }

    pub fn normalized(mut self) -> Result<Self> {
        let nrm = self.norm();
        if nrm == 0.0 || !nrm.is_finite() {
            return Err(Error::Domain(format!("cannot normalize a vector of norm {nrm}")));
        }
        self.amps.iter_mut().for_each(|a| *a /= nrm);
        Ok(self)
    }

    /// `H |self>` with coupling `j`. The result is not normalized.
    pub fn apply_hamiltonian(&self, j: f64) -> Wavefunction {
        let mut out = vec![0.0; self.amps.len()];
        apply_hamiltonian_into(&self.basis, j, &self.amps, &mut out);
        Wavefunction {
            basis: Arc::clone(&self.basis),
            amps: out,
        }
    }

    /// `<H>` for a normalized state.
    pub fn energy(&self, j: f64) -> f64 {
        dot(&self.amps, self.apply_hamiltonian(j).amps())
    }

    /// `<S^z_i S^z_j>`; diagonal in the configuration basis.
    pub fn correlator_zz(&self, i: usize, j: usize) -> Result<f64> {
        let n = self.n_sites();
        for site in [i, j] {
            if site >= n {
                return Err(Error::SiteIndex { site, n_sites: n });
            }
        }
        let (lo, hi) = if i <= j { (i, j) } else { (j, i) };
        Ok(self
            .basis
            .configs()
            .iter()
            .zip(&self.amps)
            .map(|(c, a)| a * a * c.sz(lo) * c.sz(hi))
            .sum())
    }

    /// Cyclic translation by one site.
    pub fn translate(&self) -> Wavefunction {
        let n = self.n_sites();
        let mut out = vec![0.0; self.amps.len()];
        for (c, a) in self.basis.configs().iter().zip(&self.amps) {
            let k = self
                .basis
                .index_of(c.translate(n))
                .expect("translation preserves the sector");
            out[k] = *a;
        }
        Wavefunction {
            basis: Arc::clone(&self.basis),
            amps: out,
        }
    }
}

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `out = H input` for the Heisenberg ring with coupling `j`.
///
/// Each output amplitude gathers from its own configuration and from the
/// configurations one spin exchange away, so rows are independent and the
/// parallel path produces the same bits as the serial one.
pub fn apply_hamiltonian_into(basis: &SectorBasis, j: f64, input: &[f64], out: &mut [f64]) {
    assert_eq!(input.len(), basis.dim());
    assert_eq!(out.len(), basis.dim());
    let n = basis.n_sites();
    let row = |idx: usize| -> f64 {
        let c = basis.configs[idx];
        let mut diag = 0.0;
        let mut off = 0.0;
        for site in 0..n {
            let next = (site + 1) % n;
            if c.is_up(site) == c.is_up(next) {
                diag += 0.25;
            } else {
                diag -= 0.25;
                let k = basis
                    .index_of(c.flip_pair(site, next))
                    .expect("spin exchange preserves the sector");
                off += input[k];
            }
        }
        j * (diag * input[idx] + 0.5 * off)
    };
    if basis.dim() >= PAR_THRESHOLD {
        out.par_iter_mut().enumerate().for_each(|(idx, o)| *o = row(idx));
    } else {
        out.iter_mut().enumerate().for_each(|(idx, o)| *o = row(idx));
    }
}
