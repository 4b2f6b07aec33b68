//! File formats: state checkpoints, matrix CSVs, spectrum tables and
//! graymap heatmaps.

use std::fs;
use std::io::Write;
use std::path::Path;
use std::sync::Arc;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::basis::{SectorBasis, Wavefunction};
use crate::mps::MpsState;
use crate::svd::SvdSpectrum;
use crate::{Error, Result};

pub const STATE_VERSION: u32 = 1;

/// Checkpoint written by `solve`. MPS tensors are stored as
/// `[site][p][row][col]` with `p = 0` spin down.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "format", rename_all = "kebab-case")]
pub enum StateFile {
    EdWavefunction {
        version: u32,
        n_sites: usize,
        sz_total: f64,
        j: f64,
        energy: f64,
        seed: u64,
        /// In increasing order of configuration bit word.
        amplitudes: Vec<f64>,
    },
    Mps {
        version: u32,
        n_sites: usize,
        chi: usize,
        seed: u64,
        sweep_count: usize,
        j: f64,
        energy: f64,
        tensors: Vec<[Vec<Vec<f64>>; 2]>,
    },
}

pub enum LoadedState {
    Ed(Wavefunction),
    Mps(MpsState),
}

impl StateFile {
    pub fn from_wavefunction(wf: &Wavefunction, j: f64, energy: f64, seed: u64) -> Self {
        StateFile::EdWavefunction {
            version: STATE_VERSION,
            n_sites: wf.n_sites(),
            sz_total: wf.basis().sz_total().unwrap_or(0.0),
            j,
            energy,
            seed,
            amplitudes: wf.amps().to_vec(),
        }
    }

    pub fn from_mps(state: &MpsState, j: f64, energy: f64) -> Self {
        let to_rows = |m: &DMatrix<f64>| m.row_iter().map(|r| r.iter().copied().collect()).collect();
        StateFile::Mps {
            version: STATE_VERSION,
            n_sites: state.n_sites(),
            chi: state.chi(),
            seed: state.seed(),
            sweep_count: state.sweeps_done(),
            j,
            energy,
            tensors: state.tensors().iter().map(|[a, b]| [to_rows(a), to_rows(b)]).collect(),
        }
    }

    pub fn n_sites(&self) -> usize {
        match self {
            StateFile::EdWavefunction { n_sites, .. } | StateFile::Mps { n_sites, .. } => *n_sites,
        }
    }

    pub fn j(&self) -> f64 {
        match self {
            StateFile::EdWavefunction { j, .. } | StateFile::Mps { j, .. } => *j,
        }
    }

    pub fn energy(&self) -> f64 {
        match self {
            StateFile::EdWavefunction { energy, .. } | StateFile::Mps { energy, .. } => *energy,
        }
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        let state: StateFile = serde_json::from_str(&text)?;
        let version = match &state {
            StateFile::EdWavefunction { version, .. } | StateFile::Mps { version, .. } => *version,
        };
        if version != STATE_VERSION {
            return Err(Error::Format(format!("unsupported state version {version}")));
        }
        Ok(state)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, serde_json::to_string(self)?)?;
        Ok(())
    }

    pub fn restore(&self) -> Result<LoadedState> {
        match self {
            StateFile::EdWavefunction {
                n_sites,
                sz_total,
                amplitudes,
                ..
            } => {
                let basis = Arc::new(SectorBasis::enumerate(*n_sites, *sz_total)?);
                Ok(LoadedState::Ed(Wavefunction::new(basis, amplitudes.clone())?))
            }
            StateFile::Mps {
                n_sites,
                chi,
                seed,
                sweep_count,
                tensors,
                ..
            } => {
                if tensors.len() != *n_sites {
                    return Err(Error::Format(format!("{} tensors for {n_sites} sites", tensors.len())));
                }
                let mats = tensors
                    .iter()
                    .map(|pair| {
                        let conv = |rows: &Vec<Vec<f64>>| -> Result<DMatrix<f64>> {
                            if rows.len() != *chi || rows.iter().any(|r| r.len() != *chi) {
                                return Err(Error::Format(format!("tensor is not {chi}x{chi}")));
                            }
                            Ok(DMatrix::from_fn(*chi, *chi, |r, c| rows[r][c]))
                        };
                        Ok([conv(&pair[0])?, conv(&pair[1])?])
                    })
                    .collect::<Result<Vec<_>>>()?;
                Ok(LoadedState::Mps(MpsState::from_tensors(mats, *seed, *sweep_count)?))
            }
        }
    }
}

fn fmt(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn write_matrix_csv(path: &Path, m: &DMatrix<f64>) -> Result<()> {
    let mut out = String::with_capacity(m.len() * 24);
    for row in m.row_iter() {
        let fields: Vec<String> = row.iter().map(|x| fmt(*x)).collect();
        out.push_str(&fields.join(","));
        out.push('\n');
    }
    fs::write(path, out)?;
    Ok(())
}

/// Reads a headerless numeric CSV; rows must all have the same length.
pub fn read_matrix_csv(path: &Path) -> Result<DMatrix<f64>> {
    let text = fs::read_to_string(path)?;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (line_no, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let row = line
            .split(',')
            .map(|f| {
                f.trim()
                    .parse::<f64>()
                    .map_err(|e| Error::Format(format!("line {}: {e}: {f:?}", line_no + 1)))
            })
            .collect::<Result<Vec<f64>>>()?;
        if let Some(first) = rows.first() {
            if first.len() != row.len() {
                return Err(Error::Format(format!(
                    "line {} has {} fields, expected {}",
                    line_no + 1,
                    row.len(),
                    first.len()
                )));
            }
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(Error::Format("empty matrix file".into()));
    }
    let (r, c) = (rows.len(), rows[0].len());
    Ok(DMatrix::from_fn(r, c, |i, j| rows[i][j]))
}

pub fn write_spectrum_csv(path: &Path, spec: &SvdSpectrum) -> Result<()> {
    let mut out = String::from("n,sqrt_lambda,lambda\n");
    for (k, (v, l)) in spec.values.iter().zip(&spec.squared).enumerate() {
        out.push_str(&format!("{},{},{}\n", k + 1, fmt(*v), fmt(*l)));
    }
    fs::write(path, out)?;
    Ok(())
}

/// Binary P5 graymap of `|m|`, white at the largest magnitude.
pub fn write_pgm(path: &Path, m: &DMatrix<f64>) -> Result<()> {
    let top = m.iter().fold(0.0f64, |a, x| a.max(x.abs()));
    let mut file = fs::File::create(path)?;
    write!(file, "P5\n{} {}\n255\n", m.ncols(), m.nrows())?;
    let mut pixels = Vec::with_capacity(m.len());
    for row in m.row_iter() {
        for x in row.iter() {
            let v = if top > 0.0 { x.abs() / top } else { 0.0 };
            pixels.push((v * 255.0).round() as u8);
        }
    }
    file.write_all(&pixels)?;
    Ok(())
}
