//! The `heisvd` command line.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Map, Value};

use crate::basis::{SectorBasis, ED_MAX_SITES};
use crate::corr::CorrelationMatrix;
use crate::ed::{full_spectrum, lanczos_ground_state, LanczosConfig};
use crate::four_site;
use crate::io::{read_matrix_csv, write_matrix_csv, write_pgm, write_spectrum_csv, LoadedState, StateFile};
use crate::mps::{MpsState, SweepConfig, DEFAULT_CHI, DEFAULT_SWEEPS};
use crate::svd::{self, eigendecompose, DEFAULT_DOMAIN_THRESHOLD};
use crate::{Error, Result};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 1;
pub const EXIT_NUMERICAL: i32 = 2;

#[derive(Parser, Debug)]
#[command(name = "heisvd", version, about = "Heisenberg ring ground states and correlation-matrix SVD")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Compute a ground state and write a checkpoint.
    Solve(SolveArgs),
    /// Build the correlation matrix from a checkpoint or a thermal ensemble.
    Corr(CorrArgs),
    /// Decompose a correlation matrix and write the spectral datasets.
    Analyze(AnalyzeArgs),
    /// Print the four-site reference values as JSON.
    Oracle4(Oracle4Args),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Method {
    Ed,
    Mps,
}

#[derive(Args, Debug)]
pub struct SolveArgs {
    #[arg(long, value_enum)]
    pub method: Method,
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = DEFAULT_CHI)]
    pub chi: usize,
    #[arg(long, default_value_t = DEFAULT_SWEEPS)]
    pub sweeps: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    pub j: f64,
    /// Also track the correlation spectrum after every sweep (mps only).
    #[arg(long)]
    pub track_spectrum: bool,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct CorrArgs {
    #[arg(long, conflicts_with_all = ["n", "beta"], required_unless_present = "beta")]
    pub state: Option<PathBuf>,
    #[arg(long, requires = "beta")]
    pub n: Option<usize>,
    #[arg(long, requires = "n", allow_negative_numbers = true)]
    pub beta: Option<f64>,
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    pub j: f64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct AnalyzeArgs {
    #[arg(long)]
    pub matrix: PathBuf,
    /// Comma-separated ranks to export, e.g. `1,2,4`.
    #[arg(long, value_delimiter = ',')]
    pub components: Vec<usize>,
    #[arg(long)]
    pub fit: bool,
    #[arg(long)]
    pub domains: bool,
    #[arg(long, default_value_t = DEFAULT_DOMAIN_THRESHOLD)]
    pub domain_threshold: f64,
    #[arg(long)]
    pub haar: bool,
    /// Defaults to the largest admissible depth.
    #[arg(long)]
    pub haar_levels: Option<usize>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct Oracle4Args {
    /// Write to this file instead of standard output.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Parses `args`, runs the command and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli.command) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::NoConvergence { .. } | Error::DegenerateGround { .. } | Error::ZeroNorm(_) | Error::Conditioning { .. } => {
            EXIT_NUMERICAL
        }
        _ => EXIT_INPUT,
    }
}

fn dispatch(cmd: Command) -> Result<()> {
    match cmd {
        Command::Solve(a) => solve(&a),
        Command::Corr(a) => corr(&a),
        Command::Analyze(a) => analyze(&a),
        Command::Oracle4(a) => oracle4(&a),
    }
}

fn solve(a: &SolveArgs) -> Result<()> {
    crate::basis::check_chain_length(a.n)?;
    fs::create_dir_all(&a.out)?;
    let mut manifest = Map::new();
    let mut artifacts = vec!["state.json".to_string()];
    let state = match a.method {
        Method::Ed => {
            if a.n > ED_MAX_SITES {
                return Err(Error::SizeCap {
                    n: a.n,
                    cap: ED_MAX_SITES,
                    what: "exact diagonalization",
                });
            }
            let basis = Arc::new(SectorBasis::enumerate(a.n, 0.0)?);
            let cfg = LanczosConfig {
                seed: a.seed,
                ..LanczosConfig::default()
            };
            let sol = lanczos_ground_state(basis, a.j, &cfg)?;
            log::info!(
                "lanczos: E = {:.12}, residual {:.2e} after {} products",
                sol.energy,
                sol.residual_norm,
                sol.iterations
            );
            manifest.insert("chi".into(), Value::Null);
            manifest.insert("sweeps".into(), Value::Null);
            StateFile::from_wavefunction(&sol.wf, a.j, sol.energy, a.seed)
        }
        Method::Mps => {
            let mut mps = MpsState::random(a.n, a.chi, a.seed)?;
            let cfg = SweepConfig {
                n_sweeps: a.sweeps,
                track_spectrum: a.track_spectrum,
            };
            let reports = mps.sweep_optimize(a.j, &cfg)?;
            let energy = mps.energy(a.j)?;
            let mut log_csv = String::from("sweep,energy,energy_change,spectrum_change\n");
            for r in &reports {
                log_csv.push_str(&format!(
                    "{},{:.16e},{:.16e},{}\n",
                    r.sweep_index,
                    r.energy,
                    r.energy_change,
                    r.spectrum_change.map(|c| format!("{c:.16e}")).unwrap_or_default()
                ));
            }
            fs::write(a.out.join("sweeps.csv"), log_csv)?;
            artifacts.push("sweeps.csv".into());
            manifest.insert("chi".into(), json!(a.chi));
            manifest.insert("sweeps".into(), json!(a.sweeps));
            StateFile::from_mps(&mps, a.j, energy)
        }
    };
    state.save(&a.out.join("state.json"))?;
    manifest.insert("method".into(), json!(method_name(a.method)));
    manifest.insert("seed".into(), json!(a.seed));
    manifest.insert("J".into(), json!(a.j));
    manifest.insert("energy".into(), json!(state.energy()));
    write_manifest(&a.out, "solve", a.n, manifest, artifacts)?;
    let _ = writeln!(std::io::stdout(), "{:.12}", state.energy());
    Ok(())
}

fn method_name(m: Method) -> &'static str {
    match m {
        Method::Ed => "ed",
        Method::Mps => "mps",
    }
}

fn corr(a: &CorrArgs) -> Result<()> {
    let mut manifest = Map::new();
    let matrix = if let Some(path) = &a.state {
        let file = StateFile::load(path)?;
        manifest.insert("J".into(), json!(file.j()));
        manifest.insert("energy".into(), json!(file.energy()));
        if let StateFile::Mps { chi, seed, sweep_count, .. } = &file {
            manifest.insert("method".into(), json!("mps"));
            manifest.insert("chi".into(), json!(chi));
            manifest.insert("sweeps".into(), json!(sweep_count));
            manifest.insert("seed".into(), json!(seed));
        } else if let StateFile::EdWavefunction { seed, .. } = &file {
            manifest.insert("method".into(), json!("ed"));
            manifest.insert("seed".into(), json!(seed));
        }
        match file.restore()? {
            LoadedState::Ed(wf) => CorrelationMatrix::from_wavefunction(&wf)?,
            LoadedState::Mps(state) => CorrelationMatrix::from_mps(&state)?,
        }
    } else {
        let (n, beta) = match (a.n, a.beta) {
            (Some(n), Some(b)) => (n, b),
            _ => return Err(Error::Domain("thermal mode needs both --n and --beta".into())),
        };
        if !(beta >= 0.0) {
            return Err(Error::Domain(format!("inverse temperature must be >= 0, got {beta}")));
        }
        let spectrum = full_spectrum(n, a.j)?;
        manifest.insert("method".into(), json!("ed"));
        manifest.insert("J".into(), json!(a.j));
        manifest.insert("beta".into(), json!(beta));
        CorrelationMatrix::thermal(&spectrum, beta)?
    };
    fs::create_dir_all(&a.out)?;
    write_matrix_csv(&a.out.join("corr.csv"), &matrix.entries)?;
    write_pgm(&a.out.join("corr.pgm"), &matrix.entries)?;
    let spec = eigendecompose(&matrix)?;
    manifest.insert("trace_check".into(), trace_check(&spec.values, matrix.n_sites));
    let report = matrix.check_invariants();
    manifest.insert("invariants".into(), serde_json::to_value(&report)?);
    write_manifest(
        &a.out,
        "corr",
        matrix.n_sites,
        manifest,
        vec!["corr.csv".into(), "corr.pgm".into()],
    )?;
    Ok(())
}

fn trace_check(values: &[f64], n_sites: usize) -> Value {
    let sum: f64 = values.iter().sum();
    let expected = n_sites as f64 / 4.0;
    json!({ "sum_sqrt_lambda": sum, "expected": expected, "abs_error": (sum - expected).abs() })
}

fn analyze(a: &AnalyzeArgs) -> Result<()> {
    let raw = read_matrix_csv(&a.matrix)?;
    let matrix = CorrelationMatrix::from_matrix(raw)?;
    let n = matrix.n_sites;
    let spec = eigendecompose(&matrix)?;
    fs::create_dir_all(&a.out)?;
    let mut artifacts = vec!["spectrum.csv".to_string()];
    write_spectrum_csv(&a.out.join("spectrum.csv"), &spec)?;

    let mut manifest = inherited_run_fields(&a.matrix);
    for &k in &a.components {
        let c = spec.component(k)?;
        let norm = c.matrix.norm();
        let scaled = if norm > 0.0 { c.matrix / norm } else { c.matrix };
        let name = format!("component_{k}.csv");
        write_matrix_csv(&a.out.join(&name), &scaled)?;
        artifacts.push(name);
    }
    if !a.components.is_empty() {
        manifest.insert("component_normalization".into(), json!("unit-frobenius"));
    }
    if a.fit {
        match svd::fit_scaling(&spec, &svd::default_fit_set(n), true) {
            Ok(fit) => {
                fs::write(a.out.join("fit.json"), serde_json::to_string_pretty(&fit)? + "\n")?;
                artifacts.push("fit.json".into());
            }
            Err(Error::TooFewPoints(k)) => log::warn!("skipping the scaling fit: only {k} usable ranks"),
            Err(e) => return Err(e),
        }
    }
    if a.domains {
        let mut csv = String::from("n,k,L,wall_count\n");
        for k in 1..=n {
            let d = spec.measure_component(k, a.domain_threshold)?;
            csv.push_str(&format!(
                "{},{:.16e},{:.16e},{}\n",
                d.n, d.wavenumber, d.domain_size, d.wall_count
            ));
        }
        fs::write(a.out.join("domains.csv"), csv)?;
        artifacts.push("domains.csv".into());
    }
    if a.haar {
        let levels = a.haar_levels.unwrap_or_else(|| svd::max_haar_levels(n));
        let t = svd::haar_transform(&matrix.entries, levels)?;
        write_matrix_csv(&a.out.join("haar.csv"), &t)?;
        artifacts.push("haar.csv".into());
        manifest.insert("haar_levels".into(), json!(levels));
    }
    manifest.insert("trace_check".into(), trace_check(&spec.values, n));
    write_manifest(&a.out, "analyze", n, manifest, artifacts)?;
    Ok(())
}

/// Run parameters from a `manifest.json` next to the matrix, if present.
fn inherited_run_fields(matrix_path: &Path) -> Map<String, Value> {
    let mut out = Map::new();
    let Some(dir) = matrix_path.parent() else {
        return out;
    };
    let Ok(text) = fs::read_to_string(dir.join("manifest.json")) else {
        return out;
    };
    if let Ok(Value::Object(prev)) = serde_json::from_str::<Value>(&text) {
        for key in ["J", "method", "chi", "sweeps", "seed", "beta", "energy"] {
            if let Some(v) = prev.get(key) {
                out.insert(key.into(), v.clone());
            }
        }
    }
    out
}

fn oracle4(a: &Oracle4Args) -> Result<()> {
    let text = serde_json::to_string_pretty(&four_site::reference()?)?;
    match &a.out {
        Some(p) => fs::write(p, text + "\n")?,
        None => {
            // a closed pipe is not an error for a dump command
            let _ = writeln!(std::io::stdout(), "{text}");
        }
    }
    Ok(())
}

/// Writes `manifest.json` with keys in sorted order. Missing run fields are
/// written as null.
fn write_manifest(
    dir: &Path,
    command: &str,
    n_sites: usize,
    mut fields: Map<String, Value>,
    artifacts: Vec<String>,
) -> Result<()> {
    for key in ["J", "method", "chi", "sweeps", "seed", "beta", "energy", "trace_check"] {
        fields.entry(key).or_insert(Value::Null);
    }
    fields.insert("command".into(), json!(command));
    fields.insert("n_sites".into(), json!(n_sites));
    fields.insert("artifacts".into(), json!(artifacts));
    fields.insert(
        "timestamp".into(),
        json!(chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true)),
    );
    let text = serde_json::to_string_pretty(&Value::Object(fields))?;
    fs::write(dir.join("manifest.json"), text + "\n")?;
    Ok(())
}
