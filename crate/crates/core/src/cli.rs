//! Command-line front end.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, ValueEnum};

use crate::dump::{expansion_to_string, write_mixture};
use crate::error::{Error, Result};
use crate::kernel::coulomb_reference_expansion;
use crate::molecule::MoleculeSpec;
use crate::reduction::{group_stats, GroupStats, GroupingConfig};
use crate::scf::{total_energy, IterationRecord, Preset, ScfConfig, ScfDriver, ScfState};

pub const EXIT_CONVERGED: i32 = 0;
pub const EXIT_NOT_CONVERGED: i32 = 2;
pub const EXIT_VALIDATION: i32 = 3;
pub const EXIT_NUMERICAL: i32 = 4;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum PresetName {
    #[value(name = "heh+")]
    HehPlus,
    #[value(name = "lih")]
    Lih,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum GuessName {
    #[value(name = "heh+")]
    HehPlus,
    #[value(name = "lih")]
    Lih,
    /// One `σ = 1` atom per orbital on the nuclei, in order.
    Atomic,
}

#[derive(Clone, Debug, Parser)]
#[command(
    name = "gausshf",
    version,
    about = "Hartree-Fock with orbitals represented as Gaussian mixtures",
    allow_negative_numbers = true
)]
pub struct Args {
    /// Molecule file: `orbitals N` plus one `Z x y z` line per nucleus.
    #[arg(long, value_name = "PATH", required_unless_present_any = ["preset", "export_coulomb"])]
    pub molecule: Option<PathBuf>,

    /// Built-in molecule and starting orbitals.
    #[arg(long, value_enum)]
    pub preset: Option<PresetName>,

    /// Starting orbitals; defaults to the preset's, or `atomic`.
    #[arg(long, value_enum)]
    pub guess: Option<GuessName>,

    /// Reduction tolerance.
    #[arg(long, default_value_t = 1e-6)]
    pub eps: f64,

    /// Stop once every orbital energy changes by less than this.
    #[arg(long, default_value_t = 4e-6)]
    pub energy_tol: f64,

    /// Shape threshold of the global group.
    #[arg(long, default_value_t = 1.0)]
    pub sigma_far: f64,

    #[arg(long, default_value_t = 100)]
    pub max_iter: usize,

    /// Write the final orbitals here as `phi_<j>.txt`.
    #[arg(long, value_name = "DIR")]
    pub dump_orbitals: Option<PathBuf>,

    /// Sample the orbitals on a line: axis (x, y or z), start, end, count.
    #[arg(long, num_args = 4, value_names = ["AXIS", "A", "B", "N"], allow_negative_numbers = true)]
    pub line_samples: Option<Vec<String>>,

    /// Where the line samples go.
    #[arg(long, value_name = "PATH", default_value = "line_samples.csv")]
    pub line_output: PathBuf,

    /// Write the run report here instead of standard output.
    #[arg(long, value_name = "PATH")]
    pub report: Option<PathBuf>,

    /// Write the per-iteration log here as well as to standard error.
    #[arg(long, value_name = "PATH")]
    pub log: Option<PathBuf>,

    /// Write one line per group reduction: key, input terms, output terms, error estimate.
    #[arg(long, value_name = "PATH")]
    pub reduction_log: Option<PathBuf>,

    /// Drop the Coulomb and exchange operators.
    #[arg(long)]
    pub no_ee: bool,

    /// Write the Coulomb kernel expansion and exit.
    #[arg(long, value_name = "PATH")]
    pub export_coulomb: Option<PathBuf>,
}

/// Axis-aligned sampling line.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LineSpec {
    pub axis: usize,
    pub start: f64,
    pub end: f64,
    pub count: usize,
}

impl LineSpec {
    pub fn parse(fields: &[String]) -> Result<Self> {
        let bad = |m: String| Error::InvalidArgument(format!("--line-samples: {m}"));
        let [axis, a, b, n] = fields else {
            return Err(bad("expected AXIS A B N".into()));
        };
        let axis = match axis.as_str() {
            "x" => 0,
            "y" => 1,
            "z" => 2,
            other => return Err(bad(format!("unknown axis `{other}`"))),
        };
        let num = |s: &str| {
            s.parse::<f64>()
                .map_err(|_| bad(format!("not a number: `{s}`")))
        };
        let count: usize = n.parse().map_err(|_| bad(format!("not a count: `{n}`")))?;
        if count == 0 {
            return Err(bad("count must be positive".into()));
        }
        Ok(Self {
            axis,
            start: num(a)?,
            end: num(b)?,
            count,
        })
    }

    pub fn points(&self) -> impl Iterator<Item = f64> + '_ {
        let step = if self.count > 1 {
            (self.end - self.start) / (self.count - 1) as f64
        } else {
            0.0
        };
        (0..self.count).map(move |i| self.start + step * i as f64)
    }
}

/// CSV with columns `x, phi_1, …, phi_N`.
pub fn line_samples_csv(orbitals: &[crate::GaussianMixture], line: &LineSpec) -> String {
    let axis = ["x", "y", "z"][line.axis];
    let mut s = String::from(axis);
    for j in 1..=orbitals.len() {
        let _ = write!(s, ",phi_{j}");
    }
    s.push('\n');
    for t in line.points() {
        let mut p = [0.0; 3];
        p[line.axis] = t;
        let _ = write!(s, "{t:.16e}");
        for o in orbitals {
            let _ = write!(s, ",{:.16e}", o.evaluate(&p));
        }
        s.push('\n');
    }
    s
}

/// Summary of a finished run.
#[derive(Clone, Debug, PartialEq)]
pub struct RunReport {
    pub converged: bool,
    pub iterations: usize,
    pub energies: Vec<f64>,
    pub total_energy: f64,
    pub terms: Vec<usize>,
    pub group_stats: Vec<GroupStats>,
    pub hull_violations: usize,
    pub wall_seconds: f64,
}

impl RunReport {
    pub fn new(
        state: &ScfState,
        mol: &MoleculeSpec,
        cfg: &ScfConfig,
        hull_violations: usize,
        wall_seconds: f64,
    ) -> Self {
        let nuclei = mol.positions();
        Self {
            converged: state.converged,
            iterations: state.iteration,
            energies: state.energies.clone(),
            total_energy: total_energy(state, mol, cfg.electron_repulsion),
            terms: state.term_counts(),
            group_stats: state
                .orbitals
                .iter()
                .map(|o| group_stats(o, &nuclei, &cfg.grouping))
                .collect(),
            hull_violations,
            wall_seconds,
        }
    }

    /// `key=value` lines.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "converged={}", self.converged);
        let _ = writeln!(s, "iterations={}", self.iterations);
        for (j, e) in self.energies.iter().enumerate() {
            let _ = writeln!(s, "energy_{}={e:.16e}", j + 1);
        }
        let _ = writeln!(s, "total_energy={:.16e}", self.total_energy);
        for (j, (t, g)) in self.terms.iter().zip(&self.group_stats).enumerate() {
            let k = j + 1;
            let _ = writeln!(s, "terms_{k}={t}");
            let _ = writeln!(s, "n_global_{k}={}", g.global);
            let _ = writeln!(s, "n_groups_{k}={}", g.groups);
            let _ = writeln!(s, "n_max_{k}={}", g.max);
            let _ = writeln!(s, "n_min_{k}={}", g.min);
            let _ = writeln!(s, "n_ave_{k}={:.2}", g.average);
        }
        let _ = writeln!(s, "hull_violations={}", self.hull_violations);
        let _ = writeln!(s, "wall_seconds={:.3}", self.wall_seconds);
        s
    }
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::InvalidArgument(_) | Error::InvalidTerm(_) | Error::Parse { .. } | Error::Io(_) => {
            EXIT_VALIDATION
        }
        Error::NotConverged { .. } => EXIT_NOT_CONVERGED,
        _ => EXIT_NUMERICAL,
    }
}

/// Run the command and return the process exit code. Diagnostics go to `err`.
pub fn run_command(args: &Args, err: &mut dyn std::io::Write) -> i32 {
    match execute(args, err) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            exit_code(&e)
        }
    }
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    Ok(std::fs::write(path, text)?)
}

fn execute(args: &Args, err: &mut dyn std::io::Write) -> Result<i32> {
    let started = Instant::now();
    if let Some(path) = &args.export_coulomb {
        write_file(path, &expansion_to_string(&coulomb_reference_expansion()))?;
        if args.molecule.is_none() && args.preset.is_none() {
            return Ok(EXIT_CONVERGED);
        }
    }
    let line = args
        .line_samples
        .as_deref()
        .map(LineSpec::parse)
        .transpose()?;
    let mol = match (&args.molecule, args.preset) {
        (Some(path), _) => MoleculeSpec::parse_file(path)?,
        (None, Some(PresetName::HehPlus)) => MoleculeSpec::heh_plus(),
        (None, Some(PresetName::Lih)) => MoleculeSpec::lih(),
        (None, None) => return Err(Error::InvalidArgument("give --molecule or --preset".into())),
    };
    let guess = args.guess.unwrap_or(match args.preset {
        Some(PresetName::HehPlus) => GuessName::HehPlus,
        Some(PresetName::Lih) => GuessName::Lih,
        None => GuessName::Atomic,
    });
    let preset = match guess {
        GuessName::HehPlus => Preset::HehPlus,
        GuessName::Lih => Preset::Lih,
        GuessName::Atomic => Preset::Atomic(1.0),
    };
    let cfg = ScfConfig {
        energy_tol: args.energy_tol,
        max_iterations: args.max_iter,
        grouping: GroupingConfig {
            sigma_far: args.sigma_far,
            reduction_eps: args.eps,
            ..GroupingConfig::default()
        },
        electron_repulsion: !args.no_ee,
        ..ScfConfig::default()
    };

    let coulomb = coulomb_reference_expansion();
    let mut driver = ScfDriver::new(&mol, &coulomb, cfg.clone())?;
    if args.reduction_log.is_some() {
        driver.ops.record_reductions();
    }
    let mut log_file = match &args.log {
        Some(p) => Some(std::fs::File::create(p)?),
        None => None,
    };
    driver.on_iteration = Some(Box::new(move |r: &IterationRecord| {
        let line = r.log_line();
        eprintln!("{line}");
        if let Some(f) = log_file.as_mut() {
            let _ = writeln!(f, "{line}");
        }
    }));
    let result = driver.run(&preset);
    let hull = driver.ops.hull_violations();
    let records = driver.ops.take_records();
    drop(driver);
    let state = result?;

    if let Some(path) = &args.reduction_log {
        let mut text = String::from("# group input output error\n");
        for r in &records {
            let _ = writeln!(text, "{r}");
        }
        write_file(path, &text)?;
    }
    if let Some(dir) = &args.dump_orbitals {
        std::fs::create_dir_all(dir)?;
        for (j, o) in state.orbitals.iter().enumerate() {
            write_mixture(&dir.join(format!("phi_{}.txt", j + 1)), o)?;
        }
    }
    if let Some(line) = &line {
        write_file(&args.line_output, &line_samples_csv(&state.orbitals, line))?;
    }
    let report = RunReport::new(&state, &mol, &cfg, hull, started.elapsed().as_secs_f64());
    match &args.report {
        Some(path) => write_file(path, &report.to_text())?,
        None => print!("{}", report.to_text()),
    }
    if state.converged {
        Ok(EXIT_CONVERGED)
    } else {
        let _ = writeln!(err, "error: {}", crate::scf::not_converged(&state));
        Ok(EXIT_NOT_CONVERGED)
    }
}
