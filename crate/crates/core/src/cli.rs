//! Command-line front end: scenario files, solver runs and reports.
//!
//! Exit codes: 0 success, 2 invalid input, 3 solver failure, 4 failed
//! certificates.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dissipation::DissipationModel;
use crate::energy::{EnergyModel, Loading};
use crate::error::{Error, Result};
use crate::geometry::{self, Point, Polygon};
use crate::mesh::{unit_square_with, Field, Mesh, Side, State};
use crate::solver::{run_1d_toy, run_quasistatic, Models, SolverConfig, TimeGrid, ToyConfig, Trajectory};
use crate::verify::{audit, AuditOptions, Certificate};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 2;
pub const EXIT_SOLVER: i32 = 3;
pub const EXIT_CERTIFICATE: i32 = 4;

/// Current scenario schema version.
pub const SCHEMA: u32 = 1;

pub const TRAJECTORY_HEADER: &str = "t,elastic,plastic,boundary,load,total,delta";
pub const TOY_HEADER: &str = "t,ell,f,p,dissipation,runaway_flag";

#[derive(Parser, Debug)]
#[command(name = "plastiq", version, about = "Quasistatic finite plasticity with compatible plastic strains")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Single material point with load ℓ(t) = λt; CSV on stdout or --out.
    Run1d(Run1dArgs),
    /// Run a 2D scenario file.
    Run2d(Run2dArgs),
    /// Geometry reports as JSON.
    #[command(subcommand)]
    Geom(GeomCommand),
    /// Certify a trajectory written by run2d.
    Verify(VerifyArgs),
    /// Run several scenarios concurrently (PLASTIQ_THREADS caps workers).
    Sweep(SweepArgs),
}

#[derive(Args, Debug)]
pub struct Run1dArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub lambda: f64,
    #[arg(long = "T", allow_hyphen_values = true)]
    pub end: f64,
    /// Number of time steps; the CSV has one more row than this.
    #[arg(long)]
    pub knots: usize,
    #[arg(long, default_value_t = 20.0)]
    pub p_max: f64,
    #[arg(long, default_value_t = 0.05)]
    pub p_min: f64,
    #[arg(long, default_value_t = 1e-4)]
    pub resolution: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct Run2dArgs {
    pub scenario: PathBuf,
    /// Directory for relative output paths (default: current directory).
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
pub enum GeomCommand {
    /// Hausdorff distance between two filled polygons.
    Hausdorff {
        #[arg(long)]
        a: PathBuf,
        #[arg(long)]
        b: PathBuf,
        /// Sampling step (default: 1% of the larger diameter).
        #[arg(long)]
        h: Option<f64>,
    },
    /// Sampled (ε, δ)-domain check.
    Jones {
        #[arg(long)]
        poly: PathBuf,
        #[arg(long)]
        eps: Option<f64>,
        #[arg(long)]
        delta: Option<f64>,
        #[arg(long, default_value_t = 2000)]
        pairs: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Ciarlet–Nečas check of a plastic field: `{"mesh": …, "field": […]}`.
    Cn {
        #[arg(long)]
        field: PathBuf,
    },
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    pub trajectory: PathBuf,
    pub scenario: PathBuf,
}

#[derive(Args, Debug)]
pub struct SweepArgs {
    #[arg(required = true)]
    pub scenarios: Vec<PathBuf>,
    /// Each scenario writes into `<out-dir>/<file stem>/`.
    #[arg(long, default_value = "sweep")]
    pub out_dir: PathBuf,
}

/// Where the mesh comes from: exactly one of `unit_square` and `file`.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeshSource {
    #[serde(default)]
    pub unit_square: Option<usize>,
    /// Dirichlet sides of the unit square (default: left).
    #[serde(default)]
    pub dirichlet: Option<Vec<Side>>,
    #[serde(default)]
    pub file: Option<PathBuf>,
}

/// Spatially uniform loads, piecewise linear between `knots`.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LoadSpec {
    pub knots: Vec<f64>,
    #[serde(default)]
    pub body_force: Option<Vec<Point>>,
    #[serde(default)]
    pub traction: Option<Vec<Point>>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    #[serde(rename = "T")]
    pub end: f64,
    pub intervals: usize,
}

/// Certificates to compute after a run; the counts are as in [`AuditOptions`].
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VerifySpec {
    pub enabled: bool,
    pub s_discr_competitors: usize,
    pub s_semi_competitors: usize,
    pub seed: u64,
    pub ceiling: f64,
    pub all_pairs: bool,
}

impl Default for VerifySpec {
    fn default() -> Self {
        let o = AuditOptions::default();
        VerifySpec {
            enabled: false,
            s_discr_competitors: o.s_discr_competitors,
            s_semi_competitors: o.s_semi_competitors,
            seed: o.seed,
            ceiling: o.ceiling,
            all_pairs: o.all_pairs,
        }
    }
}

impl VerifySpec {
    pub fn options(&self) -> AuditOptions {
        AuditOptions {
            s_discr_competitors: self.s_discr_competitors,
            s_semi_competitors: self.s_semi_competitors,
            seed: self.seed,
            ceiling: self.ceiling,
            all_pairs: self.all_pairs,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    #[serde(default = "default_csv")]
    pub csv: PathBuf,
    #[serde(default = "default_summary")]
    pub summary: PathBuf,
    #[serde(default = "default_trajectory")]
    pub trajectory: PathBuf,
}

fn default_csv() -> PathBuf {
    "trajectory.csv".into()
}

fn default_summary() -> PathBuf {
    "summary.json".into()
}

fn default_trajectory() -> PathBuf {
    "trajectory.json".into()
}

impl Default for OutputSpec {
    fn default() -> Self {
        OutputSpec { csv: default_csv(), summary: default_summary(), trajectory: default_trajectory() }
    }
}

/// A 2D run described in JSON. Unknown keys are rejected.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub schema: u32,
    pub mesh: MeshSource,
    #[serde(default = "EnergyModel::default_2d")]
    pub energy: EnergyModel,
    #[serde(default)]
    pub dissipation: DissipationModel,
    #[serde(default)]
    pub loading: Option<LoadSpec>,
    pub time_grid: GridSpec,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default)]
    pub verify: VerifySpec,
    #[serde(default)]
    pub output: OutputSpec,
    /// Directory of the scenario file; relative mesh paths resolve against it.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

impl Scenario {
    pub fn from_json(text: &str, base_dir: &Path) -> Result<Self> {
        let mut s: Scenario = serde_json::from_str(text)?;
        if s.schema != SCHEMA {
            return Err(Error::Scenario(format!("unsupported schema {} (expected {SCHEMA})", s.schema)));
        }
        s.base_dir = base_dir.to_path_buf();
        Ok(s)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        Scenario::from_json(&text, path.parent().unwrap_or(Path::new(".")))
    }

    pub fn mesh(&self) -> Result<Mesh> {
        match (&self.mesh.unit_square, &self.mesh.file) {
            (Some(n), None) => {
                let sides = self.mesh.dirichlet.clone().unwrap_or_else(|| vec![Side::Left]);
                unit_square_with(*n, &sides)
            }
            (None, Some(file)) => {
                if self.mesh.dirichlet.is_some() {
                    return Err(Error::Scenario("`dirichlet` only applies to unit_square meshes".into()));
                }
                let path = self.base_dir.join(file);
                let text = fs::read_to_string(&path)
                    .map_err(|e| Error::Scenario(format!("cannot read mesh {}: {e}", path.display())))?;
                Ok(serde_json::from_str(&text)?)
            }
            _ => Err(Error::Scenario("mesh needs exactly one of `unit_square` and `file`".into())),
        }
    }

    pub fn grid(&self) -> Result<TimeGrid> {
        TimeGrid::uniform(self.time_grid.end, self.time_grid.intervals)
    }

    pub fn models(&self) -> Result<Models> {
        let mesh = self.mesh()?;
        let nodes = mesh.node_count();
        let loading = match &self.loading {
            None => Loading::none(nodes),
            Some(spec) => {
                let zeros = vec![[0.0, 0.0]; spec.knots.len()];
                let body = spec.body_force.as_ref().unwrap_or(&zeros);
                let traction = spec.traction.as_ref().unwrap_or(&zeros);
                Loading::uniform(spec.knots.clone(), body, traction, nodes)?
            }
        };
        if self.energy.dim() != 2 {
            return Err(Error::Scenario("2D runs need a two-dimensional energy model".into()));
        }
        self.solver.validate()?;
        Ok(Models { mesh, energy: self.energy.clone(), dissipation: self.dissipation.clone(), loading })
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Summary {
    pub knots: usize,
    pub fineness: f64,
    pub final_energy: f64,
    pub delta_final: f64,
    pub energy_bound: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub certificates: Option<Vec<Certificate>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub all_pass: Option<bool>,
}

/// The per-knot energy CSV with [`TRAJECTORY_HEADER`].
pub fn trajectory_csv(traj: &Trajectory) -> String {
    let mut out = String::from(TRAJECTORY_HEADER);
    out.push('\n');
    for (i, e) in traj.energies.iter().enumerate() {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            traj.times[i], e.elastic, e.plastic, e.boundary, e.load, e.total, traj.delta_accumulated[i]
        );
    }
    out
}

/// The single-point CSV with [`TOY_HEADER`].
pub fn toy_csv(lambda: f64, grid: &TimeGrid, config: &ToyConfig) -> Result<String> {
    let mut out = String::from(TOY_HEADER);
    out.push('\n');
    for k in run_1d_toy(lambda, grid, config)? {
        let _ = writeln!(out, "{},{},{},{},{},{}", k.t, k.ell, k.f, k.p, k.dissipation, u8::from(k.runaway));
    }
    Ok(out)
}

/// Failure of a command, carrying its exit code.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl Failure {
    fn invalid(e: impl std::fmt::Display) -> Self {
        Failure { code: EXIT_INVALID, message: e.to_string() }
    }
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> std::result::Result<T, Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure::invalid(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Failure::invalid(format!("{}: {e}", path.display())))
}

fn write_file(path: &Path, contents: &str) -> std::result::Result<(), Failure> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            fs::create_dir_all(dir).map_err(Failure::invalid)?;
        }
    }
    fs::write(path, contents).map_err(|e| Failure::invalid(format!("{}: {e}", path.display())))
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("reports serialize");
    s.push('\n');
    s
}

/// Solves a scenario and writes its outputs below `out_dir`.
pub fn run_scenario(scenario: &Scenario, out_dir: &Path) -> std::result::Result<Summary, Failure> {
    let models = scenario.models().map_err(Failure::invalid)?;
    let grid = scenario.grid().map_err(Failure::invalid)?;
    let initial = State::reference(&models.mesh);
    let traj = run_quasistatic(&initial, &grid, &models, &scenario.solver)
        .map_err(|e| Failure { code: EXIT_SOLVER, message: e.to_string() })?;
    let (certificates, all_pass) = if scenario.verify.enabled {
        let certs = audit(&traj, &models, &scenario.verify.options()).map_err(Failure::invalid)?;
        let pass = certs.iter().all(|c| c.pass);
        (Some(certs), Some(pass))
    } else {
        (None, None)
    };
    let last = traj.len() - 1;
    let summary = Summary {
        knots: traj.len(),
        fineness: grid.fineness(),
        final_energy: traj.energies[last].total,
        delta_final: traj.delta_accumulated[last],
        energy_bound: traj.energy_bound,
        certificates,
        all_pass,
    };
    write_file(&out_dir.join(&scenario.output.csv), &trajectory_csv(&traj))?;
    write_file(&out_dir.join(&scenario.output.trajectory), &to_json(&traj))?;
    write_file(&out_dir.join(&scenario.output.summary), &to_json(&summary))?;
    Ok(summary)
}

fn load_scenario(path: &Path) -> std::result::Result<Scenario, Failure> {
    Scenario::load(path).map_err(|e| Failure::invalid(format!("{}: {e}", path.display())))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct FieldFile {
    mesh: Mesh,
    field: Field,
}

fn geom(cmd: &GeomCommand) -> std::result::Result<String, Failure> {
    match cmd {
        GeomCommand::Hausdorff { a, b, h } => {
            let pa: Polygon = read_json(a)?;
            let pb: Polygon = read_json(b)?;
            let h = h.unwrap_or(0.01 * pa.diameter().max(pb.diameter()));
            if !(h > 0.0) {
                return Err(Failure::invalid("sampling step must be positive"));
            }
            Ok(to_json(&geometry::polygon_hausdorff(&pa, &pb, h).map_err(Failure::invalid)?))
        }
        GeomCommand::Jones { poly, eps, delta, pairs, seed } => {
            let p: Polygon = read_json(poly)?;
            let (e0, d0) = geometry::default_jones_parameters(&p);
            let report = geometry::jones_verify(&p, eps.unwrap_or(e0), delta.unwrap_or(d0), *pairs, *seed)
                .map_err(Failure::invalid)?;
            Ok(to_json(&report))
        }
        GeomCommand::Cn { field } => {
            let f: FieldFile = read_json(field)?;
            if f.field.len() != f.mesh.node_count() {
                return Err(Failure::invalid("field length does not match the mesh"));
            }
            Ok(to_json(&geometry::ciarlet_necas_check(&f.mesh, &f.field).map_err(Failure::invalid)?))
        }
    }
}

fn verify(args: &VerifyArgs) -> std::result::Result<String, Failure> {
    let traj: Trajectory = read_json(&args.trajectory)?;
    traj.validate().map_err(Failure::invalid)?;
    let scenario = load_scenario(&args.scenario)?;
    let models = scenario.models().map_err(Failure::invalid)?;
    if traj.states.iter().any(|s| s.y.len() != models.mesh.node_count() || s.yp.len() != models.mesh.node_count()) {
        return Err(Failure::invalid("trajectory does not match the scenario mesh"));
    }
    let certs = audit(&traj, &models, &scenario.verify.options()).map_err(Failure::invalid)?;
    let report = to_json(&certs);
    let failed: Vec<String> = certs
        .iter()
        .filter(|c| !c.pass)
        .map(|c| format!("{:?} at {:?}: margin {:e} (tolerance {:e})", c.kind, c.knots, c.margin, c.tolerance))
        .collect();
    if failed.is_empty() {
        Ok(report)
    } else {
        Err(Failure { code: EXIT_CERTIFICATE, message: format!("{report}failed certificates:\n{}", failed.join("\n")) })
    }
}

fn sweep(args: &SweepArgs) -> std::result::Result<String, Failure> {
    let threads = std::env::var("PLASTIQ_THREADS").ok().and_then(|v| v.parse::<usize>().ok()).unwrap_or(0);
    let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().map_err(Failure::invalid)?;
    let results: Vec<(PathBuf, std::result::Result<Summary, Failure>)> = pool.install(|| {
        args.scenarios
            .par_iter()
            .map(|path| {
                let stem = path.file_stem().map(PathBuf::from).unwrap_or_else(|| "scenario".into());
                let out = args.out_dir.join(stem);
                (path.clone(), load_scenario(path).and_then(|s| run_scenario(&s, &out)))
            })
            .collect()
    });
    let mut lines = String::new();
    let mut worst = EXIT_OK;
    for (path, r) in results {
        match r {
            Ok(s) => {
                let _ = writeln!(lines, "{}: final energy {}, delta {}", path.display(), s.final_energy, s.delta_final);
            }
            Err(f) => {
                worst = worst.max(f.code);
                let _ = writeln!(lines, "{}: {}", path.display(), f.message);
            }
        }
    }
    if worst == EXIT_OK {
        Ok(lines)
    } else {
        Err(Failure { code: worst, message: lines })
    }
}

/// Runs a parsed command and returns what to print on success.
pub fn execute(cli: &Cli) -> std::result::Result<String, Failure> {
    match &cli.command {
        Command::Run1d(a) => {
            let grid = TimeGrid::uniform(a.end, a.knots).map_err(Failure::invalid)?;
            let cfg = ToyConfig { p_min: a.p_min, p_max: a.p_max, resolution: a.resolution, ..ToyConfig::default() };
            let csv = toy_csv(a.lambda, &grid, &cfg).map_err(Failure::invalid)?;
            match &a.out {
                Some(path) => write_file(path, &csv).map(|_| String::new()),
                None => Ok(csv),
            }
        }
        Command::Run2d(a) => {
            let scenario = load_scenario(&a.scenario)?;
            let out = a.out_dir.clone().unwrap_or_default();
            let summary = run_scenario(&scenario, &out)?;
            let text = to_json(&summary);
            if summary.all_pass == Some(false) {
                return Err(Failure { code: EXIT_CERTIFICATE, message: text });
            }
            Ok(text)
        }
        Command::Geom(g) => geom(g),
        Command::Verify(a) => verify(a),
        Command::Sweep(a) => sweep(a),
    }
}

/// Entry point of the binary: parses `args`, runs, prints, returns the exit
/// code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_INVALID } else { EXIT_OK };
        }
    };
    match execute(&cli) {
        Ok(text) => {
            let mut stdout = std::io::stdout().lock();
            let _ = stdout.write_all(text.as_bytes());
            EXIT_OK
        }
        Err(f) => {
            eprintln!("error: {}", f.message);
            f.code
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{"schema": 1, "mesh": {"unit_square": 2}, "time_grid": {"T": 1, "intervals": 2}}"#;

    #[test]
    fn scenario_defaults() {
        let s = Scenario::from_json(MINIMAL, Path::new(".")).unwrap();
        let m = s.models().unwrap();
        assert_eq!(m.mesh.node_count(), 9);
        assert_eq!(m.mesh.gamma_d().len(), 2);
        assert_eq!(s.grid().unwrap().len(), 3);
        assert!(!s.verify.enabled);
        assert_eq!(s.output.csv, PathBuf::from("trajectory.csv"));
    }

    #[test]
    fn scenario_rejects_unknown_keys_and_schema() {
        let typo = MINIMAL.replace("\"time_grid\"", "\"timegrid\"");
        assert!(Scenario::from_json(&typo, Path::new(".")).is_err());
        let verify = MINIMAL.replace("\"schema\": 1", "\"schema\": 1, \"verify\": {\"enabled\": true, \"seeed\": 1}");
        assert!(Scenario::from_json(&verify, Path::new(".")).is_err());
        let nested = MINIMAL.replace("\"unit_square\": 2", "\"unit_square\": 2, \"size\": 3");
        assert!(Scenario::from_json(&nested, Path::new(".")).is_err());
        let v2 = MINIMAL.replace("\"schema\": 1", "\"schema\": 2");
        assert!(matches!(Scenario::from_json(&v2, Path::new(".")), Err(Error::Scenario(_))));
    }

    #[test]
    fn scenario_mesh_source_is_exclusive() {
        let both = MINIMAL.replace("\"unit_square\": 2", "\"unit_square\": 2, \"file\": \"m.json\"");
        let s = Scenario::from_json(&both, Path::new(".")).unwrap();
        assert!(s.models().is_err());
        let missing = MINIMAL.replace("\"unit_square\": 2", "\"file\": \"does-not-exist.json\"");
        let s = Scenario::from_json(&missing, Path::new(".")).unwrap();
        assert!(matches!(s.models(), Err(Error::Scenario(_))));
    }

    #[test]
    fn malformed_json_reports_location() {
        let err = Scenario::from_json("{\"schema\": 1,\n  \"mesh\": }", Path::new(".")).unwrap_err();
        assert!(err.to_string().contains("line 2"), "{err}");
    }

    #[test]
    fn toy_csv_shape() {
        let grid = TimeGrid::uniform(2.0, 4).unwrap();
        let csv = toy_csv(0.5, &grid, &ToyConfig::default()).unwrap();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], TOY_HEADER);
        assert_eq!(lines.len(), 6);
        assert_eq!(lines[2], "0.5,0.25,0.25,1,0,0");
    }

    #[test]
    fn parse_errors_exit_two() {
        assert_eq!(main_with_args(["plastiq", "run1d", "--T", "1", "--knots", "4"]), EXIT_INVALID);
        assert_eq!(main_with_args(["plastiq", "run1d", "--lambda", "x", "--T", "1", "--knots", "4"]), EXIT_INVALID);
        assert_eq!(main_with_args(["plastiq", "run1d", "--lambda", "1", "--T", "-1", "--knots", "4"]), EXIT_INVALID);
        assert_eq!(main_with_args(["plastiq", "frobnicate"]), EXIT_INVALID);
    }
}
