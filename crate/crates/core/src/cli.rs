//! The `adsvol` command line.
//!
//! ```text
//! adsvol mesh build --genus 2 --level 2 --out mesh.json
//! adsvol verify --genus 2 --level 2 --n-spec zero --nodes 64 --out report/
//! adsvol slice gen --tau 0.5 --n bump:center=0,amp=0.1,radius=1 --out slice/
//! adsvol slice check --slice slice/slice.json --mesh mesh.json --out check/
//! adsvol sweep --tau-min -3 --tau-max 3 --steps 25 --out sweep/
//! ```
//!
//! Settings come from flags, then the `--config` JSON file, then defaults.
//! Exit codes: 0 pass, 1 bound violation, 2 domain or input error,
//! 3 resource limit, 4 solver failure.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::elliptic::{SolverConfig, Transcript};
use crate::error::{Error, Result};
use crate::mesh::{build_genus_surface, SurfaceMesh};
use crate::report::{bounds_csv, config_hash};
use crate::slicegen::{generate_slice, Background, DensitySpec, SliceFile};
use crate::uniformize::background_conformal;
use crate::volume::{analyze_slice, sweep, verify_theorem, NodeReport, VerifyOptions, VolumeReport};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_VIOLATION: i32 = 1;
pub const EXIT_DOMAIN: i32 = 2;
pub const EXIT_RESOURCE: i32 = 3;
pub const EXIT_SOLVER: i32 = 4;

pub fn exit_code(error: &Error) -> i32 {
    match error.root() {
        Error::Resource(_) => EXIT_RESOURCE,
        Error::LinearNonConvergence { .. }
        | Error::NonConvergence { .. }
        | Error::Stagnation { .. }
        | Error::BlowUp { .. }
        | Error::Numeric(_)
        | Error::Consistency(_) => EXIT_SOLVER,
        _ => EXIT_DOMAIN,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum ReportFormat {
    Json,
    Csv,
}

/// Settings shared by every subcommand; the `--config` file mirrors it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub genus: u32,
    pub level: u32,
    /// Mesh file; overrides `genus` and `level` when set.
    pub mesh: Option<PathBuf>,
    /// Density spec string, see [`DensitySpec`].
    pub n_spec: String,
    pub nodes: usize,
    pub solver: SolverConfig,
    pub bound_tolerance: f64,
    pub sigma_oracle_guess: bool,
    pub threads: Option<usize>,
    pub output_dir: PathBuf,
    pub formats: Vec<ReportFormat>,
}

impl Default for RunConfig {
    fn default() -> Self {
        let options = VerifyOptions::default();
        Self {
            genus: 2,
            level: 2,
            mesh: None,
            n_spec: "zero".into(),
            nodes: options.nodes,
            solver: SolverConfig::default(),
            bound_tolerance: options.bound_tolerance,
            sigma_oracle_guess: false,
            threads: None,
            output_dir: PathBuf::from("adsvol-out"),
            formats: vec![ReportFormat::Json, ReportFormat::Csv],
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Domain(format!("cannot read config {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| Error::Domain(format!("config {}: {e}", path.display())))
    }

    pub fn density(&self) -> Result<DensitySpec> {
        self.n_spec.parse()
    }

    /// Checks ranges and that referenced files exist.
    pub fn validate(&self) -> Result<()> {
        if self.genus < 2 {
            return Err(Error::Domain(format!("genus must be ≥ 2, got {}", self.genus)));
        }
        if let Some(mesh) = &self.mesh {
            if !mesh.is_file() {
                return Err(Error::Domain(format!("mesh file {} does not exist", mesh.display())));
            }
        }
        if let DensitySpec::File { path } = self.density()? {
            if !path.is_file() {
                return Err(Error::Domain(format!("density file {} does not exist", path.display())));
            }
        }
        self.solver.validate()?;
        self.verify_options().validate()
    }

    pub fn verify_options(&self) -> VerifyOptions {
        VerifyOptions {
            nodes: self.nodes,
            bound_tolerance: self.bound_tolerance,
            sigma_oracle_guess: self.sigma_oracle_guess,
            total_tolerance: None,
            threads: self.threads,
        }
    }

    pub fn load_mesh(&self) -> Result<SurfaceMesh> {
        match &self.mesh {
            Some(path) => SurfaceMesh::load(path),
            None => build_genus_surface(self.genus, self.level),
        }
    }

    fn wants(&self, format: ReportFormat) -> bool {
        self.formats.contains(&format)
    }
}

#[derive(Debug, Parser)]
#[command(name = "adsvol", version, about = "Check the AdS volume bound Vol >= pi^2 |chi| slice by slice")]
pub struct Cli {
    /// JSON run configuration; flags take precedence over it.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Mesh construction.
    #[command(subcommand)]
    Mesh(MeshCommand),
    /// Integrate slice densities over tau and compare with pi^2 |chi|.
    Verify(VerifyArgs),
    /// Single slices.
    #[command(subcommand)]
    Slice(SliceCommand),
    /// Check slices on a uniform tau grid and emit a CSV.
    Sweep(SweepArgs),
}

#[derive(Debug, Subcommand)]
pub enum MeshCommand {
    /// Build a genus-g mesh and print its counts and Gauss-Bonnet check.
    Build {
        #[arg(long)]
        genus: Option<u32>,
        #[arg(long)]
        level: Option<u32>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Args)]
pub struct MeshArgs {
    /// Mesh JSON file (instead of --genus/--level).
    #[arg(long, conflicts_with_all = ["genus", "level"])]
    pub mesh: Option<PathBuf>,
    #[arg(long)]
    pub genus: Option<u32>,
    #[arg(long)]
    pub level: Option<u32>,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub tolerance: Option<f64>,
    #[arg(long)]
    pub max_iterations: Option<usize>,
    #[arg(long)]
    pub bound_tolerance: Option<f64>,
    /// Start the sigma solve from the closed form.
    #[arg(long)]
    pub sigma_oracle_guess: bool,
    /// Worker threads, 0 for all cores (default: ADSVOL_THREADS).
    #[arg(long)]
    pub threads: Option<usize>,
    #[arg(long, value_delimiter = ',')]
    pub formats: Option<Vec<ReportFormat>>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub mesh: MeshArgs,
    /// `zero`, `file:PATH` or `bump:center=C,amp=A,radius=R` joined by `+`.
    #[arg(long)]
    pub n_spec: Option<String>,
    #[arg(long)]
    pub nodes: Option<usize>,
    #[command(flatten)]
    pub solve: SolveArgs,
}

#[derive(Debug, Subcommand)]
pub enum SliceCommand {
    /// Generate one slice, solve lapse and sigma, and report the bounds.
    Gen {
        #[arg(long, allow_hyphen_values = true)]
        tau: f64,
        #[arg(long = "n")]
        n_spec: Option<String>,
        #[command(flatten)]
        mesh: MeshArgs,
        #[command(flatten)]
        solve: SolveArgs,
    },
    /// Solve lapse and sigma on a stored slice and report the bounds.
    Check {
        #[arg(long)]
        slice: PathBuf,
        #[command(flatten)]
        mesh: MeshArgs,
        #[command(flatten)]
        solve: SolveArgs,
    },
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub tau_min: f64,
    #[arg(long, allow_hyphen_values = true)]
    pub tau_max: f64,
    #[arg(long)]
    pub steps: usize,
    #[arg(long)]
    pub n_spec: Option<String>,
    #[command(flatten)]
    pub mesh: MeshArgs,
    #[command(flatten)]
    pub solve: SolveArgs,
}

impl MeshArgs {
    fn apply(&self, cfg: &mut RunConfig) {
        if let Some(m) = &self.mesh {
            cfg.mesh = Some(m.clone());
        }
        if let Some(g) = self.genus {
            cfg.genus = g;
            cfg.mesh = None;
        }
        if let Some(l) = self.level {
            cfg.level = l;
            cfg.mesh = None;
        }
    }
}

impl SolveArgs {
    fn apply(&self, cfg: &mut RunConfig) {
        if let Some(o) = &self.out {
            cfg.output_dir = o.clone();
        }
        if let Some(t) = self.tolerance {
            cfg.solver.tolerance = t;
        }
        if let Some(m) = self.max_iterations {
            cfg.solver.max_iterations = m;
        }
        if let Some(t) = self.bound_tolerance {
            cfg.bound_tolerance = t;
        }
        if self.sigma_oracle_guess {
            cfg.sigma_oracle_guess = true;
        }
        if let Some(t) = self.threads {
            cfg.threads = Some(t);
        }
        if let Some(f) = &self.formats {
            cfg.formats = f.clone();
        }
    }
}

/// Parses `args`, runs the command and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_DOMAIN } else { EXIT_PASS };
        }
    };
    match dispatch(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

fn base_config(path: Option<&Path>) -> Result<RunConfig> {
    match path {
        Some(p) => RunConfig::load(p),
        None => Ok(RunConfig::default()),
    }
}

fn dispatch(cli: Cli) -> Result<i32> {
    let mut cfg = base_config(cli.config.as_deref())?;
    match cli.command {
        Command::Mesh(MeshCommand::Build { genus, level, out }) => {
            if let Some(g) = genus {
                cfg.genus = g;
            }
            if let Some(l) = level {
                cfg.level = l;
            }
            cmd_mesh_build(&cfg, out.as_deref())
        }
        Command::Verify(args) => {
            args.mesh.apply(&mut cfg);
            args.solve.apply(&mut cfg);
            if let Some(s) = args.n_spec {
                cfg.n_spec = s;
            }
            if let Some(n) = args.nodes {
                cfg.nodes = n;
            }
            cmd_verify(&cfg)
        }
        Command::Slice(SliceCommand::Gen { tau, n_spec, mesh, solve }) => {
            mesh.apply(&mut cfg);
            solve.apply(&mut cfg);
            if let Some(s) = n_spec {
                cfg.n_spec = s;
            }
            cmd_slice_gen(&cfg, tau)
        }
        Command::Slice(SliceCommand::Check { slice, mesh, solve }) => {
            mesh.apply(&mut cfg);
            solve.apply(&mut cfg);
            cmd_slice_check(&cfg, &slice)
        }
        Command::Sweep(args) => {
            args.mesh.apply(&mut cfg);
            args.solve.apply(&mut cfg);
            if let Some(s) = args.n_spec {
                cfg.n_spec = s;
            }
            cmd_sweep(&cfg, args.tau_min, args.tau_max, args.steps)
        }
    }
}

pub fn cmd_mesh_build(cfg: &RunConfig, out: Option<&Path>) -> Result<i32> {
    let mesh = build_genus_surface(cfg.genus, cfg.level)?;
    let defect_sum: f64 = mesh.angle_defects().iter().sum();
    let target = 2.0 * std::f64::consts::PI * mesh.euler_characteristic() as f64;
    println!("genus {} level {}", mesh.genus(), cfg.level);
    println!("V = {}  E = {}  F = {}", mesh.vertex_count(), mesh.edge_count(), mesh.face_count());
    println!("χ = {}", mesh.euler_characteristic());
    println!("sum of angle defects = {defect_sum:.12}  2πχ = {target:.12}  |diff| = {:.3e}", (defect_sum - target).abs());
    println!("mesh id {}", mesh.id());
    if let Some(path) = out {
        mesh.save(path)?;
        println!("wrote {}", path.display());
    }
    Ok(EXIT_PASS)
}

/// The settings that can change results; output location, formats and
/// thread count are left out.
#[derive(Serialize)]
struct Hashed<'a> {
    command: &'a str,
    genus: u32,
    level: u32,
    mesh: Option<&'a Path>,
    n_spec: &'a str,
    nodes: usize,
    solver: &'a SolverConfig,
    bound_tolerance: f64,
    sigma_oracle_guess: bool,
    extra: Vec<f64>,
}

fn hash_of(command: &str, cfg: &RunConfig, extra: Vec<f64>) -> String {
    config_hash(&Hashed {
        command,
        genus: cfg.genus,
        level: cfg.level,
        mesh: cfg.mesh.as_deref(),
        n_spec: &cfg.n_spec,
        nodes: cfg.nodes,
        solver: &cfg.solver,
        bound_tolerance: cfg.bound_tolerance,
        sigma_oracle_guess: cfg.sigma_oracle_guess,
        extra,
    })
}

fn prepare(cfg: &RunConfig) -> Result<(Arc<Background>, DensitySpec)> {
    cfg.validate()?;
    let density = cfg.density()?;
    let background = Background::new(cfg.load_mesh()?)?;
    Ok((background, density))
}

fn write_transcript(dir: &Path, error: &Error) -> Result<Option<PathBuf>> {
    let Some(t) = error.transcript() else {
        return Ok(None);
    };
    std::fs::create_dir_all(dir)?;
    let path = dir.join("transcript.csv");
    std::fs::write(&path, t.to_csv())?;
    Ok(Some(path))
}

/// Reports a solver failure, writing its transcript when it has one.
fn solver_failure(cfg: &RunConfig, error: &Error) -> Result<i32> {
    eprintln!("error: {error}");
    match write_transcript(&cfg.output_dir, error)? {
        Some(path) => eprintln!("solver transcript: {}", path.display()),
        None => eprintln!("solver transcript: none recorded"),
    }
    Ok(exit_code(error))
}

fn print_node_failures(nodes: &[NodeReport]) {
    for n in nodes.iter().filter(|n| !n.pass) {
        eprintln!(
            "bound violation at tau = {}: max l (1+tau^2) = {:.9}, min sigma = {:.9}, min sigma l (1+tau^2) = {:.9}, V = {:.9} vs {:.9}",
            n.tau,
            n.bounds.lapse.extreme / n.bounds.lapse.bound,
            n.bounds.sigma.extreme,
            n.bounds.product.extreme / n.bounds.product.bound,
            n.density,
            n.fuchsian_density
        );
    }
}

fn save_volume_report(cfg: &RunConfig, report: &VolumeReport) -> Result<()> {
    let dir = &cfg.output_dir;
    std::fs::create_dir_all(dir)?;
    if cfg.wants(ReportFormat::Json) {
        std::fs::write(dir.join("report.json"), report.to_json()?)?;
    }
    if cfg.wants(ReportFormat::Csv) {
        std::fs::write(dir.join("nodes.csv"), report.nodes_csv())?;
        std::fs::write(dir.join("bounds.csv"), report.bounds_csv())?;
    }
    Ok(())
}

pub fn cmd_verify(cfg: &RunConfig) -> Result<i32> {
    let (background, density) = prepare(cfg)?;
    let outcome = verify_theorem(&background, &density, &cfg.solver, &cfg.verify_options());
    let hash = hash_of("verify", cfg, Vec::new());
    match outcome {
        Ok(mut report) => {
            report.config_hash = hash;
            save_volume_report(cfg, &report)?;
            println!("scope: {}", report.scope);
            println!("mesh {} ({} vertices), χ = {}", report.mesh_id, report.vertex_count, report.euler_characteristic);
            println!("density {}", report.density_spec);
            println!("nodes {}", report.nodes.len());
            println!("total volume = {:.12}", report.total);
            println!("π²|χ|        = {:.12}", report.bound);
            println!("margin       = {:.6e}  (tolerance {:.1e})", report.margin, report.tolerance);
            println!("quadrature error of the grid = {:.3e}", report.fuchsian_on_grid - report.bound);
            println!("eps_h        = {:.3e}", report.epsilon_h);
            println!("worst newton iterations {}", report.worst_newton_iterations);
            println!("config hash {}", report.config_hash);
            println!("{}", if report.pass { "PASS" } else { "FAIL" });
            if report.pass {
                Ok(EXIT_PASS)
            } else {
                print_node_failures(&report.nodes);
                Ok(EXIT_VIOLATION)
            }
        }
        Err(failure) => {
            let mut partial = *failure.partial;
            partial.config_hash = hash;
            if !partial.mesh_id.is_empty() {
                save_volume_report(cfg, &partial)?;
            }
            solver_failure(cfg, &failure.error)
        }
    }
}

/// Report of a single slice.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SliceReport {
    pub mesh_id: String,
    pub config_hash: String,
    pub worst_newton_iterations: usize,
    pub node: NodeReport,
}

fn finish_slice(cfg: &RunConfig, mut file: SliceFile, report: SliceReport) -> Result<i32> {
    let dir = &cfg.output_dir;
    std::fs::create_dir_all(dir)?;
    file.mesh_ref = report.mesh_id.clone();
    file.save(dir.join("slice.json"))?;
    if cfg.wants(ReportFormat::Json) {
        std::fs::write(dir.join("report.json"), serde_json::to_string_pretty(&report)?)?;
    }
    if cfg.wants(ReportFormat::Csv) {
        std::fs::write(dir.join("bounds.csv"), bounds_csv([&report.node.bounds]))?;
    }
    let n = &report.node;
    let q = 1.0 + n.tau * n.tau;
    println!("tau = {}", n.tau);
    println!("min sigma              = {:.12}", n.bounds.sigma.extreme);
    println!("max l (1+tau^2)        = {:.12}", n.bounds.lapse.extreme * q);
    println!("min sigma l (1+tau^2)  = {:.12}", n.bounds.product.extreme * q);
    println!("V(tau) = {:.12}  fuchsian {:.12}", n.density, n.fuchsian_density);
    println!("worst newton iterations {}", report.worst_newton_iterations);
    println!("config hash {}", report.config_hash);
    println!("{}", if n.pass { "PASS" } else { "FAIL" });
    if n.pass {
        Ok(EXIT_PASS)
    } else {
        print_node_failures(std::slice::from_ref(n));
        Ok(EXIT_VIOLATION)
    }
}

pub fn cmd_slice_gen(cfg: &RunConfig, tau: f64) -> Result<i32> {
    let (background, density) = prepare(cfg)?;
    let n = density.realize(background.mesh())?;
    let options = cfg.verify_options();
    let analyzed = background_conformal(&background, &cfg.solver).and_then(|u_bg| {
        let slice = generate_slice(&background, &n, tau, &cfg.solver)?;
        let (report, lapse, sigma) = analyze_slice(&slice, &cfg.solver, &options, Some(&u_bg))?;
        Ok((slice, report, lapse, sigma))
    });
    let (slice, node, lapse, sigma) = match analyzed {
        Ok(x) => x,
        Err(e) if exit_code(&e) == EXIT_SOLVER => return solver_failure(cfg, &e),
        Err(e) => return Err(e),
    };
    let mut file = SliceFile::from_slice(&slice);
    file.lapse = Some(lapse.values().to_vec());
    file.sigma = Some(sigma.values().to_vec());
    let report = SliceReport {
        mesh_id: background.mesh().id().to_string(),
        config_hash: hash_of("slice gen", cfg, vec![tau]),
        worst_newton_iterations: node.slice_iterations.max(node.sigma_iterations),
        node,
    };
    finish_slice(cfg, file, report)
}

pub fn cmd_slice_check(cfg: &RunConfig, path: &Path) -> Result<i32> {
    cfg.validate()?;
    let background = Background::new(cfg.load_mesh()?)?;
    let file = SliceFile::load(path).map_err(|e| Error::Domain(format!("slice file {}: {e}", path.display())))?;
    let options = cfg.verify_options();
    let analyzed = file.clone().into_slice(background.clone()).and_then(|slice| {
        let (report, lapse, sigma) = analyze_slice(&slice, &cfg.solver, &options, None)?;
        Ok((report, lapse, sigma))
    });
    let (node, lapse, sigma) = match analyzed {
        Ok(x) => x,
        Err(e) if exit_code(&e) == EXIT_SOLVER => return solver_failure(cfg, &e),
        Err(e) => return Err(e),
    };
    let mut out = file;
    out.lapse = Some(lapse.values().to_vec());
    out.sigma = Some(sigma.values().to_vec());
    let report = SliceReport {
        mesh_id: background.mesh().id().to_string(),
        config_hash: hash_of("slice check", cfg, vec![out.tau]),
        worst_newton_iterations: node.sigma_iterations,
        node,
    };
    finish_slice(cfg, out, report)
}

/// Report of a uniform `tau` sweep.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepReport {
    pub mesh_id: String,
    pub density_spec: String,
    pub config_hash: String,
    pub worst_newton_iterations: usize,
    pub nodes: Vec<NodeReport>,
    pub pass: bool,
}

impl SweepReport {
    pub const CSV_HEADER: &'static str = "tau,V,V_fuchsian,min_sigma,max_lapse,min_product,bound,margin,pass";

    pub fn to_csv(&self) -> String {
        let mut out = String::from(Self::CSV_HEADER);
        out.push('\n');
        for n in &self.nodes {
            let b = &n.bounds;
            writeln!(
                out,
                "{},{:.15e},{:.15e},{:.15e},{:.15e},{:.15e},{:.15e},{:.6e},{}",
                n.tau,
                n.density,
                n.fuchsian_density,
                b.sigma.extreme,
                b.lapse.extreme,
                b.product.extreme,
                b.product.bound,
                b.product.margin,
                n.pass
            )
            .unwrap();
        }
        out
    }
}

pub fn uniform_grid(min: f64, max: f64, steps: usize) -> Result<Vec<f64>> {
    if !(min.is_finite() && max.is_finite() && min <= max) {
        return Err(Error::Domain(format!("need finite tau-min <= tau-max, got [{min}, {max}]")));
    }
    match steps {
        0 => Err(Error::Domain("steps must be at least 1".into())),
        1 => Ok(vec![min]),
        _ => Ok((0..steps).map(|i| min + (max - min) * i as f64 / (steps - 1) as f64).collect()),
    }
}

pub fn cmd_sweep(cfg: &RunConfig, tau_min: f64, tau_max: f64, steps: usize) -> Result<i32> {
    let taus = uniform_grid(tau_min, tau_max, steps)?;
    let (background, density) = prepare(cfg)?;
    let nodes = match sweep(&background, &density, &taus, &cfg.solver, &cfg.verify_options()) {
        Ok(n) => n,
        Err(e) if exit_code(&e) == EXIT_SOLVER => return solver_failure(cfg, &e),
        Err(e) => return Err(e),
    };
    let report = SweepReport {
        mesh_id: background.mesh().id().to_string(),
        density_spec: density.to_string(),
        config_hash: hash_of("sweep", cfg, vec![tau_min, tau_max, steps as f64]),
        worst_newton_iterations: nodes.iter().map(|n| n.slice_iterations.max(n.sigma_iterations)).max().unwrap_or(0),
        pass: nodes.iter().all(|n| n.pass),
        nodes,
    };
    let dir = &cfg.output_dir;
    std::fs::create_dir_all(dir)?;
    std::fs::write(dir.join("sweep.csv"), report.to_csv())?;
    if cfg.wants(ReportFormat::Json) {
        std::fs::write(dir.join("report.json"), serde_json::to_string_pretty(&report)?)?;
    }
    if cfg.wants(ReportFormat::Csv) {
        std::fs::write(dir.join("bounds.csv"), bounds_csv(report.nodes.iter().map(|n| &n.bounds)))?;
    }
    print!("{}", report.to_csv());
    println!("worst newton iterations {}", report.worst_newton_iterations);
    println!("config hash {}", report.config_hash);
    if report.pass {
        println!("PASS");
        Ok(EXIT_PASS)
    } else {
        println!("FAIL");
        print_node_failures(&report.nodes);
        Ok(EXIT_VIOLATION)
    }
}

/// Reads the `transcript.csv` written on a solver failure.
pub fn parse_transcript_csv(text: &str) -> Result<Transcript> {
    let mut t = Transcript::default();
    for (i, line) in text.lines().enumerate().skip(1) {
        let cols: Vec<&str> = line.split(',').collect();
        let parse = |s: &str| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| Error::Domain(format!("transcript line {}: '{line}'", i + 1)))
        };
        if cols.len() != 3 {
            return Err(Error::Domain(format!("transcript line {} needs 3 columns", i + 1)));
        }
        t.push(parse(cols[0])? as usize, parse(cols[1])?, parse(cols[2])?);
    }
    Ok(t)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_override_config_over_defaults() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cfg.json");
        std::fs::write(&path, r#"{"level": 1, "nodes": 8, "n_spec": "bump:amp=0.1,radius=1"}"#).unwrap();
        let mut cfg = base_config(Some(&path)).unwrap();
        assert_eq!((cfg.genus, cfg.level, cfg.nodes), (2, 1, 8));
        let cli = Cli::try_parse_from(["adsvol", "verify", "--nodes", "16"]).unwrap();
        if let Command::Verify(args) = cli.command {
            args.mesh.apply(&mut cfg);
            if let Some(n) = args.nodes {
                cfg.nodes = n;
            }
        }
        assert_eq!((cfg.level, cfg.nodes), (1, 16));
        assert!(matches!(cfg.density().unwrap(), DensitySpec::Bump(_)));
    }

    #[test]
    fn unknown_config_keys_are_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cfg.json");
        std::fs::write(&path, r#"{"levle": 1}"#).unwrap();
        assert!(matches!(base_config(Some(&path)), Err(Error::Domain(_))));
    }

    #[test]
    fn validation_checks_files_and_ranges() {
        let cfg = RunConfig { mesh: Some("/nonexistent/mesh.json".into()), ..Default::default() };
        assert!(matches!(cfg.validate(), Err(Error::Domain(_))));
        let cfg = RunConfig { n_spec: "file:/nonexistent/n.json".into(), ..Default::default() };
        assert!(matches!(cfg.validate(), Err(Error::Domain(_))));
        let cfg = RunConfig { nodes: 0, ..Default::default() };
        assert!(cfg.validate().is_err());
        assert!(RunConfig::default().validate().is_ok());
    }

    #[test]
    fn exit_codes_follow_error_kind() {
        assert_eq!(exit_code(&Error::Domain("x".into())), EXIT_DOMAIN);
        assert_eq!(exit_code(&Error::Resource("x".into())), EXIT_RESOURCE);
        let nested = Error::AtNode { tau: 0.5, source: Box::new(Error::Numeric("x".into())) };
        assert_eq!(exit_code(&nested), EXIT_SOLVER);
    }

    #[test]
    fn uniform_grid_endpoints() {
        let g = uniform_grid(-3.0, 3.0, 7).unwrap();
        assert_eq!(g.len(), 7);
        assert_eq!((g[0], g[3], g[6]), (-3.0, 0.0, 3.0));
        assert!(uniform_grid(1.0, 0.0, 3).is_err());
    }

    #[test]
    fn transcript_csv_round_trip() {
        let mut t = Transcript::default();
        t.push(0, 1.0, 0.0);
        t.push(1, 1e-3, 1.0);
        let back = parse_transcript_csv(&t.to_csv()).unwrap();
        assert_eq!(back.residuals(), t.residuals());
    }
}
