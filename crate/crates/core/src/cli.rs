//! Command-line front end.
//!
//! `run` solves a built-in scenario or a network file and writes one CSV per
//! edge and vertex, path profiles and an audit; `eoc` prints convergence
//! tables; `plot` turns a run directory into matplotlib scripts.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use crate::bench::{self, ScenarioKind, TriangleResolution};
use crate::edge::{self, DmpViolation};
use crate::error::{Error, Result};
use crate::kernels::{Scheme, SchemeConfig};
use crate::netfile::NetworkFile;
use crate::network::{self, NetworkModel, NetworkSolution};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_INVARIANT: i32 = 3;

/// Relative residual above which `--strict` rejects a run.
const STRICT_CONSERVATION: f64 = 1e-10;

#[derive(Debug, Parser)]
#[command(name = "netadvect", version, about = "Implicit space-marching advection solver for pipe networks")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve a scenario and write CSV files and an audit.
    Run(RunArgs),
    /// Convergence table against an exact solution.
    Eoc(EocArgs),
    /// Write plotting scripts for a run directory.
    Plot(PlotArgs),
    /// List the built-in scenarios.
    Scenarios,
    /// Write a built-in network scenario as a network file.
    Export(ExportArgs),
}

#[derive(Debug, Args)]
#[command(group = clap::ArgGroup::new("input").required(true).args(["scenario", "config"]))]
pub struct RunArgs {
    /// Built-in scenario name.
    #[arg(long)]
    pub scenario: Option<String>,
    /// Network file (JSON).
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Comma-separated schemes: first, second, third, weno, hr, direct-hr or w=<value>.
    #[arg(long, default_value = "hr", value_delimiter = ',')]
    pub scheme: Vec<String>,
    #[arg(long = "I")]
    pub cells: Option<usize>,
    #[arg(long = "N")]
    pub steps: Option<usize>,
    #[command(flatten)]
    pub triangle: TriangleArgs,
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
    /// Times at which path profiles are written; defaults to the final time.
    #[arg(long, value_delimiter = ',')]
    pub snapshot: Vec<f64>,
    /// Extra path as `name=edge,edge,...`.
    #[arg(long)]
    pub path: Vec<String>,
    /// Exit with status 3 if a bound or conservation check fails.
    #[arg(long)]
    pub strict: bool,
    /// Fixed lower Courant number for the nonlinear limiter.
    #[arg(long)]
    pub cmin: Option<f64>,
    #[arg(long)]
    pub weno_threshold: Option<f64>,
}

#[derive(Debug, Args, Default)]
pub struct TriangleArgs {
    /// Triangle resolution: coarse or fine.
    #[arg(long)]
    pub resolution: Option<String>,
    /// Uniform triangle space step (with --tau).
    #[arg(long, requires = "tau")]
    pub h: Option<f64>,
    #[arg(long, requires = "h")]
    pub tau: Option<f64>,
}

#[derive(Debug, Args)]
pub struct EocArgs {
    /// smooth, or shape1 to shape4.
    #[arg(long, default_value = "smooth")]
    pub scenario: String,
    #[arg(long, default_value = "third", value_delimiter = ',')]
    pub scheme: Vec<String>,
    /// Comma-separated cell counts.
    #[arg(long, default_value = "256,512,1024,2048", value_delimiter = ',')]
    pub levels: Vec<usize>,
    #[arg(long, default_value_t = 2.0)]
    pub courant: f64,
    /// Write the table here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PlotArgs {
    /// Run directory written by `run`.
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ExportArgs {
    #[arg(long)]
    pub scenario: String,
    #[arg(long = "N")]
    pub steps: Option<usize>,
    #[command(flatten)]
    pub triangle: TriangleArgs,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Contents of `run.json`, read back by `plot`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub scenario: String,
    pub horizon: f64,
    pub steps: usize,
    pub schemes: Vec<SchemeDir>,
    pub edges: Vec<String>,
    pub vertices: Vec<String>,
    pub paths: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SchemeDir {
    pub scheme: String,
    pub dir: String,
}

/// Parses arguments, runs the command and returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_VALIDATION } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match execute(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Domain(_)
        | Error::InvalidProblem(_)
        | Error::Configuration(_)
        | Error::Cycle(_)
        | Error::AlphaSum { .. }
        | Error::OrphanVertex(_)
        | Error::Network(_)
        | Error::Parse(_)
        | Error::Unsupported(_) => EXIT_VALIDATION,
        Error::Sequencing(_) | Error::NotBracketed { .. } | Error::Io(_) => EXIT_FAILURE,
    }
}

pub fn execute(command: Command) -> Result<i32> {
    match command {
        Command::Run(a) => cmd_run(&a),
        Command::Eoc(a) => cmd_eoc(&a).map(|_| EXIT_OK),
        Command::Plot(a) => cmd_plot(&a.out).map(|files| {
            for f in files {
                println!("{}", f.display());
            }
            EXIT_OK
        }),
        Command::Scenarios => {
            for k in ScenarioKind::ALL {
                println!("{:<10} {}", k.name(), k.summary());
            }
            Ok(EXIT_OK)
        }
        Command::Export(a) => cmd_export(&a).map(|_| EXIT_OK),
    }
}

fn triangle_resolution(t: &TriangleArgs) -> Result<TriangleResolution> {
    match (t.resolution.as_deref(), t.h, t.tau) {
        (Some(_), Some(_), _) => Err(Error::Configuration("give either --resolution or --h/--tau".into())),
        (_, Some(h), Some(tau)) => Ok(TriangleResolution::Uniform { h, tau }),
        (None | Some("coarse"), _, _) => Ok(TriangleResolution::Coarse),
        (Some("fine"), _, _) => Ok(TriangleResolution::Fine),
        (Some(other), _, _) => Err(Error::Parse(format!("unknown triangle resolution {other:?}"))),
    }
}

fn network_file(kind: ScenarioKind, steps: Option<usize>, t: &TriangleArgs) -> Result<NetworkFile> {
    match kind {
        ScenarioKind::Triangle => {
            if steps.is_some() {
                return Err(Error::Configuration("the triangle time step is set by --resolution or --tau".into()));
            }
            bench::triangle_file(triangle_resolution(t)?)
        }
        ScenarioKind::Sewer => bench::sewer_file(steps.unwrap_or(bench::SEWER_STEPS)),
        other => Err(Error::Unsupported(format!("scenario {} is not a network file scenario", other.name()))),
    }
}

/// Builds the model for a built-in scenario.
pub fn scenario_model(
    kind: ScenarioKind,
    cells: Option<usize>,
    steps: Option<usize>,
    triangle: &TriangleArgs,
) -> Result<NetworkModel> {
    let edge_only = |what: &str| -> Result<()> {
        if triangle.resolution.is_some() || triangle.h.is_some() {
            return Err(Error::Configuration(format!("{what} takes no triangle resolution")));
        }
        Ok(())
    };
    match kind {
        ScenarioKind::Smooth => {
            edge_only("smooth")?;
            bench::edge_network(&[bench::smooth_gaussian(cells.unwrap_or(512), steps.unwrap_or(256))?])
        }
        ScenarioKind::Shapes => {
            edge_only("shapes")?;
            let (i, n) = (cells.unwrap_or(1600), steps.unwrap_or(160));
            let s: Result<Vec<_>> = (1..=4).map(|k| bench::four_shapes(k, i, n)).collect();
            bench::edge_network(&s?)
        }
        ScenarioKind::Isotherm => {
            edge_only("isotherm")?;
            if steps.is_some() {
                return Err(Error::Configuration("isotherm uses N = I/8; do not pass --N".into()));
            }
            let s: Result<Vec<_>> = (1..=4).map(|k| bench::nonlinear_isotherm(k, cells.unwrap_or(400))).collect();
            bench::edge_network(&s?)
        }
        ScenarioKind::Triangle | ScenarioKind::Sewer => {
            if cells.is_some() {
                return Err(Error::Configuration(format!("{} has fixed cell counts; do not pass --I", kind.name())));
            }
            network_file(kind, steps, triangle)?.to_model()
        }
    }
}

fn parse_path(arg: &str, model: &NetworkModel) -> Result<(String, Vec<usize>)> {
    let (name, edges) =
        arg.split_once('=').ok_or_else(|| Error::Parse(format!("path {arg:?} is not of the form name=e1,e2")))?;
    let idx: Result<Vec<usize>> = edges
        .split(',')
        .map(|id| model.edge_index(id.trim()).ok_or_else(|| Error::Parse(format!("path {name}: unknown edge {id:?}"))))
        .collect();
    let idx = idx?;
    for w in idx.windows(2) {
        if model.edges[w[0]].to != model.edges[w[1]].from {
            return Err(Error::Network(format!(
                "path {name}: edge {} does not continue edge {}",
                model.edges[w[1]].id, model.edges[w[0]].id
            )));
        }
    }
    Ok((name.to_string(), idx))
}

fn scheme_config(name: &str, args: &RunArgs) -> Result<SchemeConfig> {
    let mut c = SchemeConfig::new(Scheme::from_name(name)?);
    c.courant_min = args.cmin;
    c.weno_threshold = args.weno_threshold;
    c.validate()?;
    Ok(c)
}

fn cmd_run(args: &RunArgs) -> Result<i32> {
    let (name, model, mut paths) = match (&args.scenario, &args.config) {
        (Some(s), None) => {
            let kind = ScenarioKind::from_name(s)?;
            (kind.name().to_string(), scenario_model(kind, args.cells, args.steps, &args.triangle)?, kind.paths())
        }
        (None, Some(path)) => {
            if args.cells.is_some() || args.steps.is_some() {
                return Err(Error::Configuration("--I and --N do not apply to a network file".into()));
            }
            let file = NetworkFile::load(path)?;
            (path.display().to_string(), file.to_model()?, Vec::new())
        }
        _ => return Err(Error::Configuration("give exactly one of --scenario and --config".into())),
    };
    for p in &args.path {
        paths.push(parse_path(p, &model)?);
    }
    for &t in &args.snapshot {
        if !(0.0..=model.time.horizon()).contains(&t) {
            return Err(Error::Configuration(format!("snapshot time {t} outside [0, {}]", model.time.horizon())));
        }
    }
    let configs: Result<Vec<_>> = args.scheme.iter().map(|s| scheme_config(s.trim(), args)).collect();
    let configs = configs?;
    let levels: Vec<usize> = if args.snapshot.is_empty() {
        vec![model.time.steps()]
    } else {
        args.snapshot.iter().map(|&t| model.time.nearest_level(t)).collect()
    };

    let mut manifest = Manifest {
        scenario: name,
        horizon: model.time.horizon(),
        steps: model.time.steps(),
        schemes: Vec::new(),
        edges: model.edges.iter().map(|e| e.id.clone()).collect(),
        vertices: model.vertices.iter().map(|v| v.id.clone()).collect(),
        paths: paths.iter().map(|p| p.0.clone()).collect(),
    };
    let mut violated = false;
    fs::create_dir_all(&args.out)?;
    for config in &configs {
        let solution = network::solve_network(&model, config)?;
        let dir_name = if configs.len() == 1 { ".".to_string() } else { config.scheme.name() };
        let dir = args.out.join(&dir_name);
        fs::create_dir_all(&dir)?;
        write_outputs(&dir, &model, &solution, &paths, &levels)?;
        let (audit, ok) = audit_report(&model, &solution, config)?;
        fs::write(dir.join("audit.txt"), &audit)?;
        print!("{audit}");
        violated |= !ok;
        manifest.schemes.push(SchemeDir { scheme: config.scheme.name(), dir: dir_name });
    }
    let json = serde_json::to_string_pretty(&manifest).map_err(|e| Error::Parse(e.to_string()))?;
    fs::write(args.out.join("run.json"), json + "\n")?;
    if args.strict && violated {
        eprintln!("error: invariant check failed (see audit.txt)");
        return Ok(EXIT_INVARIANT);
    }
    Ok(EXIT_OK)
}

fn num(x: f64) -> String {
    format!("{x:.16e}")
}

fn write_outputs(
    dir: &Path,
    model: &NetworkModel,
    solution: &NetworkSolution,
    paths: &[(String, Vec<usize>)],
    levels: &[usize],
) -> Result<()> {
    let time = &model.time;
    for (e, sol) in model.edges.iter().zip(&solution.edges) {
        let mut s = String::with_capacity(64 * (sol.cells() + 1) * (sol.steps() + 1));
        s.push_str("n,t,i,x,Q\n");
        for n in 0..=sol.steps() {
            let t = num(time.time(n));
            for (i, &x) in sol.x().iter().enumerate() {
                let _ = writeln!(s, "{n},{t},{i},{},{}", num(x), num(sol.get(i, n)));
            }
        }
        fs::write(dir.join(format!("edge_{}.csv", e.id)), s)?;
    }
    for (v, signal) in model.vertices.iter().zip(&solution.vertex_signals) {
        let mut s = String::from("n,t,q\n");
        for (n, q) in signal.iter().enumerate() {
            let _ = writeln!(s, "{n},{},{}", num(time.time(n)), num(*q));
        }
        fs::write(dir.join(format!("vertex_{}.csv", v.id)), s)?;
    }
    for (name, path) in paths {
        let mut s = String::from("n,t,s,Q\n");
        for &n in levels {
            for (x, q) in network::path_profile(model, solution, path, n) {
                let _ = writeln!(s, "{n},{},{},{}", num(time.time(n)), num(x), num(q));
            }
        }
        fs::write(dir.join(format!("path_{name}.csv")), s)?;
    }
    Ok(())
}

/// Human-readable audit and whether the local bounds and the network balance
/// held. Only the first-order and limited schemes guarantee the bounds.
pub fn audit_report(model: &NetworkModel, solution: &NetworkSolution, config: &SchemeConfig) -> Result<(String, bool)> {
    let mut ok = true;
    let mut s = String::new();
    let _ = writeln!(s, "scheme {}", config.scheme.name());
    let _ = writeln!(s, "T {} N {} tau {}", model.time.horizon(), model.time.steps(), model.time.tau());
    for (k, (e, sol)) in model.edges.iter().zip(&solution.edges).enumerate() {
        let dmp: Vec<DmpViolation> = edge::dmp_check(sol);
        let worst = dmp.iter().map(|d| d.excess).fold(0.0, f64::max);
        let stats = sol.corrector_stats();
        let c = model.courant(k, 1, 0);
        let last = sol.row(sol.steps());
        let _ = writeln!(
            s,
            "edge {}: cells {} C {:.4} min {} max {} final_min {} final_max {} dmp_violations {} worst_excess {:.3e}",
            e.id,
            sol.cells(),
            c,
            num(sol.min()),
            num(sol.max()),
            num(last.iter().copied().fold(f64::INFINITY, f64::min)),
            num(last.iter().copied().fold(f64::NEG_INFINITY, f64::max)),
            dmp.len(),
            worst
        );
        if stats.predicted + stats.corrected + stats.fallback > 0 {
            let _ = writeln!(
                s,
                "  nodes {} predicted {} corrected {} repeated {} fallback {} max_repeats {}",
                stats.nodes, stats.predicted, stats.corrected, stats.repeated, stats.fallback, stats.max_repeats
            );
        }
        if !dmp.is_empty() {
            ok = false;
        }
    }
    match network::network_audit(model, solution) {
        Ok(a) => {
            let _ = writeln!(
                s,
                "conservation: stored {} initial {} inflow {} outflow {} junction_source {} residual {} relative {:.3e}",
                num(a.stored),
                num(a.initial),
                num(a.inflow),
                num(a.outflow),
                num(a.junction_source),
                num(a.residual),
                a.relative_residual()
            );
            if a.relative_residual() > STRICT_CONSERVATION {
                ok = false;
            }
        }
        Err(Error::Unsupported(why)) => {
            let _ = writeln!(s, "conservation: not available ({why})");
        }
        Err(e) => return Err(e),
    }
    let _ = writeln!(s, "status {}", if ok { "ok" } else { "VIOLATED" });
    Ok((s, ok))
}

fn eoc_builder(scenario: &str, courant: f64) -> Result<Box<dyn Fn(usize) -> Result<bench::EdgeScenario>>> {
    let steps = move |cells: usize, per: f64| -> Result<usize> {
        let n = cells as f64 / per;
        if n >= 1.0 && n.fract() == 0.0 {
            Ok(n as usize)
        } else {
            Err(Error::Domain(format!("I = {cells} does not give an integer N at C = {courant}")))
        }
    };
    if scenario == "smooth" {
        return Ok(Box::new(move |i| bench::smooth_gaussian(i, steps(i, courant)?)));
    }
    if let Some(k) = scenario.strip_prefix("shape").and_then(|k| k.parse::<usize>().ok()) {
        if (1..=4).contains(&k) {
            return Ok(Box::new(move |i| bench::four_shapes(k, i, steps(i, 2.0 * courant)?)));
        }
    }
    Err(Error::Unsupported(format!("scenario {scenario:?} has no exact solution; use smooth or shape1..shape4")))
}

fn cmd_eoc(args: &EocArgs) -> Result<()> {
    if !(args.courant.is_finite() && args.courant > 0.0) {
        return Err(Error::Configuration("--courant must be positive".into()));
    }
    let build = eoc_builder(&args.scenario, args.courant)?;
    let mut levels = Vec::with_capacity(args.levels.len());
    for &i in &args.levels {
        let sc = build(i)?;
        levels.push((i, sc.problem.steps()));
    }
    let mut out = String::new();
    for name in &args.scheme {
        let config = SchemeConfig::new(Scheme::from_name(name.trim())?);
        let report = bench::convergence_study(&levels, |i, _| build(i), &config)?;
        let _ = writeln!(out, "# scenario {} scheme {} C {}", args.scenario, report.scheme, args.courant);
        out.push_str(&report.to_csv());
    }
    match &args.out {
        Some(p) => fs::write(p, out)?,
        None => print!("{out}"),
    }
    Ok(())
}

fn cmd_export(args: &ExportArgs) -> Result<()> {
    let kind = ScenarioKind::from_name(&args.scenario)?;
    let json = network_file(kind, args.steps, &args.triangle)?.to_json() + "\n";
    match &args.out {
        Some(p) => fs::write(p, json)?,
        None => print!("{json}"),
    }
    Ok(())
}

const PY_HEADER: &str = "import csv\nimport math\nimport os\nimport matplotlib\nmatplotlib.use(\"Agg\")\nimport matplotlib.pyplot as plt\n\nHERE = os.path.dirname(os.path.abspath(__file__))\n\n\ndef read(name):\n    with open(os.path.join(HERE, name)) as f:\n        return list(csv.DictReader(f))\n";

const PY_EXACT: &str = "\n\ndef shape(k, s):\n    if s < 0.0 or s > 0.4:\n        return 0.0\n    z = (s - 0.2) / 0.2\n    if k == 1:\n        return 1.0 if 0.05 <= s <= 0.35 else 0.0\n    if k == 2:\n        return max(0.0, 1.0 - abs(z))\n    if k == 3:\n        return max(0.0, math.cos(0.5 * math.pi * z))\n    return math.exp(1.0 - 1.0 / (1.0 - z * z)) if abs(z) < 1.0 else 0.0\n\n\ndef exact(edge, x, t):\n    if edge.startswith(\"smooth\"):\n        return math.exp(-40.0 * (x - t + 1.0) ** 2)\n    if edge.startswith(\"shape\"):\n        return shape(int(edge[5]), t - x)\n    return None\n";

fn py_str(s: &str) -> String {
    serde_json::to_string(s).expect("string serializes")
}

/// Writes one script per figure into the run directory and returns their
/// paths.
pub fn cmd_plot(dir: &Path) -> Result<Vec<PathBuf>> {
    let manifest_path = dir.join("run.json");
    if !manifest_path.is_file() {
        return Err(Error::Io(std::io::Error::new(
            std::io::ErrorKind::NotFound,
            format!("{} not found; run `netadvect run --out {}` first", manifest_path.display(), dir.display()),
        )));
    }
    let text = fs::read_to_string(&manifest_path)?;
    let m: Manifest = serde_json::from_str(&text).map_err(|e| Error::Parse(format!("run.json: {e}")))?;
    for sd in &m.schemes {
        for e in &m.edges {
            let f = dir.join(&sd.dir).join(format!("edge_{e}.csv"));
            if !f.is_file() {
                return Err(Error::Io(std::io::Error::new(
                    std::io::ErrorKind::NotFound,
                    format!("missing artifact {}", f.display()),
                )));
            }
        }
    }
    let schemes = format!(
        "SCHEMES = [{}]\n",
        m.schemes.iter().map(|s| format!("({}, {})", py_str(&s.scheme), py_str(&s.dir))).collect::<Vec<_>>().join(", ")
    );
    let mut written = Vec::new();

    // final profiles per edge, one panel each
    let edges = format!("EDGES = [{}]\n", m.edges.iter().map(|e| py_str(e)).collect::<Vec<_>>().join(", "));
    let mut s = String::from(PY_HEADER);
    s.push_str(PY_EXACT);
    let _ = write!(
        s,
        "\n{schemes}{edges}N = {}\nT = {:?}\n\nfig, axes = plt.subplots(len(EDGES), 1, figsize=(8, 2.6 * len(EDGES)), squeeze=False)\nfor ax, edge in zip(axes[:, 0], EDGES):\n    for scheme, sub in SCHEMES:\n        rows = [r for r in read(os.path.join(sub, \"edge_%s.csv\" % edge)) if int(r[\"n\"]) == N]\n        xs = [float(r[\"x\"]) for r in rows]\n        ax.plot(xs, [float(r[\"Q\"]) for r in rows], label=scheme)\n    ex = [exact(edge, x, T) for x in xs]\n    if ex[0] is not None:\n        ax.plot(xs, ex, \"k--\", label=\"exact\")\n    ax.set_title(\"%s, t = %g\" % (edge, T))\n    ax.legend()\nfig.tight_layout()\nfig.savefig(os.path.join(HERE, \"final_profiles.png\"), dpi=150)\n",
        m.steps, m.horizon
    );
    let p = dir.join("plot_final_profiles.py");
    fs::write(&p, s)?;
    written.push(p);

    // vertex series
    let verts = format!("VERTICES = [{}]\n", m.vertices.iter().map(|v| py_str(v)).collect::<Vec<_>>().join(", "));
    let mut s = String::from(PY_HEADER);
    let _ = write!(
        s,
        "\n{schemes}{verts}\nfig, axes = plt.subplots(len(SCHEMES), 1, figsize=(8, 3 * len(SCHEMES)), squeeze=False)\nfor ax, (scheme, sub) in zip(axes[:, 0], SCHEMES):\n    for v in VERTICES:\n        rows = read(os.path.join(sub, \"vertex_%s.csv\" % v))\n        ax.plot([float(r[\"t\"]) for r in rows], [float(r[\"q\"]) for r in rows], label=v)\n    ax.set_title(scheme)\n    ax.set_xlabel(\"t\")\n    ax.legend(fontsize=\"small\", ncol=3)\nfig.tight_layout()\nfig.savefig(os.path.join(HERE, \"vertices.png\"), dpi=150)\n"
    );
    let p = dir.join("plot_vertices.py");
    fs::write(&p, s)?;
    written.push(p);

    for path in &m.paths {
        let mut s = String::from(PY_HEADER);
        let _ = write!(
            s,
            "\n{schemes}PATH = {}\n\nfig, axes = plt.subplots(len(SCHEMES), 1, figsize=(9, 3 * len(SCHEMES)), squeeze=False)\nfor ax, (scheme, sub) in zip(axes[:, 0], SCHEMES):\n    rows = read(os.path.join(sub, \"path_%s.csv\" % PATH))\n    for n in sorted({{int(r[\"n\"]) for r in rows}}):\n        sel = [r for r in rows if int(r[\"n\"]) == n]\n        ax.plot([float(r[\"s\"]) for r in sel], [float(r[\"Q\"]) for r in sel], label=\"t = %s\" % sel[0][\"t\"])\n    ax.set_title(\"path %s, %s\" % (PATH, scheme))\n    ax.legend(fontsize=\"small\")\nfig.tight_layout()\nfig.savefig(os.path.join(HERE, \"path_%s.png\" % PATH), dpi=150)\n",
            py_str(path)
        );
        let p = dir.join(format!("plot_path_{path}.py"));
        fs::write(&p, s)?;
        written.push(p);
    }
    Ok(written)
}
