use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::json;

use qdouble::barrier::{path_length_stats, schedule_path_with, LeafOrder};
use qdouble::defects::{barrier_with_defects, DefectConfig, Defects};
use qdouble::flow::plan_error;
use qdouble::multiset::{verify_extremal_theorems, verify_spectrum_growth};
use qdouble::oracle::brute_force_barrier;
use qdouble::thermal::{
    arrhenius_bound, exact_chain_gap, sweep as run_sweep, MemoryTimeEstimate, RunOptions, Simulation, SweepRow,
};
use qdouble::{ErrorFile, MassSpec, MassTable, Multiset, SimConfig, TorusLattice};

#[derive(Debug)]
pub enum CliError {
    Core(qdouble::Error),
    Input(String),
    Output(String),
    Usage(String),
    /// The command ran but its verdict is negative (an inconsistent defect
    /// configuration); the report has already been written.
    Rejected(String),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Input(m) | CliError::Output(m) | CliError::Usage(m) | CliError::Rejected(m) => f.write_str(m),
        }
    }
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(e) if e.is_size() => 3,
            CliError::Core(_) | CliError::Input(_) | CliError::Rejected(_) => 2,
            CliError::Output(_) => 1,
            CliError::Usage(_) => 64,
        }
    }
}

impl From<qdouble::Error> for CliError {
    fn from(e: qdouble::Error) -> Self {
        CliError::Core(e)
    }
}

type Result<T> = std::result::Result<T, CliError>;

pub struct Context {
    pub seed: Option<u64>,
    pub verbose: u8,
}

impl Context {
    fn say(&self, msg: impl AsRef<str>) {
        if self.verbose > 0 {
            eprintln!("{}", msg.as_ref());
        }
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))
}

fn parse_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    serde_json::from_str(&read(path)?)
        .map_err(|e| CliError::Core(qdouble::Error::Parse(format!("{}: {e}", path.display()))))
}

fn load_config(path: &Path, seed: Option<u64>) -> Result<SimConfig> {
    let mut cfg = SimConfig::from_json(&read(path)?)?;
    if let Some(s) = seed {
        cfg.seed = s;
    }
    Ok(cfg)
}

fn emit<T: Serialize>(value: &T, out: Option<&Path>) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| CliError::Output(e.to_string()))?;
    text.push('\n');
    match out {
        Some(path) => fs::write(path, text).map_err(|e| CliError::Output(format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| CliError::Output(format!("cannot create {}: {e}", dir.display())))
}

pub struct BarrierOptions {
    pub error: PathBuf,
    pub masses: Option<PathBuf>,
    pub defects: Option<PathBuf>,
    pub oracle: bool,
    pub support_cap: usize,
    pub shuffle: bool,
    pub steps: bool,
}

pub fn barrier(ctx: &Context, opts: &BarrierOptions, out: Option<&Path>) -> Result<()> {
    let (lattice, p) = ErrorFile::from_json(&read(&opts.error)?)?;
    let d = p.modulus();
    let masses: MassTable<f64> = match &opts.masses {
        Some(path) => {
            let spec: MassSpec = parse_json(path)?;
            if spec.d != d {
                return Err(qdouble::Error::Dimension(format!("masses are for d={}, error has d={d}", spec.d)).into());
            }
            spec.to_table(lattice.n())?
        }
        None => {
            let mut row = vec![1.0; d as usize];
            row[0] = 0.0;
            MassTable::uniform(d, lattice.n(), &row)?
        }
    };
    let order = if opts.shuffle {
        LeafOrder::Seeded(ctx.seed.unwrap_or(0))
    } else {
        LeafOrder::Ascending
    };
    let (path, pricing) = match &opts.defects {
        Some(file) => {
            let cfg: DefectConfig = parse_json(file)?;
            let defects = Defects::validate(&cfg, &lattice)?;
            let eff = defects.effective_masses(&masses);
            let path = if opts.shuffle {
                schedule_path_with(&p, &lattice, &eff, order)?
            } else {
                barrier_with_defects(&p, &defects, &lattice, &masses)?
            };
            (path, eff)
        }
        None => (schedule_path_with(&p, &lattice, &masses, order)?, masses.clone()),
    };
    path.validate()?;
    let stats = path_length_stats(&p, &lattice)?;
    let oracle = if opts.oracle {
        ctx.say(format!("exact barrier in a window of {} qudits", opts.support_cap));
        Some(brute_force_barrier(&p, &lattice, &pricing, opts.support_cap)?)
    } else {
        None
    };
    let mut report = json!({
        "constructive": path.barrier(),
        "energy_bound": 2.0 * pricing.j_max(),
        "length": path.len(),
        "length_bound": stats.bound,
        "max_violations": path.max_violations(),
        "profile": path.profile,
    });
    if let Some(v) = oracle {
        report["oracle"] = json!(v);
        report["support_cap"] = json!(opts.support_cap);
    }
    if opts.steps {
        report["steps"] = json!(path.steps);
    }
    emit(&report, out)
}

pub fn decompose(error: &Path, out: Option<&Path>) -> Result<()> {
    let (lattice, p) = ErrorFile::from_json(&read(error)?)?;
    let [chargeon, fluxon] = plan_error(&p, &lattice)?;
    let multiplicity = |plan: &qdouble::flow::SectorPlan| {
        json!({
            "max_loop_multiplicity": plan.loop_multiplicity().into_iter().max().unwrap_or(0),
            "max_string_multiplicity": plan.string_multiplicity().into_iter().max().unwrap_or(0),
        })
    };
    let report = json!({
        "chargeon": { "summary": multiplicity(&chargeon), "plan": chargeon },
        "fluxon": { "summary": multiplicity(&fluxon), "plan": fluxon },
    });
    emit(&report, out)
}

pub fn multiset_verify(d: u32, growth: Option<usize>, out: Option<&Path>) -> Result<()> {
    let extremal = verify_extremal_theorems(d)?;
    let mut report = json!({ "extremal": extremal });
    if let Some(k) = growth {
        report["growth"] = json!(verify_spectrum_growth(d, k)?);
    }
    emit(&report, out)
}

pub fn multiset_zero_sum(d: u32, items: &[u32], out: Option<&Path>) -> Result<()> {
    let m = Multiset::from_items(d, items.iter().copied())?;
    let subset = m.find_zero_sum_subset()?;
    let report = json!({
        "d": d,
        "items": m.items(),
        "zero_sum_free": subset.is_none(),
        "subset": subset.map(|s| s.items()),
        "spectrum": m.spectrum()?,
    });
    emit(&report, out)
}

pub fn defects_check(config: &Path, lx: usize, ly: usize, out: Option<&Path>) -> Result<()> {
    let cfg: DefectConfig = parse_json(config)?;
    let lattice = TorusLattice::new(lx, ly)?;
    let (report, _) = Defects::check(&cfg, &lattice)?;
    emit(&report, out)?;
    if report.consistent {
        Ok(())
    } else {
        Err(CliError::Rejected("defect configuration is inconsistent".into()))
    }
}

#[derive(Serialize)]
struct SummaryRow {
    beta: f64,
    median_t_fail: f64,
    q25: f64,
    q75: f64,
    n_traj: usize,
    bound_value: f64,
}

impl From<&SweepRow> for SummaryRow {
    fn from(r: &SweepRow) -> Self {
        SummaryRow {
            beta: r.beta,
            median_t_fail: r.median_t_fail,
            q25: r.q25,
            q75: r.q75,
            n_traj: r.n_traj,
            bound_value: r.bound_value,
        }
    }
}

fn write_summary(path: &Path, rows: &[SweepRow]) -> Result<()> {
    let io = |e: csv::Error| CliError::Output(format!("cannot write {}: {e}", path.display()));
    let mut w = csv::Writer::from_path(path).map_err(io)?;
    for r in rows {
        w.serialize(SummaryRow::from(r)).map_err(io)?;
    }
    w.flush().map_err(|e| CliError::Output(e.to_string()))
}

pub fn simulate(ctx: &Context, config: &Path, out: &Path) -> Result<()> {
    let cfg = load_config(config, ctx.seed)?;
    let sim = Simulation::new(&cfg)?;
    create_dir(out)?;
    ctx.say(format!("running {} trajectories", cfg.trajectories));
    let runs = sim.run_all(RunOptions::full())?;
    for t in &runs {
        emit(t, Some(&out.join(format!("trajectory_{:05}.json", t.index))))?;
    }
    let est = MemoryTimeEstimate::from_failure_times(&cfg, runs.iter().map(|t| t.failure_time).collect());
    let bound = arrhenius_bound(sim.dynamics())?;
    write_summary(&out.join("summary.csv"), &[SweepRow::new(&est, bound.value)])
}

pub fn gap(config: &Path, out: Option<&Path>) -> Result<()> {
    let cfg = load_config(config, None)?;
    let sim = Simulation::new(&cfg)?;
    emit(&exact_chain_gap(sim.dynamics())?, out)
}

pub fn bound(config: &Path, out: Option<&Path>) -> Result<()> {
    let cfg = load_config(config, None)?;
    let sim = Simulation::new(&cfg)?;
    emit(&arrhenius_bound(sim.dynamics())?, out)
}

pub fn sweep(ctx: &Context, config: &Path, betas: &[f64], calibrate: Option<usize>, out: &Path) -> Result<()> {
    let cfg = load_config(config, ctx.seed)?;
    create_dir(out)?;
    ctx.say(format!("sweeping {} values of beta", betas.len()));
    let rows = run_sweep(&cfg, betas, calibrate)?;
    write_summary(&out.join("summary.csv"), &rows)?;
    emit(&rows, Some(&out.join("sweep.json")))
}
