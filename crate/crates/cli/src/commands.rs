use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Subcommand, ValueEnum};
use rand::Rng;
use serde::Serialize;
use takiff_toda::checks::{self, Scale, Status};
use takiff_toda::invariants::{all_specs, evaluate_invariant, generator_specs};
use takiff_toda::sampling::{self, Support};
use takiff_toda::serial::{element_from_entries, element_from_json, entries_from_element, Entry};
use takiff_toda::series::{bound_check, global_condition, series_coefficients, DEFAULT_ORDER};
use takiff_toda::toda::{Direction, Formulation, Method, Settings, TodaState, TodaSystem};
use takiff_toda::{cartan_matrix, CanonicalState, KostantSection, Scalar, Takiff};

use crate::config::{ExperimentConfig, InitialData};
use crate::error::CliError;
use crate::output::{emit_trajectory, fmt_float, open_output};

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Integrate a Toda lattice and write the trajectory as CSV.
    Simulate(SimulateArgs),
    /// Evaluate the invariants at an element of the Takiff algebra.
    Invariants(InvariantsArgs),
    /// Reduce an element of ssf + b_l onto the Kostant section.
    Reduce(ReduceArgs),
    /// Power-series solution of the reduced third-order equation.
    Series(SeriesArgs),
    /// Run the property checks of every module.
    Check(CheckArgs),
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum FormulationArg {
    Canonical,
    Lax,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum MethodArg {
    Rk4,
    Rk45,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum DirectionArg {
    Forward,
    Backward,
}

#[derive(Debug, Args)]
pub struct AlgebraArgs {
    /// Cartan series (A, B, C or D).
    #[arg(long = "type")]
    pub series: Option<String>,
    #[arg(long)]
    pub rank: Option<usize>,
    /// Truncation level of the Takiff algebra.
    #[arg(long)]
    pub l: Option<usize>,
}

impl AlgebraArgs {
    fn resolve(&self, cfg: &ExperimentConfig) -> (String, usize, usize) {
        let from_cfg = cfg.algebra.as_ref();
        let series = self
            .series
            .clone()
            .or_else(|| from_cfg.map(|a| a.series.clone()))
            .unwrap_or_else(|| "A".into());
        let rank = self.rank.or(from_cfg.map(|a| a.rank)).unwrap_or(1);
        let l = self.l.or(from_cfg.map(|a| a.l)).unwrap_or(1);
        (series, rank, l)
    }

    fn takiff(&self, cfg: &ExperimentConfig) -> Result<Takiff, CliError> {
        let (series, rank, l) = self.resolve(cfg);
        if !series.trim().eq_ignore_ascii_case("A") {
            return Err(takiff_toda::Error::UnsupportedType(rank, series).into());
        }
        Ok(Takiff::new(rank, l)?)
    }
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub algebra: AlgebraArgs,
    #[arg(long, value_enum)]
    pub formulation: Option<FormulationArg>,
    #[arg(long)]
    pub t_end: Option<f64>,
    #[arg(long)]
    pub dt: Option<f64>,
    #[arg(long, value_enum)]
    pub method: Option<MethodArg>,
    #[arg(long, value_enum)]
    pub direction: Option<DirectionArg>,
    /// Keep every n-th grid point.
    #[arg(long)]
    pub stride: Option<usize>,
    #[arg(long)]
    pub abs_tol: Option<f64>,
    #[arg(long)]
    pub rel_tol: Option<f64>,
    /// Output CSV path (stdout when absent).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct InvariantsArgs {
    #[command(flatten)]
    pub algebra: AlgebraArgs,
    /// Element as a JSON list of `{label, level, num, den}` entries.
    #[arg(long)]
    pub point: Option<String>,
    /// Include the coefficients above the generating range.
    #[arg(long)]
    pub all: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ReduceArgs {
    #[command(flatten)]
    pub algebra: AlgebraArgs,
    /// Element as a JSON list of entries.
    #[arg(long)]
    pub point: Option<String>,
    /// File holding the element JSON.
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
#[command(args_conflicts_with_subcommands = true)]
pub struct SeriesArgs {
    #[command(subcommand)]
    pub action: Option<SeriesAction>,
    #[arg(long, allow_hyphen_values = true)]
    pub a0: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub a1: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub a2: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub c0: Option<f64>,
    #[arg(long)]
    pub order: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum SeriesAction {
    /// Evaluate the global-solvability condition on (c0, c1, c2, c3).
    CheckGlobal {
        #[arg(long, allow_hyphen_values = true)]
        c0: f64,
        #[arg(long, allow_hyphen_values = true)]
        c1: f64,
        #[arg(long, allow_hyphen_values = true)]
        c2: f64,
        #[arg(long, allow_hyphen_values = true)]
        c3: f64,
    },
}

#[derive(Debug, Args)]
pub struct CheckArgs {
    /// Use the full sample counts instead of the quick ones.
    #[arg(long)]
    pub full: bool,
}

pub fn simulate(args: &SimulateArgs, cfg: &ExperimentConfig, seed: u64) -> Result<(), CliError> {
    let (series, rank, l) = args.algebra.resolve(cfg);
    let system = TodaSystem::new(cartan_matrix(&series, rank)?, l)?;
    let formulation = match args.formulation {
        Some(FormulationArg::Canonical) => Formulation::Canonical,
        Some(FormulationArg::Lax) => Formulation::Lax,
        None => cfg.formulation.unwrap_or(Formulation::Lax),
    };
    let integ = cfg.integrator.clone().unwrap_or_default();
    let method = match args.method {
        Some(MethodArg::Rk4) => Method::Rk4,
        Some(MethodArg::Rk45) => Method::Rk45,
        None => integ.method.unwrap_or(Method::Rk4),
    };
    let mut settings = Settings::new(
        args.t_end.or(integ.t_end).unwrap_or(10.0),
        args.dt.or(integ.dt).unwrap_or(1e-3),
        method,
    );
    settings.direction = match args.direction {
        Some(DirectionArg::Forward) => Direction::Forward,
        Some(DirectionArg::Backward) => Direction::Backward,
        None => integ.direction.unwrap_or_default(),
    };
    if let Some(s) = args.stride.or(integ.stride) {
        settings.stride = s;
    }
    if let Some(t) = args.abs_tol.or(integ.abs_tol) {
        settings.abs_tol = t;
    }
    if let Some(t) = args.rel_tol.or(integ.rel_tol) {
        settings.rel_tol = t;
    }

    let initial = initial_state(cfg, formulation, rank, l, seed)?;
    let traj = system.integrate(formulation, &initial, &settings)?;
    let path = args.out.clone().or_else(|| cfg.outputs.as_ref().and_then(|o| o.path.clone()));
    let mut out = open_output(path.as_deref())?;
    emit_trajectory(&traj, &mut out)?;
    out.flush()?;
    Ok(())
}

fn initial_state(
    cfg: &ExperimentConfig,
    formulation: Formulation,
    rank: usize,
    l: usize,
    seed: u64,
) -> Result<TodaState<f64>, CliError> {
    match &cfg.initial {
        Some(InitialData::Raw { rho, gamma }) => Ok(TodaState::new(rho.clone(), gamma.clone())?),
        Some(InitialData::Canonical { rho0, rho1, phi0, phi1 }) => Ok(CanonicalState {
            rho0: rho0.clone(),
            rho1: rho1.clone(),
            phi0: phi0.clone(),
            phi1: phi1.clone(),
        }
        .to_raw()?),
        None => {
            let reference = match formulation {
                Formulation::Lax => checks::reference_lax_state(rank, l),
                Formulation::Canonical if l == 1 => checks::reference_canonical_state(rank),
                Formulation::Canonical => None,
            };
            Ok(reference.unwrap_or_else(|| random_state(rank, l, seed)))
        }
    }
}

fn random_state(rank: usize, l: usize, seed: u64) -> TodaState<f64> {
    let mut rng = sampling::rng(seed);
    let mut draw = |lo: f64, hi: f64| -> Vec<Vec<f64>> {
        (0..rank).map(|_| (0..=l).map(|_| rng.gen_range(lo..hi)).collect()).collect()
    };
    let rho = draw(-1.0, 1.0);
    let gamma = draw(0.2, 1.5);
    TodaState { rho, gamma }
}

fn read_element(
    alg: &Takiff,
    point: Option<&str>,
    file: Option<&PathBuf>,
    cfg: &ExperimentConfig,
) -> Result<Option<takiff_toda::ExactElement>, CliError> {
    if let Some(json) = point {
        return Ok(Some(element_from_json(alg, json)?));
    }
    if let Some(p) = file {
        let text = std::fs::read_to_string(p).map_err(|e| CliError::Io(format!("{}: {e}", p.display())))?;
        return Ok(Some(element_from_json(alg, &text)?));
    }
    match &cfg.element {
        Some(entries) => Ok(Some(element_from_entries(alg, entries)?)),
        None => Ok(None),
    }
}

pub fn invariants(args: &InvariantsArgs, cfg: &ExperimentConfig, seed: u64) -> Result<(), CliError> {
    let alg = args.algebra.takiff(cfg)?;
    let (n, l) = (alg.rank(), alg.level());
    let x = match read_element(&alg, args.point.as_deref(), None, cfg)? {
        Some(x) => x,
        None => sampling::random_exact(&mut sampling::rng(seed), &alg, Support::All),
    };
    let specs = if args.all { all_specs(n, l) } else { generator_specs(n, l) };
    let out = open_output(args.out.as_deref())?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["power", "index", "generator", "exact", "value"])?;
    for spec in specs {
        let v = evaluate_invariant(&alg, spec, &x)?;
        w.write_record([
            spec.power.to_string(),
            spec.index.to_string(),
            spec.is_generator(l).to_string(),
            v.to_string(),
            fmt_float(v.to_f64()),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Serialize)]
struct ReduceOutput {
    log_a: Vec<Entry>,
    section_point: Vec<Entry>,
    coordinates: Vec<String>,
    iterations: usize,
    orbit_discrepancy: String,
}

pub fn reduce(args: &ReduceArgs, cfg: &ExperimentConfig) -> Result<(), CliError> {
    let alg = args.algebra.takiff(cfg)?;
    let y = read_element(&alg, args.point.as_deref(), args.input.as_ref(), cfg)?
        .ok_or_else(|| CliError::Usage("reduce needs --point, --input or a config element".into()))?;
    let section = KostantSection::with_default_ssf(&alg)?;
    let report = section.orbit_invariance_check(&y)?;
    let r = &report.reduction;
    let result = ReduceOutput {
        log_a: entries_from_element(&alg, r.group.log()),
        section_point: entries_from_element(&alg, &r.section_point),
        coordinates: r.coordinates.iter().map(ToString::to_string).collect(),
        iterations: r.iterations,
        orbit_discrepancy: report.discrepancy.to_string(),
    };
    let mut out = open_output(args.out.as_deref())?;
    serde_json::to_writer_pretty(&mut out, &result).map_err(|e| CliError::Io(e.to_string()))?;
    writeln!(out)?;
    out.flush()?;
    Ok(())
}

pub fn series(args: &SeriesArgs, cfg: &ExperimentConfig) -> Result<(), CliError> {
    if let Some(SeriesAction::CheckGlobal { c0, c1, c2, c3 }) = args.action {
        let verdict = global_condition(&c0, &c1, &c2, &c3);
        let mut out = std::io::stdout().lock();
        for c in &verdict.conditions {
            let value = c.value.map_or_else(|| "undefined".to_string(), fmt_float);
            writeln!(out, "{} = {value}: {}", c.name, if c.holds { "in (0, 1)" } else { "violated" })?;
        }
        if let Some(d) = &verdict.diagnostic {
            writeln!(out, "note: {d}")?;
        }
        writeln!(out, "global condition {}", if verdict.holds { "holds" } else { "fails" })?;
        return Ok(());
    }
    let sc = cfg.series.clone().unwrap_or_default();
    let pick = |flag: Option<f64>, c: Option<f64>| flag.or(c).unwrap_or(0.0);
    let order = args.order.or(sc.order).unwrap_or(DEFAULT_ORDER);
    if order < 3 {
        return Err(CliError::Usage(format!("--order must be at least 3 (got {order})")));
    }
    let sol = series_coefficients(
        pick(args.a0, sc.a0),
        pick(args.a1, sc.a1),
        pick(args.a2, sc.a2),
        pick(args.c0, sc.c0),
        order,
    );
    let out = open_output(args.out.as_deref())?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["k", "a_k", "bound", "margin"])?;
    for (k, a) in sol.coefficients.iter().enumerate() {
        let (bound, margin) = match k.checked_sub(2).filter(|&m| m >= 1) {
            Some(m) => {
                let b = 2.0 / (m * m) as f64;
                (fmt_float(b), fmt_float(b - a.abs()))
            }
            None => (String::new(), String::new()),
        };
        w.write_record([k.to_string(), fmt_float(*a), bound, margin])?;
    }
    w.flush()?;
    let audit = bound_check(&sol);
    if !audit.applicable {
        eprintln!("note: initial data violate |a0|, |a1|, |a2| < 1; the bound is not guaranteed");
    } else if let Some(k) = audit.first_violation {
        eprintln!("warning: |a_{}| exceeds 2/{k}^2", k + 2);
    }
    Ok(())
}

pub fn check(args: &CheckArgs) -> Result<(), CliError> {
    let scale = if args.full { Scale::FULL } else { Scale::QUICK };
    let outcomes = checks::run_all(&scale);
    for o in &outcomes {
        println!("{o}");
    }
    let failed = outcomes.iter().filter(|o| o.status == Status::Fail).count();
    if failed > 0 {
        return Err(CliError::ChecksFailed(failed));
    }
    Ok(())
}
