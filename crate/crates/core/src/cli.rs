//! Run manifests, CSV output and the `run`, `table`, `bench`, `constants` and
//! `eigs` commands.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Duration;

use num_traits::ToPrimitive;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::closure::constants_for_order;
use crate::error::{Error, Result};
use crate::models::{Model, ModelFamily, ModelSpec, PhysicalParams, State};
use crate::scenarios::{init_scenario, primitive_fields, relative_l1, PrimitiveFields, Scenario};
use crate::solver::{run, Field, Grid1D, SimulationResult, SolverConfig, SourceMode};

/// Environment variable that, when set, is prepended to relative output
/// directories.
pub const OUTPUT_ROOT_ENV: &str = "SWMOMENT_OUTPUT_ROOT";

/// Number of evenly spaced snapshots written when `emit_snapshots` is set,
/// not counting the initial state.
pub const SNAPSHOT_COUNT: usize = 10;

const REQUIRED_KEYS: [&str; 7] = ["scenario", "model", "n", "epsilon", "n_x", "t_end", "output_dir"];

/// Everything needed for one simulation run.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunManifest {
    pub scenario: Scenario,
    pub model: ModelFamily,
    pub n: usize,
    pub epsilon: f64,
    pub lambda0: f64,
    pub nu0: f64,
    pub g: f64,
    pub n_x: usize,
    pub cfl: f64,
    pub t_end: f64,
    pub output_dir: PathBuf,
    pub emit_snapshots: bool,
    pub benchmark_repeats: usize,
}

impl Serialize for Scenario {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(self.name())
    }
}

impl Serialize for ModelFamily {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(self.name())
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawManifest {
    scenario: Option<String>,
    model: Option<String>,
    n: Option<usize>,
    epsilon: Option<f64>,
    lambda0: Option<f64>,
    nu0: Option<f64>,
    g: Option<f64>,
    n_x: Option<usize>,
    cfl: Option<f64>,
    t_end: Option<f64>,
    output_dir: Option<PathBuf>,
    emit_snapshots: Option<bool>,
    benchmark_repeats: Option<usize>,
}

impl RunManifest {
    pub fn params(&self) -> PhysicalParams {
        PhysicalParams {
            g: self.g,
            epsilon: self.epsilon,
            lambda0: self.lambda0,
            nu0: self.nu0,
        }
    }

    pub fn spec(&self) -> Result<ModelSpec> {
        ModelSpec::new(self.model, self.n, self.params())
    }

    pub fn grid(&self) -> Result<Grid1D> {
        Grid1D::unit(self.n_x)
    }

    pub fn solver_config(&self) -> Result<SolverConfig> {
        let mut cfg = SolverConfig::new(self.cfl, self.t_end, SourceMode::default_for(self.model))?;
        if self.emit_snapshots {
            cfg.snapshot_times = (0..=SNAPSHOT_COUNT)
                .map(|k| self.t_end * k as f64 / SNAPSHOT_COUNT as f64)
                .collect();
        }
        Ok(cfg)
    }

    /// Checks invariants; returns the offending key with the message.
    fn check(&self) -> std::result::Result<(), (&'static str, String)> {
        if !(self.cfl > 0.0 && self.cfl <= 1.0) {
            return Err(("cfl", "cfl must lie in (0,1]".into()));
        }
        for (key, v) in [
            ("epsilon", self.epsilon),
            ("lambda0", self.lambda0),
            ("nu0", self.nu0),
            ("g", self.g),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err((key, format!("{key} must be positive, got {v}")));
            }
        }
        if !(self.t_end >= 0.0 && self.t_end.is_finite()) {
            return Err(("t_end", format!("t_end must be non-negative, got {}", self.t_end)));
        }
        if self.n_x < 4 {
            return Err(("n_x", format!("n_x must be at least 4, got {}", self.n_x)));
        }
        if self.benchmark_repeats == 0 {
            return Err(("benchmark_repeats", "benchmark_repeats must be at least 1".into()));
        }
        match (self.model, self.n) {
            (ModelFamily::Swe, 0) => {}
            (ModelFamily::Swe, n) => return Err(("n", format!("swe takes n = 0, got {n}"))),
            (m, 0) => return Err(("n", format!("{m} needs n >= 1"))),
            _ => {}
        }
        if self.n > crate::basis::DEFAULT_MAX_ORDER {
            return Err((
                "n",
                format!("n = {} exceeds the maximum of {}", self.n, crate::basis::DEFAULT_MAX_ORDER),
            ));
        }
        Ok(())
    }

    /// Output directory, with relative paths placed under the output root
    /// environment variable when it is set.
    pub fn resolved_output_dir(&self) -> PathBuf {
        resolve_output(&self.output_dir)
    }
}

fn resolve_output(dir: &Path) -> PathBuf {
    match std::env::var_os(OUTPUT_ROOT_ENV) {
        Some(root) if dir.is_relative() => PathBuf::from(root).join(dir),
        _ => dir.to_path_buf(),
    }
}

fn line_of_offset(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].matches('\n').count() + 1
}

fn line_of_key(text: &str, key: &str) -> Option<usize> {
    text.lines().position(|l| {
        let l = l.trim_start();
        l.strip_prefix(key)
            .is_some_and(|rest| rest.trim_start().starts_with('='))
    })
    .map(|i| i + 1)
}

/// Parses manifest text; `path` is only used in diagnostics.
pub fn parse_config_str(text: &str, path: &Path) -> Result<RunManifest> {
    let cfg_err = |line: Option<usize>, message: String| Error::Config {
        path: path.to_path_buf(),
        line,
        message,
    };
    let raw: RawManifest = toml::from_str(text).map_err(|e| {
        let line = e.span().map(|s| line_of_offset(text, s.start));
        cfg_err(line, e.message().to_string())
    })?;
    let missing: Vec<&str> = [
        raw.scenario.is_none(),
        raw.model.is_none(),
        raw.n.is_none(),
        raw.epsilon.is_none(),
        raw.n_x.is_none(),
        raw.t_end.is_none(),
        raw.output_dir.is_none(),
    ]
    .iter()
    .zip(REQUIRED_KEYS)
    .filter_map(|(&m, k)| m.then_some(k))
    .collect();
    if !missing.is_empty() {
        return Err(cfg_err(
            None,
            format!(
                "missing required keys: {} (required: {})",
                missing.join(", "),
                REQUIRED_KEYS.join(", ")
            ),
        ));
    }
    let scenario = raw
        .scenario
        .unwrap()
        .parse::<Scenario>()
        .map_err(|e| cfg_err(line_of_key(text, "scenario"), e.to_string()))?;
    let model = raw
        .model
        .unwrap()
        .parse::<ModelFamily>()
        .map_err(|e| cfg_err(line_of_key(text, "model"), e.to_string()))?;
    let manifest = RunManifest {
        scenario,
        model,
        n: raw.n.unwrap(),
        epsilon: raw.epsilon.unwrap(),
        lambda0: raw.lambda0.unwrap_or(1.0),
        nu0: raw.nu0.unwrap_or(1.0),
        g: raw.g.unwrap_or(1.0),
        n_x: raw.n_x.unwrap(),
        cfl: raw.cfl.unwrap_or(0.7),
        t_end: raw.t_end.unwrap(),
        output_dir: raw.output_dir.unwrap(),
        emit_snapshots: raw.emit_snapshots.unwrap_or(false),
        benchmark_repeats: raw.benchmark_repeats.unwrap_or(1),
    };
    manifest
        .check()
        .map_err(|(key, msg)| cfg_err(line_of_key(text, key), msg))?;
    Ok(manifest)
}

pub fn parse_config(path: &Path) -> Result<RunManifest> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_config_str(&text, path)
}

/// Serialises a manifest in the format read by [`parse_config`].
pub fn write_config(manifest: &RunManifest) -> String {
    toml::to_string(manifest).expect("manifest serialises to toml")
}

/// Float formatting used in every CSV: 17 significant digits.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

/// `x,h,u_m,alpha_1..alpha_N[,dx_h4]`.
pub fn solution_csv(fields: &PrimitiveFields) -> String {
    let mut out = String::from("x,h,u_m");
    for j in 1..=fields.alphas.len() {
        write!(out, ",alpha_{j}").unwrap();
    }
    if fields.dx_h4.is_some() {
        out.push_str(",dx_h4");
    }
    out.push('\n');
    for i in 0..fields.x.len() {
        out.push_str(&fmt_f64(fields.x[i]));
        for v in [fields.h[i], fields.u_m[i]] {
            out.push(',');
            out.push_str(&fmt_f64(v));
        }
        for a in &fields.alphas {
            out.push(',');
            out.push_str(&fmt_f64(a[i]));
        }
        if let Some(d) = &fields.dx_h4 {
            out.push(',');
            out.push_str(&fmt_f64(d[i]));
        }
        out.push('\n');
    }
    out
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    fs::write(path, contents).map_err(|e| Error::io(path, e))
}

/// Outcome of one `run` invocation.
#[derive(Clone, Debug)]
pub struct RunOutcome {
    pub manifest: RunManifest,
    pub result: SimulationResult,
    pub fields: PrimitiveFields,
    /// Wall time per repeat, including the moment reconstruction.
    pub wall_times: Vec<Duration>,
    pub output_dir: Option<PathBuf>,
}

impl RunOutcome {
    pub fn wall_time_min(&self) -> Duration {
        self.wall_times.iter().copied().min().unwrap_or_default()
    }

    pub fn wall_time_median(&self) -> Duration {
        let mut t = self.wall_times.clone();
        t.sort();
        match t.len() {
            0 => Duration::ZERO,
            n if n % 2 == 1 => t[n / 2],
            n => (t[n / 2 - 1] + t[n / 2]) / 2,
        }
    }
}

/// Runs a manifest `benchmark_repeats` times without writing anything.
pub fn simulate(manifest: &RunManifest) -> Result<RunOutcome> {
    simulate_repeated(manifest, Duration::ZERO)
}

/// A manifest with its model, grid and initial field built once, so that
/// repeated timings only measure the solve.
struct PreparedRun {
    model: Model,
    grid: Grid1D,
    cfg: SolverConfig,
    init: Field,
}

impl PreparedRun {
    fn new(manifest: &RunManifest) -> Result<Self> {
        let model = Model::new(manifest.spec()?)?;
        let grid = manifest.grid()?;
        let cfg = manifest.solver_config()?;
        let init = init_scenario(manifest.scenario, &model, &grid)?;
        Ok(PreparedRun { model, grid, cfg, init })
    }

    fn time_once(&self) -> Result<(Duration, SimulationResult, PrimitiveFields)> {
        let start = std::time::Instant::now();
        let result = run(&self.model, &self.grid, &self.cfg, &self.init)?;
        let fields = primitive_fields(&self.model, &self.grid, &result.field)?;
        Ok((start.elapsed(), result, fields))
    }
}

fn simulate_repeated(manifest: &RunManifest, min_total: Duration) -> Result<RunOutcome> {
    let prepared = PreparedRun::new(manifest)?;
    let mut wall_times = Vec::with_capacity(manifest.benchmark_repeats);
    let mut last = None;
    let mut total = Duration::ZERO;
    while wall_times.len() < manifest.benchmark_repeats
        || (total < min_total && wall_times.len() < MAX_BENCH_REPEATS)
    {
        let (elapsed, result, fields) = prepared.time_once()?;
        total += elapsed;
        wall_times.push(elapsed);
        last = Some((result, fields));
    }
    let (result, fields) = last.expect("at least one repeat");
    Ok(RunOutcome {
        manifest: manifest.clone(),
        result,
        fields,
        wall_times,
        output_dir: None,
    })
}

fn meta_csv(o: &RunOutcome, mass0: f64) -> String {
    let m = &o.manifest;
    let r = &o.result;
    let dx = 2.0 / m.n_x as f64;
    let rows: Vec<(&str, String)> = vec![
        ("scenario", m.scenario.name().into()),
        ("model", m.model.name().into()),
        ("n", m.n.to_string()),
        ("epsilon", fmt_f64(m.epsilon)),
        ("lambda0", fmt_f64(m.lambda0)),
        ("nu0", fmt_f64(m.nu0)),
        ("g", fmt_f64(m.g)),
        ("n_x", m.n_x.to_string()),
        ("cfl", fmt_f64(m.cfl)),
        ("t_end", fmt_f64(m.t_end)),
        ("final_time", fmt_f64(r.final_time)),
        ("steps", r.steps.to_string()),
        ("dt_min", fmt_f64(r.dt_min)),
        ("dt_max", fmt_f64(r.dt_max)),
        ("dt_mean", fmt_f64(r.dt_mean)),
        ("mass_initial", fmt_f64(mass0)),
        ("mass_final", fmt_f64(r.field.mass(dx))),
        ("repeats", o.wall_times.len().to_string()),
        ("wall_time_min_s", fmt_f64(o.wall_time_min().as_secs_f64())),
        ("wall_time_median_s", fmt_f64(o.wall_time_median().as_secs_f64())),
    ];
    let mut out = String::from("key,value\n");
    for (k, v) in rows {
        writeln!(out, "{k},{v}").unwrap();
    }
    out
}

/// Runs a manifest and writes `solution.csv`, `meta.csv` and, if requested,
/// the snapshot series under the resolved output directory.
pub fn run_command(manifest: &RunManifest) -> Result<RunOutcome> {
    let mut outcome = simulate(manifest)?;
    let dir = manifest.resolved_output_dir();
    let model = Model::new(manifest.spec()?)?;
    let grid = manifest.grid()?;
    let mass0 = init_scenario(manifest.scenario, &model, &grid)?.mass(grid.dx());
    write_file(&dir.join("solution.csv"), &solution_csv(&outcome.fields))?;
    write_file(&dir.join("meta.csv"), &meta_csv(&outcome, mass0))?;
    if manifest.emit_snapshots {
        let mut index = String::from("index,time,file\n");
        for (k, snap) in outcome.result.snapshots.iter().enumerate() {
            let name = format!("snapshot_{k:02}.csv");
            let fields = primitive_fields(&model, &grid, &snap.field)?;
            write_file(&dir.join("snapshots").join(&name), &solution_csv(&fields))?;
            writeln!(index, "{k},{},snapshots/{name}", fmt_f64(snap.time)).unwrap();
        }
        write_file(&dir.join("snapshots.csv"), &index)?;
    }
    outcome.output_dir = Some(dir);
    Ok(outcome)
}

/// A sweep over ε for the error tables.
#[derive(Clone, Debug, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub scenario: String,
    pub n: usize,
    pub epsilons: Vec<f64>,
    #[serde(default = "default_table_models")]
    pub models: Vec<String>,
    pub n_x: usize,
    pub t_end: f64,
    #[serde(default = "default_cfl")]
    pub cfl: f64,
    #[serde(default = "one")]
    pub lambda0: f64,
    #[serde(default = "one")]
    pub nu0: f64,
    #[serde(default = "one")]
    pub g: f64,
    pub output_dir: PathBuf,
}

fn default_table_models() -> Vec<String> {
    vec!["swe".into(), "rswme".into()]
}

fn default_cfl() -> f64 {
    0.7
}

fn one() -> f64 {
    1.0
}

impl SweepConfig {
    /// One manifest per (ε, model), the full moment reference first for each ε.
    pub fn manifests(&self) -> Result<Vec<RunManifest>> {
        let scenario: Scenario = self.scenario.parse()?;
        let mut models = vec![ModelFamily::Swme];
        for m in &self.models {
            let f: ModelFamily = m.parse()?;
            if f != ModelFamily::Swme && !models.contains(&f) {
                models.push(f);
            }
        }
        let mut out = Vec::new();
        for &eps in &self.epsilons {
            for &family in &models {
                let n = if family == ModelFamily::Swe { 0 } else { self.n };
                let m = RunManifest {
                    scenario,
                    model: family,
                    n,
                    epsilon: eps,
                    lambda0: self.lambda0,
                    nu0: self.nu0,
                    g: self.g,
                    n_x: self.n_x,
                    cfl: self.cfl,
                    t_end: self.t_end,
                    output_dir: self.output_dir.join(run_dir_name(family, n, eps)),
                    emit_snapshots: false,
                    benchmark_repeats: 1,
                };
                m.check().map_err(|(_, msg)| Error::InvalidParameter(msg))?;
                out.push(m);
            }
        }
        Ok(out)
    }
}

fn run_dir_name(family: ModelFamily, n: usize, eps: f64) -> String {
    let label = if family == ModelFamily::Swe {
        "swe".to_string()
    } else {
        format!("{}{n}", family.name())
    };
    format!("eps_{eps}/{label}")
}

/// One row of an error table.
#[derive(Clone, Debug, PartialEq)]
pub struct TableRow {
    pub quantity: &'static str,
    pub model: String,
    pub errors: Vec<f64>,
}

/// Relative L1 errors against the full moment reference, one column per ε.
#[derive(Clone, Debug, PartialEq)]
pub struct ErrorTable {
    pub epsilons: Vec<f64>,
    pub rows: Vec<TableRow>,
}

impl ErrorTable {
    pub fn get(&self, quantity: &str, model: &str, eps: f64) -> Option<f64> {
        let col = self.epsilons.iter().position(|&e| e == eps)?;
        self.rows
            .iter()
            .find(|r| r.quantity == quantity && r.model == model)
            .map(|r| r.errors[col])
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("quantity,model");
        for e in &self.epsilons {
            write!(out, ",eps={e}").unwrap();
        }
        out.push('\n');
        for r in &self.rows {
            write!(out, "{},{}", r.quantity, r.model).unwrap();
            for e in &r.errors {
                write!(out, ",{}", fmt_f64(*e)).unwrap();
            }
            out.push('\n');
        }
        out
    }

    /// Aligned plain-text rendering.
    pub fn to_text(&self) -> String {
        let mut out = format!("{:<16}", "");
        for e in &self.epsilons {
            write!(out, "{:>14}", format!("eps={e}")).unwrap();
        }
        out.push('\n');
        for r in &self.rows {
            write!(out, "{:<16}", format!("{}, in {}", r.model, r.quantity)).unwrap();
            for e in &r.errors {
                write!(out, "{e:>14.4e}").unwrap();
            }
            out.push('\n');
        }
        out
    }
}

fn manifest_label(m: &RunManifest) -> String {
    ModelSpec {
        family: m.model,
        order: m.n,
        params: m.params(),
    }
    .label()
}

/// Runs all manifests in parallel and assembles the error table. Each ε must
/// have exactly one full moment run, which serves as the reference.
pub fn error_table(manifests: &[RunManifest], write_runs: bool) -> Result<ErrorTable> {
    let outcomes: Vec<RunOutcome> = manifests
        .par_iter()
        .map(|m| if write_runs { run_command(m) } else { simulate(m) })
        .collect::<Result<_>>()?;

    let mut epsilons: Vec<f64> = Vec::new();
    for m in manifests {
        if !epsilons.contains(&m.epsilon) {
            epsilons.push(m.epsilon);
        }
    }
    epsilons.sort_by(f64::total_cmp);

    let mut labels: Vec<String> = Vec::new();
    let order_key = |f: ModelFamily| match f {
        ModelFamily::Swe => 0,
        ModelFamily::Rswme => 1,
        ModelFamily::Hrswme => 2,
        ModelFamily::Swme => 3,
    };
    let mut candidates: Vec<&RunManifest> = manifests.iter().filter(|m| m.model != ModelFamily::Swme).collect();
    candidates.sort_by_key(|m| (order_key(m.model), m.n));
    for m in candidates {
        let l = manifest_label(m);
        if !labels.contains(&l) {
            labels.push(l);
        }
    }

    let mut h_err: BTreeMap<(String, usize), f64> = BTreeMap::new();
    let mut u_err: BTreeMap<(String, usize), f64> = BTreeMap::new();
    for (col, &eps) in epsilons.iter().enumerate() {
        let refs: Vec<&RunOutcome> = outcomes
            .iter()
            .filter(|o| o.manifest.epsilon == eps && o.manifest.model == ModelFamily::Swme)
            .collect();
        let reference = match refs.as_slice() {
            [r] => *r,
            [] => {
                return Err(Error::InvalidParameter(format!(
                    "no full moment reference run for epsilon = {eps}"
                )))
            }
            _ => {
                return Err(Error::InvalidParameter(format!(
                    "several full moment reference runs for epsilon = {eps}"
                )))
            }
        };
        for o in outcomes
            .iter()
            .filter(|o| o.manifest.epsilon == eps && o.manifest.model != ModelFamily::Swme)
        {
            if o.manifest.n_x != reference.manifest.n_x {
                return Err(Error::LengthMismatch(o.manifest.n_x, reference.manifest.n_x));
            }
            let label = manifest_label(&o.manifest);
            h_err.insert(
                (label.clone(), col),
                relative_l1(&o.fields.h, &reference.fields.h)?,
            );
            u_err.insert(
                (label, col),
                relative_l1(&o.fields.u_m, &reference.fields.u_m)?,
            );
        }
    }

    let mut rows = Vec::new();
    for (quantity, map) in [("h", &h_err), ("u_m", &u_err)] {
        for l in &labels {
            let errors = (0..epsilons.len())
                .map(|c| map.get(&(l.clone(), c)).copied().unwrap_or(f64::NAN))
                .collect();
            rows.push(TableRow {
                quantity,
                model: l.clone(),
                errors,
            });
        }
    }
    Ok(ErrorTable { epsilons, rows })
}

/// `table <dir|sweep.toml>`: a directory holds one manifest per run; a file
/// is a [`SweepConfig`]. Writes `table.csv` to the sweep output directory or
/// into the given directory.
pub fn table_command(input: &Path) -> Result<(ErrorTable, PathBuf)> {
    let (manifests, out_dir) = if input.is_dir() {
        let mut paths: Vec<PathBuf> = fs::read_dir(input)
            .map_err(|e| Error::io(input, e))?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|x| x == "toml"))
            .collect();
        paths.sort();
        let manifests = paths.iter().map(|p| parse_config(p)).collect::<Result<Vec<_>>>()?;
        (manifests, resolve_output(input))
    } else {
        let text = fs::read_to_string(input).map_err(|e| Error::io(input, e))?;
        let sweep: SweepConfig = toml::from_str(&text).map_err(|e| Error::Config {
            path: input.to_path_buf(),
            line: e.span().map(|s| line_of_offset(&text, s.start)),
            message: e.message().to_string(),
        })?;
        let dir = resolve_output(&sweep.output_dir);
        (sweep.manifests()?, dir)
    };
    if manifests.is_empty() {
        return Err(Error::InvalidParameter(format!(
            "no run manifests found in {}",
            input.display()
        )));
    }
    let table = error_table(&manifests, true)?;
    write_file(&out_dir.join("table.csv"), &table.to_csv())?;
    Ok((table, out_dir))
}

/// Accumulated wall time each benchmark variant is sampled for.
pub const MIN_BENCH_TIME: Duration = Duration::from_secs(2);

/// Upper bound on benchmark repeats for very short runs.
pub const MAX_BENCH_REPEATS: usize = 50;

/// Minimum wall times for one moment order.
#[derive(Clone, Debug, PartialEq)]
pub struct BenchRow {
    pub n: usize,
    pub swme: Duration,
    pub rswme: Duration,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BenchReport {
    pub swe: Duration,
    pub rows: Vec<BenchRow>,
}

impl BenchReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("n,swe_s,swme_s,rswme_s\n");
        writeln!(out, "0,{},,", fmt_f64(self.swe.as_secs_f64())).unwrap();
        for r in &self.rows {
            writeln!(
                out,
                "{},,{},{}",
                r.n,
                fmt_f64(r.swme.as_secs_f64()),
                fmt_f64(r.rswme.as_secs_f64())
            )
            .unwrap();
        }
        out
    }
}

/// Times the SWE and, for each order, the full and the reduced model on the
/// manifest's scenario and reports the minimum wall time of each variant.
///
/// Variants are sampled round-robin rather than one after the other: on
/// shared or virtualised hosts the machine speed drifts over seconds, and
/// interleaving lets every variant see the same phases. Each variant runs at
/// least `benchmark_repeats` times and until it has accumulated
/// [`MIN_BENCH_TIME`] (capped at [`MAX_BENCH_REPEATS`] runs).
pub fn bench(manifest: &RunManifest, orders: &[usize]) -> Result<BenchReport> {
    if orders.contains(&0) {
        return Err(Error::OrderTooSmall { order: 0, min: 1 });
    }
    let variant = |model: ModelFamily, n: usize| RunManifest {
        model,
        n,
        emit_snapshots: false,
        ..manifest.clone()
    };
    let mut manifests = vec![variant(ModelFamily::Swe, 0)];
    for &n in orders {
        manifests.push(variant(ModelFamily::Swme, n));
        manifests.push(variant(ModelFamily::Rswme, n));
    }
    let prepared = manifests
        .iter()
        .map(PreparedRun::new)
        .collect::<Result<Vec<_>>>()?;
    let repeats = manifest.benchmark_repeats.max(1);
    let mut samples = vec![Vec::<Duration>::new(); prepared.len()];
    let done = |s: &Vec<Duration>| {
        s.len() >= repeats
            && (s.iter().sum::<Duration>() >= MIN_BENCH_TIME || s.len() >= MAX_BENCH_REPEATS)
    };
    while !samples.iter().all(done) {
        for (p, s) in prepared.iter().zip(samples.iter_mut()) {
            if !done(s) {
                s.push(p.time_once()?.0);
            }
        }
    }
    let min = |i: usize| samples[i].iter().copied().min().unwrap_or_default();
    let rows = orders
        .iter()
        .enumerate()
        .map(|(k, &n)| BenchRow {
            n,
            swme: min(1 + 2 * k),
            rswme: min(2 + 2 * k),
        })
        .collect();
    Ok(BenchReport { swe: min(0), rows })
}

/// `bench <cfg> --n ...`: writes `runtime.csv` under the output directory.
pub fn bench_command(manifest: &RunManifest, orders: &[usize]) -> Result<(BenchReport, PathBuf)> {
    let report = bench(manifest, orders)?;
    let dir = manifest.resolved_output_dir();
    write_file(&dir.join("runtime.csv"), &report.to_csv())?;
    Ok((report, dir))
}

fn fraction(r: &num_rational::BigRational) -> String {
    if r.denom() == &num_bigint::BigInt::from(1) {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Closure constants of order `n` as exact fractions and decimals.
pub fn format_constants(n: usize) -> Result<String> {
    let k = constants_for_order(n)?;
    let mut out = format!("closure constants, N = {n}\n");
    let dec = |r: &num_rational::BigRational| r.to_f64().unwrap_or(f64::NAN);
    for (name, v) in [("B~", &k.b_tilde), ("D~", &k.d_tilde), ("F~", &k.f_tilde)] {
        for (j, x) in v.iter().enumerate() {
            writeln!(out, "{name}_{:<3} {:>14}  {:.16e}", j + 1, fraction(x), dec(x)).unwrap();
        }
    }
    for (name, x) in [
        ("Gamma", &k.gamma),
        ("Phi", &k.phi),
        ("Omega", &k.omega),
        ("Lambda", &k.lambda),
    ] {
        writeln!(out, "{name:<6} {:>14}  {:.16e}", fraction(x), dec(x)).unwrap();
    }
    writeln!(
        out,
        "Lambda = -Phi + Omega^2: {}",
        if k.lambda_identity_holds() { "holds" } else { "FAILS" }
    )
    .unwrap();
    Ok(out)
}

/// Eigenvalues of the system matrix at `(h, u_m, α)` with a hyperbolicity
/// verdict.
pub fn format_eigs(spec: ModelSpec, h: f64, u_m: f64, alphas: &[f64]) -> Result<String> {
    let model = Model::new(spec)?;
    let state = if spec.family == ModelFamily::Swme {
        let mut a = alphas.to_vec();
        a.resize(spec.order, 0.0);
        State::from_primitive(h, u_m, &a)
    } else {
        State::from_primitive(h, u_m, &[])
    };
    let eig = if spec.family.is_reduced() {
        model.rswme_eigenvalues(state.as_slice())?.to_vec()
    } else {
        model.numerical_eigenvalues(state.as_slice())?
    };
    let mut out = format!("{} at h = {h}, u_m = {u_m}\n", spec.label());
    for (i, l) in eig.iter().enumerate() {
        if l.im == 0.0 {
            writeln!(out, "lambda_{} = {:.16e}", i + 1, l.re).unwrap();
        } else {
            writeln!(out, "lambda_{} = {:.16e} {:+.16e}i", i + 1, l.re, l.im).unwrap();
        }
    }
    let scale = eig.iter().map(|l| l.norm()).fold(1.0, f64::max);
    let real = eig.iter().all(|l| l.im.abs() <= 1e-12 * scale);
    writeln!(out, "hyperbolic: {}", if real { "yes" } else { "no" }).unwrap();
    if spec.family.is_reduced() {
        let t = model.hyperbolicity_threshold()?;
        writeln!(out, "discriminant: {:.16e}", model.reduced_discriminant(h, u_m)?).unwrap();
        writeln!(out, "height threshold: {t:.16e}").unwrap();
    }
    writeln!(out, "max wave speed: {:.16e}", model.max_wavespeed(state.as_slice())?).unwrap();
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    const TEST_II: &str = r#"
scenario = "smooth_sine"
model = "rswme"
n = 1
epsilon = 0.1
n_x = 1000
t_end = 2.0
output_dir = "out/test2"
"#;

    fn p() -> &'static Path {
        Path::new("cfg.toml")
    }

    #[test]
    fn parses_with_defaults() {
        let m = parse_config_str(TEST_II, p()).unwrap();
        assert_eq!(m.n_x, 1000);
        assert_eq!(m.cfl, 0.7);
        assert_eq!(m.t_end, 2.0);
        assert_eq!((m.g, m.lambda0, m.nu0), (1.0, 1.0, 1.0));
        assert_eq!(m.scenario, Scenario::SmoothSine);
        assert_eq!(m.model, ModelFamily::Rswme);
        assert!(!m.emit_snapshots);
        assert_eq!(m.benchmark_repeats, 1);
    }

    #[test]
    fn bad_cfl_reports_line() {
        let text = format!("{TEST_II}cfl = 1.5\n");
        let err = parse_config_str(&text, p()).unwrap_err();
        match err {
            Error::Config { line, message, .. } => {
                assert_eq!(message, "cfl must lie in (0,1]");
                assert_eq!(line, Some(9));
            }
            other => panic!("{other}"),
        }
    }

    #[test]
    fn empty_file_lists_required_keys() {
        let msg = parse_config_str("", p()).unwrap_err().to_string();
        for k in REQUIRED_KEYS {
            assert!(msg.contains(k), "{msg}");
        }
    }

    #[test]
    fn unknown_key_is_rejected_with_line() {
        let text = format!("{TEST_II}viscosity = 3\n");
        match parse_config_str(&text, p()).unwrap_err() {
            Error::Config { line, message, .. } => {
                assert_eq!(line, Some(9));
                assert!(message.contains("viscosity"), "{message}");
            }
            other => panic!("{other}"),
        }
    }

    #[test]
    fn wrong_type_reports_line() {
        let text = TEST_II.replace("n_x = 1000", "n_x = \"many\"");
        match parse_config_str(&text, p()).unwrap_err() {
            Error::Config { line, .. } => assert_eq!(line, Some(6)),
            other => panic!("{other}"),
        }
    }

    #[test]
    fn invalid_values() {
        let bad = TEST_II.replace("model = \"rswme\"", "model = \"swe\"");
        assert!(parse_config_str(&bad, p()).unwrap_err().to_string().contains("n = 0"));
        let bad = TEST_II.replace("scenario = \"smooth_sine\"", "scenario = \"tsunami\"");
        assert!(matches!(parse_config_str(&bad, p()), Err(Error::Config { line: Some(2), .. })));
        let bad = TEST_II.replace("epsilon = 0.1", "epsilon = -0.1");
        assert!(matches!(parse_config_str(&bad, p()), Err(Error::Config { line: Some(5), .. })));
    }

    #[test]
    fn round_trip() {
        let mut m = parse_config_str(TEST_II, p()).unwrap();
        m.g = 9.81;
        m.epsilon = 0.1 + 0.2;
        m.emit_snapshots = true;
        m.benchmark_repeats = 3;
        let text = write_config(&m);
        assert_eq!(parse_config_str(&text, p()).unwrap(), m);
    }

    #[test]
    fn float_format_has_17_digits() {
        assert_eq!(fmt_f64(0.1), "1.0000000000000001e-1");
        assert_eq!(fmt_f64(-2.0), "-2.0000000000000000e0");
    }

    #[test]
    fn constants_output() {
        let s = format_constants(2).unwrap();
        assert!(s.contains("19/720"));
        assert!(s.contains("4/45"));
        assert!(s.contains("holds"));
    }

    #[test]
    fn eigs_output() {
        let spec = ModelSpec::new(ModelFamily::Rswme, 1, PhysicalParams::default()).unwrap();
        let s = format_eigs(spec, 8.0, 0.0, &[]).unwrap();
        assert!(s.contains("hyperbolic: no"), "{s}");
        let s = format_eigs(spec, 1.0, 0.0, &[]).unwrap();
        assert!(s.contains("hyperbolic: yes"));
        let swme = ModelSpec::new(ModelFamily::Swme, 2, PhysicalParams::default()).unwrap();
        assert!(format_eigs(swme, 1.0, 0.5, &[-0.1]).unwrap().contains("lambda_4"));
    }

    #[test]
    fn sweep_expands_with_reference_first() {
        let sweep: SweepConfig = toml::from_str(
            r#"
scenario = "smooth_sine"
n = 2
epsilons = [0.1, 1.0]
models = ["swe", "rswme", "hrswme"]
n_x = 50
t_end = 0.1
output_dir = "t"
"#,
        )
        .unwrap();
        let ms = sweep.manifests().unwrap();
        assert_eq!(ms.len(), 8);
        assert_eq!(ms[0].model, ModelFamily::Swme);
        assert_eq!(ms[1].n, 0);
        assert!(ms[3].output_dir.ends_with("eps_0.1/hrswme2"));
    }

    #[test]
    fn small_error_table() {
        let sweep = SweepConfig {
            scenario: "smooth_sine".into(),
            n: 1,
            epsilons: vec![0.1],
            models: default_table_models(),
            n_x: 40,
            t_end: 0.2,
            cfl: 0.7,
            lambda0: 1.0,
            nu0: 1.0,
            g: 1.0,
            output_dir: "unused".into(),
        };
        let t = error_table(&sweep.manifests().unwrap(), false).unwrap();
        assert_eq!(t.epsilons, vec![0.1]);
        assert_eq!(t.rows.len(), 4);
        assert!(t.get("h", "RSWME1", 0.1).unwrap() < t.get("h", "SWE", 0.1).unwrap());
        assert!(t.to_csv().starts_with("quantity,model,eps=0.1\n"));
    }

    #[test]
    fn median_of_repeats() {
        let m = parse_config_str(TEST_II, p()).unwrap();
        let mut o = simulate(&RunManifest {
            n_x: 8,
            t_end: 0.01,
            ..m
        })
        .unwrap();
        o.wall_times = vec![Duration::from_millis(3), Duration::from_millis(1), Duration::from_millis(2)];
        assert_eq!(o.wall_time_min(), Duration::from_millis(1));
        assert_eq!(o.wall_time_median(), Duration::from_millis(2));
    }
}
