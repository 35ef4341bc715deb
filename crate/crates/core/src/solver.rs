//! First-order path-conservative finite-volume solver with Rusanov-type
//! numerical viscosity and Godunov splitting of transport and friction.

use std::time::{Duration, Instant};

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::models::{Model, ModelFamily};

/// Uniform periodic grid.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Grid1D {
    pub n_cells: usize,
    pub x_min: f64,
    pub x_max: f64,
}

impl Grid1D {
    pub fn new(n_cells: usize, x_min: f64, x_max: f64) -> Result<Self> {
        if n_cells < 4 {
            return Err(Error::InvalidParameter(format!(
                "grid needs at least 4 cells, got {n_cells}"
            )));
        }
        if !(x_max > x_min) {
            return Err(Error::InvalidParameter(format!(
                "empty domain [{x_min}, {x_max}]"
            )));
        }
        Ok(Grid1D {
            n_cells,
            x_min,
            x_max,
        })
    }

    /// The periodic domain `[-1, 1]`.
    pub fn unit(n_cells: usize) -> Result<Self> {
        Grid1D::new(n_cells, -1.0, 1.0)
    }

    pub fn dx(&self) -> f64 {
        (self.x_max - self.x_min) / self.n_cells as f64
    }

    pub fn center(&self, i: usize) -> f64 {
        self.x_min + (i as f64 + 0.5) * self.dx()
    }
}

/// Cell states stored contiguously, `dim` values per cell.
#[derive(Clone, Debug, PartialEq)]
pub struct Field {
    dim: usize,
    data: Vec<f64>,
}

impl Field {
    pub fn zeros(n_cells: usize, dim: usize) -> Self {
        Field {
            dim,
            data: vec![0.0; n_cells * dim],
        }
    }

    pub fn from_cells(cells: &[Vec<f64>]) -> Result<Self> {
        let dim = cells.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(cells.len() * dim);
        for c in cells {
            if c.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: c.len(),
                });
            }
            data.extend_from_slice(c);
        }
        Ok(Field { dim, data })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n_cells(&self) -> usize {
        if self.dim == 0 {
            0
        } else {
            self.data.len() / self.dim
        }
    }

    pub fn cell(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn cell_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    /// Values of one conserved component across all cells.
    pub fn component(&self, k: usize) -> Vec<f64> {
        self.data.iter().skip(k).step_by(self.dim).copied().collect()
    }

    /// `Σ h_i dx`.
    pub fn mass(&self, dx: f64) -> f64 {
        self.component(0).iter().sum::<f64>() * dx
    }
}

/// How the friction source is integrated within a split step.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SourceMode {
    /// Backward Euler, solving `(I − dt M(h)) y = yⁿ` per cell.
    Implicit,
    /// Forward Euler, `U ← U + dt S(U)`.
    Explicit,
}

impl SourceMode {
    /// Implicit for the stiff moment system, explicit otherwise.
    pub fn default_for(family: ModelFamily) -> Self {
        match family {
            ModelFamily::Swme => SourceMode::Implicit,
            _ => SourceMode::Explicit,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolverConfig {
    pub cfl: f64,
    pub t_end: f64,
    pub source_mode: SourceMode,
    /// Times at which to record the state, in addition to the final state.
    pub snapshot_times: Vec<f64>,
}

impl SolverConfig {
    pub fn new(cfl: f64, t_end: f64, source_mode: SourceMode) -> Result<Self> {
        let c = SolverConfig {
            cfl,
            t_end,
            source_mode,
            snapshot_times: Vec::new(),
        };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.cfl > 0.0 && self.cfl <= 1.0) {
            return Err(Error::InvalidParameter("cfl must lie in (0,1]".into()));
        }
        if !(self.t_end >= 0.0 && self.t_end.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "t_end must be finite and non-negative, got {}",
                self.t_end
            )));
        }
        if self
            .snapshot_times
            .iter()
            .any(|&t| !(t >= 0.0 && t <= self.t_end))
        {
            return Err(Error::InvalidParameter(
                "snapshot times must lie in [0, t_end]".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Snapshot {
    pub time: f64,
    pub field: Field,
}

#[derive(Clone, Debug)]
pub struct SimulationResult {
    pub final_time: f64,
    pub field: Field,
    pub steps: usize,
    pub wall_time: Duration,
    pub dt_min: f64,
    pub dt_max: f64,
    pub dt_mean: f64,
    pub snapshots: Vec<Snapshot>,
}

fn failure(time: f64, step: usize, cell: usize, reason: impl Into<String>, state: &[f64]) -> Error {
    Error::SolverFailure {
        time,
        step,
        cell,
        reason: reason.into(),
        state: state.to_vec(),
    }
}

fn check_field(field: &Field, time: f64, step: usize) -> Result<()> {
    for i in 0..field.n_cells() {
        let c = field.cell(i);
        if c.iter().any(|v| !v.is_finite()) {
            return Err(failure(time, step, i, "non-finite state", c));
        }
        if c[0] <= 0.0 {
            return Err(failure(time, step, i, "non-positive height", c));
        }
    }
    Ok(())
}

/// Spectral radius of the system matrix in every cell.
pub fn wavespeeds(model: &Model, field: &Field) -> Result<Vec<f64>> {
    (0..field.n_cells())
        .map(|i| model.max_wavespeed(field.cell(i)))
        .collect()
}

/// Reusable buffers for the transport update.
struct Workspace {
    flux: Vec<f64>,
    update: Vec<f64>,
    fluct: Vec<f64>,
}

impl Workspace {
    fn new(n: usize, dim: usize) -> Self {
        Workspace {
            flux: vec![0.0; n * dim],
            update: vec![0.0; n * dim],
            fluct: vec![0.0; dim],
        }
    }
}

/// One transport step given precomputed cell wave speeds.
///
/// At each interface the fluctuation is `F(U_R) − F(U_L) − (∫₀¹ Q ds) ΔU`
/// along the straight path, i.e. the path integral of `A(U) ΔU`, and it is
/// split as `D^± = ½(fluct ± s ΔU)` with `s` the larger neighbouring speed.
fn transport_in_place(
    model: &Model,
    grid: &Grid1D,
    field: &mut Field,
    speeds: &[f64],
    dt: f64,
    ws: &mut Workspace,
) {
    let n = field.n_cells();
    let d = field.dim();
    for i in 0..n {
        model.flux_into(field.cell(i), &mut ws.flux[i * d..(i + 1) * d]);
    }
    ws.update.iter_mut().for_each(|v| *v = 0.0);
    let nonconservative = model.family() == ModelFamily::Swme;
    for left in 0..n {
        let right = (left + 1) % n;
        let ul = field.cell(left);
        let ur = field.cell(right);
        let s = speeds[left].max(speeds[right]);
        for k in 0..d {
            ws.fluct[k] = ws.flux[right * d + k] - ws.flux[left * d + k];
        }
        if nonconservative {
            let mut q = vec![0.0; d];
            model.path_nonconservative_into(ul, ur, &mut q);
            for k in 0..d {
                ws.fluct[k] -= q[k];
            }
        }
        for k in 0..d {
            let jump = ur[k] - ul[k];
            ws.update[left * d + k] += 0.5 * (ws.fluct[k] - s * jump);
            ws.update[right * d + k] += 0.5 * (ws.fluct[k] + s * jump);
        }
    }
    let r = dt / grid.dx();
    for (u, du) in field.data.iter_mut().zip(&ws.update) {
        *u -= r * du;
    }
}

/// One first-order path-conservative transport step.
pub fn transport_step(model: &Model, grid: &Grid1D, field: &Field, dt: f64) -> Result<Field> {
    check_dims(model, grid, field)?;
    let speeds = wavespeeds(model, field)?;
    let mut out = field.clone();
    let mut ws = Workspace::new(field.n_cells(), field.dim());
    transport_in_place(model, grid, &mut out, &speeds, dt, &mut ws);
    check_field(&out, dt, 1)?;
    Ok(out)
}

fn check_dims(model: &Model, grid: &Grid1D, field: &Field) -> Result<()> {
    if field.dim() != model.dim() {
        return Err(Error::DimensionMismatch {
            expected: model.dim(),
            got: field.dim(),
        });
    }
    if field.n_cells() != grid.n_cells {
        return Err(Error::LengthMismatch(field.n_cells(), grid.n_cells));
    }
    Ok(())
}

fn implicit_in_place(model: &Model, field: &mut Field, dt: f64) -> Result<()> {
    let d = field.dim();
    for i in 0..field.n_cells() {
        let cell = field.cell_mut(i);
        let m = model.source_jacobian(cell[0])?;
        if d == 2 {
            cell[1] /= 1.0 - dt * m[(1, 1)];
            continue;
        }
        let k = d - 1;
        let sys = DMatrix::from_fn(k, k, |r, c| {
            let id = if r == c { 1.0 } else { 0.0 };
            id - dt * m[(r + 1, c + 1)]
        });
        let rhs = DVector::from_column_slice(&cell[1..]);
        let y = sys
            .lu()
            .solve(&rhs)
            .ok_or(Error::Singular("implicit friction step"))?;
        cell[1..].copy_from_slice(y.as_slice());
    }
    Ok(())
}

fn explicit_in_place(model: &Model, field: &mut Field, dt: f64) {
    let d = field.dim();
    let mut s = vec![0.0; d];
    for i in 0..field.n_cells() {
        let cell = field.cell_mut(i);
        model.source_into(cell, &mut s);
        for (u, sv) in cell.iter_mut().zip(&s) {
            *u += dt * sv;
        }
    }
}

/// Backward Euler friction step; the height is unchanged.
pub fn source_step_implicit(model: &Model, field: &Field, dt: f64) -> Result<Field> {
    let mut out = field.clone();
    implicit_in_place(model, &mut out, dt)?;
    check_field(&out, dt, 1)?;
    Ok(out)
}

/// Forward Euler friction step.
pub fn source_step_explicit(model: &Model, field: &Field, dt: f64) -> Result<Field> {
    let mut out = field.clone();
    explicit_in_place(model, &mut out, dt);
    check_field(&out, dt, 1)?;
    Ok(out)
}

/// Advances `initial` to `config.t_end` with `dt = cfl dx / max speed`,
/// transport followed by friction in every step.
pub fn run(model: &Model, grid: &Grid1D, config: &SolverConfig, initial: &Field) -> Result<SimulationResult> {
    config.validate()?;
    check_dims(model, grid, initial)?;
    check_field(initial, 0.0, 0)?;
    let start = Instant::now();
    let mut field = initial.clone();
    let mut ws = Workspace::new(field.n_cells(), field.dim());
    let mut pending: Vec<f64> = config.snapshot_times.clone();
    pending.sort_by(f64::total_cmp);
    pending.dedup();
    let mut snapshots = Vec::new();
    let mut t = 0.0;
    let mut steps = 0usize;
    let (mut dt_min, mut dt_max, mut dt_sum) = (f64::INFINITY, 0.0f64, 0.0);

    let take_snapshots = |t: f64, field: &Field, pending: &mut Vec<f64>, snaps: &mut Vec<Snapshot>| {
        while pending.first().is_some_and(|&ts| ts <= t) {
            let ts = pending.remove(0);
            snaps.push(Snapshot {
                time: ts,
                field: field.clone(),
            });
        }
    };
    take_snapshots(t, &field, &mut pending, &mut snapshots);

    while t < config.t_end {
        let speeds: Vec<f64> = (0..field.n_cells())
            .map(|i| {
                model
                    .max_wavespeed(field.cell(i))
                    .map_err(|e| failure(t, steps, i, e.to_string(), field.cell(i)))
            })
            .collect::<Result<_>>()?;
        let smax = speeds.iter().copied().fold(0.0, f64::max);
        if !(smax > 0.0 && smax.is_finite()) {
            return Err(failure(t, steps, 0, format!("invalid wave speed {smax}"), field.cell(0)));
        }
        let mut dt = config.cfl * grid.dx() / smax;
        let mut target = config.t_end;
        if let Some(&ts) = pending.first() {
            target = target.min(ts);
        }
        let clipped = t + dt >= target;
        if clipped {
            dt = target - t;
        }
        transport_in_place(model, grid, &mut field, &speeds, dt, &mut ws);
        check_field(&field, t + dt, steps + 1)?;
        match config.source_mode {
            SourceMode::Implicit => implicit_in_place(model, &mut field, dt)
                .map_err(|e| failure(t + dt, steps + 1, 0, e.to_string(), field.cell(0)))?,
            SourceMode::Explicit => explicit_in_place(model, &mut field, dt),
        }
        check_field(&field, t + dt, steps + 1)?;
        t = if clipped { target } else { t + dt };
        steps += 1;
        dt_min = dt_min.min(dt);
        dt_max = dt_max.max(dt);
        dt_sum += dt;
        take_snapshots(t, &field, &mut pending, &mut snapshots);
    }

    Ok(SimulationResult {
        final_time: t,
        field,
        steps,
        wall_time: start.elapsed(),
        dt_min: if steps == 0 { 0.0 } else { dt_min },
        dt_max,
        dt_mean: if steps == 0 { 0.0 } else { dt_sum / steps as f64 },
        snapshots,
    })
}
