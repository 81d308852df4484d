//! Reproduction runs (tables, figure series, points, sweeps, oracle checks)
//! and their output rows.
//!
//! Rows are computed independently, possibly in parallel, and always
//! returned in grid order.

pub mod format;
pub mod reference;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::model::{rescale, unrescale, ModelParams, RescaledParams};
use crate::oracles::diagrams::diagrams_of_order;
use crate::oracles::quadrature::{quad_correction, QuadSpec};
use crate::oracles::spectrum::{exact_free_energy_with, ExactOptions};
use crate::series::{c4_literature, series_at, Order};
use crate::variational::{solve_gap, DEFAULT_GAP_TOL};

pub use format::{render, OutputFormat};
pub use reference::{reference, Printed};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Command {
    Table1,
    Table2,
    Fig1,
    Fig2,
    Fig3,
    Point,
    Sweep,
    OracleCheck,
}

/// A grid point in either parametrization. Rescaled points carry the `λ`
/// that fixes the physical scale.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum PointSpec {
    Physical(ModelParams),
    Rescaled { z: f64, t_reduced: f64, lambda: f64 },
}

impl PointSpec {
    pub fn resolve(&self) -> Result<ModelParams> {
        match *self {
            PointSpec::Physical(p) => ModelParams::new(p.m, p.omega, p.lambda, p.beta),
            PointSpec::Rescaled { z, t_reduced, lambda } => {
                unrescale(&RescaledParams::new(z, t_reduced)?, lambda)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Relative residual of the gap equation.
    pub gap: f64,
    /// Absolute convergence of the exact free energy.
    pub exact: f64,
    /// Relative closed-form vs quadrature agreement; `None` uses 1e−6 for
    /// second and third order and 1e−4 for fourth.
    pub check: Option<f64>,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            gap: DEFAULT_GAP_TOL,
            exact: 1e-10,
            check: None,
        }
    }
}

impl Tolerances {
    pub fn check_for(&self, order: usize) -> f64 {
        self.check.unwrap_or(if order >= 4 { 1e-4 } else { 1e-6 })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunRequest {
    pub command: Command,
    /// Used by `Point`, `Sweep` and `OracleCheck`; the table and figure
    /// commands have fixed grids.
    pub grid: Vec<PointSpec>,
    pub max_order: Order,
    pub format: OutputFormat,
    pub quad: bool,
    pub exact: bool,
    pub tolerances: Tolerances,
    /// Points per figure series.
    pub grid_resolution: usize,
    pub execution: Execution,
}

impl RunRequest {
    pub fn new(command: Command) -> Self {
        RunRequest {
            command,
            grid: Vec::new(),
            max_order: Order::Four,
            format: OutputFormat::Csv,
            quad: command == Command::OracleCheck,
            exact: false,
            tolerances: Tolerances::default(),
            grid_resolution: 20,
            execution: Execution::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self.command {
            Command::Point | Command::OracleCheck if self.grid.len() != 1 => Err(Error::InvalidRequest(
                format!("{:?} takes exactly one point, got {}", self.command, self.grid.len()),
            )),
            Command::Sweep if self.grid.is_empty() => {
                Err(Error::InvalidRequest("sweep grid is empty".into()))
            }
            Command::Fig1 | Command::Fig2 | Command::Fig3 if self.grid_resolution < 2 => Err(
                Error::InvalidRequest("figure grid resolution must be at least 2".into()),
            ),
            Command::OracleCheck if self.max_order < Order::Two => Err(Error::InvalidRequest(
                "oracle check needs order 2 or higher".into(),
            )),
            _ => {
                for t in [self.tolerances.gap, self.tolerances.exact] {
                    crate::error::positive("tol", t)?;
                }
                if let Some(t) = self.tolerances.check {
                    crate::error::positive("tol", t)?;
                }
                for p in &self.grid {
                    p.resolve()?;
                }
                Ok(())
            }
        }
    }

    fn row_options(&self) -> RowOptions {
        RowOptions {
            max_order: self.max_order,
            exact: self.exact,
            quad: self.quad,
            tolerances: self.tolerances,
            execution: self.execution,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Converged,
    /// A value is missing or only a partial estimate; see `flags`.
    Degraded,
    /// An oracle disagrees with the closed form beyond tolerance.
    Mismatch,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Converged => "converged",
            Status::Degraded => "degraded",
            Status::Mismatch => "mismatch",
        }
    }
}

/// One output line. `None` means "not requested" unless `flags` says
/// otherwise.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResultRow {
    pub m: f64,
    pub omega: f64,
    pub lambda: f64,
    pub beta: f64,
    pub temperature: f64,
    /// Rescaled form; only defined for `m = 1`.
    pub z: Option<f64>,
    pub t_reduced: Option<f64>,
    pub omega_big: Option<f64>,
    pub f0: Option<f64>,
    pub f2: Option<f64>,
    pub f3: Option<f64>,
    pub f4: Option<f64>,
    /// F3 plus the commonly quoted fourth-order bracket.
    pub f4_literature: Option<f64>,
    pub exact: Option<f64>,
    /// Change of the exact value across the last basis doubling.
    pub exact_bound: Option<f64>,
    pub c2: Option<f64>,
    pub c3: Option<f64>,
    pub c4: Option<f64>,
    pub c2_quad: Option<f64>,
    pub c3_quad: Option<f64>,
    pub c4_quad: Option<f64>,
    pub c2_gap: Option<f64>,
    pub c3_gap: Option<f64>,
    pub c4_gap: Option<f64>,
    /// Relative distance of the highest partial sum from the exact value.
    pub exact_gap: Option<f64>,
    pub ref_f0: Option<f64>,
    pub ref_f2: Option<f64>,
    pub ref_f3: Option<f64>,
    pub ref_f4: Option<f64>,
    pub ref_exact: Option<f64>,
    pub ref_f1_kr: Option<f64>,
    pub ref_f3_kr: Option<f64>,
    pub status: Status,
    pub flags: Vec<String>,
}

impl ResultRow {
    fn empty(p: &ModelParams) -> Self {
        let rp = rescale(p).ok();
        ResultRow {
            m: p.m,
            omega: p.omega,
            lambda: p.lambda,
            beta: p.beta,
            temperature: p.temperature(),
            z: rp.map(|r| r.z),
            t_reduced: rp.map(|r| r.t_reduced),
            omega_big: None,
            f0: None,
            f2: None,
            f3: None,
            f4: None,
            f4_literature: None,
            exact: None,
            exact_bound: None,
            c2: None,
            c3: None,
            c4: None,
            c2_quad: None,
            c3_quad: None,
            c4_quad: None,
            c2_gap: None,
            c3_gap: None,
            c4_gap: None,
            exact_gap: None,
            ref_f0: None,
            ref_f2: None,
            ref_f3: None,
            ref_f4: None,
            ref_exact: None,
            ref_f1_kr: None,
            ref_f3_kr: None,
            status: Status::Converged,
            flags: Vec::new(),
        }
    }

    pub fn params(&self) -> ModelParams {
        ModelParams {
            m: self.m,
            omega: self.omega,
            lambda: self.lambda,
            beta: self.beta,
        }
    }

    /// Highest partial sum present.
    pub fn best(&self) -> Option<f64> {
        self.f4.or(self.f3).or(self.f2).or(self.f0)
    }

    fn degrade(&mut self, flag: String) {
        if self.status == Status::Converged {
            self.status = Status::Degraded;
        }
        self.flags.push(flag);
    }

    fn mismatch(&mut self, flag: String) {
        self.status = Status::Mismatch;
        self.flags.push(flag);
    }

    /// Checks that every populated number is finite and that the two
    /// parametrizations agree.
    pub fn check_invariants(&self) -> Result<()> {
        for (name, v) in format::numeric_fields(self) {
            if let Some(v) = v {
                if !v.is_finite() {
                    return Err(Error::Output(format!("field {name} is not finite ({v})")));
                }
            }
        }
        if let (Some(z), Some(t)) = (self.z, self.t_reduced) {
            let back = unrescale(&RescaledParams::new(z, t)?, self.lambda)?;
            let close = |a: f64, b: f64| (a - b).abs() <= 1e-12 * a.abs().max(b.abs()).max(1e-300);
            if !(close(back.omega, self.omega) && close(back.beta, self.beta)) {
                return Err(Error::Output("rescaled and physical parameters disagree".into()));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RowOptions {
    pub max_order: Order,
    pub exact: bool,
    pub quad: bool,
    pub tolerances: Tolerances,
    pub execution: Execution,
}

impl Default for RowOptions {
    fn default() -> Self {
        RowOptions {
            max_order: Order::Four,
            exact: false,
            quad: false,
            tolerances: Tolerances::default(),
            execution: Execution::default(),
        }
    }
}

fn rel_gap(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

/// Evaluates one point. Numerical failures degrade the row instead of
/// failing; invalid parameters are an error.
pub fn compute_row(params: &ModelParams, opts: &RowOptions) -> Result<ResultRow> {
    let p = ModelParams::new(params.m, params.omega, params.lambda, params.beta)?;
    let mut row = ResultRow::empty(&p);

    let omega_big = match solve_gap(&p, opts.tolerances.gap) {
        Ok(sol) => {
            let s = series_at(&p, sol.omega_big, sol.f0, opts.max_order)?;
            row.omega_big = Some(s.omega_big);
            row.f0 = Some(s.f0);
            row.f2 = s.f2;
            row.f3 = s.f3;
            row.f4 = s.f4;
            if opts.quad {
                row.c2 = s.c2;
                row.c3 = s.c3;
                row.c4 = s.c4;
            }
            Some(sol.omega_big)
        }
        Err(e) if e.is_numerical() => {
            row.degrade(format!("series: {e}"));
            None
        }
        Err(e) => return Err(e),
    };

    if opts.exact {
        let eo = ExactOptions {
            tolerance: opts.tolerances.exact,
            basis_frequency: omega_big,
            execution: opts.execution,
            ..ExactOptions::default()
        };
        match exact_free_energy_with(&p, &eo) {
            Ok(r) => {
                row.exact = Some(r.free_energy);
                row.exact_bound = Some(r.last_change);
                row.exact_gap = row.best().map(|b| rel_gap(b, r.free_energy));
            }
            Err(e @ Error::BasisCapExceeded { partial, .. }) => {
                row.exact = Some(partial).filter(|v| v.is_finite());
                row.degrade(format!("exact: {e}"));
            }
            Err(e) if e.is_numerical() => row.degrade(format!("exact: {e}")),
            Err(e) => return Err(e),
        }
    }

    if let (true, Some(omega_big)) = (opts.quad, omega_big) {
        for order in 2..=opts.max_order.as_u8() as usize {
            let spec = QuadSpec::for_order(order).with_execution(opts.execution);
            let closed = match order {
                2 => row.c2,
                3 => row.c3,
                _ => row.c4,
            };
            let (quad_slot, gap_slot) = match order {
                2 => (&mut row.c2_quad, &mut row.c2_gap),
                3 => (&mut row.c3_quad, &mut row.c3_gap),
                _ => (&mut row.c4_quad, &mut row.c4_gap),
            };
            match quad_correction(&p, omega_big, order, &spec) {
                Ok(q) => {
                    *quad_slot = Some(q);
                    let gap = closed.map(|c| rel_gap(c, q));
                    *gap_slot = gap;
                    let tol = opts.tolerances.check_for(order);
                    if let Some(g) = gap.filter(|&g| !(g <= tol)) {
                        row.mismatch(format!("c{order}: relative gap {g:.3e} exceeds {tol:e}"));
                    }
                }
                Err(e) if e.is_numerical() => row.degrade(format!("c{order}_quad: {e}")),
                Err(e) => return Err(e),
            }
            for d in diagrams_of_order(order) {
                if let Some(note) = &d.correction {
                    row.flags.push(format!("diagram {}: {note}", d.name));
                }
            }
        }
    }
    Ok(row)
}

fn compute_rows(points: &[ModelParams], opts: &RowOptions) -> Result<Vec<ResultRow>> {
    opts.execution
        .map_slice(points, |p| compute_row(p, opts))
        .into_iter()
        .collect()
}

fn resolve_all(grid: &[PointSpec]) -> Result<Vec<ModelParams>> {
    grid.iter().map(PointSpec::resolve).collect()
}

/// Fixed grid at `z = 10`, `λ = 1`, with printed reference columns.
pub fn run_table1(opts: &RowOptions) -> Result<Vec<ResultRow>> {
    let table = &reference().table1;
    let points = table
        .rows
        .iter()
        .map(|r| unrescale(&RescaledParams::new(table.z, r.t)?, 1.0))
        .collect::<Result<Vec<_>>>()?;
    let mut rows = compute_rows(&points, opts)?;
    for (row, r) in rows.iter_mut().zip(&table.rows) {
        row.ref_f0 = Some(r.f0.value);
        row.ref_f2 = Some(r.f2.value);
        row.ref_f3 = Some(r.f3.value);
        row.ref_f4 = Some(r.f4.value);
        row.ref_exact = Some(r.f_accu.value);
    }
    Ok(rows)
}

/// Five `(λ, β)` points at `m = ω = 1`, up to third order, with printed
/// reference and cumulant-expansion columns.
pub fn run_table2(opts: &RowOptions) -> Result<Vec<ResultRow>> {
    let table = &reference().table2;
    let points = table
        .rows
        .iter()
        .map(|r| ModelParams::new(1.0, 1.0, r.lambda, r.beta))
        .collect::<Result<Vec<_>>>()?;
    let opts = RowOptions {
        max_order: opts.max_order.min(Order::Three),
        ..*opts
    };
    let mut rows = compute_rows(&points, &opts)?;
    for (row, r) in rows.iter_mut().zip(&table.rows) {
        row.ref_f0 = Some(r.f0.value);
        row.ref_f2 = Some(r.f2.value);
        row.ref_f3 = Some(r.f3.value);
        row.ref_exact = Some(r.f_exa.value);
        row.ref_f1_kr = Some(r.f1_kr.value);
        row.ref_f3_kr = Some(r.f3_kr.value);
    }
    Ok(rows)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Figure {
    /// `m = ω = λ = 1`, `T ∈ (0, 1]`: all orders against the exact curve.
    LowTemperature,
    /// `λ = 1`, `T ∈ [1, 50]`, `z ∈ {0.2, 1, 10, 30, 50}`: F0 and F4.
    CouplingDependence,
    /// Pure quartic (`ω = 0`), `λ = 1`, `β ∈ [0.5, 50]`: all orders and exact.
    PureQuartic,
}

pub const FIG2_Z: [f64; 5] = [0.2, 1.0, 10.0, 30.0, 50.0];

fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    (0..n).map(|k| a + (b - a) * k as f64 / (n - 1) as f64).collect()
}

/// Figure data series; `resolution` points per curve.
pub fn run_figure(which: Figure, resolution: usize, opts: &RowOptions) -> Result<Vec<ResultRow>> {
    if resolution < 2 {
        return Err(Error::InvalidRequest("figure grid resolution must be at least 2".into()));
    }
    let opts = RowOptions {
        max_order: Order::Four,
        quad: false,
        ..*opts
    };
    match which {
        Figure::LowTemperature => {
            let points = (1..=resolution)
                .map(|k| ModelParams::from_temperature(1.0, 1.0, 1.0, k as f64 / resolution as f64))
                .collect::<Result<Vec<_>>>()?;
            let mut rows = compute_rows(&points, &RowOptions { exact: true, ..opts })?;
            for row in &mut rows {
                if let (Some(f3), Some(omega_big)) = (row.f3, row.omega_big) {
                    let c = c4_literature(&row.params(), omega_big)?;
                    if c.is_finite() {
                        row.f4_literature = Some(f3 + c);
                    } else {
                        row.flags.push("f4_literature: overflow".into());
                    }
                }
            }
            Ok(rows)
        }
        Figure::CouplingDependence => {
            let points = FIG2_Z
                .iter()
                .flat_map(|&z| {
                    linspace(1.0, 50.0, resolution)
                        .into_iter()
                        .map(move |t| unrescale(&RescaledParams::new(z, t)?, 1.0))
                })
                .collect::<Result<Vec<_>>>()?;
            let mut rows = compute_rows(&points, &RowOptions { exact: false, ..opts })?;
            for row in &mut rows {
                row.f2 = None;
                row.f3 = None;
            }
            Ok(rows)
        }
        Figure::PureQuartic => {
            let points = (0..resolution)
                .map(|k| {
                    let beta = 0.5 * 100f64.powf(k as f64 / (resolution - 1) as f64);
                    ModelParams::new(1.0, 0.0, 1.0, beta)
                })
                .collect::<Result<Vec<_>>>()?;
            compute_rows(&points, &RowOptions { exact: true, ..opts })
        }
    }
}

/// Single point with the requested oracles.
pub fn run_point(point: &PointSpec, opts: &RowOptions) -> Result<ResultRow> {
    compute_row(&point.resolve()?, opts)
}

pub fn run_sweep(grid: &[PointSpec], opts: &RowOptions) -> Result<Vec<ResultRow>> {
    if grid.is_empty() {
        return Err(Error::InvalidRequest("sweep grid is empty".into()));
    }
    compute_rows(&resolve_all(grid)?, opts)
}

/// Closed forms against diagram quadrature at one point; the row's status
/// is `Mismatch` when any relative gap exceeds its tolerance.
pub fn run_oracle_check(point: &PointSpec, opts: &RowOptions) -> Result<ResultRow> {
    if opts.max_order < Order::Two {
        return Err(Error::InvalidRequest("oracle check needs order 2 or higher".into()));
    }
    compute_row(&point.resolve()?, &RowOptions { quad: true, ..*opts })
}

/// Cartesian product of physical parameter lists, in `m, ω, λ, β` order.
pub fn physical_grid(m: &[f64], omega: &[f64], lambda: &[f64], beta: &[f64]) -> Vec<PointSpec> {
    let mut out = Vec::new();
    for &m in m {
        for &omega in omega {
            for &lambda in lambda {
                for &beta in beta {
                    out.push(PointSpec::Physical(ModelParams { m, omega, lambda, beta }));
                }
            }
        }
    }
    out
}

/// Cartesian product of rescaled parameter lists, in `λ, z, T` order.
pub fn rescaled_grid(lambda: &[f64], z: &[f64], t_reduced: &[f64]) -> Vec<PointSpec> {
    let mut out = Vec::new();
    for &lambda in lambda {
        for &z in z {
            for &t_reduced in t_reduced {
                out.push(PointSpec::Rescaled { z, t_reduced, lambda });
            }
        }
    }
    out
}

/// Dispatches a request.
pub fn run(req: &RunRequest) -> Result<Vec<ResultRow>> {
    req.validate()?;
    let opts = req.row_options();
    let res = req.grid_resolution;
    let rows = match req.command {
        Command::Table1 => run_table1(&opts)?,
        Command::Table2 => run_table2(&opts)?,
        Command::Fig1 => run_figure(Figure::LowTemperature, res, &opts)?,
        Command::Fig2 => run_figure(Figure::CouplingDependence, res, &opts)?,
        Command::Fig3 => run_figure(Figure::PureQuartic, res, &opts)?,
        Command::Point => vec![run_point(&req.grid[0], &opts)?],
        Command::Sweep => run_sweep(&req.grid, &opts)?,
        Command::OracleCheck => vec![run_oracle_check(&req.grid[0], &opts)?],
    };
    for row in &rows {
        row.check_invariants()?;
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fast() -> RowOptions {
        RowOptions {
            execution: Execution::Sequential,
            ..RowOptions::default()
        }
    }

    #[test]
    fn point_matches_printed_third_order() {
        let p = PointSpec::Physical(ModelParams { m: 1.0, omega: 1.0, lambda: 1.0, beta: 5.0 });
        let row = run_point(&p, &RowOptions { max_order: Order::Three, ..fast() }).unwrap();
        assert!((row.f3.unwrap() - 0.807364).abs() < 5e-6);
        assert_eq!(row.f4, None);
        assert_eq!(row.status, Status::Converged);
    }

    #[test]
    fn zero_coupling_is_rejected() {
        let p = PointSpec::Physical(ModelParams { m: 1.0, omega: 1.0, lambda: 0.0, beta: 5.0 });
        assert!(matches!(run_point(&p, &fast()), Err(Error::InvalidParameter { .. })));
    }

    #[test]
    fn table_rows_carry_both_parametrizations() {
        let rows = run_table1(&fast()).unwrap();
        assert_eq!(rows.len(), 8);
        for (row, t) in rows.iter().zip([1.0, 2.0, 3.0, 4.0, 5.0, 10.0, 20.0, 30.0]) {
            assert!((row.z.unwrap() - 10.0).abs() < 1e-12);
            assert!((row.t_reduced.unwrap() - t).abs() < 1e-12);
            row.check_invariants().unwrap();
        }
    }

    #[test]
    fn table2_stops_at_third_order() {
        let rows = run_table2(&fast()).unwrap();
        assert!(rows.iter().all(|r| r.f4.is_none() && r.ref_f3_kr.is_some()));
        assert_eq!(rows[0].ref_f3_kr, Some(0.803882));
    }

    #[test]
    fn grids_are_cartesian_and_ordered() {
        let g = physical_grid(&[1.0], &[1.0, 2.0], &[0.5], &[1.0, 3.0]);
        assert_eq!(g.len(), 4);
        assert_eq!(g[1], PointSpec::Physical(ModelParams { m: 1.0, omega: 1.0, lambda: 0.5, beta: 3.0 }));
        assert_eq!(rescaled_grid(&[1.0], &[1.0, 2.0], &[1.0, 2.0, 3.0]).len(), 6);
    }

    #[test]
    fn request_validation() {
        let mut req = RunRequest::new(Command::Point);
        assert!(req.validate().is_err());
        req.grid.push(PointSpec::Rescaled { z: 10.0, t_reduced: 1.0, lambda: 1.0 });
        req.validate().unwrap();
        req.grid.push(req.grid[0]);
        assert!(req.validate().is_err());
        let mut fig = RunRequest::new(Command::Fig2);
        fig.grid_resolution = 1;
        assert!(fig.validate().is_err());
    }

    #[test]
    fn exact_column_is_reported_with_bound() {
        let p = PointSpec::Physical(ModelParams { m: 1.0, omega: 1.0, lambda: 1.0, beta: 5.0 });
        let row = run_point(&p, &RowOptions { exact: true, ..fast() }).unwrap();
        assert!((row.exact.unwrap() - 0.803758).abs() < 1e-5);
        assert!(row.exact_bound.unwrap() < 1e-10);
    }
}
