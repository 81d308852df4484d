//! Direct numerical evaluation of diagram integrals on the imaginary-time
//! circle.
//!
//! The propagator depends on `|τ − τ'|`, so the integrand has kinks on every
//! coincidence hyperplane `τ_i = τ_j`. Splitting `[0, β]ⁿ` into the `n!`
//! ordered sub-domains `τ_{i1} <= τ_{i2} <= … <= τ_{in}` leaves a smooth
//! integrand on each piece, which is then integrated by nested composite
//! Gauss–Legendre rules with limits `[τ_previous, β]`.
//!
//! [`Route::TranslationReduced`] additionally pins the last vertex at `τ = 0`
//! (translation invariance on the circle) and multiplies by `β`, trading one
//! dimension for `(n−1)!` instead of `n!` pieces.

use crate::error::{positive, Error, Result};
use crate::exec::Execution;
use crate::model::{ModelParams, Propagator};
use crate::oracles::diagrams::{diagrams_of_order, DiagramSpec};

const MAX_VERTICES: usize = 6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Route {
    TranslationReduced,
    FullTorus,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadSpec {
    pub nodes_per_panel: usize,
    pub panels: usize,
    pub max_panels: usize,
    /// Relative tolerance on the estimated integration error.
    pub tolerance: f64,
    pub route: Route,
    pub execution: Execution,
}

impl QuadSpec {
    /// Defaults: 32 nodes × 4 panels per dimension, `1e−9` relative for
    /// second and third order, `1e−5` for fourth.
    pub fn for_order(order: usize) -> Self {
        QuadSpec {
            nodes_per_panel: 32,
            panels: 4,
            max_panels: 64,
            tolerance: if order >= 4 { 1e-5 } else { 1e-9 },
            route: Route::TranslationReduced,
            execution: Execution::default(),
        }
    }

    pub fn with_execution(self, execution: Execution) -> Self {
        QuadSpec { execution, ..self }
    }

    fn validate(&self) -> Result<()> {
        if self.nodes_per_panel < 2 || self.panels == 0 || self.max_panels < self.panels {
            return Err(Error::InvalidRequest(format!("bad quadrature settings {self:?}")));
        }
        positive("tolerance", self.tolerance)?;
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult {
    /// Contribution to the free energy, `(−1)^(n+1) (1/β) (λⁿ/n!) N ∫…∫ Π G`.
    pub value: f64,
    /// The bare integral `∫_{[0,β]ⁿ} Π G^power`.
    pub integral: f64,
    /// Absolute error estimate of `integral`.
    pub error_estimate: f64,
    pub panels: usize,
}

/// Gauss–Legendre nodes and weights on `[−1, 1]` by Newton iteration on
/// the three-term recurrence.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 1 { x } else { p1 };
            let pn1 = if n == 1 { 1.0 } else { p0 };
            dp = nf * (x * pn - pn1) / (x * x - 1.0);
            let dx = pn / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

/// Composite rule on `[0, 1]` with `panels` equal panels; weights sum to 1.
fn unit_rule(panels: usize, nodes: usize) -> (Vec<f64>, Vec<f64>) {
    let (x, w) = gauss_legendre(nodes);
    let h = 1.0 / panels as f64;
    let mut t = Vec::with_capacity(panels * nodes);
    let mut wt = Vec::with_capacity(panels * nodes);
    for p in 0..panels {
        let a = p as f64 * h;
        for (xi, wi) in x.iter().zip(&w) {
            t.push(a + 0.5 * h * (xi + 1.0));
            wt.push(0.5 * h * wi);
        }
    }
    (t, wt)
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    fn go(prefix: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Vec<usize>>) {
        if prefix.len() == used.len() {
            out.push(prefix.clone());
            return;
        }
        for i in 0..used.len() {
            if !used[i] {
                used[i] = true;
                prefix.push(i);
                go(prefix, used, out);
                prefix.pop();
                used[i] = false;
            }
        }
    }
    let mut out = Vec::new();
    go(&mut Vec::new(), &mut vec![false; n], &mut out);
    out
}

struct Integrand<'a> {
    g: &'a Propagator,
    edges: Vec<(usize, usize, i32)>,
}

impl Integrand<'_> {
    #[inline]
    fn eval(&self, times: &[f64]) -> f64 {
        self.edges.iter().fold(1.0, |acc, &(a, b, p)| {
            acc * self.g.at_separation((times[a] - times[b]).abs()).powi(p)
        })
    }
}

struct Nest<'a> {
    f: &'a Integrand<'a>,
    beta: f64,
    t: &'a [f64],
    w: &'a [f64],
    /// slot → vertex for the current ordered sub-domain
    perm: &'a [usize],
    order: usize,
}

impl Nest<'_> {
    /// Integrates slots `level..` with `τ_slot(level) ∈ [lo, β]`.
    fn integrate(&self, level: usize, lo: f64, times: &mut [f64; MAX_VERTICES]) -> f64 {
        if level == self.perm.len() {
            return self.f.eval(&times[..self.order]);
        }
        let len = self.beta - lo;
        let vertex = self.perm[level];
        let mut acc = 0.0;
        for (ti, wi) in self.t.iter().zip(self.w) {
            let tau = lo + len * ti;
            times[vertex] = tau;
            acc += wi * self.integrate(level + 1, tau, times);
        }
        acc * len
    }
}

/// `∫_{[0,β]ⁿ} Π_edges G(|τ_a − τ_b|)^power` with a fixed composite rule.
pub fn diagram_integral(
    g: &Propagator,
    d: &DiagramSpec,
    route: Route,
    panels: usize,
    nodes: usize,
    execution: Execution,
) -> f64 {
    assert!(d.order <= MAX_VERTICES, "at most {MAX_VERTICES} vertices supported");
    let f = Integrand {
        g,
        edges: d.edges.iter().map(|e| (e.a, e.b, e.power as i32)).collect(),
    };
    let (t, w) = unit_rule(panels, nodes);
    let beta = g.beta();
    let free: Vec<usize> = match route {
        Route::TranslationReduced => (0..d.order - 1).collect(),
        Route::FullTorus => (0..d.order).collect(),
    };
    let perms: Vec<Vec<usize>> = permutations(free.len())
        .into_iter()
        .map(|p| p.into_iter().map(|i| free[i]).collect())
        .collect();

    // One task per (ordered sub-domain, outermost node).
    let k = t.len();
    let total = execution.sum_range(perms.len() * k, |job| {
        let perm = &perms[job / k];
        let i = job % k;
        let nest = Nest {
            f: &f,
            beta,
            t: &t,
            w: &w,
            perm,
            order: d.order,
        };
        let mut times = [0.0; MAX_VERTICES];
        let tau = beta * t[i];
        times[perm[0]] = tau;
        w[i] * beta * nest.integrate(1, tau, &mut times)
    });
    match route {
        Route::TranslationReduced => beta * total,
        Route::FullTorus => total,
    }
}

/// Integral with error control: compares `n/2` against `n` nodes per panel
/// and doubles the panel count until the relative difference is below
/// `qspec.tolerance`.
pub fn integrate_with_refinement(g: &Propagator, d: &DiagramSpec, qspec: &QuadSpec) -> Result<(f64, f64, usize)> {
    qspec.validate()?;
    let coarse_nodes = (qspec.nodes_per_panel / 2).max(1);
    let mut panels = qspec.panels;
    loop {
        let coarse = diagram_integral(g, d, qspec.route, panels, coarse_nodes, qspec.execution);
        let fine = diagram_integral(g, d, qspec.route, panels, qspec.nodes_per_panel, qspec.execution);
        let err = (fine - coarse).abs();
        if err <= qspec.tolerance * fine.abs() {
            return Ok((fine, err, panels));
        }
        if panels * 2 > qspec.max_panels {
            return Err(Error::QuadratureNonConvergence {
                estimate: fine,
                error_bound: err,
                tolerance: qspec.tolerance,
            });
        }
        panels *= 2;
    }
}

/// Free-energy contribution of one diagram.
pub fn quad_diagram(params: &ModelParams, omega_big: f64, d: &DiagramSpec, qspec: &QuadSpec) -> Result<QuadResult> {
    params.validate()?;
    d.validate()?;
    let g = Propagator::new(omega_big, params.m, params.beta)?;
    let (integral, err, panels) = integrate_with_refinement(&g, d, qspec)?;
    let n = d.order as i32;
    let n_fact: f64 = (1..=d.order).map(|k| k as f64).product();
    let scale = d.sign() / params.beta * params.lambda.powi(n) / n_fact * d.symmetry_factor as f64;
    Ok(QuadResult {
        value: scale * integral,
        integral,
        error_estimate: err,
        panels,
    })
}

/// Sum over all built-in diagrams of the given order (2, 3 or 4).
pub fn quad_correction(params: &ModelParams, omega_big: f64, order: usize, qspec: &QuadSpec) -> Result<f64> {
    let diagrams = diagrams_of_order(order);
    if diagrams.is_empty() {
        return Err(Error::InvalidRequest(format!("no built-in diagrams of order {order}")));
    }
    diagrams
        .iter()
        .map(|d| quad_diagram(params, omega_big, d, qspec).map(|r| r.value))
        .sum()
}
