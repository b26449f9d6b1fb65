//! Explicit L1 time stepping of the concentration-dependent sub-diffusion
//! equation `D^α c = ∇·(D̃(c) ∇c)` on a rectangular grid with zero Dirichlet edges.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fraccalc::{gamma_fn, history_term, l1_coefficients, FracOrder};

/// Uniform node-centred grid. Node (i, j) sits at (x0 + i·hx, y0 + j·hy) and is
/// stored at flat index `j * nx + i`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid2D {
    pub nx: usize,
    pub ny: usize,
    pub hx: f64,
    pub hy: f64,
    pub origin: (f64, f64),
}

impl Grid2D {
    pub fn new(nx: usize, ny: usize, hx: f64, hy: f64, origin: (f64, f64)) -> Result<Self> {
        let grid = Grid2D { nx, ny, hx, hy, origin };
        grid.validate()?;
        Ok(grid)
    }

    /// n×n nodes covering [0, 1]².
    pub fn unit_square(n: usize) -> Result<Self> {
        if n < 3 {
            return Err(Error::Config(format!("grid needs at least 3 nodes per side, got {n}")));
        }
        let h = 1.0 / (n - 1) as f64;
        Grid2D::new(n, n, h, h, (0.0, 0.0))
    }

    pub fn validate(&self) -> Result<()> {
        if self.nx < 3 || self.ny < 3 {
            return Err(Error::Config(format!(
                "grid needs at least 3 nodes per side, got {}x{}",
                self.nx, self.ny
            )));
        }
        let ok = |h: f64| h.is_finite() && h > 0.0;
        if !ok(self.hx) || !ok(self.hy) || !self.origin.0.is_finite() || !self.origin.1.is_finite() {
            return Err(Error::Config(format!(
                "grid spacings must be positive and finite, got hx={}, hy={}",
                self.hx, self.hy
            )));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn index(&self, i: usize, j: usize) -> usize {
        j * self.nx + i
    }

    pub fn x(&self, i: usize) -> f64 {
        self.origin.0 + i as f64 * self.hx
    }

    pub fn y(&self, j: usize) -> f64 {
        self.origin.1 + j as f64 * self.hy
    }

    pub fn is_boundary(&self, i: usize, j: usize) -> bool {
        i == 0 || j == 0 || i == self.nx - 1 || j == self.ny - 1
    }

    /// Evaluates `f(x, y)` at every node.
    pub fn sample(&self, f: impl Fn(f64, f64) -> f64) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.len());
        for j in 0..self.ny {
            for i in 0..self.nx {
                out.push(f(self.x(i), self.y(j)));
            }
        }
        out
    }
}

/// Concentration-dependent diffusion coefficient D̃(c).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum DiffusionSpec {
    Constant { value: f64 },
    /// D̃(c) = Σ coeffs[n] cⁿ.
    Polynomial { coeffs: Vec<f64> },
    /// Piecewise-linear interpolation through (c, d) knots, held constant
    /// outside the knot range.
    Table { c: Vec<f64>, d: Vec<f64> },
}

impl DiffusionSpec {
    /// The benchmark coefficient 0.05 (1 + c).
    pub fn benchmark() -> Self {
        DiffusionSpec::Polynomial { coeffs: vec![0.05, 0.05] }
    }

    pub fn validate(&self) -> Result<()> {
        let finite = |v: &[f64]| v.iter().all(|x| x.is_finite());
        match self {
            DiffusionSpec::Constant { value } if value.is_finite() && *value > 0.0 => Ok(()),
            DiffusionSpec::Constant { value } => {
                Err(Error::Config(format!("constant diffusion coefficient must be positive, got {value}")))
            }
            DiffusionSpec::Polynomial { coeffs } if !coeffs.is_empty() && finite(coeffs) => Ok(()),
            DiffusionSpec::Polynomial { .. } => {
                Err(Error::Config("polynomial diffusion needs at least one finite coefficient".into()))
            }
            DiffusionSpec::Table { c, d } => {
                if c.len() < 2 || c.len() != d.len() || !finite(c) || !finite(d) {
                    return Err(Error::Config(
                        "diffusion table needs at least two finite (c, d) knots of equal count".into(),
                    ));
                }
                if c.windows(2).any(|w| w[1] <= w[0]) {
                    return Err(Error::Config("diffusion table knots must be strictly increasing in c".into()));
                }
                Ok(())
            }
        }
    }

    pub fn value(&self, c: f64) -> f64 {
        match self {
            DiffusionSpec::Constant { value } => *value,
            DiffusionSpec::Polynomial { coeffs } => coeffs.iter().rev().fold(0.0, |acc, &a| acc * c + a),
            DiffusionSpec::Table { c: knots, d } => {
                let n = knots.len();
                if c <= knots[0] {
                    return d[0];
                }
                if c >= knots[n - 1] {
                    return d[n - 1];
                }
                let s = segment(knots, c);
                let w = (c - knots[s]) / (knots[s + 1] - knots[s]);
                d[s] + w * (d[s + 1] - d[s])
            }
        }
    }

    /// dD̃/dc. For tables the slope of the segment containing c (right-continuous
    /// at knots, zero outside the knot range).
    pub fn derivative(&self, c: f64) -> f64 {
        match self {
            DiffusionSpec::Constant { .. } => 0.0,
            DiffusionSpec::Polynomial { coeffs } => coeffs
                .iter()
                .enumerate()
                .skip(1)
                .rev()
                .fold(0.0, |acc, (n, &a)| acc * c + n as f64 * a),
            DiffusionSpec::Table { c: knots, d } => {
                let n = knots.len();
                if c < knots[0] || c >= knots[n - 1] {
                    return 0.0;
                }
                let s = segment(knots, c);
                (d[s + 1] - d[s]) / (knots[s + 1] - knots[s])
            }
        }
    }

    /// Smallest and largest value of D̃ over `[lo, hi]`. Exact for constants and
    /// tables; polynomials are scanned on 4096 subintervals.
    pub fn range_on(&self, lo: f64, hi: f64) -> (f64, f64) {
        let mut probes = vec![lo, hi];
        match self {
            DiffusionSpec::Constant { .. } => {}
            DiffusionSpec::Polynomial { .. } => {
                let n = 4096;
                probes.extend((1..n).map(|i| lo + (hi - lo) * i as f64 / n as f64));
            }
            DiffusionSpec::Table { c, .. } => probes.extend(c.iter().copied().filter(|&k| k > lo && k < hi)),
        }
        probes
            .into_iter()
            .map(|c| self.value(c))
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)))
    }
}

fn segment(knots: &[f64], c: f64) -> usize {
    knots.partition_point(|&k| k <= c).saturating_sub(1).min(knots.len() - 2)
}

/// Γ(2-α)·dt^α, the factor multiplying g in the explicit update.
pub fn explicit_step_scale(alpha: FracOrder, dt: f64) -> Result<f64> {
    if !(dt.is_finite() && dt > 0.0) {
        return Err(Error::Domain(format!("time step must be finite and positive, got {dt}")));
    }
    Ok(gamma_fn(2.0 - alpha.value())? * dt.powf(alpha.value()))
}

/// One explicit L1 step: `c(t_{k+1}) = scale · g(t_k) + h(t_k)`.
///
/// Both the forward solver and the physics-informed concentration go through
/// this function.
#[inline]
pub fn explicit_update(scale: f64, g: f64, history: f64) -> f64 {
    scale * g + history
}

/// Largest admissible `Γ(2-α)·dt^α·max D̃·(2/hx² + 2/hy²)`.
///
/// At α = 1 this is the classical 0.9 safety bound. For α < 1 the weight left
/// on c(t_k) after the history split is 1 - b_1 = 2 - 2^{1-α}, so the bound
/// shrinks by that factor to keep every update coefficient non-negative.
pub fn stability_limit(alpha: FracOrder) -> f64 {
    0.9 * (2.0 - 2f64.powf(1.0 - alpha.value()))
}

/// Largest dt satisfying the stability rule for a given peak D̃.
pub fn max_stable_dt(grid: &Grid2D, alpha: FracOrder, d_max: f64) -> Result<f64> {
    if alpha.value() == 0.0 {
        return Err(Error::Config("α = 0 has no time-step dependence and is unstable for this scheme".into()));
    }
    let stiffness = 2.0 / (grid.hx * grid.hx) + 2.0 / (grid.hy * grid.hy);
    let room = stability_limit(alpha) / (gamma_fn(2.0 - alpha.value())? * d_max * stiffness);
    Ok(room.powf(1.0 / alpha.value()))
}

/// Spatial operator `g = D̃ (c_xx + c_yy) + D̃_c (c_x² + c_y²)` at interior
/// node (i, j) with central differences.
pub fn discrete_g(grid: &Grid2D, field: &[f64], dspec: &DiffusionSpec, i: usize, j: usize) -> f64 {
    let at = |i: usize, j: usize| field[grid.index(i, j)];
    let c = at(i, j);
    let (e, w, n, s) = (at(i + 1, j), at(i - 1, j), at(i, j + 1), at(i, j - 1));
    let cx = (e - w) / (2.0 * grid.hx);
    let cy = (n - s) / (2.0 * grid.hy);
    let cxx = (e - 2.0 * c + w) / (grid.hx * grid.hx);
    let cyy = (n - 2.0 * c + s) / (grid.hy * grid.hy);
    g_operator(dspec.value(c), dspec.derivative(c), cx, cy, cxx, cyy)
}

/// `D̃ (c_xx + c_yy) + D̃_c (c_x² + c_y²)` from precomputed pieces.
#[inline]
pub fn g_operator(d: f64, d_c: f64, cx: f64, cy: f64, cxx: f64, cyy: f64) -> f64 {
    d * (cxx + cyy) + d_c * (cx * cx + cy * cy)
}

/// Concentration history on a uniform time grid t_k = k·dt.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldSeries {
    pub grid: Grid2D,
    pub alpha: FracOrder,
    pub diffusion: DiffusionSpec,
    pub dt: f64,
    pub times: Vec<f64>,
    /// One flat field per time level, indexed like the grid.
    pub fields: Vec<Vec<f64>>,
}

impl FieldSeries {
    pub fn steps(&self) -> usize {
        self.times.len() - 1
    }

    /// Time history c(t_0..t_K) at one node.
    pub fn node_history(&self, node: usize) -> Vec<f64> {
        self.fields.iter().map(|f| f[node]).collect()
    }

    /// Every `every`-th time level starting at t_0, with dt scaled to match.
    pub fn every_nth_level(&self, every: usize) -> Result<FieldSeries> {
        if every == 0 {
            return Err(Error::Config("time stride must be at least 1".into()));
        }
        Ok(FieldSeries {
            grid: self.grid,
            alpha: self.alpha,
            diffusion: self.diffusion.clone(),
            dt: self.dt * every as f64,
            times: self.times.iter().step_by(every).copied().collect(),
            fields: self.fields.iter().step_by(every).cloned().collect(),
        })
    }
}

/// Marches `steps` explicit L1 updates from `initial`.
///
/// Boundary nodes are pinned to zero, including in the stored initial field.
/// The stability rule is checked against the D̃ range over the initial
/// concentrations (and 0) before any work is done.
pub fn solve_frac_diffusion(
    grid: &Grid2D,
    alpha: FracOrder,
    dspec: &DiffusionSpec,
    initial: &[f64],
    dt: f64,
    steps: usize,
) -> Result<FieldSeries> {
    grid.validate()?;
    dspec.validate()?;
    if initial.len() != grid.len() {
        return Err(Error::Shape(format!(
            "initial field has {} values for a {}x{} grid",
            initial.len(),
            grid.nx,
            grid.ny
        )));
    }
    if let Some(p) = initial.iter().position(|v| !v.is_finite()) {
        return Err(Error::Config(format!("initial field is non-finite at node {p}")));
    }
    if !(dt.is_finite() && dt > 0.0) {
        return Err(Error::Config(format!("time step must be finite and positive, got {dt}")));
    }
    let lo = initial.iter().copied().fold(0.0, f64::min);
    let hi = initial.iter().copied().fold(0.0, f64::max);
    let (d_min, d_max) = dspec.range_on(lo, hi);
    if !(d_min > 0.0) {
        return Err(Error::Config(format!(
            "diffusion coefficient must stay positive on [{lo}, {hi}], minimum is {d_min}"
        )));
    }
    let scale = explicit_step_scale(alpha, dt)?;
    let number = scale * d_max * (2.0 / (grid.hx * grid.hx) + 2.0 / (grid.hy * grid.hy));
    let limit = stability_limit(alpha);
    if !(number <= limit * (1.0 + 1e-12)) {
        return Err(Error::Config(format!(
            "explicit step unstable: Γ(2-α)·dt^α·max D̃·(2/hx²+2/hy²) = {number:.6} exceeds {limit:.6} \
             (alpha={}, dt={dt}, max D̃={d_max}); largest stable dt is {:.6e}",
            alpha.value(),
            max_stable_dt(grid, alpha, d_max).unwrap_or(f64::NAN),
        )));
    }

    let coeffs = l1_coefficients(alpha, steps);
    let n = grid.len();
    let mut first = initial.to_vec();
    for j in 0..grid.ny {
        for i in 0..grid.nx {
            if grid.is_boundary(i, j) {
                first[grid.index(i, j)] = 0.0;
            }
        }
    }
    // node-major copy of the history so each node's samples are contiguous
    let mut history: Vec<Vec<f64>> = first.iter().map(|&c| {
        let mut h = Vec::with_capacity(steps + 1);
        h.push(c);
        h
    }).collect();
    let mut fields = Vec::with_capacity(steps + 1);
    fields.push(first);

    for k in 0..steps {
        let current = &fields[k];
        let mut next = vec![0.0; n];
        for j in 1..grid.ny - 1 {
            for i in 1..grid.nx - 1 {
                let node = grid.index(i, j);
                let g = discrete_g(grid, current, dspec, i, j);
                let h = history_term(&history[node], &coeffs)?;
                let v = explicit_update(scale, g, h);
                if !v.is_finite() {
                    return Err(Error::numeric(
                        "solve_frac_diffusion",
                        format!("non-finite concentration at step {} node ({i}, {j})", k + 1),
                    ));
                }
                next[node] = v;
            }
        }
        for (node, &v) in next.iter().enumerate() {
            history[node].push(v);
        }
        fields.push(next);
    }

    Ok(FieldSeries {
        grid: *grid,
        alpha,
        diffusion: dspec.clone(),
        dt,
        times: (0..=steps).map(|k| k as f64 * dt).collect(),
        fields,
    })
}

/// `exp(-((x-x_c)² + (y-y_c)²)/width)`.
pub fn gaussian_bump(grid: &Grid2D, center: (f64, f64), width: f64) -> Vec<f64> {
    grid.sample(|x, y| (-((x - center.0).powi(2) + (y - center.1).powi(2)) / width).exp())
}
