//! Discrete right-hand side: fixed-pivot coagulation, sectional
//! fragmentation, upwind growth with renewal inflow, and death.
//!
//! Every term reports the number and mass it moves across the domain
//! boundary (overflow past `u_max`, renewal inflow at `u = 0`, death), so a
//! run can close its mass budget from the ledger alone.

use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use crate::coefficients::{CoagulationKernel, CoefficientSet, RateFunction};
use crate::error::{check_param, Error, Result};
use crate::grid::{build_pair_allocation, PairAllocation, PairTarget, SizeGrid};

/// Cumulative boundary fluxes since the initial time.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct FluxLedger {
    pub overflow_mass: f64,
    pub overflow_number: f64,
    pub renewal_number: f64,
    /// Mass carried by renewal inflow, `x_0` per newborn. A discretization
    /// artifact that vanishes as the first cell shrinks.
    pub renewal_mass: f64,
    pub death_number: f64,
    pub death_mass: f64,
    /// Mass added by transport, excluding renewal inflow.
    pub growth_mass: f64,
    pub clamp_count: u64,
    /// Mass added by clamping roundoff negatives to zero.
    pub clamped_mass: f64,
}

impl FluxLedger {
    pub(crate) fn accumulate(&mut self, r: &BoundaryRates, dt: f64) {
        self.overflow_mass += dt * r.overflow_mass;
        self.overflow_number += dt * r.overflow_number;
        self.renewal_number += dt * r.renewal_number;
        self.renewal_mass += dt * r.renewal_mass;
        self.death_number += dt * r.death_number;
        self.death_mass += dt * r.death_mass;
        self.growth_mass += dt * r.growth_mass;
    }

    /// Net mass change implied by the ledger.
    pub fn net_mass(&self) -> f64 {
        self.renewal_mass + self.growth_mass + self.clamped_mass - self.overflow_mass - self.death_mass
    }
}

/// Instantaneous boundary rates of one right-hand-side evaluation.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct BoundaryRates {
    pub overflow_mass: f64,
    pub overflow_number: f64,
    pub renewal_number: f64,
    pub renewal_mass: f64,
    pub death_number: f64,
    pub death_mass: f64,
    pub growth_mass: f64,
}

impl BoundaryRates {
    fn add(&mut self, o: &BoundaryRates) {
        self.overflow_mass += o.overflow_mass;
        self.overflow_number += o.overflow_number;
        self.renewal_number += o.renewal_number;
        self.renewal_mass += o.renewal_mass;
        self.death_number += o.death_number;
        self.death_mass += o.death_mass;
        self.growth_mass += o.growth_mass;
    }

    pub(crate) fn average(a: &BoundaryRates, b: &BoundaryRates) -> BoundaryRates {
        let m = |x: f64, y: f64| 0.5 * (x + y);
        BoundaryRates {
            overflow_mass: m(a.overflow_mass, b.overflow_mass),
            overflow_number: m(a.overflow_number, b.overflow_number),
            renewal_number: m(a.renewal_number, b.renewal_number),
            renewal_mass: m(a.renewal_mass, b.renewal_mass),
            death_number: m(a.death_number, b.death_number),
            death_mass: m(a.death_mass, b.death_mass),
            growth_mass: m(a.growth_mass, b.growth_mass),
        }
    }
}

/// Time stamp, per-cell number densities and the boundary ledger.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    pub t: f64,
    pub xi: Vec<f64>,
    pub ledger: FluxLedger,
    grid: Arc<SizeGrid>,
}

impl StateVector {
    pub fn new(grid: &SizeGrid, xi: Vec<f64>) -> Result<Self> {
        Self::on(Arc::new(grid.clone()), xi)
    }

    pub(crate) fn on(grid: Arc<SizeGrid>, xi: Vec<f64>) -> Result<Self> {
        if xi.len() != grid.len() {
            return Err(Error::DimensionMismatch {
                expected: grid.len(),
                found: xi.len(),
            });
        }
        if let Some(&v) = xi.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
            return Err(Error::Parameter {
                name: "xi",
                value: v,
                allowed: "finite nonnegative densities",
            });
        }
        Ok(Self {
            t: 0.0,
            xi,
            ledger: FluxLedger::default(),
            grid,
        })
    }

    pub fn zeros(grid: &SizeGrid) -> Self {
        Self::new(grid, vec![0.0; grid.len()]).expect("zero state is valid")
    }

    /// Samples `f` at the pivots; negative or non-finite samples are errors.
    pub fn from_fn(grid: &SizeGrid, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(grid, grid.pivots().iter().map(|&u| f(u)).collect())
    }

    /// Exact cell averages of `amplitude * exp(-u / scale)`.
    pub fn exp_decay(grid: &SizeGrid, amplitude: f64, scale: f64) -> Result<Self> {
        check_param("amplitude", amplitude, amplitude >= 0.0, "amplitude >= 0")?;
        check_param("scale", scale, scale > 0.0, "scale > 0")?;
        let e = grid.edges();
        let xi = grid
            .widths()
            .iter()
            .enumerate()
            .map(|(i, d)| {
                let mass = -(-e[i + 1] / scale).exp_m1() + (-e[i] / scale).exp_m1();
                amplitude * scale * mass / d
            })
            .collect();
        Self::new(grid, xi)
    }

    /// All particles in one cell at the given density.
    pub fn monodisperse(grid: &SizeGrid, cell: usize, density: f64) -> Result<Self> {
        if cell >= grid.len() {
            return Err(Error::Parameter {
                name: "cell",
                value: cell as f64,
                allowed: "a cell index below the cell count",
            });
        }
        let mut xi = vec![0.0; grid.len()];
        xi[cell] = density;
        Self::new(grid, xi)
    }

    /// Piecewise-linear interpolation of `(u, xi)` samples at the pivots,
    /// zero outside the sampled range.
    pub fn from_table(grid: &SizeGrid, u: &[f64], xi: &[f64]) -> Result<Self> {
        if u.len() != xi.len() || u.len() < 2 {
            return Err(Error::DimensionMismatch {
                expected: u.len().max(2),
                found: xi.len(),
            });
        }
        if u.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Parameter {
                name: "u",
                value: u[0],
                allowed: "strictly increasing sample sizes",
            });
        }
        let f = RateFunction::table(u.to_vec(), xi.to_vec())?;
        let (lo, hi) = (u[0], u[u.len() - 1]);
        Self::from_fn(grid, |x| if x < lo || x > hi { 0.0 } else { f.at(x) })
    }

    pub fn grid(&self) -> &SizeGrid {
        &self.grid
    }

    pub fn same_grid(&self, other: &StateVector) -> bool {
        Arc::ptr_eq(&self.grid, &other.grid) || *self.grid == *other.grid
    }

    /// A copy with every density multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        let mut s = Self::on(self.grid.clone(), self.xi.iter().map(|v| v * factor).collect())?;
        s.t = self.t;
        Ok(s)
    }
}

/// Per-cell rates of each process plus boundary rates.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct RhsTerms {
    pub coag_gain: Vec<f64>,
    pub coag_loss: Vec<f64>,
    pub frag_gain: Vec<f64>,
    pub frag_loss: Vec<f64>,
    pub growth_div: Vec<f64>,
    pub death: Vec<f64>,
    /// Nonzero in the first cell only.
    pub renewal_inflow: Vec<f64>,
    pub boundary: BoundaryRates,
    /// Overflow produced by coagulation alone.
    pub coag_overflow_mass: f64,
    pub coag_overflow_number: f64,
}

impl RhsTerms {
    fn zeros(n: usize) -> Self {
        Self {
            coag_gain: vec![0.0; n],
            coag_loss: vec![0.0; n],
            frag_gain: vec![0.0; n],
            frag_loss: vec![0.0; n],
            growth_div: vec![0.0; n],
            death: vec![0.0; n],
            renewal_inflow: vec![0.0; n],
            ..Default::default()
        }
    }

    /// Sum of all per-cell contributions.
    pub fn total(&self) -> Vec<f64> {
        (0..self.coag_gain.len())
            .map(|i| {
                self.coag_gain[i]
                    + self.coag_loss[i]
                    + self.frag_gain[i]
                    + self.frag_loss[i]
                    + self.growth_div[i]
                    + self.death[i]
                    + self.renewal_inflow[i]
            })
            .collect()
    }

    fn merge(&mut self, o: RhsTerms) {
        let add = |a: &mut Vec<f64>, b: Vec<f64>| {
            for (x, y) in a.iter_mut().zip(b) {
                *x += y;
            }
        };
        add(&mut self.coag_gain, o.coag_gain);
        add(&mut self.coag_loss, o.coag_loss);
        add(&mut self.frag_gain, o.frag_gain);
        add(&mut self.frag_loss, o.frag_loss);
        add(&mut self.growth_div, o.growth_div);
        add(&mut self.death, o.death);
        add(&mut self.renewal_inflow, o.renewal_inflow);
        self.boundary.add(&o.boundary);
        self.coag_overflow_mass += o.coag_overflow_mass;
        self.coag_overflow_number += o.coag_overflow_number;
    }
}

/// How the coagulation pair loop is evaluated. Both settings give bitwise
/// identical results.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Parallelism {
    #[default]
    Serial,
    Rayon,
}

/// Cutoff level of the truncated problem.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TruncationLevel {
    pub n: f64,
    /// Adds `1/n` to the growth rate. Without it the truncated problem only
    /// cuts off death, fragmentation and coagulation.
    pub growth_floor: bool,
}

impl TruncationLevel {
    pub fn new(n: f64) -> Result<Self> {
        check_param("n", n, n > 0.0, "n > 0")?;
        Ok(Self { n, growth_floor: true })
    }

    pub fn without_growth_floor(mut self) -> Self {
        self.growth_floor = false;
        self
    }
}

/// Cuts death, fragmentation and coagulation off above `level.n` and, unless
/// disabled, raises growth by `1/n`. Birth and the daughter distribution are
/// unchanged.
pub fn truncate_coefficients(set: &CoefficientSet, level: TruncationLevel) -> Result<CoefficientSet> {
    let n = level.n;
    check_param("n", n, n > 0.0, "n > 0")?;
    let mut out = set.clone();
    out.death = set.death.clone().truncated(n)?;
    let cutoff = set.fragmentation.cutoff.map_or(n, |c| c.min(n));
    out.fragmentation = set.fragmentation.clone().with_cutoff(cutoff)?;
    out.coagulation = set.coagulation.clone().truncated(n)?;
    if level.growth_floor {
        out.growth = set.growth.clone().shifted(1.0 / n)?;
    }
    Ok(out)
}

/// Coefficient tables evaluated on a grid.
#[derive(Debug, Clone)]
pub struct Discretization {
    grid: Arc<SizeGrid>,
    set: CoefficientSet,
    alloc: PairAllocation,
    /// Row-major `K(x_i, x_j)`.
    kernel: Vec<f64>,
    /// Row-major `B[i][j]`: density gained in cell `i` per unit number of
    /// parents in cell `j` breaking up.
    frag: Vec<f64>,
    alpha: Vec<f64>,
    mu: Vec<f64>,
    g_pivot: Vec<f64>,
    g_edge: Vec<f64>,
    birth: Vec<f64>,
    /// Transport coefficient out of each cell.
    growth_out: Vec<f64>,
    has_coag: bool,
    has_frag: bool,
    parallelism: Parallelism,
}

impl Discretization {
    pub fn new(grid: &SizeGrid, set: &CoefficientSet) -> Result<Self> {
        Self::on(Arc::new(grid.clone()), set)
    }

    pub(crate) fn on(grid: Arc<SizeGrid>, set: &CoefficientSet) -> Result<Self> {
        set.validate()?;
        let x = grid.pivots();
        let e = grid.edges();
        let n = grid.len();
        let kernel = kernel_table(&set.coagulation, x);
        let alpha: Vec<f64> = x.iter().map(|&u| set.fragmentation.at(u)).collect();
        let frag = if set.fragmentation.is_zero() {
            vec![0.0; n * n]
        } else {
            fragment_table(&grid, set.daughter)
        };
        let g_pivot: Vec<f64> = x.iter().map(|&u| set.growth.at(u)).collect();
        let g_edge: Vec<f64> = e.iter().map(|&u| set.growth.at(u)).collect();
        let growth_out = (0..n)
            .map(|i| {
                if i + 1 < n {
                    g_pivot[i] / (x[i + 1] - x[i])
                } else {
                    g_edge[n] / grid.widths()[i]
                }
            })
            .collect();
        Ok(Self {
            alloc: build_pair_allocation(&grid),
            has_coag: kernel.iter().any(|k| *k != 0.0),
            has_frag: alpha.iter().any(|a| *a != 0.0),
            kernel,
            frag,
            alpha,
            mu: x.iter().map(|&u| set.death.at(u)).collect(),
            g_pivot,
            g_edge,
            birth: x.iter().map(|&u| set.birth.at(u)).collect(),
            growth_out,
            set: set.clone(),
            grid,
            parallelism: Parallelism::Serial,
        })
    }

    pub fn with_parallelism(mut self, p: Parallelism) -> Self {
        self.parallelism = p;
        self
    }

    pub fn grid(&self) -> &SizeGrid {
        &self.grid
    }

    pub fn coefficients(&self) -> &CoefficientSet {
        &self.set
    }

    pub fn allocation(&self) -> &PairAllocation {
        &self.alloc
    }

    pub fn kernel_table(&self) -> &[f64] {
        &self.kernel
    }

    pub fn fragment_table(&self) -> &[f64] {
        &self.frag
    }

    pub fn alpha(&self) -> &[f64] {
        &self.alpha
    }

    pub fn mu(&self) -> &[f64] {
        &self.mu
    }

    pub fn growth_at_pivots(&self) -> &[f64] {
        &self.g_pivot
    }

    pub fn growth_at_edges(&self) -> &[f64] {
        &self.g_edge
    }

    pub fn birth(&self) -> &[f64] {
        &self.birth
    }

    /// A zero state on this discretization's grid.
    pub fn zero_state(&self) -> StateVector {
        StateVector::on(self.grid.clone(), vec![0.0; self.grid.len()]).expect("valid")
    }

    /// A state on this discretization's grid.
    pub fn state(&self, xi: Vec<f64>) -> Result<StateVector> {
        StateVector::on(self.grid.clone(), xi)
    }

    fn check(&self, xi: &[f64]) -> Result<()> {
        if xi.len() != self.grid.len() {
            return Err(Error::DimensionMismatch {
                expected: self.grid.len(),
                found: xi.len(),
            });
        }
        Ok(())
    }

    /// Fixed-pivot coagulation.
    pub fn coagulation(&self, xi: &[f64]) -> Result<RhsTerms> {
        self.check(xi)?;
        let n = xi.len();
        let mut out = RhsTerms::zeros(n);
        if !self.has_coag {
            return Ok(out);
        }
        let d = self.grid.widths();
        let x = self.grid.pivots();
        let row = |i: usize| -> CoagRow {
            let mut r = CoagRow::default();
            let k_row = &self.kernel[i * n..(i + 1) * n];
            let mut loss = 0.0;
            for j in 0..n {
                loss += k_row[j] * xi[j] * d[j];
            }
            r.loss = -xi[i] * loss;
            if xi[i] == 0.0 {
                return r;
            }
            for j in i..n {
                if xi[j] == 0.0 || k_row[j] == 0.0 {
                    continue;
                }
                let half = if i == j { 0.5 } else { 1.0 };
                let rate = half * k_row[j] * xi[i] * xi[j] * d[i] * d[j];
                match self.alloc.get(i, j) {
                    PairTarget::Split { k, w_lo, w_hi } => {
                        r.gains.push((k, w_lo * rate / d[k]));
                        if w_hi != 0.0 {
                            r.gains.push((k + 1, w_hi * rate / d[k + 1]));
                        }
                    }
                    PairTarget::Overflow => {
                        r.overflow_number += rate;
                        r.overflow_mass += (x[i] + x[j]) * rate;
                    }
                }
            }
            r
        };
        let mut apply = |i: usize, r: CoagRow| {
            out.coag_loss[i] = r.loss;
            for (k, v) in r.gains {
                out.coag_gain[k] += v;
            }
            out.coag_overflow_number += r.overflow_number;
            out.coag_overflow_mass += r.overflow_mass;
        };
        match self.parallelism {
            Parallelism::Serial => {
                for i in 0..n {
                    apply(i, row(i));
                }
            }
            Parallelism::Rayon => {
                let rows: Vec<CoagRow> = (0..n).into_par_iter().map(row).collect();
                for (i, r) in rows.into_iter().enumerate() {
                    apply(i, r);
                }
            }
        }
        out.boundary.overflow_mass = out.coag_overflow_mass;
        out.boundary.overflow_number = out.coag_overflow_number;
        Ok(out)
    }

    /// Sectional fragmentation with closed-form daughter integrals.
    pub fn fragmentation(&self, xi: &[f64]) -> Result<RhsTerms> {
        self.check(xi)?;
        let n = xi.len();
        let mut out = RhsTerms::zeros(n);
        if !self.has_frag {
            return Ok(out);
        }
        let d = self.grid.widths();
        let source: Vec<f64> = (0..n).map(|j| self.alpha[j] * xi[j] * d[j]).collect();
        for (i, &x) in xi.iter().enumerate() {
            out.frag_loss[i] = -self.alpha[i] * x;
            let b_row = &self.frag[i * n + i..(i + 1) * n];
            out.frag_gain[i] = b_row.iter().zip(&source[i..]).map(|(b, s)| b * s).sum();
        }
        Ok(out)
    }

    /// Upwind transport with renewal inflow into the first cell.
    ///
    /// The flux between cells `i` and `i+1` is `g(x_i) xi_i d_i / (x_{i+1} -
    /// x_i)`, which makes the discrete mass rate equal `sum g(x_i) xi_i d_i`
    /// over interior cells.
    pub fn growth(&self, xi: &[f64]) -> Result<RhsTerms> {
        self.check(xi)?;
        let n = xi.len();
        let mut out = RhsTerms::zeros(n);
        let d = self.grid.widths();
        let x = self.grid.pivots();
        let e = self.grid.edges();

        let mut inflow = 0.0;
        for j in 0..n {
            inflow += self.birth[j] * xi[j] * d[j];
        }
        out.renewal_inflow[0] = inflow / d[0];
        out.boundary.renewal_number = inflow;
        out.boundary.renewal_mass = x[0] * inflow;

        let mut upstream = 0.0;
        let mut growth_mass = 0.0;
        for i in 0..n {
            let f = self.growth_out[i] * xi[i] * d[i];
            out.growth_div[i] = (upstream - f) / d[i];
            if i + 1 < n {
                growth_mass += self.g_pivot[i] * xi[i] * d[i];
            } else {
                growth_mass += (e[n] - x[i]) * f;
                out.boundary.overflow_number = f;
                out.boundary.overflow_mass = e[n] * f;
            }
            upstream = f;
        }
        out.boundary.growth_mass = growth_mass;
        Ok(out)
    }

    pub fn death(&self, xi: &[f64]) -> Result<RhsTerms> {
        self.check(xi)?;
        let n = xi.len();
        let mut out = RhsTerms::zeros(n);
        let d = self.grid.widths();
        let x = self.grid.pivots();
        for i in 0..n {
            let r = self.mu[i] * xi[i];
            out.death[i] = -r;
            out.boundary.death_number += r * d[i];
            out.boundary.death_mass += x[i] * r * d[i];
        }
        Ok(out)
    }

    /// All four processes with their per-term breakdown.
    pub fn rhs(&self, xi: &[f64]) -> Result<RhsTerms> {
        let mut out = self.coagulation(xi)?;
        out.merge(self.fragmentation(xi)?);
        out.merge(self.growth(xi)?);
        out.merge(self.death(xi)?);
        Ok(out)
    }

    /// Per-cell total loss-rate coefficient: coagulation with the current
    /// state, fragmentation, death and transport out of the cell.
    pub fn loss_coefficients(&self, xi: &[f64]) -> Vec<f64> {
        let n = xi.len();
        let d = self.grid.widths();
        (0..n)
            .map(|i| {
                let mut c = 0.0;
                if self.has_coag {
                    let k_row = &self.kernel[i * n..(i + 1) * n];
                    for j in 0..n {
                        c += k_row[j] * xi[j] * d[j];
                    }
                }
                c + self.alpha[i] + self.mu[i] + self.growth_out[i]
            })
            .collect()
    }
}

#[derive(Default)]
struct CoagRow {
    loss: f64,
    gains: Vec<(usize, f64)>,
    overflow_number: f64,
    overflow_mass: f64,
}

/// Full right-hand side of a state.
pub fn total_rhs(disc: &Discretization, state: &StateVector) -> Result<RhsTerms> {
    if !state.same_grid_as(disc) {
        return Err(Error::GridMismatch);
    }
    disc.rhs(&state.xi)
}

impl StateVector {
    fn same_grid_as(&self, disc: &Discretization) -> bool {
        Arc::ptr_eq(&self.grid, &disc.grid) || *self.grid == *disc.grid
    }
}

fn kernel_table(kernel: &CoagulationKernel, x: &[f64]) -> Vec<f64> {
    let n = x.len();
    let mut k = vec![0.0; n * n];
    for i in 0..n {
        for j in i..n {
            let v = kernel.rate(x[i], x[j]);
            k[i * n + j] = v;
            k[j * n + i] = v;
        }
    }
    k
}

/// Daughters of a parent at pivot `x_j` are integrated cell by cell over
/// `(e_i, min(e_{i+1}, x_j))`. Each cell's number `N_i` and mass `m_i` are
/// then split between pivots `x_{i-1}` and `x_i` so both are preserved.
/// Since the daughter density is nonincreasing, the centroid `m_i / N_i`
/// lies in `(e_i, x_i]` and the split weights are in `[0, 1]`. Daughters in
/// the first cell have no left neighbour and are placed at `x_0` with their
/// mass preserved.
fn fragment_table(grid: &SizeGrid, daughter: crate::coefficients::DaughterDistribution) -> Vec<f64> {
    let n = grid.len();
    let x = grid.pivots();
    let e = grid.edges();
    let d = grid.widths();
    let mut b = vec![0.0; n * n];
    for j in 0..n {
        let parent = x[j];
        for i in 0..=j {
            let hi = e[i + 1].min(parent);
            let count = daughter.number_between(e[i], hi, parent);
            let mass = daughter.mass_between(e[i], hi, parent);
            if count == 0.0 {
                continue;
            }
            if i == 0 {
                b[j] += mass / x[0] / d[0];
                continue;
            }
            let centroid = (mass / count).clamp(x[i - 1], x[i]);
            let w_hi = (centroid - x[i - 1]) / (x[i] - x[i - 1]);
            let w_lo = 1.0 - w_hi;
            b[i * n + j] += w_hi * count / d[i];
            b[(i - 1) * n + j] += w_lo * count / d[i - 1];
        }
    }
    b
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coefficients::{DaughterDistribution, FragmentationRate};
    use crate::grid::{build_grid, GridScheme};

    fn uniform(n: usize, u_max: f64) -> SizeGrid {
        build_grid(u_max, n, GridScheme::Uniform).unwrap()
    }

    fn mass(grid: &SizeGrid, v: &[f64]) -> f64 {
        v.iter()
            .zip(grid.pivots())
            .zip(grid.widths())
            .map(|((r, x), d)| r * x * d)
            .sum()
    }

    fn number(grid: &SizeGrid, v: &[f64]) -> f64 {
        v.iter().zip(grid.widths()).map(|(r, d)| r * d).sum()
    }

    #[test]
    fn zero_state_gives_zero_rhs() {
        let g = uniform(5, 1.0);
        let set = CoefficientSet::default()
            .with_coagulation(CoagulationKernel::constant(1.0).unwrap())
            .with_fragmentation(
                FragmentationRate::new(1.0, 1.0).unwrap(),
                DaughterDistribution::default(),
            );
        let disc = Discretization::new(&g, &set).unwrap();
        let r = disc.rhs(&[0.0; 5]).unwrap();
        assert!(r.total().iter().all(|v| *v == 0.0));
    }

    #[test]
    fn single_cell_self_pair() {
        let g = uniform(8, 1.0);
        let set = CoefficientSet::default().with_coagulation(CoagulationKernel::constant(1.0).unwrap());
        let disc = Discretization::new(&g, &set).unwrap();
        let mut xi = vec![0.0; 8];
        xi[1] = 3.0;
        let r = disc.coagulation(&xi).unwrap();
        let d = g.widths()[1];
        assert!((r.coag_loss[1] + 9.0 * d).abs() < 1e-15);
        // 2 x_1 = 0.375 lies between x_2 = 0.3125 and x_3 = 0.4375.
        let pair = 0.5 * 9.0 * d * d;
        assert!((r.coag_gain[2] * d + r.coag_gain[3] * d - pair).abs() < 1e-15);
    }

    #[test]
    fn two_cell_number_rate() {
        let g = build_grid(10.0, 2, GridScheme::Uniform).unwrap();
        let set = CoefficientSet::default().with_coagulation(CoagulationKernel::constant(1.0).unwrap());
        let disc = Discretization::new(&g, &set).unwrap();
        let xi = [1.0, 1.0];
        let r = disc.coagulation(&xi).unwrap();
        let d = g.widths();
        let mut brute = 0.0;
        for i in 0..2 {
            for j in 0..2 {
                brute += xi[i] * xi[j] * d[i] * d[j];
            }
        }
        let net = number(&g, &r.coag_gain) + number(&g, &r.coag_loss);
        assert!((net + r.coag_overflow_number + 0.5 * brute).abs() < 1e-12 * brute);
    }

    #[test]
    fn binary_fragmentation_column_sum() {
        let g = build_grid(20.0, 40, GridScheme::geometric(1.1).unwrap()).unwrap();
        let disc = Discretization::new(
            &g,
            &CoefficientSet::default().with_fragmentation(
                FragmentationRate::new(1.0, 0.0).unwrap(),
                DaughterDistribution::new(0.0).unwrap(),
            ),
        )
        .unwrap();
        let n = g.len();
        for j in 1..n {
            let s: f64 = (0..n).map(|i| disc.frag[i * n + j] * g.widths()[i]).sum();
            assert!((s - 2.0).abs() < 1e-12, "column {j}: {s}");
        }
    }

    #[test]
    fn fragment_split_weights_stay_nonnegative() {
        let g = uniform(30, 3.0);
        for nu in [0.0, -0.5, -0.9, -0.99] {
            let disc = Discretization::new(
                &g,
                &CoefficientSet::default().with_fragmentation(
                    FragmentationRate::new(1.0, 1.0).unwrap(),
                    DaughterDistribution::new(nu).unwrap(),
                ),
            )
            .unwrap();
            assert!(disc.frag.iter().all(|b| *b >= 0.0), "nu = {nu}");
        }
    }

    #[test]
    fn constant_rate_fragmentation_number_rate() {
        let g = uniform(50, 5.0);
        let disc = Discretization::new(
            &g,
            &CoefficientSet::default().with_fragmentation(
                FragmentationRate::new(0.7, 0.0).unwrap(),
                DaughterDistribution::new(0.0).unwrap(),
            ),
        )
        .unwrap();
        let mut xi = vec![0.0; 50];
        for (i, v) in xi.iter_mut().enumerate().skip(1) {
            *v = (i as f64 * 0.3).sin().abs();
        }
        let r = disc.fragmentation(&xi).unwrap();
        let rate = number(&g, &r.frag_gain) + number(&g, &r.frag_loss);
        let m0 = number(&g, &xi);
        assert!((rate - 0.7 * m0).abs() < 1e-12 * m0);
    }

    #[test]
    fn renewal_and_death_examples() {
        let g = uniform(10, 1.0);
        let set = CoefficientSet::default().with_birth(RateFunction::constant(1.0).unwrap());
        let disc = Discretization::new(&g, &set).unwrap();
        let xi = vec![2.0; 10];
        let r = disc.growth(&xi).unwrap();
        assert!((r.boundary.renewal_number - 2.0).abs() < 1e-14);
        assert_eq!(r.boundary.renewal_mass, g.pivots()[0] * r.boundary.renewal_number);

        let set = CoefficientSet::default().with_death(RateFunction::constant(3.0).unwrap());
        let disc = Discretization::new(&g, &set).unwrap();
        let r = disc.death(&xi).unwrap();
        assert!((number(&g, &r.death) + 3.0 * number(&g, &xi)).abs() < 1e-14);
    }

    #[test]
    fn growth_mass_rate_is_number_for_unit_speed() {
        let g = uniform(200, 10.0);
        let set = CoefficientSet::default().with_growth(RateFunction::constant(1.0).unwrap());
        let disc = Discretization::new(&g, &set).unwrap();
        let xi: Vec<f64> = g
            .pivots()
            .iter()
            .map(|&u| {
                if (3.0..6.0).contains(&u) {
                    (u - 3.0) * (6.0 - u)
                } else {
                    0.0
                }
            })
            .collect();
        let r = disc.growth(&xi).unwrap();
        let dm1 = mass(&g, &r.growth_div);
        assert!((dm1 - number(&g, &xi)).abs() < 1e-12 * number(&g, &xi));
    }

    #[test]
    fn truncation_examples() {
        let set = CoefficientSet::default()
            .with_death(RateFunction::affine(1.0, 0.0).unwrap())
            .with_coagulation(CoagulationKernel::product(0.5).unwrap());
        let t = truncate_coefficients(&set, TruncationLevel::new(5.0).unwrap()).unwrap();
        assert_eq!(t.death.at(7.0), 0.0);
        assert_eq!(t.death.at(3.0), 3.0);
        assert_eq!(t.growth.at(42.0), 0.2);
        assert_eq!(t.coagulation.rate(6.0, 2.0), 0.0);
        assert!(TruncationLevel::new(0.0).is_err());
        let t = truncate_coefficients(&set, TruncationLevel::new(5.0).unwrap().without_growth_floor()).unwrap();
        assert_eq!(t.growth.at(1.0), 0.0);
    }
}
