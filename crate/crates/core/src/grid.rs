//! Finite-volume partition of `[0, u_max]` and the pair-allocation table of
//! the fixed-pivot coagulation scheme.
//!
//! Cells are indexed from 0. Cell `i` spans `(e[i], e[i+1]]`, has pivot
//! `x[i] = (e[i] + e[i+1]) / 2` and width `d[i] = e[i+1] - e[i]`.

use serde::Serialize;

use crate::error::{check_param, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "scheme", rename_all = "snake_case")]
pub enum GridScheme {
    Uniform,
    /// Each width is `ratio` times the previous one.
    Geometric {
        ratio: f64,
    },
}

impl GridScheme {
    pub fn geometric(ratio: f64) -> Result<Self> {
        check_param("ratio", ratio, ratio > 1.0, "ratio > 1")?;
        Ok(Self::Geometric { ratio })
    }

    /// Geometric with three cells per doubling of width.
    pub fn default_geometric() -> Self {
        Self::Geometric {
            ratio: 2f64.powf(1.0 / 3.0),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SizeGrid {
    edges: Vec<f64>,
    pivots: Vec<f64>,
    widths: Vec<f64>,
    scheme: GridScheme,
}

/// Builds a grid of `n_cells` cells over `[0, u_max]`.
pub fn build_grid(u_max: f64, n_cells: usize, scheme: GridScheme) -> Result<SizeGrid> {
    check_param("u_max", u_max, u_max > 0.0, "u_max > 0")?;
    if n_cells < 2 {
        return Err(Error::Parameter {
            name: "cells",
            value: n_cells as f64,
            allowed: "at least 2 cells",
        });
    }
    let edges: Vec<f64> = match scheme {
        GridScheme::Uniform => (0..=n_cells).map(|i| u_max * i as f64 / n_cells as f64).collect(),
        GridScheme::Geometric { ratio } => {
            check_param("ratio", ratio, ratio > 1.0, "ratio > 1")?;
            let first = u_max * (ratio - 1.0) / (ratio.powi(n_cells as i32) - 1.0);
            if !(first > 0.0) {
                return Err(Error::Parameter {
                    name: "ratio",
                    value: ratio,
                    allowed: "a ratio whose first width is representable",
                });
            }
            let mut e = Vec::with_capacity(n_cells + 1);
            e.push(0.0);
            let mut w = first;
            for _ in 0..n_cells {
                e.push(e[e.len() - 1] + w);
                w *= ratio;
            }
            e[n_cells] = u_max;
            e
        }
    };
    let widths: Vec<f64> = edges.windows(2).map(|w| w[1] - w[0]).collect();
    let pivots: Vec<f64> = edges.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect();
    if widths.iter().any(|w| !(*w > 0.0)) {
        return Err(Error::Parameter {
            name: "cells",
            value: n_cells as f64,
            allowed: "a cell count that keeps every width positive",
        });
    }
    Ok(SizeGrid {
        edges,
        pivots,
        widths,
        scheme,
    })
}

impl SizeGrid {
    pub fn len(&self) -> usize {
        self.pivots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pivots.is_empty()
    }

    pub fn edges(&self) -> &[f64] {
        &self.edges
    }

    pub fn pivots(&self) -> &[f64] {
        &self.pivots
    }

    pub fn widths(&self) -> &[f64] {
        &self.widths
    }

    pub fn scheme(&self) -> GridScheme {
        self.scheme
    }

    pub fn u_max(&self) -> f64 {
        self.edges[self.edges.len() - 1]
    }

    /// Index of the cell with `e[i] < u <= e[i+1]`.
    pub fn locate(&self, u: f64) -> Result<usize> {
        if !(u > 0.0 && u <= self.u_max()) {
            return Err(Error::Domain(format!("size {u} outside (0, {}]", self.u_max())));
        }
        Ok(self.edges.partition_point(|&e| e < u) - 1)
    }
}

/// Where the aggregate of cells `i` and `j` is placed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PairTarget {
    /// Split between pivots `k` and `k + 1`; `w_hi` is zero when `k` is the
    /// last cell (exact hit on the last pivot).
    Split { k: usize, w_lo: f64, w_hi: f64 },
    /// The aggregate exceeds the last pivot.
    Overflow,
}

/// Allocation targets for every unordered pair `i <= j`.
#[derive(Debug, Clone)]
pub struct PairAllocation {
    n: usize,
    targets: Vec<PairTarget>,
}

impl PairAllocation {
    fn index(&self, i: usize, j: usize) -> usize {
        let (i, j) = if i <= j { (i, j) } else { (j, i) };
        // Row-major upper triangle.
        i * self.n - i * (i + 1) / 2 + j
    }

    pub fn get(&self, i: usize, j: usize) -> PairTarget {
        self.targets[self.index(i, j)]
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }
}

pub fn build_pair_allocation(grid: &SizeGrid) -> PairAllocation {
    let x = grid.pivots();
    let n = x.len();
    let mut targets = Vec::with_capacity(n * (n + 1) / 2);
    for i in 0..n {
        for j in i..n {
            let v = x[i] + x[j];
            targets.push(allocate(x, v));
        }
    }
    PairAllocation { n, targets }
}

fn allocate(x: &[f64], v: f64) -> PairTarget {
    let n = x.len();
    if v > x[n - 1] {
        return PairTarget::Overflow;
    }
    let k = x.partition_point(|&p| p <= v) - 1;
    if k == n - 1 || x[k] == v {
        return PairTarget::Split {
            k,
            w_lo: 1.0,
            w_hi: 0.0,
        };
    }
    let w_hi = (v - x[k]) / (x[k + 1] - x[k]);
    PairTarget::Split {
        k,
        w_lo: 1.0 - w_hi,
        w_hi,
    }
}
