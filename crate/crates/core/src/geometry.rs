//! Finite-difference discretizations of rectangles and partially rectangular
//! planar domains.
//!
//! Every mesh lives on a lattice `x = x_origin + i·hx`, `y = j·hy`. A lattice
//! node is *interior* when it lies strictly inside the domain; all other
//! nodes act as Dirichlet ghosts with value zero. The horizontal sides of the
//! core rectangle (`y = 0` and `y = Ly`) are always lattice lines, so the
//! Dirichlet condition on that pair of segments is exact. Curved wing
//! boundaries are resolved by a node-center inclusion test (staircase).
//!
//! Interior nodes are numbered column by column (x outer, y inner). For a
//! plain rectangle this gives `index = (i - 1)·(Ny - 1) + (j - 1)`, which
//! the sine transform in [`crate::mode1d`] relies on.

use faer::Mat;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const DIVISOR_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Shape {
    Rectangle,
    Stadium,
    RectangleWithWings,
}

/// Geometric description of the domain.
///
/// The core rectangle is `[x_min, x_min + lx] × [0, ly]`. For the wing
/// shapes `x_min` is zero and two half-discs of radius `beta`, centered at
/// `(0, ly/2)` and `(lx, ly/2)`, are glued onto the vertical sides.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DomainSpec {
    pub shape: Shape,
    pub lx: f64,
    pub ly: f64,
    pub beta: f64,
    #[serde(default)]
    pub x_min: f64,
}

impl DomainSpec {
    pub fn rectangle(lx: f64, ly: f64) -> Self {
        Self { shape: Shape::Rectangle, lx, ly, beta: 0.0, x_min: 0.0 }
    }

    /// Bunimovich stadium `[0,1] × [0, 2β]` plus two half-discs of radius β.
    pub fn stadium(beta: f64) -> Self {
        Self { shape: Shape::Stadium, lx: 1.0, ly: 2.0 * beta, beta, x_min: 0.0 }
    }

    pub fn rectangle_with_wings(lx: f64, ly: f64, beta: f64) -> Self {
        Self { shape: Shape::RectangleWithWings, lx, ly, beta, x_min: 0.0 }
    }

    pub fn has_wings(&self) -> bool {
        !matches!(self.shape, Shape::Rectangle)
    }

    /// Exact area of the continuous domain.
    pub fn area(&self) -> f64 {
        let rect = self.lx * self.ly;
        if self.has_wings() {
            rect + std::f64::consts::PI * self.beta * self.beta
        } else {
            rect
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.lx > 0.0 && self.ly > 0.0) {
            return Err(Error::Geometry(format!(
                "dimensions must be positive (lx = {}, ly = {})",
                self.lx, self.ly
            )));
        }
        match self.shape {
            Shape::Rectangle => Ok(()),
            Shape::Stadium => {
                if !(self.beta > 0.0) || (self.ly - 2.0 * self.beta).abs() > 1e-12 * self.ly {
                    return Err(Error::Geometry(format!(
                        "stadium requires beta = ly/2 > 0 (beta = {}, ly = {})",
                        self.beta, self.ly
                    )));
                }
                Ok(())
            }
            Shape::RectangleWithWings => {
                if !(self.beta > 0.0) || self.beta > 0.5 * self.ly * (1.0 + 1e-12) {
                    return Err(Error::Geometry(format!(
                        "wing radius must lie in (0, ly/2] (beta = {}, ly = {})",
                        self.beta, self.ly
                    )));
                }
                Ok(())
            }
        }
    }

    /// Node-center inclusion test for the open domain.
    pub fn contains(&self, x: f64, y: f64) -> bool {
        if !(y > 0.0 && y < self.ly) {
            return false;
        }
        let x0 = self.x_min;
        let x1 = self.x_min + self.lx;
        if x > x0 && x < x1 {
            return true;
        }
        if !self.has_wings() {
            return false;
        }
        let yc = 0.5 * self.ly;
        let r2 = self.beta * self.beta;
        let dy2 = (y - yc) * (y - yc);
        (x - x0) * (x - x0) + dy2 < r2 || (x - x1) * (x - x1) + dy2 < r2
    }
}

/// Compact description of a mesh, exported as JSON.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct MeshSummary {
    pub shape: Shape,
    #[serde(rename = "Lx")]
    pub lx: f64,
    #[serde(rename = "Ly")]
    pub ly: f64,
    pub beta: f64,
    pub h: f64,
    pub hx: f64,
    pub hy: f64,
    pub n_interior: usize,
    pub area_estimate: f64,
    pub periodic_x: bool,
}

/// Neighbour slots in the 5-point stencil.
const WEST: usize = 0;
const EAST: usize = 1;
const SOUTH: usize = 2;
const NORTH: usize = 3;

#[derive(Debug, Clone)]
pub struct GridMesh {
    spec: DomainSpec,
    hx: f64,
    hy: f64,
    /// Number of lattice columns and rows (boundary lines included).
    cols: usize,
    rows: usize,
    /// x coordinate of lattice column 0.
    x_origin: f64,
    interior_mask: Vec<bool>,
    index_map: Vec<Option<usize>>,
    nodes: Vec<(usize, usize)>,
    neighbors: Vec<[Option<usize>; 4]>,
    periodic_x: bool,
}

/// Rectangle `[0, lx] × [0, ly]` with Dirichlet conditions on all sides.
pub fn build_rectangle(lx: f64, ly: f64, h: f64) -> Result<GridMesh> {
    build_rectangle_at(0.0, lx, ly, h)
}

/// Rectangle `[x_min, x_min + lx] × [0, ly]`.
///
/// The spacing is adjusted downward independently in each direction so
/// that both side lengths are whole multiples of it.
pub fn build_rectangle_at(x_min: f64, lx: f64, ly: f64, h: f64) -> Result<GridMesh> {
    check_spacing(h, lx.min(ly) / 4.0)?;
    build_rectangle_anisotropic(x_min, lx, ly, h, h)
}

/// Rectangle `[x_min, x_min + lx] × [0, ly]` with separate target spacings
/// in x and y. Useful for separable data that oscillates in one direction only.
pub fn build_rectangle_anisotropic(x_min: f64, lx: f64, ly: f64, hx: f64, hy: f64) -> Result<GridMesh> {
    let mut spec = DomainSpec::rectangle(lx, ly);
    spec.x_min = x_min;
    spec.validate()?;
    check_spacing(hx, lx / 4.0)?;
    check_spacing(hy, ly / 4.0)?;
    let nx = intervals(lx, hx);
    let ny = intervals(ly, hy);
    let hx = lx / nx as f64;
    let hy = ly / ny as f64;
    Ok(GridMesh::from_lattice(spec, hx, hy, nx + 1, ny + 1, x_min, false, |i, j| {
        i > 0 && i < nx && j > 0 && j < ny
    }))
}

/// Strip `[x_min, x_min + lx) × [0, ly]`, periodic in x and Dirichlet in y.
pub fn build_periodic_strip(x_min: f64, lx: f64, ly: f64, h: f64) -> Result<GridMesh> {
    let mut spec = DomainSpec::rectangle(lx, ly);
    spec.x_min = x_min;
    spec.validate()?;
    check_spacing(h, lx.min(ly) / 4.0)?;
    let nx = intervals(lx, h);
    let ny = intervals(ly, h);
    let hx = lx / nx as f64;
    let hy = ly / ny as f64;
    Ok(GridMesh::from_lattice(spec, hx, hy, nx, ny + 1, x_min, true, |_, j| {
        j > 0 && j < ny
    }))
}

/// Bunimovich stadium with half-height `beta`.
pub fn build_stadium(beta: f64, h: f64) -> Result<GridMesh> {
    build_winged(DomainSpec::stadium(beta), h)
}

/// Rectangle `[0, lx] × [0, ly]` with semicircular wings of radius `beta`.
pub fn build_rectangle_with_wings(lx: f64, ly: f64, beta: f64, h: f64) -> Result<GridMesh> {
    build_winged(DomainSpec::rectangle_with_wings(lx, ly, beta), h)
}

fn build_winged(spec: DomainSpec, h: f64) -> Result<GridMesh> {
    spec.validate()?;
    if !(h > 0.0) || h >= spec.beta / 4.0 {
        return Err(Error::Geometry(format!(
            "spacing h = {h} is too coarse; need 0 < h < beta/4 = {}",
            spec.beta / 4.0
        )));
    }
    let ny = intervals(spec.ly, h);
    let step = spec.ly / ny as f64;
    // lattice columns are anchored so that x = 0 is a lattice line
    let left = (spec.beta / step).ceil() as usize + 1;
    let right = ((spec.lx + spec.beta) / step).ceil() as usize + 1;
    let cols = left + right + 1;
    let x_origin = -(left as f64) * step;
    Ok(GridMesh::from_lattice(
        spec,
        step,
        step,
        cols,
        ny + 1,
        x_origin,
        false,
        |i, j| {
            let x = (i as f64 - left as f64) * step;
            let y = j as f64 * step;
            spec.contains(x, y)
        },
    ))
}

fn intervals(len: f64, h: f64) -> usize {
    ((len / h) - DIVISOR_SLACK).ceil().max(1.0) as usize
}

fn check_spacing(h: f64, max: f64) -> Result<()> {
    if !(h > 0.0) || h > max * (1.0 + DIVISOR_SLACK) {
        return Err(Error::Geometry(format!(
            "spacing h = {h} is too coarse (must not exceed {max})"
        )));
    }
    Ok(())
}

impl GridMesh {
    #[allow(clippy::too_many_arguments)]
    fn from_lattice(
        spec: DomainSpec,
        hx: f64,
        hy: f64,
        cols: usize,
        rows: usize,
        x_origin: f64,
        periodic_x: bool,
        inside: impl Fn(usize, usize) -> bool,
    ) -> Self {
        let mut interior_mask = vec![false; cols * rows];
        let mut index_map = vec![None; cols * rows];
        let mut nodes = Vec::new();
        for i in 0..cols {
            for j in 0..rows {
                if inside(i, j) {
                    let l = i * rows + j;
                    interior_mask[l] = true;
                    index_map[l] = Some(nodes.len());
                    nodes.push((i, j));
                }
            }
        }
        let lookup = |i: isize, j: isize| -> Option<usize> {
            let i = if periodic_x {
                i.rem_euclid(cols as isize)
            } else if i < 0 || i >= cols as isize {
                return None;
            } else {
                i
            };
            if j < 0 || j >= rows as isize {
                return None;
            }
            index_map[i as usize * rows + j as usize]
        };
        let neighbors = nodes
            .iter()
            .map(|&(i, j)| {
                let (i, j) = (i as isize, j as isize);
                let mut nb = [None; 4];
                nb[WEST] = lookup(i - 1, j);
                nb[EAST] = lookup(i + 1, j);
                nb[SOUTH] = lookup(i, j - 1);
                nb[NORTH] = lookup(i, j + 1);
                nb
            })
            .collect();
        Self { spec, hx, hy, cols, rows, x_origin, interior_mask, index_map, nodes, neighbors, periodic_x }
    }

    pub fn spec(&self) -> &DomainSpec {
        &self.spec
    }

    pub fn hx(&self) -> f64 {
        self.hx
    }

    pub fn hy(&self) -> f64 {
        self.hy
    }

    /// Largest of the two spacings.
    pub fn h(&self) -> f64 {
        self.hx.max(self.hy)
    }

    /// Quadrature weight of a single node.
    pub fn cell_area(&self) -> f64 {
        self.hx * self.hy
    }

    pub fn n_interior(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_periodic_x(&self) -> bool {
        self.periodic_x
    }

    pub fn lattice_shape(&self) -> (usize, usize) {
        (self.cols, self.rows)
    }

    pub fn interior_mask(&self) -> &[bool] {
        &self.interior_mask
    }

    /// Interior index of lattice node `(i, j)`, if it is interior.
    pub fn index_of(&self, i: usize, j: usize) -> Option<usize> {
        if i >= self.cols || j >= self.rows {
            return None;
        }
        self.index_map[i * self.rows + j]
    }

    /// Lattice position of interior node `idx`.
    pub fn lattice_of(&self, idx: usize) -> (usize, usize) {
        self.nodes[idx]
    }

    pub fn x_of_column(&self, i: usize) -> f64 {
        self.x_origin + i as f64 * self.hx
    }

    pub fn y_of_row(&self, j: usize) -> f64 {
        j as f64 * self.hy
    }

    pub fn coords(&self, idx: usize) -> (f64, f64) {
        let (i, j) = self.nodes[idx];
        (self.x_of_column(i), self.y_of_row(j))
    }

    /// Node-center inclusion test for an arbitrary point.
    pub fn contains_point(&self, x: f64, y: f64) -> bool {
        self.spec.contains(x, y)
    }

    /// For a plain (non-periodic) rectangle: interior counts `(Nx - 1, Ny - 1)`.
    pub fn rectangle_dims(&self) -> Option<(usize, usize)> {
        if self.spec.shape == Shape::Rectangle && !self.periodic_x {
            Some((self.cols - 2, self.rows - 2))
        } else {
            None
        }
    }

    /// Approximate area covered by the interior nodes.
    pub fn area_estimate(&self) -> f64 {
        self.n_interior() as f64 * self.cell_area()
    }

    pub fn summary(&self) -> MeshSummary {
        MeshSummary {
            shape: self.spec.shape,
            lx: self.spec.lx,
            ly: self.spec.ly,
            beta: self.spec.beta,
            h: self.h(),
            hx: self.hx,
            hy: self.hy,
            n_interior: self.n_interior(),
            area_estimate: self.area_estimate(),
            periodic_x: self.periodic_x,
        }
    }

    pub fn check_len(&self, len: usize) -> Result<()> {
        if len != self.n_interior() {
            return Err(Error::SizeMismatch { expected: self.n_interior(), got: len });
        }
        Ok(())
    }

    /// Applies the positive Dirichlet Laplacian `-Δ_h` (5-point stencil).
    pub fn apply_laplacian(&self, u: &[Complex64]) -> Result<Vec<Complex64>> {
        self.check_len(u.len())?;
        let mut out = vec![Complex64::new(0.0, 0.0); u.len()];
        self.laplacian_into(u, &mut out);
        Ok(out)
    }

    /// Unchecked `-Δ_h u`, written into `out`.
    pub fn laplacian_into(&self, u: &[Complex64], out: &mut [Complex64]) {
        let cx = 1.0 / (self.hx * self.hx);
        let cy = 1.0 / (self.hy * self.hy);
        let diag = 2.0 * (cx + cy);
        let pick = |nb: Option<usize>| nb.map_or(Complex64::new(0.0, 0.0), |k| u[k]);
        for (p, nb) in self.neighbors.iter().enumerate() {
            let horizontal = pick(nb[WEST]) + pick(nb[EAST]);
            let vertical = pick(nb[SOUTH]) + pick(nb[NORTH]);
            out[p] = u[p] * diag - horizontal * cx - vertical * cy;
        }
    }

    /// Real version of [`Self::laplacian_into`].
    pub fn laplacian_real_into(&self, u: &[f64], out: &mut [f64]) {
        let cx = 1.0 / (self.hx * self.hx);
        let cy = 1.0 / (self.hy * self.hy);
        let diag = 2.0 * (cx + cy);
        let pick = |nb: Option<usize>| nb.map_or(0.0, |k| u[k]);
        for (p, nb) in self.neighbors.iter().enumerate() {
            out[p] = diag * u[p]
                - cx * (pick(nb[WEST]) + pick(nb[EAST]))
                - cy * (pick(nb[SOUTH]) + pick(nb[NORTH]));
        }
    }

    /// Coordinate-format entries `(row, col, value)` of `-Δ_h`.
    pub fn laplacian_triplets(&self) -> Vec<(usize, usize, f64)> {
        let cx = 1.0 / (self.hx * self.hx);
        let cy = 1.0 / (self.hy * self.hy);
        let mut out = Vec::with_capacity(5 * self.n_interior());
        for (p, nb) in self.neighbors.iter().enumerate() {
            out.push((p, p, 2.0 * (cx + cy)));
            for (slot, &q) in nb.iter().enumerate() {
                if let Some(q) = q {
                    let c = if slot < SOUTH { cx } else { cy };
                    out.push((p, q, -c));
                }
            }
        }
        out
    }

    /// Dense `-Δ_h`; intended for small meshes and oracles.
    pub fn dense_laplacian(&self) -> Mat<f64> {
        let n = self.n_interior();
        let mut m = Mat::<f64>::zeros(n, n);
        for (r, c, v) in self.laplacian_triplets() {
            m[(r, c)] += v;
        }
        m
    }

    /// Weighted inner product `Σ u v̄ · hx·hy`.
    pub fn inner(&self, u: &[Complex64], v: &[Complex64]) -> Complex64 {
        let s: Complex64 = u.iter().zip(v).map(|(a, b)| a * b.conj()).sum();
        s * self.cell_area()
    }

    /// Weighted L² norm.
    pub fn norm(&self, u: &[Complex64]) -> f64 {
        (u.iter().map(|z| z.norm_sqr()).sum::<f64>() * self.cell_area()).sqrt()
    }

    /// Samples `f(x, y)` at every interior node.
    pub fn sample<F: Fn(f64, f64) -> Complex64>(&self, f: F) -> Vec<Complex64> {
        (0..self.n_interior())
            .map(|p| {
                let (x, y) = self.coords(p);
                f(x, y)
            })
            .collect()
    }

    /// Distinct lattice columns that contain interior nodes, in increasing x.
    pub fn columns(&self) -> Vec<usize> {
        let mut cols: Vec<usize> = self.nodes.iter().map(|&(i, _)| i).collect();
        cols.dedup();
        cols
    }
}
