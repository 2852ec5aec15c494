//! Finite phase space Z_N × Z_N.
//!
//! Points are reduced to canonical representatives in `[0, N)`. Images of
//! grid points under non-integer linear maps (the convex combination
//! `𝒯_τ`, the scalings `ℬ_τ` and `𝒰_τ`) live on the real torus
//! `(ℝ mod N)²` and are carried as [`RealPhasePoint`]s.

use serde::{Deserialize, Serialize};

use crate::error::{Result, TfqError};

/// Ambient grid size `N` of the cyclic group Z_N.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Grid {
    n: usize,
}

impl Grid {
    pub fn new(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(TfqError::InvalidGrid(n));
        }
        Ok(Self { n })
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    /// Reduce an integer to its canonical representative in `[0, N)`.
    #[inline]
    pub fn wrap(&self, i: i64) -> usize {
        i.rem_euclid(self.n as i64) as usize
    }

    /// Symmetric representative in `(-N/2, N/2]`.
    #[inline]
    pub fn centered(&self, i: usize) -> i64 {
        let i = (i % self.n) as i64;
        let n = self.n as i64;
        if 2 * i > n {
            i - n
        } else {
            i
        }
    }

    /// All points of Z_N² in row-major `(x, ω)` order.
    pub fn points(&self) -> impl Iterator<Item = PhasePoint> + '_ {
        let n = self.n;
        (0..n * n).map(move |i| PhasePoint {
            x: i / n,
            omega: i % n,
        })
    }
}

/// Grid point `z = (x, ω)` with canonical components.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PhasePoint {
    pub x: usize,
    pub omega: usize,
}

impl PhasePoint {
    pub fn new(x: i64, omega: i64, grid: Grid) -> Self {
        Self {
            x: grid.wrap(x),
            omega: grid.wrap(omega),
        }
    }

    pub fn add(self, other: Self, grid: Grid) -> Self {
        Self::new(
            self.x as i64 + other.x as i64,
            self.omega as i64 + other.omega as i64,
            grid,
        )
    }

    pub fn sub(self, other: Self, grid: Grid) -> Self {
        Self::new(
            self.x as i64 - other.x as i64,
            self.omega as i64 - other.omega as i64,
            grid,
        )
    }

    pub fn neg(self, grid: Grid) -> Self {
        Self::new(-(self.x as i64), -(self.omega as i64), grid)
    }

    /// Row-major index into an N×N table.
    #[inline]
    pub fn index(&self, grid: Grid) -> usize {
        self.x * grid.n() + self.omega
    }

    pub fn from_index(i: usize, grid: Grid) -> Self {
        Self {
            x: i / grid.n(),
            omega: i % grid.n(),
        }
    }

    pub fn to_real(self) -> RealPhasePoint {
        RealPhasePoint {
            x: self.x as f64,
            omega: self.omega as f64,
        }
    }
}

/// Point of the real torus `(ℝ mod N)²`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RealPhasePoint {
    pub x: f64,
    pub omega: f64,
}

/// Distance below which a real coordinate is treated as an exact integer.
const SNAP_TOL: f64 = 1e-9;

impl RealPhasePoint {
    pub fn new(x: f64, omega: f64, grid: Grid) -> Self {
        let n = grid.n() as f64;
        Self {
            x: reduce(x, n),
            omega: reduce(omega, n),
        }
    }

    /// The grid point this coincides with, if both coordinates are integral.
    pub fn as_grid_point(&self, grid: Grid) -> Option<PhasePoint> {
        let rx = self.x.round();
        let ro = self.omega.round();
        if (self.x - rx).abs() < SNAP_TOL && (self.omega - ro).abs() < SNAP_TOL {
            Some(PhasePoint::new(rx as i64, ro as i64, grid))
        } else {
            None
        }
    }

    /// Nearest grid point; ties go to the smaller canonical representative.
    pub fn nearest_grid_point(&self, grid: Grid) -> PhasePoint {
        PhasePoint {
            x: nearest_index(self.x, grid),
            omega: nearest_index(self.omega, grid),
        }
    }
}

fn reduce(t: f64, n: f64) -> f64 {
    let r = t.rem_euclid(n);
    // rem_euclid can return n itself for tiny negative inputs
    if r >= n {
        0.0
    } else {
        r
    }
}

fn nearest_index(t: f64, grid: Grid) -> usize {
    let n = grid.n();
    let t = reduce(t, n as f64);
    let lo = t.floor();
    let frac = t - lo;
    let lo_i = lo as usize % n;
    let hi_i = (lo_i + 1) % n;
    if (frac - 0.5).abs() < SNAP_TOL {
        lo_i.min(hi_i)
    } else if frac < 0.5 {
        lo_i
    } else {
        hi_i
    }
}

/// Periodic substitute for `|z|`: Euclidean norm of the wrapped distances.
pub fn wrapped_norm(z: RealPhasePoint, grid: Grid) -> f64 {
    let n = grid.n() as f64;
    let d = |t: f64| {
        let r = reduce(t, n);
        r.min(n - r)
    };
    d(z.x).hypot(d(z.omega))
}

/// Wrapped distance of a single coordinate to the origin of Z_N.
pub fn wrapped_abs(t: f64, grid: Grid) -> f64 {
    let n = grid.n() as f64;
    let r = reduce(t, n);
    r.min(n - r)
}

/// Weight on the phase plane.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Weight {
    /// `v_s(z) = (1 + |z|²)^{s/2}` with the wrapped norm.
    Polynomial { s: f64 },
    /// Explicit positive values on Z_N², row-major `(x, ω)`.
    Table { n: usize, values: Vec<f64> },
}

impl Weight {
    pub fn polynomial(s: f64) -> Result<Self> {
        if !(s.is_finite() && s >= 0.0) {
            return Err(TfqError::InvalidArgument(format!(
                "weight order must be a finite s >= 0 (got {s})"
            )));
        }
        Ok(Weight::Polynomial { s })
    }

    pub fn unit() -> Self {
        Weight::Polynomial { s: 0.0 }
    }

    pub fn table(grid: Grid, values: Vec<f64>) -> Result<Self> {
        let n = grid.n();
        if values.len() != n * n {
            return Err(TfqError::DimensionMismatch {
                expected: n * n,
                got: values.len(),
            });
        }
        if values.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
            return Err(TfqError::InvalidArgument(
                "table weight values must be positive".into(),
            ));
        }
        Ok(Weight::Table { n, values })
    }

    pub fn eval(&self, z: RealPhasePoint, grid: Grid) -> Result<f64> {
        match self {
            Weight::Polynomial { s } => Ok(poly_weight(*s, wrapped_norm(z, grid))),
            Weight::Table { n, values } => {
                if *n != grid.n() {
                    return Err(TfqError::DimensionMismatch {
                        expected: *n,
                        got: grid.n(),
                    });
                }
                let p = z.as_grid_point(grid).ok_or(TfqError::TableWeightOffGrid)?;
                Ok(values[p.index(grid)])
            }
        }
    }

    /// Evaluation at a grid point never leaves the table's domain.
    pub fn at(&self, z: PhasePoint, grid: Grid) -> f64 {
        match self {
            Weight::Polynomial { s } => poly_weight(*s, wrapped_norm(z.to_real(), grid)),
            Weight::Table { values, .. } => values[z.index(grid)],
        }
    }

    /// Tabulate `v ∘ A` on the grid, with `A` applied on the real torus.
    pub fn composed(&self, map: &LinearMap, grid: Grid) -> Result<Vec<f64>> {
        grid.points()
            .map(|z| self.eval(map.apply(z.to_real(), grid), grid))
            .collect()
    }

    /// Tabulate `v` on the grid.
    pub fn tabulate(&self, grid: Grid) -> Vec<f64> {
        grid.points().map(|z| self.at(z, grid)).collect()
    }
}

fn poly_weight(s: f64, r: f64) -> f64 {
    if s == 0.0 {
        1.0
    } else {
        (1.0 + r * r).powf(s / 2.0)
    }
}

/// One-dimensional weight on Z_N (used by the amalgam norms).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum LineWeight {
    Polynomial { s: f64 },
    Table(Vec<f64>),
}

impl LineWeight {
    pub fn unit() -> Self {
        LineWeight::Polynomial { s: 0.0 }
    }

    pub fn at(&self, t: usize, grid: Grid) -> f64 {
        match self {
            LineWeight::Polynomial { s } => poly_weight(*s, wrapped_abs(t as f64, grid)),
            LineWeight::Table(v) => v[t],
        }
    }
}

/// `J(z₁, z₂) = (z₂, −z₁)`.
pub fn apply_j(z: PhasePoint, grid: Grid) -> PhasePoint {
    PhasePoint::new(z.omega as i64, -(z.x as i64), grid)
}

/// `J⁻¹(z₁, z₂) = (−z₂, z₁)`.
pub fn apply_j_inv(z: PhasePoint, grid: Grid) -> PhasePoint {
    PhasePoint::new(-(z.omega as i64), z.x as i64, grid)
}

/// `𝒯_τ(z, w) = ((1−τ)z₁ + τw₁, τz₂ + (1−τ)w₂)` on canonical representatives.
pub fn apply_ttau(z: PhasePoint, w: PhasePoint, tau: f64, grid: Grid) -> RealPhasePoint {
    RealPhasePoint::new(
        (1.0 - tau) * z.x as f64 + tau * w.x as f64,
        tau * z.omega as f64 + (1.0 - tau) * w.omega as f64,
        grid,
    )
}

fn check_open_tau(tau: f64) -> Result<()> {
    if !(tau.is_finite() && tau > 0.0 && tau < 1.0) {
        return Err(TfqError::SingularEndpoint);
    }
    Ok(())
}

/// `ℬ_τ z = (z₁/(1−τ), z₂/τ)`.
pub fn apply_btau(z: RealPhasePoint, tau: f64, grid: Grid) -> Result<RealPhasePoint> {
    Ok(LinearMap::btau(tau)?.apply(z, grid))
}

/// `𝒰_τ z = (−τ z₁/(1−τ), −(1−τ) z₂/τ)`.
pub fn apply_utau(z: RealPhasePoint, tau: f64, grid: Grid) -> Result<RealPhasePoint> {
    Ok(LinearMap::utau(tau)?.apply(z, grid))
}

/// Real 2×2 linear map of the phase plane, applied modulo N.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearMap {
    pub m: [[f64; 2]; 2],
}

impl LinearMap {
    pub const fn new(m: [[f64; 2]; 2]) -> Self {
        Self { m }
    }

    pub const fn identity() -> Self {
        Self::new([[1.0, 0.0], [0.0, 1.0]])
    }

    pub const fn neg_identity() -> Self {
        Self::new([[-1.0, 0.0], [0.0, -1.0]])
    }

    pub const fn j() -> Self {
        Self::new([[0.0, 1.0], [-1.0, 0.0]])
    }

    pub const fn j_inv() -> Self {
        Self::new([[0.0, -1.0], [1.0, 0.0]])
    }

    pub const fn diagonal(a: f64, b: f64) -> Self {
        Self::new([[a, 0.0], [0.0, b]])
    }

    pub fn btau(tau: f64) -> Result<Self> {
        check_open_tau(tau)?;
        Ok(Self::diagonal(1.0 / (1.0 - tau), 1.0 / tau))
    }

    pub fn utau(tau: f64) -> Result<Self> {
        check_open_tau(tau)?;
        Ok(Self::diagonal(-tau / (1.0 - tau), -(1.0 - tau) / tau))
    }

    pub fn apply(&self, z: RealPhasePoint, grid: Grid) -> RealPhasePoint {
        let [[a, b], [c, d]] = self.m;
        RealPhasePoint::new(a * z.x + b * z.omega, c * z.x + d * z.omega, grid)
    }

    pub fn apply_grid(&self, z: PhasePoint, grid: Grid) -> RealPhasePoint {
        self.apply(z.to_real(), grid)
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &Self) -> Self {
        let a = self.m;
        let b = other.m;
        let mut m = [[0.0; 2]; 2];
        for (i, row) in m.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                *v = a[i][0] * b[0][j] + a[i][1] * b[1][j];
            }
        }
        Self { m }
    }

    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        self.m
            .iter()
            .flatten()
            .zip(other.m.iter().flatten())
            .all(|(a, b)| (a - b).abs() <= tol)
    }
}

/// Separable lattice `aZ × bZ ⊂ Z_N²`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Lattice {
    pub a: usize,
    pub b: usize,
}

impl Lattice {
    pub fn new(a: usize, b: usize, grid: Grid) -> Result<Self> {
        if a == 0 || b == 0 || grid.n() % a != 0 || grid.n() % b != 0 {
            return Err(TfqError::LatticeMismatch);
        }
        Ok(Self { a, b })
    }

    pub fn full() -> Self {
        Self { a: 1, b: 1 }
    }

    pub fn len(&self, grid: Grid) -> usize {
        (grid.n() / self.a) * (grid.n() / self.b)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Row-major enumeration of `{(ja, kb)}`.
    pub fn points(&self, grid: Grid) -> Vec<PhasePoint> {
        let n = grid.n();
        let mut out = Vec::with_capacity(self.len(grid));
        for x in (0..n).step_by(self.a) {
            for omega in (0..n).step_by(self.b) {
                out.push(PhasePoint { x, omega });
            }
        }
        out
    }
}

/// Checked enumeration for raw steps.
pub fn lattice_points(a: usize, b: usize, grid: Grid) -> Result<Vec<PhasePoint>> {
    Ok(Lattice::new(a, b, grid)?.points(grid))
}
