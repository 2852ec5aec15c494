//! Complex signals on Z_N, complex tables on Z_N², and N×N operator kernels.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Result, TfqError};
use crate::phasespace::{Grid, PhasePoint};

/// Complex vector of length N, a function on Z_N.
#[derive(Debug, Clone, PartialEq)]
pub struct Signal {
    values: DVector<Complex64>,
}

impl Signal {
    pub fn new(values: Vec<Complex64>) -> Result<Self> {
        if values.len() < 2 {
            return Err(TfqError::InvalidGrid(values.len()));
        }
        if values.iter().any(|v| !(v.re.is_finite() && v.im.is_finite())) {
            return Err(TfqError::InvalidArgument("signal has non-finite entries".into()));
        }
        Ok(Self {
            values: DVector::from_vec(values),
        })
    }

    pub(crate) fn from_dvector(values: DVector<Complex64>) -> Self {
        Self { values }
    }

    pub fn zeros(grid: Grid) -> Self {
        Self::from_dvector(DVector::zeros(grid.n()))
    }

    /// Unit impulse at `k`.
    pub fn delta(grid: Grid, k: usize) -> Self {
        let mut s = Self::zeros(grid);
        s.values[k % grid.n()] = Complex64::new(1.0, 0.0);
        s
    }

    pub fn from_fn(grid: Grid, f: impl Fn(usize) -> Complex64) -> Self {
        Self::from_dvector(DVector::from_fn(grid.n(), |i, _| f(i)))
    }

    /// Periodized Gaussian `Σ_k exp(−π((t − kN)/width)²)` centred at 0,
    /// normalized to unit ℓ² norm.
    pub fn gaussian(grid: Grid, width: f64) -> Self {
        let n = grid.n() as f64;
        let s = Self::from_fn(grid, |t| {
            let v: f64 = (-3..=3)
                .map(|k| {
                    let d = (t as f64 - k as f64 * n) / width;
                    (-std::f64::consts::PI * d * d).exp()
                })
                .sum();
            Complex64::new(v, 0.0)
        });
        s.normalized()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn grid(&self) -> Grid {
        Grid::new(self.len()).expect("signals have length >= 2")
    }

    pub fn values(&self) -> &DVector<Complex64> {
        &self.values
    }

    pub fn as_slice(&self) -> &[Complex64] {
        self.values.as_slice()
    }

    pub fn get(&self, i: usize) -> Complex64 {
        self.values[i % self.len()]
    }

    pub fn norm(&self) -> f64 {
        self.values.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|v| *v == Complex64::new(0.0, 0.0))
    }

    /// `⟨self, other⟩ = Σ self · conj(other)`.
    pub fn inner(&self, other: &Self) -> Complex64 {
        self.values
            .iter()
            .zip(other.values.iter())
            .map(|(a, b)| a * b.conj())
            .sum()
    }

    pub fn scale(&self, c: Complex64) -> Self {
        Self::from_dvector(&self.values * c)
    }

    pub fn normalized(&self) -> Self {
        let n = self.norm();
        if n == 0.0 {
            self.clone()
        } else {
            self.scale(Complex64::new(1.0 / n, 0.0))
        }
    }

    pub fn conj(&self) -> Self {
        Self::from_dvector(self.values.map(|v| v.conj()))
    }

    pub fn add(&self, other: &Self) -> Self {
        Self::from_dvector(&self.values + &other.values)
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self::from_dvector(&self.values - &other.values)
    }

    pub(crate) fn check_len(&self, n: usize) -> Result<()> {
        if self.len() != n {
            return Err(TfqError::DimensionMismatch {
                expected: n,
                got: self.len(),
            });
        }
        Ok(())
    }
}

/// Complex N×N table indexed `(x, ω)`, stored x-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexGrid {
    n: usize,
    data: Vec<Complex64>,
}

/// Short-time Fourier transform values `V_g f(x, ω)`.
pub type TfMatrix = ComplexGrid;

impl ComplexGrid {
    pub fn zeros(grid: Grid) -> Self {
        let n = grid.n();
        Self {
            n,
            data: vec![Complex64::new(0.0, 0.0); n * n],
        }
    }

    pub fn from_vec(grid: Grid, data: Vec<Complex64>) -> Result<Self> {
        let n = grid.n();
        if data.len() != n * n {
            return Err(TfqError::DimensionMismatch {
                expected: n * n,
                got: data.len(),
            });
        }
        if data.iter().any(|v| !(v.re.is_finite() && v.im.is_finite())) {
            return Err(TfqError::InvalidArgument("grid has non-finite entries".into()));
        }
        Ok(Self { n, data })
    }

    pub fn from_fn(grid: Grid, f: impl Fn(usize, usize) -> Complex64) -> Self {
        let n = grid.n();
        let data = (0..n * n).map(|i| f(i / n, i % n)).collect();
        Self { n, data }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn grid(&self) -> Grid {
        Grid::new(self.n).expect("grids have n >= 2")
    }

    #[inline]
    pub fn get(&self, x: usize, omega: usize) -> Complex64 {
        self.data[(x % self.n) * self.n + omega % self.n]
    }

    #[inline]
    pub fn at(&self, p: PhasePoint) -> Complex64 {
        self.data[p.x * self.n + p.omega]
    }

    #[inline]
    pub fn set(&mut self, x: usize, omega: usize, v: Complex64) {
        self.data[x * self.n + omega] = v;
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [Complex64] {
        &mut self.data
    }

    pub fn map(&self, f: impl Fn(Complex64) -> Complex64) -> Self {
        Self {
            n: self.n,
            data: self.data.iter().map(|v| f(*v)).collect(),
        }
    }

    pub fn scale(&self, c: Complex64) -> Self {
        self.map(|v| v * c)
    }

    pub fn conj(&self) -> Self {
        self.map(|v| v.conj())
    }

    pub fn add(&self, other: &Self) -> Self {
        Self {
            n: self.n,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self {
            n: self.n,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect(),
        }
    }

    /// `Σ self · conj(other)`.
    pub fn inner(&self, other: &Self) -> Complex64 {
        self.data.iter().zip(&other.data).map(|(a, b)| a * b.conj()).sum()
    }

    pub fn frobenius(&self) -> f64 {
        self.data.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|v| *v == Complex64::new(0.0, 0.0))
    }

    /// Precompose with a grid permutation: `result(p) = self(map(p))`.
    pub fn pullback(&self, map: impl Fn(PhasePoint) -> PhasePoint) -> Self {
        let grid = self.grid();
        Self::from_fn(grid, |x, omega| self.at(map(PhasePoint { x, omega })))
    }
}

/// N×N kernel `k(x, y)` acting on signals by `(Tf)(x) = Σ_y k(x, y) f(y)`.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorMatrix {
    kernel: DMatrix<Complex64>,
    tau: Option<f64>,
}

impl OperatorMatrix {
    pub fn from_kernel(kernel: DMatrix<Complex64>) -> Result<Self> {
        if kernel.nrows() != kernel.ncols() || kernel.nrows() < 2 {
            return Err(TfqError::InvalidArgument(format!(
                "kernel must be square with N >= 2 (got {}x{})",
                kernel.nrows(),
                kernel.ncols()
            )));
        }
        Ok(Self { kernel, tau: None })
    }

    pub(crate) fn with_tau(kernel: DMatrix<Complex64>, tau: Option<f64>) -> Self {
        Self { kernel, tau }
    }

    pub fn identity(grid: Grid) -> Self {
        Self::with_tau(DMatrix::identity(grid.n(), grid.n()), None)
    }

    /// Unitary DFT matrix `F[ξ, x] = N^{-1/2} e^{−2πi xξ/N}`.
    pub fn dft(grid: Grid) -> Self {
        let n = grid.n();
        let s = 1.0 / (n as f64).sqrt();
        let k = DMatrix::from_fn(n, n, |xi, x| {
            let ph = -2.0 * std::f64::consts::PI * ((xi * x) % n) as f64 / n as f64;
            Complex64::from_polar(s, ph)
        });
        Self::with_tau(k, None)
    }

    pub fn n(&self) -> usize {
        self.kernel.nrows()
    }

    pub fn grid(&self) -> Grid {
        Grid::new(self.n()).expect("kernels have n >= 2")
    }

    pub fn kernel(&self) -> &DMatrix<Complex64> {
        &self.kernel
    }

    pub fn into_kernel(self) -> DMatrix<Complex64> {
        self.kernel
    }

    /// Quantization parameter the operator was built with, if any.
    pub fn tau(&self) -> Option<f64> {
        self.tau
    }

    pub fn apply(&self, f: &Signal) -> Result<Signal> {
        f.check_len(self.n())?;
        Ok(Signal::from_dvector(&self.kernel * f.values()))
    }

    pub fn compose(&self, other: &Self) -> Self {
        Self::with_tau(&self.kernel * &other.kernel, None)
    }

    pub fn adjoint(&self) -> Self {
        Self::with_tau(self.kernel.adjoint(), None)
    }

    pub fn scale(&self, c: Complex64) -> Self {
        Self::with_tau(&self.kernel * c, self.tau)
    }

    pub fn add(&self, other: &Self) -> Self {
        Self::with_tau(&self.kernel + &other.kernel, None)
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self::with_tau(&self.kernel - &other.kernel, None)
    }

    /// Hilbert–Schmidt inner product `Σ k₁ conj(k₂)`.
    pub fn hs_inner(&self, other: &Self) -> Complex64 {
        self.kernel
            .iter()
            .zip(other.kernel.iter())
            .map(|(a, b)| a * b.conj())
            .sum()
    }

    pub fn hs_norm(&self) -> f64 {
        self.kernel.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Largest singular value.
    pub fn op_norm(&self) -> f64 {
        self.kernel
            .clone()
            .singular_values()
            .iter()
            .cloned()
            .fold(0.0, f64::max)
    }

    /// Ratio of extreme singular values (∞ when singular).
    pub fn condition_number(&self) -> f64 {
        let sv = self.kernel.clone().singular_values();
        let max = sv.iter().cloned().fold(0.0, f64::max);
        let min = sv.iter().cloned().fold(f64::INFINITY, f64::min);
        if min == 0.0 {
            f64::INFINITY
        } else {
            max / min
        }
    }

    pub fn try_inverse(&self) -> Option<Self> {
        self.kernel.clone().try_inverse().map(|k| Self::with_tau(k, None))
    }

    pub fn is_diagonal(&self, tol: f64) -> bool {
        let n = self.n();
        (0..n).all(|i| (0..n).all(|j| i == j || self.kernel[(i, j)].norm() <= tol))
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.kernel
            .iter()
            .zip(other.kernel.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}
