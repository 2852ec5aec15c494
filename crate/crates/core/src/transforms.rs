//! Unitary DFT, time-frequency shifts, the STFT and its adjoint, and Gabor
//! frame machinery on Z_N.
//!
//! Conventions: `(F f)(ξ) = N^{-1/2} Σ_x f(x) e^{−2πi xξ/N}`,
//! `π(x, ω) f(t) = e^{2πi ωt/N} f(t − x)`, and
//! `V_g f(x, ω) = ⟨f, π(x, ω) g⟩` with the inner product conjugate-linear
//! in the second slot. On the full grid `V_g* V_g = N ‖g‖² Id`.

use std::cell::RefCell;
use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::array::{ComplexGrid, OperatorMatrix, Signal, TfMatrix};
use crate::error::{Result, TfqError};
use crate::phasespace::{Lattice, PhasePoint};

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

/// Unnormalized in-place DFT; `inverse` flips the exponent sign.
pub(crate) fn fft_raw(buf: &mut [Complex64], inverse: bool) {
    let n = buf.len();
    let plan = PLANNER.with(|p| {
        let mut p = p.borrow_mut();
        if inverse {
            p.plan_fft_inverse(n)
        } else {
            p.plan_fft_forward(n)
        }
    });
    plan.process(buf);
}

/// Unitary in-place DFT.
pub(crate) fn fft_unitary(buf: &mut [Complex64], inverse: bool) {
    fft_raw(buf, inverse);
    let s = 1.0 / (buf.len() as f64).sqrt();
    buf.iter_mut().for_each(|v| *v *= s);
}

/// Unnormalized 2-D DFT of an x-major N×N buffer.
pub(crate) fn fft2_raw(data: &mut [Complex64], n: usize, inverse: bool) {
    for row in data.chunks_mut(n) {
        fft_raw(row, inverse);
    }
    let mut col = vec![Complex64::new(0.0, 0.0); n];
    for j in 0..n {
        for i in 0..n {
            col[i] = data[i * n + j];
        }
        fft_raw(&mut col, inverse);
        for i in 0..n {
            data[i * n + j] = col[i];
        }
    }
}

#[inline]
pub fn unit_phase(k: i64, n: usize) -> Complex64 {
    // reduce first so large products keep full precision
    let r = k.rem_euclid(n as i64) as f64;
    Complex64::from_polar(1.0, 2.0 * PI * r / n as f64)
}

pub fn dft(f: &Signal) -> Signal {
    let mut v = f.as_slice().to_vec();
    fft_unitary(&mut v, false);
    Signal::from_fn(f.grid(), |i| v[i])
}

pub fn idft(f: &Signal) -> Signal {
    let mut v = f.as_slice().to_vec();
    fft_unitary(&mut v, true);
    Signal::from_fn(f.grid(), |i| v[i])
}

/// Unitary 2-D DFT of a table on Z_N².
pub fn dft2(s: &ComplexGrid) -> ComplexGrid {
    let mut out = s.clone();
    let n = s.n();
    fft2_raw(out.as_mut_slice(), n, false);
    out.scale(Complex64::new(1.0 / n as f64, 0.0))
}

pub fn idft2(s: &ComplexGrid) -> ComplexGrid {
    let mut out = s.clone();
    let n = s.n();
    fft2_raw(out.as_mut_slice(), n, true);
    out.scale(Complex64::new(1.0 / n as f64, 0.0))
}

/// `(π(z) f)(t) = e^{2πi ωt/N} f(t − x)`.
pub fn tf_shift(z: PhasePoint, f: &Signal) -> Signal {
    let n = f.len();
    Signal::from_fn(f.grid(), |t| {
        f.get((t + n - z.x % n) % n) * unit_phase((z.omega * t) as i64, n)
    })
}

fn check_window(g: &Signal) -> Result<()> {
    if g.is_zero() {
        Err(TfqError::ZeroWindow)
    } else {
        Ok(())
    }
}

/// `V_g f(x, ω) = Σ_y f(y) conj(g(y − x)) e^{−2πi yω/N}`.
pub fn stft(f: &Signal, g: &Signal) -> Result<TfMatrix> {
    check_window(g)?;
    g.check_len(f.len())?;
    let grid = f.grid();
    let n = grid.n();
    let mut out = ComplexGrid::zeros(grid);
    let mut row = vec![Complex64::new(0.0, 0.0); n];
    for x in 0..n {
        for (y, r) in row.iter_mut().enumerate() {
            *r = f.get(y) * g.get((y + n - x) % n).conj();
        }
        fft_raw(&mut row, false);
        out.as_mut_slice()[x * n..(x + 1) * n].copy_from_slice(&row);
    }
    Ok(out)
}

/// `V_g* F = Σ_z F(z) π(z) g`.
pub fn stft_adjoint(big_f: &TfMatrix, g: &Signal) -> Result<Signal> {
    g.check_len(big_f.n())?;
    let n = big_f.n();
    let mut acc = vec![Complex64::new(0.0, 0.0); n];
    let mut row = vec![Complex64::new(0.0, 0.0); n];
    for x in 0..n {
        row.copy_from_slice(&big_f.as_slice()[x * n..(x + 1) * n]);
        fft_raw(&mut row, true);
        for (t, a) in acc.iter_mut().enumerate() {
            *a += row[t] * g.get((t + n - x) % n);
        }
    }
    Ok(Signal::from_fn(big_f.grid(), |t| acc[t]))
}

/// Constant `c` with `c · V_g* V_g = ‖g‖² Id` on the full grid.
pub const fn inversion_constant(n: usize) -> f64 {
    1.0 / n as f64
}

/// Frame operator `S = Σ_{λ∈Λ} ⟨·, π(λ)φ⟩ π(λ)φ`.
pub fn frame_operator(phi: &Signal, lattice: Lattice) -> Result<OperatorMatrix> {
    check_window(phi)?;
    let grid = phi.grid();
    Lattice::new(lattice.a, lattice.b, grid)?;
    let n = grid.n();
    let mut s = DMatrix::<Complex64>::zeros(n, n);
    for lam in lattice.points(grid) {
        let v = tf_shift(lam, phi);
        let v = v.values();
        s += v * v.adjoint();
    }
    OperatorMatrix::from_kernel(s)
}

/// Spectral bounds of the frame operator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrameReport {
    pub lower_bound: f64,
    pub upper_bound: f64,
    pub condition_number: f64,
    pub is_frame: bool,
}

/// Relative threshold below which the lower frame bound counts as zero.
pub const FRAME_TOL: f64 = 1e-10;

pub fn frame_bounds(phi: &Signal, lattice: Lattice) -> Result<FrameReport> {
    let s = frame_operator(phi, lattice)?;
    let eig = s.into_kernel().symmetric_eigenvalues();
    let b = eig.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let a = eig.iter().cloned().fold(f64::INFINITY, f64::min).max(0.0);
    let is_frame = a > FRAME_TOL * b;
    Ok(FrameReport {
        lower_bound: if is_frame { a } else { 0.0 },
        upper_bound: b,
        condition_number: if is_frame { b / a } else { f64::INFINITY },
        is_frame,
    })
}

/// Canonical dual window `S⁻¹φ`.
pub fn canonical_dual(phi: &Signal, lattice: Lattice) -> Result<Signal> {
    if !frame_bounds(phi, lattice)?.is_frame {
        return Err(TfqError::FrameSingular);
    }
    let s = frame_operator(phi, lattice)?.into_kernel();
    let gamma = s
        .lu()
        .solve(phi.values())
        .ok_or(TfqError::FrameSingular)?;
    Ok(Signal::from_dvector(gamma))
}

/// Gabor coefficients `⟨f, π(λ)φ⟩` in lattice order.
pub fn gabor_analysis(f: &Signal, phi: &Signal, lattice: Lattice) -> Result<Vec<Complex64>> {
    check_window(phi)?;
    phi.check_len(f.len())?;
    let grid = f.grid();
    Lattice::new(lattice.a, lattice.b, grid)?;
    Ok(lattice
        .points(grid)
        .into_iter()
        .map(|lam| f.inner(&tf_shift(lam, phi)))
        .collect())
}

/// `Σ_λ c_λ π(λ)γ`.
pub fn gabor_synthesis(coeffs: &[Complex64], gamma: &Signal, lattice: Lattice) -> Result<Signal> {
    let grid = gamma.grid();
    let pts = Lattice::new(lattice.a, lattice.b, grid)?.points(grid);
    if coeffs.len() != pts.len() {
        return Err(TfqError::DimensionMismatch {
            expected: pts.len(),
            got: coeffs.len(),
        });
    }
    let mut acc = Signal::zeros(grid);
    for (c, lam) in coeffs.iter().zip(pts) {
        acc = acc.add(&tf_shift(lam, gamma).scale(*c));
    }
    Ok(acc)
}

/// Translation by `u` and modulation by `ζ` of a table on Z_N²:
/// `(π(u, ζ)Φ)(a) = e^{2πi ζ·a/N} Φ(a − u)`.
pub fn tf_shift2(u: PhasePoint, zeta: PhasePoint, phi: &ComplexGrid) -> ComplexGrid {
    let n = phi.n();
    ComplexGrid::from_fn(phi.grid(), |a1, a2| {
        phi.get((a1 + n - u.x) % n, (a2 + n - u.omega) % n)
            * unit_phase((zeta.x * a1 + zeta.omega * a2) as i64, n)
    })
}

/// STFT of a table on Z_N² against a window on Z_N²:
/// `V_Φ σ(u, ζ) = ⟨σ, π(u, ζ)Φ⟩`, stored `u`-major.
#[derive(Debug, Clone)]
pub struct PhaseStft {
    n: usize,
    data: Vec<Complex64>,
}

impl PhaseStft {
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, u: PhasePoint, zeta: PhasePoint) -> Complex64 {
        let n2 = self.n * self.n;
        self.data[(u.x * self.n + u.omega) * n2 + zeta.x * self.n + zeta.omega]
    }

    /// `sup_u |V(u, ζ)|` for every ζ, ζ-indexed row-major.
    pub fn sup_over_position(&self) -> Vec<f64> {
        let n2 = self.n * self.n;
        let mut out = vec![0.0; n2];
        for chunk in self.data.chunks(n2) {
            for (o, v) in out.iter_mut().zip(chunk) {
                *o = f64::max(*o, v.norm());
            }
        }
        out
    }

    /// `sup_ζ |V(u, ζ)|` for every u, u-indexed row-major.
    pub fn sup_over_frequency(&self) -> Vec<f64> {
        let n2 = self.n * self.n;
        self.data
            .chunks(n2)
            .map(|c| c.iter().map(|v| v.norm()).fold(0.0, f64::max))
            .collect()
    }
}

pub fn phase_stft(sigma: &ComplexGrid, window: &ComplexGrid) -> Result<PhaseStft> {
    if window.is_zero() {
        return Err(TfqError::ZeroWindow);
    }
    if window.n() != sigma.n() {
        return Err(TfqError::DimensionMismatch {
            expected: sigma.n(),
            got: window.n(),
        });
    }
    let n = sigma.n();
    let n2 = n * n;
    let mut data = vec![Complex64::new(0.0, 0.0); n2 * n2];
    data.par_chunks_mut(n2).enumerate().for_each(|(ui, chunk)| {
        let (u1, u2) = (ui / n, ui % n);
        for a1 in 0..n {
            for a2 in 0..n {
                chunk[a1 * n + a2] = sigma.get(a1, a2)
                    * window.get((a1 + n - u1) % n, (a2 + n - u2) % n).conj();
            }
        }
        fft2_raw(chunk, n, false);
    });
    Ok(PhaseStft { n, data })
}
