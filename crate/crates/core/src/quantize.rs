//! τ-quantization on Z_N².
//!
//! `Op_τ(σ) = (1/N) Σ_{ω,u} σ̂(ω,u) c_τ(ω,u) T_{−u} M_ω`, where `σ̂` is the
//! unitary 2-D DFT of σ and `c_τ` is the chirp `e^{−2πi(1−τ)ωu/N}` evaluated
//! on centred representatives. τ enters only through that scalar phase, so
//! every real τ in `[0, 1]` is admissible.
//!
//! On even grids the Nyquist index `h = N/2` has no centred sign. The chirp
//! there is fixed so that the family stays symplectically covariant
//! (`F Op_τ(σ) F⁻¹ = Op_{1−τ}(σ∘J⁻¹)`), closed under adjoints
//! (`Op_τ(σ)* = Op_{1−τ}(σ̄)`) and unimodular:
//!
//! * row `ω = h`:    `e^{−iπ(1−τ)|ũ|}`
//! * column `u = h`: `e^{+iπ(1−τ)|ω̃|}`
//! * corner:         `1` when `h` is even, `e^{−iπ(1−τ)h}` otherwise.
//!
//! At τ ∈ {0, 1} these reduce to the exact grid phases. Covariance holds
//! exactly for odd N and for N ≡ 0 (mod 4); for N ≡ 2 (mod 4) it fails on
//! the corner term at non-endpoint τ.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::array::{ComplexGrid, OperatorMatrix, Signal};
use crate::error::{check_tau, Result};
use crate::phasespace::{Grid, PhasePoint};
use crate::transforms::{dft, dft2, fft_raw, idft2, unit_phase};

/// Symbol σ(x, ω) on Z_N².
pub type Symbol = ComplexGrid;

/// Spreading coefficients σ̂(ω, u), the unitary 2-D DFT of a symbol.
pub type SpreadingFunction = ComplexGrid;

/// Quantization phase `c_τ(ω, u)`.
pub fn chirp(omega: usize, u: usize, tau: f64, grid: Grid) -> Complex64 {
    let n = grid.n();
    let (om, uu) = (omega % n, u % n);
    let a = 1.0 - tau;
    let h = n / 2;
    if n % 2 == 0 && (om == h || uu == h) {
        let ph = if om == h && uu == h {
            if h % 2 == 0 {
                0.0
            } else {
                -PI * a * h as f64
            }
        } else if om == h {
            -PI * a * grid.centered(uu).unsigned_abs() as f64
        } else {
            PI * a * grid.centered(om).unsigned_abs() as f64
        };
        return Complex64::from_polar(1.0, ph);
    }
    let prod = (grid.centered(om) * grid.centered(uu)) as f64;
    Complex64::from_polar(1.0, -2.0 * PI * a * prod / n as f64)
}

pub fn spreading_function(sigma: &Symbol) -> SpreadingFunction {
    dft2(sigma)
}

pub fn symbol_from_spreading(s: &SpreadingFunction) -> Symbol {
    idft2(s)
}

/// `Op_τ(σ)` as an N×N kernel.
pub fn op_tau(sigma: &Symbol, tau: f64) -> Result<OperatorMatrix> {
    check_tau(tau)?;
    let grid = sigma.grid();
    let n = grid.n();
    let spread = spreading_function(sigma);
    let mut kernel = DMatrix::<Complex64>::zeros(n, n);
    let mut col = vec![Complex64::new(0.0, 0.0); n];
    let inv_n = 1.0 / n as f64;
    for u in 0..n {
        for (omega, c) in col.iter_mut().enumerate() {
            *c = spread.get(omega, u)
                * chirp(omega, u, tau, grid)
                * unit_phase((omega * u) as i64, n);
        }
        fft_raw(&mut col, true);
        for (x, c) in col.iter().enumerate() {
            kernel[(x, (x + u) % n)] = c * inv_n;
        }
    }
    Ok(OperatorMatrix::with_tau(kernel, Some(tau)))
}

/// Inverse of [`op_tau`]: the τ-symbol of an arbitrary operator.
pub fn dequantize(op: &OperatorMatrix, tau: f64) -> Result<Symbol> {
    check_tau(tau)?;
    let grid = op.grid();
    let n = grid.n();
    let k = op.kernel();
    let mut spread = ComplexGrid::zeros(grid);
    let mut col = vec![Complex64::new(0.0, 0.0); n];
    for u in 0..n {
        for (x, c) in col.iter_mut().enumerate() {
            *c = k[(x, (x + u) % n)];
        }
        fft_raw(&mut col, false);
        for (omega, c) in col.iter().enumerate() {
            let v = c * unit_phase(-((omega * u) as i64), n) / chirp(omega, u, tau, grid);
            spread.set(omega, u, v);
        }
    }
    Ok(symbol_from_spreading(&spread))
}

/// Symbol `σ₂` with `Op_{τ₂}(σ₂) = Op_{τ₁}(σ)`.
pub fn convert_symbol(sigma: &Symbol, tau1: f64, tau2: f64) -> Result<Symbol> {
    check_tau(tau1)?;
    check_tau(tau2)?;
    let grid = sigma.grid();
    let spread = spreading_function(sigma);
    let converted = SpreadingFunction::from_fn(grid, |omega, u| {
        spread.get(omega, u) * chirp(omega, u, tau1, grid) / chirp(omega, u, tau2, grid)
    });
    Ok(symbol_from_spreading(&converted))
}

/// Cross τ-Wigner distribution, fixed by the duality
/// `⟨Op_τ(σ) f, g⟩ = ⟨σ, W_τ(g, f)⟩` for every σ.
pub fn tau_wigner(g: &Signal, f: &Signal, tau: f64) -> Result<Symbol> {
    check_tau(tau)?;
    f.check_len(g.len())?;
    let grid = g.grid();
    let n = grid.n();
    let mut adj = ComplexGrid::zeros(grid);
    let mut col = vec![Complex64::new(0.0, 0.0); n];
    let inv_n = 1.0 / n as f64;
    for u in 0..n {
        for (x, c) in col.iter_mut().enumerate() {
            *c = g.get(x) * f.get(x + u).conj();
        }
        fft_raw(&mut col, false);
        for (omega, c) in col.iter().enumerate() {
            let ph = chirp(omega, u, tau, grid) * unit_phase((omega * u) as i64, n);
            adj.set(omega, u, c * inv_n * ph.conj());
        }
    }
    Ok(idft2(&adj))
}

/// Kernel from the integral form
/// `k(x, y) = (1/N) Σ_ξ e^{2πi(x−y)ξ/N} σ((1−τ)x + τy, ξ)`,
/// defined only where the evaluation point is on the grid (τ ∈ {0, 1}).
pub fn endpoint_kernel(sigma: &Symbol, tau: f64) -> Result<OperatorMatrix> {
    let right = endpoint_side(tau)?;
    let grid = sigma.grid();
    let n = grid.n();
    let k = DMatrix::from_fn(n, n, |x, y| {
        let at = if right { y } else { x };
        (0..n)
            .map(|xi| unit_phase(((x + n - y) * xi) as i64, n) * sigma.get(at, xi))
            .sum::<Complex64>()
            / n as f64
    });
    Ok(OperatorMatrix::with_tau(k, Some(tau)))
}

/// Direct grid formula for the Rihaczek (τ=0) and conjugate-Rihaczek (τ=1)
/// distributions in the duality normalization:
/// `W₀(g, f)(x, ω) = N^{-1/2} g(x) conj(f̂(ω)) e^{−2πi xω/N}` and
/// `W₁(g, f)(x, ω) = N^{-1/2} conj(f(x)) ĝ(ω) e^{2πi xω/N}`.
pub fn endpoint_wigner(g: &Signal, f: &Signal, tau: f64) -> Result<Symbol> {
    let right = endpoint_side(tau)?;
    f.check_len(g.len())?;
    let grid = g.grid();
    let n = grid.n();
    let s = 1.0 / (n as f64).sqrt();
    Ok(if right {
        let gh = dft(g);
        Symbol::from_fn(grid, |x, omega| {
            f.get(x).conj() * gh.get(omega) * unit_phase((x * omega) as i64, n) * s
        })
    } else {
        let fh = dft(f);
        Symbol::from_fn(grid, |x, omega| {
            g.get(x) * fh.get(omega).conj() * unit_phase(-((x * omega) as i64), n) * s
        })
    })
}

fn endpoint_side(tau: f64) -> Result<bool> {
    check_tau(tau)?;
    if tau == 0.0 {
        Ok(false)
    } else if tau == 1.0 {
        Ok(true)
    } else {
        Err(crate::error::TfqError::InvalidArgument(format!(
            "integral form is grid-valued only at τ ∈ {{0, 1}} (got {tau})"
        )))
    }
}

/// Weyl symbol of `Op_W(σ₁) Op_W(σ₂)`.
pub fn twisted_product(s1: &Symbol, s2: &Symbol) -> Result<Symbol> {
    let prod = op_tau(s1, 0.5)?.compose(&op_tau(s2, 0.5)?);
    dequantize(&prod, 0.5)
}

/// `σ ∘ J⁻¹`, i.e. `(x, ω) ↦ σ(−ω, x)`.
pub fn compose_j_inv(sigma: &Symbol) -> Symbol {
    let grid = sigma.grid();
    sigma.pullback(|p| crate::phasespace::apply_j_inv(p, grid))
}

/// Constant symbol.
pub fn constant_symbol(grid: Grid, c: Complex64) -> Symbol {
    Symbol::from_fn(grid, |_, _| c)
}

/// Point mass at the origin of Z_N².
pub fn delta_symbol(grid: Grid) -> Symbol {
    let mut s = Symbol::zeros(grid);
    s.set(0, 0, Complex64::new(1.0, 0.0));
    s
}

/// Symbol supported at a single phase-space point.
pub fn point_symbol(grid: Grid, p: PhasePoint) -> Symbol {
    let mut s = Symbol::zeros(grid);
    s.set(p.x, p.omega, Complex64::new(1.0, 0.0));
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::{random_grid, random_signal, seeded};
    use crate::transforms::idft;

    const TAUS: [f64; 6] = [0.0, 0.25, 1.0 / 3.0, 0.5, 0.7, 1.0];

    fn grid(n: usize) -> Grid {
        Grid::new(n).unwrap()
    }

    /// Explicit `T_{−u} M_ω` matrix.
    fn shift_matrix(omega: usize, u: usize, n: usize) -> OperatorMatrix {
        let mut k = DMatrix::<Complex64>::zeros(n, n);
        for x in 0..n {
            k[(x, (x + u) % n)] = unit_phase((omega * (x + u)) as i64, n);
        }
        OperatorMatrix::from_kernel(k).unwrap()
    }

    /// Dequantization through Hilbert–Schmidt projections onto the shift
    /// basis, independent of the FFT path.
    fn dequantize_hs(op: &OperatorMatrix, tau: f64) -> Symbol {
        let g = op.grid();
        let n = g.n();
        let spread = ComplexGrid::from_fn(g, |omega, u| {
            op.hs_inner(&shift_matrix(omega, u, n)) / chirp(omega, u, tau, g)
        });
        idft2(&spread)
    }

    #[test]
    fn chirp_is_unimodular_and_trivial_on_axes() {
        for n in [4usize, 5, 6, 8] {
            let g = grid(n);
            for tau in TAUS {
                for w in 0..n {
                    for u in 0..n {
                        let c = chirp(w, u, tau, g);
                        assert!((c.norm() - 1.0).abs() < 1e-14);
                        if w == 0 || u == 0 {
                            assert!((c - 1.0).norm() < 1e-14);
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn chirp_endpoints_are_grid_phases() {
        let g = grid(8);
        for w in 0..8 {
            for u in 0..8 {
                assert!((chirp(w, u, 1.0, g) - 1.0).norm() < 1e-13);
                assert!((chirp(w, u, 0.0, g) - unit_phase(-((w * u) as i64), 8)).norm() < 1e-13);
            }
        }
    }

    #[test]
    fn constant_symbol_gives_identity() {
        for tau in TAUS {
            let g = grid(8);
            let op = op_tau(&constant_symbol(g, Complex64::new(1.0, 0.0)), tau).unwrap();
            assert!(op.max_abs_diff(&OperatorMatrix::identity(g)) < 1e-12);
            let back = dequantize(&OperatorMatrix::identity(g), tau).unwrap();
            assert!(back.max_abs_diff(&constant_symbol(g, Complex64::new(1.0, 0.0))) < 1e-12);
        }
    }

    #[test]
    fn position_symbol_is_multiplication() {
        let g = grid(8);
        let mut r = seeded(11);
        let m = random_signal(g, &mut r);
        let sigma = Symbol::from_fn(g, |x, _| m.get(x));
        for tau in TAUS {
            let op = op_tau(&sigma, tau).unwrap();
            assert!(op.is_diagonal(1e-12));
            for x in 0..8 {
                assert!((op.kernel()[(x, x)] - m.get(x)).norm() < 1e-12);
            }
            let back = dequantize(&op, tau).unwrap();
            assert!(back.max_abs_diff(&sigma) < 1e-12);
        }
    }

    #[test]
    fn frequency_symbol_is_fourier_multiplier() {
        let g = grid(8);
        let mut r = seeded(12);
        let m = random_signal(g, &mut r);
        let sigma = Symbol::from_fn(g, |_, omega| m.get(omega));
        let f = random_signal(g, &mut r);
        let fh = dft(&f);
        let want = idft(&Signal::from_fn(g, |k| m.get(k) * fh.get(k)));
        for tau in TAUS {
            let got = op_tau(&sigma, tau).unwrap().apply(&f).unwrap();
            assert!(got.sub(&want).norm() < 1e-12);
        }
    }

    #[test]
    fn out_of_range_tau() {
        let g = grid(4);
        let s = delta_symbol(g);
        for tau in [-0.1, 1.5, f64::NAN] {
            let e = op_tau(&s, tau).unwrap_err();
            assert_eq!(e.to_string(), "quantization parameter out of range");
        }
    }

    #[test]
    fn round_trip_and_hs_oracle() {
        let mut r = seeded(13);
        for n in [4usize, 8, 16] {
            let g = grid(n);
            for tau in TAUS {
                let sigma = random_grid(g, &mut r);
                let op = op_tau(&sigma, tau).unwrap();
                let back = dequantize(&op, tau).unwrap();
                assert!(back.sub(&sigma).frobenius() <= 1e-10 * sigma.frobenius());
                if n <= 8 {
                    let hs = dequantize_hs(&op, tau);
                    assert!(hs.sub(&sigma).frobenius() <= 1e-10 * sigma.frobenius());
                }
            }
        }
    }

    #[test]
    fn endpoint_kernels_match_integral_form() {
        let mut r = seeded(14);
        for n in [4usize, 8, 16] {
            let sigma = random_grid(grid(n), &mut r);
            for tau in [0.0, 1.0] {
                let a = op_tau(&sigma, tau).unwrap();
                let b = endpoint_kernel(&sigma, tau).unwrap();
                assert!(a.max_abs_diff(&b) < 1e-12);
            }
        }
        assert!(endpoint_kernel(&delta_symbol(grid(4)), 0.5).is_err());
    }

    #[test]
    fn convert_symbol_examples() {
        let g = grid(8);
        let mut r = seeded(15);
        let sigma = random_grid(g, &mut r);
        assert!(convert_symbol(&sigma, 0.3, 0.3).unwrap().max_abs_diff(&sigma) < 1e-12);
        let one = constant_symbol(g, Complex64::new(1.0, 0.0));
        for (t1, t2) in [(0.0, 1.0), (0.2, 0.9), (0.5, 0.25)] {
            assert!(convert_symbol(&one, t1, t2).unwrap().max_abs_diff(&one) < 1e-12);
            let conv = convert_symbol(&sigma, t1, t2).unwrap();
            let via_op = dequantize(&op_tau(&sigma, t1).unwrap(), t2).unwrap();
            assert!(conv.max_abs_diff(&via_op) < 1e-10);
            let a = op_tau(&conv, t2).unwrap();
            let b = op_tau(&sigma, t1).unwrap();
            assert!(a.max_abs_diff(&b) < 1e-10);
        }
    }

    #[test]
    fn wigner_duality() {
        let mut r = seeded(16);
        let g = grid(8);
        for tau in [0.0, 0.3, 0.5, 1.0] {
            let sigma = random_grid(g, &mut r);
            let f = random_signal(g, &mut r);
            let h = random_signal(g, &mut r);
            let lhs = op_tau(&sigma, tau).unwrap().apply(&f).unwrap().inner(&h);
            let rhs = sigma.inner(&tau_wigner(&h, &f, tau).unwrap());
            assert!((lhs - rhs).norm() < 1e-10);
        }
    }

    #[test]
    fn wigner_endpoints_match_direct_formula() {
        let mut r = seeded(17);
        let g = grid(8);
        let f = random_signal(g, &mut r);
        let h = random_signal(g, &mut r);
        for tau in [0.0, 1.0] {
            let a = tau_wigner(&h, &f, tau).unwrap();
            let b = endpoint_wigner(&h, &f, tau).unwrap();
            assert!(a.max_abs_diff(&b) < 1e-12);
        }
    }

    #[test]
    fn wigner_marginal_constant_from_impulse() {
        // δ₀ at N=4: Σ_ω W_{1/2}(δ,δ)(0,ω) = 1 = |δ(0)|², so the constant is 1.
        let g = grid(4);
        let d = Signal::delta(g, 0);
        let w = tau_wigner(&d, &d, 0.5).unwrap();
        let m0: Complex64 = (0..4).map(|o| w.get(0, o)).sum();
        assert!((m0 - 1.0).norm() < 1e-12);
        let mut r = seeded(18);
        let f = random_signal(grid(8), &mut r);
        for tau in [0.0, 0.3, 0.5, 1.0] {
            let w = tau_wigner(&f, &f, tau).unwrap();
            for x in 0..8 {
                let m: Complex64 = (0..8).map(|o| w.get(x, o)).sum();
                assert!((m - f.get(x).norm_sqr()).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn wigner_of_zero_is_zero() {
        let g = grid(8);
        let f = Signal::gaussian(g, 2.0);
        assert!(tau_wigner(&Signal::zeros(g), &f, 0.3).unwrap().is_zero());
        assert!(tau_wigner(&f, &Signal::zeros(g), 0.3).unwrap().is_zero());
    }

    #[test]
    fn twisted_product_laws() {
        let g = grid(8);
        let mut r = seeded(19);
        let one = constant_symbol(g, Complex64::new(1.0, 0.0));
        let a = random_grid(g, &mut r);
        let b = random_grid(g, &mut r);
        let c = random_grid(g, &mut r);
        assert!(twisted_product(&a, &one).unwrap().max_abs_diff(&a) < 1e-10);
        assert!(twisted_product(&one, &a).unwrap().max_abs_diff(&a) < 1e-10);
        let left = twisted_product(&twisted_product(&a, &b).unwrap(), &c).unwrap();
        let right = twisted_product(&a, &twisted_product(&b, &c).unwrap()).unwrap();
        assert!(left.max_abs_diff(&right) < 1e-9);
        let adj = dequantize(&op_tau(&a, 0.5).unwrap().adjoint(), 0.5).unwrap();
        assert!(adj.max_abs_diff(&a.conj()) < 1e-10);
    }

    #[test]
    fn adjoint_swaps_quantization() {
        let mut r = seeded(20);
        for n in [4usize, 5, 8] {
            let g = grid(n);
            let a = random_grid(g, &mut r);
            for tau in TAUS {
                let lhs = op_tau(&a, tau).unwrap().adjoint();
                let rhs = op_tau(&a.conj(), 1.0 - tau).unwrap();
                assert!(lhs.max_abs_diff(&rhs) < 1e-10, "n={n} tau={tau}");
            }
        }
    }

    #[test]
    fn real_weyl_symbols_are_self_adjoint() {
        let g = grid(8);
        let mut r = seeded(21);
        let a = random_grid(g, &mut r).map(|v| Complex64::new(v.re, 0.0));
        let op = op_tau(&a, 0.5).unwrap();
        assert!(op.max_abs_diff(&op.adjoint()) < 1e-12);
    }

    #[test]
    fn linearity() {
        let g = grid(8);
        let mut r = seeded(22);
        let a = random_grid(g, &mut r);
        let b = random_grid(g, &mut r);
        let c = Complex64::new(0.4, -2.0);
        let lhs = op_tau(&a.add(&b.scale(c)), 0.3).unwrap();
        let rhs = op_tau(&a, 0.3).unwrap().add(&op_tau(&b, 0.3).unwrap().scale(c));
        assert!(lhs.max_abs_diff(&rhs) < 1e-12);
    }

    #[test]
    fn tau_continuity() {
        // ‖Op_τ − Op_τ'‖_HS / |τ − τ'| stays below its τ-independent bound
        // 2π Σ |σ̂(ω,u)| |ω̃ ũ| / N (the chirp is Lipschitz in τ).
        let g = grid(8);
        let mut r = seeded(23);
        let a = random_grid(g, &mut r);
        let spread = spreading_function(&a);
        let mut bound = 0.0;
        for w in 0..8 {
            for u in 0..8 {
                let m = if w == 4 || u == 4 {
                    4.0 * (g.centered(w).abs().max(g.centered(u).abs())) as f64
                } else {
                    (g.centered(w) * g.centered(u)).abs() as f64
                };
                bound += spread.get(w, u).norm_sqr() * (2.0 * PI * m / 8.0).powi(2);
            }
        }
        let bound = bound.sqrt();
        for (t0, t1) in [(0.0, 0.1), (0.4, 0.5), (0.9, 1.0)] {
            let d = op_tau(&a, t0).unwrap().sub(&op_tau(&a, t1).unwrap()).hs_norm();
            assert!(d / (t1 - t0) <= bound * (1.0 + 1e-9));
        }
    }

    fn covariance_residual(sigma: &Symbol, tau: f64) -> f64 {
        let f = OperatorMatrix::dft(sigma.grid());
        let lhs = f.compose(&op_tau(sigma, tau).unwrap()).compose(&f.adjoint());
        let rhs = op_tau(&compose_j_inv(sigma), 1.0 - tau).unwrap();
        lhs.sub(&rhs).hs_norm() / rhs.hs_norm()
    }

    #[test]
    fn symplectic_covariance() {
        let mut r = seeded(24);
        for n in [4usize, 5, 8, 9, 16] {
            let a = random_grid(grid(n), &mut r);
            for tau in TAUS {
                assert!(covariance_residual(&a, tau) < 1e-12, "n={n} tau={tau}");
            }
        }
    }

    #[test]
    fn covariance_corner_defect_when_half_grid_is_odd() {
        // N = 6: the (3, 3) spreading term picks up e^{iπ(1−2τ)·3}.
        let g = grid(6);
        let corner = idft2(&ComplexGrid::from_fn(g, |w, u| {
            Complex64::new(if w == 3 && u == 3 { 1.0 } else { 0.0 }, 0.0)
        }));
        assert!(covariance_residual(&corner, 0.0) < 1e-12);
        assert!(covariance_residual(&corner, 0.5) > 0.1);
        let mut r = seeded(25);
        let a = random_grid(g, &mut r);
        assert!(covariance_residual(&a, 1.0) < 1e-12);
    }
}
