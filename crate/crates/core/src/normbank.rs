//! Discrete modulation, Wiener amalgam and Sjöstrand-type norms.
//!
//! Integrals become plain sums with unit grid spacing. `p = ∞` or `q = ∞`
//! is written as `f64::INFINITY` and evaluated as a max.

use serde_json::{json, Value};

use crate::array::{ComplexGrid, Signal, TfMatrix};
use crate::error::{Result, TfqError};
use crate::phasespace::{Grid, LineWeight, PhasePoint, Weight};
use crate::transforms::{phase_stft, stft};

/// Exponents and weight of a mixed `ℓ^{p,q}_m` norm on Z_N².
#[derive(Debug, Clone, PartialEq)]
pub struct MixedNormSpec {
    pub p: f64,
    pub q: f64,
    pub weight: Weight,
}

impl MixedNormSpec {
    pub fn new(p: f64, q: f64, weight: Weight) -> Result<Self> {
        check_exponent(p)?;
        check_exponent(q)?;
        Ok(Self { p, q, weight })
    }

    /// Unweighted `ℓ^{p,q}`.
    pub fn plain(p: f64, q: f64) -> Result<Self> {
        Self::new(p, q, Weight::unit())
    }
}

pub fn check_exponent(p: f64) -> Result<()> {
    if p == f64::INFINITY || (p.is_finite() && p >= 1.0) {
        Ok(())
    } else {
        Err(TfqError::InvalidExponent(p))
    }
}

/// `ℓ^p` norm of non-negative terms.
pub fn lp(values: impl Iterator<Item = f64>, p: f64) -> f64 {
    if p == f64::INFINITY {
        values.fold(0.0, f64::max)
    } else if p == 1.0 {
        values.sum()
    } else {
        values.map(|v| v.powf(p)).sum::<f64>().powf(1.0 / p)
    }
}

/// Inner `ℓ^p` over x weighted by `m`, outer `ℓ^q` over ω.
pub fn mixed_norm(f: &TfMatrix, spec: &MixedNormSpec) -> f64 {
    let grid = f.grid();
    let n = grid.n();
    let w = spec.weight.tabulate(grid);
    let rows = (0..n).map(|omega| {
        lp(
            (0..n).map(|x| f.get(x, omega).norm() * w[x * n + omega]),
            spec.p,
        )
    });
    lp(rows, spec.q)
}

/// `‖V_g f‖_{ℓ^{p,q}_m}`.
pub fn modulation_norm(f: &Signal, g: &Signal, spec: &MixedNormSpec) -> Result<f64> {
    Ok(mixed_norm(&stft(f, g)?, spec))
}

/// `W(𝓕ℓ^p_u, ℓ^q_w)`: inner `ℓ^p` over ω weighted by `u`, outer `ℓ^q` over
/// x weighted by `w`, of `V_g f`.
pub fn amalgam_norm(
    f: &Signal,
    g: &Signal,
    p: f64,
    q: f64,
    u: &LineWeight,
    w: &LineWeight,
) -> Result<f64> {
    check_exponent(p)?;
    check_exponent(q)?;
    let v = stft(f, g)?;
    let grid = f.grid();
    let n = grid.n();
    let rows = (0..n).map(|x| {
        w.at(x, grid) * lp((0..n).map(|om| v.get(x, om).norm() * u.at(om, grid)), p)
    });
    Ok(lp(rows, q))
}

/// Tensor weight `(x, ω) ↦ u(x) w(ω)`.
pub fn tensor_weight(grid: Grid, u: &LineWeight, w: &LineWeight) -> Result<Weight> {
    let n = grid.n();
    let vals = (0..n * n)
        .map(|i| u.at(i / n, grid) * w.at(i % n, grid))
        .collect();
    Weight::table(grid, vals)
}

/// `Σ_ζ sup_u |V_Φ σ(u, ζ)| v(ζ)`.
pub fn sjostrand_norm(sigma: &ComplexGrid, window: &ComplexGrid, v: &Weight) -> Result<f64> {
    let grid = sigma.grid();
    let sup = phase_stft(sigma, window)?.sup_over_position();
    Ok(weighted_sum(&sup, v, grid))
}

/// `Σ_u sup_ζ |V_Φ σ(u, ζ)| v(u)`.
pub fn fsjostrand_norm(sigma: &ComplexGrid, window: &ComplexGrid, v: &Weight) -> Result<f64> {
    let grid = sigma.grid();
    let sup = phase_stft(sigma, window)?.sup_over_frequency();
    Ok(weighted_sum(&sup, v, grid))
}

fn weighted_sum(vals: &[f64], v: &Weight, grid: Grid) -> f64 {
    vals.iter()
        .enumerate()
        .map(|(i, h)| h * v.at(PhasePoint::from_index(i, grid), grid))
        .sum()
}

/// Norm report as emitted by the CLI.
#[derive(Debug, Clone, PartialEq)]
pub struct NormReport {
    pub space: String,
    pub p: f64,
    pub q: f64,
    pub s: f64,
    pub value: f64,
}

impl NormReport {
    pub fn to_json(&self) -> Value {
        json!({
            "space": self.space,
            "p": exponent_json(self.p),
            "q": exponent_json(self.q),
            "s": self.s,
            "value": self.value,
        })
    }
}

fn exponent_json(p: f64) -> Value {
    if p.is_infinite() {
        Value::String("inf".into())
    } else {
        json!(p)
    }
}
