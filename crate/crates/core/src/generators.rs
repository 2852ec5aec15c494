//! Named symbol and window generators used by the CLI and the test corpora.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::array::{ComplexGrid, Signal};
use crate::diagnostics::ClassTag;
use crate::error::{Result, TfqError};
use crate::phasespace::Grid;
use crate::quantize::Symbol;
use crate::random::{random_grid, seeded};
use crate::transforms::{dft2, idft2, unit_phase};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum SymbolGenerator {
    /// σ ≡ value.
    Constant { value: f64 },
    /// Point mass at the origin.
    Delta,
    /// Periodized tensor Gaussian with peak 1.
    Gaussian { width: f64 },
    /// `σ(x, ω) = h(x)` with `h` a Gaussian of peak 1.
    SeparableX { width: f64 },
    /// `σ(x, ω) = h(ω)`.
    SeparableOmega { width: f64 },
    /// `1 + eps · gaussian(width)`.
    PerturbedIdentity { eps: f64, width: f64 },
    /// Complex Gaussian entries; the seed defaults to the run seed.
    RandomSeeded {
        #[serde(default)]
        seed: Option<u64>,
    },
    /// Random symbol whose spreading function is cut to a centred disc.
    Bandlimited {
        radius: f64,
        #[serde(default)]
        seed: Option<u64>,
    },
    /// `σ(x, ω) = e^{2πi x²/N}`, a unimodular multiplication symbol.
    Chirp,
    /// Multiplication symbol vanishing at `x = 0`.
    Singular,
}

impl Default for SymbolGenerator {
    fn default() -> Self {
        SymbolGenerator::RandomSeeded { seed: None }
    }
}

impl SymbolGenerator {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(TfqError::Config(m.into()));
        match *self {
            SymbolGenerator::Constant { value } if !value.is_finite() => bad("constant must be finite"),
            SymbolGenerator::Gaussian { width }
            | SymbolGenerator::SeparableX { width }
            | SymbolGenerator::SeparableOmega { width }
            | SymbolGenerator::PerturbedIdentity { width, .. }
                if !(width.is_finite() && width > 0.0) =>
            {
                bad("gaussian width must be positive")
            }
            SymbolGenerator::PerturbedIdentity { eps, .. } if !eps.is_finite() => {
                bad("perturbation must be finite")
            }
            SymbolGenerator::Bandlimited { radius, .. } if !(radius.is_finite() && radius >= 0.0) => {
                bad("band radius must be non-negative")
            }
            _ => Ok(()),
        }
    }

    /// `run_seed` is used by random generators without their own seed.
    pub fn build(&self, grid: Grid, run_seed: u64) -> Symbol {
        let one = Complex64::new(1.0, 0.0);
        match *self {
            SymbolGenerator::Constant { value } => {
                Symbol::from_fn(grid, |_, _| Complex64::new(value, 0.0))
            }
            SymbolGenerator::Delta => crate::quantize::delta_symbol(grid),
            SymbolGenerator::Gaussian { width } => gaussian_symbol(grid, width),
            SymbolGenerator::SeparableX { width } => {
                let h = Signal::gaussian(grid, width);
                Symbol::from_fn(grid, |x, _| h.get(x) / h.get(0))
            }
            SymbolGenerator::SeparableOmega { width } => {
                let h = Signal::gaussian(grid, width);
                Symbol::from_fn(grid, |_, om| h.get(om) / h.get(0))
            }
            SymbolGenerator::PerturbedIdentity { eps, width } => {
                gaussian_symbol(grid, width).map(|v| one + v * eps)
            }
            SymbolGenerator::RandomSeeded { seed } => {
                random_grid(grid, &mut seeded(seed.unwrap_or(run_seed)))
            }
            SymbolGenerator::Bandlimited { radius, seed } => {
                bandlimited(grid, radius, seed.unwrap_or(run_seed))
            }
            SymbolGenerator::Chirp => {
                let n = grid.n();
                Symbol::from_fn(grid, |x, _| unit_phase((x * x) as i64, n))
            }
            SymbolGenerator::Singular => {
                Symbol::from_fn(grid, |x, _| if x == 0 { Complex64::new(0.0, 0.0) } else { one })
            }
        }
    }

    /// Class the generator is designed for.
    pub fn class_tag(&self) -> ClassTag {
        match self {
            SymbolGenerator::Delta => ClassTag::FSjostrand,
            _ => ClassTag::Sjostrand,
        }
    }
}

fn gaussian_symbol(grid: Grid, width: f64) -> Symbol {
    let h = Signal::gaussian(grid, width);
    let peak = h.get(0);
    Symbol::from_fn(grid, |x, om| h.get(x) * h.get(om) / (peak * peak))
}

fn bandlimited(grid: Grid, radius: f64, seed: u64) -> Symbol {
    let spread = dft2(&random_grid(grid, &mut seeded(seed)));
    let cut = ComplexGrid::from_fn(grid, |a, b| {
        let (ca, cb) = (grid.centered(a) as f64, grid.centered(b) as f64);
        if ca.hypot(cb) <= radius + 1e-9 {
            spread.get(a, b)
        } else {
            Complex64::new(0.0, 0.0)
        }
    });
    idft2(&cut)
}

/// Ten symbols ordered from smooth to rough: one random spreading function
/// cut to discs of growing radius.
pub fn smoothness_corpus(grid: Grid, seed: u64) -> Vec<Symbol> {
    (0..10)
        .map(|k| bandlimited(grid, 1.2 * k as f64, seed))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum WindowGenerator {
    /// Periodized Gaussian; width defaults to √N.
    Gaussian {
        #[serde(default)]
        width: Option<f64>,
    },
    Delta,
}

impl Default for WindowGenerator {
    fn default() -> Self {
        WindowGenerator::Gaussian { width: None }
    }
}

impl WindowGenerator {
    pub fn validate(&self) -> Result<()> {
        match self {
            WindowGenerator::Gaussian { width: Some(w) } if !(w.is_finite() && *w > 0.0) => {
                Err(TfqError::Config("window width must be positive".into()))
            }
            _ => Ok(()),
        }
    }

    pub fn build(&self, grid: Grid) -> Signal {
        match self {
            WindowGenerator::Gaussian { width } => {
                Signal::gaussian(grid, width.unwrap_or((grid.n() as f64).sqrt()))
            }
            WindowGenerator::Delta => Signal::delta(grid, 0),
        }
    }
}
