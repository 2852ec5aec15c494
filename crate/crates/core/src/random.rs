//! Seeded random inputs. The generator is ChaCha8 so corpora reproduce
//! across platforms and language ports.

use num_complex::Complex64;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::array::{ComplexGrid, Signal};
use crate::phasespace::Grid;

/// Algorithm identifier recorded in experiment configs.
pub const RNG_ALGORITHM: &str = "chacha8";

pub fn seeded(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Complex sample with independent standard normal parts.
pub fn cnormal<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

pub fn random_signal<R: Rng + ?Sized>(grid: Grid, rng: &mut R) -> Signal {
    let v: Vec<Complex64> = (0..grid.n()).map(|_| cnormal(rng)).collect();
    Signal::new(v).expect("grid has n >= 2")
}

pub fn random_grid<R: Rng + ?Sized>(grid: Grid, rng: &mut R) -> ComplexGrid {
    let v: Vec<Complex64> = (0..grid.n() * grid.n()).map(|_| cnormal(rng)).collect();
    ComplexGrid::from_vec(grid, v).expect("sized to grid")
}
