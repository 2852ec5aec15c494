//! Channel matrices, decay envelopes and the almost-diagonalization
//! diagnostics built on them.
//!
//! Shifted points `A z` and `𝒯_τ(w, z)` are formed from canonical
//! representatives in `[0, N)` and binned to the nearest grid point, ties
//! going to the smaller representative.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::array::{ComplexGrid, OperatorMatrix, Signal};
use crate::error::{check_tau, Result, TfqError};
use crate::io::{finish_csv, fmt_sig};
use crate::normbank::{
    amalgam_norm, fsjostrand_norm, modulation_norm, sjostrand_norm, MixedNormSpec,
};
use crate::phasespace::{apply_j, apply_ttau, Grid, Lattice, LineWeight, LinearMap, PhasePoint,
    RealPhasePoint, Weight};
use crate::quantize::{compose_j_inv, dequantize, op_tau, tau_wigner, Symbol};
use crate::random::{random_signal, seeded};
use crate::transforms::{frame_bounds, phase_stft, tf_shift};

/// Largest N for which a full-grid channel matrix is built by default.
pub const DEFAULT_FULL_CAP: usize = 32;

/// Operators with a larger condition number count as singular.
pub const INVERTIBILITY_THRESHOLD: f64 = 1e10;

/// Index set of a channel matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Domain {
    Full,
    Lattice(Lattice),
}

/// `M(w, z) = ⟨T π(z)φ, π(w)φ⟩` over a grid or lattice.
#[derive(Debug, Clone)]
pub struct ChannelMatrix {
    grid: Grid,
    tau: Option<f64>,
    points: Vec<PhasePoint>,
    entries: DMatrix<Complex64>,
    pub window_id: String,
}

impl ChannelMatrix {
    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn tau(&self) -> Option<f64> {
        self.tau
    }

    pub fn points(&self) -> &[PhasePoint] {
        &self.points
    }

    /// Rows are indexed by w, columns by z, both in [`Self::points`] order.
    pub fn entries(&self) -> &DMatrix<Complex64> {
        &self.entries
    }

    /// Entry at a pair of phase-space points, if both lie in the domain.
    pub fn get(&self, w: PhasePoint, z: PhasePoint) -> Option<Complex64> {
        let i = self.position(w)?;
        let j = self.position(z)?;
        Some(self.entries[(i, j)])
    }

    fn position(&self, p: PhasePoint) -> Option<usize> {
        if self.points.len() == self.grid.n() * self.grid.n() {
            return Some(p.index(self.grid));
        }
        self.points.binary_search_by_key(&p.index(self.grid), |q| q.index(self.grid)).ok()
    }
}

pub fn channel_matrix(
    sigma: &Symbol,
    tau: f64,
    phi: &Signal,
    domain: Domain,
) -> Result<ChannelMatrix> {
    channel_matrix_capped(sigma, tau, phi, domain, DEFAULT_FULL_CAP)
}

pub fn channel_matrix_capped(
    sigma: &Symbol,
    tau: f64,
    phi: &Signal,
    domain: Domain,
    cap: usize,
) -> Result<ChannelMatrix> {
    check_tau(tau)?;
    check_domain(sigma.grid(), domain, cap)?;
    let op = op_tau(sigma, tau)?;
    let mut m = operator_channel_matrix_capped(&op, phi, domain, cap)?;
    m.tau = Some(tau);
    Ok(m)
}

/// Channel matrix of an arbitrary operator.
pub fn operator_channel_matrix(
    op: &OperatorMatrix,
    phi: &Signal,
    domain: Domain,
) -> Result<ChannelMatrix> {
    operator_channel_matrix_capped(op, phi, domain, DEFAULT_FULL_CAP)
}

pub fn operator_channel_matrix_capped(
    op: &OperatorMatrix,
    phi: &Signal,
    domain: Domain,
    cap: usize,
) -> Result<ChannelMatrix> {
    if phi.is_zero() {
        return Err(TfqError::ZeroWindow);
    }
    let grid = op.grid();
    phi.check_len(grid.n())?;
    check_domain(grid, domain, cap)?;
    let points = match domain {
        Domain::Full => grid.points().collect::<Vec<_>>(),
        Domain::Lattice(l) => Lattice::new(l.a, l.b, grid)?.points(grid),
    };
    let n = grid.n();
    let mut psi = DMatrix::<Complex64>::zeros(n, points.len());
    for (j, p) in points.iter().enumerate() {
        psi.set_column(j, tf_shift(*p, phi).values());
    }
    let entries = psi.adjoint() * (op.kernel() * &psi);
    Ok(ChannelMatrix {
        grid,
        tau: op.tau(),
        points,
        entries,
        window_id: "phi".into(),
    })
}

fn check_domain(grid: Grid, domain: Domain, cap: usize) -> Result<()> {
    match domain {
        Domain::Full if grid.n() > cap => Err(TfqError::ChannelTooLarge),
        Domain::Lattice(l) => Lattice::new(l.a, l.b, grid).map(|_| ()),
        _ => Ok(()),
    }
}

/// How channel entries are grouped into diagonals.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EnvelopeMode {
    /// `k = w − z`.
    Difference,
    /// `k = w + z`.
    Sum,
    /// `k = nearest(w − A z)`.
    Shifted(LinearMap),
    /// `k = nearest(𝒯_τ(w, z))`.
    Weak { tau: f64 },
}

impl EnvelopeMode {
    pub fn name(&self) -> &'static str {
        match self {
            EnvelopeMode::Difference => "difference",
            EnvelopeMode::Sum => "sum",
            EnvelopeMode::Shifted(_) => "shifted",
            EnvelopeMode::Weak { .. } => "weak",
        }
    }

    fn bin(&self, w: PhasePoint, z: PhasePoint, grid: Grid) -> PhasePoint {
        match self {
            EnvelopeMode::Difference => w.sub(z, grid),
            EnvelopeMode::Sum => w.add(z, grid),
            EnvelopeMode::Shifted(a) => {
                let az = a.apply_grid(z, grid);
                RealPhasePoint::new(w.x as f64 - az.x, w.omega as f64 - az.omega, grid)
                    .nearest_grid_point(grid)
            }
            EnvelopeMode::Weak { tau } => apply_ttau(w, z, *tau, grid).nearest_grid_point(grid),
        }
    }
}

/// Max of `|M(w, z)|` over each generalized diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct DecayEnvelope {
    pub mode: EnvelopeMode,
    grid: Grid,
    h: Vec<f64>,
}

impl DecayEnvelope {
    pub fn grid(&self) -> Grid {
        self.grid
    }

    /// Table indexed by `k` in row-major order.
    pub fn values(&self) -> &[f64] {
        &self.h
    }

    pub fn at(&self, k: PhasePoint) -> f64 {
        self.h[k.index(self.grid)]
    }

    /// Rows `k_x, k_omega, h, v_s, h_times_v`.
    pub fn to_csv(&self, v: &Weight) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let map_err = |e: csv::Error| TfqError::InvalidArgument(e.to_string());
        w.write_record(["k_x", "k_omega", "h", "v_s", "h_times_v"])
            .map_err(map_err)?;
        for (i, h) in self.h.iter().enumerate() {
            let k = PhasePoint::from_index(i, self.grid);
            let vk = v.at(k, self.grid);
            w.write_record([
                k.x.to_string(),
                k.omega.to_string(),
                fmt_sig(*h),
                fmt_sig(vk),
                fmt_sig(h * vk),
            ])
            .map_err(map_err)?;
        }
        finish_csv(w)
    }
}

pub fn envelope(m: &ChannelMatrix, mode: EnvelopeMode) -> DecayEnvelope {
    let grid = m.grid;
    let n2 = grid.n() * grid.n();
    let pts = &m.points;
    // Max is exact, so the reduction order does not affect the result.
    let h = (0..pts.len())
        .into_par_iter()
        .fold(
            || vec![0.0f64; n2],
            |mut acc, j| {
                let z = pts[j];
                for (i, w) in pts.iter().enumerate() {
                    let k = mode.bin(*w, z, grid).index(grid);
                    acc[k] = acc[k].max(m.entries[(i, j)].norm());
                }
                acc
            },
        )
        .reduce(
            || vec![0.0f64; n2],
            |mut a, b| {
                for (x, y) in a.iter_mut().zip(b) {
                    *x = x.max(y);
                }
                a
            },
        );
    DecayEnvelope { mode, grid, h }
}

/// `Σ_k h(k) v(k)`.
pub fn ell1v(env: &DecayEnvelope, v: &Weight) -> f64 {
    env.h
        .iter()
        .enumerate()
        .map(|(i, h)| h * v.at(PhasePoint::from_index(i, env.grid), env.grid))
        .sum()
}

/// Envelope ℓ¹ norm against a symbol-class norm.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiagReport {
    pub n: usize,
    pub tau: f64,
    pub s: f64,
    pub lattice: (usize, usize),
    pub mode: String,
    pub envelope_l1: f64,
    pub class_norm: f64,
    pub ratio: f64,
    pub warning: Option<String>,
}

/// `Φ_τ = W_τ(φ, φ)`.
pub fn symbol_window(phi: &Signal, tau: f64) -> Result<ComplexGrid> {
    tau_wigner(phi, phi, tau)
}

fn composed_weight(v: &Weight, map: &LinearMap, grid: Grid) -> Result<Weight> {
    Weight::table(grid, v.composed(map, grid)?)
}

/// Difference-envelope ℓ¹_{v_s} on `Λ` against `‖σ‖` in `M^{∞,1}_{1⊗v_s∘J⁻¹}`.
pub fn almost_diag_report(
    sigma: &Symbol,
    tau: f64,
    phi: &Signal,
    lattice: Lattice,
    s: f64,
) -> Result<DiagReport> {
    check_tau(tau)?;
    let grid = sigma.grid();
    let lattice = Lattice::new(lattice.a, lattice.b, grid)?;
    let frame = frame_bounds(phi, lattice)?;
    let warning = (!frame.is_frame).then(|| "window and lattice do not form a frame".to_string());
    let v = Weight::polynomial(s)?;
    let cm = channel_matrix(sigma, tau, phi, Domain::Lattice(lattice))?;
    let l1 = ell1v(&envelope(&cm, EnvelopeMode::Difference), &v);
    let win = symbol_window(phi, tau)?;
    let class = sjostrand_norm(sigma, &win, &composed_weight(&v, &LinearMap::j_inv(), grid)?)?;
    Ok(DiagReport {
        n: grid.n(),
        tau,
        s,
        lattice: (lattice.a, lattice.b),
        mode: "difference".into(),
        envelope_l1: l1,
        class_norm: class,
        ratio: ratio(l1, class),
        warning,
    })
}

fn ratio(a: f64, b: f64) -> f64 {
    if b > 0.0 {
        a / b
    } else {
        0.0
    }
}

/// Form of the 𝓕-class estimate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FForm {
    /// `H(w − 𝒰_τ z)`, τ ∈ (0, 1).
    Shifted,
    /// `H(𝒯_τ(w, z))`, τ ∈ [0, 1].
    Weak,
}

/// Full-grid 𝓕-class report: shifted (or weak) envelope against
/// `‖σ‖` in `W(𝓕ℓ^∞, ℓ¹_{v_s∘ℬ_τ})` (or `ℓ¹_{v_s}` for the weak form).
pub fn fclass_diag_report(
    sigma: &Symbol,
    tau: f64,
    phi: &Signal,
    s: f64,
    form: FForm,
) -> Result<DiagReport> {
    check_tau(tau)?;
    let grid = sigma.grid();
    let v = Weight::polynomial(s)?;
    let (mode, class_weight) = match form {
        FForm::Shifted => {
            if tau == 0.0 || tau == 1.0 {
                return Err(TfqError::WeakFormRequired);
            }
            let w = composed_weight(&v, &LinearMap::btau(tau)?, grid)?;
            (EnvelopeMode::Shifted(LinearMap::utau(tau)?), w)
        }
        FForm::Weak => (EnvelopeMode::Weak { tau }, v.clone()),
    };
    let cm = channel_matrix(sigma, tau, phi, Domain::Full)?;
    let l1 = ell1v(&envelope(&cm, mode), &v);
    let class = fsjostrand_norm(sigma, &symbol_window(phi, tau)?, &class_weight)?;
    Ok(DiagReport {
        n: grid.n(),
        tau,
        s,
        lattice: (1, 1),
        mode: mode.name().into(),
        envelope_l1: l1,
        class_norm: class,
        ratio: ratio(l1, class),
        warning: None,
    })
}

/// `‖F Op_τ(σ) F* − Op_{1−τ}(σ∘J⁻¹)‖_HS / ‖Op_τ(σ)‖_HS`.
pub fn covariance_check(sigma: &Symbol, tau: f64) -> Result<f64> {
    let op = op_tau(sigma, tau)?;
    let f = OperatorMatrix::dft(sigma.grid());
    let lhs = f.compose(&op).compose(&f.adjoint());
    let rhs = op_tau(&compose_j_inv(sigma), 1.0 - tau)?;
    let den = op.hs_norm();
    let num = lhs.sub(&rhs).hs_norm();
    Ok(if den > 0.0 { num / den } else { num })
}

/// Outcome of the channel-entry / symbol-STFT modulus comparison.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ModulusReport {
    /// Max over admissible (w, z) of `| |M(w,z)| − |V_Φσ(𝒯_τ(w,z), J(w−z))| |`,
    /// relative to `max |V_Φσ|`.
    pub forward_residual: f64,
    /// Same comparison driven from (x, y) through `z(x,y)`, `w(x,y)`.
    pub inverse_residual: f64,
    pub forward_pairs: usize,
    pub inverse_pairs: usize,
}

/// Checks `|⟨Op_τ(σ)π(z)φ, π(w)φ⟩| = |V_{Φ_τ}σ(𝒯_τ(w,z), J(w−z))|` on every
/// pair whose `𝒯_τ` point is on the grid, and the inverse parametrization
/// `z = (x₁+(1−τ)y₂, x₂−τy₁)`, `w = (x₁−τy₂, x₂+(1−τ)y₁)`.
pub fn modulus_identity(sigma: &Symbol, tau: f64, phi: &Signal) -> Result<ModulusReport> {
    check_tau(tau)?;
    let grid = sigma.grid();
    let cm = channel_matrix(sigma, tau, phi, Domain::Full)?;
    let v = phase_stft(sigma, &symbol_window(phi, tau)?)?;
    let scale = v.sup_over_frequency().into_iter().fold(0.0, f64::max).max(f64::MIN_POSITIVE);

    let mut fwd = (0.0f64, 0usize);
    for w in grid.points() {
        for z in grid.points() {
            let Some(x) = apply_ttau(w, z, tau, grid).as_grid_point(grid) else {
                continue;
            };
            let y = apply_j(w.sub(z, grid), grid);
            let d = (cm.get(w, z).unwrap().norm() - v.get(x, y).norm()).abs();
            fwd = (fwd.0.max(d), fwd.1 + 1);
        }
    }

    let mut inv = (0.0f64, 0usize);
    let a = 1.0 - tau;
    for x in grid.points() {
        for y in grid.points() {
            let (x1, x2, y1, y2) = (x.x as f64, x.omega as f64, y.x as f64, y.omega as f64);
            let z = RealPhasePoint::new(x1 + a * y2, x2 - tau * y1, grid).as_grid_point(grid);
            let w = RealPhasePoint::new(x1 - tau * y2, x2 + a * y1, grid).as_grid_point(grid);
            let (Some(z), Some(w)) = (z, w) else {
                continue;
            };
            let d = (cm.get(w, z).unwrap().norm() - v.get(x, y).norm()).abs();
            inv = (inv.0.max(d), inv.1 + 1);
        }
    }
    Ok(ModulusReport {
        forward_residual: fwd.0 / scale,
        inverse_residual: inv.0 / scale,
        forward_pairs: fwd.1,
        inverse_pairs: inv.1,
    })
}

/// Source/target pair for [`boundedness_report`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NormPair {
    /// `M^{p,q}_{v_s} → M^{p,q}_{v_s}`; bound `‖σ‖_{M^{∞,1}_{1⊗v_s∘J⁻¹}}`.
    Modulation { p: f64, q: f64, s: f64 },
    /// `M^{p,q}_{v_s} → M^{p,q}_{v_s∘𝒰_τ}`; bound `‖σ‖_{W(𝓕ℓ^∞, ℓ¹_{v_s∘ℬ_τ})}`.
    ModulationShifted { p: f64, q: f64, s: f64 },
    /// `W(𝓕ℓ^p_{v_s}, ℓ^q_{v_s})` on itself; bound `‖σ‖_{M^{∞,1}_{1⊗v_s}}`.
    Amalgam { p: f64, q: f64, s: f64 },
    /// `M^{1,∞}` on itself at τ = 0; bound `‖σ‖_{W(𝓕ℓ^∞, ℓ¹)}`.
    KohnNirenberg,
    /// `W(𝓕ℓ¹, ℓ^∞)` on itself at τ = 1; bound `‖σ‖_{W(𝓕ℓ^∞, ℓ¹)}`.
    AntiKohnNirenberg,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundednessReport {
    pub max_ratio: f64,
    pub norm_bound: f64,
}

/// Largest `‖Op_τ(σ)f‖_target / ‖f‖_source` over seeded random f, next to
/// the class norm that bounds it.
pub fn boundedness_report(
    sigma: &Symbol,
    tau: f64,
    pair: NormPair,
    phi: &Signal,
    trials: usize,
    seed: u64,
) -> Result<BoundednessReport> {
    check_tau(tau)?;
    if trials == 0 {
        return Err(TfqError::InvalidArgument("trials must be at least 1".into()));
    }
    let grid = sigma.grid();
    let op = op_tau(sigma, tau)?;
    let win = symbol_window(phi, tau)?;
    type NormFn<'a> = Box<dyn Fn(&Signal) -> Result<f64> + 'a>;
    let (src, dst, bound): (NormFn, NormFn, f64) = match pair {
        NormPair::Modulation { p, q, s } => {
            let v = Weight::polynomial(s)?;
            let spec = MixedNormSpec::new(p, q, v.clone())?;
            let spec2 = spec.clone();
            let b = sjostrand_norm(sigma, &win, &composed_weight(&v, &LinearMap::j_inv(), grid)?)?;
            (
                Box::new(move |f| modulation_norm(f, phi, &spec)),
                Box::new(move |f| modulation_norm(f, phi, &spec2)),
                b,
            )
        }
        NormPair::ModulationShifted { p, q, s } => {
            let v = Weight::polynomial(s)?;
            let spec = MixedNormSpec::new(p, q, v.clone())?;
            let target = composed_weight(&v, &LinearMap::utau(tau)?, grid)?;
            let spec2 = MixedNormSpec::new(p, q, target)?;
            let b = fsjostrand_norm(sigma, &win, &composed_weight(&v, &LinearMap::btau(tau)?, grid)?)?;
            (
                Box::new(move |f| modulation_norm(f, phi, &spec)),
                Box::new(move |f| modulation_norm(f, phi, &spec2)),
                b,
            )
        }
        NormPair::Amalgam { p, q, s } => {
            let lw = LineWeight::Polynomial { s };
            let lw2 = lw.clone();
            let b = sjostrand_norm(sigma, &win, &Weight::polynomial(s)?)?;
            (
                Box::new(move |f| amalgam_norm(f, phi, p, q, &lw, &lw)),
                Box::new(move |f| amalgam_norm(f, phi, p, q, &lw2, &lw2)),
                b,
            )
        }
        NormPair::KohnNirenberg | NormPair::AntiKohnNirenberg => {
            let want = if pair == NormPair::KohnNirenberg { 0.0 } else { 1.0 };
            if tau != want {
                return Err(TfqError::InvalidArgument(format!(
                    "endpoint pair requires τ = {want}"
                )));
            }
            let b = fsjostrand_norm(sigma, &win, &Weight::unit())?;
            let one = LineWeight::unit();
            let nf: fn(&Signal, &Signal, &LineWeight) -> Result<f64> = if want == 0.0 {
                |f, g, _| modulation_norm(f, g, &MixedNormSpec::plain(1.0, f64::INFINITY)?)
            } else {
                |f, g, u| amalgam_norm(f, g, 1.0, f64::INFINITY, u, u)
            };
            let one2 = one.clone();
            (
                Box::new(move |f| nf(f, phi, &one)),
                Box::new(move |f| nf(f, phi, &one2)),
                b,
            )
        }
    };
    let mut rng = seeded(seed);
    let mut max_ratio: f64 = 0.0;
    for _ in 0..trials {
        let f = random_signal(grid, &mut rng);
        let den = src(&f)?;
        if den > 0.0 {
            max_ratio = max_ratio.max(dst(&op.apply(&f)?)? / den);
        }
    }
    Ok(BoundednessReport {
        max_ratio,
        norm_bound: bound,
    })
}

/// Which class the input symbol was generated for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ClassTag {
    /// Sjöstrand class `M^{∞,1}`.
    Sjostrand,
    /// 𝓕-Sjöstrand class `W(𝓕L^∞, L¹)`.
    FSjostrand,
}

impl ClassTag {
    pub fn as_str(&self) -> &'static str {
        match self {
            ClassTag::Sjostrand => "sjostrand",
            ClassTag::FSjostrand => "f-sjostrand",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WienerReport {
    pub invertible: bool,
    pub condition_number: f64,
    /// `‖ρ‖_{M^{∞,1}_{1⊗v_s}}` with `Op_τ(ρ) = Op_τ(σ)⁻¹`.
    pub inverse_symbol_norm: Option<f64>,
    /// `‖b‖_{W(𝓕ℓ^∞, ℓ¹_{v_s∘ℬ_{1−τ}})}` with `Op_{1−τ}(b) = Op_τ(σ)⁻¹`.
    pub complementary_symbol_norm: Option<f64>,
    /// Difference-envelope ℓ¹_{v_s} of `Op_τ(σ)`.
    pub forward_envelope_l1: f64,
    /// Difference-envelope ℓ¹_{v_s} of the inverse.
    pub inverse_envelope_l1: Option<f64>,
    /// `max |Op_{1−τ}(b) Op_τ(σ) − I|`.
    pub requantize_residual: Option<f64>,
    pub class_tag: ClassTag,
}

/// Inverts `Op_τ(σ)` and measures the inverse's symbols in both tracks.
pub fn wiener_experiment(
    sigma: &Symbol,
    tau: f64,
    s: f64,
    phi: &Signal,
    class_tag: ClassTag,
) -> Result<WienerReport> {
    check_tau(tau)?;
    let grid = sigma.grid();
    let v = Weight::polynomial(s)?;
    let op = op_tau(sigma, tau)?;
    let cond = op.condition_number();
    let fwd = ell1v(
        &envelope(&operator_channel_matrix(&op, phi, Domain::Full)?, EnvelopeMode::Difference),
        &v,
    );
    let inverse = if cond < INVERTIBILITY_THRESHOLD {
        op.try_inverse()
    } else {
        None
    };
    let Some(inv) = inverse else {
        return Ok(WienerReport {
            invertible: false,
            condition_number: cond,
            inverse_symbol_norm: None,
            complementary_symbol_norm: None,
            forward_envelope_l1: fwd,
            inverse_envelope_l1: None,
            requantize_residual: None,
            class_tag,
        });
    };
    let rho = dequantize(&inv, tau)?;
    let b = dequantize(&inv, 1.0 - tau)?;
    let weyl = sjostrand_norm(&rho, &symbol_window(phi, tau)?, &v)?;
    let ftrack = if tau > 0.0 && tau < 1.0 {
        let w = composed_weight(&v, &LinearMap::btau(1.0 - tau)?, grid)?;
        Some(fsjostrand_norm(&b, &symbol_window(phi, 1.0 - tau)?, &w)?)
    } else {
        None
    };
    let inv_env = ell1v(
        &envelope(&operator_channel_matrix(&inv, phi, Domain::Full)?, EnvelopeMode::Difference),
        &v,
    );
    let resid = op_tau(&b, 1.0 - tau)?
        .compose(&op)
        .max_abs_diff(&OperatorMatrix::identity(grid));
    Ok(WienerReport {
        invertible: true,
        condition_number: cond,
        inverse_symbol_norm: Some(weyl),
        complementary_symbol_norm: ftrack,
        forward_envelope_l1: fwd,
        inverse_envelope_l1: Some(inv_env),
        requantize_residual: Some(resid),
        class_tag,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompositionReport {
    /// `c` with `Op_{1/2}(c) = Op_τ(a) Op_{1−τ}(b)`.
    pub c: Symbol,
    /// `‖c‖_{M^{∞,1}_{1⊗v_s}}`.
    pub weyl_class_norm: f64,
    /// `c₁` with `Op_τ(c₁) = Op_{τ₀}(b) Op_τ(a)`.
    pub c1: Symbol,
    /// `c₂` with `Op_τ(c₂) = Op_τ(a) Op_{τ₀}(b)`.
    pub c2: Symbol,
    pub c1_fclass_norm: f64,
    pub c2_fclass_norm: f64,
    /// The same product `Op_τ(a) Op_{1−τ}(b)` read back at τ.
    pub same_tau_symbol: Symbol,
    pub same_tau_fclass_norm: f64,
    /// `c` measured in the 𝓕-class at τ = 1/2.
    pub weyl_fclass_norm: f64,
}

/// Symbols of `Op_τ(a) Op_{1−τ}(b)` and of the bimodule products.
pub fn composition_symmetry_check(
    a: &Symbol,
    b: &Symbol,
    tau: f64,
    tau0: f64,
    phi: &Signal,
    s: f64,
) -> Result<CompositionReport> {
    check_tau(tau)?;
    check_tau(tau0)?;
    if tau == 0.0 || tau == 1.0 {
        return Err(TfqError::SingularEndpoint);
    }
    let grid = a.grid();
    let v = Weight::polynomial(s)?;
    let oa = op_tau(a, tau)?;
    let prod = oa.compose(&op_tau(b, 1.0 - tau)?);
    let c = dequantize(&prod, 0.5)?;
    let weyl_win = symbol_window(phi, 0.5)?;
    let weyl_class_norm = sjostrand_norm(&c, &weyl_win, &v)?;
    let fw_half = composed_weight(&v, &LinearMap::btau(0.5)?, grid)?;
    let weyl_fclass_norm = fsjostrand_norm(&c, &weyl_win, &fw_half)?;

    let ob0 = op_tau(b, tau0)?;
    let c1 = dequantize(&ob0.compose(&oa), tau)?;
    let c2 = dequantize(&oa.compose(&ob0), tau)?;
    let win = symbol_window(phi, tau)?;
    let fw = composed_weight(&v, &LinearMap::btau(tau)?, grid)?;
    let same_tau_symbol = dequantize(&prod, tau)?;
    Ok(CompositionReport {
        weyl_class_norm,
        c1_fclass_norm: fsjostrand_norm(&c1, &win, &fw)?,
        c2_fclass_norm: fsjostrand_norm(&c2, &win, &fw)?,
        same_tau_fclass_norm: fsjostrand_norm(&same_tau_symbol, &win, &fw)?,
        weyl_fclass_norm,
        c,
        c1,
        c2,
        same_tau_symbol,
    })
}

/// Envelope ℓ¹_{v_s} of the channel matrix of `op` along the graph of `a`.
pub fn fio_membership(op: &OperatorMatrix, a: &LinearMap, phi: &Signal, s: f64) -> Result<f64> {
    let cm = operator_channel_matrix(op, phi, Domain::Full)?;
    Ok(ell1v(&envelope(&cm, EnvelopeMode::Shifted(*a)), &Weight::polynomial(s)?))
}

/// Index of the candidate shift with the smallest envelope ℓ¹; ties go to
/// the first candidate.
pub fn best_fitting_shift(
    op: &OperatorMatrix,
    candidates: &[LinearMap],
    phi: &Signal,
    s: f64,
) -> Result<usize> {
    if candidates.is_empty() {
        return Err(TfqError::InvalidArgument("no candidate shifts".into()));
    }
    let cm = operator_channel_matrix(op, phi, Domain::Full)?;
    let v = Weight::polynomial(s)?;
    let mut best = (0, f64::INFINITY);
    for (i, a) in candidates.iter().enumerate() {
        let l = ell1v(&envelope(&cm, EnvelopeMode::Shifted(*a)), &v);
        if l < best.1 {
            best = (i, l);
        }
    }
    Ok(best.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantize::{constant_symbol, convert_symbol, delta_symbol};
    use crate::random::random_grid;
    use crate::transforms::stft;

    fn grid(n: usize) -> Grid {
        Grid::new(n).unwrap()
    }

    fn one(g: Grid) -> Symbol {
        constant_symbol(g, Complex64::new(1.0, 0.0))
    }

    #[test]
    fn entries_match_direct_inner_products() {
        let g = grid(8);
        let mut r = seeded(1);
        let sigma = random_grid(g, &mut r);
        let phi = Signal::gaussian(g, 2.0);
        let cm = channel_matrix(&sigma, 0.3, &phi, Domain::Full).unwrap();
        let op = op_tau(&sigma, 0.3).unwrap();
        for (w, z) in [((1, 2), (3, 4)), ((0, 0), (7, 7)), ((5, 1), (2, 6))] {
            let w = PhasePoint::new(w.0, w.1, g);
            let z = PhasePoint::new(z.0, z.1, g);
            let direct = op.apply(&tf_shift(z, &phi)).unwrap().inner(&tf_shift(w, &phi));
            assert!((cm.get(w, z).unwrap() - direct).norm() < 1e-12);
        }
    }

    #[test]
    fn identity_channel_is_window_stft() {
        let g = grid(8);
        let phi = Signal::gaussian(g, 1.5);
        let cm = channel_matrix(&one(g), 0.5, &phi, Domain::Full).unwrap();
        let v = stft(&phi, &phi).unwrap();
        for w in g.points() {
            for z in g.points() {
                let k = w.sub(z, g);
                let e = cm.get(w, z).unwrap().norm();
                assert!((e - v.at(k).norm()).abs() < 1e-12);
            }
        }
        let env = envelope(&cm, EnvelopeMode::Difference);
        assert!((env.at(PhasePoint::new(0, 0, g)) - phi.norm().powi(2)).abs() < 1e-12);
        for k in g.points() {
            assert!((env.at(k) - env.at(k.neg(g))).abs() < 1e-12);
        }
    }

    #[test]
    fn lattice_is_restriction_of_full() {
        let g = grid(8);
        let mut r = seeded(2);
        let sigma = random_grid(g, &mut r);
        let phi = Signal::gaussian(g, 2.0);
        let full = channel_matrix(&sigma, 0.5, &phi, Domain::Full).unwrap();
        let lat = Lattice::new(2, 4, g).unwrap();
        let sub = channel_matrix(&sigma, 0.5, &phi, Domain::Lattice(lat)).unwrap();
        for &w in sub.points() {
            for &z in sub.points() {
                assert!((sub.get(w, z).unwrap() - full.get(w, z).unwrap()).norm() < 1e-12);
            }
        }
        assert!(sub.get(PhasePoint::new(1, 0, g), PhasePoint::new(0, 0, g)).is_none());
    }

    #[test]
    fn full_cap() {
        let g = grid(8);
        let e = channel_matrix_capped(&one(g), 0.5, &Signal::gaussian(g, 2.0), Domain::Full, 4)
            .unwrap_err();
        assert_eq!(e.to_string(), "full channel matrix too large; use a lattice");
        let lat = Domain::Lattice(Lattice { a: 2, b: 2 });
        assert!(channel_matrix_capped(&one(g), 0.5, &Signal::gaussian(g, 2.0), lat, 4).is_ok());
    }

    #[test]
    fn single_entry_envelope() {
        let g = grid(4);
        let n2 = 16;
        let mut entries = DMatrix::<Complex64>::zeros(n2, n2);
        let (w0, z0) = (PhasePoint::new(1, 3, g), PhasePoint::new(2, 1, g));
        entries[(w0.index(g), z0.index(g))] = Complex64::new(0.0, 2.0);
        let cm = ChannelMatrix {
            grid: g,
            tau: None,
            points: g.points().collect(),
            entries,
            window_id: "t".into(),
        };
        let env = envelope(&cm, EnvelopeMode::Difference);
        for k in g.points() {
            let want = if k == w0.sub(z0, g) { 2.0 } else { 0.0 };
            assert_eq!(env.at(k), want);
        }
        assert_eq!(ell1v(&env, &Weight::unit()), 2.0);
    }

    #[test]
    fn half_shift_equals_sum_mode() {
        let g = grid(8);
        let mut r = seeded(3);
        let cm = channel_matrix(&random_grid(g, &mut r), 0.5, &Signal::gaussian(g, 2.0), Domain::Full)
            .unwrap();
        let a = envelope(&cm, EnvelopeMode::Shifted(LinearMap::utau(0.5).unwrap()));
        let b = envelope(&cm, EnvelopeMode::Sum);
        assert_eq!(a.values(), b.values());
    }

    #[test]
    fn ell1v_monotone_in_s() {
        let g = grid(8);
        let cm = channel_matrix(&one(g), 0.5, &Signal::gaussian(g, 2.0), Domain::Full).unwrap();
        let env = envelope(&cm, EnvelopeMode::Difference);
        let mut last = 0.0;
        for s in [0.0, 0.5, 1.0, 2.0] {
            let l = ell1v(&env, &Weight::polynomial(s).unwrap());
            assert!(l >= last);
            last = l;
        }
    }

    #[test]
    fn envelope_csv_columns() {
        let g = grid(4);
        let cm = channel_matrix(&one(g), 0.5, &Signal::gaussian(g, 1.0), Domain::Full).unwrap();
        let csv = envelope(&cm, EnvelopeMode::Difference)
            .to_csv(&Weight::polynomial(1.0).unwrap())
            .unwrap();
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some("k_x,k_omega,h,v_s,h_times_v"));
        assert_eq!(lines.count(), 16);
    }

    #[test]
    fn covariance_examples() {
        let g = grid(8);
        let mut r = seeded(4);
        assert!(covariance_check(&one(g), 0.3).unwrap() < 1e-12);
        let sigma = random_grid(g, &mut r);
        for tau in [0.0, 0.3, 0.5, 1.0] {
            assert!(covariance_check(&sigma, tau).unwrap() < 1e-10);
        }
    }

    #[test]
    fn modulus_identity_at_endpoints() {
        let g = grid(8);
        let mut r = seeded(5);
        let sigma = random_grid(g, &mut r);
        let phi = Signal::gaussian(g, 2.0);
        for tau in [0.0, 1.0] {
            let rep = modulus_identity(&sigma, tau, &phi).unwrap();
            assert_eq!(rep.forward_pairs, 64 * 64);
            assert_eq!(rep.inverse_pairs, 64 * 64);
            assert!(rep.forward_residual < 1e-10, "{rep:?}");
            assert!(rep.inverse_residual < 1e-10, "{rep:?}");
        }
    }

    #[test]
    fn endpoint_envelope_is_grand_symbol() {
        // At τ ∈ {0, 1} the difference envelope equals the grand symbol
        // sup_u |V_Φσ(u, J k)|, so both sides of the report coincide.
        let g = grid(8);
        let mut r = seeded(6);
        let sigma = random_grid(g, &mut r);
        let phi = Signal::gaussian(g, 2.0);
        for tau in [0.0, 1.0] {
            let rep = almost_diag_report(&sigma, tau, &phi, Lattice::full(), 1.0).unwrap();
            assert!((rep.ratio - 1.0).abs() < 1e-10, "{rep:?}");
        }
    }

    #[test]
    fn report_homogeneity_and_frame_warning() {
        let g = grid(8);
        let mut r = seeded(7);
        let sigma = random_grid(g, &mut r);
        let phi = Signal::gaussian(g, 2.0);
        let a = almost_diag_report(&sigma, 0.5, &phi, Lattice::full(), 1.0).unwrap();
        let c = Complex64::new(0.0, -3.0);
        let b = almost_diag_report(&sigma.scale(c), 0.5, &phi, Lattice::full(), 1.0).unwrap();
        assert!((b.envelope_l1 - 3.0 * a.envelope_l1).abs() < 1e-9 * b.envelope_l1);
        assert!((b.ratio - a.ratio).abs() < 1e-10);
        assert!(a.warning.is_none());
        let sparse = Lattice::new(4, 8, g).unwrap();
        let w = almost_diag_report(&sigma, 0.5, &phi, sparse, 1.0).unwrap();
        assert!(w.warning.is_some());
        assert!(w.envelope_l1.is_finite());
    }

    #[test]
    fn fclass_endpoint_needs_weak_form() {
        let g = grid(8);
        let phi = Signal::gaussian(g, 2.0);
        for tau in [0.0, 1.0] {
            let e = fclass_diag_report(&one(g), tau, &phi, 0.0, FForm::Shifted).unwrap_err();
            assert_eq!(e.to_string(), "use weak form at endpoints");
            assert!(fclass_diag_report(&one(g), tau, &phi, 0.0, FForm::Weak).is_ok());
        }
    }

    #[test]
    fn utau_round_trip_in_fclass_reports() {
        let a = LinearMap::utau(0.3).unwrap();
        let b = LinearMap::utau(0.7).unwrap();
        assert!(a.compose(&b).approx_eq(&LinearMap::identity(), 1e-12));
    }

    #[test]
    fn boundedness_identity_and_unitary() {
        let g = grid(8);
        let phi = Signal::gaussian(g, 2.0);
        let pairs = [
            NormPair::Modulation { p: 2.0, q: 2.0, s: 0.0 },
            NormPair::Modulation { p: 1.0, q: f64::INFINITY, s: 1.0 },
            NormPair::Amalgam { p: 2.0, q: 1.0, s: 0.0 },
        ];
        for pair in pairs {
            let rep = boundedness_report(&one(g), 0.4, pair, &phi, 5, 1).unwrap();
            assert!((rep.max_ratio - 1.0).abs() < 1e-10, "{pair:?}");
        }
        let kn = boundedness_report(&one(g), 0.0, NormPair::KohnNirenberg, &phi, 5, 1).unwrap();
        assert!((kn.max_ratio - 1.0).abs() < 1e-10);
        let akn = boundedness_report(&one(g), 1.0, NormPair::AntiKohnNirenberg, &phi, 5, 1).unwrap();
        assert!((akn.max_ratio - 1.0).abs() < 1e-10);
        assert!(boundedness_report(&one(g), 0.5, NormPair::KohnNirenberg, &phi, 5, 1).is_err());

        let m = Symbol::from_fn(g, |x, _| crate::transforms::unit_phase(3 * x as i64 * x as i64, 8));
        let pair = NormPair::Modulation { p: 2.0, q: 2.0, s: 0.0 };
        let rep = boundedness_report(&m, 0.5, pair, &phi, 10, 2).unwrap();
        assert!((rep.max_ratio - 1.0).abs() < 1e-10);
    }

    #[test]
    fn wiener_trivial_and_singular() {
        let g = grid(8);
        let phi = Signal::gaussian(g, 2.0);
        let rep = wiener_experiment(&one(g), 0.3, 1.0, &phi, ClassTag::Sjostrand).unwrap();
        assert!(rep.invertible);
        assert!(rep.requantize_residual.unwrap() < 1e-12);
        let fwd = rep.forward_envelope_l1;
        assert!((rep.inverse_envelope_l1.unwrap() - fwd).abs() < 1e-10 * fwd);
        let sing = Symbol::from_fn(g, |x, _| Complex64::new(if x == 3 { 0.0 } else { 1.0 }, 0.0));
        let rep = wiener_experiment(&sing, 0.5, 1.0, &phi, ClassTag::Sjostrand).unwrap();
        assert!(!rep.invertible);
        assert!(rep.inverse_symbol_norm.is_none());
    }

    #[test]
    fn composition_with_identity_factor() {
        let g = grid(8);
        let mut r = seeded(8);
        let a = random_grid(g, &mut r);
        let phi = Signal::gaussian(g, 2.0);
        let tau = 0.3;
        let rep = composition_symmetry_check(&one(g), &a, tau, 0.6, &phi, 0.0).unwrap();
        assert!(rep.c.max_abs_diff(&convert_symbol(&a, 1.0 - tau, 0.5).unwrap()) < 1e-10);
        let rep = composition_symmetry_check(&a, &one(g), tau, 0.6, &phi, 0.0).unwrap();
        assert!(rep.c.max_abs_diff(&convert_symbol(&a, tau, 0.5).unwrap()) < 1e-10);
        assert!(composition_symmetry_check(&a, &a, 0.0, 0.5, &phi, 0.0).is_err());
    }

    #[test]
    fn dft_is_concentrated_along_j() {
        let g = grid(16);
        let phi = Signal::gaussian(g, 16f64.sqrt());
        let f = OperatorMatrix::dft(g);
        let along_j = fio_membership(&f, &LinearMap::j(), &phi, 0.0).unwrap();
        let along_id = fio_membership(&f, &LinearMap::identity(), &phi, 0.0).unwrap();
        assert!(along_j < 0.2 * along_id);
        let id = fio_membership(&OperatorMatrix::identity(g), &LinearMap::identity(), &phi, 0.0)
            .unwrap();
        let cm = channel_matrix(&one(g), 0.5, &phi, Domain::Full).unwrap();
        let want = ell1v(&envelope(&cm, EnvelopeMode::Difference), &Weight::unit());
        assert!((id - want).abs() < 1e-10);
    }

    #[test]
    fn delta_fio_matches_sum_envelope() {
        let g = grid(8);
        let phi = Signal::gaussian(g, 2.0);
        let d = delta_symbol(g);
        let op = op_tau(&d, 0.5).unwrap();
        let a = fio_membership(&op, &LinearMap::utau(0.5).unwrap(), &phi, 1.0).unwrap();
        let cm = channel_matrix(&d, 0.5, &phi, Domain::Full).unwrap();
        let b = ell1v(&envelope(&cm, EnvelopeMode::Sum), &Weight::polynomial(1.0).unwrap());
        assert!((a - b).abs() < 1e-12);
    }
}
