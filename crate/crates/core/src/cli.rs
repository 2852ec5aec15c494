//! Experiment runner behind the `tfq` binary.
//!
//! A run is described by an [`ExperimentConfig`] (JSON). Every constraint is
//! checked by [`ExperimentConfig::validate`] before any computation starts.
//! Reports are written under an output directory with numbers rendered to
//! 12 significant digits, so identical configs give identical bytes.

use std::f64::consts::FRAC_1_SQRT_2;
use std::path::Path;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::array::{OperatorMatrix, Signal};
use crate::diagnostics::{
    almost_diag_report, boundedness_report, channel_matrix_capped, composition_symmetry_check,
    covariance_check, ell1v, envelope, fclass_diag_report, modulus_identity, symbol_window,
    wiener_experiment, Domain, EnvelopeMode, FForm, NormPair, WienerReport, DEFAULT_FULL_CAP,
};
use crate::error::{check_tau, Result, TfqError};
use crate::generators::{SymbolGenerator, WindowGenerator};
use crate::io::{finish_csv, fmt_sig, render_json, write_file};
use crate::normbank::{
    amalgam_norm, fsjostrand_norm, modulation_norm, sjostrand_norm, MixedNormSpec, NormReport,
};
use crate::phasespace::{Grid, Lattice, LineWeight, LinearMap, Weight};
use crate::quantize::{convert_symbol, dequantize, op_tau, tau_wigner, Symbol};
use crate::random::{random_grid, random_signal, seeded, RNG_ALGORITHM};
use crate::transforms::{dft, inversion_constant, stft, stft_adjoint, unit_phase};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILED: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;

/// Residual bound for every exact-identity suite.
pub const VERIFY_TOL: f64 = 1e-10;

/// τ values used by the round-trip suite; one of them is irrational.
pub const ROUND_TRIP_TAUS: [f64; 6] = [0.0, 0.25, 1.0 / 3.0, 0.5, FRAC_1_SQRT_2, 1.0];
/// τ values used by the duality suite.
pub const DUALITY_TAUS: [f64; 4] = [0.0, 0.3, 0.5, 1.0];
/// (τ₁, τ₂) pairs used by the symbol-conversion suite.
pub const CONVERT_PAIRS: [(f64, f64); 3] = [(0.0, 1.0), (0.3, 0.5), (FRAC_1_SQRT_2, 0.2)];
/// τ values where the modulus identity holds on every pair.
pub const MODULUS_TAUS: [f64; 2] = [0.0, 1.0];

/// Scalar τ or a sweep list.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TauSpec {
    Scalar(f64),
    List(Vec<f64>),
}

impl TauSpec {
    pub fn values(&self) -> Vec<f64> {
        match self {
            TauSpec::Scalar(t) => vec![*t],
            TauSpec::List(v) => v.clone(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LatticeSpec {
    pub a: usize,
    pub b: usize,
}

/// Report file names, relative to the output directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ReportPaths {
    pub verify: String,
    pub sweep: String,
    pub wiener: String,
    pub norms: String,
    /// Prefix for the per-mode envelope tables.
    pub channel: String,
}

impl Default for ReportPaths {
    fn default() -> Self {
        Self {
            verify: "verify.csv".into(),
            sweep: "sweep.csv".into(),
            wiener: "wiener.json".into(),
            norms: "norms.json".into(),
            channel: "channel".into(),
        }
    }
}

/// Which verify suites run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SuiteFlags {
    pub fundamental_identity: bool,
    pub stft_inversion: bool,
    pub duality: bool,
    pub round_trip: bool,
    pub convert_symbol: bool,
    pub covariance: bool,
    pub modulus_identity: bool,
}

impl Default for SuiteFlags {
    fn default() -> Self {
        Self {
            fundamental_identity: true,
            stft_inversion: true,
            duality: true,
            round_trip: true,
            convert_symbol: true,
            covariance: true,
            modulus_identity: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(rename = "N")]
    pub n: usize,
    pub tau: TauSpec,
    pub symbol: SymbolGenerator,
    pub window: WindowGenerator,
    pub lattice: LatticeSpec,
    /// Weight order of `v_s`.
    pub s: f64,
    pub seed: u64,
    /// RNG algorithm identifier; only "chacha8" is supported.
    pub rng: String,
    /// Random inputs per verify suite, and trials per boundedness estimate.
    pub trials: usize,
    /// Largest N for which full-grid channel matrices are built.
    pub channel_cap: usize,
    pub reports: ReportPaths,
    pub suites: SuiteFlags,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            n: 8,
            tau: TauSpec::Scalar(0.5),
            symbol: SymbolGenerator::default(),
            window: WindowGenerator::default(),
            lattice: LatticeSpec { a: 2, b: 2 },
            s: 1.0,
            seed: 7,
            rng: RNG_ALGORITHM.into(),
            trials: 10,
            channel_cap: DEFAULT_FULL_CAP,
            reports: ReportPaths::default(),
            suites: SuiteFlags::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Verify,
    Sweep,
    Wiener,
    Norms,
    Channel,
}

impl Command {
    fn needs_full_channel(self, lattice: LatticeSpec) -> bool {
        match self {
            Command::Verify | Command::Sweep | Command::Wiener => true,
            Command::Channel => lattice.a == 1 && lattice.b == 1,
            Command::Norms => false,
        }
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| TfqError::Config(e.to_string()))
    }

    pub fn grid(&self) -> Result<Grid> {
        Grid::new(self.n)
    }

    pub fn lattice(&self) -> Result<Lattice> {
        Lattice::new(self.lattice.a, self.lattice.b, self.grid()?)
    }

    /// Checks every constraint the command depends on.
    pub fn validate(&self, cmd: Command) -> Result<()> {
        if self.rng != RNG_ALGORITHM {
            return Err(TfqError::Config(format!(
                "unsupported rng algorithm \"{}\" (expected \"{RNG_ALGORITHM}\")",
                self.rng
            )));
        }
        self.grid()?;
        self.lattice()?;
        let taus = self.tau.values();
        if taus.is_empty() {
            return Err(TfqError::Config("tau list is empty".into()));
        }
        for &t in &taus {
            check_tau(t)?;
        }
        Weight::polynomial(self.s)?;
        if self.trials == 0 {
            return Err(TfqError::Config("trials must be at least 1".into()));
        }
        if cmd.needs_full_channel(self.lattice) && self.n > self.channel_cap {
            return Err(TfqError::ChannelTooLarge);
        }
        self.symbol.validate()?;
        self.window.validate()?;
        Ok(())
    }

    fn first_tau(&self) -> f64 {
        self.tau.values()[0]
    }
}

/// Outcome of one verify suite.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteResult {
    pub name: &'static str,
    pub cases: usize,
    pub max_residual: f64,
    pub tolerance: f64,
    pub passed: bool,
}

fn rel(diff: f64, scale: f64) -> f64 {
    if scale > 0.0 {
        diff / scale
    } else {
        diff
    }
}

fn signal_residual(a: &Signal, b: &Signal) -> f64 {
    rel(a.sub(b).norm(), b.norm())
}

fn op_residual(a: &OperatorMatrix, b: &OperatorMatrix) -> f64 {
    rel(a.sub(b).hs_norm(), b.hs_norm())
}

struct Acc {
    name: &'static str,
    cases: usize,
    max: f64,
}

impl Acc {
    fn new(name: &'static str) -> Self {
        Self { name, cases: 0, max: 0.0 }
    }

    fn push(&mut self, r: f64) {
        self.cases += 1;
        // NaN must fail the suite.
        self.max = if r.is_nan() { f64::INFINITY } else { self.max.max(r) };
    }

    fn finish(self) -> SuiteResult {
        SuiteResult {
            name: self.name,
            cases: self.cases,
            max_residual: self.max,
            tolerance: VERIFY_TOL,
            passed: self.max < VERIFY_TOL,
        }
    }
}

/// Runs the enabled exact-identity suites on `trials` seeded inputs.
pub fn verify_suites(cfg: &ExperimentConfig) -> Result<Vec<SuiteResult>> {
    let grid = cfg.grid()?;
    let n = grid.n();
    let phi = cfg.window.build(grid);
    let flags = &cfg.suites;
    let mut rng = seeded(cfg.seed);
    let mut fi = Acc::new("fundamental-identity");
    let mut inv = Acc::new("stft-inversion");
    let mut dual = Acc::new("duality");
    let mut rt = Acc::new("round-trip");
    let mut conv = Acc::new("convert-symbol");
    let mut cov = Acc::new("covariance");
    let mut modu = Acc::new("modulus-identity");

    for _ in 0..cfg.trials {
        let f = random_signal(grid, &mut rng);
        let g = random_signal(grid, &mut rng);
        let sigma = random_grid(grid, &mut rng);

        if flags.fundamental_identity {
            let lhs = stft(&f, &g)?;
            let rhs_base = stft(&dft(&f), &dft(&g))?;
            let mut worst = 0.0f64;
            let mut scale = 0.0f64;
            for x in 0..n {
                for om in 0..n {
                    let r = unit_phase(-((x * om) as i64), n) * rhs_base.get(om, (n - x) % n);
                    worst = worst.max((lhs.get(x, om) - r).norm());
                    scale = scale.max(lhs.get(x, om).norm());
                }
            }
            fi.push(rel(worst, scale));
        }
        if flags.stft_inversion {
            let c = inversion_constant(n) / g.norm().powi(2);
            let back = stft_adjoint(&stft(&f, &g)?, &g)?.scale(Complex64::new(c, 0.0));
            inv.push(signal_residual(&back, &f));
        }
        if flags.duality {
            for &t in &DUALITY_TAUS {
                let lhs = op_tau(&sigma, t)?.apply(&f)?.inner(&g);
                let rhs = sigma.inner(&tau_wigner(&g, &f, t)?);
                dual.push(rel((lhs - rhs).norm(), lhs.norm().max(rhs.norm())));
            }
        }
        if flags.round_trip {
            for &t in &ROUND_TRIP_TAUS {
                let back = dequantize(&op_tau(&sigma, t)?, t)?;
                rt.push(rel(back.sub(&sigma).frobenius(), sigma.frobenius()));
            }
        }
        if flags.convert_symbol {
            for &(t1, t2) in &CONVERT_PAIRS {
                let a = op_tau(&convert_symbol(&sigma, t1, t2)?, t2)?;
                conv.push(op_residual(&a, &op_tau(&sigma, t1)?));
            }
        }
        if flags.covariance {
            for k in 0..=10 {
                cov.push(covariance_check(&sigma, k as f64 / 10.0)?);
            }
        }
        if flags.modulus_identity {
            for &t in &MODULUS_TAUS {
                let r = modulus_identity(&sigma, t, &phi)?;
                modu.push(r.forward_residual.max(r.inverse_residual));
            }
        }
    }

    let all = [
        (flags.fundamental_identity, fi),
        (flags.stft_inversion, inv),
        (flags.duality, dual),
        (flags.round_trip, rt),
        (flags.convert_symbol, conv),
        (flags.covariance, cov),
        (flags.modulus_identity, modu),
    ];
    Ok(all.into_iter().filter(|(on, _)| *on).map(|(_, a)| a.finish()).collect())
}

fn csv_writer() -> csv::Writer<Vec<u8>> {
    csv::Writer::from_writer(Vec::new())
}

fn csv_err(e: csv::Error) -> TfqError {
    TfqError::InvalidArgument(e.to_string())
}

pub fn verify_csv(results: &[SuiteResult]) -> Result<String> {
    let mut w = csv_writer();
    w.write_record(["suite", "cases", "max_residual", "tolerance", "status"])
        .map_err(csv_err)?;
    for r in results {
        w.write_record([
            r.name.to_string(),
            r.cases.to_string(),
            fmt_sig(r.max_residual),
            fmt_sig(r.tolerance),
            status(r.passed).to_string(),
        ])
        .map_err(csv_err)?;
    }
    finish_csv(w)
}

fn status(ok: bool) -> &'static str {
    if ok {
        "pass"
    } else {
        "FAIL"
    }
}

/// Plain-text table printed by `tfq verify`.
pub fn verify_table(results: &[SuiteResult]) -> String {
    let mut out = format!(
        "{:<22} {:>6}  {:<28} {:<16} {}\n",
        "suite", "cases", "max_residual", "tolerance", "status"
    );
    for r in results {
        out.push_str(&format!(
            "{:<22} {:>6}  {:<28} {:<16} {}\n",
            r.name,
            r.cases,
            fmt_sig(r.max_residual),
            fmt_sig(r.tolerance),
            status(r.passed)
        ));
    }
    let passed = results.iter().filter(|r| r.passed).count();
    out.push_str(&format!("{passed}/{} suites passed\n", results.len()));
    out
}

/// One row of the τ sweep.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub tau: f64,
    /// Difference envelope on the configured lattice.
    pub difference_l1: f64,
    pub sjostrand_norm: f64,
    pub sum_l1: f64,
    /// "shifted" inside (0, 1), "weak" at the endpoints.
    pub shifted_mode: &'static str,
    pub shifted_l1: f64,
    pub fsjostrand_norm: f64,
    pub m22_max_ratio: f64,
    pub m22_bound: f64,
}

fn sweep_row(cfg: &ExperimentConfig, sigma: &Symbol, phi: &Signal, tau: f64) -> Result<SweepRow> {
    let v = Weight::polynomial(cfg.s)?;
    let diag = almost_diag_report(sigma, tau, phi, cfg.lattice()?, cfg.s)?;
    let full = channel_matrix_capped(sigma, tau, phi, Domain::Full, cfg.channel_cap)?;
    let sum_l1 = ell1v(&envelope(&full, EnvelopeMode::Sum), &v);
    let form = if tau > 0.0 && tau < 1.0 { FForm::Shifted } else { FForm::Weak };
    let f = fclass_diag_report(sigma, tau, phi, cfg.s, form)?;
    let b = boundedness_report(
        sigma,
        tau,
        NormPair::Modulation { p: 2.0, q: 2.0, s: cfg.s },
        phi,
        cfg.trials,
        cfg.seed,
    )?;
    Ok(SweepRow {
        tau,
        difference_l1: diag.envelope_l1,
        sjostrand_norm: diag.class_norm,
        sum_l1,
        shifted_mode: if form == FForm::Shifted { "shifted" } else { "weak" },
        shifted_l1: f.envelope_l1,
        fsjostrand_norm: f.class_norm,
        m22_max_ratio: b.max_ratio,
        m22_bound: b.norm_bound,
    })
}

/// Sweep rows in the order of the configured τ list.
pub fn sweep_rows(cfg: &ExperimentConfig) -> Result<Vec<SweepRow>> {
    let grid = cfg.grid()?;
    let sigma = cfg.symbol.build(grid, cfg.seed);
    let phi = cfg.window.build(grid);
    cfg.tau
        .values()
        .par_iter()
        .map(|&t| sweep_row(cfg, &sigma, &phi, t))
        .collect()
}

pub fn sweep_csv(rows: &[SweepRow]) -> Result<String> {
    let mut w = csv_writer();
    w.write_record([
        "tau",
        "difference_l1",
        "sjostrand_norm",
        "sum_l1",
        "shifted_mode",
        "shifted_l1",
        "fsjostrand_norm",
        "m22_max_ratio",
        "m22_bound",
    ])
    .map_err(csv_err)?;
    for r in rows {
        w.write_record([
            fmt_sig(r.tau),
            fmt_sig(r.difference_l1),
            fmt_sig(r.sjostrand_norm),
            fmt_sig(r.sum_l1),
            r.shifted_mode.to_string(),
            fmt_sig(r.shifted_l1),
            fmt_sig(r.fsjostrand_norm),
            fmt_sig(r.m22_max_ratio),
            fmt_sig(r.m22_bound),
        ])
        .map_err(csv_err)?;
    }
    finish_csv(w)
}

fn wiener_json(tau: f64, r: &WienerReport) -> Value {
    json!({
        "tau": tau,
        "invertible": r.invertible,
        "condition_number": r.condition_number,
        "inverse_symbol_norm": r.inverse_symbol_norm,
        "complementary_symbol_norm": r.complementary_symbol_norm,
        "forward_envelope_l1": r.forward_envelope_l1,
        "inverse_envelope_l1": r.inverse_envelope_l1,
        "requantize_residual": r.requantize_residual,
        "class_tag": r.class_tag.as_str(),
    })
}

/// Inverse-symbol rows for every τ, plus composition rows for τ ∈ (0, 1)
/// with `a = b = σ` and `τ₀ = 1/2`.
pub fn wiener_document(cfg: &ExperimentConfig) -> Result<Value> {
    let grid = cfg.grid()?;
    let sigma = cfg.symbol.build(grid, cfg.seed);
    let phi = cfg.window.build(grid);
    let tag = cfg.symbol.class_tag();
    let mut inverse = Vec::new();
    let mut composition = Vec::new();
    for t in cfg.tau.values() {
        let r = wiener_experiment(&sigma, t, cfg.s, &phi, tag)?;
        inverse.push(wiener_json(t, &r));
        if t > 0.0 && t < 1.0 {
            let c = composition_symmetry_check(&sigma, &sigma, t, 0.5, &phi, cfg.s)?;
            let prod = op_tau(&sigma, t)?.compose(&op_tau(&sigma, 1.0 - t)?);
            composition.push(json!({
                "tau": t,
                "tau0": 0.5,
                "weyl_class_norm": c.weyl_class_norm,
                "weyl_fclass_norm": c.weyl_fclass_norm,
                "c1_fclass_norm": c.c1_fclass_norm,
                "c2_fclass_norm": c.c2_fclass_norm,
                "same_tau_fclass_norm": c.same_tau_fclass_norm,
                "reproduction_residual": op_residual(&op_tau(&c.c, 0.5)?, &prod),
            }));
        }
    }
    Ok(json!({
        "N": cfg.n,
        "s": cfg.s,
        "inverse": inverse,
        "composition": composition,
    }))
}

/// Class norms of the symbol and modulation/amalgam norms of a seeded signal.
pub fn norm_reports(cfg: &ExperimentConfig) -> Result<Vec<NormReport>> {
    let grid = cfg.grid()?;
    let sigma = cfg.symbol.build(grid, cfg.seed);
    let phi = cfg.window.build(grid);
    let tau = cfg.first_tau();
    let s = cfg.s;
    let v = Weight::polynomial(s)?;
    let win = symbol_window(&phi, tau)?;
    let inf = f64::INFINITY;
    let mut out = vec![
        NormReport {
            space: "sjostrand".into(),
            p: inf,
            q: 1.0,
            s,
            value: sjostrand_norm(&sigma, &win, &v)?,
        },
        NormReport {
            space: "f-sjostrand".into(),
            p: inf,
            q: 1.0,
            s,
            value: fsjostrand_norm(&sigma, &win, &v)?,
        },
    ];
    let f = random_signal(grid, &mut seeded(cfg.seed));
    let lw = LineWeight::Polynomial { s };
    for (p, q) in [(1.0, 1.0), (2.0, 2.0), (inf, inf), (1.0, inf), (inf, 1.0)] {
        out.push(NormReport {
            space: "modulation".into(),
            p,
            q,
            s,
            value: modulation_norm(&f, &phi, &MixedNormSpec::new(p, q, v.clone())?)?,
        });
        out.push(NormReport {
            space: "amalgam".into(),
            p,
            q,
            s,
            value: amalgam_norm(&f, &phi, p, q, &lw, &lw)?,
        });
    }
    Ok(out)
}

/// Envelope tables (name, CSV) and the diagonalization summary.
pub fn channel_outputs(cfg: &ExperimentConfig) -> Result<(Vec<(String, String)>, Value)> {
    let grid = cfg.grid()?;
    let sigma = cfg.symbol.build(grid, cfg.seed);
    let phi = cfg.window.build(grid);
    let tau = cfg.first_tau();
    let lattice = cfg.lattice()?;
    let domain = if lattice.a == 1 && lattice.b == 1 {
        Domain::Full
    } else {
        Domain::Lattice(lattice)
    };
    let v = Weight::polynomial(cfg.s)?;
    let cm = channel_matrix_capped(&sigma, tau, &phi, domain, cfg.channel_cap)?;
    let mut modes = vec![EnvelopeMode::Difference, EnvelopeMode::Sum];
    if tau > 0.0 && tau < 1.0 {
        modes.push(EnvelopeMode::Shifted(LinearMap::utau(tau)?));
    } else {
        modes.push(EnvelopeMode::Weak { tau });
    }
    let mut tables = Vec::new();
    let mut l1 = serde_json::Map::new();
    for m in modes {
        let env = envelope(&cm, m);
        l1.insert(m.name().into(), json!(ell1v(&env, &v)));
        tables.push((m.name().to_string(), env.to_csv(&v)?));
    }
    let diag = almost_diag_report(&sigma, tau, &phi, lattice, cfg.s)?;
    let summary = json!({
        "N": cfg.n,
        "tau": tau,
        "s": cfg.s,
        "lattice": [lattice.a, lattice.b],
        "envelope_l1": l1,
        "almost_diagonalization": serde_json::to_value(&diag)
            .map_err(|e| TfqError::InvalidArgument(e.to_string()))?,
    });
    Ok((tables, summary))
}

/// Runs `cmd` and writes its reports under `out`. Returns the exit code.
pub fn run(cmd: Command, cfg: &ExperimentConfig, out: &Path, quiet: bool) -> Result<i32> {
    cfg.validate(cmd)?;
    let paths = &cfg.reports;
    match cmd {
        Command::Verify => {
            let results = verify_suites(cfg)?;
            write_file(&out.join(&paths.verify), &verify_csv(&results)?)?;
            if !quiet {
                print!("{}", verify_table(&results));
            }
            Ok(if results.iter().all(|r| r.passed) { EXIT_OK } else { EXIT_FAILED })
        }
        Command::Sweep => {
            let rows = sweep_rows(cfg)?;
            let path = out.join(&paths.sweep);
            write_file(&path, &sweep_csv(&rows)?)?;
            if !quiet {
                println!("{} rows written to {}", rows.len(), path.display());
            }
            Ok(EXIT_OK)
        }
        Command::Wiener => {
            let doc = wiener_document(cfg)?;
            let path = out.join(&paths.wiener);
            write_file(&path, &render_json(&doc))?;
            if !quiet {
                println!("wiener report written to {}", path.display());
            }
            Ok(EXIT_OK)
        }
        Command::Norms => {
            let reports: Vec<Value> = norm_reports(cfg)?.iter().map(NormReport::to_json).collect();
            let path = out.join(&paths.norms);
            write_file(&path, &render_json(&Value::Array(reports)))?;
            if !quiet {
                println!("norm reports written to {}", path.display());
            }
            Ok(EXIT_OK)
        }
        Command::Channel => {
            let (tables, summary) = channel_outputs(cfg)?;
            for (mode, csv) in &tables {
                write_file(&out.join(format!("{}_{mode}.csv", paths.channel)), csv)?;
            }
            let path = out.join(format!("{}.json", paths.channel));
            write_file(&path, &render_json(&summary))?;
            if !quiet {
                println!("channel envelopes written to {}", out.display());
            }
            Ok(EXIT_OK)
        }
    }
}
