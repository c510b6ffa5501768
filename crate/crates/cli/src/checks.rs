//! The ten acceptance criteria, each with pinned targets and tolerances.
//!
//! Runs at `N = 256` (`n = 8`). `samples` sets the number of matrices per
//! Monte-Carlo criterion (100 by default); the reference library needed by
//! the δ-fit criteria is loaded from or saved to `reference_path`.

use std::fmt;
use std::path::PathBuf;
use std::sync::OnceLock;

use anyhow::Result;
use rayon::prelude::*;
use rmtlab::chaosmaps::{baker, harper, sawtooth};
use rmtlab::circuits::{pseudo_random_operator, PseudoRandomSpec, RotationLayer};
use rmtlab::ensembles::{cue_from_gue, hurwitz_sample, Generator, RngStream};
use rmtlab::entangle::{meyer_wallach_q, q_distribution, q_time_series};
use rmtlab::qcore::{
    apply, qubit_purity, spectral_decomposition, unitarity_tolerance, Operator, StateVector, C64,
};
use rmtlab::stats::{
    delta_fit, eigenphase_spacings, ks_distance, AnalyticCdf, ReferenceKind, ReferenceLibrary,
};
use serde::Serialize;

use crate::analysis::{element_family, families, haar_mean_q, ReferenceRequest};

pub const N_QUBITS: usize = 8;
pub const DIM: usize = 1 << N_QUBITS;

/// One measured quantity and the condition it was held to.
#[derive(Clone, Debug, Serialize)]
pub struct Measurement {
    pub label: String,
    pub value: f64,
    /// Human-readable condition, e.g. `0.9883 ± 0.002` or `< 0.01`.
    pub condition: String,
    pub passed: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct CriterionOutcome {
    pub id: u8,
    pub title: &'static str,
    pub passed: bool,
    pub measurements: Vec<Measurement>,
    /// Set when the criterion could not be evaluated.
    pub error: Option<String>,
}

impl fmt::Display for CriterionOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} [{:>2}] {}",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.title
        )?;
        if let Some(e) = &self.error {
            return write!(f, ": error: {e}");
        }
        let parts: Vec<String> = self
            .measurements
            .iter()
            .map(|m| {
                format!(
                    "{} = {} ({}){}",
                    m.label,
                    num(m.value),
                    m.condition,
                    if m.passed { "" } else { " !" }
                )
            })
            .collect();
        if !parts.is_empty() {
            write!(f, ": {}", parts.join("; "))?;
        }
        Ok(())
    }
}

fn num(x: f64) -> String {
    if x == 0.0 || (1e-3..1e4).contains(&x.abs()) {
        format!("{}", (x * 1e6).round() / 1e6)
    } else {
        format!("{x:.3e}")
    }
}

#[derive(Default)]
struct Sheet {
    measurements: Vec<Measurement>,
}

impl Sheet {
    fn within(&mut self, label: impl Into<String>, value: f64, target: f64, tol: f64) {
        self.push(
            label,
            value,
            format!("{target} ± {tol}"),
            (value - target).abs() <= tol,
        );
    }

    fn below(&mut self, label: impl Into<String>, value: f64, bound: f64) {
        self.push(label, value, format!("< {}", num(bound)), value < bound);
    }

    fn above(&mut self, label: impl Into<String>, value: f64, bound: f64) {
        self.push(label, value, format!("> {}", num(bound)), value > bound);
    }

    fn at_least(&mut self, label: impl Into<String>, value: f64, bound: f64) {
        self.push(label, value, format!(">= {}", num(bound)), value >= bound);
    }

    fn at_most(&mut self, label: impl Into<String>, value: f64, bound: f64) {
        self.push(label, value, format!("<= {}", num(bound)), value <= bound);
    }

    fn push(&mut self, label: impl Into<String>, value: f64, condition: String, passed: bool) {
        self.measurements.push(Measurement {
            label: label.into(),
            value,
            condition,
            passed,
        });
    }
}

pub struct CheckContext {
    pub seed: u64,
    pub samples: usize,
    pub reference: ReferenceRequest,
    pub reference_path: PathBuf,
    library: OnceLock<ReferenceLibrary>,
    cue: OnceLock<Vec<Operator>>,
}

impl CheckContext {
    pub fn new(
        seed: u64,
        samples: usize,
        reference: ReferenceRequest,
        reference_path: PathBuf,
    ) -> Self {
        CheckContext {
            seed,
            samples,
            reference,
            reference_path,
            library: OnceLock::new(),
            cue: OnceLock::new(),
        }
    }

    fn stream(&self, tag: &str, k: usize) -> RngStream {
        RngStream::derive(self.seed, &format!("check/{tag}"), k as u64)
    }

    fn library(&self) -> Result<&ReferenceLibrary> {
        if let Some(lib) = self.library.get() {
            return Ok(lib);
        }
        let lib = self.reference.load_or_build(&self.reference_path)?;
        Ok(self.library.get_or_init(|| lib))
    }

    fn cue_samples(&self) -> Result<&[Operator]> {
        if let Some(ops) = self.cue.get() {
            return Ok(ops);
        }
        let ops = (0..self.samples)
            .into_par_iter()
            .map(|k| cue_from_gue(DIM, &mut self.stream("cue-gue", k).generator()))
            .collect::<rmtlab::Result<Vec<_>>>()?;
        Ok(self.cue.get_or_init(|| ops))
    }

    fn hurwitz(&self, tag: &str, delta: f64, count: usize) -> Result<Vec<Operator>> {
        Ok((0..count)
            .into_par_iter()
            .map(|k| hurwitz_sample(DIM, delta, &mut self.stream(tag, k).generator()))
            .collect::<rmtlab::Result<_>>()?)
    }

    fn pseudo(&self, m: usize) -> Result<Vec<Operator>> {
        Ok((0..self.samples)
            .into_par_iter()
            .map(|k| {
                pseudo_random_operator(&PseudoRandomSpec {
                    n_qubits: N_QUBITS,
                    iterations: m,
                    rng: self.stream(&format!("pseudo-{m}"), k),
                })
            })
            .collect::<rmtlab::Result<_>>()?)
    }

    /// Matrices per δ-fit input in criterion 9.
    fn fit_samples(&self) -> usize {
        self.samples.clamp(1, 20)
    }
}

type Check = fn(&CheckContext, &mut Sheet) -> Result<()>;

pub const TITLES: [&str; 10] = [
    "CUE element statistics",
    "CUE entanglement",
    "Pseudo-random <Q> ladder",
    "Pseudo-random element delta-fits",
    "Sawtooth exactness",
    "Harper map entanglement",
    "Baker's map entanglement",
    "Randomness lag at delta = 0.98",
    "Delta-fit endpoint recovery",
    "Invariant suites",
];

const CHECKS: [Check; 10] = [
    cue_elements,
    cue_entanglement,
    pseudo_ladder,
    pseudo_fits,
    sawtooth_exactness,
    harper_entanglement,
    baker_entanglement,
    randomness_lag,
    endpoint_recovery,
    invariant_suites,
];

/// Evaluates criterion `id` (1-based).
pub fn run_criterion(ctx: &CheckContext, id: u8) -> CriterionOutcome {
    let idx = usize::from(id) - 1;
    let mut sheet = Sheet::default();
    let result = CHECKS[idx](ctx, &mut sheet);
    let error = result.err().map(|e| format!("{e:#}"));
    CriterionOutcome {
        id,
        title: TITLES[idx],
        passed: error.is_none()
            && !sheet.measurements.is_empty()
            && sheet.measurements.iter().all(|m| m.passed),
        measurements: sheet.measurements,
        error,
    }
}

/// Runs every criterion in order, calling `on_outcome` as each finishes.
pub fn run_all(
    ctx: &CheckContext,
    mut on_outcome: impl FnMut(&CriterionOutcome),
) -> Vec<CriterionOutcome> {
    (1..=10)
        .map(|id| {
            let outcome = run_criterion(ctx, id);
            on_outcome(&outcome);
            outcome
        })
        .collect()
}

fn cue_elements(ctx: &CheckContext, s: &mut Sheet) -> Result<()> {
    let elements = element_family(ctx.cue_samples()?);
    s.below(
        "KS(elements, 1-e^-x)",
        ks_distance(&elements, &AnalyticCdf::Exponential)?,
        0.01,
    );
    Ok(())
}

fn cue_entanglement(ctx: &CheckContext, s: &mut Sheet) -> Result<()> {
    let q = q_distribution(ctx.cue_samples()?, 1)?
        .mean()
        .unwrap_or(f64::NAN);
    s.within("<Q>", q, 0.9883, 0.002);
    s.within("<Q> - Haar oracle", q - haar_mean_q(N_QUBITS), 0.0, 0.002);
    Ok(())
}

const LADDER: [(usize, f64, f64); 4] = [
    (2, 0.7004, 0.02),
    (4, 0.8416, 0.015),
    (8, 0.9339, 0.01),
    (16, 0.9790, 0.005),
];

fn pseudo_ladder(ctx: &CheckContext, s: &mut Sheet) -> Result<()> {
    for (m, target, tol) in LADDER {
        let q = q_distribution(&ctx.pseudo(m)?, 1)?
            .mean()
            .unwrap_or(f64::NAN);
        s.within(format!("<Q> m={m}"), q, target, tol);
    }
    Ok(())
}

const ELEMENT_FITS: [(usize, f64); 4] = [(2, 0.70), (4, 0.78), (8, 0.88), (16, 0.98)];

fn pseudo_fits(ctx: &CheckContext, s: &mut Sheet) -> Result<()> {
    let lib = ctx.library()?;
    for (m, target) in ELEMENT_FITS {
        let elements = element_family(&ctx.pseudo(m)?);
        let fit = delta_fit(&elements, lib, ReferenceKind::EigenvectorAmplitude)?;
        s.within(format!("delta m={m}"), fit.best_delta, target, 0.06);
    }
    Ok(())
}

fn sawtooth_exactness(_: &CheckContext, s: &mut Sheet) -> Result<()> {
    let u = sawtooth(DIM, 1.5)?;
    let flat = 1.0 / (DIM as f64).sqrt();
    let spread = u
        .entries()
        .iter()
        .map(|z| (z.norm() - flat).abs())
        .fold(0.0, f64::max);
    s.below("max | |U_ij| - 1/sqrt(N) |", spread, 1e-13);
    let series = q_time_series(&u, 50, false)?;
    s.within("<Q(1)>", series.mean_q[0], 1.0, 1e-10);
    s.within("<Q(50)>", series.mean_q[49], 0.98826, 0.002);
    Ok(())
}

fn harper_entanglement(_: &CheckContext, s: &mut Sheet) -> Result<()> {
    let chaotic = q_time_series(&harper(DIM, 1.0)?, 50, false)?;
    s.within("gamma=1 <Q(1)>", chaotic.mean_q[0], 0.9814, 0.01);
    s.within("gamma=1 <Q(50)>", chaotic.mean_q[49], 0.9882, 0.005);
    let regular = q_time_series(&harper(DIM, 0.1)?, 60, false)?;
    let plateau = regular.window_mean(40, 60).unwrap_or(f64::NAN);
    s.within("gamma=0.1 mean <Q(t)>, t in [40,60]", plateau, 0.95, 0.01);
    Ok(())
}

fn baker_entanglement(_: &CheckContext, s: &mut Sheet) -> Result<()> {
    let series = q_time_series(&baker(DIM)?, 100, false)?;
    s.within("<Q(1)>", series.mean_q[0], 0.3080, 0.01);
    s.within("<Q(100)>", series.mean_q[99], 0.9597, 0.005);
    Ok(())
}

fn randomness_lag(ctx: &CheckContext, s: &mut Sheet) -> Result<()> {
    let f = families(&ctx.hurwitz("lag-0.98", 0.98, ctx.samples)?)?;
    let ks_elements = ks_distance(&f.elements, &AnalyticCdf::Exponential)?;
    let ks_vectors = ks_distance(&f.eigenvectors, &AnalyticCdf::Exponential)?;
    s.above(
        "KS(elements)/KS(eigenvectors)",
        ks_elements / ks_vectors,
        3.0,
    );
    s.below(
        "KS(spacings, CUE surmise)",
        ks_distance(&f.spacings, &AnalyticCdf::WignerSurmiseCue)?,
        0.02,
    );
    Ok(())
}

fn endpoint_recovery(ctx: &CheckContext, s: &mut Sheet) -> Result<()> {
    let lib = ctx.library()?;
    let count = ctx.fit_samples();
    let cue = &ctx.cue_samples()?[..count.min(ctx.samples)];
    let fit = delta_fit(
        &element_family(cue),
        lib,
        ReferenceKind::EigenvectorAmplitude,
    )?;
    s.at_least("CUE elements delta", fit.best_delta, 0.98);

    let cpe = families(&ctx.hurwitz("cpe", 0.0, count)?)?;
    let fit = delta_fit(&cpe.spacings, lib, ReferenceKind::EigenphaseSpacing)?;
    s.at_most("CPE spacings delta", fit.best_delta, 0.05);
    let fit = delta_fit(&cpe.eigenvectors, lib, ReferenceKind::EigenvectorAmplitude)?;
    s.at_most("CPE eigenvectors delta", fit.best_delta, 0.05);

    for delta in [0.1, 0.5, 0.9] {
        let f = families(&ctx.hurwitz(&format!("recover-{delta}"), delta, count)?)?;
        let fit = delta_fit(&f.eigenvectors, lib, ReferenceKind::EigenvectorAmplitude)?;
        s.within(
            format!("recovered delta (true {delta})"),
            fit.best_delta,
            delta,
            0.08,
        );
    }
    Ok(())
}

/// Randomized cases at `N ≤ 16` for criterion 10.
pub const INVARIANT_CASES: usize = 1000;

fn small_state(n: usize, g: &mut Generator) -> StateVector {
    let amps = (0..1usize << n)
        .map(|_| C64::new(g.gaussian(), g.gaussian()))
        .collect();
    StateVector::normalized(n, amps).expect("nonzero Gaussian state")
}

/// `Tr ρ_j²` from the full density matrix, independent of the 2×2 route.
fn purity_by_partial_trace(psi: &StateVector, j: usize) -> f64 {
    let dim = psi.dim();
    let a = psi.amplitudes();
    let bit = psi.n_qubits() - j;
    let mask = 1usize << bit;
    let mut reduced = [[C64::new(0.0, 0.0); 2]; 2];
    for k in 0..dim {
        for l in 0..dim {
            if k & !mask == l & !mask {
                reduced[(k >> bit) & 1][(l >> bit) & 1] += a[k] * a[l].conj();
            }
        }
    }
    (reduced[0][0] * reduced[0][0]
        + reduced[0][1] * reduced[1][0] * 2.0
        + reduced[1][1] * reduced[1][1])
        .re
}

#[derive(Default)]
struct Worst {
    unitarity: f64,
    q_range: f64,
    local: f64,
    spacing_mean: f64,
    partial_trace: f64,
    reconstruction: f64,
    replay_mismatches: usize,
}

fn invariant_suites(ctx: &CheckContext, s: &mut Sheet) -> Result<()> {
    let mut w = Worst::default();
    for case in 0..INVARIANT_CASES {
        let mut g = ctx.stream("invariants", case).generator();
        let dim = 2 + (g.uniform() * 15.0) as usize;
        let delta = g.uniform();
        let u = hurwitz_sample(dim, delta, &mut g)?;
        w.unitarity = w
            .unitarity
            .max(u.unitarity_residual() / unitarity_tolerance(dim));
        let mut replay = ctx.stream("invariants", case).generator();
        let _ = (replay.uniform(), replay.uniform());
        let again = hurwitz_sample(dim, delta, &mut replay)?;
        w.replay_mismatches += usize::from(again.to_binary() != u.to_binary());

        let sd = spectral_decomposition(&u)?;
        w.reconstruction = w.reconstruction.max(sd.reconstruct().max_abs_diff(&u));
        w.spacing_mean = w
            .spacing_mean
            .max((eigenphase_spacings(&sd).mean().unwrap_or(f64::NAN) - 1.0).abs());

        let n = 2 + case % 3;
        let psi = small_state(n, &mut g);
        let q = meyer_wallach_q(&psi)?;
        w.q_range = w.q_range.max((-q).max(q - 1.0));
        let local = RotationLayer::draw(n, &mut g).to_operator();
        w.local = w
            .local
            .max((meyer_wallach_q(&apply(&local, &psi)?)? - q).abs());
        for j in 1..=n {
            w.partial_trace = w
                .partial_trace
                .max((qubit_purity(&psi, j)? - purity_by_partial_trace(&psi, j)).abs());
        }
    }
    s.below(
        "max unitarity residual / tolerance (N<=16)",
        w.unitarity,
        1.0,
    );
    s.at_most("max Q excursion outside [0,1]", w.q_range, 0.0);
    s.at_most("max |Q(L psi) - Q(psi)|", w.local, 1e-10);
    s.below("max |mean spacing - 1|", w.spacing_mean, 1e-12);
    s.below(
        "max |purity - partial-trace oracle|",
        w.partial_trace,
        1e-12,
    );
    s.below(
        "max reconstruction residual (N<=16)",
        w.reconstruction,
        1e-9,
    );
    s.at_most("replay mismatches", w.replay_mismatches as f64, 0.0);

    // Spot checks at N = 256.
    let spot = ctx.hurwitz("spot", 1.0, 2)?;
    let mut recon = 0.0f64;
    let mut unit = 0.0f64;
    for u in spot.iter().chain(ctx.cue_samples()?.iter().take(2)) {
        unit = unit.max(u.unitarity_residual() / unitarity_tolerance(DIM));
        recon = recon.max(spectral_decomposition(u)?.reconstruct().max_abs_diff(u));
    }
    for u in [sawtooth(DIM, 1.5)?, harper(DIM, 1.0)?, baker(DIM)?] {
        unit = unit.max(u.unitarity_residual() / unitarity_tolerance(DIM));
    }
    s.below("max unitarity residual / tolerance (N=256)", unit, 1.0);
    s.below("max reconstruction residual (N=256)", recon, 1e-9);
    let replay = hurwitz_sample(DIM, 1.0, &mut ctx.stream("spot", 0).generator())?;
    s.at_most(
        "N=256 replay mismatch",
        f64::from(u8::from(replay.to_binary() != spot[0].to_binary())),
        0.0,
    );
    let psi = apply(&spot[0], &StateVector::basis(N_QUBITS, 0)?)?;
    let q = meyer_wallach_q(&psi)?;
    let layer =
        RotationLayer::draw(N_QUBITS, &mut ctx.stream("spot-local", 0).generator()).to_operator();
    s.at_most(
        "N=256 |Q(L psi) - Q(psi)|",
        (meyer_wallach_q(&apply(&layer, &psi)?)? - q).abs(),
        1e-10,
    );
    Ok(())
}
