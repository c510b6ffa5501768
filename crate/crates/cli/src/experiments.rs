//! One runner per subcommand. Each writes deterministic data files into
//! `config.out` and returns the run report.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use rmtlab::chaosmaps::MapSpec;
use rmtlab::entangle::{q_distribution, q_time_series};
use rmtlab::qcore::{matrix_power, qubit_count, Operator};
use rmtlab::stats::{
    delta_fit, ks_distance, AnalyticCdf, DeltaFitResult, EmpiricalDistribution, ReferenceKind,
    ReferenceLibrary,
};
use serde::Serialize;

use crate::analysis::{
    amplitude_histogram_csv, families, haar_mean_q, load_library, q_histogram_csv, read_operator,
    reference_curves_csv, spacing_histogram_csv, Families, ReferenceRequest,
};
use crate::checks::{self, CheckContext, CriterionOutcome};
use crate::config::{Experiment, ExperimentConfig, OperatorFormat};
use crate::output::{RunOutput, RunReport};
use crate::source::OperatorSource;

/// Raised when `paper-check` finds failing criteria.
#[derive(Debug)]
pub struct AcceptanceFailure {
    pub failed: Vec<u8>,
}

impl std::fmt::Display for AcceptanceFailure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "acceptance criteria failed: {:?}", self.failed)
    }
}

impl std::error::Error for AcceptanceFailure {}

pub fn run(config: &ExperimentConfig) -> Result<RunReport> {
    config.validate()?;
    let mut out = RunOutput::new(&config.out, config.experiment.name());
    match config.experiment {
        Experiment::Gen => gen(config, &mut out)?,
        Experiment::Stats => stats(config, &mut out)?,
        Experiment::FitDelta => fit_delta(config, &mut out)?,
        Experiment::Fig1 => fig1(config, &mut out)?,
        Experiment::Fig2 => fig2(config, &mut out)?,
        Experiment::Fig3 => fig3(config, &mut out)?,
        Experiment::QTable => q_table(config, &mut out)?,
        Experiment::BuildRef => build_ref(config, &mut out)?,
        Experiment::PaperCheck => {
            let outcomes = paper_check(config, &mut out)?;
            let report = out.finish(config)?;
            let failed: Vec<u8> = outcomes
                .iter()
                .filter(|o| !o.passed)
                .map(|o| o.id)
                .collect();
            if !failed.is_empty() {
                return Err(AcceptanceFailure { failed }.into());
            }
            return Ok(report);
        }
    }
    out.finish(config)
}

fn source(config: &ExperimentConfig) -> Result<OperatorSource> {
    let spec = config
        .spec
        .as_deref()
        .context("a spec string is required")?;
    Ok(spec.parse()?)
}

/// Input operators: files when given, otherwise draws from `spec`.
fn input_operators(config: &ExperimentConfig, out: &mut RunOutput) -> Result<Vec<Operator>> {
    if !config.inputs.is_empty() {
        if config.spec.is_some() {
            bail!("give either a spec or input files, not both");
        }
        let ops: Vec<Operator> = config
            .inputs
            .iter()
            .map(|p| read_operator(p))
            .collect::<Result<_>>()?;
        let dim = ops[0].dim();
        if ops.iter().any(|u| u.dim() != dim) {
            bail!("input operators have different dimensions");
        }
        return ops
            .into_iter()
            .map(|u| {
                if config.power == 1 {
                    Ok(u)
                } else {
                    Ok(matrix_power(&u, config.power)?)
                }
            })
            .collect();
    }
    let src = source(config)?;
    out.stream_tag(format!("source/{src}"));
    Ok(src.operators(config.seed, config.samples, config.power)?)
}

fn reference_path(config: &ExperimentConfig) -> PathBuf {
    config
        .reference
        .clone()
        .unwrap_or_else(|| config.out.join("reference.rmtref"))
}

fn reference_request(config: &ExperimentConfig, dim: usize) -> ReferenceRequest {
    ReferenceRequest {
        dim,
        samples_per_delta: config.samples_per_delta,
        seed: config.seed,
    }
}

/// An explicitly given, existing library is used as is; otherwise one is
/// built (or reused from a previous run) at the resolved path.
fn obtain_library(
    config: &ExperimentConfig,
    dim: usize,
    out: &mut RunOutput,
) -> Result<ReferenceLibrary> {
    let path = reference_path(config);
    if config.reference.is_some() && path.exists() {
        return load_library(&path, dim);
    }
    out.stream_tag("reference");
    reference_request(config, dim).load_or_build(&path)
}

fn ks_summary(out: &mut RunOutput, prefix: &str, f: &Families) -> Result<String> {
    let ks_e = ks_distance(&f.elements, &AnalyticCdf::Exponential)?;
    let ks_v = ks_distance(&f.eigenvectors, &AnalyticCdf::Exponential)?;
    let ks_w = ks_distance(&f.spacings, &AnalyticCdf::WignerSurmiseCue)?;
    let ks_p = ks_distance(&f.spacings, &AnalyticCdf::POISSON_SPACING)?;
    out.scalar(format!("{prefix}ks_elements_exponential"), ks_e);
    out.scalar(format!("{prefix}ks_eigenvectors_exponential"), ks_v);
    out.scalar(format!("{prefix}ks_spacings_wigner_surmise"), ks_w);
    out.scalar(format!("{prefix}ks_spacings_poisson"), ks_p);
    Ok(format!("{ks_e},{ks_v},{ks_w},{ks_p}"))
}

const KS_HEADER: &str = "ks_elements_exponential,ks_eigenvectors_exponential,ks_spacings_wigner_surmise,ks_spacings_poisson";

fn write_families(out: &mut RunOutput, prefix: &str, f: &Families) -> Result<()> {
    out.write(
        &format!("{prefix}_element_hist.csv"),
        amplitude_histogram_csv(&f.elements).as_bytes(),
    )?;
    out.write(
        &format!("{prefix}_eigenvector_hist.csv"),
        amplitude_histogram_csv(&f.eigenvectors).as_bytes(),
    )?;
    out.write(
        &format!("{prefix}_spacing_hist.csv"),
        spacing_histogram_csv(&f.spacings).as_bytes(),
    )?;
    out.write(
        &format!("{prefix}_spacings.csv"),
        f.spacings.to_csv().as_bytes(),
    )
}

/// Pooled `Q` of every basis state after one application; `None` unless
/// the dimension is `2^n` with `n ≥ 2`.
fn q_values(ops: &[Operator]) -> Result<Option<EmpiricalDistribution>> {
    match qubit_count(ops[0].dim()) {
        Some(n) if n >= 2 => Ok(Some(q_distribution(ops, 1)?)),
        _ => Ok(None),
    }
}

fn write_q(out: &mut RunOutput, prefix: &str, q: &EmpiricalDistribution) -> Result<f64> {
    out.write(
        &format!("{prefix}_q_hist.csv"),
        q_histogram_csv(q).as_bytes(),
    )?;
    out.write(&format!("{prefix}_q_values.csv"), q.to_csv().as_bytes())?;
    Ok(q.mean().unwrap_or(f64::NAN))
}

fn gen(config: &ExperimentConfig, out: &mut RunOutput) -> Result<()> {
    let ops = input_operators(config, out)?;
    out.stage("generate");
    let mut worst: f64 = 0.0;
    for (k, u) in ops.iter().enumerate() {
        worst = worst.max(u.unitarity_residual());
        match config.format {
            OperatorFormat::Json => {
                out.write(&format!("operator_{k:04}.json"), u.to_json()?.as_bytes())?
            }
            OperatorFormat::Binary => out.write(&format!("operator_{k:04}.bin"), &u.to_binary())?,
        }
    }
    out.scalar("operators", ops.len() as f64);
    out.scalar("max_unitarity_residual", worst);
    out.stage("write");
    Ok(())
}

fn stats(config: &ExperimentConfig, out: &mut RunOutput) -> Result<()> {
    let ops = input_operators(config, out)?;
    out.stage("generate");
    let f = families(&ops)?;
    out.stage("spectra");
    write_families(out, "stats", &f)?;
    let ks = ks_summary(out, "", &f)?;
    out.write("stats_ks.csv", format!("{KS_HEADER}\n{ks}\n").as_bytes())?;
    if let Some(q) = q_values(&ops)? {
        let mean = write_q(out, "stats", &q)?;
        out.scalar("mean_q", mean);
    }
    out.write("reference_curves.csv", reference_curves_csv().as_bytes())?;
    out.scalar("operators", ops.len() as f64);
    out.stage("statistics");
    Ok(())
}

#[derive(Serialize)]
struct FitRecord {
    target: &'static str,
    #[serde(flatten)]
    fit: DeltaFitResult,
}

fn fits(f: &Families, lib: &ReferenceLibrary) -> Result<Vec<FitRecord>> {
    Ok(vec![
        FitRecord {
            target: "elements",
            fit: delta_fit(&f.elements, lib, ReferenceKind::EigenvectorAmplitude)?,
        },
        FitRecord {
            target: "eigenvectors",
            fit: delta_fit(&f.eigenvectors, lib, ReferenceKind::EigenvectorAmplitude)?,
        },
        FitRecord {
            target: "spacings",
            fit: delta_fit(&f.spacings, lib, ReferenceKind::EigenphaseSpacing)?,
        },
    ])
}

fn record_fits(out: &mut RunOutput, prefix: &str, records: &[FitRecord]) {
    for r in records {
        out.scalar(format!("{prefix}delta_{}", r.target), r.fit.best_delta);
        out.scalar(format!("{prefix}ks_fit_{}", r.target), r.fit.distance);
    }
}

fn fit_delta(config: &ExperimentConfig, out: &mut RunOutput) -> Result<()> {
    let ops = input_operators(config, out)?;
    out.stage("generate");
    let lib = obtain_library(config, ops[0].dim(), out)?;
    out.stage("reference");
    let records = fits(&families(&ops)?, &lib)?;
    record_fits(out, "", &records);
    out.write_json("fits.json", &records)?;
    out.stage("fit");
    Ok(())
}

fn build_ref(config: &ExperimentConfig, out: &mut RunOutput) -> Result<()> {
    let request = reference_request(config, config.reference_dim);
    out.stream_tag("reference");
    let lib = request.build()?;
    out.stage("build");
    let path = reference_path(config);
    lib.save(&path)
        .with_context(|| format!("saving {}", path.display()))?;
    out.scalar("grid_points", lib.delta_grid.len() as f64);
    out.scalar("samples_per_delta", lib.meta.samples_per_delta as f64);
    out.stage("save");
    Ok(())
}

fn tag(x: f64) -> String {
    format!("{x}")
}

pub const FIG1_DELTAS: [f64; 4] = [0.1, 0.5, 0.9, 0.98];
const FIG1_Q_DELTAS: [f64; 2] = [0.9, 0.98];
pub const FIG_DIM: usize = 256;

fn fig1(config: &ExperimentConfig, out: &mut RunOutput) -> Result<()> {
    let mut ks_rows = format!("delta,{KS_HEADER},mean_q\n");
    for delta in FIG1_DELTAS {
        let src = OperatorSource::Ensemble(rmtlab::ensembles::EnsembleSpec::Interpolating {
            dim: FIG_DIM,
            delta,
        });
        out.stream_tag(format!("source/{src}"));
        let ops = src.operators(config.seed, config.samples, 1)?;
        let f = families(&ops)?;
        let prefix = format!("fig1_d{}", tag(delta));
        write_families(out, &prefix, &f)?;
        let ks = ks_summary(out, &format!("d{}_", tag(delta)), &f)?;
        let mut mean_q = String::new();
        if FIG1_Q_DELTAS.contains(&delta) {
            let q = q_distribution(&ops, 1)?;
            let mean = write_q(out, &prefix, &q)?;
            out.scalar(format!("d{}_mean_q", tag(delta)), mean);
            mean_q = mean.to_string();
        }
        let _ = writeln!(ks_rows, "{delta},{ks},{mean_q}");
        out.stage(&format!("delta {delta}"));
    }
    out.write("fig1_ks.csv", ks_rows.as_bytes())?;
    out.write(
        "fig1_reference_curves.csv",
        reference_curves_csv().as_bytes(),
    )?;
    out.scalar("haar_mean_q", haar_mean_q(8));
    Ok(())
}

pub const FIG2_ITERATIONS: [usize; 4] = [2, 4, 8, 16];

fn fig2(config: &ExperimentConfig, out: &mut RunOutput) -> Result<()> {
    let lib = obtain_library(config, FIG_DIM, out)?;
    out.stage("reference");
    let mut fit_rows = String::from("m,target,reference_kind,best_delta,ks_distance\n");
    let mut q_rows = String::from("m,mean_q\n");
    for m in FIG2_ITERATIONS {
        let src = OperatorSource::Pseudo {
            n_qubits: 8,
            iterations: m,
        };
        out.stream_tag(format!("source/{src}"));
        let ops = src.operators(config.seed, config.samples, 1)?;
        let f = families(&ops)?;
        let prefix = format!("fig2_m{m}");
        write_families(out, &prefix, &f)?;
        let q = q_distribution(&ops, 1)?;
        let mean = write_q(out, &prefix, &q)?;
        out.scalar(format!("m{m}_mean_q"), mean);
        let _ = writeln!(q_rows, "{m},{mean}");
        let records = fits(&f, &lib)?;
        for r in &records {
            let _ = writeln!(
                fit_rows,
                "{m},{},{},{},{}",
                r.target,
                r.fit.reference_kind.name(),
                r.fit.best_delta,
                r.fit.distance
            );
        }
        record_fits(out, &format!("m{m}_"), &records);
        out.stage(&format!("m {m}"));
    }
    out.write("fig2_fits.csv", fit_rows.as_bytes())?;
    out.write("fig2_mean_q.csv", q_rows.as_bytes())?;
    out.write(
        "fig2_reference_curves.csv",
        reference_curves_csv().as_bytes(),
    )?;
    Ok(())
}

struct MapRun {
    name: &'static str,
    spec: MapSpec,
    t_max: u32,
    inset_times: &'static [u32],
}

fn fig3_maps(t_override: Option<u32>) -> Vec<MapRun> {
    let t = |default: u32| t_override.unwrap_or(default);
    vec![
        MapRun {
            name: "sawtooth_k1.5",
            spec: MapSpec::sawtooth(FIG_DIM, 1.5),
            t_max: t(50),
            inset_times: &[50],
        },
        MapRun {
            name: "sawtooth_k-1.5",
            spec: MapSpec::sawtooth(FIG_DIM, -1.5),
            t_max: t(50),
            inset_times: &[50],
        },
        MapRun {
            name: "harper_g1",
            spec: MapSpec::harper(FIG_DIM, 1.0),
            t_max: t(50),
            inset_times: &[50],
        },
        MapRun {
            name: "harper_g0.1",
            spec: MapSpec::harper(FIG_DIM, 0.1),
            t_max: t(50),
            inset_times: &[50],
        },
        MapRun {
            name: "baker",
            spec: MapSpec::baker(FIG_DIM),
            t_max: t(100),
            inset_times: &[1, 100],
        },
    ]
}

fn sample_std(xs: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
}

/// With `config.reference` set, the inset element distributions are also
/// δ-fitted.
fn fig3(config: &ExperimentConfig, out: &mut RunOutput) -> Result<()> {
    let lib = match config.reference {
        Some(_) => Some(obtain_library(config, FIG_DIM, out)?),
        None => None,
    };
    let mut fit_rows = String::from("map,t,reference_kind,best_delta,ks_distance\n");
    for run in fig3_maps(config.t_max) {
        let u = run.spec.build()?;
        let series = q_time_series(&u, run.t_max, false)?;
        out.write(
            &format!("fig3_q_{}.csv", run.name),
            series.to_csv().as_bytes(),
        )?;
        out.scalar(format!("{}_q1", run.name), series.mean_q[0]);
        out.scalar(
            format!("{}_q_final", run.name),
            *series.mean_q.last().unwrap_or(&f64::NAN),
        );
        let window = run.t_max.min(50);
        let start = run.t_max.saturating_sub(9).max(1);
        out.scalar(
            format!("{}_q_std_t1_{window}", run.name),
            sample_std(&series.mean_q[..window as usize]),
        );
        out.scalar(
            format!("{}_q_mean_t{start}_{}", run.name, run.t_max),
            series.window_mean(start, run.t_max).unwrap_or(f64::NAN),
        );
        for &t in run.inset_times {
            let ut = matrix_power(&u, t)?;
            let elements = crate::analysis::element_family(std::slice::from_ref(&ut));
            out.write(
                &format!("fig3_inset_{}_t{t}_element_hist.csv", run.name),
                amplitude_histogram_csv(&elements).as_bytes(),
            )?;
            if let Some(lib) = &lib {
                for kind in [
                    ReferenceKind::EigenvectorAmplitude,
                    ReferenceKind::EigenphaseSpacing,
                ] {
                    let fit = delta_fit(&elements, lib, kind)?;
                    let _ = writeln!(
                        fit_rows,
                        "{},{t},{},{},{}",
                        run.name,
                        kind.name(),
                        fit.best_delta,
                        fit.distance
                    );
                    out.scalar(
                        format!("{}_t{t}_delta_{}", run.name, kind.name()),
                        fit.best_delta,
                    );
                }
            }
        }
        out.stage(run.name);
    }
    if lib.is_some() {
        out.write("fig3_fits.csv", fit_rows.as_bytes())?;
    }
    let haar = haar_mean_q(8);
    let t_max = config.t_max.unwrap_or(100);
    let mut reference = String::from("t,mean_q\n");
    for t in 1..=t_max {
        let _ = writeln!(reference, "{t},{haar}");
    }
    out.write("fig3_random_matrix_reference.csv", reference.as_bytes())?;
    out.scalar("haar_mean_q", haar);
    Ok(())
}

/// Rows `quantity,measured,expected`.
fn q_table(config: &ExperimentConfig, out: &mut RunOutput) -> Result<()> {
    let mut rows: Vec<(String, f64, f64)> = Vec::new();
    let cue =
        OperatorSource::Ensemble(rmtlab::ensembles::EnsembleSpec::CueFromGue { dim: FIG_DIM });
    out.stream_tag(format!("source/{cue}"));
    let q = q_distribution(&cue.operators(config.seed, config.samples, 1)?, 1)?;
    rows.push(("cue <Q>".into(), q.mean().unwrap_or(f64::NAN), 0.9883));
    rows.push(("haar <Q> (exact)".into(), haar_mean_q(8), 0.9883));
    for (m, expected) in [(2, 0.7004), (4, 0.8416), (8, 0.9339), (16, 0.9790)] {
        let src = OperatorSource::Pseudo {
            n_qubits: 8,
            iterations: m,
        };
        out.stream_tag(format!("source/{src}"));
        let q = q_distribution(&src.operators(config.seed, config.samples, 1)?, 1)?;
        rows.push((
            format!("pseudo m={m} <Q>"),
            q.mean().unwrap_or(f64::NAN),
            expected,
        ));
    }
    out.stage("ensembles");
    let saw = q_time_series(&MapSpec::sawtooth(FIG_DIM, 1.5).build()?, 50, false)?;
    rows.push(("sawtooth k=1.5 <Q(1)>".into(), saw.mean_q[0], 1.0));
    rows.push(("sawtooth k=1.5 <Q(50)>".into(), saw.mean_q[49], 0.98826));
    let h1 = q_time_series(&MapSpec::harper(FIG_DIM, 1.0).build()?, 50, false)?;
    rows.push(("harper gamma=1 <Q(1)>".into(), h1.mean_q[0], 0.9814));
    rows.push(("harper gamma=1 <Q(50)>".into(), h1.mean_q[49], 0.9882));
    let h01 = q_time_series(&MapSpec::harper(FIG_DIM, 0.1).build()?, 60, false)?;
    rows.push((
        "harper gamma=0.1 mean <Q(t)> t=40..60".into(),
        h01.window_mean(40, 60).unwrap_or(f64::NAN),
        0.95,
    ));
    let b = q_time_series(&MapSpec::baker(FIG_DIM).build()?, 100, false)?;
    rows.push(("baker <Q(1)>".into(), b.mean_q[0], 0.3080));
    rows.push(("baker <Q(100)>".into(), b.mean_q[99], 0.9597));
    out.stage("maps");
    let mut csv = String::from("quantity,measured,expected\n");
    for (name, measured, expected) in &rows {
        let _ = writeln!(csv, "{name},{measured},{expected}");
        out.scalar(name.clone(), *measured);
    }
    out.write("q_table.csv", csv.as_bytes())
}

fn paper_check(config: &ExperimentConfig, out: &mut RunOutput) -> Result<Vec<CriterionOutcome>> {
    let request = reference_request(config, checks::DIM);
    let ctx = CheckContext::new(config.seed, config.samples, request, reference_path(config));
    out.stream_tag("check/*");
    out.stream_tag("reference");
    let outcomes = checks::run_all(&ctx, |o| println!("{o}"));
    for o in &outcomes {
        out.scalar(
            format!("criterion_{:02}_passed", o.id),
            f64::from(u8::from(o.passed)),
        );
    }
    out.write_json("paper_check.json", &outcomes)?;
    out.stage("criteria");
    Ok(outcomes)
}

/// Path of the manifest a finished run leaves in `dir`.
pub fn manifest_in(dir: &Path) -> PathBuf {
    dir.join("manifest.json")
}
