//! Subcommand pipelines. Each writes its artifacts plus the resolved config
//! into the output directory and returns `Failed` when a check does not hold.

use std::collections::BTreeSet;
use std::fs;

use rayon::prelude::*;
use serde::Serialize;
use surfdec_core::curvature::{curvature_sample, CurvatureSample};
use surfdec_core::fourierlab::lemma::{
    hessian_identity_check, lemma_derivative_check, DerivativeRow, HessianReport, LemmaSetup,
};
use surfdec_core::fourierlab::presets::PreparedExperiment;
use surfdec_core::fourierlab::{
    prop5_experiment, sweep_and_fit, ExperimentRecord, ExperimentSpec, Family, FitResult, NormOptions, Preset, XKey,
};
use surfdec_core::partition::{
    check_tiling, count_violations, flatness_reports, maximality_witness, rescaling_certificates, split,
    CertificateRow, PieceCase, StageCount, DEFAULT_CONTAINMENT,
};
use surfdec_core::structure::{analyze_structure, DegeneracyCase};
use surfdec_core::{build_partition, PartitionManifest, Profile, ProfileSpec, ZeroPoint};

use crate::output::{delta_tag, write_csv, write_json, OutputTarget};
use crate::{CliError, RunConfig};

pub fn dispatch(name: &str, cfg: &RunConfig) -> Result<(), CliError> {
    match name {
        "analyze" => analyze(cfg),
        "partition" => partition(cfg),
        "verify" => verify(cfg),
        "experiment" => experiment(cfg),
        "prop5" => prop5(cfg),
        "lemma-check" => lemma_check(cfg),
        other => Err(CliError::Usage(format!("unknown subcommand {other:?}"))),
    }
}

fn target(cfg: &RunConfig, allow_file: bool) -> Result<OutputTarget, CliError> {
    let t = OutputTarget::new(cfg.out.as_deref().expect("resolved config has an output"), allow_file)?;
    let echo = t.echo_config(cfg)?;
    log::info!("resolved config written to {}", echo.display());
    Ok(t)
}

fn check(failures: Vec<String>) -> Result<(), CliError> {
    if failures.is_empty() {
        Ok(())
    } else {
        Err(CliError::Failed(failures.join("; ")))
    }
}

#[derive(Serialize)]
struct IntervalEntry {
    lo: f64,
    hi: f64,
    kind: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    zero: Option<usize>,
}

#[derive(Serialize)]
struct Analysis {
    profile: ProfileSpec,
    zeros: Vec<ZeroPoint>,
    intervals: Vec<IntervalEntry>,
}

fn analyze(cfg: &RunConfig) -> Result<(), CliError> {
    let p = cfg.require_profile()?.build()?;
    let out = target(cfg, false)?;
    let dom = p.domain();
    let n = cfg.samples.unwrap_or(257);
    let rows: Vec<CurvatureSample> = (0..n)
        .into_par_iter()
        .map(|i| curvature_sample(&p, split(dom.lo, dom.hi, n - 1, i)))
        .collect::<Result<_, _>>()?;
    write_csv(&out.path("curvature.csv"), &rows)?;

    let dec = analyze_structure(&p)?;
    let zeros: Vec<ZeroPoint> = dec.degenerate.iter().map(|d| d.zero).collect();
    let mut intervals = Vec::new();
    for (iv, z) in dec.pieces() {
        let zero = z.and_then(|z| zeros.iter().position(|w| w.r == z.r));
        intervals.push(IntervalEntry {
            lo: iv.lo,
            hi: iv.hi,
            kind: if zero.is_some() { "degenerate" } else { "nondegenerate" },
            zero,
        });
    }
    for z in &zeros {
        log::info!(
            "zero of γ'γ'' at r = {} ({}, n = {}), Δ = {}",
            z.r,
            z.case.as_str(),
            z.n,
            z.delta
        );
    }
    println!("{}: {} zeros, {} intervals", p.id(), zeros.len(), intervals.len());
    write_json(
        &out.path("structure.json"),
        &Analysis {
            profile: p.spec(),
            zeros,
            intervals,
        },
    )
}

fn write_manifest(path: &std::path::Path, m: &PartitionManifest) -> Result<(), CliError> {
    let mut text = m.to_json()?;
    text.push('\n');
    fs::write(path, text).map_err(|e| CliError::Failed(format!("{}: {e}", path.display())))
}

fn partition(cfg: &RunConfig) -> Result<(), CliError> {
    let p = cfg.require_profile()?.build()?;
    let out = target(cfg, true)?;
    if out.file.is_some() && cfg.deltas().len() != 1 {
        return Err(CliError::Usage("a .json output takes exactly one delta".into()));
    }
    let c = cfg.containment.unwrap_or(DEFAULT_CONTAINMENT);
    let mut failures = Vec::new();
    for &delta in cfg.deltas() {
        let m = build_partition(&p, delta)?;
        for line in &m.log {
            log::info!("{line}");
        }
        let tiling = check_tiling(&m);
        let reports = flatness_reports(&m, &p, c);
        let flat = reports.iter().filter(|r| r.pass).count();
        let worst = reports.iter().map(|r| r.deviation).fold(0.0, f64::max);
        let path = out
            .file
            .clone()
            .unwrap_or_else(|| out.path(&format!("manifest_{}.json", delta_tag(delta))));
        write_manifest(&path, &m)?;
        println!(
            "delta {}: {} boxes, {}/{} flat, max deviation {:.3} delta -> {}",
            delta_tag(delta),
            m.len(),
            flat,
            m.len(),
            worst / delta,
            path.display()
        );
        failures.extend(tiling);
        if flat < m.len() {
            failures.push(format!(
                "delta {}: {} boxes fail flatness",
                delta_tag(delta),
                m.len() - flat
            ));
        }
    }
    check(failures)
}

#[derive(Serialize)]
struct VerifyReport {
    delta: f64,
    boxes: usize,
    tiling_problems: Vec<String>,
    flat: usize,
    /// In units of δ.
    max_deviation: f64,
    max_containment: f64,
    count_violations: Vec<StageCount>,
    worst_count_ratio: f64,
    /// Fraction of curved boxes that fail once inflated by 4; absent without curved boxes.
    maximality: Option<f64>,
    certificates: Vec<CertificateRow>,
    pass: bool,
}

fn verify_one(cfg: &RunConfig, p: &Profile, m: &PartitionManifest) -> Result<VerifyReport, CliError> {
    let c = cfg.containment.unwrap_or(DEFAULT_CONTAINMENT);
    let tiling_problems = check_tiling(m);
    let reports = flatness_reports(m, p, c);
    let flat = reports.iter().filter(|r| r.pass).count();
    let max_deviation = reports.iter().map(|r| r.deviation).fold(0.0, f64::max) / m.delta;
    let max_containment = reports.iter().map(|r| r.containment).fold(0.0, f64::max);
    let violations = count_violations(m, 4.0);
    let worst_count_ratio = m
        .counts
        .iter()
        .map(|s| {
            let r = s.boxes as f64 / s.predicted;
            r.max(1.0 / r)
        })
        .fold(1.0, f64::max);
    let curved = m
        .boxes
        .iter()
        .any(|b| b.footprint.stage.second > 0 || b.footprint.stage.case == PieceCase::Nondegenerate);
    let maximality = curved.then(|| maximality_witness(m, p, 4.0));
    let certificates = rescaling_certificates(
        p,
        m.delta,
        cfg.caps.unwrap_or(10),
        cfg.cert_samples.unwrap_or(10_000),
        cfg.seed.unwrap_or(0),
    )?;
    let certs_ok = certificates
        .iter()
        .all(|row| row.max_ratio <= 4.0 && row.curvature.is_none_or(|(lo, hi)| lo >= 0.1 && hi <= 10.0));
    let pass = tiling_problems.is_empty()
        && flat == m.len()
        && violations.is_empty()
        && maximality.is_none_or(|f| f >= 0.5)
        && certs_ok;
    Ok(VerifyReport {
        delta: m.delta,
        boxes: m.len(),
        tiling_problems,
        flat,
        max_deviation,
        max_containment,
        count_violations: violations,
        worst_count_ratio,
        maximality,
        certificates,
        pass,
    })
}

fn verify(cfg: &RunConfig) -> Result<(), CliError> {
    let out = target(cfg, false)?;
    let jobs: Vec<(Profile, PartitionManifest)> = match &cfg.manifest {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
            let m =
                PartitionManifest::from_json(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
            vec![(m.profile.build()?, m)]
        }
        None => {
            let p = cfg.require_profile()?.build()?;
            cfg.deltas()
                .iter()
                .map(|&d| Ok((p.clone(), build_partition(&p, d)?)))
                .collect::<Result<_, CliError>>()?
        }
    };
    let mut reports = Vec::new();
    for (p, m) in &jobs {
        let r = verify_one(cfg, p, m)?;
        println!(
            "delta {}: {} boxes, flat {}/{}, max deviation {:.3} delta, worst count ratio {:.2}, maximality {}, {} certificate rows: {}",
            delta_tag(r.delta),
            r.boxes,
            r.flat,
            r.boxes,
            r.max_deviation,
            r.worst_count_ratio,
            r.maximality.map_or("n/a".to_string(), |f| format!("{f:.2}")),
            r.certificates.len(),
            if r.pass { "PASS" } else { "FAIL" }
        );
        reports.push(r);
    }
    write_json(&out.path("verify.json"), &reports)?;
    check(
        reports
            .iter()
            .filter(|r| !r.pass)
            .map(|r| format!("verification failed at delta {}", delta_tag(r.delta)))
            .collect(),
    )
}

#[derive(Serialize)]
struct ExperimentRow<'a> {
    surface: &'a str,
    case: &'a str,
    delta: f64,
    p: f64,
    q: f64,
    family: Family,
    seed: u64,
    num_boxes: usize,
    norm_f: f64,
    rhs: f64,
    ratio: f64,
    seconds: Option<f64>,
}

#[derive(Serialize)]
struct SweepFit {
    surface: String,
    family: Family,
    p: f64,
    q: f64,
    #[serde(flatten)]
    fit: FitResult,
}

fn norm_options(cfg: &RunConfig) -> NormOptions {
    let d = NormOptions::default();
    NormOptions {
        oversample: cfg.oversample.unwrap_or(d.oversample),
        budget: cfg.memory_budget.unwrap_or(d.budget),
    }
}

fn experiment(cfg: &RunConfig) -> Result<(), CliError> {
    let out = target(cfg, false)?;
    let norm = norm_options(cfg);
    let seed = cfg.seed.unwrap_or(0);
    let q = cfg.q.unwrap_or(4.0);
    let families = cfg.family.clone().unwrap_or_default();
    let ps = cfg.p.clone().unwrap_or_default();
    let presets: Vec<Preset> = cfg.preset.clone().unwrap_or_default();
    let mut records: Vec<ExperimentRecord> = Vec::new();
    for &preset in &presets {
        for &delta in cfg.deltas() {
            let spec = ExperimentSpec {
                preset,
                delta,
                spacing_factor: cfg.spacing_factor.unwrap_or(0.5),
                meridian: cfg.meridian.unwrap_or(false),
                norm,
            };
            let prep = PreparedExperiment::new(&spec)?;
            log::info!(
                "{preset} at delta {}: {} lattice points in {} boxes",
                delta_tag(delta),
                prep.lattice.len(),
                prep.lattice.num_boxes()
            );
            for &family in &families {
                for &p in &ps {
                    let rec = prep.measure(family, seed, p, q)?;
                    println!(
                        "{preset} delta {} {family} p={p} q={q}: ratio {:.6} over {} boxes",
                        delta_tag(delta),
                        rec.ratio,
                        rec.num_boxes
                    );
                    records.push(rec);
                }
            }
        }
    }
    let timing = cfg.timing.unwrap_or(false);
    let rows: Vec<ExperimentRow> = records
        .iter()
        .map(|r| ExperimentRow {
            surface: &r.surface,
            case: &r.case,
            delta: r.delta,
            p: r.p,
            q: r.q,
            family: r.family,
            seed: r.seed,
            num_boxes: r.num_boxes,
            norm_f: r.norm_f,
            rhs: r.rhs,
            ratio: r.ratio,
            seconds: timing.then_some(r.seconds),
        })
        .collect();
    write_csv(&out.path("experiment.csv"), &rows)?;

    let distinct: BTreeSet<u64> = cfg.deltas().iter().map(|d| d.to_bits()).collect();
    if distinct.len() >= 3 {
        let mut fits = Vec::new();
        for &preset in &presets {
            for &family in &families {
                for &p in &ps {
                    let sel: Vec<ExperimentRecord> = records
                        .iter()
                        .filter(|r| r.surface == preset.as_str() && r.family == family && r.p == p)
                        .cloned()
                        .collect();
                    let fit = sweep_and_fit(&sel, XKey::InverseDelta)?;
                    println!(
                        "{preset} {family} p={p}: slope {:.4} ± {:.4} against 1/delta",
                        fit.slope, fit.stderr
                    );
                    fits.push(SweepFit {
                        surface: preset.as_str().into(),
                        family,
                        p,
                        q,
                        fit,
                    });
                }
            }
        }
        write_json(&out.path("experiment_fit.json"), &fits)?;
    }
    Ok(())
}

#[derive(Serialize)]
struct Prop5Row {
    #[serde(rename = "N")]
    tubes: usize,
    delta: f64,
    p: f64,
    family: Family,
    ratio: f64,
}

#[derive(Serialize)]
struct Prop5Fit {
    delta: f64,
    p: f64,
    family: Family,
    /// `1/2 − 1/p`.
    expected: f64,
    #[serde(flatten)]
    fit: FitResult,
}

fn prop5(cfg: &RunConfig) -> Result<(), CliError> {
    let out = target(cfg, false)?;
    let norm = norm_options(cfg);
    let seed = cfg.seed.unwrap_or(0);
    let tubes = cfg.tubes.clone().unwrap_or_default();
    let mut rows = Vec::new();
    let mut fits = Vec::new();
    for &delta in cfg.deltas() {
        for &p in cfg.p.as_deref().unwrap_or(&[]) {
            for &family in cfg.family.as_deref().unwrap_or(&[]) {
                let records: Vec<ExperimentRecord> = tubes
                    .par_iter()
                    .map(|&n| prop5_experiment(n, delta, p, family, seed, &norm))
                    .collect::<Result<_, _>>()?;
                rows.extend(records.iter().map(|r| Prop5Row {
                    tubes: r.tubes.unwrap_or(0),
                    delta,
                    p,
                    family,
                    ratio: r.ratio,
                }));
                let distinct: BTreeSet<usize> = tubes.iter().copied().collect();
                if distinct.len() >= 3 {
                    let fit = sweep_and_fit(&records, XKey::Tubes)?;
                    println!(
                        "delta {} p={p} {family}: slope {:.4} ± {:.4} (1/2 - 1/p = {:.4})",
                        delta_tag(delta),
                        fit.slope,
                        fit.stderr,
                        0.5 - 1.0 / p
                    );
                    fits.push(Prop5Fit {
                        delta,
                        p,
                        family,
                        expected: 0.5 - 1.0 / p,
                        fit,
                    });
                }
            }
        }
    }
    write_csv(&out.path("prop5.csv"), &rows)?;
    if !fits.is_empty() {
        write_json(&out.path("prop5_fit.json"), &fits)?;
    }
    Ok(())
}

#[derive(Serialize)]
struct LemmaSummary {
    setup: LemmaSetup,
    order_variation: Vec<(u32, f64)>,
    max_variation: f64,
    max_phi_ratio: f64,
    hessian: Vec<HessianReport>,
    /// The profile is a cone: the Hessian is expected to be singular.
    ruled: bool,
    pass: bool,
}

fn lemma_check(cfg: &RunConfig) -> Result<(), CliError> {
    let p = cfg.require_profile()?.build()?;
    let out = target(cfg, false)?;
    let delta = cfg.deltas()[0];
    let table = lemma_derivative_check(&p, delta, cfg.n_cone.unwrap_or(3), cfg.max_order.unwrap_or(3))?;
    let setup = table.setup;
    let hessian: Vec<HessianReport> = (0..=setup.kmax)
        .into_par_iter()
        .map(|k| hessian_identity_check(&p, &setup, k))
        .collect::<Result<_, _>>()?;
    let ruled = analyze_structure(&p)?
        .degenerate
        .iter()
        .all(|d| d.zero.case == DegeneracyCase::Cone);
    let hess_ok = if ruled {
        hessian.iter().all(|h| h.max_det <= 1e-6)
    } else {
        hessian.iter().all(|h| h.pass(1e-4))
    };
    let summary = LemmaSummary {
        setup,
        order_variation: table.order_variation.clone(),
        max_variation: table.max_variation(),
        max_phi_ratio: table.max_phi_ratio(),
        hessian,
        ruled,
        pass: table.max_variation() < 4.0 && hess_ok,
    };
    let rows: &[DerivativeRow] = &table.rows;
    write_csv(&out.path("lemma.csv"), rows)?;
    write_json(&out.path("lemma.json"), &summary)?;
    println!(
        "r0 = {}, n = {}, K = {}: derivative variation {:.3}, Hessian identity {}",
        setup.r0,
        setup.n,
        setup.kmax,
        summary.max_variation,
        if hess_ok { "holds" } else { "fails" }
    );
    check(if summary.pass {
        Vec::new()
    } else {
        vec!["lemma check failed".into()]
    })
}
