//! One function per subcommand; each writes its files and returns the report path.

use std::path::{Path, PathBuf};

use oamswap::circuit::{
    analytic_swapped_density, beamsplitter_bc, postselect_coincidence, swapped_density_matrix, two_pair_input,
    SingletWeight,
};
use oamswap::linalg;
use oamswap::measurement::{derive_seed, format_records, synthesize_hom_scan, fit_hom_dip, HomFit, HomParams, Subspace};
use oamswap::purification::{
    apply_filter, purity, schmidt_coefficients, schmidt_rank, singlet_components, FilterSpec, SCHMIDT_TOL,
};
use oamswap::state::{bell_state, BellSign, DensityMatrix, PathLabel};
use oamswap::tomography::{
    assemble_4d, fidelity_vs_visibility, matrix_from_json, matrix_to_json, Estimate, MatrixFile,
};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::ExperimentConfig;
use crate::error::CliError;
use crate::output::OutputDir;
use crate::pipeline::{run_subspaces, streams, SubspaceRun};

fn file_tag(s: Subspace) -> String {
    format!("{}_{}", s.low(), s.high())
}

fn matrix_text(rho: &DensityMatrix, mask: Option<&[Vec<bool>]>) -> Result<String, CliError> {
    Ok(matrix_to_json(rho, mask)? + "\n")
}

#[derive(Serialize)]
struct SwapReport {
    weights: Vec<SingletWeight>,
    postselection_probability: f64,
    circuit_vs_closed_form_max_abs_diff: f64,
    purity: f64,
    rho: MatrixFile,
}

pub fn swap(cfg: &ExperimentConfig, out: &OutputDir) -> Result<PathBuf, CliError> {
    let spectrum = cfg.spectrum()?;
    let weights = oamswap::circuit::swap_weights(&spectrum).map_err(CliError::config)?;
    let input = two_pair_input(&spectrum, cfg.truncation).map_err(CliError::config)?;
    let post = postselect_coincidence(&beamsplitter_bc(&input)?)?;
    let circuit = swapped_density_matrix(&input)?;
    let closed = analytic_swapped_density(&spectrum)?;
    let diff = linalg::max_abs_diff(circuit.matrix(), closed.in_basis(circuit.basis())?.matrix());
    out.write("swap_rho.json", &matrix_text(&closed, None)?)?;
    let report = SwapReport {
        weights,
        postselection_probability: post.probability,
        circuit_vs_closed_form_max_abs_diff: diff,
        purity: purity(&closed),
        rho: MatrixFile::from_density(&closed, None)?,
    };
    out.write_report("swap.json", "swap", cfg, &report)
}

#[derive(Serialize)]
struct SubspaceRow {
    subspace: Subspace,
    expected_counts: f64,
    fidelity: Estimate,
    concurrence: Estimate,
    method: String,
    log_likelihood: f64,
    iterations: usize,
    converged: bool,
    counts_file: String,
    matrix_file: String,
}

#[derive(Serialize)]
struct TomographyReport {
    subspaces: Vec<SubspaceRow>,
    mean_fidelity: f64,
    mean_concurrence: f64,
}

fn rows(runs: &[SubspaceRun], out: &OutputDir) -> Result<Vec<SubspaceRow>, CliError> {
    runs.iter()
        .map(|r| {
            let tag = file_tag(r.plan.subspace);
            let counts_file = format!("counts_{tag}.txt");
            let matrix_file = format!("rho_{tag}.json");
            let header = format!("# subspace {} setting records\n", r.plan.subspace);
            out.write(&counts_file, &(header + &format_records(&r.records)))?;
            out.write(&matrix_file, &matrix_text(&r.result.rho, None)?)?;
            let bars = r.bars.expect("bootstrap requested");
            Ok(SubspaceRow {
                subspace: r.plan.subspace,
                expected_counts: r.plan.expected_counts,
                fidelity: bars.fidelity,
                concurrence: bars.concurrence,
                method: r.result.method.clone(),
                log_likelihood: r.result.log_likelihood,
                iterations: r.result.iterations,
                converged: r.result.converged,
                counts_file,
                matrix_file,
            })
        })
        .collect()
}

pub fn tomography(cfg: &ExperimentConfig, out: &OutputDir) -> Result<PathBuf, CliError> {
    let runs = run_subspaces(cfg, &cfg.tomography.subspaces, cfg.source.visibility, cfg.seed, true)?;
    let subspaces = rows(&runs, out)?;
    let n = runs.len() as f64;
    let report = TomographyReport {
        mean_fidelity: runs.iter().map(|r| r.fidelity).sum::<f64>() / n,
        mean_concurrence: runs.iter().map(|r| r.concurrence).sum::<f64>() / n,
        subspaces,
    };
    out.write_report("tomography.json", "tomography", cfg, &report)
}

#[derive(Serialize)]
struct SweepPoint {
    visibility: f64,
    analytic_fidelity: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    simulated_fidelity: Option<Estimate>,
}

#[derive(Serialize)]
struct SweepReport {
    subspace: Subspace,
    points: Vec<SweepPoint>,
    curve_file: &'static str,
}

pub fn sweep_visibility(cfg: &ExperimentConfig, out: &OutputDir) -> Result<PathBuf, CliError> {
    let sub = cfg.sweep.subspace;
    let points = cfg
        .sweep
        .visibilities
        .par_iter()
        .enumerate()
        .map(|(k, &v)| {
            let analytic_fidelity = fidelity_vs_visibility(v).map_err(CliError::config)?;
            let simulated_fidelity = if cfg.sweep.simulate {
                let seed = derive_seed(cfg.seed, streams::SWEEP + k as u64);
                let run = run_subspaces(cfg, &[sub], v, seed, true)?.remove(0);
                run.bars.map(|b| b.fidelity)
            } else {
                None
            };
            Ok(SweepPoint { visibility: v, analytic_fidelity, simulated_fidelity })
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    let mut curve = String::from("# visibility fidelity\n");
    for p in &points {
        curve += &format!("{} {}\n", p.visibility, p.analytic_fidelity);
    }
    out.write("sweep_curve.txt", &curve)?;
    if cfg.sweep.simulate {
        let mut sim = String::from("# visibility fidelity sigma\n");
        for p in &points {
            let f = p.simulated_fidelity.expect("simulated");
            sim += &format!("{} {} {}\n", p.visibility, f.value, f.sigma);
        }
        out.write("sweep_simulated.txt", &sim)?;
    }
    let report = SweepReport { subspace: sub, points, curve_file: "sweep_curve.txt" };
    out.write_report("sweep.json", "sweep-visibility", cfg, &report)
}

#[derive(Serialize)]
struct HomReport {
    injected: HomParams,
    fit: HomFit,
    scan_file: &'static str,
}

pub fn hom_scan(cfg: &ExperimentConfig, out: &OutputDir) -> Result<PathBuf, CliError> {
    let h = &cfg.hom;
    let injected = HomParams {
        center_um: h.center_um,
        width_um: h.width_um,
        visibility: h.visibility,
        baseline: h.baseline_counts,
    };
    let step = (h.stop_um - h.start_um) / (h.points - 1) as f64;
    let positions: Vec<f64> = (0..h.points).map(|i| h.start_um + step * i as f64).collect();
    let seed = h.poisson_noise.then(|| derive_seed(cfg.seed, streams::HOM));
    let scan = synthesize_hom_scan(&injected, &positions, seed).map_err(CliError::config)?;
    let fit = fit_hom_dip(&scan.positions_um, &scan.counts)?;
    let mut text = String::from("# position_um counts fit\n");
    for (&x, &n) in scan.positions_um.iter().zip(&scan.counts) {
        let p = &fit.params;
        let model = oamswap::measurement::hom_dip_model(x, p.center_um, p.width_um, p.visibility, p.baseline)?;
        text += &format!("{x} {n} {model}\n");
    }
    out.write("hom_scan.txt", &text)?;
    out.write_report("hom.json", "hom-scan", cfg, &HomReport { injected, fit, scan_file: "hom_scan.txt" })
}

#[derive(Serialize)]
struct BlockSummary {
    subspace: Subspace,
    source: String,
    fidelity_to_singlet: f64,
}

#[derive(Serialize)]
struct AssembleReport {
    fidelity_to_prediction: f64,
    weights: Vec<SingletWeight>,
    blocks: Vec<BlockSummary>,
    matrix_file: &'static str,
}

fn load_blocks(files: &[PathBuf], base: &Path) -> Result<Vec<(Subspace, DensityMatrix, String)>, CliError> {
    Subspace::standard_six()
        .iter()
        .zip(files)
        .map(|(&s, f)| {
            let path = if f.is_absolute() { f.clone() } else { base.join(f) };
            let text = std::fs::read_to_string(&path)
                .map_err(|e| CliError::Config(format!("cannot read matrix file {}: {e}", path.display())))?;
            let (rho, _) = matrix_from_json(&text)
                .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
            let rho = rho
                .in_basis(&s.basis())
                .map_err(|e| CliError::Config(format!("{} is not a {s} matrix: {e}", path.display())))?;
            Ok((s, rho, path.display().to_string()))
        })
        .collect()
}

/// `base` resolves relative matrix paths, normally the config file's directory.
pub fn assemble4d(cfg: &ExperimentConfig, out: &OutputDir, base: &Path) -> Result<PathBuf, CliError> {
    let spectrum = cfg.spectrum()?;
    let blocks = if cfg.assemble.matrix_files.is_empty() {
        let six = Subspace::standard_six();
        run_subspaces(cfg, &six, cfg.source.visibility, cfg.seed, false)?
            .into_iter()
            .map(|r| (r.plan.subspace, r.result.rho, format!("simulated ({})", r.result.method)))
            .collect()
    } else {
        load_blocks(&cfg.assemble.matrix_files, base)?
    };
    let pairs: Vec<(Subspace, DensityMatrix)> = blocks.iter().map(|(s, r, _)| (*s, r.clone())).collect();
    let assembled = assemble_4d(&pairs, &spectrum)?;
    out.write("rho_4d.json", &matrix_text(&assembled.rho, Some(&assembled.unmeasured))?)?;
    let blocks = blocks
        .into_iter()
        .map(|(s, rho, source)| {
            Ok(BlockSummary {
                subspace: s,
                source,
                fidelity_to_singlet: oamswap::tomography::fidelity(&rho, &s.singlet_density())?,
            })
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    let report = AssembleReport {
        fidelity_to_prediction: assembled.fidelity_to_prediction(&spectrum)?,
        weights: assembled.weights,
        blocks,
        matrix_file: "rho_4d.json",
    };
    out.write_report("assemble4d.json", "assemble4d", cfg, &report)
}

#[derive(Serialize)]
struct Amplitude {
    ket: String,
    re: f64,
    im: f64,
}

#[derive(Serialize)]
struct PurifyReport {
    filter: Vec<Amplitude>,
    success_probability: f64,
    ad_state: Vec<Amplitude>,
    purity: f64,
    schmidt_rank_a_d: usize,
    schmidt_coefficients_a_d: Vec<f64>,
    /// Overlaps with the singlets of orders 1..=N.
    singlet_components: Vec<Amplitude>,
    nonzero_singlet_components: usize,
}

fn amplitudes(state: &oamswap::state::PureState) -> Vec<Amplitude> {
    state
        .terms()
        .iter()
        .map(|(k, a)| Amplitude { ket: k.label(), re: a.re, im: a.im })
        .collect()
}

pub fn purify(cfg: &ExperimentConfig, out: &OutputDir) -> Result<PathBuf, CliError> {
    let spectrum = cfg.spectrum()?;
    let filter = match cfg.purify.filter_singlet {
        Some(s) => FilterSpec::new(bell_state(s.low(), s.high(), BellSign::Minus, (PathLabel::B, PathLabel::C))?),
        None => FilterSpec::superposition(cfg.purify.filter_orders),
    }
    .map_err(CliError::config)?;
    let input = two_pair_input(&spectrum, cfg.truncation).map_err(CliError::config)?;
    let post = postselect_coincidence(&beamsplitter_bc(&input)?)?;
    let (ad, p) = apply_filter(&post.state, &filter)?;
    let n = cfg.truncation;
    let components = singlet_components(&ad, n)?;
    let cut: (&[PathLabel], &[PathLabel]) = (&[PathLabel::A], &[PathLabel::D]);
    let report = PurifyReport {
        filter: amplitudes(filter.target()),
        success_probability: p,
        purity: purity(&DensityMatrix::from_pure(&ad)?),
        schmidt_rank_a_d: schmidt_rank(&ad, cut, SCHMIDT_TOL)?,
        schmidt_coefficients_a_d: schmidt_coefficients(&ad, cut)?,
        nonzero_singlet_components: components.iter().filter(|z| z.norm() > SCHMIDT_TOL).count(),
        singlet_components: components
            .iter()
            .enumerate()
            .map(|(i, z)| Amplitude { ket: format!("Psi-(-{0},{0})", i + 1), re: z.re, im: z.im })
            .collect(),
        ad_state: amplitudes(&ad),
    };
    out.write_report("purify.json", "purify", cfg, &report)
}
