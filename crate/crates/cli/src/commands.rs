//! Subcommand implementations.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use num_rational::BigRational;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Deserialize;

use lprx_core::equalizer::{self, ChannelSpec, ParityCheckMatrix};
use lprx_core::instances::random_positive_evidence;
use lprx_core::lp::{self, analysis_catalog, map_v, FormulationKind, LpPoint, LpVar};
use lprx_core::model::FactorGraphModel;
use lprx_core::pseudo;
use lprx_core::rat::{format_ratio, parse_ratio};
use lprx_core::receiver::{self, ReceiverOutcome};
use lprx_core::sum_product::{run_sum_product, SpSettings};

use crate::{CompareArgs, CoverArgs, DecodeArgs, SimulateArgs, ValidateArgs};

/// Exit code signalling a receiver failure outcome.
const EXIT_FAILURE_OUTCOME: i32 = 2;

fn load_model(path: &Path) -> Result<FactorGraphModel> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("reading model file {}", path.display()))?;
    FactorGraphModel::from_json(&text)
        .with_context(|| format!("parsing model file {}", path.display()))
}

fn load_alist(path: &Path) -> Result<ParityCheckMatrix> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("reading alist file {}", path.display()))?;
    ParityCheckMatrix::from_alist(&text)
        .with_context(|| format!("parsing alist file {}", path.display()))
}

fn write_or_print(out: &Option<std::path::PathBuf>, content: &str) -> Result<()> {
    match out {
        Some(path) => fs::write(path, content)
            .with_context(|| format!("writing {}", path.display()))?,
        None => print!("{content}"),
    }
    Ok(())
}

/// 17 significant digits: lossless for f64 and stable across runs.
fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn csv_field(s: &str) -> String {
    if s.contains(',') || s.contains('"') || s.contains('\n') {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

// ---------------------------------------------------------------------------
// decode
// ---------------------------------------------------------------------------

pub(crate) fn decode(args: DecodeArgs) -> Result<i32> {
    let formulation = FormulationKind::parse(&args.formulation)?;
    match (&args.model, &args.alist) {
        (Some(model_path), None) => decode_model(model_path, formulation, args.cap),
        (None, Some(alist_path)) => decode_alist(&args, alist_path, formulation),
        _ => bail!("pass exactly one of --model or --alist"),
    }
}

fn decode_model(path: &Path, formulation: FormulationKind, cap: u64) -> Result<i32> {
    let model = load_model(path)?;
    let output = receiver::run_receiver(&model, formulation, cap)?;
    println!("formulation: {}", formulation.as_str());
    println!("objective: {}", format_ratio(&output.objective));
    match &output.outcome {
        ReceiverOutcome::Configuration(cfg) => {
            println!("outcome: configuration");
            println!("configuration: {}", cfg.display(&model));
            println!("certified-optimal: true");
            Ok(0)
        }
        ReceiverOutcome::Failure(point) => {
            println!("outcome: failure");
            println!("fractional point ({} nonzero coordinates):", point.nonzero_summary().len());
            for line in point.nonzero_summary() {
                println!("  {line}");
            }
            Ok(EXIT_FAILURE_OUTCOME)
        }
    }
}

fn decode_alist(args: &DecodeArgs, alist_path: &Path, formulation: FormulationKind) -> Result<i32> {
    let matrix = load_alist(alist_path)?;
    if args.taps.is_empty() {
        bail!("--alist mode requires --taps");
    }
    let received_path =
        args.received.as_ref().ok_or_else(|| anyhow!("--alist mode requires --received"))?;
    let text = fs::read_to_string(received_path)
        .with_context(|| format!("reading received samples {}", received_path.display()))?;
    let received: Vec<f64> = text
        .split_whitespace()
        .map(|tok| tok.parse::<f64>().map_err(|_| anyhow!("bad received sample {tok:?}")))
        .collect::<Result<_>>()?;
    if received.len() != matrix.num_bits() {
        bail!("{} received samples for {} code bits", received.len(), matrix.num_bits());
    }
    let sigma2 = match (args.sigma2, args.snr_db) {
        (Some(s), None) => s,
        (None, Some(db)) => ChannelSpec::sigma2_for_snr_db(&args.taps, db),
        _ => bail!("pass exactly one of --sigma2 or --snr-db"),
    };

    if formulation == FormulationKind::RelaxedQtilde {
        // The native path: the explicit program over tuple and edge weights.
        let trellis = equalizer::build_trellis(&args.taps);
        let metrics = equalizer::branch_metrics(&trellis, &received, sigma2)?;
        let output = equalizer::run_explicit_receiver(&matrix, &trellis, &metrics)?;
        println!("formulation: qtilde (explicit equalizer program)");
        println!("objective: {}", format_ratio(&output.objective));
        return match &output.outcome {
            equalizer::ExplicitOutcome::Codeword { bits, .. } => {
                println!("outcome: configuration");
                let rendered: Vec<String> = bits.iter().map(|b| b.to_string()).collect();
                println!("codeword: {}", rendered.join(" "));
                println!("certified-optimal: true");
                Ok(0)
            }
            equalizer::ExplicitOutcome::Failure(point) => {
                println!("outcome: failure");
                println!(
                    "fractional point ({} nonzero coordinates):",
                    point.nonzero_summary().len()
                );
                for line in point.nonzero_summary() {
                    println!("  {line}");
                }
                Ok(EXIT_FAILURE_OUTCOME)
            }
        };
    }

    // Other formulations run on the generic factor-graph model.
    let channel = ChannelSpec::new(args.taps.clone(), sigma2)?;
    let model = equalizer::build_equalizer_model(&matrix, &channel, &received)?;
    let trellis = equalizer::build_trellis(&args.taps);
    let output = receiver::run_receiver(&model, formulation, args.cap)?;
    println!("formulation: {}", formulation.as_str());
    println!("objective: {}", format_ratio(&output.objective));
    match &output.outcome {
        ReceiverOutcome::Configuration(cfg) => {
            println!("outcome: configuration");
            let bits: Vec<String> =
                cfg.0.iter().map(|&e| trellis.input(e).to_string()).collect();
            println!("codeword: {}", bits.join(" "));
            println!("edges: {}", cfg.display(&model));
            println!("certified-optimal: true");
            Ok(0)
        }
        ReceiverOutcome::Failure(point) => {
            println!("outcome: failure");
            println!("fractional point ({} nonzero coordinates):", point.nonzero_summary().len());
            for line in point.nonzero_summary() {
                println!("  {line}");
            }
            Ok(EXIT_FAILURE_OUTCOME)
        }
    }
}

// ---------------------------------------------------------------------------
// simulate
// ---------------------------------------------------------------------------

pub(crate) fn simulate(args: SimulateArgs) -> Result<i32> {
    if args.snr_db.is_empty() {
        bail!("--snr-db requires at least one point");
    }
    let matrix = load_alist(&args.alist)?;
    let rows =
        equalizer::simulate_error_rates(&matrix, &args.taps, &args.snr_db, args.trials, args.seed)?;
    let mut csv = String::from("snr_db,trials,wer,ber,failure_rate,ml_cert_rate,sp_lp_agreement\n");
    for row in &rows {
        let _ = writeln!(
            csv,
            "{},{},{},{},{},{},{}",
            fmt_f64(row.snr_db),
            row.trials,
            fmt_f64(row.wer),
            fmt_f64(row.ber),
            fmt_f64(row.failure_rate),
            fmt_f64(row.ml_cert_rate),
            fmt_f64(row.sp_lp_agreement),
        );
    }
    write_or_print(&args.out, &csv)?;
    Ok(0)
}

// ---------------------------------------------------------------------------
// cover-roundtrip
// ---------------------------------------------------------------------------

/// Rational point file: marginals per variable and tuple weights per
/// factor, aligned with the model's catalog order, rationals as strings.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct PointFile {
    g: Vec<Vec<String>>,
    p: Vec<Vec<String>>,
}

fn load_point(model: &FactorGraphModel, path: &Path) -> Result<LpPoint> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("reading point file {}", path.display()))?;
    let file: PointFile = serde_json::from_str(&text)
        .with_context(|| format!("parsing point file {}", path.display()))?;
    if file.g.len() != model.num_vars() {
        bail!("point file has {} marginal tables, model has {} variables", file.g.len(), model.num_vars());
    }
    if file.p.len() != model.behaviours().len() {
        bail!(
            "point file has {} tuple tables, model has {} factors",
            file.p.len(),
            model.behaviours().len()
        );
    }
    let catalog = analysis_catalog(model);
    let mut values = Vec::with_capacity(catalog.len());
    for var in catalog.vars() {
        let text = match var {
            LpVar::FullMarginal { var, sym } => file.g[*var]
                .get(*sym)
                .ok_or_else(|| anyhow!("marginal table of variable {var} is too short"))?,
            LpVar::TupleWeight { factor, tuple } => file.p[*factor]
                .get(*tuple)
                .ok_or_else(|| anyhow!("tuple table of factor {factor} is too short"))?,
            _ => unreachable!(),
        };
        values.push(parse_ratio(text)?);
    }
    Ok(LpPoint::new(catalog, values))
}

pub(crate) fn cover_roundtrip(args: CoverArgs) -> Result<i32> {
    let model = load_model(&args.model)?;
    let point = match (&args.point, args.solve) {
        (Some(path), false) => load_point(&model, path)?,
        (None, true) => {
            let output =
                receiver::run_receiver(&model, FormulationKind::RelaxedQtilde, args.cap)?;
            match output.outcome {
                ReceiverOutcome::Configuration(cfg) => {
                    println!("receiver outcome: configuration (integral point, degree 1)");
                    lp::embed_configuration(&model, &cfg)?
                }
                ReceiverOutcome::Failure(fractional) => {
                    println!("receiver outcome: failure (fractional point)");
                    map_v(&model, &fractional)?
                }
            }
        }
        _ => bail!("pass exactly one of --point or --solve"),
    };

    let (cover, labeling) = pseudo::lp_point_to_cover(&model, &point)
        .map_err(|e| anyhow!("point rejected: {e}"))?;
    let dump = pseudo::to_dump(&cover, &labeling);
    let json = serde_json::to_string_pretty(&dump).context("serializing cover")?;
    write_or_print(&args.out, &format!("{json}\n"))?;

    // Full loop through the serialized form.
    let parsed: pseudo::CoverDump = serde_json::from_str(&json).context("reparsing cover")?;
    let (cover2, labeling2) = pseudo::from_dump(&model, &parsed)?;
    let valid = pseudo::is_valid_cover_configuration(&model, &cover2, &labeling2)?;
    let back = pseudo::cover_to_lp_point(&model, &cover2, &labeling2)?;
    let roundtrip_exact = back == point;
    println!("degree: {}", cover.degree);
    println!("valid: {valid}");
    println!("roundtrip-exact: {roundtrip_exact}");
    if !(valid && roundtrip_exact) {
        bail!("cover round-trip failed");
    }
    Ok(0)
}

// ---------------------------------------------------------------------------
// compare
// ---------------------------------------------------------------------------

pub(crate) fn compare(args: CompareArgs) -> Result<i32> {
    if args.trials == 0 {
        bail!("--trials must be at least 1");
    }
    let formulation = FormulationKind::parse(&args.formulation)?;
    let model = load_model(&args.model)?;

    struct TrialRow {
        trial: usize,
        lp_outcome: &'static str,
        lp_objective: BigRational,
        lp_config: String,
        sp_config: String,
        sp_valid: bool,
        agreement: bool,
    }

    let rows: Vec<TrialRow> = (0..args.trials)
        .into_par_iter()
        .map(|trial| -> Result<TrialRow> {
            let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
            rng.set_stream(trial as u64);
            let evidence = random_positive_evidence(&model, &mut rng);
            let trial_model = model.with_evidence(evidence)?;
            let lp_out = receiver::run_receiver(&trial_model, formulation, args.cap)?;
            let sp_out = run_sum_product(&trial_model, &SpSettings::default())?;
            let sp_config = sp_out.decision.display(&trial_model).to_string();
            let (lp_outcome, lp_config, agreement) = match &lp_out.outcome {
                ReceiverOutcome::Configuration(cfg) => (
                    "configuration",
                    cfg.display(&trial_model).to_string(),
                    *cfg == sp_out.decision,
                ),
                ReceiverOutcome::Failure(_) => ("failure", String::new(), false),
            };
            Ok(TrialRow {
                trial,
                lp_outcome,
                lp_objective: lp_out.objective,
                lp_config,
                sp_config,
                sp_valid: sp_out.valid,
                agreement,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let mut rows = rows;
    rows.sort_by_key(|r| r.trial);
    let mut csv =
        String::from("trial,lp_outcome,lp_objective,lp_config,sp_config,sp_valid,agreement\n");
    for r in &rows {
        let _ = writeln!(
            csv,
            "{},{},{},{},{},{},{}",
            r.trial,
            r.lp_outcome,
            csv_field(&format_ratio(&r.lp_objective)),
            csv_field(&r.lp_config),
            csv_field(&r.sp_config),
            r.sp_valid,
            r.agreement,
        );
    }
    write_or_print(&args.out, &csv)?;
    Ok(0)
}

// ---------------------------------------------------------------------------
// validate-model
// ---------------------------------------------------------------------------

pub(crate) fn validate_model(args: ValidateArgs) -> Result<i32> {
    let model = load_model(&args.model)?;
    println!("variables: {}", model.num_vars());
    println!("factors: {}", model.behaviours().len());
    println!("evidence-variables: {}", model.evidence_vars().len());
    let sizes: Vec<String> =
        (0..model.num_vars()).map(|i| model.alphabet(i).size().to_string()).collect();
    println!("alphabet-sizes: {}", sizes.join(" "));
    match model.global_behaviour(args.cap) {
        Ok(behaviour) => {
            println!("valid-configurations: {}", behaviour.len());
            let injective = model.check_injectivity(args.cap)?;
            println!("evidence-projection-injective: {injective}");
        }
        Err(lprx_core::Error::EnumerationCap { size, cap }) => {
            println!("valid-configurations: not enumerated ({size} > cap {cap})");
        }
        Err(e) => return Err(e.into()),
    }
    println!("ok");
    Ok(0)
}
