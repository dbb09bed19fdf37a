//! `opstat`: command-line front end for the operational-statistics toolkit.
//!
//! Machine-readable output goes to stdout only; diagnostics go to stderr.
//! Exit codes: 0 on success, 1 when a domain violation is reported (the
//! math says no), 2 on usage or I/O errors (you typed it wrong).

mod wire;

use std::collections::{BTreeMap, BTreeSet};
use std::io::Read;
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use opstat_core::estimation::{
    self, fit_mle, goodness_of_fit, moment_estimate, simulate_counts, CountTable,
    EstimationError, FitModel, FitOptions, FitResult,
};
use opstat_core::ftt::{
    canonical_states, combined_manual, interference_excess, predict_dichotomies, predict_tru,
    tru_sums, BiasParams, FttError, FttParams, Label, TruResponseRule,
};
use opstat_core::logic::{build_logic_with_cap, LogicError, DEFAULT_EVENT_CAP};
use opstat_core::manual::{
    IdentificationSpec, Manual, ManualError, ManualSpec, OutcomeId,
};
use opstat_core::spin::{
    self, fit_density, frame_weights, random_frame_with_basis, DensityOperator, Frame,
    SpinError,
};
use opstat_core::weights::{
    common_zero_set, is_superposition, operation_sums, WeightError, WeightFunction,
};

#[derive(Parser)]
#[command(
    name = "opstat",
    version,
    about = "Finite test spaces: manuals, logics, weights, spin-one frames, and fuzzy-trace recognition modeling"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Validate, analyze and coarsen manuals.
    #[command(subcommand)]
    Manual(ManualCmd),
    /// Check weight functions and their relations.
    #[command(subcommand)]
    Weights(WeightsCmd),
    /// Spin-one frames, trace-rule weights and density recovery.
    #[command(subcommand)]
    Spin(SpinCmd),
    /// Fuzzy-trace forward model.
    #[command(subcommand)]
    Ftt(FttCmd),
    /// Simulation and maximum-likelihood estimation.
    #[command(subcommand)]
    Est(EstCmd),
    /// End-to-end demonstrations.
    #[command(subcommand)]
    Demo(DemoCmd),
}

#[derive(Subcommand)]
enum ManualCmd {
    /// Validate a manual JSON file.
    Validate(InputArg),
    /// Build the logic of a manual and check orthomodularity.
    Logic {
        #[command(flatten)]
        input: InputArg,
        /// Cap on the enumerated event count.
        #[arg(long, default_value_t = DEFAULT_EVENT_CAP)]
        cap: u128,
    },
    /// Pack outcomes of one operation into a fresh outcome.
    Coarsen {
        #[command(flatten)]
        input: InputArg,
        /// Index of the operation to coarsen.
        #[arg(long)]
        op: usize,
        /// Comma-separated outcomes to pack.
        #[arg(long)]
        pack: String,
        /// Identifier for the packed outcome.
        #[arg(long = "new-id")]
        new_id: String,
    },
    /// Merge outcomes under an identification map.
    Identify {
        #[command(flatten)]
        input: InputArg,
        /// Path to `{"identify": {"from": "to", ...}}`.
        #[arg(long)]
        map: String,
    },
}

#[derive(Subcommand)]
enum WeightsCmd {
    /// Validate a weight function against its manual.
    Check(InputArg),
    /// Foulis-Piron-Randall superposition test.
    Superposition(InputArg),
    /// Probability of an event under a weight function.
    EventProb {
        #[command(flatten)]
        input: InputArg,
        /// Comma-separated outcome ids forming the event.
        #[arg(long)]
        event: String,
    },
}

#[derive(Subcommand)]
enum SpinCmd {
    /// Generate random frames of rank-1 projections.
    Frames {
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = 1)]
        count: usize,
    },
    /// Weights a density operator assigns to frames.
    Weights {
        /// Path to a density JSON (3×3 array of [re, im]).
        #[arg(long)]
        density: String,
        /// Path to a frames JSON (list of 3-vector frames).
        #[arg(long)]
        frames: String,
    },
    /// Least-squares recovery of a density operator from frame weights.
    FitDensity {
        #[arg(long)]
        frames: String,
        /// Path to observed weights (list of per-frame weight lists).
        #[arg(long)]
        weights: String,
    },
}

#[derive(Subcommand)]
enum FttCmd {
    /// Dichotomy response probabilities from covert-judgment parameters.
    Predict {
        #[command(flatten)]
        params: ParamsArg,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
    /// Identified per-probe sums of the dichotomy probabilities.
    Sums {
        #[command(flatten)]
        params: ParamsArg,
    },
    /// Interference excess between packed and unpacked coarsenings.
    Interference {
        #[command(flatten)]
        params: ParamsArg,
    },
    /// The canonical weight functions on the nine-dichotomy manual.
    Canonical,
}

#[derive(Subcommand)]
enum EstCmd {
    /// Simulate binomial count data from the forward model.
    Simulate {
        #[command(flatten)]
        params: ParamsArg,
        #[arg(long = "n-per-cell")]
        n_per_cell: u64,
        #[arg(long)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
    },
    /// Maximum-likelihood fit of a count table.
    Fit {
        /// Path to a counts CSV.
        #[arg(long)]
        counts: String,
        #[arg(long, value_enum, default_value_t = ModelArg::Four)]
        model: ModelArg,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
        #[arg(long = "max-iter", default_value_t = 10_000)]
        max_iter: usize,
    },
    /// Goodness of fit of a fit result against counts.
    Gof {
        #[arg(long)]
        counts: String,
        /// Path to a fit JSON (output of `est fit`).
        #[arg(long)]
        fit: String,
    },
}

#[derive(Subcommand)]
enum DemoCmd {
    /// Identified dichotomies against the three-way forced choice: the
    /// packed coarsening loses the observed weight functions.
    Interference {
        #[command(flatten)]
        params: ParamsArg,
    },
    /// Spin-one contrast: packing projections never changes probabilities.
    SpinAdditivity {
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = 1000)]
        trials: usize,
    },
}

#[derive(Args)]
struct InputArg {
    /// Path to a JSON file, or '-' for stdin.
    #[arg(long)]
    input: String,
}

#[derive(Args)]
struct ParamsArg {
    /// Inline JSON, e.g. '{"iota_t":0.6,"sigma_t":0.5,"nu_r":0.4,"sigma_r":0.5}'
    /// with an optional "bias" object.
    #[arg(long)]
    params: String,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ModelArg {
    #[value(name = "4")]
    Four,
    #[value(name = "7")]
    Seven,
}

enum Output {
    Json(Value),
    Text(String),
}

enum CliError {
    /// Reported on stdout as JSON, exit code 1.
    Domain(Value),
    /// Reported on stderr as one-line JSON, exit code 2.
    Usage(String),
}

fn domain<E: Serialize>(err: E) -> CliError {
    CliError::Domain(json!({ "error": err }))
}

impl From<ManualError> for CliError {
    fn from(e: ManualError) -> Self {
        domain(e)
    }
}

impl From<WeightError<f64>> for CliError {
    fn from(e: WeightError<f64>) -> Self {
        domain(e)
    }
}

impl From<SpinError> for CliError {
    fn from(e: SpinError) -> Self {
        domain(e)
    }
}

impl From<LogicError> for CliError {
    fn from(e: LogicError) -> Self {
        domain(e)
    }
}

impl From<FttError<f64>> for CliError {
    fn from(e: FttError<f64>) -> Self {
        domain(e)
    }
}

impl From<EstimationError> for CliError {
    fn from(e: EstimationError) -> Self {
        match e {
            EstimationError::CsvMalformed { .. } => CliError::Usage(e.to_string()),
            other => domain(other),
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            if e.use_stderr() {
                let msg = e.render().to_string();
                let line = msg.lines().next().unwrap_or("invalid arguments");
                eprintln!("{}", json!({ "error": line }));
                return ExitCode::from(2);
            }
            // --help / --version.
            print!("{e}");
            return ExitCode::SUCCESS;
        }
    };
    match run(cli.command) {
        Ok(Output::Json(value)) => {
            println!("{}", serde_json::to_string_pretty(&value).expect("valid JSON"));
            ExitCode::SUCCESS
        }
        Ok(Output::Text(text)) => {
            print!("{text}");
            ExitCode::SUCCESS
        }
        Err(CliError::Domain(value)) => {
            println!("{}", serde_json::to_string_pretty(&value).expect("valid JSON"));
            ExitCode::from(1)
        }
        Err(CliError::Usage(msg)) => {
            eprintln!("{}", json!({ "error": msg }));
            ExitCode::from(2)
        }
    }
}

fn run(command: Command) -> Result<Output, CliError> {
    match command {
        Command::Manual(cmd) => run_manual(cmd),
        Command::Weights(cmd) => run_weights(cmd),
        Command::Spin(cmd) => run_spin(cmd),
        Command::Ftt(cmd) => run_ftt(cmd),
        Command::Est(cmd) => run_est(cmd),
        Command::Demo(cmd) => run_demo(cmd),
    }
}

fn read_input(path: &str) -> Result<String, CliError> {
    if path == "-" {
        let mut buf = String::new();
        std::io::stdin()
            .read_to_string(&mut buf)
            .map_err(|e| CliError::Usage(format!("reading stdin: {e}")))?;
        Ok(buf)
    } else {
        std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("reading {path}: {e}")))
    }
}

fn parse_json<T: serde::de::DeserializeOwned>(text: &str, what: &str) -> Result<T, CliError> {
    serde_json::from_str(text).map_err(|e| CliError::Usage(format!("parsing {what}: {e}")))
}

fn load_manual(path: &str) -> Result<Manual, CliError> {
    let spec: ManualSpec = parse_json(&read_input(path)?, "manual JSON")?;
    Ok(Manual::try_from(spec)?)
}

fn comma_ids(list: &str) -> BTreeSet<OutcomeId> {
    list.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(OutcomeId::from)
        .collect()
}

fn manual_json(manual: &Manual) -> Value {
    serde_json::to_value(manual).expect("manuals serialize")
}

fn run_manual(cmd: ManualCmd) -> Result<Output, CliError> {
    match cmd {
        ManualCmd::Validate(input) => {
            let manual = load_manual(&input.input)?;
            Ok(Output::Json(json!({
                "operations": manual_json(&manual)["operations"],
                "operation_count": manual.operations().len(),
                "outcome_count": manual.num_outcomes(),
            })))
        }
        ManualCmd::Logic { input, cap } => {
            let manual = load_manual(&input.input)?;
            let logic = build_logic_with_cap(&manual, cap)?;
            let verdict = logic.is_orthomodular_poset();
            let elements: Vec<Value> = logic
                .elements()
                .iter()
                .enumerate()
                .map(|(index, el)| {
                    json!({
                        "index": index,
                        "representative": el.representative().outcomes(),
                        "member_count": el.members().len(),
                    })
                })
                .collect();
            Ok(Output::Json(json!({
                "element_count": logic.len(),
                "atom_count": logic.atoms().len(),
                "zero": logic.zero(),
                "one": logic.one(),
                "elements": elements,
                "hasse_edges": logic.hasse_edges(),
                "orthocomplement": (0..logic.len())
                    .map(|p| (p, logic.orthocomplement(p)))
                    .collect::<Vec<_>>(),
                "orthomodular": verdict.orthomodular,
                "counterexample": verdict.counterexample,
            })))
        }
        ManualCmd::Coarsen {
            input,
            op,
            pack,
            new_id,
        } => {
            let manual = load_manual(&input.input)?;
            let coarse =
                manual.coarsen_pack(op, &comma_ids(&pack), OutcomeId::from(new_id.as_str()))?;
            Ok(Output::Json(manual_json(&coarse)))
        }
        ManualCmd::Identify { input, map } => {
            let manual = load_manual(&input.input)?;
            let spec: IdentificationSpec = parse_json(&read_input(&map)?, "identification JSON")?;
            let identification: BTreeMap<OutcomeId, OutcomeId> = spec
                .identify
                .into_iter()
                .map(|(a, b)| (OutcomeId::from(a), OutcomeId::from(b)))
                .collect();
            let merged = manual.identify_outcomes(&identification)?;
            Ok(Output::Json(manual_json(&merged)))
        }
    }
}

#[derive(Deserialize)]
struct WeightDoc {
    manual: ManualSpec,
    weights: BTreeMap<String, f64>,
}

#[derive(Deserialize)]
struct SuperpositionDoc {
    manual: ManualSpec,
    omega: BTreeMap<String, f64>,
    generators: Vec<BTreeMap<String, f64>>,
}

fn to_values(map: BTreeMap<String, f64>) -> BTreeMap<OutcomeId, f64> {
    map.into_iter().map(|(k, v)| (OutcomeId::from(k), v)).collect()
}

fn run_weights(cmd: WeightsCmd) -> Result<Output, CliError> {
    match cmd {
        WeightsCmd::Check(input) => {
            let doc: WeightDoc = parse_json(&read_input(&input.input)?, "weight JSON")?;
            let manual = Arc::new(Manual::try_from(doc.manual)?);
            let w = WeightFunction::validate(manual, to_values(doc.weights))?;
            let sums = operation_sums(w.manual(), w.values())?;
            Ok(Output::Json(json!({
                "valid": true,
                "operation_sums": sums,
            })))
        }
        WeightsCmd::Superposition(input) => {
            let doc: SuperpositionDoc =
                parse_json(&read_input(&input.input)?, "superposition JSON")?;
            let manual = Arc::new(Manual::try_from(doc.manual)?);
            let omega = WeightFunction::validate(manual.clone(), to_values(doc.omega))?;
            let generators: Vec<WeightFunction<f64>> = doc
                .generators
                .into_iter()
                .map(|g| WeightFunction::validate(manual.clone(), to_values(g)))
                .collect::<Result<_, _>>()?;
            let verdict = is_superposition(&omega, &generators)?;
            Ok(Output::Json(json!({
                "superposition": verdict,
                "common_zero_set": common_zero_set(&generators),
            })))
        }
        WeightsCmd::EventProb { input, event } => {
            let doc: WeightDoc = parse_json(&read_input(&input.input)?, "weight JSON")?;
            let manual = Arc::new(Manual::try_from(doc.manual)?);
            let w = WeightFunction::validate(manual.clone(), to_values(doc.weights))?;
            let ev = manual.is_event(&comma_ids(&event))?;
            Ok(Output::Json(json!({
                "event": ev.outcomes(),
                "witness": ev.witness(),
                "probability": w.event_probability(&ev),
            })))
        }
    }
}

fn load_frames(path: &str) -> Result<Vec<Frame<f64>>, CliError> {
    let wires: wire::MaybeEnveloped<Vec<wire::FrameWire>> =
        parse_json(&read_input(path)?, "frames JSON")?;
    wires
        .into_inner()
        .iter()
        .map(|w| wire::frame_from_wire(w).map_err(CliError::from))
        .collect()
}

fn run_spin(cmd: SpinCmd) -> Result<Output, CliError> {
    match cmd {
        SpinCmd::Frames { seed, count } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let frames: Vec<wire::FrameWire> = (0..count)
                .map(|_| {
                    let (basis, _) = random_frame_with_basis::<f64>(&mut rng);
                    [
                        wire::cvec_to_wire(&basis[0]),
                        wire::cvec_to_wire(&basis[1]),
                        wire::cvec_to_wire(&basis[2]),
                    ]
                })
                .collect();
            Ok(Output::Json(json!({
                "generator": spin::GENERATOR_NAME,
                "seed": seed,
                "count": count,
                "frames": frames,
            })))
        }
        SpinCmd::Weights { density, frames } => {
            let mat: wire::MaybeEnveloped<wire::MatWire> =
                parse_json(&read_input(&density)?, "density JSON")?;
            let rho = DensityOperator::new(wire::mat_from_wire(&mat.into_inner()))?;
            let frames = load_frames(&frames)?;
            let weights: Vec<Vec<f64>> =
                frames.iter().map(|f| frame_weights(&rho, f)).collect();
            Ok(Output::Json(json!({ "weights": weights })))
        }
        SpinCmd::FitDensity { frames, weights } => {
            let frames = load_frames(&frames)?;
            let observed: wire::MaybeEnveloped<Vec<Vec<f64>>> =
                parse_json(&read_input(&weights)?, "weights JSON")?;
            let fit = fit_density(&frames, &observed.into_inner())?;
            Ok(Output::Json(json!({
                "density": wire::mat_to_wire(fit.matrix()),
                "residual": fit.residual,
                "min_eigenvalue": fit.min_eigenvalue,
                "positive": fit.positive,
            })))
        }
    }
}

/// Raw parameter document: range checks run after JSON parsing, so that
/// out-of-range values surface as domain violations rather than parse
/// errors.
#[derive(Deserialize)]
struct RawParams {
    iota_t: f64,
    sigma_t: f64,
    nu_r: f64,
    sigma_r: f64,
    #[serde(default)]
    bias: Option<RawBias>,
}

#[derive(Deserialize)]
struct RawBias {
    #[serde(rename = "b_T")]
    b_t: f64,
    #[serde(rename = "b_R")]
    b_r: f64,
    #[serde(rename = "b_U")]
    b_u: f64,
}

fn parse_params(arg: &ParamsArg) -> Result<(FttParams<f64>, Option<BiasParams<f64>>), CliError> {
    let raw: RawParams = parse_json(&arg.params, "params JSON")?;
    let params = FttParams::new(raw.iota_t, raw.sigma_t, raw.nu_r, raw.sigma_r)?;
    let bias = raw
        .bias
        .map(|b| BiasParams::new(b.b_t, b.b_r, b.b_u))
        .transpose()?;
    Ok((params, bias))
}

fn params_json(params: &FttParams<f64>, bias: &Option<BiasParams<f64>>) -> Value {
    match bias {
        Some(b) => json!({"params": params, "bias": b}),
        None => json!({"params": params, "bias": Value::Null}),
    }
}

fn run_ftt(cmd: FttCmd) -> Result<Output, CliError> {
    match cmd {
        FttCmd::Predict { params, format } => {
            let (p, bias) = parse_params(&params)?;
            let predictions = predict_dichotomies(&p, bias.as_ref());
            match format {
                Format::Json => {
                    let mut out = params_json(&p, &bias);
                    out["predictions"] =
                        serde_json::to_value(predictions).expect("predictions serialize");
                    Ok(Output::Json(out))
                }
                Format::Csv => {
                    let mut text = String::from("discrimination,probe_type,p\n");
                    for disc in Label::ALL {
                        for probe in Label::ALL {
                            text.push_str(&format!(
                                "{disc},{probe},{}\n",
                                predictions.p(disc, probe)
                            ));
                        }
                    }
                    Ok(Output::Text(text))
                }
            }
        }
        FttCmd::Sums { params } => {
            let (p, bias) = parse_params(&params)?;
            if bias.is_some() {
                return Err(CliError::Usage(
                    "sums are defined for the default bias only".into(),
                ));
            }
            let [t, r, u] = tru_sums(&p);
            Ok(Output::Json(json!({"sum_T": t, "sum_R": r, "sum_U": u})))
        }
        FttCmd::Interference { params } => {
            let (p, bias) = parse_params(&params)?;
            if bias.is_some() {
                return Err(CliError::Usage(
                    "interference is defined for the default bias only".into(),
                ));
            }
            let (excess_t, excess_r) = interference_excess(&p);
            let tru = predict_tru(&p, TruResponseRule::default());
            Ok(Output::Json(json!({
                "excess_T": excess_t,
                "excess_R": excess_r,
                "tru_predictions": {
                    "T": tru.row(Label::T),
                    "R": tru.row(Label::R),
                    "U": tru.row(Label::U),
                },
            })))
        }
        FttCmd::Canonical => {
            let states = canonical_states::<f64>();
            Ok(Output::Json(json!({
                "manual": manual_json(&states.manual),
                "omega_p": states.omega_p.values(),
                "omega_0": states.omega_0.values(),
                "omega_g": states.omega_g.values(),
            })))
        }
    }
}

/// Envelope written by `est fit` and read back by `est gof`.
#[derive(Serialize, Deserialize)]
struct FitDoc {
    model: String,
    options: FitOptions<f64>,
    result: FitResult<f64>,
}

fn run_est(cmd: EstCmd) -> Result<Output, CliError> {
    match cmd {
        EstCmd::Simulate {
            params,
            n_per_cell,
            seed,
            format,
        } => {
            let (p, bias) = parse_params(&params)?;
            let counts = simulate_counts(&p, bias.as_ref(), n_per_cell, seed)?;
            match format {
                Format::Csv => {
                    eprintln!(
                        "{}",
                        json!({
                            "generator": estimation::GENERATOR_NAME,
                            "seed": seed,
                            "n_per_cell": n_per_cell
                        })
                    );
                    Ok(Output::Text(counts.to_csv()))
                }
                Format::Json => {
                    let mut out = params_json(&p, &bias);
                    out["generator"] = json!(estimation::GENERATOR_NAME);
                    out["seed"] = json!(seed);
                    out["n_per_cell"] = json!(n_per_cell);
                    out["counts"] = serde_json::to_value(&counts).expect("counts serialize");
                    out["csv"] = json!(counts.to_csv());
                    Ok(Output::Json(out))
                }
            }
        }
        EstCmd::Fit {
            counts,
            model,
            tol,
            max_iter,
        } => {
            let table = CountTable::from_csv(&read_input(&counts)?)?;
            let model = match model {
                ModelArg::Four => FitModel::FourParam,
                ModelArg::Seven => FitModel::SevenParam,
            };
            let options = FitOptions { tol, max_iter };
            let result = fit_mle(&table, model, &options)?;
            let moments = moment_estimate(&table.frequencies::<f64>()?);
            let doc = FitDoc {
                model: match model {
                    FitModel::FourParam => "4".into(),
                    FitModel::SevenParam => "7".into(),
                },
                options,
                result,
            };
            let mut out = serde_json::to_value(&doc).expect("fit serializes");
            out["moment_estimate"] = serde_json::to_value(moments).expect("moments serialize");
            Ok(Output::Json(out))
        }
        EstCmd::Gof { counts, fit } => {
            let table = CountTable::from_csv(&read_input(&counts)?)?;
            let text = read_input(&fit)?;
            let result: FitResult<f64> = match serde_json::from_str::<FitDoc>(&text) {
                Ok(doc) => doc.result,
                Err(_) => parse_json(&text, "fit JSON")?,
            };
            let report = goodness_of_fit(&result, &table)?;
            Ok(Output::Json(
                serde_json::to_value(&report).expect("report serializes"),
            ))
        }
    }
}

fn run_demo(cmd: DemoCmd) -> Result<Output, CliError> {
    match cmd {
        DemoCmd::Interference { params } => {
            let (p, bias) = parse_params(&params)?;
            if bias.is_some() {
                return Err(CliError::Usage(
                    "the interference demo uses the default bias".into(),
                ));
            }
            let (combined, identification) = combined_manual();
            let values = predict_dichotomies(&p, None).to_weight_values();
            let sums = operation_sums(&combined, &values)?;
            let violation = match WeightFunction::validate(Arc::new(combined.clone()), values) {
                Ok(_) => None,
                Err(e @ WeightError::OperationSumViolation { .. }) => Some(e),
                Err(other) => return Err(other.into()),
            };
            let identification: BTreeMap<String, String> = identification
                .into_iter()
                .map(|(a, b)| (a.to_string(), b.to_string()))
                .collect();
            let validates = violation.is_none();
            let out = json!({
                "params": p,
                "manual": manual_json(&combined),
                "identification": {"identify": identification},
                "operation_sums": sums,
                "excess": {
                    "T": sums[0] - 1.0,
                    "R": sums[1] - 1.0,
                    "U": sums[2] - 1.0,
                },
                "violation": violation,
                "validates": validates,
            });
            if validates {
                Ok(Output::Json(out))
            } else {
                Err(CliError::Domain(out))
            }
        }
        DemoCmd::SpinAdditivity { seed, trials } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut max_merge_error = 0.0f64;
            let mut max_unchanged_error = 0.0f64;
            for _ in 0..trials {
                let rho = spin::random_density::<f64>(&mut rng);
                let frame = spin::random_frame::<f64>(&mut rng);
                let w = frame_weights(&rho, &frame);
                let coarse = frame
                    .coarsen(&frame.projections()[1], &frame.projections()[2])
                    .expect("members of the frame merge");
                let wc = frame_weights(&rho, &coarse);
                max_merge_error = max_merge_error.max((wc[1] - (w[1] + w[2])).abs());
                max_unchanged_error = max_unchanged_error.max((wc[0] - w[0]).abs());
            }
            let within = max_merge_error <= 1e-10 && max_unchanged_error <= 1e-12;
            let out = json!({
                "generator": spin::GENERATOR_NAME,
                "seed": seed,
                "trials": trials,
                "max_merge_abs_error": max_merge_error,
                "max_unchanged_abs_error": max_unchanged_error,
                "within_tolerance": within,
            });
            if within {
                Ok(Output::Json(out))
            } else {
                Err(CliError::Domain(out))
            }
        }
    }
}
