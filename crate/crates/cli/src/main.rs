//! `lindblad-coms`: invariant subspaces, constants of motion and stationary
//! states of model files from the command line.
//!
//! Exit status: 0 on success, 1 when the model or a computed result fails
//! validation, 2 on usage, input or I/O errors.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use nalgebra::DVector;
use serde_json::{json, Value};

use lindblad_coms::builtin::{two_tls_analytics, two_tls_model, TwoTlsSpec};
use lindblad_coms::coms::{
    basis_projectors, brute_force_com_atoms, com_condition_residual, default_lindblad_tolerance,
    lindblad_residual_in, named_coms_two_tls,
};
use lindblad_coms::decomposition::{default_epsilon_s, invariant_partition, max_off_block_magnitude};
use lindblad_coms::dynamics::{evolve_density, rate_matrix, uniform_times, Dopri5};
use lindblad_coms::model::{
    eigenbasis, initial_state_from_str, model_from_document, model_to_document,
    unchecked_from_document, ModelDocument,
};
use lindblad_coms::report::{self, ComReportParts, TrajectorySummary};
use lindblad_coms::stationary::{
    fixed_point_residual, oracle_distance, stationary_state_in, KERNEL_THRESHOLD,
};
use lindblad_coms::{
    validate, DensityState64, EigenSystem64, Error, LindbladGenerator, SpectralFunction,
    SubspacePartition, SystemModel64,
};

#[derive(Parser)]
#[command(name = "lindblad-coms", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check a model file and report every failed invariant.
    Verify(ModelArgs),
    /// Split the eigenbasis into invariant blocks.
    Decompose(ModelArgs),
    /// List the block projectors and their residuals.
    Coms {
        #[command(flatten)]
        model: ModelArgs,
        /// Cross-check against exhaustive enumeration of 0/1 observables.
        #[arg(long)]
        brute_force: bool,
    },
    /// Predict the stationary state reached from an initial state.
    Stationary {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        initial: InitialArgs,
    },
    /// Integrate the master equation and write a population trajectory.
    Evolve {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        initial: InitialArgs,
        #[arg(long, value_parser = positive)]
        t_max: f64,
        /// Number of output times, including t = 0.
        #[arg(long, default_value_t = 201, value_parser = clap::value_parser!(u32).range(2..))]
        samples: u32,
        /// Add |rho_ij| columns for every pair i < j.
        #[arg(long)]
        coherences: bool,
    },
    /// Write a builtin model file and its analytic fixture.
    Example {
        #[command(subcommand)]
        which: ExampleCommand,
    },
}

#[derive(Args)]
struct ModelArgs {
    #[arg(long)]
    model: PathBuf,
    /// Absolute coupling threshold; defaults to 1e-12 times max |S_ij|.
    #[arg(long, value_parser = non_negative)]
    epsilon_s: Option<f64>,
    /// Write the report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct InitialArgs {
    /// Eigenbasis initial state; defaults to the maximally mixed state.
    #[arg(long)]
    initial: Option<PathBuf>,
}

#[derive(Subcommand)]
enum ExampleCommand {
    /// Two two-level systems sharing a reservoir.
    TwoTls(TwoTlsArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Preset {
    Figure1,
    NonInteracting,
}

#[derive(Args)]
struct TwoTlsArgs {
    /// Starting parameter set; individual flags override it.
    #[arg(long, value_enum, default_value = "figure1")]
    preset: Preset,
    /// Transition frequency of the first emitter.
    #[arg(long)]
    omega1: Option<f64>,
    #[arg(long)]
    omega2: Option<f64>,
    /// Exchange constant; 0 decouples the emitters.
    #[arg(long)]
    rabi: Option<f64>,
    /// Reservoir coupling of the second emitter relative to the first.
    #[arg(long)]
    asymmetry: Option<f64>,
    #[arg(long, value_parser = non_negative)]
    coupling_strength: Option<f64>,
    #[arg(long, value_parser = positive)]
    temperature: Option<f64>,
    /// Flat reservoir strength.
    #[arg(long, value_parser = positive)]
    g0: Option<f64>,
    /// Model file; the fixture goes next to it as `<stem>.analytics.json`.
    /// Without it both are printed as one JSON object.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn positive(s: &str) -> Result<f64, String> {
    match s.parse::<f64>() {
        Ok(x) if x.is_finite() && x > 0.0 => Ok(x),
        _ => Err(format!("expected a positive number, got {s:?}")),
    }
}

fn non_negative(s: &str) -> Result<f64, String> {
    match s.parse::<f64>() {
        Ok(x) if x.is_finite() && x >= 0.0 => Ok(x),
        _ => Err(format!("expected a non-negative number, got {s:?}")),
    }
}

/// Failure with the exit status it maps to.
enum Failure {
    Invalid(String),
    Usage(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Io(_)
            | Error::Parse(_)
            | Error::EnumerationTooLarge { .. }
            | Error::InvalidParameter(_)
            | Error::InvalidTimeGrid(_)
            | Error::UndefinedMixingAngle => Failure::Usage(e.to_string()),
            _ => Failure::Invalid(e.to_string()),
        }
    }
}

type Outcome = Result<bool, Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Verify(args) => verify(&args),
        Command::Decompose(args) => decompose(&args),
        Command::Coms { model, brute_force } => coms(&model, brute_force),
        Command::Stationary { model, initial } => stationary(&model, &initial),
        Command::Evolve {
            model,
            initial,
            t_max,
            samples,
            coherences,
        } => evolve(&model, &initial, t_max, samples as usize, coherences),
        Command::Example {
            which: ExampleCommand::TwoTls(args),
        } => example_two_tls(&args),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(Failure::Invalid(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

fn write(path: Option<&Path>, text: &str) -> Result<(), Failure> {
    match path {
        Some(p) => fs::write(p, text).map_err(|e| Failure::Usage(format!("{}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn emit(args: &ModelArgs, report: &Value) -> Result<(), Failure> {
    write(args.out.as_deref(), &report::to_canonical_string(report))
}

fn document(path: &Path) -> Result<ModelDocument, Failure> {
    serde_json::from_str(&read(path)?).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

fn load(path: &Path) -> Result<SystemModel64, Failure> {
    Ok(model_from_document(&document(path)?)?)
}

struct Analysis {
    model: SystemModel64,
    eig: EigenSystem64,
    epsilon_s: f64,
    part: SubspacePartition,
}

fn analyse(args: &ModelArgs) -> Result<Analysis, Failure> {
    let model = load(&args.model)?;
    let eig = eigenbasis(&model)?;
    let epsilon_s = args.epsilon_s.unwrap_or_else(|| default_epsilon_s(&eig));
    let part = invariant_partition(&eig, epsilon_s);
    Ok(Analysis {
        model,
        eig,
        epsilon_s,
        part,
    })
}

fn initial_state(args: &InitialArgs, n: usize) -> Result<DensityState64, Failure> {
    let rho = match &args.initial {
        Some(path) => initial_state_from_str(&read(path)?)?,
        None => DensityState64::from_populations(&DVector::from_element(n, 1.0 / n as f64))?,
    };
    if rho.dim() != n {
        return Err(Failure::Usage(format!(
            "initial state has dimension {}, model has {n}",
            rho.dim()
        )));
    }
    Ok(rho)
}

fn verify(args: &ModelArgs) -> Outcome {
    let model = unchecked_from_document::<f64>(&document(&args.model)?)?;
    let result = validate(&model);
    emit(args, &report::validation_report(&result))?;
    Ok(result.passed())
}

fn decompose(args: &ModelArgs) -> Outcome {
    let a = analyse(args)?;
    let report = report::partition_report(
        &a.part,
        a.eig.frequencies(),
        a.epsilon_s,
        max_off_block_magnitude(&a.eig, &a.part),
        a.model.tolerances(),
    );
    emit(args, &report)?;
    Ok(true)
}

fn coms(args: &ModelArgs, brute_force: bool) -> Outcome {
    let a = analyse(args)?;
    let basis = basis_projectors::<f64>(&a.part);
    let generator = LindbladGenerator::new(
        &a.eig,
        a.model.reservoir(),
        a.model.temperature(),
        a.model.coupling_strength(),
    )?;
    let condition_tolerance = a.epsilon_s * a.epsilon_s;
    let lindblad_tolerance = default_lindblad_tolerance(&a.model)?;
    let mut condition = Vec::new();
    let mut lindblad = Vec::new();
    for p in &basis.projectors {
        condition.push(com_condition_residual(&a.eig, p)?);
        lindblad.push(lindblad_residual_in(&generator, p)?);
    }
    let atoms = if brute_force {
        Some(brute_force_com_atoms(&a.eig, condition_tolerance)?)
    } else {
        None
    };
    let matches = atoms.as_ref().is_none_or(|at| *at == a.part);
    let report = report::com_report(
        &basis,
        &ComReportParts {
            condition_residuals: &condition,
            lindblad_residuals: &lindblad,
            named: &[],
            condition_tolerance,
            lindblad_tolerance,
            brute_force: atoms.as_ref().map(|at| (at, matches)),
        },
    );
    emit(args, &report)?;
    let sound = condition.iter().all(|&r| r <= condition_tolerance)
        && lindblad.iter().all(|&r| r <= lindblad_tolerance);
    Ok(sound && matches)
}

fn stationary(args: &ModelArgs, initial: &InitialArgs) -> Outcome {
    let a = analyse(args)?;
    let rho0 = initial_state(initial, a.eig.dim())?;
    let prediction = stationary_state_in(&a.eig, &a.part, a.model.temperature(), &rho0)?;
    let rates = rate_matrix(
        &a.eig,
        a.model.reservoir(),
        a.model.temperature(),
        a.model.coupling_strength(),
    )?;
    let residual = fixed_point_residual(&rates, &prediction.populations());
    // a block without internal rates has no unique kernel; report null
    let oracle = oracle_distance(&a.eig, &a.part, &rates, a.model.temperature()).unwrap_or(f64::NAN);
    let mut report =
        report::stationary_report(&prediction, &a.part, residual, oracle, KERNEL_THRESHOLD);
    report["tolerances"]["epsilon_s"] = report::number(a.epsilon_s);
    emit(args, &report)?;
    Ok(true)
}

fn evolve(
    args: &ModelArgs,
    initial: &InitialArgs,
    t_max: f64,
    samples: usize,
    coherences: bool,
) -> Outcome {
    let a = analyse(args)?;
    let rho0 = initial_state(initial, a.eig.dim())?;
    let traj = evolve_density(&a.model, &rho0, &uniform_times(t_max, samples))?;
    let prediction = stationary_state_in(&a.eig, &a.part, a.model.temperature(), &rho0)?;
    let summary = TrajectorySummary {
        max_trace_drift: traj.max_trace_drift(),
        max_block_weight_drift: traj.max_block_weight_drift(&a.part),
        distance_to_stationary: traj.last().l1_distance(&prediction.assembled),
        stationary_populations: prediction.populations(),
    };
    let mut json = report::trajectory_summary(&traj, &a.part, &summary);
    let stepper = Dopri5::<f64>::default();
    json["tolerances"] = json!({
        "epsilon_s": report::number(a.epsilon_s),
        "rtol": report::number(stepper.rtol),
        "atol": report::number(stepper.atol),
    });
    let csv = report::trajectory_csv(&traj, coherences);
    let summary_text = report::to_canonical_string(&json);
    // with --out the CSV goes to the file and the summary to stdout
    match args.out.as_deref() {
        Some(path) => {
            write(Some(path), &csv)?;
            print!("{summary_text}");
        }
        None => {
            print!("{csv}");
            eprint!("{summary_text}");
        }
    }
    Ok(true)
}

fn example_two_tls(args: &TwoTlsArgs) -> Outcome {
    let mut spec = match args.preset {
        Preset::Figure1 => TwoTlsSpec::<f64>::figure1(),
        Preset::NonInteracting => TwoTlsSpec::non_interacting(),
    };
    let overrides = [
        (args.omega1, &mut spec.omega1),
        (args.omega2, &mut spec.omega2),
        (args.rabi, &mut spec.rabi),
        (args.asymmetry, &mut spec.asymmetry),
        (args.coupling_strength, &mut spec.coupling_strength),
        (args.temperature, &mut spec.temperature),
    ];
    for (value, field) in overrides {
        if let Some(v) = value {
            *field = v;
        }
    }
    if let Some(g0) = args.g0 {
        spec.reservoir = SpectralFunction::flat_kms(g0)?;
    }
    let model = two_tls_model(&spec)?;
    let analytics = two_tls_analytics(&spec)?;
    let eig = eigenbasis(&model)?;
    let part = invariant_partition(&eig, default_epsilon_s(&eig));
    let named = named_coms_two_tls(&eig, &part, spec.is_interacting())?;

    let mut fixture = report::two_tls_analytics_report(&spec, &analytics);
    fixture["blocks"] = json!(part.one_based_blocks());
    fixture["psi_blocks"] = json!(analytics.psi_blocks(part.blocks()));
    fixture["named_coms"] = Value::Array(
        named
            .iter()
            .map(|(n, o)| json!({ "name": n.name(), "values": report::vector(o.values()) }))
            .collect(),
    );
    let doc = serde_json::to_value(model_to_document(&model)).expect("model documents serialize");

    match &args.out {
        Some(path) => {
            let mut model_text = serde_json::to_string_pretty(&doc).expect("JSON values serialize");
            model_text.push('\n');
            write(Some(path), &model_text)?;
            write(Some(&analytics_path(path)), &report::to_canonical_string(&fixture))?;
        }
        None => write(
            None,
            &report::to_canonical_string(&json!({ "model": doc, "analytics": fixture })),
        )?,
    }
    Ok(true)
}

fn analytics_path(model: &Path) -> PathBuf {
    let stem = model.file_stem().map_or("model".into(), |s| s.to_string_lossy());
    model.with_file_name(format!("{stem}.analytics.json"))
}
