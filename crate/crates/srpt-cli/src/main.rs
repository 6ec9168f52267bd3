//! Command-line frontend: wires circuit specs to the analysis modules and
//! emits JSON/CSV reports.
//!
//! Exit codes: 0 success, 1 domain error (stable error codes in the JSON
//! report), 2 usage error (bad arguments, unreadable files).

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use srpt_core::circuit::{validate, CircuitSpec, ValidatedSpec};
use srpt_core::hamiltonian::{
    apply_unitary_shift, build_hamiltonian, Boundary, HamiltonianModel, ShiftSpec,
};
use srpt_core::meanfield::{
    critical_inductance, minimize_potential, phase_diagram, thermal_order_parameter,
    EffectivePotential,
};
use srpt_core::nogo::{classify_srpt, classify_unsupported, competition_report, ClassifyOptions};
use srpt_core::report::HamiltonianDocument;
use srpt_core::spectrum::thermal::{
    assumption_a_margin, hepp_bounds_check, partition_function_cnumber, partition_function_exact,
};
use srpt_core::spectrum::{
    assemble_evaluated, assemble_matrix, ground_state, verify_unitary_equivalence, TruncatedBasis,
};

#[derive(Parser)]
#[command(
    name = "srpt",
    version,
    about = "Superconducting-circuit Hamiltonians and superradiant-transition analysis",
    after_help = SPEC_SCHEMA_HELP
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

const SPEC_SCHEMA_HELP: &str = r#"CIRCUIT SPEC FILE (JSON):
  {
    "topology":  one of Fig2_InductiveLC | Fig3_CapacitiveLC | Fig4_CapacitiveTline |
                 Fig5b_InductivePerCell | Fig5c_BambaCircuit | Fig5d_NoResonatorInductor |
                 Fig6_InductiveTline,
    "n_cells":   integer >= 1,
    "resonator": { "l_r": henry, "c_r": farad },            (LC topologies; l_r absent for Fig5d)
    "cell":      { "l_c": henry, "e_j": joule, "c_j": farad,
                   "phi_ext_over_phi_q": 0..1, "l_t_prime": henry },
    "tline":     { "l_t": H/m, "c_t": F/m, "dx": m, "length": m,
                   "lambda_min": m, "omega_a": rad/s }      (transmission-line topologies)
  }
All element values are SI decimal numbers."#;

#[derive(Subcommand)]
enum Command {
    /// Derive the Hamiltonian and print it as a canonical JSON document
    Derive(DeriveArgs),
    /// Classify a circuit: no-go decoupling, mean-field criterion, verdict
    Classify(ClassifyArgs),
    /// Mean-field order parameters at one parameter point
    Meanfield(MeanfieldArgs),
    /// Phase-diagram sweep over scaled parameters
    Sweep(SweepArgs),
    /// Exact diagonalization on a truncated basis
    Ed(EdArgs),
    /// Consistency checks
    #[command(subcommand)]
    Check(CheckCommand),
}

#[derive(Args)]
struct DeriveArgs {
    /// Circuit spec JSON file
    spec: PathBuf,
    /// Keep the matter box abstract even when junction values are present
    #[arg(long)]
    r#abstract: bool,
    /// Transmission-line boundary condition
    #[arg(long, default_value = "periodic", value_parser = parse_boundary)]
    boundary: Boundary,
    /// Output path (stdout when omitted)
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct ClassifyArgs {
    spec: PathBuf,
    /// Skip the critical-temperature computation
    #[arg(long)]
    no_thermal: bool,
    #[arg(long, default_value = "periodic", value_parser = parse_boundary)]
    boundary: Boundary,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct MeanfieldArgs {
    spec: PathBuf,
    /// Temperature scan "min:max:points" in kelvin for the thermal order parameter
    #[arg(long)]
    temps: Option<String>,
    /// Emit JSON instead of CSV
    #[arg(long)]
    json: bool,
    /// Include the competition report (energy terms and barrier growth)
    #[arg(long)]
    competition: bool,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    spec: PathBuf,
    /// Scale factors on L_R: "min:max:points"
    #[arg(long)]
    scale_lr: Option<String>,
    /// Scale factors on E_J: "min:max:points"
    #[arg(long)]
    scale_ej: Option<String>,
    /// Fixed temperature attached to every grid point, kelvin
    #[arg(long)]
    temp: Option<f64>,
    /// Emit JSON instead of CSV
    #[arg(long)]
    json: bool,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct EdArgs {
    /// Circuit spec JSON file (or a derived model document with --model)
    spec: PathBuf,
    /// Treat the input as a derived Hamiltonian document
    #[arg(long)]
    model: bool,
    #[arg(long, default_value_t = 16)]
    photon_cutoff: usize,
    #[arg(long, default_value_t = 12)]
    cell_cutoff: usize,
    /// Number of eigenvalues
    #[arg(long, default_value_t = 5)]
    levels: usize,
    #[arg(long, default_value_t = 7)]
    seed: u64,
    /// Dump the assembled matrix as "row col value" lines to this path
    #[arg(long)]
    dump_matrix: Option<PathBuf>,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Subcommand)]
enum CheckCommand {
    /// Sandwich bounds Z̄ ≤ Z ≤ exp(Σħω/k_BT)·Z̄ over a temperature scan
    Hepp(HeppArgs),
    /// Photonic zero-point budget vs. matter free energy per atom
    AssumptionA(AssumptionArgs),
    /// Spectra of a model and its shift-transformed partner over a cutoff ladder
    Unitary(UnitaryArgs),
}

#[derive(Args)]
struct HeppArgs {
    spec: PathBuf,
    /// Temperature scan "min:max:points" in kelvin
    #[arg(long, default_value = "0.02:0.4:10")]
    temps: String,
    #[arg(long, default_value_t = 14)]
    photon_cutoff: usize,
    #[arg(long, default_value_t = 14)]
    cell_cutoff: usize,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct AssumptionArgs {
    spec: PathBuf,
    /// Temperature, kelvin
    #[arg(long, default_value_t = 0.1)]
    temp: f64,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct UnitaryArgs {
    spec: PathBuf,
    /// Cutoff ladder "8x8,12x12,16x16,20x20" (photon x cell)
    #[arg(long, default_value = "8x8,12x12,16x16,22x22")]
    ladder: String,
    #[arg(long, default_value_t = 5)]
    levels: usize,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

fn parse_boundary(s: &str) -> Result<Boundary, String> {
    match s {
        "periodic" => Ok(Boundary::Periodic),
        "open" => Ok(Boundary::Open),
        other => Err(format!("unknown boundary {other} (periodic|open)")),
    }
}

/// "min:max:points" → inclusive linear scan.
fn parse_scan(s: &str) -> Result<Vec<f64>, String> {
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() != 3 {
        return Err(format!("scan must be min:max:points, got {s}"));
    }
    let min: f64 = parts[0].parse().map_err(|e| format!("bad scan min: {e}"))?;
    let max: f64 = parts[1].parse().map_err(|e| format!("bad scan max: {e}"))?;
    let n: usize = parts[2].parse().map_err(|e| format!("bad scan count: {e}"))?;
    if n == 0 {
        return Ok(vec![]);
    }
    if n == 1 {
        return Ok(vec![min]);
    }
    Ok((0..n)
        .map(|i| min + (max - min) * i as f64 / (n - 1) as f64)
        .collect())
}

/// Format a float with 12 significant digits for text reports.
fn sig12(v: f64) -> String {
    if v == 0.0 {
        "0".to_string()
    } else {
        format!("{v:.11e}")
    }
}

enum CliError {
    Usage(String),
    Domain(srpt_core::Error),
    DomainMsg(String),
}

impl From<srpt_core::Error> for CliError {
    fn from(e: srpt_core::Error) -> Self {
        CliError::Domain(e)
    }
}

type CliResult<T> = Result<T, CliError>;

fn read_spec(path: &Path) -> CliResult<(CircuitSpec, ValidatedSpec)> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
    let spec = CircuitSpec::from_json_str(&text).map_err(CliError::Domain)?;
    let validated = validate(&spec).map_err(|errs| {
        CliError::DomainMsg(
            errs.iter()
                .map(|e| e.to_string())
                .collect::<Vec<_>>()
                .join("; "),
        )
    })?;
    Ok((spec, validated))
}

/// Raw topology string of a spec file, for configurations outside the
/// supported set (no Hamiltonian exists for the fully general variant).
fn raw_topology(path: &Path) -> Option<String> {
    let text = std::fs::read_to_string(path).ok()?;
    let value: serde_json::Value = serde_json::from_str(&text).ok()?;
    value
        .get("topology")
        .and_then(|t| t.as_str())
        .map(str::to_string)
}

fn emit(output: &Option<PathBuf>, content: &str) -> CliResult<()> {
    match output {
        Some(path) => std::fs::write(path, content)
            .map_err(|e| CliError::Usage(format!("cannot write {}: {e}", path.display()))),
        None => {
            println!("{content}");
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Derive(args) => run_derive(args),
        Command::Classify(args) => run_classify(args),
        Command::Meanfield(args) => run_meanfield(args),
        Command::Sweep(args) => run_sweep(args),
        Command::Ed(args) => run_ed(args),
        Command::Check(cmd) => match cmd {
            CheckCommand::Hepp(args) => run_check_hepp(args),
            CheckCommand::AssumptionA(args) => run_check_assumption(args),
            CheckCommand::Unitary(args) => run_check_unitary(args),
        },
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Usage(msg)) => {
            eprintln!("usage error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Domain(e)) => {
            eprintln!(
                "{}",
                json!({ "error": e.code(), "message": e.to_string() })
            );
            ExitCode::from(1)
        }
        Err(CliError::DomainMsg(msg)) => {
            eprintln!("{}", json!({ "error": "invalid_spec", "message": msg }));
            ExitCode::from(1)
        }
    }
}

fn build_from_args(validated: &ValidatedSpec, force_abstract: bool, boundary: Boundary) -> CliResult<HamiltonianModel> {
    if force_abstract {
        use srpt_core::hamiltonian::{build_charge_hamiltonian, build_flux_hamiltonian, BuildMode};
        match validated.topology {
            srpt_core::Topology::Fig3CapacitiveLc | srpt_core::Topology::Fig4CapacitiveTline => {
                Ok(build_charge_hamiltonian(validated, boundary)?)
            }
            _ => Ok(build_flux_hamiltonian(validated, BuildMode::Abstract)?),
        }
    } else {
        Ok(build_hamiltonian(validated, boundary)?)
    }
}

fn run_derive(args: DeriveArgs) -> CliResult<()> {
    if let Some(name) = raw_topology(&args.spec) {
        if name.starts_with("Fig5a") {
            return Err(CliError::Domain(srpt_core::Error::UnsupportedTopology(name)));
        }
    }
    let (_, validated) = read_spec(&args.spec)?;
    let model = build_from_args(&validated, args.r#abstract, args.boundary)?;
    let doc = HamiltonianDocument::from_model(&model);
    let text = serde_json::to_string_pretty(&doc)
        .map_err(|e| CliError::Usage(format!("serialization failed: {e}")))?;
    emit(&args.output, &text)
}

fn run_classify(args: ClassifyArgs) -> CliResult<()> {
    // Configurations with no derivable Hamiltonian still get a verdict.
    if let Some(name) = raw_topology(&args.spec) {
        if name.starts_with("Fig5a") {
            let verdict = classify_unsupported(&name);
            let text = serde_json::to_string_pretty(&verdict).unwrap();
            return emit(&args.output, &text);
        }
    }
    let (_, validated) = read_spec(&args.spec)?;
    let verdict = classify_srpt(
        &validated,
        &ClassifyOptions {
            with_thermal: !args.no_thermal,
            boundary: args.boundary,
        },
    )?;
    let text = serde_json::to_string_pretty(&verdict).unwrap();
    emit(&args.output, &text)
}

fn run_meanfield(args: MeanfieldArgs) -> CliResult<()> {
    let (_, validated) = read_spec(&args.spec)?;
    let potential = EffectivePotential::from_spec(&validated)?;
    let result = minimize_potential(&potential)?;
    let condition = critical_inductance(&validated).ok();

    let temps = match &args.temps {
        Some(s) => parse_scan(s).map_err(CliError::Usage)?,
        None => vec![],
    };
    let mut thermal = Vec::with_capacity(temps.len());
    if !temps.is_empty() {
        let model = build_hamiltonian(&validated, Boundary::Periodic)?;
        for t in &temps {
            thermal.push(thermal_order_parameter(&model, *t, 16)?);
        }
    }

    let competition = if args.competition {
        Some(competition_report(&validated, &[1, 2, 4, 8, 16, 32])?)
    } else {
        None
    };

    if args.json {
        let payload = json!({
            "result": result,
            "critical_condition": condition,
            "thermal": thermal,
            "competition": competition,
        });
        emit(&args.output, &serde_json::to_string_pretty(&payload).unwrap())
    } else {
        let mut csv = String::new();
        writeln!(
            csv,
            "t_kelvin,threshold_henry,phi0_weber,psi0_weber,phase,curvature_internal"
        )
        .unwrap();
        let threshold = condition
            .map(|c| sig12(c.threshold_henry))
            .unwrap_or_default();
        if thermal.is_empty() {
            writeln!(
                csv,
                ",{},{},{},{:?},{}",
                threshold,
                sig12(result.phi0_weber),
                sig12(result.psi0_weber),
                result.phase,
                sig12(result.curvature_at_origin),
            )
            .unwrap();
        } else {
            for point in &thermal {
                writeln!(
                    csv,
                    "{},{},{},{},{:?},{}",
                    sig12(point.t_kelvin),
                    threshold,
                    sig12(point.phi0_t_weber),
                    sig12(result.psi0_weber),
                    result.phase,
                    sig12(result.curvature_at_origin),
                )
                .unwrap();
            }
        }
        emit(&args.output, csv.trim_end())
    }
}

fn run_sweep(args: SweepArgs) -> CliResult<()> {
    let (spec, _) = read_spec(&args.spec)?;
    let lr_scales = match &args.scale_lr {
        Some(s) => parse_scan(s).map_err(CliError::Usage)?,
        None => vec![1.0],
    };
    let ej_scales = match &args.scale_ej {
        Some(s) => parse_scan(s).map_err(CliError::Usage)?,
        None => vec![1.0],
    };

    let mut points = Vec::with_capacity(lr_scales.len() * ej_scales.len());
    for lr_scale in &lr_scales {
        for ej_scale in &ej_scales {
            let mut varied = spec.clone();
            if let Some(res) = &mut varied.resonator {
                if let Some(l_r) = &mut res.l_r {
                    *l_r *= lr_scale;
                }
            }
            if let Some(cell) = &mut varied.cells {
                if let Some(e_j) = &mut cell.e_j {
                    *e_j *= ej_scale;
                }
            }
            let validated = validate(&varied).map_err(|errs| {
                CliError::DomainMsg(
                    errs.iter()
                        .map(|e| e.to_string())
                        .collect::<Vec<_>>()
                        .join("; "),
                )
            })?;
            points.push((validated, args.temp));
        }
    }
    let rows = phase_diagram(&points);

    if args.json {
        emit(&args.output, &serde_json::to_string_pretty(&rows).unwrap())
    } else {
        let mut csv = String::new();
        writeln!(
            csv,
            "index,n_cells,l_r_henry,l_c_henry,e_j_joule,t_kelvin,threshold_henry,phi0_weber,psi0_weber,phase,t_c_kelvin,error"
        )
        .unwrap();
        for r in &rows {
            writeln!(
                csv,
                "{},{},{},{},{},{},{},{},{},{},{},{}",
                r.index,
                r.n_cells,
                r.l_r_henry.map(sig12).unwrap_or_default(),
                sig12(r.l_c_henry),
                sig12(r.e_j_joule),
                r.t_kelvin.map(sig12).unwrap_or_default(),
                r.threshold_henry.map(sig12).unwrap_or_default(),
                r.phi0_weber.map(sig12).unwrap_or_default(),
                r.psi0_weber.map(sig12).unwrap_or_default(),
                r.phase.map(|p| format!("{p:?}")).unwrap_or_default(),
                r.t_c_kelvin.map(sig12).unwrap_or_default(),
                r.error.clone().unwrap_or_default(),
            )
            .unwrap();
        }
        emit(&args.output, csv.trim_end())
    }
}

fn run_ed(args: EdArgs) -> CliResult<()> {
    let basis = {
        let mut b = TruncatedBasis::new(args.photon_cutoff, args.cell_cutoff);
        b.seed = args.seed;
        b
    };
    let assembled = if args.model {
        let text = std::fs::read_to_string(&args.spec)
            .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", args.spec.display())))?;
        let doc: HamiltonianDocument = serde_json::from_str(&text)
            .map_err(|e| CliError::DomainMsg(format!("bad model document: {e}")))?;
        let ev = doc.to_evaluated()?;
        assemble_evaluated(&ev, &basis)?
    } else {
        let (_, validated) = read_spec(&args.spec)?;
        let model = build_hamiltonian(&validated, Boundary::Periodic)?;
        assemble_matrix(&model, &basis)?
    };

    if let Some(path) = &args.dump_matrix {
        let mut text = String::new();
        for r in 0..assembled.dim {
            for k in assembled.csr.row_ptr[r]..assembled.csr.row_ptr[r + 1] {
                writeln!(text, "{} {} {}", r, assembled.csr.col_idx[k], sig12(assembled.csr.values[k])).unwrap();
            }
        }
        std::fs::write(path, text)
            .map_err(|e| CliError::Usage(format!("cannot write {}: {e}", path.display())))?;
    }

    let spectrum = ground_state(&assembled, args.levels)?;
    let payload = json!({
        "dim": spectrum.dim,
        "method": spectrum.method,
        "hermiticity_defect": spectrum.hermiticity_defect,
        "eigenvalues_internal": spectrum.eigenvalues,
        "gap_internal": spectrum.gap,
        "ground_state": {
            "exp_phi_internal": spectrum.exp_phi,
            "exp_phi2_internal": spectrum.exp_phi2,
            "exp_n_photon": spectrum.exp_n_photon,
        },
        "basis": { "photon_cutoff": args.photon_cutoff, "cell_cutoff": args.cell_cutoff, "seed": args.seed },
    });
    emit(&args.output, &serde_json::to_string_pretty(&payload).unwrap())
}

fn run_check_hepp(args: HeppArgs) -> CliResult<()> {
    let (_, validated) = read_spec(&args.spec)?;
    let model = build_hamiltonian(&validated, Boundary::Periodic)?;
    let temps = parse_scan(&args.temps).map_err(CliError::Usage)?;
    let basis = TruncatedBasis::new(args.photon_cutoff, args.cell_cutoff);
    let assembled = assemble_matrix(&model, &basis)?;
    let (omega, _) = srpt_core::hamiltonian::photon_mode_internal(&model)?;

    let mut rows = Vec::with_capacity(temps.len());
    let mut all_ok = true;
    for t in &temps {
        let beta = model.units.beta(*t);
        let exact = partition_function_exact(&assembled, beta)?;
        let cnum = partition_function_cnumber(&model, beta, 1e-8, args.cell_cutoff)?;
        let report = hepp_bounds_check(exact.ln_z, cnum.ln_zbar, beta, &[omega]);
        all_ok &= report.lower_ok && report.upper_ok;
        rows.push(json!({
            "t_kelvin": t,
            "beta_internal": beta,
            "ln_z": exact.ln_z,
            "ln_zbar": cnum.ln_zbar,
            "tail_ratio": exact.tail_ratio,
            "radial_nodes": cnum.radial_nodes,
            "bounds": report,
        }));
    }
    let payload = json!({ "pass": all_ok, "points": rows });
    emit(&args.output, &serde_json::to_string_pretty(&payload).unwrap())
}

fn run_check_assumption(args: AssumptionArgs) -> CliResult<()> {
    let (_, validated) = read_spec(&args.spec)?;
    // For concrete LC circuits the coherent-state trace is computable; the
    // transmission-line families use the closed-form proxy.
    let ln_zbar_per_atom = if validated.has_concrete_cells() && !validated.topology.is_tline() {
        let model = build_hamiltonian(&validated, Boundary::Periodic)?;
        let beta = validated.units.beta(args.temp);
        partition_function_cnumber(&model, beta, 1e-8, 16)
            .ok()
            .map(|z| z.ln_zbar / validated.n_cells as f64)
    } else {
        None
    };
    let report = assumption_a_margin(&validated, args.temp, ln_zbar_per_atom)?;
    emit(&args.output, &serde_json::to_string_pretty(&report).unwrap())
}

fn run_check_unitary(args: UnitaryArgs) -> CliResult<()> {
    let (_, validated) = read_spec(&args.spec)?;
    let model = build_hamiltonian(&validated, Boundary::Periodic)?;
    if model.is_abstract() {
        return Err(CliError::Domain(srpt_core::Error::AbstractBlackBoxPresent));
    }
    let ladder: Vec<(usize, usize)> = args
        .ladder
        .split(',')
        .map(|rung| {
            let parts: Vec<&str> = rung.split('x').collect();
            if parts.len() != 2 {
                return Err(CliError::Usage(format!("bad ladder rung {rung}")));
            }
            let p = parts[0]
                .trim()
                .parse()
                .map_err(|e| CliError::Usage(format!("bad ladder rung {rung}: {e}")))?;
            let c = parts[1]
                .trim()
                .parse()
                .map_err(|e| CliError::Usage(format!("bad ladder rung {rung}: {e}")))?;
            Ok((p, c))
        })
        .collect::<CliResult<_>>()?;

    // Partner model: the coupling-relocation shift φ → φ + ψ₁ with its
    // symplectic charge counterpart.
    let photon = model
        .photon_pairs()
        .first()
        .copied()
        .ok_or(CliError::Domain(srpt_core::Error::NoPhotonSector))?;
    let matter = model
        .matter_pairs()
        .first()
        .copied()
        .ok_or(CliError::Domain(srpt_core::Error::NoPhotonSector))?;
    let shift = ShiftSpec::flux_mix(
        model.n_pairs(),
        photon,
        &[(matter, num_rational_one())],
    );
    let partner = apply_unitary_shift(&model, &shift)?;
    let report = verify_unitary_equivalence(&model, &partner, &ladder, args.levels, 1e-8)?;
    emit(&args.output, &serde_json::to_string_pretty(&report).unwrap())
}

fn num_rational_one() -> num_rational::Rational64 {
    num_rational::Rational64::new(1, 1)
}
