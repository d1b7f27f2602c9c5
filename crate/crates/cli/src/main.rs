//! Command-line front end: loads form systems, dispatches the library
//! operations, and emits deterministic JSON reports.
//!
//! Exit codes: 0 on success, 1 for domain errors (violated preconditions,
//! exhausted budgets), 2 for I/O and parse errors. Reports go to stdout (or
//! `--output`); timing goes to stderr so reports stay byte-stable for fixed
//! inputs and any `--workers` value.

use std::io::Write;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use num_bigint::BigInt;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use formwork::budget::Budget;
use formwork::counting;
use formwork::density::{self, ExpSumMode};
use formwork::error::Error;
use formwork::forms::{expand_multilinear, CoefficientRepr, FormSystem, FormSystemDoc};
use formwork::hensel::{self, PointDoc, SeedPoint};
use formwork::linalg::IntMatrix;

#[derive(Parser)]
#[command(
    name = "formwork",
    version,
    about = "Multilinear expansion, Hensel lifting, congruence counting and p-adic local densities for systems of integer forms",
    propagate_version = true
)]
struct Cli {
    /// Maximum number of states any exhaustive enumeration may visit.
    #[arg(long, global = true, default_value_t = 100_000_000)]
    budget: u64,

    /// Worker threads for partitioned enumeration. Reports are byte-identical
    /// for any value.
    #[arg(long, global = true, default_value_t = 1)]
    workers: usize,

    /// Output format; only "json" is supported.
    #[arg(long, global = true, default_value = "json", value_parser = ["json"])]
    format: String,

    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    output: Option<std::path::PathBuf>,

    /// Seed for randomized search (random subspace slices).
    #[arg(long, global = true, default_value_t = 0)]
    rng_seed: u64,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct SystemArg {
    /// Path to a form-system JSON document.
    input: std::path::PathBuf,

    /// Dimension of the linear spaces under consideration.
    #[arg(long, default_value_t = 1)]
    m: u32,
}

#[derive(Subcommand)]
enum Command {
    /// Expand a system into the polynomials attached to its multi-indices.
    Expand(SystemArg),

    /// Evaluate the expanded system at an integer point.
    Eval {
        #[command(flatten)]
        system: SystemArg,
        /// Comma-separated integer coordinates, length m*s.
        #[arg(long, allow_hyphen_values = true)]
        point: String,
    },

    /// Evaluate the Jacobian matrix of the expanded system at a point.
    Jacobian {
        #[command(flatten)]
        system: SystemArg,
        #[arg(long, allow_hyphen_values = true)]
        point: String,
    },

    /// Search residue rings for certified approximate zeros.
    Seeds {
        #[command(flatten)]
        system: SystemArg,
        #[arg(long)]
        p: u64,
        /// Largest certificate parameter sigma to try.
        #[arg(long, default_value_t = 1)]
        sigma_max: u32,
    },

    /// Lift a seed to a target p-adic precision.
    Lift {
        #[command(flatten)]
        system: SystemArg,
        /// A seed document, or a seed-search report to pick from.
        #[arg(long)]
        seed: std::path::PathBuf,
        /// Which seed to take from a seed-search report.
        #[arg(long, default_value_t = 0)]
        seed_index: usize,
        /// Target precision N: the result solves the congruences mod p^N.
        #[arg(long)]
        precision: u32,
    },

    /// Restrict a system to an integral subspace.
    Restrict {
        /// Path to a form-system JSON document.
        input: std::path::PathBuf,
        /// Basis document {"columns": [[..], ..]}; mutually exclusive with --slice-dim.
        #[arg(long, conflicts_with = "slice_dim")]
        basis: Option<std::path::PathBuf>,
        /// Draw a random integral slice of this dimension (uses --rng-seed).
        #[arg(long)]
        slice_dim: Option<usize>,
    },

    /// Count solutions of the expanded congruences modulo p^l.
    Gamma {
        #[command(flatten)]
        system: SystemArg,
        #[arg(long)]
        p: u64,
        #[arg(long)]
        l: u32,
    },

    /// Count certified-seed classes at level 2*sigma-1+nu.
    CountM {
        #[command(flatten)]
        system: SystemArg,
        #[arg(long)]
        p: u64,
        #[arg(long, default_value_t = 1)]
        sigma: u32,
        #[arg(long, default_value_t = 0)]
        nu: u32,
        /// Comma-separated zero-based column indices of the certified minor.
        #[arg(long)]
        minor_columns: String,
    },

    /// Check the lifting growth bound level by level.
    VerifyLemma31 {
        #[command(flatten)]
        system: SystemArg,
        #[arg(long)]
        p: u64,
        #[arg(long, default_value_t = 1)]
        sigma: u32,
        #[arg(long, default_value_t = 2)]
        nu_max: u32,
        #[arg(long)]
        minor_columns: String,
    },

    /// Count integer solution vectors in a box (diagnostic brute force).
    Points {
        #[command(flatten)]
        system: SystemArg,
        /// Box radius: coordinates range over [-P, P].
        #[arg(long = "P")]
        radius: u64,
    },

    /// Local-density trace c_0 .. c_i.
    Density {
        #[command(flatten)]
        system: SystemArg,
        #[arg(long)]
        p: u64,
        #[arg(long, default_value_t = 2)]
        i_max: u32,
    },

    /// Partial sums of the exponential-sum expression for the density.
    Expsum {
        #[command(flatten)]
        system: SystemArg,
        #[arg(long)]
        p: u64,
        /// Number of levels L in the partial sum.
        #[arg(long = "L", default_value_t = 1)]
        levels: u32,
        #[arg(long, value_parser = ["float", "exact"], default_value = "exact")]
        mode: String,
    },

    /// The explicit lifting constant kappa_p.
    Kappa {
        #[arg(long)]
        p: u64,
        #[arg(long, default_value_t = 1)]
        sigma: u32,
        /// Number of block variables m*s.
        #[arg(long)]
        ms: usize,
        /// Number of expanded forms R*r.
        #[arg(long)]
        rr: usize,
    },

    /// The explicit numeric bounds attached to (d, R, m).
    Bounds {
        #[arg(long)]
        d: u32,
        #[arg(long = "R")]
        forms: u32,
        #[arg(long, default_value_t = 1)]
        m: u32,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let started = Instant::now();
    match run(&cli) {
        Ok(report) => {
            eprintln!("# done in {:.3?}", started.elapsed());
            if let Err(e) = write_report(&cli, &report) {
                eprintln!("error: {e}");
                return ExitCode::from(2);
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                CliError::Io(_) | CliError::Domain(Error::Parse(_)) => ExitCode::from(2),
                CliError::Domain(_) => ExitCode::from(1),
            }
        }
    }
}

enum CliError {
    Io(std::io::Error),
    Domain(Error),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Io(e) => write!(f, "{e}"),
            CliError::Domain(e) => write!(f, "{e}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Domain(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}

fn write_report(cli: &Cli, report: &str) -> std::io::Result<()> {
    match &cli.output {
        Some(path) => std::fs::write(path, report),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(report.as_bytes())
        }
    }
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("reports serialize");
    s.push('\n');
    s
}

fn load_system(path: &std::path::Path) -> Result<FormSystem, CliError> {
    let text = std::fs::read_to_string(path)?;
    Ok(formwork::parse_form_system(&text)?)
}

fn parse_point(text: &str) -> Result<Vec<BigInt>, CliError> {
    text.split(',')
        .map(|part| {
            part.trim()
                .parse::<BigInt>()
                .map_err(|_| Error::Parse(format!("invalid point coordinate {part:?}")).into())
        })
        .collect()
}

fn parse_columns(text: &str) -> Result<Vec<usize>, CliError> {
    text.split(',')
        .map(|part| {
            part.trim()
                .parse::<usize>()
                .map_err(|_| Error::Parse(format!("invalid column index {part:?}")).into())
        })
        .collect()
}

fn load_seed(path: &std::path::Path, index: usize) -> Result<SeedPoint, CliError> {
    let text = std::fs::read_to_string(path)?;
    if let Ok(doc) = serde_json::from_str::<PointDoc>(&text) {
        return Ok(doc.into_seed()?);
    }
    let report: SeedsDoc = serde_json::from_str(&text)
        .map_err(|e| Error::Parse(format!("not a seed or seed-report document: {e}")))?;
    let doc = report
        .seeds
        .into_iter()
        .nth(index)
        .ok_or_else(|| Error::Precondition(format!("seed index {index} out of range")))?;
    Ok(doc.into_seed()?)
}

#[derive(Serialize, serde::Deserialize)]
struct SeedsDoc {
    p: u64,
    sigma_max: u32,
    m: u32,
    found: usize,
    seeds: Vec<PointDoc>,
}

#[derive(Serialize)]
struct IndexDoc {
    entries: Vec<u32>,
    factor: String,
}

#[derive(Serialize)]
struct ExpandDoc {
    m: u32,
    block_variables: usize,
    degree: u32,
    forms: usize,
    r: usize,
    index_set: Vec<IndexDoc>,
    /// The expanded polynomials as a plain form system: R*r forms of the same
    /// degree in m*s variables, rows form-major.
    system: FormSystemDoc,
}

#[derive(Serialize)]
struct RowLabel {
    rho: usize,
    j: Vec<u32>,
}

#[derive(Serialize)]
struct EvalDoc {
    m: u32,
    point: Vec<String>,
    labels: Vec<RowLabel>,
    values: Vec<String>,
}

#[derive(Serialize)]
struct ColLabel {
    block: usize,
    coordinate: usize,
}

#[derive(Serialize)]
struct JacobianDoc {
    m: u32,
    point: Vec<String>,
    rows: usize,
    cols: usize,
    row_labels: Vec<RowLabel>,
    col_labels: Vec<ColLabel>,
    entries: Vec<Vec<String>>,
}

#[derive(Serialize)]
struct KappaDoc {
    p: u64,
    sigma: u32,
    ms: usize,
    rr: usize,
    kappa: density::RationalDoc,
}

fn row_labels(sys: &formwork::MultilinearSystem) -> Vec<RowLabel> {
    (0..sys.row_count())
        .map(|row| {
            let (rho, j) = sys.row_label(row);
            RowLabel {
                rho: rho + 1,
                j: j.entries().to_vec(),
            }
        })
        .collect()
}

fn expanded_as_form_system(sys: &formwork::MultilinearSystem) -> Result<FormSystem, Error> {
    let forms = sys
        .components()
        .iter()
        .map(|poly| {
            poly.terms()
                .iter()
                .map(|(e, c)| formwork::Monomial {
                    exponents: e.clone(),
                    coefficient: c.clone(),
                })
                .collect()
        })
        .collect();
    FormSystem::new(sys.degree(), sys.variable_count(), forms)
}

fn run(cli: &Cli) -> Result<String, CliError> {
    let budget = Budget::with_max_states(cli.budget);
    let workers = cli.workers.max(1);
    match &cli.command {
        Command::Expand(args) => {
            let fs = load_system(&args.input)?;
            let sys = expand_multilinear(&fs, args.m, &budget)?;
            let doc = ExpandDoc {
                m: args.m,
                block_variables: fs.variables(),
                degree: fs.degree(),
                forms: fs.form_count(),
                r: sys.index_count(),
                index_set: sys
                    .index_set()
                    .iter()
                    .map(|j| IndexDoc {
                        entries: j.entries().to_vec(),
                        factor: j.factor().to_string(),
                    })
                    .collect(),
                system: expanded_as_form_system(&sys)?.to_document(),
            };
            Ok(to_json(&doc))
        }
        Command::Eval { system, point } => {
            let fs = load_system(&system.input)?;
            let sys = expand_multilinear(&fs, system.m, &budget)?;
            let point = parse_point(point)?;
            let values = sys.evaluate(&point)?;
            Ok(to_json(&EvalDoc {
                m: system.m,
                point: point.iter().map(BigInt::to_string).collect(),
                labels: row_labels(&sys),
                values: values.iter().map(BigInt::to_string).collect(),
            }))
        }
        Command::Jacobian { system, point } => {
            let fs = load_system(&system.input)?;
            let sys = expand_multilinear(&fs, system.m, &budget)?;
            let point = parse_point(point)?;
            let jac = sys.jacobian_at(&point)?;
            let s = sys.block_size();
            Ok(to_json(&JacobianDoc {
                m: system.m,
                point: point.iter().map(BigInt::to_string).collect(),
                rows: sys.row_count(),
                cols: sys.variable_count(),
                row_labels: row_labels(&sys),
                col_labels: (0..sys.variable_count())
                    .map(|c| ColLabel {
                        block: c / s + 1,
                        coordinate: c % s + 1,
                    })
                    .collect(),
                entries: (0..sys.row_count())
                    .map(|r| {
                        (0..sys.variable_count())
                            .map(|c| jac.entry(r, c).to_string())
                            .collect()
                    })
                    .collect(),
            }))
        }
        Command::Seeds {
            system,
            p,
            sigma_max,
        } => {
            let fs = load_system(&system.input)?;
            let sys = expand_multilinear(&fs, system.m, &budget)?;
            let seeds = hensel::find_seeds(&sys, *p, *sigma_max, &budget, workers)?;
            Ok(to_json(&SeedsDoc {
                p: *p,
                sigma_max: *sigma_max,
                m: system.m,
                found: seeds.len(),
                seeds: seeds.iter().map(SeedPoint::to_document).collect(),
            }))
        }
        Command::Lift {
            system,
            seed,
            seed_index,
            precision,
        } => {
            let fs = load_system(&system.input)?;
            let sys = expand_multilinear(&fs, system.m, &budget)?;
            let seed = load_seed(seed, *seed_index)?;
            let point = hensel::lift_to_precision(&sys, &seed, *precision, &budget)?;
            Ok(to_json(&point.to_document()))
        }
        Command::Restrict {
            input,
            basis,
            slice_dim,
        } => {
            let fs = load_system(input)?;
            let basis = match (basis, slice_dim) {
                (Some(path), None) => load_basis(path, fs.variables())?,
                (None, Some(dim)) => random_slice(cli.rng_seed, fs.variables(), *dim)?,
                _ => {
                    return Err(Error::Precondition(
                        "restrict needs exactly one of --basis or --slice-dim".into(),
                    )
                    .into());
                }
            };
            let restricted = hensel::restrict_to_subspace(&fs, &basis, &budget)?;
            Ok(to_json(&restricted.to_document()))
        }
        Command::Gamma { system, p, l } => {
            let fs = load_system(&system.input)?;
            let report = counting::gamma_m(&fs, system.m, *p, *l, &budget, workers)?;
            eprintln!("# enumeration took {:.3?}", report.wall_time);
            Ok(to_json(&report.to_document()))
        }
        Command::CountM {
            system,
            p,
            sigma,
            nu,
            minor_columns,
        } => {
            let fs = load_system(&system.input)?;
            let sys = expand_multilinear(&fs, system.m, &budget)?;
            let columns = parse_columns(minor_columns)?;
            let report = counting::count_m(&sys, *p, *sigma, *nu, &columns, &budget, workers)?;
            eprintln!("# enumeration took {:.3?}", report.wall_time);
            Ok(to_json(&report.to_document()))
        }
        Command::VerifyLemma31 {
            system,
            p,
            sigma,
            nu_max,
            minor_columns,
        } => {
            let fs = load_system(&system.input)?;
            let sys = expand_multilinear(&fs, system.m, &budget)?;
            let columns = parse_columns(minor_columns)?;
            let report = counting::verify_lifting_bound(
                &sys, *p, *sigma, *nu_max, &columns, &budget, workers,
            )?;
            Ok(to_json(&report))
        }
        Command::Points { system, radius } => {
            let fs = load_system(&system.input)?;
            let report = counting::count_rational_points(&fs, system.m, *radius, &budget, workers)?;
            eprintln!("# enumeration took {:.3?}", report.wall_time);
            Ok(to_json(&report.to_document()))
        }
        Command::Density { system, p, i_max } => {
            let fs = load_system(&system.input)?;
            let trace = density::chi_trace(&fs, system.m, *p, *i_max, &budget, workers)?;
            Ok(to_json(&trace.to_document()))
        }
        Command::Expsum {
            system,
            p,
            levels,
            mode,
        } => {
            let fs = load_system(&system.input)?;
            let mode = match mode.as_str() {
                "float" => ExpSumMode::Float,
                _ => ExpSumMode::ExactTelescoping,
            };
            let partial =
                density::chi_expsum_partial(&fs, system.m, *p, *levels, mode, &budget, workers)?;
            Ok(to_json(&partial.to_document()))
        }
        Command::Kappa { p, sigma, ms, rr } => {
            let kappa = density::kappa_bound(*p, *sigma, *ms, *rr)?;
            Ok(to_json(&KappaDoc {
                p: *p,
                sigma: *sigma,
                ms: *ms,
                rr: *rr,
                kappa: density::RationalDoc::from_rational(&kappa),
            }))
        }
        Command::Bounds { d, forms, m } => {
            let sheet = density::bounds_sheet(*d, *forms, *m)?;
            Ok(to_json(&sheet.to_document()))
        }
    }
}

#[derive(serde::Deserialize)]
struct BasisDoc {
    columns: Vec<Vec<CoefficientRepr>>,
}

fn load_basis(path: &std::path::Path, s: usize) -> Result<IntMatrix, CliError> {
    let text = std::fs::read_to_string(path)?;
    let doc: BasisDoc = serde_json::from_str(&text).map_err(|e| Error::Parse(e.to_string()))?;
    if doc.columns.is_empty() {
        return Err(Error::Parse("basis document has no columns".into()).into());
    }
    let mut rows = vec![Vec::with_capacity(doc.columns.len()); s];
    for column in &doc.columns {
        if column.len() != s {
            return Err(Error::Parse(format!(
                "basis column has length {}, the system has {s} variables",
                column.len()
            ))
            .into());
        }
        for (n, entry) in column.iter().enumerate() {
            rows[n].push(entry.to_bigint()?);
        }
    }
    Ok(IntMatrix::from_rows(rows)?)
}

/// Deterministic random integral slice: `dim` columns with entries in [-9, 9].
fn random_slice(seed: u64, s: usize, dim: usize) -> Result<IntMatrix, CliError> {
    if dim < 1 || dim > s {
        return Err(
            Error::Precondition(format!("slice dimension {dim} out of range 1..={s}")).into(),
        );
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rows = (0..s)
        .map(|_| {
            (0..dim)
                .map(|_| BigInt::from(rng.random_range(-9i64..=9)))
                .collect()
        })
        .collect();
    Ok(IntMatrix::from_rows(rows)?)
}
