use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use steklov_trees::bounds::{reports_to_json, write_csv_rows, BoundAudit, CSV_HEADER};
use steklov_trees::harness::{sweep, verify, VerifyConfig, DECAY_THRESHOLD, SWEEP_CSV_HEADER};
use steklov_trees::spectra::steklov_spectrum_with;
use steklov_trees::{io as tree_io, BoundaryTree, Error, FamilySpec, Tolerances};

/// Steklov spectra of trees and certified eigenvalue bounds.
#[derive(Parser)]
#[command(name = "steklov", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sorted Steklov eigenvalues of a tree.
    Spectrum {
        #[command(flatten)]
        tree: TreeSource,
        /// Also print eigenvector boundary values.
        #[arg(long)]
        vectors: bool,
        #[command(flatten)]
        out: Output,
    },
    /// Every eigenvalue bound for a tree, with witnesses.
    Bounds {
        #[command(flatten)]
        tree: TreeSource,
        /// Eigenvalue indices for the k-th eigenvalue bounds (default: 3 and min(5, boundary size)).
        #[arg(long, value_delimiter = ',')]
        k: Option<Vec<usize>>,
        #[command(flatten)]
        out: Output,
    },
    /// Build a family member and write it as an edge list or JSON.
    Generate {
        #[arg(long)]
        family: String,
        #[command(flatten)]
        out: Output,
    },
    /// Seeded verification over random trees.
    Verify {
        #[arg(long, default_value_t = 1000)]
        trials: usize,
        #[arg(long, default_value_t = 60)]
        max_n: usize,
        #[arg(long, default_value_t = 6)]
        max_degree: usize,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        #[arg(long, value_delimiter = ',')]
        k: Option<Vec<usize>>,
        #[command(flatten)]
        out: Output,
    },
    /// Decay table over the members of a family up to the given one.
    Sweep {
        #[arg(long)]
        family: String,
        #[arg(long, default_value_t = DECAY_THRESHOLD)]
        threshold: f64,
        #[command(flatten)]
        out: Output,
    },
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct TreeSource {
    /// Edge-list or JSON tree file.
    #[arg(long)]
    input: Option<PathBuf>,
    /// Family spec, e.g. '{"family":"BALL","D":3,"r":2}'.
    #[arg(long)]
    family: Option<String>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
    /// Edge list (generate only).
    Edges,
}

#[derive(Args)]
struct Output {
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Write here instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Slack when comparing eigenvalues with bounds.
    #[arg(long, env = "STEKLOV_TOL")]
    tol: Option<f64>,
}

/// Failure with its exit code: 1 for check or numerical failures, 2 for usage and input errors.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Failure {
            code: 2,
            message: message.into(),
        }
    }

    fn check(message: impl Into<String>) -> Self {
        Failure {
            code: 1,
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::NotATree(_)
            | Error::TooSmall(_)
            | Error::Malformed(_)
            | Error::BadVertex(_)
            | Error::Parse(_)
            | Error::BadParams(_)
            | Error::InfeasibleDegreeCap(_)
            | Error::InfeasibleK { .. } => 2,
            _ => 1,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

type CliResult<T> = Result<T, Failure>;

impl Output {
    fn tolerances(&self) -> CliResult<Tolerances> {
        let mut tol = Tolerances::default();
        if let Some(t) = self.tol {
            if !(t > 0.0 && t.is_finite()) {
                return Err(Failure::usage(format!(
                    "tolerance must be positive, got {t}"
                )));
            }
            tol.bound = t;
        }
        Ok(tol)
    }

    fn format(&self, allowed: &[Format], default: Format) -> CliResult<Format> {
        let f = self.format.unwrap_or(default);
        if allowed.contains(&f) {
            Ok(f)
        } else {
            Err(Failure::usage("unsupported --format for this command"))
        }
    }

    fn write(&self, body: &[u8]) -> CliResult<()> {
        let res = match &self.out {
            Some(p) => fs::write(p, body),
            None => io::stdout().lock().write_all(body),
        };
        res.map_err(|e| Failure::check(format!("cannot write output: {e}")))
    }
}

fn parse_family(text: &str) -> CliResult<FamilySpec> {
    serde_json::from_str(text).map_err(|e| Failure::usage(format!("bad family spec: {e}")))
}

fn load_tree(src: &TreeSource) -> CliResult<(String, BoundaryTree)> {
    if let Some(path) = &src.input {
        let text = fs::read_to_string(path)
            .map_err(|e| Failure::usage(format!("cannot read {}: {e}", path.display())))?;
        let tree = tree_io::parse_tree(&text)?;
        Ok((file_id(path), tree))
    } else {
        let spec = parse_family(src.family.as_deref().unwrap_or_default())?;
        Ok((spec.label(), spec.build()?))
    }
}

fn file_id(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().replace(',', "_"))
        .unwrap_or_else(|| "input".into())
}

fn json_bytes(v: &impl serde::Serialize) -> Vec<u8> {
    let mut s = serde_json::to_vec_pretty(v).expect("serializable");
    s.push(b'\n');
    s
}

fn spectrum(tree: &TreeSource, vectors: bool, out: &Output) -> CliResult<()> {
    let tol = out.tolerances()?;
    let format = out.format(&[Format::Json, Format::Csv], Format::Json)?;
    let (_, t) = load_tree(tree)?;
    let s = steklov_spectrum_with(&t, &tol)?;
    s.diagnostics().check(&tol)?;
    let body = match format {
        Format::Json => json_bytes(&s.to_json(vectors)),
        _ => {
            let mut b = String::from("index,eigenvalue");
            if vectors {
                for v in t.boundary() {
                    b.push_str(&format!(",v{v}"));
                }
            }
            b.push('\n');
            for (i, lam) in s.eigenvalues.iter().enumerate() {
                b.push_str(&format!("{},{lam:.15e}", i + 1));
                if vectors {
                    for x in s.eigenfunctions[i].restrict_to_boundary().values() {
                        b.push_str(&format!(",{x:.15e}"));
                    }
                }
                b.push('\n');
            }
            b.into_bytes()
        }
    };
    out.write(&body)
}

fn bounds(tree: &TreeSource, k: Option<&[usize]>, out: &Output) -> CliResult<()> {
    let tol = out.tolerances()?;
    let format = out.format(&[Format::Json, Format::Csv], Format::Json)?;
    let (id, t) = load_tree(tree)?;
    let audit = BoundAudit::new(&t, tol)?;
    let ks = k
        .map(<[usize]>::to_vec)
        .unwrap_or_else(|| steklov_trees::bounds::default_ks(&t));
    let reports = audit.all(&ks)?;
    let body = match format {
        Format::Json => json_bytes(&reports_to_json(&id, &reports)),
        _ => {
            let mut b = Vec::new();
            writeln!(b, "{CSV_HEADER}").expect("in-memory write");
            write_csv_rows(&mut b, &id, &reports).expect("in-memory write");
            b
        }
    };
    out.write(&body)?;
    let violated: Vec<String> = reports
        .iter()
        .filter(|r| r.violated())
        .map(|r| r.bound_id.to_string())
        .collect();
    if violated.is_empty() {
        Ok(())
    } else {
        Err(Failure::check(format!(
            "bounds violated: {}",
            violated.join(", ")
        )))
    }
}

fn generate(family: &str, out: &Output) -> CliResult<()> {
    let format = out.format(&[Format::Edges, Format::Json], Format::Edges)?;
    let spec = parse_family(family)?;
    let t = spec.build()?;
    eprintln!(
        "{}: |V|={} |boundary|={} D={} L={}",
        spec.label(),
        t.vertex_count(),
        t.boundary_count(),
        t.max_degree(),
        t.diameter().0
    );
    let body = match format {
        Format::Json => json_bytes(&tree_io::to_json(&t)),
        _ => tree_io::to_edge_list(&t).into_bytes(),
    };
    out.write(&body)
}

fn run_verify(cfg: VerifyConfig, out: &Output) -> CliResult<()> {
    let format = out.format(&[Format::Json, Format::Csv], Format::Json)?;
    let summary = verify(&cfg)?;
    let body = match format {
        Format::Json => json_bytes(&summary),
        _ => {
            let mut b = Vec::new();
            summary.write_csv(&mut b).expect("in-memory write");
            b
        }
    };
    out.write(&body)?;
    eprintln!(
        "{} trees, {} failures: {}",
        summary.trees,
        summary.failures_total,
        if summary.passed { "PASS" } else { "FAIL" }
    );
    if summary.passed {
        Ok(())
    } else {
        Err(Failure::check("verification failed"))
    }
}

fn run_sweep(family: &str, threshold: f64, out: &Output) -> CliResult<()> {
    let tol = out.tolerances()?;
    let format = out.format(&[Format::Json, Format::Csv], Format::Csv)?;
    let spec = parse_family(family)?;
    let rep = sweep(&spec, threshold, &tol)?;
    let body = match format {
        Format::Json => json_bytes(&rep),
        _ => {
            let mut b = Vec::new();
            writeln!(b, "{SWEEP_CSV_HEADER}").expect("in-memory write");
            for r in &rep.rows {
                r.write_csv(&mut b).expect("in-memory write");
            }
            b
        }
    };
    out.write(&body)?;
    let d = &rep.decay;
    eprintln!(
        "decay: within 2/L {}, monotone {}, last lambda_2 {:.6e} <= {} {}",
        d.within_diameter_bound,
        d.monotone,
        d.members.last().map_or(f64::NAN, |m| m.lambda2),
        d.threshold,
        d.below_threshold
    );
    if rep.rows.iter().all(|r| r.all_hold) && d.within_diameter_bound && d.monotone {
        Ok(())
    } else {
        Err(Failure::check(
            "sweep found a violated bound or non-monotone decay",
        ))
    }
}

fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Spectrum { tree, vectors, out } => spectrum(&tree, vectors, &out),
        Command::Bounds { tree, k, out } => bounds(&tree, k.as_deref(), &out),
        Command::Generate { family, out } => generate(&family, &out),
        Command::Verify {
            trials,
            max_n,
            max_degree,
            seed,
            k,
            out,
        } => {
            let cfg = VerifyConfig {
                trials,
                max_n,
                max_degree,
                seed,
                ks: k,
                tol: out.tolerances()?,
            };
            run_verify(cfg, &out)
        }
        Command::Sweep {
            family,
            threshold,
            out,
        } => run_sweep(&family, threshold, &out),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("steklov: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
