use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use singer_lattice::ball::{build_ball, verify_ball};
use singer_lattice::diffsets::{canonical_singer, is_difference_set, DifferenceMatrix, DifferenceVector};
use singer_lattice::exotic::{certify_exotic, classify, ratio_table, ratio_table_tsv, ClassifyOptions};
use singer_lattice::plane::{verify_plane_axioms, LabelledPlane};
use singer_lattice::{Error, Exec};

#[derive(Parser, Debug)]
#[command(name = "singer", version, about = "Singer difference sets, planes and local building data")]
struct Cli {
    /// Worker threads for the parallel scans (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Print the canonical Singer difference set for q.
    GenSinger { q: u64 },
    /// Check whether the given residues form a perfect difference set mod q²+q+1.
    VerifyDs {
        q: u64,
        #[arg(required = true)]
        elements: Vec<u64>,
    },
    /// Export the labelled plane of a difference vector (default: the canonical Singer set).
    BuildPlane {
        q: u64,
        /// Ordered vector entries; the order fixes the labels.
        elements: Vec<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the exoticity certificate on a difference matrix file.
    Certify {
        matrix: PathBuf,
        /// Treat the matrix as a 2-Moufang candidate: exit 1 if it is certified exotic.
        #[arg(long)]
        expect_candidate: bool,
    },
    /// Census of normalized difference matrices up to equivalence.
    Classify {
        q: u64,
        /// Also identify cyclic type shifts and the type-reversing duality.
        #[arg(long)]
        extra_moves: bool,
        /// Only pairs inside the pencil group; allows q up to 9.
        #[arg(long)]
        candidates_only: bool,
        /// Directory for census.json and summary.tsv.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Table of B(q), A(q) and B(q)/A(q).
    Bounds {
        #[arg(required = true)]
        qs: Vec<u64>,
    },
    /// Build and verify the ball of radius r about a type-0 vertex.
    Ball {
        matrix: PathBuf,
        #[arg(short, long, default_value_t = 1)]
        radius: u8,
        /// File for the complex export.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Failure with its exit status.
struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Failure {
        Failure {
            code: if e.is_cap() { 3 } else { 2 },
            message: e.to_string(),
        }
    }
}

fn input_error(message: String) -> Failure {
    Failure { code: 2, message }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| input_error(format!("{}: {e}", path.display())))
}

fn write(path: &Path, text: &str) -> Result<(), Failure> {
    fs::write(path, text).map_err(|e| input_error(format!("{}: {e}", path.display())))
}

fn read_matrix(path: &Path) -> Result<DifferenceMatrix, Failure> {
    DifferenceMatrix::from_text(&read(path)?).map_err(|e| input_error(format!("{}: {e}", path.display())))
}

fn run(cli: Cli) -> Result<u8, Failure> {
    let exec = if cli.threads == Some(1) { Exec::Sequential } else { Exec::Parallel };
    match cli.command {
        Command::GenSinger { q } => {
            println!("{}", canonical_singer(q)?);
        }
        Command::VerifyDs { q, elements } => {
            if is_difference_set(&elements, q)? {
                println!("difference set mod {}", q * q + q + 1);
            } else {
                return Err(input_error(format!("not a difference set mod {}", q * q + q + 1)));
            }
        }
        Command::BuildPlane { q, elements, out } => {
            let v = if elements.is_empty() {
                canonical_singer(q)?.sorted_vector()
            } else {
                DifferenceVector::new(q, elements)?
            };
            let plane = LabelledPlane::from_vector(&v);
            let text = plane.incidence().to_text();
            match out {
                Some(path) => {
                    write(&path, &text)?;
                    println!(
                        "plane of order {q}: {} points, axioms {}",
                        plane.modulus(),
                        if verify_plane_axioms(plane.incidence()) { "hold" } else { "fail" }
                    );
                }
                None => print!("{text}"),
            }
        }
        Command::Certify { matrix, expect_candidate } => {
            let m = read_matrix(&matrix)?;
            let verdict = certify_exotic(&m, exec)?;
            println!("{verdict}");
            if expect_candidate && verdict.is_exotic() {
                return Ok(1);
            }
        }
        Command::Classify { q, extra_moves, candidates_only, out } => {
            let census = classify(q, ClassifyOptions { extra_moves, candidates_only, exec })?;
            let summary = census.summary_tsv();
            if let Some(dir) = out {
                fs::create_dir_all(&dir).map_err(|e| input_error(format!("{}: {e}", dir.display())))?;
                write(&dir.join("census.json"), &census.to_file().to_text())?;
                write(&dir.join("summary.tsv"), &summary)?;
            }
            println!("{} matrices processed, {} classes", census.total, census.classes.len());
            print!("{summary}");
        }
        Command::Bounds { qs } => {
            print!("{}", ratio_table_tsv(&ratio_table(&qs)?));
        }
        Command::Ball { matrix, radius, out } => {
            let m = read_matrix(&matrix)?;
            let ball = build_ball(&m, radius)?;
            if let Some(path) = out {
                write(&path, &ball.to_text())?;
            }
            let report = verify_ball(&ball);
            println!(
                "{} vertices, {} edges, {} chambers; {} residues and {} inner panels checked: {}",
                report.vertices,
                report.edges,
                report.chambers,
                report.residues_checked,
                report.inner_panels_checked,
                if report.passed() { "ok" } else { "FAILED" }
            );
            if !report.passed() {
                return Err(Failure {
                    code: 2,
                    message: format!("verification failed: {report:?}"),
                });
            }
        }
    }
    Ok(0)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    #[cfg(feature = "parallel")]
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
