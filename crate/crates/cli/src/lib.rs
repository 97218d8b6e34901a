//! Command implementations behind the `realstab` binary.
//!
//! Each command writes to the given sink and returns an [`Outcome`]; the
//! binary maps failures to exit codes 1 (verification failed), 2 (bad input)
//! and 3 (internal invariant breach).

use std::fs;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use num_bigint::BigUint;
use serde::Serialize;
use serde_json::Value;

use realstab::counting::{count_report, enumerate_normal_forms, verify_bijection};
use realstab::exact::{circuit_matrix_capped, DEFAULT_MATRIX_CAP};
use realstab::normal_form::{action_table, normalize};
use realstab::rewrite::{
    derive_typed_rules, format_rules, normalize_by_rewriting, verify_rules, RelationSet,
    RewriteError, RuleDb, DEFAULT_DIRTY_BOUND,
};
use realstab::{fingerprint, Circuit, NormalForm};

#[derive(Debug, Parser)]
#[command(
    name = "realstab",
    version,
    about = "Real stabilizer circuits: normal forms, rewriting and counting"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Method {
    Synth,
    Rewrite,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum SetArg {
    Typed,
    Reduced,
    Alt,
}

impl From<SetArg> for RelationSet {
    fn from(s: SetArg) -> RelationSet {
        match s {
            SetArg::Typed => RelationSet::Typed,
            SetArg::Reduced => RelationSet::Reduced,
            SetArg::Alt => RelationSet::Alternative,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum EqualMode {
    /// Compare tableaux and the image of the first basis vector.
    Fingerprint,
    /// Compare dense exact matrices.
    Matrix,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print the normal form of a circuit as JSON.
    Normalize {
        #[arg(long = "in", default_value = "-")]
        input: PathBuf,
        #[arg(long = "out")]
        output: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Method::Synth)]
        method: Method,
        /// Log each rule application and measure to stderr (rewrite only).
        #[arg(long)]
        trace: bool,
    },
    /// Exit 0 if two circuits denote the same operator, 1 otherwise.
    Equal {
        a: PathBuf,
        b: PathBuf,
        #[arg(long, value_enum, default_value_t = EqualMode::Fingerprint)]
        mode: EqualMode,
        #[arg(long, default_value_t = DEFAULT_MATRIX_CAP)]
        matrix_cap: usize,
    },
    /// Print the exact matrix of a circuit, one tab-separated row per line.
    Matrix {
        #[arg(long = "in", default_value = "-")]
        input: PathBuf,
        #[arg(long, default_value_t = DEFAULT_MATRIX_CAP)]
        matrix_cap: usize,
    },
    /// Print the conjugation action of every generator.
    Actions,
    /// Check a relation set with exact matrices.
    VerifyRelations {
        #[arg(long, value_enum, default_value_t = SetArg::Typed)]
        set: SetArg,
    },
    /// Derive the typed rule database and print it as a rule file.
    DeriveRules {
        #[arg(long = "out")]
        output: Option<PathBuf>,
        /// Longest dirty word searched for a right-hand side.
        #[arg(long, default_value_t = DEFAULT_DIRTY_BOUND)]
        bound: usize,
    },
    /// Print closed-form counts as JSON.
    Count {
        #[arg(short = 'n')]
        n: usize,
        /// Also enumerate every normal form and check fingerprints are distinct (n <= 3).
        #[arg(long)]
        check_distinct: bool,
    },
    /// Print every normal form on n wires, one JSON object per line.
    Enumerate {
        #[arg(short = 'n')]
        n: usize,
        #[arg(long = "out")]
        output: Option<PathBuf>,
    },
}

/// A failed command with its exit code.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    fn verification(message: impl Into<String>) -> Self {
        Failure {
            code: 1,
            message: message.into(),
        }
    }

    fn input(message: impl Into<String>) -> Self {
        Failure {
            code: 2,
            message: message.into(),
        }
    }

    fn internal(message: impl Into<String>) -> Self {
        Failure {
            code: 3,
            message: message.into(),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::input(e.to_string())
    }
}

pub type Outcome = Result<(), Failure>;

fn read_text(path: &Path) -> Result<String, Failure> {
    if path.as_os_str() == "-" {
        let mut s = String::new();
        io::stdin().read_to_string(&mut s)?;
        Ok(s)
    } else {
        fs::read_to_string(path).map_err(|e| Failure::input(format!("{}: {e}", path.display())))
    }
}

pub fn read_circuit(path: &Path) -> Result<Circuit, Failure> {
    read_text(path)?
        .parse()
        .map_err(|e| Failure::input(format!("{}: {e}", path.display())))
}

fn with_output(
    path: Option<&Path>,
    out: &mut dyn Write,
    f: impl FnOnce(&mut dyn Write) -> Outcome,
) -> Outcome {
    match path {
        Some(p) => {
            let mut file = io::BufWriter::new(fs::File::create(p)?);
            f(&mut file)?;
            file.flush()?;
            Ok(())
        }
        None => f(out),
    }
}

/// Normal form JSON: keys sorted, stages widest first.
pub fn normal_form_json(nf: &NormalForm) -> String {
    serde_json::to_string(nf).expect("normal forms serialize")
}

fn big(v: &BigUint) -> Value {
    serde_json::from_str(&v.to_string()).expect("integers are JSON numbers")
}

#[derive(Serialize)]
struct CountJson {
    clifford_order: Value,
    #[serde(skip_serializing_if = "Option::is_none")]
    distinct: Option<bool>,
    n: usize,
    x_count: Value,
    z_count: Value,
    z_count_a12: Value,
    z_count_a3: Value,
}

pub fn cmd_normalize(
    input: &Path,
    output: Option<&Path>,
    method: Method,
    trace: bool,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> Outcome {
    let c = read_circuit(input)?;
    let nf = match method {
        Method::Synth => normalize(&c).map_err(|e| Failure::internal(e.to_string()))?,
        Method::Rewrite => {
            let outcome = normalize_by_rewriting(&c, RuleDb::typed()).map_err(|e| match e {
                RewriteError::NoRuleApplies(_)
                | RewriteError::Invariant { .. }
                | RewriteError::NotNormal(_) => {
                    Failure::internal(format!("{e}\nreproducer:\n{}", c.to_text()))
                }
                e => Failure::internal(e.to_string()),
            })?;
            if trace {
                let rules = RuleDb::typed().rules();
                for (i, step) in outcome.trace.iter().enumerate() {
                    writeln!(
                        err,
                        "{i}\t{}\t{}\t{:?}",
                        step.position, rules[step.rule], step.measure.0
                    )?;
                }
            }
            outcome.normal_form
        }
    };
    with_output(output, out, |w| {
        writeln!(w, "{}", normal_form_json(&nf))?;
        Ok(())
    })
}

pub fn cmd_equal(a: &Path, b: &Path, mode: EqualMode, cap: usize, out: &mut dyn Write) -> Outcome {
    let (ca, cb) = (read_circuit(a)?, read_circuit(b)?);
    if ca.n_qubits() != cb.n_qubits() {
        return Err(Failure::input(format!(
            "qubit counts differ: {} vs {}",
            ca.n_qubits(),
            cb.n_qubits()
        )));
    }
    let same = match mode {
        EqualMode::Matrix => {
            let m = |c: &Circuit| {
                circuit_matrix_capped(c, cap).map_err(|e| Failure::input(e.to_string()))
            };
            m(&ca)? == m(&cb)?
        }
        EqualMode::Fingerprint => {
            let f = |c: &Circuit| fingerprint(c).map_err(|e| Failure::input(e.to_string()));
            f(&ca)? == f(&cb)?
        }
    };
    if same {
        writeln!(out, "equal")?;
        Ok(())
    } else {
        writeln!(out, "different")?;
        Err(Failure::verification("circuits differ"))
    }
}

pub fn cmd_matrix(input: &Path, cap: usize, out: &mut dyn Write) -> Outcome {
    let c = read_circuit(input)?;
    let m = circuit_matrix_capped(&c, cap)
        .map_err(|e| Failure::input(format!("{e}; raise --matrix-cap to allow it")))?;
    write!(out, "{}", m.to_text())?;
    Ok(())
}

pub fn cmd_actions(out: &mut dyn Write) -> Outcome {
    for (g, source, image) in action_table() {
        writeln!(out, "{}\t{source}\t->\t{image}", g.name())?;
    }
    Ok(())
}

pub fn cmd_verify_relations(set: RelationSet, out: &mut dyn Write) -> Outcome {
    let rules = set.rules();
    let report = verify_rules(&rules);
    for (rule, lhs, rhs) in &report.failures {
        writeln!(
            out,
            "FAILED {rule}\nleft:\n{}right:\n{}",
            lhs.to_text(),
            rhs.to_text()
        )?;
    }
    writeln!(out, "{}/{} verified", report.verified, report.total)?;
    if report.holds() {
        Ok(())
    } else {
        Err(Failure::verification(format!(
            "{} relations failed",
            report.failures.len()
        )))
    }
}

pub fn cmd_derive_rules(output: Option<&Path>, bound: usize, out: &mut dyn Write) -> Outcome {
    let rules = derive_typed_rules(bound).map_err(|e| Failure::verification(e.to_string()))?;
    with_output(output, out, |w| {
        writeln!(
            w,
            "# Generated by `realstab derive-rules`. Do not edit by hand."
        )?;
        write!(w, "{}", format_rules(&rules))?;
        Ok(())
    })
}

pub fn cmd_count(n: usize, check_distinct: bool, out: &mut dyn Write) -> Outcome {
    if n == 0 {
        return Err(Failure::input("counts need n >= 1"));
    }
    let distinct = if check_distinct {
        if n > 3 {
            return Err(Failure::input(
                "--check-distinct enumerates every normal form; n must be at most 3",
            ));
        }
        Some(verify_bijection(n).holds())
    } else {
        None
    };
    let r = count_report(n);
    let json = CountJson {
        clifford_order: big(&r.clifford_order),
        distinct,
        n,
        x_count: big(&r.x_count),
        z_count: big(&r.z_count),
        z_count_a12: big(&r.z_count_a12),
        z_count_a3: big(&r.z_count_a3),
    };
    writeln!(
        out,
        "{}",
        serde_json::to_string(&json).expect("counts serialize")
    )?;
    if distinct == Some(false) {
        return Err(Failure::verification(
            "normal forms are not pairwise distinct",
        ));
    }
    Ok(())
}

pub fn cmd_enumerate(n: usize, output: Option<&Path>, out: &mut dyn Write) -> Outcome {
    if n > 4 {
        return Err(Failure::input("enumeration is limited to n <= 4"));
    }
    with_output(output, out, |w| {
        let mut w = io::BufWriter::new(w);
        for nf in enumerate_normal_forms(n) {
            writeln!(w, "{}", normal_form_json(&nf))?;
        }
        w.flush()?;
        Ok(())
    })
}

pub fn run(cli: Cli, out: &mut dyn Write, err: &mut dyn Write) -> Outcome {
    match cli.command {
        Command::Normalize {
            input,
            output,
            method,
            trace,
        } => cmd_normalize(&input, output.as_deref(), method, trace, out, err),
        Command::Equal {
            a,
            b,
            mode,
            matrix_cap,
        } => cmd_equal(&a, &b, mode, matrix_cap, out),
        Command::Matrix { input, matrix_cap } => cmd_matrix(&input, matrix_cap, out),
        Command::Actions => cmd_actions(out),
        Command::VerifyRelations { set } => cmd_verify_relations(set.into(), out),
        Command::DeriveRules { output, bound } => cmd_derive_rules(output.as_deref(), bound, out),
        Command::Count { n, check_distinct } => cmd_count(n, check_distinct, out),
        Command::Enumerate { n, output } => cmd_enumerate(n, output.as_deref(), out),
    }
}
