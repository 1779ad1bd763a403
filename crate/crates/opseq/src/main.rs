//! Command-line surface: parse a problem file, dispatch to the library, and
//! print closed-form results next to their oracles.
//!
//! Exit codes are a stable contract:
//!   0  success
//!   1  numeric disagreement beyond the mode tolerance
//!   2  invalid input (parse error, contract violation, non-commuting tuple)
//!   3  internal consistency error

use std::fmt::Write as _;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use opseq::bell::{
    algebraic_expm, expm_series_oracle, power_sequence_decomposition, EXPM_SERIES_TOL,
};
use opseq::binet::{
    atomic_moment_report, binet_eval, binet_solve, characteristic_polynomial,
    roots_with_multiplicities, DEFAULT_CLUSTER_TOL,
};
use opseq::companion::{build_companion, companion_power_closed, companion_power_naive_counted};
use opseq::error::Error;
use opseq::matrix::{mat_power_naive, Matrix};
use opseq::problem::{Mode, Problem};
use opseq::recurrence::RecurrenceSpec;
use opseq::rho::{rho_dp, rho_enum_detailed};
use opseq::scalar::{Rat, Scalar, DEFAULT_FLOAT_TOL};

#[derive(Parser)]
#[command(
    name = "opseq",
    version,
    about = "Closed-form linear recurrence solver with oracle checks"
)]
struct Cli {
    /// Override the problem file's scalar mode.
    #[arg(long, global = true, value_parser = ["exact", "float"])]
    mode: Option<String>,

    /// Comparison tolerance for float-mode deviations (default 1e-10 relative).
    #[arg(long, global = true)]
    tol: Option<f64>,

    /// Worker threads for the combinatorial sum (exact-mode output is
    /// identical for any thread count).
    #[arg(long, global = true, default_value_t = 1)]
    threads: usize,

    /// Reject coefficient matrices that are not symmetric.
    #[arg(long = "require-symmetric", global = true, default_value_t = false)]
    require_symmetric: bool,

    /// Write machine-readable output (CSV) to this path.
    #[arg(long, global = true)]
    csv: Option<std::path::PathBuf>,

    /// Print the canonical form of the parsed problem file and exit.
    #[arg(long = "dump-canonical", global = true, default_value_t = false)]
    dump_canonical: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct FileArg {
    /// Problem file (JSON).
    file: std::path::PathBuf,
}

#[derive(Subcommand)]
enum Command {
    /// Print rho(m) for r <= m <= n from both routes with an agreement column.
    Rho {
        #[command(flatten)]
        file: FileArg,
        /// Upper index (falls back to the file's "n").
        #[arg(short, long)]
        n: Option<i64>,
    },
    /// Closed-form term vs. direct iteration at n.
    Solve {
        #[command(flatten)]
        file: FileArg,
        /// Term index (falls back to the file's "n").
        #[arg(short, long)]
        n: Option<i64>,
        /// Skip commutativity certification and print iteration only.
        #[arg(long, default_value_t = false)]
        iterate_only: bool,
    },
    /// Closed-form companion power vs. repeated squaring at n.
    Companion {
        #[command(flatten)]
        file: FileArg,
        /// Power (falls back to the file's "n").
        #[arg(short, long)]
        n: Option<i64>,
    },
    /// Binet decomposition: roots, coefficient matrices, reconstruction check.
    Binet {
        #[command(flatten)]
        file: FileArg,
        /// Check reconstruction up to this index (default 2r).
        #[arg(short, long)]
        n: Option<i64>,
    },
    /// Bell-polynomial exponential of an algebraic matrix vs. series oracle.
    Expm {
        #[command(flatten)]
        file: FileArg,
    },
    /// CSV of per-n multiplication counts for the competing strategies.
    Bench {
        #[command(flatten)]
        file: FileArg,
        /// Largest index (falls back to the file's "n_max").
        #[arg(long)]
        n_max: Option<i64>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code_for(&e))
        }
    }
}

fn exit_code_for(e: &Error) -> u8 {
    match e {
        Error::Parse(_)
        | Error::Coefficient(_)
        | Error::Commutativity(_)
        | Error::Dimension(_)
        | Error::Range(_)
        | Error::NotSimpleRoots(_)
        | Error::NonRealAtoms(_) => 2,
        Error::Conditioning { .. } | Error::ImaginaryResidue { .. } | Error::Consistency(_) => 3,
    }
}

struct Ctx {
    problem: Problem,
    mode: Mode,
    tol: f64,
    threads: usize,
    require_symmetric: bool,
    csv: Option<std::path::PathBuf>,
}

fn load(cli: &Cli, file: &FileArg) -> Result<Ctx, Error> {
    let text = std::fs::read_to_string(&file.file)
        .map_err(|e| Error::Parse(format!("{}: {e}", file.file.display())))?;
    let problem = Problem::parse(&text)?;
    let mode = match cli.mode.as_deref() {
        Some(m) => m.parse()?,
        None => problem.mode,
    };
    let tol = cli.tol.or(problem.tol).unwrap_or(DEFAULT_FLOAT_TOL);
    Ok(Ctx {
        problem,
        mode,
        tol,
        threads: cli.threads.max(1),
        require_symmetric: cli.require_symmetric,
        csv: cli.csv.clone(),
    })
}

impl Ctx {
    fn resolve_index(
        &self,
        flag: Option<i64>,
        file_value: Option<i64>,
        what: &str,
    ) -> Result<i64, Error> {
        flag.or(file_value).ok_or_else(|| {
            Error::Parse(format!(
                "no {what} given: pass --{} or set \"{}\" in the problem file",
                what.replace('_', "-"),
                what
            ))
        })
    }
}

fn run(cli: &Cli) -> Result<ExitCode, Error> {
    let file = match &cli.command {
        Command::Rho { file, .. }
        | Command::Solve { file, .. }
        | Command::Companion { file, .. }
        | Command::Binet { file, .. }
        | Command::Expm { file }
        | Command::Bench { file, .. } => file,
    };
    let ctx = load(cli, file)?;

    if cli.dump_canonical {
        println!("{}", ctx.problem.dump_canonical());
        return Ok(ExitCode::SUCCESS);
    }

    match &cli.command {
        Command::Rho { n, .. } => {
            let n = ctx.resolve_index(*n, ctx.problem.n, "n")?;
            match ctx.mode {
                Mode::Exact => cmd_rho::<Rat>(&ctx, n),
                Mode::Float => cmd_rho::<f64>(&ctx, n),
            }
        }
        Command::Solve {
            n, iterate_only, ..
        } => {
            let n = ctx.resolve_index(*n, ctx.problem.n, "n")?;
            match ctx.mode {
                Mode::Exact => cmd_solve::<Rat>(&ctx, n, *iterate_only),
                Mode::Float => cmd_solve::<f64>(&ctx, n, *iterate_only),
            }
        }
        Command::Companion { n, .. } => {
            let n = ctx.resolve_index(*n, ctx.problem.n, "n")?;
            match ctx.mode {
                Mode::Exact => cmd_companion::<Rat>(&ctx, n),
                Mode::Float => cmd_companion::<f64>(&ctx, n),
            }
        }
        Command::Binet { n, .. } => cmd_binet(&ctx, n.or(ctx.problem.n)),
        Command::Expm { .. } => cmd_expm(&ctx),
        Command::Bench { n_max, .. } => {
            let n_max = ctx.resolve_index(*n_max, ctx.problem.n_max, "n_max")?;
            match ctx.mode {
                Mode::Exact => cmd_bench::<Rat>(&ctx, n_max),
                Mode::Float => cmd_bench::<f64>(&ctx, n_max),
            }
        }
    }
}

trait ModeSpec: Scalar {
    fn spec_from(ctx: &Ctx, certify: bool) -> Result<RecurrenceSpec<Self>, Error>;
}

impl ModeSpec for Rat {
    fn spec_from(ctx: &Ctx, certify: bool) -> Result<RecurrenceSpec<Rat>, Error> {
        ctx.problem.to_exact_spec(ctx.require_symmetric, certify)
    }
}

impl ModeSpec for f64 {
    fn spec_from(ctx: &Ctx, certify: bool) -> Result<RecurrenceSpec<f64>, Error> {
        ctx.problem
            .to_float_spec(ctx.require_symmetric, certify, None)
    }
}

fn write_csv(ctx: &Ctx, content: &str) -> Result<(), Error> {
    if let Some(path) = &ctx.csv {
        std::fs::write(path, content)
            .map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
    }
    Ok(())
}

fn render_flat<S: Scalar>(m: &Matrix<S>) -> String {
    let cells: Vec<String> = (0..m.rows())
        .flat_map(|i| (0..m.cols()).map(move |j| (i, j)))
        .map(|(i, j)| m[(i, j)].render())
        .collect();
    format!("[{}]", cells.join(" "))
}

fn print_matrix_block<S: Scalar>(label: &str, m: &Matrix<S>) {
    println!("{label}:");
    for row in m.render_rows() {
        println!("  {row}");
    }
}

fn deviation_exit(ctx: &Ctx, deviation: f64, exact_equal: Option<bool>) -> ExitCode {
    let ok = match exact_equal {
        Some(eq) => eq,
        None => deviation <= ctx.tol,
    };
    println!(
        "max abs deviation: {deviation:.3e} ({})",
        if ok { "ok" } else { "FAIL" }
    );
    if ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}

fn cmd_rho<S: ModeSpec>(ctx: &Ctx, n: i64) -> Result<ExitCode, Error> {
    let spec = S::spec_from(ctx, true)?;
    let r = spec.order() as i64;
    if n < r {
        println!("below boundary: rho is identically zero for m < r = {r}; nothing to list");
        return Ok(ExitCode::SUCCESS);
    }
    let table = rho_dp(n, &spec.coeffs)?;
    let mut csv = String::from("m,enum,dp,agree\n");
    let mut all_agree = true;
    let mut precision_warned = false;
    println!("{:>4}  {:<28} {:<28} agree", "m", "enum", "dp");
    for m in r..=n {
        let detail = rho_enum_detailed(m, &spec.coeffs, ctx.threads)?;
        if detail.precision_warning && !precision_warned {
            eprintln!("warning: multinomial coefficients exceed 2^53; float results may round");
            precision_warned = true;
        }
        let dp = table.value(m);
        let agree = if S::EXACT {
            detail.value == *dp
        } else {
            detail.value.approx_eq(dp, ctx.tol)
        };
        all_agree &= agree;
        println!(
            "{m:>4}  {:<28} {:<28} {}",
            render_flat(&detail.value),
            render_flat(dp),
            if agree { "yes" } else { "NO" }
        );
        let _ = writeln!(
            csv,
            "{m},{},{},{}",
            render_flat(&detail.value),
            render_flat(dp),
            agree
        );
    }
    write_csv(ctx, &csv)?;
    if all_agree {
        Ok(ExitCode::SUCCESS)
    } else {
        println!("disagreement between enumeration and dp detected");
        Ok(ExitCode::from(1))
    }
}

fn cmd_solve<S: ModeSpec>(ctx: &Ctx, n: i64, iterate_only: bool) -> Result<ExitCode, Error> {
    if iterate_only {
        let spec = S::spec_from(ctx, false)?;
        let terms = spec.iterate_sequence(n.max(0));
        print_matrix_block(&format!("T_{n} (iteration)"), &terms[n.max(0) as usize]);
        return Ok(ExitCode::SUCCESS);
    }
    let spec = S::spec_from(ctx, true)?;
    let closed = spec.closed_term(n)?;
    let terms = spec.iterate_sequence(n);
    let oracle = &terms[n as usize];
    print_matrix_block(&format!("T_{n} (closed form)"), &closed);
    print_matrix_block(&format!("T_{n} (iteration oracle)"), oracle);
    let deviation = closed.max_abs_diff(oracle);
    let exact_eq = if S::EXACT {
        Some(closed == *oracle)
    } else {
        None
    };
    writeln_csv_deviation(ctx, deviation)?;
    Ok(deviation_exit(ctx, deviation, exact_eq))
}

fn writeln_csv_deviation(ctx: &Ctx, deviation: f64) -> Result<(), Error> {
    write_csv(
        ctx,
        &format!("metric,value\nmax_abs_deviation,{deviation:.17e}\n"),
    )
}

fn cmd_companion<S: ModeSpec>(ctx: &Ctx, n: i64) -> Result<ExitCode, Error> {
    let spec = S::spec_from(ctx, true)?;
    let closed = companion_power_closed(&spec.coeffs, n)?;
    let b = build_companion(&spec.coeffs);
    let (naive, _) = companion_power_naive_counted(&b, n as u64);
    print_matrix_block(&format!("B^{n} (closed form)"), &closed.flatten());
    print_matrix_block(&format!("B^{n} (repeated squaring)"), &naive.flatten());
    let deviation = closed.max_abs_diff(&naive);
    let exact_eq = if S::EXACT {
        Some(closed == naive)
    } else {
        None
    };
    writeln_csv_deviation(ctx, deviation)?;
    Ok(deviation_exit(ctx, deviation, exact_eq))
}

fn cmd_binet(ctx: &Ctx, n: Option<i64>) -> Result<ExitCode, Error> {
    // the spectral path runs in floating point regardless of file mode
    let spec = ctx
        .problem
        .to_float_spec(ctx.require_symmetric, true, None)?;
    let scalars = spec.coeffs.as_scalars().ok_or_else(|| {
        Error::Coefficient("binet needs scalar coefficients (multiples of the identity)".into())
    })?;
    let poly = characteristic_polynomial(&scalars)?;
    let spectral = roots_with_multiplicities(&poly, DEFAULT_CLUSTER_TOL)?;
    if let Some(w) = &spectral.multiplicity_warning {
        eprintln!("warning: {w}");
    }
    println!("characteristic polynomial coefficients (monic, descending):");
    println!("  {:?}", poly);
    println!("roots (value, multiplicity):");
    for &(z, m) in spectral.groups() {
        println!("  ({:.12e}{:+.12e}i, {m})", z.re, z.im);
    }
    let dec = binet_solve(&spec.initial, &spectral)?;
    println!("condition estimate: {:.3e}", dec.condition_estimate);
    println!("solve residual:     {:.3e}", dec.residual);
    for (g, &(z, m)) in dec.spectral.groups().iter().enumerate() {
        for j in 0..m {
            let s = dec.coefficient_real(g, j)?;
            print_matrix_block(&format!("S[root {:.6}{:+.6}i, j={j}]", z.re, z.im), &s);
        }
    }
    let top = n.unwrap_or(2 * spec.order() as i64);
    let terms = spec.iterate_sequence(top);
    let mut worst = 0.0f64;
    for m in 0..=top {
        let rec = binet_eval(&dec, m as u64)?;
        let oracle = &terms[m as usize];
        let dev = rec.sub(oracle).frobenius_norm() / (1.0 + oracle.frobenius_norm());
        worst = worst.max(dev);
    }
    println!("reconstruction checked for n = 0..={top}");

    if dec.spectral.all_simple() && dec.spectral.all_real() && spec.dim() == spec.term_cols() {
        // simple real atoms: report the finitely-atomic measure verdict on a
        // few deterministic sample vectors
        let d = spec.dim();
        let samples: Vec<Vec<f64>> = (0..d.max(2))
            .map(|k| (0..d).map(|i| if i == k % d { 1.0 } else { 0.5 }).collect())
            .collect();
        match atomic_moment_report(&dec, &samples) {
            Ok(report) => {
                for atom in &report.atoms {
                    println!(
                        "atom {:+.6}: weight min eigenvalue {:+.3e} ({})",
                        atom.lambda,
                        atom.min_eigenvalue,
                        if atom.positive { "psd" } else { "not psd" }
                    );
                }
                println!(
                    "moment-sequence verdict: {}",
                    if report.verdict {
                        "operator moment sequence on the atoms"
                    } else {
                        "not a positive operator moment sequence"
                    }
                );
            }
            Err(e) => println!("moment report unavailable: {e}"),
        }
    }
    writeln_csv_deviation(ctx, worst)?;
    Ok(deviation_exit(ctx, worst, None))
}

fn cmd_expm(ctx: &Ctx) -> Result<ExitCode, Error> {
    let spec = ctx
        .problem
        .to_float_spec(ctx.require_symmetric, true, None)?;
    let scalars = spec.coeffs.as_scalars().ok_or_else(|| {
        Error::Coefficient("expm needs scalar coefficients (multiples of the identity)".into())
    })?;
    if !spec.initial[0].is_identity() {
        return Err(Error::Coefficient(
            "expm needs the power-sequence form: initial terms I, T, ..., T^{r-1}".into(),
        ));
    }
    let t = spec.initial[1].clone();
    for (j, term) in spec.initial.iter().enumerate() {
        let expect = mat_power_naive(&t, j as u64);
        if term.max_abs_diff(&expect) > 1e-9 * (1.0 + expect.max_abs()) {
            return Err(Error::Coefficient(format!(
                "initial term {j} is not T^{j}; expm needs the power sequence of one matrix"
            )));
        }
    }
    let dec = power_sequence_decomposition(&t, &scalars)?;
    let closed = algebraic_expm(&dec)?;
    let oracle = expm_series_oracle(&t, EXPM_SERIES_TOL);
    print_matrix_block("e^T (Bell-polynomial closed form)", &closed);
    print_matrix_block("e^T (series oracle)", &oracle);
    let deviation = closed.sub(&oracle).frobenius_norm() / (1.0 + oracle.frobenius_norm());
    println!("relative Frobenius deviation: {deviation:.3e}");
    writeln_csv_deviation(ctx, deviation)?;
    let ok = deviation <= 1e-9;
    println!("status: {}", if ok { "ok" } else { "FAIL" });
    Ok(if ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}

fn cmd_bench<S: ModeSpec>(ctx: &Ctx, n_max: i64) -> Result<ExitCode, Error> {
    let spec = S::spec_from(ctx, true)?;
    let r = spec.order() as i64;
    if n_max < r {
        return Err(Error::Range(format!("n_max must be at least r = {r}")));
    }
    let table = rho_dp(n_max, &spec.coeffs)?;
    let b = build_companion(&spec.coeffs);
    let mut csv = String::from("n,enum_mults,dp_mults,iter_mults,naive_pow_mults\n");
    for n in r..=n_max {
        let enum_mults = rho_enum_detailed(n, &spec.coeffs, ctx.threads)?.mults;
        let dp_mults = table.op_count_through(n);
        let (_, iter_mults) = spec.iterate_sequence_counted(n);
        let (_, naive_pow_mults) = companion_power_naive_counted(&b, n as u64);
        let _ = writeln!(
            csv,
            "{n},{enum_mults},{dp_mults},{iter_mults},{naive_pow_mults}"
        );
    }
    print!("{csv}");
    write_csv(ctx, &csv)?;
    Ok(ExitCode::SUCCESS)
}
