//! `span-lattice` command line tool.
//!
//! Every command prints a JSON report on stdout. Exit status is 0 on
//! success, 1 when a claim cannot be spanned or is not measurable (the report
//! then carries `"status": "failure"` and a `reason`), and 2 for invalid
//! input.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use serde_json::{json, Value};
use span_lattice::closure::freudenthal_approx;
use span_lattice::lab::{build_counterexample, obstruction_certificate, row_limit_residuals};
use span_lattice::sigma::{is_measurable, level_sets, measurable_via_components, sigma_of, violating_block};
use span_lattice::spanning::{option_space_basis, replicate};
use span_lattice::{Exact, LatticeElement, LatticeError, Payoff, Scalar};

pub mod files;

use files::{Emit, Market, PortfolioFile};

#[derive(Debug)]
pub enum CliError {
    /// Bad input; exit status 2.
    Validation(String),
    /// A well-formed request whose answer is negative; exit status 1.
    Failure(Value),
}

impl CliError {
    pub fn validation(msg: String) -> Self {
        CliError::Validation(msg)
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 2,
            CliError::Failure(_) => 1,
        }
    }
}

impl From<LatticeError> for CliError {
    fn from(e: LatticeError) -> Self {
        match e {
            LatticeError::SpanningFailure {
                residual,
                block,
                best_approximation,
            } => CliError::Failure(json!({
                "status": "failure",
                "reason": "spanning_failure",
                "message": format!("claim separates states {block:?} that the underlying does not"),
                "residual": residual,
                "block": block,
                "best_approximation": best_approximation,
            })),
            LatticeError::NotMeasurable(msg) => CliError::Failure(json!({
                "status": "failure",
                "reason": "not_measurable",
                "message": msg,
            })),
            other => CliError::Validation(other.to_string()),
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "span-lattice", version, about = "Option spanning and sublattice closures on finite markets")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Replicate a claim with calls and puts on an asset.
    Replicate {
        #[arg(long)]
        market: PathBuf,
        #[arg(long)]
        asset: String,
        #[arg(long)]
        claim: String,
        /// Use exact rational arithmetic.
        #[arg(long)]
        exact: bool,
        /// Write the portfolio to this file.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Option space of an asset: dimension, basis and generated blocks.
    Span {
        #[arg(long)]
        market: PathBuf,
        #[arg(long)]
        asset: String,
        #[arg(long)]
        exact: bool,
    },
    /// Whether a claim is measurable for the algebra generated by some assets.
    Measure {
        #[arg(long)]
        market: PathBuf,
        #[arg(long)]
        claim: String,
        /// Comma separated asset names.
        #[arg(long, value_delimiter = ',', required = true)]
        algebra_from: Vec<String>,
        #[arg(long)]
        exact: bool,
    },
    /// Tables for the truncated two-generator counterexample.
    Counterexample {
        #[arg(long)]
        rows: usize,
        #[arg(long)]
        cols: usize,
        /// Directory for the CSV tables.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        exact: bool,
    },
    /// Dyadic approximation of a claim by claims on an asset.
    Approx {
        #[arg(long)]
        market: PathBuf,
        #[arg(long)]
        claim: String,
        #[arg(long)]
        asset: String,
        #[arg(long)]
        levels: usize,
        #[arg(long)]
        exact: bool,
    },
    /// Evaluate a portfolio file.
    Evaluate {
        #[arg(long)]
        portfolio: PathBuf,
    },
}

/// Runs the tool on `args` (including the program name), writing the report
/// to `out` and diagnostics to stderr. Returns the exit status.
pub fn run<I, T>(args: I, out: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = e.exit_code();
            if code == 0 {
                let _ = write!(out, "{e}");
            } else {
                eprint!("{e}");
            }
            return if code == 0 { 0 } else { 2 };
        }
    };
    let result = match cli.command {
        Command::Replicate {
            market,
            asset,
            claim,
            exact,
            out: file,
        } => {
            if exact {
                cmd_replicate::<Exact>(&market, &asset, &claim, file.as_deref())
            } else {
                cmd_replicate::<f64>(&market, &asset, &claim, file.as_deref())
            }
        }
        Command::Span { market, asset, exact } => {
            if exact {
                cmd_span::<Exact>(&market, &asset)
            } else {
                cmd_span::<f64>(&market, &asset)
            }
        }
        Command::Measure {
            market,
            claim,
            algebra_from,
            exact,
        } => {
            if exact {
                cmd_measure::<Exact>(&market, &claim, &algebra_from)
            } else {
                cmd_measure::<f64>(&market, &claim, &algebra_from)
            }
        }
        Command::Counterexample {
            rows,
            cols,
            out: dir,
            exact,
        } => {
            if exact {
                cmd_counterexample::<Exact>(rows, cols, dir.as_deref())
            } else {
                cmd_counterexample::<f64>(rows, cols, dir.as_deref())
            }
        }
        Command::Approx {
            market,
            claim,
            asset,
            levels,
            exact,
        } => {
            if exact {
                cmd_approx::<Exact>(&market, &claim, &asset, levels)
            } else {
                cmd_approx::<f64>(&market, &claim, &asset, levels)
            }
        }
        Command::Evaluate { portfolio } => cmd_evaluate(&portfolio),
    };
    let (code, report) = match result {
        Ok(report) => (0, report),
        Err(CliError::Failure(report)) => (1, report),
        Err(CliError::Validation(msg)) => {
            eprintln!("error: {msg}");
            (2, json!({ "status": "error", "reason": "invalid_input", "message": msg }))
        }
    };
    match serde_json::to_string_pretty(&report) {
        Ok(text) if writeln!(out, "{text}").is_ok() => code,
        _ => 2,
    }
}

fn values<S: Emit>(p: &Payoff<S>) -> Vec<Value> {
    p.values().iter().map(Emit::to_json).collect()
}

fn cmd_replicate<S: Emit>(market: &Path, asset: &str, claim: &str, file: Option<&Path>) -> Result<Value, CliError> {
    let m = Market::<S>::load(market)?;
    let f = m.asset(asset)?;
    let g = m.claim(claim)?;
    let portfolio = replicate(g, f)?;
    let residual = portfolio.evaluate().minus(g)?.sup_norm();
    let record = PortfolioFile::from_portfolio(&portfolio, asset, f, &m.states);
    if let Some(path) = file {
        let text = serde_json::to_string_pretty(&record).expect("portfolio serializes");
        std::fs::write(path, text + "\n")
            .map_err(|e| CliError::validation(format!("cannot write {}: {e}", path.display())))?;
    }
    Ok(json!({
        "status": "ok",
        "arithmetic": S::ARITHMETIC,
        "asset": asset,
        "claim": claim,
        "residual": residual.to_json(),
        "positions": record.positions,
        "replicated": values(&portfolio.evaluate()),
    }))
}

fn cmd_span<S: Emit>(market: &Path, asset: &str) -> Result<Value, CliError> {
    let m = Market::<S>::load(market)?;
    let f = m.asset(asset)?;
    let basis = option_space_basis(f)?;
    let part = sigma_of(std::slice::from_ref(f))?;
    let table: Vec<Value> = basis
        .instruments
        .iter()
        .zip(&basis.basis)
        .map(|((kind, strike), payoff)| json!({ "kind": kind.as_str(), "strike": strike.to_json(), "payoff": values(payoff) }))
        .collect();
    let levels: Vec<Value> = level_sets(f)
        .into_iter()
        .map(|(v, states)| json!({ "value": v.to_json(), "states": states.iter().map(|&i| m.states[i].clone()).collect::<Vec<_>>() }))
        .collect();
    Ok(json!({
        "status": "ok",
        "arithmetic": S::ARITHMETIC,
        "asset": asset,
        "dimension": basis.dim(),
        "basis": table,
        "blocks": part.blocks(),
        "levels": levels,
    }))
}

fn cmd_measure<S: Emit>(market: &Path, claim: &str, algebra_from: &[String]) -> Result<Value, CliError> {
    let m = Market::<S>::load(market)?;
    let g = m.claim(claim)?;
    let assets = algebra_from
        .iter()
        .map(|name| m.asset(name).cloned())
        .collect::<Result<Vec<_>, _>>()?;
    let part = sigma_of(&assets)?;
    let by_levels = is_measurable(g, &part)?;
    let by_components = measurable_via_components(g, &part, &Payoff::one(m.space.clone()))?;
    let mut report = json!({
        "arithmetic": S::ARITHMETIC,
        "claim": claim,
        "algebra_from": algebra_from,
        "blocks": part.blocks(),
        "measurable_by_levels": by_levels,
        "measurable_by_components": by_components,
    });
    if by_levels != by_components {
        report["status"] = json!("failure");
        report["reason"] = json!("tests_disagree");
        return Err(CliError::Failure(report));
    }
    if by_levels {
        report["status"] = json!("ok");
        Ok(report)
    } else {
        report["status"] = json!("failure");
        report["reason"] = json!("not_measurable");
        report["block"] = json!(violating_block(g, &part));
        Err(CliError::Failure(report))
    }
}

fn write_file(dir: &Path, name: &str, text: &str, written: &mut Vec<String>) -> Result<(), CliError> {
    std::fs::write(dir.join(name), text)
        .map_err(|e| CliError::validation(format!("cannot write {}: {e}", dir.join(name).display())))?;
    written.push(name.to_string());
    Ok(())
}

/// The construction is always carried out in rational arithmetic: its strike
/// gaps shrink like `2^-(m+n)`, so float evaluation loses the row-limit law
/// already at moderate sizes. Float mode only changes how numbers are printed.
fn cmd_counterexample<S: Emit>(rows: usize, cols: usize, dir: Option<&Path>) -> Result<Value, CliError> {
    let cx = build_counterexample::<Exact>(rows, cols)?;
    let max_j = cx.max_j();
    let ys = cx.y_sequence(max_j)?;
    let residuals: Vec<Vec<Exact>> = [cx.u.clone(), cx.v.clone()].iter().chain(&ys).map(row_limit_residuals).collect();
    let worst = residuals
        .iter()
        .flatten()
        .fold(Exact::from_integer(0.into()), |acc, r| Exact::max_of(&acc, &Exact::max_of(r, &-r.clone())));

    let z = ys.last().expect("max_j >= 1");
    let mut obstruction = Vec::with_capacity(rows);
    for m in 1..=rows {
        let cert = obstruction_certificate(z, m)?;
        obstruction.push((m, cert, z.entry(m, 1).clone()));
    }
    let out = |x: &Exact| S::from_exact(x);

    let mut written = Vec::new();
    if let Some(dir) = dir {
        std::fs::create_dir_all(dir).map_err(|e| CliError::validation(format!("cannot create {}: {e}", dir.display())))?;
        write_file(dir, "u.csv", &S::array_csv(&cx.u), &mut written)?;
        write_file(dir, "v.csv", &S::array_csv(&cx.v), &mut written)?;
        write_file(dir, "e.csv", &S::array_csv(&cx.e), &mut written)?;
        for (j, y) in ys.iter().enumerate() {
            write_file(dir, &format!("y_{}.csv", j + 1), &S::array_csv(y), &mut written)?;
        }
        let mut table = String::from("m,u,v");
        for j in 1..=max_j {
            table.push_str(&format!(",y_{j}"));
        }
        table.push('\n');
        for m in 0..rows {
            table.push_str(&(m + 1).to_string());
            for r in &residuals {
                table.push(',');
                table.push_str(&out(&r[m]).to_cell());
            }
            table.push('\n');
        }
        write_file(dir, "row_limit_residuals.csv", &table, &mut written)?;
        let mut table = String::from("m,bound,z_m1,sup_norm,holds\n");
        for (m, cert, zm1) in &obstruction {
            table.push_str(&format!(
                "{m},{},{},{},{}\n",
                out(&cert.bound).to_cell(),
                out(zm1).to_cell(),
                out(&cert.sup_norm).to_cell(),
                cert.holds
            ));
        }
        write_file(dir, "obstruction.csv", &table, &mut written)?;
    }
    Ok(json!({
        "status": "ok",
        "arithmetic": S::ARITHMETIC,
        "rows": rows,
        "cols": cols,
        "max_j": max_j,
        "max_row_limit_residual": out(&worst).to_json(),
        "obstruction": obstruction.iter().map(|(m, cert, zm1)| json!({
            "m": m,
            "bound": out(&cert.bound).to_json(),
            "z_m1": out(zm1).to_json(),
            "sup_norm": out(&cert.sup_norm).to_json(),
            "holds": cert.holds,
        })).collect::<Vec<_>>(),
        "files": written,
    }))
}

fn cmd_approx<S: Emit>(market: &Path, claim: &str, asset: &str, levels: usize) -> Result<Value, CliError> {
    let m = Market::<S>::load(market)?;
    let g = m.claim(claim)?;
    let f = m.asset(asset)?;
    let part = sigma_of(std::slice::from_ref(f))?;
    let report = match freudenthal_approx(g, &part, levels) {
        Err(LatticeError::NotMeasurable(msg)) => {
            return Err(CliError::Failure(json!({
                "status": "failure",
                "reason": "not_measurable",
                "message": msg,
                "block": violating_block(g, &part),
            })))
        }
        other => other?,
    };
    let lo = g.values().iter().fold(g.values()[0].clone(), |a, b| S::min_of(&a, b));
    let hi = g.values().iter().fold(g.values()[0].clone(), |a, b| S::max_of(&a, b));
    let range = hi - lo;
    let mut bound = range.clone();
    let two = S::one() + S::one();
    let stages: Vec<Value> = report
        .stages
        .iter()
        .zip(&report.errors)
        .enumerate()
        .map(|(l, (stage, err))| {
            bound = bound.clone() / two.clone();
            json!({ "level": l + 1, "bound": bound.to_json(), "error": err.to_json(), "values": values(stage) })
        })
        .collect();
    Ok(json!({
        "status": "ok",
        "arithmetic": S::ARITHMETIC,
        "claim": claim,
        "asset": asset,
        "range": range.to_json(),
        "stages": stages,
    }))
}

fn cmd_evaluate(path: &Path) -> Result<Value, CliError> {
    let file = PortfolioFile::load(path)?;
    if file.arithmetic == "exact" {
        evaluate_as::<Exact>(&file)
    } else {
        evaluate_as::<f64>(&file)
    }
}

fn evaluate_as<S: Emit>(file: &PortfolioFile) -> Result<Value, CliError> {
    let (portfolio, _) = file.to_portfolio::<S>()?;
    Ok(json!({
        "status": "ok",
        "arithmetic": S::ARITHMETIC,
        "underlying": file.underlying.name,
        "positions": portfolio.len(),
        "payoff": values(&portfolio.evaluate()),
    }))
}
