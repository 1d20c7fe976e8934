//! `mcilp`: count, enumerate and select Pareto optima of multicriteria
//! integer linear programs from the command line.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use mcilp_core::polynomial::parse_rational;
use mcilp_core::select::{
    enumerate_by_distance, fptas_nearest_pseudonorm, nearest_odd_lp, nearest_polyhedral, PseudoResult,
};
use mcilp_core::{oracle, par, EnumerationStream, NormSpec, ParetoHandles, PolyhedralNorm, Problem, Srf, TermOrder};

#[derive(Parser)]
#[command(name = "mcilp", version, about = "Exact Pareto optima of multicriteria integer linear programs")]
struct Cli {
    /// Run every data-parallel stage on the calling thread.
    #[arg(long, global = true)]
    sequential: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Number of Pareto optima and of Pareto strategies.
    Count(ProblemArg),
    /// Serialized generating function of one of the pipeline's sets.
    Gf(GfArgs),
    /// Points in term order, one per line.
    Enumerate(EnumerateArgs),
    /// Nearest Pareto optimum under a polyhedral norm, with its distance.
    Nearest(NearestArgs),
    /// Pareto optima by increasing polyhedral distance.
    Rank(RankArgs),
    /// Approximately nearest Pareto optimum under a pseudo-norm.
    Fptas(FptasArgs),
    /// Componentwise minimum of each objective.
    Ideal(ProblemArg),
    /// Brute-force answers for cross-checking.
    Oracle {
        #[command(subcommand)]
        command: OracleCommand,
    },
    /// Start the HTTP service on localhost.
    Serve {
        #[arg(long, default_value_t = 8080)]
        port: u16,
    },
}

#[derive(Subcommand)]
enum OracleCommand {
    Count(ProblemArg),
    Enumerate(EnumerateArgs),
    Nearest(NearestArgs),
    Rank(RankArgs),
    /// Exact minimizer of the pseudo-norm (the tolerance is ignored).
    Fptas(FptasArgs),
    Ideal(ProblemArg),
}

#[derive(Args)]
struct ProblemArg {
    problem: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum Which {
    Pareto,
    Strategies,
    Dominated,
}

#[derive(Args)]
struct GfArgs {
    problem: PathBuf,
    #[arg(long, value_enum, default_value = "pareto")]
    which: Which,
}

#[derive(Clone, Copy, ValueEnum)]
enum EnumSet {
    /// Pareto optima in outcome space.
    Pareto,
    /// Pareto strategies.
    Strategies,
    /// Pairs `(u, f(u))` of Pareto strategies and their outcomes.
    Pairs,
}

#[derive(Args)]
struct EnumerateArgs {
    problem: PathBuf,
    /// Term order matrix: whitespace-separated rows, one per line.
    #[arg(long)]
    order: Option<PathBuf>,
    /// Project onto the last `p` coordinates of the enumerated set.
    #[arg(long)]
    project: Option<usize>,
    #[arg(long)]
    limit: Option<usize>,
    #[arg(long, value_enum, default_value = "pareto")]
    set: EnumSet,
}

#[derive(Args)]
struct NearestArgs {
    problem: PathBuf,
    /// `linf`, `l1`, `poly-ineq <m> <k> A b` or `poly-verts <count> <k> coords`.
    #[arg(long, allow_hyphen_values = true)]
    norm: String,
    /// Reference point, e.g. "0 -2".
    #[arg(long, allow_hyphen_values = true)]
    point: String,
    /// Tie-break term order matrix file.
    #[arg(long)]
    order: Option<PathBuf>,
}

#[derive(Args)]
struct RankArgs {
    #[command(flatten)]
    query: NearestArgs,
    #[arg(long)]
    limit: Option<usize>,
}

#[derive(Args)]
struct FptasArgs {
    problem: PathBuf,
    /// `pseudo <D> <polynomial> <alpha> <beta>` or `lp-odd <p>`.
    #[arg(long, allow_hyphen_values = true)]
    pseudo: String,
    #[arg(long, allow_hyphen_values = true)]
    point: String,
    /// Relative tolerance in (0, 1), e.g. 1/10.
    #[arg(long)]
    eps: String,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if cli.sequential {
        par::set_parallel(false);
    }
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}

/// 2 for parse errors, 3 for infeasible or empty input, 4 for other input
/// contract violations, 1 otherwise.
fn exit_code(e: &anyhow::Error) -> u8 {
    use mcilp_core::Error as E;
    for cause in e.chain() {
        if let Some(err) = cause.downcast_ref::<E>() {
            return match err {
                E::Parse(_) => 2,
                E::EmptyPolyhedron | E::EmptySet => 3,
                E::DimensionMismatch { .. } | E::InvalidInput(_) | E::UnboundedPolyhedron | E::TooLarge(_) => 4,
                _ => 1,
            };
        }
        if cause.downcast_ref::<io::Error>().is_some() {
            return 2;
        }
    }
    1
}

fn run(command: Command) -> Result<()> {
    let out = match command {
        Command::Count(a) => {
            let h = handles(&a.problem)?;
            format!("pareto: {}\nstrategies: {}\n", h.pareto_count()?, h.strategy_count()?)
        }
        Command::Gf(a) => {
            let h = handles(&a.problem)?;
            let g = match a.which {
                Which::Pareto => &h.g_pareto,
                Which::Strategies => &h.g_strategies,
                Which::Dominated => &h.g_dominated,
            };
            let mut text = g.to_text();
            if !text.ends_with('\n') {
                text.push('\n');
            }
            text
        }
        Command::Enumerate(a) => return enumerate(&a),
        Command::Nearest(a) => {
            let h = handles(&a.problem)?;
            let k = h.problem.k();
            let (q, vhat, order) = (polyhedral(&a.norm, k)?, point(&a.point)?, order(a.order.as_deref(), k)?);
            let (v, d) = nearest_polyhedral(&h.g_pareto, &q, &vhat, h.outcome_bound() + 1, &order)?;
            format!("point: {}\ndistance: {d}\n", join(&v))
        }
        Command::Rank(a) => return rank(&a),
        Command::Fptas(a) => {
            let h = handles(&a.problem)?;
            let (vhat, eps) = (point(&a.point)?, parse_rational(&a.eps)?);
            let m = h.outcome_bound() + 1;
            let r = match NormSpec::parse(&a.pseudo, h.problem.k())? {
                NormSpec::Pseudo(pn) => fptas_nearest_pseudonorm(&h.g_pareto, &pn, &vhat, m, &eps)?,
                NormSpec::OddLp(p) => nearest_odd_lp(&h.g_pareto, p, &vhat, m, &eps)?,
                NormSpec::Polyhedral(_) => {
                    bail!(mcilp_core::Error::InvalidInput("polyhedral norms are solved exactly by `nearest`".into()))
                }
            };
            fptas_report(&r)
        }
        Command::Ideal(a) => format!("point: {}\n", join(&handles(&a.problem)?.ideal_point()?)),
        Command::Oracle { command } => return run_oracle(command),
        Command::Serve { port } => {
            let runtime = tokio::runtime::Runtime::new().context("starting the runtime")?;
            eprintln!("listening on http://127.0.0.1:{port}");
            runtime.block_on(mcilp_service::serve(port)).context("serving")?;
            return Ok(());
        }
    };
    emit(&out)
}

fn run_oracle(command: OracleCommand) -> Result<()> {
    let out = match command {
        OracleCommand::Count(a) => {
            let p = problem(&a.problem)?;
            format!("pareto: {}\nstrategies: {}\n", oracle::pareto_set(&p)?.len(), oracle::pareto_strategies(&p)?.len())
        }
        OracleCommand::Enumerate(a) => {
            let p = problem(&a.problem)?;
            let base = match a.set {
                EnumSet::Pareto => oracle::pareto_set(&p)?,
                EnumSet::Strategies => oracle::pareto_strategies(&p)?,
                EnumSet::Pairs => {
                    oracle::pareto_strategies(&p)?.into_iter().map(|u| [u.clone(), p.outcome(&u)].concat()).collect()
                }
            };
            let dim = base.first().map_or(0, Vec::len);
            let p_dim = a.project.unwrap_or(dim);
            if p_dim == 0 || p_dim > dim {
                bail!(mcilp_core::Error::InvalidInput(format!("cannot project onto {p_dim} of {dim} coordinates")));
            }
            let projected: BTreeSet<Vec<i64>> = base.iter().map(|w| w[dim - p_dim..].to_vec()).collect();
            let ord = order(a.order.as_deref(), p_dim)?;
            let sorted = oracle::sort_by_order(&projected.into_iter().collect::<Vec<_>>(), &ord);
            let mut s = String::new();
            for v in sorted.iter().take(a.limit.unwrap_or(usize::MAX)) {
                writeln!(s, "{}", join(v))?;
            }
            s
        }
        OracleCommand::Nearest(a) => {
            let p = problem(&a.problem)?;
            let k = p.k();
            let (q, vhat, order) = (polyhedral(&a.norm, k)?, point(&a.point)?, order(a.order.as_deref(), k)?);
            check_dim(&vhat, k)?;
            let (v, d) = oracle::oracle_nearest(&oracle::pareto_set(&p)?, &NormSpec::Polyhedral(q), &vhat, &order)?;
            format!("point: {}\ndistance: {d}\n", join(&v))
        }
        OracleCommand::Rank(a) => {
            let p = problem(&a.query.problem)?;
            let k = p.k();
            let q = polyhedral(&a.query.norm, k)?;
            let (vhat, order) = (point(&a.query.point)?, order(a.query.order.as_deref(), k)?);
            check_dim(&vhat, k)?;
            let ranked = oracle::rank_by_distance(&oracle::pareto_set(&p)?, &NormSpec::Polyhedral(q), &vhat, &order);
            let mut s = String::new();
            for (v, d) in ranked.iter().take(a.limit.unwrap_or(usize::MAX)) {
                writeln!(s, "{} | {d}", join(v))?;
            }
            s
        }
        OracleCommand::Fptas(a) => {
            let p = problem(&a.problem)?;
            let k = p.k();
            parse_rational(&a.eps)?;
            let (norm, vhat) = (NormSpec::parse(&a.pseudo, k)?, point(&a.point)?);
            check_dim(&vhat, k)?;
            let (v, q) = oracle::oracle_nearest(&oracle::pareto_set(&p)?, &norm, &vhat, &TermOrder::identity(k))?;
            format!("point: {}\nqvalue: {q}\n", join(&v))
        }
        OracleCommand::Ideal(a) => format!("point: {}\n", join(&oracle::ideal_point(&problem(&a.problem)?)?)),
    };
    emit(&out)
}

fn enumerate(a: &EnumerateArgs) -> Result<()> {
    let h = handles(&a.problem)?;
    let (set, m): (&Srf, i64) = match a.set {
        EnumSet::Pareto => (&h.g_pareto, h.outcome_bound()),
        EnumSet::Strategies => (&h.g_strategies, h.strategy_bound()),
        EnumSet::Pairs => (&h.g_spareto, h.graph_bound()),
    };
    let p = a.project.unwrap_or(set.dim);
    if p == 0 || p > set.dim {
        bail!(mcilp_core::Error::InvalidInput(format!("cannot project onto {p} of {} coordinates", set.dim)));
    }
    let ord = order(a.order.as_deref(), p)?;
    let stream = EnumerationStream::new(Arc::new(set.clone()), m, ord)?;
    let stdout = io::stdout();
    let mut w = BufWriter::new(stdout.lock());
    for v in stream.take(a.limit.unwrap_or(usize::MAX)) {
        writeln!(w, "{}", join(&v?))?;
        w.flush()?;
    }
    Ok(())
}

fn rank(a: &RankArgs) -> Result<()> {
    let h = handles(&a.query.problem)?;
    let k = h.problem.k();
    let q = polyhedral(&a.query.norm, k)?;
    let (vhat, ord) = (point(&a.query.point)?, order(a.query.order.as_deref(), k)?);
    let ranked = enumerate_by_distance(&h.g_pareto, &q, &vhat, h.outcome_bound() + 1, &ord)?;
    let stdout = io::stdout();
    let mut w = BufWriter::new(stdout.lock());
    for item in ranked.take(a.limit.unwrap_or(usize::MAX)) {
        let (v, d) = item?;
        writeln!(w, "{} | {d}", join(&v))?;
        w.flush()?;
    }
    Ok(())
}

fn fptas_report(r: &PseudoResult) -> String {
    let mut s = format!("point: {}\nqvalue: {}\n", join(&r.point), r.qvalue);
    let (lo, hi) = &r.distance_bracket;
    let _ = writeln!(s, "distance: [{lo}, {hi}]");
    let _ = write!(s, "certificate: gamma={} delta={} eps_prime={}", r.gamma, r.delta, r.eps_prime);
    match &r.certificate {
        Some(c) => {
            let _ = writeln!(s, " s={} count={} lower={} upper={}", c.s, c.count, c.lower, c.upper);
        }
        None => s.push_str(" (reference point is a Pareto optimum)\n"),
    }
    s
}

fn emit(out: &str) -> Result<()> {
    let mut stdout = io::stdout().lock();
    stdout.write_all(out.as_bytes())?;
    stdout.flush()?;
    Ok(())
}

fn problem(path: &Path) -> Result<Problem> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Problem::parse(&text).with_context(|| format!("loading {}", path.display()))
}

fn handles(path: &Path) -> Result<ParetoHandles> {
    Ok(ParetoHandles::compute(&problem(path)?)?)
}

fn order(path: Option<&Path>, p: usize) -> Result<TermOrder> {
    let Some(path) = path else {
        return Ok(TermOrder::identity(p));
    };
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let order = TermOrder::parse(&text).with_context(|| format!("loading {}", path.display()))?;
    if order.p() != p {
        bail!(mcilp_core::Error::DimensionMismatch { expected: p, found: order.p() });
    }
    Ok(order)
}

fn polyhedral(spec: &str, k: usize) -> Result<PolyhedralNorm> {
    match NormSpec::parse(spec, k)? {
        NormSpec::Polyhedral(q) => Ok(q),
        _ => bail!(mcilp_core::Error::InvalidInput("norm is not polyhedral; use `fptas`".into())),
    }
}

fn point(text: &str) -> Result<Vec<i64>> {
    text.split_whitespace()
        .map(|t| t.parse().map_err(|_| mcilp_core::Error::Parse(format!("invalid coordinate `{t}`")).into()))
        .collect()
}

fn check_dim(v: &[i64], k: usize) -> Result<()> {
    if v.len() != k {
        bail!(mcilp_core::Error::DimensionMismatch { expected: k, found: v.len() });
    }
    Ok(())
}

fn join(v: &[i64]) -> String {
    v.iter().map(i64::to_string).collect::<Vec<_>>().join(" ")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn points_parse_with_signs() {
        assert_eq!(point(" 0  -2 ").unwrap(), vec![0, -2]);
        assert_eq!(exit_code(&point("1 two").unwrap_err()), 2);
    }

    #[test]
    fn exit_codes_follow_the_error_kind() {
        use mcilp_core::Error as E;
        let code = |e: E| exit_code(&anyhow::Error::from(e).context("while testing"));
        assert_eq!(code(E::Parse("x".into())), 2);
        assert_eq!(code(E::EmptySet), 3);
        assert_eq!(code(E::DimensionMismatch { expected: 2, found: 3 }), 4);
        assert_eq!(code(E::Overflow), 1);
    }

    #[test]
    fn certificate_line_without_moments() {
        let r = PseudoResult {
            point: vec![1, 2],
            qvalue: mcilp_core::Rational::from_integer(0.into()),
            gamma: 0,
            delta: mcilp_core::Rational::from_integer(0.into()),
            eps_prime: mcilp_core::Rational::from_integer(0.into()),
            certificate: None,
            distance_bracket: ("0.0".into(), "0.0".into()),
        };
        let text = fptas_report(&r);
        assert!(text.starts_with("point: 1 2\nqvalue: 0\n"));
        assert!(text.ends_with("(reference point is a Pareto optimum)\n"));
    }
}
