//! Command-line runner for the weighted Anderson acceleration experiments.

mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use hsaa::anderson::{
    aa_run, picard_run, AAConfig, Anderson, ConvergenceRecord, FixedPointProblem, IterationRow, Termination,
};
use hsaa::grid::Scalar;
use hsaa::krylov::{gmres_restarted, AffineSystem, GmresConfig};
use hsaa::norms::{NormKind, WeightOperator};
use hsaa::problems::{NonlinearHelmholtzProblem, PoissonProblem, PoissonVariant, WaveHoltzProblem, WaveSpeed};
use hsaa::theory::{sigma_for_norm, verify_one_step_bound, Basis, Placement, SpectrumSpec};
use nalgebra::DVector;
use report::Run;

#[derive(Parser)]
#[command(name = "hsaa", version, about = "Anderson acceleration with H^-s weighted least squares")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// 1D Poisson by weighted Jacobi or Richardson iteration.
    Poisson(PoissonArgs),
    /// 1D nonlinear Helmholtz equation in a layered Kerr medium.
    Nlh(NlhArgs),
    /// WaveHoltz iteration on the unit interval.
    Waveholtz1d(Wave1dArgs),
    /// WaveHoltz iteration on the unit square.
    Waveholtz2d(Wave2dArgs),
    /// One-step contraction of AA against the Chebyshev bound.
    TheoryBound(BoundArgs),
    /// AA and restarted GMRES side by side on a linear problem.
    GmresCompare(CompareArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Solver {
    Picard,
    Aa,
    Gmres,
}

#[derive(Args, Clone)]
struct SolverArgs {
    /// Solvers to run.
    #[arg(long, value_enum, value_delimiter = ',', default_value = "picard,aa")]
    solvers: Vec<Solver>,
    /// Window size of AA; also the GMRES restart length.
    #[arg(long, default_value_t = 10)]
    m: usize,
    /// Least-squares norms for AA: l2, hm1, hm2, hm<s>.
    #[arg(long, value_delimiter = ',', default_value = "l2,hm2")]
    norm: Vec<NormKind>,
    /// Damping of the fixed-point map.
    #[arg(long, default_value_t = 1.0)]
    beta: f64,
    /// Relative residual tolerance.
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
    #[arg(long, default_value_t = 500)]
    max_iters: usize,
    /// Directory for the CSV files.
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum Variant {
    Jacobi,
    Richardson,
}

#[derive(Args)]
struct PoissonArgs {
    #[arg(long, value_enum, default_value = "jacobi")]
    variant: Variant,
    #[arg(long, default_value_t = 63)]
    n: usize,
    /// Also record one-step AA errors for k = m..=K.
    #[arg(long, value_name = "K")]
    one_step: Option<usize>,
    #[command(flatten)]
    solver: SolverArgs,
}

#[derive(Args)]
struct NlhArgs {
    #[arg(long, default_value_t = 20.0)]
    k0: f64,
    #[command(flatten)]
    solver: SolverArgs,
}

#[derive(Args)]
struct Wave1dArgs {
    #[arg(long, default_value_t = WaveHoltzProblem::LINE_POINTS)]
    n: usize,
    /// Angular frequency (default 25 sqrt 2).
    #[arg(long)]
    omega: Option<f64>,
    #[arg(long, default_value = "a")]
    speed: WaveSpeed,
    #[arg(long, default_value_t = WaveHoltzProblem::DEFAULT_CFL)]
    cfl: f64,
    /// Skip the dense reference solution (no error column).
    #[arg(long)]
    no_reference: bool,
    #[command(flatten)]
    solver: SolverArgs,
}

#[derive(Args)]
struct Wave2dArgs {
    /// Grid points per side, walls included.
    #[arg(long, default_value_t = WaveHoltzProblem::SQUARE_POINTS)]
    points: usize,
    #[arg(long, default_value_t = WaveHoltzProblem::SQUARE_OMEGA)]
    omega: f64,
    #[arg(long, default_value_t = WaveHoltzProblem::DEFAULT_CFL)]
    cfl: f64,
    /// Assemble the dense reference solution for the error column.
    #[arg(long)]
    reference: bool,
    #[command(flatten)]
    solver: SolverArgs,
}

#[derive(Clone, Copy, ValueEnum)]
enum PlacementArg {
    Random,
    Equispaced,
    Chebyshev,
}

#[derive(Args)]
struct BoundArgs {
    #[arg(long, allow_negative_numbers = true)]
    a: f64,
    #[arg(long, allow_negative_numbers = true)]
    b: f64,
    #[arg(long, default_value_t = 16)]
    n: usize,
    #[arg(long, default_value_t = 10)]
    m: usize,
    /// Picard steps before the AA step (default m).
    #[arg(long)]
    k: Option<usize>,
    #[arg(long, default_value_t = 100)]
    trials: u64,
    #[arg(long, value_enum, default_value = "random")]
    placement: PlacementArg,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Weighted metric; anything but l2 uses the cosine eigenbasis.
    #[arg(long, default_value = "l2")]
    norm: NormKind,
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum CompareProblem {
    Waveholtz1d,
    Waveholtz2d,
    Jacobi,
    Richardson,
}

#[derive(Args)]
struct CompareArgs {
    #[arg(long, value_enum, default_value = "waveholtz1d")]
    problem: CompareProblem,
    #[arg(long, default_value = "a")]
    speed: WaveSpeed,
    /// Unknowns (1D problems) or points per side (2D).
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    omega: Option<f64>,
    #[arg(long, default_value_t = WaveHoltzProblem::DEFAULT_CFL)]
    cfl: f64,
    #[command(flatten)]
    solver: SolverArgs,
}

fn aa_config(s: &SolverArgs, m: usize, norm: NormKind) -> AAConfig {
    AAConfig::new(m).with_norm(norm).with_beta(s.beta).with_tol(s.tol).with_max_iters(s.max_iters)
}

fn run_fixed_point<T: Scalar, P: FixedPointProblem<T>>(p: &P, x0: &DVector<T>, s: &SolverArgs) -> Result<Vec<Run>> {
    let mut runs = Vec::new();
    for solver in &s.solvers {
        match solver {
            Solver::Picard => {
                let cfg = aa_config(s, 0, NormKind::L2);
                runs.push(Run { label: "picard".into(), record: picard_run(p, x0, &cfg)?.0 });
            }
            Solver::Aa => {
                for &norm in &s.norm {
                    let cfg = aa_config(s, s.m, norm);
                    runs.push(Run { label: format!("aa-{norm}-m{}", s.m), record: aa_run(p, &cfg, x0)?.0 });
                }
            }
            Solver::Gmres => {}
        }
    }
    Ok(runs)
}

fn run_linear<P: FixedPointProblem>(p: &P, x0: &DVector<f64>, s: &SolverArgs) -> Result<Vec<Run>> {
    let mut runs = run_fixed_point(p, x0, s)?;
    if s.solvers.contains(&Solver::Gmres) {
        if s.m == 0 {
            bail!("GMRES needs a restart length m >= 1");
        }
        let sys = AffineSystem::new(p)?;
        let cfg = GmresConfig { restart: Some(s.m), tol: s.tol, max_iters: s.max_iters, ..GmresConfig::default() };
        let out = gmres_restarted(&sys, x0, &cfg)?;
        let mut record = out.record;
        if let Some(exact) = p.exact_solution() {
            // GMRES rows carry no iterates; the error column is filled only at the end
            if let Some(last) = record.rows.last_mut() {
                last.err_l2 = Some((&out.x - exact).norm());
            }
        }
        runs.push(Run { label: format!("gmres-m{}", s.m), record });
    }
    Ok(runs)
}

fn check_common(s: &SolverArgs) -> Result<()> {
    if s.solvers.is_empty() {
        bail!("at least one solver is required");
    }
    if s.norm.is_empty() {
        bail!("at least one norm is required");
    }
    if !(s.tol > 0.0 && s.tol.is_finite()) {
        bail!("--tol must be positive");
    }
    Ok(())
}

/// One AA step after k Picard steps; unlike the library routine a degenerate
/// window is tolerated and its dropped columns counted.
fn one_step_error(p: &PoissonProblem, k: usize, m: usize, wop: &WeightOperator) -> Result<(DVector<f64>, usize)> {
    let exact = p.exact_solution().context("Poisson reference solution")?;
    let mut acc = Anderson::new(&AAConfig::new(m).with_reg(0.0), wop.clone())?;
    let mut x = p.initial_guess();
    for j in 0..k {
        let g = p.apply(&x)?;
        if j + m >= k {
            acc.observe(&x, &g)?;
        }
        x = g;
    }
    let g = p.apply(&x)?;
    let out = acc.step(&x, &g)?;
    Ok((out.next - exact, out.dropped))
}

fn one_step_record(p: &PoissonProblem, m: usize, kmax: usize, norm: NormKind) -> Result<ConvergenceRecord> {
    let wop = WeightOperator::build(norm, p.dim(), p.h())?;
    let exact = p.exact_solution().context("Poisson reference solution")?;
    let mut rec = ConvergenceRecord::new();
    let mut first_drop = None;
    for k in m..=kmax {
        let (e, dropped) = one_step_error(p, k, m, &wop)?;
        if dropped > 0 && first_drop.is_none() {
            first_drop = Some(k);
        }
        let x = &exact + &e;
        let f = p.apply(&x)? - &x;
        rec.rows.push(IterationRow {
            iter: k + 1,
            res_l2: f.norm(),
            res_w: wop.norm(&f)?,
            err_l2: Some(e.norm()),
            lsq_res: None,
        });
    }
    if let Some(k) = first_drop {
        eprintln!("onestep-{norm}-m{m}: window rank-deficient from k = {k}, dependent columns dropped");
    }
    rec.status = Termination::Converged;
    Ok(rec)
}

fn poisson(a: PoissonArgs) -> Result<i32> {
    check_common(&a.solver)?;
    let variant = match a.variant {
        Variant::Jacobi => PoissonVariant::WeightedJacobi,
        Variant::Richardson => PoissonVariant::Richardson,
    };
    let p = PoissonProblem::new(variant, a.n)?;
    let prefix = format!("poisson-{variant}");
    let mut runs = run_linear(&p, &p.initial_guess(), &a.solver)?;
    let code = report::finish(&a.solver.out, &prefix, &runs, a.solver.tol)?;
    if let Some(kmax) = a.one_step {
        let m = a.solver.m;
        if m == 0 || kmax < m {
            bail!("--one-step needs K >= m >= 1");
        }
        runs.clear();
        for &norm in &a.solver.norm {
            let record = one_step_record(&p, m, kmax, norm)?;
            let path = report::write_csv(&a.solver.out, &format!("{prefix}-onestep-{norm}-m{m}"), &record)?;
            println!("onestep-{norm}-m{m}: {} rows written to {}", record.rows.len(), path.display());
        }
    }
    Ok(code)
}

fn nlh(a: NlhArgs) -> Result<i32> {
    check_common(&a.solver)?;
    if a.solver.solvers.contains(&Solver::Gmres) {
        bail!("GMRES needs a linear problem");
    }
    let p = NonlinearHelmholtzProblem::new(a.k0)?;
    let runs = run_fixed_point(&p, &p.initial_guess(), &a.solver)?;
    report::finish(&a.solver.out, "nlh", &runs, a.solver.tol)
}

fn line_problem(n: usize, omega: Option<f64>, speed: WaveSpeed, cfl: f64) -> Result<WaveHoltzProblem> {
    Ok(WaveHoltzProblem::line(n, omega.unwrap_or_else(WaveHoltzProblem::line_omega), speed, cfl)?)
}

fn waveholtz1d(a: Wave1dArgs) -> Result<i32> {
    check_common(&a.solver)?;
    let p = line_problem(a.n, a.omega, a.speed, a.cfl)?.with_dense_reference(!a.no_reference);
    let runs = run_linear(&p, &p.initial_guess(), &a.solver)?;
    report::finish(&a.solver.out, &format!("waveholtz1d-{}", a.speed), &runs, a.solver.tol)
}

fn waveholtz2d(a: Wave2dArgs) -> Result<i32> {
    check_common(&a.solver)?;
    let p = WaveHoltzProblem::square(a.points, a.omega, a.cfl)?.with_dense_reference(a.reference);
    let runs = run_linear(&p, &p.initial_guess(), &a.solver)?;
    report::finish(&a.solver.out, "waveholtz2d", &runs, a.solver.tol)
}

fn theory_bound(a: BoundArgs) -> Result<i32> {
    let placement = match a.placement {
        PlacementArg::Random => Placement::Random(a.seed),
        PlacementArg::Equispaced => Placement::Equispaced,
        PlacementArg::Chebyshev => Placement::Chebyshev,
    };
    let mut spec = SpectrumSpec::new(a.n, a.a, a.b)?.with_placement(placement);
    let sigma = if a.norm == NormKind::L2 {
        None
    } else {
        spec = spec.with_basis(Basis::CosineModes);
        Some(sigma_for_norm(a.norm, a.n, spec.h))
    };
    let k = a.k.unwrap_or(a.m);
    let reports = verify_one_step_bound(&spec.with_trial(a.seed), k, a.m, a.trials, sigma.as_ref())?;
    let mut csv = String::from("trial,ratio,bound\n");
    for r in &reports {
        csv.push_str(&format!("{},{:e},{:e}\n", r.trial + a.seed, r.ratio, r.bound));
    }
    std::fs::create_dir_all(&a.out).with_context(|| format!("creating {}", a.out.display()))?;
    let path = a.out.join("theory-bound.csv");
    std::fs::write(&path, csv).with_context(|| format!("writing {}", path.display()))?;
    let worst = reports.iter().map(|r| r.ratio).fold(0.0, f64::max);
    let bound = reports[0].bound;
    let pass = reports.iter().all(|r| r.pass);
    println!(
        "theory-bound: max ratio {worst:e} over {} trials, bound C({}, {}, {}) = {bound:e}, {}",
        reports.len(),
        a.a,
        a.b,
        a.m,
        if pass { "holds" } else { "VIOLATED" }
    );
    Ok(if pass { 0 } else { 2 })
}

fn gmres_compare(mut a: CompareArgs) -> Result<i32> {
    a.solver.solvers = vec![Solver::Aa, Solver::Gmres];
    check_common(&a.solver)?;
    let s = &a.solver;
    let (runs, prefix) = match a.problem {
        CompareProblem::Waveholtz1d => {
            let p = line_problem(a.n.unwrap_or(WaveHoltzProblem::LINE_POINTS), a.omega, a.speed, a.cfl)?;
            (run_linear(&p, &p.initial_guess(), s)?, format!("compare-waveholtz1d-{}", a.speed))
        }
        CompareProblem::Waveholtz2d => {
            let points = a.n.unwrap_or(WaveHoltzProblem::SQUARE_POINTS);
            let p = WaveHoltzProblem::square(points, a.omega.unwrap_or(WaveHoltzProblem::SQUARE_OMEGA), a.cfl)?;
            (run_linear(&p, &p.initial_guess(), s)?, "compare-waveholtz2d".to_string())
        }
        CompareProblem::Jacobi | CompareProblem::Richardson => {
            let variant = match a.problem {
                CompareProblem::Jacobi => PoissonVariant::WeightedJacobi,
                _ => PoissonVariant::Richardson,
            };
            let p = PoissonProblem::new(variant, a.n.unwrap_or(63))?;
            (run_linear(&p, &p.initial_guess(), s)?, format!("compare-poisson-{variant}"))
        }
    };
    report::finish(&s.out, &prefix, &runs, s.tol)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let result = match cli.command {
        Command::Poisson(a) => poisson(a),
        Command::Nlh(a) => nlh(a),
        Command::Waveholtz1d(a) => waveholtz1d(a),
        Command::Waveholtz2d(a) => waveholtz2d(a),
        Command::TheoryBound(a) => theory_bound(a),
        Command::GmresCompare(a) => gmres_compare(a),
    };
    match result {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
