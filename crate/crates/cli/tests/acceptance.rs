//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.

use mpvlasov::config::Config;
use mpvlasov::scenario::{self, Outcome, Subcommand};
use mpvlasov_core::gridcore::{moment_quad, PhaseFn, PhaseGrid, SpatialFn, SpatialGrid};
use mpvlasov_core::kinetic::{
    decompose_components, decompose_f, field, matched_vlasov_rhs, moment_recursion, plasma_slots,
    vlasov_rhs, FieldMode, VlasovParams,
};
use mpvlasov_core::momvlasov::{div_sharp, matched_momvlasov_rhs, momvlasov_rhs, split_pi, OneFormGrid};
use mpvlasov_core::suites::gaussian;
use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::Instant;

const ALGEBRA_MIN_INSTANCES: usize = 100;
const ALGEBRA_BUDGET_S: f64 = 60.0;
const MATCHED_TOL: f64 = 1e-12;
const ADJOINT_TOL: f64 = 1e-8;
const FD4_BAND: (f64, f64) = (3.7, 4.3);
const STANDARD_FORM_TOL: f64 = 1e-6;
const FLUID_MASS_TOL: f64 = 1e-10;
const MIN_STEPS: usize = 1000;
const FREE_STREAMING_TOL: f64 = 1e-3;
const KINETIC_MASS_TOL: f64 = 1e-6;
const KINETIC_ENERGY_TOL: f64 = 1e-4;
const KINETIC_BUDGET_S: f64 = 120.0;
const CLOSED_FORM_TOL: f64 = 1e-6;
const KRONECKER_TOL: f64 = 1e-8;
const POISSON_MAP_TOL: f64 = 1e-4;
const SPLIT_TOL: f64 = 1e-6;
const INTERTWINE_TOL: f64 = 1e-5;
const INTERTWINE_MIN_ORDER: f64 = 3.0;

type Verdict = Result<String, String>;

fn cfg(text: &str) -> Config {
    Config::parse(text).unwrap_or_else(|e| panic!("acceptance config: {e}"))
}

fn run(cmd: Subcommand, config: &Config) -> Result<Outcome, String> {
    scenario::run(cmd, config).map_err(|e| format!("{cmd} failed: {e}"))
}

fn metric(out: &Outcome, name: &str) -> Result<f64, String> {
    out.metrics
        .get(name)
        .and_then(|v| v.as_f64())
        .ok_or_else(|| format!("missing metric {name}"))
}

fn require(ok: bool, detail: String) -> Verdict {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn exact_algebra() -> Verdict {
    let start = Instant::now();
    let out = run(Subcommand::VerifyAlgebra, &Config::default())?;
    let secs = start.elapsed().as_secs_f64();
    let instances = metric(&out, "instances")? as usize;
    let checks = metric(&out, "checks")?;
    require(
        out.violations.is_empty() && instances >= ALGEBRA_MIN_INSTANCES && secs <= ALGEBRA_BUDGET_S,
        format!(
            "{checks} exact checks over {instances} instances, {} failed, {secs:.1}s",
            out.violations.len()
        ),
    )
}

fn dual_run() -> Result<Outcome, String> {
    run(Subcommand::VerifyDual, &cfg("Nq = 64\nNp = 128\ndual_instances = 50"))
}

fn matched_vs_full(out: &Outcome) -> Verdict {
    let e = metric(out, "matched_vs_full")?;
    require(e <= MATCHED_TOL, format!("max relative gap {e:.2e} over 50 instances at Nq=64"))
}

fn adjointness(out: &Outcome) -> Verdict {
    let a = metric(out, "coad_adjointness")?;
    let j = metric(out, "j_adjointness")?;
    let order = metric(out, "fd4_order")?;
    require(
        a <= ADJOINT_TOL && j <= ADJOINT_TOL && (FD4_BAND.0..=FD4_BAND.1).contains(&order),
        format!("coadjoint {a:.2e}, one-form {j:.2e}, FD4 order {order:.2}"),
    )
}

fn fluid_moments() -> Verdict {
    let out = run(
        Subcommand::RunMoments,
        &cfg("L = 2*pi\nNq = 256\nalpha = 0.05\ndt = 0.002\nt_end = 2\nbernoulli_half_factor = true"),
    )?;
    let gap = metric(&out, "lp_vs_euler_gap")?;
    let residual = metric(&out, "standard_form_residual")?;
    let mass = metric(&out, "mass_drift")?;
    let steps = metric(&out, "steps")? as usize;
    let printed = run(Subcommand::RunMoments, &cfg("L = 2*pi\nNq = 256\nalpha = 0.05\ndt = 0.002\nt_end = 0.002"))?;
    let printed = metric(&printed, "standard_form_residual")?;
    require(
        gap == 0.0 && residual <= STANDARD_FORM_TOL && mass <= FLUID_MASS_TOL && steps >= MIN_STEPS,
        format!(
            "identity gap {gap:e}, standard-form residual {residual:.2e} (printed Bernoulli form: {printed:.2e}), mass drift {mass:.2e} over {steps} steps"
        ),
    )
}

fn kinetic_runs() -> Verdict {
    let start = Instant::now();
    let free = run(
        Subcommand::RunVlasov,
        &cfg("Nq = 128\nNp = 128\nfield_mode = prescribed\nalpha = 0.05\ndt = 0.05\nt_end = 1"),
    )?;
    let stream = metric(&free, "free_streaming_linf")?;
    let sc = run(Subcommand::RunVlasov, &cfg("Nq = 64\nNp = 128\nalpha = 0.05\ndt = 0.01\nt_end = 10"))?;
    let secs = start.elapsed().as_secs_f64();
    let mass = metric(&sc, "mass_drift")?;
    let energy = metric(&sc, "energy_drift")?;
    let steps = metric(&sc, "steps")? as usize;
    require(
        stream <= FREE_STREAMING_TOL
            && mass <= KINETIC_MASS_TOL
            && energy <= KINETIC_ENERGY_TOL
            && steps >= MIN_STEPS
            && sc.violations.is_empty()
            && secs <= KINETIC_BUDGET_S,
        format!(
            "free streaming {stream:.2e}; {steps} self-consistent steps: mass {mass:.2e}, energy {energy:.2e}; {secs:.1}s"
        ),
    )
}

fn phase_grid(nq: usize, np: usize) -> PhaseGrid {
    PhaseGrid::new(SpatialGrid::new(4.0 * PI, nq).unwrap(), 8.0, np).unwrap()
}

fn kronecker() -> Verdict {
    let fine = phase_grid(8, 1024);
    let g = PhaseFn::from_fn(fine, |_, p| gaussian(p));
    let e1 = PhaseFn::from_fn(fine, |_, p| (p * p - 1.0) * gaussian(p));
    let e2 = PhaseFn::from_fn(fine, |_, p| (p.powi(4) - 5.0 * p * p + 2.0) * gaussian(p) / 2.0);
    let closed = (&moment_recursion(&g, 1).map_err(|e| e.to_string())? - &e1)
        .max_abs()
        .max((&moment_recursion(&g, 2).map_err(|e| e.to_string())? - &e2).max_abs());

    let grid = phase_grid(8, 256);
    let k = 4;
    let mut worst: f64 = 0.0;
    for drift in [0.0, 0.4] {
        let f = PhaseFn::from_fn(grid, |q, p| (1.0 + 0.3 * (0.5 * q).cos()) * gaussian(p - drift));
        let comps = decompose_components(&f, k).map_err(|e| e.to_string())?;
        for (m, c) in comps.iter().enumerate() {
            for j in 0..=k {
                let mu = moment_quad(c, j as i64).map_err(|e| e.to_string())?;
                let target = if j == m {
                    moment_quad(&f, j as i64).map_err(|e| e.to_string())?
                } else {
                    SpatialFn::zeros(grid.spatial())
                };
                worst = worst.max((&mu - &target).max_abs());
            }
        }
    }
    require(
        closed <= CLOSED_FORM_TOL && worst <= KRONECKER_TOL,
        format!("closed forms {closed:.2e} at Np=1024, Kronecker moments {worst:.2e} at Np=256, m <= {k}"),
    )
}

fn poisson_map() -> Verdict {
    let out = run(Subcommand::CheckPoissonMap, &cfg("Nq = 64\nNp = 256"))?;
    let e = metric(&out, "poisson_map_max_error")?;
    let slope = out
        .metrics
        .get("poisson_map_order_5")
        .and_then(|v| v.as_f64())
        .map_or("n/a".to_string(), |s| format!("{s:.2}"));
    require(
        e <= POISSON_MAP_TOL && out.violations.is_empty(),
        format!("orders 0..4 max relative error {e:.2e}, refinement slope (order 5) {slope}, {} violations", out.violations.len()),
    )
}

fn rel(a: &PhaseFn, b: &PhaseFn) -> f64 {
    let scale = a.max_abs().max(b.max_abs());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).max_abs() / scale
    }
}

fn split_and_intertwine() -> Verdict {
    let grid = phase_grid(64, 256);
    let phi = SpatialFn::from_fn(grid.spatial(), |q| 0.2 * (0.5 * q).sin());
    let params = VlasovParams::new(1.0, 1.0, FieldMode::Prescribed(phi.clone())).map_err(|e| e.to_string())?;
    let slots = plasma_slots(&phi, &params);
    let err = |e: mpvlasov_core::Error| e.to_string();

    let f = PhaseFn::from_fn(grid, |q, p| (1.0 + 0.2 * (0.5 * q).cos()) * gaussian(p - 0.3));
    let d = decompose_f(&f, 4).map_err(err)?;
    let rebuilt = rel(&(&(&d.f_s + &d.f_n) + &d.residual), &f);
    let split = matched_vlasov_rhs(&d.components, &slots, params.scheme).map_err(err)?;
    let total = &(&split.ds + &split.dn) + &split.moment_null;
    let phi_now = field(&f, &params).map_err(err)?;
    let full = vlasov_rhs(&(&d.f_s + &d.f_n), &phi_now, &params).map_err(err)?;
    let kinetic = rel(&total, &full);

    let pi = OneFormGrid::new(
        PhaseFn::from_fn(grid, |q, p| 0.2 * (0.5 * q).sin() * gaussian(p)),
        PhaseFn::from_fn(grid, |q, p| (1.0 + 0.2 * (0.5 * q).cos()) * gaussian(p)),
    )
    .map_err(err)?;
    let ps = split_pi(&pi, 4, params.scheme).map_err(err)?;
    let out = matched_momvlasov_rhs(&ps.components, &slots, params.scheme).map_err(err)?;
    let total = out.ds.plus(&out.dn).plus(&out.moment_null);
    let unsplit = momvlasov_rhs(&ps.pi_s.plus(&ps.pi_n), &params).map_err(err)?;
    let one_form = rel(
        &div_sharp(&total, params.scheme).map_err(err)?,
        &div_sharp(&unsplit, params.scheme).map_err(err)?,
    );
    let sums = rebuilt.max(kinetic).max(one_form);

    let it = run(Subcommand::CheckIntertwine, &cfg("Nq = 64\nNp = 128"))?;
    let e = metric(&it, "intertwine_error")?;
    let order = metric(&it, "intertwine_order")?;
    require(
        sums <= SPLIT_TOL && e <= INTERTWINE_TOL && order >= INTERTWINE_MIN_ORDER,
        format!("split sums {sums:.2e}, intertwining {e:.2e} at Np=256 with order {order:.2}"),
    )
}

fn files_under(threads: usize) -> Result<Vec<(String, String)>, String> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| e.to_string())?;
    pool.install(|| {
        let mut files = Vec::new();
        let small = cfg("Nq = 32\nNp = 64\ndt = 0.05\nt_end = 0.5\ninstances = 20\ndual_instances = 5");
        for cmd in [
            Subcommand::VerifyAlgebra,
            Subcommand::VerifyDual,
            Subcommand::RunVlasov,
            Subcommand::RunMomvlasov,
            Subcommand::CheckPoissonMap,
        ] {
            files.extend(run(cmd, &small)?.files);
        }
        Ok(files)
    })
}

fn determinism() -> Verdict {
    let one = files_under(1)?;
    let four = files_under(4)?;
    let bytes: usize = one.iter().map(|(_, b)| b.len()).sum();
    let differing: Vec<&str> = one
        .iter()
        .zip(&four)
        .filter(|(a, b)| a != b)
        .map(|(a, _)| a.0.as_str())
        .collect();
    require(
        one.len() == four.len() && differing.is_empty(),
        format!("{} files, {bytes} bytes, identical under 1 and 4 threads; differing: {differing:?}", one.len()),
    )
}

fn main() -> ExitCode {
    let dual = dual_run();
    let criteria: Vec<(&str, Box<dyn Fn() -> Verdict>)> = vec![
        ("exact algebra identities", Box::new(exact_algebra)),
        ("matched split equals full coadjoint", Box::new(|| dual.as_ref().map_err(Clone::clone).and_then(matched_vs_full))),
        ("discrete adjointness and FD4 order", Box::new(|| dual.as_ref().map_err(Clone::clone).and_then(adjointness))),
        ("fluid moments match Euler", Box::new(fluid_moments)),
        ("kinetic runs conserve", Box::new(kinetic_runs)),
        ("Gaussian closed forms and Kronecker moments", Box::new(kronecker)),
        ("Poisson map", Box::new(poisson_map)),
        ("split sums and intertwining", Box::new(split_and_intertwine)),
        ("thread-count determinism", Box::new(determinism)),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        match check() {
            Ok(detail) => println!("PASS {} {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL {} {name}: {detail}", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
