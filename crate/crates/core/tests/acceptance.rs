//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.

use std::process::{Command, ExitCode};
use std::time::Instant;

use bernstein_calculus::bernstein::Base;
use bernstein_calculus::calculus::{apply, spectral_oracle};
use bernstein_calculus::operators::{operator_norm, FactorySpec, IdealNorm, TupleFactory};
use bernstein_calculus::verify::{
    check_cor2_lipschitz, check_cor3_stable, check_thm1, check_thm6_frechet, laplace_identity_residual, run_campaign,
    spectral_shift_diagonal, BoundReport, CampaignConfig, CheckerKind, Outcome,
};
use bernstein_calculus::{BernsteinFunction, GeneratorTuple, QuadratureSpec};

type Verdict = Result<String, String>;
type Criterion = (&'static str, Box<dyn Fn() -> Verdict>);

const BASES: [&str; 6] = ["sqrt", "alpha:0.25", "alpha:0.75", "log", "rat", "poisson"];
const ALL_NORMS: [IdealNorm; 4] = [IdealNorm::Operator, IdealNorm::Trace, IdealNorm::Frobenius, IdealNorm::Schatten(3.0)];

fn diag(e: &[f64]) -> GeneratorTuple {
    GeneratorTuple::diagonal_real(&[e]).unwrap()
}

fn psi(name: &str) -> BernsteinFunction {
    BernsteinFunction::from_name(name).unwrap()
}

fn campaign(checkers: &[CheckerKind], psis: &[&str], trials: usize, norms: &[IdealNorm]) -> CampaignConfig {
    CampaignConfig {
        checkers: checkers.to_vec(),
        psis: psis.iter().map(|s| s.to_string()).collect(),
        trials,
        norms: norms.to_vec(),
        ..Default::default()
    }
}

/// Rows named in `names` that are not gated, and those among them that fail.
fn tally<'a>(reports: &'a [BoundReport], names: &[&str]) -> (usize, Vec<&'a BoundReport>) {
    let rows: Vec<&BoundReport> =
        reports.iter().filter(|r| names.contains(&r.name.as_str()) && r.outcome() != Outcome::Gated).collect();
    let failed = rows.iter().copied().filter(|r| !r.pass).collect();
    (rows.len(), failed)
}

fn zero_violations(config: &CampaignConfig, names: &[&str], at_least: usize) -> Verdict {
    let c = run_campaign(config).map_err(|e| e.to_string())?;
    if let Some((k, s, m)) = c.errors.first() {
        return Err(format!("{k} seed {s}: {m}"));
    }
    let (checked, failed) = tally(&c.reports, names);
    if let Some(f) = failed.first() {
        return Err(format!("{} violations of {checked}; first {} lhs {:e} rhs {:e} at {}", failed.len(), f.name, f.lhs, f.rhs, f.instance_digest));
    }
    if checked < at_least {
        return Err(format!("only {checked} checked rows for {names:?}, expected ≥ {at_least}"));
    }
    Ok(format!("{checked} rows of {names:?}, 0 violations"))
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond { Ok(()) } else { Err(msg()) }
}

fn catalog_at(n: usize) -> Vec<BernsteinFunction> {
    let bases: Vec<Base> = BASES.iter().map(|b| psi(b).terms()[0].base).collect();
    if n == 1 {
        return BASES.iter().map(|b| psi(b)).collect();
    }
    let mut out = Vec::new();
    for &b in &bases {
        out.push(BernsteinFunction::axis_sum(&vec![b; n]));
        out.push(BernsteinFunction::diagonal(b, n));
    }
    out.push(BernsteinFunction::axis_sum(&bases[..n]));
    out
}

fn c1_scalar_representation() -> Verdict {
    let grid = [-10.0, -5.0, -2.0, -1.0, -0.5, -0.1, -0.01];
    let spec = QuadratureSpec::scalar();
    let mut worst: f64 = 0.0;
    let mut count = 0;
    for n in 1..=3 {
        for f in catalog_at(n) {
            for k in 0..grid.len().pow(n as u32) {
                let s: Vec<f64> = (0..n).map(|j| grid[(k / grid.len().pow(j as u32)) % grid.len()]).collect();
                let e = f.evaluate_with_quadrature(&s, &spec).map_err(|e| format!("{} at {s:?}: {e}", f.name()))?;
                ensure(e.gap <= 1e-8, || format!("{} at {s:?}: gap {:e}", f.name(), e.gap))?;
                worst = worst.max(e.gap);
                count += 1;
            }
        }
    }
    Ok(format!("{count} points, max gap {worst:.2e}"))
}

fn c2_oracle_equivalence() -> Verdict {
    let spec = QuadratureSpec::matrix();
    let mut worst: f64 = 0.0;
    let mut count = 0;
    for &base in &BASES {
        let b = psi(base).terms()[0].base;
        for n in 1..=3 {
            for d in [2, 4, 8] {
                for trial in 0..100u64 {
                    let f = match (n, trial % 2) {
                        (1, _) => psi(base),
                        (_, 0) => BernsteinFunction::axis_sum(&vec![b; n]),
                        _ => BernsteinFunction::diagonal(b, n),
                    };
                    let seed = 1000 * d as u64 + 100_000 * n as u64 + trial;
                    let mut fac = TupleFactory::new(seed);
                    let kappa = if trial % 2 == 0 { 1.0 } else { 5.0 };
                    let a = fac.tuple(&FactorySpec::new(n, d).kappa_max(kappa));
                    let r = apply(&f, &a, &spec).map_err(|e| format!("{} seed {seed}: {e}", f.name()))?;
                    let gap = r.oracle_residual.ok_or("missing oracle")?;
                    ensure(gap <= 1e-6, || format!("{} n={n} d={d} seed {seed}: gap {gap:e}", f.name()))?;
                    worst = worst.max(gap);
                    count += 1;
                }
            }
        }
    }
    Ok(format!("{count} tuples, max relative gap {worst:.2e}"))
}

fn c3_perturbation_bound() -> Verdict {
    let r = check_thm1(&psi("sqrt"), &diag(&[-1.0, -3.0]), &diag(&[-2.0, -1.0]), &QuadratureSpec::matrix())
        .map_err(|e| e.to_string())?;
    ensure((r.lhs - (3f64.sqrt() - 1.0)).abs() < 1e-8, || format!("worked lhs {}", r.lhs))?;
    ensure((r.rhs - 3.1639).abs() < 1e-4, || format!("worked rhs {}", r.rhs))?;
    let config = CampaignConfig { checkers: vec![CheckerKind::Thm1], trials: 500, ..Default::default() };
    let c = run_campaign(&config).map_err(|e| e.to_string())?;
    let mixed = c.reports.iter().filter(|r| r.name == "thm1").count();
    let summary = zero_violations(&config, &["thm1"], 500)?;
    Ok(format!("worked instance lhs {:.4} rhs {:.4}; {summary} over {mixed} instances", r.lhs, r.rhs))
}

fn c4_fractional_and_log() -> Verdict {
    let config = campaign(&[CheckerKind::Ex1], &["alpha:0.25", "sqrt", "alpha:0.75", "log"], 800, &[IdealNorm::Operator]);
    let c = run_campaign(&config).map_err(|e| e.to_string())?;
    for name in ["alpha:0.25", "sqrt", "alpha:0.75", "log"] {
        let n = c.reports.iter().filter(|r| r.instance_digest.contains(&format!("psi={name};"))).count();
        ensure(n >= 200, || format!("{name}: {n} instances"))?;
    }
    zero_violations(&config, &["ex1_alpha", "ex1_log"], 800)
}

fn c5_lipschitz_and_stable() -> Verdict {
    let config = campaign(&[CheckerKind::Cor2, CheckerKind::Cor3], &["log", "rat", "poisson", "sqrt", "alpha:0.25"], 200, &ALL_NORMS);
    let c = run_campaign(&config).map_err(|e| e.to_string())?;
    for norm in ALL_NORMS {
        let (cor2, _) = tally(&c.reports.iter().filter(|r| r.norms_used == norm).cloned().collect::<Vec<_>>(), &["cor2", "thm4"]);
        ensure(cor2 >= 100, || format!("{norm}: {cor2} Lipschitz rows"))?;
    }
    let gated = c
        .reports
        .iter()
        .filter(|r| (r.name == "cor2" || r.name == "thm4") && r.instance_digest.contains("psi=sqrt"))
        .all(|r| r.outcome() == Outcome::Gated);
    ensure(gated, || "fractional power not gated in the Lipschitz bound".into())?;
    let summary = zero_violations(&config, &["cor2", "thm4", "cor3", "cor8"], 200 * 4)?;
    let spec = QuadratureSpec::matrix();
    let sqrt = psi("sqrt");
    let rej = check_cor2_lipschitz(&sqrt, &diag(&[-1.0]), &diag(&[-2.0]), &[IdealNorm::Operator], &spec).map_err(|e| e.to_string())?;
    ensure(rej[0].outcome() == Outcome::Gated, || "sqrt accepted by Lipschitz bound".into())?;
    let acc = check_cor3_stable(&sqrt, &diag(&[-1.0]), &diag(&[-2.0]), &[IdealNorm::Operator], &spec).map_err(|e| e.to_string())?;
    ensure(acc[0].outcome() == Outcome::Pass && (acc[0].rhs - 0.5).abs() < 1e-8, || format!("{:?}", acc[0]))?;
    Ok(format!("{summary}; sqrt gated in cor2, accepted in cor3 at ω = −1 with rhs 0.5"))
}

fn c6_commutator_lemma() -> Verdict {
    let config = campaign(&[CheckerKind::Lemma1], &["rat"], 100, &ALL_NORMS);
    let c = run_campaign(&config).map_err(|e| e.to_string())?;
    for s in ["s=-2;", "s=-0.5;", "s=0.5;", "s=2;"] {
        let n = c.reports.iter().filter(|r| r.name == "lemma1" && format!("{};", r.instance_digest).contains(s)).count();
        ensure(n >= 25, || format!("{s} used {n} times"))?;
    }
    zero_violations(&config, &["lemma1", "cor9"], 100 * 5)
}

fn c7_commutator_bound() -> Verdict {
    let config = campaign(&[CheckerKind::Thm5], &["rat", "log", "poisson"], 50, &ALL_NORMS);
    zero_violations(&config, &["thm5", "conjugation"], 50 * 5)
}

fn c8_frechet() -> Verdict {
    let rows = check_thm6_frechet(&psi("rat"), &diag(&[-1.0]), &diag(&[-1.1]), &[IdealNorm::Operator], &QuadratureSpec::matrix())
        .map_err(|e| e.to_string())?;
    let r0 = rows.iter().find(|r| r.name == "thm7").ok_or("no remainder row")?;
    let golden = -1.1 / 2.1 + 0.5 + 0.025;
    ensure((r0.lhs - golden).abs() <= 1e-9, || format!("R(0.1) = {:e}", r0.lhs))?;
    ensure((r0.lhs - 1.190e-3).abs() < 1e-6, || format!("R(0.1) = {:e}", r0.lhs))?;
    let config = campaign(&[CheckerKind::Frechet], &["rat", "log", "poisson"], 100, &ALL_NORMS);
    let c = run_campaign(&config).map_err(|e| e.to_string())?;
    let slopes: Vec<f64> = c.reports.iter().filter(|r| r.name == "thm6" && r.outcome() != Outcome::Gated).map(|r| r.rhs).collect();
    let min_slope = slopes.iter().copied().fold(f64::INFINITY, f64::min);
    let summary = zero_violations(&config, &["thm6", "thm7"], 100 * 4 * 11)?;
    Ok(format!("R(0.1) = {:.6e}; {summary}; min slope {min_slope:.3}", r0.lhs))
}

fn c9_divided_difference() -> Verdict {
    let config = campaign(&[CheckerKind::Eq9], &["rat", "log", "poisson"], 100, &[IdealNorm::Operator]);
    let c = run_campaign(&config).map_err(|e| e.to_string())?;
    let sandwich = c.reports.iter().filter(|r| r.name == "eq9" && r.instance_digest.ends_with("form=sandwich")).count();
    ensure(sandwich >= 50, || format!("{sandwich} non-commuting pairs"))?;
    let summary = zero_violations(&config, &["eq9", "phi_diag"], 200)?;
    Ok(format!("{summary}; {sandwich} non-commuting pairs"))
}

fn c10_trace_formula() -> Verdict {
    let thm8 = zero_violations(&campaign(&[CheckerKind::Thm8], &["rat", "log", "poisson"], 100, &[IdealNorm::Operator]), &["thm8"], 100)?;
    let kernel = zero_violations(
        &campaign(&[CheckerKind::TraceKernel], &["rat"], 100, &[IdealNorm::Operator]),
        &["trace_kernel", "trace_kernel_bound", "contour", "contour_bound"],
        400,
    )?;
    let ssf = zero_violations(&campaign(&[CheckerKind::Ssf], &BASES, 100, &[IdealNorm::Operator]), &["ssf"], 100)?;
    let xi = spectral_shift_diagonal(&diag(&[-1.0]).mats()[0], &diag(&[-2.0]).mats()[0]).map_err(|e| e.to_string())?;
    let pairing = xi.pair(|t| 0.5 / t.sqrt());
    ensure((pairing - 0.414214).abs() < 1e-6, || format!("pairing {pairing}"))?;
    Ok(format!("{thm8}; {kernel}; {ssf}; sqrt shift pairing {pairing:.6}"))
}

fn c11_subordination() -> Verdict {
    let laplace = laplace_identity_residual(&QuadratureSpec::scalar()).map_err(|e| e.to_string())?;
    ensure(laplace <= 1e-8, || format!("Laplace identity residual {laplace:e}"))?;
    let config = campaign(&[CheckerKind::Subordination], &["poisson", "sqrt", "log", "rat"], 100, &[IdealNorm::Operator]);
    let c = run_campaign(&config).map_err(|e| e.to_string())?;
    let poisson = c.reports.iter().filter(|r| r.name == "subordination_law" && r.outcome() == Outcome::Pass && r.instance_digest.contains("psi=poisson")).count();
    ensure(poisson >= 1, || "no Poisson law rows".into())?;
    let summary = zero_violations(&config, &["subordination_law", "subordination_laplace", "semigroup_law", "generator_order"], 200)?;
    let a = TupleFactory::new(5).tuple(&FactorySpec::new(1, 3).kappa_max(2.0));
    let p = psi("poisson");
    let direct = spectral_oracle(&p, &a).map_err(|e| e.to_string())?;
    let quad = apply(&p, &a, &QuadratureSpec::matrix()).map_err(|e| e.to_string())?.value;
    ensure(operator_norm(&(direct - quad)) < 1e-8, || "Poisson generator mismatch".into())?;
    Ok(format!("Laplace residual {laplace:.1e}; {summary}"))
}

fn c12_end_to_end(started: Instant) -> Verdict {
    let dir = std::env::temp_dir().join(format!("bpcalc-acceptance-{}", std::process::id()));
    std::fs::create_dir_all(&dir).map_err(|e| e.to_string())?;
    let cfg = dir.join("default.cfg");
    std::fs::write(&cfg, "# default campaign\n").map_err(|e| e.to_string())?;
    let report = dir.join("report.jsonl");
    let t0 = Instant::now();
    let out = Command::new(env!("CARGO_BIN_EXE_bpcalc"))
        .arg("verify")
        .arg(&cfg)
        .arg("--out")
        .arg(&report)
        .output()
        .map_err(|e| e.to_string())?;
    let took = t0.elapsed().as_secs_f64();
    let stderr = String::from_utf8_lossy(&out.stderr).trim().to_string();
    let _ = std::fs::remove_dir_all(&dir);
    ensure(out.status.code() == Some(0), || format!("exit {:?}: {stderr}", out.status.code()))?;
    let total = started.elapsed().as_secs_f64();
    ensure(total < 900.0, || format!("suite took {total:.0} s"))?;
    Ok(format!("default verify exit 0 in {took:.1} s ({stderr}); suite so far {total:.0} s"))
}

fn main() -> ExitCode {
    let started = Instant::now();
    let criteria: Vec<Criterion> = vec![
        ("scalar representation", Box::new(c1_scalar_representation)),
        ("oracle equivalence", Box::new(c2_oracle_equivalence)),
        ("perturbation bound campaign", Box::new(c3_perturbation_bound)),
        ("fractional power and log bounds", Box::new(c4_fractional_and_log)),
        ("Lipschitz and stable bounds per norm", Box::new(c5_lipschitz_and_stable)),
        ("commutator lemma", Box::new(c6_commutator_lemma)),
        ("commutator bound", Box::new(c7_commutator_bound)),
        ("Frechet remainder", Box::new(c8_frechet)),
        ("divided difference identity", Box::new(c9_divided_difference)),
        ("trace formula", Box::new(c10_trace_formula)),
        ("subordination", Box::new(c11_subordination)),
        ("end to end", Box::new(move || c12_end_to_end(started))),
    ];
    let mut failures = 0;
    for (k, (title, run)) in criteria.iter().enumerate() {
        let t0 = Instant::now();
        let verdict = run();
        let secs = t0.elapsed().as_secs_f64();
        match verdict {
            Ok(msg) => println!("criterion {:>2} PASS [{secs:6.1} s] {title}: {msg}", k + 1),
            Err(msg) => {
                failures += 1;
                println!("criterion {:>2} FAIL [{secs:6.1} s] {title}: {msg}", k + 1);
            }
        }
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failures, criteria.len());
    if failures == 0 { ExitCode::SUCCESS } else { ExitCode::FAILURE }
}
