//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
//! failure. Runs as a plain binary (no libtest harness) so the report is
//! always visible.

use std::process::ExitCode;
use std::time::Instant;

use active_flux::bench::problems::{blast, shock_density, shock_entropy, smooth_wave, sod};
use active_flux::bench::{convergence_study, ExactSolution, llf_reference_solve, registry_lookup, run, run_generic, si_study, Phase, ProblemSpec, RunOptions, RunRecord};
use active_flux::euler::{cons_to_prim, prim_to_cons, ConsState, GasModel, PrimState, StateVector};
use active_flux::grid::{DualSolution, OverlapGrid};
use active_flux::indicator::{si_classify, si_decay_rate, si_filter, si_raw, AlphaSelector};
use active_flux::postprocess::{apply_postprocess, CouplingConfig, Gate};
use active_flux::riemann::Wave;
use active_flux::scheme::DEFAULT_THETA;
use active_flux::Boundary;
use proptest::prelude::*;
use proptest::test_runner::{Config, TestRunner};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn sod_shock_position(spec: &ProblemSpec) -> f64 {
    let Some(ExactSolution::Riemann(sol)) = &spec.exact else {
        unreachable!("sod carries its Riemann solution")
    };
    match sol.right_wave {
        Wave::Shock { speed } => sol.problem.diaphragm + speed * spec.t_end,
        Wave::Rarefaction { .. } => unreachable!("sod has a right-moving shock"),
    }
}

fn cell_of(rec: &RunRecord, spec: &ProblemSpec, x: f64) -> usize {
    (((x - spec.x_min) / rec.dx).floor() as usize).min(rec.n - 1)
}

fn neighborhood(n: usize, center: usize, radius: usize) -> std::ops::RangeInclusive<usize> {
    center.saturating_sub(radius)..=(center + radius).min(n - 1)
}

fn criterion_1() -> Outcome {
    let rows = convergence_study(&smooth_wave(), &[64, 128, 256, 512], &RunOptions::default()).map_err(|e| e.to_string())?;
    let orders: Vec<f64> = rows.iter().filter_map(|r| r.order).collect();
    check(
        orders.len() == 3 && orders.iter().all(|&o| o >= 1.8),
        format!("smooth-wave L1 orders {orders:.3?} (need >= 1.8)"),
    )
}

fn criterion_2() -> Outcome {
    let study = si_study(&smooth_wave(), &[100, 200, 400, 800], &RunOptions::default()).map_err(|e| e.to_string())?;
    let rates = study.rates.clone();
    check(
        rates.len() == 3 && rates.iter().all(|r| r.is_some_and(|r| r >= 1.8)),
        format!("smooth-wave indicator decay rates {rates:.3?} (need >= 1.8)"),
    )
}

fn criterion_3() -> Outcome {
    let spec = sod();
    let xs = sod_shock_position(&spec);
    let coarse = run(&spec, &RunOptions::with_n(400)).map_err(|e| e.to_string())?;
    let fine = run(&spec, &RunOptions::with_n(1600)).map_err(|e| e.to_string())?;
    let shock_max = |rec: &RunRecord| {
        neighborhood(rec.n, cell_of(rec, &spec, xs), 3)
            .map(|i| rec.rows[i].eps_hat)
            .fold(0.0, f64::max)
    };
    let (a, b) = (shock_max(&coarse), shock_max(&fine));
    let ratio = a / b;
    let window = spec.smooth_window.expect("sod declares a smooth window");
    let rate = si_decay_rate(&coarse.eps_hat(), &fine.eps_hat(), window);
    check(
        ratio < 2.0 && ratio > 0.5 && rate.is_some_and(|r| r >= 1.5),
        format!("shock max eps_hat {a:.4e} -> {b:.4e} (ratio {ratio:.3}), smooth-window rate {rate:.3?} (need >= 1.5)"),
    )
}

fn criterion_4() -> Outcome {
    let spec = sod();
    let opts = RunOptions {
        k: Some(1.0),
        alpha: Some(AlphaSelector::Momentum),
        ..RunOptions::with_n(400)
    };
    let rec = run(&spec, &opts).map_err(|e| e.to_string())?;
    let shock = cell_of(&rec, &spec, sod_shock_position(&spec));
    let hit = neighborhood(rec.n, shock, 3).any(|i| rec.rows[i].flag);
    let fraction = rec.rows.iter().filter(|r| r.flag).count() as f64 / rec.n as f64;
    check(
        hit && fraction < 0.15,
        format!("shock cell {shock} flagged within 3 cells: {hit}; flagged fraction {:.2}%", 100.0 * fraction),
    )
}

/// Runs a benchmark, checking admissibility of both fields after every
/// completed step.
fn admissible_run(spec: &ProblemSpec, n: usize) -> Result<(RunRecord, f64, f64), String> {
    let g = spec.gas().map_err(|e| e.to_string())?;
    let (mut rho_min, mut p_min) = (f64::INFINITY, f64::INFINITY);
    let rec = run_generic::<f64>(spec, &RunOptions::with_n(n), &mut |phase, s| {
        if phase != Phase::PostProcess {
            return;
        }
        for w in &s.ubar {
            rho_min = rho_min.min(w.rho);
            p_min = p_min.min(cons_to_prim(w, &g).map(|v| v.p).unwrap_or(f64::NEG_INFINITY));
        }
        for v in &s.vbar {
            rho_min = rho_min.min(v.rho);
            p_min = p_min.min(v.p);
        }
    })
    .map_err(|e| format!("{} N={n}: {e}", spec.name))?;
    Ok((rec, rho_min, p_min))
}

/// Smallest density jump, relative to the largest, that counts as a
/// discontinuity in the N = 12800 first-order references. Smooth gradient
/// maxima stay below 1.5% there (the entropy waves behind the Shu-Osher
/// shock) while the smeared contacts of the blast wave exceed 2%.
const DISCONTINUITY_LEVEL: f64 = 0.02;

/// Centers of the discontinuities of a first-order reference: local maxima
/// of the density jump that reach [`DISCONTINUITY_LEVEL`] of the largest jump.
fn reference_discontinuities(rho: &[f64]) -> Vec<usize> {
    let jumps: Vec<f64> = rho.windows(2).map(|w| (w[1] - w[0]).abs()).collect();
    let top = jumps.iter().copied().fold(0.0, f64::max);
    (1..jumps.len() - 1)
        .filter(|&i| jumps[i] >= DISCONTINUITY_LEVEL * top && jumps[i] >= jumps[i - 1] && jumps[i] > jumps[i + 1])
        .collect()
}

const COVERAGE_RADIUS: usize = 8;

fn criterion_5() -> Outcome {
    let cases: Vec<(ProblemSpec, usize)> = [(shock_entropy(), 800), (shock_density(), 800), (blast(), 400)]
        .into_iter()
        .flat_map(|(spec, coarse)| [(spec.clone(), coarse), (spec, 12800)])
        .collect();
    let results: Vec<Result<(bool, String), String>> = cases
        .par_iter()
        .map(|(spec, n)| {
            let n = *n;
            let t = Instant::now();
            let (rec, rho_min, p_min) = admissible_run(spec, n)?;
            let mut ok = rho_min > 0.0 && p_min > 0.0 && rec.mass_drift() <= 1e-10;
            let mut line = format!(
                "{} N={n}: {} steps, min rho {rho_min:.3e}, min p {p_min:.3e}, mass drift {:.2e}, {:.0?}",
                spec.name,
                rec.steps,
                rec.mass_drift(),
                t.elapsed()
            );
            if n == 12800 && spec.name != "shock-density" {
                let reference = llf_reference_solve(spec, n).map_err(|e| e.to_string())?;
                let rho: Vec<f64> = reference.iter().map(|w| w.rho).collect();
                let centers = reference_discontinuities(&rho);
                // a jump between cells i and i+1 is covered by a rough cell nearby
                let missed: Vec<usize> = centers
                    .iter()
                    .copied()
                    .filter(|&i| !neighborhood(n, i, COVERAGE_RADIUS).any(|j| rec.rows[j].flag))
                    .collect();
                ok &= missed.is_empty();
                line.push_str(&format!(
                    "; {} reference discontinuities, missed {:?}",
                    centers.len(),
                    missed.iter().map(|&i| rec.rows[i].x).collect::<Vec<_>>()
                ));
            }
            Ok((ok, line))
        })
        .collect();
    let mut ok = true;
    let mut lines = Vec::new();
    for r in results {
        let (good, line) = r?;
        ok &= good;
        lines.push(line);
    }
    check(ok, lines.join("\n    "))
}

fn criterion_6() -> Outcome {
    let rows = convergence_study(&sod(), &[200, 400, 800], &RunOptions::default()).map_err(|e| e.to_string())?;
    let errors: Vec<f64> = rows.iter().map(|r| r.l1_error).collect();
    check(
        errors[0] < 0.02 && errors.windows(2).all(|w| w[1] < w[0]),
        format!("sod L1 density errors {errors:.4?} (need < 0.02 at N=200, decreasing)"),
    )
}

fn random_state(rng: &mut ChaCha8Rng) -> PrimState<f64> {
    PrimState::new(
        10f64.powf(rng.gen_range(-1.0..1.0)),
        rng.gen_range(-5.0..5.0),
        10f64.powf(rng.gen_range(-1.0..2.0)),
    )
}

fn criterion_7() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let g = GasModel::new(1.4).unwrap();
    let mut worst = 0.0f64;
    let mut failures = 0;
    let cases = 1000;
    for case in 0..cases {
        let n = rng.gen_range(8..80);
        let bc = [Boundary::Periodic, Boundary::Outflow, Boundary::Reflective][case % 3];
        let grid = OverlapGrid::new(n, 0.0, rng.gen_range(0.5..4.0), bc).unwrap();
        // alternate between unrelated fields and perturbed consistent ones
        let base: Vec<PrimState<f64>> = (0..=n).map(|_| random_state(&mut rng)).collect();
        let vbar: Vec<PrimState<f64>> = if case % 2 == 0 {
            base.clone()
        } else {
            (0..=n).map(|k| if rng.gen_bool(0.5) { base[k] } else { random_state(&mut rng) }).collect()
        };
        let ubar: Vec<ConsState<f64>> = (0..n)
            .map(|i| {
                let mid = (base[i] + base[i + 1]) * 0.5;
                prim_to_cons(&if rng.gen_bool(0.2) { random_state(&mut rng) } else { mid }, &g).unwrap()
            })
            .collect();
        let sol = DualSolution::new(ubar, vbar, 0.0).unwrap();
        let gate = if case % 4 == 3 { Gate::Flagged } else { Gate::Everywhere };
        let flags: Vec<bool> = (0..n).map(|_| rng.gen_bool(0.3)).collect();
        let cfg = CouplingConfig::new(rng.gen_range(0.0..=1.0), gate).unwrap();
        let out = match apply_postprocess(&sol, &grid, &g, &cfg, DEFAULT_THETA, Some(&flags)) {
            Ok(out) => out,
            Err(e) => return Err(format!("case {case}: {e}")),
        };
        for c in 0..3 {
            let before: f64 = sol.ubar.iter().map(|w| w.to_array()[c]).sum::<f64>() * grid.dx;
            let after: f64 = out.ubar.iter().map(|w| w.to_array()[c]).sum::<f64>() * grid.dx;
            let scale: f64 = sol.ubar.iter().map(|w| w.to_array()[c].abs()).sum::<f64>() * grid.dx;
            let rel = (after - before).abs() / scale;
            worst = worst.max(rel);
            if rel > 1e-13 {
                failures += 1;
            }
        }
    }
    check(
        failures == 0,
        format!("{cases} randomized states, worst relative change {worst:.2e}, {failures} over 1e-13"),
    )
}

fn criterion_8() -> Outcome {
    let config = Config {
        cases: 1000,
        failure_persistence: None,
        ..Config::default()
    };
    let field = || prop::collection::vec(prop_oneof![Just(0.0), 0.0..1e3f64], 1..64);
    let mut report = Vec::new();

    let mut runner = TestRunner::new(config.clone());
    runner
        .run(&field(), |eps| {
            let hat = si_filter(&eps);
            let n = eps.len();
            for j in 0..n {
                let nb = [eps[j.saturating_sub(1)], eps[j], eps[(j + 1).min(n - 1)]];
                let lo = nb.iter().copied().fold(f64::INFINITY, f64::min);
                let hi = nb.iter().copied().fold(0.0, f64::max);
                prop_assert!(hat[j] >= lo * (1.0 - 1e-15) && hat[j] <= hi * (1.0 + 1e-15));
            }
            Ok(())
        })
        .map_err(|e| format!("convexity: {e}"))?;
    report.push("convexity");

    let mut runner = TestRunner::new(config.clone());
    runner
        .run(&(field(), -40i32..40, 0.1..10.0f64), |(eps, m, k)| {
            let hat = si_filter(&eps);
            let scaled: Vec<f64> = hat.iter().map(|x| x * 2f64.powi(m)).collect();
            prop_assert_eq!(si_classify(&hat, k).1, si_classify(&scaled, k).1);
            Ok(())
        })
        .map_err(|e| format!("scale covariance: {e}"))?;
    report.push("scale covariance");

    let mut runner = TestRunner::new(config.clone());
    runner
        .run(&(field(), 0.1..10.0f64, 0.0..10.0f64), |(eps, k1, dk)| {
            let hat = si_filter(&eps);
            let loose = si_classify(&hat, k1).1;
            let strict = si_classify(&hat, k1 + dk).1;
            prop_assert!(strict.iter().zip(&loose).all(|(s, l)| !s || *l));
            Ok(())
        })
        .map_err(|e| format!("k-monotonicity: {e}"))?;
    report.push("k-monotonicity");

    let g = GasModel::new(1.4).unwrap();
    let mut runner = TestRunner::new(config);
    let state = (0.1..10.0f64, -5.0..5.0f64, 0.1..100.0f64);
    runner
        .run(&(prop::collection::vec(state, 2..40), 0.1..10.0f64), |(states, k)| {
            // arbitrary staggered data with the primary field built from it
            let vbar: Vec<PrimState<f64>> = states.iter().map(|&(r, u, p)| PrimState::new(r, u, p)).collect();
            let n = vbar.len() - 1;
            let ubar: Vec<ConsState<f64>> = (0..n).map(|i| prim_to_cons(&((vbar[i] + vbar[i + 1]) * 0.5), &g).unwrap()).collect();
            let sol = DualSolution::new(ubar, vbar, 0.0).unwrap();
            for alpha in [AlphaSelector::Density, AlphaSelector::Momentum, AlphaSelector::Energy] {
                let eps = si_raw(&sol, alpha, &g).unwrap();
                prop_assert!(eps.iter().all(|e| *e == 0.0));
                let hat = si_filter(&eps);
                prop_assert!(hat.iter().all(|e| *e == 0.0));
                prop_assert!(!si_classify(&hat, k).1.iter().any(|f| *f));
            }
            Ok(())
        })
        .map_err(|e| format!("zero fixed point: {e}"))?;
    report.push("zero fixed point");
    Ok(format!("1000 cases each: {}", report.join(", ")))
}

fn criterion_9() -> Outcome {
    let pins = [("shock-entropy", 1.0, 0.01), ("shock-density", 6.0, 0.2), ("blast", 1.2, 200.0)];
    let mut ok = true;
    let mut found = Vec::new();
    for (name, k, c) in pins {
        let spec = registry_lookup(name).map_err(|e| e.to_string())?;
        ok &= spec.k == k && spec.c_ref == c;
        found.push(format!("{name} K={} C={}", spec.k, spec.c_ref));
    }
    check(ok, found.join(", "))
}

fn main() -> ExitCode {
    // `cargo test -- --list` and filters are not meaningful here
    if std::env::args().any(|a| a == "--list") {
        return ExitCode::SUCCESS;
    }
    let criteria: [Criterion; 9] = [
        ("1 second-order convergence", criterion_1),
        ("2 indicator decay in smooth flow", criterion_2),
        ("3 indicator stays O(1) at shocks", criterion_3),
        ("4 shock detection", criterion_4),
        ("5 benchmarks at paper resolutions", criterion_5),
        ("6 Sod accuracy", criterion_6),
        ("7 post-processing conservation", criterion_7),
        ("8 indicator properties", criterion_8),
        ("9 registry constants", criterion_9),
    ];
    // comma-separated criterion numbers, for iterating on a subset
    let only: Option<Vec<String>> = std::env::var("ACCEPTANCE_ONLY")
        .ok()
        .map(|v| v.split(',').map(|s| s.trim().to_string()).collect());
    let mut failed = 0;
    let mut ran = 0;
    for (name, f) in criteria {
        let number = name.split(' ').next().unwrap_or_default();
        if only.as_ref().is_some_and(|o| !o.iter().any(|x| x == number)) {
            continue;
        }
        ran += 1;
        let t = Instant::now();
        let outcome = f();
        let (tag, detail) = match &outcome {
            Ok(d) => ("PASS", d),
            Err(d) => ("FAIL", d),
        };
        println!("criterion {name}: {tag} [{:.1?}]\n    {detail}", t.elapsed());
        failed += usize::from(outcome.is_err());
    }
    println!("acceptance: {} of {ran} criteria passed", ran - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
