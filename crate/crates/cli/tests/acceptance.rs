//! Acceptance suite: every quantitative claim the toolkit makes, run
//! end-to-end at its stated tolerance. One line per criterion is printed
//! (`cargo test --test acceptance -- --nocapture` to see them all).
//!
//! Statistical gates use z = 4 combined standard errors unless a criterion
//! states an absolute tolerance. Every expected value is either exact
//! arithmetic, a closed-form oracle stated next to the assertion, or a
//! published reference with its own quoted precision.

use std::path::Path;
use std::process::Command;

use passage_core::bounds::{
    check_eta_lower, check_kappa_upper, check_lower_envelope_at_crossing,
    check_upper_envelope_at_crossing, stability_ratio, CheckConfig, Verdict,
};
use passage_core::estimate::{
    estimate_envelope, plugin_mean_a_of_t, refinement_sweep, sample_hitting_times,
};
use passage_core::experiments::{
    chi_max_harmonic_bound, min_iid_bound, orderstats_check, radial_max_bounds, Dependence,
    Marginal, OrderStatModel, RadialBoundsParams, SQRT_MAX_REFERENCE,
};
use passage_core::process::{exact_curve, CurveKind, NonNegDist};
use passage_core::renewal::{
    nbu_check, positive_part_counterexample, renewal_function, stationary_renewal,
    PositivePartParams, RenewalModel, SurvivalCurve,
};
use passage_core::stats::harmonic;
use passage_core::wald::{wald_decoupling_demo, StepDist, StoppingRule, WalkConfig};
use passage_core::{ProcessSpec, TimeGrid};

fn criterion(name: &str, ok: bool, details: &str) {
    println!("ACCEPTANCE {name}: {} — {details}", if ok { "PASS" } else { "FAIL" });
    assert!(ok, "{name}: {details}");
}

#[test]
fn criterion_01_sharpness_of_the_lower_bound() {
    // the indicator witness saturates E[a(T_r)] >= r/2 with equality;
    // the grid step is chosen so its small upward skeleton bias sits inside
    // the criterion's |margin| <= 4 SE window instead of straddling zero
    let cfg = CheckConfig::new(
        ProcessSpec::SharpIndicator { level: 1.0 },
        TimeGrid::with_step(2.0, 0.006).unwrap(),
        100_000,
        20260101,
    );
    let rep = check_lower_envelope_at_crossing(&cfg, 1.0).unwrap();
    let ok = (rep.rhs - 0.5).abs() <= 0.01
        && rep.verdict == Verdict::Pass
        && rep.margin.abs() <= 4.0 * rep.rhs_se;
    criterion(
        "01 sharpness",
        ok,
        &format!(
            "E[a(T_1)] = {:.4} (target 0.500 +- 0.01), margin {:.5} vs 4se {:.5}, verdict {:?}",
            rep.rhs,
            rep.margin,
            4.0 * rep.rhs_se,
            rep.verdict
        ),
    );
}

fn lower_bound_config(spec: &ProcessSpec, level: f64, seed: u64) -> CheckConfig {
    let grid = match spec {
        ProcessSpec::Ramp { .. } => TimeGrid::uniform(8.0, 201).unwrap(),
        ProcessSpec::SharpIndicator { .. } => TimeGrid::with_step(2.0, 0.04).unwrap(),
        ProcessSpec::LinearRandomSlope { .. } => TimeGrid::geometric(1e-3, 200.0, 300).unwrap(),
        ProcessSpec::AbsBrownian => {
            TimeGrid::geometric(1e-3, 12.0 * level * level + 5.0, 400).unwrap()
        }
        ProcessSpec::SquaredBrownian => {
            TimeGrid::geometric(1e-3, 12.0 * level + 5.0, 400).unwrap()
        }
        ProcessSpec::AbsSquaredMinusT => {
            TimeGrid::geometric(1e-3, 8.0 * level + 8.0, 400).unwrap()
        }
        ProcessSpec::PositivePartBrownian => TimeGrid::geometric(1e-3, 100.0, 400).unwrap(),
        ProcessSpec::BesselMax3d { .. } => {
            TimeGrid::geometric(1e-3, 10.0 * level * level + 5.0, 400).unwrap()
        }
        ProcessSpec::RenewalCount { .. } => TimeGrid::uniform(40.0, 401).unwrap(),
        ProcessSpec::BrownianMotion => unreachable!("not part of the non-negative roster"),
    };
    let n_paths = if matches!(spec, ProcessSpec::SharpIndicator { .. }) { 2000 } else { 1500 };
    CheckConfig::new(spec.clone(), grid, n_paths, seed)
}

#[test]
fn criterion_02_universal_lower_bound_across_the_zoo() {
    // the sharpness witness tracks the query level by construction
    let levels = [0.25, 0.5, 1.0, 2.0, 4.0];
    let mut passes = 0usize;
    let mut fails = 0usize;
    let mut total = 0usize;
    let mut worst = String::new();
    for base in ProcessSpec::roster() {
        if !base.flags().non_negative {
            continue;
        }
        for &level in &levels {
            let spec = match base {
                ProcessSpec::SharpIndicator { .. } => ProcessSpec::SharpIndicator { level },
                ProcessSpec::BesselMax3d { .. } => ProcessSpec::BesselMax3d { spheres: 2 },
                ref other => other.clone(),
            };
            for rep in 0..20u64 {
                let cfg = lower_bound_config(&spec, level, 31_000 + rep);
                let report = check_lower_envelope_at_crossing(&cfg, level).unwrap();
                total += 1;
                match report.verdict {
                    Verdict::Pass => passes += 1,
                    Verdict::Fail => {
                        fails += 1;
                        worst = format!("{spec} at level {level} rep {rep}: {report:?}");
                    }
                    _ => {
                        worst = format!("{spec} at level {level} rep {rep}: {:?}", report.verdict);
                    }
                }
            }
        }
    }
    let rate = passes as f64 / total as f64;
    criterion(
        "02 universal lower bound",
        fails == 0 && rate >= 0.99,
        &format!("{passes}/{total} PASS ({:.2}%), {fails} FAIL; last non-pass: {worst}", 100.0 * rate),
    );
}

#[test]
fn criterion_03_abs_brownian_closed_forms() {
    // oracle: expected crossing time of |W| at level 1 is exactly 1
    let hit_grid = TimeGrid::with_step(20.0, 5e-4).unwrap();
    let spec = ProcessSpec::AbsBrownian;
    let batch = sample_hitting_times(&spec, &hit_grid, 1.0, 100_000, 20260301).unwrap();
    let mean = batch.mean_tau();
    let hit_ok = (mean.value - 1.0).abs() < 0.05 && batch.censored_fraction == 0.0;

    // kappa at t = 1: sqrt(2/pi) = 0.7979
    let kappa_grid = TimeGrid::with_step(20.0, 1e-3).unwrap();
    let kappa =
        estimate_envelope(&spec, &kappa_grid, 100_000, CurveKind::Kappa, 20260302).unwrap();
    let kappa_ok = (kappa.eval(1.0) - 0.798).abs() <= 0.01;

    // the computable upper bound with the exact curve: kappa^-1(2) = 2 pi
    let cfg = CheckConfig::new(spec.clone(), hit_grid, 100_000, 20260303);
    let upper = check_kappa_upper(&cfg, 1.0).unwrap();
    let upper_ok =
        upper.verdict == Verdict::Pass && (upper.rhs - 2.0 * std::f64::consts::PI).abs() < 1e-9;

    // refinement shows the skeleton bias dissolving monotonically
    let grids = vec![
        TimeGrid::with_step(20.0, 0.1).unwrap(),
        TimeGrid::with_step(20.0, 0.01).unwrap(),
        TimeGrid::with_step(20.0, 0.001).unwrap(),
    ];
    let rows = refinement_sweep(&spec, 1.0, &grids, 1.0, 1500, 20260304).unwrap();
    let refine_ok = rows[0].mean_tau.value > rows[1].mean_tau.value
        && rows[1].mean_tau.value > rows[2].mean_tau.value
        && (rows[2].mean_tau.value - 1.0).abs() < 0.08;

    criterion(
        "03 abs-brownian closed forms",
        hit_ok && kappa_ok && upper_ok && refine_ok,
        &format!(
            "E[T_1] = {:.4} (5% of 1), kappa(1) = {:.4} (0.798 +- 0.01), upper rhs = {:.4} (2pi), refinement {:.3} > {:.3} > {:.3}",
            mean.value,
            kappa.eval(1.0),
            upper.rhs,
            rows[0].mean_tau.value,
            rows[1].mean_tau.value,
            rows[2].mean_tau.value,
        ),
    );
}

#[test]
fn criterion_04_submartingale_bound_for_compensated_square() {
    // eta(t) = sqrt(8/(pi e)) t gives E[T_1] >= 0.5 sqrt(pi e / 8) ~ 0.5116
    let grid = TimeGrid::with_step(15.0, 1e-3).unwrap();
    let spec = ProcessSpec::AbsSquaredMinusT;
    let batch = sample_hitting_times(&spec, &grid, 1.0, 20_000, 20260401).unwrap();
    let mean = batch.mean_tau();
    let floor = 0.5 * (std::f64::consts::PI * std::f64::consts::E / 8.0).sqrt();
    let mean_ok = mean.value >= floor - 4.0 * mean.se;

    let cfg = CheckConfig::new(spec, grid, 20_000, 20260402);
    let rep = check_eta_lower(&cfg, 1.0).unwrap();
    criterion(
        "04 submartingale lower bound",
        mean_ok && rep.verdict == Verdict::Pass,
        &format!(
            "E[T_1] = {:.4} >= {floor:.4} - 4se; eta check lhs {:.3} rhs {:.3} {:?}",
            mean.value, rep.lhs, rep.rhs, rep.verdict
        ),
    );
}

#[test]
fn criterion_05_sqrt_max_table_via_cli() {
    let dir = tempfile::tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_passage"))
        .args([
            "table1",
            "--reps",
            "100000",
            "--seed",
            "20260551",
            "--out",
            dir.path().to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert!(out.status.success(), "{out:?}");
    let csv = std::fs::read_to_string(dir.path().join("table1.csv")).unwrap();
    let rows: Vec<(usize, f64, f64)> = csv
        .lines()
        .skip(1)
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            (f[0].parse().unwrap(), f[1].parse().unwrap(), f[2].parse().unwrap())
        })
        .collect();
    assert_eq!(rows.len(), 12);

    let mut ok = true;
    let mut details = String::new();
    for (i, &(d, mean, se)) in rows.iter().enumerate() {
        let (ref_d, reference) = SQRT_MAX_REFERENCE[i];
        assert_eq!(d, ref_d);
        // the reference was produced with 10^4 replicates; estimate its own
        // error from our measured spread at the matching sample size
        let reference_se = se * (100_000f64 / 10_000.0).sqrt();
        let tol = (5.0 * (se * se + reference_se * reference_se).sqrt()).max(0.03);
        if (mean - reference).abs() > tol {
            ok = false;
            details = format!("d={d}: {mean:.4} vs {reference} (tol {tol:.4})");
        }
    }
    let monotone = rows.windows(2).all(|w| w[1].1 >= w[0].1);
    criterion(
        "05 sqrt-max table",
        ok && monotone,
        &format!(
            "12 entries within max(0.03, 5 se); exact monotonicity {}; {}",
            monotone,
            if details.is_empty() { "all matched" } else { &details }
        ),
    );
}

#[test]
fn criterion_06_chi_max_harmonic_bound() {
    let mut all_ok = true;
    let mut summary = String::new();
    for d in [1usize, 2, 5, 10, 50, 100] {
        let rep = chi_max_harmonic_bound(d, 100_000, 20260600 + d as u64, 4.0).unwrap();
        let ok = rep.lhs <= rep.rhs + 4.0 * rep.lhs_se;
        all_ok &= ok;
        summary.push_str(&format!("d={d}: {:.3} <= {:.3}; ", rep.lhs, rep.rhs));
    }
    criterion("06 chi-max harmonic bound", all_ok, &summary);
}

#[test]
fn criterion_07_radial_two_sided_bounds() {
    let mut all_ok = true;
    let mut summary = String::new();
    for d in [1usize, 5, 10] {
        let t_max = if d == 1 { 5.0 } else { 3.0 };
        let params = RadialBoundsParams {
            spheres: d,
            level: 1.0,
            grid: TimeGrid::with_step(t_max, 1e-3).unwrap(),
            n_paths: 20_000,
            n_moment_reps: 100_000,
            master_seed: 20260700 + d as u64,
            z_crit: 4.0,
        };
        let bundle = radial_max_bounds(&params).unwrap();
        let by_name = |n: &str| bundle.reports.iter().find(|r| r.name == n).unwrap();
        let lower_moment = by_name("radial_lower_moment");
        let lower_harmonic = by_name("radial_lower_harmonic");
        let upper = by_name("radial_upper_sqrt_moment");

        let bracket_ok =
            lower_moment.verdict == Verdict::Pass && upper.verdict == Verdict::Pass;
        // the harmonic-sum bound can only be weaker than the moment bound;
        // at d = 1 the two coincide exactly, so the computed comparison
        // carries the moment estimate's own standard error
        let ordering_ok = lower_harmonic.lhs <= lower_moment.lhs + 4.0 * lower_moment.lhs_se
            && lower_harmonic.verdict == Verdict::Pass;

        let min_iid = min_iid_bound(&params).unwrap();
        let min_iid_ok =
            min_iid.verdict == Verdict::Pass && min_iid.lhs <= lower_harmonic.lhs + 1e-12;

        all_ok &= bracket_ok && ordering_ok && min_iid_ok;
        summary.push_str(&format!(
            "d={d}: E[T] = {:.4} in [{:.4}, {:.4}], harmonic {:.4}, min-iid {:.4}; ",
            bundle.mean_hitting.value, lower_moment.lhs, upper.rhs, lower_harmonic.lhs, min_iid.lhs
        ));
    }
    criterion("07 radial two-sided bounds", all_ok, &summary);
}

#[test]
fn criterion_08_stability_of_the_envelope_clock() {
    let levels = [0.5, 1.0, 2.0, 4.0];
    let mut all_ok = true;
    let mut summary = String::new();
    let configs = [
        (ProcessSpec::AbsBrownian, TimeGrid::geometric(1e-3, 150.0, 500).unwrap()),
        (ProcessSpec::BesselMax3d { spheres: 1 }, TimeGrid::geometric(1e-3, 40.0, 500).unwrap()),
    ];
    for (spec, grid) in configs {
        let cfg = CheckConfig::new(spec.clone(), grid, 10_000, 20260800);
        let rows = stability_ratio(&cfg, &levels).unwrap();
        for row in rows {
            let ok = row.lower_ok && row.upper_ok == Some(true);
            all_ok &= ok;
            summary.push_str(&format!("{spec} r={}: {:.3}; ", row.level, row.ratio));
        }
    }
    criterion("08 stability ratio in [-1/2, 1]", all_ok, &summary);
}

#[test]
fn criterion_09_renewal_machinery() {
    // Poisson counts make the stationary comparison an equality: M(5) = 5
    let model = RenewalModel::from_dist(NonNegDist::Exponential { rate: 1.0 }, 10.0).unwrap();
    let est = renewal_function(&model, 5.0, 100_000, 20260901).unwrap();
    let m_ok = (est.m_hat - 5.0).abs() <= 0.05;

    // exponential survival is the fixed point of the tail-integral transform
    let support: Vec<f64> = (0..2801).map(|i| 14.0 * i as f64 / 2800.0).collect();
    let values: Vec<f64> = support.iter().map(|t| (-t).exp()).collect();
    let exp_curve = SurvivalCurve::from_points(support, values).unwrap();
    let st = stationary_renewal(&exp_curve, 1.0).unwrap();
    let fixed_point_err = exp_curve
        .values()
        .iter()
        .zip(st.curve.values())
        .map(|(f, g)| (f - g).abs())
        .fold(0.0_f64, f64::max);
    let fixed_ok = fixed_point_err < 1e-3;

    // crossing times of |W| are new-better-than-used
    let grid = TimeGrid::with_step(12.0, 2e-3).unwrap();
    let batch =
        sample_hitting_times(&ProcessSpec::AbsBrownian, &grid, 1.0, 20_000, 20260902).unwrap();
    let crossing_curve = SurvivalCurve::from_samples(&batch.taus_with_horizon()).unwrap();
    let nbu = nbu_check(&crossing_curve, None, None);

    // the heavy-tailed control case must trip the detector
    let pareto = NonNegDist::Pareto { alpha: 2.0 };
    let mut rng = passage_core::StreamKey::new(20260903, 0, 0).rng();
    let samples: Vec<f64> = (0..100_000).map(|_| pareto.sample(&mut rng)).collect();
    let pareto_curve = SurvivalCurve::from_samples(&samples).unwrap();
    let pareto_nbu = nbu_check(&pareto_curve, None, None);

    criterion(
        "09 renewal machinery",
        m_ok && fixed_ok && nbu.holds && !pareto_nbu.holds,
        &format!(
            "M(5) = {:.3} (+-0.05), fixed-point err {fixed_point_err:.2e} (<1e-3), crossing NBU {}, pareto NBU violated {}",
            est.m_hat, nbu.holds, !pareto_nbu.holds
        ),
    );
}

#[test]
fn criterion_10_positive_part_counterexample() {
    let p = PositivePartParams::new(1.0, 20261001);
    let rep = positive_part_counterexample(&p).unwrap();

    // reflection-principle oracle: median of T_1 is (1/z_0.75)^2 = 2.198
    let median_ok = (rep.median_tau - 2.20).abs() <= 0.05;
    let increasing = rep.divergence.windows(2).all(|w| w[1].mean_sqrt_tau > w[0].mean_sqrt_tau);

    // the upper bound must refuse to apply, never pass
    let cfg = CheckConfig::new(
        ProcessSpec::PositivePartBrownian,
        TimeGrid::with_step(50.0, 0.01).unwrap(),
        4000,
        20261002,
    );
    let upper = check_upper_envelope_at_crossing(&cfg, 1.0).unwrap();

    criterion(
        "10 positive-part counterexample",
        median_ok
            && increasing
            && rep.censored_everywhere
            && rep.increment_dominance.dominates
            && upper.verdict == Verdict::NotApplicable,
        &format!(
            "median {:.4} (oracle {:.4} +- 0.05), sqrt means {:?} increasing {increasing}, censored everywhere {}, increment dominance {:?}, upper verdict {:?}",
            rep.median_tau,
            rep.median_oracle,
            rep.divergence.iter().map(|r| r.mean_sqrt_tau).collect::<Vec<_>>(),
            rep.censored_everywhere,
            rep.increment_dominance,
            upper.verdict
        ),
    );
}

#[test]
fn criterion_11_stopped_walk_demo() {
    // gambler's-ruin oracle: E[T] = 3 * 3 = 9 for the fair +-1 walk
    let cfg = WalkConfig::new(
        StepDist::Rademacher,
        StoppingRule::TwoSidedBarrier { upper: 3.0, lower: 3.0 },
        100_000,
        20261101,
    );
    let rep = wald_decoupling_demo(&cfg).unwrap();
    let mean_ok = (rep.mean_stopping_time - 9.0).abs() <= 0.15;
    let support_ok = rep.stopped_sum_support == vec![-3.0, 3.0];
    let decoupled = rep.checks.iter().find(|c| c.name == "decoupled_factor_two").unwrap();
    criterion(
        "11 stopped-walk demo",
        mean_ok && support_ok && decoupled.ok && rep.decoupled_left_support,
        &format!(
            "E[T] = {:.3} (9 +- 0.15), support {:?}, E[S_T^2] = {:.3} <= 2 E[decoupled^2] = {:.3}",
            rep.mean_stopping_time, rep.stopped_sum_support, decoupled.lhs, decoupled.rhs
        ),
    );
}

#[test]
fn criterion_12_order_statistics() {
    // Beta oracle: E[U_(5)] of 10 uniforms = 5/11, statistic mean 50/11
    let model = OrderStatModel::iid(Marginal::Uniform01, 10);
    let uniform = orderstats_check(&model, 5, 100_000, 20261201, 4.0).unwrap();
    let oracle = 50.0 / 11.0;
    let uniform_ok = (uniform.estimate - oracle).abs() <= 0.05
        && uniform.estimate >= 2.5
        && uniform.report.verdict == Verdict::Pass;

    let mut copulas_ok = true;
    let mut summary = format!("uniform: {:.4} (oracle {:.4}); ", uniform.estimate, oracle);
    for rho in [0.0, 0.5, 0.9] {
        let model = OrderStatModel {
            marginals: vec![Marginal::Exponential { rate: 1.0 }; 10],
            dependence: Dependence::GaussianCopula { rho },
        };
        let rep = orderstats_check(&model, 5, 30_000, 20261202, 4.0).unwrap();
        copulas_ok &= rep.report.verdict == Verdict::Pass;
        summary.push_str(&format!("rho={rho}: {:.3}; ", rep.estimate));
    }
    criterion("12 order statistics", uniform_ok && copulas_ok, &summary);
}

#[test]
fn criterion_13_byte_identical_outputs_across_workers() {
    let run = |dir: &Path, workers: &str| {
        let out = Command::new(env!("CARGO_BIN_EXE_passage"))
            .args([
                "report",
                "--process",
                "absbm",
                "--grid",
                "uniform:8:401",
                "--r",
                "1",
                "--paths",
                "1500",
                "--seed",
                "42",
                "--workers",
                workers,
                "--out",
                dir.to_str().unwrap(),
            ])
            .output()
            .unwrap();
        assert!(out.status.success(), "{out:?}");
    };
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    run(a.path(), "1");
    run(b.path(), "3");
    let mut identical = true;
    for name in ["manifest.json", "summary.md", "estimate.csv", "hits.csv"] {
        let left = std::fs::read(a.path().join(name)).unwrap();
        let right = std::fs::read(b.path().join(name)).unwrap();
        identical &= left == right;
    }
    criterion(
        "13 determinism across workers",
        identical,
        "manifest.json, summary.md, estimate.csv, hits.csv byte-identical for --workers 1 vs 3",
    );
}

// the exact closed forms asserted above, kept honest by a compile-time user
#[test]
fn oracle_constants_are_what_the_assertions_say() {
    assert!((harmonic(10) - 2.9289682539682538).abs() < 1e-12);
    let kappa = exact_curve(&ProcessSpec::AbsBrownian, CurveKind::Kappa).unwrap();
    assert!((kappa.eval(1.0) - 0.7978845608028654).abs() < 1e-12);
    let eta = exact_curve(&ProcessSpec::AbsSquaredMinusT, CurveKind::Eta).unwrap();
    assert!((eta.eval(1.0) - 0.9678828980765735).abs() < 1e-12);
    // plug-in on the witness reproduces half the level with independent seeds
    let grid = TimeGrid::with_step(2.0, 0.006).unwrap();
    let spec = ProcessSpec::SharpIndicator { level: 1.0 };
    let env = estimate_envelope(&spec, &grid, 4000, CurveKind::Envelope, 1).unwrap();
    let hits = sample_hitting_times(&spec, &grid, 1.0, 4000, 2).unwrap();
    let plug = plugin_mean_a_of_t(&env, &hits).unwrap();
    assert!((plug.value - 0.5).abs() < 0.02);
}
