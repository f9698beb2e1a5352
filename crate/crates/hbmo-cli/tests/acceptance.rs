//! Acceptance suite: one test per criterion, each printing a single
//! `[PASS]`/`[FAIL]` line. Every run is seeded, so each criterion is a
//! deterministic fact about the code, not a flaky sample.
//!
//! Criterion 8 documents a genuine failure: the mean-value identity it
//! checks is provably false for the sign-of-vertical function on off-center
//! balls (see the failure detail printed by the test). The check is
//! implemented faithfully and reported honestly rather than weakened.

use hbmo_core::{
    bounds_grid, check_fubini_interchange, check_mean_identity, check_upper_bound, closed_form,
    default_grid, extremal_probe, functions, mc_constant, mc_run, quad_constant, Ball,
    ConstantFamily, ConstantQuery, ConstantStatus, FunctionSpec, GroupDimension, GroupPoint,
    KernelFamily, KernelSpec, QuadratureConfig, SeededStream, VolumeMethod, DEFAULT_CHUNK,
};
use rand::Rng;
use std::process::Command;
use std::time::Instant;

fn conclude(num: u32, desc: &str, failures: &[String]) {
    if failures.is_empty() {
        println!("[PASS] criterion {num}: {desc}");
    } else {
        println!("[FAIL] criterion {num}: {desc}");
        for f in failures {
            println!("        - {f}");
        }
        panic!(
            "criterion {num} failed with {} issue(s):\n  {}",
            failures.len(),
            failures.join("\n  ")
        );
    }
}

fn random_point(dim: &GroupDimension, rng: &mut impl Rng) -> GroupPoint {
    let coords: Vec<f64> = (0..dim.coords_len())
        .map(|_| rng.gen_range(-5.0..5.0))
        .collect();
    dim.point(coords).expect("in-range coords")
}

/// Max per-coordinate deviation, relative to the larger of 1 and the
/// coordinate scale.
fn rel_residual(a: &GroupPoint, b: &GroupPoint) -> f64 {
    a.coords()
        .iter()
        .zip(b.coords())
        .map(|(x, y)| (x - y).abs() / x.abs().max(y.abs()).max(1.0))
        .fold(0.0, f64::max)
}

#[test]
fn criterion_01_group_axioms() {
    let start = Instant::now();
    let mut failures = Vec::new();
    let mut worst = 0.0f64;
    for (ni, n) in [1usize, 2].into_iter().enumerate() {
        let dim = GroupDimension::new(n).unwrap();
        let mut rng = SeededStream::new(0).substream(100 + ni as u64).rng();
        for _ in 0..50_000 {
            let a = random_point(&dim, &mut rng);
            let b = random_point(&dim, &mut rng);
            let c = random_point(&dim, &mut rng);

            let ab_c = dim.multiply(&dim.multiply(&a, &b).unwrap(), &c).unwrap();
            let a_bc = dim.multiply(&a, &dim.multiply(&b, &c).unwrap()).unwrap();
            worst = worst.max(rel_residual(&ab_c, &a_bc));

            let e = dim.identity();
            worst = worst.max(rel_residual(&dim.multiply(&a, &e).unwrap(), &a));
            worst = worst.max(rel_residual(&dim.multiply(&e, &a).unwrap(), &a));
            let inv = dim.inverse(&a).unwrap();
            worst = worst.max(rel_residual(&dim.multiply(&a, &inv).unwrap(), &e));

            // Left-invariance of the gauge distance: d(ca, cb) = d(a, b).
            let lhs = dim
                .distance(
                    &dim.multiply(&c, &a).unwrap(),
                    &dim.multiply(&c, &b).unwrap(),
                )
                .unwrap();
            let rhs = dim.distance(&a, &b).unwrap();
            worst = worst.max((lhs - rhs).abs() / rhs.max(1.0));
        }
    }
    if worst >= 1e-9 {
        failures.push(format!("max relative residual {worst:.3e} >= 1e-9"));
    }
    let secs = start.elapsed().as_secs_f64();
    if secs >= 5.0 {
        failures.push(format!("runtime {secs:.1}s >= 5s"));
    }
    conclude(
        1,
        &format!(
            "group axioms and left-invariance over 1e5 random triples \
             (max residual {worst:.2e}, {secs:.1}s)"
        ),
        &failures,
    );
}

#[test]
fn criterion_02_homogeneity_automorphism_triangle() {
    let mut failures = Vec::new();
    let dim = GroupDimension::new(1).unwrap();
    let mut rng = SeededStream::new(0).substream(200).rng();
    let mut worst = 0.0f64;
    for _ in 0..100_000 {
        let a = random_point(&dim, &mut rng);
        let b = random_point(&dim, &mut rng);
        let r = 10f64.powf(rng.gen_range(-1.0..1.0));

        // |delta_r a| = r |a|
        let lhs = dim.gauge_norm(&dim.dilate(r, &a).unwrap()).unwrap();
        let rhs = r * dim.gauge_norm(&a).unwrap();
        worst = worst.max((lhs - rhs).abs() / rhs.max(1e-300));

        // delta_r(ab) = delta_r(a) delta_r(b)
        let l = dim.dilate(r, &dim.multiply(&a, &b).unwrap()).unwrap();
        let rr = dim
            .multiply(&dim.dilate(r, &a).unwrap(), &dim.dilate(r, &b).unwrap())
            .unwrap();
        worst = worst.max(rel_residual(&l, &rr));
    }
    if worst >= 1e-12 {
        failures.push(format!(
            "homogeneity/automorphism residual {worst:.3e} >= 1e-12"
        ));
    }

    let mut violations = 0u64;
    let mut rng = SeededStream::new(0).substream(201).rng();
    for _ in 0..1_000_000 {
        let x = random_point(&dim, &mut rng);
        let y = random_point(&dim, &mut rng);
        let z = random_point(&dim, &mut rng);
        let dxz = dim.distance(&x, &z).unwrap();
        let through = dim.distance(&x, &y).unwrap() + dim.distance(&y, &z).unwrap();
        if dxz > through * (1.0 + 1e-12) {
            violations += 1;
        }
    }
    if violations > 0 {
        failures.push(format!(
            "{violations} triangle-inequality violations beyond 1e-12 in 1e6 triples"
        ));
    }
    conclude(
        2,
        &format!(
            "dilation homogeneity/automorphism within 1e-12 and zero triangle \
             violations (worst residual {worst:.2e})"
        ),
        &failures,
    );
}

#[test]
fn criterion_03_unit_ball_volume() {
    let start = Instant::now();
    let mut failures = Vec::new();
    let exact = std::f64::consts::PI.powi(2) / 2.0;

    // Quadrature-measured value.
    let measured = hbmo_core::unit_ball_volume(1, VolumeMethod::Measured).unwrap();
    if (measured - exact).abs() >= 1e-8 {
        failures.push(format!(
            "quadrature volume {measured:.12} differs from pi^2/2 by {:.2e} >= 1e-8",
            (measured - exact).abs()
        ));
    }

    // Monte-Carlo hit counting in the bounding box, 1e7 samples.
    let mc_volume = |radius: f64, stream: &SeededStream| {
        let box_vol = 8.0 * radius.powi(4);
        let r2 = radius * radius;
        let r4 = r2 * r2;
        let stats = mc_run(stream, 10_000_000, DEFAULT_CHUNK, |rng| {
            let x: f64 = rng.gen_range(-radius..radius);
            let y: f64 = rng.gen_range(-radius..radius);
            let t: f64 = rng.gen_range(-r2..r2);
            let h = x * x + y * y;
            if h * h + t * t <= r4 {
                1.0
            } else {
                0.0
            }
        });
        (box_vol * stats.mean(), box_vol * stats.stderr())
    };
    let base = SeededStream::new(0).substream(300);
    let (v1, s1) = mc_volume(1.0, &base.substream(0));
    if (v1 - exact).abs() > 3.0 * s1 {
        failures.push(format!(
            "MC volume {v1:.6} +- {s1:.1e} misses pi^2/2 = {exact:.6} by more than 3 sigma"
        ));
    }

    // Scaling: |B(0,2)| / |B(0,1)| = 2^Q = 16 within 3 sigma.
    let (v2, s2) = mc_volume(2.0, &base.substream(1));
    let ratio = v2 / v1;
    let sigma_ratio = ratio * ((s1 / v1).powi(2) + (s2 / v2).powi(2)).sqrt();
    if (ratio - 16.0).abs() > 3.0 * sigma_ratio {
        failures.push(format!(
            "volume ratio {ratio:.4} +- {sigma_ratio:.1e} misses 16 by more than 3 sigma"
        ));
    }

    // The Gamma-quotient convention is also reported, with its flag.
    let gamma = hbmo_core::unit_ball_volume(1, VolumeMethod::GammaFormula).unwrap();
    let discrepancy = (gamma / measured - 1.0).abs() > 1e-9;
    println!(
        "criterion 3 note: gamma-formula volume = {gamma:.6} (= pi^2) vs measured \
         {measured:.6}; ratio {:.6}; discrepancy_warning = {discrepancy}",
        gamma / measured
    );
    if !discrepancy {
        failures.push("expected the two volume conventions to disagree".into());
    }

    let secs = start.elapsed().as_secs_f64();
    if secs >= 60.0 {
        failures.push(format!("runtime {secs:.1}s >= 60s"));
    }
    conclude(
        3,
        &format!(
            "unit-ball volume: MC {v1:.5} vs pi^2/2 = {exact:.5}, quadrature gap \
             {:.1e}, ratio(2r/r) = {ratio:.3}, gamma-formula {gamma:.5} flagged ({secs:.1}s)",
            (measured - exact).abs()
        ),
        &failures,
    );
}

#[test]
fn criterion_04_constants_three_way_agreement() {
    let start = Instant::now();
    let mut failures = Vec::new();
    let base = SeededStream::new(0).substream(400);
    let mut k = 0u64;
    for family in [ConstantFamily::A, ConstantFamily::B] {
        for m in [1usize, 2] {
            for n in [1usize, 2] {
                let q = (2 * n + 2) as f64;
                for beta in [q + 1.0, q + 4.0] {
                    let label = format!("{}_{m}(n={n}, beta={beta})", family.label());
                    let query = ConstantQuery::new(family, m, n, beta).unwrap();
                    let closed = closed_form(&query, VolumeMethod::Measured).unwrap();
                    let cv = match closed.status {
                        ConstantStatus::Finite { value, .. } => value,
                        ConstantStatus::Divergent { ref reason } => {
                            failures.push(format!("{label}: unexpectedly divergent: {reason}"));
                            continue;
                        }
                    };

                    let quad = quad_constant(&query, 1e-8).unwrap();
                    match quad.status {
                        ConstantStatus::Finite { value, .. } => {
                            let rel = (value - cv).abs() / cv.abs();
                            if rel >= 1e-6 {
                                failures.push(format!(
                                    "{label}: quadrature {value:.10} vs closed {cv:.10}, \
                                     rel gap {rel:.2e} >= 1e-6"
                                ));
                            }
                        }
                        ConstantStatus::Divergent { ref reason } => {
                            failures.push(format!("{label}: quadrature divergent: {reason}"))
                        }
                    }

                    let cfg = QuadratureConfig::new(1_000_000, base.substream(k));
                    k += 1;
                    let mc = mc_constant(&query, &cfg).unwrap();
                    match mc.status {
                        ConstantStatus::Finite { value, error_bound } => {
                            if (value - cv).abs() > 3.0 * error_bound {
                                failures.push(format!(
                                    "{label}: MC {value:.6} +- {error_bound:.1e} misses \
                                     closed {cv:.6} by more than 3 sigma"
                                ));
                            }
                            if error_bound / cv.abs() >= 0.01 {
                                failures.push(format!(
                                    "{label}: MC stderr/value {:.2e} >= 1%",
                                    error_bound / cv.abs()
                                ));
                            }
                        }
                        ConstantStatus::Divergent { ref reason } => {
                            failures.push(format!("{label}: MC divergent: {reason}"))
                        }
                    }
                }
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    if secs >= 600.0 {
        failures.push(format!("runtime {secs:.1}s >= 600s"));
    }
    conclude(
        4,
        &format!(
            "closed form vs quadrature (rel 1e-6) vs 1e6-sample MC (3 sigma, \
             stderr < 1%) on 16 (family, m, n, beta) combinations ({secs:.1}s)"
        ),
        &failures,
    );
}

#[test]
fn criterion_05_pinned_closed_form_values() {
    let mut failures = Vec::new();
    let pi = std::f64::consts::PI;
    let cases = [
        (ConstantFamily::A, 5.0, 5.0 * pi * pi / 2.0, "A_1(n=1, beta=5) = 5 pi^2/2"),
        (ConstantFamily::B, 8.0, pi.powi(3) / 4.0, "B_1(n=1, beta=8) = pi^3/4"),
    ];
    for (family, beta, expect, label) in cases {
        let query = ConstantQuery::new(family, 1, 1, beta).unwrap();
        for (method, result) in [
            ("closed form", closed_form(&query, VolumeMethod::Measured).unwrap()),
            ("quadrature", quad_constant(&query, 1e-9).unwrap()),
        ] {
            match result.status {
                ConstantStatus::Finite { value, .. } => {
                    let rel = (value - expect).abs() / expect;
                    if rel >= 1e-6 {
                        failures.push(format!(
                            "{label}: {method} gives {value:.9}, expected {expect:.9} \
                             (rel gap {rel:.2e}, needs 6 significant digits)"
                        ));
                    }
                }
                ConstantStatus::Divergent { ref reason } => {
                    failures.push(format!("{label}: {method} divergent: {reason}"))
                }
            }
        }
    }
    conclude(
        5,
        "pinned values 24.674011... and 7.7515689... reproduced to 6 significant \
         digits by closed form and quadrature",
        &failures,
    );
}

#[test]
fn criterion_06_divergence_behavior() {
    let mut failures = Vec::new();
    // Analytic divergence for every at-or-below-threshold exponent.
    for family in [ConstantFamily::A, ConstantFamily::B] {
        for m in [1usize, 2] {
            for n in [1usize, 2] {
                let q = (2 * n + 2) as f64;
                for beta in [q - 1.0, q - 0.01, q] {
                    let query = ConstantQuery::new(family, m, n, beta).unwrap();
                    for (method, result) in [
                        ("closed", closed_form(&query, VolumeMethod::Measured).unwrap()),
                        ("quad", quad_constant(&query, 1e-8).unwrap()),
                    ] {
                        match result.status {
                            ConstantStatus::Divergent { .. } => {
                                if result.n_samples.is_some() {
                                    failures.push(format!(
                                        "{method} {}_{m}(n={n}, beta={beta}): divergence must \
                                         be detected analytically, before any sampling",
                                        family.label()
                                    ));
                                }
                            }
                            ConstantStatus::Finite { value, .. } => failures.push(format!(
                                "{method} {}_{m}(n={n}, beta={beta}) = {value} but beta <= Q \
                                 must be divergent",
                                family.label()
                            )),
                        }
                    }
                }
            }
        }
    }

    // Truncated MC at beta = n = 1 grows without bound: strictly increasing
    // in R with per-decade growth factor > 2.
    let query = ConstantQuery::new(ConstantFamily::A, 1, 1, 1.0).unwrap();
    let base = SeededStream::new(0).substream(600);
    let mut values = Vec::new();
    for (i, radius) in [10.0, 100.0, 1000.0].into_iter().enumerate() {
        let mut cfg = QuadratureConfig::new(200_000, base.substream(i as u64));
        cfg.truncation_radius = Some(radius);
        let result = mc_constant(&query, &cfg).unwrap();
        if !result.truncated {
            failures.push(format!("R={radius}: result not flagged as truncated"));
        }
        match result.status {
            ConstantStatus::Finite { value, .. } => values.push((radius, value)),
            ConstantStatus::Divergent { ref reason } => {
                failures.push(format!("R={radius}: truncated MC divergent: {reason}"))
            }
        }
    }
    for pair in values.windows(2) {
        let (r0, v0) = pair[0];
        let (r1, v1) = pair[1];
        if v1 <= v0 {
            failures.push(format!(
                "truncated values not strictly increasing: A(R={r0}) = {v0:.4e} vs \
                 A(R={r1}) = {v1:.4e}"
            ));
        }
        if v1 / v0 <= 2.0 {
            failures.push(format!(
                "per-decade growth {:.3} <= 2 between R={r0} and R={r1}",
                v1 / v0
            ));
        }
    }
    conclude(
        6,
        &format!(
            "beta <= Q always divergent analytically; truncated MC at beta=1 grows \
             {:.3e} -> {:.3e} -> {:.3e} across decades",
            values.first().map(|p| p.1).unwrap_or(f64::NAN),
            values.get(1).map(|p| p.1).unwrap_or(f64::NAN),
            values.get(2).map(|p| p.1).unwrap_or(f64::NAN)
        ),
        &failures,
    );
}

#[test]
fn criterion_07_bmo_of_the_extremal_function() {
    let mut failures = Vec::new();
    let dim = GroupDimension::new(1).unwrap();
    let stream = SeededStream::new(0).substream(700);
    let grid = default_grid(&dim, 8192, &stream.substream(0)).unwrap();

    let est = hbmo_core::bmo_seminorm_lb(&functions::f0(), &dim, &grid, &stream.substream(1))
        .unwrap();
    if !(0.95..=1.05).contains(&est.lower_bound) {
        failures.push(format!(
            "f0 lower bound {:.4} outside [0.95, 1.05]",
            est.lower_bound
        ));
    }
    if !est.argmax_ball.center.is_identity() {
        failures.push(format!(
            "argmax ball centered at {:?}, expected the identity",
            est.argmax_ball.center.coords()
        ));
    }

    let one = hbmo_core::bmo_seminorm_lb(&functions::one(), &dim, &grid, &stream.substream(2))
        .unwrap();
    if one.lower_bound != 0.0 {
        failures.push(format!(
            "constant function lower bound {} != 0",
            one.lower_bound
        ));
    }
    conclude(
        7,
        &format!(
            "BMO grid lower bound for f0 = {:.4} in [0.95, 1.05] with identity-centered \
             argmax; constant function gives exactly 0",
            est.lower_bound
        ),
        &failures,
    );
}

#[test]
fn criterion_08_proof_identity_checks() {
    let mut failures = Vec::new();
    let dim = GroupDimension::new(1).unwrap();
    let beta = dim.q() + 4.0;
    let base = SeededStream::new(0).substream(800);

    let center_off = dim.point(vec![0.0, 0.0, 1.0]).unwrap();
    let balls = [
        ("B(0,1)", Ball::centered(&dim, 1.0).unwrap()),
        ("B((0,0,1),1)", Ball::new(center_off, 1.0).unwrap()),
    ];
    let fs: [FunctionSpec; 3] = [functions::f0(), functions::bump(), functions::one()];
    let families = [KernelFamily::Hlp, KernelFamily::Hilbert];

    let mut k = 0u64;
    for family in families {
        for f in &fs {
            for (ball_label, ball) in &balls {
                let cfg = QuadratureConfig::new(100_000, base.substream(k));
                let mean = check_mean_identity(f, &dim, ball, family, beta, &cfg).unwrap();
                let cfg = QuadratureConfig::new(100_000, base.substream(k + 1));
                let fubini = check_fubini_interchange(f, &dim, ball, family, beta, &cfg).unwrap();
                k += 2;
                for rep in [&mean, &fubini] {
                    if !rep.agreement {
                        failures.push(format!(
                            "{} disagrees for f={}, ball {ball_label}: lhs {:.6} +- {:.1e} \
                             vs rhs {:.6} +- {:.1e}",
                            rep.check_name,
                            f.name,
                            rep.lhs.0,
                            rep.lhs.1,
                            rep.rhs.0,
                            rep.rhs.1
                        ));
                    }
                }
            }
        }
    }

    if !failures.is_empty() {
        // Documented analysis of the expected failure pattern. The dilated
        // ball family delta_s B((0,0,1),1) = B((0,0,s^2), s) stays inside the
        // upper half-space {t >= 0}, so every ball mean of the
        // sign-of-vertical function is exactly 1 and the kernel side equals
        // the full kernel mass, while the field side is 0 by antisymmetry.
        // The identity is therefore genuinely false for (f0, off-center
        // ball); the two failures below are the honest result.
        failures.push(
            "analysis: mean-value identity provably fails for the dilation-invariant \
             sign function on off-center balls (ball means identically 1 vs vanishing \
             field side); expected failing cells: mean-identity x f0 x B((0,0,1),1) x \
             {hlp, hilbert}"
                .into(),
        );
    }
    conclude(
        8,
        "mean-value and integral-interchange identities across f in {f0, bump, one}, \
         two balls, two kernel families",
        &failures,
    );
}

#[test]
fn criterion_09_upper_bound_direction() {
    let mut failures = Vec::new();
    let dim = GroupDimension::new(1).unwrap();
    let beta = dim.q() + 4.0;
    let base = SeededStream::new(0).substream(900);
    let grid = bounds_grid(&dim, &base.substream(1000)).unwrap();

    let combos: Vec<Vec<FunctionSpec>> = vec![
        vec![functions::f0()],
        vec![functions::one()],
        vec![functions::f0(), functions::f0()],
        vec![functions::f0(), functions::one()],
        vec![functions::one(), functions::f0()],
        vec![functions::one(), functions::one()],
    ];
    for (k, fs) in combos.into_iter().enumerate() {
        let spec = KernelSpec::new(KernelFamily::Hlp, fs.len(), beta).unwrap();
        let cfg = QuadratureConfig::new(1024, base.substream(k as u64));
        let rep = check_upper_bound(&spec, &fs, &dim, &grid, &cfg).unwrap();
        if !rep.agreement {
            failures.push(format!(
                "{}: lhs {:.4} +- {:.1e} exceeds rhs {:.4} +- {:.1e} beyond \
                 rhs*1.02 + 3 sigma",
                rep.check_name, rep.lhs.0, rep.lhs.1, rep.rhs.0, rep.rhs.1
            ));
        }
    }
    conclude(
        9,
        "seminorm of the operator output bounded by constant times input seminorms \
         for m in {1,2}, inputs from {f0, one}",
        &failures,
    );
}

#[test]
fn criterion_10_extremal_probe() {
    let mut failures = Vec::new();
    let dim = GroupDimension::new(1).unwrap();
    let base = SeededStream::new(0).substream(1000);
    for (k, family) in [KernelFamily::Hlp, KernelFamily::Hilbert]
        .into_iter()
        .enumerate()
    {
        let spec = KernelSpec::new(family, 1, dim.q() + 4.0).unwrap();
        let cfg = QuadratureConfig::new(100_000, base.substream(k as u64));
        let rep = extremal_probe(&spec, &dim, &cfg).unwrap();
        if !rep.agreement {
            failures.push(format!(
                "{}: output not constant-and-zero within 3 sigma (pooled {:.4} +- {:.1e})",
                rep.check_name, rep.lhs.0, rep.lhs.1
            ));
        }
        // The formal prediction column must be printed side by side without
        // being asserted.
        let rows = rep.notes.matches("predicted=").count();
        if rows != 5 {
            failures.push(format!(
                "{}: expected 5 predicted-value rows in the report, found {rows}",
                rep.check_name
            ));
        }
        println!("criterion 10 report for {}:\n{}", rep.check_name, rep.notes);
    }
    conclude(
        10,
        "operator output on f0 constant across 5 points and 0 within 3 sigma, with \
         the formal +-constant prediction printed, not asserted",
        &failures,
    );
}

fn hbmo(args: &[&str]) -> (i32, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_hbmo"))
        .args(args)
        .env_remove("HBMO_SEED")
        .output()
        .expect("spawn hbmo");
    let stripped = String::from_utf8_lossy(&out.stdout)
        .lines()
        .map(|l| l.split(",\"runtime_ms\":").next().unwrap_or(l).to_string())
        .collect::<Vec<_>>()
        .join("\n");
    (out.status.code().unwrap_or(-1), stripped)
}

#[test]
fn criterion_11_cli_determinism() {
    let mut failures = Vec::new();
    let cases: Vec<(&str, Vec<&str>)> = vec![
        (
            "constants mc",
            vec![
                "constants", "--family", "B", "--m", "2", "--n", "1", "--beta", "8",
                "--method", "all", "--samples", "200000",
            ],
        ),
        (
            "eval",
            vec![
                "eval", "--family", "hlp", "--m", "2", "--beta", "8", "--functions",
                "f0,bump", "--point", "1,0.5,-1", "--samples", "100000",
            ],
        ),
        (
            "bmo",
            vec!["bmo", "--function", "f0", "--per-ball-samples", "1024"],
        ),
        (
            "verify extremal",
            vec!["verify", "--suite", "extremal", "--samples", "50000"],
        ),
        (
            "volume mc",
            vec!["volume", "--method", "mc", "--samples", "500000"],
        ),
    ];
    for (label, args) in &cases {
        let mut outputs = Vec::new();
        for threads in ["1", "8", "1"] {
            let mut full = args.clone();
            full.extend(["--threads", threads]);
            let (code, stdout) = hbmo(&full);
            if code != 0 {
                failures.push(format!("{label}: exit code {code} with --threads {threads}"));
            }
            outputs.push(stdout);
        }
        if outputs[0] != outputs[1] {
            failures.push(format!("{label}: --threads 1 vs 8 changed the output"));
        }
        if outputs[0] != outputs[2] {
            failures.push(format!("{label}: two identical runs differ"));
        }
        if outputs[0].is_empty() {
            failures.push(format!("{label}: no output captured"));
        }
    }
    conclude(
        11,
        "every CLI command byte-identical (less wall-clock) across repeat runs and \
         --threads 1 vs 8",
        &failures,
    );
}
