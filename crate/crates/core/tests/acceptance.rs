//! End-to-end acceptance run: one PASS/FAIL line per criterion. Criterion 10
//! (the H³ stretch) is reported but does not affect the exit status.

use std::f64::consts::{LN_2, PI};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Instant;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use thicknet::constants::{ball_volume, monte_carlo_disc_area, paper_constant_c, theorem_check};
use thicknet::cover::{
    build_nerve_with_threshold, build_net_with, rank_bound_certificate_at, verify_generators,
    NetOptions,
};
use thicknet::geometry::{
    classify, displacement, dist, exp, grad_displacement, Ideal, Isometry, Kind, MinSet, Model,
    Point, Tangent,
};
use thicknet::lattice::{bundled, orbit_ball, LatticeSpec, OrbitOptions, Word};
use thicknet::lemma_lab::{self, TrialConfig};
use thicknet::morse::{flow_to_sublevel, MorseConfig, MorseError, PsiEvaluator};
use thicknet::report::{run_pipeline, PipelineRun, RunConfig};

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

/// Relative error of a Riemannian gradient against central differences of
/// `f` along geodesics in an orthonormal frame at `p`. Gradients smaller than
/// `floor` are compared in absolute terms.
fn fd_relative_error(
    f: &mut dyn FnMut(&Point) -> f64,
    grad: &Tangent,
    p: &Point,
    floor: f64,
) -> f64 {
    let h = p.height();
    let mut frame = vec![
        Tangent::new(Complex64::new(h, 0.0), 0.0),
        Tangent::new(Complex64::new(0.0, 0.0), h),
    ];
    if p.model() == Model::H3 {
        frame.push(Tangent::new(Complex64::new(0.0, h), 0.0));
    }
    let step = 1e-6;
    let mut err2 = 0.0;
    for e in &frame {
        let fd = (f(&exp(p, &e.scale(step))) - f(&exp(p, &e.scale(-step)))) / (2.0 * step);
        err2 += (fd - grad.dot_at(e, p)).powi(2);
    }
    err2.sqrt() / grad.norm_at(p).max(floor)
}

fn modular_region_point(rng: &mut ChaCha8Rng, h_max: f64) -> Point {
    loop {
        let x = rng.gen_range(-0.5..0.5);
        let h = rng.gen_range(0.85f64.ln()..h_max.ln()).exp();
        if x * x + h * h >= 1.0 {
            return Point::h2(x, h).unwrap();
        }
    }
}

/// A point at distance `r` from `c` in a random direction.
fn near(rng: &mut ChaCha8Rng, c: &Point, r: f64) -> Point {
    let t: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
    let h = c.height();
    exp(
        c,
        &Tangent::new(Complex64::new(h * t.cos(), 0.0), h * t.sin()).scale(r),
    )
}

fn elliptic_centres() -> [Point; 3] {
    let s3 = 3f64.sqrt() / 2.0;
    [
        Point::h2(0.0, 1.0).unwrap(),
        Point::h2(0.5, s3).unwrap(),
        Point::h2(-0.5, s3).unwrap(),
    ]
}

fn criterion_1() -> Outcome {
    let d = dist(&Point::h2(0.0, 1.0).unwrap(), &Point::h2(0.0, 2.0).unwrap());
    ensure((d - LN_2).abs() <= 1e-12, || format!("dist = {d}"))?;
    let s = Isometry::real(0.0, -1.0, 1.0, 0.0).unwrap();
    let ds = displacement(&s, &Point::h2(0.0, 2.0).unwrap());
    ensure((ds - 4f64.ln()).abs() <= 1e-12, || format!("d_S = {ds}"))?;
    let g = Isometry::real(2.0, 0.0, 0.0, 0.5).unwrap();
    let l = classify(&g).translation_length;
    ensure((l - 2.0 * LN_2).abs() <= 1e-12, || format!("length = {l}"))?;
    Ok(format!(
        "dist err {:.1e}, d_S err {:.1e}, length err {:.1e}",
        (d - LN_2).abs(),
        (ds - 4f64.ln()).abs(),
        (l - 2.0 * LN_2).abs()
    ))
}

fn criterion_2() -> Outcome {
    let l = bundled("modular").unwrap();
    let cfg = MorseConfig::defaults(Model::H2);
    let letters = l.letters();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst_d = 0.0f64;
    let mut n = 0;
    while n < 1000 {
        let len = rng.gen_range(1..=6);
        let w = Word(
            (0..len)
                .map(|_| letters[rng.gen_range(0..letters.len())].0)
                .collect(),
        );
        let g = l.evaluate(&w);
        if g.is_identity(1e-9) {
            continue;
        }
        let p = modular_region_point(&mut rng, 5.0);
        let Ok(grad) = grad_displacement(&g, &p) else {
            continue;
        };
        worst_d = worst_d.max(fd_relative_error(
            &mut |q| displacement(&g, q),
            &grad,
            &p,
            1e-3,
        ));
        n += 1;
    }

    // half in the cusp above the thickness ceiling, half around the cone points
    let mut ev = PsiEvaluator::new(&l, &cfg);
    let centres = elliptic_centres();
    let mut worst_p = 0.0f64;
    let mut positive = 0;
    for k in 0..1000 {
        let p = if k % 2 == 0 {
            Point::h2(
                rng.gen_range(-0.5..0.5),
                rng.gen_range(10.5f64.ln()..80f64.ln()).exp(),
            )
            .unwrap()
        } else {
            let c = &centres[rng.gen_range(0..3)];
            let r = rng.gen_range(0.004..0.012);
            near(&mut rng, c, r)
        };
        let v = ev
            .eval(&p, true)
            .map_err(|e| format!("psi at {:?}: {e}", p.coords()))?;
        if v.psi > 0.0 {
            positive += 1;
        }
        let mut f = |q: &Point| ev_psi(&l, &cfg, q);
        worst_p = worst_p.max(fd_relative_error(&mut f, &v.grad, &p, 1e-3));
    }
    ensure(worst_d < 1e-6 && worst_p < 1e-6, || {
        format!("max relative error: displacement {worst_d:.2e}, psi {worst_p:.2e}")
    })?;
    Ok(format!(
        "max relative error displacement {worst_d:.2e}, psi {worst_p:.2e} ({positive}/1000 with psi > 0)"
    ))
}

fn ev_psi(l: &LatticeSpec, cfg: &MorseConfig, q: &Point) -> f64 {
    thicknet::morse::psi(l, q, cfg).expect("psi off the singular set")
}

fn criterion_3() -> Outcome {
    let cfg = TrialConfig::default();
    let mut parts = Vec::new();
    for r in lemma_lab::run_all(&cfg).map_err(|e| e.to_string())? {
        ensure(r.pass && r.trials == 10_000, || {
            format!(
                "{}: {} violations, max {:.2e}",
                r.check, r.violations, r.max_violation
            )
        })?;
        parts.push(format!("{} max {:.1e}", r.check, r.max_violation));
    }
    let codim = lemma_lab::check_codim_h3(&TrialConfig::with_model(Model::H3))
        .map_err(|e| e.to_string())?;
    ensure(codim.pass, || format!("codim: {codim:?}"))?;
    parts.push(format!(
        "codim_h3 {} structural, {} vacuous",
        codim.assertions, codim.vacuous
    ));
    Ok(parts.join("; "))
}

fn criterion_4() -> Outcome {
    let l = bundled("modular").unwrap();
    let cfg = MorseConfig::defaults(Model::H2);
    let mut ev = PsiEvaluator::new(&l, &cfg);
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let centres = elliptic_centres();
    let (mut moved, mut iterations) = (0, 0);
    for k in 0..100 {
        let start = match k % 5 {
            0 | 1 => Point::h2(
                rng.gen_range(-0.5..0.5),
                rng.gen_range(10.5f64.ln()..80f64.ln()).exp(),
            )
            .unwrap(),
            2 | 3 => {
                let c = &centres[rng.gen_range(0..3)];
                let r = rng.gen_range(1e-3..1.2e-2);
                near(&mut rng, c, r)
            }
            _ => modular_region_point(&mut rng, 40.0),
        };
        let out = flow_to_sublevel(&mut ev, &start, 1e-8).map_err(|e| {
            let kind = match e {
                MorseError::StepUnderflow { .. } => "StepUnderflow",
                MorseError::MaxIterations(..) => "MaxIterations",
                _ => "error",
            };
            format!("start {k} {:?}: {kind}: {e}", start.coords())
        })?;
        let last = *out.psi_trace.last().unwrap();
        ensure(last <= 1e-8, || format!("start {k}: final psi {last}"))?;
        ensure(out.psi_trace.windows(2).all(|w| w[1] < w[0]), || {
            format!("start {k}: psi not strictly decreasing")
        })?;
        if out.psi_trace.len() > 1 {
            moved += 1;
        }
        iterations += out.iterations;
    }
    Ok(format!(
        "100 flows reached psi <= 1e-8 ({moved} started above it, {iterations} steps total)"
    ))
}

struct Runs {
    modular: PipelineRun,
    others: Vec<PipelineRun>,
}

fn pipeline(name: &str) -> PipelineRun {
    let start = Instant::now();
    let run = run_pipeline(&RunConfig {
        lattice: name.into(),
        ..RunConfig::default()
    });
    println!(
        "  pipeline {name}: {:.1}s, pass = {}",
        start.elapsed().as_secs_f64(),
        run.report.pass
    );
    run
}

fn criterion_5(runs: &Runs) -> Outcome {
    let run = &runs.modular;
    let (l, net) = (
        run.lattice.as_ref().ok_or("no lattice")?,
        run.net.as_ref().ok_or("no net")?,
    );
    let cfg = run.morse.as_ref().unwrap();
    let required = cfg.epsilon() / cfg.mu() as f64;
    ensure((required - 0.05).abs() < 1e-15, || {
        format!("eps/mu = {required}")
    })?;
    let opts = OrbitOptions::default();
    let mut min = f64::INFINITY;
    for p in &net.points {
        let ball = orbit_ball(l, p, 0.5, &opts).map_err(|e| e.to_string())?;
        for e in ball.nontrivial() {
            if !e.element.is_identity(1e-9) {
                min = min.min(e.displacement);
            }
        }
    }
    ensure(min >= required - 1e-9, || format!("min displacement {min}"))?;
    ensure(run.report.flags["thick"], || "thick flag false".into())?;
    Ok(format!(
        "{} net points, min nontrivial displacement {min:.6} >= 0.05",
        net.points.len()
    ))
}

fn criterion_6(runs: &Runs) -> Outcome {
    let r = &runs.modular.report;
    let cert = r.stages.certificate.as_ref().ok_or("no certificate")?;
    // closed forms: v(t) = 2π(cosh t − 1)
    let v = |t: f64| 2.0 * PI * (t.cosh() - 1.0);
    let vol = PI / 3.0;
    let net_cap = vol / v(0.0125) * 1.05;
    let deg_cap = v(0.0625) / v(0.0125);
    let edge_cap = vol * v(0.0625) / (2.0 * v(0.0125).powi(2));
    ensure((net_cap - 2240.0).abs() < 2.0, || {
        format!("net cap {net_cap}")
    })?;
    ensure((edge_cap - 2.67e4).abs() < 100.0, || {
        format!("edge cap {edge_cap}")
    })?;
    ensure(cert.net_size as f64 <= net_cap, || {
        format!("net {} > {net_cap}", cert.net_size)
    })?;
    ensure(cert.max_degree as f64 <= deg_cap, || {
        format!("degree {} > {deg_cap}", cert.max_degree)
    })?;
    ensure(cert.edges as f64 <= edge_cap, || {
        format!("edges {} > {edge_cap}", cert.edges)
    })?;
    ensure(
        cert.net_ok == Some(true) && cert.degree_ok && cert.edges_ok == Some(true),
        || "flag mismatch".into(),
    )?;
    Ok(format!(
        "net {} <= {net_cap:.0}, max degree {} <= {deg_cap:.4}, edges {} <= {edge_cap:.0}",
        cert.net_size, cert.max_degree, cert.edges
    ))
}

fn criterion_7(runs: &Runs) -> Outcome {
    let mut parts = Vec::new();
    for run in std::iter::once(&runs.modular).chain(runs.others.iter().filter(|r| {
        r.lattice
            .as_ref()
            .is_some_and(|l| l.name == "gamma2" || l.name == "hecke4")
    })) {
        let r = &run.report;
        let name = &r.lattice.as_ref().unwrap().name;
        let check = r
            .stages
            .verification
            .as_ref()
            .ok_or_else(|| format!("{name}: no verification"))?;
        ensure(
            check.pass && check.radius == 2.0 && check.depth == 12,
            || format!("{name}: {check:?}"),
        )?;
        let edges = r.stages.nerve.as_ref().unwrap().edges as u32;
        if let Some(k) = r.lattice.as_ref().unwrap().known_rank {
            ensure(k <= edges, || format!("{name}: rank {k} > {edges}"))?;
        }
        let words: Vec<String> = check
            .known_words
            .iter()
            .map(|(g, w)| format!("{g} = {}", w.as_deref().unwrap_or("?")))
            .collect();
        parts.push(format!(
            "{name}: {} generators, {}",
            check.distinct,
            words.join(", ")
        ));
    }
    ensure(parts.len() == 3, || "missing lattice runs".into())?;
    Ok(parts.join("; "))
}

fn criterion_8(runs: &Runs) -> Outcome {
    let mut parts = Vec::new();
    for run in std::iter::once(&runs.modular).chain(runs.others.iter()) {
        let r = &run.report;
        let name = &r.lattice.as_ref().unwrap().name;
        let t = r
            .stages
            .theorem
            .as_ref()
            .ok_or_else(|| format!("{name}: no theorem check"))?;
        ensure(t.pass && t.bound_holds && t.rank_consistent, || {
            format!("{name}: {t:?}")
        })?;
        // 2/C ≤ vol recomputed from the ball volumes
        let alpha = run.morse.as_ref().unwrap().alpha();
        let c = ball_volume(Model::H2, 2.5 * alpha).unwrap()
            / (2.0 * ball_volume(Model::H2, 0.5 * alpha).unwrap().powi(2));
        ensure(t.kazhdan_margulis && 2.0 / c <= t.covolume, || {
            format!("{name}: 2/C = {}", 2.0 / c)
        })?;
        parts.push(format!("{name} {} <= {:.3e}", t.d_upper, t.c_vol));
    }
    ensure(parts.len() == 4, || {
        format!("expected 4 lattices, got {}", parts.len())
    })?;
    Ok(parts.join(", "))
}

fn criterion_9() -> Outcome {
    let mut parts = Vec::new();
    for (k, t) in [0.5, 1.0, 2.0].into_iter().enumerate() {
        let est = monte_carlo_disc_area(t, 1_000_000, 90 + k as u64);
        let exact = ball_volume(Model::H2, t).unwrap();
        let rel = (est / exact - 1.0).abs();
        ensure(rel < 0.01, || format!("t = {t}: {est} vs {exact}"))?;
        parts.push(format!("t={t}: {rel:.1e}"));
    }
    Ok(format!("relative error {}", parts.join(", ")))
}

/// Gated part: geometry, classification, ψ and lemmas in H³. The coarse
/// pipeline is appended to the detail line only.
fn criterion_10() -> Outcome {
    let d = dist(
        &Point::h3(0.0, 0.0, 1.0).unwrap(),
        &Point::h3(0.0, 0.0, 2.0).unwrap(),
    );
    ensure((d - LN_2).abs() <= 1e-12, || format!("dist {d}"))?;
    let i = Complex64::new(0.0, 1.0);
    let lox = Isometry::complex(
        i * 2.0,
        Complex64::new(0.0, 0.0),
        Complex64::new(0.0, 0.0),
        -i * 0.5,
    )
    .unwrap();
    let c = classify(&lox);
    ensure(
        c.kind == Kind::Hyperbolic && (c.translation_length - 2.0 * LN_2).abs() < 1e-12,
        || format!("{c:?}"),
    )?;
    ensure((c.rotation - PI).abs() < 1e-12, || {
        format!("rotation {}", c.rotation)
    })?;
    ensure(
        matches!(c.min_set, MinSet::Axis(Ideal::Finite(z), Ideal::Infinity) if z.norm() < 1e-15)
            || matches!(c.min_set, MinSet::Axis(Ideal::Infinity, Ideal::Finite(z)) if z.norm() < 1e-15),
        || format!("{:?}", c.min_set),
    )?;

    let l = bundled("picard").unwrap();
    let kinds: Vec<Kind> = l
        .generator_elements()
        .iter()
        .map(|g| classify(g).kind)
        .collect();
    ensure(
        kinds == [Kind::Elliptic, Kind::Parabolic, Kind::Parabolic],
        || format!("{kinds:?}"),
    )?;

    let cfg = MorseConfig::defaults(Model::H3);
    let mut ev = PsiEvaluator::new(&l, &cfg);
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let (mut evaluated, mut positive) = (0, 0);
    for _ in 0..200 {
        let p = Point::h3(
            rng.gen_range(-0.5..0.5),
            rng.gen_range(-0.5..0.5),
            rng.gen_range(0.8f64.ln()..40f64.ln()).exp(),
        )
        .unwrap();
        let v = match ev.psi(&p) {
            Ok(v) => v,
            Err(MorseError::OnSingularSet(_)) => continue,
            Err(e) => return Err(format!("psi at {:?}: {e}", p.coords())),
        };
        for g in l.generator_elements() {
            let w = ev.psi(&g.apply(&p)).map_err(|e| e.to_string())?;
            ensure((v - w).abs() <= 1e-9 * v.max(1.0), || {
                format!("psi not invariant at {:?}: {v} vs {w}", p.coords())
            })?;
        }
        evaluated += 1;
        if v > 0.0 {
            positive += 1;
        }
    }
    let lemmas =
        lemma_lab::run_all(&TrialConfig::with_model(Model::H3)).map_err(|e| e.to_string())?;
    ensure(lemmas.iter().all(|r| r.pass), || format!("{lemmas:?}"))?;

    let start = Instant::now();
    let run = run_pipeline(&RunConfig {
        lattice: "picard".into(),
        alpha: Some(0.1),
        ..RunConfig::default()
    });
    let r = &run.report;
    let failing: Vec<&String> = r
        .flags
        .iter()
        .filter(|(_, v)| !**v)
        .map(|(k, _)| k)
        .collect();
    let pipeline = match (&r.stages.net, &r.stages.nerve) {
        (Some(n), Some(e)) => format!(
            "pipeline at alpha 0.1 (not gated): net {}, edges {}, max degree {}, failing flags {:?}, errors {}, {:.0}s",
            n.size, e.edges, e.max_degree, failing, r.errors.len(), start.elapsed().as_secs_f64()
        ),
        _ => format!("pipeline at alpha 0.1 (not gated) stopped: {:?}", r.errors),
    };
    Ok(format!(
        "geometry and classification ok, psi invariant at {evaluated} points ({positive} positive), {} lemma checks pass; {pipeline}",
        lemmas.len()
    ))
}

fn criterion_11(runs: &Runs) -> Outcome {
    let run = &runs.modular;
    let l = run.lattice.as_ref().unwrap();
    let cfg = run.morse.as_ref().unwrap();
    let corrupted = theorem_check(l, 1_000_000_000, cfg).map_err(|e| e.to_string())?;
    ensure(!corrupted.pass && !corrupted.bound_holds, || {
        "corrupted edge count passed".into()
    })?;

    let t = l.generator_elements()[1];
    let only_t = verify_generators(l, &[t], 2.0, 12, cfg.budget).map_err(|e| e.to_string())?;
    ensure(!only_t.pass, || "gens = {T} passed".into())?;

    // spacing α/2 with the nerve still drawn at 2α, judged against the caps at α
    let alpha = cfg.alpha();
    let dense_cfg = MorseConfig {
        alpha_override: Some(0.5 * alpha),
        ..cfg.clone()
    };
    let opts = NetOptions {
        lift_radius: Some(2.0 * alpha),
        ..NetOptions::default()
    };
    let net = build_net_with(l, &dense_cfg, &opts).map_err(|e| e.to_string())?;
    let nerve = build_nerve_with_threshold(l, &net, 2.0 * alpha).map_err(|e| e.to_string())?;
    let cert = rank_bound_certificate_at(l, &net, &nerve, alpha).map_err(|e| e.to_string())?;
    ensure(!cert.degree_ok, || {
        format!(
            "dense net degree {} within cap {}",
            cert.max_degree, cert.degree_cap
        )
    })?;
    let _ = paper_constant_c(Model::H2, alpha);
    Ok(format!(
        "edges = 1e9 fails theorem_check; {{T}} reaches {}/{} of the ball; alpha/2 net degree {} > {:.2}",
        only_t.reached, only_t.ball_size, cert.max_degree, cert.degree_cap
    ))
}

fn report(n: u32, name: &str, gated: bool, f: impl FnOnce() -> Outcome) -> bool {
    let start = Instant::now();
    let out = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
        Err(p
            .downcast_ref::<String>()
            .cloned()
            .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
            .unwrap_or_default())
    });
    let secs = start.elapsed().as_secs_f64();
    let tag = if gated { "" } else { " [not gated]" };
    match &out {
        Ok(detail) => println!("criterion {n:>2} PASS{tag} {name} ({secs:.1}s): {detail}"),
        Err(detail) => println!("criterion {n:>2} FAIL{tag} {name} ({secs:.1}s): {detail}"),
    }
    out.is_ok() || !gated
}

fn main() {
    // `cargo test` forwards harness flags such as `--list`; this target has
    // nothing to list or filter.
    if std::env::args().any(|a| a == "--list") {
        return;
    }
    println!("\nrunning acceptance criteria");
    let mut ok = true;
    ok &= report(1, "geometry golden values", true, criterion_1);
    ok &= report(2, "gradients match central differences", true, criterion_2);
    ok &= report(3, "lemma suite", true, criterion_3);
    ok &= report(4, "flow reaches the thick part", true, criterion_4);
    let runs = Runs {
        modular: pipeline("modular"),
        others: ["gamma2", "hecke4", "hecke5"]
            .into_iter()
            .map(pipeline)
            .collect(),
    };
    ok &= report(5, "thick-part certificate", true, || criterion_5(&runs));
    ok &= report(6, "packing, degree and edge bounds", true, || {
        criterion_6(&runs)
    });
    ok &= report(7, "generator extraction", true, || criterion_7(&runs));
    ok &= report(8, "rank-versus-volume certificate", true, || {
        criterion_8(&runs)
    });
    ok &= report(9, "ball volumes by Monte Carlo", true, criterion_9);
    ok &= report(10, "H3 stretch", false, criterion_10);
    ok &= report(11, "negative controls", true, || criterion_11(&runs));
    println!("\nacceptance: {}\n", if ok { "ok" } else { "FAILED" });
    if !ok {
        std::process::exit(1);
    }
}
