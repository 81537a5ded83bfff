//! Acceptance checks, one line per criterion.
//!
//! Run with `cargo test -p merodyn --test acceptance`. A criterion listed in
//! `KNOWN_FAILURES` is expected to fail for a documented reason; the run
//! errors if it unexpectedly passes or if anything else fails.

use std::collections::BTreeSet;
use std::f64::consts::PI;
use std::time::Instant;

use merodyn::centers::{
    enumerate_centers, solve_children, EnumerateOptions, MarkedValue, VirtualCenter, Window,
};
use merodyn::classify::{classify, classify_lambda, ClassKind, ClassifierBudget};
use merodyn::dynamics::{
    eval_f, eval_f_prime, inverse_branch, iterate, orbit_fate, pole_k, OrbitLimits, OrbitVerdict,
};
use merodyn::koenigs::{
    eval_e, eval_e_detailed, find_model_parameter, in_delta, s_partition, trace_s_star, Linearizer,
    SPartition,
};
use merodyn::render::{render, render_with_workers, ColorMap, Image, RenderSpec};
use merodyn::{inversion, ParamPoint, C64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// The quoted fixed point differs from the true one in the third decimal of
/// the imaginary part (2.12632 against 2.1231290).
const KNOWN_FAILURES: &[&str] = &["fixed-point reproduction"];

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn two_thirds() -> C64 {
    c(2.0 / 3.0, 0.0)
}

fn random_param(rng: &mut ChaCha8Rng) -> ParamPoint {
    loop {
        let rho = C64::from_polar(rng.gen_range(0.05..0.95), rng.gen_range(-PI..PI));
        let lambda = c(rng.gen_range(-4.0..4.0), rng.gen_range(-4.0..4.0));
        if let Ok(p) = ParamPoint::new(rho, lambda) {
            if lambda.norm() > 1e-3 && (lambda - rho / 2.0).norm() > 1e-3 {
                return p;
            }
        }
    }
}

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn fixed_point() -> Outcome {
    let t = Instant::now();
    let p = ParamPoint::new(two_thirds(), c(2.0, 2.0)).unwrap();
    let class = classify(&p, &ClassifierBudget::default());
    let Some(cycle) = class.cycle else {
        return outcome(false, format!("no cycle found ({:?})", class.kind));
    };
    let q = cycle.points[0];
    let quoted = c(2.25818, 2.12632);
    let elapsed = t.elapsed().as_secs_f64();
    let err = (q - quoted).norm();
    let pass = cycle.period == 1 && err < 1e-4 && cycle.multiplier.norm() < 1.0 && elapsed < 1.0;
    outcome(
        pass,
        format!(
            "q = {:.9}{:+.9}i, |q - quoted| = {err:.2e}, |f'(q)| = {:.4}, {elapsed:.3}s",
            q.re,
            q.im,
            cycle.multiplier.norm()
        ),
    )
}

fn multiplier_law() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let worst = (0..100)
        .map(|_| {
            let p = random_param(&mut rng);
            (eval_f_prime(&p, c(0.0, 0.0)).unwrap() - p.rho).norm()
        })
        .fold(0.0f64, f64::max);
    outcome(
        worst < 1e-10,
        format!("max |f'(0) - rho| = {worst:.2e} over 100 parameters"),
    )
}

/// Random parameters with `|λ − μ| < 1`. The residue of `f` at every pole is
/// `(λ − μ)/2`, so `|g_k(w) − p_k| ≈ |λ − μ|/(2|w|)` and the far-ray tolerance
/// at `|w| = 10⁶` is only reachable for moderate `|λ − μ|`.
fn moderate_param(rng: &mut ChaCha8Rng) -> ParamPoint {
    loop {
        let p = random_param(rng);
        if (p.lambda - p.mu).norm() < 1.0 {
            return p;
        }
    }
}

fn pole_inverse() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let mut worst_round = 0.0f64;
    let mut worst_far = 0.0f64;
    let mut worst_law = 0.0f64;
    for _ in 0..100 {
        let p = moderate_param(&mut rng);
        let k = rng.gen_range(-20..=20);
        let w = C64::from_polar(rng.gen_range(0.01..20.0), rng.gen_range(-PI..PI));
        let z = inverse_branch(&p, k, w).unwrap();
        worst_round = worst_round.max((eval_f(&p, z).unwrap() - w).norm() / (1.0 + w.norm()));
        let ray = C64::from_polar(1e6, rng.gen_range(-PI..PI));
        let far = inverse_branch(&p, k, ray).unwrap();
        let d = (far - pole_k(&p, k)).norm();
        worst_far = worst_far.max(d);
        worst_law = worst_law.max(d * 2e6 / (p.lambda - p.mu).norm());
    }
    outcome(
        worst_round < 1e-10 && worst_far < 1e-6,
        format!(
            "max |f(g_k(w)) - w|/(1+|w|) = {worst_round:.2e}, max |g_k(1e6 e^it) - p_k| = {worst_far:.2e}, max 2|w||g_k - p_k|/|lambda - mu| = {worst_law:.3}"
        ),
    )
}

fn tie_curve_on_c0() -> Outcome {
    let t = Instant::now();
    let rho = two_thirds();
    match trace_s_star(rho, 64) {
        Ok(pts) => {
            let dev = pts
                .iter()
                .map(|l| ((l - rho / 2.0).norm() - 1.0 / 3.0).abs())
                .fold(0.0f64, f64::max);
            let secs = t.elapsed().as_secs_f64();
            outcome(
                pts.len() == 64 && dev < 1e-4 && secs < 30.0,
                format!("{} points, max deviation {dev:.2e}, {secs:.3}s", pts.len()),
            )
        }
        Err(e) => outcome(false, e.to_string()),
    }
}

fn symmetry_suite() -> Outcome {
    let rho = two_thirds();
    let mut worst = 0.0f64;
    let mut all_zero = true;
    for j in 0..24 {
        let theta = 2.0 * PI * (j as f64 + 0.37) / 24.0;
        let lambda = rho / 2.0 + C64::from_polar(1.0 / 3.0, theta);
        let Ok(p) = ParamPoint::new(rho, lambda) else {
            continue;
        };
        let ol = iterate(&p, p.lambda, 200);
        let om = iterate(&p, p.mu, 200);
        all_zero &= matches!(ol.verdict, OrbitVerdict::ConvergedToZero)
            && matches!(om.verdict, OrbitVerdict::ConvergedToZero);
        let (mut zl, mut zm) = (p.lambda, p.mu);
        for _ in 0..=200 {
            worst = worst.max((zm + zl.conj()).norm());
            zl = eval_f(&p, zl).unwrap();
            zm = eval_f(&p, zm).unwrap();
        }
    }
    outcome(
        worst < 1e-8 && all_zero,
        format!("24 points on C_0: max |f^n(mu) + conj f^n(lambda)| = {worst:.2e}, both orbits to 0: {all_zero}"),
    )
}

fn inversion_equivariance() -> Outcome {
    let rho = two_thirds();
    let budget = ClassifierBudget::default();
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let (mut agree, mut total) = (0, 0);
    while total < 200 {
        let lambda = c(rng.gen_range(-1.0..4.0), rng.gen_range(-2.5..2.5));
        let a = classify_lambda(rho, lambda, &budget);
        if !a.is_determined() {
            continue;
        }
        total += 1;
        let Ok(image) = inversion(rho, lambda) else {
            continue;
        };
        let b = classify_lambda(rho, image, &budget);
        if b.kind == a.kind.mirrored() && b.period == a.period {
            agree += 1;
        }
    }
    let frac = agree as f64 / total as f64;
    outcome(frac >= 0.99, format!("{agree}/{total} mirrored"))
}

fn ring_has_both(rho: C64, center: &VirtualCenter, budget: &ClassifierBudget) -> bool {
    let want = match center.marked_av {
        MarkedValue::Lambda => ClassKind::MLambda,
        MarkedValue::Mu => ClassKind::MMu,
    };
    let kinds: Vec<_> = (0..16)
        .map(|j| {
            let l = center.location + C64::from_polar(1e-3, 2.0 * PI * (j as f64 + 0.5) / 16.0);
            classify_lambda(rho, l, budget).kind
        })
        .collect();
    kinds.contains(&ClassKind::ShiftLocus) && kinds.contains(&want)
}

fn virtual_centers() -> Outcome {
    let t = Instant::now();
    let rho = two_thirds();
    let budget = ClassifierBudget::default();
    let opts = EnumerateOptions {
        max_order: 2,
        ..EnumerateOptions::default()
    };
    let window = Window::new(-50.0, 50.0, -50.0, 50.0);
    let found = enumerate_centers(rho, &window, &opts).centers;
    let order2: Vec<_> = found
        .iter()
        .filter(|v| v.order == 2 && v.itinerary.entries()[0].abs() <= 5)
        .collect();
    let residual_ok = order2.iter().all(|v| v.residual < 1e-9);
    let transversal = order2.iter().all(|v| v.transversality.norm() > 1e-6);
    let rings = order2
        .iter()
        .filter(|v| ring_has_both(rho, v, &budget))
        .count();

    let mut children_ok = true;
    let mut monotone = true;
    for parent in order2.iter().filter(|v| v.marked_av == MarkedValue::Lambda) {
        for sign in [1i64, -1] {
            let ks: Vec<i64> = (10..=25).map(|k| sign * k).collect();
            let kids = solve_children(rho, parent, &ks);
            let mut last = f64::INFINITY;
            for (_, kid) in kids {
                let Ok(kid) = kid else {
                    children_ok = false;
                    continue;
                };
                children_ok &= kid.itinerary.entries()[0] == parent.itinerary.entries()[0];
                let d = (kid.location - parent.location).norm();
                monotone &= d < last;
                last = d;
            }
        }
    }
    let secs = t.elapsed().as_secs_f64();
    let pass = order2.len() >= 11
        && residual_ok
        && transversal
        && rings == order2.len()
        && children_ok
        && monotone
        && secs < 120.0;
    outcome(
        pass,
        format!(
            "{} order-2 centers, residuals ok {residual_ok}, |c'| ok {transversal}, rings {rings}/{}, children ok {children_ok}, monotone {monotone}, {secs:.1}s",
            order2.len(),
            order2.len()
        ),
    )
}

fn koenigs_equation() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    let limits = OrbitLimits::default();
    let mut worst = 0.0f64;
    let mut params = 0;
    let mut probes = 0;
    while params < 10 {
        let p = random_param(&mut rng);
        let lin = Linearizer::at_origin(&p);
        let mut here = 0;
        let mut tries = 0;
        while here < 5 && tries < 200 {
            tries += 1;
            let z = C64::from_polar(rng.gen_range(0.0..1.5), rng.gen_range(-PI..PI));
            if !matches!(orbit_fate(&p, z, &limits).0, OrbitVerdict::ConvergedToZero) {
                continue;
            }
            if let Ok(r) = lin.functional_residual(z) {
                worst = worst.max(r);
                here += 1;
            }
        }
        if here == 5 {
            params += 1;
            probes += here;
        }
    }
    outcome(
        worst < 1e-8 && probes == 50,
        format!("{probes} probes over {params} parameters, max residual {worst:.2e}"),
    )
}

fn e_map() -> Outcome {
    let rho = two_thirds();
    let model = find_model_parameter(rho).unwrap();
    let q = model.param().unwrap();
    let lin0 = model.linearizer().unwrap();
    let budget = ClassifierBudget::default();

    let mut values = Vec::new();
    let mut above_r = true;
    let mut errors = 0;
    let mut j = 0;
    while values.len() < 20 && j < 400 {
        let lambda = rho / 2.0 + C64::from_polar(0.3 + 0.05 * (j % 5) as f64, 0.37 * j as f64);
        j += 1;
        let Ok(p) = ParamPoint::new(rho, lambda) else {
            continue;
        };
        if classify(&p, &budget).kind != ClassKind::ShiftLocus
            || s_partition(&p) != Ok(SPartition::SLambda)
        {
            continue;
        }
        match eval_e_detailed(&model, &p) {
            Ok(e) => {
                let phi = lin0.value(e.w).map(|z| z.norm()).unwrap_or(0.0);
                above_r &= phi > model.r && !in_delta(&model, e.w);
                values.push(e.w);
            }
            Err(_) => errors += 1,
        }
    }
    let mut min_gap = f64::INFINITY;
    for a in 0..values.len() {
        for b in a + 1..values.len() {
            min_gap = min_gap.min((values[a] - values[b]).norm());
        }
    }

    // (i) λ = ikπ is a zero of f, so Q(E) = q_0
    let mut case_i = 0;
    for k in [1i64, -1, 2] {
        let p = ParamPoint::new(rho, c(0.0, k as f64 * PI)).unwrap();
        if let Ok(w) = eval_e(&model, &p) {
            if (eval_f(&q, w).unwrap() - model.q0).norm() < 1e-8 {
                case_i += 1;
            }
        }
    }
    // (ii) λ − μ ∈ iπZ gives f(λ) = f(μ), so Q(E) = Q(λ_0)
    let q_l0 = eval_f(&q, model.lambda0).unwrap();
    let mut case_ii = 0;
    for k in [1i64, -1, 2] {
        let b = c(0.0, -2.0 * k as f64 * PI);
        let cc = c(0.0, k as f64 * PI) * rho;
        let disc = (b * b - 8.0 * cc).sqrt();
        for lambda in [(-b + disc) / 4.0, (-b - disc) / 4.0] {
            let p = ParamPoint::new(rho, lambda).unwrap();
            if s_partition(&p) != Ok(SPartition::SLambda) {
                continue;
            }
            if let Ok(w) = eval_e(&model, &p) {
                if (eval_f(&q, w).unwrap() - q_l0).norm() < 1e-8 {
                    case_ii += 1;
                }
            }
        }
    }
    outcome(
        values.len() == 20 && errors == 0 && min_gap > 1e-6 && above_r && case_i == 3 && case_ii == 3,
        format!(
            "{} values ({errors} errors), min gap {min_gap:.2e}, |phi_0(E)| > r: {above_r}, case (i) {case_i}/3, case (ii) {case_ii}/3",
            values.len()
        ),
    )
}

fn pixel_at(img: &Image, spec: &RenderSpec, z: C64) -> [u8; 3] {
    let (x, y) = spec.frame().to_pixel(z);
    img.get(x.round() as u32, y.round() as u32)
}

fn reference_renders() -> Outcome {
    let colors = ColorMap::classic();
    let mut notes = Vec::new();
    let mut pass = true;

    let t = Instant::now();
    let spec = RenderSpec::parameter(two_thirds(), c(1.5, 0.0), 5.0, 512);
    let img = render(&spec).unwrap().image;
    let secs_a = t.elapsed().as_secs_f64();
    // Ω_1: the whole right edge is period one
    let right = (0..512).all(|y| img.get(511, y) == colors.period(1));
    // the shift locus fills the left edge
    let left = (0..512).all(|y| img.get(0, y) == colors.shift);
    // M_μ: period-one pixels near ρ/2, enclosed by green
    let blob: Vec<(u32, u32)> = (0..512)
        .flat_map(|y| (0..200).map(move |x| (x, y)))
        .filter(|&(x, y)| img.get(x, y) == colors.period(1))
        .collect();
    let bounded = !blob.is_empty() && {
        let x0 = blob.iter().map(|p| p.0).min().unwrap() - 3;
        let x1 = blob.iter().map(|p| p.0).max().unwrap() + 3;
        let y0 = blob.iter().map(|p| p.1).min().unwrap() - 3;
        let y1 = blob.iter().map(|p| p.1).max().unwrap() + 3;
        let ring = (x0..=x1)
            .flat_map(|x| [(x, y0), (x, y1)])
            .chain((y0..=y1).flat_map(|y| [(x0, y), (x1, y)]));
        ring.into_iter().all(|(x, y)| img.get(x, y) == colors.shift)
    };
    // along the real axis: green, M_μ, green, then Ω_1
    let axis =
        [c(0.05, 0.0), c(0.36, 0.0), c(0.9, 0.0), c(3.0, 0.0)].map(|z| pixel_at(&img, &spec, z));
    let order = axis
        == [
            colors.shift,
            colors.period(1),
            colors.shift,
            colors.period(1),
        ];
    pass &= right && left && bounded && order && secs_a < 60.0;
    notes.push(format!(
        "rho=2/3: right edge yellow {right}, left edge green {left}, M_mu enclosed {bounded}, axis order {order}, {secs_a:.1}s"
    ));

    let t = Instant::now();
    let spec = RenderSpec::parameter(-two_thirds(), c(1.5, 0.0), 5.0, 512);
    let img = render(&spec).unwrap().image;
    let secs_b = t.elapsed().as_secs_f64();
    // walking the real axis leftwards out of Ω_1 the first other color is period 2
    let (_, row) = spec.frame().to_pixel(c(0.0, 0.0));
    let row = row.round() as u32;
    let mut x = 511;
    // skipping the one-pixel undetermined boundary
    while x > 0 && [colors.period(1), colors.undetermined].contains(&img.get(x, row)) {
        x -= 1;
    }
    let bud_right = x;
    while x > 0 && [colors.period(2), colors.undetermined].contains(&img.get(x, row)) {
        x -= 1;
    }
    // a bud: a run of period two between Ω_1 and the shift locus
    let bud = img.get(bud_right, row) == colors.period(2) && img.get(x, row) == colors.shift;
    pass &= bud && secs_b < 60.0;
    notes.push(format!(
        "rho=-2/3: period-2 bud on the axis {bud}, {secs_b:.1}s"
    ));
    outcome(pass, notes.join("; "))
}

fn determinism() -> Outcome {
    let spec = RenderSpec::parameter(two_thirds(), c(1.2, 1.8), 2.0, 192);
    let a = render_with_workers(&spec, Some(1))
        .unwrap()
        .image
        .encode_png()
        .unwrap();
    let b = render_with_workers(&spec, Some(1))
        .unwrap()
        .image
        .encode_png()
        .unwrap();
    let c4 = render_with_workers(&spec, Some(4))
        .unwrap()
        .image
        .encode_png()
        .unwrap();
    let c8 = render_with_workers(&spec, Some(8))
        .unwrap()
        .image
        .encode_png()
        .unwrap();
    let pass = a == b && a == c4 && a == c8;
    outcome(
        pass,
        format!(
            "repeat {}, 4 workers {}, 8 workers {}",
            a == b,
            a == c4,
            a == c8
        ),
    )
}

type Check = (&'static str, fn() -> Outcome);

fn main() {
    let started = Instant::now();
    let checks: Vec<Check> = vec![
        ("fixed-point reproduction", fixed_point),
        ("multiplier law", multiplier_law),
        ("pole/inverse coherence", pole_inverse),
        ("real-rho tie curve on C0", tie_curve_on_c0),
        ("symmetry suite", symmetry_suite),
        ("inversion equivariance", inversion_equivariance),
        ("virtual-center suite", virtual_centers),
        ("koenigs functional equation", koenigs_equation),
        ("E-map probes", e_map),
        ("reference renders", reference_renders),
        ("determinism", determinism),
    ];
    let mut unexpected = BTreeSet::new();
    for (name, check) in checks {
        let out = check();
        let known = KNOWN_FAILURES.contains(&name);
        let tag = match (out.pass, known) {
            (true, false) => "PASS",
            (false, true) => "FAIL (known)",
            (false, false) => "FAIL",
            (true, true) => "PASS (unexpected)",
        };
        println!("{tag:<17} {name}: {}", out.detail);
        if out.pass == known {
            unexpected.insert(name);
        }
    }
    println!(
        "acceptance finished in {:.1}s",
        started.elapsed().as_secs_f64()
    );
    if !unexpected.is_empty() {
        eprintln!("unexpected outcomes: {unexpected:?}");
        std::process::exit(1);
    }
}
