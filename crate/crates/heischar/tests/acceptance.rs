//! Acceptance suite: one test per criterion, each printing a PASS line
//! with the measured numbers (run with `--nocapture` to see them).
//!
//! Expected values are pinned here from independent oracles:
//! closed forms on the gauge sphere (|∇_Hφ|² = 16|z|²ρ⁴), the profile-disc
//! bound (min |∇_HΨ|² = 16(a₂−r)r²), one-dimensional meridian root-finding
//! for the Euclidean sphere, and finite differences for every tangent map.

use std::time::Instant;

use heischar::characteristic::{
    certify_convex, char_measure, scan, tangent_frame, CertifyOptions, ScanConfig,
    DEFAULT_RANK_RATIO_TOL,
};
use heischar::convex::{boundary_to_circle, disc_to_region, region_to_disc, ConvexProfile};
use heischar::error::Error;
use heischar::field::{product, ScalarField};
use heischar::heis::{
    contact_form, dilate, distance, frame_at, gauge, group_inv, group_mul, left_translate_push,
    siegel_action, siegel_embed, zbar_derivative, HPoint,
};
use heischar::profile::{
    euclidean_ball, koranyi_ball, make_torus, newton_project, Domain, Profile,
};
use heischar::report::{render_scan_json, strip_volatile, RunMeta, Timings};
use heischar::torus_map::{from_product, tangent_map, tangent_map_min_singular, to_product};
use heischar::TangentVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn unit_ball() -> Domain {
    Domain::Implicit(koranyi_ball(&HPoint::origin(1), 1.0).unwrap())
}

fn example_torus() -> heischar::TorusDomain {
    make_torus(Profile::disc([1.0, 2.0], 1.0).unwrap()).unwrap()
}

fn koranyi_dist(a: [f64; 3], b: [f64; 3]) -> f64 {
    distance(&HPoint::from_coords3(a), &HPoint::from_coords3(b)).unwrap()
}

/// Random point on the unit gauge sphere (exact boundary, |z| > 0).
fn random_gauge_sphere_point(rng: &mut ChaCha8Rng) -> HPoint {
    let a: f64 = rng.gen_range(-1.5..1.5);
    let zz = a.cos();
    let r = zz.sqrt();
    let phi: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
    HPoint::xyt(r * phi.cos(), r * phi.sin(), a.sin())
}

#[test]
fn acceptance_1_koranyi_ball_two_characteristic_points() {
    // Oracle check first: |∇_H φ|² = 16 |z|² ρ⁴ on the unit sphere.
    let ball = unit_ball();
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    for _ in 0..200 {
        let p = random_gauge_sphere_point(&mut rng);
        let gd = ball.psi().eval_with_gradient(&p.coords3()).unwrap();
        let h = gd.horizontal.unwrap();
        let lhs = h[0] * h[0] + h[1] * h[1];
        let rhs = 16.0 * p.z_norm_sq() * gauge(&p).powi(4);
        assert!(
            (lhs - rhs).abs() <= 1e-10 * (1.0 + rhs),
            "horizontal-gradient oracle violated: {lhs} vs {rhs}"
        );
    }

    // Single-threaded 64³ scan.
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(1)
        .build()
        .unwrap();
    let start = Instant::now();
    let out = pool.install(|| scan(&ball, &ScanConfig::boxed(64)).unwrap());
    let elapsed = start.elapsed().as_secs_f64();
    let r = &out.report;
    assert_eq!(
        r.characteristic.len(),
        2,
        "expected exactly two characteristic points, got {:#?}",
        r.characteristic
    );
    let mut found: Vec<[f64; 3]> = r.characteristic.iter().map(|c| c.point).collect();
    found.sort_by(|a, b| a[2].partial_cmp(&b[2]).unwrap());
    let d_south = koranyi_dist(found[0], [0.0, 0.0, -1.0]);
    let d_north = koranyi_dist(found[1], [0.0, 0.0, 1.0]);
    assert!(d_south <= 1e-6, "south pole off by {d_south:.3e}");
    assert!(d_north <= 1e-6, "north pole off by {d_north:.3e}");
    assert!(
        elapsed < 10.0,
        "single-threaded 64³ scan took {elapsed:.2} s (target < 10 s)"
    );
    println!(
        "acceptance 1 (koranyi ball, 64³): PASS — 2 characteristic points, \
         pole errors {d_south:.2e}/{d_north:.2e}, {elapsed:.2} s single-threaded"
    );
}

#[test]
fn acceptance_2_heisenberg_torus_clean_and_certified() {
    let start = Instant::now();
    let torus = example_torus();
    let out = scan(
        &Domain::Torus(torus.clone()),
        &ScanConfig::parametric(256, 64),
    )
    .unwrap();
    let r = &out.report;
    assert!(
        r.characteristic.is_empty(),
        "unexpected characteristic points {:#?}",
        r.characteristic
    );

    // Analytic disc bound: min |∇_H Ψ| = 4, attained where |z|² = 1.
    let bound = heischar::characteristic::disc_certificate([1.0, 2.0], 1.0).unwrap();
    assert_eq!(bound.min_hgrad, 4.0);
    let rel = (r.global_min_hgrad.value - bound.min_hgrad).abs() / bound.min_hgrad;
    assert!(rel <= 0.01, "min |∇_H Ψ| off by {:.3}%", rel * 100.0);

    // Global minimum of the measure: 1/(1 + 2√3) at the top circle.
    let expected_m = 1.0 / (1.0 + 2.0 * 3.0f64.sqrt());
    assert!(
        (r.global_min_m.value - expected_m).abs() <= 1e-4,
        "global min m {} vs {}",
        r.global_min_m.value,
        expected_m
    );

    let cert = certify_convex(
        &torus,
        &CertifyOptions {
            n_samples: 10_000,
            ..CertifyOptions::default()
        },
    )
    .unwrap();
    assert!(cert.pass, "certificate failed: {:#?}", cert.violations);
    assert!(cert.n_samples >= 10_000);
    assert!(cert.violations.is_empty());
    let elapsed = start.elapsed().as_secs_f64();
    assert!(
        elapsed < 5.0,
        "torus suite took {elapsed:.2} s (target < 5 s)"
    );
    println!(
        "acceptance 2 (heisenberg torus, 256×64 + certificate on {} samples): PASS — \
         0 characteristic points, min |∇_H Ψ| = {:.6} (analytic 4), min m = {:.6} \
         (analytic {:.6}), min rank ratio {:.3}, {elapsed:.2} s",
        cert.n_samples,
        r.global_min_hgrad.value,
        r.global_min_m.value,
        expected_m,
        cert.min_rank_ratio
    );
}

#[test]
fn acceptance_3_euclidean_sphere_has_characteristic_points() {
    // 1-d oracle along the meridian (sin α, 0, 5 + cos α): characteristic
    // points solve (x, y, t−5) ∥ (−2y, 2x, 1), i.e. |∇_H Ψ|² = 0.
    let ball = euclidean_ball([0.0, 0.0, 5.0], 1.0).unwrap();
    let q = |alpha: f64| {
        let p = [alpha.sin(), 0.0, 5.0 + alpha.cos()];
        let gd = ball.psi().eval_with_gradient(&p).unwrap();
        let h = gd.horizontal.unwrap();
        h[0] * h[0] + h[1] * h[1]
    };
    let n = 20_000;
    let mut oracle_points: Vec<[f64; 3]> = Vec::new();
    for k in 0..n {
        let alpha = std::f64::consts::TAU * k as f64 / n as f64;
        if q(alpha) < 1e-12 {
            let p = [alpha.sin(), 0.0, 5.0 + alpha.cos()];
            if !oracle_points.iter().any(|o| koranyi_dist(*o, p) < 1e-3) {
                oracle_points.push(p);
            }
        }
    }
    oracle_points.sort_by(|a, b| a[2].partial_cmp(&b[2]).unwrap());
    assert_eq!(
        oracle_points.len(),
        2,
        "meridian oracle should isolate the two axis points"
    );
    assert!(koranyi_dist(oracle_points[0], [0.0, 0.0, 4.0]) < 1e-6);
    assert!(koranyi_dist(oracle_points[1], [0.0, 0.0, 6.0]) < 1e-6);

    let out = scan(&Domain::Implicit(ball), &ScanConfig::boxed(48)).unwrap();
    let found = &out.report.characteristic;
    assert!(!found.is_empty(), "scan reported no characteristic points");
    for c in found {
        let nearest = oracle_points
            .iter()
            .map(|o| koranyi_dist(*o, c.point))
            .fold(f64::INFINITY, f64::min);
        assert!(
            nearest <= 1e-6,
            "found point {:?} is {nearest:.3e} from the oracle set",
            c.point
        );
    }
    println!(
        "acceptance 3 (euclidean sphere): PASS — {} characteristic points, all within 1e-6 \
         of the oracle points (0,0,4), (0,0,6)",
        found.len()
    );
}

#[test]
fn acceptance_4_criterion_equivalence() {
    let mut rng = ChaCha8Rng::seed_from_u64(404);
    let mut total = 0usize;
    let check = |psi: &ScalarField<3>, xi: &HPoint| {
        let m = char_measure(psi, xi).unwrap();
        let f = tangent_frame(psi, xi, DEFAULT_RANK_RATIO_TOL).unwrap();
        assert_eq!(
            m < 1e-6,
            f.intersection_dim == 2,
            "criteria disagree at {:?}: m = {m:.3e}, dim = {}, ratio = {:.3e}",
            xi.coords3(),
            f.intersection_dim,
            f.rank_ratio
        );
    };

    // Gauge spheres, exact parametrization.
    for lam in [1.0, 2.0] {
        let ball = koranyi_ball(&HPoint::origin(1), lam).unwrap();
        for _ in 0..2500 {
            let p = random_gauge_sphere_point(&mut rng);
            let p = dilate(lam, &p).unwrap();
            check(ball.psi(), &p);
            total += 1;
        }
    }
    // Torus boundaries, exact parametrization.
    for profile in [
        Profile::disc([1.0, 2.0], 1.0).unwrap(),
        Profile::ellipse([0.0, 3.0], 2.0, 1.0).unwrap(),
    ] {
        let torus = make_torus(profile).unwrap();
        for _ in 0..2500 {
            let s: f64 = rng.gen_range(0.0..1.0);
            let theta: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
            let xi = torus.boundary_point(s, theta).unwrap();
            check(torus.psi(), &xi);
            total += 1;
        }
    }
    // Euclidean sphere via Newton projection from random interior points.
    let ball = euclidean_ball([0.0, 0.0, 5.0], 1.0).unwrap();
    let mut projected = 0;
    while projected < 2500 {
        let start = [
            rng.gen_range(-1.1..1.1),
            rng.gen_range(-1.1..1.1),
            rng.gen_range(3.9..6.1),
        ];
        if let Ok(p) = newton_project(ball.psi(), start, 1e-12, 60) {
            check(ball.psi(), &HPoint::from_coords3(p));
            projected += 1;
            total += 1;
        }
    }
    assert!(total >= 10_000);
    println!(
        "acceptance 4 (criterion equivalence): PASS — {total} boundary samples, \
         zero disagreements between [m < 1e-6] and [intersection dim = 2]"
    );
}

#[test]
fn acceptance_5_defining_function_independence() {
    let rescale = |psi: &ScalarField<3>| {
        let h = ScalarField::new("h", *psi.bounds(), |p: &[f64; 3]| {
            1.0 + 0.3 * (p[0] + 2.0 * p[1] - p[2]).sin()
        })
        .with_gradient(|p: &[f64; 3]| {
            let c = 0.3 * (p[0] + 2.0 * p[1] - p[2]).cos();
            [c, 2.0 * c, -c]
        });
        product(&h, psi)
    };

    // Pointwise agreement of the measure on boundary samples of both
    // domain families.
    let ball = unit_ball();
    let scaled_ball_field = rescale(ball.psi());
    let mesh = heischar::boundary_mesh(&ball, &heischar::MeshSpec::Box { n: 32 }, 1e-13).unwrap();
    let mut max_dev = 0.0f64;
    for s in &mesh.samples {
        let xi = HPoint::from_coords3(s.point);
        let m1 = char_measure(ball.psi(), &xi).unwrap();
        let m2 = char_measure(&scaled_ball_field, &xi).unwrap();
        max_dev = max_dev.max((m1 - m2).abs());
    }
    let torus = example_torus();
    let scaled_torus_field = rescale(torus.psi());
    for k in 0..128 {
        for j in 0..8 {
            let xi = torus
                .boundary_point(k as f64 / 128.0, std::f64::consts::TAU * j as f64 / 8.0)
                .unwrap();
            let m1 = char_measure(torus.psi(), &xi).unwrap();
            let m2 = char_measure(&scaled_torus_field, &xi).unwrap();
            max_dev = max_dev.max((m1 - m2).abs());
        }
    }
    assert!(max_dev <= 1e-9, "measure deviated by {max_dev:.3e}");

    // Identical characteristic sets from full scans of Ψ and h·Ψ.
    let mut cfg = ScanConfig::boxed(48);
    cfg.tol_char = 1e-9;
    let out1 = scan(&ball, &cfg).unwrap();
    let out2 = scan(
        &Domain::Implicit(heischar::ImplicitDomain::new(scaled_ball_field)),
        &cfg,
    )
    .unwrap();
    assert_eq!(
        out1.report.characteristic.len(),
        out2.report.characteristic.len()
    );
    // Both scans must identify the same characteristic set, the two poles.
    // The gauge takes a fourth root of t-offsets, so machine-level
    // t-agreement (~1e-14 here) still reads as ~1e-7 in gauge distance;
    // 1e-6 is the same localization class as the pole matching above.
    for report in [&out1.report, &out2.report] {
        for c in &report.characteristic {
            let nearest = [[0.0, 0.0, 1.0], [0.0, 0.0, -1.0]]
                .iter()
                .map(|p| koranyi_dist(c.point, *p))
                .fold(f64::INFINITY, f64::min);
            assert!(
                nearest <= 1e-6,
                "point {:?} off the poles by {nearest:.3e}",
                c.point
            );
        }
    }
    for c1 in &out1.report.characteristic {
        let nearest = out2
            .report
            .characteristic
            .iter()
            .map(|c2| koranyi_dist(c1.point, c2.point))
            .fold(f64::INFINITY, f64::min);
        assert!(
            nearest <= 1e-6,
            "characteristic sets differ by {nearest:.3e}"
        );
    }
    let tcfg = {
        let mut c = ScanConfig::parametric(128, 16);
        c.tol_char = 1e-9;
        c
    };
    let t1 = scan(&Domain::Torus(torus), &tcfg).unwrap();
    assert!(t1.report.characteristic.is_empty());
    println!(
        "acceptance 5 (defining-function independence): PASS — max |Δm| = {max_dev:.3e} \
         over {} + 1024 samples, characteristic sets identical ({} points)",
        mesh.samples.len(),
        out1.report.characteristic.len()
    );
}

#[test]
fn acceptance_6_diffeomorphism_suite() {
    let mut rng = ChaCha8Rng::seed_from_u64(606);
    let mut max_rt = 0.0f64;
    let mut n_rt = 0;
    while n_rt < 100_000 {
        let p = HPoint::xyt(
            rng.gen_range(-2.0..2.0),
            rng.gen_range(-2.0..2.0),
            rng.gen_range(-4.0..4.0),
        );
        if p.z_norm() < 0.1 {
            continue;
        }
        let q = to_product(&p).unwrap();
        let back = from_product(&q).unwrap();
        for i in 0..3 {
            max_rt = max_rt.max((back.coords3()[i] - p.coords3()[i]).abs());
        }
        // Other composition order on the product side.
        let q2 = to_product(&back).unwrap();
        max_rt = max_rt
            .max((q2.w[0] - q.w[0]).abs())
            .max((q2.w[1] - q.w[1]).abs())
            .max((q2.u[0] - q.u[0]).abs())
            .max((q2.u[1] - q.u[1]).abs());
        n_rt += 1;
    }
    assert!(max_rt <= 1e-12, "round-trip error {max_rt:.3e}");

    // Tangent map against a finite-difference Jacobian of the forward map.
    let mut max_fd = 0.0f64;
    let mut min_sv = f64::INFINITY;
    for _ in 0..2000 {
        let p = HPoint::xyt(
            rng.gen_range(-2.0..2.0),
            rng.gen_range(-2.0..2.0),
            rng.gen_range(-4.0..4.0),
        );
        if p.z_norm() < 0.1 {
            continue;
        }
        let c = p.coords3();
        for axis in 0..3 {
            let mut v = [0.0; 3];
            v[axis] = 1.0;
            let tv = TangentVector::new(p.clone(), &v).unwrap();
            let tf = tangent_map(&p, &tv).unwrap();
            let h = 1e-6 * (1.0 + c[axis].abs());
            let mut a = c;
            let mut b = c;
            a[axis] += h;
            b[axis] -= h;
            let qa = to_product(&HPoint::from_coords3(a)).unwrap();
            let qb = to_product(&HPoint::from_coords3(b)).unwrap();
            let fd = [
                (qa.w[0] - qb.w[0]) / (2.0 * h),
                (qa.w[1] - qb.w[1]) / (2.0 * h),
                (qa.u[0] - qb.u[0]) / (2.0 * h),
                (qa.u[1] - qb.u[1]) / (2.0 * h),
            ];
            max_fd = max_fd
                .max((tf.dw[0] - fd[0]).abs())
                .max((tf.dw[1] - fd[1]).abs())
                .max((tf.du[0] - fd[2]).abs())
                .max((tf.du[1] - fd[3]).abs());
        }
        min_sv = min_sv.min(tangent_map_min_singular(&p).unwrap());
    }
    assert!(
        max_fd <= 1e-7,
        "tangent map vs finite differences: {max_fd:.3e}"
    );
    assert!(min_sv > 0.0, "tangent map lost rank");
    println!(
        "acceptance 6 (diffeomorphism suite): PASS — 10⁵ round trips ≤ {max_rt:.2e}, \
         tangent map vs FD ≤ {max_fd:.2e}, min singular value {min_sv:.3}"
    );
}

#[test]
fn acceptance_7_convex_homeomorphism_suite() {
    let profiles: Vec<(&str, Profile)> = vec![
        ("disc", Profile::disc([1.0, 2.0], 1.0).unwrap()),
        ("ellipse", Profile::ellipse([0.0, 3.0], 2.0, 1.0).unwrap()),
        (
            "rounded-triangle",
            Profile::rounded_polygon(&[[0.0, 2.0], [2.0, 2.5], [0.8, 4.0]], 0.25).unwrap(),
        ),
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(707);
    for (name, profile) in &profiles {
        let cp = ConvexProfile::new(profile.clone(), None, None).unwrap();
        let a = cp.reference_point();
        let r = cp.reference_radius();
        let mut max_err = 0.0f64;
        for _ in 0..1000 {
            let ang: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
            let rad: f64 = rng.gen_range(0.0..1.0f64).sqrt() * r;
            let y = [a[0] + rad * ang.cos(), a[1] + rad * ang.sin()];
            let x = disc_to_region(&cp, y).unwrap();
            let back = region_to_disc(&cp, x).unwrap();
            max_err = max_err.max(((back[0] - y[0]).powi(2) + (back[1] - y[1]).powi(2)).sqrt());
            // Opposite order, starting from the region point.
            let y2 = region_to_disc(&cp, x).unwrap();
            let x2 = disc_to_region(&cp, y2).unwrap();
            max_err = max_err.max(((x2[0] - x[0]).powi(2) + (x2[1] - x[1]).powi(2)).sqrt());
        }
        assert!(max_err <= 1e-9, "{name}: round-trip error {max_err:.3e}");

        // Injectivity of the boundary-to-circle map on a uniform mesh.
        let m = 256;
        let pts = profile.curve_samples(m).unwrap();
        let angles: Vec<f64> = pts
            .iter()
            .map(|x| {
                let w = boundary_to_circle(&cp, *x).unwrap();
                (w[1] - a[1]).atan2(w[0] - a[0])
            })
            .collect();
        let mut min_sep = f64::INFINITY;
        for i in 0..m {
            for j in i + 1..m {
                let mut d = (angles[i] - angles[j]).abs();
                d = d.min(std::f64::consts::TAU - d);
                min_sep = min_sep.min(d);
            }
        }
        let ratio = min_sep / (std::f64::consts::TAU / m as f64);
        assert!(
            ratio > 0.05,
            "{name}: angular separation ratio {ratio:.4} too small"
        );
        println!(
            "acceptance 7 [{name}]: round trips ≤ {max_err:.2e}, injectivity separation \
             ratio {ratio:.3}"
        );
    }
    // The non-convex shape is refused.
    assert!(matches!(
        ConvexProfile::new(
            Profile::flower([0.0, 3.0], 1.0, 0.5, 3).unwrap(),
            None,
            None
        ),
        Err(Error::NonConvexProfile(_))
    ));
    println!("acceptance 7 (convex homeomorphism suite): PASS — non-convex profile rejected");
}

#[test]
fn acceptance_8_algebra_suite() {
    let mut rng = ChaCha8Rng::seed_from_u64(808);
    let rand_pt = |rng: &mut ChaCha8Rng| {
        HPoint::xyt(
            rng.gen_range(-3.0..3.0),
            rng.gen_range(-3.0..3.0),
            rng.gen_range(-3.0..3.0),
        )
    };

    // Group axioms.
    let mut max_assoc = 0.0f64;
    for _ in 0..1000 {
        let (p, q, r) = (rand_pt(&mut rng), rand_pt(&mut rng), rand_pt(&mut rng));
        let a = group_mul(&group_mul(&p, &q).unwrap(), &r).unwrap();
        let b = group_mul(&p, &group_mul(&q, &r).unwrap()).unwrap();
        for i in 0..3 {
            max_assoc = max_assoc.max((a.coords3()[i] - b.coords3()[i]).abs());
        }
        max_assoc = max_assoc.max(gauge(&group_mul(&p, &group_inv(&p)).unwrap()));
    }
    assert!(max_assoc <= 1e-12, "group axioms at {max_assoc:.3e}");

    // Left invariance of the frame: closed form exactly, FD within 1e-8.
    let mut max_fd = 0.0f64;
    for _ in 0..200 {
        let g = rand_pt(&mut rng);
        let p = rand_pt(&mut rng);
        let f = frame_at(&p);
        let fg = frame_at(&group_mul(&g, &p).unwrap());
        for (v, target) in [(&f.x[0], &fg.x[0]), (&f.y[0], &fg.y[0])] {
            let pushed = left_translate_push(&g, v).unwrap();
            assert_eq!(pushed.components(), target.components());
            // Finite-difference pushforward of q ↦ g·q.
            let h = 1e-6;
            let vc = [v.components()[0], v.components()[1], v.components()[2]];
            let mut a = p.coords3();
            let mut b = p.coords3();
            for i in 0..3 {
                a[i] += h * vc[i];
                b[i] -= h * vc[i];
            }
            let ga = group_mul(&g, &HPoint::from_coords3(a)).unwrap().coords3();
            let gb = group_mul(&g, &HPoint::from_coords3(b)).unwrap().coords3();
            for i in 0..3 {
                max_fd = max_fd.max(((ga[i] - gb[i]) / (2.0 * h) - pushed.components()[i]).abs());
            }
        }
    }
    assert!(max_fd <= 1e-8, "FD pushforward at {max_fd:.3e}");

    // Gauge homogeneity (relative) and contact-form values (exact).
    let mut max_hom = 0.0f64;
    for _ in 0..500 {
        let p = rand_pt(&mut rng);
        let lam: f64 = rng.gen_range(0.1..5.0);
        let g1 = gauge(&dilate(lam, &p).unwrap());
        let g0 = lam * gauge(&p);
        if g0 > 0.0 {
            max_hom = max_hom.max((g1 - g0).abs() / g0);
        }
        let f = frame_at(&p);
        assert_eq!(contact_form(&p, &f.x[0]).unwrap(), 0.0);
        assert_eq!(contact_form(&p, &f.y[0]).unwrap(), 0.0);
        assert_eq!(contact_form(&p, &f.t).unwrap(), 1.0);
    }
    assert!(max_hom <= 1e-12, "gauge homogeneity at {max_hom:.3e}");

    // Siegel equivariance.
    let mut max_sieg = 0.0f64;
    for _ in 0..500 {
        let g = rand_pt(&mut rng);
        let p = rand_pt(&mut rng);
        let lhs = siegel_action(&g, &siegel_embed(&p)).unwrap();
        let rhs = siegel_embed(&group_mul(&g, &p).unwrap());
        for (a, b) in lhs.iter().zip(&rhs) {
            max_sieg = max_sieg.max((a - b).norm() / (1.0 + b.norm()));
        }
    }
    assert!(max_sieg <= 1e-12, "siegel equivariance at {max_sieg:.3e}");

    // The conjugate CR derivative annihilates w = t + i|z|².
    let bounds = heischar::BoundingBox::new([-6.0; 3], [6.0; 3]).unwrap();
    let re = ScalarField::new("re w", bounds, |p: &[f64; 3]| p[2]);
    let im = ScalarField::new("im w", bounds, |p: &[f64; 3]| p[0] * p[0] + p[1] * p[1]);
    let mut max_cr = 0.0f64;
    for _ in 0..200 {
        let p = rand_pt(&mut rng);
        let r = zbar_derivative(&re, &im, &p).unwrap();
        max_cr = max_cr.max(r[0].abs()).max(r[1].abs());
    }
    assert!(max_cr <= 1e-9, "conjugate CR derivative at {max_cr:.3e}");
    println!(
        "acceptance 8 (algebra suite): PASS — axioms ≤ {max_assoc:.1e}, FD pushforward ≤ \
         {max_fd:.1e}, homogeneity ≤ {max_hom:.1e}, siegel ≤ {max_sieg:.1e}, CR ≤ {max_cr:.1e}"
    );
}

#[test]
fn acceptance_9_dilation_covariance_of_characteristic_sets() {
    // Tight thresholds localize the poles well below the 1e-8 comparison
    // tolerance; every threshold is still echoed in the reports.
    let mut cfg = ScanConfig::boxed(48);
    cfg.tol_char = 1e-9;
    let base = scan(&unit_ball(), &cfg).unwrap();
    assert_eq!(base.report.characteristic.len(), 2);
    for lam in [0.5, 2.0, 3.0] {
        let scaled = Domain::Implicit(koranyi_ball(&HPoint::origin(1), lam).unwrap());
        let out = scan(&scaled, &cfg).unwrap();
        assert_eq!(
            out.report.characteristic.len(),
            2,
            "λ = {lam}: {:#?}",
            out.report.characteristic
        );
        for c in &base.report.characteristic {
            let image = dilate(lam, &HPoint::from_coords3(c.point)).unwrap();
            let nearest = out
                .report
                .characteristic
                .iter()
                .map(|s| koranyi_dist(s.point, image.coords3()))
                .fold(f64::INFINITY, f64::min);
            assert!(
                nearest <= 1e-8,
                "λ = {lam}: dilated point {:?} misses by {nearest:.3e}",
                image.coords3()
            );
        }
    }
    println!(
        "acceptance 9 (dilation covariance): PASS — characteristic sets commute with \
         dilations λ ∈ {{0.5, 2, 3}} within 1e-8"
    );
}

#[test]
fn acceptance_10_reproducibility() {
    // Same config, fresh domain objects, two full runs: identical JSON
    // once the volatile run block is stripped.
    let run = |seed: u64| {
        let torus = example_torus();
        let mut cfg = ScanConfig::parametric(64, 16);
        cfg.seed = seed;
        let out = scan(&Domain::Torus(torus), &cfg).unwrap();
        let meta = RunMeta {
            timestamp: format!("run-at-{:?}", std::time::SystemTime::now()),
            timings_ms: Timings {
                total_ms: std::time::UNIX_EPOCH.elapsed().unwrap().subsec_nanos() as f64,
            },
        };
        render_scan_json(&out.report, &meta).unwrap()
    };
    let a = run(42);
    let b = run(42);
    assert_ne!(a, b, "volatile metadata should differ between runs");
    let sa = strip_volatile(&a).unwrap();
    let sb = strip_volatile(&b).unwrap();
    assert_eq!(sa.as_bytes(), sb.as_bytes(), "stripped reports differ");

    let ball_run = |_| {
        let out = scan(&unit_ball(), &ScanConfig::boxed(32)).unwrap();
        let meta = RunMeta::default();
        strip_volatile(&render_scan_json(&out.report, &meta).unwrap()).unwrap()
    };
    assert_eq!(ball_run(0).as_bytes(), ball_run(1).as_bytes());
    println!(
        "acceptance 10 (reproducibility): PASS — byte-identical reports after removing \
         the volatile run block ({} bytes compared)",
        sa.len()
    );
}
