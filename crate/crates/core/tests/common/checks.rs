//! Oracle-backed checks. Each returns a `Check` so the same code can back an
//! ordinary test and a line of the acceptance report.

use densemocap_core::body::{BodyModel, BodyParams};
use densemocap_core::camera::{ring_rig_with, triangulate_midpoint, Camera, Intrinsics, Ray, Rig};
use densemocap_core::energy::{FrameEnergy, LandmarkBody, RegularizerWeights};
use densemocap_core::geom::rodrigues;
use densemocap_core::landmarks::{fps_sample, sample_model_landmarks, PartWeights};
use densemocap_core::lbfgs::{lbfgs_minimize, LbfgsOptions, LbfgsResult};
use densemocap_core::marker::{marker_from_point, regress_marker};
use densemocap_core::metrics::heldout_marker_error;
use densemocap_core::observe::{gnll_score, LandmarkObservation, PersonObservations, ScoreWeights};
use densemocap_core::render::{vertex_visibility, Rasterizer, DEFAULT_VISIBILITY_EPS};
use densemocap_core::robust::RobustEstimator;
use densemocap_core::toy::stick_body;
use densemocap_core::{Mat3, Vec2, Vec3};
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::{pixel_ray, ray_triangle};

#[derive(Debug, Clone)]
pub struct Check {
    pub pass: bool,
    pub detail: String,
}

impl Check {
    fn new(failures: &[String], detail: String) -> Check {
        if failures.is_empty() {
            Check { pass: true, detail }
        } else {
            let shown: Vec<_> = failures.iter().take(5).cloned().collect();
            Check {
                pass: false,
                detail: format!("{detail}; {} failure(s): {}", failures.len(), shown.join(" | ")),
            }
        }
    }

    pub fn assert(&self) {
        println!("{}", self.detail);
        assert!(self.pass, "{}", self.detail);
    }
}

pub fn random_vec(rng: &mut ChaCha8Rng, scale: f64) -> Vec3 {
    Vec3::new(
        rng.random_range(-1.0..1.0),
        rng.random_range(-1.0..1.0),
        rng.random_range(-1.0..1.0),
    ) * scale
}

pub fn random_params(rng: &mut ChaCha8Rng, k: usize, b: usize, scale: f64) -> BodyParams {
    BodyParams {
        betas: (0..b).map(|_| rng.random_range(-1.0..1.0)).collect(),
        pose: (0..k).map(|_| random_vec(rng, scale)).collect(),
        translation: Vec3::new(
            rng.random_range(-0.2..0.2),
            rng.random_range(-0.2..0.2),
            rng.random_range(-0.1..0.1),
        ),
    }
}

fn random_observations(
    rng: &mut ChaCha8Rng,
    body: &LandmarkBody,
    rig: &Rig,
    truth: &BodyParams,
) -> PersonObservations {
    let verts = body.vertices(truth);
    PersonObservations {
        person_id: 0,
        cameras: rig
            .cameras
            .iter()
            .map(|c| {
                verts
                    .iter()
                    .map(|v| LandmarkObservation {
                        mu: c.project(v).unwrap().0
                            + Vec2::new(rng.random_range(-15.0..15.0), rng.random_range(-15.0..15.0)),
                        sigma: rng.random_range(0.5..3.0),
                        p: if rng.random_bool(0.8) { 1.0 } else { 0.0 },
                    })
                    .collect()
            })
            .collect(),
    }
}

/// Analytic gradient of the full objective against central differences on
/// 100 random points, alternating Geman-McClure and Huber.
pub fn gradient_finite_differences() -> Check {
    let m = stick_body();
    let l = sample_model_landmarks(&m, &PartWeights::default(), 48, 0).unwrap();
    let body = LandmarkBody::new(&m, &l).unwrap();
    let rig = ring_rig_with(4, 3.0, 1.5, Vec3::new(0.0, 0.0, 1.1), &Intrinsics::from_fov(640, 480, 1.0))
        .unwrap();
    let weights = RegularizerWeights {
        lambda_shape: 1e-2,
        lambda_pose: 1e-2,
        lambda_temp: 0.5,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let mut worst: f64 = 0.0;
    let mut failures = Vec::new();
    for point in 0..100 {
        let est = if point % 2 == 0 {
            RobustEstimator::GemanMcClure { c: 5.0 }
        } else {
            RobustEstimator::Huber { delta: 1.0 }
        };
        let truth = random_params(&mut rng, m.num_joints(), m.num_betas(), 0.4);
        let obs = random_observations(&mut rng, &body, &rig, &truth);
        let prev = random_params(&mut rng, m.num_joints(), m.num_betas(), 0.4);
        let energy = FrameEnergy::new(&body, &rig, &obs, est, 0.5)
            .unwrap()
            .with_regularizers(weights)
            .with_previous(Some(&prev))
            .unwrap();
        let x = random_params(&mut rng, m.num_joints(), m.num_betas(), 0.6).pack();
        let mut g = vec![0.0; x.len()];
        energy.evaluate(&x, Some(&mut g)).unwrap();
        let total = |x: &[f64]| energy.evaluate(x, None).unwrap().energy.total;
        for i in 0..x.len() {
            let h = 1e-5 * x[i].abs().max(1.0);
            let mut xp = x.clone();
            let mut xm = x.clone();
            xp[i] += h;
            xm[i] -= h;
            let fd = (total(&xp) - total(&xm)) / (2.0 * h);
            if g[i].abs() > 1e-8 || fd.abs() > 1e-8 {
                let rel = (fd - g[i]).abs() / g[i].abs().max(fd.abs());
                worst = worst.max(rel);
                if !(rel < 1e-4) {
                    failures.push(format!("point {point} {est:?} x[{i}]: analytic {} fd {fd}", g[i]));
                }
            }
        }
    }
    Check::new(
        &failures,
        format!("100 points, worst relative error {worst:.2e} (limit 1e-4)"),
    )
}

/// Monte-Carlo calibration: the σ grid point minimizing the mean GNLL of
/// residuals drawn with per-axis std `s` is within one grid step of `s`.
pub fn gnll_calibration() -> Check {
    const STEP: f64 = 0.05;
    let grid: Vec<f64> = (1..=200).map(|i| i as f64 * STEP).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut failures = Vec::new();
    let mut found = Vec::new();
    for s in [0.5, 1.0, 2.0, 4.0] {
        let n = 10_000;
        let gt: Vec<Vec2> = (0..n)
            .map(|_| Vec2::new(rng.random_range(0.0..640.0), rng.random_range(0.0..480.0)))
            .collect();
        let mu: Vec<Vec2> = gt
            .iter()
            .map(|g| {
                g + Vec2::new(rng.sample::<f64, _>(StandardNormal), rng.sample::<f64, _>(StandardNormal)) * s
            })
            .collect();
        let w = ScoreWeights::uniform(n);
        let mut best = (f64::INFINITY, 0.0);
        for &sigma in &grid {
            let pred: Vec<LandmarkObservation> = mu
                .iter()
                .map(|m| LandmarkObservation { mu: *m, sigma, p: 1.0 })
                .collect();
            let score = gnll_score(&pred, &gt, &w).unwrap() / n as f64;
            if score < best.0 {
                best = (score, sigma);
            }
        }
        found.push(format!("s={s} -> {:.2}", best.1));
        if (best.1 - s).abs() > STEP + 1e-12 {
            failures.push(format!("s = {s}: argmin σ = {}", best.1));
        }
    }
    Check::new(&failures, format!("grid step {STEP}: {}", found.join(", ")))
}

/// Closed-form properties of the robust estimators.
pub fn robust_properties() -> Check {
    let mut failures = Vec::new();
    let grid: Vec<f64> = (0..=1200).map(|k| 10f64.powf(-6.0 + k as f64 * 0.01)).collect();
    for c in [0.5, 1.0, 5.0, 50.0] {
        let gm = RobustEstimator::GemanMcClure { c };
        let sup = grid.iter().map(|&x| gm.rho(x)).fold(0.0, f64::max);
        if !(sup < c * c) {
            failures.push(format!("GM c={c}: sup {sup} >= c²"));
        }
    }
    for delta in [0.1, 1.0, 2.5] {
        let h = RobustEstimator::Huber { delta };
        let inner = 0.5 * delta * delta;
        let outer = delta * (delta - 0.5 * delta);
        if (inner - outer).abs() > 1e-10 {
            failures.push(format!("Huber δ={delta}: branch values {inner} vs {outer}"));
        }
        let lo = delta * (1.0 - 1e-12);
        let hi = delta * (1.0 + 1e-12);
        if (h.rho(lo) - h.rho(hi)).abs() > 1e-10 {
            failures.push(format!("Huber δ={delta}: value jump"));
        }
        if (h.derivative(lo) - h.derivative(hi)).abs() > 1e-10 {
            failures.push(format!(
                "Huber δ={delta}: derivative jump {} vs {}",
                h.derivative(lo),
                h.derivative(hi)
            ));
        }
    }
    let kinds = [
        RobustEstimator::None,
        RobustEstimator::GemanMcClure { c: 3.0 },
        RobustEstimator::Huber { delta: 1.5 },
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for k in kinds {
        if k.rho(0.0) != 0.0 {
            failures.push(format!("{k:?}: rho(0) = {}", k.rho(0.0)));
        }
        for _ in 0..1000 {
            let x = rng.random_range(-1e3..1e3);
            if k.rho(x) != k.rho(-x) {
                failures.push(format!("{k:?}: rho({x}) != rho(-{x})"));
            }
        }
    }
    Check::new(
        &failures,
        String::from("GM sup < c² to x=1e6, Huber C¹ at δ, ρ(0)=0 and evenness"),
    )
}

fn ray_through(origin: Vec3, target: Vec3) -> Ray {
    Ray::new(origin, target - origin)
}

fn random_unit(rng: &mut ChaCha8Rng) -> Vec3 {
    loop {
        let v = random_vec(rng, 1.0);
        if let Some(u) = v.try_normalize(1e-3) {
            return u;
        }
    }
}

/// Exact intersections and agreement with a dense grid search.
pub fn triangulation() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut failures = Vec::new();
    let mut worst_exact: f64 = 0.0;
    for _ in 0..100 {
        let q = random_vec(&mut rng, 2.0);
        let k = rng.random_range(2..=8);
        let rays: Vec<Ray> = (0..k)
            .map(|_| ray_through(q + random_unit(&mut rng) * rng.random_range(1.0..5.0), q))
            .collect();
        let x = triangulate_midpoint(&rays).unwrap();
        worst_exact = worst_exact.max((x - q).norm());
    }
    if worst_exact > 1e-9 {
        failures.push(format!("exact intersection error {worst_exact:e}"));
    }

    const H: f64 = 1e-3;
    const HALF: i32 = 40;
    let mut worst_grid: f64 = 0.0;
    for inst in 0..20 {
        let q = random_vec(&mut rng, 1.0);
        let rays: Vec<Ray> = (0..8)
            .map(|_| {
                let origin = q + random_unit(&mut rng) * rng.random_range(2.0..4.0);
                ray_through(origin, q + random_vec(&mut rng, 0.01))
            })
            .collect();
        let x = triangulate_midpoint(&rays).unwrap();
        let cost = |p: &Vec3| rays.iter().map(|r| super::line_dist2(p, &r.origin, &r.direction)).sum::<f64>();
        let mut best = (f64::INFINITY, q);
        for i in -HALF..=HALF {
            for j in -HALF..=HALF {
                for l in -HALF..=HALF {
                    let p = q + Vec3::new(i as f64, j as f64, l as f64) * H;
                    let c = cost(&p);
                    if c < best.0 {
                        best = (c, p);
                    }
                }
            }
        }
        let d = (x - best.1).abs().max();
        worst_grid = worst_grid.max(d);
        if d > H {
            failures.push(format!("instance {inst}: midpoint {x:?} grid {:?}", best.1));
        }
    }
    Check::new(
        &failures,
        format!("exact error {worst_exact:.1e} m (limit 1e-9); grid gap {worst_grid:.1e} m (grid step {H})"),
    )
}

/// Greedy farthest-point selection recomputed from scratch at every step.
pub fn fps_oracle(points: &[Vec3], weights: &[f64], n: usize, seed: usize) -> Vec<usize> {
    let mut chosen = vec![seed];
    while chosen.len() < n {
        let mut best: Option<(usize, f64)> = None;
        for i in 0..points.len() {
            if chosen.contains(&i) {
                continue;
            }
            let d = chosen
                .iter()
                .map(|&s| (points[i] - points[s]).norm())
                .fold(f64::INFINITY, f64::min);
            let score = weights[i] * d;
            if best.is_none_or(|(_, b)| score > b) {
                best = Some((i, score));
            }
        }
        chosen.push(best.unwrap().0);
    }
    chosen
}

pub fn fps_brute_force() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut failures = Vec::new();
    for inst in 0..50 {
        let len = rng.random_range(1..=64);
        let points: Vec<Vec3> = (0..len).map(|_| random_vec(&mut rng, 1.0)).collect();
        let mut weights: Vec<f64> = (0..len)
            .map(|_| if rng.random_bool(0.1) { 0.0 } else { rng.random_range(0.1..10.0) })
            .collect();
        if weights.iter().all(|w| *w == 0.0) {
            weights[0] = 1.0;
        }
        let n = rng.random_range(1..=len);
        let seed = rng.random_range(0..len);
        let got = fps_sample(&points, &weights, n, seed).unwrap().indices;
        let want = fps_oracle(&points, &weights, n, seed);
        if got != want {
            failures.push(format!("instance {inst} ({len} points, n = {n}): {got:?} vs {want:?}"));
        }
    }
    Check::new(&failures, String::from("50 weighted instances of 1..=64 points"))
}

/// Two toy bodies sharing space, posed and turned differently.
pub fn two_body_scene(model: &BodyModel, seed: u64) -> (Vec<Vec3>, Vec<[usize; 3]>, usize) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut a = random_params(&mut rng, model.num_joints(), model.num_betas(), 0.5);
    let mut b = random_params(&mut rng, model.num_joints(), model.num_betas(), 0.5);
    a.pose[0] = Vec3::new(0.0, 0.0, rng.random_range(-3.0..3.0));
    b.pose[0] = Vec3::new(0.0, 0.0, rng.random_range(-3.0..3.0));
    b.translation += Vec3::new(rng.random_range(-0.2..0.2), rng.random_range(-0.2..0.2), 0.0);
    let va = model.lbs_forward(&a).unwrap().vertices;
    let vb = model.lbs_forward(&b).unwrap().vertices;
    let nv = va.len();
    let faces: Vec<[usize; 3]> = model
        .faces()
        .iter()
        .copied()
        .chain(model.faces().iter().map(|f| [f[0] + nv, f[1] + nv, f[2] + nv]))
        .collect();
    (va.into_iter().chain(vb).collect(), faces, nv)
}

pub struct VisibilityComparison {
    pub compared: usize,
    pub total: usize,
    pub mismatches: Vec<String>,
}

/// Compare z-buffer visibility with a ray-cast oracle on the vertices where
/// the decision is not a raster boundary case: every other surface is more
/// than `2·eps` away in depth along both the exact vertex ray and the ray
/// through its pixel center, both rays agree, and for a visible vertex its own
/// triangles do not come nearer than `eps` at the pixel center.
pub fn compare_visibility(
    cam: &Camera,
    vertices: &[Vec3],
    faces: &[[usize; 3]],
    eps: f64,
) -> VisibilityComparison {
    let mut r = Rasterizer::new(cam, cam.width, cam.height).unwrap();
    r.draw(vertices, faces);
    let (depth, _) = r.finish();
    let vis = vertex_visibility(vertices, cam, &depth, eps);
    let center = cam.center();
    let mut out = VisibilityComparison {
        compared: 0,
        total: vertices.len(),
        mismatches: Vec::new(),
    };
    for (i, v) in vertices.iter().enumerate() {
        let Ok((px, z)) = cam.project(v) else { continue };
        if !(px.x >= 0.0 && px.y >= 0.0 && px.x < cam.width as f64 && px.y < cam.height as f64) {
            if vis[i] {
                out.mismatches.push(format!("vertex {i} outside the image marked visible"));
            }
            continue;
        }
        // Exact ray to the vertex, parameterized by camera depth.
        let dir = (v - center) / z;
        let mut occ_ray = f64::INFINITY;
        let mut occ_px = f64::INFINITY;
        let mut own_px = f64::INFINITY;
        let pc = Vec2::new(px.x.floor() + 0.5, px.y.floor() + 0.5);
        let (o, d) = pixel_ray(cam, &pc);
        for f in faces {
            let [a, b, c] = [&vertices[f[0]], &vertices[f[1]], &vertices[f[2]]];
            let hit_px = ray_triangle(&o, &d, a, b, c);
            if f.contains(&i) {
                if let Some(t) = hit_px {
                    own_px = own_px.min(t);
                }
                continue;
            }
            if let Some(t) = ray_triangle(&center, &dir, a, b, c) {
                occ_ray = occ_ray.min(t);
            }
            if let Some(t) = hit_px {
                occ_px = occ_px.min(t);
            }
        }
        let margin_ok = (occ_ray - z).abs() > 2.0 * eps
            && (occ_px - z).abs() > 2.0 * eps
            && (occ_ray < z) == (occ_px < z)
            && (occ_ray < z || own_px >= z - eps);
        if !margin_ok {
            continue;
        }
        out.compared += 1;
        let oracle = occ_ray >= z;
        if vis[i] != oracle {
            out.mismatches.push(format!(
                "vertex {i}: z-buffer {} oracle {oracle} (depth {z:.4}, occluder {occ_ray:.4})",
                vis[i]
            ));
        }
    }
    out
}

pub fn small_rig() -> Rig {
    ring_rig_with(4, 3.0, 1.6, Vec3::new(0.0, 0.0, 1.1), &Intrinsics::from_fov(256, 192, 0.8)).unwrap()
}

/// z-buffer visibility against ray casting on interpenetrating two-body scenes.
pub fn visibility_two_bodies() -> Check {
    let m = stick_body();
    let rig = small_rig();
    let mut failures = Vec::new();
    let (mut compared, mut total) = (0, 0);
    for seed in 0..3 {
        let (verts, faces, _) = two_body_scene(&m, seed);
        for cam in &rig.cameras {
            let c = compare_visibility(cam, &verts, &faces, DEFAULT_VISIBILITY_EPS);
            compared += c.compared;
            total += c.total;
            failures.extend(c.mismatches);
        }
    }
    let frac = compared as f64 / total as f64;
    if frac < 0.8 {
        failures.push(format!("only {:.1}% of vertices passed the margin rule", 100.0 * frac));
    }
    Check::new(
        &failures,
        format!(
            "{compared} of {total} vertices beyond the 2·eps margin ({:.1}%) agree",
            100.0 * frac
        ),
    )
}

pub fn random_rotation(rng: &mut ChaCha8Rng) -> Mat3 {
    rodrigues(&(random_unit(rng) * rng.random_range(0.1..3.0)))
}

/// Marker round trip, rigid equivariance and the held-out marker metric.
pub fn marker_protocol() -> Check {
    let m = stick_body();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let faces = m.faces();
    let mut failures = Vec::new();
    let (mut rt, mut eq): (f64, f64) = (0.0, 0.0);
    for _ in 0..50 {
        let p = random_params(&mut rng, m.num_joints(), m.num_betas(), 0.5);
        let verts = m.lbs_forward(&p).unwrap().vertices;
        let vi = rng.random_range(0..verts.len());
        let q = verts[vi] + random_vec(&mut rng, 0.05);
        let spec = marker_from_point(&verts, faces, vi, &q).unwrap();
        rt = rt.max((regress_marker(&verts, faces, &spec).unwrap() - q).norm());
        let r = random_rotation(&mut rng);
        let u = random_vec(&mut rng, 2.0);
        let moved: Vec<Vec3> = verts.iter().map(|v| r * v + u).collect();
        eq = eq.max((regress_marker(&moved, faces, &spec).unwrap() - (r * q + u)).norm());
    }
    if rt > 1e-9 {
        failures.push(format!("round trip error {rt:e}"));
    }
    if eq > 1e-6 {
        failures.push(format!("equivariance error {eq:e}"));
    }

    let seq: Vec<Vec<Vec3>> = (0..5)
        .map(|_| {
            let p = random_params(&mut rng, m.num_joints(), m.num_betas(), 0.5);
            m.lbs_forward(&p).unwrap().vertices
        })
        .collect();
    let specs: Vec<_> = (0..20)
        .map(|_| {
            let vi = rng.random_range(0..m.num_vertices());
            let q = seq[0][vi] + random_vec(&mut rng, 0.02);
            marker_from_point(&seq[0], faces, vi, &q).unwrap()
        })
        .collect();
    let same = heldout_marker_error(faces, &seq, &seq, &specs).unwrap();
    if same != 0.0 {
        failures.push(format!("identical sequences give {same}"));
    }
    let offset = Vec3::new(0.012, -0.007, 0.02);
    let shifted: Vec<Vec<Vec3>> = seq.iter().map(|f| f.iter().map(|v| v + offset).collect()).collect();
    let err = heldout_marker_error(faces, &seq, &shifted, &specs).unwrap();
    if (err - offset.norm()).abs() > 1e-12 {
        failures.push(format!("translated sequence gives {err}, offset {}", offset.norm()));
    }
    Check::new(
        &failures,
        format!("round trip {rt:.1e} m, equivariance {eq:.1e} m, held-out offset {err:.6} vs {:.6} m", offset.norm()),
    )
}

pub fn monotone(result: &LbfgsResult) -> bool {
    result.trace.windows(2).all(|w| w[1].objective <= w[0].objective)
}

pub fn rosenbrock(x: &[f64], g: &mut [f64]) -> f64 {
    let (a, b) = (x[0], x[1]);
    g[0] = -2.0 * (1.0 - a) - 400.0 * a * (b - a * a);
    g[1] = 200.0 * (b - a * a);
    (1.0 - a).powi(2) + 100.0 * (b - a * a).powi(2)
}

/// `½xᵀAx − bᵀx` with a random SPD `A`, and its exact minimizer.
pub fn spd_quadratic(rng: &mut ChaCha8Rng, n: usize) -> (DMatrix<f64>, DVector<f64>, DVector<f64>) {
    let m = DMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
    let a = m.transpose() * &m + DMatrix::identity(n, n);
    let b = DVector::from_fn(n, |_, _| rng.random_range(-1.0..1.0));
    let x = a.clone().cholesky().unwrap().solve(&b);
    (a, b, x)
}

pub fn quadratic_objective<'a>(
    a: &'a DMatrix<f64>,
    b: &'a DVector<f64>,
) -> impl FnMut(&[f64], &mut [f64]) -> f64 + 'a {
    move |x, g| {
        let xv = DVector::from_column_slice(x);
        let ax = a * &xv;
        g.copy_from_slice((&ax - b).as_slice());
        0.5 * xv.dot(&ax) - b.dot(&xv)
    }
}

/// Classical benchmarks for the minimizer.
pub fn lbfgs_benchmarks() -> Check {
    let mut failures = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let opts = LbfgsOptions {
        max_iterations: 500,
        gradient_tolerance: 1e-12,
        ..Default::default()
    };
    let mut worst_q: f64 = 0.0;
    for inst in 0..5 {
        let (a, b, xs) = spd_quadratic(&mut rng, 10);
        let r = lbfgs_minimize(quadratic_objective(&a, &b), &[0.0; 10], &opts).unwrap();
        let err = (DVector::from_column_slice(&r.x) - &xs).amax();
        worst_q = worst_q.max(err);
        if err > 1e-8 {
            failures.push(format!("quadratic {inst}: error {err:e} ({:?})", r.termination));
        }
        if !monotone(&r) {
            failures.push(format!("quadratic {inst}: non-monotone trace"));
        }
    }
    let opts = LbfgsOptions {
        max_iterations: 200,
        gradient_tolerance: 1e-10,
        ..Default::default()
    };
    let r = lbfgs_minimize(rosenbrock, &[-1.2, 1.0], &opts).unwrap();
    let err = ((r.x[0] - 1.0).powi(2) + (r.x[1] - 1.0).powi(2)).sqrt();
    if err > 1e-6 || r.iterations > 200 {
        failures.push(format!("Rosenbrock: error {err:e} after {} iterations", r.iterations));
    }
    if !monotone(&r) {
        failures.push(String::from("Rosenbrock: non-monotone trace"));
    }
    Check::new(
        &failures,
        format!(
            "SPD 10×10 error {worst_q:.1e} (limit 1e-8); Rosenbrock error {err:.1e} in {} iterations (limit 1e-6, 200); traces monotone",
            r.iterations
        ),
    )
}
