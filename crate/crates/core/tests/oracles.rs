mod common;

use admip::linalg::{frobenius_norm, singular_values, svd_threshold};
use admip::subproblem::{kkt_residuals, zs_objective};
use admip::theta::{clip_level_search, solve_quartic_positive};
use admip::{
    phi, refine_sparse, singular_value_shrink, subproblem_zs, theta_search, DenseMatrix,
    ObservationMask, SpcpInstance, ThetaProblem,
};
use common::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_mask(rows: usize, cols: usize, p: f64, rng: &mut impl Rng) -> ObservationMask {
    let mut idx: Vec<(usize, usize)> = (0..cols)
        .flat_map(|j| (0..rows).map(move |i| (i, j)))
        .filter(|_| rng.gen_bool(p))
        .collect();
    if idx.is_empty() {
        idx.push((0, 0));
    }
    ObservationMask::new(rows, cols, idx).unwrap()
}

#[test]
fn singular_values_match_nalgebra() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for &(m, n) in &[(1, 1), (7, 3), (3, 7), (20, 20), (45, 31)] {
        let a = gaussian(m, n, &mut rng);
        let ours = singular_values(&a).unwrap();
        let mut theirs: Vec<f64> = to_na(&a).singular_values().iter().copied().collect();
        theirs.sort_by(|x, y| y.total_cmp(x));
        assert_eq!(ours.len(), theirs.len());
        for (x, y) in ours.iter().zip(&theirs) {
            assert!((x - y).abs() <= 1e-11 * theirs[0], "{x} vs {y}");
        }
    }
}

#[test]
fn shrinkage_matches_full_svd_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for trial in 0..30 {
        let (m, n) = (rng.gen_range(1..25), rng.gen_range(1..25));
        let a = gaussian(m, n, &mut rng);
        let s1 = singular_values(&a).unwrap()[0];
        let alpha = rng.gen_range(0.01..1.2) * s1;
        let ours = singular_value_shrink(&a, alpha).unwrap();
        let oracle = na_shrink(&a, alpha);
        let err = frobenius_norm(&(&ours.matrix - &oracle));
        assert!(err <= 1e-10 * (1.0 + frobenius_norm(&a)), "trial {trial}: {err}");
        let expected_rank = singular_values(&a).unwrap().iter().filter(|&&s| s > alpha).count();
        assert_eq!(ours.rank, expected_rank);
    }
}

#[test]
fn thresholded_svd_keeps_exactly_the_large_triplets() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let a = gaussian(30, 18, &mut rng);
    let sv = singular_values(&a).unwrap();
    let tau = 0.5 * (sv[4] + sv[5]);
    let t = svd_threshold(&a, tau).unwrap();
    assert_eq!(t.rank(), 5);
    for (x, y) in t.sigma.iter().zip(&sv) {
        assert!((x - y).abs() < 1e-11 * sv[0]);
    }
}

fn random_theta_problem(rng: &mut impl Rng) -> ThetaProblem {
    let len = rng.gen_range(1..=900);
    let scale = 10f64.powf(rng.gen_range(-2.0..2.0));
    let mut mags: Vec<f64> = (0..len).map(|_| scale * rng.gen::<f64>().powi(2)).collect();
    if rng.gen_bool(0.2) {
        // ties and exact zeros
        for v in mags.iter_mut().step_by(3) {
            *v = if rng.gen_bool(0.5) { 0.0 } else { scale * 0.5 };
        }
    }
    let norm = mags.iter().map(|v| v * v).sum::<f64>().sqrt();
    let delta = (norm * rng.gen_range(0.01..0.99)).max(1e-6);
    let rho = 10f64.powf(rng.gen_range(-2.0..2.0));
    let xi = 10f64.powf(rng.gen_range(-2.0..0.5));
    ThetaProblem::new(mags, delta, rho, xi).unwrap()
}

#[test]
fn theta_search_agrees_with_bisection() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for trial in 0..300 {
        let p = random_theta_problem(&mut rng);
        if p.norm() <= p.delta {
            continue;
        }
        let fast = theta_search(&p).unwrap();
        let slow = theta_bisection(p.magnitudes(), p.delta, p.rho, p.xi);
        assert!(
            (fast - slow).abs() <= 1e-9 * slow.max(1.0),
            "trial {trial}: {fast} vs {slow}"
        );
        let resid = (phi(fast, &p).unwrap() - p.delta).abs();
        assert!(resid <= 1e-9 * p.delta.max(1.0), "trial {trial}: residual {resid}");
        let direct = phi_direct(fast, p.magnitudes(), p.rho, p.xi);
        assert!((direct - p.delta).abs() <= 1e-9 * p.delta.max(1.0));
    }
}

#[test]
fn quartic_root_satisfies_the_scalar_equation() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..200 {
        let c1 = rng.gen_range(0.01..50.0);
        let c2 = rng.gen_range(1.0..40.0f64).floor();
        let (rho, xi) = (rng.gen_range(0.05..20.0), rng.gen_range(0.05..2.0));
        let delta = rng.gen_range(0.05..5.0);
        let g = |th: f64| (rho / (rho + th)).powi(2) * c1 + c2 * (xi / th).powi(2) - delta * delta;
        let th = solve_quartic_positive(c1, c2, rho, xi, delta, (0.0, f64::INFINITY)).unwrap();
        assert!(th > 0.0);
        assert!(g(th).abs() <= 1e-10 * delta * delta.max(1.0), "g = {}", g(th));
    }
}

#[test]
fn subproblem_satisfies_kkt_and_beats_fista() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for trial in 0..60 {
        let (m, n) = (rng.gen_range(1..9), rng.gen_range(1..9));
        let mask = random_mask(m, n, rng.gen_range(0.3..1.0), &mut rng);
        let d = gaussian(m, n, &mut rng);
        let zt = gaussian(m, n, &mut rng);
        let q = &gaussian(m, n, &mut rng) * rng.gen_range(0.0..2.0);
        let rho = 10f64.powf(rng.gen_range(-1.0..1.0));
        let xi = rng.gen_range(0.1..1.0);
        let delta = rng.gen_range(0.05..1.5);
        let inst = SpcpInstance::new(d, mask.clone(), delta, xi).unwrap();
        let sol = subproblem_zs(&q, &zt, rho, &inst).unwrap();

        let kkt = kkt_residuals(&q, &zt, rho, &inst, &sol).unwrap();
        assert!(kkt.max() <= 1e-8 * (1.0 + frobenius_norm(&q)), "trial {trial}: {kkt:?}");

        let mut center = zt.clone();
        center.axpy(-1.0 / rho, &q);
        let r: Vec<f64> = mask
            .offsets()
            .iter()
            .map(|&o| inst.data().as_slice()[o] - center.as_slice()[o])
            .collect();
        let s_ours = mask.gather(&sol.s).unwrap();
        let s_oracle = fista_reduced(&r, rho, xi, delta, 20_000);
        let f_ours = reduced_objective(&s_ours, &r, rho, xi, delta);
        let f_oracle = reduced_objective(&s_oracle, &r, rho, xi, delta);
        assert!(f_ours <= f_oracle + 1e-9, "trial {trial}: {f_ours} > {f_oracle}");

        // Same value through the original objective, up to the constant -||Q||^2/(2 rho).
        let q2 = frobenius_norm(&q).powi(2);
        let full = zs_objective(&q, &zt, rho, xi, &sol.z, &sol.s).unwrap();
        assert!((full - (f_ours - q2 / (2.0 * rho))).abs() <= 1e-9 * (1.0 + full.abs()));
    }
}

#[test]
fn clip_level_agrees_with_bisection() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..200 {
        let a: Vec<f64> = (0..rng.gen_range(1..60)).map(|_| rng.gen::<f64>() * 3.0).collect();
        let norm = a.iter().map(|v| v * v).sum::<f64>().sqrt();
        let delta = norm * rng.gen_range(0.01..0.99);
        if delta <= 0.0 {
            continue;
        }
        let lam = clip_level_search(&a, delta).unwrap();
        let g = |l: f64| a.iter().map(|v| v.min(l).powi(2)).sum::<f64>().sqrt();
        let (mut lo, mut hi) = (0.0, 3.0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if g(mid) < delta {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        assert!((lam - lo).abs() <= 1e-9 * lo.max(1.0), "{lam} vs {lo}");
    }
}

#[test]
fn refined_sparse_beats_random_feasible_points() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for _ in 0..30 {
        let (m, n) = (rng.gen_range(1..6), rng.gen_range(1..6));
        let mask = random_mask(m, n, 0.8, &mut rng);
        let d = gaussian(m, n, &mut rng);
        let l = &gaussian(m, n, &mut rng) * 0.3;
        let delta = rng.gen_range(0.05..1.0);
        let inst = SpcpInstance::new(d, mask.clone(), delta, 1.0).unwrap();
        let s = refine_sparse(&l, &inst).unwrap();
        let resid = inst.residual_norm(&l, &s);
        assert!(resid <= delta * (1.0 + 1e-9));
        let l1: f64 = s.as_slice().iter().map(|v| v.abs()).sum();
        for &(i, j) in mask.indices() {
            let r = inst.data()[(i, j)] - l[(i, j)];
            if s[(i, j)] != 0.0 {
                assert_eq!(s[(i, j)].signum(), r.signum());
            }
        }
        let r: DenseMatrix = inst.data() - &l;
        for _ in 0..200 {
            // random feasible point: residual plus a perturbation inside the ball
            let mut cand = r.clone();
            let mut pert: Vec<f64> = (0..mask.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let pn = pert.iter().map(|v| v * v).sum::<f64>().sqrt().max(1e-300);
            let radius = delta * rng.gen::<f64>();
            for v in &mut pert {
                *v *= radius / pn;
            }
            for (&o, p) in mask.offsets().iter().zip(&pert) {
                cand.as_mut_slice()[o] -= p;
            }
            let cand = admip::linalg::project_omega(&cand, &mask).unwrap();
            assert!(inst.residual_norm(&l, &cand) <= delta * (1.0 + 1e-9));
            let c1: f64 = cand.as_slice().iter().map(|v| v.abs()).sum();
            assert!(l1 <= c1 + 1e-12);
        }
    }
}
