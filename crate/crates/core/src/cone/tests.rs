use super::reduce::conic_residual;
use super::*;
use crate::dicke::build_block;
use crate::linalg::max_principal_angle;
use crate::types::BlockSpec;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;

fn opt() -> MeasurementParams {
    MeasurementParams::new(PI / 6.0, 5.0 * PI / 6.0).unwrap()
}

fn reference_alpha() -> BellCoefficients {
    BellCoefficients::new(vec![-2.0, 0.0, 0.5, -1.0, 0.5]).unwrap()
}

fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
    a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
}

/// Pairs every ray of `a` with a ray of `b` (unit vectors).
fn same_rays(a: &[Vec<f64>], b: &[Vec<f64>], tol: f64) -> bool {
    a.len() == b.len()
        && a.iter().all(|r| b.iter().any(|s| close(&normalized(r), &normalized(s), tol)))
}

fn normalized(v: &[f64]) -> Vec<f64> {
    crate::linalg::normalized(v)
}

fn random_angles(rng: &mut ChaCha8Rng) -> MeasurementParams {
    loop {
        let p = MeasurementParams::new(rng.random_range(-PI..PI), rng.random_range(-PI..PI)).unwrap();
        let ok = p.phi().sin().abs() > 0.1
            && p.theta().sin().abs() > 0.1
            && (p.phi() - p.theta()).sin().abs() > 0.1
            && (p.phi() + p.theta()).sin().abs() > 0.05;
        if ok {
            return p;
        }
    }
}

#[test]
fn first_row_matches_closed_form() {
    let n = 10;
    let p = MeasurementParams::new(0.4, 1.3).unwrap();
    let h = hyperplane_matrix(n, 2, &p).unwrap();
    let i = h.labels().iter().position(|l| l.contains(&(1, 0))).unwrap();
    let nm1 = (n - 1) as f64;
    let want = [
        0.4f64.sin(),
        1.3f64.sin(),
        nm1 * 0.8f64.sin(),
        nm1 * 1.7f64.sin(),
        nm1 * 2.6f64.sin(),
    ];
    assert!(close(&h.rows()[i], &want, 1e-12));
    assert!(h.prefactor_stripped());
}

#[test]
fn second_diagonal_rows_collapse() {
    let p = MeasurementParams::new(0.4, 1.3).unwrap();
    let h = hyperplane_matrix(10, 2, &p).unwrap();
    let d2: Vec<usize> = (0..h.len())
        .filter(|&i| h.labels()[i].iter().any(|l| l.0 == 2))
        .collect();
    assert_eq!(d2.len(), 1);
    assert_eq!(h.labels()[d2[0]].len(), 9);
    let (s, t) = (0.4f64.sin(), 1.3f64.sin());
    assert!(close(&h.rows()[d2[0]], &[0.0, 0.0, s * s, s * t, t * t], 1e-12));
}

#[test]
fn three_body_row_count() {
    let h = hyperplane_matrix(10, 3, &opt()).unwrap();
    let total: usize = h.labels().iter().map(|l| l.len()).sum();
    assert_eq!(total, 27);
    assert!(h.len() < 27);
}

#[test]
fn two_body_reduction_keeps_three_rows() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for n in [3usize, 4, 10, 25] {
        for _ in 0..5 {
            let p = random_angles(&mut rng);
            let r = reduce_irredundant(&hyperplane_matrix(n, 2, &p).unwrap()).unwrap();
            assert_eq!(r.hyperplanes.len(), 3, "n={n} {p:?}");
            let labels: Vec<RowLabel> = r.hyperplanes.labels().iter().map(|l| l[0]).collect();
            assert!(labels.contains(&(1, 0)));
            assert!(labels.contains(&(1, n - 1)));
            assert!(labels.iter().any(|l| l.0 == 2));
            for (row, st) in r.hyperplanes.normalized_rows().iter().zip(&r.status) {
                let RowStatus::Irredundant { witness } = st else {
                    panic!("indeterminate row at n={n}");
                };
                assert!(dot(row, witness) > 0.0);
                for other in r.hyperplanes.normalized_rows() {
                    if other != *row {
                        assert!(dot(&other, witness) <= 1e-9);
                    }
                }
            }
        }
    }
}

#[test]
fn single_row_unchanged() {
    let h = HyperplaneSet::from_rows(3, 1, vec![vec![1.0, 2.0]]).unwrap();
    let r = reduce_irredundant(&h).unwrap();
    assert_eq!(r.hyperplanes.rows(), h.rows());
}

#[test]
fn positive_multiples_are_redundant() {
    let h = HyperplaneSet::from_rows(3, 1, vec![vec![1.0, 2.0], vec![2.0, 4.0], vec![-1.0, 0.0]])
        .unwrap();
    let r = reduce_irredundant(&h).unwrap();
    assert_eq!(r.hyperplanes.len(), 2);
    assert_eq!(r.hyperplanes.rows()[0], vec![1.0, 2.0]);
}

#[test]
fn two_body_lines_at_optimal_angles() {
    let h = hyperplane_matrix(10, 2, &opt()).unwrap();
    let l = lines(&h);
    let want = vec![vec![-1.0, 1.0, 0.0, 0.0, 0.0], vec![0.0, 0.0, 1.0, -2.0, 1.0]];
    assert!(max_principal_angle(&l, &want) < 1e-8);
    for v in &l {
        assert!((norm(v) - 1.0).abs() < 1e-12);
        assert!(v.iter().find(|x| x.abs() > 1e-12).unwrap() > &0.0);
    }
    assert!(dot(&l[0], &l[1]).abs() < 1e-12);
}

#[test]
fn three_body_lines_match_closed_forms() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..5 {
        let p = random_angles(&mut rng);
        let want = analytic_three_body_lines(&p).unwrap();
        for n in [10usize, 17] {
            let h = hyperplane_matrix(n, 3, &p).unwrap();
            for l in &want {
                for r in h.rows() {
                    assert!(dot(r, l).abs() <= 1e-9 * norm(r) * norm(l), "n={n}");
                }
            }
            let got = lines(&h);
            assert!(max_principal_angle(&got, &want) < 1e-8);
        }
    }
    let w = analytic_three_body_lines(&opt()).unwrap();
    assert!(close(&w[0], &[-1.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0], 1e-12));
    assert!(close(&w[2], &[0.0, 0.0, 0.0, 0.0, 0.0, -1.0, 3.0, -3.0, 1.0], 1e-12));
    let zero = MeasurementParams::new(0.0, 1.0).unwrap();
    assert!(matches!(analytic_three_body_lines(&zero), Err(Error::AnalyticDegenerate(_))));
}

#[test]
fn two_body_cone_at_optimal_angles() {
    for n in [10usize, 20] {
        let c = cone_description(n, 2, &opt(), &ConeOptions::default()).unwrap();
        assert_eq!((c.hyperplanes.len(), c.rays.len(), c.lines.len()), (3, 3, 2));
        let r3 = (n - 1) as f64 * 3f64.sqrt();
        let raw = vec![
            vec![-r3, 0.0, 1.0, -1.0, 0.0],
            vec![-r3, 0.0, -1.0, 1.0, 0.0],
            vec![0.0, 0.0, 0.0, -1.0, 0.0],
        ];
        let lines_raw = vec![vec![-1.0, 1.0, 0.0, 0.0, 0.0], vec![0.0, 0.0, 1.0, -2.0, 1.0]];
        // the printed rays are not orthogonal to the lines; compare modulo lines
        for r in &c.rays {
            assert!(raw.iter().any(|q| {
                let res = conic_residual(r, std::slice::from_ref(q), &lines_raw);
                res < 1e-8
            }));
        }
        assert!(max_principal_angle(&c.lines, &lines_raw) < 1e-8);
    }
}

#[test]
fn three_body_ray_counts() {
    let c = cone_description(10, 3, &opt(), &ConeOptions::default()).unwrap();
    assert_eq!(c.rays.len(), 13);
    assert_eq!(c.lines.len(), 3);
}

#[test]
fn double_description_agrees_with_combinatorial() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let comb = ConeOptions {
        method: RayMethod::Combinatorial,
        ..ConeOptions::default()
    };
    for (n, k) in [(4usize, 2u8), (7, 2), (5, 3), (8, 3), (12, 3)] {
        for _ in 0..3 {
            let p = random_angles(&mut rng);
            let h = reduce_irredundant(&hyperplane_matrix(n, k, &p).unwrap()).unwrap().hyperplanes;
            let a = rays(&h, &ConeOptions::default()).unwrap().rays;
            let b = rays(&h, &comb).unwrap().rays;
            assert!(same_rays(&a, &b, 1e-7), "n={n} K={k} {p:?}: {} vs {}", a.len(), b.len());
        }
    }
    let h = reduce_irredundant(&hyperplane_matrix(10, 3, &opt()).unwrap()).unwrap().hyperplanes;
    let a = rays(&h, &ConeOptions::default()).unwrap().rays;
    let b = rays(&h, &comb).unwrap().rays;
    assert!(same_rays(&a, &b, 1e-7));
}

#[test]
fn small_party_counts() {
    let c = cone_description(2, 2, &MeasurementParams::new(0.4, 1.3).unwrap(), &ConeOptions::default())
        .unwrap();
    assert!(!c.rays.is_empty());
    let (member, _) = membership(&reference_alpha(), &hyperplane_matrix(2, 2, &opt()).unwrap(), 1e-9).unwrap();
    assert!(member);
    let c = cone_description(1, 3, &opt(), &ConeOptions::default()).unwrap();
    assert_eq!(c.lines.len() + c.hyperplanes.len().min(1), 9);
}

#[test]
fn membership_examples() {
    let h = hyperplane_matrix(10, 2, &opt()).unwrap();
    assert!(membership(&reference_alpha(), &h, 1e-9).unwrap().0);
    let (m, margin) = membership(&BellCoefficients::zeros(2).unwrap(), &h, 0.0).unwrap();
    assert!(m && margin == 0.0);
    let e2 = BellCoefficients::new(vec![0.0, 0.0, 1.0, 0.0, 0.0]).unwrap();
    let (m, margin) = membership(&e2, &h, 1e-9).unwrap();
    assert!(!m && margin > 0.0);
    // two-body coefficients are accepted by a three-body cone
    let h3 = hyperplane_matrix(10, 3, &opt()).unwrap();
    assert!(membership(&reference_alpha(), &h3, 1e-9).unwrap().0);
    assert!(membership(&BellCoefficients::zeros(3).unwrap(), &h, 0.0).is_err());
}

#[test]
fn coordinates_reconstruct_table_row() {
    let n = 10;
    let mut c = analytic_two_body(n, &opt()).unwrap();
    let r3 = 9.0 * 3f64.sqrt();
    c.rays = vec![
        vec![-r3, 0.0, 1.0, -1.0, 0.0],
        vec![-r3, 0.0, -1.0, 1.0, 0.0],
        vec![0.0, 0.0, 0.0, -1.0, 0.0],
    ];
    c.lines = vec![vec![-1.0, 1.0, 0.0, 0.0, 0.0], vec![0.0, 0.0, 1.0, -2.0, 1.0]];
    let coords = ConeCoordinates {
        ray_weights: vec![6.95e-2, 7.11e-2, 1.24e-5],
        line_weights: vec![1.71e-3, 5.50e-1],
    };
    let a = coords_to_alpha(&coords, &c).unwrap();
    assert!(close(a.values(), &[-2.20, 0.00171, 0.548, -1.10, 0.550], 1e-2));
    assert!(membership(&a, &c.hyperplanes, 1e-9).unwrap().0);

    let zero = coords_to_alpha(&ConeCoordinates::zeros(&c), &c).unwrap();
    assert!(zero.values().iter().all(|v| *v == 0.0));
    let single = ConeCoordinates {
        ray_weights: vec![0.0, 0.0, 1.0],
        line_weights: vec![0.0, 0.0],
    };
    assert_eq!(coords_to_alpha(&single, &c).unwrap().values(), &[0.0, 0.0, 0.0, -1.0, 0.0]);
    let neg = ConeCoordinates {
        ray_weights: vec![-1.0, 0.0, 0.0],
        line_weights: vec![0.0, 0.0],
    };
    assert!(matches!(coords_to_alpha(&neg, &c), Err(Error::ContractViolation(_))));
    let short = ConeCoordinates {
        ray_weights: vec![0.0],
        line_weights: vec![],
    };
    assert!(coords_to_alpha(&short, &c).is_err());
}

#[test]
fn analytic_matches_numeric() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..20 {
        let p = random_angles(&mut rng);
        for n in [4usize, 10, 25] {
            let a = match analytic_two_body(n, &p) {
                Ok(a) => a,
                Err(Error::AnalyticDegenerate(_)) => continue,
                Err(e) => panic!("{e}"),
            };
            let b = cone_description(n, 2, &p, &ConeOptions::default()).unwrap();
            assert!(max_principal_angle(&a.lines, &b.lines) <= 1e-8);
            assert!(same_rays(&a.rays, &b.rays, 1e-8), "n={n} {p:?}\n{:?}\n{:?}", a.rays, b.rays);
        }
    }
    let a = analytic_two_body(10, &opt()).unwrap();
    let b = cone_description(10, 2, &opt(), &ConeOptions::default()).unwrap();
    assert!(same_rays(&a.rays, &b.rays, 1e-8));
}

#[test]
fn analytic_edge_cases() {
    let p = MeasurementParams::new(0.7, 0.7).unwrap();
    let [r1, r2, _] = two_body_ray_formulas(10, &p).unwrap();
    assert!(r1[0].abs() < 1e-12 && r2[0].abs() < 1e-12);
    let zero = MeasurementParams::new(0.0, 1.0).unwrap();
    assert!(matches!(analytic_two_body(10, &zero), Err(Error::AnalyticDegenerate(_))));
}

#[test]
fn degenerate_angles() {
    // φ = θ merges the two inputs and adds lineality
    let p = MeasurementParams::new(0.7, 0.7).unwrap();
    let h = hyperplane_matrix(10, 2, &p).unwrap();
    assert!(matches!(
        rays(&h, &ConeOptions::default()),
        Err(Error::DegenerateGeometry(_))
    ));
    let loose = ConeOptions {
        allow_degenerate: true,
        ..ConeOptions::default()
    };
    let c = cone_description(10, 2, &p, &loose).unwrap();
    assert!(c.degenerate);
    // sin φ = 0 keeps the lineality but is flagged
    let z = MeasurementParams::new(0.0, 1.0).unwrap();
    let c = cone_description(10, 2, &z, &ConeOptions::default()).unwrap();
    assert!(c.degenerate);
}

#[test]
fn json_round_trip() {
    let c = cone_description(10, 2, &opt(), &ConeOptions::default()).unwrap();
    let s = serde_json::to_string(&c).unwrap();
    let v: serde_json::Value = serde_json::from_str(&s).unwrap();
    let mut keys: Vec<&String> = v.as_object().unwrap().keys().collect();
    keys.sort();
    assert_eq!(keys, ["K", "hyperplanes", "lines", "n", "phi", "rays", "theta", "tolerance"]);
    let back: ConeDescription = serde_json::from_str(&s).unwrap();
    assert_eq!(back.rays, c.rays);
    assert_eq!(back.hyperplanes.rows(), c.hyperplanes.rows());
}

#[test]
fn three_body_witness_is_member() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..20 {
        let p = MeasurementParams::new(rng.random_range(-PI..PI), rng.random_range(-PI..PI)).unwrap();
        for n in [6usize, 11] {
            let a = three_body_witness(n, &p).unwrap();
            assert_eq!(a.values()[5], -p.phi().sin().signum());
            let h = hyperplane_matrix(n, 3, &p).unwrap();
            assert!(membership(&a, &h, 1e-9).unwrap().0);
        }
    }
}

fn check_cone_invariants(c: &ConeDescription) {
    let full = hyperplane_matrix(c.n, c.order, &c.params).unwrap();
    for r in &c.rays {
        for row in full.rows() {
            assert!(dot(row, r) <= 1e-9);
        }
        for l in &c.lines {
            assert!(dot(r, l).abs() < 1e-9);
        }
        assert!((norm(r) - 1.0).abs() < 1e-12);
    }
    for l in &c.lines {
        for row in full.rows() {
            assert!(dot(row, l).abs() <= 1e-9);
        }
    }
    for (i, r) in c.rays.iter().enumerate() {
        let others: Vec<Vec<f64>> = c
            .rays
            .iter()
            .enumerate()
            .filter(|(j, _)| *j != i)
            .map(|(_, v)| v.clone())
            .collect();
        assert!(conic_residual(r, &others, &c.lines) > 1e-6);
    }
}

#[test]
fn cone_invariants_fixed_instances() {
    for (n, k) in [(4usize, 2u8), (10, 2), (25, 2), (10, 3)] {
        check_cone_invariants(&cone_description(n, k, &opt(), &ConeOptions::default()).unwrap());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn cone_invariants_random(
        n in 2usize..14,
        k in 2u8..=3,
        phi in 0.2f64..2.9,
        theta in -2.9f64..-0.2,
    ) {
        let p = MeasurementParams::new(phi, theta).unwrap();
        let c = cone_description(n, k, &p, &ConeOptions::default()).unwrap();
        check_cone_invariants(&c);
    }

    #[test]
    fn lines_leave_off_diagonals_unchanged(
        n in 2usize..14,
        phi in 0.2f64..2.9,
        theta in -2.9f64..-0.2,
        w in proptest::collection::vec(0.0f64..1.0, 64),
        mu in proptest::collection::vec(-5.0f64..5.0, 3),
    ) {
        let p = MeasurementParams::new(phi, theta).unwrap();
        let c = cone_description(n, 3, &p, &ConeOptions::default()).unwrap();
        let coords = ConeCoordinates {
            ray_weights: w[..c.rays.len().min(64)].to_vec(),
            line_weights: vec![0.0; c.lines.len()],
        };
        prop_assume!(c.rays.len() <= 64);
        let a = coords_to_alpha(&coords, &c).unwrap();
        prop_assert!(membership(&a, &c.hyperplanes, 1e-9).unwrap().0);
        let mut shifted = a.values().to_vec();
        for (m, l) in mu.iter().zip(&c.lines) {
            shifted.iter_mut().zip(l).for_each(|(x, y)| *x += m * y);
        }
        let b = BlockSpec::symmetric(n).unwrap();
        let m1 = build_block(&a, &p, b);
        let m2 = build_block(&BellCoefficients::new(shifted).unwrap(), &p, b);
        for d in 1..m1.bands().len() {
            for (x, y) in m1.band(d).iter().zip(m2.band(d)) {
                prop_assert!((x - y).abs() <= 1e-10 * (1.0 + x.abs()));
            }
        }
    }
}
