mod support;

use std::f64::consts::TAU;

use planar_switching::certificates::{bdd_certificate_in_basis, verify_bee};
use planar_switching::classifier::{classify_with, Certificate, ClassifyOptions, Regime};
use planar_switching::escape::{build_escape_witness, CaseTag, SequenceKind, DEFAULT_SEARCH_CAP};
use planar_switching::matrix::{
    eigenvalues, operator_norm, spectral_radius, upper_triangular_norm, Complex, Mat2, MatrixSet,
    Vec2, ONE,
};
use planar_switching::spectral::{jsr_bounds, rate_sequence, SearchConfig};
use planar_switching::structure::{analyze, RootPolicy};
use planar_switching::trajectory::{simulate, simulate_indices};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use support::*;

fn arb_complex(scale: f64) -> impl Strategy<Value = Complex> {
    (-scale..scale, -scale..scale).prop_map(|(re, im)| Complex::new(re, im))
}

fn arb_matrix(scale: f64) -> impl Strategy<Value = Mat2> {
    [arb_complex(scale), arb_complex(scale), arb_complex(scale), arb_complex(scale)]
        .prop_map(|[a, b, c, d]| Mat2::new(a, b, c, d))
}

fn arb_unitary() -> impl Strategy<Value = Mat2> {
    any::<u64>().prop_map(|seed| random_unitary(&mut ChaCha8Rng::seed_from_u64(seed)))
}

fn arb_set(max_len: usize, scale: f64) -> impl Strategy<Value = MatrixSet> {
    prop::collection::vec(arb_matrix(scale), 1..=max_len).prop_map(set)
}

proptest! {
    #[test]
    fn norm_matches_svd(a in arb_matrix(10.0)) {
        let oracle = svd_norm(&a);
        prop_assert!((operator_norm(&a) - oracle).abs() <= 1e-10 * oracle.max(1e-300));
    }

    #[test]
    fn triangular_norm_invariants(a in arb_complex(5.0), b in arb_complex(5.0), c in arb_complex(5.0), grow in 1.0..3.0f64) {
        let n = upper_triangular_norm(a, b, c);
        let abs = upper_triangular_norm(Complex::new(a.norm(), 0.0), Complex::new(b.norm(), 0.0), Complex::new(c.norm(), 0.0));
        prop_assert!((n - abs).abs() <= 1e-12 * n.max(1.0));
        prop_assert!(upper_triangular_norm(a, b * grow, c) >= n * (1.0 - 1e-12));
        prop_assert!(upper_triangular_norm(a * grow, b, c) >= n * (1.0 - 1e-12));
    }

    #[test]
    fn norm_is_submultiplicative(a in arb_matrix(3.0), b in arb_matrix(3.0)) {
        prop_assert!(operator_norm(&(a * b)) <= operator_norm(&a) * operator_norm(&b) * (1.0 + 1e-12) + 1e-15);
    }

    #[test]
    fn norm_is_unitarily_invariant(a in arb_matrix(3.0), u in arb_unitary(), v in arb_unitary()) {
        let n = operator_norm(&a);
        prop_assert!((operator_norm(&(u * a * v)) - n).abs() <= 1e-12 * n.max(1.0));
    }

    #[test]
    fn spectral_radius_matches_schur(a in arb_matrix(3.0)) {
        let ev = to_na(&a).schur().eigenvalues().unwrap();
        let oracle = ev[0].norm().max(ev[1].norm());
        prop_assert!((spectral_radius(&a) - oracle).abs() <= 1e-9 * operator_norm(&a).max(1.0));
        let (l0, l1) = eigenvalues(&a);
        prop_assert!(((l0 * l1) - a.det()).norm() <= 1e-10 * operator_norm(&a).powi(2).max(1.0));
    }

    #[test]
    fn rates_match_brute_force(s in arb_set(3, 1.5), depth in 1usize..=6) {
        let r = rate_sequence(&s, &SearchConfig::exact(depth)).unwrap();
        let oracle = brute_force_rates(s.members(), depth);
        for (x, y) in r.values.iter().zip(&oracle) {
            prop_assert!((x - y).abs() <= 1e-10 * y.max(1.0));
        }
    }

    #[test]
    fn rates_are_submultiplicative(s in arb_set(2, 1.5)) {
        let r = rate_sequence(&s, &SearchConfig::exact(8)).unwrap();
        for n in 1..=8 {
            for m in 1..=(8 - n) {
                prop_assert!(r.b(n + m) <= r.b(n) * r.b(m) * (1.0 + 1e-12) + 1e-300);
            }
        }
    }

    #[test]
    fn bracket_scales_with_the_set(s in arb_set(2, 1.5), c in 0.1..3.0f64, angle in 0.0..TAU) {
        let cfg = SearchConfig::exact(6);
        let b = jsr_bounds(&s, &cfg).unwrap();
        let bs = jsr_bounds(&s.scaled(Complex::from_polar(c, angle)), &cfg).unwrap();
        prop_assert!((bs.lower - c * b.lower).abs() <= 1e-10 * (c * b.lower).max(1e-12));
        prop_assert!((bs.upper - c * b.upper).abs() <= 1e-10 * (c * b.upper).max(1e-12));
        prop_assert!(b.lower <= b.upper * (1.0 + 1e-12));
    }

    #[test]
    fn bracket_is_unitarily_invariant(s in arb_set(2, 1.5), u in arb_unitary()) {
        let cfg = SearchConfig::exact(5);
        let b = jsr_bounds(&s, &cfg).unwrap();
        let bu = jsr_bounds(&s.conjugated_by_unitary(&u), &cfg).unwrap();
        prop_assert!((b.lower - bu.lower).abs() <= 1e-9 * b.lower.max(1.0));
        prop_assert!((b.upper - bu.upper).abs() <= 1e-9 * b.upper.max(1.0));
    }

    #[test]
    fn trajectory_steps_respect_member_norms(s in arb_set(3, 1.5), seed in any::<u64>()) {
        let mut r = ChaCha8Rng::seed_from_u64(seed);
        let word: Vec<usize> = (0..200).map(|_| r.random_range(0..s.len())).collect();
        let (logs, _) = simulate_indices(&s, &word, &Vec2::e0()).unwrap();
        let top = s.max_norm().ln();
        for k in 1..logs.len() {
            prop_assert!(logs[k] <= logs[k - 1] + top + 1e-12 || logs[k] == f64::NEG_INFINITY);
        }
    }
}

fn angle_pair(r: &mut ChaCha8Rng, phi: f64, psi: f64) -> MatrixSet {
    loop {
        let u = random_unitary(r);
        let a = rotated_pair_member(&u, phase(r), phi, complex(r, 2.0));
        let b = rotated_pair_member(&u, phase(r), psi, complex(r, 2.0));
        if planar_switching::structure::commutator_margin(&a, &b) > 1e-2 {
            return set(vec![a, b]);
        }
    }
}

#[test]
fn greedy_checkpoints_grow_in_normalized_coordinates() {
    let mut r = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..5 {
        let (phi, psi) = (irrational_angle(&mut r), irrational_angle(&mut r));
        let s = angle_pair(&mut r, phi, psi);
        let w = build_escape_witness(&s, &analyze(&s), &RootPolicy::default(), DEFAULT_SEARCH_CAP).unwrap();
        assert_eq!(w.case_tag, CaseTag::NeitherRoot);
        let np = w.normalization.clone().unwrap();
        let normalized = set(vec![np.a1n, np.a2n]);
        let SequenceKind::Greedy { rule } = &w.sequence.kind else { panic!() };
        let e = rule.expand(2000).unwrap();
        let (k0, _) = match w.pair_indices {
            planar_switching::escape::PairIndices::Pair(k, l) => (k, l),
            _ => unreachable!(),
        };
        let labels: Vec<usize> = e.indices.iter().map(|&i| if i == k0 { 0 } else { 1 }).collect();
        let (logs, _) = simulate_indices(&normalized, &labels, &Vec2::e1()).unwrap();
        for (k, &t) in e.step_times.iter().enumerate() {
            let ratio = logs[t].exp() / (k + 1) as f64;
            assert!(ratio >= 1.0 - 1e-9, "checkpoint {k}: ratio {ratio}");
        }
        // between checkpoints the norm falls by at most the inverse-norm factor
        let shrink = np.a1n.inverse().map(|m| 1.0 / operator_norm(&m)).unwrap()
            .min(np.a2n.inverse().map(|m| 1.0 / operator_norm(&m)).unwrap());
        let mut prev = 0;
        for &t in &e.step_times {
            for n in prev..t {
                let floor = logs[prev] + (n - prev) as f64 * shrink.ln();
                assert!(logs[n] >= floor - 1e-9);
            }
            prev = t;
        }
    }
}

#[test]
fn certified_bounds_dominate_random_trajectories() {
    let mut r = ChaCha8Rng::seed_from_u64(12);
    let unitary = random_unitary(&mut r);
    let s_tri = set(vec![
        Mat2::upper(Complex::from_polar(0.6, 1.0), Complex::new(0.8, -0.3), ONE)
            .unitary_conjugate(&unitary.adjoint()),
        Mat2::diag(Complex::from_polar(1.0, 2.0), Complex::from_polar(1.0, -0.5))
            .unitary_conjugate(&unitary.adjoint()),
    ]);
    let sc = random_conditioned(&mut r, 2.5);
    let s_kappa = set(vec![
        conjugate(&sc, &random_unitary(&mut r)),
        conjugate(&sc, &Mat2::diag(phase(&mut r), phase(&mut r).scale(0.7))),
    ]);
    for s in [s_tri, s_kappa] {
        let v = classify_with(&s, &ClassifyOptions::new(10)).unwrap();
        assert_eq!(v.regime, Regime::MarginallyStable);
        let bound = v.certificate.as_ref().unwrap().product_bound();
        for _ in 0..1000 {
            let word: Vec<usize> = (0..1000).map(|_| r.random_range(0..s.len())).collect();
            let v0 = Vec2::new(complex(&mut r, 1.0), complex(&mut r, 1.0));
            let (logs, _) = simulate_indices(&s, &word, &v0).unwrap();
            let limit = bound * v0.norm() + 1e-6;
            assert!(logs.iter().all(|l| l.exp() <= limit));
        }
    }
}

#[test]
fn unit_det_eigenbasis_gives_diagonal_members() {
    // unit-det members share a non-orthogonal eigenbasis
    let p = Mat2::real(1.0, 1.0, 0.0, 0.5);
    let pi = p.inverse().unwrap();
    let s = set(vec![
        p * Mat2::diag(Complex::from_polar(1.0, 0.3), ONE) * pi,
        p * Mat2::upper(Complex::new(0.4, 0.0), Complex::new(1.0, 0.0), Complex::new(0.9, 0.0)) * pi,
    ]);
    let v = classify_with(&s, &ClassifyOptions::new(12)).unwrap();
    assert_eq!(v.regime, Regime::MarginallyStable);
    let Some(Certificate::Bdd(b)) = v.certificate else { panic!("expected triangular certificate") };
    assert!(b.basis_condition > 1.0);
    let unit_columns = Mat2::from_columns(p.column(0), p.column(1).normalized().unwrap());
    let direct = bdd_certificate_in_basis(&s, &unit_columns).unwrap();
    assert!((direct.bound - b.bound).abs() <= 1e-9 * b.bound);
    assert!(v.rates.values.iter().all(|&x| x <= b.original_bound));
}

#[test]
fn regime_is_unitarily_invariant() {
    let mut r = ChaCha8Rng::seed_from_u64(13);
    let families = vec![
        set(vec![Mat2::diag(Complex::new(0.0, 1.0), ONE), Mat2::upper(Complex::new(0.0, 1.0), ONE, ONE)]),
        set(vec![Mat2::real(0.5, 1.0, 0.0, 1.0), Mat2::diag(Complex::from_polar(1.0, 1.0), ONE)]),
        set(vec![Mat2::real(0.3, 0.0, 0.0, 0.2)]),
        set(vec![Mat2::rotation(1.0), Mat2::real(1.0, 0.0, 0.0, 0.5)]),
        set(vec![Mat2::real(1.0, 1.0, 0.0, 1.0), Mat2::real(0.5, 0.0, 0.0, 1.0)]),
    ];
    for s in &families {
        let base = classify_with(s, &ClassifyOptions::new(8)).unwrap().regime;
        for _ in 0..5 {
            let u = random_unitary(&mut r);
            let rotated = classify_with(&s.conjugated_by_unitary(&u), &ClassifyOptions::new(8)).unwrap();
            assert_eq!(rotated.regime, base);
        }
    }
}

#[test]
fn kappa_certificate_passes_bee_sampling() {
    let s = set(vec![Mat2::rotation(1.0), Mat2::real(1.0, 0.0, 0.0, 0.5)]);
    let v = classify_with(&s, &ClassifyOptions::new(8)).unwrap();
    let Some(Certificate::Kappa(k)) = v.certificate else { panic!("expected κ certificate") };
    assert!(verify_bee(&s, k.kappa_lower, 2000, 7));
}

#[test]
fn witnesses_from_classify_escape_linearly() {
    let s = set(vec![Mat2::diag(Complex::new(0.0, 1.0), ONE), Mat2::upper(Complex::new(0.0, 1.0), ONE, ONE)]);
    let v = classify_with(&s, &ClassifyOptions::new(8)).unwrap();
    let w = v.witness.unwrap();
    let ceiling = v.linear_ceiling.unwrap();
    let t = simulate(&s, &w.sequence, &w.v0, 2000).unwrap();
    assert!(t.norms.iter().enumerate().all(|(n, &x)| x <= ceiling.at(n) + 1e-6));
    let tail_min = (1500..=2000).map(|n| t.norms[n] / n as f64).fold(f64::INFINITY, f64::min);
    assert!(tail_min > 0.0);
}

#[test]
fn jordan_rates_are_power_norms() {
    let j = Mat2::real(1.0, 1.0, 0.0, 1.0);
    let r = rate_sequence(&set(vec![j]), &SearchConfig::exact(10)).unwrap();
    for n in 1..=10 {
        let oracle = svd_norm(&Mat2::real(1.0, n as f64, 0.0, 1.0));
        assert!((r.b(n) - oracle).abs() <= 1e-12 * oracle);
    }
}
