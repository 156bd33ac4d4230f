use momentldp::lie::*;
use momentldp::moment::*;
use momentldp::rate::*;
use momentldp::repr::*;
use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, StandardNormal};

fn rand_state<R: rand::Rng>(d: usize, rng: &mut R) -> DMatrix<C64> {
    let g = DMatrix::from_fn(d, d, |_, _| {
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = StandardNormal.sample(rng);
        C64::new(re, im)
    });
    let p = &g * g.adjoint() + DMatrix::<C64>::identity(d, d) * C64::new(0.05, 0.0);
    let tr = p.trace().re;
    p.map(|z| z / tr)
}

fn diag_state(entries: &[f64]) -> DMatrix<C64> {
    DMatrix::from_diagonal(&DVector::from_iterator(
        entries.len(),
        entries.iter().map(|&v| C64::new(v, 0.0)),
    ))
}

fn kl(p: &[f64], q: &[f64]) -> f64 {
    p.iter()
        .zip(q)
        .map(|(&a, &b)| if a > 0.0 { a * (a / b).ln() } else { 0.0 })
        .sum()
}

fn u(d: usize) -> GroupSpec {
    GroupSpec::single(GroupAtom::Unitary(d))
}

#[test]
fn log_z_closed_forms() {
    let spec = u(2);
    let rep = RepresentationSpec::Standard(2);
    let rho = diag_state(&[0.7, 0.3]);
    // ξ = 0 → 0
    assert!(log_z(&rep, &rho, &AlgebraVector::zero(&spec)).unwrap().abs() < 1e-14);
    // ξ = diag(t, 0) → ln(0.7e^t + 0.3)
    let t = 1.0f64;
    let xi = AlgebraVector::from_single_matrix(
        &spec,
        DMatrix::from_diagonal(&DVector::from_vec(vec![C64::new(t, 0.0), C64::new(0.0, 0.0)])),
    )
    .unwrap();
    let z = log_z(&rep, &rho, &xi).unwrap();
    assert!((z - (0.7 * t.exp() + 0.3).ln()).abs() < 1e-12);
}

#[test]
fn rate_zero_at_moment_map_value() {
    let mut rng = ChaCha12Rng::seed_from_u64(1);
    let opts = OptimizerOptions::default();
    // Standard(2)
    let spec = u(2);
    let rep = RepresentationSpec::Standard(2);
    for _ in 0..10 {
        let rho = rand_state(2, &mut rng);
        let x = moment_map(&rep, &spec, &rho).unwrap();
        let r = rate_numeric(&rep, &spec, &rho, &x, &opts).unwrap();
        assert!(r.value.abs() <= 1e-8, "value = {}", r.value);
    }
    // Spin(1)
    let sspec = GroupSpec::single(GroupAtom::Su2);
    let srep = RepresentationSpec::Spin { two_j: 2 };
    for _ in 0..5 {
        let rho = rand_state(3, &mut rng);
        let x = moment_map(&srep, &sspec, &rho).unwrap();
        let r = rate_numeric(&srep, &sspec, &rho, &x, &opts).unwrap();
        assert!(r.value.abs() <= 1e-8, "spin value = {}", r.value);
    }
}

#[test]
fn rate_numeric_matches_kl_for_diagonal_qubit() {
    let spec = u(2);
    let rep = RepresentationSpec::Standard(2);
    let rho = diag_state(&[0.7, 0.3]);
    let x = AlgebraVector::from_single_matrix(&spec, diag_state(&[0.9, 0.1])).unwrap();
    let opts = OptimizerOptions::default();
    let r = rate_numeric(&rep, &spec, &rho, &x, &opts).unwrap();
    let oracle = kl(&[0.9, 0.1], &[0.7, 0.3]);
    assert!((r.value - oracle).abs() < 1e-7, "{} vs {}", r.value, oracle);
}

#[test]
fn rate_numeric_certifies_infinite_outside_polytope() {
    let spec = u(2);
    let rep = RepresentationSpec::Standard(2);
    let rho = diag_state(&[0.7, 0.3]);
    let x = AlgebraVector::from_single_matrix(&spec, diag_state(&[1.2, -0.2])).unwrap();
    let opts = OptimizerOptions::default();
    let r = rate_numeric(&rep, &spec, &rho, &x, &opts).unwrap();
    assert!(r.value.is_infinite());
    match r.certificate {
        Certificate::Diverged { beta, margin } => {
            assert!(margin > 0.01);
            assert_eq!(beta.len(), 2);
        }
        _ => panic!("expected divergence certificate"),
    }
}

#[test]
fn keyl_closed_form_oracle_agreement() {
    let mut rng = ChaCha12Rng::seed_from_u64(2);
    let opts = OptimizerOptions::default();
    for d in [2usize, 3] {
        let spec = u(d);
        let rep = RepresentationSpec::Standard(d);
        for trial in 0..5 {
            let rho = rand_state(d, &mut rng);
            let h = haar_sample(&spec, &mut rng);
            let hm = if let Factor::Matrix(m) = &h.factors[0] { m.clone() } else { unreachable!() };
            // random sorted probability vector bounded away from the boundary
            let mut x0: Vec<f64> = (0..d).map(|_| rand::Rng::random_range(&mut rng, 0.1..1.0)).collect();
            let s: f64 = x0.iter().sum();
            x0.iter_mut().for_each(|v| *v /= s);
            x0.sort_by(|a, b| b.partial_cmp(a).unwrap());
            let x0v = DVector::from_vec(x0);
            let keyl = rate_keyl_closed(&rho, &hm, &x0v);
            // x = h·x0
            let x = coadjoint(&h, &AlgebraVector::from_single_matrix(
                &spec,
                DMatrix::from_diagonal(&x0v.map(|v| C64::new(v, 0.0))),
            ).unwrap());
            let numeric = rate_numeric(&rep, &spec, &rho, &x, &opts).unwrap();
            assert!((numeric.value - keyl).abs() < 1e-6, "d={} trial={} numeric {} vs keyl {}", d, trial, numeric.value, keyl);
            let an = rate_an(&rep, &spec, &rho, &x, &opts).unwrap();
            assert!((an.value - keyl).abs() < 1e-6, "d={} trial={} an {} vs keyl {}", d, trial, an.value, keyl);
        }
    }
}

#[test]
fn keyl_trivial_cases() {
    let rho = diag_state(&[0.7, 0.3]);
    let id = DMatrix::<C64>::identity(2, 2);
    // x0 = spectrum → 0
    let zero = rate_keyl_closed(&rho, &id, &DVector::from_vec(vec![0.7, 0.3]));
    assert!(zero.abs() < 1e-12);
    // direct formula value
    let v = rate_keyl_closed(&rho, &id, &DVector::from_vec(vec![0.9, 0.1]));
    assert!((v - kl(&[0.9, 0.1], &[0.7, 0.3])).abs() < 1e-12);
    // non-normalized → ∞
    let inf = rate_keyl_closed(&rho, &id, &DVector::from_vec(vec![0.5, 0.5, 0.2]));
    assert!(inf.is_infinite());
}

#[test]
fn rate_an_equals_numeric_on_spin_one() {
    let mut rng = ChaCha12Rng::seed_from_u64(3);
    let spec = GroupSpec::single(GroupAtom::Su2);
    let rep = RepresentationSpec::Spin { two_j: 2 };
    let opts = OptimizerOptions::default();
    for _ in 0..5 {
        let rho = rand_state(3, &mut rng);
        // x strictly inside the moment polytope: shrink J(ρ) toward a generic point
        let j = moment_map(&rep, &spec, &rho).unwrap();
        let x = j.scale(0.8);
        let a = rate_numeric(&rep, &spec, &rho, &x, &opts).unwrap();
        let b = rate_an(&rep, &spec, &rho, &x, &opts).unwrap();
        assert!((a.value - b.value).abs() < 1e-5, "{} vs {}", a.value, b.value);
    }
}

#[test]
fn cramer_bernoulli_oracle() {
    let opts = OptimizerOptions::default();
    let p = 0.3;
    let law = vec![(vec![0i64], 1.0 - p), (vec![1], p)];
    for &x in &[0.1, 0.3, 0.45, 0.6, 0.8] {
        let r = rate_cramer(&law, &DVector::from_vec(vec![x]), &opts).unwrap();
        let oracle = x * (x / p).ln() + (1.0 - x) * ((1.0 - x) / (1.0 - p)).ln();
        assert!((r.value - oracle).abs() < 1e-7, "x={} {} vs {}", x, r.value, oracle);
    }
    // mean → 0
    let r0 = rate_cramer(&law, &DVector::from_vec(vec![p]), &opts).unwrap();
    assert!(r0.value.abs() < 1e-8);
    // outside hull → ∞
    let rinf = rate_cramer(&law, &DVector::from_vec(vec![1.3]), &opts).unwrap();
    assert!(rinf.value.is_infinite());
}

#[test]
fn cramer_matches_grid_search_2d() {
    let mut rng = ChaCha12Rng::seed_from_u64(4);
    let opts = OptimizerOptions::default();
    // a small random 2-d integer law
    let support: Vec<Vec<i64>> = vec![vec![0, 0], vec![1, 0], vec![0, 1], vec![1, 1], vec![2, 0]];
    let mut probs: Vec<f64> = (0..support.len()).map(|_| rand::Rng::random_range(&mut rng, 0.1..1.0)).collect();
    let s: f64 = probs.iter().sum();
    probs.iter_mut().for_each(|v| *v /= s);
    let law: Vec<(Vec<i64>, f64)> = support.into_iter().zip(probs.iter().cloned()).collect();
    // target: a convex combination of support points (interior)
    let x = DVector::from_vec(vec![0.8, 0.35]);
    let r = rate_cramer(&law, &x, &opts).unwrap();
    // grid-search oracle at resolution 1e-2 over a box, refined once
    let f = |a1: f64, a2: f64| -> f64 {
        let z: f64 = law.iter().map(|(n, p)| p * (n[0] as f64 * a1 + n[1] as f64 * a2).exp()).sum();
        x[0] * a1 + x[1] * a2 - z.ln()
    };
    let mut best = f64::NEG_INFINITY;
    let mut arg = (0.0, 0.0);
    for i in -300..=300 {
        for j in -300..=300 {
            let v = f(i as f64 * 0.05, j as f64 * 0.05);
            if v > best {
                best = v;
                arg = (i as f64 * 0.05, j as f64 * 0.05);
            }
        }
    }
    for i in -60..=60 {
        for j in -60..=60 {
            let v = f(arg.0 + i as f64 * 1e-3, arg.1 + j as f64 * 1e-3);
            best = best.max(v);
        }
    }
    assert!((r.value - best).abs() < 1e-3, "{} vs {}", r.value, best);
}

#[test]
fn maximally_mixed_spin_rate() {
    let spec = GroupSpec::single(GroupAtom::Su2);
    let opts = OptimizerOptions::default();
    for two_j in [1u32, 2, 3] {
        let rep = RepresentationSpec::Spin { two_j };
        let j = two_j as f64 / 2.0;
        // x0 = J(I/dim) = 0 → rate 0
        let zero = rate_maximally_mixed(&rep, &spec, &DVector::from_vec(vec![0.0, 0.0]), &opts).unwrap();
        assert!(zero.abs() < 1e-8, "two_j = {} rate {}", two_j, zero);
        // CLR closed form via 1-d grid for an interior point x0 = j/2
        let x = j / 2.0;
        let got = rate_maximally_mixed(&rep, &spec, &DVector::from_vec(vec![x, -x]), &opts).unwrap();
        let mut oracle = f64::NEG_INFINITY;
        let n = two_j as f64;
        for i in 0..200000 {
            let a = i as f64 * 5e-4;
            let z: f64 = (0..=two_j).map(|k| ((k as f64 - j) * a).exp()).sum();
            oracle = oracle.max(2.0 * x * (a / 2.0) - (z / (n + 1.0)).ln());
        }
        assert!((got - oracle).abs() < 1e-5, "two_j = {} got {} oracle {}", two_j, got, oracle);
    }
    // extreme point of Spin(1/2): x0 = 1/2 → ln 2
    let rep = RepresentationSpec::Spin { two_j: 1 };
    let v = rate_maximally_mixed(&rep, &spec, &DVector::from_vec(vec![0.5, -0.5]), &opts).unwrap();
    assert!((v - 2.0f64.ln()).abs() < 1e-6, "extreme point rate {}", v);
}

#[test]
fn contracted_rate_oracles() {
    let opts = OptimizerOptions::default();
    let spec = u(2);
    let rep = RepresentationSpec::Standard(2);
    // maximally mixed: contraction equals the Duffield rate
    let rho = diag_state(&[0.5, 0.5]);
    let x0 = CartanVector::from_coords(&spec, &DVector::from_vec(vec![0.8, 0.2])).unwrap();
    let (v, _) = rate_contracted(&rep, &spec, &rho, &x0, &opts).unwrap();
    let mm = rate_maximally_mixed(&rep, &spec, &DVector::from_vec(vec![0.8, 0.2]), &opts).unwrap();
    assert!((v - mm).abs() < 1e-5, "{} vs {}", v, mm);
    // sorted diagonal state: Keyl–Werner reduction to KL
    let rho2 = diag_state(&[0.7, 0.3]);
    let (v2, _) = rate_contracted(&rep, &spec, &rho2, &x0, &opts).unwrap();
    let oracle = kl(&[0.8, 0.2], &[0.7, 0.3]);
    assert!((v2 - oracle).abs() < 1e-5, "{} vs {}", v2, oracle);
    // x0 = spectrum → 0
    let x0s = CartanVector::from_coords(&spec, &DVector::from_vec(vec![0.7, 0.3])).unwrap();
    let (v3, _) = rate_contracted(&rep, &spec, &rho2, &x0s, &opts).unwrap();
    assert!(v3.abs() < 1e-6);
}

#[test]
fn bipartite_pure_state_rate() {
    let mut rng = ChaCha12Rng::seed_from_u64(5);
    // ψ = diag(√x0) with h = I → 0
    let x0 = DVector::from_vec(vec![0.6, 0.4]);
    let psi = DMatrix::from_diagonal(&x0.map(|v: f64| C64::new(v.sqrt(), 0.0)));
    let id = DMatrix::<C64>::identity(2, 2);
    let z = rate_bipartite_pure(&psi, &id, &id, &x0, &x0);
    assert!(z.abs() < 1e-12);
    // mismatched spectra → ∞
    let z2 = rate_bipartite_pure(
        &psi,
        &id,
        &id,
        &DVector::from_vec(vec![0.6, 0.4]),
        &DVector::from_vec(vec![0.5, 0.5]),
    );
    assert!(z2.is_infinite());
    // cross-check against rate_numeric on U(2)×U(2)
    let spec = GroupSpec::new(vec![GroupAtom::Unitary(2), GroupAtom::Unitary(2)]).unwrap();
    let rep = RepresentationSpec::Product(vec![
        RepresentationSpec::Standard(2),
        RepresentationSpec::Standard(2),
    ]);
    let opts = OptimizerOptions::default();
    for _ in 0..3 {
        let g = DMatrix::from_fn(2, 2, |_, _| {
            let re: f64 = StandardNormal.sample(&mut rng);
            let im: f64 = StandardNormal.sample(&mut rng);
            C64::new(re, im)
        });
        let norm = (&g * g.adjoint()).trace().re.sqrt();
        let psi = g.map(|z| z / norm);
        let h1 = haar_sample(&u(2), &mut rng);
        let h2 = haar_sample(&u(2), &mut rng);
        let h1m = if let Factor::Matrix(m) = &h1.factors[0] { m.clone() } else { unreachable!() };
        let h2m = if let Factor::Matrix(m) = &h2.factors[0] { m.clone() } else { unreachable!() };
        let x0 = DVector::from_vec(vec![0.7, 0.3]);
        let closed = rate_bipartite_pure(&psi, &h1m, &h2m, &x0, &x0);
        // ρ = |ψ⟩⟨ψ| as a 4×4 state; vec(ψ) in the tensor basis e_i ⊗ e_j
        let vecpsi = DVector::from_iterator(4, (0..2).flat_map(|i| (0..2).map(move |j| (i, j))).map(|(i, j)| psi[(i, j)]));
        let rho = &vecpsi * vecpsi.adjoint();
        let x0d = DMatrix::from_diagonal(&x0.map(|v| C64::new(v, 0.0)));
        let x = DualVector {
            spec: spec.clone(),
            factors: vec![
                AlgFactor::Hermitian(&h1m * &x0d * h1m.adjoint()),
                AlgFactor::Hermitian(&h2m * &x0d * h2m.adjoint()),
            ],
        };
        let x = DualVector {
            spec: x.spec.clone(),
            factors: x
                .factors
                .into_iter()
                .map(|f| match f {
                    AlgFactor::Hermitian(m) => AlgFactor::Hermitian((&m + m.adjoint()).map(|z| z * 0.5)),
                    o => o,
                })
                .collect(),
        };
        let numeric = rate_numeric(&rep, &spec, &rho, &x, &opts).unwrap();
        assert!(
            (numeric.value - closed).abs() < 1e-5,
            "numeric {} vs closed {}",
            numeric.value,
            closed
        );
    }
}

#[test]
fn tilt_point_on_rate_graph() {
    let mut rng = ChaCha12Rng::seed_from_u64(6);
    let spec = u(2);
    let rep = RepresentationSpec::Standard(2);
    let opts = OptimizerOptions::default();
    for _ in 0..10 {
        let rho = rand_state(2, &mut rng);
        // g = exp(ξ/2)·k
        let g = {
            let m = DMatrix::from_fn(2, 2, |_, _| {
                let re: f64 = StandardNormal.sample(&mut rng);
                let im: f64 = StandardNormal.sample(&mut rng);
                C64::new(re, im)
            });
            let herm = (&m + m.adjoint()).map(|z| z * 0.25);
            let xi = AlgebraVector::from_single_matrix(&spec, herm).unwrap();
            exp_alg(&xi, 0.5).mul(&haar_sample(&spec, &mut rng))
        };
        let (x, value) = tilt_point(&rep, &spec, &rho, &g).unwrap();
        let r = rate_numeric(&rep, &spec, &rho, &x, &opts).unwrap();
        assert!((r.value - value).abs() < 1e-5, "numeric {} vs tilt {}", r.value, value);
    }
    // g = e → (J(ρ), 0)
    let rho = diag_state(&[0.7, 0.3]);
    let (x, v) = tilt_point(&rep, &spec, &rho, &GroupElement::identity(&spec)).unwrap();
    assert!(v.abs() < 1e-12);
    let j = moment_map(&rep, &spec, &rho).unwrap();
    assert!(x.distance_inf(&j) < 1e-12);
}

#[test]
fn support_monotonicity() {
    // ρ ≤ p⁻¹·σ ⇒ I_ρ(x) ≥ I_σ(x) + ln p (mixture form: σ = p·ρ + (1−p)·τ)
    let mut rng = ChaCha12Rng::seed_from_u64(7);
    let spec = u(2);
    let rep = RepresentationSpec::Standard(2);
    let opts = OptimizerOptions::default();
    for _ in 0..5 {
        let rho = rand_state(2, &mut rng);
        let tau = rand_state(2, &mut rng);
        let p = 0.6;
        let sigma = rho.map(|z| z * p) + tau.map(|z| z * (1.0 - p));
        let x = AlgebraVector::from_single_matrix(&spec, diag_state(&[0.85, 0.15])).unwrap();
        let ir = rate_numeric(&rep, &spec, &rho, &x, &opts).unwrap().value;
        let is = rate_numeric(&rep, &spec, &sigma, &x, &opts).unwrap().value;
        assert!(ir >= is + p.ln() - 1e-6, "I_rho {} I_sigma {} ln p {}", ir, is, p.ln());
    }
}

#[test]
fn convexity_along_chamber_segments() {
    let mut rng = ChaCha12Rng::seed_from_u64(8);
    let spec = u(2);
    let rep = RepresentationSpec::Standard(2);
    let opts = OptimizerOptions::default();
    for _ in 0..5 {
        let rho = rand_state(2, &mut rng);
        let a = rand::Rng::random_range(&mut rng, 0.55..0.95);
        let b = rand::Rng::random_range(&mut rng, 0.55..0.95);
        let h = haar_sample(&spec, &mut rng);
        let ev = |s: f64| -> f64 {
            let x0 = CartanVector::from_coords(&spec, &DVector::from_vec(vec![s, 1.0 - s])).unwrap();
            let cd = ChamberDecomposition { x0, h: h.clone() };
            rate_an_at(&rep, &spec, &rho, &cd, &opts).unwrap().value
        };
        let mid = ev(0.5 * (a + b));
        let avg = 0.5 * (ev(a) + ev(b));
        assert!(mid <= avg + 1e-6, "midpoint {} vs average {}", mid, avg);
    }
}

#[test]
fn boundary_points_are_flagged() {
    let spec = u(2);
    let rep = RepresentationSpec::Standard(2);
    let rho = diag_state(&[0.7, 0.3]);
    let opts = OptimizerOptions::default();
    // strictly interior: not flagged
    let x = AlgebraVector::from_single_matrix(&spec, diag_state(&[0.8, 0.2])).unwrap();
    let r = rate_numeric(&rep, &spec, &rho, &x, &opts).unwrap();
    assert!(!r.boundary);
}
