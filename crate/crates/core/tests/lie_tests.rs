use momentldp::lie::*;
use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, StandardNormal};

fn rand_gl<R: rand::Rng>(d: usize, rng: &mut R) -> DMatrix<C64> {
    DMatrix::from_fn(d, d, |_, _| {
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = StandardNormal.sample(rng);
        C64::new(re, im)
    })
}

fn rand_sl2<R: rand::Rng>(rng: &mut R) -> DMatrix<C64> {
    let mut m = rand_gl(2, rng);
    let det = m.determinant();
    let s = det.sqrt();
    m /= s;
    m
}

#[test]
fn iwasawa_roundtrip_gl() {
    let mut rng = ChaCha12Rng::seed_from_u64(1);
    for d in [2usize, 3, 5] {
        let spec = GroupSpec::single(GroupAtom::Unitary(d));
        for _ in 0..50 {
            let g = GroupElement::from_single_matrix(&spec, rand_gl(d, &mut rng)).unwrap();
            let iw = iwasawa(&g).unwrap();
            assert!(iw.reconstruct().distance(&g) <= 1e-10, "d = {}", d);
            assert!(iw.k.unitarity_error() <= 1e-12);
            // n unit upper triangular
            if let Factor::Matrix(n) = &iw.n.factors[0] {
                for i in 0..d {
                    assert_eq!(n[(i, i)], C64::new(1.0, 0.0));
                    for j in 0..i {
                        assert_eq!(n[(i, j)], C64::new(0.0, 0.0));
                    }
                }
            }
        }
    }
}

#[test]
fn iwasawa_qr_vs_mgs() {
    let mut rng = ChaCha12Rng::seed_from_u64(2);
    let spec = GroupSpec::single(GroupAtom::Unitary(3));
    for _ in 0..20 {
        let g = GroupElement::from_single_matrix(&spec, rand_gl(3, &mut rng)).unwrap();
        let a = iwasawa(&g).unwrap();
        let b = iwasawa_mgs(&g).unwrap();
        assert!(a.k.distance(&b.k) <= 1e-8);
        assert!((a.alpha.coords() - b.alpha.coords()).amax() <= 1e-8);
    }
}

#[test]
fn iwasawa_su2_traceless() {
    let mut rng = ChaCha12Rng::seed_from_u64(3);
    let spec = GroupSpec::single(GroupAtom::Su2);
    for _ in 0..50 {
        let g = GroupElement::from_single_matrix(&spec, rand_sl2(&mut rng)).unwrap();
        let iw = iwasawa(&g).unwrap();
        assert!(iw.alpha.coords().sum().abs() <= 1e-9);
        assert!(iw.reconstruct().distance(&g) <= 1e-9);
    }
}

#[test]
fn iwasawa_torus_polar() {
    let spec = GroupSpec::single(GroupAtom::Torus(3));
    let v = DVector::from_vec(vec![
        C64::new(0.0, 2.0),
        C64::new(-1.0, 0.0),
        C64::new(3.0, 4.0),
    ]);
    let g = GroupElement { spec: spec.clone(), factors: vec![Factor::Phases(v)] };
    let iw = iwasawa(&g).unwrap();
    let a = iw.alpha.coords();
    assert!((a[0] - 2.0f64.ln()).abs() < 1e-14);
    assert!((a[1] - 0.0).abs() < 1e-14);
    assert!((a[2] - 5.0f64.ln()).abs() < 1e-14);
    assert!(iw.reconstruct().distance(&g) < 1e-14);
}

#[test]
fn iwasawa_rejects_singular() {
    let spec = GroupSpec::single(GroupAtom::Unitary(2));
    let m = DMatrix::from_row_slice(2, 2, &[
        C64::new(1.0, 0.0),
        C64::new(1.0, 0.0),
        C64::new(1.0, 0.0),
        C64::new(1.0, 0.0),
    ]);
    let g = GroupElement::from_single_matrix(&spec, m).unwrap();
    assert!(matches!(iwasawa(&g), Err(momentldp::Error::SingularInput { .. })));
}

#[test]
fn star_is_antihomomorphic_involution() {
    let mut rng = ChaCha12Rng::seed_from_u64(4);
    let spec = GroupSpec::new(vec![GroupAtom::Unitary(2), GroupAtom::Torus(2)]).unwrap();
    for _ in 0..20 {
        let g = haar_sample(&spec, &mut rng);
        let h = haar_sample(&spec, &mut rng);
        assert!(g.star().star().distance(&g) <= 1e-15);
        assert!(g.mul(&h).star().distance(&h.star().mul(&g.star())) <= 1e-12);
    }
}

#[test]
fn exp_alg_matches_taylor_and_additivity() {
    let mut rng = ChaCha12Rng::seed_from_u64(5);
    let spec = GroupSpec::single(GroupAtom::Unitary(3));
    for _ in 0..10 {
        let m = rand_gl(3, &mut rng);
        let herm = (&m + m.adjoint()).map(|z| z * 0.5);
        let xi = AlgebraVector::from_single_matrix(&spec, herm.clone()).unwrap();
        // Taylor oracle at small t
        let t = 1e-4;
        let e = exp_alg(&xi, t);
        if let Factor::Matrix(em) = &e.factors[0] {
            let taylor = DMatrix::identity(3, 3)
                + herm.map(|z| z * t)
                + (&herm * &herm).map(|z| z * (t * t / 2.0));
            assert!((em - taylor).iter().map(|z| z.norm()).fold(0.0, f64::max) < 1e-10);
        }
        // one-parameter group property
        let a = exp_alg(&xi, 0.3).mul(&exp_alg(&xi, 0.4));
        assert!(a.distance(&exp_alg(&xi, 0.7)) < 1e-12);
    }
}

#[test]
fn haar_is_unitary_and_balanced() {
    let mut rng = ChaCha12Rng::seed_from_u64(6);
    let spec = GroupSpec::new(vec![GroupAtom::Unitary(3), GroupAtom::Su2, GroupAtom::Torus(2)]).unwrap();
    let mut mean = DMatrix::<C64>::zeros(3, 3);
    let n = 2000;
    for _ in 0..n {
        let g = haar_sample(&spec, &mut rng);
        assert!(g.unitarity_error() < 1e-12);
        if let Factor::Matrix(u) = &g.factors[1] {
            assert!((u.determinant() - C64::new(1.0, 0.0)).norm() < 1e-12);
        }
        if let Factor::Matrix(u) = &g.factors[0] {
            mean += u;
        }
    }
    // first moment of Haar is zero
    let dev = mean.iter().map(|z| z.norm()).fold(0.0, f64::max) / n as f64;
    assert!(dev < 0.05, "haar first moment deviation {}", dev);
}

#[test]
fn adjoint_preserves_pairing() {
    let mut rng = ChaCha12Rng::seed_from_u64(7);
    let spec = GroupSpec::new(vec![GroupAtom::Unitary(2), GroupAtom::Su2]).unwrap();
    for _ in 0..20 {
        let k = haar_sample(&spec, &mut rng);
        let mk = |rng: &mut ChaCha12Rng, traceless: bool| {
            let m = rand_gl(2, rng);
            let mut h = (&m + m.adjoint()).map(|z| z * 0.5);
            if traceless {
                let t = h.trace() * 0.5;
                h[(0, 0)] -= t;
                h[(1, 1)] -= t;
            }
            h
        };
        let x = AlgebraVector::new(
            &spec,
            vec![
                AlgFactor::Hermitian(mk(&mut rng, false)),
                AlgFactor::Hermitian(mk(&mut rng, true)),
            ],
        )
        .unwrap();
        let xi = AlgebraVector::new(
            &spec,
            vec![
                AlgFactor::Hermitian(mk(&mut rng, false)),
                AlgFactor::Hermitian(mk(&mut rng, true)),
            ],
        )
        .unwrap();
        let lhs = pairing(&coadjoint(&k, &x), &adjoint(&k, &xi));
        let rhs = pairing(&x, &xi);
        assert!((lhs - rhs).abs() < 1e-10);
    }
}

#[test]
fn torus_unitary_factor_does_not_change_alpha() {
    // α(gu) = α(g) for unitary diagonal u commuting into the K part
    let mut rng = ChaCha12Rng::seed_from_u64(8);
    let spec = GroupSpec::single(GroupAtom::Unitary(3));
    for _ in 0..10 {
        let g = GroupElement::from_single_matrix(&spec, rand_gl(3, &mut rng)).unwrap();
        let mut d = DMatrix::<C64>::zeros(3, 3);
        for i in 0..3 {
            let th: f64 = StandardNormal.sample(&mut rng);
            d[(i, i)] = C64::new(th.cos(), th.sin());
        }
        let u = GroupElement::from_single_matrix(&spec, d).unwrap();
        let a1 = iwasawa(&g).unwrap().alpha.coords();
        let a2 = iwasawa(&g.mul(&u)).unwrap().alpha.coords();
        assert!((a1 - a2).amax() < 1e-10);
    }
}
