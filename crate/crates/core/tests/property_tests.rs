//! Randomized property tests for the algebraic invariants of the library.

use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;

use momentldp::config;
use momentldp::lie::{
    exp_alg, iwasawa, iwasawa_mgs, AlgFactor, AlgebraVector, C64, GroupAtom, GroupElement,
    GroupSpec,
};
use momentldp::moment::{extended_action, ln_chi, nonlinear_pairing};
use momentldp::rate;
use momentldp::sim;

fn u2() -> GroupSpec {
    GroupSpec::single(GroupAtom::Unitary(2))
}

/// Hermitian 2×2 from 4 reals: diag (a, b), off-diagonal c + id.
fn herm2(v: [f64; 4]) -> AlgebraVector {
    let m = DMatrix::from_row_slice(
        2,
        2,
        &[
            C64::new(v[0], 0.0),
            C64::new(v[2], v[3]),
            C64::new(v[2], -v[3]),
            C64::new(v[1], 0.0),
        ],
    );
    AlgebraVector::new(&u2(), vec![AlgFactor::Hermitian(m)]).unwrap()
}

/// Generic group point exp(ξ/2)·exp(iη) — dense in a neighborhood of e.
fn point(v: [f64; 4], w: [f64; 4]) -> GroupElement {
    let unitary = rate::exp_unitary(&herm2(w), 1.0);
    exp_alg(&herm2(v).scale(0.5), 1.0).mul(&unitary)
}

fn small() -> impl Strategy<Value = f64> {
    -1.5f64..1.5
}

fn v4() -> impl Strategy<Value = [f64; 4]> {
    [small(), small(), small(), small()]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn star_is_an_antihomomorphic_involution(a in v4(), b in v4(), c in v4(), d in v4()) {
        let g = point(a, b);
        let h = point(c, d);
        prop_assert!(g.star().star().distance(&g) < 1e-10);
        let lhs = g.mul(&h).star();
        let rhs = h.star().mul(&g.star());
        prop_assert!(lhs.distance(&rhs) < 1e-10);
    }

    #[test]
    fn iwasawa_roundtrip_and_mgs_agree(a in v4(), b in v4()) {
        let g = point(a, b);
        let iw = iwasawa(&g).unwrap();
        prop_assert!(iw.reconstruct().distance(&g) < 1e-9);
        let mgs = iwasawa_mgs(&g).unwrap();
        let da: f64 = iw
            .alpha
            .coords()
            .iter()
            .zip(&mgs.alpha.coords())
            .map(|(u, v)| (u - v).abs())
            .fold(0.0, f64::max);
        prop_assert!(da < 1e-8);
        // K factor is unitary
        prop_assert!(iw.k.unitarity_error() < 1e-10);
    }

    #[test]
    fn ln_chi_is_positively_homogeneous(x in v4(), a in v4(), b in v4(), t in 0.05f64..3.0) {
        let x = herm2(x);
        let g = point(a, b);
        let lhs = ln_chi(&x.scale(t), &g).unwrap();
        let rhs = t * ln_chi(&x, &g).unwrap();
        prop_assert!((lhs - rhs).abs() < 1e-9 * (1.0 + rhs.abs()));
    }

    #[test]
    fn ln_chi_satisfies_the_cocycle_identity(x in v4(), a in v4(), b in v4(), c in v4(), d in v4()) {
        let x = herm2(x);
        let g1 = point(a, b);
        let g2 = point(c, d);
        let lhs = ln_chi(&x, &g2.mul(&g1)).unwrap();
        let rhs = ln_chi(&extended_action(&g1, &x).unwrap(), &g2).unwrap() + ln_chi(&x, &g1).unwrap();
        prop_assert!((lhs - rhs).abs() < 1e-8 * (1.0 + lhs.abs()));
    }

    #[test]
    fn pairing_scales_linearly_in_x(x in v4(), xi in v4(), t in 0.05f64..3.0) {
        let x = herm2(x);
        let xi = herm2(xi);
        let lhs = nonlinear_pairing(&x.scale(t), &xi).unwrap();
        let rhs = t * nonlinear_pairing(&x, &xi).unwrap();
        prop_assert!((lhs - rhs).abs() < 1e-9 * (1.0 + rhs.abs()));
    }

    #[test]
    fn pairing_reduces_to_linear_on_commuting_diagonals(x1 in small(), x2 in small(), t1 in small(), t2 in small()) {
        let x = herm2([x1, x2, 0.0, 0.0]);
        let xi = herm2([t1, t2, 0.0, 0.0]);
        let got = nonlinear_pairing(&x, &xi).unwrap();
        let want = x1 * t1 + x2 * t2;
        prop_assert!((got - want).abs() < 1e-9 * (1.0 + want.abs()));
    }

    #[test]
    fn region_complement_is_an_involution(n1 in small(), n2 in small(), off in small(), p1 in small(), p2 in small()) {
        let base = format!("halfspace:{n1},{n2}:{off}");
        let r = config::parse_region(&base, None).unwrap();
        let cc = config::parse_region(&format!("complement:complement:{base}"), None).unwrap();
        let x0 = [p1, p2];
        prop_assert_eq!(r.contains_x0(&x0), cc.contains_x0(&x0));
    }

    #[test]
    fn wilson_interval_brackets_the_point_estimate(hits in 0usize..500, extra in 0usize..500) {
        let n = hits + extra.max(1);
        let (lo, hi) = sim::wilson(hits, n);
        let p = hits as f64 / n as f64;
        prop_assert!((0.0..=1.0).contains(&lo) && (0.0..=1.0).contains(&hi));
        prop_assert!(lo <= p + 1e-12 && p <= hi + 1e-12);
        prop_assert!(lo <= hi);
    }

    #[test]
    fn csv_floats_roundtrip(v in proptest::num::f64::NORMAL | proptest::num::f64::ZERO) {
        let s = config::csv_float(v);
        prop_assert!(!s.contains(','));
        prop_assert_eq!(s.parse::<f64>().unwrap(), v);
    }

    #[test]
    fn m_list_roundtrips(ms in proptest::collection::vec(1usize..2000, 1..8)) {
        let text = ms.iter().map(|m| m.to_string()).collect::<Vec<_>>().join(",");
        prop_assert_eq!(config::parse_m_list(&text).unwrap(), ms);
    }

    #[test]
    fn cramer_rate_is_nonnegative_and_zero_at_the_mean(p in 0.1f64..0.9, a in 0.02f64..0.98) {
        let law = vec![(vec![0i64], 1.0 - p), (vec![1i64], p)];
        let opts = rate::OptimizerOptions::default();
        let at_mean = rate::rate_cramer(&law, &DVector::from_vec(vec![p]), &opts).unwrap();
        prop_assert!(at_mean.value.abs() < 1e-7);
        let at_a = rate::rate_cramer(&law, &DVector::from_vec(vec![a]), &opts).unwrap();
        let kl = a * (a / p).ln() + (1.0 - a) * ((1.0 - a) / (1.0 - p)).ln();
        prop_assert!(at_a.value >= -1e-9);
        prop_assert!((at_a.value - kl).abs() < 1e-5, "{} vs {}", at_a.value, kl);
    }

    #[test]
    fn coadjoint_action_preserves_spectra(x in v4(), a in v4(), b in v4()) {
        let x = herm2(x);
        let k = point(a, b); // only the unitary part acts isometrically, so use iwasawa K
        let k = iwasawa(&k).unwrap().k;
        let kx = momentldp::lie::coadjoint(&k, &x);
        prop_assert!((kx.trace_norm() - x.trace_norm()).abs() < 1e-9);
        let cd = momentldp::moment::chamber_decompose(&x);
        let cd2 = momentldp::moment::chamber_decompose(&kx);
        let d: f64 = cd.x0.coords().iter().zip(&cd2.x0.coords()).map(|(u, v)| (u - v).abs()).sum();
        prop_assert!(d < 1e-8);
    }
}
