use proptest::prelude::*;

use hls_stab::bubble::{eval_bubble, eval_neg_laplacian, BubbleFamily, BubbleParams, Variant, WeightedBubble};
use hls_stab::deficit::dual_norm;
use hls_stab::grid::{dirichlet_norm, lp_norm, BoxGrid, Field};
use hls_stab::inequalities::{cross_term_ratio, expansion_ratio};
use hls_stab::interaction::{interaction_q, is_delta_interacting, make_bump, normalize_family};
use hls_stab::par::Exec;
use hls_stab::params::{ExponentPredicates, HlsParams};

fn point() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-5.0..5.0f64, 3)
}

fn bubble() -> impl Strategy<Value = BubbleParams> {
    (point(), 0.1..10.0f64).prop_map(|(z, l)| BubbleParams::new(z, l))
}

fn gaussian_field(grid: &BoxGrid, c: [f64; 3], w: f64, k: f64) -> Field {
    Field::cube(
        *grid,
        grid.sample(
            |x| {
                let r2 = (x[0] - c[0]).powi(2) + (x[1] - c[1]).powi(2) + (x[2] - c[2]).powi(2);
                (-r2 / (2.0 * w * w)).exp() * (1.0 + 0.5 * (k * x[0]).sin())
            },
            Exec::default(),
        ),
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn predicates_follow_thresholds(n in 3usize..16, frac in 0.001..0.999f64) {
        let mu = frac * n as f64;
        let p = HlsParams::new(n, mu).unwrap();
        prop_assert_eq!(p.exponent_predicates(), ExponentPredicates::from_thresholds(n, mu));
    }

    #[test]
    fn params_are_pure(n in 3usize..10, frac in 0.01..0.99f64) {
        let mu = frac * n as f64;
        prop_assert_eq!(HlsParams::new(n, mu).unwrap(), HlsParams::new(n, mu).unwrap());
    }

    #[test]
    fn exponent_identities(n in 3usize..16, frac in 0.01..0.99f64) {
        let nf = n as f64;
        let p = HlsParams::new(n, frac * nf).unwrap();
        prop_assert!((p.p - (nf + 2.0) / (nf - 2.0)).abs() < 1e-12);
        prop_assert!((p.p_tilde + 1.0 - p.two_mu_star).abs() < 1e-12);
        prop_assert!(p.two_mu_star < p.two_star);
    }

    #[test]
    fn sobolev_bubble_solves_its_equation(b in bubble(), x in point()) {
        let p = HlsParams::new(3, 2.75).unwrap();
        let u = eval_bubble(&p, &b, Variant::Sobolev, &x);
        let lap = eval_neg_laplacian(&p, &b, Variant::Sobolev, &x);
        prop_assert!((lap - u.powf(p.p)).abs() <= 1e-10 * u.powf(p.p).max(f64::MIN_POSITIVE));
    }

    #[test]
    fn q_is_symmetric(a in bubble(), b in bubble()) {
        let q1 = interaction_q(&a, &b);
        let q2 = interaction_q(&b, &a);
        prop_assert!(q1 == q2);
        prop_assert!(q1 > 0.0 && q1 <= 1.0);
    }

    #[test]
    fn delta_interacting_is_monotone(a in bubble(), b in bubble(), d1 in 0.0..1.0f64, d2 in 0.0..1.0f64) {
        let fam = BubbleFamily::new(Variant::Choquard, vec![
            WeightedBubble { alpha: 1.0, params: a },
            WeightedBubble { alpha: 1.0, params: b },
        ]);
        let (lo, hi) = if d1 <= d2 { (d1, d2) } else { (d2, d1) };
        prop_assert!(!is_delta_interacting(&fam, lo) || is_delta_interacting(&fam, hi));
    }

    #[test]
    fn expansion_without_weight_is_homogeneous(r in 1.0..6.0f64, a in -10.0..10.0f64, b in -10.0..10.0f64, s in 0.01..100.0f64) {
        prop_assume!(a != 0.0 || b != 0.0);
        let x = expansion_ratio(r, 0.0, a, b).unwrap();
        let y = expansion_ratio(r, 0.0, s * a, s * b).unwrap();
        prop_assert!((x - y).abs() <= 1e-9 * x.abs().max(1.0));
    }

    #[test]
    fn cross_term_is_finite(r in 1.0..6.0f64, a in prop::collection::vec(-10.0..10.0f64, 2..5)) {
        prop_assume!(a.iter().any(|v| *v != 0.0));
        prop_assert!(cross_term_ratio(r, &a).unwrap().is_finite());
    }

    #[test]
    fn bump_is_lipschitz_cutoff(k in 5i32..9, x in point(), y in point()) {
        let p = HlsParams::new(3, 2.75).unwrap();
        let eps = 0.5;
        let fam = BubbleFamily::new(Variant::Choquard, vec![
            WeightedBubble { alpha: 1.0, params: BubbleParams::centered(3, 1.0) },
            WeightedBubble { alpha: 1.0, params: BubbleParams::new(vec![1.0, 0.0, 0.0], 10f64.powi(k)) },
        ]);
        let fam = normalize_family(&fam, 0);
        let (_, bump) = make_bump(&p, &fam, 0, eps, 16.0).unwrap();
        let (fx, fy) = (bump.eval(&x), bump.eval(&y));
        prop_assert!((0.0..=1.0).contains(&fx));
        let dxy = x.iter().zip(&y).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
        prop_assert!((fx - fy).abs() <= bump.lipschitz() * dxy * (1.0 + 1e-12) + 1e-15);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn norms_are_norms(
        c1 in prop::array::uniform3(-2.0..2.0f64), c2 in prop::array::uniform3(-2.0..2.0f64),
        w1 in 1.0..2.5f64, w2 in 1.0..2.5f64, k in 0.0..1.5f64, s in -3.0..3.0f64,
    ) {
        let grid = BoxGrid::new(16.0, 32).unwrap();
        let f = gaussian_field(&grid, c1, w1, k);
        let g = gaussian_field(&grid, c2, w2, 0.5 * k);
        let sum = f.add(&g).unwrap();
        for norm in [dirichlet_norm as fn(&Field) -> _, dual_norm, |u: &Field| lp_norm(u, 6.0)] {
            let (nf, ng, ns) = (norm(&f).unwrap(), norm(&g).unwrap(), norm(&sum).unwrap());
            prop_assert!(ns <= (nf + ng) * (1.0 + 1e-12));
            let scaled = norm(&f.scale(s)).unwrap();
            prop_assert!((scaled - s.abs() * nf).abs() <= 1e-12 * nf.max(1.0));
        }
    }
}
