use approx::assert_relative_eq;

use hls_stab::bubble::{BubbleParams, ConformalMap, Variant};
use hls_stab::deficit::theta;
use hls_stab::grid::{apply_conformal, lp_norm, sample_bubble, BoxGrid, Field, GridSpec, RadialGrid};
use hls_stab::inequalities::{cross_term_ratio, fuzz, FuzzOp};
use hls_stab::par::Exec;
use hls_stab::params::{calibrate_at, riesz_constant, sobolev_constant, HlsParams};
use hls_stab::riesz::{hls_pairing, hls_quotient, hls_self_energy, riesz_convolve, RieszMethod, RieszOptions};

fn params() -> HlsParams {
    HlsParams::new(3, 2.75).unwrap()
}

fn radial() -> GridSpec {
    GridSpec::Radial(RadialGrid::default_for(3))
}

// mpmath, 30 digits
#[test]
fn riesz_constant_goldens() {
    for (mu, k) in [
        (0.5, 0.12698727186848194),
        (1.0, 0.079577471545947668),
        (2.0, 0.050660591821168886),
        (2.75, 0.017817836867597402),
    ] {
        assert_relative_eq!(riesz_constant(3, mu), k, max_relative = 1e-13);
    }
    assert_relative_eq!(riesz_constant(4, 3.5), 0.018161396523401951, max_relative = 1e-13);
}

#[test]
fn theorem_constants() {
    let p = params();
    assert_relative_eq!(p.c_n_mu, 43.398441740707588, max_relative = 1e-13);
    assert_relative_eq!(p.s, 2.3404922750420117, max_relative = 1e-14);
    assert_relative_eq!(p.c_mu, 1.0099472361057278, max_relative = 1e-12);
    assert_relative_eq!(sobolev_constant(4), 3.2031857019684189, max_relative = 1e-14);
    assert_relative_eq!(sobolev_constant(5), 3.848624653042426, max_relative = 1e-14);
    assert_eq!((p.p, p.p_tilde), (5.0, 2.25));
}

#[test]
fn calibration_is_scale_invariant() {
    let p = params();
    let g = RadialGrid::default_for(3);
    let base = calibrate_at(&p, &g, 1.0).unwrap();
    assert_relative_eq!(base.s, p.s, max_relative = 1e-6);
    assert_relative_eq!(base.s_hls, p.s_hls, max_relative = 1e-6);
    for lambda in [0.5, 2.0] {
        let c = calibrate_at(&p, &g, lambda).unwrap();
        assert_relative_eq!(c.s, base.s, max_relative = 1e-6);
        assert_relative_eq!(c.s_hls, base.s_hls, max_relative = 1e-6);
    }
}

#[test]
fn hls_inequality_on_radial_fields() {
    let p = params();
    let g = RadialGrid::default_for(3);
    let bubble = sample_bubble(&GridSpec::Radial(g.clone()), &p, &BubbleParams::centered(3, 1.0), Variant::Choquard).unwrap();
    assert_relative_eq!(hls_quotient(&p, &bubble).unwrap(), p.s_hls, max_relative = 1e-3);
    for (w, k) in [(1.0, 0.0), (2.0, 1.0), (0.5, 3.0), (3.0, 0.4)] {
        let v = g.nodes.iter().map(|r| (-r * r / (2.0 * w * w)).exp() * (1.0 + 0.5 * (k * r).cos())).collect();
        let q = hls_quotient(&p, &Field::radial(g.clone(), v)).unwrap();
        assert!(q >= p.s_hls * (1.0 - 1e-6), "w={w} k={k}: {q} < {}", p.s_hls);
    }
}

#[test]
fn radial_and_box_lp_and_energy_agree() {
    let p = params();
    let b = BubbleParams::centered(3, 1.0);
    let r = sample_bubble(&radial(), &p, &b, Variant::Choquard).unwrap();
    let c = sample_bubble(&GridSpec::Box(BoxGrid::new(40.0, 128).unwrap()), &p, &b, Variant::Choquard).unwrap();
    assert_relative_eq!(lp_norm(&c, 6.0).unwrap(), lp_norm(&r, 6.0).unwrap(), max_relative = 1e-2);
    assert_relative_eq!(hls_self_energy(&p, &c).unwrap(), hls_self_energy(&p, &r).unwrap(), max_relative = 1e-2);
}

#[test]
fn riesz_methods_agree_on_a_gaussian() {
    let p = params();
    let w = 1.5;
    let g = RadialGrid::default_for(3);
    let rv = g.nodes.iter().map(|r| (-r * r / (2.0 * w * w)).exp()).collect();
    let rf = Field::radial(g, rv);
    let closed = hls_pairing(&p, &rf, &rf).unwrap();
    let grid = BoxGrid::new(20.0, 64).unwrap();
    let bf = Field::cube(grid, grid.sample(|x| (-(x[0] * x[0] + x[1] * x[1] + x[2] * x[2]) / (2.0 * w * w)).exp(), Exec::default()));
    for method in [RieszMethod::FreeSpace, RieszMethod::FourierMultiplier] {
        let opts = RieszOptions { method, regularization: 0.0 };
        let v = riesz_convolve(&p, &bf, opts).unwrap().integrate_product(&bf).unwrap();
        assert_relative_eq!(v, closed, max_relative = 1e-2);
    }
    let rf_box = riesz_convolve(&p, &rf, RieszOptions { method: RieszMethod::FourierMultiplier, regularization: 0.0 });
    assert!(rf_box.is_err());
}

#[test]
fn self_energy_is_conformally_invariant_on_the_box() {
    let p = params();
    let grid = BoxGrid::new(20.0, 96).unwrap();
    let f = Field::cube(
        grid,
        grid.sample(|x| (-(x[0] * x[0] + 2.0 * x[1] * x[1] + x[2] * x[2]) / 18.0).exp(), Exec::default()),
    );
    let t = apply_conformal(&p, &ConformalMap::new(vec![0.5, 0.0, -0.5], 1.25), &f).unwrap();
    assert_relative_eq!(hls_self_energy(&p, &t).unwrap(), hls_self_energy(&p, &f).unwrap(), max_relative = 1e-2);
}

#[test]
fn theta_is_dilation_invariant_on_radial_grids() {
    let p = params();
    let g = RadialGrid::default_for(3);
    let v: Vec<f64> = g.nodes.iter().map(|r| 1.1 / (1.0 + r * r).sqrt() + 0.05 * (-r * r).exp()).collect();
    let f = Field::radial(g, v);
    let base = theta(&p, &f).unwrap();
    // λ < 1 reads f only inside the grid
    for lambda in [0.5, 0.8] {
        let t = apply_conformal(&p, &ConformalMap::new(vec![0.0; 3], lambda), &f).unwrap();
        assert_relative_eq!(theta(&p, &t).unwrap(), base, max_relative = 1e-2);
    }
}

#[test]
fn theta_converges_under_box_refinement() {
    let p = params();
    let b = BubbleParams::centered(3, 1.0);
    let th = |n| {
        let u = sample_bubble(&GridSpec::Box(BoxGrid::new(40.0, n).unwrap()), &p, &b, Variant::Choquard).unwrap();
        theta(&p, &u).unwrap()
    };
    let (coarse, fine) = (th(96), th(192));
    assert!(fine <= 0.5 * coarse, "Theta(192) = {fine:e}, Theta(96) = {coarse:e}");
}

// mpmath over a fine (a, b) grid
#[test]
fn cross_term_sup_below_golden() {
    for (r, golden, limit) in [(1.0, 0.0, 1e-12), (1.5, 0.41421356, 1e-6), (2.0, 1.0, 1e-9)] {
        let rep = fuzz(FuzzOp::CrossTerm { r, nu: 2 }, 200_000, 3).unwrap();
        assert_eq!(rep.violations, 0);
        assert!(rep.worst_ratio <= golden + limit, "r={r}: {} > {golden}", rep.worst_ratio);
    }
    assert_relative_eq!(cross_term_ratio(2.0, &[1.0, 1.0]).unwrap(), 1.0, max_relative = 1e-14);
}

#[test]
fn fuzz_is_deterministic() {
    let op = FuzzOp::Expansion { r: 3.0, l: 0.5 };
    assert_eq!(fuzz(op, 50_000, 17).unwrap(), fuzz(op, 50_000, 17).unwrap());
}

#[test]
fn box_energy_is_the_cube_restricted_energy() {
    let p = params();
    let c = sample_bubble(&GridSpec::Box(BoxGrid::new(40.0, 128).unwrap()), &p, &BubbleParams::centered(3, 1.0), Variant::Choquard).unwrap();
    let (x, w) = hls_stab::special::gauss_legendre(32);
    let mut nodes = Vec::new();
    for (lo, hi) in [(-40.0, -4.0), (-4.0, 4.0), (4.0, 40.0)] {
        for (xi, wi) in x.iter().zip(&w) {
            nodes.push((0.5 * (lo + hi) + 0.5 * (hi - lo) * xi, 0.5 * (hi - lo) * wi));
        }
    }
    // |∇Ũ|² = (amp·r)²(1 + r²)^{-3} for the N = 3 bubble
    let amp2 = 3f64.sqrt() * p.c_mu * p.c_mu;
    let mut cube = 0.0;
    for &(a, wa) in &nodes {
        for &(b, wb) in &nodes {
            for &(c, wc) in &nodes {
                let r2: f64 = a * a + b * b + c * c;
                cube += wa * wb * wc * amp2 * r2 / (1.0 + r2).powi(3);
            }
        }
    }
    let boxed = hls_stab::grid::dirichlet_norm(&c).unwrap();
    println!("box {boxed}, cube-restricted {}", cube.sqrt());
    assert_relative_eq!(boxed, cube.sqrt(), max_relative = 1e-3);
}
