use hls_stab::experiments::{
    build_family, make_perturbation, run_scenario, stability_point, ExperimentConfig, FamilyMode, FamilySpec, PerturbationMode,
    PerturbationSpec, StabilityPoint,
};
use hls_stab::grid::{dirichlet_norm_unchecked, sample_family, BoxGrid, GridSpec, RadialGrid};
use hls_stab::interaction::{interaction_q, max_interaction_q};
use hls_stab::params::HlsParams;
use hls_stab::projection::tangent_residuals;

fn params() -> HlsParams {
    HlsParams::new(3, 2.75).unwrap()
}

fn spec(nu: usize, mode: FamilyMode, lambda: f64) -> FamilySpec {
    FamilySpec { nu, mode, q: vec![1e-2], lambda, alpha_offsets: vec![] }
}

fn tangent(amplitudes: Vec<f64>) -> PerturbationSpec {
    PerturbationSpec { mode: PerturbationMode::TangentOrthogonalized, amplitudes, correlation: 1.0, envelope: 3.0 }
}

#[test]
fn translation_pair_geometry() {
    let f = build_family(3, &spec(2, FamilyMode::Translation, 1.0), 1e-2).unwrap();
    let (a, b) = (&f.members[0].params, &f.members[1].params);
    let d: f64 = a.z.iter().zip(&b.z).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
    assert!((d - 10.0).abs() < 1e-12);
    assert_eq!((a.lambda, b.lambda), (1.0, 1.0));
}

#[test]
fn dilation_pair_and_ladder() {
    let f = build_family(3, &spec(2, FamilyMode::Dilation, 1.0), 1e-2).unwrap();
    let (a, b) = (f.members[0].params.lambda, f.members[1].params.lambda);
    assert!(((a / b).min(b / a) - 1e-2).abs() < 1e-14);
    for mode in [FamilyMode::Translation, FamilyMode::Dilation] {
        let f = build_family(3, &spec(3, mode, 1.0), 1e-2).unwrap();
        assert!(max_interaction_q(&f) <= 1e-2 * (1.0 + 1e-12));
        assert!((interaction_q(&f.members[0].params, &f.members[1].params) - 1e-2).abs() < 1e-12);
    }
}

#[test]
fn bad_targets_are_rejected() {
    for q in [0.0, 1.5, f64::NAN] {
        assert!(build_family(3, &spec(2, FamilyMode::Translation, 1.0), q).is_err());
    }
}

#[test]
fn perturbation_is_orthogonal_and_scaled() {
    let p = params();
    let fam = build_family(3, &spec(2, FamilyMode::Dilation, 1.0), 1e-2).unwrap();
    let grid = GridSpec::Radial(RadialGrid::default_for(3));
    let ps = tangent(vec![1e-3]);
    let rho = make_perturbation(&p, &ps, &fam, &grid, 1e-3, 5).unwrap();
    assert!((dirichlet_norm_unchecked(&rho).unwrap() - 1e-3).abs() <= 1e-12 * 1e-3 * 10.0);
    let worst = tangent_residuals(&p, &fam, &rho).unwrap().into_iter().flatten().fold(0.0f64, |a, b| a.max(b.abs()));
    assert!(worst <= 1e-10, "orthogonality residual {worst:e}");
    assert_eq!(rho, make_perturbation(&p, &ps, &fam, &grid, 1e-3, 5).unwrap());
    assert_ne!(rho, make_perturbation(&p, &ps, &fam, &grid, 1e-3, 6).unwrap());
}

#[test]
fn box_perturbation_is_orthogonal() {
    let p = params();
    let fam = build_family(3, &spec(2, FamilyMode::Translation, 1.2), 1e-2).unwrap();
    let grid = GridSpec::Box(BoxGrid::new(40.0, 64).unwrap());
    let rho = make_perturbation(&p, &tangent(vec![1e-2]), &fam, &grid, 1e-2, 11).unwrap();
    let worst = tangent_residuals(&p, &fam, &rho).unwrap().into_iter().flatten().fold(0.0f64, |a, b| a.max(b.abs()));
    assert!(worst <= 1e-10, "orthogonality residual {worst:e}");
}

fn point_record(t: f64, delta: Option<f64>) -> hls_stab::experiments::StabilityRecord {
    let p = params();
    let fam = build_family(3, &spec(2, FamilyMode::Dilation, 1.0), 1e-2).unwrap();
    let grid = GridSpec::Radial(RadialGrid::default_for(3));
    let ps = tangent(vec![1e-3]);
    stability_point(&StabilityPoint {
        params: &p,
        family: &fam,
        grid: &grid,
        grid_label: "radial4096",
        perturbation: &ps,
        q_target: 1e-2,
        t,
        perturbation_seed: 3,
        multistart: 1,
        projection_seed: 4,
        delta,
    })
}

#[test]
fn unperturbed_point_projects_onto_itself() {
    let r = point_record(0.0, None);
    assert!(r.error.is_none());
    assert_eq!(r.rho_norm, 0.0);
    assert!(r.d <= 1e-8, "d = {:e}", r.d);
    assert!(r.theta.is_finite() && r.theta > 0.0);
}

#[test]
fn regime_is_tracked() {
    let r = point_record(3e-3, None);
    assert!(r.regime_ok && r.rho_norm <= r.delta_used);
    assert_eq!(r.label, "theorem");
    let tight = point_record(3e-3, Some(1e-3));
    assert!(!tight.regime_ok);
    assert_eq!(tight.label, "outside-delta");
}

#[test]
fn theta_is_flat_in_small_t() {
    let a = point_record(1e-3, None);
    let b = point_record(1e-2, None);
    assert!(b.theta >= a.theta * 0.95, "{} vs {}", b.theta, a.theta);
    assert!(a.d < b.d);
}

#[test]
fn sampled_family_matches_target() {
    let p = params();
    let fam = build_family(3, &spec(2, FamilyMode::Translation, 1.2), 1e-3).unwrap();
    let u = sample_family(&GridSpec::Box(BoxGrid::new(40.0, 32).unwrap()), &p, &fam).unwrap();
    assert!(u.values().iter().all(|v| v.is_finite() && *v > 0.0));
}

const RADIAL_STABILITY: &str = r#"{
    "params": { "N": 3, "mu": 2.75 },
    "scenario": "stability",
    "family": { "nu": 2, "mode": "dilation", "q": [1e-2] },
    "perturbation": { "mode": "tangent-orthogonalized", "amplitudes": [1e-3, 1e-2] },
    "grids": [{ "kind": "radial" }],
    "multistart": 1,
    "seed": 7
}"#;

#[test]
fn scenario_output_is_byte_deterministic() {
    let cfg = ExperimentConfig::from_json(RADIAL_STABILITY).unwrap();
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    run_scenario(&cfg, a.path()).unwrap();
    run_scenario(&cfg, b.path()).unwrap();
    let read = |d: &tempfile::TempDir| std::fs::read(d.path().join("records.csv")).unwrap();
    let bytes = read(&a);
    assert_eq!(bytes, read(&b));
    let text = String::from_utf8(bytes).unwrap();
    assert!(text.starts_with("# hls-stab v1 stability\ngrid,Q_target,"));
    assert_eq!(text.lines().count(), 2 + 2 + 1);
}

#[test]
fn invalid_configs_are_rejected() {
    assert!(ExperimentConfig::from_json("{").is_err());
    assert!(ExperimentConfig::from_json(&RADIAL_STABILITY.replace("\"seed\"", "\"sede\"")).is_err());
    let zero = ExperimentConfig::from_json(&RADIAL_STABILITY.replace("[1e-3, 1e-2]", "[0.0]")).unwrap();
    assert!(zero.validate().is_err());
}
