use nls_star::profiles::{build_profile, existence_threshold, functionals, stationary_residual};
use nls_star::{Error, GraphFunction, GridSpec, ProfileSpecF64 as ProfileSpec, Sector};
use proptest::prelude::*;

fn grid(omega: f64, m: usize) -> GridSpec<f64> {
    GridSpec::new(GridSpec::<f64>::default_length(omega), m).unwrap()
}

#[test]
fn attractive_profile_shape() {
    let spec = ProfileSpec::attractive(3, 1, -1.0, 4.0, 3.0).unwrap();
    let a1 = 0.5f64.atanh();
    let x_peak = a1 / 2.0;
    assert!((x_peak - 0.274653).abs() < 1e-6);
    let phi = build_profile(&spec, &GridSpec::new(10.0, 10_000).unwrap()).unwrap();
    assert!((phi.vertex().re - 2.449490).abs() < 1e-6);
    let (i_max, v_max) = phi
        .edge(0)
        .iter()
        .enumerate()
        .map(|(i, z)| (i, z.re))
        .fold((0, f64::MIN), |a, b| if b.1 > a.1 { b } else { a });
    assert!((phi.grid().node(i_max) - x_peak).abs() <= phi.grid().spacing());
    assert!((v_max - 8f64.sqrt()).abs() < 1e-4);
    assert!(phi.max_imag() == 0.0);
}

#[test]
fn kirchhoff_profile_vertex_and_decay() {
    let spec = ProfileSpec::kirchhoff(3, 1.0, 3.0).unwrap();
    let phi = build_profile(&spec, &grid(1.0, 800)).unwrap();
    assert!((phi.vertex().re - std::f64::consts::SQRT_2).abs() < 1e-6);
    for j in 0..3 {
        let e = phi.edge(j);
        assert!(e.windows(2).all(|w| w[1].re < w[0].re));
    }
}

#[test]
fn repulsive_profile_vertex() {
    let spec = ProfileSpec::repulsive(3, -6.0, 1.0, 3.0).unwrap();
    // a = arccoth(2) = ln(3)/2, sqrt2 csch(a) = sqrt2 sqrt3
    let a = 0.5 * 3f64.ln();
    let oracle = 2f64.sqrt() / a.sinh();
    assert!((spec.vertex_value() - oracle).abs() < 1e-13);
    assert!((spec.vertex_value() - 2.449490).abs() < 1e-6);
}

#[test]
fn repulsive_requires_negative_alpha() {
    let err = ProfileSpec::repulsive(3, 1.0, 0.01, 3.0).unwrap_err();
    assert!(err.is_validation(), "{err}");
}

#[test]
fn residual_is_second_order() {
    for spec in [
        ProfileSpec::attractive(3, 1, -1.0, 4.0, 3.0).unwrap(),
        ProfileSpec::attractive(5, 2, 1.0, 2.0, 2.5).unwrap(),
        ProfileSpec::kirchhoff(4, 1.0, 3.0).unwrap(),
        ProfileSpec::repulsive(3, -6.0, 1.0, 3.0).unwrap(),
    ] {
        let coarse = stationary_residual(&build_profile(&spec, &grid(spec.omega, 1000)).unwrap(), &spec).unwrap();
        let fine = stationary_residual(&build_profile(&spec, &grid(spec.omega, 2000)).unwrap(), &spec).unwrap();
        assert!(coarse / fine >= 3.5, "{spec:?}: {coarse:e} -> {fine:e}");
    }
}

#[test]
fn scaled_profile_is_not_stationary() {
    let spec = ProfileSpec::attractive(3, 1, -1.0, 4.0, 3.0).unwrap();
    let phi = build_profile(&spec, &grid(4.0, 4000)).unwrap();
    let scaled = phi.scale(num_complex::Complex64::new(1.1, 0.0));
    // at the bump maximum phi'' = -omega phi + phi^3 exactly, so the scaled
    // defect there is |1.1^3 - 1.1| phi^3 = 0.231 * 8^{3/2}
    let expected = (1.1f64.powi(3) - 1.1) * 8f64.powf(1.5);
    let r = stationary_residual(&scaled, &spec).unwrap();
    assert!(r >= 0.01);
    assert!(r >= 0.9 * expected, "{r} vs {expected}");
}

#[test]
fn zero_function_has_zero_residual_and_energy() {
    let spec = ProfileSpec::attractive(3, 1, -1.0, 4.0, 3.0).unwrap();
    let g = spec.star_graph(Sector::Full).unwrap();
    let zero = GraphFunction::zeros(g, grid(4.0, 100));
    assert_eq!(stationary_residual(&zero, &spec).unwrap(), 0.0);
    let f = functionals(&zero, &spec).unwrap();
    assert_eq!((f.mass, f.energy, f.action), (0.0, 0.0, 0.0));
}

#[test]
fn mass_functional_matches_closed_form() {
    let spec = ProfileSpec::attractive(3, 1, -1.0, 4.0, 3.0).unwrap();
    let phi = build_profile(&spec, &grid(4.0, 4000)).unwrap();
    let f = functionals(&phi, &spec).unwrap();
    assert!((f.mass - 10.0).abs() < 1e-4, "{}", f.mass);
}

#[test]
fn action_increases_with_bump_count() {
    let omega = 2.0;
    let g = grid(omega, 4000);
    let actions: Vec<f64> = (0..=2)
        .map(|k| {
            let spec = ProfileSpec::attractive(5, k, -1.0, omega, 3.0).unwrap();
            functionals(&build_profile(&spec, &g).unwrap(), &spec).unwrap().action
        })
        .collect();
    assert!(actions[0] < actions[1] && actions[1] < actions[2], "{actions:?}");
}

#[test]
fn small_alpha_approaches_half_soliton() {
    let g = grid(1.0, 2000);
    let half = build_profile(&ProfileSpec::kirchhoff(3, 1.0, 3.0).unwrap(), &g).unwrap();
    let near = build_profile(&ProfileSpec::attractive(3, 1, 1e-4, 1.0, 3.0).unwrap(), &g).unwrap();
    let diff = near.axpy(num_complex::Complex64::new(-1.0, 0.0), &half).unwrap().sup_norm();
    assert!(diff < 1e-3, "{diff}");
}

fn admissible_k(n: usize, kf: f64) -> usize {
    let kmax = (n - 1) / 2;
    ((kf * (kmax + 1) as f64) as usize).min(kmax)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn existence_boundary_is_sharp(
        n in 3usize..8,
        kf in 0.0..1.0f64,
        alpha in prop_oneof![-3.0..-0.1f64, 0.1..3.0f64],
        p in 1.5..8.0f64,
    ) {
        let k = admissible_k(n, kf);
        let thr = existence_threshold(n, k, alpha);
        let below = ProfileSpec::attractive(n, k, alpha, thr * (1.0 - 1e-6), p);
        prop_assert!(matches!(below, Err(Error::Existence(_))), "{below:?}");
        let at = ProfileSpec::attractive(n, k, alpha, thr, p);
        prop_assert!(matches!(at, Err(Error::Existence(_))));
        let above = ProfileSpec::attractive(n, k, alpha, thr * (1.0 + 1e-6), p).unwrap();
        let phi = build_profile(&above, &GridSpec::new(10.0, 100).unwrap()).unwrap();
        prop_assert!(phi.edge(0).iter().all(|z| z.re.is_finite() && z.re > 0.0));
    }

    #[test]
    fn repulsive_boundary_is_sharp(n in 2usize..8, alpha in -5.0..-0.1f64, p in 1.5..6.0f64) {
        let thr = alpha * alpha / (n * n) as f64;
        prop_assert!(ProfileSpec::repulsive(n, alpha, thr, p).is_err());
        prop_assert!(ProfileSpec::repulsive(n, alpha, thr * (1.0 + 1e-6), p).is_err());
        prop_assert!(ProfileSpec::repulsive(n, alpha, thr * (1.0 - 1e-6), p).is_ok());
    }

    #[test]
    fn attractive_profile_is_symmetric_within_classes(
        n in 3usize..8,
        kf in 0.0..1.0f64,
        alpha in prop_oneof![-2.0..-0.2f64, 0.2..2.0f64],
        rel in 1.1..5.0f64,
        p in 1.5..7.0f64,
    ) {
        let k = admissible_k(n, kf);
        let omega = rel * existence_threshold(n, k, alpha);
        let spec = ProfileSpec::attractive(n, k, alpha, omega, p).unwrap();
        let phi = build_profile(&spec, &GridSpec::new(10.0, 200).unwrap()).unwrap();
        for j in 1..k {
            prop_assert_eq!(phi.edge(j), phi.edge(0));
        }
        for j in k + 1..n {
            prop_assert_eq!(phi.edge(j), phi.edge(k));
        }
        // the vertex law sum phi_j'(0) = alpha phi(0) holds for the closed form
        let flux: f64 = (0..n).map(|j| spec.derivative(j, 0.0)).sum();
        prop_assert!((flux - alpha * spec.vertex_value()).abs() <= 1e-10 * (1.0 + flux.abs()));
    }
}
