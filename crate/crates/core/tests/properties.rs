use std::sync::OnceLock;

use proptest::prelude::*;

use degiorgi_iss::backstepping::{
    forward_transform, inverse_transform, solve_inverse_kernel, solve_kernel, Coefficient, Kernel,
    ReactionDiffusionParams,
};
use degiorgi_iss::burgers::{
    simulate, BurgersParams, ForcingSpec, InitialConditionSpec, RunSettings, SignalSpec, SpatialProfile,
    TemporalProfile,
};
use degiorgi_iss::inequalities::{degiorgi_l0, run_property_suite, DeGiorgiHypothesis, SuiteSettings};
use degiorgi_iss::iss::{check_chebyshev_link, evaluate_theorem1};
use degiorgi_iss::numerics::{derivative, l2_norm, lp_norm, solve_tridiagonal};
use degiorgi_iss::{make_grid, Execution, Order, ScalarField, Trajectory};

fn trig_field(n: usize, coeffs: &[(f64, f64)]) -> ScalarField {
    let grid = make_grid(n).unwrap();
    ScalarField::from_fn(grid, |x| {
        coeffs
            .iter()
            .enumerate()
            .map(|(k, (a, b))| {
                let w = std::f64::consts::PI * (k + 1) as f64 * x;
                a * w.cos() + b * w.sin()
            })
            .sum()
    })
}

fn coeffs() -> impl Strategy<Value = Vec<(f64, f64)>> {
    prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), 1..=8)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn tridiagonal_residual_is_tiny(
        rows in prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64, 0.0..2.0f64, -10.0..10.0f64), 2..60),
    ) {
        let n = rows.len();
        let lower: Vec<f64> = rows[1..].iter().map(|r| r.0).collect();
        let upper: Vec<f64> = rows[..n - 1].iter().map(|r| r.1).collect();
        let diag: Vec<f64> = (0..n)
            .map(|i| {
                let l = if i > 0 { lower[i - 1].abs() } else { 0.0 };
                let u = if i + 1 < n { upper[i].abs() } else { 0.0 };
                (l + u + 0.1 + rows[i].2) * if i % 3 == 0 { -1.0 } else { 1.0 }
            })
            .collect();
        let rhs: Vec<f64> = rows.iter().map(|r| r.3).collect();
        let x = solve_tridiagonal(&lower, &diag, &upper, &rhs).unwrap();
        let scale = rhs.iter().fold(1.0f64, |m, v| m.max(v.abs()));
        for i in 0..n {
            let mut ax = diag[i] * x[i];
            if i > 0 { ax += lower[i - 1] * x[i - 1]; }
            if i + 1 < n { ax += upper[i] * x[i + 1]; }
            prop_assert!((ax - rhs[i]).abs() <= 1e-12 * scale);
        }
    }

    #[test]
    fn norms_scale_and_are_ordered(c in coeffs(), s in -5.0..5.0f64, p in 1.0..10.0f64) {
        let f = trig_field(201, &c);
        let scaled = f.scaled(s);
        let base = l2_norm(&f);
        prop_assert!((l2_norm(&scaled) - s.abs() * base).abs() <= 1e-12 * (1.0 + s.abs() * base));
        let sup = lp_norm(&f, Order::Infinity).unwrap();
        prop_assert!(lp_norm(&f, Order::Finite(p)).unwrap() <= sup * (1.0 + 1e-12));
    }

    #[test]
    fn derivative_reproduces_lines(a in -10.0..10.0f64, b in -10.0..10.0f64) {
        let grid = make_grid(51).unwrap();
        let d = derivative(&ScalarField::from_fn(grid, |x| a * x + b));
        prop_assert!(d.values().iter().all(|v| (v - a).abs() <= 1e-11 * (1.0 + a.abs() + b.abs())));
        let zero = derivative(&ScalarField::from_fn(grid, |_| b));
        prop_assert!(zero.values().iter().all(|v| *v == 0.0));
    }

    #[test]
    fn l0_is_monotone_in_m_and_phi(
        m in 0.01..10.0f64, dm in 0.0..5.0f64,
        alpha in 0.1..5.0f64, beta in 1.01..6.0f64,
        phi in 0.0..5.0f64, dphi in 0.0..5.0f64,
    ) {
        let l0 = |m, phi| degiorgi_l0(&DeGiorgiHypothesis::new(m, alpha, beta, 0.0, phi).unwrap()).unwrap();
        let base = l0(m, phi);
        prop_assert!(l0(m + dm, phi) >= base);
        prop_assert!(l0(m, phi + dphi) >= base);
    }
}

fn random_trajectory(seed: u64) -> Trajectory {
    let mut rng = degiorgi_iss::random::Lcg64::new(seed);
    let grid = make_grid(101).unwrap();
    let mut times = Vec::new();
    let mut fields = Vec::new();
    for j in 0..5 {
        let c: Vec<(f64, f64)> = (0..6).map(|_| (rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0))).collect();
        times.push(j as f64 * 0.1);
        fields.push(ScalarField::new(grid, trig_field(101, &c).into_values()).unwrap());
    }
    Trajectory::from_snapshots(times, fields).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn chebyshev_link_holds(seed in any::<u64>(), k in -2.0..2.0f64, gap in 1e-3..3.0f64) {
        let traj = random_trajectory(seed);
        let m = check_chebyshev_link(&traj, k, k + gap).unwrap();
        prop_assert!(m.margin >= -1e-10, "margin {}", m.margin);
    }
}

fn kernels_201() -> &'static (Kernel, Kernel) {
    static K: OnceLock<(Kernel, Kernel)> = OnceLock::new();
    K.get_or_init(|| {
        let params = ReactionDiffusionParams::new(1.0, Coefficient::constant(-10.0), 1.0).unwrap();
        let grid = make_grid(201).unwrap();
        (solve_kernel(&params, grid).unwrap(), solve_inverse_kernel(&params, grid).unwrap())
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    // quadrature error grows like (h ω)^6, so keep the modes moderate
    #[test]
    fn transforms_compose_to_identity(c in prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), 1..=4)) {
        let (k, l) = kernels_201();
        let u = trig_field(201, &c);
        let back = inverse_transform(&forward_transform(&u, k).unwrap(), l).unwrap();
        let err = back.sub(&u).unwrap().max_abs();
        prop_assert!(err <= 1e-8, "composition error {err:e}");
    }
}

fn burgers_run(d: &SignalSpec) -> Trajectory {
    let params = BurgersParams::new(1.0, 1.0).unwrap();
    let f = ForcingSpec::separable(0.05, SpatialProfile::Sine { wavenumber: 1 }, TemporalProfile::SinSquared { omega: 1.0 });
    let settings = RunSettings::new(1e-3, 1.0).with_stride(10);
    simulate(
        &params,
        &InitialConditionSpec::Bump { amplitude: 1.0 },
        d,
        &f,
        &settings,
        make_grid(51).unwrap(),
    )
    .unwrap()
}

#[test]
fn theorem1_rhs_grows_with_disturbance() {
    let params = BurgersParams::new(1.0, 1.0).unwrap();
    for (amplitude, omega) in [(0.05, 1.0), (0.1, 2.0), (0.02, 5.0)] {
        let d = SignalSpec::RampedCosine { amplitude, omega };
        let a = burgers_run(&d);
        let b = burgers_run(&d.scaled(2.0));
        let ra = evaluate_theorem1(&a, l2_norm(a.initial()), &params);
        let rb = evaluate_theorem1(&b, l2_norm(b.initial()), &params);
        for (x, y) in ra.records.iter().zip(&rb.records) {
            assert!(y.rhs >= x.rhs);
        }
        assert!(rb.records.last().unwrap().rhs > ra.records.last().unwrap().rhs);
    }
}

#[test]
fn trajectory_histories_are_monotone() {
    let traj = burgers_run(&SignalSpec::RampedCosine { amplitude: 0.1, omega: 3.0 });
    assert_eq!(traj.times()[0], 0.0);
    assert!(traj.times().windows(2).all(|w| w[1] > w[0]));
    for h in [traj.forcing_sup_history(), traj.forcing_l2_history(), traj.boundary_sup_history()] {
        assert!(h.windows(2).all(|w| w[1] >= w[0]));
    }
}

#[test]
fn inequality_suite_is_mode_independent() {
    let settings = SuiteSettings {
        seeds: 24,
        ..SuiteSettings::default()
    };
    let seq = run_property_suite(&settings, Execution::Sequential).unwrap();
    let par = run_property_suite(&settings, Execution::Parallel).unwrap();
    assert_eq!(seq, par);
    assert!(seq.iter().all(|r| r.margin.satisfied));
}
