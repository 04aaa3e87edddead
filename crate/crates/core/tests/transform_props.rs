use proptest::prelude::*;
use rdcheck::grid::{Field, Grid1D};
use rdcheck::models::{instantiate_model, ModelSpec, ReactionSystem, Sampler, SkewLvSpec};
use rdcheck::solver::{run_simulation, SolverConfig, SystemState};
use rdcheck::theory::{fit_rate, FitMode};
use rdcheck::transform::{
    augment_initial, augment_system, rescale_solution, rescale_state, unscale_solution, unscale_state,
    verify_augmented,
};

fn skew_lv() -> ReactionSystem {
    let spec = SkewLvSpec::new(vec![vec![0.0, 1.0], vec![-1.0, 0.0]], vec![1.0, 1.0]).unwrap();
    instantiate_model(ModelSpec::SkewLotkaVolterra(spec), vec![0.05, 0.1]).unwrap()
}

fn quadratic() -> ReactionSystem {
    instantiate_model(ModelSpec::QuadraticReversible, vec![0.1, 0.2, 0.3, 0.4]).unwrap()
}

fn lv_initial(n: usize) -> SystemState {
    let grid = Grid1D::new(n, 1.0).unwrap();
    SystemState::new(
        0.0,
        vec![
            Field::from_fn(grid, |x| 0.5 + (-((x - 0.3) / 0.15).powi(2)).exp()).unwrap(),
            Field::from_fn(grid, |x| if x < 0.5 { 0.4 } else { 1.2 }).unwrap(),
        ],
    )
    .unwrap()
}

proptest! {
    #[test]
    fn rescaling_round_trips(u in prop::collection::vec(0.0f64..1e3, 1..6), k1 in -3.0f64..3.0, t in 0.0f64..5.0) {
        let back = unscale_solution(&rescale_solution(&u, k1, t), k1, t);
        for (a, b) in u.iter().zip(&back) {
            prop_assert!((a - b).abs() <= 1e-14 * a.abs().max(1.0));
        }
    }
}

#[test]
fn zero_k1_rescaling_is_identity() {
    let u = [0.3, 7.0, 0.0];
    assert_eq!(rescale_solution(&u, 0.0, 3.0), u.to_vec());
}

#[test]
fn skew_lv_augmentation_conserves_exactly() {
    let aug = augment_system(&skew_lv());
    let v = verify_augmented(&aug, &mut Sampler::seeded(5), 10_000, 5.0).unwrap();
    assert!(v.conservation.passed, "{:?}", v.conservation);
    assert!(v.conservation.worst_residual <= 1e-10);
    assert!(v.quasi_positive.passed);
    assert!(v.min_extra_source >= -1e-10, "{}", v.min_extra_source);
    assert!(v.growth.passed);
}

#[test]
fn quadratic_augmentation_leaves_extra_species_inert() {
    let aug = augment_system(&quadratic());
    let mut s = Sampler::seeded(6);
    for _ in 0..1000 {
        let w = s.point(5);
        let t = s.uniform(0.0, 10.0);
        let g = aug.augmented.eval_at(&w, t).unwrap();
        assert_eq!(g[4], 0.0);
        assert_eq!(&g[..4], &aug.base.eval_at(&w[..4], t).unwrap()[..]);
    }
}

#[test]
fn rescaled_dynamics_commute_with_simulation() {
    let sys = skew_lv();
    let aug = augment_system(&sys);
    let (dt, t_end) = (0.01, 0.2);
    let cfg = SolverConfig::new(dt, t_end).unwrap();
    let init = lv_initial(32);
    let base = run_simulation(&sys, &init, &cfg, &mut []).unwrap();
    let direct = run_simulation(&aug.augmented, &augment_initial(&init).unwrap(), &cfg, &mut []).unwrap();
    assert_eq!(base.snapshots.len(), direct.snapshots.len());
    for (b, d) in base.snapshots.iter().zip(&direct.snapshots) {
        let w = rescale_state(&b.state, aug.k1).unwrap();
        let w_direct = SystemState::new(d.t, d.state.fields()[..2].to_vec()).unwrap();
        let u_sup = b.state.sup_norms().into_iter().fold(0.0, f64::max);
        let diff = w.max_distance(&w_direct).unwrap();
        assert!(diff <= 5.0 * dt * (1.0 + u_sup * u_sup), "t={} diff={diff}", b.t);
        let back = unscale_state(&d.state, aug.k1, 2).unwrap();
        assert_eq!(back.n_species(), 2);
    }
}

#[test]
fn reconstructed_solution_decays_within_k1() {
    let sys = skew_lv();
    let aug = augment_system(&sys);
    let dt = 1e-3;
    let cfg = SolverConfig::new(dt, 5.0).unwrap().with_record_every(50);
    let traj = run_simulation(
        &aug.augmented,
        &augment_initial(&lv_initial(32)).unwrap(),
        &cfg,
        &mut [],
    )
    .unwrap();
    let series: Vec<(f64, f64)> = traj
        .snapshots
        .iter()
        .map(|s| {
            let u = unscale_state(&s.state, aug.k1, 2).unwrap();
            (s.t, u.total_mass())
        })
        .collect();
    let fit = fit_rate(&series, FitMode::Exponential).unwrap();
    assert!(fit.rate > 0.0 && fit.rate <= -aug.k1 * (1.0 + 1e-6), "{fit:?}");
    assert!(fit.r_squared > 0.99);
}
