use proptest::prelude::*;
use rdcheck::models::{
    check_structure, entropy_dissipation, eval_reaction, instantiate_model, ModelSpec, Sampler, SkewLvSpec,
};

fn quadratic() -> rdcheck::models::ReactionSystem {
    instantiate_model(ModelSpec::QuadraticReversible, vec![1.0, 2.0, 3.0, 4.0]).unwrap()
}

fn skew_lv() -> rdcheck::models::ReactionSystem {
    let a = vec![vec![0.0, 1.0, -2.0], vec![-1.0, 0.0, 0.5], vec![2.0, -0.5, 0.0]];
    let spec = SkewLvSpec::new(a, vec![1.0, 0.5, 2.0]).unwrap();
    instantiate_model(ModelSpec::SkewLotkaVolterra(spec), vec![1.0; 3]).unwrap()
}

proptest! {
    #[test]
    fn quadratic_reversible_sums_to_zero(u in prop::collection::vec(0.0f64..1e3, 4)) {
        let f = eval_reaction(&quadratic(), &u).unwrap();
        prop_assert_eq!(f[0], f[1]);
        prop_assert_eq!(f[2], f[3]);
        prop_assert_eq!(f[0], -f[2]);
        prop_assert_eq!(f.iter().sum::<f64>(), 0.0);
    }

    #[test]
    fn skew_lv_total_is_linear(u in prop::collection::vec(0.0f64..1e2, 3)) {
        let sys = skew_lv();
        let f = eval_reaction(&sys, &u).unwrap();
        let expected = -(u[0] + 0.5 * u[1] + 2.0 * u[2]);
        let scale = f.iter().map(|x| x.abs()).sum::<f64>() + expected.abs();
        prop_assert!((f.iter().sum::<f64>() - expected).abs() <= 1e-12 * scale.max(1.0));
    }

    #[test]
    fn reaction_is_deterministic(u in prop::collection::vec(0.0f64..1e2, 4)) {
        let sys = quadratic();
        let a = eval_reaction(&sys, &u).unwrap();
        let b = eval_reaction(&sys, &u).unwrap();
        prop_assert_eq!(a.iter().map(|x| x.to_bits()).collect::<Vec<_>>(), b.iter().map(|x| x.to_bits()).collect::<Vec<_>>());
    }
}

#[test]
fn quadratic_entropy_dissipation_is_nonpositive() {
    let sys = quadratic();
    let mut s = Sampler::seeded(42);
    for _ in 0..10_000 {
        let u = s.point(4);
        let e = entropy_dissipation(&sys, &u).unwrap();
        // oracle: (u3 u4 - u1 u2) log(u1 u2 / (u3 u4))
        let p = u[0] * u[1];
        let q = u[2] * u[3];
        let oracle = (q - p) * (p / q).ln();
        assert!(e <= 0.0, "{u:?} {e}");
        assert!(
            (e - oracle).abs() <= 1e-9 * oracle.abs().max(1.0),
            "{e} vs {oracle}"
        );
    }
}

#[test]
fn structure_verdicts_reproduce_under_seed() {
    for sys in [quadratic(), skew_lv()] {
        let a = check_structure(&sys, &mut Sampler::seeded(9), 500).unwrap();
        let b = check_structure(&sys, &mut Sampler::seeded(9), 500).unwrap();
        assert_eq!(a, b);
        assert!(a.all_passed(), "{} {a:?}", sys.name());
    }
}

#[test]
fn non_skew_interaction_is_rejected() {
    assert!(SkewLvSpec::new(vec![vec![0.0, 1.0], vec![1.0, 0.0]], vec![1.0, 1.0]).is_err());
}

#[test]
fn model_constants() {
    let q = quadratic();
    assert_eq!((q.mass_control().k0, q.mass_control().k1), (0.0, 0.0));
    assert_eq!(q.growth().epsilon, 0.0);
    let spec = SkewLvSpec::new(vec![vec![0.0, 1.0], vec![-1.0, 0.0]], vec![1.0, 1.0]).unwrap();
    let lv = instantiate_model(ModelSpec::SkewLotkaVolterra(spec), vec![1.0, 1.0]).unwrap();
    assert_eq!(lv.mass_control().k1, -1.0);
    assert!(instantiate_model(ModelSpec::QuadraticReversible, vec![1.0, 0.0, 1.0, 1.0]).is_err());
    assert!(instantiate_model(ModelSpec::QuadraticReversible, vec![1.0; 3]).is_err());
}
