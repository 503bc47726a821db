use plastiq::dissipation::global_distance;
use plastiq::mesh::{unit_square, unit_square_with, Side};
use plastiq::sampling::random_admissible_state;
use plastiq::solver::{incremental_step, run_1d_toy, ToyConfig};
use plastiq::{DissipationModel, EnergyModel, Loading, Models, SolverConfig, State, TimeGrid};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn toy_stays_elastic_below_threshold(lambda in -1.0f64..1.0, end in 0.1f64..1.0, steps in 1usize..30) {
        let grid = TimeGrid::uniform(end, steps).unwrap();
        for k in run_1d_toy(lambda, &grid, &ToyConfig::default()).unwrap() {
            prop_assert_eq!(k.p, 1.0);
            prop_assert_eq!(k.f, k.ell);
        }
    }

    #[test]
    fn field_distance_triangle_inequality(seed in any::<u64>()) {
        let mesh = unit_square(3);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let model = DissipationModel::new(0.7).unwrap();
        let a = random_admissible_state(&mesh, &mut rng, 1e-12).yp;
        let b = random_admissible_state(&mesh, &mut rng, 1e-12).yp;
        let c = random_admissible_state(&mesh, &mut rng, 1e-12).yp;
        let d = |x, y| global_distance(&mesh, x, y, &model).unwrap();
        prop_assert!(d(&a, &c) <= d(&a, &b) + d(&b, &c) + 1e-10);
        prop_assert!((d(&a, &b) - d(&b, &a)).abs() <= 1e-10);
        prop_assert_eq!(d(&a, &a), 0.0);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn incremental_step_never_loses_to_previous(fx in -1.0f64..1.0, fy in -1.0f64..1.0, rho in 0.05f64..1.0) {
        let mesh = unit_square_with(2, &Side::ALL).unwrap();
        let loading = Loading::uniform(vec![0.0, 1.0], &[[0.0, 0.0], [fx, fy]], &[[0.0, 0.0]; 2], mesh.node_count()).unwrap();
        let models = Models {
            energy: EnergyModel::default_2d().with_dirichlet_weight(5.0).unwrap(),
            dissipation: DissipationModel::new(rho).unwrap(),
            loading,
            mesh,
        };
        let prev = State::reference(&models.mesh);
        let cfg = SolverConfig { alternation_rounds: 2, ..SolverConfig::default() };
        let inc = incremental_step(&prev, 1.0, &models, &cfg).unwrap();
        prop_assert!(inc.objective <= inc.objective_prev + 1e-12);
        prop_assert!(inc.history.windows(2).all(|w| w[1] < w[0]));
        inc.state.check_admissible(&models.mesh, 1e-6).unwrap();
    }
}
