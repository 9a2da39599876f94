mod common;

use common::*;
use proptest::prelude::*;
use seqmeas_core::quantum::{
    build_sequential_model, induced_joint_probabilities, minimal_weights, ProjectorFamily,
};
use seqmeas_core::stat_model::{SequentialModel, DEFAULT_TOL};

fn quantum_model(seed: u64, dim: usize, zero_first: bool) -> (SequentialModel, nalgebra::DMatrix<f64>) {
    let mut r = rng(seed);
    let first = pvm(&ranks(dim, &mut r), &mut r);
    let second = pvm(&ranks(dim, &mut r), &mut r);
    let mut weights: Vec<f64> = (0..first.len()).map(|_| rand::Rng::random_range(&mut r, 0.05..1.0)).collect();
    if zero_first && weights.len() > 1 {
        weights[0] = 0.0;
    }
    let rho0 = state_of_family(&first, &weights);
    let u = unitary(dim, &mut r);
    let raw: Vec<f64> = (0..second.len()).map(|_| rand::Rng::random_range(&mut r, 0.05..1.0)).collect();
    let total: f64 = raw.iter().sum();
    let p_tilde: Vec<f64> = raw.iter().map(|v| v / total).collect();
    let model = build_sequential_model(&rho0, &first, &u, &second, &p_tilde).unwrap();
    let joint = induced_joint_probabilities(&rho0, &first, &u, &second).unwrap();
    (model, joint)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn quantum_models_are_valid(seed in any::<u64>(), dim in 2usize..7, zero in any::<bool>()) {
        let (model, joint) = quantum_model(seed, dim, zero);
        prop_assert!(model.validate(DEFAULT_TOL).is_valid());
        let (d, d_tilde) = model.degeneracy_marginals();
        for v in d.iter().chain(&d_tilde) {
            prop_assert!((v - v.round()).abs() < 1e-9 && *v >= 1.0 - 1e-9);
        }
        let p = model.joint_distributions().p_forward;
        prop_assert!((p - joint).amax() < 1e-12);
    }

    #[test]
    fn j_equation(seed in any::<u64>(), dim in 2usize..7, zero in any::<bool>()) {
        let (model, _) = quantum_model(seed, dim, zero);
        prop_assert!(model.j_equation_residual() < 1e-9);
        prop_assert!(model.j_equation_reverse_residual() < 1e-9);
    }

    #[test]
    fn entropy_chain_and_minimal_case(seed in any::<u64>(), dim in 2usize..7, zero in any::<bool>()) {
        let (model, _) = quantum_model(seed, dim, zero);
        let chain = model.entropy_chain().unwrap();
        prop_assert!(chain.h_p <= chain.h_q + 1e-10);
        prop_assert!(chain.cross.at_least(chain.h_q, 1e-10));
        let min = model.minimal_case().unwrap();
        prop_assert!(min.validate(DEFAULT_TOL).is_valid());
        let mc = min.entropy_chain().unwrap();
        prop_assert!((mc.cross.finite().unwrap() - mc.h_q).abs() < 1e-12);
    }
}

#[test]
fn minimal_weights_reproduce_minimal_case() {
    let mut r = rng(11);
    let first = pvm(&[1, 2, 1], &mut r);
    let second = pvm(&[2, 2], &mut r);
    let rho0 = state_of_family(&first, &[0.2, 0.5, 0.3]);
    let u = unitary(4, &mut r);
    let q = minimal_weights(&rho0, &first, &u, &second).unwrap();
    let model = build_sequential_model(&rho0, &first, &u, &second, &q).unwrap();
    let min = model.minimal_case().unwrap();
    for (a, b) in model.x_tilde().iter().zip(min.x_tilde()) {
        assert!((a - b).abs() < 1e-14);
    }
}

#[test]
fn model_json_round_trip() {
    let (model, _) = quantum_model(5, 4, true);
    let text = serde_json::to_string(&model).unwrap();
    let back: SequentialModel = serde_json::from_str(&text).unwrap();
    assert_eq!(back, model);
    let _ = ProjectorFamily::trivial(2);
}
