use pathattr::gig::{gig_attribute, GigConfig};
use pathattr::model::{AnalyticModel, Model};
use pathattr::shapley::{
    expected_attribution, shapley_exact, shapley_sampled, ExpectationConfig, ReferenceSet, SamplingConfig,
};
use pathattr::synth::{gen_double_gaussian, train_extra_trees, GaussianSpec, ToyFieldSpec, TrainerConfig};

fn product() -> Model {
    Model::Analytic(AnalyticModel::bilinear(vec![vec![0.0, 1.0], vec![0.0, 0.0]]).unwrap())
}

#[test]
fn sampled_estimates_center_on_exact_values() {
    let m = product();
    let exact = shapley_exact(&m, &[0.0, 0.0], &[1.0, 1.0]).unwrap().phi;
    let estimates: Vec<Vec<f64>> = (0..50)
        .map(|seed| {
            let cfg = SamplingConfig {
                seed,
                target_stderr: 0.0,
                max_permutations: 100,
                ..Default::default()
            };
            shapley_sampled(&m, &[0.0, 0.0], &[1.0, 1.0], &cfg).unwrap().0.phi
        })
        .collect();
    for i in 0..2 {
        let xs: Vec<f64> = estimates.iter().map(|e| e[i]).collect();
        let mean = xs.iter().sum::<f64>() / 50.0;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / 49.0;
        let se = (var / 50.0).sqrt();
        assert!((mean - exact[i]).abs() < 4.0 * se, "feature {i}: {mean} vs {} (se {se})", exact[i]);
    }
}

#[test]
fn early_stopped_mean_agrees_with_full_population() {
    let field = ToyFieldSpec::default();
    let data = gen_double_gaussian(&GaussianSpec::default_pair(), 300, &field, 21).unwrap();
    let trainer = TrainerConfig {
        n_trees: 30,
        seed: 4,
        ..Default::default()
    };
    let model = Model::Trees(train_extra_trees(&data, &trainer).unwrap());
    let refs = ReferenceSet::new(data.iter().map(|s| s.x.to_vec()).collect()).unwrap();
    let x = [0.9, 0.9];
    let gig = |r: &[f64], e: &[f64]| gig_attribute(&model, r, e, &GigConfig::default());
    let full = expected_attribution(gig, &refs, &x, &ExpectationConfig::default()).unwrap();
    assert_eq!(full.n_used, 600);
    let early = expected_attribution(
        gig,
        &refs,
        &x,
        &ExpectationConfig {
            target_stderr: 1e-3,
            shuffle_seed: 8,
            ..Default::default()
        },
    )
    .unwrap();
    let se = early.stderr_phi.as_ref().unwrap();
    for i in 0..2 {
        assert!((early.mean_phi[i] - full.mean_phi[i]).abs() < 3.0 * se[i].max(1e-12));
    }
}
