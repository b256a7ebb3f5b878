mod common;

use pathattr::model::{load_model, save_model, Aggregation, Link, Model, TreeEnsemble};
use pathattr::Error;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use common::{random_point, random_tree};

#[test]
fn hundred_tree_ensemble_round_trips_bit_exact() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let trees = (0..100).map(|_| random_tree(&mut rng, 5, 6)).collect();
    let model = Model::Trees(TreeEnsemble::new(trees, 5, Link::Logistic, Aggregation::Sum).unwrap());
    let bytes = save_model(&model).unwrap();
    let loaded = load_model(&bytes).unwrap();
    for _ in 0..10_000 {
        let x = random_point(&mut rng, 5);
        assert_eq!(model.eval(&x).unwrap().to_bits(), loaded.eval(&x).unwrap().to_bits());
    }
    assert_eq!(save_model(&loaded).unwrap(), bytes);
}

#[test]
fn schema_errors_name_the_field() {
    let doc = br#"{
        "format_version": 1,
        "kind": "tree_ensemble",
        "n_features": 2,
        "link": "identity",
        "aggregation": "sum",
        "trees": [
            {"feature": [0, 0, 0], "threshold": [0.5, 0, 0], "value": [0, 0, 1],
             "left": [1, -1, -1], "right": [2, -1, -1]},
            {"feature": [3, 0, 0], "threshold": [0.5, 0, 0], "value": [0, 0, 1],
             "left": [1, -1, -1], "right": [2, -1, -1]}
        ]
    }"#;
    match load_model(doc) {
        Err(Error::Schema { path, .. }) => assert_eq!(path, "trees[1].feature[0]"),
        other => panic!("unexpected {other:?}"),
    }
}
