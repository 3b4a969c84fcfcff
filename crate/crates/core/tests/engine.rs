use mockcheck::engine::{
    finite_diff_gradients, max_relative_error, train, Activation, LayerDef, LossKind, MetricKind,
    Model, OptimizerKind, Tensor, TrainConfig,
};
use mockcheck::mock::{generate_mock_data, MockDataConfig};
use mockcheck::spec::{DataInterface, DataKind, TaskType};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const GRAD_FLOOR: f64 = 1e-6;

/// Random model with at most 3 trainable layers of at most 16 units.
fn random_case(seed: u64) -> (Model, Tensor, Tensor, LossKind) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let input_dim = rng.random_range(3..=8);
    let hidden = [Activation::Relu, Activation::Tanh, Activation::Sigmoid, Activation::Linear];
    let mut layers = Vec::new();
    let use_conv = rng.random_bool(0.3);
    if use_conv {
        let act = hidden[rng.random_range(0..hidden.len())];
        layers.push(LayerDef::conv1d(rng.random_range(1..=4), rng.random_range(1..=3), act));
        layers.push(LayerDef::Flatten);
    }
    let extra_dense = rng.random_range(0..=if use_conv { 0 } else { 1 });
    for _ in 0..extra_dense {
        let act = hidden[rng.random_range(0..hidden.len())];
        layers.push(LayerDef::dense(rng.random_range(1..=16), act));
    }
    let (loss, out_units, out_act) = match rng.random_range(0..3) {
        0 => (LossKind::Mse, rng.random_range(1..=4), Activation::Linear),
        1 => (LossKind::BinaryCrossentropy, rng.random_range(1..=3), Activation::Sigmoid),
        _ => (LossKind::CategoricalCrossentropy, rng.random_range(2..=5), Activation::Softmax),
    };
    layers.push(LayerDef::dense(out_units, out_act));
    let model = Model::build(input_dim, layers, seed).unwrap();
    let batch = 4;
    let x: Vec<f64> = (0..batch * input_dim).map(|_| rng.random_range(-2.0..2.0)).collect();
    let y: Vec<f64> = (0..batch)
        .flat_map(|_| -> Vec<f64> {
            match loss {
                LossKind::Mse => (0..out_units).map(|_| rng.random_range(-1.0..1.0)).collect(),
                LossKind::BinaryCrossentropy => {
                    (0..out_units).map(|_| f64::from(rng.random_bool(0.5) as u8)).collect()
                }
                LossKind::CategoricalCrossentropy => {
                    let hot = rng.random_range(0..out_units);
                    (0..out_units).map(|j| f64::from(u8::from(j == hot))).collect()
                }
            }
        })
        .collect();
    (
        model,
        Tensor::matrix(batch, input_dim, x).unwrap(),
        Tensor::matrix(batch, out_units, y).unwrap(),
        loss,
    )
}

#[test]
fn analytic_gradients_match_finite_differences() {
    let mut worst = 0.0f64;
    for seed in 0..50 {
        let (model, x, y, loss) = random_case(seed);
        let analytic = model.gradients(&x, &y, loss).unwrap();
        let numeric = finite_diff_gradients(&model, &x, &y, loss, 1e-5).unwrap();
        let err = max_relative_error(&analytic, &numeric, GRAD_FLOOR);
        assert!(err < 1e-4, "seed {seed}: max relative error {err}");
        worst = worst.max(err);
    }
    println!("worst relative gradient error over 50 models: {worst:e}");
}

/// Straight-line re-evaluation of a dense relu network from its raw weights.
fn reference_forward(model: &Model, x: &[f64]) -> Vec<f64> {
    let params = model.parameters();
    let mut a = x.to_vec();
    for (li, layer) in model.layers().iter().enumerate() {
        let (w, b) = (&params[2 * li], &params[2 * li + 1]);
        let (rows, cols) = (w.shape()[0], w.shape()[1]);
        let mut z = vec![0.0; cols];
        for j in 0..cols {
            let mut s = b.values()[j];
            for i in 0..rows {
                s += a[i] * w.values()[i * cols + j];
            }
            z[j] = s;
        }
        a = match layer.activation().unwrap() {
            Activation::Relu => z.iter().map(|v| if *v > 0.0 { *v } else { 0.0 }).collect(),
            _ => z,
        };
    }
    a
}

#[test]
fn forward_matches_reference_matmul() {
    let model = Model::build(
        4,
        vec![
            LayerDef::dense(6, Activation::Relu),
            LayerDef::dense(3, Activation::Linear),
        ],
        2024,
    )
    .unwrap();
    let x = Tensor::from_rows(&[vec![0.5, -1.25, 2.0, 0.1], vec![-0.3, 0.0, 1.0, -2.0]]).unwrap();
    let out = model.forward(&x).unwrap();
    for r in 0..2 {
        let expected = reference_forward(&model, x.row(r));
        for (a, b) in out.row(r).iter().zip(&expected) {
            assert!((a - b).abs() < 1e-12, "{a} vs {b}");
        }
    }
}

fn nearest_centroid_accuracy(x: &Tensor, labels: &[usize], classes: usize) -> f64 {
    let d = x.cols();
    let mut centroids = vec![vec![0.0; d]; classes];
    let mut counts = vec![0usize; classes];
    for (i, &c) in labels.iter().enumerate() {
        counts[c] += 1;
        for (s, v) in centroids[c].iter_mut().zip(x.row(i)) {
            *s += v;
        }
    }
    for (c, n) in centroids.iter_mut().zip(&counts) {
        c.iter_mut().for_each(|v| *v /= *n as f64);
    }
    let correct = labels
        .iter()
        .enumerate()
        .filter(|(i, &c)| {
            let row = x.row(*i);
            let best = (0..classes)
                .min_by(|&a, &b| {
                    let da: f64 = row.iter().zip(&centroids[a]).map(|(p, q)| (p - q).powi(2)).sum();
                    let db: f64 = row.iter().zip(&centroids[b]).map(|(p, q)| (p - q).powi(2)).sum();
                    da.partial_cmp(&db).unwrap()
                })
                .unwrap();
            best == c
        })
        .count();
    correct as f64 / labels.len() as f64
}

#[test]
fn mock_fcnn_learns_two_gaussians() {
    let di = DataInterface {
        num_features: 4,
        data_kind: DataKind::Numeric,
        task_type: TaskType::BinaryClassification,
        num_classes: 2,
    };
    let data = generate_mock_data(&di, &MockDataConfig::new(7)).unwrap();
    let x = data.feature_tensor();
    let labels = data.class_labels().unwrap();
    // Oracle: the data itself must be separable.
    assert!(nearest_centroid_accuracy(&x, &labels, 2) >= 0.95);

    let mut model = Model::build(
        4,
        vec![
            LayerDef::dense(4, Activation::Relu),
            LayerDef::dense(2, Activation::Sigmoid),
        ],
        7,
    )
    .unwrap();
    let y = data.one_hot(2).unwrap();
    let config = TrainConfig {
        loss: LossKind::BinaryCrossentropy,
        metric: MetricKind::Accuracy,
        optimizer: OptimizerKind::Adam,
        learning_rate: 0.01,
        epochs: 20,
        batch_size: 32,
        seed: 7,
    };
    let trace = train(&mut model, &x, &y, &config).unwrap();
    assert!(trace.final_metric() >= 0.9, "accuracy {}", trace.final_metric());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn softmax_rows_are_distributions(seed in any::<u64>(), rows in 1usize..6) {
        let model = Model::build(
            5,
            vec![LayerDef::dense(8, Activation::Tanh), LayerDef::dense(4, Activation::Softmax)],
            seed,
        ).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x: Vec<f64> = (0..rows * 5).map(|_| rng.random_range(-10.0..10.0)).collect();
        let out = model.forward(&Tensor::matrix(rows, 5, x).unwrap()).unwrap();
        for r in 0..rows {
            let row = out.row(r);
            prop_assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-9);
            prop_assert!(row.iter().all(|&p| p > 0.0 && p < 1.0));
        }
    }

    #[test]
    fn losses_are_non_negative(
        p in proptest::collection::vec(-3.0f64..3.0, 6),
        t in proptest::collection::vec(0.0f64..=1.0, 6),
    ) {
        let p = Tensor::matrix(2, 3, p).unwrap();
        let t = Tensor::matrix(2, 3, t).unwrap();
        for kind in [LossKind::Mse, LossKind::BinaryCrossentropy, LossKind::CategoricalCrossentropy] {
            prop_assert!(mockcheck::engine::compute_loss(kind, &p, &t).unwrap() >= 0.0);
        }
    }

    #[test]
    fn building_either_composes_or_fails_early(
        input_dim in 1usize..6,
        kernel in 1usize..6,
        with_flatten in any::<bool>(),
    ) {
        let mut layers = vec![LayerDef::conv1d(2, kernel, Activation::Relu)];
        if with_flatten {
            layers.push(LayerDef::Flatten);
        }
        layers.push(LayerDef::dense(1, Activation::Linear));
        let built = Model::build(input_dim, layers, 0);
        prop_assert_eq!(built.is_ok(), kernel <= input_dim && with_flatten);
        if let Ok(model) = built {
            let out = model.forward(&Tensor::zeros(vec![2, input_dim])).unwrap();
            prop_assert_eq!(out.shape(), &[2, 1]);
        }
    }
}
