use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::spec::{DataInterface, DataKind, Dataset, TaskType};

/// Rows generated per feature for regression.
pub const REGRESSION_ROWS_PER_FEATURE: usize = 10;
/// Rows generated per class for classification.
pub const ROWS_PER_CLASS: usize = 100;
/// Closest pair of class centres is this many `class_sep` units apart.
pub const CENTROID_GAP: f64 = 2.5;

pub const LABEL_COLUMN: &str = "label";

fn default_class_sep() -> f64 {
    2.0
}

fn default_noise_fraction() -> f64 {
    0.1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MockDataConfig {
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_class_sep")]
    pub class_sep: f64,
    /// Regression noise standard deviation as a fraction of the signal's.
    #[serde(default = "default_noise_fraction")]
    pub noise_fraction: f64,
}

impl MockDataConfig {
    pub fn new(seed: u64) -> Self {
        MockDataConfig {
            seed,
            class_sep: default_class_sep(),
            noise_fraction: default_noise_fraction(),
        }
    }
}

impl Default for MockDataConfig {
    fn default() -> Self {
        MockDataConfig::new(0)
    }
}

/// Number of rows [`generate_mock_data`] produces for an interface.
pub fn mock_row_count(data_interface: &DataInterface) -> usize {
    match data_interface.task_type {
        TaskType::Regression => REGRESSION_ROWS_PER_FEATURE * data_interface.num_features,
        _ => ROWS_PER_CLASS * data_interface.num_classes,
    }
}

fn feature_names(n: usize) -> Vec<String> {
    (0..n).map(|i| format!("f{i}")).collect()
}

fn mean_std(values: &[f64]) -> Option<(f64, f64)> {
    let present: Vec<f64> = values.iter().copied().filter(|v| !v.is_nan()).collect();
    if present.is_empty() {
        return None;
    }
    let n = present.len() as f64;
    let mean = present.iter().sum::<f64>() / n;
    let var = present.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    Some((mean, var.sqrt()))
}

/// Population z-score; a constant column maps to zeros. NaN stays NaN.
fn standardize_column(values: &[f64]) -> Vec<f64> {
    match mean_std(values) {
        Some((mean, std)) if std > 0.0 => values.iter().map(|v| (v - mean) / std).collect(),
        Some(_) => values.iter().map(|v| if v.is_nan() { *v } else { 0.0 }).collect(),
        None => values.to_vec(),
    }
}

/// Rescales every numeric feature column to mean 0 and standard deviation 1.
/// Labels and non-numeric columns are left as they are.
pub fn standardize(dataset: &Dataset) -> Result<Dataset> {
    let updates = dataset
        .profiles()
        .iter()
        .enumerate()
        .filter(|(_, p)| p.kind == DataKind::Numeric)
        .map(|(i, _)| (i, standardize_column(&dataset.feature_column(i))))
        .collect();
    dataset.with_columns_replaced(updates)
}

/// Class centres: spread-out unit directions under a seeded signed axis
/// permutation, scaled so the closest pair sits `CENTROID_GAP * class_sep`
/// apart.
///
/// Up to `2 * features` classes take the ±axis directions; more classes are
/// placed on a regular polygon in the first two axes (or evenly along the
/// line for a single feature).
fn class_centroids(classes: usize, features: usize, class_sep: f64, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    let mut dirs: Vec<Vec<f64>> = if classes <= 2 * features {
        (0..classes)
            .map(|c| {
                let mut v = vec![0.0; features];
                v[c / 2] = if c % 2 == 0 { 1.0 } else { -1.0 };
                v
            })
            .collect()
    } else if features == 1 {
        let mid = (classes - 1) as f64 / 2.0;
        (0..classes).map(|c| vec![c as f64 - mid]).collect()
    } else {
        (0..classes)
            .map(|c| {
                let angle = 2.0 * std::f64::consts::PI * c as f64 / classes as f64;
                let mut v = vec![0.0; features];
                v[0] = angle.cos();
                v[1] = angle.sin();
                v
            })
            .collect()
    };

    let mut axes: Vec<usize> = (0..features).collect();
    axes.shuffle(rng);
    let signs: Vec<f64> = (0..features)
        .map(|_| if rng.random_bool(0.5) { 1.0 } else { -1.0 })
        .collect();
    for d in &mut dirs {
        let mut moved = vec![0.0; features];
        for (i, &a) in axes.iter().enumerate() {
            moved[a] = d[i] * signs[a];
        }
        *d = moved;
    }

    let mut min_gap = f64::INFINITY;
    for i in 0..classes {
        for j in i + 1..classes {
            let gap: f64 = dirs[i]
                .iter()
                .zip(&dirs[j])
                .map(|(a, b)| (a - b).powi(2))
                .sum::<f64>()
                .sqrt();
            min_gap = min_gap.min(gap);
        }
    }
    let scale = CENTROID_GAP * class_sep / min_gap;
    dirs.into_iter()
        .map(|d| d.into_iter().map(|v| v * scale).collect())
        .collect()
}

/// Generates clean, balanced, standardized mock data for an interface.
///
/// Regression: `10 * num_features` rows with `y = Xw + noise`, where `w` is
/// standard normal and the noise has `noise_fraction` of the signal's standard
/// deviation; `y` is standardized as well.
///
/// Classification: `100` rows per class drawn from unit-covariance Gaussians
/// around separated class centres. Labels are class ids `0..num_classes`.
pub fn generate_mock_data(data_interface: &DataInterface, config: &MockDataConfig) -> Result<Dataset> {
    data_interface.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let f = data_interface.num_features;
    let rows = mock_row_count(data_interface);
    let mut columns = vec![Vec::with_capacity(rows); f];
    let labels: Vec<f64> = match data_interface.task_type {
        TaskType::Regression => {
            for _ in 0..rows {
                for col in columns.iter_mut() {
                    col.push(rng.sample::<f64, _>(StandardNormal));
                }
            }
            let w: Vec<f64> = (0..f).map(|_| rng.sample(StandardNormal)).collect();
            let signal: Vec<f64> = (0..rows)
                .map(|r| columns.iter().zip(&w).map(|(c, wj)| c[r] * wj).sum())
                .collect();
            let noise_std = config.noise_fraction * mean_std(&signal).map_or(0.0, |(_, s)| s);
            let y: Vec<f64> = signal
                .iter()
                .map(|s| s + noise_std * rng.sample::<f64, _>(StandardNormal))
                .collect();
            standardize_column(&y)
        }
        _ => {
            let classes = data_interface.num_classes;
            let centroids = class_centroids(classes, f, config.class_sep, &mut rng);
            let mut labels = Vec::with_capacity(rows);
            for (c, centre) in centroids.iter().enumerate() {
                for _ in 0..ROWS_PER_CLASS {
                    for (col, mu) in columns.iter_mut().zip(centre) {
                        col.push(mu + rng.sample::<f64, _>(StandardNormal));
                    }
                    labels.push(c as f64);
                }
            }
            labels
        }
    };
    let columns: Vec<Vec<f64>> = columns.iter().map(|c| standardize_column(c)).collect();
    Dataset::from_numeric(feature_names(f), &columns, LABEL_COLUMN.to_string(), labels)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn di(task_type: TaskType, num_features: usize, num_classes: usize) -> DataInterface {
        DataInterface {
            num_features,
            data_kind: DataKind::Numeric,
            task_type,
            num_classes,
        }
    }

    #[test]
    fn regression_sizing() {
        let ds = generate_mock_data(&di(TaskType::Regression, 7, 1), &MockDataConfig::new(1)).unwrap();
        assert_eq!(ds.num_rows(), 70);
        assert_eq!(ds.num_features(), 7);
    }

    #[test]
    fn multiclass_sizing_is_balanced() {
        let ds = generate_mock_data(&di(TaskType::MulticlassClassification, 4, 3), &MockDataConfig::new(1))
            .unwrap();
        assert_eq!(ds.num_rows(), 300);
        let labels = ds.class_labels().unwrap();
        for c in 0..3 {
            assert_eq!(labels.iter().filter(|&&l| l == c).count(), 100);
        }
    }

    #[test]
    fn features_are_standardized() {
        let ds = generate_mock_data(&di(TaskType::BinaryClassification, 5, 2), &MockDataConfig::new(3))
            .unwrap();
        for p in ds.profiles() {
            assert!(p.mean.unwrap().abs() < 1e-9);
            assert!((p.std.unwrap() - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn standardize_examples() {
        let ds = Dataset::from_numeric(
            vec!["a".into(), "k".into()],
            &[vec![0.0, 10.0], vec![4.0, 4.0]],
            "y".into(),
            vec![0.0, 1.0],
        )
        .unwrap();
        let s = standardize(&ds).unwrap();
        assert_eq!(s.feature_column(0), vec![-1.0, 1.0]);
        assert_eq!(s.feature_column(1), vec![0.0, 0.0]);
        assert!(s.profiles()[1].zero_variance);
        assert_eq!(s.labels(), ds.labels());
        let twice = standardize(&s).unwrap();
        for (a, b) in twice.feature_column(0).iter().zip(s.feature_column(0)) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn centroids_keep_minimum_gap() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for (classes, features) in [(2, 1), (3, 1), (3, 2), (5, 2), (5, 3), (4, 10)] {
            let c = class_centroids(classes, features, 2.0, &mut rng);
            let mut min_gap = f64::INFINITY;
            for i in 0..classes {
                for j in i + 1..classes {
                    let d: f64 = c[i].iter().zip(&c[j]).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
                    min_gap = min_gap.min(d);
                }
            }
            assert!((min_gap - 5.0).abs() < 1e-9, "{classes}x{features}: {min_gap}");
        }
    }
}
