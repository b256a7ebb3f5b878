//! Versioned JSON model documents.
//!
//! ```json
//! {"format_version": 1, "kind": "tree_ensemble", "n_features": 2,
//!  "link": "identity", "aggregation": "mean",
//!  "trees": [{"feature": [0, 0, 0], "threshold": [0.5, 0.0, 0.0],
//!             "value": [0.5, 0.0, 1.0], "left": [1, -1, -1], "right": [2, -1, -1]}]}
//! ```
//!
//! Analytic models use `"kind": "analytic"` with a `"form"` object tagged by
//! `"type"` (`linear`, `separable`, `bilinear`, `tanh_field`,
//! `linear_combination`). Floats are written in shortest round-trip form.

use serde::{Deserialize, Serialize};

use super::{Aggregation, AnalyticForm, AnalyticModel, Link, Model, Polynomial, Tree, TreeEnsemble};
use crate::error::{Error, Result};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct Document {
    format_version: u32,
    #[serde(flatten)]
    model: ModelDoc,
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
enum ModelDoc {
    TreeEnsemble(EnsembleDoc),
    Analytic(AnalyticDoc),
}

#[derive(Serialize, Deserialize)]
struct EnsembleDoc {
    n_features: usize,
    link: Link,
    aggregation: Aggregation,
    trees: Vec<TreeDoc>,
}

#[derive(Serialize, Deserialize)]
struct TreeDoc {
    feature: Vec<i64>,
    threshold: Vec<f64>,
    value: Vec<f64>,
    left: Vec<i64>,
    right: Vec<i64>,
}

#[derive(Serialize, Deserialize)]
struct AnalyticDoc {
    n_features: usize,
    form: FormDoc,
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
enum FormDoc {
    Linear { weights: Vec<f64>, bias: f64 },
    Separable { terms: Vec<PolynomialDoc> },
    Bilinear { matrix: Vec<Vec<f64>> },
    TanhField { delta: f64, centerline: PolynomialDoc },
    LinearCombination { terms: Vec<TermDoc> },
}

#[derive(Serialize, Deserialize)]
struct PolynomialDoc {
    origin: f64,
    coefficients: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct TermDoc {
    coefficient: f64,
    model: ModelDoc,
}

/// Parse and validate a model document.
pub fn load_model(bytes: &[u8]) -> Result<Model> {
    let de = &mut serde_json::Deserializer::from_slice(bytes);
    let doc: Document = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        Error::schema(path, e.into_inner().to_string())
    })?;
    if doc.format_version != FORMAT_VERSION {
        return Err(Error::schema(
            "format_version",
            format!(
                "unsupported version {} (expected {FORMAT_VERSION})",
                doc.format_version
            ),
        ));
    }
    from_doc(doc.model, "")
}

/// Serialize a model. Reparametrized (feature-transformed) analytic models
/// wrap arbitrary code and cannot be saved.
pub fn save_model(model: &Model) -> Result<Vec<u8>> {
    let doc = Document {
        format_version: FORMAT_VERSION,
        model: to_doc(model)?,
    };
    serde_json::to_vec_pretty(&doc).map_err(|e| Error::InvalidInput(e.to_string()))
}

fn join(prefix: &str, field: &str) -> String {
    if prefix.is_empty() {
        field.to_string()
    } else {
        format!("{prefix}.{field}")
    }
}

fn index_vec(values: Vec<i64>, at: &str, allow_sentinel: bool) -> Result<Vec<i32>> {
    values
        .into_iter()
        .enumerate()
        .map(|(i, v)| {
            let lo = if allow_sentinel { -1 } else { 0 };
            if v < lo || v > i32::MAX as i64 {
                Err(Error::schema(format!("{at}[{i}]"), format!("invalid index {v}")))
            } else {
                Ok(v as i32)
            }
        })
        .collect()
}

fn from_doc(doc: ModelDoc, at: &str) -> Result<Model> {
    match doc {
        ModelDoc::TreeEnsemble(e) => {
            let mut trees = Vec::with_capacity(e.trees.len());
            for (t, td) in e.trees.into_iter().enumerate() {
                let tat = join(at, &format!("trees[{t}]"));
                let feature = index_vec(td.feature, &format!("{tat}.feature"), false)?
                    .into_iter()
                    .map(|v| v as usize)
                    .collect();
                let left = index_vec(td.left, &format!("{tat}.left"), true)?;
                let right = index_vec(td.right, &format!("{tat}.right"), true)?;
                let tree = Tree::from_parts(feature, td.threshold, td.value, left, right);
                tree.validate(&tat)?;
                trees.push(tree);
            }
            let ensemble = TreeEnsemble::from_parts(trees, e.n_features, e.link, e.aggregation);
            ensemble.validate().map_err(|err| match err {
                Error::Schema { path, message } => Error::Schema {
                    path: join(at, &path),
                    message,
                },
                other => other,
            })?;
            Ok(Model::Trees(ensemble))
        }
        ModelDoc::Analytic(a) => {
            let form_at = join(at, "form");
            let model = match a.form {
                FormDoc::Linear { weights, bias } => AnalyticModel::linear(weights, bias),
                FormDoc::Separable { terms } => AnalyticModel::separable(
                    terms
                        .into_iter()
                        .map(|p| Polynomial::new(p.origin, p.coefficients))
                        .collect(),
                ),
                FormDoc::Bilinear { matrix } => AnalyticModel::bilinear(matrix),
                FormDoc::TanhField { delta, centerline } => AnalyticModel::tanh_field(
                    delta,
                    Polynomial::new(centerline.origin, centerline.coefficients),
                ),
                FormDoc::LinearCombination { terms } => {
                    let mut subs = Vec::with_capacity(terms.len());
                    for (k, term) in terms.into_iter().enumerate() {
                        let sub = from_doc(term.model, &join(&form_at, &format!("terms[{k}].model")))?;
                        subs.push((term.coefficient, sub));
                    }
                    AnalyticModel::linear_combination(subs)
                }
            }
            .map_err(|e| match e {
                Error::Schema { .. } => e,
                other => Error::schema(form_at.clone(), other.to_string()),
            })?;
            if model.n_features() != a.n_features {
                return Err(Error::schema(
                    join(at, "n_features"),
                    format!(
                        "declared {} but the form has {} features",
                        a.n_features,
                        model.n_features()
                    ),
                ));
            }
            Ok(Model::Analytic(model))
        }
    }
}

fn poly_doc(p: &Polynomial) -> PolynomialDoc {
    PolynomialDoc {
        origin: p.origin,
        coefficients: p.coefficients.clone(),
    }
}

fn to_doc(model: &Model) -> Result<ModelDoc> {
    Ok(match model {
        Model::Trees(e) => ModelDoc::TreeEnsemble(EnsembleDoc {
            n_features: e.n_features(),
            link: e.link(),
            aggregation: e.aggregation(),
            trees: e
                .trees()
                .iter()
                .map(|t| {
                    let (feature, threshold, value, left, right) = t.arrays();
                    TreeDoc {
                        feature: feature.iter().map(|&f| f as i64).collect(),
                        threshold: threshold.to_vec(),
                        value: value.to_vec(),
                        left: left.iter().map(|&c| c as i64).collect(),
                        right: right.iter().map(|&c| c as i64).collect(),
                    }
                })
                .collect(),
        }),
        Model::Analytic(a) => ModelDoc::Analytic(AnalyticDoc {
            n_features: a.n_features(),
            form: match a.form() {
                AnalyticForm::Linear { weights, bias } => FormDoc::Linear {
                    weights: weights.clone(),
                    bias: *bias,
                },
                AnalyticForm::Separable { terms } => FormDoc::Separable {
                    terms: terms.iter().map(poly_doc).collect(),
                },
                AnalyticForm::Bilinear { matrix } => FormDoc::Bilinear {
                    matrix: matrix.clone(),
                },
                AnalyticForm::TanhField { delta, centerline } => FormDoc::TanhField {
                    delta: *delta,
                    centerline: poly_doc(centerline),
                },
                AnalyticForm::LinearCombination { terms } => FormDoc::LinearCombination {
                    terms: terms
                        .iter()
                        .map(|(c, m)| {
                            Ok(TermDoc {
                                coefficient: *c,
                                model: to_doc(m)?,
                            })
                        })
                        .collect::<Result<_>>()?,
                },
                AnalyticForm::Reparametrized { .. } => {
                    return Err(Error::Unsupported(
                        "saving a feature-transformed model".into(),
                    ))
                }
            },
        }),
    })
}
