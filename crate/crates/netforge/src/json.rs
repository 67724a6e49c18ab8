//! File formats.
//!
//! Networks: `{"activation": "relu", "layers": [{"rows", "cols",
//! "weights" (row-major), "bias"}, …]}`. Serialization goes through
//! `serde_json`, whose float printing is shortest-round-trip, so every
//! finite double survives a save/load cycle bit for bit.
//!
//! Problems: `{"id", "d", "T", "drift", "payoff", "diffusion_scale"}`
//! where drift is `"zero"`, `"neg_identity"`, or `{"net": …}` and payoff
//! is `"sum_abs"` or `{"net": …}`; the diffusion matrix is `scale · I`.

use crate::matrix::Matrix;
use crate::network::{Activation, Layer, Network};
use crate::scalar::Scalar;
use crate::sde::{Drift, Payoff, SdeProblem};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("layer {layer}: weights length {got} != rows*cols = {expected}")]
    WeightLength { layer: usize, expected: usize, got: usize },
    #[error("layer {layer}: bias length {got} != rows = {expected}")]
    BiasLength { layer: usize, expected: usize, got: usize },
    #[error("unsupported activation {0:?} (only \"relu\" and \"identity\" serialize)")]
    Activation(String),
    #[error("invalid network: {0}")]
    Network(#[from] crate::network::NetworkError),
    #[error("unknown problem id {0:?}")]
    ProblemId(String),
}

#[derive(Serialize, Deserialize)]
struct LayerDoc<F> {
    rows: usize,
    cols: usize,
    weights: Vec<F>,
    bias: Vec<F>,
}

#[derive(Serialize, Deserialize)]
struct NetworkDoc<F> {
    activation: String,
    layers: Vec<LayerDoc<F>>,
}

pub fn network_to_json<F>(net: &Network<F>, act: &Activation<F>) -> Result<String, FormatError>
where
    F: Scalar + Serialize,
{
    let name = match act {
        Activation::Relu => "relu",
        Activation::Identity => "identity",
        Activation::Custom(_) => return Err(FormatError::Activation("custom".into())),
    };
    let doc = NetworkDoc {
        activation: name.to_string(),
        layers: net
            .layers()
            .iter()
            .map(|l| LayerDoc {
                rows: l.weight.rows(),
                cols: l.weight.cols(),
                weights: l.weight.data().to_vec(),
                bias: l.bias.clone(),
            })
            .collect(),
    };
    Ok(serde_json::to_string(&doc)?)
}

pub fn network_from_json<F>(text: &str) -> Result<(Network<F>, Activation<F>), FormatError>
where
    F: Scalar + DeserializeOwned,
{
    let doc: NetworkDoc<F> = serde_json::from_str(text)?;
    let act = match doc.activation.as_str() {
        "relu" => Activation::Relu,
        "identity" => Activation::Identity,
        other => return Err(FormatError::Activation(other.to_string())),
    };
    let mut layers = Vec::with_capacity(doc.layers.len());
    for (k, l) in doc.layers.into_iter().enumerate() {
        if l.weights.len() != l.rows * l.cols {
            return Err(FormatError::WeightLength {
                layer: k,
                expected: l.rows * l.cols,
                got: l.weights.len(),
            });
        }
        if l.bias.len() != l.rows {
            return Err(FormatError::BiasLength { layer: k, expected: l.rows, got: l.bias.len() });
        }
        layers.push(Layer::new(Matrix::from_vec(l.rows, l.cols, l.weights), l.bias));
    }
    Ok((Network::new(layers)?, act))
}

pub fn save_network<F>(
    path: &std::path::Path,
    net: &Network<F>,
    act: &Activation<F>,
) -> Result<(), FormatError>
where
    F: Scalar + Serialize,
{
    std::fs::write(path, network_to_json(net, act)?)?;
    Ok(())
}

pub fn load_network<F>(path: &std::path::Path) -> Result<(Network<F>, Activation<F>), FormatError>
where
    F: Scalar + DeserializeOwned,
{
    network_from_json(&std::fs::read_to_string(path)?)
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum DriftDoc {
    Named(String),
    Net { net: NetworkDoc<f64> },
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum PayoffDoc {
    Named(String),
    Net { net: NetworkDoc<f64> },
}

#[derive(Serialize, Deserialize)]
struct ProblemDoc {
    id: String,
    d: usize,
    #[serde(rename = "T")]
    horizon: f64,
    drift: DriftDoc,
    payoff: PayoffDoc,
    diffusion_scale: f64,
}

pub fn problem_from_json(text: &str) -> Result<SdeProblem<f64>, FormatError> {
    let doc: ProblemDoc = serde_json::from_str(text)?;
    let drift = match doc.drift {
        DriftDoc::Named(name) => match name.as_str() {
            "zero" => Drift::Zero,
            "neg_identity" => Drift::NegIdentity,
            other => return Err(FormatError::ProblemId(format!("drift {other:?}"))),
        },
        DriftDoc::Net { net } => {
            let text = serde_json::to_string(&net)?;
            Drift::Net(network_from_json::<f64>(&text)?.0)
        }
    };
    let payoff = match doc.payoff {
        PayoffDoc::Named(name) => match name.as_str() {
            "sum_abs" => Payoff::SumAbs,
            other => return Err(FormatError::ProblemId(format!("payoff {other:?}"))),
        },
        PayoffDoc::Net { net } => {
            let text = serde_json::to_string(&net)?;
            Payoff::Net(network_from_json::<f64>(&text)?.0)
        }
    };
    let kappa = match &drift {
        Drift::Zero => 0.0,
        Drift::NegIdentity => 1.0,
        Drift::Net(_) => 1.0,
    };
    Ok(SdeProblem::new(
        doc.id,
        doc.d,
        doc.horizon,
        drift,
        payoff,
        Matrix::scaled_identity(doc.d, doc.diffusion_scale),
        kappa,
    ))
}

pub fn load_problem(path: &std::path::Path) -> Result<SdeProblem<f64>, FormatError> {
    problem_from_json(&std::fs::read_to_string(path)?)
}
