//! Feedforward networks as explicit layer lists.
//!
//! A network is an ordered list of `(weight, bias)` pairs; layer `k` maps
//! a vector of length `l_{k-1}` to one of length `l_k`. Realization applies
//! the activation componentwise after every layer except the last, which
//! stays purely affine. Networks are immutable; all combinators in
//! [`crate::calculus`] return fresh values.

use crate::matrix::Matrix;
use crate::scalar::Scalar;
use std::fmt;
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum NetworkError {
    #[error("a network needs at least one layer")]
    Empty,
    #[error("layer {layer}: bias length {bias} does not match weight rows {rows}")]
    BiasShape { layer: usize, rows: usize, bias: usize },
    #[error("layer {layer}: expects {expected} inputs but previous layer produces {got}")]
    LayerChain { layer: usize, expected: usize, got: usize },
    #[error("input length {got} does not match input width {expected}")]
    InputLength { expected: usize, got: usize },
}

/// One affine stage: `x ↦ W x + b`.
#[derive(Debug, Clone, PartialEq)]
pub struct Layer<F> {
    pub weight: Matrix<F>,
    pub bias: Vec<F>,
}

impl<F: Scalar> Layer<F> {
    pub fn new(weight: Matrix<F>, bias: Vec<F>) -> Self {
        assert_eq!(weight.rows(), bias.len(), "bias length must equal weight rows");
        Layer { weight, bias }
    }

    pub fn out_dim(&self) -> usize {
        self.weight.rows()
    }

    pub fn in_dim(&self) -> usize {
        self.weight.cols()
    }

    fn affine(&self, x: &[F], out: &mut Vec<F>) {
        out.clear();
        out.extend_from_slice(&self.bias);
        for (i, o) in out.iter_mut().enumerate() {
            let row = self.weight.row(i);
            let mut acc = F::zero();
            for (a, b) in row.iter().zip(x.iter()) {
                acc = acc + *a * *b;
            }
            *o = *o + acc;
        }
    }
}

/// Scalar nonlinearity applied componentwise between layers.
#[derive(Clone)]
pub enum Activation<F> {
    Relu,
    Identity,
    Custom(Arc<dyn Fn(F) -> F + Send + Sync>),
}

impl<F: Scalar> Activation<F> {
    #[inline]
    pub fn apply(&self, x: F) -> F {
        match self {
            // relu(x) = max{x, 0}
            Activation::Relu => x.max(F::zero()),
            Activation::Identity => x,
            Activation::Custom(f) => f(x),
        }
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            Activation::Relu => "relu",
            Activation::Identity => "identity",
            Activation::Custom(_) => "custom",
        }
    }
}

impl<F> fmt::Debug for Activation<F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Activation::Relu => write!(f, "Relu"),
            Activation::Identity => write!(f, "Identity"),
            Activation::Custom(_) => write!(f, "Custom(..)"),
        }
    }
}

/// Layer widths `(l_0, l_1, …, l_L)`; always at least two entries.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dims(pub Vec<usize>);

impl Dims {
    /// Number of layers `L`.
    pub fn depth(&self) -> usize {
        self.0.len() - 1
    }

    /// Parameter count from widths alone: `Σ l_k (l_{k-1} + 1)`.
    pub fn param_count(&self) -> usize {
        self.0.windows(2).map(|w| w[1] * (w[0] + 1)).sum()
    }
}

impl fmt::Display for Dims {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, l) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{l}")?;
        }
        write!(f, ")")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Network<F> {
    layers: Vec<Layer<F>>,
}

impl<F: Scalar> Network<F> {
    /// Validates the layer chain eagerly; no shape checks happen later
    /// except on evaluation inputs.
    pub fn new(layers: Vec<Layer<F>>) -> Result<Self, NetworkError> {
        if layers.is_empty() {
            return Err(NetworkError::Empty);
        }
        for (k, layer) in layers.iter().enumerate() {
            if layer.weight.rows() != layer.bias.len() {
                return Err(NetworkError::BiasShape {
                    layer: k,
                    rows: layer.weight.rows(),
                    bias: layer.bias.len(),
                });
            }
            if k > 0 {
                let prev = layers[k - 1].out_dim();
                if layer.in_dim() != prev {
                    return Err(NetworkError::LayerChain {
                        layer: k,
                        expected: layer.in_dim(),
                        got: prev,
                    });
                }
            }
        }
        Ok(Network { layers })
    }

    /// Single-layer network from an affine pair.
    pub fn single(weight: Matrix<F>, bias: Vec<F>) -> Self {
        Network::new(vec![Layer::new(weight, bias)]).expect("single layer is always valid")
    }

    pub fn layers(&self) -> &[Layer<F>] {
        &self.layers
    }

    pub fn into_layers(self) -> Vec<Layer<F>> {
        self.layers
    }

    /// Depth `L` (number of affine layers).
    pub fn depth(&self) -> usize {
        self.layers.len()
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].in_dim()
    }

    pub fn output_dim(&self) -> usize {
        self.layers[self.layers.len() - 1].out_dim()
    }

    pub fn hidden_count(&self) -> usize {
        self.layers.len() - 1
    }

    pub fn dims(&self) -> Dims {
        let mut d = Vec::with_capacity(self.layers.len() + 1);
        d.push(self.input_dim());
        d.extend(self.layers.iter().map(Layer::out_dim));
        Dims(d)
    }

    /// Width at level `n`; `0` for levels beyond the last layer.
    pub fn dim_at(&self, n: usize) -> usize {
        if n == 0 {
            self.input_dim()
        } else if n <= self.depth() {
            self.layers[n - 1].out_dim()
        } else {
            0
        }
    }

    /// Total number of stored scalars: `Σ l_k (l_{k-1} + 1)`.
    pub fn param_count(&self) -> usize {
        self.layers
            .iter()
            .map(|l| l.out_dim() * (l.in_dim() + 1))
            .sum()
    }

    /// Forward pass: activation after every layer except the last.
    pub fn realize(&self, act: &Activation<F>, x: &[F]) -> Result<Vec<F>, NetworkError> {
        if x.len() != self.input_dim() {
            return Err(NetworkError::InputLength {
                expected: self.input_dim(),
                got: x.len(),
            });
        }
        let mut cur = x.to_vec();
        let mut next = Vec::new();
        let last = self.layers.len() - 1;
        for (k, layer) in self.layers.iter().enumerate() {
            layer.affine(&cur, &mut next);
            if k < last {
                for v in next.iter_mut() {
                    *v = act.apply(*v);
                }
            }
            std::mem::swap(&mut cur, &mut next);
        }
        Ok(cur)
    }

    /// Forward pass over many points; one allocation set per call.
    pub fn realize_batch(
        &self,
        act: &Activation<F>,
        points: &[Vec<F>],
    ) -> Result<Vec<Vec<F>>, NetworkError> {
        points.iter().map(|x| self.realize(act, x)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calculus::{matrix_net, relu_identity};

    fn net_2_5_1() -> Network<f64> {
        let layers = vec![
            Layer::new(Matrix::zeros(5, 2), vec![0.0; 5]),
            Layer::new(Matrix::zeros(1, 5), vec![0.0]),
        ];
        Network::new(layers).unwrap()
    }

    #[test]
    fn param_count_single_1x1() {
        let net = Network::single(Matrix::<f64>::zeros(1, 1), vec![0.0]);
        assert_eq!(net.param_count(), 2);
    }

    #[test]
    fn param_count_relu_identity_3() {
        // 4d^2 + 3d at d = 3
        assert_eq!(relu_identity::<f64>(3).param_count(), 45);
    }

    #[test]
    fn param_count_dims_2_5_1() {
        // 5·3 + 1·6
        assert_eq!(net_2_5_1().param_count(), 21);
        assert_eq!(net_2_5_1().dims().param_count(), 21);
    }

    #[test]
    fn param_count_equals_stored_scalars() {
        let net = relu_identity::<f64>(4);
        let stored: usize = net
            .layers()
            .iter()
            .map(|l| l.weight.data().len() + l.bias.len())
            .sum();
        assert_eq!(net.param_count(), stored);
    }

    #[test]
    fn structure_accessors() {
        let id2 = relu_identity::<f64>(2);
        assert_eq!(id2.depth(), 2);
        assert_eq!(id2.dims(), Dims(vec![2, 4, 2]));

        let flat = Network::single(Matrix::<f64>::identity(3), vec![0.0; 3]);
        assert_eq!(flat.dim_at(5), 0);

        let deep = Network::new(vec![
            Layer::new(Matrix::<f64>::zeros(7, 4), vec![0.0; 7]),
            Layer::new(Matrix::zeros(7, 7), vec![0.0; 7]),
            Layer::new(Matrix::zeros(1, 7), vec![0.0]),
        ])
        .unwrap();
        assert_eq!(deep.input_dim(), 4);
        assert_eq!(deep.output_dim(), 1);
        assert_eq!(deep.hidden_count(), 2);
        assert_eq!(deep.dim_at(0), deep.input_dim());
        assert_eq!(deep.dim_at(deep.depth()), deep.output_dim());
    }

    #[test]
    fn realize_relu_identity_echoes_input() {
        let id2 = relu_identity::<f64>(2);
        let y = id2.realize(&Activation::Relu, &[0.5, -2.0]).unwrap();
        assert_eq!(y, vec![0.5, -2.0]);
    }

    #[test]
    fn realize_matrix_net_is_matvec() {
        let w = Matrix::from_vec(2, 2, vec![1.0, 2.0, 3.0, 4.0]);
        let net = matrix_net(w.clone());
        let y = net.realize(&Activation::Relu, &[1.0, 1.0]).unwrap();
        assert_eq!(y, w.matvec(&[1.0, 1.0]));
    }

    #[test]
    fn realize_checks_input_length() {
        let err = net_2_5_1().realize(&Activation::Relu, &[1.0]).unwrap_err();
        assert_eq!(err, NetworkError::InputLength { expected: 2, got: 1 });
    }

    #[test]
    fn construction_rejects_broken_chain() {
        let layers = vec![
            Layer::new(Matrix::<f64>::zeros(3, 2), vec![0.0; 3]),
            Layer::new(Matrix::zeros(1, 4), vec![0.0]),
        ];
        assert!(matches!(
            Network::new(layers),
            Err(NetworkError::LayerChain { layer: 1, expected: 4, got: 3 })
        ));
    }

    #[test]
    fn construction_rejects_empty() {
        assert_eq!(Network::<f64>::new(vec![]).unwrap_err(), NetworkError::Empty);
    }
}
