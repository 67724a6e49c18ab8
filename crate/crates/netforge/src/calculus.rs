//! Combinators over layer lists: composition, parallelization, affine and
//! scalar transforms, the ReLU identity block, fan-in/fan-out, sums,
//! weighted block sums, and the skip-connection combinator.
//!
//! Every combinator is a pure function returning a fresh network whose
//! realization satisfies an exact algebraic identity; the tests in this
//! module and in `tests/` pin each identity against straight-line oracles.

use crate::matrix::Matrix;
use crate::network::{Layer, Network, NetworkError};
use crate::scalar::Scalar;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum CalculusError {
    #[error("composition needs input dim {outer_in} of the outer net to equal output dim {inner_out} of the inner net")]
    ComposeShape { outer_in: usize, inner_out: usize },
    #[error("operation needs a non-empty list of networks")]
    EmptyList,
    #[error("all networks must share depth: got {got} at position {index}, expected {expected}")]
    DepthMismatch { index: usize, expected: usize, got: usize },
    #[error("all networks must share input dim {expected}: got {got} at position {index}")]
    InputMismatch { index: usize, expected: usize, got: usize },
    #[error("all networks must share output dim {expected}: got {got} at position {index}")]
    OutputMismatch { index: usize, expected: usize, got: usize },
    #[error("all networks must share dims {expected}: got {got} at position {index}")]
    DimsMismatch { index: usize, expected: String, got: String },
    #[error("weight list length {weights} must match network list length {nets}")]
    WeightCount { weights: usize, nets: usize },
    #[error("identity block must have dims (d, i, d); got {got}")]
    IdentityShape { got: String },
    #[error("identity block width violates 2 <= i <= 2d: i = {width}, d = {dim}")]
    IdentityWidth { width: usize, dim: usize },
    #[error("skip operand {index} must map R^{dim} to itself; got {in_dim} -> {out_dim}")]
    SkipEndpoints { index: usize, dim: usize, in_dim: usize, out_dim: usize },
    #[error("skip needs last hidden width of the inner net <= last hidden width of the increment net + identity width: {inner_hidden} > {increment_hidden} + {identity_width}")]
    SkipHiddenWidth { inner_hidden: usize, increment_hidden: usize, identity_width: usize },
    #[error(transparent)]
    Network(#[from] NetworkError),
}

/// `outer ∘ inner`: realization composes, depths add minus one. The merge
/// at the junction multiplies the outer first layer into the inner last
/// layer; the four depth cases keep parameter counts minimal.
pub fn compose<F: Scalar>(
    outer: &Network<F>,
    inner: &Network<F>,
) -> Result<Network<F>, CalculusError> {
    if outer.input_dim() != inner.output_dim() {
        return Err(CalculusError::ComposeShape {
            outer_in: outer.input_dim(),
            inner_out: inner.output_dim(),
        });
    }
    let ol = outer.layers();
    let il = inner.layers();
    let junction = {
        let w1 = &ol[0].weight;
        let inner_last = &il[il.len() - 1];
        let weight = w1.matmul(&inner_last.weight);
        let mut bias = w1.matvec(&inner_last.bias);
        for (b, b1) in bias.iter_mut().zip(ol[0].bias.iter()) {
            *b = *b + *b1;
        }
        Layer::new(weight, bias)
    };
    let layers = match (outer.depth() > 1, inner.depth() > 1) {
        (true, true) => {
            let mut layers: Vec<Layer<F>> = il[..il.len() - 1].to_vec();
            layers.push(junction);
            layers.extend_from_slice(&ol[1..]);
            layers
        }
        (true, false) => {
            let mut layers = vec![junction];
            layers.extend_from_slice(&ol[1..]);
            layers
        }
        (false, true) => {
            let mut layers: Vec<Layer<F>> = il[..il.len() - 1].to_vec();
            layers.push(junction);
            layers
        }
        (false, false) => vec![junction],
    };
    Ok(Network::new(layers)?)
}

/// Block-diagonal stack of equal-depth networks acting on the
/// concatenated input.
pub fn parallelize<F: Scalar>(nets: &[Network<F>]) -> Result<Network<F>, CalculusError> {
    if nets.is_empty() {
        return Err(CalculusError::EmptyList);
    }
    let depth = nets[0].depth();
    for (i, n) in nets.iter().enumerate() {
        if n.depth() != depth {
            return Err(CalculusError::DepthMismatch {
                index: i,
                expected: depth,
                got: n.depth(),
            });
        }
    }
    let mut layers = Vec::with_capacity(depth);
    for k in 0..depth {
        let blocks: Vec<&Matrix<F>> = nets.iter().map(|n| &n.layers()[k].weight).collect();
        let weight = Matrix::block_diag(&blocks);
        let mut bias = Vec::with_capacity(weight.rows());
        for n in nets {
            bias.extend_from_slice(&n.layers()[k].bias);
        }
        layers.push(Layer::new(weight, bias));
    }
    Ok(Network::new(layers)?)
}

/// Shift network: single layer `(I_n, B)` realizing `x ↦ x + B`.
pub fn bias_net<F: Scalar>(shift: &[F]) -> Network<F> {
    assert!(!shift.is_empty(), "bias_net needs n >= 1");
    Network::single(Matrix::identity(shift.len()), shift.to_vec())
}

/// Linear network: single layer `(W, 0)` realizing `x ↦ W x`.
pub fn matrix_net<F: Scalar>(weight: Matrix<F>) -> Network<F> {
    let rows = weight.rows();
    Network::single(weight, vec![F::zero(); rows])
}

/// `λ ⊛ Φ`: scales the realization, keeps the dims. The composition with
/// `λ·I` merges into the last layer, so λ = 0 still emits a full zero
/// layer rather than a collapsed special case.
pub fn scalar_mul<F: Scalar>(lambda: F, net: &Network<F>) -> Network<F> {
    let scale = matrix_net(Matrix::scaled_identity(net.output_dim(), lambda));
    compose(&scale, net).expect("scaling matrix always matches the output dim")
}

/// ReLU representation of the identity on `R^d`: dims `(d, 2d, d)`,
/// realization exactly `x` via `relu(x) - relu(-x) = x` per coordinate.
pub fn relu_identity<F: Scalar>(d: usize) -> Network<F> {
    assert!(d >= 1, "relu_identity needs d >= 1");
    let one = F::one();
    let block = Network::new(vec![
        Layer::new(Matrix::from_vec(2, 1, vec![one, -one]), vec![F::zero(); 2]),
        Layer::new(Matrix::from_vec(1, 2, vec![one, -one]), vec![F::zero()]),
    ])
    .expect("two fixed layers chain");
    let blocks = vec![block; d];
    parallelize(&blocks).expect("equal-depth blocks")
}

/// Fan-in: single layer `[I_m I_m … I_m]` summing `n` stacked `m`-blocks.
pub fn sum_fanin<F: Scalar>(m: usize, n: usize) -> Network<F> {
    assert!(m >= 1 && n >= 1, "sum_fanin needs m, n >= 1");
    let eye = Matrix::identity(m);
    let blocks: Vec<&Matrix<F>> = (0..n).map(|_| &eye).collect();
    matrix_net(Matrix::hconcat(&blocks))
}

/// Fan-out: single layer `[I_m I_m … I_m]^T` replicating the input `n` times.
pub fn fanout<F: Scalar>(m: usize, n: usize) -> Network<F> {
    assert!(m >= 1 && n >= 1, "fanout needs m, n >= 1");
    let eye = Matrix::identity(m);
    let blocks: Vec<&Matrix<F>> = (0..n).map(|_| &eye).collect();
    matrix_net(Matrix::vconcat(&blocks))
}

fn check_same_shape<F: Scalar>(nets: &[Network<F>]) -> Result<(), CalculusError> {
    if nets.is_empty() {
        return Err(CalculusError::EmptyList);
    }
    let (depth, input, output) = (nets[0].depth(), nets[0].input_dim(), nets[0].output_dim());
    for (i, n) in nets.iter().enumerate() {
        if n.depth() != depth {
            return Err(CalculusError::DepthMismatch { index: i, expected: depth, got: n.depth() });
        }
        if n.input_dim() != input {
            return Err(CalculusError::InputMismatch {
                index: i,
                expected: input,
                got: n.input_dim(),
            });
        }
        if n.output_dim() != output {
            return Err(CalculusError::OutputMismatch {
                index: i,
                expected: output,
                got: n.output_dim(),
            });
        }
    }
    Ok(())
}

/// `⊕_k Φ_k`: pointwise sum of realizations, built as
/// fan-in ∘ parallelization ∘ fan-out.
pub fn same_length_sum<F: Scalar>(nets: &[Network<F>]) -> Result<Network<F>, CalculusError> {
    check_same_shape(nets)?;
    let n = nets.len();
    let stacked = parallelize(nets)?;
    let spread = fanout(nets[0].input_dim(), n);
    let collect = sum_fanin(nets[0].output_dim(), n);
    compose(&collect, &compose(&stacked, &spread)?)
}

/// Weighted sum over disjoint input blocks: the result consumes the
/// concatenation `(x_1, …, x_n)` and realizes `Σ h_k · Φ_k(x_k)`.
pub fn weighted_block_sum<F: Scalar>(
    weights: &[F],
    nets: &[Network<F>],
) -> Result<Network<F>, CalculusError> {
    if nets.is_empty() {
        return Err(CalculusError::EmptyList);
    }
    if weights.len() != nets.len() {
        return Err(CalculusError::WeightCount { weights: weights.len(), nets: nets.len() });
    }
    let dims0 = nets[0].dims();
    for (i, net) in nets.iter().enumerate() {
        if net.dims() != dims0 {
            return Err(CalculusError::DimsMismatch {
                index: i,
                expected: dims0.to_string(),
                got: net.dims().to_string(),
            });
        }
    }
    let n = nets.len();
    let in_dim = nets[0].input_dim();
    let mut summands = Vec::with_capacity(n);
    for (k, (h, net)) in weights.iter().zip(nets.iter()).enumerate() {
        // Block selector A_k picks the k-th m-block out of the nm input.
        let mut selector = Matrix::zeros(in_dim, n * in_dim);
        for i in 0..in_dim {
            selector[(i, k * in_dim + i)] = F::one();
        }
        let picked = compose(net, &matrix_net(selector))?;
        summands.push(scalar_mul(*h, &picked));
    }
    same_length_sum(&summands)
}

/// Skip connection: realizes `x ↦ Φ2(x) + Φ1(Φ2(x))` for nets mapping
/// `R^d` to itself, given an identity block `idnet` with dims `(d, i, d)`
/// whose realization is exactly the identity under the activation in use.
///
/// With `depth(Φ1) = 1` the increment merges into the last layer of `Φ2`
/// and the dims are exactly those of `Φ2`. With `depth(Φ1) >= 2` the
/// layers of `Φ1` are appended, each widened by `i` carry channels that
/// transport `Φ2(x)` forward through the identity block's two stages.
pub fn skip_compose<F: Scalar>(
    increment: &Network<F>,
    inner: &Network<F>,
    idnet: &Network<F>,
) -> Result<Network<F>, CalculusError> {
    let d = inner.output_dim();
    for (index, net) in [increment, inner].into_iter().enumerate() {
        if net.input_dim() != d || net.output_dim() != d {
            return Err(CalculusError::SkipEndpoints {
                index,
                dim: d,
                in_dim: net.input_dim(),
                out_dim: net.output_dim(),
            });
        }
    }
    if idnet.depth() != 2 || idnet.input_dim() != d || idnet.output_dim() != d {
        return Err(CalculusError::IdentityShape { got: idnet.dims().to_string() });
    }
    let carry = idnet.dim_at(1);
    if carry < 2 || carry > 2 * d {
        return Err(CalculusError::IdentityWidth { width: carry, dim: d });
    }
    let inner_hidden = inner.dim_at(inner.depth() - 1);
    let increment_hidden = increment.dim_at(increment.depth() - 1);
    if inner_hidden > increment_hidden + carry {
        return Err(CalculusError::SkipHiddenWidth {
            inner_hidden,
            increment_hidden,
            identity_width: carry,
        });
    }

    let il = inner.layers();
    if increment.depth() == 1 {
        // y + W y + B = (I + W) y + B merged into the last layer of Φ2.
        let w1 = &increment.layers()[0].weight;
        let mut lift = Matrix::identity(d);
        for i in 0..d {
            for j in 0..d {
                lift[(i, j)] = lift[(i, j)] + w1[(i, j)];
            }
        }
        let last = &il[il.len() - 1];
        let weight = lift.matmul(&last.weight);
        let mut bias = lift.matvec(&last.bias);
        for (b, b1) in bias.iter_mut().zip(increment.layers()[0].bias.iter()) {
            *b = *b + *b1;
        }
        let mut layers: Vec<Layer<F>> = il[..il.len() - 1].to_vec();
        layers.push(Layer::new(weight, bias));
        return Ok(Network::new(layers)?);
    }

    let id_in = &idnet.layers()[0];
    let id_out = &idnet.layers()[1];
    let inc = increment.layers();
    let inner_last = &il[il.len() - 1];

    let mut layers: Vec<Layer<F>> = il[..il.len() - 1].to_vec();

    // Junction: feed Φ2's affine output both into Φ1's first stage and
    // into the identity block's hidden stage.
    {
        let top_w = inc[0].weight.matmul(&inner_last.weight);
        let mut top_b = inc[0].weight.matvec(&inner_last.bias);
        for (b, b1) in top_b.iter_mut().zip(inc[0].bias.iter()) {
            *b = *b + *b1;
        }
        let carry_w = id_in.weight.matmul(&inner_last.weight);
        let mut carry_b = id_in.weight.matvec(&inner_last.bias);
        for (b, b1) in carry_b.iter_mut().zip(id_in.bias.iter()) {
            *b = *b + *b1;
        }
        let weight = Matrix::vconcat(&[&top_w, &carry_w]);
        let mut bias = top_b;
        bias.extend_from_slice(&carry_b);
        layers.push(Layer::new(weight, bias));
    }

    // Middle stages: Φ1's hidden layers next to a carry refresh
    // u ↦ a(V1(V2 u + C2) + C1), which keeps V2 u + C2 = Φ2(x).
    let refresh_w = id_in.weight.matmul(&id_out.weight);
    let refresh_b = {
        let mut b = id_in.weight.matvec(&id_out.bias);
        for (v, c) in b.iter_mut().zip(id_in.bias.iter()) {
            *v = *v + *c;
        }
        b
    };
    for layer in &inc[1..inc.len() - 1] {
        let weight = Matrix::block_diag(&[&layer.weight, &refresh_w]);
        let mut bias = layer.bias.clone();
        bias.extend_from_slice(&refresh_b);
        layers.push(Layer::new(weight, bias));
    }

    // Output: Φ1's last layer plus the decoded carry V2 u + C2.
    {
        let inc_last = &inc[inc.len() - 1];
        let weight = Matrix::hconcat(&[&inc_last.weight, &id_out.weight]);
        let mut bias = inc_last.bias.clone();
        for (b, c) in bias.iter_mut().zip(id_out.bias.iter()) {
            *b = *b + *c;
        }
        layers.push(Layer::new(weight, bias));
    }

    Ok(Network::new(layers)?)
}

/// `outer ∘ idnet ∘ inner`: composition routed through an identity block,
/// which caps the parameter count by `2 (P(outer) + P(inner))` when the
/// block is `relu_identity`.
pub fn compose_via_identity<F: Scalar>(
    outer: &Network<F>,
    inner: &Network<F>,
    idnet: &Network<F>,
) -> Result<Network<F>, CalculusError> {
    compose(outer, &compose(idnet, inner)?)
}
