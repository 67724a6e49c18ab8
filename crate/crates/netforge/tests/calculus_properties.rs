//! Property suites for the network combinators: structural laws hold
//! exactly, realization laws hold to tight floating-point tolerances,
//! and every combinator's output survives serialization bit for bit.

use netforge::calculus::{
    compose, fanout, parallelize, relu_identity, same_length_sum, scalar_mul, skip_compose,
    sum_fanin, weighted_block_sum,
};
use netforge::json::{network_from_json, network_to_json};
use netforge::matrix::Matrix;
use netforge::network::{Activation, Layer, Network};
use proptest::prelude::*;
use proptest::strategy::ValueTree;

fn dims_strategy(max_depth: usize, max_width: usize) -> impl Strategy<Value = Vec<usize>> {
    prop::collection::vec(1..=max_width, 2..=(max_depth + 1))
}

fn net_with_dims(dims: Vec<usize>) -> impl Strategy<Value = Network<f64>> {
    let total_weights: usize = dims.windows(2).map(|w| w[0] * w[1]).sum();
    let total_biases: usize = dims[1..].iter().sum();
    prop::collection::vec(-1.0f64..1.0, total_weights + total_biases).prop_map(move |vals| {
        let mut it = vals.into_iter();
        let layers = dims
            .windows(2)
            .map(|w| {
                let data: Vec<f64> = (0..w[0] * w[1]).map(|_| it.next().unwrap()).collect();
                let bias: Vec<f64> = (0..w[1]).map(|_| it.next().unwrap()).collect();
                Layer::new(Matrix::from_vec(w[1], w[0], data), bias)
            })
            .collect();
        Network::new(layers).unwrap()
    })
}

fn points(d: usize, count: usize) -> impl Strategy<Value = Vec<Vec<f64>>> {
    prop::collection::vec(prop::collection::vec(-4.0f64..4.0, d), count)
}

fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
    a.len() == b.len()
        && a.iter()
            .zip(b.iter())
            .all(|(x, y)| (x - y).abs() <= tol * x.abs().max(y.abs()).max(1.0))
}

fn bits(net: &Network<f64>) -> Vec<u64> {
    net.layers()
        .iter()
        .flat_map(|l| {
            l.weight
                .data()
                .iter()
                .chain(l.bias.iter())
                .map(|v| v.to_bits())
                .collect::<Vec<_>>()
        })
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn compose_depth_law(
        a in dims_strategy(3, 5), b in dims_strategy(3, 5), seed in any::<u64>()
    ) {
        let _ = seed;
        // chain b's output into a's input
        let mut a = a;
        a[0] = *b.last().unwrap();
        let runner = &mut proptest::test_runner::TestRunner::deterministic();
        let outer = net_with_dims(a).new_tree(runner).unwrap().current();
        let inner = net_with_dims(b).new_tree(runner).unwrap().current();
        let both = compose(&outer, &inner).unwrap();
        prop_assert_eq!(both.depth(), outer.depth() + inner.depth() - 1);
        prop_assert_eq!(both.input_dim(), inner.input_dim());
        prop_assert_eq!(both.output_dim(), outer.output_dim());
    }

    #[test]
    fn compose_associativity_at_realization(
        d1 in dims_strategy(3, 4),
        d2 in dims_strategy(3, 4),
        d3 in dims_strategy(3, 4),
        xs in points(1, 4)
    ) {
        // chain: h: x -> ., g: . -> ., f: . -> .
        let mut d3 = d3;
        let mut d2 = d2;
        let mut d1 = d1;
        d3[0] = 1;
        d2[0] = *d3.last().unwrap();
        d1[0] = *d2.last().unwrap();
        let runner = &mut proptest::test_runner::TestRunner::deterministic();
        let h = net_with_dims(d3).new_tree(runner).unwrap().current();
        let g = net_with_dims(d2).new_tree(runner).unwrap().current();
        let f = net_with_dims(d1).new_tree(runner).unwrap().current();
        let left = compose(&compose(&f, &g).unwrap(), &h).unwrap();
        let right = compose(&f, &compose(&g, &h).unwrap()).unwrap();
        prop_assert_eq!(left.dims(), right.dims());
        for x in &xs {
            let a = left.realize(&Activation::Relu, x).unwrap();
            let b = right.realize(&Activation::Relu, x).unwrap();
            prop_assert!(close(&a, &b, 1e-10), "{a:?} vs {b:?}");
        }
    }

    #[test]
    fn parallelize_dims_are_additive(nets_dims in prop::collection::vec(dims_strategy(3, 4), 1..4)) {
        // equalize depths
        let depth = nets_dims[0].len();
        let dims_list: Vec<Vec<usize>> = nets_dims
            .into_iter()
            .map(|mut d| {
                d.resize(depth, 1);
                d
            })
            .collect();
        let runner = &mut proptest::test_runner::TestRunner::deterministic();
        let nets: Vec<Network<f64>> = dims_list
            .iter()
            .map(|d| net_with_dims(d.clone()).new_tree(runner).unwrap().current())
            .collect();
        let stacked = parallelize(&nets).unwrap();
        for k in 0..depth {
            let want: usize = nets.iter().map(|n| n.dim_at(k)).sum();
            prop_assert_eq!(stacked.dim_at(k), want);
        }
    }

    #[test]
    fn sum_dims_formula_and_param_relation(
        dims in dims_strategy(3, 4),
        n in 1usize..4,
    ) {
        let runner = &mut proptest::test_runner::TestRunner::deterministic();
        let net = net_with_dims(dims).new_tree(runner).unwrap().current();
        let copies = vec![net.clone(); n];
        let sum = same_length_sum(&copies).unwrap();
        // dims: (I, n·D_1, ..., n·D_{L-1}, O)
        let mut want = vec![net.input_dim()];
        for k in 1..net.depth() {
            want.push(n * net.dim_at(k));
        }
        want.push(net.output_dim());
        prop_assert_eq!(sum.dims().0, want);
        prop_assert!(sum.param_count() <= n * n * net.param_count());
    }

    #[test]
    fn fanout_fanin_cancel(m in 1usize..5, n in 1usize..5, xs in points(1, 1)) {
        let _ = xs;
        let collapse = compose(&sum_fanin::<f64>(m, n), &fanout::<f64>(m, n)).unwrap();
        let x: Vec<f64> = (0..m).map(|i| i as f64 - 1.5).collect();
        let y = collapse.realize(&Activation::Relu, &x).unwrap();
        let want: Vec<f64> = x.iter().map(|v| n as f64 * v).collect();
        prop_assert!(close(&y, &want, 1e-12));
    }

    #[test]
    fn combinators_preserve_roundtrip_exactness(
        dims_a in dims_strategy(3, 4),
        lambda in -4.0f64..4.0,
        n in 1usize..3,
    ) {
        let runner = &mut proptest::test_runner::TestRunner::deterministic();
        let a = net_with_dims(dims_a).new_tree(runner).unwrap().current();
        let candidates: Vec<Network<f64>> = vec![
            scalar_mul(lambda, &a),
            parallelize(&vec![a.clone(); n]).unwrap(),
            same_length_sum(&vec![a.clone(); n]).unwrap(),
            weighted_block_sum(&vec![lambda; n], &vec![a.clone(); n]).unwrap(),
        ];
        for net in &candidates {
            let text = network_to_json(net, &Activation::Relu).unwrap();
            let (back, _) = network_from_json::<f64>(&text).unwrap();
            prop_assert_eq!(bits(net), bits(&back));
        }
    }

    #[test]
    fn skip_connection_identity_carry(
        dims_inner in dims_strategy(3, 5),
        dims_inc in dims_strategy(3, 5),
        d in 1usize..4,
        xs in points(1, 3),
    ) {
        let mut dims_inner = dims_inner;
        let mut dims_inc = dims_inc;
        let li = dims_inner.len();
        let lj = dims_inc.len();
        dims_inner[0] = d;
        dims_inner[li - 1] = d;
        dims_inc[0] = d;
        dims_inc[lj - 1] = d;
        // keep the inner's last hidden width admissible
        if li >= 2 {
            let cap = dims_inc[lj - 2] + 2 * d;
            if dims_inner[li - 2] > cap {
                dims_inner[li - 2] = cap;
            }
        }
        let runner = &mut proptest::test_runner::TestRunner::deterministic();
        let inner = net_with_dims(dims_inner).new_tree(runner).unwrap().current();
        let increment = net_with_dims(dims_inc).new_tree(runner).unwrap().current();
        let idnet = relu_identity(d);
        let skip = skip_compose(&increment, &inner, &idnet).unwrap();
        for x in xs.iter().map(|x| vec![x[0]; d]) {
            let y = inner.realize(&Activation::Relu, &x).unwrap();
            let inc = increment.realize(&Activation::Relu, &y).unwrap();
            let want: Vec<f64> = y.iter().zip(inc.iter()).map(|(u, v)| u + v).collect();
            let got = skip.realize(&Activation::Relu, &x).unwrap();
            prop_assert!(close(&got, &want, 1e-10), "{got:?} vs {want:?}");
        }
        // last hidden width never exceeds the increment's plus the carry
        let last_hidden = skip.dim_at(skip.depth() - 1);
        let cap = increment.dim_at(increment.depth() - 1) + idnet.dim_at(1);
        prop_assert!(last_hidden <= cap);
    }
}

#[test]
fn relu_identity_is_bit_exact_identity() {
    for d in [1usize, 2, 5, 9] {
        let id = relu_identity::<f64>(d);
        let x: Vec<f64> = (0..d).map(|i| (i as f64 - 2.5) * 1.7).collect();
        let y = id.realize(&Activation::Relu, &x).unwrap();
        assert!(x.iter().zip(y.iter()).all(|(a, b)| a.to_bits() == b.to_bits()));
    }
}

#[test]
fn identity_activation_collapses_to_affine_product() {
    // realize with the identity activation equals the single affine map
    // obtained by multiplying out all layers
    let runner = &mut proptest::test_runner::TestRunner::deterministic();
    let net = net_with_dims(vec![3, 5, 4, 2]).new_tree(runner).unwrap().current();
    let mut w = Matrix::<f64>::identity(3);
    let mut b = vec![0.0; 3];
    for layer in net.layers() {
        b = {
            let mut nb = layer.weight.matvec(&b);
            for (v, c) in nb.iter_mut().zip(layer.bias.iter()) {
                *v += *c;
            }
            nb
        };
        w = layer.weight.matmul(&w);
    }
    for x in [[0.5, -1.0, 2.0], [0.0, 0.0, 0.0], [3.0, 3.0, -3.0]] {
        let got = net.realize(&Activation::Identity, &x).unwrap();
        let mut want = w.matvec(&x);
        for (v, c) in want.iter_mut().zip(b.iter()) {
            *v += *c;
        }
        assert!(close(&got, &want, 1e-12), "{got:?} vs {want:?}");
    }
}
