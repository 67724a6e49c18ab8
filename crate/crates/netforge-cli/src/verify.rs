//! Combinator identity suites behind `verify-calculus`: each suite
//! checks one realization or counting law on randomized instances and
//! reports a single table row.

use netforge::calculus::{
    bias_net, compose, compose_via_identity, fanout, matrix_net, parallelize, relu_identity,
    same_length_sum, scalar_mul, skip_compose, sum_fanin, weighted_block_sum,
};
use netforge::json::{network_from_json, network_to_json};
use netforge::matrix::Matrix;
use netforge::network::{Activation, Layer, Network};

const RELU: Activation<f64> = Activation::Relu;

struct Rng(u64);

impl Rng {
    fn new(seed: u64) -> Self {
        Rng(seed.wrapping_mul(0x9e3779b97f4a7c15) | 1)
    }

    fn next_u64(&mut self) -> u64 {
        self.0 = self.0.wrapping_add(0x9e3779b97f4a7c15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
        z ^ (z >> 31)
    }

    fn unit(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 / (1u64 << 53) as f64
    }

    fn sym(&mut self) -> f64 {
        2.0 * self.unit() - 1.0
    }

    fn range(&mut self, lo: usize, hi: usize) -> usize {
        lo + (self.next_u64() as usize) % (hi - lo + 1)
    }

    fn net(&mut self, dims: &[usize]) -> Network<f64> {
        let layers = dims
            .windows(2)
            .map(|w| {
                let data = (0..w[0] * w[1]).map(|_| self.sym()).collect();
                let bias = (0..w[1]).map(|_| self.sym()).collect();
                Layer::new(Matrix::from_vec(w[1], w[0], data), bias)
            })
            .collect();
        Network::new(layers).unwrap()
    }

    fn point(&mut self, d: usize) -> Vec<f64> {
        (0..d).map(|_| 4.0 * self.sym()).collect()
    }
}

fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
    a.len() == b.len()
        && a.iter()
            .zip(b.iter())
            .all(|(x, y)| (x - y).abs() <= tol * x.abs().max(y.abs()).max(1.0))
}

const TRIALS: usize = 40;
const TOL: f64 = 1e-10;

/// Runs every suite and returns (name, passed) rows. `corrupt` perturbs
/// one weight inside the identity-block suite as a negative control.
pub fn run_suites(corrupt: bool) -> Vec<(&'static str, bool)> {
    let mut rng = Rng::new(0xC0FFEE);
    let mut rows: Vec<(&'static str, bool)> = Vec::new();

    rows.push(("composition realizes outer after inner", {
        (0..TRIALS).all(|_| {
            let di = {
                let len = rng.range(2, 4);
                rng.dims_vec(len)
            };
            let mut do_ = {
                let len = rng.range(2, 4);
                rng.dims_vec(len)
            };
            do_[0] = *di.last().unwrap();
            let inner = rng.net(&di);
            let outer = rng.net(&do_);
            let both = match compose(&outer, &inner) {
                Ok(n) => n,
                Err(_) => return false,
            };
            if both.depth() != outer.depth() + inner.depth() - 1 {
                return false;
            }
            let x = rng.point(inner.input_dim());
            let seq = outer.realize(&RELU, &inner.realize(&RELU, &x).unwrap()).unwrap();
            close(&both.realize(&RELU, &x).unwrap(), &seq, TOL)
        })
    }));

    rows.push(("parallelization acts blockwise on stacked inputs", {
        (0..TRIALS).all(|_| {
            let depth = rng.range(2, 3);
            let blocks: Vec<Network<f64>> = (0..rng.range(1, 3))
                .map(|_| {
                    let dims: Vec<usize> = (0..depth).map(|_| rng.range(1, 5)).collect();
                    rng.net(&dims)
                })
                .collect();
            let stacked = match parallelize(&blocks) {
                Ok(n) => n,
                Err(_) => return false,
            };
            let xs: Vec<Vec<f64>> = blocks.iter().map(|b| rng.point(b.input_dim())).collect();
            let flat: Vec<f64> = xs.iter().flatten().copied().collect();
            let want: Vec<f64> = blocks
                .iter()
                .zip(xs.iter())
                .flat_map(|(b, x)| b.realize(&RELU, x).unwrap())
                .collect();
            close(&stacked.realize(&RELU, &flat).unwrap(), &want, TOL)
        })
    }));

    rows.push(("shift net realizes x + B with dims (n, n)", {
        (0..TRIALS).all(|_| {
            let n = rng.range(1, 6);
            let b: Vec<f64> = (0..n).map(|_| rng.sym()).collect();
            let net = bias_net(&b);
            let x = rng.point(n);
            let want: Vec<f64> = x.iter().zip(b.iter()).map(|(u, v)| u + v).collect();
            net.dims().0 == vec![n, n] && close(&net.realize(&RELU, &x).unwrap(), &want, TOL)
        })
    }));

    rows.push(("linear net realizes W x with dims (n, m)", {
        (0..TRIALS).all(|_| {
            let (m, n) = (rng.range(1, 6), rng.range(1, 6));
            let w = Matrix::from_vec(m, n, (0..m * n).map(|_| rng.sym()).collect());
            let net = matrix_net(w.clone());
            let x = rng.point(n);
            net.dims().0 == vec![n, m] && close(&net.realize(&RELU, &x).unwrap(), &w.matvec(&x), TOL)
        })
    }));

    rows.push(("scaling keeps dims and scales the realization", {
        (0..TRIALS).all(|_| {
            let dims = [rng.range(1, 5), rng.range(1, 5), rng.range(1, 5)];
            let net = rng.net(&dims);
            let lambda = 4.0 * rng.sym();
            let scaled = scalar_mul(lambda, &net);
            let x = rng.point(dims[0]);
            let want: Vec<f64> =
                net.realize(&RELU, &x).unwrap().iter().map(|v| lambda * v).collect();
            scaled.dims() == net.dims() && close(&scaled.realize(&RELU, &x).unwrap(), &want, TOL)
        })
    }));

    rows.push(("identity block is bit-exact with dims (d, 2d, d)", {
        (0..TRIALS).all(|_| {
            let d = rng.range(1, 8);
            let mut id = relu_identity::<f64>(d);
            if corrupt {
                let mut layers = id.into_layers();
                layers[0].bias[0] += 0.125;
                id = Network::new(layers).unwrap();
            }
            let x = rng.point(d);
            let y = id.realize(&RELU, &x).unwrap();
            id.dims().0 == vec![d, 2 * d, d]
                && x.iter().zip(y.iter()).all(|(a, b)| a.to_bits() == b.to_bits())
        })
    }));

    rows.push(("P(i_d)=4d^2+3d", {
        (1..=50).all(|d| relu_identity::<f64>(d).param_count() == 4 * d * d + 3 * d)
    }));

    rows.push(("fan-in sums n stacked m-blocks", {
        (0..TRIALS).all(|_| {
            let (m, n) = (rng.range(1, 4), rng.range(1, 4));
            let net = sum_fanin::<f64>(m, n);
            let xs: Vec<Vec<f64>> = (0..n).map(|_| rng.point(m)).collect();
            let flat: Vec<f64> = xs.iter().flatten().copied().collect();
            let mut want = vec![0.0; m];
            for x in &xs {
                for (acc, v) in want.iter_mut().zip(x) {
                    *acc += v;
                }
            }
            net.dims().0 == vec![n * m, m] && close(&net.realize(&RELU, &flat).unwrap(), &want, TOL)
        })
    }));

    rows.push(("fan-out replicates the input n times", {
        (0..TRIALS).all(|_| {
            let (m, n) = (rng.range(1, 4), rng.range(1, 4));
            let net = fanout::<f64>(m, n);
            let x = rng.point(m);
            let want: Vec<f64> = std::iter::repeat_n(x.clone(), n).flatten().collect();
            net.dims().0 == vec![m, n * m] && close(&net.realize(&RELU, &x).unwrap(), &want, TOL)
        })
    }));

    rows.push(("same-shape sum realizes the pointwise sum", {
        (0..TRIALS).all(|_| {
            let dims = [rng.range(1, 4), rng.range(1, 5), rng.range(1, 4)];
            let nets: Vec<Network<f64>> = (0..rng.range(1, 3)).map(|_| rng.net(&dims)).collect();
            let sum = match same_length_sum(&nets) {
                Ok(n) => n,
                Err(_) => return false,
            };
            let x = rng.point(dims[0]);
            let mut want = vec![0.0; dims[2]];
            for n in &nets {
                for (acc, v) in want.iter_mut().zip(n.realize(&RELU, &x).unwrap()) {
                    *acc += v;
                }
            }
            close(&sum.realize(&RELU, &x).unwrap(), &want, TOL)
        })
    }));

    rows.push(("weighted block sum with P <= n^2 P(block)", {
        (0..TRIALS).all(|_| {
            let dims = [rng.range(1, 4), rng.range(1, 5), rng.range(1, 4)];
            let k = rng.range(1, 3);
            let ws: Vec<f64> = (0..k).map(|_| 2.0 * rng.sym()).collect();
            let nets: Vec<Network<f64>> = (0..k).map(|_| rng.net(&dims)).collect();
            let sum = match weighted_block_sum(&ws, &nets) {
                Ok(n) => n,
                Err(_) => return false,
            };
            if sum.param_count() > k * k * nets[0].param_count() {
                return false;
            }
            let xs: Vec<Vec<f64>> = (0..k).map(|_| rng.point(dims[0])).collect();
            let flat: Vec<f64> = xs.iter().flatten().copied().collect();
            let mut want = vec![0.0; dims[2]];
            for ((h, net), x) in ws.iter().zip(nets.iter()).zip(xs.iter()) {
                for (acc, v) in want.iter_mut().zip(net.realize(&RELU, x).unwrap()) {
                    *acc += h * v;
                }
            }
            close(&sum.realize(&RELU, &flat).unwrap(), &want, TOL)
        })
    }));

    rows.push(("skip connection realizes inner + increment(inner)", {
        (0..TRIALS).all(|_| {
            let d = rng.range(1, 4);
            let idnet = relu_identity::<f64>(d);
            let inc_len = rng.range(2, 3);
            let mut inc_dims: Vec<usize> = (0..inc_len).map(|_| rng.range(1, 5)).collect();
            inc_dims[0] = d;
            *inc_dims.last_mut().unwrap() = d;
            let increment = rng.net(&inc_dims);
            let cap = increment.dim_at(increment.depth() - 1) + 2 * d;
            let mid = rng.range(1, 5).min(cap);
            let inner = rng.net(&[d, mid, d]);
            let skip = match skip_compose(&increment, &inner, &idnet) {
                Ok(n) => n,
                Err(_) => return false,
            };
            let pcap = inner.param_count()
                + (idnet.param_count() / 2 + increment.param_count()).pow(2);
            if skip.param_count() > pcap {
                return false;
            }
            let x = rng.point(d);
            let y = inner.realize(&RELU, &x).unwrap();
            let inc = increment.realize(&RELU, &y).unwrap();
            let want: Vec<f64> = y.iter().zip(inc.iter()).map(|(u, v)| u + v).collect();
            close(&skip.realize(&RELU, &x).unwrap(), &want, TOL)
        })
    }));

    rows.push(("identity-routed composition with P <= 2(P+P)", {
        (0..TRIALS).all(|_| {
            let d = rng.range(1, 4);
            let (a, b) = (rng.range(1, 5), rng.range(1, 5));
            let inner = rng.net(&[a, b, d]);
            let (c, o) = (rng.range(1, 5), rng.range(1, 4));
            let outer = rng.net(&[d, c, o]);
            let net = match compose_via_identity(&outer, &inner, &relu_identity(d)) {
                Ok(n) => n,
                Err(_) => return false,
            };
            if net.param_count() > 2 * (outer.param_count() + inner.param_count()) {
                return false;
            }
            let x = rng.point(inner.input_dim());
            let want = outer.realize(&RELU, &inner.realize(&RELU, &x).unwrap()).unwrap();
            close(&net.realize(&RELU, &x).unwrap(), &want, TOL)
        })
    }));

    rows.push(("serialization round-trip is bit-exact", {
        (0..TRIALS).all(|_| {
            let dims = [rng.range(1, 5), rng.range(1, 5), rng.range(1, 5)];
            let net = rng.net(&dims);
            let text = network_to_json(&net, &RELU).unwrap();
            let (back, _) = network_from_json::<f64>(&text).unwrap();
            net.layers().iter().zip(back.layers().iter()).all(|(a, b)| {
                a.weight
                    .data()
                    .iter()
                    .zip(b.weight.data().iter())
                    .all(|(x, y)| x.to_bits() == y.to_bits())
                    && a.bias.iter().zip(b.bias.iter()).all(|(x, y)| x.to_bits() == y.to_bits())
            })
        })
    }));

    rows
}

impl Rng {
    fn dims_vec(&mut self, len: usize) -> Vec<usize> {
        (0..len).map(|_| self.range(1, 6)).collect()
    }
}
