//! Dense feedforward networks with cached-state reverse-mode gradients.
//!
//! A [`DenseNet`] is a stack of affine layers (`weights` row-major
//! `[out x in]`, `biases` `[out]`) each followed by an element-wise
//! activation. Forward runs cache per-layer post-activations in a
//! [`ForwardTrace`]; the backward pass replays the stack in reverse to fill a
//! [`GradientTape`] aligned one-to-one with the parameters and, additionally,
//! the gradient with respect to the input vector (needed when networks feed
//! into each other).

use rand::distributions::{Distribution, Uniform};
use rand::Rng;

use super::activation::Activation;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Layer {
    pub(crate) weights: Vec<f64>,
    pub(crate) biases: Vec<f64>,
    pub(crate) in_dim: usize,
    pub(crate) out_dim: usize,
    pub(crate) activation: Activation,
}

impl Layer {
    /// Xavier/Glorot uniform init: `U(-s, s)` with `s = sqrt(6/(fan_in+fan_out))`.
    pub fn xavier<R: Rng + ?Sized>(
        in_dim: usize,
        out_dim: usize,
        activation: Activation,
        rng: &mut R,
    ) -> Self {
        let s = (6.0 / (in_dim + out_dim) as f64).sqrt();
        let dist = Uniform::new_inclusive(-s, s);
        let weights = (0..in_dim * out_dim).map(|_| dist.sample(rng)).collect();
        Layer {
            weights,
            biases: vec![0.0; out_dim],
            in_dim,
            out_dim,
            activation,
        }
    }

    pub fn from_parts(
        weights: Vec<f64>,
        biases: Vec<f64>,
        in_dim: usize,
        out_dim: usize,
        activation: Activation,
    ) -> Result<Self> {
        if weights.len() != in_dim * out_dim {
            return Err(Error::ShapeMismatch {
                context: "Layer::from_parts weights",
                expected: in_dim * out_dim,
                actual: weights.len(),
            });
        }
        if biases.len() != out_dim {
            return Err(Error::ShapeMismatch {
                context: "Layer::from_parts biases",
                expected: out_dim,
                actual: biases.len(),
            });
        }
        Ok(Layer {
            weights,
            biases,
            in_dim,
            out_dim,
            activation,
        })
    }

    pub fn in_dim(&self) -> usize {
        self.in_dim
    }

    pub fn out_dim(&self) -> usize {
        self.out_dim
    }

    pub fn activation(&self) -> Activation {
        self.activation
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn biases(&self) -> &[f64] {
        &self.biases
    }

    fn forward_into(&self, input: &[f64], out: &mut Vec<f64>) {
        out.clear();
        for o in 0..self.out_dim {
            let row = &self.weights[o * self.in_dim..(o + 1) * self.in_dim];
            let mut z = self.biases[o];
            for (w, x) in row.iter().zip(input) {
                z += w * x;
            }
            out.push(self.activation.apply(z));
        }
    }
}

/// Parameter gradients for one layer, same layout as the layer itself.
#[derive(Debug, Clone, PartialEq)]
pub struct LayerGrad {
    pub d_weights: Vec<f64>,
    pub d_biases: Vec<f64>,
}

/// Per-parameter partial derivatives, shape-congruent with a [`DenseNet`].
#[derive(Debug, Clone, PartialEq)]
pub struct GradientTape {
    pub layers: Vec<LayerGrad>,
}

impl GradientTape {
    pub fn add_assign(&mut self, other: &GradientTape) {
        debug_assert_eq!(self.layers.len(), other.layers.len());
        for (a, b) in self.layers.iter_mut().zip(&other.layers) {
            for (x, y) in a.d_weights.iter_mut().zip(&b.d_weights) {
                *x += y;
            }
            for (x, y) in a.d_biases.iter_mut().zip(&b.d_biases) {
                *x += y;
            }
        }
    }

    pub fn scale(&mut self, c: f64) {
        for l in &mut self.layers {
            for x in &mut l.d_weights {
                *x *= c;
            }
            for x in &mut l.d_biases {
                *x *= c;
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.layers.iter().all(|l| {
            l.d_weights.iter().all(|&x| x == 0.0) && l.d_biases.iter().all(|&x| x == 0.0)
        })
    }

    /// Flattened gradients in [`DenseNet::get_param`] index order.
    pub fn flat(&self) -> Vec<f64> {
        let mut out = Vec::new();
        for l in &self.layers {
            out.extend_from_slice(&l.d_weights);
            out.extend_from_slice(&l.d_biases);
        }
        out
    }
}

/// Cached forward state: the input and every layer's post-activation output.
#[derive(Debug, Clone)]
pub struct ForwardTrace {
    input: Vec<f64>,
    post: Vec<Vec<f64>>,
}

impl ForwardTrace {
    pub fn output(&self) -> &[f64] {
        self.post.last().map_or(&self.input, Vec::as_slice)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DenseNet {
    layers: Vec<Layer>,
}

impl DenseNet {
    /// Stacks Xavier-initialized layers. `dims` lists layer widths from input
    /// to output; `hidden_act` covers all but the last layer, which gets
    /// `output_act`.
    pub fn new<R: Rng + ?Sized>(
        dims: &[usize],
        hidden_act: Activation,
        output_act: Activation,
        rng: &mut R,
    ) -> Self {
        assert!(dims.len() >= 2, "a network needs at least one layer");
        let n = dims.len() - 1;
        let layers = (0..n)
            .map(|i| {
                let act = if i + 1 == n { output_act } else { hidden_act };
                Layer::xavier(dims[i], dims[i + 1], act, rng)
            })
            .collect();
        DenseNet { layers }
    }

    pub fn from_layers(layers: Vec<Layer>) -> Result<Self> {
        for pair in layers.windows(2) {
            if pair[0].out_dim != pair[1].in_dim {
                return Err(Error::ShapeMismatch {
                    context: "DenseNet layer composition",
                    expected: pair[0].out_dim,
                    actual: pair[1].in_dim,
                });
            }
        }
        Ok(DenseNet { layers })
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    pub fn in_dim(&self) -> usize {
        self.layers[0].in_dim
    }

    pub fn out_dim(&self) -> usize {
        self.layers.last().unwrap().out_dim
    }

    pub fn param_count(&self) -> usize {
        self.layers
            .iter()
            .map(|l| l.weights.len() + l.biases.len())
            .sum()
    }

    /// Flat parameter view, layer by layer, weights before biases. Used by
    /// finite-difference checks and serialization; index order matches
    /// [`GradientTape::flat`].
    pub fn get_param(&self, mut idx: usize) -> f64 {
        for l in &self.layers {
            if idx < l.weights.len() {
                return l.weights[idx];
            }
            idx -= l.weights.len();
            if idx < l.biases.len() {
                return l.biases[idx];
            }
            idx -= l.biases.len();
        }
        panic!("parameter index out of range");
    }

    pub fn set_param(&mut self, mut idx: usize, v: f64) {
        for l in &mut self.layers {
            if idx < l.weights.len() {
                l.weights[idx] = v;
                return;
            }
            idx -= l.weights.len();
            if idx < l.biases.len() {
                l.biases[idx] = v;
                return;
            }
            idx -= l.biases.len();
        }
        panic!("parameter index out of range");
    }

    /// Deterministic forward pass.
    pub fn forward(&self, input: &[f64]) -> Result<Vec<f64>> {
        self.check_input(input)?;
        let mut cur = input.to_vec();
        let mut next = Vec::new();
        for layer in &self.layers {
            layer.forward_into(&cur, &mut next);
            std::mem::swap(&mut cur, &mut next);
        }
        Ok(cur)
    }

    /// Forward pass that caches the state needed by [`DenseNet::backward`].
    pub fn forward_traced(&self, input: &[f64]) -> Result<ForwardTrace> {
        self.check_input(input)?;
        let mut post = Vec::with_capacity(self.layers.len());
        let mut cur = input.to_vec();
        for layer in &self.layers {
            let mut out = Vec::new();
            layer.forward_into(&cur, &mut out);
            cur = out.clone();
            post.push(out);
        }
        Ok(ForwardTrace {
            input: input.to_vec(),
            post,
        })
    }

    /// Reverse-mode gradients of `output . upstream` with respect to every
    /// parameter and to the input vector.
    ///
    /// `trace` must come from a `forward_traced` call on this same network.
    pub fn backward(
        &self,
        trace: &ForwardTrace,
        upstream: &[f64],
    ) -> Result<(GradientTape, Vec<f64>)> {
        if upstream.len() != self.out_dim() {
            return Err(Error::ShapeMismatch {
                context: "DenseNet::backward upstream",
                expected: self.out_dim(),
                actual: upstream.len(),
            });
        }
        let last = self.layers.len() - 1;
        let act = self.layers[last].activation;
        let pre_upstream: Vec<f64> = upstream
            .iter()
            .zip(&trace.post[last])
            .map(|(&u, &y)| u * act.grad_from_output(y))
            .collect();
        self.backward_from_preactivation(trace, &pre_upstream)
    }

    /// Like [`DenseNet::backward`] but `upstream` is the gradient with respect
    /// to the final layer's pre-activation. Lets loss functions fold the
    /// output nonlinearity into their own gradient (e.g. sigmoid + log-loss).
    pub fn backward_from_preactivation(
        &self,
        trace: &ForwardTrace,
        upstream: &[f64],
    ) -> Result<(GradientTape, Vec<f64>)> {
        self.check_trace(trace)?;
        if upstream.len() != self.out_dim() {
            return Err(Error::ShapeMismatch {
                context: "DenseNet::backward upstream",
                expected: self.out_dim(),
                actual: upstream.len(),
            });
        }

        let mut grads: Vec<LayerGrad> = self
            .layers
            .iter()
            .map(|l| LayerGrad {
                d_weights: vec![0.0; l.weights.len()],
                d_biases: vec![0.0; l.out_dim],
            })
            .collect();

        // d_pre holds dL/d(pre-activation) of the layer being processed.
        let mut d_pre = upstream.to_vec();
        for (li, layer) in self.layers.iter().enumerate().rev() {
            let layer_input: &[f64] = if li == 0 {
                &trace.input
            } else {
                &trace.post[li - 1]
            };
            let g = &mut grads[li];
            let mut d_input = vec![0.0; layer.in_dim];
            for o in 0..layer.out_dim {
                let dz = d_pre[o];
                g.d_biases[o] = dz;
                let row = o * layer.in_dim;
                for i in 0..layer.in_dim {
                    g.d_weights[row + i] = dz * layer_input[i];
                    d_input[i] += layer.weights[row + i] * dz;
                }
            }
            if li > 0 {
                let act = self.layers[li - 1].activation;
                d_pre = d_input
                    .iter()
                    .zip(&trace.post[li - 1])
                    .map(|(&d, &y)| d * act.grad_from_output(y))
                    .collect();
            } else {
                d_pre = d_input;
            }
        }

        Ok((GradientTape { layers: grads }, d_pre))
    }

    pub fn zero_tape(&self) -> GradientTape {
        GradientTape {
            layers: self
                .layers
                .iter()
                .map(|l| LayerGrad {
                    d_weights: vec![0.0; l.weights.len()],
                    d_biases: vec![0.0; l.out_dim],
                })
                .collect(),
        }
    }

    pub(crate) fn layers_mut(&mut self) -> &mut [Layer] {
        &mut self.layers
    }

    fn check_input(&self, input: &[f64]) -> Result<()> {
        if input.len() != self.in_dim() {
            return Err(Error::ShapeMismatch {
                context: "DenseNet input",
                expected: self.in_dim(),
                actual: input.len(),
            });
        }
        Ok(())
    }

    fn check_trace(&self, trace: &ForwardTrace) -> Result<()> {
        let congruent = trace.input.len() == self.in_dim()
            && trace.post.len() == self.layers.len()
            && trace
                .post
                .iter()
                .zip(&self.layers)
                .all(|(p, l)| p.len() == l.out_dim);
        if congruent {
            Ok(())
        } else {
            Err(Error::StaleTrace)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    #[test]
    fn identity_layer_passes_input_through() {
        // Single identity layer with W = I, b = 0.
        let layer = Layer::from_parts(
            vec![1.0, 0.0, 0.0, 1.0],
            vec![0.0, 0.0],
            2,
            2,
            Activation::Identity,
        )
        .unwrap();
        let net = DenseNet::from_layers(vec![layer]).unwrap();
        assert_eq!(net.forward(&[1.0, 2.0]).unwrap(), vec![1.0, 2.0]);
    }

    #[test]
    fn zero_input_zero_bias_tanh_is_zero() {
        let mut r = rng(3);
        let mut net = DenseNet::new(&[3, 4, 2], Activation::Tanh, Activation::Tanh, &mut r);
        for layer in net.layers_mut() {
            layer.biases.iter_mut().for_each(|b| *b = 0.0);
        }
        let out = net.forward(&[0.0, 0.0, 0.0]).unwrap();
        assert!(out.iter().all(|&y| y == 0.0));
    }

    /// Independent re-implementation of the two-layer tanh forward pass,
    /// written with explicit index arithmetic rather than the layer loop.
    fn oracle_two_layer_tanh(
        w1: &[f64],
        b1: &[f64],
        w2: &[f64],
        b2: &[f64],
        x: &[f64],
        hidden: usize,
        out: usize,
    ) -> Vec<f64> {
        let mut h = vec![0.0; hidden];
        for (o, hv) in h.iter_mut().enumerate() {
            let mut z = b1[o];
            for (i, xv) in x.iter().enumerate() {
                z += w1[o * x.len() + i] * xv;
            }
            *hv = z.tanh();
        }
        let mut y = vec![0.0; out];
        for (o, yv) in y.iter_mut().enumerate() {
            let mut z = b2[o];
            for (i, hv) in h.iter().enumerate() {
                z += w2[o * hidden + i] * hv;
            }
            *yv = z.tanh();
        }
        y
    }

    #[test]
    fn forward_matches_independent_oracle() {
        let w1 = vec![0.1, -0.2, 0.3, 0.05, -0.15, 0.25];
        let b1 = vec![0.01, -0.02, 0.03];
        let w2 = vec![0.2, -0.1, 0.4, -0.3, 0.6, 0.05];
        let b2 = vec![0.1, -0.1];
        let net = DenseNet::from_layers(vec![
            Layer::from_parts(w1.clone(), b1.clone(), 2, 3, Activation::Tanh).unwrap(),
            Layer::from_parts(w2.clone(), b2.clone(), 3, 2, Activation::Tanh).unwrap(),
        ])
        .unwrap();
        let x = [0.7, -0.4];
        let got = net.forward(&x).unwrap();
        let want = oracle_two_layer_tanh(&w1, &b1, &w2, &b2, &x, 3, 2);
        for (g, w) in got.iter().zip(&want) {
            assert!((g - w).abs() < 1e-15, "got {g}, want {w}");
        }
    }

    #[test]
    fn forward_is_pure() {
        let mut r = rng(11);
        let net = DenseNet::new(&[4, 5, 3], Activation::Tanh, Activation::Identity, &mut r);
        let x = [0.3, -1.2, 0.0, 0.8];
        let a = net.forward(&x).unwrap();
        let b = net.forward(&x).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn forward_rejects_wrong_width() {
        let mut r = rng(1);
        let net = DenseNet::new(&[3, 2], Activation::Tanh, Activation::Identity, &mut r);
        assert!(matches!(
            net.forward(&[1.0, 2.0]),
            Err(Error::ShapeMismatch { .. })
        ));
    }

    #[test]
    fn linear_scalar_gradient_is_input() {
        // y = w*x, upstream 1, x = 3 -> dL/dw = 3.
        let layer = Layer::from_parts(vec![2.0], vec![0.0], 1, 1, Activation::Identity).unwrap();
        let net = DenseNet::from_layers(vec![layer]).unwrap();
        let trace = net.forward_traced(&[3.0]).unwrap();
        let (tape, d_input) = net.backward(&trace, &[1.0]).unwrap();
        assert_eq!(tape.layers[0].d_weights, vec![3.0]);
        assert_eq!(tape.layers[0].d_biases, vec![1.0]);
        assert_eq!(d_input, vec![2.0]);
    }

    #[test]
    fn zero_upstream_gives_zero_tape() {
        let mut r = rng(5);
        let net = DenseNet::new(&[3, 4, 2], Activation::Tanh, Activation::Identity, &mut r);
        let trace = net.forward_traced(&[0.2, -0.5, 1.0]).unwrap();
        let (tape, d_input) = net.backward(&trace, &[0.0, 0.0]).unwrap();
        assert!(tape.is_zero());
        assert!(d_input.iter().all(|&d| d == 0.0));
    }

    #[test]
    fn backward_rejects_foreign_trace() {
        let mut r = rng(6);
        let a = DenseNet::new(&[3, 4, 2], Activation::Tanh, Activation::Identity, &mut r);
        let b = DenseNet::new(&[2, 4, 2], Activation::Tanh, Activation::Identity, &mut r);
        let trace = a.forward_traced(&[0.1, 0.2, 0.3]).unwrap();
        assert!(matches!(
            b.backward(&trace, &[1.0, 1.0]),
            Err(Error::StaleTrace)
        ));
    }

    /// Central finite differences of `output . upstream` for every parameter.
    fn finite_diff(net: &mut DenseNet, x: &[f64], upstream: &[f64], h: f64) -> GradientTape {
        let eval = |net: &DenseNet| -> f64 {
            net.forward(x)
                .unwrap()
                .iter()
                .zip(upstream)
                .map(|(y, u)| y * u)
                .sum()
        };
        let mut tape = net.zero_tape();
        for li in 0..net.layers.len() {
            for wi in 0..net.layers[li].weights.len() {
                let orig = net.layers[li].weights[wi];
                net.layers_mut()[li].weights[wi] = orig + h;
                let plus = eval(net);
                net.layers_mut()[li].weights[wi] = orig - h;
                let minus = eval(net);
                net.layers_mut()[li].weights[wi] = orig;
                tape.layers[li].d_weights[wi] = (plus - minus) / (2.0 * h);
            }
            for bi in 0..net.layers[li].biases.len() {
                let orig = net.layers[li].biases[bi];
                net.layers_mut()[li].biases[bi] = orig + h;
                let plus = eval(net);
                net.layers_mut()[li].biases[bi] = orig - h;
                let minus = eval(net);
                net.layers_mut()[li].biases[bi] = orig;
                tape.layers[li].d_biases[bi] = (plus - minus) / (2.0 * h);
            }
        }
        tape
    }

    #[test]
    fn backward_matches_finite_differences() {
        let mut r = rng(42);
        let mut net = DenseNet::new(
            &[3, 5, 4, 2],
            Activation::Tanh,
            Activation::Identity,
            &mut r,
        );
        let x = [0.4, -0.9, 0.15];
        let upstream = [0.7, -1.3];
        let trace = net.forward_traced(&x).unwrap();
        let (analytic, _) = net.backward(&trace, &upstream).unwrap();
        let numeric = finite_diff(&mut net, &x, &upstream, 1e-5);
        for (la, ln) in analytic.layers.iter().zip(&numeric.layers) {
            for (a, n) in la
                .d_weights
                .iter()
                .chain(&la.d_biases)
                .zip(ln.d_weights.iter().chain(&ln.d_biases))
            {
                let rel = (a - n).abs() / a.abs().max(n.abs()).max(1e-4);
                assert!(rel < 1e-4, "analytic {a} vs numeric {n}");
            }
        }
    }
}
