//! Fully connected regressor: ReLU hidden layers, scalar identity output,
//! hand-written backpropagation of the squared error.

use alloc::vec;
use alloc::vec::Vec;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::tensor::{dot, DenseMatrix};
use crate::{Error, Result};

/// One affine layer; `weight` is `out × in`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Layer {
    pub weight: DenseMatrix,
    pub bias: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Layer>", into = "Vec<Layer>")]
pub struct MlpParams {
    layers: Vec<Layer>,
}

impl TryFrom<Vec<Layer>> for MlpParams {
    type Error = Error;

    fn try_from(layers: Vec<Layer>) -> Result<Self> {
        Self::new(layers)
    }
}

impl From<MlpParams> for Vec<Layer> {
    fn from(params: MlpParams) -> Self {
        params.layers
    }
}

/// Per-parameter gradient buffers shaped like [`MlpParams`].
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub layers: Vec<LayerGrad>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LayerGrad {
    pub weight: Vec<f64>,
    pub bias: Vec<f64>,
}

/// Result of a single-sample backward pass.
#[derive(Debug, Clone, PartialEq)]
pub struct Backward {
    pub prediction: f64,
    /// `(f(x) - target)²`
    pub loss: f64,
    pub grads: Gradients,
    /// Gradient of the loss with respect to the input vector.
    pub input_grad: Vec<f64>,
}

/// Reusable activation buffers for repeated passes through one network.
#[derive(Debug, Clone)]
pub struct Workspace {
    pre: Vec<Vec<f64>>,
    post: Vec<Vec<f64>>,
    delta: Vec<f64>,
    delta_prev: Vec<f64>,
}

impl Workspace {
    pub fn new(params: &MlpParams) -> Self {
        let widths: Vec<usize> = params.layers.iter().map(|l| l.weight.rows()).collect();
        let widest = params
            .layers
            .iter()
            .map(|l| l.weight.rows().max(l.weight.cols()))
            .max()
            .unwrap_or(1);
        Self {
            pre: widths.iter().map(|&w| vec![0.0; w]).collect(),
            post: widths.iter().map(|&w| vec![0.0; w]).collect(),
            delta: vec![0.0; widest],
            delta_prev: vec![0.0; widest],
        }
    }
}

impl MlpParams {
    /// Validates that layer shapes chain and end in a single output.
    pub fn new(layers: Vec<Layer>) -> Result<Self> {
        if layers.is_empty() {
            return Err(Error::Argument("an MLP needs at least one layer".into()));
        }
        for (i, layer) in layers.iter().enumerate() {
            if layer.bias.len() != layer.weight.rows() {
                return Err(Error::Shape {
                    context: "layer bias",
                    expected: layer.weight.rows(),
                    found: layer.bias.len(),
                });
            }
            if let Some(next) = layers.get(i + 1) {
                if next.weight.cols() != layer.weight.rows() {
                    return Err(Error::Shape {
                        context: "layer chaining",
                        expected: layer.weight.rows(),
                        found: next.weight.cols(),
                    });
                }
            }
            if !layer.weight.is_finite() || layer.bias.iter().any(|b| !b.is_finite()) {
                return Err(Error::Numeric {
                    context: alloc::format!("layer {i} parameters"),
                    index: i,
                });
            }
        }
        let out = layers.last().map(|l| l.weight.rows()).unwrap_or(0);
        if out != 1 {
            return Err(Error::Shape {
                context: "MLP output dimension",
                expected: 1,
                found: out,
            });
        }
        Ok(Self { layers })
    }

    /// `depth` affine layers, `depth - 1` hidden ReLU layers of `hidden_width`.
    /// Weights are uniform in ±√(6/(fan_in+fan_out)), biases zero.
    pub fn init<R: Rng + ?Sized>(
        input_dim: usize,
        hidden_width: usize,
        depth: usize,
        rng: &mut R,
    ) -> Result<Self> {
        Self::build(input_dim, hidden_width, depth, |fan_in, fan_out| {
            let limit = libm::sqrt(6.0 / (fan_in + fan_out) as f64);
            (0..fan_in * fan_out)
                .map(|_| rng.gen_range(-limit..=limit))
                .collect()
        })
    }

    /// Same shape as [`MlpParams::init`] with every parameter zero.
    pub fn zeros(input_dim: usize, hidden_width: usize, depth: usize) -> Result<Self> {
        Self::build(input_dim, hidden_width, depth, |fan_in, fan_out| {
            vec![0.0; fan_in * fan_out]
        })
    }

    fn build(
        input_dim: usize,
        hidden_width: usize,
        depth: usize,
        mut weights: impl FnMut(usize, usize) -> Vec<f64>,
    ) -> Result<Self> {
        if depth == 0 {
            return Err(Error::Argument("depth must be at least 1".into()));
        }
        if input_dim == 0 || (depth > 1 && hidden_width == 0) {
            return Err(Error::Argument("layer widths must be positive".into()));
        }
        let mut layers = Vec::with_capacity(depth);
        let mut fan_in = input_dim;
        for i in 0..depth {
            let fan_out = if i + 1 == depth { 1 } else { hidden_width };
            layers.push(Layer {
                weight: DenseMatrix::from_vec(fan_out, fan_in, weights(fan_in, fan_out))?,
                bias: vec![0.0; fan_out],
            });
            fan_in = fan_out;
        }
        Self::new(layers)
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    pub fn layers_mut(&mut self) -> &mut [Layer] {
        &mut self.layers
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].weight.cols()
    }

    pub fn depth(&self) -> usize {
        self.layers.len()
    }

    pub fn param_count(&self) -> usize {
        self.layers
            .iter()
            .map(|l| l.weight.data().len() + l.bias.len())
            .sum()
    }

    fn check_input(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.input_dim() {
            return Err(Error::Shape {
                context: "MLP input",
                expected: self.input_dim(),
                found: x.len(),
            });
        }
        Ok(())
    }

    pub fn forward(&self, x: &[f64]) -> Result<f64> {
        let mut ws = Workspace::new(self);
        self.forward_with(x, &mut ws)
    }

    /// Forward pass reusing `ws`; activations stay in `ws` for a backward pass.
    pub fn forward_with(&self, x: &[f64], ws: &mut Workspace) -> Result<f64> {
        self.check_input(x)?;
        let last = self.layers.len() - 1;
        for (l, layer) in self.layers.iter().enumerate() {
            let (done, rest) = ws.post.split_at_mut(l);
            let input: &[f64] = if l == 0 { x } else { &done[l - 1] };
            let pre = &mut ws.pre[l];
            let cols = layer.weight.cols();
            for ((z, row), b) in pre
                .iter_mut()
                .zip(layer.weight.data().chunks_exact(cols))
                .zip(&layer.bias)
            {
                *z = dot(row, input) + b;
            }
            let post = &mut rest[0];
            if l == last {
                post.copy_from_slice(pre);
            } else {
                for (a, z) in post.iter_mut().zip(pre.iter()) {
                    *a = if *z > 0.0 { *z } else { 0.0 };
                }
            }
        }
        Ok(ws.post[last][0])
    }

    /// Single-sample gradients of `(f(x) - target)²`.
    pub fn backward(&self, x: &[f64], target: f64) -> Result<Backward> {
        let mut ws = Workspace::new(self);
        let mut grads = Gradients::zeros_like(self);
        let mut input_grad = vec![0.0; self.input_dim()];
        let (prediction, loss) =
            self.accumulate(x, target, 1.0, &mut ws, &mut grads, Some(&mut input_grad))?;
        Ok(Backward {
            prediction,
            loss,
            grads,
            input_grad,
        })
    }

    /// Adds `scale · ∂(f(x)-target)²/∂θ` into `grads` (and into `input_grad`
    /// when given). Returns the prediction and the unscaled squared error.
    pub fn accumulate(
        &self,
        x: &[f64],
        target: f64,
        scale: f64,
        ws: &mut Workspace,
        grads: &mut Gradients,
        input_grad: Option<&mut [f64]>,
    ) -> Result<(f64, f64)> {
        let prediction = self.forward_with(x, ws)?;
        let err = prediction - target;
        let Workspace {
            pre,
            post,
            delta,
            delta_prev,
        } = ws;
        delta[0] = 2.0 * err * scale;
        let mut width = 1;
        let mut input_grad = input_grad;
        for l in (0..self.layers.len()).rev() {
            let layer = &self.layers[l];
            let input: &[f64] = if l == 0 { x } else { &post[l - 1] };
            let cols = layer.weight.cols();
            let g = &mut grads.layers[l];
            for i in 0..width {
                let d = delta[i];
                if d == 0.0 {
                    continue;
                }
                g.bias[i] += d;
                for (gw, a) in g.weight[i * cols..(i + 1) * cols].iter_mut().zip(input) {
                    *gw += d * a;
                }
            }
            if l == 0 && input_grad.is_none() {
                break;
            }
            let prev = &mut delta_prev[..cols];
            prev.iter_mut().for_each(|p| *p = 0.0);
            for i in 0..width {
                let d = delta[i];
                if d == 0.0 {
                    continue;
                }
                for (p, w) in prev.iter_mut().zip(layer.weight.row(i)) {
                    *p += w * d;
                }
            }
            if l == 0 {
                if let Some(out) = input_grad.as_deref_mut() {
                    for (o, p) in out.iter_mut().zip(prev.iter()) {
                        *o += p;
                    }
                }
                break;
            }
            for (p, z) in prev.iter_mut().zip(&pre[l - 1]) {
                if *z <= 0.0 {
                    *p = 0.0;
                }
            }
            core::mem::swap(delta, delta_prev);
            width = cols;
        }
        Ok((prediction, err * err))
    }
}

impl Gradients {
    pub fn zeros_like(params: &MlpParams) -> Self {
        Self {
            layers: params
                .layers
                .iter()
                .map(|l| LayerGrad {
                    weight: vec![0.0; l.weight.data().len()],
                    bias: vec![0.0; l.bias.len()],
                })
                .collect(),
        }
    }

    pub fn reset(&mut self) {
        for l in &mut self.layers {
            l.weight.iter_mut().for_each(|g| *g = 0.0);
            l.bias.iter_mut().for_each(|g| *g = 0.0);
        }
    }

    /// Weight then bias buffer for each layer, in layer order.
    pub fn buffers(&self) -> impl Iterator<Item = &[f64]> {
        self.layers
            .iter()
            .flat_map(|l| [l.weight.as_slice(), l.bias.as_slice()])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded;

    #[test]
    fn zero_network_outputs_zero_and_has_zero_gradients() {
        let net = MlpParams::zeros(3, 8, 4).unwrap();
        assert_eq!(net.forward(&[1.0, -2.0, 3.0]).unwrap(), 0.0);
        let back = net.backward(&[1.0, -2.0, 3.0], 0.0).unwrap();
        assert!(back.grads.buffers().all(|b| b.iter().all(|g| *g == 0.0)));
        assert!(back.input_grad.iter().all(|g| *g == 0.0));
    }

    #[test]
    fn single_affine_layer() {
        let net = MlpParams::new(vec![Layer {
            weight: DenseMatrix::from_vec(1, 1, vec![2.0]).unwrap(),
            bias: vec![0.5],
        }])
        .unwrap();
        assert_eq!(net.forward(&[3.0]).unwrap(), 6.5);
    }

    #[test]
    fn single_layer_hand_gradient() {
        let net = MlpParams::new(vec![Layer {
            weight: DenseMatrix::from_vec(1, 1, vec![1.0]).unwrap(),
            bias: vec![0.0],
        }])
        .unwrap();
        let back = net.backward(&[2.0], 1.0).unwrap();
        assert_eq!(back.loss, 1.0);
        assert_eq!(back.grads.layers[0].weight, vec![4.0]);
        assert_eq!(back.grads.layers[0].bias, vec![2.0]);
        assert_eq!(back.input_grad, vec![2.0]);
    }

    #[test]
    fn seeded_two_four_one_matches_scripted_forward() {
        let net = MlpParams::init(2, 4, 2, &mut seeded(42)).unwrap();
        let x = [1.0, 1.0];
        // independent scripted pass over the same weights
        let l0 = &net.layers()[0];
        let l1 = &net.layers()[1];
        let mut hidden = [0.0f64; 4];
        for (i, h) in hidden.iter_mut().enumerate() {
            let z = l0.weight.get(i, 0) * x[0] + l0.weight.get(i, 1) * x[1] + l0.bias[i];
            *h = if z > 0.0 { z } else { 0.0 };
        }
        let mut expected = l1.bias[0];
        for (i, h) in hidden.iter().enumerate() {
            expected += l1.weight.get(0, i) * h;
        }
        let got = net.forward(&x).unwrap();
        assert!((got - expected).abs() < 1e-15, "{got} vs {expected}");
    }

    #[test]
    fn rejects_bad_shapes() {
        let net = MlpParams::zeros(3, 4, 2).unwrap();
        assert!(matches!(net.forward(&[1.0]), Err(Error::Shape { .. })));
        let bad = MlpParams::new(vec![
            Layer {
                weight: DenseMatrix::zeros(4, 3),
                bias: vec![0.0; 4],
            },
            Layer {
                weight: DenseMatrix::zeros(1, 5),
                bias: vec![0.0],
            },
        ]);
        assert!(bad.is_err());
        assert!(MlpParams::zeros(3, 4, 0).is_err());
    }

    #[test]
    fn init_respects_glorot_bounds() {
        let net = MlpParams::init(20, 128, 4, &mut seeded(1)).unwrap();
        assert_eq!(net.depth(), 4);
        for layer in net.layers() {
            let limit = libm::sqrt(6.0 / (layer.weight.rows() + layer.weight.cols()) as f64);
            assert!(layer.weight.data().iter().all(|w| w.abs() <= limit));
            assert!(layer.bias.iter().all(|b| *b == 0.0));
        }
    }
}
