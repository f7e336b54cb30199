//! AdamW: bias-corrected adaptive moments with decoupled weight decay.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

use crate::mlp::{Gradients, MlpParams};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdamWConfig {
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    pub weight_decay: f64,
    /// Whether bias vectors are decayed along with weights.
    pub decay_bias: bool,
}

impl Default for AdamWConfig {
    fn default() -> Self {
        Self {
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            weight_decay: 0.0005,
            decay_bias: false,
        }
    }
}

/// Moment buffers for an ordered list of parameter groups.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizerState {
    pub step: u64,
    pub first_moment: Vec<Vec<f64>>,
    pub second_moment: Vec<Vec<f64>>,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    pub weight_decay: f64,
}

/// A parameter slice, its gradient, and whether decay applies to it.
pub struct ParamGroup<'a> {
    pub values: &'a mut [f64],
    pub grads: &'a [f64],
    pub decay: bool,
}

impl OptimizerState {
    pub fn new(group_sizes: &[usize], config: &AdamWConfig) -> Self {
        Self {
            step: 0,
            first_moment: group_sizes.iter().map(|&n| vec![0.0; n]).collect(),
            second_moment: group_sizes.iter().map(|&n| vec![0.0; n]).collect(),
            beta1: config.beta1,
            beta2: config.beta2,
            eps: config.eps,
            weight_decay: config.weight_decay,
        }
    }

    /// Optimizer state for every weight and bias of `params`.
    pub fn for_mlp(params: &MlpParams, config: &AdamWConfig) -> Self {
        let sizes: Vec<usize> = params
            .layers()
            .iter()
            .flat_map(|l| [l.weight.data().len(), l.bias.len()])
            .collect();
        Self::new(&sizes, config)
    }

    /// One update over all groups. Gradients are checked for finiteness
    /// before any parameter moves; the error carries the flat index.
    pub fn step(&mut self, groups: &mut [ParamGroup<'_>], lr: f64) -> Result<()> {
        if !(lr >= 0.0) {
            return Err(Error::Argument(format!(
                "learning rate must be >= 0, got {lr}"
            )));
        }
        if groups.len() != self.first_moment.len() {
            return Err(Error::Shape {
                context: "optimizer parameter groups",
                expected: self.first_moment.len(),
                found: groups.len(),
            });
        }
        let mut offset = 0;
        for (g, m) in groups.iter().zip(&self.first_moment) {
            if g.values.len() != m.len() || g.grads.len() != m.len() {
                return Err(Error::Shape {
                    context: "optimizer group size",
                    expected: m.len(),
                    found: g.grads.len().min(g.values.len()),
                });
            }
            if let Some(i) = g.grads.iter().position(|v| !v.is_finite()) {
                return Err(Error::Numeric {
                    context: "gradient".into(),
                    index: offset + i,
                });
            }
            offset += m.len();
        }

        self.step += 1;
        let t = self.step as f64;
        let bc1 = 1.0 - libm::pow(self.beta1, t);
        let bc2 = 1.0 - libm::pow(self.beta2, t);
        let (b1, b2, eps, wd) = (self.beta1, self.beta2, self.eps, self.weight_decay);
        for ((group, m), v) in groups
            .iter_mut()
            .zip(&mut self.first_moment)
            .zip(&mut self.second_moment)
        {
            let decay = if group.decay { wd } else { 0.0 };
            for (((theta, &g), m), v) in group
                .values
                .iter_mut()
                .zip(group.grads)
                .zip(m.iter_mut())
                .zip(v.iter_mut())
            {
                *m = b1 * *m + (1.0 - b1) * g;
                *v = b2 * *v + (1.0 - b2) * g * g;
                let m_hat = *m / bc1;
                let v_hat = *v / bc2;
                *theta -= lr * (m_hat / (libm::sqrt(v_hat) + eps) + decay * *theta);
            }
        }
        Ok(())
    }
}

/// MLP parameter groups in the order used by [`OptimizerState::for_mlp`].
pub fn mlp_groups<'a>(
    params: &'a mut MlpParams,
    grads: &'a Gradients,
    decay_bias: bool,
) -> Vec<ParamGroup<'a>> {
    let mut groups = Vec::with_capacity(2 * params.depth());
    for (layer, g) in params.layers_mut().iter_mut().zip(&grads.layers) {
        groups.push(ParamGroup {
            values: layer.weight.data_mut(),
            grads: &g.weight,
            decay: true,
        });
        groups.push(ParamGroup {
            values: &mut layer.bias,
            grads: &g.bias,
            decay: decay_bias,
        });
    }
    groups
}

/// Applies one AdamW update to every MLP parameter. Biases are not decayed.
pub fn adamw_step(
    params: &mut MlpParams,
    grads: &Gradients,
    opt: &mut OptimizerState,
    lr: f64,
) -> Result<()> {
    let mut groups = mlp_groups(params, grads, false);
    opt.step(&mut groups, lr)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scalar_step(theta: f64, grad: f64, lr: f64, wd: f64) -> f64 {
        let config = AdamWConfig {
            weight_decay: wd,
            ..AdamWConfig::default()
        };
        let mut opt = OptimizerState::new(&[1], &config);
        let mut values = [theta];
        opt.step(
            &mut [ParamGroup {
                values: &mut values,
                grads: &[grad],
                decay: true,
            }],
            lr,
        )
        .unwrap();
        assert_eq!(opt.step, 1);
        values[0]
    }

    #[test]
    fn zero_gradient_without_decay_is_identity() {
        assert_eq!(scalar_step(1.25, 0.0, 0.01, 0.0), 1.25);
    }

    #[test]
    fn first_step_moves_by_learning_rate() {
        // m̂ = g, v̂ = g², so the step is lr·g/(|g|+ε)
        let expected = 1.0 - 0.01 * 0.5 / (0.5 + 1e-8);
        let got = scalar_step(1.0, 0.5, 0.01, 0.0);
        assert!((got - expected).abs() < 1e-15);
        assert!((got - 0.99).abs() < 1e-9);
    }

    #[test]
    fn decay_only_step() {
        let got = scalar_step(1.0, 0.0, 0.01, 0.0005);
        assert!((got - 0.999995).abs() < 1e-15);
    }

    #[test]
    fn non_finite_gradient_reports_flat_index() {
        let mut opt = OptimizerState::new(&[2, 3], &AdamWConfig::default());
        let mut a = [0.0; 2];
        let mut b = [0.0; 3];
        let err = opt
            .step(
                &mut [
                    ParamGroup {
                        values: &mut a,
                        grads: &[0.0, 0.0],
                        decay: true,
                    },
                    ParamGroup {
                        values: &mut b,
                        grads: &[0.0, f64::INFINITY, 0.0],
                        decay: true,
                    },
                ],
                0.1,
            )
            .unwrap_err();
        assert_eq!(
            err,
            Error::Numeric {
                context: "gradient".into(),
                index: 3
            }
        );
        assert_eq!(opt.step, 0);
    }

    #[test]
    fn minimizes_a_parabola() {
        use crate::schedule::{cosine_lr, LrSchedule};
        let config = AdamWConfig {
            weight_decay: 0.0,
            ..AdamWConfig::default()
        };
        let schedule = LrSchedule::new(0.1, 0.0, 200).unwrap();
        let mut opt = OptimizerState::new(&[1], &config);
        let mut theta = [1.0];
        for epoch in 0..200 {
            let grad = [2.0 * theta[0]];
            opt.step(
                &mut [ParamGroup {
                    values: &mut theta,
                    grads: &grad,
                    decay: true,
                }],
                cosine_lr(&schedule, epoch).unwrap(),
            )
            .unwrap();
        }
        assert!(theta[0].abs() < 1e-2, "theta = {}", theta[0]);
    }
}
