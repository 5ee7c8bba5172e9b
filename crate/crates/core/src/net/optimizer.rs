//! Gradient-descent optimizers: plain SGD and Adam.

use super::{Params, Real};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OptimizerKind {
    Sgd,
    Adam,
}

/// Optimizer with state held in the network's precision. Steps are
/// deterministic functions of the state, parameters, and gradients.
#[derive(Debug, Clone)]
pub struct Optimizer<T: Real> {
    kind: OptimizerKind,
    lr: f64,
    beta1: f64,
    beta2: f64,
    eps: f64,
    m: Option<Params<T>>,
    v: Option<Params<T>>,
    t: u64,
}

impl<T: Real> Optimizer<T> {
    pub fn sgd(lr: f64) -> Self {
        Self {
            kind: OptimizerKind::Sgd,
            lr,
            beta1: 0.0,
            beta2: 0.0,
            eps: 0.0,
            m: None,
            v: None,
            t: 0,
        }
    }

    pub fn adam(lr: f64) -> Self {
        Self {
            kind: OptimizerKind::Adam,
            lr,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            m: None,
            v: None,
            t: 0,
        }
    }

    pub fn new(kind: OptimizerKind, lr: f64) -> Self {
        match kind {
            OptimizerKind::Sgd => Self::sgd(lr),
            OptimizerKind::Adam => Self::adam(lr),
        }
    }

    pub fn kind(&self) -> OptimizerKind {
        self.kind
    }

    pub fn learning_rate(&self) -> f64 {
        self.lr
    }

    /// Applies one update in place. Gradient shapes must mirror the
    /// parameter shapes (they come from `loss_grads` of the same network).
    pub fn step(&mut self, params: &mut Params<T>, grads: &Params<T>) {
        match self.kind {
            OptimizerKind::Sgd => {
                let lr = T::from_f64(self.lr);
                for (p, g) in params.arrays_mut().into_iter().zip(grads.arrays()) {
                    assert_eq!(p.len(), g.len(), "gradient shape mismatch");
                    for (pv, gv) in p.iter_mut().zip(g) {
                        *pv -= lr * *gv;
                    }
                }
            }
            OptimizerKind::Adam => {
                if self.m.is_none() {
                    self.m = Some(params.zeros_like());
                    self.v = Some(params.zeros_like());
                }
                self.t += 1;
                let b1 = T::from_f64(self.beta1);
                let b2 = T::from_f64(self.beta2);
                let one = T::one();
                let eps = T::from_f64(self.eps);
                let bias1 = 1.0 - self.beta1.powi(self.t as i32);
                let bias2 = 1.0 - self.beta2.powi(self.t as i32);
                let step_size = T::from_f64(self.lr * bias2.sqrt() / bias1);

                let m = self.m.as_mut().expect("initialized above");
                let v = self.v.as_mut().expect("initialized above");
                let p_arrays = params.arrays_mut();
                let g_arrays = grads.arrays();
                let m_arrays = m.arrays_mut();
                let v_arrays = v.arrays_mut();
                for (((p, g), ma), va) in p_arrays
                    .into_iter()
                    .zip(g_arrays)
                    .zip(m_arrays)
                    .zip(v_arrays)
                {
                    assert_eq!(p.len(), g.len(), "gradient shape mismatch");
                    for i in 0..p.len() {
                        ma[i] = b1 * ma[i] + (one - b1) * g[i];
                        va[i] = b2 * va[i] + (one - b2) * g[i] * g[i];
                        p[i] -= step_size * ma[i] / (va[i].sqrt() + eps);
                    }
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::net::{NetConfig, Network, ValueBinning};

    fn net() -> Network<f64> {
        let cfg = NetConfig {
            input_dim: 3,
            trunk_widths: vec![4],
            head_hidden: vec![],
            actions1: 2,
            actions2: 2,
            binning: ValueBinning::symmetric(1.0, 7),
        };
        Network::new(cfg, 4)
    }

    #[test]
    fn sgd_applies_the_exact_update() {
        let mut n = net();
        let before = n.params.get_coord(0);
        let mut grads = n.params.zeros_like();
        grads.set_coord(0, 2.0);
        let mut opt = Optimizer::<f64>::sgd(0.1);
        opt.step(&mut n.params, &grads);
        assert!((n.params.get_coord(0) - (before - 0.2)).abs() < 1e-15);
    }

    #[test]
    fn zero_gradients_leave_adam_parameters_fixed() {
        let mut n = net();
        let before: Vec<f64> = (0..n.params.coord_count())
            .map(|i| n.params.get_coord(i))
            .collect();
        let grads = n.params.zeros_like();
        let mut opt = Optimizer::<f64>::adam(1e-2);
        for _ in 0..5 {
            opt.step(&mut n.params, &grads);
        }
        for (i, b) in before.iter().enumerate() {
            assert_eq!(n.params.get_coord(i), *b);
        }
    }

    #[test]
    fn identical_states_give_identical_steps() {
        let base = net();
        let mut grads = base.params.zeros_like();
        for i in 0..grads.coord_count() {
            grads.set_coord(i, (i as f64 * 0.37).sin());
        }
        let mut a = base.clone();
        let mut b = base.clone();
        let mut opt_a = Optimizer::<f64>::adam(1e-3);
        let mut opt_b = Optimizer::<f64>::adam(1e-3);
        for _ in 0..3 {
            opt_a.step(&mut a.params, &grads);
            opt_b.step(&mut b.params, &grads);
        }
        for i in 0..a.params.coord_count() {
            assert_eq!(a.params.get_coord(i), b.params.get_coord(i));
        }
    }
}
