//! Adaptive moment estimation over a subset of store parameters.

use crate::tensor::{ParamId, ParameterStore};

pub struct Adam {
    lr: f64,
    beta1: f64,
    beta2: f64,
    eps: f64,
    step: u64,
    ids: Vec<ParamId>,
    m: Vec<Vec<f64>>,
    v: Vec<Vec<f64>>,
}

impl Adam {
    pub fn new(store: &ParameterStore, ids: &[ParamId], lr: f64) -> Self {
        let m = ids.iter().map(|&id| vec![0.0; store.value(id).len()]).collect();
        let v = ids.iter().map(|&id| vec![0.0; store.value(id).len()]).collect();
        Adam {
            lr,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            step: 0,
            ids: ids.to_vec(),
            m,
            v,
        }
    }

    pub fn lr(&self) -> f64 {
        self.lr
    }

    /// Apply one update from the gradients currently accumulated in the store.
    pub fn step(&mut self, store: &mut ParameterStore) {
        self.step += 1;
        let bc1 = 1.0 - self.beta1.powi(self.step as i32);
        let bc2 = 1.0 - self.beta2.powi(self.step as i32);
        for (slot, &id) in self.ids.iter().enumerate() {
            let grads = store.grad(id).data().to_vec();
            let m = &mut self.m[slot];
            let v = &mut self.v[slot];
            let values = store.value_mut(id).data_mut();
            for i in 0..grads.len() {
                let g = grads[i];
                m[i] = self.beta1 * m[i] + (1.0 - self.beta1) * g;
                v[i] = self.beta2 * v[i] + (1.0 - self.beta2) * g * g;
                let m_hat = m[i] / bc1;
                let v_hat = v[i] / bc2;
                values[i] -= self.lr * m_hat / (v_hat.sqrt() + self.eps);
            }
        }
    }
}
