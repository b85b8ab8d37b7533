//! LSTM cell with explicit forward caches and a hand-written backward pass.
//!
//! The same cell form drives both the sentence encoder and the caption
//! generator: four gates over the current input and previous hidden state,
//!   c_t = f_t * c_{t-1} + i_t * chat_t,   h_t = o_t * tanh(c_t).

use crate::error::{Error, Result};
use crate::ops::{matvec, matvec_t, outer_add, sigmoid_vec, tanh_vec, vec_add};
use crate::rng::{uniform_tensor, Prng, INIT_SCALE};
use crate::tensor::{ParamId, ParameterStore, Tensor};

/// Parameter handles for one LSTM cell.
#[derive(Clone, Copy, Debug)]
pub struct LstmCell {
    pub input_dim: usize,
    pub hidden_dim: usize,
    pub w_xi: ParamId,
    pub w_hi: ParamId,
    pub w_xf: ParamId,
    pub w_hf: ParamId,
    pub w_xo: ParamId,
    pub w_ho: ParamId,
    pub w_xc: ParamId,
    pub w_hc: ParamId,
    pub b_i: ParamId,
    pub b_f: ParamId,
    pub b_o: ParamId,
    pub b_c: ParamId,
}

/// Cached activations of one step, kept for the backward pass.
#[derive(Clone, Debug)]
pub struct LstmStep {
    pub x: Vec<f64>,
    pub h_prev: Vec<f64>,
    pub c_prev: Vec<f64>,
    pub i: Vec<f64>,
    pub f: Vec<f64>,
    pub o: Vec<f64>,
    pub chat: Vec<f64>,
    pub c: Vec<f64>,
    pub h: Vec<f64>,
}

impl LstmCell {
    pub fn new(
        store: &mut ParameterStore,
        prefix: &str,
        input_dim: usize,
        hidden_dim: usize,
        rng: &mut Prng,
    ) -> Result<Self> {
        let mut mat = |store: &mut ParameterStore, name: &str, rows: usize, cols: usize, rng: &mut Prng| {
            store.add(&format!("{prefix}.{name}"), uniform_tensor(rng, &[rows, cols], INIT_SCALE))
        };
        let w_xi = mat(store, "w_xi", hidden_dim, input_dim, rng)?;
        let w_hi = mat(store, "w_hi", hidden_dim, hidden_dim, rng)?;
        let w_xf = mat(store, "w_xf", hidden_dim, input_dim, rng)?;
        let w_hf = mat(store, "w_hf", hidden_dim, hidden_dim, rng)?;
        let w_xo = mat(store, "w_xo", hidden_dim, input_dim, rng)?;
        let w_ho = mat(store, "w_ho", hidden_dim, hidden_dim, rng)?;
        let w_xc = mat(store, "w_xc", hidden_dim, input_dim, rng)?;
        let w_hc = mat(store, "w_hc", hidden_dim, hidden_dim, rng)?;
        let b_i = store.add(&format!("{prefix}.b_i"), Tensor::zeros(&[hidden_dim]))?;
        let b_f = store.add(&format!("{prefix}.b_f"), Tensor::zeros(&[hidden_dim]))?;
        let b_o = store.add(&format!("{prefix}.b_o"), Tensor::zeros(&[hidden_dim]))?;
        let b_c = store.add(&format!("{prefix}.b_c"), Tensor::zeros(&[hidden_dim]))?;
        Ok(LstmCell {
            input_dim,
            hidden_dim,
            w_xi,
            w_hi,
            w_xf,
            w_hf,
            w_xo,
            w_ho,
            w_xc,
            w_hc,
            b_i,
            b_f,
            b_o,
            b_c,
        })
    }

    pub fn ids(&self) -> Vec<ParamId> {
        vec![
            self.w_xi, self.w_hi, self.w_xf, self.w_hf, self.w_xo, self.w_ho, self.w_xc,
            self.w_hc, self.b_i, self.b_f, self.b_o, self.b_c,
        ]
    }

    /// One forward step from `(h_prev, c_prev)` consuming input `x`.
    pub fn step(
        &self,
        store: &ParameterStore,
        x: &[f64],
        h_prev: &[f64],
        c_prev: &[f64],
    ) -> Result<LstmStep> {
        if x.len() != self.input_dim || h_prev.len() != self.hidden_dim || c_prev.len() != self.hidden_dim {
            return Err(Error::Dimension(format!(
                "lstm step got x:{} h:{} c:{}, expects x:{} h:{} c:{}",
                x.len(),
                h_prev.len(),
                c_prev.len(),
                self.input_dim,
                self.hidden_dim,
                self.hidden_dim
            )));
        }
        let gate = |wx: ParamId, wh: ParamId, b: ParamId| -> Vec<f64> {
            let mut z = matvec(store.value(wx), x);
            let zh = matvec(store.value(wh), h_prev);
            let bias = store.value(b).data();
            for j in 0..self.hidden_dim {
                z[j] += zh[j] + bias[j];
            }
            z
        };
        let i = sigmoid_vec(&gate(self.w_xi, self.w_hi, self.b_i));
        let f = sigmoid_vec(&gate(self.w_xf, self.w_hf, self.b_f));
        let o = sigmoid_vec(&gate(self.w_xo, self.w_ho, self.b_o));
        let chat = tanh_vec(&gate(self.w_xc, self.w_hc, self.b_c));
        let c: Vec<f64> = (0..self.hidden_dim)
            .map(|j| f[j] * c_prev[j] + i[j] * chat[j])
            .collect();
        let h: Vec<f64> = (0..self.hidden_dim).map(|j| o[j] * c[j].tanh()).collect();
        Ok(LstmStep {
            x: x.to_vec(),
            h_prev: h_prev.to_vec(),
            c_prev: c_prev.to_vec(),
            i,
            f,
            o,
            chat,
            c,
            h,
        })
    }

    /// Backward through one step.
    ///
    /// `dh`/`dc` are the upstream gradients on `h_t` and `c_t`. Parameter
    /// gradients accumulate into the store; returns `(dx, dh_prev, dc_prev)`.
    pub fn step_backward(
        &self,
        store: &mut ParameterStore,
        cache: &LstmStep,
        dh: &[f64],
        dc: &[f64],
    ) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
        let n = self.hidden_dim;
        let tanh_c: Vec<f64> = cache.c.iter().map(|&v| v.tanh()).collect();

        let mut dc_total = vec![0.0; n];
        let mut d_o = vec![0.0; n];
        for j in 0..n {
            d_o[j] = dh[j] * tanh_c[j];
            dc_total[j] = dc[j] + dh[j] * cache.o[j] * (1.0 - tanh_c[j] * tanh_c[j]);
        }

        let mut da_i = vec![0.0; n];
        let mut da_f = vec![0.0; n];
        let mut da_o = vec![0.0; n];
        let mut da_c = vec![0.0; n];
        let mut dc_prev = vec![0.0; n];
        for j in 0..n {
            let di = dc_total[j] * cache.chat[j];
            let df = dc_total[j] * cache.c_prev[j];
            let dchat = dc_total[j] * cache.i[j];
            dc_prev[j] = dc_total[j] * cache.f[j];
            da_i[j] = di * cache.i[j] * (1.0 - cache.i[j]);
            da_f[j] = df * cache.f[j] * (1.0 - cache.f[j]);
            da_o[j] = d_o[j] * cache.o[j] * (1.0 - cache.o[j]);
            da_c[j] = dchat * (1.0 - cache.chat[j] * cache.chat[j]);
        }

        let mut dx = vec![0.0; self.input_dim];
        let mut dh_prev = vec![0.0; n];
        for (wx, wh, b, da) in [
            (self.w_xi, self.w_hi, self.b_i, &da_i),
            (self.w_xf, self.w_hf, self.b_f, &da_f),
            (self.w_xo, self.w_ho, self.b_o, &da_o),
            (self.w_xc, self.w_hc, self.b_c, &da_c),
        ] {
            let dxg = matvec_t(store.value(wx), da);
            let dhg = matvec_t(store.value(wh), da);
            for j in 0..self.input_dim {
                dx[j] += dxg[j];
            }
            for j in 0..n {
                dh_prev[j] += dhg[j];
            }
            outer_add(store.grad_mut(wx), da, &cache.x);
            outer_add(store.grad_mut(wh), da, &cache.h_prev);
            vec_add(store.grad_mut(b), da);
        }
        (dx, dh_prev, dc_prev)
    }
}
