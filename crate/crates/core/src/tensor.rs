//! Dense row-major tensors and named parameter storage.
//!
//! Everything is 64-bit: gradient checks at 1e-4 relative tolerance are only
//! meaningful in double precision.

use std::collections::HashMap;

use crate::error::{Error, Result};

/// Dense tensor with row-major 64-bit data.
#[derive(Clone, Debug, PartialEq)]
pub struct Tensor {
    shape: Vec<usize>,
    data: Vec<f64>,
}

impl Tensor {
    pub fn zeros(shape: &[usize]) -> Self {
        let len = shape.iter().product();
        Tensor {
            shape: shape.to_vec(),
            data: vec![0.0; len],
        }
    }

    pub fn from_vec(shape: &[usize], data: Vec<f64>) -> Result<Self> {
        let expected: usize = shape.iter().product();
        if expected != data.len() {
            return Err(Error::Dimension(format!(
                "shape {:?} implies {} elements, got {}",
                shape,
                expected,
                data.len()
            )));
        }
        if shape.iter().any(|&e| e == 0) {
            return Err(Error::Dimension(format!("zero extent in shape {:?}", shape)));
        }
        Ok(Tensor {
            shape: shape.to_vec(),
            data,
        })
    }

    /// 1-D tensor from a flat vector.
    pub fn vector(data: Vec<f64>) -> Self {
        let n = data.len();
        Tensor {
            shape: vec![n],
            data,
        }
    }

    /// 2-D tensor from row-major data.
    pub fn matrix(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        Tensor::from_vec(&[rows, cols], data)
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn rows(&self) -> usize {
        self.shape[0]
    }

    pub fn cols(&self) -> usize {
        self.shape[1]
    }

    /// Element access for 2-D tensors.
    #[inline]
    pub fn at(&self, r: usize, c: usize) -> f64 {
        debug_assert_eq!(self.shape.len(), 2);
        self.data[r * self.shape[1] + c]
    }

    #[inline]
    pub fn at_mut(&mut self, r: usize, c: usize) -> &mut f64 {
        debug_assert_eq!(self.shape.len(), 2);
        &mut self.data[r * self.shape[1] + c]
    }

    /// Copy of column `j` of a 2-D tensor.
    pub fn column(&self, j: usize) -> Vec<f64> {
        debug_assert_eq!(self.shape.len(), 2);
        let (rows, cols) = (self.shape[0], self.shape[1]);
        (0..rows).map(|r| self.data[r * cols + j]).collect()
    }

    /// Row `r` of a 2-D tensor as a slice.
    pub fn row(&self, r: usize) -> &[f64] {
        debug_assert_eq!(self.shape.len(), 2);
        let cols = self.shape[1];
        &self.data[r * cols..(r + 1) * cols]
    }

    pub fn all_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub fn fill(&mut self, value: f64) {
        self.data.iter_mut().for_each(|v| *v = value);
    }
}

/// Handle into a [`ParameterStore`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct ParamId(pub(crate) usize);

/// A learnable tensor with an accumulated gradient of the same shape.
#[derive(Clone, Debug)]
pub struct Parameter {
    pub name: String,
    pub value: Tensor,
    pub grad: Tensor,
}

/// Ordered collection of uniquely named parameters.
///
/// Iteration follows insertion order, so two stores built by the same
/// construction sequence iterate identically; checkpoints and optimizer state
/// rely on that.
#[derive(Clone, Debug, Default)]
pub struct ParameterStore {
    params: Vec<Parameter>,
    by_name: HashMap<String, usize>,
}

impl ParameterStore {
    pub fn new() -> Self {
        ParameterStore::default()
    }

    pub fn add(&mut self, name: &str, value: Tensor) -> Result<ParamId> {
        if self.by_name.contains_key(name) {
            return Err(Error::DuplicateParameter(name.to_string()));
        }
        let grad = Tensor::zeros(value.shape());
        let idx = self.params.len();
        self.params.push(Parameter {
            name: name.to_string(),
            value,
            grad,
        });
        self.by_name.insert(name.to_string(), idx);
        Ok(ParamId(idx))
    }

    pub fn id(&self, name: &str) -> Result<ParamId> {
        self.by_name
            .get(name)
            .map(|&i| ParamId(i))
            .ok_or_else(|| Error::UnknownParameter(name.to_string()))
    }

    pub fn value(&self, id: ParamId) -> &Tensor {
        &self.params[id.0].value
    }

    pub fn value_mut(&mut self, id: ParamId) -> &mut Tensor {
        &mut self.params[id.0].value
    }

    pub fn grad(&self, id: ParamId) -> &Tensor {
        &self.params[id.0].grad
    }

    pub fn grad_mut(&mut self, id: ParamId) -> &mut Tensor {
        &mut self.params[id.0].grad
    }

    pub fn param(&self, id: ParamId) -> &Parameter {
        &self.params[id.0]
    }

    pub fn zero_grads(&mut self) {
        for p in &mut self.params {
            p.grad.fill(0.0);
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = &Parameter> {
        self.params.iter()
    }

    pub fn ids(&self) -> impl Iterator<Item = ParamId> {
        (0..self.params.len()).map(ParamId)
    }

    pub fn len(&self) -> usize {
        self.params.len()
    }

    pub fn is_empty(&self) -> bool {
        self.params.is_empty()
    }

    /// Total number of scalar coordinates across all parameters.
    pub fn n_coords(&self) -> usize {
        self.params.iter().map(|p| p.value.len()).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn from_vec_rejects_bad_shape() {
        assert!(Tensor::from_vec(&[2, 2], vec![1.0, 2.0, 3.0]).is_err());
        assert!(Tensor::from_vec(&[0], vec![]).is_err());
    }

    #[test]
    fn store_rejects_duplicate_names() {
        let mut store = ParameterStore::new();
        store.add("w", Tensor::zeros(&[2])).unwrap();
        assert!(store.add("w", Tensor::zeros(&[2])).is_err());
    }

    #[test]
    fn zero_grads_clears_everything() {
        let mut store = ParameterStore::new();
        let id = store.add("w", Tensor::zeros(&[3])).unwrap();
        store.grad_mut(id).data_mut()[1] = 5.0;
        store.zero_grads();
        assert!(store.grad(id).data().iter().all(|&g| g == 0.0));
    }

    #[test]
    fn iteration_order_matches_construction_order() {
        let build = || {
            let mut s = ParameterStore::new();
            s.add("b", Tensor::zeros(&[1])).unwrap();
            s.add("a", Tensor::zeros(&[1])).unwrap();
            s.add("c", Tensor::zeros(&[1])).unwrap();
            s
        };
        let names1: Vec<_> = build().iter().map(|p| p.name.clone()).collect();
        let names2: Vec<_> = build().iter().map(|p| p.name.clone()).collect();
        assert_eq!(names1, vec!["b", "a", "c"]);
        assert_eq!(names1, names2);
    }
}
