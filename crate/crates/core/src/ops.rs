//! Elementary tensor and vector operations used throughout the model.

use crate::error::{Error, Result};
use crate::tensor::Tensor;

/// Standard matrix product of two 2-D tensors.
pub fn matmul(a: &Tensor, b: &Tensor) -> Result<Tensor> {
    if a.shape().len() != 2 || b.shape().len() != 2 {
        return Err(Error::Dimension("matmul expects 2-D tensors".into()));
    }
    let (m, k) = (a.rows(), a.cols());
    let (k2, n) = (b.rows(), b.cols());
    if k != k2 {
        return Err(Error::Dimension(format!(
            "matmul inner extents {} and {} disagree",
            k, k2
        )));
    }
    let mut out = Tensor::zeros(&[m, n]);
    for i in 0..m {
        for l in 0..k {
            let a_il = a.at(i, l);
            if a_il == 0.0 {
                continue;
            }
            let b_row = b.row(l);
            let out_row = &mut out.data_mut()[i * n..(i + 1) * n];
            for j in 0..n {
                out_row[j] += a_il * b_row[j];
            }
        }
    }
    Ok(out)
}

/// Matrix-vector product `w x` for a 2-D weight and flat input.
pub fn matvec(w: &Tensor, x: &[f64]) -> Vec<f64> {
    debug_assert_eq!(w.cols(), x.len());
    let (rows, cols) = (w.rows(), w.cols());
    let mut out = vec![0.0; rows];
    for r in 0..rows {
        let row = &w.data()[r * cols..(r + 1) * cols];
        let mut acc = 0.0;
        for c in 0..cols {
            acc += row[c] * x[c];
        }
        out[r] = acc;
    }
    out
}

/// Transposed matrix-vector product `w^T y`.
pub fn matvec_t(w: &Tensor, y: &[f64]) -> Vec<f64> {
    debug_assert_eq!(w.rows(), y.len());
    let (rows, cols) = (w.rows(), w.cols());
    let mut out = vec![0.0; cols];
    for r in 0..rows {
        let y_r = y[r];
        if y_r == 0.0 {
            continue;
        }
        let row = &w.data()[r * cols..(r + 1) * cols];
        for c in 0..cols {
            out[c] += row[c] * y_r;
        }
    }
    out
}

/// Accumulate the outer product `dy x^T` into a 2-D gradient tensor.
pub fn outer_add(grad: &mut Tensor, dy: &[f64], x: &[f64]) {
    debug_assert_eq!(grad.rows(), dy.len());
    debug_assert_eq!(grad.cols(), x.len());
    let cols = grad.cols();
    let data = grad.data_mut();
    for (r, &d) in dy.iter().enumerate() {
        if d == 0.0 {
            continue;
        }
        let row = &mut data[r * cols..(r + 1) * cols];
        for (c, &xc) in x.iter().enumerate() {
            row[c] += d * xc;
        }
    }
}

/// Accumulate a flat delta into a 1-D gradient tensor.
pub fn vec_add(grad: &mut Tensor, d: &[f64]) {
    debug_assert_eq!(grad.len(), d.len());
    for (g, &v) in grad.data_mut().iter_mut().zip(d) {
        *g += v;
    }
}

/// Accumulate a delta into column `j` of a 2-D gradient tensor.
pub fn column_add(grad: &mut Tensor, j: usize, d: &[f64]) {
    debug_assert_eq!(grad.rows(), d.len());
    let cols = grad.cols();
    let data = grad.data_mut();
    for (r, &v) in d.iter().enumerate() {
        data[r * cols + j] += v;
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn l2_norm(x: &[f64]) -> f64 {
    dot(x, x).sqrt()
}

#[inline]
pub fn sigmoid_scalar(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// Elementwise logistic sigmoid.
pub fn sigmoid(x: &Tensor) -> Tensor {
    let mut out = x.clone();
    out.data_mut().iter_mut().for_each(|v| *v = sigmoid_scalar(*v));
    out
}

/// Elementwise hyperbolic tangent.
pub fn tanh(x: &Tensor) -> Tensor {
    let mut out = x.clone();
    out.data_mut().iter_mut().for_each(|v| *v = v.tanh());
    out
}

pub fn sigmoid_vec(x: &[f64]) -> Vec<f64> {
    x.iter().map(|&v| sigmoid_scalar(v)).collect()
}

pub fn tanh_vec(x: &[f64]) -> Vec<f64> {
    x.iter().map(|&v| v.tanh()).collect()
}

/// Numerically stable softmax over a flat vector (max subtraction).
pub fn softmax(x: &[f64]) -> Vec<f64> {
    let max = x.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = x.iter().map(|&v| (v - max).exp()).collect();
    let sum: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / sum).collect()
}

/// log(sum(exp(x))), stable under large magnitudes.
pub fn log_sum_exp(x: &[f64]) -> f64 {
    let max = x.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    max + x.iter().map(|&v| (v - max).exp()).sum::<f64>().ln()
}

/// x / max(||x||_2, eps). The zero vector maps to itself.
pub fn l2_normalize(x: &[f64], eps: f64) -> Vec<f64> {
    debug_assert!(eps > 0.0);
    let n = l2_norm(x).max(eps);
    x.iter().map(|&v| v / n).collect()
}

/// Backward through `y = x / max(||x||, eps)` given upstream `dy`.
pub fn l2_normalize_backward(x: &[f64], dy: &[f64], eps: f64) -> Vec<f64> {
    let norm = l2_norm(x);
    if norm < eps {
        // Clamped branch: y = x / eps is linear.
        return dy.iter().map(|&d| d / eps).collect();
    }
    let y: Vec<f64> = x.iter().map(|&v| v / norm).collect();
    let proj = dot(&y, dy);
    y.iter()
        .zip(dy)
        .map(|(&yi, &di)| (di - yi * proj) / norm)
        .collect()
}

/// Cosine similarity of two nonzero vectors.
pub fn cosine(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::Dimension(format!(
            "cosine over lengths {} and {}",
            a.len(),
            b.len()
        )));
    }
    let (na, nb) = (l2_norm(a), l2_norm(b));
    if na == 0.0 || nb == 0.0 {
        return Err(Error::Degenerate("cosine of a zero vector".into()));
    }
    Ok(dot(a, b) / (na * nb))
}

/// Gradients of `cosine(a, b)` with respect to both arguments, scaled by `upstream`.
pub fn cosine_backward(a: &[f64], b: &[f64], upstream: f64) -> (Vec<f64>, Vec<f64>) {
    let na = l2_norm(a);
    let nb = l2_norm(b);
    let c = dot(a, b) / (na * nb);
    let da: Vec<f64> = a
        .iter()
        .zip(b)
        .map(|(&ai, &bi)| upstream * (bi / (na * nb) - c * ai / (na * na)))
        .collect();
    let db: Vec<f64> = a
        .iter()
        .zip(b)
        .map(|(&ai, &bi)| upstream * (ai / (na * nb) - c * bi / (nb * nb)))
        .collect();
    (da, db)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{seeded_rng, uniform_vec};
    use proptest::prelude::*;

    #[test]
    fn matmul_identity() {
        let a = Tensor::matrix(2, 2, vec![1.0, 0.0, 0.0, 1.0]).unwrap();
        let b = Tensor::matrix(2, 1, vec![3.0, 4.0]).unwrap();
        let c = matmul(&a, &b).unwrap();
        assert_eq!(c.data(), &[3.0, 4.0]);
    }

    #[test]
    fn matmul_hand_arithmetic() {
        let a = Tensor::matrix(1, 2, vec![1.0, 2.0]).unwrap();
        let b = Tensor::matrix(2, 1, vec![3.0, 4.0]).unwrap();
        let c = matmul(&a, &b).unwrap();
        assert_eq!(c.data(), &[11.0]);
    }

    #[test]
    fn matmul_matches_triple_loop_oracle() {
        let mut rng = seeded_rng(91);
        let a = Tensor::matrix(5, 7, uniform_vec(&mut rng, 35, 1.0)).unwrap();
        let b = Tensor::matrix(7, 3, uniform_vec(&mut rng, 21, 1.0)).unwrap();
        let c = matmul(&a, &b).unwrap();
        // Independent entry-wise oracle.
        for i in 0..5 {
            for j in 0..3 {
                let mut expect = 0.0;
                for l in 0..7 {
                    expect += a.at(i, l) * b.at(l, j);
                }
                assert!((c.at(i, j) - expect).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn matmul_rejects_mismatched_inner_extents() {
        let a = Tensor::zeros(&[2, 3]);
        let b = Tensor::zeros(&[2, 2]);
        assert!(matmul(&a, &b).is_err());
    }

    #[test]
    fn sigmoid_at_zero() {
        let t = Tensor::vector(vec![0.0]);
        assert_eq!(sigmoid(&t).data()[0], 0.5);
    }

    #[test]
    fn softmax_symmetry() {
        let s = softmax(&[0.0, 0.0, 0.0]);
        for v in s {
            assert!((v - 1.0 / 3.0).abs() < 1e-15);
        }
    }

    #[test]
    fn softmax_large_logits_no_overflow() {
        let s = softmax(&[1000.0, 0.0]);
        assert!((s[0] - 1.0).abs() < 1e-12);
        assert!(s[1].abs() < 1e-12);
        assert!(s.iter().all(|v| v.is_finite()));
    }

    #[test]
    fn l2_normalize_hand_case() {
        let y = l2_normalize(&[3.0, 4.0], 1e-8);
        assert!((y[0] - 0.6).abs() < 1e-15);
        assert!((y[1] - 0.8).abs() < 1e-15);
    }

    #[test]
    fn l2_normalize_zero_vector_maps_to_itself() {
        let y = l2_normalize(&[0.0, 0.0], 1e-8);
        assert_eq!(y, vec![0.0, 0.0]);
    }

    #[test]
    fn l2_normalize_unit_norm_on_random_vector() {
        let mut rng = seeded_rng(7);
        let x = uniform_vec(&mut rng, 1024, 1.0);
        let y = l2_normalize(&x, 1e-8);
        assert!((l2_norm(&y) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn cosine_basic_cases() {
        let u = vec![0.3, -0.7, 2.0];
        assert!((cosine(&u, &u).unwrap() - 1.0).abs() < 1e-12);
        assert!((cosine(&[1.0, 0.0], &[0.0, 1.0]).unwrap()).abs() < 1e-15);
        assert!(cosine(&[0.0, 0.0], &[1.0, 0.0]).is_err());
    }

    #[test]
    fn cosine_symmetry_on_random_pairs() {
        let mut rng = seeded_rng(11);
        for _ in 0..100 {
            let a = uniform_vec(&mut rng, 16, 1.0);
            let b = uniform_vec(&mut rng, 16, 1.0);
            let ab = cosine(&a, &b).unwrap();
            let ba = cosine(&b, &a).unwrap();
            assert!((ab - ba).abs() < 1e-14);
            assert!((-1.0..=1.0).contains(&ab));
        }
    }

    proptest! {
        #[test]
        fn softmax_is_probability_vector(xs in proptest::collection::vec(-30.0f64..30.0, 1..20)) {
            let s = softmax(&xs);
            prop_assert!(s.iter().all(|&v| v >= 0.0));
            prop_assert!((s.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }

        #[test]
        fn softmax_shift_invariance(xs in proptest::collection::vec(-20.0f64..20.0, 2..16), c in -50.0f64..50.0) {
            let shifted: Vec<f64> = xs.iter().map(|&v| v + c).collect();
            let a = softmax(&xs);
            let b = softmax(&shifted);
            let max_diff = a.iter().zip(&b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
            prop_assert!(max_diff < 1e-12);
        }

        #[test]
        fn l2_normalize_scale_invariance(xs in proptest::collection::vec(-5.0f64..5.0, 2..12), c in 0.1f64..100.0) {
            prop_assume!(l2_norm(&xs) >= 1e-6);
            let scaled: Vec<f64> = xs.iter().map(|&v| c * v).collect();
            let a = l2_normalize(&xs, 1e-8);
            let b = l2_normalize(&scaled, 1e-8);
            let max_diff = a.iter().zip(&b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
            prop_assert!(max_diff < 1e-12);
        }
    }
}
