//! Multi-label concept prediction over region features.
//!
//! A single linear-sigmoid head is shared by all regions of an image;
//! per-region score vectors are element-wise max-pooled into one confidence
//! vector per image.

use crate::error::{Error, Result};
use crate::ops::{matvec, matvec_t, outer_add, sigmoid_scalar, vec_add};
use crate::optim::Adam;
use crate::rng::{seeded_rng, uniform_tensor, INIT_SCALE};
use crate::tensor::{ParamId, ParameterStore, Tensor};

/// Region feature vectors for one image, all of the same dimension.
#[derive(Clone, Debug)]
pub struct RegionFeatureSet {
    pub image_id: usize,
    pub regions: Vec<Vec<f64>>,
}

impl RegionFeatureSet {
    pub fn new(image_id: usize, regions: Vec<Vec<f64>>) -> Result<Self> {
        if regions.is_empty() {
            return Err(Error::Empty("region feature set".into()));
        }
        let dim = regions[0].len();
        if regions.iter().any(|r| r.len() != dim) {
            return Err(Error::Dimension("regions of unequal dimension".into()));
        }
        Ok(RegionFeatureSet { image_id, regions })
    }
}

/// Multi-hot groundtruth concept labels.
#[derive(Clone, Debug)]
pub struct ConceptLabels(pub Vec<u8>);

impl ConceptLabels {
    pub fn from_indices(indices: &[u32], k: usize) -> Self {
        let mut y = vec![0u8; k];
        for &i in indices {
            y[i as usize] = 1;
        }
        ConceptLabels(y)
    }
}

/// Linear-sigmoid concept head; `weight` is K x I, `bias` is K.
#[derive(Clone, Copy, Debug)]
pub struct ConceptHead {
    pub weight: ParamId,
    pub bias: ParamId,
    pub feature_dim: usize,
    pub n_concepts: usize,
}

impl ConceptHead {
    pub fn new(
        store: &mut ParameterStore,
        prefix: &str,
        feature_dim: usize,
        n_concepts: usize,
        rng: &mut crate::rng::Prng,
    ) -> Result<Self> {
        let weight = store.add(
            &format!("{prefix}.weight"),
            uniform_tensor(rng, &[n_concepts, feature_dim], INIT_SCALE),
        )?;
        let bias = store.add(&format!("{prefix}.bias"), Tensor::zeros(&[n_concepts]))?;
        Ok(ConceptHead {
            weight,
            bias,
            feature_dim,
            n_concepts,
        })
    }

    pub fn ids(&self) -> Vec<ParamId> {
        vec![self.weight, self.bias]
    }

    /// Pre-sigmoid logits for one region feature.
    pub fn logits(&self, store: &ParameterStore, feature: &[f64]) -> Result<Vec<f64>> {
        if feature.len() != self.feature_dim {
            return Err(Error::Dimension(format!(
                "feature of length {}, head expects {}",
                feature.len(),
                self.feature_dim
            )));
        }
        let mut z = matvec(store.value(self.weight), feature);
        for (zi, b) in z.iter_mut().zip(store.value(self.bias).data()) {
            *zi += b;
        }
        Ok(z)
    }

    /// Concept confidences for one region: sigmoid(W f + b).
    pub fn predict_region(&self, store: &ParameterStore, feature: &[f64]) -> Result<Vec<f64>> {
        Ok(self.logits(store, feature)?.iter().map(|&z| sigmoid_scalar(z)).collect())
    }

    /// Pooled confidences for a whole image.
    pub fn predict_image(&self, store: &ParameterStore, set: &RegionFeatureSet) -> Result<Vec<f64>> {
        let scores: Vec<Vec<f64>> = set
            .regions
            .iter()
            .map(|f| self.predict_region(store, f))
            .collect::<Result<_>>()?;
        maxpool_scores(&scores)
    }

    /// Accumulate gradients of `multilabel_loss` for one region example.
    pub fn accumulate_loss_grad(
        &self,
        store: &mut ParameterStore,
        feature: &[f64],
        labels: &ConceptLabels,
        scale: f64,
    ) -> Result<f64> {
        let z = self.logits(store, feature)?;
        let loss = multilabel_loss(&z, labels)?;
        let dz: Vec<f64> = multilabel_loss_backward(&z, labels)
            .into_iter()
            .map(|d| d * scale)
            .collect();
        outer_add(store.grad_mut(self.weight), &dz, feature);
        vec_add(store.grad_mut(self.bias), &dz);
        Ok(loss)
    }
}

/// Element-wise max across per-region score vectors.
pub fn maxpool_scores(scores: &[Vec<f64>]) -> Result<Vec<f64>> {
    if scores.is_empty() {
        return Err(Error::Empty("region score list".into()));
    }
    let k = scores[0].len();
    if scores.iter().any(|s| s.len() != k) {
        return Err(Error::Dimension("score vectors of unequal length".into()));
    }
    let mut out = scores[0].clone();
    for s in &scores[1..] {
        for (o, &v) in out.iter_mut().zip(s) {
            *o = o.max(v);
        }
    }
    Ok(out)
}

/// Logistic multi-label loss over pre-sigmoid logits.
///
/// Labels are remapped {0,1} -> {-1,+1} so that negative concepts receive
/// gradient; the loss is sum_c log(1 + exp(-y_c * z_c)).
pub fn multilabel_loss(logits: &[f64], labels: &ConceptLabels) -> Result<f64> {
    if logits.len() != labels.0.len() {
        return Err(Error::Dimension(format!(
            "{} logits vs {} labels",
            logits.len(),
            labels.0.len()
        )));
    }
    let mut total = 0.0;
    for (&z, &y) in logits.iter().zip(&labels.0) {
        let sign = if y == 1 { 1.0 } else { -1.0 };
        let u = -sign * z;
        // log(1 + e^u) without overflow.
        total += u.max(0.0) + (-u.abs()).exp().ln_1p();
    }
    Ok(total)
}

/// d(multilabel_loss)/d(logits); equals sigmoid(z) - y.
pub fn multilabel_loss_backward(logits: &[f64], labels: &ConceptLabels) -> Vec<f64> {
    logits
        .iter()
        .zip(&labels.0)
        .map(|(&z, &y)| sigmoid_scalar(z) - f64::from(y))
        .collect()
}

/// Settings for standalone concept-head training.
#[derive(Clone, Debug)]
pub struct ConceptTrainConfig {
    pub lr: f64,
    pub steps: usize,
    pub batch: usize,
    pub seed: u64,
}

impl Default for ConceptTrainConfig {
    fn default() -> Self {
        ConceptTrainConfig {
            lr: 0.05,
            steps: 400,
            batch: 64,
            seed: 7,
        }
    }
}

/// Train a fresh head on (region set, image labels) pairs.
///
/// Region sets are flattened into per-region examples that all carry the
/// image-level labels; pooling happens only at inference. Returns the head,
/// its store, and the per-step mean-loss trace.
pub fn train_concept_head(
    dataset: &[(RegionFeatureSet, ConceptLabels)],
    n_concepts: usize,
    config: &ConceptTrainConfig,
) -> Result<(ParameterStore, ConceptHead, Vec<f64>)> {
    if dataset.is_empty() {
        return Err(Error::Empty("concept training dataset".into()));
    }
    let feature_dim = dataset[0].0.regions[0].len();
    let mut examples: Vec<(usize, usize)> = Vec::new();
    for (i, (set, labels)) in dataset.iter().enumerate() {
        if labels.0.iter().all(|&y| y == 0) {
            return Err(Error::Data(format!(
                "image {} has no positive concept label",
                set.image_id
            )));
        }
        for r in 0..set.regions.len() {
            examples.push((i, r));
        }
    }

    let mut rng = seeded_rng(config.seed);
    let mut store = ParameterStore::new();
    let head = ConceptHead::new(&mut store, "cnn", feature_dim, n_concepts, &mut rng)?;
    let mut opt = Adam::new(&store, &head.ids(), config.lr);

    let mut trace = Vec::with_capacity(config.steps);
    let mut cursor = 0usize;
    let mut order: Vec<usize> = (0..examples.len()).collect();
    use rand::seq::SliceRandom;
    order.shuffle(&mut rng);

    for _ in 0..config.steps {
        store.zero_grads();
        let batch = config.batch.min(examples.len());
        let mut loss_sum = 0.0;
        for _ in 0..batch {
            if cursor == order.len() {
                cursor = 0;
                order.shuffle(&mut rng);
            }
            let (img, reg) = examples[order[cursor]];
            cursor += 1;
            let (set, labels) = &dataset[img];
            loss_sum +=
                head.accumulate_loss_grad(&mut store, &set.regions[reg], labels, 1.0 / batch as f64)?;
        }
        let loss = loss_sum / batch as f64;
        if !loss.is_finite() {
            return Err(Error::NonFinite("concept training loss".into()));
        }
        trace.push(loss);
        opt.step(&mut store);
    }
    Ok((store, head, trace))
}
