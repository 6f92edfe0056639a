use std::collections::BTreeMap;

use super::encoder::ReferenceEncoder;
use super::{dot, BiEncoder, TrainingExample};
use crate::error::Result;

/// Sparse gradient over the two embedding tables, keyed by row id.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Gradients {
    pub target: BTreeMap<usize, Vec<f64>>,
    pub context: BTreeMap<usize, Vec<f64>>,
}

fn add_row(map: &mut BTreeMap<usize, Vec<f64>>, id: usize, scale: f64, v: &[f64]) {
    let row = map.entry(id).or_insert_with(|| vec![0.0; v.len()]);
    for (r, x) in row.iter_mut().zip(v) {
        *r += scale * x;
    }
}

impl Gradients {
    pub fn is_empty(&self) -> bool {
        self.target.is_empty() && self.context.is_empty()
    }

    /// `self += scale * other`.
    pub fn accumulate(&mut self, other: &Gradients, scale: f64) {
        for (&id, v) in &other.target {
            add_row(&mut self.target, id, scale, v);
        }
        for (&id, v) in &other.context {
            add_row(&mut self.context, id, scale, v);
        }
    }

    /// One gradient-descent step: `p -= lr * g`.
    pub fn apply(&self, encoder: &mut ReferenceEncoder, lr: f64) {
        let d = encoder.dim;
        for (&id, g) in &self.target {
            for (p, x) in encoder.target[id * d..(id + 1) * d].iter_mut().zip(g) {
                *p = (*p as f64 - lr * x) as f32;
            }
        }
        for (&id, g) in &self.context {
            for (p, x) in encoder.context[id * d..(id + 1) * d].iter_mut().zip(g) {
                *p = (*p as f64 - lr * x) as f32;
            }
        }
    }

    /// Largest absolute component, for logging and tests.
    pub fn max_abs(&self) -> f64 {
        self.target
            .values()
            .chain(self.context.values())
            .flatten()
            .fold(0.0, |m: f64, x| m.max(x.abs()))
    }
}

/// `-log softmax(s)[0]`, computed after subtracting the maximum.
pub fn cross_entropy(s: &[f64]) -> f64 {
    let max = s.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let log_sum = s.iter().map(|x| (x - max).exp()).sum::<f64>().ln();
    -(s[0] - max - log_sum)
}

pub fn softmax(s: &[f64]) -> Vec<f64> {
    let max = s.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let e: Vec<f64> = s.iter().map(|x| (x - max).exp()).collect();
    let z: f64 = e.iter().sum();
    e.into_iter().map(|x| x / z).collect()
}

pub(crate) fn loss_and_gradients(model: &BiEncoder, ex: &TrainingExample) -> Result<(f64, Gradients)> {
    let enc = model.encoder();
    let ids = enc.ids(&ex.tokens);
    let u = enc.encode_ids(&ids, ex.target_index)?;

    let mut gloss = Vec::with_capacity(4);
    let mut j = Vec::with_capacity(4);
    for label in ex.candidates() {
        let g = model.gloss_token_ids(model.label_id(label)?);
        j.push(enc.gloss_ids_embedding(g));
        gloss.push(g);
    }
    let s: Vec<f64> = j.iter().map(|jq| dot(&u.0, jq)).collect();
    let loss = cross_entropy(&s);

    // dL/ds_q = p_q - [q == 0]
    let mut ds = softmax(&s);
    ds[0] -= 1.0;

    let d = enc.dim;
    let mut du = vec![0.0; d];
    for (q, jq) in j.iter().enumerate() {
        for (o, x) in du.iter_mut().zip(jq) {
            *o += ds[q] * x;
        }
    }

    let mut grads = Gradients::default();
    add_row(&mut grads.target, ids[ex.target_index], 1.0, &du);
    let neighbours: Vec<usize> = enc
        .neighbourhood(ids.len(), ex.target_index)
        .filter(|&k| k != ex.target_index)
        .collect();
    if !neighbours.is_empty() {
        let scale = 1.0 / neighbours.len() as f64;
        for k in neighbours {
            add_row(&mut grads.context, ids[k], scale, &du);
        }
    }
    for (q, g) in gloss.iter().enumerate() {
        let scale = ds[q] / g.len() as f64;
        for &id in g.iter() {
            add_row(&mut grads.target, id, scale, &u.0);
        }
    }
    Ok((loss, grads))
}
