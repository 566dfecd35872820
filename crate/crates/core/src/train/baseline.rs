use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::algebra::Signature;
use crate::attention::{scaled_dot_product_attention, AttentionMask};
use crate::autodiff::{Tape, Var};
use crate::error::{Error, Result};
use crate::train::lm::{record_nll, train_loop, LanguageModel, SpinorLm, Trainable, FFW_INIT_SCALE, INIT_SCALE};
use crate::train::{ToyCorpus, TrainConfig, TrainReport};

/// Vector-embedding model with the spinor model's skeleton.
///
/// Embeddings live in `R^m` with `m = n(n-1)/2`, plus additive sinusoidal positions.
/// Query, key and value maps are diagonal (`m` weights each, like a rotor generator),
/// attention is `softmax(q·k / sqrt(m))`, the block is residual attention then a residual
/// `tanh` feed-forward, and logits are `z·E_t / sqrt(m)`.
#[derive(Debug, Clone, PartialEq)]
pub struct BaselineLm {
    /// Signature whose bivector count sets the embedding dimension.
    pub signature: Signature,
    pub vocab: Vec<String>,
    pub embeddings: Vec<Vec<f64>>,
    pub query: Vec<f64>,
    pub key: Vec<f64>,
    pub value: Vec<f64>,
    /// `hidden × m`.
    pub w1: Vec<Vec<f64>>,
    pub b1: Vec<f64>,
    /// `m × hidden`.
    pub w2: Vec<Vec<f64>>,
    pub b2: Vec<f64>,
    pub context: usize,
}

/// `PE(p)_{2i} = sin(p / 10000^(2i/m))`, `PE(p)_{2i+1} = cos(p / 10000^(2i/m))`.
pub fn sinusoidal_position(p: usize, dim: usize) -> Vec<f64> {
    (0..dim)
        .map(|j| {
            let freq = 10000f64.powf((j - j % 2) as f64 / dim as f64);
            let a = p as f64 / freq;
            if j % 2 == 0 {
                a.sin()
            } else {
                a.cos()
            }
        })
        .collect()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

impl BaselineLm {
    /// Feed-forward width whose total parameter count is closest to the spinor model's.
    pub fn matched_hidden(sig: Signature, vocab_size: usize) -> usize {
        let m = sig.bivector_count();
        let target = {
            let e = sig.even_dim();
            let h = SpinorLm::hidden_width(sig);
            vocab_size * m + 3 * m + 2 * e * h + h + e
        };
        let count = |h: usize| vocab_size * m + 3 * m + 2 * m * h + h + m;
        (1..=4 * target.max(1)).min_by_key(|&h| (count(h) as i64 - target as i64).unsigned_abs()).unwrap_or(1)
    }

    pub fn init(sig: Signature, vocab: Vec<String>, context: usize, seed: u64) -> Result<Self> {
        if context == 0 {
            return Err(Error::arg("context length must be positive"));
        }
        if vocab.is_empty() {
            return Err(Error::arg("language model needs a non-empty vocabulary"));
        }
        let m = sig.bivector_count();
        let hidden = Self::matched_hidden(sig, vocab.len());
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut draw =
            |n: usize, scale: f64| -> Vec<f64> { (0..n).map(|_| rng.random_range(-scale..=scale)).collect() };
        let embeddings = (0..vocab.len()).map(|_| draw(m, INIT_SCALE)).collect();
        // Diagonal maps start near the identity, as exp(B) does for small B.
        let near_one = |v: Vec<f64>| v.into_iter().map(|x| 1.0 + x).collect::<Vec<f64>>();
        let query = near_one(draw(m, INIT_SCALE));
        let key = near_one(draw(m, INIT_SCALE));
        let value = near_one(draw(m, INIT_SCALE));
        let w1 = (0..hidden).map(|_| draw(m, FFW_INIT_SCALE)).collect();
        let w2 = (0..m).map(|_| draw(hidden, FFW_INIT_SCALE)).collect();
        Ok(BaselineLm {
            signature: sig,
            vocab,
            embeddings,
            query,
            key,
            value,
            w1,
            b1: vec![0.0; hidden],
            w2,
            b2: vec![0.0; m],
            context,
        })
    }

    pub fn dim(&self) -> usize {
        self.query.len()
    }

    pub fn hidden(&self) -> usize {
        self.w1.len()
    }

    /// Checks that every array has the shape implied by the vocabulary, `m` and `hidden`.
    pub fn validate(&self) -> Result<()> {
        let (m, h) = (self.dim(), self.hidden());
        let ok = m == self.signature.bivector_count()
            && !self.vocab.is_empty()
            && self.context > 0
            && self.embeddings.len() == self.vocab.len()
            && self.embeddings.iter().all(|e| e.len() == m)
            && self.key.len() == m
            && self.value.len() == m
            && self.w1.iter().all(|r| r.len() == m)
            && self.b1.len() == h
            && self.w2.len() == m
            && self.w2.iter().all(|r| r.len() == h)
            && self.b2.len() == m;
        if !ok {
            return Err(Error::invalid("baseline model arrays have inconsistent shapes"));
        }
        if self.parameters().iter().any(|x| !x.is_finite()) {
            return Err(Error::invalid("baseline model has non-finite parameters"));
        }
        Ok(())
    }

    fn parameters(&self) -> Vec<f64> {
        let mut out: Vec<f64> = self.embeddings.iter().flatten().copied().collect();
        out.extend(self.query.iter().chain(&self.key).chain(&self.value));
        out.extend(self.w1.iter().flatten());
        out.extend(&self.b1);
        out.extend(self.w2.iter().flatten());
        out.extend(&self.b2);
        out
    }

    fn parameters_mut(&mut self) -> Vec<&mut f64> {
        let mut out: Vec<&mut f64> = self.embeddings.iter_mut().flatten().collect();
        out.extend(self.query.iter_mut().chain(self.key.iter_mut()).chain(self.value.iter_mut()));
        out.extend(self.w1.iter_mut().flatten());
        out.extend(self.b1.iter_mut());
        out.extend(self.w2.iter_mut().flatten());
        out.extend(self.b2.iter_mut());
        out
    }

    fn inputs(&self, tokens: &[usize]) -> Result<Vec<Vec<f64>>> {
        tokens
            .iter()
            .enumerate()
            .map(|(p, &t)| {
                let e = self.embeddings.get(t).ok_or_else(|| {
                    Error::arg(format!("token id {t} out of range for vocabulary of {}", self.vocab.len()))
                })?;
                Ok(e.iter().zip(sinusoidal_position(p, self.dim())).map(|(a, b)| a + b).collect())
            })
            .collect()
    }
}

impl LanguageModel for BaselineLm {
    fn vocab(&self) -> &[String] {
        &self.vocab
    }

    fn context(&self) -> usize {
        self.context
    }

    fn logits(&self, inputs: &[usize]) -> Result<Vec<Vec<f64>>> {
        let xs = self.inputs(inputs)?;
        let diag =
            |w: &[f64]| -> Vec<Vec<f64>> { xs.iter().map(|x| x.iter().zip(w).map(|(a, b)| a * b).collect()).collect() };
        let attn = scaled_dot_product_attention(
            &diag(&self.query),
            &diag(&self.key),
            &diag(&self.value),
            AttentionMask::Causal,
        )?;
        let temper = (self.dim() as f64).sqrt();
        Ok(xs
            .iter()
            .zip(&attn)
            .map(|(x, a)| {
                let y: Vec<f64> = x.iter().zip(a).map(|(p, q)| p + q).collect();
                let h: Vec<f64> = self.w1.iter().zip(&self.b1).map(|(r, b)| (dot(r, &y) + b).tanh()).collect();
                let z: Vec<f64> =
                    y.iter().zip(self.w2.iter().zip(&self.b2)).map(|(yi, (r, b))| yi + dot(r, &h) + b).collect();
                self.embeddings.iter().map(|e| dot(&z, e) / temper).collect()
            })
            .collect())
    }

    fn parameter_count(&self) -> usize {
        self.parameters().len()
    }
}

impl Trainable for BaselineLm {
    fn window_loss(&self, inputs: &[usize], targets: &[usize]) -> Result<(f64, Vec<f64>)> {
        let m = self.dim();
        let mut tape = Tape::new();
        let emb = self.embeddings.iter().map(|e| tape.leaf_vector(e.clone())).collect::<Result<Vec<Var>>>()?;
        let wq = tape.leaf_vector(self.query.clone())?;
        let wk = tape.leaf_vector(self.key.clone())?;
        let wv = tape.leaf_vector(self.value.clone())?;
        let w1 = self.w1.iter().map(|r| tape.leaf_vector(r.clone())).collect::<Result<Vec<_>>>()?;
        let b1 = self.b1.iter().map(|&b| tape.leaf_scalar(b)).collect::<Result<Vec<_>>>()?;
        let w2_cols = (0..self.hidden())
            .map(|k| tape.leaf_vector(self.w2.iter().map(|r| r[k]).collect()))
            .collect::<Result<Vec<_>>>()?;
        let b2 = tape.leaf_vector(self.b2.clone())?;

        let mut xs = Vec::with_capacity(inputs.len());
        for (p, &t) in inputs.iter().enumerate() {
            let e = *emb.get(t).ok_or_else(|| Error::arg(format!("token id {t} out of range")))?;
            let pe = tape.leaf_vector(sinusoidal_position(p, m))?;
            xs.push(tape.add(e, pe)?);
        }
        let q = xs.iter().map(|&x| tape.mul(wq, x)).collect::<Result<Vec<_>>>()?;
        let k = xs.iter().map(|&x| tape.mul(wk, x)).collect::<Result<Vec<_>>>()?;
        let v = xs.iter().map(|&x| tape.mul(wv, x)).collect::<Result<Vec<_>>>()?;
        let inv = 1.0 / (m as f64).sqrt();
        let mut nll = Vec::with_capacity(inputs.len());
        for i in 0..xs.len() {
            let scores = (0..=i)
                .map(|j| {
                    let s = tape.dot(q[i], k[j])?;
                    tape.scale_const(inv, s)
                })
                .collect::<Result<Vec<_>>>()?;
            let w = tape.softmax(&scores)?;
            let mut terms = Vec::with_capacity(i + 1);
            for (j, &wj) in w.iter().enumerate() {
                terms.push(tape.scale(wj, v[j])?);
            }
            let attn = tape.sum(&terms)?;
            let y = tape.add(xs[i], attn)?;
            let mut parts = vec![y];
            for ((&row, &b), &col) in w1.iter().zip(&b1).zip(&w2_cols) {
                let pre = tape.dot(row, y)?;
                let pre = tape.add(pre, b)?;
                let act = tape.tanh(pre)?;
                parts.push(tape.scale(act, col)?);
            }
            parts.push(b2);
            let z = tape.sum(&parts)?;
            let logits = emb
                .iter()
                .map(|&e| {
                    let s = tape.dot(z, e)?;
                    tape.scale_const(inv, s)
                })
                .collect::<Result<Vec<_>>>()?;
            nll.push(record_nll(&mut tape, &logits, targets[i])?);
        }
        let loss = tape.mean(&nll)?;
        let grads = tape.backward(loss)?;
        let mut flat = Vec::with_capacity(self.parameter_count());
        for &e in &emb {
            flat.extend_from_slice(grads.wrt(e)?);
        }
        for w in [wq, wk, wv] {
            flat.extend_from_slice(grads.wrt(w)?);
        }
        for &r in &w1 {
            flat.extend_from_slice(grads.wrt(r)?);
        }
        for &b in &b1 {
            flat.extend_from_slice(grads.wrt(b)?);
        }
        let cols = w2_cols.iter().map(|&c| grads.wrt(c)).collect::<Result<Vec<_>>>()?;
        for i in 0..m {
            flat.extend(cols.iter().map(|c| c[i]));
        }
        flat.extend_from_slice(grads.wrt(b2)?);
        Ok((tape.scalar(loss)?, flat))
    }

    fn step(&mut self, direction: &[f64], rate: f64) {
        for (x, d) in self.parameters_mut().into_iter().zip(direction) {
            *x -= rate * d;
        }
    }
}

/// Trains a freshly initialised baseline under the same loop as [`crate::train::train_lm`].
pub fn train_baseline_vector_lm(corpus: &ToyCorpus, cfg: &TrainConfig) -> Result<(BaselineLm, TrainReport)> {
    cfg.validate()?;
    let mut model = BaselineLm::init(cfg.signature, corpus.vocab().to_vec(), cfg.batch, cfg.seed)?;
    let report = train_loop(&mut model, corpus, cfg)?;
    Ok((model, report))
}
