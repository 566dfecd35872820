use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::algebra::{ensure_same, Signature};
use crate::attention::graph::{record_block, record_embedding, BlockVars};
use crate::attention::{
    dirac_scalar, embed_sequence, spinor_scale, transformer_block, AttentionMask, AttentionParams, BlockParams,
    EmbeddingTable, FeedForward, HeadParams,
};
use crate::autodiff::{Tape, Var};
use crate::error::{Error, ErrorKind, Result};
use crate::spinor::{positional_rotor, PositionalConfig};
use crate::train::{ToyCorpus, TrainConfig};

/// Gradient norms above this are rescaled to it before each step.
pub const GRADIENT_CLIP: f64 = 10.0;

/// Half-width of the uniform initialisation for generators and attention maps.
pub const INIT_SCALE: f64 = 0.1;

/// Half-width of the uniform initialisation for feed-forward weights.
pub const FFW_INIT_SCALE: f64 = 0.3;

/// A next-token predictor over a fixed vocabulary and context length.
pub trait LanguageModel {
    fn vocab(&self) -> &[String];

    /// Longest input window; evaluation restarts positions every `context` tokens.
    fn context(&self) -> usize;

    /// Next-token logits for every position of `inputs`.
    fn logits(&self, inputs: &[usize]) -> Result<Vec<Vec<f64>>>;

    fn parameter_count(&self) -> usize;
}

pub(crate) trait Trainable: LanguageModel {
    /// Mean next-token negative log-likelihood over one window and its flat gradient.
    fn window_loss(&self, inputs: &[usize], targets: &[usize]) -> Result<(f64, Vec<f64>)>;

    /// `θ ← θ − rate · direction`, in the same layout as the gradient.
    fn step(&mut self, direction: &[f64], rate: f64);
}

/// `[start, end)` input ranges; targets are the same ranges shifted by one.
pub(crate) fn windows(len: usize, context: usize) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    let mut start = 0;
    while start + 1 < len {
        let end = (start + context).min(len - 1);
        out.push((start, end));
        start += context;
    }
    out
}

fn log_softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().fold(f64::NEG_INFINITY, |m, &x| m.max(x));
    let lse = max + logits.iter().map(|x| (x - max).exp()).sum::<f64>().ln();
    logits.iter().map(|x| x - lse).collect()
}

/// `exp(mean NLL)` of next-token predictions over `tokens`, in windows of the model context.
pub fn perplexity<M: LanguageModel + ?Sized>(model: &M, tokens: &[usize]) -> Result<f64> {
    if tokens.len() < 2 {
        return Err(Error::arg("perplexity needs at least two tokens"));
    }
    if let Some(&bad) = tokens.iter().find(|&&t| t >= model.vocab().len()) {
        return Err(Error::arg(format!("token id {bad} out of range for vocabulary of {}", model.vocab().len())));
    }
    let mut nll = 0.0;
    for (s, e) in windows(tokens.len(), model.context()) {
        let logits = model.logits(&tokens[s..e])?;
        for (row, &t) in logits.iter().zip(&tokens[s + 1..=e]) {
            nll -= log_softmax(row)[t];
        }
    }
    let ppl = (nll / (tokens.len() - 1) as f64).exp();
    if !ppl.is_finite() {
        return Err(Error::numeric(format!("perplexity is not finite: {ppl}")));
    }
    Ok(ppl)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpochRecord {
    pub epoch: usize,
    pub train_perplexity: f64,
    pub validation_perplexity: f64,
}

/// Per-epoch perplexities; record 0 is the untrained model.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainReport {
    pub records: Vec<EpochRecord>,
    pub parameter_count: usize,
}

impl TrainReport {
    pub fn initial(&self) -> &EpochRecord {
        &self.records[0]
    }

    pub fn last(&self) -> &EpochRecord {
        self.records.last().expect("report always holds the untrained record")
    }

    /// `epoch,train_ppl,val_ppl` lines with a header.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("epoch,train_ppl,val_ppl\n");
        for r in &self.records {
            out.push_str(&format!("{},{:.6},{:.6}\n", r.epoch, r.train_perplexity, r.validation_perplexity));
        }
        out
    }
}

fn at_epoch(epoch: usize, e: Error) -> Error {
    if e.kind() == ErrorKind::Numeric {
        Error::numeric(format!("training diverged in epoch {epoch}: {e}"))
    } else {
        e
    }
}

fn evaluate<M: LanguageModel>(model: &M, corpus: &ToyCorpus, epoch: usize) -> Result<EpochRecord> {
    Ok(EpochRecord {
        epoch,
        train_perplexity: perplexity(model, corpus.train()).map_err(|e| at_epoch(epoch, e))?,
        validation_perplexity: perplexity(model, corpus.validation()).map_err(|e| at_epoch(epoch, e))?,
    })
}

/// One clipped gradient step per training window, windows in corpus order.
pub(crate) fn train_loop<M: Trainable>(model: &mut M, corpus: &ToyCorpus, cfg: &TrainConfig) -> Result<TrainReport> {
    let train = corpus.train();
    if train.len() < 2 || corpus.validation().len() < 2 {
        return Err(Error::arg(format!(
            "corpus needs at least two training and two validation tokens, got {} and {}",
            train.len(),
            corpus.validation().len()
        )));
    }
    let mut records = vec![evaluate(model, corpus, 0)?];
    for epoch in 1..=cfg.epochs {
        for (s, e) in windows(train.len(), cfg.batch) {
            let (loss, grad) =
                model.window_loss(&train[s..e], &train[s + 1..=e]).map_err(|err| at_epoch(epoch, err))?;
            if !loss.is_finite() || grad.iter().any(|g| !g.is_finite()) {
                return Err(Error::numeric(format!(
                    "training diverged in epoch {epoch}: loss {loss} (learning rate {})",
                    cfg.learning_rate
                )));
            }
            let norm = grad.iter().map(|g| g * g).sum::<f64>().sqrt();
            let clip = if norm > GRADIENT_CLIP { GRADIENT_CLIP / norm } else { 1.0 };
            model.step(&grad, cfg.learning_rate * clip);
        }
        records.push(evaluate(model, corpus, epoch)?);
    }
    Ok(TrainReport { records, parameter_count: model.parameter_count() })
}

/// Spinor embeddings, positional rotors and one causal transformer block.
///
/// Logits are `<out_i† ψ_t>_0 / sqrt(d_s)` against every vocabulary spinor `ψ_t`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpinorLm {
    pub table: EmbeddingTable,
    pub positional: PositionalConfig,
    pub block: BlockParams,
    pub context: usize,
}

impl SpinorLm {
    pub fn new(
        table: EmbeddingTable,
        positional: PositionalConfig,
        block: BlockParams,
        context: usize,
    ) -> Result<Self> {
        let sig = table.signature();
        ensure_same(&sig, &positional.signature())?;
        ensure_same(&sig, &block.signature())?;
        if context == 0 {
            return Err(Error::arg("context length must be positive"));
        }
        if table.is_empty() {
            return Err(Error::arg("language model needs a non-empty vocabulary"));
        }
        Ok(SpinorLm { table, positional, block, context })
    }

    /// Feed-forward width used for signature `sig`: the even dimension `2^(n-1)`.
    pub fn hidden_width(sig: Signature) -> usize {
        sig.even_dim()
    }

    /// Seeded small random initialisation with the default positional configuration.
    pub fn init(sig: Signature, vocab: Vec<String>, context: usize, seed: u64) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = sig.bivector_count();
        let generators =
            (0..vocab.len()).map(|_| (0..m).map(|_| rng.random_range(-INIT_SCALE..=INIT_SCALE)).collect()).collect();
        let table = EmbeddingTable::new(sig, vocab, generators)?;
        let head = HeadParams::random(sig, INIT_SCALE, &mut rng);
        let ffw = FeedForward::random(sig, Self::hidden_width(sig), FFW_INIT_SCALE, &mut rng);
        let block = BlockParams::new(AttentionParams::new(sig, vec![head])?, ffw)?;
        SpinorLm::new(table, PositionalConfig::default_for(sig), block, context)
    }

    /// Same architecture with every parameter zero: all `ψ_w = 1` and uniform predictions
    /// when the block cannot distinguish tokens.
    pub fn zeros(sig: Signature, vocab: Vec<String>, context: usize) -> Result<Self> {
        let table = EmbeddingTable::zeros(sig, vocab)?;
        let block =
            BlockParams::new(AttentionParams::zeros(sig, 1)?, FeedForward::zeros(sig, Self::hidden_width(sig)))?;
        SpinorLm::new(table, PositionalConfig::default_for(sig), block, context)
    }

    pub fn signature(&self) -> Signature {
        self.table.signature()
    }
}

impl LanguageModel for SpinorLm {
    fn vocab(&self) -> &[String] {
        self.table.vocab()
    }

    fn context(&self) -> usize {
        self.context
    }

    fn logits(&self, inputs: &[usize]) -> Result<Vec<Vec<f64>>> {
        let xs = embed_sequence(inputs, &self.table, &self.positional)?;
        let out = transformer_block(&xs, &self.block, AttentionMask::Causal)?;
        let vocab = self.table.spinors()?;
        let temper = spinor_scale(self.signature()).sqrt();
        out.iter().map(|o| vocab.iter().map(|psi| Ok(dirac_scalar(o, psi)? / temper)).collect()).collect()
    }

    fn parameter_count(&self) -> usize {
        self.table.len() * self.signature().bivector_count() + self.block.parameter_count()
    }
}

/// Cross-entropy of `logits` (scalar nodes) against `target`.
pub(crate) fn record_nll(tape: &mut Tape, logits: &[Var], target: usize) -> Result<Var> {
    let lse = tape.log_sum_exp(logits)?;
    tape.sub(lse, logits[target])
}

impl Trainable for SpinorLm {
    fn window_loss(&self, inputs: &[usize], targets: &[usize]) -> Result<(f64, Vec<f64>)> {
        let sig = self.signature();
        let mut tape = Tape::new();
        let gens =
            (0..self.table.len()).map(|id| Ok(tape.leaf(&self.table.generator(id)?))).collect::<Result<Vec<Var>>>()?;
        let vars = BlockVars::record(&mut tape, &self.block)?;
        let mut xs = Vec::with_capacity(inputs.len());
        for (p, &t) in inputs.iter().enumerate() {
            self.table.token(t)?;
            xs.push(record_embedding(&mut tape, gens[t], &positional_rotor(p, &self.positional)?)?);
        }
        let out = record_block(&mut tape, &xs, &vars, AttentionMask::Causal)?;
        let psi = gens.iter().map(|&g| tape.exp_bivector(g)).collect::<Result<Vec<_>>>()?;
        let inv = 1.0 / spinor_scale(sig).sqrt();
        let mut nll = Vec::with_capacity(out.len());
        for (&o, &t) in out.iter().zip(targets) {
            let rev = tape.reverse(o)?;
            let logits = psi
                .iter()
                .map(|&v| {
                    let s = tape.scalar_product(rev, v)?;
                    tape.scale_const(inv, s)
                })
                .collect::<Result<Vec<_>>>()?;
            nll.push(record_nll(&mut tape, &logits, t)?);
        }
        let loss = tape.mean(&nll)?;
        let grads = tape.backward(loss)?;
        let mut flat = Vec::with_capacity(self.parameter_count());
        for &g in &gens {
            flat.extend(grads.wrt_multivector(g, sig)?.bivector_coeffs());
        }
        flat.extend(vars.gradients(&grads)?.parameters());
        Ok((tape.scalar(loss)?, flat))
    }

    fn step(&mut self, direction: &[f64], rate: f64) {
        let m = self.signature().bivector_count();
        let (gen_part, block_part) = direction.split_at(self.table.len() * m);
        for id in 0..self.table.len() {
            let updated: Vec<f64> = self.table.generators()[id]
                .iter()
                .zip(&gen_part[id * m..(id + 1) * m])
                .map(|(x, d)| x - rate * d)
                .collect();
            self.table.set_generator(id, &updated).expect("update keeps generator shape");
        }
        for (x, d) in self.block.parameters_mut().into_iter().zip(block_part) {
            *x -= rate * d;
        }
    }
}

/// Trains a freshly initialised spinor model on `corpus.train()`.
pub fn train_lm(corpus: &ToyCorpus, cfg: &TrainConfig) -> Result<(SpinorLm, TrainReport)> {
    cfg.validate()?;
    let mut model = SpinorLm::init(cfg.signature, corpus.vocab().to_vec(), cfg.batch, cfg.seed)?;
    let report = train_loop(&mut model, corpus, cfg)?;
    Ok((model, report))
}
