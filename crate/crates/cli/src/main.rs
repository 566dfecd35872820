use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use spinembed_core::algebra::blade_name;
use spinembed_core::attention::{embed_sequence, multi_head_attention};
use spinembed_core::io::{
    dump_cayley_table, ingest_corpus, load_model, project_embeddings, projection_csv, save_model, write_atomic,
    UNKNOWN_TOKEN,
};
use spinembed_core::spinor::{orbit720, orbit_csv};
use spinembed_core::train::{
    ablate_signatures, analogy_eval, fit_rotor, train_baseline_vector_lm, train_lm, FitOptions,
};
use spinembed_core::{
    AttentionMask, Error, ErrorKind, Model, ModelDocument, ModelMetadata, Result, Signature, SpinorLm, ToyCorpus,
    TrainConfig,
};

#[derive(Parser)]
#[command(name = "spinembed", version, about = "Spinor word embeddings over Clifford algebras Cl(p,q)")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print a signature summary, optionally with its Cayley table.
    Algebra {
        #[arg(long)]
        p: usize,
        #[arg(long)]
        q: usize,
        #[arg(long)]
        table: bool,
    },
    /// Train the spinor language model and print per-epoch perplexities.
    TrainLm(TrainArgs),
    /// Train the vector baseline under the same harness.
    TrainBaseline(TrainArgs),
    /// Train one spinor model per signature and report validation perplexity.
    Ablate {
        #[command(flatten)]
        corpus: CorpusArgs,
        /// Semicolon-separated `p,q` pairs, e.g. "2,0;3,0;0,3".
        #[arg(long)]
        signatures: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 30)]
        epochs: usize,
        #[arg(long, default_value_t = 0.5)]
        lr: f64,
        #[arg(long, default_value_t = 8)]
        batch: usize,
        /// Leave out the wall-clock column so the report is reproducible.
        #[arg(long)]
        no_timing: bool,
    },
    /// Fit a rotor to word pairs and report top-1 accuracy.
    Analogy {
        #[arg(long)]
        model: PathBuf,
        /// Two tokens per line: source target.
        #[arg(long)]
        pairs: PathBuf,
        /// Pairs to evaluate on; defaults to the fitting pairs.
        #[arg(long)]
        holdout: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Tabulate the one-sided orbit over 720 degrees.
    Demo720 {
        #[arg(long)]
        p: usize,
        #[arg(long)]
        q: usize,
        #[arg(long, default_value_t = 8)]
        steps: usize,
    },
    /// Print the head-averaged attention weights for one sequence.
    Attend {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        text: String,
        /// Let every position attend to every other (default is causal).
        #[arg(long)]
        full: bool,
    },
    /// Write a two-component PCA of the vocabulary spinors.
    Project {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Args)]
struct CorpusArgs {
    /// Text file, or one of builtin:repetitive, builtin:balanced, builtin:templated, builtin:random.
    #[arg(long)]
    corpus: String,
    /// Keep only the first N words by appearance; the rest become <unk>.
    #[arg(long)]
    max_vocab: Option<usize>,
}

#[derive(Args)]
struct TrainArgs {
    #[command(flatten)]
    corpus: CorpusArgs,
    #[arg(long)]
    p: usize,
    #[arg(long)]
    q: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 30)]
    epochs: usize,
    #[arg(long, default_value_t = 0.5)]
    lr: f64,
    /// Sequence length of each training window.
    #[arg(long, default_value_t = 8)]
    batch: usize,
    #[arg(long)]
    out: PathBuf,
}

fn load_corpus(args: &CorpusArgs, seed: u64) -> Result<ToyCorpus> {
    match args.corpus.strip_prefix("builtin:") {
        Some(name) => {
            if args.max_vocab.is_some() {
                return Err(Error::Argument("--max-vocab applies to corpus files only".into()));
            }
            match name {
                "repetitive" => ToyCorpus::repetitive(100),
                "balanced" => ToyCorpus::balanced(3, 240),
                "templated" => ToyCorpus::templated(60, seed),
                "random" => ToyCorpus::uniform_random(7, 400, seed),
                other => Err(Error::Argument(format!("unknown builtin corpus {other:?}"))),
            }
        }
        None => ingest_corpus(Path::new(&args.corpus), args.max_vocab),
    }
}

fn algebra(p: usize, q: usize, table: bool) -> Result<String> {
    let sig = Signature::new(p, q)?;
    let squares: Vec<String> = (0..sig.n()).map(|k| format!("e{}^2={}", k + 1, sig.basis_square(k))).collect();
    let bivectors: Vec<String> = sig.bivector_blades().into_iter().map(blade_name).collect();
    let mut out = format!(
        "signature {sig}\nn {}\ndimension {}\neven_dimension {}\nbasis {}\nbivectors {}\n",
        sig.n(),
        sig.dim(),
        sig.even_dim(),
        squares.join(" "),
        bivectors.join(" ")
    );
    if table {
        out.push('\n');
        out.push_str(&dump_cayley_table(sig)?);
    }
    Ok(out)
}

fn train(args: &TrainArgs, baseline: bool) -> Result<String> {
    let corpus = load_corpus(&args.corpus, args.seed)?;
    let cfg = TrainConfig {
        seed: args.seed,
        learning_rate: args.lr,
        epochs: args.epochs,
        batch: args.batch,
        signature: Signature::new(args.p, args.q)?,
    };
    let (model, report) = if baseline {
        let (m, r) = train_baseline_vector_lm(&corpus, &cfg)?;
        (Model::Baseline(m), r)
    } else {
        let (m, r) = train_lm(&corpus, &cfg)?;
        (Model::Spinor(m), r)
    };
    let doc = ModelDocument { model, metadata: ModelMetadata { seed: args.seed, epochs: args.epochs } };
    save_model(&doc, &args.out)?;
    Ok(report.to_csv())
}

fn parse_signatures(text: &str) -> Result<Vec<Signature>> {
    text.split(';')
        .filter(|s| !s.trim().is_empty())
        .map(|item| {
            let bad = || Error::Argument(format!("signature {item:?} is not of the form p,q"));
            let (p, q) = item.split_once(',').ok_or_else(bad)?;
            let p = p.trim().parse().map_err(|_| bad())?;
            let q = q.trim().parse().map_err(|_| bad())?;
            Signature::new(p, q)
        })
        .collect()
}

fn spinor_model(path: &Path, command: &str) -> Result<SpinorLm> {
    match load_model(path)?.model {
        Model::Spinor(m) => Ok(m),
        Model::Baseline(_) => {
            Err(Error::Validation(format!("{command} needs a spinor model, {} holds a baseline", path.display())))
        }
    }
}

fn read_text(path: &Path) -> Result<String> {
    String::from_utf8(fs::read(path)?).map_err(|e| Error::Encoding(format!("{}: {e}", path.display())))
}

fn read_pairs(path: &Path, model: &SpinorLm) -> Result<Vec<(usize, usize)>> {
    let text = read_text(path)?;
    let mut pairs = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let words: Vec<&str> = line.split_whitespace().collect();
        match words.as_slice() {
            [] => continue,
            [s, t] => {
                let id = |w: &str| {
                    model.table.token_id(w).ok_or_else(|| {
                        Error::Validation(format!("{}:{}: token {w:?} is not in the vocabulary", path.display(), n + 1))
                    })
                };
                pairs.push((id(s)?, id(t)?));
            }
            _ => {
                return Err(Error::Validation(format!(
                    "{}:{}: expected two tokens, found {}",
                    path.display(),
                    n + 1,
                    words.len()
                )))
            }
        }
    }
    if pairs.is_empty() {
        return Err(Error::Argument(format!("{} contains no pairs", path.display())));
    }
    Ok(pairs)
}

fn analogy(model: &Path, pairs: &Path, holdout: Option<&Path>, seed: u64) -> Result<String> {
    let model = spinor_model(model, "analogy")?;
    let train = read_pairs(pairs, &model)?;
    let eval = match holdout {
        Some(h) => read_pairs(h, &model)?,
        None => train.clone(),
    };
    let spinor_pairs =
        train.iter().map(|&(s, t)| Ok((model.table.spinor(s)?, model.table.spinor(t)?))).collect::<Result<Vec<_>>>()?;
    let fit = fit_rotor(&spinor_pairs, &FitOptions { seed, ..FitOptions::default() })?;
    let accuracy = analogy_eval(&fit.rotor, &eval, &model.table)?;
    let sig = model.signature();
    let mut out = format!(
        "pairs,{}\nevaluated,{}\naccuracy,{accuracy:.6}\nloss,{:e}\nblade,coefficient\n",
        train.len(),
        eval.len(),
        fit.loss
    );
    for (blade, c) in sig.even_blades().into_iter().zip(fit.rotor.canonical_sign().even_coeffs()) {
        out.push_str(&format!("{},{c:.9}\n", blade_name(blade)));
    }
    Ok(out)
}

fn attend(model: &Path, text: &str, full: bool) -> Result<String> {
    let model = spinor_model(model, "attend")?;
    let words: Vec<&str> = text.split_whitespace().collect();
    if words.is_empty() {
        return Err(Error::Argument("--text has no tokens".into()));
    }
    let ids = words
        .iter()
        .map(|w| {
            model
                .table
                .token_id(w)
                .or_else(|| model.table.token_id(UNKNOWN_TOKEN))
                .ok_or_else(|| Error::Validation(format!("token {w:?} is not in the vocabulary")))
        })
        .collect::<Result<Vec<_>>>()?;
    let xs = embed_sequence(&ids, &model.table, &model.positional)?;
    let mask = if full { AttentionMask::Full } else { AttentionMask::Causal };
    let attn = multi_head_attention(&xs, &model.block.attention, mask)?;
    let mut out = String::from("query,token");
    for k in 0..words.len() {
        out.push_str(&format!(",k{k}"));
    }
    out.push('\n');
    for (i, row) in attn.weights.iter().enumerate() {
        out.push_str(&format!("{i},{}", words[i]));
        for w in row {
            out.push_str(&format!(",{w:.6}"));
        }
        out.push('\n');
    }
    Ok(out)
}

fn project(model: &Path, out: &Path) -> Result<String> {
    let model = spinor_model(model, "project")?;
    let projection = project_embeddings(&model.table)?;
    write_atomic(out, projection_csv(&projection.rows).as_bytes())?;
    Ok(format!(
        "rows,{}\nexplained_x,{:.9}\nexplained_y,{:.9}\ntotal_variance,{:.9}\n",
        projection.rows.len(),
        projection.explained[0],
        projection.explained[1],
        projection.total_variance
    ))
}

fn run(command: Command) -> Result<String> {
    match command {
        Command::Algebra { p, q, table } => algebra(p, q, table),
        Command::TrainLm(args) => train(&args, false),
        Command::TrainBaseline(args) => train(&args, true),
        Command::Ablate { corpus, signatures, seed, epochs, lr, batch, no_timing } => {
            let sigs = parse_signatures(&signatures)?;
            let corpus = load_corpus(&corpus, seed)?;
            let cfg = TrainConfig { seed, learning_rate: lr, epochs, batch, signature: Signature::new(2, 0)? };
            let rows = ablate_signatures(&corpus, &sigs, &cfg)?;
            let mut out = String::from(if no_timing { "p,q,val_ppl\n" } else { "p,q,val_ppl,seconds\n" });
            for r in rows {
                out.push_str(&format!("{},{},{:.6}", r.signature.p(), r.signature.q(), r.validation_perplexity));
                if !no_timing {
                    out.push_str(&format!(",{:.3}", r.seconds));
                }
                out.push('\n');
            }
            Ok(out)
        }
        Command::Analogy { model, pairs, holdout, seed } => analogy(&model, &pairs, holdout.as_deref(), seed),
        Command::Demo720 { p, q, steps } => Ok(orbit_csv(&orbit720(Signature::new(p, q)?, steps)?)),
        Command::Attend { model, text, full } => attend(&model, &text, full),
        Command::Project { model, out } => project(&model, &out),
    }
}

fn exit_code(e: &Error) -> u8 {
    match e.kind() {
        ErrorKind::Argument => 2,
        ErrorKind::Validation => 3,
        ErrorKind::Numeric => 4,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli.command) {
        Ok(out) => {
            print!("{out}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("spinembed: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
