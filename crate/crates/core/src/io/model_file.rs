use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::algebra::{Multivector, Signature};
use crate::attention::{AttentionParams, BlockParams, EmbeddingTable, FeedForward, HeadParams};
use crate::error::{Error, Result};
use crate::spinor::PositionalConfig;
use crate::train::{BaselineLm, SpinorLm};

pub const FORMAT_VERSION: u64 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelMetadata {
    pub seed: u64,
    pub epochs: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Model {
    Spinor(SpinorLm),
    Baseline(BaselineLm),
}

/// A model together with the metadata stored beside it.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelDocument {
    pub model: Model,
    pub metadata: ModelMetadata,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SignatureField {
    p: usize,
    q: usize,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PositionalField {
    planes: Vec<Vec<f64>>,
    base_frequency: f64,
    frequency_decay: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct HeadField {
    query: Vec<f64>,
    key: Vec<f64>,
    value: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FfwField {
    hidden: usize,
    w1: Vec<Vec<f64>>,
    b1: Vec<f64>,
    w2: Vec<Vec<f64>>,
    b2: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct AttentionField {
    heads: Vec<HeadField>,
    ffw: FfwField,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MetadataField {
    seed: u64,
    epochs: usize,
    context: usize,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SpinorFile {
    format_version: u64,
    #[serde(default = "spinor_kind")]
    kind: String,
    signature: SignatureField,
    vocab: Vec<String>,
    generators: Vec<Vec<f64>>,
    positional: PositionalField,
    attention: AttentionField,
    metadata: MetadataField,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct BaselineFile {
    format_version: u64,
    kind: String,
    signature: SignatureField,
    vocab: Vec<String>,
    embeddings: Vec<Vec<f64>>,
    attention: HeadField,
    ffw: FfwField,
    metadata: MetadataField,
}

fn spinor_kind() -> String {
    "spinor".to_string()
}

fn ffw_field(w1: &[Vec<f64>], b1: &[f64], w2: &[Vec<f64>], b2: &[f64]) -> FfwField {
    FfwField { hidden: w1.len(), w1: w1.to_vec(), b1: b1.to_vec(), w2: w2.to_vec(), b2: b2.to_vec() }
}

/// Serialises a model document to pretty-printed JSON.
///
/// Floats are written in the shortest form that parses back to the same bits.
pub fn to_json(doc: &ModelDocument) -> Result<String> {
    let meta = |context| MetadataField { seed: doc.metadata.seed, epochs: doc.metadata.epochs, context };
    let json = match &doc.model {
        Model::Spinor(m) => {
            let sig = m.signature();
            let ffw = &m.block.ffw;
            let file = SpinorFile {
                format_version: FORMAT_VERSION,
                kind: spinor_kind(),
                signature: SignatureField { p: sig.p(), q: sig.q() },
                vocab: m.table.vocab().to_vec(),
                generators: m.table.generators().to_vec(),
                positional: PositionalField {
                    planes: m.positional.planes().iter().map(|b| b.bivector_coeffs()).collect(),
                    base_frequency: m.positional.base_frequency(),
                    frequency_decay: m.positional.frequency_decay(),
                },
                attention: AttentionField {
                    heads: m
                        .block
                        .attention
                        .heads()
                        .iter()
                        .map(|h| HeadField { query: h.query.clone(), key: h.key.clone(), value: h.value.clone() })
                        .collect(),
                    ffw: ffw_field(&ffw.w1, &ffw.b1, &ffw.w2, &ffw.b2),
                },
                metadata: meta(m.context),
            };
            serde_json::to_string_pretty(&file)
        }
        Model::Baseline(m) => {
            m.validate()?;
            let file = BaselineFile {
                format_version: FORMAT_VERSION,
                kind: "baseline".to_string(),
                signature: SignatureField { p: m.signature.p(), q: m.signature.q() },
                vocab: m.vocab.clone(),
                embeddings: m.embeddings.clone(),
                attention: HeadField { query: m.query.clone(), key: m.key.clone(), value: m.value.clone() },
                ffw: ffw_field(&m.w1, &m.b1, &m.w2, &m.b2),
                metadata: meta(m.context),
            };
            serde_json::to_string_pretty(&file)
        }
    };
    json.map_err(|e| Error::Encoding(e.to_string()))
}

fn parse_error(e: serde_json::Error) -> Error {
    Error::Parse { line: e.line(), column: e.column(), message: e.to_string() }
}

fn signature_of(field: &SignatureField) -> Result<Signature> {
    Signature::new(field.p, field.q).map_err(|e| Error::invalid(format!("bad signature: {e}")))
}

fn check_vocab(vocab: &[String]) -> Result<()> {
    if vocab.is_empty() {
        return Err(Error::invalid("vocabulary is empty"));
    }
    let mut seen = std::collections::HashSet::new();
    for t in vocab {
        if !seen.insert(t) {
            return Err(Error::invalid(format!("duplicate vocabulary entry {t:?}")));
        }
    }
    Ok(())
}

fn check_rows(what: &str, vocab: &[String], rows: &[Vec<f64>], len: usize, sig: Signature) -> Result<()> {
    if rows.len() != vocab.len() {
        return Err(Error::invalid(format!("{} tokens but {} {what} arrays", vocab.len(), rows.len())));
    }
    for (token, row) in vocab.iter().zip(rows) {
        if row.len() != len {
            return Err(Error::invalid(format!(
                "{what} for token {token:?} has {} coefficients, {sig} needs {len}",
                row.len()
            )));
        }
    }
    Ok(())
}

fn invalid(e: Error) -> Error {
    match e {
        Error::Validation(_) => e,
        other => Error::invalid(other.to_string()),
    }
}

fn check_ffw(f: &FfwField) -> Result<()> {
    if f.hidden != f.w1.len() {
        return Err(Error::invalid(format!("ffw hidden is {} but w1 has {} rows", f.hidden, f.w1.len())));
    }
    Ok(())
}

fn spinor_from_file(file: SpinorFile) -> Result<ModelDocument> {
    let sig = signature_of(&file.signature)?;
    check_vocab(&file.vocab)?;
    check_rows("generator", &file.vocab, &file.generators, sig.bivector_count(), sig)?;
    check_ffw(&file.attention.ffw)?;
    let table = EmbeddingTable::new(sig, file.vocab, file.generators).map_err(invalid)?;
    let planes = file
        .positional
        .planes
        .iter()
        .map(|c| Multivector::bivector(sig, c))
        .collect::<Result<Vec<_>>>()
        .map_err(invalid)?;
    let positional =
        PositionalConfig::new(sig, planes, file.positional.base_frequency, file.positional.frequency_decay)
            .map_err(invalid)?;
    let heads =
        file.attention.heads.into_iter().map(|h| HeadParams { query: h.query, key: h.key, value: h.value }).collect();
    let f = file.attention.ffw;
    let block = BlockParams::new(
        AttentionParams::new(sig, heads).map_err(invalid)?,
        FeedForward::new(sig, f.w1, f.b1, f.w2, f.b2).map_err(invalid)?,
    )
    .map_err(invalid)?;
    let model = SpinorLm::new(table, positional, block, file.metadata.context).map_err(invalid)?;
    Ok(ModelDocument {
        model: Model::Spinor(model),
        metadata: ModelMetadata { seed: file.metadata.seed, epochs: file.metadata.epochs },
    })
}

fn baseline_from_file(file: BaselineFile) -> Result<ModelDocument> {
    let sig = signature_of(&file.signature)?;
    check_vocab(&file.vocab)?;
    check_rows("embedding", &file.vocab, &file.embeddings, sig.bivector_count(), sig)?;
    check_ffw(&file.ffw)?;
    let model = BaselineLm {
        signature: sig,
        vocab: file.vocab,
        embeddings: file.embeddings,
        query: file.attention.query,
        key: file.attention.key,
        value: file.attention.value,
        w1: file.ffw.w1,
        b1: file.ffw.b1,
        w2: file.ffw.w2,
        b2: file.ffw.b2,
        context: file.metadata.context,
    };
    model.validate()?;
    Ok(ModelDocument {
        model: Model::Baseline(model),
        metadata: ModelMetadata { seed: file.metadata.seed, epochs: file.metadata.epochs },
    })
}

/// Parses and validates a model document.
pub fn from_json(text: &str) -> Result<ModelDocument> {
    let value: serde_json::Value = serde_json::from_str(text).map_err(parse_error)?;
    let version = value.get("format_version").ok_or_else(|| Error::invalid("missing format_version"))?;
    match version.as_u64() {
        Some(FORMAT_VERSION) => {}
        Some(v) => return Err(Error::UnsupportedVersion(v)),
        None => return Err(Error::invalid(format!("format_version must be an integer, got {version}"))),
    }
    // Re-parse from text so schema errors keep their line and column.
    match value.get("kind").and_then(|k| k.as_str()).unwrap_or("spinor") {
        "spinor" => spinor_from_file(serde_json::from_str(text).map_err(parse_error)?),
        "baseline" => baseline_from_file(serde_json::from_str(text).map_err(parse_error)?),
        other => Err(Error::invalid(format!("unknown model kind {other:?}"))),
    }
}

/// Writes `contents` next to `path` and renames it into place.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(contents)?;
    tmp.flush()?;
    tmp.persist(path).map_err(|e| Error::Io(e.error))?;
    Ok(())
}

pub fn save_model(doc: &ModelDocument, path: &Path) -> Result<()> {
    let mut json = to_json(doc)?;
    json.push('\n');
    write_atomic(path, json.as_bytes())
}

pub fn load_model(path: &Path) -> Result<ModelDocument> {
    let bytes = std::fs::read(path)?;
    let text = String::from_utf8(bytes).map_err(|e| Error::Encoding(format!("{}: {e}", path.display())))?;
    from_json(&text)
}
