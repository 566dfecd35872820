use super::*;
use crate::algebra::Signature;
use crate::train::{BaselineLm, SpinorLm};
use crate::Error;

fn vocab(n: usize) -> Vec<String> {
    (0..n).map(|i| format!("tok{i}")).collect()
}

fn spinor_doc(seed: u64) -> ModelDocument {
    let model = SpinorLm::init(Signature::new(3, 0).unwrap(), vocab(4), 6, seed).unwrap();
    ModelDocument { model: Model::Spinor(model), metadata: ModelMetadata { seed, epochs: 3 } }
}

#[test]
fn spinor_model_round_trips() {
    let doc = spinor_doc(1);
    let text = to_json(&doc).unwrap();
    assert_eq!(from_json(&text).unwrap(), doc);
    assert!(text.contains("\"format_version\": 1"));
}

#[test]
fn baseline_model_round_trips() {
    let model = BaselineLm::init(Signature::new(2, 1).unwrap(), vocab(3), 5, 2).unwrap();
    let doc = ModelDocument { model: Model::Baseline(model), metadata: ModelMetadata { seed: 2, epochs: 0 } };
    assert_eq!(from_json(&to_json(&doc).unwrap()).unwrap(), doc);
}

#[test]
fn save_and_load_through_a_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("model.json");
    let doc = spinor_doc(3);
    save_model(&doc, &path).unwrap();
    assert_eq!(load_model(&path).unwrap(), doc);
    save_model(&spinor_doc(4), &path).unwrap();
    assert_eq!(load_model(&path).unwrap(), spinor_doc(4));
}

fn edit(doc: &ModelDocument, f: impl FnOnce(&mut serde_json::Value)) -> String {
    let mut v: serde_json::Value = serde_json::from_str(&to_json(doc).unwrap()).unwrap();
    f(&mut v);
    serde_json::to_string_pretty(&v).unwrap()
}

#[test]
fn rejects_other_versions() {
    let text = edit(&spinor_doc(0), |v| v["format_version"] = 2.into());
    assert!(matches!(from_json(&text), Err(Error::UnsupportedVersion(2))));
}

#[test]
fn wrong_generator_length_names_the_token() {
    let text = edit(&spinor_doc(0), |v| v["generators"][2] = serde_json::json!([0.1, 0.2]));
    let err = from_json(&text).unwrap_err();
    assert_eq!(err.kind(), crate::ErrorKind::Validation);
    assert!(err.to_string().contains("tok2"), "{err}");
}

#[test]
fn inconsistent_documents_are_validation_errors() {
    let doc = spinor_doc(0);
    for text in [
        edit(&doc, |v| v["vocab"][1] = "tok0".into()),
        edit(&doc, |v| v["signature"] = serde_json::json!({"p": 0, "q": 0})),
        edit(&doc, |v| v["positional"]["frequency_decay"] = 3.0.into()),
        edit(&doc, |v| v["attention"]["heads"] = serde_json::json!([])),
        edit(&doc, |v| v["attention"]["ffw"]["hidden"] = 99.into()),
        edit(&doc, |v| v["kind"] = "other".into()),
    ] {
        assert_eq!(from_json(&text).unwrap_err().kind(), crate::ErrorKind::Validation, "{text}");
    }
}

#[test]
fn malformed_json_reports_line_and_column() {
    let text = to_json(&spinor_doc(0)).unwrap();
    let broken = text.replacen("\"vocab\": [", "\"vocab\": [,", 1);
    match from_json(&broken) {
        Err(Error::Parse { line, column, .. }) => {
            let expected = text.lines().position(|l| l.contains("\"vocab\"")).unwrap() + 1;
            assert_eq!(line, expected);
            assert!(column > 0);
        }
        other => panic!("expected parse error, got {other:?}"),
    }
    let missing = edit(&spinor_doc(0), |v| {
        v.as_object_mut().unwrap().remove("generators");
    });
    assert!(matches!(from_json(&missing), Err(Error::Parse { .. })));
}

#[test]
fn awkward_floats_round_trip_bit_exactly() {
    let mut doc = spinor_doc(5);
    if let Model::Spinor(m) = &mut doc.model {
        let values = [0.1 + 0.2, 1e-300, -2.2250738585072014e-308, 5e-324, 1.7976931348623157e308, -0.0];
        m.block.ffw.b2[..4].copy_from_slice(&values[..4]);
        m.block.ffw.b1[0] = values[4];
        m.block.ffw.b1[1] = values[5];
    }
    let back = from_json(&to_json(&doc).unwrap()).unwrap();
    let (Model::Spinor(a), Model::Spinor(b)) = (&doc.model, &back.model) else { panic!() };
    for (x, y) in a.block.parameters().iter().zip(b.block.parameters()) {
        assert_eq!(x.to_bits(), y.to_bits());
    }
}
