use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use spinembed_core::spinor::{orbit720, orbit_csv};
use spinembed_core::Signature;

fn spinembed(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_spinembed")).args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn train_model(dir: &Path, name: &str) -> String {
    let path = dir.join(name);
    let p = path.to_str().unwrap().to_string();
    let out = spinembed(&[
        "train-lm",
        "--corpus",
        "builtin:repetitive",
        "--p",
        "3",
        "--q",
        "0",
        "--epochs",
        "4",
        "--out",
        &p,
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    p
}

#[test]
fn algebra_summary_and_table() {
    let out = spinembed(&["algebra", "--p", "1", "--q", "1", "--table"]);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    assert!(text.starts_with("signature Cl(1,1)\n"));
    assert!(text.contains("e1^2=1 e2^2=-1"));
    assert!(text.contains(" e12  e12  -e2  -e1    1\n"), "{text}");
}

#[test]
fn demo720_prints_the_orbit_table() {
    let out = spinembed(&["demo720", "--p", "3", "--q", "0", "--steps", "4"]);
    assert_eq!(code(&out), 0);
    let expected = orbit_csv(&orbit720(Signature::new(3, 0).unwrap(), 4).unwrap());
    assert_eq!(stdout(&out), expected);
    let lines: Vec<String> = stdout(&out).lines().map(String::from).collect();
    assert_eq!(lines[3], "2,360.000000,-1.000000,0.000000,1.000000,actor*");
    assert_eq!(lines[5], "4,720.000000,1.000000,0.000000,1.000000,actor");
}

#[test]
fn exit_codes() {
    assert_eq!(code(&spinembed(&["demo720", "--p", "1", "--q", "1"])), 2);
    assert_eq!(code(&spinembed(&["algebra", "--p", "13", "--q", "0"])), 2);
    assert_eq!(code(&spinembed(&["no-such-command"])), 2);
    assert_eq!(code(&spinembed(&["algebra", "--p", "x", "--q", "0"])), 2);
    assert_eq!(code(&spinembed(&["--help"])), 0);

    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    fs::write(&bad, "{ \"format_version\": 1, ").unwrap();
    let out = spinembed(&["project", "--model", bad.to_str().unwrap(), "--out", "x.csv"]);
    assert_eq!(code(&out), 3);
    assert!(String::from_utf8_lossy(&out.stderr).contains("line"));

    let v2 = dir.path().join("v2.json");
    fs::write(&v2, "{ \"format_version\": 2 }").unwrap();
    assert_eq!(code(&spinembed(&["project", "--model", v2.to_str().unwrap(), "--out", "x.csv"])), 3);

    let empty = dir.path().join("empty.txt");
    fs::write(&empty, "").unwrap();
    let out_path = dir.path().join("m.json");
    let args =
        ["train-lm", "--corpus", empty.to_str().unwrap(), "--p", "2", "--q", "0", "--out", out_path.to_str().unwrap()];
    assert_eq!(code(&spinembed(&args)), 2);

    let latin1 = dir.path().join("latin1.txt");
    fs::write(&latin1, [0x61, 0x20, 0xe9, 0x20, 0x62]).unwrap();
    let args =
        ["train-lm", "--corpus", latin1.to_str().unwrap(), "--p", "2", "--q", "0", "--out", out_path.to_str().unwrap()];
    assert_eq!(code(&spinembed(&args)), 3);
}

#[test]
fn divergent_training_exits_with_numeric_code() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("m.json");
    let out = spinembed(&[
        "train-lm",
        "--corpus",
        "builtin:random",
        "--p",
        "3",
        "--q",
        "0",
        "--lr",
        "1e300",
        "--epochs",
        "3",
        "--out",
        out_path.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 4, "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stderr).contains("epoch"));
    assert!(!out_path.exists());
}

#[test]
fn training_is_byte_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let a = train_model(dir.path(), "a.json");
    let b = train_model(dir.path(), "b.json");
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());

    let out = spinembed(&[
        "train-lm",
        "--corpus",
        "builtin:repetitive",
        "--p",
        "3",
        "--q",
        "0",
        "--epochs",
        "4",
        "--out",
        &a,
    ]);
    let csv = stdout(&out);
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "epoch,train_ppl,val_ppl");
    assert_eq!(lines.len(), 6);
}

#[test]
fn corpus_file_and_baseline() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("c.txt");
    fs::write(&corpus, "x y z ".repeat(40)).unwrap();
    let model = dir.path().join("b.json");
    let out = spinembed(&[
        "train-baseline",
        "--corpus",
        corpus.to_str().unwrap(),
        "--p",
        "3",
        "--q",
        "0",
        "--epochs",
        "2",
        "--lr",
        "1",
        "--out",
        model.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(stdout(&out).lines().count(), 4);
    let json = fs::read_to_string(&model).unwrap();
    assert!(json.contains("\"kind\": \"baseline\""));
    let out = spinembed(&["attend", "--model", model.to_str().unwrap(), "--text", "x y"]);
    assert_eq!(code(&out), 3);
}

#[test]
fn attend_project_and_analogy() {
    let dir = tempfile::tempdir().unwrap();
    let model = train_model(dir.path(), "m.json");

    let out = spinembed(&["attend", "--model", &model, "--text", "a b a"]);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    let rows: Vec<&str> = text.lines().collect();
    assert_eq!(rows[0], "query,token,k0,k1,k2");
    assert!(rows[1].starts_with("0,a,1.000000,0.000000,0.000000"));
    for row in &rows[1..] {
        let sum: f64 = row.split(',').skip(2).map(|w| w.parse::<f64>().unwrap()).sum();
        assert!((sum - 1.0).abs() < 1e-5);
    }
    assert_eq!(code(&spinembed(&["attend", "--model", &model, "--text", "a zebra"])), 3);

    let csv = dir.path().join("p.csv");
    let out = spinembed(&["project", "--model", &model, "--out", csv.to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    let projection = fs::read_to_string(&csv).unwrap();
    assert!(projection.starts_with("token,x,y\na,"));
    assert_eq!(projection.lines().count(), 3);

    let pairs = dir.path().join("pairs.txt");
    fs::write(&pairs, "a b\n\nb a\n").unwrap();
    let out = spinembed(&["analogy", "--model", &model, "--pairs", pairs.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let text = stdout(&out);
    assert!(text.starts_with("pairs,2\nevaluated,2\naccuracy,"));
    assert!(text.contains("blade,coefficient\n1,"));
    assert!(text.contains("\ne23,"));

    fs::write(&pairs, "a b c\n").unwrap();
    assert_eq!(code(&spinembed(&["analogy", "--model", &model, "--pairs", pairs.to_str().unwrap()])), 3);
}

#[test]
fn ablation_report() {
    let out = spinembed(&[
        "ablate",
        "--corpus",
        "builtin:repetitive",
        "--signatures",
        "2,0;3,0;0,3",
        "--epochs",
        "2",
        "--no-timing",
    ]);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    let rows: Vec<&str> = text.lines().collect();
    assert_eq!(rows[0], "p,q,val_ppl");
    assert!(rows[1].starts_with("2,0,"));
    assert!(rows[3].starts_with("0,3,"));
    let again = spinembed(&[
        "ablate",
        "--corpus",
        "builtin:repetitive",
        "--signatures",
        "2,0;3,0;0,3",
        "--epochs",
        "2",
        "--no-timing",
    ]);
    assert_eq!(stdout(&again), text);

    let timed = spinembed(&["ablate", "--corpus", "builtin:repetitive", "--signatures", "2,0", "--epochs", "1"]);
    assert!(stdout(&timed).starts_with("p,q,val_ppl,seconds\n"));
    assert_eq!(code(&spinembed(&["ablate", "--corpus", "builtin:repetitive", "--signatures", "4"])), 2);
    assert_eq!(code(&spinembed(&["ablate", "--corpus", "builtin:repetitive", "--signatures", "7,0"])), 2);
}
