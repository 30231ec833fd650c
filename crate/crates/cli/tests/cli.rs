use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::{Command, Output, Stdio};

use morphtag::conllu_io::{read_conllu, write_conllu};
use morphtag::pipeline::annotate;
use morphtag::{ColumnOrder, MorphDict, TaggerModel};

fn data(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../core/tests/data")
        .join(name)
}

fn morphtag(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_morphtag"))
        .args(args)
        .output()
        .unwrap()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn train_model(dir: &Path) -> PathBuf {
    let model = dir.join("model.bin");
    let out = morphtag(&[
        "train",
        "--input",
        path(&data("train.conllu")),
        "--output",
        path(&model),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    model
}

#[test]
fn tag_matches_library() {
    let dir = tempfile::tempdir().unwrap();
    let model = train_model(dir.path());
    let tagged = dir.path().join("dev.tagged.conllu");
    let out = morphtag(&[
        "tag",
        "--model",
        path(&model),
        "--dict",
        path(&data("dict.tsv")),
        "--input",
        path(&data("dev.conllu")),
        "--output",
        path(&tagged),
        "--threads",
        "3",
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );

    let dev = read_conllu(data("dev.conllu")).unwrap();
    let dict = MorphDict::load(data("dict.tsv"), ColumnOrder::FormLemmaTag).unwrap();
    let expected = annotate(&TaggerModel::load(&model).unwrap(), Some(&dict), &dev, 1).unwrap();
    assert_eq!(
        std::fs::read_to_string(&tagged).unwrap(),
        write_conllu(&expected)
    );
}

#[test]
fn tag_reads_text_from_stdin() {
    let dir = tempfile::tempdir().unwrap();
    let model = train_model(dir.path());
    let mut child = Command::new(env!("CARGO_BIN_EXE_morphtag"))
        .args(["tag", "--model", path(&model), "--text"])
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .spawn()
        .unwrap();
    child
        .stdin
        .take()
        .unwrap()
        .write_all("Pes vidí ženy. Dr. Novák čte.".as_bytes())
        .unwrap();
    let out = child.wait_with_output().unwrap();
    assert!(out.status.success());
    let sentences = morphtag::parse_conllu(&String::from_utf8(out.stdout).unwrap()).unwrap();
    assert_eq!(sentences.len(), 2);
    assert_eq!(sentences[1].tokens[0].form, "Dr.");
    assert!(sentences
        .iter()
        .flat_map(|s| &s.tokens)
        .all(|t| t.lemma.is_some() && t.xpos.is_some()));
}

#[test]
fn eval_of_gold_against_itself() {
    let gold = data("dev.conllu");
    let out = morphtag(&[
        "eval",
        "--gold",
        path(&gold),
        "--system",
        path(&gold),
        "--dict",
        path(&data("dict.tsv")),
        "--json",
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["macro_avg"]["lemma_acc"], 100.0);
    assert_eq!(report["macro_avg"]["pos_acc"], 100.0);
    assert_eq!(report["error_categories"]["lemma_errors"], 0);
}

#[test]
fn dict_stats_counts() {
    let dir = tempfile::tempdir().unwrap();
    let dict = dir.path().join("small.tsv");
    std::fs::write(
        &dict,
        "pes\tpes\tNNMS1-----A----\n\
         ženy\tžena\tNNFS2-----A----\n\
         ženy\tžena\tNNFP1-----A----\n\
         ženy\tžena\tNNFP4-----A----\n\
         psa\tpes\tNNMS2-----A----\n\
         psa\tpes\tNNMS4-----A----\n",
    )
    .unwrap();
    let out = morphtag(&["dict-stats", "--dict", path(&dict), "--json"]);
    assert!(out.status.success());
    let stats: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(stats["forms"], 3);
    assert_eq!(stats["entries"], 6);
    assert_eq!(stats["lemmas"], 2);
    assert_eq!(
        stats["ambiguity_histogram"],
        serde_json::json!([1, 1, 1, 0, 0, 0, 0, 0, 0])
    );
}

#[test]
fn dict_build_roundtrips() {
    let dir = tempfile::tempdir().unwrap();
    let bin = dir.path().join("dict.bin");
    let out = morphtag(&[
        "dict-build",
        "--input",
        path(&data("dict.tsv")),
        "--output",
        path(&bin),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let tsv = MorphDict::load(data("dict.tsv"), ColumnOrder::FormLemmaTag).unwrap();
    let compiled = MorphDict::load_binary(&bin).unwrap();
    assert!(tsv.forms().eq(compiled.forms()));
}

#[test]
fn exit_codes() {
    assert_eq!(morphtag(&["tag"]).status.code(), Some(2));
    assert_eq!(morphtag(&["no-such-command"]).status.code(), Some(2));
    let out = morphtag(&[
        "tag",
        "--model",
        "/nonexistent/model.bin",
        "--input",
        "/dev/null",
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(!out.stderr.is_empty());
}
