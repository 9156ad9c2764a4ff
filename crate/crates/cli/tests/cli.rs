use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn fixture(rel: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(rel)
}

fn kgext(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_kgext")).args(args).output().expect("spawn kgext")
}

fn ok(args: &[&str]) -> String {
    let out = kgext(args);
    assert!(
        out.status.success(),
        "kgext {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

const SUBCOMMANDS: [&str; 11] = [
    "ingest",
    "formalize",
    "match-props",
    "pairs",
    "simtable",
    "train",
    "recognize",
    "extend",
    "assess",
    "report",
    "run",
];

#[test]
fn help_lists_every_subcommand_and_global_flag() {
    let help = ok(&["--help"]);
    for cmd in SUBCOMMANDS {
        assert!(help.contains(cmd), "missing {cmd}");
    }
    for flag in ["--config", "--set", "--threads", "--verbose"] {
        assert!(help.contains(flag), "missing {flag}");
    }
}

#[test]
fn every_subcommand_has_help() {
    let expect: [(&str, &[&str]); 11] = [
        ("ingest", &["--out", "--name", "--lenient"]),
        ("formalize", &["--scope", "--out"]),
        ("match-props", &["--ref", "--cand", "--tau", "--out"]),
        ("pairs", &["--kind", "--props", "--pruned"]),
        ("simtable", &["--pairs", "--props", "--raw"]),
        ("train", &["--gold", "--model-kind", "--seed", "--features-out"]),
        ("recognize", &["--model", "--cutoff", "--one-to-one", "--gold", "--eval-out"]),
        (
            "extend",
            &["--etype-alignments", "--instances", "--conflict", "--subclass", "--keep-unaligned-etypes", "--report"],
        ),
        ("assess", &["--query", "--lotus", "--csv"]),
        ("report", &["<DIR>"]),
        ("run", &["--out"]),
    ];
    for (cmd, flags) in expect {
        let help = ok(&[cmd, "--help"]);
        for f in flags {
            assert!(help.contains(f), "{cmd} --help lacks {f}");
        }
    }
}

#[test]
fn usage_errors_exit_1() {
    assert_eq!(kgext(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(kgext(&["formalize"]).status.code(), Some(1));
}

#[test]
fn unknown_config_key_exits_1_with_key_path() {
    let dir = TempDir::new().unwrap();
    let out = kgext(&[
        "--set",
        "propsim.lamda=0.3",
        "formalize",
        s(&fixture("toy/toy-a.json")),
        "--out",
        s(&dir.path().join("ctx.csv")),
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("propsim.lamda"));
}

#[test]
fn parse_errors_carry_line_and_column() {
    let dir = TempDir::new().unwrap();
    let bad = dir.path().join("bad.nt");
    fs::write(&bad, "<http://x/a> <http://x/p> <http://x/b> .\n<http://x/a> <http://x/p> oops .\n").unwrap();
    let out = kgext(&["ingest", s(&bad), "--out", s(&dir.path().join("g.json"))]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("line 2"), "{err}");
    assert!(err.contains("bad.nt"), "{err}");
}

#[test]
fn lenient_ingest_skips_bad_lines() {
    let dir = TempDir::new().unwrap();
    let nt = dir.path().join("g.nt");
    fs::write(
        &nt,
        concat!(
            "<http://x/Person> <http://www.w3.org/1999/02/22-rdf-syntax-ns#type> <http://www.w3.org/2002/07/owl#Class> .\n",
            "<http://x/name> <http://www.w3.org/2000/01/rdf-schema#domain> <http://x/Person> .\n",
            "garbage\n",
        ),
    )
    .unwrap();
    let out = dir.path().join("g.json");
    let stdout = ok(&["ingest", s(&nt), "--lenient", "--name", "mini", "--out", s(&out)]);
    assert!(stdout.contains("mini: 1 entity types, 1 properties"), "{stdout}");
    let json: serde_json::Value = serde_json::from_str(&fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(json["name"], "mini");
    assert_eq!(json["etypes"][0]["label"], "Person");
    assert_eq!(json["etypes"][0]["props"][0], "http://x/name");
}

#[test]
fn assess_on_empty_graph_exits_1() {
    let dir = TempDir::new().unwrap();
    let empty = dir.path().join("empty.json");
    fs::write(&empty, r#"{"name": "empty", "etypes": [], "entities": []}"#).unwrap();
    let out = kgext(&["assess", s(&empty), "--query", "person", "--out", s(&dir.path().join("a.json"))]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("no entity type with properties"));
}

#[test]
fn nan_in_similarity_table_is_a_validation_error() {
    let dir = TempDir::new().unwrap();
    let t = |n: &str| dir.path().join(n);
    fs::write(t("pairs.tsv"), "# kind=etype-entity\nAthlete\tUsainBolt2\n").unwrap();
    fs::write(
        t("sims.csv"),
        "# kind=etype-entity normalized=true\nleft_id,right_id,sim_h,sim_v,sim_i\nAthlete,UsainBolt2,NaN,0.5,0.5\n",
    )
    .unwrap();
    let out = recognize_toy(&t("pairs.tsv"), &t("sims.csv"), &fixture("toy/stub-model.json"), &t("out.tsv"));
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 3"));
}

fn recognize_toy(pairs: &Path, sims: &Path, model: &Path, out: &Path) -> Output {
    kgext(&[
        "recognize",
        "--ref",
        s(&fixture("toy/toy-a.json")),
        "--cand",
        s(&fixture("toy/toy-b.json")),
        "--pairs",
        s(pairs),
        "--sims",
        s(sims),
        "--model",
        s(model),
        "--out",
        s(out),
    ])
}

#[test]
fn non_finite_model_score_exits_2() {
    let dir = TempDir::new().unwrap();
    let t = |n: &str| dir.path().join(n);
    fs::write(t("pairs.tsv"), "# kind=etype-entity\nAthlete\tUsainBolt2\n").unwrap();
    fs::write(
        t("sims.csv"),
        "# kind=etype-entity normalized=true\nleft_id,right_id,sim_h,sim_v,sim_i\nAthlete,UsainBolt2,0.5,0.5,0.5\n",
    )
    .unwrap();
    // A zero scale turns the standardized feature into 0/0.
    let model = serde_json::json!({
        "format": "kgext-model",
        "version": 1,
        "layout": "instance",
        "seed": 0,
        "params": {"kind": "logreg", "lr": 0.1, "epochs": 1, "l2": 0.0},
        "body": {
            "kind": "logreg",
            "standardizer": {"mean": [0.5, 0.5, 0.5], "scale": [0.0, 1.0, 1.0]},
            "weights": [1.0, 1.0, 1.0],
            "bias": 0.0
        }
    });
    fs::write(t("model.json"), model.to_string()).unwrap();
    let out = recognize_toy(&t("pairs.tsv"), &t("sims.csv"), &t("model.json"), &t("out.tsv"));
    assert_eq!(out.status.code(), Some(2), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stderr).contains("non-finite"));
}

#[test]
fn formalize_writes_three_valued_context() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("ctx.csv");
    ok(&["formalize", s(&fixture("toy/toy-a.json")), "--scope", "schema", "--out", s(&out)]);
    let text = fs::read_to_string(&out).unwrap();
    // Person does not carry gold_medalist, but its subclass Athlete does.
    let header: Vec<&str> = text.lines().next().unwrap().split(',').collect();
    let col = header.iter().position(|h| *h == "gold_medalist").unwrap();
    let person = text.lines().find(|l| l.contains("Person")).unwrap();
    assert_eq!(person.split(',').nth(col), Some("0"));
}

fn extend_args<'a>(dir: &'a Path, extra: &[&'a str]) -> Vec<String> {
    let mut v: Vec<String> = [
        "extend",
        "--ref",
        s(&fixture("toy/toy-a.json")),
        "--cand",
        s(&fixture("toy/toy-b.json")),
        "--etype-alignments",
        s(&fixture("toy/etype-alignments.tsv")),
        "--props",
        s(&dir.join("props.tsv")),
        "--out",
        s(&dir.join("extended.json")),
    ]
    .iter()
    .map(|x| x.to_string())
    .collect();
    v.extend(extra.iter().map(|x| x.to_string()));
    v
}

#[test]
fn extend_with_stub_model_matches_golden_file() {
    let dir = TempDir::new().unwrap();
    let d = dir.path();
    ok(&[
        "match-props",
        "--ref",
        s(&fixture("toy/toy-a.json")),
        "--cand",
        s(&fixture("toy/toy-b.json")),
        "--out",
        s(&d.join("props.tsv")),
    ]);
    let model = fixture("toy/stub-model.json");
    let args = extend_args(d, &["--model", s(&model), "--report", s(&d.join("r.json"))]);
    let stdout = ok(&args.iter().map(String::as_str).collect::<Vec<_>>());
    assert!(stdout.contains("added 1 entity types, 2 properties, 3 entities"), "{stdout}");
    assert_eq!(
        fs::read(d.join("extended.json")).unwrap(),
        fs::read(fixture("toy/extended.json")).unwrap()
    );

    // Strict conflict policy still succeeds: no id collides with a different label.
    let args = extend_args(d, &["--model", s(&model), "--conflict", "strict"]);
    ok(&args.iter().map(String::as_str).collect::<Vec<_>>());

    let args = extend_args(d, &["--model", s(&model), "--keep-unaligned-etypes"]);
    ok(&args.iter().map(String::as_str).collect::<Vec<_>>());
    let ext = fs::read_to_string(d.join("extended.json")).unwrap();
    assert!(ext.contains("\"Sportsman\""));
}

#[test]
fn train_twice_gives_identical_models() {
    let dir = TempDir::new().unwrap();
    let t = |n: &str| dir.path().join(n);
    let (a, b) = (fixture("oaei/train-a.json"), fixture("oaei/train-b.json"));
    ok(&["match-props", "--ref", s(&a), "--cand", s(&b), "--out", s(&t("props.tsv"))]);
    ok(&["pairs", "--ref", s(&a), "--cand", s(&b), "--kind", "etype-etype", "--out", s(&t("pairs.tsv"))]);
    ok(&[
        "simtable",
        "--ref",
        s(&a),
        "--cand",
        s(&b),
        "--pairs",
        s(&t("pairs.tsv")),
        "--props",
        s(&t("props.tsv")),
        "--out",
        s(&t("sims.csv")),
    ]);
    for (kind, seed) in [("logreg", "3"), ("tree", "3"), ("gbt", "3")] {
        let mut models = Vec::new();
        for i in 0..2 {
            let out = t(&format!("{kind}{i}.json"));
            ok(&[
                "train",
                "--ref",
                s(&a),
                "--cand",
                s(&b),
                "--pairs",
                s(&t("pairs.tsv")),
                "--sims",
                s(&t("sims.csv")),
                "--gold",
                s(&fixture("oaei/train-gold.tsv")),
                "--model-kind",
                kind,
                "--seed",
                seed,
                "--out",
                s(&out),
            ]);
            models.push(fs::read(out).unwrap());
        }
        assert_eq!(models[0], models[1], "{kind}");
    }
}

fn snapshot(dir: &Path) -> Vec<(PathBuf, Vec<u8>)> {
    let mut v: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.is_file())
        .map(|p| {
            let bytes = fs::read(&p).unwrap();
            (p, bytes)
        })
        .collect();
    v.sort();
    v
}

#[test]
fn run_writes_every_artifact_and_leaves_inputs_alone() {
    let dir = TempDir::new().unwrap();
    let before = snapshot(&fixture("toy"));
    let stdout = ok(&["--config", s(&fixture("toy/toy.conf")), "run", "--out", s(dir.path())]);
    assert!(stdout.contains("2 etype alignments"), "{stdout}");
    assert_eq!(snapshot(&fixture("toy")), before);
    for name in kgext::pipeline::RUN_ARTIFACTS {
        assert!(dir.path().join(name).exists(), "missing {name}");
    }
    assert_eq!(
        fs::read(dir.path().join("extended.json")).unwrap(),
        fs::read(fixture("toy/extended.json")).unwrap()
    );
}

#[test]
fn report_regenerates_summary_from_artifacts() {
    let dir = TempDir::new().unwrap();
    ok(&["--config", s(&fixture("toy/toy.conf")), "run", "--out", s(dir.path())]);
    let md = fs::read_to_string(dir.path().join("report.md")).unwrap();
    fs::remove_file(dir.path().join("report.md")).unwrap();
    fs::remove_file(dir.path().join("report.json")).unwrap();
    ok(&["report", s(dir.path())]);
    assert_eq!(fs::read_to_string(dir.path().join("report.md")).unwrap(), md);
    let json: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("report.json")).unwrap()).unwrap();
    assert_eq!(json["etype_alignments"], 2);
}

#[test]
fn assess_reports_every_graph_and_lotus() {
    let dir = TempDir::new().unwrap();
    let t = |n: &str| dir.path().join(n);
    ok(&[
        "assess",
        s(&fixture("toy/toy-a.json")),
        s(&fixture("toy/toy-b.json")),
        "--query",
        "athlete",
        "--lotus",
        "Person,Athlete,Place",
        "--lotus-out",
        s(&t("lotus.json")),
        "--out",
        s(&t("a.json")),
        "--csv",
        s(&t("a.csv")),
    ]);
    let report: serde_json::Value = serde_json::from_str(&fs::read_to_string(t("a.json")).unwrap()).unwrap();
    let graphs: Vec<&str> = report["graphs"].as_array().unwrap().iter().map(|g| g["graph"].as_str().unwrap()).collect();
    assert_eq!(graphs.len(), 2);
    assert!(graphs.contains(&"toy-a") && graphs.contains(&"toy-b"));
    // DEM of Athlete: 4 properties + 1 superclass.
    let a = report["graphs"].as_array().unwrap().iter().find(|g| g["graph"] == "toy-a").unwrap();
    assert_eq!(a["dem"], 5.0);
    let cells: Vec<serde_json::Value> = serde_json::from_str(&fs::read_to_string(t("lotus.json")).unwrap()).unwrap();
    let total: u64 = cells.iter().map(|c| c["count"].as_u64().unwrap()).sum();
    // name, birth, gold_medalist, team, settlement
    assert_eq!(total, 5);
    assert!(fs::read_to_string(t("a.csv")).unwrap().starts_with('#'));
}

#[test]
fn recognize_writes_evaluation() {
    let dir = TempDir::new().unwrap();
    let t = |n: &str| dir.path().join(n);
    let (a, b) = (fixture("oaei/test-a.json"), fixture("oaei/test-b.json"));
    ok(&["match-props", "--ref", s(&a), "--cand", s(&b), "--out", s(&t("props.tsv"))]);
    ok(&["pairs", "--ref", s(&a), "--cand", s(&b), "--kind", "schema", "--out", s(&t("pairs.tsv"))]);
    ok(&[
        "simtable",
        "--ref",
        s(&a),
        "--cand",
        s(&b),
        "--pairs",
        s(&t("pairs.tsv")),
        "--props",
        s(&t("props.tsv")),
        "--out",
        s(&t("sims.csv")),
    ]);
    let missing_gold = kgext(&[
        "recognize",
        "--ref",
        s(&a),
        "--cand",
        s(&b),
        "--pairs",
        s(&t("pairs.tsv")),
        "--sims",
        s(&t("sims.csv")),
        "--model",
        s(&fixture("oaei/schema-model.json")),
        "--eval-out",
        s(&t("eval.json")),
        "--out",
        s(&t("acc.tsv")),
    ]);
    assert_eq!(missing_gold.status.code(), Some(1));
    ok(&[
        "recognize",
        "--ref",
        s(&a),
        "--cand",
        s(&b),
        "--pairs",
        s(&t("pairs.tsv")),
        "--sims",
        s(&t("sims.csv")),
        "--model",
        s(&fixture("oaei/schema-model.json")),
        "--one-to-one",
        "--gold",
        s(&fixture("oaei/test-gold.tsv")),
        "--eval-out",
        s(&t("eval.json")),
        "--out",
        s(&t("acc.tsv")),
    ]);
    let eval: serde_json::Value = serde_json::from_str(&fs::read_to_string(t("eval.json")).unwrap()).unwrap();
    assert_eq!(eval["tp"].as_u64().unwrap() + eval["fn"].as_u64().unwrap(), 6);
    assert!(eval["f_1"].as_f64().unwrap() >= 0.85);
}
