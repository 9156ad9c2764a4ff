//! Library-level runs over the shipped fixtures.

use std::fs;
use std::path::{Path, PathBuf};

use kgext::config::RunConfig;
use kgext::extend::ExtensionReport;
use kgext::pipeline::{self, gold_set, read_alignment_file, read_graph_file, Resources, RUN_ARTIFACTS};

fn fixture(rel: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(rel)
}

fn config(rel: &str, out: &Path) -> RunConfig {
    let mut cfg = RunConfig::load(&fixture(rel)).unwrap();
    cfg.paths.output = Some(out.to_path_buf());
    cfg
}

#[test]
fn shipped_configs_resolve_to_existing_files() {
    for rel in ["toy/toy.conf", "oaei/oaei.conf"] {
        let cfg = RunConfig::load(&fixture(rel)).unwrap();
        let p = &cfg.paths;
        for f in [&p.reference, &p.candidate, &p.etype_alignments, &p.instance_model, &p.schema_model]
            .into_iter()
            .flatten()
        {
            assert!(f.is_file(), "{rel}: {} missing", f.display());
        }
        let again = RunConfig::parse(&cfg.to_text(), None).unwrap();
        assert_eq!(again.to_text(), cfg.to_text());
    }
}

#[test]
fn toy_run_reproduces_golden_extension() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config("toy/toy.conf", dir.path());
    let summary = pipeline::run(&cfg).unwrap();
    for name in RUN_ARTIFACTS {
        assert!(dir.path().join(name).is_file(), "{name} not written");
    }
    let got = fs::read_to_string(dir.path().join("extended.json")).unwrap();
    let want = fs::read_to_string(fixture("toy/extended.json")).unwrap();
    assert_eq!(got, want);
    assert_eq!(summary.etype_alignments, 2);
    assert_eq!(summary.entities_discarded, 0);
}

#[test]
fn toy_extension_keeps_reference_and_accounts_for_every_entity() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config("toy/toy.conf", dir.path());
    pipeline::run(&cfg).unwrap();
    let res = Resources::load(&cfg).unwrap();
    let a = read_graph_file(cfg.paths.reference.as_deref().unwrap(), &res).unwrap();
    let b = read_graph_file(cfg.paths.candidate.as_deref().unwrap(), &res).unwrap();
    let ext = read_graph_file(&dir.path().join("extended.json"), &res).unwrap();
    let report: ExtensionReport =
        serde_json::from_str(&fs::read_to_string(dir.path().join("extension_report.json")).unwrap()).unwrap();

    for (id, t) in a.etypes() {
        let after = ext.etype(id).unwrap();
        assert!(t.direct_properties.is_subset(&after.direct_properties), "{id} lost properties");
        assert!(t.superclasses.is_subset(&after.superclasses));
    }
    for (id, e) in a.entities() {
        assert_eq!(ext.entity(id).unwrap().etype, e.etype);
    }
    assert_eq!(report.placements.len(), report.entities_added);
    assert_eq!(report.discarded.len(), report.entities_discarded);
    assert_eq!(report.entities_added + report.entities_discarded, b.entities().len());
    assert_eq!(ext.entities().len(), a.entities().len() + report.entities_added);
    for p in &report.placements {
        assert_eq!(ext.entity(&p.id).unwrap().etype.as_deref(), Some(p.etype.as_str()));
    }
}

#[test]
fn oaei_schema_run_recovers_gold() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config("oaei/oaei.conf", dir.path());
    pipeline::run(&cfg).unwrap();
    let got = read_alignment_file(&dir.path().join("etype_alignments.tsv")).unwrap();
    let gold = read_alignment_file(&fixture("oaei/test-gold.tsv")).unwrap();
    assert_eq!(gold_set(&got), gold_set(&gold));
}

#[test]
fn run_is_repeatable() {
    let d1 = tempfile::tempdir().unwrap();
    let d2 = tempfile::tempdir().unwrap();
    pipeline::run(&config("oaei/oaei.conf", d1.path())).unwrap();
    pipeline::run(&config("oaei/oaei.conf", d2.path())).unwrap();
    for name in RUN_ARTIFACTS.iter().filter(|n| **n != "config.txt") {
        let a = fs::read(d1.path().join(name)).unwrap();
        let b = fs::read(d2.path().join(name)).unwrap();
        assert!(a == b, "{name} differs between runs");
    }
}
