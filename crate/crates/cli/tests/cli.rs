use std::path::PathBuf;
use std::process::{Command, Output};

use pneq_cli::Report;
use serde_json::Value;

fn corpus(file: &str) -> String {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../core/corpus");
    dir.join(file).to_string_lossy().into_owned()
}

fn pneq(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pneq")).args(args).env_remove("PNEQ_SEED").output().expect("pneq runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).expect("utf-8")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("json report")
}

fn pairs(v: &Value) -> Vec<(String, String)> {
    let mut p: Vec<(String, String)> = v
        .as_array()
        .expect("pair list")
        .iter()
        .map(|p| (p[0].as_str().unwrap().to_string(), p[1].as_str().unwrap().to_string()))
        .collect();
    p.sort();
    p
}

fn owned(p: &[(&str, &str)]) -> Vec<(String, String)> {
    let mut v: Vec<(String, String)> = p.iter().map(|(a, b)| (a.to_string(), b.to_string())).collect();
    v.sort();
    v
}

#[test]
fn check_reports_witness() {
    let net = corpus("fig6.pnet");
    let out = pneq(&["check", "--equiv", "place", &net, "2*s1+s2", "s1+2*s2", "--witness", "--json"]);
    assert_eq!(code(&out), 0);
    let report = json(&out);
    assert_eq!(report["verdict"], "equivalent");
    assert_eq!(report["kind"], "place");
    assert_eq!(pairs(&report["witness"]), owned(&[("s1", "s2"), ("s2", "s1"), ("s3", "s3")]));
    assert_eq!(pairs(&report["pairing"]).len(), 3);

    let text = pneq(&["check", "--equiv", "place", &net, "2*s1+s2", "s1+2*s2", "--witness"]);
    assert!(stdout(&text).contains("relation: {(s1, s2), (s2, s1), (s3, s3)}"));
}

#[test]
fn check_exit_codes() {
    assert_eq!(code(&pneq(&["check", "--equiv", "place", &corpus("fig14.pnet"), "s1", "s4"])), 1);
    assert_eq!(code(&pneq(&["check", "--equiv", "dplace", &corpus("fig10.pnet"), "s1", "s4"])), 0);
    assert_eq!(code(&pneq(&["check", "--equiv", "place", &corpus("fig10.pnet"), "s1", "s4"])), 1);
    assert_eq!(code(&pneq(&["check", &corpus("fig6.pnet"), "s1", "nowhere"])), 2);
    assert_eq!(code(&pneq(&["check", "--equiv", "bogus", &corpus("fig6.pnet"), "s1", "s2"])), 2);
    assert_eq!(code(&pneq(&["check", &corpus("missing.pnet"), "s1", "s2"])), 2);
    let net = corpus("fig8.pnet");
    assert_eq!(code(&pneq(&["check", &net, "P1+C1", "P2+C2", "--max-relations", "1"])), 3);
    assert_eq!(code(&pneq(&["check", &corpus("fig7.pnet"), "s1", "s5", "--strategy", "exhaustive"])), 3);
    assert_eq!(code(&pneq(&["check", &corpus("fig6.pnet"), "s1", "s2", "--strategy", "saturation", "--canonical"])), 2);
}

#[test]
fn verdicts_agree_across_strategies_and_runs() {
    let queries = [
        ("fig6.pnet", "place", "2*s1+s2", "s1+2*s2"),
        ("fig6.pnet", "place", "s1+s2", "2*s3"),
        ("fig11.pnet", "dplace", "s1", "s2+s3"),
        ("fig12.pnet", "dplace", "s1", "s3+s4"),
        ("fig13.pnet", "iplace", "s1+s2", "s3+s4"),
        ("fig13.pnet", "idplace", "s1+s2", "s3+s4"),
    ];
    for (file, kind, a, b) in queries {
        let net = corpus(file);
        let run = |extra: &[&str]| {
            let mut args = vec!["check", "--equiv", kind, &net, a, b, "--json"];
            args.extend_from_slice(extra);
            let out = pneq(&args);
            (code(&out), json(&out)["verdict"].clone())
        };
        let base = run(&["--strategy", "saturation"]);
        assert_eq!(run(&["--strategy", "saturation"]), base, "{file} {kind}");
        assert_eq!(run(&["--strategy", "exhaustive"]), base, "{file} {kind}");
        assert_eq!(run(&["--canonical"]), base, "{file} {kind}");
        assert_eq!(run(&["--parallel", "2"]), base, "{file} {kind}");
    }
}

#[test]
fn printed_witness_reverifies() {
    let dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR"));
    let cases = [
        ("fig6.pnet", "place", "2*s1+s2", "s1+2*s2"),
        ("fig10.pnet", "dplace", "s1", "s4"),
        ("fig13.pnet", "iplace", "s1+s2", "s3+s4"),
        ("fig9.pnet", "place", "s1+2*s3+s4+s7", "3*s8+2*s9"),
    ];
    for (i, (file, kind, a, b)) in cases.into_iter().enumerate() {
        let rel = dir.join(format!("witness{i}.prel"));
        let rel = rel.to_string_lossy();
        let net = corpus(file);
        assert_eq!(code(&pneq(&["check", "--equiv", kind, &net, a, b, "--witness-file", &rel])), 0);
        assert_eq!(code(&pneq(&["verify", "--equiv", kind, &net, &rel])), 0, "{file}");
        let mut args = vec!["closure", &net, &rel, a, b];
        if kind.contains('d') {
            args.push("--dummy");
        }
        assert_eq!(code(&pneq(&args)), 0, "{file}");
    }
}

#[test]
fn verify_examples() {
    assert_eq!(code(&pneq(&["verify", "--equiv", "place", &corpus("fig8.pnet"), &corpus("fig8_pc.prel")])), 0);
    assert_eq!(code(&pneq(&["verify", "--equiv", "dplace", &corpus("fig10.pnet"), &corpus("fig10_r.prel")])), 0);
    assert_eq!(code(&pneq(&["verify", "--equiv", "iplace", &corpus("fig13.pnet"), &corpus("fig13_r.prel")])), 0);

    let out = pneq(&["verify", "--equiv", "place", &corpus("fig6.pnet"), &corpus("fig6_union.prel"), "--json"]);
    assert_eq!(code(&out), 1);
    let report = json(&out);
    assert_eq!(report["verdict"], "rejected");
    let violations = report["violations"].as_array().unwrap();
    assert_eq!(violations.len(), 1);
    let v = &violations[0];
    assert!(v["m1"] == "2*s1" || v["m2"] == "2*s1", "{v}");

    let all = pneq(&["verify", "--equiv", "place", &corpus("fig6.pnet"), &corpus("fig6_union.prel"), "--all-violations", "--json"]);
    assert_eq!(json(&all)["violations"].as_array().unwrap().len(), 4);

    let out = pneq(&["verify", "--equiv", "dplace", &corpus("fig13.pnet"), &corpus("fig13_r.prel")]);
    assert_eq!(code(&out), 1);
    assert!(stdout(&out).starts_with("rejected\nunanswered: t"));
}

#[test]
fn verify_rejects_theta_in_plain_kinds() {
    assert_eq!(code(&pneq(&["verify", "--equiv", "place", &corpus("fig10.pnet"), &corpus("fig10_r.prel")])), 2);
}

#[test]
fn closure_examples() {
    let dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR"));
    let net = dir.join("closure.pnet");
    std::fs::write(&net, "place s1\nplace s2\nplace s3\nplace s4\n").unwrap();
    let rel = dir.join("closure.prel");
    std::fs::write(&rel, "s1 ~ s3\ns1 ~ s4\ns2 ~ s4\n").unwrap();
    let (net, rel) = (net.to_string_lossy(), rel.to_string_lossy());

    let out = pneq(&["closure", &net, &rel, "s1+s2", "s3+s4", "--json"]);
    assert_eq!(code(&out), 0);
    assert_eq!(pairs(&json(&out)["pairing"]), owned(&[("s1", "s3"), ("s2", "s4")]));
    let out = pneq(&["closure", &net, &rel, "s1", "s3+s4"]);
    assert_eq!(code(&out), 1);
    assert_eq!(stdout(&out), "not related\n");

    let out = pneq(&["closure", "--dummy", &corpus("fig11.pnet"), &corpus("fig11_r.prel"), "s1", "s2+s3", "--json"]);
    assert_eq!(code(&out), 0);
    assert_eq!(pairs(&json(&out)["pairing"]), owned(&[("s1", "s2"), ("0", "s3")]));
    assert_eq!(code(&pneq(&["closure", &corpus("fig11.pnet"), &corpus("fig11_r.prel"), "s1", "s2+s3"])), 2);
}

#[test]
fn maximal_lists_six_relations() {
    let out = pneq(&["maximal", &corpus("fig6.pnet"), "--equiv", "place", "--json"]);
    assert_eq!(code(&out), 0);
    let report = json(&out);
    let relations: Vec<_> = report["relations"].as_array().unwrap().iter().map(pairs).collect();
    assert_eq!(relations.len(), 6);
    assert!(relations.contains(&owned(&[("s1", "s1"), ("s2", "s2"), ("s3", "s3")])));
    assert!(relations.contains(&owned(&[("s1", "s2"), ("s2", "s1"), ("s3", "s3")])));
    let text = stdout(&pneq(&["maximal", &corpus("fig6.pnet")]));
    assert_eq!(text.lines().count(), 6);
}

#[test]
fn fire_transitions_and_steps() {
    let net = corpus("fig4.pnet");
    let out = pneq(&["fire", &net, "s1", "--trans", "t1"]);
    assert_eq!(code(&out), 0);
    assert_eq!(stdout(&out), "2*s2\n");
    assert_eq!(code(&pneq(&["fire", &net, "s1", "--step", "2*t1"])), 1);
    assert_eq!(code(&pneq(&["fire", &net, "s1", "--trans", "nope"])), 2);
    assert_eq!(code(&pneq(&["fire", &net, "s1"])), 2);
    let out = pneq(&["fire", &corpus("fig14.pnet"), "2*s1", "--step", "t1 + t1", "--json"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(json(&out)["verdict"], "fired");
}

#[test]
fn oracle_subcommands() {
    let net = corpus("fig14.pnet");
    assert_eq!(code(&pneq(&["oracle", "int", &net, "2*s1", "2*s4", "--max-states", "100"])), 1);
    assert_eq!(code(&pneq(&["oracle", "int", &net, "s1", "s4", "--max-states", "100"])), 0);
    assert_eq!(code(&pneq(&["oracle", "int", &net, "2*s1", "2*s4", "--max-states", "2"])), 3);
    assert_eq!(code(&pneq(&["oracle", "step", &corpus("fig13.pnet"), "s1+s2", "s3+s4"])), 0);
    assert_eq!(code(&pneq(&["oracle", "int", &corpus("fig4.pnet"), "s1", "s3"])), 0);

    let out = pneq(&["oracle", "game", "--equiv", "place", &corpus("fig6.pnet"), &corpus("fig6_union.prel"), "--json"]);
    assert_eq!(code(&out), 1);
    assert_eq!(json(&out)["verdict"], "rejected");
    assert_eq!(code(&pneq(&["oracle", "game", &corpus("fig8.pnet"), &corpus("fig8_pc.prel"), "--bound", "2"])), 0);
    assert_eq!(code(&pneq(&["oracle", "game", &corpus("fig8.pnet"), &corpus("fig8_pc.prel"), "--bound", "6"])), 3);
}

#[test]
fn gen_is_seeded() {
    let a = stdout(&pneq(&["gen", "--seed", "11"]));
    let b = Command::new(env!("CARGO_BIN_EXE_pneq")).args(["gen"]).env("PNEQ_SEED", "11").output().unwrap();
    assert_eq!(a, stdout(&b));
    assert_ne!(a, stdout(&pneq(&["gen", "--seed", "12"])));
    assert_eq!(stdout(&pneq(&["gen"])), stdout(&pneq(&["gen"])));

    let dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR"));
    let path = dir.join("generated.pnet");
    std::fs::write(&path, &a).unwrap();
    let out = pneq(&["check", &path.to_string_lossy(), "a", "a"]);
    assert_eq!(code(&out), 0);
}

#[test]
fn json_round_trips() {
    let out = pneq(&["check", "--equiv", "place", &corpus("fig6.pnet"), "2*s1+s2", "s1+2*s2", "--json"]);
    let report: Report = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report.verdict, "equivalent");
    assert!(report.stats.relations_examined.unwrap() >= 1);
    let again: Report = serde_json::from_str(&serde_json::to_string(&report).unwrap()).unwrap();
    assert_eq!(again, report);
    assert_eq!(serde_json::to_value(&report).unwrap(), json(&out));

    let out = pneq(&["verify", &corpus("fig6.pnet"), &corpus("fig6_union.prel"), "--all-violations", "--json"]);
    let report: Report = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report.violations.len(), 4);
    assert_eq!(serde_json::to_value(&report).unwrap(), json(&out));
}
