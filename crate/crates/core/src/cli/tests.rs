use super::commands::{cmd_holonomy, cmd_validate};
use super::examples::{example, Example, ExampleParams, JandlKind};
use super::scenario::{from_json, to_json, GerbeDoc, Loader, Mode, Scenario};
use super::{run_with, EXIT_INVALID, EXIT_IO, EXIT_OK};
use crate::linalg::{cis, C64};
use std::f64::consts::PI;
use std::path::PathBuf;

fn temp(name: &str, text: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("gerbe-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn run(args: &[&str]) -> (i32, String, String) {
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let code = run_with(std::iter::once("gerbe").chain(args.iter().copied()), &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn value(doc: &Scenario, seed: u64) -> C64 {
    let rec = cmd_holonomy(doc, None, seed, true).unwrap();
    assert!(rec.independence.unwrap().ok);
    C64::new(rec.value[0], rec.value[1])
}

fn params(theta: f64, indices: usize) -> ExampleParams {
    ExampleParams { theta, indices, ..ExampleParams::default() }
}

#[test]
fn torus_example_has_holonomy_e_i_theta() {
    for theta in [0.0, PI / 2.0, PI, 2.0 * PI] {
        for indices in [0, 3] {
            let doc = example(Example::Torus, &params(theta, indices)).unwrap();
            assert!(cmd_validate(&doc).ok);
            assert!((value(&doc, 0) - cis(theta)).norm() < 1e-9, "θ = {theta}, {indices} indices");
        }
    }
}

#[test]
fn sphere_and_random_gauge_examples() {
    let doc = example(Example::Sphere, &params(0.3, 2)).unwrap();
    assert!(cmd_validate(&doc).ok);
    assert!((value(&doc, 5) - cis(0.3)).norm() < 1e-9);
    let doc = example(Example::RandomGauge, &params(1.1, 0)).unwrap();
    assert!(cmd_validate(&doc).ok);
    assert!((value(&doc, 2) - cis(1.1)).norm() < 1e-9);
}

#[test]
fn rp2_examples_give_the_two_signs() {
    for (kind, expect) in [(JandlKind::Trivial, 1.0), (JandlKind::Twisted, -1.0)] {
        for indices in [0, 2] {
            let p = ExampleParams { jandl: kind, indices, ..ExampleParams::default() };
            let doc = example(Example::Rp2, &p).unwrap();
            assert!(cmd_validate(&doc).ok);
            assert!((value(&doc, 0) - expect).norm() < 1e-9, "{kind:?} with {indices} indices");
        }
    }
}

#[test]
fn klein_and_disc_examples_validate() {
    let doc = example(Example::Klein, &ExampleParams::default()).unwrap();
    assert!(cmd_validate(&doc).ok);
    assert!((value(&doc, 0).norm() - 1.0).abs() < 1e-9);
    let p = ExampleParams { theta: 0.7, rank: 2, ..ExampleParams::default() };
    let doc = example(Example::DiscBrane, &p).unwrap();
    assert!(cmd_validate(&doc).ok);
    assert!((value(&doc, 0).norm() - 2.0 * 0.7f64.cos()).abs() < 1e-9);
}

#[test]
fn scenarios_round_trip_through_json() {
    let cases = [
        (Example::Torus, params(0.4, 3)),
        (Example::DiscBrane, ExampleParams { indices: 2, rank: 2, ..ExampleParams::default() }),
        (Example::Rp2, params(0.0, 2)),
        (Example::Klein, ExampleParams::default()),
    ];
    for (name, p) in cases {
        let doc = example(name, &p).unwrap();
        let back = from_json(&to_json(&doc)).unwrap();
        assert_eq!(back, doc, "{name:?}");
        let (mut l1, mut l2) = (Loader::new(&doc), Loader::new(&back));
        for id in doc.gerbe.keys() {
            assert_eq!(*l1.gerbe(id).unwrap(), *l2.gerbe(id).unwrap());
        }
        assert_eq!(cmd_holonomy(&doc, None, 0, false).unwrap().value, cmd_holonomy(&back, None, 0, false).unwrap().value);
    }
}

#[test]
fn tampered_gerbe_fails_validation() {
    let mut doc = example(Example::Torus, &params(0.5, 3)).unwrap();
    let Some(GerbeDoc::Explicit { mu, .. }) = doc.gerbe.values_mut().find(|g| matches!(g, GerbeDoc::Explicit { .. })) else {
        panic!("gauge gerbe is explicit");
    };
    let m = mu.iter_mut().find(|m| !(m.i == m.j && m.j == m.k)).expect("off-diagonal μ");
    m.value = [-m.value[1], m.value[0]];
    let v = cmd_validate(&doc);
    assert!(!v.ok);
    let path = temp("tampered.json", &to_json(&doc));
    assert_eq!(run(&["validate", path.to_str().unwrap()]).0, EXIT_INVALID);
}

#[test]
fn exit_codes() {
    let doc = example(Example::Torus, &params(0.5, 2)).unwrap();
    let good = temp("good.json", &to_json(&doc));
    let good = good.to_str().unwrap();
    assert_eq!(run(&["validate", good]).0, EXIT_OK);
    let (code, out, _) = run(&["holonomy", good, "--check-independence"]);
    assert_eq!(code, EXIT_OK);
    let rec: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert!((rec["phase"].as_f64().unwrap() - 0.5).abs() < 1e-9);
    assert_eq!(rec["independence"]["ok"], true);
    assert_eq!(run(&["validate", "/nonexistent/scenario.json"]).0, EXIT_IO);
    let broken = temp("broken.json", "{ \"surface\": ");
    assert_eq!(run(&["validate", broken.to_str().unwrap()]).0, EXIT_IO);
    assert_eq!(run(&["holonomy", good, "--mode", "unoriented"]).0, EXIT_INVALID);
    assert_eq!(run(&["no-such-command"]).0, EXIT_IO);
}

#[test]
fn example_output_is_deterministic() {
    let args = ["example", "random-gauge", "--seed", "7", "--theta", "-0.25"];
    let (c1, o1, _) = run(&args);
    let (c2, o2, _) = run(&args);
    assert_eq!((c1, c2), (EXIT_OK, EXIT_OK));
    assert_eq!(o1, o2);
    let (_, o3, _) = run(&["example", "random-gauge", "--seed", "8", "--theta", "-0.25"]);
    assert_ne!(o1, o3);
    let doc = from_json(&o1).unwrap();
    assert_eq!(cmd_holonomy(&doc, Some(Mode::Closed), 3, false).unwrap().modulus.round(), 1.0);
}

#[test]
fn example_writes_to_a_file() {
    let dir = std::env::temp_dir().join(format!("gerbe-cli-out-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("rp2.json");
    let (code, _, _) = run(&["example", "rp2", "--jandl", "twisted", "-o", path.to_str().unwrap()]);
    assert_eq!(code, EXIT_OK);
    let (code, out, _) = run(&["holonomy", path.to_str().unwrap(), "--check-independence"]);
    assert_eq!(code, EXIT_OK);
    let rec: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(rec["mode"], "unoriented");
    assert!((rec["value"][0].as_f64().unwrap() + 1.0).abs() < 1e-9);
}

#[test]
fn axioms_command_reports_success() {
    let (code, out, _) = run(&["axioms", "--cases", "2", "--seed", "3"]);
    assert_eq!(code, EXIT_OK, "{out}");
    let r: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert!(r.is_object());
}
