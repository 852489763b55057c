use std::path::PathBuf;
use std::process::Command;

fn ex(name: &str) -> String {
    let p: PathBuf = [env!("CARGO_MANIFEST_DIR"), "..", "..", "examples", name].iter().collect();
    p.to_string_lossy().into_owned()
}

fn mpst(args: &[&str]) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_mpst")).args(args).env_remove("MPST_FORMAT").output().unwrap();
    (out.status.code().unwrap(), String::from_utf8(out.stdout).unwrap(), String::from_utf8(out.stderr).unwrap())
}

#[test]
fn intro_subtype_exit_codes() {
    let (c, _, _) = mpst(&["subtype", &ex("intro_Tp.st"), &ex("intro_T.st")]);
    assert_eq!(c, 0);
    let (c, out, _) = mpst(&["subtype", &ex("intro_T.st"), &ex("intro_Tp.st")]);
    assert_eq!(c, 1);
    assert!(out.contains("U  = ") && out.contains("V' = "), "{}", out);
}

#[test]
fn starving_environment_is_not_live() {
    let (c, out, _) = mpst(&["live", &ex("starving_r.env")]);
    assert_eq!(c, 1);
    assert!(out.contains("cycle:") && out.contains("r waits forever"), "{}", out);
    assert_eq!(mpst(&["live", &ex("live_pq.env")]).0, 0);
}

#[test]
fn parse_errors_carry_positions() {
    let dir = std::env::temp_dir().join(format!("mpst-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let f = dir.join("dup.st");
    std::fs::write(&f, "p&{l1(nat).end,\n  l1(int).end}").unwrap();
    let (c, _, err) = mpst(&["subtype", f.to_str().unwrap(), &ex("intro_T.st")]);
    assert_eq!(c, 3);
    assert!(err.contains("dup.st:2:"), "{}", err);
    std::fs::write(&f, "rec t . t").unwrap();
    let (c, _, err) = mpst(&["subtype", f.to_str().unwrap(), &ex("intro_T.st")]);
    assert_eq!(c, 3);
    assert!(err.contains("unguarded"), "{}", err);
    assert_eq!(mpst(&["subtype", "/nonexistent.st", &ex("intro_T.st")]).0, 3);
    assert_eq!(mpst(&["bogus"]).0, 3);
    assert_eq!(mpst(&["--unroll-bound", "0", "subtype", &ex("intro_T.st"), &ex("intro_T.st")]).0, 3);
}

#[test]
fn json_documents_certify() {
    let dir = std::env::temp_dir().join(format!("mpst-cert-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let cases: [(&[&str], i32); 4] = [
        (&["subtype", "intro_Tp.st", "intro_T.st"], 0),
        (&["subtype", "intro_T.st", "intro_Tp.st"], 1),
        (&["refine", "forget_output_T.st", "forget_output_Tp.st"], 1),
        (&["typecheck", "intro.sess", "intro.env"], 0),
    ];
    for (i, (args, code)) in cases.iter().enumerate() {
        let mut full = vec![String::from("--format"), String::from("json"), args[0].to_string()];
        full.extend(args[1..].iter().map(|a| ex(a)));
        let refs: Vec<&str> = full.iter().map(String::as_str).collect();
        let (c, out, _) = mpst(&refs);
        assert_eq!(c, *code, "{:?}", args);
        let doc: serde_json::Value = serde_json::from_str(&out).unwrap();
        assert_eq!(doc["command"], args[0]);
        let f = dir.join(format!("{}.json", i));
        std::fs::write(&f, &out).unwrap();
        let (c, out, _) = mpst(&["certify", "--mutants", f.to_str().unwrap()]);
        assert_eq!(c, 0, "{}", out);
    }
}

#[test]
fn env_overrides_config() {
    let out = Command::new(env!("CARGO_BIN_EXE_mpst"))
        .args(["subtype", &ex("intro_Tp.st"), &ex("intro_T.st")])
        .env("MPST_FORMAT", "json")
        .env("MPST_UNROLL_BOUND", "3")
        .output()
        .unwrap();
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(doc["config"]["unroll_bound"], 3);
}

#[test]
fn run_and_oracle() {
    let (c, out, _) = mpst(&["run", &ex("dbuf.sess"), "--step-limit", "10000"]);
    assert_eq!(c, 0, "{}", out);
    let (c, out, _) = mpst(&["run", &ex("intro.sess"), "--random", "--seed", "7"]);
    assert_eq!(c, 0, "{}", out);
    let (c, out, _) = mpst(&["oracle", &ex("intro_U.st"), &ex("intro_Vp.st")]);
    assert_eq!(c, 1);
    assert!(out.contains("session:") && out.contains("error reached"), "{}", out);
}
