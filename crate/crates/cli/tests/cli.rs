use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn data(name: &str) -> String {
    let p: PathBuf = [env!("CARGO_MANIFEST_DIR"), "tests", "data", name]
        .iter()
        .collect();
    p.to_string_lossy().into_owned()
}

fn rado(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rado"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(args: &[&str]) -> i32 {
    rado(args).status.code().expect("exit code")
}

fn json(args: &[&str]) -> (i32, Value) {
    let mut full = vec!["--json"];
    full.extend_from_slice(args);
    let out = rado(&full);
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert_eq!(stdout.lines().count(), 1, "{stdout}");
    (
        out.status.code().unwrap(),
        serde_json::from_str(&stdout).unwrap(),
    )
}

#[test]
fn kpr_exit_codes() {
    assert_eq!(code(&["kpr", &data("schur.txt")]), 0);
    assert_eq!(code(&["kpr", &data("vdw.txt")]), 0);
    assert_eq!(code(&["kpr", &data("ext4x7.txt")]), 0);
    assert_eq!(code(&["kpr", &data("pair_sum.txt")]), 1);
    assert_eq!(code(&["--cap", "1", "kpr", &data("ext4x7.txt")]), 3);
}

#[test]
fn kpr_json_shape() {
    let (c, v) = json(&["kpr", &data("schur.txt")]);
    assert_eq!(c, 0);
    assert_eq!(v["verdict"], "YES");
    assert_eq!(
        v["certificate"]["partition"],
        serde_json::json!([[1, 3], [2]])
    );
    assert_eq!(
        v["certificate"]["witnesses"],
        serde_json::json!([{"block": 2, "column": 1, "coeff": "1"}])
    );

    let (c, v) = json(&["--cap", "1", "kpr", &data("ext4x7.txt")]);
    assert_eq!(c, 3);
    assert_eq!(v["verdict"], "UNDECIDED");
    assert_eq!(v["cap"], 1);
}

#[test]
fn doubly_ipr_and_friends() {
    let (c, v) = json(&["doubly-ipr", &data("half_b.txt")]);
    assert_eq!(c, 0);
    assert_eq!(v["scalars"]["b"], "1/2");
    assert_eq!(
        v["certificate"]["partition"],
        serde_json::json!([[1, 2], [3, 5], [4]])
    );
    assert_eq!(code(&["doubly-ipr", &data("diag12.txt")]), 1);

    let (c, v) = json(&["doubly-kpr", &data("half_b.txt"), &data("neg_i2.txt")]);
    assert_eq!(c, 0);
    assert_eq!(v["scalars"]["c2"], "1/2");

    let (c, v) = json(&[
        "multiply-kpr",
        &data("schur.txt"),
        &data("schur.txt"),
        &data("schur.txt"),
    ]);
    assert_eq!(c, 0);
    let names: Vec<&String> = v["scalars"].as_object().unwrap().keys().collect();
    assert_eq!(names, ["c2", "c3"]);

    assert_eq!(code(&["ipr", &data("diag12.txt")]), 0);
    // Mismatched row counts are an input error.
    assert_eq!(
        code(&["doubly-kpr", &data("schur.txt"), &data("neg_i2.txt")]),
        2
    );
}

#[test]
fn scalars_and_integer_b() {
    let (c, v) = json(&["scalars", &data("half_b.txt")]);
    assert_eq!(c, 0);
    assert_eq!(v["complete"], true);
    assert_eq!(v["b"]["kind"], "finite");
    assert_eq!(v["b"]["values"], serde_json::json!(["-2", "-2/5", "1/2"]));
    assert_eq!(code(&["--cap", "5", "scalars", &data("half_b.txt")]), 3);

    let (c, v) = json(&["integer-b", &data("unit_sum.txt")]);
    assert_eq!(c, 0);
    assert_eq!(v["status"], "hypothesis_holds");
    assert_eq!(v["b_is_positive_integer"], true);
    assert_eq!(v["identity_holds"], true);

    let (c, v) = json(&["integer-b", &data("half_b.txt")]);
    assert_eq!(c, 1);
    assert_eq!(v["status"], "hypothesis_fails");
    assert_eq!(v["zero_subset"], serde_json::json!([1, 2]));

    assert_eq!(code(&["integer-b", &data("diag12.txt")]), 1);
    assert_eq!(code(&["integer-b", &data("fractional.txt")]), 2);
}

#[test]
fn certificates_from_files() {
    assert_eq!(
        code(&["certify", &data("schur.txt"), &data("schur_cert.json")]),
        0
    );
    assert_eq!(
        code(&["certify", &data("schur.txt"), &data("schur_bad_cert.json")]),
        1
    );
    assert_eq!(
        code(&[
            "certify",
            &data("schur.txt"),
            &data("schur_wrong_coeff.json")
        ]),
        1
    );
    // A certificate for three columns against a two-column matrix.
    assert_eq!(
        code(&["certify", &data("pair_sum.txt"), &data("schur_cert.json")]),
        1
    );

    let (c, v) = json(&[
        "first-entries",
        &data("schur.txt"),
        &data("schur_cert.json"),
    ]);
    assert_eq!(c, 0);
    assert_eq!(v["unital"], true);
    assert_eq!(
        v["g"],
        serde_json::json!([["1", "-1"], ["0", "1"], ["1", "0"]])
    );
    assert_eq!(
        code(&[
            "first-entries",
            &data("schur.txt"),
            &data("schur_bad_cert.json")
        ]),
        1
    );
}

#[test]
fn emitted_certificates_certify() {
    for m in ["schur.txt", "vdw.txt", "ext4x7.txt"] {
        let (_, v) = json(&["kpr", &data(m)]);
        let dir = std::env::temp_dir().join(format!("rado-cli-{}-{m}", std::process::id()));
        std::fs::write(&dir, v["certificate"].to_string()).unwrap();
        let path = dir.to_string_lossy().into_owned();
        assert_eq!(code(&["certify", &data(m), &path]), 0, "{m}");
        assert_eq!(code(&["first-entries", &data(m), &path]), 0, "{m}");
        std::fs::remove_file(&dir).unwrap();
    }
}

#[test]
fn oracle_subcommands() {
    let schur = data("schur.txt");
    assert_eq!(
        code(&["oracle", "sweep", &schur, "--bound", "5", "--colours", "2"]),
        0
    );
    assert_eq!(
        code(&["oracle", "sweep", &schur, "--bound", "4", "--colours", "2"]),
        1
    );
    assert_eq!(
        code(&[
            "oracle",
            "falsify",
            &schur,
            "--bound",
            "5",
            "--colours",
            "2"
        ]),
        0
    );

    let out = rado(&[
        "oracle",
        "falsify",
        &schur,
        "--bound",
        "4",
        "--colours",
        "2",
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(
        String::from_utf8(out.stdout).unwrap(),
        "1 0\n2 1\n3 1\n4 0\n"
    );

    let table = format!("table:{}", data("schur_table.txt"));
    assert_eq!(
        code(&[
            "oracle",
            "solve",
            &schur,
            "--bound",
            "4",
            "--colouring",
            &table
        ]),
        1
    );
    let (c, v) = json(&[
        "oracle",
        "solve",
        &schur,
        "--bound",
        "50",
        "--colouring",
        "mod:3",
    ]);
    assert_eq!(c, 0);
    assert_eq!(v["found"], true);

    let diag = data("diag12.txt");
    assert_eq!(
        code(&[
            "oracle",
            "solve",
            &diag,
            "--image",
            "--bound",
            "65536",
            "--colouring",
            "startparity:2"
        ]),
        1
    );
    assert_eq!(
        code(&[
            "oracle",
            "solve",
            &data("half_b.txt"),
            "--image",
            "--bound",
            "64",
            "--colouring",
            "mod:2"
        ]),
        0
    );
    assert_eq!(
        code(&[
            "oracle",
            "solve",
            &schur,
            "--bound",
            "5",
            "--colouring",
            "mod"
        ]),
        2
    );
    assert_eq!(
        code(&[
            "oracle",
            "solve",
            &schur,
            "--bound",
            "5",
            "--colouring",
            "mod:0"
        ]),
        2
    );
}

#[test]
fn json_is_identical_across_thread_counts() {
    let cases: [&[&str]; 5] = [
        &["kpr", "ext4x7.txt"],
        &["doubly-ipr", "half_b.txt"],
        &["doubly-ipr", "diag12.txt"],
        &["ipr", "unit_sum.txt"],
        &["kpr", "vdw.txt"],
    ];
    for case in cases {
        let file = data(case[1]);
        let run = |threads: &str, cap: &str| {
            let out = rado(&["--json", "--threads", threads, "--cap", cap, case[0], &file]);
            (out.status.code(), out.stdout)
        };
        for cap in ["3", "40", "10000000"] {
            let one = run("1", cap);
            assert_eq!(one, run("4", cap), "{case:?} cap {cap}");
            assert_eq!(one, run("1", cap), "{case:?} cap {cap}");
        }
    }
}

#[test]
fn input_errors_exit_two() {
    for bad in [
        "ragged.txt",
        "zero_den.txt",
        "bad_token.txt",
        "empty.txt",
        "missing.txt",
    ] {
        let out = rado(&["kpr", &data(bad)]);
        assert_eq!(out.status.code(), Some(2), "{bad}");
        assert!(out.stdout.is_empty(), "{bad}");
        assert!(!out.stderr.is_empty(), "{bad}");
    }
    let out = rado(&["kpr", &data("ragged.txt")]);
    assert!(String::from_utf8(out.stderr).unwrap().contains("line 2"));
    assert_eq!(code(&["multiply-kpr", &data("schur.txt")]), 2);
    assert_eq!(code(&["no-such-command"]), 2);
    assert_eq!(
        code(&["certify", &data("schur.txt"), &data("schur.txt")]),
        2
    );
}

#[test]
fn text_output_is_readable() {
    let out = rado(&["doubly-ipr", &data("half_b.txt")]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("YES\nb = 1/2\npartition: "), "{text}");
    let out = rado(&["scalars", &data("half_b.txt")]);
    assert_eq!(
        String::from_utf8(out.stdout).unwrap(),
        "b in {-2, -2/5, 1/2}\n"
    );
}
