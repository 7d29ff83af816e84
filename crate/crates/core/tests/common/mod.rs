//! Fixtures shared by the integration suites.
#![allow(dead_code)]

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

pub const BIN: &str = env!("CARGO_BIN_EXE_photon-sql");

pub fn schema_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("schemas")
}

pub fn cli(args: &[&str]) -> Output {
    Command::new(BIN).args(args).env_remove("PHOTON_SQL_THREADS").output().expect("binary runs")
}

pub fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

pub fn stderr_json(o: &Output) -> Value {
    serde_json::from_slice(&o.stderr).unwrap_or_else(|e| panic!("stderr is not JSON ({e}): {:?}", o.stderr))
}

/// Writes input files and returns their paths by name.
pub fn fixtures(dir: &Path) -> BTreeMap<&'static str, String> {
    let mut files = BTreeMap::new();
    let mut put = |name: &'static str, body: String| {
        let p = dir.join(name);
        fs::write(&p, body).unwrap();
        files.insert(name, p.to_str().unwrap().to_string());
    };
    put("product4.json", r#"{"variant":"product","n":4,"envelope":{"type":"gaussian","kappa":1.0}}"#.into());
    put("product2.json", r#"{"variant":"product","n":2,"envelope":{"type":"gaussian","kappa":0.7}}"#.into());
    put("coincident2.json", r#"{"variant":"coincident","n":2,"envelope":{"type":"gaussian","kappa":1.0}}"#.into());
    put("dualdelta3.json", r#"{"variant":"coincident","n":3,"envelope":{"type":"dual_delta","k0":1.0}}"#.into());
    put("soliton2.json", r#"{"variant":"soliton","n":2,"soliton":{"ratio":-1.0}}"#.into());
    put("soliton3.json", r#"{"variant":"soliton","n":3,"soliton":{"ratio":-1.0,"b_integral":0.25}}"#.into());
    put(
        "schedule.json",
        r#"{"ratio_initial":-1.0,"ratio_final":-0.01,"steps":6,"b_profile":[[1,0.1],[1,0.1],[1,0.1],[1,0.1],[1,0.1],[1,0.1]]}"#.into(),
    );
    put(
        "chain.json",
        r#"[
  {"op":"expand","params":{"schedule":{"ratio_initial":-1.0,"ratio_final":-0.01,"steps":4,"b_profile":[[1,0.5],[1,0.5],[1,0.5],[1,0.5]]},"to_uql":true}},
  {"op":"compensate","params":{}},
  {"op":"modulate","params":{"transfer":{"type":"quadratic_phase","coefficient":0.0,"description":"identity"}}},
  {"op":"demagnify","params":{"f1":2.0,"f2":1.0}},
  {"op":"map","params":{"lens":{"f1":1.0,"f2":1.0,"lambda":1.0}}}
]"#
        .into(),
    );
    put("target.csv", cos2_csv(2, 1.0, 512));
    files
}

/// `cos^2(n k0 x)` over 16 periods with the sign of the cosine as a phase column.
pub fn cos2_csv(n: usize, k0: f64, points: usize) -> String {
    let len = 16.0 * PI / (n as f64 * k0);
    let step = len / points as f64;
    let mut s = String::from("x,intensity,phase\n");
    for i in 0..points {
        let x = -len / 2.0 + i as f64 * step;
        let c = (n as f64 * k0 * x).cos();
        s.push_str(&format!("{x},{},{}\n", c * c, if c < 0.0 { PI } else { 0.0 }));
    }
    s
}

/// Every command with artifacts in `out`; returns each run's stdout by name.
pub fn run_matrix(inputs: &BTreeMap<&'static str, String>, out: &Path) -> BTreeMap<String, Vec<u8>> {
    let o = |name: &str| out.join(name).to_str().unwrap().to_string();
    let runs: Vec<(&str, Vec<String>)> = vec![
        (
            "widths",
            vec!["widths".into(), "--state".into(), inputs["product4.json"].clone(), "--out".into(), o("widths")],
        ),
        (
            "widths-soliton3",
            vec![
                "widths".into(),
                "--state".into(),
                inputs["soliton3.json"].clone(),
                "--out".into(),
                o("widths-soliton3"),
            ],
        ),
        (
            "pattern",
            vec![
                "pattern".into(),
                "--state".into(),
                inputs["dualdelta3.json"].clone(),
                "--grid".into(),
                "-3.141592653589793,3.141592653589793,1001".into(),
                "--out".into(),
                o("pattern"),
            ],
        ),
        (
            "rate",
            vec![
                "rate".into(),
                "--state".into(),
                inputs["soliton3.json"].clone(),
                "--gamma".into(),
                "1.5".into(),
                "--out".into(),
                o("rate"),
            ],
        ),
        (
            "expand",
            vec![
                "expand".into(),
                "--state".into(),
                inputs["soliton3.json"].clone(),
                "--schedule".into(),
                inputs["schedule.json"].clone(),
                "--out".into(),
                o("expand"),
            ],
        ),
        (
            "chain",
            vec![
                "chain".into(),
                "--state".into(),
                inputs["soliton2.json"].clone(),
                "--chain".into(),
                inputs["chain.json"].clone(),
                "--lambda".into(),
                "1.0".into(),
                "--out".into(),
                o("chain"),
            ],
        ),
        (
            "design",
            vec![
                "design".into(),
                "--target".into(),
                inputs["target.csv"].clone(),
                "--state".into(),
                inputs["coincident2.json"].clone(),
                "--n".into(),
                "2".into(),
                "--lambda".into(),
                "3.0".into(),
                "--out".into(),
                o("design"),
            ],
        ),
        (
            "oracle",
            vec![
                "oracle-compare".into(),
                "--state".into(),
                inputs["product2.json"].clone(),
                "--out".into(),
                o("oracle"),
            ],
        ),
    ];
    let mut stdouts = BTreeMap::new();
    for (name, args) in runs {
        let refs: Vec<&str> = args.iter().map(String::as_str).collect();
        let r = cli(&refs);
        assert!(r.status.success(), "{name} failed: {}", String::from_utf8_lossy(&r.stderr));
        stdouts.insert(name.to_string(), r.stdout);
    }
    stdouts
}

/// All files under `dir`, keyed by relative path.
pub fn artifacts(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for entry in fs::read_dir(&d).unwrap() {
            let p = entry.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                let rel = p.strip_prefix(dir).unwrap().to_string_lossy().into_owned();
                out.insert(rel, fs::read(&p).unwrap());
            }
        }
    }
    out
}

struct SchemaDir;

impl jsonschema::Retrieve for SchemaDir {
    fn retrieve(&self, uri: &jsonschema::Uri<String>) -> Result<Value, Box<dyn std::error::Error + Send + Sync>> {
        let name = uri.as_str().rsplit('/').next().unwrap_or_default().to_string();
        Ok(serde_json::from_str(&fs::read_to_string(schema_dir().join(name))?)?)
    }
}

pub fn validator(schema: &str) -> jsonschema::Validator {
    let text = fs::read_to_string(schema_dir().join(schema)).unwrap();
    let schema: Value = serde_json::from_str(&text).unwrap();
    jsonschema::options().with_retriever(SchemaDir).build(&schema).unwrap()
}

pub fn assert_valid(schema: &str, doc: &Value) {
    let v = validator(schema);
    let errors: Vec<String> = v.iter_errors(doc).map(|e| e.to_string()).collect();
    assert!(errors.is_empty(), "{schema}: {errors:?}\n{doc}");
}
