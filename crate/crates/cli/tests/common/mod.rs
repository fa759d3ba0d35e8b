//! The CLI example suite shared by the golden test and the acceptance run.

#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::Command;

pub const EXAMPLES: &[(&str, &[&str])] = &[
    ("prop_eval_d3", &["prop-eval", "--D", "3", "--m", "1", "--r", "1"]),
    ("prop_eval_d4_point", &["prop-eval", "--D", "4", "--m", "2", "--x", "0.3,-0.1,0.2,0.05"]),
    ("prop_eval_d4_integral", &["prop-eval", "--D", "4", "--m", "2", "--x", "0.3,-0.1,0.2,0.05", "--method", "integral"]),
    ("prop_eval_massless", &["prop-eval", "--D", "5", "--m", "0", "--r", "0.5"]),
    ("prop_eval_taylor", &["prop-eval", "--D", "4", "--m", "1", "--r", "0.1", "--method", "taylor", "--terms", "20"]),
    ("prop_eval_asymptotic", &["prop-eval", "--D", "4", "--m", "1", "--r", "20", "--method", "asymptotic", "--terms", "6"]),
    ("prop_expand_taylor", &["prop-expand", "--D", "4", "--method", "taylor", "--terms", "2"]),
    ("prop_expand_asymptotic", &["prop-expand", "--D", "5", "--method", "asymptotic", "--terms", "3"]),
    ("prop_expand_gegenbauer", &["prop-expand", "--D", "4", "--method", "gegenbauer", "--terms", "1", "--radial", "3"]),
    ("gegen_monomial", &["gegen", "--op", "monomial", "--m", "2", "--lambda", "1"]),
    ("gegen_poly", &["gegen", "--op", "poly", "--n", "4", "--lambda", "3/2"]),
    ("gegen_chebyshev", &["gegen", "--op", "chebyshev", "--n", "5", "--lambda", "1/2"]),
    ("gegen_reproject", &["gegen", "--op", "reproject", "--n", "4", "--ell", "2", "--lambda", "1"]),
    ("gegen_product", &["gegen", "--op", "product", "--n", "3", "--m", "2", "--lambda", "1"]),
    ("gegen_zonal", &["gegen", "--op", "zonal", "--D", "4", "--n", "3"]),
    ("graph_coproduct_nested", &["graph-coproduct", "--graph", "tests/fixtures/nested.json"]),
    ("graph_antipode_chain", &["graph-antipode", "--graph", "tests/fixtures/chain.json"]),
    ("renorm_laurent_banana", &["renorm", "--target", "laurent", "--graphs", "tests/fixtures/banana.json", "--phi", "tests/fixtures/phi_banana.json"]),
    ("renorm_laurent_nested", &["renorm", "--target", "laurent", "--graphs", "tests/fixtures/nested.json", "--phi", "tests/fixtures/phi_nested.json"]),
    ("renorm_laurent_toy", &["renorm", "--target", "laurent", "--graphs", "tests/fixtures/family.json", "--seed", "3"]),
    ("renorm_logform_toy", &["renorm", "--target", "logform", "--graphs", "tests/fixtures/family.json", "--seed", "3"]),
    ("beta_laurent_toy", &["beta", "--target", "laurent", "--graphs", "tests/fixtures/family.json", "--seed", "5"]),
    ("beta_logform_nested", &["beta", "--target", "logform", "--graphs", "tests/fixtures/nested.json", "--seed", "5"]),
    ("divisors_3_1", &["divisors", "--n", "3", "--k", "1"]),
];

pub fn crate_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
}

pub fn golden_path(name: &str) -> PathBuf {
    crate_dir().join("tests/goldens").join(format!("{name}.json"))
}

pub struct Run {
    pub code: i32,
    pub stdout: Vec<u8>,
    pub stderr: String,
}

/// Runs the built binary from the crate directory with a clean config environment.
pub fn xfeyn(args: &[&str]) -> Run {
    xfeyn_in(&crate_dir(), args, None)
}

pub fn xfeyn_in(dir: &Path, args: &[&str], config_env: Option<&Path>) -> Run {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_xfeyn"));
    cmd.args(args).current_dir(dir).env_remove("XFEYN_CONFIG");
    if let Some(p) = config_env {
        cmd.env("XFEYN_CONFIG", p);
    }
    let out = cmd.output().expect("spawn xfeyn");
    Run { code: out.status.code().unwrap_or(-1), stdout: out.stdout, stderr: String::from_utf8_lossy(&out.stderr).into_owned() }
}
