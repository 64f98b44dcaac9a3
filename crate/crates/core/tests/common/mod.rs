//! Shared fixtures for the integration tests.
#![allow(dead_code)]

use std::process::{Command, Output};

use qconfine::dispersion::Bindings;

/// Runs the built `qconfine` binary.
pub fn qconfine(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qconfine"))
        .args(args)
        .env_remove("QCONFINE_THREADS")
        .output()
        .expect("spawn qconfine")
}

/// Path of a file shipped in the workspace `configs/` directory.
pub fn shipped_config(name: &str) -> String {
    format!("{}/../../configs/{name}", env!("CARGO_MANIFEST_DIR"))
}

pub fn bindings() -> Bindings {
    [
        ("k", 3.0),
        ("m", 2.0),
        ("c", 1.5),
        ("hbar", 0.5),
        ("pi", std::f64::consts::PI),
        ("a", -4.0),
    ]
    .into_iter()
    .map(|(n, v)| (n.to_string(), v))
    .collect()
}

/// (expression, expected value with k=3, m=2, c=1.5, hbar=0.5, a=-4).
pub const CORPUS: &[(&str, f64)] = &[
    ("1", 1.0),
    ("2.5", 2.5),
    (".5", 0.5),
    ("1e3", 1000.0),
    ("2.5E-1", 0.25),
    ("1e+2", 100.0),
    ("k", 3.0),
    ("1 + 2 * 3", 7.0),
    ("(1 + 2) * 3", 9.0),
    ("2 * 3 + 1", 7.0),
    ("10 - 4 - 3", 3.0),
    ("10 - (4 - 3)", 9.0),
    ("64 / 4 / 2", 8.0),
    ("64 / (4 / 2)", 32.0),
    ("2 * 6 / 3", 4.0),
    ("2 ^ 3 ^ 2", 512.0),
    ("(2 ^ 3) ^ 2", 64.0),
    ("-k^2", -9.0),
    ("(-k)^2", 9.0),
    ("-2^2", -4.0),
    ("2^-1", 0.5),
    ("2^-k", 0.125),
    ("--k", 3.0),
    ("- - - k", -3.0),
    ("-k * 2", -6.0),
    ("2 * -k", -6.0),
    ("1 - -1", 2.0),
    ("k^2/2", 4.5),
    ("k^2/(2*m)", 2.25),
    ("hbar^2*k^2/(2*m)", 0.5625),
    ("c^2*k^2", 20.25),
    ("m^2*c^4 + hbar^2*c^2*k^2", 4.0 * 5.0625 + 0.25 * 2.25 * 9.0),
    ("sqrt(m^2*c^4 + hbar^2*c^2*k^2)", 5.031152949374527),
    ("sqrt(16)", 4.0),
    ("sqrt(k*k)", 3.0),
    ("abs(a)", 4.0),
    ("abs(-k)", 3.0),
    ("exp(0)", 1.0),
    ("exp(1)", std::f64::consts::E),
    ("sin(0)", 0.0),
    ("cos(0)", 1.0),
    ("cos(pi)", -1.0),
    ("sin(pi/2)", 1.0),
    ("2*sin(pi/6)", 1.0),
    ("sqrt(sqrt(16))", 2.0),
    ("abs(a)^0.5", 2.0),
    ("-abs(a)", -4.0),
    ("k^2^0", 3.0),
    ("(k^2)^0.5", 3.0),
    ("1/k^2", 1.0 / 9.0),
    ("k*k*k", 27.0),
    ("k + k*k - k/k", 11.0),
    ("((((k))))", 3.0),
    ("  k   +   1  ", 4.0),
    ("a*a", 16.0),
    ("a^2", 16.0),
    ("m*c^2", 4.5),
    ("2*pi", 2.0 * std::f64::consts::PI),
    ("exp(-k^2/2)", 0.011108996538242306),
    ("cos(k)^2 + sin(k)^2", 1.0),
];
