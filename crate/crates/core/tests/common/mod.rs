#![allow(dead_code, unused_imports)]

use std::path::PathBuf;

pub fn data_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(name)
}

/// Rows of a frozen oracle CSV, header stripped.
pub fn read_rows(name: &str) -> Vec<Vec<String>> {
    let mut rdr = csv::Reader::from_path(data_path(name)).expect("oracle file");
    rdr.records()
        .map(|r| r.expect("oracle row").iter().map(str::to_string).collect())
        .collect()
}

pub fn scalar(name: &str) -> f64 {
    read_rows("scalar_oracle.csv")
        .into_iter()
        .find(|r| r[0] == name)
        .map(|r| r[1].parse().unwrap())
        .unwrap_or_else(|| panic!("no scalar oracle {name}"))
}

pub fn log_rel_err(got: f64, expect: f64) -> f64 {
    if got == expect {
        0.0
    } else {
        ((got - expect) / expect).abs()
    }
}

pub use ginibre_gumbel::selftest::{gaussian_sum, power_series};
use ginibre_gumbel::scaling::ScalingConstants;

/// `(n, k, x)` points with `3 <= u_n(k, x) <= n^(1/10)`.
pub fn tail_lattice() -> Vec<(ScalingConstants, u64, f64)> {
    ginibre_gumbel::selftest::lattice(true).unwrap()
}

/// `(n, k, x)` points with `u_n(k, x) >= 3`.
pub fn integral_lattice() -> Vec<(ScalingConstants, u64, f64)> {
    ginibre_gumbel::selftest::lattice(false).unwrap()
}

pub fn x_integral(c: &ScalingConstants, k: f64, x0: f64, f: impl Fn(f64) -> f64 + Sync, scale: f64) -> f64 {
    ginibre_gumbel::selftest::x_integral(c, k, x0, f, scale).unwrap()
}
