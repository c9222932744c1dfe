//! Shared fixtures for the benchmarks.

use segregate::{parse_config_str, SystemConfig};

/// Four components on the square with one quadratic bump per side.
pub fn square(n: usize) -> SystemConfig {
    parse_config_str(&format!(
        r#"
[domain]
kind = "rectangle"
n = {n}

[system]
m = 4
epsilon = 1e-4

[boundary.1]
piece = "top: 1 - x^2"

[boundary.2]
piece = "right: 2*(1 - y^2)"

[boundary.3]
piece = "bottom: 3*(1 - x^2)"

[boundary.4]
piece = "left: 4*(1 - y^2)"
"#
    ))
    .expect("fixture parses")
}

/// Three components on the interval, the middle one positive everywhere.
pub fn line(n: usize) -> SystemConfig {
    parse_config_str(&format!(
        r#"
[domain]
kind = "interval"
n = {n}

[system]
m = 3
epsilon = 1e-4

[boundary.1]
piece = ["left: 1", "right: 0"]

[boundary.2]
piece = ["left: 0", "right: 1"]

[boundary.3]
piece = "all: 0.5"
"#
    ))
    .expect("fixture parses")
}
