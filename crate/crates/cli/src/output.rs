//! CSV writers for fields, interfaces and reports.

use std::fmt::Write;

use segregate::analysis::{ElementKind, InterfaceSet, JumpStats};
use segregate::{Grid, ScalarField};

/// 17 significant digits, enough to round-trip an `f64`.
pub fn num(v: f64) -> String {
    format!("{v:.16e}")
}

fn coord_header(grid: &Grid) -> &'static str {
    if grid.dim() == 1 {
        "x"
    } else {
        "x,y"
    }
}

fn coords(grid: &Grid, node: usize) -> String {
    let c = grid.coord(node);
    if grid.dim() == 1 {
        num(c[0])
    } else {
        format!("{},{}", num(c[0]), num(c[1]))
    }
}

/// Header `x[,y],<names...>`, one row per in-domain node in row-major order.
pub fn fields_csv(fields: &[ScalarField], prefix: &str) -> String {
    let grid = fields[0].grid();
    let mut s = String::from(coord_header(grid));
    for i in 1..=fields.len() {
        let _ = write!(s, ",{prefix}{i}");
    }
    s.push('\n');
    for node in (0..grid.len()).filter(|&n| grid.in_domain(n)) {
        s.push_str(&coords(grid, node));
        for f in fields {
            s.push(',');
            s.push_str(&num(f.get(node)));
        }
        s.push('\n');
    }
    s
}

/// Support indicator per component: `x[,y],s1,...,sm` with 0/1 entries.
pub fn supports_csv(set: &InterfaceSet) -> String {
    let grid = set.grid();
    let m = set.zero.len();
    let supports: Vec<Vec<bool>> = (0..m).map(|i| set.support(i)).collect();
    let mut s = String::from(coord_header(grid));
    for i in 1..=m {
        let _ = write!(s, ",s{i}");
    }
    s.push('\n');
    for node in (0..grid.len()).filter(|&n| grid.in_domain(n)) {
        s.push_str(&coords(grid, node));
        for sup in &supports {
            s.push_str(if sup[node] { ",1" } else { ",0" });
        }
        s.push('\n');
    }
    s
}

pub fn interfaces_csv(set: &InterfaceSet) -> String {
    let mut s = String::from("i,j,kind,node_a,node_b,x,y,nx,ny\n");
    for pair in &set.pairs {
        for e in &pair.elements {
            let (kind, a, b) = match e.kind {
                ElementKind::Node(n) => ("node", n, n),
                ElementKind::Edge(a, b) => ("edge", a, b),
            };
            let _ = writeln!(
                s,
                "{},{},{kind},{a},{b},{},{},{},{}",
                pair.i + 1,
                pair.j + 1,
                num(e.point[0]),
                num(e.point[1]),
                num(e.normal[0]),
                num(e.normal[1])
            );
        }
    }
    s
}

pub fn jumps_csv(stats: &[JumpStats]) -> String {
    let mut s = String::from("i,j,checked,skipped,first_max,first_mean,second_checked,second_max,second_mean\n");
    for st in stats {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{},{}",
            st.i + 1,
            st.j + 1,
            st.checked,
            st.skipped,
            num(st.first_max),
            num(st.first_mean),
            st.second_checked,
            num(st.second_max),
            num(st.second_mean)
        );
    }
    s
}

/// Parses a field CSV back into its header and rows.
pub fn read_csv(src: &str) -> (Vec<String>, Vec<Vec<f64>>) {
    let mut lines = src.lines().filter(|l| !l.starts_with('#'));
    let header = lines.next().unwrap_or("").split(',').map(str::to_string).collect();
    let rows = lines.map(|l| l.split(',').map(|v| v.parse().unwrap_or(f64::NAN)).collect()).collect();
    (header, rows)
}
