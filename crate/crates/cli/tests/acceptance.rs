//! Acceptance criteria 1 to 11. Each test prints one PASS/FAIL line to the
//! real stderr (bypassing capture) and then asserts.

use std::collections::VecDeque;
use std::fs;
use std::io::Write;
use std::sync::{Arc, OnceLock};
use std::time::{Duration, Instant};

use segregate::analysis::{
    boundary_contacts, default_delta, extract_supports_and_interfaces, geometric_ladder, jump_condition_check,
    meeting_point, rate_study, segregation_residual, InterfaceSet, JumpSettings,
};
use segregate::{
    build_grid, parse_config, parse_config_str, solve_epsilon, solve_epsilon_from, solve_epsilon_observed,
    solve_harmonic, solve_limit, solve_screened, BoundaryParam, BoundaryValues, Domain, FixedPointSettings,
    LimitResult, LinearSettings, ScalarField, SolveResult, SystemConfig,
};
use segregate_cli::main_with_args;
use segregate_cli::output::read_csv;

const SHIPPED: [&str; 5] = ["disk_m3", "square_m4", "square_m4_overlap", "line_m2", "line_m3"];

fn report(id: u32, pass: bool, detail: &str) {
    let line = format!("criterion {id:>2}: {} - {detail}\n", if pass { "PASS" } else { "FAIL" });
    let _ = std::io::stderr().write_all(line.as_bytes());
    assert!(pass, "criterion {id} failed: {detail}");
}

fn config_path(name: &str) -> String {
    format!("{}/../../configs/{name}.toml", env!("CARGO_MANIFEST_DIR"))
}

fn shipped(name: &str) -> SystemConfig {
    parse_config(config_path(name)).unwrap()
}

fn with_nodes(c: &SystemConfig, n: usize) -> SystemConfig {
    parse_config_str(&c.canonical().replace(&format!("n = {}", c.n), &format!("n = {n}"))).unwrap()
}

/// Shipped configuration at the resolution the criteria run at: 2D examples
/// at n = 101, 1D examples as shipped.
fn test_scale(name: &str) -> SystemConfig {
    let c = shipped(name);
    if c.grid().dim() == 2 {
        with_nodes(&c, 101)
    } else {
        c
    }
}

fn cli(args: &[&str], out: &std::path::Path) -> i32 {
    let mut full = vec!["segregate".to_string()];
    full.extend(args.iter().map(|s| s.to_string()));
    full.extend(["--out".to_string(), out.display().to_string()]);
    main_with_args(full)
}

fn sup_against(rows: &[Vec<f64>], col: usize, f: impl Fn(f64) -> f64) -> f64 {
    rows.iter().map(|r| (r[col] - f(r[0])).abs()).fold(0.0, f64::max)
}

#[test]
fn criterion_01_line_two_components() {
    let dir = tempfile::tempdir().unwrap();
    let t = Instant::now();
    let code = cli(&["limit", &config_path("line_m2")], dir.path());
    let elapsed = t.elapsed();
    let (_, rows) = read_csv(&fs::read_to_string(dir.path().join("limit_fields.csv")).unwrap());
    let e1 = sup_against(&rows, 1, |x| (1.0 - 2.0 * x).max(0.0));
    let e2 = sup_against(&rows, 2, |x| (2.0 * x - 1.0).max(0.0));
    let pass = code == 0 && rows.len() == 401 && e1 <= 1e-10 && e2 <= 1e-10 && elapsed < Duration::from_secs(1);
    report(1, pass, &format!("sup errors {e1:e}, {e2:e} (<= 1e-10), {} nodes, {elapsed:?}", rows.len()));
}

#[test]
fn criterion_02_line_three_components() {
    let dir = tempfile::tempdir().unwrap();
    let t = Instant::now();
    let code = cli(&["limit", &config_path("line_m3")], dir.path());
    let (_, rows) = read_csv(&fs::read_to_string(dir.path().join("limit_fields.csv")).unwrap());
    let c = shipped("line_m3");
    let limit = solve_limit(c.problem(), 0, &c.linear_settings()).unwrap();
    let set = extract_supports_and_interfaces(&limit.fields, default_delta(c.grid(), c.solver.tol_linear, 1.0));
    let stats = jump_condition_check(&limit.fields, &set, &JumpSettings::default());
    let elapsed = t.elapsed();
    let e3 = sup_against(&rows, 3, |x| (x - 0.5).abs());
    let checked: usize = stats.iter().map(|s| s.checked).sum();
    let second: usize = stats.iter().map(|s| s.second_checked).sum();
    let r1 = stats.iter().map(|s| s.first_max).fold(0.0, f64::max);
    let r2 = stats.iter().map(|s| s.second_max).fold(0.0, f64::max);
    let pass = code == 0
        && e3 <= 1e-10
        && checked > 0
        && second > 0
        && r1 <= 1e-8
        && r2 <= 1e-8
        && elapsed < Duration::from_secs(1);
    report(
        2,
        pass,
        &format!(
            "u3 sup error {e3:e}; jump residuals {r1:e} ({checked} checked), {r2:e} ({second} checked); {elapsed:?}"
        ),
    );
}

#[test]
fn criterion_03_even_odd_sandwich() {
    let t = Instant::now();
    let c = with_nodes(&shipped("square_m4"), 101);
    let p = c.problem();
    let m_scale = p.max_boundary();
    let delta = 10.0 * c.solver.tol_linear * m_scale;
    let settings = FixedPointSettings { max_sweeps: 11, ..c.fixed_point_settings() };
    let mut iterates: Vec<Vec<ScalarField>> = Vec::new();
    let _ = solve_epsilon_observed(p, 1e-4, &settings, None, |s| {
        if s.k <= 10 {
            iterates.push(s.current.clone());
        }
    });
    let excess = |a: &[ScalarField], b: &[ScalarField]| {
        a.iter().zip(b).map(|(x, y)| x.zip_map(y, |u, v| u - v).max()).fold(f64::NEG_INFINITY, f64::max)
    };
    let mut worst_even = (0.0f64, 0usize);
    let mut worst_odd = (0.0f64, 0usize);
    for k in 0.. {
        if 2 * k + 2 < iterates.len() {
            let v = excess(&iterates[2 * k + 2], &iterates[2 * k]);
            if v > worst_even.0 {
                worst_even = (v, 2 * k + 2);
            }
        }
        if 2 * k + 3 < iterates.len() {
            let v = excess(&iterates[2 * k + 1], &iterates[2 * k + 3]);
            if v > worst_odd.0 {
                worst_odd = (v, 2 * k + 3);
            }
        } else {
            break;
        }
    }
    let gaps: Vec<f64> = (0..)
        .take_while(|k| 2 * k + 1 < iterates.len())
        .map(|k| {
            iterates[2 * k].iter().zip(&iterates[2 * k + 1]).map(|(a, b)| a.sup_distance(b)).fold(0.0, f64::max)
        })
        .collect();
    let gap_rise = gaps.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max);
    let elapsed = t.elapsed();
    let pass = iterates.len() == 11
        && worst_even.0 <= delta
        && worst_odd.0 <= delta
        && gap_rise <= delta
        && elapsed < Duration::from_secs(60);
    report(
        3,
        pass,
        &format!(
            "bound {delta:e}; max u^(2k+2) - u^(2k) = {:e} (at k = {}), max u^(2k+1) - u^(2k+3) = {:e} (at k = {}); gaps {:?}; largest gap increase {gap_rise:e}; {elapsed:?}",
            worst_even.0, worst_even.1, worst_odd.0, worst_odd.1, gaps
        ),
    );
}

/// An ε-solve of a shipped example that also records the exact iterate
/// range seen by the observer.
struct ObservedRun {
    config: SystemConfig,
    result: Result<SolveResult, String>,
    iterate_min: f64,
    iterate_max: f64,
    elapsed: Duration,
}

fn observed(name: &'static str) -> &'static ObservedRun {
    static RUNS: [OnceLock<ObservedRun>; 5] = [const { OnceLock::new() }; 5];
    let k = SHIPPED.iter().position(|&s| s == name).unwrap();
    RUNS[k].get_or_init(|| {
        let config = test_scale(name);
        let t = Instant::now();
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        let result = solve_epsilon_observed(config.problem(), config.epsilon, &config.fixed_point_settings(), None, |s| {
            for f in &s.current {
                lo = lo.min(f.min());
                hi = hi.max(f.max());
            }
        })
        .map_err(|e| e.to_string());
        ObservedRun { config, result, iterate_min: lo, iterate_max: hi, elapsed: t.elapsed() }
    })
}

#[test]
fn criterion_04_maximum_principle_bounds() {
    let mut pass = true;
    let mut details = Vec::new();
    let oracle = LinearSettings::with_tol(1e-12);
    for name in SHIPPED {
        let run = observed(name);
        let p = run.config.problem();
        let m_scale = p.max_boundary();
        let tol = 10.0 * run.config.solver.tol_linear * m_scale;
        let r = match &run.result {
            Ok(r) => r,
            Err(e) => {
                pass = false;
                details.push(format!("{name}: solve failed: {e}"));
                continue;
            }
        };
        let exact = run.iterate_min >= 0.0 && run.iterate_max <= m_scale;
        let mut upper = f64::NEG_INFINITY;
        let mut lower = f64::NEG_INFINITY;
        for i in 0..p.m() {
            let (h, _) = solve_harmonic(p.grid(), p.boundary(i), &oracle).unwrap();
            let (big_h, _) = solve_harmonic(p.grid(), &p.hat_boundary(i), &oracle).unwrap();
            upper = upper.max(r.fields[i].zip_map(&h, |u, h| u - h).max());
            let mut hat = r.fields[i].clone();
            for (j, f) in r.fields.iter().enumerate() {
                if j != i {
                    hat = &hat - f;
                }
            }
            lower = lower.max(big_h.zip_map(&hat, |a, b| a - b).max());
        }
        let ok = exact && upper <= tol && lower <= tol;
        pass &= ok;
        details.push(format!(
            "{name}(n={}): iterates in [{:e}, {:e}] vs [0, {m_scale}], max(u - h) = {upper:e}, max(H - u_hat) = {lower:e} (<= {tol:e}), {} sweeps, {:?}",
            run.config.n, run.iterate_min, run.iterate_max, r.sweeps, run.elapsed
        ));
    }
    report(4, pass, &details.join("; "));
}

#[test]
fn criterion_05_convergence_rate() {
    let t = Instant::now();
    let eps = geometric_ladder(1e-2, 1e-6, 5).unwrap();
    let mut pass = true;
    let mut details = Vec::new();
    for name in ["line_m2", "line_m3"] {
        let c = with_nodes(&shipped(name), 2001);
        let p = c.problem();
        let limit = solve_limit(p, 0, &c.linear_settings()).unwrap();
        let table = rate_study(p, &eps, &limit, &c.fixed_point_settings(), 2).unwrap();
        let need = 1.0 / (p.m() as f64 + 1.0) - 0.1;
        let ok = table.slope.is_some_and(|s| s >= need) && table.entries.iter().all(|e| e.failure.is_none());
        pass &= ok;
        details.push(format!(
            "m={}: slope {:?} (>= {need:.4}), fit residual {:?}, dropped {:?}",
            p.m(),
            table.slope,
            table.fit_residual,
            table.dropped
        ));
    }
    let elapsed = t.elapsed();
    pass &= elapsed < Duration::from_secs(300);
    details.push(format!("{elapsed:?}"));
    report(5, pass, &details.join("; "));
}

#[test]
fn criterion_06_solver_matches_limit() {
    let run = observed("square_m4");
    let p = run.config.problem();
    assert_eq!(run.config.n, 101);
    assert_eq!(run.config.epsilon, 1e-8);
    let limit = solve_limit(p, 0, &run.config.linear_settings()).unwrap();
    let bound = f64::max(1e-3, 5.0 * p.grid().h() * p.max_boundary());
    let (pass, detail) = match &run.result {
        Ok(r) => {
            let d: Vec<f64> = r.fields.iter().zip(&limit.fields).map(|(a, b)| a.sup_distance(b)).collect();
            let worst = d.iter().copied().fold(0.0, f64::max);
            (
                worst <= bound && run.elapsed < Duration::from_secs(600),
                format!("sup distances {d:?} (<= {bound}), {} sweeps, {:?}", r.sweeps, run.elapsed),
            )
        }
        Err(e) => (false, format!("solve failed: {e}")),
    };
    report(6, pass, &detail);
}

fn shipped_limits() -> &'static Vec<(SystemConfig, Vec<LimitResult>)> {
    static LIMITS: OnceLock<Vec<(SystemConfig, Vec<LimitResult>)>> = OnceLock::new();
    LIMITS.get_or_init(|| {
        SHIPPED
            .iter()
            .map(|name| {
                let c = shipped(name);
                let limits = (0..c.m()).map(|p| solve_limit(c.problem(), p, &c.linear_settings()).unwrap()).collect();
                (c, limits)
            })
            .collect()
    })
}

#[test]
fn criterion_07_segregation() {
    let mut pass = true;
    let mut details = Vec::new();
    for (name, (c, limits)) in SHIPPED.iter().zip(shipped_limits()) {
        let g = c.grid();
        let worst = (0..g.len())
            .filter(|&n| g.in_domain(n))
            .map(|n| limits[0].fields.iter().map(|f| f.get(n)).product::<f64>())
            .fold(0.0, f64::max);
        pass &= worst == 0.0;
        details.push(format!("{name} limit max product {worst:e}"));
    }
    for name in SHIPPED {
        let c = test_scale(name);
        let mut reactions = Vec::new();
        for eps in [1e-2, 1e-4, 1e-6] {
            match solve_epsilon(c.problem(), eps, &c.fixed_point_settings()) {
                Ok(r) => reactions.push(segregation_residual(&r.fields, c.problem()).reaction),
                Err(e) => {
                    pass = false;
                    details.push(format!("{name} eps={eps:e}: {e}"));
                }
            }
        }
        let decreasing = reactions.len() == 3
            && (0..c.m()).all(|i| reactions.windows(2).all(|w| w[1][i] < w[0][i]));
        pass &= decreasing;
        let first: Vec<String> = reactions.iter().map(|r| format!("{:.3e}", r[0])).collect();
        details.push(format!("{name}(n={}) reaction_1 along eps: [{}]", c.n, first.join(", ")));
    }
    report(7, pass, &details.join("; "));
}

#[test]
fn criterion_08_pivot_invariance() {
    let mut pass = true;
    let mut details = Vec::new();
    for (name, (c, limits)) in SHIPPED.iter().zip(shipped_limits()) {
        let bound = 10.0 * c.solver.tol_linear * c.problem().max_boundary();
        let mut worst = 0.0f64;
        for p in 0..limits.len() {
            for q in p + 1..limits.len() {
                for (a, b) in limits[p].fields.iter().zip(&limits[q].fields) {
                    worst = worst.max(a.sup_distance(b));
                }
            }
        }
        pass &= worst <= bound;
        details.push(format!("{name}: {worst:e} (<= {bound:e})"));
    }
    report(8, pass, &details.join("; "));
}

#[test]
fn criterion_09_uniqueness_proxy() {
    let c = shipped("line_m2");
    let p = c.problem();
    let settings = c.fixed_point_settings();
    let a = solve_epsilon(p, 1e-4, &settings).unwrap();
    let limit = solve_limit(p, 0, &c.linear_settings()).unwrap();
    let start: Vec<ScalarField> =
        a.harmonic.iter().zip(&limit.fields).map(|(h, l)| h.zip_map(l, |h, l| 0.5 * h + 0.5 * l)).collect();
    let b = solve_epsilon_from(p, 1e-4, &settings, start).unwrap();
    let d = a.fields.iter().zip(&b.fields).map(|(x, y)| x.sup_distance(y)).fold(0.0, f64::max);
    let bound = 10.0 * settings.tol_fp * p.max_boundary();
    report(9, d <= bound, &format!("sup distance {d:e} (<= {bound:e}), sweeps {} and {}", a.sweeps, b.sweeps));
}

/// Position (cyclic) where the boundary changes from "only φ_i vanishes" to
/// "only φ_j vanishes", for the unordered pair `{i, j}`.
fn boundary_transition(c: &SystemConfig, i: usize, j: usize) -> Option<usize> {
    let p = c.problem();
    let n = c.grid().boundary_points().len();
    let only_zero = |k: usize| {
        let zeros: Vec<usize> = (0..p.m()).filter(|&q| p.boundary(q).values()[k] == 0.0).collect();
        (zeros.len() == 1).then(|| zeros[0])
    };
    let labels: Vec<Option<usize>> = (0..n).map(only_zero).collect();
    for k in 0..n {
        let Some(a) = labels[k] else { continue };
        let mut step = 1;
        while step < n && labels[(k + step) % n].is_none() {
            step += 1;
        }
        if let Some(b) = labels[(k + step) % n] {
            if (a, b) == (i, j) || (a, b) == (j, i) {
                return Some((k + step.div_ceil(2)) % n);
            }
        }
    }
    None
}

fn connected(mask: &[bool], g: &segregate::Grid) -> bool {
    let Some(start) = mask.iter().position(|&b| b) else { return false };
    let mut seen = vec![false; mask.len()];
    seen[start] = true;
    let mut queue = VecDeque::from([start]);
    let mut count = 1;
    while let Some(n) = queue.pop_front() {
        for (q, _) in g.neighbors(n) {
            if mask[q] && !seen[q] {
                seen[q] = true;
                count += 1;
                queue.push_back(q);
            }
        }
    }
    count == mask.iter().filter(|&&b| b).count()
}

fn interfaces_of(c: &SystemConfig) -> (LimitResult, InterfaceSet) {
    let p = c.problem();
    let limit = solve_limit(p, 0, &c.linear_settings()).unwrap();
    let delta = default_delta(p.grid(), c.solver.tol_linear, p.max_boundary());
    let set = extract_supports_and_interfaces(&limit.fields, delta);
    (limit, set)
}

#[test]
fn criterion_10_interface_geometry() {
    let mut pass = true;
    let mut details = Vec::new();

    let disk = shipped("disk_m3");
    let g = disk.grid();
    let nb = g.boundary_points().len();
    let (_, set) = interfaces_of(&disk);
    let nonempty = set.pairs.iter().filter(|p| !p.elements.is_empty() && !p.degenerate).count();
    pass &= nonempty == 3;
    details.push(format!("disk: {nonempty} pairwise interfaces"));
    let angle = |k: usize| match g.boundary_points()[k].param {
        BoundaryParam::Angle(t) => t,
        _ => f64::NAN,
    };
    for (i, j, theta) in [(0, 1, 0.0), (0, 2, 4.0 * std::f64::consts::FRAC_PI_3), (1, 2, 2.0 * std::f64::consts::FRAC_PI_3)] {
        let target = boundary_transition(&disk, i, j);
        let tau = std::f64::consts::TAU;
        let nearest = (0..nb)
            .min_by(|&a, &b| {
                let d = |k: usize| ((angle(k) - theta).rem_euclid(tau)).min((theta - angle(k)).rem_euclid(tau));
                d(a).total_cmp(&d(b))
            })
            .unwrap();
        let contacts = boundary_contacts(&set, i, j);
        let cyc = |a: usize, b: usize| {
            let d = a.abs_diff(b);
            d.min(nb - d)
        };
        let ok = match (target, contacts.get(contacts.len() / 2)) {
            (Some(t), Some(&c)) => {
                let median = contacts.iter().copied().min_by_key(|&k| (cyc(k, c), k)).unwrap();
                let median = if contacts.len() > 1 { circular_median(&contacts, nb) } else { median };
                cyc(t, nearest) <= 1 && cyc(median, t) <= 2
            }
            _ => false,
        };
        pass &= ok;
        details.push(format!(
            "Gamma_{}{}: contacts {:?} (thetas {:?}), target theta {:.4} at position {:?}",
            i + 1,
            j + 1,
            contacts,
            contacts.iter().map(|&k| (angle(k) * 1e4).round() / 1e4).collect::<Vec<_>>(),
            theta,
            target
        ));
    }
    let meet = meeting_point(&set, &[(0, 1), (0, 2), (1, 2)]);
    let ok = meet.is_some_and(|(_, r)| r <= 5.0 * g.h());
    pass &= ok;
    details.push(format!("meeting point {meet:?} (radius <= {})", 5.0 * g.h()));

    let square = shipped("square_m4");
    let g = square.grid();
    let (_, set) = interfaces_of(&square);
    let n = g.nx();
    let mid = n / 2;
    // interior node next to the midpoint of top, right, bottom, left
    let inner = [g.index(mid, n - 2), g.index(n - 2, mid), g.index(mid, 1), g.index(1, mid)];
    for i in 0..4 {
        let s = set.support(i);
        let own = s[inner[i]];
        let opposite = !s[inner[(i + 2) % 4]];
        let conn = connected(&s, g);
        pass &= own && opposite && conn;
        details.push(format!(
            "square u{}: support {} nodes, connected {conn}, own side {own}, clear of opposite side {opposite}",
            i + 1,
            s.iter().filter(|&&b| b).count()
        ));
    }
    report(10, pass, &details.join("; "));
}

/// Median of boundary positions on the circle, taken relative to the largest
/// gap so that wrap-around clusters are handled.
fn circular_median(positions: &[usize], n: usize) -> usize {
    let mut p = positions.to_vec();
    p.sort_unstable();
    let (mut cut, mut widest) = (0, 0);
    for k in 0..p.len() {
        let next = if k + 1 < p.len() { p[k + 1] } else { p[0] + n };
        if next - p[k] > widest {
            widest = next - p[k];
            cut = (k + 1) % p.len();
        }
    }
    let unrolled: Vec<usize> = (0..p.len()).map(|k| p[(cut + k) % p.len()] + if cut + k >= p.len() { n } else { 0 }).collect();
    unrolled[unrolled.len() / 2] % n
}

#[test]
fn criterion_11_screened_kernel_second_order() {
    let k: f64 = 9.0;
    let s = k.sqrt();
    let errs: Vec<f64> = [21, 41, 81, 161]
        .iter()
        .map(|&n| {
            let g = Arc::new(build_grid(&Domain::Interval { a: 0.0, b: 1.0 }, n).unwrap());
            let c = ScalarField::from_fn(&g, |_| k);
            let b = BoundaryValues::new(&g, vec![1.0, 0.0]).unwrap();
            let (u, _) = solve_screened(&g, &c, &b, &LinearSettings::with_tol(1e-12)).unwrap();
            let exact = ScalarField::from_fn(&g, |[x, _]| (s * (1.0 - x)).sinh() / s.sinh());
            u.sup_distance(&exact)
        })
        .collect();
    let ratios: Vec<f64> = errs.windows(2).map(|w| w[0] / w[1]).collect();
    let pass = ratios.iter().all(|r| (3.5..=4.5).contains(r));
    report(11, pass, &format!("errors {errs:?}, ratios {ratios:?} (in [3.5, 4.5])"));
}
