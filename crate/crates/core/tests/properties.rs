use std::sync::Arc;

use proptest::prelude::*;
use segregate::analysis::{
    default_delta, discrete_energy, extract_supports_and_interfaces, laplacian_measure, mass_near,
};
use segregate::{
    apply_laplacian, build_grid, parse_config_str, solve_epsilon, solve_epsilon_observed, solve_harmonic, solve_limit,
    BoundaryValues, CouplingWeights, Domain, Exponents, FixedPointSettings, Grid, LinearSettings, NodeClass, Problem,
    ScalarField,
};

fn square(n: usize) -> Arc<Grid> {
    Arc::new(build_grid(&Domain::Rectangle { x0: -1.0, x1: 1.0, y0: -1.0, y1: 1.0 }, n).unwrap())
}

/// Nonnegative boundary data with exactly one vanishing component at each
/// boundary point, chosen cyclically in blocks so that zero sets are arcs.
fn segregated_data(grid: &Grid, m: usize, raw: &[f64]) -> Vec<BoundaryValues> {
    let nb = grid.boundary_points().len();
    (0..m)
        .map(|i| {
            let v = (0..nb)
                .map(|k| if (k * m / nb) % m == i { 0.0 } else { raw[(k + 7 * i) % raw.len()] })
                .collect();
            BoundaryValues::new(grid, v).unwrap()
        })
        .collect()
}

fn problem(grid: &Arc<Grid>, data: Vec<BoundaryValues>) -> Problem {
    let m = data.len();
    Problem::from_values(Arc::clone(grid), data, CouplingWeights::uniform(m), Exponents::ones(m)).unwrap()
}

fn reflect(g: &Grid, node: usize, axis: u8) -> usize {
    let (i, j) = g.ij(node);
    match axis {
        0 => g.index(g.nx() - 1 - i, j),
        1 => g.index(i, g.ny() - 1 - j),
        _ => g.index(j, i),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn classification_is_symmetric_and_boundary_points_cover_boundary(half in 3usize..30, disk in any::<bool>()) {
        let n = 2 * half + 1;
        let domain = if disk {
            Domain::Disk { center: [0.0, 0.0], radius: 1.0 }
        } else {
            Domain::Rectangle { x0: -1.0, x1: 1.0, y0: -1.0, y1: 1.0 }
        };
        let g = build_grid(&domain, n).unwrap();
        for node in 0..g.len() {
            for axis in 0..3 {
                prop_assert_eq!(g.class(node), g.class(reflect(&g, node, axis)));
            }
        }
        let mut from_points: Vec<usize> = g.boundary_points().iter().map(|p| p.node).collect();
        from_points.sort_unstable();
        let mut tagged: Vec<usize> = (0..g.len()).filter(|&k| g.class(k) == NodeClass::Boundary).collect();
        tagged.sort_unstable();
        prop_assert_eq!(from_points, tagged);
    }

    #[test]
    fn harmonic_comparison(lo in proptest::collection::vec(0.0f64..1.0, 56), bump in proptest::collection::vec(0.0f64..1.0, 56)) {
        let g = square(15);
        let nb = g.boundary_points().len();
        let b1 = BoundaryValues::new(&g, (0..nb).map(|k| lo[k % lo.len()]).collect()).unwrap();
        let b2 = BoundaryValues::new(&g, (0..nb).map(|k| lo[k % lo.len()] + bump[(3 * k) % bump.len()]).collect()).unwrap();
        let s = LinearSettings::with_tol(1e-12);
        let (u1, _) = solve_harmonic(&g, &b1, &s).unwrap();
        let (u2, _) = solve_harmonic(&g, &b2, &s).unwrap();
        prop_assert!(u1.zip_map(&u2, |a, b| a - b).max() <= 1e-11);
    }

    #[test]
    fn epsilon_iterates_respect_bounds(
        m in 2usize..4,
        raw in proptest::collection::vec(0.1f64..2.0, 23),
        log_eps in -4.0f64..-1.0,
    ) {
        let g = square(13);
        let p = problem(&g, segregated_data(&g, m, &raw));
        let settings = FixedPointSettings { tol_fp: 1e-10, ..FixedPointSettings::default() };
        let big_m = p.max_boundary();
        let mut ok = true;
        let r = solve_epsilon_observed(&p, 10f64.powf(log_eps), &settings, None, |s| {
            ok &= s.current.iter().all(|u| u.min() >= 0.0 && u.max() <= big_m);
        }).unwrap();
        prop_assert!(ok);
        let tol = 10.0 * settings.linear.tol * big_m;
        let oracle = LinearSettings::with_tol(1e-12);
        for i in 0..m {
            let (h, _) = solve_harmonic(&g, p.boundary(i), &oracle).unwrap();
            let (big_h, _) = solve_harmonic(&g, &p.hat_boundary(i), &oracle).unwrap();
            let mut hat = r.fields[i].clone();
            for (j, f) in r.fields.iter().enumerate() {
                if j != i {
                    hat = &hat - f;
                }
            }
            prop_assert!(r.fields[i].zip_map(&h, |u, h| u - h).max() <= tol);
            prop_assert!(big_h.zip_map(&hat, |a, b| a - b).max() <= tol);
        }
    }

    #[test]
    fn limit_is_subharmonic_bracketed_and_pivot_free(m in 2usize..5, raw in proptest::collection::vec(0.0f64..2.0, 31)) {
        let g = square(17);
        let p = problem(&g, segregated_data(&g, m, &raw));
        let s = LinearSettings::default();
        let oracle = LinearSettings::with_tol(1e-12);
        let scale = p.max_boundary().max(f64::MIN_POSITIVE);
        let tol = 10.0 * s.tol * scale;
        let limits: Vec<_> = (0..m).map(|q| solve_limit(&p, q, &s).unwrap()).collect();
        let base = &limits[0];
        for i in 0..m {
            let u = &base.fields[i];
            let lap = apply_laplacian(u);
            let lowest = g.interior_nodes().iter().map(|&k| lap.get(k)).fold(f64::INFINITY, f64::min);
            let lap_scale = scale / (g.h() * g.h());
            prop_assert!(lowest >= -tol * lap_scale, "component {} lap {}", i, lowest);
            let (h, _) = solve_harmonic(&g, p.boundary(i), &oracle).unwrap();
            let (big_h, _) = solve_harmonic(&g, &p.hat_boundary(i), &oracle).unwrap();
            prop_assert!(u.zip_map(&h, |a, b| a - b).max() <= tol);
            prop_assert!(big_h.zip_map(u, |a, b| a - b).max() <= tol);
            for other in &limits[1..] {
                prop_assert!(u.sup_distance(&other.fields[i]) <= tol);
            }
        }
    }
}

fn line(m3: bool) -> segregate::SystemConfig {
    let third = if m3 { "\n[boundary.3]\npiece = \"all: 0.5\"\n" } else { "" };
    parse_config_str(&format!(
        "[domain]\nkind = \"interval\"\nn = 201\n\n[system]\nm = {}\n\n[boundary.1]\npiece = [\"left: 1\", \"right: 0\"]\n\n[boundary.2]\npiece = [\"left: 0\", \"right: 1\"]\n{third}",
        if m3 { 3 } else { 2 }
    ))
    .unwrap()
}

#[test]
fn energy_is_bounded_and_approaches_the_limit() {
    for m3 in [false, true] {
        let c = line(m3);
        let p = c.problem();
        let limit = solve_limit(p, 0, &c.linear_settings()).unwrap();
        let target = discrete_energy(&limit.fields);
        let energies: Vec<f64> = [1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6, 1e-7]
            .iter()
            .map(|&e| discrete_energy(&solve_epsilon(p, e, &c.fixed_point_settings()).unwrap().fields))
            .collect();
        let harmonic: Vec<ScalarField> =
            (0..p.m()).map(|i| solve_harmonic(p.grid(), p.boundary(i), &c.linear_settings()).unwrap().0).collect();
        let bound = 2.0 * (discrete_energy(&harmonic) + target);
        assert!(energies.iter().all(|&e| e <= bound), "{energies:?} vs {bound}");
        let gaps: Vec<f64> = energies.iter().map(|e| (e - target).abs()).collect();
        assert!(gaps.windows(2).all(|w| w[1] < w[0]), "{gaps:?}");
        assert!(gaps[6] <= 0.05 * target, "{gaps:?} vs {target}");
    }
}

#[test]
fn limit_measure_concentrates_on_interfaces() {
    for m3 in [false, true] {
        let c = line(m3);
        let p = c.problem();
        let limit = solve_limit(p, 0, &c.linear_settings()).unwrap();
        let g = p.grid();
        let set = extract_supports_and_interfaces(&limit.fields, default_delta(g, c.solver.tol_linear, p.max_boundary()));
        for u in &limit.fields {
            let mu = laplacian_measure(u);
            assert!(mu.min() >= -10.0 * c.solver.tol_linear * p.max_boundary());
            if mu.max() > 0.0 {
                assert!(mass_near(&mu, &set, 2.0 * g.h()) >= 0.9);
            }
        }
    }
}
