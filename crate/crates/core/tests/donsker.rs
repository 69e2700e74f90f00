use chaoscalc::calculus::{s_transform, TestFunction};
use chaoscalc::donsker::*;
use chaoscalc::Grid;

#[test]
fn tensor_norm_equals_series_on_aligned_times() {
    let grid = Grid::new(2.0, 16).unwrap();
    for (t, lambda, terms) in [(0.5, 0.7, 10), (1.25, 1.0, 25), (2.0, 2.0, 40)] {
        let tensor = donsker_delta(t, terms, &grid).unwrap().gnorm_sq(-lambda);
        let series = donsker_norm_series(t, lambda, terms).unwrap();
        assert!(
            (tensor - series).abs() <= 1e-12 * series,
            "{t} {lambda}: {tensor} vs {series}"
        );
    }
}

#[test]
fn series_converges_to_closed_form() {
    let limit = donsker_norm_limit(1.0, 1.0);
    assert!((limit - 0.160_632_787).abs() < 1e-8);
    let s6 = donsker_norm_series(1.0, 1.0, 6).unwrap();
    let s40 = donsker_norm_series(1.0, 1.0, 40).unwrap();
    assert!((s6 - s40).abs() < 1e-6);
    assert!((s40 - limit).abs() < 1e-12);
    let half = donsker_norm_series(2.0, 1.0, 30).unwrap();
    assert!((2.0 * half - donsker_norm_series(1.0, 1.0, 30).unwrap()).abs() < 1e-15);
}

#[test]
fn s_transform_matches_gaussian_density() {
    // S δ₀(B(t))(ξ) = exp(−(∫_0^t ξ)² / 2t) / √(2πt).
    let grid = Grid::new(1.0, 8).unwrap();
    let xi = TestFunction::new(grid, vec![0.3, -0.2, 0.5, 0.1, 0.0, 0.4, -0.6, 0.2]).unwrap();
    let t = 0.75;
    let mass: f64 = xi.values()[..6].iter().sum::<f64>() * grid.step();
    let exact = (-mass * mass / (2.0 * t)).exp() / (2.0 * std::f64::consts::PI * t).sqrt();
    let approx = s_transform(&donsker_delta(t, 30, &grid).unwrap(), &xi).unwrap();
    assert!((approx - exact).abs() < 1e-12, "{approx} vs {exact}");
}

#[test]
fn experiment_rejects_bad_cutoff() {
    let grid = Grid::new(1.0, 8).unwrap();
    let exp = DonskerExperiment {
        alpha: 1.0,
        eps: 1.0,
        t: 1.0,
        terms: 4,
    };
    assert!(exp.run(&grid, &[1.0]).is_err());
}

#[test]
fn kg_shape_keeps_sign_and_tracks_continuum() {
    let grid = Grid::new(1.0, 32).unwrap();
    let exp = DonskerExperiment {
        alpha: 1.0,
        eps: 0.25,
        t: 1.0,
        terms: 4,
    };
    let report = exp.run(&grid, &[1.0]).unwrap();
    assert!(report.rows[0].dominated && report.rows[0].finite);
    for row in &report.kg_shape {
        let sign = if (row.order / 2) % 2 == 0 { 1.0 } else { -1.0 };
        assert!(row.discrete * sign > 0.0, "{row:?}");
        assert!(row.continuum * sign > 0.0, "{row:?}");
        assert!(
            (row.discrete - row.continuum).abs() < 0.05 * row.continuum.abs(),
            "{row:?}"
        );
    }
}

#[test]
fn degenerate_rate_is_finite() {
    let grid = Grid::new(1.0, 16).unwrap();
    let exp = DonskerExperiment {
        alpha: 0.0,
        eps: 0.25,
        t: 1.0,
        terms: 6,
    };
    let report = exp.run(&grid, &[0.5, 1.0]).unwrap();
    assert!(report.rows.iter().all(|r| r.finite && r.a3_max == 0.0));
}
