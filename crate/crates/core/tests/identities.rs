use chaoscalc::calculus::s_transform;
use chaoscalc::chaos::relative_residual;
use chaoscalc::draws;
use chaoscalc::oracle::{chaos_formula_oracle, s_transform_oracle};
use chaoscalc::suite::{identity_suite, IDENTITIES};
use chaoscalc::tensor::MATERIALIZE_LIMIT;
use chaoscalc::vmbv::{integrate_plain, integrate_wick, VmbvOptions};
use chaoscalc::volterra::VolterraKernel;
use chaoscalc::Grid;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn identities_hold_to_rounding() {
    let grid = Grid::new(1.0, 6).unwrap();
    let rows = identity_suite(&grid, 3, 11, 3).unwrap();
    assert_eq!(rows.len(), IDENTITIES.len());
    for r in rows {
        assert!(r.max_residual < 1e-12, "{}: {}", r.identity, r.max_residual);
    }
}

#[test]
fn plain_integral_matches_chaos_formula() {
    let grid = Grid::new(1.0, 6).unwrap();
    let table = VolterraKernel::ou(0.7).unwrap().tabulate(&grid).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..4 {
        let phi = draws::process(&mut rng, &grid, 2, 0.6);
        let got = integrate_plain(&phi, &table, 5.0 / 6.0, &VmbvOptions::default())
            .unwrap()
            .value;
        let want = chaos_formula_oracle(&phi, &table, 5.0 / 6.0, None).unwrap();
        assert!(relative_residual(&got, &want, MATERIALIZE_LIMIT).unwrap() < 1e-12);
    }
}

#[test]
fn wick_integral_matches_chaos_formula_and_s_transform() {
    let grid = Grid::new(1.0, 5).unwrap();
    let table = VolterraKernel::turbulence(1.0, 1.5).unwrap().tabulate(&grid).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..3 {
        let phi = draws::process(&mut rng, &grid, 2, 0.6);
        let sigma = draws::process(&mut rng, &grid, 1, 0.6);
        let got = integrate_wick(&phi, &sigma, &table, 1.0, &VmbvOptions::default())
            .unwrap()
            .value;
        let want = chaos_formula_oracle(&phi, &table, 1.0, Some(&sigma)).unwrap();
        assert!(relative_residual(&got, &want, MATERIALIZE_LIMIT).unwrap() < 1e-12);
        let xi = draws::test_function(&mut rng, &grid);
        let s = s_transform(&got, &xi).unwrap();
        let o = s_transform_oracle(&phi, &table, 1.0, &xi, Some(&sigma)).unwrap();
        assert!((s - o).abs() < 1e-12 * (1.0 + o.abs()), "{s} vs {o}");
    }
}
