use chaoscalc::calculus::pointwise;
use chaoscalc::montecarlo::*;
use chaoscalc::vmbv::{integrate_plain, VmbvOptions};
use chaoscalc::volterra::VolterraKernel;
use chaoscalc::{ChaosProcess, ChaosVector, Grid, SymKernel};

#[test]
fn noise_is_reproducible() {
    let grid = Grid::new(1.0, 16).unwrap();
    assert_eq!(sample_noise(&grid, 9), sample_noise(&grid, 9));
    assert_ne!(sample_path(&grid, 9, 0), sample_path(&grid, 9, 1));
}

#[test]
fn brownian_endpoint_and_constants() {
    let grid = Grid::new(2.0, 8).unwrap();
    let omega = sample_noise(&grid, 1);
    let b = ChaosVector::from_kernel(SymKernel::from_values(grid, &[1.0; 8]).unwrap());
    let sum: f64 = omega.increments(&grid).iter().sum();
    assert!((evaluate(&b, &omega).unwrap() - sum).abs() < 1e-14);
    assert_eq!(evaluate(&ChaosVector::constant(3.5, grid), &omega).unwrap(), 3.5);
}

#[test]
fn pointwise_product_is_pathwise_product() {
    let grid = Grid::new(1.0, 6).unwrap();
    let f = SymKernel::from_values(grid, &[0.4, -1.0, 0.0, 2.0, 0.5, 1.0]).unwrap();
    let g = SymKernel::from_entries(
        2,
        grid,
        vec![(vec![0, 1], 0.7), (vec![3, 3], -0.2), (vec![1, 5], 1.1)],
        chaoscalc::EntryMode::Canonical,
    )
    .unwrap();
    let a = ChaosVector::from_kernel(f);
    let mut b = ChaosVector::from_kernel(g);
    b.add_kernel(1.0, &SymKernel::scalar(0.3, grid)).unwrap();
    let ab = pointwise(&a, &b).unwrap();
    for p in 0..20 {
        let omega = sample_path(&grid, 77, p);
        let lhs = evaluate(&ab, &omega).unwrap();
        let rhs = evaluate(&a, &omega).unwrap() * evaluate(&b, &omega).unwrap();
        assert!((lhs - rhs).abs() < 1e-10 * (1.0 + rhs.abs()));
    }
}

#[test]
fn ito_oracle_rejects_anticipating_integrand() {
    let grid = Grid::new(1.0, 4).unwrap();
    let phi = ChaosProcess::from_fn(grid, |j| {
        let v: Vec<f64> = (0..4).map(|i| if i >= j { 1.0 } else { 0.0 }).collect();
        ChaosVector::from_kernel(SymKernel::from_values(grid, &v).unwrap())
    })
    .unwrap();
    assert!(ito_oracle(&phi, &sample_noise(&grid, 0)).is_err());
}

#[test]
fn ito_sum_of_brownian_motion() {
    let grid = Grid::new(1.0, 8).unwrap();
    let brownian = ChaosProcess::from_fn(grid, |j| {
        let v: Vec<f64> = (0..8).map(|i| if i < j { 1.0 } else { 0.0 }).collect();
        ChaosVector::from_kernel(SymKernel::from_values(grid, &v).unwrap())
    })
    .unwrap();
    let one = VolterraKernel::constant_one(&grid).tabulate(&grid).unwrap();
    let value = integrate_plain(&brownian, &one, 1.0, &VmbvOptions::default())
        .unwrap()
        .value;
    for p in 0..10 {
        let omega = sample_path(&grid, 3, p);
        let db = omega.increments(&grid);
        let mut b = 0.0;
        let mut ito = 0.0;
        for d in db {
            ito += b * d;
            b += d;
        }
        assert!((evaluate(&value, &omega).unwrap() - ito).abs() < 1e-12);
        assert!((ito_oracle(&brownian, &omega).unwrap() - ito).abs() < 1e-12);
    }
}

#[test]
fn moments_of_fbm_endpoint() {
    let grid = Grid::new(1.0, 64).unwrap();
    let table = VolterraKernel::fbm(0.7).unwrap().tabulate(&grid).unwrap();
    let unit = ChaosProcess::constant(ChaosVector::constant(1.0, grid));
    let x = integrate_plain(&unit, &table, 1.0, &VmbvOptions::default())
        .unwrap()
        .value;
    let m = mc_moments(&x, 20_000, 5).unwrap();
    assert!((m.variance - 1.0).abs() <= 3.0 * m.se_variance + 0.05, "{m:?}");
    assert!(mc_moments(&x, 1, 5).is_err());
}
