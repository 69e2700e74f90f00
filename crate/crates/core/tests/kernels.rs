use chaoscalc::quad;
use chaoscalc::volterra::{fbm_covariance_exact, kernel_covariance, kg_apply, KernelSpec, VolterraKernel};
use chaoscalc::{ChaosProcess, ChaosVector, Grid};

#[test]
fn ou_kg_matches_continuum_formula() {
    // K_g(φ)(t,s) = g(t,s)φ(s) + ∫_s^t (φ(u) − φ(s)) g(du,s) for φ(u) = u².
    let grid = Grid::new(1.0, 256).unwrap();
    let alpha = 1.3;
    let kernel = VolterraKernel::ou(alpha).unwrap();
    let table = kernel.tabulate(&grid).unwrap();
    let phi = ChaosProcess::from_fn(grid, |j| {
        let u = grid.cell_start(j);
        ChaosVector::constant(u * u, grid)
    })
    .unwrap();
    let kg = kg_apply(&phi, &table, 1.0).unwrap();
    for j in [10usize, 100, 200, 250] {
        let s = table.s_point(j);
        let (stieltjes, _) = quad::integrate(
            |u| (u * u - s * s) * (-alpha * (-alpha * (u - s)).exp()),
            s,
            1.0,
            1e-12,
            0.0,
        );
        let exact = (-alpha * (1.0 - s)).exp() * s * s + stieltjes;
        let got = kg.at(j).expectation();
        assert!((got - exact).abs() < 5e-3, "cell {j}: {got} vs {exact}");
    }
}

#[test]
fn turbulence_total_variation_is_its_rise_and_fall() {
    // u ↦ (u−s)^{ν−1} e^{−α(u−s)} peaks at u − s = (ν−1)/α.
    let grid = Grid::new(4.0, 16).unwrap();
    let (alpha, nu) = (1.0, 2.0);
    let k = VolterraKernel::turbulence(alpha, nu).unwrap();
    let s = 0.5;
    let meas = k.measure(&grid, s, 0.75, 4.0).unwrap();
    let g = |u: f64| k.eval(u, s).unwrap();
    let peak = s + (nu - 1.0) / alpha;
    assert_eq!(grid.aligned_boundary(peak), Some(6));
    let exact = (g(peak) - g(0.75)) + (g(peak) - g(4.0));
    assert!((meas.total_variation - exact).abs() < 1e-14);
}

#[test]
fn fbm_covariance_converges() {
    let k = VolterraKernel::fbm(0.7).unwrap();
    let exact = fbm_covariance_exact(0.7, 1.0, 0.5);
    let coarse = kernel_covariance(&k, &Grid::new(1.0, 32).unwrap(), 1.0, 0.5).unwrap();
    let fine = kernel_covariance(&k, &Grid::new(1.0, 256).unwrap(), 1.0, 0.5).unwrap();
    assert!((fine - exact).abs() < (coarse - exact).abs());
    assert!((fine - exact).abs() / exact < 0.05);
}

#[test]
fn brownian_case_is_exact() {
    let k = VolterraKernel::fbm(0.5).unwrap();
    let grid = Grid::new(1.0, 16).unwrap();
    let c = kernel_covariance(&k, &grid, 1.0, 0.25).unwrap();
    assert!((c - 0.25).abs() < 1e-14);
}

#[test]
fn singular_kernels_refuse_the_diagonal() {
    let k = VolterraKernel::fbm(0.7).unwrap();
    assert!(k.is_singular());
    assert!(k.eval(0.5, 0.5).is_err());
    assert!(VolterraKernel::turbulence(1.0, 0.75).unwrap().is_singular());
    assert!(!VolterraKernel::ou(1.0).unwrap().is_singular());
}

#[test]
fn kernel_spec_json() {
    let spec: KernelSpec = serde_json::from_str(r#"{"kind":"fbm","H":0.7}"#).unwrap();
    assert_eq!(spec, KernelSpec::Fbm { hurst: 0.7 });
    assert!(serde_json::from_str::<KernelSpec>(r#"{"kind":"ou","alpha":1,"beta":2}"#).is_err());
    assert!(VolterraKernel::new(KernelSpec::Ou { alpha: -1.0 }).is_err());
}
