//! One PASS/FAIL line per acceptance criterion.
//!
//! Runs as a plain binary so the lines always reach stdout. Exits non-zero
//! when a criterion fails, except for the derivative-constant check listed in
//! `KNOWN_FAILURES`: that bound does not hold as stated, the line reports it
//! as FAIL with the violation count, and the binary instead asserts that the
//! corrected constant holds.

use std::time::Instant;

use chaoscalc::calculus::{
    derivative_at, pettis_time_integral, pointwise, s_transform, s_transform_frechet, skorohod, wick,
};
use chaoscalc::chaos::relative_residual;
use chaoscalc::donsker::{donsker_delta, donsker_norm_limit, donsker_norm_series, DonskerExperiment};
use chaoscalc::montecarlo::{ito_oracle, mc_moments, sample_path, Evaluator};
use chaoscalc::oracle::{chaos_formula_oracle, s_transform_oracle};
use chaoscalc::suite::identity_suite;
use chaoscalc::tensor::MATERIALIZE_LIMIT;
use chaoscalc::vmbv::{integrate_plain, integrate_strongind, integrate_wick, stability_suite, VmbvOptions, Volatility};
use chaoscalc::volterra::{fbm_covariance_exact, kernel_covariance, VolterraKernel};
use chaoscalc::{draws, ChaosError, ChaosProcess, ChaosVector, Grid};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const KNOWN_FAILURES: [u32; 1] = [4];

struct Outcome {
    pass: bool,
    detail: String,
    /// Set when the only failing sub-check is the one listed in `KNOWN_FAILURES`.
    known_deviation: bool,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome {
        pass,
        detail,
        known_deviation: false,
    }
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn residual(a: &ChaosVector, b: &ChaosVector) -> f64 {
    relative_residual(a, b, MATERIALIZE_LIMIT).unwrap()
}

fn grid8() -> Grid {
    Grid::new(1.0, 8).unwrap()
}

fn identities() -> Outcome {
    let rows = identity_suite(&grid8(), 3, 2024, 50).unwrap();
    let worst = rows.iter().map(|r| r.max_residual).fold(0.0, f64::max);
    let names: Vec<String> = rows
        .iter()
        .map(|r| format!("{}={:.1e}", r.identity, r.max_residual))
        .collect();
    outcome(
        worst <= 1e-10,
        format!("max residual {worst:.2e} ({})", names.join(", ")),
    )
}

fn oracle_equivalence() -> Outcome {
    let grid = grid8();
    let table = VolterraKernel::ou(0.8).unwrap().tabulate(&grid).unwrap();
    let opts = VmbvOptions::default();
    let mut r = rng(2);
    let (mut plain, mut wick_err): (f64, f64) = (0.0, 0.0);
    for _ in 0..20 {
        let t = grid.cell_start(r.random_range(2..=8));
        let phi = draws::process(&mut r, &grid, 3, 0.5);
        let got = integrate_plain(&phi, &table, t, &opts).unwrap().value;
        plain = plain.max(residual(&got, &chaos_formula_oracle(&phi, &table, t, None).unwrap()));
        let sigma = draws::process(&mut r, &grid, 1, 0.5);
        let got = integrate_wick(&phi, &sigma, &table, t, &opts).unwrap().value;
        let want = chaos_formula_oracle(&phi, &table, t, Some(&sigma)).unwrap();
        wick_err = wick_err.max(residual(&got, &want));
    }
    outcome(
        plain.max(wick_err) <= 1e-10,
        format!("plain {plain:.2e}, wick {wick_err:.2e} over 20 integrands"),
    )
}

fn s_transform_suite() -> Outcome {
    let grid = grid8();
    let table = VolterraKernel::turbulence(1.0, 1.5).unwrap().tabulate(&grid).unwrap();
    let opts = VmbvOptions::default();
    let mut r = rng(3);
    let (mut mult, mut interchange, mut frechet, mut oracle): (f64, f64, f64, f64) = (0.0, 0.0, 0.0, 0.0);
    let h = 1e-4;
    for _ in 0..20 {
        let a = draws::vector(&mut r, &grid, 3, 0.5);
        let b = draws::vector(&mut r, &grid, 2, 0.5);
        let xi = draws::test_function(&mut r, &grid);
        let sa = s_transform(&a, &xi).unwrap();
        let sb = s_transform(&b, &xi).unwrap();
        let sw = s_transform(&wick(&a, &b).unwrap(), &xi).unwrap();
        mult = mult.max((sw - sa * sb).abs() / (1.0 + (sa * sb).abs()));

        let psi = draws::process(&mut r, &grid, 2, 0.5);
        let lhs = s_transform(&pettis_time_integral(&psi, 0.0, 1.0).unwrap(), &xi).unwrap();
        let rhs: f64 = grid.step() * psi.values().iter().map(|v| s_transform(v, &xi).unwrap()).sum::<f64>();
        interchange = interchange.max((lhs - rhs).abs() / (1.0 + rhs.abs()));

        for j in 0..grid.cells() {
            let exact = s_transform_frechet(&a, &xi, j).unwrap();
            let up = s_transform(&a, &xi.bumped(j, h)).unwrap();
            let down = s_transform(&a, &xi.bumped(j, -h)).unwrap();
            frechet = frechet.max(((up - down) / (2.0 * h) - exact).abs());
        }

        let phi = draws::process(&mut r, &grid, 2, 0.5);
        let sigma = draws::process(&mut r, &grid, 1, 0.5);
        let v = integrate_plain(&phi, &table, 1.0, &opts).unwrap().value;
        let o = s_transform_oracle(&phi, &table, 1.0, &xi, None).unwrap();
        let s = s_transform(&v, &xi).unwrap();
        oracle = oracle.max((s - o).abs() / (1.0 + o.abs()));
        let v = integrate_wick(&phi, &sigma, &table, 1.0, &opts).unwrap().value;
        let o = s_transform_oracle(&phi, &table, 1.0, &xi, Some(&sigma)).unwrap();
        let s = s_transform(&v, &xi).unwrap();
        oracle = oracle.max((s - o).abs() / (1.0 + o.abs()));
    }
    let pass = mult <= 1e-12 && interchange <= 1e-12 && frechet <= 1e-6 && oracle <= 1e-10;
    outcome(
        pass,
        format!(
            "wick multiplicativity {mult:.1e}, interchange {interchange:.1e}, \
             frechet vs finite difference {frechet:.1e}, integral oracles {oracle:.1e}"
        ),
    )
}

fn sup_weighted(eps: f64, shift: usize) -> f64 {
    // max(1, sup_n (n + shift) e^{−2εn}); the supremum sits near n = 1/(2ε).
    let top = (1.0 / (2.0 * eps)).ceil() as usize + 2;
    (0..=top)
        .map(|n| (n + shift) as f64 * (-2.0 * eps * n as f64).exp())
        .fold(1.0, f64::max)
}

fn norm_estimates() -> Outcome {
    let grid = grid8();
    let step = grid.step();
    let mut r = rng(4);
    let draws_each = 200;
    let (mut deriv_literal, mut deriv_corrected, mut skor, mut wick_v, mut dual) = (0, 0, 0, 0, 0);
    for _ in 0..draws_each {
        let lambda: f64 = r.random_range(0.05..2.0);
        let eps: f64 = r.random_range(0.05..1.0);

        let phi = draws::vector(&mut r, &grid, 4, 0.5);
        let lhs: f64 = step
            * (0..grid.cells())
                .map(|j| derivative_at(&phi, j).unwrap().gnorm_sq(-lambda - eps))
                .sum::<f64>();
        let rhs = phi.gnorm_sq(-lambda);
        let c = sup_weighted(eps, 0);
        if lhs > c * rhs * (1.0 + 1e-12) {
            deriv_literal += 1;
        }
        if lhs > c * (2.0 * (lambda + eps)).exp() * rhs * (1.0 + 1e-12) {
            deriv_corrected += 1;
        }

        let psi = draws::process(&mut r, &grid, 3, 0.5);
        let lhs = skorohod(&psi, 0.0, 1.0).unwrap().gnorm_sq(-lambda - eps);
        let rhs: f64 = step * psi.values().iter().map(|v| v.gnorm_sq(-lambda)).sum::<f64>();
        if lhs > sup_weighted(eps, 1) * rhs * (1.0 + 1e-12) {
            skor += 1;
        }

        let lam: f64 = r.random_range(0.6..2.5);
        let lam_lo: f64 = r.random_range(-1.0..lam - 0.5);
        let a = draws::vector(&mut r, &grid, 3, 0.5);
        let b = draws::vector(&mut r, &grid, 3, 0.5);
        let d = lam - lam_lo;
        let c = (2.0 * d - 1.0).powf(-0.5) * (d - 1.0).exp();
        if wick(&a, &b).unwrap().gnorm(lam_lo) > c * a.gnorm(lam) * b.gnorm(lam) * (1.0 + 1e-12) {
            wick_v += 1;
        }

        let p = a.pairing(&b).unwrap().abs();
        if p > a.gnorm(-lambda) * b.gnorm(lambda) * (1.0 + 1e-12) {
            dual += 1;
        }
    }
    let others_hold = deriv_corrected == 0 && skor == 0 && wick_v == 0 && dual == 0;
    let mut o = outcome(
        deriv_literal == 0 && others_hold,
        format!(
            "violations in {draws_each} draws: derivative bound with C=max(1,sup n e^(-2 eps n)) {deriv_literal}, \
             same with extra factor e^(2(lambda+eps)) {deriv_corrected}, skorohod bound {skor}, \
             wick bound {wick_v}, duality {dual}"
        ),
    );
    o.known_deviation = deriv_literal > 0 && others_hold;
    o
}

fn disjoint_split(r: &mut ChaCha8Rng, cells: u32) -> (Vec<u32>, Vec<u32>) {
    loop {
        let (a, b): (Vec<u32>, Vec<u32>) = (0..cells).partition(|_| r.random::<bool>());
        if !a.is_empty() && !b.is_empty() {
            return (a, b);
        }
    }
}

fn strong_independence() -> Outcome {
    let grid = grid8();
    let table = VolterraKernel::ou(1.0).unwrap().tabulate(&grid).unwrap();
    let opts = VmbvOptions::default();
    let mut r = rng(5);
    let (mut products, mut integrals): (f64, f64) = (0.0, 0.0);
    let mut rejected = 0;
    let cases = 100;
    for _ in 0..cases {
        let (left, right) = disjoint_split(&mut r, 8);
        let a = draws::vector_on(&mut r, &grid, 3, &left, 0.6);
        let b = draws::vector_on(&mut r, &grid, 3, &right, 0.6);
        products = products.max(residual(&wick(&a, &b).unwrap(), &pointwise(&a, &b).unwrap()));

        let phi = draws::process_on(&mut r, &grid, 2, &left, 0.6);
        let sigma = draws::process_on(&mut r, &grid, 2, &right, 0.6);
        let s = integrate_strongind(&phi, &sigma, &table, 1.0, &opts).unwrap().value;
        let w = integrate_wick(&phi, &sigma, &table, 1.0, &opts).unwrap().value;
        integrals = integrals.max(residual(&s, &w));

        let dense = draws::process(&mut r, &grid, 1, 1.0);
        let shared = draws::process_on(&mut r, &grid, 1, &[left[0]], 1.0);
        let overlap = ChaosProcess::linear_combine(1.0, &sigma, 1.0, &shared).unwrap();
        if matches!(
            integrate_strongind(&dense, &overlap, &table, 1.0, &opts),
            Err(ChaosError::Independence { .. })
        ) {
            rejected += 1;
        }
    }
    outcome(
        products <= 1e-14 && integrals <= 1e-14 && rejected == cases,
        format!(
            "wick vs pointwise {products:.1e}, strongind vs wick {integrals:.1e}, overlaps rejected {rejected}/{cases}"
        ),
    )
}

fn donsker() -> Outcome {
    let grid = Grid::new(1.0, 64).unwrap();
    let series = donsker_norm_series(1.0, 1.0, 40).unwrap();
    let tensor = donsker_delta(1.0, 40, &grid).unwrap().gnorm_sq(-1.0);
    let closed = donsker_norm_limit(1.0, 1.0);
    let agree = (series - tensor).abs() <= 1e-12 * series;
    let near = (series - closed).abs() <= 1e-5 && (tensor - closed).abs() <= 1e-5;

    let scaled: Vec<f64> = [0.25, 0.5, 0.75, 1.0]
        .iter()
        .map(|&t| donsker_delta(t, 40, &grid).unwrap().gnorm_sq(-1.0) * t)
        .collect();
    let scaling = scaled.iter().map(|v| (v - scaled[0]).abs()).fold(0.0, f64::max) / scaled[0];

    let exp = DonskerExperiment {
        alpha: 1.0,
        eps: 0.25,
        t: 1.0,
        terms: 20,
    };
    let report = exp.run(&grid, &[0.5, 1.0, 2.0]).unwrap();
    let dominated = report.rows.iter().all(|r| r.dominated);
    let finite = report.rows.iter().all(|r| r.finite);
    let norms: Vec<String> = report
        .rows
        .iter()
        .map(|r| format!("{}:{:.4e}", r.lambda, r.norm_sq))
        .collect();
    outcome(
        agree && near && scaling <= 1e-12 && dominated && finite,
        format!(
            "series {series:.8} tensor {tensor:.8} closed form {closed:.8}; 1/t spread {scaling:.1e}; \
             A(3) dominated {dominated}; integral norms {}",
            norms.join(" ")
        ),
    )
}

fn monte_carlo() -> Outcome {
    let grid = Grid::new(1.0, 16).unwrap();
    let samples = 100_000;
    let mut r = rng(7);
    let mut details = Vec::new();
    let mut pass = true;

    for n in 1..=3 {
        let f = draws::kernel(&mut r, &grid, n, &draws::all_cells(&grid), 0.3);
        let v = ChaosVector::from_kernel(f.clone());
        let m = mc_moments(&v, samples, 100 + n as u64).unwrap();
        let expected = chaoscalc::combinatorics::factorial(n) * f.norm_sq();
        let z = (m.variance - expected) / m.se_variance;
        pass &= z.abs() <= 3.0 && (m.mean / m.se_mean).abs() <= 3.0;
        details.push(format!("I_{n} z={z:+.2}"));
    }

    let one = VolterraKernel::constant_one(&grid).tabulate(&grid).unwrap();
    let mut pathwise: f64 = 0.0;
    for k in 0..20 {
        let phi = draws::adapted_process(&mut r, &grid, 2, 0.4);
        let value = integrate_plain(&phi, &one, 1.0, &VmbvOptions::default()).unwrap();
        pass &= value.drift_part.is_zero();
        let ev = Evaluator::new(&value.value);
        for p in 0..50 {
            let omega = sample_path(&grid, 900 + k, p);
            let a = ev.eval(&omega).unwrap();
            let b = ito_oracle(&phi, &omega).unwrap();
            pathwise = pathwise.max((a - b).abs());
        }
    }
    pass &= pathwise <= 1e-10;
    details.push(format!("ito pathwise {pathwise:.1e}"));

    let table = VolterraKernel::ou(1.0).unwrap().tabulate(&grid).unwrap();
    let unit = ChaosProcess::constant(ChaosVector::constant(1.0, grid));
    let x = integrate_plain(&unit, &table, 1.0, &VmbvOptions::default())
        .unwrap()
        .value;
    let m = mc_moments(&x, samples, 31).unwrap();
    let var_exact = -(-2.0f64).exp_m1() / 2.0;
    let (zm, zv) = (m.mean / m.se_mean, (m.variance - var_exact) / m.se_variance);
    pass &= zm.abs() <= 3.0 && zv.abs() <= 3.0;
    details.push(format!("OU mean z={zm:+.2} var z={zv:+.2}"));
    outcome(pass, details.join(", "))
}

fn fbm() -> Outcome {
    let grid = Grid::new(1.0, 512).unwrap();
    let mut worst: f64 = 0.0;
    for h in [0.6, 0.7, 0.8] {
        let k = VolterraKernel::fbm(h).unwrap();
        for (t, s) in [(1.0, 0.5), (1.0, 0.25), (0.75, 0.5)] {
            let got = kernel_covariance(&k, &grid, t, s).unwrap();
            let want = fbm_covariance_exact(h, t, s);
            worst = worst.max((got - want).abs() / want);
        }
    }
    let trivial = fbm_covariance_exact(0.7, 1.0, 0.5);
    outcome(
        worst <= 0.05 && trivial == 0.5,
        format!("max relative covariance error {worst:.4}; exact value at (1, 0.5) = {trivial}"),
    )
}

fn stability() -> Outcome {
    let grid = grid8();
    let table = VolterraKernel::ou(1.0).unwrap().tabulate(&grid).unwrap();
    let opts = VmbvOptions::default();
    let mut r = rng(9);
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let phi = draws::process(&mut r, &grid, 2, 0.5);
        let psi = draws::process(&mut r, &grid, 2, 0.5);
        let sigma = draws::process(&mut r, &grid, 1, 0.5);
        for vol in [
            Volatility::None,
            Volatility::Pointwise(&sigma),
            Volatility::Wick(&sigma),
        ] {
            for row in stability_suite(&phi, &psi, &table, 1.0, vol, -1.0, 6, &opts).unwrap() {
                worst = worst.max((row.residual - row.predicted).abs() / row.predicted.max(1e-300));
            }
        }
    }
    outcome(worst <= 1e-10, format!("max deviation from the 1/n law {worst:.1e}"))
}

type Criterion = (u32, &'static str, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 9] = [
        (1, "identity suite", identities),
        (2, "oracle equivalence", oracle_equivalence),
        (3, "S-transform suite", s_transform_suite),
        (4, "norm estimates", norm_estimates),
        (5, "strong independence", strong_independence),
        (6, "Donsker delta", donsker),
        (7, "Monte Carlo consistency", monte_carlo),
        (8, "fBm covariance", fbm),
        (9, "stability", stability),
    ];
    let mut unexpected = Vec::new();
    for (id, name, run) in criteria {
        let start = Instant::now();
        let o = run();
        let tag = if o.pass { "PASS" } else { "FAIL" };
        println!(
            "{tag} {id} {name}: {} [{:.1}s]",
            o.detail,
            start.elapsed().as_secs_f64()
        );
        let known = KNOWN_FAILURES.contains(&id) && o.known_deviation;
        if !o.pass && !known {
            unexpected.push(id);
        }
    }
    if !unexpected.is_empty() {
        eprintln!("unexpected failures: {unexpected:?}");
        std::process::exit(1);
    }
}
