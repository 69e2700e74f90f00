use chaoscalc::calculus::{derivative_at, skorohod, wick};
use chaoscalc::vmbv::{integrate, VmbvOptions, Volatility};
use chaoscalc::volterra::VolterraKernel;
use chaoscalc::{ChaosProcess, ChaosVector, Grid, SymKernel};

fn main() -> chaoscalc::Result<()> {
    let grid = Grid::new(1.0, 8)?;

    // B(1) = I_1(1) and its Wick square I_2(1 ⊗ 1) = B(1)^2 - 1.
    let b1 = ChaosVector::from_kernel(SymKernel::from_values(grid, &[1.0; 8])?);
    let sq = wick(&b1, &b1)?;
    println!("E[B(1)⋄B(1)] = {}", sq.expectation());
    // D_s of it is 2 B(1) for every s.
    println!("‖D_s(B(1)⋄B(1))‖² = {}", derivative_at(&sq, 3)?.gnorm_sq(0.0));

    // δ(1) over [0, 1) is B(1) again.
    let one = ChaosProcess::constant(ChaosVector::constant(1.0, grid));
    let d = skorohod(&one, 0.0, 1.0)?;
    println!("‖δ(1) − B(1)‖ = {}", d.sub(&b1)?.gnorm(0.0));

    // ∫_0^1 1 dX with X the OU Volterra process.
    let table = VolterraKernel::ou(1.0)?.tabulate(&grid)?;
    let x = integrate(&one, &table, 1.0, Volatility::None, &VmbvOptions::default())?;
    println!("Var X(1) = {}", x.value.gnorm_sq(0.0));
    Ok(())
}
