//! The closed-form moment against three independent computations: the
//! piecewise integral, adaptive quadrature and Monte Carlo.

use lap2::lap2::alpha_univariate;
use lap2::oracle::{mc_moment, quadrature_moment_a, quadrature_moment_b, MixtureSpec};

fn main() -> lap2::error::Result<()> {
    for &(zeta, r, lambda) in &[(0.01, 1.0, 2u32), (0.1, 0.5, 16), (0.5, 2.0, 8)] {
        let spec = MixtureSpec::laplace(1.0, 0.0, r, zeta);
        let closed = alpha_univariate(zeta, r, lambda)?.exp();
        let check = quadrature_moment_a(&spec, lambda)?;
        let mc = mc_moment(&spec, lambda, 200_000, 11)?;
        let b = quadrature_moment_b(&spec, lambda)?;
        println!("zeta {zeta} r {r} lambda {lambda}");
        println!("  accountant  {closed:.12}");
        println!("  piecewise   {:.12}", check.estimate.value);
        println!("  quadrature  {:.12} (disagreement {:.1e})", check.quadrature.value, check.disagreement);
        println!("  monte carlo {:.6} ± {:.1e}", mc.value, mc.error_bound);
        println!("  B moment    {:.12}", b.value);
    }
    Ok(())
}
