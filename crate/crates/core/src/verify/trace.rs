//! Randomized midpoint concavity of matrix functionals on SPD matrices.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::CheckResult;
use crate::{Error, Result};

/// `Q ↦ 1/Tr(Q⁻¹)`, or `None` when `Q` is not positive definite.
pub fn inverse_trace_of_inverse(q: &DMatrix<f64>) -> Option<f64> {
    let chol = q.clone().cholesky()?;
    Some(1.0 / chol.inverse().trace())
}

/// Symmetric positive definite matrix with eigenvalues spread over a few
/// orders of magnitude.
fn random_spd(rng: &mut ChaCha8Rng, n: usize) -> DMatrix<f64> {
    let m = DMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
    let shift = 10f64.powf(rng.random_range(-3.0..0.0));
    &m * m.transpose() + DMatrix::identity(n, n) * shift
}

/// Midpoint concavity `φ((A+B)/2) ≥ (φ(A) + φ(B))/2` over `trials` random SPD
/// pairs of size 2 to 6. Violations are measured relative to
/// `max(|φ(A)|, |φ(B)|)` and compared with `10⁻¹²`.
pub fn trace_concavity_check<F>(name: &str, seed: u64, trials: usize, phi: F) -> Result<CheckResult>
where
    F: Fn(&DMatrix<f64>) -> Option<f64>,
{
    if trials == 0 {
        return Err(Error::InvalidParameter("trials must be at least 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = (f64::NEG_INFINITY, 0usize);
    for trial in 0..trials {
        let n = rng.random_range(2..=6);
        let a = random_spd(&mut rng, n);
        let b = random_spd(&mut rng, n);
        let mid = (&a + &b) * 0.5;
        let (Some(fa), Some(fb), Some(fm)) = (phi(&a), phi(&b), phi(&mid)) else {
            return Err(Error::Degenerate(format!("trial {trial}: functional undefined on an SPD matrix")));
        };
        let scale = fa.abs().max(fb.abs()).max(f64::MIN_POSITIVE);
        let v = (0.5 * (fa + fb) - fm) / scale;
        if v > worst.0 {
            worst = (v, trial);
        }
    }
    Ok(CheckResult::measured(name, worst.0, 1e-12, trials, vec![worst.1]).input("trials", trials as f64))
}

/// [`trace_concavity_check`] for `φ(Q) = 1/Tr(Q⁻¹)`.
pub fn trace_concavity_property(seed: u64, trials: usize) -> Result<CheckResult> {
    trace_concavity_check("trace_concavity", seed, trials, inverse_trace_of_inverse)
}
