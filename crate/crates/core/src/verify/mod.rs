//! Numerical checks of logconcavity statements on computed ground states.
//!
//! Every check returns a [`CheckResult`] carrying the worst violation found,
//! the tolerance it was compared against, and the inputs of that tolerance.

mod locality;
mod pairs;
mod pointwise;
mod segment;
mod sweep;
mod trace;

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::eigensolver::{hessian, spectral_norm_2x2, GridField};
use crate::geometry::{GridMask, Point};
use crate::{Error, Result};

pub use locality::{envelope_gradient_check, locality_check, LocalityReport};
pub use pairs::{ac_modulus_check, ac_modulus_on_pairs};
pub use pointwise::{
    hessian_convexity_check, li_yau_check, li_yau_with_gradients, lipschitz_check, pde_residual_check,
    rayleigh_check, subsolution_check,
};
pub use segment::{alpha_kappa_monotonicity, segment_concavity_check, MonotonicityPairs};
pub use sweep::{sweep_kappa, SweepResult};
pub use trace::{trace_concavity_check, trace_concavity_property};

/// Outcome of one check.
///
/// `worst_violation` is signed, positive meaning violated, and `pass` holds
/// exactly when it does not exceed `tolerance`. It is `None` when nothing was
/// measured: either the check is vacuous (`vacuous` is set and the check
/// passes) or a structural requirement failed (the check fails).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    pub pass: bool,
    pub worst_violation: Option<f64>,
    pub tolerance: f64,
    pub samples: usize,
    /// Node indices of the worst case.
    pub worst_location: Vec<usize>,
    #[serde(default)]
    pub vacuous: bool,
    /// Quantities the tolerance was built from.
    #[serde(default)]
    pub tolerance_inputs: BTreeMap<String, f64>,
    /// Further diagnostics (medians, counts, extrema).
    #[serde(default)]
    pub metrics: BTreeMap<String, f64>,
    /// Set when the check could not be evaluated.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl CheckResult {
    fn measured(name: &str, worst: f64, tolerance: f64, samples: usize, location: Vec<usize>) -> Self {
        CheckResult {
            name: name.to_string(),
            pass: worst <= tolerance,
            worst_violation: Some(worst),
            tolerance,
            samples,
            worst_location: location,
            vacuous: false,
            tolerance_inputs: BTreeMap::new(),
            metrics: BTreeMap::new(),
            error: None,
        }
    }

    fn vacuous(name: &str, tolerance: f64) -> Self {
        CheckResult {
            name: name.to_string(),
            pass: true,
            worst_violation: None,
            tolerance,
            samples: 0,
            worst_location: Vec::new(),
            vacuous: true,
            tolerance_inputs: BTreeMap::new(),
            metrics: BTreeMap::new(),
            error: None,
        }
    }

    fn structural_failure(name: &str, tolerance: f64, samples: usize) -> Self {
        CheckResult {
            name: name.to_string(),
            pass: false,
            worst_violation: None,
            tolerance,
            samples,
            worst_location: Vec::new(),
            vacuous: false,
            tolerance_inputs: BTreeMap::new(),
            metrics: BTreeMap::new(),
            error: None,
        }
    }

    /// A failed result recording why the check could not run.
    pub fn from_error(name: &str, error: &Error) -> Self {
        let mut r = Self::structural_failure(name, f64::NAN, 0);
        r.error = Some(error.to_string());
        r
    }

    fn input(mut self, key: &str, value: f64) -> Self {
        self.tolerance_inputs.insert(key.to_string(), value);
        self
    }

    fn metric(mut self, key: &str, value: f64) -> Self {
        self.metrics.insert(key.to_string(), value);
        self
    }
}

/// Random pair sampling for segment-type checks.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SamplerConfig {
    pub seed: u64,
    pub pair_count: usize,
    /// Interpolation parameters, each in `(0, 1)`.
    pub t_values: Vec<f64>,
    /// Interior band width; `None` selects [`default_check_band`].
    pub band: Option<f64>,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        SamplerConfig { seed: 42, pair_count: 10_000, t_values: vec![0.5], band: None }
    }
}

impl SamplerConfig {
    pub fn validate(&self) -> Result<()> {
        if self.pair_count == 0 {
            return Err(Error::InvalidParameter("pair_count must be at least 1".into()));
        }
        if let Some(t) = self.t_values.iter().find(|t| !(**t > 0.0 && **t < 1.0)) {
            return Err(Error::InvalidParameter(format!("t = {t} is not in (0, 1)")));
        }
        if self.t_values.is_empty() {
            return Err(Error::InvalidParameter("t_values is empty".into()));
        }
        if let Some(b) = self.band {
            if !(b >= 0.0) {
                return Err(Error::InvalidParameter(format!("band {b} must be nonnegative")));
            }
        }
        Ok(())
    }

    pub fn band_for(&self, mask: &GridMask) -> f64 {
        self.band.unwrap_or_else(|| default_check_band(mask))
    }
}

/// Default band excluded from checks: `max(4h, 0.02·D)`.
pub fn default_check_band(mask: &GridMask) -> f64 {
    (4.0 * mask.h()).max(0.02 * mask.domain().diameter())
}

/// Default band excluded from envelope construction: `max(2h, 0.02·D)`.
pub fn default_envelope_band(mask: &GridMask) -> f64 {
    (2.0 * mask.h()).max(0.02 * mask.domain().diameter())
}

/// Nodes at distance at least `band` from `∂Ω`.
pub fn band_nodes(mask: &GridMask, band: f64) -> Vec<usize> {
    (0..mask.len()).filter(|&k| mask.boundary_distance(k) >= band).collect()
}

/// Largest finite-difference Hessian norm of `values` over `nodes`.
pub fn max_hessian_norm(mask: &GridMask, values: &[f64], nodes: &[usize]) -> Result<f64> {
    let hs = hessian(mask, values)?;
    Ok(nodes.iter().filter_map(|&k| hs[k]).map(spectral_norm_2x2).fold(0.0, f64::max))
}

/// Contact and convexity tolerance `ε_conv = 10⁻⁹·range(w) + 4h²·M₂` over the
/// nodes of the band, with `M₂` the largest finite-difference Hessian norm.
pub fn eps_conv(w: &GridField, band: f64) -> Result<EpsConv> {
    let mask = w.mask();
    let nodes = band_nodes(mask, band);
    if nodes.is_empty() {
        return Err(Error::EmptyBand(band));
    }
    let values = w.values();
    let (lo, hi) = nodes
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &k| (lo.min(values[k]), hi.max(values[k])));
    let m2 = max_hessian_norm(mask, values, &nodes)?;
    let h = mask.h();
    Ok(EpsConv { value: 1e-9 * (hi - lo) + 4.0 * h * h * m2, range: hi - lo, m2, h })
}

/// [`eps_conv`] together with its inputs.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpsConv {
    pub value: f64,
    pub range: f64,
    pub m2: f64,
    pub h: f64,
}

/// Bilinear (linear in 1D) interpolation of nodal values; nodes outside the
/// domain contribute the Dirichlet value 0.
pub fn interpolate(mask: &GridMask, values: &[f64], p: Point) -> f64 {
    let g = mask.grid_coords(p);
    let i0 = g[0].floor();
    let fx = g[0] - i0;
    let at = |i: f64, j: f64| mask.node_at(i as isize, j as isize).map_or(0.0, |k| values[k]);
    if mask.dimension() == 1 {
        return (1.0 - fx) * at(i0, 0.0) + fx * at(i0 + 1.0, 0.0);
    }
    let j0 = g[1].floor();
    let fy = g[1] - j0;
    (1.0 - fy) * ((1.0 - fx) * at(i0, j0) + fx * at(i0 + 1.0, j0))
        + fy * ((1.0 - fx) * at(i0, j0 + 1.0) + fx * at(i0 + 1.0, j0 + 1.0))
}

const CHUNK: usize = 4096;

/// Worst case over `count` random node pairs drawn from `candidates`.
///
/// Pairs are generated in fixed-size chunks, each from its own ChaCha stream
/// of `seed`, and reduced in chunk order, so the outcome does not depend on
/// the number of worker threads. `eval` returns the violation and may return
/// `None` to skip a pair.
pub(crate) fn sample_pairs<F>(seed: u64, count: usize, candidates: &[usize], eval: F) -> (f64, Vec<usize>, usize)
where
    F: Fn(usize, usize) -> Option<(f64, Vec<usize>)> + Sync,
{
    let chunks = count.div_ceil(CHUNK);
    let n = candidates.len();
    let results: Vec<(f64, Vec<usize>, usize)> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(c as u64);
            let todo = CHUNK.min(count - c * CHUNK);
            let mut worst = (f64::NEG_INFINITY, Vec::new(), 0usize);
            for _ in 0..todo {
                let a = candidates[rng.random_range(0..n)];
                let mut b = candidates[rng.random_range(0..n)];
                if n > 1 {
                    while b == a {
                        b = candidates[rng.random_range(0..n)];
                    }
                }
                if let Some((v, loc)) = eval(a, b) {
                    worst.2 += 1;
                    if v > worst.0 {
                        worst.0 = v;
                        worst.1 = loc;
                    }
                }
            }
            worst
        })
        .collect();
    let mut total = (f64::NEG_INFINITY, Vec::new(), 0);
    for (v, loc, k) in results {
        total.2 += k;
        if v > total.0 {
            total.0 = v;
            total.1 = loc;
        }
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eigensolver::Role;
    use crate::geometry::{make_domain, rasterize, DomainSpec};
    use std::sync::Arc;

    #[test]
    fn bilinear_interpolation_is_exact_on_bilinear_fields() {
        let d = make_domain(&DomainSpec::Disc { center: [0.0, 0.0], radius: 1.0 }).unwrap();
        let mask = Arc::new(rasterize(&d, 0.1).unwrap());
        let f = GridField::from_fn(mask.clone(), Role::U, |p| 1.0 + p[0] - 2.0 * p[1] + 0.5 * p[0] * p[1]);
        for p in [[0.13, -0.27], [0.0, 0.0], [-0.41, 0.33]] {
            let v = interpolate(&mask, f.values(), p);
            assert!((v - (1.0 + p[0] - 2.0 * p[1] + 0.5 * p[0] * p[1])).abs() < 1e-12);
        }
    }

    #[test]
    fn sampling_is_deterministic_and_thread_independent() {
        let candidates: Vec<usize> = (0..1000).collect();
        let eval = |a: usize, b: usize| Some((((a * 7919 + b * 104_729) % 1_000_003) as f64, vec![a, b]));
        let first = sample_pairs(5, 20_000, &candidates, eval);
        let pool = rayon::ThreadPoolBuilder::new().num_threads(3).build().unwrap();
        let second = pool.install(|| sample_pairs(5, 20_000, &candidates, eval));
        assert_eq!(first, second);
        assert_eq!(first.2, 20_000);
        assert_ne!(first, sample_pairs(6, 20_000, &candidates, eval));
    }

    #[test]
    fn sampler_validation() {
        assert!(SamplerConfig::default().validate().is_ok());
        let bad = SamplerConfig { t_values: vec![1.0], ..SamplerConfig::default() };
        assert!(bad.validate().is_err());
        let bad = SamplerConfig { pair_count: 0, ..SamplerConfig::default() };
        assert!(bad.validate().is_err());
    }
}
