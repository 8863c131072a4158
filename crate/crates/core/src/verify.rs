//! Batch verification drivers: machine equivalence, covariance and support
//! checks over seeded random inputs, the asymmetric trade-off sweep, and the
//! summation-identity grid.
//!
//! Trial `i` draws its randomness from a ChaCha stream `i` under the caller's
//! seed, so results do not depend on evaluation order.

use nalgebra::DMatrix;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::combinatorics::{verify_identity, IdentityReport};
use crate::error::{invalid, Result};
use crate::hilbert::{self, random_pure_state, random_unitary, seeded_rng, FullDensity, PureState, ORACLE_CAP};
use crate::machines::{
    asymmetric_1to2, fan_output, unified_oracle, unified_output, werner_oracle, werner_output,
    AsymmetryWeights, CloneSpec,
};
use crate::parallel::{self, Execution};
use crate::symmetric_subspace::{projector_full, symmetric_power_operator, SymDensity};

/// Pass threshold for every distance in the equivalence report.
pub const EQUIVALENCE_TOL: f64 = 1e-10;

pub fn trial_rng(seed: u64, trial: usize) -> ChaCha8Rng {
    let mut rng = seeded_rng(seed);
    rng.set_stream(trial as u64);
    rng
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialResult {
    pub trial: usize,
    pub werner_fan: f64,
    pub werner_unified: f64,
    pub fan_unified: f64,
    /// Occupation-basis Werner output vs the dense projector form.
    pub werner_oracle: Option<f64>,
    /// Occupation-basis unified output vs the dense entangled-pair form.
    pub unified_oracle: Option<f64>,
    /// Largest `‖out(uφ) − U out(φ) U†‖_tr` over the three machines.
    pub covariance: f64,
    /// Largest `‖s_M ρ s_M − ρ‖` over the dense oracle outputs.
    pub support_residual: Option<f64>,
}

impl TrialResult {
    pub fn max_distance(&self) -> f64 {
        [self.werner_fan, self.werner_unified, self.fan_unified, self.covariance]
            .into_iter()
            .chain(self.werner_oracle)
            .chain(self.unified_oracle)
            .chain(self.support_residual)
            .fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EquivalenceReport {
    pub spec: CloneSpec,
    pub trials: usize,
    pub seed: u64,
    pub tolerance: f64,
    /// Whether the dense oracle checks ran.
    pub full_oracle: bool,
    pub warning: Option<String>,
    pub results: Vec<TrialResult>,
    pub max_distance: f64,
    pub passed: bool,
}

fn support_residual(rho: &FullDensity, projector: &DMatrix<hilbert::C64>) -> f64 {
    let m = rho.matrix();
    (projector * m * projector - m).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

fn covariance_distance(rotated: &SymDensity, base: &SymDensity, u_sym: &DMatrix<hilbert::C64>) -> Result<f64> {
    rotated.trace_distance(&base.conjugate_by(u_sym)?)
}

fn run_trial(spec: &CloneSpec, seed: u64, trial: usize, full_oracle: bool) -> Result<TrialResult> {
    let mut rng = trial_rng(seed, trial);
    let phi = random_pure_state(spec.d(), &mut rng)?;
    let u = random_unitary(spec.d(), &mut rng)?;
    let rotated = phi.apply(&u)?;
    let u_sym = symmetric_power_operator(&u, spec.m())?;

    let werner = werner_output(spec, &phi)?;
    let fan = fan_output(spec, &phi)?.density;
    let unified = unified_output(spec, &phi)?.density;

    let covariance = [
        covariance_distance(&werner_output(spec, &rotated)?, &werner, &u_sym)?,
        covariance_distance(&fan_output(spec, &rotated)?.density, &fan, &u_sym)?,
        covariance_distance(&unified_output(spec, &rotated)?.density, &unified, &u_sym)?,
    ]
    .into_iter()
    .fold(0.0, f64::max);

    let (werner_oracle_dist, unified_oracle_dist, support) = if full_oracle {
        let wo = werner_oracle(spec, &phi)?;
        let uo = unified_oracle(spec, &phi)?.density;
        let s = projector_full(spec.d(), spec.m())?;
        (
            Some(hilbert::trace_distance(&werner.to_full()?, &wo)?),
            Some(hilbert::trace_distance(&unified.to_full()?, &uo)?),
            Some(support_residual(&wo, &s).max(support_residual(&uo, &s))),
        )
    } else {
        (None, None, None)
    };

    Ok(TrialResult {
        trial,
        werner_fan: werner.trace_distance(&fan)?,
        werner_unified: werner.trace_distance(&unified)?,
        fan_unified: fan.trace_distance(&unified)?,
        werner_oracle: werner_oracle_dist,
        unified_oracle: unified_oracle_dist,
        covariance,
        support_residual: support,
    })
}

/// Pairwise distances among the three machines, covariance and symmetric
/// support over `trials` seeded random inputs. The dense checks run only
/// when `d^{2M−N}` fits under the oracle cap.
pub fn verify_equivalence(spec: &CloneSpec, trials: usize, seed: u64, mode: Execution) -> Result<EquivalenceReport> {
    if trials == 0 {
        return invalid("need at least one trial");
    }
    let full_oracle = spec.unified_oracle_feasible();
    let warning = (!full_oracle).then(|| {
        format!(
            "d^(2M-N) = {}^{} exceeds the oracle cap of {ORACLE_CAP} amplitudes; running fast paths only",
            spec.d(),
            2 * spec.m() - spec.n()
        )
    });
    let results = parallel::try_map(mode, (0..trials).collect(), |t| run_trial(spec, seed, t, full_oracle))?;
    let max_distance = results.iter().map(TrialResult::max_distance).fold(0.0, f64::max);
    Ok(EquivalenceReport {
        spec: *spec,
        trials,
        seed,
        tolerance: EQUIVALENCE_TOL,
        full_oracle,
        warning,
        results,
        passed: max_distance < EQUIVALENCE_TOL,
        max_distance,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepPoint {
    /// Weights as given, before normalization.
    pub input_alpha: f64,
    pub input_beta: f64,
    pub alpha: f64,
    pub beta: f64,
    pub fidelity_a: f64,
    pub fidelity_b: f64,
}

/// `points` evenly spaced ratios from 0 to `max_ratio` inclusive.
pub fn sweep_ratios(points: usize, max_ratio: f64) -> Result<Vec<f64>> {
    if points < 2 {
        return invalid("a sweep needs at least 2 points");
    }
    if !(max_ratio.is_finite() && max_ratio > 0.0) {
        return invalid("maximum ratio must be positive and finite");
    }
    Ok((0..points).map(|i| max_ratio * i as f64 / (points - 1) as f64).collect())
}

fn sweep_point(d: usize, phi: &PureState, input_alpha: f64, input_beta: f64) -> Result<SweepPoint> {
    let out = asymmetric_1to2(d, phi, &AsymmetryWeights::pair(input_alpha, input_beta)?)?;
    Ok(SweepPoint {
        input_alpha,
        input_beta,
        alpha: out.alpha,
        beta: out.beta,
        fidelity_a: out.fidelity_a,
        fidelity_b: out.fidelity_b,
    })
}

/// Asymmetric `1 → 2` fidelities for one weight pair. The input is drawn
/// from `seed`; the machine is covariant so the fidelities do not depend on it.
pub fn asymmetric_point(d: usize, alpha: f64, beta: f64, seed: u64) -> Result<SweepPoint> {
    sweep_point(d, &random_pure_state(d, &mut seeded_rng(seed))?, alpha, beta)
}

/// Asymmetric `1 → 2` fidelities along `β/α`, with `α = 1` before
/// normalization.
pub fn asymmetric_sweep(d: usize, ratios: &[f64], seed: u64, mode: Execution) -> Result<Vec<SweepPoint>> {
    let phi = random_pure_state(d, &mut seeded_rng(seed))?;
    parallel::try_map(mode, ratios.to_vec(), |ratio| sweep_point(d, &phi, 1.0, ratio))
}

/// Whether `F_A` strictly decreases and `F_B` strictly increases along the
/// sweep.
pub fn is_monotone_tradeoff(points: &[SweepPoint]) -> bool {
    points.windows(2).all(|w| w[1].fidelity_a < w[0].fidelity_a && w[1].fidelity_b > w[0].fidelity_b)
}

/// Bounds for the identity grid: `1 ≤ N ≤ max_n`, `N ≤ M ≤ max_m`,
/// `2 ≤ d ≤ max_d`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct IdentityGrid {
    pub max_n: usize,
    pub max_m: usize,
    pub max_d: usize,
}

impl IdentityGrid {
    pub fn points(&self) -> Result<Vec<(usize, usize, usize)>> {
        let mut out = Vec::new();
        for n in 1..=self.max_n {
            for m in n..=self.max_m {
                for d in 2..=self.max_d {
                    out.push((n, m, d));
                }
            }
        }
        if out.is_empty() {
            return invalid(format!(
                "empty identity grid (max N = {}, max M = {}, max d = {})",
                self.max_n, self.max_m, self.max_d
            ));
        }
        Ok(out)
    }
}

pub fn identity_grid(grid: &IdentityGrid, mode: Execution) -> Result<Vec<IdentityReport>> {
    parallel::try_map(mode, grid.points()?, |(n, m, d)| verify_identity(n, m, d))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn trial_streams_are_independent_of_order() {
        let a: u64 = trial_rng(5, 3).random();
        let b: u64 = trial_rng(5, 3).random();
        let c: u64 = trial_rng(5, 4).random();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn equivalence_small() {
        let spec = CloneSpec::new(2, 1, 3).unwrap();
        let r = verify_equivalence(&spec, 4, 7, Execution::Parallel).unwrap();
        assert!(r.full_oracle);
        assert!(r.warning.is_none());
        assert!(r.passed, "max distance {:e}", r.max_distance);
        assert!(r.results.iter().all(|t| t.support_residual.is_some()));
        assert_eq!(r, verify_equivalence(&spec, 4, 7, Execution::Sequential).unwrap());
    }

    #[test]
    fn equivalence_perfect_cloning() {
        let spec = CloneSpec::new(2, 2, 2).unwrap();
        let r = verify_equivalence(&spec, 3, 1, Execution::Parallel).unwrap();
        assert!(r.passed);
        assert!(r.results.iter().all(|t| t.werner_fan < 1e-14 && t.fan_unified < 1e-14));
    }

    #[test]
    fn equivalence_beyond_cap_is_fast_only() {
        let spec = CloneSpec::new(3, 1, 5).unwrap();
        let r = verify_equivalence(&spec, 2, 1, Execution::Parallel).unwrap();
        assert!(!r.full_oracle);
        assert!(r.warning.as_deref().unwrap().contains("oracle cap"));
        assert!(r.passed);
        assert!(r.results.iter().all(|t| t.werner_oracle.is_none()));
        assert!(verify_equivalence(&spec, 0, 1, Execution::Parallel).is_err());
    }

    #[test]
    fn sweep_endpoints_and_symmetric_point() {
        let ratios = sweep_ratios(21, 2.0).unwrap();
        assert_eq!(ratios.len(), 21);
        assert_eq!(ratios[10], 1.0);
        let pts = asymmetric_sweep(2, &ratios, 3, Execution::Parallel).unwrap();
        assert!((pts[0].fidelity_a - 1.0).abs() < 1e-12);
        assert!((pts[0].fidelity_b - 0.5).abs() < 1e-12);
        assert!((pts[10].fidelity_a - 5.0 / 6.0).abs() < 1e-10);
        assert!((pts[10].fidelity_b - 5.0 / 6.0).abs() < 1e-10);
        let single = asymmetric_point(2, 2.0, 2.0, 3).unwrap();
        assert!((single.fidelity_a - pts[10].fidelity_a).abs() < 1e-12);
        assert_eq!(single.input_alpha, 2.0);
        assert!(!is_monotone_tradeoff(&[pts[1].clone(), pts[0].clone()]));
        assert!(sweep_ratios(1, 2.0).is_err());
        assert!(sweep_ratios(5, 0.0).is_err());
    }

    #[test]
    fn sweep_is_monotone() {
        for d in 2..=3 {
            let ratios: Vec<f64> = (0..50).map(|i| (i as f64 / 49.0 * 1.5).tan().max(0.0)).collect();
            let pts = asymmetric_sweep(d, &ratios, 1, Execution::Parallel).unwrap();
            assert!(is_monotone_tradeoff(&pts));
        }
    }

    #[test]
    fn identity_grid_checks() {
        let grid = IdentityGrid { max_n: 3, max_m: 5, max_d: 3 };
        let reports = identity_grid(&grid, Execution::Parallel).unwrap();
        assert_eq!(reports.len(), 2 * (5 + 4 + 3));
        assert!(reports.iter().all(|r| r.equal));
        assert!(IdentityGrid { max_n: 0, max_m: 5, max_d: 3 }.points().is_err());
        assert!(IdentityGrid { max_n: 2, max_m: 5, max_d: 1 }.points().is_err());
    }
}
