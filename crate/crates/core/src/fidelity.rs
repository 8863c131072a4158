//! Arbitrary-copy fidelities `F_L = ⟨φ^{⊗L}|ρ_L|φ^{⊗L}⟩`, numerically from a
//! machine output and in exact closed form.

use num_bigint::{BigInt, BigUint};
use num_traits::Zero;
use serde::Serialize;

use crate::combinatorics::{
    rational_to_f64, ratio, serialize_rational, sym_dim, ExactRational, FactorialTable,
};
use crate::error::{invalid, Result};
use crate::hilbert::{random_pure_state, seeded_rng, PureState};
use crate::machines::{run_machine, CloneSpec, MachineKind};
use crate::parallel::{self, Execution};
use crate::symmetric_subspace::{expand_power, reduce_symmetric, SymDensity};

fn check_l(total: usize, l: usize) -> Result<()> {
    if l < 1 || l > total {
        return invalid(format!("L must be in 1..={total}, got {l}"));
    }
    Ok(())
}

/// `⟨φ^{⊗L}|ρ_L|φ^{⊗L}⟩` with `ρ_L` obtained by [`reduce_symmetric`].
pub fn fidelity_l_numeric(rho: &SymDensity, phi: &PureState, l: usize) -> Result<f64> {
    check_l(rho.basis().total(), l)?;
    let reduced = reduce_symmetric(rho, l)?;
    reduced.expectation(&expand_power(phi, l)?)
}

/// Closed form for `F_L`:
///
/// `(d+N−1)! (M−N)! (M−L)! / ((d+M−1)! M! N!) · Σ_{m₁} (M−m₁+d−2)! (m₁!)² / ((m₁−L)! (m₁−N)! (d−2)! (M−m₁)!)`
///
/// summed over `max(L, N) ≤ m₁ ≤ M`; outside that range a factorial of a
/// negative argument appears in the denominator and the term vanishes.
pub fn fidelity_l_closed(spec: &CloneSpec, l: usize) -> Result<ExactRational> {
    let (d, n, m) = (spec.d(), spec.n(), spec.m());
    check_l(m, l)?;
    let f = FactorialTable::up_to(m + d);
    let prefactor = ratio(
        f.get(d + n - 1) * f.get(m - n) * f.get(m - l),
        f.get(d + m - 1) * f.get(m) * f.get(n),
    );
    let mut sum = ExactRational::zero();
    for m1 in 0..=m {
        let (Some(fl), Some(fn_)) = (f.signed(m1 as i64 - l as i64), f.signed(m1 as i64 - n as i64)) else {
            continue;
        };
        let num = f.get(m - m1 + d - 2) * f.get(m1) * f.get(m1);
        let den = fl * fn_ * f.get(d - 2) * f.get(m - m1);
        sum += ratio(num, den);
    }
    Ok(prefactor * sum)
}

/// `F_1 = (N(d+M) + M − N) / ((d+N) M)`.
pub fn fidelity_single_closed(spec: &CloneSpec) -> ExactRational {
    let (d, n, m) = (spec.d(), spec.n(), spec.m());
    ExactRational::new(BigInt::from(n * (d + m) + m - n), BigInt::from((d + n) * m))
}

/// `F_M = d[N] / d[M]`.
pub fn fidelity_global_closed(spec: &CloneSpec) -> ExactRational {
    let dn = sym_dim(spec.d(), spec.n()).unwrap_or_else(|_| BigUint::zero());
    let dm = sym_dim(spec.d(), spec.m()).unwrap_or_else(|_| BigUint::zero());
    ratio(dn, dm)
}

/// `F_L` for a single input: `L! d! [L(d+M) + M − L] / ((d+L)! M)`.
pub fn fidelity_l_closed_n1(d: usize, m: usize, l: usize) -> Result<ExactRational> {
    if d < 2 {
        return invalid(format!("local dimension must be >= 2, got {d}"));
    }
    check_l(m, l)?;
    let f = FactorialTable::up_to(d + l);
    Ok(ratio(
        f.get(l) * f.get(d) * BigUint::from(l * (d + m) + m - l),
        f.get(d + l) * BigUint::from(m),
    ))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FidelityRow {
    #[serde(rename = "L")]
    pub l: usize,
    pub numeric: f64,
    #[serde(serialize_with = "serialize_rational")]
    pub closed: ExactRational,
    pub closed_float: f64,
    pub abs_diff: f64,
}

impl FidelityRow {
    fn new(l: usize, numeric: f64, closed: ExactRational) -> Self {
        let closed_float = rational_to_f64(&closed);
        Self { l, numeric, abs_diff: (numeric - closed_float).abs(), closed, closed_float }
    }
}

/// Numeric and closed-form `F_L` for every `L ∈ 1..=M`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FidelityReport {
    pub spec: CloneSpec,
    pub machine: MachineKind,
    pub seed: u64,
    pub rows: Vec<FidelityRow>,
}

impl FidelityReport {
    pub fn max_abs_diff(&self) -> f64 {
        self.rows.iter().map(|r| r.abs_diff).fold(0.0, f64::max)
    }
}

/// Runs `machine` on `phi` (or on a Haar-random state drawn from `seed` when
/// `phi` is `None`) and tabulates `F_L`.
pub fn fidelity_table(
    spec: &CloneSpec,
    phi: Option<&PureState>,
    machine: MachineKind,
    seed: u64,
    mode: Execution,
) -> Result<FidelityReport> {
    let drawn;
    let phi = match phi {
        Some(p) => p,
        None => {
            drawn = random_pure_state(spec.d(), &mut seeded_rng(seed))?;
            &drawn
        }
    };
    let out = run_machine(machine, spec, phi)?;
    let rows = parallel::try_map(mode, (1..=spec.m()).collect(), |l| {
        let numeric = fidelity_l_numeric(&out.density, phi, l)?;
        Ok(FidelityRow::new(l, numeric, fidelity_l_closed(spec, l)?))
    })?;
    Ok(FidelityReport { spec: *spec, machine, seed, rows })
}
