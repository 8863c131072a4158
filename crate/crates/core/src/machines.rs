//! The cloning machines.
//!
//! Three symmetric `N → M` constructions are provided and checked against
//! each other:
//!
//! * [`werner_output`]: the projector form `(d[N]/d[M]) s_M (σ^{⊗N} ⊗ I) s_M`,
//!   evaluated entrywise in the occupation basis;
//! * [`fan_output`]: the explicit transformation
//!   `|n⃗⟩ → η Σ_k √(∏ (n_j+k_j)!/(n_j! k_j!)) |n⃗+k⃗⟩|k⃗⟩` with ancilla `|k⃗⟩`;
//! * [`unified_output`]: `λ (s_M ⊗ I)|φ⟩^{⊗N}|Φ⁺⟩^{⊗(M−N)}`, tracing the
//!   ancilla halves.
//!
//! Each has a dense oracle counterpart (`*_oracle`) used for verification.
//!
//! Full-space factor layout for the entangled-pair constructions: copies
//! `0..M` first (inputs in `0..N`, pair halves in `N..M`), then ancillas
//! `M..2M−N`, ancilla `i` paired with copy `N + i`.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};

use crate::combinatorics::{
    binomial, enumerate_occupations, rational_to_f64, ratio, sym_dim, ExactRational,
    FactorialTable, OccupationVector,
};
use crate::error::{invalid, Error, Result};
use crate::hilbert::{self, check_cap, FullDensity, FullState, PureState, C64};
use crate::symmetric_subspace::{
    expand_power, projector_full, SymBasis, SymDensity, SymJoint,
};

/// The cloning problem `N → M` for qudits of dimension `d`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CloneSpec {
    d: usize,
    n: usize,
    m: usize,
}

impl CloneSpec {
    pub fn new(d: usize, n: usize, m: usize) -> Result<Self> {
        if d < 2 {
            return invalid(format!("local dimension must be >= 2, got {d}"));
        }
        if n < 1 {
            return invalid(format!("need at least one input copy, got N = {n}"));
        }
        if m < n {
            return invalid(format!("need M >= N, got N = {n}, M = {m}"));
        }
        Ok(Self { d, n, m })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    /// Number of blank copies, `M − N`.
    pub fn blanks(&self) -> usize {
        self.m - self.n
    }

    /// `η² = (M−N)! (N+d−1)! / (M+d−1)!`.
    pub fn eta_squared(&self) -> ExactRational {
        let f = FactorialTable::up_to(self.m + self.d);
        ratio(f.get(self.m - self.n) * f.get(self.n + self.d - 1), f.get(self.m + self.d - 1).clone())
    }

    pub fn eta(&self) -> f64 {
        rational_to_f64(&self.eta_squared()).sqrt()
    }

    /// `d[N]`.
    pub fn dim_n(&self) -> usize {
        sym_dim(self.d, self.n).ok().and_then(|v| v.to_usize()).unwrap_or(usize::MAX)
    }

    /// `d[M]`.
    pub fn dim_m(&self) -> usize {
        sym_dim(self.d, self.m).ok().and_then(|v| v.to_usize()).unwrap_or(usize::MAX)
    }

    /// Whether the dense oracle for the projector form fits (`d^M`).
    pub fn werner_oracle_feasible(&self) -> bool {
        hilbert::within_cap(self.d, self.m)
    }

    /// Whether the dense oracle for the entangled-pair form fits (`d^{2M−N}`).
    pub fn unified_oracle_feasible(&self) -> bool {
        hilbert::within_cap(self.d, 2 * self.m - self.n)
    }
}

/// Which symmetric construction produced an output.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MachineKind {
    Werner,
    Fan,
    Unified,
}

impl MachineKind {
    pub const ALL: [MachineKind; 3] = [MachineKind::Werner, MachineKind::Fan, MachineKind::Unified];

    pub fn name(&self) -> &'static str {
        match self {
            MachineKind::Werner => "werner",
            MachineKind::Fan => "fan",
            MachineKind::Unified => "unified",
        }
    }
}

impl std::fmt::Display for MachineKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for MachineKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "werner" => Ok(MachineKind::Werner),
            "fan" => Ok(MachineKind::Fan),
            "unified" => Ok(MachineKind::Unified),
            other => invalid(format!("unknown machine '{other}'")),
        }
    }
}

/// Output of a symmetric machine.
#[derive(Debug, Clone, PartialEq)]
pub struct MachineOutput {
    /// `M`-copy output in the occupation basis.
    pub density: SymDensity,
    /// Normalization applied to the raw construction; 1 when the
    /// construction is normalized by design.
    pub lambda: f64,
    pub machine: MachineKind,
    /// Normalized joint state copies ⊗ ancilla `|k⃗⟩`, when the machine
    /// produces one.
    pub joint: Option<SymJoint>,
}

/// Runs the selected symmetric machine.
pub fn run_machine(kind: MachineKind, spec: &CloneSpec, phi: &PureState) -> Result<MachineOutput> {
    match kind {
        MachineKind::Werner => Ok(MachineOutput {
            density: werner_output(spec, phi)?,
            lambda: 1.0,
            machine: MachineKind::Werner,
            joint: None,
        }),
        MachineKind::Fan => fan_output(spec, phi),
        MachineKind::Unified => unified_output(spec, phi),
    }
}

fn check_input(spec: &CloneSpec, phi: &PureState) -> Result<()> {
    if phi.dim() != spec.d {
        return Err(Error::DimensionMismatch { expected: spec.d, actual: phi.dim() });
    }
    Ok(())
}

fn float_factorials(max: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(max + 1);
    let mut acc = 1.0f64;
    out.push(acc);
    for i in 1..=max {
        acc *= i as f64;
        out.push(acc);
    }
    out
}

/// Projector-form output evaluated entrywise:
///
/// `ρ[m⃗, m⃗'] = N! η² Σ_k ∏_j x_j^{m_j−k_j} x̄_j^{m'_j−k_j} √(m_j! m'_j!) / ((m_j−k_j)! (m'_j−k_j)! k_j!)`
///
/// with `k⃗` running over occupations of `M − N` dominated by both `m⃗` and `m⃗'`.
pub fn werner_output(spec: &CloneSpec, phi: &PureState) -> Result<SymDensity> {
    check_input(spec, phi)?;
    let basis = SymBasis::new(spec.d, spec.m)?;
    let blanks = enumerate_occupations(spec.d, spec.blanks())?;
    let fact = float_factorials(spec.m);
    let x = phi.amplitudes();
    let prefactor = fact[spec.n] * rational_to_f64(&spec.eta_squared());

    let dim = basis.len();
    let vectors = basis.vectors();
    let mut matrix = DMatrix::zeros(dim, dim);
    for (r, m) in vectors.iter().enumerate() {
        for (c, mp) in vectors.iter().enumerate().skip(r) {
            let mut sum = C64::from(0.0);
            for k in blanks.iter().filter(|k| m.dominates(k) && mp.dominates(k)) {
                let mut term = C64::from(1.0);
                for j in 0..spec.d {
                    let (mj, mpj, kj) = (m.counts()[j], mp.counts()[j], k.counts()[j]);
                    term *= x[j].powu((mj - kj) as u32) * x[j].conj().powu((mpj - kj) as u32);
                    term *= (fact[mj] * fact[mpj]).sqrt() / (fact[mj - kj] * fact[mpj - kj] * fact[kj]);
                }
                sum += term;
            }
            matrix[(r, c)] = sum * prefactor;
            matrix[(c, r)] = (sum * prefactor).conj();
        }
    }
    SymDensity::new(basis, matrix)
}

/// Dense `(d[N]/d[M]) s_M (σ^{⊗N} ⊗ I^{⊗(M−N)}) s_M` on `d^M` dimensions.
pub fn werner_oracle(spec: &CloneSpec, phi: &PureState) -> Result<FullDensity> {
    check_input(spec, phi)?;
    check_cap(spec.d, spec.m)?;
    let s = projector_full(spec.d, spec.m)?;
    let sigma_n = phi.power(spec.n)?.density();
    let rest = FullDensity::maximally_mixed(spec.d, spec.blanks())?;
    // I = d^{M−N} · (I/d^{M−N})
    let scale = spec.d.pow(spec.blanks() as u32) as f64 * spec.dim_n() as f64 / spec.dim_m() as f64;
    let inner = sigma_n.tensor(&rest)?.into_matrix() * C64::from(scale);
    FullDensity::new(&s * inner * &s, spec.m, spec.d)
}

/// `√(∏_j (n_j+k_j)! / (n_j! k_j!))`.
fn bosonic_weight(n: &OccupationVector, k: &OccupationVector, fact: &[f64]) -> f64 {
    n.counts()
        .iter()
        .zip(k.counts())
        .map(|(&nj, &kj)| fact[nj + kj] / (fact[nj] * fact[kj]))
        .product::<f64>()
        .sqrt()
}

/// The explicit transformation on a basis input `|n⃗⟩`, including `η`:
/// `η Σ_k √(∏ (n_j+k_j)!/(n_j! k_j!)) |n⃗+k⃗⟩ ⊗ |k⃗⟩`.
pub fn fan_transform(spec: &CloneSpec, n: &OccupationVector) -> Result<SymJoint> {
    Ok(eq9_terms(spec, n)?.scaled(spec.eta()))
}

fn eq9_terms(spec: &CloneSpec, n: &OccupationVector) -> Result<SymJoint> {
    if n.dim() != spec.d || n.total() != spec.n {
        return invalid(format!("input occupation {n} does not match d = {}, N = {}", spec.d, spec.n));
    }
    let copies = SymBasis::new(spec.d, spec.m)?;
    let ancilla = SymBasis::new(spec.d, spec.blanks())?;
    let fact = float_factorials(spec.m);
    let mut joint = SymJoint::zeros(copies, ancilla.clone());
    for k in ancilla.vectors() {
        joint.add_to(&n.plus(k), k, C64::from(bosonic_weight(n, k, &fact)));
    }
    Ok(joint)
}

/// Linear extension of [`fan_transform`] to `|φ⟩^{⊗N}`; the ancilla `R_k⃗`
/// is realized as the occupation state `|k⃗⟩`.
pub fn fan_output(spec: &CloneSpec, phi: &PureState) -> Result<MachineOutput> {
    check_input(spec, phi)?;
    let input = expand_power(phi, spec.n)?;
    let copies = SymBasis::new(spec.d, spec.m)?;
    let ancilla = SymBasis::new(spec.d, spec.blanks())?;
    let fact = float_factorials(spec.m);
    let eta = spec.eta();
    let mut joint = SymJoint::zeros(copies, ancilla.clone());
    for (n, amp) in input.basis().vectors().iter().zip(input.amplitudes().iter()) {
        for k in ancilla.vectors() {
            joint.add_to(&n.plus(k), k, amp * (eta * bosonic_weight(n, k, &fact)));
        }
    }
    Ok(MachineOutput {
        density: joint.reduce_left(),
        lambda: 1.0,
        machine: MachineKind::Fan,
        joint: Some(joint),
    })
}

/// The entangled-pair construction on a basis input, in the reduced form
/// `Σ_k √(∏ (n_j+k_j)!/(n_j! k_j!)) |n⃗+k⃗⟩|k⃗⟩`.
#[derive(Debug, Clone, PartialEq)]
pub struct UnifiedPure {
    pub joint: SymJoint,
    /// `(s_M ⊗ I)|n⃗⟩|Φ⁺⟩^{⊗(M−N)} = global_factor · joint`, equal to
    /// `d^{−(M−N)/2} / √C(M, N)`.
    pub global_factor: f64,
    /// Norm of `joint` as stored.
    pub norm: f64,
}

pub fn unified_pure_output(spec: &CloneSpec, n: &OccupationVector) -> Result<UnifiedPure> {
    let joint = eq9_terms(spec, n)?;
    let choose = binomial(spec.m as i64, spec.n as i64)?.to_f64().unwrap_or(f64::INFINITY);
    let global_factor = (spec.d as f64).powf(-(spec.blanks() as f64) / 2.0) / choose.sqrt();
    let norm = joint.norm();
    Ok(UnifiedPure { joint, global_factor, norm })
}

/// `λ (s_M ⊗ I)|φ⟩^{⊗N}|Φ⁺⟩^{⊗(M−N)}` built in the occupation basis;
/// `lambda` is the recorded normalization.
pub fn unified_output(spec: &CloneSpec, phi: &PureState) -> Result<MachineOutput> {
    check_input(spec, phi)?;
    let input = expand_power(phi, spec.n)?;
    let copies = SymBasis::new(spec.d, spec.m)?;
    let ancilla = SymBasis::new(spec.d, spec.blanks())?;
    let mut coeffs = DMatrix::zeros(copies.len(), ancilla.len());
    for (n, amp) in input.basis().vectors().iter().zip(input.amplitudes().iter()) {
        let pure = unified_pure_output(spec, n)?;
        coeffs += pure.joint.coeffs() * (amp * pure.global_factor);
    }
    let raw = SymJoint::new(copies, ancilla, coeffs)?;
    let lambda = 1.0 / raw.norm();
    let joint = raw.scaled(lambda);
    Ok(MachineOutput {
        density: joint.reduce_left(),
        lambda,
        machine: MachineKind::Unified,
        joint: Some(joint),
    })
}

/// `|φ⟩^{⊗N} ⊗ |Φ⁺⟩^{⊗(M−N)}` in the module's factor layout.
fn pair_input(spec: &CloneSpec, inputs: &FullState) -> Result<FullState> {
    let d = spec.d;
    let blanks = spec.blanks();
    check_cap(d, 2 * spec.m - spec.n)?;
    let pair = hilbert::maximally_entangled(d)?;
    let mut state = inputs.clone();
    for _ in 0..blanks {
        state = state.tensor(&pair)?;
    }
    // after the N inputs, pairs are interleaved (copy, ancilla)
    let perm: Vec<usize> = (0..spec.n)
        .chain((0..2 * blanks).map(|p| if p % 2 == 0 { spec.n + p / 2 } else { spec.m + p / 2 }))
        .collect();
    state.permute_factors(&perm)
}

/// Dense evaluation of the entangled-pair construction.
#[derive(Debug, Clone, PartialEq)]
pub struct UnifiedOracle {
    /// Normalized joint state, copies then ancillas.
    pub joint: FullState,
    pub lambda: f64,
    /// `M`-copy output.
    pub density: FullDensity,
}

pub fn unified_oracle(spec: &CloneSpec, phi: &PureState) -> Result<UnifiedOracle> {
    check_input(spec, phi)?;
    let raw = unified_oracle_unnormalized(spec, &phi.power(spec.n)?)?;
    let lambda = 1.0 / raw.norm();
    let joint = raw.scaled(C64::from(lambda));
    let density = joint.reduce_to_leading(spec.m)?;
    Ok(UnifiedOracle { joint, lambda, density })
}

/// `(s_M ⊗ I)` applied to `inputs ⊗ |Φ⁺⟩^{⊗(M−N)}` without normalization;
/// `inputs` is any `N`-factor state.
pub fn unified_oracle_unnormalized(spec: &CloneSpec, inputs: &FullState) -> Result<FullState> {
    if inputs.factors() != spec.n || inputs.local_dim() != spec.d {
        return Err(Error::DimensionMismatch { expected: spec.n, actual: inputs.factors() });
    }
    let state = pair_input(spec, inputs)?;
    let anc = spec.d.pow(spec.blanks() as u32);
    let op = projector_full(spec.d, spec.m)?.kronecker(&DMatrix::<C64>::identity(anc, anc));
    state.apply(&op)
}

/// `1 → 2` machine written on basis inputs as
/// `|l⟩ → |ll⟩|l⟩_a + ½ Σ_{j≠l} (|lj⟩ + |jl⟩)|j⟩_a`, extended linearly and
/// normalized. Factor order is (copy 1, copy 2, ancilla).
///
/// For `d = 2` this gives `|0⟩ → √(2/3)|00⟩|0⟩ + √(1/6)(|01⟩+|10⟩)|1⟩` and
/// `|1⟩ → √(2/3)|11⟩|1⟩ + √(1/6)(|01⟩+|10⟩)|0⟩`. The `|1⟩` line is sometimes
/// quoted with ancilla `|0⟩` on the first term; that is not covariant with
/// the `|0⟩` line and is not reproduced here.
pub fn explicit_1to2(d: usize, phi: &PureState) -> Result<FullState> {
    if phi.dim() != d {
        return Err(Error::DimensionMismatch { expected: d, actual: phi.dim() });
    }
    let mut amps = DVector::<C64>::zeros(d * d * d);
    let idx = |a: usize, b: usize, c: usize| (a * d + b) * d + c;
    for (l, &x) in phi.amplitudes().iter().enumerate() {
        amps[idx(l, l, l)] += x;
        for j in (0..d).filter(|&j| j != l) {
            amps[idx(l, j, j)] += x * 0.5;
            amps[idx(j, l, j)] += x * 0.5;
        }
    }
    FullState::new(amps, 3, d)?.normalized()
}

/// Weights for the asymmetric machines: one nonnegative weight per choice of
/// `N` output slots (sorted, 0-based) receiving the inputs.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AsymmetryWeights {
    inputs: usize,
    slots: usize,
    weights: BTreeMap<Vec<usize>, f64>,
}

fn subsets(slots: usize, size: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(size);
    fn rec(start: usize, slots: usize, size: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == size {
            out.push(cur.clone());
            return;
        }
        for s in start..slots {
            cur.push(s);
            rec(s + 1, slots, size, cur, out);
            cur.pop();
        }
    }
    rec(0, slots, size, &mut cur, &mut out);
    out
}

impl AsymmetryWeights {
    /// `α` on slot 0 (copy 1), `β` on slot 1 (copy 2).
    pub fn pair(alpha: f64, beta: f64) -> Result<Self> {
        Self::from_map(1, 2, BTreeMap::from([(vec![0], alpha), (vec![1], beta)]))
    }

    pub fn uniform(inputs: usize, slots: usize) -> Result<Self> {
        let map = subsets(slots, inputs).into_iter().map(|s| (s, 1.0)).collect();
        Self::from_map(inputs, slots, map)
    }

    /// Weight 1 on `chosen`, 0 elsewhere.
    pub fn single(inputs: usize, slots: usize, chosen: &[usize]) -> Result<Self> {
        let mut chosen = chosen.to_vec();
        chosen.sort_unstable();
        let map = subsets(slots, inputs)
            .into_iter()
            .map(|s| {
                let w = if s == chosen { 1.0 } else { 0.0 };
                (s, w)
            })
            .collect();
        Self::from_map(inputs, slots, map)
    }

    pub fn from_map(inputs: usize, slots: usize, weights: BTreeMap<Vec<usize>, f64>) -> Result<Self> {
        if inputs < 1 || slots < inputs {
            return invalid(format!("need 1 <= N <= M, got N = {inputs}, M = {slots}"));
        }
        let expected = subsets(slots, inputs);
        if weights.len() != expected.len() || expected.iter().any(|s| !weights.contains_key(s)) {
            return invalid(format!("weights must cover all {} slot subsets", expected.len()));
        }
        if weights.values().any(|w| !w.is_finite() || *w < 0.0) {
            return invalid("weights must be finite and nonnegative");
        }
        if weights.values().all(|w| *w == 0.0) {
            return invalid("weights must not all be zero");
        }
        Ok(Self { inputs, slots, weights })
    }

    pub fn get(&self, subset: &[usize]) -> f64 {
        self.weights.get(subset).copied().unwrap_or(0.0)
    }

    pub fn inputs(&self) -> usize {
        self.inputs
    }

    pub fn slots(&self) -> usize {
        self.slots
    }

    /// `(α, β)` for `1 → 2` weights.
    pub fn alpha_beta(&self) -> Option<(f64, f64)> {
        (self.inputs == 1 && self.slots == 2).then(|| (self.get(&[0]), self.get(&[1])))
    }

    /// Rescales `(α, β)` so that `α² + β² + 2αβ/d = 1`; returns the rescaled
    /// pair and the factor applied.
    pub fn normalized_pair(&self, d: usize) -> Result<(f64, f64, f64)> {
        let (a, b) = self
            .alpha_beta()
            .ok_or_else(|| Error::InvalidParameter("normalized_pair needs 1 -> 2 weights".into()))?;
        let norm_sq = a * a + b * b + 2.0 * a * b / d as f64;
        let scale = 1.0 / norm_sq.sqrt();
        Ok((a * scale, b * scale, scale))
    }
}

/// Result of the asymmetric `1 → 2` machine.
#[derive(Debug, Clone, PartialEq)]
pub struct AsymmetricOutput {
    /// Normalized weights actually used.
    pub alpha: f64,
    pub beta: f64,
    /// Factor applied to the caller's weights.
    pub normalization: f64,
    /// Joint state over (copy 1, copy 2, ancilla).
    pub joint: FullState,
    pub rho_1: FullDensity,
    pub rho_2: FullDensity,
    pub fidelity_a: f64,
    pub fidelity_b: f64,
}

/// `α|φ⟩_1|Φ⁺⟩_{2a} + β|φ⟩_2|Φ⁺⟩_{1a}`, normalized with the overlap
/// `⟨φ_1Φ⁺_{2a}|φ_2Φ⁺_{1a}⟩ = 1/d` taken into account.
pub fn asymmetric_1to2(d: usize, phi: &PureState, weights: &AsymmetryWeights) -> Result<AsymmetricOutput> {
    if phi.dim() != d {
        return Err(Error::DimensionMismatch { expected: d, actual: phi.dim() });
    }
    let (alpha, beta, normalization) = weights.normalized_pair(d)?;
    let first = phi.to_full().tensor(&hilbert::maximally_entangled(d)?)?;
    // built in order (2, 1, a), moved to (1, 2, a)
    let second = first.permute_factors(&[1, 0, 2])?;
    let joint = first.scaled(C64::from(alpha)).add(&second.scaled(C64::from(beta)))?;
    let rho = joint.density();
    let rho_1 = rho.partial_trace(&[0])?;
    let rho_2 = rho.partial_trace(&[1])?;
    let target = phi.to_full();
    Ok(AsymmetricOutput {
        alpha,
        beta,
        normalization,
        fidelity_a: hilbert::fidelity_pure(&rho_1, &target)?,
        fidelity_b: hilbert::fidelity_pure(&rho_2, &target)?,
        joint,
        rho_1,
        rho_2,
    })
}

/// Result of the weighted generalization of the symmetrizer.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedOutput {
    /// Normalized joint state, copies then ancillas.
    pub joint: FullState,
    /// `M`-copy output (not symmetric in general).
    pub density: FullDensity,
    pub lambda: f64,
    /// `⟨φ|ρ_i|φ⟩` for each output slot `i`.
    pub single_copy_fidelities: Vec<f64>,
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur: Vec<usize> = (0..n).collect();
    fn heap(k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if k <= 1 {
            out.push(cur.clone());
            return;
        }
        for i in 0..k {
            heap(k - 1, cur, out);
            let j = if k.is_multiple_of(2) { i } else { 0 };
            cur.swap(j, k - 1);
        }
    }
    heap(n, &mut cur, &mut out);
    out
}

/// Exploratory: replaces `s_M = (1/M!) Σ_π P_π` by `Σ_π w_{π({0..N})} P_π`,
/// so every permutation that routes the inputs into slot set `S` carries
/// weight `w_S`. Equal weights give back the symmetric machine; `1 → 2`
/// gives `α I + β SWAP`. No optimality is claimed for other weights.
///
/// Runs in the full `d^{2M−N}` space.
pub fn weighted_clone(spec: &CloneSpec, phi: &PureState, weights: &AsymmetryWeights) -> Result<WeightedOutput> {
    check_input(spec, phi)?;
    if weights.inputs != spec.n || weights.slots != spec.m {
        return invalid(format!(
            "weights are for {} -> {}, spec is {} -> {}",
            weights.inputs, weights.slots, spec.n, spec.m
        ));
    }
    let base = pair_input(spec, &phi.power(spec.n)?)?;
    let total = 2 * spec.m - spec.n;
    let mut acc = base.scaled(C64::from(0.0));
    for perm in permutations(spec.m) {
        let mut slots: Vec<usize> = perm[..spec.n].to_vec();
        slots.sort_unstable();
        let w = weights.get(&slots);
        if w == 0.0 {
            continue;
        }
        let full_perm: Vec<usize> = perm.iter().copied().chain(spec.m..total).collect();
        acc = acc.add(&base.permute_factors(&full_perm)?.scaled(C64::from(w)))?;
    }
    let lambda = 1.0 / acc.norm();
    let joint = acc.scaled(C64::from(lambda));
    let density = joint.reduce_to_leading(spec.m)?;
    let target = phi.to_full();
    let single_copy_fidelities = (0..spec.m)
        .map(|i| hilbert::fidelity_pure(&density.partial_trace(&[i])?, &target))
        .collect::<Result<Vec<_>>>()?;
    Ok(WeightedOutput { joint, density, lambda, single_copy_fidelities })
}
