//! Dense linear algebra over full tensor-product spaces.
//!
//! This is the brute-force substrate every fast path is checked against.
//! Factor ordering is global: in a composite of `n` factors the leftmost
//! factor is the most significant digit of the basis index, so
//! `|a⟩ ⊗ |b⟩` lives at index `a·d + b`.
//!
//! All oracle computations are capped at [`ORACLE_CAP`] amplitudes.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{invalid, Error, Result};

pub type C64 = Complex<f64>;

/// Largest number of amplitudes (`d^factors`) the oracle will build.
pub const ORACLE_CAP: usize = 4096;

pub const NORM_TOL: f64 = 1e-12;
pub const DENSITY_TOL: f64 = 1e-10;

/// Returns `d^factors`, failing if it exceeds [`ORACLE_CAP`].
pub fn check_cap(d: usize, factors: usize) -> Result<usize> {
    let requested = (d as u128).checked_pow(factors as u32).unwrap_or(u128::MAX);
    if requested > ORACLE_CAP as u128 {
        return Err(Error::OracleCapExceeded { requested, cap: ORACLE_CAP });
    }
    Ok(requested as usize)
}

/// Whether a `d^factors` space fits under the oracle cap.
pub fn within_cap(d: usize, factors: usize) -> bool {
    check_cap(d, factors).is_ok()
}

/// Base-`d` digits of `index`, most significant first.
pub(crate) fn digits(mut index: usize, d: usize, n: usize) -> Vec<usize> {
    let mut out = vec![0; n];
    for slot in out.iter_mut().rev() {
        *slot = index % d;
        index /= d;
    }
    out
}

pub(crate) fn from_digits(digits: &[usize], d: usize) -> usize {
    digits.iter().fold(0, |acc, &x| acc * d + x)
}

pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Single-qudit pure state `Σ_j x_j |j⟩`.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    amplitudes: DVector<C64>,
}

impl PureState {
    /// Wraps amplitudes that must already be normalized within `1e-12`.
    pub fn new(amplitudes: Vec<C64>) -> Result<Self> {
        if amplitudes.len() < 2 {
            return invalid(format!("qudit dimension must be >= 2, got {}", amplitudes.len()));
        }
        let v = DVector::from_vec(amplitudes);
        let norm = v.norm();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::NotNormalized(norm));
        }
        Ok(Self { amplitudes: v })
    }

    /// Normalizes arbitrary nonzero amplitudes.
    pub fn normalized(amplitudes: Vec<C64>) -> Result<Self> {
        let v = DVector::from_vec(amplitudes);
        let norm = v.norm();
        if norm == 0.0 || !norm.is_finite() {
            return invalid("cannot normalize a zero vector");
        }
        Self::new((v / C64::from(norm)).data.into())
    }

    pub fn basis(d: usize, level: usize) -> Result<Self> {
        if level >= d {
            return invalid(format!("level {level} out of range for d = {d}"));
        }
        let mut amps = vec![C64::from(0.0); d];
        amps[level] = C64::from(1.0);
        Self::new(amps)
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &DVector<C64> {
        &self.amplitudes
    }

    /// `u|φ⟩`; `u` must be unitary for the result to stay normalized.
    pub fn apply(&self, u: &DMatrix<C64>) -> Result<Self> {
        if u.nrows() != self.dim() || u.ncols() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), actual: u.nrows() });
        }
        Self::normalized((u * &self.amplitudes).data.into())
    }

    pub fn to_full(&self) -> FullState {
        FullState { amplitudes: self.amplitudes.clone(), factors: 1, local_dim: self.dim() }
    }

    /// Literal `n`-fold tensor power `|φ⟩^{⊗n}`.
    pub fn power(&self, n: usize) -> Result<FullState> {
        check_cap(self.dim(), n)?;
        let mut out = FullState::vacuum(self.dim());
        for _ in 0..n {
            out = out.tensor(&self.to_full())?;
        }
        Ok(out)
    }
}

/// State vector over `local_dim^factors` computational product states.
#[derive(Debug, Clone, PartialEq)]
pub struct FullState {
    amplitudes: DVector<C64>,
    factors: usize,
    local_dim: usize,
}

impl FullState {
    pub fn new(amplitudes: DVector<C64>, factors: usize, local_dim: usize) -> Result<Self> {
        let expected = check_cap(local_dim, factors)?;
        if amplitudes.len() != expected {
            return Err(Error::DimensionMismatch { expected, actual: amplitudes.len() });
        }
        Ok(Self { amplitudes, factors, local_dim })
    }

    /// The zero-factor state, the unit for [`FullState::tensor`].
    pub fn vacuum(local_dim: usize) -> Self {
        Self { amplitudes: DVector::from_element(1, C64::from(1.0)), factors: 0, local_dim }
    }

    /// Product basis state `|levels[0] levels[1] …⟩`.
    pub fn basis(local_dim: usize, levels: &[usize]) -> Result<Self> {
        if levels.iter().any(|&l| l >= local_dim) {
            return invalid(format!("basis label out of range for d = {local_dim}"));
        }
        let dim = check_cap(local_dim, levels.len())?;
        let mut amps = DVector::zeros(dim);
        amps[from_digits(levels, local_dim)] = C64::from(1.0);
        Ok(Self { amplitudes: amps, factors: levels.len(), local_dim })
    }

    pub fn amplitudes(&self) -> &DVector<C64> {
        &self.amplitudes
    }

    pub fn factors(&self) -> usize {
        self.factors
    }

    pub fn local_dim(&self) -> usize {
        self.local_dim
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.norm()
    }

    pub fn normalized(&self) -> Result<Self> {
        let n = self.norm();
        if n == 0.0 {
            return invalid("cannot normalize a zero vector");
        }
        Ok(self.scaled(C64::from(1.0 / n)))
    }

    pub fn scaled(&self, factor: C64) -> Self {
        Self { amplitudes: &self.amplitudes * factor, ..self.clone() }
    }

    fn check_compatible(&self, other: &Self) -> Result<()> {
        if self.local_dim != other.local_dim || self.factors != other.factors {
            return Err(Error::DimensionMismatch {
                expected: self.amplitudes.len(),
                actual: other.amplitudes.len(),
            });
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        Ok(Self { amplitudes: &self.amplitudes + &other.amplitudes, ..self.clone() })
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &Self) -> Result<C64> {
        self.check_compatible(other)?;
        Ok(self.amplitudes.dotc(&other.amplitudes))
    }

    /// Kronecker product; `self` occupies the more significant factors.
    pub fn tensor(&self, other: &Self) -> Result<Self> {
        if self.local_dim != other.local_dim {
            return Err(Error::DimensionMismatch { expected: self.local_dim, actual: other.local_dim });
        }
        check_cap(self.local_dim, self.factors + other.factors)?;
        Ok(Self {
            amplitudes: self.amplitudes.kronecker(&other.amplitudes),
            factors: self.factors + other.factors,
            local_dim: self.local_dim,
        })
    }

    /// Moves factor `i` to position `perm[i]`.
    pub fn permute_factors(&self, perm: &[usize]) -> Result<Self> {
        check_permutation(perm, self.factors)?;
        let d = self.local_dim;
        let mut out = DVector::zeros(self.amplitudes.len());
        let mut moved = vec![0; self.factors];
        for (i, amp) in self.amplitudes.iter().enumerate() {
            let dig = digits(i, d, self.factors);
            for (old, &new) in perm.iter().enumerate() {
                moved[new] = dig[old];
            }
            out[from_digits(&moved, d)] = *amp;
        }
        Ok(Self { amplitudes: out, ..self.clone() })
    }

    /// Applies an operator on the whole space.
    pub fn apply(&self, op: &DMatrix<C64>) -> Result<Self> {
        if op.ncols() != self.amplitudes.len() || op.nrows() != self.amplitudes.len() {
            return Err(Error::DimensionMismatch { expected: self.amplitudes.len(), actual: op.ncols() });
        }
        Ok(Self { amplitudes: op * &self.amplitudes, ..self.clone() })
    }

    pub fn density(&self) -> FullDensity {
        FullDensity {
            matrix: &self.amplitudes * self.amplitudes.adjoint(),
            factors: self.factors,
            local_dim: self.local_dim,
        }
    }

    /// Reduced density on the first `kept` factors, computed directly from
    /// the amplitudes without forming the joint density.
    pub fn reduce_to_leading(&self, kept: usize) -> Result<FullDensity> {
        if kept > self.factors {
            return invalid(format!("cannot keep {kept} of {} factors", self.factors));
        }
        let rows = self.local_dim.pow(kept as u32);
        let cols = self.amplitudes.len() / rows;
        // row-major reshape: index = row * cols + col
        let psi = DMatrix::from_fn(rows, cols, |r, c| self.amplitudes[r * cols + c]);
        Ok(FullDensity { matrix: &psi * psi.adjoint(), factors: kept, local_dim: self.local_dim })
    }

    /// Phase-insensitive distance `min_θ ‖self − e^{iθ} other‖`.
    pub fn phase_distance(&self, other: &Self) -> Result<f64> {
        let ov = self.inner(other)?;
        let phase = if ov.norm() > 0.0 { ov.conj() / ov.norm() } else { C64::from(1.0) };
        Ok((&self.amplitudes - &other.amplitudes * phase).norm())
    }
}

fn check_permutation(perm: &[usize], n: usize) -> Result<()> {
    let mut seen = vec![false; n];
    if perm.len() != n {
        return invalid(format!("permutation has length {}, expected {n}", perm.len()));
    }
    for &p in perm {
        if p >= n || seen[p] {
            return invalid(format!("{perm:?} is not a permutation of 0..{n}"));
        }
        seen[p] = true;
    }
    Ok(())
}

/// Density operator on `local_dim^factors` dimensions.
#[derive(Debug, Clone, PartialEq)]
pub struct FullDensity {
    matrix: DMatrix<C64>,
    factors: usize,
    local_dim: usize,
}

impl FullDensity {
    /// Wraps a matrix, checking its shape only. Call [`FullDensity::validate`]
    /// to check the density invariants.
    pub fn new(matrix: DMatrix<C64>, factors: usize, local_dim: usize) -> Result<Self> {
        let expected = check_cap(local_dim, factors)?;
        if matrix.nrows() != expected || matrix.ncols() != expected {
            return Err(Error::DimensionMismatch { expected, actual: matrix.nrows() });
        }
        Ok(Self { matrix, factors, local_dim })
    }

    pub fn maximally_mixed(local_dim: usize, factors: usize) -> Result<Self> {
        let dim = check_cap(local_dim, factors)?;
        Ok(Self {
            matrix: DMatrix::identity(dim, dim) / C64::from(dim as f64),
            factors,
            local_dim,
        })
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    pub fn into_matrix(self) -> DMatrix<C64> {
        self.matrix
    }

    pub fn factors(&self) -> usize {
        self.factors
    }

    pub fn local_dim(&self) -> usize {
        self.local_dim
    }

    pub fn trace(&self) -> C64 {
        self.matrix.trace()
    }

    /// Checks Hermiticity, unit trace and positivity within the density tolerances.
    pub fn validate(&self) -> Result<()> {
        validate_density_matrix(&self.matrix)
    }

    pub fn tensor(&self, other: &Self) -> Result<Self> {
        if self.local_dim != other.local_dim {
            return Err(Error::DimensionMismatch { expected: self.local_dim, actual: other.local_dim });
        }
        check_cap(self.local_dim, self.factors + other.factors)?;
        Ok(Self {
            matrix: self.matrix.kronecker(&other.matrix),
            factors: self.factors + other.factors,
            local_dim: self.local_dim,
        })
    }

    /// Reduced density on the factors listed in `keep`, which come out in
    /// increasing position order.
    pub fn partial_trace(&self, keep: &[usize]) -> Result<Self> {
        if keep.is_empty() {
            return invalid("partial trace needs at least one kept factor");
        }
        let mut keep = keep.to_vec();
        keep.sort_unstable();
        keep.dedup();
        if keep.iter().any(|&k| k >= self.factors) {
            return invalid(format!("kept factor out of range for {} factors", self.factors));
        }
        let d = self.local_dim;
        let traced: Vec<usize> = (0..self.factors).filter(|f| !keep.contains(f)).collect();
        let kept_dim = d.pow(keep.len() as u32);
        let traced_dim = d.pow(traced.len() as u32);

        // full[k * traced_dim + t] = full-space index of kept digits k and traced digits t
        let mut full = vec![0usize; kept_dim * traced_dim];
        let mut dig = vec![0usize; self.factors];
        for k in 0..kept_dim {
            let kd = digits(k, d, keep.len());
            for t in 0..traced_dim {
                let td = digits(t, d, traced.len());
                for (pos, &f) in keep.iter().enumerate() {
                    dig[f] = kd[pos];
                }
                for (pos, &f) in traced.iter().enumerate() {
                    dig[f] = td[pos];
                }
                full[k * traced_dim + t] = from_digits(&dig, d);
            }
        }
        let out = DMatrix::from_fn(kept_dim, kept_dim, |r, c| {
            (0..traced_dim)
                .map(|t| self.matrix[(full[r * traced_dim + t], full[c * traced_dim + t])])
                .sum::<C64>()
        });
        Ok(Self { matrix: out, factors: keep.len(), local_dim: d })
    }

    /// Conjugation `op · ρ · op†`.
    pub fn conjugate_by(&self, op: &DMatrix<C64>) -> Result<Self> {
        if op.ncols() != self.matrix.nrows() || op.nrows() != self.matrix.nrows() {
            return Err(Error::DimensionMismatch { expected: self.matrix.nrows(), actual: op.ncols() });
        }
        Ok(Self { matrix: op * &self.matrix * op.adjoint(), ..self.clone() })
    }
}

pub(crate) fn validate_density_matrix(m: &DMatrix<C64>) -> Result<()> {
    let herm = (m - m.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max);
    if herm > DENSITY_TOL {
        return Err(Error::InvalidDensity(format!("Hermiticity violation {herm:e}")));
    }
    let tr = m.trace();
    if (tr - C64::from(1.0)).norm() > DENSITY_TOL {
        return Err(Error::InvalidDensity(format!("trace {tr}")));
    }
    let min_eig = m.clone().symmetric_eigenvalues().min();
    if min_eig < -DENSITY_TOL {
        return Err(Error::InvalidDensity(format!("negative eigenvalue {min_eig:e}")));
    }
    Ok(())
}

/// `(1/√d) Σ_j |jj⟩`.
pub fn maximally_entangled(d: usize) -> Result<FullState> {
    if d < 2 {
        return invalid(format!("local dimension must be >= 2, got {d}"));
    }
    let mut amps = DVector::zeros(d * d);
    let a = C64::from(1.0 / (d as f64).sqrt());
    for j in 0..d {
        amps[j * d + j] = a;
    }
    FullState::new(amps, 2, d)
}

/// `⟨ψ|ρ|ψ⟩`.
pub fn fidelity_pure(rho: &FullDensity, psi: &FullState) -> Result<f64> {
    if rho.matrix.nrows() != psi.amplitudes.len() {
        return Err(Error::DimensionMismatch { expected: rho.matrix.nrows(), actual: psi.amplitudes.len() });
    }
    Ok(psi.amplitudes.dotc(&(&rho.matrix * &psi.amplitudes)).re)
}

/// `½ Σ σ_i(a − b)` over singular values.
pub fn trace_distance(a: &FullDensity, b: &FullDensity) -> Result<f64> {
    if a.matrix.shape() != b.matrix.shape() {
        return Err(Error::DimensionMismatch { expected: a.matrix.nrows(), actual: b.matrix.nrows() });
    }
    Ok(trace_distance_matrices(&a.matrix, &b.matrix))
}

pub(crate) fn trace_distance_matrices(a: &DMatrix<C64>, b: &DMatrix<C64>) -> f64 {
    0.5 * (a - b).singular_values().sum()
}

/// Haar-random unitary from the QR decomposition of a complex Ginibre
/// matrix, with the diagonal phases of `R` folded back into `Q`.
pub fn random_unitary<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Result<DMatrix<C64>> {
    if d < 2 {
        return invalid(format!("local dimension must be >= 2, got {d}"));
    }
    let scale = std::f64::consts::FRAC_1_SQRT_2;
    let z = DMatrix::from_fn(d, d, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        C64::new(re * scale, im * scale)
    });
    let qr = z.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..d {
        let rjj = r[(j, j)];
        let phase = if rjj.norm() > 0.0 { rjj / rjj.norm() } else { C64::from(1.0) };
        for i in 0..d {
            q[(i, j)] *= phase;
        }
    }
    Ok(q)
}

/// Haar-random pure state: first column of [`random_unitary`].
pub fn random_pure_state<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Result<PureState> {
    let u = random_unitary(d, rng)?;
    PureState::normalized(u.column(0).iter().copied().collect())
}

/// `u^{⊗n}` as a dense `d^n × d^n` matrix.
pub fn tensor_power_operator(u: &DMatrix<C64>, n: usize) -> Result<DMatrix<C64>> {
    check_cap(u.nrows(), n)?;
    let mut out = DMatrix::identity(1, 1);
    for _ in 0..n {
        out = out.kronecker(u);
    }
    Ok(out)
}

/// Generalized Pauli `U_{jl}` with `⟨a|U_{jl}|b⟩ = ω^{l b} δ_{a, b + j mod d}`,
/// `ω = e^{2πi/d}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GeneralizedPauli {
    d: usize,
    shift: usize,
    phase: usize,
}

impl GeneralizedPauli {
    pub fn new(d: usize, shift: usize, phase: usize) -> Result<Self> {
        if d < 2 || shift >= d || phase >= d {
            return invalid(format!("invalid generalized Pauli (d={d}, j={shift}, l={phase})"));
        }
        Ok(Self { d, shift, phase })
    }

    pub fn all(d: usize) -> Result<Vec<Self>> {
        let mut out = Vec::with_capacity(d * d);
        for j in 0..d {
            for l in 0..d {
                out.push(Self::new(d, j, l)?);
            }
        }
        Ok(out)
    }

    pub fn matrix(&self) -> DMatrix<C64> {
        let d = self.d;
        let omega = 2.0 * std::f64::consts::PI / d as f64;
        let mut m = DMatrix::zeros(d, d);
        for b in 0..d {
            let a = (b + self.shift) % d;
            m[(a, b)] = C64::from_polar(1.0, omega * ((self.phase * b) % d) as f64);
        }
        m
    }

    /// `(U_{jl} ⊗ I)|Φ⁺⟩`.
    pub fn bell_state(&self) -> Result<FullState> {
        let phi = maximally_entangled(self.d)?;
        let op = self.matrix().kronecker(&DMatrix::<C64>::identity(self.d, self.d));
        phi.apply(&op)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> C64 {
        C64::from(re)
    }

    #[test]
    fn cap_rule() {
        assert_eq!(check_cap(2, 12).unwrap(), 4096);
        assert!(check_cap(2, 13).is_err());
        assert!(check_cap(3, 8).is_err());
        assert!(check_cap(64, 3).is_err());
    }

    #[test]
    fn max_entangled_amplitudes() {
        let s = maximally_entangled(2).unwrap();
        let h = 0.5f64.sqrt();
        let expect = DVector::from_vec(vec![c(h), c(0.0), c(0.0), c(h)]);
        assert!((s.amplitudes() - expect).norm() < 1e-15);
        let s = maximally_entangled(3).unwrap();
        for (i, a) in s.amplitudes().iter().enumerate() {
            let expect = if i % 4 == 0 { 1.0 / 3f64.sqrt() } else { 0.0 };
            assert!((a - c(expect)).norm() < 1e-15);
        }
        assert!(maximally_entangled(1).is_err());
    }

    #[test]
    fn max_entangled_halves_are_mixed() {
        for d in 2..=4 {
            let rho = maximally_entangled(d).unwrap().density();
            let mixed = FullDensity::maximally_mixed(d, 1).unwrap();
            for keep in [0, 1] {
                let r = rho.partial_trace(&[keep]).unwrap();
                assert!(trace_distance(&r, &mixed).unwrap() < 1e-12);
            }
        }
    }

    #[test]
    fn tensor_basics() {
        let a = FullState::basis(2, &[0]).unwrap();
        let b = FullState::basis(2, &[1]).unwrap();
        assert_eq!(a.tensor(&b).unwrap(), FullState::basis(2, &[0, 1]).unwrap());

        let mut rng = seeded_rng(1);
        let p = random_pure_state(3, &mut rng).unwrap().to_full();
        let q = random_pure_state(3, &mut rng).unwrap().to_full();
        assert!((p.tensor(&q).unwrap().norm() - 1.0).abs() < 1e-12);

        let m = FullDensity::maximally_mixed(3, 1).unwrap();
        let mm = m.tensor(&m).unwrap();
        assert!(trace_distance(&mm, &FullDensity::maximally_mixed(3, 2).unwrap()).unwrap() < 1e-15);
        assert!(a.tensor(&FullState::basis(3, &[0]).unwrap()).is_err());
    }

    #[test]
    fn partial_trace_of_product() {
        let mut rng = seeded_rng(2);
        let a = random_pure_state(2, &mut rng).unwrap().to_full().density();
        let b = random_pure_state(2, &mut rng).unwrap().power(2).unwrap().density();
        let ab = a.tensor(&b).unwrap();
        let r = ab.partial_trace(&[0]).unwrap();
        assert!(trace_distance(&r, &a).unwrap() < 1e-12);
        let r = ab.partial_trace(&[1, 2]).unwrap();
        assert!(trace_distance(&r, &b).unwrap() < 1e-12);
    }

    #[test]
    fn partial_trace_errors() {
        let r = FullDensity::maximally_mixed(2, 2).unwrap();
        assert!(r.partial_trace(&[]).is_err());
        assert!(r.partial_trace(&[2]).is_err());
    }

    #[test]
    fn partial_trace_composes_and_preserves_trace() {
        let mut rng = seeded_rng(3);
        let u = random_unitary(8, &mut rng).unwrap();
        let diag = DMatrix::from_diagonal(&DVector::from_vec(vec![
            c(0.3), c(0.2), c(0.1), c(0.1), c(0.1), c(0.1), c(0.05), c(0.05),
        ]));
        let rho = FullDensity::new(&u * diag * u.adjoint(), 3, 2).unwrap();
        rho.validate().unwrap();
        let together = rho.partial_trace(&[1]).unwrap();
        let stepwise = rho.partial_trace(&[0, 1]).unwrap().partial_trace(&[1]).unwrap();
        assert!(trace_distance(&together, &stepwise).unwrap() < 1e-12);
        for keep in [vec![0], vec![2], vec![0, 2]] {
            let t = rho.partial_trace(&keep).unwrap().trace();
            assert!((t - c(1.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn reduce_to_leading_matches_partial_trace() {
        let mut rng = seeded_rng(4);
        let phi = random_pure_state(2, &mut rng).unwrap();
        let s = phi.power(2).unwrap().tensor(&maximally_entangled(2).unwrap()).unwrap();
        let a = s.reduce_to_leading(3).unwrap();
        let b = s.density().partial_trace(&[0, 1, 2]).unwrap();
        assert!(trace_distance(&a, &b).unwrap() < 1e-12);
    }

    #[test]
    fn fidelity_pure_values() {
        let mut rng = seeded_rng(5);
        let psi = random_pure_state(3, &mut rng).unwrap().power(2).unwrap();
        assert!((fidelity_pure(&psi.density(), &psi).unwrap() - 1.0).abs() < 1e-12);
        let mixed = FullDensity::maximally_mixed(3, 2).unwrap();
        assert!((fidelity_pure(&mixed, &psi).unwrap() - 1.0 / 9.0).abs() < 1e-12);
        let a = FullState::basis(2, &[0]).unwrap();
        let b = FullState::basis(2, &[1]).unwrap();
        assert!(fidelity_pure(&b.density(), &a).unwrap().abs() < 1e-15);
    }

    #[test]
    fn trace_distance_metric() {
        let a = FullState::basis(2, &[0]).unwrap().density();
        let b = FullState::basis(2, &[1]).unwrap().density();
        assert!(trace_distance(&a, &a).unwrap() < 1e-15);
        assert!((trace_distance(&a, &b).unwrap() - 1.0).abs() < 1e-12);
        let mut rng = seeded_rng(6);
        for _ in 0..10 {
            let s: Vec<_> = (0..3)
                .map(|_| random_pure_state(3, &mut rng).unwrap().to_full().density())
                .collect();
            let ab = trace_distance(&s[0], &s[1]).unwrap();
            let bc = trace_distance(&s[1], &s[2]).unwrap();
            let ac = trace_distance(&s[0], &s[2]).unwrap();
            assert!(ac <= ab + bc + 1e-12);
            assert!((ab - trace_distance(&s[1], &s[0]).unwrap()).abs() < 1e-12);
        }
    }

    #[test]
    fn random_objects_are_valid_and_deterministic() {
        for d in 2..=5 {
            let u = random_unitary(d, &mut seeded_rng(9)).unwrap();
            let err = (u.adjoint() * &u - DMatrix::<C64>::identity(d, d)).norm();
            assert!(err < 1e-10);
            assert_eq!(u, random_unitary(d, &mut seeded_rng(9)).unwrap());
            let s = random_pure_state(d, &mut seeded_rng(10)).unwrap();
            assert!((s.amplitudes().norm() - 1.0).abs() < 1e-12);
            assert_eq!(s, random_pure_state(d, &mut seeded_rng(10)).unwrap());
        }
    }

    #[test]
    fn pure_state_validation() {
        assert!(PureState::new(vec![c(1.0), c(1.0)]).is_err());
        assert!(PureState::new(vec![c(1.0)]).is_err());
        assert!(PureState::normalized(vec![c(0.0), c(0.0)]).is_err());
        assert!(PureState::basis(2, 2).is_err());
    }

    #[test]
    fn permute_factors_moves_labels() {
        let s = FullState::basis(3, &[0, 1, 2]).unwrap();
        let p = s.permute_factors(&[2, 0, 1]).unwrap();
        assert_eq!(p, FullState::basis(3, &[1, 2, 0]).unwrap());
        assert!(s.permute_factors(&[0, 0, 1]).is_err());
    }

    #[test]
    fn pauli_unitary_and_bell_basis_orthonormal() {
        for d in 2..=4 {
            let all = GeneralizedPauli::all(d).unwrap();
            for p in &all {
                let m = p.matrix();
                assert!((m.adjoint() * &m - DMatrix::<C64>::identity(d, d)).norm() < 1e-12);
            }
            let bells: Vec<_> = all.iter().map(|p| p.bell_state().unwrap()).collect();
            for (i, a) in bells.iter().enumerate() {
                for (j, b) in bells.iter().enumerate() {
                    let ov = a.inner(b).unwrap();
                    let expect = if i == j { 1.0 } else { 0.0 };
                    assert!((ov - c(expect)).norm() < 1e-12);
                }
            }
            assert_eq!(bells[0], maximally_entangled(d).unwrap());
        }
    }

    /// `|φ⟩_2 |Φ⁺⟩_{1a} = (1/d) Σ_{jl} (U_{jl}†|φ⟩)_1 |Φ_{jl}⟩_{2a}` with factor
    /// order (1, 2, a). The adjoint is required with `|Φ_{jl}⟩ = (U_{jl} ⊗ I)|Φ⁺⟩`.
    #[test]
    fn pauli_teleportation_resolution() {
        let mut rng = seeded_rng(11);
        for d in 2..=4 {
            for _ in 0..10 {
                let phi = random_pure_state(d, &mut rng).unwrap();
                // φ on factor 1 (order 2,1,a) then move to order (1,2,a)
                let lhs = phi
                    .to_full()
                    .tensor(&maximally_entangled(d).unwrap())
                    .unwrap()
                    .permute_factors(&[1, 0, 2])
                    .unwrap();
                let mut rhs = FullState::new(DVector::zeros(d * d * d), 3, d).unwrap();
                for p in GeneralizedPauli::all(d).unwrap() {
                    let term = phi.apply(&p.matrix().adjoint()).unwrap().to_full().tensor(&p.bell_state().unwrap()).unwrap();
                    rhs = rhs.add(&term).unwrap();
                }
                let rhs = rhs.scaled(c(1.0 / d as f64));
                assert!((lhs.amplitudes() - rhs.amplitudes()).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn phase_distance_ignores_global_phase() {
        let mut rng = seeded_rng(31);
        let a = random_pure_state(3, &mut rng).unwrap().power(2).unwrap();
        let b = random_pure_state(3, &mut rng).unwrap().power(2).unwrap();
        let rotated = a.scaled(C64::from_polar(1.0, 2.3));
        assert!(a.phase_distance(&rotated).unwrap() < 1e-14);
        assert!(rotated.phase_distance(&a).unwrap() < 1e-14);
        let direct = (a.amplitudes() - rotated.amplitudes()).norm();
        assert!(direct > 1.0);
        let d = a.phase_distance(&b).unwrap();
        let overlap = a.inner(&b).unwrap().norm();
        assert!((d - (2.0 - 2.0 * overlap).sqrt()).abs() < 1e-12);
    }
}
