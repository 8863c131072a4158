//! Occupation-number representation of the symmetric subspace.
//!
//! A basis state `|m⃗⟩` is the normalized, permutation-invariant superposition
//! of all product strings in which level `j` (0-based, i.e. computational
//! state `|j⟩`) appears `m_j` times. Matrices and vectors here are indexed by
//! the canonical order of [`enumerate_occupations`]. The full tensor space is
//! only touched by the `embed`/`to_full` family, which exists for
//! verification and respects the oracle cap.

use std::collections::{BTreeMap, HashMap};
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use num_traits::ToPrimitive;

use crate::combinatorics::{enumerate_occupations, splitting_coefficient, OccupationVector};
use crate::error::{invalid, Error, Result};
use crate::hilbert::{self, check_cap, FullDensity, FullState, PureState, C64};

/// Canonically ordered occupation basis of `H_+^{⊗total}` for `d` levels.
#[derive(Debug, Clone, PartialEq)]
pub struct SymBasis {
    d: usize,
    total: usize,
    vectors: Vec<OccupationVector>,
    index: HashMap<OccupationVector, usize>,
}

impl SymBasis {
    pub fn new(d: usize, total: usize) -> Result<Arc<Self>> {
        let vectors = enumerate_occupations(d, total)?;
        let index = vectors.iter().cloned().enumerate().map(|(i, v)| (v, i)).collect();
        Ok(Arc::new(Self { d, total, vectors, index }))
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn total(&self) -> usize {
        self.total
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn vectors(&self) -> &[OccupationVector] {
        &self.vectors
    }

    pub fn index_of(&self, m: &OccupationVector) -> Option<usize> {
        self.index.get(m).copied()
    }

    /// Columns are `embed(m⃗)` in canonical order: a `d^total × d[total]`
    /// isometry from the occupation basis into the full space.
    pub fn isometry(&self) -> Result<DMatrix<C64>> {
        let dim = check_cap(self.d, self.total)?;
        let mut v = DMatrix::zeros(dim, self.len());
        for i in 0..dim {
            let occ = occupation_of(i, self.d, self.total);
            let col = self.index[&occ];
            v[(i, col)] = C64::from(1.0);
        }
        for (col, m) in self.vectors.iter().enumerate() {
            let w = 1.0 / m.multinomial().to_f64().unwrap_or(f64::INFINITY).sqrt();
            v.column_mut(col).scale_mut(w);
        }
        Ok(v)
    }
}

fn occupation_of(index: usize, d: usize, factors: usize) -> OccupationVector {
    let mut counts = vec![0; d];
    for digit in hilbert::digits(index, d, factors) {
        counts[digit] += 1;
    }
    OccupationVector::new(counts).expect("d >= 2")
}

/// Normalized permutation-invariant state with occupations `m`.
pub fn embed(m: &OccupationVector) -> Result<FullState> {
    let d = m.dim();
    let total = m.total();
    let dim = check_cap(d, total)?;
    let w = C64::from(1.0 / m.multinomial().to_f64().unwrap_or(f64::INFINITY).sqrt());
    let amps = DVector::from_fn(dim, |i, _| {
        if occupation_of(i, d, total) == *m {
            w
        } else {
            C64::from(0.0)
        }
    });
    FullState::new(amps, total, d)
}

/// Symmetric projector `s_M = Σ_m |m⃗⟩⟨m⃗|` on the full `d^M` space.
pub fn projector_full(d: usize, total: usize) -> Result<DMatrix<C64>> {
    let v = SymBasis::new(d, total)?.isometry()?;
    Ok(&v * v.adjoint())
}

/// Coefficient vector over a [`SymBasis`].
#[derive(Debug, Clone, PartialEq)]
pub struct SymVector {
    basis: Arc<SymBasis>,
    amplitudes: DVector<C64>,
}

impl SymVector {
    pub fn new(basis: Arc<SymBasis>, amplitudes: DVector<C64>) -> Result<Self> {
        if amplitudes.len() != basis.len() {
            return Err(Error::DimensionMismatch { expected: basis.len(), actual: amplitudes.len() });
        }
        Ok(Self { basis, amplitudes })
    }

    pub fn basis(&self) -> &Arc<SymBasis> {
        &self.basis
    }

    pub fn amplitudes(&self) -> &DVector<C64> {
        &self.amplitudes
    }

    pub fn amplitude(&self, m: &OccupationVector) -> Option<C64> {
        self.basis.index_of(m).map(|i| self.amplitudes[i])
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.norm()
    }

    pub fn density(&self) -> SymDensity {
        SymDensity {
            basis: self.basis.clone(),
            matrix: &self.amplitudes * self.amplitudes.adjoint(),
        }
    }

    pub fn to_full(&self) -> Result<FullState> {
        let v = self.basis.isometry()?;
        FullState::new(v * &self.amplitudes, self.basis.total, self.basis.d)
    }
}

/// `|φ⟩^{⊗n}` in the occupation basis: the amplitude on `|n⃗⟩` is
/// `√(n!) ∏_j x_j^{n_j} / √(n_j!)`.
pub fn expand_power(phi: &PureState, n: usize) -> Result<SymVector> {
    let basis = SymBasis::new(phi.dim(), n)?;
    let x = phi.amplitudes();
    let amps = DVector::from_iterator(
        basis.len(),
        basis.vectors().iter().map(|occ| {
            let weight = occ.multinomial().to_f64().unwrap_or(f64::INFINITY).sqrt();
            occ.counts()
                .iter()
                .zip(x.iter())
                .fold(C64::from(weight), |acc, (&nj, xj)| acc * xj.powu(nj as u32))
        }),
    );
    SymVector::new(basis, amps)
}

/// Density matrix in the occupation basis.
#[derive(Debug, Clone, PartialEq)]
pub struct SymDensity {
    basis: Arc<SymBasis>,
    matrix: DMatrix<C64>,
}

impl SymDensity {
    pub fn new(basis: Arc<SymBasis>, matrix: DMatrix<C64>) -> Result<Self> {
        if matrix.nrows() != basis.len() || matrix.ncols() != basis.len() {
            return Err(Error::DimensionMismatch { expected: basis.len(), actual: matrix.nrows() });
        }
        Ok(Self { basis, matrix })
    }

    pub fn basis(&self) -> &Arc<SymBasis> {
        &self.basis
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    pub fn trace(&self) -> C64 {
        self.matrix.trace()
    }

    pub fn validate(&self) -> Result<()> {
        hilbert::validate_density_matrix(&self.matrix)
    }

    /// Embeds into the full `d^M` space (oracle cap applies).
    pub fn to_full(&self) -> Result<FullDensity> {
        let v = self.basis.isometry()?;
        FullDensity::new(&v * &self.matrix * v.adjoint(), self.basis.total, self.basis.d)
    }

    /// Trace distance computed in the occupation basis; the embedding is an
    /// isometry so this equals the full-space value.
    pub fn trace_distance(&self, other: &Self) -> Result<f64> {
        if self.basis != other.basis {
            return Err(Error::DimensionMismatch { expected: self.basis.len(), actual: other.basis.len() });
        }
        Ok(hilbert::trace_distance_matrices(&self.matrix, &other.matrix))
    }

    /// `⟨ψ|ρ|ψ⟩` for a vector over the same basis.
    pub fn expectation(&self, psi: &SymVector) -> Result<f64> {
        if psi.basis != self.basis {
            return Err(Error::DimensionMismatch { expected: self.basis.len(), actual: psi.basis.len() });
        }
        Ok(psi.amplitudes.dotc(&(&self.matrix * &psi.amplitudes)).re)
    }

    /// `op · ρ · op†` for an operator on the occupation basis.
    pub fn conjugate_by(&self, op: &DMatrix<C64>) -> Result<Self> {
        if op.nrows() != self.basis.len() || op.ncols() != self.basis.len() {
            return Err(Error::DimensionMismatch { expected: self.basis.len(), actual: op.nrows() });
        }
        Ok(Self { basis: self.basis.clone(), matrix: op * &self.matrix * op.adjoint() })
    }
}

/// Partial trace native to the occupation basis: keeps `kept` factors of a
/// symmetric `M`-factor density using the splitting amplitudes
/// `ρ_L[a⃗, b⃗] = Σ_k f(a⃗+k⃗, k⃗) f(b⃗+k⃗, k⃗) ρ[a⃗+k⃗, b⃗+k⃗]`.
pub fn reduce_symmetric(rho: &SymDensity, kept: usize) -> Result<SymDensity> {
    let total = rho.basis.total;
    if kept < 1 || kept > total {
        return invalid(format!("reduced copy count must be in 1..={total}, got {kept}"));
    }
    if kept == total {
        return Ok(rho.clone());
    }
    let d = rho.basis.d;
    let out_basis = SymBasis::new(d, kept)?;
    let rest = enumerate_occupations(d, total - kept)?;

    // split[a][r] = (index of a + rest[r] in the M basis, splitting amplitude)
    let mut split = Vec::with_capacity(out_basis.len());
    for a in out_basis.vectors() {
        let mut row = Vec::with_capacity(rest.len());
        for k in &rest {
            let m = a.plus(k);
            let idx = rho.basis.index_of(&m).expect("sum of occupations lies in the basis");
            row.push((idx, splitting_coefficient(&m, k, total, kept)?));
        }
        split.push(row);
    }
    let n = out_basis.len();
    let matrix = DMatrix::from_fn(n, n, |r, c| {
        split[r]
            .iter()
            .zip(&split[c])
            .map(|(&(i, fi), &(j, fj))| rho.matrix[(i, j)] * (fi * fj))
            .sum::<C64>()
    });
    SymDensity::new(out_basis, matrix)
}

/// Joint vector `Σ c[a, b] |a⃗⟩|b⃗⟩` over two occupation bases (left factors
/// first). Rows index the left basis, columns the right.
#[derive(Debug, Clone, PartialEq)]
pub struct SymJoint {
    left: Arc<SymBasis>,
    right: Arc<SymBasis>,
    coeffs: DMatrix<C64>,
}

impl SymJoint {
    pub fn new(left: Arc<SymBasis>, right: Arc<SymBasis>, coeffs: DMatrix<C64>) -> Result<Self> {
        if coeffs.nrows() != left.len() || coeffs.ncols() != right.len() {
            return Err(Error::DimensionMismatch { expected: left.len() * right.len(), actual: coeffs.len() });
        }
        if left.d != right.d {
            return Err(Error::DimensionMismatch { expected: left.d, actual: right.d });
        }
        Ok(Self { left, right, coeffs })
    }

    pub fn zeros(left: Arc<SymBasis>, right: Arc<SymBasis>) -> Self {
        let coeffs = DMatrix::zeros(left.len(), right.len());
        Self { left, right, coeffs }
    }

    pub fn left(&self) -> &Arc<SymBasis> {
        &self.left
    }

    pub fn right(&self) -> &Arc<SymBasis> {
        &self.right
    }

    pub fn coeffs(&self) -> &DMatrix<C64> {
        &self.coeffs
    }

    pub(crate) fn add_to(&mut self, a: &OccupationVector, b: &OccupationVector, value: C64) {
        let i = self.left.index_of(a).expect("left occupation in basis");
        let j = self.right.index_of(b).expect("right occupation in basis");
        self.coeffs[(i, j)] += value;
    }

    pub fn coefficient(&self, a: &OccupationVector, b: &OccupationVector) -> Option<C64> {
        Some(self.coeffs[(self.left.index_of(a)?, self.right.index_of(b)?)])
    }

    pub fn norm(&self) -> f64 {
        self.coeffs.norm()
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self { coeffs: &self.coeffs * C64::from(factor), ..self.clone() }
    }

    /// Traces out the right factors: `C C†`.
    pub fn reduce_left(&self) -> SymDensity {
        SymDensity { basis: self.left.clone(), matrix: &self.coeffs * self.coeffs.adjoint() }
    }

    /// Schmidt coefficients across the left/right cut, descending, of the
    /// vector as stored (not renormalized).
    pub fn schmidt_coefficients(&self) -> Vec<f64> {
        let mut s: Vec<f64> = self.coeffs.singular_values().iter().copied().collect();
        s.sort_by(|a, b| b.total_cmp(a));
        s
    }

    /// `Σ c[a,b] embed(a) ⊗ embed(b)` in the full space.
    pub fn to_full(&self) -> Result<FullState> {
        check_cap(self.left.d, self.left.total + self.right.total)?;
        let vl = self.left.isometry()?;
        let vr = self.right.isometry()?;
        // row-major over (left, right) digits: amplitude index = l * dim_r + r
        let m = &vl * &self.coeffs * vr.transpose();
        let (rows, cols) = m.shape();
        let amps = DVector::from_fn(rows * cols, |i, _| m[(i / cols, i % cols)]);
        FullState::new(amps, self.left.total + self.right.total, self.left.d)
    }
}

/// `Σ_k |k⃗⟩|k⃗⟩` together with the scalar relating it to
/// `(s_n ⊗ I^{⊗n}) |Φ⁺⟩^{⊗n}`.
#[derive(Debug, Clone, PartialEq)]
pub struct EntangledPairs {
    /// Unnormalized, identity coefficient matrix.
    pub joint: SymJoint,
    /// `(s_n ⊗ I)|Φ⁺⟩^{⊗n} = constant · joint`, with the copy halves grouped
    /// before the ancilla halves; equals `d^{-n/2}`.
    pub constant: f64,
}

impl EntangledPairs {
    pub fn schmidt_rank(&self) -> usize {
        self.joint.schmidt_coefficients().iter().filter(|&&s| s > 1e-12).count()
    }
}

/// Symmetric projection of one half of `n` maximally entangled pairs.
pub fn project_entangled_pairs(d: usize, n: usize) -> Result<EntangledPairs> {
    if n < 1 {
        return invalid("need at least one entangled pair");
    }
    let basis = SymBasis::new(d, n)?;
    let dim = basis.len();
    let joint = SymJoint::new(basis.clone(), basis, DMatrix::identity(dim, dim))?;
    Ok(EntangledPairs { joint, constant: (d as f64).powf(-(n as f64) / 2.0) })
}

/// Full-space evaluation of `(s_n ⊗ I^{⊗n}) |Φ⁺⟩^{⊗n}`: the pairs are built
/// interleaved `(c_1 a_1 c_2 a_2 …)`, regrouped to `(c_1 … c_n a_1 … a_n)`,
/// and projected on the copy block.
pub fn project_entangled_pairs_oracle(d: usize, n: usize) -> Result<FullState> {
    check_cap(d, 2 * n)?;
    let pair = hilbert::maximally_entangled(d)?;
    let mut state = FullState::vacuum(d);
    for _ in 0..n {
        state = state.tensor(&pair)?;
    }
    // interleaved position 2i -> copy i, 2i+1 -> ancilla i
    let perm: Vec<usize> = (0..2 * n).map(|p| if p % 2 == 0 { p / 2 } else { n + p / 2 }).collect();
    let grouped = state.permute_factors(&perm)?;
    let op = projector_full(d, n)?.kronecker(&DMatrix::<C64>::identity(d.pow(n as u32), d.pow(n as u32)));
    grouped.apply(&op)
}

/// `u^{⊗M}` restricted to the symmetric subspace, built by expanding
/// `∏_j (Σ_i u_{ij} a_i†)^{m_j} / √(m_j!)` on each basis column.
pub fn symmetric_power_operator(u: &DMatrix<C64>, total: usize) -> Result<DMatrix<C64>> {
    let d = u.nrows();
    if u.ncols() != d {
        return Err(Error::DimensionMismatch { expected: d, actual: u.ncols() });
    }
    let basis = SymBasis::new(d, total)?;
    let mut out = DMatrix::zeros(basis.len(), basis.len());
    let fact: Vec<f64> = (0..=total)
        .scan(1.0, |acc, i| {
            if i > 0 {
                *acc *= i as f64;
            }
            Some(*acc)
        })
        .collect();
    for (col, m) in basis.vectors().iter().enumerate() {
        // polynomial in creation operators keyed by exponent vector
        let mut poly: BTreeMap<Vec<usize>, C64> = BTreeMap::new();
        poly.insert(vec![0; d], C64::from(1.0));
        for (j, &mj) in m.counts().iter().enumerate() {
            for _ in 0..mj {
                let mut next: BTreeMap<Vec<usize>, C64> = BTreeMap::new();
                for (exps, coeff) in &poly {
                    for i in 0..d {
                        let c = u[(i, j)];
                        if c == C64::from(0.0) {
                            continue;
                        }
                        let mut e = exps.clone();
                        e[i] += 1;
                        *next.entry(e).or_insert(C64::from(0.0)) += coeff * c;
                    }
                }
                poly = next;
            }
        }
        let norm_in: f64 = m.counts().iter().map(|&mj| fact[mj]).product::<f64>().sqrt();
        for (exps, coeff) in poly {
            let norm_out: f64 = exps.iter().map(|&e| fact[e]).product::<f64>().sqrt();
            let occ = OccupationVector::new(exps)?;
            let row = basis.index_of(&occ).expect("exponent vector in basis");
            out[(row, col)] = coeff * (norm_out / norm_in);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::combinatorics::binomial;
    use crate::hilbert::{random_pure_state, random_unitary, seeded_rng, tensor_power_operator, trace_distance};

    fn occ(v: &[usize]) -> OccupationVector {
        OccupationVector::new(v.to_vec()).unwrap()
    }

    fn c(re: f64) -> C64 {
        C64::from(re)
    }

    #[test]
    fn embed_examples() {
        assert_eq!(embed(&occ(&[2, 0])).unwrap(), FullState::basis(2, &[0, 0]).unwrap());
        let e = embed(&occ(&[1, 1])).unwrap();
        let h = 0.5f64.sqrt();
        let expect = DVector::from_vec(vec![c(0.0), c(h), c(h), c(0.0)]);
        assert!((e.amplitudes() - expect).norm() < 1e-15);
    }

    #[test]
    fn embed_orthonormal() {
        for d in 2..=3 {
            for total in 1..=4 {
                let vs = enumerate_occupations(d, total).unwrap();
                for a in &vs {
                    for b in &vs {
                        let ov = embed(a).unwrap().inner(&embed(b).unwrap()).unwrap();
                        let expect = if a == b { 1.0 } else { 0.0 };
                        assert!((ov - c(expect)).norm() < 1e-12);
                    }
                }
            }
        }
    }

    #[test]
    fn projector_two_qubits_is_half_identity_plus_swap() {
        let p = projector_full(2, 2).unwrap();
        let mut swap = DMatrix::<C64>::zeros(4, 4);
        for a in 0..2 {
            for b in 0..2 {
                swap[(b * 2 + a, a * 2 + b)] = c(1.0);
            }
        }
        let expect = (DMatrix::<C64>::identity(4, 4) + swap) * c(0.5);
        assert!((&p - expect).norm() < 1e-12);
    }

    #[test]
    fn projector_properties() {
        for d in 2..=3 {
            for total in 1..=4 {
                let p = projector_full(d, total).unwrap();
                assert!((&p * &p - &p).norm() < 1e-12);
                let dim = binomial((d + total - 1) as i64, total as i64).unwrap().to_f64().unwrap();
                assert!((p.trace().re - dim).abs() < 1e-12);
                for m in enumerate_occupations(d, total).unwrap() {
                    let e = embed(&m).unwrap();
                    assert!((e.apply(&p).unwrap().amplitudes() - e.amplitudes()).norm() < 1e-12);
                }
                // commutes with a transposition of the first two factors
                let full = d.pow(total as u32);
                let mut perm = vec![1, 0];
                perm.extend(2..total);
                if total >= 2 {
                    let swap = DMatrix::from_fn(full, full, |r, col| {
                        let src = FullState::basis(d, &hilbert::digits(col, d, total)).unwrap();
                        src.permute_factors(&perm).unwrap().amplitudes()[r]
                    });
                    assert!((&swap * &p - &p * &swap).norm() < 1e-12);
                }
            }
        }
        assert!(projector_full(2, 13).is_err());
    }

    #[test]
    fn expand_power_examples() {
        let phi = PureState::basis(3, 0).unwrap();
        for n in 1..=4 {
            let v = expand_power(&phi, n).unwrap();
            assert_eq!(v.amplitude(&OccupationVector::concentrated(3, n, 0).unwrap()), Some(c(1.0)));
            assert!((v.norm() - 1.0).abs() < 1e-15);
        }
        let h = 0.5f64.sqrt();
        let phi = PureState::new(vec![c(h), c(h)]).unwrap();
        let v = expand_power(&phi, 2).unwrap();
        let expect = [0.5, h, 0.5];
        for (a, e) in v.amplitudes().iter().zip(expect) {
            assert!((a - c(e)).norm() < 1e-15);
        }
    }

    #[test]
    fn expand_power_matches_tensor_power() {
        let mut rng = seeded_rng(21);
        for d in 2..=3 {
            for n in 1..=4 {
                for _ in 0..5 {
                    let phi = random_pure_state(d, &mut rng).unwrap();
                    let v = expand_power(&phi, n).unwrap();
                    assert!((v.norm() - 1.0).abs() < 1e-12);
                    let lhs = v.to_full().unwrap();
                    let rhs = phi.power(n).unwrap();
                    assert!((lhs.amplitudes() - rhs.amplitudes()).norm() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn entangled_pairs_single_pair_is_bell_state() {
        let pairs = project_entangled_pairs(3, 1).unwrap();
        let full = pairs.joint.to_full().unwrap().scaled(c(pairs.constant));
        let bell = hilbert::maximally_entangled(3).unwrap();
        assert!((full.amplitudes() - bell.amplitudes()).norm() < 1e-12);
        assert_eq!(pairs.schmidt_rank(), 3);
    }

    #[test]
    fn entangled_pairs_match_oracle() {
        for d in 2..=3 {
            for n in 1..=3 {
                let pairs = project_entangled_pairs(d, n).unwrap();
                let fast = pairs.joint.to_full().unwrap().scaled(c(pairs.constant));
                let oracle = project_entangled_pairs_oracle(d, n).unwrap();
                assert!((fast.amplitudes() - oracle.amplitudes()).norm() < 1e-10, "d={d} n={n}");
                let s = pairs.joint.schmidt_coefficients();
                assert_eq!(pairs.schmidt_rank(), SymBasis::new(d, n).unwrap().len());
                assert!(s.iter().all(|x| (x - s[0]).abs() < 1e-12));
            }
        }
    }

    #[test]
    fn entangled_pairs_oracle_schmidt_rank() {
        // d = 2, n = 2: three equal Schmidt terms on (2,0), (1,1), (0,2)
        let oracle = project_entangled_pairs_oracle(2, 2).unwrap();
        let m = DMatrix::from_fn(4, 4, |r, col| oracle.amplitudes()[r * 4 + col]);
        let s: Vec<f64> = m.singular_values().iter().copied().filter(|&x| x > 1e-12).collect();
        assert_eq!(s.len(), 3);
        assert!(s.iter().all(|x| (x - s[0]).abs() < 1e-12));
    }

    fn random_sym_density(d: usize, total: usize, seed: u64) -> SymDensity {
        let basis = SymBasis::new(d, total).unwrap();
        let n = basis.len();
        let mut rng = seeded_rng(seed);
        let u = if n >= 2 { random_unitary(n, &mut rng).unwrap() } else { DMatrix::identity(1, 1) };
        let weights: Vec<f64> = (1..=n).map(|i| i as f64).collect();
        let sum: f64 = weights.iter().sum();
        let diag = DMatrix::from_diagonal(&DVector::from_iterator(n, weights.iter().map(|w| c(w / sum))));
        SymDensity::new(basis, &u * diag * u.adjoint()).unwrap()
    }

    #[test]
    fn reduce_identity_and_trace() {
        let rho = random_sym_density(3, 3, 1);
        assert_eq!(reduce_symmetric(&rho, 3).unwrap(), rho);
        for l in 1..=3 {
            let r = reduce_symmetric(&rho, l).unwrap();
            assert!((r.trace() - c(1.0)).norm() < 1e-12);
            r.validate().unwrap();
        }
        assert!(reduce_symmetric(&rho, 0).is_err());
        assert!(reduce_symmetric(&rho, 4).is_err());
    }

    #[test]
    fn reduce_product_state() {
        let mut rng = seeded_rng(5);
        let phi = random_pure_state(3, &mut rng).unwrap();
        let rho = expand_power(&phi, 4).unwrap().density();
        for l in 1..=4 {
            let r = reduce_symmetric(&rho, l).unwrap();
            let expect = expand_power(&phi, l).unwrap().density();
            assert!(r.trace_distance(&expect).unwrap() < 1e-12);
        }
    }

    #[test]
    fn reduce_triplet_middle_to_mixed() {
        let basis = SymBasis::new(2, 2).unwrap();
        let mut m = DMatrix::zeros(3, 3);
        m[(1, 1)] = c(1.0);
        let rho = SymDensity::new(basis, m).unwrap();
        let r = reduce_symmetric(&rho, 1).unwrap();
        assert!((r.matrix() - DMatrix::<C64>::identity(2, 2) * c(0.5)).norm() < 1e-12);
    }

    #[test]
    fn reduce_matches_oracle_for_every_traced_set() {
        let mut seed = 100;
        for d in 2..=3 {
            for total in 1..=4 {
                seed += 1;
                let rho = random_sym_density(d, total, seed);
                let full = rho.to_full().unwrap();
                for l in 1..=total {
                    let fast = reduce_symmetric(&rho, l).unwrap().to_full().unwrap();
                    // every choice of kept positions
                    for mask in 0u32..(1 << total) {
                        if mask.count_ones() as usize != l {
                            continue;
                        }
                        let keep: Vec<usize> = (0..total).filter(|i| mask & (1 << i) != 0).collect();
                        let oracle = full.partial_trace(&keep).unwrap();
                        assert!(trace_distance(&fast, &oracle).unwrap() < 1e-10, "d={d} M={total} keep={keep:?}");
                    }
                }
            }
        }
    }

    #[test]
    fn symmetric_power_operator_matches_oracle() {
        let mut rng = seeded_rng(77);
        for d in 2..=3 {
            for total in 1..=4 {
                let u = random_unitary(d, &mut rng).unwrap();
                let fast = symmetric_power_operator(&u, total).unwrap();
                let v = SymBasis::new(d, total).unwrap().isometry().unwrap();
                let oracle = v.adjoint() * tensor_power_operator(&u, total).unwrap() * &v;
                assert!((&fast - oracle).norm() < 1e-10);
                let n = fast.nrows();
                assert!((fast.adjoint() * &fast - DMatrix::<C64>::identity(n, n)).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn symmetric_power_operator_is_bitwise_reproducible() {
        let u = random_unitary(3, &mut seeded_rng(12)).unwrap();
        let first = symmetric_power_operator(&u, 4).unwrap();
        for _ in 0..5 {
            assert_eq!(symmetric_power_operator(&u, 4).unwrap(), first);
        }
    }
}
