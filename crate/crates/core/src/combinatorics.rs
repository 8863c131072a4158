//! Exact combinatorial kernel for the occupation-number representation.
//!
//! Everything here works in arbitrary-precision integers and rationals so
//! closed-form fidelities can be compared without tolerance. Conversion to
//! `f64` happens only at the edges (see [`rational_to_f64`]).
//!
//! Occupation vectors index computational levels from 0: slot `j` counts how
//! many factors sit in `|j⟩`. The canonical enumeration order is
//! lexicographically decreasing, so `(M, 0, …, 0)` comes first and
//! `(0, …, 0, M)` last. Every matrix index downstream uses this order.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Exact rational number, always in lowest terms with a positive denominator.
pub type ExactRational = BigRational;

/// Returns `C(n, k)`, or zero when `k < 0` or `k > n`.
pub fn binomial(n: i64, k: i64) -> Result<BigUint> {
    if n < 0 {
        return invalid(format!("binomial requires n >= 0, got n = {n}"));
    }
    if k < 0 || k > n {
        return Ok(BigUint::zero());
    }
    let k = k.min(n - k) as u64;
    let n = n as u64;
    let mut acc = BigUint::one();
    for i in 0..k {
        // exact at every step: acc * (n - i) is divisible by (i + 1)
        acc = acc * (n - i) / (i + 1);
    }
    Ok(acc)
}

pub fn factorial(n: usize) -> BigUint {
    (1..=n as u64).fold(BigUint::one(), |acc, i| acc * i)
}

/// Immutable table of `0!, 1!, …, max!`.
#[derive(Debug, Clone)]
pub struct FactorialTable {
    values: Vec<BigUint>,
}

impl FactorialTable {
    pub fn up_to(max: usize) -> Self {
        let mut values = Vec::with_capacity(max + 1);
        values.push(BigUint::one());
        for i in 1..=max {
            let next = &values[i - 1] * BigUint::from(i);
            values.push(next);
        }
        Self { values }
    }

    /// `n!` as an integer; panics if `n` exceeds the table.
    pub fn get(&self, n: usize) -> &BigUint {
        &self.values[n]
    }

    /// `n!` for signed arguments; `None` for negative `n`.
    pub fn signed(&self, n: i64) -> Option<&BigUint> {
        usize::try_from(n).ok().map(|n| self.get(n))
    }

    pub fn max(&self) -> usize {
        self.values.len() - 1
    }
}

/// Dimension `C(d + n - 1, n)` of the symmetric subspace of `n` qudits.
pub fn sym_dim(d: usize, n: usize) -> Result<BigUint> {
    if d < 2 {
        return invalid(format!("local dimension must be >= 2, got {d}"));
    }
    binomial((d + n - 1) as i64, n as i64)
}

/// [`sym_dim`] as a machine integer, for sizing dense containers.
pub(crate) fn sym_dim_usize(d: usize, n: usize) -> Result<usize> {
    sym_dim(d, n)?
        .to_usize()
        .ok_or_else(|| crate::Error::InvalidParameter(format!("sym_dim({d}, {n}) overflows usize")))
}

/// Occupation numbers `(m_0, …, m_{d-1})` labelling a completely symmetric
/// basis state.
///
/// `Ord` follows the canonical enumeration order: a vector compares *less*
/// when it comes earlier, i.e. when it is lexicographically *larger*.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct OccupationVector {
    counts: Vec<usize>,
}

impl OccupationVector {
    pub fn new(counts: Vec<usize>) -> Result<Self> {
        if counts.len() < 2 {
            return invalid(format!(
                "occupation vector needs at least 2 levels, got {}",
                counts.len()
            ));
        }
        Ok(Self { counts })
    }

    /// Builds a vector and checks it against a declared particle number.
    pub fn with_total(counts: Vec<usize>, total: usize) -> Result<Self> {
        let v = Self::new(counts)?;
        if v.total() != total {
            return invalid(format!(
                "occupation {:?} sums to {}, declared total {}",
                v.counts,
                v.total(),
                total
            ));
        }
        Ok(v)
    }

    /// All particles in level `level`.
    pub fn concentrated(d: usize, total: usize, level: usize) -> Result<Self> {
        if level >= d {
            return invalid(format!("level {level} out of range for d = {d}"));
        }
        let mut counts = vec![0; d];
        counts[level] = total;
        Self::new(counts)
    }

    pub fn counts(&self) -> &[usize] {
        &self.counts
    }

    pub fn dim(&self) -> usize {
        self.counts.len()
    }

    pub fn total(&self) -> usize {
        self.counts.iter().sum()
    }

    /// Componentwise sum, used for `|n⃗ + k⃗⟩`.
    pub fn plus(&self, other: &Self) -> Self {
        debug_assert_eq!(self.dim(), other.dim());
        Self {
            counts: self.counts.iter().zip(&other.counts).map(|(a, b)| a + b).collect(),
        }
    }

    /// Componentwise difference, or `None` when some entry would go negative.
    pub fn checked_minus(&self, other: &Self) -> Option<Self> {
        if self.dim() != other.dim() {
            return None;
        }
        let counts = self
            .counts
            .iter()
            .zip(&other.counts)
            .map(|(a, b)| a.checked_sub(*b))
            .collect::<Option<Vec<_>>>()?;
        Some(Self { counts })
    }

    /// Whether `other[j] <= self[j]` for every level.
    pub fn dominates(&self, other: &Self) -> bool {
        self.dim() == other.dim() && self.counts.iter().zip(&other.counts).all(|(a, b)| b <= a)
    }

    /// Number of distinct product strings with these occupations,
    /// `total! / ∏ m_j!`.
    pub fn multinomial(&self) -> BigUint {
        let num = factorial(self.total());
        let den = self.counts.iter().fold(BigUint::one(), |acc, &m| acc * factorial(m));
        num / den
    }
}

impl Ord for OccupationVector {
    fn cmp(&self, other: &Self) -> Ordering {
        other.counts.cmp(&self.counts)
    }
}

impl PartialOrd for OccupationVector {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for OccupationVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.counts.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

/// All occupation vectors of `total` particles over `d` levels, in canonical
/// (lexicographically decreasing) order.
pub fn enumerate_occupations(d: usize, total: usize) -> Result<Vec<OccupationVector>> {
    if d < 2 {
        return invalid(format!("local dimension must be >= 2, got {d}"));
    }
    let mut out = Vec::with_capacity(sym_dim_usize(d, total)?);
    let mut prefix = Vec::with_capacity(d);
    fill_occupations(d, total, &mut prefix, &mut out);
    Ok(out)
}

fn fill_occupations(d: usize, remaining: usize, prefix: &mut Vec<usize>, out: &mut Vec<OccupationVector>) {
    if prefix.len() == d - 1 {
        prefix.push(remaining);
        out.push(OccupationVector { counts: prefix.clone() });
        prefix.pop();
        return;
    }
    for c in (0..=remaining).rev() {
        prefix.push(c);
        fill_occupations(d, remaining - c, prefix, out);
        prefix.pop();
    }
}

fn check_split(m: &OccupationVector, k: &OccupationVector, total: usize, kept: usize) -> Result<()> {
    if kept > total {
        return invalid(format!("cannot keep {kept} of {total} factors"));
    }
    if m.total() != total {
        return invalid(format!("m = {m} does not have total {total}"));
    }
    if k.total() != total - kept {
        return invalid(format!("k = {k} does not have total {}", total - kept));
    }
    if !m.dominates(k) {
        return invalid(format!("k = {k} exceeds m = {m} in some level"));
    }
    Ok(())
}

/// Square of the amplitude of `|m⃗ − k⃗⟩|k⃗⟩` when the `total`-particle state
/// `|m⃗⟩` is split into its first `kept` and last `total − kept` factors:
/// `∏_j C(m_j, k_j) / C(total, kept)`.
pub fn splitting_coefficient_squared(
    m: &OccupationVector,
    k: &OccupationVector,
    total: usize,
    kept: usize,
) -> Result<ExactRational> {
    check_split(m, k, total, kept)?;
    let mut num = BigUint::one();
    for (&mj, &kj) in m.counts().iter().zip(k.counts()) {
        num *= binomial(mj as i64, kj as i64)?;
    }
    let den = binomial(total as i64, kept as i64)?;
    Ok(ExactRational::new(BigInt::from(num), BigInt::from(den)))
}

/// Amplitude of `|m⃗ − k⃗⟩|k⃗⟩` in the split of `|m⃗⟩`; always nonnegative.
pub fn splitting_coefficient(
    m: &OccupationVector,
    k: &OccupationVector,
    total: usize,
    kept: usize,
) -> Result<f64> {
    Ok(rational_to_f64(&splitting_coefficient_squared(m, k, total, kept)?).sqrt())
}

pub fn rational_to_f64(r: &ExactRational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// `"p/q"`, including `"1/1"` and `"0/1"`, so consumers can always split on `/`.
pub fn rational_string(r: &ExactRational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

pub(crate) fn ratio(num: BigUint, den: BigUint) -> ExactRational {
    ExactRational::new(BigInt::from(num), BigInt::from(den))
}

/// Outcome of checking the summation identity behind the single-copy
/// fidelity at `L = 1`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IdentityReport {
    pub n: usize,
    pub m: usize,
    pub d: usize,
    /// Left side: `(M−N)!(N+d−1)!/((M+d−1)!N!) · Σ_{j=0}^{M−N} ((N+j)!)² (M−N−j+d−2)! / (M · j! · (N+j−1)! · (M−N−j)! · (d−2)!)`.
    #[serde(serialize_with = "serialize_rational")]
    pub lhs: ExactRational,
    /// Right side: `(N(d+M) + M − N) / ((d+N) M)`.
    #[serde(serialize_with = "serialize_rational")]
    pub rhs: ExactRational,
    pub equal: bool,
    /// Whether the summand with the bare factor `M·j` in its denominator
    /// can be evaluated over the whole range. It cannot: the `j = 0` term
    /// divides by zero.
    pub printed_form_evaluable: bool,
    pub note: String,
}

pub(crate) fn serialize_rational<S: serde::Serializer>(
    r: &ExactRational,
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&rational_string(r))
}

pub const PRINTED_FORM_NOTE: &str = "the variant whose denominator reads M*j*(M-N-j)!*(d-2)! divides by zero at j = 0; \
the verified form uses M * j! * (N+j-1)! * (M-N-j)! * (d-2)!";

/// Evaluates both sides of the single-copy summation identity exactly.
pub fn verify_identity(n: usize, m: usize, d: usize) -> Result<IdentityReport> {
    if n < 1 || m < n {
        return invalid(format!("identity requires M >= N >= 1, got N = {n}, M = {m}"));
    }
    if d < 2 {
        return invalid(format!("local dimension must be >= 2, got {d}"));
    }
    let f = FactorialTable::up_to(m + d);
    let prefactor = ratio(
        f.get(m - n) * f.get(n + d - 1),
        f.get(m + d - 1) * f.get(n),
    );
    let mut sum = ExactRational::zero();
    for j in 0..=(m - n) {
        let num = f.get(n + j) * f.get(n + j) * f.get(m - n - j + d - 2);
        let den = BigUint::from(m) * f.get(j) * f.get(n + j - 1) * f.get(m - n - j) * f.get(d - 2);
        sum += ratio(num, den);
    }
    let lhs = prefactor * sum;
    let rhs = ExactRational::new(
        BigInt::from(n * (d + m) + m - n),
        BigInt::from((d + n) * m),
    );
    let equal = lhs == rhs;
    Ok(IdentityReport {
        n,
        m,
        d,
        lhs,
        rhs,
        equal,
        printed_form_evaluable: false,
        note: PRINTED_FORM_NOTE.to_string(),
    })
}
