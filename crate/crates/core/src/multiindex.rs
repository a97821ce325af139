//! Ordered multi-indices over the coframe labels `1..=n`.
//!
//! A [`MultiIndex`] is a strictly increasing tuple of axis labels, stored as a
//! bit mask. Everything here is exact integer arithmetic: permutation signs are
//! [`Sign`] values, never floats.

use std::fmt;
use std::ops::{Mul, Neg};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest complex dimension supported by the bit-mask representation.
pub const MAX_DIM: usize = 12;

/// An exact sign, `+1` or `-1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    /// `(-1)^k`.
    pub fn parity(k: usize) -> Self {
        if k % 2 == 0 {
            Sign::Plus
        } else {
            Sign::Minus
        }
    }

    pub fn to_i32(self) -> i32 {
        match self {
            Sign::Plus => 1,
            Sign::Minus => -1,
        }
    }

    pub fn to_f64(self) -> f64 {
        self.to_i32() as f64
    }
}

impl Mul for Sign {
    type Output = Sign;
    fn mul(self, rhs: Sign) -> Sign {
        if self == rhs {
            Sign::Plus
        } else {
            Sign::Minus
        }
    }
}

impl Neg for Sign {
    type Output = Sign;
    fn neg(self) -> Sign {
        self * Sign::Minus
    }
}

impl fmt::Display for Sign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Sign::Plus => write!(f, "+1"),
            Sign::Minus => write!(f, "-1"),
        }
    }
}

/// A strictly increasing tuple of labels in `1..=n`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MultiIndex {
    n: u8,
    mask: u16,
}

impl MultiIndex {
    /// Builds a multi-index from 1-based labels, which must be strictly increasing.
    pub fn new(n: usize, entries: &[usize]) -> Result<Self> {
        if n > MAX_DIM {
            return Err(Error::InvalidMultiIndex(format!(
                "dimension {n} exceeds {MAX_DIM}"
            )));
        }
        let mut mask = 0u16;
        let mut prev = 0usize;
        for &e in entries {
            if e == 0 || e > n {
                return Err(Error::InvalidMultiIndex(format!(
                    "label {e} outside 1..={n}"
                )));
            }
            if e <= prev {
                return Err(Error::InvalidMultiIndex(format!(
                    "labels {entries:?} are not strictly increasing"
                )));
            }
            prev = e;
            mask |= 1 << (e - 1);
        }
        Ok(Self { n: n as u8, mask })
    }

    pub(crate) fn from_mask(n: usize, mask: u16) -> Self {
        debug_assert!(n <= MAX_DIM && (mask as u32) < (1u32 << n));
        Self { n: n as u8, mask }
    }

    pub fn empty(n: usize) -> Self {
        Self::from_mask(n, 0)
    }

    /// The index `(1, 2, ..., n)`.
    pub fn full(n: usize) -> Self {
        Self::from_mask(n, ((1u32 << n) - 1) as u16)
    }

    /// The single label `alpha` (1-based).
    pub fn single(n: usize, alpha: usize) -> Result<Self> {
        Self::new(n, &[alpha])
    }

    pub fn n(&self) -> usize {
        self.n as usize
    }

    pub fn mask(&self) -> u16 {
        self.mask
    }

    pub fn len(&self) -> usize {
        self.mask.count_ones() as usize
    }

    pub fn is_empty(&self) -> bool {
        self.mask == 0
    }

    pub fn contains(&self, alpha: usize) -> bool {
        alpha >= 1 && alpha <= self.n() && self.mask & (1 << (alpha - 1)) != 0
    }

    /// Labels in increasing order, 1-based.
    pub fn entries(&self) -> Vec<usize> {
        (1..=self.n()).filter(|&a| self.contains(a)).collect()
    }

    /// The complementary index `A'`.
    pub fn complement(&self) -> Self {
        Self::from_mask(self.n(), !self.mask & Self::full(self.n()).mask)
    }

    /// `σ^{AA'}`: the sign of the permutation taking `(1..n)` to the
    /// concatenation `A·A'`, by inversion counting.
    pub fn perm_sign(&self) -> Sign {
        concat_sign(*self, self.complement())
    }

    /// All multi-indices of dimension `n`, ordered by length then mask.
    pub fn all(n: usize) -> Vec<MultiIndex> {
        (0..=n).flat_map(|p| Self::of_len(n, p)).collect()
    }

    /// All multi-indices of dimension `n` with exactly `p` labels.
    pub fn of_len(n: usize, p: usize) -> Vec<MultiIndex> {
        (0u32..(1u32 << n))
            .filter(|m| m.count_ones() as usize == p)
            .map(|m| Self::from_mask(n, m as u16))
            .collect()
    }
}

impl fmt::Debug for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let e: Vec<String> = self.entries().iter().map(|a| a.to_string()).collect();
        write!(f, "({})", e.join(","))
    }
}

impl Serialize for MultiIndex {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.entries().serialize(s)
    }
}

/// Serialized multi-indices carry only their labels; the dimension comes from
/// the surrounding chart, so deserialization goes through [`LabelList`].
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(transparent)]
pub struct LabelList(pub Vec<usize>);

impl LabelList {
    pub fn into_index(self, n: usize) -> Result<MultiIndex> {
        MultiIndex::new(n, &self.0)
    }
}

/// Number of pairs `(a, c)` with `a ∈ first`, `c ∈ second` and `a > c`.
fn cross_inversions(first: MultiIndex, second: MultiIndex) -> usize {
    let mut count = 0;
    let mut rest = second.mask;
    while rest != 0 {
        let bit = rest.trailing_zeros();
        rest &= rest - 1;
        let above = first.mask as u32 >> (bit + 1);
        count += above.count_ones() as usize;
    }
    count
}

/// Sign of the permutation sorting the concatenation `first·second`, which
/// must be disjoint.
pub fn concat_sign(first: MultiIndex, second: MultiIndex) -> Sign {
    debug_assert_eq!(first.mask & second.mask, 0);
    Sign::parity(cross_inversions(first, second))
}

/// `θ^A ∧ θ^C = sign · θ^{A∪C}`, or `None` when the labels repeat.
pub fn merge(first: MultiIndex, second: MultiIndex) -> Option<(MultiIndex, Sign)> {
    if first.mask & second.mask != 0 {
        return None;
    }
    Some((
        MultiIndex::from_mask(first.n(), first.mask | second.mask),
        concat_sign(first, second),
    ))
}

/// `ε^{AB} = (-1)^{np + n(n+1)/2} σ^{AA'} σ^{BB'}`, evaluated as printed.
pub fn epsilon(a: MultiIndex, b: MultiIndex) -> Result<Sign> {
    if a.n() != b.n() {
        return Err(Error::DimensionMismatch {
            left: a.n(),
            right: b.n(),
        });
    }
    let n = a.n();
    let p = a.len();
    Ok(Sign::parity(n * p + n * (n + 1) / 2) * a.perm_sign() * b.perm_sign())
}

/// Outcome of one exhaustive sign identity.
#[derive(Clone, Debug, Serialize)]
pub struct IdentityOutcome {
    pub name: &'static str,
    pub cases: usize,
    pub counterexamples: Vec<String>,
}

impl IdentityOutcome {
    pub fn passed(&self) -> bool {
        self.counterexamples.is_empty()
    }
}

/// Pass/fail per sign identity at a fixed dimension.
#[derive(Clone, Debug, Serialize)]
pub struct SignIdentityReport {
    pub n: usize,
    pub identities: Vec<IdentityOutcome>,
}

impl SignIdentityReport {
    pub fn passed(&self) -> bool {
        self.identities.iter().all(IdentityOutcome::passed)
    }
}

/// Exhaustively checks the complement-swap identity for `σ` and both `ε`
/// identities over every pair of multi-indices, `1 <= n <= 6`.
pub fn verify_sign_identities(n: usize) -> Result<SignIdentityReport> {
    if !(1..=6).contains(&n) {
        return Err(Error::InvalidMultiIndex(format!(
            "exhaustive sign check needs 1 <= n <= 6, got {n}"
        )));
    }
    let all = MultiIndex::all(n);

    let mut swap = IdentityOutcome {
        name: "sigma(A'A) = (-1)^{p(n-p)} sigma(AA')",
        cases: 0,
        counterexamples: Vec::new(),
    };
    for &a in &all {
        let p = a.len();
        swap.cases += 1;
        let lhs = concat_sign(a.complement(), a);
        let rhs = Sign::parity(p * (n - p)) * a.perm_sign();
        if lhs != rhs {
            swap.counterexamples.push(format!("A={a}: {lhs} vs {rhs}"));
        }
    }

    let mut transpose = IdentityOutcome {
        name: "eps(BA) = (-1)^{n(p+q)} eps(AB)",
        cases: 0,
        counterexamples: Vec::new(),
    };
    let mut dual = IdentityOutcome {
        name: "eps(AB) eps(B'A') = (-1)^{n+p+q}",
        cases: 0,
        counterexamples: Vec::new(),
    };
    for &a in &all {
        for &b in &all {
            let (p, q) = (a.len(), b.len());
            let e_ab = epsilon(a, b)?;
            transpose.cases += 1;
            let lhs = epsilon(b, a)?;
            let rhs = Sign::parity(n * (p + q)) * e_ab;
            if lhs != rhs {
                transpose
                    .counterexamples
                    .push(format!("A={a}, B={b}: {lhs} vs {rhs}"));
            }
            dual.cases += 1;
            let lhs = e_ab * epsilon(b.complement(), a.complement())?;
            let rhs = Sign::parity(n + p + q);
            if lhs != rhs {
                dual.counterexamples
                    .push(format!("A={a}, B={b}: {lhs} vs {rhs}"));
            }
        }
    }

    Ok(SignIdentityReport {
        n,
        identities: vec![swap, transpose, dual],
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mi(n: usize, e: &[usize]) -> MultiIndex {
        MultiIndex::new(n, e).unwrap()
    }

    /// Sign of a permutation of `1..=n` by explicit bubble sort.
    fn bubble_sign(mut seq: Vec<usize>) -> Sign {
        let mut swaps = 0;
        for i in 0..seq.len() {
            for j in 0..seq.len() - 1 - i {
                if seq[j] > seq[j + 1] {
                    seq.swap(j, j + 1);
                    swaps += 1;
                }
            }
        }
        Sign::parity(swaps)
    }

    #[test]
    fn construction_rejects_bad_labels() {
        assert!(MultiIndex::new(3, &[2, 1]).is_err());
        assert!(MultiIndex::new(3, &[1, 1]).is_err());
        assert!(MultiIndex::new(3, &[4]).is_err());
        assert!(MultiIndex::new(3, &[0]).is_err());
    }

    #[test]
    fn complement_examples() {
        assert_eq!(mi(2, &[1]).complement(), mi(2, &[2]));
        assert_eq!(mi(3, &[]).complement(), mi(3, &[1, 2, 3]));
        assert_eq!(mi(4, &[2, 4]).complement(), mi(4, &[1, 3]));
        for a in MultiIndex::all(5) {
            let c = a.complement();
            assert_eq!(c.len(), 5 - a.len());
            assert_eq!(c.mask() & a.mask(), 0);
            assert_eq!(c.complement(), a);
        }
    }

    #[test]
    fn perm_sign_examples() {
        assert_eq!(mi(3, &[2]).perm_sign(), Sign::Minus);
        assert_eq!(mi(2, &[1, 2]).perm_sign(), Sign::Plus);
        // (2,4,1,3): inversions (2,1), (4,1), (4,3) -> odd
        assert_eq!(mi(4, &[2, 4]).perm_sign(), Sign::Minus);
    }

    #[test]
    fn perm_sign_matches_bubble_sort() {
        for n in 0..=6 {
            for a in MultiIndex::all(n) {
                let mut seq = a.entries();
                seq.extend(a.complement().entries());
                assert_eq!(a.perm_sign(), bubble_sign(seq), "A={a}");
            }
        }
    }

    #[test]
    fn merge_matches_bubble_sort() {
        for a in MultiIndex::all(4) {
            for c in MultiIndex::all(4) {
                match merge(a, c) {
                    None => assert_ne!(a.mask() & c.mask(), 0),
                    Some((u, s)) => {
                        let mut seq = a.entries();
                        seq.extend(c.entries());
                        assert_eq!(s, bubble_sign(seq));
                        assert_eq!(u.len(), a.len() + c.len());
                    }
                }
            }
        }
    }

    #[test]
    fn epsilon_examples() {
        assert_eq!(epsilon(mi(1, &[1]), mi(1, &[1])).unwrap(), Sign::Plus);
        assert_eq!(epsilon(mi(2, &[1, 2]), mi(2, &[1, 2])).unwrap(), Sign::Minus);
        assert_eq!(epsilon(mi(1, &[]), mi(1, &[])).unwrap(), Sign::Minus);
        assert!(epsilon(mi(1, &[]), mi(2, &[])).is_err());
    }

    #[test]
    fn identities_hold_exhaustively() {
        for n in 1..=6 {
            let report = verify_sign_identities(n).unwrap();
            assert!(report.passed(), "{report:?}");
        }
        let r2 = verify_sign_identities(2).unwrap();
        assert_eq!(r2.identities[1].cases, 16);
        assert!(verify_sign_identities(7).is_err());
    }
}
