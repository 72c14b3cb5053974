//! (t, n) Shamir secret sharing over Z_q, with reconstruction both in the
//! field and in the exponent of G1.
//!
//! Share indices run 1..=n; index 0 is the dealer's secret and is never
//! issued as a share.

use std::collections::BTreeSet;

use rand::{CryptoRng, RngCore};
use thiserror::Error;
use zeroize::{Zeroize, ZeroizeOnDrop};

use crate::group_arith::{G1Element, Scalar};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ShamirError {
    #[error("threshold must be at least 1")]
    InvalidThreshold,
    #[error("invalid reconstruction subset: {0}")]
    BadSubset(&'static str),
}

/// f(X) = a_0 + a_1 X + ... + a_{t-1} X^{t-1}; a_0 is the secret.
#[derive(Clone, Zeroize, ZeroizeOnDrop)]
pub struct SharePolynomial {
    coefficients: Vec<Scalar>,
}

impl SharePolynomial {
    pub fn sample<R: RngCore + CryptoRng + ?Sized>(
        t: usize,
        rng: &mut R,
    ) -> Result<Self, ShamirError> {
        if t == 0 {
            return Err(ShamirError::InvalidThreshold);
        }
        let coefficients = (0..t).map(|_| Scalar::random(rng)).collect();
        Ok(Self { coefficients })
    }

    pub fn from_coefficients(coefficients: Vec<Scalar>) -> Result<Self, ShamirError> {
        if coefficients.is_empty() {
            return Err(ShamirError::InvalidThreshold);
        }
        Ok(Self { coefficients })
    }

    pub fn coefficients(&self) -> &[Scalar] {
        &self.coefficients
    }

    /// The number of shares needed to reconstruct (degree + 1).
    pub fn threshold(&self) -> usize {
        self.coefficients.len()
    }

    pub fn secret(&self) -> Scalar {
        self.coefficients[0]
    }

    /// Horner evaluation of f(x) mod q.
    pub fn evaluate(&self, x: u64) -> Scalar {
        let x = Scalar::from_u64(x);
        self.coefficients
            .iter()
            .rev()
            .fold(Scalar::zero(), |acc, &a| acc * x + a)
    }

    pub fn share(&self, index: u32) -> Share {
        Share {
            index,
            value: self.evaluate(u64::from(index)),
        }
    }
}

impl std::fmt::Debug for SharePolynomial {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "SharePolynomial(t={})", self.coefficients.len())
    }
}

/// s_i = (i, f(i)).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Share {
    pub index: u32,
    pub value: Scalar,
}

fn check_subset(j_set: &[u32]) -> Result<(), ShamirError> {
    if j_set.contains(&0) {
        return Err(ShamirError::BadSubset("index 0 is reserved for the secret"));
    }
    let unique: BTreeSet<u32> = j_set.iter().copied().collect();
    if unique.len() != j_set.len() {
        return Err(ShamirError::BadSubset("duplicate index"));
    }
    Ok(())
}

/// γ_{i,J} = ∏_{j∈J, j≠i} j·(j−i)^{-1} mod q.
pub fn lagrange_coefficient(i: u32, j_set: &[u32]) -> Result<Scalar, ShamirError> {
    check_subset(j_set)?;
    if !j_set.contains(&i) {
        return Err(ShamirError::BadSubset("index not in subset"));
    }
    let xi = Scalar::from_u64(u64::from(i));
    let mut num = Scalar::one();
    let mut den = Scalar::one();
    for &j in j_set.iter().filter(|&&j| j != i) {
        let xj = Scalar::from_u64(u64::from(j));
        num = num * xj;
        den = den * (xj - xi);
    }
    // den is a product of non-zero differences of distinct small integers.
    let inv = den
        .inverse()
        .map_err(|_| ShamirError::BadSubset("degenerate subset"))?;
    Ok(num * inv)
}

/// Σ_{i∈J} γ_{i,J}·f(i).
pub fn reconstruct_field(shares: &[Share], j_set: &[u32]) -> Result<Scalar, ShamirError> {
    check_subset(j_set)?;
    let mut acc = Scalar::zero();
    for &i in j_set {
        let share = shares
            .iter()
            .find(|s| s.index == i)
            .ok_or(ShamirError::BadSubset("missing share for index"))?;
        acc = acc + lagrange_coefficient(i, j_set)? * share.value;
    }
    Ok(acc)
}

/// ∏_{i∈J} share_i^{γ_{i,J}}. With share_i = h^{f(i)} and |J| = t this is
/// h^{f(0)}.
pub fn reconstruct_in_exponent(
    shares: &[(u32, G1Element)],
    j_set: &[u32],
) -> Result<G1Element, ShamirError> {
    check_subset(j_set)?;
    let mut acc = G1Element::identity();
    for &i in j_set {
        let (_, point) = shares
            .iter()
            .find(|(idx, _)| *idx == i)
            .ok_or(ShamirError::BadSubset("missing share for index"))?;
        acc = acc * point.pow(&lagrange_coefficient(i, j_set)?);
    }
    Ok(acc)
}
