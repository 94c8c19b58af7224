//! Scalar traits shared by the exact linear algebra.
//!
//! Everything in this crate is exact. Two families of scalars appear:
//! Euclidean integer types (for Smith normal form and fraction-free
//! elimination) and exact fields (for rational linear algebra).

use std::fmt::{Debug, Display};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::Ratio;
use num_traits::{One, Signed, Zero};

/// Common bound for matrix entries.
pub trait Scalar: Clone + Debug + Display + PartialEq + Zero + One + Send + Sync {}

impl<T> Scalar for T where T: Clone + Debug + Display + PartialEq + Zero + One + Send + Sync {}

/// A Euclidean domain of integers: `i64`, `i128`, `BigInt`.
pub trait EuclidInt: Scalar + Integer + Signed + Ord + From<i64> {
    fn to_bigint(&self) -> BigInt;
}

impl EuclidInt for i64 {
    fn to_bigint(&self) -> BigInt {
        BigInt::from(*self)
    }
}

impl EuclidInt for i128 {
    fn to_bigint(&self) -> BigInt {
        BigInt::from(*self)
    }
}

impl EuclidInt for BigInt {
    fn to_bigint(&self) -> BigInt {
        self.clone()
    }
}

/// An exact field presented as fractions over a Euclidean integer type.
pub trait ExactField: Scalar + Signed + std::ops::Div<Output = Self> {
    type Int: EuclidInt;

    fn numer_int(&self) -> Self::Int;
    fn denom_int(&self) -> Self::Int;
    fn from_int(i: Self::Int) -> Self;
}

impl<T> ExactField for Ratio<T>
where
    T: EuclidInt,
    Ratio<T>: Scalar + Signed,
{
    type Int = T;

    fn numer_int(&self) -> T {
        self.numer().clone()
    }

    fn denom_int(&self) -> T {
        self.denom().clone()
    }

    fn from_int(i: T) -> Self {
        Ratio::from_integer(i)
    }
}
