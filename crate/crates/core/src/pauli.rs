//! The real Pauli group: signed tensor words over I, X, Z and XZ.

use std::fmt;
use std::ops::{Mul, Neg};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// A global sign, +1 or -1.
#[derive(
    Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize,
)]
#[serde(into = "i8", try_from = "i8")]
pub enum Sign {
    #[default]
    Plus,
    Minus,
}

impl Sign {
    pub fn from_bit(minus: bool) -> Self {
        if minus {
            Sign::Minus
        } else {
            Sign::Plus
        }
    }

    pub fn is_minus(self) -> bool {
        self == Sign::Minus
    }

    pub fn to_i8(self) -> i8 {
        match self {
            Sign::Plus => 1,
            Sign::Minus => -1,
        }
    }
}

impl Mul for Sign {
    type Output = Sign;
    fn mul(self, rhs: Sign) -> Sign {
        Sign::from_bit(self != rhs)
    }
}

impl Neg for Sign {
    type Output = Sign;
    fn neg(self) -> Sign {
        Sign::from_bit(!self.is_minus())
    }
}

impl From<Sign> for i8 {
    fn from(s: Sign) -> i8 {
        s.to_i8()
    }
}

impl TryFrom<i8> for Sign {
    type Error = String;
    fn try_from(v: i8) -> Result<Self, String> {
        match v {
            1 => Ok(Sign::Plus),
            -1 => Ok(Sign::Minus),
            _ => Err(format!("sign must be 1 or -1, got {v}")),
        }
    }
}

/// One tensor factor `X^x Z^z`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PauliLetter {
    pub x: bool,
    pub z: bool,
}

impl PauliLetter {
    pub const I: PauliLetter = PauliLetter { x: false, z: false };
    pub const X: PauliLetter = PauliLetter { x: true, z: false };
    pub const Z: PauliLetter = PauliLetter { x: false, z: true };
    pub const XZ: PauliLetter = PauliLetter { x: true, z: true };
    pub const ALL: [PauliLetter; 4] = [Self::I, Self::X, Self::Z, Self::XZ];

    pub fn is_identity(self) -> bool {
        !self.x && !self.z
    }

    pub fn as_str(self) -> &'static str {
        match (self.x, self.z) {
            (false, false) => "I",
            (true, false) => "X",
            (false, true) => "Z",
            (true, true) => "XZ",
        }
    }
}

impl fmt::Display for PauliLetter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Exact product of two letters: `X^xa Z^za X^xb Z^zb = (-1)^(za xb) X^(xa^xb) Z^(za^zb)`.
pub fn letter_mul(a: PauliLetter, b: PauliLetter) -> (Sign, PauliLetter) {
    (
        Sign::from_bit(a.z && b.x),
        PauliLetter {
            x: a.x ^ b.x,
            z: a.z ^ b.z,
        },
    )
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PauliError {
    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("malformed Pauli word {0:?}")]
    Malformed(String),
}

/// A signed word `±(P_0 ⊗ … ⊗ P_{n-1})`, index 0 being the top wire.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PauliOperator {
    pub sign: Sign,
    pub letters: Vec<PauliLetter>,
}

impl PauliOperator {
    pub fn new(sign: Sign, letters: Vec<PauliLetter>) -> Self {
        PauliOperator { sign, letters }
    }

    pub fn identity(n: usize) -> Self {
        PauliOperator::new(Sign::Plus, vec![PauliLetter::I; n])
    }

    /// The word with `letter` on wire `q` and I elsewhere.
    pub fn single(n: usize, q: usize, letter: PauliLetter) -> Self {
        let mut p = Self::identity(n);
        p.letters[q] = letter;
        p
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    /// True for ±I.
    pub fn is_scalar(&self) -> bool {
        self.letters.iter().all(|l| l.is_identity())
    }

    pub fn mul(&self, other: &PauliOperator) -> Result<PauliOperator, PauliError> {
        if self.len() != other.len() {
            return Err(PauliError::LengthMismatch(self.len(), other.len()));
        }
        let mut sign = self.sign * other.sign;
        let letters = self
            .letters
            .iter()
            .zip(&other.letters)
            .map(|(&a, &b)| {
                let (s, l) = letter_mul(a, b);
                sign = sign * s;
                l
            })
            .collect();
        Ok(PauliOperator { sign, letters })
    }

    /// Multiply `other` into `self` on the right, in place.
    pub(crate) fn mul_assign_unchecked(&mut self, other: &PauliOperator) {
        let mut minus = self.sign.is_minus() ^ other.sign.is_minus();
        for (a, &b) in self.letters.iter_mut().zip(&other.letters) {
            minus ^= a.z && b.x;
            a.x ^= b.x;
            a.z ^= b.z;
        }
        self.sign = Sign::from_bit(minus);
    }

    /// Prop 2.2: `p·p = +I` iff the number of XZ letters is even.
    pub fn squares_to_identity(&self) -> bool {
        self.letters.iter().filter(|l| l.x && l.z).count() % 2 == 0
    }

    pub fn commutes(&self, other: &PauliOperator) -> Result<bool, PauliError> {
        if self.len() != other.len() {
            return Err(PauliError::LengthMismatch(self.len(), other.len()));
        }
        Ok(!self.anticommutes_unchecked(other))
    }

    pub(crate) fn anticommutes_unchecked(&self, other: &PauliOperator) -> bool {
        self.letters
            .iter()
            .zip(&other.letters)
            .fold(false, |acc, (a, b)| acc ^ (a.x && b.z) ^ (a.z && b.x))
    }

    pub fn tensor(&self, other: &PauliOperator) -> PauliOperator {
        let mut letters = self.letters.clone();
        letters.extend_from_slice(&other.letters);
        PauliOperator::new(self.sign * other.sign, letters)
    }

    pub fn negated(&self) -> PauliOperator {
        PauliOperator::new(-self.sign, self.letters.clone())
    }

    /// Every signed word on `n` qubits, 2·4^n of them.
    pub fn all(n: usize) -> impl Iterator<Item = PauliOperator> {
        let count = 1usize << (2 * n);
        [Sign::Plus, Sign::Minus].into_iter().flat_map(move |sign| {
            (0..count).map(move |code| {
                let letters = (0..n)
                    .map(|q| PauliLetter::ALL[(code >> (2 * (n - 1 - q))) & 3])
                    .collect();
                PauliOperator::new(sign, letters)
            })
        })
    }
}

impl fmt::Display for PauliOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.sign.is_minus() {
            f.write_str("-")?;
        }
        for (i, l) in self.letters.iter().enumerate() {
            if i > 0 {
                f.write_str(".")?;
            }
            f.write_str(l.as_str())?;
        }
        Ok(())
    }
}

impl FromStr for PauliOperator {
    type Err = PauliError;

    fn from_str(s: &str) -> Result<Self, PauliError> {
        let (sign, body) = match s.strip_prefix('-') {
            Some(rest) => (Sign::Minus, rest),
            None => (Sign::Plus, s),
        };
        if body.is_empty() {
            return Ok(PauliOperator::new(sign, Vec::new()));
        }
        let letters = body
            .split('.')
            .map(|tok| match tok {
                "I" => Ok(PauliLetter::I),
                "X" => Ok(PauliLetter::X),
                "Z" => Ok(PauliLetter::Z),
                "XZ" => Ok(PauliLetter::XZ),
                _ => Err(PauliError::Malformed(s.to_string())),
            })
            .collect::<Result<_, _>>()?;
        Ok(PauliOperator::new(sign, letters))
    }
}
