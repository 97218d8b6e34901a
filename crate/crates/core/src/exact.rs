//! Exact dense matrices over numbers of the form a/√2^k.

use std::fmt;
use std::ops::{Mul, Neg};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::circuit::{Circuit, Gate};
use crate::pauli::{PauliLetter, PauliOperator, Sign};

pub const DEFAULT_MATRIX_CAP: usize = 10;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ExactError {
    #[error("{0} qubits exceeds the dense matrix cap of {1}")]
    TooLarge(usize, usize),
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("sum leaves the a/sqrt2^k form")]
    OutsideRing,
    #[error("matrix is not orthogonal")]
    NotOrthogonal,
    #[error("basis index {0} out of range for dimension {1}")]
    IndexOutOfRange(usize, usize),
}

/// The number `numerator / √2^half_power`, kept canonical: a zero has k = 0,
/// and otherwise no step a → a/2, k → k−2 applies.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct RootTwo {
    numerator: BigInt,
    half_power: u32,
}

impl RootTwo {
    pub fn new(numerator: impl Into<BigInt>, half_power: u32) -> Self {
        let mut r = RootTwo {
            numerator: numerator.into(),
            half_power,
        };
        r.canonicalize();
        r
    }

    pub fn zero() -> Self {
        RootTwo::new(0, 0)
    }

    pub fn one() -> Self {
        RootTwo::new(1, 0)
    }

    pub fn numerator(&self) -> &BigInt {
        &self.numerator
    }

    pub fn half_power(&self) -> u32 {
        self.half_power
    }

    pub fn is_zero(&self) -> bool {
        self.numerator.is_zero()
    }

    fn canonicalize(&mut self) {
        if self.numerator.is_zero() {
            self.half_power = 0;
            return;
        }
        while self.half_power >= 2 && self.numerator.is_even() {
            self.numerator /= 2;
            self.half_power -= 2;
        }
    }

    /// Exact sum, or `None` when the exponents have different parity and
    /// the result is not of the form a/√2^k.
    pub fn checked_add(&self, other: &RootTwo) -> Option<RootTwo> {
        if self.is_zero() {
            return Some(other.clone());
        }
        if other.is_zero() {
            return Some(self.clone());
        }
        if (self.half_power + other.half_power) % 2 == 1 {
            return None;
        }
        let k = self.half_power.max(other.half_power);
        let a = &self.numerator << ((k - self.half_power) / 2);
        let b = &other.numerator << ((k - other.half_power) / 2);
        Some(RootTwo::new(a + b, k))
    }

    pub fn checked_sub(&self, other: &RootTwo) -> Option<RootTwo> {
        self.checked_add(&-other)
    }

    /// Value as a float, for display and debugging only.
    pub fn to_f64(&self) -> f64 {
        let a: f64 = self.numerator.to_string().parse().unwrap_or(f64::NAN);
        a / 2f64.sqrt().powi(self.half_power as i32)
    }
}

impl Mul for &RootTwo {
    type Output = RootTwo;
    fn mul(self, rhs: &RootTwo) -> RootTwo {
        RootTwo::new(
            &self.numerator * &rhs.numerator,
            self.half_power + rhs.half_power,
        )
    }
}

impl Neg for &RootTwo {
    type Output = RootTwo;
    fn neg(self) -> RootTwo {
        RootTwo {
            numerator: -&self.numerator,
            half_power: self.half_power,
        }
    }
}

impl Neg for RootTwo {
    type Output = RootTwo;
    fn neg(self) -> RootTwo {
        -&self
    }
}

impl fmt::Display for RootTwo {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/r^{}", self.numerator, self.half_power)
    }
}

/// A square matrix of dimension 2^n over [`RootTwo`], row-major.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ExactMatrix {
    n: usize,
    entries: Vec<RootTwo>,
}

impl ExactMatrix {
    pub fn identity(n: usize) -> Self {
        let dim = 1 << n;
        let mut entries = vec![RootTwo::zero(); dim * dim];
        for i in 0..dim {
            entries[i * dim + i] = RootTwo::one();
        }
        ExactMatrix { n, entries }
    }

    pub fn from_rows(n: usize, entries: Vec<RootTwo>) -> Self {
        assert_eq!(entries.len(), 1 << (2 * n));
        ExactMatrix { n, entries }
    }

    pub fn n_qubits(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        1 << self.n
    }

    pub fn get(&self, row: usize, col: usize) -> &RootTwo {
        &self.entries[row * self.dim() + col]
    }

    pub fn scaled(&self, s: Sign) -> ExactMatrix {
        match s {
            Sign::Plus => self.clone(),
            Sign::Minus => ExactMatrix {
                n: self.n,
                entries: self.entries.iter().map(|e| -e).collect(),
            },
        }
    }

    pub fn transpose(&self) -> ExactMatrix {
        let d = self.dim();
        let mut entries = Vec::with_capacity(d * d);
        for r in 0..d {
            for c in 0..d {
                entries.push(self.get(c, r).clone());
            }
        }
        ExactMatrix { n: self.n, entries }
    }

    pub fn mul(&self, other: &ExactMatrix) -> Result<ExactMatrix, ExactError> {
        if self.n != other.n {
            return Err(ExactError::DimensionMismatch(self.dim(), other.dim()));
        }
        let d = self.dim();
        let mut entries = Vec::with_capacity(d * d);
        for r in 0..d {
            for c in 0..d {
                let mut acc = RootTwo::zero();
                for j in 0..d {
                    let a = self.get(r, j);
                    let b = other.get(j, c);
                    if a.is_zero() || b.is_zero() {
                        continue;
                    }
                    acc = acc.checked_add(&(a * b)).ok_or(ExactError::OutsideRing)?;
                }
                entries.push(acc);
            }
        }
        Ok(ExactMatrix { n: self.n, entries })
    }

    pub fn is_orthogonal(&self) -> bool {
        matches!(self.transpose().mul(self), Ok(m) if m == ExactMatrix::identity(self.n))
    }

    /// Rows of `a/r^k` entries, tab-separated.
    pub fn to_text(&self) -> String {
        let d = self.dim();
        let mut out = String::new();
        for r in 0..d {
            let row: Vec<String> = (0..d).map(|c| self.get(r, c).to_string()).collect();
            out.push_str(&row.join("\t"));
            out.push('\n');
        }
        out
    }
}

/// Bit of basis index `i` belonging to wire `q` (wire 0 is the most significant bit).
fn bit(n: usize, q: usize) -> usize {
    1 << (n - 1 - q)
}

/// Matrix of a signed Pauli word: column i has `±(-1)^(z·i)` at row `i ⊕ x`.
pub fn pauli_matrix(p: &PauliOperator) -> ExactMatrix {
    let n = p.len();
    let d = 1 << n;
    let (xmask, zmask) = masks(p);
    let mut entries = vec![RootTwo::zero(); d * d];
    for col in 0..d {
        let minus = p.sign.is_minus() ^ ((col & zmask).count_ones() % 2 == 1);
        entries[(col ^ xmask) * d + col] = RootTwo::new(if minus { -1 } else { 1 }, 0);
    }
    ExactMatrix { n, entries }
}

fn masks(p: &PauliOperator) -> (usize, usize) {
    let n = p.len();
    let mut xmask = 0;
    let mut zmask = 0;
    for (q, l) in p.letters.iter().enumerate() {
        if l.x {
            xmask |= bit(n, q);
        }
        if l.z {
            zmask |= bit(n, q);
        }
    }
    (xmask, zmask)
}

/// The signed Pauli word whose matrix is `m`, if there is one.
pub fn matrix_to_signed_pauli(m: &ExactMatrix) -> Option<PauliOperator> {
    let n = m.n_qubits();
    let d = m.dim();
    let row0 = (0..d).find(|&r| !m.get(r, 0).is_zero())?;
    let v0 = m.get(row0, 0);
    let sign = if *v0 == RootTwo::one() {
        Sign::Plus
    } else if *v0 == RootTwo::new(-1, 0) {
        Sign::Minus
    } else {
        return None;
    };
    let letters = (0..n)
        .map(|q| {
            let col = bit(n, q);
            let z = *m.get(row0 ^ col, col) != *v0;
            PauliLetter {
                x: row0 & bit(n, q) != 0,
                z,
            }
        })
        .collect();
    let p = PauliOperator::new(sign, letters);
    (pauli_matrix(&p) == *m).then_some(p)
}

fn check_cap(n: usize, cap: usize) -> Result<(), ExactError> {
    if n > cap {
        Err(ExactError::TooLarge(n, cap))
    } else {
        Ok(())
    }
}

/// Matrix of a single gate, embedded on `n` qubits.
pub fn gate_matrix(g: &Gate, n: usize) -> Result<ExactMatrix, ExactError> {
    check_cap(n, DEFAULT_MATRIX_CAP)?;
    let mut cols: Vec<Vec<RootTwo>> = (0..1usize << n).map(|i| basis(n, i)).collect();
    for col in cols.iter_mut() {
        apply_gate_to_vector(g, n, col)?;
    }
    Ok(from_columns(n, cols))
}

fn basis(n: usize, i: usize) -> Vec<RootTwo> {
    let mut v = vec![RootTwo::zero(); 1 << n];
    v[i] = RootTwo::one();
    v
}

fn from_columns(n: usize, cols: Vec<Vec<RootTwo>>) -> ExactMatrix {
    let d = 1 << n;
    let mut entries = vec![RootTwo::zero(); d * d];
    for (c, col) in cols.into_iter().enumerate() {
        for (r, v) in col.into_iter().enumerate() {
            entries[r * d + c] = v;
        }
    }
    ExactMatrix { n, entries }
}

/// Matrix `G_k ⋯ G_1` of a circuit whose first gate acts first.
pub fn circuit_matrix(c: &Circuit) -> Result<ExactMatrix, ExactError> {
    circuit_matrix_capped(c, DEFAULT_MATRIX_CAP)
}

pub fn circuit_matrix_capped(c: &Circuit, cap: usize) -> Result<ExactMatrix, ExactError> {
    let n = c.n_qubits();
    check_cap(n, cap)?;
    let prims = c.expand_all();
    let mut cols = Vec::with_capacity(1 << n);
    for i in 0..1usize << n {
        let mut v = basis(n, i);
        for g in prims.gates() {
            apply_gate_to_vector(g, n, &mut v)?;
        }
        cols.push(v);
    }
    Ok(from_columns(n, cols))
}

/// `A B Aᵀ`, which is `A B A⁻¹` for orthogonal `A`.
pub fn conjugate(a: &ExactMatrix, b: &ExactMatrix) -> Result<ExactMatrix, ExactError> {
    if a.n_qubits() != b.n_qubits() {
        return Err(ExactError::DimensionMismatch(a.dim(), b.dim()));
    }
    if !a.is_orthogonal() {
        return Err(ExactError::NotOrthogonal);
    }
    a.mul(b)?.mul(&a.transpose())
}

/// Image of the basis vector `e_index` under the circuit, gate by gate.
pub fn apply_to_basis_state(c: &Circuit, index: usize) -> Result<Vec<RootTwo>, ExactError> {
    let n = c.n_qubits();
    check_cap(n, 2 * DEFAULT_MATRIX_CAP)?;
    if index >= 1 << n {
        return Err(ExactError::IndexOutOfRange(index, 1 << n));
    }
    let mut v = basis(n, index);
    for g in c.gates() {
        apply_gate(g, n, &mut v)?;
    }
    Ok(v)
}

/// Apply any gate (expanding derived and generator gates) to a state vector.
pub fn apply_gate(g: &Gate, n: usize, v: &mut [RootTwo]) -> Result<(), ExactError> {
    if g.is_primitive() {
        apply_gate_to_vector(g, n, v)
    } else {
        for p in g.expand() {
            apply_gate_to_vector(&p, n, v)?;
        }
        Ok(())
    }
}

fn apply_gate_to_vector(g: &Gate, n: usize, v: &mut [RootTwo]) -> Result<(), ExactError> {
    match *g {
        Gate::MinusOne => {
            for e in v.iter_mut() {
                *e = -&*e;
            }
        }
        Gate::H(q) => {
            let b = bit(n, q);
            for i in 0..v.len() {
                if i & b != 0 {
                    continue;
                }
                let (lo, hi) = (&v[i], &v[i | b]);
                let s = lo.checked_add(hi).ok_or(ExactError::OutsideRing)?;
                let t = lo.checked_sub(hi).ok_or(ExactError::OutsideRing)?;
                v[i] = RootTwo::new(s.numerator, s.half_power + 1);
                v[i | b] = RootTwo::new(t.numerator, t.half_power + 1);
            }
        }
        Gate::Z(q) => {
            let b = bit(n, q);
            for (i, e) in v.iter_mut().enumerate() {
                if i & b != 0 {
                    *e = -&*e;
                }
            }
        }
        Gate::CZ(a, c) => {
            let m = bit(n, a) | bit(n, c);
            for (i, e) in v.iter_mut().enumerate() {
                if i & m == m {
                    *e = -&*e;
                }
            }
        }
        _ => {
            for p in g.expand() {
                apply_gate_to_vector(&p, n, v)?;
            }
        }
    }
    Ok(())
}

impl RootTwo {
    /// Sign of the value: -1, 0 or 1.
    pub fn signum(&self) -> i8 {
        if self.numerator.is_zero() {
            0
        } else if self.numerator.is_negative() {
            -1
        } else {
            1
        }
    }

    pub fn is_one(&self) -> bool {
        self.half_power == 0 && self.numerator.is_one()
    }
}
