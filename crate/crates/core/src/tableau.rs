//! Conjugation action of a real Clifford on the Pauli group.

use thiserror::Error;

use crate::circuit::{Circuit, Gate};
use crate::exact::{apply_gate, apply_to_basis_state, ExactError, RootTwo};
use crate::pauli::{PauliError, PauliLetter, PauliOperator, Sign};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum TableauError {
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("not a Pauli automorphism")]
    NotAutomorphism,
    #[error(transparent)]
    Pauli(#[from] PauliError),
    #[error(transparent)]
    Exact(#[from] ExactError),
}

/// Conjugate `p` by a single gate in place: `p ← g p g⁻¹`.
pub fn conjugate_pauli(g: &Gate, p: &mut PauliOperator) {
    let flip = |p: &mut PauliOperator| p.sign = -p.sign;
    match *g {
        Gate::MinusOne => {}
        Gate::H(q) => {
            let l = p.letters[q];
            if l.x && l.z {
                flip(p);
            }
            p.letters[q] = PauliLetter { x: l.z, z: l.x };
        }
        Gate::Z(q) => {
            if p.letters[q].x {
                flip(p);
            }
        }
        Gate::X(q) => {
            if p.letters[q].z {
                flip(p);
            }
        }
        Gate::CZ(a, b) => {
            let (la, lb) = (p.letters[a], p.letters[b]);
            if la.x && lb.x {
                flip(p);
            }
            p.letters[a].z ^= lb.x;
            p.letters[b].z ^= la.x;
        }
        _ => {
            for e in g.expand() {
                conjugate_pauli(&e, p);
            }
        }
    }
}

/// Signed images of every `Z_q` and `X_q`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Tableau {
    n: usize,
    z_images: Vec<PauliOperator>,
    x_images: Vec<PauliOperator>,
}

impl Tableau {
    pub fn identity(n: usize) -> Self {
        Tableau {
            n,
            z_images: (0..n)
                .map(|q| PauliOperator::single(n, q, PauliLetter::Z))
                .collect(),
            x_images: (0..n)
                .map(|q| PauliOperator::single(n, q, PauliLetter::X))
                .collect(),
        }
    }

    /// Build from explicit images; no validity check.
    pub fn from_images(z_images: Vec<PauliOperator>, x_images: Vec<PauliOperator>) -> Self {
        Tableau {
            n: z_images.len(),
            z_images,
            x_images,
        }
    }

    pub fn n_qubits(&self) -> usize {
        self.n
    }

    pub fn z_image(&self, q: usize) -> &PauliOperator {
        &self.z_images[q]
    }

    pub fn x_image(&self, q: usize) -> &PauliOperator {
        &self.x_images[q]
    }

    pub fn from_gate(g: &Gate, n: usize) -> Self {
        let mut t = Tableau::identity(n);
        t.then_gate(g);
        t
    }

    /// Tableau of a circuit; the first gate acts first.
    pub fn from_circuit(c: &Circuit) -> Self {
        let mut t = Tableau::identity(c.n_qubits());
        for g in c.gates() {
            t.then_gate(g);
        }
        t
    }

    /// Replace the operator `C` by `g C`.
    pub fn then_gate(&mut self, g: &Gate) {
        if g.is_primitive() || matches!(g, Gate::X(_)) {
            for p in self.z_images.iter_mut().chain(self.x_images.iter_mut()) {
                conjugate_pauli(g, p);
            }
        } else {
            for e in g.expand() {
                self.then_gate(&e);
            }
        }
    }

    pub fn then_circuit(&mut self, c: &Circuit) {
        for g in c.gates() {
            self.then_gate(g);
        }
    }

    /// `C • p`, substituting images letter by letter.
    pub fn apply(&self, p: &PauliOperator) -> Result<PauliOperator, TableauError> {
        if p.len() != self.n {
            return Err(TableauError::DimensionMismatch(self.n, p.len()));
        }
        Ok(self.apply_unchecked(p))
    }

    pub(crate) fn apply_unchecked(&self, p: &PauliOperator) -> PauliOperator {
        let mut out = PauliOperator::identity(self.n);
        out.sign = p.sign;
        for (q, l) in p.letters.iter().enumerate() {
            if l.x {
                out.mul_assign_unchecked(&self.x_images[q]);
            }
            if l.z {
                out.mul_assign_unchecked(&self.z_images[q]);
            }
        }
        out
    }

    /// Action of `A ∘ B`: `b` is applied to a Pauli first, then `a`.
    pub fn compose(a: &Tableau, b: &Tableau) -> Result<Tableau, TableauError> {
        if a.n != b.n {
            return Err(TableauError::DimensionMismatch(a.n, b.n));
        }
        Ok(Tableau {
            n: a.n,
            z_images: b.z_images.iter().map(|p| a.apply_unchecked(p)).collect(),
            x_images: b.x_images.iter().map(|p| a.apply_unchecked(p)).collect(),
        })
    }

    /// Preimage of `g`. The x and z bits of the preimage on wire q are the
    /// symplectic products of `g` with the images of `Z_q` and `X_q`.
    pub fn preimage(&self, g: &PauliOperator) -> PauliOperator {
        let letters = (0..self.n)
            .map(|q| PauliLetter {
                x: g.anticommutes_unchecked(&self.z_images[q]),
                z: g.anticommutes_unchecked(&self.x_images[q]),
            })
            .collect();
        let mut p = PauliOperator::new(Sign::Plus, letters);
        if self.apply_unchecked(&p).sign != g.sign {
            p.sign = Sign::Minus;
        }
        p
    }

    pub fn inverse(&self) -> Tableau {
        Tableau {
            n: self.n,
            z_images: (0..self.n)
                .map(|q| self.preimage(&PauliOperator::single(self.n, q, PauliLetter::Z)))
                .collect(),
            x_images: (0..self.n)
                .map(|q| self.preimage(&PauliOperator::single(self.n, q, PauliLetter::X)))
                .collect(),
        }
    }

    /// Images square to +I, and the Z/X images satisfy the symplectic relations.
    pub fn is_pauli_automorphism(&self) -> bool {
        let n = self.n;
        if self.z_images.len() != n
            || self.x_images.len() != n
            || self
                .z_images
                .iter()
                .chain(&self.x_images)
                .any(|p| p.len() != n)
        {
            return false;
        }
        let all: Vec<&PauliOperator> = self.z_images.iter().chain(&self.x_images).collect();
        if all.iter().any(|p| !p.squares_to_identity()) {
            return false;
        }
        for i in 0..2 * n {
            for j in i + 1..2 * n {
                let should_anticommute = j == i + n;
                if all[i].anticommutes_unchecked(all[j]) != should_anticommute {
                    return false;
                }
            }
        }
        true
    }

    /// The action on the top `k` wires, if every image of a top-wire generator
    /// is the identity on the wires below.
    pub fn restrict_top(&self, k: usize) -> Option<Tableau> {
        let cut = |p: &PauliOperator| -> Option<PauliOperator> {
            p.letters[k..]
                .iter()
                .all(|l| l.is_identity())
                .then(|| PauliOperator::new(p.sign, p.letters[..k].to_vec()))
        };
        Some(Tableau {
            n: k,
            z_images: self.z_images[..k].iter().map(cut).collect::<Option<_>>()?,
            x_images: self.x_images[..k].iter().map(cut).collect::<Option<_>>()?,
        })
    }

    /// Bit-packed key for small tableaux (n ≤ 5).
    pub fn packed(&self) -> u128 {
        debug_assert!(self.n <= 5);
        let mut key: u128 = 0;
        for p in self.z_images.iter().chain(&self.x_images) {
            key = (key << 1) | p.sign.is_minus() as u128;
            for l in &p.letters {
                key = (key << 2) | ((l.x as u128) << 1) | l.z as u128;
            }
        }
        key
    }
}

/// Tableau plus the exact image of `e_0`; equal exactly when the operators are.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct OperatorFingerprint {
    pub tableau: Tableau,
    pub column0: Vec<RootTwo>,
}

pub fn fingerprint(c: &Circuit) -> Result<OperatorFingerprint, TableauError> {
    Ok(OperatorFingerprint {
        tableau: Tableau::from_circuit(c),
        column0: apply_to_basis_state(c, 0)?,
    })
}

/// Tableau and column 0 updated together, gate by gate.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Tracker {
    pub tableau: Tableau,
    pub column0: Vec<RootTwo>,
}

impl Tracker {
    pub fn identity(n: usize) -> Self {
        let mut column0 = vec![RootTwo::zero(); 1 << n];
        column0[0] = RootTwo::one();
        Tracker {
            tableau: Tableau::identity(n),
            column0,
        }
    }

    pub fn then_gate(&mut self, g: &Gate) {
        self.tableau.then_gate(g);
        let n = self.tableau.n_qubits();
        apply_gate(g, n, &mut self.column0).expect("Clifford column stays in the ring");
    }

    pub fn then_gates<'a>(&mut self, gs: impl IntoIterator<Item = &'a Gate>) {
        for g in gs {
            self.then_gate(g);
        }
    }

    pub fn fingerprint(self) -> OperatorFingerprint {
        OperatorFingerprint {
            tableau: self.tableau,
            column0: self.column0,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> PauliOperator {
        s.parse().unwrap()
    }

    fn circ(s: &str) -> Circuit {
        s.parse().unwrap()
    }

    #[test]
    fn hadamard_and_cz() {
        let h = Tableau::from_gate(&Gate::H(0), 1);
        assert_eq!(h.z_image(0), &p("X"));
        assert_eq!(h.x_image(0), &p("Z"));
        let cz = Tableau::from_gate(&Gate::CZ(0, 1), 2);
        assert_eq!(cz.x_image(0), &p("X.Z"));
        assert_eq!(cz.x_image(1), &p("Z.X"));
        assert_eq!(cz.z_image(0), &p("Z.I"));
        assert_eq!(cz.z_image(1), &p("I.Z"));
    }

    #[test]
    fn apply_examples() {
        let id = Tableau::identity(2);
        assert_eq!(id.apply(&p("-X.XZ")).unwrap(), p("-X.XZ"));
        let z = Tableau::from_gate(&Gate::Z(0), 1);
        assert_eq!(z.apply(&p("X")).unwrap(), p("-X"));
        let a2 = Tableau::from_gate(&Gate::Gen(crate::circuit::Generator::A2, 0), 1);
        assert_eq!(a2.apply(&p("X")).unwrap(), p("Z"));
        assert!(id.apply(&p("X")).is_err());
    }

    #[test]
    fn inverse_and_compose() {
        let c = circ("qubits 3\nH 0\nCZ 0 1\nZ 2\nH 1\nCZ 1 2\nX 0\nCXZ 2 0");
        let t = Tableau::from_circuit(&c);
        assert_eq!(
            Tableau::compose(&t, &t.inverse()).unwrap(),
            Tableau::identity(3)
        );
        assert_eq!(
            Tableau::compose(&t.inverse(), &t).unwrap(),
            Tableau::identity(3)
        );
        let c2 = circ("qubits 3\nCZ 0 2\nH 2\nB3 1");
        let mut both = c.clone();
        both.extend(&c2);
        assert_eq!(
            Tableau::from_circuit(&both),
            Tableau::compose(&Tableau::from_circuit(&c2), &t).unwrap()
        );
    }

    #[test]
    fn automorphism_check() {
        assert!(Tableau::identity(3).is_pauli_automorphism());
        let bad = Tableau::from_images(vec![p("X")], vec![p("X")]);
        assert!(!bad.is_pauli_automorphism());
        let bad_square = Tableau::from_images(vec![p("XZ")], vec![p("X")]);
        assert!(!bad_square.is_pauli_automorphism());
    }

    #[test]
    fn fingerprints() {
        let e = fingerprint(&circ("qubits 1")).unwrap();
        assert_eq!(e.tableau, Tableau::identity(1));
        assert_eq!(e.column0, vec![RootTwo::one(), RootTwo::zero()]);
        let m = fingerprint(&circ("qubits 1\nMINUS1")).unwrap();
        assert_eq!(m.tableau, Tableau::identity(1));
        assert_eq!(m.column0, vec![RootTwo::new(-1, 0), RootTwo::zero()]);
        assert_eq!(fingerprint(&circ("qubits 1\nH 0\nH 0")).unwrap(), e);
    }

    #[test]
    fn restriction() {
        let t = Tableau::from_circuit(&circ("qubits 2\nH 0"));
        assert_eq!(
            t.restrict_top(1).unwrap(),
            Tableau::from_gate(&Gate::H(0), 1)
        );
        let t = Tableau::from_circuit(&circ("qubits 2\nCZ 0 1"));
        assert!(t.restrict_top(1).is_none());
    }
}
