//! The staged normal form and its synthesis from a tableau.
//!
//! Stage i (for i = n down to 1) acts on the top i wires. Its Z-circuit puts
//! an A gate on wire m, climbs with B gates on the pairs (m−1, m) … (0, 1) and
//! ends with a C gate on wire 0. Its X-circuit descends with D gates on the
//! pairs (0, 1) … (i−2, i−1) and ends with an E gate on wire i−1.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::circuit::{Circuit, Gate, GenKind, Generator, WireColor};
use crate::pauli::{PauliLetter, PauliOperator, Sign};
use crate::tableau::{conjugate_pauli, fingerprint, Tableau, TableauError};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum NfError {
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("no {0:?} generator matches {1}")]
    NoMatch(GenKind, String),
    #[error("several {0:?} generators match {1}: {2:?}")]
    MultipleMatches(GenKind, String, Vec<Generator>),
    #[error("tableau is not a Pauli automorphism")]
    NotAutomorphism,
    #[error("reference circuit does not match the tableau up to sign")]
    ReferenceMismatch,
    #[error(transparent)]
    Tableau(#[from] TableauError),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ZCircuit {
    pub a: Generator,
    /// B gates in application order, on pairs (m−1, m) down to (0, 1).
    pub bs: Vec<Generator>,
    pub c: Generator,
    pub m: usize,
}

impl ZCircuit {
    pub fn gates(&self) -> Vec<Gate> {
        let mut out = vec![Gate::Gen(self.a, self.m)];
        out.extend(
            self.bs
                .iter()
                .enumerate()
                .map(|(k, &b)| Gate::Gen(b, self.m - 1 - k)),
        );
        out.push(Gate::Gen(self.c, 0));
        out
    }

    /// Number of color-swapping B gates (B4 and B8).
    pub fn swap_count(&self) -> usize {
        self.bs
            .iter()
            .filter(|&&b| matches!(b, Generator::B4 | Generator::B8))
            .count()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct XCircuit {
    /// D gates on pairs (0, 1) … (i−2, i−1).
    pub ds: Vec<Generator>,
    pub e: Generator,
}

impl XCircuit {
    pub fn gates(&self) -> Vec<Gate> {
        let mut out: Vec<Gate> = self
            .ds
            .iter()
            .enumerate()
            .map(|(j, &d)| Gate::Gen(d, j))
            .collect();
        out.push(Gate::Gen(self.e, self.ds.len()));
        out
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Stage {
    pub x: XCircuit,
    pub z: ZCircuit,
}

impl Stage {
    pub fn gates(&self) -> Vec<Gate> {
        let mut g = self.z.gates();
        g.extend(self.x.gates());
        g
    }

    /// Wires the stage acts on.
    pub fn width(&self) -> usize {
        self.x.ds.len() + 1
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct NormalForm {
    pub n: usize,
    pub sign: Sign,
    /// Stage for n wires first, down to the 1-wire stage.
    pub stages: Vec<Stage>,
}

impl NormalForm {
    pub fn identity(n: usize) -> Self {
        identity_normal_form(n)
    }

    /// The clean gate sequence, without the sign.
    pub fn clean_gates(&self) -> Vec<Gate> {
        self.stages.iter().flat_map(|s| s.gates()).collect()
    }

    pub fn to_circuit(&self) -> Circuit {
        let mut gates = self.clean_gates();
        if self.sign.is_minus() {
            gates.push(Gate::MinusOne);
        }
        Circuit::new(self.n, gates).expect("normal form wires are in range")
    }

    /// Recognize a normal circuit: the stage grammar, one optional trailing
    /// MINUS1, and consistent wire colors.
    pub fn from_circuit(c: &Circuit) -> Option<NormalForm> {
        let n = c.n_qubits();
        let mut gates = c.gates();
        let mut sign = Sign::Plus;
        if let Some((Gate::MinusOne, rest)) = gates.split_last() {
            sign = Sign::Minus;
            gates = rest;
        }
        let mut it = gates.iter();
        let mut next_gen = |kind: GenKind, wire: Option<usize>| -> Option<(Generator, usize)> {
            match it.next()? {
                Gate::Gen(g, q) if g.kind() == kind && wire.is_none_or(|w| w == *q) => {
                    Some((*g, *q))
                }
                _ => None,
            }
        };
        let mut stages = Vec::with_capacity(n);
        for i in (1..=n).rev() {
            let (a, m) = next_gen(GenKind::A, None)?;
            if m >= i {
                return None;
            }
            let bs = (0..m)
                .rev()
                .map(|j| next_gen(GenKind::B, Some(j)).map(|x| x.0))
                .collect::<Option<Vec<_>>>()?;
            let c = next_gen(GenKind::C, Some(0))?.0;
            let ds = (0..i - 1)
                .map(|j| next_gen(GenKind::D, Some(j)).map(|x| x.0))
                .collect::<Option<Vec<_>>>()?;
            let e = next_gen(GenKind::E, Some(i - 1))?.0;
            stages.push(Stage {
                z: ZCircuit { a, bs, c, m },
                x: XCircuit { ds, e },
            });
        }
        if gates.len() != count_gates(&stages) {
            return None;
        }
        let nf = NormalForm { n, sign, stages };
        nf.to_circuit().type_check().ok()?;
        Some(nf)
    }
}

fn count_gates(stages: &[Stage]) -> usize {
    stages.iter().map(|s| s.gates().len()).sum()
}

pub fn is_normal(c: &Circuit) -> bool {
    NormalForm::from_circuit(c).is_some()
}

/// A1 on the bottom wire of every stage, then all B1, C1, all D1 and E1.
pub fn identity_normal_form(n: usize) -> NormalForm {
    let stages = (1..=n)
        .rev()
        .map(|i| Stage {
            z: ZCircuit {
                a: Generator::A1,
                bs: vec![Generator::B1; i - 1],
                c: Generator::C1,
                m: i - 1,
            },
            x: XCircuit {
                ds: vec![Generator::D1; i - 1],
                e: Generator::E1,
            },
        })
        .collect();
    NormalForm {
        n,
        sign: Sign::Plus,
        stages,
    }
}

/// Required image shape for [`select_generator`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ActionPattern {
    /// The image must equal this word exactly.
    Exact(PauliOperator),
    /// The image must equal this word up to sign.
    UpToSign(PauliOperator),
    /// Top letter Z on a simple output or XZ on a double output, I below, any sign.
    ColoredTop,
    /// I on top, X or XZ on the bottom wire, any sign.
    LadderDown,
}

fn colored_letter(c: WireColor) -> Option<PauliLetter> {
    match c {
        WireColor::Simple => Some(PauliLetter::Z),
        WireColor::Double => Some(PauliLetter::XZ),
        WireColor::Plain => None,
    }
}

fn pattern_matches(g: Generator, image: &PauliOperator, pattern: &ActionPattern) -> bool {
    match pattern {
        ActionPattern::Exact(w) => image == w,
        ActionPattern::UpToSign(w) => image.letters == w.letters,
        ActionPattern::ColoredTop => {
            let top = g.signature().1[0];
            colored_letter(top) == Some(image.letters[0])
                && image.letters[1..].iter().all(|l| l.is_identity())
        }
        ActionPattern::LadderDown => {
            image.letters.len() == 2 && image.letters[0].is_identity() && image.letters[1].x
        }
    }
}

/// The unique generator of `kind` with the given input colors whose
/// conjugation maps `source` (a word on the generator's own wires) to `pattern`.
pub fn select_generator(
    kind: GenKind,
    input_colors: &[WireColor],
    source: &PauliOperator,
    pattern: &ActionPattern,
) -> Result<Generator, NfError> {
    let hits: Vec<Generator> = kind
        .members()
        .iter()
        .copied()
        .filter(|g| g.signature().0 == input_colors)
        .filter(|&g| {
            let mut image = source.clone();
            conjugate_pauli(&Gate::Gen(g, 0), &mut image);
            pattern_matches(g, &image, pattern)
        })
        .collect();
    match hits.as_slice() {
        [g] => Ok(*g),
        [] => Err(NfError::NoMatch(kind, source.to_string())),
        _ => Err(NfError::MultipleMatches(kind, source.to_string(), hits)),
    }
}

/// Source words of the generator action table, one row each.
const ACTION_SOURCES: &[(Generator, &str)] = {
    use Generator::*;
    &[
        (A1, "Z"),
        (A2, "X"),
        (A3, "XZ"),
        (B1, "I.Z"),
        (B2, "X.Z"),
        (B3, "Z.Z"),
        (B4, "XZ.Z"),
        (B5, "I.XZ"),
        (B6, "X.XZ"),
        (B7, "Z.XZ"),
        (B8, "XZ.XZ"),
        (C1, "Z"),
        (C2, "Z"),
        (D1, "X.I"),
        (D2, "X.X"),
        (D3, "X.Z"),
        (D4, "X.XZ"),
        (D1, "XZ.I"),
        (D2, "XZ.X"),
        (D3, "XZ.Z"),
        (D4, "XZ.XZ"),
        (D1, "Z.I"),
        (D2, "Z.I"),
        (D3, "Z.I"),
        (D4, "Z.I"),
        (E1, "X"),
        (E2, "X"),
        (E1, "Z"),
        (E2, "Z"),
    ]
};

/// The conjugation action of each generator on the words the ladders feed it,
/// computed from tableaux: `(generator, source, image)`.
pub fn action_table() -> Vec<(Generator, PauliOperator, PauliOperator)> {
    ACTION_SOURCES
        .iter()
        .map(|&(g, src)| {
            let source: PauliOperator = src.parse().expect("table words parse");
            let mut image = source.clone();
            conjugate_pauli(&Gate::Gen(g, 0), &mut image);
            (g, source, image)
        })
        .collect()
}

fn window(p: &PauliOperator, from: usize, len: usize, sign: Sign) -> PauliOperator {
    PauliOperator::new(sign, p.letters[from..from + len].to_vec())
}

fn check_hermitian_nonscalar(p: &PauliOperator, what: &str) -> Result<(), NfError> {
    if !p.squares_to_identity() {
        return Err(NfError::Precondition(format!(
            "{what} = {p} does not square to I"
        )));
    }
    if p.is_scalar() {
        return Err(NfError::Precondition(format!("{what} = {p} is a scalar")));
    }
    Ok(())
}

/// The Z-circuit `L` on `p.len()` wires with `L • p = +Z⊗I⊗…⊗I`.
pub fn build_z_circuit(p: &PauliOperator) -> Result<ZCircuit, NfError> {
    check_hermitian_nonscalar(p, "p")?;
    let m = p.letters.iter().rposition(|l| !l.is_identity()).unwrap();
    let mut cur = p.clone();
    let a = select_generator(
        GenKind::A,
        &[WireColor::Plain],
        &window(&cur, m, 1, Sign::Plus),
        &ActionPattern::ColoredTop,
    )?;
    conjugate_pauli(&Gate::Gen(a, m), &mut cur);
    let mut color = a.signature().1[0];
    let mut bs = Vec::with_capacity(m);
    for j in (0..m).rev() {
        let b = select_generator(
            GenKind::B,
            &[WireColor::Plain, color],
            &window(&cur, j, 2, Sign::Plus),
            &ActionPattern::ColoredTop,
        )?;
        conjugate_pauli(&Gate::Gen(b, j), &mut cur);
        color = b.signature().1[0];
        bs.push(b);
    }
    if color != WireColor::Simple {
        return Err(NfError::Precondition(format!(
            "Z-circuit for {p} ends on a {color:?} wire"
        )));
    }
    let c = select_generator(
        GenKind::C,
        &[WireColor::Simple],
        &window(&cur, 0, 1, cur.sign),
        &ActionPattern::Exact(PauliOperator::single(1, 0, PauliLetter::Z)),
    )?;
    Ok(ZCircuit { a, bs, c, m })
}

/// The X-circuit `M` on `q.len()` wires with `M • q = +I⊗…⊗I⊗X`.
pub fn build_x_circuit(q: &PauliOperator) -> Result<XCircuit, NfError> {
    check_hermitian_nonscalar(q, "q")?;
    let n = q.len();
    if !q.letters[0].x {
        return Err(NfError::Precondition(format!(
            "q = {q} commutes with Z on the top wire"
        )));
    }
    let mut cur = q.clone();
    let mut ds = Vec::with_capacity(n - 1);
    for j in 0..n - 1 {
        let d = select_generator(
            GenKind::D,
            &[WireColor::Plain, WireColor::Plain],
            &window(&cur, j, 2, Sign::Plus),
            &ActionPattern::LadderDown,
        )?;
        conjugate_pauli(&Gate::Gen(d, j), &mut cur);
        ds.push(d);
    }
    let e = select_generator(
        GenKind::E,
        &[WireColor::Plain],
        &window(&cur, n - 1, 1, cur.sign),
        &ActionPattern::Exact(PauliOperator::single(1, 0, PauliLetter::X)),
    )?;
    Ok(XCircuit { ds, e })
}

/// The stage `(L, M)` with `ML • p = I⊗…⊗Z` and `ML • q = I⊗…⊗X`.
pub fn build_stage(p: &PauliOperator, q: &PauliOperator) -> Result<Stage, NfError> {
    check_hermitian_nonscalar(q, "q")?;
    if p.len() != q.len() || !p.anticommutes_unchecked(q) {
        return Err(NfError::Precondition(format!(
            "{p} and {q} must anticommute"
        )));
    }
    let z = build_z_circuit(p)?;
    let mut q2 = q.clone();
    for g in z.gates() {
        conjugate_pauli(&g, &mut q2);
    }
    let x = build_x_circuit(&q2)?;
    Ok(Stage { x, z })
}

/// Normal form whose conjugation action is `t`. With a reference circuit the
/// sign is chosen so the normal form equals it; otherwise the sign is +1.
pub fn synthesize(t: &Tableau, reference: Option<&Circuit>) -> Result<NormalForm, NfError> {
    if !t.is_pauli_automorphism() {
        return Err(NfError::NotAutomorphism);
    }
    let n = t.n_qubits();
    let mut stages = Vec::with_capacity(n);
    let mut cur = t.clone();
    for i in (1..=n).rev() {
        let p = cur.preimage(&PauliOperator::single(i, i - 1, PauliLetter::Z));
        let q = cur.preimage(&PauliOperator::single(i, i - 1, PauliLetter::X));
        let stage = build_stage(&p, &q)?;
        let ml = Tableau::from_circuit(&Circuit::new(i, stage.gates()).expect("stage fits"));
        let rest = Tableau::compose(&cur, &ml.inverse())?;
        cur = rest
            .restrict_top(i - 1)
            .ok_or_else(|| NfError::Precondition("stage left the bottom wire entangled".into()))?;
        stages.push(stage);
    }
    let mut nf = NormalForm {
        n,
        sign: Sign::Plus,
        stages,
    };
    if let Some(r) = reference {
        let want = fingerprint(r)?;
        let have = fingerprint(&nf.to_circuit())?;
        if want.tableau != have.tableau {
            return Err(NfError::ReferenceMismatch);
        }
        if want.column0 != have.column0 {
            let negated: Vec<_> = have.column0.iter().map(|v| -v).collect();
            if negated != want.column0 {
                return Err(NfError::ReferenceMismatch);
            }
            nf.sign = Sign::Minus;
        }
    }
    Ok(nf)
}

/// Normal form of a circuit, sign included.
pub fn normalize(c: &Circuit) -> Result<NormalForm, NfError> {
    synthesize(&Tableau::from_circuit(c), Some(c))
}

/// Every typed Z-circuit on `i` wires: m descending, then A, B and C indices ascending.
pub fn all_z_circuits(i: usize) -> Vec<ZCircuit> {
    let mut out = Vec::new();
    for m in (0..i).rev() {
        for &a in GenKind::A.members() {
            let mut prefix = Vec::new();
            z_tails(a, m, a.signature().1[0], &mut prefix, &mut out);
        }
    }
    out
}

fn z_tails(
    a: Generator,
    m: usize,
    color: WireColor,
    bs: &mut Vec<Generator>,
    out: &mut Vec<ZCircuit>,
) {
    if bs.len() == m {
        if color == WireColor::Simple {
            for &c in GenKind::C.members() {
                out.push(ZCircuit {
                    a,
                    bs: bs.clone(),
                    c,
                    m,
                });
            }
        }
        return;
    }
    for &b in GenKind::B.members() {
        let (ins, outs) = b.signature();
        if ins[1] == color {
            bs.push(b);
            z_tails(a, m, outs[0], bs, out);
            bs.pop();
        }
    }
}

/// Every X-circuit on `i` wires, D then E indices ascending.
pub fn all_x_circuits(i: usize) -> Vec<XCircuit> {
    let mut out = vec![Vec::new()];
    for _ in 0..i - 1 {
        out = out
            .into_iter()
            .flat_map(|ds: Vec<Generator>| {
                GenKind::D.members().iter().map(move |&d| {
                    let mut v = ds.clone();
                    v.push(d);
                    v
                })
            })
            .collect();
    }
    out.into_iter()
        .flat_map(|ds| {
            GenKind::E
                .members()
                .iter()
                .map(move |&e| XCircuit { ds: ds.clone(), e })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use Generator::*;

    fn p(s: &str) -> PauliOperator {
        s.parse().unwrap()
    }

    fn circ(s: &str) -> Circuit {
        s.parse().unwrap()
    }

    fn apply(gates: &[Gate], w: &PauliOperator) -> PauliOperator {
        let mut out = w.clone();
        for g in gates {
            conjugate_pauli(g, &mut out);
        }
        out
    }

    #[test]
    fn selection() {
        let sel = |k, cols: &[WireColor], src: &str, pat| {
            select_generator(k, cols, &p(src), &pat).unwrap()
        };
        use WireColor::*;
        assert_eq!(
            sel(GenKind::A, &[Plain], "X", ActionPattern::UpToSign(p("Z"))),
            A2
        );
        assert_eq!(
            sel(GenKind::C, &[Simple], "-Z", ActionPattern::Exact(p("Z"))),
            C2
        );
        assert_eq!(
            sel(
                GenKind::B,
                &[Plain, Simple],
                "XZ.Z",
                ActionPattern::UpToSign(p("XZ.I"))
            ),
            B4
        );
        assert!(matches!(
            select_generator(
                GenKind::C,
                &[Simple],
                &p("X"),
                &ActionPattern::Exact(p("Z"))
            ),
            Err(NfError::NoMatch(..))
        ));
        assert!(matches!(
            select_generator(
                GenKind::D,
                &[Plain, Plain],
                &p("Z.I"),
                &ActionPattern::UpToSign(p("I.Z"))
            ),
            Err(NfError::MultipleMatches(..))
        ));
    }

    #[test]
    fn z_circuits() {
        let z = build_z_circuit(&p("Z")).unwrap();
        assert_eq!(
            z,
            ZCircuit {
                a: A1,
                bs: vec![],
                c: C1,
                m: 0
            }
        );
        let z = build_z_circuit(&p("-X")).unwrap();
        assert_eq!(
            z,
            ZCircuit {
                a: A2,
                bs: vec![],
                c: C2,
                m: 0
            }
        );
        let w = p("XZ.XZ");
        let z = build_z_circuit(&w).unwrap();
        assert_eq!((z.m, z.a, z.bs.clone()), (1, A3, vec![B8]));
        assert_eq!(apply(&z.gates(), &w), p("Z.I"));
        assert!(build_z_circuit(&p("-I.I")).is_err());
        assert!(build_z_circuit(&p("XZ")).is_err());
    }

    #[test]
    fn x_circuits() {
        assert_eq!(
            build_x_circuit(&p("X")).unwrap(),
            XCircuit { ds: vec![], e: E1 }
        );
        assert_eq!(
            build_x_circuit(&p("-X")).unwrap(),
            XCircuit { ds: vec![], e: E2 }
        );
        let w = p("XZ.XZ");
        let x = build_x_circuit(&w).unwrap();
        assert_eq!(x.ds, vec![D4]);
        assert_eq!(apply(&x.gates(), &w), p("I.X"));
        assert!(build_x_circuit(&p("Z.X")).is_err());
    }

    #[test]
    fn stages() {
        let s = build_stage(&p("Z"), &p("X")).unwrap();
        assert_eq!(s, identity_normal_form(1).stages[0]);
        for (a, b) in [("Z.I", "X.I"), ("X.Z", "Z.I")] {
            let s = build_stage(&p(a), &p(b)).unwrap();
            assert_eq!(apply(&s.gates(), &p(a)), p("I.Z"));
            assert_eq!(apply(&s.gates(), &p(b)), p("I.X"));
        }
        assert!(build_stage(&p("Z.I"), &p("Z.X")).is_err());
    }

    #[test]
    fn identity_form() {
        let id = identity_normal_form(1);
        assert_eq!(
            id.to_circuit().gates(),
            &[Gate::Gen(A1, 0), Gate::Gen(C1, 0), Gate::Gen(E1, 0)]
        );
        assert!(is_normal(&id.to_circuit()));
        assert!(!is_normal(&circ("qubits 1\nH 0")));
        for n in 0..5 {
            let id = identity_normal_form(n);
            assert_eq!(
                Tableau::from_circuit(&id.to_circuit()),
                Tableau::identity(n)
            );
            assert_eq!(NormalForm::from_circuit(&id.to_circuit()), Some(id.clone()));
            assert_eq!(synthesize(&Tableau::identity(n), None).unwrap(), id);
        }
    }

    #[test]
    fn synthesis_with_sign() {
        let c = circ("qubits 1\nMINUS1\nH 0");
        let nf = normalize(&c).unwrap();
        assert_eq!(nf.sign, Sign::Minus);
        assert_eq!(
            fingerprint(&nf.to_circuit()).unwrap(),
            fingerprint(&c).unwrap()
        );
        let empty = normalize(&circ("qubits 0\nMINUS1")).unwrap();
        assert_eq!((empty.sign, empty.stages.len()), (Sign::Minus, 0));
    }

    #[test]
    fn recognizer_rejects_bad_shapes() {
        assert!(!is_normal(&circ("qubits 1\nA1 0\nC1 0")));
        assert!(!is_normal(&circ("qubits 1\nA3 0\nC1 0\nE1 0")));
        assert!(!is_normal(&circ("qubits 1\nMINUS1\nA1 0\nC1 0\nE1 0")));
        assert!(is_normal(&circ("qubits 1\nA2 0\nC2 0\nE1 0\nMINUS1")));
        assert!(!is_normal(&circ("qubits 1\nA1 0\nC1 0\nE1 0\nA1 0")));
    }

    #[test]
    fn enumeration_sizes() {
        assert_eq!(all_z_circuits(1).len(), 4);
        assert_eq!(all_z_circuits(2).len(), 18);
        assert_eq!(all_z_circuits(3).len(), 70);
        assert_eq!(all_x_circuits(1).len(), 2);
        assert_eq!(all_x_circuits(3).len(), 32);
        assert_eq!(all_z_circuits(3)[0], identity_normal_form(3).stages[0].z);
        assert_eq!(all_x_circuits(3)[0], identity_normal_form(3).stages[0].x);
    }

    #[test]
    fn json_shape() {
        let mut nf = identity_normal_form(2);
        nf.sign = Sign::Minus;
        assert_eq!(
            serde_json::to_string(&nf).unwrap(),
            "{\"n\":2,\"sign\":-1,\"stages\":[{\"x\":{\"ds\":[\"D1\"],\"e\":\"E1\"},\"z\":{\"a\":\"A1\",\"bs\":[\"B1\"],\"c\":\"C1\",\"m\":1}},{\"x\":{\"ds\":[],\"e\":\"E1\"},\"z\":{\"a\":\"A1\",\"bs\":[],\"c\":\"C1\",\"m\":0}}]}"
        );
    }
}
