//! Gates, circuits, the wire-color type system and the `.rsc` text format.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// The five kinds of derived generator.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum GenKind {
    A,
    B,
    C,
    D,
    E,
}

impl GenKind {
    /// Number of wires the generators of this kind act on.
    pub fn arity(self) -> usize {
        match self {
            GenKind::B | GenKind::D => 2,
            _ => 1,
        }
    }

    pub fn members(self) -> &'static [Generator] {
        use Generator::*;
        match self {
            GenKind::A => &[A1, A2, A3],
            GenKind::B => &[B1, B2, B3, B4, B5, B6, B7, B8],
            GenKind::C => &[C1, C2],
            GenKind::D => &[D1, D2, D3, D4],
            GenKind::E => &[E1, E2],
        }
    }
}

/// A derived generator, placed by its top wire.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Generator {
    A1,
    A2,
    A3,
    B1,
    B2,
    B3,
    B4,
    B5,
    B6,
    B7,
    B8,
    C1,
    C2,
    D1,
    D2,
    D3,
    D4,
    E1,
    E2,
}

/// Wire color: default, simple type, double type.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum WireColor {
    Plain,
    Simple,
    Double,
}

impl WireColor {
    pub fn code(self) -> char {
        match self {
            WireColor::Plain => 'P',
            WireColor::Simple => 'S',
            WireColor::Double => 'D',
        }
    }

    pub fn from_code(c: char) -> Option<Self> {
        match c {
            'P' => Some(WireColor::Plain),
            'S' => Some(WireColor::Simple),
            'D' => Some(WireColor::Double),
            _ => None,
        }
    }
}

use WireColor::{Double as D, Plain as P, Simple as S};

impl Generator {
    pub const ALL: [Generator; 19] = {
        use Generator::*;
        [
            A1, A2, A3, B1, B2, B3, B4, B5, B6, B7, B8, C1, C2, D1, D2, D3, D4, E1, E2,
        ]
    };

    pub fn kind(self) -> GenKind {
        use Generator::*;
        match self {
            A1 | A2 | A3 => GenKind::A,
            B1 | B2 | B3 | B4 | B5 | B6 | B7 | B8 => GenKind::B,
            C1 | C2 => GenKind::C,
            D1 | D2 | D3 | D4 => GenKind::D,
            E1 | E2 => GenKind::E,
        }
    }

    /// 1-based index within the kind.
    pub fn index(self) -> usize {
        let members = self.kind().members();
        members.iter().position(|&g| g == self).unwrap() + 1
    }

    pub fn name(self) -> &'static str {
        use Generator::*;
        match self {
            A1 => "A1",
            A2 => "A2",
            A3 => "A3",
            B1 => "B1",
            B2 => "B2",
            B3 => "B3",
            B4 => "B4",
            B5 => "B5",
            B6 => "B6",
            B7 => "B7",
            B8 => "B8",
            C1 => "C1",
            C2 => "C2",
            D1 => "D1",
            D2 => "D2",
            D3 => "D3",
            D4 => "D4",
            E1 => "E1",
            E2 => "E2",
        }
    }

    pub fn from_name(s: &str) -> Option<Generator> {
        Generator::ALL.into_iter().find(|g| g.name() == s)
    }

    /// Input and output colors, top wire first.
    pub fn signature(self) -> (&'static [WireColor], &'static [WireColor]) {
        use Generator::*;
        match self {
            A1 | A2 => (&[P], &[S]),
            A3 => (&[P], &[D]),
            B1 | B2 | B3 => (&[P, S], &[S, P]),
            B4 => (&[P, S], &[D, P]),
            B5 | B6 | B7 => (&[P, D], &[D, P]),
            B8 => (&[P, D], &[S, P]),
            C1 | C2 => (&[S], &[P]),
            D1 | D2 | D3 | D4 => (&[P, P], &[P, P]),
            E1 | E2 => (&[P], &[P]),
        }
    }

    /// Primitive expansion on local wires (0 = top), in application order.
    pub fn expansion(self) -> Vec<Gate> {
        use Gate::{H, X, Z};
        use Generator::*;
        let cz = Gate::CZ(0, 1);
        match self {
            A1 | A3 | C1 | E1 => vec![],
            A2 => vec![H(0)],
            C2 => vec![X(0)],
            E2 => vec![Z(0)],
            B1 | B5 => vec![H(1), cz, H(0), H(1), cz, H(0), H(1), cz],
            B2 | B6 => vec![cz, H(0), H(1), cz],
            B3 | B7 => vec![H(0), cz, H(0), H(1), cz],
            B4 | B8 => vec![H(1), cz, H(1), cz, H(0), H(1), cz],
            D1 => vec![cz, H(0), H(1), cz, H(0), H(1), cz, H(1)],
            D2 => vec![H(0), cz, H(0), H(1), cz, H(1)],
            D3 => vec![H(0), H(1), cz, H(0), H(1), cz, H(1)],
            D4 => vec![H(0), cz, H(0), H(1), cz, H(1), cz],
        }
    }
}

impl fmt::Display for Generator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A gate with 0-based wire indices.
///
/// `CXZ(t, c)` and `CX(t, c)` list the H-carrying target wire first.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Gate {
    MinusOne,
    H(usize),
    Z(usize),
    X(usize),
    CZ(usize, usize),
    CXZ(usize, usize),
    CX(usize, usize),
    Gen(Generator, usize),
}

/// The wires of a gate, in gate order; at most two.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Wires {
    buf: [usize; 2],
    len: u8,
}

impl std::ops::Deref for Wires {
    type Target = [usize];

    fn deref(&self) -> &[usize] {
        &self.buf[..self.len as usize]
    }
}

impl IntoIterator for Wires {
    type Item = usize;
    type IntoIter = std::iter::Take<std::array::IntoIter<usize, 2>>;

    fn into_iter(self) -> Self::IntoIter {
        self.buf.into_iter().take(self.len as usize)
    }
}

impl Gate {
    /// True for the gates {−1, H, Z, CZ} that everything expands into.
    pub fn is_primitive(&self) -> bool {
        matches!(
            self,
            Gate::MinusOne | Gate::H(_) | Gate::Z(_) | Gate::CZ(..)
        )
    }

    pub fn generator(&self) -> Option<(Generator, usize)> {
        match *self {
            Gate::Gen(g, q) => Some((g, q)),
            _ => None,
        }
    }

    pub fn wires(&self) -> Wires {
        match *self {
            Gate::MinusOne => Wires {
                buf: [0, 0],
                len: 0,
            },
            Gate::H(q) | Gate::Z(q) | Gate::X(q) => Wires {
                buf: [q, 0],
                len: 1,
            },
            Gate::CZ(a, b) | Gate::CXZ(a, b) | Gate::CX(a, b) => Wires {
                buf: [a, b],
                len: 2,
            },
            Gate::Gen(g, q) => Wires {
                buf: [q, q + 1],
                len: g.kind().arity() as u8,
            },
        }
    }

    /// Whether the gate acts on wire `w`.
    pub fn touches(&self, w: usize) -> bool {
        match *self {
            Gate::MinusOne => false,
            Gate::H(q) | Gate::Z(q) | Gate::X(q) => q == w,
            Gate::CZ(a, b) | Gate::CXZ(a, b) | Gate::CX(a, b) => a == w || b == w,
            Gate::Gen(g, q) => (q..q + g.kind().arity()).contains(&w),
        }
    }

    /// The same gate with every wire index shifted by `offset`.
    pub fn shifted(&self, offset: isize) -> Gate {
        let s = |q: usize| (q as isize + offset) as usize;
        match *self {
            Gate::MinusOne => Gate::MinusOne,
            Gate::H(q) => Gate::H(s(q)),
            Gate::Z(q) => Gate::Z(s(q)),
            Gate::X(q) => Gate::X(s(q)),
            Gate::CZ(a, b) => Gate::CZ(s(a), s(b)),
            Gate::CXZ(a, b) => Gate::CXZ(s(a), s(b)),
            Gate::CX(a, b) => Gate::CX(s(a), s(b)),
            Gate::Gen(g, q) => Gate::Gen(g, s(q)),
        }
    }

    /// Primitive expansion; primitives expand to themselves.
    pub fn expand(&self) -> Vec<Gate> {
        match *self {
            Gate::X(q) => vec![Gate::H(q), Gate::Z(q), Gate::H(q)],
            Gate::CXZ(t, c) => vec![Gate::H(t), Gate::CZ(t, c), Gate::H(t), Gate::CZ(t, c)],
            Gate::CX(t, c) => vec![Gate::H(t), Gate::CZ(t, c), Gate::H(t)],
            Gate::Gen(g, q) => g
                .expansion()
                .into_iter()
                .flat_map(|p| p.shifted(q as isize).expand())
                .collect(),
            g => vec![g],
        }
    }

    /// Input and output colors on [`Gate::wires`]; non-generators are Plain to Plain.
    pub fn signature(&self) -> (Vec<WireColor>, Vec<WireColor>) {
        match *self {
            Gate::Gen(g, _) => {
                let (i, o) = g.signature();
                (i.to_vec(), o.to_vec())
            }
            _ => {
                let k = self.wires().len();
                (vec![P; k], vec![P; k])
            }
        }
    }
}

impl fmt::Display for Gate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Gate::MinusOne => write!(f, "MINUS1"),
            Gate::H(q) => write!(f, "H {q}"),
            Gate::Z(q) => write!(f, "Z {q}"),
            Gate::X(q) => write!(f, "X {q}"),
            Gate::CZ(a, b) => write!(f, "CZ {a} {b}"),
            Gate::CXZ(a, b) => write!(f, "CXZ {a} {b}"),
            Gate::CX(a, b) => write!(f, "CX {a} {b}"),
            Gate::Gen(g, q) => write!(f, "{g} {q}"),
        }
    }
}

impl FromStr for Gate {
    type Err = String;

    fn from_str(s: &str) -> Result<Gate, String> {
        let toks: Vec<&str> = s.split_whitespace().collect();
        let (&name, args) = toks.split_first().ok_or("empty gate")?;
        let idx: Vec<usize> = args
            .iter()
            .map(|a| {
                a.parse::<usize>()
                    .map_err(|_| format!("bad wire index {a:?}"))
            })
            .collect::<Result<_, _>>()?;
        let want = |k: usize| -> Result<(), String> {
            if idx.len() == k {
                Ok(())
            } else {
                Err(format!(
                    "{name} takes {k} wire index(es), got {}",
                    idx.len()
                ))
            }
        };
        let distinct = |a: usize, b: usize| -> Result<(), String> {
            if a == b {
                Err(format!("{name} needs two distinct wires"))
            } else {
                Ok(())
            }
        };
        let gate = match name {
            "MINUS1" => {
                want(0)?;
                Gate::MinusOne
            }
            "H" | "Z" | "X" => {
                want(1)?;
                match name {
                    "H" => Gate::H(idx[0]),
                    "Z" => Gate::Z(idx[0]),
                    _ => Gate::X(idx[0]),
                }
            }
            "CZ" | "CXZ" | "CX" => {
                want(2)?;
                distinct(idx[0], idx[1])?;
                match name {
                    "CZ" => Gate::CZ(idx[0], idx[1]),
                    "CXZ" => Gate::CXZ(idx[0], idx[1]),
                    _ => Gate::CX(idx[0], idx[1]),
                }
            }
            _ => {
                let g = Generator::from_name(name).ok_or(format!("unknown gate {name:?}"))?;
                want(1)?;
                Gate::Gen(g, idx[0])
            }
        };
        Ok(gate)
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CircuitError {
    #[error("line {line}: {message} ({token:?})")]
    Parse {
        line: usize,
        token: String,
        message: String,
    },
    #[error("gate {gate} uses wire {wire} but the circuit has {n} qubits")]
    WireOutOfRange { gate: String, wire: usize, n: usize },
}

#[derive(Debug, Error, PartialEq, Eq)]
#[error("gate {gate_index} on wire {wire}: expected {expected:?}, found {found:?}")]
pub struct TypeError {
    pub gate_index: usize,
    pub wire: usize,
    pub expected: WireColor,
    pub found: WireColor,
}

/// An ordered gate list on `n` qubits.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct Circuit {
    n: usize,
    gates: Vec<Gate>,
}

impl Circuit {
    pub fn new(n: usize, gates: Vec<Gate>) -> Result<Self, CircuitError> {
        for g in &gates {
            if let Some(&w) = g.wires().iter().find(|&&w| w >= n) {
                return Err(CircuitError::WireOutOfRange {
                    gate: g.to_string(),
                    wire: w,
                    n,
                });
            }
        }
        Ok(Circuit { n, gates })
    }

    pub fn empty(n: usize) -> Self {
        Circuit { n, gates: vec![] }
    }

    pub fn n_qubits(&self) -> usize {
        self.n
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    /// Append a gate. Panics on an out-of-range wire.
    pub fn push(&mut self, g: Gate) {
        assert!(g.wires().iter().all(|&w| w < self.n), "{g} out of range");
        self.gates.push(g);
    }

    pub fn extend(&mut self, other: &Circuit) {
        assert_eq!(self.n, other.n);
        self.gates.extend_from_slice(&other.gates);
    }

    pub fn expand_all(&self) -> Circuit {
        Circuit {
            n: self.n,
            gates: self.gates.iter().flat_map(|g| g.expand()).collect(),
        }
    }

    /// Forward color pass from all-Plain wires.
    pub fn type_check(&self) -> Result<TypedCircuit, TypeError> {
        let mut colors = vec![P; self.n];
        let mut history = vec![colors.clone()];
        for (i, g) in self.gates.iter().enumerate() {
            let (ins, outs) = g.signature();
            for (w, &want) in g.wires().iter().zip(&ins) {
                if colors[*w] != want {
                    return Err(TypeError {
                        gate_index: i,
                        wire: *w,
                        expected: want,
                        found: colors[*w],
                    });
                }
            }
            for (w, &c) in g.wires().iter().zip(&outs) {
                colors[*w] = c;
            }
            history.push(colors.clone());
        }
        Ok(TypedCircuit {
            circuit: self.clone(),
            colors: history,
        })
    }

    pub fn to_text(&self) -> String {
        let mut s = format!("qubits {}\n", self.n);
        for g in &self.gates {
            s.push_str(&g.to_string());
            s.push('\n');
        }
        s
    }
}

impl FromStr for Circuit {
    type Err = CircuitError;

    fn from_str(text: &str) -> Result<Circuit, CircuitError> {
        let err = |line: usize, token: &str, message: &str| CircuitError::Parse {
            line,
            token: token.to_string(),
            message: message.to_string(),
        };
        let mut n = None;
        let mut gates = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap().trim();
            if line.is_empty() {
                continue;
            }
            match n {
                None => {
                    let rest = line
                        .strip_prefix("qubits")
                        .ok_or_else(|| err(i + 1, line, "expected `qubits N`"))?;
                    n = Some(
                        rest.trim()
                            .parse::<usize>()
                            .map_err(|_| err(i + 1, line, "bad qubit count"))?,
                    );
                }
                Some(nq) => {
                    let g: Gate = line.parse().map_err(|m: String| err(i + 1, line, &m))?;
                    if g.wires().iter().any(|&w| w >= nq) {
                        return Err(err(i + 1, line, "wire index out of range"));
                    }
                    if let Gate::Gen(gen, _) = g {
                        if gen.kind().arity() == 2 && g.wires()[1] >= nq {
                            return Err(err(i + 1, line, "pair gate needs the wire below"));
                        }
                    }
                    gates.push(g);
                }
            }
        }
        let n = n.ok_or_else(|| err(0, "", "missing `qubits N` line"))?;
        Ok(Circuit { n, gates })
    }
}

impl fmt::Display for Circuit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

/// A circuit together with the wire colors before and after every gate.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TypedCircuit {
    pub circuit: Circuit,
    /// `colors[i]` holds the colors just before gate `i`; the last entry is the output.
    pub colors: Vec<Vec<WireColor>>,
}

impl TypedCircuit {
    pub fn output_colors(&self) -> &[WireColor] {
        self.colors.last().unwrap()
    }
}
