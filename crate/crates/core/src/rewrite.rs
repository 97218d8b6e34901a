//! Dirty normal forms, the typed rule database, and normalization by rewriting.
//!
//! A dirty normal form is a normal form with extra primitive gates ("dirty"
//! gates) between its generator gates ("clean" gates). Every wire segment
//! carries a label determined by the previous clean gate on that wire, and
//! each dirty gate must sit at a label that permits it. Rewriting pushes the
//! dirty gates rightwards through the clean gates until none are left.

use std::collections::{HashMap, VecDeque};
use std::fmt;
use std::str::FromStr;
use std::sync::{Mutex, OnceLock};

use thiserror::Error;

use crate::circuit::{Circuit, Gate, GenKind, Generator, WireColor};
use crate::exact::{circuit_matrix, ExactMatrix};
use crate::normal_form::{identity_normal_form, NormalForm};
use crate::pauli::Sign;
use crate::tableau::{fingerprint, Tableau};

/// Label and color of a wire segment.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct WireLabel {
    pub label: u8,
    pub color: WireColor,
}

impl WireLabel {
    pub const ONE: WireLabel = WireLabel {
        label: 1,
        color: WireColor::Plain,
    };

    fn new(label: u8, color: WireColor) -> Self {
        WireLabel { label, color }
    }
}

/// Label of `wire` just after the clean gate `g` placed at `top`.
/// `None` means the wire has ended (after an E gate).
pub fn label_after(g: Generator, top: usize, wire: usize) -> Option<WireLabel> {
    let out = g.signature().1;
    let is_top = wire == top;
    match g.kind() {
        GenKind::A => Some(WireLabel::new(2, out[0])),
        GenKind::B if is_top => Some(WireLabel::new(2, out[0])),
        GenKind::B => Some(WireLabel::ONE),
        GenKind::C => Some(WireLabel::new(3, WireColor::Plain)),
        GenKind::D if is_top => Some(WireLabel::ONE),
        GenKind::D => Some(WireLabel::new(4, WireColor::Plain)),
        GenKind::E => None,
    }
}

/// Label of `wire` at list position `pos` (before `items[pos]`). `None` if
/// the wire has ended or no clean gate follows on it.
pub fn label_at(items: &[Gate], pos: usize, wire: usize) -> Option<WireLabel> {
    let next_clean = items[pos..]
        .iter()
        .any(|g| g.generator().is_some() && g.touches(wire));
    if !next_clean {
        return None;
    }
    for g in items[..pos].iter().rev() {
        if let Some((gen, top)) = g.generator() {
            if g.touches(wire) {
                return label_after(gen, top, wire);
            }
        }
    }
    Some(WireLabel::ONE)
}

fn is_double_two(l: WireLabel) -> bool {
    l.label == 2 && l.color == WireColor::Double
}

/// The dirty-gate placement rules, with `labels` giving the label of each of
/// `g.wires()` in order.
///
/// CZ accepts a simple label-2 top wire; the double case is what CXZ is for.
pub fn is_dirty_placement_legal(g: &Gate, labels: &[Option<WireLabel>]) -> bool {
    if labels.iter().any(|l| l.is_none()) {
        return false;
    }
    let l: Vec<WireLabel> = labels.iter().map(|l| l.unwrap()).collect();
    match *g {
        Gate::H(_) => l[0].label == 1 || is_double_two(l[0]),
        Gate::Z(_) => (1..=4).contains(&l[0].label),
        Gate::X(_) => l[0].label == 1 || l[0].label == 2,
        Gate::CZ(a, b) if a.abs_diff(b) == 1 => {
            let (top, bottom) = if a < b { (l[0], l[1]) } else { (l[1], l[0]) };
            bottom.label == 1
                && (top.label == 1
                    || top.label == 3
                    || (top.label == 2 && top.color == WireColor::Simple))
        }
        Gate::CXZ(t, c) if c == t + 1 => is_double_two(l[0]) && l[1].label == 1,
        _ => false,
    }
}

/// Labels of every wire before each clean gate of `nf` and after the last one.
pub fn label(nf: &NormalForm) -> Vec<Vec<Option<WireLabel>>> {
    let gates = nf.clean_gates();
    let mut out = Vec::with_capacity(gates.len() + 1);
    for pos in 0..=gates.len() {
        let row = (0..nf.n)
            .map(|w| {
                if pos < gates.len() {
                    label_at(&gates, pos, w)
                } else {
                    gates.iter().rev().find(|g| g.touches(w)).and_then(|g| {
                        let (gen, top) = g.generator().unwrap();
                        label_after(gen, top, w)
                    })
                }
            })
            .collect();
        out.push(row);
    }
    out
}

/// A rule `lhs -> rhs` on `colors.len()` wires whose input colors are `colors`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct RewriteRule {
    pub tag: String,
    pub colors: Vec<WireColor>,
    pub lhs: Vec<Gate>,
    pub rhs: Vec<Gate>,
    pub rhs_sign: Sign,
}

impl RewriteRule {
    pub fn n_wires(&self) -> usize {
        self.colors.len()
    }

    pub fn lhs_circuit(&self) -> Circuit {
        Circuit::new(self.n_wires(), self.lhs.clone()).expect("rule wires in range")
    }

    pub fn rhs_circuit(&self) -> Circuit {
        let mut gates = self.rhs.clone();
        if self.rhs_sign.is_minus() {
            gates.push(Gate::MinusOne);
        }
        Circuit::new(self.n_wires(), gates).expect("rule wires in range")
    }

    /// Exact matrices of both sides.
    pub fn matrices(&self) -> (ExactMatrix, ExactMatrix) {
        (
            circuit_matrix(&self.lhs_circuit()).expect("small window"),
            circuit_matrix(&self.rhs_circuit()).expect("small window"),
        )
    }

    pub fn is_sound(&self) -> bool {
        let (l, r) = self.matrices();
        l == r
    }

    fn key(&self) -> (Vec<WireColor>, Vec<Gate>) {
        (self.colors.clone(), self.lhs.clone())
    }
}

fn join_gates(gates: &[Gate]) -> String {
    gates
        .iter()
        .map(|g| g.to_string())
        .collect::<Vec<_>>()
        .join("; ")
}

impl fmt::Display for RewriteRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let colors: String = self.colors.iter().map(|c| c.code()).collect();
        write!(f, "[{}] @colors {}", self.tag, colors)?;
        if !self.lhs.is_empty() {
            write!(f, "; {}", join_gates(&self.lhs))?;
        }
        write!(f, " -> {}", join_gates(&self.rhs))?;
        if self.rhs_sign.is_minus() {
            if !self.rhs.is_empty() {
                write!(f, "; ")?;
            }
            write!(f, "SCALAR -1")?;
        }
        Ok(())
    }
}

impl FromStr for RewriteRule {
    type Err = String;

    fn from_str(line: &str) -> Result<Self, String> {
        let mut rest = line.trim();
        let mut tag = String::new();
        if let Some(r) = rest.strip_prefix('[') {
            let end = r.find(']').ok_or("unclosed tag")?;
            tag = r[..end].to_string();
            rest = r[end + 1..].trim();
        }
        let (lhs_text, rhs_text) = rest.split_once("->").ok_or("missing `->`")?;
        let mut colors = None;
        let mut lhs = Vec::new();
        for tok in lhs_text.split(';').map(str::trim).filter(|t| !t.is_empty()) {
            if let Some(c) = tok.strip_prefix("@colors") {
                let cs = c
                    .trim()
                    .chars()
                    .map(|ch| WireColor::from_code(ch).ok_or(format!("bad color {ch:?}")))
                    .collect::<Result<Vec<_>, _>>()?;
                colors = Some(cs);
            } else {
                lhs.push(tok.parse::<Gate>()?);
            }
        }
        let mut rhs = Vec::new();
        let mut rhs_sign = Sign::Plus;
        for tok in rhs_text.split(';').map(str::trim).filter(|t| !t.is_empty()) {
            if tok == "SCALAR -1" {
                rhs_sign = -rhs_sign;
            } else {
                rhs.push(tok.parse::<Gate>()?);
            }
        }
        let colors = colors.ok_or("missing @colors")?;
        let n = colors.len();
        for g in lhs.iter().chain(&rhs) {
            if g.wires().iter().any(|&w| w >= n) {
                return Err(format!("{g} is outside the {n} declared wires"));
            }
        }
        Ok(RewriteRule {
            tag,
            colors,
            lhs,
            rhs,
            rhs_sign,
        })
    }
}

/// Parse a rule file: one rule per line, `#` comments.
pub fn parse_rules(text: &str) -> Result<Vec<RewriteRule>, RewriteError> {
    text.lines()
        .enumerate()
        .filter_map(|(i, raw)| {
            let line = raw.split('#').next().unwrap().trim();
            (!line.is_empty()).then(|| {
                line.parse().map_err(|message| RewriteError::RuleSyntax {
                    line: i + 1,
                    message,
                })
            })
        })
        .collect()
}

pub fn format_rules(rules: &[RewriteRule]) -> String {
    let mut out = String::new();
    for r in rules {
        out.push_str(&r.to_string());
        out.push('\n');
    }
    out
}

#[derive(Debug, Error)]
pub enum RewriteError {
    #[error("rule file line {line}: {message}")]
    RuleSyntax { line: usize, message: String },
    #[error("no candidate right-hand side for {0}")]
    NoCandidate(String),
    #[error("ambiguous right-hand side for {lhs}: {candidates:?}")]
    Ambiguous {
        lhs: String,
        candidates: Vec<String>,
    },
    #[error("unsound rule {0}")]
    Unsound(String),
    #[error("no rule applies; stuck state:\n{0}")]
    NoRuleApplies(String),
    #[error("invariant violated: {message}\nstate:\n{state}")]
    Invariant { message: String, state: String },
    #[error("rewriting finished but the residue is not a normal form:\n{0}")]
    NotNormal(String),
}

/// The left-hand sides of the typed rules, grouped into eight families.
pub fn typed_lhs_families() -> Vec<RewriteRule> {
    use Gate::{Gen, CXZ, CZ, H, X, Z};
    use WireColor::{Double as D, Plain as P, Simple as S};
    let b_simple = &GenKind::B.members()[..4];
    let b_double = &GenKind::B.members()[4..];
    let mut out = Vec::new();
    let mut push = |family: u8, colors: &[WireColor], lhs: Vec<Gate>| {
        out.push(RewriteRule {
            tag: format!("family{family}"),
            colors: colors.to_vec(),
            lhs,
            rhs: vec![],
            rhs_sign: Sign::Plus,
        })
    };
    for &a in GenKind::A.members() {
        push(1, &[P], vec![Z(0), Gen(a, 0)]);
    }
    for &a in GenKind::A.members() {
        push(1, &[P], vec![H(0), Gen(a, 0)]);
    }
    for &a in GenKind::A.members() {
        push(1, &[P, P], vec![CZ(0, 1), Gen(a, 0)]);
    }
    for &a in GenKind::A.members() {
        let bs = if a == Generator::A3 {
            b_double
        } else {
            b_simple
        };
        for &b in bs {
            push(1, &[P, P], vec![CZ(0, 1), Gen(a, 1), Gen(b, 0)]);
        }
    }
    for &b in b_double {
        push(1, &[P, D], vec![H(1), Gen(b, 0)]);
    }
    for dirty in [X(1), H(0), Z(0), Z(1)] {
        for &b in GenKind::B.members() {
            let bottom = b.signature().0[1];
            push(2, &[P, bottom], vec![dirty, Gen(b, 0)]);
        }
    }
    for &c in GenKind::C.members() {
        push(2, &[S], vec![Z(0), Gen(c, 0)]);
        push(2, &[S], vec![X(0), Gen(c, 0)]);
        push(2, &[S, P], vec![CZ(0, 1), Gen(c, 0)]);
    }
    for &b in b_simple {
        push(3, &[P, S, P], vec![CZ(1, 2), Gen(b, 0)]);
    }
    for &b in b_double {
        push(3, &[P, D, P], vec![CXZ(1, 2), Gen(b, 0)]);
    }
    for (family, firsts) in [(4u8, b_simple), (5u8, b_double)] {
        for &bj in firsts {
            let out_color = bj.signature().1[0];
            let seconds = if out_color == S { b_simple } else { b_double };
            for &bk in seconds {
                push(
                    family,
                    &[P, P, bj.signature().0[1]],
                    vec![CZ(0, 1), Gen(bj, 1), Gen(bk, 0)],
                );
            }
        }
    }
    for dirty in [Z(0), Z(1), H(1), CZ(0, 1)] {
        for &d in GenKind::D.members() {
            push(6, &[P, P], vec![dirty, Gen(d, 0)]);
        }
    }
    for &e in GenKind::E.members() {
        push(6, &[P], vec![Z(0), Gen(e, 0)]);
    }
    for &dj in GenKind::D.members() {
        for &dk in GenKind::D.members() {
            push(7, &[P, P, P], vec![CZ(1, 2), Gen(dj, 0), Gen(dk, 1)]);
        }
    }
    out
}

/// The two rules relating the identity to clean gates: the empty wire and a
/// C gate on a lower simple wire.
pub fn structural_rules() -> Vec<RewriteRule> {
    use Generator::*;
    use WireColor::{Plain as P, Simple as S};
    vec![
        RewriteRule {
            tag: "family8".into(),
            colors: vec![P],
            lhs: vec![],
            rhs: vec![Gate::Gen(A1, 0), Gate::Gen(C1, 0), Gate::Gen(E1, 0)],
            rhs_sign: Sign::Plus,
        },
        RewriteRule {
            tag: "family8".into(),
            colors: vec![P, S],
            lhs: vec![Gate::Gen(C1, 1)],
            rhs: vec![Gate::Gen(B1, 0), Gate::Gen(C1, 0), Gate::Gen(D1, 0)],
            rhs_sign: Sign::Plus,
        },
    ]
}

/// Clean windows that may replace the clean part of `lhs`.
fn clean_candidates(colors: &[WireColor], lhs: &[Gate]) -> Vec<Vec<Gate>> {
    let clean: Vec<(Generator, usize)> = lhs.iter().filter_map(|g| g.generator()).collect();
    let mut shapes: Vec<Vec<(GenKind, usize)>> =
        vec![clean.iter().map(|&(g, q)| (g.kind(), q)).collect()];
    let dirty_is_cz = matches!(lhs.first(), Some(Gate::CZ(..)));
    match clean.as_slice() {
        [(g, q)] if g.kind() == GenKind::A && dirty_is_cz => {
            shapes.push(vec![(GenKind::A, q + 1), (GenKind::B, *q)]);
        }
        [(a, qa), (b, qb)]
            if a.kind() == GenKind::A && b.kind() == GenKind::B && qa == &(qb + 1) =>
        {
            shapes.push(vec![(GenKind::A, *qb)]);
        }
        _ => {}
    }
    let want_out = clean_output_colors(colors, lhs);
    let mut out = Vec::new();
    for shape in shapes {
        let mut partial: Vec<Vec<Gate>> = vec![vec![]];
        for &(kind, q) in &shape {
            partial = partial
                .into_iter()
                .flat_map(|p| {
                    kind.members().iter().map(move |&g| {
                        let mut v = p.clone();
                        v.push(Gate::Gen(g, q));
                        v
                    })
                })
                .collect();
        }
        for cand in partial {
            if clean_output_colors_checked(colors, &cand).as_ref() == Some(&want_out) {
                out.push(cand);
            }
        }
    }
    out
}

fn clean_output_colors(colors: &[WireColor], gates: &[Gate]) -> Vec<WireColor> {
    let clean: Vec<Gate> = gates
        .iter()
        .filter(|g| g.generator().is_some())
        .copied()
        .collect();
    clean_output_colors_checked(colors, &clean).expect("left-hand side is well typed")
}

fn clean_output_colors_checked(colors: &[WireColor], gates: &[Gate]) -> Option<Vec<WireColor>> {
    let mut cur = colors.to_vec();
    for g in gates {
        let (ins, outs) = g.signature();
        for (w, c) in g.wires().iter().zip(&ins) {
            if cur.get(*w) != Some(c) {
                return None;
            }
        }
        for (w, c) in g.wires().iter().zip(&outs) {
            cur[*w] = *c;
        }
    }
    Some(cur)
}

/// Labels of each window wire after the clean window `clean`. Wires the
/// window leaves untouched are label 1 (they are CZ/CXZ bottom wires).
fn labels_after_clean(n: usize, clean: &[Gate]) -> Vec<Option<WireLabel>> {
    (0..n)
        .map(|w| {
            clean
                .iter()
                .rev()
                .find(|g| g.touches(w))
                .map_or(Some(WireLabel::ONE), |g| {
                    let (gen, top) = g.generator().unwrap();
                    label_after(gen, top, w)
                })
        })
        .collect()
}

/// Dirty gates allowed at the given labels, in a fixed order.
fn dirty_alphabet(labels: &[Option<WireLabel>]) -> Vec<Gate> {
    let n = labels.len();
    let mut out = Vec::new();
    for (w, &l) in labels.iter().enumerate() {
        for g in [Gate::H(w), Gate::Z(w), Gate::X(w)] {
            if is_dirty_placement_legal(&g, &[l]) {
                out.push(g);
            }
        }
    }
    for w in 0..n.saturating_sub(1) {
        for g in [Gate::CZ(w, w + 1), Gate::CXZ(w, w + 1)] {
            if is_dirty_placement_legal(&g, &[labels[w], labels[w + 1]]) {
                out.push(g);
            }
        }
    }
    out
}

/// Breadth-first closure of the group generated by an alphabet, as a map from
/// packed tableau to (parent, gate index, depth).
struct Closure {
    n: usize,
    alphabet: Vec<Gate>,
    parent: HashMap<u128, (u128, usize, usize)>,
}

const CLOSURE_CAP: usize = 4_000_000;

impl Closure {
    fn build(n: usize, alphabet: Vec<Gate>) -> Closure {
        let id = Tableau::identity(n);
        let mut parent = HashMap::new();
        parent.insert(id.packed(), (id.packed(), usize::MAX, 0));
        let mut queue = VecDeque::from([(id, 0usize)]);
        while let Some((t, depth)) = queue.pop_front() {
            let key = t.packed();
            for (i, g) in alphabet.iter().enumerate() {
                let mut next = t.clone();
                next.then_gate(g);
                let nk = next.packed();
                if let std::collections::hash_map::Entry::Vacant(e) = parent.entry(nk) {
                    e.insert((key, i, depth + 1));
                    if parent.len() < CLOSURE_CAP {
                        queue.push_back((next, depth + 1));
                    }
                }
            }
        }
        Closure {
            n,
            alphabet,
            parent,
        }
    }

    /// Shortest word (in application order) whose tableau is `target`.
    fn word(&self, target: &Tableau) -> Option<Vec<Gate>> {
        debug_assert_eq!(target.n_qubits(), self.n);
        let mut key = target.packed();
        let mut rev = Vec::new();
        loop {
            let &(p, g, _) = self.parent.get(&key)?;
            if g == usize::MAX {
                break;
            }
            rev.push(self.alphabet[g]);
            key = p;
        }
        rev.reverse();
        Some(rev)
    }
}

type ClosureCache = Mutex<HashMap<Vec<Option<WireLabel>>, std::sync::Arc<Closure>>>;

fn closure_for(labels: &[Option<WireLabel>]) -> std::sync::Arc<Closure> {
    static CACHE: OnceLock<ClosureCache> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(c) = cache.lock().unwrap().get(labels) {
        return c.clone();
    }
    let c = std::sync::Arc::new(Closure::build(labels.len(), dirty_alphabet(labels)));
    cache.lock().unwrap().insert(labels.to_vec(), c.clone());
    c
}

/// Default bound on the number of dirty gates in a derived right-hand side.
pub const DEFAULT_DIRTY_BOUND: usize = 24;

/// Find the unique right-hand side `clean'; dirty…` equal to `lhs` whose
/// clean part has the same shape and boundary colors and whose dirty gates
/// sit at legal labels. The dirty word is a shortest one.
pub fn derive_rule(lhs: &RewriteRule, max_dirty: usize) -> Result<RewriteRule, RewriteError> {
    let n = lhs.n_wires();
    let target = fingerprint(&lhs.lhs_circuit()).expect("small window");
    let mut found = Vec::new();
    for clean in clean_candidates(&lhs.colors, &lhs.lhs) {
        let clean_circ = Circuit::new(n, clean.clone()).expect("window wires");
        let t_clean = Tableau::from_circuit(&clean_circ);
        let t_dirty = Tableau::compose(&target.tableau, &t_clean.inverse()).expect("same width");
        let labels = labels_after_clean(n, &clean);
        let closure = closure_for(&labels);
        let Some(word) = closure.word(&t_dirty) else {
            continue;
        };
        if word.len() > max_dirty {
            continue;
        }
        let mut rhs = clean.clone();
        rhs.extend(word);
        let got = fingerprint(&Circuit::new(n, rhs.clone()).expect("window wires"))
            .expect("small window");
        debug_assert_eq!(got.tableau, target.tableau);
        let rhs_sign = if got.column0 == target.column0 {
            Sign::Plus
        } else {
            Sign::Minus
        };
        found.push(RewriteRule {
            tag: lhs.tag.clone(),
            colors: lhs.colors.clone(),
            lhs: lhs.lhs.clone(),
            rhs,
            rhs_sign,
        });
    }
    match found.len() {
        1 => {
            let rule = found.pop().unwrap();
            if !rule.is_sound() {
                return Err(RewriteError::Unsound(rule.to_string()));
            }
            Ok(rule)
        }
        0 => Err(RewriteError::NoCandidate(lhs.to_string())),
        _ => Err(RewriteError::Ambiguous {
            lhs: lhs.to_string(),
            candidates: found.iter().map(|r| r.to_string()).collect(),
        }),
    }
}

/// Derive every typed rule and append the structural ones.
pub fn derive_typed_rules(max_dirty: usize) -> Result<Vec<RewriteRule>, RewriteError> {
    let mut rules = typed_lhs_families()
        .iter()
        .map(|l| derive_rule(l, max_dirty))
        .collect::<Result<Vec<_>, _>>()?;
    rules.extend(structural_rules());
    Ok(rules)
}

const TYPED_RULES: &str = include_str!("../data/typed.rules");
const REDUCED_RULES: &str = include_str!("../data/reduced.rules");
const ALTERNATIVE_RULES: &str = include_str!("../data/alternative.rules");

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RelationSet {
    Typed,
    Reduced,
    Alternative,
}

impl RelationSet {
    pub fn text(self) -> &'static str {
        match self {
            RelationSet::Typed => TYPED_RULES,
            RelationSet::Reduced => REDUCED_RULES,
            RelationSet::Alternative => ALTERNATIVE_RULES,
        }
    }

    pub fn rules(self) -> Vec<RewriteRule> {
        parse_rules(self.text()).expect("bundled rule files parse")
    }
}

#[derive(Clone, Debug)]
pub struct VerifyReport {
    pub total: usize,
    pub verified: usize,
    /// Failing rules with their left and right matrices.
    pub failures: Vec<(RewriteRule, ExactMatrix, ExactMatrix)>,
}

impl VerifyReport {
    pub fn holds(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Exact-matrix check of every rule.
pub fn verify_rules(rules: &[RewriteRule]) -> VerifyReport {
    let mut failures = Vec::new();
    for r in rules {
        let (l, m) = r.matrices();
        if l != m {
            failures.push((r.clone(), l, m));
        }
    }
    VerifyReport {
        total: rules.len(),
        verified: rules.len() - failures.len(),
        failures,
    }
}

/// The rule database, indexed by (colors, left-hand side).
pub struct RuleDb {
    rules: Vec<RewriteRule>,
    index: HashMap<(Vec<WireColor>, Vec<Gate>), usize>,
}

impl RuleDb {
    /// Load rules, refusing any that fail the exact-matrix check.
    pub fn new(rules: Vec<RewriteRule>) -> Result<RuleDb, RewriteError> {
        let mut index = HashMap::new();
        for (i, r) in rules.iter().enumerate() {
            if !r.is_sound() {
                return Err(RewriteError::Unsound(r.to_string()));
            }
            index.insert(r.key(), i);
        }
        Ok(RuleDb { rules, index })
    }

    /// The bundled typed rules, loaded once.
    pub fn typed() -> &'static RuleDb {
        static DB: OnceLock<RuleDb> = OnceLock::new();
        DB.get_or_init(|| RuleDb::new(RelationSet::Typed.rules()).expect("bundled rules are sound"))
    }

    pub fn rules(&self) -> &[RewriteRule] {
        &self.rules
    }

    pub fn lookup(&self, colors: &[WireColor], lhs: &[Gate]) -> Option<(usize, &RewriteRule)> {
        let i = *self.index.get(&(colors.to_vec(), lhs.to_vec()))?;
        Some((i, &self.rules[i]))
    }
}

/// A list of clean and dirty gates plus a global sign.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DirtyNormalForm {
    pub n: usize,
    pub items: Vec<Gate>,
    pub sign: Sign,
}

/// Lexicographic termination measure: dirty gates before each clean gate.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct TerminationMeasure(pub Vec<usize>);

impl DirtyNormalForm {
    pub fn measure(&self) -> TerminationMeasure {
        let mut dirty = 0;
        let mut s = Vec::new();
        for g in &self.items {
            if g.generator().is_some() {
                s.push(dirty);
            } else {
                dirty += 1;
            }
        }
        TerminationMeasure(s)
    }

    pub fn clean_count(&self) -> usize {
        self.items
            .iter()
            .filter(|g| g.generator().is_some())
            .count()
    }

    pub fn dump(&self) -> String {
        let mut s = format!("qubits {}\n", self.n);
        for g in &self.items {
            let mark = if g.generator().is_some() {
                ""
            } else {
                "  # dirty"
            };
            s.push_str(&format!("{g}{mark}\n"));
        }
        if self.sign.is_minus() {
            s.push_str("MINUS1\n");
        }
        s
    }

    /// The first dirty gate at an illegal position, if any.
    pub fn illegal_dirty_gate(&self) -> Option<usize> {
        let mut last_clean = vec![None; self.n];
        for (i, g) in self.items.iter().enumerate() {
            if g.generator().is_some() {
                for w in g.wires() {
                    last_clean[w] = Some(i);
                }
            }
        }
        let mut cur = vec![Some(WireLabel::ONE); self.n];
        for (p, g) in self.items.iter().enumerate() {
            if let Some((gen, top)) = g.generator() {
                for w in g.wires() {
                    cur[w] = label_after(gen, top, w);
                }
                continue;
            }
            let labels: Vec<_> = g
                .wires()
                .iter()
                .map(|&w| cur[w].filter(|_| last_clean[w].is_some_and(|c| c > p)))
                .collect();
            if !is_dirty_placement_legal(g, &labels) {
                return Some(p);
            }
        }
        None
    }

    /// Dirty gates whose next gate on every wire is clean, left to right.
    fn unblocked_dirty_gates(&self) -> Vec<usize> {
        let mut next_is_clean = vec![false; self.n];
        let mut out = Vec::new();
        for (p, g) in self.items.iter().enumerate().rev() {
            let clean = g.generator().is_some();
            if !clean && g.wires().iter().all(|&w| next_is_clean[w]) {
                out.push(p);
            }
            for w in g.wires() {
                next_is_clean[w] = clean;
            }
        }
        out.reverse();
        out
    }
}

/// One rule application.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TraceStep {
    pub rule: usize,
    pub position: usize,
    pub measure: TerminationMeasure,
}

fn swap_gates(p: usize) -> Vec<Gate> {
    let cx = |t: usize, c: usize| [Gate::H(t), Gate::CZ(t.min(c), t.max(c)), Gate::H(t)];
    let mut out = Vec::new();
    out.extend(cx(p + 1, p));
    out.extend(cx(p, p + 1));
    out.extend(cx(p + 1, p));
    out
}

fn adjacent_cz(a: usize, b: usize, out: &mut Vec<Gate>) {
    let (a, b) = (a.min(b), a.max(b));
    if b == a + 1 {
        out.push(Gate::CZ(a, b));
    } else {
        out.extend(swap_gates(b - 1));
        adjacent_cz(a, b - 1, out);
        out.extend(swap_gates(b - 1));
    }
}

/// Rewrite a circuit into H, Z and adjacent CZ gates plus a sign.
pub fn to_dirty_gates(c: &Circuit) -> (Vec<Gate>, Sign) {
    let mut out = Vec::new();
    let mut sign = Sign::Plus;
    for g in c.expand_all().gates() {
        match *g {
            Gate::MinusOne => sign = -sign,
            Gate::CZ(a, b) => adjacent_cz(a, b, &mut out),
            g => out.push(g),
        }
    }
    (out, sign)
}

fn is_window_contiguous(items: &[Gate], positions: &[usize]) -> bool {
    let mut wires: Vec<usize> = positions.iter().flat_map(|&p| items[p].wires()).collect();
    wires.sort_unstable();
    wires.dedup();
    wires.iter().all(|&w| {
        let on_w: Vec<usize> = positions
            .iter()
            .copied()
            .filter(|&p| items[p].touches(w))
            .collect();
        let (lo, hi) = (on_w[0], *on_w.last().unwrap());
        (lo + 1..hi).all(|i| positions.contains(&i) || !items[i].touches(w))
    })
}

enum Attempt {
    Applied(usize),
    Blocked,
    NoRule(String),
}

fn try_rewrite_at(db: &RuleDb, form: &mut DirtyNormalForm, p: usize) -> Attempt {
    let d = form.items[p];
    let mut next: Vec<usize> = Vec::new();
    for w in d.wires() {
        match (p + 1..form.items.len()).find(|&i| form.items[i].touches(w)) {
            Some(i) if form.items[i].generator().is_some() => next.push(i),
            _ => return Attempt::Blocked,
        }
    }
    let top_next = next[0];
    next.sort_unstable();
    next.dedup();
    let mut windows = Vec::new();
    if next.len() == 2 {
        windows.push(vec![p, next[0], next[1]]);
    }
    windows.push(vec![p, top_next]);
    let mut blocked = false;
    for win in &windows {
        if !is_window_contiguous(&form.items, win) {
            blocked = true;
            continue;
        }
        let lo = win
            .iter()
            .flat_map(|&i| form.items[i].wires())
            .min()
            .unwrap();
        let hi = win
            .iter()
            .flat_map(|&i| form.items[i].wires())
            .max()
            .unwrap();
        let colors: Vec<WireColor> = (lo..=hi)
            .map(|w| {
                let first = win
                    .iter()
                    .copied()
                    .find(|&i| form.items[i].touches(w))
                    .unwrap_or(p);
                label_at(&form.items, first, w).map_or(WireColor::Plain, |l| l.color)
            })
            .collect();
        let lhs: Vec<Gate> = win
            .iter()
            .map(|&i| form.items[i].shifted(-(lo as isize)))
            .collect();
        if let Some((idx, rule)) = db.lookup(&colors, &lhs) {
            // Rules continue X only from label 2; elsewhere it goes in as H Z H.
            let clean: Vec<Gate> = rule
                .rhs
                .iter()
                .filter(|g| g.generator().is_some())
                .copied()
                .collect();
            let after = labels_after_clean(rule.n_wires(), &clean);
            let replacement: Vec<Gate> = rule
                .rhs
                .iter()
                .flat_map(|g| match *g {
                    Gate::X(w) if after[w].map(|l| l.label) == Some(1) => {
                        vec![Gate::H(w), Gate::Z(w), Gate::H(w)]
                    }
                    g => vec![g],
                })
                .map(|g| g.shifted(lo as isize))
                .collect();
            let first_clean = win[1];
            let mut items = Vec::with_capacity(form.items.len() + replacement.len());
            for (i, g) in form.items.iter().enumerate() {
                if i == first_clean {
                    items.extend(replacement.iter().copied());
                }
                if !win.contains(&i) {
                    items.push(*g);
                }
            }
            form.items = items;
            if rule.rhs_sign.is_minus() {
                form.sign = -form.sign;
            }
            return Attempt::Applied(idx);
        }
    }
    if blocked {
        Attempt::Blocked
    } else {
        let lhs: Vec<String> = windows[windows.len() - 1]
            .iter()
            .map(|&i| form.items[i].to_string())
            .collect();
        Attempt::NoRule(lhs.join("; "))
    }
}

/// Result of rewriting: the normal form and the applied steps.
#[derive(Clone, Debug)]
pub struct RewriteOutcome {
    pub normal_form: NormalForm,
    pub trace: Vec<TraceStep>,
}

/// Normalize by appending the identity normal form and pushing every dirty
/// gate through it with the rule database. Each step checks that the measure
/// drops, that all dirty gates are legally placed and that the clean gate
/// count stays within n² + 2n.
pub fn normalize_by_rewriting(c: &Circuit, db: &RuleDb) -> Result<RewriteOutcome, RewriteError> {
    normalize_by_rewriting_observed(c, db, |_| {})
}

/// [`normalize_by_rewriting`], calling `observe` on the initial state and
/// after every rule application.
pub fn normalize_by_rewriting_observed(
    c: &Circuit,
    db: &RuleDb,
    mut observe: impl FnMut(&DirtyNormalForm),
) -> Result<RewriteOutcome, RewriteError> {
    let n = c.n_qubits();
    let (dirty, sign) = to_dirty_gates(c);
    let mut items = dirty;
    items.extend(identity_normal_form(n).clean_gates());
    let mut form = DirtyNormalForm { n, items, sign };
    observe(&form);
    let mut trace = Vec::new();
    let bound = n * n + 2 * n;
    let mut measure = form.measure();
    let invariant = |form: &DirtyNormalForm, message: String| RewriteError::Invariant {
        message,
        state: form.dump(),
    };
    if let Some(p) = form.illegal_dirty_gate() {
        return Err(invariant(&form, format!("illegal dirty gate at {p}")));
    }
    'outer: loop {
        if form.items.iter().all(|g| g.generator().is_some()) {
            break;
        }
        for p in form.unblocked_dirty_gates() {
            match try_rewrite_at(db, &mut form, p) {
                Attempt::Blocked => continue,
                Attempt::NoRule(window) => {
                    return Err(RewriteError::NoRuleApplies(format!(
                        "window: {window}\n{}",
                        form.dump()
                    )))
                }
                Attempt::Applied(rule) => {
                    let next = form.measure();
                    if next >= measure {
                        return Err(invariant(
                            &form,
                            format!("measure did not decrease: {:?} -> {:?}", measure.0, next.0),
                        ));
                    }
                    if form.clean_count() > bound {
                        return Err(invariant(
                            &form,
                            format!("{} clean gates exceed {bound}", form.clean_count()),
                        ));
                    }
                    if let Some(q) = form.illegal_dirty_gate() {
                        return Err(invariant(&form, format!("illegal dirty gate at {q}")));
                    }
                    observe(&form);
                    measure = next.clone();
                    trace.push(TraceStep {
                        rule,
                        position: p,
                        measure: next,
                    });
                    continue 'outer;
                }
            }
        }
        return Err(RewriteError::NoRuleApplies(form.dump()));
    }
    let mut gates = form.items.clone();
    if form.sign.is_minus() {
        gates.push(Gate::MinusOne);
    }
    let residue = Circuit::new(n, gates).expect("wires in range");
    let normal_form =
        NormalForm::from_circuit(&residue).ok_or_else(|| RewriteError::NotNormal(form.dump()))?;
    Ok(RewriteOutcome { normal_form, trace })
}

#[cfg(test)]
mod tests {
    use super::*;
    use Generator::*;
    use WireColor::{Double as D, Plain as P, Simple as S};

    fn rule(s: &str) -> RewriteRule {
        s.parse().unwrap()
    }

    fn l(label: u8, color: WireColor) -> Option<WireLabel> {
        Some(WireLabel::new(label, color))
    }

    #[test]
    fn identity_labels() {
        let labels = label(&identity_normal_form(1));
        assert_eq!(labels[0], vec![l(1, P)]);
        assert_eq!(labels[1], vec![l(2, S)]);
        assert_eq!(labels[2], vec![l(3, P)]);
        assert_eq!(labels[3], vec![None]);
        // Two wires: A1 1, B1 0, C1 0, D1 0, E1 1, A1 0, C1 0, E1 0.
        let labels = label(&identity_normal_form(2));
        assert_eq!(labels[2][1], l(1, P), "wire below the C gate");
        assert_eq!(labels[4][1], l(4, P), "D ladder output");
        assert_eq!(labels[4][0], l(1, P), "D top output");
    }

    #[test]
    fn placement_rules() {
        assert!(is_dirty_placement_legal(&Gate::Z(0), &[l(3, P)]));
        assert!(!is_dirty_placement_legal(&Gate::X(0), &[l(4, P)]));
        assert!(is_dirty_placement_legal(
            &Gate::CXZ(0, 1),
            &[l(2, D), l(1, P)]
        ));
        assert!(!is_dirty_placement_legal(
            &Gate::CXZ(0, 1),
            &[l(2, S), l(1, P)]
        ));
        assert!(is_dirty_placement_legal(&Gate::H(0), &[l(2, D)]));
        assert!(!is_dirty_placement_legal(&Gate::H(0), &[l(2, S)]));
        assert!(is_dirty_placement_legal(
            &Gate::CZ(0, 1),
            &[l(2, S), l(1, P)]
        ));
        assert!(!is_dirty_placement_legal(
            &Gate::CZ(0, 1),
            &[l(2, D), l(1, P)]
        ));
        assert!(!is_dirty_placement_legal(
            &Gate::CZ(0, 1),
            &[l(1, P), l(4, P)]
        ));
        assert!(!is_dirty_placement_legal(
            &Gate::CZ(0, 2),
            &[l(1, P), l(1, P)]
        ));
        assert!(!is_dirty_placement_legal(&Gate::Z(0), &[None]));
    }

    #[test]
    fn rule_text_round_trip() {
        for text in [
            "[family1] @colors P; H 0; A1 0 -> A2 0",
            "[R4] @colors P; Z 0; H 0; Z 0; H 0; Z 0; H 0; Z 0; H 0 -> SCALAR -1",
            "[R1] @colors P; MINUS1; MINUS1 -> ",
            "[family8] @colors P -> A1 0; C1 0; E1 0",
            "[x] @colors PDP; CXZ 1 2; B5 0 -> B5 0; H 1; SCALAR -1",
        ] {
            assert_eq!(rule(text).to_string(), text);
        }
        assert!("@colors P; H 1 -> ".parse::<RewriteRule>().is_err());
        assert!("H 0 -> H 0".parse::<RewriteRule>().is_err());
    }

    #[test]
    fn family_sizes() {
        let lhs = typed_lhs_families();
        let count = |f: &str| lhs.iter().filter(|r| r.tag == f).count();
        let sizes: Vec<usize> = (1..=7).map(|f| count(&format!("family{f}"))).collect();
        assert_eq!(sizes, vec![25, 38, 8, 16, 16, 18, 16]);
        assert_eq!(lhs.len() + structural_rules().len(), 139);
        for r in &lhs {
            let clean: Vec<Gate> = r.lhs[1..].to_vec();
            assert!(
                clean_output_colors_checked(&r.colors, &clean).is_some(),
                "{r}"
            );
        }
    }

    #[test]
    fn derive_examples() {
        let d = |s: &str| derive_rule(&rule(s), DEFAULT_DIRTY_BOUND).unwrap();
        assert_eq!(
            d("[t] @colors P; H 0; A1 0 -> ").rhs,
            vec![Gate::Gen(A2, 0)]
        );
        assert_eq!(
            d("[t] @colors P; Z 0; A2 0 -> ").rhs,
            vec![Gate::Gen(A2, 0), Gate::X(0)]
        );
        let e = d("[t] @colors P; Z 0; E1 0 -> ");
        assert_eq!((e.rhs, e.rhs_sign), (vec![Gate::Gen(E2, 0)], Sign::Plus));
    }

    #[test]
    fn structural_rules_are_sound() {
        for r in structural_rules() {
            assert!(r.is_sound(), "{r}");
        }
    }

    #[test]
    fn measure_counts() {
        let id = identity_normal_form(2);
        let mut form = DirtyNormalForm {
            n: 2,
            items: id.clean_gates(),
            sign: Sign::Plus,
        };
        assert!(form.measure().0.iter().all(|&s| s == 0));
        form.items.insert(0, Gate::H(0));
        assert!(form.measure().0.iter().all(|&s| s == 1));
        assert_eq!(form.illegal_dirty_gate(), None);
    }

    #[test]
    fn wide_cz_is_decomposed() {
        let c: Circuit = "qubits 4\nCZ 3 0\nMINUS1".parse().unwrap();
        let (gates, sign) = to_dirty_gates(&c);
        assert_eq!(sign, Sign::Minus);
        assert!(gates.iter().all(|g| match g {
            Gate::CZ(a, b) => b == &(a + 1),
            _ => true,
        }));
        let rebuilt = Circuit::new(4, gates).unwrap();
        let direct: Circuit = "qubits 4\nCZ 0 3".parse().unwrap();
        assert_eq!(
            fingerprint(&rebuilt).unwrap(),
            fingerprint(&direct).unwrap()
        );
    }
}
