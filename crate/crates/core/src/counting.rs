//! Closed-form counts and exhaustive enumeration of normal forms.

use std::collections::hash_map::DefaultHasher;
use std::collections::{HashSet, VecDeque};
use std::hash::{Hash, Hasher};

use num_bigint::BigUint;
use num_traits::{One, Zero};
use rayon::prelude::*;

use crate::circuit::{Circuit, Gate};
use crate::normal_form::{all_x_circuits, all_z_circuits, NormalForm, Stage, XCircuit, ZCircuit};
use crate::pauli::Sign;
use crate::tableau::{OperatorFingerprint, Tracker};

fn pow(base: u32, e: usize) -> BigUint {
    num_traits::pow(BigUint::from(base), e)
}

/// `4^n + 2^n − 2`.
pub fn count_z_circuits(n: usize) -> BigUint {
    assert!(n >= 1, "Z-circuits need at least one wire");
    pow(4, n) + pow(2, n) - 2u32
}

/// The two partial sums over m = 1..n: Z-circuits starting with A1/A2,
/// `2^(m−1)(2^m + 2)`, and those starting with A3, `2^(m−2)(2^m − 2)`.
pub fn count_z_circuits_by_start(n: usize) -> (BigUint, BigUint) {
    assert!(n >= 1, "Z-circuits need at least one wire");
    let mut a12 = BigUint::zero();
    let mut a3 = BigUint::zero();
    for m in 1..=n {
        a12 += pow(2, m - 1) * (pow(2, m) + 2u32);
        // 2^(m-2)(2^m - 2) = 2^(m-1)(2^(m-1) - 1), which avoids 2^(-1) at m = 1
        a3 += pow(2, m - 1) * (pow(2, m - 1) - 1u32);
    }
    (a12, a3)
}

/// `2·4^(n−1)`.
pub fn count_x_circuits(n: usize) -> BigUint {
    assert!(n >= 1, "X-circuits need at least one wire");
    pow(4, n - 1) * 2u32
}

/// `2·∏_{i=1}^{n} (4^i + 2^i − 2)(2·4^(i−1))`; 2 at n = 0.
pub fn clifford_order(n: usize) -> BigUint {
    (1..=n).fold(BigUint::from(2u32), |acc, i| {
        acc * count_z_circuits(i) * count_x_circuits(i)
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CountReport {
    pub n: usize,
    pub z_count: BigUint,
    pub z_count_a12: BigUint,
    pub z_count_a3: BigUint,
    pub x_count: BigUint,
    pub clifford_order: BigUint,
}

pub fn count_report(n: usize) -> CountReport {
    let (a12, a3) = count_z_circuits_by_start(n);
    CountReport {
        n,
        z_count: count_z_circuits(n),
        z_count_a12: a12,
        z_count_a3: a3,
        x_count: count_x_circuits(n),
        clifford_order: clifford_order(n),
    }
}

/// Stage choices for each width, widest first. Enumeration order is the
/// mixed-radix order over (sign, stage n, …, stage 1), sign most significant.
pub struct StageTable {
    n: usize,
    /// `choices[k]` lists the stages of width n − k.
    choices: Vec<Vec<Stage>>,
}

impl StageTable {
    pub fn new(n: usize) -> Self {
        let choices = (1..=n)
            .rev()
            .map(|i| {
                let xs = all_x_circuits(i);
                all_z_circuits(i)
                    .into_iter()
                    .flat_map(|z: ZCircuit| {
                        xs.iter().map(move |x: &XCircuit| Stage {
                            x: x.clone(),
                            z: z.clone(),
                        })
                    })
                    .collect()
            })
            .collect();
        StageTable { n, choices }
    }

    /// Number of normal forms, sign included.
    pub fn len(&self) -> u64 {
        2 * self.per_sign()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    fn per_sign(&self) -> u64 {
        self.choices.iter().map(|c| c.len() as u64).product()
    }

    pub fn get(&self, index: u64) -> NormalForm {
        assert!(index < self.len());
        let per = self.per_sign();
        let sign = Sign::from_bit(index >= per);
        let mut rest = index % per;
        let mut stages = Vec::with_capacity(self.n);
        for k in (0..self.n).rev() {
            let r = self.choices[k].len() as u64;
            stages.push(self.choices[k][(rest % r) as usize].clone());
            rest /= r;
        }
        stages.reverse();
        NormalForm {
            n: self.n,
            sign,
            stages,
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = NormalForm> + '_ {
        (0..self.len()).map(move |i| self.get(i))
    }
}

/// All normal forms on `n` wires, identity with sign +1 first.
pub fn enumerate_normal_forms(n: usize) -> impl Iterator<Item = NormalForm> {
    let table = StageTable::new(n);
    (0..table.len()).map(move |i| table.get(i))
}

fn digest(f: &OperatorFingerprint) -> u64 {
    let mut h = DefaultHasher::new();
    f.column0.hash(&mut h);
    let col = h.finish();
    let t = f.tableau.packed();
    (t as u64) ^ ((t >> 64) as u64).rotate_left(17) ^ col.rotate_left(31)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BijectionReport {
    pub n: usize,
    pub enumerated: u64,
    pub distinct: u64,
    pub expected: BigUint,
    /// Size of the group generated by the primitive gates, when computed (n ≤ 2).
    pub closure: Option<usize>,
    /// Whether every element of the closure is some normal form (n ≤ 2).
    pub surjective: Option<bool>,
    /// Index pairs of normal forms with equal fingerprints.
    pub collisions: Vec<(u64, u64)>,
}

impl BijectionReport {
    pub fn holds(&self) -> bool {
        self.collisions.is_empty()
            && self.distinct == self.enumerated
            && BigUint::from(self.distinct) == self.expected
            && self.closure.is_none_or(|c| c as u64 == self.distinct)
            && self.surjective.unwrap_or(true)
    }
}

fn walk(table: &StageTable, k: usize, tracker: &Tracker, index: u64, out: &mut Vec<(u64, u64)>) {
    if k == table.n {
        let plus = tracker.clone().fingerprint();
        let mut minus = plus.clone();
        for v in minus.column0.iter_mut() {
            *v = -&*v;
        }
        out.push((digest(&plus), index));
        out.push((digest(&minus), index + table.per_sign()));
        return;
    }
    for (s, stage) in table.choices[k].iter().enumerate() {
        let mut t = tracker.clone();
        t.then_gates(&stage.gates());
        let r = table.choices[k].len() as u64;
        walk(table, k + 1, &t, index * r + s as u64, out);
    }
}

/// Fingerprints of every normal form are pairwise distinct and their number
/// is the group order; for n ≤ 2 they also cover the BFS closure.
pub fn verify_bijection(n: usize) -> BijectionReport {
    assert!(n <= 3, "enumeration is limited to n <= 3");
    let table = StageTable::new(n);
    let mut digests: Vec<(u64, u64)> = if n == 0 {
        let mut out = Vec::new();
        walk(&table, 0, &Tracker::identity(0), 0, &mut out);
        out
    } else {
        let r = table.choices[0].len() as u64;
        let rest = table.per_sign() / r;
        table.choices[0]
            .par_iter()
            .enumerate()
            .flat_map_iter(|(s, stage)| {
                let mut t = Tracker::identity(n);
                t.then_gates(&stage.gates());
                let mut out = Vec::with_capacity(2 * rest as usize);
                walk(&table, 1, &t, s as u64, &mut out);
                out
            })
            .collect()
    };
    digests.par_sort_unstable();
    let enumerated = digests.len() as u64;
    let mut distinct = enumerated;
    let mut collisions = Vec::new();
    for w in digests.windows(2) {
        if w[0].0 == w[1].0 {
            let a = fingerprint_of(&table.get(w[0].1));
            let b = fingerprint_of(&table.get(w[1].1));
            if a == b {
                distinct -= 1;
                collisions.push((w[0].1, w[1].1));
            }
        }
    }
    let (closure, surjective) = if n <= 2 {
        let group = bfs_closure(n);
        let covered = table.iter().all(|nf| group.contains(&fingerprint_of(&nf)));
        (Some(group.len()), Some(covered))
    } else {
        (None, None)
    };
    BijectionReport {
        n,
        enumerated,
        distinct,
        expected: clifford_order(n),
        closure,
        surjective,
        collisions,
    }
}

fn fingerprint_of(nf: &NormalForm) -> OperatorFingerprint {
    let c: Circuit = nf.to_circuit();
    let mut t = Tracker::identity(nf.n);
    t.then_gates(c.gates());
    t.fingerprint()
}

/// Primitive generators: −1, every H and Z, CZ on every pair.
pub fn primitive_generators(n: usize) -> Vec<Gate> {
    let mut gens = vec![Gate::MinusOne];
    for q in 0..n {
        gens.push(Gate::H(q));
        gens.push(Gate::Z(q));
    }
    for a in 0..n {
        for b in a + 1..n {
            gens.push(Gate::CZ(a, b));
        }
    }
    gens
}

/// Every operator reachable from the identity by primitive gates.
pub fn bfs_closure(n: usize) -> HashSet<OperatorFingerprint> {
    let gens = primitive_generators(n);
    let start = Tracker::identity(n);
    let mut seen = HashSet::new();
    seen.insert(start.clone().fingerprint());
    let mut queue = VecDeque::from([start]);
    while let Some(t) = queue.pop_front() {
        for g in &gens {
            let mut next = t.clone();
            next.then_gate(g);
            if seen.insert(next.clone().fingerprint()) {
                queue.push_back(next);
            }
        }
    }
    seen
}

/// Number of normal forms, as a big integer, without enumerating.
pub fn normal_form_count(n: usize) -> BigUint {
    let mut total = BigUint::one() * 2u32;
    for i in 1..=n {
        total *= (all_z_circuits(i).len() * all_x_circuits(i).len()) as u64;
    }
    total
}
