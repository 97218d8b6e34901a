#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use realstab::{Circuit, Gate, Generator};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A random circuit over every gate token, generators included.
pub fn random_circuit(rng: &mut impl Rng, n: usize, len: usize) -> Circuit {
    let mut gates = Vec::with_capacity(len);
    while gates.len() < len {
        let q = rng.gen_range(0..n);
        let g = match rng.gen_range(0..9) {
            0 => Gate::MinusOne,
            1 | 2 => Gate::H(q),
            3 => Gate::Z(q),
            4 => Gate::X(q),
            5 | 6 if n > 1 => {
                let mut b = rng.gen_range(0..n);
                while b == q {
                    b = rng.gen_range(0..n);
                }
                Gate::CZ(q, b)
            }
            7 if n > 1 => {
                let b = if q + 1 < n { q + 1 } else { q - 1 };
                if rng.gen() {
                    Gate::CXZ(q, b)
                } else {
                    Gate::CX(q, b)
                }
            }
            8 => {
                let g = Generator::ALL[rng.gen_range(0..Generator::ALL.len())];
                let arity = g.kind().arity();
                if arity > n {
                    continue;
                }
                Gate::Gen(g, rng.gen_range(0..=n - arity))
            }
            _ => continue,
        };
        gates.push(g);
    }
    Circuit::new(n, gates).unwrap()
}

/// A random circuit over H, Z and CZ only.
pub fn random_primitive_circuit(rng: &mut impl Rng, n: usize, len: usize) -> Circuit {
    let mut gates = Vec::with_capacity(len);
    for _ in 0..len {
        let q = rng.gen_range(0..n);
        let g = match rng.gen_range(0..3) {
            0 => Gate::H(q),
            1 => Gate::Z(q),
            _ if n > 1 => Gate::CZ(q, (q + 1 + rng.gen_range(0..n - 1)) % n),
            _ => Gate::H(q),
        };
        gates.push(g);
    }
    Circuit::new(n, gates).unwrap()
}
