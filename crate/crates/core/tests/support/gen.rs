//! Seeded random feature structures for the lattice properties.
//!
//! Structures are generated as AVM text and parsed, so the generator does
//! not depend on any construction API. Reentrancy is injected by pointing a
//! value at an already completed tagged node, which never closes a cycle.

use ebl_core::fs::{parse_fs, FeatureStructure};
use rand::Rng;

pub const FEATURES: [&str; 6] = ["f", "g", "h", "i", "j", "k"];
pub const ATOMS: [&str; 3] = ["a", "b", "c"];

#[derive(Debug, Clone, Copy)]
pub struct Shape {
    pub max_depth: usize,
    pub max_branch: usize,
    /// Chance that a value reuses an earlier tagged node.
    pub reentrancy: f64,
}

impl Default for Shape {
    fn default() -> Self {
        Shape {
            max_depth: 6,
            max_branch: 4,
            reentrancy: 0.2,
        }
    }
}

struct Writer<'r, R> {
    rng: &'r mut R,
    shape: Shape,
    done: Vec<u32>,
    next: u32,
    out: String,
}

impl<R: Rng> Writer<'_, R> {
    fn value(&mut self, depth: usize) {
        if !self.done.is_empty() && self.rng.gen_bool(self.shape.reentrancy) {
            let t = self.done[self.rng.gen_range(0..self.done.len())];
            self.out.push_str(&format!("#{t}"));
            return;
        }
        // Tag some nodes so later values can share them.
        let tag = self.rng.gen_bool(0.3).then(|| {
            self.next += 1;
            self.next
        });
        if let Some(t) = tag {
            self.out.push_str(&format!("#{t} "));
        }
        let roll: f64 = self.rng.gen();
        if depth >= self.shape.max_depth || roll < 0.25 {
            let atom = ATOMS[self.rng.gen_range(0..ATOMS.len())];
            self.out.push_str(atom);
        } else if roll < 0.35 {
            self.out.push_str("[]");
        } else {
            self.complex(depth);
        }
        if let Some(t) = tag {
            self.done.push(t);
        }
    }

    fn complex(&mut self, depth: usize) {
        let n = self.rng.gen_range(1..=self.shape.max_branch);
        let mut feats = FEATURES.to_vec();
        self.out.push('[');
        for i in 0..n {
            let f = feats.swap_remove(self.rng.gen_range(0..feats.len()));
            if i > 0 {
                self.out.push_str(", ");
            }
            self.out.push_str(f);
            self.out.push(':');
            self.value(depth + 1);
        }
        self.out.push(']');
    }
}

/// AVM text of one random complex structure.
pub fn random_avm(rng: &mut impl Rng, shape: Shape) -> String {
    let mut w = Writer {
        rng,
        shape,
        done: Vec::new(),
        next: 0,
        out: String::new(),
    };
    w.complex(1);
    w.out
}

pub fn random_fs(rng: &mut impl Rng, shape: Shape) -> FeatureStructure {
    let text = random_avm(rng, shape);
    parse_fs(&text).unwrap_or_else(|e| panic!("generated `{text}`: {e}"))
}

/// Two structures, the second sometimes built by perturbing a copy of the
/// first so that unifiable pairs are common.
pub fn random_pair(rng: &mut impl Rng, shape: Shape) -> (FeatureStructure, FeatureStructure) {
    let a = random_avm(rng, shape);
    let b = if rng.gen_bool(0.5) {
        let mut b = a.clone();
        if rng.gen_bool(0.5) {
            let from = ATOMS[rng.gen_range(0..ATOMS.len())];
            b = b.replacen(from, "[]", 1);
        }
        b
    } else {
        random_avm(rng, shape)
    };
    let parse = |t: &str| parse_fs(t).unwrap_or_else(|e| panic!("generated `{t}`: {e}"));
    (parse(&a), parse(&b))
}
