//! Independent reference implementations used by the integration tests.
//! Nothing here calls the rewriting engine.

#![allow(dead_code)]

use std::collections::{BTreeMap, HashMap, HashSet};

pub type Exps = Vec<u16>;

/// Pascal's triangle mod 2, rows `0..=n`.
pub fn pascal_parity(n: usize) -> Vec<Vec<bool>> {
    let mut rows = vec![vec![true]];
    for i in 1..=n {
        let prev = &rows[i - 1];
        let mut row = vec![true; i + 1];
        for j in 1..i {
            row[j] = prev[j - 1] ^ prev[j];
        }
        rows.push(row);
    }
    rows
}

/// All exponent vectors of `nvars` variables with total degree `d`.
pub fn monomials_of_degree(nvars: usize, d: usize) -> Vec<Exps> {
    fn rec(nvars: usize, left: usize, cur: &mut Exps, out: &mut Vec<Exps>) {
        if cur.len() + 1 == nvars {
            cur.push(left as u16);
            out.push(cur.clone());
            cur.pop();
            return;
        }
        for e in (0..=left).rev() {
            cur.push(e as u16);
            rec(nvars, left - e, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    if nvars > 0 {
        rec(nvars, d, &mut Vec::new(), &mut out);
    }
    out
}

/// Complete homogeneous symmetric polynomial `h_j` mod 2.
pub fn complete_homogeneous(nvars: usize, j: usize) -> Vec<Exps> {
    monomials_of_degree(nvars, j)
}

/// Row-reduced span over GF(2) of vectors indexed by monomials of one degree.
pub struct Gf2Span {
    index: HashMap<Exps, usize>,
    words: usize,
    pivots: BTreeMap<usize, Vec<u64>>,
}

impl Gf2Span {
    pub fn new(monomials: &[Exps]) -> Self {
        let index = monomials
            .iter()
            .cloned()
            .enumerate()
            .map(|(i, m)| (m, i))
            .collect();
        Gf2Span {
            index,
            words: monomials.len().div_ceil(64),
            pivots: BTreeMap::new(),
        }
    }

    fn encode(&self, poly: &HashSet<Exps>) -> Vec<u64> {
        let mut v = vec![0u64; self.words];
        for m in poly {
            let i = self.index[m];
            v[i / 64] ^= 1 << (i % 64);
        }
        v
    }

    fn leading(v: &[u64]) -> Option<usize> {
        v.iter()
            .enumerate()
            .rev()
            .find(|(_, w)| **w != 0)
            .map(|(i, w)| i * 64 + 63 - w.leading_zeros() as usize)
    }

    /// Clears leading bits against stored pivots; returns the residue.
    fn residue(&self, mut v: Vec<u64>) -> Vec<u64> {
        while let Some(lp) = Self::leading(&v) {
            let Some(row) = self.pivots.get(&lp) else {
                break;
            };
            for (a, b) in v.iter_mut().zip(row) {
                *a ^= b;
            }
        }
        v
    }

    pub fn insert(&mut self, poly: &HashSet<Exps>) {
        let v = self.residue(self.encode(poly));
        if let Some(lp) = Self::leading(&v) {
            self.pivots.insert(lp, v);
        }
    }

    pub fn contains(&self, poly: &HashSet<Exps>) -> bool {
        Self::leading(&self.residue(self.encode(poly))).is_none()
    }

    pub fn rank(&self) -> usize {
        self.pivots.len()
    }
}

/// `H^*(Λ(k,r); Z2) = Z2[x1..xr] / (h_{k-r+1}, .., h_k)`, presented degree
/// by degree as the span of all multiples of the generators.
pub struct FlagQuotientOracle {
    pub k: usize,
    pub r: usize,
    spans: HashMap<usize, Gf2Span>,
}

impl FlagQuotientOracle {
    pub fn new(k: usize, r: usize) -> Self {
        FlagQuotientOracle {
            k,
            r,
            spans: HashMap::new(),
        }
    }

    pub fn ideal_part(&mut self, d: usize) -> &Gf2Span {
        let (k, r) = (self.k, self.r);
        self.spans.entry(d).or_insert_with(|| {
            let mut span = Gf2Span::new(&monomials_of_degree(r, d));
            for j in (k + 1 - r)..=k.min(d) {
                let h = complete_homogeneous(r, j);
                for m in monomials_of_degree(r, d - j) {
                    let poly: HashSet<Exps> = h
                        .iter()
                        .map(|g| g.iter().zip(&m).map(|(a, b)| a + b).collect())
                        .fold(HashSet::new(), |mut acc, e| {
                            if !acc.remove(&e) {
                                acc.insert(e);
                            }
                            acc
                        });
                    span.insert(&poly);
                }
            }
            span
        })
    }

    pub fn quotient_dim(&mut self, d: usize) -> usize {
        let total = monomials_of_degree(self.r, d).len();
        total - self.ideal_part(d).rank()
    }

    /// `a ≡ b` in the quotient, both homogeneous of degree `d`.
    pub fn congruent(&mut self, a: &HashSet<Exps>, b: &HashSet<Exps>, d: usize) -> bool {
        let diff: HashSet<Exps> = a.symmetric_difference(b).cloned().collect();
        self.ideal_part(d).contains(&diff)
    }
}

/// Degree-one integration over `Λ(k,r)` through the divided-difference
/// formula: `∫ g = [prod z_i^{k-1}] g(z) prod_{m<i}(z_i + z_m)`.
pub fn vandermonde_pairing(k: usize, r: usize, bits: &[bool]) -> bool {
    let mut poly: HashSet<Exps> = HashSet::from([vec![0u16; r]]);
    let toggle = |set: &mut HashSet<Exps>, e: Exps| {
        if !set.remove(&e) {
            set.insert(e);
        }
    };
    let cap = (k - 1) as u16;
    for i in 0..r {
        let mut next = HashSet::new();
        for e in &poly {
            for (a, &b) in bits.iter().enumerate() {
                if b && e[i] + a as u16 <= cap {
                    let mut f = e.clone();
                    f[i] += a as u16;
                    toggle(&mut next, f);
                }
            }
        }
        poly = next;
    }
    for i in 0..r {
        for m in 0..i {
            let mut next = HashSet::new();
            for e in &poly {
                for v in [i, m] {
                    if e[v] < cap {
                        let mut f = e.clone();
                        f[v] += 1;
                        toggle(&mut next, f);
                    }
                }
            }
            poly = next;
        }
    }
    poly.contains(&vec![cap; r])
}

/// Coefficients of `(1+α)^{-(n+1)}` up to `α^n`: `C(n+j, j) mod 2`.
pub fn wbar_rp_bits(n: usize) -> Vec<bool> {
    let pascal = pascal_parity(2 * n);
    (0..=n).map(|j| pascal[n + j][j]).collect()
}
