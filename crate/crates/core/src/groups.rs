//! Group arithmetic for the built-in cocycle ranges: ℤ^d, free groups,
//! the discrete Heisenberg group and finite cyclic groups.
//!
//! Elements are canonical value types (reduced free words, normalized
//! residues) so they can key the hash tables of the constrained dynamic
//! programs. Word length is measured against a fixed symmetric generating
//! set per variant; [`GroupKind::ball`] enumerates closed balls by BFS.

use crate::{Error, Result};
use rustc_hash::{FxHashMap, FxHashSet};

/// Which group a value lives in. `Zd(0)` is the trivial group.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GroupKind {
    Zd(usize),
    Free(usize),
    Heisenberg,
    Cyclic(u64),
}

impl GroupKind {
    pub fn identity(&self) -> GroupElement {
        match *self {
            GroupKind::Zd(d) => GroupElement::Zd(vec![0; d]),
            GroupKind::Free(_) => GroupElement::Free(Vec::new()),
            GroupKind::Heisenberg => GroupElement::Heisenberg(0, 0, 0),
            GroupKind::Cyclic(m) => GroupElement::Cyclic {
                modulus: m,
                value: 0,
            },
        }
    }

    /// The fixed symmetric generating set: ±unit vectors for ℤ^d,
    /// generators and inverses for free groups, x=(1,0,0), y=(0,1,0) and
    /// inverses for Heisenberg, ±1 for cyclic groups.
    pub fn generators(&self) -> Vec<GroupElement> {
        match *self {
            GroupKind::Zd(d) => {
                let mut gens = Vec::with_capacity(2 * d);
                for i in 0..d {
                    for sign in [1i64, -1] {
                        let mut v = vec![0i64; d];
                        v[i] = sign;
                        gens.push(GroupElement::Zd(v));
                    }
                }
                gens
            }
            GroupKind::Free(k) => {
                let mut gens = Vec::with_capacity(2 * k);
                for i in 1..=k as i8 {
                    gens.push(GroupElement::Free(vec![i]));
                    gens.push(GroupElement::Free(vec![-i]));
                }
                gens
            }
            GroupKind::Heisenberg => vec![
                GroupElement::Heisenberg(1, 0, 0),
                GroupElement::Heisenberg(-1, 0, 0),
                GroupElement::Heisenberg(0, 1, 0),
                GroupElement::Heisenberg(0, -1, 0),
            ],
            GroupKind::Cyclic(m) => {
                if m <= 1 {
                    Vec::new()
                } else if m == 2 {
                    vec![GroupElement::Cyclic {
                        modulus: m,
                        value: 1,
                    }]
                } else {
                    vec![
                        GroupElement::Cyclic {
                            modulus: m,
                            value: 1,
                        },
                        GroupElement::Cyclic {
                            modulus: m,
                            value: m - 1,
                        },
                    ]
                }
            }
        }
    }

    /// Rank d of the torsion-free abelianization Ḡ ≅ ℤ^d.
    pub fn ab_rank(&self) -> usize {
        match *self {
            GroupKind::Zd(d) => d,
            GroupKind::Free(k) => k,
            GroupKind::Heisenberg => 2,
            GroupKind::Cyclic(_) => 0,
        }
    }

    /// The projection π: G → ℤ^d onto the torsion-free abelianization.
    pub fn abelianize(&self, g: &GroupElement) -> Result<Vec<i64>> {
        self.check(g)?;
        Ok(match g {
            GroupElement::Zd(v) => v.clone(),
            GroupElement::Free(word) => {
                let k = match *self {
                    GroupKind::Free(k) => k,
                    _ => unreachable!(),
                };
                let mut exps = vec![0i64; k];
                for &letter in word {
                    let idx = (letter.unsigned_abs() as usize) - 1;
                    exps[idx] += if letter > 0 { 1 } else { -1 };
                }
                exps
            }
            GroupElement::Heisenberg(a, b, _) => vec![*a, *b],
            GroupElement::Cyclic { .. } => Vec::new(),
        })
    }

    fn check(&self, g: &GroupElement) -> Result<()> {
        let ok = match (self, g) {
            (GroupKind::Zd(d), GroupElement::Zd(v)) => v.len() == *d,
            (GroupKind::Free(k), GroupElement::Free(w)) => w
                .iter()
                .all(|&l| l != 0 && (l.unsigned_abs() as usize) <= *k),
            (GroupKind::Heisenberg, GroupElement::Heisenberg(..)) => true,
            (GroupKind::Cyclic(m), GroupElement::Cyclic { modulus, .. }) => modulus == m,
            _ => false,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::VariantMismatch(format!(
                "element {g:?} does not belong to {self:?}"
            )))
        }
    }

    /// Group product. Free results are reduced; cyclic residues normalized.
    pub fn op(&self, g: &GroupElement, h: &GroupElement) -> Result<GroupElement> {
        self.check(g)?;
        self.check(h)?;
        Ok(match (g, h) {
            (GroupElement::Zd(a), GroupElement::Zd(b)) => {
                GroupElement::Zd(a.iter().zip(b).map(|(x, y)| x + y).collect())
            }
            (GroupElement::Free(a), GroupElement::Free(b)) => {
                let mut out = a.clone();
                for &letter in b {
                    if out.last().is_some_and(|&l| l == -letter) {
                        out.pop();
                    } else {
                        out.push(letter);
                    }
                }
                GroupElement::Free(out)
            }
            (GroupElement::Heisenberg(a, b, c), GroupElement::Heisenberg(a2, b2, c2)) => {
                // upper-triangular convention: c picks up a·b′
                GroupElement::Heisenberg(a + a2, b + b2, c + c2 + a * b2)
            }
            (GroupElement::Cyclic { modulus, value }, GroupElement::Cyclic { value: v2, .. }) => {
                GroupElement::Cyclic {
                    modulus: *modulus,
                    value: (value + v2) % modulus,
                }
            }
            _ => unreachable!("checked above"),
        })
    }

    pub fn inv(&self, g: &GroupElement) -> Result<GroupElement> {
        self.check(g)?;
        Ok(match g {
            GroupElement::Zd(v) => GroupElement::Zd(v.iter().map(|x| -x).collect()),
            GroupElement::Free(w) => GroupElement::Free(w.iter().rev().map(|&l| -l).collect()),
            GroupElement::Heisenberg(a, b, c) => GroupElement::Heisenberg(-a, -b, a * b - c),
            GroupElement::Cyclic { modulus, value } => GroupElement::Cyclic {
                modulus: *modulus,
                value: if *value == 0 { 0 } else { modulus - value },
            },
        })
    }

    /// Closed ball of word-length ≤ `radius`, enumerated by BFS over the
    /// fixed generating set. Errors when the ball would exceed
    /// `budget_entries`.
    pub fn ball(&self, radius: usize, budget_entries: usize) -> Result<Vec<GroupElement>> {
        let mut seen = FxHashSet::default();
        let mut frontier = vec![self.identity()];
        seen.insert(self.identity());
        let mut out = vec![self.identity()];
        let gens = self.generators();
        for _ in 0..radius {
            let mut next = Vec::new();
            for g in &frontier {
                for gen in &gens {
                    let h = self.op(g, gen)?;
                    if seen.insert(h.clone()) {
                        if seen.len() > budget_entries {
                            return Err(Error::Budget(format!(
                                "ball of radius {radius} exceeds {budget_entries} elements"
                            )));
                        }
                        next.push(h.clone());
                        out.push(h);
                    }
                }
            }
            if next.is_empty() {
                break;
            }
            frontier = next;
        }
        Ok(out)
    }

    /// Exact word lengths of a finite set of elements, by BFS capped at
    /// `max_radius`. Elements not found within the cap map to `None`.
    pub fn word_lengths(
        &self,
        targets: &[GroupElement],
        max_radius: usize,
        budget_entries: usize,
    ) -> Result<Vec<Option<usize>>> {
        let mut dist: FxHashMap<GroupElement, usize> = FxHashMap::default();
        dist.insert(self.identity(), 0);
        let mut frontier = vec![self.identity()];
        let gens = self.generators();
        let mut remaining: usize = targets.iter().filter(|t| !dist.contains_key(*t)).count();
        let mut r = 0;
        while remaining > 0 && r < max_radius && !frontier.is_empty() {
            r += 1;
            let mut next = Vec::new();
            for g in &frontier {
                for gen in &gens {
                    let h = self.op(g, gen)?;
                    if !dist.contains_key(&h) {
                        if dist.len() >= budget_entries {
                            return Err(Error::Budget("word-length BFS exceeded budget".into()));
                        }
                        dist.insert(h.clone(), r);
                        if targets.contains(&h) {
                            remaining = remaining
                                .saturating_sub(targets.iter().filter(|t| **t == h).count());
                        }
                        next.push(h);
                    }
                }
            }
            frontier = next;
        }
        Ok(targets.iter().map(|t| dist.get(t).copied()).collect())
    }

    /// A provable lower bound on the word length of `g`. Used to prune DP
    /// layers: an element whose bound exceeds the walk budget cannot
    /// return to the target, so dropping it is exact.
    pub fn word_length_lower_bound(&self, g: &GroupElement) -> u64 {
        match g {
            GroupElement::Zd(v) => v.iter().map(|x| x.unsigned_abs()).sum(),
            GroupElement::Free(w) => w.len() as u64,
            GroupElement::Heisenberg(a, b, c) => {
                // each step moves a or b by 1, and |c| grows by at most the
                // current |a| ≤ step count, so |c| ≤ L(L−1)/2 after L steps
                let ab = a.unsigned_abs() + b.unsigned_abs();
                let c = c.unsigned_abs();
                let mut lo = 0u64;
                let mut hi = 2 * int_sqrt(c) + 2;
                while lo < hi {
                    let mid = (lo + hi) / 2;
                    if mid * mid.saturating_sub(1) / 2 >= c {
                        hi = mid;
                    } else {
                        lo = mid + 1;
                    }
                }
                ab.max(lo)
            }
            GroupElement::Cyclic { modulus, value } => {
                if *modulus == 0 {
                    0
                } else {
                    (*value).min(modulus - value)
                }
            }
        }
    }
}

fn int_sqrt(n: u64) -> u64 {
    (n as f64).sqrt() as u64 + 1
}

/// An element of one of the built-in groups. Canonical form by
/// construction: free words reduced, cyclic residues in `0..m`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum GroupElement {
    Zd(Vec<i64>),
    /// Reduced word; letter ±i is the i-th generator or its inverse.
    Free(Vec<i8>),
    /// (a, b, c) with (a,b,c)·(a′,b′,c′) = (a+a′, b+b′, c+c′+a·b′).
    Heisenberg(i64, i64, i64),
    Cyclic {
        modulus: u64,
        value: u64,
    },
}

impl GroupElement {
    pub fn is_identity(&self) -> bool {
        match self {
            GroupElement::Zd(v) => v.iter().all(|&x| x == 0),
            GroupElement::Free(w) => w.is_empty(),
            GroupElement::Heisenberg(a, b, c) => *a == 0 && *b == 0 && *c == 0,
            GroupElement::Cyclic { value, .. } => *value == 0,
        }
    }
}

/// The projection homomorphism π: G → Ḡ ≅ ℤ^d onto the torsion-free part
/// of the abelianization.
#[derive(Debug, Clone, Copy)]
pub struct Abelianization {
    kind: GroupKind,
}

impl Abelianization {
    pub fn new(kind: GroupKind) -> Self {
        Abelianization { kind }
    }

    pub fn rank(&self) -> usize {
        self.kind.ab_rank()
    }

    pub fn apply(&self, g: &GroupElement) -> Result<Vec<i64>> {
        self.kind.abelianize(g)
    }
}

/// A state-indexed cocycle ψ: one group element per state.
#[derive(Debug, Clone)]
pub struct Cocycle {
    kind: GroupKind,
    values: Vec<GroupElement>,
    /// Upper bound on the word length of any single step, when known.
    /// `None` disables DP pruning (still correct, just slower).
    max_step_len: Option<u64>,
}

impl Cocycle {
    pub fn new(kind: GroupKind, values: Vec<GroupElement>) -> Result<Self> {
        for v in &values {
            kind.check(v)?;
        }
        // exact step lengths via a small BFS; fall back to no pruning if
        // some value sits outside the search radius
        let lens = kind.word_lengths(&values, 24, 4_000_000)?;
        let max_step_len = lens
            .iter()
            .copied()
            .collect::<Option<Vec<_>>>()
            .map(|ls| ls.into_iter().max().map(|m| m as u64).unwrap_or(0));
        Ok(Cocycle {
            kind,
            values,
            max_step_len,
        })
    }

    /// The all-identity cocycle (degenerate; useful in tests).
    pub fn trivial(kind: GroupKind, states: usize) -> Self {
        Cocycle {
            values: vec![kind.identity(); states],
            kind,
            max_step_len: Some(0),
        }
    }

    pub fn kind(&self) -> GroupKind {
        self.kind
    }

    pub fn states(&self) -> usize {
        self.values.len()
    }

    pub fn value(&self, state: u32) -> &GroupElement {
        &self.values[state as usize]
    }

    pub fn values(&self) -> &[GroupElement] {
        &self.values
    }

    pub fn max_step_len(&self) -> Option<u64> {
        self.max_step_len
    }

    /// Running product ψ(w₁)ψ(w₂)⋯ψ(w_n) along a word.
    pub fn product(&self, symbols: &[u32]) -> Result<GroupElement> {
        let mut acc = self.kind.identity();
        for &s in symbols {
            if s as usize >= self.values.len() {
                return Err(Error::Dimension(format!(
                    "cocycle has {} states, word uses state {}",
                    self.values.len(),
                    s + 1
                )));
            }
            acc = self.kind.op(&acc, &self.values[s as usize])?;
        }
        Ok(acc)
    }

    /// Abelianized per-state values f(i) = π(ψ(i)) as integer vectors.
    pub fn abelianized(&self) -> Result<Vec<Vec<i64>>> {
        self.values
            .iter()
            .map(|v| self.kind.abelianize(v))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f2() -> GroupKind {
        GroupKind::Free(2)
    }

    #[test]
    fn free_reduction_cancels() {
        let g = GroupElement::Free(vec![1]);
        let ginv = f2().inv(&g).unwrap();
        let prod = f2().op(&g, &ginv).unwrap();
        assert!(prod.is_identity());
    }

    #[test]
    fn heisenberg_non_commutative() {
        let k = GroupKind::Heisenberg;
        let x = GroupElement::Heisenberg(1, 0, 0);
        let y = GroupElement::Heisenberg(0, 1, 0);
        assert_eq!(k.op(&x, &y).unwrap(), GroupElement::Heisenberg(1, 1, 1));
        assert_eq!(k.op(&y, &x).unwrap(), GroupElement::Heisenberg(1, 1, 0));
    }

    #[test]
    fn heisenberg_inverse() {
        let k = GroupKind::Heisenberg;
        for g in k.ball(3, 10_000).unwrap() {
            let gi = k.inv(&g).unwrap();
            assert!(k.op(&g, &gi).unwrap().is_identity());
            assert!(k.op(&gi, &g).unwrap().is_identity());
        }
    }

    #[test]
    fn heisenberg_associativity_on_ball() {
        let k = GroupKind::Heisenberg;
        let ball = k.ball(2, 10_000).unwrap();
        for a in &ball {
            for b in &ball {
                for c in &ball {
                    let ab_c = k.op(&k.op(a, b).unwrap(), c).unwrap();
                    let a_bc = k.op(a, &k.op(b, c).unwrap()).unwrap();
                    assert_eq!(ab_c, a_bc);
                }
            }
        }
    }

    #[test]
    fn zd_inverse_sums_to_zero() {
        let k = GroupKind::Zd(2);
        let g = GroupElement::Zd(vec![3, -1]);
        let h = GroupElement::Zd(vec![-3, 1]);
        assert!(k.op(&g, &h).unwrap().is_identity());
    }

    #[test]
    fn variant_mismatch_rejected() {
        let k = GroupKind::Zd(2);
        let g = GroupElement::Zd(vec![1, 2]);
        let h = GroupElement::Zd(vec![1, 2, 3]);
        assert!(k.op(&g, &h).is_err());
        let w = GroupElement::Free(vec![1]);
        assert!(k.op(&g, &w).is_err());
    }

    #[test]
    fn ball_sizes() {
        assert_eq!(GroupKind::Zd(1).ball(2, 1000).unwrap().len(), 5);
        assert_eq!(f2().ball(2, 1000).unwrap().len(), 17);
        // cyclic 5: whole group by radius 2
        assert_eq!(GroupKind::Cyclic(5).ball(2, 1000).unwrap().len(), 5);
    }

    #[test]
    fn heisenberg_ball_matches_brute_force_products() {
        let k = GroupKind::Heisenberg;
        let ball = k.ball(2, 10_000).unwrap();
        // brute force: all products of ≤ 2 generators
        let mut brute = FxHashSet::default();
        brute.insert(k.identity());
        let gens = k.generators();
        for g in &gens {
            brute.insert(g.clone());
            for h in &gens {
                brute.insert(k.op(g, h).unwrap());
            }
        }
        let ball_set: FxHashSet<_> = ball.iter().cloned().collect();
        assert_eq!(ball_set, brute);
        assert!(ball_set.contains(&GroupElement::Heisenberg(1, 1, 1)));
        assert!(ball_set.contains(&GroupElement::Heisenberg(0, 0, 0)));
    }

    #[test]
    fn ball_budget_enforced() {
        assert!(matches!(f2().ball(8, 100), Err(Error::Budget(_))));
    }

    #[test]
    fn free_reduction_matches_brute_force_small_words() {
        // all raw words of length ≤ 6 over F2 letters, reduced two ways
        fn brute_reduce(word: &[i8]) -> Vec<i8> {
            let mut cur: Vec<i8> = word.to_vec();
            loop {
                let mut next = Vec::with_capacity(cur.len());
                let mut changed = false;
                let mut i = 0;
                while i < cur.len() {
                    if i + 1 < cur.len() && cur[i] == -cur[i + 1] {
                        changed = true;
                        i += 2;
                    } else {
                        next.push(cur[i]);
                        i += 1;
                    }
                }
                cur = next;
                if !changed {
                    return cur;
                }
            }
        }
        let letters = [1i8, -1, 2, -2];
        let mut words: Vec<Vec<i8>> = vec![Vec::new()];
        for _ in 0..6 {
            let mut grown = Vec::new();
            for w in &words {
                for &l in &letters {
                    let mut v = w.clone();
                    v.push(l);
                    grown.push(v);
                }
            }
            words.extend(grown.clone());
            words = words.into_iter().collect();
            if words.len() > 6000 {
                break;
            }
        }
        for raw in words.iter().take(6000) {
            let via_ops = raw.iter().fold(f2().identity(), |acc, &l| {
                f2().op(&acc, &GroupElement::Free(vec![l])).unwrap()
            });
            let brute = brute_reduce(raw);
            // brute may need repeated passes but is idempotent at fixpoint
            assert_eq!(via_ops, GroupElement::Free(brute_reduce(&brute)));
        }
    }

    #[test]
    fn abelianization_is_homomorphism_sampled() {
        let kinds = [
            f2(),
            GroupKind::Heisenberg,
            GroupKind::Zd(2),
            GroupKind::Cyclic(6),
        ];
        for kind in kinds {
            let ball = kind.ball(3, 100_000).unwrap();
            let take = ball.len().min(32);
            for g in ball.iter().take(take) {
                for h in ball.iter().take(take) {
                    let gh = kind.op(g, h).unwrap();
                    let pg = kind.abelianize(g).unwrap();
                    let ph = kind.abelianize(h).unwrap();
                    let pgh = kind.abelianize(&gh).unwrap();
                    let sum: Vec<i64> = pg.iter().zip(&ph).map(|(a, b)| a + b).collect();
                    assert_eq!(pgh, sum);
                }
            }
            assert!(kind
                .abelianize(&kind.identity())
                .unwrap()
                .iter()
                .all(|&x| x == 0));
        }
    }

    #[test]
    fn word_length_symmetric_under_inverse() {
        for kind in [f2(), GroupKind::Heisenberg, GroupKind::Zd(2)] {
            let ball = kind.ball(3, 100_000).unwrap();
            let invs: Vec<GroupElement> = ball.iter().map(|g| kind.inv(g).unwrap()).collect();
            let l1 = kind.word_lengths(&ball, 6, 1_000_000).unwrap();
            let l2 = kind.word_lengths(&invs, 6, 1_000_000).unwrap();
            assert_eq!(l1, l2);
        }
    }

    #[test]
    fn word_length_lower_bound_is_admissible() {
        for kind in [
            f2(),
            GroupKind::Heisenberg,
            GroupKind::Zd(2),
            GroupKind::Cyclic(7),
        ] {
            let ball = kind.ball(4, 1_000_000).unwrap();
            let exact = kind.word_lengths(&ball, 8, 4_000_000).unwrap();
            for (g, len) in ball.iter().zip(exact) {
                let lb = kind.word_length_lower_bound(g);
                let exact = len.expect("ball elements are within radius") as u64;
                assert!(
                    lb <= exact,
                    "bound {lb} exceeds exact length {exact} for {g:?}"
                );
            }
        }
    }

    #[test]
    fn cocycle_product_free_identity() {
        let kind = f2();
        let c = Cocycle::new(
            kind,
            vec![
                GroupElement::Free(vec![1]),
                GroupElement::Free(vec![-1]),
                GroupElement::Free(vec![2]),
                GroupElement::Free(vec![-2]),
            ],
        )
        .unwrap();
        assert!(c.product(&[0, 1, 2, 3]).unwrap().is_identity());
        assert_eq!(c.max_step_len(), Some(1));
    }

    #[test]
    fn cocycle_product_heisenberg_commutator() {
        let kind = GroupKind::Heisenberg;
        let c = Cocycle::new(
            kind,
            vec![
                GroupElement::Heisenberg(1, 0, 0),
                GroupElement::Heisenberg(-1, 0, 0),
                GroupElement::Heisenberg(0, 1, 0),
                GroupElement::Heisenberg(0, -1, 0),
            ],
        )
        .unwrap();
        // x y x⁻¹ y⁻¹ = (0,0,1)
        assert_eq!(
            c.product(&[0, 2, 1, 3]).unwrap(),
            GroupElement::Heisenberg(0, 0, 1)
        );
    }

    #[test]
    fn trivial_cocycle_products_are_identity() {
        let c = Cocycle::trivial(GroupKind::Zd(1), 3);
        assert!(c.product(&[0, 1, 2, 2, 1]).unwrap().is_identity());
    }
}
