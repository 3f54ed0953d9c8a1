//! Finite Markov shifts, words, cylinders and locally constant potentials.
//!
//! A [`ShiftSystem`] is a finite state set with a 0/1 transition matrix and
//! structural flags (strong connectivity, period, mixing). Potentials are
//! restricted to depth ≤ 2 (locally constant), which makes every Birkhoff
//! sum a finite sum over edges and every weighted periodic-orbit sum an
//! exact matrix trace. [`ShiftSystem::periodic_words`] is the brute-force
//! enumeration oracle the rest of the crate is tested against.

use crate::{Error, Result};

/// Default ceiling for brute-force enumeration (`periodic_words`,
/// `allowed_words`). Callers with an explicit budget use the `_capped`
/// variants.
pub const DEFAULT_ORACLE_CEILING: usize = 20;

/// A finite Markov shift: states, transition matrix and structural flags.
#[derive(Debug, Clone)]
pub struct ShiftSystem {
    labels: Vec<String>,
    adjacency: Vec<bool>, // row-major S×S
    successors: Vec<Vec<u32>>,
    predecessors: Vec<Vec<u32>>,
    transitive: bool,
    period: u32,
    full: bool,
}

impl ShiftSystem {
    /// Build a system from a row-major adjacency matrix and validate it.
    ///
    /// Rejects non-square input and dead states (a state with no successor
    /// or no predecessor), naming the offending state. Strong connectivity
    /// and the period are computed here; non-transitive systems are
    /// constructible (so eigensolver error paths can be exercised) but the
    /// config parser rejects them.
    pub fn new(adjacency: Vec<Vec<bool>>) -> Result<Self> {
        let s = adjacency.len();
        if s == 0 {
            return Err(Error::Validation("empty state set".into()));
        }
        for (i, row) in adjacency.iter().enumerate() {
            if row.len() != s {
                return Err(Error::Validation(format!(
                    "adjacency matrix is not square: row {} has {} entries, expected {}",
                    i + 1,
                    row.len(),
                    s
                )));
            }
        }
        let labels = (1..=s).map(|i| i.to_string()).collect();
        Self::with_labels(adjacency, labels)
    }

    /// As [`ShiftSystem::new`] with explicit display labels.
    pub fn with_labels(adjacency: Vec<Vec<bool>>, labels: Vec<String>) -> Result<Self> {
        let s = adjacency.len();
        if labels.len() != s {
            return Err(Error::Validation(format!(
                "{} labels for {} states",
                labels.len(),
                s
            )));
        }
        let mut flat = Vec::with_capacity(s * s);
        let mut successors = vec![Vec::new(); s];
        let mut predecessors = vec![Vec::new(); s];
        for (i, row) in adjacency.iter().enumerate() {
            for (j, &allowed) in row.iter().enumerate() {
                flat.push(allowed);
                if allowed {
                    successors[i].push(j as u32);
                    predecessors[j].push(i as u32);
                }
            }
        }
        for i in 0..s {
            if successors[i].is_empty() {
                return Err(Error::Validation(format!(
                    "dead state {}: no outgoing edge",
                    labels[i]
                )));
            }
            if predecessors[i].is_empty() {
                return Err(Error::Validation(format!(
                    "dead state {}: no incoming edge",
                    labels[i]
                )));
            }
        }
        let full = flat.iter().all(|&b| b);
        let transitive = strongly_connected(&successors);
        let period = graph_period(&successors);
        Ok(ShiftSystem {
            labels,
            adjacency: flat,
            successors,
            predecessors,
            transitive,
            period,
            full,
        })
    }

    /// Full shift on `s` symbols.
    pub fn full_shift(s: usize) -> Self {
        ShiftSystem::new(vec![vec![true; s]; s]).expect("full shift is always valid")
    }

    /// Golden-mean shift: 2 states, edge (2,2) forbidden.
    pub fn golden_mean() -> Self {
        ShiftSystem::new(vec![vec![true, true], vec![true, false]]).expect("valid")
    }

    pub fn state_count(&self) -> usize {
        self.labels.len()
    }

    pub fn label(&self, i: u32) -> &str {
        &self.labels[i as usize]
    }

    #[inline]
    pub fn allowed(&self, i: u32, j: u32) -> bool {
        self.adjacency[i as usize * self.labels.len() + j as usize]
    }

    pub fn successors(&self, i: u32) -> &[u32] {
        &self.successors[i as usize]
    }

    pub fn predecessors(&self, j: u32) -> &[u32] {
        &self.predecessors[j as usize]
    }

    pub fn edge_count(&self) -> usize {
        self.successors.iter().map(Vec::len).sum()
    }

    /// Strong connectivity of the transition graph.
    pub fn transitive(&self) -> bool {
        self.transitive
    }

    /// gcd of the lengths of all cycles through the reference component.
    pub fn period(&self) -> u32 {
        self.period
    }

    /// Topological mixing: strongly connected with period 1.
    pub fn mixing(&self) -> bool {
        self.transitive && self.period == 1
    }

    /// Whether every edge is allowed.
    pub fn is_full(&self) -> bool {
        self.full
    }

    /// Smallest `n ≤ s²` with all entries of Aⁿ positive, when one exists.
    ///
    /// Mixing systems must produce `Some(n)`; periodic or non-transitive
    /// systems produce `None`. Used to cross-check the `mixing` flag
    /// against the N(a,b) definition.
    pub fn primitivity_exponent(&self) -> Option<usize> {
        let s = self.state_count();
        let cap = s * s + 1;
        // boolean matrix powers
        let mut cur = self.adjacency.clone();
        for n in 1..=cap {
            if cur.iter().all(|&b| b) {
                return Some(n);
            }
            if n == cap {
                break;
            }
            let mut next = vec![false; s * s];
            for i in 0..s {
                for k in 0..s {
                    if cur[i * s + k] {
                        for j in 0..s {
                            if self.adjacency[k * s + j] {
                                next[i * s + j] = true;
                            }
                        }
                    }
                }
            }
            cur = next;
        }
        None
    }

    /// Exact integer trace of Aⁿ. Only for small systems and moderate n;
    /// errors on overflow.
    pub fn trace_pow_exact(&self, n: usize) -> Result<u128> {
        let s = self.state_count();
        if s > 64 {
            return Err(Error::Budget(format!(
                "exact trace supported for ≤ 64 states, got {s}"
            )));
        }
        let mut pow = vec![0u128; s * s]; // identity
        for i in 0..s {
            pow[i * s + i] = 1;
        }
        let a: Vec<u128> = self.adjacency.iter().map(|&b| u128::from(b)).collect();
        for _ in 0..n {
            let mut next = vec![0u128; s * s];
            for i in 0..s {
                for k in 0..s {
                    let v = pow[i * s + k];
                    if v != 0 {
                        for j in 0..s {
                            if a[k * s + j] != 0 {
                                next[i * s + j] =
                                    next[i * s + j].checked_add(v).ok_or_else(|| {
                                        Error::Budget("integer trace overflow".into())
                                    })?;
                            }
                        }
                    }
                }
            }
            pow = next;
        }
        Ok((0..s).map(|i| pow[i * s + i]).sum())
    }

    /// Validate a word against the transition matrix.
    pub fn word(&self, symbols: Vec<u32>) -> Result<Word> {
        if symbols.is_empty() {
            return Err(Error::Validation("empty word".into()));
        }
        let s = self.state_count() as u32;
        for &a in &symbols {
            if a >= s {
                return Err(Error::Validation(format!(
                    "state index {} out of range (1..={})",
                    a + 1,
                    s
                )));
            }
        }
        for pair in symbols.windows(2) {
            if !self.allowed(pair[0], pair[1]) {
                return Err(Error::Validation(format!(
                    "word not allowed: edge {}->{} forbidden",
                    self.labels[pair[0] as usize], self.labels[pair[1] as usize]
                )));
            }
        }
        Ok(Word { symbols })
    }

    /// Lexicographic stream of allowed words `w` of length `n` with the
    /// wrap edge `A(w_n, w_1) = 1`, i.e. the periodic points of period
    /// dividing... exactly the words coding `σⁿx = x`. The count equals
    /// `trace(Aⁿ)`.
    pub fn periodic_words(&self, n: usize) -> Result<WordStream<'_>> {
        self.periodic_words_capped(n, DEFAULT_ORACLE_CEILING)
    }

    pub fn periodic_words_capped(&self, n: usize, ceiling: usize) -> Result<WordStream<'_>> {
        if n == 0 {
            return Err(Error::Validation("word length must be ≥ 1".into()));
        }
        if n > ceiling {
            return Err(Error::Budget(format!(
                "length {n} above oracle ceiling {ceiling}; use matrix methods instead"
            )));
        }
        Ok(WordStream::new(self, n, true))
    }

    /// Lexicographic stream of all allowed words of length `n` (no wrap
    /// constraint).
    pub fn allowed_words(&self, n: usize) -> Result<WordStream<'_>> {
        self.allowed_words_capped(n, DEFAULT_ORACLE_CEILING)
    }

    pub fn allowed_words_capped(&self, n: usize, ceiling: usize) -> Result<WordStream<'_>> {
        if n == 0 {
            return Err(Error::Validation("word length must be ≥ 1".into()));
        }
        if n > ceiling {
            return Err(Error::Budget(format!(
                "length {n} above oracle ceiling {ceiling}"
            )));
        }
        Ok(WordStream::new(self, n, false))
    }

    /// Periodic Birkhoff sum Σ_{t=1..n} φ(w_t, w_{t+1}) with w_{n+1} = w_1.
    pub fn birkhoff_periodic(&self, p: &Potential, w: &Word) -> Result<f64> {
        let syms = &w.symbols;
        let n = syms.len();
        if !self.allowed(syms[n - 1], syms[0]) {
            return Err(Error::Validation(format!(
                "periodic evaluation: wrap edge {}->{} forbidden",
                self.labels[syms[n - 1] as usize],
                self.labels[syms[0] as usize]
            )));
        }
        let mut sum = 0.0;
        for t in 0..n {
            let a = syms[t];
            let b = syms[(t + 1) % n];
            sum += p.edge(a, b);
        }
        Ok(sum)
    }

    /// Non-periodic Birkhoff sum along `w` continued by `next`:
    /// Σ_{t<n} φ(w_t, w_{t+1}) + φ(w_n, next). A depth-1 potential ignores
    /// the continuation value (its edge weights depend on the source state
    /// only), but the continuation edge must still be allowed.
    pub fn birkhoff_continued(&self, p: &Potential, w: &Word, next: u32) -> Result<f64> {
        let syms = &w.symbols;
        let last = *syms.last().expect("nonempty");
        if !self.allowed(last, next) {
            return Err(Error::Validation(format!(
                "continuation edge {}->{} forbidden",
                self.labels[last as usize], self.labels[next as usize]
            )));
        }
        let mut sum = 0.0;
        for pair in syms.windows(2) {
            sum += p.edge(pair[0], pair[1]);
        }
        sum += p.edge(last, next);
        Ok(sum)
    }

    /// First hop of a shortest directed path `from -> to` of length ≥ 1,
    /// with smallest-index tie-break. `Some(to)` if the edge exists. Used
    /// to pick the fixed continuation point for Gibbs-bound evaluation.
    pub fn shortest_return_hop(&self, from: u32, to: u32) -> Option<u32> {
        if self.allowed(from, to) {
            return Some(to);
        }
        // BFS distance from every state to `to`
        let s = self.state_count();
        let mut dist = vec![usize::MAX; s];
        let mut queue = std::collections::VecDeque::new();
        dist[to as usize] = 0;
        queue.push_back(to);
        while let Some(u) = queue.pop_front() {
            for &v in self.predecessors(u) {
                if dist[v as usize] == usize::MAX {
                    dist[v as usize] = dist[u as usize] + 1;
                    queue.push_back(v);
                }
            }
        }
        self.successors(from)
            .iter()
            .copied()
            .filter(|&h| dist[h as usize] != usize::MAX)
            .min_by_key(|&h| (dist[h as usize], h))
    }
}

fn strongly_connected(successors: &[Vec<u32>]) -> bool {
    let s = successors.len();
    let reach = |lists: &[Vec<u32>]| -> usize {
        let mut seen = vec![false; s];
        let mut stack = vec![0u32];
        seen[0] = true;
        let mut count = 1;
        while let Some(u) = stack.pop() {
            for &v in &lists[u as usize] {
                if !seen[v as usize] {
                    seen[v as usize] = true;
                    count += 1;
                    stack.push(v);
                }
            }
        }
        count
    };
    let mut reversed = vec![Vec::new(); s];
    for (i, succ) in successors.iter().enumerate() {
        for &j in succ {
            reversed[j as usize].push(i as u32);
        }
    }
    reach(successors) == s && reach(&reversed) == s
}

/// gcd of (level(u) + 1 − level(v)) over edges reachable from state 0,
/// where levels come from a BFS rooted at state 0. For strongly connected
/// graphs this is the gcd of all cycle lengths.
fn graph_period(successors: &[Vec<u32>]) -> u32 {
    let s = successors.len();
    let mut level = vec![i64::MIN; s];
    let mut queue = std::collections::VecDeque::new();
    level[0] = 0;
    queue.push_back(0u32);
    let mut g: i64 = 0;
    while let Some(u) = queue.pop_front() {
        for &v in &successors[u as usize] {
            if level[v as usize] == i64::MIN {
                level[v as usize] = level[u as usize] + 1;
                queue.push_back(v);
            } else {
                let diff = (level[u as usize] + 1 - level[v as usize]).abs();
                g = gcd64(g, diff);
            }
        }
    }
    if g == 0 {
        1
    } else {
        g as u32
    }
}

fn gcd64(a: i64, b: i64) -> i64 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        let t = b;
        b = a % b;
        a = t;
    }
    a
}

/// An allowed finite word of states (0-based indices).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Word {
    symbols: Vec<u32>,
}

impl Word {
    pub fn symbols(&self) -> &[u32] {
        &self.symbols
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    /// Cyclic rotation by `k` (used by the rotation-invariance tests).
    pub fn rotated(&self, k: usize) -> Word {
        let n = self.symbols.len();
        let symbols = (0..n).map(|t| self.symbols[(t + k) % n]).collect();
        Word { symbols }
    }
}

/// Deterministic lexicographic DFS over allowed words of a fixed length,
/// optionally restricted to words whose wrap edge is allowed. Restartable:
/// a fresh stream from the same system yields the identical sequence.
pub struct WordStream<'a> {
    system: &'a ShiftSystem,
    n: usize,
    periodic: bool,
    // DFS state: prefix plus, per position, the index into successors()
    // (position 0 indexes the raw state list).
    prefix: Vec<u32>,
    choice: Vec<usize>,
    done: bool,
}

impl<'a> WordStream<'a> {
    fn new(system: &'a ShiftSystem, n: usize, periodic: bool) -> Self {
        WordStream {
            system,
            n,
            periodic,
            prefix: Vec::with_capacity(n),
            choice: Vec::with_capacity(n),
            done: false,
        }
    }

    fn candidate(&self, pos: usize, idx: usize) -> Option<u32> {
        if pos == 0 {
            let s = self.system.state_count();
            if idx < s {
                Some(idx as u32)
            } else {
                None
            }
        } else {
            let prev = self.prefix[pos - 1];
            self.system.successors(prev).get(idx).copied()
        }
    }
}

impl Iterator for WordStream<'_> {
    type Item = Word;

    fn next(&mut self) -> Option<Word> {
        if self.done {
            return None;
        }
        // On re-entry, advance past the word we just emitted.
        let mut backtrack = !self.prefix.is_empty();
        loop {
            if backtrack {
                // advance the deepest position that still has a sibling
                loop {
                    match self.prefix.pop() {
                        None => {
                            self.done = true;
                            return None;
                        }
                        Some(_) => {
                            let pos = self.prefix.len();
                            let next_idx = self.choice.pop().expect("parallel stacks") + 1;
                            if let Some(state) = self.candidate(pos, next_idx) {
                                self.prefix.push(state);
                                self.choice.push(next_idx);
                                break;
                            }
                        }
                    }
                }
                backtrack = false;
            }
            // extend to full length
            while self.prefix.len() < self.n {
                let pos = self.prefix.len();
                match self.candidate(pos, 0) {
                    Some(state) => {
                        self.prefix.push(state);
                        self.choice.push(0);
                    }
                    None => {
                        backtrack = true;
                        break;
                    }
                }
            }
            if backtrack {
                continue;
            }
            let ok = !self.periodic || self.system.allowed(self.prefix[self.n - 1], self.prefix[0]);
            if ok {
                return Some(Word {
                    symbols: self.prefix.clone(),
                });
            }
            backtrack = true;
        }
    }
}

/// A locally constant potential: log-weights on edges, depending on at
/// most two coordinates.
#[derive(Debug, Clone)]
pub enum Potential {
    /// φ(x) = `value[x₁]`.
    Depth1(Vec<f64>),
    /// φ(x) = `values[x₁·S + x₂]`, row-major over allowed edges.
    Depth2 { states: usize, values: Vec<f64> },
}

impl Potential {
    pub fn zero(states: usize) -> Self {
        Potential::Depth1(vec![0.0; states])
    }

    pub fn depth1(values: Vec<f64>) -> Result<Self> {
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Validation("potential value not finite".into()));
        }
        Ok(Potential::Depth1(values))
    }

    pub fn depth2(system: &ShiftSystem, values: Vec<f64>) -> Result<Self> {
        let s = system.state_count();
        if values.len() != s * s {
            return Err(Error::Dimension(format!(
                "depth-2 potential needs {}²={} values, got {}",
                s,
                s * s,
                values.len()
            )));
        }
        for i in 0..s {
            for j in 0..s {
                if system.allowed(i as u32, j as u32) && !values[i * s + j].is_finite() {
                    return Err(Error::Validation(format!(
                        "potential not finite on allowed edge {}->{}",
                        i + 1,
                        j + 1
                    )));
                }
            }
        }
        Ok(Potential::Depth2 { states: s, values })
    }

    pub fn depth(&self) -> u8 {
        match self {
            Potential::Depth1(_) => 1,
            Potential::Depth2 { .. } => 2,
        }
    }

    pub fn states(&self) -> usize {
        match self {
            Potential::Depth1(v) => v.len(),
            Potential::Depth2 { states, .. } => *states,
        }
    }

    /// Edge value φ(i,j); a depth-1 potential is constant in `j`.
    #[inline]
    pub fn edge(&self, i: u32, j: u32) -> f64 {
        match self {
            Potential::Depth1(v) => v[i as usize],
            Potential::Depth2 { states, values } => values[i as usize * states + j as usize],
        }
    }

    /// Per-state value for depth-1 potentials.
    pub fn state_value(&self, i: u32) -> Option<f64> {
        match self {
            Potential::Depth1(v) => Some(v[i as usize]),
            Potential::Depth2 { .. } => None,
        }
    }

    /// Pointwise shift φ + ⟨w, f⟩ with a per-state vector f (used by the
    /// twisted-pressure machinery).
    pub fn shifted(&self, f: &[Vec<i64>], w: &[f64]) -> Result<Potential> {
        let s = self.states();
        if f.len() != s {
            return Err(Error::Dimension(format!(
                "cocycle values for {} states, system has {}",
                f.len(),
                s
            )));
        }
        let dot = |i: usize| -> f64 {
            f[i].iter()
                .zip(w.iter())
                .map(|(&a, &b)| a as f64 * b)
                .sum::<f64>()
        };
        match self {
            Potential::Depth1(v) => Potential::depth1((0..s).map(|i| v[i] + dot(i)).collect()),
            Potential::Depth2 { states, values } => {
                let mut out = values.clone();
                for i in 0..*states {
                    for j in 0..*states {
                        out[i * states + j] += dot(i);
                    }
                }
                Ok(Potential::Depth2 {
                    states: *states,
                    values: out,
                })
            }
        }
    }
}
