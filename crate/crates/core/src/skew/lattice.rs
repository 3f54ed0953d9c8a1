//! Integer lattices in low dimension, kept in row-echelon form.
//!
//! Used by the extension-mixing certificate: the subgroup of ℤ^{d+1}
//! generated by the achieved (period, cocycle-sum) vectors equals
//! ℤ^{d+1} exactly when the ℤ^d extension is mixing, and a proper
//! full-rank sublattice exhibits the periodicity obstruction.

/// A sublattice of ℤ^dim generated incrementally from vectors.
///
/// The basis is held in row-echelon form with strictly increasing pivot
/// columns and positive pivots, rows fully reduced against each other, so
/// membership tests and the index are direct reads.
#[derive(Debug, Clone)]
pub struct IntLattice {
    dim: usize,
    rows: Vec<Vec<i64>>,
}

impl IntLattice {
    pub fn new(dim: usize) -> Self {
        IntLattice {
            dim,
            rows: Vec::new(),
        }
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Add a generator. Returns true when the lattice grew.
    pub fn add(&mut self, v: &[i64]) -> bool {
        assert_eq!(v.len(), self.dim);
        let mut v: Vec<i128> = v.iter().map(|&x| x as i128).collect();
        let mut grew = false;
        let mut row_idx = 0;
        for col in 0..self.dim {
            if v[col] == 0 {
                if row_idx < self.rows.len() && pivot_col(&self.rows[row_idx]) == Some(col) {
                    row_idx += 1;
                }
                continue;
            }
            if row_idx < self.rows.len() && pivot_col(&self.rows[row_idx]) == Some(col) {
                // combine with the existing pivot row via extended gcd
                let r: Vec<i128> = self.rows[row_idx].iter().map(|&x| x as i128).collect();
                let (g, x, y) = egcd(r[col], v[col]);
                let new_row: Vec<i128> = r.iter().zip(&v).map(|(&a, &b)| x * a + y * b).collect();
                let new_v: Vec<i128> = v
                    .iter()
                    .zip(&r)
                    .map(|(&b, &a)| (r[col] / g) * b - (v[col] / g) * a)
                    .collect();
                if new_row.iter().zip(&r).any(|(a, b)| a != b) {
                    grew = true; // pivot shrank
                }
                self.rows[row_idx] = new_row.iter().map(|&x| to_i64(x)).collect();
                v = new_v;
                row_idx += 1;
            } else {
                // new pivot: insert v here
                let mut row: Vec<i64> = v.iter().map(|&x| to_i64(x)).collect();
                if row[col] < 0 {
                    row.iter_mut().for_each(|x| *x = -*x);
                }
                self.rows.insert(row_idx, row);
                self.normalize();
                return true;
            }
        }
        if grew {
            self.normalize();
        }
        grew
    }

    fn normalize(&mut self) {
        // make pivots positive and reduce rows above each pivot
        for i in 0..self.rows.len() {
            let col = pivot_col(&self.rows[i]).expect("nonzero row");
            if self.rows[i][col] < 0 {
                self.rows[i].iter_mut().for_each(|x| *x = -*x);
            }
            let p = self.rows[i][col];
            for j in 0..i {
                let q = self.rows[j][col].div_euclid(p);
                if q != 0 {
                    for k in 0..self.dim {
                        self.rows[j][k] -= q * self.rows[i][k];
                    }
                }
            }
        }
    }

    /// Index in ℤ^dim (product of pivots) when full rank, else None.
    pub fn index(&self) -> Option<u64> {
        if self.rows.len() != self.dim {
            return None;
        }
        let mut prod: u64 = 1;
        for row in &self.rows {
            let col = pivot_col(row).expect("nonzero");
            prod = prod.saturating_mul(row[col].unsigned_abs());
        }
        Some(prod)
    }

    pub fn is_full(&self) -> bool {
        self.index() == Some(1)
    }

    pub fn contains(&self, v: &[i64]) -> bool {
        assert_eq!(v.len(), self.dim);
        let mut v: Vec<i128> = v.iter().map(|&x| x as i128).collect();
        for row in &self.rows {
            let col = pivot_col(row).expect("nonzero");
            if v[col] != 0 {
                let p = row[col] as i128;
                if v[col] % p != 0 {
                    return false;
                }
                let q = v[col] / p;
                for k in 0..self.dim {
                    v[k] -= q * row[k] as i128;
                }
            }
        }
        v.iter().all(|&x| x == 0)
    }

    /// Minimal n ≥ 1 with (n, 0, …, 0) in the lattice, scanning up to
    /// `cap`. This is the period of the constrained system: targets are
    /// reachable only along this arithmetic progression of lengths.
    pub fn time_period(&self, cap: u64) -> Option<u64> {
        let mut probe = vec![0i64; self.dim];
        for n in 1..=cap {
            probe[0] = n as i64;
            if self.contains(&probe) {
                return Some(n);
            }
        }
        None
    }

    pub fn basis(&self) -> &[Vec<i64>] {
        &self.rows
    }
}

fn pivot_col(row: &[i64]) -> Option<usize> {
    row.iter().position(|&x| x != 0)
}

fn to_i64(x: i128) -> i64 {
    i64::try_from(x).expect("lattice entries stay small")
}

/// Extended gcd: returns (g, x, y) with g = gcd(a,b) > 0 and ax + by = g.
fn egcd(a: i128, b: i128) -> (i128, i128, i128) {
    if b == 0 {
        if a < 0 {
            (-a, -1, 0)
        } else {
            (a, 1, 0)
        }
    } else {
        let (g, x, y) = egcd(b, a % b);
        (g, y, x - (a / b) * y)
    }
}
