//! Truncation families: parametrized countable-state systems with
//! closed-form tail sums, restricted to finite alphabets.
//!
//! The built-in zeta family lives on the full shift over ℕ with
//! φ(a) = −β·log(a+1) and f(a) = (−1)^a·⌊log₂(a+1)⌋. Summability holds
//! for β > 1, the moment radius has the closed form δ = (β−1)·log 2, and
//! the exact tail T(r, N) = Σ_{a>N} e^{φ(a)+r|f(a)|} brackets every
//! truncated pressure from above, so the reports carry certified
//! two-sided estimates of the infinite-state limit.

use crate::groups::{Cocycle, GroupElement, GroupKind};
use crate::shift::{Potential, ShiftSystem};
use crate::xi::{find_xi, XiOptions};
use crate::{Error, Result};

/// A family of countable-state systems with closed-form tails.
#[derive(Debug, Clone)]
pub enum TruncationFamily {
    /// φ(a) = −β log(a+1), f(a) = (−1)^a ⌊log₂(a+1)⌋ on the full shift.
    Zeta { beta: f64 },
}

impl TruncationFamily {
    pub fn zeta(beta: f64) -> Result<Self> {
        // the negated form also rejects NaN
        #[allow(clippy::neg_cmp_op_on_partial_ord)]
        if !(beta > 1.0) {
            return Err(Error::Validation(format!(
                "zeta family needs β > 1 for summability, got {beta}"
            )));
        }
        Ok(TruncationFamily::Zeta { beta })
    }

    pub fn name(&self) -> &'static str {
        match self {
            TruncationFamily::Zeta { .. } => "zeta",
        }
    }

    /// Per-state log-weight φ(a).
    pub fn phi(&self, a: usize) -> f64 {
        match self {
            TruncationFamily::Zeta { beta } => -beta * ((a + 1) as f64).ln(),
        }
    }

    /// Per-state cocycle value f(a) ∈ ℤ.
    pub fn f(&self, a: usize) -> i64 {
        match self {
            TruncationFamily::Zeta { .. } => {
                let mag = ((a + 1) as f64).log2().floor() as i64;
                if a.is_multiple_of(2) {
                    mag
                } else {
                    -mag
                }
            }
        }
    }

    /// Closed-form moment radius δ = sup{r ≥ 0 : Σ e^{φ+r|f|} < ∞}.
    pub fn delta(&self) -> f64 {
        match self {
            TruncationFamily::Zeta { beta } => (beta - 1.0) * std::f64::consts::LN_2,
        }
    }

    /// Exact tail T(r, N) = Σ_{a > N} e^{φ(a) + r·|f(a)|}, grouped by the
    /// dyadic blocks on which |f| is constant. Diverges (returns ∞) for
    /// r ≥ δ.
    pub fn tail(&self, r: f64, n_from_exclusive: usize) -> f64 {
        match self {
            TruncationFamily::Zeta { beta } => {
                if r >= self.delta() {
                    return f64::INFINITY;
                }
                // a > N means k = a+1 ≥ N+2; block j holds k ∈ [2^j, 2^{j+1})
                let k_min = n_from_exclusive as u64 + 2;
                let mut total = 0.0f64;
                let mut last_term = 0.0f64;
                let mut j = 0u32;
                while j <= 2000 {
                    let term = if j < 50 {
                        let lo = 1u64 << j;
                        let hi = (1u64 << (j + 1)) - 1;
                        if hi < k_min {
                            j += 1;
                            continue;
                        }
                        let from = lo.max(k_min);
                        let block = zeta_tail(*beta, from) - zeta_tail(*beta, hi + 1);
                        (r * j as f64).exp() * block
                    } else {
                        // block boundaries overflow u64; the integral form
                        // of the block sum is exact to relative O(2^{−j})
                        let lo = 2f64.powi(j as i32);
                        let block =
                            lo.powf(1.0 - beta) * (1.0 - 2f64.powf(1.0 - beta)) / (beta - 1.0);
                        (r * j as f64).exp() * block
                    };
                    total += term;
                    last_term = term;
                    let past_k_min = j >= 63 || (1u64 << j) >= k_min;
                    if past_k_min && term < 1e-17 * total.max(1e-300) {
                        return total;
                    }
                    j += 1;
                }
                // geometric closure over the remaining (asymptotically
                // geometric) blocks
                let q = r.exp() * 2f64.powf(1.0 - beta);
                total + last_term * q / (1.0 - q)
            }
        }
    }

    /// Restriction to the first N states: the full shift on {0..N−1} with
    /// the family's φ and f.
    pub fn truncate(&self, n_states: usize) -> Result<(ShiftSystem, Potential, Cocycle)> {
        if n_states < 2 {
            return Err(Error::Validation(format!(
                "truncation needs at least 2 states, got {n_states}"
            )));
        }
        let shift = ShiftSystem::full_shift(n_states);
        let phi = Potential::depth1((0..n_states).map(|a| self.phi(a)).collect())?;
        let cocycle = Cocycle::new(
            GroupKind::Zd(1),
            (0..n_states)
                .map(|a| GroupElement::Zd(vec![self.f(a)]))
                .collect(),
        )?;
        Ok((shift, phi, cocycle))
    }
}

/// Σ_{k ≥ from} k^{−β} by direct summation plus Euler–Maclaurin.
pub fn zeta_tail(beta: f64, from: u64) -> f64 {
    let mut total = 0.0f64;
    let mut k = from.max(1);
    let direct_until = (from + 100).max(128);
    while k < direct_until {
        total += (k as f64).powf(-beta);
        k += 1;
    }
    // Euler–Maclaurin from M = direct_until:
    // M^{1−β}/(β−1) + M^{−β}/2 + β·M^{−β−1}/12
    //   − β(β+1)(β+2)·M^{−β−3}/720 + β⋯(β+4)·M^{−β−5}/30240
    let m = k as f64;
    let p = |order: u32| -> f64 { (0..order).map(|i| beta + i as f64).product::<f64>() };
    total +=
        m.powf(1.0 - beta) / (beta - 1.0) + 0.5 * m.powf(-beta) + p(1) * m.powf(-beta - 1.0) / 12.0
            - p(3) * m.powf(-beta - 3.0) / 720.0
            + p(5) * m.powf(-beta - 5.0) / 30240.0;
    total
}

/// One row of a truncation convergence report.
#[derive(Debug, Clone)]
pub struct BipRow {
    pub n_states: usize,
    /// log λ of the truncated system (a certified lower bound on the
    /// infinite-state pressure, increasing in N).
    pub pressure: f64,
    /// Tail-corrected upper bracket log(e^{pressure} + T(0, N−1)).
    pub pressure_upper: f64,
    /// ξ of the truncated system; tiny truncations can lack an interior
    /// minimum (one-sided f values), recorded in `xi_error`.
    pub xi: Option<f64>,
    pub pressure_at_xi: Option<f64>,
    pub xi_error: Option<String>,
    pub delta: f64,
}

/// Truncated pressure, ξ and δ for each alphabet size in `n_list`.
/// Eigensolver failures bubble up per row; ξ failures are recorded in the
/// row and the run continues.
pub fn convergence_report(
    family: &TruncationFamily,
    n_list: &[usize],
    matrix_budget: usize,
) -> Result<Vec<BipRow>> {
    let mut rows = Vec::with_capacity(n_list.len());
    for &n in n_list {
        if n > matrix_budget {
            return Err(Error::Budget(format!(
                "truncation size {n} above the matrix budget {matrix_budget}"
            )));
        }
        let (shift, phi, cocycle) = family.truncate(n)?;
        let sys = crate::skew::SkewSystem::new(shift.clone(), phi.clone(), cocycle)?;
        let pressure = crate::transfer::pressure(&shift, &phi, None, &[])?;
        let tail = family.tail(0.0, n - 1);
        let pressure_upper = (pressure.exp() + tail).ln();
        let (xi, pressure_at_xi, xi_error) = match find_xi(&sys, &XiOptions::default()) {
            Ok(res) => (Some(res.xi[0]), Some(res.pressure_at_xi), None),
            Err(e) => (None, None, Some(e.to_string())),
        };
        rows.push(BipRow {
            n_states: n,
            pressure,
            pressure_upper,
            xi,
            pressure_at_xi,
            xi_error,
            delta: family.delta(),
        });
    }
    Ok(rows)
}
