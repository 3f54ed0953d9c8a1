//! Weighted empirical measures over constrained orbit families, their
//! comparison with the twisted Gibbs measure, and large-deviation tails.
//!
//! 𝔐(Λ_n) averages the orbit measures τ_{x,n} over a constrained family
//! with weights e^{φⁿ(x)}. For depth-≤2 test functions the integral
//! ∫g d𝔐(Λ_n) reduces to an edge accumulator riding along the same DP as
//! the partition sum, so large n cost no more than Z_n itself. A brute
//! enumeration twin pins the DP for small n.

use crate::groups::GroupElement;
use crate::shift::Potential;
use crate::skew::{
    check_extension_mixing, constrained_sum_with_accumulator, ConstraintMode, MixingFallback,
    SkewSystem,
};
use crate::transfer::{perron, GibbsMeasure, TransferMatrix};
use crate::{Error, Result};
use rustc_hash::FxHashMap;

/// A bounded depth-≤2 test function; same tabular representation as a
/// potential.
pub type TestFunction = Potential;

/// ∫ g d𝔐(Λ_n): the e^{φⁿ}-weighted average of (1/n)Σ_j g over the
/// constrained family. The g-edges are evaluated cyclically for periodic
/// modes and into the base point for preimage modes.
pub fn empirical_integral(
    sys: &SkewSystem,
    mode: &ConstraintMode,
    target: &GroupElement,
    n: usize,
    g: &TestFunction,
    budget: usize,
) -> Result<f64> {
    if g.states() != sys.shift().state_count() {
        return Err(Error::Dimension(format!(
            "test function over {} states, system has {}",
            g.states(),
            sys.shift().state_count()
        )));
    }
    let (z, acc) = constrained_sum_with_accumulator(sys, n, mode, target, g, budget)?;
    if z <= 0.0 {
        let mixing = check_extension_mixing(sys, 8, budget, MixingFallback::Assumed)?;
        return Err(Error::EmptyConstraint(format!(
            "Λ({n}) is empty in mode {}; satisfiable lengths have period {} ({})",
            mode.name(),
            mixing.constraint_period,
            mixing.detail
        )));
    }
    Ok(acc / (n as f64 * z))
}

/// Enumeration twin of [`empirical_integral`] for small n.
pub fn brute_force_empirical(
    sys: &SkewSystem,
    mode: &ConstraintMode,
    target: &GroupElement,
    n: usize,
    g: &TestFunction,
    ceiling: usize,
) -> Result<f64> {
    let s = sys.shift();
    let p = sys.potential();
    let coc = sys.cocycle();
    let mut z = 0.0;
    let mut acc = 0.0;
    match mode {
        ConstraintMode::PeriodicAll | ConstraintMode::PeriodicCylinder(_) => {
            let restrict = match mode {
                ConstraintMode::PeriodicCylinder(a) => Some(*a),
                _ => None,
            };
            for w in s.periodic_words_capped(n, ceiling)? {
                if restrict.is_some_and(|a| w.symbols()[0] != a) {
                    continue;
                }
                if &coc.product(w.symbols())? != target {
                    continue;
                }
                let weight = s.birkhoff_periodic(p, &w)?.exp();
                let gsum = s.birkhoff_periodic(g, &w)?;
                z += weight;
                acc += weight * gsum;
            }
        }
        ConstraintMode::Preimage(o) | ConstraintMode::PreimageCylinder(_, o) => {
            let restrict = match mode {
                ConstraintMode::PreimageCylinder(a, _) => Some(*a),
                _ => None,
            };
            let o1 = o.first_symbol();
            for w in s.allowed_words_capped(n, ceiling)? {
                if restrict.is_some_and(|a| w.symbols()[0] != a) {
                    continue;
                }
                if !s.allowed(*w.symbols().last().unwrap(), o1) {
                    continue;
                }
                if &coc.product(w.symbols())? != target {
                    continue;
                }
                let weight = s.birkhoff_continued(p, &w, o1)?.exp();
                let gsum = s.birkhoff_continued(g, &w, o1)?;
                z += weight;
                acc += weight * gsum;
            }
        }
    }
    if z <= 0.0 {
        return Err(Error::EmptyConstraint(format!(
            "Λ({n}) is empty in mode {}",
            mode.name()
        )));
    }
    Ok(acc / (n as f64 * z))
}

/// ∫ g dμ^ξ from Gibbs edge marginals of the ξ-twisted matrix — the
/// limiting value the empirical integrals are compared against.
pub fn limit_integral(sys: &SkewSystem, xi: &[f64], g: &TestFunction) -> Result<f64> {
    let f = sys.f_values()?;
    let zeros = vec![0.0; xi.len()];
    let m = TransferMatrix::build(sys.shift(), sys.potential(), Some(&f), xi, &zeros)?;
    let data = perron(&m)?;
    let gibbs = GibbsMeasure::from_perron(&m, &data)?;
    Ok(gibbs.integral(g))
}

/// One row of an equidistribution report.
#[derive(Debug, Clone)]
pub struct EquidistRow {
    pub mode: String,
    pub n: usize,
    pub empirical: Option<f64>,
    pub limit: f64,
    pub abs_diff: Option<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone)]
pub struct EquidistReport {
    pub rows: Vec<EquidistRow>,
    pub limit: f64,
}

/// Evaluate every mode × length against ∫g dμ^ξ. Per-row budget or
/// emptiness problems are recorded in the row; the run continues.
pub fn equidist_report(
    sys: &SkewSystem,
    g: &TestFunction,
    xi: &[f64],
    n_list: &[usize],
    modes: &[ConstraintMode],
    budget: usize,
) -> Result<EquidistReport> {
    let target = sys.cocycle().kind().identity();
    let limit = limit_integral(sys, xi, g)?;
    let mut rows = Vec::new();
    for mode in modes {
        for &n in n_list {
            let row = match empirical_integral(sys, mode, &target, n, g, budget) {
                Ok(v) => EquidistRow {
                    mode: mode.name().into(),
                    n,
                    empirical: Some(v),
                    limit,
                    abs_diff: Some((v - limit).abs()),
                    error: None,
                },
                Err(e) => EquidistRow {
                    mode: mode.name().into(),
                    n,
                    empirical: None,
                    limit,
                    abs_diff: None,
                    error: Some(e.to_string()),
                },
            };
            rows.push(row);
        }
    }
    Ok(EquidistReport { rows, limit })
}

/// Normalized weight of the orbits whose empirical g-average deviates
/// from the limit by more than ε.
///
/// When g takes small integer values on edges the tail is computed by an
/// exact joint DP over (state, group element, accumulated g-sum);
/// otherwise the family is enumerated within the oracle ceiling.
#[allow(clippy::too_many_arguments)]
pub fn ld_tail(
    sys: &SkewSystem,
    mode: &ConstraintMode,
    target: &GroupElement,
    g: &TestFunction,
    epsilon: f64,
    limit: f64,
    n: usize,
    budget: usize,
) -> Result<f64> {
    if epsilon <= 0.0 {
        return Err(Error::Validation("ε must be positive".into()));
    }
    if let Some(values) = integer_edge_values(sys, g, n) {
        return ld_tail_integer_dp(sys, mode, target, &values, epsilon, limit, n, budget);
    }
    ld_tail_brute(sys, mode, target, g, epsilon, limit, n)
}

/// Fit tail masses to C·e^{−ηn}: returns (η, R²) over the rows with
/// positive tail mass, or None with fewer than 3 usable rows.
pub fn ld_fit(rows: &[(usize, f64)]) -> Option<(f64, f64)> {
    let pts: Vec<(f64, f64)> = rows
        .iter()
        .filter(|&&(_, t)| t > 0.0)
        .map(|&(n, t)| (n as f64, t.ln()))
        .collect();
    if pts.len() < 3 {
        return None;
    }
    let n = pts.len() as f64;
    let sx: f64 = pts.iter().map(|p| p.0).sum();
    let sy: f64 = pts.iter().map(|p| p.1).sum();
    let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
    let slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    let intercept = (sy - slope * sx) / n;
    let mean_y = sy / n;
    let ss_tot: f64 = pts.iter().map(|p| (p.1 - mean_y).powi(2)).sum();
    let ss_res: f64 = pts
        .iter()
        .map(|p| (p.1 - slope * p.0 - intercept).powi(2))
        .sum();
    let r2 = if ss_tot > 0.0 {
        1.0 - ss_res / ss_tot
    } else {
        1.0
    };
    Some((-slope, r2))
}

/// Small-integer edge table of g, when that structure holds: values and
/// the offset making them nonnegative.
fn integer_edge_values(sys: &SkewSystem, g: &TestFunction, n: usize) -> Option<Vec<Vec<i64>>> {
    let s = sys.shift().state_count();
    let mut table = vec![vec![0i64; s]; s];
    let mut max_abs = 0i64;
    for i in 0..s {
        for j in 0..s {
            let v = g.edge(i as u32, j as u32);
            let r = v.round();
            if (v - r).abs() > 1e-12 || r.abs() > 1e6 {
                return None;
            }
            table[i][j] = r as i64;
            max_abs = max_abs.max(table[i][j].abs());
        }
    }
    // keep the joint DP third coordinate small
    if (2 * max_abs as usize + 1) * n > 100_000 {
        return None;
    }
    Some(table)
}

#[allow(clippy::too_many_arguments)]
fn ld_tail_integer_dp(
    sys: &SkewSystem,
    mode: &ConstraintMode,
    target: &GroupElement,
    gtable: &[Vec<i64>],
    epsilon: f64,
    limit: f64,
    n: usize,
    budget: usize,
) -> Result<f64> {
    let s = sys.shift();
    let p = sys.potential();
    let coc = sys.cocycle();
    let kind = coc.kind();
    type Key = (u32, GroupElement, i64);
    let close_and_tally =
        |layer: &FxHashMap<Key, f64>, close: u32, total: &mut f64, tail: &mut f64| {
            for ((j, h, gsum), mass) in layer {
                if h == target && s.allowed(*j, close) {
                    let w = mass * p.edge(*j, close).exp();
                    let full_g = gsum + gtable[*j as usize][close as usize];
                    *total += w;
                    if ((full_g as f64) / n as f64 - limit).abs() > epsilon {
                        *tail += w;
                    }
                }
            }
        };
    let run = |starts: &[u32], closes: &[Option<u32>]| -> Result<(f64, f64)> {
        let mut total = 0.0;
        let mut tail = 0.0;
        for (idx, &start) in starts.iter().enumerate() {
            let mut layer: FxHashMap<Key, f64> = FxHashMap::default();
            layer.insert((start, coc.value(start).clone(), 0), 1.0);
            for _ in 1..n {
                let mut next: FxHashMap<Key, f64> = FxHashMap::default();
                for ((j, h, gsum), mass) in &layer {
                    for &k in s.successors(*j) {
                        let h2 = kind.op(h, coc.value(k))?;
                        let key = (k, h2, gsum + gtable[*j as usize][k as usize]);
                        *next.entry(key).or_insert(0.0) += mass * p.edge(*j, k).exp();
                        if next.len() > budget {
                            return Err(Error::Budget("joint deviation DP exceeded budget".into()));
                        }
                    }
                }
                layer = next;
            }
            let close = closes[idx].unwrap_or(start);
            close_and_tally(&layer, close, &mut total, &mut tail);
        }
        Ok((total, tail))
    };
    let (total, tail) = match mode {
        ConstraintMode::PeriodicAll => {
            let starts: Vec<u32> = (0..s.state_count() as u32).collect();
            let closes = vec![None; starts.len()];
            run(&starts, &closes)?
        }
        ConstraintMode::PeriodicCylinder(a) => run(&[*a], &[None])?,
        ConstraintMode::Preimage(o) => {
            let starts: Vec<u32> = (0..s.state_count() as u32).collect();
            let closes = vec![Some(o.first_symbol()); starts.len()];
            run(&starts, &closes)?
        }
        ConstraintMode::PreimageCylinder(a, o) => run(&[*a], &[Some(o.first_symbol())])?,
    };
    if total <= 0.0 {
        return Err(Error::EmptyConstraint(format!(
            "Λ({n}) is empty in mode {}",
            mode.name()
        )));
    }
    Ok(tail / total)
}

fn ld_tail_brute(
    sys: &SkewSystem,
    mode: &ConstraintMode,
    target: &GroupElement,
    g: &TestFunction,
    epsilon: f64,
    limit: f64,
    n: usize,
) -> Result<f64> {
    let s = sys.shift();
    let p = sys.potential();
    let coc = sys.cocycle();
    let mut total = 0.0;
    let mut tail = 0.0;
    let ceiling = n.max(crate::shift::DEFAULT_ORACLE_CEILING);
    match mode {
        ConstraintMode::PeriodicAll | ConstraintMode::PeriodicCylinder(_) => {
            let restrict = match mode {
                ConstraintMode::PeriodicCylinder(a) => Some(*a),
                _ => None,
            };
            for w in s.periodic_words_capped(n, ceiling)? {
                if restrict.is_some_and(|a| w.symbols()[0] != a) {
                    continue;
                }
                if &coc.product(w.symbols())? != target {
                    continue;
                }
                let weight = s.birkhoff_periodic(p, &w)?.exp();
                let avg = s.birkhoff_periodic(g, &w)? / n as f64;
                total += weight;
                if (avg - limit).abs() > epsilon {
                    tail += weight;
                }
            }
        }
        ConstraintMode::Preimage(o) | ConstraintMode::PreimageCylinder(_, o) => {
            let restrict = match mode {
                ConstraintMode::PreimageCylinder(a, _) => Some(*a),
                _ => None,
            };
            let o1 = o.first_symbol();
            for w in s.allowed_words_capped(n, ceiling)? {
                if restrict.is_some_and(|a| w.symbols()[0] != a) {
                    continue;
                }
                if !s.allowed(*w.symbols().last().unwrap(), o1) {
                    continue;
                }
                if &coc.product(w.symbols())? != target {
                    continue;
                }
                let weight = s.birkhoff_continued(p, &w, o1)?.exp();
                let avg = s.birkhoff_continued(g, &w, o1)? / n as f64;
                total += weight;
                if (avg - limit).abs() > epsilon {
                    tail += weight;
                }
            }
        }
    }
    if total <= 0.0 {
        return Err(Error::EmptyConstraint(format!(
            "Λ({n}) is empty in mode {}",
            mode.name()
        )));
    }
    Ok(tail / total)
}
