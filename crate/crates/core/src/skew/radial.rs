//! Radial fast path for free-group extensions.
//!
//! When the cocycle maps the states of a full shift bijectively onto the
//! generators and inverses of F_k and the potential gives every symbol the
//! same weight, the identity-return sum collapses onto the distance-from-
//! identity chain on ℕ: from 0 there are 2k ways out, from r ≥ 1 exactly
//! one step down and 2k−1 up. This evaluates Z_n in O(n²) regardless of
//! the ball size.

use super::SkewSystem;
use crate::groups::GroupKind;
use crate::{Error, Result};

/// Z_n for the PeriodicAll family with identity target, radial route.
pub fn free_group_radial_sum(sys: &SkewSystem, n: usize) -> Result<f64> {
    let (k, c) = radial_preconditions(sys)?;
    Ok(walk_counts(k, n)[n] * (c * n as f64).exp())
}

/// log Z_n for n = 1..=n_max in one pass (−∞ where Z_n = 0).
pub fn free_group_radial_log_sums(sys: &SkewSystem, n_max: usize) -> Result<Vec<f64>> {
    let (k, c) = radial_preconditions(sys)?;
    // counts grow like (2√(2k−1))ⁿ; rescale per step and carry logs to
    // stay in range for n in the hundreds
    let two_k = 2.0 * k as f64;
    let up = two_k - 1.0;
    let mut dist = vec![0.0f64; n_max + 2];
    dist[0] = 1.0;
    let mut log_scale = 0.0f64;
    let mut out = Vec::with_capacity(n_max);
    for n in 1..=n_max {
        let mut next = vec![0.0f64; n_max + 2];
        for r in 0..=n {
            let v = dist[r];
            if v == 0.0 {
                continue;
            }
            if r == 0 {
                next[1] += two_k * v;
            } else {
                next[r - 1] += v;
                if r <= n_max {
                    next[r + 1] += up * v;
                }
            }
        }
        let m = next.iter().cloned().fold(0.0f64, f64::max);
        if m > 0.0 {
            next.iter_mut().for_each(|x| *x /= m);
            log_scale += m.ln();
        }
        dist = next;
        let z0 = dist[0];
        out.push(if z0 == 0.0 {
            f64::NEG_INFINITY
        } else {
            z0.ln() + log_scale + c * n as f64
        });
    }
    Ok(out)
}

/// Identity-return walk counts W_t on the 2k-regular tree for t = 0..=n.
fn walk_counts(k: usize, n: usize) -> Vec<f64> {
    let two_k = 2.0 * k as f64;
    let up = two_k - 1.0;
    let mut dist = vec![0.0f64; n + 2];
    dist[0] = 1.0;
    let mut out = vec![1.0];
    for _ in 1..=n {
        let mut next = vec![0.0f64; n + 2];
        for (r, &v) in dist.iter().enumerate() {
            if v == 0.0 {
                continue;
            }
            if r == 0 {
                next[1] += two_k * v;
            } else {
                next[r - 1] += v;
                if r + 1 < next.len() {
                    next[r + 1] += up * v;
                }
            }
        }
        dist = next;
        out.push(dist[0]);
    }
    out
}

/// Checks the radial route's preconditions and returns (k, symbol weight).
fn radial_preconditions(sys: &SkewSystem) -> Result<(usize, f64)> {
    let kind = sys.cocycle().kind();
    let k = match kind {
        GroupKind::Free(k) => k,
        _ => {
            return Err(Error::Unsupported(
                "radial route needs a free-group cocycle".into(),
            ))
        }
    };
    let s = sys.shift();
    if !s.is_full() || s.state_count() != 2 * k {
        return Err(Error::Unsupported(format!(
            "radial route needs the full shift on 2k = {} symbols",
            2 * k
        )));
    }
    // bijection onto generators ∪ inverses
    let mut gens = kind.generators();
    let mut vals = sys.cocycle().values().to_vec();
    let key = |g: &crate::groups::GroupElement| format!("{g:?}");
    gens.sort_by_key(|g| key(g));
    vals.sort_by_key(|g| key(g));
    if gens != vals {
        return Err(Error::Unsupported(
            "radial route needs the cocycle to map states bijectively onto \
             the generators and their inverses"
                .into(),
        ));
    }
    let p = sys.potential();
    if p.depth() != 1 {
        return Err(Error::Unsupported(
            "radial route needs a depth-1 potential".into(),
        ));
    }
    let c = p.edge(0, 0);
    for i in 0..s.state_count() as u32 {
        if (p.edge(i, 0) - c).abs() != 0.0 {
            return Err(Error::Unsupported(
                "radial route needs the same weight on every symbol".into(),
            ));
        }
    }
    Ok((k, c))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::groups::GroupElement;
    use crate::shift::{Potential, ShiftSystem};
    use crate::skew::test_fixtures::f2_demo;
    use crate::skew::ConstraintMode;
    use crate::skew::{constrained_sum, SkewSystem};

    #[test]
    fn small_counts() {
        let sys = f2_demo();
        assert!((free_group_radial_sum(&sys, 2).unwrap() - 4.0).abs() < 1e-12);
        assert!((free_group_radial_sum(&sys, 4).unwrap() - 28.0).abs() < 1e-12);
        assert_eq!(free_group_radial_sum(&sys, 3).unwrap(), 0.0);
    }

    #[test]
    fn matches_constrained_sum_on_overlap() {
        let sys = f2_demo();
        let e = sys.cocycle().kind().identity();
        for n in 1..=10 {
            let radial = free_group_radial_sum(&sys, n).unwrap();
            let dp =
                constrained_sum(&sys, n, &ConstraintMode::PeriodicAll, &e, 10_000_000).unwrap();
            assert!(
                (radial - dp).abs() <= 1e-10 * dp.abs().max(1.0),
                "n={n}: radial={radial} dp={dp}"
            );
        }
    }

    #[test]
    fn growth_rate_approaches_tree_spectral_radius() {
        let sys = f2_demo();
        let logs = free_group_radial_log_sums(&sys, 200).unwrap();
        let rate = logs[199] / 200.0;
        let kesten = (2.0 * 3.0f64.sqrt()).ln();
        assert!(
            (rate - kesten).abs() < 0.05,
            "rate {rate} vs 2√3 rate {kesten}"
        );
    }

    #[test]
    fn symbol_weight_scales_exponentially() {
        let cocycle = f2_demo().cocycle().clone();
        let c = 0.25;
        let sys = SkewSystem::new(
            ShiftSystem::full_shift(4),
            Potential::depth1(vec![c; 4]).unwrap(),
            cocycle,
        )
        .unwrap();
        let z = free_group_radial_sum(&sys, 4).unwrap();
        assert!((z - 28.0 * (4.0 * c).exp()).abs() < 1e-9);
    }

    #[test]
    fn preconditions_rejected() {
        // wrong group
        let sys = crate::skew::test_fixtures::heisenberg_demo();
        assert!(free_group_radial_sum(&sys, 4).is_err());
        // asymmetric potential
        let cocycle = f2_demo().cocycle().clone();
        let sys2 = SkewSystem::new(
            ShiftSystem::full_shift(4),
            Potential::depth1(vec![0.0, 0.0, 0.0, 0.5]).unwrap(),
            cocycle,
        )
        .unwrap();
        assert!(free_group_radial_sum(&sys2, 4).is_err());
        // non-bijective cocycle
        let bad = crate::groups::Cocycle::new(
            GroupKind::Free(2),
            vec![
                GroupElement::Free(vec![1]),
                GroupElement::Free(vec![1]),
                GroupElement::Free(vec![2]),
                GroupElement::Free(vec![-2]),
            ],
        )
        .unwrap();
        let sys3 = SkewSystem::new(ShiftSystem::full_shift(4), Potential::zero(4), bad).unwrap();
        assert!(free_group_radial_sum(&sys3, 4).is_err());
    }
}
