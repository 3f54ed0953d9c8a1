//! Sparse forward DP over (state, group element) pairs.
//!
//! A layer after t symbols maps (last state j, partial cocycle product h)
//! to the pair (Σ e^{Σ φ edges}, Σ e^{Σ φ edges}·Σ g edges) over all
//! allowed words realizing it. The second slot carries a test-function
//! accumulator so weighted empirical integrals cost the same as the plain
//! sum. Layers are pruned exactly: an entry is dropped only when a
//! word-length lower bound proves the target unreachable in the remaining
//! steps.

use super::{ConstraintMode, SkewSystem};
use crate::exec;
use crate::groups::GroupElement;
use crate::shift::Potential;
use crate::{Error, Result};
use rustc_hash::FxHashMap;

type Layer = FxHashMap<(u32, GroupElement), (f64, f64)>;

/// Z_n = Σ_{x ∈ Λ(n)} e^{φⁿ(x)} for the given constraint family and
/// target element, by exact sparse DP.
pub fn constrained_sum(
    sys: &SkewSystem,
    n: usize,
    mode: &ConstraintMode,
    target: &GroupElement,
    budget: usize,
) -> Result<f64> {
    run_mode(sys, n, mode, target, None, budget).map(|(z, _)| z)
}

/// As [`constrained_sum`], also returning the accumulator
/// Σ_{x ∈ Λ(n)} e^{φⁿ(x)}·Σ_{j<n} g(edge_j(x)) for a depth-≤2 table g.
/// The g-sum runs over the same n edges as φⁿ (cyclic for periodic modes,
/// final edge into the base point for preimage modes).
pub fn constrained_sum_with_accumulator(
    sys: &SkewSystem,
    n: usize,
    mode: &ConstraintMode,
    target: &GroupElement,
    g: &Potential,
    budget: usize,
) -> Result<(f64, f64)> {
    run_mode(sys, n, mode, target, Some(g), budget)
}

fn run_mode(
    sys: &SkewSystem,
    n: usize,
    mode: &ConstraintMode,
    target: &GroupElement,
    g: Option<&Potential>,
    budget: usize,
) -> Result<(f64, f64)> {
    if n == 0 {
        return Err(Error::Validation("constrained sum needs n ≥ 1".into()));
    }
    let s = sys.shift();
    let state_ok = |a: u32| -> Result<()> {
        if (a as usize) < s.state_count() {
            Ok(())
        } else {
            Err(Error::Validation(format!(
                "cylinder state {} out of range",
                a + 1
            )))
        }
    };
    match mode {
        ConstraintMode::PeriodicAll => {
            let starts: Vec<u32> = (0..s.state_count() as u32).collect();
            let results = exec::par_map(&starts, |&start| {
                periodic_from(sys, n, start, target, g, budget)
            });
            let mut z = 0.0;
            let mut acc = 0.0;
            for r in results {
                let (a, b) = r?;
                z += a;
                acc += b;
            }
            Ok((z, acc))
        }
        ConstraintMode::PeriodicCylinder(a) => {
            state_ok(*a)?;
            periodic_from(sys, n, *a, target, g, budget)
        }
        ConstraintMode::Preimage(o) => {
            let starts: Vec<u32> = (0..s.state_count() as u32).collect();
            preimage_from(sys, n, &starts, o.first_symbol(), target, g, budget)
        }
        ConstraintMode::PreimageCylinder(a, o) => {
            state_ok(*a)?;
            preimage_from(sys, n, &[*a], o.first_symbol(), target, g, budget)
        }
    }
}

/// Periodic family: words of length n starting at `start` whose wrap edge
/// back to `start` exists, with trace-style tying.
fn periodic_from(
    sys: &SkewSystem,
    n: usize,
    start: u32,
    target: &GroupElement,
    g: Option<&Potential>,
    budget: usize,
) -> Result<(f64, f64)> {
    let layer = forward_layers(sys, n, &[start], Some(target), g, budget)?;
    let s = sys.shift();
    let p = sys.potential();
    let mut z = 0.0;
    let mut acc = 0.0;
    for ((j, h), (mass, a)) in &layer {
        if h == target && s.allowed(*j, start) {
            let ew = p.edge(*j, start).exp();
            z += mass * ew;
            let gterm = g.map_or(0.0, |g| g.edge(*j, start));
            acc += a * ew + gterm * mass * ew;
        }
    }
    Ok((z, acc))
}

/// Preimage family: words of length n from `starts`, closing into the
/// base point's first symbol.
fn preimage_from(
    sys: &SkewSystem,
    n: usize,
    starts: &[u32],
    o1: u32,
    target: &GroupElement,
    g: Option<&Potential>,
    budget: usize,
) -> Result<(f64, f64)> {
    let layer = forward_layers(sys, n, starts, Some(target), g, budget)?;
    let s = sys.shift();
    let p = sys.potential();
    let mut z = 0.0;
    let mut acc = 0.0;
    for ((j, h), (mass, a)) in &layer {
        if h == target && s.allowed(*j, o1) {
            let ew = p.edge(*j, o1).exp();
            z += mass * ew;
            let gterm = g.map_or(0.0, |g| g.edge(*j, o1));
            acc += a * ew + gterm * mass * ew;
        }
    }
    Ok((z, acc))
}

/// The forward DP: layer after n symbols from the given start states.
///
/// When `target` is given, layers are pruned by the word-length
/// lower-bound test; entries that provably cannot reach the target in the
/// remaining steps contribute nothing to any closing sum, so the final
/// layer restricted to the target is exact.
pub(crate) fn forward_layers(
    sys: &SkewSystem,
    n: usize,
    starts: &[u32],
    target: Option<&GroupElement>,
    g: Option<&Potential>,
    budget: usize,
) -> Result<Layer> {
    let s = sys.shift();
    let p = sys.potential();
    let coc = sys.cocycle();
    let kind = coc.kind();
    let prune = match (target, coc.max_step_len()) {
        (Some(t), Some(step)) => Some((t.clone(), step)),
        _ => None,
    };
    let keep = |h: &GroupElement, remaining: usize| -> Result<bool> {
        match &prune {
            None => Ok(true),
            Some((t, step)) => {
                let dist_lb = if t.is_identity() {
                    kind.word_length_lower_bound(h)
                } else {
                    let diff = kind.op(&kind.inv(h)?, t)?;
                    kind.word_length_lower_bound(&diff)
                };
                Ok(dist_lb <= remaining as u64 * *step)
            }
        }
    };
    let mut layer: Layer = FxHashMap::default();
    for &i in starts {
        let h = coc.value(i).clone();
        if keep(&h, n - 1)? {
            let entry = layer.entry((i, h)).or_insert((0.0, 0.0));
            entry.0 += 1.0;
        }
    }
    for t in 1..n {
        let remaining = n - t - 1;
        let mut next: Layer =
            FxHashMap::with_capacity_and_hasher(layer.len() * 2, Default::default());
        for ((j, h), (mass, acc)) in &layer {
            for &k in s.successors(*j) {
                let h2 = kind.op(h, coc.value(k))?;
                if !keep(&h2, remaining)? {
                    continue;
                }
                let ew = p.edge(*j, k).exp();
                let gterm = g.map_or(0.0, |g| g.edge(*j, k));
                let slot = next.entry((k, h2)).or_insert((0.0, 0.0));
                slot.0 += mass * ew;
                slot.1 += acc * ew + gterm * mass * ew;
                if next.len() > budget {
                    return Err(Error::Budget(format!(
                        "DP layer exceeded {budget} entries at step {t}; \
                         use the Fourier path (ℤ^d) or the free-group radial path"
                    )));
                }
            }
        }
        layer = next;
    }
    Ok(layer)
}

/// Brute-force oracle: enumerate the constrained family directly. Only
/// for n within the oracle ceiling; used by tests and the `oracle`
/// subcommand to pin the DP.
pub fn brute_force_constrained(
    sys: &SkewSystem,
    n: usize,
    mode: &ConstraintMode,
    target: &GroupElement,
    ceiling: usize,
) -> Result<f64> {
    let s = sys.shift();
    let p = sys.potential();
    let coc = sys.cocycle();
    let mut z = 0.0;
    match mode {
        ConstraintMode::PeriodicAll | ConstraintMode::PeriodicCylinder(_) => {
            let restrict = match mode {
                ConstraintMode::PeriodicCylinder(a) => Some(*a),
                _ => None,
            };
            for w in s.periodic_words_capped(n, ceiling)? {
                if let Some(a) = restrict {
                    if w.symbols()[0] != a {
                        continue;
                    }
                }
                if &coc.product(w.symbols())? == target {
                    z += s.birkhoff_periodic(p, &w)?.exp();
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
                if let Some(a) = restrict {
                    if w.symbols()[0] != a {
                        continue;
                    }
                }
                if !s.allowed(*w.symbols().last().unwrap(), o1) {
                    continue;
                }
                if &coc.product(w.symbols())? == target {
                    z += s.birkhoff_continued(p, &w, o1)?.exp();
                }
            }
        }
    }
    Ok(z)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::groups::{Cocycle, GroupElement, GroupKind};
    use crate::shift::{Potential, ShiftSystem};
    use crate::skew::test_fixtures::{f2_demo, heisenberg_demo, zd_system};
    use crate::skew::BasePoint;

    const BUDGET: usize = 10_000_000;

    #[test]
    fn balanced_binary_strings() {
        let sys = zd_system(ShiftSystem::full_shift(2), vec![0.0; 2], vec![1, -1]);
        let target = GroupElement::Zd(vec![0]);
        let z = constrained_sum(&sys, 4, &ConstraintMode::PeriodicAll, &target, BUDGET).unwrap();
        assert!((z - 6.0).abs() < 1e-12); // C(4,2)
        let z6 = constrained_sum(&sys, 6, &ConstraintMode::PeriodicAll, &target, BUDGET).unwrap();
        assert!((z6 - 20.0).abs() < 1e-12); // C(6,3)
                                            // odd n unsatisfiable
        let z5 = constrained_sum(&sys, 5, &ConstraintMode::PeriodicAll, &target, BUDGET).unwrap();
        assert_eq!(z5, 0.0);
    }

    #[test]
    fn f2_identity_returns_n4() {
        let sys = f2_demo();
        let e = GroupKind::Free(2).identity();
        let z = constrained_sum(&sys, 4, &ConstraintMode::PeriodicAll, &e, BUDGET).unwrap();
        assert!((z - 28.0).abs() < 1e-12);
        let z2 = constrained_sum(&sys, 2, &ConstraintMode::PeriodicAll, &e, BUDGET).unwrap();
        assert!((z2 - 4.0).abs() < 1e-12);
    }

    #[test]
    fn heisenberg_identity_returns_n4() {
        let sys = heisenberg_demo();
        let e = GroupKind::Heisenberg.identity();
        let z = constrained_sum(&sys, 4, &ConstraintMode::PeriodicAll, &e, BUDGET).unwrap();
        assert!((z - 28.0).abs() < 1e-12);
    }

    #[test]
    fn dp_matches_brute_force_all_modes() {
        let gm_sys = zd_system(ShiftSystem::golden_mean(), vec![0.4, -0.3], vec![1, -1]);
        let full3 = zd_system(
            ShiftSystem::full_shift(3),
            vec![0.1, 0.0, -0.2],
            vec![1, -1, 0],
        );
        let systems = [gm_sys, full3, f2_demo(), heisenberg_demo()];
        for sys in &systems {
            let e = sys.cocycle().kind().identity();
            let o = BasePoint::periodic(sys.shift(), vec![0]).unwrap();
            let modes = [
                ConstraintMode::PeriodicAll,
                ConstraintMode::PeriodicCylinder(0),
                ConstraintMode::Preimage(o.clone()),
                ConstraintMode::PreimageCylinder(0, o.clone()),
            ];
            for mode in &modes {
                for n in 1..=7 {
                    let dp = constrained_sum(sys, n, mode, &e, BUDGET).unwrap();
                    let bf = brute_force_constrained(sys, n, mode, &e, 20).unwrap();
                    let scale = bf.abs().max(1e-12);
                    assert!(
                        (dp - bf).abs() / scale < 1e-10,
                        "mode {} n={n}: dp={dp} brute={bf}",
                        mode.name()
                    );
                }
            }
        }
    }

    #[test]
    fn nonzero_target_matches_brute_force() {
        let sys = zd_system(ShiftSystem::full_shift(2), vec![0.0; 2], vec![1, -1]);
        let target = GroupElement::Zd(vec![2]);
        for n in 2..=8 {
            let dp =
                constrained_sum(&sys, n, &ConstraintMode::PeriodicAll, &target, BUDGET).unwrap();
            let bf = brute_force_constrained(&sys, n, &ConstraintMode::PeriodicAll, &target, 20)
                .unwrap();
            assert!((dp - bf).abs() < 1e-10, "n={n}: {dp} vs {bf}");
        }
    }

    #[test]
    fn constraint_only_adds_terms_bound() {
        // Z_n(e) ≤ untwisted full periodic sum
        let sys = f2_demo();
        let e = GroupKind::Free(2).identity();
        for n in 1..=8 {
            let z = constrained_sum(&sys, n, &ConstraintMode::PeriodicAll, &e, BUDGET).unwrap();
            let total = 4f64.powi(n as i32); // trace(Aⁿ) for the full 4-shift
            assert!(z <= total + 1e-9);
        }
    }

    #[test]
    fn monotone_under_abelianization() {
        // the G-constrained set injects into the Ḡ-constrained set
        let sys = f2_demo();
        let ab = sys.abelianized_system().unwrap();
        let e = GroupKind::Free(2).identity();
        let zero = GroupElement::Zd(vec![0, 0]);
        for n in 1..=8 {
            let zg = constrained_sum(&sys, n, &ConstraintMode::PeriodicAll, &e, BUDGET).unwrap();
            let zab = constrained_sum(&ab, n, &ConstraintMode::PeriodicAll, &zero, BUDGET).unwrap();
            assert!(
                zg <= zab + 1e-9,
                "n={n}: G-constrained {zg} exceeds abelianized {zab}"
            );
        }
    }

    #[test]
    fn budget_errors_suggest_alternate_path() {
        let sys = f2_demo();
        let e = GroupKind::Free(2).identity();
        let err = constrained_sum(&sys, 12, &ConstraintMode::PeriodicAll, &e, 50).unwrap_err();
        assert!(matches!(err, Error::Budget(_)));
        assert!(err.to_string().contains("radial"));
    }

    #[test]
    fn pruning_disabled_still_exact() {
        // a cocycle built with values outside the BFS radius has no
        // pruning bound; results must agree with the pruned run
        let kind = GroupKind::Zd(1);
        let coc_far = Cocycle::new(
            kind,
            vec![GroupElement::Zd(vec![1]), GroupElement::Zd(vec![-1])],
        )
        .unwrap();
        let sys =
            crate::skew::SkewSystem::new(ShiftSystem::full_shift(2), Potential::zero(2), coc_far)
                .unwrap();
        let e = kind.identity();
        let z = constrained_sum(&sys, 6, &ConstraintMode::PeriodicAll, &e, BUDGET).unwrap();
        assert!((z - 20.0).abs() < 1e-12);
    }
}
