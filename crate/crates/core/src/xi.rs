//! The twisted-pressure function 𝔭(w) = P(φ + ⟨w, f⟩) and its minimizer ξ.
//!
//! f is the abelianized cocycle, so 𝔭 is defined for every group variant.
//! The gradient is exact — ∇𝔭(w) = Σ_i p_i(w)·f(i) from the Gibbs
//! stationary vector of the w-twisted matrix, no finite differences — and
//! the minimizer is found by safeguarded Newton with a finite-difference
//! Hessian of that exact gradient. ξ is checked for independence of the
//! starting point and for a positive-definite Hessian; a flat direction
//! aborts instead of returning an arbitrary point.

use crate::skew::{check_extension_mixing, MixingFallback, MixingStatus, SkewSystem};
use crate::transfer::{perron, TransferMatrix};
use crate::{Error, Result};
use rustc_hash::FxHashMap;
use std::sync::Mutex;

/// Cache entry: (𝔭(w), ∇𝔭(w)) keyed by the bit pattern of w.
type EvalCache = FxHashMap<Vec<u64>, (f64, Vec<f64>)>;

/// Solver options. `tol` bounds ‖∇𝔭(ξ)‖₂.
#[derive(Debug, Clone)]
pub struct XiOptions {
    pub tol: f64,
    pub max_iter: usize,
    pub fd_step: f64,
}

impl Default for XiOptions {
    fn default() -> Self {
        XiOptions {
            tol: 1e-10,
            max_iter: 500,
            fd_step: 1e-4,
        }
    }
}

/// Result of the ξ search.
#[derive(Debug, Clone)]
pub struct XiResult {
    pub xi: Vec<f64>,
    pub gradient_norm: f64,
    pub pressure_at_xi: f64,
    /// Eigenvalues of the finite-difference Hessian at ξ (ascending).
    pub hessian_spectrum: Vec<f64>,
}

/// Cached evaluator for 𝔭 and ∇𝔭.
pub struct PressureFunction<'a> {
    sys: &'a SkewSystem,
    f: Vec<Vec<i64>>,
    cache: Mutex<EvalCache>,
}

impl<'a> PressureFunction<'a> {
    pub fn new(sys: &'a SkewSystem) -> Result<Self> {
        Ok(PressureFunction {
            sys,
            f: sys.f_values()?,
            cache: Mutex::new(FxHashMap::default()),
        })
    }

    pub fn dim(&self) -> usize {
        self.sys.ab_rank()
    }

    /// 𝔭(w) = log λ of the w-twisted matrix.
    pub fn eval(&self, w: &[f64]) -> Result<f64> {
        Ok(self.eval_with_grad(w)?.0)
    }

    /// ∇𝔭(w) = Σ_i p_i f(i), exact from Perron data.
    pub fn grad(&self, w: &[f64]) -> Result<Vec<f64>> {
        Ok(self.eval_with_grad(w)?.1)
    }

    pub fn eval_with_grad(&self, w: &[f64]) -> Result<(f64, Vec<f64>)> {
        let key: Vec<u64> = w.iter().map(|x| x.to_bits()).collect();
        if let Some(hit) = self.cache.lock().expect("poisoned").get(&key) {
            return Ok(hit.clone());
        }
        let zeros = vec![0.0; w.len()];
        let m = TransferMatrix::build(
            self.sys.shift(),
            self.sys.potential(),
            Some(&self.f),
            w,
            &zeros,
        )?;
        let data = perron(&m)?;
        let d = self.dim();
        let mut grad = vec![0.0; d];
        for i in 0..self.sys.shift().state_count() {
            let p_i = data.left[i] * data.right[i];
            for k in 0..d {
                grad[k] += p_i * self.f[i][k] as f64;
            }
        }
        let out = (data.pressure(), grad);
        self.cache
            .lock()
            .expect("poisoned")
            .insert(key, out.clone());
        Ok(out)
    }
}

/// Find the unique minimizer ξ of 𝔭 with the default options.
pub fn find_xi(sys: &SkewSystem, opts: &XiOptions) -> Result<XiResult> {
    let pf = PressureFunction::new(sys)?;
    let d = pf.dim();
    if d == 0 {
        let p = pf.eval(&[])?;
        return Ok(XiResult {
            xi: Vec::new(),
            gradient_norm: 0.0,
            pressure_at_xi: p,
            hessian_spectrum: Vec::new(),
        });
    }
    // default start plus two deterministic perturbations
    let mut rng = SplitMix64::new(0x5eed_cafe);
    let mut starts = vec![vec![0.0; d]];
    for _ in 0..2 {
        starts.push((0..d).map(|_| rng.symmetric() * 0.7).collect());
    }
    let mut results = Vec::new();
    for start in &starts {
        results.push(minimize_from(&pf, start, opts)?);
    }
    let base = &results[0];
    for other in &results[1..] {
        let dist: f64 = base
            .xi
            .iter()
            .zip(&other.xi)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt();
        if dist > 10.0 * opts.tol.max(1e-12) * (1.0 + norm2(&base.xi)) {
            return Err(Error::NonConvergence(format!(
                "minimizers from different starts disagree by {dist:.3e}"
            )));
        }
    }
    let xi = base.xi.clone();
    let hessian = fd_hessian(&pf, &xi, opts.fd_step)?;
    let spectrum = symmetric_eigenvalues(&hessian);
    let max_eig = spectrum.last().copied().unwrap_or(0.0);
    if let Some((k, &min_eig)) = spectrum
        .iter()
        .enumerate()
        .find(|&(_, &e)| e < 1e-8 * max_eig.max(1e-30))
    {
        return Err(Error::NonConvergence(format!(
            "flat direction detected: Hessian eigenvalue {min_eig:.3e} \
             (index {k}, largest {max_eig:.3e}); the minimum is not unique"
        )));
    }
    Ok(XiResult {
        gradient_norm: base.gradient_norm,
        pressure_at_xi: base.pressure_at_xi,
        xi,
        hessian_spectrum: spectrum,
    })
}

struct Minimized {
    xi: Vec<f64>,
    gradient_norm: f64,
    pressure_at_xi: f64,
}

/// Safeguarded Newton: finite-difference Hessian of the exact gradient,
/// backtracking line search on 𝔭, steepest-descent fallback.
fn minimize_from(pf: &PressureFunction, start: &[f64], opts: &XiOptions) -> Result<Minimized> {
    let d = start.len();
    let mut w = start.to_vec();
    let (mut value, mut grad) = pf.eval_with_grad(&w)?;
    for _ in 0..opts.max_iter {
        let gnorm = norm2(&grad);
        if gnorm <= opts.tol {
            return Ok(Minimized {
                xi: w,
                gradient_norm: gnorm,
                pressure_at_xi: value,
            });
        }
        let hess = fd_hessian(pf, &w, opts.fd_step)?;
        let newton = solve_sym(&hess, &grad);
        let descent = newton
            .as_ref()
            .map(|dir| dot(dir, &grad) > 1e-12 * gnorm * norm2(dir))
            .unwrap_or(false);
        // Endgame: once the gradient is small, value differences sit below
        // f64 resolution and an Armijo test can no longer certify
        // progress; take plain Newton steps and watch the gradient
        // instead, which is computed fresh at full precision.
        if gnorm < 1e-6 && descent {
            let dir = newton.as_ref().expect("checked");
            if norm2(dir) < 1.0 {
                let trial: Vec<f64> = (0..d).map(|k| w[k] - dir[k]).collect();
                let (tv, tg) = pf.eval_with_grad(&trial)?;
                if norm2(&tg) < gnorm {
                    w = trial;
                    value = tv;
                    grad = tg;
                    continue;
                }
                return Err(Error::NonConvergence(format!(
                    "Newton polish stalled at ‖∇𝔭‖ = {gnorm:.3e}"
                )));
            }
        }
        // candidate directions: Newton (downhill), then raw gradient
        let dir: Vec<f64> = if descent {
            newton.expect("checked").iter().map(|x| -x).collect()
        } else {
            grad.iter().map(|x| -x / gnorm).collect()
        };
        let slope = dot(&dir, &grad);
        let mut step = 1.0;
        let mut moved = false;
        for _ in 0..60 {
            let trial: Vec<f64> = (0..d).map(|k| w[k] + step * dir[k]).collect();
            let (tv, tg) = pf.eval_with_grad(&trial)?;
            if tv <= value + 1e-4 * step * slope {
                w = trial;
                value = tv;
                grad = tg;
                moved = true;
                break;
            }
            step *= 0.5;
        }
        if !moved {
            return Err(Error::NonConvergence(format!(
                "line search stalled at ‖∇𝔭‖ = {gnorm:.3e}"
            )));
        }
    }
    Err(Error::NonConvergence(format!(
        "no convergence in {} iterations (tol {:.1e})",
        opts.max_iter, opts.tol
    )))
}

/// Richardson-extrapolated central differences of the exact gradient.
fn fd_hessian(pf: &PressureFunction, w: &[f64], h: f64) -> Result<Vec<Vec<f64>>> {
    let d = w.len();
    let column = |step: f64, j: usize| -> Result<Vec<f64>> {
        let mut wp = w.to_vec();
        let mut wm = w.to_vec();
        wp[j] += step;
        wm[j] -= step;
        let gp = pf.grad(&wp)?;
        let gm = pf.grad(&wm)?;
        Ok((0..d).map(|i| (gp[i] - gm[i]) / (2.0 * step)).collect())
    };
    let mut hess = vec![vec![0.0; d]; d];
    for j in 0..d {
        let d1 = column(h, j)?;
        let d2 = column(h / 2.0, j)?;
        for i in 0..d {
            hess[i][j] = (4.0 * d2[i] - d1[i]) / 3.0;
        }
    }
    // symmetrize
    for i in 0..d {
        for j in (i + 1)..d {
            let m = 0.5 * (hess[i][j] + hess[j][i]);
            hess[i][j] = m;
            hess[j][i] = m;
        }
    }
    Ok(hess)
}

/// Status of one of the standing assumptions, with evidence.
#[derive(Debug, Clone)]
pub struct AssumptionStatus {
    pub verified: MixingStatus,
    pub evidence: String,
}

/// Report for the three standing assumptions: extension mixing, positive
/// exponential-moment radius δ, interior nondegenerate minimum ξ.
#[derive(Debug, Clone)]
pub struct AssumptionReport {
    pub mixing: AssumptionStatus,
    pub moment_radius: AssumptionStatus,
    pub delta: f64,
    pub minimum: AssumptionStatus,
    pub xi: Option<XiResult>,
}

/// Check the standing assumptions. `delta_closed_form` supplies δ for
/// truncation families; finite shifts default to δ = ∞.
pub fn check_assumptions(
    sys: &SkewSystem,
    horizon: usize,
    delta_closed_form: Option<f64>,
    budget: usize,
) -> Result<AssumptionReport> {
    let mixing_rep = check_extension_mixing(sys, horizon, budget, MixingFallback::Assumed)?;
    let mixing = AssumptionStatus {
        verified: mixing_rep.status,
        evidence: mixing_rep.detail.clone(),
    };
    let delta = delta_closed_form.unwrap_or(f64::INFINITY);
    let moment_radius = if delta > 0.0 {
        AssumptionStatus {
            verified: MixingStatus::Verified,
            evidence: if delta.is_infinite() {
                "finite state set: every exponential moment is finite (δ = ∞)".into()
            } else {
                format!("closed-form moment radius δ = {delta:.12}")
            },
        }
    } else {
        AssumptionStatus {
            verified: MixingStatus::Failed,
            evidence: format!("moment radius δ = {delta:.6} is not positive"),
        }
    };
    let (minimum, xi) = match find_xi(sys, &XiOptions::default()) {
        Ok(res) => {
            let interior = norm2(&res.xi) < delta;
            let status = if interior {
                MixingStatus::Verified
            } else {
                MixingStatus::Failed
            };
            let evidence = format!(
                "‖ξ‖₂ = {:.6e} {} δ; Hessian spectrum {:?}",
                norm2(&res.xi),
                if interior { "<" } else { "≥" },
                res.hessian_spectrum
            );
            (
                AssumptionStatus {
                    verified: status,
                    evidence,
                },
                Some(res),
            )
        }
        Err(e) => (
            AssumptionStatus {
                verified: MixingStatus::Failed,
                evidence: e.to_string(),
            },
            None,
        ),
    };
    Ok(AssumptionReport {
        mixing,
        moment_radius,
        delta,
        minimum,
        xi,
    })
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Solve the symmetric system H x = b by Gaussian elimination with
/// partial pivoting; None when H is numerically singular.
fn solve_sym(h: &[Vec<f64>], b: &[f64]) -> Option<Vec<f64>> {
    let d = b.len();
    let mut m: Vec<Vec<f64>> = (0..d)
        .map(|i| {
            let mut row = h[i].clone();
            row.push(b[i]);
            row
        })
        .collect();
    for col in 0..d {
        let piv =
            (col..d).max_by(|&r1, &r2| m[r1][col].abs().partial_cmp(&m[r2][col].abs()).unwrap())?;
        m.swap(col, piv);
        let p = m[col][col];
        if p.abs() < 1e-300 {
            return None;
        }
        for r in 0..d {
            if r != col {
                let f = m[r][col] / p;
                for c in col..=d {
                    m[r][c] -= f * m[col][c];
                }
            }
        }
    }
    Some((0..d).map(|i| m[i][d] / m[i][i]).collect())
}

/// Eigenvalues of a small symmetric matrix by cyclic Jacobi, ascending.
fn symmetric_eigenvalues(h: &[Vec<f64>]) -> Vec<f64> {
    let d = h.len();
    if d == 0 {
        return Vec::new();
    }
    let mut a: Vec<Vec<f64>> = h.to_vec();
    for _ in 0..100 {
        let mut off = 0.0;
        for i in 0..d {
            for j in (i + 1)..d {
                off += a[i][j] * a[i][j];
            }
        }
        if off < 1e-30 {
            break;
        }
        for p in 0..d {
            for q in (p + 1)..d {
                if a[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = 0.5 * (a[q][q] - a[p][p]) / a[p][q];
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..d {
                    let akp = a[k][p];
                    let akq = a[k][q];
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..d {
                    let apk = a[p][k];
                    let aqk = a[q][k];
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
            }
        }
    }
    let mut eigs: Vec<f64> = (0..d).map(|i| a[i][i]).collect();
    eigs.sort_by(|x, y| x.partial_cmp(y).unwrap());
    eigs
}

/// Small deterministic PRNG for reproducible perturbations.
struct SplitMix64(u64);

impl SplitMix64 {
    fn new(seed: u64) -> Self {
        SplitMix64(seed)
    }

    fn next_u64(&mut self) -> u64 {
        self.0 = self.0.wrapping_add(0x9e3779b97f4a7c15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
        z ^ (z >> 31)
    }

    /// Uniform in (−1, 1).
    fn symmetric(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 / (1u64 << 52) as f64 - 1.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::shift::ShiftSystem;
    use crate::skew::test_fixtures::{f2_demo, zd_system};

    fn asym_full2() -> SkewSystem {
        zd_system(ShiftSystem::full_shift(2), vec![1.0, 0.0], vec![1, -1])
    }

    #[test]
    fn p_eval_closed_form() {
        let sys = asym_full2();
        let pf = PressureFunction::new(&sys).unwrap();
        let expect = (1f64.exp() + 1.0).ln();
        assert!((pf.eval(&[0.0]).unwrap() - expect).abs() < 1e-12);
    }

    #[test]
    fn p_grad_closed_form() {
        let sys = asym_full2();
        let pf = PressureFunction::new(&sys).unwrap();
        let e = 1f64.exp();
        let expect = (e - 1.0) / (e + 1.0);
        let g = pf.grad(&[0.0]).unwrap();
        assert!((g[0] - expect).abs() < 1e-12, "grad {g:?}");
    }

    #[test]
    fn zero_cocycle_grad_is_zero() {
        let sys = zd_system(ShiftSystem::full_shift(2), vec![0.3, -0.1], vec![0, 0]);
        let pf = PressureFunction::new(&sys).unwrap();
        let g = pf.grad(&[0.7]).unwrap();
        assert!(g[0].abs() < 1e-14);
    }

    #[test]
    fn xi_closed_form_asymmetric() {
        let sys = asym_full2();
        let res = find_xi(&sys, &XiOptions::default()).unwrap();
        assert!((res.xi[0] + 0.5).abs() < 1e-8, "xi = {:?}", res.xi);
        assert!((res.pressure_at_xi - (0.5 + 2f64.ln())).abs() < 1e-10);
        assert!(res.gradient_norm <= 1e-10);
        assert!(res.hessian_spectrum[0] > 0.0);
    }

    #[test]
    fn xi_zero_by_symmetry() {
        let sys = zd_system(ShiftSystem::full_shift(2), vec![0.0; 2], vec![1, -1]);
        let res = find_xi(&sys, &XiOptions::default()).unwrap();
        assert!(res.xi[0].abs() < 1e-9);
        assert!((res.pressure_at_xi - 2f64.ln()).abs() < 1e-10);
    }

    #[test]
    fn xi_trivial_rank_zero() {
        let sys = crate::skew::SkewSystem::new(
            ShiftSystem::golden_mean(),
            crate::shift::Potential::zero(2),
            crate::groups::Cocycle::trivial(crate::groups::GroupKind::Cyclic(3), 2),
        )
        .unwrap();
        let res = find_xi(&sys, &XiOptions::default()).unwrap();
        assert!(res.xi.is_empty());
        assert!((res.pressure_at_xi - 0.4812118250596035).abs() < 1e-9);
    }

    #[test]
    fn xi_of_f2_demo_is_origin_with_pressure_log4() {
        let sys = f2_demo();
        let res = find_xi(&sys, &XiOptions::default()).unwrap();
        assert!(res.xi.iter().all(|x| x.abs() < 1e-9));
        assert!((res.pressure_at_xi - 4f64.ln()).abs() < 1e-10);
        assert_eq!(res.hessian_spectrum.len(), 2);
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let systems = [
            asym_full2(),
            zd_system(ShiftSystem::golden_mean(), vec![0.4, -0.2], vec![1, -1]),
            zd_system(
                ShiftSystem::full_shift(3),
                vec![0.2, 0.0, -0.5],
                vec![1, -1, 0],
            ),
        ];
        let mut rng = SplitMix64::new(42);
        for sys in &systems {
            let pf = PressureFunction::new(sys).unwrap();
            for _ in 0..20 {
                let w = vec![rng.symmetric() * 1.5];
                let g = pf.grad(&w).unwrap();
                let h = 1e-5;
                let fd =
                    (pf.eval(&[w[0] + h]).unwrap() - pf.eval(&[w[0] - h]).unwrap()) / (2.0 * h);
                let rel = (g[0] - fd).abs() / fd.abs().max(1e-8);
                assert!(rel <= 1e-6, "w={w:?}: grad {g:?} vs fd {fd}, rel {rel}");
            }
        }
    }

    #[test]
    fn pressure_convex_on_random_segments() {
        let sys = asym_full2();
        let pf = PressureFunction::new(&sys).unwrap();
        let mut rng = SplitMix64::new(7);
        for _ in 0..100 {
            let w1 = vec![rng.symmetric() * 2.0];
            let w2 = vec![rng.symmetric() * 2.0];
            let mid = vec![(w1[0] + w2[0]) / 2.0];
            let lhs = pf.eval(&mid).unwrap();
            let rhs = 0.5 * (pf.eval(&w1).unwrap() + pf.eval(&w2).unwrap());
            assert!(lhs <= rhs + 1e-10, "convexity violated: {lhs} > {rhs}");
        }
    }

    #[test]
    fn xi_is_global_minimum_on_ball() {
        let sys = asym_full2();
        let res = find_xi(&sys, &XiOptions::default()).unwrap();
        let pf = PressureFunction::new(&sys).unwrap();
        let radius = 2.0 + res.xi[0].abs();
        let mut rng = SplitMix64::new(99);
        for _ in 0..100 {
            let w = vec![rng.symmetric() * radius];
            assert!(pf.eval(&w).unwrap() >= res.pressure_at_xi - 1e-10);
        }
    }

    #[test]
    fn flat_direction_detected_for_degenerate_cocycle() {
        let sys = zd_system(ShiftSystem::full_shift(2), vec![0.0; 2], vec![0, 0]);
        // 𝔭 is constant in w: the Hessian vanishes
        assert!(matches!(
            find_xi(&sys, &XiOptions::default()),
            Err(Error::NonConvergence(_))
        ));
    }

    #[test]
    fn assumptions_report_finite_shift() {
        let sys = zd_system(ShiftSystem::full_shift(3), vec![0.0; 3], vec![1, -1, 0]);
        let rep = check_assumptions(&sys, 6, None, 1_000_000).unwrap();
        assert_eq!(rep.mixing.verified, MixingStatus::Verified);
        assert_eq!(rep.moment_radius.verified, MixingStatus::Verified);
        assert!(rep.delta.is_infinite());
        assert_eq!(rep.minimum.verified, MixingStatus::Verified);
        assert!(rep.xi.is_some());
    }

    #[test]
    fn assumptions_report_parity_failure() {
        let sys = zd_system(ShiftSystem::full_shift(2), vec![0.0; 2], vec![1, -1]);
        let rep = check_assumptions(&sys, 6, None, 1_000_000).unwrap();
        assert_eq!(rep.mixing.verified, MixingStatus::Failed);
        assert!(rep.mixing.evidence.contains("sublattice"));
    }
}
