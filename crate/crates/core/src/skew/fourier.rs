//! Torus-quadrature evaluation of ℤ^d-constrained sums.
//!
//! Z_n(m) = ∫_{T^d} trace(M(t)ⁿ)·e^{−2πi⟨t,m⟩} dt, where M(t) is the
//! transfer matrix twisted by the phase 2πi⟨t,f⟩. The integrand is a
//! trigonometric polynomial of per-coordinate degree ≤ n·max|f|, so a
//! uniform grid with Q ≥ 2·degree+1 points per dimension evaluates the
//! integral exactly (up to floating point). Below the Nyquist count the
//! result would alias, so the call refuses.

use super::SkewSystem;
use crate::exec;
use crate::transfer::TransferMatrix;
use crate::{Error, Result};
use num_complex::Complex64;

/// Minimal exact quadrature count per dimension for length n:
/// 2·n·max|f| + 1.
pub fn nyquist_points(sys: &SkewSystem, n: usize) -> Result<usize> {
    let f = sys.f_values()?;
    let max_f = f
        .iter()
        .flat_map(|v| v.iter().map(|x| x.unsigned_abs()))
        .max()
        .unwrap_or(0);
    Ok(2 * n * max_f as usize + 1)
}

/// Z_n(m) by exact torus quadrature. `q` grid points per dimension.
pub fn fourier_constrained_sum(sys: &SkewSystem, n: usize, m: &[i64], q: usize) -> Result<f64> {
    let (log_z, sign) = fourier_constrained_log_sum(sys, n, m, q)?;
    if sign == 0.0 {
        return Ok(0.0);
    }
    Ok(sign * log_z.exp())
}

/// As [`fourier_constrained_sum`] in log form: returns (log|Z|, sign) with
/// sign ∈ {−1, 0, 1}. Sums beyond f64 range stay representable this way.
pub fn fourier_constrained_log_sum(
    sys: &SkewSystem,
    n: usize,
    m: &[i64],
    q: usize,
) -> Result<(f64, f64)> {
    if !matches!(sys.cocycle().kind(), crate::groups::GroupKind::Zd(_)) {
        return Err(Error::Unsupported(
            "the Fourier path needs a ℤ^d cocycle".into(),
        ));
    }
    let f = sys.f_values()?;
    let d = sys.ab_rank();
    if m.len() != d {
        return Err(Error::Dimension(format!(
            "target vector has {} coordinates, cocycle rank {d}",
            m.len()
        )));
    }
    if d == 0 {
        return Err(Error::Unsupported(
            "d = 0 has no torus; use the plain trace".into(),
        ));
    }
    let need = nyquist_points(sys, n)?;
    if q < need {
        return Err(Error::Validation(format!(
            "Q = {q} below the Nyquist count {need}; the quadrature would alias"
        )));
    }
    // provably unreachable targets are exactly zero
    for (k, &mk) in m.iter().enumerate() {
        let max_fk: i64 = f.iter().map(|v| v[k].abs()).max().unwrap_or(0);
        if mk.abs() > n as i64 * max_fk {
            return Ok((f64::NEG_INFINITY, 0.0));
        }
    }
    let nodes = q
        .checked_pow(d as u32)
        .ok_or_else(|| Error::Budget("quadrature grid overflows".into()))?;
    let shift = sys.shift();
    let pot = sys.potential();
    let rank_one = shift.is_full() && pot.depth() == 1;
    if !rank_one {
        // general path costs ~ nodes · n · S³ complex flops
        let s = shift.state_count();
        let ops = nodes as u128 * n as u128 * (s as u128).pow(3);
        if ops > 50_000_000_000 {
            return Err(Error::Budget(format!(
                "quadrature would need ~{ops} operations; reduce n or Q"
            )));
        }
    }
    // per node: (mantissa z with |z| ∈ {0} ∪ [~1/S, ~S], log scale L);
    // term = z·e^L·e^{−2πi⟨t,m⟩}
    let terms: Vec<Result<(Complex64, f64)>> = exec::par_map_range(nodes, |node| {
        let t = grid_point(node, q, d);
        let (z, log_scale) = if rank_one {
            let mut acc = Complex64::new(0.0, 0.0);
            for i in 0..shift.state_count() {
                let phase: f64 = f[i]
                    .iter()
                    .zip(&t)
                    .map(|(&a, &b)| a as f64 * b)
                    .sum::<f64>()
                    * std::f64::consts::TAU;
                acc += Complex64::from_polar(pot.edge(i as u32, 0).exp(), phase);
            }
            let r = acc.norm();
            if r == 0.0 {
                (Complex64::new(0.0, 0.0), f64::NEG_INFINITY)
            } else {
                (
                    Complex64::from_polar(1.0, acc.arg() * n as f64),
                    n as f64 * r.ln(),
                )
            }
        } else {
            let matrix = TransferMatrix::build(shift, pot, Some(&f), &vec![0.0; d], &t)?;
            matrix.trace_pow_log(n)
        };
        let mdot: f64 = m.iter().zip(&t).map(|(&a, &b)| a as f64 * b).sum();
        Ok((
            z * Complex64::from_polar(1.0, -std::f64::consts::TAU * mdot),
            log_scale,
        ))
    });
    let mut collected = Vec::with_capacity(nodes);
    for t in terms {
        collected.push(t?);
    }
    let l_max = collected
        .iter()
        .filter(|(z, _)| z.norm() > 0.0)
        .map(|&(_, l)| l)
        .fold(f64::NEG_INFINITY, f64::max);
    if l_max == f64::NEG_INFINITY {
        return Ok((f64::NEG_INFINITY, 0.0));
    }
    let mut sum = Complex64::new(0.0, 0.0);
    for (z, l) in &collected {
        if z.norm() > 0.0 {
            sum += z * (l - l_max).exp();
        }
    }
    let value = sum.re / nodes as f64;
    // The imaginary part is pure roundoff for integer targets, and so is
    // any real part below the quadrature's resolution: coefficients
    // smaller than ~1e−12 of the dominant scale cannot be distinguished
    // from an exact zero and are reported as zero.
    let floor = 1e-12 * sys.shift().state_count() as f64;
    if value.abs() <= floor {
        return Ok((f64::NEG_INFINITY, 0.0));
    }
    Ok((l_max + value.abs().ln(), value.signum()))
}

fn grid_point(node: usize, q: usize, d: usize) -> Vec<f64> {
    let mut t = Vec::with_capacity(d);
    let mut rest = node;
    for _ in 0..d {
        t.push((rest % q) as f64 / q as f64);
        rest /= q;
    }
    t
}
