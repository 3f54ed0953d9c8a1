//! Transfer matrices, Perron eigendata, pressure and Gibbs measures.
//!
//! For a depth-≤2 potential the transfer operator of a finite Markov shift
//! is the S×S matrix M(i,j) = A(i,j)·exp(φ(i,j) + ⟨w,f(i)⟩ + 2πi⟨t,f(i)⟩),
//! acting by (Lv)(j) = Σ_i M(i,j) v(i). Pressure is log of the Perron root
//! of the untwisted (t = 0) matrix; the complex twist enters the torus
//! quadrature and the spectral-gap diagnostics.
//!
//! Eigensolver layout: a closed form for rank-1 matrices (full shift with
//! a depth-1 potential), a dense solve for S ≤ 64, and shifted power
//! iteration above that. The paths are cross-checked against each other in
//! the test suite.

use crate::shift::{Potential, ShiftSystem, Word};
use crate::{Error, Result};
use nalgebra::DMatrix;
use num_complex::Complex64;

/// Dense eigensolves are used up to this state count; power iteration
/// beyond it.
pub const DENSE_EIGEN_CAP: usize = 64;

/// Default residual tolerance for Perron data.
pub const DEFAULT_PERRON_TOL: f64 = 1e-12;

/// A (possibly complex-twisted) transfer matrix in structured form.
///
/// The modulus of every entry is exp(edge_log); the twist contributes a
/// phase depending on the source state only, so |M(i,j)| equals the
/// untwisted entry.
#[derive(Debug, Clone)]
pub struct TransferMatrix {
    states: usize,
    transitive: bool,
    rows: Rows,
    /// phase 2π⟨t, f(i)⟩ per source state.
    phase: Vec<f64>,
}

/// Row storage. Rank-one matrices (full shift with a depth-1 potential)
/// keep one log-weight per source state, so building and applying them is
/// O(S) — the truncation families at S in the thousands rely on this.
#[derive(Debug, Clone)]
enum Rows {
    RankOne {
        log_weights: Vec<f64>,
    },
    Sparse {
        successors: Vec<Vec<u32>>,
        /// log-magnitude per allowed edge, parallel to `successors`.
        edge_log: Vec<Vec<f64>>,
    },
}

impl TransferMatrix {
    /// Build M for shift `s`, potential `p`, abelianized cocycle values
    /// `f` (one integer vector per state; pass `None` for no cocycle),
    /// real twist `w` and torus point `t`.
    pub fn build(
        s: &ShiftSystem,
        p: &Potential,
        f: Option<&[Vec<i64>]>,
        w: &[f64],
        t: &[f64],
    ) -> Result<TransferMatrix> {
        let n = s.state_count();
        if p.states() != n {
            return Err(Error::Dimension(format!(
                "potential over {} states, shift has {}",
                p.states(),
                n
            )));
        }
        let d = f.map_or(0, |f| f.first().map_or(0, Vec::len));
        if let Some(f) = f {
            if f.len() != n {
                return Err(Error::Dimension(format!(
                    "cocycle values for {} states, shift has {}",
                    f.len(),
                    n
                )));
            }
            if f.iter().any(|v| v.len() != d) {
                return Err(Error::Dimension("ragged cocycle vectors".into()));
            }
        }
        if w.len() != d || t.len() != d {
            return Err(Error::Dimension(format!(
                "twist dimension mismatch: cocycle rank {d}, |w| = {}, |t| = {}",
                w.len(),
                t.len()
            )));
        }
        let mut phase = Vec::with_capacity(n);
        let mut wdots = Vec::with_capacity(n);
        for i in 0..n {
            let (wdot, tdot) = match f {
                Some(f) => {
                    let wd: f64 = f[i].iter().zip(w).map(|(&a, &b)| a as f64 * b).sum();
                    let td: f64 = f[i].iter().zip(t).map(|(&a, &b)| a as f64 * b).sum();
                    (wd, td)
                }
                None => (0.0, 0.0),
            };
            phase.push(2.0 * std::f64::consts::PI * tdot);
            wdots.push(wdot);
        }
        let rows = if s.is_full() && p.depth() == 1 {
            Rows::RankOne {
                log_weights: (0..n).map(|i| p.edge(i as u32, 0) + wdots[i]).collect(),
            }
        } else {
            let mut edge_log = Vec::with_capacity(n);
            for i in 0..n {
                let iu = i as u32;
                let row: Vec<f64> = s
                    .successors(iu)
                    .iter()
                    .map(|&j| p.edge(iu, j) + wdots[i])
                    .collect();
                edge_log.push(row);
            }
            Rows::Sparse {
                successors: (0..n).map(|i| s.successors(i as u32).to_vec()).collect(),
                edge_log,
            }
        };
        Ok(TransferMatrix {
            states: n,
            transitive: s.transitive(),
            rows,
            phase,
        })
    }

    pub fn states(&self) -> usize {
        self.states
    }

    pub fn is_real(&self) -> bool {
        self.phase.iter().all(|&p| p == 0.0)
    }

    /// Rank-1 structure: full shift with row-constant log-weights.
    pub fn is_rank_one(&self) -> bool {
        matches!(self.rows, Rows::RankOne { .. })
    }

    /// Complex entry M(i,j) (zero on forbidden edges).
    pub fn entry(&self, i: u32, j: u32) -> Complex64 {
        match &self.rows {
            Rows::RankOne { log_weights } => {
                Complex64::from_polar(log_weights[i as usize].exp(), self.phase[i as usize])
            }
            Rows::Sparse {
                successors,
                edge_log,
            } => match successors[i as usize].iter().position(|&s| s == j) {
                None => Complex64::new(0.0, 0.0),
                Some(k) => {
                    Complex64::from_polar(edge_log[i as usize][k].exp(), self.phase[i as usize])
                }
            },
        }
    }

    /// Log-magnitude of row i (rank-one rows only).
    fn rank_one_log_weight(&self, i: usize) -> f64 {
        match &self.rows {
            Rows::RankOne { log_weights } => log_weights[i],
            Rows::Sparse { .. } => unreachable!("guarded by is_rank_one"),
        }
    }

    pub fn dense_complex(&self) -> DMatrix<Complex64> {
        let n = self.states;
        let mut m = DMatrix::zeros(n, n);
        match &self.rows {
            Rows::RankOne { log_weights } => {
                for i in 0..n {
                    let z = Complex64::from_polar(log_weights[i].exp(), self.phase[i]);
                    for j in 0..n {
                        m[(i, j)] = z;
                    }
                }
            }
            Rows::Sparse {
                successors,
                edge_log,
            } => {
                for i in 0..n {
                    for (k, &j) in successors[i].iter().enumerate() {
                        m[(i, j as usize)] =
                            Complex64::from_polar(edge_log[i][k].exp(), self.phase[i]);
                    }
                }
            }
        }
        m
    }

    pub fn dense_real(&self) -> Result<DMatrix<f64>> {
        if !self.is_real() {
            return Err(Error::Unsupported("dense_real on a twisted matrix".into()));
        }
        let n = self.states;
        let mut m = DMatrix::zeros(n, n);
        match &self.rows {
            Rows::RankOne { log_weights } => {
                for i in 0..n {
                    let v = log_weights[i].exp();
                    for j in 0..n {
                        m[(i, j)] = v;
                    }
                }
            }
            Rows::Sparse {
                successors,
                edge_log,
            } => {
                for i in 0..n {
                    for (k, &j) in successors[i].iter().enumerate() {
                        m[(i, j as usize)] = edge_log[i][k].exp();
                    }
                }
            }
        }
        Ok(m)
    }

    /// Real matvec (Mr)(i) = Σ_j M(i,j) r_j. Requires t = 0.
    fn matvec(&self, r: &[f64], out: &mut [f64]) {
        match &self.rows {
            Rows::RankOne { log_weights } => {
                let total: f64 = r.iter().sum();
                for i in 0..self.states {
                    out[i] = log_weights[i].exp() * total;
                }
            }
            Rows::Sparse {
                successors,
                edge_log,
            } => {
                for i in 0..self.states {
                    let mut acc = 0.0;
                    for (k, &j) in successors[i].iter().enumerate() {
                        acc += edge_log[i][k].exp() * r[j as usize];
                    }
                    out[i] = acc;
                }
            }
        }
    }

    /// Real transposed matvec (lM)(j) = Σ_i l_i M(i,j).
    fn matvec_t(&self, l: &[f64], out: &mut [f64]) {
        match &self.rows {
            Rows::RankOne { log_weights } => {
                let total: f64 = (0..self.states).map(|i| l[i] * log_weights[i].exp()).sum();
                out.iter_mut().for_each(|x| *x = total);
            }
            Rows::Sparse {
                successors,
                edge_log,
            } => {
                out.iter_mut().for_each(|x| *x = 0.0);
                for i in 0..self.states {
                    let li = l[i];
                    if li != 0.0 {
                        for (k, &j) in successors[i].iter().enumerate() {
                            out[j as usize] += li * edge_log[i][k].exp();
                        }
                    }
                }
            }
        }
    }

    /// trace(Mⁿ) in log form: returns (z, L) with trace = z·e^L and
    /// |z| ∈ {0} ∪ [1/S, S·...], i.e. the modulus lives in L. Uses the
    /// rank-1 shortcut when available, otherwise scaled repeated
    /// multiplication.
    pub fn trace_pow_log(&self, n: usize) -> (Complex64, f64) {
        assert!(n >= 1);
        if self.is_rank_one() {
            // trace(Mⁿ) = (Σ_i M(i,·))ⁿ
            let z: Complex64 = (0..self.states)
                .map(|i| Complex64::from_polar(self.rank_one_log_weight(i).exp(), self.phase[i]))
                .sum();
            let r = z.norm();
            if r == 0.0 {
                return (Complex64::new(0.0, 0.0), 0.0);
            }
            return (
                Complex64::from_polar(1.0, z.arg() * n as f64),
                n as f64 * r.ln(),
            );
        }
        let s = self.states;
        let base = self.dense_complex();
        let base_max = base.iter().map(|z| z.norm()).fold(0.0f64, f64::max);
        if base_max == 0.0 {
            return (Complex64::new(0.0, 0.0), 0.0);
        }
        let scaled = base.map(|z| z / base_max);
        let mut pow = scaled.clone();
        let mut log_scale = base_max.ln() * n as f64;
        for _ in 1..n {
            pow *= &scaled;
            let m = pow.iter().map(|z| z.norm()).fold(0.0f64, f64::max);
            if m == 0.0 {
                return (Complex64::new(0.0, 0.0), 0.0);
            }
            pow /= Complex64::new(m, 0.0);
            log_scale += m.ln();
        }
        let tr: Complex64 = (0..s).map(|i| pow[(i, i)]).sum();
        (tr, log_scale)
    }
}

/// Perron eigendata: leading eigenvalue with positive left/right
/// eigenvectors, normalized so that l·r = 1 and max(r) = 1.
#[derive(Debug, Clone)]
pub struct PerronData {
    pub lambda: f64,
    pub right: Vec<f64>,
    pub left: Vec<f64>,
    /// Achieved residual max(‖Mr − λr‖∞, ‖lM − λl‖∞) / λ.
    pub residual: f64,
    /// Second-largest eigenvalue modulus, when a full spectrum was
    /// computed (dense and rank-1 paths).
    pub second_modulus: Option<f64>,
}

impl PerronData {
    pub fn pressure(&self) -> f64 {
        self.lambda.ln()
    }
}

/// Perron data for a real nonnegative transfer matrix.
pub fn perron(m: &TransferMatrix) -> Result<PerronData> {
    perron_with_tol(m, DEFAULT_PERRON_TOL)
}

pub fn perron_with_tol(m: &TransferMatrix, tol: f64) -> Result<PerronData> {
    if !m.is_real() {
        return Err(Error::Unsupported(
            "perron needs an untwisted matrix".into(),
        ));
    }
    if !m.transitive {
        return Err(Error::Validation(
            "perron requires a transitive (irreducible) system".into(),
        ));
    }
    if m.is_rank_one() {
        return Ok(perron_rank_one(m));
    }
    let mut data = if m.states <= DENSE_EIGEN_CAP {
        perron_dense(m, tol)?
    } else {
        perron_power(m, tol)?
    };
    normalize(&mut data);
    data.residual = residual(m, &data);
    // small floor: a residual below ~50 ulps of λ is machine noise
    if data.residual > tol.max(1e-14) {
        return Err(Error::NonConvergence(format!(
            "perron residual {:.3e} above tolerance {:.1e}",
            data.residual, tol
        )));
    }
    Ok(data)
}

fn perron_rank_one(m: &TransferMatrix) -> PerronData {
    let weights: Vec<f64> = (0..m.states)
        .map(|i| m.rank_one_log_weight(i).exp())
        .collect();
    let lambda: f64 = weights.iter().sum();
    let max_w = weights.iter().cloned().fold(f64::MIN, f64::max);
    let right: Vec<f64> = weights.iter().map(|&v| v / max_w).collect();
    let c = max_w / lambda;
    let left = vec![c; m.states];
    let mut data = PerronData {
        lambda,
        right,
        left,
        residual: 0.0,
        second_modulus: Some(0.0),
    };
    normalize(&mut data);
    data.residual = residual(m, &data);
    data
}

fn perron_dense(m: &TransferMatrix, _tol: f64) -> Result<PerronData> {
    let dense = m.dense_real()?;
    let eigs = dense.complex_eigenvalues();
    let mut mods: Vec<(f64, f64)> = eigs.iter().map(|z| (z.norm(), z.re)).collect();
    mods.sort_by(|a, b| b.partial_cmp(a).expect("finite eigenvalues"));
    let lead_mod = mods[0].0;
    if lead_mod <= 0.0 {
        return Err(Error::Validation("zero spectral radius".into()));
    }
    // periodic systems carry several max-modulus eigenvalues that agree
    // only up to roundoff; the Perron root is the real positive one among
    // them
    let lead_re = mods
        .iter()
        .take_while(|&&(md, _)| md >= lead_mod * (1.0 - 1e-9))
        .map(|&(_, re)| re)
        .fold(f64::NEG_INFINITY, f64::max);
    if (lead_re - lead_mod).abs() > 1e-8 * lead_mod {
        return Err(Error::NonConvergence(format!(
            "leading eigenvalue not real positive (re {lead_re:.6e}, modulus {lead_mod:.6e})"
        )));
    }
    let second_modulus = mods
        .iter()
        .map(|&(md, _)| md)
        .find(|&md| md < lead_mod * (1.0 - 1e-12))
        .or(if mods.len() > 1 {
            Some(mods[1].0)
        } else {
            Some(0.0)
        });
    let lambda = lead_re;
    // inverse iteration with a slightly detuned shift
    let n = m.states;
    let shift = lambda * (1.0 + 1e-8) + 1e-300;
    let shifted = {
        let mut a = dense.clone();
        for i in 0..n {
            a[(i, i)] -= shift;
        }
        a
    };
    let lu = shifted.clone().lu();
    let lu_t = shifted.transpose().lu();
    let solve_dir = |lu: &nalgebra::LU<f64, nalgebra::Dyn, nalgebra::Dyn>| -> Result<Vec<f64>> {
        let mut v = nalgebra::DVector::from_element(n, 1.0);
        for _ in 0..3 {
            let mut x = lu
                .solve(&v)
                .ok_or_else(|| Error::NonConvergence("singular shifted matrix".into()))?;
            let norm = x.amax();
            x /= norm;
            v = x;
        }
        // fix overall sign so the vector is positive
        let s: f64 = v.iter().sum();
        let sign = if s < 0.0 { -1.0 } else { 1.0 };
        Ok(v.iter().map(|&x| x * sign).collect())
    };
    let right = solve_dir(&lu)?;
    let left = solve_dir(&lu_t)?;
    if right.iter().any(|&x| x <= 0.0) || left.iter().any(|&x| x <= 0.0) {
        return Err(Error::NonConvergence(
            "Perron eigenvector not strictly positive".into(),
        ));
    }
    Ok(PerronData {
        lambda,
        right,
        left,
        residual: f64::NAN,
        second_modulus,
    })
}

fn perron_power(m: &TransferMatrix, tol: f64) -> Result<PerronData> {
    // shift by cI so the Perron root strictly dominates even for
    // periodic (imprimitive) systems
    let n = m.states;
    let ones = vec![1.0; n];
    let mut row_sums = vec![0.0; n];
    m.matvec(&ones, &mut row_sums);
    let max_row_sum = row_sums.iter().cloned().fold(0.0f64, f64::max);
    let c = 0.5 * max_row_sum;
    let iterate = |transpose: bool| -> Result<(f64, Vec<f64>)> {
        let mut v = vec![1.0f64; n];
        let mut out = vec![0.0f64; n];
        let mut lambda_b = 0.0;
        for it in 0..200_000 {
            if transpose {
                m.matvec_t(&v, &mut out);
            } else {
                m.matvec(&v, &mut out);
            }
            for i in 0..n {
                out[i] += c * v[i];
            }
            // Rayleigh quotient for the shifted matrix
            let num: f64 = out.iter().zip(&v).map(|(a, b)| a * b).sum();
            let den: f64 = v.iter().map(|x| x * x).sum();
            lambda_b = num / den;
            let mut res = 0.0f64;
            for i in 0..n {
                res = res.max((out[i] - lambda_b * v[i]).abs());
            }
            let norm = out.iter().cloned().fold(0.0f64, f64::max);
            for i in 0..n {
                v[i] = out[i] / norm;
            }
            // the shift cancels in the residual, so measure convergence
            // against the unshifted eigenvalue to honor the tolerance
            // contract of the caller
            let lambda_m = (lambda_b - c).abs().max(1e-300);
            if res <= 0.5 * tol * lambda_m && it > 2 {
                return Ok((lambda_b - c, v));
            }
        }
        Err(Error::NonConvergence(format!(
            "power iteration did not reach tol {tol:.1e} (achieved λ {lambda_b:.12e})"
        )))
    };
    let (lambda, right) = iterate(false)?;
    let (_, left) = iterate(true)?;
    Ok(PerronData {
        lambda,
        right,
        left,
        residual: f64::NAN,
        second_modulus: None,
    })
}

fn normalize(data: &mut PerronData) {
    let max_r = data.right.iter().cloned().fold(f64::MIN, f64::max);
    data.right.iter_mut().for_each(|x| *x /= max_r);
    let dot: f64 = data.left.iter().zip(&data.right).map(|(a, b)| a * b).sum();
    data.left.iter_mut().for_each(|x| *x /= dot);
}

fn residual(m: &TransferMatrix, data: &PerronData) -> f64 {
    let n = m.states;
    let mut mr = vec![0.0; n];
    let mut lm = vec![0.0; n];
    m.matvec(&data.right, &mut mr);
    m.matvec_t(&data.left, &mut lm);
    let mut res = 0.0f64;
    for i in 0..n {
        res = res.max((mr[i] - data.lambda * data.right[i]).abs());
        res = res.max((lm[i] - data.lambda * data.left[i]).abs());
    }
    res / data.lambda
}

/// Gurevič pressure P = log λ of the w-twisted real transfer matrix.
pub fn pressure(s: &ShiftSystem, p: &Potential, f: Option<&[Vec<i64>]>, w: &[f64]) -> Result<f64> {
    let zeros = vec![0.0; w.len()];
    let m = TransferMatrix::build(s, p, f, w, &zeros)?;
    Ok(perron(&m)?.pressure())
}

/// The periodic-point characterization: the sequence
/// (n, (1/n)·log trace(Mⁿ)) for n = 1..=n_max. When trace(Mⁿ) = 0 (period
/// obstruction) the term is the −∞ sentinel, not an error.
pub fn pressure_via_periodic(
    s: &ShiftSystem,
    p: &Potential,
    n_max: usize,
) -> Result<Vec<(usize, f64)>> {
    let m = TransferMatrix::build(s, p, None, &[], &[])?;
    let mut out = Vec::with_capacity(n_max);
    for n in 1..=n_max {
        let (z, log_scale) = m.trace_pow_log(n);
        let tr = z.re; // imaginary part identically 0 for real matrices
        let term = if tr <= 0.0 {
            f64::NEG_INFINITY
        } else {
            (tr.ln() + log_scale) / n as f64
        };
        out.push((n, term));
    }
    Ok(out)
}

/// The Gibbs measure of an untwisted transfer matrix: stationary vector
/// p_i = l_i r_i and kernel P(i,j) = M(i,j) r_j / (λ r_i).
#[derive(Debug, Clone)]
pub struct GibbsMeasure {
    states: usize,
    stationary: Vec<f64>,
    /// dense row-stochastic kernel (0 on forbidden edges)
    kernel: Vec<f64>,
    lambda: f64,
}

impl GibbsMeasure {
    pub fn from_perron(m: &TransferMatrix, data: &PerronData) -> Result<GibbsMeasure> {
        if !m.is_real() {
            return Err(Error::Unsupported(
                "Gibbs measure of a twisted matrix".into(),
            ));
        }
        let n = m.states;
        if n > 2048 {
            return Err(Error::Budget(format!(
                "dense Gibbs kernel capped at 2048 states, got {n}"
            )));
        }
        let mut kernel = vec![0.0; n * n];
        match &m.rows {
            Rows::RankOne { log_weights } => {
                for i in 0..n {
                    for j in 0..n {
                        kernel[i * n + j] =
                            log_weights[i].exp() * data.right[j] / (data.lambda * data.right[i]);
                    }
                }
            }
            Rows::Sparse {
                successors,
                edge_log,
            } => {
                for i in 0..n {
                    for (k, &j) in successors[i].iter().enumerate() {
                        kernel[i * n + j as usize] = edge_log[i][k].exp() * data.right[j as usize]
                            / (data.lambda * data.right[i]);
                    }
                }
            }
        }
        let stationary: Vec<f64> = (0..n).map(|i| data.left[i] * data.right[i]).collect();
        Ok(GibbsMeasure {
            states: n,
            stationary,
            kernel,
            lambda: data.lambda,
        })
    }

    pub fn states(&self) -> usize {
        self.states
    }

    pub fn stationary(&self) -> &[f64] {
        &self.stationary
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    #[inline]
    pub fn kernel(&self, i: u32, j: u32) -> f64 {
        self.kernel[i as usize * self.states + j as usize]
    }

    /// Edge marginal μ(i,j) = p_i P(i,j).
    pub fn edge_marginal(&self, i: u32, j: u32) -> f64 {
        self.stationary[i as usize] * self.kernel(i, j)
    }

    /// Cylinder mass `μ([w]) = p_{w₁}·∏ P(w_t, w_{t+1})`. Forbidden words
    /// get mass 0 by convention.
    pub fn cylinder_mass(&self, symbols: &[u32]) -> f64 {
        if symbols.is_empty() {
            return 1.0;
        }
        let mut mass = self.stationary[symbols[0] as usize];
        for pair in symbols.windows(2) {
            mass *= self.kernel(pair[0], pair[1]);
            if mass == 0.0 {
                return 0.0;
            }
        }
        mass
    }

    /// ∫ g dμ for a depth-≤2 table g, exact from edge marginals.
    pub fn integral(&self, g: &Potential) -> f64 {
        let n = self.states;
        let mut acc = 0.0;
        for i in 0..n {
            for j in 0..n {
                let m = self.edge_marginal(i as u32, j as u32);
                if m != 0.0 {
                    acc += m * g.edge(i as u32, j as u32);
                }
            }
        }
        acc
    }
}

/// Empirical Gibbs-bound constants: min and max over all allowed words of
/// length ≤ `up_to` of `μ([w])·e^{nP − φⁿ(x_w)}`, where x_w is the periodic
/// extension of w when the wrap edge exists and otherwise w continued
/// along the first hop of a fixed shortest return path to w₁.
pub fn gibbs_bounds_check(
    s: &ShiftSystem,
    p: &Potential,
    gibbs: &GibbsMeasure,
    up_to: usize,
    ceiling: usize,
) -> Result<(f64, f64)> {
    let log_lambda = gibbs.lambda.ln();
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for n in 1..=up_to {
        for word in s.allowed_words_capped(n, ceiling)? {
            let syms = word.symbols().to_vec();
            let last = syms[n - 1];
            let first = syms[0];
            let birkhoff = if s.allowed(last, first) {
                s.birkhoff_periodic(p, &word)?
            } else {
                let hop = s.shortest_return_hop(last, first).ok_or_else(|| {
                    Error::Validation("no return path for Gibbs evaluation point".into())
                })?;
                s.birkhoff_continued(p, &word, hop)?
            };
            let mass = gibbs.cylinder_mass(&syms);
            let ratio = mass * (n as f64 * log_lambda - birkhoff).exp();
            lo = lo.min(ratio);
            hi = hi.max(ratio);
        }
    }
    Ok((lo, hi))
}

/// Spectral radius of the complex-twisted matrix, by a dense eigensolve on
/// the 2S×2S real companion.
pub fn twisted_spectral_radius(
    s: &ShiftSystem,
    p: &Potential,
    f: &[Vec<i64>],
    w: &[f64],
    t: &[f64],
) -> Result<f64> {
    let m = TransferMatrix::build(s, p, Some(f), w, t)?;
    spectral_radius(&m)
}

/// Spectral radius of an arbitrary (possibly twisted) transfer matrix.
pub fn spectral_radius(m: &TransferMatrix) -> Result<f64> {
    let n = m.states();
    if m.is_rank_one() {
        // spectrum is {trace, 0}
        let z: Complex64 = (0..n)
            .map(|i| Complex64::from_polar(m.rank_one_log_weight(i).exp(), m.phase[i]))
            .sum();
        return Ok(z.norm());
    }
    if n > 2 * DENSE_EIGEN_CAP {
        return Err(Error::Budget(format!(
            "dense spectral radius capped at {} states, got {n}",
            2 * DENSE_EIGEN_CAP
        )));
    }
    let c = m.dense_complex();
    // realification: spec([[Re, -Im], [Im, Re]]) = spec(C) ∪ spec(conj C)
    let mut real = DMatrix::<f64>::zeros(2 * n, 2 * n);
    for i in 0..n {
        for j in 0..n {
            let z = c[(i, j)];
            real[(i, j)] = z.re;
            real[(i, j + n)] = -z.im;
            real[(i + n, j)] = z.im;
            real[(i + n, j + n)] = z.re;
        }
    }
    let eigs = real.complex_eigenvalues();
    Ok(eigs.iter().map(|z| z.norm()).fold(0.0, f64::max))
}

/// Brute-force twisted periodic sum Σ_{σⁿx=x} e^{φⁿ(x) + ⟨w+2πit, fⁿ(x)⟩},
/// the enumeration-side oracle for `trace_pow_log`.
pub fn periodic_sum_oracle(
    s: &ShiftSystem,
    p: &Potential,
    f: Option<&[Vec<i64>]>,
    w: &[f64],
    t: &[f64],
    n: usize,
    ceiling: usize,
) -> Result<Complex64> {
    let mut acc = Complex64::new(0.0, 0.0);
    for word in s.periodic_words_capped(n, ceiling)? {
        let mut log_mag = s.birkhoff_periodic(p, &word)?;
        let mut angle = 0.0;
        if let Some(f) = f {
            let mut fsum = vec![0i64; w.len()];
            for &sym in word.symbols() {
                for (k, &v) in f[sym as usize].iter().enumerate() {
                    fsum[k] += v;
                }
            }
            log_mag += fsum.iter().zip(w).map(|(&a, &b)| a as f64 * b).sum::<f64>();
            angle = 2.0
                * std::f64::consts::PI
                * fsum.iter().zip(t).map(|(&a, &b)| a as f64 * b).sum::<f64>();
        }
        acc += Complex64::from_polar(log_mag.exp(), angle);
    }
    Ok(acc)
}

/// Shared fixture: evaluation data for the word (used by tests elsewhere).
pub fn birkhoff_of(s: &ShiftSystem, p: &Potential, w: &Word) -> Result<f64> {
    s.birkhoff_periodic(p, w)
}
