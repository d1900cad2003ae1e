//! Joint learning of binary codes, modality projections and a linear classifier.
//!
//! Minimizes
//!
//! ```text
//! ||Y - W^T B||^2 + alpha ||B - P_img Psi||^2 + beta ||B - P_txt Phi||^2 + lambda ||W||^2
//! ```
//!
//! over `B in {-1,+1}^{L x n}` by alternating exact updates: least squares for
//! the two projections, ridge regression for `W`, and discrete cyclic
//! coordinate descent (DCC) for the rows of `B`. Every step is an exact or
//! non-increasing minimization of its block, so the objective never rises.

use std::cmp::Ordering;

use nalgebra::{Cholesky, DMatrix, DVector, Dyn, SymmetricEigen};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, MfdhError, Result};

/// Ridge used when the caller of [`update_p`] hits a singular Gram matrix.
pub const RIDGE_FALLBACK: f64 = 1e-8;

/// Reciprocal-condition floor below which a Gram matrix counts as singular.
const RCOND_FLOOR: f64 = 1e-13;

/// Relative eigenvalue cutoff of the pseudo-inverse used for rank-deficient
/// kernel matrices.
const PINV_CUTOFF: f64 = 1e-12;

/// Class membership of `n` samples over `c` classes, as a `c x n` 0/1 matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct LabelMatrix {
    y: DMatrix<f64>,
}

impl LabelMatrix {
    pub fn from_dense(y: DMatrix<f64>) -> Result<Self> {
        if y.nrows() == 0 {
            return Err(MfdhError::invalid("label matrix needs at least one class"));
        }
        if y.iter().any(|&v| v != 0.0 && v != 1.0) {
            return Err(MfdhError::invalid("label entries must be 0 or 1"));
        }
        for (i, col) in y.column_iter().enumerate() {
            if col.iter().all(|&v| v == 0.0) {
                return Err(MfdhError::invalid(format!("sample {i} carries no label")));
            }
        }
        Ok(Self { y })
    }

    /// Multi-hot columns from per-sample label lists (0-based class ids).
    pub fn from_label_sets(num_classes: usize, labels: &[Vec<usize>]) -> Result<Self> {
        let mut y = DMatrix::zeros(num_classes, labels.len());
        for (i, set) in labels.iter().enumerate() {
            for &j in set {
                if j >= num_classes {
                    return Err(MfdhError::invalid(format!(
                        "sample {i} has label {j} but only {num_classes} classes exist"
                    )));
                }
                y[(j, i)] = 1.0;
            }
        }
        Self::from_dense(y)
    }

    /// One-hot columns from a class id per sample.
    pub fn from_classes(num_classes: usize, classes: &[usize]) -> Result<Self> {
        let sets: Vec<Vec<usize>> = classes.iter().map(|&c| vec![c]).collect();
        Self::from_label_sets(num_classes, &sets)
    }

    pub fn num_classes(&self) -> usize {
        self.y.nrows()
    }

    pub fn len(&self) -> usize {
        self.y.ncols()
    }

    pub fn is_empty(&self) -> bool {
        self.y.ncols() == 0
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.y
    }

    pub fn labels_of(&self, i: usize) -> Vec<usize> {
        self.y
            .column(i)
            .iter()
            .enumerate()
            .filter(|(_, &v)| v != 0.0)
            .map(|(j, _)| j)
            .collect()
    }

    pub fn is_one_hot(&self) -> bool {
        self.y
            .column_iter()
            .all(|c| c.iter().filter(|&&v| v != 0.0).count() == 1)
    }

    pub fn select_columns(&self, idx: &[usize]) -> Self {
        Self {
            y: self.y.select_columns(idx),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    /// Code length `L` in bits.
    pub code_len: usize,
    pub alpha: f64,
    pub beta: f64,
    pub lambda: f64,
    pub max_outer_iters: usize,
    /// Upper bound on full row sweeps per `B` update; a sweep that changes
    /// nothing ends the update early.
    pub dcc_sweeps: usize,
    pub tol_rel: f64,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            code_len: 16,
            alpha: 0.1,
            beta: 0.1,
            lambda: 0.01,
            max_outer_iters: 50,
            dcc_sweeps: 3,
            tol_rel: 1e-5,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(MfdhError::invalid(format!("{name} must be finite and > 0, got {v}")))
            }
        };
        if self.code_len == 0 {
            return Err(MfdhError::invalid("code length must be >= 1"));
        }
        if self.dcc_sweeps == 0 {
            return Err(MfdhError::invalid("dcc_sweeps must be >= 1"));
        }
        positive("alpha", self.alpha)?;
        positive("beta", self.beta)?;
        positive("lambda", self.lambda)?;
        positive("tol_rel", self.tol_rel)
    }
}

/// Learned variables. `b` holds exactly +-1 entries.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainState {
    pub b: DMatrix<f64>,
    pub p_img: DMatrix<f64>,
    pub p_txt: DMatrix<f64>,
    pub w: DMatrix<f64>,
    /// Objective after initialization, then after every outer iteration.
    pub objective_trace: Vec<f64>,
}

impl TrainState {
    pub fn code_len(&self) -> usize {
        self.b.nrows()
    }

    pub fn num_samples(&self) -> usize {
        self.b.ncols()
    }

    pub fn feature_len(&self) -> usize {
        self.p_img.ncols()
    }

    pub fn num_classes(&self) -> usize {
        self.w.ncols()
    }

    /// Outer iterations actually run.
    pub fn iterations(&self) -> usize {
        self.objective_trace.len().saturating_sub(1)
    }

    pub fn validate(&self) -> Result<()> {
        let (l, n) = self.b.shape();
        check_dim("P_img rows", l, self.p_img.nrows())?;
        check_dim("P_txt rows", l, self.p_txt.nrows())?;
        check_dim("P_txt cols", self.p_img.ncols(), self.p_txt.ncols())?;
        check_dim("W rows", l, self.w.nrows())?;
        if n > 0 && self.b.iter().any(|&v| v != 1.0 && v != -1.0) {
            return Err(MfdhError::invalid("code matrix entries must be +-1"));
        }
        Ok(())
    }
}

/// Training data: labels and the image/text kernel feature matrices.
#[derive(Debug, Clone, Copy)]
pub struct Problem<'a> {
    pub y: &'a DMatrix<f64>,
    pub psi: &'a DMatrix<f64>,
    pub phi: &'a DMatrix<f64>,
}

impl<'a> Problem<'a> {
    pub fn new(y: &'a DMatrix<f64>, psi: &'a DMatrix<f64>, phi: &'a DMatrix<f64>) -> Result<Self> {
        let n = y.ncols();
        check_dim("Psi columns", n, psi.ncols())?;
        check_dim("Phi columns", n, phi.ncols())?;
        check_dim("Phi rows", psi.nrows(), phi.nrows())?;
        if [y, psi, phi].iter().any(|m| m.iter().any(|v| !v.is_finite())) {
            return Err(MfdhError::invalid("training matrices must be finite"));
        }
        Ok(Self { y, psi, phi })
    }

    fn check_state(&self, s: &TrainState) -> Result<()> {
        s.validate()?;
        check_dim("B columns", self.y.ncols(), s.b.ncols())?;
        check_dim("P columns", self.psi.nrows(), s.p_img.ncols())?;
        check_dim("W columns", self.y.nrows(), s.w.ncols())
    }
}

/// The full objective evaluated at `state`.
pub fn objective(state: &TrainState, prob: &Problem<'_>, cfg: &TrainConfig) -> Result<f64> {
    prob.check_state(state)?;
    let proj_img = &state.p_img * prob.psi;
    let proj_txt = &state.p_txt * prob.phi;
    Ok(objective_with(state, prob, cfg, &proj_img, &proj_txt))
}

fn objective_with(
    state: &TrainState,
    prob: &Problem<'_>,
    cfg: &TrainConfig,
    proj_img: &DMatrix<f64>,
    proj_txt: &DMatrix<f64>,
) -> f64 {
    let cls = (prob.y - state.w.transpose() * &state.b).norm_squared();
    let img = (&state.b - proj_img).norm_squared();
    let txt = (&state.b - proj_txt).norm_squared();
    cls + cfg.alpha * img + cfg.beta * txt + cfg.lambda * state.w.norm_squared()
}

/// Cholesky factor of an SPD matrix, rejecting numerically singular ones.
fn factor_spd(g: DMatrix<f64>, what: &str) -> Result<Cholesky<f64, Dyn>> {
    let chol = Cholesky::new(g)
        .ok_or_else(|| MfdhError::SingularSystem(format!("{what} is not positive definite")))?;
    let diag = chol.l_dirty().diagonal();
    let (lo, hi) = (diag.min(), diag.max());
    if !(lo > 0.0) || (lo / hi).powi(2) < RCOND_FLOOR {
        return Err(MfdhError::SingularSystem(format!(
            "{what} is numerically singular (pivot ratio {:e})",
            lo / hi
        )));
    }
    Ok(chol)
}

/// `P = B K^T (K K^T + ridge_eps I)^{-1}`.
pub fn update_p(b: &DMatrix<f64>, k: &DMatrix<f64>, ridge_eps: f64) -> Result<DMatrix<f64>> {
    check_dim("kernel matrix columns", b.ncols(), k.ncols())?;
    if !(ridge_eps >= 0.0 && ridge_eps.is_finite()) {
        return Err(MfdhError::invalid("ridge_eps must be finite and >= 0"));
    }
    let mut gram = k * k.transpose();
    for i in 0..gram.nrows() {
        gram[(i, i)] += ridge_eps;
    }
    let chol = factor_spd(gram, "K K^T")?;
    // (K K^T) P^T = K B^T
    let rhs = k * b.transpose();
    Ok(chol.solve(&rhs).transpose())
}

/// `W = (B B^T + lambda I)^{-1} B Y^T`.
pub fn update_w(b: &DMatrix<f64>, y: &DMatrix<f64>, lambda: f64) -> Result<DMatrix<f64>> {
    check_dim("label columns", b.ncols(), y.ncols())?;
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(MfdhError::invalid("lambda must be finite and > 0"));
    }
    let mut gram = b * b.transpose();
    for i in 0..gram.nrows() {
        gram[(i, i)] += lambda;
    }
    let chol = Cholesky::new(gram)
        .ok_or_else(|| MfdhError::SingularSystem("B B^T + lambda I".into()))?;
    Ok(chol.solve(&(b * y.transpose())))
}

/// Right-hand side of the code subproblem, `W Y + alpha P_img Psi + beta P_txt Phi`.
///
/// Expanding the objective in `B` with `||B||^2 = L n` fixed leaves
/// `||W^T B||^2 - 2 tr(B^T Q)` plus constants.
fn code_target(
    w: &DMatrix<f64>,
    y: &DMatrix<f64>,
    proj_img: &DMatrix<f64>,
    proj_txt: &DMatrix<f64>,
    cfg: &TrainConfig,
) -> DMatrix<f64> {
    let mut q = w * y;
    q += proj_img * cfg.alpha;
    q += proj_txt * cfg.beta;
    q
}

#[inline]
fn sgn(v: f64) -> f64 {
    if v >= 0.0 {
        1.0
    } else {
        -1.0
    }
}

/// Row-wise DCC on `b`; returns the number of sweeps run.
///
/// Row `l` becomes `sgn(q_l - B~^T W~ u)` where `u` is row `l` of `W` and the
/// tildes drop row `l`. Stops after `max_sweeps` or after a sweep that leaves
/// every entry unchanged, at which point each entry is optimal given the rest.
fn dcc_in_place(b: &mut DMatrix<f64>, q: &DMatrix<f64>, w: &DMatrix<f64>, max_sweeps: usize) -> usize {
    let (l_bits, n) = b.shape();
    let wwt = w * w.transpose();
    let mut sweeps = 0;
    for _ in 0..max_sweeps {
        sweeps += 1;
        let mut changed = false;
        for l in 0..l_bits {
            let mut g: DVector<f64> = wwt.column(l).into_owned();
            g[l] = 0.0;
            for i in 0..n {
                let col = b.column(i);
                let coupling = g.dot(&col);
                let z = sgn(q[(l, i)] - coupling);
                if b[(l, i)] != z {
                    b[(l, i)] = z;
                    changed = true;
                }
            }
        }
        if !changed {
            break;
        }
    }
    sweeps
}

/// One DCC update of `B` with the projections and classifier held fixed.
pub fn update_b_dcc(state: &TrainState, prob: &Problem<'_>, cfg: &TrainConfig) -> Result<DMatrix<f64>> {
    prob.check_state(state)?;
    let proj_img = &state.p_img * prob.psi;
    let proj_txt = &state.p_txt * prob.phi;
    let q = code_target(&state.w, prob.y, &proj_img, &proj_txt, cfg);
    let mut b = state.b.clone();
    dcc_in_place(&mut b, &q, &state.w, cfg.dcc_sweeps.max(1));
    Ok(b)
}

/// Precomputed least-squares operator `M` with `argmin_P ||B - P K||^2 = B M`.
///
/// Uses `K^T (K K^T)^{-1}` when the Gram matrix is well conditioned and the
/// eigen-truncated pseudo-inverse otherwise. The operator is fixed for a
/// training run, so every projection update minimizes over the same subspace
/// and never increases the objective.
struct LeastSquares {
    m: DMatrix<f64>,
}

impl LeastSquares {
    fn new(k: &DMatrix<f64>) -> Self {
        let gram = k * k.transpose();
        if let Ok(chol) = factor_spd(gram.clone(), "K K^T") {
            return Self {
                m: chol.solve(k).transpose(),
            };
        }
        let eig = SymmetricEigen::new(gram);
        let top = eig.eigenvalues.amax();
        let inv = eig
            .eigenvalues
            .map(|v| if v > top * PINV_CUTOFF { 1.0 / v } else { 0.0 });
        let u = &eig.eigenvectors;
        let pinv = u * DMatrix::from_diagonal(&inv) * u.transpose();
        Self {
            m: (pinv * k).transpose(),
        }
    }

    fn apply(&self, b: &DMatrix<f64>) -> DMatrix<f64> {
        b * &self.m
    }
}

/// Lexicographic order on bit-identical floats.
fn cmp_slices(a: &[f64], b: &[f64]) -> Ordering {
    for (x, y) in a.iter().zip(b) {
        match x.total_cmp(y) {
            Ordering::Equal => continue,
            o => return o,
        }
    }
    a.len().cmp(&b.len())
}

/// Canonical sample and class orders, so that training depends only on the
/// sets of samples and classes and not on how they were enumerated.
struct Canonical {
    samples: Vec<usize>,
    classes: Vec<usize>,
}

impl Canonical {
    fn new(prob: &Problem<'_>) -> Self {
        let n = prob.y.ncols();
        let mut samples: Vec<usize> = (0..n).collect();
        samples.sort_by(|&i, &j| {
            cmp_slices(prob.psi.column(i).as_slice(), prob.psi.column(j).as_slice())
                .then_with(|| cmp_slices(prob.phi.column(i).as_slice(), prob.phi.column(j).as_slice()))
        });
        let y = prob.y.select_columns(&samples);
        let rows: Vec<Vec<f64>> = y.row_iter().map(|r| r.iter().copied().collect()).collect();
        let mut classes: Vec<usize> = (0..y.nrows()).collect();
        classes.sort_by(|&a, &b| cmp_slices(&rows[a], &rows[b]));
        Self { samples, classes }
    }

    fn inverse(perm: &[usize]) -> Vec<usize> {
        let mut inv = vec![0; perm.len()];
        for (pos, &orig) in perm.iter().enumerate() {
            inv[orig] = pos;
        }
        inv
    }
}

/// Random +-1 codes, filled column by column.
pub fn random_codes(code_len: usize, n: usize, seed: u64) -> DMatrix<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    DMatrix::from_fn(code_len, n, |_, _| if rng.random::<bool>() { 1.0 } else { -1.0 })
}

/// Runs the alternating optimization to convergence.
///
/// `B` starts as random signs drawn from `cfg.seed`; the projections and the
/// classifier are then solved once so the first recorded objective already
/// has them at their optimum. Each outer iteration updates `P_img`, `P_txt`,
/// `W` and then `B`, and appends the objective. Iteration stops once the
/// relative objective change drops below `cfg.tol_rel`.
pub fn train(
    psi: &DMatrix<f64>,
    phi: &DMatrix<f64>,
    labels: &LabelMatrix,
    cfg: &TrainConfig,
) -> Result<TrainState> {
    cfg.validate()?;
    let prob = Problem::new(labels.matrix(), psi, phi)?;
    if prob.y.ncols() == 0 {
        return Err(MfdhError::invalid("training set is empty"));
    }

    let canon = Canonical::new(&prob);
    let y = prob
        .y
        .select_columns(&canon.samples)
        .select_rows(&canon.classes);
    let psi_c = psi.select_columns(&canon.samples);
    let phi_c = phi.select_columns(&canon.samples);
    let cprob = Problem {
        y: &y,
        psi: &psi_c,
        phi: &phi_c,
    };

    let state = train_canonical(&cprob, cfg)?;

    let sample_pos = Canonical::inverse(&canon.samples);
    let class_pos = Canonical::inverse(&canon.classes);
    Ok(TrainState {
        b: state.b.select_columns(&sample_pos),
        w: state.w.select_columns(&class_pos),
        ..state
    })
}

fn train_canonical(prob: &Problem<'_>, cfg: &TrainConfig) -> Result<TrainState> {
    let n = prob.y.ncols();
    let ls_img = LeastSquares::new(prob.psi);
    let ls_txt = LeastSquares::new(prob.phi);

    let b = random_codes(cfg.code_len, n, cfg.seed);
    let p_img = ls_img.apply(&b);
    let p_txt = ls_txt.apply(&b);
    let w = update_w(&b, prob.y, cfg.lambda)?;
    let mut state = TrainState {
        b,
        p_img,
        p_txt,
        w,
        objective_trace: Vec::new(),
    };
    let mut proj_img = &state.p_img * prob.psi;
    let mut proj_txt = &state.p_txt * prob.phi;
    state
        .objective_trace
        .push(objective_with(&state, prob, cfg, &proj_img, &proj_txt));

    for iter in 0..cfg.max_outer_iters {
        if iter > 0 {
            state.p_img = ls_img.apply(&state.b);
            state.p_txt = ls_txt.apply(&state.b);
            state.w = update_w(&state.b, prob.y, cfg.lambda)?;
            proj_img = &state.p_img * prob.psi;
            proj_txt = &state.p_txt * prob.phi;
        }
        let q = code_target(&state.w, prob.y, &proj_img, &proj_txt, cfg);
        dcc_in_place(&mut state.b, &q, &state.w, cfg.dcc_sweeps);

        let prev = *state.objective_trace.last().expect("initial objective");
        let cur = objective_with(&state, prob, cfg, &proj_img, &proj_txt);
        if !cur.is_finite() {
            return Err(MfdhError::SingularSystem("objective became non-finite".into()));
        }
        state.objective_trace.push(cur);
        if (prev - cur).abs() <= cfg.tol_rel * prev.abs().max(f64::MIN_POSITIVE) {
            break;
        }
    }
    Ok(state)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand_distr::{Distribution, StandardNormal};

    fn gaussian(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
        DMatrix::from_fn(rows, cols, |_, _| StandardNormal.sample(rng))
    }

    #[test]
    fn label_matrix_validation() {
        assert!(LabelMatrix::from_classes(3, &[0, 2, 1]).unwrap().is_one_hot());
        let multi = LabelMatrix::from_label_sets(4, &[vec![0, 3], vec![1]]).unwrap();
        assert!(!multi.is_one_hot());
        assert_eq!(multi.labels_of(0), vec![0, 3]);
        assert!(LabelMatrix::from_label_sets(2, &[vec![]]).is_err());
        assert!(LabelMatrix::from_classes(2, &[2]).is_err());
        assert!(LabelMatrix::from_dense(DMatrix::from_element(1, 1, 0.5)).is_err());
    }

    #[test]
    fn config_validation() {
        assert!(TrainConfig::default().validate().is_ok());
        for bad in [
            TrainConfig { code_len: 0, ..Default::default() },
            TrainConfig { alpha: 0.0, ..Default::default() },
            TrainConfig { lambda: -1.0, ..Default::default() },
            TrainConfig { tol_rel: 0.0, ..Default::default() },
            TrainConfig { dcc_sweeps: 0, ..Default::default() },
        ] {
            assert!(bad.validate().is_err());
        }
    }

    #[test]
    fn objective_only_code_norms_survive() {
        let (l, n, d, c) = (3, 4, 2, 2);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let state = TrainState {
            b: random_codes(l, n, 3),
            p_img: DMatrix::zeros(l, d),
            p_txt: DMatrix::zeros(l, d),
            w: DMatrix::zeros(l, c),
            objective_trace: vec![],
        };
        let y = DMatrix::zeros(c, n);
        let psi = gaussian(d, n, &mut rng);
        let phi = gaussian(d, n, &mut rng);
        let cfg = TrainConfig { alpha: 0.3, beta: 0.7, lambda: 5.0, ..Default::default() };
        let f = objective(&state, &Problem::new(&y, &psi, &phi).unwrap(), &cfg).unwrap();
        assert!((f - (0.3 + 0.7) * (l * n) as f64).abs() < 1e-12);
    }

    #[test]
    fn objective_zero_at_exact_fit() {
        let b = DMatrix::from_row_slice(2, 2, &[1.0, -1.0, 1.0, 1.0]);
        let psi = DMatrix::identity(2, 2);
        let w = DMatrix::from_row_slice(2, 1, &[0.5, -2.0]);
        let y = w.transpose() * &b;
        let state = TrainState {
            b: b.clone(),
            p_img: b.clone(),
            p_txt: b.clone(),
            w,
            objective_trace: vec![],
        };
        let cfg = TrainConfig { lambda: 1e-300, ..Default::default() };
        let f = objective(&state, &Problem { y: &y, psi: &psi, phi: &psi }, &cfg).unwrap();
        assert!(f.abs() < 1e-12);
    }

    #[test]
    fn update_p_identity_gram() {
        let b = random_codes(3, 4, 9);
        let p = update_p(&b, &DMatrix::identity(4, 4), 0.0).unwrap();
        assert!((p - &b).amax() < 1e-15);
    }

    #[test]
    fn update_p_consistent_system() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let k = gaussian(3, 7, &mut rng);
        let p0 = gaussian(2, 3, &mut rng);
        let b = &p0 * &k;
        let p = update_p(&b, &k, 0.0).unwrap();
        assert!((&p * &k - b).amax() < 1e-10);
    }

    #[test]
    fn update_p_singular() {
        let k = DMatrix::from_row_slice(2, 3, &[1.0, 2.0, 3.0, 2.0, 4.0, 6.0]);
        let b = random_codes(1, 3, 0);
        assert!(matches!(update_p(&b, &k, 0.0), Err(MfdhError::SingularSystem(_))));
        assert!(update_p(&b, &k, RIDGE_FALLBACK).is_ok());
    }

    #[test]
    fn update_w_examples() {
        let w = update_w(&DMatrix::from_row_slice(1, 2, &[1.0, 1.0]), &DMatrix::from_row_slice(1, 2, &[1.0, 1.0]), 1.0)
            .unwrap();
        assert!((w[(0, 0)] - 2.0 / 3.0).abs() < 1e-15);

        let b = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, -1.0]);
        let w = update_w(&b, &DMatrix::zeros(3, 2), 0.01).unwrap();
        assert_eq!(w, DMatrix::zeros(2, 3));
        assert!(update_w(&b, &DMatrix::zeros(3, 2), 0.0).is_err());
    }

    #[test]
    fn dcc_with_zero_classifier_is_sign_of_target() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let (l, n, d, c) = (4, 9, 5, 3);
        let psi = gaussian(d, n, &mut rng);
        let phi = gaussian(d, n, &mut rng);
        let y = LabelMatrix::from_classes(c, &(0..n).map(|i| i % c).collect::<Vec<_>>()).unwrap();
        let state = TrainState {
            b: random_codes(l, n, 1),
            p_img: gaussian(l, d, &mut rng),
            p_txt: gaussian(l, d, &mut rng),
            w: DMatrix::zeros(l, c),
            objective_trace: vec![],
        };
        let cfg = TrainConfig { alpha: 0.4, beta: 0.9, ..Default::default() };
        let b = update_b_dcc(&state, &Problem::new(y.matrix(), &psi, &phi).unwrap(), &cfg).unwrap();
        let target = &state.p_img * &psi * 0.4 + &state.p_txt * &phi * 0.9;
        assert_eq!(b, target.map(sgn));
    }

    #[test]
    fn dcc_single_bit_is_sign_of_target() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let (n, d, c) = (6, 3, 2);
        let psi = gaussian(d, n, &mut rng);
        let phi = gaussian(d, n, &mut rng);
        let y = LabelMatrix::from_classes(c, &[0, 1, 0, 1, 1, 0]).unwrap();
        let state = TrainState {
            b: random_codes(1, n, 4),
            p_img: gaussian(1, d, &mut rng),
            p_txt: gaussian(1, d, &mut rng),
            w: gaussian(1, c, &mut rng),
            objective_trace: vec![],
        };
        let cfg = TrainConfig::default();
        let b = update_b_dcc(&state, &Problem::new(y.matrix(), &psi, &phi).unwrap(), &cfg).unwrap();
        let q = &state.w * y.matrix() + &state.p_img * &psi * cfg.alpha + &state.p_txt * &phi * cfg.beta;
        assert_eq!(b, q.map(sgn));
    }

    #[test]
    fn zero_iterations_returns_initialization() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let (n, d) = (12, 4);
        let psi = gaussian(d, n, &mut rng);
        let phi = gaussian(d, n, &mut rng);
        let y = LabelMatrix::from_classes(2, &(0..n).map(|i| i % 2).collect::<Vec<_>>()).unwrap();
        let cfg = TrainConfig { code_len: 4, max_outer_iters: 0, ..Default::default() };
        let s = train(&psi, &phi, &y, &cfg).unwrap();
        assert_eq!(s.objective_trace.len(), 1);
        assert_eq!(s.iterations(), 0);
        let recomputed = objective(&s, &Problem::new(y.matrix(), &psi, &phi).unwrap(), &cfg).unwrap();
        assert!((recomputed - s.objective_trace[0]).abs() <= 1e-12 * recomputed);
    }

    #[test]
    fn rank_deficient_kernels_still_train_monotonically() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let n = 10;
        // 12 feature rows of rank 4
        let psi = gaussian(12, 4, &mut rng) * gaussian(4, n, &mut rng);
        let phi = gaussian(12, 5, &mut rng) * gaussian(5, n, &mut rng);
        let y = LabelMatrix::from_classes(2, &(0..n).map(|i| i % 2).collect::<Vec<_>>()).unwrap();
        let s = train(&psi, &phi, &y, &TrainConfig { code_len: 6, ..Default::default() }).unwrap();
        for w in s.objective_trace.windows(2) {
            assert!(w[1] <= w[0] + 1e-9 * w[0].abs(), "{:?}", s.objective_trace);
        }
    }

    #[test]
    fn train_rejects_mismatched_inputs() {
        let y = LabelMatrix::from_classes(2, &[0, 1, 0]).unwrap();
        let psi = DMatrix::zeros(2, 3);
        let phi = DMatrix::zeros(2, 4);
        assert!(train(&psi, &phi, &y, &TrainConfig::default()).is_err());
    }
}
