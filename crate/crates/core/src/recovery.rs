//! Syndrome-based recovery for codes that pass the degenerate conditions.
//!
//! With unit-norm words `Ĉ_i` the matrix `D̂_pq = ⟨e_p Ĉ_i|e_q Ĉ_i⟩` is
//! Hermitian. For each eigenpair `D̂ v_q = λ_q v_q` the combined error
//! `f_q = Σ_p v_q[p] e_p` satisfies `⟨f_q Ĉ_i|f_r Ĉ_j⟩ = δ_ij δ_qr λ_q`, so
//! the vectors `w_{q,i} = f_q Ĉ_i / √λ_q` are orthonormal. Measuring which
//! pair `{w_{q,0}, w_{q,1}, ...}` the state lies in and mapping `w_{q,i} ↦ Ĉ_i`
//! undoes every error in the span of the set.
//!
//! Everything here is floating point.

use nalgebra::{DMatrix as NaMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use serde::Serialize;
use thiserror::Error as ThisError;

use crate::codes::{Code, FloatCode};
use crate::error::{Error, Result};
use crate::errors::{ErrorOp, ErrorSet};
use crate::klcheck::{check_kl, gram_blocks, Condition, KlReport};
use crate::qstate::FloatState;

pub const DEFAULT_THRESHOLD: f64 = 1e-8;

/// Eigenvalues closer than this (relative to the largest) share a cluster.
const CLUSTER_TOLERANCE: f64 = 1e-7;

/// Branches with less probability than this are folded into the residual.
const BRANCH_CUTOFF: f64 = 1e-14;

#[derive(Debug, ThisError)]
pub enum RecoveryError {
    #[error("the code fails the degenerate error-correction conditions ({} violating entries)", .0.witnesses.len())]
    Refused(Box<KlReport>),
    #[error(transparent)]
    Core(#[from] Error),
}

/// One retained eigenpair of `D̂` and its syndrome subspace.
#[derive(Clone, Debug)]
pub struct Syndrome {
    pub eigenvalue: f64,
    /// Index of the `D` block the eigenvector lives in.
    pub block: usize,
    /// `v_q`, indexed by error.
    pub coefficients: Vec<Complex64>,
    /// Orthonormal `w_{q,i}`, one per word.
    pub basis: Vec<FloatState>,
}

#[derive(Clone, Debug)]
pub struct RecoveryPlan {
    code: FloatCode,
    errors: ErrorSet,
    threshold: f64,
    eigenvalues: Vec<f64>,
    transform: NaMatrix<Complex64>,
    syndromes: Vec<Syndrome>,
    d_rank: usize,
}

impl RecoveryPlan {
    /// Unit-normalized words.
    pub fn code(&self) -> &FloatCode {
        &self.code
    }

    pub fn errors(&self) -> &ErrorSet {
        &self.errors
    }

    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    /// Every eigenvalue of `D̂`, in the row order of [`Self::transform`].
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// Rows are the eigenvectors `v_q`; `f_q = Σ_p U_qp e_p`.
    pub fn transform(&self) -> &NaMatrix<Complex64> {
        &self.transform
    }

    pub fn syndromes(&self) -> &[Syndrome] {
        &self.syndromes
    }

    /// Exact rank of `D` reported by the checker.
    pub fn d_rank(&self) -> usize {
        self.d_rank
    }

    /// Largest `|⟨u|v⟩|` over distinct syndrome basis vectors.
    pub fn max_cross_overlap(&self) -> Result<f64> {
        let all: Vec<&FloatState> = self.syndromes.iter().flat_map(|s| s.basis.iter()).collect();
        let mut worst = 0.0f64;
        for (a, u) in all.iter().enumerate() {
            for v in &all[a + 1..] {
                worst = worst.max(u.inner(v)?.norm());
            }
        }
        Ok(worst)
    }

    /// Largest deviation of `⟨w_{q,i}|w_{q,j}⟩` from `δ_ij`: the correction
    /// map `w_{q,i} ↦ Ĉ_i` is an isometry exactly when this vanishes.
    pub fn max_isometry_defect(&self) -> Result<f64> {
        let mut worst = 0.0f64;
        for s in &self.syndromes {
            for (i, u) in s.basis.iter().enumerate() {
                for (j, v) in s.basis.iter().enumerate() {
                    let target = if i == j { 1.0 } else { 0.0 };
                    worst = worst.max((u.inner(v)? - target).norm());
                }
            }
        }
        Ok(worst)
    }

    pub fn summary(&self) -> PlanSummary {
        let labels = self.errors.labels();
        PlanSummary {
            code: self.code.name.clone(),
            errors: self.errors.len(),
            threshold: self.threshold,
            d_rank: self.d_rank,
            syndromes: self
                .syndromes
                .iter()
                .enumerate()
                .map(|(q, s)| SyndromeSummary {
                    index: q,
                    eigenvalue: s.eigenvalue,
                    block: s.block,
                    composition: s
                        .coefficients
                        .iter()
                        .enumerate()
                        .filter(|(_, c)| c.norm() > 1e-12)
                        .map(|(p, c)| (labels[p].clone(), [c.re, c.im]))
                        .collect(),
                })
                .collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SyndromeSummary {
    pub index: usize,
    pub eigenvalue: f64,
    pub block: usize,
    /// Nonzero `(error, [re, im])` terms of `f_q`.
    pub composition: Vec<(String, [f64; 2])>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PlanSummary {
    pub code: String,
    pub errors: usize,
    pub threshold: f64,
    pub d_rank: usize,
    pub syndromes: Vec<SyndromeSummary>,
}

impl PlanSummary {
    pub fn to_text(&self) -> String {
        let mut out = format!(
            "recovery plan for {}: {} errors, rank(D) = {}, {} syndromes, threshold {:e} x max eigenvalue\n",
            self.code,
            self.errors,
            self.d_rank,
            self.syndromes.len(),
            self.threshold
        );
        for s in &self.syndromes {
            let terms: Vec<String> =
                s.composition.iter().map(|(l, [re, im])| format!("({re:+.6}{im:+.6}i) {l}")).collect();
            out.push_str(&format!(
                "  f_{} block {} lambda {:.9}: {}\n",
                s.index,
                s.block,
                s.eigenvalue,
                terms.join(" ")
            ));
        }
        out
    }
}

pub fn build_recovery(code: &Code, errors: &ErrorSet) -> std::result::Result<RecoveryPlan, RecoveryError> {
    build_recovery_with_threshold(code, errors, DEFAULT_THRESHOLD)
}

/// Eigenvalues at or below `threshold · max λ` are discarded.
pub fn build_recovery_with_threshold(
    code: &Code,
    errors: &ErrorSet,
    threshold: f64,
) -> std::result::Result<RecoveryPlan, RecoveryError> {
    if !(threshold > 0.0 && threshold < 1.0) {
        return Err(Error::InvalidArgument(format!("threshold {threshold} must lie in (0, 1)")).into());
    }
    let gram = gram_blocks(code, errors)?;
    let report = check_kl(&gram, Condition::Degenerate);
    if !report.passed {
        return Err(RecoveryError::Refused(Box::new(report)));
    }
    let d = report.d_matrix.expect("a passing report carries D");
    let norm = d.entry(0, 0).to_complex().re;
    let d_hat = d.to_float().map(|z| z / norm);
    let normalized = code.to_float().normalized()?;
    let n = errors.len();

    let images: Vec<Vec<FloatState>> = normalized
        .states()
        .map(|w| errors.ops().iter().map(|e| e.apply(w)).collect::<Result<Vec<_>>>())
        .collect::<Result<_>>()?;

    let mut pairs: Vec<(f64, usize, DVector<Complex64>)> = Vec::with_capacity(n);
    for (b, block) in d.blocks().iter().enumerate() {
        for (value, local) in block_eigenpairs(&d_hat, block) {
            let mut full = DVector::zeros(n);
            for (slot, &p) in block.iter().enumerate() {
                full[p] = local[slot];
            }
            pairs.push((value, b, full));
        }
    }
    let max_lambda = pairs.iter().map(|p| p.0).fold(0.0f64, f64::max);
    let transform = NaMatrix::from_fn(n, n, |q, p| pairs[q].2[p]);
    let eigenvalues: Vec<f64> = pairs.iter().map(|p| p.0).collect();

    let mut syndromes = Vec::new();
    for (value, block, v) in &pairs {
        if *value <= threshold * max_lambda {
            continue;
        }
        let scale = Complex64::new(1.0 / value.sqrt(), 0.0);
        let mut basis = Vec::with_capacity(images.len());
        for word_images in &images {
            let mut w = FloatState::zero(code.n())?;
            for (p, image) in word_images.iter().enumerate() {
                if v[p].norm() > 0.0 {
                    w = w.add_scaled(v[p] * scale, image)?;
                }
            }
            basis.push(w);
        }
        syndromes.push(Syndrome {
            eigenvalue: *value,
            block: *block,
            coefficients: v.iter().cloned().collect(),
            basis,
        });
    }

    Ok(RecoveryPlan {
        code: normalized,
        errors: errors.clone(),
        threshold,
        eigenvalues,
        transform,
        syndromes,
        d_rank: d.rank(),
    })
}

/// Eigenpairs of the principal submatrix on `block`, eigenvalues descending.
/// Each cluster of equal eigenvalues gets the basis obtained by projecting
/// `e_1, e_2, ...` onto the eigenspace and orthonormalizing in that order.
fn block_eigenpairs(d_hat: &NaMatrix<Complex64>, block: &[usize]) -> Vec<(f64, DVector<Complex64>)> {
    let k = block.len();
    let sub = NaMatrix::from_fn(k, k, |a, b| d_hat[(block[a], block[b])]);
    let eig = SymmetricEigen::new(sub);
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let scale = eig.eigenvalues.iter().map(|v| v.abs()).fold(1.0f64, f64::max);

    let mut out = Vec::with_capacity(k);
    let mut start = 0;
    while start < k {
        let mut end = start + 1;
        while end < k
            && (eig.eigenvalues[order[start]] - eig.eigenvalues[order[end]]).abs() <= CLUSTER_TOLERANCE * scale
        {
            end += 1;
        }
        let members = &order[start..end];
        let value = members.iter().map(|&m| eig.eigenvalues[m]).sum::<f64>() / members.len() as f64;
        let vectors: Vec<DVector<Complex64>> =
            members.iter().map(|&m| eig.eigenvectors.column(m).into_owned()).collect();
        let mut chosen: Vec<DVector<Complex64>> = Vec::with_capacity(members.len());
        for axis in 0..k {
            if chosen.len() == members.len() {
                break;
            }
            let mut candidate = DVector::<Complex64>::zeros(k);
            for v in &vectors {
                candidate += v * v[axis].conj();
            }
            for c in &chosen {
                let overlap = c.dotc(&candidate);
                candidate -= c * overlap;
            }
            let norm = candidate.norm();
            if norm > 1e-6 {
                chosen.push(candidate / Complex64::new(norm, 0.0));
            }
        }
        debug_assert_eq!(chosen.len(), members.len());
        out.extend(chosen.into_iter().map(|v| (value, v)));
        start = end;
    }
    out
}

#[derive(Clone, Debug)]
pub struct Branch {
    /// Index into [`RecoveryPlan::syndromes`].
    pub syndrome: usize,
    pub probability: f64,
    pub state: FloatState,
}

#[derive(Clone, Debug)]
pub struct RecoveryOutcome {
    pub branches: Vec<Branch>,
    /// Squared norm of the part of the input outside every syndrome subspace.
    pub residual: f64,
}

impl RecoveryOutcome {
    pub fn total_probability(&self) -> f64 {
        self.branches.iter().map(|b| b.probability).sum::<f64>() + self.residual
    }
}

/// Projects onto every syndrome subspace and corrects each branch.
pub fn recover(plan: &RecoveryPlan, state: &FloatState) -> Result<RecoveryOutcome> {
    let norm = state.norm();
    if (norm - 1.0).abs() > 1e-6 {
        return Err(Error::InvalidArgument(format!("recovery input must have unit norm, got {norm}")));
    }
    let mut leftover = state.clone();
    let mut branches = Vec::new();
    for (q, s) in plan.syndromes.iter().enumerate() {
        let amplitudes: Vec<Complex64> = s.basis.iter().map(|w| w.inner(state)).collect::<Result<_>>()?;
        for (w, &c) in s.basis.iter().zip(&amplitudes) {
            leftover = leftover.add_scaled(-c, w)?;
        }
        let probability: f64 = amplitudes.iter().map(|c| c.norm_sqr()).sum();
        if probability <= BRANCH_CUTOFF {
            continue;
        }
        let mut corrected = FloatState::zero(state.n())?;
        for ((_, word), &c) in plan.code.words.iter().zip(&amplitudes) {
            corrected = corrected.add_scaled(c / probability.sqrt(), word)?;
        }
        branches.push(Branch { syndrome: q, probability, state: corrected });
    }
    Ok(RecoveryOutcome { branches, residual: leftover.norm().powi(2) })
}

/// `Σ_branches p · |⟨ψ|post⟩|²` for `ψ = α Ĉ_0 + β Ĉ_1` hit by `error`.
pub fn roundtrip_fidelity(plan: &RecoveryPlan, error: &ErrorOp, alpha: Complex64, beta: Complex64) -> Result<f64> {
    let size = (alpha.norm_sqr() + beta.norm_sqr()).sqrt();
    if (size - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidArgument(format!("(alpha, beta) must be normalized, norm is {size}")));
    }
    let psi = crate::codes::logical_state_float(&plan.code, alpha, beta)?;
    let damaged = error.apply(&psi)?.normalized()?;
    let outcome = recover(plan, &damaged)?;
    let mut fidelity = 0.0;
    for branch in &outcome.branches {
        fidelity += branch.probability * psi.inner(&branch.state)?.norm_sqr();
    }
    Ok(fidelity)
}

/// Twelve normalized `(α, β)`: the basis states, the four equal-weight
/// phases, and six generic points.
pub fn logical_grid() -> Vec<(Complex64, Complex64)> {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let c = |re: f64, im: f64| Complex64::new(re, im);
    let mut grid = vec![
        (c(1.0, 0.0), c(0.0, 0.0)),
        (c(0.0, 0.0), c(1.0, 0.0)),
        (c(h, 0.0), c(h, 0.0)),
        (c(h, 0.0), c(-h, 0.0)),
        (c(h, 0.0), c(0.0, h)),
        (c(h, 0.0), c(0.0, -h)),
    ];
    for (theta, phi) in [(0.3, 0.0), (0.7, 1.1), (1.2, 2.5), (0.45, -0.9), (1.0, std::f64::consts::PI), (0.15, 0.4)] {
        grid.push((c(f64::cos(theta), 0.0), Complex64::from_polar(f64::sin(theta), phi)));
    }
    grid
}
