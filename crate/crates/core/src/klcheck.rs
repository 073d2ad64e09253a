//! Error Gram blocks and the error-correction conditions.
//!
//! For words `C_i` and errors `e_p` the Gram tensor holds every
//! `⟨e_p C_i | e_q C_j⟩` exactly. Three conditions are checked against it:
//!
//! - strict: `δ_ij δ_pq · s`, where `s` is the norm² of the first word (the
//!   words are kept unnormalized, so one global scale is allowed);
//! - degenerate: `δ_ij d_pq` with `d` independent of the word;
//! - extended: the degenerate form over words labelled `(i, m)`, which must
//!   also be orthogonal across multiplicity indices.
//!
//! Failures come back as a [`KlReport`] listing every violating entry.

use std::collections::BTreeSet;

use nalgebra::DMatrix as NaMatrix;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use rayon::prelude::*;
use serde::{Serialize, Serializer};

use crate::codes::{Code, FloatCode};
use crate::error::{Error, Result};
use crate::errors::ErrorSet;
use crate::field::{ExactScalar, Rational, ScalarRepr};
use crate::linalg::{exact_rank, SparseSpan};
use crate::qstate::{FloatState, StateVector};

/// Entries `⟨e_p C_i | e_q C_j⟩` for all words `i, j` and errors `p, q`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GramTensor {
    word_labels: Vec<String>,
    error_labels: Vec<String>,
    radicand: u64,
    entries: Vec<ExactScalar>,
}

impl GramTensor {
    pub fn word_labels(&self) -> &[String] {
        &self.word_labels
    }

    pub fn error_labels(&self) -> &[String] {
        &self.error_labels
    }

    pub fn radicand(&self) -> u64 {
        self.radicand
    }

    pub fn word_count(&self) -> usize {
        self.word_labels.len()
    }

    pub fn error_count(&self) -> usize {
        self.error_labels.len()
    }

    fn offset(&self, i: usize, j: usize, p: usize, q: usize) -> usize {
        let (w, n) = (self.word_count(), self.error_count());
        ((i * w + j) * n + p) * n + q
    }

    pub fn entry(&self, i: usize, j: usize, p: usize, q: usize) -> &ExactScalar {
        &self.entries[self.offset(i, j, p, q)]
    }

    /// The `(W·N) × (W·N)` Gram matrix of all images `e_p C_i`, rows ordered
    /// by `(i, p)`.
    pub fn image_matrix(&self) -> Vec<Vec<ExactScalar>> {
        let (w, n) = (self.word_count(), self.error_count());
        (0..w * n).map(|a| (0..w * n).map(|b| self.entry(a / n, b / n, a % n, b % n).clone()).collect()).collect()
    }
}

fn images<S, F>(states: &[S], errors: &ErrorSet, apply: F) -> Result<Vec<S>>
where
    S: Sync + Send,
    F: Fn(&crate::errors::ErrorOp, &S) -> Result<S> + Sync,
{
    let n = errors.len();
    (0..states.len() * n).into_par_iter().map(|a| apply(&errors.ops()[a % n], &states[a / n])).collect()
}

/// Computes every Gram entry exactly. Entries with `(i, p) > (j, q)` are
/// filled by conjugate symmetry.
pub fn gram_blocks(code: &Code, errors: &ErrorSet) -> Result<GramTensor> {
    if errors.n() != code.n() {
        return Err(Error::DimensionMismatch(errors.n(), code.n()));
    }
    let words: Vec<StateVector> = code.states().cloned().collect();
    let imgs = images(&words, errors, |e, s| e.apply(s))?;
    let (w, n) = (words.len(), errors.len());
    let total = w * n;
    let upper: Vec<(usize, usize, ExactScalar)> = (0..total)
        .into_par_iter()
        .flat_map_iter(|a| (a..total).map(move |b| (a, b)))
        .map(|(a, b)| imgs[a].inner(&imgs[b]).map(|v| (a, b, v)))
        .collect::<Result<_>>()?;
    let mut gram = GramTensor {
        word_labels: code.labels(),
        error_labels: errors.labels(),
        radicand: code.radicand(),
        entries: vec![ExactScalar::zero(code.radicand()); total * total],
    };
    for (a, b, value) in upper {
        let (i, p, j, q) = (a / n, a % n, b / n, b % n);
        let mirrored = gram.offset(j, i, q, p);
        gram.entries[mirrored] = value.conj();
        let direct = gram.offset(i, j, p, q);
        gram.entries[direct] = value;
    }
    Ok(gram)
}

/// Floating-point counterpart of [`GramTensor`], for searched codes.
#[derive(Clone, Debug, PartialEq)]
pub struct FloatGram {
    word_labels: Vec<String>,
    error_labels: Vec<String>,
    entries: Vec<Complex64>,
}

impl FloatGram {
    pub fn word_count(&self) -> usize {
        self.word_labels.len()
    }

    pub fn error_count(&self) -> usize {
        self.error_labels.len()
    }

    pub fn entry(&self, i: usize, j: usize, p: usize, q: usize) -> Complex64 {
        let (w, n) = (self.word_count(), self.error_count());
        self.entries[((i * w + j) * n + p) * n + q]
    }
}

pub fn float_gram(code: &FloatCode, errors: &ErrorSet) -> Result<FloatGram> {
    if errors.n() != code.n {
        return Err(Error::DimensionMismatch(errors.n(), code.n));
    }
    let words: Vec<FloatState> = code.states().cloned().collect();
    let imgs = images(&words, errors, |e, s| e.apply(s))?;
    let (w, n) = (words.len(), errors.len());
    let entries = (0..w * w * n * n)
        .into_par_iter()
        .map(|idx| {
            let (q, rest) = (idx % n, idx / n);
            let (p, rest) = (rest % n, rest / n);
            let (j, i) = (rest % w, rest / w);
            imgs[i * n + p].inner(&imgs[j * n + q])
        })
        .collect::<Result<_>>()?;
    Ok(FloatGram {
        word_labels: code.words.iter().map(|(l, _)| l.clone()).collect(),
        error_labels: errors.labels(),
        entries,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Condition {
    Strict,
    Degenerate,
    Extended,
}

impl Condition {
    pub fn name(self) -> &'static str {
        match self {
            Condition::Strict => "strict",
            Condition::Degenerate => "degenerate",
            Condition::Extended => "extended",
        }
    }
}

/// A value quoted in a report: exact with its float rendering, or float only.
#[allow(clippy::large_enum_variant)]
#[derive(Clone, Debug, PartialEq)]
pub enum ReportValue {
    Exact(ExactScalar),
    Float(Complex64),
}

impl ReportValue {
    pub fn to_complex(&self) -> Complex64 {
        match self {
            ReportValue::Exact(x) => x.to_complex(),
            ReportValue::Float(z) => *z,
        }
    }
}

impl std::fmt::Display for ReportValue {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ReportValue::Exact(x) => write!(f, "{x}"),
            ReportValue::Float(z) => write!(f, "{}", format_complex(*z)),
        }
    }
}

pub fn format_complex(z: Complex64) -> String {
    if z.im == 0.0 {
        format!("{:.12e}", z.re)
    } else {
        format!("{:.12e}{:+.12e}i", z.re, z.im)
    }
}

impl Serialize for ReportValue {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Shape {
            #[serde(skip_serializing_if = "Option::is_none")]
            exact: Option<ScalarRepr>,
            #[serde(skip_serializing_if = "Option::is_none")]
            text: Option<String>,
            float: [f64; 2],
        }
        let z = self.to_complex();
        let shape = match self {
            ReportValue::Exact(x) => Shape { exact: Some(x.into()), text: Some(x.to_string()), float: [z.re, z.im] },
            ReportValue::Float(_) => Shape { exact: None, text: None, float: [z.re, z.im] },
        };
        shape.serialize(serializer)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Witness {
    pub i: usize,
    pub j: usize,
    pub p: usize,
    pub q: usize,
    pub found: ReportValue,
    pub expected: ReportValue,
}

/// The word-independent matrix `d_pq` with exact rank and block structure.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DMatrix {
    error_labels: Vec<String>,
    entries: Vec<Vec<ExactScalar>>,
    rank: usize,
    blocks: Vec<Vec<usize>>,
}

impl DMatrix {
    pub fn error_labels(&self) -> &[String] {
        &self.error_labels
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entry(&self, p: usize, q: usize) -> &ExactScalar {
        &self.entries[p][q]
    }

    pub fn rows(&self) -> &[Vec<ExactScalar>] {
        &self.entries
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    /// Connected components of the graph `p ~ q` iff `d_pq ≠ 0`, ordered by
    /// their smallest index.
    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    pub fn block_of(&self, p: usize) -> usize {
        self.blocks.iter().position(|b| b.contains(&p)).expect("every index has a block")
    }

    pub fn to_float(&self) -> NaMatrix<Complex64> {
        let n = self.len();
        NaMatrix::from_fn(n, n, |p, q| self.entries[p][q].to_complex())
    }

    /// Numerical rank: singular values above `tol · σ_max`.
    pub fn float_rank(&self, tol: f64) -> usize {
        let singular = self.to_float().svd(false, false).singular_values;
        let max = singular.iter().cloned().fold(0.0f64, f64::max);
        singular.iter().filter(|&&s| s > tol * max).count()
    }
}

impl Serialize for DMatrix {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Shape<'a> {
            errors: &'a [String],
            rank: usize,
            block_sizes: Vec<usize>,
            blocks: Vec<Vec<&'a str>>,
            entries: Vec<Vec<ReportValue>>,
        }
        Shape {
            errors: &self.error_labels,
            rank: self.rank,
            block_sizes: self.blocks.iter().map(Vec::len).collect(),
            blocks: self.blocks.iter().map(|b| b.iter().map(|&p| self.error_labels[p].as_str()).collect()).collect(),
            entries: self
                .entries
                .iter()
                .map(|row| row.iter().map(|x| ReportValue::Exact(x.clone())).collect())
                .collect(),
        }
        .serialize(serializer)
    }
}

fn connected_blocks(n: usize, linked: impl Fn(usize, usize) -> bool) -> Vec<Vec<usize>> {
    let mut owner: Vec<Option<usize>> = vec![None; n];
    let mut blocks: Vec<Vec<usize>> = Vec::new();
    for start in 0..n {
        if owner[start].is_some() {
            continue;
        }
        let id = blocks.len();
        let mut members = vec![start];
        owner[start] = Some(id);
        let mut cursor = 0;
        while cursor < members.len() {
            let p = members[cursor];
            cursor += 1;
            for (q, slot) in owner.iter_mut().enumerate() {
                if slot.is_none() && (linked(p, q) || linked(q, p)) {
                    *slot = Some(id);
                    members.push(q);
                }
            }
        }
        members.sort_unstable();
        blocks.push(members);
    }
    blocks
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct KlReport {
    pub condition: Condition,
    pub passed: bool,
    pub words: Vec<String>,
    pub errors: Vec<String>,
    /// Global scale allowed by the strict check.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scale: Option<ReportValue>,
    pub witnesses: Vec<Witness>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub d_matrix: Option<DMatrix>,
    pub notes: Vec<String>,
}

impl KlReport {
    /// Human-readable one-line description of a witness.
    pub fn describe(&self, w: &Witness) -> String {
        format!(
            "<{} {}|{} {}> = {} (expected {})",
            self.errors[w.p], self.words[w.i], self.errors[w.q], self.words[w.j], w.found, w.expected
        )
    }
}

fn exact_witnesses(gram: &GramTensor, condition: Condition) -> (Vec<Witness>, Option<ExactScalar>) {
    let (w, n) = (gram.word_count(), gram.error_count());
    let zero = ExactScalar::zero(gram.radicand());
    let scale = match condition {
        Condition::Strict => Some(gram.entry(0, 0, 0, 0).clone()),
        _ => None,
    };
    let mut witnesses = Vec::new();
    for i in 0..w {
        for j in 0..w {
            for p in 0..n {
                for q in 0..n {
                    let expected = match (&scale, i == j) {
                        (_, false) => &zero,
                        (Some(s), true) => {
                            if p == q {
                                s
                            } else {
                                &zero
                            }
                        }
                        (None, true) => gram.entry(0, 0, p, q),
                    };
                    let found = gram.entry(i, j, p, q);
                    if found != expected {
                        witnesses.push(Witness {
                            i,
                            j,
                            p,
                            q,
                            found: ReportValue::Exact(found.clone()),
                            expected: ReportValue::Exact(expected.clone()),
                        });
                    }
                }
            }
        }
    }
    (witnesses, scale)
}

/// Strict or degenerate check over an exact Gram tensor.
pub fn check_kl(gram: &GramTensor, condition: Condition) -> KlReport {
    let (witnesses, scale) = exact_witnesses(gram, condition);
    let passed = witnesses.is_empty();
    let mut notes = Vec::new();
    if let Some(s) = &scale {
        notes.push(format!("strict check allows one global scale s = {s} (norm^2 of the first word)"));
    }
    let d_matrix = if passed { d_matrix(gram).ok() } else { None };
    KlReport {
        condition,
        passed,
        words: gram.word_labels.clone(),
        errors: gram.error_labels.clone(),
        scale: scale.map(ReportValue::Exact),
        witnesses,
        d_matrix,
        notes,
    }
}

/// Degenerate check over words labelled `(logical, multiplicity)`; one `D`
/// must serve every word.
pub fn check_kl_extended(code: &Code, errors: &ErrorSet) -> Result<KlReport> {
    let mut labels = Vec::new();
    for word in code.words() {
        let index = word
            .index
            .ok_or_else(|| Error::Code(format!("word {} has no (logical, multiplicity) label", word.label)))?;
        labels.push(format!("{}[i={},m={}]", word.label, index.logical, index.multiplicity));
    }
    let gram = gram_blocks(code, errors)?;
    let mut report = check_kl(&gram, Condition::Degenerate);
    report.condition = Condition::Extended;
    report.words = labels;
    let logical: BTreeSet<usize> = code.words().iter().filter_map(|w| w.index.map(|i| i.logical)).collect();
    report.notes.push(format!("{} words over {} logical indices", code.words().len(), logical.len()));
    Ok(report)
}

/// Strict or degenerate check in floating point with absolute tolerance.
pub fn check_kl_float(gram: &FloatGram, condition: Condition, tol: f64) -> KlReport {
    let (w, n) = (gram.word_count(), gram.error_count());
    let scale = match condition {
        Condition::Strict => Some(gram.entry(0, 0, 0, 0)),
        _ => None,
    };
    let zero = Complex64::new(0.0, 0.0);
    let mut witnesses = Vec::new();
    for i in 0..w {
        for j in 0..w {
            for p in 0..n {
                for q in 0..n {
                    let expected = match (scale, i == j) {
                        (_, false) => zero,
                        (Some(s), true) => {
                            if p == q {
                                s
                            } else {
                                zero
                            }
                        }
                        (None, true) => gram.entry(0, 0, p, q),
                    };
                    let found = gram.entry(i, j, p, q);
                    if (found - expected).norm() > tol {
                        witnesses.push(Witness {
                            i,
                            j,
                            p,
                            q,
                            found: ReportValue::Float(found),
                            expected: ReportValue::Float(expected),
                        });
                    }
                }
            }
        }
    }
    let mut notes = vec![format!("floating-point check, absolute tolerance {tol:e}")];
    if let Some(s) = scale {
        notes.push(format!("strict check allows one global scale s = {}", format_complex(s)));
    }
    KlReport {
        condition,
        passed: witnesses.is_empty(),
        words: gram.word_labels.clone(),
        errors: gram.error_labels.clone(),
        scale: scale.map(ReportValue::Float),
        witnesses,
        d_matrix: None,
        notes,
    }
}

/// Extracts `D` from a degenerate-consistent Gram tensor.
pub fn d_matrix(gram: &GramTensor) -> Result<DMatrix> {
    let (witnesses, _) = exact_witnesses(gram, Condition::Degenerate);
    if !witnesses.is_empty() {
        return Err(Error::NotDegenerate);
    }
    let n = gram.error_count();
    let entries: Vec<Vec<ExactScalar>> =
        (0..n).map(|p| (0..n).map(|q| gram.entry(0, 0, p, q).clone()).collect()).collect();
    let rank = exact_rank(entries.clone());
    let blocks = connected_blocks(n, |p, q| !entries[p][q].is_zero());
    Ok(DMatrix { error_labels: gram.error_labels.clone(), entries, rank, blocks })
}

/// Exact dimension of `span{e_p C_i}` by sparse elimination on the vectors.
pub fn span_dimension(code: &Code, errors: &ErrorSet) -> Result<usize> {
    if errors.n() != code.n() {
        return Err(Error::DimensionMismatch(errors.n(), code.n()));
    }
    let mut span = SparseSpan::new();
    for word in code.states() {
        for op in errors.ops() {
            span.insert(&op.apply(word)?);
        }
    }
    Ok(span.dimension())
}

/// The same dimension as the rank of the image Gram matrix.
pub fn span_dimension_via_gram(gram: &GramTensor) -> usize {
    exact_rank(gram.image_matrix())
}

/// Published span dimension for a known (code, error set) pair, if any.
pub fn published_span_reference(code: &Code, errors: &ErrorSet) -> Option<usize> {
    (code.name() == "exch9" && errors.len() == 64).then_some(54)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SpanReport {
    pub dimension: usize,
    pub dimension_via_gram: usize,
    pub d_rank: Option<usize>,
    pub words_times_rank: Option<usize>,
    pub published: Option<usize>,
    pub notes: Vec<String>,
}

pub fn span_report(code: &Code, errors: &ErrorSet, gram: &GramTensor) -> Result<SpanReport> {
    let dimension = span_dimension(code, errors)?;
    let dimension_via_gram = span_dimension_via_gram(gram);
    let d_rank = d_matrix(gram).ok().map(|d| d.rank());
    let words_times_rank = d_rank.map(|r| r * gram.word_count());
    let published = published_span_reference(code, errors);
    let mut notes = Vec::new();
    if dimension != dimension_via_gram {
        notes.push(format!("elimination gives {dimension} but the Gram rank is {dimension_via_gram}"));
    }
    if let Some(expected) = words_times_rank {
        let relation = if expected == dimension { "matches" } else { "differs from" };
        notes.push(format!("span dimension {dimension} {relation} words x rank(D) = {expected}"));
    }
    if let Some(value) = published {
        if value != dimension {
            notes.push(format!(
                "published value {value} (quoted as '{value} < 2^6') differs from the computed {dimension}; reported as computed"
            ));
        }
    }
    Ok(SpanReport { dimension, dimension_via_gram, d_rank, words_times_rank, published, notes })
}

/// Closed-form Gram quantities for the unit-coefficient state `Σ_P |1^κ 0^(n-κ)⟩`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GeneralNIdentities {
    pub n: usize,
    pub kappa: usize,
    /// `⟨Z_k S|Z_l S⟩` for `k ≠ l`: `((n − 2κ)² − n) / (n(n − 1)) · C(n, κ)`.
    pub z_offdiagonal: Rational,
    /// Pairs of strings contributing to `⟨X_k S|X_l S⟩`, `k ≠ l`: `2·C(n − 2, κ − 1)`.
    pub x_overlap_count: u64,
}

pub fn binomial(n: usize, k: usize) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u64, |acc, i| acc * (n - i) as u64 / (i + 1) as u64)
}

pub fn general_n_identities(n: usize, kappa: usize) -> Result<GeneralNIdentities> {
    if n < 2 || kappa == 0 || kappa >= n {
        return Err(Error::WeightOutOfRange { weight: kappa, n });
    }
    let (ni, ki) = (n as i64, kappa as i64);
    let numerator = ((ni - 2 * ki).pow(2) - ni) * binomial(n, kappa) as i64;
    let z_offdiagonal = BigRational::new(numerator.into(), (ni * (ni - 1)).into());
    Ok(GeneralNIdentities { n, kappa, z_offdiagonal, x_overlap_count: 2 * binomial(n - 2, kappa - 1) })
}

impl GeneralNIdentities {
    /// Whether the Z contribution is an exact integer (it always should be).
    pub fn z_is_integral(&self) -> bool {
        self.z_offdiagonal.is_integer()
    }

    pub fn z_sign(&self) -> i32 {
        if self.z_offdiagonal.is_zero() {
            0
        } else if self.z_offdiagonal.is_positive() {
            1
        } else {
            -1
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codes::{builtin_code, WordIndex};
    use crate::errors::{make_error_set, parse_error_classes, ErrorOp};
    use crate::field::rational;

    fn int(v: i64, m: u64) -> ExactScalar {
        ExactScalar::from_int(v, m)
    }

    #[test]
    fn z_gram_on_exch9() {
        let code = builtin_code("exch9").unwrap();
        let errors = ErrorSet::with_identity(9, (1..=9).map(ErrorOp::z).collect()).unwrap();
        let gram = gram_blocks(&code, &errors).unwrap();
        for i in 0..2 {
            for k in 1..=9 {
                for l in 1..=9 {
                    let expected = if k == l { 4 } else { 1 };
                    assert_eq!(gram.entry(i, i, k, l), &int(expected, 28));
                }
            }
        }
    }

    #[test]
    fn x_and_y_gram_on_exch9() {
        let code = builtin_code("exch9").unwrap();
        let mut ops: Vec<ErrorOp> = (1..=9).map(ErrorOp::x).collect();
        ops.extend((1..=9).map(ErrorOp::y));
        let errors = ErrorSet::with_identity(9, ops).unwrap();
        let gram = gram_blocks(&code, &errors).unwrap();
        let three_halves = ExactScalar::from_rational(rational(3, 2), 28);
        for i in 0..2 {
            for k in 1..=9 {
                for l in 1..=9 {
                    if k != l {
                        assert_eq!(gram.entry(i, i, k, l), &three_halves);
                    }
                    assert!(gram.entry(i, i, 9 + k, l).is_zero(), "Y_{k} vs X_{l}");
                }
            }
        }
    }

    #[test]
    fn gram_is_conjugate_symmetric() {
        let code = builtin_code("shor9").unwrap();
        let errors = make_error_set(9, &parse_error_classes("pauli").unwrap()).unwrap();
        let gram = gram_blocks(&code, &errors).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                for p in 0..errors.len() {
                    for q in 0..errors.len() {
                        assert_eq!(gram.entry(i, j, p, q), &gram.entry(j, i, q, p).conj());
                    }
                    assert_eq!(gram.entry(i, i, p, p), &int(4, 1));
                }
            }
        }
        assert!(gram_blocks(&code, &make_error_set(5, &parse_error_classes("x").unwrap()).unwrap()).is_err());
    }

    #[test]
    fn exch9_degenerate_pass_strict_fail() {
        let code = builtin_code("exch9").unwrap();
        let errors = make_error_set(9, &parse_error_classes("pauli,exchange").unwrap()).unwrap();
        let gram = gram_blocks(&code, &errors).unwrap();
        let degenerate = check_kl(&gram, Condition::Degenerate);
        assert!(degenerate.passed);
        let d = degenerate.d_matrix.as_ref().unwrap();
        assert_eq!(d.rank(), 28);
        assert_eq!(d.blocks().iter().map(Vec::len).collect::<Vec<_>>(), vec![37, 9, 9, 9]);
        assert_eq!(d.float_rank(1e-8), 28);

        let strict = check_kl(&gram, Condition::Strict);
        assert!(!strict.passed);
        assert!(strict.d_matrix.is_none());
        let e12 = errors.index_of("E_12").unwrap();
        assert!(strict.witnesses.iter().any(|w| w.i == 0
            && w.j == 0
            && w.p == e12
            && w.q == 0
            && w.found == ReportValue::Exact(int(4, 28))));
        let mut sorted = strict.witnesses.clone();
        sorted.sort_by_key(|w| (w.i, w.j, w.p, w.q));
        assert_eq!(sorted, strict.witnesses);
    }

    #[test]
    fn shor9_degenerate_failure_witness() {
        let code = builtin_code("shor9").unwrap();
        let errors = ErrorSet::with_identity(
            9,
            vec![ErrorOp::z(7), ErrorOp::z(8), ErrorOp::z(9), ErrorOp::exchange(3, 4).unwrap()],
        )
        .unwrap();
        let gram = gram_blocks(&code, &errors).unwrap();
        // brute force over every entry: the witness list is exactly the
        // entries that break word independence or cross-word orthogonality
        let mut brute = Vec::new();
        for i in 0..2 {
            for j in 0..2 {
                for p in 0..5 {
                    for q in 0..5 {
                        let lhs = errors.ops()[p].apply(&code.words()[i].state).unwrap();
                        let rhs = errors.ops()[q].apply(&code.words()[j].state).unwrap();
                        let value = lhs.inner(&rhs).unwrap();
                        let reference = errors.ops()[p]
                            .apply(&code.words()[0].state)
                            .unwrap()
                            .inner(&errors.ops()[q].apply(&code.words()[0].state).unwrap())
                            .unwrap();
                        let ok = if i == j { value == reference } else { value.is_zero() };
                        if !ok {
                            brute.push((i, j, p, q));
                        }
                    }
                }
            }
        }
        let report = check_kl(&gram, Condition::Degenerate);
        assert!(!report.passed);
        let found: Vec<_> = report.witnesses.iter().map(|w| (w.i, w.j, w.p, w.q)).collect();
        assert_eq!(found, brute);
        let e34 = 4;
        assert!(report.witnesses.iter().any(|w| (1..=3).contains(&w.p) && w.q == e34));
        // <Z_7 c_1 | E_34 c_1> = -2 against +2 for c_0
        let w = report.witnesses.iter().find(|w| w.i == 1 && w.p == 1 && w.q == e34).unwrap();
        assert_eq!(w.found, ReportValue::Exact(int(-2, 1)));
        assert_eq!(w.expected, ReportValue::Exact(int(2, 1)));
        assert!(d_matrix(&gram).is_err());
    }

    #[test]
    fn extended_check() {
        let code = builtin_code("exch9").unwrap();
        let errors = make_error_set(9, &parse_error_classes("pauli,exchange").unwrap()).unwrap();
        assert!(check_kl_extended(&code, &errors).is_err());
        let labelled = code
            .clone()
            .with_indices(&[WordIndex { logical: 0, multiplicity: 1 }, WordIndex { logical: 1, multiplicity: 1 }])
            .unwrap();
        let report = check_kl_extended(&labelled, &errors).unwrap();
        assert!(report.passed);
        let plain = check_kl(&gram_blocks(&code, &errors).unwrap(), Condition::Degenerate);
        assert_eq!(report.d_matrix, plain.d_matrix);

        // C_0^1 ⟂ C_0^2, but E_34 maps one onto the other
        let words = ["0001", "0010", "1110", "1101"]
            .iter()
            .map(|b| StateVector::basis(b).unwrap())
            .zip(["C_0^1", "C_0^2", "C_1^1", "C_1^2"])
            .map(|(s, l)| (l.to_string(), s))
            .collect();
        let small = Code::from_states("small", words)
            .unwrap()
            .with_indices(&[
                WordIndex { logical: 0, multiplicity: 1 },
                WordIndex { logical: 0, multiplicity: 2 },
                WordIndex { logical: 1, multiplicity: 1 },
                WordIndex { logical: 1, multiplicity: 2 },
            ])
            .unwrap();
        let ex = make_error_set(4, &parse_error_classes("exchange").unwrap()).unwrap();
        let report = check_kl_extended(&small, &ex).unwrap();
        assert!(!report.passed);
        let e34 = ex.index_of("E_34").unwrap();
        assert!(report.witnesses.iter().any(|w| w.i == 0 && w.j == 1 && w.p == 0 && w.q == e34));
    }

    #[test]
    fn d_matrix_examples() {
        let rep = builtin_code("rep3").unwrap();
        let errors = make_error_set(3, &parse_error_classes("x,exchange").unwrap()).unwrap();
        let gram = gram_blocks(&rep, &errors).unwrap();
        let d = d_matrix(&gram).unwrap();
        let one = int(1, 1);
        for p in [0, 4, 5, 6] {
            for q in [0, 4, 5, 6] {
                assert_eq!(d.entry(p, q), &one);
            }
        }
        for p in 1..=3 {
            for q in 1..=3 {
                assert_eq!(d.entry(p, q), &int(i64::from(p == q), 1));
            }
        }
        assert_eq!(d.rank(), 4);
        assert_eq!(d.blocks(), &[vec![0, 4, 5, 6], vec![1], vec![2], vec![3]]);

        let single = ErrorSet::new(9, vec![ErrorOp::identity()]).unwrap();
        let d = d_matrix(&gram_blocks(&builtin_code("exch9").unwrap(), &single).unwrap()).unwrap();
        assert_eq!(d.len(), 1);
        assert_eq!(d.entry(0, 0), &int(4, 28));
        assert_eq!(d.rank(), 1);
    }

    #[test]
    fn span_dimensions() {
        let single = ErrorSet::new(3, vec![ErrorOp::identity()]).unwrap();
        assert_eq!(span_dimension(&builtin_code("rep3").unwrap(), &single).unwrap(), 2);
        let single9 = ErrorSet::new(9, vec![ErrorOp::identity()]).unwrap();
        let exch = builtin_code("exch9").unwrap();
        assert_eq!(span_dimension(&exch, &single9).unwrap(), 2);
        let gram = gram_blocks(&exch, &single9).unwrap();
        assert_eq!(span_dimension_via_gram(&gram), 2);
    }

    #[test]
    fn general_identities() {
        let g = general_n_identities(9, 3).unwrap();
        assert!(g.z_offdiagonal.is_zero());
        assert_eq!(g.x_overlap_count, 42);
        let g = general_n_identities(5, 2).unwrap();
        assert_eq!(g.z_offdiagonal, rational(-2, 1));
        assert_eq!(g.z_sign(), -1);
        assert!(general_n_identities(5, 0).is_err());
        assert!(general_n_identities(5, 5).is_err());
    }

    #[test]
    fn general_identities_against_direct_gram() {
        for n in 2..=8usize {
            for kappa in 1..n {
                let predicted = general_n_identities(n, kappa).unwrap();
                assert!(predicted.z_is_integral());
                let s = StateVector::perm_sum(n, kappa, &ExactScalar::one(1)).unwrap();
                let z1 = s.apply_pauli(crate::qstate::PauliAxis::Z, 1).unwrap();
                let z2 = s.apply_pauli(crate::qstate::PauliAxis::Z, 2).unwrap();
                assert_eq!(z1.inner(&z2).unwrap(), ExactScalar::from_rational(predicted.z_offdiagonal.clone(), 1));
                let x1 = s.apply_pauli(crate::qstate::PauliAxis::X, 1).unwrap();
                let x2 = s.apply_pauli(crate::qstate::PauliAxis::X, 2).unwrap();
                assert_eq!(x1.inner(&x2).unwrap(), int(predicted.x_overlap_count as i64, 1));
            }
        }
    }

    #[test]
    fn float_mode_matches_exact() {
        let code = builtin_code("exch9").unwrap();
        let errors = make_error_set(9, &parse_error_classes("pauli,exchange").unwrap()).unwrap();
        let gram = float_gram(&code.to_float(), &errors).unwrap();
        assert!(check_kl_float(&gram, Condition::Degenerate, 1e-9).passed);
        assert!(!check_kl_float(&gram, Condition::Strict, 1e-9).passed);
        let shor = builtin_code("shor9").unwrap();
        let z_ex = make_error_set(9, &parse_error_classes("z,exchange").unwrap()).unwrap();
        let report = check_kl_float(&float_gram(&shor.to_float(), &z_ex).unwrap(), Condition::Degenerate, 1e-9);
        assert!(!report.passed);
    }

    #[test]
    fn fixed_words_fail_strict() {
        // words fixed by a transposition fail strict whenever it is in the set
        for name in ["exch9", "shor9"] {
            let code = builtin_code(name).unwrap();
            let errors = ErrorSet::with_identity(9, vec![ErrorOp::exchange(1, 2).unwrap()]).unwrap();
            let report = check_kl(&gram_blocks(&code, &errors).unwrap(), Condition::Strict);
            assert!(!report.passed);
        }
    }

    fn two_word_code() -> impl proptest::strategy::Strategy<Value = (usize, Code)> {
        use proptest::prelude::*;
        (2usize..=4).prop_flat_map(|n| {
            let term = (0u32..(1u32 << n), -3i64..=3, -3i64..=3);
            let word = prop::collection::vec(term, 1..5);
            (Just(n), word.clone(), word).prop_filter_map("nonzero words", |(n, w0, w1)| {
                let build = |w: Vec<(u32, i64, i64)>| {
                    StateVector::from_terms(
                        n,
                        1,
                        w.into_iter()
                            .map(|(b, re, im)| (b, ExactScalar::gaussian(rational(re, 1), rational(im, 2), 1))),
                    )
                    .ok()
                    .filter(|s| !s.is_empty())
                };
                let code = Code::from_states("p", vec![("A".into(), build(w0)?), ("B".into(), build(w1)?)]).ok()?;
                Some((n, code))
            })
        })
    }

    proptest::proptest! {
        #[test]
        fn gram_hermitian_and_layers_agree((n, code) in two_word_code(), classes in proptest::sample::select(vec!["x", "z", "pauli", "exchange", "y,exchange"])) {
            let errors = make_error_set(n, &parse_error_classes(classes).unwrap()).unwrap();
            let gram = gram_blocks(&code, &errors).unwrap();
            for i in 0..2 {
                for j in 0..2 {
                    for p in 0..errors.len() {
                        for q in 0..errors.len() {
                            proptest::prop_assert_eq!(gram.entry(i, j, p, q), &gram.entry(j, i, q, p).conj());
                        }
                    }
                }
            }
            let exact = check_kl(&gram, Condition::Degenerate);
            let residual = crate::search::kl_residual(&code.to_float(), &errors).unwrap();
            if exact.passed {
                proptest::prop_assert!(residual <= 1e-12);
            } else if exact.witnesses.iter().any(|w| (w.found.to_complex() - w.expected.to_complex()).norm() >= 1e-3) {
                proptest::prop_assert!(residual >= 1e-6);
            }
            let float = check_kl_float(&float_gram(&code.to_float(), &errors).unwrap(), Condition::Degenerate, 1e-9);
            proptest::prop_assert_eq!(float.passed, exact.passed);
        }
    }
}
