//! Qubit-count bounds, the dual-phase feasibility test, and numerical search
//! over permutation-invariant code families.
//!
//! A family is fixed by a [`SupportPattern`]: word `i` is
//! `Σ_κ a_κ S_κ` where `S_κ` is the unit-coefficient sum over all weight-`κ`
//! strings. Coefficients are real. The search minimizes [`kl_residual`]-style
//! distance to the degenerate conditions; a positive floor is evidence, never
//! a proof, that the family holds no code.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use num_rational::BigRational;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::codes::FloatCode;
use crate::error::{Error, Result};
use crate::errors::ErrorSet;
use crate::field::{format_rational, Rational};
use crate::klcheck::{binomial, float_gram};
use crate::qstate::{weight_class, FloatState};

// ---- bounds ----

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundModel {
    Single,
    SinglePlusExchange,
    AllTwoBit,
    IrrepConstruction,
}

impl BoundModel {
    pub const ALL: [BoundModel; 4] =
        [BoundModel::Single, BoundModel::SinglePlusExchange, BoundModel::AllTwoBit, BoundModel::IrrepConstruction];

    pub fn name(self) -> &'static str {
        match self {
            BoundModel::Single => "single",
            BoundModel::SinglePlusExchange => "single_plus_exchange",
            BoundModel::AllTwoBit => "all_two_bit",
            BoundModel::IrrepConstruction => "irrep_construction",
        }
    }

    pub fn inequality(self) -> &'static str {
        match self {
            BoundModel::Single => "3n+1 <= 2^(n-1)",
            BoundModel::SinglePlusExchange => "2N = n^2+5n+2 <= 2^n",
            BoundModel::AllTwoBit => "2N = 9n(n-1)+2(3n+1) <= 2^n",
            BoundModel::IrrepConstruction => "2(n-1)(3n+1) <= 2^n",
        }
    }

    /// `(lhs, rhs)` of the inequality at `n`.
    pub fn sides(self, n: u64) -> (u64, u64) {
        match self {
            BoundModel::Single => (3 * n + 1, 1 << (n - 1)),
            BoundModel::SinglePlusExchange => (n * n + 5 * n + 2, 1 << n),
            BoundModel::AllTwoBit => (9 * n * (n - 1) + 2 * (3 * n + 1), 1 << n),
            BoundModel::IrrepConstruction => (2 * (n - 1) * (3 * n + 1), 1 << n),
        }
    }
}

impl FromStr for BoundModel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        BoundModel::ALL.into_iter().find(|m| m.name() == s).ok_or_else(|| Error::UnknownModel(s.to_string()))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BoundReport {
    pub model: BoundModel,
    pub inequality: &'static str,
    pub n: u64,
    pub lhs: u64,
    pub rhs: u64,
}

/// Least `n ≥ 2` satisfying the model's counting inequality.
pub fn bounds_min_qubits(model: BoundModel) -> BoundReport {
    let n = (2u64..).find(|&n| {
        let (lhs, rhs) = model.sides(n);
        lhs <= rhs
    });
    let n = n.expect("the right-hand side grows exponentially");
    let (lhs, rhs) = model.sides(n);
    BoundReport { model, inequality: model.inequality(), n, lhs, rhs }
}

// ---- patterns ----

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct SupportPattern {
    pub n: usize,
    pub word0_weights: BTreeSet<usize>,
    pub word1_weights: BTreeSet<usize>,
    pub dual_flip_related: bool,
}

impl SupportPattern {
    /// Word 1 is word 0 with every bit flipped.
    pub fn dual(n: usize, word0: impl IntoIterator<Item = usize>) -> Result<Self> {
        let word0: BTreeSet<usize> = word0.into_iter().collect();
        check_weights(n, &word0)?;
        let word1 = word0.iter().map(|k| n - k).collect();
        Ok(Self { n, word0_weights: word0, word1_weights: word1, dual_flip_related: true })
    }

    /// Independent supports; the pattern is marked dual when the sets happen
    /// to be flips of each other.
    pub fn new(n: usize, word0: BTreeSet<usize>, word1: BTreeSet<usize>) -> Result<Self> {
        check_weights(n, &word0)?;
        check_weights(n, &word1)?;
        let flipped: BTreeSet<usize> = word0.iter().map(|k| n - k).collect();
        Ok(Self { n, dual_flip_related: flipped == word1, word0_weights: word0, word1_weights: word1 })
    }

    /// Every nonempty weight set for word 0, paired with its flip.
    pub fn all_dual(n: usize) -> Vec<Self> {
        (1u32..1 << (n + 1))
            .map(|mask| Self::dual(n, (0..=n).filter(|k| mask >> k & 1 == 1)).expect("weights in range"))
            .collect()
    }

    /// Parses `0,6/3,9`; several patterns are separated by `;`. The word 1
    /// part may be omitted to request the dual.
    pub fn parse_list(n: usize, text: &str) -> Result<Vec<Self>> {
        if text.trim() == "all-dual" {
            return Ok(Self::all_dual(n));
        }
        let mut out = Vec::new();
        for item in text.split(';').map(str::trim).filter(|s| !s.is_empty()) {
            let item = item.replace(['{', '}', ' '], "");
            let mut halves = item.splitn(2, '/');
            let word0 = parse_weight_set(halves.next().unwrap_or(""))?;
            match halves.next() {
                Some(w1) => out.push(Self::new(n, word0, parse_weight_set(w1)?)?),
                None => out.push(Self::dual(n, word0)?),
            }
        }
        if out.is_empty() {
            return Err(Error::Parse(format!("no support patterns in '{text}'")));
        }
        Ok(out)
    }
}

impl fmt::Display for SupportPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let join = |s: &BTreeSet<usize>| s.iter().map(usize::to_string).collect::<Vec<_>>().join(",");
        write!(f, "{{{}}}/{{{}}}", join(&self.word0_weights), join(&self.word1_weights))
    }
}

fn parse_weight_set(text: &str) -> Result<BTreeSet<usize>> {
    text.split(',')
        .map(|t| t.trim().parse::<usize>().map_err(|_| Error::Parse(format!("bad weight '{t}' in pattern"))))
        .collect()
}

fn check_weights(n: usize, weights: &BTreeSet<usize>) -> Result<()> {
    if weights.is_empty() {
        return Err(Error::InvalidArgument("a support pattern needs at least one weight per word".into()));
    }
    match weights.iter().find(|&&k| k > n) {
        Some(&k) => Err(Error::WeightOutOfRange { weight: k, n }),
        None => Ok(()),
    }
}

// ---- dual-phase feasibility ----

/// `⟨S_κ|Z_k S_κ⟩ = C(n−1, κ) − C(n−1, κ−1)` for the unit-coefficient sum.
pub fn z_weight(n: usize, kappa: usize) -> i64 {
    let below = if kappa == 0 { 0 } else { binomial(n - 1, kappa - 1) as i64 };
    binomial(n - 1, kappa) as i64 - below
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DualPhaseReport {
    pub pattern: String,
    pub feasible: bool,
    /// `(κ, contribution per unit |a_κ|²)` for word 0.
    pub contributions: Vec<(usize, i64)>,
    pub certificate: String,
    /// `κ → |a_κ|²` making `⟨C_0|Z_k C_0⟩ = 0`, when feasible.
    #[serde(skip_serializing_if = "Option::is_none", serialize_with = "serialize_witness")]
    pub witness: Option<BTreeMap<usize, Rational>>,
}

fn serialize_witness<S: serde::Serializer>(
    witness: &Option<BTreeMap<usize, Rational>>,
    serializer: S,
) -> std::result::Result<S::Ok, S::Error> {
    let text: Option<BTreeMap<usize, String>> =
        witness.as_ref().map(|w| w.iter().map(|(k, v)| (*k, format_rational(v))).collect());
    text.serialize(serializer)
}

impl DualPhaseReport {
    /// `|a_κ1|² / |a_κ2|²` in the witness.
    pub fn witness_ratio(&self, numerator: usize, denominator: usize) -> Option<Rational> {
        let w = self.witness.as_ref()?;
        Some(w.get(&numerator)? / w.get(&denominator)?)
    }
}

/// Whether `⟨C_0|Z_k C_0⟩ = 0` can hold with every `a_κ` in the support
/// nonzero. Under the flip relation word 1 gives the negated sum, so word 0
/// decides.
pub fn dualphase_feasibility(pattern: &SupportPattern) -> Result<DualPhaseReport> {
    if !pattern.dual_flip_related {
        return Err(Error::InvalidArgument(format!("pattern {pattern} is not flip-related")));
    }
    let n = pattern.n;
    let contributions: Vec<(usize, i64)> = pattern.word0_weights.iter().map(|&k| (k, z_weight(n, k))).collect();
    let positive: Vec<_> = contributions.iter().filter(|c| c.1 > 0).collect();
    let negative: Vec<_> = contributions.iter().filter(|c| c.1 < 0).collect();
    let describe =
        |cs: &[&(usize, i64)]| cs.iter().map(|(k, w)| format!("a_{k}^2 x {w:+}")).collect::<Vec<_>>().join(", ");
    if positive.is_empty() != negative.is_empty() {
        let sign = if positive.is_empty() { "negative" } else { "positive" };
        let terms = describe(if positive.is_empty() { &negative } else { &positive });
        return Ok(DualPhaseReport {
            pattern: pattern.to_string(),
            feasible: false,
            contributions,
            certificate: format!(
                "every nonzero contribution is strictly {sign} ({terms}), so <C_0|Z_k C_0> cannot vanish with nonzero coefficients"
            ),
            witness: None,
        });
    }
    let mut witness = BTreeMap::new();
    for &(k, w) in &contributions {
        let value = match w.signum() {
            0 => BigRational::from_integer(1.into()),
            1 => BigRational::new(1.into(), (positive.len() as i64 * w).into()),
            _ => BigRational::new(1.into(), (negative.len() as i64 * -w).into()),
        };
        witness.insert(k, value);
    }
    let certificate = if positive.is_empty() {
        "every weight has zero Z expectation".to_string()
    } else {
        format!("positive terms ({}) balance negative terms ({})", describe(&positive), describe(&negative))
    };
    Ok(DualPhaseReport {
        pattern: pattern.to_string(),
        feasible: true,
        contributions,
        certificate,
        witness: Some(witness),
    })
}

// ---- residual ----

/// Largest deviation from the degenerate structure: `|G_ij(p,q)|` for
/// `i ≠ j` and `|G_ii(p,q) − mean_i G_ii(p,q)|` on the diagonal.
pub fn kl_residual(code: &FloatCode, errors: &ErrorSet) -> Result<f64> {
    let gram = float_gram(code, errors)?;
    let (w, n) = (gram.word_count(), gram.error_count());
    let mut worst = 0.0f64;
    for p in 0..n {
        for q in 0..n {
            let mean = (0..w).map(|i| gram.entry(i, i, p, q)).sum::<Complex64>() / w as f64;
            for i in 0..w {
                for j in 0..w {
                    let target = if i == j { mean } else { Complex64::new(0.0, 0.0) };
                    worst = worst.max((gram.entry(i, j, p, q) - target).norm());
                }
            }
        }
    }
    Ok(worst)
}

/// Unit-coefficient sum over the weight-`κ` strings.
pub fn weight_sum(n: usize, kappa: usize) -> Result<FloatState> {
    FloatState::from_terms(n, weight_class(n, kappa).into_iter().map(|b| (b, Complex64::new(1.0, 0.0))))
}

/// Builds the two float words from real coefficients `a_κ`.
pub fn pattern_code(
    name: &str,
    n: usize,
    word0: &BTreeMap<usize, f64>,
    word1: &BTreeMap<usize, f64>,
) -> Result<FloatCode> {
    let build = |coeffs: &BTreeMap<usize, f64>| -> Result<FloatState> {
        let mut state = FloatState::zero(n)?;
        for (&k, &a) in coeffs {
            state = state.add_scaled(Complex64::new(a, 0.0), &weight_sum(n, k)?)?;
        }
        Ok(state)
    };
    Ok(FloatCode {
        name: name.to_string(),
        n,
        words: vec![("C_0".into(), build(word0)?), ("C_1".into(), build(word1)?)],
    })
}

// ---- search ----

/// `⟨e_p S_κ|e_q S_κ'⟩` for every weight pair, stored sparsely.
struct BasisGram {
    n: usize,
    /// Indexed by `κ·(n+1) + κ'`; entries `(p, q, value)`.
    blocks: Vec<Vec<(usize, usize, Complex64)>>,
    errors: usize,
}

impl BasisGram {
    fn new(errors: &ErrorSet) -> Result<Self> {
        let n = errors.n();
        let images: Vec<Vec<FloatState>> = (0..=n)
            .map(|k| {
                let s = weight_sum(n, k)?;
                errors.ops().iter().map(|e| e.apply(&s)).collect::<Result<Vec<_>>>()
            })
            .collect::<Result<_>>()?;
        let count = errors.len();
        let blocks = (0..(n + 1) * (n + 1))
            .into_par_iter()
            .map(|idx| {
                let (k, l) = (idx / (n + 1), idx % (n + 1));
                let mut entries = Vec::new();
                if k.abs_diff(l) <= 2 {
                    for p in 0..count {
                        for q in 0..count {
                            let v = images[k][p].inner(&images[l][q])?;
                            if v.norm() > 1e-12 {
                                entries.push((p, q, v));
                            }
                        }
                    }
                }
                Ok(entries)
            })
            .collect::<Result<_>>()?;
        Ok(Self { n, blocks, errors: count })
    }

    fn block(&self, k: usize, l: usize) -> &[(usize, usize, Complex64)] {
        &self.blocks[k * (self.n + 1) + l]
    }
}

/// One quadratic form `Σ c · a_x a_y` whose modulus must vanish.
struct Target {
    terms: Vec<(usize, usize, Complex64)>,
}

/// Residual of a pattern as a function of its coefficient vector (word 0
/// weights, then word 1 weights unless the pattern is dual).
struct Objective {
    targets: Vec<Target>,
    dims: (usize, usize),
    dual: bool,
}

impl Objective {
    fn new(pattern: &SupportPattern, basis: &BasisGram) -> Self {
        let w0: Vec<usize> = pattern.word0_weights.iter().copied().collect();
        let w1: Vec<usize> = pattern.word1_weights.iter().copied().collect();
        let n = pattern.n;
        // variable index and weight for each term of each word
        let word0: Vec<(usize, usize)> = w0.iter().enumerate().map(|(x, &k)| (x, k)).collect();
        let word1: Vec<(usize, usize)> = if pattern.dual_flip_related {
            w0.iter().enumerate().map(|(x, &k)| (x, n - k)).collect()
        } else {
            w1.iter().enumerate().map(|(x, &k)| (w0.len() + x, k)).collect()
        };
        let size = basis.errors * basis.errors;
        let mut diag: Vec<BTreeMap<(usize, usize), Complex64>> = vec![BTreeMap::new(); size];
        let mut cross: Vec<BTreeMap<(usize, usize), Complex64>> = vec![BTreeMap::new(); size];
        let accumulate = |into: &mut Vec<BTreeMap<(usize, usize), Complex64>>,
                          a: &[(usize, usize)],
                          b: &[(usize, usize)],
                          factor: f64| {
            for &(x, k) in a {
                for &(y, l) in b {
                    // a_κ = y_κ / √C(n, κ)
                    let weight = factor / ((binomial(n, k) * binomial(n, l)) as f64).sqrt();
                    for &(p, q, v) in basis.block(k, l) {
                        *into[p * basis.errors + q].entry((x.min(y), x.max(y))).or_default() += v * weight;
                    }
                }
            }
        };
        accumulate(&mut diag, &word0, &word0, 0.5);
        accumulate(&mut diag, &word1, &word1, -0.5);
        accumulate(&mut cross, &word0, &word1, 1.0);
        let targets = diag
            .into_iter()
            .chain(cross)
            .map(|m| Target {
                terms: m.into_iter().filter(|(_, v)| v.norm() > 1e-13).map(|((x, y), v)| (x, y, v)).collect(),
            })
            .filter(|t| !t.terms.is_empty())
            .collect();
        let dims = (w0.len(), if pattern.dual_flip_related { 0 } else { w1.len() });
        Self { targets, dims, dual: pattern.dual_flip_related }
    }

    fn parameter_count(&self) -> usize {
        self.dims.0.saturating_sub(1) + self.dims.1.saturating_sub(1)
    }

    /// Coefficients `y` on the unit sphere per word from angles.
    fn coefficients(&self, angles: &[f64]) -> Vec<f64> {
        let (first, rest) = angles.split_at(self.dims.0.saturating_sub(1));
        let mut out = sphere_point(first, self.dims.0);
        if !self.dual {
            out.extend(sphere_point(rest, self.dims.1));
        }
        out
    }

    fn residual_of(&self, y: &[f64]) -> f64 {
        self.targets
            .iter()
            .map(|t| t.terms.iter().map(|&(x, z, v)| v * (y[x] * y[z])).sum::<Complex64>().norm())
            .fold(0.0, f64::max)
    }

    fn value(&self, angles: &[f64]) -> f64 {
        self.residual_of(&self.coefficients(angles))
    }
}

fn sphere_point(angles: &[f64], dim: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(dim);
    let mut carry = 1.0;
    for &t in angles {
        out.push(carry * t.cos());
        carry *= t.sin();
    }
    out.push(carry);
    out.truncate(dim);
    out
}

/// Nelder-Mead with standard coefficients. The best vertex value never
/// increases.
fn nelder_mead(
    f: impl Fn(&[f64]) -> f64,
    start: Vec<f64>,
    step: f64,
    max_evals: usize,
    tol: f64,
) -> (Vec<f64>, f64, usize) {
    let d = start.len();
    if d == 0 {
        return (start.clone(), f(&start), 1);
    }
    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(d + 1);
    simplex.push((start.clone(), f(&start)));
    for axis in 0..d {
        let mut x = start.clone();
        x[axis] += step;
        let v = f(&x);
        simplex.push((x, v));
    }
    let mut evals = d + 1;
    let combine = |a: &[f64], b: &[f64], t: f64| a.iter().zip(b).map(|(x, y)| x + t * (y - x)).collect::<Vec<_>>();
    while evals < max_evals {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let spread = simplex
            .iter()
            .flat_map(|(x, _)| x.iter().zip(&simplex[0].0).map(|(a, b)| (a - b).abs()))
            .fold(0.0, f64::max);
        if simplex[0].1 <= tol || spread < 1e-15 {
            break;
        }
        let mut centroid = vec![0.0; d];
        for (x, _) in &simplex[..d] {
            for (c, v) in centroid.iter_mut().zip(x) {
                *c += v / d as f64;
            }
        }
        let worst = simplex[d].clone();
        let reflected = combine(&centroid, &worst.0, -1.0);
        let fr = f(&reflected);
        evals += 1;
        if fr < simplex[0].1 {
            let expanded = combine(&centroid, &worst.0, -2.0);
            let fe = f(&expanded);
            evals += 1;
            simplex[d] = if fe < fr { (expanded, fe) } else { (reflected, fr) };
        } else if fr < simplex[d - 1].1 {
            simplex[d] = (reflected, fr);
        } else {
            let (towards, base) = if fr < worst.1 { (reflected, fr) } else { (worst.0.clone(), worst.1) };
            let contracted = combine(&centroid, &towards, 0.5);
            let fc = f(&contracted);
            evals += 1;
            if fc < base {
                simplex[d] = (contracted, fc);
            } else {
                let best = simplex[0].0.clone();
                for vertex in simplex.iter_mut().skip(1) {
                    let x = combine(&best, &vertex.0, 0.5);
                    vertex.1 = f(&x);
                    vertex.0 = x;
                    evals += 1;
                }
            }
        }
    }
    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    let (x, v) = simplex.swap_remove(0);
    (x, v, evals)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SearchResult {
    pub pattern: SupportPattern,
    /// Word 0 coefficients `a_κ`, scaled so the first is 1.
    pub word0: BTreeMap<usize, f64>,
    pub word1: BTreeMap<usize, f64>,
    /// Residual of the unit-norm words.
    pub residual: f64,
    pub restarts_used: usize,
    pub best_restart: usize,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SearchReport {
    pub n: usize,
    pub errors: String,
    pub seed: u64,
    pub restarts: usize,
    pub tolerance: f64,
    /// Sorted by residual, ties by pattern order.
    pub results: Vec<SearchResult>,
    pub notes: Vec<String>,
}

impl SearchReport {
    pub fn best_residual(&self) -> Option<f64> {
        self.results.first().map(|r| r.residual)
    }

    pub fn found_code(&self) -> bool {
        self.best_residual().is_some_and(|r| r <= self.tolerance)
    }

    /// Verdict line; a positive floor is described as evidence only.
    pub fn verdict(&self) -> String {
        match self.best_residual() {
            Some(r) if r <= self.tolerance => {
                format!("code found: residual {r:.3e} <= {:.1e}", self.tolerance)
            }
            Some(r) => format!(
                "residual floor {r:.6e} over {} restarts per pattern: numerical evidence, not a proof, that no code exists in the searched family",
                self.restarts
            ),
            None => "no patterns searched".into(),
        }
    }

    pub fn to_text(&self) -> String {
        let mut out = format!(
            "search n={} errors={} seed={} restarts={} patterns={}\n",
            self.n,
            self.errors,
            self.seed,
            self.restarts,
            self.results.len()
        );
        let fmt_coeffs =
            |m: &BTreeMap<usize, f64>| m.iter().map(|(k, a)| format!("a_{k}={a:.12}")).collect::<Vec<_>>().join(" ");
        for r in &self.results {
            out.push_str(&format!(
                "  {:<20} residual {:.6e}  C_0: {}  C_1: {}\n",
                r.pattern.to_string(),
                r.residual,
                fmt_coeffs(&r.word0),
                fmt_coeffs(&r.word1)
            ));
        }
        for note in &self.notes {
            out.push_str(&format!("note: {note}\n"));
        }
        out.push_str(&self.verdict());
        out.push('\n');
        out
    }
}

/// Tuning for [`search_perm_invariant`].
#[derive(Clone, Copy, Debug)]
pub struct SearchOptions {
    pub restarts: usize,
    pub seed: u64,
    /// Residual regarded as an exact solution.
    pub tolerance: f64,
    pub max_evals: usize,
}

impl SearchOptions {
    pub fn new(restarts: usize, seed: u64) -> Self {
        Self { restarts, seed, tolerance: 1e-9, max_evals: 4000 }
    }
}

/// Seed for restart `r` of pattern `p`: stream `p` of the master seed, drawn
/// `r + 1` times.
fn restart_seeds(seed: u64, pattern_index: usize, restarts: usize) -> Vec<u64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(pattern_index as u64);
    (0..restarts).map(|_| rng.next_u64()).collect()
}

/// Multi-start search over real coefficients for each pattern. Output is
/// independent of thread scheduling.
pub fn search_perm_invariant(
    errors: &ErrorSet,
    patterns: &[SupportPattern],
    error_classes: &str,
    options: SearchOptions,
) -> Result<SearchReport> {
    if patterns.is_empty() {
        return Err(Error::InvalidArgument("no support patterns to search".into()));
    }
    if options.restarts == 0 {
        return Err(Error::InvalidArgument("the restart budget must be at least 1".into()));
    }
    let n = errors.n();
    if let Some(p) = patterns.iter().find(|p| p.n != n) {
        return Err(Error::DimensionMismatch(p.n, n));
    }
    let basis = BasisGram::new(errors)?;
    let mut results: Vec<(usize, SearchResult)> = patterns
        .par_iter()
        .enumerate()
        .map(|(index, pattern)| {
            let objective = Objective::new(pattern, &basis);
            let seeds = restart_seeds(options.seed, index, options.restarts);
            let runs: Vec<(Vec<f64>, f64)> = seeds
                .par_iter()
                .map(|&s| {
                    let mut rng = ChaCha8Rng::seed_from_u64(s);
                    let start: Vec<f64> =
                        (0..objective.parameter_count()).map(|_| rng.random_range(0.0..std::f64::consts::PI)).collect();
                    let (x, v, _) =
                        nelder_mead(|a| objective.value(a), start, 0.4, options.max_evals, options.tolerance * 1e-3);
                    (x, v)
                })
                .collect();
            let (best_restart, (angles, residual)) = runs
                .into_iter()
                .enumerate()
                .reduce(|a, b| if b.1 .1 < a.1 .1 { b } else { a })
                .expect("at least one restart");
            let y = objective.coefficients(&angles);
            (index, finish_result(pattern, &y, residual, best_restart, options))
        })
        .collect();
    results.sort_by(|a, b| a.1.residual.total_cmp(&b.1.residual).then(a.0.cmp(&b.0)));
    let notes = vec![
        "coefficients are searched over the reals only".into(),
        "sign-pattern variants of the permutation sums are not searched".into(),
        "residual is measured on unit-norm words".into(),
    ];
    Ok(SearchReport {
        n,
        errors: error_classes.to_string(),
        seed: options.seed,
        restarts: options.restarts,
        tolerance: options.tolerance,
        results: results.into_iter().map(|(_, r)| r).collect(),
        notes,
    })
}

fn finish_result(
    pattern: &SupportPattern,
    y: &[f64],
    residual: f64,
    best_restart: usize,
    options: SearchOptions,
) -> SearchResult {
    let n = pattern.n;
    let w0: Vec<usize> = pattern.word0_weights.iter().copied().collect();
    let a = |k: usize, v: f64| v / (binomial(n, k) as f64).sqrt();
    let raw0: Vec<(usize, f64)> = w0.iter().zip(y).map(|(&k, &v)| (k, a(k, v))).collect();
    let raw1: Vec<(usize, f64)> = if pattern.dual_flip_related {
        raw0.iter().map(|&(k, v)| (n - k, v)).collect()
    } else {
        pattern.word1_weights.iter().zip(&y[w0.len()..]).map(|(&k, &v)| (k, a(k, v))).collect()
    };
    let lead = raw0.first().map(|p| p.1).filter(|v| v.abs() > 1e-12).unwrap_or(1.0);
    let lead1 = if pattern.dual_flip_related {
        lead
    } else {
        raw1.first().map(|p| p.1).filter(|v| v.abs() > 1e-12).unwrap_or(1.0)
    };
    SearchResult {
        pattern: pattern.clone(),
        word0: raw0.into_iter().map(|(k, v)| (k, v / lead)).collect(),
        word1: raw1.into_iter().map(|(k, v)| (k, v / lead1)).collect(),
        residual,
        restarts_used: options.restarts,
        best_restart,
        seed: options.seed,
    }
}
