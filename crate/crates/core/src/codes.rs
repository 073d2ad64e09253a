//! Code construction, the `qexch-code v1` file format, and logical states.
//!
//! Words are kept exactly as written, unnormalized. Normalization only
//! happens when crossing into floating point.

use std::collections::{BTreeMap, HashSet};
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{format_rational, parse_rational, rational, ExactScalar};
use crate::qstate::{bit_string, parse_bits, weight_class, FloatState, StateVector};

pub const CODE_FORMAT: &str = "qexch-code v1";

pub const BUILTIN_CODES: &[(&str, &str)] = &[
    ("shor9", "Shor's 9-qubit code (bold triplet reading), 4 terms per word"),
    ("exch9", "permutation-invariant 9-qubit exchange code, coefficients 1 and 1/sqrt(28)"),
    ("rep3", "3-qubit repetition code |000>, |111>"),
];

const SHOR9_NOTE: &str = "Shor's 9-qubit code. Each bold symbol in the usual short form stands for a \
triple of equal bits, so |011> (bold) is |000 111 111>. Words are unnormalized (norm^2 = 4).";
const EXCH9_NOTE: &str = "Permutation-invariant 9-qubit code: |0^9> + (1/sqrt 28) Sum_P |1^6 0^3> and its \
bit-flipped partner. Words are unnormalized (norm^2 = 4).";
const REP3_NOTE: &str = "3-qubit repetition code |000>, |111>.";

/// Logical index `i` and multiplicity index `m` of a word in an extended code.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WordIndex {
    pub logical: usize,
    pub multiplicity: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CodeWord {
    pub label: String,
    pub index: Option<WordIndex>,
    pub state: StateVector,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Code {
    name: String,
    description: Option<String>,
    n: usize,
    radicand: u64,
    words: Vec<CodeWord>,
}

impl Code {
    pub fn new(name: impl Into<String>, words: Vec<CodeWord>) -> Result<Self> {
        let first = words.first().ok_or_else(|| Error::Code("a code needs at least one word".into()))?;
        let (n, radicand) = (first.state.n(), first.state.radicand());
        let mut labels = HashSet::new();
        for word in &words {
            if word.state.n() != n {
                return Err(Error::Code(format!("word {} has {} qubits, expected {n}", word.label, word.state.n())));
            }
            if word.state.radicand() != radicand {
                return Err(Error::RadicandMismatch(word.state.radicand(), radicand));
            }
            if word.state.is_empty() {
                return Err(Error::Code(format!("word {} is zero", word.label)));
            }
            if !labels.insert(word.label.clone()) {
                return Err(Error::Code(format!("duplicate word label {}", word.label)));
            }
        }
        Ok(Self { name: name.into(), description: None, n, radicand, words })
    }

    /// Convenience constructor from `(label, state)` pairs without indices.
    pub fn from_states(name: impl Into<String>, words: Vec<(String, StateVector)>) -> Result<Self> {
        Self::new(name, words.into_iter().map(|(label, state)| CodeWord { label, index: None, state }).collect())
    }

    pub fn with_description(mut self, description: impl Into<String>) -> Self {
        self.description = Some(description.into());
        self
    }

    /// Attaches `(logical, multiplicity)` labels, one per word.
    pub fn with_indices(mut self, indices: &[WordIndex]) -> Result<Self> {
        if indices.len() != self.words.len() {
            return Err(Error::Code(format!("{} indices for {} words", indices.len(), self.words.len())));
        }
        let unique: HashSet<_> = indices.iter().collect();
        if unique.len() != indices.len() {
            return Err(Error::Code("duplicate (logical, multiplicity) index".into()));
        }
        for (word, index) in self.words.iter_mut().zip(indices) {
            word.index = Some(*index);
        }
        Ok(self)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn description(&self) -> Option<&str> {
        self.description.as_deref()
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn radicand(&self) -> u64 {
        self.radicand
    }

    pub fn words(&self) -> &[CodeWord] {
        &self.words
    }

    pub fn states(&self) -> impl Iterator<Item = &StateVector> {
        self.words.iter().map(|w| &w.state)
    }

    pub fn labels(&self) -> Vec<String> {
        self.words.iter().map(|w| w.label.clone()).collect()
    }

    pub fn to_float(&self) -> FloatCode {
        FloatCode {
            name: self.name.clone(),
            n: self.n,
            words: self.words.iter().map(|w| (w.label.clone(), w.state.to_float())).collect(),
        }
    }
}

/// A code with floating-point amplitudes, as produced by search or by
/// converting an exact code.
#[derive(Clone, Debug, PartialEq)]
pub struct FloatCode {
    pub name: String,
    pub n: usize,
    pub words: Vec<(String, FloatState)>,
}

impl FloatCode {
    pub fn states(&self) -> impl Iterator<Item = &FloatState> {
        self.words.iter().map(|(_, s)| s)
    }

    /// Same code with every word scaled to unit norm.
    pub fn normalized(&self) -> Result<FloatCode> {
        Ok(FloatCode {
            name: self.name.clone(),
            n: self.n,
            words: self.words.iter().map(|(l, s)| Ok((l.clone(), s.normalized()?))).collect::<Result<_>>()?,
        })
    }
}

fn sum_of_kets(kets: &[&str]) -> StateVector {
    kets.iter()
        .map(|b| StateVector::basis(b).expect("valid ket"))
        .reduce(|a, b| a.add(&b).expect("same register"))
        .expect("non-empty")
}

pub fn builtin_code(name: &str) -> Result<Code> {
    match name {
        "shor9" => {
            let c0 = sum_of_kets(&["000000000", "000111111", "111000111", "111111000"]);
            let c1 = sum_of_kets(&["111111111", "111000000", "000111000", "000000111"]);
            Ok(Code::from_states("shor9", vec![("c_0".into(), c0), ("c_1".into(), c1)])?.with_description(SHOR9_NOTE))
        }
        "exch9" => {
            let inv_sqrt28 = ExactScalar::surd(rational(0, 1), rational(1, 28), 28);
            let one = ExactScalar::one(28);
            let word = |heavy: usize, light: usize| PermInvariantSpec {
                n: 9,
                coefficients: BTreeMap::from([(heavy, one.clone()), (light, inv_sqrt28.clone())]),
            };
            Ok(perm_invariant_code("exch9", &[("C_0".into(), word(0, 6)), ("C_1".into(), word(9, 3))])?
                .with_description(EXCH9_NOTE))
        }
        "rep3" => {
            let words = vec![("C_0".into(), sum_of_kets(&["000"])), ("C_1".into(), sum_of_kets(&["111"]))];
            Ok(Code::from_states("rep3", words)?.with_description(REP3_NOTE))
        }
        other => Err(Error::UnknownCode(other.to_string())),
    }
}

/// Coefficients `a_κ` of one permutation-invariant word.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PermInvariantSpec {
    pub n: usize,
    pub coefficients: BTreeMap<usize, ExactScalar>,
}

// The common radicand of a set of scalars: Gaussian values embed into any
// field, anything with a radical part fixes it.
fn common_radicand<'a>(values: impl Iterator<Item = &'a ExactScalar>) -> Result<u64> {
    let mut found = 1u64;
    for value in values {
        if value.radicand() != 1 && !value.is_gaussian() {
            if found != 1 && found != value.radicand() {
                return Err(Error::RadicandMismatch(found, value.radicand()));
            }
            found = value.radicand();
        }
    }
    Ok(found)
}

/// Each word is `Σ_κ a_κ Σ_P |1^κ 0^(n-κ)⟩`.
pub fn perm_invariant_code(name: &str, words: &[(String, PermInvariantSpec)]) -> Result<Code> {
    let radicand = common_radicand(words.iter().flat_map(|(_, spec)| spec.coefficients.values()))?;
    let mut states = Vec::new();
    for (label, spec) in words {
        let mut state = StateVector::zero(spec.n, radicand)?;
        for (&weight, coeff) in &spec.coefficients {
            if weight > spec.n {
                return Err(Error::WeightOutOfRange { weight, n: spec.n });
            }
            state = state.add(&StateVector::perm_sum(spec.n, weight, &coeff.embed(radicand)?)?)?;
        }
        if state.is_empty() {
            return Err(Error::Code(format!("word {label} has no nonzero coefficient")));
        }
        states.push((label.clone(), state));
    }
    Code::from_states(name, states)
}

/// `α·Ĉ_0 + β·Ĉ_1` over unit-normalized words, renormalized.
pub fn logical_state(code: &Code, alpha: Complex64, beta: Complex64) -> Result<FloatState> {
    logical_state_float(&code.to_float(), alpha, beta)
}

pub fn logical_state_float(code: &FloatCode, alpha: Complex64, beta: Complex64) -> Result<FloatState> {
    if code.words.len() != 2 {
        return Err(Error::Code(format!("logical states need a two-word code, got {} words", code.words.len())));
    }
    if alpha.norm() == 0.0 && beta.norm() == 0.0 {
        return Err(Error::InvalidArgument("alpha and beta are both zero".into()));
    }
    let c0 = code.words[0].1.normalized()?;
    let c1 = code.words[1].1.normalized()?;
    c0.scale(alpha).add_scaled(beta, &c1)?.normalized()
}

// ---- file format ----

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoeffDoc {
    #[serde(default = "zero_text")]
    pub a: String,
    #[serde(default = "zero_text")]
    pub b: String,
    #[serde(default = "zero_text")]
    pub c: String,
    #[serde(default = "zero_text")]
    pub d: String,
}

fn zero_text() -> String {
    "0".into()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum TermDoc {
    Basis { coeff: CoeffDoc, bits: String },
    Permsum { coeff: CoeffDoc, weight: usize },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WordDoc {
    pub label: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub index: Option<WordIndex>,
    pub terms: Vec<TermDoc>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CodeDoc {
    pub format: String,
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
    pub n: usize,
    pub radicand: u64,
    pub words: Vec<WordDoc>,
}

fn coeff_doc(x: &ExactScalar) -> CoeffDoc {
    CoeffDoc {
        a: format_rational(x.a()),
        b: format_rational(x.b()),
        c: format_rational(x.c()),
        d: format_rational(x.d()),
    }
}

fn coeff_from_doc(doc: &CoeffDoc, radicand: u64) -> Result<ExactScalar> {
    ExactScalar::new(
        parse_rational(&doc.a)?,
        parse_rational(&doc.b)?,
        parse_rational(&doc.c)?,
        parse_rational(&doc.d)?,
        radicand,
    )
}

// Full weight classes with a constant amplitude become permsum terms; the
// rest are written out ket by ket.
fn word_terms(state: &StateVector) -> Vec<TermDoc> {
    let n = state.n();
    let mut by_weight: BTreeMap<u32, Vec<(u32, &ExactScalar)>> = BTreeMap::new();
    for (bits, amp) in state.terms() {
        by_weight.entry(bits.count_ones()).or_default().push((bits, amp));
    }
    let mut terms = Vec::new();
    for (weight, entries) in by_weight {
        let full = entries.len() == weight_class(n, weight as usize).len();
        let constant = entries.windows(2).all(|w| w[0].1 == w[1].1);
        if full && constant && entries.len() > 1 {
            terms.push(TermDoc::Permsum { coeff: coeff_doc(entries[0].1), weight: weight as usize });
        } else {
            terms.extend(
                entries
                    .into_iter()
                    .map(|(bits, amp)| TermDoc::Basis { coeff: coeff_doc(amp), bits: bit_string(bits, n) }),
            );
        }
    }
    terms
}

pub fn code_to_doc(code: &Code) -> CodeDoc {
    CodeDoc {
        format: CODE_FORMAT.into(),
        name: code.name.clone(),
        description: code.description.clone(),
        n: code.n,
        radicand: code.radicand,
        words: code
            .words
            .iter()
            .map(|w| WordDoc { label: w.label.clone(), index: w.index, terms: word_terms(&w.state) })
            .collect(),
    }
}

pub fn code_from_doc(doc: &CodeDoc) -> Result<Code> {
    if doc.format != CODE_FORMAT {
        return Err(Error::Parse(format!("unsupported format '{}', expected '{CODE_FORMAT}'", doc.format)));
    }
    let mut words = Vec::new();
    for word in &doc.words {
        let mut state = StateVector::zero(doc.n, doc.radicand)?;
        for term in &word.terms {
            let piece = match term {
                TermDoc::Basis { coeff, bits } => {
                    let (key, width) = parse_bits(bits)?;
                    if width != doc.n {
                        return Err(Error::Code(format!(
                            "word {}: ket '{bits}' has {width} qubits, expected {}",
                            word.label, doc.n
                        )));
                    }
                    StateVector::from_terms(doc.n, doc.radicand, [(key, coeff_from_doc(coeff, doc.radicand)?)])?
                }
                TermDoc::Permsum { coeff, weight } => {
                    StateVector::perm_sum(doc.n, *weight, &coeff_from_doc(coeff, doc.radicand)?)?
                }
            };
            state = state.add(&piece)?;
        }
        words.push(CodeWord { label: word.label.clone(), index: word.index, state });
    }
    let code = Code::new(doc.name.clone(), words)?;
    Ok(match &doc.description {
        Some(text) => code.with_description(text.clone()),
        None => code,
    })
}

pub fn code_to_json(code: &Code) -> String {
    let mut text = serde_json::to_string_pretty(&code_to_doc(code)).expect("code documents serialize");
    text.push('\n');
    text
}

pub fn code_from_json(text: &str) -> Result<Code> {
    let doc: CodeDoc = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    code_from_doc(&doc)
}

pub fn save_code(code: &Code, path: &Path) -> Result<()> {
    std::fs::write(path, code_to_json(code))?;
    Ok(())
}

pub fn load_code(path: &Path) -> Result<Code> {
    code_from_json(&std::fs::read_to_string(path)?)
}

/// A built-in name or a path to a code file.
pub fn resolve_code(reference: &str) -> Result<Code> {
    if BUILTIN_CODES.iter().any(|(name, _)| *name == reference) {
        return builtin_code(reference);
    }
    let path = Path::new(reference);
    if path.exists() {
        return load_code(path);
    }
    Err(Error::UnknownCode(reference.to_string()))
}
