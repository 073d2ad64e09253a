//! Symbolic error operators and the standard error sets.
//!
//! An exchange `E_jk` is applied as the transposition of qubits `j` and `k`.
//! [`exchange_as_pauli_sum`] evaluates the four-term Pauli form
//! `½(I⊗I + Z⊗Z + X⊗X + Y⊗Y)` literally and is kept as an independent check.

use std::collections::{BTreeSet, HashSet};
use std::fmt;
use std::str::FromStr;

use rand::Rng;

use crate::error::{Error, Result};
use crate::field::{rational, ExactScalar};
use crate::qstate::{FloatState, PauliAxis, Permutation, StateVector};

/// Anything a symbolic error can act on.
pub trait ErrorTarget: Sized {
    fn qubits(&self) -> usize;
    fn pauli(&self, axis: PauliAxis, k: usize) -> Result<Self>;
    fn permute(&self, perm: &Permutation) -> Result<Self>;
}

impl ErrorTarget for StateVector {
    fn qubits(&self) -> usize {
        self.n()
    }
    fn pauli(&self, axis: PauliAxis, k: usize) -> Result<Self> {
        self.apply_pauli(axis, k)
    }
    fn permute(&self, perm: &Permutation) -> Result<Self> {
        self.apply_permutation(perm)
    }
}

impl ErrorTarget for FloatState {
    fn qubits(&self) -> usize {
        self.n()
    }
    fn pauli(&self, axis: PauliAxis, k: usize) -> Result<Self> {
        self.apply_pauli(axis, k)
    }
    fn permute(&self, perm: &Permutation) -> Result<Self> {
        self.apply_permutation(perm)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum ErrorKind {
    Identity,
    Pauli {
        axis: PauliAxis,
        qubit: usize,
    },
    /// Always `j < k`.
    Exchange {
        j: usize,
        k: usize,
    },
    Permutation(Permutation),
    /// Flattened, length ≥ 2; applied right to left.
    Product(Vec<ErrorOp>),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ErrorOp {
    kind: ErrorKind,
    label: String,
}

fn pair_label(prefix: char, j: usize, k: usize) -> String {
    if j < 10 && k < 10 {
        format!("{prefix}_{j}{k}")
    } else {
        format!("{prefix}_{j},{k}")
    }
}

impl ErrorOp {
    pub fn identity() -> Self {
        Self { kind: ErrorKind::Identity, label: "I".into() }
    }

    pub fn pauli(axis: PauliAxis, qubit: usize) -> Result<Self> {
        if qubit == 0 {
            return Err(Error::IndexOutOfRange { index: 0, n: 0 });
        }
        Ok(Self { kind: ErrorKind::Pauli { axis, qubit }, label: format!("{}_{}", axis.symbol(), qubit) })
    }

    pub fn x(qubit: usize) -> Self {
        Self::pauli(PauliAxis::X, qubit).expect("qubit index is 1-based")
    }

    pub fn y(qubit: usize) -> Self {
        Self::pauli(PauliAxis::Y, qubit).expect("qubit index is 1-based")
    }

    pub fn z(qubit: usize) -> Self {
        Self::pauli(PauliAxis::Z, qubit).expect("qubit index is 1-based")
    }

    pub fn exchange(j: usize, k: usize) -> Result<Self> {
        if j == 0 || j >= k {
            return Err(Error::InvalidExchange(j, k));
        }
        Ok(Self { kind: ErrorKind::Exchange { j, k }, label: pair_label('E', j, k) })
    }

    pub fn permutation(perm: Permutation) -> Self {
        if perm.is_identity() {
            return Self::identity();
        }
        let label = perm.to_string();
        Self { kind: ErrorKind::Permutation(perm), label }
    }

    /// `outer · inner`: apply `inner` first, then `outer`.
    pub fn compose(outer: &ErrorOp, inner: &ErrorOp) -> ErrorOp {
        let mut factors = Vec::new();
        for op in [outer, inner] {
            match &op.kind {
                ErrorKind::Identity => {}
                ErrorKind::Product(parts) => factors.extend(parts.iter().cloned()),
                _ => factors.push(op.clone()),
            }
        }
        match factors.len() {
            0 => ErrorOp::identity(),
            1 => factors.pop().expect("one factor"),
            _ => {
                let label = factors.iter().map(|f| f.label.as_str()).collect::<Vec<_>>().join("·");
                ErrorOp { kind: ErrorKind::Product(factors), label }
            }
        }
    }

    pub fn kind(&self) -> &ErrorKind {
        &self.kind
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn is_identity(&self) -> bool {
        matches!(self.kind, ErrorKind::Identity)
    }

    /// Checks that every index fits an `n`-qubit register.
    pub fn validate(&self, n: usize) -> Result<()> {
        match &self.kind {
            ErrorKind::Identity => Ok(()),
            ErrorKind::Pauli { qubit, .. } => {
                if *qubit > n {
                    Err(Error::IndexOutOfRange { index: *qubit, n })
                } else {
                    Ok(())
                }
            }
            ErrorKind::Exchange { k, .. } => {
                if *k > n {
                    Err(Error::IndexOutOfRange { index: *k, n })
                } else {
                    Ok(())
                }
            }
            ErrorKind::Permutation(perm) => {
                if perm.len() != n {
                    Err(Error::DimensionMismatch(perm.len(), n))
                } else {
                    Ok(())
                }
            }
            ErrorKind::Product(parts) => parts.iter().try_for_each(|p| p.validate(n)),
        }
    }

    pub fn apply<S: ErrorTarget + Clone>(&self, state: &S) -> Result<S> {
        match &self.kind {
            ErrorKind::Identity => Ok(state.clone()),
            ErrorKind::Pauli { axis, qubit } => state.pauli(*axis, *qubit),
            ErrorKind::Exchange { j, k } => {
                let perm = Permutation::transposition(state.qubits(), *j, *k)?;
                state.permute(&perm)
            }
            ErrorKind::Permutation(perm) => state.permute(perm),
            ErrorKind::Product(parts) => {
                let mut current = state.clone();
                for part in parts.iter().rev() {
                    current = part.apply(&current)?;
                }
                Ok(current)
            }
        }
    }
}

impl fmt::Display for ErrorOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label)
    }
}

pub fn apply_error<S: ErrorTarget + Clone>(error: &ErrorOp, state: &S) -> Result<S> {
    error.apply(state)
}

/// `½(s + Z_jZ_k s + X_jX_k s + Y_jY_k s)`, evaluated term by term.
pub fn exchange_as_pauli_sum(j: usize, k: usize, state: &StateVector) -> Result<StateVector> {
    if j == 0 || j >= k {
        return Err(Error::InvalidExchange(j, k));
    }
    if k > state.n() {
        return Err(Error::IndexOutOfRange { index: k, n: state.n() });
    }
    let mut total = state.clone();
    for axis in [PauliAxis::Z, PauliAxis::X, PauliAxis::Y] {
        let term = state.apply_pauli(axis, k)?.apply_pauli(axis, j)?;
        total = total.add(&term)?;
    }
    total.scale(&ExactScalar::from_rational(rational(1, 2), state.radicand()))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ErrorClass {
    Identity,
    X,
    Y,
    Z,
    Exchange,
}

impl FromStr for ErrorClass {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "identity" => Ok(ErrorClass::Identity),
            "x" => Ok(ErrorClass::X),
            "y" => Ok(ErrorClass::Y),
            "z" => Ok(ErrorClass::Z),
            "exchange" => Ok(ErrorClass::Exchange),
            other => Err(Error::Parse(format!("unknown error class '{other}'"))),
        }
    }
}

/// Parses `"identity,x,y,z,pauli,exchange"`-style lists. `pauli` is `x,y,z`.
pub fn parse_error_classes(text: &str) -> Result<BTreeSet<ErrorClass>> {
    let mut out = BTreeSet::new();
    for token in text.split(',') {
        let token = token.trim();
        if token.is_empty() {
            continue;
        }
        if token == "pauli" {
            out.extend([ErrorClass::X, ErrorClass::Y, ErrorClass::Z]);
        } else {
            out.insert(token.parse()?);
        }
    }
    if out.is_empty() {
        return Err(Error::ErrorSet("empty error class list".into()));
    }
    Ok(out)
}

pub fn format_error_classes(classes: &BTreeSet<ErrorClass>) -> String {
    classes
        .iter()
        .map(|c| match c {
            ErrorClass::Identity => "identity",
            ErrorClass::X => "x",
            ErrorClass::Y => "y",
            ErrorClass::Z => "z",
            ErrorClass::Exchange => "exchange",
        })
        .collect::<Vec<_>>()
        .join(",")
}

/// Ordered error basis with the identity at index 0.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ErrorSet {
    n: usize,
    ops: Vec<ErrorOp>,
}

impl ErrorSet {
    pub fn new(n: usize, ops: Vec<ErrorOp>) -> Result<Self> {
        if ops.first().map(ErrorOp::is_identity) != Some(true) {
            return Err(Error::ErrorSet("the identity must come first".into()));
        }
        if ops.iter().filter(|op| op.is_identity()).count() != 1 {
            return Err(Error::ErrorSet("the identity must appear exactly once".into()));
        }
        let mut labels = HashSet::new();
        for op in &ops {
            op.validate(n)?;
            if !labels.insert(op.label.clone()) {
                return Err(Error::ErrorSet(format!("duplicate label {}", op.label)));
            }
        }
        Ok(Self { n, ops })
    }

    /// Prepends the identity to `ops`.
    pub fn with_identity(n: usize, ops: Vec<ErrorOp>) -> Result<Self> {
        let mut all = vec![ErrorOp::identity()];
        all.extend(ops);
        Self::new(n, all)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn ops(&self) -> &[ErrorOp] {
        &self.ops
    }

    pub fn len(&self) -> usize {
        self.ops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }

    pub fn labels(&self) -> Vec<String> {
        self.ops.iter().map(|op| op.label.clone()).collect()
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.ops.iter().position(|op| op.label == label)
    }

    /// Remarks about the set worth surfacing in reports.
    pub fn notes(&self) -> Vec<String> {
        let exchanges = self.ops.iter().filter(|op| matches!(op.kind, ErrorKind::Exchange { .. })).count();
        let mut notes = Vec::new();
        if self.n == 3 && exchanges > 0 {
            notes.push(format!(
                "3 qubits admit C(3,2) = 3 distinct exchanges (unordered pairs); this set has N = {} \
                 elements, not the N = 10 obtained by counting 6 exchanges",
                self.len()
            ));
        }
        notes
    }
}

/// Identity, then `X_1..X_n`, `Y_1..Y_n`, `Z_1..Z_n`, then `E_jk` in
/// lexicographic order, keeping only requested classes. The identity is
/// always present.
pub fn make_error_set(n: usize, classes: &BTreeSet<ErrorClass>) -> Result<ErrorSet> {
    if classes.is_empty() {
        return Err(Error::ErrorSet("empty error class set".into()));
    }
    if n == 0 {
        return Err(Error::QubitCount(n));
    }
    let mut ops = vec![ErrorOp::identity()];
    for (class, axis) in [(ErrorClass::X, PauliAxis::X), (ErrorClass::Y, PauliAxis::Y), (ErrorClass::Z, PauliAxis::Z)] {
        if classes.contains(&class) {
            ops.extend((1..=n).map(|k| ErrorOp::pauli(axis, k).expect("k >= 1")));
        }
    }
    if classes.contains(&ErrorClass::Exchange) {
        if n < 2 {
            return Err(Error::ErrorSet("exchange errors need at least 2 qubits".into()));
        }
        for j in 1..n {
            for k in j + 1..=n {
                ops.push(ErrorOp::exchange(j, k)?);
            }
        }
    }
    ErrorSet::new(n, ops)
}

/// `count` permutation errors drawn uniformly from S_n.
pub fn sample_permutation_errors<R: Rng + ?Sized>(n: usize, count: usize, rng: &mut R) -> Vec<ErrorOp> {
    (0..count).map(|_| ErrorOp::permutation(Permutation::random(n, rng))).collect()
}
