//! Sparse state vectors over n qubits.
//!
//! Basis strings are packed into a `u32` with qubit 1 as the most significant
//! of the `n` bits, so ascending key order is lexicographic order of the
//! written ket `|b_1 b_2 … b_n⟩`. Qubit indices are 1-based throughout.
//!
//! Two amplitude types share the same Pauli and permutation machinery:
//! [`StateVector`] holds exact [`ExactScalar`] amplitudes, [`FloatState`]
//! holds `Complex64`.

use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64;
use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{Error, Result};
use crate::field::{validate_radicand, ExactScalar};

pub const MAX_QUBITS: usize = 24;

fn check_qubits(n: usize) -> Result<()> {
    if n == 0 || n > MAX_QUBITS {
        Err(Error::QubitCount(n))
    } else {
        Ok(())
    }
}

#[inline]
fn qubit_mask(n: usize, k: usize) -> u32 {
    1u32 << (n - k)
}

/// Renders a key as `|0101⟩`.
pub fn ket(bits: u32, n: usize) -> String {
    format!("|{}⟩", bit_string(bits, n))
}

pub fn bit_string(bits: u32, n: usize) -> String {
    (1..=n).map(|k| if bits & qubit_mask(n, k) != 0 { '1' } else { '0' }).collect()
}

/// Parses a string of `0`/`1` characters (spaces and `_` are ignored).
pub fn parse_bits(text: &str) -> Result<(u32, usize)> {
    let mut bits = 0u32;
    let mut n = 0usize;
    for ch in text.chars() {
        match ch {
            '0' | '1' => {
                n += 1;
                if n > MAX_QUBITS {
                    return Err(Error::QubitCount(n));
                }
                bits = (bits << 1) | u32::from(ch == '1');
            }
            ' ' | '_' => {}
            other => return Err(Error::Parse(format!("non-binary symbol '{other}' in '{text}'"))),
        }
    }
    if n == 0 {
        return Err(Error::Parse("empty bit string".into()));
    }
    Ok((bits, n))
}

/// All `n`-bit keys of Hamming weight `weight`, ascending.
pub fn weight_class(n: usize, weight: usize) -> Vec<u32> {
    if weight > n {
        return Vec::new();
    }
    if weight == 0 {
        return vec![0];
    }
    let limit = 1u64 << n;
    let mut out = Vec::new();
    let mut v: u64 = (1u64 << weight) - 1;
    while v < limit {
        out.push(v as u32);
        // Gosper's hack: next integer with the same popcount
        let t = v | (v - 1);
        v = (t + 1) | (((!t & (t + 1)) - 1) >> (v.trailing_zeros() + 1));
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PauliAxis {
    X,
    Y,
    Z,
}

impl PauliAxis {
    pub fn symbol(self) -> char {
        match self {
            PauliAxis::X => 'X',
            PauliAxis::Y => 'Y',
            PauliAxis::Z => 'Z',
        }
    }
}

/// A bijection on `{1..n}`. The bit at input position `j` moves to output
/// position `perm(j)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Permutation {
    images: Vec<usize>,
}

impl Permutation {
    /// `images[j - 1] = perm(j)`, 1-based.
    pub fn new(images: Vec<usize>) -> Result<Self> {
        let n = images.len();
        if n == 0 {
            return Err(Error::InvalidPermutation("empty".into()));
        }
        let mut seen = vec![false; n];
        for &image in &images {
            if image == 0 || image > n || seen[image - 1] {
                return Err(Error::InvalidPermutation(format!("{images:?} is not a bijection on 1..={n}")));
            }
            seen[image - 1] = true;
        }
        Ok(Self { images })
    }

    pub fn identity(n: usize) -> Self {
        Self { images: (1..=n).collect() }
    }

    pub fn transposition(n: usize, j: usize, k: usize) -> Result<Self> {
        if j == 0 || k == 0 || j > n || k > n {
            return Err(Error::IndexOutOfRange { index: j.max(k), n });
        }
        let mut images: Vec<usize> = (1..=n).collect();
        images.swap(j - 1, k - 1);
        Ok(Self { images })
    }

    pub fn random<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        let mut images: Vec<usize> = (1..=n).collect();
        images.shuffle(rng);
        Self { images }
    }

    pub fn len(&self) -> usize {
        self.images.len()
    }

    pub fn is_empty(&self) -> bool {
        self.images.is_empty()
    }

    pub fn images(&self) -> &[usize] {
        &self.images
    }

    pub fn apply(&self, j: usize) -> usize {
        self.images[j - 1]
    }

    pub fn is_identity(&self) -> bool {
        self.images.iter().enumerate().all(|(idx, &image)| idx + 1 == image)
    }

    /// `self ∘ first`: apply `first`, then `self`.
    pub fn after(&self, first: &Permutation) -> Result<Permutation> {
        if self.len() != first.len() {
            return Err(Error::DimensionMismatch(self.len(), first.len()));
        }
        Ok(Self { images: first.images.iter().map(|&j| self.images[j - 1]).collect() })
    }

    pub fn inverse(&self) -> Permutation {
        let mut images = vec![0; self.len()];
        for (idx, &image) in self.images.iter().enumerate() {
            images[image - 1] = idx + 1;
        }
        Self { images }
    }

    fn permute_key(&self, bits: u32) -> u32 {
        let n = self.len();
        let mut out = 0u32;
        for (idx, &image) in self.images.iter().enumerate() {
            if bits & qubit_mask(n, idx + 1) != 0 {
                out |= qubit_mask(n, image);
            }
        }
        out
    }
}

impl fmt::Display for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.images.iter().map(|i| i.to_string()).collect();
        write!(f, "P[{}]", parts.join(","))
    }
}

/// The operations the shared Pauli/permutation code needs from an amplitude.
pub trait Amplitude: Clone {
    fn is_zero(&self) -> bool;
    fn negate(&self) -> Self;
    fn times_i(&self) -> Self;
}

impl Amplitude for ExactScalar {
    fn is_zero(&self) -> bool {
        ExactScalar::is_zero(self)
    }
    fn negate(&self) -> Self {
        -self
    }
    fn times_i(&self) -> Self {
        self.mul_i()
    }
}

impl Amplitude for Complex64 {
    fn is_zero(&self) -> bool {
        self.re == 0.0 && self.im == 0.0
    }
    fn negate(&self) -> Self {
        -*self
    }
    fn times_i(&self) -> Self {
        Complex64::new(-self.im, self.re)
    }
}

fn pauli_map<A: Amplitude>(amps: &BTreeMap<u32, A>, n: usize, axis: PauliAxis, k: usize) -> Result<BTreeMap<u32, A>> {
    if k == 0 || k > n {
        return Err(Error::IndexOutOfRange { index: k, n });
    }
    let mask = qubit_mask(n, k);
    Ok(amps
        .iter()
        .map(|(&bits, amp)| {
            let set = bits & mask != 0;
            match axis {
                PauliAxis::X => (bits ^ mask, amp.clone()),
                PauliAxis::Z => (bits, if set { amp.negate() } else { amp.clone() }),
                // σ_y|0⟩ = i|1⟩, σ_y|1⟩ = -i|0⟩
                PauliAxis::Y => {
                    let phased = amp.times_i();
                    (bits ^ mask, if set { phased.negate() } else { phased })
                }
            }
        })
        .collect())
}

fn permute_map<A: Amplitude>(amps: &BTreeMap<u32, A>, n: usize, perm: &Permutation) -> Result<BTreeMap<u32, A>> {
    if perm.len() != n {
        return Err(Error::DimensionMismatch(perm.len(), n));
    }
    Ok(amps.iter().map(|(&bits, amp)| (perm.permute_key(bits), amp.clone())).collect())
}

fn histogram<A>(amps: &BTreeMap<u32, A>) -> BTreeMap<u32, usize> {
    let mut out = BTreeMap::new();
    for bits in amps.keys() {
        *out.entry(bits.count_ones()).or_insert(0) += 1;
    }
    out
}

/// Exact sparse state. Zero amplitudes are never stored.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StateVector {
    n: usize,
    radicand: u64,
    amps: BTreeMap<u32, ExactScalar>,
}

impl StateVector {
    pub fn zero(n: usize, radicand: u64) -> Result<Self> {
        check_qubits(n)?;
        validate_radicand(radicand)?;
        Ok(Self { n, radicand, amps: BTreeMap::new() })
    }

    /// Single ket with amplitude 1 over the Gaussian rationals.
    pub fn basis(bits: &str) -> Result<Self> {
        Self::basis_with_radicand(bits, 1)
    }

    pub fn basis_with_radicand(bits: &str, radicand: u64) -> Result<Self> {
        let (key, n) = parse_bits(bits)?;
        let mut state = Self::zero(n, radicand)?;
        state.amps.insert(key, ExactScalar::one(radicand));
        Ok(state)
    }

    /// Builds a state from `(key, amplitude)` pairs, summing repeated keys.
    pub fn from_terms<I>(n: usize, radicand: u64, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (u32, ExactScalar)>,
    {
        let mut state = Self::zero(n, radicand)?;
        for (bits, amp) in terms {
            if n < 32 && bits >> n != 0 {
                return Err(Error::Parse(format!("key {bits:#b} does not fit in {n} qubits")));
            }
            if amp.radicand() != radicand {
                return Err(Error::RadicandMismatch(amp.radicand(), radicand));
            }
            state.accumulate(bits, amp);
        }
        Ok(state)
    }

    fn accumulate(&mut self, bits: u32, amp: ExactScalar) {
        if amp.is_zero() {
            return;
        }
        match self.amps.remove(&bits) {
            None => {
                self.amps.insert(bits, amp);
            }
            Some(existing) => {
                let sum = existing + amp;
                if !sum.is_zero() {
                    self.amps.insert(bits, sum);
                }
            }
        }
    }

    /// `coeff · Σ_P |1…1 0…0⟩`: every distinct string with `weight` ones, once.
    pub fn perm_sum(n: usize, weight: usize, coeff: &ExactScalar) -> Result<Self> {
        check_qubits(n)?;
        if weight > n {
            return Err(Error::WeightOutOfRange { weight, n });
        }
        let mut state = Self::zero(n, coeff.radicand())?;
        if !coeff.is_zero() {
            for bits in weight_class(n, weight) {
                state.amps.insert(bits, coeff.clone());
            }
        }
        Ok(state)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn radicand(&self) -> u64 {
        self.radicand
    }

    pub fn len(&self) -> usize {
        self.amps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amps.is_empty()
    }

    pub fn amplitude(&self, bits: u32) -> Option<&ExactScalar> {
        self.amps.get(&bits)
    }

    pub fn terms(&self) -> impl Iterator<Item = (u32, &ExactScalar)> + '_ {
        self.amps.iter().map(|(&k, v)| (k, v))
    }

    fn check_compatible(&self, other: &Self) -> Result<()> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch(self.n, other.n));
        }
        if self.radicand != other.radicand {
            return Err(Error::RadicandMismatch(self.radicand, other.radicand));
        }
        Ok(())
    }

    /// `⟨self|other⟩`, conjugate-linear in `self`.
    pub fn inner(&self, other: &Self) -> Result<ExactScalar> {
        self.check_compatible(other)?;
        let mut acc = ExactScalar::zero(self.radicand);
        let (small, large, conj_small) =
            if self.amps.len() <= other.amps.len() { (self, other, true) } else { (other, self, false) };
        for (bits, amp) in &small.amps {
            if let Some(partner) = large.amps.get(bits) {
                let product = if conj_small { amp.conj() * partner } else { partner.conj() * amp };
                acc = acc + product;
            }
        }
        Ok(acc)
    }

    pub fn norm_sqr(&self) -> ExactScalar {
        self.inner(self).expect("self-compatible")
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        let mut out = self.clone();
        for (&bits, amp) in &other.amps {
            out.accumulate(bits, amp.clone());
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.scale(&ExactScalar::from_int(-1, other.radicand))?)
    }

    pub fn scale(&self, factor: &ExactScalar) -> Result<Self> {
        if factor.radicand() != self.radicand {
            return Err(Error::RadicandMismatch(factor.radicand(), self.radicand));
        }
        let mut out = Self { n: self.n, radicand: self.radicand, amps: BTreeMap::new() };
        for (&bits, amp) in &self.amps {
            out.accumulate(bits, amp * factor);
        }
        Ok(out)
    }

    /// Re-tags every amplitude into Q(i, √m); see [`ExactScalar::embed`].
    pub fn with_radicand(&self, radicand: u64) -> Result<Self> {
        let amps = self
            .amps
            .iter()
            .map(|(&bits, amp)| Ok((bits, amp.embed(radicand)?)))
            .collect::<Result<BTreeMap<_, _>>>()?;
        Ok(Self { n: self.n, radicand, amps })
    }

    pub fn apply_pauli(&self, axis: PauliAxis, k: usize) -> Result<Self> {
        Ok(Self { n: self.n, radicand: self.radicand, amps: pauli_map(&self.amps, self.n, axis, k)? })
    }

    pub fn apply_permutation(&self, perm: &Permutation) -> Result<Self> {
        Ok(Self { n: self.n, radicand: self.radicand, amps: permute_map(&self.amps, self.n, perm)? })
    }

    pub fn weight_histogram(&self) -> BTreeMap<u32, usize> {
        histogram(&self.amps)
    }

    pub fn to_float(&self) -> FloatState {
        FloatState { n: self.n, amps: self.amps.iter().map(|(&k, v)| (k, v.to_complex())).collect() }
    }
}

impl fmt::Display for StateVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.amps.is_empty() {
            return write!(f, "0");
        }
        for (idx, (&bits, amp)) in self.amps.iter().enumerate() {
            if idx > 0 {
                write!(f, " + ")?;
            }
            if amp.is_one() {
                write!(f, "{}", ket(bits, self.n))?;
            } else {
                write!(f, "({}){}", amp, ket(bits, self.n))?;
            }
        }
        Ok(())
    }
}

/// Floating-point sparse state used at the recovery boundary.
#[derive(Clone, Debug, PartialEq)]
pub struct FloatState {
    n: usize,
    amps: BTreeMap<u32, Complex64>,
}

impl FloatState {
    pub fn zero(n: usize) -> Result<Self> {
        check_qubits(n)?;
        Ok(Self { n, amps: BTreeMap::new() })
    }

    pub fn from_terms<I>(n: usize, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (u32, Complex64)>,
    {
        let mut state = Self::zero(n)?;
        for (bits, amp) in terms {
            if bits >> n != 0 {
                return Err(Error::Parse(format!("key {bits:#b} does not fit in {n} qubits")));
            }
            *state.amps.entry(bits).or_insert(Complex64::new(0.0, 0.0)) += amp;
        }
        state.amps.retain(|_, v| !Amplitude::is_zero(v));
        Ok(state)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.amps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amps.is_empty()
    }

    pub fn amplitude(&self, bits: u32) -> Complex64 {
        self.amps.get(&bits).copied().unwrap_or_default()
    }

    pub fn terms(&self) -> impl Iterator<Item = (u32, Complex64)> + '_ {
        self.amps.iter().map(|(&k, &v)| (k, v))
    }

    pub fn inner(&self, other: &Self) -> Result<Complex64> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch(self.n, other.n));
        }
        let mut acc = Complex64::new(0.0, 0.0);
        if self.amps.len() <= other.amps.len() {
            for (bits, amp) in &self.amps {
                if let Some(partner) = other.amps.get(bits) {
                    acc += amp.conj() * partner;
                }
            }
        } else {
            for (bits, partner) in &other.amps {
                if let Some(amp) = self.amps.get(bits) {
                    acc += amp.conj() * partner;
                }
            }
        }
        Ok(acc)
    }

    pub fn norm(&self) -> f64 {
        self.amps.values().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Unit-norm copy; fails on a zero vector.
    pub fn normalized(&self) -> Result<Self> {
        let norm = self.norm();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::Numerical("cannot normalize a zero vector".into()));
        }
        Ok(self.scale(Complex64::new(1.0 / norm, 0.0)))
    }

    pub fn scale(&self, factor: Complex64) -> Self {
        let mut amps: BTreeMap<u32, Complex64> = self.amps.iter().map(|(&k, &v)| (k, v * factor)).collect();
        amps.retain(|_, v| !Amplitude::is_zero(v));
        Self { n: self.n, amps }
    }

    /// `self + factor · other`.
    pub fn add_scaled(&self, factor: Complex64, other: &Self) -> Result<Self> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch(self.n, other.n));
        }
        let mut amps = self.amps.clone();
        for (&bits, &amp) in &other.amps {
            *amps.entry(bits).or_insert(Complex64::new(0.0, 0.0)) += factor * amp;
        }
        amps.retain(|_, v| !Amplitude::is_zero(v));
        Ok(Self { n: self.n, amps })
    }

    pub fn apply_pauli(&self, axis: PauliAxis, k: usize) -> Result<Self> {
        Ok(Self { n: self.n, amps: pauli_map(&self.amps, self.n, axis, k)? })
    }

    pub fn apply_permutation(&self, perm: &Permutation) -> Result<Self> {
        Ok(Self { n: self.n, amps: permute_map(&self.amps, self.n, perm)? })
    }

    pub fn weight_histogram(&self) -> BTreeMap<u32, usize> {
        histogram(&self.amps)
    }
}
