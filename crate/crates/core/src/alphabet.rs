//! Finite alphabets, probability mass functions, entropy and divergence.
//!
//! All information quantities are in bits. Letters are opaque identifiers;
//! alphabets built from a numeric grid keep the grid value as the letter's
//! label, and large regular alphabets are stored implicitly rather than as
//! one string per letter.

use std::borrow::Cow;
use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::exec::Strategy;

/// Absolute tolerance on the total mass of a pmf.
pub const MASS_TOLERANCE: f64 = 1e-9;
/// Default tolerance for comparing information quantities.
pub const COMPARE_TOLERANCE: f64 = 1e-12;
/// Largest admissible deviation of `(max - min) / step` from an integer.
pub const GRID_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Letter {
    pub id: String,
    pub label: Option<String>,
}

impl Letter {
    pub fn new(id: impl Into<String>) -> Self {
        Letter {
            id: id.into(),
            label: None,
        }
    }

    pub fn labelled(id: impl Into<String>, label: impl Into<String>) -> Self {
        Letter {
            id: id.into(),
            label: Some(label.into()),
        }
    }
}

/// A regular numeric grid `min, min + step, ..., min + steps * step`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    pub min: f64,
    pub max: f64,
    pub step: f64,
    /// Number of intervals; the grid has `steps + 1` points.
    pub steps: usize,
    decimals: usize,
}

impl Grid {
    pub fn value(&self, i: usize) -> f64 {
        if i == self.steps {
            self.max
        } else {
            self.min + i as f64 * self.step
        }
    }

    fn label(&self, i: usize) -> String {
        format!("{:.*}", self.decimals, self.value(i))
    }
}

/// Smallest number of decimals that represents `step` exactly (capped at 12).
fn decimals_of(step: f64) -> usize {
    (0..=12)
        .find(|&d| {
            let scaled = step * 10f64.powi(d as i32);
            (scaled - scaled.round()).abs() < 1e-9 * scaled.abs().max(1.0)
        })
        .unwrap_or(12)
}

#[derive(Debug, Clone)]
enum Repr {
    Named {
        letters: Vec<Letter>,
        index: HashMap<String, usize>,
    },
    /// Letters `"0"`, `"1"`, ..., `"n-1"` without labels.
    Indexed(usize),
    /// Letters identified by grid index and labelled by grid value.
    Grid(Grid),
}

/// The ordered letter set of an alphabet.
#[derive(Debug, Clone)]
pub struct Letters {
    repr: Repr,
}

impl Letters {
    pub fn named(letters: Vec<Letter>) -> Result<Self, AlphabetError> {
        if letters.is_empty() {
            return Err(AlphabetError::Empty);
        }
        let mut index = HashMap::with_capacity(letters.len());
        for (i, l) in letters.iter().enumerate() {
            if index.insert(l.id.clone(), i).is_some() {
                return Err(AlphabetError::DuplicateLetter(l.id.clone()));
            }
        }
        Ok(Letters {
            repr: Repr::Named { letters, index },
        })
    }

    pub fn indexed(n: usize) -> Result<Self, AlphabetError> {
        if n == 0 {
            return Err(AlphabetError::Empty);
        }
        Ok(Letters { repr: Repr::Indexed(n) })
    }

    pub fn grid(min: f64, max: f64, step: f64) -> Result<Self, AlphabetError> {
        if !(min.is_finite() && max.is_finite() && step.is_finite()) {
            return Err(AlphabetError::NonFiniteGrid);
        }
        if step <= 0.0 {
            return Err(AlphabetError::NonPositiveStep(step));
        }
        if max < min {
            return Err(AlphabetError::EmptyRange { min, max });
        }
        let ratio = (max - min) / step;
        let steps = ratio.round();
        if (ratio - steps).abs() > GRID_TOLERANCE {
            return Err(AlphabetError::NonIntegralGrid { min, max, step });
        }
        Ok(Letters {
            repr: Repr::Grid(Grid {
                min,
                max,
                step,
                steps: steps as usize,
                decimals: decimals_of(step),
            }),
        })
    }

    pub fn len(&self) -> usize {
        match &self.repr {
            Repr::Named { letters, .. } => letters.len(),
            Repr::Indexed(n) => *n,
            Repr::Grid(g) => g.steps + 1,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn id(&self, i: usize) -> Cow<'_, str> {
        match &self.repr {
            Repr::Named { letters, .. } => Cow::Borrowed(letters[i].id.as_str()),
            Repr::Indexed(_) | Repr::Grid(_) => Cow::Owned(i.to_string()),
        }
    }

    pub fn label(&self, i: usize) -> Option<Cow<'_, str>> {
        match &self.repr {
            Repr::Named { letters, .. } => letters[i].label.as_deref().map(Cow::Borrowed),
            Repr::Indexed(_) => None,
            Repr::Grid(g) => Some(Cow::Owned(g.label(i))),
        }
    }

    pub fn letter(&self, i: usize) -> Letter {
        Letter {
            id: self.id(i).into_owned(),
            label: self.label(i).map(Cow::into_owned),
        }
    }

    pub fn position(&self, id: &str) -> Option<usize> {
        match &self.repr {
            Repr::Named { index, .. } => index.get(id).copied(),
            Repr::Indexed(_) | Repr::Grid(_) => {
                let i: usize = id.parse().ok()?;
                (i < self.len() && i.to_string() == id).then_some(i)
            }
        }
    }

    /// Numeric value of a letter: the grid value, else the label or id parsed as a real.
    pub fn value(&self, i: usize) -> Option<f64> {
        match &self.repr {
            Repr::Grid(g) => Some(g.value(i)),
            Repr::Indexed(_) => Some(i as f64),
            Repr::Named { letters, .. } => {
                let l = &letters[i];
                l.label
                    .as_deref()
                    .and_then(|s| s.parse().ok())
                    .or_else(|| l.id.parse().ok())
            }
        }
    }

    pub fn as_grid(&self) -> Option<&Grid> {
        match &self.repr {
            Repr::Grid(g) => Some(g),
            _ => None,
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = Letter> + '_ {
        (0..self.len()).map(|i| self.letter(i))
    }
}

impl PartialEq for Letters {
    fn eq(&self, other: &Self) -> bool {
        match (&self.repr, &other.repr) {
            (Repr::Named { letters: a, .. }, Repr::Named { letters: b, .. }) => a == b,
            (Repr::Indexed(a), Repr::Indexed(b)) => a == b,
            (Repr::Grid(a), Repr::Grid(b)) => a == b,
            _ => {
                self.len() == other.len()
                    && (0..self.len()).all(|i| self.id(i) == other.id(i) && self.label(i) == other.label(i))
            }
        }
    }
}

/// Whether two letter sets are the same, with a pointer fast path.
pub fn same_letters(a: &Arc<Letters>, b: &Arc<Letters>) -> bool {
    Arc::ptr_eq(a, b) || **a == **b
}

/// One broken pmf invariant, with letter-level detail.
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    MassSum { sum: f64 },
    NegativeMass { letter: String, mass: f64 },
    NonFiniteMass { letter: String },
    LengthMismatch { letters: usize, masses: usize },
    MissingKey { letter: String },
    UnknownKey { key: String },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::MassSum { sum } => write!(f, "mass sum {sum}"),
            Violation::NegativeMass { letter, mass } => {
                write!(f, "negative mass {mass} at letter '{letter}'")
            }
            Violation::NonFiniteMass { letter } => {
                write!(f, "non-finite mass at letter '{letter}'")
            }
            Violation::LengthMismatch { letters, masses } => {
                write!(f, "key mismatch: {letters} letters but {masses} masses")
            }
            Violation::MissingKey { letter } => {
                write!(f, "key mismatch: no mass for letter '{letter}'")
            }
            Violation::UnknownKey { key } => {
                write!(f, "key mismatch: mass for unknown letter '{key}'")
            }
        }
    }
}

fn join_violations(v: &[Violation]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join("; ")
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AlphabetError {
    #[error("alphabet has no letters")]
    Empty,
    #[error("duplicate letter id '{0}'")]
    DuplicateLetter(String),
    #[error("invalid pmf: {}", join_violations(.0))]
    Invalid(Vec<Violation>),
    #[error("grid bounds and step must be finite")]
    NonFiniteGrid,
    #[error("grid step must be positive, got {0}")]
    NonPositiveStep(f64),
    #[error("grid max {max} is below min {min}")]
    EmptyRange { min: f64, max: f64 },
    #[error("({max} - {min}) / {step} is not an integer")]
    NonIntegralGrid { min: f64, max: f64, step: f64 },
    #[error("letter sets differ ({left} vs {right} letters)")]
    LetterMismatch { left: usize, right: usize },
}

/// A probability mass function over an ordered letter set.
///
/// Masses are stored densely in letter order. A `Pmf` built with
/// [`Pmf::new`] is valid; [`Pmf::from_raw`] skips the checks so that
/// invalid input can still be inspected with [`Pmf::violations`].
#[derive(Debug, Clone)]
pub struct Pmf {
    letters: Arc<Letters>,
    masses: Vec<f64>,
}

impl Pmf {
    pub fn new(letters: Arc<Letters>, masses: Vec<f64>) -> Result<Self, AlphabetError> {
        let pmf = Pmf::from_raw(letters, masses);
        pmf.validate()?;
        Ok(pmf)
    }

    pub fn from_raw(letters: Arc<Letters>, masses: Vec<f64>) -> Self {
        Pmf { letters, masses }
    }

    pub fn uniform(letters: Arc<Letters>) -> Self {
        let n = letters.len();
        let masses = vec![1.0 / n as f64; n];
        Pmf { letters, masses }
    }

    /// Point mass on letter `i`.
    pub fn degenerate(letters: Arc<Letters>, i: usize) -> Self {
        let mut masses = vec![0.0; letters.len()];
        masses[i] = 1.0;
        Pmf { letters, masses }
    }

    pub fn letters(&self) -> &Arc<Letters> {
        &self.letters
    }

    pub fn masses(&self) -> &[f64] {
        &self.masses
    }

    pub fn len(&self) -> usize {
        self.masses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.masses.is_empty()
    }

    pub fn mass(&self, id: &str) -> Option<f64> {
        self.letters.position(id).and_then(|i| self.masses.get(i).copied())
    }

    pub fn total(&self) -> f64 {
        Strategy::default().sum(self.masses.len(), |i| self.masses[i])
    }

    /// Every broken invariant; empty when the pmf is valid.
    pub fn violations(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        if self.masses.len() != self.letters.len() {
            out.push(Violation::LengthMismatch {
                letters: self.letters.len(),
                masses: self.masses.len(),
            });
        }
        for (i, &m) in self.masses.iter().enumerate() {
            let letter = || {
                if i < self.letters.len() {
                    self.letters.id(i).into_owned()
                } else {
                    format!("#{i}")
                }
            };
            if !m.is_finite() {
                out.push(Violation::NonFiniteMass { letter: letter() });
            } else if m < 0.0 {
                out.push(Violation::NegativeMass {
                    letter: letter(),
                    mass: m,
                });
            }
        }
        let sum = self.total();
        if !sum.is_finite() || (sum - 1.0).abs() > MASS_TOLERANCE {
            out.push(Violation::MassSum { sum });
        }
        out
    }

    pub fn validate(&self) -> Result<(), AlphabetError> {
        let v = self.violations();
        if v.is_empty() {
            Ok(())
        } else {
            Err(AlphabetError::Invalid(v))
        }
    }

    pub fn ensure_letters(&self, letters: &Arc<Letters>) -> Result<(), AlphabetError> {
        if same_letters(&self.letters, letters) {
            Ok(())
        } else {
            Err(AlphabetError::LetterMismatch {
                left: self.letters.len(),
                right: letters.len(),
            })
        }
    }

    pub fn entropy(&self) -> Result<f64, AlphabetError> {
        self.entropy_with(Strategy::default())
    }

    pub fn entropy_with(&self, strategy: Strategy) -> Result<f64, AlphabetError> {
        self.validate()?;
        Ok(entropy_bits(strategy, &self.masses))
    }

    /// Largest pointwise difference to another pmf over the same letters.
    pub fn max_abs_diff(&self, other: &Pmf) -> f64 {
        self.masses
            .iter()
            .zip(&other.masses)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// Shannon entropy in bits of a mass vector, with `0 log 0 = 0`.
pub(crate) fn entropy_bits(strategy: Strategy, masses: &[f64]) -> f64 {
    strategy.sum(masses.len(), |i| {
        let p = masses[i];
        if p > 0.0 {
            -p * p.log2()
        } else {
            0.0
        }
    })
}

/// `sum q log2(q / p)`; infinite when `q > 0` somewhere `p = 0`.
pub(crate) fn kl_bits(strategy: Strategy, q: &[f64], p: &[f64]) -> f64 {
    strategy.sum(q.len(), |i| {
        let (qi, pi) = (q[i], p[i]);
        if qi <= 0.0 {
            0.0
        } else if pi <= 0.0 {
            f64::INFINITY
        } else {
            qi * (qi / pi).log2()
        }
    })
}

/// A named letter set carrying a probability mass function.
#[derive(Debug, Clone)]
pub struct Alphabet {
    id: String,
    pmf: Pmf,
}

impl Alphabet {
    pub fn new(id: impl Into<String>, letters: Letters, masses: Vec<f64>) -> Result<Self, AlphabetError> {
        let a = Alphabet::from_raw(id, letters, masses);
        a.pmf.validate()?;
        Ok(a)
    }

    /// Builds without checking the masses; see [`Alphabet::validate`].
    pub fn from_raw(id: impl Into<String>, letters: Letters, masses: Vec<f64>) -> Self {
        Alphabet {
            id: id.into(),
            pmf: Pmf::from_raw(Arc::new(letters), masses),
        }
    }

    /// Builds from a letter-id → mass map, reporting missing and unknown keys.
    pub fn from_mass_map(
        id: impl Into<String>,
        letters: Letters,
        masses: &BTreeMap<String, f64>,
    ) -> Result<Self, AlphabetError> {
        let mut violations = Vec::new();
        for key in masses.keys() {
            if letters.position(key).is_none() {
                violations.push(Violation::UnknownKey { key: key.clone() });
            }
        }
        let dense: Vec<f64> = (0..letters.len())
            .map(|i| {
                let lid = letters.id(i);
                masses.get(lid.as_ref()).copied().unwrap_or_else(|| {
                    violations.push(Violation::MissingKey {
                        letter: lid.into_owned(),
                    });
                    0.0
                })
            })
            .collect();
        let a = Alphabet::from_raw(id, letters, dense);
        violations.extend(a.pmf.violations());
        if violations.is_empty() {
            Ok(a)
        } else {
            Err(AlphabetError::Invalid(violations))
        }
    }

    pub fn with_pmf(id: impl Into<String>, pmf: Pmf) -> Self {
        Alphabet { id: id.into(), pmf }
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn letters(&self) -> &Arc<Letters> {
        self.pmf.letters()
    }

    pub fn pmf(&self) -> &Pmf {
        &self.pmf
    }

    pub fn len(&self) -> usize {
        self.letters().len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters().is_empty()
    }

    pub fn validate(&self) -> Result<(), Vec<Violation>> {
        let v = self.pmf.violations();
        if v.is_empty() {
            Ok(())
        } else {
            Err(v)
        }
    }
}

pub fn make_uniform(id: impl Into<String>, letters: Vec<Letter>) -> Result<Alphabet, AlphabetError> {
    let letters = Arc::new(Letters::named(letters)?);
    Ok(Alphabet::with_pmf(id, Pmf::uniform(letters)))
}

/// Uniform alphabet over letters `"0"..."n-1"`.
pub fn make_uniform_count(id: impl Into<String>, n: usize) -> Result<Alphabet, AlphabetError> {
    let letters = Arc::new(Letters::indexed(n)?);
    Ok(Alphabet::with_pmf(id, Pmf::uniform(letters)))
}

/// Uniform alphabet over the grid `min, min + step, ..., max`.
pub fn make_quantized_range(id: impl Into<String>, min: f64, max: f64, step: f64) -> Result<Alphabet, AlphabetError> {
    let letters = Arc::new(Letters::grid(min, max, step)?);
    Ok(Alphabet::with_pmf(id, Pmf::uniform(letters)))
}

pub fn entropy(a: &Alphabet) -> Result<f64, AlphabetError> {
    a.pmf().entropy()
}

/// Kullback-Leibler divergence `D(q || p)` in bits.
///
/// Returns `f64::INFINITY` when `q` puts mass where `p` has none.
pub fn kl_divergence(q: &Pmf, p: &Pmf) -> Result<f64, AlphabetError> {
    kl_divergence_with(q, p, Strategy::default())
}

pub fn kl_divergence_with(q: &Pmf, p: &Pmf, strategy: Strategy) -> Result<f64, AlphabetError> {
    q.ensure_letters(p.letters())?;
    q.validate()?;
    p.validate()?;
    Ok(kl_bits(strategy, q.masses(), p.masses()))
}

pub fn validate(a: &Alphabet) -> Result<(), Vec<Violation>> {
    a.validate()
}
