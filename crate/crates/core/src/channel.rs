//! Forward and reconstruction channels between alphabets.
//!
//! A channel is either a total function on letters or a row-stochastic
//! conditional. Stochastic rows are stored sparsely; several rows may share
//! storage, which is how Bayes inverses represent unreachable outputs
//! without copying the prior once per row.

use std::collections::BTreeMap;
use std::sync::Arc;

use thiserror::Error;

use crate::alphabet::{entropy_bits, kl_bits, same_letters, Alphabet, AlphabetError, Letters, Pmf, MASS_TOLERANCE};
use crate::exec::{compensated_sum, Strategy};

/// Letter-count bound for deterministic channels.
pub const DETERMINISTIC_LIMIT: usize = 1 << 21;
/// Letter-count bound for declared stochastic channels.
pub const STOCHASTIC_LIMIT: usize = 4096;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ChannelError {
    #[error(transparent)]
    Alphabet(#[from] AlphabetError),
    #[error("alphabet '{alphabet}' has {letters} letters, above the {kind} channel limit of {limit}")]
    TooLarge {
        alphabet: String,
        letters: usize,
        limit: usize,
        kind: &'static str,
    },
    #[error("map has {got} entries for {expected} input letters")]
    MapLength { expected: usize, got: usize },
    #[error("input letter {input} maps to output index {image}, outside {len} letters")]
    ImageOutOfRange { input: usize, image: usize, len: usize },
    #[error("expected {expected} rows, got {got}")]
    RowCount { expected: usize, got: usize },
    #[error("row '{row}' has {got} entries, expected {expected}")]
    RowWidth { row: String, expected: usize, got: usize },
    #[error("row '{row}' sums to {sum}")]
    RowSum { row: String, sum: f64 },
    #[error("row '{row}' has invalid entry {value} at column {column}")]
    BadEntry { row: String, column: usize, value: f64 },
    #[error("row '{row}' lists column {column} twice")]
    DuplicateColumn { row: String, column: usize },
    #[error("alphabet mismatch: expected '{expected}', got '{got}'")]
    Mismatch { expected: String, got: String },
    #[error("letter {index} of alphabet '{alphabet}' has no numeric value")]
    NotNumeric { alphabet: String, index: usize },
    #[error("a {pixels}-pixel quantizer needs {needed} output letters, '{alphabet}' has {got}")]
    QuantizerWidth {
        alphabet: String,
        pixels: usize,
        needed: usize,
        got: usize,
    },
}

/// One side of a channel: the alphabet id and its letter set.
#[derive(Debug, Clone)]
pub struct Endpoint {
    pub alphabet: String,
    pub letters: Arc<Letters>,
}

impl Endpoint {
    pub fn of(a: &Alphabet) -> Self {
        Endpoint {
            alphabet: a.id().to_string(),
            letters: a.letters().clone(),
        }
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    fn matches(&self, other: &Endpoint) -> bool {
        same_letters(&self.letters, &other.letters)
    }
}

/// Sparse rows; `spans[i]` indexes into the shared column/value storage.
#[derive(Debug, Clone, PartialEq)]
struct Rows {
    spans: Vec<(usize, usize)>,
    cols: Vec<u32>,
    vals: Vec<f64>,
}

impl Rows {
    fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let (s, e) = self.spans[i];
        self.cols[s..e]
            .iter()
            .zip(&self.vals[s..e])
            .map(|(&c, &v)| (c as usize, v))
    }

    fn from_vecs(rows: Vec<Vec<(usize, f64)>>) -> Self {
        let mut out = Rows {
            spans: Vec::with_capacity(rows.len()),
            cols: Vec::new(),
            vals: Vec::new(),
        };
        for r in rows {
            let s = out.cols.len();
            for (c, v) in r {
                out.cols.push(c as u32);
                out.vals.push(v);
            }
            out.spans.push((s, out.cols.len()));
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Kernel {
    Deterministic(Vec<u32>),
    Stochastic(Rows),
}

/// A forward process between alphabets.
#[derive(Debug, Clone)]
pub struct Channel {
    id: String,
    from: Endpoint,
    to: Endpoint,
    kernel: Kernel,
}

fn check_size(e: &Endpoint, limit: usize, kind: &'static str) -> Result<(), ChannelError> {
    if e.len() > limit {
        return Err(ChannelError::TooLarge {
            alphabet: e.alphabet.clone(),
            letters: e.len(),
            limit,
            kind,
        });
    }
    Ok(())
}

impl Channel {
    /// Total function given as one output index per input letter.
    pub fn deterministic(
        id: impl Into<String>,
        from: &Alphabet,
        to: &Alphabet,
        map: Vec<usize>,
    ) -> Result<Self, ChannelError> {
        let (from, to) = (Endpoint::of(from), Endpoint::of(to));
        check_size(&from, DETERMINISTIC_LIMIT, "deterministic")?;
        check_size(&to, DETERMINISTIC_LIMIT, "deterministic")?;
        if map.len() != from.len() {
            return Err(ChannelError::MapLength {
                expected: from.len(),
                got: map.len(),
            });
        }
        if let Some((input, &image)) = map.iter().enumerate().find(|(_, &m)| m >= to.len()) {
            return Err(ChannelError::ImageOutOfRange {
                input,
                image,
                len: to.len(),
            });
        }
        Ok(Channel {
            id: id.into(),
            from,
            to,
            kernel: Kernel::Deterministic(map.into_iter().map(|m| m as u32).collect()),
        })
    }

    pub fn identity(id: impl Into<String>, a: &Alphabet) -> Result<Self, ChannelError> {
        Channel::deterministic(id, a, a, (0..a.len()).collect())
    }

    /// Every input maps to output letter `out`.
    pub fn constant(id: impl Into<String>, from: &Alphabet, to: &Alphabet, out: usize) -> Result<Self, ChannelError> {
        Channel::deterministic(id, from, to, vec![out; from.len()])
    }

    /// Bar-height quantizer onto a canvas of `pixels` pixels.
    ///
    /// The output alphabet holds the `pixels + 1` bar heights `0..=pixels`.
    /// A value `v` maps to `round_half_up((v - min) * pixels / (max - min))`,
    /// evaluated in exact integer arithmetic when the input is a grid.
    pub fn quantizer(
        id: impl Into<String>,
        from: &Alphabet,
        to: &Alphabet,
        pixels: usize,
    ) -> Result<Self, ChannelError> {
        if to.len() != pixels + 1 {
            return Err(ChannelError::QuantizerWidth {
                alphabet: to.id().to_string(),
                pixels,
                needed: pixels + 1,
                got: to.len(),
            });
        }
        let letters = from.letters();
        let map = if let Some(grid) = letters.as_grid() {
            let (p, n) = (pixels as u128, grid.steps as u128);
            (0..letters.len())
                .map(|i| {
                    if n == 0 {
                        0
                    } else {
                        ((2 * i as u128 * p + n) / (2 * n)) as usize
                    }
                })
                .collect()
        } else {
            let values = (0..letters.len())
                .map(|i| {
                    letters.value(i).ok_or_else(|| ChannelError::NotNumeric {
                        alphabet: from.id().to_string(),
                        index: i,
                    })
                })
                .collect::<Result<Vec<f64>, _>>()?;
            let min = values.iter().copied().fold(f64::INFINITY, f64::min);
            let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            values
                .iter()
                .map(|&v| {
                    if max > min {
                        ((v - min) * pixels as f64 / (max - min) + 0.5).floor() as usize
                    } else {
                        0
                    }
                })
                .collect()
        };
        Channel::deterministic(id, from, to, map)
    }

    /// Row-stochastic channel from sparse rows `(output index, probability)`.
    pub fn stochastic(
        id: impl Into<String>,
        from: &Alphabet,
        to: &Alphabet,
        rows: Vec<Vec<(usize, f64)>>,
    ) -> Result<Self, ChannelError> {
        let (from, to) = (Endpoint::of(from), Endpoint::of(to));
        check_size(&from, STOCHASTIC_LIMIT, "stochastic")?;
        check_size(&to, STOCHASTIC_LIMIT, "stochastic")?;
        if rows.len() != from.len() {
            return Err(ChannelError::RowCount {
                expected: from.len(),
                got: rows.len(),
            });
        }
        let mut cleaned = Vec::with_capacity(rows.len());
        for (i, row) in rows.into_iter().enumerate() {
            let name = || from.letters.id(i).into_owned();
            let mut seen = vec![false; to.len()];
            let mut kept = Vec::with_capacity(row.len());
            let mut sum = 0.0;
            for (c, v) in row {
                if c >= to.len() {
                    return Err(ChannelError::ImageOutOfRange {
                        input: i,
                        image: c,
                        len: to.len(),
                    });
                }
                if !v.is_finite() || v < 0.0 {
                    return Err(ChannelError::BadEntry {
                        row: name(),
                        column: c,
                        value: v,
                    });
                }
                if std::mem::replace(&mut seen[c], true) {
                    return Err(ChannelError::DuplicateColumn { row: name(), column: c });
                }
                sum += v;
                if v > 0.0 {
                    kept.push((c, v));
                }
            }
            if (sum - 1.0).abs() > MASS_TOLERANCE {
                return Err(ChannelError::RowSum { row: name(), sum });
            }
            kept.sort_by_key(|&(c, _)| c);
            cleaned.push(kept);
        }
        Ok(Channel {
            id: id.into(),
            from,
            to,
            kernel: Kernel::Stochastic(Rows::from_vecs(cleaned)),
        })
    }

    /// Row-stochastic channel from dense rows in output-letter order.
    pub fn stochastic_dense(
        id: impl Into<String>,
        from: &Alphabet,
        to: &Alphabet,
        rows: Vec<Vec<f64>>,
    ) -> Result<Self, ChannelError> {
        let mut sparse = Vec::with_capacity(rows.len());
        for (i, row) in rows.into_iter().enumerate() {
            if row.len() != to.len() {
                return Err(ChannelError::RowWidth {
                    row: from.letters().id(i).into_owned(),
                    expected: to.len(),
                    got: row.len(),
                });
            }
            sparse.push(row.into_iter().enumerate().collect());
        }
        Channel::stochastic(id, from, to, sparse)
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn from(&self) -> &Endpoint {
        &self.from
    }

    pub fn to(&self) -> &Endpoint {
        &self.to
    }

    pub fn is_deterministic(&self) -> bool {
        matches!(self.kernel, Kernel::Deterministic(_))
    }

    /// The output index of each input when the channel is deterministic.
    pub fn as_map(&self) -> Option<Vec<usize>> {
        match &self.kernel {
            Kernel::Deterministic(m) => Some(m.iter().map(|&x| x as usize).collect()),
            Kernel::Stochastic(_) => None,
        }
    }

    /// Non-zero entries of the conditional for input letter `i`, by output index.
    pub fn row(&self, i: usize) -> Vec<(usize, f64)> {
        match &self.kernel {
            Kernel::Deterministic(m) => vec![(m[i] as usize, 1.0)],
            Kernel::Stochastic(r) => r.row(i).collect(),
        }
    }

    /// `P(output = out | input = input)`.
    pub fn conditional(&self, out: usize, input: usize) -> f64 {
        self.row(input)
            .into_iter()
            .find(|&(c, _)| c == out)
            .map_or(0.0, |(_, v)| v)
    }

    fn with_rows(id: String, from: Endpoint, to: Endpoint, rows: Vec<Vec<(usize, f64)>>) -> Self {
        Channel {
            id,
            from,
            to,
            kernel: Kernel::Stochastic(Rows::from_vecs(rows)),
        }
    }

    /// Entries grouped by output letter, inputs ascending within each group.
    fn transpose(&self) -> Rows {
        let n_out = self.to.len();
        let mut counts = vec![0usize; n_out + 1];
        let each = |f: &mut dyn FnMut(usize, usize, f64)| match &self.kernel {
            Kernel::Deterministic(m) => {
                for (d, &v) in m.iter().enumerate() {
                    f(d, v as usize, 1.0);
                }
            }
            Kernel::Stochastic(r) => {
                for d in 0..r.spans.len() {
                    for (v, w) in r.row(d) {
                        f(d, v, w);
                    }
                }
            }
        };
        each(&mut |_, v, _| counts[v + 1] += 1);
        for i in 0..n_out {
            counts[i + 1] += counts[i];
        }
        let nnz = counts[n_out];
        let spans = (0..n_out).map(|v| (counts[v], counts[v + 1])).collect();
        let mut cursor = counts;
        let mut cols = vec![0u32; nnz];
        let mut vals = vec![0.0; nnz];
        each(&mut |d, v, w| {
            let at = cursor[v];
            cols[at] = d as u32;
            vals[at] = w;
            cursor[v] += 1;
        });
        Rows { spans, cols, vals }
    }
}

/// A reconstruction process, oriented from a forward channel's output back to its input.
#[derive(Debug, Clone)]
pub struct ReconstructionChannel {
    channel: Channel,
}

impl ReconstructionChannel {
    pub fn new(channel: Channel) -> Self {
        ReconstructionChannel { channel }
    }

    pub fn channel(&self) -> &Channel {
        &self.channel
    }

    pub fn into_channel(self) -> Channel {
        self.channel
    }

    /// Checks that this reconstruction maps `forward.to` back onto `forward.from`.
    pub fn check_orientation(&self, forward: &Channel) -> Result<(), ChannelError> {
        if !self.channel.from.matches(&forward.to) {
            return Err(ChannelError::Mismatch {
                expected: forward.to.alphabet.clone(),
                got: self.channel.from.alphabet.clone(),
            });
        }
        if !self.channel.to.matches(&forward.from) {
            return Err(ChannelError::Mismatch {
                expected: forward.from.alphabet.clone(),
                got: self.channel.to.alphabet.clone(),
            });
        }
        Ok(())
    }
}

fn check_prior(prior: &Pmf, e: &Endpoint) -> Result<(), ChannelError> {
    if !same_letters(prior.letters(), &e.letters) {
        return Err(ChannelError::Mismatch {
            expected: e.alphabet.clone(),
            got: format!("pmf over {} letters", prior.len()),
        });
    }
    prior.validate()?;
    Ok(())
}

fn push_masses(strategy: Strategy, prior: &[f64], c: &Channel) -> Vec<f64> {
    let t = c.transpose();
    strategy.map(c.to.len(), |v| compensated_sum(t.row(v).map(|(d, w)| prior[d] * w)))
}

/// Distribution of the channel output when its input follows `prior`.
pub fn push_forward(prior: &Pmf, c: &Channel) -> Result<Pmf, ChannelError> {
    push_forward_with(prior, c, Strategy::default())
}

pub fn push_forward_with(prior: &Pmf, c: &Channel, strategy: Strategy) -> Result<Pmf, ChannelError> {
    check_prior(prior, &c.from)?;
    let masses = push_masses(strategy, prior.masses(), c);
    Ok(Pmf::from_raw(c.to.letters.clone(), masses))
}

/// Sequential composition: `c1` followed by `c2`.
pub fn compose(c1: &Channel, c2: &Channel) -> Result<Channel, ChannelError> {
    compose_with(c1, c2, Strategy::default())
}

pub fn compose_with(c1: &Channel, c2: &Channel, strategy: Strategy) -> Result<Channel, ChannelError> {
    if !c1.to.matches(&c2.from) {
        return Err(ChannelError::Mismatch {
            expected: c1.to.alphabet.clone(),
            got: c2.from.alphabet.clone(),
        });
    }
    let id = format!("{}>{}", c1.id, c2.id);
    if let (Kernel::Deterministic(a), Kernel::Deterministic(b)) = (&c1.kernel, &c2.kernel) {
        return Ok(Channel {
            id,
            from: c1.from.clone(),
            to: c2.to.clone(),
            kernel: Kernel::Deterministic(a.iter().map(|&j| b[j as usize]).collect()),
        });
    }
    let rows = strategy.map(c1.from.len(), |d| {
        let mut acc: BTreeMap<usize, f64> = BTreeMap::new();
        for (j, w1) in c1.row(d) {
            for (k, w2) in c2.row(j) {
                *acc.entry(k).or_insert(0.0) += w1 * w2;
            }
        }
        acc.into_iter().filter(|&(_, w)| w > 0.0).collect()
    });
    Ok(Channel::with_rows(id, c1.from.clone(), c2.to.clone(), rows))
}

/// Posterior reconstruction `Q(d | v) = prior(d) c(v | d) / sum_d' prior(d') c(v | d')`.
///
/// Outputs that are unreachable under `prior` get the prior as their row.
/// When every row is a point mass the result is deterministic.
pub fn bayes_inverse(c: &Channel, prior: &Pmf) -> Result<ReconstructionChannel, ChannelError> {
    bayes_inverse_with(c, prior, Strategy::default())
}

pub fn bayes_inverse_with(c: &Channel, prior: &Pmf, strategy: Strategy) -> Result<ReconstructionChannel, ChannelError> {
    check_prior(prior, &c.from)?;
    let p = prior.masses();
    let t = c.transpose();
    let pushed = strategy.map(c.to.len(), |v| compensated_sum(t.row(v).map(|(d, w)| p[d] * w)));
    let posterior: Vec<Option<Vec<(usize, f64)>>> = strategy.map(c.to.len(), |v| {
        let z = pushed[v];
        (z > 0.0).then(|| {
            t.row(v)
                .filter_map(|(d, w)| {
                    let joint = p[d] * w;
                    (joint > 0.0).then(|| (d, joint / z))
                })
                .collect()
        })
    });

    let id = format!("bayes({})", c.id);
    let (from, to) = (c.to.clone(), c.from.clone());
    let point_masses = posterior
        .iter()
        .all(|r| matches!(r, Some(r) if r.len() == 1 && r[0].1 == 1.0));
    if point_masses {
        let map = posterior.iter().map(|r| r.as_ref().unwrap()[0].0 as u32).collect();
        return Ok(ReconstructionChannel::new(Channel {
            id,
            from,
            to,
            kernel: Kernel::Deterministic(map),
        }));
    }

    // Unreachable outputs all point at one shared copy of the prior.
    let mut rows = Rows {
        spans: Vec::with_capacity(posterior.len()),
        cols: Vec::new(),
        vals: Vec::new(),
    };
    let mut prior_span = None;
    for r in posterior {
        let span = match r {
            Some(r) => {
                let s = rows.cols.len();
                for (d, q) in r {
                    rows.cols.push(d as u32);
                    rows.vals.push(q);
                }
                (s, rows.cols.len())
            }
            None => *prior_span.get_or_insert_with(|| {
                let s = rows.cols.len();
                for (d, &q) in p.iter().enumerate().filter(|(_, &q)| q > 0.0) {
                    rows.cols.push(d as u32);
                    rows.vals.push(q);
                }
                (s, rows.cols.len())
            }),
        };
        rows.spans.push(span);
    }
    Ok(ReconstructionChannel::new(Channel {
        id,
        from,
        to,
        kernel: Kernel::Stochastic(rows),
    }))
}

/// Distribution over the input alphabet after a forward pass and a reconstruction.
pub fn reconstructed_pmf(prior: &Pmf, forward: &Channel, recon: &ReconstructionChannel) -> Result<Pmf, ChannelError> {
    reconstructed_pmf_with(prior, forward, recon, Strategy::default())
}

pub fn reconstructed_pmf_with(
    prior: &Pmf,
    forward: &Channel,
    recon: &ReconstructionChannel,
    strategy: Strategy,
) -> Result<Pmf, ChannelError> {
    recon.check_orientation(forward)?;
    check_prior(prior, &forward.from)?;
    let seen = push_masses(strategy, prior.masses(), forward);
    let back = push_masses(strategy, &seen, &recon.channel);
    Ok(Pmf::from_raw(forward.from.letters.clone(), back))
}

/// `H(input) - H(output)` in bits; negative when the channel adds variation.
pub fn alphabet_compression(prior: &Pmf, c: &Channel) -> Result<f64, ChannelError> {
    alphabet_compression_with(prior, c, Strategy::default())
}

pub fn alphabet_compression_with(prior: &Pmf, c: &Channel, strategy: Strategy) -> Result<f64, ChannelError> {
    let out = push_forward_with(prior, c, strategy)?;
    Ok(entropy_bits(strategy, prior.masses()) - entropy_bits(strategy, out.masses()))
}

/// `D(q || prior)` where `q` is the reconstructed distribution; may be infinite.
pub fn potential_distortion(
    prior: &Pmf,
    forward: &Channel,
    recon: &ReconstructionChannel,
) -> Result<f64, ChannelError> {
    potential_distortion_with(prior, forward, recon, Strategy::default())
}

pub fn potential_distortion_with(
    prior: &Pmf,
    forward: &Channel,
    recon: &ReconstructionChannel,
    strategy: Strategy,
) -> Result<f64, ChannelError> {
    let q = reconstructed_pmf_with(prior, forward, recon, strategy)?;
    Ok(kl_bits(strategy, q.masses(), prior.masses()))
}

/// Divergence of a directly supplied reconstruction `q` from `prior`.
pub fn supplied_distortion(q: &Pmf, prior: &Pmf) -> Result<f64, ChannelError> {
    Ok(crate::alphabet::kl_divergence(q, prior)?)
}
