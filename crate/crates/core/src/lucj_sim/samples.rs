use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};

use super::SectorStatevector;
use crate::determinant::Determinant;
use crate::model::SectorSpec;
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Provenance {
    Simulated,
    File,
}

/// Multiset of measured determinants.
#[derive(Clone, Debug, PartialEq)]
pub struct SampleSet {
    pub counts: BTreeMap<Determinant, u64>,
    pub shots: u64,
    pub seed: Option<u64>,
    pub provenance: Provenance,
}

impl SampleSet {
    pub fn from_counts(counts: BTreeMap<Determinant, u64>, provenance: Provenance, seed: Option<u64>) -> Self {
        let counts: BTreeMap<_, _> = counts.into_iter().filter(|(_, c)| *c > 0).collect();
        SampleSet {
            shots: counts.values().sum(),
            counts,
            seed,
            provenance,
        }
    }

    /// Number of distinct determinants.
    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }
}

/// Multinomial draw of `shots` determinants from `|amplitude|²`.
pub fn sample(state: &SectorStatevector, shots: u64, seed: u64) -> Result<SampleSet> {
    if shots == 0 {
        return Err(Error::InvalidInput("shots must be at least 1".into()));
    }
    let probs = state.probabilities();
    let total: f64 = probs.iter().sum();
    if !(total > 0.0) {
        return Err(Error::Numerical("statevector has zero norm".into()));
    }
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut counts = BTreeMap::new();
    let mut remaining = shots;
    let mut mass = 1.0;
    let last = probs.iter().rposition(|p| *p > 0.0).unwrap_or(0);
    for (k, p) in probs.iter().enumerate() {
        if remaining == 0 {
            break;
        }
        let p = p / total;
        if p == 0.0 {
            continue;
        }
        let n = if k == last || p >= mass {
            remaining
        } else {
            let dist = Binomial::new(remaining, (p / mass).clamp(0.0, 1.0))
                .map_err(|e| Error::Numerical(format!("binomial draw: {e}")))?;
            dist.sample(&mut rng)
        };
        mass -= p;
        if n > 0 {
            counts.insert(state.determinant(k), n);
            remaining -= n;
        }
    }
    Ok(SampleSet::from_counts(counts, Provenance::Simulated, Some(seed)))
}

/// Parses `bitstring count` lines; `#` starts a comment.
pub fn parse_samples(text: &str, origin: &str, n_orbitals: usize) -> Result<SampleSet> {
    let mut counts: BTreeMap<Determinant, u64> = BTreeMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let at = format!("{origin}:{}", lineno + 1);
        let fields: Vec<&str> = line.split_whitespace().collect();
        let [bits, count] = fields[..] else {
            return Err(Error::parse(at, format!("malformed line {line:?}: expected \"bitstring count\"")));
        };
        if bits.len() != 2 * n_orbitals {
            return Err(Error::parse(
                at,
                format!("wrong length: bitstring has {} characters, expected {}", bits.len(), 2 * n_orbitals),
            ));
        }
        let det = Determinant::from_bitstring(bits, n_orbitals)
            .ok_or_else(|| Error::parse(&at, format!("malformed bitstring {bits:?}")))?;
        let count: u64 = count
            .parse()
            .map_err(|_| Error::parse(&at, format!("malformed count {count:?}")))?;
        if count == 0 {
            return Err(Error::parse(at, "count must be positive"));
        }
        *counts.entry(det).or_default() += count;
    }
    if counts.is_empty() {
        return Err(Error::parse(origin, "no samples"));
    }
    Ok(SampleSet::from_counts(counts, Provenance::File, None))
}

/// Reads a sample file. No sector filtering happens here.
pub fn load_samples(path: impl AsRef<Path>, spec: &SectorSpec) -> Result<SampleSet> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_samples(&text, &path.display().to_string(), spec.n_orbitals)
}

pub fn format_samples(set: &SampleSet, n_orbitals: usize) -> String {
    let mut out = String::new();
    for (det, count) in &set.counts {
        let _ = writeln!(out, "{} {count}", det.to_bitstring(n_orbitals));
    }
    out
}

pub fn write_samples(set: &SampleSet, n_orbitals: usize, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, format_samples(set, n_orbitals)).map_err(|e| Error::io(path, e))
}
