use std::collections::BTreeMap;

use crate::determinant::{enumerate_strings, Determinant};
use crate::lucj_sim::SampleSet;
use crate::model::SectorSpec;
use crate::{Error, Result};

/// Product subspace `A × B` of alpha and beta strings.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SubspaceBasis {
    spec: SectorSpec,
    alpha_strings: Vec<u64>,
    beta_strings: Vec<u64>,
}

impl SubspaceBasis {
    pub fn new(spec: SectorSpec, mut alpha: Vec<u64>, mut beta: Vec<u64>) -> Result<Self> {
        alpha.sort_unstable();
        alpha.dedup();
        beta.sort_unstable();
        beta.dedup();
        if alpha.is_empty() || beta.is_empty() {
            return Err(Error::InvalidInput("empty subspace".into()));
        }
        let full = crate::determinant::low_bits(spec.n_orbitals);
        let bad = |w: &u64, n: usize| w & !full != 0 || w.count_ones() as usize != n;
        if alpha.iter().any(|w| bad(w, spec.n_alpha)) || beta.iter().any(|w| bad(w, spec.n_beta)) {
            return Err(Error::InvalidInput(format!("subspace string outside sector {spec}")));
        }
        Ok(SubspaceBasis {
            spec,
            alpha_strings: alpha,
            beta_strings: beta,
        })
    }

    /// The whole sector.
    pub fn full(spec: SectorSpec) -> Self {
        SubspaceBasis {
            spec,
            alpha_strings: enumerate_strings(spec.n_orbitals, spec.n_alpha),
            beta_strings: enumerate_strings(spec.n_orbitals, spec.n_beta),
        }
    }

    /// Smallest product subspace containing every determinant in `dets`.
    pub fn closure(spec: SectorSpec, dets: &[Determinant]) -> Result<Self> {
        Self::new(
            spec,
            dets.iter().map(|d| d.alpha).collect(),
            dets.iter().map(|d| d.beta).collect(),
        )
    }

    pub fn spec(&self) -> SectorSpec {
        self.spec
    }

    pub fn alpha_strings(&self) -> &[u64] {
        &self.alpha_strings
    }

    pub fn beta_strings(&self) -> &[u64] {
        &self.beta_strings
    }

    pub fn dimension(&self) -> usize {
        self.alpha_strings.len() * self.beta_strings.len()
    }

    /// `d` over the sector dimension.
    pub fn fraction(&self) -> f64 {
        self.dimension() as f64 / self.spec.dimension() as f64
    }

    /// Determinants in canonical (beta-major) order.
    pub fn determinants(&self) -> Vec<Determinant> {
        self.beta_strings
            .iter()
            .flat_map(|&b| self.alpha_strings.iter().map(move |&a| Determinant::new(a, b)))
            .collect()
    }

    pub fn contains(&self, d: &Determinant) -> bool {
        self.alpha_strings.binary_search(&d.alpha).is_ok() && self.beta_strings.binary_search(&d.beta).is_ok()
    }

    pub fn is_subset_of(&self, other: &SubspaceBasis) -> bool {
        self.alpha_strings.iter().all(|w| other.alpha_strings.binary_search(w).is_ok())
            && self.beta_strings.iter().all(|w| other.beta_strings.binary_search(w).is_ok())
    }
}

/// Drops samples outside the sector. Returns the kept set and the discarded
/// share of shots.
pub fn filter_samples(samples: &SampleSet, spec: &SectorSpec) -> Result<(SampleSet, f64)> {
    let kept: BTreeMap<Determinant, u64> = samples
        .counts
        .iter()
        .filter(|(d, _)| d.in_sector(spec))
        .map(|(d, c)| (*d, *c))
        .collect();
    let out = SampleSet::from_counts(kept, samples.provenance, samples.seed);
    if out.is_empty() {
        return Err(Error::InvalidInput(format!(
            "every sample lies outside sector {spec}; subspace would be empty"
        )));
    }
    let discarded = if samples.shots == 0 {
        0.0
    } else {
        1.0 - out.shots as f64 / samples.shots as f64
    };
    if discarded > 0.0 {
        log::info!("postselection discarded {:.4}% of shots for sector {spec}", 100.0 * discarded);
    }
    Ok((out, discarded))
}

fn ranked(marginal: BTreeMap<u64, u64>) -> Vec<u64> {
    let mut v: Vec<(u64, u64)> = marginal.into_iter().collect();
    v.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
    v.into_iter().map(|(w, _)| w).collect()
}

/// Number of determinants a fraction of the sector asks for.
pub(crate) fn target_dimension(spec: &SectorSpec, fraction: f64) -> u128 {
    let total = spec.dimension() as f64;
    ((fraction * total - 1e-9).ceil().max(1.0) as u128).min(spec.dimension())
}

/// Grows `A` and `B` from the reference strings by adding sampled strings in
/// order of marginal frequency, each step extending the channel that gives
/// the smaller product, until `|A|·|B|` reaches `target_fraction` of the
/// sector. Strings never sampled come after all sampled ones, in canonical
/// order, so a fraction of 1.0 always yields the whole sector.
pub fn build_subspace(
    samples: &SampleSet,
    spec: SectorSpec,
    target_fraction: f64,
    reference: &Determinant,
) -> Result<SubspaceBasis> {
    if !(target_fraction > 0.0 && target_fraction <= 1.0) {
        return Err(Error::InvalidInput(format!("fraction {target_fraction} not in (0, 1]")));
    }
    if !reference.in_sector(&spec) {
        return Err(Error::InvalidInput(format!("reference determinant not in sector {spec}")));
    }
    let mut ma: BTreeMap<u64, u64> = BTreeMap::new();
    let mut mb: BTreeMap<u64, u64> = BTreeMap::new();
    for (d, c) in samples.counts.iter().filter(|(d, _)| d.in_sector(&spec)) {
        *ma.entry(d.alpha).or_default() += c;
        *mb.entry(d.beta).or_default() += c;
    }
    if ma.is_empty() {
        return Err(Error::InvalidInput("no in-sector samples".into()));
    }
    // Unobserved strings rank last with count zero.
    for w in enumerate_strings(spec.n_orbitals, spec.n_alpha) {
        ma.entry(w).or_default();
    }
    for w in enumerate_strings(spec.n_orbitals, spec.n_beta) {
        mb.entry(w).or_default();
    }
    let mut alpha = vec![reference.alpha];
    let mut beta = vec![reference.beta];
    let mut next_a = ranked(ma).into_iter().filter(|w| *w != reference.alpha).peekable();
    let mut next_b = ranked(mb).into_iter().filter(|w| *w != reference.beta).peekable();
    let target = target_dimension(&spec, target_fraction);
    while ((alpha.len() * beta.len()) as u128) < target {
        let grow_alpha = match (next_a.peek(), next_b.peek()) {
            (None, None) => break,
            (Some(_), None) => true,
            (None, Some(_)) => false,
            (Some(_), Some(_)) => (alpha.len() + 1) * beta.len() <= alpha.len() * (beta.len() + 1),
        };
        if grow_alpha {
            alpha.extend(next_a.next());
        } else {
            beta.extend(next_b.next());
        }
    }
    SubspaceBasis::new(spec, alpha, beta)
}
