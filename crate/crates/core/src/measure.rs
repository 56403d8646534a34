//! Correlator batteries and parity post-selection of Z-basis samples.
//!
//! Labels are 1-based site names: `"1A2A"` for an intra-A pair, `"1A1B"` for
//! a cross pair, `"1A"` for a single site.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pauli::Pauli;
use crate::statevec::{Bitstring, State};

/// Bound slack for reported correlators.
pub const CORRELATOR_SLACK: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CorrelatorGroup {
    IntraA,
    CrossAb,
    SingleBody,
}

impl CorrelatorGroup {
    pub fn as_str(&self) -> &'static str {
        match self {
            CorrelatorGroup::IntraA => "intra_A",
            CorrelatorGroup::CrossAb => "cross_AB",
            CorrelatorGroup::SingleBody => "single_body",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Correlator {
    pub label: String,
    pub pauli: Pauli,
    pub group: CorrelatorGroup,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct CorrelatorSet {
    entries: Vec<Correlator>,
}

impl CorrelatorSet {
    pub fn entries(&self) -> &[Correlator] {
        &self.entries
    }

    pub fn get(&self, label: &str, pauli: Pauli) -> Option<f64> {
        self.entries
            .iter()
            .find(|c| c.label == label && c.pauli == pauli)
            .map(|c| c.value)
    }

    pub fn group(&self, group: CorrelatorGroup) -> impl Iterator<Item = &Correlator> {
        self.entries.iter().filter(move |c| c.group == group)
    }

    pub fn extend(&mut self, other: CorrelatorSet) {
        self.entries.extend(other.entries);
    }

    fn push(&mut self, label: String, pauli: Pauli, group: CorrelatorGroup, value: f64) -> Result<()> {
        if value.abs() > 1.0 + CORRELATOR_SLACK {
            return Err(Error::Consistency(format!("correlator {label} = {value} outside [-1, 1]")));
        }
        self.entries.push(Correlator {
            label,
            pauli,
            group,
            value,
        });
        Ok(())
    }
}

fn site(i: usize, side: char) -> String {
    format!("{}{side}", i + 1)
}

/// Exact correlators of one Pauli type.
///
/// For a `2L`-qubit TFD register: every intra-A pair, every aligned cross pair
/// and single-site values on both sides. For an `L`-qubit register only the
/// intra pairs and single sites.
pub fn correlators(state: &State, l: usize, pauli: Pauli) -> Result<CorrelatorSet> {
    let n = state.n_qubits();
    let doubled = match n {
        _ if n == 2 * l => true,
        _ if n == l => false,
        _ => {
            return Err(Error::argument(format!(
                "a {n}-qubit state is neither L = {l} nor 2L sites"
            )))
        }
    };
    let mut set = CorrelatorSet::default();
    for i in 0..l {
        for j in i + 1..l {
            let v = state.pauli_expectation(&[(i, pauli), (j, pauli)])?;
            set.push(format!("{}{}", site(i, 'A'), site(j, 'A')), pauli, CorrelatorGroup::IntraA, v)?;
        }
    }
    if doubled {
        for i in 0..l {
            let v = state.pauli_expectation(&[(i, pauli), (i + l, pauli)])?;
            set.push(format!("{}{}", site(i, 'A'), site(i, 'B')), pauli, CorrelatorGroup::CrossAb, v)?;
        }
    }
    for i in 0..l {
        let v = state.pauli_expectation(&[(i, pauli)])?;
        set.push(site(i, 'A'), pauli, CorrelatorGroup::SingleBody, v)?;
    }
    if doubled {
        for i in 0..l {
            let v = state.pauli_expectation(&[(i + l, pauli)])?;
            set.push(site(i, 'B'), pauli, CorrelatorGroup::SingleBody, v)?;
        }
    }
    Ok(set)
}

/// Two-point values on a ring of `l` sites resolved by ring distance
/// `1..=l/2`: the mean over all pairs at that distance and the largest
/// deviation from it.
pub fn ring_distance_correlators(state: &State, l: usize, pauli: Pauli) -> Result<Vec<(usize, f64, f64)>> {
    if state.n_qubits() != l || l < 2 {
        return Err(Error::argument("ring correlators need an L-qubit state"));
    }
    let mut by_distance: BTreeMap<usize, Vec<f64>> = BTreeMap::new();
    for i in 0..l {
        for j in i + 1..l {
            let d = (j - i).min(l - (j - i));
            by_distance
                .entry(d)
                .or_default()
                .push(state.pauli_expectation(&[(i, pauli), (j, pauli)])?);
        }
    }
    Ok(by_distance
        .into_iter()
        .map(|(d, v)| {
            let mean = v.iter().sum::<f64>() / v.len() as f64;
            let spread = v.iter().map(|x| (x - mean).abs()).fold(0.0, f64::max);
            (d, mean, spread)
        })
        .collect())
}

/// Plug-in Z correlators (intra-A, cross, single-site) from Z-basis samples of a `2L` register.
pub fn z_correlators_from_samples(samples: &[Bitstring], l: usize) -> Result<CorrelatorSet> {
    if samples.is_empty() {
        return Err(Error::argument("no samples"));
    }
    if samples.iter().any(|b| b.n_qubits() != 2 * l) {
        return Err(Error::argument(format!("samples must cover {} qubits", 2 * l)));
    }
    let n = samples.len() as f64;
    let mean = |f: &dyn Fn(&Bitstring) -> f64| samples.iter().map(f).sum::<f64>() / n;
    let z = Pauli::Z;
    let mut set = CorrelatorSet::default();
    for i in 0..l {
        for j in i + 1..l {
            let v = mean(&|b| b.eigenvalue(i) * b.eigenvalue(j));
            set.push(format!("{}{}", site(i, 'A'), site(j, 'A')), z, CorrelatorGroup::IntraA, v)?;
        }
    }
    for i in 0..l {
        let v = mean(&|b| b.eigenvalue(i) * b.eigenvalue(i + l));
        set.push(format!("{}{}", site(i, 'A'), site(i, 'B')), z, CorrelatorGroup::CrossAb, v)?;
    }
    for i in 0..l {
        set.push(site(i, 'A'), z, CorrelatorGroup::SingleBody, mean(&|b| b.eigenvalue(i)))?;
    }
    for i in 0..l {
        set.push(site(i, 'B'), z, CorrelatorGroup::SingleBody, mean(&|b| b.eigenvalue(i + l)))?;
    }
    Ok(set)
}

/// `parity(A) · parity(B) = (-1)^L`, the sector of the Bell product.
pub fn satisfies_parity_rule(b: &Bitstring, l: usize) -> bool {
    let expected = if l % 2 == 0 { 1.0 } else { -1.0 };
    b.parity(0..l) * b.parity(l..2 * l) == expected
}

/// Samples that satisfy the parity rule.
pub fn postselect(samples: &[Bitstring], l: usize) -> Vec<Bitstring> {
    samples.iter().copied().filter(|b| satisfies_parity_rule(b, l)).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MitigationReport {
    pub kept: usize,
    pub total: usize,
    pub selection_rate: f64,
    pub corrected: CorrelatorSet,
}

/// Discards samples outside the parity sector and recomputes Z correlators.
pub fn symmetry_postselect(samples: &[Bitstring], l: usize) -> Result<MitigationReport> {
    let kept = postselect(samples, l);
    if kept.is_empty() {
        return Err(Error::MitigationUndefined {
            total: samples.len(),
        });
    }
    Ok(MitigationReport {
        kept: kept.len(),
        total: samples.len(),
        selection_rate: kept.len() as f64 / samples.len() as f64,
        corrected: z_correlators_from_samples(&kept, l)?,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MitigationSummary {
    pub raw_mad: f64,
    pub corrected_mad: f64,
    pub compared: usize,
}

/// Mean absolute deviation from `target` over the labels present in all three sets.
pub fn mitigation_comparison(
    raw: &CorrelatorSet,
    corrected: &CorrelatorSet,
    target: &CorrelatorSet,
) -> Result<MitigationSummary> {
    let mut raw_sum = 0.0;
    let mut cor_sum = 0.0;
    let mut count = 0usize;
    for t in target.entries() {
        if let (Some(r), Some(c)) = (raw.get(&t.label, t.pauli), corrected.get(&t.label, t.pauli)) {
            raw_sum += (r - t.value).abs();
            cor_sum += (c - t.value).abs();
            count += 1;
        }
    }
    if count == 0 {
        return Err(Error::argument("no common correlators to compare"));
    }
    Ok(MitigationSummary {
        raw_mad: raw_sum / count as f64,
        corrected_mad: cor_sum / count as f64,
        compared: count,
    })
}
