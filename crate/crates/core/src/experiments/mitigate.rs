use rand::Rng;
use rayon::prelude::*;

use super::{fmt_f64, fmt_opt, multistart, MitigateConfig, Outcome, Table};
use crate::error::{Error, Result};
use crate::hamiltonian::{build_tfim, Boundary};
use crate::measure;
use crate::noise::{self, NoiseModel};
use crate::pauli::Pauli;
use crate::rng;
use crate::statevec::{self, Bitstring, State};
use crate::tfd::{optimize_tfd, TfdCircuit};

pub(super) fn run(c: &MitigateConfig) -> Result<Outcome> {
    let family = c.family.with_layers(c.layers);
    let h_a = build_tfim(c.l, c.g, 1.0, Boundary::Ring)?;
    let circuit = TfdCircuit::new(family, &h_a)?;
    let options = multistart(c.restarts, c.seed);
    let model = NoiseModel {
        gamma: c.gamma,
        lambda: c.lambda,
        n_samples: c.shots,
        seed: c.seed,
        correlation: c.correlation,
    };
    let zero = State::zero(2 * c.l)?;

    let mut correlators = Table::new(
        "",
        &["temperature", "beta", "observable", "group", "target", "raw", "corrected"],
    );
    let mut rates = Table::new(
        "rates",
        &["temperature", "beta", "fidelity", "kept", "total", "selection_rate", "raw_mad", "corrected_mad"],
    );
    let mut selection = Vec::new();
    for (index, &beta) in c.betas.iter().enumerate() {
        let opt = optimize_tfd(family, &h_a, beta, &options)?;
        let gates = circuit.gates_from_zero(&opt.params.angles)?;
        let samples: Vec<Bitstring> = if model.is_noiseless() {
            let seed = rng::substream(c.seed, &[index as u64]).random();
            statevec::sample_bitstrings(&opt.state, &vec![Pauli::Z; 2 * c.l], c.shots, seed)?
        } else {
            // one noisy trajectory per shot
            (0..c.shots)
                .into_par_iter()
                .map(|k| {
                    let mut r = rng::substream(c.seed, &[index as u64, k as u64]);
                    let s = noise::run_noisy(&gates, &zero, &model, &mut r)?;
                    Ok(statevec::sample_with(&s, 1, &mut r)[0])
                })
                .collect::<Result<_>>()?
        };
        let target = measure::correlators(&opt.target.state, c.l, Pauli::Z)?;
        let raw = measure::z_correlators_from_samples(&samples, c.l)?;
        let (kept, corrected) = match measure::symmetry_postselect(&samples, c.l) {
            Ok(report) => (report.kept, Some(report.corrected)),
            Err(Error::MitigationUndefined { .. }) => (0, None),
            Err(e) => return Err(e),
        };
        let t = fmt_f64(beta.temperature());
        let b = beta.to_string();
        for entry in target.entries() {
            let cor = corrected.as_ref().and_then(|s| s.get(&entry.label, Pauli::Z));
            correlators.push(vec![
                t.clone(),
                b.clone(),
                entry.label.clone(),
                entry.group.as_str().to_string(),
                fmt_f64(entry.value),
                fmt_opt(raw.get(&entry.label, Pauli::Z)),
                fmt_opt(cor),
            ]);
        }
        let raw_mad = measure::mitigation_comparison(&raw, &raw, &target)?.raw_mad;
        let corrected_mad = corrected
            .as_ref()
            .map(|s| measure::mitigation_comparison(&raw, s, &target))
            .transpose()?
            .map(|m| m.corrected_mad);
        let rate = kept as f64 / samples.len() as f64;
        rates.push(vec![
            t,
            b.clone(),
            fmt_f64(opt.fidelity),
            kept.to_string(),
            samples.len().to_string(),
            fmt_f64(rate),
            fmt_f64(raw_mad),
            fmt_opt(corrected_mad),
        ]);
        selection.push((b, rate));
    }
    let mut out = Outcome::default();
    out.note(
        "selection_rate_by_beta",
        selection.into_iter().collect::<std::collections::BTreeMap<_, _>>(),
    );
    out.tables = vec![correlators, rates];
    Ok(out)
}
