use std::collections::BTreeMap;

use super::{fmt_f64, fmt_opt, multistart, NoiseConfig, Outcome, Table};
use crate::circuit::Circuit;
use crate::error::{Error, Result};
use crate::hamiltonian::{ground_state, HamiltonianSpec};
use crate::noise::{
    calibrate_lambda, find_threshold, gamma_grid, infer_gamma, noise_curve, NoiseCurve, NoiseModel,
    Threshold,
};
use crate::qaoa::{cost_hamiltonian, gs_circuit, optimize_gs_exact};
use crate::statevec::State;

struct Curves<'a> {
    c: &'a NoiseConfig,
    circuits: BTreeMap<usize, Circuit>,
    initial: State,
    observable: HamiltonianSpec,
    gammas: Vec<f64>,
    cache: BTreeMap<(usize, u64), NoiseCurve>,
}

impl Curves<'_> {
    fn get(&mut self, p: usize, lambda: f64) -> Result<NoiseCurve> {
        let key = (p, lambda.to_bits());
        if let Some(curve) = self.cache.get(&key) {
            return Ok(curve.clone());
        }
        let circuit = self
            .circuits
            .get(&p)
            .ok_or_else(|| Error::usage("p", format!("depth {p} was not optimized")))?;
        let model = NoiseModel {
            gamma: 0.0,
            lambda,
            n_samples: self.c.samples,
            seed: self.c.seed,
            correlation: self.c.correlation,
        };
        let curve = noise_curve(p, circuit, &self.initial, &self.observable, &model, &self.gammas)?;
        self.cache.insert(key, curve.clone());
        Ok(curve)
    }
}

pub(super) fn run(c: &NoiseConfig) -> Result<Outcome> {
    let observable = cost_hamiltonian(c.l)?;
    let ground = ground_state(&observable)?;
    let options = multistart(c.restarts, c.seed);
    let mut out = Outcome::default();

    let mut circuits = BTreeMap::new();
    let mut angles = BTreeMap::new();
    for &p in &c.p {
        let opt = optimize_gs_exact(c.l, p, c.objective, &ground, &options)?;
        // gate noise scales with the angle, so use the smallest equivalent angles
        let params = opt.params.minimal_representative();
        circuits.insert(p, gs_circuit(c.l, &params)?);
        angles.insert(format!("p{p}"), params.to_vec());
    }
    out.note("angles", angles);

    let mut curves = Curves {
        c,
        circuits,
        initial: State::zero(c.l)?,
        observable,
        gammas: gamma_grid(c.gamma_max, c.gamma_step)?,
        cache: BTreeMap::new(),
    };

    let mut rows = Table::new("", &["p", "lambda", "gamma", "mean", "std_error"]);
    let mut thresholds = Table::new("threshold", &["lambda", "shallow_p", "deep_p", "kind", "gamma_star", "note"]);
    let mut threshold_summary = BTreeMap::new();
    let [shallow, deep] = c.threshold;
    for &lambda in &c.lambdas {
        for &p in &c.p {
            for r in curves.get(p, lambda)?.rows {
                rows.push(vec![p.to_string(), fmt_f64(lambda), fmt_f64(r.gamma), fmt_f64(r.mean), fmt_f64(r.std_error)]);
            }
        }
        if !(c.p.contains(&shallow) && c.p.contains(&deep)) {
            continue;
        }
        let found = find_threshold(&curves.get(shallow, lambda)?, &curves.get(deep, lambda)?);
        let (kind, gamma, note) = match found {
            Ok(Threshold::Crossing(g)) => ("crossing", Some(g), String::new()),
            Ok(Threshold::AtOrBelowStart(g)) => ("at_or_below_start", Some(g), String::new()),
            Err(e @ Error::NoCrossing { .. }) => ("none", None, e.to_string()),
            Err(e) => return Err(e),
        };
        thresholds.push(vec![
            fmt_f64(lambda),
            shallow.to_string(),
            deep.to_string(),
            kind.to_string(),
            fmt_opt(gamma),
            note,
        ]);
        threshold_summary.insert(fmt_f64(lambda), gamma);
    }
    out.note("threshold", threshold_summary);

    let mut inference = Table::new("inference", &["lambda", "p", "measured", "gamma_hat"]);
    let mut all_lambdas: Vec<f64> = c.lambdas.iter().chain(&c.calibration_lambdas).copied().collect();
    all_lambdas.sort_by(f64::total_cmp);
    all_lambdas.dedup();
    for &lambda in &all_lambdas {
        for m in &c.measured {
            let g = infer_gamma(&curves.get(m.p, lambda)?, m.energy).ok();
            inference.push(vec![fmt_f64(lambda), m.p.to_string(), fmt_f64(m.energy), fmt_opt(g)]);
        }
    }

    let mut tables = vec![rows, thresholds, inference];
    if !c.calibration_lambdas.is_empty() && c.measured.len() >= 2 {
        let measured: Vec<(usize, f64)> = c.measured.iter().map(|m| (m.p, m.energy)).collect();
        let cal = calibrate_lambda(&measured, &c.calibration_lambdas, |p, lambda| curves.get(p, lambda))?;
        let mut table = Table::new("calibration", &["lambda", "variance", "excluded"]);
        for row in &cal.rows {
            table.push(vec![fmt_f64(row.lambda), fmt_opt(row.variance), row.excluded.to_string()]);
        }
        out.note("lambda_star", cal.best_lambda);
        tables.push(table);
    }
    out.tables = tables;
    Ok(out)
}
