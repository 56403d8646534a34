use std::collections::BTreeMap;

use super::{angle_header, fmt_f64, multistart, GsConfig, Outcome, Table};
use crate::error::Result;
use crate::hamiltonian::{diagonalize, ground_state};
use crate::measure::ring_distance_correlators;
use crate::pauli::Pauli;
use crate::qaoa::{cost_hamiltonian, gs_ansatz, optimize_gs_exact, GsAnsatzParams, GsObjective};

fn objective_name(o: GsObjective) -> &'static str {
    match o {
        GsObjective::Fidelity => "fidelity",
        GsObjective::Energy => "energy",
    }
}

pub(super) fn run(c: &GsConfig) -> Result<Outcome> {
    let h = cost_hamiltonian(c.l)?;
    let spectrum = diagonalize(&h)?;
    let ground = ground_state(&h)?;
    let options = multistart(c.restarts, c.seed);
    let p_max = c.p.iter().copied().max().unwrap_or(0);

    let mut optima = Table::with_header(
        "",
        angle_header(
            &["p", "objective", "fidelity", "energy", "best_restart"],
            &GsAnsatzParams::names(p_max),
            &[],
        ),
    );
    let mut correlators = Table::new(
        "correlators",
        &["p", "objective", "pauli", "distance", "ansatz", "ansatz_spread", "exact"],
    );
    let exact: BTreeMap<_, _> = [Pauli::X, Pauli::Z]
        .into_iter()
        .map(|pauli| Ok((pauli.to_string(), ring_distance_correlators(&ground.state, c.l, pauli)?)))
        .collect::<Result<_>>()?;

    let mut energies = BTreeMap::new();
    let mut fidelities = BTreeMap::new();
    for &p in &c.p {
        for &objective in &c.objectives {
            let opt = optimize_gs_exact(c.l, p, objective, &ground, &options)?;
            let name = objective_name(objective);
            let mut row = vec![
                p.to_string(),
                name.to_string(),
                fmt_f64(opt.fidelity),
                fmt_f64(opt.energy),
                opt.trace.best_index.to_string(),
            ];
            let angles = opt.params.to_vec();
            row.extend((0..2 * p_max).map(|k| angles.get(k).map(|&a| fmt_f64(a)).unwrap_or_default()));
            optima.push(row);

            let state = gs_ansatz(c.l, &opt.params)?;
            for pauli in [Pauli::X, Pauli::Z] {
                let ours = ring_distance_correlators(&state, c.l, pauli)?;
                for ((d, mean, spread), (_, reference, _)) in ours.into_iter().zip(&exact[&pauli.to_string()]) {
                    correlators.push(vec![
                        p.to_string(),
                        name.to_string(),
                        pauli.to_string(),
                        d.to_string(),
                        fmt_f64(mean),
                        fmt_f64(spread),
                        fmt_f64(*reference),
                    ]);
                }
            }
            energies.insert(format!("p{p}_{name}"), opt.energy);
            fidelities.insert(format!("p{p}_{name}"), opt.fidelity);
        }
    }

    let mut out = Outcome::default();
    out.note("ground_energy", ground.energy);
    out.note("gap", spectrum.gap());
    out.note("energy", energies);
    out.note("fidelity", fidelities);
    out.tables = vec![optima, correlators];
    Ok(out)
}
