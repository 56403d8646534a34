use super::{angle_header, fmt_f64, multistart, Outcome, Table, TfdSweepConfig};
use crate::error::Result;
use crate::hamiltonian::{build_tfim, Boundary};
use crate::measure;
use crate::pauli::Pauli;
use crate::tfd::optimize_tfd;

pub(super) fn run(c: &TfdSweepConfig) -> Result<Outcome> {
    let family = c.family.with_layers(c.layers);
    let h_a = build_tfim(c.l, c.g, 1.0, Boundary::Ring)?;
    let options = multistart(c.restarts, c.seed);

    let mut observables = Table::new(
        "",
        &["temperature", "beta", "observable", "pauli", "group", "ansatz", "target"],
    );
    let mut params = Table::with_header(
        "params",
        angle_header(
            &["temperature", "beta", "fidelity", "degenerate_ground", "best_restart"],
            &family.param_names(),
            &[],
        ),
    );
    let mut fidelities = Vec::new();
    for &beta in &c.betas {
        let opt = optimize_tfd(family, &h_a, beta, &options)?;
        let t = fmt_f64(beta.temperature());
        let b = beta.to_string();
        for pauli in [Pauli::X, Pauli::Y, Pauli::Z] {
            let ansatz = measure::correlators(&opt.state, c.l, pauli)?;
            let target = measure::correlators(&opt.target.state, c.l, pauli)?;
            for (a, e) in ansatz.entries().iter().zip(target.entries()) {
                observables.push(vec![
                    t.clone(),
                    b.clone(),
                    a.label.clone(),
                    pauli.to_string(),
                    a.group.as_str().to_string(),
                    fmt_f64(a.value),
                    fmt_f64(e.value),
                ]);
            }
        }
        let mut row = vec![
            t,
            b.clone(),
            fmt_f64(opt.fidelity),
            opt.target.degenerate_ground.to_string(),
            opt.trace.best_index.to_string(),
        ];
        row.extend(opt.params.angles.iter().map(|&a| fmt_f64(a)));
        params.push(row);
        fidelities.push((b, opt.fidelity));
    }

    let mut out = Outcome::default();
    let values = fidelities.iter().map(|(_, f)| *f);
    out.note("fidelity_min", values.clone().fold(f64::INFINITY, f64::min));
    out.note("fidelity_max", values.fold(f64::NEG_INFINITY, f64::max));
    out.note(
        "fidelity_by_beta",
        fidelities.into_iter().collect::<std::collections::BTreeMap<_, _>>(),
    );
    out.tables = vec![observables, params];
    Ok(out)
}
