use super::{angle_header, fmt_f64, fmt_opt, multistart, HybridConfig, Outcome, StartMode, Table};
use crate::error::Result;
use crate::hamiltonian::ground_state;
use crate::noise::NoiseModel;
use crate::qaoa::{
    cost_hamiltonian, hybrid_gradient_descent, optimize_gs_exact, GsAnsatzParams, GsObjective, HybridInit,
    HybridRunConfig,
};

pub(super) fn run(c: &HybridConfig) -> Result<Outcome> {
    let mut out = Outcome::default();
    let init = match c.start {
        StartMode::Random => HybridInit::Random,
        StartMode::Explicit => HybridInit::Explicit(c.angles.clone().unwrap_or_default()),
        StartMode::Warm => {
            let ground = ground_state(&cost_hamiltonian(c.l)?)?;
            let opt = optimize_gs_exact(c.l, c.p, GsObjective::Fidelity, &ground, &multistart(c.restarts, c.seed))?;
            out.note("warm_start_energy", opt.energy);
            HybridInit::Explicit(opt.params.to_vec())
        }
    };
    let run = HybridRunConfig {
        l: c.l,
        p: c.p,
        shots: (!c.exact).then_some(c.shots),
        epsilon: c.epsilon,
        eta: c.eta,
        iterations: c.iterations,
        seed: c.seed,
        init,
        gradient: c.gradient,
        grad_tol: c.grad_tol,
    };
    let model = NoiseModel {
        gamma: c.gamma,
        lambda: c.lambda,
        n_samples: c.noise_samples,
        seed: c.seed,
        ..NoiseModel::default()
    };
    let noise = (!model.is_noiseless()).then_some(&model);
    let trace = hybrid_gradient_descent(&run, noise)?;

    let mut table = Table::with_header(
        "",
        angle_header(&["iteration"], &GsAnsatzParams::names(c.p), &["energy", "std_error", "gradient_norm"]),
    );
    for step in &trace.steps {
        let mut row = vec![step.iteration.to_string()];
        row.extend(step.params.iter().map(|&a| fmt_f64(a)));
        row.extend([fmt_f64(step.energy), fmt_f64(step.std_error), fmt_opt(step.gradient_norm)]);
        table.push(row);
    }
    let first = trace.steps.first().expect("trace holds the initial point");
    let last = trace.steps.last().expect("trace holds the initial point");
    out.note("initial_energy", first.energy);
    out.note("final_energy", last.energy);
    out.note("final_params", &last.params);
    out.note("diverged", trace.diverged);
    out.note("converged", trace.converged);
    out.tables = vec![table];
    Ok(out)
}
