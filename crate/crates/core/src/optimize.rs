//! Derivative-free local search and seeded multistart.

use std::f64::consts::PI;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::rng;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NelderMeadOptions {
    pub max_evaluations: usize,
    /// Stop once the simplex spread in objective value is below this.
    pub f_tolerance: f64,
    /// and the spread in parameters is below this.
    pub x_tolerance: f64,
    /// Edge length of the initial simplex.
    pub initial_step: f64,
}

impl Default for NelderMeadOptions {
    fn default() -> Self {
        Self {
            max_evaluations: 2000,
            f_tolerance: 1e-9,
            x_tolerance: 1e-9,
            initial_step: 0.25,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocalResult {
    pub x: Vec<f64>,
    pub value: f64,
    pub evaluations: usize,
    pub converged: bool,
}

/// Minimizes `f` from `x0` with the standard reflection/expansion/contraction/shrink steps.
pub fn nelder_mead<F>(mut f: F, x0: &[f64], options: &NelderMeadOptions) -> LocalResult
where
    F: FnMut(&[f64]) -> f64,
{
    let n = x0.len();
    let mut evaluations = 0usize;
    let mut eval = |x: &[f64], count: &mut usize| {
        *count += 1;
        let v = f(x);
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    };
    if n == 0 {
        let value = eval(x0, &mut evaluations);
        return LocalResult {
            x: Vec::new(),
            value,
            evaluations,
            converged: true,
        };
    }

    let mut simplex: Vec<Vec<f64>> = Vec::with_capacity(n + 1);
    simplex.push(x0.to_vec());
    for k in 0..n {
        let mut v = x0.to_vec();
        v[k] += options.initial_step;
        simplex.push(v);
    }
    let mut values: Vec<f64> = simplex.iter().map(|v| eval(v, &mut evaluations)).collect();

    let (alpha, gamma, rho, sigma) = (1.0, 2.0, 0.5, 0.5);
    let mut converged = false;
    while evaluations < options.max_evaluations {
        let mut order: Vec<usize> = (0..=n).collect();
        order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
        simplex = order.iter().map(|&k| simplex[k].clone()).collect();
        values = order.iter().map(|&k| values[k]).collect();

        let f_spread = values[1..].iter().map(|v| (v - values[0]).abs()).fold(0.0, f64::max);
        let x_spread = simplex[1..]
            .iter()
            .flat_map(|v| v.iter().zip(&simplex[0]).map(|(a, b)| (a - b).abs()))
            .fold(0.0, f64::max);
        if f_spread <= options.f_tolerance && x_spread <= options.x_tolerance {
            converged = true;
            break;
        }

        let centroid: Vec<f64> = (0..n)
            .map(|k| simplex[..n].iter().map(|v| v[k]).sum::<f64>() / n as f64)
            .collect();
        let toward = |t: f64, from: &[f64]| -> Vec<f64> {
            centroid.iter().zip(from).map(|(c, w)| c + t * (w - c)).collect()
        };

        let reflected = toward(-alpha, &simplex[n]);
        let f_r = eval(&reflected, &mut evaluations);
        if f_r < values[0] {
            let expanded = toward(-alpha * gamma, &simplex[n]);
            let f_e = eval(&expanded, &mut evaluations);
            if f_e < f_r {
                simplex[n] = expanded;
                values[n] = f_e;
            } else {
                simplex[n] = reflected;
                values[n] = f_r;
            }
            continue;
        }
        if f_r < values[n - 1] {
            simplex[n] = reflected;
            values[n] = f_r;
            continue;
        }
        // outside contraction when the reflection helped a little, inside otherwise
        let t = if f_r < values[n] { -alpha * rho } else { rho };
        let contracted = toward(t, &simplex[n]);
        let f_c = eval(&contracted, &mut evaluations);
        if f_c < values[n].min(f_r) {
            simplex[n] = contracted;
            values[n] = f_c;
            continue;
        }
        let best = simplex[0].clone();
        for k in 1..=n {
            simplex[k] = best
                .iter()
                .zip(&simplex[k])
                .map(|(b, v)| b + sigma * (v - b))
                .collect();
            values[k] = eval(&simplex[k], &mut evaluations);
        }
    }

    let best = (0..=n)
        .min_by(|&a, &b| values[a].total_cmp(&values[b]))
        .expect("simplex is nonempty");
    LocalResult {
        x: simplex[best].clone(),
        value: values[best],
        evaluations,
        converged,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MultistartOptions {
    pub restarts: usize,
    pub seed: u64,
    /// Starting points are uniform in `[-bound, bound]` per coordinate.
    pub bound: f64,
    pub local: NelderMeadOptions,
}

impl Default for MultistartOptions {
    fn default() -> Self {
        Self {
            restarts: 20,
            seed: 1,
            bound: PI,
            local: NelderMeadOptions::default(),
        }
    }
}

/// One restart of a multistart run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RestartRecord {
    pub index: usize,
    pub start: Vec<f64>,
    pub x: Vec<f64>,
    pub value: f64,
    pub evaluations: usize,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultistartResult {
    pub best_index: usize,
    pub x: Vec<f64>,
    pub value: f64,
    pub trace: Vec<RestartRecord>,
}

/// Objective values closer than this count as ties; the lower restart index wins.
pub const TIE_TOLERANCE: f64 = 1e-12;

/// Starting point of restart `index`, independent of how restarts are scheduled.
pub fn restart_start(seed: u64, index: usize, dim: usize, bound: f64) -> Vec<f64> {
    let mut stream = rng::substream(seed, &[index as u64]);
    (0..dim).map(|_| stream.random_range(-bound..=bound)).collect()
}

/// Minimizes `f` from `restarts` random starts in parallel.
pub fn minimize_multistart<F>(f: F, dim: usize, options: &MultistartOptions) -> MultistartResult
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    let restarts = options.restarts.max(1);
    let trace: Vec<RestartRecord> = (0..restarts)
        .into_par_iter()
        .map(|index| {
            let start = restart_start(options.seed, index, dim, options.bound);
            let local = nelder_mead(&f, &start, &options.local);
            RestartRecord {
                index,
                start,
                x: local.x,
                value: local.value,
                evaluations: local.evaluations,
                converged: local.converged,
            }
        })
        .collect();
    let mut best = 0;
    for r in &trace[1..] {
        if r.value < trace[best].value - TIE_TOLERANCE {
            best = r.index;
        }
    }
    MultistartResult {
        best_index: best,
        x: trace[best].x.clone(),
        value: trace[best].value,
        trace,
    }
}

/// Reduces an angle into `[-π, π]`.
pub fn wrap_angle(theta: f64) -> f64 {
    let wrapped = (theta + PI).rem_euclid(2.0 * PI) - PI;
    if wrapped == -PI && theta > 0.0 {
        PI
    } else {
        wrapped
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn rosenbrock(x: &[f64]) -> f64 {
        (1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2)
    }

    #[test]
    fn finds_rosenbrock_minimum() {
        let r = nelder_mead(rosenbrock, &[-1.2, 1.0], &NelderMeadOptions::default());
        assert!(r.converged);
        assert!((r.x[0] - 1.0).abs() < 1e-4 && (r.x[1] - 1.0).abs() < 1e-4, "{:?}", r.x);
    }

    #[test]
    fn evaluation_cap_respected() {
        let opts = NelderMeadOptions {
            max_evaluations: 30,
            ..Default::default()
        };
        let r = nelder_mead(rosenbrock, &[-1.2, 1.0], &opts);
        assert!(!r.converged);
        // the cap is checked per iteration, which can spend at most n + 2 more calls
        assert!(r.evaluations <= 30 + 4);
    }

    #[test]
    fn multistart_prefers_global_minimum() {
        // two wells, the deeper one at x = 2
        let f = |x: &[f64]| ((x[0] + 2.0).powi(2)).min((x[0] - 2.0).powi(2) - 0.5);
        let r = minimize_multistart(f, 1, &MultistartOptions::default());
        assert!((r.x[0] - 2.0).abs() < 1e-4);
        assert_eq!(r.trace.len(), 20);
    }

    #[test]
    fn more_restarts_never_worse() {
        let f = |x: &[f64]| (3.0 * x[0]).cos() + 0.1 * x[0] * x[0] + (2.0 * x[1]).sin();
        let one = minimize_multistart(
            f,
            2,
            &MultistartOptions {
                restarts: 1,
                ..Default::default()
            },
        );
        let many = minimize_multistart(f, 2, &MultistartOptions::default());
        assert!(many.value <= one.value);
        assert_eq!(many.trace[0], one.trace[0]);
    }

    #[test]
    fn ties_go_to_lowest_index() {
        let r = minimize_multistart(|_: &[f64]| 1.0, 2, &MultistartOptions::default());
        assert_eq!(r.best_index, 0);
    }

    #[test]
    fn thread_count_does_not_change_result() {
        let f = |x: &[f64]| (x[0] - 0.3).powi(2) + (x[1] * 2.0).cos();
        let run = |threads| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| minimize_multistart(f, 2, &MultistartOptions::default()))
        };
        assert_eq!(run(1), run(4));
    }

    proptest! {
        #[test]
        fn wrapped_angles_stay_in_range_and_equivalent(theta in -100.0f64..100.0) {
            let w = wrap_angle(theta);
            prop_assert!((-PI..=PI).contains(&w));
            prop_assert!((w.sin() - theta.sin()).abs() < 1e-9);
            prop_assert!((w.cos() - theta.cos()).abs() < 1e-9);
        }
    }
}
