//! Projected limited-memory BFGS for smooth objectives under box constraints.
//!
//! Variables sitting on a bound with the gradient pushing outward are held
//! fixed for the iteration; the two-loop recursion runs on the remaining free
//! variables and the step is projected back onto the box during an Armijo
//! backtracking search.

use std::collections::VecDeque;

const MEMORY: usize = 6;
const ARMIJO_C1: f64 = 1e-4;
const MAX_BACKTRACKS: usize = 60;

#[derive(Debug, Clone)]
pub(crate) struct Options {
    pub max_iterations: usize,
    pub gradient_tolerance: f64,
}

#[derive(Debug, Clone)]
pub(crate) struct Minimum {
    pub x: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
}

/// Raised when the objective or its gradient is not finite at `x`.
#[derive(Debug, Clone)]
pub(crate) struct NonFinite(pub Vec<f64>);

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn project(x: &mut [f64], lower: &[f64], upper: &[f64]) {
    for ((xi, lo), hi) in x.iter_mut().zip(lower).zip(upper) {
        *xi = xi.clamp(*lo, *hi);
    }
}

fn projected_gradient_norm(x: &[f64], g: &[f64], lower: &[f64], upper: &[f64]) -> f64 {
    x.iter()
        .zip(g)
        .zip(lower.iter().zip(upper))
        .map(|((xi, gi), (lo, hi))| ((xi - gi).clamp(*lo, *hi) - xi).abs())
        .fold(0.0, f64::max)
}

/// `-H g` restricted to the free variables.
fn search_direction(g: &[f64], free: &[bool], memory: &VecDeque<(Vec<f64>, Vec<f64>)>) -> Vec<f64> {
    let mask = |v: &[f64]| -> Vec<f64> {
        v.iter()
            .zip(free)
            .map(|(x, f)| if *f { *x } else { 0.0 })
            .collect()
    };
    let mut q = mask(g);
    let pairs: Vec<(Vec<f64>, Vec<f64>, f64)> = memory
        .iter()
        .filter_map(|(s, y)| {
            let (s, y) = (mask(s), mask(y));
            let sy = dot(&s, &y);
            (sy > 1e-12 * dot(&y, &y).max(f64::MIN_POSITIVE)).then(|| (s, y, 1.0 / sy))
        })
        .collect();

    let mut alphas = Vec::with_capacity(pairs.len());
    for (s, y, rho) in pairs.iter().rev() {
        let a = rho * dot(s, &q);
        for (qi, yi) in q.iter_mut().zip(y) {
            *qi -= a * yi;
        }
        alphas.push(a);
    }
    if let Some((s, y, _)) = pairs.last() {
        let scale = dot(s, y) / dot(y, y);
        q.iter_mut().for_each(|qi| *qi *= scale);
    }
    for ((s, y, rho), a) in pairs.iter().zip(alphas.iter().rev()) {
        let b = rho * dot(y, &q);
        for (qi, si) in q.iter_mut().zip(s) {
            *qi += (a - b) * si;
        }
    }
    q.iter_mut().for_each(|qi| *qi = -*qi);
    q
}

pub(crate) fn minimize<F>(
    objective: F,
    start: &[f64],
    lower: &[f64],
    upper: &[f64],
    options: &Options,
) -> Result<Minimum, NonFinite>
where
    F: Fn(&[f64]) -> (f64, Vec<f64>),
{
    let finite = |f: f64, g: &[f64]| f.is_finite() && g.iter().all(|v| v.is_finite());

    let mut x = start.to_vec();
    project(&mut x, lower, upper);
    let (mut f, mut g) = objective(&x);
    if !finite(f, &g) {
        return Err(NonFinite(x));
    }

    let mut memory: VecDeque<(Vec<f64>, Vec<f64>)> = VecDeque::with_capacity(MEMORY);
    let mut iterations = 0;
    let mut stalled = false;
    let mut pg = projected_gradient_norm(&x, &g, lower, upper);

    while iterations < options.max_iterations && pg >= options.gradient_tolerance {
        iterations += 1;
        let free: Vec<bool> = x
            .iter()
            .zip(&g)
            .zip(lower.iter().zip(upper))
            .map(|((xi, gi), (lo, hi))| !((*xi <= *lo && *gi > 0.0) || (*xi >= *hi && *gi < 0.0)))
            .collect();

        let mut direction = search_direction(&g, &free, &memory);
        if dot(&direction, &g) >= 0.0 {
            memory.clear();
            direction = search_direction(&g, &free, &memory);
        }

        let mut step = if memory.is_empty() {
            let largest = direction.iter().fold(0.0f64, |m, d| m.max(d.abs()));
            (1.0 / largest).min(1.0)
        } else {
            1.0
        };

        let mut accepted = None;
        for _ in 0..MAX_BACKTRACKS {
            let mut trial: Vec<f64> = x.iter().zip(&direction).map(|(xi, di)| xi + step * di).collect();
            project(&mut trial, lower, upper);
            let delta: Vec<f64> = trial.iter().zip(&x).map(|(a, b)| a - b).collect();
            let predicted = dot(&g, &delta);
            if predicted < 0.0 {
                let (f_trial, g_trial) = objective(&trial);
                if finite(f_trial, &g_trial) && f_trial <= f + ARMIJO_C1 * predicted {
                    accepted = Some((trial, delta, f_trial, g_trial));
                    break;
                }
            }
            step *= 0.5;
        }

        let Some((x_new, s, f_new, g_new)) = accepted else {
            if memory.is_empty() {
                stalled = true;
                break;
            }
            memory.clear();
            continue;
        };

        let y: Vec<f64> = g_new.iter().zip(&g).map(|(a, b)| a - b).collect();
        if dot(&s, &y) > 1e-12 * dot(&y, &y) {
            if memory.len() == MEMORY {
                memory.pop_front();
            }
            memory.push_back((s, y));
        }
        x = x_new;
        f = f_new;
        g = g_new;
        pg = projected_gradient_norm(&x, &g, lower, upper);
    }

    // A search that cannot find any representable decrease is stationary to
    // machine precision; accept it when the projected gradient is tiny.
    let converged = pg < options.gradient_tolerance
        || (stalled && pg < options.gradient_tolerance.sqrt());
    Ok(Minimum {
        x,
        iterations,
        converged,
    })
}
