use super::{penalized, rescore, scoring_cutoff, OptimizationResult, SearchSpace, MAX_DIMS};
use crate::error::{Error, Result};
use crate::scheme::Truncation;
use crate::tolerances::AVG_SUBRANGES;

/// Initial simplex edge, as a fraction of each dimension's range.
const STEP: f64 = 0.02;
const MAX_RESTARTS: usize = 20;

struct Simplex {
    points: Vec<Vec<f64>>,
    values: Vec<f64>,
}

impl Simplex {
    fn order(&mut self) {
        let mut idx: Vec<usize> = (0..self.values.len()).collect();
        idx.sort_by(|&a, &b| self.values[a].total_cmp(&self.values[b]));
        self.points = idx.iter().map(|&i| self.points[i].clone()).collect();
        self.values = idx.iter().map(|&i| self.values[i]).collect();
    }

    fn converged(&self) -> bool {
        let f0 = self.values[0];
        let spread = self.values.last().unwrap() - f0;
        let size = self.points[1..]
            .iter()
            .map(|p| p.iter().zip(&self.points[0]).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
            .fold(0.0, f64::max);
        spread <= 1e-16 + 1e-12 * f0.abs() && size <= 1e-9
    }
}

/// Bounded Nelder-Mead in coordinates scaled to the unit box. Returns the
/// best point and value and the number of evaluations used.
fn nelder_mead<F: FnMut(&[f64]) -> f64>(f: &mut F, start: &[f64], f_start: f64, budget: usize) -> (Vec<f64>, f64, usize) {
    let n = start.len();
    let nf = n as f64;
    let (alpha, gamma, rho, sigma) = (1.0, 1.0 + 2.0 / nf, 0.75 - 0.5 / nf, 1.0 - 1.0 / nf);
    let mut evals = 0;
    let mut eval = |x: &[f64], evals: &mut usize| {
        *evals += 1;
        f(x)
    };

    let mut s = Simplex { points: vec![start.to_vec()], values: vec![f_start] };
    for i in 0..n {
        let mut p = start.to_vec();
        p[i] += if p[i] + STEP <= 1.0 { STEP } else { -STEP };
        s.values.push(eval(&p, &mut evals));
        s.points.push(p);
    }

    while evals < budget {
        s.order();
        if s.converged() {
            break;
        }
        let worst = s.points[n].clone();
        let fw = s.values[n];
        let centroid: Vec<f64> = (0..n).map(|j| s.points[..n].iter().map(|p| p[j]).sum::<f64>() / nf).collect();
        let along = |t: f64| -> Vec<f64> { centroid.iter().zip(&worst).map(|(c, w)| c + t * (c - w)).collect() };

        let xr = along(alpha);
        let fr = eval(&xr, &mut evals);
        if fr < s.values[0] {
            let xe = along(alpha * gamma);
            let fe = eval(&xe, &mut evals);
            if fe < fr {
                s.points[n] = xe;
                s.values[n] = fe;
            } else {
                s.points[n] = xr;
                s.values[n] = fr;
            }
            continue;
        }
        if fr < s.values[n - 1] {
            s.points[n] = xr;
            s.values[n] = fr;
            continue;
        }
        let (xc, fc) = if fr < fw {
            let x = along(alpha * rho);
            let v = eval(&x, &mut evals);
            (x, v)
        } else {
            let x = along(-rho);
            let v = eval(&x, &mut evals);
            (x, v)
        };
        if fc < fr.min(fw) {
            s.points[n] = xc;
            s.values[n] = fc;
            continue;
        }
        // shrink toward the best vertex
        let best = s.points[0].clone();
        for i in 1..=n {
            let p: Vec<f64> = best.iter().zip(&s.points[i]).map(|(b, x)| b + sigma * (x - b)).collect();
            s.values[i] = eval(&p, &mut evals);
            s.points[i] = p;
        }
    }
    s.order();
    (s.points.swap_remove(0), s.values[0], evals)
}

/// Simplex descent on the free dimensions of `space`, starting from
/// `result.best_params` and scored at the smallest cutoff from `cutoff`
/// where the starting point fits. The simplex is restarted at the best
/// vertex until a restart brings no gain or `max_iters` evaluations are
/// spent. The returned misfit never exceeds the input's.
pub fn local_polish(
    result: &OptimizationResult,
    space: &SearchSpace,
    cutoff: usize,
    max_iters: usize,
) -> Result<OptimizationResult> {
    space.validate()?;
    if result.best_params.measurement.kind() != space.kind {
        return Err(Error::InvalidParameter("result and search space disagree on the measurement".into()));
    }
    let target = &result.target;
    let cutoff = scoring_cutoff(&result.best_params, target, cutoff)?;
    let trunc = Truncation::new(cutoff);
    let target_vec = target.build(cutoff)?;
    let free = space.mask.free_dims(space.kind);

    let mut base = super::encode(&result.best_params);
    space.project(&mut base);
    let to_genes = |u: &[f64]| {
        let mut g: [f64; MAX_DIMS] = base;
        for (k, &i) in free.iter().enumerate() {
            let d = space.bounds.dims[i];
            g[i] = d.lo + u[k] * d.width();
        }
        space.project(&mut g);
        g
    };
    let mut f = |u: &[f64]| penalized(&space.decode(&to_genes(u)), &target_vec, &trunc);

    let mut u: Vec<f64> = free
        .iter()
        .map(|&i| {
            let d = space.bounds.dims[i];
            (base[i] - d.lo) / d.width()
        })
        .collect();
    let mut fu = f(&u);
    let mut evals = 1usize;
    if !free.is_empty() {
        for _ in 0..MAX_RESTARTS {
            if evals >= max_iters {
                break;
            }
            let (next, fnext, used) = nelder_mead(&mut f, &u, fu, max_iters - evals);
            evals += used;
            let gain = fu - fnext;
            if fnext < fu {
                u = next;
                fu = fnext;
            }
            if !(gain > 1e-3 * fu.abs().max(1e-300)) {
                break;
            }
        }
    }

    let params = space.decode(&to_genes(&u));
    let scored = rescore(&params, target, cutoff, AVG_SUBRANGES)?;
    let evaluations_count = result.evaluations_count + evals as u64;
    if scored.misfit < result.best_misfit {
        Ok(OptimizationResult {
            best_params: params,
            best_misfit: scored.misfit,
            success_prob: scored.success_prob,
            eps_avg: scored.eps_avg,
            cutoff: scored.cutoff,
            evaluations_count,
            ..result.clone()
        })
    } else {
        Ok(OptimizationResult { evaluations_count, ..result.clone() })
    }
}
