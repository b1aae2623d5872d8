use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use super::{penalized, rescore, target_cutoff, GaConfig, OptimizationResult, SearchSpace, MAX_DIMS};
use crate::error::Result;
use crate::fock::FockVector;
use crate::scheme::Truncation;
use crate::states::TargetSpec;

type Genome = [f64; MAX_DIMS];

struct Individual {
    genes: Genome,
    fitness: f64,
}

struct Problem<'a> {
    space: &'a SearchSpace,
    target: FockVector,
    trunc: Truncation,
    free: Vec<usize>,
}

impl Problem<'_> {
    fn fitness(&self, g: &Genome) -> f64 {
        penalized(&self.space.decode(g), &self.target, &self.trunc)
    }

    fn evaluate(&self, genomes: Vec<Genome>) -> Vec<Individual> {
        let fit: Vec<f64> = genomes.par_iter().map(|g| self.fitness(g)).collect();
        genomes.into_iter().zip(fit).map(|(genes, fitness)| Individual { genes, fitness }).collect()
    }

    fn random_genome(&self, rng: &mut ChaCha8Rng) -> Genome {
        let mut g = [0.0; MAX_DIMS];
        for &i in &self.free {
            let d = self.space.bounds.dims[i];
            g[i] = if d.periodic { rng.gen_range(d.lo..d.hi) } else { rng.gen_range(d.lo..=d.hi) };
        }
        self.space.project(&mut g);
        g
    }
}

fn tournament<'a>(pop: &'a [Individual], k: usize, rng: &mut ChaCha8Rng) -> &'a Individual {
    let mut best = &pop[rng.gen_range(0..pop.len())];
    for _ in 1..k {
        let c = &pop[rng.gen_range(0..pop.len())];
        if c.fitness < best.fitness {
            best = c;
        }
    }
    best
}

/// Signed shortest difference `b - a` on a circle of circumference `w`.
fn wrapped_diff(a: f64, b: f64, w: f64) -> f64 {
    let d = (b - a).rem_euclid(w);
    if d > 0.5 * w {
        d - w
    } else {
        d
    }
}

const BLEND_ALPHA: f64 = 0.5;

fn crossover(a: &Genome, b: &Genome, prob: &Problem, rng: &mut ChaCha8Rng) -> Genome {
    let mut child = *a;
    for &i in &prob.free {
        let d = prob.space.bounds.dims[i];
        let u = rng.gen_range(-BLEND_ALPHA..1.0 + BLEND_ALPHA);
        let diff = if d.periodic { wrapped_diff(a[i], b[i], d.width()) } else { b[i] - a[i] };
        child[i] = a[i] + u * diff;
    }
    child
}

fn mutate(g: &mut Genome, prob: &Problem, sigma_fraction: f64, rng: &mut ChaCha8Rng) {
    let rate = 1.0 / prob.free.len() as f64;
    for &i in &prob.free {
        if rng.gen::<f64>() < rate {
            let z: f64 = rng.sample(StandardNormal);
            g[i] += z * sigma_fraction * prob.space.bounds.dims[i].width();
        }
    }
}

fn sort_by_fitness(pop: &mut [Individual]) {
    pop.sort_by(|a, b| a.fitness.total_cmp(&b.fitness));
}

/// One restart. Appends to `trace` the running best of `global_best` and
/// this run after every generation.
fn run(prob: &Problem, cfg: &GaConfig, restart: u64, global_best: f64, trace: &mut Vec<f64>, evals: &mut u64) -> Individual {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(restart);

    let init: Vec<Genome> = (0..cfg.population_size).map(|_| prob.random_genome(&mut rng)).collect();
    *evals += init.len() as u64;
    let mut pop = prob.evaluate(init);
    sort_by_fitness(&mut pop);
    let mut best_so_far = global_best.min(pop[0].fitness);
    trace.push(best_so_far);

    for _ in 1..cfg.generations {
        let mut children = Vec::with_capacity(cfg.population_size - cfg.elitism_count);
        while children.len() < cfg.population_size - cfg.elitism_count {
            let a = tournament(&pop, cfg.tournament_size, &mut rng);
            let mut g = if rng.gen::<f64>() < cfg.crossover_rate {
                let b = tournament(&pop, cfg.tournament_size, &mut rng);
                crossover(&a.genes, &b.genes, prob, &mut rng)
            } else {
                a.genes
            };
            mutate(&mut g, prob, cfg.mutation_sigma_fraction, &mut rng);
            prob.space.project(&mut g);
            children.push(g);
        }
        *evals += children.len() as u64;
        let mut next = prob.evaluate(children);
        pop.truncate(cfg.elitism_count);
        pop.append(&mut next);
        sort_by_fitness(&mut pop);
        best_so_far = best_so_far.min(pop[0].fitness);
        trace.push(best_so_far);
    }
    pop.swap_remove(0)
}

/// Genetic search for the parameters minimizing the misfit to `target`.
///
/// Each restart draws from its own ChaCha8 stream of `cfg.seed`. Fitness is
/// evaluated in parallel, but all random draws happen sequentially, so the
/// result depends only on the inputs. The winner is re-scored at
/// `cfg.final_cutoff` (raised as needed) with the strict tail limit.
pub fn optimize(target: &TargetSpec, space: &SearchSpace, cfg: &GaConfig) -> Result<OptimizationResult> {
    cfg.validate()?;
    space.validate()?;
    let (search_cutoff, target_vec) = target_cutoff(target, cfg.search_cutoff)?;
    let prob = Problem {
        space,
        target: target_vec,
        trunc: Truncation::with_tolerance(search_cutoff, cfg.search_tail_tolerance),
        free: space.mask.free_dims(space.kind),
    };

    let mut trace = Vec::with_capacity(cfg.restarts * cfg.generations);
    let mut evals = 0u64;
    let best_genes = if prob.free.is_empty() {
        let mut g = [0.0; MAX_DIMS];
        space.project(&mut g);
        let f = prob.fitness(&g);
        evals += 1;
        trace.resize(cfg.restarts * cfg.generations, f);
        g
    } else {
        let mut best: Option<Individual> = None;
        for restart in 0..cfg.restarts as u64 {
            let global = best.as_ref().map_or(f64::INFINITY, |b| b.fitness);
            let cand = run(&prob, cfg, restart, global, &mut trace, &mut evals);
            if best.as_ref().is_none_or(|b| cand.fitness < b.fitness) {
                best = Some(cand);
            }
        }
        best.expect("at least one restart").genes
    };

    let best_params = space.decode(&best_genes);
    let scored = rescore(&best_params, target, cfg.final_cutoff, cfg.n_subranges)?;
    Ok(OptimizationResult {
        target: target.clone(),
        best_params,
        best_misfit: scored.misfit,
        success_prob: scored.success_prob,
        eps_avg: scored.eps_avg,
        trace,
        seed: cfg.seed,
        evaluations_count: evals,
        cutoff: scored.cutoff,
    })
}
