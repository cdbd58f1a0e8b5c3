//! Exact simulation of the Hull-White factor on a date grid.
//!
//! Each step draws the pair `(x(t+dt), int_t^{t+dt} x ds)` from its joint
//! Gaussian transition law, so both the short rate and the money-market
//! account are exact at grid dates. Paths come in antithetic pairs and are
//! produced in fixed-size blocks, each with its own ChaCha stream, which
//! makes the output independent of the number of worker threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use super::hull_white::{decay_integral, HullWhite};
use crate::error::{Error, Result};

/// Paths per RNG stream. Even, so antithetic pairs never straddle blocks.
pub const BLOCK_SIZE: usize = 512;

/// Simulated factor `x` and its running integral on a grid. Depends only on
/// `(lambda, eta, grid, seed)`, not on the initial curve.
#[derive(Debug, Clone, PartialEq)]
pub struct FactorPaths {
    grid: Vec<f64>,
    n_paths: usize,
    seed: u64,
    lambda: f64,
    eta: f64,
    /// Row-major `[n_paths x grid.len()]`.
    x: Vec<f64>,
    integral: Vec<f64>,
}

/// Short rates and money-market account on the grid.
#[derive(Debug, Clone, PartialEq)]
pub struct PathSet {
    pub grid_times: Vec<f64>,
    pub n_paths: usize,
    pub rng_seed: u64,
    /// Row-major `[n_paths x grid.len()]`.
    pub short_rate: Vec<f64>,
    /// Row-major `[n_paths x grid.len()]`, first column equal to one.
    pub money_market: Vec<f64>,
}

impl PathSet {
    pub fn short_rate_at(&self, path: usize, i: usize) -> f64 {
        self.short_rate[path * self.grid_times.len() + i]
    }

    pub fn money_market_at(&self, path: usize, i: usize) -> f64 {
        self.money_market[path * self.grid_times.len() + i]
    }
}

pub(crate) fn validate_grid(grid: &[f64]) -> Result<()> {
    if grid.len() < 2 {
        return Err(Error::input("simulation grid needs at least two dates"));
    }
    if grid[0] != 0.0 {
        return Err(Error::input("simulation grid must start at t=0"));
    }
    if grid.windows(2).any(|w| !(w[1] > w[0])) || grid.iter().any(|t| !t.is_finite()) {
        return Err(Error::input("simulation grid must be strictly increasing"));
    }
    Ok(())
}

impl FactorPaths {
    pub fn simulate(model: &HullWhite, grid: &[f64], n_paths: usize, seed: u64) -> Result<Self> {
        validate_grid(grid)?;
        if n_paths < 2 || !n_paths.is_multiple_of(2) {
            return Err(Error::input(format!(
                "path count {n_paths} must be even and at least 2 (antithetic pairs)"
            )));
        }
        model.curve().discount(*grid.last().expect("non-empty grid"))?;
        let n_dates = grid.len();
        let steps = transition_laws(model, grid);

        let mut x = vec![0.0; n_paths * n_dates];
        let mut integral = vec![0.0; n_paths * n_dates];
        x.par_chunks_mut(BLOCK_SIZE * n_dates)
            .zip(integral.par_chunks_mut(BLOCK_SIZE * n_dates))
            .enumerate()
            .for_each(|(block, (xb, ib))| {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(block as u64);
                let mut normals = vec![0.0; 2 * (n_dates - 1)];
                let block_paths = xb.len() / n_dates;
                for pair in 0..block_paths / 2 {
                    for z in normals.iter_mut() {
                        *z = StandardNormal.sample(&mut rng);
                    }
                    for (sign, path) in [(1.0, 2 * pair), (-1.0, 2 * pair + 1)] {
                        let row = path * n_dates;
                        let (mut xv, mut iv) = (0.0, 0.0);
                        for (k, law) in steps.iter().enumerate() {
                            let z1 = sign * normals[2 * k];
                            let z2 = sign * normals[2 * k + 1];
                            let x_new = law.decay * xv + law.x_sd * z1;
                            iv += law.mean_integral * xv + law.loading * z1 + law.residual_sd * z2;
                            xv = x_new;
                            xb[row + k + 1] = xv;
                            ib[row + k + 1] = iv;
                        }
                    }
                }
            });

        Ok(Self {
            grid: grid.to_vec(),
            n_paths,
            seed,
            lambda: model.lambda(),
            eta: model.eta(),
            x,
            integral,
        })
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn n_paths(&self) -> usize {
        self.n_paths
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn factor(&self, path: usize, i: usize) -> f64 {
        self.x[path * self.grid.len() + i]
    }

    pub fn integral(&self, path: usize, i: usize) -> f64 {
        self.integral[path * self.grid.len() + i]
    }

    /// Checks that a model shares the dynamics these paths were drawn with.
    pub fn check_model(&self, model: &HullWhite) -> Result<()> {
        if model.lambda() != self.lambda || model.eta() != self.eta {
            return Err(Error::input(
                "factor paths were simulated with different Hull-White parameters",
            ));
        }
        model.curve().discount(*self.grid.last().expect("non-empty grid"))?;
        Ok(())
    }

    /// `ln M(T_i)` on a path: `int x + int phi` where `int_0^T phi = -ln P(0,T) + V(T)/2`.
    pub fn log_money_market(&self, model: &HullWhite, path: usize, i: usize) -> f64 {
        let t = self.grid[i];
        self.integral(path, i) - model.curve().log_discount_unchecked(t)
            + 0.5 * model.integral_variance(t)
    }

    /// Short rates and money-market values under `model`'s curve.
    pub fn path_set(&self, model: &HullWhite) -> Result<PathSet> {
        self.check_model(model)?;
        let n_dates = self.grid.len();
        let shift: Vec<f64> = self.grid.iter().map(|&t| model.short_rate(t, 0.0)).collect();
        let log_m_shift: Vec<f64> = self
            .grid
            .iter()
            .map(|&t| -model.curve().log_discount_unchecked(t) + 0.5 * model.integral_variance(t))
            .collect();
        let mut short_rate = vec![0.0; self.x.len()];
        let mut money_market = vec![0.0; self.x.len()];
        for p in 0..self.n_paths {
            for i in 0..n_dates {
                let idx = p * n_dates + i;
                short_rate[idx] = self.x[idx] + shift[i];
                money_market[idx] = if i == 0 { 1.0 } else { (self.integral[idx] + log_m_shift[i]).exp() };
            }
        }
        Ok(PathSet {
            grid_times: self.grid.clone(),
            n_paths: self.n_paths,
            rng_seed: self.seed,
            short_rate,
            money_market,
        })
    }
}

/// Simulates short rates and money-market account in one call.
pub fn simulate_paths(model: &HullWhite, grid: &[f64], n_paths: usize, seed: u64) -> Result<PathSet> {
    FactorPaths::simulate(model, grid, n_paths, seed)?.path_set(model)
}

#[derive(Debug, Clone, Copy)]
struct TransitionLaw {
    decay: f64,
    x_sd: f64,
    mean_integral: f64,
    loading: f64,
    residual_sd: f64,
}

fn transition_laws(model: &HullWhite, grid: &[f64]) -> Vec<TransitionLaw> {
    let l = model.lambda();
    let eta2 = model.eta() * model.eta();
    grid.windows(2)
        .map(|w| {
            let dt = w[1] - w[0];
            let decay = (-l * dt).exp();
            let b1 = decay_integral(l, dt);
            let b2 = decay_integral(2.0 * l, dt);
            let var_x = eta2 * b2;
            let var_i = (eta2 / (l * l) * (dt - 2.0 * b1 + b2)).max(0.0);
            let cov = eta2 / (2.0 * l * l) * (1.0 - decay).powi(2);
            let x_sd = var_x.sqrt();
            let loading = if x_sd > 0.0 { cov / x_sd } else { 0.0 };
            TransitionLaw {
                decay,
                x_sd,
                mean_integral: b1,
                loading,
                residual_sd: (var_i - loading * loading).max(0.0).sqrt(),
            }
        })
        .collect()
}
