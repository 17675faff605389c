use rand::Rng;
use rand_distr::StandardNormal;

use super::{Bat, OptimizerConfig, VelocitySign};
use crate::bounds::Bounds;

/// Bats uniform in `bounds` with zero velocity and frequency, loudness and
/// initial pulse rate drawn from the configured ranges.
pub fn initialize_population<R: Rng + ?Sized>(bounds: &Bounds, config: &OptimizerConfig, rng: &mut R) -> Vec<Bat> {
    let (a0, a1) = config.loudness_range;
    let (r0, r1) = config.pulse_range;
    (0..config.population)
        .map(|_| {
            let position = bounds
                .lower()
                .iter()
                .zip(bounds.upper())
                .map(|(&lo, &hi)| lo + rng.random::<f64>() * (hi - lo))
                .collect();
            let loudness = a0 + rng.random::<f64>() * (a1 - a0);
            let pulse = r0 + rng.random::<f64>() * (r1 - r0);
            Bat {
                position,
                velocity: vec![0.0; bounds.dim()],
                frequency: 0.0,
                loudness,
                pulse_rate: pulse,
                initial_pulse_rate: pulse,
                fitness: f64::INFINITY,
            }
        })
        .collect()
}

/// `f_min + r1 (f_max - f_min)`.
pub fn frequency_from(r1: f64, config: &OptimizerConfig) -> f64 {
    config.f_min + r1 * (config.f_max - config.f_min)
}

pub fn frequency_draw<R: Rng + ?Sized>(config: &OptimizerConfig, rng: &mut R) -> f64 {
    frequency_from(rng.random::<f64>(), config)
}

/// Returns the new velocity and the new (clamped) position.
pub fn ba_velocity_position_update(
    bat: &Bat,
    best_position: &[f64],
    f: f64,
    bounds: &Bounds,
    sign: VelocitySign,
) -> (Vec<f64>, Vec<f64>) {
    let s = match sign {
        VelocitySign::Paper => 1.0,
        VelocitySign::Conventional => -1.0,
    };
    let velocity: Vec<f64> = bat
        .velocity
        .iter()
        .zip(&bat.position)
        .zip(best_position)
        .map(|((&v, &x), &xb)| v + s * f * (x - xb))
        .collect();
    let mut position: Vec<f64> = bat.position.iter().zip(&velocity).map(|(x, v)| x + v).collect();
    bounds.clamp_in_place(&mut position);
    (velocity, position)
}

/// Perturbs the best position (when `r2 > pulse_rate`) or the peer by a uniform
/// step in `[-A, A]` per dimension.
pub fn local_random_walk<R: Rng + ?Sized>(
    best_position: &[f64],
    peer_position: &[f64],
    loudness: f64,
    pulse_rate: f64,
    rng: &mut R,
    bounds: &Bounds,
) -> Vec<f64> {
    let r2: f64 = rng.random();
    let origin = if r2 > pulse_rate { best_position } else { peer_position };
    let mut x: Vec<f64> = origin
        .iter()
        .map(|&o| o + rng.random_range(-1.0..=1.0) * loudness)
        .collect();
    bounds.clamp_in_place(&mut x);
    x
}

/// Replaces the bat's position when the candidate is strictly better and
/// `r4 < A`, then updates loudness and pulse rate. Returns whether it accepted.
pub fn greedy_accept(
    bat: &mut Bat,
    candidate: Vec<f64>,
    candidate_fitness: f64,
    r4: f64,
    iteration: usize,
    config: &OptimizerConfig,
) -> bool {
    if candidate_fitness < bat.fitness && r4 < bat.loudness {
        bat.position = candidate;
        bat.fitness = candidate_fitness;
        let (a, r) = update_loudness_pulse(bat, iteration, config);
        bat.loudness = a;
        bat.pulse_rate = r;
        true
    } else {
        false
    }
}

/// `A' = alpha A`, `R' = R0 (1 - exp(-gamma))`, or `R0 (1 - exp(-gamma t))`
/// in time-dependent mode.
pub fn update_loudness_pulse(bat: &Bat, iteration: usize, config: &OptimizerConfig) -> (f64, f64) {
    let exponent = if config.pulse_time_dependent {
        config.gamma * iteration as f64
    } else {
        config.gamma
    };
    (
        config.alpha * bat.loudness,
        bat.initial_pulse_rate * (1.0 - (-exponent).exp()),
    )
}

/// One unconditional bare-bones draw: `N((x_best + x_i)/2, (lambda |x_best - x_i|)^2)`.
pub fn bare_bones_component<R: Rng + ?Sized>(x_i: f64, x_best: f64, lambda: f64, rng: &mut R) -> f64 {
    let z: f64 = rng.sample(StandardNormal);
    0.5 * (x_best + x_i) + lambda * (x_best - x_i).abs() * z
}

/// Per dimension, with probability 1/2 replaces the component by a
/// bare-bones draw, otherwise keeps it; the result is clamped.
pub fn gaussian_barebones_update<R: Rng + ?Sized>(
    position: &[f64],
    best_position: &[f64],
    lambda: f64,
    rng: &mut R,
    bounds: &Bounds,
) -> Vec<f64> {
    let mut x: Vec<f64> = position
        .iter()
        .zip(best_position)
        .map(|(&xi, &xb)| {
            let p: f64 = rng.random();
            if p > 0.5 {
                bare_bones_component(xi, xb, lambda, rng)
            } else {
                xi
            }
        })
        .collect();
    bounds.clamp_in_place(&mut x);
    x
}

/// `0.9 (T - t) / T + 0.1`, falling from 1 at `t = 0` to 0.1 at `t = T`.
pub fn lambda_schedule(t: usize, max_iterations: usize) -> f64 {
    let big_t = max_iterations as f64;
    0.9 * ((big_t - t as f64) / big_t) + 0.1
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bbbat::{make_rng, Variant};

    fn config() -> OptimizerConfig {
        OptimizerConfig::new(Variant::StandardBa, 4, 10)
    }

    fn bat_at(x: Vec<f64>, v: Vec<f64>) -> Bat {
        Bat {
            velocity: v,
            position: x,
            frequency: 0.0,
            loudness: 1.0,
            pulse_rate: 0.5,
            initial_pulse_rate: 1.0,
            fitness: 10.0,
        }
    }

    #[test]
    fn frequency_endpoints() {
        let c = config();
        assert_eq!(frequency_from(0.0, &c), 0.0);
        assert_eq!(frequency_from(1.0, &c), 100.0);
        assert_eq!(frequency_from(0.5, &c), 50.0);
    }

    #[test]
    fn scalar_velocity_update() {
        let b = Bounds::uniform(1, -10.0, 10.0).unwrap();
        let bat = bat_at(vec![2.0], vec![0.0]);
        let (v, x) = ba_velocity_position_update(&bat, &[1.0], 0.5, &b, VelocitySign::Paper);
        assert_eq!((v[0], x[0]), (0.5, 2.5));
        let (v, x) = ba_velocity_position_update(&bat, &[1.0], 0.5, &b, VelocitySign::Conventional);
        assert_eq!((v[0], x[0]), (-0.5, 1.5));
    }

    #[test]
    fn velocity_update_degenerate_cases() {
        let b = Bounds::uniform(2, -10.0, 10.0).unwrap();
        let bat = bat_at(vec![1.0, 2.0], vec![0.25, -0.5]);
        let (v, x) = ba_velocity_position_update(&bat, &[1.0, 2.0], 37.0, &b, VelocitySign::Paper);
        assert_eq!(v, vec![0.25, -0.5]);
        assert_eq!(x, vec![1.25, 1.5]);
        let still = bat_at(vec![1.0, 2.0], vec![0.0, 0.0]);
        let (_, x) = ba_velocity_position_update(&still, &[5.0, 5.0], 0.0, &b, VelocitySign::Paper);
        assert_eq!(x, vec![1.0, 2.0]);
    }

    #[test]
    fn silent_walk_returns_its_origin() {
        let b = Bounds::uniform(2, -10.0, 10.0).unwrap();
        let mut rng = make_rng(1, 0);
        // pulse rate 0: r2 > 0 almost surely, so the walk starts at the incumbent
        assert_eq!(
            local_random_walk(&[1.0, 2.0], &[3.0, 4.0], 0.0, 0.0, &mut rng, &b),
            vec![1.0, 2.0]
        );
        // pulse rate 1: r2 <= 1 always, so the walk starts at the peer
        assert_eq!(
            local_random_walk(&[1.0, 2.0], &[3.0, 4.0], 0.0, 1.0, &mut rng, &b),
            vec![3.0, 4.0]
        );
    }

    #[test]
    fn acceptance_rules() {
        let c = config();
        let mut bat = bat_at(vec![0.0], vec![0.0]);
        assert!(!greedy_accept(&mut bat, vec![1.0], 11.0, 0.0, 1, &c));
        assert_eq!((bat.position[0], bat.loudness), (0.0, 1.0));
        assert!(!greedy_accept(&mut bat, vec![1.0], 10.0, 0.0, 1, &c));
        assert!(!greedy_accept(&mut bat, vec![1.0], 5.0, 1.0, 1, &c));
        assert!(greedy_accept(&mut bat, vec![1.0], 5.0, 0.0, 1, &c));
        assert_eq!(bat.position, vec![1.0]);
        assert_eq!(bat.fitness, 5.0);
        assert!((bat.loudness - 0.9).abs() < 1e-15);
        assert!((bat.pulse_rate - (1.0 - (-0.9f64).exp())).abs() < 1e-15);
    }

    #[test]
    fn pulse_rate_modes() {
        let mut c = config();
        let bat = bat_at(vec![0.0], vec![0.0]);
        let (a, r) = update_loudness_pulse(&bat, 7, &c);
        assert!((a - 0.9).abs() < 1e-15);
        assert!((r - 0.593_430_340_259_400_9).abs() < 1e-12);
        c.pulse_time_dependent = true;
        let (_, r) = update_loudness_pulse(&bat, 200, &c);
        assert!((r - 1.0).abs() < 1e-12);
    }

    #[test]
    fn bare_bones_degenerate_cases() {
        let b = Bounds::uniform(3, -10.0, 10.0).unwrap();
        let mut rng = make_rng(3, 0);
        let x = [1.0, -2.0, 3.0];
        assert_eq!(gaussian_barebones_update(&x, &x, 1.0, &mut rng, &b), x.to_vec());
    }

    #[test]
    fn lambda_endpoints() {
        assert_eq!(lambda_schedule(0, 100), 1.0);
        assert!((lambda_schedule(100, 100) - 0.1).abs() < 1e-15);
        assert!((lambda_schedule(50, 100) - 0.55).abs() < 1e-15);
    }
}
