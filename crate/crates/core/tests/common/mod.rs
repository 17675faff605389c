#![allow(dead_code)]

use orpd_core::netmodel::{Branch, Bus, BusKind, Generator, NetworkCase, ShuntCompensator, TapRange};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Slack bus 1 feeding a PQ bus 2 over one line.
pub fn two_bus(r: f64, x: f64, p_mw: f64, q_mvar: f64) -> NetworkCase {
    let mut load = Bus::new(2, BusKind::PQ);
    load.p_demand = p_mw;
    load.q_demand = q_mvar;
    NetworkCase::new(
        "two_bus",
        100.0,
        vec![Bus::new(1, BusKind::Slack), load],
        vec![Branch::line(1, 2, r, x)],
        vec![Generator::new(1, 0.0, 1.0)],
        vec![],
    )
    .unwrap()
}

/// Slack 1 -- line -- PQ 2 -- transformer (tap on bus 2 side) -- PQ 3.
pub fn three_bus_transformer(tap: f64) -> NetworkCase {
    let mut b2 = Bus::new(2, BusKind::PQ);
    b2.p_demand = 20.0;
    b2.q_demand = 5.0;
    let mut b3 = Bus::new(3, BusKind::PQ);
    b3.p_demand = 40.0;
    b3.q_demand = 15.0;
    b3.base_shunt_b = 0.07;
    let mut line = Branch::line(1, 2, 0.02, 0.06);
    line.b_charging = 0.03;
    let tr = Branch::transformer(2, 3, 0.01, 0.2, tap, TapRange { min: 0.9, max: 1.1 });
    NetworkCase::new(
        "three_bus",
        100.0,
        vec![Bus::new(1, BusKind::Slack), b2, b3],
        vec![line, tr],
        vec![Generator::new(1, 0.0, 1.02)],
        vec![ShuntCompensator {
            bus: 3,
            q_min: 0.0,
            q_max: 20.0,
            q_init: 5.0,
        }],
    )
    .unwrap()
}

/// A random connected network: a spanning tree plus a few extra branches,
/// some PV buses, some transformers, moderate loads.
pub fn random_network(seed: u64, n: usize) -> NetworkCase {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut buses = Vec::with_capacity(n);
    let mut gens = vec![Generator::new(1, 0.0, rng.random_range(0.98..1.06))];
    buses.push(Bus::new(1, BusKind::Slack));
    for id in 2..=n as u32 {
        if rng.random_bool(0.3) {
            buses.push(Bus::new(id, BusKind::PV));
            gens.push(Generator::new(
                id,
                rng.random_range(0.0..40.0),
                rng.random_range(0.97..1.05),
            ));
        } else {
            let mut b = Bus::new(id, BusKind::PQ);
            b.p_demand = rng.random_range(0.0..30.0);
            b.q_demand = rng.random_range(-5.0..12.0);
            b.base_shunt_b = if rng.random_bool(0.2) { 0.1 } else { 0.0 };
            buses.push(b);
        }
    }
    let mut branches = Vec::new();
    let mut add = |rng: &mut ChaCha8Rng, f: u32, t: u32| {
        let r = rng.random_range(0.005..0.05);
        let x = rng.random_range(0.03..0.2);
        if rng.random_bool(0.25) {
            let tap = rng.random_range(0.93..1.07);
            branches.push(Branch::transformer(f, t, r, x, tap, TapRange { min: 0.9, max: 1.1 }));
        } else {
            let mut br = Branch::line(f, t, r, x);
            br.b_charging = rng.random_range(0.0..0.05);
            branches.push(br);
        }
    };
    for id in 2..=n as u32 {
        let parent = rng.random_range(1..id);
        add(&mut rng, parent, id);
    }
    for _ in 0..n / 2 {
        let f = rng.random_range(1..=n as u32);
        let t = rng.random_range(1..=n as u32);
        if f != t {
            add(&mut rng, f, t);
        }
    }
    NetworkCase::new(format!("random_{seed}"), 100.0, buses, branches, gens, vec![]).unwrap()
}
