//! Frequency checks on the random substages. Each returns a short summary
//! on success and the offending numbers on failure.
#![allow(dead_code)]

use cfvp_core::epidemic::Bernoulli;
use cfvp_core::graph::{generate_ba, DegreeSpec};
use cfvp_core::rng::{rng_from_seed, SimRng};
use cfvp_core::{
    assign_q, isolation_substage, run_single_layer_sir, seed_infection, spread_substage,
    EpidemicState, Graph, IsolationStrategy,
};
use rand::Rng;

/// Tolerance in standard deviations for every frequency check.
pub const SIGMAS: f64 = 3.0;

pub fn star(leaves: usize) -> Graph {
    Graph::from_edges(leaves + 1, (1..=leaves).map(|l| (0, l))).unwrap()
}

fn binomial_pmf(n: usize, p: f64, k: usize) -> f64 {
    let mut c = 1.0;
    for i in 0..k {
        c *= (n - i) as f64 / (i + 1) as f64;
    }
    c * p.powi(k as i32) * (1.0 - p).powi((n - k) as i32)
}

fn within(observed: f64, expected: f64, sd: f64, what: &str) -> Result<(), String> {
    if (observed - expected).abs() <= SIGMAS * sd {
        Ok(())
    } else {
        Err(format!("{what}: observed {observed}, expected {expected} +- {SIGMAS} x {sd}"))
    }
}

/// Infected hub of a star with `leaves` leaves: the number of new infections
/// is Binomial(leaves, lambda). Checks the mean and every histogram bin.
pub fn star_spread(leaves: usize, lambda: f64, trials: usize, seed: u64) -> Result<String, String> {
    let g = star(leaves);
    let mut rng = rng_from_seed(seed);
    let mut hist = vec![0usize; leaves + 1];
    for _ in 0..trials {
        let mut state = EpidemicState::new(leaves + 1, lambda).unwrap();
        state.infect(0);
        let out = spread_substage(&mut state, &g, &mut Bernoulli(lambda), &mut rng).unwrap();
        hist[out.newly_infected.len()] += 1;
    }
    let t = trials as f64;
    let mean = hist.iter().enumerate().map(|(k, &c)| k as f64 * c as f64).sum::<f64>() / t;
    let var = leaves as f64 * lambda * (1.0 - lambda);
    within(mean, leaves as f64 * lambda, (var / t).sqrt(), "mean infections")?;
    for (k, &c) in hist.iter().enumerate() {
        let p = binomial_pmf(leaves, lambda, k);
        within(c as f64, p * t, (t * p * (1.0 - p)).sqrt(), &format!("bin {k}"))?;
    }
    Ok(format!("star K1,{leaves} lambda={lambda}: mean {mean:.4} vs {:.4}", leaves as f64 * lambda))
}

/// A susceptible node with `k` infected neighbors and `q = 1` always cuts
/// exactly one edge, each neighbor with probability `1/k`. With `q` below
/// one it cuts with probability `q`.
pub fn isolation_choice(k: usize, q: f64, trials: usize, seed: u64) -> Result<String, String> {
    let g = star(k);
    let mut rng = rng_from_seed(seed);
    let mut picks = vec![0usize; k + 1];
    let mut cuts = 0usize;
    for _ in 0..trials {
        let mut graph = g.clone();
        let mut state = EpidemicState::new(k + 1, 0.5).unwrap().with_q(vec![q; k + 1]);
        for leaf in 1..=k {
            state.infect(leaf);
        }
        let pruned = isolation_substage(&state, &mut graph, &mut rng);
        if pruned.len() > 1 {
            return Err(format!("{} edges cut in one substage", pruned.len()));
        }
        for (s, i) in pruned {
            assert_eq!(s, 0);
            picks[i] += 1;
            cuts += 1;
        }
    }
    let t = trials as f64;
    within(cuts as f64, q * t, (t * q * (1.0 - q)).sqrt(), "cut count")?;
    let c = cuts as f64;
    let p = 1.0 / k as f64;
    for (i, &n) in picks.iter().enumerate().skip(1) {
        within(n as f64, c * p, (c * p * (1.0 - p)).sqrt(), &format!("neighbor {i}"))?;
    }
    Ok(format!("isolation k={k} q={q}: {cuts} cuts, picks {:?}", &picks[1..]))
}

/// The initial infection is uniform over the nodes.
pub fn seed_uniformity(n: usize, draws: usize, seed: u64) -> Result<String, String> {
    let mut rng = rng_from_seed(seed);
    let mut hist = vec![0usize; n];
    for _ in 0..draws {
        let mut state = EpidemicState::new(n, 0.5).unwrap();
        hist[seed_infection(&mut state, &mut rng)] += 1;
    }
    let t = draws as f64;
    let p = 1.0 / n as f64;
    for (i, &c) in hist.iter().enumerate() {
        within(c as f64, t * p, (t * p * (1.0 - p)).sqrt(), &format!("node {i}"))?;
    }
    Ok(format!("seed uniformity n={n}: {hist:?}"))
}

/// Single-layer SIR on the star K1,leaves with a uniform random seed:
/// the hub is picked with probability 1/(leaves+1) and then infects
/// Binomial(leaves, lambda) leaves; a leaf seed infects the hub with
/// probability lambda, which then reaches the other leaves.
pub fn star_outbreak_size(leaves: usize, lambda: f64, runs: usize, seed: u64) -> Result<String, String> {
    let g = star(leaves);
    let l = leaves as f64;
    let n = l + 1.0;
    let hub = 1.0 + l * lambda;
    let leaf = 1.0 + lambda * (1.0 + (l - 1.0) * lambda);
    let expected = hub / n + leaf * l / n;
    let sizes: Vec<f64> = (0..runs)
        .map(|r| run_single_layer_sir(&g, lambda, seed.wrapping_add(r as u64)).unwrap().total_infected as f64)
        .collect();
    let mean = sizes.iter().sum::<f64>() / runs as f64;
    let var = sizes.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (runs - 1) as f64;
    within(mean, expected, (var / runs as f64).sqrt(), "outbreak size")?;
    Ok(format!("star outbreak K1,{leaves} lambda={lambda}: mean {mean:.4} vs {expected:.4}"))
}

/// Degree-based q is non-decreasing in degree and lies in [0, 1] on
/// `graphs` random BA graphs with random q and sigma.
pub fn degree_based_q(graphs: usize, seed: u64) -> Result<String, String> {
    let mut rng: SimRng = rng_from_seed(seed);
    let mut clamped = 0usize;
    for g_idx in 0..graphs {
        let n = rng.random_range(10..200usize);
        let m = rng.random_range(1..=4usize.min(n - 1));
        let g = generate_ba(DegreeSpec::new(n, m).unwrap(), &mut rng).unwrap();
        let q = rng.random_range(0.0..=1.0);
        let sigma = rng.random_range(0.0..1.0);
        let strategy = IsolationStrategy::degree_based(q, sigma).unwrap();
        let qs = assign_q(&strategy, &g, &mut rng).unwrap();
        let deg = g.degrees();
        if let Some(x) = qs.iter().find(|x| !(0.0..=1.0).contains(*x)) {
            return Err(format!("graph {g_idx}: q value {x} outside [0, 1]"));
        }
        clamped += qs.iter().filter(|&&x| x == 0.0 || x == 1.0).count();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by_key(|&i| deg[i]);
        for w in order.windows(2) {
            let (u, v) = (w[0], w[1]);
            if deg[u] < deg[v] && qs[u] > qs[v] {
                return Err(format!("graph {g_idx}: deg {} -> q {} but deg {} -> q {}", deg[u], qs[u], deg[v], qs[v]));
            }
        }
        // Equal degrees may hold any order; check across degree classes.
        let mut max_below = f64::NEG_INFINITY;
        let mut i = 0;
        while i < n {
            let d = deg[order[i]];
            let class: Vec<f64> = order[i..].iter().take_while(|&&j| deg[j] == d).map(|&j| qs[j]).collect();
            let lo = class.iter().copied().fold(f64::INFINITY, f64::min);
            if lo < max_below {
                return Err(format!("graph {g_idx}: degree {d} has q {lo} below a lower degree's {max_below}"));
            }
            max_below = max_below.max(class.iter().copied().fold(f64::NEG_INFINITY, f64::max));
            i += class.len();
        }
    }
    Ok(format!("degree-based q on {graphs} graphs: monotone, in [0,1], {clamped} clamped values"))
}
