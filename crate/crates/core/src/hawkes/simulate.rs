use log::warn;
use nalgebra::DMatrix;
use ndarray::{s, Array1, Array3};
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp};

use super::{HawkesData, HawkesModel};
use crate::error::{Error, Result};

/// Event budget of [`hawkes_simulate`]; exceeding it aborts the run.
pub const DEFAULT_EVENT_CAP: usize = 2_000_000;

/// Largest eigenvalue modulus of `|A|`, the branching ratio of the process.
pub fn spectral_radius(model: &HawkesModel) -> f64 {
    let a = model.aggregated();
    let n = a.nrows();
    let m = DMatrix::from_fn(n, n, |i, j| a[[i, j]].abs());
    m.complex_eigenvalues()
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max)
}

/// [`hawkes_simulate_capped`] with [`DEFAULT_EVENT_CAP`].
pub fn hawkes_simulate(model: &HawkesModel, horizon: f64, seed: u64) -> Result<HawkesData> {
    hawkes_simulate_capped(model, horizon, seed, DEFAULT_EVENT_CAP)
}

/// Ogata thinning on `(0, horizon]`. Intensities pushed below zero by
/// inhibition are clamped at zero. Between events the excitation from
/// positive amplitudes only decays, so the baseline plus that excitation
/// bounds the intensity until the next event.
pub fn hawkes_simulate_capped(
    model: &HawkesModel,
    horizon: f64,
    seed: u64,
    max_events: usize,
) -> Result<HawkesData> {
    if !(horizon > 0.0 && horizon.is_finite()) {
        return Err(Error::invalid("horizon must be positive"));
    }
    let radius = spectral_radius(model);
    if radius >= 1.0 {
        warn!("spectral radius of |A| is {radius:.3}; the process may explode");
    }
    let nodes = model.n_nodes();
    let decays = model.decays();
    let u_count = decays.len();
    let a = model.adjacency();
    let mu = model.mu();

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // excitation[j * U + u] = Σ_{t^j_k < t} b_u e^{−b_u(t − t^j_k)} at the current time
    let mut excitation = vec![0.0; nodes * u_count];
    let mut events = vec![Vec::new(); nodes];
    let mut total = 0usize;
    let mut t = 0.0;
    let mut intensity = vec![0.0; nodes];

    let node_intensity = |i: usize, exc: &[f64], positive_only: bool| -> f64 {
        let mut lam = if positive_only { mu[i].max(0.0) } else { mu[i] };
        for j in 0..nodes {
            for u in 0..u_count {
                let c = a[[i, j, u]] * exc[j * u_count + u];
                if !positive_only || c > 0.0 {
                    lam += c;
                }
            }
        }
        lam
    };

    loop {
        let bound: f64 = (0..nodes)
            .map(|i| node_intensity(i, &excitation, true))
            .sum();
        if !(bound > 0.0) {
            break;
        }
        let dt = Exp::new(bound)
            .map_err(|e| Error::Simulation(e.to_string()))?
            .sample(&mut rng);
        let next = t + dt;
        if next > horizon {
            break;
        }
        for j in 0..nodes {
            for (u, &b) in decays.iter().enumerate() {
                excitation[j * u_count + u] *= (-b * dt).exp();
            }
        }
        t = next;
        for (i, lam) in intensity.iter_mut().enumerate() {
            *lam = node_intensity(i, &excitation, false).max(0.0);
        }
        let accepted: f64 = intensity.iter().sum();
        let draw = rng.random::<f64>() * bound;
        if draw >= accepted {
            continue;
        }
        let mut acc = 0.0;
        let mut node = nodes - 1;
        for (i, &lam) in intensity.iter().enumerate() {
            acc += lam;
            if draw < acc {
                node = i;
                break;
            }
        }
        events[node].push(t);
        total += 1;
        if total > max_events {
            return Err(Error::Simulation(format!(
                "more than {max_events} events before t = {t:.3}; the process looks explosive"
            )));
        }
        for (u, &b) in decays.iter().enumerate() {
            excitation[node * u_count + u] += b;
        }
    }
    HawkesData::new(horizon, decays.to_vec(), events)
}

/// Seeded random ground truth: baselines uniform on `[0.2, 1]`, amplitudes
/// uniform on `[0, 1]` rescaled so that `|A|` has spectral radius `radius`,
/// then `inhibitory` distinct off-diagonal pairs `(i, j)` made negative.
pub fn random_hawkes_model(
    nodes: usize,
    decays: Vec<f64>,
    radius: f64,
    inhibitory: usize,
    seed: u64,
) -> Result<HawkesModel> {
    if nodes == 0 {
        return Err(Error::invalid("need at least one node"));
    }
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(Error::invalid("spectral radius must be positive"));
    }
    let off_diagonal = nodes * (nodes - 1);
    if inhibitory > off_diagonal {
        return Err(Error::invalid(format!(
            "at most {off_diagonal} off-diagonal pairs can be inhibitory, got {inhibitory}"
        )));
    }
    let u_count = decays.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mu = Array1::from_shape_simple_fn(nodes, || rng.random_range(0.2..=1.0));
    let mut adjacency =
        Array3::from_shape_simple_fn((nodes, nodes, u_count), || rng.random::<f64>());
    let raw = HawkesModel::new(mu.clone(), adjacency.clone(), decays.clone())?;
    let current = spectral_radius(&raw);
    if current > 0.0 {
        adjacency *= radius / current;
    }
    for k in sample(&mut rng, off_diagonal, inhibitory) {
        let i = k / (nodes - 1);
        let mut j = k % (nodes - 1);
        if j >= i {
            j += 1;
        }
        adjacency.slice_mut(s![i, j, ..]).mapv_inplace(|a| -a);
    }
    HawkesModel::new(mu, adjacency, decays)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn random_model_has_requested_radius_and_signs() {
        let model = random_hawkes_model(3, vec![0.5, 2.0], 0.7, 2, 5).unwrap();
        assert!((spectral_radius(&model) - 0.7).abs() < 1e-12);
        let agg = model.aggregated();
        let negative = (0..3)
            .flat_map(|i| (0..3).map(move |j| (i, j)))
            .filter(|&(i, j)| agg[[i, j]] < 0.0)
            .collect::<Vec<_>>();
        assert_eq!(negative.len(), 2);
        assert!(negative.iter().all(|&(i, j)| i != j));
        assert_eq!(
            model,
            random_hawkes_model(3, vec![0.5, 2.0], 0.7, 2, 5).unwrap()
        );
        assert!(random_hawkes_model(2, vec![1.0], 0.7, 3, 0).is_err());
    }

    #[test]
    fn poisson_count() {
        let model = HawkesModel::new(array![2.0], Array3::zeros((1, 1, 1)), vec![1.0]).unwrap();
        let data = hawkes_simulate(&model, 1000.0, 3).unwrap();
        let count = data.events()[0].len() as f64;
        assert!((count - 2000.0).abs() < 3.0 * 2000f64.sqrt());
    }

    #[test]
    fn silent_process() {
        let model =
            HawkesModel::new(array![0.0, 0.0], Array3::zeros((2, 2, 1)), vec![1.0]).unwrap();
        let data = hawkes_simulate(&model, 100.0, 0).unwrap();
        assert_eq!(data.total_events(), 0);
    }

    #[test]
    fn branching_ratio() {
        let a = 0.5;
        let model =
            HawkesModel::new(array![0.5], Array3::from_elem((1, 1, 1), a), vec![2.0]).unwrap();
        let horizon = 40_000.0;
        let data = hawkes_simulate(&model, horizon, 12).unwrap();
        let rate = data.events()[0].len() as f64 / horizon;
        let expected = 0.5 / (1.0 - a);
        assert!((rate - expected).abs() < 0.05 * expected, "rate {rate}");
    }

    #[test]
    fn deterministic_and_sorted() {
        let adjacency = Array3::from_shape_vec((2, 2, 1), vec![0.3, -0.4, 0.2, 0.1]).unwrap();
        let model = HawkesModel::new(array![0.5, 0.8], adjacency, vec![1.5]).unwrap();
        let a = hawkes_simulate(&model, 200.0, 9).unwrap();
        let b = hawkes_simulate(&model, 200.0, 9).unwrap();
        assert_eq!(a, b);
        assert!(a.total_events() > 0);
    }

    #[test]
    fn explosion_guard() {
        let model =
            HawkesModel::new(array![1.0], Array3::from_elem((1, 1, 1), 1.5), vec![1.0]).unwrap();
        assert!(spectral_radius(&model) > 1.0);
        let res = hawkes_simulate_capped(&model, 1000.0, 1, 5_000);
        assert!(matches!(res, Err(Error::Simulation(_))));
    }
}
