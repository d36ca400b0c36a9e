use log::warn;
use ndarray::{s, Array1, Array2, Array3};
use rayon::prelude::*;

use super::{hawkes_weights, HawkesData, HawkesModel};
use crate::error::{Error, Result};
use crate::objectives::{default_lambda, ProblemData};

/// Per-node problem: rows `(1, g^{i1}_1, …, g^{iI}_U)` for each event of
/// `node`, `ψ = (T, G^1_1, …, G^I_U)/n_i`, unit labels.
///
/// The weight vector is laid out as `(μ_i, a^{i1}_1, …, a^{i1}_U, a^{i2}_1, …)`.
#[derive(Debug, Clone)]
pub struct Subproblem {
    pub node: usize,
    pub problem: ProblemData,
}

/// Builds one problem per node that has at least one event. Nodes without
/// events are skipped with a warning; their parameters stay untrained.
///
/// `lambda` defaults, per node, to the mean squared row norm over `n_i`.
pub fn hawkes_subproblems(data: &HawkesData, lambda: Option<f64>) -> Result<Vec<Subproblem>> {
    let tables = hawkes_weights(data);
    let dim = 1 + data.n_nodes() * data.n_decays();
    let mut psi_tail = Array1::zeros(dim - 1);
    for (slot, &v) in psi_tail.iter_mut().zip(tables.big_g.iter()) {
        *slot = v;
    }
    let mut out = Vec::with_capacity(data.n_nodes());
    for (node, g) in tables.g.into_iter().enumerate() {
        let n_i = g.nrows();
        if n_i == 0 {
            warn!("node {node} has no events and is left untrained");
            continue;
        }
        let mut x = Array2::ones((n_i, dim));
        x.slice_mut(s![.., 1..]).assign(&g);
        let mut psi = Array1::zeros(dim);
        psi[0] = data.horizon();
        psi.slice_mut(s![1..]).assign(&psi_tail);
        psi /= n_i as f64;
        let lam = match lambda {
            Some(l) => l,
            None => default_lambda(&x),
        };
        let problem = ProblemData::new_audited(x, Array1::ones(n_i), psi, lam)?;
        out.push(Subproblem { node, problem });
    }
    Ok(out)
}

/// Runs `fit` on every subproblem in parallel and returns the results in node
/// order.
pub fn par_fit<R, F>(subproblems: &[Subproblem], fit: F) -> Result<Vec<R>>
where
    R: Send,
    F: Fn(&Subproblem) -> Result<R> + Sync + Send,
{
    subproblems.par_iter().map(fit).collect()
}

/// Assembles a model from per-node weight vectors `(node, w)`. Nodes absent
/// from `fits` get zero parameters.
pub fn model_from_weights(data: &HawkesData, fits: &[(usize, Array1<f64>)]) -> Result<HawkesModel> {
    let nodes = data.n_nodes();
    let u_count = data.n_decays();
    let mut mu = Array1::zeros(nodes);
    let mut adjacency = Array3::zeros((nodes, nodes, u_count));
    for (node, w) in fits {
        if *node >= nodes || w.len() != 1 + nodes * u_count {
            return Err(Error::dim(format!(
                "weights for node {node} have the wrong shape"
            )));
        }
        mu[*node] = w[0];
        for j in 0..nodes {
            for u in 0..u_count {
                adjacency[[*node, j, u]] = w[1 + j * u_count + u];
            }
        }
    }
    HawkesModel::new(mu, adjacency, data.decays().to_vec())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hawkes::hawkes_loglik;
    use crate::objectives::{primal_objective, RegularizerSpec};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn single_node_example() {
        let data = HawkesData::new(3.0, vec![1.0], vec![vec![1.0, 2.0]]).unwrap();
        let subs = hawkes_subproblems(&data, None).unwrap();
        assert_eq!(subs.len(), 1);
        let p = &subs[0].problem;
        assert_eq!(p.n(), 2);
        assert_eq!(p.psi()[0], 1.5);
        assert!((p.psi()[1] - 0.5 * 1.496_785_2).abs() < 1e-6);
        assert_eq!(p.row(1)[0], 1.0);
        assert!((p.row(1)[1] - (-1f64).exp()).abs() < 1e-15);
        assert!(p.nonneg_gram());
    }

    #[test]
    fn empty_nodes_are_skipped() {
        let data = HawkesData::new(3.0, vec![1.0], vec![vec![1.0], vec![], vec![2.0]]).unwrap();
        let subs = hawkes_subproblems(&data, Some(0.1)).unwrap();
        let nodes: Vec<usize> = subs.iter().map(|s| s.node).collect();
        assert_eq!(nodes, [0, 2]);
        assert_eq!(subs[1].problem.d(), 4);
        assert_eq!(subs[1].problem.lambda(), 0.1);
    }

    #[test]
    fn subproblem_objectives_sum_to_likelihood() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let events: Vec<Vec<f64>> = (0..2)
            .map(|_| {
                let mut v: Vec<f64> = (0..80).map(|_| rng.random_range(0.01..40.0)).collect();
                v.sort_by(f64::total_cmp);
                v
            })
            .collect();
        let data = HawkesData::new(40.0, vec![0.5, 3.0], events).unwrap();
        let subs = hawkes_subproblems(&data, None).unwrap();
        let reg = RegularizerSpec::ridge();
        for _ in 0..20 {
            let fits: Vec<(usize, Array1<f64>)> = subs
                .iter()
                .map(|s| {
                    (
                        s.node,
                        Array1::from_shape_fn(5, |_| rng.random_range(0.01..0.5)),
                    )
                })
                .collect();
            let model = model_from_weights(&data, &fits).unwrap();
            let nll = hawkes_loglik(&model, &data).unwrap().unwrap();
            let total: f64 = subs
                .iter()
                .zip(&fits)
                .map(|(s, (_, w))| {
                    let p = primal_objective(w.view(), &s.problem, &reg)
                        .unwrap()
                        .unwrap();
                    let n_i = s.problem.n() as f64;
                    n_i * (p - s.problem.lambda() * 0.5 * w.dot(w))
                })
                .sum();
            assert!((nll - total).abs() < 1e-8 * nll.abs().max(1.0));
        }
    }

    #[test]
    fn rows_depend_only_on_events() {
        let data = HawkesData::new(5.0, vec![1.0], vec![vec![1.0, 3.0], vec![2.0]]).unwrap();
        let a = hawkes_subproblems(&data, None).unwrap();
        let b = hawkes_subproblems(&data, None).unwrap();
        assert_eq!(a[0].problem.features(), b[0].problem.features());
        // fitting node 0 with any parameters for node 1 leaves node 0 untouched
        let m1 = model_from_weights(
            &data,
            &[
                (0, Array1::from_elem(3, 0.2)),
                (1, Array1::from_elem(3, 0.1)),
            ],
        )
        .unwrap();
        let m2 = model_from_weights(
            &data,
            &[
                (0, Array1::from_elem(3, 0.2)),
                (1, Array1::from_elem(3, 0.7)),
            ],
        )
        .unwrap();
        assert_eq!(m1.mu()[0], m2.mu()[0]);
        assert_eq!(
            m1.adjacency().slice(s![0, .., ..]),
            m2.adjacency().slice(s![0, .., ..])
        );
    }

    #[test]
    fn weight_layout() {
        let data = HawkesData::new(5.0, vec![1.0, 2.0], vec![vec![1.0], vec![2.0]]).unwrap();
        let w = Array1::from(vec![9.0, 1.0, 2.0, 3.0, 4.0]);
        let m = model_from_weights(&data, &[(1, w)]).unwrap();
        assert_eq!(m.mu().to_vec(), [0.0, 9.0]);
        assert_eq!(m.adjacency()[[1, 0, 1]], 2.0);
        assert_eq!(m.adjacency()[[1, 1, 0]], 3.0);
        assert!(model_from_weights(&data, &[(0, Array1::zeros(3))]).is_err());
    }
}
