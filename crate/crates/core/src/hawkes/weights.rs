use ndarray::{Array2, ArrayViewMut1};

use super::HawkesData;

/// Kernel sums at the events of every node and their integrals over `[0, T]`.
#[derive(Debug, Clone)]
pub struct HawkesWeights {
    /// `g[i]` has one row per event of node `i` and column `j·U + u` holding
    /// `g^j_u(t) = Σ_{t^j_k < t} b_u e^{−b_u(t − t^j_k)}`.
    pub g: Vec<Array2<f64>>,
    /// `big_g[[j, u]] = Σ_k (1 − e^{−b_u(T − t^j_k)})`.
    pub big_g: Array2<f64>,
}

/// Evaluates `Σ_{s < t} b e^{−b(t − s)}` over sorted `sources` at every sorted
/// target time in one merged pass.
fn decayed_sums(sources: &[f64], targets: &[f64], b: f64, mut out: ArrayViewMut1<f64>) {
    let mut state = 0.0;
    let mut now = 0.0;
    let mut next = 0;
    for (slot, &t) in out.iter_mut().zip(targets) {
        while next < sources.len() && sources[next] < t {
            state = state * (-b * (sources[next] - now)).exp() + b;
            now = sources[next];
            next += 1;
        }
        *slot = if next == 0 {
            0.0
        } else {
            state * (-b * (t - now)).exp()
        };
    }
}

/// Builds the kernel tables by exponential-decay recurrences, in
/// `O(U · I · Σ_i n_i)` time.
pub fn hawkes_weights(data: &HawkesData) -> HawkesWeights {
    let nodes = data.n_nodes();
    let decays = data.decays();
    let u_count = decays.len();
    let t_end = data.horizon();
    let mut g = Vec::with_capacity(nodes);
    for targets in data.events() {
        let mut table = Array2::zeros((targets.len(), nodes * u_count));
        for (j, sources) in data.events().iter().enumerate() {
            for (u, &b) in decays.iter().enumerate() {
                decayed_sums(sources, targets, b, table.column_mut(j * u_count + u));
            }
        }
        g.push(table);
    }
    let big_g = Array2::from_shape_fn((nodes, u_count), |(j, u)| {
        data.events()[j]
            .iter()
            .map(|&t| -(-decays[u] * (t_end - t)).exp_m1())
            .sum()
    });
    HawkesWeights { g, big_g }
}
