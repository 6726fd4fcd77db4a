use nalgebra::{DMatrix, DVector};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::NeuralError;

fn dist_sq(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum()
}

/// Seeded Lloyd k-means on normalized inputs. Initial centers are a seeded
/// sample of the points; empty clusters keep their previous center.
pub fn k_means(points: &[Vec<f64>], k: usize, seed: u64, iters: usize) -> Vec<Vec<f64>> {
    let mut idx: Vec<usize> = (0..points.len()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    idx.shuffle(&mut rng);
    let mut centers: Vec<Vec<f64>> = idx[..k].iter().map(|&i| points[i].clone()).collect();
    let mut assign = vec![0usize; points.len()];
    for _ in 0..iters {
        let mut changed = false;
        for (p, a) in points.iter().zip(assign.iter_mut()) {
            let best = (0..k)
                .min_by(|&i, &j| {
                    dist_sq(p, &centers[i])
                        .partial_cmp(&dist_sq(p, &centers[j]))
                        .unwrap()
                })
                .unwrap();
            if best != *a {
                *a = best;
                changed = true;
            }
        }
        if !changed {
            break;
        }
        let d = points[0].len();
        let mut sums = vec![vec![0.0; d]; k];
        let mut counts = vec![0usize; k];
        for (p, &a) in points.iter().zip(&assign) {
            counts[a] += 1;
            for (s, v) in sums[a].iter_mut().zip(p) {
                *s += v;
            }
        }
        for c in 0..k {
            if counts[c] > 0 {
                centers[c] = sums[c].iter().map(|s| s / counts[c] as f64).collect();
            }
        }
    }
    centers
}

/// Gaussian feature layer plus linear readout. Widths are set from the
/// nearest-center spacing; readout weights come from ridge least squares.
#[derive(Clone, Debug)]
pub struct Rbfn {
    centers: Vec<Vec<f64>>,
    widths: Vec<f64>,
    /// Row-major (n_outputs x n_centers), plus one bias per output.
    weights: Vec<f64>,
    bias: Vec<f64>,
    n_outputs: usize,
}

impl Rbfn {
    /// Trains on normalized inputs `xs` and targets `ys`.
    /// `width_scale` multiplies the nearest-center spacing (1.0 = as spaced).
    pub fn fit(
        xs: &[Vec<f64>],
        ys: &[Vec<f64>],
        n_centers: usize,
        width_scale: f64,
        ridge: f64,
        seed: u64,
    ) -> Result<Self, NeuralError> {
        if xs.is_empty() || xs.len() != ys.len() {
            return Err(NeuralError::Usage(
                "empty or mismatched RBFN training data".into(),
            ));
        }
        if n_centers == 0 {
            return Err(NeuralError::Usage("RBFN needs at least one center".into()));
        }
        let k = n_centers.min(xs.len());
        let centers = k_means(xs, k, seed, 100);
        let widths: Vec<f64> = (0..k)
            .map(|i| {
                let nearest = (0..k)
                    .filter(|&j| j != i)
                    .map(|j| dist_sq(&centers[i], &centers[j]).sqrt())
                    .fold(f64::INFINITY, f64::min);
                let w = if nearest.is_finite() && nearest > 1e-12 {
                    nearest * width_scale
                } else {
                    width_scale
                };
                w.max(1e-9)
            })
            .collect();

        let n = xs.len();
        let n_outputs = ys[0].len();
        let n_feat = k + 1; // + bias column
        let mut phi = DMatrix::zeros(n, n_feat);
        for (r, x) in xs.iter().enumerate() {
            for (c, (center, w)) in centers.iter().zip(&widths).enumerate() {
                phi[(r, c)] = (-dist_sq(x, center) / (2.0 * w * w)).exp();
            }
            phi[(r, k)] = 1.0;
        }
        let mut gram = phi.transpose() * &phi;
        for i in 0..n_feat {
            gram[(i, i)] += ridge;
        }
        let chol = gram
            .cholesky()
            .ok_or_else(|| NeuralError::Numeric("RBFN normal equations are singular".into()))?;
        let mut weights = vec![0.0; n_outputs * k];
        let mut bias = vec![0.0; n_outputs];
        for o in 0..n_outputs {
            let rhs = phi.transpose() * DVector::from_iterator(n, ys.iter().map(|y| y[o]));
            let sol = chol.solve(&rhs);
            for c in 0..k {
                weights[o * k + c] = sol[c];
            }
            bias[o] = sol[k];
        }
        Ok(Self {
            centers,
            widths,
            weights,
            bias,
            n_outputs,
        })
    }

    pub fn forward(&self, x: &[f64]) -> Vec<f64> {
        let k = self.centers.len();
        let feat: Vec<f64> = self
            .centers
            .iter()
            .zip(&self.widths)
            .map(|(c, w)| (-dist_sq(x, c) / (2.0 * w * w)).exp())
            .collect();
        (0..self.n_outputs)
            .map(|o| {
                self.bias[o]
                    + self.weights[o * k..(o + 1) * k]
                        .iter()
                        .zip(&feat)
                        .map(|(w, f)| w * f)
                        .sum::<f64>()
            })
            .collect()
    }

    pub fn n_centers(&self) -> usize {
        self.centers.len()
    }

    /// centers + widths + readout weights + biases.
    pub fn count_params(&self) -> usize {
        let k = self.centers.len();
        let d = self.centers.first().map_or(0, Vec::len);
        k * d + k + self.n_outputs * k + self.n_outputs
    }
}
