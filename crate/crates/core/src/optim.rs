//! Derivative-free Nelder-Mead simplex minimizer.

/// Simplex settings. Coefficients are the standard reflection 1,
/// expansion 2, contraction 1/2 and shrink 1/2.
#[derive(Debug, Clone)]
pub struct NelderMead {
    /// Offset added to each coordinate of the start point to build the initial simplex.
    pub step: f64,
    /// Stop once `max f - min f` over the simplex drops below this.
    pub f_tol: f64,
    pub max_iter: usize,
}

impl Default for NelderMead {
    fn default() -> Self {
        Self { step: 0.1, f_tol: 1e-8, max_iter: 500 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Minimum {
    pub x: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
    pub converged: bool,
}

impl NelderMead {
    /// Minimize `f` from `x0`. `f` may return `+inf` (or NaN, treated as
    /// `+inf`) outside its domain; the start point should be inside it.
    pub fn minimize<F>(&self, mut f: F, x0: &[f64]) -> Minimum
    where
        F: FnMut(&[f64]) -> f64,
    {
        let dim = x0.len();
        let mut eval = |x: &[f64]| {
            let v = f(x);
            if v.is_nan() {
                f64::INFINITY
            } else {
                v
            }
        };

        let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(dim + 1);
        simplex.push((x0.to_vec(), eval(x0)));
        for i in 0..dim {
            let mut x = x0.to_vec();
            x[i] += self.step;
            let v = eval(&x);
            simplex.push((x, v));
        }

        let mut iterations = 0;
        let mut converged = false;
        while iterations < self.max_iter {
            simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
            let best = simplex[0].1;
            let worst = simplex[dim].1;
            if worst - best < self.f_tol {
                converged = true;
                break;
            }
            iterations += 1;

            let centroid: Vec<f64> =
                (0..dim).map(|j| simplex[..dim].iter().map(|(x, _)| x[j]).sum::<f64>() / dim as f64).collect();
            let along = |t: f64, from: &[f64]| -> Vec<f64> {
                centroid.iter().zip(from).map(|(c, w)| c + t * (w - c)).collect()
            };

            let second_worst = simplex[dim - 1].1;
            let reflected = along(-1.0, &simplex[dim].0);
            let f_r = eval(&reflected);

            if f_r < best {
                let expanded = along(-2.0, &simplex[dim].0);
                let f_e = eval(&expanded);
                simplex[dim] = if f_e < f_r { (expanded, f_e) } else { (reflected, f_r) };
                continue;
            }
            if f_r < second_worst {
                simplex[dim] = (reflected, f_r);
                continue;
            }
            let (contracted, f_c) = if f_r < worst {
                let x = along(-0.5, &simplex[dim].0);
                let v = eval(&x);
                (x, v)
            } else {
                let x = along(0.5, &simplex[dim].0);
                let v = eval(&x);
                (x, v)
            };
            if f_c < worst.min(f_r) {
                simplex[dim] = (contracted, f_c);
                continue;
            }
            let anchor = simplex[0].0.clone();
            for vertex in simplex.iter_mut().skip(1) {
                let x: Vec<f64> = anchor.iter().zip(&vertex.0).map(|(a, v)| a + 0.5 * (v - a)).collect();
                let v = eval(&x);
                *vertex = (x, v);
            }
        }
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let (x, value) = simplex.swap_remove(0);
        Minimum { x, value, iterations, converged }
    }
}
