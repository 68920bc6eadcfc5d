//! Test-side reference computations. Nothing here calls into the library's
//! row access, fixed-node or evolution code.

#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// 2×2 matrix for a Pauli label.
pub fn pauli(label: char) -> DMatrix<Complex64> {
    let z = c(0.0, 0.0);
    let o = c(1.0, 0.0);
    let i = c(0.0, 1.0);
    match label {
        'I' => DMatrix::from_row_slice(2, 2, &[o, z, z, o]),
        'X' => DMatrix::from_row_slice(2, 2, &[z, o, o, z]),
        'Y' => DMatrix::from_row_slice(2, 2, &[z, -i, i, z]),
        'Z' => DMatrix::from_row_slice(2, 2, &[o, z, z, -o]),
        _ => panic!("unknown Pauli {label}"),
    }
}

/// Kronecker product with qubit 0 as the least significant index bit, so
/// `word[q]` acts on bit `q`.
pub fn pauli_word(word: &[char]) -> DMatrix<Complex64> {
    let mut m = DMatrix::from_element(1, 1, c(1.0, 0.0));
    for &p in word.iter().rev() {
        m = m.kronecker(&pauli(p));
    }
    m
}

/// Inverse-square exchange ring with `J(d) = 1/(4 (L/π sin(πd/L))²)`,
/// built from Kronecker products.
pub fn haldane_shastry_dense(sites: usize) -> DMatrix<f64> {
    let dim = 1usize << sites;
    let mut h = DMatrix::<Complex64>::zeros(dim, dim);
    let l = sites as f64;
    let pi = std::f64::consts::PI;
    for i in 0..sites {
        for j in i + 1..sites {
            let chord = l / pi * (pi * (j - i) as f64 / l).sin();
            let coupling = 1.0 / (4.0 * chord * chord);
            for p in ['X', 'Y', 'Z'] {
                let mut word = vec!['I'; sites];
                word[i] = p;
                word[j] = p;
                h += pauli_word(&word) * c(coupling, 0.0);
            }
        }
    }
    assert!(h.iter().all(|z| z.im.abs() < 1e-14));
    h.map(|z| z.re)
}

/// Indices of weight-`k` states in increasing order.
pub fn weight_indices(n: usize, k: usize) -> Vec<usize> {
    (0..1usize << n).filter(|i| i.count_ones() as usize == k).collect()
}

pub fn restrict(m: &DMatrix<f64>, idx: &[usize]) -> DMatrix<f64> {
    DMatrix::from_fn(idx.len(), idx.len(), |a, b| m[(idx[a], idx[b])])
}

/// Eigenvalues ascending with eigenvectors.
pub fn eigh(m: &DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let e = m.clone().symmetric_eigen();
    let mut order: Vec<usize> = (0..e.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| e.eigenvalues[a].total_cmp(&e.eigenvalues[b]));
    let vals = order.iter().map(|&k| e.eigenvalues[k]).collect();
    let vecs = DMatrix::from_columns(&order.iter().map(|&k| e.eigenvectors.column(k)).collect::<Vec<_>>());
    (vals, vecs)
}

/// Textbook fixed-node construction from a dense `H` and a real vector:
/// sign-violating off-diagonal entries are zeroed and moved to the diagonal
/// with weight `ψ_y/ψ_x`.
pub fn fixed_node_dense(h: &DMatrix<f64>, psi: &DVector<f64>) -> DMatrix<f64> {
    let n = h.nrows();
    let mut f = h.clone();
    for x in 0..n {
        for y in 0..n {
            if x != y && h[(x, y)] * psi[y] / psi[x] > 0.0 {
                f[(x, x)] += h[(x, y)] * psi[y] / psi[x];
                f[(x, y)] = 0.0;
            }
        }
    }
    f
}

/// `G = D (λ I - F) D⁻¹`.
pub fn generator_dense(f: &DMatrix<f64>, psi: &DVector<f64>, lambda1: f64) -> DMatrix<f64> {
    let n = f.nrows();
    DMatrix::from_fn(n, n, |i, j| {
        let m = if i == j { lambda1 - f[(i, j)] } else { -f[(i, j)] };
        psi[i] * m / psi[j]
    })
}

/// `e^A` by scaling and squaring a truncated Taylor series.
pub fn expm(a: &DMatrix<f64>) -> DMatrix<f64> {
    let norm = a
        .row_iter()
        .map(|r| r.iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max);
    let mut s = 0;
    while norm / f64::powi(2.0, s) > 0.25 {
        s += 1;
    }
    let b = a / f64::powi(2.0, s);
    let n = a.nrows();
    let mut term = DMatrix::<f64>::identity(n, n);
    let mut sum = term.clone();
    for k in 1..=24 {
        term = &term * &b / k as f64;
        sum += &term;
    }
    for _ in 0..s {
        sum = &sum * &sum;
    }
    sum
}

/// `x_{t+1} = ρ x_t + sqrt(1 - ρ²) ξ_t`, started in equilibrium.
pub fn ar1(rho: f64, len: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let scale = (1.0 - rho * rho).sqrt();
    let mut x: f64 = rng.sample(StandardNormal);
    (0..len)
        .map(|_| {
            let v = x;
            x = rho * x + scale * rng.sample::<f64, _>(StandardNormal);
            v
        })
        .collect()
}

/// Least-squares slope of `y` on `x`.
pub fn slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

pub fn mean_and_se(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let m = v.iter().sum::<f64>() / n;
    let var = v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (n - 1.0);
    (m, (var / n).sqrt())
}
