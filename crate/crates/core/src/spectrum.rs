//! Eigenvalues of small real matrices.
//!
//! The matrix is split into the diagonal blocks of its block-triangular form
//! (strongly connected components of the sparsity graph). One- and two-dimensional
//! blocks are solved exactly; larger blocks go through the characteristic
//! polynomial (Faddeev–LeVerrier) and Durand–Kerner iteration. Defective
//! eigenvalues that sit in separate 1x1 blocks therefore come out exact.

use num_complex::Complex64;

/// Indices of the strongly connected components of the nonzero pattern of `a`.
fn components(a: &[Vec<f64>]) -> Vec<Vec<usize>> {
    let n = a.len();
    let mut reach: Vec<Vec<bool>> = a
        .iter()
        .enumerate()
        .map(|(i, row)| row.iter().enumerate().map(|(j, &v)| i == j || v != 0.0).collect())
        .collect();
    for k in 0..n {
        let via = reach[k].clone();
        for row in reach.iter_mut().filter(|row| row[k]) {
            for (r, &v) in row.iter_mut().zip(&via) {
                *r |= v;
            }
        }
    }
    let mut seen = vec![false; n];
    let mut out = Vec::new();
    for i in 0..n {
        if seen[i] {
            continue;
        }
        let block: Vec<usize> = (0..n).filter(|&j| reach[i][j] && reach[j][i]).collect();
        for &j in &block {
            seen[j] = true;
        }
        out.push(block);
    }
    out
}

/// Coefficients `[c_0, ..., c_{n-1}, 1]` of `det(lambda I - a)`.
fn characteristic_polynomial(a: &[Vec<f64>]) -> Vec<f64> {
    let n = a.len();
    let mut coeffs = vec![0.0; n + 1];
    coeffs[n] = 1.0;
    let mut m = vec![vec![0.0; n]; n];
    for k in 1..=n {
        // M_k = A M_{k-1} + c_{n-k+1} I
        let mut next = vec![vec![0.0; n]; n];
        for i in 0..n {
            for j in 0..n {
                next[i][j] = (0..n).map(|l| a[i][l] * m[l][j]).sum::<f64>();
            }
            next[i][i] += coeffs[n - k + 1];
        }
        m = next;
        let trace: f64 = (0..n).map(|i| (0..n).map(|l| a[i][l] * m[l][i]).sum::<f64>()).sum();
        coeffs[n - k] = -trace / k as f64;
    }
    coeffs
}

/// Roots of a monic polynomial given by ascending coefficients.
fn durand_kerner(coeffs: &[f64]) -> Vec<Complex64> {
    let n = coeffs.len() - 1;
    let eval = |z: Complex64| {
        coeffs
            .iter()
            .rev()
            .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * z + c)
    };
    let radius = 1.0 + coeffs[..n].iter().fold(0.0_f64, |m, c| m.max(c.abs()));
    let seed = Complex64::new(0.4, 0.9);
    let mut roots: Vec<Complex64> = (0..n).map(|k| seed.powu(k as u32) * radius).collect();
    for _ in 0..500 {
        let mut delta = 0.0_f64;
        for i in 0..n {
            let denom = (0..n)
                .filter(|&j| j != i)
                .fold(Complex64::new(1.0, 0.0), |acc, j| acc * (roots[i] - roots[j]));
            let step = eval(roots[i]) / denom;
            roots[i] -= step;
            delta = delta.max(step.norm());
        }
        if delta < 1e-15 * radius {
            break;
        }
    }
    roots
}

pub fn eigenvalues(a: &[Vec<f64>]) -> Vec<Complex64> {
    let mut out = Vec::with_capacity(a.len());
    for block in components(a) {
        let sub: Vec<Vec<f64>> = block
            .iter()
            .map(|&i| block.iter().map(|&j| a[i][j]).collect())
            .collect();
        match sub.len() {
            1 => out.push(Complex64::new(sub[0][0], 0.0)),
            2 => {
                let tr = sub[0][0] + sub[1][1];
                let det = sub[0][0] * sub[1][1] - sub[0][1] * sub[1][0];
                let disc = Complex64::new(0.25 * tr * tr - det, 0.0).sqrt();
                out.push(0.5 * tr + disc);
                out.push(0.5 * tr - disc);
            }
            _ => out.extend(durand_kerner(&characteristic_polynomial(&sub))),
        }
    }
    out
}
