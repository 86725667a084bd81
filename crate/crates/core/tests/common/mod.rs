//! Reference computations used by the integration tests. Nothing here calls
//! into the kernels, sampler or metrics under test.

#![allow(dead_code, clippy::needless_range_loop)]

use sachem_core::{Direction, MoleculeKind, Population, ReactionRule};

/// Dense `m x n` correlation matrix: `W[i][j] = w[j - i*s + p]` when in range.
pub fn dense_matrix(kernel: &[f64], padding: usize, stride: usize, n: usize, m: usize) -> Vec<Vec<f64>> {
    let k = kernel.len() as i64;
    (0..m)
        .map(|i| {
            (0..n)
                .map(|j| {
                    let t = j as i64 - (i * stride) as i64 + padding as i64;
                    if (0..k).contains(&t) {
                        kernel[t as usize]
                    } else {
                        0.0
                    }
                })
                .collect()
        })
        .collect()
}

pub fn dense_encode_len(n: usize, k: usize, p: usize, s: usize) -> Option<usize> {
    let padded = n + 2 * p;
    (padded >= k).then(|| (padded - k) / s + 1)
}

pub fn dense_decode_len(m: usize, k: usize, p: usize, s: usize) -> Option<usize> {
    let n = (m as i64 - 1) * s as i64 - 2 * p as i64 + k as i64;
    (n >= 1).then_some(n as usize)
}

pub fn matvec(w: &[Vec<f64>], x: &[f64]) -> Vec<f64> {
    w.iter().map(|row| row.iter().zip(x).map(|(a, b)| a * b).sum()).collect()
}

pub fn matvec_t(w: &[Vec<f64>], y: &[f64]) -> Vec<f64> {
    let n = w.first().map_or(0, Vec::len);
    let mut out = vec![0.0; n];
    for (row, yi) in w.iter().zip(y) {
        for (o, a) in out.iter_mut().zip(row) {
            *o += a * yi;
        }
    }
    out
}

pub fn tanh2(v: Vec<f64>) -> Vec<f64> {
    v.into_iter().map(|x| (2.0 * x).tanh()).collect()
}

/// Encode via the dense matrix, activation included.
pub fn oracle_encode(x: &[f64], kernel: &[f64], p: usize, s: usize) -> Vec<f64> {
    let m = dense_encode_len(x.len(), kernel.len(), p, s).expect("window fits");
    tanh2(matvec(&dense_matrix(kernel, p, s, x.len(), m), x))
}

/// Decode via the transposed dense matrix, activation included.
pub fn oracle_decode(y: &[f64], kernel: &[f64], p: usize, s: usize) -> Vec<f64> {
    let n = dense_decode_len(y.len(), kernel.len(), p, s).expect("positive length");
    tanh2(matvec_t(&dense_matrix(kernel, p, s, n, y.len()), y))
}

pub fn oracle_react(rule: &ReactionRule, substrate: &[f64], catalyst: &[f64]) -> Vec<f64> {
    let (p, s) = (rule.spec.padding, rule.spec.stride);
    match rule.spec.direction {
        Direction::Encode => oracle_encode(substrate, catalyst, p, s),
        Direction::Decode => oracle_decode(substrate, catalyst, p, s),
    }
}

fn rows(pop: &Population, kind: MoleculeKind) -> Vec<Vec<f64>> {
    (0..pop.count(kind)).map(|i| pop.get(kind, i).to_vec()).collect()
}

fn nn_mse(x: &[f64], pool: &[Vec<f64>]) -> f64 {
    pool.iter()
        .map(|p| x.iter().zip(p).map(|(a, b)| (a - b).powi(2)).sum::<f64>() / x.len() as f64)
        .fold(f64::INFINITY, f64::min)
}

/// Exact expected reconstruction error: every original of the start kind,
/// every catalyst assignment (first catalyst excludes the substrate itself
/// when kinds coincide), each assignment equally likely.
pub fn exhaustive_reconstruction_error(pop: &Population, rules: &[&ReactionRule]) -> f64 {
    let start = rules[0].substrate;
    let originals = rows(pop, start);
    let mut total = 0.0;
    for (i, x) in originals.iter().enumerate() {
        let mut sum = 0.0;
        let mut count = 0usize;
        enumerate_assignments(pop, rules, 0, x.clone(), Some(i), &mut |product| {
            sum += nn_mse(product, &originals);
            count += 1;
        });
        total += sum / count as f64;
    }
    total / originals.len() as f64
}

fn enumerate_assignments(
    pop: &Population,
    rules: &[&ReactionRule],
    stage: usize,
    current: Vec<f64>,
    live_index: Option<usize>,
    visit: &mut dyn FnMut(&[f64]),
) {
    if stage == rules.len() {
        visit(&current);
        return;
    }
    let rule = rules[stage];
    let catalysts = rows(pop, rule.catalyst);
    for (c, cat) in catalysts.iter().enumerate() {
        if stage == 0 && rule.catalyst == rule.substrate && live_index == Some(c) {
            continue;
        }
        let next = oracle_react(rule, &current, cat);
        enumerate_assignments(pop, rules, stage + 1, next, None, visit);
    }
}

/// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations.
pub fn jacobi_eigenvalues(mut a: Vec<Vec<f64>>) -> Vec<f64> {
    let n = a.len();
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i][j] * a[i][j])
            .sum();
        if off < 1e-30 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if a[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (akp, akq) = (a[k][p], a[k][q]);
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[p][k], a[q][k]);
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
            }
        }
    }
    let mut ev: Vec<f64> = (0..n).map(|i| a[i][i]).collect();
    ev.sort_by(|x, y| y.total_cmp(x));
    ev
}

/// Sample covariance (divisor n - 1) of row-major points.
pub fn covariance(points: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = points.len() as f64;
    let d = points[0].len();
    let mean: Vec<f64> = (0..d).map(|j| points.iter().map(|p| p[j]).sum::<f64>() / n).collect();
    (0..d)
        .map(|a| {
            (0..d)
                .map(|b| {
                    points
                        .iter()
                        .map(|p| (p[a] - mean[a]) * (p[b] - mean[b]))
                        .sum::<f64>()
                        / (n - 1.0)
                })
                .collect()
        })
        .collect()
}
