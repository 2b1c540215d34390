use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_traits::{Signed, Zero};

use super::IntegerPresentation;

/// Invariant factors of `m`: `min(rows, cols)` non-negative integers with
/// `d_i | d_{i+1}` and any zeros last.
///
/// Elimination uses only unimodular integer row and column operations: the pivot is
/// the entry of least absolute value in the remaining block, and rows and columns
/// are reduced by Euclidean quotients until the pivot divides everything left.
pub fn smith_normal_form(m: &IntegerPresentation) -> Vec<BigUint> {
    let rows = m.relations();
    let cols = m.generators();
    let mut a: Vec<Vec<BigInt>> = m.rows().to_vec();
    let size = rows.min(cols);
    let mut diagonal = Vec::with_capacity(size);

    for t in 0..size {
        let Some((pi, pj)) = least_nonzero(&a, t) else {
            diagonal.resize(size, BigUint::zero());
            return diagonal;
        };
        a.swap(t, pi);
        swap_columns(&mut a, t, pj);

        loop {
            let mut clean = true;
            for i in t + 1..rows {
                if a[i][t].is_zero() {
                    continue;
                }
                let q = a[i][t].div_floor(&a[t][t]);
                subtract_row(&mut a, i, t, &q);
                if !a[i][t].is_zero() {
                    clean = false;
                }
            }
            for j in t + 1..cols {
                if a[t][j].is_zero() {
                    continue;
                }
                let q = a[t][j].div_floor(&a[t][t]);
                subtract_column(&mut a, j, t, &q);
                if !a[t][j].is_zero() {
                    clean = false;
                }
            }
            if !clean {
                // a smaller remainder now sits in row or column t; promote it
                let (pi, pj) = least_nonzero_in_cross(&a, t);
                a.swap(t, pi);
                swap_columns(&mut a, t, pj);
                continue;
            }
            // pivot must divide every entry of the remaining block
            let offender = (t + 1..rows).find(|&i| (t + 1..cols).any(|j| !a[i][j].is_multiple_of(&a[t][t])));
            match offender {
                Some(i) => add_row(&mut a, t, i),
                None => break,
            }
        }
        diagonal.push(a[t][t].abs().to_biguint().expect("absolute value is non-negative"));
    }
    diagonal
}

fn least_nonzero(a: &[Vec<BigInt>], t: usize) -> Option<(usize, usize)> {
    let mut best: Option<(usize, usize)> = None;
    for (i, row) in a.iter().enumerate().skip(t) {
        for (j, x) in row.iter().enumerate().skip(t) {
            if x.is_zero() {
                continue;
            }
            if best.is_none_or(|(bi, bj)| x.magnitude() < a[bi][bj].magnitude()) {
                best = Some((i, j));
            }
        }
    }
    best
}

fn least_nonzero_in_cross(a: &[Vec<BigInt>], t: usize) -> (usize, usize) {
    let mut best = (t, t);
    let better = |x: &BigInt, best: &BigInt| !x.is_zero() && (best.is_zero() || x.magnitude() < best.magnitude());
    for i in t + 1..a.len() {
        if better(&a[i][t], &a[best.0][best.1]) {
            best = (i, t);
        }
    }
    for j in t + 1..a[t].len() {
        if better(&a[t][j], &a[best.0][best.1]) {
            best = (t, j);
        }
    }
    best
}

fn swap_columns(a: &mut [Vec<BigInt>], i: usize, j: usize) {
    if i != j {
        for row in a.iter_mut() {
            row.swap(i, j);
        }
    }
}

/// row[target] -= q * row[source]
fn subtract_row(a: &mut [Vec<BigInt>], target: usize, source: usize, q: &BigInt) {
    if q.sign() == Sign::NoSign {
        return;
    }
    let src = a[source].clone();
    for (x, s) in a[target].iter_mut().zip(&src) {
        if !s.is_zero() {
            *x -= q * s;
        }
    }
}

/// col[target] -= q * col[source]
fn subtract_column(a: &mut [Vec<BigInt>], target: usize, source: usize, q: &BigInt) {
    if q.is_zero() {
        return;
    }
    for row in a.iter_mut() {
        if !row[source].is_zero() {
            let delta = q * &row[source];
            row[target] -= delta;
        }
    }
}

/// row[target] += row[source]
fn add_row(a: &mut [Vec<BigInt>], target: usize, source: usize) {
    let src = a[source].clone();
    for (x, s) in a[target].iter_mut().zip(&src) {
        *x += s;
    }
}
