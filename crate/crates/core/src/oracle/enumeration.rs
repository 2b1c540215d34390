//! Cokernel reconstruction by brute-force enumeration, independent of elimination.
//!
//! For square `M` with `det M = D != 0`, the map `x -> x adj(M)` sends `Z^n` into
//! `D Z^n` exactly on the row lattice of `M`, so `coker M` is the subgroup of
//! `(Z_D)^n` spanned by the rows of `adj(M)`. Its `p`-primary part is the subgroup of
//! `(Z_{p^e})^n` spanned by the same rows, where `p^e` exactly divides `D`.

use std::collections::{BTreeMap, HashSet};

use super::OracleError;
use crate::abelian::{FgAbelianGroup, IntegerPresentation, PrimePower};

/// Determinant by cofactor expansion along the first row.
pub(crate) fn determinant(m: &[Vec<i128>]) -> i128 {
    match m.len() {
        0 => 1,
        1 => m[0][0],
        n => (0..n)
            .filter(|&j| m[0][j] != 0)
            .map(|j| {
                let sign = if j % 2 == 0 { 1 } else { -1 };
                sign * m[0][j] * determinant(&minor(m, 0, j))
            })
            .sum(),
    }
}

fn minor(m: &[Vec<i128>], row: usize, col: usize) -> Vec<Vec<i128>> {
    m.iter()
        .enumerate()
        .filter(|&(i, _)| i != row)
        .map(|(_, r)| r.iter().enumerate().filter(|&(j, _)| j != col).map(|(_, &x)| x).collect())
        .collect()
}

/// `adj(M)[i][j] = (-1)^(i+j) det(minor(M, j, i))`.
fn adjugate(m: &[Vec<i128>]) -> Vec<Vec<i128>> {
    let n = m.len();
    if n == 1 {
        return vec![vec![1]];
    }
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    let sign = if (i + j) % 2 == 0 { 1 } else { -1 };
                    sign * determinant(&minor(m, j, i))
                })
                .collect()
        })
        .collect()
}

/// Prime factorization by trial division.
fn trial_factor(mut n: u128) -> BTreeMap<u128, u32> {
    let mut out = BTreeMap::new();
    let mut d = 2u128;
    while d * d <= n {
        while n.is_multiple_of(d) {
            *out.entry(d).or_insert(0) += 1;
            n /= d;
        }
        d += 1;
    }
    if n > 1 {
        *out.entry(n).or_insert(0) += 1;
    }
    out
}

/// All elements of the subgroup of `(Z_modulus)^n` generated by `gens`.
fn span(gens: &[Vec<u128>], modulus: u128, n: usize, cap: u64) -> Result<Vec<Vec<u128>>, OracleError> {
    let zero = vec![0u128; n];
    let mut seen: HashSet<Vec<u128>> = HashSet::from([zero.clone()]);
    let mut frontier = vec![zero];
    while let Some(x) = frontier.pop() {
        for g in gens {
            let y: Vec<u128> = x.iter().zip(g).map(|(a, b)| (a + b) % modulus).collect();
            if seen.insert(y.clone()) {
                if seen.len() as u64 > cap {
                    return Err(OracleError::TooLarge { size: seen.len() as u64, cap });
                }
                frontier.push(y);
            }
        }
    }
    Ok(seen.into_iter().collect())
}

fn order_exponent(x: &[u128], p: u128, e: u32) -> u32 {
    // order of x in (Z_{p^e})^n is p^(e - least valuation of a nonzero coordinate)
    x.iter()
        .filter(|&&c| c != 0)
        .map(|&c| {
            let mut v = 0;
            let mut c = c;
            while c % p == 0 {
                c /= p;
                v += 1;
            }
            e - v
        })
        .max()
        .unwrap_or(0)
}

/// Rebuilds `coker M` for square nonsingular `M` from the orders of its elements.
///
/// `cap` bounds the number of elements enumerated per primary component. A component
/// of prime order is cyclic by Lagrange and is not enumerated.
pub fn cokernel_enumeration(m: &IntegerPresentation, cap: u64) -> Result<FgAbelianGroup, OracleError> {
    let n = m.generators();
    if m.relations() != n {
        return Err(OracleError::NotSquare { rows: m.relations(), cols: n });
    }
    let rows: Vec<Vec<i128>> = m
        .rows()
        .iter()
        .map(|r| r.iter().map(|x| i128::try_from(x).map_err(|_| OracleError::EntryTooLarge)).collect())
        .collect::<Result<_, _>>()?;
    let det = determinant(&rows);
    if det == 0 {
        return Err(OracleError::Singular);
    }
    let adj = adjugate(&rows);
    let mut group = FgAbelianGroup::trivial();
    for (p, e) in trial_factor(det.unsigned_abs()) {
        let modulus = p.pow(e);
        let prime = u64::try_from(p).map_err(|_| OracleError::EntryTooLarge)?;
        if e == 1 {
            group = group.direct_sum(&FgAbelianGroup::cyclic(prime));
            continue;
        }
        let gens: Vec<Vec<u128>> =
            adj.iter().map(|r| r.iter().map(|&x| x.rem_euclid(modulus as i128) as u128).collect()).collect();
        let elements = span(&gens, modulus, n, cap)?;
        // log_p of the number of elements of order dividing p^k, for k = 0..=e+1
        let mut logs = Vec::with_capacity(e as usize + 2);
        for k in 0..=e + 1 {
            let count = elements.iter().filter(|x| order_exponent(x, p, e) <= k).count() as u128;
            let mut log = 0i64;
            let mut c = count;
            while c > 1 {
                if !c.is_multiple_of(p) {
                    return Err(OracleError::Inconsistent(format!("{count} elements of order dividing {p}^{k}")));
                }
                c /= p;
                log += 1;
            }
            logs.push(log);
        }
        for j in 1..=e as usize {
            let summands = 2 * logs[j] - logs[j - 1] - logs[j + 1];
            if summands > 0 {
                let q = PrimePower::new(prime, j as u32).expect("trial division yields primes");
                group = group.direct_sum(&FgAbelianGroup::from_parts(0, [(q, summands as u64)]));
            }
        }
    }
    if group.order().map(|o| o.to_string()) != Some(det.unsigned_abs().to_string()) {
        return Err(OracleError::Inconsistent(format!("reconstructed {group} but |det| = {}", det.unsigned_abs())));
    }
    Ok(group)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pp(p: u64, j: u32) -> PrimePower {
        PrimePower::new(p, j).unwrap()
    }

    #[test]
    fn known_cokernels() {
        let z6 = cokernel_enumeration(&IntegerPresentation::from_rows(&[vec![2, 0], vec![0, 3]]), 10_000).unwrap();
        assert_eq!(z6, FgAbelianGroup::from_prime_powers([pp(2, 1), pp(3, 1)]));
        let g = cokernel_enumeration(&IntegerPresentation::from_rows(&[vec![2, 4], vec![-2, 6]]), 10_000).unwrap();
        assert_eq!(g, FgAbelianGroup::from_parts(0, [(pp(2, 1), 2), (pp(5, 1), 1)]));
        assert_eq!(g.order().unwrap(), 20u32.into());
        assert!(cokernel_enumeration(&IntegerPresentation::from_rows(&[vec![1]]), 10).unwrap().is_trivial());
    }

    #[test]
    fn prime_power_structure() {
        // Z_4 + Z_2 versus Z_8
        let a = cokernel_enumeration(&IntegerPresentation::from_rows(&[vec![4, 0], vec![0, 2]]), 100).unwrap();
        assert_eq!(a, FgAbelianGroup::from_prime_powers([pp(2, 2), pp(2, 1)]));
        let b = cokernel_enumeration(&IntegerPresentation::from_rows(&[vec![8, 1], vec![0, 1]]), 100).unwrap();
        assert_eq!(b, FgAbelianGroup::from_prime_powers([pp(2, 3)]));
    }

    #[test]
    fn rejections() {
        assert_eq!(
            cokernel_enumeration(&IntegerPresentation::from_rows(&[vec![1, 2]]), 100),
            Err(OracleError::NotSquare { rows: 1, cols: 2 })
        );
        assert_eq!(
            cokernel_enumeration(&IntegerPresentation::from_rows(&[vec![1, 2], vec![2, 4]]), 100),
            Err(OracleError::Singular)
        );
        assert!(matches!(
            cokernel_enumeration(&IntegerPresentation::from_rows(&[vec![64, 0], vec![0, 64]]), 100),
            Err(OracleError::TooLarge { .. })
        ));
        // a large prime-order component is cyclic without enumeration
        let big = cokernel_enumeration(&IntegerPresentation::from_rows(&[vec![10_007]]), 100).unwrap();
        assert_eq!(big, FgAbelianGroup::cyclic(10_007));
    }

    #[test]
    fn determinant_by_cofactors() {
        assert_eq!(determinant(&[vec![2, 4], vec![-2, 6]]), 20);
        assert_eq!(determinant(&[vec![1, 2, 3], vec![4, 5, 6], vec![7, 8, 10]]), -3);
    }
}
