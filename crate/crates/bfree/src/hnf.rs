//! Integer row Hermite normal form for the small matrices used throughout the
//! crate (rank <= 2), with optional tracking of the row transformation.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

/// Row Hermite normal form of an integer matrix.
///
/// Returns the nonzero rows with pivots in increasing column order, positive
/// pivots, and every entry above a pivot reduced into `[0, pivot)`.
pub fn row_hnf(rows: Vec<Vec<BigInt>>) -> Vec<Vec<BigInt>> {
    row_hnf_with_transform(rows).0
}

/// Row HNF together with a transformation matrix: `transform[i]` holds integer
/// coefficients expressing HNF row `i` as a combination of the input rows.
pub fn row_hnf_with_transform(rows: Vec<Vec<BigInt>>) -> (Vec<Vec<BigInt>>, Vec<Vec<BigInt>>) {
    let n = rows.len();
    if n == 0 {
        return (vec![], vec![]);
    }
    let width = rows[0].len();
    debug_assert!(rows.iter().all(|r| r.len() == width));
    let mut mat = rows;
    let mut tr: Vec<Vec<BigInt>> = (0..n)
        .map(|i| {
            let mut row = vec![BigInt::zero(); n];
            row[i] = BigInt::one();
            row
        })
        .collect();

    let mut pivot_row = 0usize;
    let mut pivots: Vec<(usize, usize)> = Vec::new();
    for col in 0..width {
        if pivot_row == n {
            break;
        }
        loop {
            // Row with the smallest nonzero magnitude in this column.
            let mut best: Option<usize> = None;
            for r in pivot_row..n {
                if mat[r][col].is_zero() {
                    continue;
                }
                match best {
                    None => best = Some(r),
                    Some(b) => {
                        if mat[r][col].magnitude() < mat[b][col].magnitude() {
                            best = Some(r);
                        }
                    }
                }
            }
            let Some(b) = best else { break };
            mat.swap(pivot_row, b);
            tr.swap(pivot_row, b);
            let mut cleared = true;
            for r in (pivot_row + 1)..n {
                if mat[r][col].is_zero() {
                    continue;
                }
                let q = truncated_quotient(&mat[r][col], &mat[pivot_row][col]);
                row_sub_mul(&mut mat, &mut tr, r, pivot_row, &q);
                if !mat[r][col].is_zero() {
                    cleared = false;
                }
            }
            if cleared {
                if mat[pivot_row][col].is_negative() {
                    negate_row(&mut mat, &mut tr, pivot_row);
                }
                pivots.push((pivot_row, col));
                pivot_row += 1;
                break;
            }
        }
    }

    // Reduce entries above each pivot into [0, pivot).
    for &(prow, pcol) in pivots.iter() {
        for above in 0..prow {
            let q = mat[above][pcol].div_floor(&mat[prow][pcol]);
            if !q.is_zero() {
                row_sub_mul(&mut mat, &mut tr, above, prow, &q);
            }
        }
    }

    mat.truncate(pivots.len());
    tr.truncate(pivots.len());
    (mat, tr)
}

fn truncated_quotient(a: &BigInt, b: &BigInt) -> BigInt {
    let (q, _) = a.div_rem(b);
    q
}

fn negate_row(mat: &mut [Vec<BigInt>], tr: &mut [Vec<BigInt>], row: usize) {
    for v in mat[row].iter_mut() {
        *v = -std::mem::take(v);
    }
    for v in tr[row].iter_mut() {
        *v = -std::mem::take(v);
    }
}

fn row_sub_mul(mat: &mut [Vec<BigInt>], tr: &mut [Vec<BigInt>], target: usize, src: usize, q: &BigInt) {
    if q.is_zero() {
        return;
    }
    let width = mat[target].len();
    for j in 0..width {
        let v = &mat[src][j] * q;
        mat[target][j] -= v;
    }
    let tw = tr[target].len();
    for j in 0..tw {
        let v = &tr[src][j] * q;
        tr[target][j] -= v;
    }
}

/// Solve `x = a (mod m)`, `x = b (mod n)` for not necessarily coprime moduli
/// (`m`, `n` > 0). Returns the canonical solution in `[0, lcm)` or `None`
/// when the congruences are incompatible.
pub fn crt2(a: &BigInt, m: &BigInt, b: &BigInt, n: &BigInt) -> Option<BigInt> {
    let g = m.gcd(n);
    let diff = b - a;
    let (q, r) = diff.div_rem(&g);
    if !r.is_zero() {
        return None;
    }
    let m_red = m / &g;
    let n_red = n / &g;
    let inv = mod_inverse(&m_red.mod_floor(&n_red), &n_red)?;
    let t = (q * inv).mod_floor(&n_red);
    let lcm = m * &n_red;
    Some((a + m * t).mod_floor(&lcm))
}

/// Modular inverse of `a` mod `m` (`m > 0`), if it exists.
pub fn mod_inverse(a: &BigInt, m: &BigInt) -> Option<BigInt> {
    if m.is_one() {
        return Some(BigInt::zero());
    }
    let e = a.extended_gcd(m);
    if !e.gcd.is_one() {
        return None;
    }
    Some(e.x.mod_floor(m))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bi(v: i64) -> BigInt {
        BigInt::from(v)
    }

    #[test]
    fn hnf_of_simple_lattice() {
        let h = row_hnf(vec![vec![bi(4), bi(0)], vec![bi(1), bi(2)]]);
        assert_eq!(h, vec![vec![bi(1), bi(2)], vec![bi(0), bi(8)]]);
    }

    #[test]
    fn hnf_reduces_above_pivot() {
        let h = row_hnf(vec![vec![bi(2), bi(1)], vec![bi(0), bi(3)]]);
        assert_eq!(h, vec![vec![bi(2), bi(1)], vec![bi(0), bi(3)]]);
        let h = row_hnf(vec![vec![bi(2), bi(5)], vec![bi(0), bi(3)]]);
        assert_eq!(h, vec![vec![bi(2), bi(2)], vec![bi(0), bi(3)]]);
    }

    #[test]
    fn hnf_rank_deficient() {
        let h = row_hnf(vec![vec![bi(2), bi(4)], vec![bi(3), bi(6)], vec![bi(5), bi(10)]]);
        assert_eq!(h, vec![vec![bi(1), bi(2)]]);
    }

    #[test]
    fn transform_reconstructs_rows() {
        let rows = vec![
            vec![bi(6), bi(4)],
            vec![bi(10), bi(2)],
            vec![bi(15), bi(9)],
        ];
        let (h, tr) = row_hnf_with_transform(rows.clone());
        for (hrow, coeffs) in h.iter().zip(tr.iter()) {
            let mut acc = vec![BigInt::zero(); 2];
            for (c, row) in coeffs.iter().zip(rows.iter()) {
                for j in 0..2 {
                    acc[j] += c * &row[j];
                }
            }
            assert_eq!(&acc, hrow);
        }
    }

    #[test]
    fn crt2_basic() {
        assert_eq!(crt2(&bi(1), &bi(2), &bi(2), &bi(3)), Some(bi(5)));
        assert_eq!(crt2(&bi(2), &bi(4), &bi(0), &bi(6)), Some(bi(6)));
        assert_eq!(crt2(&bi(1), &bi(4), &bi(0), &bi(6)), None);
    }
}
