//! Cartan matrices of the classical series and their positive roots.
//!
//! Convention: `c[i][j] = α_j(h_i)`, so row `i` holds the pairings of the
//! coroot `h_i` with the simple roots.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CartanMatrix {
    entries: Vec<Vec<i64>>,
}

impl CartanMatrix {
    /// Wraps a matrix after checking every Cartan invariant.
    pub fn new(entries: Vec<Vec<i64>>) -> Result<Self> {
        let report = validate_cartan(&entries);
        if !report.passed() {
            return Err(Error::NotFiniteType(report.failures().join("; ")));
        }
        Ok(Self { entries })
    }

    pub fn rank(&self) -> usize {
        self.entries.len()
    }

    pub fn entry(&self, i: usize, j: usize) -> i64 {
        self.entries[i][j]
    }

    pub fn entries(&self) -> &[Vec<i64>] {
        &self.entries
    }

    pub fn is_symmetric(&self) -> bool {
        let n = self.rank();
        (0..n).all(|i| (0..n).all(|j| self.entries[i][j] == self.entries[j][i]))
    }

    /// Smallest positive integers `w` with `C · diag(w)` symmetric, chosen
    /// independently on each connected component of the Dynkin diagram.
    pub fn symmetrizer(&self) -> Vec<i64> {
        let n = self.rank();
        let mut w: Vec<Option<(i64, i64)>> = vec![None; n];
        for root in 0..n {
            if w[root].is_some() {
                continue;
            }
            w[root] = Some((1, 1));
            let mut component = vec![root];
            let mut stack = vec![root];
            while let Some(i) = stack.pop() {
                let (num, den) = w[i].expect("visited");
                for r in 0..n {
                    if r != i && self.entries[i][r] != 0 && w[r].is_none() {
                        // c_ir w_r = c_ri w_i
                        let (a, b) = (num * self.entries[r][i], den * self.entries[i][r]);
                        let g = num_integer::gcd(a, b) * b.signum();
                        w[r] = Some((a / g, b / g));
                        component.push(r);
                        stack.push(r);
                    }
                }
            }
            let lcm = component.iter().fold(1, |acc, &i| num_integer::lcm(acc, w[i].unwrap().1));
            let scaled: Vec<i64> = component.iter().map(|&i| w[i].unwrap().0 * (lcm / w[i].unwrap().1)).collect();
            let g = scaled.iter().fold(0, |acc, &v| num_integer::gcd(acc, v));
            for (&i, v) in component.iter().zip(scaled) {
                w[i] = Some((v / g, 1));
            }
        }
        w.into_iter().map(|v| v.expect("every node visited").0).collect()
    }

    /// `true` when the matrix is the type-A path matrix.
    pub fn is_type_a(&self) -> bool {
        let n = self.rank();
        (0..n).all(|i| {
            (0..n).all(|j| {
                let want = match i.abs_diff(j) {
                    0 => 2,
                    1 => -1,
                    _ => 0,
                };
                self.entries[i][j] == want
            })
        })
    }
}

impl fmt::Display for CartanMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: Vec<String> = self
            .entries
            .iter()
            .map(|r| {
                let cells: Vec<String> = r.iter().map(i64::to_string).collect();
                format!("[{}]", cells.join(","))
            })
            .collect();
        write!(f, "[{}]", rows.join(","))
    }
}

/// Standard Cartan matrix of type `series` and the given rank.
///
/// Accepted ranks: A ≥ 1, B ≥ 2, C ≥ 2, D ≥ 4.
pub fn cartan_matrix(series: &str, rank: usize) -> Result<CartanMatrix> {
    let letter = match series.trim().to_ascii_uppercase().as_str() {
        "A" => 'A',
        "B" => 'B',
        "C" => 'C',
        "D" => 'D',
        other => return Err(Error::UnknownSeries(other.to_string())),
    };
    let min_rank = match letter {
        'A' => 1,
        'B' | 'C' => 2,
        _ => 4,
    };
    if rank < min_rank {
        return Err(Error::InvalidRank {
            series: letter,
            rank,
        });
    }
    let n = rank;
    let mut c = vec![vec![0i64; n]; n];
    for i in 0..n {
        c[i][i] = 2;
        if i + 1 < n {
            c[i][i + 1] = -1;
            c[i + 1][i] = -1;
        }
    }
    match letter {
        // α_n short: ⟨α_{n-1}, α_n^∨⟩ = -2
        'B' => c[n - 1][n - 2] = -2,
        // α_n long
        'C' => c[n - 2][n - 1] = -2,
        'D' => {
            c[n - 2][n - 1] = 0;
            c[n - 1][n - 2] = 0;
            c[n - 3][n - 1] = -1;
            c[n - 1][n - 3] = -1;
        }
        _ => {}
    }
    CartanMatrix::new(c)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CartanCheck {
    Square,
    DiagonalTwo,
    OffDiagonalNonPositive,
    ZeroPatternSymmetric,
    LeadingMinorsPositive,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CheckResult {
    pub check: CartanCheck,
    pub passed: bool,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ValidationReport {
    pub results: Vec<CheckResult>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.results.iter().all(|r| r.passed)
    }

    pub fn failed(&self, check: CartanCheck) -> bool {
        self.results.iter().any(|r| r.check == check && !r.passed)
    }

    pub fn failures(&self) -> Vec<String> {
        self.results
            .iter()
            .filter(|r| !r.passed)
            .map(|r| format!("{:?}: {}", r.check, r.detail))
            .collect()
    }
}

/// Checks every Cartan-matrix invariant and reports each verdict.
pub fn validate_cartan(m: &[Vec<i64>]) -> ValidationReport {
    let n = m.len();
    let square = n > 0 && m.iter().all(|r| r.len() == n);
    let mut results = vec![CheckResult {
        check: CartanCheck::Square,
        passed: square,
        detail: if square {
            format!("{n}x{n}")
        } else {
            "matrix is empty or not square".into()
        },
    }];
    if !square {
        return ValidationReport { results };
    }

    let bad_diag: Vec<usize> = (0..n).filter(|&i| m[i][i] != 2).collect();
    results.push(CheckResult {
        check: CartanCheck::DiagonalTwo,
        passed: bad_diag.is_empty(),
        detail: format!("diagonal entries != 2 at {bad_diag:?}"),
    });

    let mut positive = Vec::new();
    let mut asymmetric = Vec::new();
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            if m[i][j] > 0 {
                positive.push((i, j));
            }
            if (m[i][j] == 0) != (m[j][i] == 0) {
                asymmetric.push((i, j));
            }
        }
    }
    results.push(CheckResult {
        check: CartanCheck::OffDiagonalNonPositive,
        passed: positive.is_empty(),
        detail: format!("positive off-diagonal entries at {positive:?}"),
    });
    results.push(CheckResult {
        check: CartanCheck::ZeroPatternSymmetric,
        passed: asymmetric.is_empty(),
        detail: format!("c_ij = 0 but c_ji != 0 at {asymmetric:?}"),
    });

    let minors: Vec<i128> = (1..=n).map(|k| leading_minor(m, k)).collect();
    let first_bad = minors.iter().position(|&d| d <= 0);
    results.push(CheckResult {
        check: CartanCheck::LeadingMinorsPositive,
        passed: first_bad.is_none(),
        detail: match first_bad {
            Some(k) => format!("leading minor of order {} is {}", k + 1, minors[k]),
            None => format!("determinant {}", minors[n - 1]),
        },
    });
    ValidationReport { results }
}

/// Leading principal minor of order `k` by fraction-free (Bareiss) elimination.
fn leading_minor(m: &[Vec<i64>], k: usize) -> i128 {
    let mut a: Vec<Vec<i128>> = (0..k)
        .map(|i| (0..k).map(|j| i128::from(m[i][j])).collect())
        .collect();
    let mut sign = 1i128;
    let mut prev = 1i128;
    for p in 0..k {
        if a[p][p] == 0 {
            match (p + 1..k).find(|&i| a[i][p] != 0) {
                Some(i) => {
                    a.swap(p, i);
                    sign = -sign;
                }
                None => return 0,
            }
        }
        for i in p + 1..k {
            for j in p + 1..k {
                a[i][j] = (a[i][j] * a[p][p] - a[i][p] * a[p][j]) / prev;
            }
        }
        prev = a[p][p];
    }
    sign * a[k - 1][k - 1]
}

/// Positive root as coefficients over the simple roots.
pub type Root = Vec<i64>;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RootSystem {
    rank: usize,
    /// Ordered by height, then lexicographically descending; the first
    /// `rank` entries are the simple roots in order.
    positive: Vec<Root>,
    exponents: Vec<usize>,
}

impl RootSystem {
    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn positive_roots(&self) -> &[Root] {
        &self.positive
    }

    /// Number of positive roots, `J`.
    pub fn count(&self) -> usize {
        self.positive.len()
    }

    pub fn exponents(&self) -> &[usize] {
        &self.exponents
    }

    pub fn simple_root(&self, i: usize) -> &Root {
        &self.positive[i]
    }

    pub fn height(&self, k: usize) -> i64 {
        self.positive[k].iter().sum()
    }

    pub fn index_of(&self, root: &[i64]) -> Option<usize> {
        self.positive.iter().position(|r| r == root)
    }

    pub fn max_height(&self) -> i64 {
        (0..self.count()).map(|k| self.height(k)).max().unwrap_or(0)
    }
}

/// Enumerates the positive roots by closure under simple-root addition.
///
/// `β + α_i` is a root exactly when the `α_i`-string through `β` extends
/// upward, i.e. `p - ⟨β, α_i^∨⟩ > 0`, where `p` counts how far the string
/// extends downward among roots already found.
pub fn positive_roots(m: &CartanMatrix) -> Result<RootSystem> {
    let report = validate_cartan(m.entries());
    if !report.passed() {
        return Err(Error::NotFiniteType(report.failures().join("; ")));
    }
    let n = m.rank();
    let mut found: BTreeSet<Root> = BTreeSet::new();
    let mut layer: Vec<Root> = (0..n)
        .map(|i| {
            let mut r = vec![0; n];
            r[i] = 1;
            r
        })
        .collect();
    let mut ordered: Vec<Root> = Vec::new();
    while !layer.is_empty() {
        layer.sort_by(|a, b| b.cmp(a));
        layer.dedup();
        for r in &layer {
            found.insert(r.clone());
        }
        ordered.extend(layer.iter().cloned());
        let mut next = Vec::new();
        for beta in &layer {
            for i in 0..n {
                let pairing: i64 = (0..n).map(|j| beta[j] * m.entry(i, j)).sum();
                let mut p = 0;
                let mut down = beta.clone();
                loop {
                    down[i] -= 1;
                    if down[i] >= 0 && found.contains(&down) {
                        p += 1;
                    } else {
                        break;
                    }
                }
                if p - pairing > 0 {
                    let mut up = beta.clone();
                    up[i] += 1;
                    if !found.contains(&up) {
                        next.push(up);
                    }
                }
            }
        }
        layer = next;
    }
    // Simple roots come first because height-1 roots are exactly the
    // simple ones and descending lex order lists α_1 before α_2.
    let exponents = exponents_from_heights(&ordered);
    Ok(RootSystem {
        rank: n,
        positive: ordered,
        exponents,
    })
}

/// Exponents from the height partition: #roots of height k equals
/// #exponents ≥ k.
fn exponents_from_heights(roots: &[Root]) -> Vec<usize> {
    let max_h = roots.iter().map(|r| r.iter().sum::<i64>()).max().unwrap_or(0) as usize;
    let mut at_height = vec![0usize; max_h + 2];
    for r in roots {
        at_height[r.iter().sum::<i64>() as usize] += 1;
    }
    let mut exps = Vec::new();
    for k in 1..=max_h {
        let count = at_height[k] - at_height[k + 1];
        exps.extend(std::iter::repeat_n(k, count));
    }
    exps
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn registry_small_type_a() {
        assert_eq!(cartan_matrix("A", 1).unwrap().entries(), &[vec![2]]);
        assert_eq!(
            cartan_matrix("A", 2).unwrap().entries(),
            &[vec![2, -1], vec![-1, 2]]
        );
        assert_eq!(
            cartan_matrix("a", 3).unwrap().entries(),
            &[vec![2, -1, 0], vec![-1, 2, -1], vec![0, -1, 2]]
        );
    }

    #[test]
    fn symmetrizers() {
        for (series, rank) in [("A", 3), ("B", 3), ("C", 4), ("D", 5), ("B", 2)] {
            let m = cartan_matrix(series, rank).unwrap();
            let w = m.symmetrizer();
            assert!(w.iter().all(|&v| v > 0));
            for i in 0..rank {
                for j in 0..rank {
                    assert_eq!(m.entry(i, j) * w[j], m.entry(j, i) * w[i], "{series}{rank}");
                }
            }
        }
        assert_eq!(cartan_matrix("A", 4).unwrap().symmetrizer(), vec![1; 4]);
        let b2 = cartan_matrix("B", 2).unwrap();
        let mut w = b2.symmetrizer();
        w.sort();
        assert_eq!(w, vec![1, 2]);
    }

    #[test]
    fn registry_errors() {
        assert!(matches!(cartan_matrix("E", 6), Err(Error::UnknownSeries(_))));
        assert!(matches!(cartan_matrix("A", 0), Err(Error::InvalidRank { .. })));
        assert!(matches!(cartan_matrix("D", 3), Err(Error::InvalidRank { .. })));
    }

    #[test]
    fn validation_examples() {
        assert!(validate_cartan(&[vec![2, -1], vec![-1, 2]]).passed());
        let affine = validate_cartan(&[vec![2, -2], vec![-2, 2]]);
        assert!(affine.failed(CartanCheck::LeadingMinorsPositive));
        let positive = validate_cartan(&[vec![2, 1], vec![1, 2]]);
        assert!(positive.failed(CartanCheck::OffDiagonalNonPositive));
        assert!(!validate_cartan(&[vec![2, -1, 0], vec![-1, 2]]).passed());
    }

    #[test]
    fn small_root_systems() {
        let a1 = positive_roots(&cartan_matrix("A", 1).unwrap()).unwrap();
        assert_eq!(a1.positive_roots(), &[vec![1]]);
        assert_eq!(a1.exponents(), &[1]);

        let a2 = positive_roots(&cartan_matrix("A", 2).unwrap()).unwrap();
        assert_eq!(a2.positive_roots(), &[vec![1, 0], vec![0, 1], vec![1, 1]]);
        assert_eq!(a2.exponents(), &[1, 2]);

        let a3 = positive_roots(&cartan_matrix("A", 3).unwrap()).unwrap();
        assert_eq!(a3.count(), 6);
        assert_eq!(a3.exponents(), &[1, 2, 3]);
    }

    #[test]
    fn classical_root_counts_and_exponents() {
        let b3 = positive_roots(&cartan_matrix("B", 3).unwrap()).unwrap();
        assert_eq!(b3.count(), 9);
        assert_eq!(b3.exponents(), &[1, 3, 5]);
        let c3 = positive_roots(&cartan_matrix("C", 3).unwrap()).unwrap();
        assert_eq!(c3.count(), 9);
        let d4 = positive_roots(&cartan_matrix("D", 4).unwrap()).unwrap();
        assert_eq!(d4.count(), 12);
        assert_eq!(d4.exponents(), &[1, 3, 3, 5]);
        let g2_like = CartanMatrix::new(vec![vec![2, -1], vec![-3, 2]]).unwrap();
        assert_eq!(positive_roots(&g2_like).unwrap().count(), 6);
    }

    #[test]
    fn non_finite_type_rejected() {
        assert!(CartanMatrix::new(vec![vec![2, -2], vec![-2, 2]]).is_err());
    }
}
