//! Finite groups given by their multiplication table.
//!
//! Elements are indices `0..order` with the identity fixed at index 0; every
//! consumer of a group relies on that normalization (it makes "argument is the
//! identity" checks index-local). Construction validates the full group axioms
//! — identity, two-sided inverses, associativity (O(n³) exhaustive) — and an
//! order cap keeps the |G|³ and |G|⁴ scans used elsewhere sub-second.

use serde::{Deserialize, Serialize};

use crate::error::{Error, GroupViolation, Result};

/// A group element: an index into the multiplication table.
pub type Elem = usize;

/// Default cap on supported group order.
pub const DEFAULT_ORDER_CAP: usize = 12;

/// A finite group presented by its full multiplication table.
#[derive(Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FiniteGroup {
    order: usize,
    mult: Vec<Vec<Elem>>,
    #[serde(skip)]
    inv: Vec<Elem>,
}

impl std::fmt::Debug for FiniteGroup {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "FiniteGroup(order={})", self.order)
    }
}

/// Checks the group axioms on a raw table, reporting every violated law with
/// a witness. An empty report means the table is a group with identity 0.
pub fn validate_table(table: &[Vec<Elem>]) -> Vec<GroupViolation> {
    let n = table.len();
    let mut report = Vec::new();
    for (i, row) in table.iter().enumerate() {
        if row.len() != n {
            report.push(GroupViolation::Shape { row: i, col: row.len() });
            return report;
        }
        for (j, &v) in row.iter().enumerate() {
            if v >= n {
                report.push(GroupViolation::Shape { row: i, col: j });
                return report;
            }
        }
    }
    for a in 0..n {
        if table[0][a] != a || table[a][0] != a {
            report.push(GroupViolation::Identity { a });
        }
    }
    for a in 0..n {
        let has_inverse =
            (0..n).any(|b| table[a][b] == 0 && table[b][a] == 0);
        if !has_inverse {
            report.push(GroupViolation::Inverse { a });
        }
    }
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                if table[table[a][b]][c] != table[a][table[b][c]] {
                    report.push(GroupViolation::Associativity { a, b, c });
                }
            }
        }
    }
    report
}

impl FiniteGroup {
    /// Builds a group from a multiplication table, enforcing the default
    /// order cap and all group axioms.
    pub fn from_table(table: Vec<Vec<Elem>>) -> Result<FiniteGroup> {
        FiniteGroup::from_table_with_cap(table, DEFAULT_ORDER_CAP)
    }

    /// Same as [`FiniteGroup::from_table`] with a caller-chosen order cap.
    pub fn from_table_with_cap(table: Vec<Vec<Elem>>, cap: usize) -> Result<FiniteGroup> {
        let order = table.len();
        if order == 0 {
            return Err(Error::InvalidOrder(0));
        }
        if order > cap {
            return Err(Error::OrderCap { order, cap });
        }
        let report = validate_table(&table);
        if let Some(v) = report.into_iter().next() {
            return Err(match v {
                GroupViolation::Shape { .. } => Error::MalformedTable(v),
                _ => Error::GroupLaw(v),
            });
        }
        let inv = (0..order)
            .map(|a| (0..order).find(|&b| table[a][b] == 0).expect("validated"))
            .collect();
        Ok(FiniteGroup { order, mult: table, inv })
    }

    /// The cyclic group Z_n with `mult[a][b] = (a+b) mod n`.
    pub fn make_cyclic(n: usize) -> Result<FiniteGroup> {
        if n == 0 {
            return Err(Error::InvalidOrder(0));
        }
        let table = (0..n).map(|a| (0..n).map(|b| (a + b) % n).collect()).collect();
        FiniteGroup::from_table(table)
    }

    /// Componentwise product; the pair (a,b) is encoded as `a·|G2| + b`.
    pub fn direct_product(&self, other: &FiniteGroup) -> Result<FiniteGroup> {
        let (n1, n2) = (self.order, other.order);
        let table = (0..n1 * n2)
            .map(|x| {
                let (a1, b1) = (x / n2, x % n2);
                (0..n1 * n2)
                    .map(|y| {
                        let (a2, b2) = (y / n2, y % n2);
                        self.mult[a1][a2] * n2 + other.mult[b1][b2]
                    })
                    .collect()
            })
            .collect();
        FiniteGroup::from_table(table)
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub const fn identity(&self) -> Elem {
        0
    }

    #[inline]
    pub fn mul(&self, a: Elem, b: Elem) -> Elem {
        self.mult[a][b]
    }

    #[inline]
    pub fn inv(&self, a: Elem) -> Elem {
        self.inv[a]
    }

    pub fn elements(&self) -> std::ops::Range<Elem> {
        0..self.order
    }

    pub fn table(&self) -> &[Vec<Elem>] {
        &self.mult
    }

    /// The order of a single element.
    pub fn elem_order(&self, a: Elem) -> usize {
        let mut x = a;
        let mut k = 1;
        while x != 0 {
            x = self.mul(x, a);
            k += 1;
        }
        k
    }

    /// Some generator if the group is cyclic, preferring the smallest index.
    pub fn cyclic_generator(&self) -> Option<Elem> {
        self.elements().find(|&a| self.elem_order(a) == self.order)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cyclic_groups_match_modular_addition() {
        let z2 = FiniteGroup::make_cyclic(2).unwrap();
        assert_eq!(z2.table(), &[vec![0, 1], vec![1, 0]]);
        assert_eq!((0..2).map(|a| z2.inv(a)).collect::<Vec<_>>(), vec![0, 1]);

        let z1 = FiniteGroup::make_cyclic(1).unwrap();
        assert_eq!(z1.mul(0, 0), 0);

        let z4 = FiniteGroup::make_cyclic(4).unwrap();
        assert_eq!(z4.mul(3, 2), 1);
        assert_eq!(z4.inv(3), 1);
        assert!(FiniteGroup::make_cyclic(0).is_err());
    }

    #[test]
    fn builders_produce_valid_tables() {
        for n in 1..=8 {
            let g = FiniteGroup::make_cyclic(n).unwrap();
            assert!(validate_table(g.table()).is_empty(), "Z_{n} must validate");
        }
        let z5 = FiniteGroup::make_cyclic(5).unwrap();
        assert!(validate_table(z5.table()).is_empty());
    }

    #[test]
    fn direct_product_componentwise() {
        let z2 = FiniteGroup::make_cyclic(2).unwrap();
        let v4 = z2.direct_product(&z2).unwrap();
        assert_eq!(v4.order(), 4);
        // element 3 = (1,1); (1,1)·(1,1) = (0,0)
        assert_eq!(v4.mul(3, 3), 0);
        assert!(validate_table(v4.table()).is_empty());

        let z1 = FiniteGroup::make_cyclic(1).unwrap();
        let z3 = FiniteGroup::make_cyclic(3).unwrap();
        let same = z1.direct_product(&z3).unwrap();
        assert_eq!(same.table(), z3.table(), "Z1×G is a copy of G");

        let z6 = z2.direct_product(&z3).unwrap();
        assert_eq!(z6.order(), 6);
        // (1,1)·(1,2) = (0,0): (1,1) = 1·3+1 = 4, (1,2) = 5, product must be 0.
        assert_eq!(z6.mul(4, 5), 0);
    }

    #[test]
    fn projections_of_product_are_homomorphisms() {
        let z3 = FiniteGroup::make_cyclic(3).unwrap();
        let z4 = FiniteGroup::make_cyclic(4).unwrap();
        let g = z3.direct_product(&z4).unwrap();
        assert_eq!(g.order(), 12);
        for x in g.elements() {
            for y in g.elements() {
                let p = g.mul(x, y);
                assert_eq!(p / 4, z3.mul(x / 4, y / 4), "first projection at ({x},{y})");
                assert_eq!(p % 4, z4.mul(x % 4, y % 4), "second projection at ({x},{y})");
            }
        }
    }

    #[test]
    fn violations_carry_witnesses() {
        // Z2 table corrupted so 1 has no inverse and 1·1 ≠ what identity needs.
        let bad = vec![vec![0, 1], vec![1, 1]];
        let report = validate_table(&bad);
        assert!(
            report.iter().any(|v| matches!(v, GroupViolation::Inverse { a: 1 })),
            "expected inverse violation at a=1, got {report:?}"
        );
        assert!(FiniteGroup::from_table(bad).is_err());

        // A relabeled Z3: 0 identity, 1·1 = 2, 1·2 = 2·1 = 0, 2·2 = 1.
        let z3_relabeled = vec![vec![0, 1, 2], vec![1, 2, 0], vec![2, 0, 1]];
        assert!(validate_table(&z3_relabeled).is_empty());
    }

    #[test]
    fn order_cap_enforced() {
        let z4 = FiniteGroup::make_cyclic(4).unwrap();
        assert!(matches!(
            z4.direct_product(&z4),
            Err(Error::OrderCap { order: 16, cap: 12 })
        ));
        let table = (0..16usize)
            .map(|a| (0..16).map(|b| (a + b) % 16).collect::<Vec<_>>())
            .collect::<Vec<_>>();
        assert!(FiniteGroup::from_table_with_cap(table, 16).is_ok());
    }

    #[test]
    fn cyclic_generator_detection() {
        assert_eq!(FiniteGroup::make_cyclic(6).unwrap().cyclic_generator(), Some(1));
        let z2 = FiniteGroup::make_cyclic(2).unwrap();
        let v4 = z2.direct_product(&z2).unwrap();
        assert_eq!(v4.cyclic_generator(), None, "Klein four-group is not cyclic");
    }
}
