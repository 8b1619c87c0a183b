//! Exact U(1)-valued 2- and 3-cochains on a finite group.
//!
//! A 3-cochain ω: G³ → U(1) is a 3-cocycle when
//!
//! ```text
//! ω(g,h,k)·ω(g,hk,l)·ω(h,k,l) = ω(gh,k,l)·ω(g,h,kl)   for all g,h,k,l,
//! ```
//!
//! and the coboundary of a 2-cochain μ is
//!
//! ```text
//! (dμ)(g,h,k) = μ(h,k)·μ(g,hk)·μ(gh,k)⁻¹·μ(g,h)⁻¹.
//! ```
//!
//! Classes of cocycles modulo coboundaries form H³(G, U(1)); for cyclic groups
//! the class of ω is read off by the gauge-invariant product
//! ∏_j ω(g, gʲ, g) over a generator g. All arithmetic is exact ([`Phase`]).

use crate::error::{Error, Result};
use crate::group::{Elem, FiniteGroup};
use crate::phase::Phase;

use rand::Rng;

/// A function G³ → U(1), stored as a flat table in lexicographic (g,h,k) order.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Cochain3 {
    group: FiniteGroup,
    table: Vec<Phase>,
}

/// A function G² → U(1), stored in lexicographic (g,h) order.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Cochain2 {
    group: FiniteGroup,
    table: Vec<Phase>,
}

/// A failed cocycle check: the first violating quadruple and its residual,
/// i.e. the ratio of the two sides of the identity.
#[derive(Clone, Debug)]
pub struct CocycleViolation {
    pub quad: (Elem, Elem, Elem, Elem),
    pub residual: Phase,
}

impl Cochain3 {
    pub fn trivial(group: &FiniteGroup) -> Cochain3 {
        let n = group.order();
        Cochain3 { group: group.clone(), table: vec![Phase::ONE; n * n * n] }
    }

    pub fn from_fn(group: &FiniteGroup, mut f: impl FnMut(Elem, Elem, Elem) -> Phase) -> Cochain3 {
        let n = group.order();
        let mut table = Vec::with_capacity(n * n * n);
        for g in 0..n {
            for h in 0..n {
                for k in 0..n {
                    table.push(f(g, h, k));
                }
            }
        }
        Cochain3 { group: group.clone(), table }
    }

    /// Rebuilds a cochain from the flat exponent table of a report or file.
    pub fn from_exponents(group: &FiniteGroup, denominator: i64, exponents: &[i64]) -> Result<Cochain3> {
        let n = group.order();
        if exponents.len() != n * n * n {
            return Err(Error::TableSize { got: exponents.len(), expected: n * n * n });
        }
        let table = exponents
            .iter()
            .map(|&e| Phase::new(e, denominator))
            .collect::<Result<Vec<_>>>()?;
        Ok(Cochain3 { group: group.clone(), table })
    }

    /// The standard representative of class p in H³(Z_n, U(1)):
    /// ω_p(a,b,c) = exp(2πi·p·a·(b+c−((b+c) mod n))/n²).
    pub fn standard_cyclic(n: usize, p: usize) -> Result<Cochain3> {
        if p >= n {
            return Err(Error::LevelOutOfRange { level: p, order: n });
        }
        let group = FiniteGroup::make_cyclic(n)?;
        let ni = n as i64;
        Ok(Cochain3::from_fn(&group, |a, b, c| {
            let carry = ((b + c) - ((b + c) % n)) as i64; // n·⌊(b+c)/n⌋
            Phase::from_rational(num::rational::Rational64::new(
                p as i64 * a as i64 * carry,
                ni * ni,
            ))
        }))
    }

    pub fn group(&self) -> &FiniteGroup {
        &self.group
    }

    #[inline]
    fn idx(&self, g: Elem, h: Elem, k: Elem) -> usize {
        let n = self.group.order();
        (g * n + h) * n + k
    }

    #[inline]
    pub fn get(&self, g: Elem, h: Elem, k: Elem) -> Phase {
        self.table[self.idx(g, h, k)]
    }

    pub fn set(&mut self, g: Elem, h: Elem, k: Elem, value: Phase) {
        let i = self.idx(g, h, k);
        self.table[i] = value;
    }

    pub fn values(&self) -> &[Phase] {
        &self.table
    }

    /// Exhaustive check of the cocycle identity over all |G|⁴ quadruples.
    pub fn check_cocycle(&self) -> std::result::Result<(), CocycleViolation> {
        let n = self.group.order();
        for g in 0..n {
            for h in 0..n {
                let gh = self.group.mul(g, h);
                for k in 0..n {
                    let hk = self.group.mul(h, k);
                    for l in 0..n {
                        let kl = self.group.mul(k, l);
                        let lhs = self.get(g, h, k) * self.get(g, hk, l) * self.get(h, k, l);
                        let rhs = self.get(gh, k, l) * self.get(g, h, kl);
                        if lhs != rhs {
                            return Err(CocycleViolation {
                                quad: (g, h, k, l),
                                residual: lhs / rhs,
                            });
                        }
                    }
                }
            }
        }
        Ok(())
    }

    /// Returns the violation as an [`Error`] for pipeline plumbing.
    pub fn require_cocycle(&self) -> Result<()> {
        self.check_cocycle().map_err(|v| Error::NotCocycle {
            g: v.quad.0,
            h: v.quad.1,
            k: v.quad.2,
            l: v.quad.3,
            residual: format!("{}", v.residual),
        })
    }

    /// True iff ω(g,h,k) = 1 whenever any argument is the identity.
    pub fn is_normalized(&self) -> bool {
        let n = self.group.order();
        for a in 0..n {
            for b in 0..n {
                if !self.get(0, a, b).is_one()
                    || !self.get(a, 0, b).is_one()
                    || !self.get(a, b, 0).is_one()
                {
                    return false;
                }
            }
        }
        true
    }

    pub fn require_normalized(&self) -> Result<()> {
        if self.is_normalized() {
            Ok(())
        } else {
            let n = self.group.order();
            for g in 0..n {
                for h in 0..n {
                    for k in 0..n {
                        if (g == 0 || h == 0 || k == 0) && !self.get(g, h, k).is_one() {
                            return Err(Error::NotNormalized(format!("({g},{h},{k})")));
                        }
                    }
                }
            }
            unreachable!("is_normalized and the scan disagree")
        }
    }

    /// Entrywise product.
    pub fn mul(&self, other: &Cochain3) -> Result<Cochain3> {
        if self.group != other.group {
            return Err(Error::GroupMismatch);
        }
        let table = self
            .table
            .iter()
            .zip(&other.table)
            .map(|(&a, &b)| a * b)
            .collect();
        Ok(Cochain3 { group: self.group.clone(), table })
    }

    /// Entrywise inverse.
    pub fn inv(&self) -> Cochain3 {
        Cochain3 {
            group: self.group.clone(),
            table: self.table.iter().map(|p| p.inv()).collect(),
        }
    }

    /// Entrywise ratio self/other.
    pub fn ratio(&self, other: &Cochain3) -> Result<Cochain3> {
        self.mul(&other.inv())
    }

    /// Least common denominator of all entries' exponents.
    pub fn common_denominator(&self) -> i64 {
        self.table
            .iter()
            .fold(1i64, |acc, p| num::integer::lcm(acc, p.denom()))
    }

    /// All entries as numerators over a common denominator (lexicographic order).
    pub fn exponents_over(&self, den: i64) -> Result<Vec<i64>> {
        self.table.iter().map(|p| p.numer_over(den)).collect()
    }
}

impl Cochain2 {
    pub fn trivial(group: &FiniteGroup) -> Cochain2 {
        let n = group.order();
        Cochain2 { group: group.clone(), table: vec![Phase::ONE; n * n] }
    }

    pub fn from_fn(group: &FiniteGroup, mut f: impl FnMut(Elem, Elem) -> Phase) -> Cochain2 {
        let n = group.order();
        let mut table = Vec::with_capacity(n * n);
        for g in 0..n {
            for h in 0..n {
                table.push(f(g, h));
            }
        }
        Cochain2 { group: group.clone(), table }
    }

    pub fn from_exponents(group: &FiniteGroup, denominator: i64, exponents: &[i64]) -> Result<Cochain2> {
        let n = group.order();
        if exponents.len() != n * n {
            return Err(Error::TableSize { got: exponents.len(), expected: n * n });
        }
        let table = exponents
            .iter()
            .map(|&e| Phase::new(e, denominator))
            .collect::<Result<Vec<_>>>()?;
        Ok(Cochain2 { group: group.clone(), table })
    }

    /// A seeded random 2-cochain with exponents in (1/denominator)·ℤ.
    pub fn random(group: &FiniteGroup, denominator: i64, rng: &mut impl Rng) -> Cochain2 {
        Cochain2::from_fn(group, |_, _| {
            Phase::new(rng.gen_range(0..denominator), denominator).expect("den > 0")
        })
    }

    /// A seeded random 2-cochain that is 1 whenever an argument is the
    /// identity, so its coboundary stays normalized.
    pub fn random_normalized(group: &FiniteGroup, denominator: i64, rng: &mut impl Rng) -> Cochain2 {
        Cochain2::from_fn(group, |g, h| {
            if g == 0 || h == 0 {
                Phase::ONE
            } else {
                Phase::new(rng.gen_range(0..denominator), denominator).expect("den > 0")
            }
        })
    }

    pub fn group(&self) -> &FiniteGroup {
        &self.group
    }

    #[inline]
    pub fn get(&self, g: Elem, h: Elem) -> Phase {
        self.table[g * self.group.order() + h]
    }

    pub fn set(&mut self, g: Elem, h: Elem, value: Phase) {
        let i = g * self.group.order() + h;
        self.table[i] = value;
    }

    pub fn values(&self) -> &[Phase] {
        &self.table
    }

    pub fn inv(&self) -> Cochain2 {
        Cochain2 {
            group: self.group.clone(),
            table: self.table.iter().map(|p| p.inv()).collect(),
        }
    }

    pub fn mul(&self, other: &Cochain2) -> Result<Cochain2> {
        if self.group != other.group {
            return Err(Error::GroupMismatch);
        }
        let table = self
            .table
            .iter()
            .zip(&other.table)
            .map(|(&a, &b)| a * b)
            .collect();
        Ok(Cochain2 { group: self.group.clone(), table })
    }

    pub fn common_denominator(&self) -> i64 {
        self.table
            .iter()
            .fold(1i64, |acc, p| num::integer::lcm(acc, p.denom()))
    }

    pub fn exponents_over(&self, den: i64) -> Result<Vec<i64>> {
        self.table.iter().map(|p| p.numer_over(den)).collect()
    }
}

/// The coboundary (dμ)(g,h,k) = μ(h,k)·μ(g,hk)·μ(gh,k)⁻¹·μ(g,h)⁻¹.
pub fn coboundary(mu: &Cochain2) -> Cochain3 {
    let group = mu.group().clone();
    Cochain3::from_fn(&group, |g, h, k| {
        let hk = group.mul(h, k);
        let gh = group.mul(g, h);
        mu.get(h, k) * mu.get(g, hk) * mu.get(gh, k).inv() * mu.get(g, h).inv()
    })
}

/// Reads the cyclic-class level p from the gauge-invariant product
/// exp(2πi·p/n) = ∏_{j=0}^{n−1} ω(g, gʲ, g) over the given generator g.
pub fn identify_cyclic_level(omega: &Cochain3, generator: Elem) -> Result<usize> {
    let group = omega.group();
    let n = group.order();
    if group.elem_order(generator) != n {
        return Err(Error::Unsupported(format!(
            "element {generator} does not generate a group of order {n}"
        )));
    }
    let mut product = Phase::ONE;
    let mut power = group.identity();
    for _ in 0..n {
        product *= omega.get(generator, power, generator);
        power = group.mul(power, generator);
    }
    // product must be an n-th root of unity exp(2πi·p/n)
    let num = product.numer_over(n as i64).map_err(|_| {
        Error::Unsupported(format!(
            "invariant product {product} is not an order-{n} root of unity"
        ))
    })?;
    Ok(num as usize)
}
