//! Deciding cohomology-class equality of 3-cocycles by integer linear algebra.
//!
//! Two cocycles ω₁, ω₂ are in the same class iff ν = ω₁/ω₂ is a coboundary,
//! i.e. iff the linear system
//!
//! ```text
//! x(h,k) + x(g,hk) − x(gh,k) − x(g,h) ≡ b(g,h,k)   (mod M)
//! ```
//!
//! has a solution, where x are the (integer) exponent numerators of μ, b those
//! of ν, and all exponents are written over M = m·|G| with m the common
//! denominator of ν. The modulus m·|G| loses nothing: H³ of a finite group is
//! |G|-torsion, and any U(1) witness for a denominator-m ratio can be regauged
//! (by a 1-cochain built from |G|-th roots of its row products) to one whose
//! order divides m·|G|.
//!
//! The system is solved by diagonalizing the coefficient matrix with
//! unimodular row/column operations (Smith-style elimination over
//! arbitrary-precision integers, smallest-pivot selection), applying the row
//! operations to b, and checking per-diagonal gcd solvability mod M.

use num::bigint::BigInt;
use num::Integer;
use num::{One, Signed, Zero};

use crate::cocycle::{coboundary, Cochain2, Cochain3};
use crate::error::{Error, Result};
use crate::group::FiniteGroup;

/// Sparse row: accumulated integer coefficients over the |G|² unknowns.
fn system_row(group: &FiniteGroup, g: usize, h: usize, k: usize) -> Vec<i64> {
    let n = group.order();
    let mut row = vec![0i64; n * n];
    let hk = group.mul(h, k);
    let gh = group.mul(g, h);
    row[h * n + k] += 1;
    row[g * n + hk] += 1;
    row[gh * n + k] -= 1;
    row[g * n + h] -= 1;
    row
}

/// Result of diagonalization: `diag` entries d₀..d_{r−1} (nonzero), the
/// transformed right-hand side Ub, and the column transform V with x = V·y.
struct Diagonalized {
    diag: Vec<BigInt>,
    ub: Vec<BigInt>,
    v: Vec<Vec<BigInt>>,
    rows: usize,
    cols: usize,
}

fn diagonalize(mut a: Vec<Vec<BigInt>>, mut b: Vec<BigInt>) -> Diagonalized {
    let rows = a.len();
    let cols = if rows == 0 { 0 } else { a[0].len() };
    let mut v: Vec<Vec<BigInt>> = (0..cols)
        .map(|i| (0..cols).map(|j| if i == j { BigInt::one() } else { BigInt::zero() }).collect())
        .collect();

    let steps = rows.min(cols);
    let mut t = 0;
    while t < steps {
        // Smallest nonzero pivot in the trailing submatrix keeps entry growth tame.
        let mut pivot: Option<(usize, usize)> = None;
        for i in t..rows {
            for j in t..cols {
                if !a[i][j].is_zero()
                    && pivot
                        .map(|(pi, pj)| a[i][j].abs() < a[pi][pj].abs())
                        .unwrap_or(true)
                {
                    pivot = Some((i, j));
                }
            }
        }
        let Some((pi, pj)) = pivot else { break };
        a.swap(t, pi);
        b.swap(t, pi);
        if pj != t {
            for row in a.iter_mut() {
                row.swap(t, pj);
            }
            for row in v.iter_mut() {
                row.swap(t, pj);
            }
        }

        loop {
            // Clear column t below the pivot.
            let mut dirty = false;
            for i in t + 1..rows {
                if a[i][t].is_zero() {
                    continue;
                }
                let q = &a[i][t] / &a[t][t];
                if !q.is_zero() {
                    for j in t..cols {
                        let d = &q * &a[t][j];
                        a[i][j] -= d;
                    }
                    let d = &q * &b[t];
                    b[i] -= d;
                }
                if !a[i][t].is_zero() {
                    // Remainder survives: it is smaller than the pivot; promote it.
                    a.swap(t, i);
                    b.swap(t, i);
                    dirty = true;
                }
            }
            if dirty {
                continue;
            }
            // Clear row t to the right of the pivot.
            for j in t + 1..cols {
                if a[t][j].is_zero() {
                    continue;
                }
                let q = &a[t][j] / &a[t][t];
                if !q.is_zero() {
                    for i in t..rows {
                        let d = &q * &a[i][t];
                        a[i][j] -= d;
                    }
                    for i in 0..cols {
                        let d = &q * &v[i][t];
                        v[i][j] -= d;
                    }
                }
                if !a[t][j].is_zero() {
                    // Remainder survives in the row: swap columns and restart.
                    for row in a.iter_mut() {
                        row.swap(t, j);
                    }
                    for row in v.iter_mut() {
                        row.swap(t, j);
                    }
                    dirty = true;
                    break;
                }
            }
            if !dirty {
                break;
            }
        }
        t += 1;
    }

    let diag: Vec<BigInt> = (0..steps)
        .map(|i| a[i][i].clone())
        .take_while(|d| !d.is_zero())
        .collect();
    Diagonalized { diag, ub: b, v, rows, cols }
}

fn mod_floor_i64(x: &BigInt, m: i64) -> i64 {
    let mm = BigInt::from(m);
    let r = x.mod_floor(&mm);
    // r ∈ [0, m): fits in i64.
    let (_, digits) = r.to_u64_digits();
    digits.first().map(|&d| d as i64).unwrap_or(0)
}

/// Solves A·x ≡ b (mod m) for x ∈ (ℤ/m)^cols. Returns exponent numerators in [0, m).
fn solve_mod(a: Vec<Vec<BigInt>>, b: Vec<BigInt>, m: i64) -> Option<Vec<i64>> {
    let d = diagonalize(a, b);
    let rank = d.diag.len();
    let modulus = BigInt::from(m);
    let mut y = vec![BigInt::zero(); d.cols];
    for i in 0..d.rows {
        let rhs = d.ub[i].mod_floor(&modulus);
        if i < rank {
            let di = d.diag[i].mod_floor(&modulus);
            // Solve di·y ≡ rhs (mod m).
            let g = di.gcd(&modulus);
            if !(&rhs % &g).is_zero() {
                return None;
            }
            if g == modulus {
                // di ≡ 0 (mod m): any y works, take 0.
                continue;
            }
            let m_red = &modulus / &g;
            let di_red = &di / &g;
            let rhs_red = &rhs / &g;
            let egcd = di_red.extended_gcd(&m_red);
            debug_assert!(egcd.gcd.is_one());
            let inv = egcd.x.mod_floor(&m_red);
            y[i] = (rhs_red * inv).mod_floor(&m_red);
        } else if !rhs.is_zero() {
            return None;
        }
    }
    // x = V·y mod m.
    let x: Vec<i64> = (0..d.cols)
        .map(|i| {
            let mut acc = BigInt::zero();
            for (j, yj) in y.iter().enumerate() {
                if !yj.is_zero() && !d.v[i][j].is_zero() {
                    acc += &d.v[i][j] * yj;
                }
            }
            mod_floor_i64(&acc, m)
        })
        .collect();
    Some(x)
}

/// Decides whether ω₁ and ω₂ represent the same class in H³(G,U(1)).
/// Returns a witness μ with dμ = ω₁/ω₂ when they do, `None` when the classes
/// are definitively distinct.
pub fn same_class(w1: &Cochain3, w2: &Cochain3) -> Result<Option<Cochain2>> {
    if w1.group() != w2.group() {
        return Err(Error::GroupMismatch);
    }
    w1.require_cocycle()?;
    w2.require_cocycle()?;
    let group = w1.group().clone();
    let n = group.order();
    let ratio = w1.ratio(w2)?;
    let m = ratio.common_denominator() * n as i64;
    let targets = ratio.exponents_over(m)?;

    let mut rows = Vec::with_capacity(n * n * n);
    let mut rhs = Vec::with_capacity(n * n * n);
    for g in 0..n {
        for h in 0..n {
            for k in 0..n {
                rows.push(
                    system_row(&group, g, h, k)
                        .into_iter()
                        .map(BigInt::from)
                        .collect::<Vec<_>>(),
                );
                rhs.push(BigInt::from(targets[(g * n + h) * n + k]));
            }
        }
    }

    let Some(x) = solve_mod(rows, rhs, m) else {
        return Ok(None);
    };
    let mu = Cochain2::from_exponents(&group, m, &x)?;
    // The witness must reproduce the ratio exactly; anything else is a bug.
    if coboundary(&mu) != ratio {
        return Err(Error::Internal(
            "solver produced a witness whose coboundary is not the ratio".into(),
        ));
    }
    Ok(Some(mu))
}

/// Gauges ω into a normalized cocycle ω′ = ω·dμ (trivial whenever any argument
/// is the identity) and returns (ω′, μ). Solvable for every cocycle; failure
/// is reported as an internal inconsistency.
pub fn normalize(w: &Cochain3) -> Result<(Cochain3, Cochain2)> {
    w.require_cocycle()?;
    let group = w.group().clone();
    if w.is_normalized() {
        return Ok((w.clone(), Cochain2::trivial(&group)));
    }
    let n = group.order();
    let m = w.common_denominator() * n as i64;
    let target = w.inv();
    let exps = target.exponents_over(m)?;

    // Constrained subsystem: only the identity-argument triples.
    let mut rows = Vec::new();
    let mut rhs = Vec::new();
    for g in 0..n {
        for h in 0..n {
            for k in 0..n {
                if g == 0 || h == 0 || k == 0 {
                    rows.push(
                        system_row(&group, g, h, k)
                            .into_iter()
                            .map(BigInt::from)
                            .collect::<Vec<_>>(),
                    );
                    rhs.push(BigInt::from(exps[(g * n + h) * n + k]));
                }
            }
        }
    }
    let x = solve_mod(rows, rhs, m).ok_or_else(|| {
        Error::Internal("normalization system unsolvable for a valid cocycle".into())
    })?;
    let mu = Cochain2::from_exponents(&group, m, &x)?;
    let normalized = w.mul(&coboundary(&mu))?;
    normalized.require_normalized().map_err(|_| {
        Error::Internal("normalization witness failed the post-check scan".into())
    })?;
    normalized.require_cocycle()?;
    Ok((normalized, mu))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::phase::Phase;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    #[test]
    fn witness_found_for_constructed_coboundary() {
        let mut rng = StdRng::seed_from_u64(23);
        for n in [2usize, 3, 4] {
            let group = FiniteGroup::make_cyclic(n).unwrap();
            for p in 0..n {
                let w = Cochain3::standard_cyclic(n, p).unwrap();
                let mu = Cochain2::random(&group, 2 * n as i64, &mut rng);
                let shifted = w.mul(&coboundary(&mu)).unwrap();
                let witness = same_class(&shifted, &w).unwrap();
                let witness = witness.expect("shifted cocycle is in the same class");
                assert_eq!(
                    coboundary(&witness),
                    shifted.ratio(&w).unwrap(),
                    "witness reproduces the ratio (not necessarily μ itself)"
                );
            }
        }
    }

    #[test]
    fn distinct_standard_classes_are_separated() {
        let w1 = Cochain3::standard_cyclic(2, 1).unwrap();
        let triv = Cochain3::trivial(w1.group());
        assert!(same_class(&w1, &triv).unwrap().is_none(), "Z₂ level 1 vs trivial");

        let a = Cochain3::standard_cyclic(3, 1).unwrap();
        let b = Cochain3::standard_cyclic(3, 2).unwrap();
        assert!(same_class(&a, &b).unwrap().is_none(), "Z₃ level 1 vs level 2");

        for n in [2usize, 3, 4] {
            for p in 0..n {
                for q in 0..n {
                    let wp = Cochain3::standard_cyclic(n, p).unwrap();
                    let wq = Cochain3::standard_cyclic(n, q).unwrap();
                    let verdict = same_class(&wp, &wq).unwrap();
                    assert_eq!(verdict.is_some(), p == q, "Z_{n}: levels {p} vs {q}");
                }
            }
        }
    }

    #[test]
    fn equivalence_relation_on_perturbed_corpus() {
        let mut rng = StdRng::seed_from_u64(31);
        let group = FiniteGroup::make_cyclic(3).unwrap();
        let base = Cochain3::standard_cyclic(3, 1).unwrap();
        let a = base.mul(&coboundary(&Cochain2::random(&group, 6, &mut rng))).unwrap();
        let b = base.mul(&coboundary(&Cochain2::random(&group, 6, &mut rng))).unwrap();
        let c = base.mul(&coboundary(&Cochain2::random(&group, 6, &mut rng))).unwrap();

        // Reflexive: trivial witness exists.
        assert!(same_class(&a, &a).unwrap().is_some());
        // Symmetric: inverted witness works.
        let ab = same_class(&a, &b).unwrap().unwrap();
        let ba = same_class(&b, &a).unwrap().unwrap();
        assert_eq!(coboundary(&ab.inv()), coboundary(&ba));
        // Transitive: product witness works.
        let bc = same_class(&b, &c).unwrap().unwrap();
        let ac = same_class(&a, &c).unwrap().unwrap();
        assert_eq!(coboundary(&ab.mul(&bc).unwrap()), coboundary(&ac));
    }

    #[test]
    fn normalize_fixes_identity_arguments() {
        let mut rng = StdRng::seed_from_u64(47);
        for n in [2usize, 3] {
            let group = FiniteGroup::make_cyclic(n).unwrap();
            let base = Cochain3::standard_cyclic(n, 1).unwrap();
            // Perturb by a coboundary whose μ is nontrivial at identity arguments.
            let mut mu = Cochain2::random(&group, 2 * n as i64, &mut rng);
            mu.set(0, 1, Phase::new(1, 2 * n as i64).unwrap());
            let messy = base.mul(&coboundary(&mu)).unwrap();
            assert!(!messy.is_normalized(), "perturbation must denormalize");
            let (fixed, witness) = normalize(&messy).unwrap();
            assert!(fixed.is_normalized());
            assert!(fixed.check_cocycle().is_ok());
            assert_eq!(fixed, messy.mul(&coboundary(&witness)).unwrap());
            // Class unchanged.
            assert!(same_class(&fixed, &base).unwrap().is_some());
        }
    }

    #[test]
    fn normalize_is_identity_on_normalized_input() {
        let w = Cochain3::standard_cyclic(4, 3).unwrap();
        let (fixed, witness) = normalize(&w).unwrap();
        assert_eq!(fixed, w);
        assert!(coboundary(&witness).values().iter().all(|p| p.is_one()));
    }

    #[test]
    fn brute_force_agreement_z2() {
        // Oracle: exhaustive search over all 256 2-cochains with exponents in
        // (1/4)ℤ on Z₂. Both routes must agree on every seeded instance.
        let group = FiniteGroup::make_cyclic(2).unwrap();
        let mut rng = StdRng::seed_from_u64(2024);
        let brute = |ratio: &Cochain3| -> bool {
            for code in 0..256u32 {
                let exps: Vec<i64> =
                    (0..4).map(|i| ((code >> (2 * i)) & 3) as i64).collect();
                let mu = Cochain2::from_exponents(&group, 4, &exps).unwrap();
                if &coboundary(&mu) == ratio {
                    return true;
                }
            }
            false
        };
        for trial in 0..20 {
            let p1 = (rng.gen_range(0..2usize), rng.gen_range(0..2usize));
            let w1 = Cochain3::standard_cyclic(2, p1.0)
                .unwrap()
                .mul(&coboundary(&Cochain2::random(&group, 2, &mut rng)))
                .unwrap();
            let w2 = Cochain3::standard_cyclic(2, p1.1)
                .unwrap()
                .mul(&coboundary(&Cochain2::random(&group, 2, &mut rng)))
                .unwrap();
            let solver = same_class(&w1, &w2).unwrap().is_some();
            let oracle = brute(&w1.ratio(&w2).unwrap());
            assert_eq!(solver, oracle, "trial {trial}: solver vs brute force");
            assert_eq!(solver, p1.0 == p1.1, "trial {trial}: against ground truth");
        }
    }
}
