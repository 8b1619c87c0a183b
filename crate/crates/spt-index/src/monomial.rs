//! Exact algebra of monomial (generalized-permutation) operators on a chain
//! of group-valued registers.
//!
//! A register chain carries one group label per register; an operator is an
//! ordered product of local factors, each either a right-multiplication shift
//! on one register, a phase diagonal on one register, or a phase diagonal on
//! an adjacent register pair. Every operator maps each basis configuration to
//! exactly one configuration with an exact [`Phase`], so unitarity is
//! structural and all identities can be checked by exhaustive application.
//!
//! Conventions (fixed throughout):
//! - `apply(U, c)` implements ⟨c|U = phase·⟨c′| (bra action; a shift by g maps
//!   the label l to l·g).
//! - `compose(A, B)` threads a configuration through A first, then B.
//! - `conjugate(A, B)` is the transport B∘A∘B⁻¹ in threading order B, A, B⁻¹;
//!   a register diagonal f(l) conjugated by a shift-by-g becomes f(l·g).
//! - `inverse` reverses the factor list and inverts each factor; the reversal
//!   re-threads every diagonal through the intervening shifts, so no table
//!   reindexing is needed.
//!
//! Chains may consist of several identical blocks (used when stacking two
//! systems); local factors never straddle a block boundary and the cut index
//! refers to the same position within every block.

use std::collections::BTreeSet;

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use crate::error::{Error, Result};
use crate::group::{Elem, FiniteGroup};
use crate::phase::Phase;

/// Exhaustive scans are allowed up to this many configurations.
pub const EXHAUSTIVE_BUDGET: u128 = 1 << 24;

/// Sample count for scans beyond the exhaustive budget.
pub const SAMPLE_COUNT: usize = 100_000;

/// A chain of group-valued registers: `blocks` copies of a block of
/// `length()+1` registers, with a distinguished cut position inside each block.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct RegisterChain {
    group: FiniteGroup,
    block_len: usize,
    blocks: usize,
    cut: usize,
}

impl RegisterChain {
    /// A single block of `length+1` registers with cut position `cut`.
    pub fn new(group: &FiniteGroup, length: usize, cut: usize) -> Result<RegisterChain> {
        if length < 1 {
            return Err(Error::ChainGeometry(format!("length {length} < 1")));
        }
        if cut > length {
            return Err(Error::ChainGeometry(format!("cut {cut} > length {length}")));
        }
        Ok(RegisterChain { group: group.clone(), block_len: length + 1, blocks: 1, cut })
    }

    pub fn group(&self) -> &FiniteGroup {
        &self.group
    }

    /// Number of links per block (registers per block minus one).
    pub fn length(&self) -> usize {
        self.block_len - 1
    }

    pub fn cut(&self) -> usize {
        self.cut
    }

    pub fn blocks(&self) -> usize {
        self.blocks
    }

    pub fn block_len(&self) -> usize {
        self.block_len
    }

    pub fn register_count(&self) -> usize {
        self.block_len * self.blocks
    }

    /// Position of a register within its block.
    pub fn position(&self, reg: usize) -> usize {
        reg % self.block_len
    }

    /// Concatenation for stacking: same group, same block geometry.
    pub fn tensor(&self, other: &RegisterChain) -> Result<RegisterChain> {
        if self.group != other.group {
            return Err(Error::GroupMismatch);
        }
        if self.block_len != other.block_len || self.cut != other.cut {
            return Err(Error::ChainGeometry(
                "stacked chains must share block length and cut".into(),
            ));
        }
        Ok(RegisterChain {
            group: self.group.clone(),
            block_len: self.block_len,
            blocks: self.blocks + other.blocks,
            cut: self.cut,
        })
    }

    pub fn config_count(&self) -> u128 {
        (self.group.order() as u128).pow(self.register_count() as u32)
    }
}

/// One local factor of a monomial operator.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum LocalFactor {
    /// ⟨l| → ⟨l·elem| on one register.
    Shift { reg: usize, elem: Elem },
    /// Phase table[l] read from one register.
    RegisterDiagonal { reg: usize, table: Vec<Phase> },
    /// Phase table[l·n + l′] read from registers (reg, reg+1) in one block.
    LinkDiagonal { reg: usize, table: Vec<Phase> },
}

impl LocalFactor {
    fn validate(&self, chain: &RegisterChain) -> Result<()> {
        let n = chain.group().order();
        let count = chain.register_count();
        let check_reg = |reg: usize| {
            if reg >= count {
                Err(Error::RegisterOutOfRange { reg, count })
            } else {
                Ok(())
            }
        };
        match self {
            LocalFactor::Shift { reg, elem } => {
                check_reg(*reg)?;
                if *elem >= n {
                    return Err(Error::Unsupported(format!("element {elem} out of range")));
                }
            }
            LocalFactor::RegisterDiagonal { reg, table } => {
                check_reg(*reg)?;
                if table.len() != n {
                    return Err(Error::TableSize { got: table.len(), expected: n });
                }
            }
            LocalFactor::LinkDiagonal { reg, table } => {
                check_reg(*reg + 1)?;
                if chain.position(*reg) + 1 >= chain.block_len {
                    return Err(Error::LinkAcrossBlocks(*reg));
                }
                if table.len() != n * n {
                    return Err(Error::TableSize { got: table.len(), expected: n * n });
                }
            }
        }
        Ok(())
    }

    fn inverted(&self, group: &FiniteGroup) -> LocalFactor {
        match self {
            LocalFactor::Shift { reg, elem } => {
                LocalFactor::Shift { reg: *reg, elem: group.inv(*elem) }
            }
            LocalFactor::RegisterDiagonal { reg, table } => LocalFactor::RegisterDiagonal {
                reg: *reg,
                table: table.iter().map(|p| p.inv()).collect(),
            },
            LocalFactor::LinkDiagonal { reg, table } => LocalFactor::LinkDiagonal {
                reg: *reg,
                table: table.iter().map(|p| p.inv()).collect(),
            },
        }
    }

    fn shifted_registers(&self, offset: usize) -> LocalFactor {
        match self {
            LocalFactor::Shift { reg, elem } => {
                LocalFactor::Shift { reg: reg + offset, elem: *elem }
            }
            LocalFactor::RegisterDiagonal { reg, table } => {
                LocalFactor::RegisterDiagonal { reg: reg + offset, table: table.clone() }
            }
            LocalFactor::LinkDiagonal { reg, table } => {
                LocalFactor::LinkDiagonal { reg: reg + offset, table: table.clone() }
            }
        }
    }
}

/// A unitary monomial operator: ordered local factors and a global phase.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct MonomialOp {
    chain: RegisterChain,
    global_phase: Phase,
    factors: Vec<LocalFactor>,
}

/// Operator kind as determined by scanning its action.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum OpKind {
    Scalar(Phase),
    Diagonal,
    General,
}

/// Whether a scan saw every configuration or a random sample.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum ScanStatus {
    Exhaustive,
    Sampled(usize),
}

/// Classification result: kind, minimal support, and scan coverage.
#[derive(Clone, Debug)]
pub struct Classification {
    pub kind: OpKind,
    pub support: BTreeSet<usize>,
    pub status: ScanStatus,
}

/// Register factorization of a diagonal operator: value(c) = scalar·∏ d_x(c_x).
#[derive(Clone, Debug)]
pub struct DiagonalFactors {
    pub per_register: Vec<Vec<Phase>>,
    pub scalar: Phase,
    pub status: ScanStatus,
}

impl DiagonalFactors {
    /// Registers whose factor is not identically 1.
    pub fn support(&self) -> BTreeSet<usize> {
        self.per_register
            .iter()
            .enumerate()
            .filter(|(_, t)| t.iter().any(|p| !p.is_one()))
            .map(|(r, _)| r)
            .collect()
    }
}

impl MonomialOp {
    pub fn identity(chain: &RegisterChain) -> MonomialOp {
        MonomialOp { chain: chain.clone(), global_phase: Phase::ONE, factors: Vec::new() }
    }

    pub fn scalar(chain: &RegisterChain, phase: Phase) -> MonomialOp {
        MonomialOp { chain: chain.clone(), global_phase: phase, factors: Vec::new() }
    }

    pub fn from_factors(
        chain: &RegisterChain,
        global_phase: Phase,
        factors: Vec<LocalFactor>,
    ) -> Result<MonomialOp> {
        for f in &factors {
            f.validate(chain)?;
        }
        Ok(MonomialOp { chain: chain.clone(), global_phase, factors })
    }

    pub fn chain(&self) -> &RegisterChain {
        &self.chain
    }

    pub fn global_phase(&self) -> Phase {
        self.global_phase
    }

    pub fn factors(&self) -> &[LocalFactor] {
        &self.factors
    }

    /// Threads a configuration through the factor list in place, returning the
    /// accumulated phase.
    pub fn thread(&self, labels: &mut [Elem]) -> Phase {
        debug_assert_eq!(labels.len(), self.chain.register_count());
        let group = &self.chain.group;
        let n = group.order();
        let mut phase = self.global_phase;
        for f in &self.factors {
            match f {
                LocalFactor::Shift { reg, elem } => {
                    labels[*reg] = group.mul(labels[*reg], *elem);
                }
                LocalFactor::RegisterDiagonal { reg, table } => {
                    phase *= table[labels[*reg]];
                }
                LocalFactor::LinkDiagonal { reg, table } => {
                    phase *= table[labels[*reg] * n + labels[*reg + 1]];
                }
            }
        }
        phase
    }

    /// ⟨c|U = phase·⟨c′|: returns (c′, phase).
    pub fn apply(&self, config: &[Elem]) -> Result<(Vec<Elem>, Phase)> {
        if config.len() != self.chain.register_count() {
            return Err(Error::ChainMismatch);
        }
        let mut labels = config.to_vec();
        let phase = self.thread(&mut labels);
        Ok((labels, phase))
    }

    /// Threads through `self` first, then `other`.
    pub fn compose(&self, other: &MonomialOp) -> Result<MonomialOp> {
        if self.chain != other.chain {
            return Err(Error::ChainMismatch);
        }
        let mut factors = Vec::with_capacity(self.factors.len() + other.factors.len());
        factors.extend_from_slice(&self.factors);
        factors.extend_from_slice(&other.factors);
        Ok(MonomialOp {
            chain: self.chain.clone(),
            global_phase: self.global_phase * other.global_phase,
            factors,
        })
    }

    /// Two-sided inverse: reversed factor list, each factor inverted.
    pub fn inverse(&self) -> MonomialOp {
        let group = &self.chain.group;
        MonomialOp {
            chain: self.chain.clone(),
            global_phase: self.global_phase.inv(),
            factors: self.factors.iter().rev().map(|f| f.inverted(group)).collect(),
        }
    }

    /// Transport of `self` by `by`: threading order `by`, `self`, `by`⁻¹.
    pub fn conjugate(&self, by: &MonomialOp) -> Result<MonomialOp> {
        by.compose(self)?.compose(&by.inverse())
    }

    /// Block-concatenation: acts as `self` on the first blocks, `other` on the
    /// rest; global phases multiply.
    pub fn tensor(&self, other: &MonomialOp) -> Result<MonomialOp> {
        let chain = self.chain.tensor(&other.chain)?;
        let offset = self.chain.register_count();
        let mut factors = self.factors.clone();
        factors.extend(other.factors.iter().map(|f| f.shifted_registers(offset)));
        Ok(MonomialOp { chain, global_phase: self.global_phase * other.global_phase, factors })
    }

    /// Multiplies the global phase; scalars are central so position is moot.
    pub fn with_extra_phase(&self, phase: Phase) -> MonomialOp {
        MonomialOp {
            chain: self.chain.clone(),
            global_phase: self.global_phase * phase,
            factors: self.factors.clone(),
        }
    }

    /// Splits a shift-free-in-total operator at block position `p` by the
    /// anchor of each phase read: reads anchored at positions ≥ p form the
    /// right part, the rest plus the global phase form the left part. Every
    /// read is re-threaded through the shifts preceding it, so both parts are
    /// pure diagonals in the initial labels and compose back to the operator
    /// exactly — including the constant parts of each read, which a black-box
    /// factorization cannot assign to a position.
    pub fn split_reads(&self, p: usize) -> Result<(MonomialOp, MonomialOp)> {
        let group = &self.chain.group;
        let n = group.order();
        let regs = self.chain.register_count();
        let mut shift = vec![group.identity(); regs];
        let mut minus: Vec<LocalFactor> = Vec::new();
        let mut plus: Vec<LocalFactor> = Vec::new();
        for f in &self.factors {
            match f {
                LocalFactor::Shift { reg, elem } => {
                    shift[*reg] = group.mul(shift[*reg], *elem);
                }
                LocalFactor::RegisterDiagonal { reg, table } => {
                    let s = shift[*reg];
                    let rethreaded: Vec<Phase> =
                        (0..n).map(|l| table[group.mul(l, s)]).collect();
                    let factor = LocalFactor::RegisterDiagonal { reg: *reg, table: rethreaded };
                    if self.chain.position(*reg) >= p {
                        plus.push(factor);
                    } else {
                        minus.push(factor);
                    }
                }
                LocalFactor::LinkDiagonal { reg, table } => {
                    let (sa, sb) = (shift[*reg], shift[*reg + 1]);
                    let mut rethreaded = vec![Phase::ONE; n * n];
                    for l in 0..n {
                        for m in 0..n {
                            rethreaded[l * n + m] =
                                table[group.mul(l, sa) * n + group.mul(m, sb)];
                        }
                    }
                    let factor = LocalFactor::LinkDiagonal { reg: *reg, table: rethreaded };
                    if self.chain.position(*reg) >= p {
                        plus.push(factor);
                    } else {
                        minus.push(factor);
                    }
                }
            }
        }
        let identity = group.identity();
        if shift.iter().any(|s| *s != identity) {
            return Err(Error::NotDiagonal { config: vec![identity; regs], moved: shift });
        }
        Ok((
            MonomialOp::from_factors(&self.chain, self.global_phase, minus)?,
            MonomialOp::from_factors(&self.chain, Phase::ONE, plus)?,
        ))
    }

    fn scan_configs(&self, mut visit: impl FnMut(&[Elem], &[Elem], Phase) -> Result<()>) -> Result<ScanStatus> {
        let n = self.chain.group.order();
        let regs = self.chain.register_count();
        let mut scratch = vec![0usize; regs];
        if self.chain.config_count() <= EXHAUSTIVE_BUDGET {
            let mut labels = vec![0usize; regs];
            loop {
                scratch.copy_from_slice(&labels);
                let phase = self.thread(&mut scratch);
                visit(&labels, &scratch, phase)?;
                // odometer
                let mut i = 0;
                loop {
                    if i == regs {
                        return Ok(ScanStatus::Exhaustive);
                    }
                    labels[i] += 1;
                    if labels[i] < n {
                        break;
                    }
                    labels[i] = 0;
                    i += 1;
                }
            }
        } else {
            let mut rng = StdRng::seed_from_u64(0x5ca1ab1e);
            let mut labels = vec![0usize; regs];
            for _ in 0..SAMPLE_COUNT {
                for l in labels.iter_mut() {
                    *l = rng.gen_range(0..n);
                }
                scratch.copy_from_slice(&labels);
                let phase = self.thread(&mut scratch);
                visit(&labels, &scratch, phase)?;
            }
            Ok(ScanStatus::Sampled(SAMPLE_COUNT))
        }
    }

    /// Scalar / diagonal / general, with minimal support. The kind is settled
    /// by one scan over all configurations (or a documented random sample
    /// beyond the budget); the support of non-scalar operators needs one
    /// grouped scan per register. A scalar's support is empty by definition.
    pub fn classify(&self) -> Result<Classification> {
        let mut moved = false;
        let mut first_phase: Option<Phase> = None;
        let mut constant = true;
        let status = self.scan_configs(|input, output, phase| {
            if input != output {
                moved = true;
            }
            match first_phase {
                None => first_phase = Some(phase),
                Some(p) => {
                    if p != phase {
                        constant = false;
                    }
                }
            }
            Ok(())
        })?;
        let kind = if !moved && constant {
            OpKind::Scalar(first_phase.unwrap_or(self.global_phase))
        } else if !moved {
            OpKind::Diagonal
        } else {
            OpKind::General
        };
        let support = match kind {
            OpKind::Scalar(_) => BTreeSet::new(),
            _ => self.support_scan()?,
        };
        Ok(Classification { kind, support, status })
    }

    /// Extracts the scalar value if the operator acts as a global phase;
    /// errors with witnesses otherwise. Single exhaustive (or sampled) pass.
    pub fn scalar_value(&self) -> Result<Phase> {
        let mut first: Option<(Vec<Elem>, Phase)> = None;
        self.scan_configs(|input, output, phase| {
            if input != output {
                return Err(Error::NotDiagonal {
                    config: input.to_vec(),
                    moved: output.to_vec(),
                });
            }
            match &first {
                None => first = Some((input.to_vec(), phase)),
                Some((c0, p0)) => {
                    if *p0 != phase {
                        return Err(Error::NotScalar {
                            first: c0.clone(),
                            second: input.to_vec(),
                        });
                    }
                }
            }
            Ok(())
        })?;
        Ok(first.map(|(_, p)| p).unwrap_or(self.global_phase))
    }

    /// Registers whose labels affect the output or are moved: grouped scan,
    /// varying one register against every assignment of the others.
    fn support_scan(&self) -> Result<BTreeSet<usize>> {
        let n = self.chain.group.order();
        let regs = self.chain.register_count();
        let exhaustive =
            self.chain.config_count() <= EXHAUSTIVE_BUDGET && regs >= 1;
        let mut support = BTreeSet::new();
        let mut base = vec![0usize; regs.saturating_sub(1)];
        let mut labels = vec![0usize; regs];
        let mut scratch = vec![0usize; regs];
        let mut rng = StdRng::seed_from_u64(0x5ca1ab1e);

        'regs: for r in 0..regs {
            let others = regs - 1;
            let mut visit_base = |base: &[Elem]| -> Result<bool> {
                // reference output at label 0, then compare variants
                let mut reference: Option<(Vec<Elem>, Phase)> = None;
                for l in 0..n {
                    let mut bi = 0;
                    for (i, slot) in labels.iter_mut().enumerate() {
                        if i == r {
                            *slot = l;
                        } else {
                            *slot = base[bi];
                            bi += 1;
                        }
                    }
                    scratch.copy_from_slice(&labels);
                    let phase = self.thread(&mut scratch);
                    if scratch[r] != l {
                        return Ok(true); // moved
                    }
                    let mut off_r: Vec<Elem> = Vec::with_capacity(others);
                    for (i, &v) in scratch.iter().enumerate() {
                        if i != r {
                            off_r.push(v);
                        }
                    }
                    match &reference {
                        None => reference = Some((off_r, phase)),
                        Some((o0, p0)) => {
                            if *o0 != off_r || *p0 != phase {
                                return Ok(true); // affects output
                            }
                        }
                    }
                }
                Ok(false)
            };

            if exhaustive {
                for b in base.iter_mut() {
                    *b = 0;
                }
                loop {
                    if visit_base(&base.clone())? {
                        support.insert(r);
                        continue 'regs;
                    }
                    let mut i = 0;
                    loop {
                        if i == others {
                            continue 'regs;
                        }
                        base[i] += 1;
                        if base[i] < n {
                            break;
                        }
                        base[i] = 0;
                        i += 1;
                    }
                }
            } else {
                for _ in 0..SAMPLE_COUNT / n.max(1) {
                    let sample: Vec<Elem> =
                        (0..others).map(|_| rng.gen_range(0..n)).collect();
                    if visit_base(&sample)? {
                        support.insert(r);
                        break;
                    }
                }
            }
        }
        Ok(support)
    }

    /// Factors a diagonal operator over registers:
    /// value(c) = scalar·∏_x d_x(c_x), with d_x read off single-register probes
    /// and verified against every configuration (or a documented sample).
    /// The scalar is the value on the all-identity configuration.
    pub fn factor_diagonal(&self) -> Result<DiagonalFactors> {
        let n = self.chain.group.order();
        let regs = self.chain.register_count();
        let mut probe = vec![0usize; regs];
        let mut scratch = vec![0usize; regs];

        scratch.copy_from_slice(&probe);
        let scalar = self.thread(&mut scratch);
        if scratch != probe {
            return Err(Error::NotDiagonal { config: probe, moved: scratch });
        }

        let mut per_register: Vec<Vec<Phase>> = Vec::with_capacity(regs);
        for r in 0..regs {
            let mut table = Vec::with_capacity(n);
            for l in 0..n {
                probe[r] = l;
                scratch.copy_from_slice(&probe);
                let phase = self.thread(&mut scratch);
                if scratch != probe {
                    return Err(Error::NotDiagonal { config: probe.clone(), moved: scratch });
                }
                table.push(phase / scalar);
            }
            probe[r] = 0;
            per_register.push(table);
        }

        // Verification pass with an incrementally maintained expected product.
        let status = if self.chain.config_count() <= EXHAUSTIVE_BUDGET {
            let mut labels = vec![0usize; regs];
            let mut expected = scalar;
            loop {
                scratch.copy_from_slice(&labels);
                let phase = self.thread(&mut scratch);
                if scratch != labels {
                    return Err(Error::NotDiagonal { config: labels, moved: scratch });
                }
                if phase != expected {
                    return Err(Error::NotFactorizable { witness: labels });
                }
                let mut i = 0;
                loop {
                    if i == regs {
                        return Ok(DiagonalFactors {
                            per_register,
                            scalar,
                            status: ScanStatus::Exhaustive,
                        });
                    }
                    let old = labels[i];
                    labels[i] += 1;
                    if labels[i] < n {
                        expected *= per_register[i][labels[i]] / per_register[i][old];
                        break;
                    }
                    labels[i] = 0;
                    expected /= per_register[i][old];
                    i += 1;
                }
            }
        } else {
            let mut rng = StdRng::seed_from_u64(0x5ca1ab1e);
            let mut labels = vec![0usize; regs];
            for _ in 0..SAMPLE_COUNT {
                for l in labels.iter_mut() {
                    *l = rng.gen_range(0..n);
                }
                scratch.copy_from_slice(&labels);
                let phase = self.thread(&mut scratch);
                if scratch != labels {
                    return Err(Error::NotDiagonal { config: labels, moved: scratch });
                }
                let mut expected = scalar;
                for (r, &l) in labels.iter().enumerate() {
                    expected *= per_register[r][l];
                }
                if phase != expected {
                    return Err(Error::NotFactorizable { witness: labels });
                }
            }
            ScanStatus::Sampled(SAMPLE_COUNT)
        };
        Ok(DiagonalFactors { per_register, scalar, status })
    }

    /// Compact JSON description for report attachments.
    pub fn describe(&self) -> serde_json::Value {
        let factors: Vec<serde_json::Value> = self
            .factors
            .iter()
            .map(|f| match f {
                LocalFactor::Shift { reg, elem } => serde_json::json!({
                    "kind": "shift", "reg": reg, "elem": elem,
                }),
                LocalFactor::RegisterDiagonal { reg, table } => serde_json::json!({
                    "kind": "register_diagonal", "reg": reg,
                    "exponents": table.iter().map(|p| [p.numer(), p.denom()]).collect::<Vec<_>>(),
                }),
                LocalFactor::LinkDiagonal { reg, table } => serde_json::json!({
                    "kind": "link_diagonal", "reg": reg,
                    "exponents": table.iter().map(|p| [p.numer(), p.denom()]).collect::<Vec<_>>(),
                }),
            })
            .collect();
        serde_json::json!({
            "registers": self.chain.register_count(),
            "global_phase": [self.global_phase.numer(), self.global_phase.denom()],
            "factors": factors,
        })
    }
}

/// A seeded random unitary: `count` local factors of mixed kinds with phase
/// tables drawn from (1/denominator)·ℤ exponents.
pub fn random_op(
    chain: &RegisterChain,
    count: usize,
    denominator: i64,
    rng: &mut impl Rng,
) -> MonomialOp {
    let n = chain.group().order();
    let regs = chain.register_count();
    let mut factors = Vec::with_capacity(count);
    for _ in 0..count {
        let reg = rng.gen_range(0..regs);
        match rng.gen_range(0..3u8) {
            0 => factors.push(LocalFactor::Shift { reg, elem: rng.gen_range(0..n) }),
            1 => factors.push(LocalFactor::RegisterDiagonal {
                reg,
                table: (0..n)
                    .map(|_| Phase::new(rng.gen_range(0..denominator), denominator).unwrap())
                    .collect(),
            }),
            _ => {
                // keep links inside a block
                let reg = if chain.position(reg) + 1 >= chain.block_len() {
                    reg - 1
                } else {
                    reg
                };
                factors.push(LocalFactor::LinkDiagonal {
                    reg,
                    table: (0..n * n)
                        .map(|_| Phase::new(rng.gen_range(0..denominator), denominator).unwrap())
                        .collect(),
                });
            }
        }
    }
    MonomialOp::from_factors(chain, Phase::ONE, factors).expect("factors validated by construction")
}
