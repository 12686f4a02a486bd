//! Problem representations, evaluation, and reductions between problems.
//!
//! Variables are 0-indexed in the API: bit `j` of an [`Assignment`] is the
//! value of variable `x_{j+1}`.

use serde::Serialize;

use crate::error::{Error, Result};

/// Magnitude cap on right-hand sides and on any partial sum.
pub const MAGNITUDE_CAP: i64 = 1 << 40;

/// Largest variable count representable by [`Assignment`].
pub const MAX_VARS: usize = 63;

/// Per-coefficient cap for an instance with `n` variables, so that every row
/// sum stays within [`MAGNITUDE_CAP`].
pub fn coefficient_cap(n: usize) -> i64 {
    MAGNITUDE_CAP / n.max(1) as i64
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct KnapsackInstance {
    coefficients: Vec<i64>,
    target: i64,
}

impl KnapsackInstance {
    pub fn new(coefficients: Vec<i64>, target: i64) -> Result<Self> {
        let n = coefficients.len();
        if n == 0 || n > MAX_VARS {
            return Err(Error::InvalidInstance(format!(
                "knapsack needs 1..={MAX_VARS} coefficients, got {n}"
            )));
        }
        let cap = coefficient_cap(n);
        if let Some(c) = coefficients.iter().find(|&&c| c < 1 || c > cap) {
            return Err(Error::InvalidInstance(format!(
                "knapsack coefficient {c} outside [1, {cap}]"
            )));
        }
        if !(1..=MAGNITUDE_CAP).contains(&target) {
            return Err(Error::InvalidInstance(format!(
                "knapsack target {target} outside [1, {MAGNITUDE_CAP}]"
            )));
        }
        Ok(Self {
            coefficients,
            target,
        })
    }

    pub fn n(&self) -> usize {
        self.coefficients.len()
    }

    pub fn coefficients(&self) -> &[i64] {
        &self.coefficients
    }

    pub fn target(&self) -> i64 {
        self.target
    }

    pub fn subset_sum(&self, x: &Assignment) -> i64 {
        self.coefficients
            .iter()
            .enumerate()
            .filter(|(j, _)| x.get(*j))
            .map(|(_, c)| c)
            .sum()
    }
}

/// A 0-1 feasibility system `a x (<= | =) b`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct IlpInstance {
    n: usize,
    rows: Vec<Vec<i64>>,
    rhs: Vec<i64>,
    equality: Vec<bool>,
}

impl IlpInstance {
    /// All rows are `<=` inequalities.
    pub fn new(rows: Vec<Vec<i64>>, rhs: Vec<i64>) -> Result<Self> {
        let d = rows.len();
        Self::with_relations(rows, rhs, vec![false; d])
    }

    /// `n` is taken from the rows; an instance with no rows needs [`Self::empty`].
    pub fn with_relations(rows: Vec<Vec<i64>>, rhs: Vec<i64>, equality: Vec<bool>) -> Result<Self> {
        let n = rows.first().map(Vec::len).ok_or_else(|| {
            Error::InvalidInstance("instance has no rows; use IlpInstance::empty".into())
        })?;
        Self::build(n, rows, rhs, equality)
    }

    /// The instance with `n` variables and no constraints.
    pub fn empty(n: usize) -> Result<Self> {
        Self::build(n, Vec::new(), Vec::new(), Vec::new())
    }

    fn build(n: usize, rows: Vec<Vec<i64>>, rhs: Vec<i64>, equality: Vec<bool>) -> Result<Self> {
        if n == 0 || n > MAX_VARS {
            return Err(Error::InvalidInstance(format!(
                "variable count must be in 1..={MAX_VARS}, got {n}"
            )));
        }
        if rhs.len() != rows.len() {
            return Err(Error::LengthMismatch {
                expected: rows.len(),
                got: rhs.len(),
            });
        }
        if equality.len() != rows.len() {
            return Err(Error::LengthMismatch {
                expected: rows.len(),
                got: equality.len(),
            });
        }
        let cap = coefficient_cap(n);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(Error::LengthMismatch {
                    expected: n,
                    got: row.len(),
                });
            }
            if let Some(a) = row.iter().find(|a| a.abs() > cap) {
                return Err(Error::InvalidInstance(format!(
                    "row {i}: coefficient {a} exceeds magnitude cap {cap}"
                )));
            }
            if rhs[i].abs() > MAGNITUDE_CAP {
                return Err(Error::InvalidInstance(format!(
                    "row {i}: right-hand side {} exceeds magnitude cap {MAGNITUDE_CAP}",
                    rhs[i]
                )));
            }
        }
        Ok(Self {
            n,
            rows,
            rhs,
            equality,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.rows.len()
    }

    pub fn rows(&self) -> &[Vec<i64>] {
        &self.rows
    }

    pub fn rhs(&self) -> &[i64] {
        &self.rhs
    }

    pub fn is_equality(&self, row: usize) -> bool {
        self.equality[row]
    }

    /// True when every row is an equality (vacuously for `d = 0`).
    pub fn is_pure_equality(&self) -> bool {
        self.equality.iter().all(|&e| e)
    }

    /// Row activity `sum_j a_ij x_j`.
    pub fn activity(&self, row: usize, x: &Assignment) -> i64 {
        self.rows[row]
            .iter()
            .enumerate()
            .filter(|(j, _)| x.get(*j))
            .map(|(_, a)| a)
            .sum()
    }

    pub fn is_feasible(&self, x: &Assignment) -> Result<bool> {
        if x.n() != self.n {
            return Err(Error::LengthMismatch {
                expected: self.n,
                got: x.n(),
            });
        }
        Ok((0..self.d()).all(|i| {
            let lhs = self.activity(i, x);
            if self.equality[i] {
                lhs == self.rhs[i]
            } else {
                lhs <= self.rhs[i]
            }
        }))
    }

    /// Copy of this instance with one more `<=` row appended.
    pub fn with_row(&self, row: Vec<i64>, rhs: i64) -> Result<Self> {
        let mut rows = self.rows.clone();
        let mut b = self.rhs.clone();
        let mut eq = self.equality.clone();
        rows.push(row);
        b.push(rhs);
        eq.push(false);
        Self::build(self.n, rows, b, eq)
    }
}

/// Free-function form of [`IlpInstance::is_feasible`].
pub fn eval_ilp(inst: &IlpInstance, x: &Assignment) -> Result<bool> {
    inst.is_feasible(x)
}

/// A full 0-1 assignment to `n <= 63` variables, stored as a bit mask.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Assignment {
    n: usize,
    bits: u64,
}

impl Assignment {
    pub fn from_mask(n: usize, bits: u64) -> Result<Self> {
        if n > MAX_VARS {
            return Err(Error::InvalidParameter(format!(
                "assignment length {n} exceeds {MAX_VARS}"
            )));
        }
        if n < 64 && bits >> n != 0 {
            return Err(Error::InvalidParameter(format!(
                "mask {bits:#x} has bits beyond length {n}"
            )));
        }
        Ok(Self { n, bits })
    }

    pub fn zeros(n: usize) -> Self {
        Self { n, bits: 0 }
    }

    pub fn from_bits(bits: &[bool]) -> Result<Self> {
        let mask = bits
            .iter()
            .enumerate()
            .fold(0u64, |m, (j, &b)| m | ((b as u64) << j));
        Self::from_mask(bits.len(), mask)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn mask(&self) -> u64 {
        self.bits
    }

    #[inline]
    pub fn get(&self, j: usize) -> bool {
        (self.bits >> j) & 1 == 1
    }

    pub fn to_bits(&self) -> Vec<u8> {
        (0..self.n).map(|j| self.get(j) as u8).collect()
    }

    /// Restriction to the given variables.
    pub fn restrict(&self, support_mask: u64) -> PartialAssignment {
        PartialAssignment {
            support: support_mask,
            values: self.bits & support_mask,
        }
    }
}

impl Serialize for Assignment {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_bits().serialize(s)
    }
}

impl std::fmt::Display for Assignment {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for j in 0..self.n {
            write!(f, "{}", self.get(j) as u8)?;
        }
        Ok(())
    }
}

/// Values on a subset of the variables. `support` and `values` are masks over
/// variable indices; `values` never has bits outside `support`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct PartialAssignment {
    support: u64,
    values: u64,
}

impl PartialAssignment {
    pub fn new(support: u64, values: u64) -> Result<Self> {
        if values & !support != 0 {
            return Err(Error::InvalidParameter(
                "partial assignment sets variables outside its support".into(),
            ));
        }
        Ok(Self { support, values })
    }

    pub fn empty() -> Self {
        Self {
            support: 0,
            values: 0,
        }
    }

    /// From parallel lists of strictly increasing 0-based indices and values.
    pub fn from_lists(support: &[usize], bits: &[bool]) -> Result<Self> {
        if support.len() != bits.len() {
            return Err(Error::LengthMismatch {
                expected: support.len(),
                got: bits.len(),
            });
        }
        if support.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidParameter(
                "support indices must be strictly increasing".into(),
            ));
        }
        if support.last().is_some_and(|&v| v >= 64) {
            return Err(Error::InvalidParameter("support index beyond 63".into()));
        }
        let mut s = 0u64;
        let mut v = 0u64;
        for (&i, &b) in support.iter().zip(bits) {
            s |= 1 << i;
            v |= (b as u64) << i;
        }
        Ok(Self {
            support: s,
            values: v,
        })
    }

    pub fn support_mask(&self) -> u64 {
        self.support
    }

    pub fn values_mask(&self) -> u64 {
        self.values
    }

    pub fn support(&self) -> Vec<usize> {
        (0..64).filter(|&i| (self.support >> i) & 1 == 1).collect()
    }

    pub fn bits(&self) -> Vec<bool> {
        self.support()
            .into_iter()
            .map(|i| (self.values >> i) & 1 == 1)
            .collect()
    }

    /// Union of two partial assignments on disjoint supports.
    pub fn merge(&self, other: &PartialAssignment) -> Result<Self> {
        if self.support & other.support != 0 {
            return Err(Error::InvalidParameter(
                "cannot merge partial assignments with overlapping supports".into(),
            ));
        }
        Ok(Self {
            support: self.support | other.support,
            values: self.values | other.values,
        })
    }

    pub fn to_assignment(&self, n: usize) -> Result<Assignment> {
        let full = full_mask(n);
        if self.support != full {
            return Err(Error::InvalidParameter(
                "partial assignment does not cover every variable".into(),
            ));
        }
        Assignment::from_mask(n, self.values)
    }
}

pub(crate) fn full_mask(n: usize) -> u64 {
    if n >= 64 {
        u64::MAX
    } else {
        (1u64 << n) - 1
    }
}

/// Set of clause indices, bit `j` for clause `C_{j+1}`. Supports `m <= 128`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ClauseMask(pub u128);

impl ClauseMask {
    pub const MAX_CLAUSES: usize = 128;

    pub fn full(m: usize) -> Self {
        if m >= 128 {
            ClauseMask(u128::MAX)
        } else {
            ClauseMask((1u128 << m) - 1)
        }
    }

    pub fn popcount(&self) -> u32 {
        self.0.count_ones()
    }

    pub fn contains(&self, j: usize) -> bool {
        (self.0 >> j) & 1 == 1
    }

    pub fn is_subset_of(&self, other: &ClauseMask) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn to_bits(&self, m: usize) -> Vec<u8> {
        (0..m).map(|j| self.contains(j) as u8).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CnfFormula {
    n: usize,
    clauses: Vec<Vec<i32>>,
    #[serde(skip)]
    masks: Vec<(u64, u64)>,
}

impl CnfFormula {
    /// Literals are DIMACS-style signed 1-based variable numbers.
    pub fn new(n: usize, clauses: Vec<Vec<i32>>) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidInstance("formula needs n >= 1".into()));
        }
        for (j, c) in clauses.iter().enumerate() {
            if c.is_empty() {
                return Err(Error::InvalidInstance(format!("clause {} is empty", j + 1)));
            }
            for &lit in c {
                if lit == 0 || lit.unsigned_abs() as usize > n {
                    return Err(Error::InvalidInstance(format!(
                        "clause {}: literal {lit} out of range 1..={n}",
                        j + 1
                    )));
                }
                if c.contains(&-lit) {
                    return Err(Error::InvalidInstance(format!(
                        "clause {} contains both {lit} and {}",
                        j + 1,
                        -lit
                    )));
                }
            }
        }
        let masks = if n <= 64 {
            clauses
                .iter()
                .map(|c| {
                    c.iter().fold((0u64, 0u64), |(p, q), &lit| {
                        let bit = 1u64 << (lit.unsigned_abs() - 1);
                        if lit > 0 {
                            (p | bit, q)
                        } else {
                            (p, q | bit)
                        }
                    })
                })
                .collect()
        } else {
            Vec::new()
        };
        Ok(Self { n, clauses, masks })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.clauses.len()
    }

    pub fn clauses(&self) -> &[Vec<i32>] {
        &self.clauses
    }

    /// Membership in CNF_c: `m <= c n`.
    pub fn in_cnf_c(&self, c: f64) -> bool {
        self.m() as f64 <= c * self.n as f64 + 1e-9
    }

    /// Clause mask of clauses with at least one true literal under `x`.
    pub(crate) fn satisfied_by_mask(&self, support: u64, values: u64) -> ClauseMask {
        let off = support & !values;
        let mut out = 0u128;
        for (j, &(pos, neg)) in self.masks.iter().enumerate() {
            if pos & values != 0 || neg & off != 0 {
                out |= 1u128 << j;
            }
        }
        ClauseMask(out)
    }

    pub fn is_satisfied_by(&self, x: &Assignment) -> bool {
        self.clauses.iter().all(|c| {
            c.iter().any(|&lit| {
                let v = x.get(lit.unsigned_abs() as usize - 1);
                (lit > 0) == v
            })
        })
    }
}

/// Bit `j` set iff `p` makes some literal of clause `C_{j+1}` true.
/// Unassigned variables never satisfy a clause.
pub fn satisfied_clause_set(f: &CnfFormula, p: &PartialAssignment) -> Result<ClauseMask> {
    if f.n() > 64 {
        return Err(Error::Guard {
            what: "variable count for clause masks",
            actual: f.n() as u64,
            limit: 64,
        });
    }
    if f.m() > ClauseMask::MAX_CLAUSES {
        return Err(Error::Guard {
            what: "clause count for clause masks",
            actual: f.m() as u64,
            limit: ClauseMask::MAX_CLAUSES as u64,
        });
    }
    if p.support_mask() & !full_mask(f.n()) != 0 {
        return Err(Error::InvalidParameter(
            "partial assignment support exceeds the formula's variables".into(),
        ));
    }
    Ok(f.satisfied_by_mask(p.support_mask(), p.values_mask()))
}

/// Two-row encoding `c x <= K`, `-c x <= -K`.
pub fn knapsack_to_ilp(k: &KnapsackInstance) -> IlpInstance {
    let pos = k.coefficients().to_vec();
    let neg = pos.iter().map(|c| -c).collect();
    IlpInstance::new(vec![pos, neg], vec![k.target(), -k.target()])
        .expect("knapsack invariants imply ILP coefficient bounds")
}

/// Equality rows requiring exactly one true literal per clause. A negative
/// literal `!x_v` contributes `1 - x_v`; its constant moves to the right-hand side.
pub fn exactly_one_sat_to_group_ilp(f: &CnfFormula) -> Result<IlpInstance> {
    if f.n() > MAX_VARS {
        return Err(Error::InvalidInstance(format!(
            "exactly-one reduction supports at most {MAX_VARS} variables"
        )));
    }
    let mut rows = Vec::with_capacity(f.m());
    let mut rhs = Vec::with_capacity(f.m());
    for clause in f.clauses() {
        let mut row = vec![0i64; f.n()];
        let mut negatives = 0i64;
        for &lit in clause {
            let v = lit.unsigned_abs() as usize - 1;
            if lit > 0 {
                row[v] += 1;
            } else {
                row[v] -= 1;
                negatives += 1;
            }
        }
        rows.push(row);
        rhs.push(1 - negatives);
    }
    let eq = vec![true; rows.len()];
    if rows.is_empty() {
        return IlpInstance::empty(f.n());
    }
    IlpInstance::with_relations(rows, rhs, eq)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Sense {
    Minimize,
    Maximize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Optimum {
    pub value: i64,
    pub witness: Assignment,
    pub solve_calls: usize,
}

pub fn objective_value(objective: &[i64], x: &Assignment) -> i64 {
    objective
        .iter()
        .enumerate()
        .filter(|(j, _)| x.get(*j))
        .map(|(_, c)| c)
        .sum()
}

/// Optimizes a linear objective by bisecting a threshold row over
/// `[-sum|obj|, sum|obj|]`, calling `solve` for feasibility of each
/// thresholded instance. Each witness returned by `solve` is re-checked.
pub fn optimize_by_bisection<F>(
    inst: &IlpInstance,
    objective: &[i64],
    sense: Sense,
    mut solve: F,
) -> Result<Option<Optimum>>
where
    F: FnMut(&IlpInstance) -> Result<Option<Assignment>>,
{
    if objective.len() != inst.n() {
        return Err(Error::LengthMismatch {
            expected: inst.n(),
            got: objective.len(),
        });
    }
    let cap = coefficient_cap(inst.n());
    if objective.iter().any(|c| c.abs() > cap) {
        return Err(Error::InvalidParameter(format!(
            "objective coefficient exceeds magnitude cap {cap}"
        )));
    }
    // Everything is phrased as minimization of `sign * obj`.
    let sign = match sense {
        Sense::Minimize => 1,
        Sense::Maximize => -1,
    };
    let row: Vec<i64> = objective.iter().map(|c| sign * c).collect();
    let span: i64 = objective.iter().map(|c| c.abs()).sum();
    let found = bisect_minimum(span, |t| {
        let thresholded = inst.with_row(row.clone(), t)?;
        match solve(&thresholded)? {
            Some(w) if thresholded.is_feasible(&w)? => Ok(Some((w, objective_value(&row, &w)))),
            Some(_) => Err(Error::InvalidInstance(
                "feasibility procedure returned an infeasible witness".into(),
            )),
            None => Ok(None),
        }
    })?;
    Ok(found.map(|(witness, calls)| Optimum {
        value: objective_value(objective, &witness),
        witness,
        solve_calls: calls,
    }))
}

/// Smallest threshold `t` in `[-span, span]` for which `probe(t)` finds a
/// witness. `probe` returns the witness together with its own value, which
/// must be `<= t`. Returns the final witness and the number of probes.
pub(crate) fn bisect_minimum<F>(span: i64, mut probe: F) -> Result<Option<(Assignment, usize)>>
where
    F: FnMut(i64) -> Result<Option<(Assignment, i64)>>,
{
    let mut calls = 1usize;
    let Some((mut best, mut hi)) = probe(span)? else {
        return Ok(None);
    };
    let mut lo = -span;
    while lo < hi {
        let mid = lo + (hi - lo).div_euclid(2);
        calls += 1;
        match probe(mid)? {
            Some((w, v)) => {
                debug_assert!(v <= mid);
                hi = v;
                best = w;
            }
            None => lo = mid + 1,
        }
    }
    Ok(Some((best, calls)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn all_assignments(n: usize) -> impl Iterator<Item = Assignment> {
        (0..1u64 << n).map(move |m| Assignment::from_mask(n, m).unwrap())
    }

    fn asg(bits: &[u8]) -> Assignment {
        Assignment::from_bits(&bits.iter().map(|&b| b == 1).collect::<Vec<_>>()).unwrap()
    }

    #[test]
    fn knapsack_two_row_encoding() {
        let k = KnapsackInstance::new(vec![1, 2, 3], 5).unwrap();
        let ilp = knapsack_to_ilp(&k);
        assert_eq!(ilp.rows(), &[vec![1, 2, 3], vec![-1, -2, -3]]);
        assert_eq!(ilp.rhs(), &[5, -5]);
        assert!(ilp.is_feasible(&asg(&[0, 1, 1])).unwrap());

        let single = knapsack_to_ilp(&KnapsackInstance::new(vec![7], 7).unwrap());
        assert!(single.is_feasible(&asg(&[1])).unwrap());
        assert!(!single.is_feasible(&asg(&[0])).unwrap());

        let none = knapsack_to_ilp(&KnapsackInstance::new(vec![2, 2], 3).unwrap());
        assert!(all_assignments(2).all(|x| !none.is_feasible(&x).unwrap()));
    }

    #[test]
    fn knapsack_rejects_bad_input() {
        assert!(KnapsackInstance::new(vec![], 1).is_err());
        assert!(KnapsackInstance::new(vec![0, 1], 1).is_err());
        assert!(KnapsackInstance::new(vec![1], 0).is_err());
        assert!(KnapsackInstance::new(vec![1; 64], 1).is_err());
    }

    #[test]
    fn exactly_one_encoding() {
        let f = CnfFormula::new(2, vec![vec![1, 2]]).unwrap();
        let g = exactly_one_sat_to_group_ilp(&f).unwrap();
        assert_eq!(g.rows(), &[vec![1, 1]]);
        assert_eq!(g.rhs(), &[1]);
        assert!(g.is_pure_equality());

        let f = CnfFormula::new(1, vec![vec![-1]]).unwrap();
        let g = exactly_one_sat_to_group_ilp(&f).unwrap();
        assert_eq!(g.rows(), &[vec![-1]]);
        assert_eq!(g.rhs(), &[0]);
        assert!(g.is_feasible(&asg(&[0])).unwrap());
        assert!(!g.is_feasible(&asg(&[1])).unwrap());

        let f = CnfFormula::new(2, vec![vec![1, -2], vec![2]]).unwrap();
        let g = exactly_one_sat_to_group_ilp(&f).unwrap();
        let feasible: Vec<_> = all_assignments(2)
            .filter(|x| g.is_feasible(x).unwrap())
            .collect();
        assert_eq!(feasible, vec![asg(&[1, 1])]);
    }

    #[test]
    fn eval_ilp_cases() {
        let ilp = IlpInstance::new(vec![vec![1, 2, 3], vec![-1, -2, -3]], vec![5, -5]).unwrap();
        assert!(eval_ilp(&ilp, &asg(&[0, 1, 1])).unwrap());
        let one = IlpInstance::new(vec![vec![1]], vec![0]).unwrap();
        assert!(!eval_ilp(&one, &asg(&[1])).unwrap());
        assert_eq!(
            eval_ilp(&one, &asg(&[1, 0])),
            Err(Error::LengthMismatch {
                expected: 1,
                got: 2
            })
        );
        // zero assignment: feasible iff b >= 0 on inequalities, b = 0 on equalities
        let mixed = IlpInstance::with_relations(
            vec![vec![3, 1], vec![1, 1]],
            vec![0, 0],
            vec![false, true],
        )
        .unwrap();
        assert!(eval_ilp(&mixed, &Assignment::zeros(2)).unwrap());
        let neg = IlpInstance::new(vec![vec![3, 1]], vec![-1]).unwrap();
        assert!(!eval_ilp(&neg, &Assignment::zeros(2)).unwrap());
    }

    #[test]
    fn coefficient_bounds_checked() {
        let cap = coefficient_cap(4);
        assert!(IlpInstance::new(vec![vec![cap, 0, 0, 0]], vec![0]).is_ok());
        assert!(IlpInstance::new(vec![vec![cap + 1, 0, 0, 0]], vec![0]).is_err());
        assert!(IlpInstance::new(vec![vec![0, 0, 0, 0]], vec![MAGNITUDE_CAP + 1]).is_err());
    }

    fn brute_optimum(inst: &IlpInstance, obj: &[i64], sense: Sense) -> Option<i64> {
        let vals = all_assignments(inst.n())
            .filter(|x| inst.is_feasible(x).unwrap())
            .map(|x| objective_value(obj, &x));
        match sense {
            Sense::Minimize => vals.min(),
            Sense::Maximize => vals.max(),
        }
    }

    fn brute_solve(inst: &IlpInstance) -> Result<Option<Assignment>> {
        Ok(all_assignments(inst.n()).find(|x| inst.is_feasible(x).unwrap()))
    }

    #[test]
    fn bisection_examples() {
        let inst = IlpInstance::new(vec![vec![1, 1]], vec![1]).unwrap();
        let opt = optimize_by_bisection(&inst, &[1, 1], Sense::Maximize, brute_solve)
            .unwrap()
            .unwrap();
        assert_eq!(opt.value, 1);

        let opt = optimize_by_bisection(&inst, &[2, 3], Sense::Maximize, brute_solve)
            .unwrap()
            .unwrap();
        assert_eq!(opt.value, 3);
        assert_eq!(opt.witness, asg(&[0, 1]));

        let infeasible = IlpInstance::new(vec![vec![1]], vec![-1]).unwrap();
        assert!(optimize_by_bisection(&infeasible, &[1], Sense::Minimize, brute_solve)
            .unwrap()
            .is_none());
    }

    #[test]
    fn satisfied_clause_examples() {
        let f = CnfFormula::new(2, vec![vec![1, 2], vec![-2]]).unwrap();
        let p = PartialAssignment::from_lists(&[1], &[true]).unwrap();
        assert_eq!(satisfied_clause_set(&f, &p).unwrap().to_bits(2), vec![1, 0]);
        assert_eq!(
            satisfied_clause_set(&f, &PartialAssignment::empty())
                .unwrap()
                .to_bits(2),
            vec![0, 0]
        );
        let f = CnfFormula::new(3, vec![vec![-1], vec![-1, 3]]).unwrap();
        let p = PartialAssignment::from_lists(&[0], &[false]).unwrap();
        assert_eq!(satisfied_clause_set(&f, &p).unwrap().to_bits(2), vec![1, 1]);
    }

    #[test]
    fn formula_invariants() {
        assert!(CnfFormula::new(2, vec![vec![]]).is_err());
        assert!(CnfFormula::new(2, vec![vec![3]]).is_err());
        assert!(CnfFormula::new(2, vec![vec![1, -1]]).is_err());
        assert!(CnfFormula::new(2, vec![vec![0]]).is_err());
    }

    #[test]
    fn partial_assignment_lists() {
        assert!(PartialAssignment::from_lists(&[2, 1], &[true, false]).is_err());
        let p = PartialAssignment::from_lists(&[0, 3], &[true, false]).unwrap();
        assert_eq!(p.support(), vec![0, 3]);
        assert_eq!(p.bits(), vec![true, false]);
    }

    mod props {
        use super::*;
        use crate::rng::SplitMix64;
        use proptest::prelude::*;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(64))]

            #[test]
            fn knapsack_reduction_sound(seed in any::<u64>(), n in 1usize..=12) {
                let mut r = SplitMix64::new(seed);
                let c: Vec<i64> = (0..n).map(|_| r.range_i64(1, 20)).collect();
                let k = KnapsackInstance::new(c, r.range_i64(1, 60)).unwrap();
                let ilp = knapsack_to_ilp(&k);
                for x in all_assignments(n) {
                    prop_assert_eq!(ilp.is_feasible(&x).unwrap(), k.subset_sum(&x) == k.target());
                }
            }

            #[test]
            fn exactly_one_reduction_sound(seed in any::<u64>(), n in 1usize..=10) {
                let mut r = SplitMix64::new(seed);
                let m = 1 + r.below(8) as usize;
                let clauses: Vec<Vec<i32>> = (0..m).map(|_| {
                    let mut vars: Vec<i32> = (1..=n as i32).collect();
                    r.shuffle(&mut vars);
                    let w = 1 + r.below(n.min(4) as u64) as usize;
                    vars[..w].iter().map(|&v| if r.bernoulli(0.5) { v } else { -v }).collect()
                }).collect();
                let f = CnfFormula::new(n, clauses.clone()).unwrap();
                let g = exactly_one_sat_to_group_ilp(&f).unwrap();
                for x in all_assignments(n) {
                    let exactly_one = clauses.iter().all(|c| {
                        c.iter().filter(|&&l| x.get(l.unsigned_abs() as usize - 1) == (l > 0)).count() == 1
                    });
                    prop_assert_eq!(g.is_feasible(&x).unwrap(), exactly_one);
                }
            }

            #[test]
            fn bisection_matches_exhaustive(seed in any::<u64>(), n in 1usize..=12, max in any::<bool>()) {
                let mut r = SplitMix64::new(seed);
                let d = 1 + r.below(2) as usize;
                let rows: Vec<Vec<i64>> = (0..d).map(|_| (0..n).map(|_| r.range_i64(-5, 5)).collect()).collect();
                let rhs: Vec<i64> = (0..d).map(|_| r.range_i64(-3, 6)).collect();
                let inst = IlpInstance::new(rows, rhs).unwrap();
                let obj: Vec<i64> = (0..n).map(|_| r.range_i64(-9, 9)).collect();
                let sense = if max { Sense::Maximize } else { Sense::Minimize };
                let got = optimize_by_bisection(&inst, &obj, sense, brute_solve).unwrap();
                prop_assert_eq!(got.as_ref().map(|o| o.value), brute_optimum(&inst, &obj, sense));
                if let Some(o) = got {
                    let span: i64 = obj.iter().map(|c| c.abs()).sum();
                    let bound = ((2 * span + 1) as f64).log2().ceil() as usize + 1;
                    prop_assert!(o.solve_calls <= bound);
                    prop_assert!(inst.is_feasible(&o.witness).unwrap());
                }
            }

            #[test]
            fn sums_exact_at_the_bound(n in 1usize..=MAX_VARS, neg in any::<bool>()) {
                let cap = coefficient_cap(n);
                let a = if neg { -cap } else { cap };
                let inst = IlpInstance::new(vec![vec![a; n]], vec![MAGNITUDE_CAP]).unwrap();
                let ones = Assignment::from_mask(n, full_mask(n)).unwrap();
                let act = inst.activity(0, &ones);
                prop_assert_eq!(act as i128, a as i128 * n as i128);
                prop_assert!(act.abs() <= MAGNITUDE_CAP);
            }
        }
    }
}
