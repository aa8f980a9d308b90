use num_rational::Rational64;
use num_traits::{ToPrimitive, Zero};

use crate::key::KeySymbol;

/// Square probability table over Alice × Bob key symbols.
///
/// Rows are Alice's symbols and columns Bob's, in [`KeySymbol::index`]
/// order. The key-only form drops the trailing `NoKey` row and column.
#[derive(Debug, Clone, PartialEq)]
pub struct JointDistribution {
    l0: u32,
    with_nokey: bool,
    p: Vec<f64>,
}

impl JointDistribution {
    pub fn from_fn(l0: u32, with_nokey: bool, f: impl Fn(usize, usize) -> f64) -> Self {
        let n = Self::dim_for(l0, with_nokey);
        let p = (0..n * n).map(|i| f(i / n, i % n)).collect();
        Self { l0, with_nokey, p }
    }

    fn dim_for(l0: u32, with_nokey: bool) -> usize {
        2 * l0 as usize + 1 + usize::from(with_nokey)
    }

    pub fn l0(&self) -> u32 {
        self.l0
    }

    pub fn has_nokey(&self) -> bool {
        self.with_nokey
    }

    pub fn dim(&self) -> usize {
        Self::dim_for(self.l0, self.with_nokey)
    }

    pub fn at(&self, row: usize, col: usize) -> f64 {
        self.p[row * self.dim() + col]
    }

    /// Probability of the symbol pair. `NoKey` on a key-only table is zero.
    pub fn get(&self, alice: KeySymbol, bob: KeySymbol) -> f64 {
        let (i, j) = (alice.index(self.l0), bob.index(self.l0));
        if i < self.dim() && j < self.dim() {
            self.at(i, j)
        } else {
            0.0
        }
    }

    pub fn entries(&self) -> &[f64] {
        &self.p
    }

    pub fn total(&self) -> f64 {
        self.p.iter().sum()
    }

    pub fn row_marginal(&self) -> Vec<f64> {
        self.p.chunks(self.dim()).map(|r| r.iter().sum()).collect()
    }

    pub fn col_marginal(&self) -> Vec<f64> {
        let n = self.dim();
        (0..n)
            .map(|j| (0..n).map(|i| self.at(i, j)).sum())
            .collect()
    }

    /// Mass where both parties hold a key value.
    pub fn both_value_mass(&self) -> f64 {
        let k = 2 * self.l0 as usize + 1;
        (0..k)
            .map(|i| (0..k).map(|j| self.at(i, j)).sum::<f64>())
            .sum()
    }

    /// Mass where both hold key values and they differ.
    pub fn mismatch_mass(&self) -> f64 {
        let k = 2 * self.l0 as usize + 1;
        (0..k)
            .flat_map(|i| (0..k).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| self.at(i, j))
            .sum()
    }

    /// Key-value block without renormalization.
    pub fn key_block(&self) -> Self {
        let n = self.dim();
        Self::from_fn(self.l0, false, |i, j| self.p[i * n + j])
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            p: self.p.iter().map(|x| x * factor).collect(),
            ..self.clone()
        }
    }

    /// Entrywise `a·self + b·other`; both must have the same shape.
    pub fn combine(&self, a: f64, other: &Self, b: f64) -> Self {
        assert_eq!(
            (self.l0, self.with_nokey),
            (other.l0, other.with_nokey),
            "shape mismatch"
        );
        Self {
            p: self
                .p
                .iter()
                .zip(&other.p)
                .map(|(x, y)| a * x + b * y)
                .collect(),
            ..self.clone()
        }
    }
}

/// Exact rational version of a [`JointDistribution`] (always with `NoKey`).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExactJoint {
    l0: u32,
    p: Vec<Rational64>,
}

impl ExactJoint {
    pub fn zeros(l0: u32) -> Self {
        let n = 2 * l0 as usize + 2;
        Self {
            l0,
            p: vec![Rational64::zero(); n * n],
        }
    }

    pub fn l0(&self) -> u32 {
        self.l0
    }

    pub fn dim(&self) -> usize {
        2 * self.l0 as usize + 2
    }

    pub fn get(&self, alice: KeySymbol, bob: KeySymbol) -> Rational64 {
        self.p[alice.index(self.l0) * self.dim() + bob.index(self.l0)]
    }

    pub fn add(&mut self, alice: KeySymbol, bob: KeySymbol, mass: Rational64) {
        let n = self.dim();
        self.p[alice.index(self.l0) * n + bob.index(self.l0)] += mass;
    }

    pub fn total(&self) -> Rational64 {
        self.p.iter().sum()
    }

    pub fn scaled(&self, factor: Rational64) -> Self {
        Self {
            l0: self.l0,
            p: self.p.iter().map(|x| x * factor).collect(),
        }
    }

    pub fn combine(&self, a: Rational64, other: &Self, b: Rational64) -> Self {
        assert_eq!(self.l0, other.l0, "shape mismatch");
        Self {
            l0: self.l0,
            p: self
                .p
                .iter()
                .zip(&other.p)
                .map(|(x, y)| a * x + b * y)
                .collect(),
        }
    }

    /// Rows and columns restricted to key values.
    pub fn key_block(&self) -> Vec<Vec<Rational64>> {
        let (n, k) = (self.dim(), self.dim() - 1);
        (0..k).map(|i| self.p[i * n..i * n + k].to_vec()).collect()
    }

    pub fn both_value_mass(&self) -> Rational64 {
        self.key_block().iter().flatten().sum()
    }

    /// `(mass of the NoKey row landing on key columns, NoKey/NoKey mass)`.
    pub fn nokey_row_totals(&self) -> (Rational64, Rational64) {
        let n = self.dim();
        let row = &self.p[(n - 1) * n..];
        (row[..n - 1].iter().sum(), row[n - 1])
    }

    pub fn to_f64(&self) -> JointDistribution {
        let n = self.dim();
        JointDistribution::from_fn(self.l0, true, |i, j| {
            self.p[i * n + j].to_f64().expect("finite rational")
        })
    }
}
