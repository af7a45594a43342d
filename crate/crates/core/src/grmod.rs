//! Exact graded linear algebra over the rationals.
//!
//! Maps act from the left, so `(f ⊗ g)(a ⊗ b) = (-1)^{|g||a|} f(a) ⊗ g(b)`
//! on homogeneous elements, composition is order-reversing and duals reverse
//! tensor factors. Scalars are arbitrary-precision rationals; degrees are
//! bounded machine integers and overflow is an error.
//!
//! Tensor components are ordered by concatenated leaf keys, which makes the
//! basis order independent of bracketing: `(A⊗B)⊗C` and `A⊗(B⊗C)` enumerate
//! identically, so blocks of maps built along different bracketings compose
//! soundly.

use num::{BigRational, One, Signed, Zero};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GrmodError {
    #[error("degree arithmetic overflow")]
    DegreeOverflow,
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("duplicate basis label `{0}` in degree {1}")]
    DuplicateLabel(String, i64),
    #[error("bad matrix block at source degree {degree}: expected {rows}x{cols}, got {got_rows}x{got_cols}")]
    BadBlock {
        degree: i64,
        rows: usize,
        cols: usize,
        got_rows: usize,
        got_cols: usize,
    },
    #[error("no basis slot (degree {0}, index {1})")]
    BadSlot(i64, usize),
    #[error("cannot parse rational `{0}`")]
    BadRational(String),
    #[error("singular matrix: {0}")]
    Singular(String),
}

pub type Result<T> = std::result::Result<T, GrmodError>;

pub fn checked_add(a: i64, b: i64) -> Result<i64> {
    a.checked_add(b).ok_or(GrmodError::DegreeOverflow)
}

pub fn checked_sub(a: i64, b: i64) -> Result<i64> {
    a.checked_sub(b).ok_or(GrmodError::DegreeOverflow)
}

/// `(-1)^n` for possibly negative `n`.
pub fn neg_one_pow(n: i64) -> i64 {
    if n.rem_euclid(2) == 0 {
        1
    } else {
        -1
    }
}

pub fn rat(n: i64) -> BigRational {
    BigRational::from_integer(n.into())
}

pub fn parse_rat(s: &str) -> Result<BigRational> {
    let s = s.trim();
    let parse_int = |t: &str| -> Result<num::BigInt> {
        t.trim()
            .parse::<num::BigInt>()
            .map_err(|_| GrmodError::BadRational(s.to_string()))
    };
    match s.split_once('/') {
        Some((p, q)) => {
            let q = parse_int(q)?;
            if q.is_zero() {
                return Err(GrmodError::BadRational(s.to_string()));
            }
            Ok(BigRational::new(parse_int(p)?, q))
        }
        None => Ok(BigRational::from_integer(parse_int(s)?)),
    }
}

pub fn rat_to_string(r: &BigRational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Leaf key of a basis slot; concatenation under tensor keeps ordering
/// associative across bracketings.
type Key = Vec<(i64, u32)>;

#[derive(Debug, Clone, PartialEq, Eq)]
struct BasisSlot {
    label: String,
    key: Key,
}

/// A finite free graded module: for each degree, an ordered list of basis labels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GradedModule {
    components: BTreeMap<i64, Vec<BasisSlot>>,
}

impl GradedModule {
    pub fn zero() -> Self {
        GradedModule {
            components: BTreeMap::new(),
        }
    }

    /// The monoidal unit: rank one in degree zero.
    pub fn unit() -> Self {
        GradedModule::from_basis([(0, "1")]).unwrap()
    }

    /// A rank-one module concentrated in `degree`.
    pub fn line(degree: i64, label: &str) -> Self {
        GradedModule::from_basis([(degree, label)]).unwrap()
    }

    pub fn from_basis<I, S>(basis: I) -> Result<Self>
    where
        I: IntoIterator<Item = (i64, S)>,
        S: AsRef<str>,
    {
        let mut components: BTreeMap<i64, Vec<BasisSlot>> = BTreeMap::new();
        for (deg, label) in basis {
            let label = label.as_ref();
            let slot = components.entry(deg).or_default();
            if slot.iter().any(|l| l.label == label) {
                return Err(GrmodError::DuplicateLabel(label.to_string(), deg));
            }
            let key = vec![(deg, slot.len() as u32)];
            slot.push(BasisSlot {
                label: label.to_string(),
                key,
            });
        }
        Ok(GradedModule { components })
    }

    pub fn from_labels(components: BTreeMap<i64, Vec<String>>) -> Result<Self> {
        let flat = components
            .into_iter()
            .flat_map(|(d, ls)| ls.into_iter().map(move |l| (d, l)));
        GradedModule::from_basis(flat)
    }

    pub fn labels(&self) -> BTreeMap<i64, Vec<String>> {
        self.components
            .iter()
            .map(|(&d, slots)| (d, slots.iter().map(|s| s.label.clone()).collect()))
            .collect()
    }

    pub fn rank(&self, degree: i64) -> usize {
        self.components.get(&degree).map_or(0, |v| v.len())
    }

    pub fn total_rank(&self) -> usize {
        self.components.values().map(|v| v.len()).sum()
    }

    pub fn degrees(&self) -> Vec<i64> {
        self.components.keys().copied().collect()
    }

    pub fn label(&self, degree: i64, index: usize) -> Option<&str> {
        self.components
            .get(&degree)
            .and_then(|v| v.get(index))
            .map(|s| s.label.as_str())
    }

    fn key(&self, degree: i64, index: usize) -> Option<&Key> {
        self.components
            .get(&degree)
            .and_then(|v| v.get(index))
            .map(|s| &s.key)
    }

    /// Canonical global enumeration: ascending degree, then index.
    pub fn basis(&self) -> Vec<(i64, usize)> {
        let mut out = Vec::new();
        for (&deg, slots) in &self.components {
            for i in 0..slots.len() {
                out.push((deg, i));
            }
        }
        out
    }

    /// Tensor product; ordering within a degree is by concatenated leaf keys
    /// (left-major lexicographic on leaves).
    pub fn tensor(&self, right: &GradedModule) -> Result<GradedModule> {
        let mut components: BTreeMap<i64, Vec<BasisSlot>> = BTreeMap::new();
        for (&i, ls) in &self.components {
            for (&j, rs) in &right.components {
                let k = checked_add(i, j)?;
                let slot = components.entry(k).or_default();
                for l in ls {
                    for r in rs {
                        let mut key = l.key.clone();
                        key.extend_from_slice(&r.key);
                        slot.push(BasisSlot {
                            label: format!("{}⊗{}", l.label, r.label),
                            key,
                        });
                    }
                }
            }
        }
        for slots in components.values_mut() {
            slots.sort_by(|a, b| a.key.cmp(&b.key));
        }
        Ok(GradedModule { components })
    }

    /// Degree shift by `n`: `(Σ^n A)_{i+n} = A_i`. The result is re-atomised:
    /// leaf structure is not preserved across suspension.
    pub fn suspend_by(&self, n: i64) -> Result<GradedModule> {
        let mut flat = Vec::new();
        for (&deg, slots) in &self.components {
            let nd = checked_add(deg, n)?;
            for s in slots {
                flat.push((nd, s.label.clone()));
            }
        }
        GradedModule::from_basis(flat)
    }

    pub fn suspend(&self) -> Result<GradedModule> {
        self.suspend_by(1)
    }

    /// `A^∨_k = (A_{-k})^∨`; a dual basis label per original label. Re-atomised.
    pub fn dual(&self) -> Result<GradedModule> {
        let mut flat = Vec::new();
        for (&deg, slots) in &self.components {
            let nd = checked_sub(0, deg)?;
            for s in slots {
                flat.push((nd, format!("{}^", s.label)));
            }
        }
        GradedModule::from_basis(flat)
    }

    /// Same component ranks in every degree (labels ignored).
    pub fn same_shape(&self, other: &GradedModule) -> bool {
        let degs: std::collections::BTreeSet<i64> = self
            .components
            .keys()
            .chain(other.components.keys())
            .copied()
            .collect();
        degs.into_iter().all(|d| self.rank(d) == other.rank(d))
    }
}

/// Position bookkeeping for tuples of basis slots of a factor list, in the
/// key-concatenation order.
pub struct TupleIndex<'a> {
    factors: Vec<&'a GradedModule>,
}

impl<'a> TupleIndex<'a> {
    pub fn new(factors: Vec<&'a GradedModule>) -> Self {
        TupleIndex { factors }
    }

    fn tuple_key(&self, tuple: &[(i64, usize)]) -> Key {
        let mut key = Key::new();
        for (m, &(d, i)) in self.factors.iter().zip(tuple) {
            key.extend_from_slice(m.key(d, i).expect("bad slot in tuple"));
        }
        key
    }

    /// All tuples with the given total degree, in canonical order.
    pub fn tuples_of_degree(&self, deg: i64) -> Vec<Vec<(i64, usize)>> {
        let mut acc: Vec<(Key, Vec<(i64, usize)>)> = Vec::new();
        let mut cur = Vec::new();
        self.rec(0, deg, &mut cur, &mut acc);
        acc.sort_by(|a, b| a.0.cmp(&b.0));
        acc.into_iter().map(|(_, t)| t).collect()
    }

    fn rec(
        &self,
        at: usize,
        remaining: i64,
        cur: &mut Vec<(i64, usize)>,
        acc: &mut Vec<(Key, Vec<(i64, usize)>)>,
    ) {
        if at == self.factors.len() {
            if remaining == 0 {
                acc.push((self.tuple_key(cur), cur.clone()));
            }
            return;
        }
        let min_rest: i64 = 0; // degrees may be negative; no pruning
        let _ = min_rest;
        for (&d, slots) in &self.factors[at].components {
            for i in 0..slots.len() {
                cur.push((d, i));
                self.rec(at + 1, remaining - d, cur, acc);
                cur.pop();
            }
        }
    }

    /// Flat index of `tuple` within its total-degree component.
    pub fn flat_index(&self, tuple: &[(i64, usize)]) -> usize {
        let deg: i64 = tuple.iter().map(|t| t.0).sum();
        let key = self.tuple_key(tuple);
        let mut count = 0usize;
        let mut cur = Vec::new();
        let mut acc = Vec::new();
        self.rec(0, deg, &mut cur, &mut acc);
        for (k, _) in &acc {
            if *k < key {
                count += 1;
            }
        }
        count
    }

    /// Tuple at flat position `idx` within the total-degree component.
    pub fn tuple_at(&self, deg: i64, idx: usize) -> Option<Vec<(i64, usize)>> {
        self.tuples_of_degree(deg).into_iter().nth(idx)
    }
}

/// Two-factor convenience wrapper.
pub struct TensorIndex<'a> {
    inner: TupleIndex<'a>,
}

impl<'a> TensorIndex<'a> {
    pub fn new(left: &'a GradedModule, right: &'a GradedModule) -> Self {
        TensorIndex {
            inner: TupleIndex::new(vec![left, right]),
        }
    }

    pub fn pair_to_flat(&self, _deg: i64, l: (i64, usize), r: (i64, usize)) -> usize {
        self.inner.flat_index(&[l, r])
    }

    pub fn flat_to_pair(&self, deg: i64, idx: usize) -> Option<((i64, usize), (i64, usize))> {
        self.inner.tuple_at(deg, idx).map(|t| (t[0], t[1]))
    }
}

/// Dense exact-rational matrix, row-major; `entry(r, c)` is the coefficient of
/// target basis `r` in the image of source basis `c`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Matrix {
    pub rows: usize,
    pub cols: usize,
    entries: Vec<BigRational>,
}

impl Matrix {
    pub fn zero(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            entries: vec![BigRational::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Matrix::zero(n, n);
        for i in 0..n {
            *m.entry_mut(i, i) = BigRational::one();
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<BigRational>>) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, |v| v.len());
        if rows.iter().any(|v| v.len() != c) {
            return Err(GrmodError::ShapeMismatch("ragged matrix rows".into()));
        }
        Ok(Matrix {
            rows: r,
            cols: c,
            entries: rows.into_iter().flatten().collect(),
        })
    }

    pub fn entry(&self, r: usize, c: usize) -> &BigRational {
        &self.entries[r * self.cols + c]
    }

    pub fn entry_mut(&mut self, r: usize, c: usize) -> &mut BigRational {
        &mut self.entries[r * self.cols + c]
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(|e| e.is_zero())
    }

    pub fn scale(&self, s: &BigRational) -> Matrix {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            entries: self.entries.iter().map(|e| e * s).collect(),
        }
    }

    pub fn add(&self, other: &Matrix) -> Result<Matrix> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(GrmodError::ShapeMismatch("matrix add".into()));
        }
        Ok(Matrix {
            rows: self.rows,
            cols: self.cols,
            entries: self
                .entries
                .iter()
                .zip(&other.entries)
                .map(|(a, b)| a + b)
                .collect(),
        })
    }

    pub fn mul(&self, other: &Matrix) -> Result<Matrix> {
        if self.cols != other.rows {
            return Err(GrmodError::ShapeMismatch(format!(
                "matrix mul {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Matrix::zero(self.rows, other.cols);
        for r in 0..self.rows {
            for k in 0..self.cols {
                let a = self.entry(r, k);
                if a.is_zero() {
                    continue;
                }
                for c in 0..other.cols {
                    let b = other.entry(k, c);
                    if !b.is_zero() {
                        *out.entry_mut(r, c) += a * b;
                    }
                }
            }
        }
        Ok(out)
    }

    pub fn transpose(&self) -> Matrix {
        let mut out = Matrix::zero(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                *out.entry_mut(c, r) = self.entry(r, c).clone();
            }
        }
        out
    }

    /// Gaussian elimination inverse; error names a kernel column if singular.
    pub fn inverse(&self) -> Result<Matrix> {
        if self.rows != self.cols {
            return Err(GrmodError::Singular("not square".into()));
        }
        let n = self.rows;
        let mut a = self.clone();
        let mut inv = Matrix::identity(n);
        for col in 0..n {
            let pivot = (col..n).find(|&r| !a.entry(r, col).is_zero());
            let Some(pivot) = pivot else {
                return Err(GrmodError::Singular(format!("kernel at column {col}")));
            };
            if pivot != col {
                for c in 0..n {
                    let tmp = a.entry(pivot, c).clone();
                    *a.entry_mut(pivot, c) = a.entry(col, c).clone();
                    *a.entry_mut(col, c) = tmp;
                    let tmp = inv.entry(pivot, c).clone();
                    *inv.entry_mut(pivot, c) = inv.entry(col, c).clone();
                    *inv.entry_mut(col, c) = tmp;
                }
            }
            let p = a.entry(col, col).clone();
            for c in 0..n {
                *a.entry_mut(col, c) = a.entry(col, c) / &p;
                *inv.entry_mut(col, c) = inv.entry(col, c) / &p;
            }
            for r in 0..n {
                if r == col || a.entry(r, col).is_zero() {
                    continue;
                }
                let factor = a.entry(r, col).clone();
                for c in 0..n {
                    let sub = &factor * a.entry(col, c);
                    *a.entry_mut(r, c) -= sub;
                    let sub = &factor * inv.entry(col, c);
                    *inv.entry_mut(r, c) -= sub;
                }
            }
        }
        Ok(inv)
    }

    pub fn det(&self) -> Result<BigRational> {
        if self.rows != self.cols {
            return Err(GrmodError::Singular("determinant of non-square".into()));
        }
        let n = self.rows;
        let mut a = self.clone();
        let mut det = BigRational::one();
        for col in 0..n {
            let pivot = (col..n).find(|&r| !a.entry(r, col).is_zero());
            let Some(pivot) = pivot else {
                return Ok(BigRational::zero());
            };
            if pivot != col {
                det = -det;
                for c in 0..n {
                    let tmp = a.entry(pivot, c).clone();
                    *a.entry_mut(pivot, c) = a.entry(col, c).clone();
                    *a.entry_mut(col, c) = tmp;
                }
            }
            let p = a.entry(col, col).clone();
            det *= &p;
            for r in col + 1..n {
                if a.entry(r, col).is_zero() {
                    continue;
                }
                let factor = a.entry(r, col) / &p;
                for c in col..n {
                    let sub = &factor * a.entry(col, c);
                    *a.entry_mut(r, c) -= sub;
                }
            }
        }
        Ok(det)
    }
}

/// A degree-homogeneous map of graded modules, stored as sparse blocks
/// `A_i -> B_{i + degree}`; absent blocks are zero.
///
/// Equality is semantic: same shapes, same degree, same blocks. Labels are
/// display metadata only.
#[derive(Debug, Clone)]
pub struct GradedMap {
    source: GradedModule,
    target: GradedModule,
    degree: i64,
    blocks: BTreeMap<i64, Matrix>,
}

impl PartialEq for GradedMap {
    fn eq(&self, other: &Self) -> bool {
        self.source.same_shape(&other.source)
            && self.target.same_shape(&other.target)
            && self.degree == other.degree
            && self.blocks == other.blocks
    }
}
impl Eq for GradedMap {}

impl GradedMap {
    pub fn zero(source: GradedModule, target: GradedModule, degree: i64) -> Self {
        GradedMap {
            source,
            target,
            degree,
            blocks: BTreeMap::new(),
        }
    }

    pub fn identity(module: &GradedModule) -> Self {
        let mut blocks = BTreeMap::new();
        for (&deg, slots) in &module.components {
            blocks.insert(deg, Matrix::identity(slots.len()));
        }
        GradedMap {
            source: module.clone(),
            target: module.clone(),
            degree: 0,
            blocks,
        }
    }

    pub fn from_blocks(
        source: GradedModule,
        target: GradedModule,
        degree: i64,
        blocks: BTreeMap<i64, Matrix>,
    ) -> Result<Self> {
        let mut kept = BTreeMap::new();
        for (deg, m) in blocks {
            let rows = target.rank(checked_add(deg, degree)?);
            let cols = source.rank(deg);
            if m.rows != rows || m.cols != cols {
                return Err(GrmodError::BadBlock {
                    degree: deg,
                    rows,
                    cols,
                    got_rows: m.rows,
                    got_cols: m.cols,
                });
            }
            if !m.is_zero() {
                kept.insert(deg, m);
            }
        }
        Ok(GradedMap {
            source,
            target,
            degree,
            blocks: kept,
        })
    }

    /// Build from an entry rule on basis slots: `entry(src_degree, row, col)`.
    pub fn from_entries<F>(
        source: &GradedModule,
        target: &GradedModule,
        degree: i64,
        mut entry: F,
    ) -> Result<Self>
    where
        F: FnMut(i64, usize, usize) -> BigRational,
    {
        let mut blocks = BTreeMap::new();
        for (&i, slots) in &source.components {
            let tdeg = checked_add(i, degree)?;
            let rows = target.rank(tdeg);
            if rows == 0 {
                continue;
            }
            let mut m = Matrix::zero(rows, slots.len());
            for c in 0..slots.len() {
                for r in 0..rows {
                    *m.entry_mut(r, c) = entry(i, r, c);
                }
            }
            blocks.insert(i, m);
        }
        GradedMap::from_blocks(source.clone(), target.clone(), degree, blocks)
    }

    pub fn source(&self) -> &GradedModule {
        &self.source
    }
    pub fn target(&self) -> &GradedModule {
        &self.target
    }
    pub fn degree(&self) -> i64 {
        self.degree
    }
    pub fn blocks(&self) -> &BTreeMap<i64, Matrix> {
        &self.blocks
    }

    pub fn block(&self, source_degree: i64) -> Matrix {
        match self.blocks.get(&source_degree) {
            Some(m) => m.clone(),
            None => Matrix::zero(
                self.target
                    .rank(source_degree.saturating_add(self.degree)),
                self.source.rank(source_degree),
            ),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.blocks.is_empty()
    }

    pub fn scale(&self, s: &BigRational) -> GradedMap {
        if s.is_zero() {
            return GradedMap::zero(self.source.clone(), self.target.clone(), self.degree);
        }
        GradedMap {
            source: self.source.clone(),
            target: self.target.clone(),
            degree: self.degree,
            blocks: self.blocks.iter().map(|(&d, m)| (d, m.scale(s))).collect(),
        }
    }

    pub fn scale_int(&self, s: i64) -> GradedMap {
        self.scale(&rat(s))
    }

    pub fn add(&self, other: &GradedMap) -> Result<GradedMap> {
        if !self.source.same_shape(&other.source)
            || !self.target.same_shape(&other.target)
            || self.degree != other.degree
        {
            return Err(GrmodError::ShapeMismatch("graded map add".into()));
        }
        let degs: std::collections::BTreeSet<i64> = self
            .blocks
            .keys()
            .chain(other.blocks.keys())
            .copied()
            .collect();
        let mut blocks = BTreeMap::new();
        for d in degs {
            blocks.insert(d, self.block(d).add(&other.block(d))?);
        }
        GradedMap::from_blocks(
            self.source.clone(),
            self.target.clone(),
            self.degree,
            blocks,
        )
    }

    /// `self ∘ other` (apply `other` first). Degrees add, no sign.
    pub fn compose(&self, other: &GradedMap) -> Result<GradedMap> {
        if !self.source.same_shape(&other.target) {
            return Err(GrmodError::ShapeMismatch(
                "compose: source of outer differs from target of inner".into(),
            ));
        }
        let degree = checked_add(self.degree, other.degree)?;
        let mut blocks = BTreeMap::new();
        for (&i, m) in &other.blocks {
            let mid = checked_add(i, other.degree)?;
            let outer = self.block(mid);
            let prod = outer.mul(m)?;
            if !prod.is_zero() {
                blocks.insert(i, prod);
            }
        }
        GradedMap::from_blocks(other.source.clone(), self.target.clone(), degree, blocks)
    }

    /// Koszul tensor of maps: `(f ⊗ g)(a ⊗ b) = (-1)^{|g||a|} f(a) ⊗ g(b)`.
    pub fn tensor(&self, g: &GradedMap) -> Result<GradedMap> {
        let f = self;
        let source = f.source.tensor(&g.source)?;
        let target = f.target.tensor(&g.target)?;
        let degree = checked_add(f.degree, g.degree)?;
        let src_index = TensorIndex::new(&f.source, &g.source);
        let dst_index = TensorIndex::new(&f.target, &g.target);
        let mut blocks: BTreeMap<i64, Matrix> = BTreeMap::new();
        for (&fi, fm) in &f.blocks {
            for (&gi, gm) in &g.blocks {
                let sdeg = checked_add(fi, gi)?;
                let tdeg = checked_add(sdeg, degree)?;
                let rows = target.rank(tdeg);
                let cols = source.rank(sdeg);
                if rows == 0 || cols == 0 {
                    continue;
                }
                let block = blocks
                    .entry(sdeg)
                    .or_insert_with(|| Matrix::zero(rows, cols));
                let sign = rat(neg_one_pow(g.degree * fi));
                let fo = checked_add(fi, f.degree)?;
                let go = checked_add(gi, g.degree)?;
                for fc in 0..fm.cols {
                    for gc in 0..gm.cols {
                        let col = src_index.pair_to_flat(sdeg, (fi, fc), (gi, gc));
                        for fr in 0..fm.rows {
                            let a = fm.entry(fr, fc);
                            if a.is_zero() {
                                continue;
                            }
                            for gr in 0..gm.rows {
                                let b = gm.entry(gr, gc);
                                if b.is_zero() {
                                    continue;
                                }
                                let row = dst_index.pair_to_flat(tdeg, (fo, fr), (go, gr));
                                *block.entry_mut(row, col) += &sign * a * b;
                            }
                        }
                    }
                }
            }
        }
        GradedMap::from_blocks(source, target, degree, blocks)
    }
}

/// n-ary Koszul tensor `f_1 ⊗ … ⊗ f_n` by left folding.
pub fn tensor_maps(fs: &[&GradedMap]) -> Result<GradedMap> {
    let mut iter = fs.iter();
    let first = iter
        .next()
        .ok_or_else(|| GrmodError::ShapeMismatch("empty tensor_maps".into()))?;
    let mut acc = (*first).clone();
    for f in iter {
        acc = acc.tensor(f)?;
    }
    Ok(acc)
}

/// The Koszul twist `τ(a ⊗ b) = (-1)^{|a||b|} b ⊗ a`.
pub fn twist(a: &GradedModule, b: &GradedModule) -> Result<GradedMap> {
    let source = a.tensor(b)?;
    let target = b.tensor(a)?;
    let src_index = TensorIndex::new(a, b);
    let dst_index = TensorIndex::new(b, a);
    let mut blocks = BTreeMap::new();
    for (&deg, slots) in &source.components {
        let n = slots.len();
        let mut m = Matrix::zero(target.rank(deg), n);
        for col in 0..n {
            let ((i, li), (j, ri)) = src_index.flat_to_pair(deg, col).unwrap();
            let row = dst_index.pair_to_flat(deg, (j, ri), (i, li));
            *m.entry_mut(row, col) = rat(neg_one_pow(i * j));
        }
        blocks.insert(deg, m);
    }
    GradedMap::from_blocks(source, target, 0, blocks)
}

/// The Koszul-signed permutation map `M_1 ⊗ … ⊗ M_n -> M_{π^{-1}(0)} ⊗ …`,
/// sending the factor at position `i` to position `perm[i]`.
pub fn permute_factors(modules: &[&GradedModule], perm: &[usize]) -> Result<GradedMap> {
    let n = modules.len();
    assert_eq!(perm.len(), n);
    let mut target_order = vec![0usize; n];
    for (i, &p) in perm.iter().enumerate() {
        target_order[p] = i;
    }
    let source = tensor_all(modules)?;
    let target_mods: Vec<&GradedModule> = target_order.iter().map(|&i| modules[i]).collect();
    let target = tensor_all(&target_mods)?;
    let src_index = TupleIndex::new(modules.to_vec());
    let dst_index = TupleIndex::new(target_mods.clone());

    let mut blocks: BTreeMap<i64, Matrix> = BTreeMap::new();
    for &deg in source.components.keys() {
        let tuples = src_index.tuples_of_degree(deg);
        let rows = target.rank(deg);
        let cols = tuples.len();
        let mut m = Matrix::zero(rows, cols);
        for (col, tuple) in tuples.iter().enumerate() {
            let mut permuted = vec![(0i64, 0usize); n];
            for (i, &t) in tuple.iter().enumerate() {
                permuted[perm[i]] = t;
            }
            let row = dst_index.flat_index(&permuted);
            let degs: Vec<i64> = tuple.iter().map(|t| t.0).collect();
            *m.entry_mut(row, col) = rat(koszul_permutation_sign(&degs, perm));
        }
        blocks.insert(deg, m);
    }
    GradedMap::from_blocks(source, target, 0, blocks)
}

/// Sign of moving homogeneous letters of degrees `degs` so that letter `i`
/// ends at position `perm[i]`: product of `(-1)^{|x||y|}` over inversions.
pub fn koszul_permutation_sign(degs: &[i64], perm: &[usize]) -> i64 {
    let mut sign = 1i64;
    for i in 0..degs.len() {
        for j in i + 1..degs.len() {
            if perm[i] > perm[j] && neg_one_pow(degs[i]) == -1 && neg_one_pow(degs[j]) == -1 {
                sign = -sign;
            }
        }
    }
    sign
}

pub fn tensor_all(modules: &[&GradedModule]) -> Result<GradedModule> {
    if modules.is_empty() {
        return Ok(GradedModule::unit());
    }
    let mut acc = modules[0].clone();
    for m in &modules[1..] {
        acc = acc.tensor(m)?;
    }
    Ok(acc)
}

pub fn tensor_power(a: &GradedModule, k: usize) -> Result<GradedModule> {
    let mods: Vec<&GradedModule> = std::iter::repeat(a).take(k).collect();
    tensor_all(&mods)
}

pub fn basis_tuples(a: &GradedModule, k: usize) -> Vec<Vec<(i64, usize)>> {
    let slots = a.basis();
    let mut out = Vec::new();
    let mut cur = Vec::new();
    fn rec(
        slots: &[(i64, usize)],
        k: usize,
        cur: &mut Vec<(i64, usize)>,
        out: &mut Vec<Vec<(i64, usize)>>,
    ) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for &s in slots {
            cur.push(s);
            rec(slots, k, cur, out);
            cur.pop();
        }
    }
    rec(&slots, k, &mut cur, &mut out);
    out
}

/// Flat index of a basis tuple inside `A^{⊗k}` in its total-degree component.
pub fn tuple_flat_index(a: &GradedModule, tuple: &[(i64, usize)]) -> usize {
    let mods: Vec<&GradedModule> = std::iter::repeat(a).take(tuple.len()).collect();
    TupleIndex::new(mods).flat_index(tuple)
}

/// Suspension of `f : A^{⊗k} -> A^{⊗l}` to `(Σ^n A)^{⊗k} -> (Σ^n A)^{⊗l}`,
/// i.e. tensoring with the canonical generator `σ_{k,l}` of the suspension
/// line maps, with the Koszul signs the construction induces. `n = 1` is
/// suspension, `n = -1` the paper-style desuspension `Σ^{-1}` (note
/// `Σ^{-1} Σ f = (-1)^{k(k-1)/2 + l(l-1)/2} f`; the two are inverse only up
/// to that sign).
pub fn suspend_map_by(
    f: &GradedMap,
    k: usize,
    l: usize,
    a: &GradedModule,
    n: i64,
) -> Result<GradedMap> {
    let expect_src = tensor_power(a, k)?;
    let expect_tgt = tensor_power(a, l)?;
    if !f.source().same_shape(&expect_src) || !f.target().same_shape(&expect_tgt) {
        return Err(GrmodError::ShapeMismatch(format!(
            "suspend_map: map is not A^⊗{k} -> A^⊗{l} for the given A"
        )));
    }
    let step = if n >= 0 { 1 } else { -1 };
    let mut cur = f.clone();
    let mut cur_a = a.clone();
    for _ in 0..n.unsigned_abs() {
        cur = suspend_map_once(&cur, k, l, &cur_a, step)?;
        cur_a = cur_a.suspend_by(step)?;
    }
    Ok(cur)
}

fn suspend_map_once(
    f: &GradedMap,
    k: usize,
    l: usize,
    a: &GradedModule,
    step: i64,
) -> Result<GradedMap> {
    let sa = a.suspend_by(step)?;
    let source = tensor_power(&sa, k)?;
    let target = tensor_power(&sa, l)?;
    let degree = checked_add(f.degree(), step * (l as i64 - k as i64))?;

    let mut blocks: BTreeMap<i64, Matrix> = BTreeMap::new();
    for tuple in basis_tuples(a, k) {
        let sdeg_a: i64 = tuple.iter().map(|t| t.0).sum();
        let col_in_a = tuple_flat_index(a, &tuple);
        let sdeg = sdeg_a + step * k as i64;
        let cols = source.rank(sdeg);
        let tdeg = checked_add(sdeg, degree)?;
        let rows = target.rank(tdeg);
        if rows == 0 || cols == 0 {
            continue;
        }
        // Regroup sign: pulling the k suspension generators out to the left;
        // letter i (0-based) is crossed by k-1-i generators.
        let mut regroup_src = 0i64;
        for (i, t) in tuple.iter().enumerate() {
            regroup_src += (k as i64 - 1 - i as i64) * t.0;
        }
        // (σ ⊗ f) evaluation: f crosses the k odd suspension generators.
        let eval = f.degree() * k as i64;

        let fblock = f.block(sdeg_a);
        for ttuple in basis_tuples(a, l) {
            let tdeg_a: i64 = ttuple.iter().map(|t| t.0).sum();
            if tdeg_a != sdeg_a + f.degree() {
                continue;
            }
            let row_in_a = tuple_flat_index(a, &ttuple);
            if fblock.rows <= row_in_a || fblock.cols <= col_in_a {
                continue;
            }
            let coef = fblock.entry(row_in_a, col_in_a).clone();
            if coef.is_zero() {
                continue;
            }
            let mut regroup_tgt = 0i64;
            for (j, t) in ttuple.iter().enumerate() {
                regroup_tgt += (l as i64 - 1 - j as i64) * t.0;
            }
            let sign = neg_one_pow(regroup_src + eval + regroup_tgt);
            let stuple: Vec<(i64, usize)> = tuple.iter().map(|&(d, i)| (d + step, i)).collect();
            let sttuple: Vec<(i64, usize)> = ttuple.iter().map(|&(d, i)| (d + step, i)).collect();
            let col = tuple_flat_index(&sa, &stuple);
            let row = tuple_flat_index(&sa, &sttuple);
            let block = blocks
                .entry(sdeg)
                .or_insert_with(|| Matrix::zero(rows, cols));
            *block.entry_mut(row, col) += rat(sign) * coef;
        }
    }
    GradedMap::from_blocks(source, target, degree, blocks)
}

/// Dual map: `f^∨(φ) = (-1)^{|f||φ|} φ ∘ f`, so `(f∘g)^∨ = (-1)^{|f||g|} g^∨ ∘ f^∨`
/// and the double dual is `ι ∘ f ∘ ι^{-1}` for `ι = diag((-1)^{|a|})`.
pub fn dual_map(f: &GradedMap) -> Result<GradedMap> {
    let source = f.target().dual()?;
    let target = f.source().dual()?;
    let degree = f.degree();
    let mut blocks = BTreeMap::new();
    for (&i, m) in f.blocks() {
        // f_i : A_i -> B_{i+deg}; dual block: (B^∨)_{-i-deg} -> (A^∨)_{-i}.
        let src_deg = -(checked_add(i, degree)?);
        let sign = neg_one_pow(degree * (i + degree));
        let mt = m.transpose().scale(&rat(sign));
        if !mt.is_zero() {
            blocks.insert(src_deg, mt);
        }
    }
    GradedMap::from_blocks(source, target, degree, blocks)
}

/// An element of a graded module: exact coefficients on basis slots.
#[derive(Debug, Clone, PartialEq)]
pub struct Element {
    module: GradedModule,
    coeffs: BTreeMap<(i64, usize), BigRational>,
}

impl Element {
    pub fn zero(module: &GradedModule) -> Self {
        Element {
            module: module.clone(),
            coeffs: BTreeMap::new(),
        }
    }

    pub fn basis(module: &GradedModule, degree: i64, index: usize) -> Result<Self> {
        if module.label(degree, index).is_none() {
            return Err(GrmodError::BadSlot(degree, index));
        }
        let mut coeffs = BTreeMap::new();
        coeffs.insert((degree, index), BigRational::one());
        Ok(Element {
            module: module.clone(),
            coeffs,
        })
    }

    pub fn from_coeffs(
        module: &GradedModule,
        coeffs: BTreeMap<(i64, usize), BigRational>,
    ) -> Result<Self> {
        for (&(d, i), _) in &coeffs {
            if module.label(d, i).is_none() {
                return Err(GrmodError::BadSlot(d, i));
            }
        }
        Ok(Element {
            module: module.clone(),
            coeffs: coeffs.into_iter().filter(|(_, c)| !c.is_zero()).collect(),
        })
    }

    pub fn module(&self) -> &GradedModule {
        &self.module
    }

    pub fn coeffs(&self) -> &BTreeMap<(i64, usize), BigRational> {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// `Some(degree)` when all nonzero coefficients sit in one degree.
    pub fn homogeneous_degree(&self) -> Option<i64> {
        let mut deg = None;
        for (&(d, _), _) in &self.coeffs {
            match deg {
                None => deg = Some(d),
                Some(d0) if d0 != d => return None,
                _ => {}
            }
        }
        deg
    }

    pub fn apply(&self, f: &GradedMap) -> Result<Element> {
        if !f.source().same_shape(&self.module) {
            return Err(GrmodError::ShapeMismatch("element apply".into()));
        }
        let mut coeffs: BTreeMap<(i64, usize), BigRational> = BTreeMap::new();
        for (&(d, i), c) in &self.coeffs {
            let block = f.block(d);
            let td = checked_add(d, f.degree())?;
            for r in 0..block.rows {
                let e = block.entry(r, i);
                if !e.is_zero() {
                    *coeffs.entry((td, r)).or_insert_with(BigRational::zero) += c * e;
                }
            }
        }
        coeffs.retain(|_, c| !c.is_zero());
        Ok(Element {
            module: f.target().clone(),
            coeffs,
        })
    }
}

impl fmt::Display for Element {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coeffs.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (&(d, i), c) in &self.coeffs {
            let label = self.module.label(d, i).unwrap_or("?");
            if first {
                first = false;
                if *c == BigRational::one() {
                    write!(f, "{label}")?;
                } else if *c == -BigRational::one() {
                    write!(f, "-{label}")?;
                } else {
                    write!(f, "{}·{label}", rat_to_string(c))?;
                }
            } else if c.is_positive() {
                if *c == BigRational::one() {
                    write!(f, " + {label}")?;
                } else {
                    write!(f, " + {}·{label}", rat_to_string(c))?;
                }
            } else if *c == -BigRational::one() {
                write!(f, " - {label}")?;
            } else {
                write!(f, " - {}·{label}", rat_to_string(&-c.clone()))?;
            }
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// JSON serialization: degrees as integers, matrices as row-major "p/q" strings.
// Serialized modules are flat: leaf structure is not preserved.
// ---------------------------------------------------------------------------

#[derive(Serialize, Deserialize)]
pub struct GradedModuleJson {
    pub components: BTreeMap<String, Vec<String>>,
}

#[derive(Serialize, Deserialize)]
pub struct GradedMapJson {
    pub source: GradedModuleJson,
    pub target: GradedModuleJson,
    pub degree: i64,
    pub blocks: BTreeMap<String, Vec<Vec<String>>>,
}

#[derive(Serialize, Deserialize)]
pub struct ElementJson {
    pub module: GradedModuleJson,
    pub coefficients: Vec<(i64, usize, String)>,
}

fn parse_deg(d: &str) -> Result<i64> {
    d.parse()
        .map_err(|_| GrmodError::BadRational(format!("degree `{d}`")))
}

impl GradedModule {
    pub fn to_json(&self) -> GradedModuleJson {
        GradedModuleJson {
            components: self
                .components
                .iter()
                .map(|(d, slots)| {
                    (
                        d.to_string(),
                        slots.iter().map(|s| s.label.clone()).collect(),
                    )
                })
                .collect(),
        }
    }

    pub fn from_json(j: &GradedModuleJson) -> Result<Self> {
        let mut components = BTreeMap::new();
        for (d, l) in &j.components {
            components.insert(parse_deg(d)?, l.clone());
        }
        GradedModule::from_labels(components)
    }
}

impl GradedMap {
    pub fn to_json(&self) -> GradedMapJson {
        GradedMapJson {
            source: self.source.to_json(),
            target: self.target.to_json(),
            degree: self.degree,
            blocks: self
                .blocks
                .iter()
                .map(|(d, m)| {
                    let rows = (0..m.rows)
                        .map(|r| (0..m.cols).map(|c| rat_to_string(m.entry(r, c))).collect())
                        .collect();
                    (d.to_string(), rows)
                })
                .collect(),
        }
    }

    pub fn from_json(j: &GradedMapJson) -> Result<Self> {
        let source = GradedModule::from_json(&j.source)?;
        let target = GradedModule::from_json(&j.target)?;
        let mut blocks = BTreeMap::new();
        for (d, rows) in &j.blocks {
            let mut parsed = Vec::new();
            for row in rows {
                let mut prow = Vec::new();
                for e in row {
                    prow.push(parse_rat(e)?);
                }
                parsed.push(prow);
            }
            blocks.insert(parse_deg(d)?, Matrix::from_rows(parsed)?);
        }
        GradedMap::from_blocks(source, target, j.degree, blocks)
    }
}

impl Element {
    pub fn to_json(&self) -> ElementJson {
        ElementJson {
            module: self.module.to_json(),
            coefficients: self
                .coeffs
                .iter()
                .map(|(&(d, i), c)| (d, i, rat_to_string(c)))
                .collect(),
        }
    }

    pub fn from_json(j: &ElementJson) -> Result<Self> {
        let module = GradedModule::from_json(&j.module)?;
        let mut coeffs = BTreeMap::new();
        for (d, i, c) in &j.coefficients {
            coeffs.insert((*d, *i), parse_rat(c)?);
        }
        Element::from_coeffs(&module, coeffs)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn line(deg: i64, label: &str) -> GradedModule {
        GradedModule::line(deg, label)
    }

    #[test]
    fn tensor_module_unit_law() {
        let a = GradedModule::from_basis([(0, "u"), (2, "w"), (2, "z")]).unwrap();
        let t = GradedModule::unit().tensor(&a).unwrap();
        assert!(t.same_shape(&a));
        assert_eq!(t.label(2, 1), Some("1⊗z"));
    }

    #[test]
    fn tensor_module_degree_adds() {
        let t = line(1, "a").tensor(&line(1, "b")).unwrap();
        assert_eq!(t.rank(2), 1);
        assert_eq!(t.total_rank(), 1);
    }

    #[test]
    fn tensor_module_direct_sum_count() {
        let a = GradedModule::from_basis([(0, "x"), (2, "y")]).unwrap();
        let sq = a.tensor(&a).unwrap();
        assert_eq!(sq.rank(0), 1);
        assert_eq!(sq.rank(2), 2);
        assert_eq!(sq.rank(4), 1);
        assert_eq!(sq.total_rank(), 4);
    }

    #[test]
    fn tensor_basis_order_is_bracket_independent() {
        let a = GradedModule::from_basis([(0, "x"), (1, "y"), (2, "z")]).unwrap();
        let left = a.tensor(&a).unwrap().tensor(&a).unwrap();
        let right = a.tensor(&a.tensor(&a).unwrap()).unwrap();
        for deg in left.degrees() {
            for i in 0..left.rank(deg) {
                // labels are flat strings so they must agree slot by slot
                assert_eq!(left.label(deg, i), right.label(deg, i), "deg {deg} slot {i}");
            }
        }
        // and maps built along different bracketings agree
        let id = GradedMap::identity(&a);
        let f = GradedMap::from_entries(&a.tensor(&a).unwrap(), &a, 0, |_, r, c| {
            rat(((r + 2 * c) % 3) as i64)
        })
        .unwrap();
        let lhs = f.tensor(&id).unwrap();
        let rhs_src = a.tensor(&a.tensor(&a).unwrap()).unwrap();
        assert!(lhs.source().same_shape(&rhs_src));
    }

    #[test]
    fn compose_identity_and_degree() {
        let a = GradedModule::from_basis([(0, "x"), (1, "y")]).unwrap();
        let b = a.suspend().unwrap();
        let f = GradedMap::from_entries(&a, &b, 1, |_, r, c| if r == c { rat(3) } else { rat(0) })
            .unwrap();
        let id_b = GradedMap::identity(&b);
        assert_eq!(id_b.compose(&f).unwrap(), f);
        let g = GradedMap::from_entries(&b, &b.suspend().unwrap(), 1, |_, r, c| {
            if r == c {
                rat(1)
            } else {
                rat(0)
            }
        })
        .unwrap();
        assert_eq!(g.compose(&f).unwrap().degree(), 2);
    }

    /// ε∘μ on the (1,1) two-line algebra: tables from the rank-2 example.
    #[test]
    fn eps_mu_sign_on_two_line_algebra() {
        let a = GradedModule::from_basis([(-1, "x"), (1, "y")]).unwrap();
        let aa = a.tensor(&a).unwrap();
        let idx = TensorIndex::new(&a, &a);
        let mut blocks = BTreeMap::new();
        {
            // mu(x⊗y) = -y, mu(y⊗x) = -y at c=d=1; x⊗x ↦ -x; y⊗y ↦ 0
            let mut m = Matrix::zero(1, 2);
            *m.entry_mut(0, idx.pair_to_flat(0, (-1, 0), (1, 0))) = rat(-1);
            *m.entry_mut(0, idx.pair_to_flat(0, (1, 0), (-1, 0))) = rat(-1);
            blocks.insert(0, m);
            let mut m = Matrix::zero(1, 1);
            *m.entry_mut(0, 0) = rat(-1);
            blocks.insert(-2, m);
        }
        let mu = GradedMap::from_blocks(aa.clone(), a.clone(), 1, blocks).unwrap();
        let eps = GradedMap::from_entries(&a, &GradedModule::unit(), -1, |i, _, _| {
            if i == 1 {
                rat(1)
            } else {
                rat(0)
            }
        })
        .unwrap();
        let p = eps.compose(&mu).unwrap();
        let yx = Element::basis(&aa, 0, idx.pair_to_flat(0, (1, 0), (-1, 0))).unwrap();
        let out = yx.apply(&p).unwrap();
        assert_eq!(out.coeffs().get(&(0, 0)), Some(&rat(-1)));
    }

    #[test]
    fn tensor_map_identity_and_koszul() {
        let a = GradedModule::from_basis([(0, "x"), (1, "y")]).unwrap();
        let id = GradedMap::identity(&a);
        let idid = id.tensor(&id).unwrap();
        assert_eq!(idid, GradedMap::identity(&a.tensor(&a).unwrap()));

        let l = line(1, "a");
        let m0 = line(0, "b");
        let m1 = line(1, "gb");
        let f = GradedMap::identity(&l);
        let g = GradedMap::from_entries(&m0, &m1, 1, |_, _, _| rat(1)).unwrap();
        let fg = f.tensor(&g).unwrap();
        let src = l.tensor(&m0).unwrap();
        let e = Element::basis(&src, 1, 0).unwrap();
        let out = e.apply(&fg).unwrap();
        assert_eq!(out.coeffs().get(&(2, 0)), Some(&rat(-1)));
    }

    #[test]
    fn twist_signs_and_involution() {
        let d0 = line(0, "p");
        let d1a = line(1, "a");
        let d1b = line(1, "b");
        let t = twist(&d0, &d0).unwrap();
        assert_eq!(*t.block(0).entry(0, 0), rat(1));
        let t = twist(&d1a, &d1b).unwrap();
        assert_eq!(*t.block(2).entry(0, 0), rat(-1));
        let a = GradedModule::from_basis([(0, "x"), (1, "y"), (2, "z")]).unwrap();
        let b = GradedModule::from_basis([(0, "u"), (1, "v")]).unwrap();
        let t1 = twist(&a, &b).unwrap();
        let t2 = twist(&b, &a).unwrap();
        let square = t2.compose(&t1).unwrap();
        assert_eq!(square, GradedMap::identity(&a.tensor(&b).unwrap()));
    }

    fn random_module(rng: &mut StdRng) -> GradedModule {
        let mut basis = Vec::new();
        let mut n = 0;
        for deg in -2..=2i64 {
            let r = rng.gen_range(0..=2usize);
            for i in 0..r {
                basis.push((deg, format!("m{deg}_{i}_{n}")));
                n += 1;
            }
            if basis.len() >= 3 {
                break;
            }
        }
        if basis.is_empty() {
            basis.push((0, "solo".to_string()));
        }
        GradedModule::from_basis(basis).unwrap()
    }

    fn random_map(rng: &mut StdRng, src: &GradedModule, dst: &GradedModule, deg: i64) -> GradedMap {
        GradedMap::from_entries(src, dst, deg, |_, _, _| rat(rng.gen_range(-2..=2))).unwrap()
    }

    #[test]
    fn interchange_with_signs() {
        let mut rng = StdRng::seed_from_u64(7);
        for _ in 0..30 {
            let a = random_module(&mut rng);
            let b = random_module(&mut rng);
            let c = random_module(&mut rng);
            let d = random_module(&mut rng);
            let e = random_module(&mut rng);
            let w = random_module(&mut rng);
            let df = rng.gen_range(-2..=2i64);
            let dg = rng.gen_range(-2..=2i64);
            let dh = rng.gen_range(-2..=2i64);
            let dk = rng.gen_range(-2..=2i64);
            let h = random_map(&mut rng, &a, &b, dh);
            let f = random_map(&mut rng, &b, &c, df);
            let k = random_map(&mut rng, &d, &e, dk);
            let g = random_map(&mut rng, &e, &w, dg);
            let lhs = f
                .tensor(&g)
                .unwrap()
                .compose(&h.tensor(&k).unwrap())
                .unwrap();
            let rhs = f
                .compose(&h)
                .unwrap()
                .tensor(&g.compose(&k).unwrap())
                .unwrap()
                .scale_int(neg_one_pow(dg * dh));
            assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn twist_naturality() {
        let mut rng = StdRng::seed_from_u64(11);
        for _ in 0..20 {
            let a = random_module(&mut rng);
            let b = random_module(&mut rng);
            let c = random_module(&mut rng);
            let d = random_module(&mut rng);
            let df = rng.gen_range(-2..=2i64);
            let dg = rng.gen_range(-2..=2i64);
            let f = random_map(&mut rng, &a, &b, df);
            let g = random_map(&mut rng, &c, &d, dg);
            let lhs = twist(&b, &d)
                .unwrap()
                .compose(&f.tensor(&g).unwrap())
                .unwrap();
            let rhs = g
                .tensor(&f)
                .unwrap()
                .compose(&twist(&a, &c).unwrap())
                .unwrap()
                .scale_int(neg_one_pow(df * dg));
            assert_eq!(lhs, rhs);
        }
    }

    fn random_power_map(rng: &mut StdRng, a: &GradedModule, k: usize, l: usize) -> GradedMap {
        let src = tensor_power(a, k).unwrap();
        let dst = tensor_power(a, l).unwrap();
        let deg = rng.gen_range(-2..=2i64);
        random_map(rng, &src, &dst, deg)
    }

    #[test]
    fn sigma_identity_on_id_and_twist() {
        let a = GradedModule::from_basis([(0, "x"), (1, "y")]).unwrap();
        let id2 = GradedMap::identity(&tensor_power(&a, 2).unwrap());
        let s = suspend_map_by(&id2, 2, 2, &a, 1).unwrap();
        let sa = a.suspend().unwrap();
        assert_eq!(s, GradedMap::identity(&tensor_power(&sa, 2).unwrap()));
        let t = twist(&a, &a).unwrap();
        let st = suspend_map_by(&t, 2, 2, &a, 1).unwrap();
        assert_eq!(st, twist(&sa, &sa).unwrap().scale_int(-1));
    }

    #[test]
    fn sigma_signs_all_four() {
        let mut rng = StdRng::seed_from_u64(23);
        for _ in 0..25 {
            let a = random_module(&mut rng);
            let k = rng.gen_range(0..=2usize);
            let l = rng.gen_range(0..=2usize);
            let m = rng.gen_range(0..=2usize);
            let n = rng.gen_range(0..=2usize);
            let f = random_power_map(&mut rng, &a, k, l);
            let g = random_power_map(&mut rng, &a, m, n);
            let sf = suspend_map_by(&f, k, l, &a, 1).unwrap();
            let sg = suspend_map_by(&g, m, n, &a, 1).unwrap();
            let lhs = sf.tensor(&sg).unwrap();
            let fg = f.tensor(&g).unwrap();
            let rhs = suspend_map_by(&fg, k + m, l + n, &a, 1)
                .unwrap()
                .scale_int(neg_one_pow((n as i64 - m as i64) * (f.degree() + k as i64)));
            assert_eq!(lhs, rhs, "tensor sign failed k={k} l={l} m={m} n={n}");
            if n == k {
                let lhs = sf.compose(&sg).unwrap();
                let rhs = suspend_map_by(&f.compose(&g).unwrap(), m, l, &a, 1)
                    .unwrap()
                    .scale_int(neg_one_pow((n as i64 - m as i64) * f.degree()));
                assert_eq!(lhs, rhs, "composition sign failed");
            }
        }
    }

    #[test]
    fn desuspension_is_paper_sigma_inverse_up_to_sign() {
        // Σ^{-1} Σ f = (-1)^{k(k-1)/2 + l(l-1)/2} f
        let mut rng = StdRng::seed_from_u64(5);
        for (k, l) in [(2, 1), (1, 2), (2, 2), (1, 1), (0, 2)] {
            let a = random_module(&mut rng);
            let f = random_power_map(&mut rng, &a, k, l);
            let up = suspend_map_by(&f, k, l, &a, 1).unwrap();
            let sa = a.suspend().unwrap();
            let down = suspend_map_by(&up, k, l, &sa, -1).unwrap();
            let kk = k as i64;
            let ll = l as i64;
            assert_eq!(
                down,
                f.scale_int(neg_one_pow(kk * (kk - 1) / 2 + ll * (ll - 1) / 2)),
                "k={k} l={l}"
            );
        }
    }

    #[test]
    fn dual_module_and_line() {
        assert_eq!(GradedModule::unit().dual().unwrap().rank(0), 1);
        let l = line(3, "a").dual().unwrap();
        assert_eq!(l.rank(-3), 1);
    }

    #[test]
    fn dual_map_contravariant_with_sign() {
        let mut rng = StdRng::seed_from_u64(31);
        for _ in 0..20 {
            let a = random_module(&mut rng);
            let b = random_module(&mut rng);
            let c = random_module(&mut rng);
            let dg = rng.gen_range(-2..=2i64);
            let df = rng.gen_range(-2..=2i64);
            let g = random_map(&mut rng, &a, &b, dg);
            let f = random_map(&mut rng, &b, &c, df);
            let lhs = dual_map(&f.compose(&g).unwrap()).unwrap();
            let rhs = dual_map(&g)
                .unwrap()
                .compose(&dual_map(&f).unwrap())
                .unwrap()
                .scale_int(neg_one_pow(df * dg));
            assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn double_dual_is_naturally_identity() {
        // (f^∨)^∨ = ι ∘ f ∘ ι^{-1} with ι = diag((-1)^{|a|}), i.e. blocks
        // scale by (-1)^{|f|}.
        let mut rng = StdRng::seed_from_u64(37);
        for _ in 0..20 {
            let a = random_module(&mut rng);
            let b = random_module(&mut rng);
            let df = rng.gen_range(-2..=2i64);
            let f = random_map(&mut rng, &a, &b, df);
            let dd = dual_map(&dual_map(&f).unwrap()).unwrap();
            assert_eq!(dd, f.scale_int(neg_one_pow(df)));
        }
    }

    #[test]
    fn dual_evaluation_order_reversing() {
        // b^∨⊗a^∨ evaluated on a⊗b gives +1; a^∨⊗b^∨ (routed with the twist)
        // gives (-1)^{|a||b|}.
        let la = line(1, "a");
        let lb = line(1, "b");
        let ev = |x: &GradedModule| {
            let xd = x.dual().unwrap();
            GradedMap::from_entries(
                &xd.tensor(x).unwrap(),
                &GradedModule::unit(),
                0,
                |_, _, _| rat(1),
            )
            .unwrap()
        };
        let eva = ev(&la);
        let evb = ev(&lb);
        let idb = GradedMap::identity(&lb.dual().unwrap());
        let idb2 = GradedMap::identity(&lb);
        let stage1 = idb.tensor(&eva).unwrap().tensor(&idb2).unwrap();
        let total = evb.compose(&stage1).unwrap();
        let src = lb
            .dual()
            .unwrap()
            .tensor(&la.dual().unwrap())
            .unwrap()
            .tensor(&la)
            .unwrap()
            .tensor(&lb)
            .unwrap();
        let e = Element::basis(&src, 0, 0).unwrap();
        let out = e.apply(&total).unwrap();
        assert_eq!(out.coeffs().get(&(0, 0)), Some(&rat(1)));

        let tw = twist(&lb.dual().unwrap(), &la).unwrap();
        let ida = GradedMap::identity(&la.dual().unwrap());
        let route = ida.tensor(&tw).unwrap().tensor(&idb2).unwrap();
        let inner = eva.tensor(&evb).unwrap();
        let total2 = inner.compose(&route).unwrap();
        let src2 = la
            .dual()
            .unwrap()
            .tensor(&lb.dual().unwrap())
            .unwrap()
            .tensor(&la)
            .unwrap()
            .tensor(&lb)
            .unwrap();
        let e2 = Element::basis(&src2, 0, 0).unwrap();
        let out2 = e2.apply(&total2).unwrap();
        assert_eq!(out2.coeffs().get(&(0, 0)), Some(&rat(-1)));
    }

    #[test]
    fn json_roundtrip() {
        let mut rng = StdRng::seed_from_u64(41);
        let a = random_module(&mut rng);
        let b = random_module(&mut rng);
        let f = random_map(&mut rng, &a, &b, 1);
        let j = serde_json::to_string(&f.to_json()).unwrap();
        let back: GradedMapJson = serde_json::from_str(&j).unwrap();
        assert_eq!(GradedMap::from_json(&back).unwrap(), f);
    }

    #[test]
    fn degree_overflow_is_error() {
        let a = line(i64::MAX, "hot");
        assert!(a.suspend().is_err());
    }

    #[test]
    fn permute_factors_koszul() {
        let a = line(1, "a");
        let b = line(1, "b");
        let c = line(0, "c");
        // rotate (a,b,c) -> (b,c,a): a crosses b and c; only a,b odd => sign -1
        let p = permute_factors(&[&a, &b, &c], &[2, 0, 1]).unwrap();
        assert_eq!(*p.block(2).entry(0, 0), rat(-1));
    }
}
