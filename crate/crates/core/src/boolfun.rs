//! Boolean functions over an ordered list of variables, stored extensionally
//! as the set of their models.
//!
//! A model of an `n`-ary function is a bit tuple `(b_1, …, b_n)`. Position 1
//! is the most significant digit when a model is read as a binary number, so
//! `101` has value 5 and sorts after `011`. A [`ModelSet`] keeps one bit per
//! assignment, `2^n` bits in total, indexed by model value.
//!
//! [`AbsFun`] pairs a model set with a [`Domain`] tag:
//!
//! * `Pos`: every non-empty value contains the all-ones model;
//! * `Def`: additionally, the models are closed under pairwise intersection.
//!
//! The empty model set is admitted in both domains as the lifted bottom.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Largest supported function width. A model set of this width occupies
/// 128 KiB.
pub const MAX_WIDTH: usize = 20;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BoolFunError {
    #[error("width {0} is outside the supported range 1..={MAX_WIDTH}")]
    WidthOutOfRange(usize),
    #[error("width mismatch: {left} vs {right}")]
    WidthMismatch { left: usize, right: usize },
    #[error("domain mismatch: {left} vs {right}")]
    DomainMismatch { left: Domain, right: Domain },
    #[error("index {index} does not name a model of width {width}")]
    ModelIndexOutOfRange { width: usize, index: u64 },
    #[error("position {position} is outside 1..={width}")]
    PositionOutOfRange { width: usize, position: usize },
    #[error("chain index {index} is outside 0..={max}")]
    ChainIndexOutOfRange { index: u64, max: u64 },
    #[error("mapping is not a permutation of 1..={0}")]
    NotAPermutation(usize),
    #[error("non-empty model set lacks the all-ones model")]
    NotPositive,
    #[error("model set is not closed under intersection")]
    NotIntersectionClosed,
    #[error("invalid model string {0:?}")]
    BadModelString(String),
}

pub type Result<T, E = BoolFunError> = std::result::Result<T, E>;

fn check_width(width: usize) -> Result<()> {
    if (1..=MAX_WIDTH).contains(&width) {
        Ok(())
    } else {
        Err(BoolFunError::WidthOutOfRange(width))
    }
}

fn check_position(width: usize, position: usize) -> Result<()> {
    if (1..=width).contains(&position) {
        Ok(())
    } else {
        Err(BoolFunError::PositionOutOfRange { width, position })
    }
}

/// Value mask of argument `position` (1-based) in a width-`width` model.
#[inline]
pub(crate) fn position_mask(width: usize, position: usize) -> u64 {
    1u64 << (width - position)
}

/// One truth assignment.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Model {
    width: u8,
    value: u32,
}

impl Model {
    pub fn new(bits: &[bool]) -> Result<Self> {
        check_width(bits.len())?;
        let value = bits.iter().fold(0u32, |acc, &b| (acc << 1) | b as u32);
        Ok(Model {
            width: bits.len() as u8,
            value,
        })
    }

    /// The width-`width` model whose binary value is `value`.
    pub fn from_value(width: usize, value: u64) -> Result<Self> {
        check_width(width)?;
        if value >= 1u64 << width {
            return Err(BoolFunError::ModelIndexOutOfRange {
                width,
                index: value,
            });
        }
        Ok(Model {
            width: width as u8,
            value: value as u32,
        })
    }

    pub fn all_ones(width: usize) -> Result<Self> {
        check_width(width)?;
        Self::from_value(width, (1u64 << width) - 1)
    }

    pub fn width(&self) -> usize {
        self.width as usize
    }

    /// The model read as an unsigned binary number, position 1 first.
    pub fn value(&self) -> u64 {
        self.value as u64
    }

    /// Bit at `position` (1-based), or `None` when out of range.
    pub fn bit(&self, position: usize) -> Option<bool> {
        check_position(self.width(), position).ok()?;
        Some(self.value() & position_mask(self.width(), position) != 0)
    }

    pub fn bits(&self) -> Vec<bool> {
        (1..=self.width())
            .map(|p| self.value() & position_mask(self.width(), p) != 0)
            .collect()
    }

    /// Componentwise conjunction.
    pub fn and(&self, other: &Model) -> Result<Model> {
        if self.width != other.width {
            return Err(BoolFunError::WidthMismatch {
                left: self.width(),
                right: other.width(),
            });
        }
        Ok(Model {
            width: self.width,
            value: self.value & other.value,
        })
    }
}

impl fmt::Display for Model {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:0width$b}", self.value, width = self.width())
    }
}

impl fmt::Debug for Model {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Model({self})")
    }
}

impl FromStr for Model {
    type Err = BoolFunError;

    fn from_str(s: &str) -> Result<Self> {
        let bits = s
            .chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                _ => Err(BoolFunError::BadModelString(s.to_string())),
            })
            .collect::<Result<Vec<_>>>()?;
        Model::new(&bits).map_err(|_| BoolFunError::BadModelString(s.to_string()))
    }
}

pub fn model_and(m1: &Model, m2: &Model) -> Result<Model> {
    m1.and(m2)
}

pub fn model_value(m: &Model) -> u64 {
    m.value()
}

/// `M_i`: the width-`width` model whose binary representation is `i`.
pub fn nth_model(width: usize, i: u64) -> Result<Model> {
    Model::from_value(width, i)
}

/// A set of models of one width, one bit per possible assignment.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct ModelSet {
    width: usize,
    words: Vec<u64>,
}

impl ModelSet {
    pub fn empty(width: usize) -> Result<Self> {
        check_width(width)?;
        Ok(Self::empty_unchecked(width))
    }

    fn empty_unchecked(width: usize) -> Self {
        let words = (1usize << width).div_ceil(64);
        ModelSet {
            width,
            words: vec![0; words],
        }
    }

    /// Every model of the given width.
    pub fn full(width: usize) -> Result<Self> {
        let mut s = Self::empty(width)?;
        let size = 1usize << width;
        if size >= 64 {
            s.words.iter_mut().for_each(|w| *w = u64::MAX);
        } else {
            s.words[0] = (1u64 << size) - 1;
        }
        Ok(s)
    }

    pub fn from_models<'a, I>(width: usize, models: I) -> Result<Self>
    where
        I: IntoIterator<Item = &'a Model>,
    {
        let mut s = Self::empty(width)?;
        for m in models {
            s.insert(*m)?;
        }
        Ok(s)
    }

    /// Builds a set from bit-strings such as `["00", "11"]`.
    pub fn from_strs<S: AsRef<str>>(width: usize, models: &[S]) -> Result<Self> {
        let models = models
            .iter()
            .map(|s| s.as_ref().parse())
            .collect::<Result<Vec<Model>>>()?;
        Self::from_models(width, &models)
    }

    pub fn from_values<I: IntoIterator<Item = u64>>(width: usize, values: I) -> Result<Self> {
        let mut s = Self::empty(width)?;
        for v in values {
            if v >= 1u64 << width {
                return Err(BoolFunError::ModelIndexOutOfRange { width, index: v });
            }
            s.insert_value(v);
        }
        Ok(s)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub(crate) fn insert_value(&mut self, v: u64) -> bool {
        let (w, b) = ((v / 64) as usize, v % 64);
        let fresh = self.words[w] & (1 << b) == 0;
        self.words[w] |= 1 << b;
        fresh
    }

    #[inline]
    pub fn contains_value(&self, v: u64) -> bool {
        if v >= 1u64 << self.width {
            return false;
        }
        self.words[(v / 64) as usize] & (1 << (v % 64)) != 0
    }

    /// Inserts `m`; returns whether it was absent.
    pub fn insert(&mut self, m: Model) -> Result<bool> {
        if m.width() != self.width {
            return Err(BoolFunError::WidthMismatch {
                left: self.width,
                right: m.width(),
            });
        }
        Ok(self.insert_value(m.value()))
    }

    pub fn contains(&self, m: &Model) -> bool {
        m.width() == self.width && self.contains_value(m.value())
    }

    pub fn len(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    /// Model values in ascending order.
    pub fn values(&self) -> impl Iterator<Item = u64> + '_ {
        self.words.iter().enumerate().flat_map(|(i, &word)| {
            let mut w = word;
            std::iter::from_fn(move || {
                if w == 0 {
                    return None;
                }
                let tz = w.trailing_zeros() as u64;
                w &= w - 1;
                Some(i as u64 * 64 + tz)
            })
        })
    }

    /// Models in ascending binary order.
    pub fn iter(&self) -> impl Iterator<Item = Model> + '_ {
        let width = self.width as u8;
        self.values().map(move |v| Model {
            width,
            value: v as u32,
        })
    }

    fn same_width(&self, other: &ModelSet) -> Result<()> {
        if self.width != other.width {
            return Err(BoolFunError::WidthMismatch {
                left: self.width,
                right: other.width,
            });
        }
        Ok(())
    }

    pub fn union(&self, other: &ModelSet) -> Result<ModelSet> {
        self.same_width(other)?;
        Ok(self.zip_words(other, |a, b| a | b))
    }

    pub fn intersection(&self, other: &ModelSet) -> Result<ModelSet> {
        self.same_width(other)?;
        Ok(self.zip_words(other, |a, b| a & b))
    }

    pub fn is_subset(&self, other: &ModelSet) -> Result<bool> {
        self.same_width(other)?;
        Ok(self
            .words
            .iter()
            .zip(&other.words)
            .all(|(a, b)| a & !b == 0))
    }

    fn zip_words(&self, other: &ModelSet, op: impl Fn(u64, u64) -> u64) -> ModelSet {
        ModelSet {
            width: self.width,
            words: self
                .words
                .iter()
                .zip(&other.words)
                .map(|(&a, &b)| op(a, b))
                .collect(),
        }
    }

    pub fn is_full(&self) -> bool {
        self.len() == 1usize << self.width
    }
}

impl fmt::Display for ModelSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, m) in self.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{m}")?;
        }
        Ok(())
    }
}

impl fmt::Debug for ModelSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ModelSet[{}]{{{self}}}", self.width)
    }
}

/// All models of `m`'s width whose value does not exceed `m`'s.
pub fn down_set(m: &Model) -> ModelSet {
    let mut s = ModelSet::empty_unchecked(m.width());
    for v in 0..=m.value() {
        s.insert_value(v);
    }
    s
}

/// The least superset of `s` closed under pairwise conjunction.
///
/// A model `x` belongs to the closure iff it equals the conjunction of all
/// members of `s` lying bitwise above it. That conjunction is computed for
/// every `x` at once with a superset-sum transform over the Boolean cube,
/// `O(n·2^n)` regardless of `|s|`.
pub fn intersection_close(s: &ModelSet) -> ModelSet {
    let n = s.width;
    let size = 1usize << n;
    // Bit `n` marks "no member above x yet"; any real conjunction clears it.
    let none = (1u32 << (n + 1)) - 1;
    let mut meet: Vec<u32> = (0..size as u64)
        .map(|x| if s.contains_value(x) { x as u32 } else { none })
        .collect();
    for i in 0..n {
        let bit = 1usize << i;
        for x in 0..size {
            if x & bit == 0 {
                meet[x] &= meet[x | bit];
            }
        }
    }
    let mut out = ModelSet::empty_unchecked(n);
    for (x, &m) in meet.iter().enumerate() {
        if m == x as u32 {
            out.insert_value(x as u64);
        }
    }
    out
}

pub fn is_intersection_closed(s: &ModelSet) -> bool {
    intersection_close(s) == *s
}

pub fn is_positive(s: &ModelSet) -> bool {
    s.is_empty() || s.contains_value((1u64 << s.width) - 1)
}

/// Which lattice of positive functions a value lives in.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Domain {
    Pos,
    Def,
}

impl fmt::Display for Domain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Domain::Pos => "pos",
            Domain::Def => "def",
        })
    }
}

impl FromStr for Domain {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "pos" => Ok(Domain::Pos),
            "def" => Ok(Domain::Def),
            other => Err(format!("unknown domain {other:?} (expected pos or def)")),
        }
    }
}

/// An abstract value: a tagged model set satisfying its domain's invariants.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct AbsFun {
    models: ModelSet,
    domain: Domain,
}

impl AbsFun {
    /// Wraps `models`, rejecting sets that violate the domain invariants.
    pub fn new(models: ModelSet, domain: Domain) -> Result<Self> {
        if !is_positive(&models) {
            return Err(BoolFunError::NotPositive);
        }
        if domain == Domain::Def && !is_intersection_closed(&models) {
            return Err(BoolFunError::NotIntersectionClosed);
        }
        Ok(AbsFun { models, domain })
    }

    /// Like [`AbsFun::new`], but closes the set under intersection first when
    /// the domain is `Def`.
    pub fn lift(models: ModelSet, domain: Domain) -> Result<Self> {
        if !is_positive(&models) {
            return Err(BoolFunError::NotPositive);
        }
        let models = match domain {
            Domain::Pos => models,
            Domain::Def => intersection_close(&models),
        };
        Ok(AbsFun { models, domain })
    }

    /// Trusted constructor; the caller guarantees the invariants.
    pub(crate) fn from_parts(models: ModelSet, domain: Domain) -> Self {
        AbsFun { models, domain }
    }

    pub fn bottom(width: usize, domain: Domain) -> Result<Self> {
        Ok(AbsFun::from_parts(ModelSet::empty(width)?, domain))
    }

    pub fn top(width: usize, domain: Domain) -> Result<Self> {
        Ok(AbsFun::from_parts(ModelSet::full(width)?, domain))
    }

    pub fn width(&self) -> usize {
        self.models.width()
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    pub fn models(&self) -> &ModelSet {
        &self.models
    }

    pub fn into_models(self) -> ModelSet {
        self.models
    }

    pub fn is_bottom(&self) -> bool {
        self.models.is_empty()
    }

    pub fn is_top(&self) -> bool {
        self.models.is_full()
    }

    pub fn is_positive(&self) -> bool {
        is_positive(&self.models)
    }

    pub fn is_intersection_closed(&self) -> bool {
        is_intersection_closed(&self.models)
    }

    /// Re-tags the value, checking the target domain's invariants.
    pub fn with_domain(&self, domain: Domain) -> Result<Self> {
        AbsFun::new(self.models.clone(), domain)
    }

    fn compatible(&self, other: &AbsFun) -> Result<()> {
        if self.width() != other.width() {
            return Err(BoolFunError::WidthMismatch {
                left: self.width(),
                right: other.width(),
            });
        }
        if self.domain != other.domain {
            return Err(BoolFunError::DomainMismatch {
                left: self.domain,
                right: other.domain,
            });
        }
        Ok(())
    }

    /// Conjunction: intersection of the model sets.
    pub fn meet(&self, other: &AbsFun) -> Result<AbsFun> {
        self.compatible(other)?;
        Ok(AbsFun::from_parts(
            self.models.intersection(&other.models)?,
            self.domain,
        ))
    }

    /// Least upper bound in the tagged domain: union for `Pos`, the
    /// intersection closure of the union for `Def`.
    pub fn join(&self, other: &AbsFun) -> Result<AbsFun> {
        self.compatible(other)?;
        let union = self.models.union(&other.models)?;
        Ok(match self.domain {
            Domain::Pos => AbsFun::from_parts(union, Domain::Pos),
            Domain::Def => AbsFun::from_parts(intersection_close(&union), Domain::Def),
        })
    }

    /// Existential quantification of the variable at `position`; the
    /// variable becomes unconstrained and the width is unchanged.
    pub fn exists(&self, position: usize) -> Result<AbsFun> {
        check_position(self.width(), position)?;
        let mask = position_mask(self.width(), position);
        let mut out = self.models.clone();
        for v in self.models.values() {
            out.insert_value(v ^ mask);
        }
        if self.domain == Domain::Def {
            out = intersection_close(&out);
        }
        Ok(AbsFun::from_parts(out, self.domain))
    }

    /// Moves the bit at position `j` to position `perm[j - 1]`.
    pub fn rename(&self, perm: &[usize]) -> Result<AbsFun> {
        let width = self.width();
        let mut seen = vec![false; width + 1];
        if perm.len() != width {
            return Err(BoolFunError::NotAPermutation(width));
        }
        for &p in perm {
            if !(1..=width).contains(&p) || seen[p] {
                return Err(BoolFunError::NotAPermutation(width));
            }
            seen[p] = true;
        }
        let mut out = ModelSet::empty_unchecked(width);
        for v in self.models.values() {
            let mut image = 0u64;
            for (j, &target) in perm.iter().enumerate() {
                if v & position_mask(width, j + 1) != 0 {
                    image |= position_mask(width, target);
                }
            }
            out.insert_value(image);
        }
        Ok(AbsFun::from_parts(out, self.domain))
    }

    /// `x_target ↔ ∧ x_sources`; with no sources the target must be true.
    pub fn iff_conj(target: usize, sources: &[usize], width: usize, domain: Domain) -> Result<AbsFun> {
        check_width(width)?;
        check_position(width, target)?;
        let mut source_mask = 0u64;
        for &s in sources {
            check_position(width, s)?;
            source_mask |= position_mask(width, s);
        }
        let target_mask = position_mask(width, target);
        let mut out = ModelSet::empty_unchecked(width);
        for v in 0..1u64 << width {
            let rhs = v & source_mask == source_mask;
            if (v & target_mask != 0) == rhs {
                out.insert_value(v);
            }
        }
        Ok(AbsFun::from_parts(out, domain))
    }

    /// `models(self) ⊆ models(other)`.
    pub fn entails(&self, other: &AbsFun) -> Result<bool> {
        self.models.is_subset(&other.models)
    }

    /// Model-set equality, ignoring the domain tag.
    pub fn equals(&self, other: &AbsFun) -> Result<bool> {
        if self.width() != other.width() {
            return Err(BoolFunError::WidthMismatch {
                left: self.width(),
                right: other.width(),
            });
        }
        Ok(self.models == other.models)
    }

    /// Rendering as a disjunction of minterms over `x1..xn`, for reading
    /// only; `false` for bottom and `true` for top.
    pub fn to_sum_of_products(&self) -> String {
        if self.is_bottom() {
            return "false".into();
        }
        if self.is_top() {
            return "true".into();
        }
        self.models
            .iter()
            .map(|m| {
                let lits: Vec<String> = m
                    .bits()
                    .iter()
                    .enumerate()
                    .map(|(i, &b)| format!("{}x{}", if b { "" } else { "~" }, i + 1))
                    .collect();
                lits.join("&")
            })
            .collect::<Vec<_>>()
            .join(" | ")
    }
}

impl fmt::Display for AbsFun {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{}}}", self.models)
    }
}

impl fmt::Debug for AbsFun {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}[{}]{{{}}}", self.domain, self.width(), self.models)
    }
}

pub fn meet(f: &AbsFun, g: &AbsFun) -> Result<AbsFun> {
    f.meet(g)
}

pub fn join(f: &AbsFun, g: &AbsFun) -> Result<AbsFun> {
    f.join(g)
}

/// Element `i` of the Def chain over `n` variables.
///
/// `f_0` is bottom; for `0 < i < 2^n - 1` the models are
/// `{M_0, …, M_{i-1}} ∪ {M_{2^n-1}}`; index `2^n - 1` is top. Consecutive
/// elements differ by exactly one model.
pub fn chain_f(n: usize, i: u64) -> Result<AbsFun> {
    check_width(n)?;
    let last = (1u64 << n) - 1;
    if i > last {
        return Err(BoolFunError::ChainIndexOutOfRange { index: i, max: last });
    }
    if i == 0 {
        return AbsFun::bottom(n, Domain::Def);
    }
    if i == last {
        return AbsFun::top(n, Domain::Def);
    }
    let mut s = ModelSet::empty_unchecked(n);
    for v in 0..i {
        s.insert_value(v);
    }
    s.insert_value(last);
    Ok(AbsFun::from_parts(s, Domain::Def))
}
