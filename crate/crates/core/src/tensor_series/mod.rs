//! Formal tensor series in `t` (commuting by symmetry) and `s`
//! (noncommutative) variables, with the derivative calculus, projection to
//! multiset classes and the extended WDVV checker.
//!
//! Indices are 0-based in memory and 1-based in JSON and `Display`.

mod conditions;

pub use conditions::*;

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{cjson, C64, ZERO};

/// `t^{i_1} (x) ... (x) t^{i_k} (x) s^{j_1} (x) ... (x) s^{j_l}`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct TensorMonomial {
    pub t: Vec<u16>,
    pub s: Vec<u16>,
}

impl TensorMonomial {
    pub fn new(t: Vec<u16>, s: Vec<u16>) -> Self {
        Self { t, s }
    }

    pub fn empty() -> Self {
        Self::default()
    }

    pub fn degree(&self) -> usize {
        self.t.len() + self.s.len()
    }
}

impl fmt::Display for TensorMonomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.t.is_empty() && self.s.is_empty() {
            return f.write_str("1");
        }
        let parts: Vec<String> = self
            .t
            .iter()
            .map(|i| format!("t{}", i + 1))
            .chain(self.s.iter().map(|j| format!("s{}", j + 1)))
            .collect();
        f.write_str(&parts.join("⊗"))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TensorSeries {
    n: usize,
    m: usize,
    truncation: usize,
    terms: BTreeMap<TensorMonomial, C64>,
}

/// Distinct orderings of a multiset (given sorted).
pub fn distinct_permutations(sorted: &[u16]) -> Vec<Vec<u16>> {
    let mut cur = sorted.to_vec();
    let mut out = vec![cur.clone()];
    // next_permutation over a sorted start enumerates each ordering once.
    loop {
        let n = cur.len();
        if n < 2 {
            return out;
        }
        let mut i = n - 1;
        while i > 0 && cur[i - 1] >= cur[i] {
            i -= 1;
        }
        if i == 0 {
            return out;
        }
        let mut j = n - 1;
        while cur[j] <= cur[i - 1] {
            j -= 1;
        }
        cur.swap(i - 1, j);
        cur[i..].reverse();
        out.push(cur.clone());
    }
}

impl TensorSeries {
    pub fn new(n: usize, m: usize, truncation: usize) -> Self {
        Self {
            n,
            m,
            truncation,
            terms: BTreeMap::new(),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn truncation(&self) -> usize {
        self.truncation
    }

    pub fn terms(&self) -> &BTreeMap<TensorMonomial, C64> {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coefficient(&self, mono: &TensorMonomial) -> C64 {
        self.terms.get(mono).copied().unwrap_or(ZERO)
    }

    /// Accumulate `c * mono`; monomials above the truncation are dropped.
    pub fn add_term(&mut self, mono: TensorMonomial, c: C64) -> Result<()> {
        if mono.t.iter().any(|&i| i as usize >= self.n) || mono.s.iter().any(|&j| j as usize >= self.m) {
            return Err(Error::InvalidInput(format!("index out of range in {mono}")));
        }
        self.add_unchecked(mono, c);
        Ok(())
    }

    fn add_unchecked(&mut self, mono: TensorMonomial, c: C64) {
        if mono.degree() > self.truncation || c == ZERO {
            return;
        }
        let entry = self.terms.entry(mono.clone()).or_insert(ZERO);
        *entry += c;
        if *entry == ZERO {
            self.terms.remove(&mono);
        }
    }

    /// Spread an ordinary-polynomial coefficient evenly over every
    /// ordering of the `t` multiset, so the class coefficient equals `c`.
    pub fn add_symmetric_t(&mut self, t_multiset: &[u16], s: &[u16], c: C64) -> Result<()> {
        let mut sorted = t_multiset.to_vec();
        sorted.sort_unstable();
        let perms = distinct_permutations(&sorted);
        let share = c / perms.len() as f64;
        for t in perms {
            self.add_term(TensorMonomial::new(t, s.to_vec()), share)?;
        }
        Ok(())
    }

    pub fn scale(&self, c: C64) -> TensorSeries {
        let mut out = TensorSeries::new(self.n, self.m, self.truncation);
        for (k, v) in &self.terms {
            out.add_unchecked(k.clone(), v * c);
        }
        out
    }

    pub fn add(&self, other: &TensorSeries) -> TensorSeries {
        let mut out = self.clone();
        out.truncation = self.truncation.min(other.truncation);
        out.terms.retain(|k, _| k.degree() <= out.truncation);
        for (k, v) in &other.terms {
            out.add_unchecked(k.clone(), *v);
        }
        out
    }

    /// Tensor product, truncated; `t` words and `s` words concatenate.
    pub fn mul(&self, other: &TensorSeries) -> TensorSeries {
        let mut out = TensorSeries::new(self.n, self.m, self.truncation.min(other.truncation));
        for (a, x) in &self.terms {
            for (b, y) in &other.terms {
                if a.degree() + b.degree() > out.truncation {
                    continue;
                }
                let mut t = a.t.clone();
                t.extend_from_slice(&b.t);
                let mut s = a.s.clone();
                s.extend_from_slice(&b.s);
                out.add_unchecked(TensorMonomial::new(t, s), x * y);
            }
        }
        out
    }

    fn with_terms(&self, terms: impl IntoIterator<Item = (TensorMonomial, C64)>) -> TensorSeries {
        let mut out = TensorSeries::new(self.n, self.m, self.truncation);
        for (k, v) in terms {
            out.add_unchecked(k, v);
        }
        out
    }

    /// Keep only monomials whose `s` word has length `len`.
    pub fn s_length_part(&self, len: usize) -> TensorSeries {
        self.with_terms(
            self.terms
                .iter()
                .filter(|(k, _)| k.s.len() == len)
                .map(|(k, v)| (k.clone(), *v)),
        )
    }

    /// One term per occurrence of `t^i`, with that factor deleted.
    pub fn d_t(&self, i: usize) -> TensorSeries {
        let i = i as u16;
        let mut out = Vec::new();
        for (k, &v) in &self.terms {
            for (pos, &x) in k.t.iter().enumerate() {
                if x == i {
                    let mut t = k.t.clone();
                    t.remove(pos);
                    out.push((TensorMonomial::new(t, k.s.clone()), v));
                }
            }
        }
        self.with_terms(out)
    }

    /// One term per occurrence of `s^j`, with that factor deleted.
    pub fn d_s(&self, j: usize) -> TensorSeries {
        let j = j as u16;
        let mut out = Vec::new();
        for (k, &v) in &self.terms {
            for (pos, &x) in k.s.iter().enumerate() {
                if x == j {
                    let mut s = k.s.clone();
                    s.remove(pos);
                    out.push((TensorMonomial::new(k.t.clone(), s), v));
                }
            }
        }
        self.with_terms(out)
    }

    /// Cyclic third derivative: for every rotation of the `s` word that
    /// starts with `s^i` and every later pair of positions `p < q` holding
    /// `s^j`, `s^r`, remove the three letters and keep the rest in rotated
    /// order.
    pub fn d_sss(&self, i: usize, j: usize, r: usize) -> TensorSeries {
        let key = (i as u16, j as u16, r as u16);
        let mut out = Vec::new();
        for (k, &v) in &self.terms {
            for_each_cyclic_triple(&k.s, |idx, rest| {
                if idx == key {
                    out.push((TensorMonomial::new(k.t.clone(), rest), v));
                }
            });
        }
        self.with_terms(out)
    }

    /// All cyclic third derivatives at once, keyed by `(i, j, r)`.
    pub fn d_sss_all(&self) -> BTreeMap<(u16, u16, u16), TensorSeries> {
        let mut out: BTreeMap<(u16, u16, u16), TensorSeries> = BTreeMap::new();
        for (k, &v) in &self.terms {
            for_each_cyclic_triple(&k.s, |idx, rest| {
                out.entry(idx)
                    .or_insert_with(|| TensorSeries::new(self.n, self.m, self.truncation))
                    .add_unchecked(TensorMonomial::new(k.t.clone(), rest), v);
            });
        }
        out
    }

    /// Sum coefficients over multiset classes.
    pub fn project(&self) -> ClassSeries {
        let mut out = ClassSeries::new();
        for (k, &v) in &self.terms {
            let mut t = k.t.clone();
            let mut s = k.s.clone();
            t.sort_unstable();
            s.sort_unstable();
            out.add(ClassKey { t, s }, v);
        }
        out
    }

    pub fn max_abs_diff(&self, other: &TensorSeries) -> f64 {
        let mut worst = 0.0f64;
        for (k, v) in &self.terms {
            worst = worst.max((v - other.coefficient(k)).norm());
        }
        for (k, v) in &other.terms {
            if !self.terms.contains_key(k) {
                worst = worst.max(v.norm());
            }
        }
        worst
    }
}

fn for_each_cyclic_triple(word: &[u16], mut f: impl FnMut((u16, u16, u16), Vec<u16>)) {
    let l = word.len();
    if l < 3 {
        return;
    }
    let mut rot = Vec::with_capacity(l);
    for start in 0..l {
        rot.clear();
        rot.extend_from_slice(&word[start..]);
        rot.extend_from_slice(&word[..start]);
        for p in 1..l {
            for q in p + 1..l {
                let rest: Vec<u16> = rot
                    .iter()
                    .enumerate()
                    .filter(|&(pos, _)| pos != 0 && pos != p && pos != q)
                    .map(|(_, &x)| x)
                    .collect();
                f((rot[0], rot[p], rot[q]), rest);
            }
        }
    }
}

impl fmt::Display for TensorSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|(k, v)| {
                if v.im == 0.0 {
                    format!("{}·{k}", v.re)
                } else {
                    format!("({}+{}i)·{k}", v.re, v.im)
                }
            })
            .collect();
        f.write_str(&parts.join(" + "))
    }
}

#[derive(Serialize, Deserialize)]
struct TermJson {
    t: Vec<u16>,
    s: Vec<u16>,
    #[serde(with = "cjson::scalar")]
    coeff: C64,
}

#[derive(Serialize, Deserialize)]
struct SeriesJson {
    n: usize,
    m: usize,
    truncation: usize,
    terms: Vec<TermJson>,
}

impl Serialize for TensorSeries {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let one_based = |v: &[u16]| v.iter().map(|x| x + 1).collect();
        SeriesJson {
            n: self.n,
            m: self.m,
            truncation: self.truncation,
            terms: self
                .terms
                .iter()
                .map(|(k, v)| TermJson {
                    t: one_based(&k.t),
                    s: one_based(&k.s),
                    coeff: *v,
                })
                .collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for TensorSeries {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let j = SeriesJson::deserialize(d)?;
        let mut out = TensorSeries::new(j.n, j.m, j.truncation);
        for term in j.terms {
            let zero_based = |v: &[u16]| -> std::result::Result<Vec<u16>, D::Error> {
                v.iter()
                    .map(|&x| x.checked_sub(1).ok_or_else(|| D::Error::custom("indices are 1-based")))
                    .collect()
            };
            let mono = TensorMonomial::new(zero_based(&term.t)?, zero_based(&term.s)?);
            if mono.degree() > j.truncation {
                return Err(D::Error::custom(format!("monomial {mono} exceeds truncation")));
            }
            out.add_term(mono, term.coeff).map_err(D::Error::custom)?;
        }
        Ok(out)
    }
}

/// Canonical class key: sorted `t` and `s` multisets.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct ClassKey {
    pub t: Vec<u16>,
    pub s: Vec<u16>,
}

impl ClassKey {
    pub fn degree(&self) -> usize {
        self.t.len() + self.s.len()
    }
}

/// Series over multiset classes; the product is multiset union.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ClassSeries {
    map: BTreeMap<ClassKey, C64>,
}

impl ClassSeries {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn constant(c: C64) -> Self {
        let mut out = Self::new();
        out.add(ClassKey::default(), c);
        out
    }

    pub fn map(&self) -> &BTreeMap<ClassKey, C64> {
        &self.map
    }

    pub fn get(&self, key: &ClassKey) -> C64 {
        self.map.get(key).copied().unwrap_or(ZERO)
    }

    pub fn add(&mut self, key: ClassKey, c: C64) {
        let e = self.map.entry(key.clone()).or_insert(ZERO);
        *e += c;
        if *e == ZERO {
            self.map.remove(&key);
        }
    }

    pub fn add_scaled(&mut self, other: &ClassSeries, c: C64) {
        if c == ZERO {
            return;
        }
        for (k, v) in &other.map {
            self.add(k.clone(), v * c);
        }
    }

    pub fn sub(&self, other: &ClassSeries) -> ClassSeries {
        let mut out = self.clone();
        out.add_scaled(other, C64::new(-1.0, 0.0));
        out
    }

    /// Multiset-union product, keeping classes of degree `< below`.
    pub fn mul_below(&self, other: &ClassSeries, below: usize) -> ClassSeries {
        let mut out = ClassSeries::new();
        for (a, x) in &self.map {
            for (b, y) in &other.map {
                if a.degree() + b.degree() >= below {
                    continue;
                }
                let mut t = a.t.clone();
                t.extend_from_slice(&b.t);
                t.sort_unstable();
                let mut s = a.s.clone();
                s.extend_from_slice(&b.s);
                s.sort_unstable();
                out.add(ClassKey { t, s }, x * y);
            }
        }
        out
    }

    pub fn restrict(&self, keep: impl Fn(&ClassKey) -> bool) -> ClassSeries {
        ClassSeries {
            map: self
                .map
                .iter()
                .filter(|(k, _)| keep(k))
                .map(|(k, v)| (k.clone(), *v))
                .collect(),
        }
    }

    /// Classes with no `s` letters and degree `< below`.
    pub fn s_free_below(&self, below: usize) -> ClassSeries {
        self.restrict(|k| k.s.is_empty() && k.degree() < below)
    }

    pub fn max_abs(&self) -> f64 {
        self.map.values().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn sum(&self) -> C64 {
        self.map.values().sum()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{c, ONE};

    fn series(terms: &[(&[u16], &[u16], f64)]) -> TensorSeries {
        let mut f = TensorSeries::new(3, 3, 8);
        for (t, s, v) in terms {
            // test words are written 1-based
            let t = t.iter().map(|x| x - 1).collect();
            let s = s.iter().map(|x| x - 1).collect();
            f.add_term(TensorMonomial::new(t, s), c(*v, 0.0)).unwrap();
        }
        f
    }

    fn mono(t: &[u16], s: &[u16]) -> TensorMonomial {
        TensorMonomial::new(t.iter().map(|x| x - 1).collect(), s.iter().map(|x| x - 1).collect())
    }

    #[test]
    fn d_t_examples() {
        assert_eq!(series(&[(&[1, 1], &[], 1.0)]).d_t(0), series(&[(&[1], &[], 2.0)]));
        assert!(series(&[(&[1], &[2], 1.0)]).d_t(1).is_empty());
        assert_eq!(series(&[(&[1, 2], &[1], 1.0)]).d_t(1), series(&[(&[1], &[1], 1.0)]));
    }

    #[test]
    fn d_s_examples() {
        let f = series(&[(&[], &[1, 2, 1], 1.0)]);
        assert_eq!(f.d_s(0), series(&[(&[], &[2, 1], 1.0), (&[], &[1, 2], 1.0)]));
        assert!(series(&[(&[1], &[], 1.0)]).d_s(0).is_empty());
    }

    #[test]
    fn d_sss_examples() {
        let f = series(&[(&[], &[1, 2, 3], 1.0)]);
        assert_eq!(f.d_sss(0, 1, 2).coefficient(&TensorMonomial::empty()), ONE);
        assert!(f.d_sss(0, 2, 1).is_empty());
        let g = series(&[(&[], &[1, 1, 1], 1.0)]);
        assert_eq!(g.d_sss(0, 0, 0).coefficient(&TensorMonomial::empty()), c(3.0, 0.0));
    }

    #[test]
    fn d_sss_longer_word_keeps_rotated_order() {
        // s1 s2 s3 s1: rotations starting with s1 are (1,2,3,1) and (1,1,2,3).
        let f = series(&[(&[2], &[1, 2, 3, 1], 1.0)]);
        let d = f.d_sss(0, 1, 2);
        // (1,2,3,1): p=1,q=2 leaves s1; (1,1,2,3): p=2,q=3 leaves s1.
        assert_eq!(d, series(&[(&[2], &[1], 2.0)]));
        let all = f.d_sss_all();
        assert_eq!(all[&(0, 1, 2)], d);
    }

    #[test]
    fn projection_examples() {
        let p = series(&[(&[1, 2], &[], 1.0), (&[2, 1], &[], 1.0)]).project();
        assert_eq!(
            p.get(&ClassKey {
                t: vec![0, 1],
                s: vec![]
            }),
            c(2.0, 0.0)
        );
        assert_eq!(p.map().len(), 1);
        let q = series(&[(&[], &[1, 2], 1.0), (&[], &[2, 1], -1.0)]).project();
        assert!(q.is_empty());
    }

    #[test]
    fn symmetric_insert_preserves_class_coefficient() {
        let mut f = TensorSeries::new(2, 0, 5);
        f.add_symmetric_t(&[1, 0, 0], &[], c(3.0, 0.0)).unwrap();
        assert_eq!(f.len(), 3);
        assert_eq!(
            f.project().get(&ClassKey {
                t: vec![0, 0, 1],
                s: vec![]
            }),
            c(3.0, 0.0)
        );
        // d_t matches the ordinary derivative of 3 x^2 y in x: 6 x y.
        let d = f.d_t(0).project();
        assert!(
            (d.get(&ClassKey {
                t: vec![0, 1],
                s: vec![]
            }) - c(6.0, 0.0))
            .norm()
                < 1e-15
        );
    }

    #[test]
    fn permutation_counts() {
        assert_eq!(distinct_permutations(&[0, 0, 1]).len(), 3);
        assert_eq!(distinct_permutations(&[0, 1, 2]).len(), 6);
        assert_eq!(distinct_permutations(&[]).len(), 1);
    }

    #[test]
    fn truncation_and_ranges() {
        let mut f = TensorSeries::new(2, 1, 2);
        f.add_term(mono(&[1, 1, 1], &[]), ONE).unwrap();
        assert!(f.is_empty());
        assert!(f.add_term(mono(&[3], &[]), ONE).is_err());
        assert!(f.add_term(mono(&[], &[2]), ONE).is_err());
    }

    #[test]
    fn json_is_one_based() {
        let f = series(&[(&[1], &[3], 2.0)]);
        let s = serde_json::to_string(&f).unwrap();
        assert_eq!(
            s,
            r#"{"n":3,"m":3,"truncation":8,"terms":[{"t":[1],"s":[3],"coeff":[2.0,0.0]}]}"#
        );
        let back: TensorSeries = serde_json::from_str(&s).unwrap();
        assert_eq!(back, f);
        assert!(serde_json::from_str::<TensorSeries>(
            r#"{"n":1,"m":1,"truncation":2,"terms":[{"t":[0],"s":[],"coeff":[1,0]}]}"#
        )
        .is_err());
    }

    #[test]
    fn display() {
        let f = series(&[(&[1, 2], &[3], 2.0)]);
        assert_eq!(f.to_string(), "2·t1⊗t2⊗s3");
    }
}
