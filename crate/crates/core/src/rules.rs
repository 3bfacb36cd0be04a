//! Cellular automaton local rules.
//!
//! A rule with neighbourhood `B` acts by `Φ(x)_ℓ = φ((x_{ℓ−b})_{b∈B})`, so a
//! linear rule `Σ φ_b x^b` is multiplication by that polynomial in the shift.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{parse_err, Error, Result};
use crate::partition::Symbol;
use crate::window::SymbolWindow;

/// Largest lookup table a [`GeneralRule`] may carry.
pub const MAX_TABLE: u128 = 1 << 24;

const DENSE_SPAN_LIMIT: u64 = 1 << 26;

fn is_prime(p: u32) -> bool {
    p >= 2 && (2..p).take_while(|i| i * i <= p).all(|i| p % i != 0)
}

/// Binary popcount.
pub fn nu(n: u64) -> u32 {
    n.count_ones()
}

fn pow_mod(mut b: u64, mut e: u64, p: u64) -> u64 {
    let mut r = 1 % p;
    b %= p;
    while e > 0 {
        if e & 1 == 1 {
            r = r * b % p;
        }
        b = b * b % p;
        e >>= 1;
    }
    r
}

/// `C(N, n) mod p` by Lucas' theorem.
pub fn lucas_binom(mut big: u64, mut small: u64, p: u32) -> u32 {
    let p = p as u64;
    let mut acc = 1u64;
    while small > 0 || big > 0 {
        let (a, b) = (big % p, small % p);
        if b > a {
            return 0;
        }
        let mut num = 1u64;
        let mut den = 1u64;
        for j in 0..b {
            num = num * ((a - j) % p) % p;
            den = den * ((j + 1) % p) % p;
        }
        acc = acc * num % p * pow_mod(den, p - 2, p) % p;
        big /= p;
        small /= p;
    }
    acc as u32
}

/// `Σ φ_b x^b` over `ℤ/p`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct LinearRule {
    p: u32,
    coeffs: BTreeMap<i64, u32>,
}

impl LinearRule {
    pub fn new(p: u32, coeffs: impl IntoIterator<Item = (i64, i64)>) -> Result<LinearRule> {
        if !is_prime(p) || p > 256 {
            return Err(Error::InvalidRule(format!("{p} is not a prime ≤ 256")));
        }
        let mut map: BTreeMap<i64, u32> = BTreeMap::new();
        for (b, c) in coeffs {
            let e = map.entry(b).or_insert(0);
            *e = (*e + c.rem_euclid(p as i64) as u32) % p;
        }
        map.retain(|_, c| *c != 0);
        if map.is_empty() {
            return Err(Error::InvalidRule("zero polynomial".into()));
        }
        Ok(LinearRule { p, coeffs: map })
    }

    pub fn identity(p: u32) -> Result<LinearRule> {
        LinearRule::new(p, [(0, 1)])
    }

    /// `x^v`, acting as the shift by `v`.
    pub fn shift(p: u32, v: i64) -> Result<LinearRule> {
        LinearRule::new(p, [(v, 1)])
    }

    pub fn modulus(&self) -> u32 {
        self.p
    }

    pub fn coefficients(&self) -> &BTreeMap<i64, u32> {
        &self.coeffs
    }

    pub fn support_size(&self) -> usize {
        self.coeffs.len()
    }

    pub fn min_offset(&self) -> i64 {
        *self.coeffs.keys().next().expect("nonempty")
    }

    pub fn max_offset(&self) -> i64 {
        *self.coeffs.keys().next_back().expect("nonempty")
    }

    pub fn trace(&self) -> u32 {
        self.coeffs.values().map(|&c| c as u64).sum::<u64>() as u32 % self.p
    }

    pub fn is_identity(&self) -> bool {
        self.coeffs.len() == 1 && self.coeffs.get(&0) == Some(&1)
    }

    /// Substitutes `x ↦ x^m`.
    fn dilate(&self, m: i64) -> Result<LinearRule> {
        let coeffs = self
            .coeffs
            .iter()
            .map(|(&b, &c)| Ok((b.checked_mul(m).ok_or(Error::Overflow)?, c)))
            .collect::<Result<BTreeMap<_, _>>>()?;
        Ok(LinearRule { p: self.p, coeffs })
    }

    /// Polynomial product.
    pub fn mul(&self, other: &LinearRule) -> Result<LinearRule> {
        if self.p != other.p {
            return Err(Error::InvalidRule("moduli differ".into()));
        }
        let lo = self
            .min_offset()
            .checked_add(other.min_offset())
            .ok_or(Error::Overflow)?;
        let hi = self
            .max_offset()
            .checked_add(other.max_offset())
            .ok_or(Error::Overflow)?;
        let span = (hi as i128 - lo as i128) as u128 + 1;
        let (small, big) = if self.coeffs.len() <= other.coeffs.len() {
            (self, other)
        } else {
            (other, self)
        };
        let sparse_cost = (small.coeffs.len() * big.coeffs.len()) as u128;
        let dense_cost = if self.p == 2 {
            small.coeffs.len() as u128 * (span / 64 + 1)
        } else {
            small.coeffs.len() as u128 * span
        };
        if span <= DENSE_SPAN_LIMIT as u128 && dense_cost < sparse_cost {
            if self.p == 2 {
                return Ok(mul_gf2(small, big, lo, span as usize));
            }
            return Ok(mul_dense(small, big, lo, span as usize));
        }
        let mut acc: HashMap<i64, u32> = HashMap::with_capacity(sparse_cost.min(1 << 20) as usize);
        for (&a, &ca) in &small.coeffs {
            for (&b, &cb) in &big.coeffs {
                let e = acc.entry(a + b).or_insert(0);
                *e = (*e + ca * cb) % self.p;
            }
        }
        let coeffs: BTreeMap<i64, u32> = acc.into_iter().filter(|(_, c)| *c != 0).collect();
        Ok(LinearRule { p: self.p, coeffs })
    }

    /// `rule^n`, by splitting `n` into base-`p` digits and using
    /// `f(x)^{p^i} = f(x^{p^i})` over `ℤ/p`.
    pub fn power(&self, n: u64) -> Result<LinearRule> {
        let mut acc = LinearRule::identity(self.p)?;
        let mut rest = n;
        let mut scale: i64 = 1;
        while rest > 0 {
            let digit = rest % self.p as u64;
            if digit > 0 {
                let f = self.dilate(scale)?;
                acc = acc.mul(&f.pow_small(digit)?)?;
            }
            rest /= self.p as u64;
            if rest > 0 {
                scale = scale.checked_mul(self.p as i64).ok_or(Error::Overflow)?;
            }
        }
        Ok(acc)
    }

    fn pow_small(&self, mut e: u64) -> Result<LinearRule> {
        let mut result = LinearRule::identity(self.p)?;
        let mut base = self.clone();
        while e > 0 {
            if e & 1 == 1 {
                result = result.mul(&base)?;
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base)?;
            }
        }
        Ok(result)
    }

    pub fn local(&self, tuple: &[Symbol]) -> Symbol {
        let s: u64 = self
            .coeffs
            .values()
            .zip(tuple)
            .map(|(&c, &x)| c as u64 * x as u64)
            .sum();
        (s % self.p as u64) as Symbol
    }

    pub fn apply_window(&self, w: &SymbolWindow) -> Result<SymbolWindow> {
        if w.alphabet() != self.p {
            return Err(Error::AlphabetMismatch {
                expected: self.p,
                found: w.alphabet(),
            });
        }
        let (lo, hi) = (self.min_offset(), self.max_offset());
        let span = (hi - lo) as usize;
        if w.len() <= span {
            return Err(Error::WindowTooSmall {
                needed: span + 1,
                len: w.len(),
            });
        }
        let out_len = w.len() - span;
        let input = w.symbols();
        let out = if self.p == 2 {
            let packed = pack_bits(input);
            let mut acc = vec![0u64; out_len.div_ceil(64)];
            for &b in self.coeffs.keys() {
                xor_shifted_down(&mut acc, &packed, (hi - b) as usize);
            }
            unpack_bits(&acc, out_len)
        } else {
            let mut acc = vec![0u64; out_len];
            for (&b, &c) in &self.coeffs {
                let s = (hi - b) as usize;
                for (i, a) in acc.iter_mut().enumerate() {
                    *a += c as u64 * input[i + s] as u64;
                }
            }
            acc.into_iter().map(|a| (a % self.p as u64) as Symbol).collect()
        };
        SymbolWindow::new(w.origin() + hi, self.p, out)
    }
}

fn mul_gf2(small: &LinearRule, big: &LinearRule, lo: i64, span: usize) -> LinearRule {
    let big_lo = big.min_offset();
    let big_span = (big.max_offset() - big_lo) as usize + 1;
    let mut src = vec![0u64; big_span.div_ceil(64)];
    for &b in big.coeffs.keys() {
        let i = (b - big_lo) as usize;
        src[i / 64] |= 1 << (i % 64);
    }
    let mut acc = vec![0u64; span.div_ceil(64) + 1];
    for &a in small.coeffs.keys() {
        let shift = (a + big_lo - lo) as usize;
        xor_shifted_up(&mut acc, &src, shift);
    }
    let mut coeffs = BTreeMap::new();
    for (w, &word) in acc.iter().enumerate() {
        let mut bits = word;
        while bits != 0 {
            let t = bits.trailing_zeros() as usize;
            coeffs.insert(lo + (w * 64 + t) as i64, 1);
            bits &= bits - 1;
        }
    }
    LinearRule { p: 2, coeffs }
}

fn mul_dense(small: &LinearRule, big: &LinearRule, lo: i64, span: usize) -> LinearRule {
    let p = small.p;
    let mut acc = vec![0u8; span];
    for (&a, &ca) in &small.coeffs {
        for (&b, &cb) in &big.coeffs {
            let i = (a + b - lo) as usize;
            acc[i] = ((acc[i] as u32 + ca * cb) % p) as u8;
        }
    }
    let coeffs = acc
        .iter()
        .enumerate()
        .filter(|(_, &c)| c != 0)
        .map(|(i, &c)| (lo + i as i64, c as u32))
        .collect();
    LinearRule { p, coeffs }
}

fn pack_bits(symbols: &[Symbol]) -> Vec<u64> {
    let mut out = vec![0u64; symbols.len().div_ceil(64)];
    for (i, &s) in symbols.iter().enumerate() {
        if s != 0 {
            out[i / 64] |= 1 << (i % 64);
        }
    }
    out
}

fn unpack_bits(words: &[u64], len: usize) -> Vec<Symbol> {
    (0..len).map(|i| ((words[i / 64] >> (i % 64)) & 1) as Symbol).collect()
}

/// `dst[i] ^= src[i + shift]` bitwise.
fn xor_shifted_down(dst: &mut [u64], src: &[u64], shift: usize) {
    let (ws, bs) = (shift / 64, shift % 64);
    for (i, d) in dst.iter_mut().enumerate() {
        let lo = src.get(i + ws).copied().unwrap_or(0);
        let hi = src.get(i + ws + 1).copied().unwrap_or(0);
        *d ^= if bs == 0 { lo } else { (lo >> bs) | (hi << (64 - bs)) };
    }
}

/// `dst[i + shift] ^= src[i]` bitwise.
fn xor_shifted_up(dst: &mut [u64], src: &[u64], shift: usize) {
    let (ws, bs) = (shift / 64, shift % 64);
    for (i, &s) in src.iter().enumerate() {
        if s == 0 {
            continue;
        }
        dst[i + ws] ^= s << bs;
        if bs != 0 {
            if let Some(d) = dst.get_mut(i + ws + 1) {
                *d ^= s >> (64 - bs);
            }
        }
    }
}

/// A rule given by its full lookup table. Entry index is
/// `Σ_j c_j·A^{k−1−j}` for the neighbourhood tuple `(c_0, …, c_{k−1})`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct GeneralRule {
    alphabet: u32,
    neighbourhood: Vec<i64>,
    table: Vec<Symbol>,
}

impl GeneralRule {
    pub fn new(alphabet: u32, neighbourhood: Vec<i64>, table: Vec<Symbol>) -> Result<GeneralRule> {
        if alphabet == 0 || alphabet > 256 {
            return Err(Error::InvalidRule(format!("alphabet size {alphabet}")));
        }
        if neighbourhood.is_empty() {
            return Err(Error::InvalidRule("empty neighbourhood".into()));
        }
        let mut sorted = neighbourhood.clone();
        sorted.sort_unstable();
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidRule("repeated neighbourhood offset".into()));
        }
        let size = (alphabet as u128)
            .checked_pow(neighbourhood.len() as u32)
            .unwrap_or(u128::MAX);
        if size > MAX_TABLE {
            return Err(Error::TableTooLarge { size });
        }
        if table.len() as u128 != size {
            return Err(Error::InvalidRule(format!(
                "table has {} entries, expected {size}",
                table.len()
            )));
        }
        if table.iter().any(|&s| s as u32 >= alphabet) {
            return Err(Error::InvalidRule("table entry outside the alphabet".into()));
        }
        Ok(GeneralRule {
            alphabet,
            neighbourhood,
            table,
        })
    }

    pub fn from_fn(
        alphabet: u32,
        neighbourhood: Vec<i64>,
        f: impl Fn(&[Symbol]) -> Symbol,
    ) -> Result<GeneralRule> {
        let k = neighbourhood.len() as u32;
        let size = (alphabet as u128).checked_pow(k).unwrap_or(u128::MAX);
        if size > MAX_TABLE {
            return Err(Error::TableTooLarge { size });
        }
        let mut tuple = vec![0 as Symbol; k as usize];
        let table = (0..size as usize)
            .map(|mut idx| {
                for c in tuple.iter_mut().rev() {
                    *c = (idx % alphabet as usize) as Symbol;
                    idx /= alphabet as usize;
                }
                f(&tuple)
            })
            .collect();
        GeneralRule::new(alphabet, neighbourhood, table)
    }

    /// Binary majority vote over `{−1, 0, 1}`.
    pub fn majority3() -> GeneralRule {
        GeneralRule::from_fn(2, vec![-1, 0, 1], |t| {
            Symbol::from(t.iter().filter(|&&c| c == 1).count() >= 2)
        })
        .expect("small table")
    }

    pub fn from_linear(rule: &LinearRule) -> Result<GeneralRule> {
        let nb: Vec<i64> = rule.coefficients().keys().copied().collect();
        GeneralRule::from_fn(rule.modulus(), nb, |t| rule.local(t))
    }

    pub fn alphabet(&self) -> u32 {
        self.alphabet
    }

    pub fn neighbourhood(&self) -> &[i64] {
        &self.neighbourhood
    }

    pub fn table(&self) -> &[Symbol] {
        &self.table
    }

    pub fn local(&self, tuple: &[Symbol]) -> Symbol {
        let a = self.alphabet as usize;
        let idx = tuple.iter().fold(0usize, |acc, &c| acc * a + c as usize);
        self.table[idx]
    }

    pub fn apply_window(&self, w: &SymbolWindow) -> Result<SymbolWindow> {
        if w.alphabet() != self.alphabet {
            return Err(Error::AlphabetMismatch {
                expected: self.alphabet,
                found: w.alphabet(),
            });
        }
        let lo = *self.neighbourhood.iter().min().expect("nonempty");
        let hi = *self.neighbourhood.iter().max().expect("nonempty");
        let span = (hi - lo) as usize;
        if w.len() <= span {
            return Err(Error::WindowTooSmall {
                needed: span + 1,
                len: w.len(),
            });
        }
        let out_len = w.len() - span;
        let input = w.symbols();
        let shifts: Vec<usize> = self.neighbourhood.iter().map(|&b| (hi - b) as usize).collect();
        let a = self.alphabet as usize;
        let out = (0..out_len)
            .map(|i| {
                let idx = shifts.iter().fold(0usize, |acc, &s| acc * a + input[i + s] as usize);
                self.table[idx]
            })
            .collect();
        SymbolWindow::new(w.origin() + hi, self.alphabet, out)
    }

    fn hex_width(&self) -> usize {
        let mut w = 1;
        while (16u64).pow(w as u32) < self.alphabet as u64 {
            w += 1;
        }
        w
    }
}

/// Either kind of local rule.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Rule {
    Linear(LinearRule),
    General(GeneralRule),
}

impl Rule {
    pub fn alphabet(&self) -> u32 {
        match self {
            Rule::Linear(r) => r.modulus(),
            Rule::General(r) => r.alphabet(),
        }
    }

    /// Offsets in the order in which [`Rule::local`] reads its tuple.
    pub fn neighbourhood(&self) -> Vec<i64> {
        match self {
            Rule::Linear(r) => r.coefficients().keys().copied().collect(),
            Rule::General(r) => r.neighbourhood().to_vec(),
        }
    }

    pub fn local(&self, tuple: &[Symbol]) -> Symbol {
        match self {
            Rule::Linear(r) => r.local(tuple),
            Rule::General(r) => r.local(tuple),
        }
    }

    pub fn apply_window(&self, w: &SymbolWindow) -> Result<SymbolWindow> {
        match self {
            Rule::Linear(r) => r.apply_window(w),
            Rule::General(r) => r.apply_window(w),
        }
    }

    pub fn as_linear(&self) -> Option<&LinearRule> {
        match self {
            Rule::Linear(r) => Some(r),
            Rule::General(_) => None,
        }
    }

    pub fn is_identity(&self) -> bool {
        match self {
            Rule::Linear(r) => r.is_identity(),
            Rule::General(r) => {
                r.neighbourhood() == [0] && r.table().iter().enumerate().all(|(i, &s)| s as usize == i)
            }
        }
    }
}

impl From<LinearRule> for Rule {
    fn from(r: LinearRule) -> Rule {
        Rule::Linear(r)
    }
}

impl From<GeneralRule> for Rule {
    fn from(r: GeneralRule) -> Rule {
        Rule::General(r)
    }
}

impl fmt::Display for LinearRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "lin:p={}:", self.p)?;
        for (i, (&b, &c)) in self.coeffs.iter().enumerate() {
            if i > 0 {
                write!(f, "+")?;
            }
            match (b, c) {
                (0, c) => write!(f, "{c}")?,
                (b, 1) => write!(f, "x^{b}")?,
                (b, c) => write!(f, "{c}x^{b}")?,
            }
        }
        Ok(())
    }
}

impl fmt::Display for GeneralRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let nb: Vec<String> = self.neighbourhood.iter().map(i64::to_string).collect();
        write!(f, "gen:A={}:B=[{}]:table=", self.alphabet, nb.join(","))?;
        let w = self.hex_width();
        for s in &self.table {
            write!(f, "{:0w$x}", s)?;
        }
        Ok(())
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Rule::Linear(r) => r.fmt(f),
            Rule::General(r) => r.fmt(f),
        }
    }
}

fn parse_term(t: &str) -> Result<(i64, i64)> {
    let bad = || parse_err("rule", format!("bad term {t}"));
    match t.find('x') {
        None => Ok((0, t.parse().map_err(|_| bad())?)),
        Some(i) => {
            let c = match &t[..i] {
                "" => 1,
                c => c.trim_end_matches('*').parse().map_err(|_| bad())?,
            };
            let e = match &t[i + 1..] {
                "" => 1,
                e => e
                    .strip_prefix('^')
                    .and_then(|e| e.parse().ok())
                    .ok_or_else(bad)?,
            };
            Ok((e, c))
        }
    }
}

impl FromStr for LinearRule {
    type Err = Error;

    fn from_str(s: &str) -> Result<LinearRule> {
        let s: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        let body = s
            .strip_prefix("lin:p=")
            .ok_or_else(|| parse_err("rule", "expected lin:p=<p>:<poly>"))?;
        let (p, poly) = body
            .split_once(':')
            .ok_or_else(|| parse_err("rule", "missing polynomial"))?;
        let p: u32 = p.parse().map_err(|_| parse_err("rule", "bad modulus"))?;
        // Split on '+' that are not part of an exponent sign.
        let mut terms = Vec::new();
        let mut cur = String::new();
        for ch in poly.chars() {
            if ch == '+' && !cur.ends_with('^') && !cur.is_empty() {
                terms.push(std::mem::take(&mut cur));
            } else {
                cur.push(ch);
            }
        }
        terms.push(cur);
        let coeffs = terms
            .iter()
            .map(|t| parse_term(t))
            .collect::<Result<Vec<_>>>()?;
        LinearRule::new(p, coeffs)
    }
}

impl FromStr for GeneralRule {
    type Err = Error;

    fn from_str(s: &str) -> Result<GeneralRule> {
        let s: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        let bad = |d: &str| parse_err("rule", d.to_string());
        let body = s.strip_prefix("gen:A=").ok_or_else(|| bad("expected gen:A="))?;
        let (a, rest) = body.split_once(':').ok_or_else(|| bad("missing neighbourhood"))?;
        let alphabet: u32 = a.parse().map_err(|_| bad("bad alphabet"))?;
        let rest = rest.strip_prefix("B=[").ok_or_else(|| bad("expected B=[…]"))?;
        let (nb, rest) = rest.split_once(']').ok_or_else(|| bad("unclosed neighbourhood"))?;
        let neighbourhood = nb
            .split(',')
            .map(|t| t.parse::<i64>().map_err(|_| bad("bad offset")))
            .collect::<Result<Vec<_>>>()?;
        let hex = rest.strip_prefix(":table=").ok_or_else(|| bad("expected :table="))?;
        let probe = GeneralRule {
            alphabet,
            neighbourhood: vec![],
            table: vec![],
        };
        let w = probe.hex_width();
        if hex.len() % w != 0 || !hex.is_ascii() {
            return Err(bad("table length is not a multiple of the entry width"));
        }
        let table = (0..hex.len() / w)
            .map(|i| {
                u32::from_str_radix(&hex[i * w..(i + 1) * w], 16)
                    .ok()
                    .and_then(|v| Symbol::try_from(v).ok())
                    .ok_or_else(|| bad("bad hex entry"))
            })
            .collect::<Result<Vec<_>>>()?;
        GeneralRule::new(alphabet, neighbourhood, table)
    }
}

impl FromStr for Rule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Rule> {
        let t = s.trim();
        if t.starts_with("lin:") {
            Ok(Rule::Linear(t.parse()?))
        } else if t.starts_with("gen:") {
            Ok(Rule::General(t.parse()?))
        } else if t == "majority3" {
            Ok(Rule::General(GeneralRule::majority3()))
        } else {
            Err(parse_err("rule", format!("unknown form {t}")))
        }
    }
}

impl Serialize for Rule {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Rule {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        String::deserialize(d)?
            .parse()
            .map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lin(s: &str) -> LinearRule {
        s.parse().unwrap()
    }

    fn naive_power(r: &LinearRule, n: u64) -> LinearRule {
        let mut acc = LinearRule::identity(r.modulus()).unwrap();
        for _ in 0..n {
            acc = acc.mul(r).unwrap();
        }
        acc
    }

    #[test]
    fn ledrappier_power_75() {
        let r = lin("lin:p=2:1+x^1");
        assert_eq!(r.power(75).unwrap().support_size(), 16);
        assert_eq!(nu(75), 4);
    }

    #[test]
    fn power_zero_is_identity() {
        assert!(lin("lin:p=3:1+2x^1").power(0).unwrap().is_identity());
    }

    #[test]
    fn frobenius_power_of_two() {
        let r = lin("lin:p=2:1+x^1");
        for m in 0..40 {
            let expect = LinearRule::new(2, [(0, 1), (1i64 << m, 1)]).unwrap();
            assert_eq!(r.power(1 << m).unwrap(), expect);
        }
    }

    #[test]
    fn power_matches_naive() {
        for s in ["lin:p=2:1+x^1+x^2", "lin:p=3:1+2x^1", "lin:p=5:2+x^-1+3x^2", "lin:p=3:x^-2+x^3"] {
            let r = lin(s);
            for n in [0, 1, 2, 7, 9, 25, 31] {
                assert_eq!(r.power(n).unwrap(), naive_power(&r, n), "{s} ^ {n}");
            }
        }
    }

    #[test]
    fn dense_and_sparse_products_agree() {
        let a = lin("lin:p=2:1+x^1+x^3+x^70+x^130");
        let b = naive_power(&lin("lin:p=2:1+x^1+x^2"), 50);
        let dense = a.mul(&b).unwrap();
        let mut sparse: HashMap<i64, u32> = HashMap::new();
        for (&x, _) in a.coefficients() {
            for (&y, _) in b.coefficients() {
                *sparse.entry(x + y).or_default() ^= 1;
            }
        }
        let sparse: BTreeMap<i64, u32> = sparse.into_iter().filter(|(_, c)| *c != 0).collect();
        assert_eq!(dense.coefficients(), &sparse);
    }

    #[test]
    fn lucas() {
        assert_eq!(lucas_binom(5, 2, 2), 0);
        assert_eq!(lucas_binom(17, 0, 3), 1);
        assert_eq!(lucas_binom(10, 3, 7), (120 % 7) as u32);
        assert_eq!(lucas_binom(3, 5, 2), 0);
    }

    #[test]
    fn popcount() {
        assert_eq!(nu(0), 0);
        assert_eq!(nu(1 << 33), 1);
    }

    #[test]
    fn traces() {
        assert_eq!(lin("lin:p=2:1+x^1").trace(), 0);
        assert_eq!(lin("lin:p=2:1+x^1+x^2").trace(), 1);
        assert_eq!(LinearRule::identity(7).unwrap().trace(), 1);
    }

    #[test]
    fn apply_linear_window() {
        let w = SymbolWindow::new(0, 2, vec![1, 1, 0, 0]).unwrap();
        let out = lin("lin:p=2:1+x^1").apply_window(&w).unwrap();
        assert_eq!(out.symbols(), &[0, 1, 0]);
        assert_eq!(out.origin(), 1);
        let id = LinearRule::identity(2).unwrap().apply_window(&w).unwrap();
        assert_eq!(id, w);
        assert!(matches!(
            lin("lin:p=2:1+x^5").apply_window(&w),
            Err(Error::WindowTooSmall { .. })
        ));
    }

    #[test]
    fn bit_parallel_matches_table() {
        let r = lin("lin:p=2:x^-3+1+x^2+x^67");
        let g = GeneralRule::from_linear(&r).unwrap();
        let sym: Vec<Symbol> = (0..400u32).map(|i| ((i * 7919 + i / 3) % 5 % 2) as Symbol).collect();
        let w = SymbolWindow::new(-20, 2, sym).unwrap();
        assert_eq!(r.apply_window(&w).unwrap(), g.apply_window(&w).unwrap());
    }

    #[test]
    fn majority_on_inert_window() {
        let w = SymbolWindow::new(0, 2, vec![0; 5]).unwrap();
        let out = GeneralRule::majority3().apply_window(&w).unwrap();
        assert_eq!(out.symbols(), &[0, 0, 0]);
        assert_eq!(out.origin(), 1);
    }

    #[test]
    fn rule_text_round_trip() {
        for s in [
            "lin:p=2:1+x^1",
            "lin:p=3:1+2x^1",
            "lin:p=5:2x^-1+1+4x^3",
            "gen:A=2:B=[-1,0,1]:table=00010111",
            "gen:A=17:B=[0]:table=100f0e0d0c0b0a09080706050403020100",
        ] {
            let r: Rule = s.parse().unwrap();
            assert_eq!(r.to_string(), s);
        }
        assert_eq!(
            "lin:p=2:1+x+x^2".parse::<Rule>().unwrap().to_string(),
            "lin:p=2:1+x^1+x^2"
        );
        assert_eq!(Rule::General(GeneralRule::majority3()).to_string(), "gen:A=2:B=[-1,0,1]:table=00010111");
    }

    #[test]
    fn table_limit() {
        assert!(matches!(
            GeneralRule::from_fn(2, (0..25).collect(), |_| 0),
            Err(Error::TableTooLarge { .. })
        ));
        assert!(GeneralRule::new(2, vec![0, 0], vec![0; 4]).is_err());
    }
}
