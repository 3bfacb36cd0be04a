//! Finite windows of a configuration `x ∈ A^ℤ`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{parse_err, Error, Result};
use crate::partition::Symbol;

/// Symbols `x_origin, …, x_{origin+len−1}`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SymbolWindow {
    origin: i64,
    alphabet: u32,
    symbols: Vec<Symbol>,
}

impl SymbolWindow {
    pub fn new(origin: i64, alphabet: u32, symbols: Vec<Symbol>) -> Result<Self> {
        if alphabet == 0 || alphabet > 256 {
            return Err(Error::InvalidWindow(format!("alphabet size {alphabet}")));
        }
        if let Some(s) = symbols.iter().find(|&&s| s as u32 >= alphabet) {
            return Err(Error::InvalidWindow(format!("symbol {s} ≥ {alphabet}")));
        }
        Ok(SymbolWindow {
            origin,
            alphabet,
            symbols,
        })
    }

    pub fn origin(&self) -> i64 {
        self.origin
    }

    /// One past the last index.
    pub fn end(&self) -> i64 {
        self.origin + self.symbols.len() as i64
    }

    pub fn alphabet(&self) -> u32 {
        self.alphabet
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn symbols(&self) -> &[Symbol] {
        &self.symbols
    }

    pub fn into_symbols(self) -> Vec<Symbol> {
        self.symbols
    }

    /// `x_i`, if `i` lies in the window.
    pub fn get(&self, i: i64) -> Option<Symbol> {
        let k = i.checked_sub(self.origin)?;
        if k < 0 {
            return None;
        }
        self.symbols.get(k as usize).copied()
    }

    /// The sub-window on `[lo, hi)`.
    pub fn slice(&self, lo: i64, hi: i64) -> Result<SymbolWindow> {
        if lo < self.origin || hi > self.end() || lo > hi {
            return Err(Error::InvalidWindow(format!(
                "[{lo}, {hi}) not inside [{}, {})",
                self.origin,
                self.end()
            )));
        }
        let a = (lo - self.origin) as usize;
        let b = (hi - self.origin) as usize;
        Ok(SymbolWindow {
            origin: lo,
            alphabet: self.alphabet,
            symbols: self.symbols[a..b].to_vec(),
        })
    }

    /// The same symbols re-indexed to start at `origin`.
    pub fn with_origin(mut self, origin: i64) -> SymbolWindow {
        self.origin = origin;
        self
    }

    /// Run-length form `o=<origin>;A=<alphabet>;<count>x<symbol>,…`.
    pub fn to_rle(&self) -> String {
        let mut out = format!("o={};A={};", self.origin, self.alphabet);
        let mut runs = Vec::new();
        let mut i = 0;
        while i < self.symbols.len() {
            let s = self.symbols[i];
            let mut j = i;
            while j < self.symbols.len() && self.symbols[j] == s {
                j += 1;
            }
            runs.push(format!("{}x{}", j - i, s));
            i = j;
        }
        out.push_str(&runs.join(","));
        out
    }

    pub fn from_rle(s: &str) -> Result<SymbolWindow> {
        let bad = |d: &str| parse_err("window", d.to_string());
        let mut parts = s.trim().splitn(3, ';');
        let origin = parts
            .next()
            .and_then(|p| p.strip_prefix("o="))
            .and_then(|p| p.parse::<i64>().ok())
            .ok_or_else(|| bad("missing origin header"))?;
        let alphabet = parts
            .next()
            .and_then(|p| p.strip_prefix("A="))
            .and_then(|p| p.parse::<u32>().ok())
            .ok_or_else(|| bad("missing alphabet header"))?;
        let mut symbols = Vec::new();
        for run in parts.next().unwrap_or("").split(',').filter(|r| !r.is_empty()) {
            let (n, sym) = run.split_once('x').ok_or_else(|| bad(run))?;
            let n: usize = n.parse().map_err(|_| bad(run))?;
            let sym: Symbol = sym.parse().map_err(|_| bad(run))?;
            symbols.extend(std::iter::repeat_n(sym, n));
        }
        SymbolWindow::new(origin, alphabet, symbols)
    }
}

impl fmt::Display for SymbolWindow {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_rle())
    }
}

impl FromStr for SymbolWindow {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        SymbolWindow::from_rle(s)
    }
}

impl Serialize for SymbolWindow {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for SymbolWindow {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        String::deserialize(d)?
            .parse()
            .map_err(serde::de::Error::custom)
    }
}
