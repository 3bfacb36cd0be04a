//! Trajectories `P_σ(t)_ℓ = P(t + ℓα)` over finite windows, estimators and
//! tiling checks.

use num_rational::Ratio;
use num_traits::ToPrimitive;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exact_torus::{Interval, TorusPoint};
use crate::induced::{induced_iterate, Strategy};
use crate::par::{self, Parallelism};
use crate::partition::{sym_diff_distance, IntervalPartition, Keyed, Symbol};
use crate::rules::Rule;
use crate::window::SymbolWindow;

const CHUNK: i64 = 1 << 16;

/// Arc lookup by `f64` enclosures, with exact fallback.
struct Locator<'a> {
    p: &'a IntervalPartition,
    /// Running maximum of the upper key bounds.
    hi_max: Vec<f64>,
    /// Suffix minimum of the lower key bounds.
    lo_min: Vec<f64>,
    alpha: (f64, f64),
}

impl<'a> Locator<'a> {
    fn new(p: &'a IntervalPartition) -> Self {
        let arcs = p.arcs();
        let mut hi_max = Vec::with_capacity(arcs.len());
        let mut m = f64::NEG_INFINITY;
        for a in arcs {
            m = m.max(a.start.key.hi);
            hi_max.push(m);
        }
        let mut lo_min = vec![0.0; arcs.len()];
        let mut m = f64::INFINITY;
        for (i, a) in arcs.iter().enumerate().rev() {
            m = m.min(a.start.key.lo);
            lo_min[i] = m;
        }
        Locator {
            p,
            hi_max,
            lo_min,
            alpha: p.angle().bounds_f64(),
        }
    }

    fn label(&self, x: &TorusPoint, qf: f64) -> Result<Symbol> {
        let arcs = self.p.arcs();
        if arcs.len() == 1 {
            return Ok(arcs[0].label);
        }
        let n = x.z() as f64;
        let (a_lo, a_hi) = self.alpha;
        let (lo, hi) = if n >= 0.0 {
            (n * a_lo + qf, n * a_hi + qf)
        } else {
            (n * a_hi + qf, n * a_lo + qf)
        };
        let w = (n.abs() + 2.0) * 4.0 * f64::EPSILON;
        let (lo, hi) = (lo - w, hi + w);
        let fl = lo.floor();
        if hi.floor() == fl {
            let (lo, hi) = (lo - fl, hi - fl);
            // Arcs certainly starting at or before x, and the first certainly after.
            let before = self.hi_max.partition_point(|&h| h <= lo);
            let after = self.lo_min.partition_point(|&l| l <= hi);
            if before == after {
                let i = if before == 0 { arcs.len() - 1 } else { before - 1 };
                return Ok(arcs[i].label);
            }
        }
        let k = Keyed::new(self.p.angle(), x.clone());
        Ok(arcs[self.p.locate(&k)?].label)
    }
}

/// The window `[lo, hi)` of `P_σ(t)`.
pub fn trajectory(
    p: &IntervalPartition,
    t: &TorusPoint,
    lo: i64,
    hi: i64,
    mode: Parallelism,
) -> Result<SymbolWindow> {
    if hi <= lo {
        return Err(Error::InvalidWindow(format!("empty window [{lo}, {hi})")));
    }
    let loc = Locator::new(p);
    let qf = t.q().to_f64().unwrap_or(0.0);
    let parts = par::map_slice(mode, &par::chunks(lo, hi, CHUNK), |&(a, b)| {
        (a..b)
            .map(|l| loc.label(&t.shift(l)?, qf))
            .collect::<Result<Vec<Symbol>>>()
    });
    let mut symbols = Vec::with_capacity((hi - lo) as usize);
    for part in parts {
        symbols.extend(part?);
    }
    SymbolWindow::new(lo, p.alphabet(), symbols)
}

/// Fraction of disagreeing cells over the common domain.
pub fn besicovitch_estimate(w1: &SymbolWindow, w2: &SymbolWindow) -> Result<Ratio<u64>> {
    if w1.alphabet() != w2.alphabet() {
        return Err(Error::AlphabetMismatch {
            expected: w1.alphabet(),
            found: w2.alphabet(),
        });
    }
    let lo = w1.origin().max(w2.origin());
    let hi = w1.end().min(w2.end());
    if hi <= lo {
        return Err(Error::EmptyOverlap);
    }
    let a = &w1.symbols()[(lo - w1.origin()) as usize..(hi - w1.origin()) as usize];
    let b = &w2.symbols()[(lo - w2.origin()) as usize..(hi - w2.origin()) as usize];
    let diff = a.iter().zip(b).filter(|(x, y)| x != y).count() as u64;
    Ok(Ratio::new(diff, (hi - lo) as u64))
}

/// `d_Δ(P, Q)` next to twice the finite-window Besicovitch estimate.
#[derive(Clone, Debug, Serialize)]
pub struct MetricIdentity {
    pub d_delta: Interval,
    #[serde(serialize_with = "ser_ratio")]
    pub twice_db: Ratio<u64>,
    pub window: u64,
    /// `|mid(d_Δ) − 2·d̂_B|`.
    pub difference: f64,
}

pub(crate) fn ratio_f64(r: &Ratio<u64>) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

fn ser_ratio<S: serde::Serializer>(r: &Ratio<u64>, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_f64(ratio_f64(r))
}

pub fn metric_identity_estimate(
    p: &IntervalPartition,
    q: &IntervalPartition,
    t: &TorusPoint,
    lo: i64,
    hi: i64,
    mode: Parallelism,
) -> Result<MetricIdentity> {
    let d_delta = sym_diff_distance(p, q, 64)?;
    let wp = trajectory(p, t, lo, hi, mode)?;
    let wq = trajectory(q, t, lo, hi, mode)?;
    let twice_db = besicovitch_estimate(&wp, &wq)? * 2;
    Ok(MetricIdentity {
        difference: (d_delta.mid_f64() - ratio_f64(&twice_db)).abs(),
        d_delta,
        twice_db,
        window: (hi - lo) as u64,
    })
}

/// Checks `Φ^n(P_σ(t)) = (Φ_T^n P)_σ(t)` on the window `[lo, hi)` shrunk by
/// `n` applications of the rule. The left side runs the rule on symbols, the
/// right side runs the induced map on the partition.
pub fn conjugacy_check(
    rule: &Rule,
    p: &IntervalPartition,
    t: &TorusPoint,
    n: u64,
    lo: i64,
    hi: i64,
    mode: Parallelism,
) -> Result<bool> {
    let nb = rule.neighbourhood();
    let span = (nb[nb.len() - 1] - nb[0]) as u64;
    let len = (hi - lo).max(0) as u64;
    if len <= n.saturating_mul(span) {
        return Err(Error::WindowTooSmall {
            needed: (n.saturating_mul(span) + 1) as usize,
            len: len as usize,
        });
    }
    let mut w = trajectory(p, t, lo, hi, mode)?;
    for _ in 0..n {
        w = rule.apply_window(&w)?;
    }
    let q = induced_iterate(rule, p, n, Strategy::Power)?;
    let v = trajectory(&q, t, w.origin(), w.end(), mode)?;
    Ok(v == w)
}

/// Outcome of [`verify_tiling`].
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TilingReport {
    pub window_origin: i64,
    pub window_len: usize,
    pub tile_len: usize,
    /// Matches kept after thinning, sorted.
    pub skeleton: Vec<i64>,
    /// Matches discarded by thinning.
    pub discarded: usize,
    /// Skeleton points per cell.
    pub density: f64,
    /// Non-spacer cells outside the covered set, away from the window edges.
    pub spacer_violations: usize,
    /// Overlapping kept blocks.
    pub overlap_violations: usize,
    /// Kept blocks that do not reproduce the tile.
    pub match_violations: usize,
    /// Covered fraction of the window.
    pub coverage: f64,
    /// Covered fraction of the window with `tile_len` cells trimmed on each side.
    pub interior_coverage: f64,
    pub epsilon: f64,
    /// No violations and interior coverage above `1 − ε`.
    pub tiled: bool,
}

/// Finds the skeleton of `w` for `tile` and checks the tiling conditions.
/// A block at skeleton point `j` occupies `j + [tile.origin, tile.end)`.
pub fn verify_tiling(w: &SymbolWindow, tile: &SymbolWindow, spacer: Symbol, epsilon: f64) -> TilingReport {
    let l = tile.len();
    let off = tile.origin();
    let mut raw: Vec<i64> = Vec::new();
    if l > 0 && l <= w.len() {
        let finder = memchr::memmem::Finder::new(tile.symbols());
        let mut pos = 0;
        while let Some(i) = finder.find(&w.symbols()[pos..]) {
            raw.push(w.origin() + (pos + i) as i64 - off);
            pos += i + 1;
        }
    }
    let mut skeleton: Vec<i64> = Vec::new();
    for &j in &raw {
        if skeleton.last().is_none_or(|&k| j >= k + l as i64) {
            skeleton.push(j);
        }
    }
    let overlap_violations = skeleton
        .windows(2)
        .filter(|p| p[1] < p[0] + l as i64)
        .count();
    let match_violations = skeleton
        .iter()
        .filter(|&&j| {
            w.slice(j + off, j + off + l as i64)
                .map_or(true, |s| s.symbols() != tile.symbols())
        })
        .count();
    let mut covered = vec![false; w.len()];
    for &j in &skeleton {
        let a = (j + off - w.origin()) as usize;
        covered[a..a + l].iter_mut().for_each(|c| *c = true);
    }
    let n = w.len();
    let (ia, ib) = (l.min(n), n.saturating_sub(l).max(l.min(n)));
    let spacer_violations = (ia..ib)
        .filter(|&i| !covered[i] && w.symbols()[i] != spacer)
        .count();
    let frac = |a: usize, b: usize| {
        if b > a {
            covered[a..b].iter().filter(|&&c| c).count() as f64 / (b - a) as f64
        } else {
            0.0
        }
    };
    let coverage = frac(0, n);
    let interior_coverage = frac(ia, ib);
    TilingReport {
        window_origin: w.origin(),
        window_len: n,
        tile_len: l,
        discarded: raw.len() - skeleton.len(),
        density: if n == 0 { 0.0 } else { skeleton.len() as f64 / n as f64 },
        spacer_violations,
        overlap_violations,
        match_violations,
        coverage,
        interior_coverage,
        epsilon,
        tiled: spacer_violations == 0
            && overlap_violations == 0
            && match_violations == 0
            && interior_coverage > 1.0 - epsilon,
        skeleton,
    }
}
