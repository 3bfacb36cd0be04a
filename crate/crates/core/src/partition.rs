//! Labelled interval partitions of the circle with exact endpoints.

use std::cmp::Ordering;
use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use serde::{Deserialize, Serialize};

use crate::error::{parse_err, Error, Result};
use crate::exact_torus::{Affine, Angle, Enclosure, Interval, TorusPoint};

pub type Symbol = u8;

/// A torus point with its cached `f64` enclosure and integer part.
#[derive(Clone, Debug)]
pub struct Keyed {
    pub point: TorusPoint,
    pub key: Enclosure,
    pub floor: i64,
}

impl Keyed {
    pub fn new(angle: &Angle, point: TorusPoint) -> Keyed {
        let (key, floor) = angle.enclosure_and_floor(&point);
        Keyed { point, key, floor }
    }

    /// The point as a real number in `[0, 1)`.
    pub fn unwrapped(&self) -> Affine {
        Affine {
            z: self.point.z(),
            c: self.point.q() - BigRational::from_integer(self.floor.into()),
        }
    }

    pub fn cmp(&self, other: &Keyed, angle: &Angle) -> Result<Ordering> {
        if self.point == other.point {
            return Ok(Ordering::Equal);
        }
        match self.key.cmp(&other.key) {
            Some(o) => Ok(o),
            None => angle.compare(&self.point, &other.point),
        }
    }
}

/// Sorts by circle position, falling back to exact comparison when the
/// enclosures overlap.
pub(crate) fn sort_by_position<T>(
    angle: &Angle,
    items: &mut [T],
    key: impl Fn(&T) -> &Keyed,
) -> Result<()> {
    let mut failure = None;
    items.sort_by(|a, b| match key(a).cmp(key(b), angle) {
        Ok(o) => o,
        Err(e) => {
            failure.get_or_insert(e);
            Ordering::Equal
        }
    });
    failure.map_or(Ok(()), Err)
}

/// Length of the arc from `a` to `b` going forward, as an exact affine form.
fn forward_length(a: &Keyed, b: &Keyed, wraps: bool) -> Result<Affine> {
    let mut len = b.unwrapped().sub(&a.unwrapped())?;
    if wraps {
        len.c += BigRational::from_integer(1.into());
    }
    Ok(len)
}

#[derive(Clone, Debug)]
pub struct ArcEntry {
    pub start: Keyed,
    pub label: Symbol,
}

/// A finite labelled partition of the circle into half-open arcs
/// `[start_i, start_{i+1})`, kept in canonical form.
#[derive(Clone, Debug)]
pub struct IntervalPartition {
    angle: Angle,
    alphabet: u32,
    arcs: Vec<ArcEntry>,
}

impl PartialEq for IntervalPartition {
    fn eq(&self, other: &Self) -> bool {
        self.angle == other.angle
            && self.alphabet == other.alphabet
            && self.arcs.len() == other.arcs.len()
            && self
                .arcs
                .iter()
                .zip(&other.arcs)
                .all(|(a, b)| a.label == b.label && a.start.point == b.start.point)
    }
}

impl Eq for IntervalPartition {}

fn check_alphabet(alphabet: u32) -> Result<()> {
    if alphabet == 0 || alphabet > 256 {
        return Err(Error::InvalidPartition(format!(
            "alphabet size {alphabet} outside 1..=256"
        )));
    }
    Ok(())
}

impl IntervalPartition {
    /// The one-cell partition with every point labelled `label`.
    pub fn trivial(angle: &Angle, alphabet: u32, label: Symbol) -> Result<Self> {
        check_alphabet(alphabet)?;
        if label as u32 >= alphabet {
            return Err(Error::InvalidPartition(format!("label {label} ≥ {alphabet}")));
        }
        Ok(IntervalPartition {
            angle: angle.clone(),
            alphabet,
            arcs: vec![ArcEntry {
                start: Keyed::new(angle, TorusPoint::zero()),
                label,
            }],
        })
    }

    /// Builds a partition from arc starts and the label that follows each one.
    /// Points must be distinct; equal-label neighbours are merged.
    pub fn from_boundaries(
        angle: &Angle,
        alphabet: u32,
        points: Vec<(TorusPoint, Symbol)>,
    ) -> Result<Self> {
        let keyed = points
            .into_iter()
            .map(|(p, l)| (Keyed::new(angle, p), l))
            .collect();
        Self::from_keyed(angle, alphabet, keyed)
    }

    pub(crate) fn from_keyed(
        angle: &Angle,
        alphabet: u32,
        mut points: Vec<(Keyed, Symbol)>,
    ) -> Result<Self> {
        check_alphabet(alphabet)?;
        if points.is_empty() {
            return Err(Error::InvalidPartition("no arcs".into()));
        }
        if let Some((_, l)) = points.iter().find(|(_, l)| *l as u32 >= alphabet) {
            return Err(Error::InvalidPartition(format!("label {l} ≥ {alphabet}")));
        }
        sort_by_position(angle, &mut points, |(k, _)| k)?;
        if points.windows(2).any(|w| w[0].0.point == w[1].0.point) {
            return Err(Error::InvalidPartition("repeated arc start".into()));
        }
        let n = points.len();
        let keep: Vec<bool> = (0..n)
            .map(|i| points[i].1 != points[(i + n - 1) % n].1)
            .collect();
        let first_label = points[0].1;
        let arcs: Vec<ArcEntry> = points
            .into_iter()
            .zip(keep)
            .filter(|(_, k)| *k)
            .map(|((start, label), _)| ArcEntry { start, label })
            .collect();
        if arcs.is_empty() {
            return Self::trivial(angle, alphabet, first_label);
        }
        Ok(IntervalPartition {
            angle: angle.clone(),
            alphabet,
            arcs,
        })
    }

    /// Paints pairwise disjoint half-open arcs `[start, end)` over a
    /// `background` label.
    pub fn from_disjoint_arcs(
        angle: &Angle,
        alphabet: u32,
        background: Symbol,
        arcs: Vec<(TorusPoint, TorusPoint, Symbol)>,
    ) -> Result<Self> {
        if arcs.is_empty() {
            return Self::trivial(angle, alphabet, background);
        }
        // Event kind: Some(label) for a start, None for an end.
        let mut events: Vec<(Keyed, Option<Symbol>)> = Vec::with_capacity(2 * arcs.len());
        for (s, e, l) in arcs {
            if s == e {
                return Err(Error::InvalidPartition("empty arc".into()));
            }
            events.push((Keyed::new(angle, s), Some(l)));
            events.push((Keyed::new(angle, e), None));
        }
        sort_by_position(angle, &mut events, |(k, _)| k)?;
        let mut points: Vec<(Keyed, Symbol)> = Vec::with_capacity(events.len());
        let mut i = 0;
        while i < events.len() {
            let mut j = i;
            let mut start = None;
            while j < events.len() && events[j].0.point == events[i].0.point {
                if let Some(l) = events[j].1 {
                    if start.is_some() {
                        return Err(Error::InvalidPartition("overlapping arcs".into()));
                    }
                    start = Some(l);
                }
                j += 1;
            }
            points.push((events[i].0.clone(), start.unwrap_or(background)));
            i = j;
        }
        Self::from_keyed(angle, alphabet, points)
    }

    pub fn angle(&self) -> &Angle {
        &self.angle
    }

    pub fn alphabet(&self) -> u32 {
        self.alphabet
    }

    pub fn arcs(&self) -> &[ArcEntry] {
        &self.arcs
    }

    pub fn is_trivial(&self) -> bool {
        self.arcs.len() == 1
    }

    /// The label-change points in circular order; empty when trivial.
    pub fn boundary(&self) -> Vec<TorusPoint> {
        if self.is_trivial() {
            return vec![];
        }
        self.arcs.iter().map(|a| a.start.point.clone()).collect()
    }

    pub fn boundary_count(&self) -> usize {
        if self.is_trivial() {
            0
        } else {
            self.arcs.len()
        }
    }

    /// Exact length of arc `i`.
    pub fn arc_length(&self, i: usize) -> Result<Affine> {
        if self.is_trivial() {
            return Ok(Affine::constant(BigRational::from_integer(1.into())));
        }
        let n = self.arcs.len();
        forward_length(&self.arcs[i].start, &self.arcs[(i + 1) % n].start, i + 1 == n)
    }

    /// Exact measure of the cell labelled `label`.
    pub fn cell_length(&self, label: Symbol) -> Result<Affine> {
        let mut total = Affine::zero();
        for (i, a) in self.arcs.iter().enumerate() {
            if a.label == label {
                total = total.add(&self.arc_length(i)?)?;
            }
        }
        Ok(total)
    }

    pub fn measure(&self, label: Symbol, k: u32) -> Result<Interval> {
        Ok(self.angle.eval_affine(&self.cell_length(label)?, k))
    }

    /// Index of the arc containing `x`.
    pub fn locate(&self, x: &Keyed) -> Result<usize> {
        let (mut lo, mut hi) = (0usize, self.arcs.len());
        while lo < hi {
            let mid = (lo + hi) / 2;
            if self.arcs[mid].start.cmp(x, &self.angle)? != Ordering::Greater {
                lo = mid + 1;
            } else {
                hi = mid;
            }
        }
        Ok(if lo == 0 { self.arcs.len() - 1 } else { lo - 1 })
    }

    pub fn label_at(&self, x: &TorusPoint) -> Result<Symbol> {
        let k = Keyed::new(&self.angle, x.clone());
        Ok(self.arcs[self.locate(&k)?].label)
    }

    /// `ρ_t(P)`: every arc moved forward by `t`.
    pub fn rotate(&self, t: &TorusPoint) -> Result<Self> {
        if self.is_trivial() {
            return Ok(self.clone());
        }
        let pts = self
            .arcs
            .iter()
            .map(|a| Ok((a.start.point.add(t)?, a.label)))
            .collect::<Result<Vec<_>>>()?;
        Self::from_boundaries(&self.angle, self.alphabet, pts)
    }

    /// Applies `f` to every label and re-canonicalises.
    pub fn relabel(&self, alphabet: u32, f: impl Fn(Symbol) -> Symbol) -> Result<Self> {
        let pts = self
            .arcs
            .iter()
            .map(|a| (a.start.clone(), f(a.label)))
            .collect();
        Self::from_keyed(&self.angle, alphabet, pts)
    }

    pub fn to_json(&self) -> PartitionJson {
        PartitionJson {
            angle: self.angle.to_string(),
            alphabet: self.alphabet,
            arcs: self
                .arcs
                .iter()
                .map(|a| ArcJson {
                    start: a.start.point.to_string(),
                    label: a.label,
                })
                .collect(),
        }
    }

    pub fn from_json(j: &PartitionJson) -> Result<Self> {
        let angle: Angle = j.angle.parse()?;
        let pts = j
            .arcs
            .iter()
            .map(|a| Ok((a.start.parse::<TorusPoint>()?, a.label)))
            .collect::<Result<Vec<_>>>()?;
        Self::from_boundaries(&angle, j.alphabet, pts)
    }
}

/// JSON mirror of the textual form.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PartitionJson {
    pub angle: String,
    pub alphabet: u32,
    pub arcs: Vec<ArcJson>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ArcJson {
    pub start: String,
    pub label: Symbol,
}

impl fmt::Display for IntervalPartition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} | ", self.angle)?;
        for (i, a) in self.arcs.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{}:{}", a.start.point, a.label)?;
        }
        write!(f, " | A={}", self.alphabet)
    }
}

impl FromStr for IntervalPartition {
    type Err = Error;

    /// `angle | b0:l0, b1:l1, … [| A=n]`. Without the alphabet suffix the
    /// alphabet is the smallest one containing every label, and at least 2.
    fn from_str(s: &str) -> Result<Self> {
        let mut parts = s.split('|').map(str::trim);
        let angle: Angle = parts
            .next()
            .ok_or_else(|| parse_err("partition", "missing angle"))?
            .parse()?;
        let body = parts
            .next()
            .ok_or_else(|| parse_err("partition", "missing arcs"))?;
        let mut pts = Vec::new();
        for item in body.split(',').map(str::trim).filter(|t| !t.is_empty()) {
            let (p, l) = item
                .rsplit_once(':')
                .ok_or_else(|| parse_err("partition", format!("arc {item} lacks a label")))?;
            let l: Symbol = l
                .trim()
                .parse()
                .map_err(|_| parse_err("partition", format!("bad label in {item}")))?;
            pts.push((p.parse::<TorusPoint>()?, l));
        }
        let alphabet = match parts.next() {
            Some(a) => a
                .strip_prefix("A=")
                .and_then(|n| n.trim().parse::<u32>().ok())
                .ok_or_else(|| parse_err("partition", format!("bad alphabet {a}")))?,
            None => pts.iter().map(|(_, l)| *l as u32 + 1).max().unwrap_or(2).max(2),
        };
        Self::from_boundaries(&angle, alphabet, pts)
    }
}

/// The common refinement of several partitions. Arc `i` carries the tuple
/// of input labels it lies under.
#[derive(Clone, Debug)]
pub struct Refinement {
    angle: Angle,
    starts: Vec<Keyed>,
    tuples: Vec<Vec<Symbol>>,
}

impl Refinement {
    pub fn len(&self) -> usize {
        self.starts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.starts.is_empty()
    }

    pub fn starts(&self) -> &[Keyed] {
        &self.starts
    }

    pub fn tuples(&self) -> &[Vec<Symbol>] {
        &self.tuples
    }

    pub fn arc_length(&self, i: usize) -> Result<Affine> {
        let n = self.starts.len();
        if n == 1 {
            return Ok(Affine::constant(BigRational::from_integer(1.into())));
        }
        forward_length(&self.starts[i], &self.starts[(i + 1) % n], i + 1 == n)
    }

    /// Total exact length of the arcs whose tuple satisfies `pred`.
    pub fn length_where(&self, pred: impl Fn(&[Symbol]) -> bool) -> Result<Affine> {
        let mut total = Affine::zero();
        for (i, t) in self.tuples.iter().enumerate() {
            if pred(t) {
                total = total.add(&self.arc_length(i)?)?;
            }
        }
        Ok(total)
    }

    /// Labels each refined arc by `f(tuple)` and canonicalises.
    pub fn to_partition(
        &self,
        alphabet: u32,
        f: impl Fn(&[Symbol]) -> Symbol,
    ) -> Result<IntervalPartition> {
        let pts = self
            .starts
            .iter()
            .zip(&self.tuples)
            .map(|(k, t)| (k.clone(), f(t)))
            .collect();
        IntervalPartition::from_keyed(&self.angle, alphabet, pts)
    }
}

/// Common refinement by a single circular sweep over all arc starts.
pub fn refine(parts: &[&IntervalPartition]) -> Result<Refinement> {
    let first = parts
        .first()
        .ok_or_else(|| Error::InvalidArgument("refine needs at least one partition".into()))?;
    let angle = first.angle.clone();
    if parts.iter().any(|p| p.angle != angle) {
        return Err(Error::AngleMismatch);
    }
    let mut state: Vec<Symbol> = parts.iter().map(|p| p.arcs.last().unwrap().label).collect();
    let mut events: Vec<(&Keyed, usize, Symbol)> = parts
        .iter()
        .enumerate()
        .filter(|(_, p)| !p.is_trivial())
        .flat_map(|(i, p)| p.arcs.iter().map(move |a| (&a.start, i, a.label)))
        .collect();
    if events.is_empty() {
        return Ok(Refinement {
            starts: vec![Keyed::new(&angle, TorusPoint::zero())],
            tuples: vec![state],
            angle,
        });
    }
    sort_by_position(&angle, &mut events, |(k, _, _)| k)?;
    let mut starts = Vec::new();
    let mut tuples = Vec::new();
    let mut i = 0;
    while i < events.len() {
        let here = &events[i].0.point;
        let mut j = i;
        while j < events.len() && events[j].0.point == *here {
            state[events[j].1] = events[j].2;
            j += 1;
        }
        starts.push(events[i].0.clone());
        tuples.push(state.clone());
        i = j;
    }
    Ok(Refinement {
        angle,
        starts,
        tuples,
    })
}

/// `λ{t : P(t) ≠ Q(t)}` as an exact affine form.
pub fn disagreement_length(p: &IntervalPartition, q: &IntervalPartition) -> Result<Affine> {
    refine(&[p, q])?.length_where(|t| t[0] != t[1])
}

/// `d_Δ(P, Q) = Σ_a λ(P_a △ Q_a)`, certified to width `2^-k`.
pub fn sym_diff_distance(p: &IntervalPartition, q: &IntervalPartition, k: u32) -> Result<Interval> {
    let len = disagreement_length(p, q)?.scale(2)?;
    Ok(p.angle.eval_affine(&len, k))
}

/// Exact `λ(P_a ∩ Q_b)`.
pub fn intersection_length(
    p: &IntervalPartition,
    a: Symbol,
    q: &IntervalPartition,
    b: Symbol,
) -> Result<Affine> {
    refine(&[p, q])?.length_where(|t| t[0] == a && t[1] == b)
}

/// Outcome of the simplicity test.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Simplicity {
    pub simple: bool,
    /// A nonzero `t` with `ρ_t(P) = P` when not simple.
    pub witness: Option<TorusPoint>,
}

/// Whether the only rotation fixing `P` is the identity.
pub fn is_simple(p: &IntervalPartition) -> Result<Simplicity> {
    if p.is_trivial() {
        return Err(Error::TrivialPartition);
    }
    let b = p.boundary();
    let base = &b[0];
    for other in &b[1..] {
        let t = other.sub(base)?;
        if p.rotate(&t)? == *p {
            return Ok(Simplicity {
                simple: false,
                witness: Some(t),
            });
        }
    }
    Ok(Simplicity {
        simple: true,
        witness: None,
    })
}

/// True iff every boundary point has the same rational offset.
pub fn is_primitive(p: &IntervalPartition) -> bool {
    let b = p.boundary();
    b.windows(2).all(|w| w[0].q() == w[1].q())
}

/// Boundary points sharing their orbit with no other boundary point.
pub fn transversal_boundary(p: &IntervalPartition) -> Vec<TorusPoint> {
    let b = p.boundary();
    let mut seen: HashSet<&BigRational> = HashSet::new();
    let mut repeated: HashSet<&BigRational> = HashSet::new();
    for x in &b {
        if !seen.insert(x.q()) {
            repeated.insert(x.q());
        }
    }
    b.iter().filter(|x| !repeated.contains(x.q())).cloned().collect()
}

/// Helper for constructing rational offsets in tests and configs.
pub fn rational(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}
