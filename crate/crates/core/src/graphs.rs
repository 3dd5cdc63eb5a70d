//! Wick contraction graphs on two particle lines.
//!
//! Vertices `1..=n` sit on the left line and `n+1..=n+ñ` on the right line.
//! A graph is a perfect matching stored as pairs `(ℓ, ℓ')`, `ℓ < ℓ'`, in
//! increasing order of `ℓ`.
//!
//! Classification:
//! * immediate recollision: `(ℓ, ℓ+1)` with both ends on one line;
//! * rung: `ℓ ≤ n < ℓ'`;
//! * basic ladder: `n = ñ` and the pairs are `(ℓ, 2n+1-ℓ)`;
//! * decorated ladder: every pair is a recollision or a rung, and rungs
//!   ordered by `ℓ` have strictly decreasing `ℓ'`;
//! * crossing: pairs with `ℓ < j < ℓ' < j'`;
//! * nesting: a one-line pair with `ℓ' - ℓ ≥ 3` whose interior is matched
//!   by the recollisions `(ℓ+1, ℓ+2), (ℓ+3, ℓ+4), …`.

use std::fmt;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::kinetic::ShellOperator;
use crate::lattice::ScalarField;

/// Largest `n + ñ` accepted by [`enumerate`]; `13!! = 135135` graphs.
pub const MAX_VERTICES: usize = 14;
/// Largest `n̄` accepted by [`verify_dichotomy`].
pub const MAX_DICHOTOMY_ORDER: usize = 5;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ContractionGraph {
    n: usize,
    ntilde: usize,
    pairs: Vec<(usize, usize)>,
}

impl ContractionGraph {
    /// Validates and canonicalizes an arbitrary matching.
    pub fn new(n: usize, ntilde: usize, pairs: Vec<(usize, usize)>) -> Result<Self> {
        let total = n + ntilde;
        if total % 2 != 0 {
            return Err(Error::invalid("n+ntilde", format!("must be even, got {total}")));
        }
        let mut seen = vec![false; total + 1];
        let mut canon: Vec<(usize, usize)> = Vec::with_capacity(pairs.len());
        for (a, b) in pairs {
            let (l, r) = (a.min(b), a.max(b));
            if l == 0 || r > total || l == r {
                return Err(Error::invalid("pairs", format!("pair {a}-{b} outside 1..={total}")));
            }
            for v in [l, r] {
                if std::mem::replace(&mut seen[v], true) {
                    return Err(Error::invalid("pairs", format!("vertex {v} matched twice")));
                }
            }
            canon.push((l, r));
        }
        if canon.len() * 2 != total {
            return Err(Error::invalid("pairs", "not a perfect matching"));
        }
        canon.sort_unstable();
        Ok(ContractionGraph {
            n,
            ntilde,
            pairs: canon,
        })
    }

    /// Parses the canonical encoding `"ℓ1-ℓ1',ℓ2-ℓ2',…"`.
    pub fn parse(n: usize, ntilde: usize, s: &str) -> Result<Self> {
        let bad = || Error::invalid("pairing", format!("malformed encoding `{s}`"));
        let pairs = s
            .split(',')
            .filter(|t| !t.is_empty())
            .map(|t| {
                let (a, b) = t.split_once('-').ok_or_else(bad)?;
                Ok((a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(n, ntilde, pairs)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn ntilde(&self) -> usize {
        self.ntilde
    }

    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    pub fn encoding(&self) -> String {
        self.to_string()
    }

    fn same_line(&self, a: usize, b: usize) -> bool {
        (a <= self.n) == (b <= self.n)
    }

    fn is_recollision(&self, (l, r): (usize, usize)) -> bool {
        r == l + 1 && self.same_line(l, r)
    }

    fn is_rung(&self, (l, r): (usize, usize)) -> bool {
        l <= self.n && r > self.n
    }

    /// Image under `ℓ ↦ n+ñ+1-ℓ`, which swaps the two lines.
    pub fn mirror(&self) -> ContractionGraph {
        let t = self.n + self.ntilde + 1;
        let pairs = self.pairs.iter().map(|&(a, b)| (t - b, t - a)).collect();
        ContractionGraph::new(self.ntilde, self.n, pairs).expect("mirror of a matching is a matching")
    }
}

impl fmt::Display for ContractionGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, (a, b)) in self.pairs.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{a}-{b}")?;
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct ClassificationFlags {
    pub immediate_recollision_count: usize,
    pub is_basic_ladder: bool,
    pub is_decorated_ladder: bool,
    pub has_crossing: bool,
    pub has_nesting: bool,
}

pub fn classify(g: &ContractionGraph) -> ClassificationFlags {
    let pairs = g.pairs();
    let total = g.n + g.ntilde;
    let mut partner = vec![0usize; total + 1];
    for &(a, b) in pairs {
        partner[a] = b;
        partner[b] = a;
    }

    let immediate_recollision_count = pairs.iter().filter(|&&p| g.is_recollision(p)).count();

    let is_basic_ladder = g.n == g.ntilde && pairs.iter().all(|&(a, b)| b == 2 * g.n + 1 - a);

    let shape_ok = pairs.iter().all(|&p| g.is_recollision(p) || g.is_rung(p));
    // pairs are sorted by ℓ, so rungs come out sorted by ℓ
    let rung_ends: Vec<usize> = pairs.iter().filter(|&&p| g.is_rung(p)).map(|p| p.1).collect();
    let is_decorated_ladder = shape_ok && rung_ends.windows(2).all(|w| w[1] < w[0]);

    let has_crossing = pairs
        .iter()
        .any(|&(l, lp)| pairs.iter().any(|&(j, jp)| l < j && j < lp && lp < jp));

    let has_nesting = pairs.iter().any(|&(l, lp)| {
        lp - l >= 3
            && g.same_line(l, lp)
            && (l + 1..lp).step_by(2).all(|j| partner[j] == j + 1 && j + 1 < lp)
    });

    ClassificationFlags {
        immediate_recollision_count,
        is_basic_ladder,
        is_decorated_ladder,
        has_crossing,
        has_nesting,
    }
}

/// `(2k-1)!!`
pub fn double_factorial_odd(k: usize) -> u64 {
    (1..=k as u64).map(|i| 2 * i - 1).product()
}

/// Perfect matchings of `1..=n+ñ` in canonical (lexicographic) order.
///
/// The smallest unmatched vertex is paired with the `c_i`-th remaining
/// vertex; the choice vector advances like an odometer with radices
/// `2n̄-1, 2n̄-3, …, 1`.
pub struct Enumeration {
    n: usize,
    ntilde: usize,
    choices: Vec<usize>,
    done: bool,
}

pub fn enumerate(n: usize, ntilde: usize) -> Result<Enumeration> {
    let total = n + ntilde;
    if total % 2 != 0 {
        return Err(Error::invalid("n+ntilde", format!("must be even, got {total}")));
    }
    if total > MAX_VERTICES {
        return Err(Error::Budget(format!(
            "n + ntilde = {total} exceeds {MAX_VERTICES} ({} graphs)",
            double_factorial_odd(MAX_VERTICES / 2)
        )));
    }
    Ok(Enumeration {
        n,
        ntilde,
        choices: vec![0; total / 2],
        done: false,
    })
}

impl Enumeration {
    fn decode(&self) -> ContractionGraph {
        let total = self.n + self.ntilde;
        let mut free: Vec<usize> = (1..=total).collect();
        let mut pairs = Vec::with_capacity(total / 2);
        for &c in &self.choices {
            let a = free.remove(0);
            let b = free.remove(c);
            pairs.push((a, b));
        }
        ContractionGraph {
            n: self.n,
            ntilde: self.ntilde,
            pairs,
        }
    }
}

impl Iterator for Enumeration {
    type Item = ContractionGraph;

    fn next(&mut self) -> Option<ContractionGraph> {
        if self.done {
            return None;
        }
        let g = self.decode();
        let k = self.choices.len();
        let mut i = k;
        loop {
            if i == 0 {
                self.done = true;
                break;
            }
            i -= 1;
            let radix = 2 * (k - i) - 1;
            self.choices[i] += 1;
            if self.choices[i] < radix {
                break;
            }
            self.choices[i] = 0;
        }
        Some(g)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct SplitCounts {
    pub n: usize,
    pub ntilde: usize,
    pub total: u64,
    pub basic_ladder: u64,
    pub decorated_ladder: u64,
    pub crossing: u64,
    pub nesting: u64,
    /// Graphs with at least one immediate recollision.
    pub with_recollision: u64,
    /// Non-decorated graphs with neither crossing nor nesting.
    pub violations: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DichotomyReport {
    pub max_order: usize,
    pub splits: Vec<SplitCounts>,
}

impl DichotomyReport {
    pub fn total_graphs(&self) -> u64 {
        self.splits.iter().map(|s| s.total).sum()
    }

    pub fn total_violations(&self) -> u64 {
        self.splits.iter().map(|s| s.violations).sum()
    }
}

fn scan_split(n: usize, ntilde: usize) -> Result<(SplitCounts, Vec<String>)> {
    let mut c = SplitCounts {
        n,
        ntilde,
        ..Default::default()
    };
    let mut bad = Vec::new();
    for g in enumerate(n, ntilde)? {
        let f = classify(&g);
        debug_assert!(!f.is_basic_ladder || f.is_decorated_ladder);
        c.total += 1;
        c.basic_ladder += f.is_basic_ladder as u64;
        c.decorated_ladder += f.is_decorated_ladder as u64;
        c.crossing += f.has_crossing as u64;
        c.nesting += f.has_nesting as u64;
        c.with_recollision += (f.immediate_recollision_count > 0) as u64;
        if !f.is_decorated_ladder && !f.has_crossing && !f.has_nesting {
            c.violations += 1;
            bad.push(format!("n={n} ntilde={ntilde} {g}"));
        }
    }
    Ok((c, bad))
}

/// Checks "not a decorated ladder ⇒ crossing or nesting" for every split
/// `n + ñ = 2n̄`, `1 ≤ n̄ ≤ n̄_max`. Splits run in parallel and are merged
/// in `(n̄, n)` order. Any counterexample is an error naming the graphs.
pub fn verify_dichotomy(max_order: usize) -> Result<DichotomyReport> {
    if max_order > MAX_DICHOTOMY_ORDER {
        return Err(Error::Budget(format!("n̄ = {max_order} exceeds {MAX_DICHOTOMY_ORDER}")));
    }
    let splits: Vec<(usize, usize)> = (1..=max_order)
        .flat_map(|nb| (0..=2 * nb).map(move |n| (n, 2 * nb - n)))
        .collect();
    let results: Vec<(SplitCounts, Vec<String>)> = splits
        .par_iter()
        .map(|&(n, nt)| scan_split(n, nt))
        .collect::<Result<_>>()?;
    let bad: Vec<String> = results.iter().flat_map(|r| r.1.iter().cloned()).collect();
    if !bad.is_empty() {
        return Err(Error::Compute(format!("dichotomy violated by: {}", bad.join("; "))));
    }
    Ok(DichotomyReport {
        max_order,
        splits: results.into_iter().map(|r| r.0).collect(),
    })
}

/// `(T^q/q!) ⟨f̄g, (mA)^q[J]⟩`, the kinetic limit of the `q`-rung ladder.
pub fn ladder_term_kinetic(q: usize, t: f64, j: &ScalarField, f: &ScalarField, g: &ScalarField, shells: &ShellOperator) -> Result<f64> {
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::invalid("T", format!("must be finite and >= 0, got {t}")));
    }
    j.ensure_same_grid(f)?;
    j.ensure_same_grid(g)?;
    let m = shells.rate();
    // ‖(T^q/q!)(mA)^q J‖_∞ ≤ (T max m)^q / q! ‖J‖_∞
    let log_bound = q as f64 * (t * shells.max_rate()).ln() - ln_factorial(q) + j.sup_norm().ln();
    if log_bound > 690.0 {
        return Err(Error::Compute(format!("ladder term q = {q}, T = {t} would overflow")));
    }
    let mut term = j.clone();
    for i in 1..=q {
        let a = shells.average(&term)?;
        let c = t / i as f64;
        term = ScalarField::from_fn(j.grid(), |p| c * m[p] * a[p]);
    }
    let w = f.zip_with(g, |a, b| a * b);
    Ok(w.inner(&term))
}

fn ln_factorial(q: usize) -> f64 {
    (1..=q).map(|i| (i as f64).ln()).sum()
}

/// `n,ntilde,pairing,immediate_recollisions,basic_ladder,decorated_ladder,crossing,nesting`
pub const CSV_HEADER: &str = "n,ntilde,pairing,immediate_recollisions,basic_ladder,decorated_ladder,crossing,nesting";

pub fn csv_row(g: &ContractionGraph, f: &ClassificationFlags) -> String {
    format!(
        "{},{},\"{}\",{},{},{},{},{}",
        g.n, g.ntilde, g, f.immediate_recollision_count, f.is_basic_ladder, f.is_decorated_ladder, f.has_crossing, f.has_nesting
    )
}
