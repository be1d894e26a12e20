//! Words, eventually periodic points, cuts and de Bruijn graphs over the full
//! shift on `d` symbols.
//!
//! Points of the shift are always eventually periodic here and are stored in a
//! normalized form (primitive period, shortest preperiod), so equality is
//! syntactic and orbit-hit questions are decidable by comparison.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::potential::LocallyConstantPotential;
use crate::rational::Q;

/// Largest alphabet supported by the one-character-per-symbol text encoding.
pub const MAX_ALPHABET: usize = 10;

fn check_alphabet(d: usize) -> Result<()> {
    if !(2..=MAX_ALPHABET).contains(&d) {
        return Err(Error::InvalidInput(format!("alphabet size must be in 2..={MAX_ALPHABET}, got {d}")));
    }
    Ok(())
}

fn check_symbols(symbols: &[u8], d: usize) -> Result<()> {
    match symbols.iter().find(|&&s| s as usize >= d) {
        Some(s) => Err(Error::InvalidInput(format!("symbol {s} out of range for d={d}"))),
        None => Ok(()),
    }
}

fn parse_symbols(text: &str, d: usize) -> Result<Vec<u8>> {
    let symbols = text
        .chars()
        .map(|c| c.to_digit(10).map(|v| v as u8).ok_or_else(|| Error::Parse(format!("bad symbol {c:?} in {text:?}"))))
        .collect::<Result<Vec<_>>>()?;
    check_symbols(&symbols, d)?;
    Ok(symbols)
}

fn symbols_to_string(symbols: &[u8]) -> String {
    symbols.iter().map(|s| char::from(b'0' + s)).collect()
}

/// A finite word over `{0, .., d-1}`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Word {
    symbols: Vec<u8>,
    alphabet: usize,
}

impl Word {
    pub fn new(symbols: Vec<u8>, alphabet: usize) -> Result<Self> {
        check_alphabet(alphabet)?;
        check_symbols(&symbols, alphabet)?;
        Ok(Word { symbols, alphabet })
    }

    pub fn parse(text: &str, alphabet: usize) -> Result<Self> {
        check_alphabet(alphabet)?;
        Ok(Word { symbols: parse_symbols(text, alphabet)?, alphabet })
    }

    /// The word of length `len` whose base-`d` value is `index`.
    pub fn from_index(index: usize, len: usize, alphabet: usize) -> Self {
        let mut symbols = vec![0u8; len];
        let mut rest = index;
        for slot in symbols.iter_mut().rev() {
            *slot = (rest % alphabet) as u8;
            rest /= alphabet;
        }
        Word { symbols, alphabet }
    }

    /// Base-`d` value, most significant symbol first; agrees with lexicographic order.
    pub fn index(&self) -> usize {
        self.symbols.iter().fold(0, |acc, &s| acc * self.alphabet + s as usize)
    }

    pub fn symbols(&self) -> &[u8] {
        &self.symbols
    }

    pub fn alphabet(&self) -> usize {
        self.alphabet
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    /// Representative point of the cylinder: the word repeated forever.
    pub fn periodic_point(&self) -> Result<EventuallyPeriodicPoint> {
        EventuallyPeriodicPoint::new(Vec::new(), self.symbols.clone(), self.alphabet)
    }

    /// Infimum of the cylinder: `u 0^∞`.
    pub fn cylinder_inf(&self) -> EventuallyPeriodicPoint {
        EventuallyPeriodicPoint::from_parts(self.symbols.clone(), vec![0], self.alphabet)
    }

    /// Supremum of the cylinder: `u (d-1)^∞`.
    pub fn cylinder_sup(&self) -> EventuallyPeriodicPoint {
        EventuallyPeriodicPoint::from_parts(self.symbols.clone(), vec![(self.alphabet - 1) as u8], self.alphabet)
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&symbols_to_string(&self.symbols))
    }
}

/// An eventually periodic point `pre · period^∞` in normalized form.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct EventuallyPeriodicPoint {
    preperiod: Vec<u8>,
    period: Vec<u8>,
    alphabet: usize,
}

impl EventuallyPeriodicPoint {
    pub fn new(preperiod: Vec<u8>, period: Vec<u8>, alphabet: usize) -> Result<Self> {
        check_alphabet(alphabet)?;
        if period.is_empty() {
            return Err(Error::InvalidInput("period must be nonempty".into()));
        }
        check_symbols(&preperiod, alphabet)?;
        check_symbols(&period, alphabet)?;
        Ok(Self::from_parts(preperiod, period, alphabet))
    }

    /// Builds and normalizes without validation; callers guarantee the symbols.
    pub(crate) fn from_parts(preperiod: Vec<u8>, period: Vec<u8>, alphabet: usize) -> Self {
        let mut p = EventuallyPeriodicPoint { preperiod, period, alphabet };
        p.normalize();
        p
    }

    /// The fixed point `a^∞`.
    pub fn constant(symbol: u8, alphabet: usize) -> Result<Self> {
        Self::new(Vec::new(), vec![symbol], alphabet)
    }

    /// Parses `"pre(period)"`, e.g. `"110(01)"` or `"(0)"`.
    pub fn parse(text: &str, alphabet: usize) -> Result<Self> {
        check_alphabet(alphabet)?;
        let t = text.trim();
        let open = t.find('(').ok_or_else(|| Error::Parse(format!("missing '(' in point {t:?}")))?;
        let inner = t[open + 1..]
            .strip_suffix(')')
            .ok_or_else(|| Error::Parse(format!("missing trailing ')' in point {t:?}")))?;
        let pre = parse_symbols(&t[..open], alphabet)?;
        let period = parse_symbols(inner, alphabet)?;
        if period.is_empty() {
            return Err(Error::Parse(format!("empty period in point {t:?}")));
        }
        Ok(Self::from_parts(pre, period, alphabet))
    }

    fn normalize(&mut self) {
        let n = self.period.len();
        if let Some(p) =
            (1..n).filter(|p| n.is_multiple_of(*p)).find(|&p| (p..n).all(|i| self.period[i] == self.period[i - p]))
        {
            self.period.truncate(p);
        }
        while let Some(&last) = self.preperiod.last() {
            if last != *self.period.last().expect("nonempty period") {
                break;
            }
            self.preperiod.pop();
            self.period.rotate_right(1);
        }
    }

    pub fn preperiod(&self) -> &[u8] {
        &self.preperiod
    }

    pub fn period(&self) -> &[u8] {
        &self.period
    }

    pub fn alphabet(&self) -> usize {
        self.alphabet
    }

    pub fn is_periodic(&self) -> bool {
        self.preperiod.is_empty()
    }

    pub fn symbol(&self, i: usize) -> u8 {
        if i < self.preperiod.len() {
            self.preperiod[i]
        } else {
            self.period[(i - self.preperiod.len()) % self.period.len()]
        }
    }

    /// The first `n` symbols.
    pub fn prefix(&self, n: usize) -> Vec<u8> {
        (0..n).map(|i| self.symbol(i)).collect()
    }

    pub fn prefix_word(&self, n: usize) -> Word {
        Word { symbols: self.prefix(n), alphabet: self.alphabet }
    }

    /// Number of leading symbols after which two points must agree forever if
    /// they agree up to there.
    fn comparison_horizon(&self, other: &Self) -> usize {
        let l = lcm(self.period.len(), other.period.len());
        self.preperiod.len().max(other.preperiod.len()) + l
    }

    /// 0-based index of the first disagreement, `None` when the points coincide.
    pub fn first_disagreement(&self, other: &Self) -> Option<usize> {
        (0..self.comparison_horizon(other)).find(|&i| self.symbol(i) != other.symbol(i))
    }

    /// The shift `T`: drops the first symbol.
    pub fn shift(&self) -> Self {
        let mut pre = self.preperiod.clone();
        let mut period = self.period.clone();
        if pre.is_empty() {
            period.rotate_left(1);
        } else {
            pre.remove(0);
        }
        Self::from_parts(pre, period, self.alphabet)
    }

    /// `T^n`.
    pub fn shift_n(&self, n: usize) -> Self {
        let mut p = self.clone();
        for _ in 0..n {
            p = p.shift();
        }
        p
    }

    /// The inverse branch `τ_a`: prepends `a`.
    pub fn prepend(&self, a: u8) -> Result<Self> {
        if a as usize >= self.alphabet {
            return Err(Error::InvalidInput(format!("symbol {a} out of range for d={}", self.alphabet)));
        }
        let mut pre = Vec::with_capacity(self.preperiod.len() + 1);
        pre.push(a);
        pre.extend_from_slice(&self.preperiod);
        Ok(Self::from_parts(pre, self.period.clone(), self.alphabet))
    }

    /// The forward orbit `p, T p, T² p, ...` until it repeats.
    pub fn orbit(&self) -> Vec<Self> {
        let steps = self.preperiod.len() + self.period.len();
        let mut out = Vec::with_capacity(steps);
        let mut p = self.clone();
        for _ in 0..steps {
            let next = p.shift();
            out.push(p);
            p = next;
        }
        out
    }

    pub fn lex_compare(&self, other: &Self) -> Result<Ordering> {
        if self.alphabet != other.alphabet {
            return Err(Error::AlphabetMismatch(self.alphabet, other.alphabet));
        }
        Ok(self.lex_cmp_unchecked(other))
    }

    fn lex_cmp_unchecked(&self, other: &Self) -> Ordering {
        match self.first_disagreement(other) {
            Some(i) => self.symbol(i).cmp(&other.symbol(i)),
            None => Ordering::Equal,
        }
    }
}

impl PartialOrd for EventuallyPeriodicPoint {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        (self.alphabet == other.alphabet).then(|| self.lex_cmp_unchecked(other))
    }
}

impl fmt::Display for EventuallyPeriodicPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}({})", symbols_to_string(&self.preperiod), symbols_to_string(&self.period))
    }
}

impl FromStr for EventuallyPeriodicPoint {
    type Err = Error;

    /// Binary alphabet by default; use [`EventuallyPeriodicPoint::parse`] otherwise.
    fn from_str(s: &str) -> Result<Self> {
        Self::parse(s, 2)
    }
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

fn lcm(a: usize, b: usize) -> usize {
    a / gcd(a, b) * b
}

/// Boundary between two adjacent cylinders of the working depth, carried by
/// both one-sided representatives.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Cut {
    pub left_rep: EventuallyPeriodicPoint,
    pub right_rep: EventuallyPeriodicPoint,
}

impl Cut {
    /// The cut between cylinder `left` and its lexicographic successor `right`.
    pub fn between(left: &Word, right: &Word) -> Result<Self> {
        if left.len() != right.len() || left.alphabet() != right.alphabet() {
            return Err(Error::InvalidInput("cut cylinders must share depth and alphabet".into()));
        }
        if left.index() + 1 != right.index() {
            return Err(Error::InvalidInput(format!("cylinders {left} and {right} are not adjacent")));
        }
        Ok(Cut { left_rep: left.cylinder_sup(), right_rep: right.cylinder_inf() })
    }

    pub fn contains(&self, p: &EventuallyPeriodicPoint) -> bool {
        *p == self.left_rep || *p == self.right_rep
    }
}

impl fmt::Display for Cut {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}|{}", self.left_rep, self.right_rep)
    }
}

/// Weighted de Bruijn graph: nodes are the words of length `node_depth`, the
/// edge `u·a` goes from `u` to `u[1..]·a` and carries the potential's value on
/// that cylinder.
///
/// Nodes and edges are addressed by their base-`d` index.
#[derive(Clone, Debug, PartialEq)]
pub struct DeBruijnGraph {
    alphabet: usize,
    node_depth: usize,
    weights: Vec<Q>,
}

impl DeBruijnGraph {
    pub fn from_potential(potential: &LocallyConstantPotential) -> Self {
        DeBruijnGraph {
            alphabet: potential.alphabet(),
            node_depth: potential.depth() - 1,
            weights: potential.values().to_vec(),
        }
    }

    /// Graph on arbitrary edge weights; `weights.len()` must be `d^(node_depth+1)`.
    pub fn with_weights(alphabet: usize, node_depth: usize, weights: Vec<Q>) -> Result<Self> {
        check_alphabet(alphabet)?;
        let expected = alphabet.pow(node_depth as u32 + 1);
        if weights.len() != expected {
            return Err(Error::InvalidInput(format!("expected {expected} edge weights, got {}", weights.len())));
        }
        Ok(DeBruijnGraph { alphabet, node_depth, weights })
    }

    pub fn alphabet(&self) -> usize {
        self.alphabet
    }

    pub fn node_depth(&self) -> usize {
        self.node_depth
    }

    pub fn node_count(&self) -> usize {
        self.alphabet.pow(self.node_depth as u32)
    }

    pub fn edge_count(&self) -> usize {
        self.weights.len()
    }

    pub fn weight(&self, edge: usize) -> &Q {
        &self.weights[edge]
    }

    pub fn weights(&self) -> &[Q] {
        &self.weights
    }

    pub fn source(&self, edge: usize) -> usize {
        edge / self.alphabet
    }

    pub fn target(&self, edge: usize) -> usize {
        edge % self.node_count()
    }

    /// Edge leaving `node` that appends `symbol`.
    pub fn edge_from(&self, node: usize, symbol: u8) -> usize {
        node * self.alphabet + symbol as usize
    }

    pub fn out_edges(&self, node: usize) -> impl Iterator<Item = usize> + '_ {
        (0..self.alphabet).map(move |a| node * self.alphabet + a)
    }

    pub fn in_edges(&self, node: usize) -> impl Iterator<Item = usize> + '_ {
        let n = self.node_count();
        (0..self.alphabet).map(move |a| a * n + node)
    }

    pub fn node_word(&self, node: usize) -> Word {
        Word::from_index(node, self.node_depth, self.alphabet)
    }

    pub fn edge_word(&self, edge: usize) -> Word {
        Word::from_index(edge, self.node_depth + 1, self.alphabet)
    }

    /// Node containing the point (its first `node_depth` symbols).
    pub fn node_of(&self, p: &EventuallyPeriodicPoint) -> usize {
        p.prefix_word(self.node_depth).index()
    }

    /// Edge containing the point (its first `node_depth + 1` symbols).
    pub fn edge_of(&self, p: &EventuallyPeriodicPoint) -> usize {
        p.prefix_word(self.node_depth + 1).index()
    }

    /// Sum of weights along a closed walk given as an edge list.
    pub fn walk_weight(&self, edges: &[usize]) -> Q {
        edges.iter().map(|&e| self.weights[e].clone()).sum()
    }

    /// Reads off the infinite point traced by a walk that starts at `start` and
    /// then follows `cycle` forever; `cycle` must be a closed walk beginning at
    /// the node where `connector` ends.
    pub fn point_of_walk(&self, start: usize, connector: &[usize], cycle: &[usize]) -> EventuallyPeriodicPoint {
        let mut pre = self.node_word(start).symbols().to_vec();
        pre.extend(connector.iter().map(|&e| (e % self.alphabet) as u8));
        let period: Vec<u8> = cycle.iter().map(|&e| (e % self.alphabet) as u8).collect();
        EventuallyPeriodicPoint::from_parts(pre, period, self.alphabet)
    }
}

/// Builds the de Bruijn graph of a depth-`k` potential over `d` symbols.
pub fn build_de_bruijn(d: usize, k: usize, weights: &LocallyConstantPotential) -> Result<DeBruijnGraph> {
    if weights.alphabet() != d {
        return Err(Error::AlphabetMismatch(d, weights.alphabet()));
    }
    if weights.depth() != k {
        return Err(Error::DepthMismatch { expected: k, found: weights.depth() });
    }
    Ok(DeBruijnGraph::from_potential(weights))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potential::LocallyConstantPotential;
    use crate::rational::q;

    fn pt(s: &str) -> EventuallyPeriodicPoint {
        s.parse().unwrap()
    }

    #[test]
    fn normalization_is_syntactic() {
        assert_eq!(pt("(01)"), pt("0(10)"));
        assert_eq!(pt("(0101)"), pt("(01)"));
        assert_eq!(pt("0(10)").to_string(), "(01)");
        assert_eq!(pt("1(0)").to_string(), "1(0)");
        assert_eq!(pt("111(1)").to_string(), "(1)");
    }

    #[test]
    fn lex_compare_examples() {
        assert_eq!(pt("0(1)").lex_compare(&pt("1(0)")).unwrap(), Ordering::Less);
        assert_eq!(pt("(0)").lex_compare(&pt("(0)")).unwrap(), Ordering::Equal);
        // Both expand to 0 1 0 1 0 1 0 1.
        let a = pt("(01)");
        let b = pt("0(10)");
        assert_eq!(a.prefix(8), vec![0, 1, 0, 1, 0, 1, 0, 1]);
        assert_eq!(b.prefix(8), a.prefix(8));
        assert_eq!(a.lex_compare(&b).unwrap(), Ordering::Equal);
    }

    #[test]
    fn lex_compare_rejects_alphabet_mismatch() {
        let a = EventuallyPeriodicPoint::parse("(0)", 2).unwrap();
        let b = EventuallyPeriodicPoint::parse("(0)", 3).unwrap();
        assert!(matches!(a.lex_compare(&b), Err(Error::AlphabetMismatch(2, 3))));
    }

    #[test]
    fn shift_examples() {
        assert_eq!(pt("0(1)").shift(), pt("(1)"));
        assert_eq!(pt("(01)").shift(), pt("(10)"));
        assert_eq!(pt("110(01)").shift_n(3), pt("(01)"));
    }

    #[test]
    fn prepend_examples() {
        assert_eq!(pt("(01)").prepend(1).unwrap(), pt("(10)"));
        assert_eq!(pt("(0)").prepend(0).unwrap(), pt("(0)"));
        assert_eq!(pt("(0)").prepend(1).unwrap().to_string(), "1(0)");
        assert!(pt("(0)").prepend(2).is_err());
    }

    #[test]
    fn parse_rejects_malformed_points() {
        for bad in ["01", "0()", "(2)", "0(1", "a(0)"] {
            assert!(EventuallyPeriodicPoint::parse(bad, 2).is_err(), "{bad:?}");
        }
        assert!(EventuallyPeriodicPoint::parse("(0)", 11).is_err());
    }

    #[test]
    fn orbit_enters_cycle() {
        let orbit = pt("110(01)").orbit();
        assert_eq!(orbit.len(), 5);
        assert_eq!(orbit[0], pt("110(01)"));
        assert_eq!(orbit[4].shift(), orbit[3]);
    }

    #[test]
    fn cut_between_adjacent_cylinders() {
        let c = Cut::between(&Word::parse("0", 2).unwrap(), &Word::parse("1", 2).unwrap()).unwrap();
        assert_eq!(c.left_rep, pt("0(1)"));
        assert_eq!(c.right_rep, pt("1(0)"));
        assert!(c.left_rep < c.right_rep);
        assert!(Cut::between(&Word::parse("00", 2).unwrap(), &Word::parse("10", 2).unwrap()).is_err());
    }

    #[test]
    fn de_bruijn_a2() {
        let a2 = LocallyConstantPotential::from_values(2, 2, vec![q(-1), q(0), q(0), q(-1)]).unwrap();
        let g = build_de_bruijn(2, 2, &a2).unwrap();
        assert_eq!(g.node_count(), 2);
        assert_eq!(g.edge_count(), 4);
        let table: Vec<(String, Q)> = (0..4).map(|e| (g.edge_word(e).to_string(), g.weight(e).clone())).collect();
        assert_eq!(table, vec![("00".into(), q(-1)), ("01".into(), q(0)), ("10".into(), q(0)), ("11".into(), q(-1))]);
        assert!(matches!(build_de_bruijn(2, 3, &a2), Err(Error::DepthMismatch { .. })));
    }

    #[test]
    fn de_bruijn_depth_one_and_ternary() {
        let zero = LocallyConstantPotential::from_values(2, 1, vec![q(0), q(0)]).unwrap();
        let g = build_de_bruijn(2, 1, &zero).unwrap();
        assert_eq!((g.node_count(), g.edge_count()), (1, 2));
        assert!((0..2).all(|e| g.source(e) == 0 && g.target(e) == 0));

        let t = LocallyConstantPotential::from_values(3, 2, vec![q(0); 9]).unwrap();
        let g = build_de_bruijn(3, 2, &t).unwrap();
        assert_eq!((g.node_count(), g.edge_count()), (3, 9));
        for v in 0..3 {
            assert_eq!(g.in_edges(v).count(), 3);
            assert_eq!(g.out_edges(v).count(), 3);
        }
    }

    #[test]
    fn edge_endpoints_match_word_windows() {
        let p = LocallyConstantPotential::from_values(2, 4, vec![q(0); 16]).unwrap();
        let g = DeBruijnGraph::from_potential(&p);
        for e in 0..g.edge_count() {
            let w = g.edge_word(e);
            assert_eq!(g.node_word(g.source(e)).symbols(), &w.symbols()[..3]);
            assert_eq!(g.node_word(g.target(e)).symbols(), &w.symbols()[1..]);
        }
    }
}
