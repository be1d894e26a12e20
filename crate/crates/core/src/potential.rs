//! Locally constant potentials and the families they are projected from.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Signed, Zero};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::de::{MapAccess, Visitor};
use serde::{Deserialize, Deserializer};

use crate::error::{Error, Result};
use crate::rational::{exact_root, format_rational, parse_rational, pow, q, Q};
use crate::symbolic::{EventuallyPeriodicPoint, Word, MAX_ALPHABET};

/// A potential depending only on the first `depth` symbols: one exact rational
/// per word of length `depth`, stored in lexicographic (base-`d`) order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LocallyConstantPotential {
    alphabet: usize,
    depth: usize,
    values: Vec<Q>,
}

impl LocallyConstantPotential {
    pub fn from_values(alphabet: usize, depth: usize, values: Vec<Q>) -> Result<Self> {
        if !(2..=MAX_ALPHABET).contains(&alphabet) {
            return Err(Error::InvalidInput(format!("alphabet size {alphabet} unsupported")));
        }
        if depth == 0 {
            return Err(Error::InvalidInput("depth must be at least 1".into()));
        }
        let expected = alphabet.pow(depth as u32);
        if values.len() != expected {
            return Err(Error::InvalidInput(format!(
                "expected {expected} values for d={alphabet}, k={depth}, got {}",
                values.len()
            )));
        }
        Ok(LocallyConstantPotential { alphabet, depth, values })
    }

    /// Table built by evaluating `f` on every word of length `depth`.
    pub fn from_fn(alphabet: usize, depth: usize, mut f: impl FnMut(&Word) -> Q) -> Result<Self> {
        let n = alphabet.pow(depth as u32);
        let values = (0..n).map(|i| f(&Word::from_index(i, depth, alphabet))).collect();
        Self::from_values(alphabet, depth, values)
    }

    pub fn zero(alphabet: usize, depth: usize) -> Result<Self> {
        Self::from_values(alphabet, depth, vec![Q::zero(); alphabet.pow(depth as u32)])
    }

    pub fn alphabet(&self) -> usize {
        self.alphabet
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn values(&self) -> &[Q] {
        &self.values
    }

    pub fn value_by_index(&self, index: usize) -> &Q {
        &self.values[index]
    }

    /// Value on the cylinder named by the first `depth` symbols of `symbols`.
    pub fn value_of_prefix(&self, symbols: &[u8]) -> &Q {
        let idx = symbols[..self.depth].iter().fold(0, |acc, &s| acc * self.alphabet + s as usize);
        &self.values[idx]
    }

    pub fn value(&self, word: &Word) -> Result<&Q> {
        if word.len() != self.depth {
            return Err(Error::DepthMismatch { expected: self.depth, found: word.len() });
        }
        Ok(&self.values[word.index()])
    }

    pub fn value_at(&self, point: &EventuallyPeriodicPoint) -> &Q {
        self.value_of_prefix(&point.prefix(self.depth))
    }

    /// Same function viewed as a depth-`depth` table.
    pub fn lift(&self, depth: usize) -> Result<Self> {
        if depth < self.depth {
            return Err(Error::DepthMismatch { expected: self.depth, found: depth });
        }
        let drop = self.alphabet.pow((depth - self.depth) as u32);
        Self::from_fn(self.alphabet, depth, |w| self.values[w.index() / drop].clone())
    }

    pub fn map(&self, mut f: impl FnMut(usize, &Q) -> Q) -> Self {
        let values = self.values.iter().enumerate().map(|(i, v)| f(i, v)).collect();
        LocallyConstantPotential { values, ..*self }
    }

    pub fn add_constant(&self, c: &Q) -> Self {
        self.map(|_, v| v + c)
    }

    pub fn scale(&self, c: &Q) -> Self {
        self.map(|_, v| v * c)
    }

    /// Pointwise sum; the shallower table is lifted first.
    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.alphabet != other.alphabet {
            return Err(Error::AlphabetMismatch(self.alphabet, other.alphabet));
        }
        let depth = self.depth.max(other.depth);
        let (a, b) = (self.lift(depth)?, other.lift(depth)?);
        Ok(a.map(|i, v| v + &b.values[i]))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.scale(&-Q::one()))
    }

    pub fn sup_norm(&self) -> Q {
        self.values.iter().map(|v| v.abs()).max().unwrap_or_else(Q::zero)
    }

    /// Largest oscillation over points agreeing on their first `n` symbols.
    pub fn variation(&self, n: usize) -> Q {
        if n >= self.depth {
            return Q::zero();
        }
        let block = self.alphabet.pow((self.depth - n) as u32);
        self.values
            .chunks(block)
            .map(|c| c.iter().max().unwrap() - c.iter().min().unwrap())
            .max()
            .unwrap_or_else(Q::zero)
    }

    /// Hölder seminorm for the metric `λ^N` (`N` the 1-based index of the first
    /// disagreement) and exponent `alpha = 1`.
    pub fn lipschitz_seminorm(&self, lambda: &Q) -> Q {
        (0..self.depth).map(|n| self.variation(n) / pow(lambda, n + 1)).max().unwrap_or_else(Q::zero)
    }

    /// Renders the potential as a document accepted by [`load_potential`].
    pub fn to_document(&self) -> String {
        let values: BTreeMap<String, String> = self
            .values
            .iter()
            .enumerate()
            .map(|(i, v)| (Word::from_index(i, self.depth, self.alphabet).to_string(), format_rational(v)))
            .collect();
        let doc = serde_json::json!({
            "alphabet_size": self.alphabet,
            "depth": self.depth,
            "values": values,
        });
        serde_json::to_string_pretty(&doc).expect("serializable document")
    }
}

impl fmt::Display for LocallyConstantPotential {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .values
            .iter()
            .enumerate()
            .map(|(i, v)| format!("{}:{}", Word::from_index(i, self.depth, self.alphabet), format_rational(v)))
            .collect();
        write!(f, "{{{}}}", parts.join(", "))
    }
}

/// The canonical binary depth-2 example `{00:-1, 01:0, 10:0, 11:-1}`, whose
/// maximizing orbit is the period-two orbit `(01)^∞, (10)^∞`.
pub fn canonical_a2() -> LocallyConstantPotential {
    LocallyConstantPotential::from_values(2, 2, vec![q(-1), q(0), q(0), q(-1)]).expect("valid table")
}

#[derive(Clone, Debug, PartialEq)]
pub enum FamilyKind {
    /// `A(x) = -d(x, targets)`.
    DistanceToSet {
        targets: Vec<EventuallyPeriodicPoint>,
    },
    ExplicitTable,
    /// Uniform rationals `j / denominator` in `[low, high]`.
    Random {
        seed: u64,
        depth: usize,
        low: Q,
        high: Q,
        denominator: u32,
    },
}

/// Where a locally constant potential came from, with the metric parameter
/// `lambda` and Hölder exponent `alpha` used for error bounds.
#[derive(Clone, Debug, PartialEq)]
pub struct HolderFamilySpec {
    pub kind: FamilyKind,
    pub lambda: Q,
    pub alpha: Q,
}

impl HolderFamilySpec {
    pub fn new(kind: FamilyKind, lambda: Q, alpha: Q) -> Result<Self> {
        if !(lambda.is_positive() && lambda < Q::one()) {
            return Err(Error::InvalidInput(format!("lambda must lie in (0,1), got {}", format_rational(&lambda))));
        }
        if !alpha.is_positive() {
            return Err(Error::InvalidInput("alpha must be positive".into()));
        }
        match &kind {
            FamilyKind::DistanceToSet { targets } => {
                let Some(first) = targets.first() else {
                    return Err(Error::InvalidInput("distance family needs a target".into()));
                };
                if targets.iter().any(|t| t.alphabet() != first.alphabet()) {
                    return Err(Error::InvalidInput("targets use different alphabets".into()));
                }
            }
            FamilyKind::Random { low, high, denominator, depth, .. } => {
                if low > high || *denominator == 0 || *depth == 0 {
                    return Err(Error::InvalidInput("bad random family parameters".into()));
                }
            }
            FamilyKind::ExplicitTable => {}
        }
        Ok(HolderFamilySpec { kind, lambda, alpha })
    }

    pub fn distance(targets: Vec<EventuallyPeriodicPoint>, lambda: Q, alpha: Q) -> Result<Self> {
        Self::new(FamilyKind::DistanceToSet { targets }, lambda, alpha)
    }
}

/// `d(x, y) = λ^N`, `N` the 1-based index of the first disagreement.
pub fn distance(x: &EventuallyPeriodicPoint, y: &EventuallyPeriodicPoint, lambda: &Q) -> Q {
    match x.first_disagreement(y) {
        Some(i) => pow(lambda, i + 1),
        None => Q::zero(),
    }
}

/// Projects a distance-to-set family to depth `depth`: the value on cylinder
/// `u` is `-min_t d(u^∞, t)`.
pub fn project_distance_family(spec: &HolderFamilySpec, depth: usize) -> Result<LocallyConstantPotential> {
    let FamilyKind::DistanceToSet { targets } = &spec.kind else {
        return Err(Error::InvalidInput("projection needs a distance-to-set family".into()));
    };
    let d = targets[0].alphabet();
    LocallyConstantPotential::from_fn(d, depth, |u| {
        let rep = u.periodic_point().expect("nonempty word");
        let nearest = targets.iter().map(|t| distance(&rep, t, &spec.lambda)).min().expect("nonempty targets");
        -nearest
    })
}

/// The word `b_n = (01)^n 1 01` of length `2n + 3`.
pub fn leplaideur_word(n: usize) -> Vec<u8> {
    let mut b: Vec<u8> = std::iter::repeat_n([0u8, 1], n).flatten().collect();
    b.extend_from_slice(&[1, 0, 1]);
    b
}

/// The orbit of `(b_n)^∞` together with the period-two orbit `{(01)^∞, (10)^∞}`.
pub fn leplaideur_targets(n: usize) -> Vec<EventuallyPeriodicPoint> {
    let z = EventuallyPeriodicPoint::from_parts(Vec::new(), leplaideur_word(n), 2);
    let mut targets = z.orbit();
    let p0 = EventuallyPeriodicPoint::from_parts(Vec::new(), vec![0, 1], 2);
    targets.push(p0.shift());
    targets.push(p0);
    targets
}

/// `-d(·, γ_n ∪ γ)` projected to depth `depth`.
pub fn leplaideur_member(n: usize, lambda: &Q, depth: usize) -> Result<LocallyConstantPotential> {
    if n == 0 || depth == 0 {
        return Err(Error::InvalidInput("leplaideur member needs n >= 1 and depth >= 1".into()));
    }
    let spec = HolderFamilySpec::distance(leplaideur_targets(n), lambda.clone(), Q::one())?;
    project_distance_family(&spec, depth)
}

/// Upper bound on the sup distance between a family member and its depth-`depth`
/// projection: `λ^(depth·α)` times the family seminorm (at most 1 for distance
/// families), zero for tables that are already locally constant.
pub fn projection_error_bound(spec: &HolderFamilySpec, depth: usize) -> Result<Q> {
    match spec.kind {
        FamilyKind::ExplicitTable | FamilyKind::Random { .. } => Ok(Q::zero()),
        FamilyKind::DistanceToSet { .. } => {
            let exponent = &spec.alpha * q(depth as i64);
            let numer: usize =
                exponent.numer().try_into().map_err(|_| Error::InvalidInput("exponent too large".into()))?;
            let denom: u32 =
                exponent.denom().try_into().map_err(|_| Error::InvalidInput("exponent too large".into()))?;
            exact_root(&pow(&spec.lambda, numer), denom)
                .ok_or_else(|| Error::InvalidInput(format!("bound λ^{} is irrational", format_rational(&exponent))))
        }
    }
}

/// Uniform random table with values `j / denominator` in `[low, high]`.
pub fn random_potential<R: Rng>(
    rng: &mut R,
    alphabet: usize,
    depth: usize,
    low: &Q,
    high: &Q,
    denominator: u32,
) -> Result<LocallyConstantPotential> {
    let den = q(denominator as i64);
    let lo = (low * &den).ceil().to_integer();
    let hi = (high * &den).floor().to_integer();
    let lo: i64 = lo.try_into().map_err(|_| Error::InvalidInput("range too large".into()))?;
    let hi: i64 = hi.try_into().map_err(|_| Error::InvalidInput("range too large".into()))?;
    if lo > hi {
        return Err(Error::InvalidInput("empty random range".into()));
    }
    LocallyConstantPotential::from_fn(alphabet, depth, |_| {
        Q::new(rng.gen_range(lo..=hi).into(), (denominator as i64).into())
    })
}

/// Materializes a family at the requested depth.
pub fn realize_family(spec: &HolderFamilySpec, alphabet: usize, depth: usize) -> Result<LocallyConstantPotential> {
    match &spec.kind {
        FamilyKind::DistanceToSet { .. } => project_distance_family(spec, depth),
        FamilyKind::Random { seed, depth: own, low, high, denominator } => {
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            random_potential(&mut rng, alphabet, *own, low, high, *denominator)?.lift(depth.max(*own))
        }
        FamilyKind::ExplicitTable => Err(Error::InvalidInput("explicit tables carry their own values".into())),
    }
}

/// A loaded document: the table plus the family it came from, if any.
#[derive(Clone, Debug)]
pub struct PotentialDocument {
    pub potential: LocallyConstantPotential,
    pub family: Option<HolderFamilySpec>,
}

/// Object entries kept in document order so duplicates can be detected.
struct Entries(Vec<(String, serde_json::Value)>);

impl<'de> Deserialize<'de> for Entries {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        struct EntriesVisitor;
        impl<'de> Visitor<'de> for EntriesVisitor {
            type Value = Entries;
            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a map from words to rational literals")
            }
            fn visit_map<M: MapAccess<'de>>(self, mut map: M) -> std::result::Result<Entries, M::Error> {
                let mut out = Vec::new();
                while let Some((k, v)) = map.next_entry::<String, serde_json::Value>()? {
                    out.push((k, v));
                }
                Ok(Entries(out))
            }
        }
        deserializer.deserialize_map(EntriesVisitor)
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDocument {
    alphabet_size: usize,
    depth: Option<usize>,
    values: Option<Entries>,
    family: Option<RawFamily>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields, tag = "kind", rename_all = "snake_case")]
enum RawFamily {
    Distance {
        targets: Vec<String>,
        lambda: serde_json::Value,
        #[serde(default)]
        alpha: Option<serde_json::Value>,
    },
    Leplaideur {
        n: usize,
        lambda: serde_json::Value,
        #[serde(default)]
        alpha: Option<serde_json::Value>,
    },
    Random {
        seed: u64,
        depth: Option<usize>,
        low: serde_json::Value,
        high: serde_json::Value,
        denominator: u32,
    },
}

fn literal(v: &serde_json::Value, what: &str) -> Result<Q> {
    match v {
        serde_json::Value::String(s) => parse_rational(s),
        serde_json::Value::Number(n) if n.is_i64() || n.is_u64() => parse_rational(&n.to_string()),
        other => Err(Error::Parse(format!("{what}: expected a rational string or integer, got {other}"))),
    }
}

impl RawFamily {
    fn into_spec(self, alphabet: usize, depth: Option<usize>) -> Result<HolderFamilySpec> {
        let alpha_or_one =
            |a: Option<serde_json::Value>| a.map(|v| literal(&v, "alpha")).unwrap_or_else(|| Ok(Q::one()));
        match self {
            RawFamily::Distance { targets, lambda, alpha } => {
                let targets =
                    targets.iter().map(|t| EventuallyPeriodicPoint::parse(t, alphabet)).collect::<Result<Vec<_>>>()?;
                HolderFamilySpec::distance(targets, literal(&lambda, "lambda")?, alpha_or_one(alpha)?)
            }
            RawFamily::Leplaideur { n, lambda, alpha } => {
                if alphabet != 2 || n == 0 {
                    return Err(Error::InvalidInput("leplaideur family needs d = 2 and n >= 1".into()));
                }
                HolderFamilySpec::distance(leplaideur_targets(n), literal(&lambda, "lambda")?, alpha_or_one(alpha)?)
            }
            RawFamily::Random { seed, depth: own, low, high, denominator } => HolderFamilySpec::new(
                FamilyKind::Random {
                    seed,
                    depth: own.or(depth).unwrap_or(1),
                    low: literal(&low, "low")?,
                    high: literal(&high, "high")?,
                    denominator,
                },
                Q::new(1.into(), 2.into()),
                Q::one(),
            ),
        }
    }
}

fn explicit_table(alphabet: usize, depth: usize, entries: Entries) -> Result<LocallyConstantPotential> {
    let n = alphabet.pow(depth as u32);
    let mut values: Vec<Option<Q>> = vec![None; n];
    for (key, raw) in entries.0 {
        let word = Word::parse(&key, alphabet)?;
        if word.len() != depth {
            return Err(Error::DepthMismatch { expected: depth, found: word.len() });
        }
        let slot = &mut values[word.index()];
        if slot.is_some() {
            return Err(Error::DuplicateKey(key));
        }
        *slot = Some(literal(&raw, &key)?);
    }
    let values = values
        .into_iter()
        .enumerate()
        .map(|(i, v)| v.ok_or_else(|| Error::IncompleteTable(Word::from_index(i, depth, alphabet).to_string())))
        .collect::<Result<Vec<_>>>()?;
    LocallyConstantPotential::from_values(alphabet, depth, values)
}

/// Parses a potential document.
///
/// `depth_override` selects the projection depth for family documents and
/// must agree with the declared depth of explicit tables.
pub fn load_document(text: &str, depth_override: Option<usize>) -> Result<PotentialDocument> {
    let raw: RawDocument = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    let alphabet = raw.alphabet_size;
    if !(2..=MAX_ALPHABET).contains(&alphabet) {
        return Err(Error::InvalidInput(format!("alphabet size {alphabet} unsupported")));
    }
    let family = raw.family.map(|f| f.into_spec(alphabet, depth_override.or(raw.depth))).transpose()?;
    let potential = match (raw.values, &family) {
        (Some(entries), _) => {
            let depth = raw.depth.ok_or_else(|| Error::Parse("missing field `depth`".into()))?;
            if let Some(o) = depth_override.filter(|&o| o != depth) {
                return Err(Error::DepthMismatch { expected: depth, found: o });
            }
            explicit_table(alphabet, depth, entries)?
        }
        (None, Some(spec)) => {
            let depth =
                depth_override.or(raw.depth).ok_or_else(|| Error::Parse("family documents need a depth".into()))?;
            realize_family(spec, alphabet, depth)?
        }
        (None, None) => return Err(Error::Parse("document has neither `values` nor `family`".into())),
    };
    Ok(PotentialDocument { potential, family })
}

pub fn load_potential(text: &str) -> Result<LocallyConstantPotential> {
    Ok(load_document(text, None)?.potential)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::qf;

    fn pt(s: &str) -> EventuallyPeriodicPoint {
        s.parse().unwrap()
    }

    #[test]
    fn loads_canonical_a2() {
        let doc = r#"{"alphabet_size": 2, "depth": 2,
                      "values": {"00": "-1", "01": "0", "10": "0", "11": -1}}"#;
        assert_eq!(load_potential(doc).unwrap(), canonical_a2());
    }

    #[test]
    fn loads_depth_one_table() {
        let doc = r#"{"alphabet_size": 2, "depth": 1, "values": {"0": "0", "1": "-1"}}"#;
        let p = load_potential(doc).unwrap();
        assert_eq!(p.values(), &[q(0), q(-1)]);
    }

    #[test]
    fn incomplete_duplicate_and_malformed_tables() {
        let missing = r#"{"alphabet_size": 2, "depth": 2, "values": {"00": "-1", "01": "0", "10": "0"}}"#;
        assert_eq!(load_potential(missing), Err(Error::IncompleteTable("11".into())));

        let dup = r#"{"alphabet_size": 2, "depth": 1, "values": {"0": "0", "1": "1", "0": "2"}}"#;
        assert_eq!(load_potential(dup), Err(Error::DuplicateKey("0".into())));

        let float = r#"{"alphabet_size": 2, "depth": 1, "values": {"0": 0.5, "1": "1"}}"#;
        assert!(matches!(load_potential(float), Err(Error::Parse(_))));

        let bad = r#"{"alphabet_size": 2, "depth": 1, "values": {"0": "x", "1": "1"}}"#;
        assert!(matches!(load_potential(bad), Err(Error::Parse(_))));

        assert!(matches!(load_potential("{not json"), Err(Error::Parse(_))));
    }

    #[test]
    fn document_round_trip_is_exact() {
        let p = LocallyConstantPotential::from_values(3, 1, vec![qf(-22, 7), qf(1, 3), q(5)]).unwrap();
        let text = p.to_document();
        assert_eq!(load_potential(&text).unwrap(), p);
        assert_eq!(load_potential(&text).unwrap().to_document(), text);
    }

    #[test]
    fn distance_family_period_two_targets() {
        let spec = HolderFamilySpec::distance(vec![pt("(01)"), pt("(10)")], qf(1, 2), q(1)).unwrap();
        let p = project_distance_family(&spec, 2).unwrap();
        // 00 and 11 first disagree with the nearest target at the second symbol.
        assert_eq!(p.values(), &[qf(-1, 4), q(0), q(0), qf(-1, 4)]);
    }

    #[test]
    fn distance_family_fixed_point_target() {
        let spec = HolderFamilySpec::distance(vec![pt("(0)")], qf(1, 2), q(1)).unwrap();
        let p = project_distance_family(&spec, 1).unwrap();
        assert_eq!(p.values(), &[q(0), qf(-1, 2)]);
    }

    #[test]
    fn distance_family_vanishes_on_targets() {
        let spec = HolderFamilySpec::distance(vec![pt("(011)")], qf(1, 3), q(1)).unwrap();
        let p = project_distance_family(&spec, 3).unwrap();
        assert_eq!(p.value(&Word::parse("011", 2).unwrap()).unwrap(), &q(0));
        assert!(p.value(&Word::parse("010", 2).unwrap()).unwrap().is_negative());
    }

    #[test]
    fn lambda_must_be_in_unit_interval() {
        for lam in [q(0), q(1), qf(3, 2)] {
            assert!(HolderFamilySpec::distance(vec![pt("(0)")], lam, q(1)).is_err());
        }
        assert!(HolderFamilySpec::distance(vec![], qf(1, 2), q(1)).is_err());
    }

    #[test]
    fn leplaideur_words() {
        assert_eq!(leplaideur_word(1), vec![0, 1, 1, 0, 1]);
        assert_eq!(leplaideur_word(2), vec![0, 1, 0, 1, 1, 0, 1]);
        for n in 1..5 {
            assert_eq!(leplaideur_word(n).len(), 2 * n + 3);
            assert_eq!(leplaideur_targets(n).len(), 2 * n + 5);
        }
        // w0 = 1 1 (01)^∞ enters p1 = (10)^∞ after one shift.
        assert_eq!(pt("11(01)").shift(), pt("(10)"));
    }

    #[test]
    fn leplaideur_member_vanishes_on_target_representatives() {
        let lam = qf(1, 2);
        let p = leplaideur_member(1, &lam, 5).unwrap();
        let targets = leplaideur_targets(1);
        for i in 0..32 {
            let w = Word::from_index(i, 5, 2);
            let rep = w.periodic_point().unwrap();
            assert_eq!(p.value_by_index(i).is_zero(), targets.contains(&rep), "{w}");
        }
    }

    #[test]
    fn error_bounds() {
        let dist = HolderFamilySpec::distance(vec![pt("(0)")], qf(1, 2), q(1)).unwrap();
        assert_eq!(projection_error_bound(&dist, 4).unwrap(), qf(1, 16));
        let half = HolderFamilySpec::distance(vec![pt("(0)")], qf(1, 2), qf(1, 2)).unwrap();
        assert_eq!(projection_error_bound(&half, 4).unwrap(), qf(1, 4));
        assert!(projection_error_bound(&half, 3).is_err());
        let explicit = HolderFamilySpec::new(FamilyKind::ExplicitTable, qf(1, 2), q(1)).unwrap();
        assert_eq!(projection_error_bound(&explicit, 4).unwrap(), q(0));
    }

    #[test]
    fn error_bound_dominates_projection_error() {
        // The depth-8 projection stands in for the family itself.
        let spec = HolderFamilySpec::distance(leplaideur_targets(1), qf(1, 2), q(1)).unwrap();
        let fine = project_distance_family(&spec, 8).unwrap();
        let mut last = None;
        for k in 1..=6 {
            let coarse = project_distance_family(&spec, k).unwrap().lift(8).unwrap();
            let err = coarse.sub(&fine).unwrap().sup_norm();
            let bound = projection_error_bound(&spec, k).unwrap();
            assert!(err <= bound, "depth {k}");
            if let Some(prev) = last {
                assert!(bound <= prev);
            }
            last = Some(bound);
        }
    }

    #[test]
    fn family_document_projects_at_requested_depth() {
        let doc = r#"{"alphabet_size": 2, "depth": 2,
                      "family": {"kind": "distance", "targets": ["(01)"], "lambda": "1/2"}}"#;
        let loaded = load_document(doc, Some(3)).unwrap();
        assert_eq!(loaded.potential.depth(), 3);
        assert!(loaded.family.is_some());
        let lep = r#"{"alphabet_size": 2, "family": {"kind": "leplaideur", "n": 1, "lambda": "1/2"}}"#;
        assert_eq!(load_document(lep, Some(5)).unwrap().potential, leplaideur_member(1, &qf(1, 2), 5).unwrap());
        assert!(load_document(lep, None).is_err());
    }

    #[test]
    fn lookups_are_constant_on_cylinders() {
        let p = canonical_a2();
        assert_eq!(p.value_at(&pt("01(1)")), p.value_at(&pt("(01)")));
        assert_eq!(p.value_at(&pt("1(0)")), &q(0));
        assert_eq!(p.lift(4).unwrap().value_at(&pt("110(0)")), &q(-1));
    }

    #[test]
    fn variation_and_seminorm() {
        let p = canonical_a2();
        assert_eq!(p.variation(0), q(1));
        assert_eq!(p.variation(1), q(1));
        assert_eq!(p.variation(2), q(0));
        // max(1 / (1/2), 1 / (1/4)) = 4
        assert_eq!(p.lipschitz_seminorm(&qf(1, 2)), q(4));
    }
}
