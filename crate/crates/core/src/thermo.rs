//! Ruelle transfer matrices at finite inverse temperature, in log domain.
//!
//! `(L φ)(v) = Σ_{e into v} e^{βA(e)} φ(source e)`; its leading eigenvector
//! `φ` is the eigenfunction and the left eigenvector `ν` carries the
//! eigenmeasure's masses on node cylinders. Everything is kept as logarithms
//! so that `β = 64` and beyond stays finite.

use rayon::prelude::*;

use crate::duality::KernelTable;
use crate::error::{Error, Result};
use crate::maxplus::Analysis;
use crate::potential::LocallyConstantPotential;
use crate::rational::{to_f64, Q};
use crate::symbolic::Word;

/// Iteration cap for the polishing power steps.
pub const MAX_POWER_STEPS: usize = 1_000_000;
const MAX_SQUARINGS: usize = 200;

/// `log Σ exp(x_i)`, accurate when one term dominates.
pub fn log_sum_exp(xs: &[f64]) -> f64 {
    let Some((imax, &m)) = xs.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1)) else {
        return f64::NEG_INFINITY;
    };
    if m == f64::NEG_INFINITY {
        return m;
    }
    let rest: f64 = xs.iter().enumerate().filter(|&(i, _)| i != imax).map(|(_, &x)| (x - m).exp()).sum();
    m + rest.ln_1p()
}

#[derive(Clone, Debug)]
pub struct RuelleMatrix {
    pub beta: f64,
    alphabet: usize,
    node_depth: usize,
    /// `β A(e)` per edge.
    edge_logs: Vec<f64>,
    /// Dense `log M[v][u]`, parallel edges combined.
    log_m: Vec<Vec<f64>>,
    /// `β m(A)`, used as the spectral shift.
    shift: f64,
}

impl RuelleMatrix {
    pub fn new(potential: &LocallyConstantPotential, beta: f64) -> Result<Self> {
        if !(beta.is_finite() && beta > 0.0) {
            return Err(Error::InvalidInput(format!("beta must be finite and positive, got {beta}")));
        }
        let analysis_mean =
            crate::maxplus::max_mean_cycle(&crate::symbolic::DeBruijnGraph::from_potential(potential)).m_a;
        Ok(Self::with_mean(potential, beta, &analysis_mean))
    }

    fn with_mean(potential: &LocallyConstantPotential, beta: f64, m_a: &Q) -> Self {
        let d = potential.alphabet();
        let node_depth = potential.depth() - 1;
        let n = d.pow(node_depth as u32);
        let edge_logs: Vec<f64> = potential.values().iter().map(|v| beta * to_f64(v)).collect();
        let mut terms: Vec<Vec<Vec<f64>>> = vec![vec![Vec::new(); n]; n];
        for (e, &l) in edge_logs.iter().enumerate() {
            let (u, v) = (e / d, e % n);
            terms[v][u].push(l);
        }
        let log_m = terms.iter().map(|row| row.iter().map(|t| log_sum_exp(t)).collect()).collect();
        RuelleMatrix { beta, alphabet: d, node_depth, edge_logs, log_m, shift: beta * to_f64(m_a) }
    }

    pub fn dimension(&self) -> usize {
        self.log_m.len()
    }

    pub fn log_entry(&self, v: usize, u: usize) -> f64 {
        self.log_m[v][u]
    }

    /// `log (M φ)(v)` for a log-domain vector.
    fn apply_log(&self, log_phi: &[f64], v: usize) -> f64 {
        let terms: Vec<f64> = (0..self.dimension()).map(|u| self.log_m[v][u] + log_phi[u]).collect();
        log_sum_exp(&terms)
    }

    /// `log (ν M)(u)`.
    fn apply_left_log(&self, log_nu: &[f64], u: usize) -> f64 {
        let terms: Vec<f64> = (0..self.dimension()).map(|v| log_nu[v] + self.log_m[v][u]).collect();
        log_sum_exp(&terms)
    }

    /// `M + e^{β m(A)} I` in log domain; its spectrum is shifted away from the
    /// unit circle so that powers converge to rank one.
    fn shifted(&self) -> Vec<Vec<f64>> {
        let mut b = self.log_m.clone();
        for (i, row) in b.iter_mut().enumerate() {
            row[i] = log_sum_exp(&[row[i], self.shift]);
        }
        b
    }
}

fn normalize_max(v: &mut [f64]) {
    let m = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    v.iter_mut().for_each(|x| *x -= m);
}

fn normalize_sum(v: &mut [f64]) {
    let s = log_sum_exp(v);
    v.iter_mut().for_each(|x| *x -= s);
}

fn log_square(b: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = b.len();
    let mut out: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut terms = vec![0.0; n];
            (0..n)
                .map(|j| {
                    for k in 0..n {
                        terms[k] = b[i][k] + b[k][j];
                    }
                    log_sum_exp(&terms)
                })
                .collect()
        })
        .collect();
    let m = out.iter().flatten().cloned().fold(f64::NEG_INFINITY, f64::max);
    out.iter_mut().flatten().for_each(|x| *x -= m);
    out
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Size of the largest finite log entry, at least one.
fn log_scale(a: &[f64], b: &[f64]) -> f64 {
    a.iter().chain(b).filter(|x| x.is_finite()).fold(1.0, |m, x| m.max(x.abs()))
}

/// Leading eigen-data of a Ruelle matrix.
#[derive(Clone, Debug)]
pub struct EigenTriple {
    pub beta: f64,
    pub log_lambda: f64,
    /// `log φ`, normalized so that `max φ = 1`.
    pub log_phi: Vec<f64>,
    /// `log ν`, normalized so that `Σ ν = 1`.
    pub log_nu: Vec<f64>,
    /// Gibbs masses of node cylinders.
    pub mu: Vec<f64>,
    /// `‖Mφ − λφ‖∞ / λ`.
    pub residual: f64,
    alphabet: usize,
    node_depth: usize,
    edge_logs: Vec<f64>,
    log_mu_norm: f64,
}

/// `log λ` read off at the node where `φ` is largest.
fn rayleigh_at_peak(m: &RuelleMatrix, log_phi: &[f64]) -> f64 {
    let v = (0..log_phi.len()).max_by(|&a, &b| log_phi[a].total_cmp(&log_phi[b])).unwrap();
    m.apply_log(log_phi, v) - log_phi[v]
}

/// Leading eigenvalue, eigenfunction and eigenmeasure.
///
/// The shifted matrix is squared in log domain until its normalized columns
/// and rows settle, then plain power steps polish the vectors until `log λ`
/// is stable to `1e-14` (relative to `max(1, |log λ|)`).
pub fn leading_eigs(m: &RuelleMatrix) -> Result<EigenTriple> {
    let n = m.dimension();
    let mut b = m.shifted();
    let column = |b: &[Vec<f64>]| {
        let mut v: Vec<f64> = (0..n).map(|i| b[i][0]).collect();
        normalize_max(&mut v);
        v
    };
    let row = |b: &[Vec<f64>]| {
        let mut v = b[0].clone();
        normalize_sum(&mut v);
        v
    };
    let mut phi = column(&b);
    let mut nu = row(&b);
    let mut settled = false;
    for _ in 0..MAX_SQUARINGS {
        b = log_square(&b);
        let (p2, n2) = (column(&b), row(&b));
        let delta = max_abs_diff(&p2, &phi).max(max_abs_diff(&n2, &nu));
        phi = p2;
        nu = n2;
        if delta <= 1e-14 * log_scale(&phi, &nu) {
            settled = true;
            break;
        }
    }
    if !settled {
        return Err(Error::Numeric(format!("squaring did not settle at beta = {}", m.beta)));
    }
    let b1 = m.shifted();
    let mut log_lambda = rayleigh_at_peak(m, &phi);
    let mut converged = false;
    for _ in 0..MAX_POWER_STEPS {
        let mut p2: Vec<f64> =
            (0..n).map(|v| log_sum_exp(&(0..n).map(|u| b1[v][u] + phi[u]).collect::<Vec<_>>())).collect();
        normalize_max(&mut p2);
        let mut n2: Vec<f64> =
            (0..n).map(|u| log_sum_exp(&(0..n).map(|v| nu[v] + b1[v][u]).collect::<Vec<_>>())).collect();
        normalize_sum(&mut n2);
        let next = rayleigh_at_peak(m, &p2);
        let change = (next - log_lambda).abs();
        let vec_change = max_abs_diff(&p2, &phi).max(max_abs_diff(&n2, &nu));
        phi = p2;
        nu = n2;
        log_lambda = next;
        if change <= 1e-14 * log_lambda.abs().max(1.0) && vec_change <= 1e-12 * log_scale(&phi, &nu) {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::Numeric(format!(
            "power iteration did not converge at beta = {} (log lambda = {log_lambda})",
            m.beta
        )));
    }
    let residual = (0..n)
        .map(|v| {
            let r = m.apply_log(&phi, v) - phi[v];
            phi[v].exp() * (r - log_lambda).exp_m1().abs()
        })
        .fold(0.0, f64::max);
    // The left vector is checked through the same residual on ν.
    let left_residual = (0..n)
        .map(|u| {
            let r = m.apply_left_log(&nu, u) - nu[u];
            (nu[u]).exp() * (r - log_lambda).exp_m1().abs()
        })
        .fold(0.0, f64::max);

    let weights: Vec<f64> = (0..n).map(|u| phi[u] + nu[u]).collect();
    let log_mu_norm = log_sum_exp(&weights);
    let mu = weights.iter().map(|w| (w - log_mu_norm).exp()).collect();
    Ok(EigenTriple {
        beta: m.beta,
        log_lambda,
        log_phi: phi,
        log_nu: nu,
        mu,
        residual: residual.max(left_residual),
        alphabet: m.alphabet,
        node_depth: m.node_depth,
        edge_logs: m.edge_logs.clone(),
        log_mu_norm,
    })
}

impl EigenTriple {
    pub fn lambda(&self) -> f64 {
        self.log_lambda.exp()
    }

    pub fn phi(&self) -> Vec<f64> {
        self.log_phi.iter().map(|x| x.exp()).collect()
    }

    pub fn nu(&self) -> Vec<f64> {
        self.log_nu.iter().map(|x| x.exp()).collect()
    }

    /// `log ν[w]` for a word of length at least `k − 1`.
    fn log_nu_long(&self, s: &[u8]) -> f64 {
        let d = self.alphabet;
        let m = self.node_depth;
        let index = |t: &[u8]| t.iter().fold(0usize, |acc, &a| acc * d + a as usize);
        let windows: f64 = (0..s.len() - m).map(|i| self.edge_logs[index(&s[i..i + m + 1])] - self.log_lambda).sum();
        windows + self.log_nu[index(&s[s.len() - m..])]
    }

    /// `log μ_β[w]` for any cylinder word.
    pub fn log_cylinder_mass(&self, w: &Word) -> f64 {
        let d = self.alphabet;
        let m = self.node_depth;
        let s = w.symbols();
        if s.len() >= m {
            let first = s[..m].iter().fold(0usize, |acc, &a| acc * d + a as usize);
            return self.log_phi[first] + self.log_nu_long(s) - self.log_mu_norm;
        }
        let extra = m - s.len();
        let terms: Vec<f64> = (0..d.pow(extra as u32))
            .map(|tail| {
                let mut full = s.to_vec();
                full.extend_from_slice(Word::from_index(tail, extra, d).symbols());
                self.log_cylinder_mass(&Word::new(full, d).unwrap())
            })
            .collect();
        log_sum_exp(&terms)
    }

    pub fn cylinder_mass(&self, w: &Word) -> f64 {
        self.log_cylinder_mass(w).exp()
    }
}

/// `inf I` over the cylinder of `w`: internal defects plus the cheapest
/// continuation into the critical graph.
pub fn deviation_infimum(analysis: &Analysis, w: &Word) -> Q {
    let g = &analysis.graph;
    let d = g.alphabet();
    let m = g.node_depth();
    let s = w.symbols();
    let index = |t: &[u8]| t.iter().fold(0usize, |acc, &a| acc * d + a as usize);
    if s.len() >= m {
        let internal: Q = if s.len() > m {
            (0..s.len() - m).map(|i| analysis.error.values[index(&s[i..i + m + 1])].clone()).sum()
        } else {
            Q::from_integer(0.into())
        };
        return internal + &analysis.deviation_floor[index(&s[s.len() - m..])];
    }
    let extra = m - s.len();
    (0..d.pow(extra as u32))
        .map(|tail| {
            let mut full = s.to_vec();
            full.extend_from_slice(Word::from_index(tail, extra, d).symbols());
            deviation_infimum(analysis, &Word::new(full, d).unwrap())
        })
        .min()
        .unwrap()
}

/// Largest `|−(1/β) log μ_β(C) − inf_C I|` over all words of length `len`.
pub fn ldp_gap(eig: &EigenTriple, analysis: &Analysis, len: usize) -> f64 {
    let d = analysis.graph.alphabet();
    (0..d.pow(len as u32))
        .map(|i| {
            let w = Word::from_index(i, len, d);
            let rate = -eig.log_cylinder_mass(&w) / eig.beta;
            (rate - to_f64(&deviation_infimum(analysis, &w))).abs()
        })
        .fold(0.0, f64::max)
}

#[derive(Clone, Debug, PartialEq)]
pub struct LdpReport {
    pub word: Word,
    pub infimum: Q,
    /// `(β, −(1/β) log μ_β(C))`.
    pub rates: Vec<(f64, f64)>,
    pub gaps: Vec<f64>,
}

/// Compares cylinder rates with the exact infimum of the deviation function.
pub fn ldp_rate_check(potential: &LocallyConstantPotential, word: &Word, betas: &[f64]) -> Result<LdpReport> {
    let analysis = Analysis::new(potential);
    analysis.critical.unique_cycle()?;
    if word.alphabet() != potential.alphabet() {
        return Err(Error::AlphabetMismatch(potential.alphabet(), word.alphabet()));
    }
    let infimum = deviation_infimum(&analysis, word);
    let inf_f = to_f64(&infimum);
    let rates: Vec<(f64, f64)> = betas
        .par_iter()
        .map(|&beta| {
            let eig = leading_eigs(&RuelleMatrix::with_mean(potential, beta, analysis.m_a()))?;
            Ok((beta, -eig.log_cylinder_mass(word) / beta))
        })
        .collect::<Result<_>>()?;
    let gaps = rates.iter().map(|(_, r)| (r - inf_f).abs()).collect();
    Ok(LdpReport { word: word.clone(), infimum, rates, gaps })
}

/// One row of a temperature scan.
#[derive(Clone, Debug, PartialEq)]
pub struct ScanRow {
    pub beta: f64,
    pub log_lambda: f64,
    pub pressure_over_beta: f64,
    /// `(1/β) log λ − m(A)`.
    pub pressure_gap: f64,
    /// Anchor-normalized `sup |(1/β) log φ − V|`; only with a unique maximizer.
    pub subaction_gap: Option<f64>,
    /// Total variation between node masses of `μ_β` and the maximizing orbit measure.
    pub tv_distance: Option<f64>,
    /// Largest LDP gap over depth-k cylinders.
    pub ldp_gap: Option<f64>,
    pub residual: f64,
}

#[derive(Clone, Debug)]
pub struct ConvergenceReport {
    pub m_a: Q,
    pub unique: bool,
    pub rows: Vec<ScanRow>,
}

/// Node masses of the maximizing orbit measure.
fn orbit_node_masses(analysis: &Analysis) -> Option<Vec<f64>> {
    let cycle = analysis.critical.unique_cycle().ok()?;
    let mut masses = vec![0.0; analysis.graph.node_count()];
    for &e in cycle {
        masses[analysis.graph.source(e)] += 1.0 / cycle.len() as f64;
    }
    Some(masses)
}

/// Temperature scan of pressure, subaction and Gibbs masses.
pub fn beta_scan(potential: &LocallyConstantPotential, betas: &[f64]) -> Result<ConvergenceReport> {
    if betas.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidInput("betas must be strictly increasing".into()));
    }
    let analysis = Analysis::new(potential);
    let unique = analysis.critical.unique_maximizer;
    let m_f = to_f64(analysis.m_a());
    let v: Vec<f64> = analysis.subaction.values.iter().map(to_f64).collect();
    let orbit = orbit_node_masses(&analysis);
    let anchor = analysis.subaction.anchor;
    let rows = betas
        .par_iter()
        .map(|&beta| {
            let eig = leading_eigs(&RuelleMatrix::with_mean(potential, beta, analysis.m_a()))?;
            let pressure_over_beta = eig.log_lambda / beta;
            let subaction_gap = unique.then(|| {
                (0..v.len()).map(|i| ((eig.log_phi[i] - eig.log_phi[anchor]) / beta - v[i]).abs()).fold(0.0, f64::max)
            });
            let tv_distance =
                orbit.as_ref().map(|o| 0.5 * o.iter().zip(&eig.mu).map(|(a, b)| (a - b).abs()).sum::<f64>());
            let ldp = unique.then(|| ldp_gap(&eig, &analysis, potential.depth()));
            Ok(ScanRow {
                beta,
                log_lambda: eig.log_lambda,
                pressure_over_beta,
                pressure_gap: pressure_over_beta - m_f,
                subaction_gap,
                tv_distance,
                ldp_gap: ldp,
                residual: eig.residual,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ConvergenceReport { m_a: analysis.m_a().clone(), unique, rows })
}

impl ConvergenceReport {
    /// CSV with one row per β; the LDP column appears only with a unique maximizer.
    pub fn to_csv(&self) -> String {
        let opt = |v: Option<f64>| v.map_or(String::new(), |x| format!("{x:.17e}"));
        let mut out = String::from("beta,pressure_over_beta,pressure_gap,subaction_gap,tv_distance");
        if self.unique {
            out.push_str(",ldp_gap");
        }
        out.push('\n');
        for r in &self.rows {
            out.push_str(&format!(
                "{},{:.17e},{:.17e},{},{}",
                r.beta,
                r.pressure_over_beta,
                r.pressure_gap,
                opt(r.subaction_gap),
                opt(r.tv_distance)
            ));
            if self.unique {
                out.push(',');
                out.push_str(&opt(r.ldp_gap));
            }
            out.push('\n');
        }
        out
    }
}

/// Eigen-data for `βA` and `βA*` together with the kernel.
pub struct KernelPair<'a> {
    pub kernel: &'a KernelTable,
    pub primal: &'a EigenTriple,
    pub dual: &'a EigenTriple,
}

impl KernelPair<'_> {
    fn beta_w(&self, w: usize, x: usize) -> f64 {
        self.primal.beta * to_f64(self.kernel.get(w, x))
    }

    /// `c = log ΣΣ ν*(w) ν(x) e^{βW(w,x)}`.
    pub fn normalization(&self) -> f64 {
        let n = self.kernel.size();
        let terms: Vec<f64> = (0..n)
            .flat_map(|w| (0..n).map(move |x| (w, x)))
            .map(|(w, x)| self.dual.log_nu[w] + self.primal.log_nu[x] + self.beta_w(w, x))
            .collect();
        log_sum_exp(&terms)
    }

    /// `∫∫ e^{βW − c} dν* dν`, equal to one by construction of `c`.
    pub fn normalized_mass(&self) -> f64 {
        let c = self.normalization();
        let n = self.kernel.size();
        let terms: Vec<f64> = (0..n)
            .flat_map(|w| (0..n).map(move |x| (w, x)))
            .map(|(w, x)| self.dual.log_nu[w] + self.primal.log_nu[x] + self.beta_w(w, x) - c)
            .collect();
        log_sum_exp(&terms).exp()
    }

    /// Worst relative deviation in `φ*(w) ∝ ∫ e^{βW(w,x)} dν(x)` and the
    /// mirrored `φ(x) ∝ ∫ e^{βW(w,x)} dν*(w)`, after one scalar fit each.
    pub fn identity_residual(&self) -> f64 {
        let n = self.kernel.size();
        let c = self.normalization();
        let dual_side: Vec<f64> = (0..n)
            .map(|w| log_sum_exp(&(0..n).map(|x| self.beta_w(w, x) - c + self.primal.log_nu[x]).collect::<Vec<_>>()))
            .collect();
        let primal_side: Vec<f64> = (0..n)
            .map(|x| log_sum_exp(&(0..n).map(|w| self.beta_w(w, x) - c + self.dual.log_nu[w]).collect::<Vec<_>>()))
            .collect();
        fitted_residual(&self.dual.log_phi, &dual_side).max(fitted_residual(&self.primal.log_phi, &primal_side))
    }
}

fn fitted_residual(log_phi: &[f64], log_candidate: &[f64]) -> f64 {
    let peak = (0..log_phi.len()).max_by(|&a, &b| log_phi[a].total_cmp(&log_phi[b])).unwrap();
    let offset = log_phi[peak] - log_candidate[peak];
    (0..log_phi.len()).map(|i| (log_candidate[i] + offset - log_phi[i]).exp_m1().abs()).fold(0.0, f64::max)
}

/// `c` from the eigenmeasures of `βA` and `βA*`.
pub fn kernel_normalization(kernel: &KernelTable, primal: &EigenTriple, dual: &EigenTriple) -> f64 {
    KernelPair { kernel, primal, dual }.normalization()
}

/// Residual of the kernel identities for `φ_{βA*}` and `φ_{βA}`.
pub fn verify_kernel_identity(kernel: &KernelTable, primal: &EigenTriple, dual: &EigenTriple) -> f64 {
    KernelPair { kernel, primal, dual }.identity_residual()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::duality::{dual_potential, involution_kernel};
    use crate::potential::canonical_a2;
    use crate::symbolic::EventuallyPeriodicPoint;

    fn eigs(p: &LocallyConstantPotential, beta: f64) -> EigenTriple {
        leading_eigs(&RuelleMatrix::new(p, beta).unwrap()).unwrap()
    }

    #[test]
    fn lse_handles_extremes() {
        assert_eq!(log_sum_exp(&[]), f64::NEG_INFINITY);
        assert_eq!(log_sum_exp(&[0.0, -64.0]), (-64.0f64).exp().ln_1p());
        assert!((log_sum_exp(&[1000.0, 1000.0]) - (1000.0 + 2f64.ln())).abs() < 1e-12);
    }

    #[test]
    fn a2_closed_form() {
        for beta in [1.0, 8.0, 64.0] {
            let e = eigs(&canonical_a2(), beta);
            let expect = (-beta).exp().ln_1p();
            assert!((e.log_lambda - expect).abs() <= 1e-15 * expect.max(1e-300) + 1e-300, "{beta}");
            assert_eq!(e.log_phi, vec![0.0, 0.0]);
            assert!((e.nu()[0] - 0.5).abs() < 1e-15);
            assert!(e.residual < 1e-12);
        }
    }

    #[test]
    fn constant_depth_one() {
        let p = LocallyConstantPotential::zero(3, 1).unwrap();
        let e = eigs(&p, 2.0);
        assert!((e.lambda() - 3.0).abs() < 1e-12);
        assert_eq!(e.phi(), vec![1.0]);
    }

    #[test]
    fn a2_dual_shares_eigenvalue() {
        let a = canonical_a2();
        let w = involution_kernel(&a, &EventuallyPeriodicPoint::constant(0, 2).unwrap()).unwrap();
        let dual = dual_potential(&a, &w);
        for beta in [1.0, 4.0, 64.0] {
            let (p, d) = (eigs(&a, beta), eigs(&dual, beta));
            assert!((p.lambda() / d.lambda() - 1.0).abs() < 1e-12);
        }
        let (p, d) = (eigs(&a, 1.0), eigs(&dual, 1.0));
        let pair = KernelPair { kernel: &w, primal: &p, dual: &d };
        assert!((pair.normalized_mass() - 1.0).abs() < 1e-12);
        assert!(pair.identity_residual() < 1e-10);
    }

    #[test]
    fn cylinder_masses_are_consistent() {
        let p =
            LocallyConstantPotential::from_fn(2, 3, |w| Q::new((w.index() as i64 % 5 - 2).into(), 3.into())).unwrap();
        let e = eigs(&p, 3.0);
        for len in 0..5 {
            let total: f64 = (0..2usize.pow(len)).map(|i| e.cylinder_mass(&Word::from_index(i, len as usize, 2))).sum();
            assert!((total - 1.0).abs() < 1e-12, "len {len}");
        }
        // Shift invariance: μ[u] = Σ_a μ[a u].
        for i in 0..8 {
            let u = Word::from_index(i, 3, 2);
            let back: f64 = (0..2u8)
                .map(|a| {
                    let mut s = vec![a];
                    s.extend_from_slice(u.symbols());
                    e.cylinder_mass(&Word::new(s, 2).unwrap())
                })
                .sum();
            assert!((back - e.cylinder_mass(&u)).abs() < 1e-12);
        }
    }
}
