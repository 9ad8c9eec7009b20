//! Seeded randomized campaigns over checkers, functions, sizes and arities.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rayon::prelude::*;
use sha2::{Digest, Sha256};

use super::checks::*;
use super::trace::{check_ssf, check_thm8_trace, check_trace_kernel};
use super::report::format_number;
use super::{BoundReport, Outcome};
use crate::bernstein::{Base, BernsteinFunction};
use crate::error::{Error, Result};
use crate::operators::{FactorySpec, GeneratorTuple, IdealNorm, TupleFactory};
use crate::quadrature::QuadratureSpec;

macro_rules! checkers {
    ($($variant:ident => $name:literal),* $(,)?) => {
        /// A checker family selectable in a campaign.
        #[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
        pub enum CheckerKind {
            $($variant),*
        }

        impl CheckerKind {
            pub const ALL: &'static [CheckerKind] = &[$(CheckerKind::$variant),*];

            pub fn name(self) -> &'static str {
                match self {
                    $(CheckerKind::$variant => $name),*
                }
            }
        }
    };
}

checkers! {
    Thm1 => "thm1",
    Ex1 => "ex1",
    Cor1 => "cor1",
    Cor2 => "cor2",
    Cor3 => "cor3",
    Thm2 => "thm2",
    Cor4 => "cor4",
    Cor5 => "cor5",
    Lemma1 => "lemma1",
    Thm5 => "thm5",
    Frechet => "frechet",
    Eq9 => "eq9",
    TraceKernel => "trace_kernel",
    Thm8 => "thm8",
    Ssf => "ssf",
    Subordination => "subordination",
    Oracle => "oracle",
}

impl CheckerKind {
    /// Valid names, for diagnostics.
    pub fn names() -> String {
        let mut s: Vec<&str> = Self::ALL.iter().map(|k| k.name()).collect();
        s.extend(["thm4", "cor8", "cor9", "thm6", "thm7", "all"]);
        s.join(", ")
    }

    /// Checkers defined only for one generator.
    pub fn univariate_only(self) -> bool {
        matches!(
            self,
            CheckerKind::Ex1
                | CheckerKind::Lemma1
                | CheckerKind::Frechet
                | CheckerKind::Eq9
                | CheckerKind::TraceKernel
                | CheckerKind::Thm8
                | CheckerKind::Ssf
        )
    }
}

impl fmt::Display for CheckerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for CheckerKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let alias = match s {
            "thm4" => "cor2",
            "cor8" => "cor3",
            "cor9" => "lemma1",
            "thm6" | "thm7" => "frechet",
            other => other,
        };
        Self::ALL
            .iter()
            .copied()
            .find(|k| k.name() == alias)
            .ok_or_else(|| Error::Parse(format!("unknown checker `{s}`; valid: {}", Self::names())))
    }
}

/// Serialization of a report.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    /// One JSON object per line.
    Records,
    Csv,
}

impl FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "records" => Ok(OutputFormat::Records),
            "csv" => Ok(OutputFormat::Csv),
            other => Err(Error::Parse(format!("unknown format `{other}`; valid: records, csv"))),
        }
    }
}

impl fmt::Display for OutputFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            OutputFormat::Records => "records",
            OutputFormat::Csv => "csv",
        })
    }
}

/// Everything that determines a campaign.
#[derive(Debug, Clone, PartialEq)]
pub struct CampaignConfig {
    pub checkers: Vec<CheckerKind>,
    /// Catalog names; one-variable bases are lifted to `sum:` or `diag:`
    /// composites for arities above one.
    pub psis: Vec<String>,
    pub dims: Vec<usize>,
    pub arities: Vec<usize>,
    /// Trials per checker.
    pub trials: usize,
    pub seed: u64,
    pub norms: Vec<IdealNorm>,
    /// Cap on `κ(S)` for the non-unitary half of the instances.
    pub kappa_max: f64,
    /// Upper bound on `Re λ` of factory spectra.
    pub omega: f64,
    pub quadrature: QuadratureSpec,
    pub output: Option<String>,
    pub format: OutputFormat,
}

impl Default for CampaignConfig {
    fn default() -> Self {
        Self {
            checkers: CheckerKind::ALL.to_vec(),
            psis: ["sqrt", "alpha:0.25", "alpha:0.75", "log", "rat", "poisson"].map(String::from).to_vec(),
            dims: vec![2, 4, 8],
            arities: vec![1, 2, 3],
            trials: 100,
            seed: 0,
            norms: vec![IdealNorm::Operator, IdealNorm::Trace, IdealNorm::Frobenius, IdealNorm::Schatten(3.0)],
            kappa_max: 5.0,
            omega: -0.1,
            quadrature: QuadratureSpec::matrix(),
            output: None,
            format: OutputFormat::Records,
        }
    }
}

impl CampaignConfig {
    pub fn validate(&self) -> Result<()> {
        for p in &self.psis {
            BernsteinFunction::from_name(p)?;
        }
        if self.dims.contains(&0) || self.arities.contains(&0) {
            return Err(Error::Parse("dimensions and arities must be positive".into()));
        }
        if self.trials > 0 && (self.psis.is_empty() || self.dims.is_empty() || self.arities.is_empty()) {
            return Err(Error::Parse("psi, dim and arity lists must be non-empty".into()));
        }
        if !(self.kappa_max >= 1.0 && self.kappa_max.is_finite()) {
            return Err(Error::Parse(format!("kappa_max = {} must be ≥ 1", self.kappa_max)));
        }
        if !(self.omega < 0.0) {
            return Err(Error::Parse(format!("omega = {} must be negative", self.omega)));
        }
        self.quadrature.validate()
    }

    /// One `key=value` line per setting in a fixed order, lists as repeated
    /// keys. The output path is excluded.
    pub fn canonical_text(&self) -> String {
        let mut out = String::new();
        let mut line = |k: &str, v: String| {
            out.push_str(k);
            out.push('=');
            out.push_str(&v);
            out.push('\n');
        };
        for c in &self.checkers {
            line("checker", c.name().into());
        }
        for p in &self.psis {
            line("psi", p.clone());
        }
        for d in &self.dims {
            line("dim", d.to_string());
        }
        for n in &self.arities {
            line("arity", n.to_string());
        }
        line("trials", self.trials.to_string());
        line("seed", self.seed.to_string());
        for n in &self.norms {
            line("norm", n.to_string());
        }
        line("kappa_max", format_number(self.kappa_max));
        line("omega", format_number(self.omega));
        let q = &self.quadrature;
        line("quad.delta_split", format_number(q.delta_split));
        line("quad.panels_per_decade", q.panels_per_decade.to_string());
        line("quad.nodes_per_panel", q.nodes_per_panel.to_string());
        line("quad.origin_cutoff", format_number(q.origin_cutoff));
        line("quad.tail_truncation_tol", format_number(q.tail_truncation_tol));
        line("quad.target_tol", format_number(q.target_tol));
        line("quad.max_truncation", format_number(q.max_truncation));
        line("format", self.format.to_string());
        out
    }

    /// SHA-256 of [`canonical_text`](Self::canonical_text), hex encoded.
    pub fn digest(&self) -> String {
        hex::encode(Sha256::digest(self.canonical_text().as_bytes()))
    }
}

/// Totals over a campaign.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct CampaignTotals {
    pub reports: usize,
    pub passed: usize,
    pub failed: usize,
    /// Reports with an unmet hypothesis.
    pub gated: usize,
}

/// Sorted reports plus computation errors.
#[derive(Debug, Clone, PartialEq)]
pub struct Campaign {
    pub reports: Vec<BoundReport>,
    /// `(checker, seed, message)` for trials whose evaluation failed; each
    /// also contributes a failing report.
    pub errors: Vec<(String, u64, String)>,
}

impl Campaign {
    pub fn totals(&self) -> CampaignTotals {
        let mut t = CampaignTotals { reports: self.reports.len(), ..Default::default() };
        for r in &self.reports {
            match r.outcome() {
                Outcome::Pass => t.passed += 1,
                Outcome::Fail => t.failed += 1,
                Outcome::Gated => t.gated += 1,
            }
        }
        t
    }
}

/// The function used at arity `n`: composites keep their own arity,
/// bases are lifted alternately to `sum:b,…,b` and `diag:n:b`.
fn lifted_psi(name: &str, n: usize, diagonal: bool) -> Result<BernsteinFunction> {
    let psi = BernsteinFunction::from_name(name)?;
    if psi.arity() != 1 || n == 1 || psi.terms().len() != 1 {
        return Ok(psi);
    }
    let base: Base = psi.terms()[0].base;
    Ok(if diagonal { BernsteinFunction::diagonal(base, n) } else { BernsteinFunction::axis_sum(&vec![base; n]) })
}

struct Trial<'a> {
    kind: CheckerKind,
    seed: u64,
    psi: BernsteinFunction,
    d: usize,
    config: &'a CampaignConfig,
}

const LEMMA_STEPS: [f64; 4] = [-2.0, -0.5, 0.5, 2.0];

impl Trial<'_> {
    fn factory_spec(&self, f: &mut TupleFactory, n: usize) -> FactorySpec {
        let kappa = if f.uniform(0.0, 1.0) < 0.5 { 1.0 } else { self.config.kappa_max };
        FactorySpec::new(n, self.d).kappa_max(kappa).omega(self.config.omega)
    }

    /// `A` plus a partner sharing its similarity (even-numbered coin) or
    /// drawn independently.
    fn pair(&self, f: &mut TupleFactory, shared_only: bool) -> (GeneratorTuple, GeneratorTuple) {
        let spec = self.factory_spec(f, self.psi.arity());
        let a = f.tuple(&spec);
        let shared = shared_only || f.uniform(0.0, 1.0) < 0.5;
        let b = if shared {
            let size = f.uniform(0.05, 1.5);
            f.codiagonal_perturbation(&a, size)
        } else {
            let spec = self.factory_spec(f, self.psi.arity());
            f.tuple(&spec)
        };
        (a, b)
    }

    fn run(&self) -> Result<Vec<BoundReport>> {
        let q = &self.config.quadrature;
        let norms = &self.config.norms;
        let psi = &self.psi;
        let mut f = TupleFactory::new(self.seed);
        match self.kind {
            CheckerKind::Thm1 => {
                let (a, b) = self.pair(&mut f, false);
                Ok(vec![check_thm1(psi, &a, &b, q)?])
            }
            CheckerKind::Ex1 => {
                let (a, b) = self.pair(&mut f, false);
                Ok(vec![check_ex1(psi, &a, &b, q)?])
            }
            CheckerKind::Cor1 => {
                let (a, b) = self.pair(&mut f, true);
                check_cor1(psi, &a, &b, 8, q)
            }
            CheckerKind::Cor2 => {
                let (a, b) = self.pair(&mut f, false);
                check_cor2_lipschitz(psi, &a, &b, norms, q)
            }
            CheckerKind::Cor3 => {
                let (a, b) = self.pair(&mut f, false);
                check_cor3_stable(psi, &a, &b, norms, q)
            }
            CheckerKind::Thm2 | CheckerKind::Cor5 => {
                let spec = self.factory_spec(&mut f, psi.arity());
                let family = f.family(&spec, 2);
                let x = f.unit_vector(self.d);
                if self.kind == CheckerKind::Thm2 {
                    Ok(vec![check_thm2_pointwise(psi, &family[0], &family[1], &x, q)?])
                } else {
                    Ok(vec![check_cor5_pointwise(psi, &family[0], &family[1], &x, q)?])
                }
            }
            CheckerKind::Cor4 => {
                let spec = self.factory_spec(&mut f, psi.arity());
                let a = f.tuple(&spec);
                let x = f.unit_vector(self.d);
                Ok(vec![check_cor4(psi, &a, &x, q)?])
            }
            CheckerKind::Lemma1 => {
                let spec = self.factory_spec(&mut f, 1);
                let a = f.tuple(&spec);
                let size = f.uniform(0.1, 2.0);
                let h = f.hermitian(self.d, size);
                let s = LEMMA_STEPS[(self.seed % 4) as usize];
                check_lemma1(&a.mats()[0], &h, s, norms)
            }
            CheckerKind::Thm5 => {
                let spec = self.factory_spec(&mut f, psi.arity());
                let a = f.tuple(&spec);
                let size = f.uniform(0.1, 2.0);
                let h = f.hermitian(self.d, size);
                let s = f.uniform(-2.0, 2.0);
                let mut rows = check_thm5_commutator(psi, &a, &h, norms, q)?;
                rows.push(check_conjugation(psi, &a, &h, s, q)?);
                Ok(rows)
            }
            CheckerKind::Frechet => {
                let spec = self.factory_spec(&mut f, 1);
                let a = f.tuple(&spec);
                let size = f.uniform(0.2, 1.0);
                let target = f.codiagonal_perturbation(&a, size);
                check_thm6_frechet(psi, &a, &target, norms, q)
            }
            CheckerKind::Eq9 => {
                let spec = self.factory_spec(&mut f, 1);
                let a1 = f.tuple(&spec);
                let a2 = if self.seed.is_multiple_of(2) {
                    let size = f.uniform(0.05, 1.0);
                    f.codiagonal_perturbation(&a1, size)
                } else {
                    f.tuple(&spec)
                };
                Ok(vec![check_eq9_identity(psi, &a1, &a2, q)?, check_phi_diagonal(psi, &a1, q)?])
            }
            CheckerKind::TraceKernel => {
                let spec = self.factory_spec(&mut f, 1).real_spectrum(false);
                let a = f.tuple(&spec);
                let b = f.tuple(&spec);
                let z = Complex64::new(f.uniform(0.1, 3.0), f.uniform(-2.0, 2.0));
                let u = f.uniform(0.1, 5.0);
                check_trace_kernel(&a, &b, z, u)
            }
            CheckerKind::Thm8 => {
                let (a, b) = self.pair(&mut f, false);
                Ok(vec![check_thm8_trace(psi, &a, &b, q)?])
            }
            CheckerKind::Ssf => {
                let spec = self.factory_spec(&mut f, 1);
                let ea = f.spectrum(self.d, spec.omega, spec.spread, true);
                let eb = f.spectrum(self.d, spec.omega, spec.spread, true);
                let a = GeneratorTuple::diagonal(vec![ea])?;
                let b = GeneratorTuple::diagonal(vec![eb])?;
                Ok(vec![check_ssf(psi, &a, &b)?])
            }
            CheckerKind::Subordination => {
                let spec = self.factory_spec(&mut f, psi.arity());
                let a = f.tuple(&spec);
                check_subordination(psi, &a, q)
            }
            CheckerKind::Oracle => {
                let spec = self.factory_spec(&mut f, psi.arity());
                let a = f.tuple(&spec);
                Ok(vec![check_oracle(psi, &a, q)?])
            }
        }
    }
}

/// Run every selected checker on `trials` seeded instances.
///
/// Trial `i` uses seed `seed + i` and the mixed-radix selection
/// `ψ = psis[i mod P]`, `d = dims[(i / P) mod D]`, `n = arities[(i / PD) mod N]`.
/// Reports are sorted by `(checker, seed)` before they are returned.
pub fn run_campaign(config: &CampaignConfig) -> Result<Campaign> {
    config.validate()?;
    let (p, d, n) = (config.psis.len(), config.dims.len(), config.arities.len());
    let mut trials = Vec::new();
    for &kind in &config.checkers {
        for i in 0..config.trials {
            let seed = config.seed.wrapping_add(i as u64);
            let name = &config.psis[i % p];
            let dim = config.dims[(i / p) % d];
            let arity = if kind.univariate_only() { 1 } else { config.arities[(i / (p * d)) % n] };
            let diagonal = (i / (p * d * n)) % 2 == 1;
            let psi = lifted_psi(name, arity, diagonal)?;
            trials.push(Trial { kind, seed, psi, d: dim, config });
        }
    }
    let mut results: Vec<(CheckerKind, u64, Vec<BoundReport>, Option<String>)> = trials
        .par_iter()
        .map(|t| {
            let digest = |r: BoundReport| {
                let tail = r.instance_digest.clone();
                r.digest(format!("seed={};{tail}", t.seed))
            };
            match t.run() {
                Ok(rows) => (t.kind, t.seed, rows.into_iter().map(digest).collect(), None),
                Err(e) => {
                    let row = BoundReport::failed(t.kind.name(), IdealNorm::Operator)
                        .digest(crate::verify::instance_digest(&t.psi, t.d));
                    (t.kind, t.seed, vec![digest(row)], Some(e.to_string()))
                }
            }
        })
        .collect();
    results.sort_by_key(|(kind, seed, _, _)| (*kind, *seed));
    let mut campaign = Campaign { reports: Vec::new(), errors: Vec::new() };
    for (kind, seed, rows, err) in results {
        campaign.reports.extend(rows);
        if let Some(e) = err {
            campaign.errors.push((kind.name().to_string(), seed, e));
        }
    }
    Ok(campaign)
}
