//! Sweep execution: instance generation, per-command checks, record assembly.

use std::collections::BTreeMap;
use std::time::{Duration, Instant, SystemTime, UNIX_EPOCH};

use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::Value;

use speclab::bohr::{bourgain_size_check, verify_bohr_containment_with, verify_full_proposition, BohrSpec, Radius};
use speclab::dissociated::{
    chang_decomposition_with, empirical_rudin_constant, improved_decomposition_with, rudin_identity_check, span,
    statement_bound_check, ImprovedVariant,
};
use speclab::energy::{
    energy_tk, energy_tk_bruteforce_within, verify_level_lemma_with, verify_main_theorem_with, EnergyReport,
    LevelSubset,
};
use speclab::fourier::{
    char_function_identity_check, convolution_identity_check, cross_correlation_identity_check, inversion_check,
    parseval_check, ComplexSignal,
};
use speclab::group::all_subsets;
use speclab::setspec::{make_set, SetKind, SetSpec};
use speclab::spectrum::{spectrum_size_bound_check, SetSpectrum, SlackEvent};
use speclab::systems::{
    count_solutions, count_solutions_enumerated, gowers_monotonicity_check, verify_matrix_level_lemma,
    verify_matrix_theorem_with,
};
use speclab::verdict::Verdict;
use speclab::{CyclicGroup, Error, Execution, ResidueSet, Result};

use crate::alpha::AlphaExpr;
use crate::report::{int, list, num, text, Outcome, Provenance, Record, RunReport};

pub const RNG_NAME: &str = "ChaCha8 (rand_chacha 0.3, seed_from_u64, one stream per modulus / instance)";
/// Exhaustive sweeps enumerate 2^N subsets.
pub const EXHAUSTIVE_MAX_MODULUS: u64 = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Spectrum,
    Energy,
    Systems,
    Gowers,
    Chang,
    Improved,
    Bohr,
    VerifyMain,
    VerifyMatrix,
    VerifyAll,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Spectrum => "spectrum",
            Command::Energy => "energy",
            Command::Systems => "systems",
            Command::Gowers => "gowers",
            Command::Chang => "chang",
            Command::Improved => "improved",
            Command::Bohr => "bohr",
            Command::VerifyMain => "verify-main",
            Command::VerifyMatrix => "verify-matrix",
            Command::VerifyAll => "verify-all",
        }
    }
}

#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub command: Command,
    pub sets: Vec<SetSpec>,
    pub moduli: Vec<u64>,
    pub exhaustive: bool,
    /// Random sets per modulus when not exhaustive.
    pub samples: usize,
    /// Density of sampled sets; uniform size in 1..=N when absent.
    pub density: Option<BigRational>,
    pub alphas: Vec<AlphaExpr>,
    pub ks: Vec<u32>,
    pub ds: Vec<u32>,
    pub level_ks: Vec<u32>,
    pub variant: ImprovedVariant,
    pub seed: u64,
    pub budget_tuples: u64,
    pub timeout: Duration,
}

impl ExperimentConfig {
    pub fn new(command: Command) -> Self {
        ExperimentConfig {
            command,
            sets: Vec::new(),
            moduli: Vec::new(),
            exhaustive: false,
            samples: 0,
            density: None,
            alphas: ["delta", "delta/2", "delta/4"].iter().map(|a| a.parse().expect("valid")).collect(),
            ks: vec![2, 3],
            ds: vec![1],
            level_ks: vec![2, 4],
            variant: ImprovedVariant::Star,
            seed: 0,
            budget_tuples: 10_000_000,
            timeout: Duration::from_secs(60),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let empty = |what: &str| Err(Error::Input(format!("{what} grid must be nonempty")));
        if self.alphas.is_empty() {
            return empty("alpha");
        }
        if self.ks.is_empty() {
            return empty("k");
        }
        if self.ds.is_empty() {
            return empty("d");
        }
        if self.budget_tuples == 0 || self.timeout.is_zero() {
            return Err(Error::Input("budgets must be positive".into()));
        }
        if !self.moduli.is_empty() && !self.exhaustive && self.samples == 0 {
            return Err(Error::Input("--N needs --exhaustive or --samples".into()));
        }
        if self.exhaustive {
            if let Some(&n) = self.moduli.iter().find(|&&n| n > EXHAUSTIVE_MAX_MODULUS) {
                return Err(Error::Input(format!(
                    "exhaustive sweep over N = {n} exceeds N <= {EXHAUSTIVE_MAX_MODULUS}"
                )));
            }
        }
        if self.moduli.contains(&0) {
            return Err(Error::Input("moduli must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct Instance {
    pub index: usize,
    pub set: ResidueSet,
    pub source: String,
}

fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Explicit sets first, then each modulus in order; random draws are
/// recorded as reproducible set specs.
pub fn instances(cfg: &ExperimentConfig) -> Result<Vec<Instance>> {
    let mut out = Vec::new();
    for spec in &cfg.sets {
        out.push(Instance { index: out.len(), set: make_set(spec)?, source: spec.to_string() });
    }
    for &n in &cfg.moduli {
        let g = CyclicGroup::new(n)?;
        if cfg.exhaustive {
            for set in all_subsets(g).filter(|s| !s.is_empty()) {
                out.push(Instance { index: out.len(), source: "exhaustive".into(), set });
            }
            continue;
        }
        let mut rng = stream_rng(cfg.seed, n);
        for _ in 0..cfg.samples {
            let density = match &cfg.density {
                Some(d) => d.clone(),
                None => BigRational::new(BigInt::from(rng.gen_range(1..=n)), BigInt::from(n)),
            };
            let spec = SetSpec { modulus: n, kind: SetKind::Random { density, seed: rng.gen() } };
            out.push(Instance { index: out.len(), set: make_set(&spec)?, source: spec.to_string() });
        }
    }
    Ok(out)
}

/// Body of a record before it is tied to an instance.
struct Row {
    values: BTreeMap<String, Value>,
    outcome: Outcome,
    tolerance: Option<f64>,
    slack: Vec<String>,
}

impl Row {
    fn new(outcome: Outcome) -> Self {
        Row { values: BTreeMap::new(), outcome, tolerance: None, slack: Vec::new() }
    }

    fn judged(holds: bool) -> Self {
        Row::new(if holds { Outcome::Pass } else { Outcome::Fail })
    }

    fn with(mut self, key: &str, v: Value) -> Self {
        self.values.insert(key.to_string(), v);
        self
    }

    fn slack(mut self, events: &[SlackEvent]) -> Self {
        self.slack = events.iter().map(describe_slack).collect();
        self
    }

    fn verdict(v: &Verdict) -> Self {
        let mut row = Row::judged(v.holds)
            .with("lhs", num(v.lhs))
            .with("rhs", num(v.rhs))
            .with("deviation", num(v.deviation));
        row.tolerance = Some(crate::report::round15(v.tolerance));
        row
    }

    fn energy(r: &EnergyReport) -> Self {
        let mut row = Row::judged(r.holds)
            .with("count", text(r.count.to_string()))
            .with("bound", num(r.bound))
            .with("set_size", int(r.set_size as u64))
            .with("members", list(&r.members))
            .with("delta", num(r.delta))
            .with("alpha", num(r.alpha))
            .with("exact_comparison", Value::Bool(r.exact_comparison))
            .with("odd_k", Value::Bool(r.odd_k))
            .slack(&r.slack);
        if let Some(x) = r.ratio {
            row = row.with("ratio", num(x));
        }
        row
    }
}

fn describe_slack(e: &SlackEvent) -> String {
    format!(
        "r={} |A^(r)|^2={} threshold^2={} {:?}",
        e.r,
        crate::report::round15(e.modulus_sq),
        crate::report::round15(e.threshold_sq),
        e.resolution
    )
}

type Params = BTreeMap<String, Value>;

fn params(pairs: &[(&str, Value)]) -> Params {
    pairs.iter().map(|(k, v)| (k.to_string(), v.clone())).collect()
}

struct Ctx<'a> {
    cfg: &'a ExperimentConfig,
    inst: &'a Instance,
    records: Vec<Record>,
}

impl<'a> Ctx<'a> {
    fn add(&mut self, check: &str, statement: &str, mut p: Params, row: Result<Row>) {
        p.insert("source".into(), text(self.inst.source.clone()));
        let key = format!("{:09}.{:04}", self.inst.index, self.records.len());
        let base = Record {
            key,
            check: check.to_string(),
            statement: statement.to_string(),
            n: self.inst.set.modulus(),
            set: self.inst.set.to_string(),
            params: p,
            values: BTreeMap::new(),
            outcome: Outcome::Error,
            tolerance: None,
            slack: Vec::new(),
            error: None,
        };
        self.records.push(match row {
            Ok(row) => Record {
                values: row.values,
                outcome: row.outcome,
                tolerance: row.tolerance,
                slack: row.slack,
                ..base
            },
            Err(e) => Record { error: Some(e.to_string()), ..base },
        });
    }

    fn set(&self) -> &ResidueSet {
        &self.inst.set
    }

    fn rng(&self) -> ChaCha8Rng {
        stream_rng(self.cfg.seed, (1 << 40) + self.inst.index as u64)
    }
}

fn alpha_params(expr: &AlphaExpr, set: &ResidueSet) -> Params {
    params(&[("alpha", text(expr.text()))]).into_iter().chain(match expr.eval(&set.density_exact()) {
        Ok(a) => vec![("alpha_value".to_string(), num(a.value()))],
        Err(_) => vec![],
    }).collect()
}

fn spectrum_checks(ctx: &mut Ctx, spec: &SetSpectrum) {
    for expr in &ctx.cfg.alphas {
        let row = (|| {
            let alpha = expr.eval(&ctx.set().density_exact())?;
            let level = spec.threshold(&alpha)?;
            let v = spectrum_size_bound_check(ctx.set(), &alpha)?;
            let windows = spec.dyadic_levels(&alpha)?;
            Ok(Row::verdict(&v)
                .with("members", list(&level.members.to_vec()))
                .with("size", int(level.members.len() as u64))
                .with(
                    "dyadic_level_sizes",
                    Value::Array(windows.iter().map(|w| int(w.members.len() as u64)).collect()),
                )
                .slack(&level.slack))
        })();
        let p = alpha_params(expr, ctx.set());
        ctx.add("spectrum_size_bound_check", "0 in R_alpha, R_alpha = -R_alpha, |R_alpha| <= delta/alpha^2", p, row);
    }
}

fn energy_checks(ctx: &mut Ctx) {
    for &k in &ctx.cfg.ks {
        let row = (|| {
            let count = energy_tk(ctx.set(), k)?;
            let row = Row::new(Outcome::Report).with("t_k", text(count.to_string()));
            Ok(match energy_tk_bruteforce_within(ctx.set(), k, ctx.cfg.budget_tuples) {
                Ok(brute) => Row { outcome: Row::judged(brute == count).outcome, ..row }
                    .with("bruteforce", text(brute.to_string())),
                Err(Error::Budget { .. }) => row.with("bruteforce", text("skipped")),
                Err(e) => return Err(e),
            })
        })();
        ctx.add("energy_tk", "T_k(B) by convolution equals literal enumeration", params(&[("k", int(k))]), row);
    }
}

fn systems_checks(ctx: &mut Ctx) {
    for &k in &ctx.cfg.ks {
        for &d in &ctx.cfg.ds {
            let row = (|| {
                let count = count_solutions(ctx.set(), k, d)?;
                let mut agree = true;
                let mut asserted = false;
                let mut row = Row::new(Outcome::Report).with("count", text(count.to_string()));
                match count_solutions_enumerated(ctx.set(), k, d, ctx.cfg.budget_tuples) {
                    Ok(e) => {
                        asserted = true;
                        agree &= e == count;
                        row = row.with("enumerated", text(e.to_string()));
                    }
                    Err(Error::Budget { .. }) => row = row.with("enumerated", text("skipped")),
                    Err(e) => return Err(e),
                }
                if d == 0 {
                    let t = energy_tk(ctx.set(), k)?;
                    asserted = true;
                    agree &= t == count;
                    row = row.with("t_k", text(t.to_string()));
                }
                if asserted {
                    row.outcome = Row::judged(agree).outcome;
                }
                Ok(row)
            })();
            ctx.add(
                "count_solutions",
                "S_kd(B) agrees across routes; S_k0 = T_k",
                params(&[("k", int(k)), ("d", int(d))]),
                row,
            );
        }
    }
}

fn gowers_checks(ctx: &mut Ctx, f: &ComplexSignal, label: &str) {
    let d_max = ctx.cfg.ds.iter().copied().max().unwrap_or(2).max(2);
    let row = gowers_monotonicity_check(f, d_max).map(|rep| {
        let mut row = Row::verdict(&rep.verdict);
        for v in &rep.norms {
            row = row.with(&format!("u{}", v.d), num(v.value));
        }
        row
    });
    ctx.add(
        "gowers_monotonicity_check",
        "||f||_U^d <= ||f||_U^(d+1)",
        params(&[("d_max", int(d_max)), ("signal", text(label))]),
        row,
    );
}

fn chang_checks(ctx: &mut Ctx, spec: &SetSpectrum) {
    for expr in &ctx.cfg.alphas {
        let p = alpha_params(expr, ctx.set());
        let dec = expr
            .eval(&ctx.set().density_exact())
            .and_then(|alpha| chang_decomposition_with(spec, &alpha, Execution::default()));
        let n = ctx.set().modulus();
        let row = dec.as_ref().map_err(Clone::clone).map(|dec| {
            let verified = dec.representations.iter().all(|r| r.verify(n) && dec.spectrum.contains(r.target))
                && dec.representations.len() == dec.spectrum.len();
            let covered = dec.spectrum.is_subset(&span(&dec.dissociated));
            Row::judged(verified && covered)
                .with("spectrum_size", int(dec.spectrum.len() as u64))
                .with("dissociated", list(&dec.dissociated.to_vec()))
                .with("dissociated_size", int(dec.sizes.dissociated_size as u64))
                .with("chang_bound", num(dec.sizes.chang_bound))
                .with("rudin_route_per_c2", num(dec.sizes.rudin_route_per_c2))
                .with(
                    "max_length",
                    int(dec.representations.iter().map(|r| r.length).max().unwrap_or(0) as u64),
                )
                .slack(&dec.slack)
        });
        ctx.add(
            "chang_decomposition",
            "every r in R_alpha is a signed sum over the maximal dissociated D; Span(D) contains R_alpha",
            p.clone(),
            row,
        );
        let Ok(dec) = dec else { continue };
        for &k in &ctx.cfg.ks {
            let mut pk = p.clone();
            pk.insert("k".into(), int(k));
            let row = rudin_identity_check(&dec.dissociated, k).map(|r| {
                Row::judged(r.holds)
                    .with("spectral", text(r.spectral.to_string()))
                    .with("t_k", text(r.energy.to_string()))
                    .with("spectral_mean", num(r.spectral_mean))
            });
            ctx.add("rudin_identity_check", "(1/N) sum_x |D^(x)|^2k = T_k(D)", pk.clone(), row);
            let ones = vec![Complex64::new(1.0, 0.0); dec.dissociated.len()];
            let row = empirical_rudin_constant(&dec.dissociated, 2 * k, &ones)
                .map(|c| Row::new(Outcome::Report).with("rudin_constant", num(c)));
            ctx.add("empirical_rudin_constant", "smallest C for this instance, a = 1, p = 2k", pk, row);
        }
    }
}

fn improved_admissible(set: &ResidueSet) -> bool {
    let n = set.modulus();
    n.gcd(&6) == 1 && !set.is_empty() && 2 * set.len() as u64 <= n
}

fn improved_checks(ctx: &mut Ctx, spec: &SetSpectrum) {
    for expr in &ctx.cfg.alphas {
        let mut p = alpha_params(expr, ctx.set());
        p.insert("variant".into(), text(format!("{:?}", ctx.cfg.variant).to_lowercase()));
        let dec = expr
            .eval(&ctx.set().density_exact())
            .and_then(|alpha| improved_decomposition_with(spec, &alpha, ctx.cfg.variant, Execution::default()));
        let n = ctx.set().modulus();
        let row = dec.as_ref().map_err(Clone::clone).map(|dec| {
            let ok = dec.representations.len() == dec.spectrum.len()
                && dec.representations.iter().all(|r| {
                    r.verify(n)
                        && r.base.iter().all(|b| dec.basis.contains(*b))
                        && r.length as f64 <= dec.sizes.length_bound
                });
            let mut row = Row::judged(ok)
                .with("k", int(dec.k))
                .with("s", int(dec.s))
                .with("s_clamped", Value::Bool(dec.s_clamped))
                .with("lambda", list(&dec.lambda.to_vec()))
                .with("basis_size", int(dec.sizes.basis_size as u64))
                .with("max_length", int(dec.sizes.max_length as u64))
                .with("length_bound", num(dec.sizes.length_bound))
                .slack(&dec.slack);
            if let Some(b) = dec.sizes.basis_bound {
                row = row.with("basis_bound", num(b));
            }
            row
        });
        ctx.add(
            "improved_decomposition",
            "every r in R_alpha is a signed sum of M <= 8 log(1/delta) basis elements",
            p.clone(),
            row,
        );
        let Ok(dec) = dec else { continue };
        for &k in ctx.cfg.ks.iter().filter(|&&k| k <= dec.k && dec.lambda.len() >= k as usize) {
            let mut pk = p.clone();
            pk.insert("k".into(), int(k));
            pk.insert("s".into(), int(dec.s));
            let row = statement_bound_check(&dec.lambda, k, dec.s).map(|v| Row::verdict(&v));
            ctx.add(
                "statement_bound_check",
                "log2 T_k(Lambda) <= log2 of the Lambda(k,s) upper bound",
                pk,
                row,
            );
        }
    }
}

fn bohr_checks(ctx: &mut Ctx, spec: &SetSpectrum) {
    let cont = verify_bohr_containment_with(spec);
    let row = cont.as_ref().map_err(Clone::clone).map(|c| {
        Row::judged(c.holds)
            .with("frequencies", list(&c.frequencies.to_vec()))
            .with("bohr_size", int(c.bohr.len() as u64))
            .with("difference_size", int(c.difference.set.len() as u64))
            .with("contained", Value::Bool(c.contained))
            .with("certificate_positive", Value::Bool(c.certificate_positive))
            .with("chain_holds", Value::Bool(c.chain_holds))
            .with("max_phase_gap", num(c.max_phase_gap))
            .with("spectral_agrees", Value::Bool(c.difference.spectral_agrees))
            .slack(&c.slack)
    });
    ctx.add(
        "verify_bohr_containment",
        "B(R_alpha \\ {0}, 1/20) inside 2A - 2A at alpha^2 = delta^3/8",
        params(&[("alpha", text("prop"))]),
        row,
    );
    if let Ok(c) = &cont {
        let eps = Radius::Exact(BigRational::new(1.into(), 20.into()));
        let row = BohrSpec::new(c.frequencies.clone(), eps).map(|b| Row::verdict(&bourgain_size_check(&b)));
        ctx.add(
            "bourgain_size_check",
            "|B(K,eps)| >= eps^|K| N / 2",
            params(&[("alpha", text("prop")), ("eps", text("1/20"))]),
            row,
        );
    }
    if improved_admissible(ctx.set()) {
        let row = verify_full_proposition(ctx.set()).map(|r| {
            Row::judged(r.holds)
                .with("basis", list(&r.basis.to_vec()))
                .with("radius", num(r.radius))
                .with("bohr_size", int(r.bohr.len() as u64))
                .with("inside_first", Value::Bool(r.inside_first))
                .with("inside_difference", Value::Bool(r.inside_difference))
                .with("basis_bound", num(r.basis_bound))
                .with("chang_frequency_bound", num(r.chang_frequency_bound))
                .with("chang_radius", num(r.chang_radius))
        });
        ctx.add(
            "verify_full_proposition",
            "B(Lambda*, 1/(2^8 log(1/delta))) inside B_1 and inside 2A - 2A",
            params(&[("alpha", text("prop"))]),
            row,
        );
    }
}

fn main_checks(ctx: &mut Ctx, spec: &SetSpectrum) {
    for expr in &ctx.cfg.alphas {
        let alpha = expr.eval(&ctx.set().density_exact());
        for &k in &ctx.cfg.ks {
            let mut p = alpha_params(expr, ctx.set());
            p.insert("k".into(), int(k));
            let row = alpha
                .clone()
                .and_then(|a| verify_main_theorem_with(spec, &a, k))
                .map(|r| Row::energy(&r));
            ctx.add("verify_main_theorem", "T_k(R_alpha \\ {0}) >= delta alpha^2k |B|^2k / (2^4k delta^2k)", p, row);
        }
        // every window alpha' = alpha 2^j with alpha' <= delta
        let windows = match &alpha {
            Ok(a) => (0..64)
                .map(|j| (j, a.times_power_of_two(j)))
                .take_while(|(_, w)| w.check_at_most_density(ctx.set()).is_ok())
                .map(|(j, w)| (j, Ok(w)))
                .collect(),
            Err(e) => vec![(0, Err(e.clone()))],
        };
        for &k in &ctx.cfg.level_ks {
            for (j, window) in &windows {
                let mut p = alpha_params(expr, ctx.set());
                p.insert("k".into(), int(k));
                p.insert("window".into(), int(*j));
                let row = window
                    .clone()
                    .and_then(|a| verify_level_lemma_with(spec, &a, k, &LevelSubset::Whole))
                    .map(|r| Row::energy(&r));
                ctx.add(
                    "verify_level_lemma",
                    "T_k(B') lower bound on the dyadic window R'_(alpha 2^window) \\ {0}",
                    p,
                    row,
                );
            }
        }
    }
}

fn matrix_checks(ctx: &mut Ctx, spec: &SetSpectrum) {
    for expr in &ctx.cfg.alphas {
        let alpha = expr.eval(&ctx.set().density_exact());
        for &k in &ctx.cfg.ks {
            for &d in &ctx.cfg.ds {
                let mut p = alpha_params(expr, ctx.set());
                p.insert("k".into(), int(k));
                p.insert("d".into(), int(d));
                let row = alpha
                    .clone()
                    .and_then(|a| verify_matrix_theorem_with(spec, &a, k, d))
                    .map(|r| Row::energy(&r));
                ctx.add(
                    "verify_matrix_theorem",
                    "S_kd(R_alpha \\ {0}) >= (delta alpha^2k |B|^2k / (2^4k delta^2k))^(2^d)",
                    p.clone(),
                    row,
                );
                let row = alpha
                    .clone()
                    .and_then(|a| verify_matrix_level_lemma(ctx.set(), &a, k, d))
                    .map(|r| Row::energy(&r));
                ctx.add(
                    "verify_matrix_level_lemma",
                    "S_kd(B') >= (delta alpha'^2k |B'|^2k / (2^2k delta^2k))^(2^d)",
                    p,
                    row,
                );
            }
        }
    }
}

fn fourier_checks(ctx: &mut Ctx) {
    let g = ctx.set().group();
    let mut rng = ctx.rng();
    let indicator = ComplexSignal::indicator(ctx.set());
    let f = ComplexSignal::random(g, &mut rng);
    let h = ComplexSignal::random_real(g, &mut rng);
    let u = rng.gen_range(0..g.modulus());
    ctx.add("parseval_check", "sum |f^(r)|^2 = N sum |f(x)|^2", params(&[("signal", text("random"))]), Ok(Row::verdict(&parseval_check(&f))));
    ctx.add("inversion_check", "f = inverse(dft(f))", params(&[("signal", text("random"))]), Ok(Row::verdict(&inversion_check(&f))));
    let rep = char_function_identity_check(&indicator);
    ctx.add(
        "char_function_identity_check",
        "f^(u) = (1/N) sum_r f^(r) conj f^(r-u) for an indicator",
        params(&[("signal", text("indicator"))]),
        Ok(Row::verdict(&rep.verdict).with("worst_u", int(rep.worst_u))),
    );
    ctx.add(
        "convolution_identity_check",
        "(f*g)^ = f^ conj g^ for real g",
        params(&[("signal", text("random, real g"))]),
        convolution_identity_check(&f, &h).map(|v| Row::verdict(&v)),
    );
    ctx.add(
        "cross_correlation_identity_check",
        "cross-correlation identity at a random shift",
        params(&[("signal", text("random")), ("u", int(u))]),
        cross_correlation_identity_check(&f, &h, u).map(|v| Row::verdict(&v)),
    );
}

fn run_instance(cfg: &ExperimentConfig, inst: &Instance) -> Vec<Record> {
    let start = Instant::now();
    let mut ctx = Ctx { cfg, inst, records: Vec::new() };
    let spec = SetSpectrum::new(&inst.set);
    match cfg.command {
        Command::Spectrum => spectrum_checks(&mut ctx, &spec),
        Command::Energy => energy_checks(&mut ctx),
        Command::Systems => systems_checks(&mut ctx),
        Command::Gowers => gowers_checks(&mut ctx, &ComplexSignal::indicator(&inst.set), "indicator"),
        Command::Chang => chang_checks(&mut ctx, &spec),
        Command::Improved => improved_checks(&mut ctx, &spec),
        Command::Bohr => bohr_checks(&mut ctx, &spec),
        Command::VerifyMain => main_checks(&mut ctx, &spec),
        Command::VerifyMatrix => matrix_checks(&mut ctx, &spec),
        Command::VerifyAll => {
            fourier_checks(&mut ctx);
            spectrum_checks(&mut ctx, &spec);
            main_checks(&mut ctx, &spec);
            matrix_checks(&mut ctx, &spec);
            gowers_checks(&mut ctx, &ComplexSignal::indicator(&inst.set), "indicator");
            chang_checks(&mut ctx, &spec);
            if improved_admissible(&inst.set) {
                improved_checks(&mut ctx, &spec);
            }
            bohr_checks(&mut ctx, &spec);
        }
    }
    let elapsed = start.elapsed();
    if elapsed > cfg.timeout {
        let secs = elapsed.as_secs_f64();
        ctx.add(
            "time_budget",
            "instance finished within the per-instance time budget",
            params(&[("timeout_secs", num(cfg.timeout.as_secs_f64()))]),
            Err(Error::Budget { what: "instance time", needed: secs, limit: cfg.timeout.as_secs_f64() }),
        );
    }
    ctx.records
}

fn now() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0)
}

/// Runs every instance in parallel and assembles the sorted report.
pub fn run(cfg: &ExperimentConfig) -> Result<RunReport> {
    cfg.validate()?;
    let insts = instances(cfg)?;
    let records: Vec<Record> = insts.par_iter().flat_map_iter(|inst| run_instance(cfg, inst)).collect();
    let provenance = Provenance {
        command: cfg.command.name().to_string(),
        seed: cfg.seed,
        version: env!("CARGO_PKG_VERSION").to_string(),
        rng: RNG_NAME.to_string(),
        timestamp: now(),
    };
    Ok(RunReport::new(provenance, records))
}

/// Parses `5..11`, `5..=11` (both inclusive) or `25,35,49`.
pub fn parse_moduli(text: &str) -> Result<Vec<u64>> {
    let bad = || Error::Input(format!("expected a range a..b or a list, got {text:?}"));
    let t = text.trim();
    if let Some((a, b)) = t.split_once("..") {
        let b = b.strip_prefix('=').unwrap_or(b);
        let a: u64 = a.trim().parse().map_err(|_| bad())?;
        let b: u64 = b.trim().parse().map_err(|_| bad())?;
        return Ok((a..=b).collect());
    }
    t.split(',').map(|x| x.trim().parse().map_err(|_| bad())).collect()
}

pub fn parse_list<T: std::str::FromStr>(what: &str, text: &str) -> Result<Vec<T>> {
    text.split(',')
        .map(str::trim)
        .filter(|x| !x.is_empty())
        .map(|x| x.parse().map_err(|_| Error::Input(format!("bad {what} value {x:?}"))))
        .collect()
}

pub fn budget_from(value: f64) -> Result<u64> {
    if value >= 1.0 && value.is_finite() {
        Ok(value as u64)
    } else {
        Err(Error::Input(format!("budget {value} must be at least 1")))
    }
}
