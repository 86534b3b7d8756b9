use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use clap::{Args, Subcommand, ValueEnum};
use rayon::prelude::*;

use divchain::certify::{
    certify_analytic_scaled, enclose_constant_c_sieved, grid_check, Certificate, GridId, GridReport, GridSpec,
    Verdict, DEFAULT_C_CUTOFF, DEFAULT_MAX_DEPTH,
};
use divchain::chains::{transitions_down, ChainContext};
use divchain::hitting::{
    bound_1196, cut_capacity, erdos_sum, flow_divergence, hitting_down, hitting_up, lym_masses, mass_1196,
};
use divchain::kernels::{zeta, TruncatedLambda};
use divchain::primitive::{generate_layer, is_primitive, parse_set, peel_layers, random_antichain};
use divchain::stochastic::{
    chain_density_stats, estimate_hit, msrw_exponent, msrw_transitions, sample_down, sample_up,
    zeta_process_hitting, ZetaProcessConfig, ZetaSampler,
};
use divchain::weights::{WeightEvaluator, DEFAULT_QUAD_TOL};
use divchain::{
    ChainId, Error, FactorTable, KernelConfig, MassVector, PrimeSet, PrimitiveSet, Target, TransitionList, WeightId,
};

use crate::output::{emit_table, emit_text, Cell, Table};
use crate::{Cli, Command, Failure, Unverified};

type Outcome = std::result::Result<(), Failure>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ChainName {
    #[value(name = "random_prime")]
    RandomPrime,
    #[value(name = "mertens")]
    Mertens,
    #[value(name = "von_mangoldt")]
    VonMangoldt,
    #[value(name = "eps_modified")]
    EpsModified,
    #[value(name = "odd_banks_martin")]
    OddBanksMartin,
}

#[derive(Args, Debug, Clone)]
pub struct ChainSel {
    #[arg(long, value_enum)]
    chain: ChainName,
    /// Absorbing level Ω = k of odd_banks_martin.
    #[arg(long, default_value_t = 2)]
    k: u32,
    /// Odd primes of odd_banks_martin, comma separated, or `odd` for all of them.
    #[arg(long, default_value = "3,5,7")]
    primes: String,
}

impl ChainSel {
    fn get(&self) -> Result<ChainId, Error> {
        let c = match self.chain {
            ChainName::RandomPrime => ChainId::RandomPrime,
            ChainName::Mertens => ChainId::Mertens,
            ChainName::VonMangoldt => ChainId::VonMangoldt,
            ChainName::EpsModified => ChainId::EpsModified,
            ChainName::OddBanksMartin => ChainId::OddBanksMartin { k: self.k, primes: parse_primes(&self.primes)? },
        };
        c.validate()?;
        Ok(c)
    }
}

fn parse_primes(s: &str) -> Result<PrimeSet, Error> {
    if s.trim() == "odd" {
        return Ok(PrimeSet::AllOdd);
    }
    Ok(PrimeSet::finite(parse_list(s)?))
}

fn parse_list(s: &str) -> Result<Vec<u64>, Error> {
    s.split(',')
        .filter(|p| !p.trim().is_empty())
        .map(|p| p.trim().parse::<u64>().map_err(|_| Error::Parse(format!("bad integer {p:?} in list"))))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum WeightName {
    #[value(name = "nu0")]
    Nu0,
    #[value(name = "nu_mertens")]
    NuMertens,
    #[value(name = "nu_lambda")]
    NuLambda,
    #[value(name = "nu_shifted")]
    NuShifted,
}

#[derive(Args, Debug, Clone)]
pub struct WeightSel {
    #[arg(long, value_enum)]
    weight: Option<WeightName>,
    /// Prime shift of nu_shifted.
    #[arg(long, default_value_t = 2)]
    p: u64,
    /// Absolute accuracy of nu_lambda.
    #[arg(long, default_value_t = DEFAULT_QUAD_TOL)]
    quad_tol: f64,
}

impl WeightSel {
    fn get(&self) -> Result<WeightId, Error> {
        let w = match self.weight {
            None => return Err(Error::Domain("--weight is required".into())),
            Some(WeightName::Nu0) => WeightId::Nu0,
            Some(WeightName::NuMertens) => WeightId::NuMertens,
            Some(WeightName::NuLambda) => WeightId::NuLambda { quad_tol: self.quad_tol },
            Some(WeightName::NuShifted) => WeightId::NuShifted { p: self.p },
        };
        w.validate()?;
        Ok(w)
    }
}

#[derive(Args, Debug)]
pub struct SieveArgs {
    #[arg(long, default_value_t = 2)]
    from: u64,
    #[arg(long)]
    to: u64,
}

#[derive(Args, Debug)]
pub struct WeightCmd {
    #[command(flatten)]
    weight: WeightSel,
    #[arg(long)]
    from: Option<u64>,
    #[arg(long)]
    to: u64,
}

#[derive(Args, Debug)]
pub struct ChainCmd {
    #[command(flatten)]
    chain: ChainSel,
    #[command(flatten)]
    weight: WeightSel,
    #[arg(long)]
    n: u64,
    /// Print the adjoint upward chain of (chain, weight) instead.
    #[arg(long)]
    up: bool,
    /// Parent truncation for upward rows.
    #[arg(long, default_value_t = 10_000)]
    trunc_q: u64,
}

#[derive(Args, Debug)]
pub struct SubinvArgs {
    #[command(flatten)]
    chain: ChainSel,
    #[command(flatten)]
    weight: WeightSel,
    #[arg(long, default_value_t = 1)]
    from: u64,
    #[arg(long)]
    to: u64,
    #[arg(long, default_value_t = 10_000)]
    trunc_q: u64,
}

#[derive(Args, Debug)]
pub struct HitdownArgs {
    #[command(flatten)]
    chain: ChainSel,
    /// Start state; all mass starts here.
    #[arg(long)]
    n0: u64,
}

#[derive(Args, Debug)]
pub struct HitupArgs {
    #[command(flatten)]
    chain: ChainSel,
    #[command(flatten)]
    weight: WeightSel,
    /// Truncation X of the upward state space.
    #[arg(long)]
    limit: u64,
    /// State carrying the unit initial mass.
    #[arg(long, default_value_t = 1)]
    source: u64,
}

#[derive(Args, Debug)]
pub struct RangeXArgs {
    #[arg(long)]
    x: u64,
    #[arg(long = "X")]
    big_x: u64,
}

#[derive(Args, Debug)]
pub struct LymArgs {
    /// Squarefree start state.
    #[arg(long)]
    n0: u64,
}

#[derive(Args, Debug)]
pub struct CutArgs {
    #[command(flatten)]
    chain: ChainSel,
    #[command(flatten)]
    weight: WeightSel,
    /// S is every non-absorbing state in [s_from, s_to].
    #[arg(long)]
    s_from: u64,
    #[arg(long)]
    s_to: u64,
    /// Primitive set A, newline-delimited integers.
    #[arg(long)]
    input: PathBuf,
}

#[derive(Args, Debug)]
pub struct FlowdivArgs {
    #[arg(long, default_value_t = 2)]
    from: u64,
    #[arg(long)]
    to: u64,
    #[arg(long, default_value_t = 100_000)]
    trunc_q: u64,
}

#[derive(Args, Debug)]
pub struct PrimCmd {
    #[command(subcommand)]
    action: PrimAction,
}

#[derive(Subcommand, Debug)]
pub enum PrimAction {
    /// A layer {n ≤ X : Ω(n) = k}, or a seeded random antichain of [2, X].
    Generate {
        #[arg(long)]
        x: u64,
        #[arg(long, conflicts_with = "density")]
        layer: Option<u32>,
        #[arg(long)]
        density: Option<f64>,
        /// Restrict the layer to these primes (comma separated).
        #[arg(long)]
        primes: Option<String>,
    },
    /// Check primitivity and report the Erdős sum.
    Validate {
        #[arg(long)]
        input: PathBuf,
    },
    /// Split a set into primitive layers.
    Peel {
        #[arg(long)]
        input: PathBuf,
    },
}

#[derive(Args, Debug)]
pub struct SimulateCmd {
    #[command(subcommand)]
    action: SimAction,
}

#[derive(Subcommand, Debug)]
pub enum SimAction {
    /// Downward paths: one sampled path, or hit frequencies of a target set.
    Down {
        #[command(flatten)]
        chain: ChainSel,
        #[arg(long)]
        n0: u64,
        /// Comma-separated targets; without them one path is printed.
        #[arg(long)]
        targets: Option<String>,
        #[arg(long, default_value_t = 100_000)]
        trials: u64,
    },
    /// One upward path of the adjoint chain.
    Up {
        #[command(flatten)]
        chain: ChainSel,
        #[command(flatten)]
        weight: WeightSel,
        #[arg(long, default_value_t = 1)]
        n0: u64,
        #[arg(long, default_value_t = 100_000)]
        cap: u64,
        #[arg(long, default_value_t = 1000)]
        steps: usize,
        #[arg(long, default_value_t = 1000)]
        trunc_q: u64,
    },
    /// Zeta-process draws: a histogram, or the path hitting frequency of `n`.
    Zeta {
        #[arg(long)]
        n: Option<u64>,
        #[arg(long, default_value_t = 1_000_000)]
        trials: u64,
        #[arg(long, default_value_t = 2.0)]
        s: f64,
        #[arg(long, default_value_t = 10_000)]
        p_max: u64,
        /// Largest value reported in the histogram.
        #[arg(long, default_value_t = 10)]
        max_n: u64,
    },
    /// Multiplier law of the multiplicative simple random walk.
    Msrw {
        #[arg(long)]
        x: u64,
        /// Exponent (defaults to 1 − 1/(10 log x)).
        #[arg(long)]
        s: Option<f64>,
    },
    /// Density statistics of upward von Mangoldt paths.
    Density {
        /// Comma-separated thresholds.
        #[arg(long)]
        x_list: String,
        #[arg(long, default_value_t = 10_000)]
        trials: u64,
        /// Set A (newline-delimited); all integers when absent.
        #[arg(long)]
        input: Option<PathBuf>,
    },
}

#[derive(Args, Debug)]
pub struct CertifyCmd {
    #[command(subcommand)]
    action: CertifyAction,
}

#[derive(Subcommand, Debug)]
pub enum CertifyAction {
    /// Bisection certificate of the analytic inequality on [0, 1/log 3].
    Analytic {
        #[arg(long, default_value_t = DEFAULT_MAX_DEPTH)]
        max_depth: u32,
        #[arg(long, default_value_t = DEFAULT_C_CUTOFF)]
        p_cut: u64,
        /// Multiply the right-hand side (mutation testing).
        #[arg(long, default_value_t = 1.0)]
        rhs_scale: f64,
    },
    /// Interval enclosure of C = Σ_{p > 7} log p/((p − 1)(p − 2)).
    #[command(name = "constant-c", alias = "constantC")]
    ConstantC {
        #[arg(long, default_value_t = DEFAULT_C_CUTOFF)]
        p_cut: u64,
    },
    /// Floating-point grid check of one inequality.
    Grid {
        /// phi_ineq, eta_monotone, sharp, sharp2, om2 or analytic.
        #[arg(long)]
        id: String,
        /// lo:hi:points (defaults to the figure range).
        #[arg(long)]
        grid: Option<String>,
    },
    /// Re-evaluate a stored certificate.
    Replay {
        #[arg(long)]
        input: PathBuf,
    },
}

#[derive(Args, Debug)]
pub struct FigureArgs {
    /// phi, eta, mangoldt, mangoldt2, primesum2 or primesum3.
    name: String,
    /// lo:hi:points (defaults to the figure range).
    #[arg(long)]
    grid: Option<String>,
}

fn table_for(limit: u64) -> Result<FactorTable, Error> {
    FactorTable::new(limit.max(1000))
}

fn read_set(path: &Path) -> std::result::Result<Vec<u64>, Failure> {
    Ok(parse_set(&std::fs::read_to_string(path)?)?)
}

fn target_cell(t: Target) -> Cell {
    match t {
        Target::State(m) => Cell::Int(m),
        Target::Infinity => Cell::Text("inf".into()),
    }
}

fn transitions_table(list: &TransitionList) -> Table {
    let mut tab = Table::new(["source", "target", "prob"]);
    for e in &list.entries {
        tab.push(vec![list.source.into(), target_cell(e.target), e.prob.into()]);
    }
    tab
}

fn masses_table(h: &MassVector, name: &str) -> Table {
    let mut tab = Table::new(["n", name]);
    for (n, v) in h.nonzero() {
        tab.push(vec![n.into(), v.into()]);
    }
    tab
}

/// Whether `n` lies in the state space of `(c, w)`, including the p-rough
/// restriction of the von Mangoldt chain under a shifted weight.
fn in_pair_space(c: &ChainId, w: &WeightId, n: u64, t: &FactorTable) -> Result<bool, Error> {
    if n < w.min_n() || !c.in_state_space(n, t)? {
        return Ok(false);
    }
    match (c, w) {
        (ChainId::VonMangoldt, WeightId::NuShifted { p }) if n > 1 => Ok(t.spf(n)? >= *p),
        _ => Ok(true),
    }
}

fn grid_table(r: &GridReport) -> Table {
    let mut tab = Table::new(r.columns.iter().copied());
    for row in &r.rows {
        tab.push(row.iter().map(|&v| Cell::Float(v)).collect());
    }
    tab
}

fn run_grid(cli: &Cli, id: GridId, grid: Option<&str>) -> Outcome {
    let spec: GridSpec = match grid {
        Some(g) => g.parse()?,
        None => id.default_grid(),
    };
    let t = FactorTable::new(divchain::certify::GRID_TRUNCATION)?;
    let r = grid_check(id, &spec, &t, &KernelConfig::default())?;
    emit_table(cli.global.out.as_deref(), &grid_table(&r), cli.global.style())?;
    eprintln!("{id}: {} points, max violation {:e}, {} violations", r.rows.len(), r.max_violation, r.violations);
    if !r.ok() {
        return Err(Unverified(format!("{id} has {} grid violations", r.violations)).into());
    }
    Ok(())
}

pub fn run(cli: &Cli) -> Outcome {
    let out = cli.global.out.as_deref();
    let style = cli.global.style();
    let seed = cli.global.seed;
    let kernels = KernelConfig::default();
    let table = match &cli.command {
        Command::Sieve(a) => {
            if a.from < 2 || a.from > a.to {
                return Err(Error::Domain("sieve range needs 2 <= from <= to".into()).into());
            }
            let t = FactorTable::new(a.to)?;
            let mut tab = Table::new(["n", "spf", "big_omega", "small_omega", "lambda"]);
            for n in a.from..=a.to {
                let f = t.factor_stats(n)?;
                tab.push(vec![n.into(), t.spf(n)?.into(), f.big_omega.into(), f.small_omega.into(), t.lambda(n)?.into()]);
            }
            tab
        }
        Command::Weight(a) => {
            let w = a.weight.get()?;
            let from = a.from.unwrap_or(w.min_n());
            if from < w.min_n() || from > a.to {
                return Err(Error::Domain(format!("weight range needs {} <= from <= to", w.min_n())).into());
            }
            let t = table_for(a.to)?;
            let ev = WeightEvaluator::new(&t, kernels)?;
            let rows: Vec<Vec<Cell>> = (from..=a.to)
                .into_par_iter()
                .map(|n| {
                    let b = ev.eval_bounded(&w, n)?;
                    Ok(vec![n.into(), b.value.into(), b.error.into()])
                })
                .collect::<Result<_, Error>>()?;
            Table { columns: vec!["n".into(), w.name(), "error".into()], rows }
        }
        Command::Chain(a) => {
            let c = a.chain.get()?;
            let t = table_for(a.n.max(a.trunc_q))?;
            let list = if a.up {
                let w = a.weight.get()?;
                ChainContext::new(&t, kernels, a.trunc_q)?.adjoint(&c, &w, a.n)?
            } else {
                transitions_down(&c, a.n, &t)?
            };
            transitions_table(&list)
        }
        Command::Subinv(a) => {
            let c = a.chain.get()?;
            let w = a.weight.get()?;
            let t = table_for(a.to.max(a.trunc_q))?;
            let ctx = ChainContext::new(&t, kernels, a.trunc_q)?;
            let mut states = Vec::new();
            for n in a.from..=a.to {
                if in_pair_space(&c, &w, n, &t)? {
                    states.push(n);
                }
            }
            let reports: Vec<_> = states.par_iter().map(|&n| ctx.margin(&c, &w, n)).collect::<Result<_, Error>>()?;
            let mut tab = Table::new(["n", "lower", "upper", "truncation_q"]);
            let mut violated = 0;
            for r in &reports {
                if r.upper < -1e-9 {
                    violated += 1;
                }
                tab.push(vec![r.n.into(), r.lower.into(), r.upper.into(), r.truncation_q.into()]);
            }
            emit_table(out, &tab, style)?;
            if violated > 0 {
                return Err(Unverified(format!("{violated} states violate sub-invariance")).into());
            }
            return Ok(());
        }
        Command::Hitdown(a) => {
            let c = a.chain.get()?;
            let t = table_for(a.n0)?;
            let h = hitting_down(&c, &MassVector::unit(a.n0, a.n0)?, &t)?;
            masses_table(&h, "h")
        }
        Command::Hitup(a) => {
            let c = a.chain.get()?;
            let w = a.weight.get()?;
            let t = table_for(a.limit)?;
            let ev = WeightEvaluator::new(&t, kernels)?;
            let h = hitting_up(&c, &w, &MassVector::unit(a.source, a.limit)?, &ev)?;
            masses_table(&h, "h")
        }
        Command::Mass1196(a) => {
            let t = table_for(a.big_x)?;
            masses_table(&mass_1196(a.x, a.big_x, &t)?, "b")
        }
        Command::Bound1196(a) => {
            let t = table_for(a.big_x)?;
            let b = bound_1196(a.x, a.big_x, &t)?;
            let threshold = 1.0 + 10.0 / (a.x as f64).ln();
            let mut tab = Table::new(["x", "X", "bound", "threshold"]);
            tab.push(vec![a.x.into(), a.big_x.into(), b.into(), threshold.into()]);
            tab
        }
        Command::Lym(a) => {
            let t = table_for(a.n0)?;
            let h = lym_masses(a.n0, &t)?;
            let mut tab = Table::new(["n", "big_omega", "h", "h_float"]);
            for (n, r) in h {
                let v = *r.numer() as f64 / *r.denom() as f64;
                tab.push(vec![n.into(), t.big_omega(n)?.into(), r.to_string().into(), v.into()]);
            }
            tab
        }
        Command::Cut(a) => {
            let c = a.chain.get()?;
            let w = a.weight.get()?;
            let set = PrimitiveSet::new(read_set(&a.input)?)?;
            let t = table_for(a.s_to.max(set.max().unwrap_or(0)))?;
            let ev = WeightEvaluator::new(&t, kernels)?;
            let mut s = BTreeSet::new();
            for n in a.s_from..=a.s_to {
                if in_pair_space(&c, &w, n, &t)? && !c.is_absorbing(n, &t)? {
                    s.insert(n);
                }
            }
            let (lhs, rhs) = cut_capacity(&c, &w, &s, &set, &ev)?;
            let holds = lhs <= rhs + 1e-10;
            let mut tab = Table::new(["lhs", "rhs", "holds"]);
            tab.push(vec![lhs.into(), rhs.into(), holds.into()]);
            emit_table(out, &tab, style)?;
            if !holds {
                return Err(Unverified(format!("cut capacity fails: {lhs} > {rhs}")).into());
            }
            return Ok(());
        }
        Command::Flowdiv(a) => {
            let t = table_for(a.to.max(a.trunc_q))?;
            let lam = TruncatedLambda::new(a.trunc_q, &t)?;
            let mut tab = Table::new(["n", "inflow_lower", "inflow_upper", "outflow"]);
            for n in a.from..=a.to {
                let f = flow_divergence(n, &lam, &t)?;
                tab.push(vec![n.into(), f.inflow_lower.into(), f.inflow_upper.into(), f.outflow.into()]);
            }
            tab
        }
        Command::Prim(p) => return run_prim(cli, &p.action),
        Command::Simulate(s) => return run_simulate(cli, &s.action, seed),
        Command::Certify(c) => return run_certify(cli, &c.action),
        Command::Figure(f) => return run_grid(cli, GridId::from_figure(&f.name)?, f.grid.as_deref()),
    };
    emit_table(out, &table, style)?;
    Ok(())
}

fn run_prim(cli: &Cli, action: &PrimAction) -> Outcome {
    let out = cli.global.out.as_deref();
    let style = cli.global.style();
    match action {
        PrimAction::Generate { x, layer, density, primes } => {
            let set = match (layer, density) {
                (Some(k), None) => {
                    let t = table_for(*x)?;
                    let q: Option<BTreeSet<u64>> = primes.as_deref().map(parse_list).transpose()?.map(BTreeSet::from_iter);
                    generate_layer(*k, *x, q.as_ref(), &t)?
                }
                (None, Some(d)) => random_antichain(*x, *d, cli.global.seed)?,
                _ => return Err(Error::Domain("give exactly one of --layer or --density".into()).into()),
            };
            let mut tab = Table::new(["n"]);
            for n in set.iter() {
                tab.push(vec![n.into()]);
            }
            emit_table(out, &tab, style)?;
        }
        PrimAction::Validate { input } => {
            let a = read_set(input)?;
            let ok = is_primitive(&a)?;
            let limit = a.iter().copied().max().unwrap_or(2);
            let t = table_for(limit)?;
            let ev = WeightEvaluator::new(&t, KernelConfig::default())?;
            let f = erdos_sum(&a, &WeightId::Nu0, &ev)?;
            let mut tab = Table::new(["size", "primitive", "erdos_sum"]);
            tab.push(vec![a.len().into(), ok.into(), f.into()]);
            emit_table(out, &tab, style)?;
            if !ok {
                return Err(Unverified("set is not primitive".into()).into());
            }
        }
        PrimAction::Peel { input } => {
            let layers = peel_layers(&read_set(input)?)?;
            let mut tab = Table::new(["layer", "n"]);
            for (i, l) in layers.iter().enumerate() {
                for n in l.iter() {
                    tab.push(vec![(i + 1).into(), n.into()]);
                }
            }
            emit_table(out, &tab, style)?;
        }
    }
    Ok(())
}

fn run_simulate(cli: &Cli, action: &SimAction, seed: u64) -> Outcome {
    let out = cli.global.out.as_deref();
    let style = cli.global.style();
    let kernels = KernelConfig::default();
    let tab = match action {
        SimAction::Down { chain, n0, targets, trials } => {
            let c = chain.get()?;
            let t = table_for(*n0)?;
            match targets {
                None => {
                    let path = sample_down(&c, *n0, seed, &t)?;
                    let mut tab = Table::new(["step", "n"]);
                    for (i, &n) in path.states.iter().enumerate() {
                        tab.push(vec![i.into(), n.into()]);
                    }
                    tab
                }
                Some(list) => {
                    let set: BTreeSet<u64> = parse_list(list)?.into_iter().collect();
                    let e = estimate_hit(&c, *n0, &set, *trials, seed, &t)?;
                    let mut tab = Table::new(["hits", "trials", "p_hat", "stderr"]);
                    tab.push(vec![e.hits.into(), e.trials.into(), e.p_hat.into(), e.stderr.into()]);
                    tab
                }
            }
        }
        SimAction::Up { chain, weight, n0, cap, steps, trunc_q } => {
            let c = chain.get()?;
            let w = weight.get()?;
            let t = table_for((*cap).max(*trunc_q))?;
            let ctx = ChainContext::new(&t, kernels, *trunc_q)?;
            let path = sample_up(&ctx, &c, &w, *n0, *cap, *steps, seed)?;
            let mut tab = Table::new(["step", "n", "escaped"]);
            for (i, &n) in path.states.iter().enumerate() {
                tab.push(vec![i.into(), n.into(), path.escaped.into()]);
            }
            tab
        }
        SimAction::Zeta { n, trials, s, p_max, max_n } => {
            let cfg = ZetaProcessConfig { s: *s, p_max: *p_max };
            match n {
                Some(n) => {
                    let t = table_for(*n)?;
                    let e = zeta_process_hitting(*n, &cfg, *trials, seed, &t, &kernels)?;
                    let mut tab = Table::new(["n", "hits", "trials", "freq", "stderr", "bias_bound"]);
                    tab.push(vec![(*n).into(), e.hits.into(), e.trials.into(), e.freq.into(), e.stderr.into(), e.bias_bound.into()]);
                    tab
                }
                None => {
                    let sampler = ZetaSampler::new(cfg)?;
                    let h = sampler.histogram(*max_n, *trials, seed)?;
                    let z = zeta(*s, &kernels)?;
                    let mut tab = Table::new(["n", "count", "freq", "zeta_law", "bias_bound"]);
                    for (i, &k) in h.iter().enumerate().skip(1) {
                        let law = 1.0 / (z * (i as f64).powf(*s));
                        tab.push(vec![i.into(), k.into(), (k as f64 / *trials as f64).into(), law.into(), cfg.bias_bound().into()]);
                    }
                    tab
                }
            }
        }
        SimAction::Msrw { x, s } => {
            let t = table_for(*x)?;
            let law = msrw_transitions(*x, s.unwrap_or_else(|| msrw_exponent(*x)), &t)?;
            let mut tab = Table::new(["q", "prob"]);
            for e in &law.law.entries {
                tab.push(vec![target_cell(e.target), e.prob.into()]);
            }
            tab
        }
        SimAction::Density { x_list, trials, input } => {
            let xs = parse_list(x_list)?;
            let trunc = xs.iter().copied().max().ok_or_else(|| Error::Domain("empty threshold list".into()))?;
            let t = table_for(trunc)?;
            let ev = WeightEvaluator::new(&t, kernels)?;
            let stats = match input {
                Some(p) => {
                    let a: BTreeSet<u64> = read_set(p)?.into_iter().collect();
                    chain_density_stats(|n| a.contains(&n), &xs, *trials, trunc, seed, &ev)?
                }
                None => chain_density_stats(|_| true, &xs, *trials, trunc, seed, &ev)?,
            };
            let mut tab = Table::new(["x", "mean", "second_moment", "stderr", "trials"]);
            for i in 0..xs.len() {
                tab.push(vec![
                    stats.x_list[i].into(),
                    stats.mean[i].into(),
                    stats.second_moment[i].into(),
                    stats.stderr[i].into(),
                    stats.trials.into(),
                ]);
            }
            tab
        }
    };
    emit_table(out, &tab, style)?;
    Ok(())
}

fn run_certify(cli: &Cli, action: &CertifyAction) -> Outcome {
    let out = cli.global.out.as_deref();
    let style = cli.global.style();
    match action {
        CertifyAction::Analytic { max_depth, p_cut, rhs_scale } => {
            let c = enclose_constant_c_sieved(*p_cut)?;
            let cert = certify_analytic_scaled(*max_depth, &c, *rhs_scale)?;
            emit_text(out, &cert.to_text())?;
            eprintln!("analytic: {} leaves, verdict {}", cert.leaves.len(), cert.verdict);
            if cert.verdict != Verdict::Proved {
                return Err(Unverified(format!("certificate verdict is {}", cert.verdict)).into());
            }
        }
        CertifyAction::ConstantC { p_cut } => {
            let c = enclose_constant_c_sieved(*p_cut)?;
            let mut tab = Table::new(["p_cut", "lo", "hi", "width"]);
            tab.push(vec![(*p_cut).into(), c.lo.into(), c.hi.into(), c.width().into()]);
            emit_table(out, &tab, style)?;
        }
        CertifyAction::Grid { id, grid } => return run_grid(cli, id.parse()?, grid.as_deref()),
        CertifyAction::Replay { input } => {
            let cert = Certificate::parse(&std::fs::read_to_string(input)?)?;
            let r = cert.replay()?;
            let mut tab = Table::new(["leaves", "mismatches", "covers", "verdict"]);
            tab.push(vec![cert.leaves.len().into(), r.mismatches.len().into(), r.covers.into(), r.verdict.as_str().into()]);
            emit_table(out, &tab, style)?;
            if !r.ok() || r.verdict != Verdict::Proved || cert.verdict != r.verdict {
                return Err(Unverified("certificate does not replay to proved".into()).into());
            }
        }
    }
    Ok(())
}
