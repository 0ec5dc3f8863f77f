//! The `solve`, `certify` and `diagnose` verbs.
//!
//! Files written to the output directory:
//!
//! | verb | files |
//! |------|-------|
//! | solve | `summary.csv`, `trace.json` (`failure.json` on blow-up) |
//! | certify | `certificate.json` |
//! | diagnose | `diagnose_<suite>.json`, plus `<suite>.csv` for phi, smoothing, sqrt and maxprinciple |
//!
//! `summary.csv` columns: `t, norm_u_p, norm_grad_d_p, weighted_u_q,
//! weighted_grad_y_q, sup_phi`.

use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use super::config::{parse_config, RunConfig};
use super::initial::gen_initial_data;
use super::report::{config_hash, fmt_num, JsonReport, SummaryTable};
use crate::certifier::certify;
use crate::diagnostics::{
    max_principle_check, phi_diagnostics, scaling_invariance_check, smoothing_rate_suite, sqrt_equivalence_check,
    PhiReport, SmoothingOptions,
};
use crate::domain::{Domain, Regime};
use crate::error::{Error, Result};
use crate::mild::{picard_solve, IterationTrace, MildProblem, Trajectory};
use crate::norms::{lp_norm, WeightedSupSpec};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Suite {
    Phi,
    Smoothing,
    Scaling,
    MaxPrinciple,
    Sqrt,
}

impl Suite {
    pub fn as_str(self) -> &'static str {
        match self {
            Suite::Phi => "phi",
            Suite::Smoothing => "smoothing",
            Suite::Scaling => "scaling",
            Suite::MaxPrinciple => "maxprinciple",
            Suite::Sqrt => "sqrt",
        }
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Suite> {
        Ok(match s {
            "phi" => Suite::Phi,
            "smoothing" => Suite::Smoothing,
            "scaling" => Suite::Scaling,
            "maxprinciple" => Suite::MaxPrinciple,
            "sqrt" => Suite::Sqrt,
            _ => return Err(Error::Config(format!("unknown suite {s}"))),
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verb {
    Solve,
    Certify,
    Diagnose(Suite),
}

#[derive(Clone, Debug, Default)]
pub struct RunOptions {
    /// Replaces `data.seed`.
    pub seed: Option<u64>,
    /// Replaces `output.dir`.
    pub out_dir: Option<PathBuf>,
}

#[derive(Clone, Debug, Default)]
pub struct RunOutcome {
    /// 0 success, 1 blow-up or runtime failure, 2 configuration error.
    pub code: i32,
    pub files: Vec<PathBuf>,
    /// Warnings and errors for stderr.
    pub messages: Vec<String>,
}

pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Config(_) | Error::Parse(_) | Error::Inadmissible(_) => 2,
        _ => 1,
    }
}

struct Ctx {
    config: RunConfig,
    hash: String,
    dir: PathBuf,
    files: Vec<PathBuf>,
}

impl Ctx {
    fn write(&mut self, name: &str, text: &str) -> Result<()> {
        fs::create_dir_all(&self.dir)?;
        let path = self.dir.join(name);
        fs::write(&path, text)?;
        self.files.push(path);
        Ok(())
    }
}

/// Runs one verb on config text. Never panics on bad input; failures are
/// reported through the exit code and messages.
pub fn run(verb: Verb, config_text: &str, options: &RunOptions) -> RunOutcome {
    let mut outcome = RunOutcome::default();
    let mut config = match parse_config(config_text) {
        Ok(c) => c,
        Err(e) => {
            outcome.code = exit_code(&e);
            outcome.messages.push(e.to_string());
            return outcome;
        }
    };
    if let Some(seed) = options.seed {
        config.data.seed = seed;
    }
    outcome.messages.extend(config.warnings().into_iter().map(|w| format!("warning: {w}")));
    let dir = options.out_dir.clone().unwrap_or_else(|| PathBuf::from(&config.output.dir));
    let mut ctx = Ctx { hash: config_hash(&config), config, dir, files: Vec::new() };
    let result = match verb {
        Verb::Solve => solve(&mut ctx),
        Verb::Certify => certify_verb(&mut ctx),
        Verb::Diagnose(s) => diagnose(&mut ctx, s),
    };
    if let Err(e) = result {
        outcome.code = exit_code(&e);
        if let Error::BlowUp { node, time, what } = &e {
            let mut r = JsonReport::new("failure", &ctx.hash);
            r.int("node", *node as i64).num("time", *time).str("what", what);
            if let Err(io) = ctx.write("failure.json", &r.to_json()) {
                outcome.messages.push(io.to_string());
            }
        }
        outcome.messages.push(e.to_string());
    }
    outcome.files = ctx.files;
    outcome
}

fn problem_for(config: &RunConfig) -> Result<MildProblem> {
    let (a, b) = gen_initial_data(config, config.data.seed)?;
    let e = (a.domain().regime() == Regime::Dirichlet).then_some(config.data.e);
    MildProblem::new(&a, &b, e, config.time.horizon, config.time.nodes)
}

fn solve_config(config: &RunConfig) -> Result<(Trajectory, IterationTrace)> {
    picard_solve(&problem_for(config)?, &config.picard())
}

fn solve(ctx: &mut Ctx) -> Result<()> {
    let (traj, trace) = solve_config(&ctx.config)?;
    let phi = phi_diagnostics(&traj)?;
    let (p, q) = (ctx.config.exponents.p, ctx.config.exponents.q);
    let domain = traj.domain();
    let spec = WeightedSupSpec::new(p, q, domain.dim(), domain.omega())?;
    let mut table = SummaryTable::new(
        &ctx.hash,
        &["t", "norm_u_p", "norm_grad_d_p", "weighted_u_q", "weighted_grad_y_q", "sup_phi"],
    );
    for (s, sup_phi) in traj.states().iter().zip(&phi.sup_phi) {
        let g = s.grad_director();
        let w = if s.t == 0.0 && spec.exponent > 0.0 { 0.0 } else { spec.weight(s.t) };
        table.push_nums(&[
            s.t,
            lp_norm(&s.u, p)?,
            lp_norm(&g, p)?,
            w * lp_norm(&s.u, q)?,
            w * lp_norm(&g, q)?,
            *sup_phi,
        ]);
    }
    ctx.write("summary.csv", &table.to_csv())?;
    let mut r = JsonReport::new("trace", &ctx.hash);
    r.bool("converged", trace.converged)
        .int("iterations_used", trace.iterations_used as i64)
        .num("threshold", trace.threshold)
        .num("max_transport", trace.max_transport)
        .num("p", p)
        .num("q", q)
        .num("horizon", ctx.config.time.horizon)
        .int("nodes", ctx.config.time.nodes as i64)
        .int("seed", ctx.config.data.seed as i64)
        .str("director_bc", domain.director_bc().as_str())
        .nums("k_total", &trace.k.iter().map(|k| k.total()).collect::<Vec<_>>())
        .nums("k_u", &trace.k.iter().map(|k| k.k_u).collect::<Vec<_>>())
        .nums("k_grad_y", &trace.k.iter().map(|k| k.k_grad_y).collect::<Vec<_>>())
        .nums("k_y", &trace.k.iter().map(|k| k.k_y).collect::<Vec<_>>())
        .nums("k_x", &trace.k.iter().map(|k| k.k_x).collect::<Vec<_>>())
        .nums("delta_total", &trace.deltas.iter().map(|d| d.total()).collect::<Vec<_>>())
        .opt_nums("theta", &trace.ratios)
        .num("max_sup_phi", phi.max_sup_phi());
    ctx.write("trace.json", &r.to_json())?;
    Ok(())
}

fn certify_verb(ctx: &mut Ctx) -> Result<()> {
    let c = &ctx.config;
    let problem = problem_for(c)?;
    let rep = certify(&problem, c.exponents.p, c.exponents.q, c.certify_horizon(), c.certify.generic_c, c.certify.nodes)?;
    let k = &rep.constants;
    let mut r = JsonReport::new("certificate", &ctx.hash);
    // key names follow the published certificate schema
    r.num("p", rep.p)
        .num("q", rep.q)
        .int("n", rep.n as i64)
        .num("omega", rep.omega)
        .num("T", rep.horizon)
        .num("beta_1", k.beta_1)
        .num("beta_2", k.beta_2)
        .num("beta_3", k.beta_3)
        .num("C1", k.c1)
        .num("C2", k.c2)
        .num("C3", k.c3)
        .num("C_tilde", k.c_tilde)
        .num("k0_q", rep.k0_q)
        .num("k0_inf", rep.k0_inf)
        .num("K1", rep.k1)
        .num("K2", rep.k2)
        .num("K", rep.k)
        .num("kappa", rep.kappa)
        .num("b_sup", rep.b_sup)
        .num("generic_C", rep.generic_c)
        .num("lhs_conv22", rep.smallness_lhs)
        .num("lhs_remark32", rep.kappa_lhs)
        .num("breakeven_C", rep.breakeven_c)
        .bool("passes", rep.passes)
        .bool("passes_conv22", rep.passes)
        .bool("passes_remark32", rep.passes_kappa)
        .bool("outside_range", rep.outside_range)
        .str("note", "one generic_C is used for both smallness conditions");
    ctx.write("certificate.json", &r.to_json())
}

fn phi_table(hash: &str, phi: &PhiReport) -> SummaryTable {
    let mut t = SummaryTable::new(hash, &["t", "sup_phi", "sup_norm_drift", "energy_residual", "transport"]);
    for k in 0..phi.times.len() {
        t.push_nums(&[phi.times[k], phi.sup_phi[k], phi.sup_norm_drift[k], phi.energy_residual[k], phi.transport[k]]);
    }
    t
}

fn diagnose(ctx: &mut Ctx, suite: Suite) -> Result<()> {
    let c = ctx.config.clone();
    let seed = c.data.seed;
    let mut r = JsonReport::new(&format!("diagnose_{}", suite.as_str()), &ctx.hash);
    match suite {
        Suite::Phi => {
            let (traj, trace) = solve_config(&c)?;
            let mut phi = phi_diagnostics(&traj)?;
            r.bool("converged", trace.converged);
            if c.diagnostics.refine {
                let fine_cfg = c.refined(2)?;
                let (fine, _) = solve_config(&fine_cfg)?;
                let fine = phi_diagnostics(&fine)?;
                phi = phi.with_refinement(&fine);
                r.num("fine_max_sup_phi", fine.max_sup_phi())
                    .num("fine_max_norm_drift", fine.max_norm_drift())
                    .num("fine_max_residual", fine.max_residual());
            }
            r.num("max_sup_phi", phi.max_sup_phi())
                .num("max_norm_drift", phi.max_norm_drift())
                .num("max_residual", phi.max_residual())
                .num("max_transport", phi.max_transport())
                .num("drift_order", phi.drift_order.unwrap_or(f64::NAN));
            let table = phi_table(&ctx.hash, &phi);
            ctx.write("phi.csv", &table.to_csv())?;
        }
        Suite::Smoothing => {
            let base = c.build_domain()?;
            let n = c.diagnostics.smoothing_resolution;
            let domain = Domain::new(base.dim(), base.extent(), &vec![n; base.dim()], base.director_bc())?;
            let pairs: Vec<(f64, f64)> = c.diagnostics.smoothing_pairs.iter().map(|[p, q]| (*p, *q)).collect();
            let fits = smoothing_rate_suite(&domain, &pairs, &SmoothingOptions { seed, ..Default::default() })?;
            let mut t = SummaryTable::new(&ctx.hash, &["p", "q", "wrap", "slope", "predicted", "r2", "pass"]);
            for f in &fits {
                t.push(vec![
                    fmt_num(f.p),
                    fmt_num(f.q),
                    f.wrap.as_str().into(),
                    fmt_num(f.slope),
                    fmt_num(f.predicted),
                    fmt_num(f.r2),
                    (f.pass as u8).to_string(),
                ]);
            }
            ctx.write("smoothing.csv", &t.to_csv())?;
            r.int("resolution", n as i64)
                .bool("all_pass", fits.iter().all(|f| f.pass))
                .nums("slope", &fits.iter().map(|f| f.slope).collect::<Vec<_>>())
                .nums("predicted", &fits.iter().map(|f| f.predicted).collect::<Vec<_>>())
                .nums("r2", &fits.iter().map(|f| f.r2).collect::<Vec<_>>())
                .strs("wrap", &fits.iter().map(|f| f.wrap.as_str()).collect::<Vec<_>>());
        }
        Suite::Scaling => {
            let (a, b) = gen_initial_data(&c, seed)?;
            let s = scaling_invariance_check(&a, &b, c.time.horizon, c.time.nodes, &c.picard(), c.diagnostics.alpha)?;
            r.num("alpha", s.alpha)
                .num("deviation_u", s.deviation_u)
                .num("deviation_d", s.deviation_d)
                .num("max_deviation", s.max_deviation)
                .int("iterations_base", s.iterations_base as i64)
                .int("iterations_dilated", s.iterations_dilated as i64);
        }
        Suite::MaxPrinciple => {
            let domain = c.build_domain()?;
            let m = max_principle_check(&domain, c.diagnostics.batch, &c.diagnostics.max_principle_times, seed)?;
            let mut t = SummaryTable::new(&ctx.hash, &["t", "worst_ratio"]);
            for (t0, w) in m.times.iter().zip(&m.worst_per_time) {
                t.push_nums(&[*t0, *w]);
            }
            ctx.write("maxprinciple.csv", &t.to_csv())?;
            r.num("worst_ratio", m.worst_ratio)
                .int("batch_size", m.batch_size as i64)
                .bool("pass", m.worst_ratio <= 1.0 + 1e-12);
        }
        Suite::Sqrt => {
            let domain = c.build_domain()?;
            let b = sqrt_equivalence_check(&domain, &c.diagnostics.sqrt_p, c.diagnostics.batch, seed)?;
            let mut t = SummaryTable::new(&ctx.hash, &["p", "min_ratio", "max_ratio"]);
            for x in &b {
                t.push_nums(&[x.p, x.min_ratio, x.max_ratio]);
            }
            ctx.write("sqrt.csv", &t.to_csv())?;
            r.nums("p", &b.iter().map(|x| x.p).collect::<Vec<_>>())
                .nums("min_ratio", &b.iter().map(|x| x.min_ratio).collect::<Vec<_>>())
                .nums("max_ratio", &b.iter().map(|x| x.max_ratio).collect::<Vec<_>>());
        }
    }
    ctx.write(&format!("diagnose_{}.json", suite.as_str()), &r.to_json())
}

/// Output directory after the environment override `NEMATIC_OUT_DIR`.
pub fn resolve_out_dir(env_value: Option<&str>) -> Option<PathBuf> {
    env_value.filter(|s| !s.is_empty()).map(|s| Path::new(s).to_path_buf())
}
