//! `shorted`: shorts, parallel sums and short-type decompositions from JSON problem files.
//!
//! Exit status: 0 on success, 1 when `verify` finds a failing property, 2 on invalid input,
//! 3 on an internal inconsistency or a failed certificate check.

mod render;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Map, Value};

use shorted::charges::{self, Charge};
use shorted::forms::{self, PsdForm, LEBESGUE_AGREEMENT_RTOL};
use shorted::functionals;
use shorted::io::{self, float, AlgebraJson, ChargeJson, FunctionalJson, MatrixJson, SubspaceJson};
use shorted::linalg::{self, HermitianMatrix, Tolerance};
use shorted::operator;
use shorted::sample;
use shorted::verify::{self, Report, RunConfig};
use shorted::Error;

#[derive(Parser, Debug)]
#[command(name = "shorted", version, about = "Shorts of positive semidefinite forms and the short-type decomposition")]
struct Cli {
    /// Relative eigenvalue cutoff for kernels and ranks.
    #[arg(long, global = true, default_value_t = 1e-10)]
    tol_rank: f64,
    /// Absolute slack for identity checks.
    #[arg(long, global = true, default_value_t = 1e-9)]
    tol_residual: f64,
    #[arg(long, global = true, value_enum, default_value_t = Output::Json)]
    output: Output,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Output {
    Json,
    Text,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Short of the form T to a subspace: t_Y[x] = inf over y in Y of t[x - y].
    Short {
        #[arg(long)]
        t: PathBuf,
        #[arg(long)]
        subspace: PathBuf,
    },
    /// Parallel sum A : B.
    Parsum {
        #[arg(long)]
        a: PathBuf,
        #[arg(long)]
        b: PathBuf,
    },
    /// Closable part D_B A = lim A : (2^k B).
    Lebesgue {
        #[arg(long)]
        a: PathBuf,
        #[arg(long)]
        b: PathBuf,
    },
    /// A = ac + sing with ac absolutely continuous and sing singular with respect to B.
    Decompose {
        #[arg(long)]
        a: PathBuf,
        #[arg(long)]
        b: PathBuf,
    },
    /// Operator short J_A (I - P) J_A*, vanishing on M. With --range-in, the short whose
    /// range lies in M instead (computed as the short vanishing on the complement of M).
    KreinShort {
        #[arg(long)]
        a: PathBuf,
        #[arg(long)]
        subspace: PathBuf,
        #[arg(long)]
        range_in: bool,
    },
    /// nu = nu_ll + nu_perp relative to mu, for charges on the same finite ring.
    ChargeDecompose {
        #[arg(long)]
        nu: PathBuf,
        #[arg(long)]
        mu: PathBuf,
    },
    /// f = f_ll + f_perp relative to g, for positive functionals on a *-algebra.
    GnsDecompose {
        /// Algebra file, or a fixture selector {"fixture": ..., "param": ...}.
        #[arg(long)]
        algebra: PathBuf,
        #[arg(long)]
        f: PathBuf,
        #[arg(long)]
        g: PathBuf,
    },
    /// Run the property suite on seeded random instances and on instance files.
    Verify {
        #[arg(long, default_value_t = 42)]
        seed: u64,
        /// Random instances per family.
        #[arg(long, default_value_t = 100)]
        trials: usize,
        /// Pair files {"a": matrix, "b": matrix}, or single matrices paired with a seeded
        /// random B.
        #[arg(long)]
        instance: Vec<PathBuf>,
    },
}

/// Failure of a command, mapped to an exit status.
enum Failure {
    Invalid(String),
    Internal(String),
    /// The report is still printed.
    Certificate(Value),
    Property(Value),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::InternalInconsistency(_) | Error::NoConvergence { .. } => Failure::Internal(e.to_string()),
            _ => Failure::Invalid(e.to_string()),
        }
    }
}

impl Failure {
    fn exit_code(&self) -> u8 {
        match self {
            Failure::Property(_) => 1,
            Failure::Invalid(_) => 2,
            Failure::Internal(_) | Failure::Certificate(_) => 3,
        }
    }
}

type CmdResult = Result<Value, Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let tol = match Tolerance::new(cli.tol_rank, cli.tol_residual) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let result = run(&cli.command, &tol);
    let report = match &result {
        Ok(v) | Err(Failure::Certificate(v)) | Err(Failure::Property(v)) => Some(v),
        Err(_) => None,
    };
    if let Some(v) = report {
        match cli.output {
            Output::Json => print!("{}", io::canonical_json(v)),
            Output::Text => print!("{}", render::text(v)),
        }
    }
    let Err(failure) = result else {
        return ExitCode::SUCCESS;
    };
    match &failure {
        Failure::Invalid(m) | Failure::Internal(m) => eprintln!("error: {m}"),
        Failure::Certificate(v) | Failure::Property(v) => {
            for line in failed_checks(v) {
                eprintln!("error: {line}");
            }
        }
    }
    ExitCode::from(failure.exit_code())
}

fn run(cmd: &Command, tol: &Tolerance) -> CmdResult {
    match cmd {
        Command::Short { t, subspace } => short(t, subspace, tol),
        Command::Parsum { a, b } => parsum(a, b, tol),
        Command::Lebesgue { a, b } => lebesgue(a, b, tol),
        Command::Decompose { a, b } => decompose(a, b, tol),
        Command::KreinShort { a, subspace, range_in } => krein_short(a, subspace, *range_in, tol),
        Command::ChargeDecompose { nu, mu } => charge_decompose(nu, mu, tol),
        Command::GnsDecompose { algebra, f, g } => gns_decompose(algebra, f, g, tol),
        Command::Verify { seed, trials, instance } => run_verify(*seed, *trials, instance, tol),
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::Invalid(format!("cannot read {}: {e}", path.display())))
}

fn what(path: &Path) -> String {
    path.display().to_string()
}

fn load_matrix(path: &Path) -> Result<HermitianMatrix, Failure> {
    let m: MatrixJson = io::parse(&read(path)?, &what(path))?;
    Ok(m.to_hermitian()?)
}

fn load_form(path: &Path, tol: &Tolerance) -> Result<PsdForm, Failure> {
    Ok(PsdForm::new(load_matrix(path)?, tol)?)
}

fn load_subspace(path: &Path) -> Result<linalg::Subspace, Failure> {
    let s: SubspaceJson = io::parse(&read(path)?, &what(path))?;
    Ok(s.to_subspace()?)
}

fn matrix(m: &HermitianMatrix) -> Value {
    io::to_value(&MatrixJson::from_matrix(m.as_matrix()))
}

/// Named checks `{residual, bound, pass}`; any failing check turns the command into exit 3.
#[derive(Default)]
struct Certificate(Map<String, Value>);

impl Certificate {
    fn check(&mut self, name: &str, residual: f64, bound: f64) {
        self.0.insert(
            name.to_string(),
            json!({"residual": float(residual), "bound": float(bound), "pass": residual <= bound}),
        );
    }

    fn pass(&self) -> bool {
        self.0.values().all(|v| v["pass"] == Value::Bool(true))
    }

    /// Attaches the certificate to `out` and fails if any check failed.
    fn finish(self, mut out: Map<String, Value>) -> CmdResult {
        let pass = self.pass();
        out.insert("certificate".into(), Value::Object(self.0));
        let v = Value::Object(out);
        if pass {
            Ok(v)
        } else {
            Err(Failure::Certificate(v))
        }
    }
}

fn dims_match(a: &PsdForm, b: &PsdForm) -> Result<(), Failure> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            found: b.dim(),
        }
        .into());
    }
    Ok(())
}

fn short(t_path: &Path, y_path: &Path, tol: &Tolerance) -> CmdResult {
    let t = load_form(t_path, tol)?;
    let y = load_subspace(y_path)?;
    let s = forms::short_form(&t, &y, tol)?;
    let mut cert = Certificate::default();
    let vanishing = y
        .basis()
        .column_iter()
        .map(|v| s.quadratic(&v.into_owned()))
        .collect::<shorted::Result<Vec<f64>>>()?
        .into_iter()
        .fold(0.0, f64::max);
    cert.check("kernel_inclusion_max", vanishing, tol.rank_rtol() * t.scale());
    let below = t.gram().sub(s.gram())?.eigen().lambda_min().min(0.0).abs();
    cert.check("order_gap", below, tol.rank_rtol() * t.scale());
    let mut out = Map::new();
    out.insert("short".into(), matrix(s.gram()));
    cert.finish(out)
}

fn parsum(a_path: &Path, b_path: &Path, tol: &Tolerance) -> CmdResult {
    let a = load_form(a_path, tol)?;
    let b = load_form(b_path, tol)?;
    dims_match(&a, &b)?;
    let ab = forms::parallel_sum(&a, &b, tol)?;
    let ba = forms::parallel_sum(&b, &a, tol)?;
    let scale = 1.0 + a.frobenius_norm() + b.frobenius_norm();
    let mut cert = Certificate::default();
    cert.check(
        "symmetry_residual",
        (ab.gram().as_matrix() - ba.gram().as_matrix()).norm(),
        tol.residual_atol() * scale,
    );
    for (name, part) in [("below_a_gap", &a), ("below_b_gap", &b)] {
        let gap = part.gram().sub(ab.gram())?.eigen().lambda_min().min(0.0).abs();
        cert.check(name, gap, tol.residual_atol() * scale);
    }
    let mut out = Map::new();
    out.insert("parallel_sum".into(), matrix(ab.gram()));
    cert.finish(out)
}

fn lebesgue(a_path: &Path, b_path: &Path, tol: &Tolerance) -> CmdResult {
    let a = load_form(a_path, tol)?;
    let b = load_form(b_path, tol)?;
    dims_match(&a, &b)?;
    let l = forms::lebesgue_ac_part(&a, &b, tol)?;
    let mut cert = Certificate::default();
    cert.check(
        "short_discrepancy",
        l.discrepancy,
        LEBESGUE_AGREEMENT_RTOL * (1.0 + a.frobenius_norm()),
    );
    let mut out = Map::new();
    out.insert("ac".into(), matrix(l.form.gram()));
    out.insert("iterations".into(), json!(l.iterations));
    out.insert("converged".into(), json!(l.converged));
    cert.finish(out)
}

fn decompose(a_path: &Path, b_path: &Path, tol: &Tolerance) -> CmdResult {
    let a = load_form(a_path, tol)?;
    let b = load_form(b_path, tol)?;
    dims_match(&a, &b)?;
    let d = forms::short_type_decompose(&a, &b, tol)?;
    let od = operator::operator_decompose(a.gram(), b.gram(), tol)?;
    let a_norm = a.frobenius_norm();
    let r = d.residuals;
    let mut cert = Certificate::default();
    cert.check("sum_residual", r.sum_residual, 1e-10 * (1.0 + a_norm));
    cert.check("kernel_inclusion_max", r.kernel_inclusion_max, 1e-9 * a.scale());
    cert.check(
        "singularity_parallel_sum_norm",
        r.singularity_parallel_sum_norm,
        1e-8 * (1.0 + a_norm + b.frobenius_norm()),
    );
    cert.check("sup_formula_residual", od.sup_formula_residual, 1e-8 * (1.0 + a_norm));
    let operator_gap = (od.a_ll.as_matrix() - d.ac.gram().as_matrix()).norm();
    cert.check("operator_route_gap", operator_gap, tol.residual_atol() * (1.0 + a_norm));
    let singular = forms::is_singular(&d.sing, &b, tol)?;
    cert.check("singularity_rank_criterion", if singular { 0.0 } else { 1.0 }, 0.0);

    let mut out = Map::new();
    out.insert("ac".into(), matrix(d.ac.gram()));
    out.insert("sing".into(), matrix(d.sing.gram()));
    out.insert("unique".into(), json!(d.unique));
    out.insert(
        "residuals".into(),
        json!({
            "sum_residual": float(r.sum_residual),
            "kernel_inclusion_max": float(r.kernel_inclusion_max),
            "singularity_parallel_sum_norm": float(r.singularity_parallel_sum_norm),
        }),
    );
    out.insert("sup_formula_residual".into(), float(od.sup_formula_residual));
    cert.finish(out)
}

fn krein_short(a_path: &Path, m_path: &Path, range_in: bool, tol: &Tolerance) -> CmdResult {
    let a = load_form(a_path, tol)?;
    let m = load_subspace(m_path)?;
    let vanish_on = if range_in { m.complement() } else { m.clone() };
    let factor = operator::build_factor(a.gram(), tol)?;
    let s = operator::krein_short(a.gram(), &vanish_on, tol)?;
    let schur = forms::short_form(&a, &vanish_on, tol)?;
    let bound = tol.residual_atol() * (1.0 + a.frobenius_norm());
    let mut cert = Certificate::default();
    cert.check("factorization_gap", (s.as_matrix() - schur.gram().as_matrix()).norm(), bound);
    cert.check("factor_reconstruction", factor.reconstruction_residual(), bound);
    let p = linalg::orth_project(&vanish_on);
    let leak = (p.as_matrix() * s.as_matrix()).norm();
    cert.check(if range_in { "range_outside_subspace" } else { "vanishing_on_subspace" }, leak, bound);
    let mut out = Map::new();
    out.insert("short".into(), matrix(&s));
    out.insert("factor_rank".into(), json!(factor.rank()));
    out.insert("convention".into(), json!(if range_in { "range_in" } else { "vanishing_on" }));
    cert.finish(out)
}

fn load_charge(path: &Path) -> Result<Charge, Failure> {
    let c: ChargeJson = io::parse(&read(path)?, &what(path))?;
    Ok(c.to_charge()?)
}

fn charge_decompose(nu_path: &Path, mu_path: &Path, tol: &Tolerance) -> CmdResult {
    let nu = load_charge(nu_path)?;
    let mu = load_charge(mu_path)?;
    let d = charges::charge_decompose(&nu, &mu, tol)?;
    let total: f64 = nu.atom_values().iter().sum();
    let mut cert = Certificate::default();
    cert.check("form_residual", d.form_residual, 1e-10 * (1.0 + total));
    cert.check("null_set_max", d.null_set_max, 0.0);
    let singular = forms::is_singular(&charges::induced_form(&d.perp), &charges::induced_form(&mu), tol)?;
    cert.check("perp_singular", if singular { 0.0 } else { 1.0 }, 0.0);
    let mut out = Map::new();
    out.insert("atoms".into(), json!(nu.ring().atoms()));
    out.insert("ll".into(), io::to_value(&ChargeJson::from_charge(&d.ll)));
    out.insert("perp".into(), io::to_value(&ChargeJson::from_charge(&d.perp)));
    out.insert("ll_atoms".into(), json!(d.ll.atom_values()));
    out.insert("perp_atoms".into(), json!(d.perp.atom_values()));
    out.insert(
        "residuals".into(),
        json!({"form_residual": float(d.form_residual), "null_set_max": float(d.null_set_max)}),
    );
    cert.finish(out)
}

fn gns_decompose(alg_path: &Path, f_path: &Path, g_path: &Path, tol: &Tolerance) -> CmdResult {
    let alg: AlgebraJson = io::parse(&read(alg_path)?, &what(alg_path))?;
    let alg = Arc::new(alg.to_algebra()?);
    let f: FunctionalJson = io::parse(&read(f_path)?, &what(f_path))?;
    let g: FunctionalJson = io::parse(&read(g_path)?, &what(g_path))?;
    let f = f.to_functional(alg.clone(), tol)?;
    let g = g.to_functional(alg.clone(), tol)?;
    let data = functionals::gns(&f, tol)?;
    let d = functionals::functional_decompose(&f, &g, tol)?;
    let f_max = f.coeffs().camax();
    let atol = tol.residual_atol();
    let mut cert = Certificate::default();
    cert.check("reconstruction_residual", data.reconstruction_residual(&f), 1e-9 * (1.0 + f_max));
    cert.check("homomorphism_residual", data.homomorphism_residual(&alg), 1e-9 * (1.0 + f_max));
    cert.check("sum_residual", d.sum_residual, atol * (1.0 + f_max));
    cert.check("invariance_residual", d.invariance_residual, atol * (1.0 + f_max));
    cert.check("form_bridge_residual", d.form_bridge_residual, atol * (1.0 + f_max));
    let f_scale = functionals::induced_gram(&f, tol)?.scale();
    cert.check("kernel_inclusion_max", d.kernel_inclusion_max, tol.rank_rtol() * f_scale.max(1.0));
    let mut out = Map::new();
    out.insert("ll".into(), io::to_value(&FunctionalJson::from_functional(&d.ll)));
    out.insert("perp".into(), io::to_value(&FunctionalJson::from_functional(&d.perp)));
    out.insert(
        "gns".into(),
        json!({
            "quotient_dim": data.quotient_dim(),
            "xi": io::complex_pairs(data.xi.as_slice()),
            "xi_preimage": io::complex_pairs(data.xi_preimage().as_slice()),
        }),
    );
    cert.finish(out)
}

/// `{"a": matrix, "b": matrix}`, or a single matrix.
fn load_instance(path: &Path, index: usize, seed: u64) -> Result<(HermitianMatrix, HermitianMatrix), Failure> {
    let text = read(path)?;
    let v: Value = io::parse(&text, &what(path))?;
    if v.get("a").is_some() {
        let a: MatrixJson = serde_json::from_value(v["a"].clone())
            .map_err(|e| Failure::Invalid(format!("{}: a: {e}", what(path))))?;
        let b: MatrixJson = serde_json::from_value(v["b"].clone())
            .map_err(|e| Failure::Invalid(format!("{}: b: {e}", what(path))))?;
        return Ok((a.to_hermitian()?, b.to_hermitian()?));
    }
    let a: MatrixJson = io::parse(&text, &what(path))?;
    let a = a.to_hermitian()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(1_000_000 + index as u64));
    let n = a.dim();
    let rank = if n == 0 { 0 } else { n - 1 };
    let b = sample::random_psd(n, rank, 1e4, 1.0, &mut rng);
    Ok((a, b))
}

fn run_verify(seed: u64, trials: usize, instances: &[PathBuf], tol: &Tolerance) -> CmdResult {
    if trials == 0 && instances.is_empty() {
        eprintln!("warning: no trials and no instances; the property suite is vacuous");
    }
    // validate every instance before running anything
    let mut pairs = Vec::new();
    for (i, path) in instances.iter().enumerate() {
        let (a, b) = load_instance(path, i, seed)?;
        PsdForm::new(a.clone(), tol)?;
        PsdForm::new(b.clone(), tol)?;
        if a.dim() != b.dim() {
            return Err(Error::DimensionMismatch {
                expected: a.dim(),
                found: b.dim(),
            }
            .into());
        }
        pairs.push((a, b));
    }
    let mut report = verify::verify_random(&RunConfig::new(seed, trials), tol);
    for (i, (a, b)) in pairs.iter().enumerate() {
        report.merge(verify::verify_pair(a, b, seed.wrapping_add(2_000_000 + i as u64), tol)?);
    }
    let v = report_value(&report, seed, trials);
    if report.pass() {
        Ok(v)
    } else {
        Err(Failure::Property(v))
    }
}

fn report_value(report: &Report, seed: u64, trials: usize) -> Value {
    let mut cert = Map::new();
    for (name, p) in &report.properties {
        cert.insert(
            name.clone(),
            json!({
                "residual": float(p.residual),
                "bound": float(p.bound),
                "pass": p.pass(),
                "checks": p.checks,
                "failures": p.failures,
            }),
        );
    }
    let failures: Vec<Value> = report
        .failed()
        .map(|(name, p)| json!({"property": name, "first_failure": p.first_failure}))
        .collect();
    json!({
        "seed": seed,
        "trials": trials,
        "instances": report.instances,
        "pass": report.pass(),
        "certificate": Value::Object(cert),
        "failures": failures,
    })
}

fn failed_checks(v: &Value) -> Vec<String> {
    let Some(cert) = v["certificate"].as_object() else {
        return Vec::new();
    };
    cert.iter()
        .filter(|(_, c)| c["pass"] == Value::Bool(false))
        .map(|(name, c)| format!("check {name} failed, worst residual {} (bound {})", c["residual"], c["bound"]))
        .collect()
}
