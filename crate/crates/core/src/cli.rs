//! Command-line front end. `run` returns the process exit code: 0 on
//! success, 1 when a verification fails, 2 on usage or input errors.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_rational::Ratio;
use num_traits::Signed;
use serde::Serialize;
use serde_json::{json, Map, Value};

use crate::error::Result;
use crate::expsum::{
    kloosterman_incomplete, prehod_check, prehod_moduli, psi, psi_bound_study, psi_sum_over_roots,
    psi_truncated, random_theta_specs, theta_direct, theta_via_reps, truncation_error, weil_ratio_study,
    KloostermanSpec, ThetaSpec,
};
use crate::gamma_census::{asymptotic_report, gamma_decomposed, gamma_direct, DecompositionPlan};
use crate::quadroots::{lambda, roots_mod, Shift};
use crate::representation_map::{beta, construct_preimage, verify_surjectivity, PreimageCase};
use crate::singular_series::{estimates_agree, sigma_product, sigma_sum, SigmaEstimate};
use crate::verify::{run_check, Scale, CHECKS, THETA_TOLERANCE};

#[derive(Debug, Parser, Serialize)]
#[command(name = "sqfree", version, about = "Square-free pairs n^2+1, n^2+2: census, constants and checks")]
pub struct Cli {
    /// Seed for every sampled study
    #[arg(long, global = true, default_value_t = 1)]
    pub seed: u64,
    /// Worker threads (default: available parallelism)
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Write results here instead of standard output
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    pub format: Format,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Text,
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum MethodArg {
    Product,
    Sum,
    Both,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Count n <= X with n^2+1 and n^2+2 both square-free
    Gamma {
        /// One value, or several ascending values for an error table
        #[arg(long = "x", required = true, num_args = 1..)]
        x: Vec<u64>,
        /// Split threshold for the decomposition (implies --decompose)
        #[arg(long)]
        z: Option<f64>,
        /// Also count through the Möbius decomposition at z = X^(8/9)
        #[arg(long)]
        decompose: bool,
    },
    /// The singular series
    Sigma {
        #[arg(long, value_enum, default_value_t = MethodArg::Product)]
        method: MethodArg,
        #[arg(long, default_value_t = 1_000_000)]
        prime_bound: u64,
        #[arg(long, default_value_t = 10_000)]
        dmax: u64,
    },
    /// Joint root count lambda(q1, q2)
    Lambda {
        #[arg(long)]
        q1: u128,
        #[arg(long)]
        q2: u128,
    },
    /// Roots of n^2 + a modulo q in [1, q]
    Roots {
        #[arg(long, value_parser = parse_shift)]
        a: Shift,
        #[arg(long = "mod")]
        modulus: u128,
    },
    /// Representations x^2 + 2y^2 = n mapping onto roots of z^2 + 2
    Surjection {
        #[command(subcommand)]
        action: SurjectionCmd,
    },
    /// Incomplete Kloosterman sum, or the sampled Weil-ratio study
    Kloosterman(KloostermanArgs),
    /// The Θ_m sum, directly and through representations
    Theta(ThetaArgs),
    /// The sawtooth and its truncated Fourier series
    Psi {
        #[command(subcommand)]
        action: PsiCmd,
    },
    /// The ψ-sum identity over roots mod d^2 and mod d, exactly
    Prehod {
        /// A perfect square
        #[arg(long = "x")]
        x: u64,
        /// Default: every square-free d in (sqrt X, 3 sqrt X] with a root
        #[arg(long)]
        d1: Option<u64>,
    },
    /// Run the invariant suite
    VerifyAll {
        #[arg(long, value_enum, default_value_t = Scale::Smoke)]
        scale: Scale,
        /// Leave out a check (repeatable)
        #[arg(long, value_parser = clap::builder::PossibleValuesParser::new(CHECKS))]
        skip: Vec<String>,
    },
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SurjectionCmd {
    /// Every root of every n in [5, max] has a preimage
    Verify {
        #[arg(long, default_value_t = 10_000)]
        max: u64,
    },
    /// Intermediates of the preimage construction for one root
    Trace {
        #[arg(long)]
        z: u64,
        #[arg(long)]
        n: u64,
    },
}

#[derive(Debug, Args, Serialize)]
pub struct KloostermanArgs {
    #[arg(long, allow_hyphen_values = true, required_unless_present = "study")]
    r: Option<i64>,
    #[arg(long, allow_hyphen_values = true, required_unless_present = "study")]
    h: Option<i64>,
    #[arg(long, allow_hyphen_values = true, required_unless_present = "study")]
    alpha: Option<f64>,
    #[arg(long, allow_hyphen_values = true, required_unless_present = "study")]
    beta: Option<f64>,
    /// Sample random sums instead and report the largest Weil ratio
    #[arg(long)]
    study: bool,
    #[arg(long, default_value_t = 5_000)]
    rmax: u64,
    #[arg(long, default_value_t = 10_000)]
    samples: usize,
}

#[derive(Debug, Args, Serialize)]
pub struct ThetaArgs {
    #[arg(long, required_unless_present = "random")]
    d2: Option<f64>,
    #[arg(long, allow_hyphen_values = true, required_unless_present = "random")]
    m: Option<i64>,
    #[arg(long = "x", required_unless_present = "random")]
    x: Option<u64>,
    /// Check this many seeded specs (D2 <= 200, |m| <= 20, X <= 10^4)
    #[arg(long)]
    random: Option<usize>,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum PsiCmd {
    /// ψ(t) against its truncation at M
    Value {
        #[arg(long, allow_hyphen_values = true)]
        t: f64,
        #[arg(long = "M", default_value_t = 1000)]
        big_m: u32,
    },
    /// Mean truncation error for M = 2^5 .. 2^12
    Truncation {
        #[arg(long, default_value_t = 10_000)]
        points: usize,
    },
    /// Σ over D <= d < 2D and roots n of n^2 + a mod d of ψ((sqrt X - n)/d)
    Roots {
        #[arg(long, value_parser = parse_shift)]
        a: Shift,
        #[arg(long)]
        d: f64,
        #[arg(long = "x")]
        x: u64,
    },
    /// |Σ| D^(1/4) / X over D = 10^2, 10^2.2, ...
    Bound {
        #[arg(long, value_parser = parse_shift)]
        a: Shift,
        #[arg(long = "x")]
        x: u64,
        #[arg(long, default_value_t = 10_000.0)]
        dmax: f64,
    },
}

fn parse_shift(s: &str) -> std::result::Result<Shift, String> {
    let a: u64 = s.parse().map_err(|e| format!("{e}"))?;
    Shift::try_from(a).map_err(|e| e.to_string())
}

/// Fifteen significant digits.
pub fn fmt_float(v: f64) -> String {
    if v == 0.0 || !v.is_finite() {
        return format!("{v}");
    }
    let exp = v.abs().log10().floor() as i32;
    if (-5..15).contains(&exp) {
        format!("{:.*}", (14 - exp) as usize, v)
    } else {
        format!("{v:.14e}")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(i128),
    Float(f64),
    Text(String),
    Bool(bool),
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Int(v) => v.to_string(),
            Cell::Float(v) => fmt_float(*v),
            Cell::Text(s) => s.clone(),
            Cell::Bool(b) => b.to_string(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Int(v) => i64::try_from(*v).map_or_else(|_| json!(v.to_string()), |v| json!(v)),
            Cell::Float(v) => serde_json::Number::from_f64(*v).map_or(Value::Null, Value::Number),
            Cell::Text(s) => json!(s),
            Cell::Bool(b) => json!(b),
        }
    }
}

macro_rules! cell_from {
    ($($t:ty => $arm:ident as $conv:ty),*) => {
        $(impl From<$t> for Cell {
            fn from(v: $t) -> Self {
                Cell::$arm(v as $conv)
            }
        })*
    };
}
cell_from!(u8 => Int as i128, u32 => Int as i128, u64 => Int as i128, i64 => Int as i128,
    usize => Int as i128, u128 => Int as i128, f64 => Float as f64);

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Bool(v)
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Text(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

impl From<Ratio<i128>> for Cell {
    fn from(v: Ratio<i128>) -> Self {
        Cell::Text(v.to_string())
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    fn new(columns: &[&'static str]) -> Self {
        Table {
            columns: columns.to_vec(),
            rows: Vec::new(),
        }
    }

    fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Csv => {
                let mut out = self.columns.join(",");
                out.push('\n');
                for row in &self.rows {
                    let fields: Vec<String> = row.iter().map(|c| csv_field(&c.render())).collect();
                    out.push_str(&fields.join(","));
                    out.push('\n');
                }
                out
            }
            Format::Json => {
                let rows: Vec<Value> = self
                    .rows
                    .iter()
                    .map(|row| {
                        let obj: Map<String, Value> = self
                            .columns
                            .iter()
                            .zip(row)
                            .map(|(k, v)| (k.to_string(), v.json()))
                            .collect();
                        Value::Object(obj)
                    })
                    .collect();
                let mut out = serde_json::to_string_pretty(&rows).expect("serializable");
                out.push('\n');
                out
            }
            Format::Text => {
                let cells: Vec<Vec<String>> = self.rows.iter().map(|r| r.iter().map(Cell::render).collect()).collect();
                let widths: Vec<usize> = self
                    .columns
                    .iter()
                    .enumerate()
                    .map(|(i, c)| cells.iter().map(|r| r[i].len()).chain([c.len()]).max().unwrap_or(0))
                    .collect();
                let line = |fields: Vec<&str>| {
                    let padded: Vec<String> = fields
                        .iter()
                        .zip(&widths)
                        .map(|(f, w)| format!("{f:<w$}"))
                        .collect();
                    padded.join("  ").trim_end().to_string() + "\n"
                };
                let mut out = line(self.columns.clone());
                for r in &cells {
                    out.push_str(&line(r.iter().map(String::as_str).collect()));
                }
                out
            }
        }
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// A command's table and whether its verification (if any) held.
pub struct Outcome {
    pub table: Table,
    pub pass: bool,
    pub failures: Vec<String>,
}

impl Outcome {
    fn ok(table: Table) -> Self {
        Outcome {
            table,
            pass: true,
            failures: Vec::new(),
        }
    }

    fn checked(table: Table, failures: Vec<String>) -> Self {
        Outcome {
            table,
            pass: failures.is_empty(),
            failures,
        }
    }
}

fn sigma_row(t: &mut Table, s: &SigmaEstimate) {
    let method = match s.method {
        crate::singular_series::SigmaMethod::Product => "product",
        crate::singular_series::SigmaMethod::Sum => "sum",
    };
    t.push(vec![method.into(), s.truncation.into(), s.value.into(), s.tail_bound.into()]);
}

fn gamma_cmd(xs: &[u64], z: Option<f64>, decompose: bool) -> Result<Outcome> {
    if xs.len() > 1 {
        let report = asymptotic_report(xs)?;
        let mut t = Table::new(&["x", "gamma", "sigma_x", "abs_err", "rel_err", "sigma_prime_bound", "slope"]);
        for r in &report.rows {
            t.push(vec![
                r.x.into(),
                r.gamma.into(),
                r.sigma_x.into(),
                r.abs_err.into(),
                r.rel_err.into(),
                report.sigma_prime_bound.into(),
                report.slope.map_or(Cell::Text(String::new()), Cell::Float),
            ]);
        }
        return Ok(Outcome::ok(t));
    }
    let x = xs[0];
    let c = gamma_direct(x)?;
    let base = vec![
        c.x.into(),
        c.gamma.into(),
        c.sigma_x.into(),
        c.abs_err.into(),
        c.rel_err.into(),
        crate::singular_series::REPORT_PRIME_BOUND.into(),
    ];
    let columns = ["x", "gamma", "sigma_x", "abs_err", "rel_err", "sigma_prime_bound"];
    if z.is_none() && !decompose {
        let mut t = Table::new(&columns);
        t.push(base);
        return Ok(Outcome::ok(t));
    }
    let plan = match z {
        Some(z) => DecompositionPlan::new(x, z)?,
        None => DecompositionPlan::with_default_z(x)?,
    };
    let d = gamma_decomposed(plan)?;
    let mut t = Table::new(&[&columns[..], &["z", "gamma1", "gamma2", "total", "match"]].concat());
    let matched = d.total == c.gamma as i64;
    let mut row = base;
    row.extend([plan.z.into(), d.gamma1.into(), d.gamma2.into(), d.total.into(), matched.into()]);
    t.push(row);
    let failures = if matched {
        vec![]
    } else {
        vec![format!("decomposition total {} != {}", d.total, c.gamma)]
    };
    Ok(Outcome::checked(t, failures))
}

fn execute(cli: &Cli) -> Result<Outcome> {
    match &cli.command {
        Command::Gamma { x, z, decompose } => gamma_cmd(x, *z, *decompose),
        Command::Sigma {
            method,
            prime_bound,
            dmax,
        } => {
            let mut t = Table::new(&["method", "truncation", "value", "tail_bound"]);
            let mut failures = Vec::new();
            match method {
                MethodArg::Product => sigma_row(&mut t, &sigma_product(*prime_bound)?),
                MethodArg::Sum => sigma_row(&mut t, &sigma_sum(*dmax)?),
                MethodArg::Both => {
                    let (p, s) = (sigma_product(*prime_bound)?, sigma_sum(*dmax)?);
                    sigma_row(&mut t, &p);
                    sigma_row(&mut t, &s);
                    if !estimates_agree(&p, &s) {
                        failures.push("two-method sigma disagreement".into());
                    }
                }
            }
            Ok(Outcome::checked(t, failures))
        }
        Command::Lambda { q1, q2 } => {
            let l = lambda(*q1, *q2)?;
            let mut t = Table::new(&["q1", "q2", "lambda"]);
            t.push(vec![l.q1.into(), l.q2.into(), l.value.into()]);
            Ok(Outcome::ok(t))
        }
        Command::Roots { a, modulus } => {
            let rs = roots_mod(*a, *modulus)?;
            let mut t = Table::new(&["a", "modulus", "count", "root"]);
            for &r in &rs.roots {
                t.push(vec![u8::from(*a).into(), rs.modulus.into(), rs.len().into(), r.into()]);
            }
            Ok(Outcome::ok(t))
        }
        Command::Surjection { action } => match action {
            SurjectionCmd::Verify { max } => {
                let r = verify_surjectivity(*max);
                let mut t = Table::new(&["max", "moduli_with_roots", "roots_checked", "double_case", "failures"]);
                t.push(vec![
                    r.nmax.into(),
                    r.moduli_with_roots.into(),
                    r.roots_checked.into(),
                    r.double_case_count.into(),
                    r.failures.len().into(),
                ]);
                let failures = r
                    .failures
                    .iter()
                    .map(|f| format!("n = {}, z = {}: {}", f.n, f.z, f.reason))
                    .collect();
                Ok(Outcome::checked(t, failures))
            }
            SurjectionCmd::Trace { z, n } => {
                let tr = construct_preimage(*z, *n)?;
                let back = beta(&tr.representation())?;
                let mut t = Table::new(&["z", "n", "a", "q", "r", "case", "x", "y", "beta"]);
                let case = match tr.case {
                    PreimageCase::Single => "r^2+2q^2=n",
                    PreimageCase::Double => "r^2+2q^2=2n",
                };
                t.push(vec![
                    tr.z.into(),
                    tr.n.into(),
                    tr.a.into(),
                    tr.q.into(),
                    tr.r.into(),
                    case.into(),
                    tr.x.into(),
                    tr.y.into(),
                    back.into(),
                ]);
                Ok(Outcome::ok(t))
            }
        },
        Command::Kloosterman(k) => {
            if k.study {
                let r = weil_ratio_study(k.rmax, k.samples, cli.seed)?;
                let mut t = Table::new(&[
                    "rmax", "samples", "seed", "max_ratio", "bound", "worst_r", "worst_h", "worst_alpha", "worst_beta",
                ]);
                let w = r.worst.clone();
                t.push(vec![
                    r.rmax.into(),
                    r.samples.into(),
                    r.seed.into(),
                    r.max_ratio.into(),
                    10.0.into(),
                    w.as_ref().map_or(Cell::Text(String::new()), |w| w.r.into()),
                    w.as_ref().map_or(Cell::Text(String::new()), |w| w.h.into()),
                    w.as_ref().map_or(Cell::Text(String::new()), |w| w.alpha.into()),
                    w.as_ref().map_or(Cell::Text(String::new()), |w| w.beta.into()),
                ]);
                let failures = if r.max_ratio <= 10.0 {
                    vec![]
                } else {
                    vec![format!("Weil ratio {} exceeds 10", r.max_ratio)]
                };
                return Ok(Outcome::checked(t, failures));
            }
            let spec = KloostermanSpec::new(
                k.r.expect("required"),
                k.h.expect("required"),
                k.alpha.expect("required"),
                k.beta.expect("required"),
            )?;
            let v = kloosterman_incomplete(&spec);
            let mut t = Table::new(&["r", "h", "alpha", "beta", "re", "im", "abs"]);
            t.push(vec![
                spec.r.into(),
                spec.h.into(),
                spec.alpha.into(),
                spec.beta.into(),
                v.re.into(),
                v.im.into(),
                v.norm().into(),
            ]);
            Ok(Outcome::ok(t))
        }
        Command::Theta(a) => {
            let specs = match a.random {
                Some(count) => random_theta_specs(count, 200, 20, 10_000, cli.seed),
                None => vec![ThetaSpec::new(
                    a.d2.expect("required"),
                    a.m.expect("required"),
                    a.x.expect("required"),
                )?],
            };
            let mut t = Table::new(&[
                "d2", "m", "x", "direct_re", "direct_im", "reps_re", "reps_im", "abs_diff", "tolerance", "pass",
            ]);
            let mut failures = Vec::new();
            for s in specs {
                let (d, r) = (theta_direct(&s), theta_via_reps(&s));
                let diff = (d - r).norm();
                let pass = diff <= THETA_TOLERANCE;
                if !pass {
                    failures.push(format!("D2 = {}, m = {}, X = {}: |diff| = {diff:e}", s.d2, s.m, s.x));
                }
                t.push(vec![
                    s.d2.into(),
                    s.m.into(),
                    s.x.into(),
                    d.re.into(),
                    d.im.into(),
                    r.re.into(),
                    r.im.into(),
                    diff.into(),
                    THETA_TOLERANCE.into(),
                    pass.into(),
                ]);
            }
            Ok(Outcome::checked(t, failures))
        }
        Command::Psi { action } => match action {
            PsiCmd::Value { t: x, big_m } => {
                let tr = psi_truncated(*x, *big_m)?;
                let mut t = Table::new(&["t", "M", "psi", "truncated", "error"]);
                t.push(vec![(*x).into(), (*big_m).into(), psi(*x).into(), tr.into(), (psi(*x) - tr).abs().into()]);
                Ok(Outcome::ok(t))
            }
            PsiCmd::Truncation { points } => {
                let mut t = Table::new(&["M", "points", "seed", "mean_error", "tolerance"]);
                let mut prev = f64::INFINITY;
                let mut failures = Vec::new();
                for k in 5..=12u32 {
                    let m = 1u32 << k;
                    let err = truncation_error(m, *points, cli.seed)?;
                    if err >= prev {
                        failures.push(format!("mean error did not fall at M = {m}"));
                    }
                    prev = err;
                    let tol = 5.0 * (m as f64).ln() / m as f64;
                    t.push(vec![m.into(), (*points).into(), cli.seed.into(), err.into(), tol.into()]);
                }
                Ok(Outcome::checked(t, failures))
            }
            PsiCmd::Roots { a, d, x } => {
                let s = psi_sum_over_roots(*a, *d, *x)?;
                let mut t = Table::new(&["a", "D", "x", "sum"]);
                t.push(vec![u8::from(*a).into(), (*d).into(), (*x).into(), s.into()]);
                Ok(Outcome::ok(t))
            }
            PsiCmd::Bound { a, x, dmax } => {
                let mut t = Table::new(&["a", "x", "D", "sum", "ratio"]);
                for r in psi_bound_study(*a, *x, *dmax)? {
                    t.push(vec![u8::from(*a).into(), (*x).into(), r.d.into(), r.sum.into(), r.ratio.into()]);
                }
                Ok(Outcome::ok(t))
            }
        },
        Command::Prehod { x, d1 } => {
            let moduli = match d1 {
                Some(d) => vec![*d],
                None => prehod_moduli(*x)?,
            };
            let mut t = Table::new(&[
                "d1",
                "x",
                "lhs",
                "rhs",
                "abs_diff",
                "pass",
                "square_roots",
                "roots",
                "square_roots_above",
                "roots_above",
                "closed_forms",
            ]);
            let mut failures = Vec::new();
            for d in moduli {
                let c = prehod_check(d, *x)?;
                if !c.equal {
                    failures.push(format!("d1 = {d}: {} != {}", c.lhs, c.rhs));
                }
                t.push(vec![
                    c.d1.into(),
                    c.x.into(),
                    c.lhs.into(),
                    c.rhs.into(),
                    (c.lhs - c.rhs).abs().into(),
                    c.equal.into(),
                    c.square_roots.into(),
                    c.roots.into(),
                    c.square_roots_above.into(),
                    c.roots_above.into(),
                    c.closed_forms_hold().into(),
                ]);
            }
            Ok(Outcome::checked(t, failures))
        }
        Command::VerifyAll { scale, skip } => {
            let mut t = Table::new(&["check", "scale", "seed", "pass", "detail"]);
            let mut failures = Vec::new();
            for name in CHECKS.iter().filter(|c| !skip.iter().any(|s| s == *c)) {
                let started = Instant::now();
                let o = run_check(name, *scale, cli.seed)?;
                eprintln!("{name}: {:.2}s", started.elapsed().as_secs_f64());
                if !o.pass {
                    failures.push(format!("{}: {}", o.name, o.detail));
                }
                let scale_name = match scale {
                    Scale::Smoke => "smoke",
                    Scale::Desk => "desk",
                };
                t.push(vec![o.name.into(), scale_name.into(), cli.seed.into(), o.pass.into(), o.detail.into()]);
            }
            Ok(Outcome::checked(t, failures))
        }
    }
}

/// Parses `args` (program name first), runs the command and writes its
/// output. The resolved configuration goes to standard error as one JSON
/// line so standard output stays machine-readable.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let mut cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let threads = cli
        .threads
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    if threads == 0 {
        eprintln!("error: --threads must be positive");
        return 2;
    }
    cli.threads = Some(threads);
    eprintln!("config: {}", serde_json::to_string(&cli).expect("serializable"));
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(threads).build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: {e}");
            return 2;
        }
    };
    let outcome = match pool.install(|| execute(&cli)) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            return 2;
        }
    };
    let text = outcome.table.render(cli.format);
    let written = match &cli.out {
        Some(path) => std::fs::write(path, text.as_bytes()),
        None => std::io::stdout().lock().write_all(text.as_bytes()),
    };
    if let Err(e) = written {
        eprintln!("error: writing output: {e}");
        return 2;
    }
    if outcome.pass {
        0
    } else {
        for f in &outcome.failures {
            eprintln!("FAILED {f}");
        }
        1
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_format() {
        assert_eq!(fmt_float(7.0 / 9.0), "0.777777777777778");
        assert_eq!(fmt_float(0.0), "0");
        assert_eq!(fmt_float(671873.0), "671873.000000000");
        assert_eq!(fmt_float(-1.5e-7), "-1.50000000000000e-7");
        assert_eq!(fmt_float(2.0e20), "2.00000000000000e20");
    }

    #[test]
    fn csv_always_has_header() {
        let t = Table::new(&["a", "b"]);
        assert_eq!(t.render(Format::Csv), "a,b\n");
        let mut t = Table::new(&["a", "b"]);
        t.push(vec![1u64.into(), "x,y".into()]);
        assert_eq!(t.render(Format::Csv), "a,b\n1,\"x,y\"\n");
        assert_eq!(t.render(Format::Json), "[\n  {\n    \"a\": 1,\n    \"b\": \"x,y\"\n  }\n]\n");
    }

    #[test]
    fn usage_errors_exit_2() {
        assert_eq!(run(["sqfree", "gamma"]), 2);
        assert_eq!(run(["sqfree", "sigma", "--bogus", "1"]), 2);
        assert_eq!(run(["sqfree", "roots", "--a", "3", "--mod", "5"]), 2);
        assert_eq!(run(["sqfree", "lambda", "--q1", "2", "--q2", "0"]), 2);
    }
}
