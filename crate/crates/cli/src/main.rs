use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Map, Value};

use weillift::cmvalues::{cm_norm, green_GN, green_Gkf};
use weillift::fqm::build_phin;
use weillift::lfunc::rankin_selberg_L;
use weillift::qexp::Newform;
use weillift::shintani::twisted_trace;
use weillift::special::{c, C64};
use weillift::verify;
use weillift::Error;

#[derive(Parser)]
#[command(name = "weillift", version, about = "Weil representations, Shintani lifts, Rankin-Selberg L-values and CM norms")]
struct Cli {
    #[command(flatten)]
    config: RunConfig,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct RunConfig {
    /// Working precision in bits for multiprecision stages.
    #[arg(long, global = true, env = "WEILLIFT_PREC", default_value_t = 256)]
    prec: u32,
    /// Number of q-expansion coefficients for built-in newforms.
    #[arg(long, global = true, default_value_t = 200)]
    truncation: usize,
    /// Worker count. Results do not depend on it.
    #[arg(long, global = true, default_value_t = 1)]
    threads: usize,
    /// Write JSON here instead of standard output.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// The invariant vector phi_N attached to (D1, D2, N).
    InvariantVector {
        #[arg(long = "D1", allow_hyphen_values = true)]
        d1: i64,
        #[arg(long = "D2", allow_hyphen_values = true)]
        d2: i64,
        #[arg(long = "N", default_value_t = 1)]
        n: i64,
        /// Also report invariance residuals and subgroup orders.
        #[arg(long)]
        check: bool,
    },
    /// Twisted traces of cycle integrals, i.e. Shintani lift coefficients.
    ShintaniLift {
        /// Newform JSON file, or a built-in name (delta, eta6).
        #[arg(long)]
        newform: String,
        #[arg(long, allow_hyphen_values = true)]
        twist: i64,
        /// Comma separated list of indices m.
        #[arg(long = "m-list", value_delimiter = ',')]
        m_list: Vec<u64>,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
    },
    /// The explicit Rankin-Selberg L-function at one point.
    LfuncEval {
        #[arg(long)]
        newform: String,
        #[arg(long = "D1", allow_hyphen_values = true)]
        d1: i64,
        #[arg(long = "D2", allow_hyphen_values = true)]
        d2: i64,
        #[arg(long = "N")]
        n: u64,
        #[arg(long = "N3", default_value_t = 1)]
        n3: u64,
        /// Point s as RE,IM or RE.
        #[arg(long, allow_hyphen_values = true, default_value = "0,0")]
        s: String,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
    },
    /// Certified norm of pi_N(tau1) - pi_N(tau2) over the CM cycle.
    CmNorm {
        #[arg(long = "N", default_value_t = 1)]
        n: u64,
        #[arg(long = "D1", allow_hyphen_values = true)]
        d1: i64,
        #[arg(long = "D2", allow_hyphen_values = true)]
        d2: i64,
    },
    /// Averaged Green function G^N_s, or G_{k,f} when --principal is given.
    Green {
        #[arg(long, allow_hyphen_values = true, default_value = "2,0")]
        s: String,
        #[arg(long = "N", default_value_t = 1)]
        n: u64,
        #[arg(long, allow_hyphen_values = true)]
        z1: String,
        #[arg(long, allow_hyphen_values = true)]
        z2: String,
        #[arg(long, default_value_t = 200.0)]
        cutoff: f64,
        /// Principal part as m:c pairs, e.g. 1:1,2:3. Uses k = Re(s).
        #[arg(long, value_delimiter = ',')]
        principal: Vec<String>,
    },
    /// Run the acceptance criteria and print a pass/fail table.
    Verify {
        /// Criterion numbers; all when omitted.
        criteria: Vec<u32>,
        /// Emit JSON instead of the table.
        #[arg(long)]
        json: bool,
    },
}

fn invalid(msg: impl Into<String>) -> Error {
    Error::Invalid(msg.into())
}

fn parse_complex(s: &str) -> Result<C64, Error> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    let num = |t: &str| t.parse::<f64>().map_err(|_| invalid(format!("cannot parse '{t}' as a number")));
    match parts.as_slice() {
        [re] => Ok(c(num(re)?, 0.0)),
        [re, im] => Ok(c(num(re)?, num(im)?)),
        _ => Err(invalid(format!("expected RE,IM, got '{s}'"))),
    }
}

fn load_newform(spec: &str, bound: usize) -> Result<Newform, Error> {
    let path = PathBuf::from(spec);
    if path.is_file() {
        let text = std::fs::read_to_string(&path).map_err(|e| invalid(format!("reading {spec}: {e}")))?;
        return Newform::from_json(&text);
    }
    Newform::builtin(spec, bound)
}

fn cplx(z: C64) -> Value {
    json!({"re": z.re, "im": z.im})
}

fn run(cli: &Cli) -> Result<Option<Value>, Error> {
    let cfg = &cli.config;
    if cfg.prec < 64 {
        return Err(invalid("precision must be at least 64 bits"));
    }
    if cfg.truncation < 10 {
        return Err(invalid("truncation must be at least 10"));
    }
    if cfg.threads == 0 {
        return Err(invalid("thread count must be positive"));
    }
    let out = match &cli.command {
        Command::InvariantVector { d1, d2, n, check } => {
            let p = build_phin(*d1, *d2, *n)?;
            let support: Vec<Value> = p
                .support_coords()
                .into_iter()
                .map(|(el, re, im)| json!({"element": el, "re": re, "im": im}))
                .collect();
            let mut obj = Map::new();
            obj.insert("D1".into(), json!(d1));
            obj.insert("D2".into(), json!(d2));
            obj.insert("N".into(), json!(n));
            obj.insert("module_order".into(), json!(p.report.module_order));
            obj.insert("support".into(), Value::Array(support));
            if *check {
                let (s, t) = p.invariance_residuals()?;
                obj.insert("residual_S".into(), json!(s));
                obj.insert("residual_T".into(), json!(t));
                obj.insert("report".into(), serde_json::to_value(&p.report).expect("serializable"));
            }
            Value::Object(obj)
        }
        Command::ShintaniLift { newform, twist, m_list, tol } => {
            let g = load_newform(newform, cfg.truncation)?;
            if m_list.is_empty() {
                return Err(invalid("--m-list is empty"));
            }
            let rows: Vec<Value> = m_list
                .iter()
                .map(|&m| {
                    let t = twisted_trace(&g, *twist, m, *tol)?;
                    Ok(json!({"m": m, "twist": twist, "value_re": t.value.re, "value_im": t.value.im, "error": t.error_bound}))
                })
                .collect::<Result<_, Error>>()?;
            Value::Array(rows)
        }
        Command::LfuncEval { newform, d1, d2, n, n3, s, tol } => {
            let g = load_newform(newform, cfg.truncation)?;
            let s = parse_complex(s)?;
            let r = rankin_selberg_L(&g, *n3, *n, *d1, *d2, s, *tol)?;
            let factors: Map<String, Value> = r.factors.iter().map(|(k, v)| (k.clone(), cplx(*v))).collect();
            json!({
                "s_re": s.re,
                "s_im": s.im,
                "value_re": r.value.value.re,
                "value_im": r.value.value.im,
                "error": r.value.error_bound,
                "fricke": r.fricke,
                "factors": factors,
            })
        }
        Command::CmNorm { n, d1, d2 } => {
            let cert = cm_norm(*n, *d1, *d2, cfg.prec)?;
            serde_json::to_value(&cert).expect("serializable")
        }
        Command::Green { s, n, z1, z2, cutoff, principal } => {
            let s = parse_complex(s)?;
            let z1 = parse_complex(z1)?;
            let z2 = parse_complex(z2)?;
            let g = if principal.is_empty() {
                green_GN(s, *n, z1, z2, *cutoff)?
            } else {
                let pp: Vec<(u64, i64)> = principal
                    .iter()
                    .map(|t| {
                        let (m, cm) = t.split_once(':').ok_or_else(|| invalid(format!("expected m:c, got '{t}'")))?;
                        let m = m.trim().parse().map_err(|_| invalid(format!("bad index '{m}'")))?;
                        let cm = cm.trim().parse().map_err(|_| invalid(format!("bad coefficient '{cm}'")))?;
                        Ok((m, cm))
                    })
                    .collect::<Result<_, Error>>()?;
                if s.im != 0.0 || s.re.fract() != 0.0 || s.re < 2.0 {
                    return Err(invalid("G_{k,f} needs an integer k = s > 1"));
                }
                green_Gkf(s.re as u32, &pp, *n, z1, z2, *cutoff)?
            };
            json!({"value_re": g.value.re, "value_im": g.value.im, "tail_bound": g.tail_bound, "terms": g.terms})
        }
        Command::Verify { criteria, json } => {
            let ids: Vec<u32> = if criteria.is_empty() { (1..=verify::CRITERIA).collect() } else { criteria.clone() };
            if let Some(bad) = ids.iter().find(|&&i| i == 0 || i > verify::CRITERIA) {
                return Err(invalid(format!("no criterion {bad}")));
            }
            let mut results = Vec::new();
            for id in ids {
                let r = verify::run(id);
                if !*json {
                    println!("{}", verify::format_line(&r));
                }
                results.push(r);
            }
            let failed = results.iter().filter(|r| !r.passed).count();
            if *json {
                let v = serde_json::to_value(&results).expect("serializable");
                emit(cfg, &v)?;
            }
            if failed > 0 {
                eprintln!("{failed} criteria failed");
                std::process::exit(1);
            }
            return Ok(None);
        }
    };
    Ok(Some(out))
}

fn emit(cfg: &RunConfig, v: &Value) -> Result<(), Error> {
    let text = serde_json::to_string_pretty(v).expect("serializable");
    match &cfg.output {
        Some(p) => std::fs::write(p, text + "\n").map_err(|e| invalid(format!("writing {}: {e}", p.display()))),
        None => {
            let mut out = std::io::stdout().lock();
            match writeln!(out, "{text}") {
                Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(invalid(format!("stdout: {e}"))),
                _ => Ok(()),
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli).and_then(|v| v.map_or(Ok(()), |v| emit(&cli.config, &v))) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
