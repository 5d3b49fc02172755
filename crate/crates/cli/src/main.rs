use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use km_core::exact_algebra::{q, qstr};
use km_core::km_pipeline::{cross_checks, verify};
use km_core::lattice_enum::{enumerate_lprime_classes, mass_check_all};
use km_core::local_density::{alpha_auto, alpha_bruteforce};
use km_core::modular_forms::{
    cohen_eisenstein, delta_qexp, eisenstein_qexp, jacobi_cusp, jacobi_eisenstein, lift_inputs, Variant,
};
use km_core::padic_forms::{is_p_integral, val, QMat};
use km_core::siegel_series::{
    f_reps, ftilde1, ftilde_symmetry_check, iota_numerator_check, local_grid, k_relation_check, q_reduction_checks,
    p_closed_check, zeta_checks,
};

#[derive(Parser)]
#[command(name = "km", version, about = "Exact checks for local Siegel series, local densities and Dirichlet series of lifts")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
    #[command(flatten)]
    out: OutputOpts,
}

#[derive(Args)]
struct OutputOpts {
    /// Write the JSON result to this file instead of stdout
    #[arg(long, global = true)]
    json: Option<PathBuf>,
    /// Output format on stdout
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Worker threads (default: all cores)
    #[arg(long, global = true)]
    jobs: Option<usize>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Text,
    Csv,
}

#[derive(Clone, Copy, ValueEnum)]
enum VariantArg {
    Cusp,
    Eisenstein,
}

impl From<VariantArg> for Variant {
    fn from(v: VariantArg) -> Variant {
        match v {
            VariantArg::Cusp => Variant::Cusp,
            VariantArg::Eisenstein => Variant::Eisenstein,
        }
    }
}

#[derive(Subcommand)]
enum Cmd {
    /// Run a verification and exit 1 on any mismatch
    Verify {
        #[command(subcommand)]
        what: VerifyCmd,
    },
    /// Positive definite L'-classes of degree m with index <= nmax
    Classes {
        #[arg(long, default_value_t = 1)]
        m: usize,
        #[arg(long, default_value_t = 10)]
        nmax: u64,
    },
    /// Local density alpha_p(B, B) of an integral symmetric matrix
    Density {
        /// Matrix as JSON, e.g. "[[2,1],[1,2]]"
        #[arg(long)]
        matrix: String,
        #[arg(long)]
        p: u64,
        /// Also count solutions modulo p^level
        #[arg(long)]
        brute: Option<u32>,
    },
    /// Coefficients of F~^(1)(B, X) for an integral matrix B of degree n-1
    Siegel {
        #[arg(long)]
        matrix: String,
        #[arg(long)]
        p: u64,
        #[arg(long)]
        n: usize,
    },
    /// Coefficient tables of the modular forms used as inputs
    Qexp {
        #[arg(long, value_enum)]
        what: QexpWhat,
        #[arg(long, default_value_t = 20)]
        nmax: u64,
        /// Weight (eis), r (cohen) or Jacobi weight (jacobi)
        #[arg(long, default_value_t = 4)]
        k: u32,
        /// Degree for --what h
        #[arg(long, default_value_t = 4)]
        n: usize,
        #[arg(long, value_enum, default_value_t = VariantArg::Cusp)]
        variant: VariantArg,
        /// Jacobi cusp form instead of Eisenstein series
        #[arg(long)]
        cusp: bool,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum QexpWhat {
    Delta,
    Eis,
    Cohen,
    Jacobi,
    H,
}

#[derive(Subcommand)]
enum VerifyCmd {
    /// The main identity: class sum vs both closed forms
    Main {
        #[arg(long, default_value_t = 4)]
        n: usize,
        #[arg(long, default_value_t = 8)]
        k: usize,
        #[arg(long, default_value_t = 50)]
        nmax: u64,
        #[arg(long, value_enum, default_value_t = VariantArg::Cusp)]
        variant: VariantArg,
    },
    /// Local grid: closed forms of P and K, F~ symmetry, zeta forms, iota numerator
    Local {
        /// Restrict to one prime (default 2, 3, 5)
        #[arg(long)]
        p: Option<u64>,
        /// Restrict to one n (default 2, 4)
        #[arg(long)]
        n: Option<usize>,
        #[arg(long, default_value_t = 8)]
        order: i32,
    },
    /// Reduction identities for Q with constant H
    Reductions {
        #[arg(long, default_value_t = 3)]
        p: u64,
        #[arg(long, default_value_t = 4)]
        m: usize,
        #[arg(long, default_value_t = 8)]
        order: i64,
    },
    /// Mass identity over all genera of degree n-1 with det <= dmax
    Mass {
        #[arg(long, default_value_t = 4)]
        n: usize,
        #[arg(long, default_value_t = 200)]
        dmax: i64,
    },
    /// Shimura proportionality and the Dirichlet-series identity for h
    Cross {
        #[arg(long, default_value_t = 4)]
        n: usize,
        #[arg(long, default_value_t = 8)]
        k: usize,
        #[arg(long, value_enum, default_value_t = VariantArg::Cusp)]
        variant: VariantArg,
        #[arg(long, default_value_t = 20)]
        count: u64,
        #[arg(long, default_value_t = 200)]
        nmax: u64,
    },
}

enum Failure {
    Usage(String),
    Mismatch(Value),
}

fn parse_matrix(s: &str) -> Result<QMat, Failure> {
    let rows: Vec<Vec<i64>> = serde_json::from_str(s).map_err(|e| Failure::Usage(format!("bad matrix: {e}")))?;
    let m = rows.len();
    if m == 0 || rows.iter().any(|r| r.len() != m) {
        return Err(Failure::Usage("matrix must be square and nonempty".into()));
    }
    for i in 0..m {
        for j in 0..m {
            if rows[i][j] != rows[j][i] {
                return Err(Failure::Usage("matrix must be symmetric".into()));
            }
        }
    }
    Ok(rows.iter().map(|r| r.iter().map(|x| q(*x)).collect()).collect())
}

fn checked(ok: bool, v: Value) -> Result<Value, Failure> {
    if ok {
        Ok(v)
    } else {
        Err(Failure::Mismatch(v))
    }
}

fn run_verify(what: VerifyCmd) -> Result<Value, Failure> {
    match what {
        VerifyCmd::Main { n, k, nmax, variant } => {
            let r = verify(n, k, nmax, variant.into()).map_err(|e| Failure::Usage(e.to_string()))?;
            eprintln!("verify main: {:.2}s", r.seconds);
            checked(r.all_ok, r.to_json())
        }
        VerifyCmd::Local { p, n, order } => {
            let ps: Vec<u64> = p.map(|x| vec![x]).unwrap_or_else(|| vec![2, 3, 5]);
            let ns: Vec<usize> = n.map(|x| vec![x]).unwrap_or_else(|| vec![2, 4]);
            if ps.iter().any(|x| ![2, 3, 5].contains(x)) || ns.iter().any(|x| ![2, 4].contains(x)) {
                return Err(Failure::Usage("local grid supports p in {2,3,5} and n in {2,4}".into()));
            }
            let mut rows = Vec::new();
            let mut ok = true;
            for pr in local_grid(order).into_iter().filter(|x| ps.contains(&x.p) && ns.contains(&x.n)) {
                let a = p_closed_check(&pr).map_err(|e| Failure::Usage(e.to_string()))?;
                let b = k_relation_check(&pr).map_err(|e| Failure::Usage(e.to_string()))?;
                ok &= a && b;
                rows.push(json!({"n": pr.n, "p": pr.p, "d0": qstr(&pr.d0), "l": pr.l, "p_closed": a, "k_relation": b}));
            }
            let mut sym = Vec::new();
            for &nn in &ns {
                for &pp in &ps {
                    let (c, s) = ftilde_symmetry_check(nn, pp, 6).map_err(|e| Failure::Usage(e.to_string()))?;
                    ok &= s;
                    sym.push(json!({"n": nn, "p": pp, "classes": c, "symmetric": s}));
                }
            }
            let zeta: Vec<(String, bool)> = zeta_checks(order as i64)
                .into_iter()
                .filter(|(name, _)| ps.iter().any(|pp| name.starts_with(&format!("p={pp} "))))
                .collect();
            ok &= zeta.iter().all(|x| x.1);
            let mut numer = Vec::new();
            if ns.contains(&4) {
                for &pp in &ps {
                    for d0 in f_reps(pp).into_iter().filter(|d| val(d, pp) == 0) {
                        let r = iota_numerator_check(pp, &d0, order).map_err(|e| Failure::Usage(e.to_string()))?;
                        ok &= r;
                        numer.push(json!({"p": pp, "d0": qstr(&d0), "ok": r}));
                    }
                }
            }
            let zeta_json: Vec<Value> = zeta.iter().map(|(n, b)| json!({"check": n, "ok": b})).collect();
            checked(ok, json!({"ok": ok, "order": order, "rows": rows, "symmetry": sym, "zeta": zeta_json, "iota_numerator": numer}))
        }
        VerifyCmd::Reductions { p, m, order } => {
            if m != 4 || ![2, 3].contains(&p) {
                return Err(Failure::Usage("reductions supports m = 4 and p in {2,3}".into()));
            }
            let r = q_reduction_checks(m, p, order);
            let ok = r.iter().all(|x| x.1);
            let rows: Vec<Value> = r.iter().map(|(n, b)| json!({"check": n, "ok": b})).collect();
            checked(ok, json!({"ok": ok, "p": p, "m": m, "order": order, "rows": rows}))
        }
        VerifyCmd::Mass { n, dmax } => {
            let r = mass_check_all(n, dmax).map_err(|e| Failure::Usage(e.to_string()))?;
            let ok = r.iter().all(|x| x.ok);
            checked(ok, json!({"ok": ok, "n": n, "dmax": dmax, "genera": r.len(), "rows": r}))
        }
        VerifyCmd::Cross { n, k, variant, count, nmax } => {
            let r = cross_checks(n, k, variant.into(), count, nmax).map_err(|e| Failure::Usage(e.to_string()))?;
            checked(r.ok(), r.to_json())
        }
    }
}

fn qexp(what: QexpWhat, nmax: u64, k: u32, n: usize, variant: VariantArg, cusp: bool) -> Result<Value, Failure> {
    let usage = |e: km_core::modular_forms::ModularError| Failure::Usage(e.to_string());
    Ok(match what {
        QexpWhat::Delta => delta_qexp(nmax).to_json(),
        QexpWhat::Eis => eisenstein_qexp(k, nmax).map_err(usage)?.to_json(),
        QexpWhat::Cohen => {
            if k < 2 {
                return Err(Failure::Usage("cohen needs --k >= 2".into()));
            }
            cohen_eisenstein(k, nmax).to_json()
        }
        QexpWhat::Jacobi => {
            let rows = nmax / 4 + 1;
            if cusp { jacobi_cusp(k, rows) } else { jacobi_eisenstein(k, rows) }.map_err(usage)?.to_json()
        }
        QexpWhat::H => {
            let inp = lift_inputs(n, k as usize, variant.into(), nmax, nmax).map_err(usage)?;
            json!({"h": inp.h.to_json(), "f": inp.f.to_json()})
        }
    })
}

fn run(cmd: Cmd) -> Result<Value, Failure> {
    match cmd {
        Cmd::Verify { what } => run_verify(what),
        Cmd::Classes { m, nmax } => {
            if !(1..=3).contains(&m) {
                return Err(Failure::Usage("classes supports m in 1..=3".into()));
            }
            let cl = enumerate_lprime_classes(m + 1, nmax).map_err(|e| Failure::Usage(e.to_string()))?;
            let rows: Vec<Value> = cl
                .iter()
                .map(|c| json!({"gram": c.class.gram, "e": c.class.e, "index": c.index, "witness": c.witness}))
                .collect();
            Ok(json!({"m": m, "nmax": nmax, "count": rows.len(), "rows": rows}))
        }
        Cmd::Density { matrix, p, brute } => {
            let b = parse_matrix(&matrix)?;
            if !km_core::padic_forms::is_prime(p) || !is_p_integral(&b, p) {
                return Err(Failure::Usage("p must be prime and B integral".into()));
            }
            let auto = alpha_auto(&b, p);
            let mut out = json!({"p": p, "auto": auto.to_json()});
            if let Some(level) = brute {
                let r = alpha_bruteforce(&b, &b, p, level).map_err(|e| Failure::Usage(e.to_string()))?;
                out["bruteforce"] = r.to_json();
            }
            Ok(out)
        }
        Cmd::Siegel { matrix, p, n } => {
            let b = parse_matrix(&matrix)?;
            if b.len() + 1 != n || n % 2 == 1 {
                return Err(Failure::Usage("need an even n with B of degree n-1".into()));
            }
            let f = ftilde1(&b, p, n).map_err(|e| Failure::Usage(e.to_string()))?;
            Ok(json!({"p": p, "n": n, "ftilde": f.to_json(), "symmetric": f.is_symmetric()}))
        }
        Cmd::Qexp { what, nmax, k, n, variant, cusp } => qexp(what, nmax, k, n, variant, cusp),
    }
}

fn flatten(prefix: &str, v: &Value, out: &mut Vec<(String, String)>) {
    match v {
        Value::Object(m) => {
            for (k, x) in m {
                let p = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                flatten(&p, x, out);
            }
        }
        Value::Array(a) => {
            for (i, x) in a.iter().enumerate() {
                flatten(&format!("{prefix}[{i}]"), x, out);
            }
        }
        Value::String(s) => out.push((prefix.to_string(), s.clone())),
        _ => out.push((prefix.to_string(), v.to_string())),
    }
}

fn render(v: &Value, format: Format) -> String {
    match format {
        Format::Json => serde_json::to_string_pretty(v).unwrap(),
        Format::Text => {
            let mut kv = Vec::new();
            flatten("", v, &mut kv);
            kv.iter().map(|(k, x)| format!("{k} = {x}")).collect::<Vec<_>>().join("\n")
        }
        Format::Csv => match v.get("rows").and_then(|r| r.as_array()) {
            Some(rows) if rows.iter().all(|r| r.is_object()) && !rows.is_empty() => {
                let cols: Vec<String> = rows[0].as_object().unwrap().keys().cloned().collect();
                let mut lines = vec![cols.join(",")];
                for r in rows {
                    let cells: Vec<String> = cols
                        .iter()
                        .map(|c| match &r[c] {
                            Value::String(s) => s.clone(),
                            x => x.to_string().replace(',', ";"),
                        })
                        .collect();
                    lines.push(cells.join(","));
                }
                lines.join("\n")
            }
            _ => {
                let mut kv = Vec::new();
                flatten("", v, &mut kv);
                std::iter::once("key,value".to_string())
                    .chain(kv.iter().map(|(k, x)| format!("{k},{x}")))
                    .collect::<Vec<_>>()
                    .join("\n")
            }
        },
    }
}

fn emit(v: &Value, out: &OutputOpts) -> Result<(), String> {
    match &out.json {
        Some(path) => std::fs::write(path, serde_json::to_string_pretty(v).unwrap() + "\n")
            .map_err(|e| format!("cannot write {}: {e}", path.display())),
        None => {
            println!("{}", render(v, out.format));
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(j) = cli.out.jobs {
        if j == 0 {
            eprintln!("error: --jobs must be positive");
            return ExitCode::from(2);
        }
        rayon::ThreadPoolBuilder::new().num_threads(j).build_global().expect("thread pool");
    }
    match run(cli.cmd) {
        Ok(v) => match emit(&v, &cli.out) {
            Ok(()) => ExitCode::SUCCESS,
            Err(e) => {
                eprintln!("error: {e}");
                ExitCode::from(2)
            }
        },
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Mismatch(v)) => {
            let _ = emit(&v, &cli.out);
            eprintln!("verification failed");
            ExitCode::from(1)
        }
    }
}
