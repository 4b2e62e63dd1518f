use std::io::Write;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use cuspmf::convert::{band_from_loop, band_to_loop, Conversion};
use cuspmf::freegroup::{conjugate_equal, cyclic_reduce, from_loop_word, is_essential};
use cuspmf::mfcore::{
    det_check, match_geometric_to_canonical, theta_catalogue, unit_pivot_reduce, MatrixFactorization, Side, ThetaParams,
};
use cuspmf::modres::trace_resolution;
use cuspmf::ring::{Poly, PolyMatrix, Var};
use cuspmf::strips::{enumerate_strips, Start};
use cuspmf::t32::{ar_check, ar_pair, build_t32, verify_t32};
use cuspmf::words::{normalize_traced, BandDatum, CyclicWord, LoopDatum, Unit, WordKind};
use cuspmf::{mfcore, Error};

#[derive(Parser)]
#[command(name = "cuspmf", version, about = "Matrix factorizations of xyz and x^3+y^2+xyz from band and loop words")]
struct Cli {
    /// Emit JSON instead of text.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Band word <-> normal loop word.
    Convert {
        #[command(subcommand)]
        dir: ConvertDir,
    },
    /// Normal form of a loop word.
    Normalize {
        #[arg(long, allow_hyphen_values = true)]
        word: String,
        /// List each rewrite.
        #[arg(long)]
        trace: bool,
    },
    /// Homotopy equivalence of two loop words.
    Equiv {
        #[arg(long, allow_hyphen_values = true)]
        word: String,
        #[arg(long, allow_hyphen_values = true)]
        other: String,
    },
    /// Matrix factorizations.
    Mf {
        #[command(subcommand)]
        op: MfOp,
    },
    /// Run the Macaulayfication pipeline on a band word.
    Resolve {
        #[arg(long, allow_hyphen_values = true)]
        word: String,
        #[arg(long, default_value = "1,1", allow_hyphen_values = true)]
        lambda: String,
        /// Print every stage.
        #[arg(long)]
        trace: bool,
        /// Include the stage presentations in JSON.
        #[arg(long)]
        full: bool,
    },
    /// Enumerate polygons from a start point.
    Strips {
        #[arg(long, allow_hyphen_values = true)]
        word: String,
        #[arg(long, value_enum, default_value = "p")]
        start: StartArg,
        #[arg(long, default_value_t = 40)]
        max_len: usize,
    },
    /// The x^3+y^2+xyz family.
    T32 {
        #[arg(long)]
        m: i64,
        #[arg(long, default_value = "1,1", allow_hyphen_values = true)]
        lambda: String,
        /// Verify products, presentation and AR swap.
        #[arg(long)]
        check: bool,
        /// Which pair to print: J (mirror pair) or I (swapped AR pair).
        #[arg(long, value_enum, ignore_case = true)]
        presentation: Option<PresArg>,
    },
}

#[derive(Subcommand)]
enum ConvertDir {
    BandToLoop {
        #[arg(long, allow_hyphen_values = true)]
        word: String,
        #[arg(long, default_value = "1,1", allow_hyphen_values = true)]
        lambda: String,
    },
    LoopToBand {
        #[arg(long, allow_hyphen_values = true)]
        word: String,
        #[arg(long, default_value = "1,1", allow_hyphen_values = true)]
        holonomy: String,
    },
}

#[derive(Subcommand)]
enum MfOp {
    /// Canonical φ(w', λ) and ψ̃.
    Canonical {
        #[arg(long, allow_hyphen_values = true)]
        word: String,
        #[arg(long, default_value = "1,1", allow_hyphen_values = true)]
        lambda: String,
        #[arg(long)]
        check: bool,
    },
    /// Geometric matrix M_L.
    Geometric {
        #[arg(long, allow_hyphen_values = true)]
        word: String,
        #[arg(long, default_value = "1,1", allow_hyphen_values = true)]
        holonomy: String,
        /// Match against the canonical form by sign diagonals (holonomy read as λ).
        #[arg(long = "match")]
        match_: bool,
    },
    /// Remove a unit pivot from a factorization read from a JSON file.
    Reduce(ReduceArgs),
    /// Rank-one catalogue entry θ_i.
    Theta {
        #[arg(long)]
        index: usize,
        /// "p,q" for θ1..θ3 or "m,n,l" for θ4..θ7.
        #[arg(long, allow_hyphen_values = true)]
        params: String,
        #[arg(long, default_value = "1,1", allow_hyphen_values = true)]
        lambda: String,
        /// Images of (u, v, w), e.g. "xyz" or "zxy".
        #[arg(long, default_value = "xyz")]
        vars: String,
    },
}

#[derive(Args)]
struct ReduceArgs {
    /// JSON object with "phi", "psi" and optional "potential", "scale".
    #[arg(long = "in")]
    input: String,
    /// 1-based pivot row.
    #[arg(long)]
    row: usize,
    /// 1-based pivot column.
    #[arg(long)]
    col: usize,
    #[arg(long, value_enum, default_value = "phi")]
    side: SideArg,
    /// Truncation degree for non-constant pivots (default CUSPMF_TRUNC or 12).
    #[arg(long)]
    trunc: Option<u32>,
}

#[derive(Clone, Copy, ValueEnum)]
enum StartArg {
    P,
    Q,
    R,
}

#[derive(Clone, Copy, ValueEnum)]
enum SideArg {
    Phi,
    Psi,
}

#[derive(Clone, Copy, ValueEnum)]
enum PresArg {
    J,
    I,
}

enum Failure {
    Input(String),
    Check(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::StageCheckFailed(_) | Error::Inconsistent(_) => Failure::Check(e.to_string()),
            _ => Failure::Input(e.to_string()),
        }
    }
}

/// Result text/JSON plus whether every requested check passed.
struct Output {
    text: String,
    json: Value,
    ok: bool,
}

impl Output {
    fn ok(text: String, json: Value) -> Self {
        Self { text, json, ok: true }
    }
}

fn parse_word(s: &str, kind: WordKind) -> Result<CyclicWord, Failure> {
    Ok(CyclicWord::parse(s, kind)?)
}

fn parse_unit(s: &str) -> Result<Unit, Failure> {
    Ok(Unit::parse(s)?)
}

fn trunc_default() -> Result<u32, Failure> {
    match std::env::var("CUSPMF_TRUNC") {
        Ok(v) => v.trim().parse().map_err(|_| Failure::Input(format!("CUSPMF_TRUNC is not a degree: {:?}", v))),
        Err(_) => Ok(12),
    }
}

fn conversion_json(c: &Conversion) -> Value {
    json!({
        "band": c.band.to_json(),
        "loop": c.loop_datum.to_json(),
        "sign_word": c.sign_word,
        "correction_word": c.correction_word,
        "sign_exponent": c.sign_exponent,
    })
}

fn join<T: ToString>(v: &[T]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}

fn conversion_text(c: &Conversion) -> String {
    format!(
        "band word       {}\nsign word       {}\ncorrection word {}\nloop word       {}\nλ (band)        {}\nλ' (loop)       {}\n",
        c.band.word,
        join(&c.sign_word),
        join(&c.correction_word),
        c.loop_datum.word,
        c.band.eigenvalue,
        c.loop_datum.holonomy,
    )
}

fn run(cli: &Cli) -> Result<Output, Failure> {
    match &cli.cmd {
        Cmd::Convert { dir } => match dir {
            ConvertDir::BandToLoop { word, lambda } => {
                let b = BandDatum::new(parse_word(word, WordKind::Band)?, parse_unit(lambda)?);
                if b.is_degenerate() {
                    return Err(Failure::Input("band datum (0,0,0) with λ = 1 is degenerate".into()));
                }
                let c = band_to_loop(&b);
                Ok(Output::ok(conversion_text(&c), conversion_json(&c)))
            }
            ConvertDir::LoopToBand { word, holonomy } => {
                let l = LoopDatum::new(parse_word(word, WordKind::Loop)?, parse_unit(holonomy)?);
                let c = band_from_loop(&l)?;
                Ok(Output::ok(conversion_text(&c), conversion_json(&c)))
            }
        },
        Cmd::Normalize { word, trace } => {
            let w = parse_word(word, WordKind::Loop)?;
            let (n, steps) = normalize_traced(&w)?;
            let n = n.canonical_shift();
            let mut text = String::new();
            if *trace {
                for s in &steps {
                    text.push_str(&format!("{:<10} {} -> {}\n", s.rule, join(&s.before), join(&s.after)));
                }
            }
            text.push_str(&format!("{}\n", n));
            let rewrites: Vec<Value> =
                steps.iter().map(|s| json!({"rule": s.rule, "before": s.before, "after": s.after})).collect();
            Ok(Output::ok(text, json!({"input": w.to_json(), "normal": n.to_json(), "rewrites": rewrites})))
        }
        Cmd::Equiv { word, other } => {
            let a = parse_word(word, WordKind::Loop)?;
            let b = parse_word(other, WordKind::Loop)?;
            let (fa, fb) = (from_loop_word(&a), from_loop_word(&b));
            let conj = conjugate_equal(&fa, &fb);
            let normal = if is_essential(&a) && is_essential(&b) {
                let (na, _) = normalize_traced(&a)?;
                let (nb, _) = normalize_traced(&b)?;
                Some(na.is_shift_of(&nb))
            } else {
                None
            };
            let text = format!(
                "free group: {} ~ {} : {}\nnormal forms agree: {}\n",
                cyclic_reduce(&fa),
                cyclic_reduce(&fb),
                conj,
                normal.map_or("n/a (not essential)".to_string(), |b| b.to_string())
            );
            let consistent = normal.map_or(true, |n| n == conj);
            let json = json!({
                "conjugate_equal": conj,
                "normal_forms_agree": normal,
                "cyclic_reductions": [cyclic_reduce(&fa).to_string(), cyclic_reduce(&fb).to_string()],
            });
            Ok(Output { text, json, ok: consistent })
        }
        Cmd::Mf { op } => run_mf(op),
        Cmd::Resolve { word, lambda, trace, full } => {
            let w = parse_word(word, WordKind::Band)?;
            let t = trace_resolution(&w, &parse_unit(lambda)?)?;
            let mut text = format!("band word {}\nloop word {}\n", t.band, t.loop_word);
            if *trace {
                for s in &t.stages {
                    text.push_str(&format!(
                        "{:<16} {}x{}  {}\n",
                        s.name,
                        s.presentation.rows.len(),
                        s.presentation.cols.len(),
                        if s.ok() { "ok" } else { "FAILED" }
                    ));
                    for (c, b) in s.checks.iter().filter(|(_, b)| !b) {
                        text.push_str(&format!("    {}: {}\n", c, b));
                    }
                }
            }
            text.push_str(&format!("endpoint:\n{}", t.endpoint.pretty()));
            for f in t.failures() {
                text.push_str(&format!("FAILED {}\n", f));
            }
            Ok(Output { text, json: t.to_json(*full), ok: t.ok() })
        }
        Cmd::Strips { word, start, max_len } => {
            let w = parse_word(word, WordKind::Loop)?;
            let s = match start {
                StartArg::P => Start::P,
                StartArg::Q => Start::Q,
                StartArg::R => Start::R,
            };
            let hits = enumerate_strips(&w, s, *max_len)?;
            let mut text = String::new();
            for h in &hits {
                text.push_str(&format!("{} {:<10} {:?}  {}\n", h.end, h.monomial.to_string(), h.sequence.orientation, h.sequence));
            }
            Ok(Output::ok(text, json!(hits.iter().map(|h| h.to_json()).collect::<Vec<_>>())))
        }
        Cmd::T32 { m, lambda, check, presentation } => {
            let l = parse_unit(lambda)?;
            let t = build_t32(*m, &l)?;
            let mut text = String::new();
            let mut js = t.to_json();
            match presentation {
                Some(PresArg::I) => {
                    let (q1, q2) = ar_pair(*m, &l)?;
                    text.push_str(&format!("I pair (x^3+y^2-xyz), first factor:\n{}second factor:\n{}", q2.pretty(), q1.pretty()));
                    js["I"] = json!({"first": q2.pretty(), "second": q1.pretty()});
                }
                _ => {
                    text.push_str(&format!("P1:\n{}P2:\n{}r = {}\n", t.p1.pretty(), t.p2.pretty(), t.r));
                }
            }
            let mut ok = true;
            if *check {
                let c = verify_t32(*m, &l)?;
                let ar = match &c.ar {
                    Some(a) => a.clone(),
                    None => ar_check(*m, &l)?,
                };
                text.push_str(&format!(
                    "P1P2 = P2P1 = W·I: {}\nJ row cofactor: {} ({})\nAR swap: {}\n",
                    c.convention.map_or("FAILED under both conventions".to_string(), |v| format!("OK for {}", v.name())),
                    c.cofactor.as_ref().map_or("none".to_string(), |x| x.to_string()),
                    if c.cofactor_matches { "OK" } else { "MISMATCH" },
                    if ar.ok() { "OK" } else { "FAILED" },
                ));
                ok = c.ok() && ar.ok();
                js["check"] = c.to_json();
                js["check"]["ar_ok"] = json!(ar.ok());
            }
            Ok(Output { text, json: js, ok })
        }
    }
}

fn run_mf(op: &MfOp) -> Result<Output, Failure> {
    match op {
        MfOp::Canonical { word, lambda, check } => {
            let w = parse_word(word, WordKind::Loop)?;
            let l = parse_unit(lambda)?;
            let mf = MatrixFactorization::canonical(&w, &l);
            let mut text = format!("phi:\n{}psi~:\n{}u = {}\n", mf.phi.pretty(), mf.psi.pretty(), mf.scale);
            let mut js = json!({"phi": mf.phi.to_json(), "psi": mf.psi.to_json(), "u": mf.scale.to_json()});
            let mut ok = true;
            if *check {
                let d = det_check(&w, &l);
                let tau = w.tau() as u32;
                let status = |b: bool| if b { "OK" } else { "FAILED" };
                text.push_str(&format!(
                    "det = {}({}): {}\nadj = {}·psi~: {}\n",
                    Poly::mono([tau, tau, tau]),
                    mf.scale,
                    status(d.det_ok),
                    Poly::mono([tau - 1, tau - 1, tau - 1]),
                    status(d.adj_ok)
                ));
                if !d.det_ok {
                    text.push_str(&format!("  got      {}\n  expected {}\n", d.det, d.expected_det));
                }
                ok = d.det_ok && d.adj_ok && d.closed_form_ok;
                js["check"] = json!({"det_ok": d.det_ok, "adj_ok": d.adj_ok, "closed_form_ok": d.closed_form_ok});
            }
            Ok(Output { text, json: js, ok })
        }
        MfOp::Geometric { word, holonomy, match_ } => {
            let w = parse_word(word, WordKind::Loop)?;
            let h = parse_unit(holonomy)?;
            if *match_ {
                let m = match_geometric_to_canonical(&w, &h)?;
                let text = format!(
                    "holonomy λ' = {}\nM_L:\n{}canonical:\n{}row signs {:?}\ncol signs {:?}\n",
                    m.holonomy,
                    m.geometric.pretty(),
                    m.canonical.pretty(),
                    m.signs.left,
                    m.signs.right
                );
                let js = json!({
                    "holonomy": m.holonomy.to_json(),
                    "geometric": m.geometric.to_json(),
                    "canonical": m.canonical.to_json(),
                    "row_signs": m.signs.left,
                    "col_signs": m.signs.right,
                });
                Ok(Output::ok(text, js))
            } else {
                let g = mfcore::geometric_matrix(&LoopDatum::new(w, h))?;
                Ok(Output::ok(g.pretty(), g.to_json()))
            }
        }
        MfOp::Reduce(a) => {
            let raw = std::fs::read_to_string(&a.input).map_err(|e| Failure::Input(format!("{}: {}", a.input, e)))?;
            let v: Value = serde_json::from_str(&raw).map_err(|e| Failure::Input(format!("{}: {}", a.input, e)))?;
            let field = |k: &str| v.get(k).ok_or_else(|| Failure::Input(format!("missing field {:?}", k)));
            let phi = PolyMatrix::from_json(field("phi")?)?;
            let psi = PolyMatrix::from_json(field("psi")?)?;
            let potential = match v.get("potential") {
                Some(p) => Poly::from_json(p)?,
                None => Poly::xyz(),
            };
            let scale = match v.get("scale") {
                Some(p) => Poly::from_json(p)?,
                None => Poly::one(),
            };
            if a.row == 0 || a.col == 0 || a.row > phi.rows || a.col > phi.cols {
                return Err(Failure::Input(format!("pivot ({}, {}) outside a {}x{} matrix", a.row, a.col, phi.rows, phi.cols)));
            }
            let mf = MatrixFactorization::new(phi, psi, potential, scale);
            let trunc = match a.trunc {
                Some(t) => t,
                None => trunc_default()?,
            };
            let side = match a.side {
                SideArg::Phi => Side::Phi,
                SideArg::Psi => Side::Psi,
            };
            let r = unit_pivot_reduce(&mf, (a.row - 1, a.col - 1), side, trunc)?;
            let valid = r.mf.verify()?;
            let text = format!(
                "pivot kind {:?}\nphi:\n{}psi:\n{}scale = {}\nfactorization check: {}\n",
                r.kind,
                r.mf.phi.pretty(),
                r.mf.psi.pretty(),
                r.mf.scale,
                if valid { "OK" } else { "FAILED" }
            );
            let js = json!({
                "kind": format!("{:?}", r.kind),
                "phi": r.mf.phi.to_json(),
                "psi": r.mf.psi.to_json(),
                "scale": r.mf.scale.to_json(),
                "valid": valid,
            });
            Ok(Output { text, json: js, ok: valid })
        }
        MfOp::Theta { index, params, lambda, vars } => {
            let nums: Vec<u32> = params
                .split(',')
                .map(|t| t.trim().parse().map_err(|_| Failure::Input(format!("bad parameter {:?}", t))))
                .collect::<Result<_, _>>()?;
            let p = match nums.as_slice() {
                [p, q] => ThetaParams::Two { p: *p, q: *q },
                [m, n, l] => ThetaParams::Three { m: *m, n: *n, l: *l },
                _ => return Err(Failure::Input("params must be p,q or m,n,l".into())),
            };
            let vs: Vec<Var> = vars
                .chars()
                .map(|c| match c {
                    'x' => Ok(Var::X),
                    'y' => Ok(Var::Y),
                    'z' => Ok(Var::Z),
                    _ => Err(Failure::Input(format!("bad variable {:?}", c))),
                })
                .collect::<Result<_, _>>()?;
            let vs: [Var; 3] = vs.try_into().map_err(|_| Failure::Input("vars needs three letters".into()))?;
            let m = theta_catalogue(*index, &p, &parse_unit(lambda)?, vs)?;
            Ok(Output::ok(m.pretty(), m.to_json()))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(out) => {
            let mut stdout = std::io::stdout().lock();
            // a closed pipe is not an error of the command
            let _ = if cli.json {
                writeln!(stdout, "{}", serde_json::to_string_pretty(&out.json).expect("json"))
            } else {
                write!(stdout, "{}", out.text)
            };
            if out.ok {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(Failure::Input(m)) => {
            eprintln!("error: {}", m);
            ExitCode::from(2)
        }
        Err(Failure::Check(m)) => {
            eprintln!("check failed: {}", m);
            ExitCode::from(1)
        }
    }
}
