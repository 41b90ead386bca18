use std::io::{self, Write};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};
use wlab_core::fixed::{circ_json, compute_circ, FixedContext, DEFAULT_F_ORDER_CAP};
use wlab_core::verify::{self, Suite, SuiteReport, VerifyOptions};
use wlab_core::{canonicalize_basis, enumerate_pointed_trees, Basis, Complex, Frame};

use crate::config::{Cli, Command, Loaded};
use crate::error::{CliError, Result, EXIT_FAIL, EXIT_PASS};
use crate::output::Artifacts;

pub fn run(cli: &Cli) -> Result<u8> {
    let loaded = cli.load()?;
    let hash = loaded.config.hash();
    let mut out = Artifacts::new(cli.out.as_deref())?;
    let (name, code) = match &cli.command {
        Command::Ball => ("ball", ball(&loaded, &hash, &mut out)?),
        Command::Verify => ("verify", verify_cmd(&loaded, &hash, &mut out)?),
        Command::Reduce { basis, random } => {
            ("reduce", reduce(&loaded, &hash, basis.as_deref(), *random, &mut out)?)
        }
        Command::Fixed { subgroups } => ("fixed", fixed(&loaded, &hash, *subgroups, &mut out)?),
        Command::Trees { n, dot } => ("trees", trees(&hash, *n, *dot, &mut out)?),
    };
    if out.enabled() {
        out.write_json("config.json", &json!({"config": loaded.config, "config_hash": hash}))?;
    }
    out.finish(name, &hash)?;
    Ok(code)
}

fn complex(loaded: &Loaded) -> Result<Complex> {
    Ok(Complex::with_caps(loaded.require_group()?.clone(), loaded.caps)?)
}

fn emit(lines: &[String]) -> Result<()> {
    let stdout = io::stdout();
    let mut w = stdout.lock();
    for l in lines {
        writeln!(w, "{l}").map_err(|e| CliError::io("<stdout>", e))?;
    }
    Ok(())
}

fn ball(loaded: &Loaded, hash: &str, out: &mut Artifacts) -> Result<u8> {
    let lab = complex(loaded)?;
    let radius = loaded.config.radius.unwrap_or(lab.n() + 2);
    let ball = lab.enumerate_ball(radius)?;
    let mut lines = vec![json!({
        "config_hash": hash,
        "seed": loaded.config.seed,
        "radius": radius,
        "vertices": ball.len(),
    })
    .to_string()];
    for (i, (f, norm)) in ball.frames.iter().zip(&ball.norms).enumerate() {
        lines.push(
            json!({"index": i, "basis": f.basis(), "code": f.basis().to_code(), "norm": norm})
                .to_string(),
        );
    }
    emit(&lines)?;
    let mut jsonl = lines.join("\n");
    jsonl.push('\n');
    out.write("ball.jsonl", jsonl.as_bytes())?;
    if out.enabled() {
        out.write("ball.dot", lab.ball_dot(&ball)?.as_bytes())?;
    }
    Ok(EXIT_PASS)
}

fn options(loaded: &Loaded) -> VerifyOptions {
    VerifyOptions {
        seed: loaded.config.seed,
        radius: loaded.config.radius,
        order_cap: loaded.config.cap_order.min(DEFAULT_F_ORDER_CAP),
        ..VerifyOptions::default()
    }
}

fn verify_cmd(loaded: &Loaded, hash: &str, out: &mut Artifacts) -> Result<u8> {
    let suites: Vec<Suite> = if loaded.suites.is_empty() {
        Suite::ALL.to_vec()
    } else {
        loaded.suites.clone()
    };
    if loaded.fp.is_none() && suites.iter().any(|s| !s.is_global()) {
        loaded.require_group()?;
    }
    let opts = options(loaded);
    let results: Vec<wlab_core::Result<SuiteReport>> = std::thread::scope(|scope| {
        let handles: Vec<_> = suites
            .iter()
            .map(|&s| {
                let opts = &opts;
                scope.spawn(move || {
                    let lab = match &loaded.fp {
                        Some(fp) => Complex::with_caps(fp.clone(), loaded.caps)?,
                        None => Complex::new(wlab_core::FreeProduct::cyclic(&[2, 2])?)?,
                    };
                    verify::run_suite(s, &lab, opts)
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("suite thread panicked"))
            .collect()
    });
    let mut reports = Vec::new();
    for r in results {
        reports.push(r?);
    }
    let mut lines = Vec::new();
    let mut all_passed = true;
    for r in &reports {
        all_passed &= r.passed;
        lines.push(format!(
            "{} {:<22} witnesses {:>5} failures {}",
            if r.passed { "PASS" } else { "FAIL" },
            r.suite,
            r.witnesses,
            r.failures.len()
        ));
        for w in &r.warnings {
            eprintln!("warning: {}: {w}", r.suite);
        }
        out.write_json(
            &format!("verify/{}.json", r.suite),
            &json!({"config_hash": hash, "seed": loaded.config.seed, "report": r}),
        )?;
    }
    emit(&lines)?;
    let summary: Vec<Value> = reports
        .iter()
        .map(|r| json!({"suite": r.suite, "passed": r.passed, "witnesses": r.witnesses}))
        .collect();
    out.write_json(
        "verify.json",
        &json!({"config_hash": hash, "seed": loaded.config.seed, "passed": all_passed, "suites": summary}),
    )?;
    Ok(if all_passed { EXIT_PASS } else { EXIT_FAIL })
}

fn reduce(
    loaded: &Loaded,
    hash: &str,
    basis: Option<&str>,
    random: Option<usize>,
    out: &mut Artifacts,
) -> Result<u8> {
    let lab = complex(loaded)?;
    let fp = lab.fp();
    let start = match (basis, random) {
        (Some(text), _) => {
            let raw: Basis = serde_json::from_str(text).map_err(CliError::Basis)?;
            let basis = canonicalize_basis(fp, raw.conjugators());
            if basis.rank() != fp.rank() {
                return Err(CliError::Usage(format!(
                    "basis has {} conjugators, group has {} factors",
                    basis.rank(),
                    fp.rank()
                )));
            }
            Frame::from_basis(fp, &basis)?
        }
        (None, Some(moves)) => {
            let mut rng = ChaCha8Rng::seed_from_u64(loaded.config.seed);
            verify::random_frame(&lab, &mut rng, moves)?
        }
        (None, None) => return Err(CliError::Usage("give a basis or --random".into())),
    };
    let path = lab.reduce_to_minimal(&start, loaded.config.norm.into())?;
    let mut lines = vec![format!("start  {}  w0 {}", start.basis().to_code(), lab.w0_norm(&start))];
    for (i, s) in path.iter().enumerate() {
        lines.push(format!(
            "{:>5}  {}  -> {}  w0 {}",
            i + 1,
            s.mv.describe(),
            s.basis.to_code(),
            s.w0_norm
        ));
    }
    emit(&lines)?;
    out.write_json(
        "reduce.json",
        &json!({
            "config_hash": hash,
            "seed": loaded.config.seed,
            "start": start.basis(),
            "start_w0": lab.w0_norm(&start),
            "steps": path.iter().map(|s| json!({
                "move": s.mv.describe(),
                "basis": s.basis,
                "w0_norm": s.w0_norm,
            })).collect::<Vec<_>>(),
        }),
    )?;
    Ok(EXIT_PASS)
}

fn fixed(loaded: &Loaded, hash: &str, subgroups: usize, out: &mut Artifacts) -> Result<u8> {
    let lab = complex(loaded)?;
    let fp = lab.fp();
    let radius = loaded.config.radius.unwrap_or(lab.n() + 2);
    let ball = lab.enumerate_ball(radius)?;
    let types = lab.ball_vertex_types(&ball)?;
    let opts = VerifyOptions {
        subgroups,
        ..options(loaded)
    };
    let mut lines = Vec::new();
    let mut reports = Vec::new();
    let mut discrepancies = 0;
    for f in verify::test_subgroups(&lab, &opts)? {
        let desc = f.describe(fp);
        let circ = circ_json(fp, &compute_circ(fp, &f));
        let ctx = FixedContext::new(&lab, f)?;
        let sub = ctx.fixed_subcomplex(&types)?;
        let bad = sub.discrepancies().len();
        discrepancies += bad;
        lines.push(format!(
            "F = <{}> order {} base {}: fixed {} reduced {} discrepancies {bad}",
            desc.join(", "),
            ctx.f.order(),
            ctx.base_tree().code(),
            sub.vertices.len(),
            sub.reduced().count()
        ));
        reports.push(json!({
            "generators": desc,
            "order": ctx.f.order(),
            "base_tree": ctx.base_tree().code(),
            "circ": circ,
            "vertices": sub.vertices.iter().map(|v| json!({
                "vertex": v.vertex.key(),
                "reduced": v.reduced,
                "standard": v.standard,
            })).collect::<Vec<_>>(),
        }));
    }
    emit(&lines)?;
    out.write_json(
        "fixed.json",
        &json!({"config_hash": hash, "radius": radius, "vertex_types": types.len(), "subgroups": reports}),
    )?;
    Ok(if discrepancies == 0 { EXIT_PASS } else { EXIT_FAIL })
}

fn trees(hash: &str, n: usize, dot: bool, out: &mut Artifacts) -> Result<u8> {
    let trees = enumerate_pointed_trees(n)?;
    let lines: Vec<String> = trees.iter().map(|t| t.code()).collect();
    emit(&lines)?;
    out.write_json(
        "trees.json",
        &json!({
            "config_hash": hash,
            "n": n,
            "trees": trees.iter().map(|t| t.to_json()).collect::<Vec<_>>(),
        }),
    )?;
    if dot {
        for (i, t) in trees.iter().enumerate() {
            out.write(&format!("trees/{i:04}.dot"), t.to_dot().as_bytes())?;
        }
    }
    Ok(EXIT_PASS)
}
