use serde_json::{json, Value as Json};
use uwoc::analytic::{ber_pam2, ber_pam4, ber_tdhp, fec_limit_snr, optimize_q_with_tol, refine_q, TdhpParams};
use uwoc::config::{ConfigValues, RunConfig};
use uwoc::geometry::{effective_aperture, lmax_for_params};
use uwoc::grid::parse_grid;
use uwoc::output::fmt_sig6;
use uwoc::sim::{eye_traces, EyeConfig, EyeFormat, MonteCarlo};
use uwoc::svg::render_sweep;
use uwoc::sweep::{self, SweepSettings, SweepSpec, SweepVariable};
use uwoc::{db_linear, ChannelPreset, Result};

use crate::args::{Signal, Variable};

/// What a command produced: the tabular artifact in both encodings, an
/// optional plot and the one-line summary.
pub struct Artifact {
    pub csv: String,
    pub json: Json,
    pub svg: Option<String>,
    pub summary: String,
}

fn table(header: &str, rows: impl IntoIterator<Item = Vec<String>>) -> String {
    let mut out = String::from(header);
    out.push('\n');
    for row in rows {
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

fn g(x: f64) -> String {
    fmt_sig6(x)
}

fn limit_cell(x: Option<f64>) -> String {
    x.map(g).unwrap_or_else(|| "no_solution".into())
}

pub fn ber(cfg: &RunConfig, snr_grid: &str) -> Result<Artifact> {
    let points = match cfg.snr_db {
        Some(db) => vec![db],
        None => parse_grid(snr_grid)?,
    };
    let (p, q) = (cfg.params.p(), cfg.params.q());
    let mut rows = Vec::with_capacity(points.len());
    let mut records = Vec::with_capacity(points.len());
    for &db in &points {
        let snr = db_linear(db);
        let (b2, b4, bt) = (ber_pam2(snr, q)?, ber_pam4(snr, q)?, ber_tdhp(snr, cfg.params)?);
        rows.push(vec![g(db), g(snr), g(p), g(q), g(b2), g(b4), g(bt)]);
        records.push(json!({
            "snr_db": db, "snr_linear": snr, "p": p, "q": q,
            "ber_pam2": b2, "ber_pam4": b4, "ber_tdhp": bt,
        }));
    }
    let last = records.last().expect("grid is nonempty");
    Ok(Artifact {
        csv: table("snr_db,snr_linear,p,q,ber_pam2,ber_pam4,ber_tdhp", rows),
        summary: format!(
            "ber: p={p} q={q}, {} points, BER {} at {} dB",
            points.len(),
            g(last["ber_tdhp"].as_f64().unwrap_or(f64::NAN)),
            g(*points.last().unwrap())
        ),
        json: Json::Array(records),
        svg: None,
    })
}

pub fn mc(cfg: &RunConfig, seed: u64) -> Result<Artifact> {
    let snr_db = cfg.snr_db.expect("resolve requires snr_db for mc");
    let snr = db_linear(snr_db);
    let est = MonteCarlo::new(cfg.params, snr, cfg.symbols as usize, seed).run()?;
    let analytic = ber_tdhp(snr, cfg.params)?;
    let (mixed, mixed_ci) = est.symbol_weighted();
    let csv = table(
        "p,q,snr_db,snr_linear,symbols,seed,bits_pam2,bit_errors_pam2,bits_pam4,bit_errors_pam4,\
         ber_pam2,ber_pam4,ber_tdhp,ci95_halfwidth,ber_symbol_weighted,ci95_symbol_weighted,ber_closed_form",
        [vec![
            g(est.p),
            g(est.q),
            g(snr_db),
            g(snr),
            est.n_symbols.to_string(),
            est.seed.to_string(),
            est.bits_pam2.to_string(),
            est.bit_errors_pam2.to_string(),
            est.bits_pam4.to_string(),
            est.bit_errors_pam4.to_string(),
            g(est.ber_pam2),
            g(est.ber_pam4),
            g(est.ber_tdhp),
            g(est.ci95_halfwidth),
            g(mixed),
            g(mixed_ci),
            g(analytic),
        ]],
    );
    let json = serde_json::to_value(&est).expect("BerEstimate serializes");
    Ok(Artifact {
        summary: format!(
            "mc: p={} q={} at {snr_db} dB, {} symbols, seed {seed}: BER {} ± {} (closed form {})",
            est.p,
            est.q,
            est.n_symbols,
            g(mixed),
            g(mixed_ci),
            g(analytic)
        ),
        csv,
        json,
        svg: None,
    })
}

pub fn fec_limit(cfg: &RunConfig) -> Result<Artifact> {
    let r = fec_limit_snr(cfg.params, cfg.threshold, cfg.tol_db)?;
    let (p, q) = (cfg.params.p(), cfg.params.q());
    Ok(Artifact {
        csv: table(
            "p,q,threshold,fec_limit_db,fec_limit_linear,bracket_width_db,converged",
            [vec![
                g(p),
                g(q),
                g(cfg.threshold),
                g(r.snr_db),
                g(r.snr_linear),
                g(r.bracket_db),
                r.converged.to_string(),
            ]],
        ),
        json: json!({ "p": p, "q": q, "result": r }),
        svg: None,
        summary: format!(
            "fec-limit: p={p} q={q} reaches BER {} at {} dB",
            g(cfg.threshold),
            g(r.snr_db)
        ),
    })
}

/// Largest gap from `q` to its grid neighbours, the bracket for refinement.
fn neighbour_span(grid: &[f64], q: f64) -> f64 {
    let i = grid.iter().position(|&x| x == q).unwrap_or(0);
    let left = if i > 0 { q - grid[i - 1] } else { 0.0 };
    let right = grid.get(i + 1).map_or(0.0, |&x| x - q);
    let span = left.max(right);
    if span > 0.0 {
        span
    } else {
        0.1
    }
}

pub fn optimize_q(cfg: &RunConfig, refine: bool) -> Result<Artifact> {
    let p = cfg.params.p();
    let opt = optimize_q_with_tol(p, cfg.threshold, &cfg.q_grid, cfg.tol_db)?;
    let baseline = fec_limit_snr(TdhpParams::new(p, 0.0)?, cfg.threshold, cfg.tol_db)?.snr_db;
    let refined = if refine {
        Some(refine_q(
            p,
            cfg.threshold,
            opt.q_star,
            neighbour_span(&cfg.q_grid, opt.q_star),
        )?)
    } else {
        None
    };
    let rows = opt
        .grid
        .iter()
        .map(|&(q, limit)| vec![g(p), g(q), limit_cell(limit), (q == opt.q_star).to_string()]);
    let mut summary = format!(
        "optimize-q: p={p} q*={} FEC limit {} dB (q=0: {} dB, gain {} dB)",
        opt.q_star,
        g(opt.snr_at_fec_limit),
        g(baseline),
        g(baseline - opt.snr_at_fec_limit)
    );
    if let Some((q, db)) = refined {
        summary.push_str(&format!(", refined q={} at {} dB", g(q), g(db)));
    }
    Ok(Artifact {
        csv: table("p,q,fec_limit_db,optimum", rows),
        json: json!({
            "p": p,
            "threshold": cfg.threshold,
            "q_star": opt.q_star,
            "fec_limit_db": opt.snr_at_fec_limit,
            "baseline_db": baseline,
            "grid": opt.grid.iter().map(|&(q, l)| json!({"q": q, "fec_limit_db": l})).collect::<Vec<_>>(),
            "refined": refined.map(|(q, db)| json!({"q": q, "fec_limit_db": db})),
        }),
        svg: None,
        summary,
    })
}

pub fn lmax(cfg: &RunConfig, optimum_q: bool) -> Result<Artifact> {
    let channel = cfg.channel.expect("resolve requires a channel for lmax");
    let p = cfg.params.p();
    let params = if optimum_q && p > 0.0 && p < 1.0 {
        let q = optimize_q_with_tol(p, cfg.threshold, &cfg.q_grid, cfg.tol_db)?.q_star;
        TdhpParams::new(p, q)?
    } else {
        cfg.params
    };
    let sol = lmax_for_params(&cfg.geometry, &channel, params, cfg.threshold, cfg.tol_db, cfg.aperture)?;
    let d = effective_aperture(&cfg.geometry, cfg.aperture)?;
    Ok(Artifact {
        csv: table(
            "channel,k_per_meter,p,q,fec_limit_db,snr_required_linear,aperture_m,lmax_m,residual",
            [vec![
                channel.label.to_string(),
                g(channel.k_per_meter),
                g(params.p()),
                g(params.q()),
                g(sol.fec.snr_db),
                g(sol.fec.snr_linear),
                g(d),
                g(sol.lmax.l_max),
                g(sol.lmax.residual),
            ]],
        ),
        json: json!({
            "channel": channel,
            "params": params,
            "aperture_m": d,
            "aperture_mode": cfg.aperture.to_string(),
            "geometry": cfg.geometry,
            "fec": sol.fec,
            "lmax": sol.lmax,
        }),
        svg: None,
        summary: format!(
            "lmax: {} (K={}/m) p={} q={}: L_max = {} m at FEC limit {} dB",
            channel.label,
            channel.k_per_meter,
            params.p(),
            params.q(),
            g(sol.lmax.l_max),
            g(sol.fec.snr_db)
        ),
    })
}

pub struct SweepArgs<'a> {
    pub variable: Variable,
    pub grid: Option<&'a str>,
    pub optimize: bool,
    pub svg: bool,
}

pub fn sweep(cfg: &RunConfig, values: &ConfigValues, a: SweepArgs<'_>) -> Result<Artifact> {
    let variable = match a.variable {
        Variable::P => SweepVariable::P,
        Variable::Q => SweepVariable::Q,
        Variable::Theta => SweepVariable::Theta,
        Variable::Phi => SweepVariable::Phi,
        Variable::Fov => SweepVariable::Fov,
    };
    let grid = match (a.grid, variable) {
        (Some(spec), _) => parse_grid(spec)?,
        (None, SweepVariable::Q) => cfg.q_grid.clone(),
        (None, SweepVariable::P) => cfg.p_grid.clone(),
        (None, v) => v.default_grid(),
    };
    let spec = SweepSpec {
        variable,
        grid,
        p_grid: cfg.p_grid.clone(),
        fixed_p: if values.contains("p") { cfg.params.p() } else { 0.5 },
        geometry: cfg.geometry,
        channels: cfg.channel.map_or_else(|| ChannelPreset::RGB.to_vec(), |c| vec![c]),
        settings: SweepSettings {
            threshold: cfg.threshold,
            tol_db: cfg.tol_db,
            q_grid: cfg.q_grid.clone(),
            aperture: cfg.aperture,
            optimize: a.optimize,
        },
    };
    let records = sweep::run_sweep(&spec)?;
    let mut csv = Vec::new();
    sweep::write_csv(&records, &mut csv).expect("writing to memory");
    let unreachable = records.iter().filter(|r| r.fec_limit_db.is_none()).count();
    let mut summary = format!("sweep: {variable}, {} values, {} rows", spec.grid.len(), records.len());
    if unreachable > 0 {
        summary.push_str(&format!(", {unreachable} without an FEC limit"));
    }
    if let Some((value, label, gain)) = sweep::lmax_improvements(&records)
        .into_iter()
        .max_by(|a, b| a.2.total_cmp(&b.2))
        .filter(|best| best.2 > 0.0)
    {
        summary.push_str(&format!(
            ", largest optimum gain {} m ({label} at {variable}={value})",
            g(gain)
        ));
    }
    Ok(Artifact {
        csv: String::from_utf8(csv).expect("CSV is UTF-8"),
        json: serde_json::to_value(&records).expect("records serialize"),
        svg: a.svg.then(|| render_sweep(&format!("{variable} sweep"), &records)),
        summary,
    })
}

pub struct EyeArgs {
    pub signal: Signal,
    pub samples_per_symbol: usize,
    pub traces: usize,
}

pub fn eye(cfg: &RunConfig, seed: u64, a: EyeArgs) -> Result<Artifact> {
    let format = match a.signal {
        Signal::Pam2 => EyeFormat::Pam2,
        Signal::Pam4 => EyeFormat::Pam4,
        Signal::Tdhp => EyeFormat::Tdhp,
    };
    let config = EyeConfig {
        samples_per_symbol: a.samples_per_symbol,
        n_traces: a.traces,
        ..EyeConfig::new(format, cfg.params, cfg.snr_db.map(db_linear), seed)
    };
    let set = eye_traces(&config)?;
    let mut csv = Vec::new();
    set.write_csv(&mut csv).expect("writing to memory");
    let noise = cfg
        .snr_db
        .map_or_else(|| "noise-free".to_string(), |db| format!("{db} dB"));
    Ok(Artifact {
        csv: String::from_utf8(csv).expect("CSV is UTF-8"),
        json: json!({
            "seed": seed,
            "snr_db": cfg.snr_db,
            "p": cfg.params.p(),
            "q": cfg.params.q(),
            "eye": set,
        }),
        svg: None,
        summary: format!(
            "eye: {}, {} traces of {} samples, {noise}, seed {seed}",
            format!("{format:?}").to_lowercase(),
            set.traces.len(),
            set.samples_per_symbol * set.window_symbols
        ),
    })
}
