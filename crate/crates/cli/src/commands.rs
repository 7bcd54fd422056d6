//! One function per subcommand, each building the output table.

use std::f64::consts::TAU;

use rayon::prelude::*;
use satcycles::{
    advance, bif_values, classify_regime, consistency_identity, displacement_d, extract_crossings,
    find_all_cycles, m_orig, m_shift, mmu, mx, partition, residual_3z, residual_direct,
    solve_crossing_system, zero_set, Params, RegimeTag, ZonalType,
};

use crate::error::CliError;
use crate::table::{join, Table};
use crate::Settings;

fn header(table: &mut Table, command: &str, s: &Settings) {
    let p = &s.params;
    table
        .meta("command", command)
        .meta("version", env!("CARGO_PKG_VERSION"))
        .meta("a", p.a)
        .meta("b", p.b)
        .meta("mu", p.mu)
        .meta("eps", p.eps)
        .meta("lambda", p.lambda)
        .meta("tol_root", s.finder.tol_root)
        .meta("tol_residual", s.tol_residual)
        .meta("grid", s.finder.grid);
}

fn key_value(command: &str, s: &Settings, rows: Vec<(&str, String)>) -> Table {
    let mut t = Table::new(["key", "value"]);
    header(&mut t, command, s);
    for (k, v) in rows {
        t.push(vec![k.to_string(), v]);
    }
    t
}

/// `min(-b sqrt(a^2 + 1)/a, sqrt(b^2 + 1))`: below it all cycles lie in one zone.
pub fn one_zone_bound(p: &Params) -> f64 {
    let (a, b) = (p.a_eff(), p.b_eff());
    (-b * (a * a + 1.0).sqrt() / a).min((b * b + 1.0).sqrt())
}

pub fn regime(s: &Settings) -> Result<Table, CliError> {
    let p = &s.params;
    let r = classify_regime(p);
    let mut rows = vec![("regime", r.tag.to_string()), ("detail", r.detail.clone())];
    if r.tag == RegimeTag::MixedSign {
        rows.push(("three_cycle_bound", one_zone_bound(p).to_string()));
        let bif = bif_values(p)?;
        rows.push(("c", bif.c.to_string()));
        rows.push(("mu1", bif.mu1.to_string()));
        rows.push(("mu2", bif.mu2.to_string()));
        rows.push(("x1", bif.x1.to_string()));
    }
    Ok(key_value("regime", s, rows))
}

pub fn bifvalues(s: &Settings) -> Result<Table, CliError> {
    let bif = bif_values(&s.params)?;
    Ok(key_value(
        "bifvalues",
        s,
        vec![
            ("c", bif.c.to_string()),
            ("mu1", bif.mu1.to_string()),
            ("mu2", bif.mu2.to_string()),
            ("x1", bif.x1.to_string()),
        ],
    ))
}

pub fn cycles(s: &Settings) -> Result<Table, CliError> {
    let found = find_all_cycles(&s.params, &s.finder)?;
    let mut t = Table::new(["x0", "zonal_type", "multiplier", "stability", "symmetric"]);
    header(&mut t, "cycles", s);
    for c in found {
        t.push(vec![
            c.x0.to_string(),
            c.zonal_type.to_string(),
            c.multiplier.to_string(),
            c.stability.to_string(),
            c.symmetric.to_string(),
        ]);
    }
    Ok(t)
}

/// One point of a parameter sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct ScanRow {
    pub mu: f64,
    pub eps: f64,
    pub x0s: Vec<f64>,
    pub multipliers: Vec<f64>,
}

pub fn scan_rows(
    s: &Settings,
    mu_min: f64,
    mu_max: f64,
    n: usize,
    eps_list: &[f64],
) -> Result<Vec<ScanRow>, CliError> {
    if n < 2 {
        return Err(CliError::Usage("scan needs --n >= 2".into()));
    }
    if !(mu_min <= mu_max) {
        return Err(CliError::Usage("scan needs --mu-min <= --mu-max".into()));
    }
    let eps_values: Vec<f64> = if eps_list.is_empty() {
        vec![s.params.eps]
    } else {
        let mut v = eps_list.to_vec();
        v.sort_by(f64::total_cmp);
        v.dedup();
        v
    };
    let points: Vec<(f64, f64)> = eps_values
        .iter()
        .flat_map(|&eps| {
            (0..n).map(move |i| {
                let mu = if i + 1 == n {
                    mu_max
                } else {
                    mu_min + (mu_max - mu_min) * i as f64 / (n - 1) as f64
                };
                (eps, mu)
            })
        })
        .collect();
    // collect keeps the (eps, mu) order of `points`
    points
        .par_iter()
        .map(|&(eps, mu)| {
            let p = s.params.with_eps(eps).with_mu(mu);
            let found = find_all_cycles(&p, &s.finder)?;
            Ok(ScanRow {
                mu,
                eps,
                x0s: found.iter().map(|c| c.x0).collect(),
                multipliers: found.iter().map(|c| c.multiplier).collect(),
            })
        })
        .collect()
}

/// `(eps, mu_before, mu_after, count_before, count_after)` for each change
/// of the cycle count between neighbouring grid points.
pub fn transitions(rows: &[ScanRow]) -> Vec<(f64, f64, f64, usize, usize)> {
    rows.windows(2)
        .filter(|w| w[0].eps == w[1].eps && w[0].x0s.len() != w[1].x0s.len())
        .map(|w| (w[0].eps, w[0].mu, w[1].mu, w[0].x0s.len(), w[1].x0s.len()))
        .collect()
}

pub fn scan(
    s: &Settings,
    mu_min: f64,
    mu_max: f64,
    n: usize,
    eps_list: &[f64],
) -> Result<Table, CliError> {
    let rows = scan_rows(s, mu_min, mu_max, n, eps_list)?;
    for (eps, lo, hi, c0, c1) in transitions(&rows) {
        eprintln!("transition eps={eps}: count {c0} -> {c1} between mu={lo} and mu={hi}");
    }
    let mut t = Table::new(["mu", "eps", "count", "x0s", "multipliers"]);
    header(&mut t, "scan", s);
    t.meta("mu_min", mu_min).meta("mu_max", mu_max).meta("n", n);
    for r in rows {
        t.push(vec![
            r.mu.to_string(),
            r.eps.to_string(),
            r.x0s.len().to_string(),
            join(r.x0s),
            join(r.multipliers),
        ]);
    }
    Ok(t)
}

pub fn melnikov(s: &Settings, xs: &[f64]) -> Result<Table, CliError> {
    let p = &s.params;
    let mu = p.mu;
    let mut t = Table::new([
        "x", "mu", "m_orig", "m_shift", "mx", "mmu", "inner_measure", "identity",
    ]);
    header(&mut t, "melnikov", s);
    for &x in xs {
        t.push(vec![
            x.to_string(),
            mu.to_string(),
            m_orig(x, mu, p).to_string(),
            m_shift(x, mu, p).to_string(),
            mx(x, mu, p).to_string(),
            mmu(x, mu, p).to_string(),
            partition(x, mu).inner_measure().to_string(),
            consistency_identity(x, mu, p).to_string(),
        ]);
    }
    Ok(t)
}

pub fn zeroset(s: &Settings, n: usize) -> Result<Table, CliError> {
    let lines = zero_set(&s.params, n)?;
    let bif = bif_values(&s.params)?;
    let mut t = Table::new(["branch", "x", "mu"]);
    header(&mut t, "zeroset", s);
    t.meta("mu1", bif.mu1).meta("mu2", bif.mu2).meta("x1", bif.x1);
    for line in lines {
        let id = line.id();
        for (x, mu) in line.points {
            t.push(vec![id.clone(), x.to_string(), mu.to_string()]);
        }
    }
    Ok(t)
}

pub fn crossings(s: &Settings) -> Result<Table, CliError> {
    let p = &s.params;
    let mut t = Table::new([
        "x0",
        "t1",
        "t2",
        "t3",
        "t4",
        "residual_direct",
        "residual_3z",
        "newton_iterations",
        "newton_residual",
        "converged",
    ]);
    header(&mut t, "crossings", s);
    let inf = |r: [f64; 4]| r.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let mut found = 0;
    for c in find_all_cycles(p, &s.finder)? {
        if c.zonal_type != ZonalType::ThreeZonal {
            continue;
        }
        let Some(cs) = extract_crossings(p, c.x0)? else {
            continue;
        };
        found += 1;
        let (iters, res) = match solve_crossing_system(p, &cs) {
            Ok(sol) => (sol.iterations.to_string(), sol.residual),
            Err(satcycles::Error::NoConvergence { iterations, residual }) => {
                (iterations.to_string(), residual)
            }
            Err(e) => return Err(e.into()),
        };
        t.push(vec![
            c.x0.to_string(),
            cs.t1.to_string(),
            cs.t2.to_string(),
            cs.t3.to_string(),
            cs.t4.to_string(),
            inf(residual_direct(p, &cs)).to_string(),
            inf(residual_3z(p, &cs)).to_string(),
            iters,
            res.to_string(),
            (res < s.tol_residual).to_string(),
        ]);
    }
    if found == 0 {
        t.meta("note", "no three-zonal cycles");
        eprintln!("no three-zonal cycles");
    }
    Ok(t)
}

pub fn orbit3d(s: &Settings, x0: f64, n: usize) -> Result<Table, CliError> {
    if n < 1 {
        return Err(CliError::Usage("orbit3d needs --n >= 1".into()));
    }
    let p = &s.params;
    let d = displacement_d(p, x0)?;
    if d.abs() >= 1e-6 {
        eprintln!("warning: x0 = {x0} is not a periodic initial condition (|d| = {:e})", d.abs());
    }
    let tr = advance(p, 0.0, x0, TAU)?;
    let mu = p.mu;
    let mut t = Table::new(["t", "x", "y", "z"]);
    header(&mut t, "orbit3d", s);
    t.meta("x0", x0).meta("n", n).meta("displacement", d);
    let tol = 1e-12 * mu.abs().max(1.0).powi(2);
    for i in 0..=n {
        let time = if i == n { TAU } else { TAU * i as f64 / n as f64 };
        let (y, z) = (-mu * time.sin(), -mu * time.cos());
        let off = (y * y + z * z - mu * mu).abs();
        if off > tol {
            eprintln!("warning: row {i} leaves the cylinder by {off:e}");
        }
        t.push(vec![
            time.to_string(),
            tr.state_at(time).to_string(),
            y.to_string(),
            z.to_string(),
        ]);
    }
    Ok(t)
}
