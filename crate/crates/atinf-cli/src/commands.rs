use num_complex::Complex64;
use serde_json::{json, Value};

use atinf::halphen::{
    build_triangle_group, egyptian_enumerate, geodesic_ray, halphen_spectrum_check, leaf_type,
    poincare_series, verify_relations, HalphenError, OrbifoldOrder, RaySelector, Regime,
};
use atinf::infinity_form::h_singular_loci;
use atinf::polyfield::{
    field_from_json, identity_matrix, rotate_chart, to_infinity_chart, FieldError,
    InfinityChartField, PolyVectorField,
};
use atinf::singularities::{
    classify_singularity, find_singularities, semicomplete_report, singularity_table_csv,
};
use atinf::trajectory::{
    area_ratio, confinement_measure, contraction_check, time_integral, trace, NeighborhoodSpec,
    TraceError, TraceOptions,
};

use crate::output::{write_outputs, OutputSet};
use crate::svg::trace_svg;
use crate::{ChartMode, Cli, CliError, Command, Format};

pub fn run(cli: &Cli) -> Result<(), CliError> {
    match &cli.command {
        Command::Analyze { chart, jet_order } => cmd_analyze(cli, *chart, *jet_order),
        Command::Trace {
            chart,
            start,
            z0,
            theta,
            tmax,
            tol,
        } => cmd_trace(cli, *chart, start, z0, *theta, *tmax, *tol),
        Command::Confine {
            chart,
            start,
            theta,
            radius,
            budget,
            tol,
            assume_complete,
        } => cmd_confine(cli, *chart, start, *theta, *radius, *budget, *tol, *assume_complete),
        Command::Area {
            chart,
            start,
            rays,
            theta_span,
            radii,
            vradius,
            tguard,
            tol,
        } => cmd_area(cli, *chart, start, *rays, *theta_span, radii, *vradius, *tguard, *tol),
        Command::Halphen {
            orbifold,
            ray,
            rays,
            j,
            w0,
        } => cmd_halphen(cli, orbifold, ray, *rays, *j, w0),
        Command::Egyptian { n, bound } => cmd_egyptian(cli, *n, *bound),
        Command::Report {} => cmd_report(cli),
    }
}

// ---------------------------------------------------------------------------
// argument parsing helpers
// ---------------------------------------------------------------------------

fn parse_complex(s: &str) -> Result<Complex64, CliError> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    let bad = || CliError::parse(format!("cannot parse complex number '{}'", s));
    match parts.len() {
        1 => Ok(Complex64::new(parts[0].parse().map_err(|_| bad())?, 0.0)),
        2 => Ok(Complex64::new(
            parts[0].parse().map_err(|_| bad())?,
            parts[1].parse().map_err(|_| bad())?,
        )),
        _ => Err(bad()),
    }
}

fn parse_point(s: &str) -> Result<Vec<Complex64>, CliError> {
    s.split(';').map(parse_complex).collect()
}

fn load_field(cli: &Cli) -> Result<PolyVectorField, CliError> {
    let path = cli
        .field
        .as_ref()
        .ok_or_else(|| CliError::parse("--field <path> is required for this command"))?;
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::parse(format!("cannot read {}: {}", path.display(), e)))?;
    let field = field_from_json(&text).map_err(|e| CliError::parse(e.to_string()))?;
    if field.is_zero() {
        return Err(CliError::parse("all components are empty"));
    }
    Ok(field)
}

fn build_chart(
    field: &PolyVectorField,
    mode: ChartMode,
    seed: u64,
) -> Result<InfinityChartField, CliError> {
    let res = match mode {
        ChartMode::Identity => {
            to_infinity_chart(field, field.n() - 1, &identity_matrix(field.n()))
        }
        ChartMode::Rotate => rotate_chart(field, seed),
    };
    res.map_err(|e| match e {
        FieldError::RadialMultiple { .. } => CliError::precondition(e.to_string()),
        FieldError::GenericityFailed { .. } => CliError::precondition(e.to_string()),
        FieldError::Parse(_) => CliError::parse(e.to_string()),
        other => CliError::numeric(other.to_string()),
    })
}

fn trace_err(e: TraceError) -> CliError {
    match e {
        TraceError::BadStart(_) => CliError::precondition(e.to_string()),
        other => CliError::numeric(other.to_string()),
    }
}

fn formats(cli: &Cli) -> Vec<Format> {
    if cli.format.is_empty() {
        vec![Format::Json]
    } else {
        cli.format.clone()
    }
}

fn base_config(cli: &Cli, command: &str) -> Value {
    json!({
        "command": command,
        "field": cli.field.as_ref().map(|p| p.display().to_string()),
        "seed": cli.seed,
        "out": cli.out.display().to_string(),
    })
}

fn cval(c: Complex64) -> Value {
    json!({"re": c.re, "im": c.im})
}

fn chart_json(chart: &InfinityChartField) -> Value {
    let names: [&str; 2] = ["x", "y"];
    let show = |p: &atinf::polyfield::MultiPoly| -> Value {
        json!({
            "display": p.display_with(&names[..chart.leaf_vars()]),
            "terms": serde_json::to_value(p).unwrap(),
        })
    };
    json!({
        "d": chart.d,
        "n": chart.n,
        "generic": chart.generic,
        "generic_obstruction": chart.generic_obstruction,
        "F": show(&chart.f),
        "G": chart.g.as_ref().map(show),
        "H": show(&chart.h),
        "P": show(&chart.p),
        "a": show(&chart.a),
        "b": chart.b.as_ref().map(show),
        "Pbar": show(&chart.pbar),
        "Pstar": show(&chart.pstar),
        "Hstar": show(&chart.hstar),
        "transform": chart.chart.iter().map(|row| row.iter().map(|c| cval(*c)).collect::<Vec<_>>()).collect::<Vec<_>>(),
        "axis": chart.axis,
    })
}

// ---------------------------------------------------------------------------
// commands
// ---------------------------------------------------------------------------

fn cmd_analyze(cli: &Cli, mode: ChartMode, jet_order: u32) -> Result<(), CliError> {
    let field = load_field(cli)?;
    let chart = build_chart(&field, mode, cli.seed)?;
    let sings = find_singularities(&chart).map_err(|e| CliError::numeric(e.to_string()))?;
    let mut classified = Vec::new();
    for p in &sings {
        classified.push(
            classify_singularity(&chart, p, jet_order)
                .map_err(|e| CliError::numeric(e.to_string()))?,
        );
    }
    let loci = h_singular_loci(&chart).map_err(|e| CliError::numeric(e.to_string()))?;
    let mut config = base_config(cli, "analyze");
    config["jet_order"] = json!(jet_order);
    config["chart"] = json!(match mode {
        ChartMode::Identity => "identity",
        ChartMode::Rotate => "rotate",
    });
    let body = json!({
        "config": config,
        "chart": chart_json(&chart),
        "singularities": serde_json::to_value(&classified).unwrap(),
        "loci": serde_json::to_value(&loci).unwrap(),
    });
    let mut outputs = OutputSet::new(&cli.out, "analyze");
    outputs.json(body);
    outputs.csv(format!(
        "# {}\n{}",
        serde_json::to_string(&config).unwrap(),
        singularity_table_csv(&classified)
    ));
    write_outputs(outputs, &formats(cli))
}

#[allow(clippy::too_many_arguments)]
fn cmd_trace(
    cli: &Cli,
    mode: ChartMode,
    start: &str,
    z0: &str,
    theta: f64,
    tmax: f64,
    tol: f64,
) -> Result<(), CliError> {
    if !(tol > 0.0 && tol <= 1e-2) {
        return Err(CliError::precondition("tol must lie in (0, 1e-2]"));
    }
    if tmax <= 0.0 {
        return Err(CliError::precondition("tmax must be positive"));
    }
    let field = load_field(cli)?;
    let chart = build_chart(&field, mode, cli.seed)?;
    let start = parse_point(start)?;
    if start.len() != chart.leaf_vars() {
        return Err(CliError::parse(format!(
            "start has {} coordinates, chart needs {}",
            start.len(),
            chart.leaf_vars()
        )));
    }
    let z0 = parse_complex(z0)?;
    let opts = TraceOptions {
        t_max: tmax,
        tol,
        ..Default::default()
    };
    let traj = trace(&chart, &start, z0, theta, &opts).map_err(trace_err)?;
    let contraction = contraction_check(&chart, &traj).ok();
    let ti = time_integral(&traj);
    let mut config = base_config(cli, "trace");
    config["theta"] = json!(theta);
    config["tmax"] = json!(tmax);
    config["tol"] = json!(tol);
    config["z0"] = cval(z0);
    config["start"] = Value::Array(start.iter().map(|c| cval(*c)).collect());
    let body = json!({
        "config": config,
        "termination": serde_json::to_value(traj.termination).unwrap(),
        "detours": traj.detours,
        "time_integral": cval(ti.total),
        "tail_bound": if ti.tail_bound.is_finite() { json!(ti.tail_bound) } else { json!("inf") },
        "events": serde_json::to_value(&traj.events).unwrap(),
        "samples": traj.states().len(),
        "contraction": contraction.as_ref().map(|c| json!({
            "max_rel_height_dev": c.max_rel_height_dev,
            "alpha_min": c.alpha_min,
            "halvings": serde_json::to_value(&c.halvings).unwrap(),
        })),
    });
    let mut outputs = OutputSet::new(&cli.out, "trace");
    outputs.json(body);
    outputs.csv(format!(
        "# {}\n{}",
        serde_json::to_string(&config).unwrap(),
        traj.to_csv()
    ));
    outputs.svg(trace_svg(&traj, &serde_json::to_string(&config).unwrap()));
    write_outputs(outputs, &formats(cli))
}

fn singular_centers(chart: &InfinityChartField) -> Result<Vec<Vec<Complex64>>, CliError> {
    let sings = find_singularities(chart).map_err(|e| CliError::numeric(e.to_string()))?;
    Ok(sings
        .into_iter()
        .map(|mut p| {
            p.push(Complex64::new(0.0, 0.0));
            p
        })
        .collect())
}

#[allow(clippy::too_many_arguments)]
fn cmd_confine(
    cli: &Cli,
    mode: ChartMode,
    start: &str,
    theta: f64,
    radius: f64,
    budget: f64,
    tol: f64,
    assume_complete: bool,
) -> Result<(), CliError> {
    if radius <= 0.0 {
        return Err(CliError::precondition("radius must be positive"));
    }
    let field = load_field(cli)?;
    let chart = build_chart(&field, mode, cli.seed)?;
    let start = parse_point(start)?;
    if start.len() != chart.n {
        return Err(CliError::parse(format!(
            "affine start has {} coordinates, the field lives on C^{}",
            start.len(),
            chart.n
        )));
    }
    if !assume_complete {
        eprintln!("atinf: warning: field not flagged complete; the confinement bound is only meaningful for complete fields");
    }
    let centers = singular_centers(&chart)?;
    let v = NeighborhoodSpec::balls(centers.clone(), radius);
    let report = confinement_measure(&chart, &start, theta, &v, budget, tol, assume_complete)
        .map_err(trace_err)?;
    let mut config = base_config(cli, "confine");
    config["theta"] = json!(theta);
    config["radius"] = json!(radius);
    config["budget"] = json!(budget);
    config["tol"] = json!(tol);
    config["assume_complete"] = json!(assume_complete);
    config["start"] = Value::Array(start.iter().map(|c| cval(*c)).collect());
    let plateau = {
        let half = report.measure_at(budget / 2.0);
        let full = report.measure_at(budget);
        if half > 0.0 {
            json!((full - half) / half)
        } else {
            json!(null)
        }
    };
    let body = json!({
        "config": config,
        "v_centers": centers.iter().map(|p| p.iter().map(|c| cval(*c)).collect::<Vec<_>>()).collect::<Vec<_>>(),
        "outside_measure": report.outside_measure,
        "relative_growth_second_half": plateau,
        "termination": serde_json::to_value(report.termination).unwrap(),
        "detours": report.detours,
        "profile_samples": report.profile.len(),
    });
    let mut csv = format!("# {}\nt,outside_measure\n", serde_json::to_string(&config).unwrap());
    for (t, m) in &report.profile {
        csv.push_str(&format!("{},{}\n", t, m));
    }
    let mut outputs = OutputSet::new(&cli.out, "confine");
    outputs.json(body);
    outputs.csv(csv);
    write_outputs(outputs, &formats(cli))
}

#[allow(clippy::too_many_arguments)]
fn cmd_area(
    cli: &Cli,
    mode: ChartMode,
    start: &str,
    rays: usize,
    theta_span: f64,
    radii: &str,
    vradius: f64,
    tguard: f64,
    tol: f64,
) -> Result<(), CliError> {
    let field = load_field(cli)?;
    let chart = build_chart(&field, mode, cli.seed)?;
    let start = parse_point(start)?;
    if start.len() != chart.n {
        return Err(CliError::parse("affine start dimension mismatch".to_string()));
    }
    let radii: Vec<f64> = radii
        .split(',')
        .map(|s| s.trim().parse().map_err(|_| CliError::parse("bad radius list")))
        .collect::<Result<_, _>>()?;
    if rays == 0 {
        return Err(CliError::precondition("need at least one ray"));
    }
    let thetas: Vec<f64> = if rays == 1 {
        vec![0.0]
    } else {
        (0..rays)
            .map(|k| -theta_span + 2.0 * theta_span * (k as f64) / ((rays - 1) as f64))
            .collect()
    };
    let centers = singular_centers(&chart)?;
    let v = NeighborhoodSpec::balls(centers, vradius);
    let report = area_ratio(&chart, &start, &thetas, &radii, &v, tol, tguard).map_err(trace_err)?;
    let mut config = base_config(cli, "area");
    config["rays"] = json!(rays);
    config["theta_span"] = json!(theta_span);
    config["radii"] = json!(radii);
    config["vradius"] = json!(vradius);
    config["tguard"] = json!(tguard);
    config["tol"] = json!(tol);
    config["start"] = Value::Array(start.iter().map(|c| cval(*c)).collect());
    if rays == 1 {
        config["note"] =
            json!("single-ray grid: the ratio degenerates to a length fraction along one trajectory");
    }
    let body = json!({
        "config": config,
        "ratios": report.ratios,
        "rays": serde_json::to_value(&report.rays).unwrap(),
    });
    let mut csv = format!("# {}\nradius,ratio\n", serde_json::to_string(&config).unwrap());
    for (r, ratio) in &report.ratios {
        csv.push_str(&format!("{},{}\n", r, ratio));
    }
    let mut outputs = OutputSet::new(&cli.out, "area");
    outputs.json(body);
    outputs.csv(csv);
    write_outputs(outputs, &formats(cli))
}

fn parse_orbifold(s: &str) -> Result<[OrbifoldOrder; 3], CliError> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    if parts.len() != 3 {
        return Err(CliError::parse("orbifold needs three orders m1,m2,m3"));
    }
    let mut out = [OrbifoldOrder::Finite(2); 3];
    for (i, p) in parts.iter().enumerate() {
        out[i] = if p.eq_ignore_ascii_case("inf") || *p == "∞" {
            OrbifoldOrder::Infinite
        } else {
            let m: u32 = p
                .parse()
                .map_err(|_| CliError::parse(format!("bad orbifold order '{}'", p)))?;
            OrbifoldOrder::Finite(m)
        };
    }
    Ok(out)
}

fn parse_ray_selector(s: &str, idx: usize) -> Result<RaySelector, CliError> {
    if s == "alt" {
        return Ok(RaySelector::Alternating(0, 1));
    }
    if s == "commutator" {
        // default family: rotate the generator pair with the ray index
        let pairs = [(0usize, 1usize), (1, 2), (0, 2)];
        let (i, j) = pairs[idx % pairs.len()];
        return Ok(RaySelector::Commutator(i, j));
    }
    if let Some(rest) = s.strip_prefix("custom:") {
        let letters: Result<Vec<(usize, i8)>, CliError> = rest
            .split(',')
            .map(|tok| {
                let tok = tok.trim();
                let (sign, digits) = match tok.strip_prefix('-') {
                    Some(d) => (-1i8, d),
                    None => (1i8, tok.strip_prefix('+').unwrap_or(tok)),
                };
                let idx1: usize = digits
                    .parse()
                    .map_err(|_| CliError::parse(format!("bad letter '{}'", tok)))?;
                if idx1 == 0 {
                    return Err(CliError::parse("letters are 1-based".to_string()));
                }
                Ok((idx1 - 1, sign))
            })
            .collect();
        return Ok(RaySelector::Custom(letters?));
    }
    Err(CliError::parse(format!("unknown ray selector '{}'", s)))
}

fn cmd_halphen(
    cli: &Cli,
    orbifold: &str,
    ray: &str,
    rays: usize,
    j: usize,
    w0: &str,
) -> Result<(), CliError> {
    let orders = parse_orbifold(orbifold)?;
    let group = build_triangle_group(&orders).map_err(|e| match e {
        HalphenError::OrderTooSmall(_) | HalphenError::TooManyCusps => {
            CliError::precondition(e.to_string())
        }
        other => CliError::numeric(other.to_string()),
    })?;
    let w0 = parse_complex(w0)?;
    let samples = [
        Complex64::new(0.1, 0.2),
        Complex64::new(-0.4, 0.1),
        Complex64::new(0.3, -0.5),
    ];
    let relations = verify_relations(&group, &samples);

    let mut series_reports = Vec::new();
    let mut ray_json = Vec::new();
    if group.regime != Regime::Spherical {
        for k in 0..rays.max(1) {
            let selector = parse_ray_selector(ray, k)?;
            let r = geodesic_ray(&group, &selector, j, w0)
                .map_err(|e| CliError::precondition(e.to_string()))?;
            let rep = poincare_series(&group, &r);
            ray_json.push(json!({
                "selector": format!("{:?}", selector),
                "verdict": serde_json::to_value(rep.verdict).unwrap(),
                "partial_sum": rep.partial_sums.last(),
                "last_term": rep.terms.last(),
                "fitted_lower_slope": rep.fitted_lower_slope,
                "fitted_upper_slope": rep.fitted_upper_slope,
                "distance_bound_ok": rep.distance_bound_ok,
                "near_radial_events": rep.near_radial_events.len(),
            }));
            series_reports.push(rep);
        }
    }
    let verdict = leaf_type(&group, &series_reports);

    let mut config = base_config(cli, "halphen");
    config["orbifold"] = json!(orbifold);
    config["ray"] = json!(ray);
    config["rays"] = json!(rays);
    config["J"] = json!(j);
    config["w0"] = cval(w0);
    let spectrum = match orders {
        [OrbifoldOrder::Finite(a), OrbifoldOrder::Finite(b), OrbifoldOrder::Finite(c)] => {
            Some(halphen_spectrum_check(&[a, b, c]))
        }
        _ => None,
    };
    let body = json!({
        "config": config,
        "regime": serde_json::to_value(group.regime).unwrap(),
        "relations": serde_json::to_value(&relations).unwrap(),
        "leaf_type": serde_json::to_value(verdict).unwrap(),
        "series": ray_json,
        "expected_spectrum": spectrum.map(|s| serde_json::to_value(&s).unwrap()),
    });
    let mut csv = format!(
        "# {}\nray,j,term,partial_sum\n",
        serde_json::to_string(&config).unwrap()
    );
    for (k, rep) in series_reports.iter().enumerate() {
        for (jj, (t, s)) in rep.terms.iter().zip(rep.partial_sums.iter()).enumerate() {
            csv.push_str(&format!("{},{},{},{}\n", k, jj, t, s));
        }
    }
    let mut outputs = OutputSet::new(&cli.out, "halphen");
    outputs.json(body);
    outputs.csv(csv);
    write_outputs(outputs, &formats(cli))
}

fn cmd_egyptian(cli: &Cli, n: u32, bound: i64) -> Result<(), CliError> {
    let sols = egyptian_enumerate(n, bound).map_err(|e| CliError::precondition(e.to_string()))?;
    let mut config = base_config(cli, "egyptian");
    config["n"] = json!(n);
    config["bound"] = json!(bound);
    let body = json!({
        "config": config,
        "count": sols.len(),
        "solutions": sols.iter().map(|s| json!(s.xis)).collect::<Vec<_>>(),
    });
    let mut csv = format!("# {}\n", serde_json::to_string(&config).unwrap());
    for s in &sols {
        let row: Vec<String> = s.xis.iter().map(|v| v.to_string()).collect();
        csv.push_str(&row.join(","));
        csv.push('\n');
    }
    let mut outputs = OutputSet::new(&cli.out, "egyptian");
    outputs.json(body);
    outputs.csv(csv);
    write_outputs(outputs, &formats(cli))
}

fn cmd_report(cli: &Cli) -> Result<(), CliError> {
    let field = load_field(cli)?;
    let report = semicomplete_report(&field, cli.seed).map_err(|e| match e {
        atinf::singularities::SingError::Degree(_) => CliError::precondition(e.to_string()),
        other => CliError::numeric(other.to_string()),
    })?;
    let config = base_config(cli, "report");
    let body = json!({
        "config": config,
        "degree": report.degree,
        "passed": report.passed(),
        "checks": serde_json::to_value(&report.checks).unwrap(),
    });
    let mut csv = format!(
        "# {}\ncheck,verdict,detail\n",
        serde_json::to_string(&config).unwrap()
    );
    for c in &report.checks {
        csv.push_str(&format!(
            "{},{:?},\"{}\"\n",
            c.name,
            c.verdict,
            c.detail.replace('"', "'")
        ));
    }
    let mut outputs = OutputSet::new(&cli.out, "report");
    outputs.json(body);
    outputs.csv(csv);
    write_outputs(outputs, &formats(cli))
}
