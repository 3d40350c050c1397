//! Output documents. JSON goes through `serde_json` (ryu's shortest
//! round-trip floats); CSV cells use `{:?}`, which is also shortest
//! round-trip and keeps a decimal point or exponent on every float.

use serde::Serialize;

use crate::analysis::{ComparisonRow, Outcome, PeriodicityReport, Verdict, WavefunctionSample};
use crate::config::JobConfig;
use crate::error::{Error, Result};
use crate::model::energy_from_quantized;
use crate::oracle::{DomainSide, OracleSpectrum};
use crate::potentials::PotentialModel;

pub const PROGRAM: &str = env!("CARGO_PKG_NAME");
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Serialize)]
struct Document<'a, T: Serialize> {
    program: &'static str,
    version: &'static str,
    command: &'a str,
    config: &'a JobConfig,
    result: &'a T,
}

/// Pretty JSON with the resolved job embedded, newline-terminated.
pub fn json_document<T: Serialize>(command: &str, config: &JobConfig, result: &T) -> Result<String> {
    let doc = Document {
        program: PROGRAM,
        version: VERSION,
        command,
        config,
        result,
    };
    let mut s = serde_json::to_string_pretty(&doc).map_err(|e| Error::InvalidInput(format!("serialize: {e}")))?;
    s.push('\n');
    Ok(s)
}

pub fn float(x: f64) -> String {
    format!("{x:?}")
}

fn opt(x: Option<f64>) -> String {
    x.map(float).unwrap_or_default()
}

fn list(xs: &[f64]) -> String {
    xs.iter().map(|x| float(*x)).collect::<Vec<_>>().join(";")
}

fn csv_string(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<String> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    let io = |e: csv::Error| Error::InvalidInput(format!("csv: {e}"));
    w.write_record(header).map_err(io)?;
    for r in rows {
        w.write_record(&r).map_err(io)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::InvalidInput(format!("csv: {e}")))?;
    String::from_utf8(bytes).map_err(|e| Error::InvalidInput(format!("csv: {e}")))
}

pub const SWEEP_HEADER: [&str; 42] = [
    "index",
    "family",
    "eta",
    "gamma",
    "delta",
    "de",
    "r0",
    "beta",
    "k",
    "phi_ab",
    "phi0",
    "mass",
    "l",
    "n",
    "iota",
    "j",
    "omega",
    "closed_status",
    "printed_e_plus_re",
    "printed_e_plus_im",
    "printed_e_minus_re",
    "printed_e_minus_im",
    "printed_radicand",
    "derived_e_plus_re",
    "derived_e_plus_im",
    "derived_e_minus_re",
    "derived_e_minus_im",
    "series_status",
    "series_energies",
    "series_confirmed",
    "two_condition_energies",
    "n1_comparison_lambdas",
    "oracle_status",
    "oracle_outer_energies",
    "oracle_inner_energies",
    "closed_vs_series",
    "closed_vs_oracle",
    "series_vs_oracle",
    "corrected_vs_oracle",
    "verdict",
    "verdict_reason",
    "failures",
];

fn status<T>(o: &Outcome<T>) -> &'static str {
    match o {
        Outcome::Ok(_) => "ok",
        Outcome::Failed(_) => "failed",
        Outcome::Skipped => "skipped",
    }
}

pub fn verdict_tag(v: Verdict) -> &'static str {
    match v {
        Verdict::Consistent => "consistent",
        Verdict::FormulaMismatch => "formula-mismatch",
        Verdict::NonPhysical => "non-physical",
        Verdict::Incomplete => "incomplete",
        Verdict::InvalidInput => "invalid-input",
    }
}

fn model_columns(m: &PotentialModel) -> [String; 5] {
    let f = |x: f64| float(x);
    match *m {
        PotentialModel::Anharmonic(p) => [f(p.eta), f(p.gamma), f(p.delta), String::new(), String::new()],
        PotentialModel::InverseSquare { gamma } => [String::new(), f(gamma), String::new(), String::new(), String::new()],
        PotentialModel::Pseudoharmonic { de, r0 } | PotentialModel::ShiftedPseudoharmonic { de, r0 } => {
            [String::new(), String::new(), String::new(), f(de), f(r0)]
        }
    }
}

fn oracle_energies(row: &ComparisonRow, side: &Outcome<OracleSpectrum>) -> String {
    let (Some(s), Ok(d)) = (side.ok(), row.inputs.spec.resolve().and_then(|s| s.derive())) else {
        return String::new();
    };
    let e: Vec<f64> = s.eigenvalues.iter().filter_map(|v| energy_from_quantized(*v, &d).ok()).collect();
    list(&e)
}

fn sweep_record(index: usize, row: &ComparisonRow) -> Vec<String> {
    let spec = &row.inputs.spec;
    let mut r = vec![index.to_string(), spec.potential.name().to_string()];
    r.extend(model_columns(&spec.potential));
    r.extend([
        float(spec.beta),
        float(spec.k),
        float(spec.phi_ab),
        float(spec.phi0),
        float(spec.mass),
        spec.l.to_string(),
        spec.n.to_string(),
        opt(row.inputs.iota),
        opt(row.inputs.j),
        opt(row.inputs.omega),
        status(&row.closed_form).into(),
    ]);
    match row.closed_form.ok() {
        Some(c) => r.extend([
            float(c.printed.e_plus.re),
            float(c.printed.e_plus.im),
            float(c.printed.e_minus.re),
            float(c.printed.e_minus.im),
            float(c.printed.radicand),
            float(c.derived.e_plus.re),
            float(c.derived.e_plus.im),
            float(c.derived.e_minus.re),
            float(c.derived.e_minus.im),
        ]),
        None => r.extend(std::iter::repeat_n(String::new(), 9)),
    }
    r.push(status(&row.series).into());
    match row.series.ok() {
        Some(s) => {
            let confirmed = s.cnp1.roots.iter().filter(|x| x.ode.verdict == crate::series::OdeVerdict::Confirmed);
            let two: Vec<f64> = s.two_condition.accepted().map(|x| x.lambda).collect();
            let two_e: Vec<f64> = match row.inputs.spec.resolve().and_then(|x| x.derive()) {
                Ok(d) => two.iter().filter_map(|l| energy_from_quantized(*l, &d).ok()).collect(),
                Err(_) => Vec::new(),
            };
            r.extend([
                list(&s.energies),
                confirmed.count().to_string(),
                list(&two_e),
                s.n1_comparison
                    .as_ref()
                    .map(|q| list(&q.roots.iter().map(|x| x.lambda).collect::<Vec<_>>()))
                    .unwrap_or_default(),
            ]);
        }
        None => r.extend(std::iter::repeat_n(String::new(), 4)),
    }
    r.push(status(&row.oracle).into());
    match row.oracle.ok() {
        Some(o) => r.extend([oracle_energies(row, &o.outer), oracle_energies(row, &o.inner)]),
        None => r.extend([String::new(), String::new()]),
    }
    let d = &row.deviations;
    r.extend([
        opt(d.closed_vs_series),
        opt(d.closed_vs_oracle),
        opt(d.series_vs_oracle),
        opt(d.corrected_vs_oracle),
        verdict_tag(row.verdict).into(),
        row.verdict_reason.clone(),
        failures(row).join("; "),
    ]);
    r
}

/// Failure reasons per solver (and per oracle side).
pub fn failures(row: &ComparisonRow) -> Vec<String> {
    let mut out = Vec::new();
    if let Outcome::Failed(m) = &row.closed_form {
        out.push(format!("closed: {m}"));
    }
    if let Outcome::Failed(m) = &row.series {
        out.push(format!("series: {m}"));
    }
    match &row.oracle {
        Outcome::Failed(m) => out.push(format!("oracle: {m}")),
        Outcome::Ok(o) => {
            for (name, side) in [("outer", &o.outer), ("inner", &o.inner)] {
                if let Outcome::Failed(m) = side {
                    out.push(format!("oracle {name}: {m}"));
                }
            }
        }
        Outcome::Skipped => {}
    }
    out
}

/// One CSV row per grid point, in grid order.
pub fn sweep_csv(rows: &[ComparisonRow]) -> Result<String> {
    csv_string(&SWEEP_HEADER, rows.iter().enumerate().map(|(i, r)| sweep_record(i, r)))
}

pub fn wavefunction_csv(samples: &[WavefunctionSample]) -> Result<String> {
    csv_string(
        &["side", "r", "psi", "density", "normalized"],
        samples.iter().map(|s| {
            vec![
                match s.side {
                    DomainSide::Inner => "inner".into(),
                    DomainSide::Outer => "outer".into(),
                },
                float(s.r),
                float(s.psi),
                float(s.density),
                s.normalized.to_string(),
            ]
        }),
    )
}

/// Fixed-layout pass/fail table.
pub fn periodicity_table(reports: &[PeriodicityReport]) -> String {
    let mut out = format!(
        "{:<8} {:>4} {:>24} {:>10} {:>24} {:>6} {}\n",
        "solver", "nu", "deviation", "tolerance", "fixed_l_shift", "phase", "result"
    );
    for rep in reports {
        let name = match rep.solver {
            crate::analysis::SolverKind::Closed => "closed",
            crate::analysis::SolverKind::Series => "series",
            crate::analysis::SolverKind::Oracle => "oracle",
        };
        for row in &rep.rows {
            out.push_str(&format!(
                "{:<8} {:>4} {:>24} {:>10} {:>24} {:>6} {}\n",
                name,
                row.nu,
                float(row.deviation),
                format!("{:e}", row.tolerance),
                float(row.fixed_l_shift),
                if row.phase_invariant { "same" } else { "DIFF" },
                if row.pass && row.phase_invariant { "PASS" } else { "FAIL" }
            ));
        }
    }
    out
}

/// A few human-readable lines about one comparison row.
pub fn summary(row: &ComparisonRow) -> String {
    let spec = &row.inputs.spec;
    let mut out = format!(
        "{} potential, beta = {}, l = {}, n = {}, phi_ab = {}\n",
        spec.potential.name(),
        float(spec.beta),
        spec.l,
        spec.n,
        float(spec.phi_ab)
    );
    if let (Some(iota), Some(j), Some(omega)) = (row.inputs.iota, row.inputs.j, row.inputs.omega) {
        out.push_str(&format!("  iota = {}, j = {}, omega = {}\n", float(iota), float(j), float(omega)));
    }
    if let Some(c) = row.closed_form.ok() {
        out.push_str(&format!(
            "  closed form (printed): E+ = {}, E- = {}{}\n",
            c.printed.e_plus,
            c.printed.e_minus,
            if c.printed.complex_branch { "  [complex branch]" } else { "" }
        ));
        out.push_str(&format!(
            "  closed form (derived): E+ = {}, E- = {}\n",
            c.derived.e_plus, c.derived.e_minus
        ));
    }
    if let Some(s) = row.series.ok() {
        out.push_str(&format!("  series c_(n+1) = 0 energies: [{}]\n", list(&s.energies).replace(';', ", ")));
    }
    if let Some(o) = row.oracle.ok() {
        for (name, side) in [("outer", &o.outer), ("inner", &o.inner)] {
            let e = oracle_energies(row, side);
            if !e.is_empty() {
                out.push_str(&format!("  oracle {name} energies: [{}]\n", e.replace(';', ", ")));
            }
        }
    }
    for f in failures(row) {
        out.push_str(&format!("  failed: {f}\n"));
    }
    out.push_str(&format!("  verdict: {} ({})\n", verdict_tag(row.verdict), row.verdict_reason));
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::{compare_spec, SolveOptions, SystemSpec};

    fn row() -> ComparisonRow {
        let spec = SystemSpec {
            potential: PotentialModel::Pseudoharmonic { de: 2.0, r0: 1.5 },
            beta: 0.5,
            k: 1.0,
            phi_ab: 0.0,
            phi0: 1.0,
            mass: 1.0,
            l: 1,
            n: 1,
            unsafe_beta: false,
        };
        compare_spec(
            &spec,
            &SolveOptions {
                grid_n: 200,
                oracle_levels: 2,
                ..SolveOptions::default()
            },
        )
    }

    #[test]
    fn floats_are_shortest_round_trip() {
        for x in [0.1, 1.0, -0.0, 1e-300, 2.0f64.sqrt(), 6.02214076e23] {
            assert_eq!(float(x).parse::<f64>().unwrap().to_bits(), x.to_bits());
        }
        assert_eq!(float(1.0), "1.0");
        assert_eq!(float(1e-7), "1e-7");
    }

    #[test]
    fn sweep_csv_has_header_and_fixed_width() {
        let r = row();
        let text = sweep_csv(&[r.clone(), r]).unwrap();
        let mut reader = csv::Reader::from_reader(text.as_bytes());
        assert_eq!(reader.headers().unwrap().len(), SWEEP_HEADER.len());
        let records: Vec<_> = reader.records().map(|r| r.unwrap()).collect();
        assert_eq!(records.len(), 2);
        assert_eq!(&records[1][0], "1");
        assert_eq!(&records[0][1], "pseudoharmonic");
        assert!(records.iter().all(|r| r.len() == SWEEP_HEADER.len()));
    }

    #[test]
    fn json_embeds_config() {
        let job = JobConfig::from_toml(
            "[potential]\nfamily = \"pseudoharmonic\"\nde = 2.0\nr0 = 1.5\n[geometry]\nbeta = 0.5\n",
        )
        .unwrap();
        let text = json_document("compare", &job, &row()).unwrap();
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        let back: JobConfig = serde_json::from_value(v["config"].clone()).unwrap();
        assert_eq!(back, job);
        assert_eq!(v["result"]["verdict"], summary_tag(&row()));
    }

    fn summary_tag(r: &ComparisonRow) -> &'static str {
        verdict_tag(r.verdict)
    }
}
