//! Dispatch of a validated configuration to the pipelines.

use std::sync::Arc;

use qca_anomaly::anomaly::{
    self, presets, AnomalyOptions, AnomalyReport, Diagnostics, LsmAction, LsmReport, RestrictedAction, Side,
};
use qca_anomaly::grpcoh::{self, CohomologyGroup, FiniteGroup, Phase, PhaseCochain};
use qca_anomaly::opwin::SiteSpec;
use qca_anomaly::qca::{self, PrimeLog, QcaExpr};
use qca_anomaly::spectra::{self, HamiltonianSpec, ScanEntry, Terms, Trend};
use rayon::prelude::*;

use crate::config::{BuiltAction, GridRow, Limits, Mode, RunConfig};
use crate::error::{CliError, EXIT_INTERNAL, EXIT_OK};
use crate::report::*;

/// Significant digits of diagnostic floats (residuals, snap errors).
const DIAG_DIGITS: usize = 3;
/// Significant digits of energies and charges.
const VALUE_DIGITS: usize = 12;

impl Report {
    fn new(mode: Mode, body: Body, summary: Vec<String>, csv: Option<String>) -> Report {
        Report {
            tool: "qca-anomaly",
            version: env!("CARGO_PKG_VERSION"),
            mode,
            body,
            summary: summary_lines(&summary),
            csv,
        }
    }

    /// Exit code of a completed run: only a failed selftest is not a success.
    pub fn exit_code(&self) -> i32 {
        match &self.body {
            Body::Selftest(s) if !s.passed => EXIT_INTERNAL,
            _ => EXIT_OK,
        }
    }
}

/// Execute one run.
pub fn run(cfg: &RunConfig) -> Result<Report, CliError> {
    match cfg.mode {
        Mode::Anomaly => match cfg.build_action()? {
            BuiltAction::Finite(spec) => {
                let report = anomaly::anomaly_class(&spec, &options(cfg))?;
                check_snap(report.diagnostics.max_snap_error, &cfg.limits)?;
                Ok(anomaly_report(&report))
            }
            BuiltAction::Lsm(rep) => {
                let report = anomaly::lsm_pipeline(&rep, &options(cfg))?;
                check_snap(report.max_snap_error(), &cfg.limits)?;
                Ok(lsm_report(&report))
            }
        },
        Mode::Cohomology => {
            let degree = cfg.cohomology.expect("validated").degree;
            cohomology_report(&cfg.group()?, degree, cfg.limits.matrix_rows)
        }
        Mode::Gnvw => gnvw_report(cfg),
        Mode::Spectra => spectra_report(cfg),
        Mode::Selftest => Ok(selftest()),
    }
}

fn options(cfg: &RunConfig) -> AnomalyOptions {
    AnomalyOptions {
        den_cap: cfg.limits.den_cap,
        window_cap: cfg.limits.window_cap,
        side: cfg.side(),
        matrix_rows: cfg.limits.matrix_rows,
    }
}

fn check_snap(err: f64, limits: &Limits) -> Result<(), CliError> {
    if err > limits.tol {
        return Err(CliError::Check {
            context: "phase snapping".into(),
            reason: format!("snap error {err:.3e} exceeds tolerance {:.3e}", limits.tol),
        });
    }
    Ok(())
}

fn group_json(g: &FiniteGroup) -> GroupJson {
    GroupJson { name: g.name().to_string(), order: g.order() }
}

fn side_str(side: Side) -> String {
    match side {
        Side::Right => "right".into(),
        Side::Left => "left".into(),
    }
}

fn index_json(p: &PrimeLog) -> IndexJson {
    p.exponents().iter().filter(|(_, e)| **e != 0).map(|(p, e)| (p.to_string(), *e)).collect()
}

fn cochain_json(f: &PhaseCochain) -> Vec<CochainEntryJson> {
    f.entries().map(|(args, phase)| CochainEntryJson { args, phase: phase.to_string() }).collect()
}

fn diagnostics_json(d: &Diagnostics) -> DiagnosticsJson {
    DiagnosticsJson {
        homomorphism_residual: sig(d.homomorphism_residual, DIAG_DIGITS),
        max_v_residual: sig(d.max_v_residual, DIAG_DIGITS),
        max_scalar_deviation: sig(d.max_scalar_deviation, DIAG_DIGITS),
        max_snap_error: sig(d.max_snap_error, DIAG_DIGITS),
        v_windows: d.v_windows.iter().map(|(k, w)| (k.clone(), w.to_string())).collect(),
        notes: d.notes.clone(),
    }
}

fn verdict_line(anomalous: bool) -> String {
    if anomalous { VERDICT_ANOMALOUS } else { VERDICT_TRIVIAL }.to_string()
}

fn cohomology_line(h: &CohomologyGroup) -> String {
    format!("H{} = {h}", superscript(h.degree()))
}

pub fn anomaly_report(r: &AnomalyReport) -> Report {
    let omega: Vec<_> = r
        .omega
        .values
        .iter()
        .map(|(args, v)| OmegaJson {
            args: args.clone(),
            phase: v.phase.to_string(),
            snap_error: sig(v.snap_error, DIAG_DIGITS),
        })
        .collect();
    let nonzero: Vec<String> = r
        .omega
        .values
        .iter()
        .filter(|(_, v)| !v.phase.is_zero())
        .map(|(a, v)| format!("ω({}) = {}", join(a), v.phase))
        .collect();
    let anomalous = !r.class.is_zero();
    let mut summary =
        vec![format!("group: {} (order {})", r.group.name(), r.group.order()), format!("side: {}", side_str(r.side))];
    for (g, p) in r.gnvw.iter().enumerate() {
        summary.push(format!("gnvw[{g}]: {p}"));
    }
    summary.push(format!("stacked: {}", if r.stacked { "yes" } else { "no" }));
    summary.push(if nonzero.is_empty() { "ω ≡ 0".into() } else { nonzero.join(", ") });
    summary.push(cohomology_line(&r.cohomology));
    summary.push(format!("class: {}", r.class));
    summary.push(format!("max snap error: {}", fmt_g(r.diagnostics.max_snap_error, 3)));
    summary.push(verdict_line(anomalous));
    let body = AnomalyJson {
        group: group_json(&r.group),
        side: side_str(r.side),
        gnvw: r.gnvw.iter().map(index_json).collect(),
        stacked: r.stacked,
        omega,
        cohomology: r.cohomology.to_string(),
        invariant_factors: r.cohomology.invariant_factors(),
        class: r.class.residues().to_vec(),
        verdict: r.verdict.as_str().into(),
        diagnostics: diagnostics_json(&r.diagnostics),
    };
    Report::new(Mode::Anomaly, Body::Anomaly(body), summary, None)
}

pub fn lsm_report(r: &LsmReport) -> Report {
    let omega = r
        .omega_values
        .iter()
        .map(|(args, v)| OmegaJson {
            args: args.map(|(g, n)| [g as i64, n]),
            phase: v.phase.to_string(),
            snap_error: sig(v.snap_error, DIAG_DIGITS),
        })
        .collect();
    let anomalous = !r.slant_class.is_zero();
    let diagnostics = Diagnostics {
        homomorphism_residual: r.homomorphism_residual,
        max_v_residual: r.vtable.max_residual(),
        max_scalar_deviation: r.omega_values.iter().map(|(_, v)| v.scalar_deviation).fold(0.0, f64::max),
        max_snap_error: r.max_snap_error(),
        v_windows: r
            .vtable
            .iter()
            .map(|((g, h), v)| (format!("({},{}),({},{})", g.0, g.1, h.0, h.1), v.gate.window()))
            .collect(),
        notes: r.notes.clone(),
    };
    let summary = vec![
        format!("group: {} × ℤ (order {} on-site)", r.group.name(), r.group.order()),
        format!("side: {}", side_str(r.side)),
        format!("translation index: {}", r.translation_index),
        format!("stacked translation index: {}", r.stacked_index),
        cohomology_line(&r.cohomology),
        format!("slant class: {}", r.slant_class),
        format!("projective class: {}", r.rho_class),
        format!("classes agree: {}", if r.classes_agree() { "yes" } else { "no" }),
        format!("max snap error: {}", fmt_g(r.max_snap_error(), 3)),
        verdict_line(anomalous),
    ];
    let body = LsmJson {
        group: group_json(&r.group),
        side: side_str(r.side),
        translation_index: index_json(&r.translation_index),
        stacked_index: index_json(&r.stacked_index),
        omega,
        slant: cochain_json(&r.slant),
        rho: cochain_json(&r.rho),
        cohomology: r.cohomology.to_string(),
        invariant_factors: r.cohomology.invariant_factors(),
        slant_class: r.slant_class.residues().to_vec(),
        rho_class: r.rho_class.residues().to_vec(),
        classes_agree: r.classes_agree(),
        verdict: r.verdict().as_str().into(),
        diagnostics: diagnostics_json(&diagnostics),
    };
    Report::new(Mode::Anomaly, Body::Lsm(body), summary, None)
}

pub fn cohomology_report(group: &FiniteGroup, degree: usize, matrix_rows: usize) -> Result<Report, CliError> {
    let h = grpcoh::cohomology_capped(group, degree, matrix_rows)?;
    let generators = (0..h.invariant_factors().len())
        .map(|i| cochain_json(&h.generator(group, i)).into_iter().filter(|e| e.phase != "0/1").collect())
        .collect();
    let summary = vec![format!("group: {} (order {})", group.name(), group.order()), cohomology_line(&h)];
    let body = CohomologyJson {
        group: group_json(group),
        degree,
        cohomology: h.to_string(),
        invariant_factors: h.invariant_factors(),
        generators,
    };
    Ok(Report::new(Mode::Cohomology, Body::Cohomology(body), summary, None))
}

fn gnvw_entry(label: String, e: &QcaExpr) -> Result<GnvwEntryJson, CliError> {
    let (symbolic, numeric) = anomaly::gnvw_checked(e)?;
    Ok(GnvwEntryJson {
        element: label,
        symbolic: index_json(&symbolic),
        numeric: numeric.as_ref().map(|n| index_json(&n.index)),
        dim_right: numeric.as_ref().map(|n| n.dim_right),
        dim_left: numeric.as_ref().map(|n| n.dim_left),
    })
}

fn gnvw_report(cfg: &RunConfig) -> Result<Report, CliError> {
    let mut elements = Vec::new();
    match cfg.build_action()? {
        BuiltAction::Finite(spec) => {
            for (g, e) in spec.map().iter().enumerate() {
                elements.push(gnvw_entry(g.to_string(), e)?);
            }
        }
        BuiltAction::Lsm(rep) => {
            let action = LsmAction::new(rep, cfg.side())?;
            for g in action.rep().group().elements() {
                elements.push(gnvw_entry(g.to_string(), &action.unstacked((g, 0))?)?);
            }
            elements.push(gnvw_entry("translation".into(), &action.unstacked((0, 1))?)?);
            elements.push(gnvw_entry("stacked translation".into(), &action.alpha((0, 1))?)?);
        }
    }
    let summary = elements
        .iter()
        .map(|e| {
            let dims = match (e.dim_right, e.dim_left) {
                (Some(r), Some(l)) => format!(" (dim R = {r}, dim L = {l})"),
                _ => " (numeric check skipped)".into(),
            };
            format!("gnvw[{}]: {}{dims}", e.element, fmt_index(&e.symbolic))
        })
        .collect();
    Ok(Report::new(Mode::Gnvw, Body::Gnvw(GnvwJson { elements }), summary, None))
}

fn fmt_index(i: &IndexJson) -> String {
    if i.is_empty() {
        return "0".into();
    }
    let parts: Vec<String> = i.iter().map(|(p, e)| format!("{e}·log {p}")).collect();
    parts.join(" + ")
}

fn join(a: &[usize]) -> String {
    a.iter().map(|g| g.to_string()).collect::<Vec<_>>().join(",")
}

/// Scan rows in parallel on `threads` workers; results keep grid order.
pub fn scan(grid: &[HamiltonianSpec], k: usize, threads: usize) -> Result<Vec<ScanEntry>, CliError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| CliError::Check { context: "thread pool".into(), reason: e.to_string() })?;
    Ok(pool.install(|| {
        grid.par_iter().map(|spec| ScanEntry { spec: *spec, outcome: spectra::spectrum_row(spec, k) }).collect()
    }))
}

fn trend_str(t: Trend) -> &'static str {
    match t {
        Trend::Gapless => "gapless",
        Trend::Degenerate => "degenerate",
        Trend::UniqueGapped => "unique-gapped",
        Trend::Undetermined => "undetermined",
    }
}

fn spectra_report(cfg: &RunConfig) -> Result<Report, CliError> {
    let s = cfg.spectra.as_ref().expect("validated");
    let grid: Vec<HamiltonianSpec> = s.grid.iter().map(GridRow::spec).collect();
    let entries = scan(&grid, s.k, cfg.limits.threads)?;
    let mut csv = format!("{CSV_HEADER}\n");
    let mut rows = Vec::with_capacity(entries.len());
    let mut summary = Vec::new();
    for entry in &entries {
        let sp = &entry.spec;
        let mut json = SpectrumJson {
            row: GridRow::from_spec(sp),
            symmetric: sp.is_symmetric(),
            energies: None,
            gap: None,
            gap2: None,
            charge: None,
            max_residual: None,
            error: None,
        };
        let head = [sp.n as f64, sp.j, sp.a].map(|x| fmt_g(x, VALUE_DIGITS));
        match &entry.outcome {
            Ok(r) => {
                let vals = [r.energies[0], r.energies[1], r.energies[2], r.gap, r.gap2, r.charge.re, r.charge.im];
                let cells: Vec<String> =
                    head.iter().cloned().chain(vals.iter().map(|x| fmt_g(*x, VALUE_DIGITS))).collect();
                csv.push_str(&cells.join(","));
                json.energies = Some(r.energies.iter().map(|e| sig(*e, VALUE_DIGITS)).collect());
                json.gap = Some(sig(r.gap, VALUE_DIGITS));
                json.gap2 = Some(sig(r.gap2, VALUE_DIGITS));
                json.charge = Some([sig(r.charge.re, VALUE_DIGITS), sig(r.charge.im, VALUE_DIGITS)]);
                json.max_residual = Some(sig(r.max_residual, DIAG_DIGITS));
                summary.push(format!(
                    "N={} J={} a={} terms={}: E0={} gap={} gap2={}",
                    sp.n,
                    fmt_g(sp.j, 6),
                    fmt_g(sp.a, 6),
                    terms_str(sp.terms),
                    fmt_g(r.energies[0], 9),
                    fmt_g(r.gap, 6),
                    fmt_g(r.gap2, 6)
                ));
            }
            Err(e) => {
                let cells: Vec<String> =
                    head.iter().cloned().chain(std::iter::repeat_n("nan".to_string(), 7)).collect();
                csv.push_str(&cells.join(","));
                json.error = Some(e.to_string());
                summary.push(format!(
                    "N={} J={} a={} terms={}: error: {e}",
                    sp.n,
                    fmt_g(sp.j, 6),
                    fmt_g(sp.a, 6),
                    terms_str(sp.terms)
                ));
            }
        }
        csv.push('\n');
        rows.push(json);
    }
    let trends: Vec<TrendJson> = spectra::witness_trends(&entries)
        .into_iter()
        .map(|(sp, t)| {
            let row = GridRow::from_spec(&sp);
            summary.push(format!(
                "trend J={} a={} terms={}: {}",
                fmt_g(sp.j, 6),
                fmt_g(sp.a, 6),
                terms_str(sp.terms),
                trend_str(t)
            ));
            TrendJson { j: row.j, a: row.a, terms: row.terms, trend: trend_str(t).into() }
        })
        .collect();
    let body = SpectraJson { k: s.k, rows, trends };
    Ok(Report::new(Mode::Spectra, Body::Spectra(body), summary, Some(csv)))
}

fn terms_str(t: Terms) -> String {
    let names = [(t.h0, "H0"), (t.h1, "H1"), (t.hj, "HJ"), (t.a, "a")];
    names.iter().filter(|(on, _)| *on).map(|(_, n)| *n).collect::<Vec<_>>().join("+")
}

type Check = Result<String, String>;
type NamedCheck = (&'static str, fn() -> Check);

fn ensure(ok: bool, detail: String) -> Check {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn core<T>(r: qca_anomaly::Result<T>) -> Result<T, String> {
    r.map_err(|e| e.to_string())
}

fn check_cohomology(orders: &[usize], degree: usize, want: &[u64]) -> Check {
    let g = core(FiniteGroup::cyclic_product(orders))?;
    let h = core(grpcoh::cohomology(&g, degree))?;
    ensure(h.invariant_factors() == want, format!("H{}({}) = {h}", superscript(degree), g.name()))
}

fn check_levin_gu() -> Check {
    let r = core(anomaly::anomaly_class(&core(presets::levin_gu_z2())?, &AnomalyOptions::default()))?;
    let w = r.omega.omega.get(&[1, 1, 1]);
    let ok = w == Phase::new(1, 2)
        && r.class.residues() == [1]
        && grpcoh::is_cocycle(&r.group, &r.omega.omega)
        && r.diagnostics.max_snap_error < 1e-8;
    ensure(ok, format!("ω(1,1,1) = {w}, class {}", r.class))
}

fn check_onsite() -> Check {
    let r = core(anomaly::anomaly_class(&core(presets::onsite_z2())?, &AnomalyOptions::default()))?;
    ensure(r.omega.omega.is_zero() && r.class.is_zero(), format!("class {}", r.class))
}

fn check_lsm() -> Check {
    let r = core(anomaly::lsm_pipeline(&core(presets::pauli_z2z2())?, &AnomalyOptions::default()))?;
    ensure(
        r.classes_agree() && !r.slant_class.is_zero(),
        format!("slant {}, projective {}", r.slant_class, r.rho_class),
    )
}

fn check_shift_index() -> Check {
    let s = Arc::new(SiteSpec::qubits());
    let shift = core(QcaExpr::identity(s).then_shift(0, 1))?;
    let n = core(qca::gnvw_numeric_detailed(&shift))?;
    let ok = n.index == PrimeLog::log_of(2, 1) && n.dim_right == 4 && n.dim_left == 1;
    ensure(ok, format!("index {}, dims {}/{}", n.index, n.dim_right, n.dim_left))
}

fn check_gamma_index() -> Check {
    let gamma = core(presets::levin_gu_gamma(&Arc::new(SiteSpec::qubits())))?;
    let n = core(qca::gnvw_numeric(&gamma))?;
    ensure(n.is_zero() && gamma.gnvw_symbolic().is_zero(), format!("index {n}"))
}

fn check_paramagnet() -> Check {
    let row = core(spectra::spectrum_row(&core(HamiltonianSpec::new(6, 0.0, 0.0, Terms::PARAMAGNET))?, 3))?;
    let ok = (row.energies[0] + 6.0).abs() < 1e-8 && (row.energies[1] + 4.0).abs() < 1e-8;
    ensure(ok, format!("E0 = {}, E1 = {}", fmt_g(row.energies[0], 10), fmt_g(row.energies[1], 10)))
}

fn check_commutator() -> Check {
    let spec = core(HamiltonianSpec::new(6, 0.7, 0.3, Terms::ALL))?;
    let h = core(spectra::build_hamiltonian(&spec))?;
    let c = spectra::symmetry_commutator(&h, 6);
    ensure(c < 1e-9 && h.is_hermitian(), format!("‖[H, U]‖ = {c:.1e}"))
}

fn check_rephasing() -> Check {
    let (neutral, _) = core(anomaly::stack_neutralize(&core(presets::levin_gu_z2())?))?;
    let model = core(RestrictedAction::from_action(&neutral, Side::Right))?;
    let group = model.group().clone();
    let base = core(anomaly::omega_cocycle(&model, &AnomalyOptions::default()))?;
    let theta = PhaseCochain::from_fn(&group, 2, |a| Phase::new((3 * a[0] + 5 * a[1] + 1) as i64, 8));
    let table = base.vtable.rephased(|g, h| theta.get(&[*g, *h]));
    let moved = core(anomaly::omega_from_vtable(&model, table, 48))?;
    let want = core(base.omega.sub(&core(grpcoh::coboundary(&group, &theta))?))?;
    ensure(moved.omega == want, "ω' = ω − dθ".into())
}

/// Quick end-to-end checks of every pipeline.
pub fn selftest() -> Report {
    let checks: Vec<NamedCheck> = vec![
        ("cohomology H3(Z/2)", || check_cohomology(&[2], 3, &[2])),
        ("cohomology H2(Z/2)", || check_cohomology(&[2], 2, &[])),
        ("cohomology H2(Z/2 x Z/2)", || check_cohomology(&[2, 2], 2, &[2])),
        ("levin-gu anomaly", check_levin_gu),
        ("onsite control", check_onsite),
        ("pauli lsm", check_lsm),
        ("shift index", check_shift_index),
        ("levin-gu circuit index", check_gamma_index),
        ("paramagnet spectrum", check_paramagnet),
        ("symmetric hamiltonian", check_commutator),
        ("rephasing", check_rephasing),
    ];
    let results: Vec<CheckJson> = checks
        .into_iter()
        .map(|(name, f)| {
            let outcome = std::panic::catch_unwind(f).unwrap_or_else(|_| Err("panicked".into()));
            let (passed, detail) = match outcome {
                Ok(d) => (true, d),
                Err(d) => (false, d),
            };
            CheckJson { name: name.into(), passed, detail }
        })
        .collect();
    let passed = results.iter().all(|c| c.passed);
    let mut summary: Vec<String> = results
        .iter()
        .map(|c| format!("{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail))
        .collect();
    summary.push(format!("selftest: {}", if passed { "passed" } else { "FAILED" }));
    Report::new(Mode::Selftest, Body::Selftest(SelftestJson { checks: results, passed }), summary, None)
}
