//! End-to-end acceptance checks, one line per criterion.

#[path = "../../core/tests/common/free_fermion.rs"]
mod free_fermion;
#[path = "../../core/tests/common/random.rs"]
mod random;

use std::io::Write;
use std::sync::Arc;
use std::time::{Duration, Instant};

use qca_anomaly::anomaly::{self, presets, AnomalyOptions, ImplementingUnitary, RestrictedAction, Side, VTable};
use qca_anomaly::grpcoh::{self, FiniteGroup, Phase, PhaseCochain};
use qca_anomaly::opwin::{op_distance, pauli, LocalOperator, SiteSpec, Window};
use qca_anomaly::qca::{self, compose, PrimeLog, QcaExpr, Step};
use qca_anomaly::spectra::RESIDUAL_TOL;
use qca_anomaly::TOL_AUTOMORPHISM;
use qca_anomaly_cli::config::parse_config;
use qca_anomaly_cli::report::{AnomalyJson, Body, LsmJson, Report, SpectraJson};
use qca_anomaly_cli::run;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const LEVIN_GU: &str = "mode = \"anomaly\"\n\n[action]\npreset = \"levin-gu-z2\"\n";

const ONSITE: &str = r#"
mode = "anomaly"

[group]
kind = "cyclic"
order = 2

[action]
preset = "onsite"
matrices = [[[1, 0], [0, 0], [0, 0], [1, 0]], [[0, 0], [1, 0], [1, 0], [0, 0]]]
"#;

// π(a, b) = XᵃZᵇ, labelled g = 2a + b
const PAULI_LSM: &str = r#"
mode = "anomaly"

[group]
kind = "product"
orders = [2, 2]

[action]
preset = "lsm"
matrices = [
    [[1, 0], [0, 0], [0, 0], [1, 0]],
    [[1, 0], [0, 0], [0, 0], [-1, 0]],
    [[0, 0], [1, 0], [1, 0], [0, 0]],
    [[0, 0], [-1, 0], [1, 0], [0, 0]],
]
"#;

// π(a, b) = diag((−1)ᵃ, (−1)ᵇ)
const LINEAR_LSM: &str = r#"
mode = "anomaly"

[group]
kind = "product"
orders = [2, 2]

[action]
preset = "lsm"
matrices = [
    [[1, 0], [0, 0], [0, 0], [1, 0]],
    [[1, 0], [0, 0], [0, 0], [-1, 0]],
    [[-1, 0], [0, 0], [0, 0], [1, 0]],
    [[-1, 0], [0, 0], [0, 0], [-1, 0]],
]
"#;

type Outcome = Result<String, String>;
/// Name, check and runtime budget in seconds.
type Criterion = (&'static str, fn() -> Outcome, u64);

fn ensure(ok: bool, msg: impl Into<String>) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn s<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn run_text(text: &str) -> Result<Report, String> {
    run(&parse_config(text).map_err(s)?).map_err(s)
}

fn anomaly_body(r: &Report) -> Result<&AnomalyJson, String> {
    match &r.body {
        Body::Anomaly(a) => Ok(a),
        _ => Err("expected an anomaly report".into()),
    }
}

fn lsm_body(r: &Report) -> Result<&LsmJson, String> {
    match &r.body {
        Body::Lsm(a) => Ok(a),
        _ => Err("expected an lsm report".into()),
    }
}

fn spectra_body(r: &Report) -> Result<&SpectraJson, String> {
    match &r.body {
        Body::Spectra(a) => Ok(a),
        _ => Err("expected a spectra report".into()),
    }
}

fn levin_gu() -> Outcome {
    let report = run_text(LEVIN_GU)?;
    let a = anomaly_body(&report)?;
    for w in &a.omega {
        let want = if w.args == [1, 1, 1] { "1/2" } else { "0/1" };
        ensure(w.phase == want, format!("ω{:?} = {}", w.args, w.phase))?;
        ensure(w.snap_error < 1e-8, format!("snap error {} at {:?}", w.snap_error, w.args))?;
    }
    ensure(a.invariant_factors == [2], format!("invariant factors {:?}", a.invariant_factors))?;
    ensure(a.class == [1], format!("class {:?}", a.class))?;
    ensure(a.verdict == "Anomalous", a.verdict.clone())?;
    ensure(
        report.summary.contains("verdict: Anomalous — no G-invariant gapped ground state possible (Theorem 4.4)"),
        "summary verdict line",
    )?;
    // V(−1,−1) is Z₀ up to a phase; the extraction fixes the gauge
    let core = anomaly::anomaly_class(&presets::levin_gu_z2().map_err(s)?, &AnomalyOptions::default()).map_err(s)?;
    let v = core.omega.vtable.get(&1, &1).ok_or("no V(1,1)")?;
    let z0 = LocalOperator::on_site(v.gate.sites().clone(), 0, pauli::z()).map_err(s)?;
    let dist = op_distance(&v.gate.clone().compact(1e-11), &z0).map_err(s)?;
    ensure(dist < 1e-9, format!("‖V(1,1) − Z₀‖ = {dist:.1e}"))?;
    Ok(format!("ω(1,1,1) = 1/2, class [1] of ℤ/2, V(1,1) = Z₀ within {dist:.1e}"))
}

fn onsite() -> Outcome {
    let report = run_text(ONSITE)?;
    let a = anomaly_body(&report)?;
    ensure(a.omega.iter().all(|w| w.phase == "0/1"), "ω is not identically zero")?;
    ensure(a.class.iter().all(|c| *c == 0), format!("class {:?}", a.class))?;
    ensure(a.verdict == "NonAnomalous", a.verdict.clone())?;
    Ok("ω ≡ 0, NonAnomalous".into())
}

fn lsm() -> Outcome {
    let report = run_text(PAULI_LSM)?;
    let a = lsm_body(&report)?;
    ensure(
        a.translation_index == PrimeLog::log_of(2, 1).exponents().iter().map(|(p, e)| (p.to_string(), *e)).collect(),
        "translation index",
    )?;
    ensure(a.stacked_index.is_empty(), "stacked translation has nonzero index")?;
    ensure(a.invariant_factors == [2], format!("H² factors {:?}", a.invariant_factors))?;
    ensure(a.slant_class == a.rho_class, format!("slant {:?} vs ρ {:?}", a.slant_class, a.rho_class))?;
    ensure(a.slant_class == [1], format!("slant class {:?}", a.slant_class))?;
    ensure(a.verdict == "Anomalous", a.verdict.clone())?;
    // independent recomputation of the class of ρ
    let rep = presets::pauli_z2z2().map_err(s)?;
    let rho = anomaly::projective_cocycle(&rep).map_err(s)?;
    let h2 = grpcoh::cohomology(rep.group(), 2).map_err(s)?;
    let class = grpcoh::class_of(rep.group(), &rho, &h2).map_err(s)?;
    ensure(class.residues() == a.rho_class.as_slice(), "class of ρ")?;

    let linear = run_text(LINEAR_LSM)?;
    let b = lsm_body(&linear)?;
    ensure(
        b.slant_class == [0] && b.rho_class == [0],
        format!("linear rep classes {:?}/{:?}", b.slant_class, b.rho_class),
    )?;
    ensure(b.verdict == "NonAnomalous", b.verdict.clone())?;
    Ok("slant class = [ρ] = [1] in ℤ/2; linear rep trivial".into())
}

fn cohomology() -> Outcome {
    let cases: [(&str, usize, &[u64], &str, &str); 3] = [
        ("kind = \"cyclic\"\norder = 2", 3, &[2], "H³ = ℤ/2", "H³(ℤ/2) = ℤ/2"),
        ("kind = \"cyclic\"\norder = 2", 2, &[], "H² = 0", "H²(ℤ/2) = 0"),
        ("kind = \"product\"\norders = [2, 2]", 2, &[2], "H² = ℤ/2", "H²(ℤ/2 × ℤ/2) = ℤ/2"),
    ];
    let mut notes = Vec::new();
    for (group, degree, want, line, label) in cases {
        let start = Instant::now();
        let text = format!("mode = \"cohomology\"\n[group]\n{group}\n[cohomology]\ndegree = {degree}\n");
        let report = run_text(&text)?;
        let Body::Cohomology(c) = &report.body else { return Err("expected a cohomology report".into()) };
        ensure(c.invariant_factors == want, format!("{line}: got {:?}", c.invariant_factors))?;
        ensure(report.summary.lines().any(|l| l == line), format!("summary lacks {line}"))?;
        let t = start.elapsed();
        ensure(t < Duration::from_secs(5), format!("{line} took {t:?}"))?;
        notes.push(label);
    }
    // the Pauli representation realizes the nonzero class of H²(ℤ/2 × ℤ/2)
    let rep = presets::pauli_z2z2().map_err(s)?;
    let rho = anomaly::projective_cocycle(&rep).map_err(s)?;
    let h2 = grpcoh::cohomology(rep.group(), 2).map_err(s)?;
    ensure(!grpcoh::class_of(rep.group(), &rho, &h2).map_err(s)?.is_zero(), "Pauli class is zero")?;
    Ok(notes.join(", "))
}

fn gnvw() -> Outcome {
    let mut count = 0;
    for seed in 0..60u64 {
        let (d, layers) = if seed % 2 == 0 { (2, 2) } else { (3, 1) };
        let e = random::expr(0xacce_5500 + seed, d, layers);
        let numeric = qca::gnvw_numeric(&e).map_err(s)?;
        ensure(numeric == qca::gnvw_symbolic(&e), format!("seed {seed}: numeric {numeric}"))?;
        count += 1;
    }
    let shift = QcaExpr::identity(Arc::new(SiteSpec::qubits())).then_shift(0, 1).map_err(s)?;
    let n = qca::gnvw_numeric_detailed(&shift).map_err(s)?;
    ensure(n.index == PrimeLog::log_of(2, 1), format!("shift index {}", n.index))?;
    ensure(n.dim_right == 4 && n.dim_left == 1, format!("dims {}/{}", n.dim_right, n.dim_left))?;
    Ok(format!("{count} random expressions agree; shift gives {{2:1}} with dims 4/1"))
}

fn levin_gu_model() -> Result<RestrictedAction, String> {
    RestrictedAction::from_action(&presets::levin_gu_z2().map_err(s)?, Side::Right).map_err(s)
}

fn cocycle_properties() -> Outcome {
    let model = levin_gu_model()?;
    let group: FiniteGroup = model.group().clone();
    let opts = AnomalyOptions::default();
    let base = anomaly::omega_cocycle(&model, &opts).map_err(s)?;
    let h3 = grpcoh::cohomology(&group, 3).map_err(s)?;
    let class = grpcoh::class_of(&group, &base.omega, &h3).map_err(s)?;

    let d_omega = grpcoh::coboundary(&group, &base.omega).map_err(s)?;
    ensure(d_omega.is_zero(), "dω ≠ 0")?;
    let onsite = anomaly::anomaly_class(&presets::onsite_z2().map_err(s)?, &opts).map_err(s)?;
    ensure(grpcoh::coboundary(&group, &onsite.omega.omega).map_err(s)?.is_zero(), "dω ≠ 0 for the on-site action")?;

    let sites = Arc::new(SiteSpec::qubits());
    let mut rng = ChaCha8Rng::seed_from_u64(0xb0b);
    let trials = 10;
    for trial in 0..trials {
        let window = Window::new(trial % 3, trial % 3 + 1);
        let mut units = vec![LocalOperator::identity(sites.clone(), window).map_err(s)?];
        for _ in 1..group.order() {
            units.push(LocalOperator::new(sites.clone(), window, random::unitary(4, &mut rng)).map_err(s)?);
        }
        let mut betas = Vec::new();
        for g in group.elements() {
            let ad_u = QcaExpr::identity(sites.clone()).then(Step::Local(units[g].clone())).map_err(s)?;
            betas.push(compose(&model.betas()[g], &ad_u).map_err(s)?);
        }
        let tilde = RestrictedAction::from_betas(group.clone(), sites.clone(), betas).map_err(s)?;
        // transported gauge: Ṽ(g,h) = W_g β_g(W_h) V(g,h) W_gh† with W_g = β_g(U_g)
        let w: Vec<LocalOperator> =
            group.elements().map(|g| model.betas()[g].apply(&units[g])).collect::<Result<_, _>>().map_err(s)?;
        let mut table = VTable::default();
        for g in group.elements() {
            for h in group.elements() {
                let v = base.vtable.get(&g, &h).ok_or("missing V")?;
                let gate = w[g]
                    .product(&model.betas()[g].apply(&w[h]).map_err(s)?)
                    .and_then(|x| x.product(&v.gate))
                    .and_then(|x| x.product(&w[group.mul(g, h)].adjoint()))
                    .map_err(s)?;
                table.insert(g, h, ImplementingUnitary { gate, residual: v.residual });
            }
        }
        let transported = anomaly::omega_from_vtable(&tilde, table, 48).map_err(s)?;
        ensure(transported.omega == base.omega, format!("trial {trial}: cocycle moved under β ∘ Ad U"))?;
        let extracted = anomaly::omega_cocycle(&tilde, &opts).map_err(s)?;
        ensure(
            grpcoh::class_of(&group, &extracted.omega, &h3).map_err(s)? == class,
            format!("trial {trial}: class moved"),
        )?;
    }

    for trial in 0..trials {
        let theta = PhaseCochain::from_fn(&group, 2, |_| Phase::new(rng.random_range(0..12), 12));
        let table = base.vtable.rephased(|g, h| theta.get(&[*g, *h]));
        let moved = anomaly::omega_from_vtable(&model, table, 48).map_err(s)?;
        let expected = base.omega.sub(&grpcoh::coboundary(&group, &theta).map_err(s)?).map_err(s)?;
        ensure(moved.omega == expected, format!("rephasing {trial}: ω' ≠ ω − dθ"))?;
        ensure(
            grpcoh::class_of(&group, &moved.omega, &h3).map_err(s)? == class,
            format!("rephasing {trial}: class moved"),
        )?;
    }
    Ok(format!("dω = 0; {trials} random restrictions and {trials} rephasings preserve the class"))
}

fn spectra_rows(text: &str) -> Result<(Report, SpectraJson), String> {
    let report = run_text(text)?;
    let body = spectra_body(&report)?.clone();
    Ok((report, body))
}

fn witness() -> Outcome {
    let (_, body) = spectra_rows("mode = \"spectra\"\n[limits]\nthreads = 4\n")?;
    let mut scaled = Vec::new();
    for row in &body.rows {
        let energies = row.energies.as_ref().ok_or_else(|| format!("N={} failed: {:?}", row.row.n, row.error))?;
        let has = |t: &str| row.row.terms.iter().any(|x| format!("{x:?}").eq_ignore_ascii_case(t));
        let h0 = if has("h0") { 1.0 } else { 0.0 };
        let h1 = if has("h1") { 1.0 } else { 0.0 };
        let j = if has("hj") { row.row.j } else { 0.0 };
        let oracle = free_fermion::levels(row.row.n, h0, h1, j);
        for (e, o) in energies.iter().zip(&oracle) {
            ensure((e - o).abs() < 1e-6, format!("N={} J={}: {e} vs oracle {o}", row.row.n, j))?;
        }
        let gap = row.gap.unwrap();
        let gap2 = row.gap2.unwrap();
        match (h0 > 0.0, h1 > 0.0, j != 0.0) {
            (true, true, false) => scaled.push(gap * row.row.n as f64),
            (true, false, false) => ensure((gap - 2.0).abs() < 1e-9, format!("paramagnet N={} gap {gap}", row.row.n))?,
            (true, true, true) if row.row.n == 10 => {
                ensure(gap < 1e-2 && gap2 > 0.5, format!("J=4 N=10: gap {gap}, gap2 {gap2}"))?
            }
            _ => {}
        }
    }
    ensure(scaled.len() == 4, "critical rows missing")?;
    let (lo, hi) = scaled.iter().fold((f64::INFINITY, 0.0f64), |(l, h), &x| (l.min(x), h.max(x)));
    let spread = (hi - lo) / lo;
    ensure(spread < 0.15, format!("N·Δ spread {spread:.3}"))?;
    for t in &body.trends {
        ensure(t.trend == "gapless" || t.trend == "degenerate", format!("trend {} at J={}", t.trend, t.j))?;
    }
    Ok(format!("N·Δ spread {:.1}%, oracle agreement 1e-6, ordered and paramagnet rows as expected", 100.0 * spread))
}

fn hygiene() -> Outcome {
    let spectra = "mode = \"spectra\"\n[spectra]\ngrid = [{ n = 8, terms = [\"h0\", \"h1\"] }, { n = 12, terms = [\"h0\", \"h1\"] }, { n = 10, j = 4.0, terms = [\"h0\", \"h1\", \"hj\"] }, { n = 10, j = 0.5, a = 0.3, terms = [\"h0\", \"h1\", \"hj\", \"a\"] }]\n";
    let configs = [LEVIN_GU, ONSITE, PAULI_LSM, spectra];
    let mut worst_auto = 0.0f64;
    let mut worst_res = 0.0f64;
    for text in configs {
        let a = run_text(text)?;
        let b = run_text(text)?;
        ensure(a.json() == b.json() && a.summary == b.summary && a.csv == b.csv, "reports differ between runs")?;
        let (da, db) = (tempfile::tempdir().map_err(s)?, tempfile::tempdir().map_err(s)?);
        let fa = a.emit(da.path(), "report").map_err(s)?;
        let fb = b.emit(db.path(), "report").map_err(s)?;
        for (x, y) in fa.iter().zip(&fb) {
            ensure(std::fs::read(x).map_err(s)? == std::fs::read(y).map_err(s)?, format!("{} differs", x.display()))?;
        }
        match &a.body {
            Body::Anomaly(r) => {
                worst_auto = worst_auto.max(r.diagnostics.homomorphism_residual).max(r.diagnostics.max_v_residual)
            }
            Body::Lsm(r) => {
                worst_auto = worst_auto.max(r.diagnostics.homomorphism_residual).max(r.diagnostics.max_v_residual)
            }
            Body::Spectra(r) => {
                for row in &r.rows {
                    worst_res = worst_res.max(row.max_residual.ok_or("row failed")?);
                }
            }
            _ => {}
        }
    }
    ensure(worst_auto <= TOL_AUTOMORPHISM, format!("automorphism residual {worst_auto:.1e}"))?;
    ensure(worst_res <= RESIDUAL_TOL, format!("eigenvector residual {worst_res:.1e}"))?;
    Ok(format!("residuals ≤ {worst_res:.0e}, automorphism checks ≤ {worst_auto:.0e}, reports byte-identical"))
}

#[test]
fn acceptance() {
    let criteria: [Criterion; 8] = [
        ("levin-gu anomaly", levin_gu, 10),
        ("on-site control", onsite, 5),
        ("lsm mixed anomaly", lsm, 60),
        ("cohomology kernel", cohomology, 15),
        ("gnvw agreement", gnvw, 120),
        ("cocycle properties", cocycle_properties, 120),
        ("spectral witness", witness, 300),
        ("numerical hygiene", hygiene, 300),
    ];
    let mut failed = Vec::new();
    let mut out = std::io::stdout().lock();
    writeln!(out).unwrap();
    for (i, (name, check, budget)) in criteria.into_iter().enumerate() {
        let start = Instant::now();
        let outcome = std::panic::catch_unwind(check).unwrap_or_else(|_| Err("panicked".into()));
        let t = start.elapsed();
        let outcome = outcome.and_then(|d| {
            if t <= Duration::from_secs(budget) {
                Ok(d)
            } else {
                Err(format!("{d}; took {t:.1?}, budget {budget} s"))
            }
        });
        let (tag, detail) = match &outcome {
            Ok(d) => ("PASS", d),
            Err(d) => ("FAIL", d),
        };
        writeln!(out, "criterion {} {tag} {name} ({:.1} s): {detail}", i + 1, t.as_secs_f64()).unwrap();
        if outcome.is_err() {
            failed.push(i + 1);
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
