use qca_anomaly::grpcoh::FiniteGroup;
use qca_anomaly_cli::config::{
    parse_config, serialize_config, BuiltAction, GroupConfig, Mode, Preset, SideConfig, TermName,
};
use qca_anomaly_cli::CliError;

const LEVIN_GU: &str = r#"
mode = "anomaly"

[action]
preset = "levin-gu-z2"
"#;

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

fn validation_path(text: &str) -> String {
    match parse_config(text) {
        Err(CliError::Validation { path, .. }) => path,
        other => panic!("expected a validation error, got {other:?}"),
    }
}

#[test]
fn minimal_levin_gu() {
    let cfg = parse_config(LEVIN_GU).unwrap();
    assert_eq!(cfg.mode, Mode::Anomaly);
    assert_eq!(cfg.group, Some(GroupConfig::Cyclic { order: 2 }));
    let action = cfg.action.as_ref().unwrap();
    assert_eq!(action.preset, Some(Preset::LevinGuZ2));
    assert_eq!(action.side, SideConfig::Right);
    assert!(matches!(cfg.build_action().unwrap(), BuiltAction::Finite(_)));
}

#[test]
fn non_unitary_template_is_rejected() {
    let text = r#"
mode = "anomaly"

[group]
kind = "cyclic"
order = 2

[action.custom]
registers = [2]
templates = [{ anchor = 0, span = 1, unitary = [[1, 0], [0, 0], [0, 0], [2, 0]] }]
elements = [{ steps = [] }, { steps = [{ kind = "layer", period = 1, templates = [0] }] }]
"#;
    assert_eq!(validation_path(text), "action.custom.templates[0].unitary");
}

#[test]
fn pauli_lsm_round_trip() {
    let cfg = parse_config(PAULI_LSM).unwrap();
    let rep = cfg.projective_rep().unwrap();
    assert_eq!(rep.dim(), 2);
    assert_eq!(rep.group(), &FiniteGroup::cyclic_product(&[2, 2]).unwrap());
    assert_eq!(parse_config(&serialize_config(&cfg)).unwrap(), cfg);
}

#[test]
fn custom_and_spectra_round_trip() {
    let custom = r#"
mode = "gnvw"

[group]
kind = "cyclic"
order = 2

[action]
side = "left"

[action.custom]
registers = [2, 2]
elements = [
    { steps = [] },
    { steps = [
        { kind = "shift", register = 0, displacement = 1 },
        { kind = "layer", period = 1, templates = [{ anchor = 0, span = 1, unitary = [[0, 0], [1, 0], [1, 0], [0, 0], [0, 0], [0, 0], [0, 0], [0, 0], [0, 0], [0, 0], [0, 0], [0, 0], [0, 0], [0, 0], [0, 0], [0, 0]] }] },
    ] },
]
"#;
    // the inline template is not unitary
    assert_eq!(validation_path(custom), "action.custom.elements[1].steps[1].templates[0].unitary");
    let fixed = custom.replace(
        "[[0, 0], [1, 0], [1, 0], [0, 0], [0, 0], [0, 0], [0, 0], [0, 0], [0, 0], [0, 0], [0, 0], [0, 0], [0, 0], [0, 0], [0, 0], [0, 0]]",
        "[[0, 0], [1, 0], [0, 0], [0, 0], [1, 0], [0, 0], [0, 0], [0, 0], [0, 0], [0, 0], [0, 0], [1, 0], [0, 0], [0, 0], [1, 0], [0, 0]]",
    );
    let cfg = parse_config(&fixed).unwrap();
    assert_eq!(parse_config(&serialize_config(&cfg)).unwrap(), cfg);

    let spectra = r#"
mode = "spectra"

[spectra]
k = 4
grid = [{ n = 8, j = 1.5, a = 0.25, terms = ["h0", "h1", "hj", "a"] }]

[limits]
threads = 2
"#;
    let cfg = parse_config(spectra).unwrap();
    let s = cfg.spectra.as_ref().unwrap();
    assert_eq!(s.grid[0].terms, vec![TermName::H0, TermName::H1, TermName::Hj, TermName::A]);
    assert_eq!(parse_config(&serialize_config(&cfg)).unwrap(), cfg);
}

#[test]
fn defaults_are_filled() {
    let cfg = parse_config("mode = \"spectra\"\n").unwrap();
    assert_eq!(cfg.spectra.as_ref().unwrap().k, 3);
    assert_eq!(cfg.spectra.as_ref().unwrap().grid.len(), qca_anomaly::spectra::default_grid().len());
    assert_eq!(cfg.limits.window_cap, 6);
    assert_eq!(cfg.output.name, "report");
}

#[test]
fn errors_name_their_path() {
    assert!(matches!(parse_config("mode = \"anomaly\"\nbogus = 1\n"), Err(CliError::Parse(_))));
    assert!(matches!(parse_config("mode = "), Err(CliError::Parse(_))));
    assert_eq!(validation_path("mode = \"spectra\"\n[spectra]\nk = 9\n"), "spectra.k");
    assert_eq!(validation_path("mode = \"spectra\"\n[limits]\ntol = -1.0\n"), "limits.tol");
    assert_eq!(validation_path("mode = \"cohomology\"\n[group]\nkind = \"cyclic\"\norder = 2\n"), "cohomology");
    assert_eq!(
        validation_path(
            "mode = \"anomaly\"\n[group]\nkind = \"cyclic\"\norder = 3\n[action]\npreset = \"levin-gu-z2\"\n"
        ),
        "group"
    );
    let short = PAULI_LSM.replace("    [[0, 0], [-1, 0], [1, 0], [0, 0]],\n", "");
    assert_eq!(validation_path(&short), "action.matrices");
    let table = "mode = \"cohomology\"\n[cohomology]\ndegree = 2\n[group]\nkind = \"table\"\nrows = [[0, 1], [0, 1]]\n";
    assert_eq!(validation_path(table), "group");
}
