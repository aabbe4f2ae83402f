use std::path::PathBuf;

use hyperlag_core::driver::RunConfig;

fn shipped() -> Vec<PathBuf> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let mut v: Vec<PathBuf> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "toml"))
        .collect();
    v.sort();
    v
}

#[test]
fn shipped_configs_build_their_setups() {
    let files = shipped();
    assert!(files.len() >= 4);
    for f in files {
        let cfg = RunConfig::load(&f).unwrap_or_else(|e| panic!("{}: {e}", f.display()));
        let s = cfg.setup().unwrap();
        assert!(s.t_final > 0.0);
        assert_eq!(s.cells.len(), s.mesh.topology.num_cells());
        assert!(cfg.output_dir().starts_with(f.parent().unwrap()));
    }
}

#[test]
fn overrides_take_effect() {
    let cfg = RunConfig::parse(
        "version = 1\n[testcase]\nname = \"swinging_plate\"\n[mesh]\nnx = 4\nny = 4\nrefine = 1\n[run]\nt_final = 1e-3\noutput_every = 3\n",
    )
    .unwrap();
    let s = cfg.setup().unwrap();
    assert_eq!(s.cells.len(), 4 * 32);
    assert_eq!(s.t_final, 1e-3);
    assert_eq!(s.output_every, 3);
    assert!(s.output_times.is_empty());
}

#[test]
fn rejects_unknown_cases() {
    let cfg = RunConfig::parse("version = 1\n[testcase]\nname = \"sphere\"\n").unwrap();
    assert!(cfg.setup().is_err());
}
