use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command as Proc;

use langevin_harness::config::Config;
use langevin_harness::error::{EXIT_CHECK, EXIT_CONFIG, EXIT_DIVERGENCE, EXIT_OK, EXIT_REGIME};
use langevin_harness::manifest::RunManifest;
use langevin_harness::output::{real, write_table, Table};
use langevin_harness::plot::emit_plot_data;
use langevin_harness::{execute, Command, Invocation};
use proptest::prelude::*;

fn tmp(name: &str) -> PathBuf {
    let p = Path::new(env!("CARGO_TARGET_TMPDIR")).join("cli").join(name);
    let _ = fs::remove_dir_all(&p);
    fs::create_dir_all(&p).unwrap();
    p
}

fn write_config(dir: &Path, text: &str) -> PathBuf {
    let p = dir.join("run.conf");
    fs::write(&p, text).unwrap();
    p
}

fn cli(args: &[&str]) -> (i32, String, String) {
    let o = Proc::new(env!("CARGO_BIN_EXE_langevin")).args(args).output().unwrap();
    (o.status.code().unwrap_or(-1), String::from_utf8_lossy(&o.stdout).into(), String::from_utf8_lossy(&o.stderr).into())
}

fn run(cmd: Command, text: &str, seed: u64, out: &Path) -> langevin_harness::Result<langevin_harness::Outcome> {
    execute(Invocation { command: cmd, config: Config::parse(text).unwrap(), seed: Some(seed), out: Some(out.to_path_buf()), threads: None })
}

const GAUSS: &str = "d = 1\n[potential]\nname = gaussian\n[plan]\nregime = LSI\ngamma = 1\neta = 0.1\nk = 300\n[run]\nchains = 64\n";

#[test]
fn same_seed_gives_identical_samples() {
    let (a, b) = (tmp("det_a"), tmp("det_b"));
    run(Command::Sample, GAUSS, 42, &a).unwrap();
    run(Command::Sample, GAUSS, 42, &b).unwrap();
    assert_eq!(fs::read(a.join("samples.csv")).unwrap(), fs::read(b.join("samples.csv")).unwrap());
    let c = tmp("det_c");
    run(Command::Sample, GAUSS, 43, &c).unwrap();
    assert_ne!(fs::read(a.join("samples.csv")).unwrap(), fs::read(c.join("samples.csv")).unwrap());
}

#[test]
fn manifest_replays_bit_exactly() {
    let a = tmp("replay_a");
    let cfg = format!("{GAUSS}record = true\nthin = 5\n");
    let first = run(Command::Experiment, &cfg, 7, &a).unwrap();
    let b = tmp("replay_b");
    let replay = execute(Invocation {
        command: Command::Experiment,
        config: Config::load(&a.join("manifest.txt")).unwrap(),
        seed: None,
        out: Some(b.clone()),
        threads: Some(2),
    })
    .unwrap();
    assert!(!first.manifest.files.is_empty());
    for (x, y) in first.manifest.files.iter().zip(&replay.manifest.files) {
        assert_eq!(x.name, y.name);
        assert_eq!(x.sha256, y.sha256, "{}", x.name);
    }
    let wrong = execute(Invocation {
        command: Command::Sample,
        config: Config::load(&a.join("manifest.txt")).unwrap(),
        seed: None,
        out: Some(b),
        threads: None,
    });
    assert_eq!(wrong.unwrap_err().exit_code(), EXIT_CONFIG);
}

#[test]
fn exit_codes() {
    let dir = tmp("codes");
    let poincare = write_config(&dir, "[potential]\nname = holder\nparams = alpha=0.5\n[plan]\nregime = POINCARE_DISSIPATIVE\ngamma = 1\n");
    let out = dir.join("o");
    let o = out.to_str().unwrap();
    assert_eq!(cli(&["plan", "--config", poincare.to_str().unwrap(), "--seed", "1", "--out", o]).0, EXIT_REGIME);

    let noseed = write_config(&dir, GAUSS);
    let (code, _, err) = cli(&["plan", "--config", noseed.to_str().unwrap(), "--out", o]);
    assert_eq!(code, EXIT_CONFIG, "{err}");
    assert_eq!(cli(&["plan", "--config", noseed.to_str().unwrap(), "--seed", "1", "--out", o]).0, EXIT_OK);

    let typo = write_config(&dir, &format!("{GAUSS}chians = 3\n"));
    assert_eq!(cli(&["plan", "--config", typo.to_str().unwrap(), "--seed", "1", "--out", o]).0, EXIT_CONFIG);

    let unknown = write_config(&dir, "[potential]\nname = banana\n");
    assert_eq!(cli(&["plan", "--config", unknown.to_str().unwrap(), "--seed", "1", "--out", o]).0, EXIT_CONFIG);

    let diverge = write_config(&dir, "[potential]\nname = gaussian\n[plan]\nregime = MANUAL\neta = 5\nk = 1000\n[run]\nchains = 2\n");
    assert_eq!(cli(&["sample", "--config", diverge.to_str().unwrap(), "--seed", "1", "--out", o]).0, EXIT_DIVERGENCE);

    let overclaim = write_config(&dir, &format!("{GAUSS}record = true\n[diagnose]\ngamma = 1e8\n"));
    let (code, stdout, _) = cli(&["experiment", "--config", overclaim.to_str().unwrap(), "--seed", "1", "--out", o]);
    assert_eq!(code, EXIT_CHECK, "{stdout}");
    assert!(stdout.contains("FAIL talagrand"));

    let huge = write_config(&dir, "[potential]\nname = holder\n[plan]\nregime = SMOOTHED\ngamma = 0.5\n");
    assert_eq!(cli(&["sample", "--config", huge.to_str().unwrap(), "--seed", "1", "--out", o]).0, EXIT_CONFIG);
}

#[test]
fn sweep_feeds_fit_and_plot() {
    let dir = tmp("sweep");
    let cfg = "[potential]\nname = gaussian\n[plan]\ngamma = 1\n[run]\nchains = 50\n[sweep]\netas = 0.05, 0.1, 0.2, 0.4\nsteps = 3000\n";
    let o = run(Command::Experiment, cfg, 3, &dir).unwrap();
    assert_eq!(o.exit_code(), EXIT_OK);
    let sweep = fs::read_to_string(dir.join("sweep.csv")).unwrap();
    assert_eq!(sweep.lines().count(), 5);
    let plot = fs::read_to_string(dir.join("plot.csv")).unwrap();
    assert_eq!(plot.lines().filter(|l| l.starts_with("kl_vs_eta,")).count(), 4);
    assert!(dir.join("fit.csv").exists());
}

#[test]
fn diagnose_reads_sample_files() {
    let dir = tmp("diagnose");
    let cfg = "[potential]\nname = gaussian\n[plan]\nregime = MANUAL\neta = 0.05\nk = 200\n[run]\nchains = 2000\n";
    run(Command::Sample, cfg, 11, &dir.join("s")).unwrap();
    let samples = dir.join("s/samples.csv");
    let dcfg = format!("[potential]\nname = gaussian\n[diagnose]\nsamples = {}\ngamma = 1\n", samples.display());
    let o = run(Command::Diagnose, &dcfg, 12, &dir.join("d")).unwrap();
    assert_eq!(o.exit_code(), EXIT_OK, "{}", o.summary);
    let diag = fs::read_to_string(dir.join("d/diagnostics.csv")).unwrap();
    for q in ["kl,", "tv,", "w2,", "fisher,not-estimated", "pinsker,", "talagrand,", "grad_moment,"] {
        assert!(diag.contains(q), "{q} missing:\n{diag}");
    }
}

#[test]
fn convexify_grid_columns() {
    let dir = tmp("convexify");
    let cfg = "[potential]\nname = cosine_perturbed_quadratic\n[convexify]\nr = 2\nmu = 0.5\ngrid = 201\n";
    let o = run(Command::Convexify, cfg, 1, &dir).unwrap();
    assert_eq!(o.exit_code(), EXIT_OK, "{}", o.summary);
    let plot = fs::read_to_string(dir.join("plot_convexify.csv")).unwrap();
    assert!(plot.starts_with("x0,U,V,hat_u,breve_u\r\n"));
    assert_eq!(plot.lines().count(), 202);
}

#[test]
fn empty_diagnostics_give_header_only_plot() {
    let dir = tmp("plot_empty");
    let mut m = RunManifest::new("diagnose", &Config::default(), &dir);
    let t = Table::new("diagnostics/v1", &["quantity", "method", "estimate", "stderr", "bias", "rhs", "pass"]);
    m.files.push(write_table(&dir, "diagnostics.csv", &t).unwrap());
    emit_plot_data(&m).unwrap();
    assert_eq!(fs::read_to_string(dir.join("plot.csv")).unwrap(), "series,x,y,yerr\r\n");
    let bare = RunManifest::new("plan", &Config::default(), &dir);
    assert!(emit_plot_data(&bare).is_err());
}

proptest! {
    #[test]
    fn real_round_trips(v in any::<f64>().prop_filter("finite", |v| v.is_finite())) {
        prop_assert_eq!(real(v).parse::<f64>().unwrap(), v);
    }

    #[test]
    fn config_echo_round_trips(entries in proptest::collection::btree_map("[a-z]{1,6}(\\.[a-z]{1,6})?", "[a-zA-Z0-9_.,:| -]{0,12}", 0..10)) {
        let text: String = entries.iter().map(|(k, v)| format!("{k} = {v}\n")).collect();
        let c = Config::parse(&text).unwrap();
        let back: Vec<(String, String)> = entries.iter().map(|(k, v)| (k.clone(), v.trim().to_string())).collect();
        prop_assert_eq!(c.echo(), back);
    }
}
