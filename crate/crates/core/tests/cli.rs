//! End-to-end runs of the `ipinn` binary.

use std::fs;
use std::path::Path;
use std::process::Command;

use interface_pinn::cli::{export_grid, ExactOracle, GridSpec, RunConfig};
use interface_pinn::network::{forward, Checkpoint};
use interface_pinn::problems::find;
use interface_pinn::training::CSV_HEADER;

fn ipinn(args: &[&str]) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_ipinn")).args(args).output().expect("binary runs");
    (
        out.status.code().unwrap_or(-1),
        String::from_utf8_lossy(&out.stdout).into_owned(),
        String::from_utf8_lossy(&out.stderr).into_owned(),
    )
}

fn write_config(dir: &Path, body: &str) -> String {
    let path = dir.join("run.cfg");
    fs::write(&path, body).unwrap();
    path.to_string_lossy().into_owned()
}

#[test]
fn run_writes_metrics_summary_and_checkpoint() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let cfg = write_config(
        dir.path(),
        &format!(
            "problem = line2d\nm_interior = 100\nm_boundary = 40\nm_interface = 25\nhidden = 8,8\nsteps = 20\nlog_every = 5\noutput = {}\n",
            out.display()
        ),
    );
    let (code, stdout, stderr) = ipinn(&["run", &cfg]);
    assert_eq!(code, 0, "{stderr}");
    assert!(stdout.contains("final_val_rel_l2"));
    let metrics = fs::read_to_string(out.join("metrics.csv")).unwrap();
    let mut lines = metrics.lines();
    assert_eq!(lines.next(), Some(CSV_HEADER));
    assert_eq!(lines.count(), 5); // steps 0, 5, 10, 15, 20

    // The summary is itself a config that reproduces the run byte for byte.
    let summary = out.join("summary.txt");
    let again = dir.path().join("again");
    let (code, _, stderr) = ipinn(&["run", summary.to_str().unwrap(), "--output", again.to_str().unwrap()]);
    assert_eq!(code, 0, "{stderr}");
    assert_eq!(metrics, fs::read_to_string(again.join("metrics.csv")).unwrap());
    assert_eq!(fs::read(out.join("checkpoint.bin")).unwrap(), fs::read(again.join("checkpoint.bin")).unwrap());
    let echoed = RunConfig::load(&summary).unwrap();
    assert_eq!(echoed.train.steps, 20);
}

#[test]
fn zero_step_run_reports_initial_loss_only() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let cfg = write_config(
        dir.path(),
        &format!("problem = fixed_circle\nhidden = 6\nsteps = 0\nm_interior = 60\nm_boundary = 12\nm_interface = 12\nm_initial = 12\noutput = {}\n", out.display()),
    );
    let (code, _, stderr) = ipinn(&["run", &cfg]);
    assert_eq!(code, 0, "{stderr}");
    let metrics = fs::read_to_string(out.join("metrics.csv")).unwrap();
    assert_eq!(metrics.lines().count(), 2);
    let row: Vec<&str> = metrics.lines().nth(1).unwrap().split(',').collect();
    assert_eq!(row[0], "0");
    assert!(!row[7].is_empty(), "parabolic runs log the initial-condition term");
}

#[test]
fn config_errors_exit_with_code_1() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "problem = nonsense\n");
    let (code, _, stderr) = ipinn(&["run", &cfg]);
    assert_eq!(code, 1);
    assert!(stderr.contains("line2d") && stderr.contains("hypersphere10d"), "{stderr}");

    let cfg = write_config(dir.path(), "problem = line2d\nlr = fast\n");
    assert_eq!(ipinn(&["run", &cfg]).0, 1);
    assert_eq!(ipinn(&["no-such-command"]).0, 1);
}

#[test]
fn numerical_failure_exits_with_code_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        &format!(
            "problem = line2d\nhidden = 8\nm_interior = 100\nm_boundary = 40\nm_interface = 25\nsteps = 50\nlr = 1e300\noutput = {}\n",
            dir.path().join("o").display()
        ),
    );
    let (code, _, stderr) = ipinn(&["run", &cfg]);
    assert_eq!(code, 2, "{stderr}");
    assert!(stderr.contains("non-finite"), "{stderr}");
}

#[test]
fn export_grid_reproduces_forward_bit_exactly() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let cfg = write_config(
        dir.path(),
        &format!("problem = ellipse2d\nhidden = 6,6\nm_interior = 200\nm_boundary = 40\nm_interface = 20\nsteps = 10\noutput = {}\n", out.display()),
    );
    assert_eq!(ipinn(&["run", &cfg]).0, 0);
    let ckpt = out.join("checkpoint.bin");
    let grid = dir.path().join("grid.csv");
    let (code, _, stderr) =
        ipinn(&["export-grid", ckpt.to_str().unwrap(), "--resolution", "9", "--out", grid.to_str().unwrap()]);
    assert_eq!(code, 0, "{stderr}");
    let csv = fs::read_to_string(&grid).unwrap();
    assert!(csv.starts_with("x,y,region,u_exact,u_nn,abs_err\n"));
    let checkpoint = Checkpoint::load(&ckpt).unwrap();
    let problem = find("ellipse2d").unwrap();
    let mut rows = 0;
    for line in csv.lines().skip(1) {
        let f: Vec<&str> = line.split(',').collect();
        let x = [f[0].parse::<f64>().unwrap(), f[1].parse::<f64>().unwrap()];
        let net = if f[2] == "omega1" { &checkpoint.networks[0] } else { &checkpoint.networks[1] };
        let direct = forward(net, &x, None, Some(&problem.interface)).unwrap();
        assert_eq!(f[4].parse::<f64>().unwrap().to_bits(), direct.to_bits());
        rows += 1;
    }
    // 9×9 grid minus (0, ±0.5), which lie on the ellipse.
    assert_eq!(rows, 79);

    // Asking for a plane the checkpoint does not have is rejected.
    let (code, _, _) = ipinn(&["export-grid", ckpt.to_str().unwrap(), "--plane", "x,z"]);
    assert_eq!(code, 1);
}

#[test]
fn exact_oracle_export_has_no_error() {
    for name in ["line2d", "flower2d", "ellipsoid3d", "moving_circle"] {
        let p = find(name).unwrap();
        let spec = GridSpec { resolution: 25, axes: (0, 1), point: None, t: None };
        let csv = export_grid(&ExactOracle, &p, &spec).unwrap();
        assert!(csv.lines().count() > 10, "{name}");
        for line in csv.lines().skip(1) {
            let err: f64 = line.rsplit(',').next().unwrap().parse().unwrap();
            assert!(err <= 1e-12, "{name}: {line}");
        }
    }
}

#[test]
fn check_subcommand_passes() {
    let (code, stdout, stderr) = ipinn(&["check", "--seed", "3"]);
    assert_eq!(code, 0, "{stdout}{stderr}");
    assert_eq!(stdout.lines().filter(|l| l.starts_with("PASS")).count(), 3, "{stdout}");
}

#[test]
fn sweep_tabulates_rows_and_medians() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("sweep");
    let cfg = write_config(dir.path(), &format!("problem = line2d\nhidden = 6\nsteps = 5\nlog_every = 5\noutput = {}\n", out.display()));
    let (code, stdout, stderr) = ipinn(&["sweep", &cfg, "--triples", "36,8,5;64,16,8", "--seeds", "2", "--modes", "maf,tanh"]);
    assert_eq!(code, 0, "{stderr}");
    let lines: Vec<&str> = stdout.lines().collect();
    assert_eq!(lines[0], "m_interior,m_boundary,m_interface,seed,mode,final_val_rel_l2,wall_clock_s");
    assert_eq!(lines.iter().filter(|l| l.contains(",median,")).count(), 4);
    assert_eq!(lines.len(), 1 + 8 + 4);
    assert!(lines.iter().any(|l| l.contains("MultiActivation")) && lines.iter().any(|l| l.contains("TanhOnly")));
    assert!(out.join("sweep.csv").exists());
    assert!(out.join("sweep").read_dir().unwrap().count() == 8, "each row has its own directory");
}

#[test]
fn shipped_configs_parse() {
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("configs");
    let mut n = 0;
    for sub in ["full", "desk"] {
        for entry in fs::read_dir(root.join(sub)).unwrap() {
            let path = entry.unwrap().path();
            let cfg = RunConfig::load(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
            let problem = find(&cfg.problem).unwrap();
            if sub == "full" {
                assert_eq!(cfg.train.steps, 50_000);
                assert!(problem.density_triples.contains(&cfg.train.counts), "{}", path.display());
            }
            assert_eq!(cfg.train.adam.lr, 1e-3);
            n += 1;
        }
    }
    assert_eq!(n, 40);
}
