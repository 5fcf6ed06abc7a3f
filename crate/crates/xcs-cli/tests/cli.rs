//! End-to-end tests of the command-line interface, including the dump/CSV
//! round-trip and byte-level reproducibility contracts.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use xcs::niche::{can, man};
use xcs::Population;

fn xcs_cmd(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_xcs"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn write_tiny_config(dir: &Path, name: &str, runs: u64) -> String {
    let text = format!(
        "# tiny smoke experiment\n\
problem.kind = multiplexer\n\
problem.size = 6\n\
params.N = 150\n\
run.learningProblems = 400\n\
run.condensationProblems = 200\n\
run.runs = {runs}\n\
run.seed = 5\n\
run.checkpointInterval = 100\n\
output.dir = out\n"
    );
    fs::write(dir.join(name), &text).unwrap();
    name.to_string()
}

#[test]
fn unknown_config_key_fails_with_exit_code_1() {
    let tmp = tempfile::tempdir().unwrap();
    fs::write(
        tmp.path().join("bad.conf"),
        "problem.kind = multiplexer\nproblem.size = 6\nparams.betta = 0.2\n",
    )
    .unwrap();
    let out = xcs_cmd(tmp.path(), &["run", "bad.conf"]);
    assert_eq!(out.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("params.betta"), "stderr: {stderr}");
    assert!(stderr.contains("line 3"), "stderr: {stderr}");
}

#[test]
fn run_writes_expected_files_and_is_byte_reproducible() {
    let tmp = tempfile::tempdir().unwrap();
    let config = write_tiny_config(tmp.path(), "tiny.conf", 2);
    let out = xcs_cmd(tmp.path(), &["run", &config]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));

    let out_dir = tmp.path().join("out");
    for file in [
        "manifest.txt",
        "config.conf",
        "aggregate.csv",
        "run_0.csv",
        "run_1.csv",
        "pop_before_condensation.pop",
        "pop_after_condensation.pop",
    ] {
        assert!(out_dir.join(file).exists(), "missing {file}");
    }
    assert!(!out_dir.join("run_2.csv").exists(), "one csv per run only");

    let first: Vec<(String, Vec<u8>)> = ["aggregate.csv", "run_0.csv", "run_1.csv", "pop_after_condensation.pop"]
        .iter()
        .map(|f| (f.to_string(), fs::read(out_dir.join(f)).unwrap()))
        .collect();
    fs::remove_dir_all(&out_dir).unwrap();
    let rerun = xcs_cmd(tmp.path(), &["run", &config]);
    assert_eq!(rerun.status.code(), Some(0));
    for (file, bytes) in first {
        assert_eq!(
            fs::read(out_dir.join(&file)).unwrap(),
            bytes,
            "{file} is not byte-identical across reruns"
        );
    }
}

#[test]
fn dumped_population_reproduces_the_final_checkpoint_statistics() {
    let tmp = tempfile::tempdir().unwrap();
    let config = write_tiny_config(tmp.path(), "tiny.conf", 1);
    let out = xcs_cmd(tmp.path(), &["run", &config]);
    assert_eq!(out.status.code(), Some(0));

    let out_dir = tmp.path().join("out");
    let dump = fs::read_to_string(out_dir.join("pop_after_condensation.pop")).unwrap();
    let (population, n_bits, num_actions) = Population::parse_dump(dump.as_bytes()).unwrap();
    assert_eq!((n_bits, num_actions), (6, 2));

    let csv = fs::read_to_string(out_dir.join("run_0.csv")).unwrap();
    let last = csv.lines().last().unwrap();
    let fields: Vec<&str> = last.split(',').collect();
    let (csv_pop, csv_can) = (fields[3], fields[4]);
    let (csv_man_mean, csv_man_std) = (fields[5], fields[6]);

    assert_eq!(population.macro_count().to_string(), csv_pop);
    assert_eq!(can(&population).len().to_string(), csv_can);
    let (man_mean, man_std) = man(&population).unwrap();
    assert_eq!(man_mean.to_string(), csv_man_mean);
    assert_eq!(man_std.to_string(), csv_man_std);
}

#[test]
fn niches_command_honors_the_composition_flag() {
    let tmp = tempfile::tempdir().unwrap();
    let config = write_tiny_config(tmp.path(), "tiny.conf", 1);

    let out = xcs_cmd(tmp.path(), &["niches", &config]);
    assert_eq!(out.status.code(), Some(0));
    let scalar = fs::read_to_string(tmp.path().join("out/niche_timeline.txt")).unwrap();
    assert_eq!(scalar.lines().count(), 6, "one line per checkpoint");
    assert!(scalar.lines().all(|l| l.starts_with("checkpoint ")));
    assert!(scalar.lines().all(|l| l.ends_with("niches=0")));

    let out = xcs_cmd(tmp.path(), &["niches", &config, "--composition"]);
    assert_eq!(out.status.code(), Some(0));
    let full = fs::read_to_string(tmp.path().join("out/niche_timeline.txt")).unwrap();
    assert!(full.lines().any(|l| l.starts_with("niche ats=")));
    assert!(full.lines().any(|l| l.starts_with("member ")));

    // canSize equals the number of exported snapshots at each checkpoint.
    for line in full.lines().filter(|l| l.starts_with("checkpoint ")) {
        let get = |key: &str| {
            line.split_whitespace()
                .find_map(|tok| tok.strip_prefix(key))
                .unwrap()
                .to_string()
        };
        assert_eq!(get("can="), get("niches="), "line: {line}");
    }
}

#[test]
fn oracle_optimal_pop_prints_size_and_writes_a_parsable_dump() {
    let tmp = tempfile::tempdir().unwrap();
    let out = xcs_cmd(tmp.path(), &["oracle", "optimal-pop", "MP6"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(String::from_utf8_lossy(&out.stdout).trim(), "16");
    let dump = fs::read_to_string(tmp.path().join("mp6.oracle.pop")).unwrap();
    let (population, n_bits, _) = Population::parse_dump(dump.as_bytes()).unwrap();
    assert_eq!(n_bits, 6);
    assert_eq!(population.macro_count(), 16);

    let out = xcs_cmd(tmp.path(), &["oracle", "optimal-pop", "majority:4", "--out", "m4.pop"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(String::from_utf8_lossy(&out.stdout).trim(), "20");
    assert!(tmp.path().join("m4.pop").exists());

    // Enumeration bound exceeded: runtime error.
    let out = xcs_cmd(tmp.path(), &["oracle", "optimal-pop", "MAJ14"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn oracle_grid_steps_prints_the_average() {
    let tmp = tempfile::tempdir().unwrap();
    fs::write(tmp.path().join("f.map"), "F.\n").unwrap();
    let out = xcs_cmd(tmp.path(), &["oracle", "grid-steps", "f.map"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(String::from_utf8_lossy(&out.stdout).trim(), "1.0");

    let out = xcs_cmd(tmp.path(), &["oracle", "grid-steps", "missing.map"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn plotdata_aligns_runs_and_rejects_mismatched_grids() {
    let tmp = tempfile::tempdir().unwrap();
    let config = write_tiny_config(tmp.path(), "tiny.conf", 2);
    let out = xcs_cmd(tmp.path(), &["run", &config]);
    assert_eq!(out.status.code(), Some(0));

    let out = xcs_cmd(tmp.path(), &["plotdata", "out"]);
    assert_eq!(out.status.code(), Some(0));
    let can_series = fs::read_to_string(tmp.path().join("out/plot_can.csv")).unwrap();
    let mut lines = can_series.lines();
    assert_eq!(lines.next(), Some("checkpoint,can_mean,can_std"));
    assert_eq!(can_series.lines().count(), 7, "header plus one row per checkpoint");

    // A file with a truncated checkpoint grid must be named in the error.
    let short = {
        let full = fs::read_to_string(tmp.path().join("out/run_1.csv")).unwrap();
        full.lines().take(4).collect::<Vec<_>>().join("\n") + "\n"
    };
    fs::write(tmp.path().join("out/run_1.csv"), short).unwrap();
    let out = xcs_cmd(tmp.path(), &["plotdata", "out"]);
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("run_1.csv"), "stderr: {stderr}");
}

/// Every shipped config must parse and drive the full pipeline. Phase
/// lengths are rewritten to a few problems so even the large-population
/// configs finish instantly; everything else (keys, parameter values, map
/// paths) is exercised as shipped.
#[test]
fn shipped_configs_parse_and_run() {
    let repo = Path::new(env!("CARGO_MANIFEST_DIR")).join("../..");
    let configs = fs::read_dir(repo.join("configs")).unwrap();
    let tmp = tempfile::tempdir().unwrap();
    for entry in configs {
        let path = entry.unwrap().path();
        let name = path.file_name().unwrap().to_string_lossy().into_owned();
        let mut rewritten = String::new();
        for line in fs::read_to_string(&path).unwrap().lines() {
            let key = line.split('=').next().unwrap_or("").trim();
            match key {
                "run.learningProblems" | "run.condensationProblems" | "run.runs"
                | "run.checkpointInterval" | "output.dir" => continue,
                "problem.map" => {
                    let map = line.split('=').nth(1).unwrap().trim();
                    let absolute = repo.join("configs").join(map).canonicalize().unwrap();
                    rewritten.push_str(&format!("problem.map = {}\n", absolute.display()));
                }
                _ => {
                    rewritten.push_str(line);
                    rewritten.push('\n');
                }
            }
        }
        rewritten.push_str(
            "run.learningProblems = 4\nrun.condensationProblems = 2\nrun.runs = 1\n\
run.checkpointInterval = 2\noutput.dir = out\n",
        );
        fs::write(tmp.path().join(&name), rewritten).unwrap();
        let out = xcs_cmd(tmp.path(), &["run", &name]);
        assert_eq!(
            out.status.code(),
            Some(0),
            "{name}: {}",
            String::from_utf8_lossy(&out.stderr)
        );
        fs::remove_dir_all(tmp.path().join("out")).unwrap();
    }
}

#[test]
fn single_run_plotdata_has_zero_std() {
    let tmp = tempfile::tempdir().unwrap();
    let config = write_tiny_config(tmp.path(), "tiny.conf", 1);
    assert_eq!(xcs_cmd(tmp.path(), &["run", &config]).status.code(), Some(0));
    assert_eq!(xcs_cmd(tmp.path(), &["plotdata", "out"]).status.code(), Some(0));
    let series = fs::read_to_string(tmp.path().join("out/plot_performance.csv")).unwrap();
    for row in series.lines().skip(1) {
        assert!(row.ends_with(",0"), "row: {row}");
    }
}
