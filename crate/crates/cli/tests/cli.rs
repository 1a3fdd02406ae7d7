//! End-to-end tests of the `augury` binary: exit codes, stream separation,
//! format handling, config layering and the pipe-friendly pipelines.

use std::io::Write;
use std::process::{Command, Output, Stdio};

fn augury() -> Command {
    Command::new(env!("CARGO_BIN_EXE_augury"))
}

fn run(args: &[&str]) -> Output {
    augury().args(args).output().expect("binary runs")
}

fn run_piped(args: &[&str], stdin: &[u8]) -> Output {
    let mut child = augury()
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .expect("binary spawns");
    let mut sink = child.stdin.take().expect("stdin is piped");
    // A child that rejects its flags exits without reading stdin; the broken
    // pipe that leaves behind is not a failure of the command under test.
    if let Err(e) = sink.write_all(stdin) {
        assert_eq!(e.kind(), std::io::ErrorKind::BrokenPipe, "stdin write failed: {e}");
    }
    drop(sink);
    child.wait_with_output().expect("binary finishes")
}

fn text(bytes: &[u8]) -> String {
    String::from_utf8_lossy(bytes).into_owned()
}

fn simulate(args: &[&str]) -> Vec<u8> {
    let out = run(args);
    assert_eq!(out.status.code(), Some(0), "{}", text(&out.stderr));
    out.stdout
}

#[test]
fn help_lists_every_subcommand() {
    let out = run(&["--help"]);
    assert_eq!(out.status.code(), Some(0));
    let help = text(&out.stdout);
    for name in [
        "ingest",
        "patterns",
        "decompose",
        "profile",
        "trend",
        "project-memory",
        "runtimes",
        "forecast",
        "simulate",
    ] {
        assert!(help.contains(name), "help lost `{name}`:\n{help}");
    }
}

#[test]
fn unknown_flags_are_usage_errors() {
    let out = run(&["trend", "--nope"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(!text(&out.stderr).is_empty());
}

#[test]
fn simulated_metrics_are_deterministic_per_seed() {
    let args = ["simulate", "metrics", "--days", "0.01", "--seed", "5"];
    let first = simulate(&args);
    let second = simulate(&args);
    assert_eq!(first, second, "same invocation must be byte-identical");
    assert!(text(&first).starts_with("timestamp,mem_percent,cpu_percent"));

    let other = simulate(&["simulate", "metrics", "--days", "0.01", "--seed", "6"]);
    assert_ne!(first, other, "a different seed must change the data");
}

#[test]
fn metrics_pipe_into_patterns_recovers_pulses() {
    let metrics = simulate(&["simulate", "metrics", "--days", "0.05"]);
    let out = run_piped(&["patterns", "--stdin", "--sigma", "residual"], &metrics);
    assert_eq!(out.status.code(), Some(0), "{}", text(&out.stderr));
    let stdout = text(&out.stdout);
    let mut lines = stdout.lines();
    assert_eq!(lines.next(), Some("start_time,end_time,beta,max_memory,run_time_s"));
    assert!(lines.count() >= 30, "too few patterns:\n{stdout}");
    let stderr = text(&out.stderr);
    assert!(stderr.contains("patterns:"), "{stderr}");
    assert!(stderr.contains("beta: mean"), "{stderr}");
}

#[test]
fn fixed_window_skips_optimization() {
    let metrics = simulate(&["simulate", "metrics", "--days", "0.01"]);
    let out = run_piped(&["patterns", "--stdin", "--window-lags", "40"], &metrics);
    assert_eq!(out.status.code(), Some(0), "{}", text(&out.stderr));
    assert!(text(&out.stderr).contains("window: 40 lags (fixed)"));
}

fn quarter_day_log() -> Vec<u8> {
    simulate(&[
        "simulate",
        "requests",
        "--days",
        "0.25",
        "--start",
        "2017-03-12T00:00:37Z",
    ])
}

#[test]
fn request_log_decomposes_from_stdin() {
    let out = run_piped(
        &["decompose", "--stdin", "--app", "/task", "--slot-seconds", "15"],
        &quarter_day_log(),
    );
    assert_eq!(out.status.code(), Some(0), "{}", text(&out.stderr));
    let stdout = text(&out.stdout);
    assert!(stdout.starts_with("timestamp,observed,trend,seasonal,residual\n"), "{stdout}");
    assert!(stdout.lines().count() > 1000, "decomposition too short");
}

#[test]
fn svg_format_writes_a_stable_file_and_keeps_stdout_clean() {
    let dir = tempfile::tempdir().unwrap();
    let log = dir.path().join("sim.log");
    std::fs::write(&log, quarter_day_log()).unwrap();
    let args = [
        "decompose",
        "--log",
        log.to_str().unwrap(),
        "--app",
        "/task",
        "--slot-seconds",
        "15",
        "--format",
        "svg",
        "--out-dir",
        dir.path().to_str().unwrap(),
    ];
    let out = run(&args);
    assert_eq!(out.status.code(), Some(0), "{}", text(&out.stderr));
    assert!(out.stdout.is_empty(), "svg-only runs write nothing to stdout");
    let svg_path = dir.path().join("decompose.svg");
    let first = std::fs::read(&svg_path).unwrap();
    let doc_text = String::from_utf8(first.clone()).unwrap();
    let doc = roxmltree::Document::parse(&doc_text).expect("well-formed SVG");
    assert_eq!(doc.root_element().attribute("data-kind"), Some("decomposition_panels"));

    let again = run(&args);
    assert_eq!(again.status.code(), Some(0));
    assert_eq!(std::fs::read(&svg_path).unwrap(), first, "rendering must be reproducible");
    // The log the command read is untouched.
    assert_eq!(std::fs::read(&log).unwrap(), quarter_day_log());
}

#[test]
fn both_format_emits_csv_and_svg() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_piped(
        &[
            "decompose",
            "--stdin",
            "--app",
            "/task",
            "--slot-seconds",
            "15",
            "--format",
            "both",
            "--out-dir",
            dir.path().to_str().unwrap(),
        ],
        &quarter_day_log(),
    );
    assert_eq!(out.status.code(), Some(0), "{}", text(&out.stderr));
    assert!(text(&out.stdout).starts_with("timestamp,observed"));
    assert!(dir.path().join("decompose.svg").exists());
}

const TINY_LOG: &str = "\
10.0.0.1 - - [12/Mar/2017:06:00:00 +0000] \"GET /task HTTP/1.1\" 200 512 \"-\" \"ua\" 1500
10.0.0.1 - - [12/Mar/2017:06:01:00 +0000] \"GET /task?id=2 HTTP/1.1\" 200 512 \"-\" \"ua\" 900
### not a log line ###
10.0.0.2 - - [12/Mar/2017:06:02:00 +0000] \"GET /other HTTP/1.1\" 404 0 \"-\" \"ua\" 700
";

#[test]
fn ingest_counts_rejected_rows_and_emits_canonical_csv() {
    let out = run_piped(&["ingest", "--log", "-"], TINY_LOG.as_bytes());
    assert_eq!(out.status.code(), Some(0), "{}", text(&out.stderr));
    let stdout = text(&out.stdout);
    assert_eq!(stdout.lines().count(), 4, "header plus three records:\n{stdout}");
    assert!(stdout.lines().nth(1).unwrap().contains("/task"));
    assert!(text(&out.stderr).contains("1 rejected"));
}

#[test]
fn ingest_round_trips_through_record_csv() {
    let records = run_piped(&["ingest", "--log", "-"], TINY_LOG.as_bytes());
    let out = run_piped(&["trend", "--records", "-", "--top", "2"], &records.stdout);
    assert_eq!(out.status.code(), Some(0), "{}", text(&out.stderr));
    assert!(text(&out.stdout).starts_with("timestamp,app_id,value"));
    assert!(text(&out.stderr).contains("/task: 2 requests"));
}

#[test]
fn ingest_reads_json_records() {
    let json = r#"[
        {"timestamp": "2017-03-12T06:00:00Z", "app": "/task", "ip": "10.0.0.1"},
        {"timestamp": "2017-03-12T06:01:00Z", "app": "/task", "ip": "10.0.0.1"}
    ]"#;
    let out = run_piped(&["ingest", "--json", "-"], json.as_bytes());
    assert_eq!(out.status.code(), Some(0), "{}", text(&out.stderr));
    assert_eq!(text(&out.stdout).lines().count(), 3);
}

#[test]
fn tabular_commands_reject_svg_format() {
    let out = run_piped(&["ingest", "--log", "-", "--format", "svg"], TINY_LOG.as_bytes());
    assert_eq!(out.status.code(), Some(1));
    assert!(text(&out.stderr).contains("tabular"));
    let out = run(&["simulate", "metrics", "--days", "0.01", "--format", "both"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn data_problems_exit_2() {
    let out = run(&["patterns", "--metrics", "/definitely/not/here.csv"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(text(&out.stderr).contains("error:"));

    let out = run_piped(
        &["decompose", "--stdin", "--app", "/absent", "--slot-seconds", "15"],
        &quarter_day_log(),
    );
    assert_eq!(out.status.code(), Some(2));
    assert!(text(&out.stderr).contains("/absent"));
}

#[test]
fn config_file_fills_defaults_and_flags_override_it() {
    let dir = tempfile::tempdir().unwrap();
    let snaps = dir.path().join("snaps");
    let cfg = dir.path().join("augury.conf");
    std::fs::write(
        &cfg,
        format!("# render settings\nformat = svg\nout-dir = {}\n", snaps.display()),
    )
    .unwrap();
    let log = dir.path().join("sim.log");
    std::fs::write(&log, quarter_day_log()).unwrap();

    let base = [
        "decompose",
        "--log",
        log.to_str().unwrap(),
        "--app",
        "/task",
        "--slot-seconds",
        "15",
        "--config",
        cfg.to_str().unwrap(),
    ];
    let out = run(&base);
    assert_eq!(out.status.code(), Some(0), "{}", text(&out.stderr));
    assert!(out.stdout.is_empty());
    assert!(snaps.join("decompose.svg").exists(), "config must supply --format svg");

    std::fs::remove_dir_all(&snaps).unwrap();
    let mut overridden = base.to_vec();
    overridden.extend(["--format", "csv"]);
    let out = run(&overridden);
    assert_eq!(out.status.code(), Some(0), "{}", text(&out.stderr));
    assert!(!out.stdout.is_empty(), "explicit --format csv must beat the config file");
    assert!(!snaps.exists(), "csv format must not render a snapshot");
}

#[test]
fn malformed_config_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.conf");
    std::fs::write(&cfg, "no equals sign here\n").unwrap();
    let out = run(&["simulate", "metrics", "--days", "0.01", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(text(&out.stderr).contains("line 1"));
}

#[test]
fn no_color_leaves_plain_diagnostics() {
    let out = augury()
        .args(["patterns", "--metrics", "/definitely/not/here.csv"])
        .env("NO_COLOR", "1")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    let stderr = text(&out.stderr);
    assert!(stderr.starts_with("error:"), "{stderr}");
    assert!(!stderr.contains('\x1b'), "NO_COLOR must strip ANSI codes");
}

#[test]
fn forecast_reports_unit_root_and_rmse() {
    let metrics = simulate(&["simulate", "metrics", "--days", "0.02"]);
    let out = run_piped(&["forecast", "--stdin", "--order", "1,1,1"], &metrics);
    assert_eq!(out.status.code(), Some(0), "{}", text(&out.stderr));
    assert!(text(&out.stdout).starts_with("timestamp,actual,forecast_arima,forecast_naive"));
    let stderr = text(&out.stderr);
    assert!(stderr.contains("ADF statistic"), "{stderr}");
    assert!(stderr.contains("RMSE"), "{stderr}");
}

fn two_day_multi_app_log(dir: &std::path::Path) -> std::path::PathBuf {
    let log = dir.join("multi.log");
    let lines =
        simulate(&["simulate", "requests", "--days", "2", "--apps", "/task=2,/report=1"]);
    std::fs::write(&log, lines).unwrap();
    log
}

#[test]
fn record_commands_share_one_log() {
    let dir = tempfile::tempdir().unwrap();
    let log = two_day_multi_app_log(dir.path());
    let log = log.to_str().unwrap();

    let out = run(&["trend", "--log", log, "--top", "2"]);
    assert_eq!(out.status.code(), Some(0), "{}", text(&out.stderr));
    assert!(text(&out.stdout).starts_with("timestamp,app_id,value"));
    let stderr = text(&out.stderr);
    assert!(stderr.contains("/task: 5760 requests (66.7% of 8640)"), "{stderr}");

    let out = run(&["profile", "--log", log, "--app", "/task", "--period", "daily"]);
    assert_eq!(out.status.code(), Some(0), "{}", text(&out.stderr));
    let stdout = text(&out.stdout);
    assert!(stdout.starts_with("bin,median,q1,q3,whisker_low,whisker_high,n_outliers,n_entries"));
    assert_eq!(stdout.lines().count(), 25, "24 daily bins:\n{stdout}");

    let out = run(&["profile", "--log", log, "--app", "/task", "--zoom", "3", "--zoom-bin-minutes", "5"]);
    assert_eq!(out.status.code(), Some(0), "{}", text(&out.stderr));
    assert_eq!(text(&out.stdout).lines().count(), 13, "12 five-minute bins");

    let out = run(&["runtimes", "--log", log, "--app", "/report"]);
    assert_eq!(out.status.code(), Some(0), "{}", text(&out.stderr));
    let stdout = text(&out.stdout);
    assert!(stdout.starts_with("timestamp,duration_us"));
    assert_eq!(stdout.lines().count(), 2881, "one row per /report request");

    let out = run(&[
        "project-memory",
        "--log",
        log,
        "--app",
        "/task",
        "--from",
        "01:00",
        "--to",
        "03:00",
        "--mb-per-run",
        "2.5",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", text(&out.stderr));
    let stdout = text(&out.stdout);
    assert!(stdout.starts_with("day,timestamp,cumulative_mb"));
    assert!(stdout.trim_end().ends_with(",600"), "240 runs at 2.5 MB each:\n…{}", {
        let tail: String = stdout.chars().skip(stdout.len().saturating_sub(120)).collect();
        tail
    });
}

#[test]
fn snapshot_commands_render_all_kinds() {
    let dir = tempfile::tempdir().unwrap();
    let log = two_day_multi_app_log(dir.path());
    let log = log.to_str().unwrap();
    let out_dir = dir.path().to_str().unwrap();
    let cases: [(&[&str], &str, &str); 4] = [
        (&["trend", "--log", log, "--top", "2"], "trend.svg", "trend"),
        (&["profile", "--log", log, "--app", "/task"], "profile.svg", "seasonal_boxplot"),
        (
            &["profile", "--log", log, "--app", "/task", "--zoom", "3"],
            "profile.svg",
            "zoom_boxplot",
        ),
        (&["runtimes", "--log", log, "--app", "/task"], "runtimes.svg", "runtime_scatter"),
    ];
    for (args, file, kind) in cases {
        let mut full = args.to_vec();
        full.extend(["--format", "svg", "--out-dir", out_dir]);
        let out = run(&full);
        assert_eq!(out.status.code(), Some(0), "{kind}: {}", text(&out.stderr));
        let svg = std::fs::read_to_string(dir.path().join(file)).unwrap();
        let doc = roxmltree::Document::parse(&svg).expect("well-formed SVG");
        assert_eq!(doc.root_element().attribute("data-kind"), Some(kind));
        std::fs::remove_file(dir.path().join(file)).unwrap();
    }

    let out = run(&[
        "project-memory",
        "--log",
        log,
        "--app",
        "/task",
        "--format",
        "svg",
        "--out-dir",
        out_dir,
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", text(&out.stderr));
    let svg = std::fs::read_to_string(dir.path().join("project-memory.svg")).unwrap();
    assert!(svg.contains("data-kind=\"cumulative_memory\""));
}
