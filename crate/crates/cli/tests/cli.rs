use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};

use tempfile::TempDir;

const WORDS: &[&str] = &[
    "the", "a", "of", "market", "rose", "fell", "percent", "shares", "company", "said", "it",
    "was", "good", "bad", "in", "to", "by", "on", "day", "year", "12", "3.5", "1999", ".", ",",
];

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_specadapt"))
}

fn run(args: &[&str]) -> Output {
    bin()
        .args(args)
        .env("RUST_LOG", "warn")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

struct Fixture {
    dir: TempDir,
}

impl Fixture {
    fn new() -> Self {
        let dir = TempDir::new().unwrap();
        let f = Fixture { dir };
        let mut emb = format!("{} 4\n", WORDS.len());
        for (i, w) in WORDS.iter().enumerate() {
            let v: Vec<String> = (0..4)
                .map(|k| format!("{:.3}", ((i * 7 + k * 3) % 11) as f64 / 11.0 - 0.5))
                .collect();
            emb.push_str(&format!("{w} {}\n", v.join(" ")));
        }
        f.write("emb.txt", &emb);
        f.write(
            "source.tsv",
            "1\tthe market rose 12 percent in 1999 .\n\
             0\tit was good .\n\
             1\tshares of the company fell 3.5 percent on the day .\n\
             0\tit was bad .\n\
             1\tthe company said shares rose 12 percent by the year .\n\
             0\ta good day .\n",
        );
        f.write(
            "target.txt",
            "the day was good .\nshares fell 12 percent .\n\nit rose .\nthe year of the market .\n",
        );
        f.write(
            "dev.tsv",
            "0.2\tit was good .\n0.8\tshares fell 12 percent .\n0.5\tthe market rose .\n",
        );
        f
    }

    fn path(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }

    fn p(&self, name: &str) -> String {
        self.path(name).display().to_string()
    }

    fn write(&self, name: &str, text: &str) {
        fs::write(self.path(name), text).unwrap();
    }

    fn train(&self, out: &str, extra: &[&str]) -> Output {
        let (src, tgt, dev, emb, out) = (
            self.p("source.tsv"),
            self.p("target.txt"),
            self.p("dev.tsv"),
            self.p("emb.txt"),
            self.p(out),
        );
        let mut args = vec![
            "train",
            "--source",
            &src,
            "--target",
            &tgt,
            "--dev",
            &dev,
            "--embeddings",
            &emb,
            "--output-dir",
            &out,
            "--batch-size",
            "4",
            "--set",
            "hidden_size=4",
            "--set",
            "mlp_width=6",
            "--set",
            "mlp_depth=2",
        ];
        args.extend_from_slice(extra);
        run(&args)
    }
}

fn assert_code(o: &Output, code: i32) {
    assert_eq!(
        o.status.code(),
        Some(code),
        "stdout: {}\nstderr: {}",
        stdout(o),
        String::from_utf8_lossy(&o.stderr)
    );
}

fn train_model(f: &Fixture, precision: &str) -> PathBuf {
    let o = f.train(
        "run",
        &["--epochs", "2", "--seed", "3", "--precision", precision],
    );
    assert_code(&o, 0);
    f.path("run")
}

#[test]
fn train_writes_checkpoint_log_and_frozen_config() {
    let f = Fixture::new();
    let run_dir = train_model(&f, "f32");
    let log = fs::read_to_string(run_dir.join("train_log.csv")).unwrap();
    let lines: Vec<&str> = log.lines().collect();
    assert_eq!(
        lines[0],
        "epoch,l_ce,l_u,l_d,total,dev_spearman,dev_tau,dev_mae"
    );
    assert_eq!(lines.len(), 3);
    let cfg = fs::read_to_string(run_dir.join("config.cfg")).unwrap();
    assert!(cfg.contains("seed = 3"), "{cfg}");
    assert!(cfg.contains("epochs = 2"), "{cfg}");
    assert!(run_dir.join("model.json").exists());
}

#[test]
fn training_is_reproducible() {
    let f = Fixture::new();
    assert_code(&f.train("a", &["--epochs", "1", "--seed", "9"]), 0);
    assert_code(&f.train("b", &["--epochs", "1", "--seed", "9"]), 0);
    let a = fs::read(f.path("a/model.json")).unwrap();
    let b = fs::read(f.path("b/model.json")).unwrap();
    assert_eq!(a, b);
}

#[test]
fn zero_epochs_still_writes_a_model() {
    let f = Fixture::new();
    let o = f.train("zero", &["--epochs", "0"]);
    assert_code(&o, 0);
    assert!(f.path("zero/model.json").exists());
}

#[test]
fn config_file_and_overrides() {
    let f = Fixture::new();
    f.write(
        "run.cfg",
        "# settings\nvariant = se\nepochs = 1\nseed = 4\n",
    );
    let o = f.train("cfgrun", &["--config", &f.p("run.cfg"), "--set", "seed=5"]);
    assert_code(&o, 0);
    let frozen = fs::read_to_string(f.path("cfgrun/config.cfg")).unwrap();
    assert!(frozen.contains("variant = se\n"), "{frozen}");
    assert!(frozen.contains("seed = 5\n"), "{frozen}");
}

#[test]
fn env_seed_is_the_fallback() {
    let f = Fixture::new();
    let mut args: Vec<String> = vec!["train".into()];
    for (k, v) in [
        ("--source", f.p("source.tsv")),
        ("--target", f.p("target.txt")),
        ("--embeddings", f.p("emb.txt")),
        ("--output-dir", f.p("envrun")),
        ("--epochs", "0".into()),
        ("--batch-size", "4".into()),
    ] {
        args.push(k.into());
        args.push(v);
    }
    let o = bin()
        .args(&args)
        .env("SPECADAPT_SEED", "77")
        .output()
        .unwrap();
    assert_code(&o, 0);
    let frozen = fs::read_to_string(f.path("envrun/config.cfg")).unwrap();
    assert!(frozen.contains("seed = 77\n"), "{frozen}");
}

#[test]
fn bad_inputs_exit_with_two() {
    let f = Fixture::new();
    assert_code(&f.train("x", &["--set", "alpha=2"]), 2);
    assert_code(&f.train("x", &["--set", "nonsense=1"]), 2);
    f.write("bad.tsv", "0.5\tnot binary .\n");
    let o = run(&[
        "train",
        "--source",
        &f.p("bad.tsv"),
        "--embeddings",
        &f.p("emb.txt"),
        "--variant",
        "se",
        "--output-dir",
        &f.p("x"),
    ]);
    assert_code(&o, 2);
    let o = run(&[
        "eval",
        "--predictions",
        &f.p("missing.tsv"),
        "--gold",
        &f.p("dev.tsv"),
    ]);
    assert_code(&o, 2);
}

#[test]
fn predict_then_eval() {
    let f = Fixture::new();
    let run_dir = train_model(&f, "f64");
    f.write(
        "input.txt",
        "it was good .\n\nshares fell 12 percent .\nthe market rose .\n",
    );
    let o = run(&[
        "predict",
        "--checkpoint",
        &run_dir.join("model.json").display().to_string(),
        "--embeddings",
        &f.p("emb.txt"),
        "--input",
        &f.p("input.txt"),
        "--output",
        &f.p("pred.tsv"),
    ]);
    assert_code(&o, 0);
    let pred = fs::read_to_string(f.path("pred.tsv")).unwrap();
    let rows: Vec<(&str, &str)> = pred.lines().map(|l| l.rsplit_once('\t').unwrap()).collect();
    assert_eq!(rows.len(), 3, "empty line is skipped");
    assert_eq!(rows[0].0, "it was good .");
    for (_, score) in &rows {
        let (_, decimals) = score.split_once('.').unwrap();
        assert_eq!(decimals.len(), 4);
        let v: f64 = score.parse().unwrap();
        assert!((0.0..=1.0).contains(&v));
    }

    let o = run(&[
        "eval",
        "--predictions",
        &f.p("pred.tsv"),
        "--gold",
        &f.p("dev.tsv"),
        "--output",
        &f.p("m.tsv"),
    ]);
    assert_code(&o, 0);
    let report = fs::read_to_string(f.path("m.tsv")).unwrap();
    let lines: Vec<&str> = report.lines().collect();
    assert_eq!(lines[0], "metric\tvalue\tn");
    assert!(lines[1].starts_with("spearman\t") && lines[1].ends_with("\t3"));
    assert!(lines[2].starts_with("kendall_tau\t"));
    assert!(lines[3].starts_with("mae\t"));
}

#[test]
fn eval_hand_computed() {
    let f = Fixture::new();
    f.write("p.tsv", "x one\t0.1\nx two\t0.4\nx three\t0.3\n");
    f.write("g.tsv", "0.2\tx one\n0.3\tx two\n0.6\tx three\n");
    let o = run(&[
        "eval",
        "--predictions",
        &f.p("p.tsv"),
        "--gold",
        &f.p("g.tsv"),
    ]);
    assert_code(&o, 0);
    let out = stdout(&o);
    // ranks (1,3,2) vs (1,2,3): rho = 1 - 6*2/24 = 0.5, tau = (2-1)/3
    assert!(out.contains("spearman\t0.500000\t3"), "{out}");
    assert!(out.contains("kendall_tau\t0.333333\t3"), "{out}");
    // |0.1-0.2| + |0.4-0.3| + |0.3-0.6| = 0.5
    assert!(out.contains("mae\t0.166667\t3"), "{out}");
}

#[test]
fn checkpoint_with_other_embeddings_exits_with_four() {
    let f = Fixture::new();
    let run_dir = train_model(&f, "f32");
    f.write("other.txt", "2 4\nthe 0 0 0 0\nmarket 1 1 1 1\n");
    f.write("input.txt", "the market .\n");
    let o = run(&[
        "predict",
        "--checkpoint",
        &run_dir.join("model.json").display().to_string(),
        "--embeddings",
        &f.p("other.txt"),
        "--input",
        &f.p("input.txt"),
    ]);
    assert_code(&o, 4);
}

#[test]
fn divergence_exits_with_three() {
    let f = Fixture::new();
    let o = f.train(
        "div",
        &[
            "--epochs",
            "3",
            "--set",
            "learning_rate=1e30",
            "--variant",
            "se",
        ],
    );
    assert_code(&o, 3);
}

#[test]
fn length_baseline() {
    let f = Fixture::new();
    f.write("in.txt", "a b c .\n\na .\na b c d e f .\n");
    let o = run(&["baseline-length", "--input", &f.p("in.txt")]);
    assert_code(&o, 0);
    assert_eq!(
        stdout(&o),
        "a b c .\t0.4000\na .\t0.0000\na b c d e f .\t1.0000\n"
    );
    f.write("same.txt", "a b .\nc d .\n");
    let o = run(&["baseline-length", "--input", &f.p("same.txt")]);
    assert_eq!(stdout(&o), "a b .\t0.5000\nc d .\t0.5000\n");
}

#[test]
fn filter_short_and_general() {
    let f = Fixture::new();
    let run_dir = train_model(&f, "f32");
    f.write(
        "pairs.tsv",
        "hi\tit was good .\nhello\tthe market rose 12 percent in 1999 .\nq\tok\nwhy\tshares of the company fell 3.5 percent .\n",
    );
    let o = run(&[
        "filter",
        "--corpus",
        &f.p("pairs.tsv"),
        "--mode",
        "short",
        "--min-len",
        "5",
        "--output",
        &f.p("short.tsv"),
        "--report",
        &f.p("short_report.tsv"),
    ]);
    assert_code(&o, 0);
    let kept = fs::read_to_string(f.path("short.tsv")).unwrap();
    assert_eq!(kept.lines().count(), 2);
    assert!(kept.starts_with("hello\t"));
    let report = fs::read_to_string(f.path("short_report.tsv")).unwrap();
    let lines: Vec<&str> = report.lines().collect();
    assert_eq!(
        lines[0],
        "kept_n\tremoved_n\tunigram_diversity\tbigram_diversity"
    );
    assert!(lines[1].starts_with("2\t2\t"), "{report}");

    let ckpt = run_dir.join("model.json").display().to_string();
    let o = run(&[
        "filter",
        "--corpus",
        &f.p("pairs.tsv"),
        "--mode",
        "general",
        "--match-min-len",
        "5",
        "--checkpoint",
        &ckpt,
        "--embeddings",
        &f.p("emb.txt"),
        "--output",
        &f.p("general.tsv"),
    ]);
    assert_code(&o, 0);
    assert_eq!(
        fs::read_to_string(f.path("general.tsv"))
            .unwrap()
            .lines()
            .count(),
        2
    );
    assert!(stdout(&o).lines().nth(1).unwrap().starts_with("2\t2\t"));

    let o = run(&[
        "filter",
        "--corpus",
        &f.p("pairs.tsv"),
        "--mode",
        "general",
        "--keep-n",
        "2",
        "--output",
        &f.p("g.tsv"),
    ]);
    assert_code(&o, 2);
}

#[test]
fn histogram_csv() {
    let f = Fixture::new();
    f.write("p.tsv", "a\t0.0\nb\t0.25\nc\t0.5\nd\t1.0\n");
    let o = run(&["hist", "--predictions", &f.p("p.tsv"), "--bins", "4"]);
    assert_code(&o, 0);
    let out = stdout(&o);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(
        lines[0],
        "bin_left,bin_right,count,gaussian_density_at_center"
    );
    assert_eq!(lines.len(), 5);
    let counts: Vec<u64> = lines[1..]
        .iter()
        .map(|l| l.split(',').nth(2).unwrap().parse().unwrap())
        .collect();
    assert_eq!(counts, vec![1, 1, 1, 1]);
}

#[test]
fn features_export() {
    let f = Fixture::new();
    f.write("stop.txt", "the\nof\n");
    f.write("in.txt", "the market rose 12 percent .\nit was good .\n");
    let o = run(&[
        "features",
        "--input",
        &f.p("in.txt"),
        "--stopwords",
        &f.p("stop.txt"),
        "--output",
        &f.p("f.csv"),
    ]);
    assert_code(&o, 0);
    let csv = fs::read_to_string(f.path("f.csv")).unwrap();
    assert_eq!(csv.lines().count(), 3);
    assert!(csv.lines().nth(1).unwrap().contains("6,"), "{csv}");
}

#[test]
fn help_lists_subcommands() {
    let o = run(&["--help"]);
    let text = stdout(&o);
    for cmd in [
        "train",
        "predict",
        "eval",
        "baseline-length",
        "filter",
        "hist",
        "features",
    ] {
        assert!(text.contains(cmd), "{cmd}");
    }
}
