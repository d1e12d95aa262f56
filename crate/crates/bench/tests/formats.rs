use std::collections::BTreeMap;
use std::path::Path;

use mfg_bench::campaign::{garnet_campaign, CampaignSpec, TABLE_HEADER};
use mfg_bench::config::ConfigDoc;
use mfg_bench::run::{execute_run, RunSpec, MEAN_FIELD_FILE, METRICS_FILE, METRICS_HEADER, POLICY_FILE, SUMMARY_FILE};
use mfg_bench::sweep::{execute_sweep, load_summaries, select_best, SweepSpec};
use mfg_core::{AlgorithmId, GarnetSpec, SolverConfig, Structure};
use serde_json::Value as Json;

fn run_spec(text: &str, out: &Path) -> RunSpec {
    let mut doc = ConfigDoc::parse(text).unwrap();
    doc.set(&format!("out=\"{}\"", out.display())).unwrap();
    RunSpec::from_config(&doc.build().unwrap()).unwrap()
}

fn parse_row(line: &str) -> Vec<f64> {
    line.split(',').map(|v| v.parse().unwrap()).collect()
}

#[test]
fn run_files_have_the_documented_layout() {
    let dir = tempfile::tempdir().unwrap();
    let spec = run_spec(
        "env = \"beach_bar\"\nalgo = \"boltzmann_pi\"\nseed = 2\n[solver]\niterations = 6\neval_every = 2\n",
        dir.path(),
    );
    let outcome = execute_run(&spec).unwrap();
    let run_dir = dir.path().join("beach_bar/boltzmann_pi").join(&outcome.summary.config_hash).join("2");
    assert_eq!(outcome.dir, run_dir);

    let metrics = std::fs::read_to_string(run_dir.join(METRICS_FILE)).unwrap();
    let mut lines = metrics.lines();
    assert_eq!(lines.next(), Some(METRICS_HEADER));
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    let iterations: Vec<usize> = rows.iter().map(|r| r[0].parse().unwrap()).collect();
    assert_eq!(iterations, vec![0, 2, 4, 6]);
    for (row, record) in rows.iter().zip(&outcome.trace.records) {
        assert_eq!(row[1].parse::<f64>().unwrap(), record.exploitability);
    }

    let mean_field = std::fs::read_to_string(run_dir.join(MEAN_FIELD_FILE)).unwrap();
    assert_eq!(mean_field.lines().count(), 1);
    let mu = parse_row(mean_field.trim_end());
    assert_eq!(mu, outcome.trace.final_mean_field.as_slice());

    let policy = std::fs::read_to_string(run_dir.join(POLICY_FILE)).unwrap();
    let rows: Vec<Vec<f64>> = policy.lines().map(parse_row).collect();
    assert_eq!((rows.len(), rows[0].len()), (7, 3));
    for (x, row) in rows.iter().enumerate() {
        for (a, p) in row.iter().enumerate() {
            assert_eq!(*p, outcome.trace.final_policy.prob(x, a));
        }
    }

    let text = std::fs::read_to_string(run_dir.join(SUMMARY_FILE)).unwrap();
    assert!(text.ends_with("}\n"));
    let json: Json = serde_json::from_str(&text).unwrap();
    for key in ["env", "params", "algo", "config", "seed", "final_exploitability", "iterations", "wall_time_ms", "config_hash", "rng_algorithm"] {
        assert!(json.get(key).is_some(), "summary lacks `{key}`");
    }
    assert_eq!(json["algo"], "boltzmann_pi");
    assert_eq!(json["config"]["init_seed"], 2);
    assert!(json["params"]["gamma"].is_number());
}

#[test]
fn garnet_and_grid_runs_record_their_provenance() {
    let dir = tempfile::tempdir().unwrap();
    let spec = run_spec(
        "env = \"garnet\"\nalgo = \"pure_fp\"\n[garnet]\nn_states = 4\nn_actions = 2\nbranching = 2\nseed = 5\n[solver]\niterations = 3\n",
        dir.path(),
    );
    let s = execute_run(&spec).unwrap().summary;
    assert_eq!(s.env, "garnet");
    assert_eq!(s.garnet.as_ref().unwrap().seed, 5);
    for key in ["c_p", "rho_p", "c_r", "rho_r"] {
        assert!(s.params.contains_key(key));
    }
    assert_eq!(s.rng_algorithm, mfg_core::garnet::GARNET_RNG);

    let spec = run_spec("env = \"four_rooms\"\nalgo = \"pure_fp\"\n[solver]\niterations = 1\n", dir.path());
    let layout = execute_run(&spec).unwrap().summary.layout;
    assert!(layout.is_some());
}

#[test]
fn timing_off_reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let text = "env = \"sis\"\nalgo = \"mf_pso\"\ntiming = false\n[solver]\niterations = 4\nparticles = 5\n";
    let spec = run_spec(text, dir.path());
    let first = execute_run(&spec).unwrap();
    let files = [METRICS_FILE, MEAN_FIELD_FILE, POLICY_FILE, SUMMARY_FILE];
    let before: Vec<Vec<u8>> = files.iter().map(|f| std::fs::read(first.dir.join(f)).unwrap()).collect();
    let second = execute_run(&spec).unwrap();
    assert_eq!(first.dir, second.dir);
    let after: Vec<Vec<u8>> = files.iter().map(|f| std::fs::read(second.dir.join(f)).unwrap()).collect();
    assert_eq!(before, after);
}

#[test]
fn sweep_picks_the_best_damping() {
    let dir = tempfile::tempdir().unwrap();
    let mut base =
        ConfigDoc::parse("env = \"coordination\"\nalgo = \"damped_fp\"\n[solver]\niterations = 20\n").unwrap();
    base.set(&format!("out=\"{}\"", dir.path().display())).unwrap();
    base.set("C=5").unwrap();
    let grid = BTreeMap::from([(
        "solver.damping".to_string(),
        vec![toml::Value::Float(1.0), toml::Value::Float(0.5)],
    )]);
    let spec = SweepSpec { base, grid, seeds: vec![0, 1, 2, 3], jobs: 2 };
    let outcome = execute_sweep(&spec).unwrap();
    let report = &outcome.report;
    assert!(report.failures.is_empty());
    assert_eq!(report.configs.len(), 2);
    assert!(report.configs.iter().all(|c| c.seeds == vec![0, 1, 2, 3]));

    let best = report.best.as_ref().unwrap();
    assert_eq!(best.grid["solver.damping"], Json::from(0.5));
    assert_eq!(best.n_seeds, 4);

    let loaded = load_summaries(dir.path()).unwrap();
    assert_eq!(loaded.len(), 8);
    let mut per_hash: BTreeMap<&str, usize> = BTreeMap::new();
    for s in &loaded {
        *per_hash.entry(&s.config_hash).or_default() += 1;
    }
    assert!(per_hash.values().all(|&n| n == 4));
    assert_eq!(select_best(&loaded).as_ref(), Some(best));

    let on_disk: mfg_bench::SweepReport =
        serde_json::from_slice(&std::fs::read(outcome.report_path.unwrap()).unwrap()).unwrap();
    assert_eq!(&on_disk, report);
}

#[test]
fn ties_go_to_the_smallest_grid_point() {
    let dir = tempfile::tempdir().unwrap();
    let mut base = ConfigDoc::parse("env = \"move_forward\"\nalgo = \"damped_fp\"\n[solver]\niterations = 3\n").unwrap();
    base.set(&format!("out=\"{}\"", dir.path().display())).unwrap();
    let grid = BTreeMap::from([(
        "solver.damping".to_string(),
        vec![toml::Value::Float(1.0), toml::Value::Float(0.25), toml::Value::Float(0.5)],
    )]);
    let outcome = execute_sweep(&SweepSpec { base, grid, seeds: vec![0, 1], jobs: 1 }).unwrap();
    let best = outcome.report.best.unwrap();
    assert!(best.mean < 1e-8);
    assert_eq!(best.grid["solver.damping"], Json::from(0.25));
}

#[test]
fn sweep_records_failed_points_and_continues() {
    let dir = tempfile::tempdir().unwrap();
    let mut base = ConfigDoc::parse("env = \"sis\"\nalgo = \"omd\"\n[solver]\niterations = 2\n").unwrap();
    base.set(&format!("out=\"{}\"", dir.path().display())).unwrap();
    let grid = BTreeMap::from([(
        "solver.learning_rate".to_string(),
        vec![toml::Value::Float(-1.0), toml::Value::Float(0.1)],
    )]);
    let outcome = execute_sweep(&SweepSpec { base, grid, seeds: vec![0, 1], jobs: 1 }).unwrap();
    assert_eq!(outcome.report.failures.len(), 2);
    assert_eq!(outcome.summaries.len(), 2);
    assert_eq!(outcome.report.best.unwrap().grid["solver.learning_rate"], Json::from(0.1));
}

fn small_campaign(out: &Path, seeds: Vec<u64>) -> CampaignSpec {
    CampaignSpec {
        template: GarnetSpec::default(),
        shapes: vec![mfg_bench::config::GarnetShape {
            n_states: 3,
            n_actions: 2,
            branching: 2,
            dynamics_structure: Structure::Additive,
            reward_structure: Structure::Multiplicative,
        }],
        garnet_seeds: seeds,
        algorithms: vec![
            (AlgorithmId::PureFp, SolverConfig { iterations: 5, ..SolverConfig::default() }),
            (AlgorithmId::Omd, SolverConfig { iterations: 5, learning_rate: 0.5, ..SolverConfig::default() }),
        ],
        seed: 0,
        out_root: out.to_path_buf(),
        timing: false,
        jobs: 2,
    }
}

#[test]
fn campaign_table_aggregates_per_algorithm() {
    let dir = tempfile::tempdir().unwrap();
    let outcome = garnet_campaign(&small_campaign(dir.path(), vec![0, 1, 2])).unwrap();
    let text = std::fs::read_to_string(&outcome.table_path).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some(TABLE_HEADER));
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 2);
    assert_eq!(&rows[0][..4], &["pure_fp", "3x2x2", "additive", "multiplicative"]);
    assert_eq!(rows[1][0], "omd");
    assert_eq!(rows[0][6], "3");

    let finals: Vec<f64> = load_summaries(&dir.path().join("garnet").join("pure_fp"))
        .unwrap()
        .into_iter()
        .map(|s| s.final_exploitability)
        .collect();
    assert_eq!(finals.len(), 3);
    let mean = finals.iter().sum::<f64>() / 3.0;
    let std = (finals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / 2.0).sqrt();
    assert!((rows[0][4].parse::<f64>().unwrap() - mean).abs() <= 1e-15 * mean.abs().max(1.0));
    assert!((rows[0][5].parse::<f64>().unwrap() - std).abs() <= 1e-12 * std.max(1.0));
}

#[test]
fn single_instance_campaign_has_zero_spread() {
    let dir = tempfile::tempdir().unwrap();
    let outcome = garnet_campaign(&small_campaign(dir.path(), vec![4])).unwrap();
    assert_eq!(outcome.rows.len(), 2);
    for row in &outcome.rows {
        assert_eq!((row.n, row.std), (1, 0.0));
    }
}

#[test]
fn campaign_reads_its_config_section() {
    let doc = ConfigDoc::parse(
        "env = \"garnet\"\n[campaign]\ngarnet_seeds = [0, 1]\nalgorithms = [\"pure_fp\", \"mf_pso\"]\n\
         [[campaign.shapes]]\nn_states = 5\nn_actions = 5\nbranching = 5\ndynamics_structure = \"additive\"\nreward_structure = \"multiplicative\"\n\
         [campaign.overrides.mf_pso]\ntemperature = 0.05\nparticles = 20\n",
    )
    .unwrap();
    let spec = CampaignSpec::from_config(&doc.build().unwrap(), 1).unwrap();
    assert_eq!(spec.garnet_seeds, vec![0, 1]);
    assert_eq!(spec.shapes[0].reward_structure, Structure::Multiplicative);
    let (id, pso) = &spec.algorithms[1];
    assert_eq!((*id, pso.temperature, pso.particles), (AlgorithmId::MfPso, 0.05, 20));
    assert_eq!(spec.algorithms[0].1, SolverConfig::default());

    let stray = ConfigDoc::parse("[campaign]\nalgorithms = [\"omd\"]\n[campaign.overrides.mf_pso]\nparticles = 3\n").unwrap();
    assert!(CampaignSpec::from_config(&stray.build().unwrap(), 1).is_err());
}

#[test]
fn shipped_configs_are_valid() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let mut seen = 0;
    for entry in std::fs::read_dir(&dir).unwrap() {
        let path = entry.unwrap().path();
        let cfg = ConfigDoc::load(&path).unwrap().build().unwrap();
        if cfg.campaign.algorithms.is_empty() {
            RunSpec::from_config(&cfg).unwrap();
            mfg_bench::sweep::grid_points(&cfg.sweep.grid).unwrap();
        } else {
            CampaignSpec::from_config(&cfg, 1).unwrap();
        }
        seen += 1;
    }
    assert_eq!(seen, 4);
}
