//! Driving experiments from a TOML config, as the command-line tool does.
//!
//! cargo run --example experiment_config

use freqh2::cli::config::ExperimentConfig;
use freqh2::cli::{cmd_analyze, cmd_sweep};

const CONFIG: &str = r#"
[network]
kind = "edges"
n = 4
edges = [[1, 2, 1.0], [2, 3, 1.0], [3, 4, 1.0], [4, 1, 1.0]]

[controller]
kind = "dapi"
gamma = 5.0

[run]
kind = "sweep"
variable = "gamma"
grid = [1, 10, 100]
"#;

fn main() -> freqh2::Result<()> {
    let config = ExperimentConfig::from_toml(CONFIG)?;
    let sweep = cmd_sweep(&config)?;
    for row in &sweep.rows {
        let exact = row.analytic.as_ref().map(|a| a.value).unwrap_or(f64::NAN);
        println!(
            "gamma = {:>5}: Lyapunov {:.6}, modal sum {exact:.6}",
            row.value, row.numerical
        );
    }

    let analyze = ExperimentConfig {
        run: Default::default(),
        ..config
    };
    println!(
        "{}",
        serde_json::to_string_pretty(&cmd_analyze(&analyze)?).expect("serializable")
    );

    match ExperimentConfig::from_toml(
        "[network]\nkind = \"path\"\nn = 3\nwieght = 1\n[controller]\nkind = \"broadcast\"\n",
    ) {
        Err(e) => println!("typo rejected: {e}"),
        Ok(_) => unreachable!(),
    }
    Ok(())
}
