//! Loads a run from TOML, simulates it, and round-trips the trajectory
//! through the binary format and CSV.

use rstring::integrator::run;
use rstring::io::{export_trajectory_csv, read_trajectory, write_trajectory, RunConfig};

const CONFIG: &str = r#"
master_seed = 42

[domain]
kind = "ball"
center = [0.0, 0.0]
radius = 0.5

[potential]
kind = "quadratic"
center = [0.1, 0.0]
weight = 1.0

[grid]
m = 31

[integrator]
n = 200.0
dt = 1e-3
t_end = 0.5
record_every = 50
initial = "nu_n"
"#;

fn main() -> rstring::Result<()> {
    let cfg = RunConfig::from_toml_str(CONFIG)?;
    println!("{}", cfg.to_toml_string()?);
    let traj = run(&cfg.sim_config()?)?;
    let dir = std::env::temp_dir().join("rstring-example-io");
    std::fs::create_dir_all(&dir).map_err(|e| rstring::Error::Config(e.to_string()))?;
    let path = dir.join("run.rstr");
    write_trajectory(&traj, &path)?;
    let back = read_trajectory(&path)?;
    assert_eq!(back, traj);
    let rows = export_trajectory_csv(&back, dir.join("run.csv"))?;
    println!("{} frames, {} CSV rows, files in {}", traj.len(), rows, dir.display());
    Ok(())
}
