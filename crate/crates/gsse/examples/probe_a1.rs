use gsse::ensemble::{run_ensemble, ExperimentConfig};
use gsse::noise::{sample_realization, CorrelationPair, Kernel, TimeGrid};
use gsse::rng::{substream, StreamPurpose};
use gsse::sse::{run_trajectory, Engine, IntegratorKind, ModelSpec};

fn pair() -> CorrelationPair {
    CorrelationPair::new(vec![Kernel::white(0.5)], vec![Kernel::exp_decay(1.0, 1.0)])
}

fn main() {
    let model = ModelSpec::spin_boson(1.0, 1.0).unwrap();
    let grid = TimeGrid::new(2.0, 1e-3).unwrap();
    let engine = Engine::prepare(&model, &pair(), IntegratorKind::EmIto).unwrap();

    println!("manual run_trajectory, stream (seed, Trajectory, 0, 0):");
    for seed in [0u64, 1, 42, 1001, 1002] {
        let mut rng = substream(seed, StreamPurpose::Trajectory, 0, 0);
        let r = sample_realization(&pair(), &grid, true, &mut rng);
        let tr = run_trajectory(&engine, &model, &grid, &r, 20).unwrap();
        println!("  seed {seed:>4}: final |psi|^2 = {:.12e}", tr.norms_sq[grid.n_steps()]);
    }

    println!("run_ensemble with n_trajectories = 1:");
    for seed in [0u64, 1, 42, 1001, 1002] {
        let cfg = ExperimentConfig {
            model: ModelSpec::spin_boson(1.0, 1.0).unwrap(),
            pair: pair(),
            grid: TimeGrid::new(2.0, 1e-3).unwrap(),
            n_trajectories: 1,
            master_seed: seed,
            integrator: IntegratorKind::EmIto,
            n_snapshots: 20,
            branching: None,
            workers: None,
        };
        let stats = run_ensemble(&cfg).unwrap();
        println!("  seed {seed:>4}: final mean |psi|^2 = {:.12e}", stats.mean_norm_sq[20]);
    }
}
