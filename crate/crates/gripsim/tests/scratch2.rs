use gripsim::envs::{episode_return, trial_seed, EnvConfig, GripperEnv};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

#[test]
fn probe_random_baseline() {
    let mut returns = Vec::new();
    for i in 0..20 {
        let mut config = EnvConfig::gripper();
        config.seed = trial_seed(42, i);
        let mut env = GripperEnv::new(config).unwrap();
        let mut rng = ChaCha20Rng::seed_from_u64(trial_seed(42, i) ^ 0x9E37_79B9_7F4A_7C15);
        let ret = episode_return(&mut env, |_| {
            vec![rng.random_range(-0.05..=0.05), rng.random_range(-0.05..=0.05)]
        })
        .unwrap();
        returns.push(ret);
    }
    let mean = returns.iter().sum::<f64>() / returns.len() as f64;
    let min = returns.iter().cloned().fold(f64::INFINITY, f64::min);
    let max = returns.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    println!("random 20-ep mean={mean:.1} min={min:.1} max={max:.1}");
    println!("threshold (0.75 * mean) = {:.1}", 0.75 * mean);
    println!("returns: {returns:?}");

    // A hold-open policy for comparison.
    let mut config = EnvConfig::gripper();
    config.seed = 7;
    let mut env = GripperEnv::new(config).unwrap();
    let ret = episode_return(&mut env, |_| vec![0.05, 0.05]).unwrap();
    println!("hold-open return with noise: {ret:.2}");
}
