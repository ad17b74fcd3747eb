use gripsim::envs::{EnvConfig, GripperEnv};
use gripsim::pi::{run_baseline, PiGains};

#[test]
fn probe_pi_margins() {
    // Default scenario, noise off.
    let mut config = EnvConfig::gripper();
    config.sensor.noise_enabled = false;
    let mut env = GripperEnv::new(config.clone()).unwrap();
    let run = run_baseline(&mut env, PiGains::default()).unwrap();
    let max_err: f64 = run.trace[200..]
        .iter()
        .flat_map(|r| r.f_raw.iter().map(|f| (f - 1.0).abs()))
        .fold(0.0, f64::max);
    println!(
        "default: switch={:?} return={:.2} max|e| over [200,300]={:.5}",
        run.switch_step, run.episode_return, max_err
    );

    // Offset scenario displacement.
    let mut config_off = config.clone();
    config_off.sim.object_init.x = 0.005;
    let mut env = GripperEnv::new(config_off).unwrap();
    let run = run_baseline(&mut env, PiGains::default()).unwrap();
    println!(
        "offset +5mm: switch={:?} displacement={:.6} m",
        run.switch_step,
        run.acquisition_displacement()
    );

    // Stiffness sweep with unchanged gains.
    for mult in [0.5, 0.75, 1.0, 1.5, 2.0] {
        let mut c = config.clone();
        c.sim.object_init.stiffness *= mult;
        let mut env = GripperEnv::new(c).unwrap();
        let run = run_baseline(&mut env, PiGains::default()).unwrap();
        let last50: f64 = run.trace[250..]
            .iter()
            .flat_map(|r| r.f_raw.iter().map(|f| (f - 1.0).abs()))
            .fold(0.0, f64::max);
        println!(
            "stiffness x{mult}: switch={:?} max|e| over [250,300]={:.5}",
            run.switch_step, last50
        );
    }

    // What the untuned text-book-looking gains would do.
    let wild = PiGains { kp: 0.02, ki: 0.05, integral_limit: 2.0, v_close: 0.02 };
    let mut env = GripperEnv::new(config).unwrap();
    let run = run_baseline(&mut env, wild).unwrap();
    let max_f: f64 = run.trace.iter().flat_map(|r| r.f_raw).fold(0.0, f64::max);
    println!(
        "kp=0.02 gains: return={:.1} max f_raw={:.1}",
        run.episode_return, max_f
    );

    // Noisy returns, 10 seeds.
    let mut noisy = EnvConfig::gripper();
    noisy.sensor.noise_enabled = true;
    let mut returns = Vec::new();
    for i in 0..10 {
        noisy.seed = 100 + i;
        let mut env = GripperEnv::new(noisy.clone()).unwrap();
        let run = run_baseline(&mut env, PiGains::default()).unwrap();
        returns.push(run.episode_return);
    }
    let mean = returns.iter().sum::<f64>() / 10.0;
    println!("noisy PI returns mean={mean:.2} all={returns:?}");
}
