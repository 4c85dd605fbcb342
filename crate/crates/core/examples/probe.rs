use arctic_ssp::modes::{solve_modes, WaveguideSpec};
use arctic_ssp::profile::{build_profile, DepthProfile, DualChannelParams};

fn main() {
    let baseline = DepthProfile::synthetic_baseline(3800.0);
    for (i, w) in [(7.5, 69.0), (0.0, 69.0), (3.0, 30.0), (3.0, 120.0), (15.0, 30.0), (12.0, 100.0)] {
        let params = DualChannelParams::new(i, w).unwrap();
        let dual = build_profile(&baseline, &params).unwrap();
        let spec = WaveguideSpec::with_defaults(dual).unwrap();
        println!("== I={i} W={w} ==");
        for f in [10.0, 15.0, 30.0, 45.0, 60.0, 75.0, 90.0, 100.0] {
            let t0 = std::time::Instant::now();
            let ms = solve_modes(&spec.refined_for(f), f, 3).unwrap();
            let r = 200_000.0;
            let ts: Vec<String> = ms
                .modes
                .iter()
                .map(|m| format!("vg={:7.2} t'={:6.2} turn={:5.0}", m.group_velocity, r / m.group_velocity - r / 1500.0, m.turning_depth))
                .collect();
            println!(
                "f={f:5.1} n={} disc={} [{}] ({} ms)",
                ms.modes.len(),
                ms.discarded,
                ts.join(" | "),
                t0.elapsed().as_millis()
            );
        }
    }
}
