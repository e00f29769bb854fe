use chemotaxis_core::config::{load_config, RunConfig};
use proptest::prelude::*;

fn render(cfg: &Cfg) -> String {
    let domain = if cfg.rect {
        format!("kind = \"rectangle\"\nlengths = [{:?}, {:?}]\ncells = [{}, {}]", cfg.lx, cfg.ly, cfg.nx, cfg.ny)
    } else {
        format!("kind = \"interval\"\nlengths = [{:?}]\ncells = [{}]", cfg.lx, cfg.nx)
    };
    let mut text =
        format!("[domain]\n{domain}\n\n[params]\ngamma = {:?}\nchi = {:?}\ng = {:?}\n", cfg.gamma, cfg.chi, cfg.g);
    if let Some(gl) = cfg.g_left {
        text.push_str(&format!("g_left = {gl:?}\n"));
    }
    text.push_str(&format!(
        "\n[init]\nprofile = \"{}\"\nbaseline = {:?}\namplitude = {:?}\n\n[time]\nt_end = {:?}\n",
        cfg.profile, cfg.baseline, cfg.amplitude, cfg.t_end
    ));
    if let Some(cap) = cfg.dt_cap {
        text.push_str(&format!("dt_cap = {cap:?}\n"));
    }
    text.push_str(&format!("\n[analysis]\nseed = {}\n", cfg.seed));
    text
}

#[derive(Debug, Clone)]
struct Cfg {
    rect: bool,
    lx: f64,
    ly: f64,
    nx: usize,
    ny: usize,
    gamma: f64,
    chi: f64,
    g: f64,
    g_left: Option<f64>,
    profile: &'static str,
    baseline: f64,
    amplitude: f64,
    t_end: f64,
    dt_cap: Option<f64>,
    seed: u64,
}

fn configs() -> impl Strategy<Value = Cfg> {
    (
        (any::<bool>(), 0.1f64..10.0, 0.1f64..10.0, 2usize..200, 2usize..200),
        (0.0f64..5.0, 0.1f64..4.0, 0.0f64..10.0, proptest::option::of(0.0f64..10.0)),
        (prop::sample::select(vec!["constant", "gaussian-bump", "two-bumps"]), 1e-3f64..5.0, 0.0f64..5.0),
        (0.0f64..100.0, proptest::option::of(1e-6f64..1.0), any::<u64>()),
    )
        .prop_map(
            |(
                (rect, lx, ly, nx, ny),
                (gamma, chi, g, g_left),
                (profile, baseline, amplitude),
                (t_end, dt_cap, seed),
            )| Cfg {
                rect,
                lx,
                ly,
                nx,
                ny,
                gamma,
                chi,
                g,
                g_left,
                profile,
                baseline,
                amplitude,
                t_end,
                dt_cap,
                seed,
            },
        )
}

proptest! {
    #[test]
    fn written_config_reads_back_identically(cfg in configs()) {
        let parsed = RunConfig::parse(&render(&cfg)).unwrap();
        let text = parsed.to_text();
        let again = RunConfig::parse(&text).unwrap();
        prop_assert_eq!(&parsed, &again);
        prop_assert_eq!(parsed.params.gamma, cfg.gamma);
        prop_assert_eq!(parsed.analysis.seed, cfg.seed);
    }
}

#[test]
fn load_from_disk() {
    let dir = std::env::temp_dir().join(format!("chemotaxis-config-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("run.toml");
    std::fs::write(
        &path,
        "[domain]\nkind = \"interval\"\nlengths = [1.0]\ncells = [64]\n[params]\ngamma = 0.1\n[time]\nt_end = 50.0\n",
    )
    .unwrap();
    let cfg = load_config(&path).unwrap();
    assert_eq!(cfg.domain.cells, vec![64]);
    assert!(load_config(dir.join("missing.toml")).is_err());
    std::fs::remove_dir_all(&dir).unwrap();
}
