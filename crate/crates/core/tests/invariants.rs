use proptest::prelude::*;

use rissim::config::{SimConfig, StrategySpec};
use rissim::engine::Simulator;
use rissim::metrics::Metric;

fn small(seed: u64, users: usize, ris: usize) -> SimConfig {
    let mut cfg = SimConfig::default();
    cfg.layout.num_rings = 0;
    cfg.layout.users_per_sector = users;
    cfg.panels.ris_horizontal = ris;
    cfg.panels.ris_vertical = ris;
    cfg.run.seed = seed;
    cfg.run.drops = 2;
    cfg
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn muted_snr_never_drops_below_direct(seed in any::<u64>(), users in 1usize..4, ris in 1usize..6) {
        let mut cfg = small(seed, users, ris);
        cfg.run.mute_interferers = true;
        let specs = [StrategySpec::NoRis, StrategySpec::Codebook(4), StrategySpec::Discrete(2), StrategySpec::Ideal];
        let sim = Simulator::new(cfg, &specs).unwrap();
        for d in 0..2 {
            let r = sim.run_drop(d).unwrap();
            for (k, base) in r[0].metrics.users.iter().enumerate() {
                for other in &r[1..] {
                    let u = &other.metrics.users[k];
                    prop_assert!(u.snr_db >= base.snr_db - 1e-9, "{} below {} for {}", u.snr_db, base.snr_db, other.strategy);
                    prop_assert_eq!(u.sinr_db, u.snr_db);
                }
            }
        }
    }

    #[test]
    fn per_user_metrics_are_consistent(seed in any::<u64>(), users in 1usize..4) {
        let specs = [StrategySpec::NoRis, StrategySpec::Random, StrategySpec::Ideal];
        let result = Simulator::new(small(seed, users, 4), &specs).unwrap().run_campaign(1).unwrap();
        for o in &result.outcomes {
            prop_assert_eq!(o.users().count(), 2 * 3 * users);
            for u in o.users() {
                prop_assert!(u.sinr_db <= u.snr_db + 1e-9);
                let se = (1.0 + 10f64.powf(u.sinr_db / 10.0)).log2();
                prop_assert!((u.spectral_eff - se).abs() <= 1e-9 * se.max(1.0));
                prop_assert!(u.coupling_loss_db.is_finite());
                prop_assert!(u.serving_sector < 3);
            }
            for m in Metric::ALL {
                let cdf = o.cdf(m).unwrap();
                prop_assert!(cdf.sorted_values.windows(2).all(|w| w[0] < w[1]));
                prop_assert_eq!(*cdf.probabilities.last().unwrap(), 1.0);
            }
        }
    }

    #[test]
    fn attachment_does_not_depend_on_strategy(seed in any::<u64>()) {
        let specs = [StrategySpec::NoRis, StrategySpec::Discrete(8), StrategySpec::Ideal];
        let r = Simulator::new(small(seed, 3, 3), &specs).unwrap().run_drop(0).unwrap();
        let serving = |i: usize| r[i].metrics.users.iter().map(|u| u.serving_sector).collect::<Vec<_>>();
        prop_assert_eq!(serving(0), serving(1));
        prop_assert_eq!(serving(0), serving(2));
    }
}
