use powergame_core::scenario::{
    compute_routing, generate_topology, rayleigh_with_mean, sample_channel_gains, GAIN_AT_UNIT_DISTANCE,
};
use powergame_core::{Error, Hop, Point, Scenario};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::Distribution;

#[test]
fn square_side_follows_node_count() {
    for (users, side) in [(16, 40.0), (1, 10.0)] {
        let topo = generate_topology(users, 3).unwrap();
        assert!((topo.side - side).abs() < 1e-12);
        assert_eq!(topo.positions.len(), users);
        assert_eq!(topo.access_point, Point::new(0.0, 0.0));
        for p in &topo.positions {
            assert!(p.x.abs() <= side / 2.0 && p.y.abs() <= side / 2.0);
        }
    }
    assert!(matches!(generate_topology(0, 1), Err(Error::InvalidArgument(_))));
}

#[test]
fn topology_is_deterministic() {
    assert_eq!(generate_topology(12, 77).unwrap().positions, generate_topology(12, 77).unwrap().positions);
    assert_ne!(generate_topology(12, 77).unwrap().positions, generate_topology(12, 78).unwrap().positions);
}

#[test]
fn routing_examples() {
    let ap = Point::new(0.0, 0.0);
    let hops = compute_routing(&[Point::new(1.0, 0.0), Point::new(3.0, 0.0)], ap);
    assert_eq!(hops, vec![Hop::AccessPoint, Hop::Node(0)]);
    assert_eq!(compute_routing(&[Point::new(2.0, -1.0)], ap), vec![Hop::AccessPoint]);
}

#[test]
fn routes_reach_the_access_point() {
    for seed in 0..100 {
        let users = 1 + (seed as usize % 48);
        let s = Scenario::generate(users, seed, 5e-16).unwrap();
        for k in 0..users {
            assert_ne!(s.next_hop[k], Hop::Node(k));
            let hops = s.hops_to_access_point(k).expect("routing cycle");
            assert!(hops <= users);
        }
    }
}

#[test]
fn placement_is_centred_on_the_access_point() {
    // Uniform on a side-40 square: per-coordinate standard deviation 40/√12.
    let (mut sx, mut sy, mut n) = (0.0, 0.0, 0.0);
    for seed in 0..500 {
        for p in generate_topology(16, seed).unwrap().positions {
            sx += p.x;
            sy += p.y;
            n += 1.0;
        }
    }
    let se = 40.0 / 12f64.sqrt() / f64::sqrt(n);
    assert!((sx / n).abs() < 4.0 * se, "mean x {}", sx / n);
    assert!((sy / n).abs() < 4.0 * se, "mean y {}", sy / n);
}

fn rayleigh_sample_mean(d: f64, draws: usize) -> (f64, f64) {
    let dist = rayleigh_with_mean(GAIN_AT_UNIT_DISTANCE / (d * d));
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let xs: Vec<f64> = (0..draws).map(|_| dist.sample(&mut rng)).collect();
    let mean = xs.iter().sum::<f64>() / draws as f64;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (draws - 1) as f64;
    (mean, (var / draws as f64).sqrt())
}

#[test]
fn rayleigh_means() {
    for (d, want) in [(1.0, 0.3), (2.0, 0.075)] {
        let (mean, se) = rayleigh_sample_mean(d, 100_000);
        assert!((mean - want).abs() < 3.0 * se, "d={d}: {mean} ± {se}");
    }
}

#[test]
fn sampled_gains_have_the_path_loss_mean() {
    // One transmitter 1 km from the access point, resampled over many seeds.
    let positions = [Point::new(1.0, 0.0)];
    let ap = Point::new(0.0, 0.0);
    let xs: Vec<f64> = (0..20_000).map(|seed| sample_channel_gains(&positions, ap, seed).unwrap()[1][0]).collect();
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let se = (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0) / n).sqrt();
    assert!((mean - 0.3).abs() < 3.0 * se, "{mean} ± {se}");
}

#[test]
fn gains_are_positive_and_reproducible() {
    let topo = generate_topology(10, 4).unwrap();
    let a = sample_channel_gains(&topo.positions, topo.access_point, 9).unwrap();
    let b = sample_channel_gains(&topo.positions, topo.access_point, 9).unwrap();
    assert_eq!(a, b);
    for (m, row) in a.iter().enumerate() {
        for (j, &h) in row.iter().enumerate() {
            if m == j {
                assert_eq!(h, 0.0, "a node does not hear itself");
            } else {
                assert!(h > 0.0);
            }
        }
    }
}

#[test]
fn coincident_nodes_are_rejected() {
    let positions = [Point::new(1.0, 1.0), Point::new(1.0, 1.0)];
    assert!(matches!(
        sample_channel_gains(&positions, Point::new(0.0, 0.0), 1),
        Err(Error::InvalidArgument(_))
    ));
}
