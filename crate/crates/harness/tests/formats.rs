use proptest::prelude::*;
use rand::SeedableRng;
use vmcts::formats::{decode_checkpoint, encode_checkpoint};
use vmcts::records::{mean_stderr, paired_t_test_greater};
use vmcts_core::learn::{GaussianPolicy, Mlp, Nets};
use vmcts_core::planner::PlannerRng;

fn nets(widths: &[usize], action_dim: usize, seed: u64) -> Nets {
    let mut rng = PlannerRng::seed_from_u64(seed);
    let mut pw = widths.to_vec();
    pw.push(2 * action_dim);
    let mut vw = widths.to_vec();
    vw.push(1);
    Nets {
        value: Mlp::new(&vw, &mut rng),
        policy: GaussianPolicy::new(Mlp::new(&pw, &mut rng)).unwrap(),
    }
}

proptest! {
    #[test]
    fn checkpoint_round_trips(widths in prop::collection::vec(1usize..6, 1..4), a in 1usize..3, seed: u64) {
        let n = nets(&widths, a, seed);
        let bytes = encode_checkpoint(&n);
        prop_assert_eq!(decode_checkpoint(&bytes).unwrap(), n);
    }

    #[test]
    fn damaged_checkpoints_are_errors(widths in prop::collection::vec(1usize..5, 1..3), cut in any::<prop::sample::Index>(), flip in any::<prop::sample::Index>(), seed: u64) {
        let bytes = encode_checkpoint(&nets(&widths, 1, seed));
        let k = cut.index(bytes.len());
        prop_assert!(decode_checkpoint(&bytes[..k]).is_err());
        let mut extended = bytes.clone();
        extended.push(0);
        prop_assert!(decode_checkpoint(&extended).is_err());
        // corrupting a header byte must not panic
        let mut header = bytes.clone();
        header[flip.index(24)] ^= 0xff;
        let _ = decode_checkpoint(&header);
    }

    #[test]
    fn arbitrary_bytes_never_panic(bytes in prop::collection::vec(any::<u8>(), 0..200)) {
        let _ = decode_checkpoint(&bytes);
    }

    #[test]
    fn stderr_is_shift_invariant_and_scales(xs in prop::collection::vec(-100.0f64..100.0, 2..30), shift in -50.0f64..50.0, k in 0.1f64..10.0) {
        let (m, s) = mean_stderr(&xs);
        let shifted: Vec<f64> = xs.iter().map(|x| k * x + shift).collect();
        let (m2, s2) = mean_stderr(&shifted);
        prop_assert!((m2 - (k * m + shift)).abs() < 1e-9 * (1.0 + m2.abs()));
        prop_assert!((s2 - k * s).abs() < 1e-9 * (1.0 + s2));
    }

    #[test]
    fn paired_test_is_monotone_in_the_gap(b in prop::collection::vec(0.0f64..50.0, 3..20), noise in prop::collection::vec(-1.0f64..1.0, 20), gap in 0.0f64..3.0) {
        let a1: Vec<f64> = b.iter().zip(&noise).map(|(x, e)| x + e).collect();
        let a2: Vec<f64> = a1.iter().map(|x| x + gap).collect();
        let (p1, p2) = (paired_t_test_greater(&a1, &b), paired_t_test_greater(&a2, &b));
        prop_assert!((0.0..=1.0).contains(&p1));
        prop_assert!(p2 <= p1 + 1e-12);
    }
}
