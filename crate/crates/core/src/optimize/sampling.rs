use rand::seq::SliceRandom;
use rand::Rng;

/// `count` points of a Latin hypercube in the box `bounds`: every parameter
/// range is cut into `count` equal strata and each stratum is used once.
pub fn latin_hypercube<R: Rng>(count: usize, bounds: &[(f64, f64)], rng: &mut R) -> Vec<Vec<f64>> {
    let mut points = vec![vec![0.0; bounds.len()]; count];
    for (d, &(lo, hi)) in bounds.iter().enumerate() {
        let mut strata: Vec<usize> = (0..count).collect();
        strata.shuffle(rng);
        for (p, s) in points.iter_mut().zip(strata) {
            let u = (s as f64 + rng.gen::<f64>()) / count as f64;
            p[d] = lo + u * (hi - lo);
        }
    }
    points
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn one_point_per_stratum() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let pts = latin_hypercube(16, &[(-3.0, 3.0), (0.0, 1.0)], &mut rng);
        for (d, (lo, hi)) in [(-3.0, 3.0), (0.0, 1.0)].into_iter().enumerate() {
            let mut seen = vec![false; 16];
            for p in &pts {
                let s = (((p[d] - lo) / (hi - lo)) * 16.0).floor() as usize;
                assert!(!seen[s]);
                seen[s] = true;
            }
        }
    }

    #[test]
    fn seeded_sampling_is_reproducible() {
        let a = latin_hypercube(5, &[(0.0, 1.0); 3], &mut ChaCha8Rng::seed_from_u64(1));
        let b = latin_hypercube(5, &[(0.0, 1.0); 3], &mut ChaCha8Rng::seed_from_u64(1));
        assert_eq!(a, b);
    }
}
