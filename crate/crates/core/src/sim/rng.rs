use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::runtime::PlayerId;

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(GOLDEN_GAMMA);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Match seed of pair `index` in an experiment started from `base_seed`.
pub fn derive_pair_seed(base_seed: u64, index: u64) -> u64 {
    splitmix64(base_seed ^ splitmix64(index))
}

// FNV-1a; keeps a player's stream stable when other players are added.
fn stream_id(player: &PlayerId) -> u64 {
    player.as_str().bytes().fold(0xCBF2_9CE4_8422_2325, |h, b| {
        (h ^ u64::from(b)).wrapping_mul(0x0000_0100_0000_01B3)
    })
}

pub(crate) fn player_stream(match_seed: u64, player: &PlayerId) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(match_seed);
    rng.set_stream(stream_id(player));
    rng
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn streams_differ_per_player_and_repeat_per_seed() {
        let a: Vec<u32> = player_stream(7, &"ai".into()).random_iter().take(4).collect();
        let a2: Vec<u32> = player_stream(7, &"ai".into()).random_iter().take(4).collect();
        let h: Vec<u32> = player_stream(7, &"human".into()).random_iter().take(4).collect();
        assert_eq!(a, a2);
        assert_ne!(a, h);
    }

    #[test]
    fn pair_seeds_are_distinct() {
        let seeds: std::collections::HashSet<u64> = (0..1000).map(|i| derive_pair_seed(42, i)).collect();
        assert_eq!(seeds.len(), 1000);
    }
}
