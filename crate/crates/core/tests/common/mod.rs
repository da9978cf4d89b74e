#![allow(dead_code)]

use ergomix::superop::{random_stochastic_channel, SuperOperator};
use ergomix::AlgebraShape;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn qubit() -> AlgebraShape {
    AlgebraShape::single(2, 1.0).unwrap()
}

pub fn qubit_normalized() -> AlgebraShape {
    AlgebraShape::normalized(2).unwrap()
}

pub fn qutrit() -> AlgebraShape {
    AlgebraShape::single(3, 1.0).unwrap()
}

pub fn mixed_shape() -> AlgebraShape {
    AlgebraShape::new([(2, 1.0), (1, 1.0)]).unwrap()
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_channel(shape: &AlgebraShape, seed: u64) -> SuperOperator {
    let mut r = rng(seed);
    random_stochastic_channel(shape, 3, &mut r).unwrap()
}
