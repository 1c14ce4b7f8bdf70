// Copyright 2026 The nmrqc Authors
// SPDX-License-Identifier: Apache-2.0

mod common;

use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn unitaries_are_unitary(seed in any::<u64>(), n in 1usize..=3) {
        common::unitarity(seed, n)?;
    }

    #[test]
    fn evolution_preserves_trace_and_hermiticity(seed in any::<u64>(), n in 1usize..=3) {
        common::evolution_preserves_state(seed, n)?;
    }

    #[test]
    fn pauli_expansion_roundtrips(seed in any::<u64>(), n in 1usize..=3) {
        common::pauli_roundtrip(seed, n)?;
    }

    #[test]
    fn partial_trace_is_consistent(seed in any::<u64>(), n in 1usize..=2) {
        common::partial_trace_consistency(seed, n)?;
    }

    #[test]
    fn fidelity_is_bounded(seed in any::<u64>(), n in 1usize..=3) {
        common::fidelity_bounds(seed, n)?;
    }
}
