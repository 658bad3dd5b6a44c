#pragma once

// Fixed-size cross-check of the automaton-side trap invariant against the
// markings that mark every minimal initially marked trap of the net.

#include <cstdint>
#include <vector>

#include "trapmark/petri.hh"
#include "trapmark/trapinv.hh"

namespace trapmark {

struct InvariantOracleResult {
    int n = 0;
    int places = 0;
    std::size_t min_imts = 0;
    std::size_t invariant_size = 0;          // valuations in the automaton-side invariant
    std::vector<std::uint64_t> automaton_only;
    std::vector<std::uint64_t> net_only;

    bool match() const { return automaton_only.empty() && net_only.empty(); }
};

/// Valuations use bit i*P+k for state predicate k at index i, which is also
/// the place numbering of instantiate_net.
InvariantOracleResult check_invariant_oracle(const SystemModel& model, const InvariantBundle& bundle, int n,
                                             const Caps& caps = {});

}  // namespace trapmark
