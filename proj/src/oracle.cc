#include "trapmark/oracle.hh"

#include <algorithm>
#include <iterator>

namespace trapmark {

InvariantOracleResult check_invariant_oracle(const SystemModel& model, const InvariantBundle& bundle, int n,
                                             const Caps& caps) {
    InvariantOracleResult r;
    r.n = n;
    const MarkedPetriNet net = instantiate_net(model, n, caps);
    r.places = net.num_places();
    const auto traps = enumerate_min_imts(net, caps);
    r.min_imts = traps.size();

    const auto ours = invariant_valuations(bundle, n);  // sorted ascending
    r.invariant_size = ours.size();
    std::vector<std::uint64_t> theirs;
    for (std::uint64_t m = 0; m < (std::uint64_t{1} << r.places); ++m)
        if (marks_all(traps, m)) theirs.push_back(m);
    std::set_difference(ours.begin(), ours.end(), theirs.begin(), theirs.end(), std::back_inserter(r.automaton_only));
    std::set_difference(theirs.begin(), theirs.end(), ours.begin(), ours.end(), std::back_inserter(r.net_only));
    return r;
}

}  // namespace trapmark
