#pragma once

// Hash-consed multi-terminal BDDs.  Decision variables are track indices
// (smaller index nearer the root); terminals carry an int payload whose
// meaning (state id, state-set id, block id) is up to the caller.

#include <cstdint>
#include <functional>
#include <limits>
#include <unordered_map>
#include <vector>

namespace trapmark {

class Mtbdd {
public:
    using Ref = std::int32_t;
    static constexpr int kLeafVar = std::numeric_limits<int>::max();

    Ref leaf(int value);
    Ref node(int var, Ref lo, Ref hi);

    bool is_leaf(Ref r) const { return nodes_[r].var == kLeafVar; }
    int var(Ref r) const { return nodes_[r].var; }
    Ref lo(Ref r) const { return nodes_[r].lo; }
    Ref hi(Ref r) const { return nodes_[r].hi; }
    int value(Ref r) const { return nodes_[r].lo; }

    /// The function that is `on` inside cube (value, mask) and `off` elsewhere.
    Ref cube(std::uint64_t value, std::uint64_t mask, Ref on, Ref off);

    /// Pointwise combination of two diagrams; `op` maps leaf payloads.
    /// The memo is caller-owned so it may span several calls with one op.
    using Memo = std::unordered_map<std::uint64_t, Ref>;
    Ref apply(Ref a, Ref b, const std::function<int(int, int)>& op, Memo& memo);
    /// Leaf relabelling.
    Ref map(Ref a, const std::function<int(int)>& f, std::unordered_map<Ref, Ref>& memo);
    /// Fixes variable `v` to `bit`.
    Ref restrict(Ref a, int v, bool bit, std::unordered_map<Ref, Ref>& memo);

    /// Distinct leaf payloads in low-branch-first order.
    std::vector<int> leaves(Ref a) const;
    /// Number of root-to-leaf paths reaching a leaf accepted by `keep`.
    std::uint64_t count_paths(Ref a, const std::function<bool(int)>& keep) const;
    /// Visits every path as a cube, low branch first.
    void for_each_path(Ref a, const std::function<void(std::uint64_t value, std::uint64_t mask, int leaf)>& f) const;

    std::size_t size() const { return nodes_.size(); }

private:
    struct Node {
        int var;
        Ref lo;
        Ref hi;
    };
    struct Key {
        int var;
        Ref lo;
        Ref hi;
        bool operator==(const Key&) const = default;
    };
    struct KeyHash {
        std::size_t operator()(const Key& k) const {
            std::uint64_t h = static_cast<std::uint32_t>(k.var);
            h = h * 0x9E3779B97F4A7C15ull ^ static_cast<std::uint32_t>(k.lo);
            h = h * 0x9E3779B97F4A7C15ull ^ static_cast<std::uint32_t>(k.hi);
            return static_cast<std::size_t>(h ^ (h >> 29));
        }
    };

    std::vector<Node> nodes_;
    std::unordered_map<Key, Ref, KeyHash> unique_;
    std::unordered_map<int, Ref> leaves_;
};

}  // namespace trapmark
