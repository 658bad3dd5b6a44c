#include "trapmark/bdd.hh"

#include <algorithm>
#include <set>

namespace trapmark {

Mtbdd::Ref Mtbdd::leaf(int value) {
    auto it = leaves_.find(value);
    if (it != leaves_.end()) return it->second;
    Ref r = static_cast<Ref>(nodes_.size());
    nodes_.push_back({kLeafVar, value, value});
    leaves_.emplace(value, r);
    return r;
}

Mtbdd::Ref Mtbdd::node(int v, Ref lo, Ref hi) {
    if (lo == hi) return lo;
    Key k{v, lo, hi};
    auto it = unique_.find(k);
    if (it != unique_.end()) return it->second;
    Ref r = static_cast<Ref>(nodes_.size());
    nodes_.push_back({v, lo, hi});
    unique_.emplace(k, r);
    return r;
}

Mtbdd::Ref Mtbdd::cube(std::uint64_t value, std::uint64_t mask, Ref on, Ref off) {
    if (on == off) return on;
    Ref r = on;
    for (int v = 63; v >= 0; --v) {
        if (!((mask >> v) & 1u)) continue;
        r = ((value >> v) & 1u) ? node(v, off, r) : node(v, r, off);
    }
    return r;
}

Mtbdd::Ref Mtbdd::apply(Ref a, Ref b, const std::function<int(int, int)>& op, Memo& memo) {
    const std::uint64_t key = (static_cast<std::uint64_t>(static_cast<std::uint32_t>(a)) << 32) |
                              static_cast<std::uint32_t>(b);
    if (auto it = memo.find(key); it != memo.end()) return it->second;
    Ref r;
    if (is_leaf(a) && is_leaf(b)) {
        r = leaf(op(value(a), value(b)));
    } else {
        const int va = var(a);
        const int vb = var(b);
        const int v = std::min(va, vb);
        const Ref a0 = va == v ? lo(a) : a;
        const Ref a1 = va == v ? hi(a) : a;
        const Ref b0 = vb == v ? lo(b) : b;
        const Ref b1 = vb == v ? hi(b) : b;
        const Ref l = apply(a0, b0, op, memo);
        const Ref h = apply(a1, b1, op, memo);
        r = node(v, l, h);
    }
    memo.emplace(key, r);
    return r;
}

Mtbdd::Ref Mtbdd::map(Ref a, const std::function<int(int)>& f, std::unordered_map<Ref, Ref>& memo) {
    if (auto it = memo.find(a); it != memo.end()) return it->second;
    Ref r;
    if (is_leaf(a)) {
        r = leaf(f(value(a)));
    } else {
        const int v = var(a);
        const Ref ra = lo(a);
        const Ref rb = hi(a);
        const Ref l = map(ra, f, memo);
        const Ref h = map(rb, f, memo);
        r = node(v, l, h);
    }
    memo.emplace(a, r);
    return r;
}

Mtbdd::Ref Mtbdd::restrict(Ref a, int v, bool bit, std::unordered_map<Ref, Ref>& memo) {
    if (is_leaf(a) || var(a) > v) return a;
    if (auto it = memo.find(a); it != memo.end()) return it->second;
    Ref r;
    if (var(a) == v) {
        r = bit ? hi(a) : lo(a);
    } else {
        const int va = var(a);
        const Ref ra = lo(a);
        const Ref rb = hi(a);
        const Ref l = restrict(ra, v, bit, memo);
        const Ref h = restrict(rb, v, bit, memo);
        r = node(va, l, h);
    }
    memo.emplace(a, r);
    return r;
}

std::vector<int> Mtbdd::leaves(Ref a) const {
    std::vector<int> out;
    std::set<int> seen_leaf;
    std::vector<char> seen(nodes_.size(), 0);
    std::function<void(Ref)> walk = [&](Ref r) {
        if (seen[r]) return;
        seen[r] = 1;
        if (is_leaf(r)) {
            if (seen_leaf.insert(value(r)).second) out.push_back(value(r));
            return;
        }
        walk(lo(r));
        walk(hi(r));
    };
    walk(a);
    return out;
}

std::uint64_t Mtbdd::count_paths(Ref a, const std::function<bool(int)>& keep) const {
    std::unordered_map<Ref, std::uint64_t> memo;
    std::function<std::uint64_t(Ref)> go = [&](Ref r) -> std::uint64_t {
        if (is_leaf(r)) return keep(value(r)) ? 1 : 0;
        if (auto it = memo.find(r); it != memo.end()) return it->second;
        std::uint64_t c = go(lo(r)) + go(hi(r));
        memo.emplace(r, c);
        return c;
    };
    return go(a);
}

void Mtbdd::for_each_path(Ref a,
                          const std::function<void(std::uint64_t, std::uint64_t, int)>& f) const {
    std::function<void(Ref, std::uint64_t, std::uint64_t)> go = [&](Ref r, std::uint64_t val, std::uint64_t mask) {
        if (is_leaf(r)) {
            f(val, mask, value(r));
            return;
        }
        const std::uint64_t bit = std::uint64_t{1} << var(r);
        go(lo(r), val, mask | bit);
        go(hi(r), val | bit, mask | bit);
    };
    go(a, 0, 0);
}

}  // namespace trapmark
