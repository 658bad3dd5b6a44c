#include "trapmark/automata.hh"

#include <algorithm>
#include <unordered_set>
#include <deque>
#include <map>
#include <set>
#include <sstream>
#include <unordered_map>

namespace trapmark {

// ---------------------------------------------------------------------------
// Registry, cubes, words

std::optional<int> TrackRegistry::index_of(const std::string& name) const {
    for (std::size_t i = 0; i < tracks.size(); ++i)
        if (tracks[i].name == name) return static_cast<int>(i);
    return std::nullopt;
}

int TrackRegistry::add(std::string name, TrackKind kind) {
    if (index_of(name)) throw AutomatonError("duplicate track '" + name + "'");
    if (tracks.size() >= 64) throw AutomatonError("more than 64 tracks");
    tracks.push_back({std::move(name), kind});
    return width() - 1;
}

std::uint64_t TrackRegistry::mask_of(TrackKind kind) const {
    std::uint64_t m = 0;
    for (std::size_t i = 0; i < tracks.size(); ++i)
        if (tracks[i].kind == kind) m |= std::uint64_t{1} << i;
    return m;
}

std::uint64_t TrackRegistry::full_mask() const {
    return width() >= 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << width()) - 1;
}

std::string cube_to_string(const Cube& c, int width) {
    std::string s;
    for (int i = 0; i < width; ++i) {
        const std::uint64_t bit = std::uint64_t{1} << i;
        s += (c.mask & bit) ? ((c.value & bit) ? '1' : '0') : '-';
    }
    return s;
}

bool letter_less(std::uint64_t a, std::uint64_t b) {
    const std::uint64_t diff = a ^ b;
    if (!diff) return false;
    const std::uint64_t low = diff & (~diff + 1);
    return (a & low) == 0;
}

bool word_less(const Word& a, const Word& b) {
    if (a.size() != b.size()) return a.size() < b.size();
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (letter_less(a[i], b[i])) return true;
        if (letter_less(b[i], a[i])) return false;
    }
    return false;
}

void TrackNfa::check() const {
    if (static_cast<int>(final.size()) != num_states) throw AutomatonError("final vector size mismatch");
    for (int q : initial)
        if (q < 0 || q >= num_states) throw AutomatonError("initial state out of range");
    const std::uint64_t full = registry.full_mask();
    for (const auto& t : transitions) {
        if (t.from < 0 || t.from >= num_states || t.to < 0 || t.to >= num_states)
            throw AutomatonError("transition endpoint out of range");
        if ((t.cube.mask & ~full) || (t.cube.value & ~t.cube.mask)) throw AutomatonError("malformed cube");
    }
}

Word encode_structure(const Structure& s, const TrackRegistry& reg) {
    if (s.n < 1 || s.n > 64) throw AutomatonError("structure size out of range");
    Word w(static_cast<std::size_t>(s.n), 0);
    for (int t = 0; t < reg.width(); ++t) {
        const auto& tr = reg.tracks[t];
        std::uint64_t bits = 0;
        if (tr.kind == TrackKind::FirstOrder) {
            int pos;
            if (auto it = s.vars.find(tr.name); it != s.vars.end()) pos = it->second;
            else if (auto ic = s.consts.find(tr.name); ic != s.consts.end()) pos = ic->second;
            else throw AutomatonError("no interpretation for variable '" + tr.name + "'");
            bits = std::uint64_t{1} << pos;
        } else if (tr.kind == TrackKind::Predicate) {
            auto it = s.preds.find(tr.name);
            if (it == s.preds.end()) throw AutomatonError("no interpretation for predicate '" + tr.name + "'");
            bits = it->second;
        } else {
            auto it = s.sets.find(tr.name);
            if (it == s.sets.end()) throw AutomatonError("no interpretation for set '" + tr.name + "'");
            bits = it->second;
        }
        for (int i = 0; i < s.n; ++i)
            if ((bits >> i) & 1u) w[i] |= std::uint64_t{1} << t;
    }
    return w;
}

Structure decode_word(const Word& w, const TrackRegistry& reg) {
    if (w.empty() || w.size() > 64) throw AutomatonError("word length out of range");
    Structure s;
    s.n = static_cast<int>(w.size());
    for (int t = 0; t < reg.width(); ++t) {
        std::uint64_t bits = 0;
        for (std::size_t i = 0; i < w.size(); ++i)
            if ((w[i] >> t) & 1u) bits |= std::uint64_t{1} << i;
        const auto& tr = reg.tracks[t];
        if (tr.kind == TrackKind::FirstOrder) {
            if (bits == 0 || (bits & (bits - 1))) throw AutomatonError("track '" + tr.name + "' is not a singleton");
            int pos = 0;
            while (!((bits >> pos) & 1u)) ++pos;
            s.vars[tr.name] = pos;
        } else if (tr.kind == TrackKind::Predicate) {
            s.preds[tr.name] = bits;
        } else {
            s.sets[tr.name] = bits;
        }
    }
    return s;
}

// ---------------------------------------------------------------------------
// Symbolic DFAs

namespace {

// Interned sorted state sets.
class SetTable {
public:
    int intern(std::vector<int> s) {
        std::sort(s.begin(), s.end());
        s.erase(std::unique(s.begin(), s.end()), s.end());
        auto it = ids_.find(s);
        if (it != ids_.end()) return it->second;
        int id = static_cast<int>(sets_.size());
        sets_.push_back(s);
        ids_.emplace(std::move(s), id);
        return id;
    }
    const std::vector<int>& get(int id) const { return sets_[id]; }
    int size() const { return static_cast<int>(sets_.size()); }
    int unite(int a, int b) {
        if (a == b) return a;
        if (a > b) std::swap(a, b);
        const std::uint64_t key = (static_cast<std::uint64_t>(a) << 32) | static_cast<std::uint32_t>(b);
        if (auto it = unions_.find(key); it != unions_.end()) return it->second;
        std::vector<int> u;
        std::set_union(sets_[a].begin(), sets_[a].end(), sets_[b].begin(), sets_[b].end(), std::back_inserter(u));
        int r = intern(std::move(u));
        unions_.emplace(key, r);
        return r;
    }

private:
    std::vector<std::vector<int>> sets_;
    std::map<std::vector<int>, int> ids_;
    std::unordered_map<std::uint64_t, int> unions_;
};

Mtbdd::Ref eval_root(const Mtbdd& m, Mtbdd::Ref r, std::uint64_t letter) {
    while (!m.is_leaf(r)) r = ((letter >> m.var(r)) & 1u) ? m.hi(r) : m.lo(r);
    return r;
}

// Subset construction over diagrams with set-valued leaves.
class SubsetBuilder {
public:
    SubsetBuilder(std::shared_ptr<Mtbdd> mgr, int width) : mgr_(std::move(mgr)), width_(width) {}

    SetTable sets;

    Mtbdd::Ref unite(Mtbdd::Ref a, Mtbdd::Ref b) {
        return mgr_->apply(a, b, [this](int x, int y) { return sets.unite(x, y); }, union_memo_);
    }

    SymDfa run(const std::vector<Mtbdd::Ref>& roots, const std::vector<char>& finals, const std::vector<int>& init) {
        SymDfa out;
        out.mgr = mgr_;
        out.width = width_;
        std::unordered_map<int, int> macro_of;
        std::vector<int> macros;
        auto id_of = [&](int set) {
            auto it = macro_of.find(set);
            if (it != macro_of.end()) return it->second;
            int id = static_cast<int>(macros.size());
            macros.push_back(set);
            macro_of.emplace(set, id);
            return id;
        };
        id_of(sets.intern(init));
        std::unordered_map<Mtbdd::Ref, Mtbdd::Ref> remap_memo;
        const Mtbdd::Ref empty_leaf = mgr_->leaf(sets.intern({}));
        for (std::size_t i = 0; i < macros.size(); ++i) {
            const std::vector<int> members = sets.get(macros[i]);
            Mtbdd::Ref r = empty_leaf;
            bool fin = false;
            for (int s : members) {
                r = unite(r, roots[s]);
                fin = fin || finals[s];
            }
            for (int leaf : mgr_->leaves(r)) id_of(leaf);
            Mtbdd::Ref mapped = mgr_->map(r, [&](int set) { return macro_of.at(set); }, remap_memo);
            out.delta.push_back(mapped);
            out.final.push_back(fin ? 1 : 0);
        }
        out.init = 0;
        return out;
    }

private:
    std::shared_ptr<Mtbdd> mgr_;
    int width_;
    Mtbdd::Memo union_memo_;
};

std::vector<char> reachable_states(const SymDfa& a) {
    std::vector<char> seen(a.delta.size(), 0);
    std::vector<int> stack{a.init};
    seen[a.init] = 1;
    while (!stack.empty()) {
        int s = stack.back();
        stack.pop_back();
        for (int t : a.mgr->leaves(a.delta[s]))
            if (!seen[t]) {
                seen[t] = 1;
                stack.push_back(t);
            }
    }
    return seen;
}

// States from which a final state is reachable by a nonempty word, or that
// are final themselves.
std::vector<char> live_states(const SymDfa& a) {
    const int n = a.size();
    std::vector<std::vector<int>> pred(n);
    for (int s = 0; s < n; ++s)
        for (int t : a.mgr->leaves(a.delta[s])) pred[t].push_back(s);
    std::vector<char> live(n, 0);
    std::vector<int> stack;
    for (int s = 0; s < n; ++s)
        if (a.final[s]) {
            live[s] = 1;
            stack.push_back(s);
        }
    while (!stack.empty()) {
        int t = stack.back();
        stack.pop_back();
        for (int s : pred[t])
            if (!live[s]) {
                live[s] = 1;
                stack.push_back(s);
            }
    }
    return live;
}

}  // namespace

namespace sym {

SymDfa universal(const std::shared_ptr<Mtbdd>& mgr, int width) {
    SymDfa d;
    d.mgr = mgr;
    d.width = width;
    d.delta = {mgr->leaf(1), mgr->leaf(1)};
    d.final = {0, 1};
    return d;
}

SymDfa empty(const std::shared_ptr<Mtbdd>& mgr, int width) {
    SymDfa d;
    d.mgr = mgr;
    d.width = width;
    d.delta = {mgr->leaf(0)};
    d.final = {0};
    return d;
}

SymDfa explicit_dfa(const std::shared_ptr<Mtbdd>& mgr, int width, const std::vector<int>& tracks, int states,
                    const std::vector<int>& finals, const std::function<int(int, std::uint64_t)>& next) {
    std::vector<std::pair<int, int>> order;  // (track, local bit)
    for (std::size_t j = 0; j < tracks.size(); ++j) order.emplace_back(tracks[j], static_cast<int>(j));
    std::sort(order.begin(), order.end());
    SymDfa d;
    d.mgr = mgr;
    d.width = width;
    d.final.assign(states, 0);
    for (int f : finals) d.final[f] = 1;
    for (int s = 0; s < states; ++s) {
        std::function<Mtbdd::Ref(std::size_t, std::uint64_t)> build = [&](std::size_t i, std::uint64_t bits) {
            if (i == order.size()) return mgr->leaf(next(s, bits));
            Mtbdd::Ref lo = build(i + 1, bits);
            Mtbdd::Ref hi = build(i + 1, bits | (std::uint64_t{1} << order[i].second));
            return mgr->node(order[i].first, lo, hi);
        };
        d.delta.push_back(build(0, 0));
    }
    return d;
}

SymDfa product(const SymDfa& a, const SymDfa& b, BoolOp op) {
    if (a.mgr != b.mgr || a.width != b.width) throw AutomatonError("product of automata over different alphabets");
    Mtbdd& m = *a.mgr;
    std::unordered_map<std::uint64_t, int> pair_id;
    std::vector<std::pair<int, int>> pairs;
    auto id_of = [&](int x, int y) {
        const std::uint64_t key = (static_cast<std::uint64_t>(x) << 32) | static_cast<std::uint32_t>(y);
        auto it = pair_id.find(key);
        if (it != pair_id.end()) return it->second;
        int id = static_cast<int>(pairs.size());
        pairs.emplace_back(x, y);
        pair_id.emplace(key, id);
        return id;
    };
    id_of(a.init, b.init);
    Mtbdd::Memo memo;
    SymDfa out;
    out.mgr = a.mgr;
    out.width = a.width;
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        auto [x, y] = pairs[i];
        out.delta.push_back(m.apply(a.delta[x], b.delta[y], id_of, memo));
        const bool fa = a.final[x];
        const bool fb = b.final[y];
        bool f = false;
        switch (op) {
            case BoolOp::And:
                f = fa && fb;
                break;
            case BoolOp::Or:
                f = fa || fb;
                break;
            case BoolOp::Implies:
                f = !fa || fb;
                break;
            case BoolOp::Iff:
                f = fa == fb;
                break;
        }
        out.final.push_back(f ? 1 : 0);
    }
    out.init = 0;
    return out;
}

SymDfa complement(const SymDfa& a) {
    SymDfa out = a;
    for (auto& f : out.final) f = !f;
    return out;
}

SymDfa project(const SymDfa& a, int v) {
    Mtbdd& m = *a.mgr;
    SubsetBuilder sb(a.mgr, a.width);
    std::unordered_map<Mtbdd::Ref, Mtbdd::Ref> setify, r0, r1;
    std::vector<int> singleton_set(a.size());
    for (int s = 0; s < a.size(); ++s) singleton_set[s] = sb.sets.intern({s});
    std::vector<Mtbdd::Ref> roots;
    for (int s = 0; s < a.size(); ++s) {
        Mtbdd::Ref r = m.map(a.delta[s], [&](int t) { return singleton_set[t]; }, setify);
        Mtbdd::Ref lo = m.restrict(r, v, false, r0);
        Mtbdd::Ref hi = m.restrict(r, v, true, r1);
        roots.push_back(sb.unite(lo, hi));
    }
    return sb.run(roots, a.final, {a.init});
}

SymDfa minimize(const SymDfa& a) {
    Mtbdd& m = *a.mgr;
    const auto reach = reachable_states(a);
    std::vector<int> states;
    for (int s = 0; s < a.size(); ++s)
        if (reach[s]) states.push_back(s);

    std::vector<int> block(a.size(), -1);
    for (int s : states) block[s] = a.final[s] ? 1 : 0;
    std::size_t count = 0;
    std::vector<Mtbdd::Ref> sig(a.size(), 0);
    for (;;) {
        std::unordered_map<Mtbdd::Ref, Mtbdd::Ref> memo;
        std::map<std::pair<int, Mtbdd::Ref>, int> ids;
        std::vector<int> next(a.size(), -1);
        for (int s : states) {
            sig[s] = m.map(a.delta[s], [&](int t) { return block[t]; }, memo);
            auto key = std::make_pair(block[s], sig[s]);
            auto it = ids.find(key);
            if (it == ids.end()) it = ids.emplace(key, static_cast<int>(ids.size())).first;
            next[s] = it->second;
        }
        const std::size_t new_count = ids.size();
        if (new_count == count) break;
        count = new_count;
        block = std::move(next);
    }
    // signatures now refer to the stable partition; renumber canonically
    std::vector<int> rep(count, -1);
    for (int s : states)
        if (rep[block[s]] < 0) rep[block[s]] = s;
    std::vector<int> canon(count, -1);
    std::vector<int> order;
    canon[block[a.init]] = 0;
    order.push_back(block[a.init]);
    for (std::size_t i = 0; i < order.size(); ++i)
        for (int b : m.leaves(sig[rep[order[i]]]))
            if (canon[b] < 0) {
                canon[b] = static_cast<int>(order.size());
                order.push_back(b);
            }
    SymDfa out;
    out.mgr = a.mgr;
    out.width = a.width;
    std::unordered_map<Mtbdd::Ref, Mtbdd::Ref> memo;
    for (int b : order) {
        out.delta.push_back(m.map(sig[rep[b]], [&](int x) { return canon[x]; }, memo));
        out.final.push_back(a.final[rep[b]]);
    }
    out.init = 0;
    return out;
}

bool is_empty(const SymDfa& a) {
    std::vector<char> seen(a.delta.size(), 0);
    std::vector<int> stack;
    for (int t : a.mgr->leaves(a.delta[a.init]))
        if (!seen[t]) {
            seen[t] = 1;
            stack.push_back(t);
        }
    while (!stack.empty()) {
        int s = stack.back();
        stack.pop_back();
        if (a.final[s]) return false;
        for (int t : a.mgr->leaves(a.delta[s]))
            if (!seen[t]) {
                seen[t] = 1;
                stack.push_back(t);
            }
    }
    return true;
}

bool accepts(const SymDfa& a, const Word& w) {
    if (w.empty()) return false;
    int s = a.init;
    for (std::uint64_t letter : w) s = a.mgr->value(eval_root(*a.mgr, a.delta[s], letter));
    return a.final[s];
}

SymDfa reindex(const SymDfa& a, const std::vector<int>& new_index, int new_width) {
    Mtbdd& m = *a.mgr;
    std::unordered_map<Mtbdd::Ref, Mtbdd::Ref> memo;
    std::function<Mtbdd::Ref(Mtbdd::Ref)> go = [&](Mtbdd::Ref r) -> Mtbdd::Ref {
        if (m.is_leaf(r)) return r;
        if (auto it = memo.find(r); it != memo.end()) return it->second;
        const int v = m.var(r);
        const Mtbdd::Ref lo = m.lo(r);
        const Mtbdd::Ref hi = m.hi(r);
        if (new_index.at(v) < 0) throw AutomatonError("reindex drops a track the automaton depends on");
        Mtbdd::Ref l = go(lo);
        Mtbdd::Ref h = go(hi);
        Mtbdd::Ref out = m.node(new_index[v], l, h);
        memo.emplace(r, out);
        return out;
    };
    SymDfa out = a;
    out.width = new_width;
    for (auto& r : out.delta) r = go(r);
    return out;
}

std::uint64_t count_transitions(const SymDfa& a) {
    const auto live = live_states(a);
    std::uint64_t total = 0;
    for (int s = 0; s < a.size(); ++s)
        total += a.mgr->count_paths(a.delta[s], [&](int t) { return live[t] != 0; });
    return total;
}

SymDfa from_nfa(const TrackNfa& a, const std::shared_ptr<Mtbdd>& mgr) {
    a.check();
    Mtbdd& m = *mgr;
    SubsetBuilder sb(mgr, a.registry.width());
    const Mtbdd::Ref none = m.leaf(sb.sets.intern({}));
    std::vector<Mtbdd::Ref> roots(a.num_states, none);
    for (const auto& t : a.transitions) {
        Mtbdd::Ref c = m.cube(t.cube.value, t.cube.mask, m.leaf(sb.sets.intern({t.to})), none);
        roots[t.from] = sb.unite(roots[t.from], c);
    }
    std::vector<char> finals(a.final.begin(), a.final.end());
    return sb.run(roots, finals, a.initial);
}

TrackNfa to_nfa(const SymDfa& a, const TrackRegistry& reg, std::uint64_t max_transitions) {
    if (reg.width() != a.width) throw AutomatonError("registry width mismatch");
    const auto reach = reachable_states(a);
    const auto live = live_states(a);
    std::vector<int> id(a.size(), -1);
    TrackNfa out;
    out.registry = reg;
    id[a.init] = 0;
    int next = 1;
    for (int s = 0; s < a.size(); ++s)
        if (s != a.init && reach[s] && live[s]) id[s] = next++;
    out.num_states = next;
    out.initial = {0};
    out.final.assign(next, false);
    for (int s = 0; s < a.size(); ++s) {
        if (id[s] < 0) continue;
        out.final[id[s]] = a.final[s] != 0;
        if (a.mgr->count_paths(a.delta[s], [&](int t) { return id[t] >= 0; }) + out.transitions.size() >
            max_transitions)
            throw AutomatonError("automaton too large to list its transitions");
        a.mgr->for_each_path(a.delta[s], [&](std::uint64_t value, std::uint64_t mask, int t) {
            if (id[t] >= 0) out.transitions.push_back({id[s], {value, mask}, id[t]});
        });
    }
    return out;
}

SymNfa as_nfa(const SymDfa& a) {
    SymNfa out;
    out.mgr = a.mgr;
    out.width = a.width;
    out.delta = a.delta;
    out.final = a.final;
    out.initial = {a.init};
    for (int i = 0; i < a.size(); ++i) out.sets.push_back({i});
    return out;
}

namespace {

// Rebuilds every root with `step`, interning leaf sets in a fresh table.
SymNfa rebuild(const SymNfa& a, SetTable& table, const std::vector<Mtbdd::Ref>& roots) {
    SymNfa out;
    out.mgr = a.mgr;
    out.width = a.width;
    out.delta = roots;
    out.final = a.final;
    out.initial = a.initial;
    for (int i = 0; i < table.size(); ++i) out.sets.push_back(table.get(i));
    return out;
}

std::vector<Mtbdd::Ref> interned_roots(const SymNfa& a, SetTable& table) {
    std::unordered_map<Mtbdd::Ref, Mtbdd::Ref> memo;
    std::vector<Mtbdd::Ref> roots;
    for (Mtbdd::Ref r : a.delta)
        roots.push_back(a.mgr->map(r, [&](int k) { return table.intern(a.sets[k]); }, memo));
    return roots;
}

}  // namespace

SymNfa saturate(const SymNfa& a, std::uint64_t predicate_tracks) {
    Mtbdd& m = *a.mgr;
    SetTable table;
    const auto roots = interned_roots(a, table);
    Mtbdd::Memo union_memo;
    auto unite = [&](Mtbdd::Ref x, Mtbdd::Ref y) {
        return m.apply(x, y, [&](int p, int q) { return table.unite(p, q); }, union_memo);
    };
    // A letter with a predicate bit set may also use the transitions with it clear.
    std::unordered_map<Mtbdd::Ref, Mtbdd::Ref> memo;
    std::function<Mtbdd::Ref(Mtbdd::Ref)> go = [&](Mtbdd::Ref r) -> Mtbdd::Ref {
        if (m.is_leaf(r)) return r;
        if (auto it = memo.find(r); it != memo.end()) return it->second;
        const int v = m.var(r);
        const Mtbdd::Ref l = go(m.lo(r));
        Mtbdd::Ref h = go(m.hi(r));
        if ((predicate_tracks >> v) & 1u) h = unite(l, h);
        const Mtbdd::Ref out = m.node(v, l, h);
        memo.emplace(r, out);
        return out;
    };
    std::vector<Mtbdd::Ref> sat;
    for (Mtbdd::Ref r : roots) sat.push_back(go(r));
    return rebuild(a, table, sat);
}

SymNfa flip_predicate_tracks(const SymNfa& a, std::uint64_t predicate_tracks) {
    Mtbdd& m = *a.mgr;
    std::unordered_map<Mtbdd::Ref, Mtbdd::Ref> memo;
    std::function<Mtbdd::Ref(Mtbdd::Ref)> go = [&](Mtbdd::Ref r) -> Mtbdd::Ref {
        if (m.is_leaf(r)) return r;
        if (auto it = memo.find(r); it != memo.end()) return it->second;
        const int v = m.var(r);
        const Mtbdd::Ref l = go(m.lo(r));
        const Mtbdd::Ref h = go(m.hi(r));
        const Mtbdd::Ref out = ((predicate_tracks >> v) & 1u) ? m.node(v, h, l) : m.node(v, l, h);
        memo.emplace(r, out);
        return out;
    };
    SymNfa out = a;
    for (auto& r : out.delta) r = go(r);
    return out;
}

bool accepts(const SymNfa& a, const Word& w) {
    if (w.empty()) return false;
    std::set<int> cur(a.initial.begin(), a.initial.end());
    for (std::uint64_t letter : w) {
        std::set<int> next;
        for (int q : cur) {
            const auto& succ = a.sets[a.mgr->value(eval_root(*a.mgr, a.delta[q], letter))];
            next.insert(succ.begin(), succ.end());
        }
        cur = std::move(next);
        if (cur.empty()) return false;
    }
    for (int q : cur)
        if (a.final[q]) return true;
    return false;
}

SymDfa determinize(const SymNfa& a) {
    SubsetBuilder sb(a.mgr, a.width);
    const auto roots = interned_roots(a, sb.sets);
    return sb.run(roots, a.final, a.initial);
}

TrackNfa to_nfa(const SymNfa& a, const TrackRegistry& reg, std::uint64_t max_transitions) {
    if (reg.width() != a.width) throw AutomatonError("registry width mismatch");
    TrackNfa out;
    out.registry = reg;
    out.num_states = a.size();
    out.initial = a.initial;
    out.final.assign(a.final.begin(), a.final.end());
    for (int s = 0; s < a.size(); ++s) {
        a.mgr->for_each_path(a.delta[s], [&](std::uint64_t value, std::uint64_t mask, int k) {
            for (int t : a.sets[k]) {
                if (out.transitions.size() >= max_transitions)
                    throw AutomatonError("automaton too large to list its transitions");
                out.transitions.push_back({s, {value, mask}, t});
            }
        });
    }
    return out;
}

std::uint64_t count_transitions(const SymNfa& a) {
    std::uint64_t n = 0;
    for (Mtbdd::Ref r : a.delta)
        a.mgr->for_each_path(r, [&](std::uint64_t, std::uint64_t, int k) { n += a.sets[k].size(); });
    return n;
}

InclusionResult included(const SymDfa& a, const SymNfa& b) {
    if (a.width != b.width) throw AutomatonError("registry mismatch");
    const Mtbdd& ma = *a.mgr;
    Mtbdd& mb = *b.mgr;
    SubsetBuilder sb(b.mgr, b.width);
    const auto broot = interned_roots(b, sb.sets);
    const Mtbdd::Ref none = mb.leaf(sb.sets.intern({}));
    std::unordered_map<int, Mtbdd::Ref> macro_root;
    auto root_of = [&](int set) {
        if (auto it = macro_root.find(set); it != macro_root.end()) return it->second;
        Mtbdd::Ref r = none;
        for (int s : sb.sets.get(set)) r = sb.unite(r, broot[s]);
        macro_root.emplace(set, r);
        return r;
    };
    auto accepting_b = [&](int set) {
        for (int s : sb.sets.get(set))
            if (b.final[s]) return true;
        return false;
    };
    struct Node {
        int p;
        int set;
        int parent;
        std::uint64_t letter;
    };
    std::vector<Node> nodes;
    std::vector<std::vector<int>> antichain(a.size());
    auto subsumed = [&](int p, int set) {
        const auto& s = sb.sets.get(set);
        for (int other : antichain[p]) {
            const auto& o = sb.sets.get(other);
            if (std::includes(s.begin(), s.end(), o.begin(), o.end())) return true;
        }
        return false;
    };
    const int binit = sb.sets.intern(b.initial);
    nodes.push_back({a.init, binit, -1, 0});
    antichain[a.init].push_back(binit);

    InclusionResult res;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        ++res.steps;
        const Node cur = nodes[i];
        // Lo-first joint walk: the first visit of a leaf pair carries its
        // least letter.
        std::map<std::pair<int, int>, std::uint64_t> best;
        std::set<std::pair<Mtbdd::Ref, Mtbdd::Ref>> visited;
        std::function<void(Mtbdd::Ref, Mtbdd::Ref, std::uint64_t)> walk = [&](Mtbdd::Ref x, Mtbdd::Ref y,
                                                                             std::uint64_t letter) {
            if (!visited.insert({x, y}).second) return;
            const bool lx = ma.is_leaf(x), ly = mb.is_leaf(y);
            if (lx && ly) {
                best.emplace(std::make_pair(ma.value(x), mb.value(y)), letter);
                return;
            }
            const int v = std::min(lx ? INT32_MAX : ma.var(x), ly ? INT32_MAX : mb.var(y));
            const bool sx = !lx && ma.var(x) == v, sy = !ly && mb.var(y) == v;
            walk(sx ? ma.lo(x) : x, sy ? mb.lo(y) : y, letter);
            walk(sx ? ma.hi(x) : x, sy ? mb.hi(y) : y, letter | (std::uint64_t{1} << v));
        };
        walk(a.delta[cur.p], root_of(cur.set), 0);
        std::vector<std::tuple<std::uint64_t, int, int>> cands;
        for (const auto& [key, letter] : best) cands.emplace_back(letter, key.first, key.second);
        std::sort(cands.begin(), cands.end(), [](const auto& x, const auto& y) {
            if (std::get<0>(x) != std::get<0>(y)) return letter_less(std::get<0>(x), std::get<0>(y));
            return std::make_pair(std::get<1>(x), std::get<2>(x)) < std::make_pair(std::get<1>(y), std::get<2>(y));
        });
        for (const auto& [letter, p, set] : cands) {
            if (a.final[p] && !accepting_b(set)) {
                res.included = false;
                Word w{letter};
                for (int k = static_cast<int>(i); nodes[k].parent >= 0; k = nodes[k].parent)
                    w.push_back(nodes[k].letter);
                std::reverse(w.begin(), w.end());
                res.witness = std::move(w);
                return res;
            }
            if (subsumed(p, set)) continue;
            antichain[p].push_back(set);
            nodes.push_back({p, set, static_cast<int>(i), letter});
        }
    }
    return res;
}

// Successors of q over the letters u with u <= ~w on predicate tracks and
// u = w elsewhere.
static std::vector<int> dual_image(const SymDfa& b, int q, std::uint64_t w, std::uint64_t predicate_tracks) {
    const Mtbdd& mb = *b.mgr;
    std::vector<int> out;
    std::unordered_set<Mtbdd::Ref> seen;
    std::function<void(Mtbdd::Ref)> go = [&](Mtbdd::Ref r) {
        if (!seen.insert(r).second) return;
        if (mb.is_leaf(r)) {
            out.push_back(mb.value(r));
            return;
        }
        const int v = mb.var(r);
        const bool bit = (w >> v) & 1u;
        if ((predicate_tracks >> v) & 1u) {
            go(mb.lo(r));
            if (!bit) go(mb.hi(r));
        } else {
            go(bit ? mb.hi(r) : mb.lo(r));
        }
    };
    go(b.delta[q]);
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

bool accepts_dual(const SymDfa& b, const Word& w, std::uint64_t predicate_tracks) {
    if (w.empty()) return false;
    std::vector<int> cur{b.init};
    for (std::uint64_t letter : w) {
        std::set<int> next;
        for (int q : cur)
            for (int t : dual_image(b, q, letter, predicate_tracks)) next.insert(t);
        cur.assign(next.begin(), next.end());
    }
    for (int q : cur)
        if (b.final[q]) return true;
    return false;
}

InclusionResult included_in_dual(const SymDfa& a, const SymDfa& b, std::uint64_t predicate_tracks) {
    if (a.width != b.width) throw AutomatonError("registry mismatch");
    const Mtbdd& ma = *a.mgr;
    const std::uint64_t full = a.width >= 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << a.width) - 1;
    const auto live = live_states(a);

    // Letters of a per state, with their successors.
    std::vector<std::vector<std::pair<std::uint64_t, int>>> letters(a.size());
    for (int p = 0; p < a.size(); ++p)
        ma.for_each_path(a.delta[p], [&](std::uint64_t value, std::uint64_t mask, int t) {
            if (live[t]) letters[p].push_back({value | (full & ~mask), t});
        });

    SetTable sets;
    std::map<std::pair<int, std::uint64_t>, int> image_memo;  // (b-state, letter) -> set
    auto image = [&](int q, std::uint64_t w) {
        const auto key = std::make_pair(q, w);
        if (auto it = image_memo.find(key); it != image_memo.end()) return it->second;
        const int id = sets.intern(dual_image(b, q, w, predicate_tracks));
        image_memo.emplace(key, id);
        return id;
    };
    auto accepting_b = [&](int set) {
        for (int s : sets.get(set))
            if (b.final[s]) return true;
        return false;
    };

    struct Node {
        int p;
        int set;
        int parent;
        std::uint64_t letter;
    };
    std::vector<Node> nodes;
    std::vector<std::vector<int>> antichain(a.size());
    auto subsumed = [&](int p, int set) {
        const auto& s = sets.get(set);
        for (int other : antichain[p]) {
            const auto& o = sets.get(other);
            if (std::includes(s.begin(), s.end(), o.begin(), o.end())) return true;
        }
        return false;
    };
    const int binit = sets.intern({b.init});
    InclusionResult res;
    if (!live[a.init]) return res;
    nodes.push_back({a.init, binit, -1, 0});
    antichain[a.init].push_back(binit);
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        ++res.steps;
        const Node cur = nodes[i];
        std::vector<std::tuple<std::uint64_t, int, int>> cands;
        for (const auto& [w, p] : letters[cur.p]) {
            std::vector<int> succ;
            for (int q : sets.get(cur.set)) {
                const auto& img = sets.get(image(q, w));
                succ.insert(succ.end(), img.begin(), img.end());
            }
            cands.emplace_back(w, p, sets.intern(std::move(succ)));
        }
        std::sort(cands.begin(), cands.end(), [](const auto& x, const auto& y) {
            if (std::get<0>(x) != std::get<0>(y)) return letter_less(std::get<0>(x), std::get<0>(y));
            return std::make_pair(std::get<1>(x), std::get<2>(x)) < std::make_pair(std::get<1>(y), std::get<2>(y));
        });
        for (const auto& [letter, p, set] : cands) {
            if (a.final[p] && !accepting_b(set)) {
                res.included = false;
                Word w{letter};
                for (int k = static_cast<int>(i); nodes[k].parent >= 0; k = nodes[k].parent)
                    w.push_back(nodes[k].letter);
                std::reverse(w.begin(), w.end());
                res.witness = std::move(w);
                return res;
            }
            if (subsumed(p, set)) continue;
            antichain[p].push_back(set);
            nodes.push_back({p, set, static_cast<int>(i), letter});
        }
    }
    return res;
}

}  // namespace sym

// ---------------------------------------------------------------------------
// TrackNfa operations

TrackNfa universal_nfa(const TrackRegistry& reg) {
    TrackNfa a;
    a.registry = reg;
    a.num_states = 2;
    a.initial = {0};
    a.final = {false, true};
    a.transitions = {{0, {}, 1}, {1, {}, 1}};
    return a;
}

TrackNfa empty_nfa(const TrackRegistry& reg) {
    TrackNfa a;
    a.registry = reg;
    a.num_states = 1;
    a.initial = {0};
    a.final = {false};
    return a;
}

bool accepts(const TrackNfa& a, const Word& w) {
    if (w.empty()) return false;
    std::vector<char> cur(a.num_states, 0);
    for (int q : a.initial) cur[q] = 1;
    for (std::uint64_t letter : w) {
        std::vector<char> nxt(a.num_states, 0);
        for (const auto& t : a.transitions)
            if (cur[t.from] && t.cube.contains(letter)) nxt[t.to] = 1;
        cur = std::move(nxt);
    }
    for (int q = 0; q < a.num_states; ++q)
        if (cur[q] && a.final[q]) return true;
    return false;
}

bool is_empty(const TrackNfa& a) {
    std::vector<std::vector<int>> succ(a.num_states);
    for (const auto& t : a.transitions) succ[t.from].push_back(t.to);
    std::vector<char> seen(a.num_states, 0);
    std::vector<int> stack;
    for (int q : a.initial)
        for (int t : succ[q])
            if (!seen[t]) {
                seen[t] = 1;
                stack.push_back(t);
            }
    while (!stack.empty()) {
        int q = stack.back();
        stack.pop_back();
        if (a.final[q]) return false;
        for (int t : succ[q])
            if (!seen[t]) {
                seen[t] = 1;
                stack.push_back(t);
            }
    }
    return true;
}

namespace {

void same_alphabet(const TrackNfa& a, const TrackNfa& b) {
    if (!(a.registry == b.registry)) throw AutomatonError("automata over different track registries");
}

TrackNfa via_dfa(const TrackNfa& a, const std::function<SymDfa(const SymDfa&)>& f) {
    auto mgr = std::make_shared<Mtbdd>();
    return sym::to_nfa(sym::minimize(f(sym::from_nfa(a, mgr))), a.registry);
}

}  // namespace

TrackNfa product(const TrackNfa& a, const TrackNfa& b) {
    same_alphabet(a, b);
    auto mgr = std::make_shared<Mtbdd>();
    SymDfa p = sym::product(sym::from_nfa(a, mgr), sym::from_nfa(b, mgr), sym::BoolOp::And);
    return sym::to_nfa(sym::minimize(p), a.registry);
}

TrackNfa unite(const TrackNfa& a, const TrackNfa& b) {
    same_alphabet(a, b);
    TrackNfa u = a;
    const int off = a.num_states;
    u.num_states += b.num_states;
    for (int q : b.initial) u.initial.push_back(q + off);
    u.final.insert(u.final.end(), b.final.begin(), b.final.end());
    for (auto t : b.transitions) {
        t.from += off;
        t.to += off;
        u.transitions.push_back(t);
    }
    return u;
}

TrackNfa complement(const TrackNfa& a) {
    return via_dfa(a, [](const SymDfa& d) { return sym::complement(d); });
}

TrackNfa determinize(const TrackNfa& a) {
    auto mgr = std::make_shared<Mtbdd>();
    return sym::to_nfa(sym::from_nfa(a, mgr), a.registry);
}

TrackNfa minimize(const TrackNfa& a) {
    return via_dfa(a, [](const SymDfa& d) { return d; });
}

TrackNfa project_track(const TrackNfa& a, const std::string& name) {
    auto v = a.registry.index_of(name);
    if (!v) throw AutomatonError("unknown track '" + name + "'");
    auto mgr = std::make_shared<Mtbdd>();
    SymDfa d = sym::minimize(sym::project(sym::from_nfa(a, mgr), *v));
    std::vector<int> idx(a.registry.width());
    TrackRegistry reg;
    for (int i = 0; i < a.registry.width(); ++i) {
        if (i == *v) {
            idx[i] = -1;
            continue;
        }
        idx[i] = reg.width();
        reg.tracks.push_back(a.registry.tracks[i]);
    }
    return sym::to_nfa(sym::reindex(d, idx, reg.width()), reg);
}

TrackNfa trim(const TrackNfa& a) {
    std::vector<std::vector<int>> succ(a.num_states), pred(a.num_states);
    for (const auto& t : a.transitions) {
        succ[t.from].push_back(t.to);
        pred[t.to].push_back(t.from);
    }
    auto closure = [](const std::vector<std::vector<int>>& g, std::vector<int> seeds, int n) {
        std::vector<char> seen(n, 0);
        for (int s : seeds) seen[s] = 1;
        while (!seeds.empty()) {
            int q = seeds.back();
            seeds.pop_back();
            for (int r : g[q])
                if (!seen[r]) {
                    seen[r] = 1;
                    seeds.push_back(r);
                }
        }
        return seen;
    };
    std::vector<int> finals;
    for (int q = 0; q < a.num_states; ++q)
        if (a.final[q]) finals.push_back(q);
    auto fwd = closure(succ, a.initial, a.num_states);
    auto bwd = closure(pred, finals, a.num_states);
    std::vector<int> id(a.num_states, -1);
    TrackNfa out;
    out.registry = a.registry;
    for (int q = 0; q < a.num_states; ++q)
        if (fwd[q] && bwd[q]) id[q] = out.num_states++;
    for (int q = 0; q < a.num_states; ++q)
        if (id[q] >= 0) out.final.push_back(a.final[q]);
    for (int q : a.initial)
        if (id[q] >= 0) out.initial.push_back(id[q]);
    for (const auto& t : a.transitions)
        if (id[t.from] >= 0 && id[t.to] >= 0) out.transitions.push_back({id[t.from], t.cube, id[t.to]});
    if (out.num_states == 0) return empty_nfa(a.registry);
    return out;
}

TrackNfa saturate(const TrackNfa& a, std::uint64_t predicate_tracks) {
    TrackNfa out = a;
    for (auto& t : out.transitions) t.cube.mask &= ~(predicate_tracks & ~t.cube.value);
    return out;
}

TrackNfa flip_predicate_tracks(const TrackNfa& a, std::uint64_t predicate_tracks) {
    TrackNfa out = a;
    for (auto& t : out.transitions) t.cube.value ^= t.cube.mask & predicate_tracks;
    return out;
}

TrackNfa widen(const TrackNfa& a, const TrackRegistry& target) {
    std::vector<int> idx(a.registry.width());
    for (int i = 0; i < a.registry.width(); ++i) {
        auto j = target.index_of(a.registry.tracks[i].name);
        if (!j || target.tracks[*j].kind != a.registry.tracks[i].kind)
            throw AutomatonError("track '" + a.registry.tracks[i].name + "' missing from target registry");
        idx[i] = *j;
    }
    TrackNfa out = a;
    out.registry = target;
    for (auto& t : out.transitions) {
        Cube c;
        for (int i = 0; i < a.registry.width(); ++i) {
            if ((t.cube.mask >> i) & 1u) c.mask |= std::uint64_t{1} << idx[i];
            if ((t.cube.value >> i) & 1u) c.value |= std::uint64_t{1} << idx[i];
        }
        t.cube = c;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Antichain inclusion

InclusionResult antichain_included(const TrackNfa& a, const TrackNfa& b) {
    same_alphabet(a, b);
    a.check();
    b.check();
    auto mgr = std::make_shared<Mtbdd>();
    Mtbdd& m = *mgr;
    SubsetBuilder sb(mgr, b.registry.width());
    const Mtbdd::Ref none = m.leaf(sb.sets.intern({}));
    std::vector<Mtbdd::Ref> broot(b.num_states, none);
    for (const auto& t : b.transitions) {
        Mtbdd::Ref c = m.cube(t.cube.value, t.cube.mask, m.leaf(sb.sets.intern({t.to})), none);
        broot[t.from] = sb.unite(broot[t.from], c);
    }
    std::unordered_map<int, Mtbdd::Ref> macro_root;
    auto root_of = [&](int set) {
        if (auto it = macro_root.find(set); it != macro_root.end()) return it->second;
        Mtbdd::Ref r = none;
        for (int s : sb.sets.get(set)) r = sb.unite(r, broot[s]);
        macro_root.emplace(set, r);
        return r;
    };
    auto accepting_b = [&](int set) {
        for (int s : sb.sets.get(set))
            if (b.final[s]) return true;
        return false;
    };
    std::vector<std::vector<const NfaTransition*>> aout(a.num_states);
    for (const auto& t : a.transitions) aout[t.from].push_back(&t);

    struct Node {
        int p;
        int set;
        int parent;
        std::uint64_t letter;
    };
    std::vector<Node> nodes;
    std::vector<std::vector<int>> antichain(a.num_states);  // set ids seen per A-state
    auto subsumed = [&](int p, int set) {
        const auto& s = sb.sets.get(set);
        for (int other : antichain[p]) {
            const auto& o = sb.sets.get(other);
            if (std::includes(s.begin(), s.end(), o.begin(), o.end())) return true;
        }
        return false;
    };

    const int binit = sb.sets.intern(b.initial);
    std::vector<int> ainit = a.initial;
    std::sort(ainit.begin(), ainit.end());
    ainit.erase(std::unique(ainit.begin(), ainit.end()), ainit.end());
    for (int p : ainit) {
        nodes.push_back({p, binit, -1, 0});
        antichain[p].push_back(binit);
    }

    InclusionResult res;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        ++res.steps;
        const Node cur = nodes[i];
        const Mtbdd::Ref r = root_of(cur.set);
        std::map<std::pair<int, int>, std::uint64_t> best;
        for (const NfaTransition* t : aout[cur.p]) {
            std::unordered_map<Mtbdd::Ref, char> visited;
            std::function<void(Mtbdd::Ref, std::uint64_t)> walk = [&](Mtbdd::Ref x, std::uint64_t letter) {
                if (visited.count(x)) return;
                visited.emplace(x, 1);
                if (m.is_leaf(x)) {
                    auto key = std::make_pair(t->to, m.value(x));
                    auto it = best.find(key);
                    if (it == best.end() || letter_less(letter, it->second)) best[key] = letter;
                    return;
                }
                const int v = m.var(x);
                const std::uint64_t bit = std::uint64_t{1} << v;
                if (t->cube.mask & bit) {
                    walk((t->cube.value & bit) ? m.hi(x) : m.lo(x), letter);
                } else {
                    walk(m.lo(x), letter);
                    walk(m.hi(x), letter | bit);
                }
            };
            walk(r, t->cube.value);
        }
        std::vector<std::tuple<std::uint64_t, int, int>> cands;
        for (const auto& [key, letter] : best) cands.emplace_back(letter, key.first, key.second);
        std::sort(cands.begin(), cands.end(), [](const auto& x, const auto& y) {
            if (std::get<0>(x) != std::get<0>(y)) return letter_less(std::get<0>(x), std::get<0>(y));
            return std::make_pair(std::get<1>(x), std::get<2>(x)) < std::make_pair(std::get<1>(y), std::get<2>(y));
        });
        for (const auto& [letter, p, set] : cands) {
            if (a.final[p] && !accepting_b(set)) {
                res.included = false;
                Word w{letter};
                for (int k = static_cast<int>(i); nodes[k].parent >= 0; k = nodes[k].parent)
                    w.push_back(nodes[k].letter);
                std::reverse(w.begin(), w.end());
                res.witness = std::move(w);
                return res;
            }
            if (subsumed(p, set)) continue;
            antichain[p].push_back(set);
            nodes.push_back({p, set, static_cast<int>(i), letter});
        }
    }
    return res;
}

// ---------------------------------------------------------------------------

std::string to_dot(const TrackNfa& a, const std::string& title) {
    std::ostringstream os;
    os << "digraph \"" << title << "\" {\n  rankdir=LR;\n  node [shape=circle];\n";
    os << "  // tracks:";
    for (const auto& t : a.registry.tracks) os << ' ' << t.name;
    os << "\n";
    for (int q = 0; q < a.num_states; ++q)
        os << "  q" << q << " [label=\"" << q << "\"" << (a.final[q] ? ", shape=doublecircle" : "") << "];\n";
    for (int q : a.initial) os << "  init" << q << " [shape=point];\n  init" << q << " -> q" << q << ";\n";
    std::map<std::pair<int, int>, std::vector<std::string>> labels;
    for (const auto& t : a.transitions)
        labels[{t.from, t.to}].push_back(cube_to_string(t.cube, a.registry.width()));
    for (const auto& [e, ls] : labels) {
        os << "  q" << e.first << " -> q" << e.second << " [label=\"";
        for (std::size_t i = 0; i < ls.size(); ++i) os << (i ? "\\n" : "") << ls[i];
        os << "\"];\n";
    }
    os << "}\n";
    return os.str();
}

}  // namespace trapmark
