// trapmark <check|oracle|invariant|net> FILE [options]
//
// Exit codes: 0 SAFE (or oracle match), 2 INCONCLUSIVE, 1 anything else.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "trapmark/ashcroft.hh"
#include "trapmark/frontend.hh"
#include "trapmark/logic.hh"
#include "trapmark/oracle.hh"
#include "trapmark/petri.hh"
#include "trapmark/report.hh"
#include "trapmark/trapinv.hh"
#include "trapmark/wss_compile.hh"

namespace fs = std::filesystem;
using namespace trapmark;

namespace {

constexpr int kSafe = 0;
constexpr int kError = 1;
constexpr int kInconclusive = 2;

// Largest automaton exported as DOT, counted in cube transitions.
constexpr std::uint64_t kDotTransitions = 20000;

struct RunConfig {
    std::string command;
    std::string input;
    std::string property = "all";
    int min_size = 2;
    std::string windows = "none";
    int size = 2;
    std::string format = "text";
    std::string export_dir;
    bool explain = false;
    bool emit_positive = false;
    Caps caps;
};

struct Failure {
    std::string what;
};

SystemModel load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Failure{"cannot read '" + path + "'"};
    std::stringstream ss;
    ss << in.rdbuf();
    ParseResult pr = parse_model(ss.str(), path);
    for (const auto& d : pr.diagnostics) std::cerr << format_diagnostic(d) << "\n";
    if (!pr.ok()) throw Failure{"'" + path + "' has errors"};
    const auto diags = validate_system(*pr.model);
    for (const auto& d : diags) std::cerr << format_diagnostic(d) << "\n";
    if (has_errors(diags)) throw Failure{"'" + path + "' is not a valid system"};
    return std::move(*pr.model);
}

void write_file(const std::string& dir, const std::string& name, const std::string& text) {
    fs::create_directories(dir);
    const fs::path p = fs::path(dir) / name;
    std::ofstream out(p);
    if (!out) throw Failure{"cannot write '" + p.string() + "'"};
    out << text;
    std::cerr << "wrote " << p.string() << "\n";
}

// DOT of a symbolic automaton, or nothing when it is too large to draw.
void export_automaton(const RunConfig& cfg, const std::string& name, const SymDfa& a, const TrackRegistry& reg) {
    try {
        write_file(cfg.export_dir, name + ".dot", to_dot(sym::to_nfa(a, reg, kDotTransitions), name));
    } catch (const AutomatonError&) {
        std::cerr << "skipped " << name << ".dot: more than " << kDotTransitions << " transitions\n";
    }
}

std::string file_stem(const std::string& s) {
    std::string out;
    for (char c : s) out += std::isalnum(static_cast<unsigned char>(c)) ? c : '_';
    return out;
}

std::vector<PropertySpec> select_properties(const SystemModel& m, const std::string& sel) {
    if (sel == "all") {
        if (!m.properties.empty()) return m.properties;
        return {PropertySpec{}};
    }
    for (const auto& p : m.properties)
        if (p.name == sel) return {p};
    if (sel == "deadlock") return {PropertySpec{}};
    throw Failure{"no property named '" + sel + "'"};
}

std::vector<WindowSpec> select_windows(const SystemModel& m, const std::string& sel, bool& heuristic) {
    heuristic = false;
    if (sel == "none") return {};
    if (sel == "all") return m.windows;
    if (sel == "auto") {
        heuristic = true;
        return auto_windows(m);
    }
    std::vector<WindowSpec> out;
    std::stringstream ss(sel);
    for (std::string name; std::getline(ss, name, ',');) {
        bool found = false;
        for (const auto& w : m.windows)
            if (w.name == name) {
                out.push_back(w);
                found = true;
            }
        if (!found) throw Failure{"no window named '" + name + "'"};
    }
    return out;
}

int run_check(const RunConfig& cfg) {
    const SystemModel m = load(cfg.input);
    const auto props = select_properties(m, cfg.property);
    bool heuristic = false;
    const auto windows = select_windows(m, cfg.windows, heuristic);
    const InvariantBundle bundle = build_invariant(m);

    std::vector<VerificationReport> reports;
    for (const auto& p : props) {
        VerificationReport r = windows.empty() ? check_safety(m, bundle, p, cfg.min_size)
                                               : strengthen_and_check(m, bundle, p, windows, cfg.min_size, cfg.caps);
        r.heuristic_windows = heuristic;
        if (heuristic) r.assumptions.push_back("windows were proposed heuristically (auto)");
        reports.push_back(std::move(r));
        if (!cfg.export_dir.empty())
            export_automaton(cfg, "bad_" + file_stem(p.name), bad_automaton(m, bundle.mgr, p, cfg.min_size),
                             bundle.registry);
    }
    if (!cfg.export_dir.empty())
        for (const auto& w : windows) {
            const View v = build_view(m, w);
            write_file(cfg.export_dir, "view_" + file_stem(w.name) + ".dot", to_dot(view_net(m, w, v), w.name));
        }

    if (cfg.format == "json") {
        std::cout << reports_json(reports, cfg.explain);
    } else {
        for (const auto& r : reports) std::cout << report_text(r, cfg.explain);
    }
    for (const auto& r : reports)
        if (!r.safe) return kInconclusive;
    return kSafe;
}

std::string valuation_text(const MarkedPetriNet& net, std::uint64_t v) {
    return place_set_to_string(net, v);
}

int run_oracle(const RunConfig& cfg) {
    const SystemModel m = load(cfg.input);
    const InvariantBundle bundle = build_invariant(m);
    const InvariantOracleResult r = check_invariant_oracle(m, bundle, cfg.size, cfg.caps);
    const MarkedPetriNet net = instantiate_net(m, cfg.size, cfg.caps);
    if (cfg.format == "json") {
        std::cout << "{\n  \"size\": " << r.n << ",\n  \"places\": " << r.places << ",\n  \"minImts\": " << r.min_imts
                  << ",\n  \"invariantValuations\": " << r.invariant_size << ",\n  \"automatonOnly\": "
                  << r.automaton_only.size() << ",\n  \"netOnly\": " << r.net_only.size() << ",\n  \"match\": "
                  << (r.match() ? "true" : "false") << "\n}\n";
    } else {
        std::cout << "n = " << r.n << ": " << r.places << " places, " << r.min_imts << " minimal initially marked traps\n";
        std::cout << "invariant valuations: " << r.invariant_size << "\n";
        std::cout << (r.match() ? "MATCH" : "MISMATCH") << "\n";
        const std::size_t show = cfg.explain ? SIZE_MAX : 5;
        for (std::size_t i = 0; i < r.automaton_only.size() && i < show; ++i)
            std::cout << "  automaton only: " << valuation_text(net, r.automaton_only[i]) << "\n";
        for (std::size_t i = 0; i < r.net_only.size() && i < show; ++i)
            std::cout << "  net only: " << valuation_text(net, r.net_only[i]) << "\n";
    }
    return r.match() ? kSafe : kError;
}

int run_invariant(const RunConfig& cfg) {
    const SystemModel m = load(cfg.input);
    const bool need_sat = !cfg.export_dir.empty();
    const InvariantBundle b = build_invariant(m, need_sat);
    std::cout << "tracks:";
    for (const auto& t : b.registry.tracks) std::cout << " " << t.name;
    std::cout << "\n";
    std::cout << "A_phi: " << b.a_phi.size() << " states, " << sym::count_transitions(b.a_phi) << " transitions\n";
    if (need_sat)
        std::cout << "saturated: " << b.a_sat.size() << " states, " << sym::count_transitions(b.a_sat)
                  << " transitions\n";
    if (cfg.explain) {
        std::cout << "phi: " << print_formula(b.phi, m) << "\n";
        for (const auto& e : b.trace.entries)
            std::cout << "  " << e.states_before << " -> " << e.states_after << " states  " << e.node << "\n";
    }
    if (cfg.emit_positive) {
        const TrackNfa nfa = sym::to_nfa(b.a_phi, b.registry, kDotTransitions);
        std::cout << "positive: " << print_formula(positive_formula_of(nfa), m) << "\n";
    }
    if (need_sat) {
        export_automaton(cfg, "a_phi", b.a_phi, b.registry);
        try {
            write_file(cfg.export_dir, "a_tilde.dot",
                       to_dot(sym::to_nfa(b.a_tilde, b.registry, kDotTransitions), "a_tilde"));
        } catch (const AutomatonError&) {
            std::cerr << "skipped a_tilde.dot: more than " << kDotTransitions << " transitions\n";
        }
    }
    return kSafe;
}

int run_net(const RunConfig& cfg) {
    const SystemModel m = load(cfg.input);
    const MarkedPetriNet net = instantiate_net(m, cfg.size, cfg.caps);
    std::cout << "n = " << cfg.size << ": " << net.num_places() << " places, " << net.transitions.size()
              << " transitions\n";
    std::cout << "initial: " << place_set_to_string(net, net.initial) << "\n";
    if (cfg.explain) {
        for (const auto& t : net.transitions)
            std::cout << "  " << t.label << ": " << place_set_to_string(net, t.pre) << " -> "
                      << place_set_to_string(net, t.post) << "\n";
        const auto reach = reachable_markings(net, cfg.caps);
        std::cout << "reachable markings: " << reach.markings.size() << "\n";
        const auto traps = enumerate_min_imts(net, cfg.caps);
        std::cout << "minimal initially marked traps: " << traps.size() << "\n";
        for (auto t : traps) std::cout << "  " << place_set_to_string(net, t) << "\n";
    }
    if (!cfg.export_dir.empty())
        write_file(cfg.export_dir, "net_" + std::to_string(cfg.size) + ".dot", to_dot(net, "n" + std::to_string(cfg.size)));
    return kSafe;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Parametric safety checking with trap invariants"};
    app.require_subcommand(1);
    RunConfig cfg;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("file", cfg.input, "system description (.pbip)")->required();
        sub->add_option("--format", cfg.format, "text or json")->check(CLI::IsMember({"text", "json"}));
        sub->add_option("--export-dot", cfg.export_dir, "write DOT files into DIR");
        sub->add_flag("--explain", cfg.explain, "print intermediate formulas and nets");
    };
    auto* check = app.add_subcommand("check", "verify the properties of a system");
    add_common(check);
    check->add_option("--property", cfg.property, "property name, deadlock, or all (default)");
    check->add_option("--min-size", cfg.min_size, "smallest system size considered")->check(CLI::PositiveNumber);
    check->add_option("--windows", cfg.windows, "comma separated window names, all, auto or none (default)");

    auto* oracle = app.add_subcommand("oracle", "compare the invariant with the trap markings at a fixed size");
    add_common(oracle);
    oracle->add_option("--size", cfg.size, "system size")->check(CLI::PositiveNumber);

    auto* inv = app.add_subcommand("invariant", "build the invariant automata");
    add_common(inv);
    inv->add_flag("--emit-positive", cfg.emit_positive, "print the positive formula of A_phi");

    auto* net = app.add_subcommand("net", "instantiate the Petri net at a fixed size");
    add_common(net);
    net->add_option("--size", cfg.size, "system size")->check(CLI::PositiveNumber);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : kError;
    }

    try {
        if (const char* env = std::getenv("TRAPMARK_CAPS")) cfg.caps.apply(env);
        if (check->parsed()) return run_check(cfg);
        if (oracle->parsed()) return run_oracle(cfg);
        if (inv->parsed()) return run_invariant(cfg);
        if (net->parsed()) return run_net(cfg);
    } catch (const Failure& f) {
        std::cerr << "error: " << f.what << "\n";
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
    }
    return kError;
}
