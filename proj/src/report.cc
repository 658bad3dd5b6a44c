#include "trapmark/report.hh"

#include <map>
#include <sstream>

#include "json.hpp"

namespace trapmark {

namespace {

using Json = nlohmann::ordered_json;

Json to_json(const VerificationReport& r, bool explain) {
    Json j;
    j["verdict"] = r.verdict();
    j["property"] = r.property;
    j["minSize"] = r.min_size;
    if (!r.safe) {
        Json w = Json::array();
        for (const auto& e : r.witness) w.push_back({{"index", e.index}, {"type", e.type}, {"state", e.state}});
        j["witness"] = w;
    }
    j["stats"] = {{"states", r.stats.states},
                  {"transitions", r.stats.transitions},
                  {"inclusionSteps", r.stats.inclusion_steps}};
    j["assumptions"] = r.assumptions;
    j["windows"] = r.windows;
    if (r.heuristic_windows) j["heuristicWindows"] = true;
    if (explain && !r.reach.empty()) {
        Json reach = Json::array();
        for (const auto& [name, text] : r.reach) reach.push_back({{"window", name}, {"reach", text}});
        j["reach"] = reach;
    }
    return j;
}

}  // namespace

std::string report_json(const VerificationReport& r, bool explain) { return to_json(r, explain).dump(2) + "\n"; }

std::string reports_json(const std::vector<VerificationReport>& rs, bool explain) {
    if (rs.size() == 1) return report_json(rs.front(), explain);
    Json all = Json::array();
    for (const auto& r : rs) all.push_back(to_json(r, explain));
    return all.dump(2) + "\n";
}

std::string report_text(const VerificationReport& r, bool explain) {
    std::ostringstream out;
    out << r.property << ": " << r.verdict() << "\n";
    out << "  sizes n >= " << r.min_size << "\n";
    out << "  bad-state automaton: " << r.stats.states << " states, " << r.stats.transitions
        << " transitions; inclusion explored " << r.stats.inclusion_steps << " macro-states\n";
    if (!r.windows.empty()) {
        out << "  windows:";
        for (const auto& w : r.windows) out << " " << w;
        if (r.heuristic_windows) out << " (heuristic)";
        out << "\n";
    }
    if (!r.safe) {
        // witness grouped per index
        std::map<int, std::string> rows;
        for (const auto& e : r.witness) rows[e.index] += " " + e.type + "." + e.state;
        out << "  witness (n = " << r.witness_word.size() << "), in the invariant and bad:\n";
        for (const auto& [i, row] : rows) out << "    " << i << ":" << row << "\n";
    }
    if (explain)
        for (const auto& [name, text] : r.reach) out << "  reach[" << name << "]: " << text << "\n";
    out << "  assumptions:\n";
    for (const auto& a : r.assumptions) out << "    - " << a << "\n";
    return out.str();
}

}  // namespace trapmark
