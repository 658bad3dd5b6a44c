#pragma once

// The .pbip surface syntax:
//
//   component Fork { states f, b init f; port t: f -> b; port l: b -> f; }
//   interaction exists i. g(i) & t(i) & t(succ(i)) | p(i) & l(i) & l(succ(i));
//   property deadlock;
//   property bad "mutex": exists x. exists y. x != y & e(x) & e(y);
//   window "w1" (c1: Phil, c2: Fork) where c2 = succ(c1);
//
// State predicates may be written bare when the state name is unique across
// component types, and as Type.state otherwise.

#include <optional>
#include <string>
#include <vector>

#include "trapmark/formula.hh"
#include "trapmark/model.hh"

namespace trapmark {

struct ParseResult {
    std::optional<SystemModel> model;
    std::vector<Diagnostic> diagnostics;

    bool ok() const { return model.has_value(); }
};

ParseResult parse_model(const std::string& text, const std::string& file = "");

/// Parses a stand-alone formula.  With a model, bare state names are
/// qualified the same way as inside a document.
struct FormulaParse {
    std::optional<Formula> formula;
    std::vector<Diagnostic> diagnostics;
};
FormulaParse parse_formula(const std::string& text, const SystemModel* model = nullptr);

std::string pretty_print(const SystemModel& model);
/// Formula text with state predicates shortened wherever unambiguous.
std::string print_formula(const Formula& f, const SystemModel& model);

/// Renames predicate symbols; names missing from the map are kept.
Formula rename_predicates(const Formula& f, const std::map<std::string, std::string>& names);

}  // namespace trapmark
