#pragma once

// Rendering of verification reports.  JSON output is deterministic: same
// report, same bytes.

#include <string>
#include <vector>

#include "trapmark/trapinv.hh"

namespace trapmark {

/// {verdict, property, minSize, witness?, stats, assumptions, windows, ...};
/// reach formulas are included when `explain` is set.
std::string report_json(const VerificationReport& r, bool explain = false);
/// A single report as an object, several as an array.
std::string reports_json(const std::vector<VerificationReport>& rs, bool explain = false);
std::string report_text(const VerificationReport& r, bool explain = false);

}  // namespace trapmark
