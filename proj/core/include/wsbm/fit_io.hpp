#pragma once

#include <iosfwd>
#include <string_view>

#include "wsbm/eval.hpp"
#include "wsbm/model.hpp"
#include "wsbm/model_select.hpp"

namespace wsbm {

inline constexpr std::string_view kToolkitVersion = "0.1.0";
/// Version of every JSON document written below ("format_version").
inline constexpr int kSchemaVersion = 1;

/// Fit document: config, per-vertex beliefs and MAP labels, per-bundle tau of
/// both components (inference and predictive), ELBO and its trace, seed, and
/// the training aggregates prediction needs.
void write_fit_json(const FitResult& fit, std::ostream& out);
/// Inverse of write_fit_json. Throws InputError on malformed or foreign documents.
FitResult read_fit_json(std::istream& in);

/// `include_fits` adds each candidate's labels.
void write_selection_json(const SelectionReport& report, std::ostream& out, bool include_fits = false);
/// `include_records` adds every prediction record.
void write_eval_json(const EvalReport& report, std::ostream& out, bool include_records = false);

}  // namespace wsbm
