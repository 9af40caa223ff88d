#pragma once

#include <filesystem>
#include <iosfwd>
#include <vector>

#include "hmmsbm/model.hpp"

namespace hmmsbm {

// One JSON object per stored sample:
//   {"iteration","loglik","gamma","zeta","pi","rates":{d_O,e_O,d_D,e_D},
//    "states":[{"occupied","xi","theta","alpha","beta","a_O","b_O","a_D","b_D"}]}
// zeta, xi and state indices are 0-based; pi and theta are nested row arrays.
void write_trace_jsonl(const ChainTrace& trace, std::ostream& out);
void write_trace_jsonl(const ChainTrace& trace, const std::filesystem::path& path);
/// Restores samples and sample_iterations; scalar diagnostics are not part of
/// the file and come back empty.
ChainTrace read_trace_jsonl(std::istream& in);
ChainTrace read_trace_jsonl(const std::filesystem::path& path);

// iteration,loglik,S_star,acc_gamma,acc_ab_diag,acc_ab_off,acc_py,
// upsilon_mean,upsilon_var,chi_mean,chi_var
void write_diagnostics_csv(const std::vector<TraceScalars>& scalars, std::ostream& out);
void write_diagnostics_csv(const std::vector<TraceScalars>& scalars, const std::filesystem::path& path);
std::vector<TraceScalars> read_diagnostics_csv(const std::filesystem::path& path);

}  // namespace hmmsbm
