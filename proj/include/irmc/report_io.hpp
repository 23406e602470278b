#pragma once

#include "irmc/oracle.hpp"
#include "irmc/policy.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace irmc {

/// %.17g, or NA for NaN.
std::string format_double(double v);

std::string forward_report_json(const ForwardReport& report);
/// Header `path,step,coord,pre_state,impulse`; one row per event and coordinate.
void write_events_csv(std::ostream& out, const ForwardReport& report, const std::vector<int>& coords);
/// Header `step,s_k,S_k`.
void write_boundary_csv(std::ostream& out, const std::vector<BoundaryPoint>& boundary);
/// One JSON object per line, without timings.
std::string trace_json_line(const StepTrace& trace);
/// Header `step,x,value,act,target`; rows for k = 0..K-1.
void write_dp_csv(std::ostream& out, const DpResult& dp);

void write_text_file(const std::string& path, const std::string& text);

} // namespace irmc
