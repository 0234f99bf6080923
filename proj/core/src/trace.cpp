#include "optaccel/trace.hpp"

#include <charconv>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace optaccel {

double RunTrace::final_subopt() const {
  if (aborted || records.empty()) return std::numeric_limits<double>::infinity();
  return records.back().subopt;
}

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

void write_trace_csv(std::ostream& out, const RunTrace& trace) {
  out << kTraceCsvHeader << '\n';
  for (const TraceRecord& r : trace.records) {
    out << r.t << ',' << format_double(r.norm_w) << ',' << format_double(r.norm_wag) << ','
        << format_double(r.subopt) << ',' << format_double(r.subopt_stderr) << ','
        << format_double(r.grad_noise_sq) << ',' << r.stage << '\n';
  }
}

std::string trace_csv(const RunTrace& trace) {
  std::ostringstream os;
  write_trace_csv(os, trace);
  return os.str();
}

std::vector<TraceRecord> read_trace_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != kTraceCsvHeader)
    throw std::runtime_error("trace csv: unexpected header");
  std::vector<TraceRecord> out;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream fields(line);
    std::string cell[7];
    for (auto& c : cell) std::getline(fields, c, ',');
    try {
      TraceRecord r;
      r.t = std::stoll(cell[0]);
      r.norm_w = std::stod(cell[1]);
      r.norm_wag = std::stod(cell[2]);
      r.subopt = std::stod(cell[3]);
      r.subopt_stderr = std::stod(cell[4]);
      r.grad_noise_sq = std::stod(cell[5]);
      r.stage = std::stoi(cell[6]);
      out.push_back(r);
    } catch (const std::exception&) {
      throw std::runtime_error("trace csv: malformed row at line " + std::to_string(lineno));
    }
  }
  return out;
}

nlohmann::json header_json(const RunTrace& trace) {
  const RunHeader& h = trace.header;
  nlohmann::json j{{"problem", h.problem},
                   {"problem_hash", h.problem_hash},
                   {"algorithm", h.algorithm},
                   {"b", h.b},
                   {"T", h.T},
                   {"seed", h.seed},
                   {"gamma", h.gamma},
                   {"schedule_hash", h.schedule_hash},
                   {"records", trace.records.size()},
                   {"aborted", trace.aborted}};
  if (trace.aborted) j["abort_reason"] = trace.abort_reason;
  if (!h.extra.empty()) j["extra"] = h.extra;
  return j;
}

}  // namespace optaccel
