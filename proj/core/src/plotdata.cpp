#include "optaccel/plotdata.hpp"

#include "optaccel/trace.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

namespace optaccel {
namespace fs = std::filesystem;

namespace {

using Row = std::vector<std::string>;

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream is(line);
  while (std::getline(is, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

std::ifstream open_input(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("missing input: " + path.string());
  return in;
}

// Rows keyed by column name; requires the listed columns in the header.
std::vector<std::map<std::string, std::string>> read_table(const fs::path& path,
                                                           const std::vector<std::string>& need) {
  std::ifstream in = open_input(path);
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("empty input: " + path.string());
  const Row header = split(line);
  for (const auto& col : need) {
    if (std::find(header.begin(), header.end(), col) == header.end())
      throw std::runtime_error(path.string() + ": missing column '" + col + "'");
  }
  std::vector<std::map<std::string, std::string>> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const Row cells = split(line);
    if (cells.size() != header.size())
      throw std::runtime_error(path.string() + ": row width differs from header");
    std::map<std::string, std::string> r;
    for (std::size_t i = 0; i < header.size(); ++i) r[header[i]] = cells[i];
    rows.push_back(std::move(r));
  }
  return rows;
}

std::string rate_curve(const std::vector<fs::path>& inputs) {
  std::ostringstream out;
  out << "source,problem,problem_hash,algorithm,b,T,median,q1,q3\n";
  for (const auto& path : inputs) {
    auto rows = read_table(path, {"problem", "problem_hash", "algorithm", "b", "T", "median", "q1", "q3"});
    std::stable_sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) {
      return std::make_tuple(std::stoll(a.at("problem")), std::stoll(a.at("b")), std::stoll(a.at("T"))) <
             std::make_tuple(std::stoll(b.at("problem")), std::stoll(b.at("b")), std::stoll(b.at("T")));
    });
    for (const auto& r : rows) {
      if (r.at("median").empty()) continue;
      out << path.string() << ',' << r.at("problem") << ',' << r.at("problem_hash") << ','
          << r.at("algorithm") << ',' << r.at("b") << ',' << r.at("T") << ',' << r.at("median")
          << ',' << r.at("q1") << ',' << r.at("q3") << '\n';
    }
  }
  return out.str();
}

std::string speedup_curve(const std::vector<fs::path>& inputs) {
  std::ostringstream out;
  out << "source,problem,problem_hash,eps,b,T_to_eps,speedup\n";
  for (const auto& path : inputs) {
    auto rows = read_table(path, {"problem", "problem_hash", "eps", "b", "T_to_eps"});
    std::stable_sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) {
      return std::make_tuple(std::stoll(a.at("problem")), std::stod(a.at("eps")), std::stoll(a.at("b"))) <
             std::make_tuple(std::stoll(b.at("problem")), std::stod(b.at("eps")), std::stoll(b.at("b")));
    });
    // Speedup relative to the smallest b of each (problem, eps) group that reached eps.
    std::map<std::pair<std::string, std::string>, double> base;
    for (const auto& r : rows) {
      const auto key = std::make_pair(r.at("problem"), r.at("eps"));
      if (!r.at("T_to_eps").empty() && !base.count(key)) base[key] = std::stod(r.at("T_to_eps"));
    }
    for (const auto& r : rows) {
      const auto key = std::make_pair(r.at("problem"), r.at("eps"));
      out << path.string() << ',' << r.at("problem") << ',' << r.at("problem_hash") << ','
          << r.at("eps") << ',' << r.at("b") << ',' << r.at("T_to_eps") << ',';
      if (!r.at("T_to_eps").empty() && base.count(key))
        out << format_double(base.at(key) / std::stod(r.at("T_to_eps")));
      out << '\n';
    }
  }
  return out.str();
}

std::string stage_decay(const std::vector<fs::path>& inputs) {
  std::ostringstream out;
  out << "source,stage,t_end,subopt\n";
  for (const auto& path : inputs) {
    std::ifstream in = open_input(path);
    std::vector<TraceRecord> records;
    try {
      records = read_trace_csv(in);
    } catch (const std::exception& e) {
      throw std::runtime_error(path.string() + ": " + e.what());
    }
    for (std::size_t i = 0; i < records.size(); ++i) {
      const bool last_of_stage = i + 1 == records.size() || records[i + 1].stage != records[i].stage;
      if (!last_of_stage) continue;
      out << path.string() << ',' << records[i].stage << ',' << records[i].t << ','
          << format_double(records[i].subopt) << '\n';
    }
  }
  return out.str();
}

}  // namespace

const std::vector<std::string>& plotdata_kinds() {
  static const std::vector<std::string> kinds{"rate_curve", "speedup_curve", "stage_decay"};
  return kinds;
}

std::string emit_plotdata(const std::string& kind, const std::vector<fs::path>& inputs) {
  if (inputs.empty()) throw std::runtime_error("no input files given");
  if (kind == "rate_curve") return rate_curve(inputs);
  if (kind == "speedup_curve") return speedup_curve(inputs);
  if (kind == "stage_decay") return stage_decay(inputs);
  throw std::invalid_argument("unknown plotdata kind '" + kind + "'");
}

}  // namespace optaccel
