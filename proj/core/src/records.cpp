#include "polymerlab/records.hpp"

#include <cstdio>
#include <cstdlib>
#include <istream>
#include <stdexcept>

namespace polymerlab {

std::string grid_key(const ExperimentRecord& rec) {
  std::string out;
  for (const auto& [k, v] : rec.grid_point) {
    if (!out.empty()) out += ';';
    out += k;
    out += '=';
    out += v;
  }
  return out;
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string records_csv_header(const ExperimentRecord& prototype) {
  std::string out = "experiment,replica,seed,wall_time_ms";
  for (const auto& [k, v] : prototype.grid_point) out += ",g:" + k;
  for (const auto& [k, v] : prototype.observables) out += ",o:" + k;
  out += '\n';
  return out;
}

std::string record_csv_line(const ExperimentRecord& rec) {
  std::string out = rec.experiment;
  out += ',';
  out += std::to_string(rec.replica);
  out += ',';
  out += std::to_string(rec.seed);
  out += ',';
  out += std::to_string(rec.wall_time_ms);
  for (const auto& [k, v] : rec.grid_point) {
    out += ',';
    out += v;
  }
  for (const auto& [k, v] : rec.observables) {
    out += ',';
    out += format_double(v);
  }
  out += '\n';
  return out;
}

namespace {

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

}  // namespace

void for_each_record_csv(std::istream& is,
                         const std::function<void(ExperimentRecord&&)>& fn) {
  std::string line;
  if (!std::getline(is, line)) return;
  const auto header = split_csv(line);
  if (header.size() < 4 || header[0] != "experiment") {
    throw std::runtime_error("records csv: malformed header");
  }
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    const auto cells = split_csv(line);
    if (cells.size() != header.size()) {
      throw std::runtime_error("records csv: row width does not match header");
    }
    ExperimentRecord rec;
    rec.experiment = cells[0];
    rec.replica = std::strtoll(cells[1].c_str(), nullptr, 10);
    rec.seed = std::strtoull(cells[2].c_str(), nullptr, 10);
    rec.wall_time_ms = std::strtoll(cells[3].c_str(), nullptr, 10);
    for (std::size_t c = 4; c < header.size(); ++c) {
      const std::string& h = header[c];
      if (h.starts_with("g:")) {
        rec.grid_point.emplace_back(h.substr(2), cells[c]);
      } else if (h.starts_with("o:")) {
        rec.observables.emplace_back(h.substr(2), std::strtod(cells[c].c_str(), nullptr));
      } else {
        throw std::runtime_error("records csv: unknown column " + h);
      }
    }
    fn(std::move(rec));
  }
}

std::vector<ExperimentRecord> read_records_csv(std::istream& is) {
  std::vector<ExperimentRecord> out;
  for_each_record_csv(is, [&out](ExperimentRecord&& rec) { out.push_back(std::move(rec)); });
  return out;
}

}  // namespace polymerlab
