#include "psafem/trace_io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace psafem {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_trace_csv(const std::string& path, const AdaptiveTrace& trace) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_trace_csv: cannot open " + path);
  out << "iter,N,num_cells,omega_h,eta_sq,err,eff,num_marked,wall_ms\n";
  for (const auto& r : trace.rows) {
    out << r.iter << "," << r.N << "," << r.num_cells << ","
        << format_double(r.omega_h) << "," << format_double(r.eta_sq) << ","
        << format_double(r.err) << "," << format_double(r.eff) << ","
        << r.num_marked << "," << format_double(r.wall_ms) << "\n";
  }
}

AdaptiveTrace read_trace_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("read_trace_csv: cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("read_trace_csv: empty file");
  if (line != "iter,N,num_cells,omega_h,eta_sq,err,eff,num_marked,wall_ms")
    throw std::runtime_error("read_trace_csv: unexpected header");
  AdaptiveTrace trace;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string tok;
    TraceRow r;
    auto next = [&] {
      if (!std::getline(ss, tok, ',')) throw std::runtime_error("read_trace_csv: short row");
      return tok;
    };
    r.iter = std::stoi(next());
    r.N = std::stol(next());
    r.num_cells = std::stol(next());
    r.omega_h = std::strtod(next().c_str(), nullptr);
    r.eta_sq = std::strtod(next().c_str(), nullptr);
    r.err = std::strtod(next().c_str(), nullptr);
    r.eff = std::strtod(next().c_str(), nullptr);
    r.num_marked = std::stol(next());
    r.wall_ms = std::strtod(next().c_str(), nullptr);
    trace.rows.push_back(r);
  }
  return trace;
}

} // namespace psafem
