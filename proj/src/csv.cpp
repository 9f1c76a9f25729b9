#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <unistd.h>

#include "dtwin/errors.hpp"
#include "dtwin/io.hpp"

namespace dtwin::io {

namespace fs = std::filesystem;

void write_atomic(const std::string& path, const std::string& content) {
  const fs::path target(path);
  std::error_code ec;
  if (target.has_parent_path()) fs::create_directories(target.parent_path(), ec);
  const fs::path tmp = target.string() + ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write '" + tmp.string() + "'");
    out << content;
    out.flush();
    if (!out) {
      fs::remove(tmp, ec);
      throw IoError("write to '" + tmp.string() + "' failed");
    }
  }
  fs::rename(tmp, target, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw IoError("cannot move output into place at '" + path + "'");
  }
}

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string format_double(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

std::string trajectory_csv(const fom::Trajectory& traj, const fom::Grid1D& grid, double c_w_max) {
  std::string out = "t_s,y_m,T_K,p_Pa,c_v_kgm3,c_w_kgm3,S_w\n";
  const auto& y = grid.centers();
  for (const auto& f : traj.fields) {
    if (f.cells.size() != y.size()) throw DomainError("trajectory does not match grid");
    for (std::size_t i = 0; i < f.cells.size(); ++i) {
      const auto& c = f.cells[i];
      out += format_double(f.time) + ',' + format_double(y[i]) + ',' + format_double(c.temperature) + ',' +
             format_double(c.pressure) + ',' + format_double(c.vapor_conc) + ',' +
             format_double(c.water_conc) + ',' + format_double(c.water_conc / c_w_max) + '\n';
    }
  }
  return out;
}

std::string probes_csv(const fom::Trajectory& traj) {
  std::string out = "t_s,T_surf_K,T_core_K,moisture_kgm2,massloss_kgm2\n";
  for (const auto& p : traj.probes)
    out += format_double(p.time) + ',' + format_double(p.surface_temperature) + ',' +
           format_double(p.core_temperature) + ',' + format_double(p.moisture) + ',' +
           format_double(p.mass_loss) + '\n';
  return out;
}

std::string signal_csv(const Signal& s) {
  std::string out = "t_s,value\n";
  for (std::size_t k = 0; k < s.size(); ++k)
    out += format_double(s.times()[k]) + ',' + format_double(s.values()[k]) + '\n';
  return out;
}

namespace {

std::vector<std::vector<double>> read_table(const std::string& path, const std::string& header) {
  std::istringstream in(read_text(path));
  std::string line;
  if (!std::getline(in, line) || line != header)
    throw ConfigError("'" + path + "': expected header '" + header + "'");
  std::vector<std::vector<double>> rows;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<double> row;
    std::size_t pos = 0;
    while (pos <= line.size()) {
      const std::size_t end = std::min(line.find(',', pos), line.size());
      double v = 0.0;
      const auto r = std::from_chars(line.data() + pos, line.data() + end, v);
      if (r.ec != std::errc() || r.ptr != line.data() + end)
        throw ConfigError("'" + path + "' line " + std::to_string(lineno) + ": not a number");
      row.push_back(v);
      pos = end + 1;
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace

Signal read_signal_csv(const std::string& path) {
  const auto rows = read_table(path, "t_s,value");
  std::vector<double> t, v;
  for (const auto& r : rows) {
    if (r.size() != 2) throw ConfigError("'" + path + "': expected 2 columns");
    t.push_back(r[0]);
    v.push_back(r[1]);
  }
  try {
    return Signal(std::move(t), std::move(v));
  } catch (const DomainError& e) {
    throw ConfigError("'" + path + "': " + e.what());
  }
}

ProbeSeries read_probes_csv(const std::string& path) {
  const auto rows = read_table(path, "t_s,T_surf_K,T_core_K,moisture_kgm2,massloss_kgm2");
  ProbeSeries p;
  for (const auto& r : rows) {
    if (r.size() != 5) throw ConfigError("'" + path + "': expected 5 columns");
    p.time.push_back(r[0]);
    p.surface_temperature.push_back(r[1]);
    p.core_temperature.push_back(r[2]);
    p.moisture.push_back(r[3]);
    p.mass_loss.push_back(r[4]);
  }
  return p;
}

}  // namespace dtwin::io
