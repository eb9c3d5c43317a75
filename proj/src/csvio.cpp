#include "salp/csvio.hpp"

#include <cerrno>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace salp {

std::string format_g17(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void atomic_write(const std::string& path, const std::string& content) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open for writing: " + tmp);
    out << content;
    out.flush();
    if (!out) throw std::runtime_error("write failed: " + tmp);
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0) {
    std::remove(tmp.c_str());
    throw std::runtime_error("rename failed: " + path + ": " + std::strerror(errno));
  }
}

std::string trajectory_csv(const TrajectoryRun& run) {
  const int nj = static_cast<int>(run.shapes.cols());
  const int n = static_cast<int>(run.commands.cols());
  std::ostringstream out;
  out << "t, x, y, theta";
  for (int j = 0; j < nj; ++j) out << ", alpha_" << j + 1;
  for (int i = 0; i < n; ++i) out << ", u_" << i + 1;
  for (int i = 0; i < n; ++i) out << ", f_" << i + 1;
  out << "\n";
  for (int s = 0; s < run.samples(); ++s) {
    out << format_g17(s / run.rate) << ", " << format_g17(run.poses[s].x) << ", "
        << format_g17(run.poses[s].y) << ", " << format_g17(run.poses[s].theta);
    for (int j = 0; j < nj; ++j) out << ", " << format_g17(run.shapes(s, j));
    for (int i = 0; i < n; ++i) out << ", " << format_g17(run.commands(s, i));
    for (int i = 0; i < n; ++i) out << ", " << format_g17(run.forces(s, i));
    out << "\n";
  }
  return out.str();
}

void write_trajectory_csv(const std::string& path, const TrajectoryRun& run) {
  atomic_write(path, trajectory_csv(run));
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      fields.push_back(cur);
      cur.clear();
    } else if (!std::isspace(static_cast<unsigned char>(c))) {
      cur += c;
    }
  }
  fields.push_back(cur);
  return fields;
}

}  // namespace

TrajectoryRun read_trajectory_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open trajectory file: " + path);
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("empty trajectory file: " + path);

  const std::vector<std::string> header = split_csv_line(line);
  int nj = 0, n = 0, nf = 0;
  for (const auto& h : header) {
    if (h.rfind("alpha_", 0) == 0) ++nj;
    else if (h.rfind("u_", 0) == 0) ++n;
    else if (h.rfind("f_", 0) == 0) ++nf;
  }
  if (header.size() < 4 || header[0] != "t" || header[1] != "x" || header[2] != "y" ||
      header[3] != "theta")
    throw std::runtime_error(path + ": header must start with t, x, y, theta");
  if (n == 0) throw std::runtime_error(path + ": missing command columns u_*");
  if (nf != n)
    throw std::runtime_error(path + ": expected " + std::to_string(n) + " force columns f_*, found " +
                             std::to_string(nf));
  const size_t expect = 4 + nj + 2 * static_cast<size_t>(n);
  if (header.size() != expect) throw std::runtime_error(path + ": unexpected column in header");

  std::vector<double> times;
  std::vector<std::vector<double>> rows;
  size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const std::vector<std::string> f = split_csv_line(line);
    if (f.size() != expect)
      throw std::runtime_error(path + ":" + std::to_string(lineno) + ": wrong field count");
    std::vector<double> vals(expect);
    for (size_t k = 0; k < expect; ++k) {
      try {
        size_t used = 0;
        vals[k] = std::stod(f[k], &used);
        if (used != f[k].size()) throw std::invalid_argument(f[k]);
      } catch (const std::exception&) {
        throw std::runtime_error(path + ":" + std::to_string(lineno) + ": bad value in column " +
                                 header[k]);
      }
    }
    times.push_back(vals[0]);
    rows.push_back(std::move(vals));
  }
  if (rows.size() < 2) throw std::runtime_error(path + ": need at least two samples");

  TrajectoryRun run;
  run.rate = 1.0 / ((times.back() - times.front()) / (times.size() - 1));
  const int S = static_cast<int>(rows.size());
  run.poses.reserve(S);
  run.shapes.resize(S, nj);
  run.commands.resize(S, n);
  run.forces.resize(S, n);
  for (int s = 0; s < S; ++s) {
    const auto& v = rows[s];
    run.poses.emplace_back(v[1], v[2], v[3]);
    for (int j = 0; j < nj; ++j) run.shapes(s, j) = v[4 + j];
    for (int i = 0; i < n; ++i) run.commands(s, i) = v[4 + nj + i];
    for (int i = 0; i < n; ++i) run.forces(s, i) = v[4 + nj + n + i];
  }
  return run;
}

void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows) {
  std::ostringstream out;
  for (size_t k = 0; k < header.size(); ++k) out << (k ? ", " : "") << header[k];
  out << "\n";
  for (const auto& row : rows) {
    for (size_t k = 0; k < row.size(); ++k) out << (k ? ", " : "") << format_g17(row[k]);
    out << "\n";
  }
  atomic_write(path, out.str());
}

}  // namespace salp
