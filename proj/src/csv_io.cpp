#include "gatelab/csv_io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace gatelab {

namespace {

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream is(line);
  while (std::getline(is, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

template <class T>
T parse_number(const std::string& s, const std::filesystem::path& path, std::size_t line) {
  T v{};
  const auto* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || ptr != end)
    throw std::runtime_error(path.string() + ":" + std::to_string(line) + ": bad number '" + s + "'");
  return v;
}

std::ofstream open_out(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  return out;
}

std::string strip_cr(std::string s) {
  if (!s.empty() && s.back() == '\r') s.pop_back();
  return s;
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc()) throw std::runtime_error("cannot format number");
  return std::string(buf, ptr);
}

void write_records_csv(const std::filesystem::path& path, std::span<const SweepRecord> records) {
  auto out = open_out(path);
  out << kRecordHeader << '\n';
  for (const auto& r : records) {
    out << r.config_id << ',' << r.seed << ',' << r.N << ',' << format_double(r.ratio) << ','
        << format_double(r.r_min) << ',' << r.mode << ',' << r.task_id << ',' << to_string(r.category) << ','
        << format_double(r.p_true) << ',' << (r.binding ? 1 : 0) << ',' << format_double(r.r_sel) << ',' << r.y_sel
        << ',' << format_double(r.payoff_sel) << '\n';
  }
  if (!out) throw std::runtime_error("error while writing " + path.string());
}

std::vector<SweepRecord> read_records_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open records file " + path.string());
  std::string line;
  if (!std::getline(in, line) || strip_cr(line) != kRecordHeader)
    throw std::runtime_error(path.string() + ": unexpected header (want " + std::string(kRecordHeader) + ")");
  std::vector<SweepRecord> out;
  std::size_t n = 1;
  while (std::getline(in, line)) {
    ++n;
    line = strip_cr(line);
    if (line.empty()) continue;
    const auto f = split(line);
    if (f.size() != 13) throw std::runtime_error(path.string() + ":" + std::to_string(n) + ": expected 13 fields");
    SweepRecord r;
    r.config_id = parse_number<std::uint32_t>(f[0], path, n);
    r.seed = parse_number<std::uint64_t>(f[1], path, n);
    r.N = parse_number<int>(f[2], path, n);
    r.ratio = parse_number<double>(f[3], path, n);
    r.r_min = parse_number<double>(f[4], path, n);
    r.mode = f[5];
    r.task_id = parse_number<int>(f[6], path, n);
    r.category = parse_category(f[7]);
    r.p_true = parse_number<double>(f[8], path, n);
    r.binding = parse_number<int>(f[9], path, n) != 0;
    r.r_sel = parse_number<double>(f[10], path, n);
    r.y_sel = parse_number<int>(f[11], path, n);
    r.payoff_sel = parse_number<double>(f[12], path, n);
    out.push_back(std::move(r));
  }
  return out;
}

void write_tasks_csv(const std::filesystem::path& path, std::span<const Task> tasks) {
  auto out = open_out(path);
  out << "task_id,category,p_true\n";
  for (const auto& t : tasks) out << t.id << ',' << to_string(t.category) << ',' << format_double(t.p_true) << '\n';
}

void write_binding_csv(const std::filesystem::path& path, const BindingEstimate& est) {
  auto out = open_out(path);
  out << "task_id,p_hat";
  for (double r : est.r_min) out << ",binding_" << format_double(r);
  out << '\n';
  for (std::size_t t = 0; t < est.p_hat.size(); ++t) {
    out << est.task_ids[t] << ',' << format_double(est.p_hat[t]);
    for (bool b : est.flags[t]) out << ',' << (b ? 1 : 0);
    out << '\n';
  }
}

std::pair<std::vector<double>, std::vector<int>> read_forecast_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error(path.string() + ": empty file");
  const auto header = split(strip_cr(line));
  long ri = -1, yi = -1;
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == "r" || header[i] == "r_sel") ri = static_cast<long>(i);
    if (header[i] == "y" || header[i] == "y_sel") yi = static_cast<long>(i);
  }
  if (ri < 0 || yi < 0) throw std::runtime_error(path.string() + ": need columns r,y or r_sel,y_sel");
  std::pair<std::vector<double>, std::vector<int>> out;
  std::size_t n = 1;
  while (std::getline(in, line)) {
    ++n;
    line = strip_cr(line);
    if (line.empty()) continue;
    const auto f = split(line);
    if (static_cast<long>(f.size()) <= std::max(ri, yi))
      throw std::runtime_error(path.string() + ":" + std::to_string(n) + ": missing fields");
    out.first.push_back(parse_number<double>(f[ri], path, n));
    out.second.push_back(parse_number<int>(f[yi], path, n));
  }
  return out;
}

}  // namespace gatelab
